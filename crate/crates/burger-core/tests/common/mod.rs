#![allow(dead_code)]
//! Helpers shared by the integration tests: a naive string rewriter that
//! applies the relations one adjacent pair at a time, and random words.

use rand::Rng;

/// Replacement for the adjacent pair `ab`, if a relation applies.
pub fn rule(a: char, b: char) -> Option<&'static str> {
    Some(match (a, b) {
        ('h', 'H') | ('c', 'C') | ('h', 'F') | ('c', 'F') => "",
        ('c', 'H') => "Hc",
        ('h', 'C') => "Ch",
        ('h', 'S') => "hC",
        ('c', 'S') => "cH",
        ('h', 'D') => "hh",
        ('c', 'D') => "cc",
        ('h', 'E') => "hc",
        ('c', 'E') => "ch",
        _ => return None,
    })
}

/// Rewrite until no relation applies, choosing the position at random.
pub fn naive_reduce<R: Rng>(word: &str, rng: &mut R) -> String {
    let mut w: Vec<char> = word.chars().collect();
    loop {
        let sites: Vec<usize> = (0..w.len().saturating_sub(1)).filter(|&i| rule(w[i], w[i + 1]).is_some()).collect();
        if sites.is_empty() {
            return w.into_iter().collect();
        }
        let i = sites[rng.gen_range(0..sites.len())];
        let rep: Vec<char> = rule(w[i], w[i + 1]).unwrap().chars().collect();
        w.splice(i..i + 2, rep);
    }
}

/// Leftmost-first rewriting, deterministic.
pub fn naive_reduce_leftmost(word: &str) -> String {
    let mut w: Vec<char> = word.chars().collect();
    while let Some(i) = (0..w.len().saturating_sub(1)).find(|&i| rule(w[i], w[i + 1]).is_some()) {
        let rep: Vec<char> = rule(w[i], w[i + 1]).unwrap().chars().collect();
        w.splice(i..i + 2, rep);
    }
    w.into_iter().collect()
}

pub fn burger_count(w: &str) -> usize {
    w.chars().filter(|c| "hcDE".contains(*c)).count()
}

pub fn random_word<R: Rng>(rng: &mut R, letters: &str, max_len: usize) -> String {
    let letters: Vec<char> = letters.chars().collect();
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| letters[rng.gen_range(0..letters.len())]).collect()
}

pub const ALL: &str = "hcHCFSDE";
pub const PLAIN: &str = "hcHC";

use burger_core::{counts, dagger, format_word, identify, parse_word, psi, r_index, reduce, s_index, substitute_hc};

fn red(w: &str) -> String {
    format_word(&reduce(&parse_word(w).unwrap()).symbols())
}

pub fn prop_associativity(x: &str, y: &str) -> bool {
    let joined = format!("{}{}", red(x), red(y));
    red(&joined) == red(&format!("{x}{y}"))
}

pub fn prop_idempotence(x: &str) -> bool {
    let r = red(x);
    red(&r) == r && naive_reduce_leftmost(&r) == r
}

pub fn prop_confluence<R: Rng>(x: &str, rng: &mut R) -> bool {
    naive_reduce(x, rng) == red(x)
}

pub fn prop_conservation(x: &str) -> bool {
    let w = parse_word(x).unwrap();
    let raw = x.chars().filter(|c| "hcDE".contains(*c)).count() as i64 - x.chars().filter(|c| "HCFS".contains(*c)).count() as i64;
    counts(&reduce(&w).symbols()).c() == raw
}

pub fn prop_identification(x: &str) -> bool {
    let w = parse_word(x).unwrap();
    let id = identify(&w);
    id.len() == w.len()
        && id.iter().zip(&w).all(|(a, b)| a.is_burger() == b.is_burger())
        && reduce(&id).symbols() == reduce(&w).symbols()
}

pub fn prop_dagger(x: &str) -> bool {
    let w = parse_word(x).unwrap();
    reduce(&dagger(&w)).symbols() == dagger(&reduce(&w).symbols())
}

pub fn prop_psi(x: &str) -> bool {
    let w = parse_word(x).unwrap();
    let p = psi(&w);
    psi(&p) == w && s_index(&p) == s_index(&w) && r_index(&p) == r_index(&w)
}

/// None if x does not qualify, otherwise whether both equalities hold.
/// Burger counts come from the naive rewriter.
pub fn prop_flip(x: &str) -> Option<bool> {
    let w = parse_word(x).unwrap();
    if s_index(&w) == 0 {
        return None;
    }
    let b = |v: &[burger_core::Symbol]| burger_count(&naive_reduce_leftmost(&format_word(v)));
    let xh = substitute_hc(&w);
    if b(&xh) <= b(&w) {
        return None;
    }
    let p = psi(&w);
    Some(b(&xh) == b(&w) + 1 && b(&substitute_hc(&p)) + 1 == b(&p))
}
