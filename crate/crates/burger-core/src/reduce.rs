//! Reduction, identification and matching of finite words.
//!
//! The machine keeps the reduced prefix in two parts: a left segment of
//! orders and unidentified specials, and a right segment of plain burgers.
//! The right segment is stored as one stack per burger type; a global
//! sequence number tells which stack holds the rightmost burger.

use std::fmt;

use serde::Serialize;

use crate::symbol::{format_word, Kind, Symbol, Word};

/// What happened to one appended symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    /// Plain value the symbol acts as, `None` if it stayed unidentified.
    pub identified: Option<Symbol>,
    /// Index of the burger consumed by this symbol.
    pub consumed: Option<usize>,
    /// Type of the rightmost burger just before the symbol arrived.
    pub top_before: Option<Kind>,
}

impl Step {
    /// An order that ate the rightmost burger.
    pub fn is_active(&self) -> bool {
        match (self.identified, self.top_before, self.consumed) {
            (Some(s), Some(top), Some(_)) => s.is_order() && s.kind() == Some(top),
            _ => false,
        }
    }

    /// A burger of the same type as the rightmost burger.
    pub fn is_duplicate(&self) -> bool {
        match (self.identified, self.top_before) {
            (Some(s), Some(top)) => s.is_burger() && s.kind() == Some(top),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Reducer {
    left: Vec<(Symbol, usize)>,
    ham: Vec<(u64, usize)>,
    cheese: Vec<(u64, usize)>,
    seq: u64,
    len: usize,
}

impl Reducer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Resume from a reduced word.
    pub fn from_reduced(r: &ReducedWord) -> Self {
        let mut m = Reducer {
            left: r.left.clone(),
            ..Default::default()
        };
        for &(s, i) in &r.right {
            m.push_burger(s.kind().expect("right segment holds plain burgers"), i);
        }
        m.len = r.source_len;
        m
    }

    /// Number of symbols fed so far.
    pub fn source_len(&self) -> usize {
        self.len
    }

    pub fn top(&self) -> Option<Kind> {
        match (self.ham.last(), self.cheese.last()) {
            (None, None) => None,
            (Some(_), None) => Some(Kind::Ham),
            (None, Some(_)) => Some(Kind::Cheese),
            (Some(h), Some(c)) => Some(if h.0 > c.0 { Kind::Ham } else { Kind::Cheese }),
        }
    }

    pub fn burgers_of(&self, k: Kind) -> usize {
        match k {
            Kind::Ham => self.ham.len(),
            Kind::Cheese => self.cheese.len(),
        }
    }

    pub fn right_len(&self) -> usize {
        self.ham.len() + self.cheese.len()
    }

    pub fn left(&self) -> &[(Symbol, usize)] {
        &self.left
    }

    fn push_burger(&mut self, k: Kind, idx: usize) {
        self.seq += 1;
        match k {
            Kind::Ham => self.ham.push((self.seq, idx)),
            Kind::Cheese => self.cheese.push((self.seq, idx)),
        }
    }

    fn order(&mut self, k: Kind, idx: usize) -> Option<usize> {
        let stack = match k {
            Kind::Ham => &mut self.ham,
            Kind::Cheese => &mut self.cheese,
        };
        match stack.pop() {
            Some((_, b)) => Some(b),
            None => {
                self.left.push((k.order(), idx));
                None
            }
        }
    }

    /// Append the next symbol; its index is the running source length.
    pub fn push(&mut self, s: Symbol) -> Step {
        let idx = self.len;
        self.push_indexed(s, idx)
    }

    /// Append a symbol carrying an explicit provenance index.
    pub fn push_indexed(&mut self, s: Symbol, idx: usize) -> Step {
        self.len += 1;
        let top = self.top();
        let mut step = Step {
            identified: None,
            consumed: None,
            top_before: top,
        };
        match s {
            Symbol::HB | Symbol::CB => {
                self.push_burger(s.kind().unwrap(), idx);
                step.identified = Some(s);
            }
            Symbol::HO | Symbol::CO => {
                step.consumed = self.order(s.kind().unwrap(), idx);
                step.identified = Some(s);
            }
            Symbol::FO | Symbol::SO => match top {
                Some(t) => {
                    let k = if s == Symbol::FO { t } else { t.other() };
                    step.consumed = self.order(k, idx);
                    step.identified = Some(k.order());
                }
                None => self.left.push((s, idx)),
            },
            Symbol::DB | Symbol::EB => match top {
                Some(t) => {
                    let k = if s == Symbol::DB { t } else { t.other() };
                    self.push_burger(k, idx);
                    step.identified = Some(k.burger());
                }
                None => self.left.push((s, idx)),
            },
        }
        step
    }

    /// Current reduced word.
    pub fn snapshot(&self) -> ReducedWord {
        let mut right = Vec::with_capacity(self.right_len());
        let (mut i, mut j) = (0, 0);
        while i < self.ham.len() || j < self.cheese.len() {
            let take_ham = match (self.ham.get(i), self.cheese.get(j)) {
                (Some(h), Some(c)) => h.0 < c.0,
                (Some(_), None) => true,
                _ => false,
            };
            if take_ham {
                right.push((Symbol::HB, self.ham[i].1));
                i += 1;
            } else {
                right.push((Symbol::CB, self.cheese[j].1));
                j += 1;
            }
        }
        ReducedWord {
            left: self.left.clone(),
            right,
            source_len: self.len,
        }
    }
}

/// Normal form: orders and unidentified specials, then plain burgers.
/// Each entry carries the 0-based index of the source symbol.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ReducedWord {
    pub left: Vec<(Symbol, usize)>,
    pub right: Vec<(Symbol, usize)>,
    pub source_len: usize,
}

impl ReducedWord {
    pub fn symbols(&self) -> Word {
        self.left.iter().chain(&self.right).map(|e| e.0).collect()
    }

    pub fn len(&self) -> usize {
        self.left.len() + self.right.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn counts(&self) -> Counts {
        Counts::of(&self.symbols())
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_word(&self.symbols()))
    }
}

pub fn reduce(x: &[Symbol]) -> ReducedWord {
    let mut m = Reducer::new();
    for &s in x {
        m.push(s);
    }
    m.snapshot()
}

/// Replace every identified special by the plain symbol it acts as.
pub fn identify(x: &[Symbol]) -> Word {
    let mut m = Reducer::new();
    x.iter()
        .map(|&s| m.push(s).identified.unwrap_or(s))
        .collect()
}

/// Reduce the concatenation of two words from their reductions.
pub fn concat_reduced(a: &ReducedWord, b: &ReducedWord) -> ReducedWord {
    let mut m = Reducer::from_reduced(a);
    let off = a.source_len;
    for &(s, i) in b.left.iter().chain(&b.right) {
        m.push_indexed(s, off + i);
    }
    let mut r = m.snapshot();
    r.source_len = a.source_len + b.source_len;
    r
}

/// Partial involution pairing each consumed burger with its order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchMap {
    partner: Vec<Option<usize>>,
}

impl MatchMap {
    pub fn partner(&self, i: usize) -> Option<usize> {
        self.partner[i]
    }

    pub fn len(&self) -> usize {
        self.partner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partner.is_empty()
    }

    /// Pairs `(i, j)` with `i < j`, 0-based, sorted by `i`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.partner
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.filter(|&j| j > i).map(|j| (i, j)))
            .collect()
    }

    pub fn unmatched(&self) -> Vec<usize> {
        (0..self.partner.len())
            .filter(|&i| self.partner[i].is_none())
            .collect()
    }

    pub fn is_total(&self) -> bool {
        self.partner.iter().all(|p| p.is_some())
    }
}

pub fn match_map(x: &[Symbol]) -> MatchMap {
    let mut partner = vec![None; x.len()];
    let mut m = Reducer::new();
    for (i, &s) in x.iter().enumerate() {
        if let Some(b) = m.push(s).consumed {
            partner[i] = Some(b);
            partner[b] = Some(i);
        }
    }
    MatchMap { partner }
}

/// Symbol tallies of a word.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Counts {
    pub n: [i64; 8],
}

impl Counts {
    pub fn of(x: &[Symbol]) -> Counts {
        let mut c = Counts::default();
        for &s in x {
            c.add(s);
        }
        c
    }

    #[inline]
    pub fn add(&mut self, s: Symbol) {
        self.n[s.index()] += 1;
    }

    pub fn get(&self, s: Symbol) -> i64 {
        self.n[s.index()]
    }

    pub fn burgers(&self) -> i64 {
        self.n[0] + self.n[1] + self.n[6] + self.n[7]
    }

    pub fn orders(&self) -> i64 {
        self.n[2] + self.n[3] + self.n[4] + self.n[5]
    }

    /// burgers minus orders
    pub fn c(&self) -> i64 {
        self.burgers() - self.orders()
    }

    pub fn d(&self) -> i64 {
        self.n[0] - self.n[2]
    }

    pub fn d_star(&self) -> i64 {
        self.n[1] - self.n[3]
    }

    /// d minus d*
    pub fn discrepancy(&self) -> i64 {
        self.d() - self.d_star()
    }
}

pub fn counts(x: &[Symbol]) -> Counts {
    Counts::of(x)
}

/// 1-based index of the rightmost DB or SO, 0 if there is none.
pub fn s_index(x: &[Symbol]) -> usize {
    x.iter()
        .rposition(|&s| s == Symbol::DB || s == Symbol::SO)
        .map_or(0, |i| i + 1)
}

/// Largest k < s(x) with x_k a plain burger left unmatched by x_1..x_{s-1}; 0 if none.
pub fn r_index(x: &[Symbol]) -> usize {
    let s = s_index(x);
    if s == 0 {
        return 0;
    }
    let pre = reduce(&x[..s - 1]);
    pre.right
        .iter()
        .filter(|&&(_, i)| x[i].is_plain())
        .map(|&(_, i)| i + 1)
        .max()
        .unwrap_or(0)
}

fn substitute(x: &[Symbol], ham_side: bool) -> Word {
    let mut out = x.to_vec();
    let s = s_index(x);
    if s > 0 {
        out[s - 1] = match (x[s - 1], ham_side) {
            (Symbol::SO, true) => Symbol::HO,
            (Symbol::SO, false) => Symbol::CO,
            (_, true) => Symbol::CB,
            (_, false) => Symbol::HB,
        };
    }
    out
}

/// x^{Hc}: the s-symbol becomes HO if it is SO, CB if it is DB.
pub fn substitute_hc(x: &[Symbol]) -> Word {
    substitute(x, true)
}

/// x^{Ch}: the s-symbol becomes CO if it is SO, HB if it is DB.
pub fn substitute_ch(x: &[Symbol]) -> Word {
    substitute(x, false)
}

/// Conjugate the segments outside x_r..x_s by the involution.
pub fn psi(x: &[Symbol]) -> Word {
    let s = s_index(x);
    let r = r_index(x);
    let lo = if r > 0 { r - 1 } else { 0 };
    x.iter()
        .enumerate()
        .map(|(i, &c)| if i < lo || i >= s { c.dagger() } else { c })
        .collect()
}
