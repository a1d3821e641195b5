//! Exact enumeration over short words with rational probabilities.
//!
//! Words are enumerated depth-first over the letters with positive mass.
//! Leaves are tallied by (letter counts, outcome), so the rational
//! arithmetic only runs once per distinct key.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::bijection::activity_counts;
use crate::reduce::Reducer;
use crate::symbol::{format_word, Symbol, Word};

pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("enumeration needs about {needed} steps, budget is {budget}")]
    WorkBound { needed: u128, budget: u64 },
    #[error("invalid exact parameters: {0}")]
    Param(String),
    #[error("no word of length {0} reduces to the empty word under these parameters")]
    EmptyLaw(usize),
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parse "3", "-1/2" or "0.25" into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((i, f)) = s.split_once('.') {
        let neg = i.starts_with('-');
        let digits = format!("{}{}", i.trim_start_matches('-'), f);
        let n: BigInt = digits.parse().ok()?;
        let d = num_traits::pow(BigInt::from(10), f.len());
        let r = BigRational::new(n, d);
        return Some(if neg { -r } else { r });
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

/// Exact (p_FO, p_SO, p_DB, p_EB).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactParams {
    pub pf: BigRational,
    pub ps: BigRational,
    pub pd: BigRational,
    pub pe: BigRational,
}

impl ExactParams {
    pub fn new(pf: BigRational, ps: BigRational, pd: BigRational, pe: BigRational) -> Result<Self, OracleError> {
        let p = ExactParams { pf, ps, pd, pe };
        for (name, v) in [("pf", &p.pf), ("ps", &p.ps), ("pd", &p.pd), ("pe", &p.pe)] {
            if v.is_negative() || *v > BigRational::one() {
                return Err(OracleError::Param(format!("{name}={v} outside [0,1]")));
            }
        }
        if &p.pf + &p.ps > BigRational::one() {
            return Err(OracleError::Param("p_FO + p_SO exceeds 1".into()));
        }
        if &p.pd + &p.pe >= BigRational::one() {
            return Err(OracleError::Param("p_DB + p_EB must be below 1".into()));
        }
        Ok(p)
    }

    pub fn from_ints(v: [(i64, i64); 4]) -> Result<Self, OracleError> {
        let [a, b, c, d] = v.map(|(n, d)| rat(n, d));
        Self::new(a, b, c, d)
    }

    /// Stale orders with probability p and duplicate burgers with probability q.
    pub fn stale_duplicate(p: BigRational, q: BigRational) -> Result<Self, OracleError> {
        Self::new(BigRational::zero(), p, q, BigRational::zero())
    }

    /// The one-sided parameter vector with activity weights (y, z).
    pub fn from_yz(y: &BigRational, z: &BigRational) -> Result<Self, OracleError> {
        if y.is_negative() || !z.is_positive() {
            return Err(OracleError::Param(format!("need y >= 0 and z > 0, got y={y}, z={z}")));
        }
        let one = BigRational::one();
        let side = |w: &BigRational| {
            if *w <= one {
                (BigRational::zero(), (&one - w) / (&one + w))
            } else {
                ((w - &one) / (w + &one), BigRational::zero())
            }
        };
        let (pf, ps) = side(y);
        let (pd, pe) = side(z);
        Self::new(pf, ps, pd, pe)
    }

    pub fn yz(&self) -> (BigRational, BigRational) {
        let one = BigRational::one();
        (
            (&one + &self.pf - &self.ps) / (&one - &self.pf + &self.ps),
            (&one + &self.pd - &self.pe) / (&one - &self.pd + &self.pe),
        )
    }

    /// Symbol masses indexed like `Symbol::ALL`.
    pub fn masses(&self) -> [BigRational; 8] {
        let one = BigRational::one();
        let half = rat(1, 2);
        let quarter = rat(1, 4);
        let plain_o = (&one - &self.pf - &self.ps) * &quarter;
        let plain_b = (&one - &self.pd - &self.pe) * &quarter;
        [
            plain_b.clone(),
            plain_b,
            plain_o.clone(),
            plain_o,
            &self.pf * &half,
            &self.ps * &half,
            &self.pd * &half,
            &self.pe * &half,
        ]
    }

    pub fn support(&self) -> Vec<Symbol> {
        let m = self.masses();
        Symbol::ALL.into_iter().filter(|s| !m[s.index()].is_zero()).collect()
    }
}

/// Σ_{k=1..depth} width^k, the number of DFS nodes without pruning.
pub fn work_estimate(width: usize, depth: usize) -> u128 {
    let mut total = 0u128;
    let mut layer = 1u128;
    for _ in 0..depth {
        layer = layer.saturating_mul(width as u128);
        total = total.saturating_add(layer);
    }
    total
}

fn check_budget(width: usize, depth: usize, budget: u64) -> Result<(), OracleError> {
    let needed = work_estimate(width, depth);
    if needed > budget as u128 {
        return Err(OracleError::WorkBound { needed, budget });
    }
    Ok(())
}

type LetterCounts = [u8; 8];

fn word_probability(masses: &[BigRational; 8], c: &LetterCounts) -> BigRational {
    let mut p = BigRational::one();
    for (i, &k) in c.iter().enumerate() {
        if k > 0 {
            p *= num_traits::pow(masses[i].clone(), k as usize);
        }
    }
    p
}

fn merge_counts<K: Ord>(mut a: BTreeMap<K, u64>, b: BTreeMap<K, u64>) -> BTreeMap<K, u64> {
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

/// Number of words over HB, CB, HO, CO of length 2n that reduce to the empty word.
pub fn mullin_count(n: usize) -> Result<u64, OracleError> {
    mullin_count_with_budget(n, DEFAULT_BUDGET)
}

pub fn mullin_count_with_budget(n: usize, budget: u64) -> Result<u64, OracleError> {
    Ok(mullin_words_with_budget(n, budget)?.len() as u64)
}

/// All words over HB, CB, HO, CO of length 2n with empty reduction, in
/// lexicographic symbol order.
pub fn mullin_words(n: usize) -> Result<Vec<Word>, OracleError> {
    mullin_words_with_budget(n, DEFAULT_BUDGET)
}

pub fn mullin_words_with_budget(n: usize, budget: u64) -> Result<Vec<Word>, OracleError> {
    check_budget(4, 2 * n, budget)?;
    fn rec(m: &Reducer, w: &mut Word, len: usize, out: &mut Vec<Word>) {
        if w.len() == len {
            if m.right_len() == 0 {
                out.push(w.clone());
            }
            return;
        }
        for s in Symbol::PLAIN {
            let mut next = m.clone();
            next.push(s);
            if !next.left().is_empty() || next.right_len() > len - w.len() - 1 {
                continue;
            }
            w.push(s);
            rec(&next, w, len, out);
            w.pop();
        }
    }
    let mut out = Vec::new();
    rec(&Reducer::new(), &mut Vec::new(), 2 * n, &mut out);
    Ok(out)
}

/// Events defined by the path k ↦ 𝒞(X(1,k)), k = 0..n.
#[derive(Clone, Copy, Debug)]
pub enum PathEvent {
    Full,
    /// 𝒞 never negative.
    NonNegative,
    /// 𝒞(X(1,n)) = 0.
    EndsAtZero,
    Custom(fn(&[i64]) -> bool),
}

impl PathEvent {
    pub fn holds(&self, path: &[i64]) -> bool {
        match self {
            PathEvent::Full => true,
            PathEvent::NonNegative => path.iter().all(|&c| c >= 0),
            PathEvent::EndsAtZero => path.last() == Some(&0),
            PathEvent::Custom(f) => f(path),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PathEvent::Full => "full",
            PathEvent::NonNegative => "C>=0",
            PathEvent::EndsAtZero => "C(n)=0",
            PathEvent::Custom(_) => "custom",
        }
    }
}

/// E[𝓑(X(1,n)) 1_E], E[𝓞(X(1,n)) 1_E] and P(E).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expectations {
    pub burgers: BigRational,
    pub orders: BigRational,
    pub prob: BigRational,
}

pub fn exact_expectations(p: &ExactParams, n: usize, event: PathEvent) -> Result<Expectations, OracleError> {
    exact_expectations_with_budget(p, n, event, DEFAULT_BUDGET)
}

pub fn exact_expectations_with_budget(
    p: &ExactParams,
    n: usize,
    event: PathEvent,
    budget: u64,
) -> Result<Expectations, OracleError> {
    let alphabet = p.support();
    check_budget(alphabet.len(), n, budget)?;
    type Key = (LetterCounts, usize, usize);
    fn rec(
        m: &Reducer,
        alphabet: &[Symbol],
        counts: &mut LetterCounts,
        path: &mut Vec<i64>,
        n: usize,
        event: PathEvent,
        out: &mut BTreeMap<Key, u64>,
    ) {
        if path.len() == n + 1 {
            if event.holds(path) {
                let r = m.snapshot().counts();
                *out.entry((*counts, r.burgers() as usize, r.orders() as usize)).or_insert(0) += 1;
            }
            return;
        }
        for &s in alphabet {
            let mut next = m.clone();
            next.push(s);
            counts[s.index()] += 1;
            path.push(path.last().unwrap() + if s.is_burger() { 1 } else { -1 });
            rec(&next, alphabet, counts, path, n, event, out);
            path.pop();
            counts[s.index()] -= 1;
        }
    }
    let tally = if n == 0 {
        let mut t = BTreeMap::new();
        if event.holds(&[0]) {
            t.insert(([0u8; 8], 0, 0), 1);
        }
        t
    } else {
        alphabet
            .par_iter()
            .map(|&first| {
                let mut m = Reducer::new();
                m.push(first);
                let mut counts = [0u8; 8];
                counts[first.index()] = 1;
                let mut path = vec![0, if first.is_burger() { 1 } else { -1 }];
                let mut out = BTreeMap::new();
                rec(&m, &alphabet, &mut counts, &mut path, n, event, &mut out);
                out
            })
            .reduce(BTreeMap::new, merge_counts)
    };
    let masses = p.masses();
    let mut e = Expectations { burgers: BigRational::zero(), orders: BigRational::zero(), prob: BigRational::zero() };
    for ((c, b, o), k) in tally {
        let w = word_probability(&masses, &c) * BigRational::from_integer(BigInt::from(k));
        e.burgers += &w * BigRational::from_integer(BigInt::from(b));
        e.orders += &w * BigRational::from_integer(BigInt::from(o));
        e.prob += w;
    }
    Ok(e)
}

/// Law of 𝓘(X) given 𝓡(X) = ∅ for words of length 2n, keyed by the
/// identified word in letter encoding.
///
/// With p_SO = 1 no plain order can be active, so the last letter is allowed
/// to be a flexible order (with the mass of an ordinary order) instead.
pub fn conditioned_identified_law(p: &ExactParams, n: usize) -> Result<BTreeMap<String, BigRational>, OracleError> {
    conditioned_identified_law_with_budget(p, n, DEFAULT_BUDGET)
}

pub fn conditioned_identified_law_with_budget(
    p: &ExactParams,
    n: usize,
    budget: u64,
) -> Result<BTreeMap<String, BigRational>, OracleError> {
    let len = 2 * n;
    let alphabet = p.support();
    check_budget(alphabet.len(), len, budget)?;
    let last_fo = p.ps == BigRational::one();
    type Key = (String, LetterCounts);
    #[allow(clippy::too_many_arguments)]
    fn rec(
        m: &Reducer,
        alphabet: &[Symbol],
        last_fo: bool,
        counts: &mut LetterCounts,
        ident: &mut Word,
        len: usize,
        out: &mut BTreeMap<Key, u64>,
    ) {
        if ident.len() == len {
            if m.right_len() == 0 && m.left().is_empty() {
                *out.entry((format_word(ident), *counts)).or_insert(0) += 1;
            }
            return;
        }
        let remaining = len - ident.len() - 1;
        let exception = [Symbol::FO];
        let letters: &[Symbol] = if last_fo && remaining == 0 { &exception } else { alphabet };
        for &s in letters {
            let mut next = m.clone();
            let st = next.push(s);
            if !next.left().is_empty() || next.right_len() > remaining {
                continue;
            }
            let Some(id) = st.identified else { continue };
            // the exceptional last letter is weighted like any order
            counts[if last_fo && remaining == 0 { Symbol::SO.index() } else { s.index() }] += 1;
            ident.push(id);
            rec(&next, alphabet, last_fo, counts, ident, len, out);
            ident.pop();
            counts[if last_fo && remaining == 0 { Symbol::SO.index() } else { s.index() }] -= 1;
        }
    }
    let tally: BTreeMap<Key, u64> = alphabet
        .par_iter()
        .map(|&first| {
            let mut out = BTreeMap::new();
            if len == 0 {
                return out;
            }
            let mut m = Reducer::new();
            let st = m.push(first);
            if !m.left().is_empty() || m.right_len() > len - 1 {
                return out;
            }
            let mut counts = [0u8; 8];
            counts[first.index()] = 1;
            let mut ident = vec![st.identified.unwrap()];
            rec(&m, &alphabet, last_fo, &mut counts, &mut ident, len, &mut out);
            out
        })
        .reduce(BTreeMap::new, merge_counts);
    let masses = p.masses();
    let mut law: BTreeMap<String, BigRational> = BTreeMap::new();
    let mut total = BigRational::zero();
    for ((w, c), k) in tally {
        let pr = word_probability(&masses, &c) * BigRational::from_integer(BigInt::from(k));
        total += &pr;
        *law.entry(w).or_insert_with(BigRational::zero) += pr;
    }
    if total.is_zero() {
        return Err(OracleError::EmptyLaw(len));
    }
    law.retain(|_, v| !v.is_zero());
    for v in law.values_mut() {
        *v /= &total;
    }
    Ok(law)
}

/// Normalized y^{a} z^{d} over all words of length 2n with empty reduction.
/// Every tree has a >= 1, so at y = 0 this is taken as the y → 0 limit:
/// trees with the least a, weighted by z^{d}.
pub fn tree_weight_law(n: usize, y: &BigRational, z: &BigRational) -> Result<BTreeMap<String, BigRational>, OracleError> {
    let words = mullin_words(n)?;
    let acts: Vec<_> = words
        .iter()
        .map(|w| activity_counts(w).expect("words from the enumeration reduce to the empty word"))
        .collect();
    let a_min = acts.iter().map(|r| r.a).min().unwrap_or(0);
    let mut law = BTreeMap::new();
    let mut total = BigRational::zero();
    for (w, r) in words.iter().zip(&acts) {
        let ya = if y.is_zero() {
            if r.a == a_min { BigRational::one() } else { BigRational::zero() }
        } else {
            num_traits::pow(y.clone(), r.a as usize)
        };
        let wt = ya * num_traits::pow(z.clone(), r.d as usize);
        if wt.is_zero() {
            continue;
        }
        total += &wt;
        law.insert(format_word(w), wt);
    }
    if total.is_zero() {
        return Err(OracleError::EmptyLaw(2 * n));
    }
    for v in law.values_mut() {
        *v /= &total;
    }
    Ok(law)
}

#[derive(Clone, Debug)]
pub struct TreeLawReport {
    pub n: usize,
    pub params: ExactParams,
    pub law: BTreeMap<String, BigRational>,
    pub weights: BTreeMap<String, BigRational>,
    pub equal: bool,
}

impl TreeLawReport {
    /// Words where the two laws differ.
    pub fn mismatches(&self) -> Vec<String> {
        let zero = BigRational::zero();
        let mut keys: Vec<&String> = self.law.keys().chain(self.weights.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .filter(|k| self.law.get(*k).unwrap_or(&zero) != self.weights.get(*k).unwrap_or(&zero))
            .cloned()
            .collect()
    }
}

/// Compare the conditioned identified-word law at the canonical parameters
/// of (y, z) with the weights y^{a} z^{d}.
pub fn conditional_tree_law(n: usize, y: &BigRational, z: &BigRational) -> Result<TreeLawReport, OracleError> {
    let params = ExactParams::from_yz(y, z)?;
    let law = conditioned_identified_law(&params, n)?;
    let weights = tree_weight_law(n, y, z)?;
    let equal = law == weights;
    Ok(TreeLawReport { n, params, law, weights, equal })
}

#[derive(Clone, Debug)]
pub struct InvarianceReport {
    pub law_a: BTreeMap<String, BigRational>,
    pub law_b: BTreeMap<String, BigRational>,
    pub equal: bool,
}

/// Compare conditioned identified-word laws for two parameter vectors with
/// the same p_FO − p_SO and p_DB − p_EB.
pub fn identification_law_invariance(a: &ExactParams, b: &ExactParams, n: usize) -> Result<InvarianceReport, OracleError> {
    if &a.pf - &a.ps != &b.pf - &b.ps || &a.pd - &a.pe != &b.pd - &b.pe {
        return Err(OracleError::Param("parameter differences disagree".into()));
    }
    let law_a = conditioned_identified_law(a, n)?;
    let law_b = conditioned_identified_law(b, n)?;
    let equal = law_a == law_b;
    Ok(InvarianceReport { law_a, law_b, equal })
}

/// Decimal rendering with `digits` places, for reports.
pub fn to_decimal(r: &BigRational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let neg = r.is_negative();
    let a = r.abs();
    let scaled: BigInt = (a.numer() * &scale * 2 + a.denom()) / (a.denom() * 2);
    let s = scaled.to_string();
    let s = if s.len() <= digits { format!("{}{}", "0".repeat(digits + 1 - s.len()), s) } else { s };
    let (i, f) = s.split_at(s.len() - digits);
    let sign = if neg && scaled > BigInt::zero() { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{i}")
    } else {
        format!("{sign}{i}.{f}")
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parse_and_print() {
        assert_eq!(q("1/3"), rat(1, 3));
        assert_eq!(q("0.25"), rat(1, 4));
        assert_eq!(q("-1.5"), rat(-3, 2));
        assert_eq!(q("2"), rat(2, 1));
        assert!(parse_rational("1/0").is_none());
        assert_eq!(to_decimal(&rat(1, 3), 4), "0.3333");
        assert_eq!(to_decimal(&rat(-2, 3), 2), "-0.67");
        assert_eq!(to_decimal(&rat(5, 1), 0), "5");
    }

    #[test]
    fn mullin_small() {
        assert_eq!(mullin_count(0).unwrap(), 1);
        assert_eq!(mullin_count(1).unwrap(), 2);
        assert_eq!(mullin_count(2).unwrap(), 10);
        assert!(matches!(mullin_count_with_budget(5, 1000), Err(OracleError::WorkBound { .. })));
    }

    #[test]
    fn canonical_params() {
        let p = ExactParams::from_yz(&q("1/3"), &q("2")).unwrap();
        assert_eq!(p.ps, q("1/2"));
        assert_eq!(p.pd, q("1/3"));
        assert_eq!(p.yz(), (q("1/3"), q("2")));
        let total: BigRational = p.masses().iter().sum();
        assert!(total.is_one());
        assert!(ExactParams::from_ints([(1, 2), (2, 3), (0, 1), (0, 1)]).is_err());
    }

    #[test]
    fn one_letter_mean() {
        for p in [ExactParams::from_ints([(0, 1); 4]).unwrap(), ExactParams::from_ints([(1, 4), (1, 2), (1, 3), (1, 5)]).unwrap()] {
            let e = exact_expectations(&p, 1, PathEvent::Full).unwrap();
            assert_eq!(e.burgers, rat(1, 2));
            assert!(e.prob.is_one());
        }
    }

    #[test]
    fn uniform_tree_law_n1() {
        let r = conditional_tree_law(1, &q("1"), &q("1")).unwrap();
        assert!(r.equal);
        assert_eq!(r.law.len(), 2);
        assert_eq!(r.law["hH"], rat(1, 2));
        assert_eq!(r.law["cC"], rat(1, 2));
    }

    #[test]
    fn tree_law_n2() {
        for (y, z) in [("1/3", "1"), ("1", "2")] {
            let r = conditional_tree_law(2, &q(y), &q(z)).unwrap();
            assert_eq!(r.weights.len(), 10);
            assert!(r.equal, "{y} {z}: {:?}", r.mismatches());
        }
    }

    #[test]
    fn flexible_stale_invariance() {
        let a = ExactParams::from_ints([(0, 1), (1, 2), (0, 1), (0, 1)]).unwrap();
        let b = ExactParams::from_ints([(1, 4), (3, 4), (0, 1), (0, 1)]).unwrap();
        assert!(identification_law_invariance(&a, &b, 2).unwrap().equal);
        assert!(identification_law_invariance(&a, &a, 2).unwrap().equal);
        let c = ExactParams::from_ints([(0, 1), (0, 1), (1, 3), (0, 1)]).unwrap();
        assert!(identification_law_invariance(&a, &c, 2).is_err());
    }
}
