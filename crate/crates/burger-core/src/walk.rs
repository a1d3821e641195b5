//! Forward simulation of the identified walk and the all-stale block
//! decomposition.

use serde::Serialize;
use thiserror::Error;

use crate::reduce::Counts;
use crate::sampler::{ParamVector, SeededStream};
use crate::stats::{jackknife_merged, CoMoments, Moments};
use crate::symbol::{Kind, Symbol};

#[derive(Debug, Error, PartialEq)]
pub enum WalkError {
    #[error("block decomposition needs p_FO = 0 and p_SO = 1")]
    NotAllStale,
    #[error("symbol {0} cannot occur under the all-stale law")]
    ForeignSymbol(Symbol),
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
}

/// What to do with a special symbol that meets a machine holding no burger.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Fallback {
    /// Flip a fair coin for the burger type it acts as.
    Coin,
    /// Keep it unidentified; it does not move (d, d*).
    LeaveUnidentified,
}

/// Step codes of a trajectory.
pub const UP_H: u8 = 0;
pub const DOWN_H: u8 = 1;
pub const UP_C: u8 = 2;
pub const DOWN_C: u8 = 3;
pub const FREE_BURGER: u8 = 4;
pub const FREE_ORDER: u8 = 5;

/// (Δd, Δd*, Δ𝒞) of a step code.
#[inline]
pub fn step_delta(code: u8) -> (i64, i64, i64) {
    match code {
        UP_H => (1, 0, 1),
        DOWN_H => (-1, 0, -1),
        UP_C => (0, 1, 1),
        DOWN_C => (0, -1, -1),
        FREE_BURGER => (0, 0, 1),
        _ => (0, 0, -1),
    }
}

/// Lean reduction machine: tallies instead of provenance.
#[derive(Clone, Debug)]
pub struct Walker {
    ham: Vec<u64>,
    cheese: Vec<u64>,
    seq: u64,
    left: [i64; 8],
    fallback: Fallback,
    pub unidentified: u64,
    pub coin_flips: u64,
}

impl Walker {
    pub fn new(fallback: Fallback) -> Self {
        Walker {
            ham: Vec::new(),
            cheese: Vec::new(),
            seq: 0,
            left: [0; 8],
            fallback,
            unidentified: 0,
            coin_flips: 0,
        }
    }

    #[inline]
    fn top(&self) -> Option<Kind> {
        match (self.ham.last(), self.cheese.last()) {
            (None, None) => None,
            (Some(_), None) => Some(Kind::Ham),
            (None, Some(_)) => Some(Kind::Cheese),
            (Some(h), Some(c)) => Some(if h > c { Kind::Ham } else { Kind::Cheese }),
        }
    }

    #[inline]
    fn burger(&mut self, k: Kind) -> u8 {
        self.seq += 1;
        match k {
            Kind::Ham => {
                self.ham.push(self.seq);
                UP_H
            }
            Kind::Cheese => {
                self.cheese.push(self.seq);
                UP_C
            }
        }
    }

    #[inline]
    fn order(&mut self, k: Kind) -> u8 {
        let (stack, code, sym) = match k {
            Kind::Ham => (&mut self.ham, DOWN_H, Symbol::HO),
            Kind::Cheese => (&mut self.cheese, DOWN_C, Symbol::CO),
        };
        if stack.pop().is_none() {
            self.left[sym.index()] += 1;
        }
        code
    }

    /// Feed one symbol; the stream supplies fallback coins.
    #[inline]
    pub fn feed(&mut self, s: Symbol, stream: &mut SeededStream) -> u8 {
        match s {
            Symbol::HB => self.burger(Kind::Ham),
            Symbol::CB => self.burger(Kind::Cheese),
            Symbol::HO => self.order(Kind::Ham),
            Symbol::CO => self.order(Kind::Cheese),
            _ => {
                let k = match self.top() {
                    Some(t) => {
                        if s == Symbol::FO || s == Symbol::DB {
                            t
                        } else {
                            t.other()
                        }
                    }
                    None => match self.fallback {
                        Fallback::Coin => {
                            self.coin_flips += 1;
                            if stream.coin() {
                                Kind::Ham
                            } else {
                                Kind::Cheese
                            }
                        }
                        Fallback::LeaveUnidentified => return self.leave(s),
                    },
                };
                if s.is_burger() {
                    self.burger(k)
                } else {
                    self.order(k)
                }
            }
        }
    }

    /// Feed without a coin source; specials at an empty machine stay unidentified.
    pub fn feed_plain(&mut self, s: Symbol) -> u8 {
        match s {
            Symbol::HB => self.burger(Kind::Ham),
            Symbol::CB => self.burger(Kind::Cheese),
            Symbol::HO => self.order(Kind::Ham),
            Symbol::CO => self.order(Kind::Cheese),
            _ => match self.top() {
                Some(t) => {
                    let k = if s == Symbol::FO || s == Symbol::DB { t } else { t.other() };
                    if s.is_burger() {
                        self.burger(k)
                    } else {
                        self.order(k)
                    }
                }
                None => self.leave(s),
            },
        }
    }

    fn leave(&mut self, s: Symbol) -> u8 {
        self.unidentified += 1;
        self.left[s.index()] += 1;
        if s.is_burger() {
            FREE_BURGER
        } else {
            FREE_ORDER
        }
    }

    /// Tallies of the current reduced word.
    pub fn reduced_counts(&self) -> Counts {
        let mut n = self.left;
        n[Symbol::HB.index()] += self.ham.len() as i64;
        n[Symbol::CB.index()] += self.cheese.len() as i64;
        Counts { n }
    }
}

/// Delta-encoded walk over a window of n symbols.
#[derive(Clone, Debug)]
pub struct Trajectory {
    steps: Vec<u8>,
    /// Specials in the window left unidentified.
    pub unidentified: u64,
    /// Specials in the window resolved by a coin.
    pub coin_flips: u64,
    /// Tallies of the reduction of the window alone.
    pub window_counts: Counts,
}

impl Trajectory {
    /// Walk of a fixed word with no burn-in; specials with no burger to
    /// their left stay unidentified.
    pub fn from_word(word: &[Symbol]) -> Self {
        let mut w = Walker::new(Fallback::LeaveUnidentified);
        let steps: Vec<u8> = word.iter().map(|&s| w.feed_plain(s)).collect();
        Trajectory {
            steps,
            unidentified: w.unidentified,
            coin_flips: 0,
            window_counts: w.reduced_counts(),
        }
    }

    pub fn n(&self) -> usize {
        self.steps.len()
    }

    pub fn steps(&self) -> &[u8] {
        &self.steps
    }

    fn series(&self, f: impl Fn((i64, i64, i64)) -> i64) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut acc = 0;
        out.push(0);
        for &c in &self.steps {
            acc += f(step_delta(c));
            out.push(acc);
        }
        out
    }

    /// d(0..=n)
    pub fn d(&self) -> Vec<i64> {
        self.series(|t| t.0)
    }

    /// d*(0..=n)
    pub fn d_star(&self) -> Vec<i64> {
        self.series(|t| t.1)
    }

    /// 𝒞(0..=n)
    pub fn c(&self) -> Vec<i64> {
        self.series(|t| t.2)
    }

    pub fn endpoint(&self) -> (i64, i64, i64) {
        self.steps.iter().fold((0, 0, 0), |a, &c| {
            let d = step_delta(c);
            (a.0 + d.0, a.1 + d.1, a.2 + d.2)
        })
    }
}

/// Run `burnin` symbols, then record the next `n`.
pub fn simulate_forward(
    n: usize,
    burnin: usize,
    stream: &mut SeededStream,
    fallback: Fallback,
) -> Trajectory {
    simulate_forward_with(n, burnin, stream, fallback, |_| {})
}

/// As `simulate_forward`, handing each window symbol to `raw`.
pub fn simulate_forward_with(
    n: usize,
    burnin: usize,
    stream: &mut SeededStream,
    fallback: Fallback,
    mut raw: impl FnMut(Symbol),
) -> Trajectory {
    let mut w = Walker::new(fallback);
    for _ in 0..burnin {
        let s = stream.next_symbol();
        w.feed(s, stream);
    }
    let (u0, c0) = (w.unidentified, w.coin_flips);
    let mut window = Walker::new(Fallback::LeaveUnidentified);
    let mut steps = Vec::with_capacity(n);
    for _ in 0..n {
        let s = stream.next_symbol();
        steps.push(w.feed(s, stream));
        window.feed_plain(s);
        raw(s);
    }
    Trajectory {
        steps,
        unidentified: w.unidentified - u0,
        coin_flips: w.coin_flips - c0,
        window_counts: window.reduced_counts(),
    }
}

/// (d, d*) after each of `checkpoints` equal sub-windows of an n-symbol
/// window; nothing is stored per step.
pub fn simulate_checkpoints(
    n: usize,
    burnin: usize,
    checkpoints: usize,
    stream: &mut SeededStream,
    fallback: Fallback,
) -> Vec<(i64, i64)> {
    let mut w = Walker::new(fallback);
    for _ in 0..burnin {
        let s = stream.next_symbol();
        w.feed(s, stream);
    }
    let mut out = Vec::with_capacity(checkpoints);
    let (mut d, mut ds) = (0i64, 0i64);
    let mut done = 0usize;
    for k in 1..=checkpoints {
        let until = k * n / checkpoints;
        while done < until {
            let s = stream.next_symbol();
            match w.feed(s, stream) {
                UP_H => d += 1,
                DOWN_H => d -= 1,
                UP_C => ds += 1,
                DOWN_C => ds -= 1,
                _ => {}
            }
            done += 1;
        }
        out.push((d, ds));
    }
    out
}

/// Diffusively rescaled path on a uniform time grid.
#[derive(Clone, Debug, Serialize)]
pub struct RescaledPath {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

/// Sample U^n, V^n at t = k/grid, k = 0..=grid, interpolating linearly.
pub fn rescale(tr: &Trajectory, grid: usize) -> RescaledPath {
    let n = tr.n();
    let d = tr.d();
    let ds = tr.d_star();
    let scale = (n.max(1) as f64).sqrt();
    let interp = |a: &[i64], x: f64| {
        let i = x.floor() as usize;
        if i >= n {
            return a[n] as f64;
        }
        let f = x - i as f64;
        a[i] as f64 * (1.0 - f) + a[i + 1] as f64 * f
    };
    let grid = grid.max(1);
    let mut path = RescaledPath { t: Vec::new(), u: Vec::new(), v: Vec::new() };
    for k in 0..=grid {
        let t = k as f64 / grid as f64;
        let x = t * n as f64;
        path.t.push(t);
        path.u.push(interp(&d, x) / scale);
        path.v.push(interp(&ds, x) / scale);
    }
    path
}

/// Sample moments of (U, V) at a fixed time with jackknife errors.
#[derive(Clone, Debug, Serialize)]
pub struct CovarianceReport {
    pub samples: usize,
    pub var_u: f64,
    pub var_u_err: f64,
    pub var_v: f64,
    pub var_v_err: f64,
    pub cov: f64,
    pub cov_err: f64,
    pub correlation: f64,
    pub correlation_err: f64,
}

pub fn covariance_estimate(samples: &[(f64, f64)]) -> Result<CovarianceReport, WalkError> {
    if samples.len() < 2 {
        return Err(WalkError::TooFewSamples { need: 2, got: samples.len() });
    }
    let groups = samples.len().min(50);
    let parts: Vec<CoMoments> = (0..groups)
        .map(|g| {
            let lo = g * samples.len() / groups;
            let hi = (g + 1) * samples.len() / groups;
            let mut m = CoMoments::new();
            for &(u, v) in &samples[lo..hi] {
                m.push(u, v);
            }
            m
        })
        .collect();
    let merge = |a: &mut CoMoments, b: &CoMoments| a.merge(b);
    let (var_u, var_u_err) = jackknife_merged(&parts, merge, |m| m.x.variance());
    let (var_v, var_v_err) = jackknife_merged(&parts, merge, |m| m.y.variance());
    let (cov, cov_err) = jackknife_merged(&parts, merge, |m| m.covariance());
    let (correlation, correlation_err) = jackknife_merged(&parts, merge, |m| m.correlation());
    Ok(CovarianceReport {
        samples: samples.len(),
        var_u,
        var_u_err,
        var_v,
        var_v_err,
        cov,
        cov_err,
        correlation,
        correlation_err,
    })
}

/// The ratio 𝒩_{DB|SO}(X(1,n)) / (𝒩_HO(X(1,n)) ∨ A) and the event F_n(ε, A).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FewSdReport {
    pub numerator: i64,
    pub denominator: f64,
    pub ratio: f64,
    pub event: bool,
}

pub fn few_sd_diagnostic(tr: &Trajectory, eps: f64, a: f64) -> FewSdReport {
    let c = &tr.window_counts;
    let numerator = c.get(Symbol::DB) + c.get(Symbol::SO);
    let denominator = (c.get(Symbol::HO) as f64).max(a);
    let ratio = if denominator > 0.0 { numerator as f64 / denominator } else { 0.0 };
    FewSdReport { numerator, denominator, ratio, event: ratio >= eps }
}

/// One renewal block of the all-stale word (indices 0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    pub k: u64,
    pub start: u64,
    pub end: u64,
    pub xi_ho: i64,
    pub xi_co: i64,
}

impl Block {
    pub fn duration(&self) -> u64 {
        self.end - self.start
    }
}

/// Streaming detector of the renewal times ι_k.
#[derive(Clone, Debug, Default)]
pub struct BlockScanner {
    pos: u64,
    k: u64,
    started: bool,
    start: u64,
    burgers: i64,
    orders: i64,
}

impl BlockScanner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Feed the next symbol; returns the block it closes, if any.
    pub fn feed(&mut self, s: Symbol) -> Result<Option<Block>, WalkError> {
        if matches!(s, Symbol::HO | Symbol::CO | Symbol::FO) {
            return Err(WalkError::ForeignSymbol(s));
        }
        let i = self.pos;
        self.pos += 1;
        if !self.started {
            if s == Symbol::HB {
                self.started = true;
                self.k = 1;
                self.start = i;
                self.burgers = 1;
                self.orders = 0;
            }
            return Ok(None);
        }
        let odd = self.k % 2 == 1;
        let closes = match s {
            Symbol::EB => true,
            Symbol::CB => odd,
            Symbol::HB => !odd,
            _ => false,
        };
        if closes {
            let (xi_ho, xi_co) = if odd {
                (self.burgers, -self.orders)
            } else {
                (-self.orders, self.burgers)
            };
            let b = Block { k: self.k, start: self.start, end: i, xi_ho, xi_co };
            self.k += 1;
            self.start = i;
            self.burgers = 1;
            self.orders = 0;
            return Ok(Some(b));
        }
        if s.is_burger() {
            self.burgers += 1;
        } else {
            self.orders += 1;
        }
        Ok(None)
    }
}

/// Renewal times and increments of a finite all-stale word.
#[derive(Clone, Debug, Default, Serialize)]
pub struct BlockStats {
    /// ι_0, ι_1, … (complete blocks only)
    pub iota: Vec<u64>,
    pub blocks: Vec<Block>,
}

impl BlockStats {
    /// Ξ_k = ξ_1 + … + ξ_k
    pub fn partial_sums(&self) -> Vec<(i64, i64)> {
        let mut acc = (0, 0);
        self.blocks
            .iter()
            .map(|b| {
                acc = (acc.0 + b.xi_ho, acc.1 + b.xi_co);
                acc
            })
            .collect()
    }
}

pub fn block_decompose(word: &[Symbol]) -> Result<BlockStats, WalkError> {
    let mut sc = BlockScanner::new();
    let mut out = BlockStats::default();
    for &s in word {
        if let Some(b) = sc.feed(s)? {
            if out.iota.is_empty() {
                out.iota.push(b.start);
            }
            out.iota.push(b.end);
            out.blocks.push(b);
        }
    }
    Ok(out)
}

/// Per-group tallies of odd blocks.
#[derive(Clone, Copy, Debug, Default)]
pub struct BlockAcc {
    pub duration: Moments,
    pub xi: CoMoments,
}

impl BlockAcc {
    pub fn push(&mut self, b: &Block) {
        self.duration.push(b.duration() as f64);
        self.xi.push(b.xi_ho as f64, b.xi_co as f64);
    }

    pub fn merge(&mut self, o: &BlockAcc) {
        self.duration.merge(&o.duration);
        self.xi.merge(&o.xi);
    }
}

/// Empirical value, jackknife error and closed form.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
    pub exact: f64,
}

impl Estimate {
    pub fn rel_err(&self) -> f64 {
        ((self.value - self.exact) / self.exact).abs()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockMomentReport {
    pub p: f64,
    pub q: f64,
    pub blocks: u64,
    pub mean_duration: Estimate,
    pub var_duration: Estimate,
    pub mean_xi_ho: Estimate,
    pub var_xi_ho: Estimate,
    pub mean_xi_co: Estimate,
    pub var_xi_co: Estimate,
    pub cov_xi: Estimate,
}

/// Closed forms for odd blocks: (E dur, Var dur, E ξHO, Var ξHO, E ξCO, Var ξCO, Cov).
pub fn block_closed_forms(p: f64, q: f64) -> [f64; 7] {
    let s = 1.0 - p + q;
    [
        4.0 / s,
        4.0 * (3.0 + p - q) / (s * s),
        2.0 / s,
        2.0 * (1.0 + p - q) / (s * s),
        -2.0 / s,
        2.0 * (3.0 - p + q) / (s * s),
        -2.0 * (1.0 + p - q) / (s * s),
    ]
}

pub const MIN_BLOCKS: usize = 1000;

/// Moments over odd blocks, `parts` being per-group accumulators.
pub fn block_moment_estimates(parts: &[BlockAcc], p: f64, q: f64) -> Result<BlockMomentReport, WalkError> {
    let total: u64 = parts.iter().map(|a| a.duration.n).sum();
    if (total as usize) < MIN_BLOCKS {
        return Err(WalkError::TooFewSamples { need: MIN_BLOCKS, got: total as usize });
    }
    let cf = block_closed_forms(p, q);
    let merge = |a: &mut BlockAcc, b: &BlockAcc| a.merge(b);
    let est = |f: &dyn Fn(&BlockAcc) -> f64, exact: f64| {
        let (value, std_err) = jackknife_merged(parts, merge, f);
        Estimate { value, std_err, exact }
    };
    Ok(BlockMomentReport {
        p,
        q,
        blocks: total,
        mean_duration: est(&|a| a.duration.mean, cf[0]),
        var_duration: est(&|a| a.duration.variance(), cf[1]),
        mean_xi_ho: est(&|a| a.xi.x.mean, cf[2]),
        var_xi_ho: est(&|a| a.xi.x.variance(), cf[3]),
        mean_xi_co: est(&|a| a.xi.y.mean, cf[4]),
        var_xi_co: est(&|a| a.xi.y.variance(), cf[5]),
        cov_xi: est(&|a| a.xi.covariance(), cf[6]),
    })
}

/// Draw symbols until `odd_blocks` odd blocks are complete, tallying them
/// into `groups` contiguous accumulators.
pub fn simulate_blocks(
    p: &ParamVector,
    odd_blocks: usize,
    groups: usize,
    stream: &mut SeededStream,
) -> Result<Vec<BlockAcc>, WalkError> {
    if p.pf != 0.0 || p.ps != 1.0 {
        return Err(WalkError::NotAllStale);
    }
    let groups = groups.max(1);
    let mut parts = vec![BlockAcc::default(); groups];
    let mut sc = BlockScanner::new();
    let mut seen = 0usize;
    while seen < odd_blocks {
        if let Some(b) = sc.feed(stream.next_symbol())? {
            if b.k % 2 == 1 {
                parts[seen * groups / odd_blocks].push(&b);
                seen += 1;
            }
        }
    }
    Ok(parts)
}

/// Stream blocks of either parity to a callback, stopping after `count` blocks.
pub fn for_each_block(
    p: &ParamVector,
    count: usize,
    stream: &mut SeededStream,
    mut f: impl FnMut(&Block),
) -> Result<(), WalkError> {
    if p.pf != 0.0 || p.ps != 1.0 {
        return Err(WalkError::NotAllStale);
    }
    let mut sc = BlockScanner::new();
    let mut seen = 0;
    while seen < count {
        if let Some(b) = sc.feed(stream.next_symbol())? {
            f(&b);
            seen += 1;
        }
    }
    Ok(())
}
