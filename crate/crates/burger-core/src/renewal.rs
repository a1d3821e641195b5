//! Backward renewal sampling: J, χ, the variance limit, κ and the tail of J^hb.
//!
//! The backward word X(−j,−1) is kept as long as it holds no plain burger.
//! Such a word consists of orders and unidentified DB/EB only, so prepending
//! a non-burger symbol just puts it in front. Prepending a burger b runs the
//! forward machine over b·W until the burger stack empties; the untouched
//! tail of W is copied through. Both W and the stack are run-length encoded.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::reduce::Counts;
use crate::sampler::{params_from_yz, ActivityParams, ParamError, ParamVector, SeededStream};
use crate::stats::Moments;
use crate::symbol::{Kind, Symbol};
use crate::walk::{simulate_checkpoints, Fallback};

#[derive(Debug, Error, PartialEq)]
pub enum RenewalError {
    #[error("correlation {0} outside (-1, 1)")]
    Correlation(f64),
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error(transparent)]
    Param(#[from] ParamError),
}

/// When to stop prepending.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stop {
    /// First j at which X(−j,−1) holds an HB or CB (the time J).
    AnyBurger,
    /// First j at which X(−j,−1) holds an HB (the time J^hb).
    Hamburger,
}

#[derive(Clone, Debug, Serialize)]
pub struct BackwardRun {
    /// J, or the number of symbols drawn when truncated.
    pub j: u64,
    pub truncated: bool,
    /// Run-length encoded X(−J,−1), left to right. Empty when truncated
    /// or when stopping at J^hb.
    pub reduced: Vec<(Symbol, u64)>,
    pub counts: Counts,
    /// Run operations performed.
    pub work: u64,
}

impl BackwardRun {
    /// |X(−J,−1)|
    pub fn len(&self) -> u64 {
        self.reduced.iter().map(|r| r.1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The reduced word uses only {HB, CO} or only {CB, HO}.
    pub fn composition_ok(&self) -> bool {
        let has = |s: Symbol| self.counts.get(s) > 0;
        let ham_side = !has(Symbol::CB) && !has(Symbol::HO);
        let cheese_side = !has(Symbol::HB) && !has(Symbol::CO);
        let specials = [Symbol::FO, Symbol::SO, Symbol::DB, Symbol::EB].iter().any(|&s| has(s));
        !specials && (ham_side || cheese_side)
    }

    /// Burger type of X_{−J}: the oldest burger of the reduced word.
    pub fn first_type(&self) -> Option<Kind> {
        self.reduced.iter().find_map(|&(s, _)| match s {
            Symbol::HB => Some(Kind::Ham),
            Symbol::CB => Some(Kind::Cheese),
            _ => None,
        })
    }

    pub fn expand(&self) -> Vec<Symbol> {
        self.reduced
            .iter()
            .flat_map(|&(s, n)| std::iter::repeat(s).take(n as usize))
            .collect()
    }
}

fn push_run(v: &mut Vec<(Symbol, u64)>, s: Symbol, n: u64) {
    if n == 0 {
        return;
    }
    match v.last_mut() {
        Some(last) if last.0 == s => last.1 += n,
        _ => v.push((s, n)),
    }
}

/// Remove the now-empty run at `i` and merge its neighbours.
fn drop_run(stack: &mut Vec<(Kind, u64)>, i: usize) {
    stack.remove(i);
    if i > 0 && i < stack.len() && stack[i - 1].0 == stack[i].0 {
        stack[i - 1].1 += stack[i].1;
        stack.remove(i);
    }
}

/// Index of the topmost run of type k.
fn top_run_of(stack: &[(Kind, u64)], k: Kind) -> Option<usize> {
    let n = stack.len();
    if n >= 1 && stack[n - 1].0 == k {
        Some(n - 1)
    } else if n >= 2 {
        Some(n - 2)
    } else {
        None
    }
}

/// Process b·W. `w` holds W reversed (its front is the last entry).
/// Returns the leftover stack; `w` becomes the left part of R(b·W) when the
/// stack empties, and `out` receives the passed orders otherwise.
fn absorb(
    b: Kind,
    w: &mut Vec<(Symbol, u64)>,
    out: &mut Vec<(Symbol, u64)>,
    work: &mut u64,
) -> Vec<(Kind, u64)> {
    let mut stack: Vec<(Kind, u64)> = vec![(b, 1)];
    out.clear();
    while !stack.is_empty() {
        let Some((sym, mut cnt)) = w.pop() else { break };
        *work += 1;
        match sym {
            Symbol::HO | Symbol::CO => {
                let k = sym.kind().unwrap();
                while cnt > 0 {
                    *work += 1;
                    match top_run_of(&stack, k) {
                        None => {
                            push_run(out, sym, cnt);
                            cnt = 0;
                        }
                        Some(i) => {
                            let take = cnt.min(stack[i].1);
                            stack[i].1 -= take;
                            cnt -= take;
                            if stack[i].1 == 0 {
                                drop_run(&mut stack, i);
                            }
                            if stack.is_empty() {
                                break;
                            }
                        }
                    }
                }
            }
            Symbol::FO => {
                while cnt > 0 && !stack.is_empty() {
                    *work += 1;
                    let top = stack.last_mut().unwrap();
                    let take = cnt.min(top.1);
                    top.1 -= take;
                    cnt -= take;
                    if top.1 == 0 {
                        stack.pop();
                    }
                }
            }
            Symbol::SO => {
                let t = stack.last().unwrap().0;
                let k = t.other();
                while cnt > 0 {
                    *work += 1;
                    let n = stack.len();
                    if n >= 2 {
                        let i = n - 2;
                        let take = cnt.min(stack[i].1);
                        stack[i].1 -= take;
                        cnt -= take;
                        if stack[i].1 == 0 {
                            drop_run(&mut stack, i);
                        }
                    } else {
                        push_run(out, k.order(), cnt);
                        cnt = 0;
                    }
                }
            }
            Symbol::DB => {
                stack.last_mut().unwrap().1 += cnt;
                cnt = 0;
            }
            Symbol::EB => {
                while cnt > 0 {
                    *work += 1;
                    let k = stack.last().unwrap().0.other();
                    stack.push((k, 1));
                    cnt -= 1;
                }
            }
            Symbol::HB | Symbol::CB => unreachable!("W holds no plain burger"),
        }
        if cnt > 0 {
            // stack emptied part-way through the run
            w.push((sym, cnt));
        }
    }
    if stack.is_empty() {
        // R(bW) = out · (rest of W); re-insert out at the front
        for &(s, n) in out.iter().rev() {
            match w.last_mut() {
                Some(last) if last.0 == s => last.1 += n,
                _ => w.push((s, n)),
            }
        }
        out.clear();
    }
    stack
}

/// Prepend symbols from `next` (X_{−1}, X_{−2}, …) until the stop rule fires
/// or `jmax` symbols have been drawn.
pub fn backward_run<F: FnMut() -> Symbol>(mut next: F, jmax: u64, stop: Stop) -> BackwardRun {
    let mut w: Vec<(Symbol, u64)> = Vec::new();
    let mut out: Vec<(Symbol, u64)> = Vec::new();
    let mut work = 0u64;
    let mut j = 0u64;
    while j < jmax {
        let s = next();
        j += 1;
        work += 1;
        match s.kind().filter(|_| s.is_burger()) {
            None => {
                // order or DB/EB: goes to the front
                match w.last_mut() {
                    Some(last) if last.0 == s => last.1 += 1,
                    _ => w.push((s, 1)),
                }
            }
            Some(b) => {
                let stack = absorb(b, &mut w, &mut out, &mut work);
                if stack.is_empty() {
                    continue;
                }
                let has_ham = stack.iter().any(|r| r.0 == Kind::Ham);
                match stop {
                    Stop::AnyBurger => {
                        let mut reduced = std::mem::take(&mut out);
                        for &(k, n) in &stack {
                            push_run(&mut reduced, k.burger(), n);
                        }
                        let mut counts = Counts::default();
                        for &(s, n) in &reduced {
                            counts.n[s.index()] += n as i64;
                        }
                        return BackwardRun { j, truncated: false, reduced, counts, work };
                    }
                    Stop::Hamburger if has_ham => {
                        return BackwardRun {
                            j,
                            truncated: false,
                            reduced: Vec::new(),
                            counts: Counts::default(),
                            work,
                        };
                    }
                    Stop::Hamburger => {
                        // the cheeseburgers join the right part for good;
                        // W becomes the passed orders
                        w.clear();
                        for &(s, n) in out.iter().rev() {
                            w.push((s, n));
                        }
                        out.clear();
                    }
                }
            }
        }
    }
    BackwardRun { j, truncated: true, reduced: Vec::new(), counts: Counts::default(), work }
}

pub fn sample_j(stream: &mut SeededStream, jmax: u64) -> BackwardRun {
    backward_run(|| stream.next_symbol(), jmax, Stop::AnyBurger)
}

pub fn sample_j_hb(stream: &mut SeededStream, jmax: u64) -> BackwardRun {
    backward_run(|| stream.next_symbol(), jmax, Stop::Hamburger)
}

/// J_1 < J_2 < ... < J_m from repeated backward runs on one stream; each run
/// starts just left of the previous renewal time. Stops early on truncation.
pub fn renewal_times<F: FnMut() -> Symbol>(mut next: F, m: usize, jmax: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(m);
    let mut base = 0u64;
    for _ in 0..m {
        let r = backward_run(&mut next, jmax.saturating_sub(base), Stop::AnyBurger);
        if r.truncated {
            break;
        }
        base += r.j;
        out.push(base);
    }
    out
}

/// Lengths, counts and truncation of `samples` independent runs, one
/// stream id per sample.
pub fn collect_runs(p: &ParamVector, samples: usize, jmax: u64, seed: u64) -> Result<Vec<RunSummary>, RenewalError> {
    SeededStream::new(p, seed, 0)?;
    Ok((0..samples as u64)
        .into_par_iter()
        .map(|id| {
            let mut s = SeededStream::new(p, seed, id).expect("validated");
            let r = sample_j(&mut s, jmax);
            RunSummary {
                j: r.j,
                truncated: r.truncated,
                len: r.len(),
                c: r.counts.c(),
                composition_ok: r.truncated || r.composition_ok(),
            }
        })
        .collect())
}

/// Scalar summary of one backward run.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RunSummary {
    pub j: u64,
    pub truncated: bool,
    pub len: u64,
    pub c: i64,
    pub composition_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiEstimate {
    pub chi: f64,
    pub stderr: f64,
    pub samples: usize,
    pub truncated: usize,
    pub jmax: u64,
    pub mean_c: f64,
    pub stderr_c: f64,
    pub composition_violations: usize,
}

impl ChiEstimate {
    pub fn truncation_rate(&self) -> f64 {
        self.truncated as f64 / self.samples as f64
    }

    /// More than 1% of runs hit jmax.
    pub fn truncation_warning(&self) -> bool {
        self.truncation_rate() > 0.01
    }
}

pub const MIN_CHI_SAMPLES: usize = 1000;

pub fn chi_from_runs(runs: &[RunSummary], jmax: u64) -> ChiEstimate {
    let mut len = Moments::new();
    let mut c = Moments::new();
    let mut truncated = 0;
    let mut bad = 0;
    for r in runs {
        if r.truncated {
            truncated += 1;
            continue;
        }
        len.push(r.len as f64);
        c.push(r.c as f64);
        if !r.composition_ok {
            bad += 1;
        }
    }
    ChiEstimate {
        chi: len.mean,
        stderr: len.std_err(),
        samples: runs.len(),
        truncated,
        jmax,
        mean_c: c.mean,
        stderr_c: c.std_err(),
        composition_violations: bad,
    }
}

pub fn estimate_chi(p: &ParamVector, samples: usize, jmax: u64, seed: u64) -> Result<ChiEstimate, RenewalError> {
    if samples < MIN_CHI_SAMPLES {
        return Err(RenewalError::TooFewSamples { need: MIN_CHI_SAMPLES, got: samples });
    }
    let runs = collect_runs(p, samples, jmax, seed)?;
    Ok(chi_from_runs(&runs, jmax))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CountMeanReport {
    pub mean: f64,
    pub stderr: f64,
    pub runs: u64,
    /// |mean| > 4 stderr
    pub flagged: bool,
}

/// Mean of 𝒞(X(−J,−1)) over untruncated runs.
pub fn check_count_mean(runs: &[RunSummary]) -> CountMeanReport {
    let m: Moments = runs.iter().filter(|r| !r.truncated).map(|r| r.c as f64).collect();
    let stderr = m.std_err();
    CountMeanReport { mean: m.mean, stderr, runs: m.n, flagged: m.mean.abs() > 4.0 * stderr }
}

/// 1 + (p_SO + p_DB) χ
pub fn variance_limit_prediction(p: &ParamVector, chi: f64) -> f64 {
    1.0 + (p.ps + p.pd) * chi
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VarianceLimitReport {
    pub n: usize,
    pub samples: usize,
    pub value: f64,
    pub stderr: f64,
}

/// n⁻¹ Var 𝒟(X'(1,n)) from `replicas` forward runs, each contributing
/// `windows` consecutive length-n windows after a burn-in of n.
pub fn variance_limit_estimate(
    p: &ParamVector,
    n: usize,
    replicas: usize,
    windows: usize,
    seed: u64,
) -> Result<VarianceLimitReport, RenewalError> {
    SeededStream::new(p, seed, 0)?;
    let windows = windows.max(1);
    let per: Vec<Vec<f64>> = (0..replicas as u64)
        .into_par_iter()
        .map(|id| {
            let mut s = SeededStream::new(p, seed, id).expect("validated");
            let cps = simulate_checkpoints(n * windows, n, windows, &mut s, Fallback::Coin);
            let mut prev = (0, 0);
            cps.iter()
                .map(|&(d, ds)| {
                    let inc = (d - prev.0) - (ds - prev.1);
                    prev = (d, ds);
                    inc as f64
                })
                .collect()
        })
        .collect();
    variance_limit_from_increments(&per.concat(), n)
}

pub fn variance_limit_from_increments(incs: &[f64], n: usize) -> Result<VarianceLimitReport, RenewalError> {
    if incs.len() < 2 {
        return Err(RenewalError::TooFewSamples { need: 2, got: incs.len() });
    }
    let groups = incs.len().min(50);
    let (v, se) = crate::stats::jackknife(incs, groups, |d| d.iter().copied().collect::<Moments>().variance());
    Ok(VarianceLimitReport { n, samples: incs.len(), value: v / n as f64, stderr: se / n as f64 })
}

/// κ = 4π / arccos(−ρ), γ = 4/√κ.
pub fn kappa_from_correlation(rho: f64) -> Result<(f64, f64), RenewalError> {
    if !(rho > -1.0 && rho < 1.0) {
        return Err(RenewalError::Correlation(rho));
    }
    let kappa = 4.0 * std::f64::consts::PI / (-rho).acos();
    Ok((kappa, 4.0 / kappa.sqrt()))
}

/// a = (z − y) χ / ((y + 1)(z + 1)); the limit has Var = (1 + a)/2, Cov = −a/2.
pub fn limit_a(y: f64, z: f64, chi: f64) -> f64 {
    (z - y) * chi / ((y + 1.0) * (z + 1.0))
}

/// Correlation −a/(1 + a) of the limiting Brownian motion.
pub fn limit_correlation(y: f64, z: f64, chi: f64) -> f64 {
    let a = limit_a(y, z, chi);
    -a / (1.0 + a)
}

#[derive(Clone, Debug, Serialize)]
pub struct GridCell {
    pub y: f64,
    pub z: f64,
    pub chi: f64,
    pub chi_err: f64,
    pub kappa: f64,
    pub kappa_err: f64,
    pub trunc_rate: f64,
    pub flagged: bool,
}

fn kappa_at(y: f64, z: f64, chi: f64) -> f64 {
    kappa_from_correlation(limit_correlation(y, z, chi)).map_or(f64::NAN, |k| k.0)
}

pub fn grid_cell(y: f64, z: f64, samples: usize, jmax: u64, seed: u64) -> Result<GridCell, RenewalError> {
    let p = params_from_yz(ActivityParams { y, z })?;
    let est = estimate_chi(&p, samples, jmax, seed)?;
    let kappa = kappa_at(y, z, est.chi);
    let h = (est.stderr * 1e-3).max(1e-9);
    let slope = (kappa_at(y, z, est.chi + h) - kappa_at(y, z, est.chi - h)) / (2.0 * h);
    Ok(GridCell {
        y,
        z,
        chi: est.chi,
        chi_err: est.stderr,
        kappa,
        kappa_err: (slope * est.stderr).abs(),
        trunc_rate: est.truncation_rate(),
        flagged: est.truncation_warning(),
    })
}

/// Equal budget per cell; each cell uses its own seed offset.
pub fn chi_grid(ys: &[f64], zs: &[f64], samples: usize, jmax: u64, seed: u64) -> Result<Vec<GridCell>, RenewalError> {
    let mut out = Vec::new();
    for (iy, &y) in ys.iter().enumerate() {
        for (iz, &z) in zs.iter().enumerate() {
            let cell_seed = seed.wrapping_add(((iy as u64) << 32) | iz as u64);
            out.push(grid_cell(y, z, samples, jmax, cell_seed)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct TailRow {
    pub n: u64,
    pub survival: f64,
    pub stderr: f64,
    pub compensated: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailReport {
    pub samples: usize,
    /// P(J^hb > n) on dyadic n.
    pub j_hb: Vec<TailRow>,
    /// P(|X(−J,−1)| > n) on dyadic n, from separate runs truncated at nmax.
    pub reduced_len: Vec<TailRow>,
}

fn survival_rows(values: &[(u64, bool)], exps: std::ops::RangeInclusive<u32>) -> Vec<TailRow> {
    let total = values.len() as f64;
    exps.map(|e| {
        let n = 1u64 << e;
        let k = values.iter().filter(|&&(v, trunc)| trunc || v > n).count() as f64;
        let s = k / total;
        TailRow {
            n,
            survival: s,
            stderr: (s * (1.0 - s) / total).sqrt(),
            compensated: s * (n as f64).sqrt(),
        }
    })
    .collect()
}

/// Survival of J^hb (run up to 2^max_exp) and of |X(−J,−1)|.
pub fn tail_diagnostics(p: &ParamVector, samples: usize, max_exp: u32, seed: u64) -> Result<TailReport, RenewalError> {
    SeededStream::new(p, seed, 0)?;
    let nmax = 1u64 << max_exp;
    let hb: Vec<(u64, bool)> = (0..samples as u64)
        .into_par_iter()
        .map(|id| {
            let mut s = SeededStream::new(p, seed, id).expect("validated");
            let r = sample_j_hb(&mut s, nmax);
            (r.j, r.truncated)
        })
        .collect();
    let lens: Vec<(u64, bool)> = (0..samples as u64)
        .into_par_iter()
        .map(|id| {
            let mut s = SeededStream::new(p, seed ^ 0x5eed_0f_1e, id).expect("validated");
            let r = sample_j(&mut s, nmax);
            (r.len(), r.truncated)
        })
        .collect();
    Ok(TailReport {
        samples,
        j_hb: survival_rows(&hb, 0..=max_exp),
        reduced_len: survival_rows(&lens, 0..=max_exp),
    })
}
