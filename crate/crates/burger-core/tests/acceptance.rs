//! Acceptance run: one PASS/FAIL line per criterion. `ACCEPTANCE_ONLY=1,3`
//! restricts the run to the listed criteria. Failing lines are always printed;
//! the exit status is nonzero on failure only with `ACCEPTANCE_STRICT=1`, so a
//! statistical miss does not hide the other test targets of a workspace run.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use burger_core::bijection::{map_tutte_polynomial, partition_polynomial, Poly2};
use burger_core::oracle::{
    conditional_tree_law, exact_expectations, mullin_count, mullin_words, parse_rational, to_decimal, ExactParams,
    PathEvent,
};
use burger_core::renewal::{
    check_count_mean, chi_from_runs, collect_runs, kappa_from_correlation, tail_diagnostics,
    variance_limit_estimate, variance_limit_from_increments, variance_limit_prediction,
};
use burger_core::walk::{block_moment_estimates, covariance_estimate, simulate_blocks, simulate_checkpoints, Fallback};
use burger_core::{map_to_word, params_from_yz, word_to_decorated_map, ActivityParams, ParamVector, SeededStream};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SEED: u64 = 20_240_601;

struct Run {
    only: Option<BTreeSet<u32>>,
    failed: Vec<String>,
}

impl Run {
    fn wants(&self, k: u32) -> bool {
        self.only.as_ref().is_none_or(|s| s.contains(&k))
    }

    fn line(&mut self, k: u32, name: &str, pass: bool, detail: &str) {
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} [{k:>2}] {name}: {detail}");
        if !pass {
            self.failed.push(format!("{k} {name}"));
        }
    }
}

fn yz(y: f64, z: f64) -> ParamVector {
    params_from_yz(ActivityParams { y, z }).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn c1_blocks(run: &mut Run) {
    let p = ParamVector::new(0.0, 1.0, 0.0, 0.0).unwrap();
    let mut s = SeededStream::new(&p, SEED, 1).unwrap();
    let parts = simulate_blocks(&p, 1_000_000, 100, &mut s).unwrap();
    let r = block_moment_estimates(&parts, 0.0, 0.0).unwrap();
    let rows = [
        ("E duration", r.mean_duration, 0.005),
        ("Var duration", r.var_duration, 0.02),
        ("E xi_HO", r.mean_xi_ho, 0.005),
        ("Var xi_HO", r.var_xi_ho, 0.02),
        ("Var xi_CO", r.var_xi_co, 0.02),
        ("Cov xi", r.cov_xi, 0.03),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, e, tol) in rows {
        ok &= e.rel_err() <= tol;
        parts.push(format!("{name}={:.4}±{:.4} (exact {}, tol {}%)", e.value, e.std_err, e.exact, tol * 100.0));
    }
    run.line(1, "block moments, 10^6 odd blocks at p=q=0", ok, &parts.join("; "));
}

/// Per-replica checkpoint increments of (d, d*) for y = 0.
fn walk_increments(z: f64, n: usize, replicas: usize, windows: usize, seed: u64) -> Vec<Vec<(i64, i64)>> {
    let p = yz(0.0, z);
    (0..replicas as u64)
        .into_par_iter()
        .map(|id| {
            let mut s = SeededStream::new(&p, seed, id).unwrap();
            let cps = simulate_checkpoints(n, n, windows, &mut s, Fallback::Coin);
            let mut prev = (0, 0);
            cps.into_iter()
                .map(|c| {
                    let inc = (c.0 - prev.0, c.1 - prev.1);
                    prev = c;
                    inc
                })
                .collect()
        })
        .collect()
}

struct WalkData {
    z: f64,
    increments: Vec<Vec<(i64, i64)>>,
}

fn c2_covariances(run: &mut Run) -> Vec<WalkData> {
    let (n, replicas, windows) = (1_000_000usize, 1000usize, 10usize);
    let mut out = Vec::new();
    for z in [1.0, 2.0] {
        let incs = walk_increments(z, n, replicas, windows, SEED + z as u64);
        let sub = (n / windows) as f64;
        let batch: Vec<(f64, f64)> = incs.iter().flatten().map(|&(a, b)| (a as f64 / sub.sqrt(), b as f64 / sub.sqrt())).collect();
        let naive: Vec<(f64, f64)> = incs
            .iter()
            .map(|v| {
                let (a, b) = v.iter().fold((0, 0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
                (a as f64 / (n as f64).sqrt(), b as f64 / (n as f64).sqrt())
            })
            .collect();
        let (var, cov) = ((1.0 + z) / 2.0, -z / 2.0);
        let b = covariance_estimate(&batch).unwrap();
        let e = covariance_estimate(&naive).unwrap();
        let ok = rel(b.var_u, var) <= 0.03 && rel(b.var_v, var) <= 0.03 && rel(b.cov, cov) <= 0.05;
        run.line(
            2,
            &format!("walk covariances y=0 z={z}"),
            ok,
            &format!(
                "batch ({} windows of 10^5): VarU={:.4}±{:.4} VarV={:.4}±{:.4} Cov={:.4}±{:.4}; \
                 target Var={var} (3%) Cov={cov} (5%); endpoint estimator over {} replicas of 10^6: \
                 VarU={:.4}±{:.4} VarV={:.4}±{:.4} Cov={:.4}±{:.4}",
                b.samples, b.var_u, b.var_u_err, b.var_v, b.var_v_err, b.cov, b.cov_err, e.samples, e.var_u,
                e.var_u_err, e.var_v, e.var_v_err, e.cov, e.cov_err
            ),
        );
        out.push(WalkData { z, increments: incs });
    }
    out
}

struct ChiPoint {
    y: f64,
    z: f64,
    chi: f64,
}

fn c3_c4_chi(run: &mut Run) -> Vec<ChiPoint> {
    let points = [(0.0, 1.0, 2.0, 0.05, false), (0.5, 1.0, 2.0, 0.05, false), (1.0, 1.0, 2.0, 0.05, false), (0.0, 1.5, 2.5, 0.02, true), (0.0, 2.0, 3.0, 0.02, true)];
    let jmax = 10_000_000;
    let mut out = Vec::new();
    for (i, &(y, z, expect, tol, relative)) in points.iter().enumerate() {
        let p = yz(y, z);
        let runs = collect_runs(&p, 100_000, jmax, SEED + 100 + i as u64).unwrap();
        let est = chi_from_runs(&runs, jmax);
        let err = if relative { rel(est.chi, expect) } else { (est.chi - expect).abs() };
        let ok = err <= tol && est.composition_violations == 0;
        let tol_text = if relative { format!("{}%", tol * 100.0) } else { format!("±{tol}") };
        run.line(
            3,
            &format!("chi at (y,z)=({y},{z})"),
            ok,
            &format!(
                "chi={:.4}±{:.4}, expected {expect} {tol_text}; truncated {} of {}; composition violations {}",
                est.chi, est.stderr, est.truncated, est.samples, est.composition_violations
            ),
        );
        let cm = check_count_mean(&runs);
        run.line(
            4,
            &format!("mean C(X(-J,-1)) at (y,z)=({y},{z})"),
            !cm.flagged,
            &format!("mean={:.4}±{:.4} over {} runs (must be within 4 SE of 0)", cm.mean, cm.stderr, cm.runs),
        );
        out.push(ChiPoint { y, z, chi: est.chi });
    }
    out
}

fn c5_variance_limit(run: &mut Run, walks: &[WalkData], chis: &[ChiPoint]) {
    let n = 100_000usize;
    let chi_at = |y: f64, z: f64| chis.iter().find(|c| c.y == y && c.z == z).map(|c| c.chi);
    for (y, z) in [(0.0, 1.0), (0.0, 2.0), (0.5, 1.0)] {
        let p = yz(y, z);
        let Some(chi) = chi_at(y, z) else {
            run.line(5, &format!("variance limit at ({y},{z})"), false, "criterion 3 not run");
            continue;
        };
        let report = if let Some(w) = walks.iter().find(|w| y == 0.0 && w.z == z) {
            let incs: Vec<f64> = w.increments.iter().flatten().map(|&(a, b)| (a - b) as f64).collect();
            variance_limit_from_increments(&incs, n).unwrap()
        } else {
            variance_limit_estimate(&p, n, 1000, 10, SEED + 500).unwrap()
        };
        let pred = variance_limit_prediction(&p, chi);
        run.line(
            5,
            &format!("variance limit at (y,z)=({y},{z})"),
            rel(report.value, pred) <= 0.05,
            &format!(
                "forward n^-1 Var D = {:.4}±{:.4} ({} windows of 10^5); 1+(p+q)chi = {:.4}; tol 5%",
                report.value, report.stderr, report.samples, pred
            ),
        );
    }
}

fn c6_kappa(run: &mut Run) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (rho, k) in [(-0.5, 12.0), (0.0, 8.0), (0.5, 6.0)] {
        let (kappa, _) = kappa_from_correlation(rho).unwrap();
        ok &= (kappa - k).abs() <= 1e-12;
        parts.push(format!("rho={rho}: kappa={kappa:.15} (expect {k})"));
    }
    run.line(6, "kappa anchors to 1e-12", ok, &parts.join("; "));
}

fn c7_enumeration(run: &mut Run) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, expect) in [(1usize, 2u64), (2, 10), (3, 70)] {
        let count = mullin_count(n).unwrap();
        let words = mullin_words(n).unwrap();
        let mut forms = BTreeSet::new();
        let mut roundtrip = true;
        for w in &words {
            let m = word_to_decorated_map(w).unwrap();
            roundtrip &= map_to_word(&m).as_ref() == Ok(w);
            forms.insert(m.canonical_form());
        }
        ok &= count == expect && forms.len() as u64 == expect && roundtrip;
        parts.push(format!("n={n}: count={count} maps={} roundtrip={roundtrip}", forms.len()));
    }
    run.line(7, "Mullin counts 2,10,70 and bijection", ok, &parts.join("; "));
}

fn c8_tree_law(run: &mut Run) {
    for (y, z) in [("1/3", "1"), ("1", "2"), ("1/2", "3/2")] {
        for n in [2usize, 3] {
            let r = conditional_tree_law(n, &parse_rational(y).unwrap(), &parse_rational(z).unwrap()).unwrap();
            run.line(
                8,
                &format!("tree law y={y} z={z} 2n={}", 2 * n),
                r.equal,
                &format!("{} identified words, {} mismatches (exact rationals)", r.weights.len(), r.mismatches().len()),
            );
        }
    }
}

fn marginal_at(p: &Poly2, y: i64) -> i128 {
    p.first_marginal().iter().enumerate().map(|(i, &c)| c as i128 * (y as i128).pow(i as u32)).sum()
}

fn c9_tutte(run: &mut Run) {
    let mut maps = std::collections::BTreeMap::new();
    for n in 1..=5 {
        for w in mullin_words(n).unwrap() {
            let m = word_to_decorated_map(&w).unwrap().map;
            maps.entry(m.canonical_form()).or_insert(m);
        }
    }
    let results: Vec<(bool, bool)> = maps
        .values()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|m| {
            let z = partition_polynomial(m).unwrap();
            let t = map_tutte_polynomial(m);
            let identity = (0..=3).all(|y| marginal_at(&z, y) == t.eval_int(y, y));
            let base = z.first_marginal();
            let roots = (0..m.darts()).all(|r| partition_polynomial(&m.with_root(r)).unwrap().first_marginal() == base);
            (identity, roots)
        })
        .collect();
    let bad_id = results.iter().filter(|r| !r.0).count();
    let bad_root = results.iter().filter(|r| !r.1).count();
    run.line(
        9,
        "Z(m,e0,y,1) = T(y,y) for y in 0..=3, all rooted maps with <= 5 edges",
        bad_id == 0 && bad_root == 0,
        &format!("{} maps; identity failures {bad_id}; root-dependence failures {bad_root}", maps.len()),
    );
}

fn c10_properties(run: &mut Run) {
    use common::*;
    const TRIALS: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut fails = [0usize; 8];
    let mut qualifying = 0usize;
    for _ in 0..TRIALS {
        let x = random_word(&mut rng, ALL, 30);
        let y = random_word(&mut rng, ALL, 30);
        let s = random_word(&mut rng, "hcHCDS", 30);
        fails[0] += !prop_associativity(&x, &y) as usize;
        fails[1] += !prop_idempotence(&x) as usize;
        fails[2] += !prop_confluence(&x, &mut rng) as usize;
        fails[3] += !prop_conservation(&x) as usize;
        fails[4] += !prop_identification(&x) as usize;
        fails[5] += !prop_dagger(&x) as usize;
        fails[6] += !prop_psi(&s) as usize;
        if let Some(ok) = prop_flip(&s) {
            qualifying += 1;
            fails[7] += !ok as usize;
        }
    }
    let names = ["associativity", "idempotence", "confluence", "C conservation", "R(I(x))=R(x)", "dagger", "Psi identities", "flip lemma"];
    for (name, f) in names.iter().zip(fails) {
        let extra = if *name == "flip lemma" { format!(" over {qualifying} qualifying words") } else { String::new() };
        let ok = f == 0 && (*name != "flip lemma" || qualifying > 0);
        run.line(10, &format!("property {name}"), ok, &format!("{f} failures in {TRIALS} trials{extra}"));
    }
}

fn c11_monotonicity(run: &mut Run) {
    let q = |s: &str| parse_rational(s).unwrap();
    let base = ExactParams::stale_duplicate(q("0"), q("0")).unwrap();
    for ev in [PathEvent::Full, PathEvent::NonNegative, PathEvent::EndsAtZero] {
        let mut bad = Vec::new();
        let mut checked = 0;
        for n in 1..=8 {
            let e0 = exact_expectations(&base, n, ev).unwrap();
            for p in ["0", "1/2", "1"] {
                for d in ["0", "1/2"] {
                    let e = exact_expectations(&ExactParams::stale_duplicate(q(p), q(d)).unwrap(), n, ev).unwrap();
                    checked += 1;
                    if e.burgers < e0.burgers || e.orders < e0.orders {
                        bad.push(format!("n={n} p={p} q={d}"));
                    }
                }
            }
        }
        let e8 = exact_expectations(&ExactParams::stale_duplicate(q("1"), q("1/2")).unwrap(), 8, ev).unwrap();
        let b8 = exact_expectations(&base, 8, ev).unwrap();
        run.line(
            11,
            &format!("monotonicity, event {}", ev.name()),
            bad.is_empty(),
            &format!(
                "{checked} exact comparisons, violations {:?}; e.g. n=8: E^(1,1/2) B 1_E = {} >= E^(0,0) B 1_E = {}",
                bad,
                to_decimal(&e8.burgers, 6),
                to_decimal(&b8.burgers, 6)
            ),
        );
    }
}

fn c12_tail(run: &mut Run) {
    let p = ParamVector::zero();
    let rep = tail_diagnostics(&p, 100_000, 18, SEED + 12).unwrap();
    let rows: Vec<_> = rep.j_hb.iter().filter(|r| r.n >= 64).collect();
    let lo = rows.iter().map(|r| r.compensated).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.compensated).fold(0.0, f64::max);
    let ok = lo > 0.0 && hi / lo <= 3.0;
    let series: Vec<String> = rows.iter().map(|r| format!("{}:{:.3}", r.n, r.compensated)).collect();
    run.line(
        12,
        "sqrt(n) P(J^hb > n) within factor 3 over n=2^6..2^18",
        ok,
        &format!("min {lo:.3}, max {hi:.3}, ratio {:.3}; {}", hi / lo, series.join(" ")),
    );
}

fn main() {
    let only = std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut run = Run { only, failed: Vec::new() };
    let t0 = Instant::now();
    let timed = |name: &str, t: Instant| eprintln!("  ({name}: {:.1}s)", t.elapsed().as_secs_f64());
    if run.wants(1) {
        let t = Instant::now();
        c1_blocks(&mut run);
        timed("1", t);
    }
    let walks = if run.wants(2) || run.wants(5) {
        let t = Instant::now();
        let w = c2_covariances(&mut run);
        timed("2", t);
        w
    } else {
        Vec::new()
    };
    let chis = if run.wants(3) || run.wants(4) || run.wants(5) {
        let t = Instant::now();
        let c = c3_c4_chi(&mut run);
        timed("3-4", t);
        c
    } else {
        Vec::new()
    };
    if run.wants(5) {
        let t = Instant::now();
        c5_variance_limit(&mut run, &walks, &chis);
        timed("5", t);
    }
    let rest: [(u32, fn(&mut Run)); 7] = [
        (6, c6_kappa),
        (7, c7_enumeration),
        (8, c8_tree_law),
        (9, c9_tutte),
        (10, c10_properties),
        (11, c11_monotonicity),
        (12, c12_tail),
    ];
    for (k, f) in rest {
        if run.wants(k) {
            let t = Instant::now();
            f(&mut run);
            timed(&k.to_string(), t);
        }
    }
    eprintln!("acceptance finished in {:.1}s", t0.elapsed().as_secs_f64());
    if run.failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: {} failing line(s): {}", run.failed.len(), run.failed.join(", "));
        if std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
            std::process::exit(1);
        }
    }
}
