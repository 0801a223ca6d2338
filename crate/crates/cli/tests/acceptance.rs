//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any fails. Every seed below is fixed up front.
//!
//! cargo test -p hardcopy-cli --test acceptance

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hardcopy::analytic::{self, default_epsilons, expected_edges_exact, limit_degree_sequence};
use hardcopy::oracle::{check_against_recurrence, enumerate};
use hardcopy::process::run_kumar;
use hardcopy::seed::{derive_seed, rng_from_seed};
use hardcopy::stats::{degree_histogram, fit_power_law, qs_diagnostics, run_ensemble, variance_growth_fit};
use hardcopy::{evolve, simulate, CheckpointSchedule, HardCopyParams, KumarParams, MultiGraph, StepKind};
use rand::Rng;

const SEED_ORACLE: u64 = 1;
const SEED_HEAD: u64 = 2;
const SEED_EXPONENT: u64 = 3;
const SEED_EDGES: u64 = 4;
const SEED_FUZZ: u64 = 6;
const SEED_KUMAR: u64 = 7;
const SEED_QS: u64 = 8;

type Criterion<'a> = (&'static str, Box<dyn FnOnce() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within_budget(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

/// 1. Monte Carlo against exact enumeration.
fn oracle_equivalence() -> Outcome {
    const RUNS: u64 = 1_000_000;
    let start = Instant::now();
    let mut worst_z: f64 = 0.0;
    let mut failures = Vec::new();
    for alpha in [0.8, 0.9] {
        for steps in [3u64, 4, 5] {
            let exact = enumerate(alpha, 1, steps).expect("within guard");
            let check = check_against_recurrence(&exact).expect("recurrence");
            if !check.agrees {
                failures.push(format!("a={alpha} T={steps}: oracle vs recurrence rel err {:e}", check.relative_error));
            }
            let params = HardCopyParams::new(alpha, 1, 0, steps).unwrap();
            let schedule = CheckpointSchedule::explicit(vec![steps]).unwrap();
            let summary = run_ensemble(&params, RUNS, &schedule, derive_seed(SEED_ORACLE, steps) ^ alpha.to_bits())
                .expect("ensemble");
            let last = summary.last();
            let t = steps as f64;
            let n = RUNS as f64;

            // Standard errors from the exact variances; the tiny floor covers
            // degenerate counts whose variance is zero.
            let mut z_of = |label: String, mean: f64, expected: f64, var: f64| {
                let se = (var.max(0.0) / n).sqrt() + 1e-12;
                let z = (mean - expected).abs() / se;
                worst_z = worst_z.max(z);
                if z > 4.0 {
                    failures.push(format!("a={alpha} T={steps} {label}: mean {mean} exact {expected} z {z:.2}"));
                }
            };
            z_of("e".into(), last.edges.mean, exact.e_edges, exact.var_edges());
            for &k in exact.e_dk.keys() {
                z_of(format!("D_{k}"), last.fraction(k).mean * t, exact.e_dk(k), exact.var_dk(k));
            }
            for d in &last.degree_fractions {
                if d.mean > 0.0 && !exact.e_dk.contains_key(&d.k) {
                    failures.push(format!("a={alpha} T={steps}: degree {} observed but impossible", d.k));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    if !within_budget(elapsed, 120) {
        failures.push(format!("runtime {elapsed:.1?} over 2 min"));
    }
    let detail = format!("worst |z| {worst_z:.2} (limit 4), {RUNS} runs x 6 configs, {elapsed:.1?}");
    match failures.is_empty() {
        true => outcome(true, detail),
        false => outcome(false, format!("{detail}; {}", failures.join("; "))),
    }
}

fn cli_ensemble_head(out: &Path) -> Result<Duration, String> {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_hardcopy"))
        .args(["ensemble", "--alpha", "0.9", "--m", "1", "--steps", "100000", "--replicas", "50"])
        .args(["--seed", &SEED_HEAD.to_string(), "--out"])
        .arg(out)
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("ensemble exited with {status}"));
    }
    Ok(start.elapsed())
}

fn dk_row(path: &Path, k: u64) -> Option<(f64, f64)> {
    let text = fs::read_to_string(path).ok()?;
    text.lines().skip(1).find_map(|l| {
        let f: Vec<&str> = l.split(',').collect();
        (f[0].parse::<u64>().ok()? == k).then(|| Some((f[1].parse().ok()?, f[2].parse().ok()?)))?
    })
}

/// 2. Head of the degree sequence through the CLI.
fn sequence_head(out: &Path) -> Outcome {
    let elapsed = match cli_ensemble_head(out) {
        Ok(d) => d,
        Err(e) => return outcome(false, e),
    };
    let csv = out.join("dk_empirical.csv");
    let (Some((d1, se1)), Some((d2, se2))) = (dk_row(&csv, 1), dk_row(&csv, 2)) else {
        return outcome(false, "dk_empirical.csv lacks rows k=1,2".into());
    };
    let pass = (d1 - 0.6429).abs() <= 0.02 && (d2 - 0.1692).abs() <= 0.01 && within_budget(elapsed, 300);
    outcome(
        pass,
        format!(
            "D1/T {d1:.5} (se {se1:.1e}, target 0.6429 +- 0.02), D2/T {d2:.5} (se {se2:.1e}, target 0.1692 +- 0.01), {elapsed:.1?}"
        ),
    )
}

/// 3. Tail exponent of a single long run.
fn exponent() -> Outcome {
    let start = Instant::now();
    let params = HardCopyParams::new(0.9, 1, SEED_EXPONENT, 1_000_000).unwrap();
    let (g, _) = simulate(&params, &CheckpointSchedule::explicit(vec![1_000_000]).unwrap()).expect("run");
    let fit = match fit_power_law(&degree_histogram(&g), 10) {
        Ok(f) => f,
        Err(e) => return outcome(false, e.to_string()),
    };
    let elapsed = start.elapsed();
    outcome(
        (fit.gamma_hat - 2.8).abs() <= 0.2 && within_budget(elapsed, 300),
        format!(
            "gamma_hat {:.4} (target 2.8 +- 0.2, n_tail {}, KS {:.4}), {elapsed:.1?}",
            fit.gamma_hat, fit.n_tail, fit.ks_distance
        ),
    )
}

/// 4. Edge growth: mean and the decay of |e_t/t - mu|.
fn edge_growth() -> Outcome {
    let params = HardCopyParams::new(0.9, 1, 0, 10_000).unwrap();
    let schedule = CheckpointSchedule::explicit(vec![1_000, 10_000]).unwrap();
    let summary = run_ensemble(&params, 200, &schedule, SEED_EDGES).expect("ensemble");
    let growth = expected_edges_exact(0.9, 1, 10_000).unwrap();
    let mu = analytic::mu(0.9, 1).unwrap();
    let mean_t = summary.checkpoint(10_000).unwrap().edges.mean;
    let expected = growth.expected_edges(10_000);
    let rel = (mean_t - expected).abs() / expected;
    let ratio = |t: u64| (summary.checkpoint(t).unwrap().edges.mean / t as f64 - mu).abs();
    let (r3, r4) = (ratio(1_000), ratio(10_000));
    let se = |t: u64| summary.checkpoint(t).unwrap().edges.stderr / t as f64;
    outcome(
        rel <= 0.01 && r4 <= 2.0 * r3,
        format!(
            "mean e_T {mean_t:.1} vs exact {expected:.1} (rel {rel:.2e}, limit 1e-2); |e/t-mu| {r3:.3e} at 1e3 (se {:.1e}), {r4:.3e} at 1e4 (se {:.1e}), need ratio(1e4) <= 2 ratio(1e3)",
            se(1_000),
            se(10_000)
        ),
    )
}

/// 5. Normalization, the alpha = 1 closed form and the mean degree.
fn analytic_consistency() -> Outcome {
    let seq = limit_degree_sequence(0.9, 1, 1_000_000).unwrap();
    let mass = seq.partial_sum(1_000_000);
    let ba = limit_degree_sequence(1.0, 1, 1_000).unwrap();
    let m = 1.0;
    let worst = (1..=1_000u64)
        .map(|k| {
            let kf = k as f64;
            let closed = 2.0 * m * (m + 1.0) / (kf * (kf + 1.0) * (kf + 2.0));
            (ba.d(k) - closed).abs() / closed
        })
        .fold(0.0, f64::max);
    let mean = seq.mean_degree();
    let mean_rel = (mean - 2.25).abs() / 2.25;
    outcome(
        mass >= 0.999 && worst <= 1e-12 && mean_rel <= 0.02,
        format!(
            "sum d_k {mass:.9} (>= 0.999); BA closed form worst rel err {worst:.1e} (<= 1e-12); mean degree {mean:.6} vs 2.25 (rel {mean_rel:.1e}, <= 0.02)"
        ),
    )
}

/// 6. Invariant fuzzing over random parameters.
fn invariant_fuzz() -> Outcome {
    let mut rng = rng_from_seed(SEED_FUZZ);
    let schedule = CheckpointSchedule::explicit(vec![1_000]).unwrap();
    let mut violations = Vec::new();
    let mut steps_checked = 0u64;
    for _ in 0..1_000 {
        let alpha = 1.0 - rng.random::<f64>();
        let m = rng.random_range(1..=3u32);
        let seed = rng.random::<u64>();
        let params = HardCopyParams::new(alpha, m, seed, 1_000).unwrap();
        let mut g = MultiGraph::new_initial(m).unwrap();
        let mut run_rng = rng_from_seed(seed);
        let mut prev = (g.max_degree(), g.edge_count());
        let mut local = Vec::new();
        let result = evolve(&mut g, &params, &mut run_rng, 1_000, &schedule, |g, delta| {
            steps_checked += 1;
            let t = g.vertex_count();
            let (dmax, e) = (g.max_degree(), g.edge_count());
            if dmax > prev.0 + 2 * u64::from(m) {
                local.push(format!("t={t}: max degree jumped {} -> {dmax}", prev.0));
            }
            if e < u64::from(m) * t {
                local.push(format!("t={t}: e={e} < m t"));
            }
            let added = match delta.kind {
                StepKind::NewVertex { .. } => u64::from(m),
                StepKind::Copy { .. } => g.degree(delta.vertex),
            };
            if e != prev.1 + added || delta.edges_added != added {
                local.push(format!("t={t}: edge count {} -> {e} after adding {added}", prev.1));
            }
            prev = (dmax, e);
        });
        if let Err(e) = result {
            violations.push(format!("alpha={alpha} m={m} seed={seed}: {e}"));
            continue;
        }
        if let Err(v) = g.check_invariants() {
            local.push(v.to_string());
        }
        if g.vertex_count() != 1_000 {
            local.push(format!("|V| = {}", g.vertex_count()));
        }
        violations.extend(local.into_iter().map(|v| format!("alpha={alpha} m={m} seed={seed}: {v}")));
    }
    outcome(
        violations.is_empty(),
        format!(
            "1000 configs, {steps_checked} steps checked, {} violations{}",
            violations.len(),
            violations.first().map(|v| format!(" (first: {v})")).unwrap_or_default()
        ),
    )
}

/// 7. Kumar copying baseline.
fn kumar_baseline() -> Outcome {
    let start = Instant::now();
    let state = run_kumar(&KumarParams::new(0.5, 1, SEED_KUMAR, 1_000_000).unwrap());
    let fit = match fit_power_law(&state.in_degree_histogram(), 10) {
        Ok(f) => f,
        Err(e) => return outcome(false, e.to_string()),
    };
    outcome(
        (fit.gamma_hat - 3.0).abs() <= 0.3,
        format!("gamma_hat {:.4} (target 3.0 +- 0.3, n_tail {}), {:.1?}", fit.gamma_hat, fit.n_tail, start.elapsed()),
    )
}

/// 8. Envelope diagnostics and variance growth.
fn qs_bounds() -> Outcome {
    let (alpha, m) = (0.9, 1);
    let eps0 = default_epsilons(alpha, m).unwrap().epsilon0;
    let mut degree_final = 0;
    let mut conc_final = 0;
    let mut any_checkpoint = 0;
    for i in 0..100 {
        let params = HardCopyParams::new(alpha, m, derive_seed(SEED_QS, i), 100_000).unwrap();
        let (_, trajectory) = simulate(&params, &CheckpointSchedule::Geometric).expect("run");
        let report = qs_diagnostics(&trajectory, alpha, m, eps0, 100).expect("diagnostics");
        let last = report.rows.last().expect("final checkpoint");
        degree_final += usize::from(!last.degree_ok);
        conc_final += usize::from(!last.concentration_ok);
        any_checkpoint += report.degree_violations + report.concentration_violations;
    }
    let params = HardCopyParams::new(alpha, m, 0, 100_000).unwrap();
    let schedule = CheckpointSchedule::explicit(vec![1_000, 10_000, 100_000]).unwrap();
    let summary = run_ensemble(&params, 200, &schedule, SEED_QS).expect("ensemble");
    let fit = variance_growth_fit(&summary.edge_variances());
    let bound = analytic::variance_exponent_bound(alpha, m, eps0).unwrap();
    let slope = fit.slope();
    outcome(
        degree_final == 0 && conc_final == 0 && slope.is_some_and(|s| s <= 1.6),
        format!(
            "final-checkpoint violations: max degree {degree_final}, concentration {conc_final} (100 seeds; {any_checkpoint} over all checkpoints t >= 100); variance slope {} (bound {bound:.2} + 0.2 = 1.6)",
            slope.map(|s| format!("{s:.3}")).unwrap_or_else(|| format!("{fit:?}"))
        ),
    )
}

/// 9. Criterion 2's command, rerun, must give identical bytes.
fn determinism(first: &Path, second: &Path) -> Outcome {
    if let Err(e) = cli_ensemble_head(second) {
        return outcome(false, e);
    }
    let mut names: Vec<_> = match fs::read_dir(first) {
        Ok(rd) => rd.filter_map(|e| e.ok().map(|e| e.file_name())).collect(),
        Err(e) => return outcome(false, e.to_string()),
    };
    names.sort();
    let differing: Vec<_> = names
        .iter()
        .filter(|n| fs::read(first.join(n)).ok() != fs::read(second.join(n)).ok())
        .map(|n| n.to_string_lossy().into_owned())
        .collect();
    let extra = fs::read_dir(second).map(|rd| rd.count()).unwrap_or(0) != names.len();
    outcome(
        differing.is_empty() && !extra && !names.is_empty(),
        format!("{} files compared, {} differ {:?}", names.len(), differing.len(), differing),
    )
}

fn main() {
    // libtest flags such as --nocapture or a name filter are accepted and ignored.
    let dir = tempfile::tempdir().expect("temp dir");
    let (first, second) = (dir.path().join("head_a"), dir.path().join("head_b"));
    let criteria: Vec<Criterion> = vec![
        ("1 oracle equivalence", Box::new(oracle_equivalence)),
        ("2 head of degree sequence", Box::new(|| sequence_head(&first))),
        ("3 tail exponent", Box::new(exponent)),
        ("4 edge growth", Box::new(edge_growth)),
        ("5 analytic self-consistency", Box::new(analytic_consistency)),
        ("6 invariant fuzz", Box::new(invariant_fuzz)),
        ("7 kumar baseline", Box::new(kumar_baseline)),
        ("8 qs-bound diagnostics", Box::new(qs_bounds)),
        ("9 determinism", Box::new(|| determinism(&first, &second))),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        failed += usize::from(!o.pass);
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
