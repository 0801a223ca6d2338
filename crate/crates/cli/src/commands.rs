//! One function per subcommand. Each validates its settings, computes, then
//! writes its files; nothing is written before validation succeeds.

use std::io::Write as _;
use std::path::Path;

use hardcopy::analytic::{
    self, default_epsilons, epsilon1, expected_edges_exact, limit_degree_sequence, AnalyticError, Epsilons,
};
use hardcopy::oracle::{check_against_recurrence, enumerate, OracleError};
use hardcopy::process::{run_kumar, KumarParams, ModelError};
use hardcopy::seed::{derive_seed, rng_from_seed};
use hardcopy::stats::{
    compare_to_theory, degree_histogram, fit_power_law, run_ensemble, DegreeMoment, EnsembleError, EnsembleSummary,
};
use hardcopy::{evolve, validate_hard_copy, EvolveError, HardCopyParams, MultiGraph, RegimeReport, Trajectory};
use log::{info, warn};
use serde_json::json;

use crate::config::Settings;
use crate::output::{
    create_dir, degrees_csv, dk_empirical_csv, fmt_num, opt_num, read_degrees_csv, read_dk_empirical_csv, write_json,
    Csv,
};
use crate::CliError;

const SEED_DERIVATION: &str = "splitmix64(splitmix64(master_seed) ^ (index + 1) * 0x9e3779b97f4a7c15)";

fn model_error(e: ModelError) -> CliError {
    let key = match e {
        ModelError::InvalidAlpha(_) => "alpha",
        ModelError::InvalidEdgesPerStep => "m",
        ModelError::InvalidCopyFactor(_) => "copy_factor",
        ModelError::InvalidOutDegree => "out_degree",
        ModelError::InvalidSteps { .. } => "steps",
    };
    CliError::invalid(key, e.to_string())
}

fn analytic_error(e: AnalyticError) -> CliError {
    match e {
        AnalyticError::Params(p) => model_error(p),
        AnalyticError::InvalidEpsilon { .. } => CliError::invalid("eps0", e.to_string()),
        AnalyticError::InvalidRange(_) => CliError::invalid("k_max", e.to_string()),
        AnalyticError::MuUndefined(_) | AnalyticError::OutOfRegime { .. } => CliError::invalid("alpha", e.to_string()),
    }
}

fn hard_copy_params(s: &Settings) -> Result<HardCopyParams, CliError> {
    let params = HardCopyParams::new(s.alpha()?, s.m()?, s.seed.unwrap_or(0), s.steps()?).map_err(model_error)?;
    Ok(match s.max_edges {
        Some(limit) => params.with_max_edges(limit),
        None => params,
    })
}

fn out_of_regime_warnings(alpha: f64, m: u32, regime: &RegimeReport) -> Vec<String> {
    let mut warnings = Vec::new();
    if !regime.theorem_regime {
        warnings.push(format!(
            "alpha={alpha} m={m} is outside the regime 2m(1-alpha) < alpha; the limit degree sequence is not guaranteed"
        ));
    }
    if !regime.lemma_regime {
        warnings.push(format!("alpha={alpha} m={m} violates 2m(1-alpha) < 1; edge growth bounds do not apply"));
    }
    if !regime.mu_defined {
        warnings.push(format!("mu is undefined for alpha={alpha} <= 1/2"));
    }
    warnings
}

fn trajectory_csv(trajectory: &Trajectory) -> Csv {
    let mut csv = Csv::new("t,e,max_degree,multi_edge_vertices,eta");
    for p in &trajectory.points {
        csv.row(&[
            p.t.to_string(),
            p.edges.to_string(),
            p.max_degree.to_string(),
            p.multi_edge_vertices.to_string(),
            opt_num(p.eta),
        ]);
    }
    csv
}

fn write_edges(g: &MultiGraph, path: &Path) -> Result<(), CliError> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    g.write_edge_list(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

pub fn simulate(s: &Settings) -> Result<(), CliError> {
    match s.model.as_deref().unwrap_or("hard-copy") {
        "hard-copy" | "hardcopy" => simulate_hard_copy(s),
        "kumar" => simulate_kumar(s),
        other => Err(CliError::invalid("model", format!("unknown model `{other}` (expected hard-copy or kumar)"))),
    }
}

fn simulate_hard_copy(s: &Settings) -> Result<(), CliError> {
    let params = hard_copy_params(s)?;
    let schedule = s.schedule()?;
    schedule.times(2, params.steps).map_err(|e| CliError::invalid("checkpoints", e.to_string()))?;
    let out = s.out()?;
    let regime = params.regime();
    let mut warnings = out_of_regime_warnings(params.alpha, params.m, &regime);
    for w in &warnings {
        warn!("{w}");
    }

    let mut g = MultiGraph::new_initial(params.m).map_err(|e| CliError::invalid("m", e.to_string()))?;
    let mut rng = rng_from_seed(params.seed);
    let trajectory = match evolve(&mut g, &params, &mut rng, params.steps, &schedule, |_, _| {}) {
        Ok(t) => t,
        Err(EvolveError::EdgeBudget { limit, t, partial }) => {
            let msg = format!("edge budget {limit} reached at t={t}; run stopped early");
            warn!("{msg}");
            warnings.push(msg);
            partial
        }
        Err(EvolveError::Graph { t, source, .. }) => {
            return Err(CliError::invalid("max_edges", format!("run failed at t={t}: {source}")))
        }
        Err(e) => return Err(CliError::invalid("checkpoints", e.to_string())),
    };

    let mu = analytic::mu(params.alpha, params.m).ok();
    let t = g.vertex_count();
    let e = g.edge_count();
    let summary = json!({
        "params": {
            "model": "hard-copy",
            "alpha": params.alpha,
            "m": params.m,
            "steps": params.steps,
            "seed": params.seed,
            "max_edges": params.max_edges,
        },
        "regime": regime,
        "results": {
            "t": t,
            "e": e,
            "max_degree": g.max_degree(),
            "multi_edge_vertices": g.multi_edge_vertex_count(),
            "mu": mu,
            "eta": mu.map(|mu| e as f64 - mu * t as f64),
            "completed": t == params.steps,
        },
        "seeds": { "seed": params.seed },
        "warnings": warnings,
    });

    create_dir(out)?;
    write_json(&out.join("summary.json"), &summary)?;
    degrees_csv(&degree_histogram(&g)).write(&out.join("degrees.csv"))?;
    trajectory_csv(&trajectory).write(&out.join("trajectory.csv"))?;
    if s.edges.unwrap_or(false) {
        write_edges(&g, &out.join("edges.txt"))?;
    }
    info!("t={t} e={e} written to {}", out.display());
    Ok(())
}

fn simulate_kumar(s: &Settings) -> Result<(), CliError> {
    let copy_factor = s.copy_factor.ok_or_else(|| CliError::missing("copy_factor"))?;
    let params = KumarParams::new(copy_factor, s.out_degree.unwrap_or(1), s.seed.unwrap_or(0), s.steps()?)
        .map_err(model_error)?;
    let out = s.out()?;
    let state = run_kumar(&params);
    let hist = state.in_degree_histogram();
    let summary = json!({
        "params": {
            "model": "kumar",
            "copy_factor": params.copy_factor,
            "out_degree": params.out_degree,
            "steps": params.steps,
            "seed": params.seed,
        },
        "regime": { "exponent": analytic::kumar_exponent(params.copy_factor) },
        "results": {
            "t": state.vertex_count(),
            "e": state.vertex_count() * u64::from(params.out_degree),
            "max_in_degree": hist.max_key().unwrap_or(0),
        },
        "seeds": { "seed": params.seed },
        "warnings": Vec::<String>::new(),
    });
    create_dir(out)?;
    write_json(&out.join("summary.json"), &summary)?;
    degrees_csv(&hist).write(&out.join("degrees.csv"))?;
    Ok(())
}

fn ensemble_error(e: EnsembleError, s: &Settings) -> CliError {
    match e {
        EnsembleError::TooFewReplicas(r) => {
            CliError::invalid("replicas", format!("at least 2 replicas are needed for standard errors, got {r}"))
        }
        EnsembleError::Schedule(e) => CliError::invalid("checkpoints", e.to_string()),
        e @ EnsembleError::Replicas { .. } => {
            CliError::invalid(if s.max_edges.is_some() { "max_edges" } else { "steps" }, e.to_string())
        }
    }
}

fn run_ensemble_from(s: &Settings) -> Result<(EnsembleSummary, u64), CliError> {
    let params = hard_copy_params(s)?;
    let replicas = s.replicas.ok_or_else(|| CliError::missing("replicas"))?;
    if replicas < 2 {
        return Err(CliError::invalid("replicas", format!("at least 2 replicas are needed, got {replicas}")));
    }
    let schedule = s.schedule()?;
    let master_seed = s.seed.unwrap_or(0);
    for w in out_of_regime_warnings(params.alpha, params.m, &params.regime()) {
        warn!("{w}");
    }
    let pool = s.thread_pool()?;
    let summary =
        pool.install(|| run_ensemble(&params, replicas, &schedule, master_seed)).map_err(|e| ensemble_error(e, s))?;
    Ok((summary, master_seed))
}

pub fn ensemble(s: &Settings) -> Result<(), CliError> {
    let out = s.out()?;
    let (summary, master_seed) = run_ensemble_from(s)?;
    let mu = analytic::mu(summary.alpha, summary.m).ok();
    let results: Vec<_> = summary
        .checkpoints
        .iter()
        .map(|c| {
            json!({
                "t": c.t,
                "edges": c.edges,
                "edges_per_vertex": c.edges.mean / c.t as f64,
                "ratio_to_mu": mu.map(|mu| (c.edges.mean / c.t as f64 - mu).abs()),
                "max_degree": c.max_degree,
                "multi_edge_vertices": c.multi_edge_vertices,
            })
        })
        .collect();
    let seeds: Vec<u64> = (0..summary.replicas).map(|i| derive_seed(master_seed, i)).collect();
    let doc = json!({
        "params": {
            "alpha": summary.alpha,
            "m": summary.m,
            "steps": summary.steps,
            "replicas": summary.replicas,
            "max_edges": s.max_edges,
            "checkpoints": summary.checkpoints.iter().map(|c| c.t).collect::<Vec<_>>(),
        },
        "regime": summary.regime,
        "results": results,
        "seeds": { "master_seed": master_seed, "derivation": SEED_DERIVATION, "replicas": seeds },
    });
    create_dir(out)?;
    write_json(&out.join("ensemble.json"), &doc)?;
    for c in &summary.checkpoints {
        dk_empirical_csv(&c.degree_fractions).write(&out.join(format!("dk_empirical_t{}.csv", c.t)))?;
    }
    dk_empirical_csv(&summary.last().degree_fractions).write(&out.join("dk_empirical.csv"))?;
    Ok(())
}

fn epsilons(alpha: f64, m: u32, eps0: Option<f64>) -> Result<Epsilons, CliError> {
    match eps0 {
        Some(epsilon0) => Ok(Epsilons { epsilon0, epsilon1: epsilon1(alpha, m, epsilon0).map_err(analytic_error)? }),
        None => default_epsilons(alpha, m).map_err(analytic_error),
    }
}

pub fn analytic(s: &Settings) -> Result<(), CliError> {
    let (alpha, m) = (s.alpha()?, s.m()?);
    let k_max = s.k_max.unwrap_or(1000);
    let steps = s.steps.unwrap_or(1000);
    if k_max < u64::from(m) {
        return Err(CliError::invalid("k_max", format!("must be at least m = {m}")));
    }
    if steps < 2 {
        return Err(CliError::invalid("steps", "must be at least 2"));
    }
    let out = s.out()?;
    let seq = limit_degree_sequence(alpha, m, k_max).map_err(analytic_error)?;
    let eps = epsilons(alpha, m, s.eps0)?;
    let growth = expected_edges_exact(alpha, m, steps).map_err(analytic_error)?;

    let mut theory = Csv::new("k,d_k");
    for (k, d) in seq.iter() {
        theory.row(&[k.to_string(), fmt_num(d)]);
    }
    let mut edges = Csv::new("t,E_e,eta");
    for (t, e) in growth.iter() {
        edges.row(&[t.to_string(), fmt_num(e), opt_num(growth.eta(t))]);
    }
    create_dir(out)?;
    theory.write(&out.join("dk_theory.csv"))?;
    edges.write(&out.join("edges_expected.csv"))?;
    println!("mu={}", fmt_num(seq.mu));
    println!("exponent={}", fmt_num(seq.exponent));
    println!("epsilon0={}", fmt_num(eps.epsilon0));
    println!("epsilon1={}", fmt_num(eps.epsilon1));
    Ok(())
}

pub fn oracle(s: &Settings) -> Result<(), CliError> {
    let (alpha, m, steps) = (s.alpha()?, s.m()?, s.steps()?);
    let out = s.out()?;
    let exact = enumerate(alpha, m, steps).map_err(|e| match e {
        OracleError::Params(p) => model_error(p),
        e @ OracleError::TooLarge { m: big_m, .. } if big_m > 2 => CliError::invalid("m", e.to_string()),
        e => CliError::invalid("steps", e.to_string()),
    })?;
    let check = check_against_recurrence(&exact).map_err(|e| CliError::invalid("alpha", e.to_string()))?;

    let mut csv = Csv::new("k,E_Dk");
    for (&k, &v) in &exact.e_dk {
        csv.row(&[k.to_string(), fmt_num(v)]);
    }
    let doc = json!({
        "params": { "alpha": alpha, "m": m, "steps": steps },
        "regime": validate_hard_copy(alpha, m).map_err(model_error)?,
        "results": {
            "E_e": exact.e_edges,
            "Var_e": exact.var_edges(),
            "E_max_degree": exact.e_max_degree,
            "leaves": exact.leaves,
            "recurrence": check,
        },
        "seeds": {},
    });
    create_dir(out)?;
    csv.write(&out.join("exact.csv"))?;
    write_json(&out.join("oracle.json"), &doc)?;
    println!("E_e={}", fmt_num(exact.e_edges));
    Ok(())
}

pub fn fit(s: &Settings) -> Result<(), CliError> {
    let input = s.input.as_deref().ok_or_else(|| CliError::missing("input"))?;
    let k_min = s.k_min.unwrap_or(10);
    let hist = read_degrees_csv(input)?;
    let fit = fit_power_law(&hist, k_min).map_err(|e| CliError::invalid("k_min", e.to_string()))?;
    println!("{}", serde_json::to_string_pretty(&fit).expect("serializable fit"));
    Ok(())
}

pub fn compare(s: &Settings) -> Result<(), CliError> {
    let (alpha, m) = (s.alpha()?, s.m()?);
    let k_max = s.k_max.unwrap_or(20);
    if k_max < u64::from(m) {
        return Err(CliError::invalid("k_max", format!("must be at least m = {m}")));
    }
    let theory = limit_degree_sequence(alpha, m, k_max).map_err(analytic_error)?;
    let eps = epsilons(alpha, m, s.eps0)?;
    let (t, empirical, source): (u64, Vec<DegreeMoment>, _) = match &s.empirical {
        Some(path) => {
            let t = s.steps()?;
            (t, read_dk_empirical_csv(path)?, json!({ "empirical": path }))
        }
        None => {
            let (summary, master_seed) = run_ensemble_from(s)?;
            let last = summary.last();
            (last.t, last.degree_fractions.clone(), json!({ "replicas": summary.replicas, "master_seed": master_seed }))
        }
    };
    let cmp = compare_to_theory(t, &empirical, &theory, u64::from(m)..=k_max, eps.epsilon1)
        .map_err(|e| CliError::invalid("k_max", e.to_string()))?;

    let mut csv = Csv::new("k,empirical,theory,stderr,z");
    for r in &cmp.rows {
        csv.row(&[r.k.to_string(), fmt_num(r.empirical), fmt_num(r.theory), fmt_num(r.stderr), fmt_num(r.z)]);
    }
    if let Some(out) = &s.out {
        let doc = json!({
            "params": { "alpha": alpha, "m": m, "t": t, "k_max": k_max, "epsilon0": eps.epsilon0 },
            "regime": validate_hard_copy(alpha, m).map_err(model_error)?,
            "results": cmp,
            "seeds": source,
        });
        create_dir(out)?;
        csv.write(&out.join("compare.csv"))?;
        write_json(&out.join("compare.json"), &doc)?;
    }
    let mut stdout = std::io::stdout().lock();
    let _ = write!(stdout, "{}", csv.text());
    let _ = writeln!(stdout, "max_abs_diff={}", fmt_num(cmp.max_abs_diff));
    let _ = writeln!(stdout, "slack={}", fmt_num(cmp.slack));
    Ok(())
}
