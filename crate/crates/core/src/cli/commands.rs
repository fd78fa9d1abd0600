use serde::Serialize;
use serde_json::{json, Value};

use super::config::{config_error, Family, PlanChoice, RunConfig};
use crate::dv::{basis_eigenvalues, basis_matrix, swap_eigenvalues_of, DvBasis};
use crate::estimators::{
    analytic_squeezed_overlap, analytic_swap2m_squeezed, chernoff_bound, cutoff_for_coherent_chernoff,
    cutoff_for_coherent_normal, cutoff_for_squeezed, normal_cdf, parity_experiment, squeezed_bound,
    squeezed_large_r_cutoff, squeezed_pair_raw, swap2m_expectation, EstimatorResult, Experiment, Threshold,
};
use crate::fock::{FockState, MixedEnsemble, ProductState};
use crate::protocols::{compile_cost, replicate_purification, two_copy_experiment, HybridSwapTest, PermTest};
use crate::sampling::{write_shots_csv, Seed};
use crate::{Error, Result, C64, TOOL_VERSION};

/// A command's output: the JSON document and its CSV rendering.
pub struct Report {
    pub json: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Per-shot CSV of the first run, when the command samples photon patterns.
    pub shots_csv: Option<Vec<u8>>,
}

impl Report {
    pub fn csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

fn document(command: &str, cfg: &RunConfig, warnings: &[String], body: Value) -> Value {
    let mut doc = json!({
        "tool": TOOL_VERSION,
        "command": command,
        "config": cfg.resolved(),
    });
    if !warnings.is_empty() {
        doc["warnings"] = json!(warnings);
    }
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    doc
}

fn complex_json(c: C64) -> Value {
    json!([c.re, c.im])
}

#[derive(Serialize)]
struct RunSummary {
    grand_mean: [f64; 2],
    std_of_means: Option<f64>,
}

fn summarize(means: &[C64]) -> RunSummary {
    let n = means.len() as f64;
    let mean = means.iter().sum::<C64>() / n;
    let std = (means.len() > 1)
        .then(|| (means.iter().map(|m| (m - mean).norm_sqr()).sum::<f64>() / (n - 1.0)).sqrt());
    RunSummary { grand_mean: [mean.re, mean.im], std_of_means: std }
}

/// Repeats the estimate `runs` times; run `k` uses the seed derived from the
/// configured root with label `k`.
fn repeated(cfg: &RunConfig, exp: &Experiment) -> Result<(Vec<EstimatorResult>, Option<Vec<u8>>)> {
    let (shots, runs, root) = (cfg.shots()?, cfg.runs()?, Seed::new(cfg.seed()));
    let results = (0..runs).map(|k| exp.estimate(shots, root.derive(k))).collect::<Result<Vec<_>>>()?;
    if !cfg.keep_shots {
        return Ok((results, None));
    }
    let mut buf = Vec::new();
    write_shots_csv(&mut buf, &exp.outcomes(shots, root.derive(0))?)?;
    Ok((results, Some(buf)))
}

fn run_rows(results: &[EstimatorResult]) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["run", "seed", "mean_re", "mean_im", "stderr", "shots", "discarded"];
    let rows = results
        .iter()
        .enumerate()
        .map(|(k, r)| {
            vec![
                k.to_string(),
                r.seed.to_string(),
                r.mean.re.to_string(),
                r.mean.im.to_string(),
                r.stderr.map_or_else(String::new, |s| s.to_string()),
                r.shots.to_string(),
                r.discarded.to_string(),
            ]
        })
        .collect();
    (header.iter().map(|s| s.to_string()).collect(), rows)
}

fn estimation_report(
    command: &str,
    cfg: &RunConfig,
    warnings: &[String],
    exp: &Experiment,
    mut extra: Value,
) -> Result<Report> {
    let (results, shots_csv) = repeated(cfg, exp)?;
    let summary = summarize(&results.iter().map(|r| r.mean).collect::<Vec<_>>());
    extra["exact"] = complex_json(exp.exact());
    extra["runs"] = json!(results);
    extra["summary"] = json!(summary);
    let (header, rows) = run_rows(&results);
    Ok(Report { json: document(command, cfg, warnings, extra), header, rows, shots_csv })
}

fn build_states(cfg: &RunConfig, warnings: &mut Vec<String>) -> Result<Vec<MixedEnsemble>> {
    cfg.states.iter().map(|s| cfg.build(s, warnings)).collect()
}

pub fn cmd_overlap(cfg: &RunConfig) -> Result<Report> {
    let mut warnings = Vec::new();
    let states = build_states(cfg, &mut warnings)?;
    if states.len() < 2 && cfg.pairs.is_none() {
        return Err(config_error("overlap needs two states, or explicit pairs"));
    }
    let input = ProductState::from_factors(states)?;
    let pairs = match &cfg.pairs {
        Some(p) => p.clone(),
        None if input.modes() == 2 => vec![(0, 1)],
        None => {
            let half = input.modes() / 2;
            if input.modes() % 2 != 0 {
                return Err(config_error("odd mode count: give explicit pairs"));
            }
            (0..half).map(|k| (k, half + k)).collect()
        }
    };
    let threshold = cfg.threshold(pairs.len())?;
    let exp = parity_experiment(&input, &pairs, &threshold).map_err(as_config)?;
    estimation_report("overlap", cfg, &warnings, &exp, json!({ "pairs": pairs }))
}

/// Errors in the shape of the request itself are configuration errors.
fn as_config(e: Error) -> Error {
    match e {
        Error::InvalidParameter(m) | Error::ShapeMismatch(m) => Error::Config(m),
        other => other,
    }
}

pub fn cmd_cutoff_plan(cfg: &RunConfig) -> Result<Report> {
    let eps = cfg.eps.ok_or_else(|| config_error("cutoff-plan needs eps"))?;
    let family = cfg.family.ok_or_else(|| config_error("cutoff-plan needs family"))?;
    let (plan, bound_at, extra): (_, Box<dyn Fn(usize) -> f64>, Value) = match family {
        Family::Squeezed => {
            let r = cfg.r.ok_or_else(|| config_error("squeezed planning needs r"))?;
            let plan = cutoff_for_squeezed(r, eps).map_err(as_config)?;
            (plan, Box::new(move |m| squeezed_bound(r, m)), json!({ "large_r_formula": squeezed_large_r_cutoff(r, eps) }))
        }
        Family::Coherent => {
            let e = cfg.energy.ok_or_else(|| config_error("coherent planning needs E"))?;
            match cfg.method.unwrap_or(PlanChoice::Chernoff) {
                PlanChoice::Chernoff => {
                    (cutoff_for_coherent_chernoff(e, eps).map_err(as_config)?, Box::new(move |m| chernoff_bound(e, m)), json!({}))
                }
                PlanChoice::Normal => {
                    let bound = move |m: usize| 1.0 - normal_cdf((m as f64 - e) / e.sqrt()).powi(2);
                    (cutoff_for_coherent_normal(e, eps).map_err(as_config)?, Box::new(bound), json!({}))
                }
            }
        }
    };
    let rows = (0..=plan.m).map(|m| vec![m.to_string(), bound_at(m).to_string()]).collect();
    let mut body = extra;
    body["plan"] = json!(plan);
    Ok(Report {
        json: document("cutoff-plan", cfg, &[], body),
        header: vec!["M".into(), "bound".into()],
        rows,
        shots_csv: None,
    })
}

/// Default per-mode preparation cutoff for the squeezed-pair table.
const FIG2_CUTOFF: usize = 40;

pub fn cmd_fig2(cfg: &RunConfig) -> Result<Report> {
    let r_list = cfg.r_list.clone().unwrap_or_else(|| vec![0.8, 1.0, 1.2]);
    let [lo, hi] = cfg.m_range.unwrap_or([4, 20]);
    if lo > hi {
        return Err(config_error("M_range must be ascending"));
    }
    let n = cfg.cutoff.unwrap_or(FIG2_CUTOFF);
    let mut rows = Vec::new();
    let mut table = Vec::new();
    let mut limits = Vec::new();
    for &r in &r_list {
        if !(r > 0.0) {
            return Err(config_error(format!("r = {r} must be positive")));
        }
        let joint = squeezed_pair_raw(r, n)?;
        limits.push(json!({ "r": r, "limit": analytic_squeezed_overlap(r) }));
        for m in lo..=hi {
            let closed = analytic_swap2m_squeezed(r, m);
            let sim = swap2m_expectation(&joint, m)?;
            let diff = (closed - sim).abs();
            rows.push(vec![r.to_string(), m.to_string(), closed.to_string(), sim.to_string(), diff.to_string()]);
            table.push(json!({ "r": r, "M": m, "closed_form": closed, "simulated": sim, "abs_diff": diff }));
        }
    }
    Ok(Report {
        json: document("fig2", cfg, &[], json!({ "rows": table, "limits": limits, "cutoff": n })),
        header: ["r", "M", "closed_form", "simulated", "abs_diff"].iter().map(|s| s.to_string()).collect(),
        rows,
        shots_csv: None,
    })
}

pub fn cmd_perm(cfg: &RunConfig) -> Result<Report> {
    let mut warnings = Vec::new();
    let states = build_states(cfg, &mut warnings)?;
    let test = PermTest::new(&states).map_err(as_config)?;
    estimation_report("perm", cfg, &warnings, test.experiment(), json!({ "L": states.len() }))
}

pub fn cmd_two_copy(cfg: &RunConfig) -> Result<Report> {
    let mut warnings = Vec::new();
    let register: FockState = match (&cfg.purification, cfg.states.as_slice()) {
        (Some(p), []) => {
            let e = cfg.build(p, &mut warnings)?;
            let n = cfg.n.ok_or_else(|| config_error("two-copy with a purification needs n"))?;
            if e.len() != 1 {
                return Err(config_error("the purification must be pure"));
            }
            replicate_purification(e.first(), n).map_err(as_config)?
        }
        (None, [s]) => {
            let e = cfg.build(s, &mut warnings)?;
            if e.len() != 1 {
                return Err(config_error("the register state must be pure"));
            }
            e.first().clone()
        }
        _ => return Err(config_error("two-copy needs either purification + n or exactly one register state")),
    };
    let exp = two_copy_experiment(&register).map_err(as_config)?;
    estimation_report("two-copy", cfg, &warnings, &exp, json!({ "register_modes": register.modes() }))
}

pub fn cmd_compile_cost(cfg: &RunConfig) -> Result<Report> {
    let mut warnings = Vec::new();
    let mut training = Vec::with_capacity(cfg.training.len());
    for t in &cfg.training {
        let e = cfg.build(t, &mut warnings)?;
        if e.len() != 1 {
            return Err(config_error("training states must be pure"));
        }
        training.push(e.first().clone());
    }
    let threshold = cfg.threshold(2)?;
    let (shots, runs, root) = (cfg.shots()?, cfg.runs()?, Seed::new(cfg.seed()));
    let results = (0..runs)
        .map(|k| compile_cost(&training, &cfg.u, &cfg.v, &threshold, shots, root.derive(k).root))
        .collect::<Result<Vec<_>>>()
        .map_err(as_config)?;
    let summary = summarize(&results.iter().map(|c| C64::new(c.cost, 0.0)).collect::<Vec<_>>());
    let rows = results
        .iter()
        .enumerate()
        .map(|(k, c)| vec![k.to_string(), c.cost.to_string(), c.exact_cost.to_string(), c.leak.to_string()])
        .collect();
    Ok(Report {
        json: document(
            "compile-cost",
            cfg,
            &warnings,
            json!({ "exact_cost": results[0].exact_cost, "runs": results, "summary": summary }),
        ),
        header: ["run", "cost", "exact_cost", "leak"].iter().map(|s| s.to_string()).collect(),
        rows,
        shots_csv: None,
    })
}

pub fn cmd_hybrid(cfg: &RunConfig) -> Result<Report> {
    let mut warnings = Vec::new();
    let states = build_states(cfg, &mut warnings)?;
    let [a, b] = states.as_slice() else {
        return Err(config_error("hybrid needs exactly two states"));
    };
    let m = match cfg.threshold(1)? {
        Threshold::PerPair(ms) => ms[0],
        Threshold::Total(m) => m,
        Threshold::Unbounded => a.first().cutoff().max(1) + b.first().cutoff().max(1),
    };
    let test = HybridSwapTest::new(a, b, m).map_err(as_config)?;
    estimation_report("hybrid", cfg, &warnings, test.experiment(), json!({ "M": m }))
}

pub fn cmd_qudit_basis(cfg: &RunConfig) -> Result<Report> {
    let d = cfg.d.ok_or_else(|| config_error("qudit-basis needs d"))?;
    if d < 2 {
        return Err(config_error("d must be at least 2"));
    }
    let basis = cfg.basis.unwrap_or(DvBasis::W);
    let m = basis_matrix(basis, d)?;
    let unitarity = (m.adjoint() * &m - nalgebra::DMatrix::<C64>::identity(d * d, d * d))
        .iter()
        .map(|x| x.norm())
        .fold(0.0, f64::max);
    let verified = swap_eigenvalues_of(&m, d, 1e-12)?;
    let plus = verified.iter().filter(|&&l| l == 1).count();
    let minus = verified.len() - plus;
    if verified != basis_eigenvalues(basis, d) || (plus, minus) != (d * (d + 1) / 2, d * (d - 1) / 2) || unitarity > 1e-12 {
        return Err(Error::NotUnitary(unitarity));
    }
    let matrix: Vec<Vec<[f64; 2]>> =
        (0..d * d).map(|r| (0..d * d).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect();
    let rows = verified.iter().enumerate().map(|(c, l)| vec![c.to_string(), l.to_string()]).collect();
    Ok(Report {
        json: document(
            "qudit-basis",
            cfg,
            &[],
            json!({
                "d": d,
                "basis": basis,
                "matrix": matrix,
                "eigenvalues": verified,
                "multiplicities": [plus, minus],
                "unitarity_deviation": unitarity,
            }),
        ),
        header: vec!["column".into(), "eigenvalue".into()],
        rows,
        shots_csv: None,
    })
}
