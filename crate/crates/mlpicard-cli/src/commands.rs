//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use mlpicard::cost::{complexity_table, fe_model, rn_model};
use mlpicard::mlp::{mlp_estimate, EvalMode, GeneralParams, HeatParams};
use mlpicard::problems;
use mlpicard::quadrature::nested_measure;
use mlpicard::seminorm::{probe_reports, Probe, SeminormSpec};
use mlpicard::StreamKey;

use crate::config::{parse_x_spec, Mode, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Solver(mlpicard::Error),
    Io(std::io::Error),
    BadFlags(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Solver(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::BadFlags(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<mlpicard::Error> for CliError {
    fn from(e: mlpicard::Error) -> Self {
        CliError::Solver(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub fn exit_code_for(err: &CliError) -> u8 {
    match err {
        CliError::Solver(mlpicard::Error::UnknownProblem(_))
        | CliError::Solver(mlpicard::Error::NoClosedForm(_)) => 2,
        CliError::Solver(mlpicard::Error::ResourceLimit { .. }) => 3,
        CliError::Solver(_) | CliError::Io(_) => 1,
        CliError::BadFlags(_) => 64,
    }
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    print!("{content}");
    if let Some(path) = out {
        std::fs::write(path, content)?;
    }
    Ok(())
}

pub const RUN_SCHEMA: &str = "mlpicard/run/1";

#[derive(Serialize)]
struct RunRecord {
    schema: &'static str,
    problem: String,
    mode: &'static str,
    params: serde_json::Value,
    point: PointRecord,
    mean: f64,
    std: f64,
    reps: u32,
    rn_used: u64,
    fe_used: u64,
    rn_bound: Option<String>,
    fe_bound: Option<String>,
    wall_ms: u128,
    seed: u64,
    deterministic: bool,
}

#[derive(Serialize)]
struct PointRecord {
    t: f64,
    x: Vec<f64>,
}

pub fn run(config: &RunConfig, parallel: bool, out: Option<&Path>) -> Result<(), CliError> {
    let named = problems::by_name(&config.problem, config.dim)?;
    let x = parse_x_spec(&config.x_spec, config.dim).map_err(CliError::BadFlags)?;
    if !(0.0..=named.problem.horizon()).contains(&config.time) {
        return Err(CliError::BadFlags(format!(
            "--time {} outside [0, {}]",
            config.time,
            named.problem.horizon()
        )));
    }
    if config.reps == 0 {
        return Err(CliError::BadFlags("--reps must be at least 1".into()));
    }

    let (mode, mode_name, params_json, bounds) = match config.mode {
        Mode::Heat => {
            let params = HeatParams::new(config.depth, config.samples, config.order)?;
            let rn = rn_model(
                config.depth,
                config.samples,
                config.order,
                config.dim as u64,
            ) * config.reps;
            let fe = fe_model(config.depth, config.samples, config.order) * config.reps;
            (
                EvalMode::Heat(params),
                "heat",
                serde_json::json!({"n": config.depth, "m": config.samples, "q": config.order}),
                Some((rn.to_string(), fe.to_string())),
            )
        }
        Mode::General => {
            let params = GeneralParams::new(config.depth, config.rho)?;
            (
                EvalMode::General(params),
                "general",
                serde_json::json!({"k": config.depth, "rho": config.rho}),
                None,
            )
        }
    };

    let root = StreamKey::root(config.seed);
    let estimate = mlp_estimate(
        &named.problem,
        &mode,
        config.time,
        &x,
        &root,
        config.reps,
        parallel,
    )?;

    let (rn_bound, fe_bound) = match bounds {
        Some((rn, fe)) => (Some(rn), Some(fe)),
        None => (None, None),
    };
    let record = RunRecord {
        schema: RUN_SCHEMA,
        problem: named.name.clone(),
        mode: mode_name,
        params: params_json,
        point: PointRecord { t: config.time, x },
        mean: estimate.mean,
        std: estimate.std,
        reps: config.reps,
        rn_used: estimate.ledger.normals,
        fe_used: estimate.ledger.function_evals(),
        rn_bound,
        fe_bound,
        wall_ms: estimate.wall.as_millis(),
        seed: config.seed,
        deterministic: config.deterministic,
    };
    let line = serde_json::to_string(&record).expect("record serializes");
    emit(out, &format!("{line}\n"))
}

pub fn convergence(
    problem: &str,
    dim: usize,
    levels: &str,
    reps: u32,
    seed: u64,
    parallel: bool,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let named = problems::by_name(problem, dim)?;
    let solution = named
        .solution
        .clone()
        .ok_or_else(|| mlpicard::Error::NoClosedForm(named.name.clone()))?;
    let levels: Vec<u32> = levels
        .split(',')
        .map(|v| v.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::BadFlags(format!("bad --levels list {levels:?}")))?;
    if levels.is_empty() || reps == 0 {
        return Err(CliError::BadFlags("need levels and reps".into()));
    }

    let x = vec![0.0; dim];
    let truth = solution(0.0, &x);
    let mut csv = String::from("N,mean_abs_error,std_error,rn_model,fe_model,wall_ms\n");
    for (index, &level) in levels.iter().enumerate() {
        let params = HeatParams::new(level, level, level)?;
        let start = Instant::now();
        let root = StreamKey::root(seed).fork(&[index as i64]);
        let estimate = mlp_estimate(
            &named.problem,
            &EvalMode::Heat(params),
            0.0,
            &x,
            &root,
            reps,
            parallel,
        )?;
        let errors: Vec<f64> = estimate.values.iter().map(|v| (v - truth).abs()).collect();
        let (mean_err, std_err) = mlpicard::stats::mean_and_std(&errors);
        let rn = rn_model(level, level, level, dim as u64);
        let fe = fe_model(level, level, level);
        writeln!(
            csv,
            "{level},{mean_err:.10e},{:.10e},{rn},{fe},{}",
            std_err / (reps as f64).sqrt(),
            start.elapsed().as_millis()
        )
        .expect("write to string");
    }
    emit(out, &csv)
}

pub fn cost_table(
    n_max: u32,
    dim: u64,
    lipschitz: f64,
    horizon: f64,
    alpha: f64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if n_max == 0 || n_max > 8 {
        return Err(CliError::BadFlags("--n-max must be in [1, 8]".into()));
    }
    let mut csv = String::from("N,rn,fe,bound_rn,bound_fe,model_error\n");
    for row in complexity_table(n_max, dim, lipschitz, horizon, alpha) {
        writeln!(
            csv,
            "{},{},{},{},{},{:.10e}",
            row.n, row.rn, row.fe, row.rn_bound, row.fe_bound, row.model_error
        )
        .expect("write to string");
    }
    emit(out, &csv)
}

#[allow(clippy::too_many_arguments)]
pub fn seminorm(
    problem: &str,
    dim: usize,
    depth_max: u32,
    order: u32,
    field_params: (u32, u32, u32),
    inner: u32,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let named = problems::by_name(problem, dim)?;
    let horizon = named.problem.horizon();
    let params = HeatParams::new(field_params.0, field_params.1, field_params.2)?;
    let problem_for_field = named.problem.clone();
    let field = move |s: f64, x: &[f64], key: &StreamKey| {
        mlpicard::mlp::mlp_evaluate(&problem_for_field, &params, s, x, key)
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    };

    let probes: Vec<Probe> = [0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|frac| Probe {
            s: frac * horizon,
            u: frac * horizon / 2.0,
            z: vec![0.0; dim],
        })
        .collect();
    let spec = SeminormSpec {
        depth: 0,
        order,
        horizon,
        probes: probes.clone(),
        inner_samples: inner,
    };
    let key = StreamKey::root(seed);
    let reports = probe_reports(&field, &spec, &key)?;

    let mut csv = String::from("probe,depth,estimate,band\n");
    for depth in 0..=depth_max {
        let measure = nested_measure(depth, order, horizon)?;
        for (probe, report) in probes.iter().zip(&reports) {
            let covered: f64 = measure
                .atoms()
                .iter()
                .filter(|&&(t, _)| t <= probe.s)
                .map(|&(_, mass)| mass)
                .sum();
            writeln!(
                csv,
                "s={:.4};u={:.4};z=zero,{depth},{:.10e},{:.10e}",
                probe.s,
                probe.u,
                covered * report.rms,
                covered * report.band
            )
            .expect("write to string");
        }
    }
    emit(out, &csv)
}

pub fn problems_list(dim: usize) -> Result<(), CliError> {
    let mut text = String::new();
    for named in problems::registry(dim) {
        writeln!(
            text,
            "{:<20} d={:<4} L={:<6} closed_form={:<5} {}",
            named.name,
            named.problem.dim(),
            named.problem.lipschitz(),
            named.solution.is_some(),
            named.note
        )
        .expect("write to string");
    }
    emit(None, &text)
}
