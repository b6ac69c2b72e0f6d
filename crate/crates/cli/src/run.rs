//! Time-series generation for every selected method.

use lindblad_jc::fock;
use lindblad_jc::zassenhaus::propagate_with_bound;
use lindblad_jc::{
    diagnostics, example_solution, oracle_series, trace_distance, BlockDensity64, OracleConfig, OracleMethod, Params64,
    PropagatorOrder, StepPropagator,
};

use crate::config::{Method, RunConfig, SplitStep};
use crate::error::{CliError, CliResult};
use crate::output;

/// Split steps are kept below this multiple of `1/max(Ω, μ, ω₀)` unless the
/// configuration says otherwise.
pub const AUTO_STEP_SCALE: f64 = 0.1;

/// Observables of one method at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableRow {
    pub t: f64,
    pub method: Method,
    pub trace: f64,
    pub p0: f64,
    pub p1: f64,
    pub mean_n: f64,
    pub re_a: f64,
    pub im_a: f64,
    /// Trace distance to the dense-exponential oracle at the same time.
    pub trace_distance: f64,
    pub min_eig: f64,
}

impl ObservableRow {
    pub fn values(&self) -> [f64; 8] {
        [
            self.trace,
            self.p0,
            self.p1,
            self.mean_n,
            self.re_a,
            self.im_a,
            self.trace_distance,
            self.min_eig,
        ]
    }
}

pub const OBSERVABLE_COLUMNS: [&str; 8] = [
    "trace",
    "p0",
    "p1",
    "mean_n",
    "re_a",
    "im_a",
    "trace_distance",
    "min_eig",
];

#[derive(Debug)]
pub struct RunOutput {
    pub rows: Vec<ObservableRow>,
}

pub fn time_grid(cfg: &RunConfig) -> Vec<f64> {
    let last = (cfg.n_points - 1) as f64;
    (0..cfg.n_points).map(|k| cfg.t_max * k as f64 / last).collect()
}

/// Evaluates every method on the time grid and writes the output file.
pub fn run(cfg: &RunConfig) -> CliResult<RunOutput> {
    cfg.validate()?;
    let rows = compute_rows(cfg)?;
    output::write_run(cfg, &rows)?;
    Ok(RunOutput { rows })
}

/// [`run`] without writing anything.
pub fn compute_rows(cfg: &RunConfig) -> CliResult<Vec<ObservableRow>> {
    let p = cfg.model_params()?;
    let rho0 = cfg.initial_state()?;
    let times = time_grid(cfg);
    let reference = oracle_series(&rho0, &times, &p, &OracleConfig::dense())?;
    let mut per_method = Vec::with_capacity(cfg.methods.len());
    for &m in &cfg.methods {
        log::info!("evaluating {m}");
        let states = match m {
            Method::OracleExpm => reference.clone(),
            Method::OracleRk4 => {
                let oc = OracleConfig::new(OracleMethod::Rk4Fixed, cfg.rk4_dt, OracleConfig::dense().tolerance)?;
                oracle_series(&rho0, &times, &p, &oc)?
            }
            Method::Split2 => split_series(&rho0, &times, &p, PropagatorOrder::Split2, cfg.split_step)?,
            Method::Split3 => split_series(&rho0, &times, &p, PropagatorOrder::Split3, cfg.split_step)?,
            Method::DiagonalOnly => split_series(&rho0, &times, &p, PropagatorOrder::DiagonalOnly, cfg.split_step)?,
            Method::ClosedFormExample => {
                let alpha = cfg
                    .alpha()
                    .ok_or_else(|| CliError::Config("closed-form-example needs a coherent amplitude".into()))?;
                times
                    .iter()
                    .map(|&t| example_solution(alpha, t, &p))
                    .collect::<Result<Vec<_>, _>>()?
            }
        };
        per_method.push((m, states));
    }
    let mut rows = Vec::with_capacity(times.len() * per_method.len());
    for (k, &t) in times.iter().enumerate() {
        for (m, states) in &per_method {
            rows.push(observe(t, *m, &states[k], &reference[k])?);
        }
    }
    Ok(rows)
}

/// States of a split method on a uniform grid starting at `t = 0`.
pub fn split_series(
    rho0: &BlockDensity64,
    times: &[f64],
    p: &Params64,
    order: PropagatorOrder,
    step: SplitStep,
) -> CliResult<Vec<BlockDensity64>> {
    if let SplitStep::OneShot = step {
        return times
            .iter()
            .map(|&t| Ok(propagate_with_bound(rho0, t, p, order, None)?))
            .collect();
    }
    let h_max = match step {
        SplitStep::Fixed(h) => h,
        _ => AUTO_STEP_SCALE / p.max_rate(),
    };
    let spacing = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
    let substeps = ((spacing / h_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let stepper = StepPropagator::new(spacing / substeps as f64, p, order)?;
    let mut out = Vec::with_capacity(times.len());
    let mut v = rho0.vectorize();
    out.push(rho0.clone());
    for _ in 1..times.len() {
        for _ in 0..substeps {
            v = stepper.apply(&v)?;
        }
        out.push(BlockDensity64::from_vectorized(&v));
    }
    Ok(out)
}

pub fn observe(t: f64, method: Method, rho: &BlockDensity64, reference: &BlockDensity64) -> CliResult<ObservableRow> {
    let d = rho.dim();
    let a = fock::annihilation::<f64>(d);
    let n = fock::number::<f64>(d);
    let mean_a = rho.field_expectation(&a);
    let diag = diagnostics(rho);
    Ok(ObservableRow {
        t,
        method,
        trace: rho.trace().re,
        p0: rho.block(0, 0).trace().re,
        p1: rho.block(1, 1).trace().re,
        mean_n: rho.field_expectation(&n).re,
        re_a: mean_a.re,
        im_a: mean_a.im,
        trace_distance: trace_distance(rho, reference)?,
        min_eig: diag.min_eigenvalue,
    })
}
