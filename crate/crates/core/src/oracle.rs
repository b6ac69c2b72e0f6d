//! Reference propagation of the full master equation and physicality
//! checks.
//!
//! Two routes are kept deliberately separate: fixed-step RK4 on the
//! componentwise right-hand side [`master_rhs`], which never touches the
//! superoperator builders, and the exact exponential of the assembled
//! generator `X + Y`.

use rayon::prelude::*;

use crate::analytic::check_time;
use crate::error::{Error, Result};
use crate::fock::{self, TruncatedOperator};
use crate::linalg::{min_hermitian_eigenvalue, trace_norm, SplitGenerator};
use crate::params::ModelParams;
use crate::scalar::{i_unit, re, Real};
use crate::superop::{build_x, build_y, BlockDensity, VectorizedState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OracleMethod {
    Rk4Fixed,
    DenseExpm,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConfig {
    pub method: OracleMethod,
    /// RK4 step; ignored by [`OracleMethod::DenseExpm`].
    pub dt: f64,
    /// Largest tolerated drift in trace, hermiticity and positivity.
    pub tolerance: f64,
}

impl OracleConfig {
    pub fn new(method: OracleMethod, dt: f64, tolerance: f64) -> Result<Self> {
        let cfg = Self { method, dt, tolerance };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn dense() -> Self {
        Self {
            method: OracleMethod::DenseExpm,
            dt: 1e-3,
            tolerance: 1e-8,
        }
    }

    pub fn rk4(dt: f64) -> Result<Self> {
        Self::new(OracleMethod::Rk4Fixed, dt, 1e-8)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Param(format!("oracle dt must be positive, got {}", self.dt)));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::Param(format!(
                "oracle tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// `−i[H, ρ] + μ{aρa† − ½(a†aρ + ρa†a)} + ν{a†ρa − ½(aa†ρ + ρaa†)}`
/// evaluated block by block, with `aa† = N + 1`.
pub fn master_rhs<T: Real>(rho: &BlockDensity<T>, p: &ModelParams<T>) -> Result<BlockDensity<T>> {
    p.validate()?;
    if rho.dim() != p.dim {
        return Err(Error::Shape(format!(
            "state cutoff {} does not match parameter cutoff {}",
            rho.dim(),
            p.dim
        )));
    }
    let d = p.dim;
    let a = fock::annihilation::<T>(d);
    let ad = fock::creation::<T>(d);
    let n = fock::number::<T>(d);
    let n1 = fock::number_plus_one::<T>(d);
    let half = T::lit(0.5) * p.omega0;
    let h_diag = [
        fock::func_of_number(|k| p.omega0 * k + half, d, fock::LevelShift::Zero)?,
        fock::func_of_number(|k| p.omega0 * k - half, d, fock::LevelShift::Zero)?,
    ];
    let h_off = [a.scale_real(p.coupling), ad.scale_real(p.coupling)];
    // H_ik for atom indices i, k
    let h = |i: usize, k: usize| -> &TruncatedOperator<T> {
        if i == k {
            &h_diag[i]
        } else {
            &h_off[i]
        }
    };
    let mi = -i_unit::<T>();
    let half_r = T::lit(0.5);
    let rhs = rho.map_blocks(|idx, r| {
        let (i, j) = (idx / 2, idx % 2);
        let mut comm = TruncatedOperator::zeros(d.get(), d.get());
        for k in 0..2 {
            comm += &h(i, k).matmul(rho.block(k, j));
            comm -= &rho.block(i, k).matmul(h(k, j));
        }
        let mut out = comm.scale(mi);
        let mut damp = a.matmul(r).matmul(&ad);
        damp -= &(&n.matmul(r) + &r.matmul(&n)).scale_real(half_r);
        let mut pump = ad.matmul(r).matmul(&a);
        pump -= &(&n1.matmul(r) + &r.matmul(&n1)).scale_real(half_r);
        out.axpy(re(p.mu), &damp);
        out.axpy(re(p.nu), &pump);
        out
    });
    Ok(rhs)
}

/// `ρ(t)` from `ρ(0)` by the configured method, followed by a physicality
/// check against the initial state.
pub fn oracle_propagate<T: Real>(
    rho0: &BlockDensity<T>,
    t: T,
    p: &ModelParams<T>,
    cfg: &OracleConfig,
) -> Result<BlockDensity<T>> {
    let mut out = oracle_series(rho0, &[t], p, cfg)?;
    Ok(out.pop().expect("one time point"))
}

/// `ρ(tₖ)` on an increasing grid of times.
pub fn oracle_series<T: Real>(
    rho0: &BlockDensity<T>,
    times: &[T],
    p: &ModelParams<T>,
    cfg: &OracleConfig,
) -> Result<Vec<BlockDensity<T>>> {
    cfg.validate()?;
    p.validate()?;
    if rho0.dim() != p.dim {
        return Err(Error::Shape(format!(
            "state cutoff {} does not match parameter cutoff {}",
            rho0.dim(),
            p.dim
        )));
    }
    for (k, &t) in times.iter().enumerate() {
        check_time(t)?;
        if k > 0 && t < times[k - 1] {
            return Err(Error::Domain("oracle time grid must be non-decreasing".into()));
        }
    }
    let states = match cfg.method {
        OracleMethod::DenseExpm => {
            let gen = full_generator(p)?;
            let v0 = rho0.vectorize();
            times
                .par_iter()
                .map(|&t| {
                    let e = gen.exp(t)?;
                    let v = VectorizedState::new(p.dim, e.apply(v0.as_slice()))?;
                    Ok(BlockDensity::from_vectorized(&v))
                })
                .collect::<Result<Vec<_>>>()?
        }
        OracleMethod::Rk4Fixed => {
            let mut out = Vec::with_capacity(times.len());
            let mut rho = rho0.clone();
            let mut now = T::zero();
            for &t in times {
                rho = rk4_integrate(&rho, t - now, p, cfg.dt)?;
                now = t;
                out.push(rho.clone());
            }
            out
        }
    };
    let start = diagnostics(rho0);
    for s in &states {
        check_physicality(&start, &diagnostics(s), cfg.tolerance)?;
    }
    Ok(states)
}

/// `X + Y` split into its decoupled blocks.
pub fn full_generator<T: Real>(p: &ModelParams<T>) -> Result<SplitGenerator<T>> {
    let mut g = build_x(p)?;
    g += &build_y(p)?;
    SplitGenerator::new(&g)
}

/// Classical RK4 over `span` with `⌈span/dt⌉` equal steps.
pub fn rk4_integrate<T: Real>(rho0: &BlockDensity<T>, span: T, p: &ModelParams<T>, dt: f64) -> Result<BlockDensity<T>> {
    check_time(span)?;
    if span.is_zero() {
        return Ok(rho0.clone());
    }
    let steps = ((span.as_f64() / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = span / T::from_usize_lossy(steps);
    let half = h / T::lit(2.0);
    let sixth = h / T::lit(6.0);
    let combine = |base: &BlockDensity<T>, k: &BlockDensity<T>, s: T| {
        base.map_blocks(|i, b| {
            let mut out = b.clone();
            out.axpy(re(s), &k.blocks()[i]);
            out
        })
    };
    let mut rho = rho0.clone();
    for _ in 0..steps {
        let k1 = master_rhs(&rho, p)?;
        let k2 = master_rhs(&combine(&rho, &k1, half), p)?;
        let k3 = master_rhs(&combine(&rho, &k2, half), p)?;
        let k4 = master_rhs(&combine(&rho, &k3, h), p)?;
        rho = rho.map_blocks(|i, b| {
            let mut out = b.clone();
            let two = re(T::lit(2.0));
            let mut acc = k1.blocks()[i].clone();
            acc.axpy(two, &k2.blocks()[i]);
            acc.axpy(two, &k3.blocks()[i]);
            acc += &k4.blocks()[i];
            out.axpy(re(sixth), &acc);
            out
        });
    }
    Ok(rho)
}

/// Physicality indicators of a block density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    /// `|tr ρ − 1|`
    pub trace_deviation: f64,
    /// `max |ρ − ρ†|`
    pub hermiticity_defect: f64,
    /// Smallest eigenvalue of the hermitian part of `ρ`.
    pub min_eigenvalue: f64,
    /// Population of the top [`fock::DEFAULT_GUARD_LEVELS`] Fock levels.
    pub guard_occupation: f64,
}

impl Diagnostics {
    /// Whether the guard levels hold more than [`fock::GUARD_OCCUPATION_LIMIT`].
    pub fn guard_flag(&self) -> bool {
        self.guard_occupation > fock::GUARD_OCCUPATION_LIMIT
    }
}

pub fn diagnostics<T: Real>(rho: &BlockDensity<T>) -> Diagnostics {
    let full = rho.to_full();
    let tr = rho.trace();
    let guard = fock::guard_occupation(rho.block(0, 0), fock::DEFAULT_GUARD_LEVELS)
        + fock::guard_occupation(rho.block(1, 1), fock::DEFAULT_GUARD_LEVELS);
    Diagnostics {
        trace_deviation: (tr - re(T::one())).norm().as_f64(),
        hermiticity_defect: full.hermiticity_defect().as_f64(),
        min_eigenvalue: min_hermitian_eigenvalue(&full),
        guard_occupation: guard.as_f64(),
    }
}

fn check_physicality(start: &Diagnostics, now: &Diagnostics, tol: f64) -> Result<()> {
    let hint = if now.guard_flag() {
        " (top Fock levels are occupied; raise the cutoff)"
    } else {
        ""
    };
    if (now.trace_deviation - start.trace_deviation).abs() > tol {
        return Err(Error::Step(format!(
            "trace drifted from deviation {:.3e} to {:.3e}{hint}",
            start.trace_deviation, now.trace_deviation
        )));
    }
    if now.hermiticity_defect > start.hermiticity_defect + tol {
        return Err(Error::Step(format!(
            "hermiticity defect grew to {:.3e}{hint}",
            now.hermiticity_defect
        )));
    }
    if start.min_eigenvalue >= -tol && now.min_eigenvalue < -tol {
        return Err(Error::Step(format!(
            "state lost positivity, min eigenvalue {:.3e}{hint}",
            now.min_eigenvalue
        )));
    }
    Ok(())
}

/// `½‖ρ − σ‖₁`
pub fn trace_distance<T: Real>(rho: &BlockDensity<T>, sigma: &BlockDensity<T>) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Shape(format!(
            "trace distance between cutoffs {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(0.5 * trace_norm(&(&rho.to_full() - &sigma.to_full())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::fock::FockDim;
    use crate::linalg::CMatrix;
    use crate::zassenhaus::example_initial_state;
    use num_complex::Complex;

    fn dim(n: usize) -> FockDim {
        FockDim::new(n).unwrap()
    }

    fn params(d: usize) -> ModelParams<f64> {
        ModelParams::new(1.0, 1.0, 0.2, 0.1, dim(d)).unwrap()
    }

    fn random_state(d: usize, seed: u64) -> BlockDensity<f64> {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let m = CMatrix::from_fn(2 * d, 2 * d, |_, _| Complex::new(next(), next()));
        BlockDensity::from_full(&m).unwrap()
    }

    #[test]
    fn rhs_matches_generator() {
        let p = params(6);
        let rho = random_state(6, 7);
        let rhs = master_rhs(&rho, &p).unwrap();
        let mut g = build_x(&p).unwrap();
        g += &build_y(&p).unwrap();
        let v = rho.vectorize().apply(&g).unwrap();
        let want = BlockDensity::from_vectorized(&v);
        assert!(rhs.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn rhs_of_mixed_state_pure_damping() {
        let p = ModelParams::new(0.0, 0.0, 0.5, 0.0, dim(2)).unwrap();
        let id = CMatrix::<f64>::identity(2).scale_real(0.25);
        let rho = BlockDensity::diagonal(id.clone(), id).unwrap();
        let rhs = master_rhs(&rho, &p).unwrap();
        assert!(rhs.trace().norm() < 1e-15);
        // each block: μ(|0⟩⟨0| − |1⟩⟨1|)/4
        assert!((rhs.block(0, 0)[(0, 0)].re - 0.125).abs() < 1e-15);
        assert!((rhs.block(1, 1)[(1, 1)].re + 0.125).abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_flow_keeps_purity() {
        // rates must satisfy mu > nu, so the dissipator is made negligible instead
        let p = ModelParams {
            omega0: 1.0,
            coupling: 0.8,
            mu: 1e-300,
            nu: 0.0,
            dim: dim(5),
        };
        let psi = fock::coherent_state_with_tolerance(Complex::new(0.3, 0.2), dim(5), 1.0)
            .unwrap()
            .projector();
        let rho = BlockDensity::diagonal(psi, CMatrix::zeros(5, 5)).unwrap();
        let rhs = master_rhs(&rho, &p).unwrap();
        let purity_rate: f64 = rho.to_full().matmul(&rhs.to_full()).trace().re * 2.0;
        assert!(purity_rate.abs() < 1e-14);
    }

    #[test]
    fn rk4_and_expm_agree() {
        let p = params(10);
        let rho0 = example_initial_state(Complex::new(0.5, 0.0), p.dim).unwrap();
        let a = oracle_propagate(&rho0, 0.5, &p, &OracleConfig::dense()).unwrap();
        let b = oracle_propagate(&rho0, 0.5, &p, &OracleConfig::rk4(1e-2).unwrap()).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-8);
        assert_eq!(oracle_propagate(&rho0, 0.0, &p, &OracleConfig::dense()).unwrap(), rho0);
    }

    #[test]
    fn zero_coupling_follows_vacuum_closed_form() {
        let p = params(20).with_coupling(0.0);
        let vac = fock::FockVector::basis(0, p.dim).unwrap().projector();
        let rho0 = BlockDensity::diagonal(vac, CMatrix::zeros(20, 20)).unwrap();
        let out = oracle_propagate(&rho0, 2.0, &p, &OracleConfig::dense()).unwrap();
        let want = analytic::vacuum_solution(2.0, &p).unwrap();
        assert!((out.block(0, 0) - &want).max_abs() < 1e-9);
    }

    #[test]
    fn diagnostics_of_simple_states() {
        let p = params(10);
        let thermal = analytic::vacuum_solution(3.0, &p).unwrap();
        let rho = BlockDensity::diagonal(thermal, CMatrix::zeros(10, 10)).unwrap();
        let d = diagnostics(&rho);
        assert!(d.trace_deviation < 1e-3 && d.hermiticity_defect == 0.0 && d.min_eigenvalue >= 0.0);
        let skew = random_state(3, 1);
        let full = skew.to_full();
        assert_eq!(
            diagnostics(&skew).hermiticity_defect,
            (&full - &full.adjoint()).max_abs()
        );
        let big = fock::coherent_state_with_tolerance(Complex::new(2.0, 0.0), dim(8), f64::INFINITY).unwrap();
        let rho = BlockDensity::diagonal(big.projector(), CMatrix::zeros(8, 8)).unwrap();
        assert!(diagnostics(&rho).guard_flag());
    }

    #[test]
    fn config_validation() {
        assert!(matches!(
            OracleConfig::new(OracleMethod::Rk4Fixed, 0.0, 1e-8),
            Err(Error::Param(_))
        ));
        assert!(matches!(
            OracleConfig::new(OracleMethod::DenseExpm, 1e-3, -1.0),
            Err(Error::Param(_))
        ));
    }

    #[test]
    fn trace_distance_basics() {
        let rho = example_initial_state(Complex::new(0.0, 0.0), dim(4)).unwrap();
        assert!(trace_distance(&rho, &rho).unwrap() < 1e-15);
        let other = BlockDensity::diagonal(
            CMatrix::zeros(4, 4),
            fock::FockVector::basis(3, dim(4)).unwrap().projector(),
        )
        .unwrap();
        assert!((trace_distance(&rho, &other).unwrap() - 1.0).abs() < 1e-12);
    }
}
