//! Truncated Fock space: ladder operators, coherent states and functions of
//! the number operator.
//!
//! Every operator here is the compression of the infinite-dimensional
//! operator onto the levels `0..dim`. In particular `a·a†` computed from the
//! truncated matrices differs from `N + 1` at the top level; code that needs
//! `a a†` uses `N + 1` explicitly.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{re, Cx, Real};

/// Number of retained Fock levels (indices `0..dim`).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockDim(usize);

impl FockDim {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Param(format!("Fock dimension must be at least 2, got {dim}")));
        }
        Ok(Self(dim))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Dimension of a single vectorized block, `dim²`.
    pub fn block_len(self) -> usize {
        self.0 * self.0
    }
}

impl std::fmt::Display for FockDim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Dense operator on the truncated Fock space.
pub type TruncatedOperator<T> = CMatrix<T>;

/// Tail weight above which [`coherent_state`] refuses the cutoff.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;
/// Number of top levels watched for leakage.
pub const DEFAULT_GUARD_LEVELS: usize = 3;
/// Occupation of the guard levels above which a warning is emitted.
pub const GUARD_OCCUPATION_LIMIT: f64 = 1e-8;

/// `a`: entry `(n-1, n)` is `√n`.
pub fn annihilation<T: Real>(d: FockDim) -> TruncatedOperator<T> {
    let n = d.get();
    let mut a = CMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = re(T::from_usize_lossy(k).sqrt());
    }
    a
}

/// `a†`, the exact conjugate transpose of [`annihilation`].
pub fn creation<T: Real>(d: FockDim) -> TruncatedOperator<T> {
    annihilation(d).adjoint()
}

/// `N = diag(0, 1, ..., dim-1)`
pub fn number<T: Real>(d: FockDim) -> TruncatedOperator<T> {
    let diag: Vec<T> = (0..d.get()).map(T::from_usize_lossy).collect();
    CMatrix::from_real_diagonal(&diag)
}

/// `N + 1`, the untruncated value of `a a†`.
pub fn number_plus_one<T: Real>(d: FockDim) -> TruncatedOperator<T> {
    let diag: Vec<T> = (1..=d.get()).map(T::from_usize_lossy).collect();
    CMatrix::from_real_diagonal(&diag)
}

pub fn identity<T: Real>(d: FockDim) -> TruncatedOperator<T> {
    CMatrix::identity(d.get())
}

/// Which argument a function of the number operator is evaluated at.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum LevelShift {
    /// `f(N)`
    Zero,
    /// `f(N + 1)`, i.e. `f(a a†)`
    One,
}

impl LevelShift {
    fn offset(self) -> usize {
        match self {
            LevelShift::Zero => 0,
            LevelShift::One => 1,
        }
    }
}

/// Diagonal operator with entries `f(n + shift)`.
pub fn func_of_number<T: Real>(f: impl Fn(T) -> T, d: FockDim, shift: LevelShift) -> Result<TruncatedOperator<T>> {
    let diag: Vec<T> = (0..d.get())
        .map(|n| f(T::from_usize_lossy(n + shift.offset())))
        .collect();
    if let Some(bad) = diag.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!(
            "function of the number operator is not finite at level {}",
            bad + shift.offset()
        )));
    }
    Ok(CMatrix::from_real_diagonal(&diag))
}

/// `sin(x√n)/√n`, with the `n = 0` value given by its limit `x`.
pub fn sin_sqrt_ratio<T: Real>(x: T, n: T) -> T {
    if n.is_zero() {
        x
    } else {
        let r = n.sqrt();
        (x * r).sin() / r
    }
}

/// State vector on the truncated Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector<T> {
    amplitudes: Vec<Cx<T>>,
}

impl<T: Real> FockVector<T> {
    pub fn new(amplitudes: Vec<Cx<T>>) -> Result<Self> {
        FockDim::new(amplitudes.len())?;
        Ok(Self { amplitudes })
    }

    /// Number state `|n⟩`.
    pub fn basis(n: usize, d: FockDim) -> Result<Self> {
        if n >= d.get() {
            return Err(Error::Truncation(format!("level {n} is outside cutoff {d}")));
        }
        let mut amplitudes = vec![Cx::zero(); d.get()];
        amplitudes[n] = re(T::one());
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> FockDim {
        FockDim(self.amplitudes.len())
    }

    pub fn amplitudes(&self) -> &[Cx<T>] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `|ψ⟩⟨ψ|`
    pub fn projector(&self) -> TruncatedOperator<T> {
        let n = self.amplitudes.len();
        CMatrix::from_fn(n, n, |i, j| self.amplitudes[i] * self.amplitudes[j].conj())
    }

    /// `⟨ψ|op|ψ⟩`
    pub fn expectation(&self, op: &TruncatedOperator<T>) -> Cx<T> {
        let v = op.matvec(&self.amplitudes);
        self.amplitudes
            .iter()
            .zip(&v)
            .fold(Cx::zero(), |acc, (a, b)| acc + a.conj() * b)
    }
}

/// Poisson tail `Σ_{n ≥ d} e^{-λ} λⁿ / n!`, summed directly so that tiny
/// tails are not lost to cancellation.
pub fn poisson_tail(lambda: f64, d: usize) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    let ln_fact: f64 = (1..=d).map(|k| (k as f64).ln()).sum();
    let mut term = (-lambda + d as f64 * lambda.ln() - ln_fact).exp();
    let mut sum = 0.0;
    let mut n = d;
    loop {
        sum += term;
        n += 1;
        term *= lambda / n as f64;
        if n as f64 > lambda && (term <= sum * 1e-18 || term < 1e-300) {
            break;
        }
    }
    sum
}

/// Coherent state `|α⟩` truncated to `d` levels with the default tail
/// tolerance.
pub fn coherent_state<T: Real>(alpha: Cx<T>, d: FockDim) -> Result<FockVector<T>> {
    coherent_state_with_tolerance(alpha, d, DEFAULT_TAIL_TOLERANCE)
}

/// Coherent state with amplitudes `e^{-|α|²/2} αⁿ/√n!`, renormalized after
/// truncation. Fails when the discarded Poisson weight exceeds `tolerance`.
pub fn coherent_state_with_tolerance<T: Real>(alpha: Cx<T>, d: FockDim, tolerance: f64) -> Result<FockVector<T>> {
    let mean = alpha.norm_sqr().as_f64();
    let tail = poisson_tail(mean, d.get());
    if tail >= tolerance {
        return Err(Error::Truncation(format!(
            "coherent state with |alpha|^2 = {mean} loses weight {tail:e} above cutoff {d} \
             (tolerance {tolerance:e})"
        )));
    }
    let mut amplitudes = Vec::with_capacity(d.get());
    let mut c = re((-alpha.norm_sqr() / T::lit(2.0)).exp());
    amplitudes.push(c);
    for n in 1..d.get() {
        c = c * alpha / T::from_usize_lossy(n).sqrt();
        amplitudes.push(c);
    }
    let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    for z in &mut amplitudes {
        *z /= norm;
    }
    Ok(FockVector { amplitudes })
}

/// Total population of the top `guard` levels of a density-like operator.
pub fn guard_occupation<T: Real>(op: &TruncatedOperator<T>, guard: usize) -> T {
    let n = op.nrows();
    (n.saturating_sub(guard)..n).map(|k| op[(k, k)].re).sum()
}

/// Diagonal operator `diag(z_n)` built from a complex function of the level.
pub(crate) fn complex_func_of_number<T: Real>(d: FockDim, f: impl Fn(usize) -> Cx<T>) -> TruncatedOperator<T> {
    let diag: Vec<Cx<T>> = (0..d.get()).map(f).collect();
    CMatrix::from_diagonal(&diag)
}
