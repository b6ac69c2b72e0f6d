//! Closed-form evolution under the dissipative, atom-diagonal part of the
//! generator.
//!
//! With `x = (μ−ν)t/2` the flow `e^{t(−iω₀K₀+L)}` disentangles into
//! `e^{x} e^{G K₊} e^{−iω₀t K₀ − 2 log F K₃} e^{E K₋}`.

use crate::error::{Error, Result};
use crate::fock::{self, FockDim, TruncatedOperator};
use crate::linalg::{expm, CMatrix};
use crate::params::ModelParams;
use crate::scalar::{cx, phase, re, Cx, Real};
use crate::superop::SuperOperator;

pub(crate) fn check_time<T: Real>(t: T) -> Result<()> {
    if !t.is_finite() || t < T::zero() {
        return Err(Error::Domain(format!("time must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// The three scalar functions of the disentangled flow at one time.
///
/// `F` is kept in log space as well, since it grows like `e^{(μ−ν)t/2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Efg<T> {
    pub t: T,
    pub e: T,
    pub f: T,
    pub g: T,
    pub log_f: T,
    /// `1 − G`, evaluated without cancellation.
    pub one_minus_g: T,
    /// `x = (μ−ν)t/2`
    pub x: T,
}

impl<T: Real> Efg<T> {
    /// `e^{x}/F`, which equals `1 − G`.
    pub fn prefactor(&self) -> T {
        (self.x - self.log_f).exp()
    }
}

/// Evaluates `E`, `F`, `G` through `tanh x`, which stays finite for all `t`.
pub fn efg<T: Real>(t: T, p: &ModelParams<T>) -> Result<Efg<T>> {
    check_time(t)?;
    p.validate()?;
    let two = T::lit(2.0);
    let rate = p.mu - p.nu;
    let x = rate * t / two;
    let th = x.tanh();
    let r = (p.mu + p.nu) / rate;
    let denom = T::one() + r * th;
    let e = two * p.mu / rate * th / denom;
    let g = two * p.nu / rate * th / denom;
    // log cosh x = x + log(1 + e^{-2x}) − log 2
    let log_cosh = x + (-two * x).exp().ln_1p() - T::LN_2();
    let log_f = log_cosh + (r * th).ln_1p();
    Ok(Efg {
        t,
        e,
        f: log_f.exp(),
        g,
        log_f,
        one_minus_g: (T::one() + th) / denom,
        x,
    })
}

/// Phase `φ` multiplying one diagonal block of `e^{tX}` by `e^{iφt}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockPhase {
    Zero,
    /// `φ = −ω₀`
    Minus,
    /// `φ = +ω₀`
    Plus,
}

impl BlockPhase {
    pub fn factor<T: Real>(self, t: T, omega0: T) -> Cx<T> {
        match self {
            BlockPhase::Zero => re(T::one()),
            BlockPhase::Minus => phase(-omega0 * t),
            BlockPhase::Plus => phase(omega0 * t),
        }
    }
}

/// `e^{iφt}·e^{t(−iω₀K₀+L)}` on one vectorized block, assembled from the
/// three disentangled factors.
pub fn diagonal_block_propagator<T: Real>(t: T, p: &ModelParams<T>, ph: BlockPhase) -> Result<SuperOperator<T>> {
    let f = efg(t, p)?;
    let d = p.dim;
    let raise = ladder_exponential(d, f.g, true);
    let lower = ladder_exponential(d, f.e, false);
    let n = d.get();
    let wt = p.omega0 * t;
    let middle: Vec<Cx<T>> = (0..n * n)
        .map(|k| {
            let (m, l) = (k / n, k % n);
            let mag = (f.x - f.log_f * T::from_usize_lossy(m + l + 1)).exp();
            let diff = T::from_usize_lossy(m) - T::from_usize_lossy(l);
            phase(-wt * diff).scale(mag)
        })
        .collect();
    // scale the columns of the raising factor by the diagonal middle factor
    let mut left = raise;
    for row in 0..n * n {
        for (z, w) in left.as_mut_slice()[row * n * n..(row + 1) * n * n]
            .iter_mut()
            .zip(&middle)
        {
            *z *= w;
        }
    }
    let out = left.matmul(&lower);
    let c = ph.factor(t, p.omega0);
    Ok(if c == re(T::one()) { out } else { out.scale(c) })
}

/// `e^{s K₊}` (when `raising`) or `e^{s K₋}` as a finite sum.
///
/// The `k`-th power of `K₊` maps `(m, n)` to `(m+k, n+k)` with weight
/// `√((m+1)⋯(m+k)·(n+1)⋯(n+k))`.
fn ladder_exponential<T: Real>(d: FockDim, s: T, raising: bool) -> SuperOperator<T> {
    let n = d.get();
    let mut out = CMatrix::identity(n * n);
    if s.is_zero() {
        return out;
    }
    for m in 0..n {
        for l in 0..n {
            let mut c = T::one();
            for k in 1..n - m.max(l) {
                c = c * s * (T::from_usize_lossy((m + k) * (l + k))).sqrt() / T::from_usize_lossy(k);
                let lo = m * n + l;
                let hi = (m + k) * n + (l + k);
                if raising {
                    out[(hi, lo)] = re(c);
                } else {
                    out[(lo, hi)] = re(c);
                }
            }
        }
    }
    out
}

/// The same flow in operator form,
/// `(e^{x}/F) Σₙ (Gⁿ/n!) a†ⁿ {e^{(−iω₀t−log F)N} [Σₘ (Eᵐ/m!) aᵐ τ₀ a†ᵐ] e^{(iω₀t−log F)N}} aⁿ`.
///
/// `max_n` and `max_m` are the highest orders kept; orders `≥ d` vanish and
/// are skipped.
pub fn tau_series<T: Real>(
    tau0: &TruncatedOperator<T>,
    t: T,
    p: &ModelParams<T>,
    max_n: usize,
    max_m: usize,
) -> Result<TruncatedOperator<T>> {
    let d = p.dim;
    if tau0.shape() != (d.get(), d.get()) {
        return Err(Error::Shape(format!(
            "tau_series expects a {0}x{0} operator, got {1:?}",
            d,
            tau0.shape()
        )));
    }
    let f = efg(t, p)?;
    let a = fock::annihilation::<T>(d);
    let ad = fock::creation::<T>(d);
    let top = d.get() - 1;

    let mut inner = tau0.clone();
    let mut term = tau0.clone();
    for m in 1..=max_m.min(top) {
        term = a.matmul(&term).matmul(&ad).scale_real(f.e / T::from_usize_lossy(m));
        inner += &term;
    }

    let wt = p.omega0 * t;
    let left = fock::complex_func_of_number(d, |k| {
        let k = T::from_usize_lossy(k);
        phase(-wt * k).scale((-f.log_f * k).exp())
    });
    let right = left.conj();
    let middle = left.matmul(&inner).matmul(&right);

    let mut outer = middle.clone();
    let mut term = middle;
    for n in 1..=max_n.min(top) {
        term = ad.matmul(&term).matmul(&a).scale_real(f.g / T::from_usize_lossy(n));
        outer += &term;
    }
    Ok(outer.scale_real(f.prefactor()))
}

/// Evolution of the vacuum: `diag((e^{x}/F) Gⁿ)`, the projector onto `|0⟩`
/// at `t = 0`.
pub fn vacuum_solution<T: Real>(t: T, p: &ModelParams<T>) -> Result<TruncatedOperator<T>> {
    let f = efg(t, p)?;
    let pre = f.prefactor();
    let diag: Vec<T> = (0..p.dim.get()).map(|n| pre * f.g.powi(n as i32)).collect();
    Ok(CMatrix::from_real_diagonal(&diag))
}

/// Evolution of `|α⟩⟨α|`:
/// `(1−G) e^{|α|² e^{−(μ−ν)t} log G} exp(−log G {β a† + β̄ a − N})` with
/// `β = α e^{−((μ−ν)/2+iω₀)t}`.
///
/// The formula needs `log G`, so `t = 0` and `ν = 0` are rejected.
pub fn coherent_solution<T: Real>(alpha: Cx<T>, t: T, p: &ModelParams<T>) -> Result<TruncatedOperator<T>> {
    let f = efg(t, p)?;
    if p.nu.is_zero() {
        return Err(Error::Domain(
            "coherent closed form needs nu > 0 (log G diverges)".into(),
        ));
    }
    if t.is_zero() || f.g <= T::zero() {
        return Err(Error::Domain(format!(
            "coherent closed form needs G(t) > 0, got t = {t}"
        )));
    }
    let d = p.dim;
    fock::coherent_state(alpha, d)?;
    let log_g = f.g.ln();
    let rate = p.mu - p.nu;
    let beta = alpha * (cx(-rate / T::lit(2.0), -p.omega0) * t).exp();
    let a = fock::annihilation::<T>(d);
    let ad = fock::creation::<T>(d);
    let mut gen = ad.scale(beta);
    gen += &a.scale(beta.conj());
    gen -= &fock::number::<T>(d);
    let body = expm(&gen.scale_real(-log_g))?;
    let scalar = f.one_minus_g * (alpha.norm_sqr() * (-rate * t).exp() * log_g).exp();
    let out = body.scale_real(scalar);
    if !out.is_finite() {
        return Err(Error::Numerical("coherent closed form overflowed".into()));
    }
    Ok(out)
}

/// Classical damped oscillator `ẍ + γẋ + ω²x = 0` in the underdamped regime.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalTrajectory<T> {
    pub gamma: T,
    pub omega: T,
    pub alpha: Cx<T>,
    pub x0: T,
}

impl<T: Real> ClassicalTrajectory<T> {
    pub fn new(gamma: T, omega: T, alpha: Cx<T>, x0: T) -> Result<Self> {
        if !(gamma.is_finite() && omega.is_finite() && alpha.re.is_finite() && alpha.im.is_finite() && x0.is_finite()) {
            return Err(Error::Param("classical trajectory parameters must be finite".into()));
        }
        if gamma <= T::zero() {
            return Err(Error::Param(format!("gamma must be positive, got {gamma}")));
        }
        if omega <= gamma / T::lit(2.0) {
            return Err(Error::Param(format!(
                "omega must exceed gamma/2 (underdamped), got omega = {omega}, gamma = {gamma}"
            )));
        }
        Ok(Self {
            gamma,
            omega,
            alpha,
            x0,
        })
    }

    /// `√(ω² − γ²/4)`
    pub fn damped_frequency(&self) -> T {
        let h = self.gamma / T::lit(2.0);
        (self.omega * self.omega - h * h).sqrt()
    }

    /// `{α e^{−(γ/2+iω')t} + c.c.}·x(0)`
    pub fn position(&self, t: T) -> T {
        self.with_frequency(self.damped_frequency(), t)
    }

    /// The same with `ω'` replaced by `ω`, valid when `γ/2ω` is small.
    pub fn position_weak_damping(&self, t: T) -> T {
        self.with_frequency(self.omega, t)
    }

    fn with_frequency(&self, w: T, t: T) -> T {
        let z = self.alpha * (cx(-self.gamma / T::lit(2.0), -w) * t).exp();
        T::lit(2.0) * z.re * self.x0
    }
}

/// Convenience wrapper around [`ClassicalTrajectory::position`].
pub fn classical_trajectory<T: Real>(tr: &ClassicalTrajectory<T>, t: T) -> Result<T> {
    let checked = ClassicalTrajectory::new(tr.gamma, tr.omega, tr.alpha, tr.x0)?;
    Ok(checked.position(t))
}
