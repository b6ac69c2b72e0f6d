use crate::error::{Error, Result};
use crate::fock::FockDim;
use crate::scalar::Real;

/// Physical constants of the damped Jaynes–Cummings model and the Fock
/// cutoff.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ModelParams<T> {
    /// Atomic and cavity angular frequency `ω₀`.
    pub omega0: T,
    /// Atom–field coupling `Ω`.
    pub coupling: T,
    /// Cavity damping rate `μ`.
    pub mu: T,
    /// Thermal pumping rate `ν`.
    pub nu: T,
    pub dim: FockDim,
}

impl<T: Real> ModelParams<T> {
    pub fn new(omega0: T, coupling: T, mu: T, nu: T, dim: FockDim) -> Result<Self> {
        let p = Self {
            omega0,
            coupling,
            mu,
            nu,
            dim,
        };
        p.validate()?;
        Ok(p)
    }

    /// Enforces `μ > ν ≥ 0`, `ω₀ ≥ 0`, `Ω ≥ 0` and finiteness.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega0", self.omega0),
            ("Omega", self.coupling),
            ("mu", self.mu),
            ("nu", self.nu),
        ] {
            if !v.is_finite() {
                return Err(Error::Param(format!("{name} must be finite, got {v}")));
            }
        }
        if self.nu < T::zero() {
            return Err(Error::Param(format!("nu must be non-negative, got {}", self.nu)));
        }
        if self.mu <= self.nu {
            return Err(Error::Param(format!(
                "mu must exceed nu strictly, got mu = {} and nu = {}",
                self.mu, self.nu
            )));
        }
        if self.omega0 < T::zero() {
            return Err(Error::Param(format!(
                "omega0 must be non-negative, got {}",
                self.omega0
            )));
        }
        if self.coupling < T::zero() {
            return Err(Error::Param(format!(
                "Omega must be non-negative, got {}",
                self.coupling
            )));
        }
        Ok(())
    }

    pub fn with_dim(self, dim: FockDim) -> Self {
        Self { dim, ..self }
    }

    pub fn with_coupling(self, coupling: T) -> Self {
        Self { coupling, ..self }
    }

    /// Net decay rate `μ − ν`.
    pub fn net_rate(&self) -> T {
        self.mu - self.nu
    }

    /// `max(Ω, μ, ω₀)`, the fastest rate entering a single propagation step.
    pub fn max_rate(&self) -> T {
        self.coupling.max(self.mu).max(self.omega0)
    }
}
