//! Damped Jaynes–Cummings dynamics on a truncated Fock space.
//!
//! A two-level atom coupled to a cavity mode that is damped at rate `μ` and
//! pumped at rate `ν` evolves under `dρ/dt = (X + Y)ρ`, where `X` collects
//! the atom-diagonal, dissipative part and `Y` the coherent coupling. This
//! crate provides the exact closed-form flow of `X`, the split propagators
//! `e^{tY}e^{tX}` and `e^{t²/2[X,Y]}e^{tY}e^{tX}`, and two reference
//! integrators for the full equation.
//!
//! Everything is generic over the real scalar ([`Real`], implemented for
//! `f32` and `f64`); the aliases below fix it to `f64`.

pub mod analytic;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod oracle;
pub mod params;
pub mod scalar;
pub mod superop;
pub mod zassenhaus;

pub use analytic::{
    classical_trajectory, coherent_solution, diagonal_block_propagator, efg, tau_series, vacuum_solution, BlockPhase,
    ClassicalTrajectory, Efg,
};
pub use error::{Error, Result};
pub use fock::{FockDim, FockVector, TruncatedOperator};
pub use linalg::CMatrix;
pub use oracle::{
    diagnostics, master_rhs, oracle_propagate, oracle_series, trace_distance, Diagnostics, OracleConfig, OracleMethod,
};
pub use params::ModelParams;
pub use scalar::{Cx, Real};
pub use superop::{BlockDensity, SuperOperator, VectorizedState};
pub use zassenhaus::{
    commutator_blocks, example_initial_state, example_solution, exp_commutator, exp_x, exp_y, propagate,
    CommutatorBlocks, PropagatorOrder, StepPropagator,
};

pub type Complex64 = Cx<f64>;
pub type Matrix64 = CMatrix<f64>;
pub type Params64 = ModelParams<f64>;
pub type BlockDensity64 = BlockDensity<f64>;
pub type FockVector64 = FockVector<f64>;
pub type Efg64 = Efg<f64>;
pub type StepPropagator64 = StepPropagator<f64>;
pub type ClassicalTrajectory64 = ClassicalTrajectory<f64>;

pub type Matrix32 = CMatrix<f32>;
pub type Params32 = ModelParams<f32>;
pub type BlockDensity32 = BlockDensity<f32>;
