//! Dense complex linear algebra.

pub mod expm;
pub mod matrix;
pub mod spectrum;

pub use expm::{connected_components, expm, expm_componentwise, solve, ComponentwiseExp, SplitGenerator};
pub use matrix::{max_abs_diff, CMatrix};
pub use spectrum::{hermitian_eigenvalues, min_hermitian_eigenvalue, trace_norm};
