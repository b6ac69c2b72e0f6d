//! Vectorized block density operators and the superoperators acting on them.
//!
//! A single `d×d` block is flattened row-major, `X ↦ (x₀₀, x₀₁, …, x₁₀, …)`,
//! so that `vec(E·X·F) = (E ⊗ Fᵀ)·vec(X)`. A two-level block density
//! `ρ = [[ρ₀₀, ρ₀₁], [ρ₁₀, ρ₁₁]]` is stacked as
//! `(vec ρ₀₀; vec ρ₀₁; vec ρ₁₀; vec ρ₁₁)`, giving vectors of length `4d²`.

use crate::error::{Error, Result};
use crate::fock::{self, FockDim, TruncatedOperator};
use crate::linalg::CMatrix;
use crate::params::ModelParams;
use crate::scalar::{i_unit, re, Cx, Real};

/// Dense superoperator, either on one vectorized block (`d²×d²`) or on a
/// full block density (`4d²×4d²`).
pub type SuperOperator<T> = CMatrix<T>;

/// Blocks in stacking order: `(0,0), (0,1), (1,0), (1,1)`.
pub const BLOCK_ORDER: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

/// Position of entry `(m, n)` of block `block` in the stacked vector.
pub fn vec_index(d: FockDim, block: usize, m: usize, n: usize) -> usize {
    let d = d.get();
    (block * d + m) * d + n
}

/// Row-major flattening.
pub fn vectorize<T: Real>(x: &TruncatedOperator<T>) -> Vec<Cx<T>> {
    x.as_slice().to_vec()
}

/// Inverse of [`vectorize`]; the length must be a perfect square.
pub fn devectorize<T: Real>(v: &[Cx<T>]) -> Result<TruncatedOperator<T>> {
    let n = (v.len() as f64).sqrt().round() as usize;
    if n * n != v.len() || n == 0 {
        return Err(Error::Shape(format!(
            "cannot devectorize a vector of length {} (not a nonzero perfect square)",
            v.len()
        )));
    }
    Ok(CMatrix::from_row_major(n, n, v.to_vec()))
}

/// Stacked vectorization of a [`BlockDensity`].
#[derive(Clone, Debug, PartialEq)]
pub struct VectorizedState<T> {
    dim: FockDim,
    data: Vec<Cx<T>>,
}

impl<T: Real> VectorizedState<T> {
    pub fn new(dim: FockDim, data: Vec<Cx<T>>) -> Result<Self> {
        if data.len() != 4 * dim.block_len() {
            return Err(Error::Shape(format!(
                "vectorized state for cutoff {dim} needs length {}, got {}",
                4 * dim.block_len(),
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> FockDim {
        self.dim
    }

    pub fn as_slice(&self) -> &[Cx<T>] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Cx<T>> {
        self.data
    }

    /// Applies a `4d²×4d²` superoperator.
    pub fn apply(&self, op: &SuperOperator<T>) -> Result<Self> {
        if op.shape() != (self.data.len(), self.data.len()) {
            return Err(Error::Shape(format!(
                "superoperator {:?} does not act on states of length {}",
                op.shape(),
                self.data.len()
            )));
        }
        Ok(Self {
            dim: self.dim,
            data: op.matvec(&self.data),
        })
    }
}

/// Density operator of the atom–cavity system as a 2×2 array of Fock-space
/// blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDensity<T> {
    dim: FockDim,
    blocks: [TruncatedOperator<T>; 4],
}

impl<T: Real> BlockDensity<T> {
    pub fn new(
        rho00: TruncatedOperator<T>,
        rho01: TruncatedOperator<T>,
        rho10: TruncatedOperator<T>,
        rho11: TruncatedOperator<T>,
    ) -> Result<Self> {
        let dim = FockDim::new(rho00.nrows())?;
        let blocks = [rho00, rho01, rho10, rho11];
        for (b, (i, j)) in blocks.iter().zip(BLOCK_ORDER) {
            if b.shape() != (dim.get(), dim.get()) {
                return Err(Error::Shape(format!(
                    "block ({i},{j}) has shape {:?}, expected {}x{}",
                    b.shape(),
                    dim,
                    dim
                )));
            }
        }
        Ok(Self { dim, blocks })
    }

    pub fn zeros(dim: FockDim) -> Self {
        let z = CMatrix::zeros(dim.get(), dim.get());
        Self {
            dim,
            blocks: [z.clone(), z.clone(), z.clone(), z],
        }
    }

    /// Block-diagonal density `diag(ρ₀₀, ρ₁₁)`.
    pub fn diagonal(rho00: TruncatedOperator<T>, rho11: TruncatedOperator<T>) -> Result<Self> {
        let n = rho00.nrows();
        Self::new(rho00, CMatrix::zeros(n, n), CMatrix::zeros(n, n), rho11)
    }

    /// Splits a `2d×2d` matrix with atom index outermost.
    pub fn from_full(full: &CMatrix<T>) -> Result<Self> {
        if !full.is_square() || !full.nrows().is_multiple_of(2) {
            return Err(Error::Shape(format!(
                "cannot split a {:?} matrix into 2x2 blocks",
                full.shape()
            )));
        }
        let d = full.nrows() / 2;
        Self::new(
            full.block(0, 0, d, d),
            full.block(0, d, d, d),
            full.block(d, 0, d, d),
            full.block(d, d, d, d),
        )
    }

    pub fn to_full(&self) -> CMatrix<T> {
        let d = self.dim.get();
        let mut full = CMatrix::zeros(2 * d, 2 * d);
        for (b, (i, j)) in self.blocks.iter().zip(BLOCK_ORDER) {
            full.set_block(i * d, j * d, b);
        }
        full
    }

    pub fn dim(&self) -> FockDim {
        self.dim
    }

    /// Block `(i, j)` with `i, j ∈ {0, 1}`.
    pub fn block(&self, i: usize, j: usize) -> &TruncatedOperator<T> {
        &self.blocks[2 * i + j]
    }

    pub fn blocks(&self) -> &[TruncatedOperator<T>; 4] {
        &self.blocks
    }

    pub fn into_blocks(self) -> [TruncatedOperator<T>; 4] {
        self.blocks
    }

    pub fn map_blocks(&self, mut f: impl FnMut(usize, &TruncatedOperator<T>) -> TruncatedOperator<T>) -> Self {
        let blocks = [0, 1, 2, 3].map(|k| f(k, &self.blocks[k]));
        Self { dim: self.dim, blocks }
    }

    pub fn vectorize(&self) -> VectorizedState<T> {
        let mut data = Vec::with_capacity(4 * self.dim.block_len());
        for b in &self.blocks {
            data.extend_from_slice(b.as_slice());
        }
        VectorizedState { dim: self.dim, data }
    }

    pub fn from_vectorized(v: &VectorizedState<T>) -> Self {
        let len = v.dim.block_len();
        let d = v.dim.get();
        let blocks = [0, 1, 2, 3].map(|k| CMatrix::from_row_major(d, d, v.data[k * len..(k + 1) * len].to_vec()));
        Self { dim: v.dim, blocks }
    }

    /// `tr ρ₀₀ + tr ρ₁₁`
    pub fn trace(&self) -> Cx<T> {
        self.blocks[0].trace() + self.blocks[3].trace()
    }

    /// `max |ρ − ρ†|` over the full `2d×2d` matrix.
    pub fn hermiticity_defect(&self) -> T {
        self.to_full().hermiticity_defect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a - b).max_abs())
            .fold(T::zero(), T::max)
    }

    pub fn scale(&self, c: Cx<T>) -> Self {
        self.map_blocks(|_, b| b.scale(c))
    }

    /// `tr((1 ⊗ op) ρ)`
    pub fn field_expectation(&self, op: &TruncatedOperator<T>) -> Cx<T> {
        op.matmul(&self.blocks[0]).trace() + op.matmul(&self.blocks[3]).trace()
    }
}

/// `E ⊗ Fᵀ`, the superoperator of `X ↦ E·X·F` on one vectorized block.
pub fn sandwich_superop<T: Real>(e: &TruncatedOperator<T>, f: &TruncatedOperator<T>) -> Result<SuperOperator<T>> {
    if !e.is_square() || e.shape() != f.shape() {
        return Err(Error::Shape(format!(
            "sandwich_superop needs equal square shapes, got {:?} and {:?}",
            e.shape(),
            f.shape()
        )));
    }
    Ok(e.kron(&f.transpose()))
}

/// Superoperator of `ρ ↦ L·ρ·R` on stacked block densities, for `2d×2d`
/// matrices `L` and `R` with atom index outermost. Block `((i,j),(k,l))` is
/// `L_{ik} ⊗ (R_{lj})ᵀ`.
pub fn block_sandwich_superop<T: Real>(left: &CMatrix<T>, right: &CMatrix<T>, d: FockDim) -> Result<SuperOperator<T>> {
    let n = d.get();
    if left.shape() != (2 * n, 2 * n) || right.shape() != (2 * n, 2 * n) {
        return Err(Error::Shape(format!(
            "block_sandwich_superop needs {0}x{0} factors, got {1:?} and {2:?}",
            2 * n,
            left.shape(),
            right.shape()
        )));
    }
    let bl = d.block_len();
    let mut out = CMatrix::zeros(4 * bl, 4 * bl);
    for (row_block, (i, j)) in BLOCK_ORDER.into_iter().enumerate() {
        for (col_block, (k, l)) in BLOCK_ORDER.into_iter().enumerate() {
            let lik = left.block(i * n, k * n, n, n);
            let rlj = right.block(l * n, j * n, n, n);
            out.set_block(row_block * bl, col_block * bl, &lik.kron(&rlj.transpose()));
        }
    }
    Ok(out)
}

/// Assembles a `4d²×4d²` matrix from a 4×4 grid of optional `d²×d²` blocks.
pub fn assemble_blocks<T: Real>(d: FockDim, grid: [[Option<&SuperOperator<T>>; 4]; 4]) -> SuperOperator<T> {
    let bl = d.block_len();
    let mut out = CMatrix::zeros(4 * bl, 4 * bl);
    for (r, row) in grid.iter().enumerate() {
        for (c, blk) in row.iter().enumerate() {
            if let Some(b) = blk {
                out.set_block(r * bl, c * bl, b);
            }
        }
    }
    out
}

/// Block-diagonal `4d²×4d²` matrix.
pub fn block_diagonal<T: Real>(d: FockDim, blocks: [&SuperOperator<T>; 4]) -> SuperOperator<T> {
    let mut grid: [[Option<&SuperOperator<T>>; 4]; 4] = Default::default();
    for (k, b) in blocks.into_iter().enumerate() {
        grid[k][k] = Some(b);
    }
    assemble_blocks(d, grid)
}

/// The su(1,1) ladder superoperators together with `K₀`.
#[derive(Clone, Debug)]
pub struct KGenerators<T> {
    /// `K₊ = a† ⊗ aᵀ`
    pub k_plus: SuperOperator<T>,
    /// `K₋ = a ⊗ (a†)ᵀ`
    pub k_minus: SuperOperator<T>,
    /// `K₃ = ½(N ⊗ 1 + 1 ⊗ N + 1 ⊗ 1)`
    pub k3: SuperOperator<T>,
    /// `K₀ = N ⊗ 1 − 1 ⊗ N`
    pub k0: SuperOperator<T>,
}

pub fn k_generators<T: Real>(d: FockDim) -> KGenerators<T> {
    let a = fock::annihilation::<T>(d);
    let ad = fock::creation::<T>(d);
    let n = fock::number::<T>(d);
    let id = fock::identity::<T>(d);
    let n1 = n.kron(&id);
    let n2 = id.kron(&n);
    let mut k3 = &n1 + &n2;
    k3 += &CMatrix::identity(d.block_len());
    KGenerators {
        k_plus: ad.kron(&a.transpose()),
        k_minus: a.kron(&ad.transpose()),
        k3: k3.scale_real(T::lit(0.5)),
        k0: &n1 - &n2,
    }
}

/// Dissipator superoperator `L` on one vectorized block.
///
/// Built twice, once from the `a`, `a†` Kronecker form (with `a a† = N + 1`)
/// and once as `(μ−ν)/2 + νK₊ + μK₋ − (μ+ν)K₃`; the two must agree.
pub fn lindblad_superop<T: Real>(p: &ModelParams<T>) -> Result<SuperOperator<T>> {
    p.validate()?;
    let explicit = lindblad_superop_explicit(p);
    let k_form = lindblad_superop_k_form(p);
    let gap = (&explicit - &k_form).max_abs();
    assert!(
        gap.as_f64() <= 1e-13 * (1.0 + (p.mu + p.nu).as_f64() * p.dim.get() as f64),
        "Lindblad superoperator constructions disagree by {gap}"
    );
    Ok(k_form)
}

/// `μ{a⊗(a†)ᵀ − ½(a†a⊗1 + 1⊗a†a)} + ν{a†⊗aᵀ − ½(aa†⊗1 + 1⊗aa†)}`
pub(crate) fn lindblad_superop_explicit<T: Real>(p: &ModelParams<T>) -> SuperOperator<T> {
    let d = p.dim;
    let a = fock::annihilation::<T>(d);
    let ad = fock::creation::<T>(d);
    let ada = ad.matmul(&a);
    let aad = fock::number_plus_one::<T>(d);
    let id = fock::identity::<T>(d);
    let half = T::lit(0.5);

    let mut damp = a.kron(&ad.transpose());
    damp -= &(&ada.kron(&id) + &id.kron(&ada)).scale_real(half);
    let mut pump = ad.kron(&a.transpose());
    pump -= &(&aad.kron(&id) + &id.kron(&aad)).scale_real(half);
    &damp.scale_real(p.mu) + &pump.scale_real(p.nu)
}

pub(crate) fn lindblad_superop_k_form<T: Real>(p: &ModelParams<T>) -> SuperOperator<T> {
    let k = k_generators::<T>(p.dim);
    let mut l = CMatrix::identity(p.dim.block_len()).scale_real((p.mu - p.nu) / T::lit(2.0));
    l.axpy(re(p.nu), &k.k_plus);
    l.axpy(re(p.mu), &k.k_minus);
    l.axpy(re(-(p.mu + p.nu)), &k.k3);
    l
}

/// `−iω₀K₀ + L`, the generator shared by all four diagonal blocks of `X`.
pub fn diagonal_generator<T: Real>(p: &ModelParams<T>) -> Result<SuperOperator<T>> {
    let mut g = lindblad_superop(p)?;
    let k = k_generators::<T>(p.dim);
    g.axpy(-i_unit::<T>() * p.omega0, &k.k0);
    Ok(g)
}

/// Block-diagonal part `X` of the generator.
pub fn build_x<T: Real>(p: &ModelParams<T>) -> Result<SuperOperator<T>> {
    let g = diagonal_generator(p)?;
    let id = CMatrix::identity(p.dim.block_len());
    let w = i_unit::<T>() * p.omega0;
    let mut g01 = g.clone();
    g01.axpy(-w, &id);
    let mut g10 = g.clone();
    g10.axpy(w, &id);
    Ok(block_diagonal(p.dim, [&g, &g01, &g10, &g]))
}

/// The two commuting pieces of the coupling generator, `Y = −iΩ(Ỹ₁ − Ỹ₂)`.
/// `Ỹ₁` multiplies from the left by `[[0, a], [a†, 0]]`, `Ỹ₂` from the right.
pub fn y_tilde<T: Real>(d: FockDim) -> (SuperOperator<T>, SuperOperator<T>) {
    let a = fock::annihilation::<T>(d);
    let ad = fock::creation::<T>(d);
    let id = fock::identity::<T>(d);
    let a_left = a.kron(&id);
    let ad_left = ad.kron(&id);
    let a_right = id.kron(&a.transpose());
    let ad_right = id.kron(&ad.transpose());
    let y1 = assemble_blocks(
        d,
        [
            [None, None, Some(&a_left), None],
            [None, None, None, Some(&a_left)],
            [Some(&ad_left), None, None, None],
            [None, Some(&ad_left), None, None],
        ],
    );
    let y2 = assemble_blocks(
        d,
        [
            [None, Some(&ad_right), None, None],
            [Some(&a_right), None, None, None],
            [None, None, None, Some(&ad_right)],
            [None, None, Some(&a_right), None],
        ],
    );
    (y1, y2)
}

/// Off-diagonal (coupling) part `Y` of the generator.
pub fn build_y<T: Real>(p: &ModelParams<T>) -> Result<SuperOperator<T>> {
    p.validate()?;
    let (y1, y2) = y_tilde::<T>(p.dim);
    Ok((&y1 - &y2).scale(-i_unit::<T>() * p.coupling))
}

/// Jaynes–Cummings Hamiltonian split into its atom-diagonal and coupling
/// parts, each a `2d×2d` matrix with the atom index outermost.
#[derive(Clone, Debug)]
pub struct JcHamiltonian<T> {
    /// `diag(ω₀/2 + ω₀N, −ω₀/2 + ω₀N)`
    pub diagonal: CMatrix<T>,
    /// `[[0, Ωa], [Ωa†, 0]]`
    pub off_diagonal: CMatrix<T>,
}

impl<T: Real> JcHamiltonian<T> {
    pub fn full(&self) -> CMatrix<T> {
        &self.diagonal + &self.off_diagonal
    }
}

pub fn build_hamiltonian<T: Real>(p: &ModelParams<T>) -> Result<JcHamiltonian<T>> {
    p.validate()?;
    let d = p.dim;
    let n = d.get();
    let half = p.omega0 / T::lit(2.0);
    let upper = fock::complex_func_of_number(d, |k| re(half + p.omega0 * T::from_usize_lossy(k)));
    let lower = fock::complex_func_of_number(d, |k| re(-half + p.omega0 * T::from_usize_lossy(k)));
    let mut diagonal = CMatrix::zeros(2 * n, 2 * n);
    diagonal.set_block(0, 0, &upper);
    diagonal.set_block(n, n, &lower);
    let a = fock::annihilation::<T>(d).scale_real(p.coupling);
    let mut off_diagonal = CMatrix::zeros(2 * n, 2 * n);
    off_diagonal.set_block(0, n, &a);
    off_diagonal.set_block(n, 0, &a.adjoint());
    Ok(JcHamiltonian { diagonal, off_diagonal })
}

/// Indices of the stacked vector whose Fock labels both lie below the top
/// level, i.e. where truncation of `a a† = N + 1` plays no role.
pub fn interior_indices(d: FockDim) -> Vec<usize> {
    level_indices(d, d.get() - 1, 4)
}

/// Single-block version of [`interior_indices`].
pub fn block_interior_indices(d: FockDim) -> Vec<usize> {
    level_indices(d, d.get() - 1, 1)
}

/// Indices of entries with both Fock labels `< keep`, for `blocks` stacked
/// blocks at cutoff `d`. Used to compress operators built at a larger cutoff.
pub fn level_indices(d: FockDim, keep: usize, blocks: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(blocks * keep * keep);
    for b in 0..blocks {
        for m in 0..keep.min(d.get()) {
            for n in 0..keep.min(d.get()) {
                out.push(vec_index(d, b, m, n));
            }
        }
    }
    out
}

/// Restricts a superoperator built at cutoff `big` to the lowest
/// `small` levels.
pub fn compress<T: Real>(op: &SuperOperator<T>, big: FockDim, small: FockDim, blocks: usize) -> SuperOperator<T> {
    let idx = level_indices(big, small.get(), blocks);
    op.select(&idx, &idx)
}

/// Embeds a state at cutoff `small` into cutoff `big` with zero padding.
pub fn embed_state<T: Real>(rho: &BlockDensity<T>, big: FockDim) -> BlockDensity<T> {
    let small = rho.dim().get();
    let mut out = BlockDensity::zeros(big);
    for k in 0..4 {
        out.blocks[k].set_block(0, 0, &rho.blocks[k]);
    }
    debug_assert!(big.get() >= small);
    out
}

/// Keeps the lowest `small` levels of every block.
pub fn truncate_state<T: Real>(rho: &BlockDensity<T>, small: FockDim) -> BlockDensity<T> {
    let s = small.get();
    rho.map_blocks(|_, b| b.block(0, 0, s, s)).with_dim(small)
}

impl<T: Real> BlockDensity<T> {
    fn with_dim(mut self, dim: FockDim) -> Self {
        self.dim = dim;
        self
    }
}
