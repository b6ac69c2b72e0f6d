//! Split propagators for the full generator `X + Y`:
//! `e^{tY} e^{tX}` and `e^{t²/2 [X,Y]} e^{tY} e^{tX}`, applied right to left.

use log::warn;

use crate::analytic::{self, check_time, BlockPhase};
use crate::error::{Error, Result};
use crate::fock::{self, FockDim, LevelShift, TruncatedOperator};
use crate::linalg::{expm_componentwise, CMatrix};
use crate::params::ModelParams;
use crate::scalar::{i_unit, re, Cx, Real};
use crate::superop::{self, assemble_blocks, block_sandwich_superop, BlockDensity, SuperOperator, VectorizedState};

/// Default single-step bound on `t·max(Ω, μ, ω₀)`.
pub const DEFAULT_STEP_BOUND: f64 = 1.0;

/// Single-block pieces of `[X, Ỹ₁]` and `[X, Ỹ₂]`, with `p = (μ+ν)/2`:
/// `A = p a⊗1 − ν 1⊗aᵀ`, `B = −p a†⊗1 + μ 1⊗a†ᵀ`,
/// `C = −ν a†⊗1 + p 1⊗a†ᵀ`, `D = μ a⊗1 − p 1⊗aᵀ`.
#[derive(Clone, Debug)]
pub struct CommutatorBlocks<T> {
    pub a: SuperOperator<T>,
    pub b: SuperOperator<T>,
    pub c: SuperOperator<T>,
    pub d: SuperOperator<T>,
}

pub fn commutator_blocks<T: Real>(p: &ModelParams<T>) -> Result<CommutatorBlocks<T>> {
    p.validate()?;
    let dim = p.dim;
    let a = fock::annihilation::<T>(dim);
    let ad = fock::creation::<T>(dim);
    let id = fock::identity::<T>(dim);
    let a_l = a.kron(&id);
    let ad_l = ad.kron(&id);
    let a_r = id.kron(&a.transpose());
    let ad_r = id.kron(&ad.transpose());
    let half = (p.mu + p.nu) / T::lit(2.0);
    let comb = |x: T, l: &SuperOperator<T>, y: T, r: &SuperOperator<T>| &l.scale_real(x) + &r.scale_real(y);
    Ok(CommutatorBlocks {
        a: comb(half, &a_l, -p.nu, &a_r),
        b: comb(-half, &ad_l, p.mu, &ad_r),
        c: comb(-p.nu, &ad_l, half, &ad_r),
        d: comb(p.mu, &a_l, -half, &a_r),
    })
}

impl<T: Real> CommutatorBlocks<T> {
    /// `[X, Ỹ₁]` assembled from `A` and `B`.
    pub fn with_y1(&self, dim: FockDim) -> SuperOperator<T> {
        let (a, b) = (Some(&self.a), Some(&self.b));
        assemble_blocks(
            dim,
            [
                [None, None, a, None],
                [None, None, None, a],
                [b, None, None, None],
                [None, b, None, None],
            ],
        )
    }

    /// `[X, Ỹ₂]` assembled from `C` and `D`.
    pub fn with_y2(&self, dim: FockDim) -> SuperOperator<T> {
        let (c, d) = (Some(&self.c), Some(&self.d));
        assemble_blocks(
            dim,
            [
                [None, c, None, None],
                [d, None, None, None],
                [None, None, None, c],
                [None, None, d, None],
            ],
        )
    }
}

/// `[X, Y] = −iΩ([X, Ỹ₁] − [X, Ỹ₂])` assembled from the blocks.
pub fn assembled_commutator<T: Real>(p: &ModelParams<T>) -> Result<SuperOperator<T>> {
    let blocks = commutator_blocks(p)?;
    let diff = &blocks.with_y1(p.dim) - &blocks.with_y2(p.dim);
    Ok(diff.scale(-i_unit::<T>() * p.coupling))
}

/// Which factors of the split propagator to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PropagatorOrder {
    /// `e^{tX}`
    DiagonalOnly,
    /// `e^{tY} e^{tX}`
    Split2,
    /// `e^{t²/2 [X,Y]} e^{tY} e^{tX}`
    Split3,
}

const BLOCK_PHASES: [BlockPhase; 4] = [BlockPhase::Zero, BlockPhase::Minus, BlockPhase::Plus, BlockPhase::Zero];

/// `e^{tX}` as a dense `4d²×4d²` block-diagonal matrix.
pub fn exp_x<T: Real>(t: T, p: &ModelParams<T>) -> Result<SuperOperator<T>> {
    let parts = exp_x_blocks(t, p)?;
    Ok(superop::block_diagonal(
        p.dim,
        [&parts[0], &parts[1], &parts[2], &parts[0]],
    ))
}

/// The three distinct diagonal blocks of `e^{tX}`, indexed as
/// [`BlockPhase::Zero`], [`BlockPhase::Minus`], [`BlockPhase::Plus`].
fn exp_x_blocks<T: Real>(t: T, p: &ModelParams<T>) -> Result<[SuperOperator<T>; 3]> {
    let base = analytic::diagonal_block_propagator(t, p, BlockPhase::Zero)?;
    let minus = base.scale(BlockPhase::Minus.factor(t, p.omega0));
    let plus = base.scale(BlockPhase::Plus.factor(t, p.omega0));
    Ok([base, minus, plus])
}

fn phase_slot(ph: BlockPhase) -> usize {
    match ph {
        BlockPhase::Zero => 0,
        BlockPhase::Minus => 1,
        BlockPhase::Plus => 2,
    }
}

/// Left and right `2d×2d` factors with `e^{tY}ρ = U ρ W`:
/// `U = [[cos(Ωt√(N+1)), −i s₁ a], [−i s₀ a†, cos(Ωt√N)]]` and `W = U†`,
/// where `s₁ = sin(Ωt√(N+1))/√(N+1)` and `s₀ = sin(Ωt√N)/√N`.
pub fn y_factor_matrices<T: Real>(t: T, p: &ModelParams<T>) -> Result<(CMatrix<T>, CMatrix<T>)> {
    check_time(t)?;
    p.validate()?;
    let d = p.dim;
    let n = d.get();
    let wt = p.coupling * t;
    let [c1, c0, s1, s0] = rabi_functions(wt, d)?;
    let a = fock::annihilation::<T>(d);
    let ad = fock::creation::<T>(d);
    let mi = -i_unit::<T>();

    let mut u = CMatrix::zeros(2 * n, 2 * n);
    u.set_block(0, 0, &c1);
    u.set_block(0, n, &s1.matmul(&a).scale(mi));
    u.set_block(n, 0, &s0.matmul(&ad).scale(mi));
    u.set_block(n, n, &c0);

    let mut w = CMatrix::zeros(2 * n, 2 * n);
    w.set_block(0, 0, &c1);
    w.set_block(0, n, &a.matmul(&s0).scale(-mi));
    w.set_block(n, 0, &ad.matmul(&s1).scale(-mi));
    w.set_block(n, n, &c0);
    Ok((u, w))
}

/// `cos(x√(N+1))`, `cos(x√N)`, `sin(x√(N+1))/√(N+1)`, `sin(x√N)/√N`.
fn rabi_functions<T: Real>(x: T, d: FockDim) -> Result<[TruncatedOperator<T>; 4]> {
    let cos = |k: T| (x * k.sqrt()).cos();
    let sin = |k: T| fock::sin_sqrt_ratio(x, k);
    Ok([
        fock::func_of_number(cos, d, LevelShift::One)?,
        fock::func_of_number(cos, d, LevelShift::Zero)?,
        fock::func_of_number(sin, d, LevelShift::One)?,
        fock::func_of_number(sin, d, LevelShift::Zero)?,
    ])
}

/// `e^{tY}` as a dense superoperator built from [`y_factor_matrices`].
pub fn exp_y<T: Real>(t: T, p: &ModelParams<T>) -> Result<SuperOperator<T>> {
    let (u, w) = y_factor_matrices(t, p)?;
    block_sandwich_superop(&u, &w, p.dim)
}

/// `e^{t²/2 [X,Y]} = e^{−i(t²/2)Ω[X,Ỹ₁]} · e^{+i(t²/2)Ω[X,Ỹ₂]}`.
///
/// Each factor is the exponential of a generator that only couples two
/// pairs of blocks through `[[0, A], [B, 0]]` (resp. `[[0, C], [D, 0]]`).
/// That `2d²×2d²` generator is exponentiated directly by scaling and
/// squaring, split into its exactly decoupled components.
pub fn exp_commutator<T: Real>(t: T, p: &ModelParams<T>) -> Result<SuperOperator<T>> {
    let (first, second) = exp_commutator_factors(t, p)?;
    Ok(first.matmul(&second))
}

/// The two factors of [`exp_commutator`], in product order.
pub fn exp_commutator_factors<T: Real>(t: T, p: &ModelParams<T>) -> Result<(SuperOperator<T>, SuperOperator<T>)> {
    check_time(t)?;
    let blocks = commutator_blocks(p)?;
    let s = t * t / T::lit(2.0);
    let first = paired_block_exponential(
        &blocks.a,
        &blocks.b,
        -i_unit::<T>() * p.coupling * s,
        p.dim,
        [(0, 2), (1, 3)],
    )?;
    let second = paired_block_exponential(
        &blocks.c,
        &blocks.d,
        i_unit::<T>() * p.coupling * s,
        p.dim,
        [(0, 1), (2, 3)],
    )?;
    Ok((first, second))
}

/// `exp(z·[[0, upper], [lower, 0]])` placed on each block pair `(i, j)`.
fn paired_block_exponential<T: Real>(
    upper: &SuperOperator<T>,
    lower: &SuperOperator<T>,
    z: Cx<T>,
    dim: FockDim,
    pairs: [(usize, usize); 2],
) -> Result<SuperOperator<T>> {
    let bl = dim.block_len();
    let mut gen = CMatrix::zeros(2 * bl, 2 * bl);
    gen.set_block(0, bl, &upper.scale(z));
    gen.set_block(bl, 0, &lower.scale(z));
    let e = expm_componentwise(&gen)?;
    if !e.is_finite() {
        return Err(Error::Numerical("commutator exponential is not finite".into()));
    }
    let mut out = CMatrix::zeros(4 * bl, 4 * bl);
    for (i, j) in pairs {
        for (r, br) in [(0, i), (1, j)] {
            for (c, bc) in [(0, i), (1, j)] {
                out.set_block(br * bl, bc * bl, &e.block(r * bl, c * bl, bl, bl));
            }
        }
    }
    Ok(out)
}

/// Precomputed factors of one split step of length `h`.
#[derive(Clone, Debug)]
pub struct StepPropagator<T> {
    params: ModelParams<T>,
    h: T,
    order: PropagatorOrder,
    x_blocks: [SuperOperator<T>; 3],
    y: Option<SuperOperator<T>>,
    commutator: Option<(SuperOperator<T>, SuperOperator<T>)>,
}

impl<T: Real> StepPropagator<T> {
    pub fn new(h: T, p: &ModelParams<T>, order: PropagatorOrder) -> Result<Self> {
        check_time(h)?;
        p.validate()?;
        let x_blocks = exp_x_blocks(h, p)?;
        let y = match order {
            PropagatorOrder::DiagonalOnly => None,
            _ => Some(exp_y(h, p)?),
        };
        let commutator = match order {
            PropagatorOrder::Split3 => Some(exp_commutator_factors(h, p)?),
            _ => None,
        };
        Ok(Self {
            params: *p,
            h,
            order,
            x_blocks,
            y,
            commutator,
        })
    }

    pub fn step(&self) -> T {
        self.h
    }

    pub fn order(&self) -> PropagatorOrder {
        self.order
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn apply(&self, v: &VectorizedState<T>) -> Result<VectorizedState<T>> {
        if v.dim() != self.params.dim {
            return Err(Error::Shape(format!(
                "state cutoff {} does not match propagator cutoff {}",
                v.dim(),
                self.params.dim
            )));
        }
        let bl = self.params.dim.block_len();
        let mut data = Vec::with_capacity(4 * bl);
        for (k, chunk) in v.as_slice().chunks(bl).enumerate() {
            data.extend(self.x_blocks[phase_slot(BLOCK_PHASES[k])].matvec(chunk));
        }
        if let Some(y) = &self.y {
            data = y.matvec(&data);
        }
        if let Some((first, second)) = &self.commutator {
            data = first.matvec(&second.matvec(&data));
        }
        VectorizedState::new(self.params.dim, data)
    }

    pub fn apply_density(&self, rho: &BlockDensity<T>) -> Result<BlockDensity<T>> {
        Ok(BlockDensity::from_vectorized(&self.apply(&rho.vectorize())?))
    }

    /// The full step as one dense matrix.
    pub fn to_dense(&self) -> SuperOperator<T> {
        let x = &self.x_blocks;
        let mut m = superop::block_diagonal(self.params.dim, [&x[0], &x[1], &x[2], &x[0]]);
        if let Some(y) = &self.y {
            m = y.matmul(&m);
        }
        if let Some((first, second)) = &self.commutator {
            m = first.matmul(&second.matmul(&m));
        }
        m
    }
}

/// Applies the selected propagator for time `t` in one step, subject to
/// `t·max(Ω, μ, ω₀) ≤ 1`.
pub fn propagate<T: Real>(
    rho0: &BlockDensity<T>,
    t: T,
    p: &ModelParams<T>,
    order: PropagatorOrder,
) -> Result<BlockDensity<T>> {
    propagate_with_bound(rho0, t, p, order, Some(T::lit(DEFAULT_STEP_BOUND)))
}

/// [`propagate`] with a custom bound on `t·max(Ω, μ, ω₀)`; `None` disables
/// the check.
pub fn propagate_with_bound<T: Real>(
    rho0: &BlockDensity<T>,
    t: T,
    p: &ModelParams<T>,
    order: PropagatorOrder,
    bound: Option<T>,
) -> Result<BlockDensity<T>> {
    check_time(t)?;
    p.validate()?;
    if let Some(b) = bound {
        if t * p.max_rate() > b {
            return Err(Error::Step(format!(
                "single step t = {t} exceeds the bound t*max(Omega, mu, omega0) <= {b}; use repeated stepping"
            )));
        }
    }
    check_state_dim(rho0, p)?;
    let out = StepPropagator::new(t, p, order)?.apply_density(rho0)?;
    warn_on_guard(&out);
    Ok(out)
}

/// `n_steps` repeated steps of length `t / n_steps`.
pub fn propagate_stepped<T: Real>(
    rho0: &BlockDensity<T>,
    t: T,
    p: &ModelParams<T>,
    order: PropagatorOrder,
    n_steps: usize,
) -> Result<BlockDensity<T>> {
    check_time(t)?;
    if n_steps == 0 {
        return Err(Error::Step("repeated stepping needs at least one step".into()));
    }
    check_state_dim(rho0, p)?;
    let stepper = StepPropagator::new(t / T::from_usize_lossy(n_steps), p, order)?;
    let mut v = rho0.vectorize();
    for _ in 0..n_steps {
        v = stepper.apply(&v)?;
    }
    let out = BlockDensity::from_vectorized(&v);
    warn_on_guard(&out);
    Ok(out)
}

/// `e^{tY}e^{tX}ρ` evaluated on operators: each block follows the
/// closed-form diagonal flow with its phase, then `U·ρ̃₁·W`.
pub fn propagate_split2_restored<T: Real>(rho0: &BlockDensity<T>, t: T, p: &ModelParams<T>) -> Result<BlockDensity<T>> {
    check_state_dim(rho0, p)?;
    let top = p.dim.get() - 1;
    let mut blocks = Vec::with_capacity(4);
    for (k, b) in rho0.blocks().iter().enumerate() {
        let flowed = analytic::tau_series(b, t, p, top, top)?;
        blocks.push(flowed.scale(BLOCK_PHASES[k].factor(t, p.omega0)));
    }
    let [b00, b01, b10, b11]: [TruncatedOperator<T>; 4] = blocks.try_into().expect("four blocks");
    let mid = BlockDensity::new(b00, b01, b10, b11)?;
    let (u, w) = y_factor_matrices(t, p)?;
    BlockDensity::from_full(&u.matmul(&mid.to_full()).matmul(&w))
}

fn check_state_dim<T: Real>(rho: &BlockDensity<T>, p: &ModelParams<T>) -> Result<()> {
    if rho.dim() != p.dim {
        return Err(Error::Shape(format!(
            "state cutoff {} does not match parameter cutoff {}",
            rho.dim(),
            p.dim
        )));
    }
    Ok(())
}

fn warn_on_guard<T: Real>(rho: &BlockDensity<T>) {
    let occ = fock::guard_occupation(rho.block(0, 0), fock::DEFAULT_GUARD_LEVELS).as_f64()
        + fock::guard_occupation(rho.block(1, 1), fock::DEFAULT_GUARD_LEVELS).as_f64();
    if occ > fock::GUARD_OCCUPATION_LIMIT {
        warn!("occupation {occ:.3e} of the top Fock levels; cutoff may be too small");
    }
}

/// `½ diag(|0⟩⟨0|, |α⟩⟨α|)`: atom excited with an empty cavity, plus atom in
/// the ground state with a coherent field.
pub fn example_initial_state<T: Real>(alpha: Cx<T>, d: FockDim) -> Result<BlockDensity<T>> {
    let half = T::lit(0.5);
    let vac = fock::FockVector::basis(0, d)?.projector().scale_real(half);
    let coh = fock::coherent_state(alpha, d)?.projector().scale_real(half);
    BlockDensity::diagonal(vac, coh)
}

/// Closed-form `e^{tY}e^{tX}` applied to [`example_initial_state`], built
/// from the vacuum and coherent closed forms `A`, `B` and the
/// `cos`/`sin` functions of the number operator:
///
/// ```text
/// ρ₀₀ = c₁ A c₁ + s₁ a B a† s₁          ρ₀₁ = i c₁ A a s₀ − i s₁ a B c₀
/// ρ₁₀ = −i s₀ a† A c₁ + i c₀ B a† s₁    ρ₁₁ = s₀ a† A a s₀ + c₀ B c₀
/// ```
///
/// each times ½.
pub fn example_solution<T: Real>(alpha: Cx<T>, t: T, p: &ModelParams<T>) -> Result<BlockDensity<T>> {
    check_time(t)?;
    p.validate()?;
    let d = p.dim;
    if t.is_zero() {
        return example_initial_state(alpha, d);
    }
    let a_op = analytic::vacuum_solution(t, p)?;
    let b_op = analytic::coherent_solution(alpha, t, p)?;
    let wt = p.coupling * t;
    let [c1, c0, s1, s0] = rabi_functions(wt, d)?;
    let a = fock::annihilation::<T>(d);
    let ad = fock::creation::<T>(d);
    let i = i_unit::<T>();
    let prod = |ms: &[&CMatrix<T>]| ms[1..].iter().fold(ms[0].clone(), |acc, m| acc.matmul(m));

    let b11 = &prod(&[&c1, &a_op, &c1]) + &prod(&[&s1, &a, &b_op, &ad, &s1]);
    let b12 = &prod(&[&c1, &a_op, &a, &s0]).scale(i) - &prod(&[&s1, &a, &b_op, &c0]).scale(i);
    let b21 = &prod(&[&c0, &b_op, &ad, &s1]).scale(i) - &prod(&[&s0, &ad, &a_op, &c1]).scale(i);
    let b22 = &prod(&[&s0, &ad, &a_op, &a, &s0]) + &prod(&[&c0, &b_op, &c0]);
    let half = re(T::lit(0.5));
    BlockDensity::new(b11.scale(half), b12.scale(half), b21.scale(half), b22.scale(half))
}
