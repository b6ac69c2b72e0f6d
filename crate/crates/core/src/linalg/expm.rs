//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants (Higham 2005), plus a variant that first splits the matrix
//! into the connected components of its sparsity graph.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::matrix::CMatrix;
use crate::scalar::{Cx, Real};

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// (degree, theta) pairs for unit roundoff 2^-53.
const THETA_DOUBLE: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
    (13, 5.371920351148152e0),
];

/// (degree, theta) pairs for unit roundoff 2^-24.
const THETA_SINGLE: [(usize, f64); 3] = [
    (3, 4.258730016922831e-1),
    (5, 1.880152677804762e0),
    (7, 3.92572478313866e0),
];

fn coefficients(m: usize) -> &'static [f64] {
    match m {
        3 => &B3,
        5 => &B5,
        7 => &B7,
        9 => &B9,
        13 => &B13,
        _ => unreachable!("unsupported Padé degree {m}"),
    }
}

/// Dense matrix exponential.
pub fn expm<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    if !a.is_square() {
        return Err(Error::Shape(format!("expm of non-square {:?} matrix", a.shape())));
    }
    if !a.is_finite() {
        return Err(Error::Numerical("expm input has non-finite entries".into()));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    if n == 1 {
        return Ok(CMatrix::from_diagonal(&[a[(0, 0)].exp()]));
    }

    let norm = a.one_norm().as_f64();
    let table: &[(usize, f64)] = if T::is_double() { &THETA_DOUBLE } else { &THETA_SINGLE };
    for &(m, theta) in &table[..table.len() - 1] {
        if norm <= theta {
            return pade(a, m);
        }
    }
    let (m_max, theta_max) = table[table.len() - 1];
    let squarings = if norm > theta_max {
        (norm / theta_max).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a.scale_real(T::lit(2f64.powi(-squarings)));
    let mut r = pade(&scaled, m_max)?;
    for _ in 0..squarings {
        r = r.matmul(&r);
    }
    if !r.is_finite() {
        return Err(Error::Numerical("expm overflowed".into()));
    }
    Ok(r)
}

fn pade<T: Real>(a: &CMatrix<T>, m: usize) -> Result<CMatrix<T>> {
    let n = a.nrows();
    let b: Vec<Cx<T>> = coefficients(m)
        .iter()
        .map(|&x| Complex::new(T::lit(x), T::zero()))
        .collect();
    let id = CMatrix::identity(n);
    let a2 = a.matmul(a);
    let (u, v) = if m == 13 {
        let a4 = a2.matmul(&a2);
        let a6 = a4.matmul(&a2);
        let mut inner_u = a6.scale(b[13]);
        inner_u.axpy(b[11], &a4);
        inner_u.axpy(b[9], &a2);
        let mut u = a6.matmul(&inner_u);
        u.axpy(b[7], &a6);
        u.axpy(b[5], &a4);
        u.axpy(b[3], &a2);
        u.axpy(b[1], &id);
        let u = a.matmul(&u);

        let mut inner_v = a6.scale(b[12]);
        inner_v.axpy(b[10], &a4);
        inner_v.axpy(b[8], &a2);
        let mut v = a6.matmul(&inner_v);
        v.axpy(b[6], &a6);
        v.axpy(b[4], &a4);
        v.axpy(b[2], &a2);
        v.axpy(b[0], &id);
        (u, v)
    } else {
        // even powers A^0, A^2, ..., A^(m-1)
        let mut powers = vec![id.clone(), a2.clone()];
        while powers.len() < m.div_ceil(2) {
            let next = powers.last().expect("nonempty").matmul(&a2);
            powers.push(next);
        }
        let mut u = CMatrix::zeros(n, n);
        let mut v = CMatrix::zeros(n, n);
        for (k, p) in powers.iter().enumerate() {
            u.axpy(b[2 * k + 1], p);
            v.axpy(b[2 * k], p);
        }
        (a.matmul(&u), v)
    };
    let p = &v + &u;
    let q = &v - &u;
    solve(&q, &p)
}

/// Solves `a · x = b` by LU decomposition with partial pivoting.
pub fn solve<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = a.nrows();
    if !a.is_square() || b.nrows() != n {
        return Err(Error::Shape(format!(
            "solve: {:?} system with {:?} right-hand side",
            a.shape(),
            b.shape()
        )));
    }
    let m = b.ncols();
    let mut lu = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                lu[(i, col)]
                    .norm()
                    .partial_cmp(&lu[(j, col)].norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("nonempty pivot range");
        let pivot_val = lu[(pivot, col)];
        if pivot_val.norm() == T::zero() || !pivot_val.norm().is_finite() {
            return Err(Error::Numerical("singular matrix in LU solve".into()));
        }
        if pivot != col {
            swap_rows(&mut lu, pivot, col);
            swap_rows(&mut x, pivot, col);
        }
        let inv = Complex::new(T::one(), T::zero()) / pivot_val;
        for row in col + 1..n {
            let factor = lu[(row, col)] * inv;
            if factor.is_zero() {
                continue;
            }
            lu[(row, col)] = factor;
            for k in col + 1..n {
                let v = lu[(col, k)];
                lu[(row, k)] -= factor * v;
            }
            for k in 0..m {
                let v = x[(col, k)];
                x[(row, k)] -= factor * v;
            }
        }
    }
    for col in (0..n).rev() {
        let inv = Complex::new(T::one(), T::zero()) / lu[(col, col)];
        for k in 0..m {
            let mut acc = x[(col, k)];
            for j in col + 1..n {
                acc -= lu[(col, j)] * x[(j, k)];
            }
            x[(col, k)] = acc * inv;
        }
    }
    Ok(x)
}

fn swap_rows<T: Real>(m: &mut CMatrix<T>, i: usize, j: usize) {
    let cols = m.ncols();
    let data = m.as_mut_slice();
    for k in 0..cols {
        data.swap(i * cols + k, j * cols + k);
    }
}

/// `exp(A)` stored as one dense exponential per connected component of the
/// sparsity graph of `A` (vertices are indices, edges are nonzero entries).
/// Exact: a matrix that is block diagonal under a permutation has an
/// exponential with the same block structure.
#[derive(Clone, Debug)]
pub struct ComponentwiseExp<T> {
    dim: usize,
    parts: Vec<(Vec<usize>, CMatrix<T>)>,
}

impl<T: Real> ComponentwiseExp<T> {
    pub fn new(a: &CMatrix<T>) -> Result<Self> {
        SplitGenerator::new(a)?.exp(T::one())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn component_sizes(&self) -> Vec<usize> {
        self.parts.iter().map(|(idx, _)| idx.len()).collect()
    }

    pub fn apply(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![Cx::<T>::zero(); self.dim];
        for (idx, e) in &self.parts {
            let local: Vec<Cx<T>> = idx.iter().map(|&i| v[i]).collect();
            for (&i, val) in idx.iter().zip(e.matvec(&local)) {
                out[i] = val;
            }
        }
        out
    }

    pub fn to_dense(&self) -> CMatrix<T> {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (idx, e) in &self.parts {
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    out[(i, j)] = e[(a, b)];
                }
            }
        }
        out
    }
}

/// A matrix stored as its decoupled diagonal blocks (see
/// [`connected_components`]), so that `exp(s·A)` can be formed repeatedly
/// without touching the dense matrix again.
#[derive(Clone, Debug)]
pub struct SplitGenerator<T> {
    dim: usize,
    parts: Vec<(Vec<usize>, CMatrix<T>)>,
}

impl<T: Real> SplitGenerator<T> {
    pub fn new(a: &CMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape(format!("expm of non-square {:?} matrix", a.shape())));
        }
        let parts = connected_components(a)
            .into_iter()
            .map(|idx| {
                let block = a.select(&idx, &idx);
                (idx, block)
            })
            .collect();
        Ok(Self { dim: a.nrows(), parts })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `exp(s·A)`
    pub fn exp(&self, s: T) -> Result<ComponentwiseExp<T>> {
        let parts = self
            .parts
            .iter()
            .map(|(idx, block)| Ok((idx.clone(), expm(&block.scale_real(s))?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ComponentwiseExp { dim: self.dim, parts })
    }

    /// `A·v`
    pub fn apply(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![Cx::<T>::zero(); self.dim];
        for (idx, a) in &self.parts {
            let local: Vec<Cx<T>> = idx.iter().map(|&i| v[i]).collect();
            for (&i, val) in idx.iter().zip(a.matvec(&local)) {
                out[i] = val;
            }
        }
        out
    }
}

/// Dense `exp(A)` computed component by component.
pub fn expm_componentwise<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    Ok(ComponentwiseExp::new(a)?.to_dense())
}

/// Index sets of the connected components of the undirected graph with an
/// edge `i - j` whenever `a[i,j] ≠ 0` or `a[j,i] ≠ 0`. Each set is sorted;
/// sets are ordered by their smallest index.
pub fn connected_components<T: Real>(a: &CMatrix<T>) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for (j, z) in a.row(i).iter().enumerate() {
            if i != j && !z.is_zero() {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Cx<f64> {
        Complex::new(re, im)
    }

    /// Truncated Taylor series evaluated with many terms after scaling;
    /// independent of the Padé path.
    fn taylor_expm(a: &CMatrix<f64>) -> CMatrix<f64> {
        let s = 8;
        let scaled = a.scale_real(0.5f64.powi(s));
        let n = a.nrows();
        let mut term = CMatrix::identity(n);
        let mut sum = CMatrix::identity(n);
        for k in 1..40 {
            term = term.matmul(&scaled).scale_real(1.0 / k as f64);
            sum += &term;
        }
        for _ in 0..s {
            sum = sum.matmul(&sum);
        }
        sum
    }

    #[test]
    fn diagonal_matrix() {
        let d = CMatrix::from_diagonal(&[c(0.5, 1.0), c(-2.0, 0.0), c(0.0, 3.0)]);
        let e = expm(&d).unwrap();
        for (i, z) in d.diagonal().iter().enumerate() {
            assert!((e[(i, i)] - z.exp()).norm() < 1e-14);
        }
    }

    #[test]
    fn rotation_generator() {
        // exp([[0, -θ], [θ, 0]]) is a rotation by θ
        let theta = 2.3;
        let g = CMatrix::from_row_major(2, 2, vec![c(0.0, 0.0), c(-theta, 0.0), c(theta, 0.0), c(0.0, 0.0)]);
        let e = expm(&g).unwrap();
        assert!((e[(0, 0)].re - theta.cos()).abs() < 1e-14);
        assert!((e[(1, 0)].re - theta.sin()).abs() < 1e-14);
    }

    #[test]
    fn agrees_with_taylor_across_padé_degrees() {
        for scale in [0.005, 0.1, 0.5, 1.5, 4.0, 30.0] {
            let a = CMatrix::from_fn(6, 6, |i, j| {
                c(
                    ((i * 5 + j * 3) % 7) as f64 / 7.0 - 0.4,
                    ((i + j) % 3) as f64 * 0.2 - 0.2,
                )
            })
            .scale_real(scale / 3.0);
            let e = expm(&a).unwrap();
            let t = taylor_expm(&a);
            let rel = (&e - &t).max_abs() / t.max_abs();
            assert!(rel < 1e-12, "scale {scale}: rel {rel}");
        }
    }

    #[test]
    fn componentwise_matches_dense() {
        let n = 9;
        // two interleaved components {0,2,4,6,8} and {1,3,5,7}
        let a = CMatrix::from_fn(n, n, |i, j| {
            if (i + j) % 2 == 0 && i != j {
                c(0.3 * i as f64 - 0.1 * j as f64, 0.05 * (i * j) as f64)
            } else if i == j {
                c(-0.2, i as f64 * 0.1)
            } else {
                c(0.0, 0.0)
            }
        });
        let comps = connected_components(&a);
        assert_eq!(comps, vec![vec![0, 2, 4, 6, 8], vec![1, 3, 5, 7]]);
        let ce = ComponentwiseExp::new(&a).unwrap();
        let dense = expm(&a).unwrap();
        assert!((&ce.to_dense() - &dense).max_abs() < 1e-13);
        let v: Vec<_> = (0..n).map(|k| c(k as f64, 1.0)).collect();
        let lhs = ce.apply(&v);
        let rhs = dense.matvec(&v);
        assert!(crate::linalg::matrix::max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn solve_recovers_solution() {
        let a = CMatrix::from_fn(4, 4, |i, j| {
            c(if i == j { 4.0 } else { 1.0 / (1 + i + j) as f64 }, (i as f64) * 0.1)
        });
        let x = CMatrix::from_fn(4, 2, |i, j| c(i as f64 - j as f64, 0.5));
        let b = a.matmul(&x);
        let y = solve(&a, &b).unwrap();
        assert!((&y - &x).max_abs() < 1e-13);
    }

    #[test]
    fn singular_system_is_rejected() {
        let a = CMatrix::<f64>::zeros(3, 3);
        assert!(matches!(solve(&a, &CMatrix::identity(3)), Err(Error::Numerical(_))));
    }

    #[test]
    fn single_precision_path() {
        let g = CMatrix::<f32>::from_row_major(
            2,
            2,
            vec![
                Complex::new(0.0, 0.0),
                Complex::new(-1.0, 0.0),
                Complex::new(1.0, 0.0),
                Complex::new(0.0, 0.0),
            ],
        );
        let e = expm(&g.scale_real(10.0)).unwrap();
        assert!((e[(0, 0)].re - 10f32.cos()).abs() < 1e-4);
    }
}
