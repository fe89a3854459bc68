//! Floating-point side of the degree-bound argument.
//!
//! The eigenvalues of `B_n` are known in closed form (`q^k n^{1/l}`), so
//! no eigensolver is needed: multiplicities are nullities of
//! `B_n - λI`, computed by Gaussian elimination, and the intersection step
//! is a null-space computation on a restricted eigenbasis.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cyclegraph::VertexSubset;
use crate::cyclotomic::{cyc_root_power, cyc_to_complex};
use crate::error::{invalid, Result};
use crate::limits::Limits;
use crate::qmatrix::{build_b, RootMatrix};
use crate::SCHEMA_VERSION;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Dense row-major complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return invalid(format!("{} entries for a {rows}x{cols} matrix", data.len()));
        }
        if data.iter().any(|z| !z.is_finite()) {
            return invalid("matrix entries must be finite");
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `self - λ I` (square matrices only).
    pub fn shift(&self, lambda: Complex64) -> CMatrix {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m.data[i * self.cols + i] -= lambda;
        }
        m
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        let cols = other.cols;
        let data: Vec<Complex64> = (0..self.rows)
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut row = vec![Complex64::new(0.0, 0.0); cols];
                for k in 0..self.cols {
                    let a = self.data[i * self.cols + k];
                    if a == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for (j, slot) in row.iter_mut().enumerate() {
                        *slot += a * other.data[k * cols + j];
                    }
                }
                row
            })
            .collect();
        Ok(CMatrix {
            rows: self.rows,
            cols,
            data,
        })
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Submatrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> CMatrix {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            for &j in cols {
                data.push(self.get(i, j));
            }
        }
        CMatrix {
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(len: usize, columns: &[Vec<Complex64>]) -> CMatrix {
        let mut m = CMatrix::zeros(len, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, z) in col.iter().enumerate() {
                m.data[i * m.cols + j] = *z;
            }
        }
        m
    }
}

/// Dense numeric image of a root matrix at `q = exp(2πi/l)`.
pub fn to_numeric(a: &RootMatrix) -> CMatrix {
    let l = a.order();
    let roots: Vec<Complex64> = (0..l as i64)
        .map(|k| cyc_to_complex(&cyc_root_power(l, k).expect("order checked by RootMatrix")))
        .collect();
    let mut m = CMatrix::zeros(a.dim(), a.dim());
    for (r, c, k) in a.entries() {
        m.data[r * a.dim() + c] = roots[k];
    }
    m
}

/// Reduced row echelon form with partial pivoting. Returns the reduced
/// matrix and the pivot columns.
///
/// A candidate pivot is treated as zero when its modulus is below
/// `tol * max(1, largest initial entry modulus)`. The floor of 1 keeps
/// matrices that are zero up to rounding noise at rank zero.
fn row_reduce(m: &CMatrix, tol: f64) -> Result<(CMatrix, Vec<usize>)> {
    if tol.is_nan() || tol <= 0.0 {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    let threshold = tol * m.max_abs().max(1.0);
    let mut a = m.clone();
    let (rows, cols) = (a.rows, a.cols);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, modulus) = (r..rows)
            .map(|i| (i, a.data[i * cols + c].norm()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if modulus <= threshold {
            continue;
        }
        if best != r {
            for j in 0..cols {
                a.data.swap(best * cols + j, r * cols + j);
            }
        }
        let inv = a.data[r * cols + c].inv();
        for j in c..cols {
            a.data[r * cols + j] *= inv;
        }
        let pivot_row: Vec<Complex64> = a.data[r * cols..(r + 1) * cols].to_vec();
        for i in 0..rows {
            if i == r {
                continue;
            }
            let f = a.data[i * cols + c];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, &pv) in pivot_row.iter().enumerate().skip(c) {
                a.data[i * cols + j] -= f * pv;
            }
        }
        pivots.push(c);
        r += 1;
    }
    Ok((a, pivots))
}

pub fn gauss_rank(m: &CMatrix, tol: f64) -> Result<usize> {
    Ok(row_reduce(m, tol)?.1.len())
}

/// Orthonormal basis of the right null space.
pub fn null_space(m: &CMatrix, tol: f64) -> Result<Vec<Vec<Complex64>>> {
    let (r, pivots) = row_reduce(m, tol)?;
    let cols = m.cols;
    let mut basis = Vec::new();
    for f in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Complex64::new(0.0, 0.0); cols];
        v[f] = Complex64::new(1.0, 0.0);
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = -r.get(i, f);
        }
        basis.push(v);
    }
    Ok(orthonormalize(basis))
}

fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Modified Gram-Schmidt, two passes.
fn orthonormalize(vectors: Vec<Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(vectors.len());
    for mut v in vectors {
        for _ in 0..2 {
            for u in &out {
                let c = dot(u, &v);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= c * y;
                }
            }
        }
        let nv = norm(&v);
        if nv > 1e-12 {
            v.iter_mut().for_each(|x| *x /= nv);
            out.push(v);
        }
    }
    out
}

/// Real positive `n^{1/l}`.
pub fn real_root(l: usize, n: usize) -> f64 {
    (n as f64).powf(1.0 / l as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenNullity {
    /// Eigenvalue is `q^k n^{1/l}`.
    pub k: usize,
    pub re: f64,
    pub im: f64,
    pub nullity: usize,
}

/// Numeric multiplicities of the `l` candidate eigenvalues of `B_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub l: usize,
    pub n: usize,
    pub dim: usize,
    pub tolerance: f64,
    pub eigenvalues: Vec<EigenNullity>,
    pub nullity_sum: usize,
    /// `l^{n-1}`.
    pub multiplicity_bound: usize,
    /// Some nullity reaches `l^{n-1}`.
    pub some_nullity_at_least_bound: bool,
    /// Every nullity equals `l^{n-1}`.
    pub equal_split: bool,
    /// Numeric rank of `B_n^l - n I`; zero when the power identity holds.
    pub power_identity_rank: usize,
    pub pass: bool,
    pub schema_version: u32,
}

pub fn eigen_multiplicities(l: usize, n: usize, tol: f64, limits: &Limits) -> Result<SpectralReport> {
    let b = to_numeric(&build_b(l, n, limits)?);
    let dim = b.rows();
    let radius = real_root(l, n);
    let eigenvalues = (0..l)
        .into_par_iter()
        .map(|k| {
            let lambda = cyc_to_complex(&cyc_root_power(l, k as i64)?) * radius;
            let rank = gauss_rank(&b.shift(lambda), tol)?;
            Ok(EigenNullity {
                k,
                re: lambda.re,
                im: lambda.im,
                nullity: dim - rank,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut power = b.clone();
    for _ in 1..l {
        power = power.matmul(&b)?;
    }
    let power_identity_rank = gauss_rank(&power.shift(Complex64::new(n as f64, 0.0)), tol)?;

    let bound = dim / l;
    let nullity_sum = eigenvalues.iter().map(|e| e.nullity).sum();
    let some_nullity_at_least_bound = eigenvalues.iter().any(|e| e.nullity >= bound);
    let equal_split = eigenvalues.iter().all(|e| e.nullity == bound);
    Ok(SpectralReport {
        l,
        n,
        dim,
        tolerance: tol,
        pass: nullity_sum == dim && some_nullity_at_least_bound && power_identity_rank == 0,
        eigenvalues,
        nullity_sum,
        multiplicity_bound: bound,
        some_nullity_at_least_bound,
        equal_split,
        power_identity_rank,
        schema_version: SCHEMA_VERSION,
    })
}

/// Unit eigenvector of the minor `B_S`, obtained from an eigenvector of
/// `B_n` supported on `S`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenWitness {
    pub lambda: Complex64,
    /// Members of `S`, indexing `vector`.
    pub vertices: Vec<usize>,
    pub vector: Vec<Complex64>,
    /// `‖B_S w - λ w‖₂`.
    pub residual: f64,
}

/// Finds an eigenvector of `B_n` for `λ = n^{1/l}` that vanishes outside
/// `s`, and returns its restriction to `s`. `None` if the eigenspace
/// meets the coordinate subspace of `s` trivially (within `tol`).
pub fn intersection_witness(
    l: usize,
    n: usize,
    s: &VertexSubset,
    tol: f64,
    limits: &Limits,
) -> Result<Option<EigenWitness>> {
    if s.is_empty() {
        return invalid("subset must be nonempty");
    }
    let b = to_numeric(&build_b(l, n, limits)?);
    let dim = b.rows();
    if s.universe() != dim {
        return invalid(format!(
            "subset universe {} does not match dimension {dim}",
            s.universe()
        ));
    }
    let lambda = Complex64::new(real_root(l, n), 0.0);
    let eigenbasis = null_space(&b.shift(lambda), tol)?;
    if eigenbasis.is_empty() {
        return Ok(None);
    }
    let basis = CMatrix::from_columns(dim, &eigenbasis);
    let outside = s.complement().to_vec();
    let all_cols: Vec<usize> = (0..eigenbasis.len()).collect();
    let coeffs = if outside.is_empty() {
        let mut e = vec![Complex64::new(0.0, 0.0); eigenbasis.len()];
        e[0] = Complex64::new(1.0, 0.0);
        e
    } else {
        match null_space(&basis.select(&outside, &all_cols), tol)?.into_iter().next() {
            Some(c) => c,
            None => return Ok(None),
        }
    };
    let full = basis.mul_vec(&coeffs);
    let vertices = s.to_vec();
    let mut vector: Vec<Complex64> = vertices.iter().map(|&v| full[v]).collect();
    let nv = norm(&vector);
    if nv <= tol {
        return Ok(None);
    }
    vector.iter_mut().for_each(|z| *z /= nv);
    let minor = b.select(&vertices, &vertices);
    let image = minor.mul_vec(&vector);
    let residual = image
        .iter()
        .zip(&vector)
        .map(|(bw, w)| (bw - lambda * w).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(Some(EigenWitness {
        lambda,
        vertices,
        vector,
        residual,
    }))
}

/// `(max row ℓ¹-norm, max column ℓ¹-norm)` of the minor `B_S`. Every
/// nonzero of `B_n` has modulus one, so these are nonzero counts.
pub fn minor_norm_bound(l: usize, n: usize, s: &VertexSubset, limits: &Limits) -> Result<(usize, usize)> {
    if s.is_empty() {
        return invalid("subset must be nonempty");
    }
    let b = build_b(l, n, limits)?;
    if s.universe() != b.dim() {
        return invalid(format!(
            "subset universe {} does not match dimension {}",
            s.universe(),
            b.dim()
        ));
    }
    let mut col = vec![0usize; b.dim()];
    let mut max_row = 0;
    for i in s.iter() {
        let mut count = 0;
        for &(j, _) in b.row(i) {
            if s.contains(j) {
                count += 1;
                col[j] += 1;
            }
        }
        max_row = max_row.max(count);
    }
    Ok((max_row, col.into_iter().max().unwrap_or(0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclegraph::{build_cycle_power, induced_degree_stats};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lim() -> Limits {
        Limits::default()
    }

    /// Leibniz determinant.
    fn det(m: &[Vec<Complex64>]) -> Complex64 {
        let n = m.len();
        if n == 0 {
            return c(1.0, 0.0);
        }
        (0..n)
            .map(|j| {
                let minor: Vec<Vec<Complex64>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(k, _)| k != j)
                            .map(|(_, z)| *z)
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                m[0][j] * det(&minor) * sign
            })
            .sum()
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        (0u32..1 << n)
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
            .collect()
    }

    /// Rank as the size of the largest nonvanishing minor.
    fn brute_rank(m: &CMatrix) -> usize {
        for k in (1..=m.rows().min(m.cols())).rev() {
            for rs in subsets(m.rows(), k) {
                for cs in subsets(m.cols(), k) {
                    let sub: Vec<Vec<Complex64>> =
                        rs.iter().map(|&i| cs.iter().map(|&j| m.get(i, j)).collect()).collect();
                    if det(&sub).norm() > 1e-9 {
                        return k;
                    }
                }
            }
        }
        0
    }

    #[test]
    fn to_numeric_examples() {
        let x = to_numeric(&crate::qmatrix::build_x(4).unwrap());
        let want = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (i, w) in want.iter().enumerate() {
            assert!((x.get(i, i) - w).norm() < 1e-12);
        }
        let y = to_numeric(&crate::qmatrix::build_y(2).unwrap());
        assert_eq!(y.get(0, 1), c(1.0, 0.0));
        assert_eq!(y.get(0, 0), c(0.0, 0.0));
        let b = to_numeric(&build_b(2, 2, &lim()).unwrap());
        for i in 0..4 {
            for j in 0..4 {
                let z = b.get(i, j);
                assert!(z.im.abs() < 1e-12);
                assert!([0.0, 1.0, -1.0].iter().any(|v| (z.re - v).abs() < 1e-12));
            }
        }
        let b = to_numeric(&build_b(5, 2, &lim()).unwrap());
        assert!(b
            .data
            .iter()
            .all(|z| z.norm() < 1e-12 || (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn rank_basics() {
        let id = CMatrix::identity(5);
        assert_eq!(gauss_rank(&id, 0.5).unwrap(), 5);
        assert!(null_space(&id, 0.5).unwrap().is_empty());
        let z = CMatrix::zeros(3, 4);
        assert_eq!(gauss_rank(&z, 1e-8).unwrap(), 0);
        assert_eq!(null_space(&z, 1e-8).unwrap().len(), 4);
        assert!(gauss_rank(&id, 0.0).is_err());
        assert!(CMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn signed_b2_shift_has_nullity_two() {
        let b = to_numeric(&build_b(2, 2, &lim()).unwrap());
        let shifted = b.shift(c(2f64.sqrt(), 0.0));
        assert_eq!(brute_rank(&shifted), 2);
        assert_eq!(gauss_rank(&shifted, 1e-8).unwrap(), 2);
        let ns = null_space(&shifted, 1e-8).unwrap();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((norm(v) - 1.0).abs() < 1e-12);
            assert!(norm(&shifted.mul_vec(v)) < 1e-12);
        }
        assert!(dot(&ns[0], &ns[1]).norm() < 1e-12);
    }

    #[test]
    fn rank_matches_brute_force_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let a = RootMatrix::random(3, 4, 0.4, &mut rng).unwrap();
            let m = to_numeric(&a);
            assert_eq!(gauss_rank(&m, 1e-8).unwrap(), brute_rank(&m));
        }
    }

    #[test]
    fn multiplicity_examples() {
        let r = eigen_multiplicities(2, 2, 1e-8, &lim()).unwrap();
        assert_eq!(r.eigenvalues.iter().map(|e| e.nullity).collect::<Vec<_>>(), vec![2, 2]);
        assert!((r.eigenvalues[1].re + 2f64.sqrt()).abs() < 1e-12);
        let r = eigen_multiplicities(2, 1, 1e-8, &lim()).unwrap();
        assert_eq!(r.eigenvalues.iter().map(|e| e.nullity).collect::<Vec<_>>(), vec![1, 1]);
        let r = eigen_multiplicities(3, 2, 1e-8, &lim()).unwrap();
        assert_eq!(r.nullity_sum, 9);
        assert!(r.some_nullity_at_least_bound);
        assert!(r.equal_split);
        assert_eq!(r.power_identity_rank, 0);
        assert!(r.pass);
    }

    #[test]
    fn witness_examples() {
        // full set: any eigenvector works
        let w = intersection_witness(3, 2, &VertexSubset::full(9), 1e-8, &lim())
            .unwrap()
            .unwrap();
        assert!(w.residual < 1e-8);
        assert!((norm(&w.vector) - 1.0).abs() < 1e-12);

        // threshold-size subsets always carry a witness
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let s = VertexSubset::random(9, 7, &mut rng).unwrap();
            let w = intersection_witness(3, 2, &s, 1e-8, &lim()).unwrap().unwrap();
            assert!(w.residual <= 1e-8);
            assert_eq!(w.vertices, s.to_vec());
        }
    }

    #[test]
    fn no_witness_on_even_class_of_b2() {
        // Oracle: the √2-eigenspace of B_2 is spanned by the columns of
        // B_2 + √2 I; columns 0 and 1 are independent. A combination
        // vanishing on vertices 1 and 2 solves a 2x2 system with nonzero
        // determinant, hence is zero.
        let b = to_numeric(&build_b(2, 2, &lim()).unwrap());
        let r2 = 2f64.sqrt();
        let plus = b.shift(c(-r2, 0.0));
        let col = |j: usize| (0..4).map(|i| plus.get(i, j)).collect::<Vec<_>>();
        let (c0, c1) = (col(0), col(1));
        assert!(norm(&b.shift(c(r2, 0.0)).mul_vec(&c0)) < 1e-12);
        assert!(norm(&b.shift(c(r2, 0.0)).mul_vec(&c1)) < 1e-12);
        let system = vec![vec![c0[1], c1[1]], vec![c0[2], c1[2]]];
        assert!(det(&system).norm() > 0.5);

        let s = VertexSubset::from_indices(4, [0, 3]).unwrap();
        assert!(intersection_witness(2, 2, &s, 1e-8, &lim()).unwrap().is_none());
    }

    #[test]
    fn witness_rejects_bad_subsets() {
        assert!(intersection_witness(2, 2, &VertexSubset::empty(4), 1e-8, &lim()).is_err());
        assert!(intersection_witness(2, 2, &VertexSubset::full(5), 1e-8, &lim()).is_err());
        assert!(minor_norm_bound(2, 2, &VertexSubset::empty(4), &lim()).is_err());
    }

    #[test]
    fn norm_bound_matches_degree_stats() {
        let s = VertexSubset::from_indices(9, [3]).unwrap();
        assert_eq!(minor_norm_bound(3, 2, &s, &lim()).unwrap(), (0, 0));
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (l, n) in [(2, 3), (3, 2), (3, 3), (4, 2)] {
            let g = build_cycle_power(l, n, &lim()).unwrap();
            let dim = g.num_vertices();
            for size in 1..=dim {
                let s = VertexSubset::random(dim, size, &mut rng).unwrap();
                let (row, col) = minor_norm_bound(l, n, &s, &lim()).unwrap();
                let st = induced_degree_stats(&g, &s).unwrap();
                assert_eq!((row, col), (st.max_out, st.max_in));
                if size == (l - 1) * dim / l + 1 {
                    assert!(row.max(col) as f64 >= real_root(l, n) - 1e-6);
                }
            }
        }
    }

    #[test]
    fn witness_eigenvalue_bounded_by_minor_norms() {
        // Schur: |λ| <= max row/column ℓ¹-norm of B_S, computed numerically.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let s = VertexSubset::random(16, 9, &mut rng).unwrap();
            let w = intersection_witness(2, 4, &s, 1e-8, &lim()).unwrap().unwrap();
            let b = to_numeric(&build_b(2, 4, &lim()).unwrap());
            let minor = b.select(&w.vertices, &w.vertices);
            let row_norm = (0..minor.rows())
                .map(|i| (0..minor.cols()).map(|j| minor.get(i, j).norm()).sum::<f64>())
                .fold(0.0, f64::max);
            assert!(w.lambda.norm() <= row_norm + 1e-9);
        }
    }
}
