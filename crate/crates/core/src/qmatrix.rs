//! The matrices `x`, `y`, their Kronecker lifts and the recursive family
//! `B_1 = y`, `B_n = x ⊗ B_{n-1} + y ⊗ Id`.
//!
//! Indexing is 0-based: `x = diag(q^0, ..., q^{l-1})` and `y` has ones at
//! `(i, i+1 mod l)`. With this choice `x·y = q^{l-1}·(y·x)`; the constant is
//! still a primitive root, which is all the collapse identity needs.

use std::fmt::Write as _;

use num_bigint::BigInt;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cyclotomic::{CycInt, CycRing};
use crate::error::{invalid, Error, Result};
use crate::limits::Limits;
use crate::SCHEMA_VERSION;

/// A matrix entry that is either zero or a power of `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RootEntry {
    Zero,
    /// `q^k`, `0 <= k < l`.
    Root(usize),
}

/// Sparse square matrix with entries in `{0} ∪ {q^k}`.
///
/// Rows are stored as column-sorted `(column, exponent)` lists.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RootMatrix {
    order: usize,
    dim: usize,
    rows: Vec<Vec<(usize, usize)>>,
}

impl RootMatrix {
    /// Builds a matrix from unordered `(row, col, exponent)` triplets.
    /// Exponents are reduced mod `l`; duplicate positions are rejected.
    pub fn from_triplets(
        order: usize,
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, i64)>,
    ) -> Result<Self> {
        check_order(order)?;
        let mut rows = vec![Vec::new(); dim];
        for (r, c, k) in triplets {
            if r >= dim || c >= dim {
                return invalid(format!("entry ({r}, {c}) outside {dim}x{dim} matrix"));
            }
            rows[r].push((c, k.rem_euclid(order as i64) as usize));
        }
        for (r, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return invalid(format!("duplicate entry in row {r}"));
            }
        }
        Ok(RootMatrix { order, dim, rows })
    }

    pub fn zero(order: usize, dim: usize) -> Result<Self> {
        Self::from_triplets(order, dim, [])
    }

    pub fn identity(order: usize, dim: usize) -> Result<Self> {
        Self::from_triplets(order, dim, (0..dim).map(|i| (i, i, 0)))
    }

    /// Random matrix in which each position is nonzero with probability
    /// `fill`, carrying a uniform exponent.
    pub fn random<R: Rng + ?Sized>(order: usize, dim: usize, fill: f64, rng: &mut R) -> Result<Self> {
        check_order(order)?;
        let mut triplets = Vec::new();
        for r in 0..dim {
            for c in 0..dim {
                if rng.random_bool(fill) {
                    triplets.push((r, c, rng.random_range(0..order) as i64));
                }
            }
        }
        Self::from_triplets(order, dim, triplets)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[(usize, usize)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<(usize, usize)>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> RootEntry {
        match self.rows[i].binary_search_by_key(&j, |&(c, _)| c) {
            Ok(pos) => RootEntry::Root(self.rows[i][pos].1),
            Err(_) => RootEntry::Zero,
        }
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row_counts(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    pub fn col_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.dim];
        for row in &self.rows {
            for &(c, _) in row {
                counts[c] += 1;
            }
        }
        counts
    }

    /// Iterator over `(row, col, exponent)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, k)| (r, c, k)))
    }

    /// Sum of two matrices whose supports do not overlap.
    pub fn add_disjoint(&self, other: &RootMatrix) -> Result<RootMatrix> {
        check_compatible(self.order, self.dim, other.order, other.dim)?;
        let triplets = self.entries().chain(other.entries()).map(|(r, c, k)| (r, c, k as i64));
        RootMatrix::from_triplets(self.order, self.dim, triplets)
            .map_err(|_| Error::InvalidArgument("summands have overlapping support".into()))
    }

    /// Text dump: a header followed by one `row col exponent` line per nonzero.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "qmatrix 1");
        let _ = writeln!(out, "order {}", self.order);
        let _ = writeln!(out, "dim {}", self.dim);
        let _ = writeln!(out, "nnz {}", self.nnz());
        for (r, c, k) in self.entries() {
            let _ = writeln!(out, "{r} {c} {k}");
        }
        out
    }

    /// Inverse of [`RootMatrix::dump`].
    pub fn parse_dump(text: &str) -> Result<RootMatrix> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut header = |key: &str| -> Result<usize> {
            let line = lines
                .next()
                .ok_or_else(|| Error::InvalidArgument(format!("missing `{key}` line")))?;
            match line.split_whitespace().collect::<Vec<_>>()[..] {
                [k, v] if k == key => v
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad `{key}` value: {v}"))),
                _ => invalid(format!("expected `{key} <value>`, got `{line}`")),
            }
        };
        if header("qmatrix")? != 1 {
            return invalid("unsupported qmatrix dump version");
        }
        let order = header("order")?;
        let dim = header("dim")?;
        let nnz = header("nnz")?;
        let mut triplets = Vec::with_capacity(nnz);
        for line in lines {
            let fields: Vec<i64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::InvalidArgument(format!("bad entry line `{line}`")))?;
            match fields[..] {
                [r, c, k] if r >= 0 && c >= 0 && (0..order as i64).contains(&k) => {
                    triplets.push((r as usize, c as usize, k))
                }
                _ => return invalid(format!("bad entry line `{line}`")),
            }
        }
        if triplets.len() != nnz {
            return invalid(format!("declared {nnz} entries, found {}", triplets.len()));
        }
        RootMatrix::from_triplets(order, dim, triplets)
    }
}

fn check_order(order: usize) -> Result<()> {
    if order < 2 {
        return invalid(format!("root-of-unity order must be at least 2, got {order}"));
    }
    Ok(())
}

fn check_compatible(oa: usize, da: usize, ob: usize, db: usize) -> Result<()> {
    if oa != ob {
        return invalid(format!("order mismatch: {oa} vs {ob}"));
    }
    if da != db {
        return invalid(format!("dimension mismatch: {da} vs {db}"));
    }
    Ok(())
}

/// `diag(q^0, q^1, ..., q^{l-1})`.
pub fn build_x(l: usize) -> Result<RootMatrix> {
    RootMatrix::from_triplets(l, l, (0..l).map(|i| (i, i, i as i64)))
}

/// Cyclic shift: ones at `(i, i+1 mod l)`.
pub fn build_y(l: usize) -> Result<RootMatrix> {
    RootMatrix::from_triplets(l, l, (0..l).map(|i| (i, (i + 1) % l, 0)))
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &RootMatrix, b: &RootMatrix) -> Result<RootMatrix> {
    if a.order != b.order {
        return invalid(format!("order mismatch: {} vs {}", a.order, b.order));
    }
    let l = a.order;
    let db = b.dim;
    let dim = a.dim * db;
    let mut rows = Vec::with_capacity(dim);
    for arow in &a.rows {
        for brow in &b.rows {
            let mut row = Vec::with_capacity(arow.len() * brow.len());
            for &(j, ka) in arow {
                for &(s, kb) in brow {
                    row.push((j * db + s, (ka + kb) % l));
                }
            }
            rows.push(row);
        }
    }
    Ok(RootMatrix { order: l, dim, rows })
}

/// `x ⊗ a + y ⊗ Id_d`. The summands occupy diagonal and off-diagonal
/// blocks respectively, so the sum stays a [`RootMatrix`].
pub fn tilde_lift(a: &RootMatrix) -> Result<RootMatrix> {
    let l = a.order;
    let xa = kron(&build_x(l)?, a)?;
    let yi = kron(&build_y(l)?, &RootMatrix::identity(l, a.dim)?)?;
    xa.add_disjoint(&yi)
}

/// `B_n`: an `l^n × l^n` matrix with exactly `n` root entries in every row
/// and column.
pub fn build_b(l: usize, n: usize, limits: &Limits) -> Result<RootMatrix> {
    check_order(l)?;
    if n == 0 {
        return invalid("n must be at least 1");
    }
    limits.check_dim(l, n)?;
    let mut b = build_y(l)?;
    for _ in 1..n {
        b = tilde_lift(&b)?;
    }
    Ok(b)
}

/// `0/1` matrix: the support pattern of a [`RootMatrix`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PatternMatrix {
    pub dim: usize,
    /// Sorted column indices of the ones in each row.
    pub rows: Vec<Vec<usize>>,
}

impl PatternMatrix {
    pub fn get(&self, i: usize, j: usize) -> u8 {
        u8::from(self.rows[i].binary_search(&j).is_ok())
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }
}

/// Replace every entry by its absolute value.
pub fn abs_pattern(a: &RootMatrix) -> PatternMatrix {
    PatternMatrix {
        dim: a.dim,
        rows: a.rows.iter().map(|row| row.iter().map(|&(c, _)| c).collect()).collect(),
    }
}

/// Dense square matrix over `Z[q]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycMatrix {
    order: usize,
    dim: usize,
    entries: Vec<CycInt>,
}

impl CycMatrix {
    pub fn zero(order: usize, dim: usize) -> Result<Self> {
        let ring = CycRing::get(order)?;
        Ok(CycMatrix {
            order,
            dim,
            entries: vec![ring.zero(); dim * dim],
        })
    }

    /// `c · Id_dim`.
    pub fn scalar_identity(order: usize, dim: usize, c: i64) -> Result<Self> {
        let ring = CycRing::get(order)?;
        let mut m = Self::zero(order, dim)?;
        for i in 0..dim {
            m.entries[i * dim + i] = ring.integer(BigInt::from(c));
        }
        Ok(m)
    }

    pub fn identity(order: usize, dim: usize) -> Result<Self> {
        Self::scalar_identity(order, dim, 1)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &CycInt {
        &self.entries[i * self.dim + j]
    }

    fn row_slice(&self, i: usize) -> &[CycInt] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn add(&self, other: &CycMatrix) -> Result<CycMatrix> {
        check_compatible(self.order, self.dim, other.order, other.dim)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(CycMatrix {
            order: self.order,
            dim: self.dim,
            entries,
        })
    }

    /// Multiply every entry by `c`.
    pub fn scale(&self, c: &CycInt) -> Result<CycMatrix> {
        let ring = CycRing::get(self.order)?;
        let entries = self.entries.iter().map(|e| ring.mul(e, c)).collect::<Result<_>>()?;
        Ok(CycMatrix {
            order: self.order,
            dim: self.dim,
            entries,
        })
    }

    /// `Id_copies ⊗ self`: block-diagonal with `copies` blocks.
    pub fn block_diagonal(&self, copies: usize) -> Result<CycMatrix> {
        let dim = self.dim * copies;
        let mut out = CycMatrix::zero(self.order, dim)?;
        for b in 0..copies {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    out.entries[(b * self.dim + i) * dim + b * self.dim + j] = self.get(i, j).clone();
                }
            }
        }
        Ok(out)
    }

    /// First position where `self` differs from `c · Id`, row-major.
    pub fn first_scalar_identity_mismatch(&self, c: i64) -> Option<(usize, usize)> {
        let c = BigInt::from(c);
        let zero = BigInt::from(0);
        (0..self.dim * self.dim).find_map(|idx| {
            let (i, j) = (idx / self.dim, idx % self.dim);
            let want = if i == j { &c } else { &zero };
            (!self.entries[idx].is_integer(want)).then_some((i, j))
        })
    }
}

impl From<&RootMatrix> for CycMatrix {
    fn from(a: &RootMatrix) -> Self {
        let ring = CycRing::get(a.order).expect("RootMatrix carries a valid order");
        let mut m = CycMatrix {
            order: a.order,
            dim: a.dim,
            entries: vec![ring.zero(); a.dim * a.dim],
        };
        for (r, c, k) in a.entries() {
            m.entries[r * a.dim + c] = ring.root_power(k as i64);
        }
        m
    }
}

/// A nonzero entry seen during exact multiplication.
#[derive(Clone, Copy)]
pub enum ExactEntry<'a> {
    Root(usize),
    Value(&'a CycInt),
}

/// Either kind of exact matrix, as an operand of [`mat_mul_exact`].
pub trait ExactMatrix: Sync {
    fn order(&self) -> usize;
    fn dim(&self) -> usize;
    /// Calls `f(col, entry)` for each nonzero of row `i`.
    fn for_each_nonzero(&self, i: usize, f: &mut dyn FnMut(usize, ExactEntry<'_>));
}

impl ExactMatrix for RootMatrix {
    fn order(&self) -> usize {
        self.order
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn for_each_nonzero(&self, i: usize, f: &mut dyn FnMut(usize, ExactEntry<'_>)) {
        for &(c, k) in &self.rows[i] {
            f(c, ExactEntry::Root(k));
        }
    }
}

impl ExactMatrix for CycMatrix {
    fn order(&self) -> usize {
        self.order
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn for_each_nonzero(&self, i: usize, f: &mut dyn FnMut(usize, ExactEntry<'_>)) {
        for (c, v) in self.row_slice(i).iter().enumerate() {
            if !v.is_zero() {
                f(c, ExactEntry::Value(v));
            }
        }
    }
}

/// Exact product over `Z[q]`.
pub fn mat_mul_exact<A: ExactMatrix + ?Sized, B: ExactMatrix + ?Sized>(a: &A, b: &B) -> Result<CycMatrix> {
    Ok(mul_counted(a, b)?.0)
}

/// Product plus the number of scalar multiply-adds performed.
fn mul_counted<A: ExactMatrix + ?Sized, B: ExactMatrix + ?Sized>(a: &A, b: &B) -> Result<(CycMatrix, u64)> {
    check_compatible(a.order(), a.dim(), b.order(), b.dim())?;
    let ring = CycRing::get(a.order())?;
    let dim = a.dim();
    let rows: Vec<(Vec<CycInt>, u64)> = (0..dim)
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![ring.zero(); dim];
            let mut work = 0u64;
            a.for_each_nonzero(i, &mut |k, left| {
                b.for_each_nonzero(k, &mut |j, right| {
                    work += 1;
                    let slot = &mut acc[j];
                    match (left, right) {
                        (ExactEntry::Root(e1), ExactEntry::Root(e2)) => {
                            let one = ring.one();
                            ring.mul_root_add_into(slot, &one, (e1 + e2) % ring.order());
                        }
                        (ExactEntry::Root(e), ExactEntry::Value(v)) | (ExactEntry::Value(v), ExactEntry::Root(e)) => {
                            ring.mul_root_add_into(slot, v, e);
                        }
                        (ExactEntry::Value(u), ExactEntry::Value(v)) => {
                            ring.mul_add_into(slot, u, v);
                        }
                    }
                });
            });
            (acc, work)
        })
        .collect();
    let work = rows.iter().map(|(_, w)| w).sum();
    let entries = rows.into_iter().flat_map(|(r, _)| r).collect();
    Ok((
        CycMatrix {
            order: a.order(),
            dim,
            entries,
        },
        work,
    ))
}

/// `a^e` by left-to-right repeated multiplication.
pub fn mat_pow_exact(a: &RootMatrix, e: usize) -> Result<CycMatrix> {
    Ok(pow_counted(a, e)?.0)
}

fn pow_counted(a: &RootMatrix, e: usize) -> Result<(CycMatrix, u64)> {
    if e == 0 {
        return invalid("exponent must be at least 1");
    }
    let mut acc = CycMatrix::from(a);
    let mut work = 0;
    for _ in 1..e {
        let (next, w) = mul_counted(&acc, a)?;
        acc = next;
        work += w;
    }
    Ok((acc, work))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub row: usize,
    pub col: usize,
    pub expected: String,
    pub found: String,
}

/// Outcome of the exact check `B_n^l = n · Id`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub identity: &'static str,
    pub l: usize,
    pub n: usize,
    pub pass: bool,
    pub dim: usize,
    /// Scalar multiply-adds spent computing the power.
    pub work: u64,
    pub first_discrepancy: Option<Discrepancy>,
    pub schema_version: u32,
}

pub fn verify_power_identity(l: usize, n: usize, limits: &Limits) -> Result<IdentityReport> {
    let b = build_b(l, n, limits)?;
    let (power, work) = pow_counted(&b, l)?;
    let first_discrepancy = power
        .first_scalar_identity_mismatch(n as i64)
        .map(|(row, col)| Discrepancy {
            row,
            col,
            expected: if row == col { n.to_string() } else { "0".into() },
            found: power.get(row, col).to_string(),
        });
    Ok(IdentityReport {
        identity: "B_n^l=nI",
        l,
        n,
        pass: first_discrepancy.is_none(),
        dim: b.dim(),
        work,
        first_discrepancy,
        schema_version: SCHEMA_VERSION,
    })
}
