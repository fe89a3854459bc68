//! Exact arithmetic in `Z[q]`, `q` a primitive `l`-th root of unity.
//!
//! Elements are kept canonical as remainders modulo the cyclotomic
//! polynomial `Φ_l`, so two elements are equal exactly when their
//! coefficient vectors agree. Reducing modulo `X^l - 1` instead would not
//! work: that ring has zero divisors and the Gaussian binomials
//! `[l choose k]_q` do not vanish in it.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};

/// Dense integer polynomial, `coeffs[i]` is the coefficient of `X^i`.
///
/// Trailing zeros are always trimmed; the zero polynomial has no
/// coefficients at all.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        IntPoly {
            coeffs: vec![BigInt::one()],
        }
    }

    pub fn from_coeffs(coeffs: Vec<BigInt>) -> Self {
        let mut p = IntPoly { coeffs };
        p.trim();
        p
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// `c * X^deg`.
    pub fn monomial(c: BigInt, deg: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); deg + 1];
        coeffs[deg] = c;
        Self::from_coeffs(coeffs)
    }

    /// `X^n - 1`.
    pub fn x_pow_minus_one(n: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); n + 1];
        coeffs[0] = BigInt::from(-1);
        coeffs[n] += BigInt::one();
        Self::from_coeffs(coeffs)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(|c| c.is_one())
    }

    /// Coefficient of `X^i` (zero past the degree).
    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    /// Shift by `X^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return IntPoly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        IntPoly { coeffs }
    }

    /// Exact long division by a monic divisor: `self = q * divisor + r`
    /// with `deg r < deg divisor`.
    pub fn div_rem_monic(&self, divisor: &IntPoly) -> Result<(IntPoly, IntPoly)> {
        if !divisor.is_monic() {
            return invalid("polynomial division requires a monic divisor");
        }
        let d = divisor.coeffs.len() - 1;
        if self.coeffs.len() <= d {
            return Ok((IntPoly::zero(), self.clone()));
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigInt::zero(); rem.len() - d];
        for top in (d..rem.len()).rev() {
            let c = std::mem::take(&mut rem[top]);
            if c.is_zero() {
                continue;
            }
            for (i, m) in divisor.coeffs[..d].iter().enumerate() {
                if !m.is_zero() {
                    rem[top - d + i] -= &c * m;
                }
            }
            quot[top - d] = c;
        }
        rem.truncate(d);
        Ok((IntPoly::from_coeffs(quot), IntPoly::from_coeffs(rem)))
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }
}

impl Add for &IntPoly {
    type Output = IntPoly;

    fn add(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect();
        IntPoly::from_coeffs(coeffs)
    }
}

impl Sub for &IntPoly {
    type Output = IntPoly;

    fn sub(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect();
        IntPoly::from_coeffs(coeffs)
    }
}

impl Mul for &IntPoly {
    type Output = IntPoly;

    fn mul(self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        IntPoly::from_coeffs(coeffs)
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, &self.coeffs, "X")
    }
}

fn write_terms(f: &mut fmt::Formatter<'_>, coeffs: &[BigInt], var: &str) -> fmt::Result {
    let mut first = true;
    for (i, c) in coeffs.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        if first {
            if c.is_negative() {
                f.write_str("-")?;
            }
        } else if c.is_negative() {
            f.write_str(" - ")?;
        } else {
            f.write_str(" + ")?;
        }
        first = false;
        match (i, mag.is_one()) {
            (0, _) => write!(f, "{mag}")?,
            (1, true) => f.write_str(var)?,
            (1, false) => write!(f, "{mag}{var}")?,
            (_, true) => write!(f, "{var}^{i}")?,
            (_, false) => write!(f, "{mag}{var}^{i}")?,
        }
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}

/// Euler's totient.
pub fn euler_phi(mut n: usize) -> usize {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|&d| n.is_multiple_of(d)).collect()
}

/// The `l`-th cyclotomic polynomial `Φ_l`.
///
/// Computed as `(X^l - 1) / ∏_{d | l, d < l} Φ_d` by exact long division.
pub fn cyclotomic_poly(l: usize) -> Result<IntPoly> {
    if l == 0 {
        return invalid("cyclotomic polynomial order must be at least 1");
    }
    static CACHE: OnceLock<Mutex<HashMap<usize, IntPoly>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().expect("cyclotomic cache poisoned").get(&l) {
        return Ok(p.clone());
    }
    let mut denom = IntPoly::one();
    for d in divisors(l).into_iter().filter(|&d| d < l) {
        denom = &denom * &cyclotomic_poly(d)?;
    }
    let (quot, rem) = IntPoly::x_pow_minus_one(l).div_rem_monic(&denom)?;
    debug_assert!(rem.is_zero());
    cache.lock().expect("cyclotomic cache poisoned").insert(l, quot.clone());
    Ok(quot)
}

/// Gaussian binomial `[n choose k]_X` as an integer polynomial, via
/// `[n, k] = [n-1, k-1] + X^k [n-1, k]`.
pub fn gaussian_binomial(n: usize, k: usize) -> IntPoly {
    if k > n {
        return IntPoly::zero();
    }
    // row[j] = [i choose j]
    let mut row = vec![IntPoly::one()];
    for i in 1..=n {
        let mut next = Vec::with_capacity(i + 1);
        for j in 0..=i {
            let left = if j >= 1 { row[j - 1].clone() } else { IntPoly::zero() };
            let right = row.get(j).map(|p| p.shift(j)).unwrap_or_default();
            next.push(&left + &right);
        }
        row = next;
    }
    row.swap_remove(k)
}

/// Element of `Z[q]`: `Σ coeffs[i] q^i` with exactly `φ(l)` coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycInt {
    order: usize,
    coeffs: Vec<BigInt>,
}

impl CycInt {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// True when the element is the integer `c` (all higher coefficients zero).
    pub fn is_integer(&self, c: &BigInt) -> bool {
        self.coeffs[0] == *c && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coeff(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_default()
    }
}

impl fmt::Display for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, &self.coeffs, "q")
    }
}

/// Precomputed data for arithmetic at a fixed order `l`.
#[derive(Debug)]
pub struct CycRing {
    order: usize,
    phi: usize,
    modulus: IntPoly,
    /// Sparse canonical form of `X^d` for `d < phi + l`.
    monomials: Vec<Vec<(usize, BigInt)>>,
    /// `exp(2πi k / l)` for `k < l`.
    unit_roots: Vec<Complex64>,
}

impl CycRing {
    /// Shared ring for order `l`; built once per process.
    pub fn get(l: usize) -> Result<Arc<CycRing>> {
        if l < 2 {
            return invalid(format!("root-of-unity order must be at least 2, got {l}"));
        }
        static RINGS: OnceLock<Mutex<HashMap<usize, Arc<CycRing>>>> = OnceLock::new();
        let rings = RINGS.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(r) = rings.lock().expect("ring cache poisoned").get(&l) {
            return Ok(Arc::clone(r));
        }
        let ring = Arc::new(CycRing::build(l)?);
        rings.lock().expect("ring cache poisoned").insert(l, Arc::clone(&ring));
        Ok(ring)
    }

    fn build(l: usize) -> Result<CycRing> {
        let modulus = cyclotomic_poly(l)?;
        let phi = modulus.degree().expect("cyclotomic polynomial is nonzero");
        let mut monomials = Vec::with_capacity(phi + l);
        let mut cur: Vec<BigInt> = vec![BigInt::zero(); phi];
        cur[0] = BigInt::one();
        for _ in 0..phi + l {
            monomials.push(
                cur.iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, c)| (i, c.clone()))
                    .collect(),
            );
            cur = shift_reduce(&cur, &modulus);
        }
        let unit_roots = (0..l)
            .map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / l as f64))
            .collect();
        Ok(CycRing {
            order: l,
            phi,
            modulus,
            monomials,
            unit_roots,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `φ(l)`, the number of stored coefficients.
    pub fn phi(&self) -> usize {
        self.phi
    }

    pub fn modulus(&self) -> &IntPoly {
        &self.modulus
    }

    pub fn zero(&self) -> CycInt {
        CycInt {
            order: self.order,
            coeffs: vec![BigInt::zero(); self.phi],
        }
    }

    pub fn one(&self) -> CycInt {
        self.integer(BigInt::one())
    }

    pub fn integer(&self, c: BigInt) -> CycInt {
        let mut z = self.zero();
        z.coeffs[0] = c;
        z
    }

    /// `q^(k mod l)`.
    pub fn root_power(&self, k: i64) -> CycInt {
        let e = k.rem_euclid(self.order as i64) as usize;
        let mut z = self.zero();
        for (i, c) in &self.monomials[e] {
            z.coeffs[*i] = c.clone();
        }
        z
    }

    pub fn reduce(&self, p: &IntPoly) -> CycInt {
        let (_, rem) = p.div_rem_monic(&self.modulus).expect("cyclotomic modulus is monic");
        let mut coeffs = rem.coeffs;
        coeffs.resize(self.phi, BigInt::zero());
        CycInt {
            order: self.order,
            coeffs,
        }
    }

    fn check(&self, a: &CycInt) -> Result<()> {
        if a.order != self.order {
            return invalid(format!(
                "order mismatch: element of order {} used in ring of order {}",
                a.order, self.order
            ));
        }
        Ok(())
    }

    pub fn add(&self, a: &CycInt, b: &CycInt) -> Result<CycInt> {
        self.check(a)?;
        self.check(b)?;
        Ok(CycInt {
            order: self.order,
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect(),
        })
    }

    pub fn mul(&self, a: &CycInt, b: &CycInt) -> Result<CycInt> {
        self.check(a)?;
        self.check(b)?;
        let mut out = self.zero();
        self.mul_add_into(&mut out, a, b);
        Ok(out)
    }

    /// `acc += a * b`; orders are assumed checked.
    pub(crate) fn mul_add_into(&self, acc: &mut CycInt, a: &CycInt, b: &CycInt) {
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let prod = x * y;
                for (t, m) in &self.monomials[i + j] {
                    acc.coeffs[*t] += &prod * m;
                }
            }
        }
    }

    /// `acc += a * q^k` for `0 <= k < l`; orders are assumed checked.
    pub(crate) fn mul_root_add_into(&self, acc: &mut CycInt, a: &CycInt, k: usize) {
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (t, m) in &self.monomials[i + k] {
                acc.coeffs[*t] += x * m;
            }
        }
    }

    pub fn mul_root(&self, a: &CycInt, k: i64) -> Result<CycInt> {
        self.check(a)?;
        let mut out = self.zero();
        self.mul_root_add_into(&mut out, a, k.rem_euclid(self.order as i64) as usize);
        Ok(out)
    }

    pub fn to_complex(&self, a: &CycInt) -> Complex64 {
        a.coeffs
            .iter()
            .zip(&self.unit_roots)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, z)| z * c.to_f64().unwrap_or(f64::NAN))
            .sum()
    }
}

/// Multiply a canonical coefficient vector by `X` and reduce.
fn shift_reduce(cur: &[BigInt], modulus: &IntPoly) -> Vec<BigInt> {
    let phi = cur.len();
    let mut next = vec![BigInt::zero(); phi];
    next[1..].clone_from_slice(&cur[..phi - 1]);
    let top = &cur[phi - 1];
    if !top.is_zero() {
        for (i, m) in modulus.coeffs()[..phi].iter().enumerate() {
            next[i] -= top * m;
        }
    }
    next
}

/// Canonical image of `p` in `Z[q]`, i.e. its remainder modulo `Φ_l`.
pub fn cyc_reduce(l: usize, p: &IntPoly) -> Result<CycInt> {
    Ok(CycRing::get(l)?.reduce(p))
}

pub fn cyc_add(a: &CycInt, b: &CycInt) -> Result<CycInt> {
    same_order(a, b)?;
    CycRing::get(a.order)?.add(a, b)
}

pub fn cyc_mul(a: &CycInt, b: &CycInt) -> Result<CycInt> {
    same_order(a, b)?;
    CycRing::get(a.order)?.mul(a, b)
}

/// Canonical representation of `q^(k mod l)`.
pub fn cyc_root_power(l: usize, k: i64) -> Result<CycInt> {
    Ok(CycRing::get(l)?.root_power(k))
}

/// Evaluate at `q = exp(2πi/l)` in double precision.
pub fn cyc_to_complex(a: &CycInt) -> Complex64 {
    if a.is_zero() {
        return Complex64::new(0.0, 0.0);
    }
    CycRing::get(a.order)
        .expect("CycInt always carries a valid order")
        .to_complex(a)
}

fn same_order(a: &CycInt, b: &CycInt) -> Result<()> {
    if a.order != b.order {
        return Err(Error::InvalidArgument(format!(
            "order mismatch: {} vs {}",
            a.order, b.order
        )));
    }
    Ok(())
}

impl Add for &CycInt {
    type Output = CycInt;

    /// Panics on order mismatch; use [`cyc_add`] for a checked version.
    fn add(self, rhs: &CycInt) -> CycInt {
        cyc_add(self, rhs).expect("CycInt addition")
    }
}

impl Sub for &CycInt {
    type Output = CycInt;

    fn sub(self, rhs: &CycInt) -> CycInt {
        self + &(-rhs)
    }
}

impl Neg for &CycInt {
    type Output = CycInt;

    fn neg(self) -> CycInt {
        CycInt {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &CycInt {
    type Output = CycInt;

    /// Panics on order mismatch; use [`cyc_mul`] for a checked version.
    fn mul(self, rhs: &CycInt) -> CycInt {
        cyc_mul(self, rhs).expect("CycInt multiplication")
    }
}
