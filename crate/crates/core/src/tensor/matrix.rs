use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense square complex matrix over an ordered tensor product of factors.
///
/// Entries are stored row-major. The leftmost factor is the slowest-varying
/// one in the flat index, so `kron(a, b)` has `a` as its first factor.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    factors: Vec<usize>,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(factors: &[usize]) -> Self {
        let dim = dim_of(factors);
        ComplexMatrix {
            dim,
            factors: factors.to_vec(),
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(factors: &[usize]) -> Self {
        let mut m = Self::zeros(factors);
        for i in 0..m.dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Single-factor matrix of dimension `dim`.
    pub fn square(dim: usize) -> Self {
        Self::zeros(&[dim])
    }

    pub fn from_fn(factors: &[usize], mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(factors);
        let d = m.dim;
        for r in 0..d {
            for c in 0..d {
                m.data[r * d + c] = f(r, c);
            }
        }
        m
    }

    /// Builds a single-factor matrix from real rows.
    ///
    /// Panics if the rows are ragged or not square.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let d = rows.len();
        Self::from_fn(&[d], |r, c| {
            assert_eq!(rows[r].len(), d, "row {r} has wrong length");
            Complex64::new(rows[r][c], 0.0)
        })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let d = rows.len();
        Self::from_fn(&[d], |r, c| {
            assert_eq!(rows[r].len(), d, "row {r} has wrong length");
            rows[r][c]
        })
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let mut m = Self::square(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(*v, 0.0);
        }
        m
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        assert_eq!(u.len(), v.len());
        Self::from_fn(&[u.len()], |r, c| u[r] * v[c].conj())
    }

    /// Projector onto a (not necessarily normalized) vector.
    pub fn projector(v: &[Complex64]) -> Self {
        Self::outer(v, v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    /// Reinterprets the same entries under a different factorization.
    pub fn with_factors(mut self, factors: &[usize]) -> Result<Self> {
        if dim_of(factors) != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "factors {factors:?} do not multiply to {}",
                self.dim
            )));
        }
        self.factors = factors.to_vec();
        Ok(self)
    }

    /// Collapses the factorization into a single factor.
    pub fn flattened(mut self) -> Self {
        self.factors = vec![self.dim];
        self
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.dim).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = self.clone();
        for r in 0..d {
            for c in 0..d {
                out.data[c * d + r] = self.data[r * d + c].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut out = self.clone();
        for r in 0..d {
            for c in 0..d {
                out.data[c * d + r] = self.data[r * d + c];
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            factors: self.factors.clone(),
            data: self.data.iter().map(|z| f(*z)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// `(m + m^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let d = self.dim;
        let mut out = self.clone();
        for r in 0..d {
            for c in 0..d {
                out.data[r * d + c] = (self.data[r * d + c] + self.data[c * d + r].conj()) * 0.5;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|m - m^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.data[r * d + c] - self.data[c * d + r].conj()).norm());
            }
        }
        worst
    }

    /// Hermitian within the relative tolerance `tol * max|m_ij|`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol * self.max_abs().max(f64::MIN_POSITIVE)
    }

    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let (da, db) = (self.dim, other.dim);
        let d = da * db;
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        let mut data = vec![ZERO; d * d];
        for ar in 0..da {
            for ac in 0..da {
                let a = self.data[ar * da + ac];
                if a == ZERO {
                    continue;
                }
                for br in 0..db {
                    let row = (ar * db + br) * d + ac * db;
                    let brow = &other.data[br * db..(br + 1) * db];
                    for (slot, b) in data[row..row + db].iter_mut().zip(brow) {
                        *slot = a * b;
                    }
                }
            }
        }
        ComplexMatrix { dim: d, factors, data }
    }

    /// Traces out every factor not listed in `keep`. Kept factors retain
    /// their original relative order regardless of the order of `keep`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<ComplexMatrix> {
        let n = self.factors.len();
        let mut keep_mask = vec![false; n];
        for &k in keep {
            if k >= n {
                return Err(Error::InvalidFactor { index: k, count: n });
            }
            keep_mask[k] = true;
        }
        let kept: Vec<usize> = (0..n).filter(|&k| keep_mask[k]).collect();
        let traced: Vec<usize> = (0..n).filter(|&k| !keep_mask[k]).collect();
        let kept_dims: Vec<usize> = kept.iter().map(|&k| self.factors[k]).collect();
        let dk = dim_of(&kept_dims);
        let dt: usize = traced.iter().map(|&k| self.factors[k]).product();

        // full[kr * dt + t] is the flat index with kept digits from kr and
        // traced digits from t.
        let strides = self.strides();
        let mut full = vec![0usize; dk * dt];
        for kr in 0..dk {
            let base = compose(kr, &kept, &self.factors, &strides);
            for t in 0..dt {
                full[kr * dt + t] = base + compose(t, &traced, &self.factors, &strides);
            }
        }
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(&kept_dims);
        if kept_dims.is_empty() {
            out.factors = vec![1];
        }
        for kr in 0..dk {
            for kc in 0..dk {
                let mut acc = ZERO;
                for t in 0..dt {
                    acc += self.data[full[kr * dt + t] * d + full[kc * dt + t]];
                }
                out.data[kr * dk + kc] = acc;
            }
        }
        Ok(out)
    }

    /// Reorders tensor factors: factor `k` of the result is factor `order[k]`
    /// of `self`.
    pub fn permute_factors(&self, order: &[usize]) -> Result<ComplexMatrix> {
        let n = self.factors.len();
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "permutation of length {} for {n} factors",
                order.len()
            )));
        }
        for &o in order {
            if o >= n || seen[o] {
                return Err(Error::InvalidInput(format!("{order:?} is not a permutation")));
            }
            seen[o] = true;
        }
        let new_factors: Vec<usize> = order.iter().map(|&o| self.factors[o]).collect();
        let old_strides = self.strides();
        let d = self.dim;
        // old flat index for each new flat index
        let map: Vec<usize> = (0..d)
            .map(|i| {
                let mut rem = i;
                let mut old = 0;
                for (k, &dk) in new_factors.iter().enumerate().rev() {
                    old += (rem % dk) * old_strides[order[k]];
                    rem /= dk;
                }
                old
            })
            .collect();
        let mut out = ComplexMatrix::zeros(&new_factors);
        for r in 0..d {
            for c in 0..d {
                out.data[r * d + c] = self.data[map[r] * d + map[c]];
            }
        }
        Ok(out)
    }

    /// Transposes the indices of a single tensor factor.
    pub fn partial_transpose(&self, factor: usize) -> Result<ComplexMatrix> {
        let n = self.factors.len();
        if factor >= n {
            return Err(Error::InvalidFactor { index: factor, count: n });
        }
        let stride = self.strides()[factor];
        let df = self.factors[factor];
        let d = self.dim;
        let digit = |i: usize| (i / stride) % df;
        let mut out = self.clone();
        for r in 0..d {
            for c in 0..d {
                let (dr, dc) = (digit(r), digit(c));
                let r2 = r - dr * stride + dc * stride;
                let c2 = c - dc * stride + dr * stride;
                out.data[r * d + c] = self.data[r2 * d + c2];
            }
        }
        Ok(out)
    }

    /// Places `op` on the listed factors of a space with factors
    /// `factors`, with identity elsewhere. `targets` gives the positions of
    /// `op`'s own factors, in order.
    pub fn embed(op: &ComplexMatrix, factors: &[usize], targets: &[usize]) -> Result<ComplexMatrix> {
        let n = factors.len();
        if targets.len() != op.factors.len() {
            return Err(Error::DimensionMismatch(format!(
                "operator has {} factors but {} targets given",
                op.factors.len(),
                targets.len()
            )));
        }
        let mut used = vec![false; n];
        for (&t, &d) in targets.iter().zip(&op.factors) {
            if t >= n {
                return Err(Error::InvalidFactor { index: t, count: n });
            }
            if used[t] || factors[t] != d {
                return Err(Error::DimensionMismatch(format!(
                    "target {t} (dim {}) cannot host an operator factor of dim {d}",
                    factors[t]
                )));
            }
            used[t] = true;
        }
        let rest: Vec<usize> = (0..n).filter(|&k| !used[k]).collect();
        let rest_dims: Vec<usize> = rest.iter().map(|&k| factors[k]).collect();
        let big = if rest.is_empty() {
            op.clone()
        } else {
            op.kron(&ComplexMatrix::identity(&rest_dims))
        };
        // position of each original factor inside `big`
        let mut position = vec![0usize; n];
        for (p, &t) in targets.iter().enumerate() {
            position[t] = p;
        }
        for (p, &k) in rest.iter().enumerate() {
            position[k] = targets.len() + p;
        }
        big.permute_factors(&position)
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.factors.len()];
        for k in (0..self.factors.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.factors[k + 1];
        }
        strides
    }
}

fn dim_of(factors: &[usize]) -> usize {
    assert!(factors.iter().all(|&f| f > 0), "factor dimensions must be positive");
    factors.iter().product()
}

/// Flat offset contributed by sub-index `sub` spread over `which` factors.
fn compose(sub: usize, which: &[usize], factors: &[usize], strides: &[usize]) -> usize {
    let mut rem = sub;
    let mut off = 0;
    for &k in which.iter().rev() {
        off += (rem % factors[k]) * strides[k];
        rem /= factors[k];
    }
    off
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix product");
        let d = self.dim;
        let mut out = ComplexMatrix {
            dim: d,
            factors: self.factors.clone(),
            data: vec![ZERO; d * d],
        };
        for r in 0..d {
            let orow = &mut out.data[r * d..(r + 1) * d];
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == ZERO {
                    continue;
                }
                for (o, b) in orow.iter_mut().zip(&rhs.data[k * d..(k + 1) * d]) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Mul<&[Complex64]> for &ComplexMatrix {
    type Output = Vec<Complex64>;
    fn mul(self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len(), "dimension mismatch in matrix-vector product");
        (0..self.dim)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in sum");
        let mut out = self.clone();
        for (o, b) in out.data.iter_mut().zip(&rhs.data) {
            *o += b;
        }
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in difference");
        let mut out = self.clone();
        for (o, b) in out.data.iter_mut().zip(&rhs.data) {
            *o -= b;
        }
        out
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {:?} [", self.factors)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for c in 0..self.dim {
                let z = self[(r, c)];
                write!(f, "{:>9.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    factors: Vec<usize>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = |part: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..self.dim).map(|r| self.row(r).iter().map(part).collect()).collect()
        };
        MatrixJson {
            factors: self.factors.clone(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = MatrixJson::deserialize(d)?;
        if raw.factors.is_empty() || raw.factors.contains(&0) {
            return Err(D::Error::custom("factors must be a nonempty list of positive integers"));
        }
        let dim: usize = raw.factors.iter().product();
        let square = |rows: &Vec<Vec<f64>>| rows.len() == dim && rows.iter().all(|r| r.len() == dim);
        if !square(&raw.re) || !square(&raw.im) {
            return Err(D::Error::custom(format!(
                "`re` and `im` must both be {dim}x{dim} to match factors {:?}",
                raw.factors
            )));
        }
        let mut m = ComplexMatrix::zeros(&raw.factors);
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] = Complex64::new(raw.re[r][c], raw.im[r][c]);
            }
        }
        Ok(m)
    }
}
