//! Dense kernels: Hermitian eigendecomposition, SVD, pseudo-inverse,
//! trace norm and row-major vectorization.
//!
//! Both decompositions are cyclic Jacobi methods. Matrices here never exceed
//! a few hundred rows, and Jacobi gives eigenvectors that are orthonormal to
//! working precision even for clustered spectra, which the positivity tests
//! downstream rely on.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ONE, ZERO};
use crate::error::{Error, Result};

/// Relative Hermiticity tolerance accepted by [`eig_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Default cutoff for [`pseudo_inverse`], relative to the largest singular value.
pub const DEFAULT_RCOND: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, matching `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        *self.values.last().expect("empty spectrum")
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    /// `V f(diag(lambda)) V^dagger`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = self.values.len();
        let v = &self.vectors;
        let fl: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::zeros(v.factors());
        for r in 0..d {
            for c in r..d {
                let mut acc = ZERO;
                for (k, &w) in fl.iter().enumerate() {
                    if w != 0.0 {
                        acc += v[(r, k)] * v[(c, k)].conj() * w;
                    }
                }
                out[(r, c)] = acc;
                out[(c, r)] = acc.conj();
            }
        }
        out
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<HermitianEigen> {
    let deviation = m.hermiticity_defect();
    if deviation > HERMITIAN_TOL * m.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(jacobi_eigen(&m.hermitian_part()))
}

/// Jacobi iteration on an exactly Hermitian input.
pub(crate) fn jacobi_eigen(m: &ComplexMatrix) -> HermitianEigen {
    let d = m.dim();
    let mut a: Vec<Complex64> = m.as_slice().to_vec();
    let mut v = vec![ZERO; d * d];
    for i in 0..d {
        v[i * d + i] = ONE;
    }
    let scale = m.frobenius_norm();
    if scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..d)
                .flat_map(|r| (0..d).filter(move |&c| c != r).map(move |c| (r, c)))
                .map(|(r, c)| a[r * d + c].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= 1e-15 * scale {
                break;
            }
            for p in 0..d {
                for q in p + 1..d {
                    rotate(&mut a, &mut v, d, p, q);
                }
            }
        }
    }
    let mut pairs: Vec<(f64, usize)> = (0..d).map(|i| (a[i * d + i].re, i)).collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = ComplexMatrix::from_fn(m.factors(), |r, c| v[r * d + pairs[c].1]);
    HermitianEigen { values, vectors }
}

/// One Jacobi rotation zeroing `a[p][q]`; accumulates the rotation into `v`.
fn rotate(a: &mut [Complex64], v: &mut [Complex64], d: usize, p: usize, q: usize) {
    let apq = a[p * d + q];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[p * d + p].re;
    let aqq = a[q * d + q].re;
    if mag < 1e-300 || mag <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[p * d + q] = ZERO;
        a[q * d + p] = ZERO;
        return;
    }
    let phase = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // G = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on (p, q); A <- G^dagger A G.
    let gpp = Complex64::new(c, 0.0);
    let gpq = Complex64::new(s, 0.0);
    let gqp = -phase.conj() * s;
    let gqq = phase.conj() * c;

    for r in 0..d {
        let x = a[r * d + p];
        let y = a[r * d + q];
        a[r * d + p] = x * gpp + y * gqp;
        a[r * d + q] = x * gpq + y * gqq;
        let x = v[r * d + p];
        let y = v[r * d + q];
        v[r * d + p] = x * gpp + y * gqp;
        v[r * d + q] = x * gpq + y * gqq;
    }
    for c_ in 0..d {
        let x = a[p * d + c_];
        let y = a[q * d + c_];
        a[p * d + c_] = gpp.conj() * x + gqp.conj() * y;
        a[q * d + c_] = gpq.conj() * x + gqq.conj() * y;
    }
    a[p * d + q] = ZERO;
    a[q * d + p] = ZERO;
    a[p * d + p] = Complex64::new(a[p * d + p].re, 0.0);
    a[q * d + q] = Complex64::new(a[q * d + q].re, 0.0);
}

#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    /// Singular values in descending order.
    pub singular: Vec<f64>,
    pub v: ComplexMatrix,
}

/// Singular value decomposition `m = U diag(s) V^dagger` by one-sided
/// (Hestenes) Jacobi orthogonalization of the columns.
pub fn svd(m: &ComplexMatrix) -> Svd {
    let d = m.dim();
    // column-major working copy
    let mut cols: Vec<Vec<Complex64>> = (0..d).map(|c| m.column(c)).collect();
    let mut v: Vec<Vec<Complex64>> = (0..d)
        .map(|c| (0..d).map(|r| if r == c { ONE } else { ZERO }).collect())
        .collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..d {
            for q in p + 1..d {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let theta = (beta - alpha) / (2.0 * g);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let gpp = Complex64::new(c, 0.0);
                let gpq = Complex64::new(s, 0.0);
                let gqp = -phase.conj() * s;
                let gqq = phase.conj() * c;
                for target in [&mut cols, &mut v] {
                    let (left, right) = target.split_at_mut(q);
                    for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                        let (a, b) = (*x, *y);
                        *x = a * gpp + b * gqp;
                        *y = a * gpq + b * gqq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = cols
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let singular: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let smax = singular.first().copied().unwrap_or(0.0);
    let u = ComplexMatrix::from_fn(m.factors(), |r, c| {
        let k = order[c];
        if norms[k] > smax * 1e-300 && norms[k] > 0.0 {
            cols[k][r] / norms[k]
        } else {
            ZERO
        }
    });
    let vm = ComplexMatrix::from_fn(m.factors(), |r, c| v[order[c]][r]);
    Svd { u, singular, v: vm }
}

/// Moore-Penrose pseudo-inverse; singular values below `rcond * s_max`
/// are treated as zero.
pub fn pseudo_inverse(m: &ComplexMatrix, rcond: f64) -> ComplexMatrix {
    assert!(rcond > 0.0, "rcond must be positive");
    if m.is_hermitian(HERMITIAN_TOL) {
        let eig = jacobi_eigen(&m.hermitian_part());
        let cutoff = rcond * eig.values.iter().fold(0.0f64, |a, l| a.max(l.abs()));
        return eig.reconstruct_with(|l| if l.abs() > cutoff { 1.0 / l } else { 0.0 });
    }
    let Svd { u, singular, v } = svd(m);
    let cutoff = rcond * singular.first().copied().unwrap_or(0.0);
    ComplexMatrix::from_fn(m.factors(), |r, c| {
        let mut acc = ZERO;
        for (k, &s) in singular.iter().enumerate() {
            if s > cutoff {
                acc += v[(r, k)] * u[(c, k)].conj() / s;
            }
        }
        acc
    })
}

/// `Tr sqrt(m m^dagger)`: sum of |eigenvalues| for Hermitian input, sum of
/// singular values otherwise.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    if m.is_hermitian(HERMITIAN_TOL) {
        jacobi_eigen(&m.hermitian_part()).values.iter().map(|l| l.abs()).sum()
    } else {
        svd(m).singular.iter().sum()
    }
}

/// Row-major stacking: `|A>> = sum_ij A_ij |i>|j>`.
///
/// With this convention `vec(X F Z) = (X kron Z^T) vec(F)`.
pub fn vectorize(m: &ComplexMatrix) -> Vec<Complex64> {
    m.as_slice().to_vec()
}

pub fn unvectorize(v: &[Complex64], dim: usize) -> Result<ComplexMatrix> {
    if v.len() != dim * dim {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} cannot be a {dim}x{dim} matrix",
            v.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(&[dim], |r, c| v[r * dim + c]))
}

/// Swap of two `d`-dimensional factors: `S (x kron y) = y kron x`.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(&[d, d]);
    for i in 0..d {
        for j in 0..d {
            s[(j * d + i, i * d + j)] = ONE;
        }
    }
    s
}
