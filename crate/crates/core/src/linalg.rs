//! Small dense linear algebra and polynomial root finding over any [`Scalar`].

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is exactly singular")]
    Singular,
    #[error("polynomial has no roots (degree {0})")]
    DegreePolynomial(usize),
}

/// LU factorization with partial pivoting of a row-major `n x n` matrix.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    pub fn factor(a: &[T], n: usize) -> Result<Self, LinalgError> {
        assert_eq!(a.len(), n * n, "matrix storage does not match dimension");
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let mut piv = col;
            let mut best = lu[col * n + col].abs();
            for row in col + 1..n {
                let v = lu[row * n + col].abs();
                if v > best {
                    best = v;
                    piv = row;
                }
            }
            if best == T::zero() || !best.is_finite() {
                return Err(LinalgError::Singular);
            }
            if piv != col {
                for j in 0..n {
                    lu.swap(col * n + j, piv * n + j);
                }
                perm.swap(col, piv);
            }
            let d = lu[col * n + col];
            for row in col + 1..n {
                let f = lu[row * n + col] / d;
                lu[row * n + col] = f;
                if f != T::zero() {
                    for j in col + 1..n {
                        let u = lu[col * n + j];
                        lu[row * n + j] = lu[row * n + j] - f * u;
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc = acc - self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc = acc - self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        x
    }

    /// Explicit inverse, row-major.
    pub fn inverse(&self) -> Vec<T> {
        let n = self.n;
        let mut inv = vec![T::zero(); n * n];
        let mut e = vec![T::zero(); n];
        for col in 0..n {
            e.iter_mut().for_each(|v| *v = T::zero());
            e[col] = T::one();
            let x = self.solve(&e);
            for row in 0..n {
                inv[row * n + col] = x[row];
            }
        }
        inv
    }
}

/// Maximum absolute column sum.
pub fn norm1<T: Scalar>(a: &[T], n: usize) -> f64 {
    (0..n)
        .map(|j| (0..n).map(|i| a[i * n + j].abs().lossy()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solution of `A x = b` with one step of iterative refinement, plus the
/// 1-norm condition number of `A`.
pub fn solve_refined<T: Scalar>(a: &[T], n: usize, b: &[T]) -> Result<(Vec<T>, f64), LinalgError> {
    let lu = Lu::factor(a, n)?;
    let mut x = lu.solve(b);
    let r: Vec<T> = (0..n)
        .map(|i| {
            let mut acc = b[i];
            for j in 0..n {
                acc = acc - a[i * n + j] * x[j];
            }
            acc
        })
        .collect();
    let dx = lu.solve(&r);
    for (xi, di) in x.iter_mut().zip(dx) {
        *xi = *xi + di;
    }
    let cond = norm1(a, n) * norm1(&lu.inverse(), n);
    let cond = if cond.is_finite() { cond } else { f64::INFINITY };
    Ok((x, cond))
}

/// Evaluate a polynomial with coefficients in ascending order.
pub fn horner<T: Scalar>(c: &[T], z: Complex<T>) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for &ci in c.iter().rev() {
        acc = acc * z + Complex::new(ci, T::zero());
    }
    acc
}

/// Real-argument polynomial evaluation.
pub fn horner_real<T: Scalar>(c: &[T], x: T) -> T {
    c.iter().rev().fold(T::zero(), |acc, &ci| acc * x + ci)
}

/// Value and first derivative of a polynomial.
pub fn horner_with_derivative<T: Scalar>(c: &[T], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let zero = Complex::new(T::zero(), T::zero());
    let mut p = zero;
    let mut dp = zero;
    for &ci in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + Complex::new(ci, T::zero());
    }
    (p, dp)
}

pub fn derivative<T: Scalar>(c: &[T]) -> Vec<T> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &ci)| ci * T::of_usize(i))
        .collect()
}

fn trimmed<T: Scalar>(c: &[T]) -> &[T] {
    let mut end = c.len();
    while end > 0 && c[end - 1] == T::zero() {
        end -= 1;
    }
    &c[..end]
}

/// Companion-matrix eigenvalues in `f64`, used as starting points.
pub(crate) fn companion_roots(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let lead = c[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    m.complex_eigenvalues().iter().copied().collect()
}

fn circle_start(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let r = (c[0].abs() / c[n].abs()).powf(1.0 / n as f64).max(1e-3);
    (0..n)
        .map(|k| Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect()
}

/// Outcome of polynomial root finding.
#[derive(Debug, Clone)]
pub struct Roots<T> {
    pub roots: Vec<Complex<T>>,
    pub converged: bool,
    pub iterations: usize,
}

/// All complex roots of a real polynomial (ascending coefficients).
///
/// Starting points come from the `f64` companion matrix; they are then polished
/// simultaneously with Aberth–Ehrlich iterations in the working precision.
pub fn poly_roots<T: Scalar>(coeffs: &[T]) -> Result<Roots<T>, LinalgError> {
    let c = trimmed(coeffs);
    if c.len() < 2 {
        return Err(LinalgError::DegreePolynomial(c.len().saturating_sub(1)));
    }
    let cf: Vec<f64> = c.iter().map(|v| v.lossy()).collect();
    let mut start = companion_roots(&cf);
    if start.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        start = circle_start(&cf);
    }
    let mut z: Vec<Complex<T>> = start
        .iter()
        .map(|s| Complex::new(T::of(s.re), T::of(s.im)))
        .collect();
    let n = z.len();
    let tol = T::of(8.0 * T::UNIT_ROUNDOFF);
    let mut converged = false;
    let mut iterations = 0;
    let mut quiet_sweeps = 0;
    let mut stalled = 0;
    let mut prev = T::infinity();
    for it in 0..200 {
        iterations = it + 1;
        let mut max_rel = T::zero();
        for k in 0..n {
            let (p, dp) = horner_with_derivative(c, z[k]);
            if p.norm() == T::zero() {
                continue;
            }
            let ratio = p / dp;
            let mut sum = Complex::new(T::zero(), T::zero());
            for j in 0..n {
                if j != k {
                    let d = z[k] - z[j];
                    if d.norm() != T::zero() {
                        sum = sum + d.inv();
                    }
                }
            }
            let denom = Complex::new(T::one(), T::zero()) - ratio * sum;
            let w = ratio / denom;
            if !w.re.is_finite() || !w.im.is_finite() {
                continue;
            }
            z[k] = z[k] - w;
            let scale = z[k].norm().max(T::min_positive_value());
            max_rel = max_rel.max(w.norm() / scale);
        }
        if max_rel <= tol {
            // One extra sweep after reaching the tolerance settles the last bits.
            quiet_sweeps += 1;
            if quiet_sweeps >= 2 {
                converged = true;
                break;
            }
        }
        // Ill-conditioned roots stall at the evaluation noise floor instead.
        if max_rel < T::of(1e-8) && max_rel > prev * T::of(0.5) {
            stalled += 1;
            if stalled >= 3 {
                converged = true;
                break;
            }
        } else {
            stalled = 0;
        }
        prev = max_rel;
    }
    Ok(Roots { roots: z, converged, iterations })
}
