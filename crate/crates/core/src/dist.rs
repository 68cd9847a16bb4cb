//! Target marginal distributions: Laplace transforms, cumulants, reference
//! densities, and the compound-Gaussian amplitude mixing integral.

use num_complex::Complex64;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::continuation::ilt::{self, IltError, IltParams};
use crate::cumseries::CumulantVector;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
    #[error("Laplace argument {0} is not finite")]
    NonFiniteArgument(Complex64),
    #[error("Laplace argument {0} lies in the left half-plane")]
    LeftHalfPlane(Complex64),
    #[error("cumulant of order {0} is not representable in the working precision")]
    CumulantRange(usize),
    #[error("second cumulant is {0:.4e}; the parameters do not describe a distribution with positive variance")]
    NonPositiveVariance(f64),
    #[error("cumulant order must be at least 1")]
    EmptyOrder,
    #[error("grid must be non-empty, finite, non-negative and strictly ascending")]
    BadGrid,
    #[error("texture grid captures only {mass:.4} of the probability mass (need 0.99)")]
    InsufficientTextureMass { mass: f64 },
    #[error(transparent)]
    Ilt(#[from] IltError),
}

/// Target marginal family with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "family", deny_unknown_fields)]
pub enum DistributionSpec {
    /// Gamma with shape `alpha` and scale `lambda`.
    #[serde(rename = "gamma")]
    Gamma { alpha: f64, lambda: f64 },
    /// Positive tempered α-stable with exponent `alpha`, scale `gamma`, truncation `eta`.
    #[serde(rename = "ptas")]
    PtAlphaS { alpha: f64, gamma: f64, eta: f64 },
}

fn positive(name: &'static str, v: f64) -> Result<(), DistError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(DistError::InvalidParameter { name, value: v, reason: "must be positive and finite" })
    }
}

/// `(1 + x)^α - 1` without cancellation for small `x`.
fn pow1p_m1(x: Complex64, alpha: f64) -> Complex64 {
    let l = if x.norm() < 1e-4 {
        // ln(1+x) = x - x²/2 + x³/3 - x⁴/4
        x * (1.0 - x * (0.5 - x * (1.0 / 3.0 - x * 0.25)))
    } else {
        (1.0 + x).ln()
    };
    expm1(l * alpha)
}

fn expm1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        z * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0))))
    } else {
        z.exp() - 1.0
    }
}

impl DistributionSpec {
    /// Parameter validation; returns warnings for accepted but unusual inputs.
    pub fn validate(&self) -> Result<Vec<String>, DistError> {
        let mut warnings = Vec::new();
        match *self {
            DistributionSpec::Gamma { alpha, lambda } => {
                positive("alpha", alpha)?;
                positive("lambda", lambda)?;
            }
            DistributionSpec::PtAlphaS { alpha, gamma, eta } => {
                positive("gamma", gamma)?;
                positive("eta", eta)?;
                if !(alpha > 0.0 && alpha < 2.0) {
                    return Err(DistError::InvalidParameter {
                        name: "alpha",
                        value: alpha,
                        reason: "must lie in (0, 2)",
                    });
                }
                if alpha > 1.0 {
                    let msg = format!(
                        "PTαS exponent alpha = {alpha} lies outside (0, 1]; the Laplace transform does not describe a positive distribution there"
                    );
                    log::warn!("{msg}");
                    warnings.push(msg);
                }
            }
        }
        Ok(warnings)
    }

    /// `-log L(s)`, evaluated without forming `L` first.
    pub fn closed_form_neg_log_lt(&self, s: Complex64) -> Result<Complex64, DistError> {
        if !(s.re.is_finite() && s.im.is_finite()) {
            return Err(DistError::NonFiniteArgument(s));
        }
        if s.re < 0.0 {
            return Err(DistError::LeftHalfPlane(s));
        }
        Ok(match *self {
            DistributionSpec::Gamma { alpha, lambda } => {
                let x = s * lambda;
                let l = if x.norm() < 1e-4 {
                    x * (1.0 - x * (0.5 - x * (1.0 / 3.0 - x * 0.25)))
                } else {
                    (1.0 + x).ln()
                };
                l * alpha
            }
            DistributionSpec::PtAlphaS { alpha, gamma, eta } => {
                let scale = gamma / (alpha * eta.powf(alpha));
                pow1p_m1(s * eta, alpha) * scale
            }
        })
    }

    /// The Laplace transform `L_V(s)`; `L_V(0) = 1` exactly.
    pub fn closed_form_lt(&self, s: Complex64) -> Result<Complex64, DistError> {
        if s == Complex64::new(0.0, 0.0) {
            return Ok(Complex64::new(1.0, 0.0));
        }
        Ok((-self.closed_form_neg_log_lt(s)?).exp())
    }

    /// Cumulants `κ_1..κ_{n_max}` in the working precision.
    ///
    /// Gamma: `κ_n = α λ^n (n-1)!`. PTαS: `κ_n = γ η^{n-α} Γ(n-α)/Γ(1-α)`, with the
    /// gamma ratio formed as the exact product `Π_{k=1}^{n-1} (k - α)`.
    pub fn cumulants<T: Scalar>(&self, n_max: usize) -> Result<CumulantVector<T>, DistError> {
        if n_max == 0 {
            return Err(DistError::EmptyOrder);
        }
        let mut kappa = Vec::with_capacity(n_max);
        match *self {
            DistributionSpec::Gamma { alpha, lambda } => {
                let lam = T::of(lambda);
                let mut k = T::of(alpha) * lam;
                for n in 1..=n_max {
                    if n > 1 {
                        k = k * lam * T::of_usize(n - 1);
                    }
                    kappa.push(k);
                }
            }
            DistributionSpec::PtAlphaS { alpha, gamma, eta } => {
                let a = T::of(alpha);
                let e = T::of(eta);
                let mut k = T::of(gamma) * e.powf(T::one() - a);
                for n in 1..=n_max {
                    if n > 1 {
                        k = k * e * (T::of_usize(n - 1) - a);
                    }
                    kappa.push(k);
                }
            }
        }
        if n_max >= 2 && kappa[1] <= T::zero() {
            return Err(DistError::NonPositiveVariance(kappa[1].lossy()));
        }
        if let Some(n) = kappa.iter().position(|k| !k.is_finite() || (k.abs() == T::zero())) {
            return Err(DistError::CumulantRange(n + 1));
        }
        Ok(CumulantVector::new(kappa))
    }

    pub fn mean(&self) -> f64 {
        match *self {
            DistributionSpec::Gamma { alpha, lambda } => alpha * lambda,
            DistributionSpec::PtAlphaS { alpha, gamma, eta } => gamma * eta.powf(1.0 - alpha),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            DistributionSpec::Gamma { alpha, lambda } => alpha * lambda * lambda,
            DistributionSpec::PtAlphaS { alpha, gamma, eta } => gamma * eta.powf(2.0 - alpha) * (1.0 - alpha),
        }
    }

    /// Gamma density in closed form.
    pub fn gamma_pdf(alpha: f64, lambda: f64, v: f64) -> f64 {
        if v < 0.0 {
            return 0.0;
        }
        if v == 0.0 {
            return if alpha < 1.0 {
                f64::INFINITY
            } else if alpha == 1.0 {
                1.0 / lambda
            } else {
                0.0
            };
        }
        ((alpha - 1.0) * v.ln() - v / lambda - libm::lgamma(alpha) - alpha * lambda.ln()).exp()
    }

    /// Reference density on `grid`: closed form for gamma, numerical Laplace
    /// inversion for PTαS.
    pub fn reference_pdf(&self, grid: &[f64], params: &IltParams) -> Result<Vec<f64>, DistError> {
        if !ilt::check_grid(grid) {
            return Err(DistError::BadGrid);
        }
        self.validate()?;
        match *self {
            DistributionSpec::Gamma { alpha, lambda } => {
                Ok(grid.iter().map(|&v| Self::gamma_pdf(alpha, lambda, v)).collect())
            }
            DistributionSpec::PtAlphaS { .. } => {
                let spec = *self;
                let out = ilt::pdf_via_fft_ilt_with_atom(
                    move |s| spec.closed_form_lt(s).unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
                    grid,
                    params,
                    Some(0.0),
                )?;
                Ok(out.density)
            }
        }
    }
}

/// Texture density handed to [`amplitude_pdf`].
#[derive(Debug, Clone, Copy)]
pub enum TexturePdf<'a> {
    /// Samples of a density on an ascending grid, linearly interpolated.
    Sampled { grid: &'a [f64], values: &'a [f64] },
    /// Constant texture `V ≡ v0`.
    PointMass(f64),
}

fn rayleigh_kernel(r: f64, v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    r / (2.0 * v) * (-r * r / (4.0 * v)).exp()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Amplitude density `f_R(r) = ∫ (r/2v) e^{-r²/4v} f_V(v) dv` of compound-Gaussian
/// clutter whose speckle quadratures have variance 2.
pub fn amplitude_pdf(texture: TexturePdf<'_>, r_grid: &[f64]) -> Result<Vec<f64>, DistError> {
    if !ilt::check_grid(r_grid) {
        return Err(DistError::BadGrid);
    }
    match texture {
        TexturePdf::PointMass(v0) => {
            positive("v0", v0)?;
            Ok(r_grid.iter().map(|&r| rayleigh_kernel(r, v0)).collect())
        }
        TexturePdf::Sampled { grid, values } => {
            if !ilt::check_grid(grid) || grid.len() != values.len() || grid.len() < 2 {
                return Err(DistError::BadGrid);
            }
            let mass: f64 = grid
                .windows(2)
                .zip(values.windows(2))
                .map(|(g, f)| 0.5 * (g[1] - g[0]) * (f[0] + f[1]))
                .sum();
            if mass < 0.99 {
                return Err(DistError::InsufficientTextureMass { mass });
            }
            let out = r_grid
                .iter()
                .map(|&r| {
                    let mut acc = 0.0;
                    for (g, f) in grid.windows(2).zip(values.windows(2)) {
                        let (v0, v1, f0, f1) = (g[0], g[1], f[0], f[1]);
                        if f0 == 0.0 && f1 == 0.0 {
                            continue;
                        }
                        let slope = (f1 - f0) / (v1 - v0);
                        let integrand = |v: f64| rayleigh_kernel(r, v) * (f0 + slope * (v - v0));
                        acc += adaptive_simpson(&integrand, v0, v1, 1e-12);
                    }
                    acc
                })
                .collect();
            Ok(out)
        }
    }
}
