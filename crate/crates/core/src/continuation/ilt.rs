//! Numerical inverse Laplace transform along a shifted Bromwich contour,
//! discretized with a uniform frequency grid and evaluated by FFT.

use num_complex::Complex64;
use rustfft::FftPlanner;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest frequency-sample count the automatic grid doubling will reach.
pub const MAX_LS: usize = 1 << 18;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IltError {
    #[error("Laplace transform has not decayed at the contour end: |F(sigma + i*{omega_max:.4e})| = {magnitude:.3e} exceeds {threshold:.1e} with {ls} samples")]
    NonDecayingLt {
        omega_max: f64,
        magnitude: f64,
        threshold: f64,
        ls: usize,
    },
    #[error("output grid must be non-empty, finite, non-negative and strictly ascending")]
    BadGrid,
    #[error("invalid inversion parameter: {0}")]
    BadParams(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct IltParams {
    /// Number of frequency samples on the contour.
    #[serde(default = "default_ls")]
    pub ls: usize,
    /// Contour abscissa; `null` selects `2 / u_max`.
    #[serde(default)]
    pub sigma: Option<f64>,
    /// Largest tolerated `|F|` at the highest sampled frequency.
    #[serde(default = "default_decay_threshold")]
    pub decay_threshold: f64,
}

fn default_ls() -> usize {
    1 << 14
}

fn default_decay_threshold() -> f64 {
    1e-8
}

impl Default for IltParams {
    fn default() -> Self {
        Self { ls: default_ls(), sigma: None, decay_threshold: default_decay_threshold() }
    }
}

/// Inverted density on the caller's grid plus inversion diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct IltOutput {
    pub density: Vec<f64>,
    /// Probability mass at the origin that was removed before inversion.
    pub atom: f64,
    pub ls_used: usize,
    pub sigma: f64,
    pub period: f64,
    /// Grid points where the inverted density fell below `-1e-9`.
    pub negative_count: usize,
    pub min_density: f64,
}

pub(crate) fn check_grid(u: &[f64]) -> bool {
    !u.is_empty()
        && u.iter().all(|v| v.is_finite() && *v >= 0.0)
        && u.windows(2).all(|w| w[1] > w[0])
}

/// Invert `lt` onto `u_grid`; any mass at the origin is estimated from
/// `lt(1e12)` and removed before inversion.
pub fn pdf_via_fft_ilt<F>(lt: F, u_grid: &[f64], params: &IltParams) -> Result<IltOutput, IltError>
where
    F: Fn(Complex64) -> Complex64,
{
    pdf_via_fft_ilt_with_atom(lt, u_grid, params, None)
}

/// As [`pdf_via_fft_ilt`], with the origin mass supplied by the caller when known.
pub fn pdf_via_fft_ilt_with_atom<F>(
    lt: F,
    u_grid: &[f64],
    params: &IltParams,
    atom: Option<f64>,
) -> Result<IltOutput, IltError>
where
    F: Fn(Complex64) -> Complex64,
{
    if !check_grid(u_grid) {
        return Err(IltError::BadGrid);
    }
    let u_max = *u_grid.last().unwrap();
    if u_max <= 0.0 {
        return Err(IltError::BadGrid);
    }
    if params.ls < 16 || !params.ls.is_power_of_two() {
        return Err(IltError::BadParams(format!("ls = {} must be a power of two >= 16", params.ls)));
    }
    if !(params.decay_threshold > 0.0) {
        return Err(IltError::BadParams("decay_threshold must be positive".into()));
    }
    let sigma = params.sigma.unwrap_or(2.0 / u_max);
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(IltError::BadParams(format!("sigma = {sigma} must be positive")));
    }
    // Periodic images sit a full period away and are damped by e^{-sigma T} = e^{-8}
    // at the default abscissa.
    let period = 4.0 * u_max;
    let d_omega = 2.0 * std::f64::consts::PI / period;

    let atom = atom.unwrap_or_else(|| {
        let a = lt(Complex64::new(1e12, 0.0)).re;
        if a.abs() < 1e-14 || !a.is_finite() {
            0.0
        } else {
            a
        }
    });

    let mut ls = params.ls;
    loop {
        let omega_end = (ls - 1) as f64 * d_omega;
        let tail = (lt(Complex64::new(sigma, omega_end)) - atom).norm();
        if tail <= params.decay_threshold {
            break;
        }
        if ls >= MAX_LS {
            return Err(IltError::NonDecayingLt {
                omega_max: omega_end,
                magnitude: tail,
                threshold: params.decay_threshold,
                ls,
            });
        }
        ls *= 2;
    }

    let mut buf: Vec<Complex64> = (0..ls)
        .map(|k| {
            let s = Complex64::new(sigma, k as f64 * d_omega);
            let w = if k == 0 { 0.5 } else { 1.0 };
            (lt(s) - atom) * w
        })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_inverse(ls).process(&mut buf);

    let du = period / ls as f64;
    let n_keep = ((u_max / du).ceil() as usize + 3).min(ls);
    let raw: Vec<f64> = (0..n_keep)
        .map(|j| {
            let u = j as f64 * du;
            2.0 * (sigma * u).exp() / period * buf[j].re
        })
        .collect();

    let density: Vec<f64> = u_grid.iter().map(|&u| cubic_uniform(&raw, du, u)).collect();
    let negative_count = density.iter().filter(|&&v| v < -1e-9).count();
    let min_density = density.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(IltOutput { density, atom, ls_used: ls, sigma, period, negative_count, min_density })
}

/// Four-point Lagrange interpolation of samples on `0, h, 2h, ...`.
pub(crate) fn cubic_uniform(y: &[f64], h: f64, x: f64) -> f64 {
    let n = y.len();
    if n == 1 {
        return y[0];
    }
    let t = x / h;
    let j = (t.floor() as isize).clamp(0, n as isize - 2) as usize;
    if n < 4 {
        let f = t - j as f64;
        return y[j] * (1.0 - f) + y[j + 1] * f;
    }
    let base = j.saturating_sub(1).min(n - 4);
    let mut acc = 0.0;
    for m in 0..4 {
        let xm = (base + m) as f64;
        let mut w = 1.0;
        for q in 0..4 {
            if q != m {
                let xq = (base + q) as f64;
                w *= (t - xq) / (xm - xq);
            }
        }
        acc += w * y[base + m];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn gamma_two_pair() {
        let u = grid(0.05, 10.0, 200);
        let out = pdf_via_fft_ilt(|s| (1.0 + s).powi(-2), &u, &IltParams { decay_threshold: 1e-7, ..Default::default() })
            .unwrap();
        let err = u
            .iter()
            .zip(&out.density)
            .map(|(&x, &f)| (f - x * (-x).exp()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "max error {err}");
    }

    #[test]
    fn exponential_pair_with_relaxed_decay() {
        let u = grid(0.05, 10.0, 200);
        let params = IltParams { decay_threshold: 1e-4, ..Default::default() };
        let out = pdf_via_fft_ilt(|s| (1.0 + s).inv(), &u, &params).unwrap();
        let err = u
            .iter()
            .zip(&out.density)
            .map(|(&x, &f)| (f - (-x).exp()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "max error {err}");
    }

    #[test]
    fn slow_decay_is_reported() {
        let u = grid(0.05, 10.0, 50);
        let err = pdf_via_fft_ilt(|s| (1.0 + s).inv(), &u, &IltParams::default()).unwrap_err();
        assert!(matches!(err, IltError::NonDecayingLt { .. }));
    }

    #[test]
    fn atom_is_separated() {
        // 0.3 * delta + 0.7 * Exp(1) density
        let u = grid(0.05, 8.0, 100);
        let out = pdf_via_fft_ilt(
            |s| 0.3 + 0.7 * (1.0 + s).powi(-2) * (1.0 + s),
            &u,
            &IltParams { decay_threshold: 1e-4, ..Default::default() },
        )
        .unwrap();
        assert!((out.atom - 0.3).abs() < 1e-9);
        assert!((out.density[50] - 0.7 * (-u[50]).exp()).abs() < 2e-3);
    }

    #[test]
    fn cubic_is_exact_on_cubics() {
        let y: Vec<f64> = (0..10).map(|i| (i as f64 * 0.5).powi(3)).collect();
        let v = cubic_uniform(&y, 0.5, 1.7);
        assert!((v - 1.7f64.powi(3)).abs() < 1e-12);
    }
}
