//! Autoregressive models: Yule–Walker fitting, impulse responses, the
//! exp-cosine texture correlation, and the multichannel cumulant system.
//!
//! Coefficients follow the convention `y(m) = -Σ_k a_k y(m-k) + u(m)`.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cumseries::{self, CumulantVector, SeriesError};
use crate::linalg::{self, LinalgError, Lu};
use crate::scalar::Scalar;

/// Default truncation threshold for impulse responses.
pub const DEFAULT_IR_THRESHOLD: f64 = 1e-3;
/// Longest impulse response the truncation will produce.
pub const MAX_IR_LEN: usize = 1_000_000;
/// Condition number above which the multichannel cumulant system is rejected.
pub const MV_COND_LIMIT: f64 = 1e10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArError {
    #[error("autocorrelation matrix of order {order} is not positive definite (reflection coefficient {reflection:.6} at stage {stage})")]
    NotPositiveDefinite { order: usize, stage: usize, reflection: f64 },
    #[error("AR model is unstable: spectral radius {spectral_radius:.6} >= 1")]
    UnstableModel { spectral_radius: f64 },
    #[error("impulse response still above threshold {threshold:e} after {cap} lags")]
    TruncationCapExceeded { threshold: f64, cap: usize },
    #[error("invalid ACF: {0}")]
    InvalidAcf(String),
    #[error("invalid AR parameter: {0}")]
    InvalidParameter(String),
    #[error("cumulant system of order {n} is singular (condition {cond:.3e})")]
    SingularCumulantSystem { n: usize, cond: f64 },
    #[error("channel count mismatch: expected {expected}, got {got}")]
    ChannelMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Exponentially decaying cosine correlation of the texture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExpCosine {
    /// Decorrelation time in seconds.
    pub t0: f64,
    /// Period of the cosine modulation in seconds.
    #[serde(rename = "T0")]
    pub period: f64,
    /// Modulation depth in (0, 1).
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum AcfModel {
    ExpCosine(ExpCosine),
}

/// Prescribed normalized autocorrelation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(untagged)]
pub enum AcfSpec {
    Model(AcfModel),
    Lags {
        /// `r_0 = 1, r_1, ...`
        lags: Vec<f64>,
    },
}

impl AcfSpec {
    pub fn exp_cosine(t0: f64, period: f64, d: f64) -> Self {
        AcfSpec::Model(AcfModel::ExpCosine(ExpCosine { t0, period, d }))
    }

    /// Lags `0..n_lags` at sample rate `prf_hz`.
    pub fn values(&self, prf_hz: f64, n_lags: usize) -> Result<Vec<f64>, ArError> {
        match self {
            AcfSpec::Model(AcfModel::ExpCosine(p)) => exp_cosine_acf(p, prf_hz, n_lags),
            AcfSpec::Lags { lags } => {
                validate_lags(lags)?;
                if lags.len() < n_lags {
                    return Err(ArError::InvalidAcf(format!("{n_lags} lags requested but only {} given", lags.len())));
                }
                Ok(lags[..n_lags].to_vec())
            }
        }
    }

    pub fn validate(&self) -> Result<(), ArError> {
        match self {
            AcfSpec::Model(AcfModel::ExpCosine(p)) => exp_cosine_acf(p, 1.0, 1).map(|_| ()),
            AcfSpec::Lags { lags } => validate_lags(lags),
        }
    }
}

fn validate_lags(lags: &[f64]) -> Result<(), ArError> {
    if lags.first() != Some(&1.0) {
        return Err(ArError::InvalidAcf("lag 0 must equal 1".into()));
    }
    if let Some((k, v)) = lags.iter().enumerate().find(|(_, v)| !v.is_finite() || v.abs() > 1.0) {
        return Err(ArError::InvalidAcf(format!("|r_{k}| = {v} exceeds 1")));
    }
    Ok(())
}

/// `r_k = e^{-τ_k/t0} [d cos(2π τ_k / T0) + 1 - d]` with `τ_k = k / F_a`.
pub fn exp_cosine_acf(p: &ExpCosine, prf_hz: f64, n_lags: usize) -> Result<Vec<f64>, ArError> {
    if !(p.d > 0.0 && p.d < 1.0) {
        return Err(ArError::InvalidAcf(format!("modulation depth d = {} must lie in (0, 1)", p.d)));
    }
    if !(p.t0 > 0.0 && p.period > 0.0 && p.t0.is_finite() && p.period.is_finite()) {
        return Err(ArError::InvalidAcf("t0 and T0 must be positive".into()));
    }
    if !(prf_hz > 0.0 && prf_hz.is_finite()) {
        return Err(ArError::InvalidAcf(format!("pulse repetition frequency {prf_hz} must be positive")));
    }
    Ok((0..n_lags)
        .map(|k| {
            let tau = k as f64 / prf_hz;
            (-tau / p.t0).exp() * (p.d * (2.0 * std::f64::consts::PI * tau / p.period).cos() + 1.0 - p.d)
        })
        .collect())
}

/// A stable AR(p) model with its truncated impulse response.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArModel {
    pub a: Vec<f64>,
    /// `h_0 = 1, ..., h_{L_IR}`.
    pub h: Vec<f64>,
    pub l_ir: usize,
    pub threshold: f64,
    pub spectral_radius: f64,
    /// Reflection coefficients from the step-down recursion.
    pub reflection: Vec<f64>,
}

impl ArModel {
    pub fn new(a: Vec<f64>, threshold: f64) -> Result<Self, ArError> {
        if a.iter().any(|v| !v.is_finite()) {
            return Err(ArError::InvalidParameter("coefficients must be finite".into()));
        }
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(ArError::InvalidParameter(format!("truncation threshold {threshold} must lie in (0, 1)")));
        }
        let spectral_radius = spectral_radius(&a);
        let reflection = step_down(&a);
        let stable_by_reflection = reflection.as_ref().map(|k| k.iter().all(|v| v.abs() < 1.0)).unwrap_or(false);
        if !(spectral_radius < 1.0) || !stable_by_reflection {
            return Err(ArError::UnstableModel { spectral_radius });
        }
        let (h, l_ir) = impulse_response(&a, threshold)?;
        Ok(Self { a, h, l_ir, threshold, spectral_radius, reflection: reflection.unwrap_or_default() })
    }

    pub fn order(&self) -> usize {
        self.a.len()
    }

    /// Impulse response recomputed in working precision `T`.
    pub fn h_in<T: Scalar>(&self) -> Vec<T> {
        impulse_recursion::<T>(&self.a, self.l_ir + 1)
    }

    /// `ι_1..ι_n` in working precision `T`.
    pub fn power_sums<T: Scalar>(&self, n: usize) -> Vec<T> {
        cumseries::power_sums(&self.h_in::<T>(), n).0
    }

    /// Untruncated DC gain `1 / (1 + Σ a_k)`.
    pub fn dc_gain(&self) -> f64 {
        1.0 / (1.0 + self.a.iter().sum::<f64>())
    }

    /// Normalized autocorrelation `r_0..r_{n-1}` of the model output.
    pub fn theoretical_acf(&self, n: usize) -> Vec<f64> {
        theoretical_acf(&self.a, n).expect("a stable model has a well-defined ACF")
    }

    /// Run the difference equation over `u`, starting from a zero state.
    pub fn filter(&self, u: &[f64]) -> Vec<f64> {
        let p = self.a.len();
        let mut y = vec![0.0; u.len()];
        for m in 0..u.len() {
            let mut acc = u[m];
            for k in 1..=p.min(m) {
                acc -= self.a[k - 1] * y[m - k];
            }
            y[m] = acc;
        }
        y
    }
}

fn companion_poly(a: &[f64]) -> Vec<f64> {
    // z^p + a_1 z^{p-1} + ... + a_p, ascending.
    let mut c: Vec<f64> = a.iter().rev().copied().collect();
    c.push(1.0);
    c
}

fn spectral_radius(a: &[f64]) -> f64 {
    if a.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    linalg::companion_roots(&companion_poly(a)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Reflection coefficients by the step-down recursion; `None` when a stage hits `|k| = 1`.
fn step_down(a: &[f64]) -> Option<Vec<f64>> {
    let p = a.len();
    let mut phi: Vec<f64> = a.iter().map(|v| -v).collect();
    let mut k = vec![0.0; p];
    for m in (1..=p).rev() {
        let km = phi[m - 1];
        k[m - 1] = km;
        if km.abs() >= 1.0 {
            return None;
        }
        let den = 1.0 - km * km;
        let prev: Vec<f64> = (1..m).map(|j| (phi[j - 1] + km * phi[m - j - 1]) / den).collect();
        phi.truncate(m - 1);
        phi.copy_from_slice(&prev);
    }
    Some(k)
}

/// Normalized autocorrelation of the AR model output at lags `0..n`.
pub fn theoretical_acf(a: &[f64], n: usize) -> Result<Vec<f64>, ArError> {
    let p = a.len();
    let mut r = vec![0.0; n.max(p + 1)];
    r[0] = 1.0;
    if p > 0 {
        // r_k + Σ_j a_j r_{|k-j|} = 0 for k = 1..p, unknowns r_1..r_p.
        let mut m = vec![0.0; p * p];
        let mut rhs = vec![0.0; p];
        for k in 1..=p {
            rhs[k - 1] = -a[k - 1];
            m[(k - 1) * p + (k - 1)] += 1.0;
            for j in 1..=p {
                let lag = k.abs_diff(j);
                if lag > 0 {
                    m[(k - 1) * p + (lag - 1)] += a[j - 1];
                }
            }
        }
        let lu = Lu::factor(&m, p).map_err(|_: LinalgError| ArError::UnstableModel { spectral_radius: spectral_radius(a) })?;
        let sol = lu.solve(&rhs);
        r[1..=p].copy_from_slice(&sol);
        for k in p + 1..r.len() {
            r[k] = -(1..=p).map(|j| a[j - 1] * r[k - j]).sum::<f64>();
        }
    }
    r.truncate(n);
    Ok(r)
}

/// Yule–Walker fit by Levinson–Durbin on lags `r_0..r_p`.
pub fn yule_walker(acf: &[f64], p: usize, threshold: f64) -> Result<ArModel, ArError> {
    if p == 0 {
        return Err(ArError::InvalidParameter("AR order must be at least 1".into()));
    }
    if acf.len() < p + 1 {
        return Err(ArError::InvalidAcf(format!("order {p} needs {} lags, got {}", p + 1, acf.len())));
    }
    validate_lags(&acf[..=p])?;
    let r = acf;
    let mut phi: Vec<f64> = Vec::with_capacity(p);
    let mut err = r[0];
    for m in 1..=p {
        let acc = r[m] - (1..m).map(|j| phi[j - 1] * r[m - j]).sum::<f64>();
        let k = acc / err;
        if !(k.abs() < 1.0) || !k.is_finite() {
            return Err(ArError::NotPositiveDefinite { order: p, stage: m, reflection: k });
        }
        let prev = phi.clone();
        for j in 1..m {
            phi[j - 1] = prev[j - 1] - k * prev[m - j - 1];
        }
        phi.push(k);
        err *= 1.0 - k * k;
        if !(err > 0.0) {
            return Err(ArError::NotPositiveDefinite { order: p, stage: m, reflection: k });
        }
    }
    let a: Vec<f64> = phi.iter().map(|v| -v).collect();
    match ArModel::new(a, threshold) {
        Err(ArError::UnstableModel { spectral_radius }) => {
            debug_assert!(false, "positive-definite Yule–Walker fit produced an unstable model");
            Err(ArError::UnstableModel { spectral_radius })
        }
        other => other,
    }
}

fn impulse_recursion<T: Scalar>(a: &[f64], len: usize) -> Vec<T> {
    let at: Vec<T> = a.iter().map(|&v| T::of(v)).collect();
    let mut h: Vec<T> = Vec::with_capacity(len);
    for i in 0..len {
        if i == 0 {
            h.push(T::one());
            continue;
        }
        let mut acc = T::zero();
        for k in 1..=at.len().min(i) {
            acc = acc - at[k - 1] * h[i - k];
        }
        h.push(acc);
    }
    h
}

/// Impulse response `h_0..h_{L_IR}`, where `L_IR` is the first lag from which
/// `p` consecutive values stay below `threshold`.
pub fn impulse_response(a: &[f64], threshold: f64) -> Result<(Vec<f64>, usize), ArError> {
    let p = a.len();
    if p == 0 {
        return Ok((vec![1.0], 0));
    }
    let mut h = vec![1.0];
    let mut quiet = 0usize;
    let mut i = 0usize;
    loop {
        i += 1;
        if i > MAX_IR_LEN + p {
            return Err(ArError::TruncationCapExceeded { threshold, cap: MAX_IR_LEN });
        }
        let v = -(1..=p.min(i)).map(|k| a[k - 1] * h[i - k]).sum::<f64>();
        h.push(v);
        if v.abs() < threshold {
            quiet += 1;
            if quiet == p {
                let l_ir = i + 1 - p;
                if l_ir > MAX_IR_LEN {
                    return Err(ArError::TruncationCapExceeded { threshold, cap: MAX_IR_LEN });
                }
                h.truncate(l_ir + 1);
                return Ok((h, l_ir));
            }
        } else {
            quiet = 0;
        }
    }
}

/// Multichannel AR model `y(m) = -Σ_k A_k y(m-k) + u(m)` with row-major `M×M` matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct MultivariateArModel {
    pub channels: usize,
    pub coeffs: Vec<Vec<f64>>,
}

/// Matrix impulse response `H_i[p][q]`, row-major per lag.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseTensor {
    pub channels: usize,
    pub h: Vec<Vec<f64>>,
    pub l_ir: usize,
}

impl ImpulseTensor {
    pub fn at(&self, i: usize, p: usize, q: usize) -> f64 {
        self.h[i][p * self.channels + q]
    }
}

impl MultivariateArModel {
    pub fn new(channels: usize, coeffs: Vec<Vec<f64>>) -> Result<Self, ArError> {
        if channels == 0 {
            return Err(ArError::InvalidParameter("at least one channel is required".into()));
        }
        for c in &coeffs {
            if c.len() != channels * channels {
                return Err(ArError::ChannelMismatch { expected: channels * channels, got: c.len() });
            }
        }
        let model = Self { channels, coeffs };
        let rho = model.spectral_radius();
        if !(rho < 1.0) {
            return Err(ArError::UnstableModel { spectral_radius: rho });
        }
        Ok(model)
    }

    /// Spectral radius of the block companion matrix.
    pub fn spectral_radius(&self) -> f64 {
        let m = self.channels;
        let p = self.coeffs.len();
        if p == 0 {
            return 0.0;
        }
        let n = m * p;
        let mut c = nalgebra::DMatrix::<f64>::zeros(n, n);
        for (k, a) in self.coeffs.iter().enumerate() {
            for r in 0..m {
                for s in 0..m {
                    c[(r, k * m + s)] = -a[r * m + s];
                }
            }
        }
        for i in m..n {
            c[(i, i - m)] = 1.0;
        }
        c.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn mat_mul(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for k in 0..m {
            let aik = a[i * m + k];
            if aik != 0.0 {
                for j in 0..m {
                    out[i * m + j] += aik * b[k * m + j];
                }
            }
        }
    }
    out
}

/// `H_0 = I`, `H_i = -Σ_k A_k H_{i-k}`, truncated once the largest entry stays
/// below `threshold` for `p` consecutive lags.
pub fn mv_impulse_tensor(model: &MultivariateArModel, threshold: f64) -> Result<ImpulseTensor, ArError> {
    let m = model.channels;
    let p = model.coeffs.len();
    let mut eye = vec![0.0; m * m];
    for i in 0..m {
        eye[i * m + i] = 1.0;
    }
    let mut h = vec![eye];
    if p == 0 {
        return Ok(ImpulseTensor { channels: m, h, l_ir: 0 });
    }
    let mut quiet = 0usize;
    let mut i = 0usize;
    loop {
        i += 1;
        if i > MAX_IR_LEN + p {
            return Err(ArError::TruncationCapExceeded { threshold, cap: MAX_IR_LEN });
        }
        let mut next = vec![0.0; m * m];
        for k in 1..=p.min(i) {
            let prod = mat_mul(&model.coeffs[k - 1], &h[i - k], m);
            for (x, y) in next.iter_mut().zip(&prod) {
                *x -= y;
            }
        }
        let peak = next.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        h.push(next);
        if peak < threshold {
            quiet += 1;
            if quiet == p {
                let l_ir = i + 1 - p;
                h.truncate(l_ir + 1);
                return Ok(ImpulseTensor { channels: m, h, l_ir });
            }
        } else {
            quiet = 0;
        }
    }
}

/// Matrix `G_n[p][q] = Σ_i h_{i,p,q}^n` in working precision.
fn power_sum_matrix<T: Scalar>(tensor: &ImpulseTensor, n: usize) -> Vec<T> {
    let m = tensor.channels;
    let mut g = vec![T::zero(); m * m];
    for hi in &tensor.h {
        for (gj, &v) in g.iter_mut().zip(hi) {
            *gj = *gj + T::of(v).powi(n as i32);
        }
    }
    g
}

/// Output cumulants per channel: `κ_{y_p,n} = Σ_q G_n[p][q] κ_{u_q,n}`.
pub fn mv_forward_cumulants<T: Scalar>(
    k_in: &[CumulantVector<T>],
    tensor: &ImpulseTensor,
) -> Result<Vec<CumulantVector<T>>, ArError> {
    let m = tensor.channels;
    if k_in.len() != m {
        return Err(ArError::ChannelMismatch { expected: m, got: k_in.len() });
    }
    let order = k_in.iter().map(|k| k.len()).min().unwrap_or(0);
    let mut out = vec![Vec::with_capacity(order); m];
    for n in 1..=order {
        let g = power_sum_matrix::<T>(tensor, n);
        for p in 0..m {
            let mut acc = T::zero();
            for q in 0..m {
                acc = acc + g[p * m + q] * k_in[q].kappa[n - 1];
            }
            out[p].push(acc);
        }
    }
    Ok(out.into_iter().map(CumulantVector::new).collect())
}

/// Input cumulants per channel from output cumulants, one `M×M` solve per order.
pub fn mv_backsolve_cumulants<T: Scalar>(
    k_out: &[CumulantVector<T>],
    tensor: &ImpulseTensor,
) -> Result<Vec<CumulantVector<T>>, ArError> {
    let m = tensor.channels;
    if k_out.len() != m {
        return Err(ArError::ChannelMismatch { expected: m, got: k_out.len() });
    }
    let order = k_out.iter().map(|k| k.len()).min().unwrap_or(0);
    let mut out = vec![Vec::with_capacity(order); m];
    for n in 1..=order {
        let g = power_sum_matrix::<T>(tensor, n);
        let rhs: Vec<T> = k_out.iter().map(|k| k.kappa[n - 1]).collect();
        let (sol, cond) = match linalg::solve_refined(&g, m, &rhs) {
            Ok(v) => v,
            Err(_) => return Err(ArError::SingularCumulantSystem { n, cond: f64::INFINITY }),
        };
        if !(cond <= MV_COND_LIMIT) {
            return Err(ArError::SingularCumulantSystem { n, cond });
        }
        for p in 0..m {
            out[p].push(sol[p]);
        }
    }
    Ok(out.into_iter().map(CumulantVector::new).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::DoubleDouble;
    use proptest::prelude::*;

    #[test]
    fn exp_cosine_values() {
        let p = ExpCosine { t0: 8.0, period: 10.0, d: 0.6 };
        let r = exp_cosine_acf(&p, 0.1, 2).unwrap();
        assert_eq!(r[0], 1.0);
        assert!((r[1] - (-1.25f64).exp()).abs() < 1e-15);
        assert!((r[1] - 0.28650).abs() < 1e-5);
        let pure = exp_cosine_acf(&ExpCosine { t0: 2.0, period: 3.0, d: 1e-12 }, 1.0, 5).unwrap();
        for (k, v) in pure.iter().enumerate() {
            assert!((v - (-(k as f64) / 2.0).exp()).abs() < 1e-11);
        }
        assert!(exp_cosine_acf(&ExpCosine { t0: 1.0, period: 1.0, d: 1.0 }, 1.0, 3).is_err());
    }

    #[test]
    fn acf_spec_json_forms() {
        let a: AcfSpec = serde_json::from_str(r#"{"model":"exp_cosine","t0":8,"T0":10,"d":0.6}"#).unwrap();
        assert_eq!(a, AcfSpec::exp_cosine(8.0, 10.0, 0.6));
        let b: AcfSpec = serde_json::from_str(r#"{"lags":[1,0.9,0.5]}"#).unwrap();
        assert_eq!(b.values(1.0, 3).unwrap(), vec![1.0, 0.9, 0.5]);
        assert!(serde_json::from_str::<AcfSpec>(r#"{"model":"exp_cosine","t0":8,"T0":10,"d":0.6,"x":1}"#).is_err());
    }

    #[test]
    fn ar1_identity() {
        let rho: f64 = 0.7;
        let acf: Vec<f64> = (0..3).map(|k| rho.powi(k)).collect();
        let m = yule_walker(&acf, 1, 1e-3).unwrap();
        assert!((m.a[0] + rho).abs() < 1e-15);
    }

    #[test]
    fn white_acf_gives_zero_coefficients() {
        let m = yule_walker(&[1.0, 0.0, 0.0, 0.0], 3, 1e-3).unwrap();
        assert!(m.a.iter().all(|&v| v == 0.0));
        assert_eq!(m.h[0], 1.0);
        assert!(m.h[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ar2_round_trip() {
        let a = [-0.9, 0.1];
        let acf = theoretical_acf(&a, 6).unwrap();
        let m = yule_walker(&acf, 2, 1e-3).unwrap();
        assert!((m.a[0] - a[0]).abs() < 1e-12 && (m.a[1] - a[1]).abs() < 1e-12);
    }

    #[test]
    fn non_positive_definite_rejected() {
        assert!(matches!(yule_walker(&[1.0, 1.0, 1.0], 2, 1e-3), Err(ArError::NotPositiveDefinite { .. })));
        assert!(matches!(yule_walker(&[1.0, 0.9, -0.9], 2, 1e-3), Err(ArError::NotPositiveDefinite { .. })));
    }

    #[test]
    fn geometric_impulse_response() {
        let (h, l) = impulse_response(&[-0.5], 1e-3).unwrap();
        assert_eq!(l, 10);
        assert_eq!(h.len(), 11);
        for (i, v) in h.iter().enumerate() {
            assert_eq!(*v, 0.5f64.powi(i as i32));
        }
        assert_eq!(impulse_response(&[], 1e-3).unwrap(), (vec![1.0], 0));
    }

    #[test]
    fn eq12_sign_gives_alternating_response() {
        // a = (0.9, -0.1) has a unit root at z = -1 under this convention.
        assert!(matches!(ArModel::new(vec![0.9, -0.1], 1e-3), Err(ArError::UnstableModel { .. })));
        let h = impulse_recursion::<f64>(&[0.9, -0.1], 200);
        assert_eq!(h[1], -0.9);
        assert!(h[199].abs() > 0.9);
        let m = ArModel::new(vec![-0.9, 0.1], 1e-3).unwrap();
        assert!(m.h.iter().all(|&v| v > 0.0));
        assert_eq!(m.h[1], 0.9);
    }

    #[test]
    fn filtering_an_impulse_reproduces_h() {
        let m = ArModel::new(vec![-0.9, 0.1], 1e-3).unwrap();
        let mut u = vec![0.0; m.h.len()];
        u[0] = 1.0;
        assert_eq!(m.filter(&u), m.h);
    }

    #[test]
    fn iota_one_approaches_dc_gain() {
        let m = ArModel::new(vec![-0.9, 0.1], 1e-3).unwrap();
        let iota = m.power_sums::<f64>(1)[0];
        assert!((iota - m.dc_gain()).abs() < 1e-2);
        let tight = ArModel::new(vec![-0.9, 0.1], 1e-12).unwrap();
        assert!((tight.power_sums::<f64>(1)[0] - tight.dc_gain()).abs() < 1e-10);
    }

    #[test]
    fn hold_down_skips_early_zero_crossings() {
        // Oscillating response whose samples dip below the threshold before the
        // envelope has decayed.
        let a = [-2.0 * 0.99 * (0.5f64).cos(), 0.99 * 0.99];
        let (h, l) = impulse_response(&a, 1e-3).unwrap();
        assert_eq!(h.len(), l + 1);
        assert!(l > 300);
    }

    #[test]
    fn cap_is_enforced() {
        let err = impulse_response(&[-0.999_999_9], 1e-3).unwrap_err();
        assert!(matches!(err, ArError::TruncationCapExceeded { .. }));
    }

    #[test]
    fn decoupled_and_coupled_tensors() {
        let d = MultivariateArModel::new(2, vec![vec![-0.5, 0.0, 0.0, -0.2]]).unwrap();
        let t = mv_impulse_tensor(&d, 1e-6).unwrap();
        for i in 0..=t.l_ir {
            assert!((t.at(i, 0, 0) - 0.5f64.powi(i as i32)).abs() < 1e-15);
            assert!((t.at(i, 1, 1) - 0.2f64.powi(i as i32)).abs() < 1e-15);
            assert_eq!(t.at(i, 0, 1), 0.0);
        }
        let a1 = vec![-0.4, 0.2, -0.1, -0.3];
        let c = MultivariateArModel::new(2, vec![a1.clone()]).unwrap();
        let t = mv_impulse_tensor(&c, 1e-8).unwrap();
        let neg: Vec<f64> = a1.iter().map(|v| -v).collect();
        let mut pow = vec![1.0, 0.0, 0.0, 1.0];
        for i in 0..6 {
            for (x, y) in t.h[i].iter().zip(&pow) {
                assert!((x - y).abs() < 1e-15);
            }
            pow = mat_mul(&neg, &pow, 2);
        }
    }

    #[test]
    fn single_channel_matches_univariate() {
        let a = vec![-0.9, 0.1];
        let uni = ArModel::new(a.clone(), 1e-3).unwrap();
        let mv = MultivariateArModel::new(1, a.iter().map(|&v| vec![v]).collect()).unwrap();
        let t = mv_impulse_tensor(&mv, 1e-3).unwrap();
        assert_eq!(t.l_ir, uni.l_ir);
        let k_out = vec![CumulantVector::new(vec![1.0, 2.0, 3.0])];
        let back = mv_backsolve_cumulants(&k_out, &t).unwrap();
        let want = cumseries::backsolve_input_cumulants(&k_out[0], &uni.h).unwrap();
        for (x, y) in back[0].kappa.iter().zip(&want.kappa) {
            assert!((x - y).abs() < 1e-13 * y.abs());
        }
    }

    #[test]
    fn singular_cumulant_system_detected() {
        // Identical channels feeding both outputs equally.
        let t = ImpulseTensor { channels: 2, h: vec![vec![1.0, 1.0, 1.0, 1.0]], l_ir: 0 };
        let k = vec![CumulantVector::new(vec![1.0]), CumulantVector::new(vec![1.0])];
        assert!(matches!(mv_backsolve_cumulants(&k, &t), Err(ArError::SingularCumulantSystem { n: 1, .. })));
    }

    proptest! {
        #[test]
        fn yule_walker_reproduces_fitted_lags(k in prop::collection::vec(-0.9f64..0.9, 1..6)) {
            // Random reflection coefficients give a random stable model.
            let mut phi: Vec<f64> = Vec::new();
            for (m, &km) in k.iter().enumerate() {
                let prev = phi.clone();
                for j in 0..m {
                    phi[j] = prev[j] - km * prev[m - 1 - j];
                }
                phi.push(km);
            }
            let a: Vec<f64> = phi.iter().map(|v| -v).collect();
            let p = a.len();
            let acf = theoretical_acf(&a, p + 1).unwrap();
            let m = yule_walker(&acf, p, 1e-3).unwrap();
            let back = m.theoretical_acf(p + 1);
            for (x, y) in acf.iter().zip(&back) {
                prop_assert!((x - y).abs() < 1e-8);
            }
        }

        #[test]
        fn multichannel_round_trip(
            a in prop::collection::vec(-0.35f64..0.35, 4),
            k in prop::collection::vec(0.1f64..2.0, 8),
        ) {
            let model = MultivariateArModel::new(2, vec![a]).unwrap();
            let t = mv_impulse_tensor(&model, 1e-12).unwrap();
            let k_in: Vec<CumulantVector<DoubleDouble>> = k
                .chunks(4)
                .map(|c| CumulantVector::new(c.iter().map(|&v| DoubleDouble::from(v)).collect()))
                .collect();
            let k_out = mv_forward_cumulants(&k_in, &t).unwrap();
            let back = mv_backsolve_cumulants(&k_out, &t).unwrap();
            for (x, y) in k_in.iter().zip(&back) {
                for (u, v) in x.kappa.iter().zip(&y.kappa) {
                    prop_assert!(((*u - *v) / *u).lossy().abs() < 1e-20);
                }
            }
        }
    }
}
