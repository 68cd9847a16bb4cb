//! Analytic continuation of the input's Laplace transform from its series,
//! density recovery, and the theoretical AR-output transform.

pub mod ilt;

use num_complex::Complex64;
use rustfft::FftPlanner;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cumseries::{PowerSeries, SeriesKind};
use crate::pade::{self, DropReason, FilterOptions, PadeApproximant, PadeError, PoleForm, PoleResidueForm};
use crate::scalar::Scalar;
use crate::special::i1e;

pub use ilt::{pdf_via_fft_ilt, IltError, IltOutput, IltParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuationError {
    #[error(transparent)]
    Pade(#[from] PadeError),
    #[error(transparent)]
    Ilt(#[from] IltError),
    #[error("no order down to L = {min_l} yields an all-real positive product form: {attempts:?}")]
    ComplexPoleStructure { min_l: usize, attempts: Vec<String> },
    #[error("series kind {found:?} does not match the requested continuation path")]
    WrongSeries { found: SeriesKind },
    #[error("operation requires the {0} path")]
    WrongPath(&'static str),
    #[error("evaluation point {0} coincides with a pole")]
    PoleHit(Complex64),
    #[error("invalid Padé configuration: {0}")]
    BadConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    F64,
    DoubleDouble,
}

/// Padé orders and pole-hygiene settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PadeConfig {
    #[serde(rename = "K", default = "default_k")]
    pub k: usize,
    #[serde(rename = "L", default = "default_l")]
    pub l: usize,
    /// Lowest denominator order tried when complex pole structure forces a rescan.
    #[serde(rename = "min_L", default = "default_min_l")]
    pub min_l: usize,
    /// Relative imaginary part below which poles and weights are snapped to real.
    #[serde(default = "default_pair_tol")]
    pub pair_tol: f64,
    #[serde(default = "default_precision")]
    pub precision: Precision,
}

fn default_k() -> usize {
    16
}
fn default_l() -> usize {
    17
}
fn default_min_l() -> usize {
    8
}
fn default_pair_tol() -> f64 {
    1e-6
}
fn default_precision() -> Precision {
    Precision::DoubleDouble
}

impl Default for PadeConfig {
    fn default() -> Self {
        Self {
            k: default_k(),
            l: default_l(),
            min_l: default_min_l(),
            pair_tol: default_pair_tol(),
            precision: default_precision(),
        }
    }
}

impl PadeConfig {
    pub fn validate(&self) -> Result<(), ContinuationError> {
        if !(self.k == self.l || self.k + 1 == self.l) {
            return Err(ContinuationError::BadConfig(format!(
                "order [{}, {}] must be diagonal or sub-diagonal",
                self.k, self.l
            )));
        }
        if self.l == 0 || self.min_l == 0 || self.min_l > self.l {
            return Err(ContinuationError::BadConfig(format!("need 1 <= min_L <= L, got min_L = {}, L = {}", self.min_l, self.l)));
        }
        if !(self.pair_tol > 0.0 && self.pair_tol < 1.0) {
            return Err(ContinuationError::BadConfig("pair_tol must lie in (0, 1)".into()));
        }
        Ok(())
    }

    /// Cumulant count needed by the cumulant path: `K + L + 2`.
    pub fn cumulant_depth(&self) -> usize {
        self.k + self.l + 2
    }

    fn filter_options(&self) -> FilterOptions {
        FilterOptions { pair_tol: self.pair_tol, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuationPath {
    MomentPath,
    CumulantPath,
}

/// How the recovered transform is represented.
#[derive(Debug, Clone, PartialEq)]
pub enum LtRepr {
    Poles(PoleResidueForm<f64>),
    /// Moment-path approximant whose denominator has repeated roots; it is
    /// evaluated as `P/Q` and has no pole-residue form.
    Rational(PadeApproximant<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredLt {
    pub path: ContinuationPath,
    pub repr: LtRepr,
    /// Orders actually used, after any reduction.
    pub k: usize,
    pub l: usize,
    pub hankel_cond: f64,
    pub diagnostics: Vec<String>,
}

fn pole_hit_guard(v: Complex64, s: Complex64) -> Result<Complex64, ContinuationError> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(ContinuationError::PoleHit(s))
    }
}

impl RecoveredLt {
    pub fn prf(&self) -> Option<&PoleResidueForm<f64>> {
        match &self.repr {
            LtRepr::Poles(p) => Some(p),
            LtRepr::Rational(_) => None,
        }
    }

    /// Polynomial remainder of a diagonal approximant (shift on the cumulant path).
    pub fn constant_part(&self) -> f64 {
        self.prf().map(|p| p.constant).unwrap_or(0.0)
    }

    /// Cumulant path only: the exponent `-c s - Σ λ_j s/(s + a_j)`.
    pub fn log_lt(&self, s: Complex64) -> Result<Complex64, ContinuationError> {
        let prf = match (&self.repr, self.path) {
            (LtRepr::Poles(p), ContinuationPath::CumulantPath) => p,
            _ => return Err(ContinuationError::WrongPath("cumulant")),
        };
        let mut acc = -s * prf.constant;
        for t in &prf.terms {
            let d = s + t.a;
            if d.norm() == 0.0 {
                return Err(ContinuationError::PoleHit(s));
            }
            acc -= t.lambda * s / d;
        }
        pole_hit_guard(acc, s)
    }

    pub fn eval_lt(&self, s: Complex64) -> Result<Complex64, ContinuationError> {
        match (&self.repr, self.path) {
            (LtRepr::Poles(_), ContinuationPath::CumulantPath) => Ok(self.log_lt(s)?.exp()),
            (LtRepr::Poles(prf), ContinuationPath::MomentPath) => {
                let mut acc = Complex64::new(prf.constant, 0.0);
                for t in &prf.terms {
                    let d = s + t.a;
                    if d.norm() == 0.0 {
                        return Err(ContinuationError::PoleHit(s));
                    }
                    acc += t.lambda / d;
                }
                pole_hit_guard(acc, s)
            }
            (LtRepr::Rational(pa), _) => pole_hit_guard(pa.eval(s), s),
        }
    }

    /// Terms of the product form as real `(a, λ)` pairs.
    pub fn real_terms(&self) -> Result<Vec<(f64, f64)>, ContinuationError> {
        match (&self.repr, self.path) {
            (LtRepr::Poles(p), ContinuationPath::CumulantPath) => {
                Ok(p.terms.iter().map(|t| (t.a.re, t.lambda.re)).collect())
            }
            _ => Err(ContinuationError::WrongPath("cumulant")),
        }
    }

    /// Mean implied by the recovered transform, `-d/ds log L` at 0.
    pub fn mean(&self) -> Result<f64, ContinuationError> {
        let terms = self.real_terms()?;
        Ok(self.constant_part() + terms.iter().map(|(a, l)| l / a).sum::<f64>())
    }

    pub fn variance(&self) -> Result<f64, ContinuationError> {
        let terms = self.real_terms()?;
        Ok(terms.iter().map(|(a, l)| 2.0 * l / (a * a)).sum())
    }
}

/// Continue the cumulant series into the product-of-exponentials form.
///
/// A singular Hankel system reduces the order along the same diagonal. Genuinely
/// complex pole pairs, repeated roots, or a fully discarded form trigger a rescan
/// at lower `L`, down to `min_L`.
pub fn recover_cumulant_path<T: Scalar>(series: &PowerSeries<T>, cfg: &PadeConfig) -> Result<RecoveredLt, ContinuationError> {
    cfg.validate()?;
    if series.kind != SeriesKind::CumulantExpansion {
        return Err(ContinuationError::WrongSeries { found: series.kind });
    }
    let offset = cfg.l - cfg.k;
    let mut notes = Vec::new();
    let mut attempts = Vec::new();
    let mut last_singular = None;
    for l in (offset.max(1)..=cfg.l).rev() {
        let k = l - offset;
        let pa = match pade::fit(series, k, l) {
            Ok(pa) => pa,
            Err(e @ PadeError::SingularHankel { .. }) => {
                notes.push(format!("[{k}, {l}]: {e}; reducing order"));
                last_singular = Some(e);
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let outcome = pade::to_pole_residue(&pa, PoleForm::ProductOfExponentials)
            .and_then(|prf| pade::filter_poles(&prf, &cfg.filter_options()));
        let failure = match outcome {
            Ok(prf) => {
                let complex: usize = prf
                    .dropped
                    .iter()
                    .filter(|d| d.reason == DropReason::ComplexPair && d.significant)
                    .count();
                if complex == 0 {
                    notes.extend(prf.warnings.iter().cloned());
                    if (k, l) != (cfg.k, cfg.l) {
                        let msg = format!("cumulant path used order [{k}, {l}] instead of [{}, {}]", cfg.k, cfg.l);
                        log::warn!("{msg}");
                        notes.push(msg);
                    }
                    return Ok(RecoveredLt {
                        path: ContinuationPath::CumulantPath,
                        repr: LtRepr::Poles(prf.to_f64()),
                        k,
                        l,
                        hankel_cond: pa.hankel_cond,
                        diagnostics: notes,
                    });
                }
                format!("[{k}, {l}]: {complex} significant complex pole terms")
            }
            Err(e @ (PadeError::RepeatedRoots { .. } | PadeError::AllPolesDiscarded { .. })) => format!("[{k}, {l}]: {e}"),
            Err(e) => return Err(e.into()),
        };
        log::warn!("{failure}");
        attempts.push(failure);
        if l <= cfg.min_l || l == offset.max(1) {
            return Err(ContinuationError::ComplexPoleStructure { min_l: cfg.min_l, attempts });
        }
    }
    match last_singular {
        Some(e) => Err(e.into()),
        None => Err(ContinuationError::ComplexPoleStructure { min_l: cfg.min_l, attempts }),
    }
}

/// Continue the moment series into the sum-of-poles form.
///
/// Singular Hankel systems reduce the order along the same diagonal; repeated
/// denominator roots fall back to evaluating `P/Q` directly.
pub fn recover_moment_path<T: Scalar>(series: &PowerSeries<T>, cfg: &PadeConfig) -> Result<RecoveredLt, ContinuationError> {
    cfg.validate()?;
    if series.kind != SeriesKind::MomentExpansion {
        return Err(ContinuationError::WrongSeries { found: series.kind });
    }
    let offset = cfg.l - cfg.k;
    let mut notes = Vec::new();
    let mut last_err = None;
    for l in (offset.max(1)..=cfg.l).rev() {
        let k = l - offset;
        let pa = match pade::fit(series, k, l) {
            Ok(pa) => pa,
            Err(e @ PadeError::SingularHankel { .. }) => {
                notes.push(format!("[{k}, {l}]: {e}; reducing order"));
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        if (k, l) != (cfg.k, cfg.l) {
            let msg = format!("moment path used order [{k}, {l}] instead of [{}, {}]", cfg.k, cfg.l);
            log::warn!("{msg}");
            notes.push(msg);
        }
        let repr = match pade::to_pole_residue(&pa, PoleForm::SumOfPoles) {
            Ok(prf) => {
                let filtered = pade::filter_poles(&prf, &cfg.filter_options())?;
                notes.extend(filtered.warnings.iter().cloned());
                LtRepr::Poles(filtered.to_f64())
            }
            Err(e @ PadeError::RepeatedRoots { .. }) => {
                notes.push(format!("{e}; evaluating the approximant as P/Q"));
                LtRepr::Rational(pa.to_f64())
            }
            Err(e) => return Err(e.into()),
        };
        return Ok(RecoveredLt {
            path: ContinuationPath::MomentPath,
            repr,
            k,
            l,
            hankel_cond: pa.hankel_cond,
            diagnostics: notes,
        });
    }
    Err(last_err.map(Into::into).unwrap_or(ContinuationError::BadConfig("no admissible order".into())))
}

/// Exponential-mixture density `Σ λ_j e^{-a_j u}` of the moment path.
#[derive(Debug, Clone, Serialize)]
pub struct MomentPathPdf {
    pub density: Vec<f64>,
    /// True when the mixture goes negative anywhere on the grid.
    pub invalid: bool,
    pub min_density: f64,
}

pub fn pdf_moment_path(r: &RecoveredLt, u_grid: &[f64]) -> Result<MomentPathPdf, ContinuationError> {
    let prf = match (&r.repr, r.path) {
        (LtRepr::Poles(p), ContinuationPath::MomentPath) => p,
        _ => return Err(ContinuationError::WrongPath("moment (pole-residue)")),
    };
    let density: Vec<f64> = u_grid
        .iter()
        .map(|&u| prf.terms.iter().map(|t| (t.lambda * (-t.a * u).exp()).re).sum())
        .collect();
    let min_density = density.iter().copied().fold(f64::INFINITY, f64::min);
    let invalid = min_density < 0.0;
    if invalid {
        log::warn!("moment-path density is negative (minimum {min_density:.3e})");
    }
    Ok(MomentPathPdf { density, invalid, min_density })
}

/// Law of one product factor: mass `e^{-λ}` at zero plus the density
/// `e^{-au-λ} √(aλ/u) I_1(2√(aλu))`.
pub fn component_pdf_zj(a: f64, lambda: f64, u_grid: &[f64]) -> (f64, Vec<f64>) {
    let atom = (-lambda).exp();
    let density = u_grid.iter().map(|&u| component_density(a, lambda, u)).collect();
    (atom, density)
}

fn component_density(a: f64, lambda: f64, u: f64) -> f64 {
    if lambda <= 0.0 || u < 0.0 {
        return 0.0;
    }
    if u == 0.0 {
        return a * lambda * (-lambda).exp();
    }
    let x = 2.0 * (a * lambda * u).sqrt();
    (-a * u - lambda + x).exp() * (a * lambda / u).sqrt() * i1e(x)
}

/// Law of `Σ_j Z_j` by direct numerical convolution of the component laws on
/// the uniform grid `0, du, ..., (n-1) du`: returns the origin mass and density.
pub fn pdf_via_component_convolution(terms: &[(f64, f64)], du: f64, n: usize) -> (f64, Vec<f64>) {
    let grid: Vec<f64> = (0..n).map(|k| k as f64 * du).collect();
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut atom = 1.0;
    let mut dens = vec![0.0; n];
    for &(a, lambda) in terms {
        let (p, g) = component_pdf_zj(a, lambda, &grid);
        // Trapezoid convolution Δ[Σ_{m=0..k} F_m g_{k-m} - (F_0 g_k + F_k g_0)/2].
        let mut fa: Vec<Complex64> = dens.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fa.resize(size, Complex64::new(0.0, 0.0));
        let mut ga: Vec<Complex64> = g.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        ga.resize(size, Complex64::new(0.0, 0.0));
        fwd.process(&mut fa);
        fwd.process(&mut ga);
        let mut prod: Vec<Complex64> = fa.iter().zip(&ga).map(|(x, y)| x * y).collect();
        inv.process(&mut prod);
        let scale = 1.0 / size as f64;
        let next: Vec<f64> = (0..n)
            .map(|k| {
                let full = prod[k].re * scale;
                let conv = du * (full - 0.5 * (dens[0] * g[k] + dens[k] * g[0]));
                atom * g[k] + p * dens[k] + conv
            })
            .collect();
        dens = next;
        atom *= p;
    }
    (atom, dens)
}

/// Laplace transform of the filtered output: `Π_i L_U(h_i s)`, summed in the
/// exponent for the cumulant path.
pub fn ar_output_lt(input: &RecoveredLt, h: &[f64], s: Complex64) -> Result<Complex64, ContinuationError> {
    match (&input.repr, input.path) {
        (LtRepr::Poles(_), ContinuationPath::CumulantPath) => {
            let mut acc = Complex64::new(0.0, 0.0);
            for &hi in h {
                if hi != 0.0 {
                    acc += input.log_lt(s * hi)?;
                }
            }
            Ok(acc.exp())
        }
        _ => {
            let mut acc = Complex64::new(1.0, 0.0);
            for &hi in h {
                acc *= input.eval_lt(s * hi)?;
            }
            Ok(acc)
        }
    }
}

/// Density of the filtered output by Laplace inversion of [`ar_output_lt`].
pub fn ar_output_pdf(input: &RecoveredLt, h: &[f64], y_grid: &[f64], params: &IltParams) -> Result<IltOutput, ContinuationError> {
    let terms = input.real_terms()?;
    if !ilt::check_grid(y_grid) {
        return Err(IltError::BadGrid.into());
    }
    let nonzero = h.iter().filter(|&&v| v != 0.0).count() as f64;
    let lambda_sum: f64 = terms.iter().map(|t| t.1).sum();
    let atom = (-nonzero * lambda_sum).exp();
    let shift = input.constant_part() * h.iter().sum::<f64>();
    // Negative taps evaluate L_U left of the origin; keep the contour clear of -a_min.
    let mut p = params.clone();
    let neg = h.iter().copied().fold(0.0f64, |m, v| m.max(-v));
    if neg > 0.0 {
        let a_min = terms.iter().map(|t| t.0).fold(f64::INFINITY, f64::min);
        let y_max = *y_grid.last().unwrap();
        let sigma = p.sigma.unwrap_or(2.0 / y_max).min(0.5 * a_min / neg);
        p.sigma = Some(sigma);
    }
    let inner_grid: Vec<f64> = y_grid.iter().map(|y| y - shift).filter(|&v| v >= 0.0).collect();
    let skipped = y_grid.len() - inner_grid.len();
    let lt = |s: Complex64| {
        let v = ar_output_lt(input, h, s).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        v * (s * shift).exp()
    };
    let mut out = if inner_grid.is_empty() || *inner_grid.last().unwrap() == 0.0 {
        IltOutput { density: vec![0.0; inner_grid.len()], atom, ls_used: 0, sigma: 0.0, period: 0.0, negative_count: 0, min_density: 0.0 }
    } else {
        ilt::pdf_via_fft_ilt_with_atom(lt, &inner_grid, &p, Some(atom))?
    };
    let mut density = vec![0.0; skipped];
    density.extend(out.density);
    out.density = density;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pade::PoleTerm;

    fn product(terms: &[(f64, f64)]) -> RecoveredLt {
        RecoveredLt {
            path: ContinuationPath::CumulantPath,
            repr: LtRepr::Poles(PoleResidueForm {
                form: PoleForm::ProductOfExponentials,
                terms: terms
                    .iter()
                    .map(|&(a, l)| PoleTerm { a: Complex64::new(a, 0.0), lambda: Complex64::new(l, 0.0) })
                    .collect(),
                constant: 0.0,
                discarded_count: 0,
                dropped: Vec::new(),
                warnings: Vec::new(),
            }),
            k: 0,
            l: terms.len(),
            hankel_cond: 1.0,
            diagnostics: Vec::new(),
        }
    }

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn product_form_values() {
        let r = product(&[(1.0, 1.0)]);
        assert_eq!(r.eval_lt(Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(1.0, 0.0));
        let v = r.eval_lt(Complex64::new(1.0, 0.0)).unwrap();
        assert!((v.re - (-0.5f64).exp()).abs() < 1e-15);
        let far = r.eval_lt(Complex64::new(1e12, 0.0)).unwrap();
        assert!((far.re - (-1f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn pole_hit_reported() {
        let r = product(&[(1.0, 1.0)]);
        assert!(matches!(r.eval_lt(Complex64::new(-1.0, 0.0)), Err(ContinuationError::PoleHit(_))));
    }

    #[test]
    fn moment_path_mixtures() {
        let mut r = product(&[(1.0, 2.0), (2.0, -2.0)]);
        r.path = ContinuationPath::MomentPath;
        if let LtRepr::Poles(p) = &mut r.repr {
            p.form = PoleForm::SumOfPoles;
        }
        let u = grid(0.0, 30.0, 3001);
        let pdf = pdf_moment_path(&r, &u).unwrap();
        assert!(!pdf.invalid);
        let mass: f64 = pdf.density.windows(2).map(|w| 0.005 * (w[0] + w[1])).sum();
        assert!((mass - 1.0).abs() < 1e-4);

        let mut neg = product(&[(1.0, -1.0)]);
        neg.path = ContinuationPath::MomentPath;
        assert!(pdf_moment_path(&neg, &u).unwrap().invalid);
        assert!(pdf_moment_path(&product(&[(1.0, 1.0)]), &u).is_err());
    }

    #[test]
    fn component_law_has_unit_mass() {
        let u = grid(0.0, 60.0, 60001);
        let (atom, d) = component_pdf_zj(1.0, 1.0, &u);
        assert!((atom - (-1f64).exp()).abs() < 1e-15);
        let mass: f64 = d.windows(2).map(|w| 0.0005 * (w[0] + w[1])).sum();
        assert!((mass - (1.0 - (-1f64).exp())).abs() < 1e-4, "{mass}");
        let (atom0, d0) = component_pdf_zj(1.0, 1e-12, &u);
        assert!((atom0 - 1.0).abs() < 1e-11 && d0.iter().all(|&v| v < 1e-11));
    }

    #[test]
    fn component_density_value_and_ilt_cross_check() {
        let (_, d) = component_pdf_zj(2.0, 0.5, &[1.0]);
        let want = (-2.5f64).exp() * puruspe::In(1, 2.0);
        assert!((d[0] - want).abs() < 1e-14);
        let u = grid(0.05, 10.0, 100);
        let (atom, dens) = component_pdf_zj(2.0, 0.5, &u);
        // A lone factor keeps a density aλe^{-λ} at the origin, so its transform
        // decays only like 1/ω.
        let params = IltParams { decay_threshold: 1e-4, ..Default::default() };
        let out = ilt::pdf_via_fft_ilt(|s| (-0.5 * s / (s + 2.0)).exp(), &u, &params).unwrap();
        assert!((out.atom - atom).abs() < 1e-12);
        for (x, y) in dens.iter().zip(&out.density) {
            assert!((x - y).abs() < 1e-3);
        }
    }

    #[test]
    fn identity_filter_and_origin() {
        let r = product(&[(1.0, 0.7), (4.0, 2.0)]);
        let s = Complex64::new(0.3, 2.0);
        assert!((ar_output_lt(&r, &[1.0], s).unwrap() - r.eval_lt(s).unwrap()).norm() < 1e-15);
        assert_eq!(ar_output_lt(&r, &[1.0, 0.5, 0.25], Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn two_factor_output_matches_convolution() {
        let r = product(&[(1.5, 3.0), (6.0, 4.0)]);
        let du = 0.002;
        let n = 5000;
        let (atom, conv) = pdf_via_component_convolution(&r.real_terms().unwrap(), du, n);
        let y: Vec<f64> = (50..n).step_by(25).map(|k| k as f64 * du).collect();
        let params = IltParams { decay_threshold: 1e-4, ..Default::default() };
        let out = ar_output_pdf(&r, &[1.0], &y, &params).unwrap();
        assert!((atom - (-7f64).exp()).abs() < 1e-15);
        for (yy, v) in y.iter().zip(&out.density) {
            let k = (yy / du).round() as usize;
            assert!((v - conv[k]).abs() < 1e-3, "y={yy}: {v} vs {}", conv[k]);
        }
    }

    #[test]
    fn shift_rule() {
        let mut r = product(&[(2.0, 3.0)]);
        let y = grid(0.05, 6.0, 60);
        let params = IltParams { decay_threshold: 1e-4, ..Default::default() };
        let base = ar_output_pdf(&r, &[1.0], &y, &params).unwrap();
        if let LtRepr::Poles(p) = &mut r.repr {
            p.constant = 0.5;
        }
        let shifted_grid: Vec<f64> = y.iter().map(|v| v + 0.5).collect();
        let shifted = ar_output_pdf(&r, &[1.0], &shifted_grid, &params).unwrap();
        for (a, b) in base.density.iter().zip(&shifted.density) {
            assert!((a - b).abs() < 1e-6);
        }
        let s = Complex64::new(0.7, 0.2);
        let mut plain = r.clone();
        if let LtRepr::Poles(p) = &mut plain.repr {
            p.constant = 0.0;
        }
        let ratio = r.eval_lt(s).unwrap() / plain.eval_lt(s).unwrap();
        assert!((ratio - (-s * 0.5).exp()).norm() < 1e-14);
    }
}
