//! Empirical estimators, MAE metrics and the Monte Carlo harness.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::continuation::IltParams;
use crate::dist::DistError;
use crate::rng::{trial_stream, RngStream, TEXTURE_STREAM};
use crate::sampler::Pipeline;

/// Environment variable capping the Monte Carlo worker count.
pub const THREADS_ENV: &str = "CLUTTER_FORGE_THREADS";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidateError {
    #[error("length mismatch: theoretical has {theoretical} values, empirical {empirical}")]
    LengthMismatch { theoretical: usize, empirical: usize },
    #[error("need at least one value")]
    Empty,
    #[error("invalid validation setting: {0}")]
    BadConfig(String),
    #[error("trial {trial}: {source}")]
    Trial { trial: usize, source: DistError },
}

/// Mean absolute error `(1/L) Σ |theo_i - emp_i|`.
pub fn mae(theoretical: &[f64], empirical: &[f64]) -> Result<f64, ValidateError> {
    if theoretical.len() != empirical.len() {
        return Err(ValidateError::LengthMismatch { theoretical: theoretical.len(), empirical: empirical.len() });
    }
    if theoretical.is_empty() {
        return Err(ValidateError::Empty);
    }
    Ok(theoretical.iter().zip(empirical).map(|(t, e)| (t - e).abs()).sum::<f64>() / theoretical.len() as f64)
}

/// Equal-width histogram over `[min, max]` of the samples, normalized to a density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub centers: Vec<f64>,
    pub density: Vec<f64>,
    pub width: f64,
}

pub fn empirical_pdf(samples: &[f64], n_bins: usize) -> Histogram {
    assert!(n_bins >= 2, "histogram needs at least two bins");
    assert!(!samples.is_empty(), "histogram of an empty sample");
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let n = samples.len() as f64;
    if hi == lo {
        // Degenerate sample: one occupied unit-width bin.
        let mut density = vec![0.0; n_bins];
        density[0] = 1.0;
        let centers = (0..n_bins).map(|i| lo + i as f64).collect();
        return Histogram { centers, density, width: 1.0 };
    }
    let width = (hi - lo) / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for &x in samples {
        let i = (((x - lo) / width) as usize).min(n_bins - 1);
        counts[i] += 1;
    }
    let centers = (0..n_bins).map(|i| lo + (i as f64 + 0.5) * width).collect();
    let density = counts.iter().map(|&c| c as f64 / (n * width)).collect();
    Histogram { centers, density, width }
}

/// Biased, mean-removed autocorrelation `r_0..r_{n_lags}` normalized by lag 0.
pub fn empirical_acf(samples: &[f64], n_lags: usize) -> Vec<f64> {
    let n = samples.len();
    assert!(n_lags < n, "need more samples than lags");
    let mean = samples.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = samples.iter().map(|v| v - mean).collect();
    let c0: f64 = x.iter().map(|v| v * v).sum();
    (0..=n_lags)
        .map(|k| {
            if c0 == 0.0 {
                return if k == 0 { 1.0 } else { 0.0 };
            }
            x[..n - k].iter().zip(&x[k..]).map(|(a, b)| a * b).sum::<f64>() / c0
        })
        .collect()
}

/// Empirical Laplace transform with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LtEstimate {
    pub s: Complex64,
    pub value: Complex64,
    /// Standard error of the mean, taken over `|e^{-s x} - value|`.
    pub std_err: f64,
}

pub fn empirical_lt(samples: &[f64], s_grid: &[Complex64]) -> Vec<LtEstimate> {
    let n = samples.len() as f64;
    s_grid
        .iter()
        .map(|&s| {
            let terms: Vec<Complex64> = samples.iter().map(|&x| (-s * x).exp()).collect();
            let value = terms.iter().sum::<Complex64>() / n;
            let var = terms.iter().map(|t| (t - value).norm_sqr()).sum::<f64>() / (n - 1.0).max(1.0);
            LtEstimate { s, value, std_err: (var / n).sqrt() }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Histogram bins; `null` selects `round(√L_sim)`.
    #[serde(default)]
    pub bins: Option<usize>,
    /// ACF lags compared, `1..=lags`.
    #[serde(default = "default_lags")]
    pub lags: usize,
}

fn default_trials() -> usize {
    50
}

fn default_lags() -> usize {
    200
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self { trials: default_trials(), bins: None, lags: default_lags() }
    }
}

/// Monte Carlo settings beyond the validation block.
#[derive(Debug, Clone)]
pub struct MonteCarloSetup<'a> {
    pub length: usize,
    pub seed: u64,
    /// Normalized target ACF `r_0..r_{lags}` (or longer).
    pub target_acf: &'a [f64],
    pub ilt: &'a IltParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub pdf_mae: f64,
    pub acf_mae: f64,
    pub negative_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub pdf_mae: f64,
    pub acf_mae: f64,
    pub n_bins: usize,
    pub n_lags: usize,
    pub trial_count: usize,
    pub length: usize,
    pub wall_time_s: f64,
    pub negative_fraction: f64,
    pub discarded_poles: usize,
    pub trials: Vec<TrialResult>,
}

/// Per-trial plot data: histogram against the target and ACF against the target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialCurves {
    pub histogram: Histogram,
    pub target_pdf: Vec<f64>,
    pub acf: Vec<f64>,
    pub target_acf: Vec<f64>,
}

/// Target density at the histogram centers; zero left of the support.
fn target_pdf_at(pipeline: &Pipeline, centers: &[f64], ilt: &IltParams) -> Result<Vec<f64>, DistError> {
    let first_pos = centers.iter().position(|&c| c >= 0.0).unwrap_or(centers.len());
    let mut out = vec![0.0; first_pos];
    if first_pos < centers.len() {
        out.extend(pipeline.metadata.distribution.reference_pdf(&centers[first_pos..], ilt)?);
    }
    Ok(out)
}

/// Simulate one trial and compare it with the target PDF and ACF.
pub fn evaluate_trial(
    pipeline: &Pipeline,
    setup: &MonteCarloSetup<'_>,
    cfg: &ValidateConfig,
    trial: usize,
) -> Result<(TrialResult, TrialCurves), ValidateError> {
    let bins = n_bins(cfg, setup.length);
    let mut rng = RngStream::with_stream(setup.seed, trial_stream(trial as u64, TEXTURE_STREAM));
    let texture = pipeline.simulate(setup.length, &mut rng);
    let histogram = empirical_pdf(&texture.samples, bins);
    let target_pdf = target_pdf_at(pipeline, &histogram.centers, setup.ilt).map_err(|source| ValidateError::Trial { trial, source })?;
    let acf = empirical_acf(&texture.samples, cfg.lags);
    let target_acf = setup.target_acf[..=cfg.lags].to_vec();
    let result = TrialResult {
        trial,
        pdf_mae: mae(&target_pdf, &histogram.density)?,
        acf_mae: mae(&target_acf[1..], &acf[1..])?,
        negative_fraction: texture.negative_sample_count as f64 / setup.length as f64,
    };
    Ok((result, TrialCurves { histogram, target_pdf, acf, target_acf }))
}

fn n_bins(cfg: &ValidateConfig, length: usize) -> usize {
    cfg.bins.unwrap_or_else(|| ((length as f64).sqrt().round() as usize).max(2))
}

/// Worker cap from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Run `cfg.trials` independent trials on split streams and average the MAEs.
///
/// Results do not depend on the worker count or scheduling order.
pub fn monte_carlo(pipeline: &Pipeline, setup: &MonteCarloSetup<'_>, cfg: &ValidateConfig) -> Result<ValidationReport, ValidateError> {
    if cfg.trials == 0 {
        return Err(ValidateError::BadConfig("trials must be at least 1".into()));
    }
    if cfg.lags == 0 || cfg.lags >= setup.length {
        return Err(ValidateError::BadConfig(format!("lags must lie in 1..{}", setup.length)));
    }
    if setup.target_acf.len() <= cfg.lags {
        return Err(ValidateError::BadConfig(format!("target ACF has {} lags, need {}", setup.target_acf.len(), cfg.lags + 1)));
    }
    if cfg.bins.is_some_and(|b| b < 2) {
        return Err(ValidateError::BadConfig("bins must be at least 2".into()));
    }
    let start = Instant::now();
    let run = || -> Result<Vec<TrialResult>, ValidateError> {
        (0..cfg.trials).into_par_iter().map(|t| evaluate_trial(pipeline, setup, cfg, t).map(|r| r.0)).collect()
    };
    let trials = match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| ValidateError::BadConfig(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    let n = trials.len() as f64;
    Ok(ValidationReport {
        pdf_mae: trials.iter().map(|t| t.pdf_mae).sum::<f64>() / n,
        acf_mae: trials.iter().map(|t| t.acf_mae).sum::<f64>() / n,
        n_bins: n_bins(cfg, setup.length),
        n_lags: cfg.lags,
        trial_count: trials.len(),
        length: setup.length,
        wall_time_s: start.elapsed().as_secs_f64(),
        negative_fraction: trials.iter().map(|t| t.negative_fraction).sum::<f64>() / n,
        discarded_poles: pipeline.metadata.input_form.discarded_count,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::{Exp, Gamma, StandardNormal};

    #[test]
    fn mae_examples() {
        assert_eq!(mae(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((mae(&[1.0, 2.0, 3.0], &[1.5, 2.5, 3.5]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(mae(&[1.0, 2.0], &[0.0, 4.0]).unwrap(), 1.5);
        assert!(matches!(mae(&[1.0], &[1.0, 2.0]), Err(ValidateError::LengthMismatch { .. })));
        assert!(matches!(mae(&[], &[]), Err(ValidateError::Empty)));
    }

    proptest! {
        #[test]
        fn mae_is_a_metric(
            v in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0), 1..20)
        ) {
            let a: Vec<f64> = v.iter().map(|t| t.0).collect();
            let b: Vec<f64> = v.iter().map(|t| t.1).collect();
            let c: Vec<f64> = v.iter().map(|t| t.2).collect();
            let ab = mae(&a, &b).unwrap();
            prop_assert_eq!(ab, mae(&b, &a).unwrap());
            prop_assert_eq!(mae(&a, &a).unwrap(), 0.0);
            prop_assert!(ab <= mae(&a, &c).unwrap() + mae(&c, &b).unwrap() + 1e-12);
            prop_assert_eq!(ab == 0.0, a == b);
        }

        #[test]
        fn histogram_integrates_to_one(x in prop::collection::vec(-1e3f64..1e3, 1..200), bins in 2usize..50) {
            let h = empirical_pdf(&x, bins);
            let total: f64 = h.density.iter().sum::<f64>() * h.width;
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_sample_fills_one_bin() {
        let h = empirical_pdf(&[3.0; 10], 5);
        assert_eq!(h.density.iter().filter(|&&d| d > 0.0).count(), 1);
    }

    #[test]
    fn exponential_histogram_matches_density() {
        let mut rng = RngStream::new(1);
        let exp = Exp::new(1.0).unwrap();
        let x: Vec<f64> = (0..1_000_000).map(|_| rng.sample(exp)).collect();
        let h = empirical_pdf(&x, 100);
        let theo: Vec<f64> = h.centers.iter().map(|c| (-c).exp()).collect();
        assert!(mae(&theo, &h.density).unwrap() < 0.01);
    }

    #[test]
    fn white_noise_acf_stays_in_band() {
        let mut rng = RngStream::new(2);
        let n = 100_000;
        let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let r = empirical_acf(&x, 200);
        assert_eq!(r[0], 1.0);
        assert!(r[1..].iter().all(|v| v.abs() < 0.02));
        let band = 3.0 / (n as f64).sqrt();
        let inside = r[1..].iter().filter(|v| v.abs() < band).count();
        assert!(inside as f64 >= 0.99 * 200.0, "{inside}");
    }

    #[test]
    fn ar1_acf_is_geometric() {
        let mut rng = RngStream::new(3);
        let model = crate::armodel::ArModel::new(vec![-0.5], 1e-3).unwrap();
        let w: Vec<f64> = (0..100_000).map(|_| rng.sample(StandardNormal)).collect();
        let y = model.filter(&w);
        let r = empirical_acf(&y[100..], 10);
        for (k, v) in r.iter().enumerate() {
            assert!((v - 0.5f64.powi(k as i32)).abs() < 0.03);
        }
    }

    #[test]
    fn lt_estimates() {
        let mut rng = RngStream::new(4);
        let exp = Exp::new(1.0).unwrap();
        let x: Vec<f64> = (0..200_000).map(|_| rng.sample(exp)).collect();
        let est = empirical_lt(&x, &[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert_eq!(est[0].value, Complex64::new(1.0, 0.0));
        assert!((est[1].value.re - 0.5).abs() < 3.0 * est[1].std_err);

        let g = Gamma::new(2.0, 1.0).unwrap();
        let y: Vec<f64> = (0..200_000).map(|_| rng.sample(g)).collect();
        let est = empirical_lt(&y, &[Complex64::new(0.0, 1.0)]);
        assert!((est[0].value - Complex64::new(0.0, -0.5)).norm() < 3.0 * est[0].std_err);
    }
}
