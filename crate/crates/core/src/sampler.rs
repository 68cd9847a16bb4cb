//! Exact input sampling through the compound Poisson–Erlang construction and
//! the full texture / compound-Gaussian clutter pipeline.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::armodel::{self, AcfSpec, ArError, ArModel, DEFAULT_IR_THRESHOLD};
use crate::continuation::{self, ContinuationError, PadeConfig, Precision, RecoveredLt};
use crate::cumseries::{self, SeriesError, SeriesInput, SeriesKind};
use crate::dd::DoubleDouble;
use crate::dist::{DistError, DistributionSpec};
use crate::pade::{PoleForm, PoleResidueForm};
use crate::rng::{RngStream, SPECKLE_STREAM, TEXTURE_STREAM};
use crate::scalar::Scalar;

/// Warm-up length, in multiples of `L_IR`, discarded before the output starts.
pub const WARMUP_FACTOR: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("sampling needs an all-real positive product-of-exponentials form: {0}")]
    WrongForm(String),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("target distribution: {0}")]
    Distribution(#[from] DistError),
    #[error("AR model (steps 1-2): {0}")]
    ArModel(#[from] ArError),
    #[error("cumulant back-solve (step 3): {0}")]
    Series(#[from] SeriesError),
    #[error("Padé continuation (step 4): {0}")]
    Continuation(#[from] ContinuationError),
}

impl SamplerError {
    /// Pipeline stage the error belongs to.
    pub fn stage(&self) -> &'static str {
        match self {
            SamplerError::WrongForm(_) => "sampling",
            SamplerError::BadConfig(_) => "config",
            SamplerError::Distribution(_) => "distribution",
            SamplerError::ArModel(_) => "ar_model",
            SamplerError::Series(_) => "backsolve",
            SamplerError::Continuation(_) => "continuation",
        }
    }
}

/// One product factor `exp(-λ s/(s+a))`, ready for repeated draws.
#[derive(Debug, Clone, Copy)]
pub struct ZjSampler {
    a: f64,
    poisson: Option<Poisson<f64>>,
}

impl ZjSampler {
    pub fn new(a: f64, lambda: f64) -> Result<Self, SamplerError> {
        if !(a > 0.0 && a.is_finite()) || !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(SamplerError::WrongForm(format!("term (a = {a}, λ = {lambda}) is not real positive")));
        }
        let poisson = if lambda > 0.0 {
            Some(Poisson::new(lambda).map_err(|e| SamplerError::WrongForm(e.to_string()))?)
        } else {
            None
        };
        Ok(Self { a, poisson })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let Some(poisson) = self.poisson else { return 0.0 };
        let k = poisson.sample(rng);
        if k == 0.0 {
            return 0.0;
        }
        // Erlang(k, a): the shape is a positive integer and the scale positive.
        Gamma::new(k, 1.0 / self.a).expect("valid Erlang parameters").sample(rng)
    }
}

/// One draw with Laplace transform `exp(-λ s/(s+a))`: a Poisson(λ)-indexed
/// sum of Exponential(a) variates.
pub fn sample_zj<R: Rng + ?Sized>(a: f64, lambda: f64, rng: &mut R) -> Result<f64, SamplerError> {
    Ok(ZjSampler::new(a, lambda)?.sample(rng))
}

/// Sampler for `U = c + Σ_j Z_j`.
#[derive(Debug, Clone)]
pub struct InputSampler {
    shift: f64,
    terms: Vec<ZjSampler>,
}

impl InputSampler {
    pub fn new(prf: &PoleResidueForm<f64>) -> Result<Self, SamplerError> {
        if prf.form != PoleForm::ProductOfExponentials {
            return Err(SamplerError::WrongForm("form is a sum of poles".into()));
        }
        if !prf.is_real_positive() {
            return Err(SamplerError::WrongForm("form has complex or non-positive terms".into()));
        }
        let terms = prf.terms.iter().map(|t| ZjSampler::new(t.a.re, t.lambda.re)).collect::<Result<_, _>>()?;
        Ok(Self { shift: prf.constant, terms })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.shift + self.terms.iter().map(|t| t.sample(rng)).sum::<f64>()
    }
}

/// One draw of the AR input from its recovered product form.
pub fn sample_u<R: Rng + ?Sized>(prf: &PoleResidueForm<f64>, rng: &mut R) -> Result<f64, SamplerError> {
    Ok(InputSampler::new(prf)?.sample(rng))
}

/// AR block of the run configuration.
///
/// `coeffs` are predictor coefficients `φ` in `y(m) = Σ_k φ_k y(m-k) + u(m)`;
/// without them an AR(`order`) model is fitted to the ACF block. With neither,
/// the output is white.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ArConfig {
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub coeffs: Option<Vec<f64>>,
    /// Impulse-response truncation threshold.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_threshold() -> f64 {
    DEFAULT_IR_THRESHOLD
}

impl Default for ArConfig {
    fn default() -> Self {
        Self { order: None, coeffs: None, threshold: DEFAULT_IR_THRESHOLD }
    }
}

impl ArConfig {
    /// Predictor-convention shorthand.
    pub fn predictor(coeffs: Vec<f64>) -> Self {
        Self { order: None, coeffs: Some(coeffs), threshold: DEFAULT_IR_THRESHOLD }
    }

    /// Steps 1 and 2: the AR model and its truncated impulse response.
    pub fn build(&self, acf: Option<&AcfSpec>, prf_hz: f64) -> Result<ArModel, SamplerError> {
        match (&self.coeffs, acf, self.order) {
            (Some(phi), _, order) => {
                if let Some(p) = order {
                    if p != phi.len() {
                        return Err(SamplerError::BadConfig(format!("ar.order = {p} but {} coefficients given", phi.len())));
                    }
                }
                Ok(ArModel::new(phi.iter().map(|v| -v).collect(), self.threshold)?)
            }
            (None, Some(acf), Some(p)) => {
                if p == 0 {
                    return Ok(ArModel::new(Vec::new(), self.threshold)?);
                }
                let lags = acf.values(prf_hz, p + 1)?;
                Ok(armodel::yule_walker(&lags, p, self.threshold)?)
            }
            (None, Some(_), None) => Err(SamplerError::BadConfig("an ACF block needs ar.order".into())),
            (None, None, Some(p)) if p > 0 => {
                Err(SamplerError::BadConfig(format!("ar.order = {p} needs either ar.coeffs or an ACF block")))
            }
            (None, None, _) => Ok(ArModel::new(Vec::new(), self.threshold)?),
        }
    }
}

/// Reproducibility record attached to every generated texture.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TextureMetadata {
    pub distribution: DistributionSpec,
    /// Difference-equation coefficients `a` in `y(m) = -Σ a_k y(m-k) + u(m)`.
    pub ar_a: Vec<f64>,
    pub l_ir: usize,
    pub ir_threshold: f64,
    pub spectral_radius: f64,
    pub input_form: PoleResidueForm<f64>,
    pub pade_order: [usize; 2],
    pub hankel_cond: f64,
    pub precision: Precision,
    pub input_cumulants: Vec<f64>,
    pub output_cumulants: Vec<f64>,
    pub warmup: usize,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TextureSequence {
    pub samples: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
    /// Samples below zero. They are kept; see [`assemble_cg`].
    pub negative_sample_count: usize,
}

/// Steps 1–4 resolved once; [`Pipeline::simulate`] then runs Steps 5–7.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub model: ArModel,
    pub input: RecoveredLt,
    pub metadata: TextureMetadata,
    sampler: InputSampler,
    input_mean: f64,
    output_mean: f64,
}

fn continue_input<T: Scalar>(
    spec: &DistributionSpec,
    model: &ArModel,
    pade: &PadeConfig,
) -> Result<(RecoveredLt, Vec<f64>, Vec<f64>), SamplerError> {
    let depth = pade.cumulant_depth();
    let k_out = spec.cumulants::<T>(depth)?;
    let iota = cumseries::checked_power_sums(&model.h_in::<T>(), depth)?;
    let k_in = cumseries::backsolve_with_power_sums(&k_out, &iota);
    let series = cumseries::build_series(SeriesInput::Cumulants(&k_in), SeriesKind::CumulantExpansion, Some(pade.k + pade.l + 1))?;
    let recovered = continuation::recover_cumulant_path(&series, pade)?;
    Ok((recovered, k_in.to_f64(), k_out.to_f64()))
}

impl Pipeline {
    pub fn build(
        spec: &DistributionSpec,
        acf: Option<&AcfSpec>,
        ar: &ArConfig,
        prf_hz: f64,
        pade: &PadeConfig,
    ) -> Result<Self, SamplerError> {
        for w in spec.validate()? {
            log::warn!("{w}");
        }
        pade.validate()?;
        let model = ar.build(acf, prf_hz)?;
        Self::from_model(spec, model, pade)
    }

    /// Steps 3–4 for an already established AR model.
    pub fn from_model(spec: &DistributionSpec, model: ArModel, pade: &PadeConfig) -> Result<Self, SamplerError> {
        let (input, k_in, k_out) = match pade.precision {
            Precision::F64 => continue_input::<f64>(spec, &model, pade)?,
            Precision::DoubleDouble => continue_input::<DoubleDouble>(spec, &model, pade)?,
        };
        let prf = input.prf().ok_or_else(|| SamplerError::WrongForm("recovered transform has no pole form".into()))?;
        let sampler = InputSampler::new(prf)?;
        let metadata = TextureMetadata {
            distribution: *spec,
            ar_a: model.a.clone(),
            l_ir: model.l_ir,
            ir_threshold: model.threshold,
            spectral_radius: model.spectral_radius,
            input_form: prf.clone(),
            pade_order: [input.k, input.l],
            hankel_cond: input.hankel_cond,
            precision: pade.precision,
            input_cumulants: k_in.clone(),
            output_cumulants: k_out.clone(),
            warmup: WARMUP_FACTOR * model.l_ir,
            diagnostics: input.diagnostics.clone(),
        };
        Ok(Self { model, input, metadata, sampler, input_mean: k_in[0], output_mean: k_out[0] })
    }

    /// Theoretical input mean `κ_{U,1}` removed before filtering.
    pub fn input_mean(&self) -> f64 {
        self.input_mean
    }

    /// Theoretical output mean `κ_{Y,1}` added after filtering.
    pub fn output_mean(&self) -> f64 {
        self.output_mean
    }

    /// Steps 5–7: draw the input, filter it, and restore the target mean.
    pub fn simulate(&self, len: usize, rng: &mut RngStream) -> TextureSequence {
        let warmup = self.metadata.warmup;
        let u: Vec<f64> = (0..warmup + len).map(|_| self.sampler.sample(rng) - self.input_mean).collect();
        let y = self.model.filter(&u);
        let samples: Vec<f64> = y[warmup..].iter().map(|v| v + self.output_mean).collect();
        let negative_sample_count = samples.iter().filter(|&&v| v < 0.0).count();
        TextureSequence { samples, seed: rng.seed(), stream: rng.stream(), negative_sample_count }
    }
}

/// Build the pipeline and generate one texture on the seed's texture stream.
pub fn run_pipeline(
    spec: &DistributionSpec,
    acf: Option<&AcfSpec>,
    ar: &ArConfig,
    prf_hz: f64,
    pade: &PadeConfig,
    len: usize,
    seed: u64,
) -> Result<(Pipeline, TextureSequence), SamplerError> {
    let pipeline = Pipeline::build(spec, acf, ar, prf_hz, pade)?;
    let mut rng = RngStream::with_stream(seed, TEXTURE_STREAM);
    let texture = pipeline.simulate(len, &mut rng);
    Ok((pipeline, texture))
}

/// Gaussian-shaped Doppler spectrum imposed on both speckle quadratures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DopplerConfig {
    /// Standard deviation of the Doppler spectrum.
    pub spread_hz: f64,
    /// AR order used to realize the spectrum.
    #[serde(default = "default_doppler_order")]
    pub order: usize,
}

fn default_doppler_order() -> usize {
    4
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SpeckleConfig {
    /// Produce complex clutter alongside the texture.
    #[serde(default)]
    pub enabled: bool,
    #[serde(default)]
    pub doppler: Option<DopplerConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClutterSequence {
    pub samples: Vec<Complex64>,
    /// Texture samples clamped to zero before taking the square root.
    pub clamp_count: usize,
}

/// Unit-variance Gaussian sequence with the configured Doppler shaping.
fn speckle_quadrature(len: usize, shaping: Option<(&ArModel, f64)>, rng: &mut RngStream) -> Vec<f64> {
    match shaping {
        None => (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(),
        Some((model, innovation_sd)) => {
            let warmup = WARMUP_FACTOR * model.l_ir;
            let w: Vec<f64> = (0..warmup + len).map(|_| innovation_sd * rng.sample::<f64, _>(StandardNormal)).collect();
            model.filter(&w).split_off(warmup)
        }
    }
}

/// Compound-Gaussian clutter `x(m) = √v(m) (z_I(m) + i z_Q(m))` with variance-2
/// quadratures drawn from the seed's speckle stream.
pub fn assemble_cg(
    texture: &TextureSequence,
    speckle: &SpeckleConfig,
    prf_hz: f64,
    rng: &mut RngStream,
) -> Result<ClutterSequence, SamplerError> {
    let shaping = match &speckle.doppler {
        None => None,
        Some(d) => {
            if !(d.spread_hz > 0.0) || d.order == 0 {
                return Err(SamplerError::BadConfig("doppler needs spread_hz > 0 and order >= 1".into()));
            }
            // Gaussian PSD with standard deviation σ_f has ACF exp(-2π²σ_f²τ²).
            let c = 2.0 * (std::f64::consts::PI * d.spread_hz / prf_hz).powi(2);
            let acf: Vec<f64> = (0..=d.order).map(|k| (-c * (k * k) as f64).exp()).collect();
            let model = armodel::yule_walker(&acf, d.order, DEFAULT_IR_THRESHOLD)?;
            // Levinson prediction error for a unit-variance process.
            let innovation_var: f64 = model.reflection.iter().map(|k| 1.0 - k * k).product();
            Some((model, innovation_var.sqrt()))
        }
    };
    let shaping_ref = shaping.as_ref().map(|(m, sd)| (m, *sd));
    let len = texture.samples.len();
    let zi = speckle_quadrature(len, shaping_ref, rng);
    let zq = speckle_quadrature(len, shaping_ref, rng);
    let scale = std::f64::consts::SQRT_2;
    let mut clamp_count = 0;
    let samples = texture
        .samples
        .iter()
        .zip(zi.iter().zip(&zq))
        .map(|(&v, (&i, &q))| {
            let v = if v < 0.0 {
                clamp_count += 1;
                0.0
            } else {
                v
            };
            v.sqrt() * Complex64::new(scale * i, scale * q)
        })
        .collect();
    if clamp_count > 0 {
        log::info!("{clamp_count} negative texture samples clamped to zero");
    }
    Ok(ClutterSequence { samples, clamp_count })
}

/// Speckle stream matching a texture drawn from `texture_rng`.
pub fn speckle_stream_for(texture_rng: &RngStream) -> RngStream {
    texture_rng.split(texture_rng.stream() - TEXTURE_STREAM + SPECKLE_STREAM)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_var(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        (m, x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn zero_rate_gives_zero() {
        let mut rng = RngStream::new(1);
        for _ in 0..100 {
            assert_eq!(sample_zj(2.0, 0.0, &mut rng).unwrap(), 0.0);
        }
    }

    #[test]
    fn zero_frequency_matches_poisson_atom() {
        let mut rng = RngStream::new(2);
        let n = 1_000_000;
        let s = ZjSampler::new(1.0, 1.0).unwrap();
        let zeros = (0..n).filter(|_| s.sample(&mut rng) == 0.0).count() as f64 / n as f64;
        assert!((zeros - 0.36788).abs() < 0.0015, "{zeros}");
    }

    #[test]
    fn invalid_terms_rejected() {
        let mut rng = RngStream::new(3);
        assert!(sample_zj(0.0, 1.0, &mut rng).is_err());
        assert!(sample_zj(1.0, -1.0, &mut rng).is_err());
        assert!(sample_zj(f64::NAN, 1.0, &mut rng).is_err());
    }

    fn prf(terms: &[(f64, f64)], form: PoleForm) -> PoleResidueForm<f64> {
        PoleResidueForm {
            form,
            terms: terms
                .iter()
                .map(|&(a, l)| crate::pade::PoleTerm { a: Complex64::new(a, 0.0), lambda: Complex64::new(l, 0.0) })
                .collect(),
            constant: 0.0,
            discarded_count: 0,
            dropped: Vec::new(),
            warnings: Vec::new(),
        }
    }

    #[test]
    fn input_moments_match_terms() {
        let terms = [(1.0, 2.0), (4.0, 0.5), (0.5, 1.5)];
        let sampler = InputSampler::new(&prf(&terms, PoleForm::ProductOfExponentials)).unwrap();
        let mut rng = RngStream::new(4);
        let n = 1_000_000;
        let x: Vec<f64> = (0..n).map(|_| sampler.sample(&mut rng)).collect();
        let (m, v) = mean_var(&x);
        let mean: f64 = terms.iter().map(|(a, l)| l / a).sum();
        let var: f64 = terms.iter().map(|(a, l)| 2.0 * l / (a * a)).sum();
        assert!((m - mean).abs() < 3.0 * (var / n as f64).sqrt(), "mean {m} vs {mean}");
        // Variance of the sample variance ≈ (μ4 - σ⁴)/n; κ4 = Σ 24 λ/a⁴.
        let k4: f64 = terms.iter().map(|(a, l)| 24.0 * l / a.powi(4)).sum();
        let se = ((k4 + 2.0 * var * var) / n as f64).sqrt();
        assert!((v - var).abs() < 3.0 * se, "var {v} vs {var}");
    }

    #[test]
    fn sum_form_is_wrong_form() {
        let mut rng = RngStream::new(5);
        let p = prf(&[(1.0, 1.0)], PoleForm::SumOfPoles);
        assert!(matches!(sample_u(&p, &mut rng), Err(SamplerError::WrongForm(_))));
        let mut q = prf(&[(1.0, 1.0)], PoleForm::ProductOfExponentials);
        q.terms[0].a.im = 0.3;
        assert!(matches!(sample_u(&q, &mut rng), Err(SamplerError::WrongForm(_))));
    }

    #[test]
    fn predictor_coefficients_flip_sign() {
        let m = ArConfig::predictor(vec![0.9, -0.1]).build(None, 1000.0).unwrap();
        assert_eq!(m.a, vec![-0.9, 0.1]);
        assert!(m.h[1] > 0.0);
    }

    #[test]
    fn white_config_has_unit_filter() {
        let m = ArConfig::default().build(None, 1000.0).unwrap();
        assert_eq!(m.h, vec![1.0]);
        assert_eq!(m.l_ir, 0);
        let bad = ArConfig { order: Some(2), ..Default::default() };
        assert!(matches!(bad.build(None, 1000.0), Err(SamplerError::BadConfig(_))));
    }

    #[test]
    fn pipeline_is_deterministic_and_keeps_the_mean() {
        let spec = DistributionSpec::Gamma { alpha: 2.0, lambda: 1.0 };
        let pade = PadeConfig { k: 6, l: 7, min_l: 3, ..Default::default() };
        let ar = ArConfig::predictor(vec![0.5]);
        let (p, t1) = run_pipeline(&spec, None, &ar, 1000.0, &pade, 50_000, 9).unwrap();
        let (_, t2) = run_pipeline(&spec, None, &ar, 1000.0, &pade, 50_000, 9).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(t1.samples.len(), 50_000);
        let (m, _) = mean_var(&t1.samples);
        // AR(1) with φ = 0.5 inflates the sample-mean variance by (1+φ)/(1-φ) = 3.
        let se = (spec.variance() * 3.0 / 50_000.0).sqrt();
        assert!((m - spec.mean()).abs() < 4.0 * se, "{m}");
        assert!((p.output_mean() - 2.0).abs() < 1e-12);
        let (_, t3) = run_pipeline(&spec, None, &ar, 1000.0, &pade, 50_000, 10).unwrap();
        assert_ne!(t1.samples, t3.samples);
    }

    #[test]
    fn clutter_power_is_four_times_texture_mean() {
        let texture = TextureSequence { samples: vec![1.5; 200_000], seed: 0, stream: 0, negative_sample_count: 0 };
        let mut rng = RngStream::new(11).split(SPECKLE_STREAM);
        let cg = assemble_cg(&texture, &SpeckleConfig::default(), 1000.0, &mut rng).unwrap();
        let p: Vec<f64> = cg.samples.iter().map(|x| x.norm_sqr()).collect();
        let (m, v) = mean_var(&p);
        assert!((m - 6.0).abs() < 3.0 * (v / p.len() as f64).sqrt(), "{m}");
    }

    #[test]
    fn negative_texture_is_clamped_and_counted() {
        let texture = TextureSequence { samples: vec![1.0, -0.5, 2.0, -1e-3], seed: 0, stream: 0, negative_sample_count: 2 };
        let mut rng = RngStream::new(12);
        let cg = assemble_cg(&texture, &SpeckleConfig::default(), 1000.0, &mut rng).unwrap();
        assert_eq!(cg.clamp_count, 2);
        assert_eq!(cg.samples[1], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn doppler_shaping_keeps_variance_and_correlates() {
        let texture = TextureSequence { samples: vec![1.0; 100_000], seed: 0, stream: 0, negative_sample_count: 0 };
        let cfg = SpeckleConfig { enabled: true, doppler: Some(DopplerConfig { spread_hz: 50.0, order: 4 }) };
        let mut rng = RngStream::new(13);
        let cg = assemble_cg(&texture, &cfg, 1000.0, &mut rng).unwrap();
        let re: Vec<f64> = cg.samples.iter().map(|x| x.re).collect();
        let (m, v) = mean_var(&re);
        assert!(m.abs() < 0.1 && (v - 2.0).abs() < 0.15, "mean {m} var {v}");
        let r1 = re.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (re.len() - 1) as f64 / v;
        let want = (-2.0 * (std::f64::consts::PI * 0.05).powi(2)).exp();
        assert!((r1 - want).abs() < 0.02, "lag-1 {r1} vs {want}");
    }
}
