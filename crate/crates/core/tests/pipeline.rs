use clutter_forge::continuation::{IltParams, PadeConfig};
use clutter_forge::dist::{amplitude_pdf, DistributionSpec, TexturePdf};
use clutter_forge::rng::{RngStream, SPECKLE_STREAM};
use clutter_forge::sampler::{assemble_cg, run_pipeline, ArConfig, SpeckleConfig};
use clutter_forge::validate::{empirical_acf, empirical_pdf, mae};

const PTAS: DistributionSpec = DistributionSpec::PtAlphaS { alpha: 0.95, gamma: 2.0, eta: 4.0 };

fn pdf_mae(spec: &DistributionSpec, samples: &[f64]) -> f64 {
    let hist = empirical_pdf(samples, (samples.len() as f64).sqrt().round() as usize);
    let centers: Vec<f64> = hist.centers.iter().map(|&c| c.max(1e-9)).collect();
    let theo = spec.reference_pdf(&centers, &IltParams::default()).unwrap();
    mae(&theo, &hist.density).unwrap()
}

#[test]
fn white_texture_matches_marginal() {
    let (_, t) = run_pipeline(&PTAS, None, &ArConfig::default(), 1000.0, &PadeConfig::default(), 100_000, 3).unwrap();
    assert!(pdf_mae(&PTAS, &t.samples) < 0.01);
}

#[test]
fn correlated_texture_keeps_marginal_and_acf() {
    let ar = ArConfig::predictor(vec![0.9, -0.1]);
    let (p, t) = run_pipeline(&PTAS, None, &ar, 1000.0, &PadeConfig::default(), 100_000, 4).unwrap();
    assert!(pdf_mae(&PTAS, &t.samples) < 0.01);
    let emp = empirical_acf(&t.samples, 20);
    let theo = p.model.theoretical_acf(21);
    assert!(mae(&theo[1..], &emp[1..]).unwrap() < 0.02);
    let mean = t.samples.iter().sum::<f64>() / t.samples.len() as f64;
    assert!((mean - PTAS.mean()).abs() < 0.05 * PTAS.mean());
}

#[test]
fn gamma_texture_gives_k_amplitude() {
    let spec = DistributionSpec::Gamma { alpha: 2.0, lambda: 1.0 };
    let (_, t) = run_pipeline(&spec, None, &ArConfig::default(), 1000.0, &PadeConfig::default(), 100_000, 5).unwrap();
    let mut rng = RngStream::with_stream(5, SPECKLE_STREAM);
    let speckle = SpeckleConfig { enabled: true, doppler: None };
    let c = assemble_cg(&t, &speckle, 1000.0, &mut rng).unwrap();
    let amp: Vec<f64> = c.samples.iter().map(|x| x.norm()).collect();

    // Power E|x|² = 4 E[v] with variance-2 quadratures.
    let power = c.samples.iter().map(|x| x.norm_sqr()).sum::<f64>() / amp.len() as f64;
    assert!((power - 4.0 * spec.mean()).abs() < 0.05 * 4.0 * spec.mean());

    let grid: Vec<f64> = (1..=4000).map(|i| i as f64 * 0.01).collect();
    let values = spec.reference_pdf(&grid, &IltParams::default()).unwrap();
    let hist = empirical_pdf(&amp, (amp.len() as f64).sqrt().round() as usize);
    let theo = amplitude_pdf(TexturePdf::Sampled { grid: &grid, values: &values }, &hist.centers).unwrap();
    assert!(mae(&theo, &hist.density).unwrap() < 0.01);
}
