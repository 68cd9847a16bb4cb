//! Side-by-side recovery of a target distribution's transform through the
//! moment and cumulant continuation paths.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::continuation::{self, ContinuationError, ContinuationPath, IltParams, PadeConfig, Precision, RecoveredLt};
use crate::cumseries::{self, SeriesError, SeriesInput, SeriesKind};
use crate::dd::DoubleDouble;
use crate::dist::{DistError, DistributionSpec};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnoseError {
    #[error(transparent)]
    Distribution(#[from] DistError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Continuation(#[from] ContinuationError),
}

fn recover_in<T: Scalar>(spec: &DistributionSpec, pade: &PadeConfig, path: ContinuationPath) -> Result<RecoveredLt, DiagnoseError> {
    let n = pade.k + pade.l + 1;
    match path {
        ContinuationPath::CumulantPath => {
            let k = spec.cumulants::<T>(n)?;
            let series = cumseries::build_series(SeriesInput::Cumulants(&k), SeriesKind::CumulantExpansion, Some(n))?;
            Ok(continuation::recover_cumulant_path(&series, pade)?)
        }
        ContinuationPath::MomentPath => {
            // κ_1..κ_{n-1} give M_0..M_{n-1}.
            let k = spec.cumulants::<T>(n - 1)?;
            let series = cumseries::build_series(SeriesInput::Cumulants(&k), SeriesKind::MomentExpansion, Some(n))?;
            Ok(continuation::recover_moment_path(&series, pade)?)
        }
    }
}

/// Continue the target's own series (no AR filter) along `path`.
pub fn recover_path(spec: &DistributionSpec, pade: &PadeConfig, path: ContinuationPath) -> Result<RecoveredLt, DiagnoseError> {
    match pade.precision {
        Precision::F64 => recover_in::<f64>(spec, pade, path),
        Precision::DoubleDouble => recover_in::<DoubleDouble>(spec, pade, path),
    }
}

/// Largest `|L̂(iω) - L(iω)|` over `omegas`.
pub fn max_lt_error(spec: &DistributionSpec, r: &RecoveredLt, omegas: &[f64]) -> Result<f64, DiagnoseError> {
    let mut worst = 0.0f64;
    for &w in omegas {
        let s = Complex64::new(0.0, w);
        let d = (r.eval_lt(s)? - spec.closed_form_lt(s)?).norm();
        worst = worst.max(if d.is_nan() { f64::INFINITY } else { d });
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct PathSummary {
    pub path: ContinuationPath,
    pub ok: bool,
    pub error: Option<String>,
    pub order: Option<[usize; 2]>,
    pub hankel_cond: Option<f64>,
    /// Maximum LT error for `ω ≤ 5` and over the whole grid.
    pub max_err_low: Option<f64>,
    pub max_err_all: Option<f64>,
    pub diagnostics: Vec<String>,
}

/// Rows of the LT comparison on `s = iω` and of the PDF comparison on `u`.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnosis {
    pub paths: Vec<PathSummary>,
    /// `(ω, theo, moment, cumulant)`; a failed path yields NaN entries.
    pub lt_rows: Vec<(f64, Complex64, Complex64, Complex64)>,
    /// `(u, reference, moment, cumulant)`.
    pub pdf_rows: Vec<(f64, f64, f64, f64)>,
}

pub fn diagnose(spec: &DistributionSpec, pade: &PadeConfig, omegas: &[f64], u_grid: &[f64], ilt: &IltParams) -> Result<Diagnosis, DiagnoseError> {
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let moment = recover_path(spec, pade, ContinuationPath::MomentPath);
    let cumulant = recover_path(spec, pade, ContinuationPath::CumulantPath);
    let low: Vec<f64> = omegas.iter().copied().filter(|&w| w <= 5.0).collect();
    let summary = |path, r: &Result<RecoveredLt, DiagnoseError>| -> PathSummary {
        match r {
            Ok(r) => PathSummary {
                path,
                ok: true,
                error: None,
                order: Some([r.k, r.l]),
                hankel_cond: Some(r.hankel_cond),
                max_err_low: max_lt_error(spec, r, &low).ok(),
                max_err_all: max_lt_error(spec, r, omegas).ok(),
                diagnostics: r.diagnostics.clone(),
            },
            Err(e) => PathSummary {
                path,
                ok: false,
                error: Some(e.to_string()),
                order: None,
                hankel_cond: None,
                max_err_low: None,
                max_err_all: None,
                diagnostics: Vec::new(),
            },
        }
    };
    let paths = vec![summary(ContinuationPath::MomentPath, &moment), summary(ContinuationPath::CumulantPath, &cumulant)];
    let eval = |r: &Result<RecoveredLt, DiagnoseError>, s| r.as_ref().ok().and_then(|r| r.eval_lt(s).ok()).unwrap_or(nan);
    let mut lt_rows = Vec::with_capacity(omegas.len());
    for &w in omegas {
        let s = Complex64::new(0.0, w);
        lt_rows.push((w, spec.closed_form_lt(s)?, eval(&moment, s), eval(&cumulant, s)));
    }
    let reference = spec.reference_pdf(u_grid, ilt)?;
    let moment_pdf = match &moment {
        Ok(r) => match continuation::pdf_moment_path(r, u_grid) {
            Ok(p) => p.density,
            Err(_) => vec![f64::NAN; u_grid.len()],
        },
        Err(_) => vec![f64::NAN; u_grid.len()],
    };
    let cumulant_pdf = match &cumulant {
        Ok(r) => continuation::ar_output_pdf(r, &[1.0], u_grid, ilt)
            .map(|o| o.density)
            .unwrap_or_else(|_| vec![f64::NAN; u_grid.len()]),
        Err(_) => vec![f64::NAN; u_grid.len()],
    };
    let pdf_rows = (0..u_grid.len()).map(|i| (u_grid[i], reference[i], moment_pdf[i], cumulant_pdf[i])).collect();
    Ok(Diagnosis { paths, lt_rows, pdf_rows })
}
