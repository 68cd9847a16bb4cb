//! Cumulant and moment algebra, filter back-solving, and the power series
//! handed to the Padé stage.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("filter power sum of order {n} is {value:.3e}, below the cancellation guard {guard:.3e}")]
    NearSingularFilterPowerSum { n: usize, value: f64, guard: f64 },
    #[error("series needs {needed} coefficients but only {available} are available")]
    InsufficientOrders { needed: usize, available: usize },
    #[error("moment vector must start with M_0 = 1, got {0}")]
    BadMomentOrigin(f64),
    #[error("non-finite entry at order {0}")]
    NonFinite(usize),
    #[error("impulse response is empty")]
    EmptyFilter,
}

/// Cumulants `kappa[0] = κ_1, ..., kappa[N-1] = κ_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantVector<T> {
    pub kappa: Vec<T>,
}

/// Raw moments `m[0] = M_0 = 1, ..., m[N] = M_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector<T> {
    pub m: Vec<T>,
}

impl<T: Scalar> CumulantVector<T> {
    pub fn new(kappa: Vec<T>) -> Self {
        Self { kappa }
    }

    pub fn len(&self) -> usize {
        self.kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa.is_empty()
    }

    /// `κ_n` with 1-based order.
    pub fn order(&self, n: usize) -> T {
        self.kappa[n - 1]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.kappa.iter().map(|v| v.lossy()).collect()
    }
}

/// Binomial coefficients `C(n, 0..=n)` in the working precision.
fn binomial_row<T: Scalar>(n: usize) -> Vec<T> {
    let mut row = vec![T::one(); n + 1];
    for k in 1..n {
        row[k] = row[k - 1] * T::of_usize(n + 1 - k) / T::of_usize(k);
    }
    row
}

/// Complete Bell polynomials `M_n = B_n(κ_1, ..., κ_n)` via
/// `M_{n+1} = Σ_i C(n, i) M_{n-i} κ_{i+1}`.
pub fn cumulants_to_moments<T: Scalar>(k: &CumulantVector<T>) -> MomentVector<T> {
    let n_max = k.len();
    let mut m = Vec::with_capacity(n_max + 1);
    m.push(T::one());
    for n in 0..n_max {
        let c = binomial_row::<T>(n);
        let mut acc = T::zero();
        for i in 0..=n {
            acc = acc + c[i] * m[n - i] * k.kappa[i];
        }
        m.push(acc);
    }
    MomentVector { m }
}

/// Inverse of [`cumulants_to_moments`].
pub fn moments_to_cumulants<T: Scalar>(m: &MomentVector<T>) -> Result<CumulantVector<T>, SeriesError> {
    if m.m.is_empty() || m.m[0] != T::one() {
        return Err(SeriesError::BadMomentOrigin(m.m.first().map(|v| v.lossy()).unwrap_or(f64::NAN)));
    }
    let n_max = m.m.len() - 1;
    let mut kappa: Vec<T> = Vec::with_capacity(n_max);
    for n in 0..n_max {
        let c = binomial_row::<T>(n);
        let mut acc = m.m[n + 1];
        for i in 0..n {
            acc = acc - c[i] * m.m[n - i] * kappa[i];
        }
        kappa.push(acc);
    }
    Ok(CumulantVector { kappa })
}

/// Filter power sums `ι_n = Σ_i h_i^n` for `n = 1..=n_max`, together with the
/// absolute sums `Σ_i |h_i|^n` used to judge cancellation.
pub fn power_sums<T: Scalar>(h: &[T], n_max: usize) -> (Vec<T>, Vec<T>) {
    let mut iota = vec![T::zero(); n_max];
    let mut abs = vec![T::zero(); n_max];
    for &hi in h {
        let mut p = T::one();
        let mut pa = T::one();
        let ha = hi.abs();
        for n in 0..n_max {
            p = p * hi;
            pa = pa * ha;
            iota[n] = iota[n] + p;
            abs[n] = abs[n] + pa;
        }
    }
    (iota, abs)
}

/// Relative guard on `|ι_n|` against cancellation in the power sum.
pub const IOTA_GUARD: f64 = 1e-8;

/// Checked power sums: fails when `|ι_n| < 1e-8 · Σ|h_i|^n`.
pub fn checked_power_sums<T: Scalar>(h: &[T], n_max: usize) -> Result<Vec<T>, SeriesError> {
    if h.is_empty() {
        return Err(SeriesError::EmptyFilter);
    }
    let (iota, abs) = power_sums(h, n_max);
    for n in 0..n_max {
        let guard = abs[n] * T::of(IOTA_GUARD);
        if !(iota[n].abs() >= guard) || !iota[n].is_finite() {
            return Err(SeriesError::NearSingularFilterPowerSum {
                n: n + 1,
                value: iota[n].lossy(),
                guard: guard.lossy(),
            });
        }
    }
    Ok(iota)
}

/// Input cumulants from output cumulants: `κ_{U,n} = κ_{Y,n} / ι_n`.
pub fn backsolve_input_cumulants<T: Scalar>(
    k_out: &CumulantVector<T>,
    h: &[T],
) -> Result<CumulantVector<T>, SeriesError> {
    let iota = checked_power_sums(h, k_out.len())?;
    Ok(backsolve_with_power_sums(k_out, &iota))
}

pub fn backsolve_with_power_sums<T: Scalar>(k_out: &CumulantVector<T>, iota: &[T]) -> CumulantVector<T> {
    CumulantVector { kappa: k_out.kappa.iter().zip(iota).map(|(&k, &i)| k / i).collect() }
}

/// Output cumulants of a filtered i.i.d. sequence: `κ_{Y,n} = ι_n κ_{U,n}`.
pub fn forward_output_cumulants<T: Scalar>(k_in: &CumulantVector<T>, h: &[T]) -> CumulantVector<T> {
    let (iota, _) = power_sums(h, k_in.len());
    CumulantVector { kappa: k_in.kappa.iter().zip(&iota).map(|(&k, &i)| k * i).collect() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    /// `L(s) = Σ c_n s^n` with `c_n = M_n (-1)^n / n!`.
    MomentExpansion,
    /// `log L(s) = -s Σ c_n s^n` with `c_n = κ_{n+1} (-1)^n / (n+1)!`.
    CumulantExpansion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries<T> {
    pub c: Vec<T>,
    pub kind: SeriesKind,
}

/// Source of a series: either cumulants or moments.
pub enum SeriesInput<'a, T> {
    Cumulants(&'a CumulantVector<T>),
    Moments(&'a MomentVector<T>),
}

impl<T: Scalar> PowerSeries<T> {
    /// Moment expansion with `n_coeffs` coefficients (all available when `None`).
    pub fn moment_expansion(m: &MomentVector<T>, n_coeffs: Option<usize>) -> Result<Self, SeriesError> {
        let available = m.m.len();
        let n = take(n_coeffs, available)?;
        let mut c = Vec::with_capacity(n);
        let mut inv_fact = T::one();
        for i in 0..n {
            if i > 0 {
                inv_fact = inv_fact / T::of_usize(i);
            }
            let sign = if i % 2 == 0 { T::one() } else { -T::one() };
            let v = m.m[i] * inv_fact * sign;
            if !v.is_finite() {
                return Err(SeriesError::NonFinite(i));
            }
            c.push(v);
        }
        Ok(Self { c, kind: SeriesKind::MomentExpansion })
    }

    /// Re-indexed cumulant expansion with `n_coeffs` coefficients.
    pub fn cumulant_expansion(k: &CumulantVector<T>, n_coeffs: Option<usize>) -> Result<Self, SeriesError> {
        let available = k.len();
        let n = take(n_coeffs, available)?;
        let mut c = Vec::with_capacity(n);
        let mut inv_fact = T::one();
        for i in 0..n {
            inv_fact = inv_fact / T::of_usize(i + 1);
            let sign = if i % 2 == 0 { T::one() } else { -T::one() };
            let v = k.kappa[i] * inv_fact * sign;
            if !v.is_finite() {
                return Err(SeriesError::NonFinite(i));
            }
            c.push(v);
        }
        Ok(Self { c, kind: SeriesKind::CumulantExpansion })
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// Evaluate the truncated series at real `s`, returning the LT itself.
    pub fn eval_lt(&self, s: f64) -> f64 {
        let x = T::of(s);
        let poly = self.c.iter().rev().fold(T::zero(), |acc, &ci| acc * x + ci).lossy();
        match self.kind {
            SeriesKind::MomentExpansion => poly,
            SeriesKind::CumulantExpansion => (-s * poly).exp(),
        }
    }
}

fn take(n_coeffs: Option<usize>, available: usize) -> Result<usize, SeriesError> {
    let n = n_coeffs.unwrap_or(available);
    if n == 0 || n > available {
        return Err(SeriesError::InsufficientOrders { needed: n.max(1), available });
    }
    Ok(n)
}

/// Build either series kind from cumulants or moments.
pub fn build_series<T: Scalar>(
    input: SeriesInput<'_, T>,
    kind: SeriesKind,
    n_coeffs: Option<usize>,
) -> Result<PowerSeries<T>, SeriesError> {
    match (input, kind) {
        (SeriesInput::Moments(m), SeriesKind::MomentExpansion) => PowerSeries::moment_expansion(m, n_coeffs),
        (SeriesInput::Cumulants(k), SeriesKind::CumulantExpansion) => PowerSeries::cumulant_expansion(k, n_coeffs),
        (SeriesInput::Cumulants(k), SeriesKind::MomentExpansion) => {
            // κ_1..κ_N yields M_0..M_N, one more coefficient than cumulants.
            PowerSeries::moment_expansion(&cumulants_to_moments(k), n_coeffs)
        }
        (SeriesInput::Moments(m), SeriesKind::CumulantExpansion) => {
            PowerSeries::cumulant_expansion(&moments_to_cumulants(m)?, n_coeffs)
        }
    }
}

/// Radius of convergence estimated from the tail half of the coefficients.
///
/// Fits `log|c_n| ≈ A + B n + C n ln n + D ln n`; a clearly negative `C`
/// signals factorial decay (entire function), a clearly positive one factorial
/// growth. Otherwise `C` is dropped and the radius is `e^{-B}`. The `ln n`
/// term absorbs polynomial prefactors such as the `n^{α-1}` of gamma moments.
pub fn convergence_radius_estimate<T: Scalar>(series: &PowerSeries<T>) -> Option<f64> {
    let n = series.c.len();
    if n < 8 {
        return None;
    }
    let pts: Vec<(f64, f64)> = (n / 2..n)
        .filter_map(|i| {
            let a = series.c[i].abs().lossy();
            (a > 0.0 && a.is_finite()).then(|| ((i + 1) as f64, a.ln()))
        })
        .collect();
    if pts.is_empty() {
        // Every tail coefficient vanished: a polynomial.
        return Some(f64::INFINITY);
    }
    if pts.len() < 5 {
        return None;
    }
    let full = lsq(&pts, |x| vec![1.0, x, x * x.ln(), x.ln()])?;
    if full[2] < -0.25 {
        return Some(f64::INFINITY);
    }
    if full[2] > 0.25 {
        return Some(0.0);
    }
    let reduced = lsq(&pts, |x| vec![1.0, x, x.ln()])?;
    Some((-reduced[1]).exp())
}

fn lsq(pts: &[(f64, f64)], basis: impl Fn(f64) -> Vec<f64>) -> Option<Vec<f64>> {
    let cols = basis(1.0).len();
    let a = DMatrix::from_fn(pts.len(), cols, |r, c| basis(pts[r].0)[c]);
    let b = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let x = a.svd(true, true).solve(&b, 1e-12).ok()?;
    Some(x.iter().copied().collect())
}
