//! Rational `[K, L]` approximation of a power series, partial fractions, and
//! pole hygiene for the two Laplace-transform forms.

use num_complex::{Complex, Complex64};
use serde::ser::{Serialize, Serializer};
use serde_json::json;
use thiserror::Error;

use crate::cumseries::PowerSeries;
use crate::linalg::{self, LinalgError};
use crate::scalar::{ldexp, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PadeError {
    #[error("order [{k}, {l}] is neither diagonal nor sub-diagonal")]
    UnsupportedOrder { k: usize, l: usize },
    #[error("order [{k}, {l}] needs {needed} coefficients, series has {available}")]
    InsufficientCoefficients { k: usize, l: usize, needed: usize, available: usize },
    #[error("Hankel system for [{k}, {l}] is singular to working precision (condition {cond:.3e}, limit {limit:.1e})")]
    SingularHankel { k: usize, l: usize, cond: f64, limit: f64 },
    #[error("denominator has repeated roots near {root}; simple poles are required")]
    RepeatedRoots { root: Complex64 },
    #[error("numerator degree {k} exceeds denominator degree {l}; no proper partial-fraction form")]
    DegreeMismatch { k: usize, l: usize },
    #[error("all {discarded} pole terms were discarded")]
    AllPolesDiscarded { discarded: usize },
    #[error("root finding failed: {0}")]
    Roots(#[from] LinalgError),
}

/// `P(s)/Q(s)` with `Q_0 = 1`; coefficients in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct PadeApproximant<T> {
    pub p: Vec<T>,
    pub q: Vec<T>,
    pub k: usize,
    pub l: usize,
    /// 1-norm condition of the Hankel system after variable scaling.
    pub hankel_cond: f64,
    /// The fit was done in `t = s / 2^scale_exp`.
    pub scale_exp: i32,
}

impl<T: Scalar> PadeApproximant<T> {
    pub fn eval(&self, s: Complex<T>) -> Complex<T> {
        linalg::horner(&self.p, s) / linalg::horner(&self.q, s)
    }

    pub fn eval_f64(&self, s: Complex64) -> Complex64 {
        let z = Complex::new(T::of(s.re), T::of(s.im));
        let v = self.eval(z);
        Complex64::new(v.re.lossy(), v.im.lossy())
    }

    /// First `n` Taylor coefficients of `P/Q` by series long division.
    pub fn taylor(&self, n: usize) -> Vec<T> {
        let mut d: Vec<T> = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = self.p.get(i).copied().unwrap_or_else(T::zero);
            for j in 1..=self.l.min(i) {
                acc = acc - self.q[j] * d[i - j];
            }
            d.push(acc);
        }
        d
    }

    /// Coefficients in the scaled variable `t = s / 2^scale_exp`.
    fn scaled(&self) -> (Vec<T>, Vec<T>) {
        let e = self.scale_exp;
        let p = self.p.iter().enumerate().map(|(i, &v)| ldexp(v, e * i as i32)).collect();
        let q = self.q.iter().enumerate().map(|(i, &v)| ldexp(v, e * i as i32)).collect();
        (p, q)
    }

    pub fn to_f64(&self) -> PadeApproximant<f64> {
        PadeApproximant {
            p: self.p.iter().map(|v| v.lossy()).collect(),
            q: self.q.iter().map(|v| v.lossy()).collect(),
            k: self.k,
            l: self.l,
            hankel_cond: self.hankel_cond,
            scale_exp: self.scale_exp,
        }
    }
}

/// Power-of-two variable scaling that flattens `|c_n|` geometrically.
fn flattening_exponent<T: Scalar>(c: &[T]) -> i32 {
    let pts: Vec<(f64, f64)> = c
        .iter()
        .enumerate()
        .filter_map(|(n, v)| {
            let a = v.abs().lossy();
            (a > 0.0 && a.is_finite()).then(|| (n as f64, a.log2()))
        })
        .collect();
    if pts.len() < 2 {
        return 0;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return 0;
    }
    (-(sxy / sxx)).round().clamp(-60.0, 60.0) as i32
}

pub fn fit<T: Scalar>(series: &PowerSeries<T>, k: usize, l: usize) -> Result<PadeApproximant<T>, PadeError> {
    fit_coefficients(&series.c, k, l)
}

/// `[K, L]` approximant of `Σ c_n s^n`.
///
/// `Q` solves `Σ_{j=1..L} c_{K+i-j} Q_j = -c_{K+i}` for `i = 1..L`, and
/// `P_n = Σ_{j=0..min(n,L)} c_{n-j} Q_j`. The system is formed in a power-of-two
/// rescaled variable so the condition estimate reflects the approximation
/// problem rather than the radius of convergence.
pub fn fit_coefficients<T: Scalar>(c: &[T], k: usize, l: usize) -> Result<PadeApproximant<T>, PadeError> {
    if !(k == l || k + 1 == l) {
        return Err(PadeError::UnsupportedOrder { k, l });
    }
    let needed = k + l + 1;
    if c.len() < needed {
        return Err(PadeError::InsufficientCoefficients { k, l, needed, available: c.len() });
    }
    let c = &c[..needed];
    let e = flattening_exponent(c);
    let cs: Vec<T> = c.iter().enumerate().map(|(n, &v)| ldexp(v, e * n as i32)).collect();
    let coef = |m: isize| -> T {
        if m < 0 {
            T::zero()
        } else {
            cs[m as usize]
        }
    };

    let (qs, cond) = if l == 0 {
        (vec![T::one()], 1.0)
    } else {
        let mut h = vec![T::zero(); l * l];
        let mut rhs = vec![T::zero(); l];
        for i in 0..l {
            for j in 0..l {
                h[i * l + j] = coef(k as isize + i as isize - j as isize);
            }
            rhs[i] = -coef((k + 1 + i) as isize);
        }
        let limit = T::HANKEL_COND_LIMIT;
        let (sol, cond) = match linalg::solve_refined(&h, l, &rhs) {
            Ok(v) => v,
            Err(LinalgError::Singular) => {
                return Err(PadeError::SingularHankel { k, l, cond: f64::INFINITY, limit });
            }
            Err(other) => return Err(other.into()),
        };
        if !(cond <= limit) || sol.iter().any(|v| !v.is_finite()) {
            return Err(PadeError::SingularHankel { k, l, cond, limit });
        }
        let mut q = vec![T::one()];
        q.extend(sol);
        (q, cond)
    };
    let ps: Vec<T> = (0..=k)
        .map(|n| {
            let mut acc = T::zero();
            for j in 0..=n.min(l) {
                acc = acc + cs[n - j] * qs[j];
            }
            acc
        })
        .collect();
    let p = ps.iter().enumerate().map(|(i, &v)| ldexp(v, -e * i as i32)).collect();
    let q = qs.iter().enumerate().map(|(i, &v)| ldexp(v, -e * i as i32)).collect();
    Ok(PadeApproximant { p, q, k, l, hankel_cond: cond, scale_exp: e })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleForm {
    /// `L(s) = c + Σ λ_j / (s + a_j)`.
    SumOfPoles,
    /// `L(s) = exp(-c s - Σ λ_j s / (s + a_j))`.
    ProductOfExponentials,
}

impl PoleForm {
    pub fn tag(self) -> &'static str {
        match self {
            PoleForm::SumOfPoles => "sum_poles",
            PoleForm::ProductOfExponentials => "product_exp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleTerm<T> {
    /// Negative of the pole location.
    pub a: Complex<T>,
    pub lambda: Complex<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    /// Pole in the closed right half-plane (`Re a <= 0`).
    UnstablePole,
    /// Real term with `a <= 0` or `λ <= 0`.
    NonPositive,
    /// Complex-conjugate structure that cannot be consolidated.
    ComplexPair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DroppedTerm {
    pub a: Complex64,
    pub lambda: Complex64,
    pub reason: DropReason,
    /// Whether the term carried non-negligible weight.
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoleResidueForm<T> {
    pub form: PoleForm,
    pub terms: Vec<PoleTerm<T>>,
    /// Polynomial part of a diagonal approximant: an additive constant for the
    /// sum form, a deterministic shift for the product form.
    pub constant: T,
    pub discarded_count: usize,
    pub dropped: Vec<DroppedTerm>,
    pub warnings: Vec<String>,
}

fn c64<T: Scalar>(z: Complex<T>) -> Complex64 {
    Complex64::new(z.re.lossy(), z.im.lossy())
}

impl<T: Scalar> PoleResidueForm<T> {
    /// For the sum form the LT itself; for the product form its exponent
    /// `-c s - Σ λ s/(s+a)`.
    fn rational_part(&self, s: Complex<T>) -> Complex<T> {
        let mut acc = Complex::new(self.constant, T::zero());
        for t in &self.terms {
            acc = acc + t.lambda / (s + t.a);
        }
        acc
    }

    /// Value of the represented Laplace transform.
    pub fn eval(&self, s: Complex<T>) -> Complex<T> {
        match self.form {
            PoleForm::SumOfPoles => self.rational_part(s),
            PoleForm::ProductOfExponentials => (-(s * self.rational_part(s))).exp(),
        }
    }

    pub fn to_f64(&self) -> PoleResidueForm<f64> {
        PoleResidueForm {
            form: self.form,
            terms: self.terms.iter().map(|t| PoleTerm { a: c64(t.a), lambda: c64(t.lambda) }).collect(),
            constant: self.constant.lossy(),
            discarded_count: self.discarded_count,
            dropped: self.dropped.clone(),
            warnings: self.warnings.clone(),
        }
    }

    /// True when every term has real, strictly positive `a` and `λ`.
    pub fn is_real_positive(&self) -> bool {
        self.terms.iter().all(|t| {
            t.a.im == T::zero() && t.lambda.im == T::zero() && t.a.re > T::zero() && t.lambda.re > T::zero()
        })
    }
}

impl<T: Scalar> Serialize for PoleResidueForm<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|t| {
                let mut o = json!({ "a": t.a.re.lossy(), "lambda": t.lambda.re.lossy() });
                if t.a.im != T::zero() || t.lambda.im != T::zero() {
                    o["a_im"] = json!(t.a.im.lossy());
                    o["lambda_im"] = json!(t.lambda.im.lossy());
                }
                o
            })
            .collect();
        let mut v = json!({
            "form": self.form.tag(),
            "terms": terms,
            "discarded": self.discarded_count,
        });
        if self.constant != T::zero() {
            v["constant"] = json!(self.constant.lossy());
        }
        v.serialize(serializer)
    }
}

/// Relative separation below which two denominator roots count as repeated.
pub const REPEATED_ROOT_TOL: f64 = 1e-6;

/// Partial-fraction decomposition of `P/Q`: `a_j = -root_j`,
/// `λ_j = P(root_j) / Q'(root_j)`.
pub fn to_pole_residue<T: Scalar>(pa: &PadeApproximant<T>, form: PoleForm) -> Result<PoleResidueForm<T>, PadeError> {
    if pa.k > pa.l {
        return Err(PadeError::DegreeMismatch { k: pa.k, l: pa.l });
    }
    let constant = if pa.k == pa.l && pa.l > 0 { pa.p[pa.k] / pa.q[pa.l] } else if pa.l == 0 { pa.p[0] } else { T::zero() };
    if pa.l == 0 {
        return Ok(PoleResidueForm {
            form,
            terms: Vec::new(),
            constant,
            discarded_count: 0,
            dropped: Vec::new(),
            warnings: Vec::new(),
        });
    }
    let (ps, qs) = pa.scaled();
    let roots = linalg::poly_roots(&qs)?;
    let mut warnings = Vec::new();
    if !roots.converged {
        warnings.push(format!("root polishing stopped after {} sweeps without converging", roots.iterations));
    }
    let t = &roots.roots;
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            let sep = (t[i] - t[j]).norm();
            let scale = t[i].norm().max(t[j].norm());
            if sep <= T::of(REPEATED_ROOT_TOL) * scale {
                let rho = ldexp(T::one(), pa.scale_exp);
                return Err(PadeError::RepeatedRoots { root: c64(t[i] * rho) });
            }
        }
    }
    let dq = linalg::derivative(&qs);
    let rho = ldexp(T::one(), pa.scale_exp);
    let terms = t
        .iter()
        .map(|&r| {
            let lambda = linalg::horner(&ps, r) / linalg::horner(&dq, r) * rho;
            PoleTerm { a: -(r * rho), lambda }
        })
        .collect();
    Ok(PoleResidueForm { form, terms, constant, discarded_count: 0, dropped: Vec::new(), warnings })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterOptions {
    /// Relative imaginary part below which a term is treated as real.
    pub pair_tol: f64,
    /// Probe-point tolerance when accepting a consolidated conjugate pair.
    pub probe_tol: f64,
    /// Weight, relative to `Σ|λ|`, below which a discarded term is negligible.
    pub negligible_weight: f64,
}

impl Default for FilterOptions {
    fn default() -> Self {
        Self { pair_tol: 1e-6, probe_tol: 1e-3, negligible_weight: 1e-8 }
    }
}

/// Exponent of one product factor, `-λ s / (s + a)`.
fn factor_exponent(a: Complex64, lambda: Complex64, s: Complex64) -> Complex64 {
    -lambda * s / (s + a)
}

fn pair_consolidates(ti: (Complex64, Complex64), tj: (Complex64, Complex64), merged: (f64, f64), tol: f64) -> bool {
    let scale = ti.0.norm();
    let mut probes = Vec::new();
    for m in [0.1, 1.0, 10.0] {
        probes.push(Complex64::new(m * scale, 0.0));
        probes.push(Complex64::new(0.0, m * scale));
    }
    probes.iter().all(|&s| {
        let e_pair = factor_exponent(ti.0, ti.1, s) + factor_exponent(tj.0, tj.1, s);
        let e_one = factor_exponent(Complex64::new(merged.0, 0.0), Complex64::new(merged.1, 0.0), s);
        if e_pair.re < -700.0 && e_one.re < -700.0 {
            return true;
        }
        let (f1, f2) = (e_pair.exp(), e_one.exp());
        (f1 - f2).norm() <= tol * f1.norm().max(f2.norm())
    })
}

/// Discard terms that the target form cannot use.
///
/// Sum form: drops poles with `Re a <= 0`. Product form: snaps nearly-real
/// terms to the real axis, merges nearly-real conjugate pairs into one real
/// term after a probe check, then drops anything not real and strictly
/// positive in both `a` and `λ`.
pub fn filter_poles<T: Scalar>(prf: &PoleResidueForm<T>, opts: &FilterOptions) -> Result<PoleResidueForm<T>, PadeError> {
    let mut out = prf.clone();
    out.terms.clear();
    let total: f64 = prf.terms.iter().map(|t| t.lambda.norm().lossy()).sum();
    let significant = |lam: f64| lam > opts.negligible_weight * total;
    let drop = |out: &mut PoleResidueForm<T>, a: Complex64, lambda: Complex64, reason: DropReason| {
        let sig = significant(lambda.norm());
        let msg = format!("discarded pole term a = {a}, lambda = {lambda} ({reason:?}{})", if sig { "" } else { ", negligible weight" });
        log::warn!("{msg}");
        out.warnings.push(msg);
        out.dropped.push(DroppedTerm { a, lambda, reason, significant: sig });
        out.discarded_count += 1;
    };

    match prf.form {
        PoleForm::SumOfPoles => {
            for t in &prf.terms {
                if t.a.re > T::zero() {
                    out.terms.push(*t);
                } else {
                    drop(&mut out, c64(t.a), c64(t.lambda), DropReason::UnstablePole);
                }
            }
        }
        PoleForm::ProductOfExponentials => {
            let n = prf.terms.len();
            let mut used = vec![false; n];
            let mut real: Vec<PoleTerm<T>> = Vec::new();
            let nearly_real = |t: &PoleTerm<T>| {
                let ra = t.a.im.abs().lossy() <= opts.pair_tol * t.a.norm().lossy();
                let rl = t.lambda.im.abs().lossy() <= opts.pair_tol * t.lambda.norm().lossy();
                ra && rl
            };
            for i in 0..n {
                if used[i] {
                    continue;
                }
                used[i] = true;
                let ti = prf.terms[i];
                if ti.a.im == T::zero() && ti.lambda.im == T::zero() {
                    real.push(ti);
                    continue;
                }
                let partner = (0..n)
                    .filter(|&j| !used[j])
                    .map(|j| (j, (prf.terms[j].a - ti.a.conj()).norm()))
                    .filter(|&(_, d)| d <= T::of(opts.pair_tol.max(1e-8)) * ti.a.norm())
                    .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(std::cmp::Ordering::Equal))
                    .map(|(j, _)| j);
                match partner {
                    Some(j) => {
                        used[j] = true;
                        let tj = prf.terms[j];
                        let two = T::of(2.0);
                        let merged = PoleTerm {
                            a: Complex::new((ti.a.re + tj.a.re) / two, T::zero()),
                            lambda: Complex::new(ti.lambda.re + tj.lambda.re, T::zero()),
                        };
                        let ok = nearly_real(&ti)
                            && nearly_real(&tj)
                            && pair_consolidates(
                                (c64(ti.a), c64(ti.lambda)),
                                (c64(tj.a), c64(tj.lambda)),
                                (merged.a.re.lossy(), merged.lambda.re.lossy()),
                                opts.probe_tol,
                            );
                        if ok {
                            real.push(merged);
                        } else {
                            drop(&mut out, c64(ti.a), c64(ti.lambda), DropReason::ComplexPair);
                            drop(&mut out, c64(tj.a), c64(tj.lambda), DropReason::ComplexPair);
                        }
                    }
                    None if nearly_real(&ti) => real.push(PoleTerm {
                        a: Complex::new(ti.a.re, T::zero()),
                        lambda: Complex::new(ti.lambda.re, T::zero()),
                    }),
                    None => drop(&mut out, c64(ti.a), c64(ti.lambda), DropReason::ComplexPair),
                }
            }
            for t in real {
                if t.a.re > T::zero() && t.lambda.re > T::zero() {
                    out.terms.push(t);
                } else {
                    drop(&mut out, c64(t.a), c64(t.lambda), DropReason::NonPositive);
                }
            }
            out.terms.sort_by(|x, y| x.a.re.partial_cmp(&y.a.re).unwrap_or(std::cmp::Ordering::Equal));
        }
    }
    if out.terms.is_empty() {
        return Err(PadeError::AllPolesDiscarded { discarded: out.discarded_count });
    }
    Ok(out)
}
