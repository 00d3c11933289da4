//! Truncated complex power (and Laurent) series with arithmetic, branch-tracked
//! roots, and a convergence-radius estimator.
//!
//! A [`ComplexSeries`] stores coefficients of
//! `z^lead_exponent * (c_0 + c_1 z + c_2 z^2 + ...)`. Most of the library works
//! with `lead_exponent == 0`; the exterior Laurent expansions use `-1`.
//!
//! All binary operations truncate to the shorter operand so that results never
//! claim more resolved coefficients than their inputs support.

use num_complex::Complex64;

use crate::error::SeriesError;

/// Minimum number of nonzero coefficients required by [`estimate_radius`].
const RADIUS_MIN_COEFFS: usize = 8;

/// A truncated series `z^lead_exponent * sum c_k z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSeries {
    /// Coefficients `c_0 ..= c_order`.
    pub coeffs: Vec<Complex64>,
    /// Power of `z` multiplying the stored polynomial part.
    pub lead_exponent: i32,
    /// Cached estimate of the convergence radius, if one has been computed.
    pub radius_estimate: Option<f64>,
}

impl ComplexSeries {
    /// Builds a series from coefficients with `lead_exponent == 0`.
    ///
    /// ```
    /// use num_complex::Complex64;
    /// use pt_core::series::ComplexSeries;
    ///
    /// let s = ComplexSeries::from_coeffs(vec![Complex64::new(1.0, 0.0); 4]);
    /// assert_eq!(s.order(), 3);
    /// ```
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        ComplexSeries {
            coeffs,
            lead_exponent: 0,
            radius_estimate: None,
        }
    }

    /// Builds a series from real coefficients.
    pub fn from_reals(coeffs: &[f64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// The constant series `c` truncated at `order`.
    pub fn constant(c: Complex64, order: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
        coeffs[0] = c;
        Self::from_coeffs(coeffs)
    }

    /// Truncation order (highest stored power relative to the lead exponent).
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Evaluates the series at `z` by Horner's rule (includes the lead factor).
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc * z.powi(self.lead_exponent)
    }

    /// Evaluates the derivative of the series at `z`.
    pub fn eval_derivative(&self, z: Complex64) -> Complex64 {
        let e = self.lead_exponent;
        if z.norm() == 0.0 {
            // Only the term with total exponent 1 contributes at the origin.
            return self
                .coeffs
                .iter()
                .enumerate()
                .find(|(k, _)| *k as i32 + e == 1)
                .map(|(_, &c)| c)
                .unwrap_or_else(|| Complex64::new(0.0, 0.0));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            let p = k as i32 + e;
            acc = acc * z + c * p as f64;
        }
        // acc now holds sum c_k (k+e) z^k evaluated without the lead factor shift.
        acc * z.powi(e - 1)
    }

    /// Returns true if every coefficient is finite.
    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Estimates and caches the convergence radius; see [`estimate_radius`].
    ///
    /// Short windows without enough nonzero coefficients leave the estimate
    /// unset instead of failing.
    pub fn with_radius(mut self) -> Result<Self, SeriesError> {
        if !self.is_finite() {
            return Err(SeriesError::NonFinite { index: self.order() });
        }
        self.radius_estimate = estimate_radius(&self).ok();
        Ok(self)
    }
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Adds two series with the same lead exponent, truncating to the shorter.
pub fn series_add(a: &ComplexSeries, b: &ComplexSeries) -> ComplexSeries {
    assert_eq!(
        a.lead_exponent, b.lead_exponent,
        "series_add requires matching lead exponents"
    );
    let n = a.coeffs.len().min(b.coeffs.len());
    let coeffs = (0..n).map(|k| a.coeffs[k] + b.coeffs[k]).collect();
    ComplexSeries {
        coeffs,
        lead_exponent: a.lead_exponent,
        radius_estimate: None,
    }
}

/// Multiplies two series by direct convolution; lead exponents add.
///
/// ```
/// use pt_core::series::{series_mul, ComplexSeries};
///
/// let a = ComplexSeries::from_reals(&[1.0, 1.0]);
/// let b = ComplexSeries::from_reals(&[1.0, -1.0]);
/// let p = series_mul(&a, &b);
/// assert_eq!(p.coeffs[0].re, 1.0);
/// assert_eq!(p.coeffs[1].re, 0.0);
/// ```
pub fn series_mul(a: &ComplexSeries, b: &ComplexSeries) -> ComplexSeries {
    let n = a.coeffs.len().min(b.coeffs.len());
    let mut coeffs = vec![zero(); n];
    for k in 0..n {
        let mut acc = zero();
        for i in 0..=k {
            acc += a.coeffs[i] * b.coeffs[k - i];
        }
        coeffs[k] = acc;
    }
    ComplexSeries {
        coeffs,
        lead_exponent: a.lead_exponent + b.lead_exponent,
        radius_estimate: None,
    }
}

/// Divides `a` by `b`; errors when `b` has vanishing constant term.
pub fn series_div(a: &ComplexSeries, b: &ComplexSeries) -> Result<ComplexSeries, SeriesError> {
    let b0 = b.coeffs.first().copied().unwrap_or_else(zero);
    if b0.norm() == 0.0 {
        return Err(SeriesError::SingularSeries);
    }
    let n = a.coeffs.len().min(b.coeffs.len());
    let mut coeffs = vec![zero(); n];
    for k in 0..n {
        let mut acc = a.coeffs[k];
        for i in 0..k {
            acc -= coeffs[i] * b.coeffs[k - i];
        }
        coeffs[k] = acc / b0;
    }
    Ok(ComplexSeries {
        coeffs,
        lead_exponent: a.lead_exponent - b.lead_exponent,
        radius_estimate: None,
    })
}

/// Computes the `p`-th root of a series with nonzero constant term.
///
/// The constant term of the result is the `p`-th root of `a_0` closest to
/// `branch_hint`; higher coefficients follow by the log/exp recurrences and are
/// therefore analytic continuations of that branch. The lead exponent of `a`
/// must be divisible by `p`.
///
/// ```
/// use num_complex::Complex64;
/// use pt_core::series::{series_root, ComplexSeries};
///
/// // sqrt(1 + z) = 1 + z/2 - z^2/8 + ...
/// let a = ComplexSeries::from_reals(&[1.0, 1.0, 0.0, 0.0]);
/// let r = series_root(&a, 2, Complex64::new(1.0, 0.0)).unwrap();
/// assert!((r.coeffs[1].re - 0.5).abs() < 1e-15);
/// assert!((r.coeffs[2].re + 0.125).abs() < 1e-15);
/// ```
pub fn series_root(
    a: &ComplexSeries,
    p: u32,
    branch_hint: Complex64,
) -> Result<ComplexSeries, SeriesError> {
    assert!(p >= 1, "root index must be positive");
    assert_eq!(
        a.lead_exponent % p as i32,
        0,
        "lead exponent must be divisible by the root index"
    );
    let a0 = a.coeffs.first().copied().unwrap_or_else(zero);
    if a0.norm() == 0.0 {
        return Err(SeriesError::BranchPoint);
    }
    let pf = p as f64;
    // p-th roots of a0: pick the one nearest the hint.
    let base = a0.norm().powf(1.0 / pf);
    let theta = a0.arg() / pf;
    let mut r0 = Complex64::from_polar(base, theta);
    let mut best = (r0 - branch_hint).norm();
    for k in 1..p {
        let cand =
            Complex64::from_polar(base, theta + 2.0 * std::f64::consts::PI * k as f64 / pf);
        let d = (cand - branch_hint).norm();
        if d < best {
            best = d;
            r0 = cand;
        }
    }

    let n = a.coeffs.len();
    // b = a / a0 so that b_0 = 1; l = log(b); result = r0 * exp(l / p).
    let b: Vec<Complex64> = a.coeffs.iter().map(|&c| c / a0).collect();
    let mut l = vec![zero(); n];
    for k in 1..n {
        let mut acc = b[k] * k as f64;
        for i in 1..k {
            acc -= l[i] * i as f64 * b[k - i];
        }
        l[k] = acc / k as f64;
    }
    let mut e = vec![zero(); n];
    e[0] = Complex64::new(1.0, 0.0);
    for k in 1..n {
        let mut acc = zero();
        for i in 1..=k {
            acc += l[i] * (i as f64 / pf) * e[k - i];
        }
        e[k] = acc / k as f64;
    }
    let coeffs = e.into_iter().map(|c| c * r0).collect();
    Ok(ComplexSeries {
        coeffs,
        lead_exponent: a.lead_exponent / p as i32,
        radius_estimate: None,
    })
}

/// Estimates the convergence radius from the decay of the coefficients.
///
/// Fits `log |c_n| ~ const - n log(rho)` by least squares over the nonzero
/// coefficients in the last quarter of the stored window (falling back to the
/// last half when the quarter holds too few points) and returns `rho`. A series
/// whose tail vanishes identically (a polynomial) reports `f64::INFINITY`.
///
/// Errors with [`SeriesError::TooFewCoefficients`] when fewer than eight
/// nonzero coefficients exist in the last half of the window.
pub fn estimate_radius(series: &ComplexSeries) -> Result<f64, SeriesError> {
    let n = series.coeffs.len();
    let tail_start = n - n / 4;
    if series.coeffs[n / 2..].iter().all(|c| c.norm() == 0.0) {
        return Ok(f64::INFINITY);
    }
    let collect = |start: usize| -> Vec<(f64, f64)> {
        (start..n)
            .filter_map(|k| {
                let m = series.coeffs[k].norm();
                (m > 0.0 && m.is_finite()).then(|| (k as f64, m.ln()))
            })
            .collect()
    };
    let mut pts = collect(tail_start);
    if pts.len() < RADIUS_MIN_COEFFS {
        pts = collect(n / 2);
    }
    if pts.len() < RADIUS_MIN_COEFFS {
        return Err(SeriesError::TooFewCoefficients {
            needed: RADIUS_MIN_COEFFS,
            got: pts.len(),
        });
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let rho = (-slope).exp();
    if !rho.is_finite() || rho <= 0.0 {
        return Err(SeriesError::NonFinite { index: n - 1 });
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mul_div_roundtrip() {
        let a = ComplexSeries::from_coeffs(
            (0..20).map(|k| c(1.0 / (k as f64 + 1.0), 0.3 * k as f64)).collect(),
        );
        let b = ComplexSeries::from_coeffs(
            (0..20).map(|k| c(2.0 - 0.1 * k as f64, 0.05 * k as f64)).collect(),
        );
        let q = series_div(&series_mul(&a, &b), &b).unwrap();
        for k in 0..20 {
            assert_relative_eq!(q.coeffs[k].re, a.coeffs[k].re, max_relative = 1e-12, epsilon = 1e-12);
            assert_relative_eq!(q.coeffs[k].im, a.coeffs[k].im, max_relative = 1e-12, epsilon = 1e-12);
        }
    }

    #[test]
    fn div_by_singular_series_fails() {
        let a = ComplexSeries::from_reals(&[1.0, 2.0]);
        let b = ComplexSeries::from_reals(&[0.0, 1.0]);
        assert!(matches!(series_div(&a, &b), Err(SeriesError::SingularSeries)));
    }

    #[test]
    fn root_tracks_branch_hint() {
        // sqrt of the constant -4: both branches reachable via the hint.
        let a = ComplexSeries::constant(c(-4.0, 0.0), 6);
        let plus = series_root(&a, 2, c(0.0, 1.0)).unwrap();
        let minus = series_root(&a, 2, c(0.0, -1.0)).unwrap();
        assert_relative_eq!(plus.coeffs[0].im, 2.0, epsilon = 1e-14);
        assert_relative_eq!(minus.coeffs[0].im, -2.0, epsilon = 1e-14);
    }

    #[test]
    fn cube_root_of_cube() {
        let base = ComplexSeries::from_coeffs(
            (0..16).map(|k| c(1.5 - 0.2 * k as f64, 0.1 * k as f64)).collect(),
        );
        let cubed = series_mul(&series_mul(&base, &base), &base);
        let r = series_root(&cubed, 3, base.coeffs[0]).unwrap();
        for k in 0..16 {
            assert_relative_eq!(r.coeffs[k].re, base.coeffs[k].re, epsilon = 1e-11, max_relative = 1e-11);
            assert_relative_eq!(r.coeffs[k].im, base.coeffs[k].im, epsilon = 1e-11, max_relative = 1e-11);
        }
    }

    #[test]
    fn root_of_zero_constant_term_fails() {
        let a = ComplexSeries::from_reals(&[0.0, 1.0]);
        assert!(matches!(series_root(&a, 2, c(1.0, 0.0)), Err(SeriesError::BranchPoint)));
    }

    #[test]
    fn radius_of_geometric_series() {
        // 1/(1 - z/2): radius 2.
        let s = ComplexSeries::from_coeffs((0..48).map(|k| c(0.5f64.powi(k), 0.0)).collect());
        let rho = estimate_radius(&s).unwrap();
        assert_relative_eq!(rho, 2.0, max_relative = 1e-6);
    }

    #[test]
    fn radius_of_polynomial_is_infinite() {
        let mut coeffs = vec![c(0.0, 0.0); 40];
        coeffs[0] = c(1.0, 0.0);
        coeffs[3] = c(-2.0, 0.0);
        let s = ComplexSeries::from_coeffs(coeffs);
        assert!(estimate_radius(&s).unwrap().is_infinite());
    }

    #[test]
    fn radius_with_sparse_coefficients() {
        // 1/(1 - (z/1.5)^3): only every third coefficient is nonzero.
        let mut coeffs = vec![c(0.0, 0.0); 60];
        for m in 0..20 {
            coeffs[3 * m] = c(1.5f64.powi(-3 * m as i32), 0.0);
        }
        let s = ComplexSeries::from_coeffs(coeffs);
        assert_relative_eq!(estimate_radius(&s).unwrap(), 1.5, max_relative = 1e-6);
    }

    #[test]
    fn eval_laurent_with_derivative() {
        // g(z) = 1/z + z/4: g'(z) = -1/z^2 + 1/4.
        let g = ComplexSeries {
            coeffs: vec![c(1.0, 0.0), c(0.0, 0.0), c(0.25, 0.0)],
            lead_exponent: -1,
            radius_estimate: None,
        };
        let z = c(0.3, 0.4);
        let want = 1.0 / z + z * 0.25;
        let got = g.eval(z);
        assert_relative_eq!(got.re, want.re, epsilon = 1e-14);
        assert_relative_eq!(got.im, want.im, epsilon = 1e-14);
        let dwant = -1.0 / (z * z) + 0.25;
        let dgot = g.eval_derivative(z);
        assert_relative_eq!(dgot.re, dwant.re, epsilon = 1e-13);
        assert_relative_eq!(dgot.im, dwant.im, epsilon = 1e-13);
    }
}
