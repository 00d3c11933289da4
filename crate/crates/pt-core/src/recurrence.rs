//! Taylor-jet recurrences for the Loewner-type ODE of the extremal map.
//!
//! The interior map `f` and exterior map `g` of a critical configuration both
//! satisfy an ODE of the cleared-denominator form
//!
//! ```text
//! (t z'(t))^2 * prod_j (z - b_j)^{m_j}  =  C * z^pow * prod_i (z - a_i),
//! ```
//!
//! with `pow = 2`, `C = prod(-b_j)^{m_j} / prod(-a_i)` for the interior map and
//! `pow = 0`, `C = 1` for the exterior map written in the image variable. This
//! module computes truncated Taylor jets of `z(t)` at the origin and at regular
//! points; the exterior expansion at `t = 0` uses the substitution
//! `u(t) = t * w(t)` which turns the equation into
//!
//! ```text
//! (t u' - u)^2 * prod_j (u - b_j t)^{m_j}  =  prod_i (u - a_i t),
//! ```
//!
//! valid because the configurations always carry `sum m_j = n - 2` poles for
//! `n` anchors. Each recurrence clears denominators, so a jet of order `N`
//! costs `O(P N^2)` operations for `P` polynomial factors.

use num_complex::Complex64;

use crate::error::SeriesError;
use crate::series::ComplexSeries;

/// Polynomial data of the cleared-denominator ODE.
///
/// `poles` lists each `b_j` repeated by multiplicity; `anchors` lists the
/// finite `a_i`.
#[derive(Debug, Clone)]
pub struct OdeParams {
    pub anchors: Vec<Complex64>,
    pub poles: Vec<Complex64>,
    /// Constant `C` of the interior form; `1` for the exterior form.
    pub c: Complex64,
    /// Power of `z` on the right-hand side: `2` interior, `0` exterior.
    pub z_power: u32,
}

impl OdeParams {
    /// Interior parameters with `C = prod(-b) / prod(-a)` and `z^2`.
    pub fn inner(anchors: Vec<Complex64>, poles: Vec<Complex64>) -> Self {
        let num: Complex64 = poles.iter().map(|b| -b).product();
        let den: Complex64 = anchors.iter().map(|a| -a).product();
        OdeParams {
            anchors,
            poles,
            c: num / den,
            z_power: 2,
        }
    }

    /// Exterior parameters (`C = 1`, no `z` factor on the right).
    pub fn outer(anchors: Vec<Complex64>, poles: Vec<Complex64>) -> Self {
        OdeParams {
            anchors,
            poles,
            c: Complex64::new(1.0, 0.0),
            z_power: 0,
        }
    }

    /// `prod_j (z - b_j)` evaluated at a point.
    pub fn pole_poly(&self, z: Complex64) -> Complex64 {
        self.poles.iter().map(|&b| z - b).product()
    }

    /// `prod_i (z - a_i)` evaluated at a point.
    pub fn anchor_poly(&self, z: Complex64) -> Complex64 {
        self.anchors.iter().map(|&a| z - a).product()
    }

    /// Right-hand side `C z^pow A(z)` evaluated at a point.
    pub fn rhs(&self, z: Complex64) -> Complex64 {
        self.c * z.powu(self.z_power) * self.anchor_poly(z)
    }
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Workspace of cached product arrays for one jet computation.
///
/// `factors` holds the coefficient arrays of the linear factors; `chain`
/// their running partial products; `lhs`/`rhs` the two sides of the cleared
/// equation. `recompute(k)` refreshes index `k` of every derived array from
/// the current solution coefficients, so fixing a solution coefficient only
/// requires refreshing the few indices it feeds.
struct Workspace {
    /// Solution coefficients (z_k, or u_k for the exterior origin jet).
    sol: Vec<Complex64>,
    /// `d_j`: coefficients of `t z'` (or `t u' - u`).
    d: Vec<Complex64>,
    /// `u = d * d`.
    dd: Vec<Complex64>,
    /// Linear factors as coefficient closures evaluated per index.
    factor_terms: Vec<FactorKind>,
    /// Partial products of the factors, one array per factor.
    chain: Vec<Vec<Complex64>>,
    /// Left side `dd * B` (B = last pole chain entry or 1).
    lhs: Vec<Complex64>,
    /// Right side `W * A` (pre-multiplication by C).
    rhs: Vec<Complex64>,
    n_poles: usize,
}

/// How a linear factor's coefficient at index `k` is formed.
enum FactorKind {
    /// `z(s) + shift` (origin/regular jets): index 0 is `sol[0] + shift`,
    /// index k is `sol[k]`.
    Shifted(Complex64),
    /// `u - c t` (exterior origin jet): index 0 is `sol[0]`, index 1 is
    /// `sol[1] - c`, index k is `sol[k]`.
    LinearShift(Complex64),
    /// `z^2` via self-convolution of the solution.
    SolSquare,
    /// Constant 1.
    One,
}

enum DKind {
    /// Origin jet in `t`: `d_j = j z_j`.
    Origin,
    /// Regular jet in `s` about `t0`: `d_j = t0 (j+1) z_{j+1} + j z_j`.
    Regular(f64),
    /// Exterior origin: `d_j = (j - 1) u_j`.
    OuterOrigin,
}

impl Workspace {
    fn new(params: &OdeParams, len: usize, outer_origin: bool) -> Workspace {
        let mut factor_terms = Vec::new();
        if outer_origin {
            for &b in &params.poles {
                factor_terms.push(FactorKind::LinearShift(b));
            }
            for &a in &params.anchors {
                factor_terms.push(FactorKind::LinearShift(a));
            }
        } else {
            for &b in &params.poles {
                factor_terms.push(FactorKind::Shifted(-b));
            }
            for &a in &params.anchors {
                factor_terms.push(FactorKind::Shifted(-a));
            }
        }
        match params.z_power {
            0 => factor_terms.push(FactorKind::One),
            2 => factor_terms.push(FactorKind::SolSquare),
            p => panic!("unsupported z power {p}"),
        }
        let chain = vec![vec![zero(); len]; factor_terms.len()];
        Workspace {
            sol: vec![zero(); len],
            d: vec![zero(); len],
            dd: vec![zero(); len],
            factor_terms,
            chain,
            lhs: vec![zero(); len],
            rhs: vec![zero(); len],
            n_poles: params.poles.len(),
        }
    }

    fn factor_coeff(&self, which: usize, k: usize) -> Complex64 {
        match &self.factor_terms[which] {
            FactorKind::Shifted(shift) => {
                if k == 0 {
                    self.sol[0] + shift
                } else {
                    self.sol[k]
                }
            }
            FactorKind::LinearShift(c) => {
                if k == 1 {
                    self.sol[1] - c
                } else {
                    self.sol[k]
                }
            }
            FactorKind::SolSquare => {
                (0..=k).map(|i| self.sol[i] * self.sol[k - i]).sum()
            }
            FactorKind::One => {
                if k == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    zero()
                }
            }
        }
    }

    /// Refreshes index `k` of every derived array.
    fn recompute(&mut self, k: usize, dkind: &DKind) {
        let kf = k as f64;
        self.d[k] = match dkind {
            DKind::Origin => self.sol[k] * kf,
            DKind::Regular(t0) => {
                let next = if k + 1 < self.sol.len() {
                    self.sol[k + 1] * (kf + 1.0) * *t0
                } else {
                    zero()
                };
                next + self.sol[k] * kf
            }
            DKind::OuterOrigin => self.sol[k] * (kf - 1.0),
        };
        self.dd[k] = (0..=k).map(|i| self.d[i] * self.d[k - i]).sum();
        // Chain of factor partial products; the pole chain and the anchor
        // chain restart so `lhs` can use the bare pole product.
        for which in 0..self.factor_terms.len() {
            let val = if which == 0 || which == self.n_poles {
                self.factor_coeff(which, k)
            } else {
                let mut acc = zero();
                for i in 0..=k {
                    acc += self.chain[which - 1][k - i] * self.factor_coeff(which, i);
                }
                acc
            };
            self.chain[which][k] = val;
        }
        // lhs = dd * B where B is the last pole chain (or 1 with no poles).
        self.lhs[k] = if self.n_poles == 0 {
            self.dd[k]
        } else {
            let b = &self.chain[self.n_poles - 1];
            (0..=k).map(|i| self.dd[i] * b[k - i]).sum()
        };
        // rhs = last chain entry (W * A accumulated through the full chain).
        self.rhs[k] = self.chain[self.factor_terms.len() - 1][k];
    }
}

/// Builds the interior origin jet: `z(0) = 0`, `z'(0) = z1` given, coefficients
/// `z_2 ..= z_order` determined by the recurrence.
///
/// Returns the jet in `t` (index `k` holds the coefficient of `t^k`) with its
/// estimated convergence radius.
pub fn origin_jet_inner(
    params: &OdeParams,
    z1: Complex64,
    order: usize,
) -> Result<ComplexSeries, SeriesError> {
    assert_eq!(params.z_power, 2, "interior origin jet needs the z^2 form");
    let len = order + 2;
    let mut ws = Workspace::new(params, len, false);
    ws.sol[1] = z1;
    let dkind = DKind::Origin;
    for k in 0..=1 {
        ws.recompute(k, &dkind);
    }
    let b0 = params.pole_poly(zero());
    let pivot_base = z1 * b0 * 2.0;
    if pivot_base.norm() == 0.0 {
        return Err(SeriesError::SingularSeries);
    }
    for k in 2..=order {
        ws.sol[k] = zero();
        ws.recompute(k, &dkind);
        ws.recompute(k + 1, &dkind);
        let f = ws.lhs[k + 1] - params.c * ws.rhs[k + 1];
        ws.sol[k] = -f / (pivot_base * (k as f64 - 1.0));
        if !ws.sol[k].re.is_finite() || !ws.sol[k].im.is_finite() {
            return Err(SeriesError::NonFinite { index: k });
        }
        ws.recompute(k, &dkind);
        ws.recompute(k + 1, &dkind);
    }
    ws.sol.truncate(order + 1);
    ComplexSeries::from_coeffs(ws.sol).with_radius()
}

/// Builds a jet about a regular point `t0 > 0` with value `z0`.
///
/// The first derivative is `±sqrt(C z0^pow A(z0) / B(z0)) / t0`; the sign
/// closest to `dz_hint` is taken, which keeps the branch continuous along a
/// ray when the hint comes from the previous jet. The jet is in the local
/// variable `s = t - t0`.
pub fn regular_jet(
    params: &OdeParams,
    t0: f64,
    z0: Complex64,
    dz_hint: Complex64,
    order: usize,
) -> Result<ComplexSeries, SeriesError> {
    let b0 = params.pole_poly(z0);
    if b0.norm() == 0.0 {
        return Err(SeriesError::SingularSeries);
    }
    let slope_sq = params.rhs(z0) / b0 / (t0 * t0);
    let mut z1 = slope_sq.sqrt();
    if (z1 - dz_hint).norm() > (-z1 - dz_hint).norm() {
        z1 = -z1;
    }
    if z1.norm() == 0.0 {
        // At a branch point (anchor) the local jet is not of this form.
        return Err(SeriesError::BranchPoint);
    }
    let len = order + 2;
    let mut ws = Workspace::new(params, len, false);
    ws.sol[0] = z0;
    ws.sol[1] = z1;
    let dkind = DKind::Regular(t0);
    ws.recompute(0, &dkind);
    ws.recompute(1, &dkind);
    let pivot_base = z1 * b0 * (2.0 * t0 * t0);
    for k in 2..=order {
        ws.sol[k] = zero();
        ws.recompute(k - 1, &dkind);
        let f = ws.lhs[k - 1] - params.c * ws.rhs[k - 1];
        ws.sol[k] = -f / (pivot_base * k as f64);
        if !ws.sol[k].re.is_finite() || !ws.sol[k].im.is_finite() {
            return Err(SeriesError::NonFinite { index: k });
        }
        ws.recompute(k - 1, &dkind);
        ws.recompute(k, &dkind);
    }
    ws.sol.truncate(order + 1);
    ComplexSeries::from_coeffs(ws.sol).with_radius()
}

/// Builds the exterior origin jet in `u(t) = t w(t)` with `u(0) = u0`.
///
/// `u0 = cap * e^{i gamma}` encodes both the capacity and the ray angle. The
/// expansion is uniquely determined (no branch choice): the pivot of the
/// `t^k` coefficient is `-2 k u0^{n-1}` where `n` is the number of anchors.
/// With `gamma = 0` the coefficients are, up to the index shift, the Laurent
/// coefficients of the exterior map `g`.
pub fn origin_jet_outer(
    params: &OdeParams,
    u0: Complex64,
    order: usize,
) -> Result<ComplexSeries, SeriesError> {
    assert_eq!(params.z_power, 0, "exterior origin jet needs the z^0 form");
    assert_eq!(
        params.poles.len() + 2,
        params.anchors.len(),
        "exterior configurations carry n - 2 poles"
    );
    if u0.norm() == 0.0 {
        return Err(SeriesError::BranchPoint);
    }
    let n = params.anchors.len();
    let len = order + 1;
    let mut ws = Workspace::new(params, len, true);
    ws.sol[0] = u0;
    let dkind = DKind::OuterOrigin;
    ws.recompute(0, &dkind);
    let pivot_base = u0.powu(n as u32 - 1) * 2.0;
    for k in 1..=order {
        ws.sol[k] = zero();
        ws.recompute(k, &dkind);
        let f = ws.lhs[k] - ws.rhs[k];
        ws.sol[k] = f / (pivot_base * k as f64);
        if !ws.sol[k].re.is_finite() || !ws.sol[k].im.is_finite() {
            return Err(SeriesError::NonFinite { index: k });
        }
        ws.recompute(k, &dkind);
    }
    ComplexSeries::from_coeffs(ws.sol).with_radius()
}

/// Substitutes a jet back into the ODE and returns the largest coefficient
/// norm of the defect through the given index. Used by tests and the doubled
/// order verification pass.
pub fn ode_defect(
    params: &OdeParams,
    jet: &ComplexSeries,
    kind: JetKind,
    through: usize,
) -> f64 {
    let len = through + 1;
    let outer_origin = matches!(kind, JetKind::OuterOrigin);
    // One spare index so regular jets can read `sol[k + 1]` at the top.
    let mut ws = Workspace::new(params, len + 1, outer_origin);
    for k in 0..(len + 1).min(jet.coeffs.len()) {
        ws.sol[k] = jet.coeffs[k];
    }
    let dkind = match kind {
        JetKind::Origin => DKind::Origin,
        JetKind::Regular(t0) => DKind::Regular(t0),
        JetKind::OuterOrigin => DKind::OuterOrigin,
    };
    for k in 0..len {
        ws.recompute(k, &dkind);
    }
    let mut worst = 0.0f64;
    let c_norm = params.c.norm();
    for k in 0..len {
        let f = ws.lhs[k] - params.c * ws.rhs[k];
        // Scale by the magnitude of the products feeding this coefficient so
        // the defect measures relative cancellation, not coefficient growth.
        let mut scale = 1.0 + c_norm * ws.rhs[k].norm();
        if ws.n_poles == 0 {
            scale += ws.dd[k].norm();
        } else {
            let b = &ws.chain[ws.n_poles - 1];
            scale += (0..=k).map(|i| ws.dd[i].norm() * b[k - i].norm()).sum::<f64>();
        }
        worst = worst.max(f.norm() / scale);
    }
    worst
}

/// Which expansion a jet represents; see [`ode_defect`].
#[derive(Debug, Clone, Copy)]
pub enum JetKind {
    Origin,
    Regular(f64),
    OuterOrigin,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Two-anchor exterior model: anchors {-1, 1}, no poles. The solution with
    /// capacity c is u(t) = c + t^2/(4c) + ..., i.e. g(w) = (lambda w + 1/(lambda w)) / 2
    /// in suitable coordinates; u is even with u_2 = 1/(4c).
    #[test]
    fn outer_origin_matches_joukowski() {
        let params = OdeParams::outer(vec![c(-1.0, 0.0), c(1.0, 0.0)], vec![]);
        let cap = 0.5;
        let jet = origin_jet_outer(&params, c(cap, 0.0), 30).unwrap();
        // Exact: u = t * (lambda/t + t/lambda)/2 with lambda = 2 cap, so
        // u = cap + t^2/(4 cap) and all other coefficients vanish.
        assert_relative_eq!(jet.coeffs[0].re, cap, epsilon = 1e-14);
        assert_relative_eq!(jet.coeffs[2].re, 1.0 / (4.0 * cap), epsilon = 1e-13);
        for k in [1usize, 3, 4, 5, 10, 21] {
            assert!(jet.coeffs[k].norm() < 1e-12, "u_{k} = {}", jet.coeffs[k]);
        }
    }

    #[test]
    fn outer_origin_general_capacity_even_series() {
        // cap != 1/2 still solves the same equation; the full solution is
        // u = t cosh(K - ln t) with e^K = 2 cap: u = cap + t^2/(4 cap).
        let params = OdeParams::outer(vec![c(-1.0, 0.0), c(1.0, 0.0)], vec![]);
        let cap = 0.31;
        let jet = origin_jet_outer(&params, c(cap, 0.0), 24).unwrap();
        assert_relative_eq!(jet.coeffs[2].re, 1.0 / (4.0 * cap), epsilon = 1e-13);
        assert!(jet.coeffs[7].norm() < 1e-12);
    }

    #[test]
    fn outer_origin_defect_vanishes() {
        let params = OdeParams::outer(
            vec![c(1.0, 0.0), c(-0.2, 0.9), c(-0.2, -0.9)],
            vec![c(0.1, 0.0)],
        );
        let jet = origin_jet_outer(&params, c(0.63, 0.0), 40).unwrap();
        let defect = ode_defect(&params, &jet, JetKind::OuterOrigin, 40);
        assert!(defect < 1e-9, "defect {defect}");
    }

    #[test]
    fn origin_inner_defect_vanishes() {
        let params = OdeParams::inner(
            vec![c(0.4, 0.5), c(0.4, -0.5)],
            vec![c(0.35, 0.0)],
        );
        let jet = origin_jet_inner(&params, c(0.21, 0.0), 40).unwrap();
        let defect = ode_defect(&params, &jet, JetKind::Origin, 41);
        assert!(defect < 1e-9, "defect {defect}");
    }

    #[test]
    fn regular_jet_continues_origin_jet() {
        let params = OdeParams::inner(
            vec![c(0.4, 0.5), c(0.4, -0.5)],
            vec![c(0.35, 0.0)],
        );
        let origin = origin_jet_inner(&params, c(0.21, 0.0), 40).unwrap();
        let rho = origin.radius_estimate.unwrap();
        let t0 = (0.2 * rho).min(0.2);
        let z0 = origin.eval(c(t0, 0.0));
        let dz0 = origin.eval_derivative(c(t0, 0.0));
        let jet = regular_jet(&params, t0, z0, dz0, 40).unwrap();
        // Value and slope agree at s = 0; defect vanishes; short-range values agree.
        assert_relative_eq!(jet.coeffs[1].re, dz0.re, max_relative = 1e-10, epsilon = 1e-12);
        assert_relative_eq!(jet.coeffs[1].im, dz0.im, max_relative = 1e-10, epsilon = 1e-12);
        let defect = ode_defect(&params, &jet, JetKind::Regular(t0), 39);
        assert!(defect < 1e-8, "defect {defect}");
        let s = 0.02;
        let a = origin.eval(c(t0 + s, 0.0));
        let b = jet.eval(c(s, 0.0));
        assert!((a - b).norm() < 1e-10, "mismatch {}", (a - b).norm());
    }

    #[test]
    fn regular_jet_sign_follows_hint() {
        let params = OdeParams::outer(vec![c(-1.0, 0.0), c(1.0, 0.0)], vec![]);
        let t0 = 0.4;
        let z0 = c(0.9, 0.1);
        let up = regular_jet(&params, t0, z0, c(0.0, 1.0), 10).unwrap();
        let down = regular_jet(&params, t0, z0, c(0.0, -1.0), 10).unwrap();
        assert_relative_eq!(up.coeffs[1].re, -down.coeffs[1].re, epsilon = 1e-14);
        assert_relative_eq!(up.coeffs[1].im, -down.coeffs[1].im, epsilon = 1e-14);
    }

    #[test]
    fn jets_are_deterministic_across_orders() {
        let params = OdeParams::inner(
            vec![c(0.4, 0.5), c(0.4, -0.5)],
            vec![c(0.35, 0.0)],
        );
        let a = origin_jet_inner(&params, c(0.21, 0.0), 20).unwrap();
        let b = origin_jet_inner(&params, c(0.21, 0.0), 40).unwrap();
        for k in 0..=20 {
            assert_eq!(a.coeffs[k], b.coeffs[k], "coefficient {k} differs");
        }
    }

    #[test]
    fn near_pole_start_rejected() {
        let params = OdeParams::inner(vec![c(0.4, 0.5), c(0.4, -0.5)], vec![c(0.35, 0.0)]);
        let r = regular_jet(&params, 0.5, c(0.35, 0.0), c(1.0, 0.0), 10);
        assert!(matches!(r, Err(SeriesError::SingularSeries)));
    }
}
