//! Ray integration for the extremal-map ODE and trajectory tracing for
//! quadratic differentials.
//!
//! A *ray* follows the boundary correspondence `t -> f(t e^{i gamma})` (or the
//! exterior analogue) from the origin out to `t_end`, advancing by analytic
//! jets: each step builds a Taylor jet at the current point, estimates its
//! convergence radius, and moves a fixed fraction of it. Branch continuity at
//! the square root of the slope comes from handing the previous jet's
//! derivative to the next jet as a hint, which stays correct through turning
//! points where the plain square root would flip sign.
//!
//! A *trajectory* of a quadratic differential `Q(z) dz^2 > 0` is integrated in
//! its own arc-length parameter `s` with `dz/ds = 1/sqrt(Q(z))`, sign chosen
//! by continuity. Launch points may sit on simple poles (one emanating arc) or
//! on zeros of order `m` (`m + 2` arcs, selected by index).

use num_complex::Complex64;

use crate::error::TraceError;
use crate::recurrence::{origin_jet_inner, origin_jet_outer, regular_jet, OdeParams};
use crate::series::ComplexSeries;

/// Which map a ray belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    /// Interior map `f` of the unit disk.
    Inner,
    /// Exterior map `g` of the complement of the disk (via `w = 1/zeta`).
    Outer,
}

/// A boundary ray: angle, how far to integrate, and which formulation.
#[derive(Debug, Clone, Copy)]
pub struct RaySpec {
    pub gamma: f64,
    pub t_end: f64,
    pub formulation: Formulation,
}

/// Tuning knobs for jet-stepping integration.
#[derive(Debug, Clone, Copy)]
pub struct RayOptions {
    /// Taylor order of each jet.
    pub order: usize,
    /// Fraction of the estimated convergence radius advanced per step.
    pub safety: f64,
    /// Abort when the iterate comes within this distance of a pole `b_j`.
    pub pole_tolerance: f64,
    /// Maximum number of jet steps.
    pub max_steps: usize,
}

impl Default for RayOptions {
    fn default() -> Self {
        RayOptions {
            order: 40,
            safety: 0.25,
            pole_tolerance: 1e-3,
            max_steps: 20_000,
        }
    }
}

/// Value and derivative of a ray at its endpoint.
#[derive(Debug, Clone, Copy)]
pub struct RayEnd {
    /// `f(t_end e^{i gamma})` (or `g` on the exterior).
    pub value: Complex64,
    /// Derivative with respect to `t` along the ray.
    pub dvalue: Complex64,
    /// Number of jet steps taken.
    pub steps: usize,
}

const MIN_STEP: f64 = 1e-13;
/// Default radius fallback when a jet's tail is too short to fit.
const RADIUS_FALLBACK: f64 = 0.5;

fn effective_radius(jet: &ComplexSeries, scale: f64) -> f64 {
    match jet.radius_estimate {
        Some(r) if r.is_finite() => r,
        _ => scale * RADIUS_FALLBACK,
    }
}

fn check_poles(params: &OdeParams, z: Complex64, tol: f64) -> Result<(), TraceError> {
    for &b in &params.poles {
        if (z - b).norm() < tol {
            return Err(TraceError::NearPole { pole: b, z });
        }
    }
    Ok(())
}

/// Steps a ray from an initial jet out to `t_end` with regular jets.
///
/// `t0` is the expansion point of `jet` (in absolute `t`), which must be a jet
/// in the local variable `s = t - t0` (for the origin jets, `s = t`).
fn continue_ray(
    params: &OdeParams,
    mut jet: ComplexSeries,
    mut t0: f64,
    t_end: f64,
    opts: &RayOptions,
) -> Result<RayEnd, TraceError> {
    let mut steps = 0usize;
    loop {
        steps += 1;
        if steps > opts.max_steps {
            return Err(TraceError::NoConvergence { budget: opts.max_steps });
        }
        let rho = effective_radius(&jet, t0.max(t_end - t0));
        let mut frac = opts.safety;
        loop {
            let h = (frac * rho).min(t_end - t0);
            if h < MIN_STEP && t_end - t0 > MIN_STEP {
                return Err(TraceError::StepCollapse { min_step: MIN_STEP, t: t0 });
            }
            let hs = Complex64::new(h, 0.0);
            let z_next = jet.eval(hs);
            let dz_next = jet.eval_derivative(hs);
            check_poles(params, z_next, opts.pole_tolerance)?;
            if t0 + h >= t_end - MIN_STEP {
                return Ok(RayEnd { value: z_next, dvalue: dz_next, steps });
            }
            match regular_jet(params, t0 + h, z_next, dz_next, opts.order) {
                Ok(next) => {
                    jet = next;
                    t0 += h;
                    break;
                }
                // A vanishing slope marks a turning point (anchor preimage on
                // the ray); stretch the current analytic jet past it.
                Err(crate::error::SeriesError::BranchPoint) if frac < 0.45 => {
                    frac *= 1.35;
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
}

/// Integrates an interior ray `t -> f(t e^{i gamma})`, `t in (0, t_end]`.
///
/// `fprime0` is `f'(0)`; the ray starts from the origin jet with
/// `z'(0) = fprime0 e^{i gamma}`.
pub fn integrate_ray_inner(
    params: &OdeParams,
    fprime0: Complex64,
    ray: &RaySpec,
    opts: &RayOptions,
) -> Result<RayEnd, TraceError> {
    debug_assert_eq!(ray.formulation, Formulation::Inner);
    let z1 = fprime0 * Complex64::from_polar(1.0, ray.gamma);
    let jet = origin_jet_inner(params, z1, opts.order)?;
    continue_ray(params, jet, 0.0, ray.t_end, opts)
}

/// Integrates an exterior ray `t -> g(e^{i gamma} / t)` written in `t`.
///
/// `cap` is the capacity (the leading Laurent coefficient of `g`). The first
/// step uses the substitution `u = t w` around `t = 0` and then continues in
/// `w` itself. Returns `w(t_end)` and `dw/dt`.
pub fn integrate_ray_outer(
    params: &OdeParams,
    cap: f64,
    ray: &RaySpec,
    opts: &RayOptions,
) -> Result<RayEnd, TraceError> {
    debug_assert_eq!(ray.formulation, Formulation::Outer);
    let u0 = Complex64::from_polar(cap, ray.gamma);
    let ujet = origin_jet_outer(params, u0, opts.order)?;
    let rho = effective_radius(&ujet, ray.t_end);
    let t1 = (opts.safety * rho).min(ray.t_end);
    let t1c = Complex64::new(t1, 0.0);
    let u = ujet.eval(t1c);
    let du = ujet.eval_derivative(t1c);
    let w = u / t1;
    let dw = (du * t1 - u) / (t1 * t1);
    check_poles(params, w, opts.pole_tolerance)?;
    if t1 >= ray.t_end - MIN_STEP {
        return Ok(RayEnd { value: w, dvalue: dw, steps: 1 });
    }
    let jet = regular_jet(params, t1, w, dw, opts.order)?;
    let end = continue_ray(params, jet, t1, ray.t_end, opts)?;
    Ok(RayEnd { value: end.value, dvalue: end.dvalue, steps: end.steps + 1 })
}

/// A quadratic differential `scale * prod (z - z_k)^{m_k} / prod (z - p_k)^{n_k}`.
#[derive(Debug, Clone)]
pub struct QuadDiff {
    pub zeros: Vec<(Complex64, u32)>,
    pub poles: Vec<(Complex64, u32)>,
    pub scale: Complex64,
}

impl QuadDiff {
    /// The Goluzin differential of an exterior configuration:
    /// `-prod_j (z - b_j)^{m_j} / prod_i (z - a_i)`.
    pub fn goluzin(anchors: &[Complex64], poles: &[(Complex64, u32)]) -> Self {
        QuadDiff {
            zeros: poles.to_vec(),
            poles: anchors.iter().map(|&a| (a, 1)).collect(),
            scale: Complex64::new(-1.0, 0.0),
        }
    }

    /// The interior differential
    /// `-prod_j (w - b_j)^{m_j} / (C w^2 prod_i (w - a_i))` for the interior
    /// ODE constant `C`.
    pub fn inner_extremal(anchors: &[Complex64], poles: &[(Complex64, u32)], c: Complex64) -> Self {
        let mut qpoles: Vec<(Complex64, u32)> = anchors.iter().map(|&a| (a, 1)).collect();
        qpoles.push((Complex64::new(0.0, 0.0), 2));
        QuadDiff {
            zeros: poles.to_vec(),
            poles: qpoles,
            scale: -Complex64::new(1.0, 0.0) / c,
        }
    }

    /// Evaluates `Q(z)`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut v = self.scale;
        for &(z0, m) in &self.zeros {
            v *= (z - z0).powu(m);
        }
        for &(p, n) in &self.poles {
            v /= (z - p).powu(n);
        }
        v
    }

    /// The factored residue at a singular point: `Q(z) ~ c (z - p)^m` with
    /// `m` the total order (`m < 0` at poles). Returns `(c, m)` or `None`
    /// when `p` matches no singular point.
    fn local_data(&self, p: Complex64, tol: f64) -> Option<(Complex64, i32)> {
        let mut order = 0i32;
        let mut matched = false;
        let mut c = self.scale;
        for &(z0, m) in &self.zeros {
            if (z0 - p).norm() < tol {
                order += m as i32;
                matched = true;
            } else {
                c *= (p - z0).powu(m);
            }
        }
        for &(q, n) in &self.poles {
            if (q - p).norm() < tol {
                order -= n as i32;
                matched = true;
            } else {
                c /= (p - q).powu(n);
            }
        }
        matched.then_some((c, order))
    }
}

/// When to stop a trajectory.
#[derive(Debug, Clone, Copy)]
pub enum StopCondition {
    /// Stop when `Im z` crosses the given level (from either side).
    ImLevel(f64),
    /// Stop on entering the disk of the given radius around a point.
    NearPoint(Complex64, f64),
    /// No condition: run the whole arc-length budget.
    Never,
}

/// Why a trajectory stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ImThreshold,
    ArcLength,
    MetPoint,
}

/// A traced trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Points along the arc, starting at the launch offset.
    pub points: Vec<Complex64>,
    /// The singular point the trajectory was launched from.
    pub start_anchor: Complex64,
    pub stop_reason: StopReason,
}

impl Trajectory {
    /// Total polyline arc length.
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Last point of the trajectory.
    pub fn end(&self) -> Complex64 {
        *self.points.last().expect("trajectory has points")
    }
}

/// Tuning knobs for trajectory tracing.
#[derive(Debug, Clone, Copy)]
pub struct TraceOptions {
    /// Base step in the arc-length parameter of the Q-metric.
    pub step: f64,
    /// Cap on the geometric (z-plane) displacement per step.
    pub z_step_cap: f64,
    /// Arc-length budget (z-plane length).
    pub max_length: f64,
    /// Launch offset from the singular start point.
    pub launch_offset: f64,
    /// Match tolerance identifying the start with a singular point.
    pub start_tolerance: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            step: 1e-3,
            z_step_cap: 1e-3,
            max_length: 50.0,
            launch_offset: 1e-7,
            start_tolerance: 1e-9,
        }
    }
}

/// Velocity of the trajectory at `z`: the branch of `1/sqrt(Q)` nearer `dir`.
fn velocity(q: &QuadDiff, z: Complex64, dir: Complex64) -> Complex64 {
    let mut v = 1.0 / q.eval(z).sqrt();
    if (v * dir.conj()).re < 0.0 {
        v = -v;
    }
    v
}

/// One RK4 step of length `h` in the Q-metric parameter, with branch tracking.
fn rk4_step(q: &QuadDiff, z: Complex64, dir: Complex64, h: f64) -> (Complex64, Complex64) {
    let k1 = velocity(q, z, dir);
    let k2 = velocity(q, z + k1 * (h / 2.0), k1);
    let k3 = velocity(q, z + k2 * (h / 2.0), k2);
    let k4 = velocity(q, z + k3 * h, k3);
    let zn = z + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
    (zn, k4)
}

/// Traces a trajectory of `q` starting at a singular point.
///
/// `start` must coincide (within `opts.start_tolerance`) with a simple pole or
/// a zero of `q`. From a simple pole exactly one arc emanates and
/// `direction_index` must be `None` or `Some(0)`; from a zero of order `m`
/// there are `m + 2` arcs, indexed by increasing angle, and an index is
/// required.
pub fn trace_trajectory(
    q: &QuadDiff,
    start: Complex64,
    direction_index: Option<usize>,
    stop: StopCondition,
    opts: &TraceOptions,
) -> Result<Trajectory, TraceError> {
    let (c, order) = q
        .local_data(start, opts.start_tolerance)
        .ok_or(TraceError::BadStart { start })?;
    let directions: Vec<f64> = match order {
        -1 => vec![-c.arg()],
        m if m > 0 => {
            let count = m as usize + 2;
            (0..count)
                .map(|k| (-c.arg() + 2.0 * std::f64::consts::PI * k as f64) / count as f64)
                .collect()
        }
        _ => return Err(TraceError::BadStart { start }),
    };
    let phi = if directions.len() == 1 {
        match direction_index {
            None | Some(0) => directions[0],
            Some(i) => return Err(TraceError::BadDirection { index: i, count: 1 }),
        }
    } else {
        let idx = direction_index.ok_or(TraceError::AmbiguousStart)?;
        *directions
            .get(idx)
            .ok_or(TraceError::BadDirection { index: idx, count: directions.len() })?
    };

    let dir0 = Complex64::from_polar(1.0, phi);
    let mut z = start + dir0 * opts.launch_offset;
    let mut dir = dir0;
    let mut points = vec![z];
    let mut length = 0.0f64;

    let im_side = |z: Complex64, level: f64| z.im >= level;
    let initial_side = match stop {
        StopCondition::ImLevel(level) => im_side(z, level),
        _ => false,
    };

    loop {
        let speed = 1.0 / q.eval(z).norm().sqrt();
        let h = if speed * opts.step > opts.z_step_cap {
            opts.z_step_cap / speed
        } else {
            opts.step
        };
        let (zn, dn) = rk4_step(q, z, dir, h);
        let seg = (zn - z).norm();
        length += seg;
        // Stop checks, with linear refinement on the final segment.
        match stop {
            StopCondition::ImLevel(level) => {
                if im_side(zn, level) != initial_side {
                    let f = if (zn.im - z.im).abs() > 0.0 {
                        ((level - z.im) / (zn.im - z.im)).clamp(0.0, 1.0)
                    } else {
                        1.0
                    };
                    points.push(z + (zn - z) * f);
                    return Ok(Trajectory {
                        points,
                        start_anchor: start,
                        stop_reason: StopReason::ImThreshold,
                    });
                }
            }
            StopCondition::NearPoint(target, tol) => {
                if (zn - target).norm() < tol {
                    points.push(zn);
                    points.push(target);
                    return Ok(Trajectory {
                        points,
                        start_anchor: start,
                        stop_reason: StopReason::MetPoint,
                    });
                }
            }
            StopCondition::Never => {}
        }
        points.push(zn);
        z = zn;
        dir = dn;
        if length >= opts.max_length {
            return Ok(Trajectory {
                points,
                start_anchor: start,
                stop_reason: StopReason::ArcLength,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Exterior two-point model: anchors {-1, 1}, capacity 1/2, g(w) = (w + 1/w)/2.
    /// The ray gamma = 0 satisfies w(t) = g evaluated along the positive axis:
    /// with u = t w = 1/2 + t^2/2 * ... exact: w(t) = (1/t + t)/2.
    #[test]
    fn outer_ray_matches_joukowski() {
        let params = OdeParams::outer(vec![c(-1.0, 0.0), c(1.0, 0.0)], vec![]);
        let ray = RaySpec { gamma: 0.0, t_end: 0.7, formulation: Formulation::Outer };
        let end = integrate_ray_outer(&params, 0.5, &ray, &RayOptions::default()).unwrap();
        let want = (1.0 / 0.7 + 0.7) / 2.0;
        assert_relative_eq!(end.value.re, want, epsilon = 1e-10);
        assert!(end.value.im.abs() < 1e-10);
        let dwant = (1.0 - 1.0 / (0.7f64 * 0.7)) / 2.0;
        assert_relative_eq!(end.dvalue.re, dwant, epsilon = 1e-8);
    }

    /// The same model off the axis: w(t e^{i gamma}) corresponds to
    /// g(e^{i gamma}/t) = (e^{i gamma}/t + t e^{-i gamma}) / 2.
    #[test]
    fn outer_ray_general_angle() {
        let params = OdeParams::outer(vec![c(-1.0, 0.0), c(1.0, 0.0)], vec![]);
        let gamma = 0.9f64;
        let t_end = 0.85;
        let ray = RaySpec { gamma, t_end, formulation: Formulation::Outer };
        let end = integrate_ray_outer(&params, 0.5, &ray, &RayOptions::default()).unwrap();
        let e = Complex64::from_polar(1.0, gamma);
        let want = (e / t_end + t_end / e) / 2.0;
        assert!((end.value - want).norm() < 1e-10, "got {} want {}", end.value, want);
    }

    /// gamma = 0 passes through the turning point w = 1 at t = 1 when
    /// continued beyond; check branch continuity just short of t = 1 and that
    /// the near-anchor stretch logic survives passing close by.
    #[test]
    fn outer_ray_near_turning_point() {
        let params = OdeParams::outer(vec![c(-1.0, 0.0), c(1.0, 0.0)], vec![]);
        let ray = RaySpec { gamma: 0.0, t_end: 0.999, formulation: Formulation::Outer };
        let end = integrate_ray_outer(&params, 0.5, &ray, &RayOptions::default()).unwrap();
        let want = (1.0 / 0.999 + 0.999) / 2.0;
        assert_relative_eq!(end.value.re, want, epsilon = 1e-9);
    }

    /// Interior map of the disk onto the plane minus two symmetric slits:
    /// the three-point ODE with a symmetric pair is exercised end to end in
    /// the problems module; here only smoke-test regularity of the stepping.
    #[test]
    fn inner_ray_runs_and_is_conjugate_symmetric() {
        let params = OdeParams::inner(vec![c(0.4, 0.5), c(0.4, -0.5)], vec![c(0.35, 0.0)]);
        let opts = RayOptions::default();
        let up = integrate_ray_inner(
            &params,
            c(0.21, 0.0),
            &RaySpec { gamma: 0.8, t_end: 0.9, formulation: Formulation::Inner },
            &opts,
        )
        .unwrap();
        let down = integrate_ray_inner(
            &params,
            c(0.21, 0.0),
            &RaySpec { gamma: -0.8, t_end: 0.9, formulation: Formulation::Inner },
            &opts,
        )
        .unwrap();
        assert_relative_eq!(up.value.re, down.value.re, epsilon = 1e-11);
        assert_relative_eq!(up.value.im, -down.value.im, epsilon = 1e-11);
    }

    /// Q = 1 has straight-line trajectories; from a simple pole of
    /// Q = c/(z - p) the single trajectory leaves along -arg(c).
    #[test]
    fn trajectory_from_simple_pole_direction() {
        // Q(z) = 2 / (z - i): c = 2, arg c = 0 => leaves along the positive
        // real direction from i.
        let q = QuadDiff {
            zeros: vec![],
            poles: vec![(c(0.0, 1.0), 1)],
            scale: c(2.0, 0.0),
        };
        let opts = TraceOptions { max_length: 0.5, ..TraceOptions::default() };
        let tr = trace_trajectory(&q, c(0.0, 1.0), None, StopCondition::Never, &opts).unwrap();
        assert_eq!(tr.stop_reason, StopReason::ArcLength);
        let end = tr.end();
        // The trajectory of c/(z-p) is the straight ray: Q dz^2 > 0 with
        // dz along e^{i0}: stays at Im = 1.
        assert!(end.re > 0.4, "end {end}");
        assert!((end.im - 1.0).abs() < 1e-8, "end {end}");
    }

    /// A double zero at the origin of Q = z^2 has four critical directions at
    /// angles 0, pi/2, pi, 3pi/2; pick the vertical one and stop on Im level.
    #[test]
    fn trajectory_from_double_zero_vertical() {
        let q = QuadDiff { zeros: vec![(c(0.0, 0.0), 2)], poles: vec![], scale: c(1.0, 0.0) };
        let tr = trace_trajectory(
            &q,
            c(0.0, 0.0),
            Some(1),
            StopCondition::ImLevel(0.4),
            &TraceOptions::default(),
        )
        .unwrap();
        assert_eq!(tr.stop_reason, StopReason::ImThreshold);
        let end = tr.end();
        assert!(end.re.abs() < 1e-8, "end {end}");
        assert_relative_eq!(end.im, 0.4, epsilon = 1e-9);
    }

    /// Conjugation equivariance: conjugate-symmetric data produce
    /// conjugate-symmetric trajectories.
    #[test]
    fn trajectory_conjugation_equivariance() {
        let anchors = vec![c(1.0, 0.0), c(-0.2, 0.8), c(-0.2, -0.8)];
        let q = QuadDiff::goluzin(&anchors, &[(c(0.05, 0.0), 1)]);
        let opts = TraceOptions { max_length: 0.6, ..TraceOptions::default() };
        let up = trace_trajectory(&q, c(-0.2, 0.8), None, StopCondition::Never, &opts).unwrap();
        let down = trace_trajectory(&q, c(-0.2, -0.8), None, StopCondition::Never, &opts).unwrap();
        let a = up.end();
        let b = down.end();
        assert!((a - b.conj()).norm() < 1e-7, "a {a} b {b}");
    }

    #[test]
    fn trajectory_bad_start_rejected() {
        let q = QuadDiff { zeros: vec![(c(0.0, 0.0), 2)], poles: vec![], scale: c(1.0, 0.0) };
        assert!(matches!(
            trace_trajectory(&q, c(0.3, 0.3), None, StopCondition::Never, &TraceOptions::default()),
            Err(TraceError::BadStart { .. })
        ));
        assert!(matches!(
            trace_trajectory(&q, c(0.0, 0.0), None, StopCondition::Never, &TraceOptions::default()),
            Err(TraceError::AmbiguousStart)
        ));
    }

    /// Near-pole guard: a ray that runs into a pole of the right-hand side
    /// reports NearPole rather than stepping across.
    #[test]
    fn ray_near_pole_guard() {
        // With a generous tolerance the very first evaluated point along the
        // stem ray already falls inside the guard disk around b = 0.35.
        let params = OdeParams::inner(vec![c(0.4, 0.5), c(0.4, -0.5)], vec![c(0.35, 0.0)]);
        let r = integrate_ray_inner(
            &params,
            c(0.21, 0.0),
            &RaySpec { gamma: 0.0, t_end: 0.5, formulation: Formulation::Inner },
            &RayOptions { pole_tolerance: 0.4, ..RayOptions::default() },
        );
        match r {
            Err(TraceError::NearPole { .. }) => {}
            other => panic!("expected NearPole, got {other:?}"),
        }
    }
}
