//! Geometry of the application domains: the slit disk `D_{w1,w2,R}`, the
//! cubed domain `Omega_{z1,z2,R}`, the Koebe/psi/phi normalizing maps, the
//! inradius-1 condition, and cube-root symmetrization.
//!
//! The domain is a disk of radius `R` minus three radial slits starting at
//! the cube roots of unity, three further radial slits starting at twice the
//! cube roots of `-1`, and six traced arcs (two per symmetry sector). A chain
//! of unit circles `C1, C2, C3` pins the arcs so that the inradius is exactly
//! one: `C1` is tangent to the real slit and carries the tip `w1`, `C2` is
//! tangent to the halfline of argument `pi/3`, and `C3` is tangent to that
//! halfline and internally to `|z| = R`. The sufficient inradius condition is
//! `|q| >= R - 1` where `q` is the intersection of the curves at distance one
//! from the traced arcs.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{DomainError, PtError};
use crate::problems::{solve_outer_six_orbit, ConfigId, PTProblem, PTSolution, SolveSettings};
use crate::series::{series_root, ComplexSeries};
use crate::tracer::{trace_trajectory, QuadDiff, RayOptions, StopCondition, TraceOptions};

fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Smallest admissible abscissa, `1 + sqrt(2*sqrt(3) - 3)`.
pub fn min_x() -> f64 {
    1.0 + (2.0 * 3.0_f64.sqrt() - 3.0).sqrt()
}

/// How the tip `w2` and the parameter `x` are read off the construction.
///
/// The source construction fixes `P1 = (1 + sqrt(2*sqrt(3) - 3), 1)` and the
/// tangency chain `C1, C2, C3`, but leaves two readings of the remaining
/// freedom:
///
/// * [`GeometryReading::PaperPrimary`] — `x` is the abscissa of `P2` (whose
///   ordinate is forced by tangency to the `pi/3` halfline from below);
///   `w1` is the lower intersection point of `C1` and `C2` and `w2` the
///   intersection point of `C2` and `C3` on the far side of the halfline.
/// * [`GeometryReading::ChainTangent`] — `x` is the abscissa of `w1`, which
///   lies on `C1`; `C2` is the tangent unit circle through `w1`, and `w2` is
///   the intersection of `C2` and `C3` of larger real part.
///
/// The arbiter between the readings is numerical: the accepted reading must
/// reproduce the published `(x, R)` pairs through [`max_radius_for_x`]. The
/// primary reading passes (all three radii within 1e-6) and is the default;
/// the chain-tangent reading is kept selectable for the record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GeometryReading {
    /// `x` is the abscissa of `P2`; `w1` is the lower point of `C1 ∩ C2`,
    /// `w2` the far point of `C2 ∩ C3`.
    #[default]
    PaperPrimary,
    /// `x` is the abscissa of `w1 ∈ C1`; `w2` is the right point of
    /// `C2 ∩ C3`.
    ChainTangent,
}

/// The Koebe map `k(z) = z / (1 - z)^2`.
pub fn koebe(z: Complex64) -> Result<Complex64, DomainError> {
    if (z - 1.0).norm() == 0.0 {
        return Err(DomainError::MapPole);
    }
    let d = 1.0 - z;
    Ok(z / (d * d))
}

/// `psi(z) = -1/k(z/R^3) = -(R^3 - z)^2 / (R^3 z)`.
pub fn psi(z: Complex64, r: f64) -> Result<Complex64, DomainError> {
    if z.norm() == 0.0 {
        return Err(DomainError::MapPole);
    }
    let r3 = r.powi(3);
    let d = r3 - z;
    Ok(-(d * d) / (r3 * z))
}

/// `psi(1) = -(R^3 - 1)^2 / R^3`.
pub fn psi_at_one(r: f64) -> f64 {
    let r3 = r.powi(3);
    -(r3 - 1.0).powi(2) / r3
}

/// The normalizer `|psi(-8) - psi(1)| = ((R^3 + 8)^2 + 8 (R^3 - 1)^2) / (8 R^3)`.
pub fn delta(r: f64) -> f64 {
    let r3 = r.powi(3);
    ((r3 + 8.0).powi(2) + 8.0 * (r3 - 1.0).powi(2)) / (8.0 * r3)
}

/// `phi(z) = (psi(z) - psi(1)) / |psi(-8) - psi(1)|`; `phi(1) = 0`,
/// `phi(-8) = 1`, `phi(0) = infinity`.
pub fn phi(z: Complex64, r: f64) -> Result<Complex64, DomainError> {
    Ok((psi(z, r)? - psi_at_one(r)) / delta(r))
}

/// Inverse of [`phi`]: the root of the quadratic `psi(z) = Delta*w + psi(1)`
/// lying inside `D(0, R^3)`.
///
/// Clearing denominators gives `z^2 - R^3 (2 - V) z + R^6 = 0` with
/// `V = Delta*w + psi(1)`; the two roots multiply to `R^6`, so exactly one is
/// inside. It is computed in the cancellation-free form
/// `z = 2 R^3 / (T + sqrt(T^2 - 4))`, `T = 2 - V`, with the square-root
/// branch maximizing `|T + sqrt(T^2 - 4)|`.
pub fn phi_inv(w: Complex64, r: f64) -> Result<Complex64, DomainError> {
    let r3 = r.powi(3);
    let t = 2.0 - (delta(r) * w + psi_at_one(r));
    let mut s = (t * t - 4.0).sqrt();
    if (t + s).norm_sqr() < (t - s).norm_sqr() {
        s = -s;
    }
    let den = t + s;
    if den.norm() == 0.0 {
        return Err(DomainError::MapPole);
    }
    Ok(2.0 * r3 / den)
}

/// The tangency chain: centers `P1, P2, P3` and tips `w1, w2`.
#[derive(Debug, Clone, Copy)]
pub struct ChainPoints {
    pub p1: Complex64,
    pub p2: Complex64,
    pub p3: Complex64,
    pub w1: Complex64,
    pub w2: Complex64,
}

/// Intersection points of two unit circles, ordered by descending real part.
fn unit_circle_intersections(
    c1: Complex64,
    c2: Complex64,
) -> Result<(Complex64, Complex64), DomainError> {
    let d = c2 - c1;
    let dist = d.norm();
    if dist == 0.0 || dist >= 2.0 {
        return Err(DomainError::Infeasible(format!(
            "unit circles at distance {dist:.6} do not intersect"
        )));
    }
    let mid = (c1 + c2) / 2.0;
    let h = (1.0 - (dist / 2.0).powi(2)).sqrt();
    let offset = Complex64::new(0.0, 1.0) * d / dist * h;
    let (a, b) = (mid + offset, mid - offset);
    if a.re >= b.re {
        Ok((a, b))
    } else {
        Ok((b, a))
    }
}

/// Center of `C3`: the unit circle tangent to `|z| = R` internally and to
/// the halfline of argument `pi/3` from below.
fn c3_center(r: f64) -> Result<Complex64, DomainError> {
    if r <= 2.0 {
        return Err(DomainError::Infeasible(format!(
            "R = {r} leaves no room for the tangent circle C3"
        )));
    }
    let rho = r - 1.0;
    Ok(Complex64::from_polar(rho, PI / 3.0 - (1.0 / rho).asin()))
}

/// Builds the tangency chain for the given reading.
pub fn chain_points(x: f64, r: f64, reading: GeometryReading) -> Result<ChainPoints, DomainError> {
    if x < min_x() {
        return Err(DomainError::Infeasible(format!(
            "x = {x} below the minimum {:.10}",
            min_x()
        )));
    }
    let p1 = Complex64::new(min_x(), 1.0);
    let p3 = c3_center(r)?;
    match reading {
        GeometryReading::PaperPrimary => {
            // P2 = (x, sqrt(3)x - 2) lies at distance one below the pi/3 line.
            let p2 = Complex64::new(x, 3.0_f64.sqrt() * x - 2.0);
            // w1 pins C1 against C2: the lower C1/C2 intersection, whose
            // arc walls off the channel along the real slit.
            let (ia, ib) = unit_circle_intersections(p1, p2)?;
            let w1 = if ia.im <= ib.im { ia } else { ib };
            // w2 pins C2 against C3 on the far side of the pi/3 halfline;
            // the near intersection sits inside the covered line strip.
            let line_dist = |p: Complex64| (3.0_f64.sqrt() * p.re - p.im).abs() / 2.0;
            let (ja, jb) = unit_circle_intersections(p2, p3)?;
            let w2 = if line_dist(ja) >= line_dist(jb) { ja } else { jb };
            if line_dist(w2) <= 1.0 {
                return Err(DomainError::Infeasible(format!(
                    "both C2/C3 intersections hug the pi/3 line for x = {x}"
                )));
            }
            Ok(ChainPoints { p1, p2, p3, w1, w2 })
        }
        GeometryReading::ChainTangent => {
            let dx = x - p1.re;
            if dx.abs() >= 1.0 {
                return Err(DomainError::Infeasible(format!(
                    "x = {x} is off the circle C1 (|x - {:.10}| >= 1)",
                    p1.re
                )));
            }
            let w1 = Complex64::new(x, 1.0 + (1.0 - dx * dx).sqrt());
            // P2 = (p, sqrt(3)p - 2) with |P2 - w1| = 1: the larger root of
            // 4p^2 - 2(x + sqrt(3)(2 + y1)) p + x^2 + (2 + y1)^2 - 1 = 0.
            let y1 = w1.im;
            let half_b = x + 3.0_f64.sqrt() * (2.0 + y1);
            let c = x * x + (2.0 + y1).powi(2) - 1.0;
            let disc = half_b * half_b - 4.0 * c;
            if disc < 0.0 {
                return Err(DomainError::Infeasible(format!(
                    "no tangent circle C2 through w1 for x = {x}"
                )));
            }
            let p = (half_b + disc.sqrt()) / 4.0;
            let p2 = Complex64::new(p, 3.0_f64.sqrt() * p - 2.0);
            let (w2, _) = unit_circle_intersections(p2, p3)?;
            Ok(ChainPoints { p1, p2, p3, w1, w2 })
        }
    }
}

/// Signed tangency residuals of a chain; all vanish on a valid construction.
pub fn tangency_residuals(pts: &ChainPoints, r: f64) -> Vec<f64> {
    let line_dist = |p: Complex64| {
        // Distance from p to the halfline of argument pi/3 (as a full line).
        (3.0_f64.sqrt() * p.re - p.im).abs() / 2.0
    };
    vec![
        pts.p3.norm() - (r - 1.0),
        line_dist(pts.p2) - 1.0,
        line_dist(pts.p3) - 1.0,
        (pts.w1 - pts.p1).norm() - 1.0,
        (pts.w1 - pts.p2).norm() - 1.0,
        (pts.w2 - pts.p2).norm() - 1.0,
        (pts.w2 - pts.p3).norm() - 1.0,
    ]
}

/// The geometric data of `D_{w1,w2,R}`.
#[derive(Debug, Clone)]
pub struct DomainSpec {
    pub x: f64,
    pub r: f64,
    pub reading: GeometryReading,
    pub p1: Complex64,
    pub p2: Complex64,
    pub p3: Complex64,
    pub w1: Complex64,
    pub w2: Complex64,
    /// `z_i = w_i^3`.
    pub z1: Complex64,
    pub z2: Complex64,
    /// Traced arc from `w1` into the domain (polyline in the `w`-plane).
    pub gamma1: Vec<Complex64>,
    /// Traced arc from `w2`.
    pub gamma2: Vec<Complex64>,
    /// Intersection of the parallel curves at distance one, if found.
    pub q: Option<Complex64>,
    /// Capacity of the continuum `E` in the phi-plane.
    pub cap: f64,
    /// The outer six-point capacity solution behind the arcs.
    pub solution: PTSolution,
}

impl DomainSpec {
    /// Conjugate copy of `gamma1` (the domain is conjugation-symmetric).
    pub fn gamma1_conj(&self) -> Vec<Complex64> {
        self.gamma1.iter().map(|z| z.conj()).collect()
    }

    /// Conjugate copy of `gamma2`.
    pub fn gamma2_conj(&self) -> Vec<Complex64> {
        self.gamma2.iter().map(|z| z.conj()).collect()
    }
}

/// Options for [`build_domain`].
#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub reading: GeometryReading,
    /// Warm-start unknowns for the capacity solve.
    pub seed: Option<Vec<f64>>,
    pub settings: SolveSettings,
    /// Geometric step cap for arc tracing in the phi-plane.
    pub trace_step: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        // The left arm of the critical orbit is short, so ray integration must
        // tolerate passing near its double zero; the high step allowance keeps
        // the tightened pole tolerance from truncating rays early.
        let settings = SolveSettings {
            tol: 1e-9,
            ray: RayOptions {
                pole_tolerance: 1e-6,
                max_steps: 200_000,
                ..RayOptions::default()
            },
            ..SolveSettings::default()
        };
        BuildOptions {
            reading: GeometryReading::default(),
            seed: None,
            settings,
            trace_step: 5e-5,
        }
    }
}

fn stage(stage: &'static str, source: PtError) -> DomainError {
    DomainError::Stage {
        stage,
        source: Box::new(source),
    }
}

/// Anchors of the continuum `E` in the phi-plane for a chain: the trunk tips
/// `1` and `0` and the upper points `phi(z1)`, `phi(z2)` with conjugates, in
/// the order required by the `outer_six_sym` configuration (right tip, right
/// arm, left arm, left tip, conjugates).
pub fn phi_anchors(pts: &ChainPoints, r: f64) -> Result<Vec<Complex64>, DomainError> {
    let z1 = pts.w1.powi(3);
    let z2 = pts.w2.powi(3);
    let mut f1 = phi(z1, r)?;
    let mut f2 = phi(z2, r)?;
    // The continuum is conjugation-symmetric; keep the upper representatives.
    if f1.im < 0.0 {
        f1 = f1.conj();
    }
    if f2.im < 0.0 {
        f2 = f2.conj();
    }
    if f1.im <= 0.0 || f2.im <= 0.0 {
        return Err(DomainError::Infeasible(
            "a tip maps onto the trunk of the continuum".into(),
        ));
    }
    // Right arm = the one whose anchor lies closer to the right tip 1.
    let (ar, al) = if f1.re >= f2.re { (f1, f2) } else { (f2, f1) };
    if (ar - al).norm() < 1e-12 {
        return Err(DomainError::Infeasible(
            "the two arm anchors coincide".into(),
        ));
    }
    Ok(vec![cx(1.0), ar, al, cx(0.0), al.conj(), ar.conj()])
}

/// Cube root of `z` closest to `near` (continuity branch choice).
fn cube_root_near(z: Complex64, near: Complex64) -> Complex64 {
    let principal = z.powf(1.0 / 3.0);
    let omega = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let mut best = principal;
    let mut best_d = (best - near).norm();
    for k in 1..3 {
        let cand = principal * omega.powi(k);
        let d = (cand - near).norm();
        if d < best_d {
            best = cand;
            best_d = d;
        }
    }
    best
}

/// Traces the arm of `anchor` down to its trunk attachment `b` in the
/// phi-plane and maps the polyline to the `w`-plane through `phi_inv` and the
/// continuous cube root starting at `tip`.
fn trace_arm(
    q: &QuadDiff,
    anchor: Complex64,
    b: Complex64,
    tip: Complex64,
    r: f64,
    trace_step: f64,
) -> Result<Vec<Complex64>, DomainError> {
    let opts = TraceOptions {
        z_step_cap: trace_step,
        max_length: 5.0,
        ..TraceOptions::default()
    };
    let stop = StopCondition::NearPoint(b, 10.0 * trace_step);
    let traj = trace_trajectory(q, anchor, None, stop, &opts)
        .map_err(|e| stage("arc tracing", PtError::Trace(e)))?;
    let mut arc = Vec::with_capacity(traj.points.len() + 1);
    let mut prev = tip;
    arc.push(tip);
    for &p in &traj.points {
        let z = phi_inv(p, r)?;
        let w = cube_root_near(z, prev);
        if (w - prev).norm() > 0.0 {
            arc.push(w);
        }
        prev = w;
    }
    if arc.len() < 8 {
        return Err(DomainError::Infeasible(
            "traced arc degenerated to a point".into(),
        ));
    }
    Ok(arc)
}

/// Builds the full domain for the given `x` and `R`: tangency chain, outer
/// capacity solve in the phi-plane, traced arcs mapped back through
/// `phi_inv` and the cube root, and the parallel-curve intersection `q`.
pub fn build_domain(x: f64, r: f64, opts: &BuildOptions) -> Result<DomainSpec, DomainError> {
    let pts = chain_points(x, r, opts.reading)?;
    let worst = tangency_residuals(&pts, r)
        .into_iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if worst > 1e-12 {
        return Err(DomainError::Infeasible(format!(
            "tangency residual {worst:.3e} exceeds 1e-12"
        )));
    }
    let anchors = phi_anchors(&pts, r)?;
    let problem = PTProblem::new(ConfigId::OuterSixSym, anchors.clone())
        .map_err(|e| stage("anchor validation", e))?;
    let solution = match opts.seed.as_deref() {
        Some(seed) => solve_outer_six_orbit(&problem, Some(seed), &opts.settings)
            .or_else(|_| solve_outer_six_orbit(&problem, None, &opts.settings)),
        None => solve_outer_six_orbit(&problem, None, &opts.settings),
    }
    .map_err(|e| stage("capacity solve", e))?;
    let cap = solution.lead.re;
    let br = solution.b_points[0];
    let bl = solution.b_points[1];
    let quad = QuadDiff::goluzin(&anchors, &[(br, 2), (bl, 2)]);
    let t1 = tip_of(&pts, anchors[1], r)?;
    let t2 = tip_of(&pts, anchors[2], r)?;
    let arc_a = trace_arm(&quad, anchors[1], br, t1, r, opts.trace_step)?;
    let arc_b = trace_arm(&quad, anchors[2], bl, t2, r, opts.trace_step)?;
    // gamma1 is the arc rooted at w1 (the upper tip), gamma2 at w2.
    let (gamma1, gamma2) = if (arc_a[0] - pts.w1).norm() <= (arc_b[0] - pts.w1).norm() {
        (arc_a, arc_b)
    } else {
        (arc_b, arc_a)
    };
    let q = parallel_intersection(
        &extend_along_slit(&gamma1, r),
        &gamma2,
        &[pts.w1, pts.w2],
    )
    .ok();
    Ok(DomainSpec {
        x,
        r,
        reading: opts.reading,
        p1: pts.p1,
        p2: pts.p2,
        p3: pts.p3,
        w1: pts.w1,
        w2: pts.w2,
        z1: pts.w1.powi(3),
        z2: pts.w2.powi(3),
        gamma1,
        gamma2,
        q,
        cap,
        solution,
    })
}

/// Which tip (`w1` or `w2`) an arm anchor belongs to.
fn tip_of(pts: &ChainPoints, anchor: Complex64, r: f64) -> Result<Complex64, DomainError> {
    let f1 = phi(pts.w1.powi(3), r)?;
    let f2 = phi(pts.w2.powi(3), r)?;
    let d1 = (f1 - anchor).norm().min((f1.conj() - anchor).norm());
    let d2 = (f2 - anchor).norm().min((f2.conj() - anchor).norm());
    Ok(if d1 <= d2 { pts.w1 } else { pts.w2 })
}

/// The upper wall of the sector domain is the arc `gamma1` together with
/// the remainder of the pi/3 halfline slit it attaches to. When an end of
/// `gamma1` lands on that slit, the wall polyline continues along the slit
/// out to radius `r`, so the parallel curve of the wall is well defined
/// past the attachment point.
pub fn extend_along_slit(gamma1: &[Complex64], r: f64) -> Vec<Complex64> {
    let dir = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
    let slit_dist = |p: Complex64| (p * dir.conj()).im.abs();
    let mut wall: Vec<Complex64> = gamma1.to_vec();
    if wall.len() < 2 {
        return wall;
    }
    if slit_dist(wall[0]) < 0.05 && slit_dist(*wall.last().unwrap()) >= 0.05 {
        wall.reverse();
    }
    let last = *wall.last().unwrap();
    if slit_dist(last) < 0.05 {
        let s0 = (last * dir.conj()).re;
        let n = 400;
        for k in 1..=n {
            let s = s0 + (r - s0) * k as f64 / n as f64;
            wall.push(s * dir);
        }
    }
    wall
}

/// Offset of a polyline by distance one toward `side_ref`, using centered
/// differences for the tangent.
fn offset_polyline(pts: &[Complex64], side_ref: Complex64) -> Vec<Complex64> {
    let n = pts.len();
    let tangent = |k: usize| -> Complex64 {
        let lo = k.saturating_sub(1);
        let hi = (k + 1).min(n - 1);
        pts[hi] - pts[lo]
    };
    let mid = n / 2;
    let nm = Complex64::new(0.0, 1.0) * tangent(mid) / tangent(mid).norm();
    let sign = if (side_ref - pts[mid]).re * nm.re + (side_ref - pts[mid]).im * nm.im >= 0.0 {
        1.0
    } else {
        -1.0
    };
    (0..n)
        .map(|k| {
            let t = tangent(k);
            pts[k] + sign * Complex64::new(0.0, 1.0) * t / t.norm()
        })
        .collect()
}

/// Distance from `p` to a polyline, together with the nearest point.
fn polyline_nearest(pts: &[Complex64], p: Complex64) -> (f64, Complex64) {
    let mut best = f64::INFINITY;
    let mut at = pts[0];
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let ab = b - a;
        let len2 = ab.norm_sqr();
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((p - a).re * ab.re + (p - a).im * ab.im) / len2).clamp(0.0, 1.0)
        };
        let c = a + t * ab;
        let d = (p - c).norm();
        if d < best {
            best = d;
            at = c;
        }
    }
    (best, at)
}

/// All crossings of two polylines by segment-pair search.
fn polyline_crossings(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::new();
    for sa in a.windows(2) {
        for sb in b.windows(2) {
            let (p, r) = (sa[0], sa[1] - sa[0]);
            let (q, s) = (sb[0], sb[1] - sb[0]);
            let denom = r.re * s.im - r.im * s.re;
            if denom.abs() < 1e-30 {
                continue;
            }
            let pq = q - p;
            let t = (pq.re * s.im - pq.im * s.re) / denom;
            let u = (pq.re * r.im - pq.im * r.re) / denom;
            if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
                out.push(p + t * r);
            }
        }
    }
    out
}

/// Intersection `q` of the curves at distance one from `gamma1` and
/// `gamma2`: segment-pair search on the offset polylines plus Newton
/// refinement of `(dist(q, gamma1) - 1, dist(q, gamma2) - 1) = 0`.
pub fn parallel_intersection(
    gamma1: &[Complex64],
    gamma2: &[Complex64],
    tips: &[Complex64],
) -> Result<Complex64, DomainError> {
    if gamma1.len() < 2 || gamma2.len() < 2 {
        return Err(DomainError::NoIntersection);
    }
    let m1 = gamma1[gamma1.len() / 2];
    let m2 = gamma2[gamma2.len() / 2];
    let g1 = offset_polyline(gamma1, m2);
    let g2 = offset_polyline(gamma2, m1);
    let mut best: Option<Complex64> = None;
    for mut q in polyline_crossings(&g1, &g2) {
        for _ in 0..4 {
            let (d1, n1) = polyline_nearest(gamma1, q);
            let (d2, n2) = polyline_nearest(gamma2, q);
            if d1 == 0.0 || d2 == 0.0 {
                break;
            }
            // Rows of the Jacobian of (d1 - 1, d2 - 1) are the unit vectors
            // from the nearest points.
            let u1 = (q - n1) / d1;
            let u2 = (q - n2) / d2;
            let det = u1.re * u2.im - u1.im * u2.re;
            if det.abs() < 1e-9 {
                break;
            }
            let (f1, f2) = (d1 - 1.0, d2 - 1.0);
            let dx = (f1 * u2.im - f2 * u1.im) / det;
            let dy = (f2 * u1.re - f1 * u2.re) / det;
            q -= Complex64::new(dx, dy);
        }
        // Crossings that already lie in covered regions — the strip below
        // y = 1, the unit strip around the pi/3 halfline, or a unit tip
        // disk — put no constraint on the inradius.
        let line_dist = (3.0_f64.sqrt() * q.re - q.im) / 2.0;
        if q.im < 1.0 + 1e-9
            || line_dist < 1.0 + 1e-9
            || tips.iter().any(|w| (q - w).norm() < 1.0 + 1e-9)
        {
            continue;
        }
        if best.map_or(true, |b| q.norm() < b.norm()) {
            best = Some(q);
        }
    }
    best.ok_or(DomainError::NoIntersection)
}

/// The inradius margin `|q| - (R - 1)`; nonnegative when the sufficient
/// condition for inradius one holds.
pub fn inradius_check(spec: &DomainSpec) -> Result<f64, DomainError> {
    let q = match spec.q {
        Some(q) => q,
        None => parallel_intersection(
            &extend_along_slit(&spec.gamma1, spec.r),
            &spec.gamma2,
            &[spec.w1, spec.w2],
        )?,
    };
    Ok(q.norm() - (spec.r - 1.0))
}

/// Largest `R` (bisected to 1e-9) whose full pipeline — capacity solve, arc
/// tracing, inradius check — passes for the given `x`. Returns the radius
/// and the accepted domain.
pub fn max_radius_for_x(x: f64, opts: &BuildOptions) -> Result<(f64, DomainSpec), DomainError> {
    let bail = |message: String| DomainError::BisectionFailure { x, message };
    let base = opts.clone();
    let build = |r: f64, carry_seed: &mut Option<Vec<f64>>| -> Result<(f64, DomainSpec), DomainError> {
        let mut o = base.clone();
        o.seed = carry_seed.clone();
        let spec = build_domain(x, r, &o)?;
        let margin = inradius_check(&spec).unwrap_or(f64::NEG_INFINITY);
        *carry_seed = Some(spec.solution.unknowns.clone());
        Ok((margin, spec))
    };
    let mut carry = opts.seed.clone();
    // Bracket the last sign change of the margin by scanning upward in R.
    // The margin is not monotone at small R (the uncovered lens can shrink
    // into covered regions and reappear), so keep the final accept/reject
    // transition rather than the first.
    let mut last_accept: Option<(f64, DomainSpec)> = None;
    let mut bracket: Option<((f64, DomainSpec), f64)> = None;
    let mut r = 4.6;
    while r < 6.81 {
        let accepted = match build(r, &mut carry) {
            Ok((margin, spec)) => {
                if margin >= 0.0 {
                    last_accept = Some((r, spec));
                    true
                } else {
                    false
                }
            }
            // Infeasible chains and non-intersecting parallel curves both
            // count as rejections during the scan.
            Err(_) => false,
        };
        if !accepted {
            if let Some(lo) = last_accept.take() {
                bracket = Some((lo, r));
            }
        }
        r += 0.05;
    }
    let ((mut rlo, mut best), mut rhi) = match (bracket, last_accept) {
        (_, Some(_)) => return Err(bail("margin stayed positive up to R = 6.8".into())),
        (Some(b), None) => b,
        (None, None) => return Err(bail("no radius with positive margin".into())),
    };
    while rhi - rlo > 1e-9 {
        let rm = 0.5 * (rlo + rhi);
        match build(rm, &mut carry) {
            Ok((margin, spec)) => {
                if margin >= 0.0 {
                    rlo = rm;
                    best = spec;
                } else {
                    rhi = rm;
                }
            }
            Err(e) => return Err(bail(format!("pipeline failed at R = {rm}: {e}"))),
        }
    }
    Ok((rlo, best))
}

/// The symmetrized map `f(z) = z * cbrt(g(z^3)/z^3)` as a series: coefficient
/// `n` vanishes unless `n = 1 (mod 3)` and coefficient one is a cube root of
/// `g'(0)`.
pub fn symmetrize_cube_root(g: &ComplexSeries) -> Result<ComplexSeries, DomainError> {
    if g.lead_exponent != 0 && g.lead_exponent != 1 {
        return Err(DomainError::DegenerateMap);
    }
    let inner: Vec<Complex64> = if g.lead_exponent == 1 {
        g.coeffs.clone()
    } else {
        if g.coeffs.first().map_or(0.0, |c| c.norm()) != 0.0 {
            return Err(DomainError::DegenerateMap);
        }
        g.coeffs.iter().skip(1).copied().collect()
    };
    if inner.is_empty() || inner[0].norm() == 0.0 {
        return Err(DomainError::DegenerateMap);
    }
    let h = ComplexSeries::from_coeffs(inner);
    let hint = h.coeffs[0].powf(1.0 / 3.0);
    let c = series_root(&h, 3, hint).map_err(DomainError::Series)?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 3 * c.order() + 2];
    for (m, &cm) in c.coeffs.iter().enumerate() {
        coeffs[3 * m + 1] = cm;
    }
    Ok(ComplexSeries::from_coeffs(coeffs))
}

/// Decimates a polyline to roughly `target` points (keeping endpoints).
fn decimate(pts: &[Complex64], target: usize) -> Vec<Complex64> {
    if pts.len() <= target {
        return pts.to_vec();
    }
    let stride = pts.len() / target;
    let mut out: Vec<Complex64> = pts.iter().step_by(stride.max(1)).copied().collect();
    if *out.last().unwrap() != *pts.last().unwrap() {
        out.push(*pts.last().unwrap());
    }
    out
}

/// Distance from a candidate disk center to every boundary component of the
/// domain: the circle `|z| = R`, the six radial slits, and the twelve arc
/// copies (rotations and conjugates of `gamma1`, `gamma2`).
struct BoundaryModel {
    r: f64,
    slits: Vec<(Complex64, Complex64)>,
    arcs: Vec<Vec<Complex64>>,
}

impl BoundaryModel {
    fn new(spec: &DomainSpec) -> Self {
        let omega = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        let mut slits = Vec::new();
        for k in 0..3 {
            let u = omega.powi(k);
            slits.push((u, spec.r * u));
            let v = 2.0 * Complex64::from_polar(1.0, PI / 3.0 + 2.0 * PI * k as f64 / 3.0);
            slits.push((v, spec.r * v / 2.0));
        }
        let g1 = decimate(&spec.gamma1, 200);
        let g2 = decimate(&spec.gamma2, 200);
        let mut arcs = Vec::new();
        for k in 0..3 {
            let u = omega.powi(k);
            for base in [&g1, &g2] {
                arcs.push(base.iter().map(|z| z * u).collect());
                arcs.push(base.iter().map(|z| z.conj() * u).collect());
            }
        }
        BoundaryModel { r: spec.r, slits, arcs }
    }

    fn distance(&self, c: Complex64) -> f64 {
        let mut d = self.r - c.norm();
        if d <= 0.0 {
            return 0.0;
        }
        for &(a, b) in &self.slits {
            d = d.min(segment_distance(a, b, c));
        }
        for arc in &self.arcs {
            if d <= 0.0 {
                return 0.0;
            }
            d = d.min(polyline_nearest(arc, c).0);
        }
        d.max(0.0)
    }
}

fn segment_distance(a: Complex64, b: Complex64, p: Complex64) -> f64 {
    let ab = b - a;
    let t = (((p - a).re * ab.re + (p - a).im * ab.im) / ab.norm_sqr()).clamp(0.0, 1.0);
    (p - (a + t * ab)).norm()
}

/// Brute-force inradius oracle: the largest boundary distance over a grid of
/// candidate centers in the fundamental sector, refined down to `resolution`
/// with Lipschitz pruning (the distance function has Lipschitz constant one).
pub fn grid_inradius_oracle(spec: &DomainSpec, resolution: f64) -> f64 {
    let model = BoundaryModel::new(spec);
    let r = spec.r;
    let mut h = resolution;
    while h < r / 40.0 {
        h *= 2.0;
    }
    let in_sector = |c: Complex64| c.im >= 0.0 && c.im <= 3.0_f64.sqrt() * c.re && c.norm() <= r;
    // Coarse pass over the sector bounding box.
    let mut cells: Vec<(Complex64, f64)> = Vec::new();
    let mut best = 0.0f64;
    let steps = (r / h).ceil() as i64 + 1;
    for i in 0..=steps {
        for j in 0..=steps {
            let c = Complex64::new(i as f64 * h, j as f64 * h);
            if !in_sector(c) {
                continue;
            }
            let d = model.distance(c);
            if d > best {
                best = d;
            }
            cells.push((c, d));
        }
    }
    // Refine: a cell of half-width h/2 can only beat `best` if its center
    // distance plus the cell radius does.
    while h > resolution {
        let hh = h / 2.0;
        let slack = h * std::f64::consts::FRAC_1_SQRT_2;
        let mut next = Vec::new();
        cells.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        for &(c, d) in &cells {
            if d + slack <= best {
                continue;
            }
            for (di, dj) in [(-0.5, -0.5), (-0.5, 0.5), (0.5, -0.5), (0.5, 0.5)] {
                let cc = c + Complex64::new(di * hh, dj * hh);
                if !in_sector(cc) {
                    continue;
                }
                let dd = model.distance(cc);
                if dd > best {
                    best = dd;
                }
                next.push((cc, dd));
            }
        }
        cells = next;
        h = hh;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn koebe_omitted_value_endpoint() {
        let k = koebe(cx(-1.0)).unwrap();
        assert_abs_diff_eq!(k.re, -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(k.im, 0.0, epsilon = 1e-15);
        assert!(koebe(cx(1.0)).is_err());
    }

    #[test]
    fn psi_closed_forms() {
        let r = 5.0;
        let p1 = psi(cx(1.0), r).unwrap();
        assert_abs_diff_eq!(p1.re, psi_at_one(r), epsilon = 1e-9);
        let p8 = psi(cx(-8.0), r).unwrap();
        let r3 = r.powi(3);
        assert_abs_diff_eq!(p8.re, (r3 + 8.0).powi(2) / (8.0 * r3), epsilon = 1e-9);
        assert_abs_diff_eq!((p8 - p1).norm(), delta(r), epsilon = 1e-9);
        assert!(psi(cx(0.0), r).is_err());
    }

    #[test]
    fn phi_normalization_and_inverse() {
        let r = 5.1;
        assert_abs_diff_eq!(phi(cx(1.0), r).unwrap().norm(), 0.0, epsilon = 1e-14);
        let f8 = phi(cx(-8.0), r).unwrap();
        assert_abs_diff_eq!(f8.re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f8.im, 0.0, epsilon = 1e-12);
        for z in [
            Complex64::new(3.0, 4.0),
            Complex64::new(-20.0, 55.0),
            Complex64::new(90.0, -5.0),
            cx(-8.0),
            cx(64.0),
        ] {
            let w = phi(z, r).unwrap();
            let back = phi_inv(w, r).unwrap();
            assert!(
                (back - z).norm() < 1e-8 * z.norm().max(1.0),
                "round trip failed for {z}: got {back}"
            );
            assert!(back.norm() < r.powi(3));
        }
    }

    #[test]
    fn chain_tangency_residuals_vanish() {
        let x = 2.14;
        let r = 5.1;
        for reading in [GeometryReading::ChainTangent, GeometryReading::PaperPrimary] {
            match chain_points(x, r, reading) {
                Ok(pts) => {
                    for (i, t) in tangency_residuals(&pts, r).iter().enumerate() {
                        assert!(t.abs() < 1e-12, "{reading:?} residual {i} = {t:.3e}");
                    }
                }
                Err(DomainError::Infeasible(_)) => {}
                Err(e) => panic!("unexpected error: {e}"),
            }
        }
        let pts = chain_points(x, r, GeometryReading::ChainTangent).unwrap();
        assert_abs_diff_eq!(pts.p1.re, 1.681250038633, epsilon = 1e-9);
        assert_abs_diff_eq!(pts.p1.im, 1.0, epsilon = 1e-15);
        assert!(pts.w1.re > pts.p1.re && pts.w1.im > 1.0);
        assert!(pts.w2.re > pts.w1.re, "w2 = {} beyond w1 = {}", pts.w2, pts.w1);
    }

    #[test]
    fn infeasible_inputs_rejected() {
        assert!(matches!(
            chain_points(1.0, 5.1, GeometryReading::ChainTangent),
            Err(DomainError::Infeasible(_))
        ));
        assert!(matches!(
            chain_points(2.9, 5.1, GeometryReading::ChainTangent),
            Err(DomainError::Infeasible(_))
        ));
        assert!(matches!(
            chain_points(2.14, 1.5, GeometryReading::ChainTangent),
            Err(DomainError::Infeasible(_))
        ));
    }

    #[test]
    fn symmetrize_examples() {
        // g = zeta -> f = z.
        let g = ComplexSeries::from_reals(&[0.0, 1.0]);
        let f = symmetrize_cube_root(&g).unwrap();
        assert_abs_diff_eq!(f.coeffs[1].re, 1.0, epsilon = 1e-14);
        // g = 8 zeta -> f = 2z.
        let g = ComplexSeries::from_reals(&[0.0, 8.0]);
        let f = symmetrize_cube_root(&g).unwrap();
        assert_abs_diff_eq!(f.coeffs[1].re, 2.0, epsilon = 1e-14);
        // g = zeta + eps zeta^2 -> f = z + (eps/3) z^4 + O(z^7).
        let eps = 1e-3;
        let g = ComplexSeries::from_reals(&[0.0, 1.0, eps]);
        let f = symmetrize_cube_root(&g).unwrap();
        assert_abs_diff_eq!(f.coeffs[1].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.coeffs[4].re, eps / 3.0, epsilon = 1e-12);
        for (n, c) in f.coeffs.iter().enumerate() {
            if n % 3 != 1 {
                assert_eq!(c.norm(), 0.0, "coefficient {n} must vanish exactly");
            }
        }
        // Degenerate map rejected.
        let g = ComplexSeries::from_reals(&[0.0, 0.0, 1.0]);
        assert!(matches!(
            symmetrize_cube_root(&g),
            Err(DomainError::DegenerateMap)
        ));
    }

    #[test]
    fn offset_and_intersection_on_synthetic_arcs() {
        // Two straight "arcs" meeting at right angles; the unit offsets
        // toward each other intersect at a point at distance one from both.
        let g1: Vec<Complex64> = (0..=100)
            .map(|k| Complex64::new(k as f64 * 0.04, 2.0))
            .collect();
        let g2: Vec<Complex64> = (0..=100)
            .map(|k| Complex64::new(4.0, 2.0 + k as f64 * 0.04))
            .collect();
        let q = parallel_intersection(&g1, &g2, &[]).unwrap();
        assert_abs_diff_eq!(q.re, 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(q.im, 3.0, epsilon = 1e-9);
    }
}
