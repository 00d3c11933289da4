//! The supported critical configurations and their nonlinear systems.
//!
//! Each configuration fixes the combinatorics of an extremal continuum (a
//! planar tree) and parameterises its critical data: the pole locations `b_j`
//! of the ODE, the leading coefficient (`f'(0)` for interior problems, the
//! capacity for exterior ones), and the marked boundary angles. The residual
//! systems impose *harmonic symmetry at midpoints*: every tree edge is covered
//! by two boundary arcs of equal length, so the gauge-fixed angle bookkeeping
//! enforces the lengths and the residuals require the arc midpoints to map to
//! the same point (or to a real point, for an edge on the real axis of a
//! conjugation-symmetric instance).
//!
//! Gauge: the preimage of the distinguished real boundary point (the prime end
//! at infinity for interior problems, the right tip for exterior ones) sits at
//! angle `0`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::PtError;
use crate::recurrence::OdeParams;
use crate::error::SolverError;
use crate::solver::{newton_refine, solve_system, SolveOptions, SolveReport};
use crate::tracer::{
    integrate_ray_inner, integrate_ray_outer, trace_trajectory, Formulation, QuadDiff,
    RayOptions, RaySpec, StopCondition, TraceOptions, Trajectory,
};

/// The supported configuration topologies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigId {
    /// Interior: tree spanning two anchors and infinity (one pole `b`).
    ThreePoint,
    /// Interior, conjugation-symmetric chain: stem, `b1` (arms to `a1`,
    /// conj `a1`), `b2` (arms to `a2`, conj `a2`), end anchor `a3` real.
    SixSym1,
    /// Interior, conjugation-symmetric star: `b1` real carrying the stem,
    /// the real anchor `a3`, and a conjugate pair of degree-3 vertices
    /// `b2`, conj `b2` with arms to `a1`, `a2` and their conjugates.
    SixSym2,
    /// Exterior: two anchors; the extremal continuum is the segment.
    OuterTwo,
    /// Exterior, conjugation-symmetric tripod: anchors `p` (real), `q`,
    /// conj `q`, one real pole `b`.
    OuterThreeSym,
    /// Exterior, conjugation-symmetric double-arm chain on a real trunk:
    /// anchors `p_r`, `a_r`, `a_l`, `p_l`, conj `a_l`, conj `a_r`, poles
    /// `b_r`, `b_l` (each of multiplicity two).
    OuterSixSym,
}

impl ConfigId {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConfigId::ThreePoint => "three_point",
            ConfigId::SixSym1 => "six_sym_1",
            ConfigId::SixSym2 => "six_sym_2",
            ConfigId::OuterTwo => "outer_two",
            ConfigId::OuterThreeSym => "outer_three_sym",
            ConfigId::OuterSixSym => "outer_six_sym",
        }
    }

    pub fn formulation(&self) -> Formulation {
        match self {
            ConfigId::ThreePoint | ConfigId::SixSym1 | ConfigId::SixSym2 => Formulation::Inner,
            _ => Formulation::Outer,
        }
    }

    /// Number of unknowns of the gauge-fixed system.
    pub fn dimension(&self) -> usize {
        match self {
            ConfigId::ThreePoint => 6,
            ConfigId::SixSym1 => 7,
            ConfigId::SixSym2 => 8,
            ConfigId::OuterTwo => 1,
            ConfigId::OuterThreeSym => 3,
            ConfigId::OuterSixSym => 7,
        }
    }

    /// Expected number of anchors.
    pub fn anchor_count(&self) -> usize {
        match self {
            ConfigId::ThreePoint | ConfigId::OuterTwo => 2,
            ConfigId::OuterThreeSym => 3,
            ConfigId::SixSym1 | ConfigId::SixSym2 => 5,
            ConfigId::OuterSixSym => 6,
        }
    }
}

impl std::str::FromStr for ConfigId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.replace('-', "_").as_str() {
            "three_point" => Ok(ConfigId::ThreePoint),
            "six_sym_1" => Ok(ConfigId::SixSym1),
            "six_sym_2" => Ok(ConfigId::SixSym2),
            "outer_two" => Ok(ConfigId::OuterTwo),
            "outer_three_sym" => Ok(ConfigId::OuterThreeSym),
            "outer_six_sym" => Ok(ConfigId::OuterSixSym),
            other => Err(format!("unknown configuration '{other}'")),
        }
    }
}

/// A problem instance: which configuration, spanning which anchors.
#[derive(Debug, Clone)]
pub struct PTProblem {
    pub formulation: Formulation,
    pub anchors: Vec<Complex64>,
    /// Whether the anchor set is closed under conjugation.
    pub symmetric: bool,
    pub config_id: ConfigId,
}

const SYM_TOL: f64 = 1e-12;

impl PTProblem {
    /// Validates the anchor list against the configuration's conventions.
    pub fn new(config_id: ConfigId, anchors: Vec<Complex64>) -> Result<Self, PtError> {
        if anchors.len() != config_id.anchor_count() {
            return Err(PtError::BadAnchors(format!(
                "{} expects {} anchors, got {}",
                config_id.as_str(),
                config_id.anchor_count(),
                anchors.len()
            )));
        }
        for (i, a) in anchors.iter().enumerate() {
            for b in &anchors[i + 1..] {
                if (a - b).norm() < SYM_TOL {
                    return Err(PtError::BadAnchors("anchors must be distinct".into()));
                }
            }
        }
        if config_id.formulation() == Formulation::Inner
            && anchors.iter().any(|a| a.norm() < SYM_TOL)
        {
            return Err(PtError::BadAnchors(
                "interior anchors must avoid the origin".into(),
            ));
        }
        let conj_pairs: &[(usize, usize)] = match config_id {
            ConfigId::SixSym1 | ConfigId::SixSym2 => &[(0, 4), (1, 3)],
            ConfigId::OuterSixSym => &[(1, 5), (2, 4)],
            _ => &[],
        };
        let reals: &[usize] = match config_id {
            ConfigId::SixSym1 | ConfigId::SixSym2 => &[2],
            ConfigId::OuterThreeSym => &[0],
            ConfigId::OuterSixSym => &[0, 3],
            _ => &[],
        };
        for &(i, j) in conj_pairs {
            if (anchors[i] - anchors[j].conj()).norm() > 1e-9 {
                return Err(PtError::BadAnchors(format!(
                    "anchors {i} and {j} must be a conjugate pair"
                )));
            }
            if anchors[i].im <= 0.0 {
                return Err(PtError::BadAnchors(format!(
                    "anchor {i} must lie in the upper half plane"
                )));
            }
        }
        for &i in reals {
            if anchors[i].im.abs() > 1e-9 {
                return Err(PtError::BadAnchors(format!("anchor {i} must be real")));
            }
        }
        if config_id == ConfigId::OuterThreeSym && anchors[1].im <= 0.0 {
            return Err(PtError::BadAnchors("anchor 1 must be in the upper half plane".into()));
        }
        if config_id == ConfigId::OuterSixSym && anchors[0].re <= anchors[3].re {
            return Err(PtError::BadAnchors(
                "right tip must lie to the right of the left tip".into(),
            ));
        }
        let symmetric = anchors.iter().all(|a| {
            anchors.iter().any(|b| (a.conj() - b).norm() < 1e-9)
        });
        Ok(PTProblem {
            formulation: config_id.formulation(),
            anchors,
            symmetric,
            config_id,
        })
    }
}

/// A solved configuration.
#[derive(Debug, Clone)]
pub struct PTSolution {
    /// Pole locations `b_j`, one entry per distinct pole.
    pub b_points: Vec<Complex64>,
    /// `f'(0)` for interior problems, the capacity for exterior ones.
    pub lead: Complex64,
    /// Named marked angles in radians, including dependent (gauge/mirror) ones.
    pub angles: Vec<(String, f64)>,
    /// Euclidean norm of the converged residual.
    pub residual_norm: f64,
    pub config_id: ConfigId,
    /// The raw unknown vector, for warm restarts.
    pub unknowns: Vec<f64>,
}

impl PTSolution {
    pub fn angle(&self, name: &str) -> Option<f64> {
        self.angles.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }
}

/// Solver settings for [`solve_pt`].
#[derive(Debug, Clone)]
pub struct SolveSettings {
    pub tol: f64,
    pub ray: RayOptions,
    pub solver: SolveOptions,
    /// Re-check the residual at doubled series order after convergence.
    pub verify: bool,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings {
            tol: 1e-12,
            ray: RayOptions::default(),
            solver: SolveOptions::default(),
            verify: true,
        }
    }
}

// ---------------------------------------------------------------------------
// Residual systems
// ---------------------------------------------------------------------------

fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

struct InnerMap<'a> {
    params: OdeParams,
    fp: Complex64,
    opts: &'a RayOptions,
}

impl InnerMap<'_> {
    fn boundary(&self, theta: f64) -> Result<Complex64, String> {
        let ray = RaySpec { gamma: theta, t_end: 1.0, formulation: Formulation::Inner };
        integrate_ray_inner(&self.params, self.fp, &ray, self.opts)
            .map(|e| e.value)
            .map_err(|e| e.to_string())
    }
}

struct OuterMap<'a> {
    params: OdeParams,
    cap: f64,
    opts: &'a RayOptions,
}

impl OuterMap<'_> {
    fn boundary(&self, theta: f64) -> Result<Complex64, String> {
        let ray = RaySpec { gamma: theta, t_end: 1.0, formulation: Formulation::Outer };
        integrate_ray_outer(&self.params, self.cap, &ray, self.opts)
            .map(|e| e.value)
            .map_err(|e| e.to_string())
    }

}

/// Checks that a marked-angle word is strictly increasing inside `(0, hi)`.
fn check_word(word: &[f64], hi: f64) -> Result<(), String> {
    let mut prev = 0.0;
    for &a in word {
        if a <= prev + 1e-8 {
            return Err(format!("angle word violated: {a} after {prev}"));
        }
        prev = a;
    }
    if prev >= hi - 1e-8 {
        return Err(format!("angle word exceeds {hi}"));
    }
    Ok(())
}

/// Residuals of the three-point (two anchors and infinity) interior system.
///
/// Unknowns: `[Re f'(0), Im f'(0), Re b, Im b, beta1, beta2]`. The third
/// pole angle is `beta3 = 2 pi - beta1` (harmonic symmetry of the stem pair
/// in the gauge that the infinity prime end sits at angle zero), and the
/// anchor angles are the midpoints `alpha1 = (beta1+beta2)/2`,
/// `alpha2 = (beta2+beta3)/2`.
pub fn residuals_3pt(
    problem: &PTProblem,
    x: &[f64],
    opts: &RayOptions,
) -> Result<Vec<f64>, String> {
    let fp = Complex64::new(x[0], x[1]);
    let b = Complex64::new(x[2], x[3]);
    let (beta1, beta2) = (x[4], x[5]);
    let beta3 = 2.0 * PI - beta1;
    check_word(&[beta1, beta2, beta3], 2.0 * PI)?;
    if fp.norm() < 1e-12 || b.norm() < 1e-12 {
        return Err("degenerate lead or pole".into());
    }
    let alpha1 = (beta1 + beta2) / 2.0;
    let alpha2 = (beta2 + beta3) / 2.0;
    let map = InnerMap {
        params: OdeParams::inner(problem.anchors.clone(), vec![b]),
        fp,
        opts,
    };
    let r1 = map.boundary(beta1 / 2.0)? - map.boundary(-beta1 / 2.0)?;
    let r2 = map.boundary((beta1 + alpha1) / 2.0)? - map.boundary((alpha1 + beta2) / 2.0)?;
    let r3 = map.boundary((beta2 + alpha2) / 2.0)? - map.boundary((alpha2 + beta3) / 2.0)?;
    // Normalise by the lead: the collapsed map f = 0 would otherwise be a
    // spurious solution of the homogeneous midpoint conditions.
    let s = 1.0 / fp.norm();
    Ok(vec![r1.re, r1.im, r2.re, r2.im, r3.re, r3.im]
        .into_iter()
        .map(|v| v * s)
        .collect())
}

/// Residuals of the conjugation-symmetric six-point interior systems.
///
/// `SixSym1` unknowns: `[f'(0), b1, b2, beta1_1, beta1_2, beta2_1, beta2_2]`
/// (all real; the mirror angles are dependent). `SixSym2` unknowns:
/// `[f'(0), b1, Re b2, Im b2, beta1_1, beta2_1, beta2_2, beta2_3]` with the
/// return angle `beta1_2 = beta2_1 - beta1_1 + beta2_3` forced by the equal
/// length of the two `b1`–`b2` edge arcs.
pub fn residuals_6pt_sym(
    problem: &PTProblem,
    x: &[f64],
    opts: &RayOptions,
) -> Result<Vec<f64>, String> {
    match problem.config_id {
        ConfigId::SixSym1 => {
            let fp = cx(x[0]);
            let (b1, b2) = (cx(x[1]), cx(x[2]));
            let (b11, b12, b21, b22) = (x[3], x[4], x[5], x[6]);
            check_word(&[b11, b12, b21, b22], PI)?;
            if fp.norm() < 1e-12 {
                return Err("degenerate lead".into());
            }
            let a1 = (b11 + b12) / 2.0;
            let a2 = (b21 + b22) / 2.0;
            let map = InnerMap {
                params: OdeParams::inner(problem.anchors.clone(), vec![b1, b1, b2, b2]),
                fp,
                opts,
            };
            let r0 = map.boundary(b11 / 2.0)?.im;
            let r1 = map.boundary((b11 + a1) / 2.0)? - map.boundary((a1 + b12) / 2.0)?;
            let r3 = map.boundary((b12 + b21) / 2.0)?.im;
            let r4 = map.boundary((b21 + a2) / 2.0)? - map.boundary((a2 + b22) / 2.0)?;
            let r6 = map.boundary((b22 + PI) / 2.0)?.im;
            let s = 1.0 / fp.norm();
            Ok(vec![r0, r1.re, r1.im, r3, r4.re, r4.im, r6]
                .into_iter()
                .map(|v| v * s)
                .collect())
        }
        ConfigId::SixSym2 => {
            let fp = cx(x[0]);
            let b1 = cx(x[1]);
            let b2 = Complex64::new(x[2], x[3]);
            let (c11, c21, c22, c23) = (x[4], x[5], x[6], x[7]);
            let c12 = c21 - c11 + c23;
            check_word(&[c11, c21, c22, c23, c12], PI)?;
            if fp.norm() < 1e-12 || b2.im <= 0.0 {
                return Err("degenerate lead or pole".into());
            }
            let a1 = (c21 + c22) / 2.0;
            let a2 = (c22 + c23) / 2.0;
            let map = InnerMap {
                params: OdeParams::inner(
                    problem.anchors.clone(),
                    vec![b1, b1, b2, b2.conj()],
                ),
                fp,
                opts,
            };
            let r0 = map.boundary(c11 / 2.0)?.im;
            let r1 = map.boundary((c11 + c21) / 2.0)? - map.boundary((c23 + c12) / 2.0)?;
            let r3 = map.boundary((c21 + a1) / 2.0)? - map.boundary((a1 + c22) / 2.0)?;
            let r5 = map.boundary((c22 + a2) / 2.0)? - map.boundary((a2 + c23) / 2.0)?;
            let r7 = map.boundary((c12 + PI) / 2.0)?.im;
            let s = 1.0 / fp.norm();
            Ok(vec![r0, r1.re, r1.im, r3.re, r3.im, r5.re, r5.im, r7]
                .into_iter()
                .map(|v| v * s)
                .collect())
        }
        _ => Err("residuals_6pt_sym needs a six-point configuration".into()),
    }
}

/// Residuals of the exterior systems.
///
/// `OuterTwo` (anchors normalised to `{-1, 1}` by the caller): the single
/// residual is `Im w` at the edge midpoint (the ray at angle `pi/2`), which
/// vanishes exactly when the image of the circle collapses onto the segment
/// and changes sign simply in the capacity. (The equivalent tip-derivative
/// condition at angle zero is avoided: for capacities below the root the tip
/// ray passes through a turning point of the integration.) `OuterThreeSym`
/// unknowns `[cap, b, beta_a]`; `OuterSixSym` unknowns
/// `[cap, b_r, b_l, beta_r1, beta_r2, beta_l1, beta_l2]`.
pub fn residuals_outer(
    problem: &PTProblem,
    x: &[f64],
    opts: &RayOptions,
) -> Result<Vec<f64>, String> {
    if x[0] <= 0.0 {
        return Err("capacity must be positive".into());
    }
    match problem.config_id {
        ConfigId::OuterTwo => {
            let map = OuterMap {
                params: OdeParams::outer(vec![cx(-1.0), cx(1.0)], vec![]),
                cap: x[0],
                opts,
            };
            let w = map.boundary(PI / 2.0)?;
            Ok(vec![w.im / x[0]])
        }
        ConfigId::OuterThreeSym => {
            let (cap, b, ba) = (x[0], cx(x[1]), x[2]);
            check_word(&[ba], PI)?;
            let aq = (ba + PI) / 2.0;
            let map = OuterMap {
                params: OdeParams::outer(problem.anchors.clone(), vec![b]),
                cap,
                opts,
            };
            let r0 = map.boundary(ba / 2.0)?.im;
            let r1 = map.boundary((ba + aq) / 2.0)? - map.boundary((aq + PI) / 2.0)?;
            Ok(vec![r0 / cap, r1.re / cap, r1.im / cap])
        }
        ConfigId::OuterSixSym => {
            let cap = x[0];
            let (br, bl) = (cx(x[1]), cx(x[2]));
            let (br1, br2, bl1, bl2) = (x[3], x[4], x[5], x[6]);
            check_word(&[br1, br2, bl1, bl2], PI)?;
            let ar = (br1 + br2) / 2.0;
            let al = (bl1 + bl2) / 2.0;
            let map = OuterMap {
                params: OdeParams::outer(problem.anchors.clone(), vec![br, br, bl, bl]),
                cap,
                opts,
            };
            let r0 = map.boundary(br1 / 2.0)?.im;
            let r1 = map.boundary((br1 + ar) / 2.0)? - map.boundary((ar + br2) / 2.0)?;
            let r3 = map.boundary((br2 + bl1) / 2.0)?.im;
            let r4 = map.boundary((bl1 + al) / 2.0)? - map.boundary((al + bl2) / 2.0)?;
            let r6 = map.boundary((bl2 + PI) / 2.0)?.im;
            let s = 1.0 / cap;
            Ok(vec![r0, r1.re, r1.im, r3, r4.re, r4.im, r6]
                .into_iter()
                .map(|v| v * s)
                .collect())
        }
        _ => Err("residuals_outer needs an exterior configuration".into()),
    }
}

/// Dispatches to the residual system of the problem's configuration.
pub fn residual_vector(
    problem: &PTProblem,
    x: &[f64],
    opts: &RayOptions,
) -> Result<Vec<f64>, String> {
    match problem.config_id {
        ConfigId::ThreePoint => residuals_3pt(problem, x, opts),
        ConfigId::SixSym1 | ConfigId::SixSym2 => residuals_6pt_sym(problem, x, opts),
        _ => residuals_outer(problem, x, opts),
    }
}

/// Critical-orbit residuals for the `SixSym1` configuration.
///
/// An alternative three-unknown system `[f'(0), b1, b2]` that dispenses with
/// the angles: the trajectory of the interior quadratic differential launched
/// from the anchor `a_i` and the vertical trajectory launched from the
/// double zero `b_i` must meet; each is traced to the level
/// `Im = Im(a_i) / 2` and the real parts compared. The third residual anchors
/// the stem on the real axis through the boundary ray at angle `0.1`, so the
/// heuristic guard rejects instances whose anchors hug the stem direction
/// (argument below `min_anchor_arg`) where that ray would leave the stem arc.
pub fn residuals_critical_orbit(
    problem: &PTProblem,
    x: &[f64],
    opts: &RayOptions,
    min_anchor_arg: f64,
) -> Result<Vec<f64>, String> {
    if problem.config_id != ConfigId::SixSym1 {
        return Err("critical-orbit residuals support six_sym_1 only".into());
    }
    let (a1, a2) = (problem.anchors[0], problem.anchors[1]);
    for a in [a1, a2] {
        if a.arg().abs() < min_anchor_arg {
            return Err(format!(
                "anchor {a} too close to the stem direction (|arg| < {min_anchor_arg})"
            ));
        }
    }
    let fp = cx(x[0]);
    let (b1, b2) = (cx(x[1]), cx(x[2]));
    let params = OdeParams::inner(problem.anchors.clone(), vec![b1, b1, b2, b2]);
    let q = QuadDiff::inner_extremal(
        &problem.anchors,
        &[(b1, 2), (b2, 2)],
        params.c,
    );
    let topts = TraceOptions { z_step_cap: 2e-4, ..TraceOptions::default() };
    let leg = |anchor: Complex64, b: Complex64| -> Result<f64, String> {
        let level = anchor.im / 2.0;
        let from_a = trace_trajectory(&q, anchor, None, StopCondition::ImLevel(level), &topts)
            .map_err(|e| e.to_string())?;
        // Pick the upward direction among the four arcs at the double zero.
        let up = (0..4)
            .map(|k| {
                trace_trajectory(
                    &q,
                    b,
                    Some(k),
                    StopCondition::Never,
                    &TraceOptions { max_length: 1e-5, ..topts },
                )
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let dir = (0..4)
            .max_by(|&i, &j| {
                let yi = (up[i].end() - b).im;
                let yj = (up[j].end() - b).im;
                yi.total_cmp(&yj)
            })
            .expect("four directions");
        let from_b = trace_trajectory(&q, b, Some(dir), StopCondition::ImLevel(level), &topts)
            .map_err(|e| e.to_string())?;
        Ok(from_a.end().re - from_b.end().re)
    };
    let r1 = leg(a1, b1)?;
    let r2 = leg(a2, b2)?;
    let map = InnerMap { params, fp, opts };
    let r3 = map.boundary(0.1)?.im;
    Ok(vec![r1, r2, r3])
}

// ---------------------------------------------------------------------------
// Trajectory/metric residuals for the exterior double-arm chain
// ---------------------------------------------------------------------------

/// Q-metric length of a traced polyline (midpoint rule per segment).
fn qlen_polyline(q: &QuadDiff, pts: &[Complex64]) -> f64 {
    pts.windows(2)
        .map(|w| q.eval((w[0] + w[1]) / 2.0).norm().sqrt() * (w[1] - w[0]).norm())
        .sum()
}

/// Q-metric length of the arm trajectory descending from `anchor`.
///
/// Near the simple pole the integrand behaves like `|w - a|^{-1/2}`, so the
/// plain midpoint rule loses several digits on the first segments. Writing
/// `sqrt(|Q|) = m(w)/sqrt(|w - a|)` with smooth `m`, the per-segment
/// integral is `m(mid) * seg * 2/(sqrt(s0) + sqrt(s1))` (exact for linear
/// `|w - a|` along the segment and reducing to the midpoint rule far from
/// the pole). The launch offset from `a` to the first traced point carries
/// the analytic remainder `2 m(w0) sqrt(|w0 - a|)`.
fn arm_qlen(q: &QuadDiff, anchor: Complex64, traced: &[Complex64]) -> f64 {
    let m = |w: Complex64| (q.eval(w).norm() * (w - anchor).norm()).sqrt();
    let mut total = 2.0 * m(traced[0]) * (traced[0] - anchor).norm().sqrt();
    for w in traced.windows(2) {
        let mid = (w[0] + w[1]) / 2.0;
        let s0 = (w[0] - anchor).norm().sqrt();
        let s1 = (w[1] - anchor).norm().sqrt();
        total += m(mid) * (w[1] - w[0]).norm() * 2.0 / (s0 + s1);
    }
    total
}

/// Index of the upward trajectory direction at a real double zero `b`.
fn upward_direction(q: &QuadDiff, b: f64, probe_length: f64, trace: &TraceOptions) -> Result<usize, String> {
    let probes = (0..4)
        .map(|k| {
            trace_trajectory(
                q,
                cx(b),
                Some(k),
                StopCondition::Never,
                &TraceOptions { max_length: probe_length, ..*trace },
            )
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    Ok((0..4)
        .max_by(|&i, &j| (probes[i].end() - b).im.total_cmp(&(probes[j].end() - b).im))
        .expect("four directions"))
}

/// Critical-orbit residuals for the `OuterSixSym` configuration.
///
/// The midpoint-welding system of [`residuals_outer`] degenerates when an
/// arm arc collapses: the paired midpoints coalesce and their difference
/// vanishes for *any* zero position, so short arms — exactly the regime of
/// the application domains — sit next to a spurious zero-width attractor.
/// This alternative system works directly with the critical graph of the
/// Goluzin differential `Q = -(w - b_r)^2 (w - b_l)^2 / prod_i (w - a_i)`:
///
/// * the trajectory descending from each arm anchor must meet the vertical
///   trajectory ascending from its double zero, compared at half the anchor
///   height (one equation per arm);
/// * the Q-metric length of each arm equals half the angular width of its
///   arc pair, and the Q-metric length of each trunk piece equals the width
///   of its arc: the boundary correspondence `sqrt(|Q|) |dw| = |d theta|` is
///   scale-free because `sqrt(|Q|) ~ 1/|w|` at infinity with unit
///   coefficient (two arm-width equations and two trunk equations);
/// * one interior ray of the outer ODE pins the capacity through `Im w = 0`
///   on the trunk arc adjacent to the right tip.
///
/// The metric equation for the trunk piece left of `b_l` is omitted: the
/// total Q-metric length of the critical graph is `2 pi` identically, so it
/// is implied by the other width equations.
///
/// Unknowns as in [`residuals_outer`]: `[cap, b_r, b_l, beta_r1, beta_r2,
/// beta_l1, beta_l2]`.
pub fn residuals_outer_six_orbit(
    problem: &PTProblem,
    x: &[f64],
    opts: &RayOptions,
    trace: &TraceOptions,
) -> Result<Vec<f64>, String> {
    if problem.config_id != ConfigId::OuterSixSym {
        return Err("critical-orbit exterior residuals need outer_six_sym".into());
    }
    let cap = x[0];
    if cap <= 0.0 {
        return Err("capacity must be positive".into());
    }
    let (br, bl) = (x[1], x[2]);
    let word = [x[3], x[4], x[5], x[6]];
    check_word(&word, PI)?;
    let (tip_r, tip_l) = (problem.anchors[0].re, problem.anchors[3].re);
    if !(tip_l < bl && bl < br && br < tip_r) {
        return Err(format!(
            "zeros must satisfy {tip_l} < b_l < b_r < {tip_r}, got b_l = {bl}, b_r = {br}"
        ));
    }
    let q = QuadDiff::goluzin(&problem.anchors, &[(cx(br), 2), (cx(bl), 2)]);
    let arm = |anchor: Complex64, b: f64, half_width: f64| -> Result<(f64, f64), String> {
        let level = anchor.im / 2.0;
        let from_a = trace_trajectory(&q, anchor, None, StopCondition::ImLevel(level), trace)
            .map_err(|e| e.to_string())?;
        let dir = upward_direction(&q, b, (level / 4.0).min(1e-4), trace)?;
        let from_b = trace_trajectory(&q, cx(b), Some(dir), StopCondition::ImLevel(level), trace)
            .map_err(|e| e.to_string())?;
        let meet = from_a.end().re - from_b.end().re;
        let len = arm_qlen(&q, anchor, &from_a.points) + qlen_polyline(&q, &from_b.points);
        Ok((meet, len - half_width))
    };
    let (meet_r, width_r) = arm(problem.anchors[1], br, (word[1] - word[0]) / 2.0)?;
    let (meet_l, width_l) = arm(problem.anchors[2], bl, (word[3] - word[2]) / 2.0)?;
    let qabs = |t: f64| q.eval(cx(t)).norm().sqrt();
    let mid = crate::bessel::integrate(qabs, bl, br, 1e-12) - (word[2] - word[1]);
    // Substitute x = tip_r - u^2 to absorb the sqrt singularity at the tip.
    let span = (tip_r - br).sqrt();
    let right =
        crate::bessel::integrate(|u| 2.0 * u * qabs(tip_r - u * u), 0.0, span, 1e-12) - word[0];
    let map = OuterMap {
        params: OdeParams::outer(
            problem.anchors.clone(),
            vec![cx(br), cx(br), cx(bl), cx(bl)],
        ),
        cap,
        opts,
    };
    let r0 = map.boundary(word[0] / 2.0)?.im / cap;
    Ok(vec![r0, meet_r, meet_l, width_r, width_l, mid, right])
}

/// Builds a self-consistent seed for the critical-orbit exterior system: the
/// zeros start from the axis crossings of the anchor trajectories (iterated
/// once, since the differential depends on the zeros) and the word is then
/// assembled from the Q-metric lengths, normalized to total `pi` on the
/// upper half.
pub fn orbit_seed(problem: &PTProblem, trace: &TraceOptions) -> Result<Vec<f64>, String> {
    let (tip_r, tip_l) = (problem.anchors[0].re, problem.anchors[3].re);
    let (a_r, a_l) = (problem.anchors[1], problem.anchors[2]);
    // Descending from an anchor is wildly sensitive when the arms are short
    // (the trajectory can hug the axis and overshoot the whole trunk), so the
    // zeros are refined the stable way round: ascend from the candidate zero
    // and move it until the ascent passes under its anchor.
    let ascend = |br: f64, bl: f64, b: f64, anchor: Complex64| -> Result<Trajectory, String> {
        let q = QuadDiff::goluzin(&problem.anchors, &[(cx(br), 2), (cx(bl), 2)]);
        let dir = upward_direction(&q, b, (anchor.im / 4.0).min(1e-4), trace)?;
        trace_trajectory(&q, cx(b), Some(dir), StopCondition::ImLevel(anchor.im), trace)
            .map_err(|e| e.to_string())
    };
    let mut br = a_r.re;
    let mut bl = a_l.re;
    for pass in 0..3 {
        for right_arm in [true, false] {
            let anchor = if right_arm { a_r } else { a_l };
            let mut b0 = if right_arm { br } else { bl };
            let g = |b: f64, br: f64, bl: f64| -> Result<f64, String> {
                Ok(ascend(br, bl, b, anchor)?.end().re - anchor.re)
            };
            let eval = |b: f64| {
                if right_arm {
                    g(b, b, bl)
                } else {
                    g(b, br, b)
                }
            };
            let mut g0 = eval(b0)?;
            let mut b1 = b0 - g0.clamp(-0.25 * anchor.im, 0.25 * anchor.im);
            for _ in 0..12 {
                let g1 = eval(b1)?;
                if g1.abs() < 1e-3 * anchor.im || (g1 - g0).abs() < 1e-15 {
                    break;
                }
                let step = (g1 * (b1 - b0) / (g1 - g0)).clamp(-anchor.im, anchor.im);
                b0 = b1;
                g0 = g1;
                b1 -= step;
            }
            if right_arm {
                br = b1;
            } else {
                bl = b1;
            }
        }
        if pass > 0 && tip_l < bl && bl < br && br < tip_r {
            break;
        }
    }
    if !(tip_l < bl && bl < br && br < tip_r) {
        return Err(format!(
            "seed zeros out of order: b_l = {bl}, b_r = {br} for tips [{tip_l}, {tip_r}]"
        ));
    }
    let q = QuadDiff::goluzin(&problem.anchors, &[(cx(br), 2), (cx(bl), 2)]);
    // Arm length from the ascent plus the analytic remainder of the
    // inverse-sqrt pole singularity between the trajectory end and the anchor.
    let arm_len = |b: f64, anchor: Complex64| -> Result<f64, String> {
        let t = ascend(br, bl, b, anchor)?;
        let end = *t.points.last().ok_or("empty ascent")?;
        let m = (q.eval(end).norm() * (end - anchor).norm()).sqrt();
        Ok(qlen_polyline(&q, &t.points) + 2.0 * m * (end - anchor).norm().sqrt())
    };
    let len_r = arm_len(br, a_r)?;
    let len_l = arm_len(bl, a_l)?;
    let qabs = |t: f64| q.eval(cx(t)).norm().sqrt();
    let right = crate::bessel::integrate(
        |u| 2.0 * u * qabs(tip_r - u * u),
        0.0,
        (tip_r - br).sqrt(),
        1e-10,
    );
    let mid = crate::bessel::integrate(qabs, bl, br, 1e-10);
    let left = crate::bessel::integrate(
        |u| 2.0 * u * qabs(tip_l + u * u),
        0.0,
        (bl - tip_l).sqrt(),
        1e-10,
    );
    let total = right + 2.0 * len_r + mid + 2.0 * len_l + left;
    if !(total.is_finite() && total > 0.0) {
        return Err("seed metric lengths are not finite".into());
    }
    let s = PI / total;
    let br1 = s * right;
    let br2 = br1 + s * 2.0 * len_r;
    let bl1 = br2 + s * mid;
    let bl2 = bl1 + s * 2.0 * len_l;
    let cap0 = (tip_r - tip_l) / 4.0;
    let seed = vec![cap0, br, bl, br1, br2, bl1, bl2];
    check_word(&seed[3..], PI)?;
    Ok(seed)
}

/// Solves the exterior double-arm chain through the critical-orbit system.
///
/// Intended for the application pipeline, where one arm is far shorter than
/// the trunk and the midpoint-welding system is trapped by its zero-width
/// attractor. Converges from the geometric seed of [`orbit_seed`] or from a
/// caller-provided warm start; the solution is verified by re-evaluating the
/// residuals with a refined trace step and doubled series order.
pub fn solve_outer_six_orbit(
    problem: &PTProblem,
    seed: Option<&[f64]>,
    settings: &SolveSettings,
) -> Result<PTSolution, PtError> {
    if problem.config_id != ConfigId::OuterSixSym {
        return Err(PtError::BadAnchors(
            "critical-orbit exterior solve needs outer_six_sym".into(),
        ));
    }
    // The metric residuals carry an O(step^2) polyline chord-length error;
    // step 5e-5 keeps it below ~5e-8 so the capacity is good to ~1e-7.
    let trace = TraceOptions {
        step: 5e-5,
        z_step_cap: 5e-5,
        max_length: 8.0,
        ..TraceOptions::default()
    };
    let mut f = |x: &[f64]| residuals_outer_six_orbit(problem, x, &settings.ray, &trace);
    let seed_vec: Vec<f64> = match seed {
        Some(s) => {
            if s.len() != 7 {
                return Err(PtError::BadDimension {
                    config: "outer_six_sym",
                    expected: 7,
                    got: s.len(),
                });
            }
            s.to_vec()
        }
        None => orbit_seed(problem, &trace).map_err(PtError::BadAnchors)?,
    };
    let report = match solve_system(&mut f, &seed_vec, settings.tol, &settings.solver) {
        Ok(rep) => rep,
        Err(SolverError::Stagnation { best, .. })
        | Err(SolverError::MaxIterations { best, .. }) => {
            newton_refine(&mut f, &best, settings.tol, &settings.solver)?
        }
        Err(e) => return Err(e.into()),
    };
    if settings.verify {
        let fine = TraceOptions {
            step: 2.5e-5,
            z_step_cap: 2.5e-5,
            ..trace
        };
        // Jets above order ~40 overflow on these anchor scales, so the
        // independence check doubles the order only up to that cap and relies
        // on the halved trace step for the metric components.
        let opts = RayOptions {
            order: (2 * settings.ray.order).min(40),
            ..settings.ray
        };
        let r = residuals_outer_six_orbit(problem, &report.root, &opts, &fine)
            .map_err(|m| PtError::BadAnchors(format!("verification evaluation failed: {m}")))?;
        let norm = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let allowed = (100.0 * settings.tol).max(1e-7);
        if norm > allowed {
            return Err(PtError::VerificationFailed { residual: norm, allowed });
        }
    }
    let root = report.root.clone();
    Ok(solution_from(problem, root, &report))
}

// ---------------------------------------------------------------------------
// Seeds
// ---------------------------------------------------------------------------

/// Evenly spaced word slots in `(0, hi)`: slot `k` of `n` is `k hi / (n+1)`.
fn slots(n: usize, hi: f64) -> Vec<f64> {
    (1..=n).map(|k| k as f64 * hi / (n + 1) as f64).collect()
}

/// A deterministic list of seed attempts for a configuration.
fn seed_attempts(problem: &PTProblem) -> Vec<Vec<f64>> {
    match problem.config_id {
        ConfigId::ThreePoint => {
            // Written for the reference aspect arg m = ±0.4636 (or its mirror):
            // the ratios fp/|m|, b/|m| and beta1 below are the solved values
            // there. Other aspects are reached by continuation in arg m.
            let m = problem.anchors[0];
            let scale = m.norm();
            let side = if m.re >= 0.0 { 1.0 } else { -1.0 };
            let mut out = vec![vec![
                -side * 2.85 * scale,
                0.0,
                side * 1.607 * scale,
                0.0,
                1.1551,
                PI,
            ]];
            for fs in [3.0, 1.5, 0.8] {
                for bs in [1.5, 1.0, 0.6] {
                    let b = side * (m.re.abs() * bs).max(0.3 * scale);
                    out.push(vec![-side * fs * scale, 0.0, b, 0.0, PI / 3.0, PI]);
                }
            }
            out
        }
        ConfigId::SixSym1 => {
            let mut out = Vec::new();
            for d in [0.6, 0.3, 1.0] {
                if let Some(s) = six_sym_1_koebe_seed(&problem.anchors, d) {
                    out.push(s);
                }
            }
            if out.is_empty() {
                // Fallback: uniform slots k pi/7 at k = 1, 3, 4, 6.
                let s = slots(6, PI);
                let (a1, a2, a3) = (problem.anchors[0], problem.anchors[1], problem.anchors[2]);
                out.push(vec![-4.0 * a3.re, a1.re, a2.re, s[0], s[2], s[3], s[5]]);
            }
            out
        }
        ConfigId::SixSym2 => {
            let (a1, a2, a3) = (problem.anchors[0], problem.anchors[1], problem.anchors[2]);
            let s = slots(7, PI);
            let side = if a3.re >= 0.0 { 1.0 } else { -1.0 };
            let b2 = (a1 + a2) / 2.0;
            let mut out = Vec::new();
            for fs in [2.0, 1.0, 4.0] {
                out.push(vec![
                    -side * fs * a1.norm(),
                    a3.re + side * 0.7 * (a1.re - a3.re).abs().max(0.3),
                    b2.re,
                    0.6 * b2.im,
                    s[0],
                    s[1],
                    s[3],
                    s[5],
                ]);
            }
            out
        }
        ConfigId::OuterTwo => {
            vec![vec![0.55], vec![0.4]]
        }
        ConfigId::OuterThreeSym => {
            let centroid: Complex64 =
                problem.anchors.iter().sum::<Complex64>() / problem.anchors.len() as f64;
            let scale = problem
                .anchors
                .iter()
                .map(|a| (a - centroid).norm())
                .fold(0.0f64, f64::max);
            vec![
                vec![0.63 * scale, centroid.re, PI / 3.0],
                vec![0.45 * scale, centroid.re, PI / 2.5],
            ]
        }
        ConfigId::OuterSixSym => {
            vec![outer_six_seed(&problem.anchors, 1.0)]
        }
    }
}

/// Flat-limit seed for the interior chain: as the arm heights go to zero the
/// tree degenerates to the half-line through `a3`, whose map is the scaled
/// Koebe function. The pole angles split symmetrically (by `dscale` times the
/// square-root height ratio) around the flat-limit anchor angles
/// `theta_i = 2 asin sqrt(a3 / Re a_i)`.
fn six_sym_1_koebe_seed(anchors: &[Complex64], dscale: f64) -> Option<Vec<f64>> {
    let (a1, a2, a3) = (anchors[0], anchors[1], anchors[2].re);
    let (r1, r2) = (a3 / a1.re, a3 / a2.re);
    if !(1e-6..1.0).contains(&r1) || !(1e-6..1.0).contains(&r2) || r2 <= r1 {
        return None;
    }
    let t1 = 2.0 * r1.sqrt().asin();
    let t2 = 2.0 * r2.sqrt().asin();
    let d1 = (dscale * (a1.im / a3.abs()).sqrt()).max(1e-3);
    let d2 = (dscale * (a2.im / a3.abs()).sqrt()).max(1e-3);
    let word = [t1 - d1, t1 + d1, t2 - d2, t2 + d2];
    if word[0] <= 1e-3 || word[1] >= word[2] || word[3] >= PI - 1e-3 {
        return None;
    }
    Some(vec![-4.0 * a3, a1.re, a2.re, word[0], word[1], word[2], word[3]])
}

/// Segment-map seed for the double-arm exterior chain.
///
/// Maps the trunk to `[0, 1]`, places each pole at the foot of its arm, and
/// spreads the pole angles by the circle preimage `theta(x) = arccos(2x ­- 1)`
/// of the segment map, widened in proportion to the arm height (scaled by
/// `height_scale` for continuation in the arm height).
fn outer_six_seed(anchors: &[Complex64], height_scale: f64) -> Vec<f64> {
    let (pr, ar, al, pl) = (anchors[0], anchors[1], anchors[2], anchors[3]);
    let scale = (pr - pl).norm();
    let t = |z: Complex64| (z - pl) / (pr - pl);
    let theta = |x: f64| (2.0 * x.clamp(0.0, 1.0) - 1.0).clamp(-1.0, 1.0).acos();
    let (tr, tl) = (t(ar), t(al));
    let hr = (2.0 * tr.im.abs() * height_scale).max(1e-3);
    let hl = (2.0 * tl.im.abs() * height_scale).max(1e-3);
    let mut br1 = theta((tr.re + hr).min(1.0 - 1e-3));
    let mut br2 = theta(tr.re - hr);
    let mut bl1 = theta((tl.re + hl).min(tr.re - hr));
    let mut bl2 = theta((tl.re - hl).max(1e-3));
    // Enforce the word order with minimal nudges.
    let eps = 1e-3;
    br1 = br1.max(eps);
    br2 = br2.max(br1 + eps);
    bl1 = bl1.max(br2 + eps);
    bl2 = bl2.max(bl1 + eps).min(PI - eps);
    vec![0.252 * scale, tr.re * scale + pl.re, tl.re * scale + pl.re, br1, br2, bl1, bl2]
}

// ---------------------------------------------------------------------------
// solve_pt
// ---------------------------------------------------------------------------

fn angle_table(config: ConfigId, x: &[f64]) -> Vec<(String, f64)> {
    let tau = 2.0 * PI;
    let mut t = Vec::new();
    let mut push = |name: &str, v: f64| t.push((name.to_string(), v));
    match config {
        ConfigId::ThreePoint => {
            let (b1, b2) = (x[4], x[5]);
            let b3 = tau - b1;
            push("beta1", b1);
            push("beta2", b2);
            push("beta3", b3);
            push("alpha1", (b1 + b2) / 2.0);
            push("alpha2", (b2 + b3) / 2.0);
        }
        ConfigId::SixSym1 => {
            let (b11, b12, b21, b22) = (x[3], x[4], x[5], x[6]);
            push("beta1_1", b11);
            push("beta1_2", b12);
            push("beta1_3", tau - b12);
            push("beta1_4", tau - b11);
            push("beta2_1", b21);
            push("beta2_2", b22);
            push("beta2_3", tau - b22);
            push("beta2_4", tau - b21);
            push("alpha1", (b11 + b12) / 2.0);
            push("alpha2", (b21 + b22) / 2.0);
            push("alpha3", PI);
            push("alpha4", tau - (b21 + b22) / 2.0);
            push("alpha5", tau - (b11 + b12) / 2.0);
        }
        ConfigId::SixSym2 => {
            let (c11, c21, c22, c23) = (x[4], x[5], x[6], x[7]);
            let c12 = c21 - c11 + c23;
            push("beta1_1", c11);
            push("beta1_2", c12);
            push("beta1_3", tau - c12);
            push("beta1_4", tau - c11);
            push("beta2_1", c21);
            push("beta2_2", c22);
            push("beta2_3", c23);
            push("beta3_1", tau - c23);
            push("beta3_2", tau - c22);
            push("beta3_3", tau - c21);
            push("alpha1", (c21 + c22) / 2.0);
            push("alpha2", (c22 + c23) / 2.0);
            push("alpha3", PI);
            push("alpha4", tau - (c22 + c23) / 2.0);
            push("alpha5", tau - (c21 + c22) / 2.0);
        }
        ConfigId::OuterTwo => {
            push("alpha1", 0.0);
            push("alpha2", PI);
        }
        ConfigId::OuterThreeSym => {
            let ba = x[2];
            push("beta1", ba);
            push("beta2", PI);
            push("beta3", tau - ba);
            push("alpha1", 0.0);
            push("alpha2", (ba + PI) / 2.0);
            push("alpha3", tau - (ba + PI) / 2.0);
        }
        ConfigId::OuterSixSym => {
            let (br1, br2, bl1, bl2) = (x[3], x[4], x[5], x[6]);
            push("beta_r1", br1);
            push("beta_r2", br2);
            push("beta_l1", bl1);
            push("beta_l2", bl2);
            push("beta_l3", tau - bl2);
            push("beta_l4", tau - bl1);
            push("beta_r3", tau - br2);
            push("beta_r4", tau - br1);
            push("alpha_tip_right", 0.0);
            push("alpha_r", (br1 + br2) / 2.0);
            push("alpha_l", (bl1 + bl2) / 2.0);
            push("alpha_tip_left", PI);
            push("alpha_l_mirror", tau - (bl1 + bl2) / 2.0);
            push("alpha_r_mirror", tau - (br1 + br2) / 2.0);
        }
    }
    t
}

fn solution_from(
    problem: &PTProblem,
    x: Vec<f64>,
    report: &SolveReport,
) -> PTSolution {
    let (b_points, lead): (Vec<Complex64>, Complex64) = match problem.config_id {
        ConfigId::ThreePoint => (vec![Complex64::new(x[2], x[3])], Complex64::new(x[0], x[1])),
        ConfigId::SixSym1 => (vec![cx(x[1]), cx(x[2])], cx(x[0])),
        ConfigId::SixSym2 => (
            vec![cx(x[1]), Complex64::new(x[2], x[3]), Complex64::new(x[2], -x[3])],
            cx(x[0]),
        ),
        ConfigId::OuterTwo => (vec![], cx(x[0])),
        ConfigId::OuterThreeSym => (vec![cx(x[1])], cx(x[0])),
        ConfigId::OuterSixSym => (vec![cx(x[1]), cx(x[2])], cx(x[0])),
    };
    PTSolution {
        b_points,
        lead,
        angles: angle_table(problem.config_id, &x),
        residual_norm: report.residual_norm,
        config_id: problem.config_id,
        unknowns: x,
    }
}

fn try_solve(
    problem: &PTProblem,
    seed: &[f64],
    settings: &SolveSettings,
) -> Result<SolveReport, PtError> {
    let mut f = |x: &[f64]| residual_vector(problem, x, &settings.ray);
    match solve_system(&mut f, seed, settings.tol, &settings.solver) {
        Ok(rep) => Ok(rep),
        // The Broyden dogleg can stall near badly conditioned solutions;
        // retry from its best iterate with full-Jacobian Newton.
        Err(SolverError::Stagnation { best, .. })
        | Err(SolverError::MaxIterations { best, .. }) => {
            Ok(newton_refine(&mut f, &best, settings.tol, &settings.solver)?)
        }
        Err(e) => Err(e.into()),
    }
}

/// Solves a configuration, optionally from a caller-provided seed.
///
/// Without a seed, the solver tries the deterministic seed list of the
/// configuration; the general (non-symmetric) three-point problem goes
/// through its conjugation-symmetric surrogate followed by continuation of
/// the anchors, and the exterior double-arm chain falls back to continuation
/// in the arm height. After convergence the residual is re-evaluated at
/// doubled series order as a truncation-independence check.
pub fn solve_pt(
    problem: &PTProblem,
    seed: Option<&[f64]>,
    settings: &SolveSettings,
) -> Result<PTSolution, PtError> {
    let dim = problem.config_id.dimension();
    if let Some(s) = seed {
        if s.len() != dim {
            return Err(PtError::BadDimension {
                config: problem.config_id.as_str(),
                expected: dim,
                got: s.len(),
            });
        }
    }
    // OuterTwo is affine-covariant: normalise to {-1, 1}, solve, scale back.
    if problem.config_id == ConfigId::OuterTwo {
        let half = (problem.anchors[1] - problem.anchors[0]).norm() / 2.0;
        let report = solve_scaled_outer_two(problem, seed, settings)?;
        let mut x = report.root.clone();
        x[0] *= half;
        let mut sol = solution_from(problem, x, &report);
        sol.residual_norm = report.residual_norm;
        return Ok(sol);
    }

    let report = if let Some(s) = seed {
        try_solve(problem, s, settings)?
    } else {
        solve_with_default_seeds(problem, settings)?
    };
    verify_solution(problem, &report, settings)?;
    Ok(solution_from(problem, report.root.clone(), &report))
}

fn solve_scaled_outer_two(
    _problem: &PTProblem,
    seed: Option<&[f64]>,
    settings: &SolveSettings,
) -> Result<SolveReport, PtError> {
    let normalised = PTProblem::new(ConfigId::OuterTwo, vec![cx(-1.0), cx(1.0)])?;
    let attempts: Vec<Vec<f64>> = match seed {
        Some(s) => vec![s.to_vec()],
        None => seed_attempts(&normalised),
    };
    let mut last = None;
    for a in &attempts {
        match try_solve(&normalised, a, settings) {
            Ok(rep) => {
                verify_solution(&normalised, &rep, settings)?;
                return Ok(rep);
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

fn solve_with_default_seeds(
    problem: &PTProblem,
    settings: &SolveSettings,
) -> Result<SolveReport, PtError> {
    if problem.config_id == ConfigId::ThreePoint {
        return solve_3pt(problem, settings);
    }
    let mut last = None;
    for a in seed_attempts(problem) {
        match try_solve(problem, &a, settings) {
            Ok(rep) => return Ok(rep),
            Err(e) => last = Some(e),
        }
    }
    match problem.config_id {
        ConfigId::OuterSixSym => {
            if let Ok(rep) = solve_outer_six_by_height_continuation(problem, settings) {
                return Ok(rep);
            }
        }
        ConfigId::SixSym1 => {
            if let Ok(rep) = solve_six_sym_1_by_height_continuation(problem, settings) {
                return Ok(rep);
            }
        }
        _ => {}
    }
    Err(last.expect("at least one attempt"))
}

/// Adaptive one-parameter continuation over `t in [0, 1]`: warm-started
/// solves of `instance(t)`, halving the step on failure.
fn continue_instances(
    instance: &dyn Fn(f64) -> PTProblem,
    base: SolveReport,
    dt0: f64,
    dt_min: f64,
    settings: &SolveSettings,
) -> Result<SolveReport, PtError> {
    let mut x = base.root.clone();
    let mut best = base;
    let mut t = 0.0f64;
    let mut dt = dt0;
    while t < 1.0 - 1e-12 {
        let tn = (t + dt).min(1.0);
        match try_solve(&instance(tn), &x, settings) {
            Ok(rep) => {
                x = rep.root.clone();
                best = rep;
                t = tn;
                dt = (dt * 1.5).min(dt0);
            }
            Err(e) => {
                dt /= 2.0;
                if dt < dt_min {
                    return Err(e);
                }
            }
        }
    }
    Ok(best)
}

fn sym_3pt(m: Complex64) -> PTProblem {
    PTProblem {
        formulation: Formulation::Inner,
        anchors: vec![m, m.conj()],
        symmetric: true,
        config_id: ConfigId::ThreePoint,
    }
}

/// Three-point solve strategy: solve the conjugation-symmetric reference
/// aspect (`arg m = 0.4636` or its left-half mirror, where the seed ratios
/// are calibrated), continue in `arg m` to the symmetric surrogate
/// `{m, conj m}` with `m = (a1 + conj a2) / 2`, then (for non-symmetric
/// targets) continue the anchors to the target.
fn solve_3pt(problem: &PTProblem, settings: &SolveSettings) -> Result<SolveReport, PtError> {
    let (a1, a2) = (problem.anchors[0], problem.anchors[1]);
    let m0 = (a1 + a2.conj()) / 2.0;
    let m = if m0.im >= 0.0 { m0 } else { m0.conj() };
    let r = m.norm();
    let phi_t = m.arg().max(1e-3);
    let phi_ref = if phi_t < PI / 2.0 { 0.4636 } else { PI - 0.4636 };
    let reference = sym_3pt(Complex64::from_polar(r, phi_ref));
    let mut base = None;
    let mut last = None;
    for seed in seed_attempts(&reference) {
        match try_solve(&reference, &seed, settings) {
            Ok(rep) => {
                base = Some(rep);
                break;
            }
            Err(e) => last = Some(e),
        }
    }
    let base = base.ok_or_else(|| last.expect("at least one attempt"))?;
    let span = phi_t - phi_ref;
    let dt0 = if span.abs() < 1e-12 { 1.0 } else { (0.15 / span.abs()).min(0.5) };
    let at_surrogate = continue_instances(
        &|t| sym_3pt(Complex64::from_polar(r, phi_ref + span * t)),
        base,
        dt0,
        1e-4,
        settings,
    )?;
    // The surrogate solution was computed for {m, conj m}; if the original
    // upper mean was the conjugate, flip back before continuing the anchors.
    let mut x = at_surrogate.root.clone();
    if m0.im < 0.0 {
        x = vec![x[0], -x[1], x[2], -x[3], x[4], 2.0 * PI - x[5]];
    }
    if problem.symmetric && (m0 - a1).norm() < 1e-12 {
        return Ok(SolveReport { root: x, ..at_surrogate });
    }
    let start = try_solve(problem, &x, settings).or_else(|_| {
        let base = SolveReport { root: x.clone(), ..at_surrogate.clone() };
        continue_instances(
            &|t| PTProblem {
                formulation: Formulation::Inner,
                anchors: vec![m0 * (1.0 - t) + a1 * t, m0.conj() * (1.0 - t) + a2 * t],
                symmetric: false,
                config_id: ConfigId::ThreePoint,
            },
            base,
            0.25,
            1e-4,
            settings,
        )
    })?;
    Ok(start)
}

fn height_scaled(problem: &PTProblem, mu: f64) -> PTProblem {
    let anchors = problem
        .anchors
        .iter()
        .map(|z| Complex64::new(z.re, z.im * mu))
        .collect();
    PTProblem {
        formulation: problem.formulation,
        anchors,
        symmetric: problem.symmetric,
        config_id: problem.config_id,
    }
}

/// Exterior double-arm fallback: start from anchors with the arm heights
/// scaled up (better separated pole angles), then continue the height back
/// down to the target.
fn solve_outer_six_by_height_continuation(
    problem: &PTProblem,
    settings: &SolveSettings,
) -> Result<SolveReport, PtError> {
    let mu0 = 4.0;
    let wide = height_scaled(problem, mu0);
    let seed = outer_six_seed(&wide.anchors, 1.0);
    let base = try_solve(&wide, &seed, settings)?;
    continue_instances(
        &|t| height_scaled(problem, mu0 + (1.0 - mu0) * t),
        base,
        0.25,
        1e-3,
        settings,
    )
}

/// Interior chain fallback: start from shallow arms (the flat Koebe limit,
/// where the seed is nearly exact), then continue the arm height up to the
/// target.
fn solve_six_sym_1_by_height_continuation(
    problem: &PTProblem,
    settings: &SolveSettings,
) -> Result<SolveReport, PtError> {
    let mu0 = 0.25;
    let shallow = height_scaled(problem, mu0);
    let mut base = None;
    let mut last = None;
    for seed in seed_attempts(&shallow) {
        match try_solve(&shallow, &seed, settings) {
            Ok(rep) => {
                base = Some(rep);
                break;
            }
            Err(e) => last = Some(e),
        }
    }
    let base = base.ok_or_else(|| last.expect("at least one attempt"))?;
    continue_instances(
        &|t| height_scaled(problem, mu0 + (1.0 - mu0) * t),
        base,
        0.25,
        1e-3,
        settings,
    )
}

/// Truncation-independence check: the converged residual must stay small when
/// re-evaluated with jets of doubled order.
fn verify_solution(
    problem: &PTProblem,
    report: &SolveReport,
    settings: &SolveSettings,
) -> Result<(), PtError> {
    if !settings.verify {
        return Ok(());
    }
    let opts = RayOptions { order: 2 * settings.ray.order, ..settings.ray };
    let r = residual_vector(problem, &report.root, &opts)
        .map_err(|m| PtError::BadAnchors(format!("verification evaluation failed: {m}")))?;
    let norm = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let allowed = (100.0 * settings.tol).max(1e-9);
    if norm > allowed {
        return Err(PtError::VerificationFailed { residual: norm, allowed });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn outer_two_segment_capacity() {
        // cap([-1, 1]) = 1/2 exactly.
        let p = PTProblem::new(ConfigId::OuterTwo, vec![c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let sol = solve_pt(&p, None, &SolveSettings::default()).unwrap();
        assert_relative_eq!(sol.lead.re, 0.5, epsilon = 1e-10);
        // Affine covariance: a segment of length 4 has capacity 1.
        let p2 = PTProblem::new(ConfigId::OuterTwo, vec![c(1.0, 2.0), c(5.0, 2.0)]).unwrap();
        let sol2 = solve_pt(&p2, None, &SolveSettings::default()).unwrap();
        assert_relative_eq!(sol2.lead.re, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn outer_three_sym_cube_roots() {
        // Minimal continuum spanning the cube roots of unity: the Chebotarev
        // tripod with centre 0 and cap = 4^{-1/3}.
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        let p = PTProblem::new(
            ConfigId::OuterThreeSym,
            vec![c(1.0, 0.0), w, w.conj()],
        )
        .unwrap();
        let sol = solve_pt(&p, None, &SolveSettings::default()).unwrap();
        assert_relative_eq!(sol.lead.re, 0.25f64.powf(1.0 / 3.0), epsilon = 1e-8);
        assert!(sol.b_points[0].norm() < 1e-8, "b = {}", sol.b_points[0]);
        assert_relative_eq!(sol.angle("beta1").unwrap(), PI / 3.0, epsilon = 1e-7);
    }

    #[test]
    fn three_point_symmetric_instance() {
        let p = PTProblem::new(ConfigId::ThreePoint, vec![c(-0.7, 0.6), c(-0.7, -0.6)]).unwrap();
        let sol = solve_pt(&p, None, &SolveSettings::default()).unwrap();
        assert!(sol.residual_norm <= 1e-11, "residual {}", sol.residual_norm);
        // Symmetry must emerge: real lead, real pole, beta2 = pi.
        assert!(sol.lead.im.abs() < 1e-9, "lead {}", sol.lead);
        assert!(sol.b_points[0].im.abs() < 1e-9, "b {}", sol.b_points[0]);
        assert_relative_eq!(sol.angle("beta2").unwrap(), PI, epsilon = 1e-8);
        // Tree side: anchors on the left, lead positive, pole left of origin.
        assert!(sol.lead.re > 0.0);
        assert!(sol.b_points[0].re < 0.0);
    }

    #[test]
    fn three_point_scaling_covariance() {
        let base = PTProblem::new(ConfigId::ThreePoint, vec![c(-0.7, 0.6), c(-0.7, -0.6)]).unwrap();
        let sol = solve_pt(&base, None, &SolveSettings::default()).unwrap();
        let lambda = c(0.8, 0.45);
        let scaled = PTProblem::new(
            ConfigId::ThreePoint,
            vec![lambda * c(-0.7, 0.6), lambda * c(-0.7, -0.6)],
        )
        .unwrap();
        let seed = {
            let fp = lambda * sol.lead;
            let b = lambda * sol.b_points[0];
            vec![
                fp.re,
                fp.im,
                b.re,
                b.im,
                sol.angle("beta1").unwrap(),
                sol.angle("beta2").unwrap(),
            ]
        };
        let sol2 = solve_pt(&scaled, Some(&seed), &SolveSettings::default()).unwrap();
        let want_b = lambda * sol.b_points[0];
        assert!((sol2.b_points[0] - want_b).norm() < 1e-8);
        let want_fp = lambda * sol.lead;
        assert!((sol2.lead - want_fp).norm() < 1e-8);
        assert_relative_eq!(
            sol2.angle("beta1").unwrap(),
            sol.angle("beta1").unwrap(),
            epsilon = 1e-8
        );
    }

    #[test]
    fn three_point_general_instance() {
        let p = PTProblem::new(ConfigId::ThreePoint, vec![c(1.0, 1.0), c(2.0, -0.5)]).unwrap();
        let sol = solve_pt(&p, None, &SolveSettings::default()).unwrap();
        assert!(sol.residual_norm <= 1e-11, "residual {}", sol.residual_norm);
        // Conjugation covariance: the conjugated problem has the conjugated
        // solution with mirrored angles.
        let q = PTProblem::new(ConfigId::ThreePoint, vec![c(2.0, 0.5), c(1.0, -1.0)]).unwrap();
        let seed = vec![
            sol.lead.re,
            -sol.lead.im,
            sol.b_points[0].re,
            -sol.b_points[0].im,
            sol.angle("beta1").unwrap(),
            2.0 * PI - sol.angle("beta2").unwrap(),
        ];
        let sol2 = solve_pt(&q, Some(&seed), &SolveSettings::default()).unwrap();
        assert!((sol2.b_points[0] - sol.b_points[0].conj()).norm() < 1e-8);
        assert!((sol2.lead - sol.lead.conj()).norm() < 1e-8);
        assert_relative_eq!(
            sol2.angle("beta2").unwrap(),
            2.0 * PI - sol.angle("beta2").unwrap(),
            epsilon = 1e-8
        );
    }

    #[test]
    fn six_sym_1_instance_converges() {
        let p = PTProblem::new(
            ConfigId::SixSym1,
            vec![c(-2.0, 0.9), c(-1.1, 0.6), c(-0.5, 0.0), c(-1.1, -0.6), c(-2.0, -0.9)],
        )
        .unwrap();
        let sol = solve_pt(&p, None, &SolveSettings::default()).unwrap();
        assert!(sol.residual_norm <= 1e-11, "residual {}", sol.residual_norm);
        let (b1, b2) = (sol.b_points[0].re, sol.b_points[1].re);
        // Chain order on the real axis: b1 < b2 < a3 < 0.
        assert!(b1 < b2 && b2 < -0.5, "b1 {b1} b2 {b2}");
        assert!(sol.lead.re > 0.0);
    }

    #[test]
    fn critical_orbit_residuals_vanish_at_solution() {
        let p = PTProblem::new(
            ConfigId::SixSym1,
            vec![c(-2.0, 0.9), c(-1.1, 0.6), c(-0.5, 0.0), c(-1.1, -0.6), c(-2.0, -0.9)],
        )
        .unwrap();
        let sol = solve_pt(&p, None, &SolveSettings::default()).unwrap();
        let x3 = [sol.lead.re, sol.b_points[0].re, sol.b_points[1].re];
        let r = residuals_critical_orbit(&p, &x3, &RayOptions::default(), 0.25).unwrap();
        for (i, v) in r.iter().enumerate() {
            assert!(v.abs() < 1e-8, "orbit residual {i} = {v:e}");
        }
    }

    #[test]
    fn critical_orbit_guard_rejects_stemward_anchors() {
        // Anchors hugging the positive real axis (the stem direction).
        let p = PTProblem::new(
            ConfigId::SixSym1,
            vec![c(-2.0, 0.02), c(-1.1, 0.6), c(-0.5, 0.0), c(-1.1, -0.6), c(-2.0, -0.02)],
        )
        .unwrap();
        let r = residuals_critical_orbit(&p, &[2.0, -1.8, -0.9], &RayOptions::default(), 3.13);
        assert!(r.is_err());
    }

    #[test]
    fn bad_anchor_counts_rejected() {
        assert!(PTProblem::new(ConfigId::ThreePoint, vec![c(1.0, 0.0)]).is_err());
        assert!(PTProblem::new(
            ConfigId::SixSym1,
            vec![c(-2.0, 0.9), c(-1.1, 0.6), c(-0.5, 0.1), c(-1.1, -0.6), c(-2.0, -0.9)],
        )
        .is_err());
        let p = PTProblem::new(ConfigId::OuterTwo, vec![c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(matches!(
            solve_pt(&p, Some(&[0.5, 0.1]), &SolveSettings::default()),
            Err(PtError::BadDimension { .. })
        ));
    }
}
