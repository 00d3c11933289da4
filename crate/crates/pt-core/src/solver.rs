//! A dogleg trust-region solver for square nonlinear systems, in the spirit of
//! Powell's hybrid method: finite-difference Jacobians refreshed on demand,
//! Broyden rank-one updates on accepted steps, and a dogleg step combining the
//! Newton and steepest-descent directions inside an adaptive trust region.
//!
//! Residual closures may fail (the residuals of this crate integrate ODEs that
//! can run into poles); a failure at a trial point simply shrinks the trust
//! region, while a failure at the starting point aborts the solve.

use nalgebra::{DMatrix, DVector};

use crate::error::SolverError;

/// Outcome of a successful (or at least completed) solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Final iterate.
    pub root: Vec<f64>,
    /// Euclidean norm of the residual at `root`.
    pub residual_norm: f64,
    /// Accepted iterations.
    pub iterations: usize,
    /// Number of full finite-difference Jacobian evaluations.
    pub jacobian_evals: usize,
    /// True when the convergence tolerance was met.
    pub converged: bool,
    /// True when no accepted step increased the residual norm.
    pub monotone: bool,
}

/// Tuning knobs for [`solve_system`].
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Relative finite-difference step.
    pub fd_step: f64,
    /// Initial trust radius as a fraction of `max(1, |x0|)`.
    pub initial_radius: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iterations: 200,
            fd_step: 1e-7,
            initial_radius: 0.1,
        }
    }
}

type Residual<'a> = dyn FnMut(&[f64]) -> Result<Vec<f64>, String> + 'a;

fn eval(f: &mut Residual, x: &DVector<f64>) -> Option<DVector<f64>> {
    match f(x.as_slice()) {
        Ok(r) if r.iter().all(|v| v.is_finite()) => Some(DVector::from_vec(r)),
        _ => None,
    }
}

fn fd_jacobian(
    f: &mut Residual,
    x: &DVector<f64>,
    r: &DVector<f64>,
    h_rel: f64,
) -> Option<DMatrix<f64>> {
    let n = x.len();
    let mut j = DMatrix::zeros(n, n);
    for col in 0..n {
        let h = h_rel * x[col].abs().max(1.0);
        let mut xp = x.clone();
        xp[col] += h;
        let rp = eval(f, &xp)?;
        for row in 0..n {
            j[(row, col)] = (rp[row] - r[row]) / h;
        }
    }
    Some(j)
}

/// Newton step, falling back to a damped least-squares step when the Jacobian
/// is numerically singular.
fn newton_step(j: &DMatrix<f64>, r: &DVector<f64>) -> DVector<f64> {
    if let Some(lu) = j.clone().lu().try_inverse() {
        return -(&lu * r);
    }
    let jt = j.transpose();
    let n = j.nrows();
    let reg = &jt * j + DMatrix::identity(n, n) * 1e-12 * j.norm();
    match reg.lu().try_inverse() {
        Some(inv) => -(&inv * (&jt * r)),
        None => -(&jt * r),
    }
}

/// Dogleg point inside the trust region of radius `delta`.
fn dogleg(j: &DMatrix<f64>, r: &DVector<f64>, newton: &DVector<f64>, delta: f64) -> DVector<f64> {
    if newton.norm() <= delta {
        return newton.clone();
    }
    let g = j.transpose() * r;
    let jg = j * &g;
    let denom = jg.norm_squared();
    if denom == 0.0 || g.norm() == 0.0 {
        return newton * (delta / newton.norm());
    }
    let cauchy = -&g * (g.norm_squared() / denom);
    let cn = cauchy.norm();
    if cn >= delta {
        return cauchy * (delta / cn);
    }
    // Walk from the Cauchy point toward the Newton point to the boundary.
    let d = newton - &cauchy;
    let a = d.norm_squared();
    let b = 2.0 * cauchy.dot(&d);
    let c = cn * cn - delta * delta;
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    let tau = (-b + disc) / (2.0 * a);
    &cauchy + d * tau.clamp(0.0, 1.0)
}

/// Solves `f(x) = 0` for a square system by a dogleg trust-region iteration.
///
/// Converges when the max-norm of the residual drops to `tol`. The residual
/// closure returns `Err` to flag an evaluation failure; trial-point failures
/// shrink the trust region.
///
/// ```
/// use pt_core::solver::{solve_system, SolveOptions};
///
/// // x^2 = 4, xy = 3.
/// let mut f = |x: &[f64]| Ok(vec![x[0] * x[0] - 4.0, x[0] * x[1] - 3.0]);
/// let report = solve_system(&mut f, &[1.0, 1.0], 1e-12, &SolveOptions::default()).unwrap();
/// assert!((report.root[0] - 2.0).abs() < 1e-10);
/// assert!((report.root[1] - 1.5).abs() < 1e-10);
/// ```
pub fn solve_system(
    f: &mut Residual,
    x0: &[f64],
    tol: f64,
    opts: &SolveOptions,
) -> Result<SolveReport, SolverError> {
    let mut x = DVector::from_column_slice(x0);
    let mut r = match f(x.as_slice()) {
        Ok(r) if r.iter().all(|v| v.is_finite()) => DVector::from_vec(r),
        Ok(_) => return Err(SolverError::NonFinite { point: x0.to_vec() }),
        Err(message) => return Err(SolverError::InitialEvaluation { message }),
    };
    assert_eq!(r.len(), x.len(), "solve_system needs a square system");

    let mut jacobian_evals = 0usize;
    let mut j = fd_jacobian(f, &x, &r, opts.fd_step)
        .ok_or_else(|| SolverError::InitialEvaluation {
            message: "Jacobian evaluation failed at the starting point".into(),
        })?;
    jacobian_evals += 1;

    let mut delta = opts.initial_radius * x.norm().max(1.0);
    let mut iterations = 0usize;
    let monotone = true;
    let mut rejects_since_refresh = 0usize;
    let mut steps_since_refresh = 0usize;

    let norm_inf = |v: &DVector<f64>| v.iter().fold(0.0f64, |m, &t| m.max(t.abs()));

    for _ in 0..opts.max_iterations {
        if norm_inf(&r) <= tol {
            return Ok(SolveReport {
                root: x.as_slice().to_vec(),
                residual_norm: r.norm(),
                iterations,
                jacobian_evals,
                converged: true,
                monotone,
            });
        }
        let newton = newton_step(&j, &r);
        let p = dogleg(&j, &r, &newton, delta);
        if p.norm() == 0.0 {
            break;
        }
        let x_trial = &x + &p;
        let predicted = r.norm_squared() - (&r + &j * &p).norm_squared();
        let trial = eval(f, &x_trial);
        let ratio = match &trial {
            Some(rt) if predicted > 0.0 => (r.norm_squared() - rt.norm_squared()) / predicted,
            Some(_) => -1.0,
            None => f64::NEG_INFINITY,
        };
        if ratio > 1e-4 {
            let rt = trial.expect("accepted step has a residual");
            // Broyden rank-one update.
            let dr = &rt - &r - &j * &p;
            let pn = p.norm_squared();
            if pn > 0.0 {
                j += &dr * p.transpose() / pn;
            }
            x = x_trial;
            r = rt;
            iterations += 1;
            rejects_since_refresh = 0;
            steps_since_refresh += 1;
            if ratio > 0.75 && p.norm() > 0.8 * delta {
                delta *= 2.0;
            } else if ratio < 0.25 {
                delta *= 0.5;
            }
        } else {
            delta = 0.25 * p.norm().min(delta);
            rejects_since_refresh += 1;
            if rejects_since_refresh >= 2 && steps_since_refresh > 0 {
                if let Some(fresh) = fd_jacobian(f, &x, &r, opts.fd_step) {
                    j = fresh;
                    jacobian_evals += 1;
                    steps_since_refresh = 0;
                    rejects_since_refresh = 0;
                }
            }
        }
        if delta < 1e-14 {
            return Err(SolverError::Stagnation {
                best: x.as_slice().to_vec(),
                best_norm: r.norm(),
            });
        }
    }
    if norm_inf(&r) <= tol {
        return Ok(SolveReport {
            root: x.as_slice().to_vec(),
            residual_norm: r.norm(),
            iterations,
            jacobian_evals,
            converged: true,
            monotone,
        });
    }
    Err(SolverError::MaxIterations {
        max_iterations: opts.max_iterations,
        best: x.as_slice().to_vec(),
        best_norm: r.norm(),
    })
}

/// Damped Newton iteration with a fresh finite-difference Jacobian every
/// step and a backtracking line search on the residual norm.
///
/// Complements [`solve_system`]: near solutions with a badly conditioned
/// Jacobian the Broyden-updated dogleg model degrades and the trust region
/// can collapse, while full-Jacobian Newton steps still converge. Evaluation
/// failures at a trial point backtrack like an increase of the norm.
pub fn newton_refine(
    f: &mut Residual,
    x0: &[f64],
    tol: f64,
    opts: &SolveOptions,
) -> Result<SolveReport, SolverError> {
    let mut x = DVector::from_column_slice(x0);
    let mut r = match f(x.as_slice()) {
        Ok(r) if r.iter().all(|v| v.is_finite()) => DVector::from_vec(r),
        Ok(_) => return Err(SolverError::NonFinite { point: x0.to_vec() }),
        Err(message) => return Err(SolverError::InitialEvaluation { message }),
    };
    let norm_inf = |v: &DVector<f64>| v.iter().fold(0.0f64, |m, &t| m.max(t.abs()));
    let mut jacobian_evals = 0usize;
    let mut monotone = true;
    for iterations in 0..opts.max_iterations {
        if norm_inf(&r) <= tol {
            return Ok(SolveReport {
                root: x.as_slice().to_vec(),
                residual_norm: r.norm(),
                iterations,
                jacobian_evals,
                converged: true,
                monotone,
            });
        }
        let j = fd_jacobian(f, &x, &r, opts.fd_step).ok_or(SolverError::Stagnation {
            best: x.as_slice().to_vec(),
            best_norm: r.norm(),
        })?;
        jacobian_evals += 1;
        let step = newton_step(&j, &r);
        let norm0 = r.norm();
        let mut lam = 1.0f64;
        let mut advanced = false;
        while lam >= 1e-6 {
            let xt = &x + &step * lam;
            if let Some(rt) = eval(f, &xt) {
                // Accept any decrease; at tiny damping accept sideways moves
                // so a nearly rank-deficient tail can still creep in.
                if rt.norm() < norm0 || (lam < 1e-3 && rt.norm() < norm0 * (1.0 + 1e-9)) {
                    if rt.norm() > norm0 {
                        monotone = false;
                    }
                    x = xt;
                    r = rt;
                    advanced = true;
                    break;
                }
            }
            lam /= 2.0;
        }
        if !advanced {
            return Err(SolverError::Stagnation {
                best: x.as_slice().to_vec(),
                best_norm: r.norm(),
            });
        }
    }
    if norm_inf(&r) <= tol {
        return Ok(SolveReport {
            root: x.as_slice().to_vec(),
            residual_norm: r.norm(),
            iterations: opts.max_iterations,
            jacobian_evals,
            converged: true,
            monotone,
        });
    }
    Err(SolverError::MaxIterations {
        max_iterations: opts.max_iterations,
        best: x.as_slice().to_vec(),
        best_norm: r.norm(),
    })
}

/// Solves a one-parameter family `F(x, t) = 0` from `t = 0` to `t = 1`.
///
/// `x_start` must solve the `t = 0` member. The parameter advances in `steps`
/// nominal increments; a failed solve halves the increment (down to `1e-4`)
/// and retries from the last solved point, warm-starting every solve from its
/// predecessor. Returns the reports of the solved path in order.
pub fn continuation(
    family: &mut dyn FnMut(&[f64], f64) -> Result<Vec<f64>, String>,
    x_start: &[f64],
    steps: usize,
    tol: f64,
    opts: &SolveOptions,
) -> Result<Vec<SolveReport>, SolverError> {
    assert!(steps > 0);
    let mut reports = Vec::new();
    let mut x = x_start.to_vec();
    let mut t = 0.0f64;
    let mut dt = 1.0 / steps as f64;
    // Polish/verify the start.
    let mut f0 = |xs: &[f64]| family(xs, 0.0);
    let rep = solve_system(&mut f0, &x, tol, opts)?;
    x = rep.root.clone();
    reports.push(rep);
    while t < 1.0 - 1e-12 {
        let t_next = (t + dt).min(1.0);
        let mut ft = |xs: &[f64]| family(xs, t_next);
        match solve_system(&mut ft, &x, tol, opts) {
            Ok(rep) => {
                x = rep.root.clone();
                reports.push(rep);
                t = t_next;
                dt = (dt * 1.7).min(1.0 / steps as f64);
            }
            Err(_) if dt > 1e-4 => {
                dt = (dt / 2.0).max(1e-4);
            }
            Err(_) => {
                return Err(SolverError::PathFailure {
                    t: t_next,
                    solved: reports.len(),
                    steps,
                });
            }
        }
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_style_system() {
        // grad of Rosenbrock as a root problem: (1-x) = 0, 10(y - x^2) = 0.
        let mut f = |x: &[f64]| Ok(vec![1.0 - x[0], 10.0 * (x[1] - x[0] * x[0])]);
        let rep = solve_system(&mut f, &[-1.2, 1.0], 1e-12, &SolveOptions::default()).unwrap();
        assert!(rep.converged);
        assert!((rep.root[0] - 1.0).abs() < 1e-10);
        assert!((rep.root[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn powell_singular_function() {
        // Powell's singular function: the Jacobian is singular at the root.
        let mut f = |x: &[f64]| {
            Ok(vec![
                x[0] + 10.0 * x[1],
                5.0f64.sqrt() * (x[2] - x[3]),
                (x[1] - 2.0 * x[2]).powi(2),
                10.0f64.sqrt() * (x[0] - x[3]).powi(2),
            ])
        };
        let rep = solve_system(
            &mut f,
            &[3.0, -1.0, 0.0, 1.0],
            1e-10,
            &SolveOptions { max_iterations: 500, ..SolveOptions::default() },
        )
        .unwrap();
        assert!(rep.converged);
        assert!(rep.root.iter().all(|v| v.abs() < 1e-2), "root {:?}", rep.root);
    }

    #[test]
    fn trigonometric_exponential_system() {
        let mut f = |x: &[f64]| {
            Ok(vec![
                3.0 * x[0] - (x[1] * x[2]).cos() - 0.5,
                x[0] * x[0] - 81.0 * (x[1] + 0.1).powi(2) + x[2].sin() + 1.06,
                (-x[0] * x[1]).exp() + 20.0 * x[2] + (10.0 * std::f64::consts::PI - 3.0) / 3.0,
            ])
        };
        let rep = solve_system(&mut f, &[0.1, 0.1, -0.1], 1e-12, &SolveOptions::default()).unwrap();
        assert!(rep.converged);
        let r = f(&rep.root).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-11));
    }

    #[test]
    fn failing_trial_points_shrink_but_recover() {
        // The residual refuses to evaluate for x > 2.5; root at x = 2.
        let mut f = |x: &[f64]| {
            if x[0] > 2.5 {
                Err("out of range".to_string())
            } else {
                Ok(vec![x[0] * x[0] - 4.0])
            }
        };
        let rep = solve_system(&mut f, &[0.5, ], 1e-12, &SolveOptions::default()).unwrap();
        assert!(rep.converged);
        assert!((rep.root[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn initial_failure_is_an_error() {
        let mut f = |_: &[f64]| Err::<Vec<f64>, _>("nope".to_string());
        assert!(matches!(
            solve_system(&mut f, &[0.0], 1e-12, &SolveOptions::default()),
            Err(SolverError::InitialEvaluation { .. })
        ));
    }

    #[test]
    fn no_root_stagnates_or_exhausts() {
        // x^2 + 1 = 0 has no real root; the solver must fail, not loop.
        let mut f = |x: &[f64]| Ok(vec![x[0] * x[0] + 1.0]);
        let r = solve_system(&mut f, &[3.0], 1e-12, &SolveOptions::default());
        assert!(matches!(
            r,
            Err(SolverError::Stagnation { .. }) | Err(SolverError::MaxIterations { .. })
        ));
    }

    #[test]
    fn continuation_tracks_a_moving_root() {
        // x^2 = 1 + 3t: root moves from 1 to 2.
        let mut fam = |x: &[f64], t: f64| Ok(vec![x[0] * x[0] - 1.0 - 3.0 * t]);
        let reports = continuation(&mut fam, &[1.0], 10, 1e-12, &SolveOptions::default()).unwrap();
        let last = reports.last().unwrap();
        assert!((last.root[0] - 2.0).abs() < 1e-10);
        assert!(reports.len() >= 11);
    }

    #[test]
    fn continuation_is_reversible() {
        let mut fwd = |x: &[f64], t: f64| Ok(vec![x[0] * x[0] - 1.0 - 3.0 * t]);
        let f_reports = continuation(&mut fwd, &[1.0], 8, 1e-12, &SolveOptions::default()).unwrap();
        let x_end = f_reports.last().unwrap().root.clone();
        let mut bwd = |x: &[f64], t: f64| Ok(vec![x[0] * x[0] - 1.0 - 3.0 * (1.0 - t)]);
        let b_reports = continuation(&mut bwd, &x_end, 8, 1e-12, &SolveOptions::default()).unwrap();
        assert!((b_reports.last().unwrap().root[0] - 1.0).abs() < 1e-10);
    }
}
