//! Sequential screening along a decreasing sequence of regularization values, with
//! open-loop geometric schedules and the data-adaptive feedback rule.

use std::io::Write;
use std::time::Duration;

use crate::dictionary::FeatureAccess;
use crate::error::{Result, ScreenError};
use crate::geometry::{Dome, HalfSpace, Sphere};
use crate::linalg;
use crate::problem::{compute_lambda_max, Instance, ProblemKind, Solution};
use crate::screening::{screen, BoundSource, TestKind, TestSpec};
use crate::solver::{solve_screened_from, SolverConfig};
use crate::Scalar;

/// `λ_k = λ₁ α^{k-1}` with `α = (λ_t/λ₁)^{1/(N-1)}`; both endpoints are exact.
pub fn geometric_schedule<T: Scalar>(lambda1: T, lambda_t: T, steps: usize) -> Result<Vec<T>> {
    if !(lambda_t > T::zero() && lambda_t < lambda1) || steps < 2 {
        return Err(ScreenError::InvalidParameter(format!(
            "geometric schedule needs 0 < lambda_t < lambda_1 and at least two steps \
             (got {lambda1}, {lambda_t}, {steps})"
        )));
    }
    let alpha = (lambda_t / lambda1).powf(T::one() / T::from_usize_lossy(steps - 1));
    let mut out: Vec<T> = (0..steps)
        .map(|k| lambda1 * alpha.powi(k as i32))
        .collect();
    out[0] = lambda1;
    out[steps - 1] = lambda_t;
    Ok(out)
}

/// `√(yᵀ(I - nnᵀ)y)`
fn orthogonal_norm<T: Scalar>(n: &[T], y: &[T]) -> T {
    let ny = linalg::dot(n, y);
    (linalg::dot(y, y) - ny * ny).max(T::zero()).sqrt()
}

/// Feedback rule `1/λ_k = 1/λ_{k-1} + (R/2)/√(yᵀ(I - nnᵀ)y)`, which keeps the diameter of
/// the next sequential dome at most `R`. When `n` is parallel to `y` the dome is a
/// point along `y` and the rule jumps straight to `lambda_t`. The result is not
/// clamped to `lambda_t`.
pub fn next_lambda_feedback<T: Scalar>(
    lambda_prev: T,
    n_prev: &[T],
    y: &[T],
    radius: T,
    lambda_t: T,
) -> Result<T> {
    if !(radius > T::zero()) || !(lambda_prev > T::zero()) {
        return Err(ScreenError::InvalidParameter(
            "feedback rule needs R > 0 and lambda_prev > 0".into(),
        ));
    }
    if n_prev.len() != y.len() {
        return Err(ScreenError::DimensionMismatch {
            expected: y.len(),
            got: n_prev.len(),
        });
    }
    let nn = linalg::norm(n_prev);
    if !((nn - T::one()).abs() <= T::lit(1.0e-9)) {
        return Err(ScreenError::InvalidParameter(format!(
            "feedback normal must have unit norm, got {nn}"
        )));
    }
    let denom = orthogonal_norm(n_prev, y);
    if denom <= T::lit(1.0e-12) * linalg::norm(y) {
        return Ok(lambda_t);
    }
    let inv = T::one() / lambda_prev + T::lit(0.5) * radius / denom;
    Ok(T::one() / inv)
}

/// `2(1/λ_k - 1/λ_{k-1}) √(yᵀ(I - nnᵀ)y)`, the diameter of the sequential dome.
pub fn sequential_dome_diameter<T: Scalar>(lambda_k: T, lambda_prev: T, n_prev: &[T], y: &[T]) -> T {
    T::lit(2.0) * (T::one() / lambda_k - T::one() / lambda_prev) * orthogonal_norm(n_prev, y)
}

/// Dome bounding the dual optimum at `λ_k` built from the solution at `λ_{k-1}`:
/// center `y/λ_k`, radius `‖θ_{k-1} - y/λ_k‖`, halfspace `n_{k-1}ᵀθ ≤ n_{k-1}ᵀθ_{k-1}`.
pub fn sequential_dome<T: Scalar>(y: &[T], lambda_k: T, lambda_prev: T, theta_prev: &[T]) -> Result<Dome<T>> {
    let q = linalg::scaled(T::one() / lambda_k, y);
    let r = linalg::dist(theta_prev, &q);
    let dir: Vec<T> = y
        .iter()
        .zip(theta_prev)
        .map(|(&v, &t)| v / lambda_prev - t)
        .collect();
    let h = HalfSpace::from_direction(&dir, linalg::dot(&dir, theta_prev))?;
    Dome::new(Sphere::new(q, r)?, h)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SequentialStep<T> {
    pub k: usize,
    pub lambda: T,
    pub surviving: usize,
    pub screen_time: Duration,
    pub solve_time: Duration,
    /// Diameter of the dome built from the previous step (`None` for the first step).
    pub dome_diameter: Option<T>,
    pub gap: T,
    pub theta: Vec<T>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SequentialTrace<T> {
    pub steps: Vec<SequentialStep<T>>,
}

impl<T: Scalar> SequentialTrace<T> {
    /// Number of instances solved.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn lambdas(&self) -> Vec<T> {
        self.steps.iter().map(|s| s.lambda).collect()
    }

    /// Largest dual norm `max_k ‖θ_k‖` seen along the path.
    pub fn path_bound(&self) -> T {
        self.steps
            .iter()
            .map(|s| linalg::norm(&s.theta))
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// `1 + log(1/λ_t)/log(1 + C/2R)` with `C` the observed [`path_bound`](Self::path_bound).
    /// Informational only: the constant is measured after the fact.
    pub fn step_bound(&self, radius: T) -> Option<T> {
        let last = self.steps.last()?;
        let c = self.path_bound();
        let denom = (T::one() + c / (T::lit(2.0) * radius)).ln();
        if denom > T::zero() {
            Some(T::one() + (T::one() / last.lambda).ln() / denom)
        } else {
            None
        }
    }

    /// CSV with columns `k,lambda_k,surviving,screen_seconds,solve_seconds,dome_diameter`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "k,lambda_k,surviving,screen_seconds,solve_seconds,dome_diameter")?;
        for s in &self.steps {
            let d = s.dome_diameter.map(|d| format!("{d:e}")).unwrap_or_default();
            writeln!(
                out,
                "{},{:e},{},{:e},{:e},{}",
                s.k,
                s.lambda,
                s.surviving,
                s.screen_time.as_secs_f64(),
                s.solve_time.as_secs_f64(),
                d
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DassConfig {
    /// Target dome diameter `R`.
    pub radius: f64,
    /// `λ₁ = first_ratio · λ_max`.
    pub first_ratio: f64,
    pub solver: SolverConfig,
    /// Safety cap on the number of instances.
    pub max_steps: usize,
}

impl DassConfig {
    pub fn new(radius: f64) -> Self {
        Self {
            radius,
            first_ratio: 0.95,
            solver: SolverConfig::default(),
            max_steps: 100_000,
        }
    }
}

struct Prev<T> {
    lambda: T,
    theta: Vec<T>,
    gap: T,
    w: Vec<T>,
}

fn step<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    base: &Instance<T>,
    k: usize,
    lambda: T,
    prev: Option<&Prev<T>>,
    solver: &SolverConfig,
) -> Result<(Solution<T>, SequentialStep<T>)> {
    let inst = base.at_lambda(lambda)?;
    let spec = match prev {
        None => TestSpec::new(TestKind::Tht),
        Some(p) => TestSpec::new(TestKind::Tht).with_source(BoundSource::DualSolution {
            lambda0: p.lambda,
            theta0: p.theta.clone(),
            gap: p.gap,
        }),
    };
    let report = screen(feat, &inst, &spec)?;
    let (sol, metrics) = solve_screened_from(feat, &inst, &report, solver, prev.map(|p| p.w.as_slice()))?;
    let dome_diameter = match prev {
        Some(p) => Some(match sequential_dome(inst.y(), lambda, p.lambda, &p.theta) {
            // The closed form avoids the cancellation in `2√(r² - (nᵀq - c)²)`.
            Ok(d) if d.psi() > T::zero() => {
                let n = d.halfspace().normal().to_vec();
                sequential_dome_diameter(lambda, p.lambda, &n, inst.y())
            }
            Ok(d) => d.diameter(),
            Err(_) => {
                let dir: Vec<T> = linalg::sub(&linalg::scaled(T::one() / p.lambda, inst.y()), &p.theta);
                let n = linalg::scaled(T::one() / linalg::norm(&dir), &dir);
                sequential_dome_diameter(lambda, p.lambda, &n, inst.y())
            }
        }),
        None => None,
    };
    let rec = SequentialStep {
        k,
        lambda,
        surviving: report.partition.selected.len(),
        screen_time: metrics.screen_time,
        solve_time: metrics.solve_time,
        dome_diameter,
        gap: sol.gap,
        theta: sol.theta.clone(),
    };
    Ok((sol, rec))
}

fn zero_solution<T: Scalar>(inst: &Instance<T>, p: usize) -> Solution<T> {
    Solution {
        w: vec![T::zero(); p],
        theta: inst.scaled_target(),
        gap: T::zero(),
        primal: T::lit(0.5) * linalg::dot(inst.y(), inst.y()),
        active: Vec::new(),
        converged: true,
        sweeps: 0,
    }
}

/// Data-adaptive sequential screening: screens and solves a sequence of instances ending
/// at `lambda_t`, choosing each `λ_k` by the feedback rule so the bounding dome of every
/// step after the first has diameter at most `R`.
///
/// For `lambda_t ≥ λ_max` the zero solution is returned with an empty trace.
pub fn dass_solve<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    y: &[T],
    kind: ProblemKind,
    lambda_t: T,
    cfg: &DassConfig,
) -> Result<(Solution<T>, SequentialTrace<T>)> {
    let radius = T::lit(cfg.radius);
    if !(radius > T::zero()) || !(cfg.first_ratio > 0.0 && cfg.first_ratio < 1.0) {
        return Err(ScreenError::InvalidParameter(
            "DASS needs R > 0 and a first ratio in (0, 1)".into(),
        ));
    }
    let base = Instance::new(feat, y.to_vec(), lambda_t, kind)?;
    let lmax = compute_lambda_max(feat, y, kind)?.value;
    let mut trace = SequentialTrace::default();
    if lambda_t >= lmax {
        return Ok((zero_solution(&base, feat.count()), trace));
    }
    let lambda1 = (T::lit(cfg.first_ratio) * lmax).max(lambda_t);
    let (mut sol, rec) = step(feat, &base, 1, lambda1, None, &cfg.solver)?;
    trace.steps.push(rec);
    let mut lambda = lambda1;
    while lambda > lambda_t {
        if trace.len() >= cfg.max_steps {
            return Err(ScreenError::InvalidParameter(format!(
                "DASS exceeded {} steps",
                cfg.max_steps
            )));
        }
        let k = trace.len() + 1;
        let dir: Vec<T> = linalg::sub(&linalg::scaled(T::one() / lambda, y), &sol.theta);
        let d = linalg::norm(&dir);
        let next = if d > T::zero() {
            next_lambda_feedback(lambda, &linalg::scaled(T::one() / d, &dir), y, radius, lambda_t)?
        } else {
            lambda_t
        };
        let next = next.max(lambda_t);
        let prev = Prev {
            lambda,
            theta: sol.theta.clone(),
            gap: sol.gap,
            w: sol.w.clone(),
        };
        let (s, rec) = step(feat, &base, k, next, Some(&prev), &cfg.solver)?;
        sol = s;
        trace.steps.push(rec);
        lambda = next;
    }
    Ok((sol, trace))
}

/// Sequential screening over a prescribed decreasing schedule; the last entry is the
/// target instance.
pub fn sequential_solve<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    y: &[T],
    kind: ProblemKind,
    lambdas: &[T],
    solver: &SolverConfig,
) -> Result<(Solution<T>, SequentialTrace<T>)> {
    let (&last, _) = lambdas
        .split_last()
        .ok_or_else(|| ScreenError::InvalidParameter("empty schedule".into()))?;
    if lambdas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(ScreenError::InvalidParameter(
            "schedule must be strictly decreasing".into(),
        ));
    }
    let base = Instance::new(feat, y.to_vec(), last, kind)?;
    let mut trace = SequentialTrace::default();
    let mut prev: Option<Prev<T>> = None;
    let mut out = None;
    for (k, &lambda) in lambdas.iter().enumerate() {
        let (s, rec) = step(feat, &base, k + 1, lambda, prev.as_ref(), solver)?;
        trace.steps.push(rec);
        prev = Some(Prev {
            lambda,
            theta: s.theta.clone(),
            gap: s.gap,
            w: s.w.clone(),
        });
        out = Some(s);
    }
    Ok((out.expect("schedule is nonempty"), trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_endpoints() {
        let s = geometric_schedule(0.95, 0.095, 3).unwrap();
        assert_eq!(s[0], 0.95);
        assert_eq!(s[2], 0.095);
        assert!((s[1] - 0.95 * 0.1f64.sqrt()).abs() < 1e-15);
        assert_eq!(geometric_schedule(1.0, 0.5, 2).unwrap(), vec![1.0, 0.5]);
        assert!(geometric_schedule(1.0, 2.0, 3).is_err());
        assert!(geometric_schedule(1.0, 0.5, 1).is_err());
    }

    #[test]
    fn feedback_orthogonal() {
        let l: f64 = next_lambda_feedback(1.0, &[0.0, 1.0], &[1.0, 0.0], 0.5, 0.1).unwrap();
        assert!((l - 0.8).abs() < 1e-15);
        let l = next_lambda_feedback(1.0, &[1.0, 0.0], &[1.0, 0.0], 0.5, 0.1).unwrap();
        assert_eq!(l, 0.1);
        assert!(next_lambda_feedback(1.0, &[0.0, 1.0], &[1.0, 0.0], 0.0, 0.1).is_err());
    }

    #[test]
    fn diameter_formula() {
        let d = sequential_dome_diameter(0.5, 1.0, &[0.0, 1.0], &[1.0, 0.0]);
        assert_eq!(d, 2.0);
    }
}
