//! Coordinate-descent lasso solver with duality-gap certification, and the screened
//! solve that maps a reduced solution back onto the full dictionary.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, RealField};
use num_traits::Float;

use crate::dictionary::{Dictionary, FeatureAccess};
use crate::error::{Result, ScreenError};
use crate::linalg;
use crate::problem::{
    active_set, dual_objective, feasibility_scale, residual_objective, upsample, Instance,
    ProblemKind, Solution,
};
use crate::screening::ScreenReport;
use crate::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Stop once `gap ≤ gap_tol · primal`.
    pub gap_tol: f64,
    /// Upper bound on coordinate sweeps over the full dictionary.
    pub max_iters: usize,
    /// Seed for a shuffled sweep order; unused by the cyclic solver.
    pub rng_seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gap_tol: 1.0e-8,
            max_iters: 100_000,
            rng_seed: 0,
        }
    }
}

impl SolverConfig {
    /// Defaults with the gap tolerance suited to the scalar type.
    pub fn for_scalar<T: Scalar>() -> Self {
        Self {
            gap_tol: T::DEFAULT_GAP_TOL,
            ..Self::default()
        }
    }

    pub fn with_gap_tol(mut self, gap_tol: f64) -> Self {
        self.gap_tol = gap_tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.gap_tol > 0.0) || self.max_iters == 0 {
            return Err(ScreenError::InvalidParameter(
                "solver needs gap_tol > 0 and max_iters >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Inner sweeps over the current support between two full sweeps.
const SUPPORT_SWEEPS: usize = 20;

/// Solves the instance by cyclic coordinate descent.
pub fn solve_lasso<T: Scalar>(dict: &Dictionary<T>, inst: &Instance<T>, cfg: &SolverConfig) -> Result<Solution<T>> {
    solve_lasso_from(dict, inst, cfg, None)
}

/// Like [`solve_lasso`], starting from `w0` when given.
pub fn solve_lasso_from<T: Scalar>(
    dict: &Dictionary<T>,
    inst: &Instance<T>,
    cfg: &SolverConfig,
    w0: Option<&[T]>,
) -> Result<Solution<T>> {
    cfg.validate()?;
    let p = dict.count();
    if inst.y().len() != dict.dim() {
        return Err(ScreenError::DimensionMismatch {
            expected: dict.dim(),
            got: inst.y().len(),
        });
    }
    let lambda = inst.lambda();
    let kind = inst.kind();
    if lambda >= inst.lambda_max() {
        return certify(dict, inst, vec![T::zero(); p], true, 0);
    }
    let mut w = match w0 {
        Some(w0) if w0.len() == p => w0.to_vec(),
        Some(w0) => {
            return Err(ScreenError::DimensionMismatch {
                expected: p,
                got: w0.len(),
            })
        }
        None => vec![T::zero(); p],
    };
    if kind == ProblemKind::NonNegLasso {
        w.iter_mut().for_each(|v| *v = v.max(T::zero()));
    }
    let sq: Vec<T> = dict.norms().iter().map(|&b| b * b).collect();
    let mut r = linalg::sub(inst.y(), &dict.combine(&w));
    let tol = T::lit(cfg.gap_tol);

    let update = |j: usize, w: &mut [T], r: &mut [T]| {
        let z = dict.dot_col(j, r) + sq[j] * w[j];
        let shrunk = match kind {
            ProblemKind::Lasso => {
                if z > lambda {
                    z - lambda
                } else if z < -lambda {
                    z + lambda
                } else {
                    T::zero()
                }
            }
            ProblemKind::NonNegLasso => (z - lambda).max(T::zero()),
        };
        let new = shrunk / sq[j];
        let delta = w[j] - new;
        if delta != T::zero() {
            dict.axpy_col(j, delta, r);
            w[j] = new;
        }
        delta.abs() * dict.norms()[j]
    };

    let mut sweeps = 0;
    loop {
        for j in 0..p {
            update(j, &mut w, &mut r);
        }
        sweeps += 1;
        let support: Vec<usize> = (0..p).filter(|&j| w[j] != T::zero()).collect();
        for _ in 0..SUPPORT_SWEEPS {
            let mut change = T::zero();
            for &j in &support {
                change = change.max(update(j, &mut w, &mut r));
            }
            if change <= T::epsilon() * linalg::norm(inst.y()) {
                break;
            }
        }
        // Recompute the residual to keep roundoff from accumulating.
        r = linalg::sub(inst.y(), &dict.combine(&w));
        let (gap, primal) = gap_from_residual(dict, inst, &w, &r)?;
        if gap <= tol * primal.max(T::min_positive_value()) || sweeps >= cfg.max_iters {
            let converged = gap <= tol * primal.max(T::min_positive_value());
            return certify(dict, inst, w, converged, sweeps);
        }
    }
}

fn gap_from_residual<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    inst: &Instance<T>,
    w: &[T],
    r: &[T],
) -> Result<(T, T)> {
    let theta = feasible_dual(feat, inst, r)?.0;
    let primal = residual_objective(r, inst.lambda(), w);
    let dual = dual_objective(inst, &theta)?;
    Ok(((primal - dual).max(T::zero()), primal))
}

/// `θ = r/λ` scaled into the feasible set, and the correlations `Bᵀθ`.
fn feasible_dual<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    inst: &Instance<T>,
    r: &[T],
) -> Result<(Vec<T>, Vec<T>)> {
    let lambda = inst.lambda();
    let mut corr = feat.correlate(r)?;
    corr.iter_mut().for_each(|c| *c /= lambda);
    let s = feasibility_scale(&corr, inst.kind());
    corr.iter_mut().for_each(|c| *c /= s);
    let theta = linalg::scaled(T::one() / (lambda * s), r);
    Ok((theta, corr))
}

fn certify<T: Scalar>(
    dict: &Dictionary<T>,
    inst: &Instance<T>,
    w: Vec<T>,
    converged: bool,
    sweeps: usize,
) -> Result<Solution<T>> {
    let r = linalg::sub(inst.y(), &dict.combine(&w));
    let (theta, corr) = feasible_dual(dict, inst, &r)?;
    let primal = residual_objective(&r, inst.lambda(), &w);
    let gap = (primal - dual_objective(inst, &theta)?).max(T::zero());
    Ok(Solution {
        active: active_set(&corr, inst.kind()),
        w,
        theta,
        gap,
        primal,
        converged,
        sweeps,
    })
}

/// Exact solution on the support and signs of `sol`, accepted only if it satisfies
/// the optimality conditions on the whole dictionary. Gives a solution accurate to
/// machine precision when the support of `sol` is right.
pub fn polish<T: Scalar + RealField>(
    dict: &Dictionary<T>,
    inst: &Instance<T>,
    sol: &Solution<T>,
) -> Option<Solution<T>> {
    let support: Vec<usize> = (0..sol.w.len()).filter(|&j| sol.w[j] != T::zero()).collect();
    if support.is_empty() || support.len() > dict.dim() {
        return None;
    }
    let k = support.len();
    let cols: Vec<Vec<T>> = support.iter().map(|&j| dict.column(j)).collect();
    let gram = DMatrix::from_fn(k, k, |a, b| linalg::dot(&cols[a], &cols[b]));
    let rhs = DVector::from_fn(k, |a, _| {
        linalg::dot(&cols[a], inst.y()) - inst.lambda() * Float::signum(sol.w[support[a]])
    });
    let z = gram.cholesky()?.solve(&rhs);
    let mut w = vec![T::zero(); dict.count()];
    for (a, &j) in support.iter().enumerate() {
        if Float::signum(z[a]) != Float::signum(sol.w[j]) {
            return None;
        }
        w[j] = z[a];
    }
    let r = linalg::sub(inst.y(), &dict.combine(&w));
    let corr = dict.correlate(&r);
    let excess = feasibility_scale(
        &corr.iter().map(|&c| c / inst.lambda()).collect::<Vec<_>>(),
        inst.kind(),
    );
    if excess > T::one() + T::lit(1.0e-10) {
        return None;
    }
    certify(dict, inst, w, true, sol.sweeps).ok()
}

/// Timing and size of a screened solve.
#[derive(Clone, Debug, PartialEq)]
pub struct ScreenedMetrics {
    /// `|S̄|/p`
    pub rejection_fraction: f64,
    pub screen_time: Duration,
    pub solve_time: Duration,
    /// Time spent re-certifying the solution on the full dictionary.
    pub certify_time: Duration,
}

/// Solves on the features kept by `report`, places the result back into `ℝ^p` and
/// re-certifies the duality gap on the full dictionary.
///
/// A converged reduced solve whose full-dictionary gap exceeds ten times the tolerance
/// means the report rejected an active feature and yields `SafetyViolation`.
pub fn solve_screened<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    inst: &Instance<T>,
    report: &ScreenReport,
    cfg: &SolverConfig,
) -> Result<(Solution<T>, ScreenedMetrics)> {
    solve_screened_from(feat, inst, report, cfg, None)
}

/// [`solve_screened`] with an optional full-length warm start.
pub fn solve_screened_from<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    inst: &Instance<T>,
    report: &ScreenReport,
    cfg: &SolverConfig,
    w0: Option<&[T]>,
) -> Result<(Solution<T>, ScreenedMetrics)> {
    cfg.validate()?;
    let p = feat.count();
    if report.flags.len() != p {
        return Err(ScreenError::DimensionMismatch {
            expected: p,
            got: report.flags.len(),
        });
    }
    let selected = &report.partition.selected;
    let started = Instant::now();
    let (w, converged, sweeps, r) = if selected.is_empty() {
        (vec![T::zero(); p], true, 0, inst.y().to_vec())
    } else {
        let sub = feat.gather(selected)?;
        let sub_inst = Instance::new(&sub, inst.y().to_vec(), inst.lambda(), inst.kind())?;
        let warm = w0.map(|w| selected.iter().map(|&j| w[j]).collect::<Vec<_>>());
        let sol = solve_lasso_from(&sub, &sub_inst, cfg, warm.as_deref())?;
        let r = linalg::sub(inst.y(), &sub.combine(&sol.w));
        (upsample(&sol.w, selected, p)?, sol.converged, sol.sweeps, r)
    };
    let solve_time = started.elapsed();

    let started = Instant::now();
    let (theta, corr) = feasible_dual(feat, inst, &r)?;
    let primal = residual_objective(&r, inst.lambda(), &w);
    let gap = (primal - dual_objective(inst, &theta)?).max(T::zero());
    let certify_time = started.elapsed();

    let bound = T::lit(10.0 * cfg.gap_tol) * primal.max(T::min_positive_value());
    if converged && gap > bound {
        return Err(ScreenError::SafetyViolation {
            gap: gap.to_f64().unwrap_or(f64::NAN),
            bound: bound.to_f64().unwrap_or(f64::NAN),
        });
    }
    let sol = Solution {
        active: active_set(&corr, inst.kind()),
        w,
        theta,
        gap,
        primal,
        converged,
        sweeps,
    };
    let metrics = ScreenedMetrics {
        rejection_fraction: report.rejection_fraction(),
        screen_time: report.screen_time,
        solve_time,
        certify_time,
    };
    Ok((sol, metrics))
}
