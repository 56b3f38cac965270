use std::time::Instant;

use super::{BoundSource, ScreenReport, TestKind, TestSpec};
use crate::dictionary::FeatureAccess;
use crate::error::{Result, ScreenError};
use crate::linalg;
use crate::problem::{Instance, ProblemKind};
use crate::Scalar;

/// Correlations `f(b_iᵀv)/‖b_i‖`, i.e. computed against unit-norm features.
fn normalized_scores<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    kind: ProblemKind,
    v: &[T],
) -> Result<Vec<T>> {
    let c = feat.correlate(v)?;
    let beta = feat.feature_norms()?;
    Ok(c.iter().zip(&beta).map(|(&c, &b)| kind.pool_value(c) / b).collect())
}

/// Strong Rule, Strong Sequential Rule and SIS. These can reject active features;
/// reports are marked unsafe.
pub fn heuristic_test<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    inst: &Instance<T>,
    spec: &TestSpec<T>,
) -> Result<ScreenReport> {
    let started = Instant::now();
    let kind = inst.kind();
    let margin = spec.margin;
    let (flags, region) = match spec.kind {
        TestKind::StrongRule => {
            let c = normalized_scores(feat, kind, inst.y())?;
            let cmax = c.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
            let thr = (T::lit(2.0) * inst.ratio() - T::one()) * cmax;
            let flags = c.iter().map(|&v| v < thr - margin).collect();
            (flags, format!("strong-rule(threshold={thr:.6e})"))
        }
        TestKind::StrongSequentialRule => {
            let BoundSource::DualSolution { lambda0, theta0, .. } = &spec.source else {
                return Err(ScreenError::InvalidParameter(
                    "the strong sequential rule needs a dual solution at a larger lambda".into(),
                ));
            };
            if !(*lambda0 > inst.lambda()) {
                return Err(ScreenError::InvalidParameter(format!(
                    "strong sequential rule needs lambda0 > lambda ({lambda0} <= {})",
                    inst.lambda()
                )));
            }
            let residual = linalg::scaled(*lambda0, theta0);
            let c = normalized_scores(feat, kind, &residual)?;
            let thr = T::lit(2.0) * inst.lambda() - *lambda0;
            let flags = c.iter().map(|&v| v < thr - margin).collect();
            (flags, format!("strong-sequential(threshold={thr:.6e})"))
        }
        TestKind::Sis { gamma } => {
            let keep = sis_keep_count(gamma, feat.dim())?;
            let c = normalized_scores(feat, kind, inst.y())?;
            let mut order: Vec<usize> = (0..c.len()).collect();
            order.sort_by(|&a, &b| c[b].partial_cmp(&c[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
            let mut flags = vec![true; c.len()];
            for &i in order.iter().take(keep) {
                flags[i] = false;
            }
            let ratio = sis_ratio_from_scores(&c, inst.y(), keep);
            (flags, format!("sis(keep={keep}, implied_ratio={ratio:.6})"))
        }
        other => {
            return Err(ScreenError::InvalidParameter(format!(
                "{} is not a heuristic test",
                other.name()
            )))
        }
    };
    Ok(ScreenReport::new(flags, started, vec![region], false))
}

fn sis_keep_count(gamma: f64, n: usize) -> Result<usize> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(ScreenError::InvalidParameter(format!(
            "SIS gamma must lie in (0, 1), got {gamma}"
        )));
    }
    Ok((gamma * n as f64).floor() as usize)
}

fn sis_ratio_from_scores<T: Scalar>(c: &[T], y: &[T], keep: usize) -> T {
    let ny = linalg::norm(y);
    let mut sorted: Vec<T> = c.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let lmax = sorted.first().copied().unwrap_or(T::zero()) / ny;
    let t = if keep == 0 {
        lmax
    } else {
        sorted[(keep - 1).min(sorted.len() - 1)] / ny
    };
    (T::one() + t) / (T::one() + lmax)
}

/// `λ/λ_max = (1 + t_γ)/(1 + λ_max)` at which SIS coincides with the default sphere
/// test (unit-norm features and target).
pub fn sis_implied_ratio<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    y: &[T],
    kind: ProblemKind,
    gamma: f64,
) -> Result<T> {
    let keep = sis_keep_count(gamma, feat.dim())?;
    let c = normalized_scores(feat, kind, y)?;
    Ok(sis_ratio_from_scores(&c, y, keep))
}
