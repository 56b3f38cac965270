//! Problem data, primal/dual conversions, duality gaps and the partition algebra.

use nalgebra::{DMatrix, DVector, RealField};
use num_traits::Float;

use crate::dictionary::{Dictionary, FeatureAccess};
use crate::error::{Result, ScreenError};
use crate::linalg;
use crate::Scalar;

/// Tolerance on `|θᵀb_i|` for membership in the active set.
pub const ACTIVE_TOL: f64 = 1.0e-7;

/// Residual above which the active-set system of [`recover_primal`] is inconsistent.
pub const RECOVERY_TOL: f64 = 1.0e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    /// Feature pool `{±b_i}`.
    Lasso,
    /// Feature pool `{b_i}`, weights constrained to be nonnegative.
    NonNegLasso,
}

impl ProblemKind {
    /// Largest value of `θᵀb` over the pool, given one correlation per feature.
    pub fn pool_value<T: Scalar>(self, corr: T) -> T {
        match self {
            ProblemKind::Lasso => corr.abs(),
            ProblemKind::NonNegLasso => corr,
        }
    }

    /// Sign of the pool member that attains [`pool_value`](Self::pool_value).
    pub fn pool_sign<T: Scalar>(self, corr: T) -> T {
        match self {
            ProblemKind::Lasso if corr < T::zero() => -T::one(),
            _ => T::one(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Lasso => "lasso",
            ProblemKind::NonNegLasso => "nonneg",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaMax<T> {
    pub value: T,
    pub index: usize,
    /// `+1` or `-1`: which of `±b_index` attains the maximum.
    pub sign: T,
}

/// `max_{b ∈ pool} yᵀb`, ties to the lowest index.
pub fn compute_lambda_max<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    y: &[T],
    kind: ProblemKind,
) -> Result<LambdaMax<T>> {
    let corr = feat.correlate(y)?;
    lambda_max_from_correlations(&corr, kind)
}

pub fn lambda_max_from_correlations<T: Scalar>(corr: &[T], kind: ProblemKind) -> Result<LambdaMax<T>> {
    let (index, value) = linalg::argmax_by(corr.len(), |_| false, |i| kind.pool_value(corr[i]))
        .ok_or_else(|| ScreenError::InvalidParameter("no finite feature correlations".into()))?;
    Ok(LambdaMax {
        value,
        index,
        sign: kind.pool_sign(corr[index]),
    })
}

/// A lasso instance `(y, λ)` of a given kind, with `λ_max` cached for one dictionary.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance<T> {
    y: Vec<T>,
    lambda: T,
    kind: ProblemKind,
    lambda_max: LambdaMax<T>,
}

impl<T: Scalar> Instance<T> {
    pub fn new<F: FeatureAccess<T> + ?Sized>(
        feat: &F,
        y: Vec<T>,
        lambda: T,
        kind: ProblemKind,
    ) -> Result<Self> {
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(ScreenError::InvalidParameter(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        if y.len() != feat.dim() {
            return Err(ScreenError::DimensionMismatch {
                expected: feat.dim(),
                got: y.len(),
            });
        }
        let lambda_max = compute_lambda_max(feat, &y, kind)?;
        Ok(Self {
            y,
            lambda,
            kind,
            lambda_max,
        })
    }

    /// Instance with `λ = ratio · λ_max`. Fails when `λ_max ≤ 0` (the zero solution is
    /// optimal for every `λ` and no ratio is meaningful).
    pub fn with_ratio<F: FeatureAccess<T> + ?Sized>(
        feat: &F,
        y: Vec<T>,
        ratio: T,
        kind: ProblemKind,
    ) -> Result<Self> {
        if !(ratio > T::zero()) {
            return Err(ScreenError::InvalidParameter(format!(
                "lambda ratio must be positive, got {ratio}"
            )));
        }
        let lm = compute_lambda_max(feat, &y, kind)?;
        if !(lm.value > T::zero()) {
            return Err(ScreenError::InvalidParameter(
                "lambda_max is not positive; the zero solution is optimal for every lambda".into(),
            ));
        }
        Ok(Self {
            y,
            lambda: ratio * lm.value,
            kind,
            lambda_max: lm,
        })
    }

    /// Same target and kind at a different `λ`.
    pub fn at_lambda(&self, lambda: T) -> Result<Self> {
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(ScreenError::InvalidParameter(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        Ok(Self {
            lambda,
            ..self.clone()
        })
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn lambda_max(&self) -> T {
        self.lambda_max.value
    }

    pub fn lambda_max_info(&self) -> LambdaMax<T> {
        self.lambda_max
    }

    pub fn ratio(&self) -> T {
        self.lambda / self.lambda_max.value
    }

    /// `y / λ`, the unconstrained dual maximiser.
    pub fn scaled_target(&self) -> Vec<T> {
        linalg::scaled(T::one() / self.lambda, &self.y)
    }
}

/// Split of the feature indices into selected `S` and rejected `S̄`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Partition {
    pub selected: Vec<usize>,
    pub rejected: Vec<usize>,
}

impl Partition {
    pub fn from_flags(rejected: &[bool]) -> Self {
        let mut out = Partition::default();
        for (i, &r) in rejected.iter().enumerate() {
            if r {
                out.rejected.push(i);
            } else {
                out.selected.push(i);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.selected.len() + self.rejected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rejection_fraction(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.rejected.len() as f64 / self.len() as f64
        }
    }
}

/// Primal/dual pair returned by the solver.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution<T> {
    pub w: Vec<T>,
    pub theta: Vec<T>,
    /// Duality gap of `(w, theta)`; `theta` is already dual feasible.
    pub gap: T,
    pub primal: T,
    /// `{i : |θᵀb_i| ≥ 1 - 1e-7}` over the pool.
    pub active: Vec<usize>,
    pub converged: bool,
    pub sweeps: usize,
}

/// `½‖y - Bw‖² + λ‖w‖₁`
pub fn primal_objective<T: Scalar>(dict: &Dictionary<T>, inst: &Instance<T>, w: &[T]) -> Result<T> {
    check_len(dict.count(), w.len())?;
    let r = linalg::sub(inst.y(), &dict.combine(w));
    Ok(residual_objective(&r, inst.lambda(), w))
}

pub(crate) fn residual_objective<T: Scalar>(residual: &[T], lambda: T, w: &[T]) -> T {
    T::lit(0.5) * linalg::dot(residual, residual) + lambda * linalg::norm1(w)
}

/// `½‖y‖² - λ²/2 ‖θ - y/λ‖²`
pub fn dual_objective<T: Scalar>(inst: &Instance<T>, theta: &[T]) -> Result<T> {
    check_len(inst.y().len(), theta.len())?;
    let lam = inst.lambda();
    let d: T = inst
        .y()
        .iter()
        .zip(theta)
        .map(|(&y, &t)| {
            let v = t - y / lam;
            v * v
        })
        .sum();
    Ok(T::lit(0.5) * linalg::dot(inst.y(), inst.y()) - T::lit(0.5) * lam * lam * d)
}

/// `θ = (y - Bw) / λ`
pub fn dual_from_primal<T: Scalar>(dict: &Dictionary<T>, inst: &Instance<T>, w: &[T]) -> Result<Vec<T>> {
    check_len(dict.count(), w.len())?;
    check_len(dict.dim(), inst.y().len())?;
    let r = linalg::sub(inst.y(), &dict.combine(w));
    Ok(linalg::scaled(T::one() / inst.lambda(), &r))
}

/// Factor `max(1, max_pool θᵀb)` that brings `θ` into the dual feasible set.
pub fn feasibility_scale<T: Scalar>(corr: &[T], kind: ProblemKind) -> T {
    corr.iter()
        .map(|&c| kind.pool_value(c))
        .fold(T::one(), |a, b| if b > a { b } else { a })
}

/// Rescales `θ` into the feasible set (no-op when already feasible).
pub fn make_feasible<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    kind: ProblemKind,
    theta: &[T],
) -> Result<Vec<T>> {
    let s = feasibility_scale(&feat.correlate(theta)?, kind);
    Ok(linalg::scaled(T::one() / s, theta))
}

/// Primal minus dual objective, with `θ` first scaled into the feasible set.
/// For nonnegative problems a `w` with negative entries is infeasible and yields `+∞`.
pub fn duality_gap<T: Scalar>(
    dict: &Dictionary<T>,
    inst: &Instance<T>,
    w: &[T],
    theta: &[T],
) -> Result<T> {
    if inst.kind() == ProblemKind::NonNegLasso && w.iter().any(|&v| v < T::zero()) {
        return Ok(T::infinity());
    }
    let p = primal_objective(dict, inst, w)?;
    let feasible = make_feasible(dict, inst.kind(), theta)?;
    let d = dual_objective(inst, &feasible)?;
    Ok(p - d)
}

/// Indices with `|θᵀb_i| ≥ 1 - 1e-7` (pool-aware: nonneg only counts `θᵀb_i ≥ 1 - 1e-7`).
pub fn active_set<T: Scalar>(corr: &[T], kind: ProblemKind) -> Vec<usize> {
    let thr = T::one() - T::lit(ACTIVE_TOL);
    corr.iter()
        .enumerate()
        .filter(|(_, &c)| kind.pool_value(c) >= thr)
        .map(|(i, _)| i)
        .collect()
}

/// Result of [`recover_primal`].
#[derive(Clone, Debug, PartialEq)]
pub struct Recovery<T> {
    pub w: Vec<T>,
    pub active: Vec<usize>,
    /// The active columns are linearly dependent, so the primal solution is not unique;
    /// `w` is the minimum-norm representative.
    pub rank_deficient: bool,
    /// Some `w_i · θ̂ᵀb_i < 0`: the minimum-norm solution violates the sign conditions.
    pub sign_violation: bool,
    pub residual: T,
}

/// Builds a primal solution from the dual optimum by least squares on the active set.
pub fn recover_primal<T: Scalar + RealField>(
    dict: &Dictionary<T>,
    inst: &Instance<T>,
    theta: &[T],
) -> Result<Recovery<T>> {
    check_len(dict.dim(), theta.len())?;
    let corr = dict.correlate(theta);
    let active = active_set(&corr, inst.kind());
    let target: Vec<T> = inst
        .y()
        .iter()
        .zip(theta)
        .map(|(&y, &t)| y - inst.lambda() * t)
        .collect();
    let p = dict.count();
    if active.is_empty() {
        let residual = linalg::norm(&target);
        if residual > T::lit(RECOVERY_TOL) * (T::one() + linalg::norm(inst.y())) {
            return Err(ScreenError::InconsistentSystem {
                residual: residual.to_f64().unwrap_or(f64::NAN),
            });
        }
        return Ok(Recovery {
            w: vec![T::zero(); p],
            active,
            rank_deficient: false,
            sign_violation: false,
            residual,
        });
    }
    let (z, rank) = min_norm_lstsq(dict, &active, &target)?;
    let mut w = vec![T::zero(); p];
    for (&j, &v) in active.iter().zip(&z) {
        w[j] = v;
    }
    let fitted = dict.combine(&w);
    let residual = linalg::dist(&fitted, &target);
    if residual > T::lit(RECOVERY_TOL) * (T::one() + linalg::norm(inst.y())) {
        return Err(ScreenError::InconsistentSystem {
            residual: residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    let sign_violation = active.iter().any(|&j| {
        let s = w[j] * corr[j];
        s < T::zero() && Float::abs(w[j]) > T::lit(RECOVERY_TOL)
    });
    Ok(Recovery {
        w,
        rank_deficient: rank < active.len(),
        sign_violation,
        active,
        residual,
    })
}

/// Minimum-norm least-squares solution of `B_{↓cols} z = target` and the numerical rank.
pub(crate) fn min_norm_lstsq<T: Scalar + RealField>(
    dict: &Dictionary<T>,
    cols: &[usize],
    target: &[T],
) -> Result<(Vec<T>, usize)> {
    let n = dict.dim();
    let mut m = DMatrix::<T>::zeros(n, cols.len());
    for (k, &j) in cols.iter().enumerate() {
        m.set_column(k, &DVector::from_vec(dict.column(j)));
    }
    let svd = m.svd(true, true);
    let smax = svd
        .singular_values
        .iter()
        .fold(T::zero(), |a, &b| Float::max(a, b));
    let eps = smax * T::lit(1.0e-12) * T::from_usize_lossy(n.max(cols.len()));
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    let z = svd
        .solve(&DVector::from_column_slice(target), eps)
        .map_err(|e| ScreenError::Invariant(format!("svd solve failed: {e}")))?;
    Ok((z.iter().copied().collect(), rank))
}

/// `w_{↓S}`
pub fn subsample<T: Copy>(w: &[T], s: &[usize]) -> Result<Vec<T>> {
    s.iter()
        .map(|&i| {
            w.get(i).copied().ok_or(ScreenError::IndexOutOfRange {
                index: i,
                len: w.len(),
            })
        })
        .collect()
}

/// `z^{↑S}` in `ℝ^p`: entries of `z` placed at the indices of `S`, zeros elsewhere.
pub fn upsample<T: Scalar>(z: &[T], s: &[usize], p: usize) -> Result<Vec<T>> {
    check_len(s.len(), z.len())?;
    let mut w = vec![T::zero(); p];
    for (&i, &v) in s.iter().zip(z) {
        if i >= p {
            return Err(ScreenError::IndexOutOfRange { index: i, len: p });
        }
        w[i] = v;
    }
    Ok(w)
}

/// `(αB, αy, α²λ)`: same ratio `λ/λ_max`, same solutions.
pub fn rescale_instance<T: Scalar>(
    dict: &Dictionary<T>,
    inst: &Instance<T>,
    alpha: T,
) -> Result<(Dictionary<T>, Instance<T>)> {
    if !(alpha > T::zero()) || !alpha.is_finite() {
        return Err(ScreenError::InvalidParameter(format!(
            "scale factor must be positive, got {alpha}"
        )));
    }
    let d = dict.scaled(alpha)?;
    let y = linalg::scaled(alpha, inst.y());
    let i = Instance::new(&d, y, alpha * alpha * inst.lambda(), inst.kind())?;
    Ok((d, i))
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(ScreenError::DimensionMismatch { expected, got })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tiny() -> (Dictionary<f64>, Instance<f64>) {
        let h = 0.5f64.sqrt();
        let d = Dictionary::from_columns(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![h, h]]).unwrap();
        let i = Instance::new(&d, vec![1.0, 0.0], 0.5, ProblemKind::Lasso).unwrap();
        (d, i)
    }

    #[test]
    fn lambda_max_identity() {
        let d = Dictionary::from_columns(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let lm = compute_lambda_max(&d, &[0.6, 0.8], ProblemKind::Lasso).unwrap();
        assert_eq!((lm.value, lm.index, lm.sign), (0.8, 1, 1.0));
        let lm = compute_lambda_max(&d, &[-0.6, -0.8], ProblemKind::Lasso).unwrap();
        assert_eq!((lm.value, lm.index, lm.sign), (0.8, 1, -1.0));
        let lm = compute_lambda_max(&d, &[-0.6, -0.8], ProblemKind::NonNegLasso).unwrap();
        assert_eq!((lm.value, lm.index), (-0.6, 0));
        assert!(compute_lambda_max(&d, &[1.0], ProblemKind::Lasso).is_err());
    }

    #[test]
    fn lambda_max_ties_lowest_index() {
        let d = Dictionary::from_columns(&[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let lm = compute_lambda_max(&d, &[1.0, 0.0], ProblemKind::Lasso).unwrap();
        assert_eq!((lm.index, lm.sign), (0, 1.0));
    }

    #[test]
    fn tiny_dual_and_recovery() {
        let (d, i) = tiny();
        let theta = dual_from_primal(&d, &i, &[0.5, 0.0, 0.0]).unwrap();
        assert_eq!(theta, vec![1.0, 0.0]);
        let rec = recover_primal(&d, &i, &theta).unwrap();
        assert_eq!(rec.active, vec![0]);
        assert_abs_diff_eq!(rec.w[0], 0.5, epsilon = 1e-14);
        assert_eq!(&rec.w[1..], &[0.0, 0.0]);
        assert!(!rec.rank_deficient && !rec.sign_violation);
        let gap = duality_gap(&d, &i, &rec.w, &theta).unwrap();
        assert!(gap.abs() <= 1e-12);
    }

    #[test]
    fn zero_solution_above_lambda_max() {
        let (d, i) = tiny();
        let i = i.at_lambda(1.5).unwrap();
        let theta = dual_from_primal(&d, &i, &[0.0; 3]).unwrap();
        assert!(d.correlate(&theta).iter().all(|c| c.abs() <= 1.0));
        assert_abs_diff_eq!(duality_gap(&d, &i, &[0.0; 3], &theta).unwrap(), 0.0, epsilon = 1e-15);
        let rec = recover_primal(&d, &i, &theta).unwrap();
        assert!(rec.active.is_empty() && rec.w.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gap_positive_for_suboptimal_point() {
        let (d, i) = tiny();
        let theta = i.scaled_target();
        assert!(duality_gap(&d, &i, &[0.0; 3], &theta).unwrap() > 0.1);
    }

    #[test]
    fn inconsistent_recovery_is_reported() {
        let (d, i) = tiny();
        // Feasible but not optimal: active set {b1} cannot reproduce y - λθ.
        let err = recover_primal(&d, &i, &[1.0, -0.2]).unwrap_err();
        assert!(matches!(err, ScreenError::InconsistentSystem { .. }));
    }

    #[test]
    fn sub_and_upsample() {
        let w = [1.0, 2.0, 3.0];
        let z = subsample(&w, &[0, 2]).unwrap();
        assert_eq!(z, vec![1.0, 3.0]);
        assert_eq!(upsample(&z, &[0, 2], 3).unwrap(), vec![1.0, 0.0, 3.0]);
        assert_eq!(subsample(&w, &[0, 1, 2]).unwrap(), w.to_vec());
        assert!(subsample(&w, &[3]).is_err());
        assert!(upsample(&z, &[0, 5], 3).is_err());
    }

    #[test]
    fn rescale_preserves_ratio() {
        let (d, i) = tiny();
        let (d2, i2) = rescale_instance(&d, &i, 2.0).unwrap();
        assert_eq!(i2.lambda_max(), 4.0 * i.lambda_max());
        assert_eq!(i2.ratio(), i.ratio());
        assert_eq!(d2.norms()[0], 2.0);
        let (_, i1) = rescale_instance(&d, &i, 1.0).unwrap();
        assert_eq!(i1, i);
        assert!(rescale_instance(&d, &i, 0.0).is_err());
    }

    #[test]
    fn partition_from_flags() {
        let p = Partition::from_flags(&[false, true, true]);
        assert_eq!(p.selected, vec![0]);
        assert_eq!(p.rejected, vec![1, 2]);
        assert!((p.rejection_fraction() - 2.0 / 3.0).abs() < 1e-15);
    }
}
