use std::time::Instant;

use super::{inside, BoundSource, ScreenReport};
use crate::dictionary::FeatureAccess;
use crate::error::{Result, ScreenError};
use crate::geometry::{Dome, HalfSpace, Region2H, Sphere};
use crate::linalg;
use crate::problem::{active_set, feasibility_scale, make_feasible, Instance, ProblemKind};
use crate::Scalar;

/// Sphere centered at `y/λ` with radius `|1/λ - 1/λ_max| ‖y‖`.
pub fn select_default_sphere<T: Scalar>(inst: &Instance<T>) -> Sphere<T> {
    let r = (T::one() / inst.lambda() - T::one() / inst.lambda_max()).abs() * linalg::norm(inst.y());
    Sphere::new(inst.scaled_target(), r).expect("default radius is finite and nonnegative")
}

/// Sphere centered at `y/λ` through a dual feasible point.
pub fn sphere_from_feasible<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    inst: &Instance<T>,
    theta_f: &[T],
) -> Result<Sphere<T>> {
    if theta_f.len() != feat.dim() {
        return Err(ScreenError::DimensionMismatch {
            expected: feat.dim(),
            got: theta_f.len(),
        });
    }
    let theta = make_feasible(feat, inst.kind(), theta_f)?;
    let q = inst.scaled_target();
    let r = linalg::dist(&theta, &q);
    Sphere::new(q, r)
}

/// Halfspace `{θ : n₀ᵀθ ≤ n₀ᵀθ₀}` with `n₀ ∝ y₀/λ₀ - θ₀`, valid when `θ₀` is the dual
/// optimum of `(y₀, λ₀)`.
pub fn halfspace_from_dual_solution<T: Scalar>(y0: &[T], lambda0: T, theta0: &[T]) -> Result<HalfSpace<T>> {
    if y0.len() != theta0.len() {
        return Err(ScreenError::DimensionMismatch {
            expected: y0.len(),
            got: theta0.len(),
        });
    }
    let dir: Vec<T> = y0.iter().zip(theta0).map(|(&y, &t)| y / lambda0 - t).collect();
    let d = linalg::norm(&dir);
    if !(d > T::zero()) {
        return Err(ScreenError::NotApplicable(
            "dual solution coincides with y/lambda0; no halfspace is defined".into(),
        ));
    }
    let n = linalg::scaled(T::one() / d, &dir);
    let c = linalg::dot(&n, theta0);
    HalfSpace::new(n, c)
}

/// Pool member maximising `(bᵀq - 1)/‖b‖` among features not in `exclude`, as the
/// halfspace `{θ : θᵀb ≤ 1}`.
pub fn select_halfspace_greedy<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    q: &[T],
    exclude: &[usize],
    kind: ProblemKind,
) -> Result<(HalfSpace<T>, usize)> {
    let rho = feat.correlate(q)?;
    let beta = feat.feature_norms()?;
    let j = greedy_index(&rho, &beta, kind, |i| exclude.contains(&i))
        .ok_or_else(|| ScreenError::InvalidParameter("no candidate features for halfspace selection".into()))?;
    Ok((feature_halfspace(feat, j, kind.pool_sign(rho[j]))?, j))
}

fn greedy_index<T: Scalar>(
    rho: &[T],
    beta: &[T],
    kind: ProblemKind,
    skip: impl FnMut(usize) -> bool,
) -> Option<usize> {
    linalg::argmax_by(rho.len(), skip, |i| (kind.pool_value(rho[i]) - T::one()) / beta[i]).map(|(i, _)| i)
}

fn feature_halfspace<T: Scalar, F: FeatureAccess<T> + ?Sized>(feat: &F, j: usize, sign: T) -> Result<HalfSpace<T>> {
    let b = feat.feature(j)?;
    HalfSpace::from_direction(&linalg::scaled(sign, &b), T::one())
}

/// Sphere test on an explicit sphere.
pub fn sphere_test<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    inst: &Instance<T>,
    sphere: &Sphere<T>,
) -> Result<ScreenReport> {
    let started = Instant::now();
    let rho = feat.correlate(sphere.center())?;
    let beta = feat.feature_norms()?;
    let flags = sphere_flags(inst.kind(), &rho, &beta, sphere.radius(), T::zero());
    Ok(ScreenReport::new(flags, started, vec![describe_sphere(sphere)], true))
}

/// Dome test on an explicit dome.
pub fn dome_test<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    inst: &Instance<T>,
    dome: &Dome<T>,
) -> Result<ScreenReport> {
    let started = Instant::now();
    let rho = feat.correlate(dome.sphere().center())?;
    let sigma = feat.correlate(dome.halfspace().normal())?;
    let beta = feat.feature_norms()?;
    let lasso = inst.kind() == ProblemKind::Lasso;
    let flags = (0..rho.len())
        .map(|i| {
            inside(
                lasso,
                rho[i],
                dome.lower(sigma[i], beta[i]),
                dome.upper(sigma[i], beta[i]),
                T::zero(),
            )
        })
        .collect();
    Ok(ScreenReport::new(flags, started, vec![describe_dome(dome)], true))
}

/// Two-hyperplane test on an explicit region.
pub fn region2h_test<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    inst: &Instance<T>,
    region: &Region2H<T>,
) -> Result<ScreenReport> {
    let started = Instant::now();
    let rho = feat.correlate(region.sphere().center())?;
    let sigma = feat.correlate(region.first().normal())?;
    let tau = feat.correlate(region.second().normal())?;
    let beta = feat.feature_norms()?;
    let lasso = inst.kind() == ProblemKind::Lasso;
    let flags = (0..rho.len())
        .map(|i| {
            Ok(inside(
                lasso,
                rho[i],
                region.lower(sigma[i], tau[i], beta[i])?,
                region.upper(sigma[i], tau[i], beta[i])?,
                T::zero(),
            ))
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(ScreenReport::new(flags, started, vec![describe_region(region)], true))
}

pub(crate) fn sphere_flags<T: Scalar>(kind: ProblemKind, rho: &[T], beta: &[T], r: T, margin: T) -> Vec<bool> {
    let lasso = kind == ProblemKind::Lasso;
    rho.iter()
        .zip(beta)
        .map(|(&p, &b)| {
            let u = T::one() - r * b;
            inside(lasso, p, -u, u, margin)
        })
        .collect()
}

pub(crate) fn describe_sphere<T: Scalar>(s: &Sphere<T>) -> String {
    format!("sphere(r={:.6e})", s.radius())
}

pub(crate) fn describe_dome<T: Scalar>(d: &Dome<T>) -> String {
    format!("dome(r={:.6e}, psi={:.6})", d.sphere().radius(), d.psi())
}

fn describe_region<T: Scalar>(g: &Region2H<T>) -> String {
    let (p1, p2) = g.psi();
    format!(
        "two-halfspace(r={:.6e}, psi1={:.6}, psi2={:.6}, tau={:.6})",
        g.sphere().radius(),
        p1,
        p2,
        g.tau()
    )
}

/// Bounding sphere, optional first halfspace, and the features whose test value equals
/// the threshold in exact arithmetic.
pub(crate) struct Bound<T> {
    pub sphere: Sphere<T>,
    pub dual_halfspace: Option<HalfSpace<T>>,
    pub boundary: Vec<usize>,
}

pub(crate) fn resolve_bound<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    inst: &Instance<T>,
    source: &BoundSource<T>,
) -> Result<Bound<T>> {
    match source {
        BoundSource::Default => Ok(Bound {
            sphere: select_default_sphere(inst),
            dual_halfspace: None,
            boundary: vec![inst.lambda_max_info().index],
        }),
        BoundSource::FeasiblePoint(theta) => Ok(Bound {
            sphere: sphere_from_feasible(feat, inst, theta)?,
            dual_halfspace: None,
            boundary: Vec::new(),
        }),
        BoundSource::DualSolution { lambda0, theta0, gap } => {
            if !(*lambda0 > T::zero()) || !(*gap >= T::zero()) {
                return Err(ScreenError::InvalidParameter(
                    "dual solution needs lambda0 > 0 and a nonnegative gap".into(),
                ));
            }
            if theta0.len() != feat.dim() {
                return Err(ScreenError::DimensionMismatch {
                    expected: feat.dim(),
                    got: theta0.len(),
                });
            }
            let corr = feat.correlate(theta0)?;
            let s = feasibility_scale(&corr, inst.kind());
            let theta = linalg::scaled(T::one() / s, theta0);
            let q = inst.scaled_target();
            let sphere = Sphere::new(q.clone(), linalg::dist(&theta, &q))?;
            // Features tight at θ₀ can span the halfspace normal; their test value is
            // exactly 1 when they stay active.
            let scaled: Vec<T> = corr.iter().map(|&c| c / s).collect();
            let boundary = active_set(&scaled, inst.kind());
            let dual_halfspace = match halfspace_from_dual_solution(inst.y(), *lambda0, &theta) {
                Ok(h) => {
                    // Distance from θ₀ to the exact solution is at most √(2·gap)/λ₀, and
                    // never trusted below rounding level. A direction of that size carries
                    // no information and the slack swamps it.
                    let floor = T::boundary_tol() * linalg::norm(inst.y()) / *lambda0;
                    let eps = ((T::lit(2.0) * *gap).sqrt() / *lambda0).max(floor);
                    let d = linalg::dist(&linalg::scaled(T::one() / *lambda0, inst.y()), &theta);
                    let slack = eps * (d + eps + T::lit(2.0) * sphere.radius()) / d;
                    if slack.is_finite() {
                        Some(HalfSpace::new(h.normal().to_vec(), h.offset() + slack)?)
                    } else {
                        None
                    }
                }
                Err(ScreenError::NotApplicable(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(Bound {
                sphere,
                dual_halfspace,
                boundary,
            })
        }
    }
}

/// Flags of the sphere test, the dome test and the two-hyperplane test built on the
/// same sphere with nested halfspaces, so that `st ⊆ dt ⊆ tht` holds feature by feature.
#[derive(Clone, Debug)]
pub struct NestedFlags<T> {
    pub st: Vec<bool>,
    pub dt: Vec<bool>,
    pub tht: Vec<bool>,
    pub sphere: Sphere<T>,
    pub first: Option<HalfSpace<T>>,
    /// Feature that generated the first halfspace (`None` when it came from a dual solution).
    pub first_feature: Option<usize>,
    pub second: Option<HalfSpace<T>>,
    pub second_feature: Option<usize>,
    pub regions: Vec<String>,
}

/// How many regions [`nested_tests`] builds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Depth {
    Sphere,
    Dome,
    TwoHalfspaces,
}

/// Greedy two-hyperplane construction, keeping the intermediate sphere and dome
/// flags. Regions beyond `depth` are not built and their flags copy the last level.
pub fn nested_tests<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    inst: &Instance<T>,
    source: &BoundSource<T>,
    margin: T,
    depth: Depth,
) -> Result<NestedFlags<T>> {
    let kind = inst.kind();
    let lasso = kind == ProblemKind::Lasso;
    let bound = resolve_bound(feat, inst, source)?;
    let q = bound.sphere.center().to_vec();
    let r = bound.sphere.radius();
    let rho = feat.correlate(&q)?;
    let beta = feat.feature_norms()?;
    let p = rho.len();
    let mut boundary = bound.boundary;
    boundary.sort_unstable();
    boundary.dedup();
    let mut st = sphere_flags(kind, &rho, &beta, r, margin);
    for &i in &boundary {
        let u = T::one() - r * beta[i];
        st[i] = inside(lasso, rho[i], -u, u, margin + T::boundary_tol());
    }
    let mut out = NestedFlags {
        dt: st.clone(),
        tht: st.clone(),
        st,
        sphere: bound.sphere.clone(),
        first: None,
        first_feature: None,
        second: None,
        second_feature: None,
        regions: vec![describe_sphere(&bound.sphere)],
    };
    if depth == Depth::Sphere {
        return Ok(out);
    }

    let (h1, i_star) = match bound.dual_halfspace {
        Some(h) => (h, None),
        None => match greedy_index(&rho, &beta, kind, |_| false) {
            Some(i) => (feature_halfspace(feat, i, kind.pool_sign(rho[i]))?, Some(i)),
            None => return Ok(out),
        },
    };
    boundary.extend(i_star);
    boundary.sort_unstable();
    boundary.dedup();
    let dome = match Dome::new(bound.sphere.clone(), h1.clone()) {
        Ok(d) => d,
        Err(ScreenError::ImproperRegion { .. }) => return Ok(out),
        Err(e) => return Err(e),
    };
    let sigma = feat.correlate(h1.normal())?;
    let edge = T::boundary_tol();
    let margin_of = |i: usize, boundary: &[usize]| {
        if boundary.binary_search(&i).is_ok() {
            margin + edge
        } else {
            margin
        }
    };
    for i in 0..p {
        if !out.dt[i] {
            out.dt[i] = inside(
                lasso,
                rho[i],
                dome.lower(sigma[i], beta[i]),
                dome.upper(sigma[i], beta[i]),
                margin_of(i, &boundary),
            );
        }
    }
    out.tht = out.dt.clone();
    out.first = Some(h1.clone());
    out.first_feature = i_star;
    out.regions.push(describe_dome(&dome));
    if depth < Depth::TwoHalfspaces || p < 2 {
        return Ok(out);
    }

    let a = linalg::dot(h1.normal(), &q) - h1.offset();
    let t: Vec<T> = rho.iter().zip(&sigma).map(|(&r, &s)| r - a * s).collect();
    let j_star = match greedy_index(&t, &beta, kind, |i| Some(i) == i_star) {
        Some(j) => j,
        None => return Ok(out),
    };
    let h2 = feature_halfspace(feat, j_star, kind.pool_sign(t[j_star]))?;
    let region = match Region2H::new(bound.sphere.clone(), h1, h2.clone()) {
        Ok(g) => g,
        Err(
            ScreenError::DegenerateRegion(_)
            | ScreenError::ImproperRegion { .. }
            | ScreenError::EmptyRegion { .. },
        ) => return Ok(out),
        Err(e) => return Err(e),
    };
    if let Err(k) = boundary.binary_search(&j_star) {
        boundary.insert(k, j_star);
    }
    let tau = feat.correlate(h2.normal())?;
    for i in 0..p {
        if !out.tht[i] {
            out.tht[i] = inside(
                lasso,
                rho[i],
                region.lower(sigma[i], tau[i], beta[i])?,
                region.upper(sigma[i], tau[i], beta[i])?,
                margin_of(i, &boundary),
            );
        }
    }
    out.second = Some(h2);
    out.second_feature = Some(j_star);
    out.regions.push(describe_region(&region));
    Ok(out)
}

/// Two-hyperplane test with the regions of the greedy construction.
pub fn tht_test<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    inst: &Instance<T>,
    source: &BoundSource<T>,
) -> Result<ScreenReport> {
    let started = Instant::now();
    let n = nested_tests(feat, inst, source, T::zero(), Depth::TwoHalfspaces)?;
    Ok(ScreenReport::new(n.tht, started, n.regions, true))
}
