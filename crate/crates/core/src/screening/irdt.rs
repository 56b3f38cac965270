use std::time::Instant;

use super::region::{resolve_bound, sphere_flags};
use super::{inside, BoundSource, ScreenReport};
use crate::dictionary::FeatureAccess;
use crate::error::{Result, ScreenError};
use crate::geometry::{m1, PSI_TOL};
use crate::linalg;
use crate::problem::{Instance, ProblemKind};
use crate::Scalar;

pub const DEFAULT_IRDT_ITERATIONS: usize = 5;

/// Roundoff allowed on `ψ ≤ 1` for spheres obtained by repeated refinement.
const REFINED_PSI_TOL: f64 = 1.0e-9;

/// Iteratively refined dome test with at most `iterations` refinements.
///
/// Each iteration picks the surviving, unused pool member `b` maximising
/// `(qᵀb - 1)/‖b‖` on the current sphere, shrinks the sphere to the circumsphere of
/// the dome it cuts, and applies the dome test of that halfspace against every sphere
/// generated so far. The flags are the disjunction of all these tests.
pub fn irdt_test<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    inst: &Instance<T>,
    iterations: usize,
    source: &BoundSource<T>,
    margin: T,
) -> Result<ScreenReport> {
    if iterations < 1 {
        return Err(ScreenError::InvalidParameter(
            "IRDT needs at least one iteration".into(),
        ));
    }
    let started = Instant::now();
    let kind = inst.kind();
    let lasso = kind == ProblemKind::Lasso;
    let source = match source {
        BoundSource::DualSolution { theta0, .. } => BoundSource::FeasiblePoint(theta0.clone()),
        other => other.clone(),
    };
    let bound = resolve_bound(feat, inst, &source)?;
    let beta = feat.feature_norms()?;
    let mut rhos = vec![feat.correlate(bound.sphere.center())?];
    let mut radii = vec![bound.sphere.radius()];
    let mut flags = sphere_flags(kind, &rhos[0], &beta, radii[0], margin);
    for &i in &bound.boundary {
        let u = T::one() - radii[0] * beta[i];
        flags[i] = inside(lasso, rhos[0][i], -u, u, margin + T::boundary_tol());
    }
    let mut regions = vec![format!("sphere(r={:.6e})", radii[0])];
    let mut used = vec![false; flags.len()];
    let edge = T::boundary_tol();

    for j1 in 0..iterations {
        let rho = &rhos[j1];
        let r = radii[j1];
        if r == T::zero() {
            break;
        }
        let Some((h, score)) = linalg::argmax_by(
            rho.len(),
            |i| flags[i] || used[i],
            |i| (kind.pool_value(rho[i]) - T::one()) / beta[i],
        ) else {
            break;
        };
        let psi = clamp_psi(score / r)?;
        if psi <= T::zero() {
            break;
        }
        let sign = kind.pool_sign(rho[h]);
        let normal = linalg::scaled(sign / beta[h], &feat.feature(h)?);
        let t = feat.correlate(&normal)?;
        if j1 + 1 < iterations {
            let next: Vec<T> = rho.iter().zip(&t).map(|(&p, &ti)| p - psi * r * ti).collect();
            rhos.push(next);
            radii.push(r * (T::one() - psi * psi).max(T::zero()).sqrt());
        }
        for j2 in (0..=j1).rev() {
            let rj = radii[j2];
            if rj == T::zero() {
                continue;
            }
            let psi_j = if j2 == j1 {
                psi
            } else {
                let v = (sign * rhos[j2][h] - T::one()) / (beta[h] * rj);
                if v < -T::one() - T::lit(PSI_TOL) {
                    // The hyperplane misses this sphere; the dome adds nothing.
                    continue;
                }
                clamp_psi(v)?
            };
            let rho_j = &rhos[j2];
            for i in 0..flags.len() {
                if flags[i] {
                    continue;
                }
                let upper = |s: T| T::one() - m1(psi_j, rj, s, beta[i]);
                let m = if i == h || bound.boundary.contains(&i) {
                    margin + edge
                } else {
                    margin
                };
                flags[i] = inside(lasso, rho_j[i], -upper(-t[i]), upper(t[i]), m);
            }
            regions.push(format!("dome(level={}, feature={h}, r={:.6e}, psi={:.6})", j2 + 1, rj, psi_j));
        }
        used[h] = true;
    }
    Ok(ScreenReport::new(flags, started, regions, true))
}

fn clamp_psi<T: Scalar>(psi: T) -> Result<T> {
    if psi > T::one() + T::lit(REFINED_PSI_TOL) || psi.is_nan() {
        return Err(ScreenError::Invariant(format!(
            "refined sphere misses the feasible set (psi = {psi})"
        )));
    }
    Ok(psi.min(T::one()).max(-T::one()))
}
