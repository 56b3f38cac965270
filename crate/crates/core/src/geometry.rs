//! Bounding regions for the dual optimum and their support functions `μ_R(b) = max_{θ∈R} θᵀb`.

use crate::error::{Result, ScreenError};
use crate::linalg;
use crate::Scalar;

/// Slack on `ψ ∈ [-1, 1]` before a region is declared empty or improper.
pub const PSI_TOL: f64 = 1.0e-12;
/// Negative radicands above `-RADICAND_TOL · scale` are treated as zero.
pub const RADICAND_TOL: f64 = 1.0e-12;
/// Tolerated violation of the two-halfspace nonemptiness condition (in radians).
pub const ANGLE_TOL: f64 = 1.0e-10;

fn unit_tol<T: Scalar>() -> T {
    T::lit(1.0e-12).max(T::epsilon() * T::lit(16.0))
}

fn radicand_tol<T: Scalar>() -> T {
    T::lit(RADICAND_TOL).max(T::epsilon() * T::lit(64.0))
}

/// `√x` for a quantity that is nonnegative in exact arithmetic.
fn sqrt_clamped<T: Scalar>(x: T, scale: T) -> Result<T> {
    if x >= T::zero() {
        Ok(x.sqrt())
    } else if x >= -radicand_tol::<T>() * scale.max(T::one()) {
        Ok(T::zero())
    } else {
        Err(ScreenError::Invariant(format!(
            "negative radicand {x:e} in support function"
        )))
    }
}

/// Closed ball `{θ : ‖θ - q‖ ≤ r}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sphere<T> {
    center: Vec<T>,
    radius: T,
}

impl<T: Scalar> Sphere<T> {
    pub fn new(center: Vec<T>, radius: T) -> Result<Self> {
        if !(radius >= T::zero()) || !radius.is_finite() {
            return Err(ScreenError::InvalidParameter(format!(
                "sphere radius must be finite and nonnegative, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &[T] {
        &self.center
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `qᵀb + r‖b‖`
    pub fn mu(&self, b: &[T]) -> T {
        linalg::dot(&self.center, b) + self.radius * linalg::norm(b)
    }

    pub fn contains(&self, theta: &[T], tol: T) -> bool {
        linalg::dist(theta, &self.center) <= self.radius + tol
    }
}

/// Closed halfspace `{θ : nᵀθ ≤ c}` with unit normal.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpace<T> {
    normal: Vec<T>,
    offset: T,
}

impl<T: Scalar> HalfSpace<T> {
    pub fn new(normal: Vec<T>, offset: T) -> Result<Self> {
        let nn = linalg::norm(&normal);
        if !((nn - T::one()).abs() <= unit_tol::<T>()) || !offset.is_finite() {
            return Err(ScreenError::InvalidParameter(format!(
                "halfspace normal must have unit norm (got {nn}) and a finite offset"
            )));
        }
        Ok(Self { normal, offset })
    }

    /// `{θ : vᵀθ ≤ d}` rescaled to a unit normal.
    pub fn from_direction(v: &[T], d: T) -> Result<Self> {
        let nv = linalg::norm(v);
        if !(nv > T::zero()) || !nv.is_finite() {
            return Err(ScreenError::InvalidParameter(
                "halfspace direction must be nonzero".into(),
            ));
        }
        Self::new(linalg::scaled(T::one() / nv, v), d / nv)
    }

    /// `{θ : θᵀb ≤ 1}` for a pool member `b`.
    pub fn from_feature(b: &[T]) -> Result<Self> {
        Self::from_direction(b, T::one())
    }

    pub fn normal(&self) -> &[T] {
        &self.normal
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn contains(&self, theta: &[T], tol: T) -> bool {
        linalg::dot(&self.normal, theta) <= self.offset + tol
    }
}

/// Signed distance of the hyperplane from the center in units of the radius,
/// `ψ = (nᵀq - c)/r`, validated against `[-1, 1]`.
fn signed_fraction<T: Scalar>(s: &Sphere<T>, h: &HalfSpace<T>) -> Result<T> {
    let gap = linalg::dot(&h.normal, &s.center) - h.offset;
    if s.radius == T::zero() {
        // Point region: the halfspace either keeps the point or empties the region.
        return if gap <= T::lit(PSI_TOL) * (T::one() + h.offset.abs()) {
            Ok(T::one())
        } else {
            Err(ScreenError::EmptyRegion {
                psi: f64::INFINITY,
            })
        };
    }
    let psi = gap / s.radius;
    let tol = T::lit(PSI_TOL);
    if psi > T::one() + tol {
        Err(ScreenError::EmptyRegion {
            psi: psi.to_f64().unwrap_or(f64::NAN),
        })
    } else if psi < -T::one() - tol {
        Err(ScreenError::ImproperRegion {
            psi: psi.to_f64().unwrap_or(f64::NAN),
        })
    } else if psi.is_nan() {
        Err(ScreenError::InvalidParameter("non-finite region parameters".into()))
    } else {
        Ok(psi.max(-T::one()).min(T::one()))
    }
}

/// `M₁(t₁, t₂)` for a dome of radius `r` and fraction `ψ`.
pub fn m1<T: Scalar>(psi: T, r: T, t1: T, t2: T) -> T {
    if t1 < -psi * t2 {
        r * t2
    } else {
        let rad = (t2 * t2 - t1 * t1).max(T::zero());
        let side = (T::one() - psi * psi).max(T::zero());
        -psi * r * t1 + r * rad.sqrt() * side.sqrt()
    }
}

/// Intersection of a sphere and a halfspace.
#[derive(Clone, Debug, PartialEq)]
pub struct Dome<T> {
    sphere: Sphere<T>,
    halfspace: HalfSpace<T>,
    psi: T,
    center: Vec<T>,
    radius: T,
}

impl<T: Scalar> Dome<T> {
    /// Fails with `EmptyRegion` when `ψ > 1` and `ImproperRegion` when `ψ < -1`
    /// (the hyperplane misses the ball, the dome is the whole sphere).
    pub fn new(sphere: Sphere<T>, halfspace: HalfSpace<T>) -> Result<Self> {
        if sphere.dim() != halfspace.normal.len() {
            return Err(ScreenError::DimensionMismatch {
                expected: sphere.dim(),
                got: halfspace.normal.len(),
            });
        }
        let psi = signed_fraction(&sphere, &halfspace)?;
        let r = sphere.radius;
        let mut center = sphere.center.clone();
        linalg::axpy(-psi * r, &halfspace.normal, &mut center);
        let radius = r * (T::one() - psi * psi).max(T::zero()).sqrt();
        Ok(Self {
            sphere,
            halfspace,
            psi,
            center,
            radius,
        })
    }

    pub fn sphere(&self) -> &Sphere<T> {
        &self.sphere
    }

    pub fn halfspace(&self) -> &HalfSpace<T> {
        &self.halfspace
    }

    /// `ψ_d`
    pub fn psi(&self) -> T {
        self.psi
    }

    /// `q_d = q - ψ_d r n`, the center of the dome base.
    pub fn base_center(&self) -> &[T] {
        &self.center
    }

    /// `r_d = r √(1 - ψ_d²)`
    pub fn base_radius(&self) -> T {
        self.radius
    }

    /// Support value from precomputed `qᵀb`, `nᵀb` and `‖b‖`.
    #[inline]
    pub fn mu_parts(&self, qb: T, nb: T, bnorm: T) -> T {
        qb + m1(self.psi, self.sphere.radius, nb, bnorm)
    }

    pub fn mu(&self, b: &[T]) -> T {
        self.mu_parts(
            linalg::dot(&self.sphere.center, b),
            linalg::dot(&self.halfspace.normal, b),
            linalg::norm(b),
        )
    }

    /// `V_u(t₁, t₂) = 1 - M₁(t₁, t₂)`
    #[inline]
    pub fn upper(&self, nb: T, bnorm: T) -> T {
        T::one() - m1(self.psi, self.sphere.radius, nb, bnorm)
    }

    /// `V_l(t₁, t₂) = -V_u(-t₁, t₂)`
    #[inline]
    pub fn lower(&self, nb: T, bnorm: T) -> T {
        -self.upper(-nb, bnorm)
    }

    /// Largest distance between two points of the dome.
    pub fn diameter(&self) -> T {
        if self.psi > T::zero() {
            let d = linalg::dot(&self.halfspace.normal, &self.sphere.center) - self.halfspace.offset;
            let r = self.sphere.radius;
            T::lit(2.0) * (r * r - d * d).max(T::zero()).sqrt()
        } else {
            T::lit(2.0) * self.sphere.radius
        }
    }

    /// The circumsphere `(q_d, r_d)`; only defined for `0 < ψ ≤ 1`, where it is strictly
    /// smaller than the original sphere.
    pub fn circumsphere(&self) -> Result<Sphere<T>> {
        if self.psi > T::zero() {
            Sphere::new(self.center.clone(), self.radius)
        } else {
            Err(ScreenError::NotRefinable {
                psi: self.psi.to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    pub fn contains(&self, theta: &[T], tol: T) -> bool {
        self.sphere.contains(theta, tol) && self.halfspace.contains(theta, tol)
    }
}

/// `make_dome`: fails when the halfspace empties the ball or misses it.
pub fn make_dome<T: Scalar>(sphere: Sphere<T>, halfspace: HalfSpace<T>) -> Result<Dome<T>> {
    Dome::new(sphere, halfspace)
}

/// Circumsphere of the dome cut from `sphere` by `halfspace`.
pub fn circumsphere_refine<T: Scalar>(sphere: &Sphere<T>, halfspace: &HalfSpace<T>) -> Result<Sphere<T>> {
    Dome::new(sphere.clone(), halfspace.clone())?.circumsphere()
}

/// Which closed-form case produced a two-halfspace support value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum M2Branch {
    /// Maximiser on the sphere, both halfspaces inactive.
    A,
    /// Maximiser on the sphere and the second hyperplane.
    B,
    /// Maximiser on the sphere and the first hyperplane.
    C,
    /// Maximiser on the sphere and both hyperplanes.
    D,
    /// The hyperplanes do not meet inside the ball; the smaller dome value is exact.
    Separate,
    /// Zero radius.
    Point,
}

/// Sphere intersected with two halfspaces.
#[derive(Clone, Debug, PartialEq)]
pub struct Region2H<T> {
    sphere: Sphere<T>,
    h1: HalfSpace<T>,
    h2: HalfSpace<T>,
    psi1: T,
    psi2: T,
    tau: T,
    /// `1 - τ² + 2τψ₁ψ₂ - ψ₁² - ψ₂²`: negative when the hyperplanes meet outside the ball.
    det: T,
}

/// `h(x, y, z)² = (1 - τ²)z² + 2τxy - x² - y²`
#[inline]
fn h_sq<T: Scalar>(tau: T, x: T, y: T, z: T) -> T {
    (T::one() - tau * tau) * z * z + T::lit(2.0) * tau * x * y - x * x - y * y
}

impl<T: Scalar> Region2H<T> {
    pub fn new(sphere: Sphere<T>, h1: HalfSpace<T>, h2: HalfSpace<T>) -> Result<Self> {
        for h in [&h1, &h2] {
            if h.normal.len() != sphere.dim() {
                return Err(ScreenError::DimensionMismatch {
                    expected: sphere.dim(),
                    got: h.normal.len(),
                });
            }
        }
        let tau = linalg::dot(&h1.normal, &h2.normal).max(-T::one()).min(T::one());
        if T::one() - tau.abs() <= unit_tol::<T>() {
            return Err(ScreenError::DegenerateRegion(
                "halfspace normals are parallel".into(),
            ));
        }
        let psi1 = signed_fraction(&sphere, &h1)?;
        let psi2 = signed_fraction(&sphere, &h2)?;
        if sphere.radius > T::zero() {
            let slack = psi1.acos() + psi2.acos() - tau.acos();
            if slack < -T::lit(ANGLE_TOL) {
                return Err(ScreenError::EmptyRegion {
                    psi: psi1.max(psi2).to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        let det = h_sq(tau, psi1, psi2, T::one());
        Ok(Self {
            sphere,
            h1,
            h2,
            psi1,
            psi2,
            tau,
            det,
        })
    }

    pub fn sphere(&self) -> &Sphere<T> {
        &self.sphere
    }

    pub fn first(&self) -> &HalfSpace<T> {
        &self.h1
    }

    pub fn second(&self) -> &HalfSpace<T> {
        &self.h2
    }

    pub fn psi(&self) -> (T, T) {
        (self.psi1, self.psi2)
    }

    /// `τ = n₁ᵀn₂`
    pub fn tau(&self) -> T {
        self.tau
    }

    /// `M₂(t₁, t₂, t₃)` and the case that produced it.
    pub fn m2(&self, t1: T, t2: T, t3: T) -> Result<(T, M2Branch)> {
        let r = self.sphere.radius;
        if r == T::zero() {
            return Ok((T::zero(), M2Branch::Point));
        }
        let (p1, p2, tau) = (self.psi1, self.psi2, self.tau);
        let scale = t3 * t3;
        if t1 < -p1 * t3 && t2 < -p2 * t3 {
            return Ok((r * t3, M2Branch::A));
        }
        if self.det < T::zero() {
            let d1 = m1(p1, r, t1, t3);
            let d2 = m1(p2, r, t2, t3);
            return Ok((d1.min(d2), M2Branch::Separate));
        }
        let s2 = (T::one() - p2 * p2).max(T::zero()).sqrt();
        let s1 = (T::one() - p1 * p1).max(T::zero()).sqrt();
        let w2 = sqrt_clamped(t3 * t3 - t2 * t2, scale)?;
        let w1 = sqrt_clamped(t3 * t3 - t1 * t1, scale)?;
        if t2 >= -p2 * t3 && (t1 - tau * t2) * s2 < (-p1 + tau * p2) * w2 {
            return Ok((-r * t2 * p2 + r * w2 * s2, M2Branch::B));
        }
        if t1 >= -p1 * t3 && (t2 - tau * t1) * s1 < (-p2 + tau * p1) * w1 {
            return Ok((-r * t1 * p1 + r * w1 * s1, M2Branch::C));
        }
        let k = r / (T::one() - tau * tau);
        let hp = sqrt_clamped(self.det, T::one())?;
        let ht = sqrt_clamped(h_sq(tau, t1, t2, t3), scale)?;
        let v = -k * ((p1 - tau * p2) * t1 + (p2 - tau * p1) * t2) + k * hp * ht;
        Ok((v, M2Branch::D))
    }

    /// Support value from precomputed `qᵀb`, `n₁ᵀb`, `n₂ᵀb` and `‖b‖`.
    #[inline]
    pub fn mu_parts(&self, qb: T, n1b: T, n2b: T, bnorm: T) -> Result<T> {
        Ok(qb + self.m2(n1b, n2b, bnorm)?.0)
    }

    pub fn mu(&self, b: &[T]) -> Result<T> {
        self.mu_parts(
            linalg::dot(&self.sphere.center, b),
            linalg::dot(&self.h1.normal, b),
            linalg::dot(&self.h2.normal, b),
            linalg::norm(b),
        )
    }

    /// `V_u(t₁, t₂, t₃) = 1 - M₂(t₁, t₂, t₃)`
    pub fn upper(&self, t1: T, t2: T, t3: T) -> Result<T> {
        Ok(T::one() - self.m2(t1, t2, t3)?.0)
    }

    /// `V_l(t₁, t₂, t₃) = -V_u(-t₁, -t₂, t₃)`
    pub fn lower(&self, t1: T, t2: T, t3: T) -> Result<T> {
        Ok(-self.upper(-t1, -t2, t3)?)
    }

    pub fn contains(&self, theta: &[T], tol: T) -> bool {
        self.sphere.contains(theta, tol) && self.h1.contains(theta, tol) && self.h2.contains(theta, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_ball() -> Sphere<f64> {
        Sphere::new(vec![0.0, 0.0], 1.0).unwrap()
    }

    #[test]
    fn sphere_support() {
        let s = unit_ball();
        assert_eq!(s.mu(&[3.0, 4.0]), 5.0);
        let p = Sphere::new(vec![1.0, 2.0], 0.0).unwrap();
        assert_eq!(p.mu(&[3.0, 4.0]), 11.0);
        assert!(Sphere::new(vec![0.0], -1.0).is_err());
    }

    #[test]
    fn dome_parameters() {
        let h = HalfSpace::new(vec![1.0, 0.0], -0.5).unwrap();
        let d = make_dome(unit_ball(), h).unwrap();
        assert_eq!(d.psi(), 0.5);
        assert_eq!(d.base_center(), &[-0.5, 0.0]);
        assert_abs_diff_eq!(d.base_radius(), 0.75f64.sqrt(), epsilon = 1e-15);
        let c = d.circumsphere().unwrap();
        assert_eq!(c.center(), &[-0.5, 0.0]);

        let half = make_dome(unit_ball(), HalfSpace::new(vec![1.0, 0.0], 0.0).unwrap()).unwrap();
        assert_eq!(half.psi(), 0.0);
        assert_eq!(half.base_radius(), 1.0);
        assert!(matches!(half.circumsphere(), Err(ScreenError::NotRefinable { .. })));
        assert_eq!(half.diameter(), 2.0);

        let tangent = make_dome(unit_ball(), HalfSpace::new(vec![1.0, 0.0], -1.0).unwrap()).unwrap();
        assert_eq!(tangent.psi(), 1.0);
        assert_eq!(tangent.base_radius(), 0.0);
        assert_eq!(tangent.circumsphere().unwrap().center(), &[-1.0, 0.0]);
    }

    #[test]
    fn dome_errors() {
        let empty = HalfSpace::new(vec![1.0, 0.0], -1.5).unwrap();
        assert!(matches!(make_dome(unit_ball(), empty), Err(ScreenError::EmptyRegion { .. })));
        let improper = HalfSpace::new(vec![1.0, 0.0], 2.0).unwrap();
        assert!(matches!(make_dome(unit_ball(), improper), Err(ScreenError::ImproperRegion { .. })));
    }

    #[test]
    fn dome_support_half_ball() {
        let d = make_dome(unit_ball(), HalfSpace::new(vec![1.0, 0.0], 0.0).unwrap()).unwrap();
        assert_abs_diff_eq!(d.mu(&[1.0, 0.0]), 0.0, epsilon = 1e-15);
        assert_eq!(d.mu(&[-1.0, 0.0]), 1.0);
    }

    #[test]
    fn quarter_disk() {
        let r = Region2H::new(
            unit_ball(),
            HalfSpace::new(vec![1.0, 0.0], 0.0).unwrap(),
            HalfSpace::new(vec![0.0, 1.0], 0.0).unwrap(),
        )
        .unwrap();
        let s = 0.5f64.sqrt();
        let (v, br) = r.m2(s, s, 1.0).unwrap();
        assert_eq!(br, M2Branch::D);
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-15);
        let (v, br) = r.m2(-s, -s, 1.0).unwrap();
        assert_eq!(br, M2Branch::A);
        assert_eq!(v, 1.0);
    }

    #[test]
    fn parallel_normals_rejected() {
        let r = Region2H::new(
            unit_ball(),
            HalfSpace::new(vec![1.0, 0.0], 0.0).unwrap(),
            HalfSpace::new(vec![-1.0, 0.0], 0.5).unwrap(),
        );
        assert!(matches!(r, Err(ScreenError::DegenerateRegion(_))));
    }

    #[test]
    fn two_halfspace_emptiness() {
        // x ≤ -0.8 and y ≤ -0.8 do not meet inside the unit disk.
        let r = Region2H::new(
            unit_ball(),
            HalfSpace::new(vec![1.0, 0.0], -0.8).unwrap(),
            HalfSpace::new(vec![0.0, 1.0], -0.8).unwrap(),
        );
        assert!(matches!(r, Err(ScreenError::EmptyRegion { .. })));
    }

    #[test]
    fn point_region_collapses() {
        let s = Sphere::new(vec![1.0, 2.0], 0.0).unwrap();
        let h = HalfSpace::new(vec![1.0, 0.0], 5.0).unwrap();
        let d = make_dome(s.clone(), h.clone()).unwrap();
        assert_eq!(d.mu(&[1.0, 1.0]), 3.0);
        let g = Region2H::new(s, h, HalfSpace::new(vec![0.0, 1.0], 2.0).unwrap()).unwrap();
        assert_eq!(g.mu(&[1.0, 1.0]).unwrap(), 3.0);
    }
}
