//! Screening tests: sphere, dome, two-hyperplane, iteratively refined domes and
//! unsafe comparators from the literature.

mod heuristic;
mod irdt;
mod region;

use std::time::{Duration, Instant};

use crate::dictionary::FeatureAccess;
use crate::error::{Result, ScreenError};
use crate::problem::{Instance, Partition};
use crate::Scalar;

pub use heuristic::{heuristic_test, sis_implied_ratio};
pub use irdt::{irdt_test, DEFAULT_IRDT_ITERATIONS};
pub use region::{
    dome_test, halfspace_from_dual_solution, nested_tests, region2h_test, select_default_sphere,
    select_halfspace_greedy, sphere_from_feasible, sphere_test, tht_test, Depth, NestedFlags,
};

/// Which rule to run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TestKind {
    Sphere,
    Dome,
    Tht,
    Irdt { iterations: usize },
    StrongRule,
    StrongSequentialRule,
    Sis { gamma: f64 },
}

impl TestKind {
    /// Safe tests never reject a feature that is active at the dual optimum.
    pub fn is_safe(self) -> bool {
        matches!(
            self,
            TestKind::Sphere | TestKind::Dome | TestKind::Tht | TestKind::Irdt { .. }
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            TestKind::Sphere => "ST",
            TestKind::Dome => "DT",
            TestKind::Tht => "THT",
            TestKind::Irdt { .. } => "IRDT",
            TestKind::StrongRule => "SR",
            TestKind::StrongSequentialRule => "SSR",
            TestKind::Sis { .. } => "SIS",
        }
    }
}

/// Where the bounding sphere (and possibly the first halfspace) comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundSource<T> {
    /// Feasible point `y/λ_max`.
    Default,
    /// A dual feasible point; rescaled into the feasible set if it is not.
    FeasiblePoint(Vec<T>),
    /// Dual solution `θ₀` of the same target at `λ₀`, with its certified duality gap
    /// (`0` for an exact solution). The gap widens the derived halfspace so that an
    /// approximate solution still yields a valid bound.
    DualSolution { lambda0: T, theta0: Vec<T>, gap: T },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestSpec<T> {
    pub kind: TestKind,
    pub source: BoundSource<T>,
    /// Features are rejected only when the test value clears its threshold by this much.
    pub margin: T,
}

impl<T: Scalar> TestSpec<T> {
    pub fn new(kind: TestKind) -> Self {
        Self {
            kind,
            source: BoundSource::Default,
            margin: T::zero(),
        }
    }

    pub fn with_source(mut self, source: BoundSource<T>) -> Self {
        self.source = source;
        self
    }

    pub fn with_margin(mut self, margin: T) -> Self {
        self.margin = margin;
        self
    }

    pub fn is_safe(&self) -> bool {
        self.kind.is_safe()
    }
}

/// Outcome of one screening pass.
#[derive(Clone, Debug, PartialEq)]
pub struct ScreenReport {
    /// `flags[i]` is true when feature `i` is rejected.
    pub flags: Vec<bool>,
    pub partition: Partition,
    pub screen_time: Duration,
    /// Human-readable description of the bounding regions that were used.
    pub regions: Vec<String>,
    pub safe: bool,
}

impl ScreenReport {
    pub(crate) fn new(flags: Vec<bool>, started: Instant, regions: Vec<String>, safe: bool) -> Self {
        Self {
            partition: Partition::from_flags(&flags),
            flags,
            screen_time: started.elapsed(),
            regions,
            safe,
        }
    }

    /// Report that keeps every feature.
    pub fn keep_all(p: usize) -> Self {
        Self::new(vec![false; p], Instant::now(), Vec::new(), true)
    }

    pub fn rejected_count(&self) -> usize {
        self.partition.rejected.len()
    }

    pub fn rejection_fraction(&self) -> f64 {
        self.partition.rejection_fraction()
    }
}

/// Runs the test described by `spec`.
pub fn screen<T: Scalar, F: FeatureAccess<T> + ?Sized>(
    feat: &F,
    inst: &Instance<T>,
    spec: &TestSpec<T>,
) -> Result<ScreenReport> {
    match spec.kind {
        TestKind::Sphere | TestKind::Dome | TestKind::Tht => {
            let started = Instant::now();
            let depth = match spec.kind {
                TestKind::Sphere => Depth::Sphere,
                TestKind::Dome => Depth::Dome,
                _ => Depth::TwoHalfspaces,
            };
            let nested = nested_tests(feat, inst, &spec.source, spec.margin, depth)?;
            let (flags, regions) = match spec.kind {
                TestKind::Sphere => (nested.st, nested.regions[..1].to_vec()),
                TestKind::Dome => (nested.dt, nested.regions[..nested.regions.len().min(2)].to_vec()),
                _ => (nested.tht, nested.regions),
            };
            Ok(ScreenReport::new(flags, started, regions, true))
        }
        TestKind::Irdt { iterations } => irdt_test(feat, inst, iterations, &spec.source, spec.margin),
        _ => heuristic_test(feat, inst, spec),
    }
}

/// Feature-wise disjunction of safe reports for the same instance.
pub fn combine_disjunction(reports: &[ScreenReport]) -> Result<ScreenReport> {
    let first = reports
        .first()
        .ok_or_else(|| ScreenError::InvalidParameter("no reports to combine".into()))?;
    if reports.iter().any(|r| !r.safe) {
        return Err(ScreenError::InvalidParameter(
            "cannot combine unsafe screening reports".into(),
        ));
    }
    let p = first.flags.len();
    let mut flags = vec![false; p];
    let mut regions = Vec::new();
    let mut time = Duration::ZERO;
    for r in reports {
        if r.flags.len() != p {
            return Err(ScreenError::DimensionMismatch {
                expected: p,
                got: r.flags.len(),
            });
        }
        for (f, &v) in flags.iter_mut().zip(&r.flags) {
            *f |= v;
        }
        regions.extend(r.regions.iter().cloned());
        time += r.screen_time;
    }
    Ok(ScreenReport {
        partition: Partition::from_flags(&flags),
        flags,
        screen_time: time,
        regions,
        safe: true,
    })
}

/// `lower + margin < rho < upper - margin` (lasso) or `rho < upper - margin` (nonneg).
#[inline]
pub(crate) fn inside<T: Scalar>(lasso: bool, rho: T, lower: T, upper: T, margin: T) -> bool {
    rho < upper - margin && (!lasso || lower + margin < rho)
}
