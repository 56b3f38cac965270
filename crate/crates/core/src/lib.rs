//! Safe screening tests for the lasso and the nonnegative lasso.

pub mod bench;
pub mod dictionary;
pub mod error;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod problem;
pub mod scalar;
pub mod screening;
pub mod sequential;
pub mod solver;

pub use dictionary::{Dictionary, FeatureAccess};
pub use error::{Result, ScreenError};
pub use problem::{
    compute_lambda_max, dual_from_primal, duality_gap, recover_primal, rescale_instance,
    subsample, upsample, Instance, LambdaMax, Partition, ProblemKind, Recovery, Solution,
};
pub use scalar::Scalar;
pub use geometry::{Dome, HalfSpace, M2Branch, Region2H, Sphere};
pub use screening::{
    combine_disjunction, screen, BoundSource, ScreenReport, TestKind, TestSpec,
};
pub use sequential::{dass_solve, sequential_solve, DassConfig, SequentialStep, SequentialTrace};
pub use solver::{polish, solve_lasso, solve_screened, ScreenedMetrics, SolverConfig};

pub type Dictionary64 = Dictionary<f64>;
pub type Instance64 = Instance<f64>;
pub type Solution64 = Solution<f64>;
pub type Sphere64 = Sphere<f64>;
pub type HalfSpace64 = HalfSpace<f64>;
pub type Dome64 = Dome<f64>;
pub type Region2H64 = Region2H<f64>;
pub type TestSpec64 = TestSpec<f64>;

pub type Dictionary32 = Dictionary<f32>;
pub type Instance32 = Instance<f32>;
pub type Solution32 = Solution<f32>;
pub type Sphere32 = Sphere<f32>;
pub type HalfSpace32 = HalfSpace<f32>;
pub type Dome32 = Dome<f32>;
pub type Region2H32 = Region2H<f32>;
pub type TestSpec32 = TestSpec<f32>;
