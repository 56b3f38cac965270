//! Instance generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use lasso_screen::bench::reference_solution;
use lasso_screen::{Dictionary64, Instance64, ProblemKind, Solution64, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn unit(v: Vec<f64>) -> Vec<f64> {
    let s = norm(&v);
    v.into_iter().map(|x| x / s).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn tight_solver() -> SolverConfig {
    SolverConfig::default().with_gap_tol(1e-12)
}

/// One random screening problem.
pub struct Case {
    pub dict: Dictionary64,
    pub y: Vec<f64>,
    pub kind: ProblemKind,
    pub ratio: f64,
    pub label: String,
}

impl Case {
    pub fn instance(&self) -> Instance64 {
        Instance64::with_ratio(&self.dict, self.y.clone(), self.ratio, self.kind).unwrap()
    }
}

/// Random instance: `n ∈ [10, 50]`, `p ∈ [50, 500]`, Gaussian or uniform entries, a third
/// of them with unnormalized columns, ratio in `[0.05, 0.95]`, either problem kind.
pub fn random_case(seed: u64) -> Case {
    let mut r = rng(seed);
    let n = r.random_range(10..=50);
    let p = r.random_range(50..=500);
    let uniform = r.random_bool(0.5);
    let unnormalized = r.random_range(0..3) == 0;
    let kind = if r.random_bool(0.5) {
        ProblemKind::Lasso
    } else {
        ProblemKind::NonNegLasso
    };
    let ratio = r.random_range(0.05..=0.95);
    let mut cols = Vec::with_capacity(p);
    for _ in 0..p {
        let c: Vec<f64> = if uniform {
            (0..n).map(|_| r.random::<f64>()).collect()
        } else {
            gaussian(&mut r, n)
        };
        let scale = if unnormalized { r.random_range(0.3..3.0) } else { 1.0 };
        cols.push(unit(c).into_iter().map(|x| x * scale).collect::<Vec<_>>());
    }
    let y = if uniform {
        unit((0..n).map(|_| r.random::<f64>()).collect())
    } else {
        unit(gaussian(&mut r, n))
    };
    Case {
        dict: Dictionary64::from_columns(&cols).unwrap(),
        y,
        kind,
        ratio,
        label: format!(
            "seed={seed} n={n} p={p} {} {}{} ratio={ratio:.3}",
            kind.name(),
            if uniform { "uniform" } else { "gaussian" },
            if unnormalized { " unnormalized" } else { "" }
        ),
    }
}

pub fn reference(case: &Case, inst: &Instance64) -> Solution64 {
    reference_solution(&case.dict, inst, &tight_solver()).unwrap()
}

/// Rejected features that are active at the reference optimum: nonzero weight or a dual
/// constraint that is tight.
pub fn active_rejections(case: &Case, flags: &[bool], reference: &Solution64) -> Vec<usize> {
    let corr = case.dict.correlate(&reference.theta);
    flags
        .iter()
        .enumerate()
        .filter(|&(i, &f)| f && (reference.w[i] != 0.0 || case.kind.pool_value(corr[i]) >= 1.0 - 1e-9))
        .map(|(i, _)| i)
        .collect()
}

pub fn relative_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Maximum of `bᵀθ` over `{‖θ − q‖ ≤ r, nᵢᵀθ ≤ cᵢ}` by enumerating active sets.
///
/// For each subset of halfspaces taken as equalities, the maximizer of a linear function
/// on the sphere cut by those hyperplanes is explicit. The global maximizer is the best
/// of these candidates that satisfies every constraint.
pub fn support_oracle(q: &[f64], r: f64, hs: &[(Vec<f64>, f64)], b: &[f64]) -> Option<f64> {
    let m = hs.len();
    let mut best: Option<f64> = None;
    for mask in 0..(1usize << m) {
        let act: Vec<&(Vec<f64>, f64)> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| &hs[i]).collect();
        // Project q onto the affine set and b onto the orthogonal complement of the normals.
        let (center, bperp) = match act.len() {
            0 => (q.to_vec(), b.to_vec()),
            1 => {
                let (nv, c) = act[0];
                let s = (dot(nv, q) - c) / dot(nv, nv);
                let t = dot(nv, b) / dot(nv, nv);
                (
                    q.iter().zip(nv).map(|(x, n)| x - s * n).collect(),
                    b.iter().zip(nv).map(|(x, n)| x - t * n).collect(),
                )
            }
            _ => {
                let (n1, c1) = act[0];
                let (n2, c2) = act[1];
                let (g11, g12, g22) = (dot(n1, n1), dot(n1, n2), dot(n2, n2));
                let det = g11 * g22 - g12 * g12;
                if det.abs() < 1e-12 {
                    continue;
                }
                let solve = |u1: f64, u2: f64| ((g22 * u1 - g12 * u2) / det, (g11 * u2 - g12 * u1) / det);
                let (a1, a2) = solve(dot(n1, q) - c1, dot(n2, q) - c2);
                let (e1, e2) = solve(dot(n1, b), dot(n2, b));
                (
                    (0..q.len()).map(|k| q[k] - a1 * n1[k] - a2 * n2[k]).collect(),
                    (0..q.len()).map(|k| b[k] - e1 * n1[k] - e2 * n2[k]).collect(),
                )
            }
        };
        let d2: f64 = center.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum();
        if d2 > r * r * (1.0 + 1e-12) + 1e-300 {
            continue;
        }
        let rs = (r * r - d2).max(0.0).sqrt();
        let bn = norm(&bperp);
        let theta: Vec<f64> = if bn > 1e-14 * (1.0 + norm(b)) {
            center.iter().zip(&bperp).map(|(c, v)| c + rs * v / bn).collect()
        } else {
            center
        };
        let feasible = hs
            .iter()
            .all(|(nv, c)| dot(nv, &theta) <= c + 1e-9 * (1.0 + c.abs() + r));
        if feasible {
            let v = dot(b, &theta);
            best = Some(best.map_or(v, |x: f64| x.max(v)));
        }
    }
    best
}

/// Uniform random point of the ball, kept only if it satisfies the halfspaces.
pub fn sample_region(rng: &mut ChaCha8Rng, q: &[f64], r: f64, hs: &[(Vec<f64>, f64)]) -> Option<Vec<f64>> {
    let d = q.len();
    let dir = unit(gaussian(rng, d));
    let rad = r * rng.random::<f64>().powf(1.0 / d as f64);
    let theta: Vec<f64> = q.iter().zip(&dir).map(|(c, u)| c + rad * u).collect();
    hs.iter().all(|(nv, c)| dot(nv, &theta) <= *c).then_some(theta)
}

/// Random point of the ball's boundary sphere, kept only if it satisfies the halfspaces.
pub fn sample_boundary(rng: &mut ChaCha8Rng, q: &[f64], r: f64, hs: &[(Vec<f64>, f64)]) -> Option<Vec<f64>> {
    let dir = unit(gaussian(rng, q.len()));
    let theta: Vec<f64> = q.iter().zip(&dir).map(|(c, u)| c + r * u).collect();
    hs.iter().all(|(nv, c)| dot(nv, &theta) <= *c).then_some(theta)
}

/// `B = [e₁, e₂, (√2/2, √2/2)]`, `y = e₁`; `λ_max = 1`.
pub fn tiny() -> (Dictionary64, Vec<f64>) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let dict = Dictionary64::from_columns(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![h, h]]).unwrap();
    (dict, vec![1.0, 0.0])
}

/// Largest violation of the optimality conditions `b_iᵀ(y - Bw) = λ·sign(w_i)` on the
/// support and `f(b_iᵀ(y - Bw)) ≤ λ` off it, relative to `λ`.
pub fn kkt_violation(dict: &Dictionary64, y: &[f64], lambda: f64, kind: ProblemKind, w: &[f64]) -> f64 {
    let bw = dict.combine(w);
    let res: Vec<f64> = y.iter().zip(&bw).map(|(a, b)| a - b).collect();
    let c = dict.correlate(&res);
    let mut worst: f64 = 0.0;
    for i in 0..w.len() {
        let v = if w[i] != 0.0 {
            if kind == ProblemKind::NonNegLasso && w[i] < 0.0 {
                f64::INFINITY
            } else {
                (c[i] - lambda * w[i].signum()).abs()
            }
        } else {
            (kind.pool_value(c[i]) - lambda).max(0.0)
        };
        worst = worst.max(v / lambda);
    }
    worst
}
