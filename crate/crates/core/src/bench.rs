//! Synthetic data, experiment orchestration and metrics.

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dictionary::Dictionary;
use crate::error::{Result, ScreenError};
use crate::io;
use crate::problem::{Instance, ProblemKind, Solution};
use crate::screening::{screen, BoundSource, TestKind, TestSpec, DEFAULT_IRDT_ITERATIONS};
use crate::solver::{polish, solve_lasso, solve_screened, SolverConfig};
use crate::Scalar;

/// The strong sequential rule is fed the solution at `λ₀ = min(λ_max, SSR_PRIOR_FACTOR · λ)`.
pub const SSR_PRIOR_FACTOR: f64 = 1.5;

/// Relative objective mismatch that counts as a failed screened solve.
pub const OBJECTIVE_TOL: f64 = 1.0e-6;

fn unit_uniform<T: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Vec<T> {
    let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| T::lit(x / s)).collect()
}

/// Unit-norm targets with i.i.d. uniform `[0, 1)` entries before normalization.
#[derive(Clone, Debug)]
pub struct RandTargets {
    rng: ChaCha8Rng,
    n: usize,
}

impl RandTargets {
    pub fn next_target<T: Scalar>(&mut self) -> Vec<T> {
        unit_uniform(&mut self.rng, self.n)
    }
}

/// RAND dataset: `p` unit-norm features in `ℝⁿ` with i.i.d. uniform `[0, 1)` entries
/// before normalization, plus a stream of targets drawn the same way. The same seed
/// gives bit-identical output.
pub fn generate_rand<T: Scalar>(p: usize, n: usize, seed: u64) -> Result<(Dictionary<T>, RandTargets)> {
    if p == 0 || n == 0 {
        return Err(ScreenError::InvalidParameter("RAND needs p, n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * p);
    for _ in 0..p {
        data.extend(unit_uniform::<T>(&mut rng, n));
    }
    let mut targets = ChaCha8Rng::seed_from_u64(seed);
    targets.set_stream(1);
    Ok((
        Dictionary::from_column_major(n, p, data)?,
        RandTargets { rng: targets, n },
    ))
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let m = xs.len();
    if m == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / m as f64;
    if m == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1) as f64;
    (mean, (var / m as f64).sqrt())
}

pub fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

/// Mean and standard error of `λ_max` over `targets` RAND targets.
pub fn rand_lambda_max_stats(p: usize, n: usize, seed: u64, targets: usize) -> Result<(f64, f64)> {
    let (dict, mut gen) = generate_rand::<f64>(p, n, seed)?;
    let mut vals = Vec::with_capacity(targets);
    for _ in 0..targets {
        let y = gen.next_target::<f64>();
        vals.push(crate::problem::compute_lambda_max(&dict, &y, ProblemKind::Lasso)?.value);
    }
    Ok(mean_stderr(&vals))
}

/// A test as named in experiment configs: `st`, `dt`, `tht`, `irdt[:s]`, `sr`, `ssr`,
/// `sis[:gamma]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestName(pub TestKind);

impl FromStr for TestName {
    type Err = ScreenError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h.to_string(), Some(a.to_string())),
            None => (s.clone(), None),
        };
        let bad = || ScreenError::InvalidParameter(format!("unknown test {s:?}"));
        let kind = match (head.as_str(), arg) {
            ("st", None) => TestKind::Sphere,
            ("dt", None) => TestKind::Dome,
            ("tht", None) => TestKind::Tht,
            ("irdt", a) => TestKind::Irdt {
                iterations: a.map_or(Ok(DEFAULT_IRDT_ITERATIONS), |a| a.parse().map_err(|_| bad()))?,
            },
            ("sr" | "strong", None) => TestKind::StrongRule,
            ("ssr", None) => TestKind::StrongSequentialRule,
            ("sis", a) => TestKind::Sis {
                gamma: a.map_or(Ok(0.5), |a| a.parse().map_err(|_| bad()))?,
            },
            _ => return Err(bad()),
        };
        Ok(TestName(kind))
    }
}

impl fmt::Display for TestName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            TestKind::Irdt { iterations } => write!(f, "IRDT{iterations}"),
            TestKind::Sis { gamma } => write!(f, "SIS{gamma}"),
            k => f.write_str(k.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Dataset {
    RandUniform { p: usize, n: usize, seed: u64 },
    /// Dictionary file and a matrix whose columns are the targets.
    FromFiles { dict: PathBuf, targets: PathBuf },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: Dataset,
    pub kind: ProblemKind,
    pub tests: Vec<TestName>,
    pub lambda_ratios: Vec<f64>,
    pub trials: usize,
    pub solver: SolverConfig,
    /// Timing repeats; speedups use the median.
    pub repeats: usize,
    /// Also run sphere, dome and two-hyperplane tests on the sphere through the
    /// computed dual optimum.
    pub oracle: bool,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: Dataset::RandUniform {
                p: 2000,
                n: 28,
                seed: 1,
            },
            kind: ProblemKind::Lasso,
            tests: vec![
                TestName(TestKind::Sphere),
                TestName(TestKind::Dome),
                TestName(TestKind::Tht),
            ],
            lambda_ratios: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            trials: 64,
            solver: SolverConfig::default(),
            repeats: 3,
            oracle: false,
            output: None,
        }
    }
}

fn parse_list<V: FromStr>(key: &str, v: &str) -> Result<Vec<V>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| ScreenError::InvalidParameter(format!("{key}: cannot parse {s:?}")))
        })
        .collect()
}

fn parse_one<V: FromStr>(key: &str, v: &str) -> Result<V> {
    v.trim()
        .parse()
        .map_err(|_| ScreenError::InvalidParameter(format!("{key}: cannot parse {v:?}")))
}

impl ExperimentConfig {
    /// Parses `key = value` lines; `#` starts a comment. Relative paths are resolved
    /// against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        let (mut p, mut n, mut seed) = (2000usize, 28usize, 1u64);
        let mut dataset = "rand".to_string();
        let (mut dict, mut targets) = (None, None);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                ScreenError::InvalidParameter(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "dataset" => dataset = v.to_ascii_lowercase(),
                "p" => p = parse_one(k, v)?,
                "n" => n = parse_one(k, v)?,
                "seed" => seed = parse_one(k, v)?,
                "dict" => dict = Some(base.join(v)),
                "targets" => targets = Some(base.join(v)),
                "kind" => {
                    cfg.kind = match v {
                        "lasso" => ProblemKind::Lasso,
                        "nonneg" => ProblemKind::NonNegLasso,
                        _ => return Err(ScreenError::InvalidParameter(format!("unknown kind {v:?}"))),
                    }
                }
                "tests" => cfg.tests = parse_list(k, v)?,
                "ratios" | "lambda_ratios" => cfg.lambda_ratios = parse_list(k, v)?,
                "trials" => cfg.trials = parse_one(k, v)?,
                "gap_tol" => cfg.solver.gap_tol = parse_one(k, v)?,
                "max_iters" => cfg.solver.max_iters = parse_one(k, v)?,
                "repeats" => cfg.repeats = parse_one(k, v)?,
                "oracle" => cfg.oracle = parse_one(k, v)?,
                "output" => cfg.output = Some(base.join(v)),
                _ => return Err(ScreenError::InvalidParameter(format!("unknown key {k:?}"))),
            }
        }
        cfg.dataset = match dataset.as_str() {
            "rand" => Dataset::RandUniform { p, n, seed },
            "files" => Dataset::FromFiles {
                dict: dict.ok_or_else(|| ScreenError::InvalidParameter("files dataset needs dict".into()))?,
                targets: targets
                    .ok_or_else(|| ScreenError::InvalidParameter("files dataset needs targets".into()))?,
            },
            other => return Err(ScreenError::InvalidParameter(format!("unknown dataset {other:?}"))),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.repeats == 0 || self.tests.is_empty() {
            return Err(ScreenError::InvalidParameter(
                "experiment needs trials >= 1, repeats >= 1 and at least one test".into(),
            ));
        }
        if self.lambda_ratios.is_empty() || self.lambda_ratios.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
            return Err(ScreenError::InvalidParameter(
                "lambda ratios must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Aggregate over the trials of one `(test, ratio)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub test: String,
    pub lambda_ratio: f64,
    pub rejection_mean: f64,
    pub rejection_stderr: f64,
    pub speedup_mean: f64,
    pub speedup_stderr: f64,
    /// Trials where the test rejected a feature with nonzero optimal weight or the
    /// screened solve did not reproduce the optimal objective.
    pub safety_violations: usize,
}

pub const METRICS_HEADER: &str =
    "test,lambda_ratio,rejection_mean,rejection_stderr,speedup_mean,speedup_stderr,safety_violations";

pub fn write_metrics<W: Write>(mut out: W, rows: &[MetricsRow]) -> Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{:.6},{}",
            r.test,
            r.lambda_ratio,
            r.rejection_mean,
            r.rejection_stderr,
            r.speedup_mean,
            r.speedup_stderr,
            r.safety_violations
        )?;
    }
    Ok(())
}

/// Reference solution of an instance: coordinate descent, refined by an exact solve on
/// its support whenever that certifies.
pub fn reference_solution(dict: &Dictionary<f64>, inst: &Instance<f64>, cfg: &SolverConfig) -> Result<Solution<f64>> {
    let sol = solve_lasso(dict, inst, cfg)?;
    Ok(polish(dict, inst, &sol).unwrap_or(sol))
}

/// Features rejected by `flags` that carry nonzero weight in `reference`.
pub fn false_rejections(flags: &[bool], reference: &Solution<f64>) -> Vec<usize> {
    flags
        .iter()
        .enumerate()
        .filter(|&(i, &f)| f && reference.w[i] != 0.0)
        .map(|(i, _)| i)
        .collect()
}

struct Cell {
    name: String,
    ratio: f64,
    rejection: Vec<f64>,
    speedup: Vec<f64>,
    violations: usize,
}

fn spec_for(
    kind: TestKind,
    oracle: Option<&Solution<f64>>,
    prior: Option<&(f64, Solution<f64>)>,
) -> TestSpec<f64> {
    let spec = TestSpec::new(kind);
    if let Some(sol) = oracle {
        return spec.with_source(BoundSource::FeasiblePoint(sol.theta.clone()));
    }
    match (kind, prior) {
        (TestKind::StrongSequentialRule, Some((l0, s0))) => spec.with_source(BoundSource::DualSolution {
            lambda0: *l0,
            theta0: s0.theta.clone(),
            gap: s0.gap,
        }),
        _ => spec,
    }
}

fn time_it<R>(repeats: usize, mut f: impl FnMut() -> Result<R>) -> Result<(R, f64)> {
    let mut times = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats {
        let t = Instant::now();
        last = Some(f()?);
        times.push(t.elapsed().as_secs_f64());
    }
    Ok((last.expect("repeats >= 1"), median(&mut times)))
}

/// Runs every `(trial, test, ratio)` combination and aggregates the results. Rows are
/// ordered by test (as configured, oracle variants last) and then by ratio.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<MetricsRow>> {
    cfg.validate()?;
    let (dict, targets): (Dictionary<f64>, Vec<Vec<f64>>) = match &cfg.dataset {
        Dataset::RandUniform { p, n, seed } => {
            let (d, mut gen) = generate_rand(*p, *n, *seed)?;
            let t = (0..cfg.trials).map(|_| gen.next_target()).collect();
            (d, t)
        }
        Dataset::FromFiles { dict, targets } => {
            let d: Dictionary<f64> = io::read_dictionary(dict)?;
            let m = io::read_matrix(targets)?;
            if m.rows != d.dim() {
                return Err(ScreenError::DimensionMismatch {
                    expected: d.dim(),
                    got: m.rows,
                });
            }
            if m.cols < cfg.trials {
                return Err(ScreenError::InvalidParameter(format!(
                    "{} trials requested but the targets file has {} columns",
                    cfg.trials, m.cols
                )));
            }
            let t = m.data.chunks_exact(m.rows).take(cfg.trials).map(<[f64]>::to_vec).collect();
            (d, t)
        }
    };

    let mut variants: Vec<(String, TestKind, bool)> =
        cfg.tests.iter().map(|t| (t.to_string(), t.0, false)).collect();
    if cfg.oracle {
        for t in &cfg.tests {
            if matches!(t.0, TestKind::Sphere | TestKind::Dome | TestKind::Tht) {
                variants.push((format!("{t}-oracle"), t.0, true));
            }
        }
    }
    let mut cells: Vec<Cell> = Vec::new();
    for (name, _, _) in &variants {
        for &ratio in &cfg.lambda_ratios {
            cells.push(Cell {
                name: name.clone(),
                ratio,
                rejection: Vec::new(),
                speedup: Vec::new(),
                violations: 0,
            });
        }
    }
    let nr = cfg.lambda_ratios.len();

    for y in &targets {
        for (ri, &ratio) in cfg.lambda_ratios.iter().enumerate() {
            let inst = Instance::with_ratio(&dict, y.clone(), ratio, cfg.kind)?;
            let (reference, t_full) = time_it(cfg.repeats, || solve_lasso(&dict, &inst, &cfg.solver))?;
            let reference = polish(&dict, &inst, &reference).unwrap_or(reference);
            let needs_prior = variants.iter().any(|v| v.1 == TestKind::StrongSequentialRule);
            let prior = if needs_prior {
                let l0 = (SSR_PRIOR_FACTOR * inst.lambda()).min(inst.lambda_max());
                if l0 > inst.lambda() {
                    Some((l0, solve_lasso(&dict, &inst.at_lambda(l0)?, &cfg.solver)?))
                } else {
                    None
                }
            } else {
                None
            };
            for (vi, (_, kind, oracle)) in variants.iter().enumerate() {
                let cell = &mut cells[vi * nr + ri];
                if *kind == TestKind::StrongSequentialRule && prior.is_none() {
                    continue;
                }
                let spec = spec_for(*kind, oracle.then_some(&reference), prior.as_ref());
                let run = || -> Result<(Vec<bool>, Option<Solution<f64>>, Duration)> {
                    let report = screen(&dict, &inst, &spec)?;
                    match solve_screened(&dict, &inst, &report, &cfg.solver) {
                        Ok((s, m)) => Ok((report.flags, Some(s), m.screen_time + m.solve_time)),
                        Err(ScreenError::SafetyViolation { .. }) => Ok((report.flags, None, Duration::ZERO)),
                        Err(e) => Err(e),
                    }
                };
                let mut times = Vec::with_capacity(cfg.repeats);
                let mut last = None;
                for _ in 0..cfg.repeats {
                    let out = run()?;
                    times.push(out.2.as_secs_f64());
                    last = Some(out);
                }
                let (flags, sol, _) = last.expect("repeats >= 1");
                let p = flags.len() as f64;
                cell.rejection.push(flags.iter().filter(|&&f| f).count() as f64 / p);
                let objective_ok = sol.as_ref().is_some_and(|s| {
                    (s.primal - reference.primal).abs() <= OBJECTIVE_TOL * reference.primal.abs().max(1e-300)
                });
                if !objective_ok || !false_rejections(&flags, &reference).is_empty() {
                    cell.violations += 1;
                }
                if sol.is_some() {
                    let t = median(&mut times);
                    if t > 0.0 {
                        cell.speedup.push(t_full / t);
                    }
                }
            }
        }
    }

    let rows: Vec<MetricsRow> = cells
        .into_iter()
        .map(|c| {
            let (rm, rs) = mean_stderr(&c.rejection);
            let (sm, ss) = mean_stderr(&c.speedup);
            MetricsRow {
                test: c.name,
                lambda_ratio: c.ratio,
                rejection_mean: rm,
                rejection_stderr: rs,
                speedup_mean: sm,
                speedup_stderr: ss,
                safety_violations: c.violations,
            }
        })
        .collect();
    if let Some(path) = &cfg.output {
        write_metrics(File::create(path)?, &rows)?;
    }
    Ok(rows)
}

/// Settings for the search for false rejections by the unsafe rules.
///
/// Instances use Gaussian features sharing one common factor, `b = √(1-ρ)·g + √ρ·f`,
/// normalized to unit norm; the correlation `ρ` is drawn per instance. Strongly
/// correlated designs are where the strong rules break down.
#[derive(Clone, Debug, PartialEq)]
pub struct ExhibitConfig {
    pub seed: u64,
    pub max_instances: usize,
    /// Keep going at least this long even after a false rejection was found, so the safe
    /// tests are exercised on a nontrivial ensemble.
    pub min_instances: usize,
    pub n_range: (usize, usize),
    pub p_range: (usize, usize),
    pub correlation_range: (f64, f64),
    /// Ratios are drawn uniformly from this range.
    pub ratio_range: (f64, f64),
    pub solver: SolverConfig,
}

impl Default for ExhibitConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            max_instances: 10_000,
            min_instances: 500,
            n_range: (10, 50),
            p_range: (50, 500),
            correlation_range: (0.0, 0.9),
            ratio_range: (0.05, 0.5),
            solver: SolverConfig::default().with_gap_tol(1e-12),
        }
    }
}

/// One instance of the exhibit ensemble.
pub fn correlated_gaussian(rng: &mut ChaCha8Rng, n: usize, p: usize, rho: f64) -> Result<(Dictionary<f64>, Vec<f64>)> {
    let mut normal = |k: usize| -> Vec<f64> { (0..k).map(|_| StandardNormal.sample(&mut *rng)).collect() };
    let factor = normal(n);
    let (a, c) = ((1.0 - rho).sqrt(), rho.sqrt());
    let mut data = Vec::with_capacity(n * p);
    for _ in 0..p {
        let g = normal(n);
        let col: Vec<f64> = g.iter().zip(&factor).map(|(g, f)| a * g + c * f).collect();
        let s = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        data.extend(col.iter().map(|x| x / s));
    }
    let y = normal(n);
    let s = y.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok((
        Dictionary::from_column_major(n, p, data)?,
        y.iter().map(|x| x / s).collect(),
    ))
}

/// First false rejection found by an unsafe rule.
#[derive(Clone, Debug, PartialEq)]
pub struct FalseRejection {
    pub instance: usize,
    pub test: String,
    pub feature: usize,
    pub ratio: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExhibitReport {
    pub instances: usize,
    /// Instances on which each unsafe rule rejected an active feature.
    pub strong_rule_failures: usize,
    pub strong_sequential_failures: usize,
    pub first: Option<FalseRejection>,
    /// False rejections by ST, DT, THT or IRDT (must be zero).
    pub safe_failures: usize,
}

/// Screens seeded random lasso instances with the strong rules and with the safe tests,
/// comparing every rejection against the reference solution.
pub fn heuristic_exhibit(cfg: &ExhibitConfig) -> Result<ExhibitReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = ExhibitReport {
        instances: 0,
        strong_rule_failures: 0,
        strong_sequential_failures: 0,
        first: None,
        safe_failures: 0,
    };
    let safe = [
        TestKind::Sphere,
        TestKind::Dome,
        TestKind::Tht,
        TestKind::Irdt {
            iterations: DEFAULT_IRDT_ITERATIONS,
        },
    ];
    for k in 0..cfg.max_instances {
        if report.first.is_some() && k >= cfg.min_instances {
            break;
        }
        let n = rng.random_range(cfg.n_range.0..=cfg.n_range.1);
        let p = rng.random_range(cfg.p_range.0..=cfg.p_range.1);
        let rho = rng.random_range(cfg.correlation_range.0..cfg.correlation_range.1);
        let (dict, y) = correlated_gaussian(&mut rng, n, p, rho)?;
        let ratio = rng.random_range(cfg.ratio_range.0..cfg.ratio_range.1);
        let inst = Instance::with_ratio(&dict, y, ratio, ProblemKind::Lasso)?;
        let reference = reference_solution(&dict, &inst, &cfg.solver)?;
        report.instances += 1;

        let l0 = (SSR_PRIOR_FACTOR * inst.lambda()).min(inst.lambda_max());
        let prior = reference_solution(&dict, &inst.at_lambda(l0)?, &cfg.solver)?;
        let unsafe_specs = [
            ("SR", TestSpec::new(TestKind::StrongRule)),
            (
                "SSR",
                TestSpec::new(TestKind::StrongSequentialRule).with_source(BoundSource::DualSolution {
                    lambda0: l0,
                    theta0: prior.theta.clone(),
                    gap: prior.gap,
                }),
            ),
        ];
        for (name, spec) in &unsafe_specs {
            if *name == "SSR" && !(l0 > inst.lambda()) {
                continue;
            }
            let flags = screen(&dict, &inst, spec)?.flags;
            let bad = false_rejections(&flags, &reference);
            if let Some(&i) = bad.first() {
                if *name == "SR" {
                    report.strong_rule_failures += 1;
                } else {
                    report.strong_sequential_failures += 1;
                }
                report.first.get_or_insert(FalseRejection {
                    instance: k,
                    test: name.to_string(),
                    feature: i,
                    ratio,
                    weight: reference.w[i],
                });
            }
        }
        for kind in safe {
            let flags = screen(&dict, &inst, &TestSpec::new(kind))?.flags;
            if !false_rejections(&flags, &reference).is_empty() {
                report.safe_failures += 1;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rand_is_deterministic_and_normalized() {
        let (a, mut ta) = generate_rand::<f64>(50, 7, 3).unwrap();
        let (b, mut tb) = generate_rand::<f64>(50, 7, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta.next_target::<f64>(), tb.next_target::<f64>());
        assert!(a.norms().iter().all(|v| (v - 1.0).abs() <= 1e-12));
        assert!(a.to_column_major().iter().all(|&v| v >= 0.0));
        let (c, _) = generate_rand::<f64>(50, 7, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn test_names() {
        assert_eq!("tht".parse::<TestName>().unwrap().0, TestKind::Tht);
        assert_eq!("irdt:3".parse::<TestName>().unwrap().0, TestKind::Irdt { iterations: 3 });
        assert_eq!("SIS:0.25".parse::<TestName>().unwrap().0, TestKind::Sis { gamma: 0.25 });
        assert!("foo".parse::<TestName>().is_err());
        assert_eq!(TestName(TestKind::Irdt { iterations: 5 }).to_string(), "IRDT5");
    }

    #[test]
    fn config_parsing() {
        let cfg = ExperimentConfig::parse(
            "# desk run\ndataset = rand\np = 100\nn = 10\nseed = 2\ntests = st, dt,tht\nratios = 0.5,0.9\ntrials = 4\noutput = out.csv\n",
            Path::new("/tmp"),
        )
        .unwrap();
        assert_eq!(cfg.dataset, Dataset::RandUniform { p: 100, n: 10, seed: 2 });
        assert_eq!(cfg.tests.len(), 3);
        assert_eq!(cfg.lambda_ratios, vec![0.5, 0.9]);
        assert_eq!(cfg.output, Some(PathBuf::from("/tmp/out.csv")));
        assert!(ExperimentConfig::parse("ratios = 1.5\n", Path::new(".")).is_err());
        assert!(ExperimentConfig::parse("bogus = 1\n", Path::new(".")).is_err());
        assert!(ExperimentConfig::parse("dataset = files\n", Path::new(".")).is_err());
    }

    #[test]
    fn stats_helpers() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
