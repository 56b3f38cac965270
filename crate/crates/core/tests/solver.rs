mod common;

use approx::assert_abs_diff_eq;
use common::*;
use lasso_screen::solver::solve_lasso_from;
use lasso_screen::*;
use proptest::prelude::*;

#[test]
fn zero_solution_above_lambda_max() {
    let (dict, y) = tiny();
    let inst = Instance64::new(&dict, y.clone(), 1.0, ProblemKind::Lasso).unwrap();
    let sol = solve_lasso(&dict, &inst, &SolverConfig::default()).unwrap();
    assert_eq!(sol.w, vec![0.0; 3]);
    assert_eq!(sol.theta, y);
    assert_eq!(sol.gap, 0.0);
    assert!(sol.converged);
}

#[test]
fn tiny_instance_solution() {
    let (dict, y) = tiny();
    let inst = Instance64::new(&dict, y.clone(), 0.5, ProblemKind::Lasso).unwrap();
    let sol = solve_lasso(&dict, &inst, &tight_solver()).unwrap();
    assert_abs_diff_eq!(sol.w[0], 0.5, epsilon = 1e-8);
    assert_abs_diff_eq!(sol.w[1], 0.0, epsilon = 1e-8);
    assert_abs_diff_eq!(sol.w[2], 0.0, epsilon = 1e-8);
    assert!(kkt_violation(&dict, &y, 0.5, ProblemKind::Lasso, &sol.w) < 1e-6);
}

#[test]
fn orthonormal_dictionary_soft_thresholds() {
    let mut r = rng(40);
    // Orthonormal columns by Gram-Schmidt on Gaussian vectors.
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < 6 {
        let mut v = gaussian(&mut r, 8);
        for c in &cols {
            let a = dot(&v, c);
            v.iter_mut().zip(c).for_each(|(x, y)| *x -= a * y);
        }
        cols.push(unit(v));
    }
    let dict = Dictionary64::from_columns(&cols).unwrap();
    let y = gaussian(&mut r, 8);
    for kind in [ProblemKind::Lasso, ProblemKind::NonNegLasso] {
        let Ok(inst) = Instance64::with_ratio(&dict, y.clone(), 0.4, kind) else {
            continue;
        };
        let sol = solve_lasso(&dict, &inst, &tight_solver()).unwrap();
        for (j, c) in cols.iter().enumerate() {
            let z = dot(c, &y);
            let expected = match kind {
                ProblemKind::Lasso => z.signum() * (z.abs() - inst.lambda()).max(0.0),
                ProblemKind::NonNegLasso => (z - inst.lambda()).max(0.0),
            };
            assert_abs_diff_eq!(sol.w[j], expected, epsilon = 1e-9);
        }
    }
}

#[test]
fn screened_solve_without_rejections_matches_full() {
    let case = random_case(41);
    let inst = case.instance();
    let full = solve_lasso(&case.dict, &inst, &SolverConfig::default()).unwrap();
    let (sol, metrics) = solve_screened(
        &case.dict,
        &inst,
        &screening::ScreenReport::keep_all(case.dict.count()),
        &SolverConfig::default(),
    )
    .unwrap();
    assert_eq!(sol.w, full.w);
    assert_eq!(metrics.rejection_fraction, 0.0);
}

#[test]
fn screened_tiny_instance() {
    let (dict, y) = tiny();
    let inst = Instance64::new(&dict, y, 0.5, ProblemKind::Lasso).unwrap();
    let rep = screen(&dict, &inst, &TestSpec::new(TestKind::Dome)).unwrap();
    assert_eq!(rep.partition.rejected, vec![1, 2]);
    let (sol, _) = solve_screened(&dict, &inst, &rep, &tight_solver()).unwrap();
    assert_abs_diff_eq!(sol.w[0], 0.5, epsilon = 1e-12);
    assert_eq!(&sol.w[1..], &[0.0, 0.0]);
    assert!(sol.gap <= 1e-8);
}

#[test]
fn false_rejection_is_reported() {
    let (dict, y) = tiny();
    let inst = Instance64::new(&dict, y, 0.5, ProblemKind::Lasso).unwrap();
    let mut rep = screen(&dict, &inst, &TestSpec::new(TestKind::Dome)).unwrap();
    rep.flags = vec![true, false, false];
    rep.partition = Partition::from_flags(&rep.flags);
    assert!(matches!(
        solve_screened(&dict, &inst, &rep, &tight_solver()),
        Err(ScreenError::SafetyViolation { .. })
    ));
}

#[test]
fn tht_screened_solves_match_full_solves() {
    let (dict, mut targets) = lasso_screen::bench::generate_rand::<f64>(300, 20, 42).unwrap();
    for _ in 0..64 {
        let y: Vec<f64> = targets.next_target();
        let inst = Instance64::with_ratio(&dict, y, 0.5, ProblemKind::Lasso).unwrap();
        let full = solve_lasso(&dict, &inst, &SolverConfig::default()).unwrap();
        let rep = screen(&dict, &inst, &TestSpec::new(TestKind::Tht)).unwrap();
        let (sol, _) = solve_screened(&dict, &inst, &rep, &SolverConfig::default()).unwrap();
        assert!(relative_diff(sol.primal, full.primal) <= 1e-6);
    }
}

#[test]
fn warm_start_reaches_the_same_optimum() {
    let case = random_case(43);
    let inst = case.instance();
    let cold = solve_lasso(&case.dict, &inst, &tight_solver()).unwrap();
    let prior = solve_lasso(&case.dict, &inst.at_lambda(inst.lambda() * 1.2).unwrap(), &tight_solver()).unwrap();
    let warm = solve_lasso_from(&case.dict, &inst, &tight_solver(), Some(&prior.w)).unwrap();
    assert!(relative_diff(warm.primal, cold.primal) <= 1e-10);
}

#[test]
fn iteration_cap_flags_unconverged() {
    let case = random_case(44);
    let inst = Instance64::with_ratio(&case.dict, case.y.clone(), 0.05, case.kind).unwrap();
    let cfg = SolverConfig {
        max_iters: 1,
        ..SolverConfig::default().with_gap_tol(1e-14)
    };
    let sol = solve_lasso(&case.dict, &inst, &cfg).unwrap();
    assert!(!sol.converged);
    assert!(sol.gap > 0.0);
}

#[test]
fn single_precision_solver() {
    let (d64, _) = tiny();
    let cols: Vec<Vec<f32>> = (0..3).map(|j| d64.column(j).iter().map(|&v| v as f32).collect()).collect();
    let dict = Dictionary32::from_columns(&cols).unwrap();
    let inst = Instance32::new(&dict, vec![1.0, 0.0], 0.5, ProblemKind::Lasso).unwrap();
    let sol = solve_lasso(&dict, &inst, &SolverConfig::for_scalar::<f32>()).unwrap();
    assert!((sol.w[0] - 0.5).abs() < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn certified_solutions_satisfy_kkt(seed in 0u64..100_000) {
        let case = random_case(seed);
        let inst = case.instance();
        let sol = solve_lasso(&case.dict, &inst, &tight_solver()).unwrap();
        prop_assert!(sol.converged);
        prop_assert!(sol.gap <= 1e-12 * sol.primal + 1e-15);
        prop_assert!(sol.gap >= -1e-12);
        let refined = reference(&case, &inst);
        prop_assert!(kkt_violation(&case.dict, &case.y, inst.lambda(), case.kind, &refined.w) < 1e-6);
        if case.kind == ProblemKind::NonNegLasso {
            prop_assert!(sol.w.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn screening_preserves_the_objective(seed in 0u64..100_000) {
        let case = random_case(seed);
        let inst = case.instance();
        let full = solve_lasso(&case.dict, &inst, &tight_solver()).unwrap();
        for kind in [TestKind::Dome, TestKind::Tht, TestKind::Irdt { iterations: 5 }] {
            let rep = screen(&case.dict, &inst, &TestSpec::new(kind)).unwrap();
            let (sol, m) = solve_screened(&case.dict, &inst, &rep, &tight_solver()).unwrap();
            prop_assert!(relative_diff(sol.primal, full.primal) <= 1e-6);
            prop_assert!((m.rejection_fraction - rep.rejection_fraction()).abs() < 1e-15);
        }
    }
}
