mod common;

use common::*;
use lasso_screen::geometry::make_dome;
use lasso_screen::screening::{
    dome_test, halfspace_from_dual_solution, irdt_test, nested_tests, select_default_sphere,
    select_halfspace_greedy, sphere_from_feasible, sphere_test, tht_test, Depth,
};
use lasso_screen::*;
use proptest::prelude::*;

fn tiny_instance(ratio: f64) -> (Dictionary64, Instance64) {
    let (dict, y) = tiny();
    let inst = Instance64::with_ratio(&dict, y, ratio, ProblemKind::Lasso).unwrap();
    (dict, inst)
}

#[test]
fn sphere_test_examples() {
    let dict = Dictionary64::from_columns(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let inst = Instance64::new(&dict, vec![1.0, 0.0], 0.5, ProblemKind::Lasso).unwrap();
    let s = Sphere::new(vec![2.0, 0.0], 0.5).unwrap();
    assert_eq!(sphere_test(&dict, &inst, &s).unwrap().flags, vec![true, false]);

    // Radius at least 1/‖b‖ never rejects.
    let big = Sphere::new(vec![0.0, 0.0], 1.0).unwrap();
    assert_eq!(sphere_test(&dict, &inst, &big).unwrap().flags, vec![false, false]);
}

#[test]
fn default_sphere_on_tiny() {
    let (dict, inst) = tiny_instance(0.5);
    let s = select_default_sphere(&inst);
    assert_eq!(s.center(), &[2.0, 0.0]);
    assert_eq!(s.radius(), 1.0);
    let rep = screen(&dict, &inst, &TestSpec::new(TestKind::Sphere)).unwrap();
    assert_eq!(rep.flags, vec![false, false, false]);
    // Hand evaluation: μ(b₂) = 0 + 1, μ(b₃) = √2 + 1.
    assert_eq!(s.mu(&dict.column(1)), 1.0);

    let (_, at_max) = tiny_instance(1.0);
    assert_eq!(select_default_sphere(&at_max).radius(), 0.0);
}

#[test]
fn feasible_sphere_is_no_larger_than_default() {
    for seed in 0..20 {
        let case = random_case(100 + seed);
        let inst = case.instance();
        let top: Vec<f64> = case.y.iter().map(|v| v / inst.lambda_max()).collect();
        let s = sphere_from_feasible(&case.dict, &inst, &top).unwrap();
        assert!((s.radius() - select_default_sphere(&inst).radius()).abs() <= 1e-12);
        let sol = reference(&case, &inst);
        let s2 = sphere_from_feasible(&case.dict, &inst, &sol.theta).unwrap();
        assert!(s2.radius() <= s.radius() + 1e-12);
    }
}

#[test]
fn dome_and_tht_on_tiny() {
    let (dict, inst) = tiny_instance(0.5);
    let reference = solve_lasso(&dict, &inst, &tight_solver()).unwrap();
    for kind in [TestKind::Dome, TestKind::Tht, TestKind::Irdt { iterations: 5 }] {
        let rep = screen(&dict, &inst, &TestSpec::new(kind)).unwrap();
        assert_eq!(rep.flags, vec![false, true, true], "{kind:?}");
        assert!(rep.flags.iter().zip(&reference.w).all(|(&f, &w)| !f || w == 0.0));
    }
}

#[test]
fn improper_dome_matches_sphere() {
    let case = random_case(200);
    let inst = case.instance();
    let s = select_default_sphere(&inst);
    let n = unit(case.y.clone());
    let c = dot(&n, s.center()) + s.radius();
    let dome = make_dome(s.clone(), HalfSpace::new(n, c).unwrap()).unwrap();
    assert_eq!(dome.psi(), -1.0);
    assert_eq!(
        dome_test(&case.dict, &inst, &dome).unwrap().flags,
        sphere_test(&case.dict, &inst, &s).unwrap().flags
    );
}

#[test]
fn point_region_at_lambda_max() {
    for seed in 0..10 {
        let case = random_case(300 + seed);
        let inst = Instance64::with_ratio(&case.dict, case.y.clone(), 1.0, case.kind).unwrap();
        let rep = tht_test(&case.dict, &inst, &BoundSource::Default).unwrap();
        let theta = inst.scaled_target();
        let corr = case.dict.correlate(&theta);
        for (i, &f) in rep.flags.iter().enumerate() {
            let v = case.kind.pool_value(corr[i]);
            if v < 1.0 - 1e-9 {
                assert!(f, "{}: feature {i} with value {v} kept", case.label);
            }
            if v >= 1.0 - 1e-15 {
                assert!(!f, "{}: boundary feature {i} rejected", case.label);
            }
        }
    }
}

#[test]
fn irdt_single_iteration_is_the_dome_test() {
    for seed in 0..20 {
        let case = random_case(400 + seed);
        let inst = case.instance();
        let a = irdt_test(&case.dict, &inst, 1, &BoundSource::Default, 0.0).unwrap();
        let b = screen(&case.dict, &inst, &TestSpec::new(TestKind::Dome)).unwrap();
        assert_eq!(a.flags, b.flags, "{}", case.label);
    }
    let (dict, inst) = tiny_instance(0.5);
    assert!(irdt_test(&dict, &inst, 0, &BoundSource::Default, 0.0).is_err());
}

#[test]
fn irdt_on_tiny_stops_after_one_dome() {
    let (dict, inst) = tiny_instance(0.5);
    let rep = irdt_test(&dict, &inst, 5, &BoundSource::Default, 0.0).unwrap();
    assert_eq!(rep.flags, vec![false, true, true]);
    // The first dome is a single point; nothing is left to refine.
    assert_eq!(rep.regions.len(), 2, "{:?}", rep.regions);
}

#[test]
fn greedy_halfspace_selection() {
    let case = random_case(500);
    let inst = case.instance();
    let q = inst.scaled_target();
    let (h, i) = select_halfspace_greedy(&case.dict, &q, &[], case.kind).unwrap();
    let scores: Vec<f64> = (0..case.dict.count())
        .map(|j| {
            let b = case.dict.column(j);
            (case.kind.pool_value(dot(&b, &q)) - 1.0) / norm(&b)
        })
        .collect();
    let best = (0..scores.len()).fold(0, |a, j| if scores[j] > scores[a] { j } else { a });
    assert_eq!(i, best);
    assert!((h.offset() - 1.0 / norm(&case.dict.column(i))).abs() < 1e-12);
    let (_, second) = select_halfspace_greedy(&case.dict, &q, &[i], case.kind).unwrap();
    let runner = (0..scores.len())
        .filter(|&j| j != i)
        .fold(None, |a: Option<usize>, j| match a {
            Some(k) if scores[k] >= scores[j] => Some(k),
            _ => Some(j),
        })
        .unwrap();
    assert_eq!(second, runner);

    // Unit-norm features: the greedy choice is the λ_max feature.
    let (dict, y) = tiny();
    let inst = Instance64::with_ratio(&dict, y, 0.5, ProblemKind::Lasso).unwrap();
    let (_, i) = select_halfspace_greedy(&dict, &inst.scaled_target(), &[], ProblemKind::Lasso).unwrap();
    assert_eq!(i, inst.lambda_max_info().index);
}

#[test]
fn halfspace_from_previous_solution() {
    let (dict, inst) = tiny_instance(0.5);
    let sol = solve_lasso(&dict, &inst, &tight_solver()).unwrap();
    let h = halfspace_from_dual_solution(inst.y(), 0.5, &sol.theta).unwrap();
    assert!((h.normal()[0] - 1.0).abs() < 1e-12 && h.normal()[1].abs() < 1e-12);
    assert!((h.offset() - 1.0).abs() < 1e-12);
    assert!(matches!(
        halfspace_from_dual_solution(inst.y(), 2.0, &[0.5, 0.0]),
        Err(ScreenError::NotApplicable(_))
    ));
}

#[test]
fn strong_rule_is_silent_below_half() {
    for seed in 0..10 {
        let case = random_case(600 + seed);
        let inst = Instance64::with_ratio(&case.dict, case.y.clone(), 0.45, ProblemKind::Lasso).unwrap();
        let rep = screen(&case.dict, &inst, &TestSpec::new(TestKind::StrongRule)).unwrap();
        assert_eq!(rep.rejected_count(), 0);
        assert!(!rep.safe);
    }
}

#[test]
fn strong_sequential_rule_needs_a_prior() {
    let (dict, inst) = tiny_instance(0.3);
    assert!(screen(&dict, &inst, &TestSpec::new(TestKind::StrongSequentialRule)).is_err());
}

#[test]
fn sis_keeps_the_requested_count() {
    let case = random_case(700);
    let inst = case.instance();
    let rep = screen(&case.dict, &inst, &TestSpec::new(TestKind::Sis { gamma: 0.5 })).unwrap();
    let keep = (0.5 * case.dict.dim() as f64).floor() as usize;
    assert_eq!(rep.partition.selected.len(), keep);
    assert!(screen(&case.dict, &inst, &TestSpec::new(TestKind::Sis { gamma: 1.5 })).is_err());
}

#[test]
fn disjunction_combines_safe_reports() {
    let case = random_case(800);
    let inst = case.instance();
    let a = screen(&case.dict, &inst, &TestSpec::new(TestKind::Sphere)).unwrap();
    let b = screen(&case.dict, &inst, &TestSpec::new(TestKind::Irdt { iterations: 3 })).unwrap();
    let c = combine_disjunction(&[a.clone(), b.clone()]).unwrap();
    for i in 0..c.flags.len() {
        assert_eq!(c.flags[i], a.flags[i] || b.flags[i]);
    }
    let h = screen(&case.dict, &inst, &TestSpec::new(TestKind::StrongRule)).unwrap();
    assert!(combine_disjunction(&[a, h]).is_err());
}

#[test]
fn tht_falls_back_with_one_feature() {
    let dict = Dictionary64::from_columns(&[vec![0.6, 0.8]]).unwrap();
    let inst = Instance64::with_ratio(&dict, vec![1.0, 0.0], 0.5, ProblemKind::Lasso).unwrap();
    let rep = screen(&dict, &inst, &TestSpec::new(TestKind::Tht)).unwrap();
    assert_eq!(rep.flags, vec![false]);
}

#[test]
fn single_precision_screening_is_safe() {
    let case = random_case(900);
    let cols: Vec<Vec<f32>> = (0..case.dict.count())
        .map(|j| case.dict.column(j).iter().map(|&v| v as f32).collect())
        .collect();
    let d32 = Dictionary32::from_columns(&cols).unwrap();
    let y32: Vec<f32> = case.y.iter().map(|&v| v as f32).collect();
    let inst = Instance32::with_ratio(&d32, y32, case.ratio as f32, case.kind).unwrap();
    let rep = screen(&d32, &inst, &TestSpec::new(TestKind::Tht)).unwrap();
    let inst64 = case.instance();
    let sol = reference(&case, &inst64);
    assert!(active_rejections(&case, &rep.flags, &sol).is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn rejection_sets_are_nested(seed in 0u64..100_000) {
        let case = random_case(seed);
        let inst = case.instance();
        let nf = nested_tests(&case.dict, &inst, &BoundSource::Default, 0.0, Depth::TwoHalfspaces).unwrap();
        for i in 0..nf.st.len() {
            prop_assert!(!nf.st[i] || nf.dt[i]);
            prop_assert!(!nf.dt[i] || nf.tht[i]);
        }
        let irdt = screen(&case.dict, &inst, &TestSpec::new(TestKind::Irdt { iterations: 5 })).unwrap();
        for i in 0..nf.st.len() {
            prop_assert!(!nf.dt[i] || irdt.flags[i]);
        }
    }

    #[test]
    fn safe_tests_never_reject_active_features(seed in 0u64..100_000) {
        let case = random_case(seed);
        let inst = case.instance();
        let sol = reference(&case, &inst);
        for kind in [TestKind::Sphere, TestKind::Dome, TestKind::Tht, TestKind::Irdt { iterations: 5 }] {
            let rep = screen(&case.dict, &inst, &TestSpec::new(kind)).unwrap();
            prop_assert!(active_rejections(&case, &rep.flags, &sol).is_empty(), "{} {:?}", case.label, kind);
        }
    }

    #[test]
    fn dual_solution_source_is_safe(seed in 0u64..100_000, step in 0.5..0.98f64) {
        let case = random_case(seed);
        let inst = case.instance();
        let l0 = (inst.lambda() / step).min(inst.lambda_max());
        prop_assume!(l0 > inst.lambda());
        let prior = solve_lasso(&case.dict, &inst.at_lambda(l0).unwrap(), &SolverConfig::default()).unwrap();
        let sol = reference(&case, &inst);
        let source = BoundSource::DualSolution { lambda0: l0, theta0: prior.theta.clone(), gap: prior.gap };
        for kind in [TestKind::Sphere, TestKind::Dome, TestKind::Tht, TestKind::Irdt { iterations: 3 }] {
            let rep = screen(&case.dict, &inst, &TestSpec::new(kind).with_source(source.clone())).unwrap();
            prop_assert!(active_rejections(&case, &rep.flags, &sol).is_empty(), "{} {:?}", case.label, kind);
        }
    }
}
