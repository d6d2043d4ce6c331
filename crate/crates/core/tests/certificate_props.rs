mod common;

use common::{constructed_optimum, references, rng};
use proptest::prelude::*;
use robqp_core::certificates::{
    aggregate_quadratic, global_nonneg, verify_alternative_certificate,
    verify_one_sided_certificate, verify_optimality_certificate, DEFAULT_VERIFY_TOL,
};
use robqp_core::gap_example::build_gap_example;
use robqp_core::oracle::{sample_implication_check, ImplicationOutcome};
use robqp_core::search::{search_one_sided_certificate, search_optimality_certificate};
use robqp_core::{
    AlternativeCertificate, LowerBound, OptimalityCertificate, RobustInstance, SearchBudget,
    UncertainConstraint,
};

const TOL: f64 = DEFAULT_VERIFY_TOL;

fn as_two_sided(
    inst: &RobustInstance,
    cert: &robqp_core::OneSidedCertificate,
    alpha: f64,
) -> (RobustInstance, OptimalityCertificate) {
    let con = &inst.constraint;
    let two = RobustInstance::new(
        inst.objective.clone(),
        UncertainConstraint { lower: LowerBound::Finite(alpha), ..con.clone() },
    )
    .unwrap();
    let oc = OptimalityCertificate {
        lambda1: cert.lambda,
        lambda2: 0.0,
        mu_beta: cert.mu,
        mu_alpha: (con.mu.lo + con.mu.hi - cert.mu).clamp(con.mu.lo, con.mu.hi),
        delta_beta: cert.delta,
        delta_alpha: con.delta.lo,
    };
    (two, oc)
}

fn assert_no_feasible_improvement(inst: &RobustInstance, xbar: &[f64], box_halfwidth: f64, seed: u64) {
    let gamma = -inst.objective_value(xbar).unwrap();
    match sample_implication_check(inst, gamma + 1e-6, 10_000, seed, box_halfwidth).unwrap() {
        ImplicationOutcome::NoViolation { feasible_tested, .. } => assert!(feasible_tested > 0),
        ImplicationOutcome::Violation { x, value } => panic!("f(x)+gamma = {value} at {x:?}"),
    }
}

#[test]
fn verified_certificates_are_sound_on_the_golden_set() {
    for n in 5..=8 {
        let b = build_gap_example(n).unwrap();
        let rep = verify_one_sided_certificate(&b.instance, &b.xbar, &b.expected_cert, TOL).unwrap();
        assert!(rep.passed);
        assert_no_feasible_improvement(&b.instance, &b.xbar, 0.75, n as u64);
    }
    let budget = SearchBudget::default();
    for rf in references() {
        let passed = if rf.instance.is_one_sided() {
            search_one_sided_certificate(&rf.instance, &rf.xbar, &budget).unwrap().unwrap().1.passed
        } else {
            search_optimality_certificate(&rf.instance, &rf.xbar, &budget).unwrap().unwrap().1.passed
        };
        assert!(passed, "{}", rf.name);
        assert_no_feasible_improvement(&rf.instance, &rf.xbar, 3.0, 7);
    }
}

#[test]
fn constructed_optima_are_sound_and_aggregates_nonnegative() {
    let mut r = rng(31);
    for case in 0..30 {
        let c = constructed_optimum(&mut r, 1 + case % 4, true);
        let cert = search_optimality_certificate(&c.instance, &c.xbar, &SearchBudget {
            mu_grid: 11,
            delta_grid: 11,
            ..SearchBudget::default()
        })
        .unwrap()
        .expect("constructed optimum")
        .0;
        assert_no_feasible_improvement(&c.instance, &c.xbar, 3.0, case as u64);
        let gamma = -c.instance.objective_value(&c.xbar).unwrap();
        let h = aggregate_quadratic(&c.instance, gamma, 1.0, &cert).unwrap();
        assert!(global_nonneg(&h).unwrap(), "case {case}");
        assert!(h.eval(&c.xbar).unwrap() <= 10.0 * TOL);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn one_sided_certificates_verify_two_sided(seed in any::<u64>(), n in 1usize..5) {
        let mut r = rng(seed);
        let c = constructed_optimum(&mut r, n, false);
        let (mu, delta) = c.instance.constraint.corner_params(c.corner);
        let cert = robqp_core::OneSidedCertificate { lambda: c.lambda, mu, delta };
        let rep = verify_one_sided_certificate(&c.instance, &c.xbar, &cert, TOL).unwrap();
        prop_assert!(rep.passed);
        let (two, oc) = as_two_sided(&c.instance, &cert, -1e6);
        let rep2 = verify_optimality_certificate(&two, &c.xbar, &oc, TOL).unwrap();
        prop_assert!(rep2.passed);
    }

    #[test]
    fn multiplier_verification_is_scale_invariant(seed in any::<u64>(), n in 1usize..5, t in 0.01f64..100.0) {
        let mut r = rng(seed);
        let c = constructed_optimum(&mut r, n, true);
        let (mu, delta) = c.instance.constraint.corner_params(c.corner);
        let con = &c.instance.constraint;
        let cert = OptimalityCertificate {
            lambda1: c.lambda,
            lambda2: 0.0,
            mu_beta: mu,
            mu_alpha: (con.mu.lo + con.mu.hi - mu).clamp(con.mu.lo, con.mu.hi),
            delta_beta: delta,
            delta_alpha: con.delta.lo,
        };
        let gamma = -c.instance.objective_value(&c.xbar).unwrap();
        let scaled = OptimalityCertificate { lambda1: t * cert.lambda1, lambda2: t * cert.lambda2, ..cert };
        let base = verify_alternative_certificate(
            &c.instance, gamma, &AlternativeCertificate::multipliers(1.0, cert).unwrap(), TOL,
        ).unwrap();
        let other = verify_alternative_certificate(
            &c.instance, gamma, &AlternativeCertificate::multipliers(t, scaled).unwrap(), TOL,
        ).unwrap();
        prop_assert!(base.passed);
        prop_assert_eq!(base.passed, other.passed);
        let h1 = aggregate_quadratic(&c.instance, gamma, 1.0, &cert).unwrap();
        let ht = aggregate_quadratic(&c.instance, gamma, t, &scaled).unwrap();
        prop_assert_eq!(global_nonneg(&h1).unwrap(), global_nonneg(&ht).unwrap());
    }
}
