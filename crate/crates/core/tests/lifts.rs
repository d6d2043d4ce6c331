mod common;

use common::{random_instance, random_vec, rng};
use proptest::prelude::*;
use rand::Rng;
use robqp_core::gap_example::build_gap_example;
use robqp_core::homogenization::{build_w_pencil, eval_homog, homogenize, Bound};
use robqp_core::model::constraint_at;
use robqp_core::Corner;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn corner_lifts_homogenize_the_shifted_constraint(
        seed in any::<u64>(),
        n in 1usize..5,
        t in prop_oneof![-3.0f64..-0.1, 0.1f64..3.0],
    ) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, n, true);
        let gamma = r.random_range(-2.0..2.0);
        let hs = homogenize(&inst, gamma).unwrap();
        let x = random_vec(&mut r, n, 3.0);
        let xt: Vec<f64> = x.iter().map(|v| v / t).collect();
        let con = &inst.constraint;
        for corner in Corner::ALL {
            let (mu, delta) = con.corner_params(corner);
            let g = constraint_at(con, mu, delta).unwrap().eval(&xt).unwrap();
            for (bound, level) in [(Bound::Upper, con.upper), (Bound::Lower, con.lower.as_f64())] {
                let lifted = eval_homog(hs.corner_lift(corner, bound).unwrap(), &x, t).unwrap();
                let expected = t * t * (g - level);
                prop_assert!((lifted - expected).abs() <= 1e-10 * (1.0 + expected.abs()));
            }
        }
    }

    #[test]
    fn objective_lift_adds_gamma(seed in any::<u64>(), n in 1usize..6) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, n, false);
        let gamma = r.random_range(-5.0..5.0);
        let hs = homogenize(&inst, gamma).unwrap();
        let x = random_vec(&mut r, n, 3.0);
        let f = inst.objective_value(&x).unwrap();
        let h = eval_homog(&hs.h0, &x, 1.0).unwrap();
        prop_assert!((h - f - gamma).abs() <= 1e-12 * (1.0 + f.abs() + gamma.abs()));
    }
}


#[test]
fn pencil_ends_match_diagonal_corner_lifts() {
    for n in 5..=8 {
        let b = build_gap_example(n).unwrap();
        let con = &b.instance.constraint;
        let hs = homogenize(&b.instance, b.gamma).unwrap();
        let p = build_w_pencil(con, con.upper).unwrap();
        assert_eq!(p.at(con.mu.lo).max_abs_diff(&hs.corner_beta[0][0]).unwrap(), 0.0);
        assert_eq!(p.at(con.mu.hi).max_abs_diff(&hs.corner_beta[1][1]).unwrap(), 0.0);
    }
}
