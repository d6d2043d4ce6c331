#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robqp_core::model::{
    constraint_at, corner_values, Interval, LowerBound, QuadraticFunction, RobustInstance,
    UncertainConstraint,
};
use robqp_core::{Corner, SymmetricMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `f = ½a·x² + lin·x`, `lower ≤ ½b·x² ≤ upper` with no uncertainty.
pub fn one_dim(a: f64, lin: f64, b: f64, lower: LowerBound, upper: f64) -> RobustInstance {
    let obj = QuadraticFunction::new(SymmetricMatrix::diagonal(&[a]).unwrap(), vec![lin], 0.0)
        .unwrap();
    let unit = Interval::new(-1.0, 1.0).unwrap();
    let con = UncertainConstraint::new(
        SymmetricMatrix::diagonal(&[b]).unwrap(),
        SymmetricMatrix::zeros(1),
        vec![0.0],
        vec![0.0],
        unit,
        unit,
        lower,
        upper,
    )
    .unwrap();
    RobustInstance::new(obj, con).unwrap()
}

pub struct Reference {
    pub name: &'static str,
    pub instance: RobustInstance,
    pub xbar: Vec<f64>,
    pub optimum: f64,
}

/// The three one-dimensional instances with hand-derived optima.
pub fn references() -> Vec<Reference> {
    vec![
        Reference {
            name: "quarter",
            instance: one_dim(1.0, 1.0, 2.0, LowerBound::NegInfinity, 0.25),
            xbar: vec![-0.5],
            optimum: -0.375,
        },
        Reference {
            name: "band",
            instance: one_dim(1.0, 0.0, 2.0, LowerBound::Finite(1.0), 4.0),
            xbar: vec![1.0],
            optimum: 0.5,
        },
        Reference {
            name: "interior",
            instance: one_dim(2.0, 0.0, 2.0, LowerBound::Finite(-1.0), 2.0),
            xbar: vec![0.0],
            optimum: 0.0,
        },
    ]
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-r..=r)).collect()
}

pub fn random_sym(rng: &mut ChaCha8Rng, n: usize, r: f64) -> SymmetricMatrix {
    let mut m = SymmetricMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            m.set(i, j, rng.random_range(-r..=r));
        }
    }
    m
}

/// `GᵀG + shift·I`, positive definite for `shift > 0`.
pub fn random_pd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> SymmetricMatrix {
    let g: Vec<Vec<f64>> = (0..n).map(|_| random_vec(rng, n, 1.0)).collect();
    let mut m = SymmetricMatrix::scaled_identity(n, shift);
    for i in 0..n {
        for j in i..n {
            let v: f64 = (0..n).map(|k| g[k][i] * g[k][j]).sum();
            m.set(i, j, m.get(i, j) + v);
        }
    }
    m
}

pub fn random_interval(rng: &mut ChaCha8Rng) -> Interval {
    let lo = rng.random_range(-2.0..1.0);
    let w = rng.random_range(0.1..2.0);
    Interval::new(lo, lo + w).unwrap()
}

/// Arbitrary instance with a feasible origin-free band.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, two_sided: bool) -> RobustInstance {
    let obj = QuadraticFunction::new(random_sym(rng, n, 2.0), random_vec(rng, n, 2.0), 0.0)
        .unwrap();
    let beta = rng.random_range(0.5..3.0);
    let lower = if two_sided {
        LowerBound::Finite(beta - rng.random_range(0.5..4.0))
    } else {
        LowerBound::NegInfinity
    };
    let con = UncertainConstraint::new(
        random_sym(rng, n, 2.0),
        random_sym(rng, n, 1.0),
        random_vec(rng, n, 1.0),
        random_vec(rng, n, 1.0),
        random_interval(rng),
        random_interval(rng),
        lower,
        beta,
    )
    .unwrap();
    RobustInstance::new(obj, con).unwrap()
}

pub struct Constructed {
    pub instance: RobustInstance,
    pub xbar: Vec<f64>,
    pub lambda: f64,
    pub corner: Corner,
}

/// An instance where `x̄` is a global minimizer: the upper bound is set so
/// that the worst corner is active at `x̄`, and the objective is chosen so that
/// the Lagrangian with multiplier `λ` at that corner is convex and stationary
/// at `x̄`. Two-sided instances get an inactive lower bound.
pub fn constructed_optimum(rng: &mut ChaCha8Rng, n: usize, two_sided: bool) -> Constructed {
    let xbar = random_vec(rng, n, 1.0);
    let mu = random_interval(rng);
    let delta = random_interval(rng);
    let base = UncertainConstraint::new(
        random_sym(rng, n, 2.0),
        random_sym(rng, n, 1.0),
        random_vec(rng, n, 1.0),
        random_vec(rng, n, 1.0),
        mu,
        delta,
        LowerBound::NegInfinity,
        f64::MAX,
    )
    .unwrap();
    let cv = corner_values(&base, &xbar).unwrap();
    let (k, &g_max) = cv
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let g_min = cv.iter().copied().fold(f64::INFINITY, f64::min);
    let corner = Corner::ALL[k];
    let lower = if two_sided {
        LowerBound::Finite(g_min - rng.random_range(0.5..2.0))
    } else {
        LowerBound::NegInfinity
    };
    let con = UncertainConstraint { lower, upper: g_max, ..base };
    let lambda = rng.random_range(0.2..2.0);
    let (cm, cd) = con.corner_params(corner);
    let g = constraint_at(&con, cm, cd).unwrap();
    // A = P − λB(μ), a = −A x̄ − λ(B(μ)x̄ + b(δ))
    let quad = random_pd(rng, n, 0.5).add_scaled(&g.quad, -lambda).unwrap();
    let grad_g = g.gradient(&xbar).unwrap();
    let ax = quad.mul_vec(&xbar).unwrap();
    let linear: Vec<f64> = ax.iter().zip(&grad_g).map(|(p, q)| -p - lambda * q).collect();
    let obj = QuadraticFunction::new(quad, linear, 0.0).unwrap();
    Constructed { instance: RobustInstance::new(obj, con).unwrap(), xbar, lambda, corner }
}
