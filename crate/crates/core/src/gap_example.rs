//! A family of instances (one per `n ≥ 5`) with a closed-form solution,
//! used to show that a homogeneous alternative system can be solvable while
//! the robust problem still has a verified optimal point.
//!
//! Data: `A = Iₙ`, `a = b₁ = b₂ = s` (all ones), `B₁ = B₂ = 2Iₙ`,
//! `μ, δ ∈ [−1, 1]`, `α = −∞`, `β = 1`. The objective equals
//! `½‖x + s‖² − n/2`, so the minimizer is the feasible point closest to `−s`:
//! `x̄ = −s/√(2n)`, with the corner `(μ, δ) = (1, −1)` active.
//!
//! The multiplier comes from stationarity at that corner,
//! `(1 + 2λ(1+μ))/√(2n) = 1 + λ(1+δ)`, which gives `λ = (√(2n) − 1)/4`.

use crate::certificates::OneSidedCertificate;
use crate::convexity::{check_scaled_family, verify_pd_combination, ScaledFamilyReport};
use crate::error::{Error, Result};
use crate::homogenization::{build_w_pencil, eval_homog, homogenize, omega_mu_generators};
use crate::linalg::{sym_eigen, SymmetricMatrix, DEFAULT_PSD_TOL};
use crate::model::{
    Interval, LowerBound, QuadraticFunction, RobustInstance, UncertainConstraint,
};

pub const MIN_DIM: usize = 5;

#[derive(Debug, Clone)]
pub struct GapExampleBundle {
    pub instance: RobustInstance,
    pub xbar: Vec<f64>,
    /// `√(n/2) − ¼`, the negated optimal value.
    pub gamma: f64,
    pub expected_cert: OneSidedCertificate,
    pub n: usize,
}

fn check_n(n: usize) -> Result<()> {
    if n < MIN_DIM {
        return Err(Error::invalid(format!("dimension n must be at least {MIN_DIM}, got {n}")));
    }
    Ok(())
}

pub fn gap_gamma(n: usize) -> f64 {
    (n as f64 / 2.0).sqrt() - 0.25
}

pub fn build_gap_example(n: usize) -> Result<GapExampleBundle> {
    check_n(n)?;
    let s = vec![1.0; n];
    let objective = QuadraticFunction::new(SymmetricMatrix::identity(n), s.clone(), 0.0)?;
    let unit = Interval::new(-1.0, 1.0)?;
    let constraint = UncertainConstraint::new(
        SymmetricMatrix::scaled_identity(n, 2.0),
        SymmetricMatrix::scaled_identity(n, 2.0),
        s.clone(),
        s,
        unit,
        unit,
        LowerBound::NegInfinity,
        1.0,
    )?;
    let instance = RobustInstance::new(objective, constraint)?;
    let root = (2.0 * n as f64).sqrt();
    Ok(GapExampleBundle {
        instance,
        xbar: vec![-1.0 / root; n],
        gamma: gap_gamma(n),
        expected_cert: OneSidedCertificate { lambda: (root - 1.0) / 4.0, mu: 1.0, delta: -1.0 },
        n,
    })
}

/// Values of the homogeneous system at `(−s, 1)`: the `H₀` form and the
/// `β`-pencil form (the largest over 11 values of `μ ∈ [−1, 1]`; the pencil
/// value does not depend on `μ`). Both are negative for every `n ≥ 5`.
pub fn gap_witness_values(n: usize) -> Result<(f64, f64)> {
    let b = build_gap_example(n)?;
    let hs = homogenize(&b.instance, b.gamma)?;
    let minus_s = vec![-1.0; n];
    let h0_value = eval_homog(&hs.h0, &minus_s, 1.0)?;
    let pencil = build_w_pencil(&b.instance.constraint, b.instance.constraint.upper)?;
    let mut pencil_value = f64::NEG_INFINITY;
    for mu in b.instance.constraint.mu.grid(11) {
        pencil_value = pencil_value.max(eval_homog(&pencil.at(mu), &minus_s, 1.0)?);
    }
    if !(h0_value < 0.0 && pencil_value < 0.0) {
        return Err(Error::Precondition(format!(
            "expected negative values at (-s, 1), got {h0_value} and {pencil_value}"
        )));
    }
    Ok((h0_value, pencil_value))
}

#[derive(Debug, Clone)]
pub struct ExampleConvexityReport {
    /// `−2H₀ + (−2−2γ)H₁ + H₂` with `H₁`, `H₂` the `(μ₁,δ₁)`, `(μ₂,δ₂)` lifts.
    pub combination_coeffs: [f64; 3],
    pub combination_pd: bool,
    pub combination_eigenvalues: Vec<f64>,
    pub scaled_family: ScaledFamilyReport,
}

impl ExampleConvexityReport {
    pub fn passes(&self) -> bool {
        self.combination_pd && self.scaled_family.passes
    }
}

/// The matrices `H₀`, `H₁`, `H₂` of the positive definite combination.
pub fn gap_pd_triple(n: usize) -> Result<[SymmetricMatrix; 3]> {
    let b = build_gap_example(n)?;
    let hs = homogenize(&b.instance, b.gamma)?;
    Ok([hs.h0, hs.corner_beta[0][0].clone(), hs.corner_beta[1][1].clone()])
}

pub fn verify_example_convexity_hypotheses(n: usize) -> Result<ExampleConvexityReport> {
    let b = build_gap_example(n)?;
    let hs = homogenize(&b.instance, b.gamma)?;
    let triple = [hs.h0.clone(), hs.corner_beta[0][0].clone(), hs.corner_beta[1][1].clone()];
    let coeffs = [-2.0, -2.0 - 2.0 * b.gamma, 1.0];
    let (combination_pd, _) = verify_pd_combination(&triple, &coeffs)?;
    let combination = SymmetricMatrix::linear_combination(&triple, &coeffs)?;
    let combination_eigenvalues = sym_eigen(&combination)?.values;
    let blocks = omega_mu_generators(&hs, false)?
        .iter()
        .map(|g| g.leading_block(n))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExampleConvexityReport {
        combination_coeffs: coeffs,
        combination_pd,
        combination_eigenvalues,
        scaled_family: check_scaled_family(&blocks, DEFAULT_PSD_TOL),
    })
}
