//! Certificate types and their exact verification.
//!
//! Three kinds of certificate are checked here:
//!
//! * [`OptimalityCertificate`]: multipliers for the two-sided band, proving
//!   global optimality of a feasible point when stationarity,
//!   complementarity and curvature all hold.
//! * [`OneSidedCertificate`]: the same for `α = −∞`, with a single multiplier.
//! * [`AlternativeCertificate`]: evidence for one of the two mutually
//!   exclusive branches of the robust alternative. Either a strictly feasible
//!   point with `f + γ < 0`, or nonnegative multipliers whose aggregate
//!   quadratic is globally nonnegative.

use crate::error::{Error, Result};
use crate::linalg::{
    convex_quadratic_infimum, min_eigenvalue, norm2, psd_scale, SymmetricMatrix, DEFAULT_PSD_TOL,
};
use crate::model::{
    constraint_at, is_robust_feasible, robust_range, LowerBound, QuadraticFunction, RobustInstance,
    UncertainConstraint,
};

/// Default absolute tolerance on verification residuals.
pub const DEFAULT_VERIFY_TOL: f64 = 1e-8;
/// Default strictness margin for Slater points and branch-(a) witnesses.
pub const DEFAULT_STRICT_MARGIN: f64 = 1e-6;

const COUPLING_TOL: f64 = 1e-12;
const NONNEG_TOL: f64 = 1e-9;

/// Multipliers and rectangle parameters for the two-sided band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalityCertificate {
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu_alpha: f64,
    pub mu_beta: f64,
    pub delta_alpha: f64,
    pub delta_beta: f64,
}

impl OptimalityCertificate {
    /// All-zero multipliers at the rectangle center.
    pub fn zero(con: &UncertainConstraint) -> Self {
        let mu = con.mu.midpoint();
        let delta = con.delta.midpoint();
        Self {
            lambda1: 0.0,
            lambda2: 0.0,
            mu_alpha: con.mu.lo + con.mu.hi - mu,
            mu_beta: mu,
            delta_alpha: delta,
            delta_beta: delta,
        }
    }

    /// Checks signs, rectangle membership and `μ_α + μ_β = μ₁ + μ₂`.
    pub fn validate(&self, con: &UncertainConstraint) -> Result<()> {
        let vals = [
            self.lambda1,
            self.lambda2,
            self.mu_alpha,
            self.mu_beta,
            self.delta_alpha,
            self.delta_beta,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCertificate("non-finite certificate field".into()));
        }
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 {
            return Err(Error::InvalidCertificate("multipliers must be nonnegative".into()));
        }
        for (name, v) in [("mu_alpha", self.mu_alpha), ("mu_beta", self.mu_beta)] {
            if !con.mu.contains(v) {
                return Err(Error::InvalidCertificate(format!("{name}={v} outside mu interval")));
            }
        }
        for (name, v) in [("delta_alpha", self.delta_alpha), ("delta_beta", self.delta_beta)] {
            if !con.delta.contains(v) {
                return Err(Error::InvalidCertificate(format!("{name}={v} outside delta interval")));
            }
        }
        let sum = con.mu.lo + con.mu.hi;
        if (self.mu_alpha + self.mu_beta - sum).abs() > COUPLING_TOL * (1.0 + sum.abs()) {
            return Err(Error::InvalidCertificate(format!(
                "mu_alpha + mu_beta must equal {sum}, got {}",
                self.mu_alpha + self.mu_beta
            )));
        }
        Ok(())
    }
}

/// Single multiplier with its rectangle parameters (`α = −∞`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneSidedCertificate {
    pub lambda: f64,
    pub mu: f64,
    pub delta: f64,
}

impl OneSidedCertificate {
    pub fn validate(&self, con: &UncertainConstraint) -> Result<()> {
        if !(self.lambda.is_finite() && self.mu.is_finite() && self.delta.is_finite()) {
            return Err(Error::InvalidCertificate("non-finite certificate field".into()));
        }
        if self.lambda < 0.0 {
            return Err(Error::InvalidCertificate("lambda must be nonnegative".into()));
        }
        if !con.mu.contains(self.mu) {
            return Err(Error::InvalidCertificate(format!("mu={} outside mu interval", self.mu)));
        }
        if !con.delta.contains(self.delta) {
            return Err(Error::InvalidCertificate(format!(
                "delta={} outside delta interval",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Evidence for one branch of the robust alternative.
#[derive(Debug, Clone, PartialEq)]
pub enum AlternativeCertificate {
    /// Strictly feasible point with `f(x) + γ < 0`.
    WitnessPoint { x: Vec<f64> },
    /// `λ₀ ∈ {0, 1}` plus the remaining multipliers.
    Multipliers { lambda0: f64, inner: OptimalityCertificate },
}

impl AlternativeCertificate {
    /// Multipliers normalized so that `λ₀ ∈ {0, 1}`.
    pub fn multipliers(lambda0: f64, inner: OptimalityCertificate) -> Result<Self> {
        if !(lambda0 >= 0.0) || !lambda0.is_finite() {
            return Err(Error::InvalidCertificate("lambda0 must be a nonnegative real".into()));
        }
        if lambda0 == 0.0 {
            return Ok(Self::Multipliers { lambda0: 0.0, inner });
        }
        let s = 1.0 / lambda0;
        let inner = OptimalityCertificate {
            lambda1: inner.lambda1 * s,
            lambda2: inner.lambda2 * s,
            ..inner
        };
        Ok(Self::Multipliers { lambda0: 1.0, inner })
    }
}

/// Named residuals of a verification.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub stationarity_residual: f64,
    /// Upper-bound and lower-bound complementarity products.
    pub complementarity_residuals: (f64, f64),
    pub min_eigenvalue: f64,
    /// `(β − g_max, g_min − α)`; the second is `+∞` when one-sided.
    pub feasibility_margins: (f64, f64),
    pub passed: bool,
    pub tolerance: f64,
    /// `f(x) + γ` for branch-(a) witnesses.
    pub objective_gap: Option<f64>,
    /// Infimum of the aggregate quadratic for branch-(b) multipliers.
    pub aggregate_infimum: Option<f64>,
    /// The weaker "PSD and stationary point exists" form of branch (b).
    pub psd_and_stationary: Option<bool>,
}

impl VerificationReport {
    fn empty(tol: f64) -> Self {
        Self {
            stationarity_residual: 0.0,
            complementarity_residuals: (0.0, 0.0),
            min_eigenvalue: f64::NAN,
            feasibility_margins: (f64::NAN, f64::NAN),
            passed: false,
            tolerance: tol,
            objective_gap: None,
            aggregate_infimum: None,
            psd_and_stationary: None,
        }
    }

    /// Largest violation among the residuals, with curvature counted only
    /// when negative.
    pub fn max_residual(&self) -> f64 {
        self.stationarity_residual
            .max(self.complementarity_residuals.0.abs())
            .max(self.complementarity_residuals.1.abs())
            .max((-self.min_eigenvalue).max(0.0))
    }
}

/// `h = λ₀(f + γ) + λ₁(g_β − β) + λ₂(α − g_α)`.
pub fn aggregate_quadratic(
    inst: &RobustInstance,
    gamma: f64,
    lambda0: f64,
    cert: &OptimalityCertificate,
) -> Result<QuadraticFunction> {
    let con = &inst.constraint;
    let mut h = inst.objective.clone().with_constant(inst.objective.constant + gamma).scale(lambda0);
    if cert.lambda1 != 0.0 {
        let g_beta = constraint_at(con, cert.mu_beta, cert.delta_beta)?;
        h = h.add_scaled(&g_beta.with_constant(-con.upper), cert.lambda1)?;
    }
    if cert.lambda2 != 0.0 {
        let alpha = con.lower.finite().ok_or_else(|| {
            Error::InvalidCertificate("lambda2 > 0 needs a finite lower bound".into())
        })?;
        let g_alpha = constraint_at(con, cert.mu_alpha, cert.delta_alpha)?;
        h = h.add_scaled(&g_alpha.with_constant(-alpha), -cert.lambda2)?;
    }
    Ok(h)
}

/// Infimum of `q` over `ℝⁿ`, `-∞` when unbounded below.
pub fn quadratic_infimum(q: &QuadraticFunction) -> Result<f64> {
    convex_quadratic_infimum(&q.quad, &q.linear, q.constant, DEFAULT_PSD_TOL)
}

/// `q(x) ≥ 0` for every `x`: curvature PSD, linear term in range, infimum ≥ 0
/// up to `1e-9·(1 + |r|)`.
pub fn global_nonneg(q: &QuadraticFunction) -> Result<bool> {
    Ok(quadratic_infimum(q)? >= -NONNEG_TOL * (1.0 + q.constant.abs()))
}

fn feasibility_precondition(inst: &RobustInstance, xbar: &[f64], tol: f64) -> Result<(f64, f64)> {
    let rep = is_robust_feasible(inst, xbar, tol)?;
    if !rep.feasible {
        return Err(Error::Precondition(format!(
            "point is not robust-feasible (upper margin {}, lower margin {})",
            rep.upper_margin, rep.lower_margin
        )));
    }
    Ok((rep.upper_margin, rep.lower_margin))
}

/// Checks stationarity, complementarity and curvature for a two-sided band.
pub fn verify_optimality_certificate(
    inst: &RobustInstance,
    xbar: &[f64],
    cert: &OptimalityCertificate,
    tol: f64,
) -> Result<VerificationReport> {
    let con = &inst.constraint;
    let alpha = con.lower.finite().ok_or_else(|| {
        Error::Precondition("one-sided instance: use the one-sided verifier".into())
    })?;
    cert.validate(con)?;
    let margins = feasibility_precondition(inst, xbar, tol)?;

    let g_beta = constraint_at(con, cert.mu_beta, cert.delta_beta)?;
    let g_alpha = constraint_at(con, cert.mu_alpha, cert.delta_alpha)?;
    // Lagrangian without constants: f + λ₁ g_β − λ₂ g_α
    let lagr = inst
        .objective
        .add_scaled(&g_beta, cert.lambda1)?
        .add_scaled(&g_alpha, -cert.lambda2)?;
    let stationarity = norm2(&lagr.gradient(xbar)?);
    let comp_beta = cert.lambda1 * (g_beta.eval(xbar)? - con.upper);
    let comp_alpha = cert.lambda2 * (alpha - g_alpha.eval(xbar)?);
    let min_eig = min_eigenvalue(&lagr.quad)?;

    let passed = stationarity <= tol
        && comp_beta.abs() <= tol
        && comp_alpha.abs() <= tol
        && min_eig >= -tol * psd_scale(&lagr.quad);
    Ok(VerificationReport {
        stationarity_residual: stationarity,
        complementarity_residuals: (comp_beta, comp_alpha),
        min_eigenvalue: min_eig,
        feasibility_margins: margins,
        passed,
        ..VerificationReport::empty(tol)
    })
}

/// Checks stationarity, complementarity and curvature when `α = −∞`.
pub fn verify_one_sided_certificate(
    inst: &RobustInstance,
    xbar: &[f64],
    cert: &OneSidedCertificate,
    tol: f64,
) -> Result<VerificationReport> {
    let con = &inst.constraint;
    if con.lower.is_finite() {
        return Err(Error::Precondition(
            "two-sided instance: use the two-sided verifier".into(),
        ));
    }
    cert.validate(con)?;
    let margins = feasibility_precondition(inst, xbar, tol)?;

    let g = constraint_at(con, cert.mu, cert.delta)?;
    let lagr = inst.objective.add_scaled(&g, cert.lambda)?;
    let stationarity = norm2(&lagr.gradient(xbar)?);
    let comp = cert.lambda * (g.eval(xbar)? - con.upper);
    let min_eig = min_eigenvalue(&lagr.quad)?;
    let passed =
        stationarity <= tol && comp.abs() <= tol && min_eig >= -tol * psd_scale(&lagr.quad);
    Ok(VerificationReport {
        stationarity_residual: stationarity,
        complementarity_residuals: (comp, 0.0),
        min_eigenvalue: min_eig,
        feasibility_margins: margins,
        passed,
        ..VerificationReport::empty(tol)
    })
}

/// Checks either branch of the robust alternative for the given `γ`.
///
/// For a witness, `tol` is the strictness margin on every inequality. For
/// multipliers, the aggregate must be globally nonnegative.
pub fn verify_alternative_certificate(
    inst: &RobustInstance,
    gamma: f64,
    cert: &AlternativeCertificate,
    tol: f64,
) -> Result<VerificationReport> {
    let con = &inst.constraint;
    let alpha = con.lower.finite().ok_or_else(|| {
        Error::Precondition("the alternative needs a finite lower bound".into())
    })?;
    if !(tol >= 0.0) {
        return Err(Error::invalid("tolerance must be nonnegative"));
    }
    match cert {
        AlternativeCertificate::WitnessPoint { x } => {
            let value = inst.objective_value(x)? + gamma;
            let (g_min, g_max) = robust_range(con, x)?;
            let margins = (con.upper - g_max, g_min - alpha);
            let passed = value <= -tol && margins.0 >= tol && margins.1 >= tol;
            Ok(VerificationReport {
                feasibility_margins: margins,
                passed,
                objective_gap: Some(value),
                ..VerificationReport::empty(tol)
            })
        }
        AlternativeCertificate::Multipliers { lambda0, inner } => {
            inner.validate(con)?;
            if *lambda0 != 0.0 && *lambda0 != 1.0 {
                return Err(Error::InvalidCertificate(
                    "lambda0 must be normalized to 0 or 1".into(),
                ));
            }
            let nonzero = *lambda0 > 0.0 || inner.lambda1 > 0.0 || inner.lambda2 > 0.0;
            let h = aggregate_quadratic(inst, gamma, *lambda0, inner)?;
            let inf = quadratic_infimum(&h)?;
            let nonneg = inf >= -NONNEG_TOL * (1.0 + h.constant.abs());
            let min_eig = min_eigenvalue(&h.quad)?;
            Ok(VerificationReport {
                min_eigenvalue: min_eig,
                passed: nonzero && nonneg,
                aggregate_infimum: Some(inf),
                psd_and_stationary: Some(inf > f64::NEG_INFINITY),
                ..VerificationReport::empty(tol)
            })
        }
    }
}

/// `x0` lies strictly inside the band, by at least `margin`, for every
/// `(μ, δ)` in the rectangle.
pub fn check_slater(inst: &RobustInstance, x0: &[f64], margin: f64) -> Result<bool> {
    if !(margin > 0.0) {
        return Err(Error::invalid("Slater margin must be positive"));
    }
    let con = &inst.constraint;
    let (g_min, g_max) = robust_range(con, x0)?;
    let lower_ok = match con.lower {
        LowerBound::Finite(a) => a + margin <= g_min,
        LowerBound::NegInfinity => true,
    };
    Ok(lower_ok && g_max <= con.upper - margin)
}

/// The curvature matrix `A + λ₁(B₁+μ_βB₂) − λ₂(B₁+μ_αB₂)`.
pub fn curvature_matrix(inst: &RobustInstance, cert: &OptimalityCertificate) -> SymmetricMatrix {
    let con = &inst.constraint;
    inst.objective
        .quad
        .add_scaled(&con.quad_at(cert.mu_beta), cert.lambda1)
        .and_then(|m| m.add_scaled(&con.quad_at(cert.mu_alpha), -cert.lambda2))
        .expect("instance dimensions are consistent")
}
