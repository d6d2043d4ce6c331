//! Deterministic grid searches for certificates.
//!
//! The multipliers of an optimality certificate are recovered from the
//! stationarity equation by least squares, one cell of the `(μ, δ)` grid at a
//! time. Complementarity and curvature are then checked post hoc by the
//! verifiers in [`crate::certificates`].
//!
//! Grid cells are independent and are evaluated in parallel; every
//! selection is reduced with a total order so results do not depend on
//! scheduling.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::certificates::{
    verify_alternative_certificate, verify_one_sided_certificate,
    verify_optimality_certificate, AlternativeCertificate, OneSidedCertificate,
    OptimalityCertificate, VerificationReport,
};
use crate::error::{check_dim, Error, Result};
use crate::homogenization::lift;
use crate::linalg::{axpy, dot, least_squares_solve, min_eigenvalue, psd_scale, SymmetricMatrix};
use crate::model::{is_robust_feasible, robust_range, Interval, RobustInstance};
use crate::oracle::pattern_descent;

/// Resolution and sampling limits for every search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBudget {
    pub mu_grid: usize,
    pub delta_grid: usize,
    pub sample_count: usize,
    pub seed: u64,
    pub tol: f64,
    /// Half-width of the sampling box for branch-(a) witnesses.
    pub box_halfwidth: f64,
    /// Upper end of the multiplier range scanned for branch (b) with `λ₀ = 1`.
    pub lambda_max: f64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            mu_grid: 101,
            delta_grid: 101,
            sample_count: 100_000,
            seed: 0,
            tol: 1e-8,
            box_halfwidth: 10.0,
            lambda_max: 1e3,
        }
    }
}

impl SearchBudget {
    fn grid(&self, iv: &Interval, k: usize, name: &str) -> Result<Vec<f64>> {
        if k == 1 && !iv.is_degenerate() {
            return Err(Error::invalid(format!(
                "{name} grid needs at least 2 points on a nondegenerate interval"
            )));
        }
        Ok(iv.grid(k))
    }

    fn check(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid("search tolerance must be positive"));
        }
        if !(self.box_halfwidth > 0.0) || !(self.lambda_max > 0.0) {
            return Err(Error::invalid("box half-width and lambda_max must be positive"));
        }
        Ok(())
    }
}

/// Selection key: smaller max residual first, then lexicographic parameters.
fn key_cmp(a: &(f64, Vec<f64>), b: &(f64, Vec<f64>)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| {
        a.1.iter()
            .zip(&b.1)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

fn pick_best<T>(items: impl IntoIterator<Item = ((f64, Vec<f64>), T)>) -> Option<((f64, Vec<f64>), T)> {
    items.into_iter().min_by(|a, b| key_cmp(&a.0, &b.0))
}

/// Nonnegative multipliers solving `Σ λᵢ colᵢ ≈ rhs` on every support
/// subset of the columns; inactive multipliers are pinned to zero.
///
/// With dependent columns the minimal-norm solution on the full support can
/// be negative while a smaller support has a valid one, so all subsets are
/// tried.
fn nonneg_stationary_solutions(cols: &[Vec<f64>], rhs: &[f64], tol: f64) -> Vec<Vec<f64>> {
    let k = cols.len();
    let mut out = Vec::new();
    for mask in (0..(1usize << k)).rev() {
        let support: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let mut lambdas = vec![0.0; k];
        let resid = if support.is_empty() {
            dot(rhs, rhs).sqrt()
        } else {
            let sub: Vec<Vec<f64>> = support.iter().map(|&i| cols[i].clone()).collect();
            let Ok((coef, resid)) = least_squares_solve(&sub, rhs) else { continue };
            if coef.iter().any(|c| *c < 0.0) {
                continue;
            }
            for (&i, c) in support.iter().zip(coef) {
                lambdas[i] = c;
            }
            resid
        };
        if resid <= tol && !out.contains(&lambdas) {
            out.push(lambdas);
        }
    }
    out
}

/// Two-sided certificate search over `(μ_β, δ_β, δ_α)` with
/// `μ_α = μ₁ + μ₂ − μ_β`.
pub fn search_optimality_certificate(
    inst: &RobustInstance,
    xbar: &[f64],
    budget: &SearchBudget,
) -> Result<Option<(OptimalityCertificate, VerificationReport)>> {
    budget.check()?;
    let con = &inst.constraint;
    if !con.lower.is_finite() {
        return Err(Error::Precondition(
            "one-sided instance: use the one-sided search".into(),
        ));
    }
    check_dim(inst.dim(), xbar.len())?;
    let tol = budget.tol;
    if !is_robust_feasible(inst, xbar, tol)?.feasible {
        return Err(Error::Precondition("point is not robust-feasible".into()));
    }
    let mus = budget.grid(&con.mu, budget.mu_grid, "mu")?;
    let deltas = budget.grid(&con.delta, budget.delta_grid, "delta")?;

    // −(A x̄ + a)
    let rhs: Vec<f64> = inst.objective.gradient(xbar)?.iter().map(|v| -v).collect();
    let b1x = con.quad_base.mul_vec(xbar)?;
    let b2x = con.quad_slope.mul_vec(xbar)?;
    let mu_sum = con.mu.lo + con.mu.hi;

    let per_mu: Vec<_> = mus
        .par_iter()
        .map(|&mu_beta| -> Result<Option<((f64, Vec<f64>), (OptimalityCertificate, VerificationReport))>> {
            let mu_alpha = (mu_sum - mu_beta).clamp(con.mu.lo, con.mu.hi);
            let mut mx_beta = b1x.clone();
            axpy(mu_beta, &b2x, &mut mx_beta);
            let mut mx_alpha = b1x.clone();
            axpy(mu_alpha, &b2x, &mut mx_alpha);
            let mut best = None;
            for &delta_beta in &deltas {
                let mut col_beta = mx_beta.clone();
                axpy(1.0, &con.lin_at(delta_beta), &mut col_beta);
                for &delta_alpha in &deltas {
                    let mut col_alpha: Vec<f64> = mx_alpha.iter().map(|v| -v).collect();
                    axpy(-1.0, &con.lin_at(delta_alpha), &mut col_alpha);
                    let cols = [col_beta.clone(), col_alpha];
                    for lam in nonneg_stationary_solutions(&cols, &rhs, tol) {
                        let cert = OptimalityCertificate {
                            lambda1: lam[0],
                            lambda2: lam[1],
                            mu_alpha,
                            mu_beta,
                            delta_alpha,
                            delta_beta,
                        };
                        let rep = verify_optimality_certificate(inst, xbar, &cert, tol)?;
                        if rep.passed {
                            let key = (
                                rep.max_residual(),
                                vec![mu_beta, delta_beta, delta_alpha, lam[0], lam[1]],
                            );
                            best = pick_best(best.into_iter().chain([(key, (cert, rep))]));
                        }
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(pick_best(per_mu.into_iter().flatten()).map(|(_, v)| v))
}

/// One-sided certificate search over `(μ, δ)`.
pub fn search_one_sided_certificate(
    inst: &RobustInstance,
    xbar: &[f64],
    budget: &SearchBudget,
) -> Result<Option<(OneSidedCertificate, VerificationReport)>> {
    budget.check()?;
    let con = &inst.constraint;
    if con.lower.is_finite() {
        return Err(Error::Precondition(
            "two-sided instance: use the two-sided search".into(),
        ));
    }
    check_dim(inst.dim(), xbar.len())?;
    let tol = budget.tol;
    if !is_robust_feasible(inst, xbar, tol)?.feasible {
        return Err(Error::Precondition("point is not robust-feasible".into()));
    }
    let mus = budget.grid(&con.mu, budget.mu_grid, "mu")?;
    let deltas = budget.grid(&con.delta, budget.delta_grid, "delta")?;
    let rhs: Vec<f64> = inst.objective.gradient(xbar)?.iter().map(|v| -v).collect();
    let b1x = con.quad_base.mul_vec(xbar)?;
    let b2x = con.quad_slope.mul_vec(xbar)?;

    let per_mu: Vec<_> = mus
        .par_iter()
        .map(|&mu| -> Result<Option<((f64, Vec<f64>), (OneSidedCertificate, VerificationReport))>> {
            let mut mx = b1x.clone();
            axpy(mu, &b2x, &mut mx);
            let mut best = None;
            for &delta in &deltas {
                let mut col = mx.clone();
                axpy(1.0, &con.lin_at(delta), &mut col);
                for lam in nonneg_stationary_solutions(&[col], &rhs, tol) {
                    let cert = OneSidedCertificate { lambda: lam[0], mu, delta };
                    let rep = verify_one_sided_certificate(inst, xbar, &cert, tol)?;
                    if rep.passed {
                        let key = (rep.max_residual(), vec![mu, delta, lam[0]]);
                        best = pick_best(best.into_iter().chain([(key, (cert, rep))]));
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(pick_best(per_mu.into_iter().flatten()).map(|(_, v)| v))
}

/// Outcome of [`decide_alternative`].
#[derive(Debug, Clone, PartialEq)]
pub enum AlternativeOutcome {
    /// Strictly feasible point with `f + γ < 0`.
    BranchA { witness: Vec<f64>, report: VerificationReport },
    /// Multipliers with a globally nonnegative aggregate.
    BranchB { certificate: AlternativeCertificate, report: VerificationReport },
    /// Both searches exhausted their budgets. This is a search failure, not a
    /// claim that neither branch holds.
    Inconclusive,
}

const REFINE_ITERS: usize = 200;
const GOLDEN_ITERS: usize = 60;

/// Numerically decides which branch of the robust alternative holds.
///
/// Phase 1 samples the box for strictly feasible points, stopping at the
/// first with `f + γ ≤ −tol`, and polishes the best one by pattern descent.
/// Phase 2 scans the parameter grid for multipliers, first with `λ₀ = 1` and
/// then with `λ₀ = 0` on the simplex `λ₁ + λ₂ = 1`.
pub fn decide_alternative(
    inst: &RobustInstance,
    gamma: f64,
    budget: &SearchBudget,
) -> Result<AlternativeOutcome> {
    budget.check()?;
    let con = &inst.constraint;
    let alpha = con.lower.finite().ok_or_else(|| {
        Error::Precondition("the alternative needs a finite lower bound".into())
    })?;
    if !gamma.is_finite() {
        return Err(Error::invalid("gamma must be finite"));
    }
    let tol = budget.tol;
    let n = inst.dim();

    // Phase 1: branch (a)
    let strict = |x: &[f64]| -> Result<Option<f64>> {
        let (g_min, g_max) = robust_range(con, x)?;
        // same expressions as the witness verifier
        if !(con.upper - g_max >= tol && g_min - alpha >= tol) {
            return Ok(None);
        }
        Ok(Some(inst.objective_value(x)? + gamma))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let r = budget.box_halfwidth;
    let mut x = vec![0.0; n];
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..budget.sample_count {
        for xi in x.iter_mut() {
            *xi = rng.random_range(-r..=r);
        }
        if let Some(v) = strict(&x)? {
            if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                best = Some((v, x.clone()));
            }
            if v <= -tol {
                break;
            }
        }
    }
    if let Some((v, x0)) = best {
        let (v, witness) = pattern_descent(x0, v, 0.1 * r, REFINE_ITERS, budget.seed, &strict)?;
        if v <= -tol {
            let cert = AlternativeCertificate::WitnessPoint { x: witness.clone() };
            let report = verify_alternative_certificate(inst, gamma, &cert, tol)?;
            if report.passed {
                return Ok(AlternativeOutcome::BranchA { witness, report });
            }
        }
    }

    // Phase 2: branch (b)
    if budget.mu_grid == 0 || budget.delta_grid == 0 {
        return Ok(AlternativeOutcome::Inconclusive);
    }
    let mus = budget.grid(&con.mu, budget.mu_grid, "mu")?;
    let deltas = budget.grid(&con.delta, budget.delta_grid, "delta")?;
    let mu_sum = con.mu.lo + con.mu.hi;
    let cells: Vec<(f64, f64, f64)> = mus
        .iter()
        .flat_map(|&m| {
            let deltas = &deltas;
            deltas
                .iter()
                .flat_map(move |&db| deltas.iter().map(move |&da| (m, db, da)))
        })
        .collect();
    let make_cert = |(mu_beta, delta_beta, delta_alpha): (f64, f64, f64), l1: f64, l2: f64| {
        OptimalityCertificate {
            lambda1: l1,
            lambda2: l2,
            mu_alpha: (mu_sum - mu_beta).clamp(con.mu.lo, con.mu.hi),
            mu_beta,
            delta_alpha,
            delta_beta,
        }
    };
    let accept = |lambda0: f64, cert: OptimalityCertificate| -> Option<(AlternativeCertificate, VerificationReport)> {
        let c = AlternativeCertificate::multipliers(lambda0, cert).ok()?;
        let rep = verify_alternative_certificate(inst, gamma, &c, tol).ok()?;
        rep.passed.then_some((c, rep))
    };

    // λ₀ = 1: maximize the smallest eigenvalue of the lifted aggregate, which
    // is concave in (λ₁, λ₂), then verify candidates near the maximizer.
    let h0 = lift(
        &inst.objective.quad,
        &inst.objective.linear,
        2.0 * (inst.objective.constant + gamma),
    )?;
    let lifted = |cell: (f64, f64, f64)| -> Result<(SymmetricMatrix, SymmetricMatrix)> {
        let c = make_cert(cell, 0.0, 0.0);
        let hb = lift(&con.quad_at(c.mu_beta), &con.lin_at(c.delta_beta), -2.0 * con.upper)?;
        let ha = lift(&con.quad_at(c.mu_alpha), &con.lin_at(c.delta_alpha), -2.0 * alpha)?;
        Ok((hb, ha))
    };
    let found = cells.par_iter().find_map_first(|&cell| {
        let (hb, ha) = lifted(cell).ok()?;
        let scale = psd_scale(&h0).max(psd_scale(&hb)).max(psd_scale(&ha));
        let phi = |l1: f64, l2: f64| -> f64 {
            let m = h0
                .add_scaled(&hb, l1)
                .and_then(|m| m.add_scaled(&ha, -l2))
                .expect("lifts share a dimension");
            min_eigenvalue(&m).unwrap_or(f64::NEG_INFINITY) / scale
        };
        let (l1, l2) = maximize_concave_2d(&phi, budget.lambda_max);
        let candidates = [(0.0, 0.0), (l1, l2), (l1, 0.0), (0.0, l2)];
        candidates
            .iter()
            .find_map(|&(a, b)| accept(1.0, make_cert(cell, a, b)))
    });
    if let Some((certificate, report)) = found {
        return Ok(AlternativeOutcome::BranchB { certificate, report });
    }

    // λ₀ = 0 on the simplex
    let weights = Interval::new(0.0, 1.0)?.grid(budget.mu_grid.max(2));
    let found = cells.par_iter().find_map_first(|&cell| {
        weights
            .iter()
            .find_map(|&w| accept(0.0, make_cert(cell, w, 1.0 - w)))
    });
    if let Some((certificate, report)) = found {
        return Ok(AlternativeOutcome::BranchB { certificate, report });
    }
    Ok(AlternativeOutcome::Inconclusive)
}

/// Coordinate descent with step halving that keeps strict feasibility.
/// Maximizes a concave function on `[0, hi]²` by nested golden-section search.
///
/// Stops early at the first point where the value is nonnegative.
fn maximize_concave_2d(phi: &dyn Fn(f64, f64) -> f64, hi: f64) -> (f64, f64) {
    let inner = |l1: f64| golden_max(&|l2| phi(l1, l2), hi);
    let (l1, _) = golden_max(&|l1| inner(l1).1, hi);
    (l1, inner(l1).0)
}

fn golden_max(f: &dyn Fn(f64) -> f64, hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (0.0, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERS {
        if fc >= 0.0 {
            return (c, fc);
        }
        if fd >= 0.0 {
            return (d, fd);
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let f0 = f(0.0);
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    if f0 >= fm {
        (0.0, f0)
    } else {
        (mid, fm)
    }
}
