//! Homogenized `(n+1)×(n+1)` lifts of the objective and constraint.
//!
//! A quadratic `q(x) = ½xᵀQx + cᵀx + r` lifts to `[[Q, c], [cᵀ, 2r]]`, and
//! `½(x,1)ᵀ·lift·(x,1) = q(x)`. This is the only place where the factor two on
//! the constant appears.

use crate::error::{check_dim, Error, Result};
use crate::linalg::SymmetricMatrix;
use crate::model::{Corner, RobustInstance, UncertainConstraint};

/// Index of a constraint bound in the corner lifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Upper,
    Lower,
}

/// `[[q, c], [cᵀ, corner]]`.
pub fn lift(q: &SymmetricMatrix, c: &[f64], corner: f64) -> Result<SymmetricMatrix> {
    let n = q.dim();
    check_dim(n, c.len())?;
    let mut m = SymmetricMatrix::zeros(n + 1);
    for i in 0..n {
        for j in i..n {
            m.set(i, j, q.get(i, j));
        }
        m.set(i, n, c[i]);
    }
    m.set(n, n, corner);
    Ok(m)
}

/// All lifts used by the alternative and optimality theory.
#[derive(Debug, Clone)]
pub struct HomogenizedSet {
    /// `[[A, a], [aᵀ, 2γ]]`
    pub h0: SymmetricMatrix,
    /// `[[B₂, 0], [0, 0]]`
    pub w2: SymmetricMatrix,
    /// `W(δ₁, β)`, `W(δ₂, β)`
    pub w_beta: [SymmetricMatrix; 2],
    /// `W(δ₁, α)`, `W(δ₂, α)`; absent when one-sided.
    pub w_alpha: Option<[SymmetricMatrix; 2]>,
    /// `corner_beta[i][j] = W(δⱼ, β) + μᵢ·W₂`
    pub corner_beta: [[SymmetricMatrix; 2]; 2],
    pub corner_alpha: Option<[[SymmetricMatrix; 2]; 2]>,
    pub gamma: f64,
    pub mu: [f64; 2],
    pub delta: [f64; 2],
}

impl HomogenizedSet {
    pub fn corner_lift(&self, corner: Corner, bound: Bound) -> Option<&SymmetricMatrix> {
        let (i, j) = corner.indices();
        match bound {
            Bound::Upper => Some(&self.corner_beta[i][j]),
            Bound::Lower => self.corner_alpha.as_ref().map(|c| &c[i][j]),
        }
    }

    pub fn lifted_dim(&self) -> usize {
        self.h0.dim()
    }
}

/// `W(δ, λ) = [[B₁, b₁+δb₂], [(b₁+δb₂)ᵀ, −2λ]]`.
pub fn w_matrix(con: &UncertainConstraint, delta: f64, bound: f64) -> Result<SymmetricMatrix> {
    lift(&con.quad_base, &con.lin_at(delta), -2.0 * bound)
}

/// Builds every lift for the given `γ`.
pub fn homogenize(inst: &RobustInstance, gamma: f64) -> Result<HomogenizedSet> {
    if !gamma.is_finite() {
        return Err(Error::invalid("gamma must be finite"));
    }
    let con = &inst.constraint;
    let n = inst.dim();
    let h0 = lift(&inst.objective.quad, &inst.objective.linear, 2.0 * gamma)?;
    let w2 = lift(&con.quad_slope, &vec![0.0; n], 0.0)?;
    let mu = [con.mu.lo, con.mu.hi];
    let delta = [con.delta.lo, con.delta.hi];

    let w_for = |bound: f64| -> Result<[SymmetricMatrix; 2]> {
        Ok([w_matrix(con, delta[0], bound)?, w_matrix(con, delta[1], bound)?])
    };
    let corners = |w: &[SymmetricMatrix; 2]| -> Result<[[SymmetricMatrix; 2]; 2]> {
        let at = |i: usize, j: usize| w[j].add_scaled(&w2, mu[i]);
        Ok([[at(0, 0)?, at(0, 1)?], [at(1, 0)?, at(1, 1)?]])
    };

    let w_beta = w_for(con.upper)?;
    let corner_beta = corners(&w_beta)?;
    let (w_alpha, corner_alpha) = match con.lower.finite() {
        Some(alpha) => {
            let w = w_for(alpha)?;
            let c = corners(&w)?;
            (Some(w), Some(c))
        }
        None => (None, None),
    };

    let hs = HomogenizedSet { h0, w2, w_beta, w_alpha, corner_beta, corner_alpha, gamma, mu, delta };
    check_lift_structure(inst, &hs)?;
    Ok(hs)
}

/// Entrywise check of the block structure of `H₀`, `W₂` and the corner lifts.
fn check_lift_structure(inst: &RobustInstance, hs: &HomogenizedSet) -> Result<()> {
    let n = inst.dim();
    let con = &inst.constraint;
    let obj = &inst.objective;
    let bad = |ok: bool, what: &str| -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("lift structure check failed: {what}")))
        }
    };
    for i in 0..n {
        for j in 0..n {
            bad(hs.h0.get(i, j) == obj.quad.get(i, j), "H0 block")?;
            bad(hs.w2.get(i, j) == con.quad_slope.get(i, j), "W2 block")?;
        }
        bad(hs.h0.get(i, n) == obj.linear[i], "H0 border")?;
        bad(hs.w2.get(i, n) == 0.0, "W2 border")?;
    }
    bad(hs.h0.get(n, n) == 2.0 * hs.gamma, "H0 corner")?;
    bad(hs.w2.get(n, n) == 0.0, "W2 corner")?;
    for (i, &mu) in hs.mu.iter().enumerate() {
        for (j, &delta) in hs.delta.iter().enumerate() {
            let direct = lift(&con.quad_at(mu), &con.lin_at(delta), -2.0 * con.upper)?;
            bad(hs.corner_beta[i][j].max_abs_diff(&direct)? <= 1e-12 * (1.0 + direct.max_abs()), "beta corner lift")?;
        }
    }
    Ok(())
}

/// `½(x,t)ᵀ M (x,t)`.
pub fn eval_homog(m: &SymmetricMatrix, x: &[f64], t: f64) -> Result<f64> {
    check_dim(m.dim(), x.len() + 1)?;
    let mut y = x.to_vec();
    y.push(t);
    Ok(0.5 * m.quad_form(&y)?)
}

/// Affine pencil `W1 + μ·W2slope` reproducing the `β`-lifts along the
/// diagonal `(μ₁,δ₁) → (μ₂,δ₂)` of the rectangle.
#[derive(Debug, Clone)]
pub struct WPencil {
    pub w1: SymmetricMatrix,
    pub w2_slope: SymmetricMatrix,
}

impl WPencil {
    pub fn at(&self, mu: f64) -> SymmetricMatrix {
        self.w1.add_scaled(&self.w2_slope, mu).expect("pencil members share a dimension")
    }
}

/// `W1 = [[B₁, b₁ + ((δ₁μ₂−δ₂μ₁)/(μ₂−μ₁))b₂], [·, −2β]]`,
/// `W2slope = [[B₂, ((δ₂−δ₁)/(μ₂−μ₁))b₂], [·, 0]]`.
pub fn build_w_pencil(con: &UncertainConstraint, beta: f64) -> Result<WPencil> {
    let (m1, m2) = (con.mu.lo, con.mu.hi);
    let (d1, d2) = (con.delta.lo, con.delta.hi);
    if !(m2 > m1) {
        return Err(Error::DegeneratePencil(format!(
            "mu interval [{m1}, {m2}] has zero width"
        )));
    }
    let width = m2 - m1;
    let offset = (d1 * m2 - d2 * m1) / width;
    let slope = (d2 - d1) / width;
    let w1 = lift(&con.quad_base, &con.lin_at(offset), -2.0 * beta)?;
    let slope_vec: Vec<f64> = con.lin_slope.iter().map(|v| slope * v).collect();
    let w2_slope = lift(&con.quad_slope, &slope_vec, 0.0)?;
    Ok(WPencil { w1, w2_slope })
}

/// Generators of the joint-range set: `H₀`, the four `β` corner lifts, and
/// (two-sided only) the four negated `α` corner lifts.
pub fn omega_mu_generators(hs: &HomogenizedSet, two_sided: bool) -> Result<Vec<SymmetricMatrix>> {
    let mut out = vec![hs.h0.clone()];
    for corner in Corner::ALL {
        let (i, j) = corner.indices();
        out.push(hs.corner_beta[i][j].clone());
    }
    if two_sided {
        let alpha = hs.corner_alpha.as_ref().ok_or_else(|| {
            Error::invalid("two-sided generators need a finite lower bound")
        })?;
        for corner in Corner::ALL {
            let (i, j) = corner.indices();
            out.push(-&alpha[i][j]);
        }
    }
    Ok(out)
}
