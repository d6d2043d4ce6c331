//! Instance data model: the objective, the interval-uncertain band
//! constraint, and robust feasibility via corner reduction.
//!
//! Every quadratic uses `q(x) = ½xᵀQx + cᵀx + r`.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, SymmetricMatrix};

/// Default absolute tolerance on constraint values.
pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-9;

/// `q(x) = ½xᵀQx + cᵀx + r`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticFunction {
    pub quad: SymmetricMatrix,
    pub linear: Vec<f64>,
    pub constant: f64,
}

impl QuadraticFunction {
    pub fn new(quad: SymmetricMatrix, linear: Vec<f64>, constant: f64) -> Result<Self> {
        check_dim(quad.dim(), linear.len())?;
        if !constant.is_finite() || linear.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite quadratic coefficients"));
        }
        Ok(Self { quad, linear, constant })
    }

    pub fn zero(n: usize) -> Self {
        Self { quad: SymmetricMatrix::zeros(n), linear: vec![0.0; n], constant: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.quad.dim()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        eval_quadratic(self, x)
    }

    /// Gradient `Qx + c`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = self.quad.mul_vec(x)?;
        for (gi, ci) in g.iter_mut().zip(&self.linear) {
            *gi += ci;
        }
        Ok(g)
    }

    /// `self + s·other`, coefficient-wise.
    pub fn add_scaled(&self, other: &Self, s: f64) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self {
            quad: self.quad.add_scaled(&other.quad, s)?,
            linear: self.linear.iter().zip(&other.linear).map(|(a, b)| a + s * b).collect(),
            constant: self.constant + s * other.constant,
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            quad: self.quad.scale(s),
            linear: self.linear.iter().map(|v| v * s).collect(),
            constant: self.constant * s,
        }
    }

    pub fn with_constant(mut self, r: f64) -> Self {
        self.constant = r;
        self
    }
}

/// `½xᵀQx + cᵀx + r`.
pub fn eval_quadratic(q: &QuadraticFunction, x: &[f64]) -> Result<f64> {
    check_dim(q.dim(), x.len())?;
    Ok(0.5 * q.quad.quad_form(x)? + dot(&q.linear, x) + q.constant)
}

/// Closed interval `[lo, hi]` with `lo ≤ hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid("interval endpoints must be finite"));
        }
        if lo > hi {
            return Err(Error::invalid(format!("interval requires lo <= hi, got [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(v: f64) -> Result<Self> {
        Self::new(v, v)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// `k` uniformly spaced points including both endpoints.
    ///
    /// Points are computed as `lo + (hi - lo)·i/(k-1)` so that grids of size
    /// `k` and `2k-1` are nested exactly. A degenerate interval yields one point.
    pub fn grid(&self, k: usize) -> Vec<f64> {
        if self.is_degenerate() || k <= 1 {
            return if k == 0 { Vec::new() } else { vec![self.lo] };
        }
        (0..k)
            .map(|i| {
                if i == k - 1 {
                    self.hi
                } else {
                    self.lo + self.width() * i as f64 / (k - 1) as f64
                }
            })
            .collect()
    }
}

/// Lower end of the constraint band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LowerBound {
    /// One-sided constraint: only the upper bound is enforced.
    NegInfinity,
    Finite(f64),
}

impl LowerBound {
    pub fn finite(&self) -> Option<f64> {
        match *self {
            LowerBound::Finite(a) => Some(a),
            LowerBound::NegInfinity => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, LowerBound::Finite(_))
    }

    pub fn as_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::NEG_INFINITY)
    }
}

/// One of the four corners of the `(μ, δ)` rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Corner {
    MuLoDeltaLo,
    MuLoDeltaHi,
    MuHiDeltaLo,
    MuHiDeltaHi,
}

impl Corner {
    pub const ALL: [Corner; 4] =
        [Corner::MuLoDeltaLo, Corner::MuLoDeltaHi, Corner::MuHiDeltaLo, Corner::MuHiDeltaHi];

    /// `(mu_index, delta_index)` with 0 = low end, 1 = high end.
    pub fn indices(self) -> (usize, usize) {
        match self {
            Corner::MuLoDeltaLo => (0, 0),
            Corner::MuLoDeltaHi => (0, 1),
            Corner::MuHiDeltaLo => (1, 0),
            Corner::MuHiDeltaHi => (1, 1),
        }
    }
}

/// `α ≤ ½xᵀ(B₁+μB₂)x + (b₁+δb₂)ᵀx ≤ β` for every `μ ∈ [μ₁,μ₂]`, `δ ∈ [δ₁,δ₂]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertainConstraint {
    /// `B₁`
    pub quad_base: SymmetricMatrix,
    /// `B₂`
    pub quad_slope: SymmetricMatrix,
    /// `b₁`
    pub lin_base: Vec<f64>,
    /// `b₂`
    pub lin_slope: Vec<f64>,
    pub mu: Interval,
    pub delta: Interval,
    pub lower: LowerBound,
    pub upper: f64,
}

impl UncertainConstraint {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        quad_base: SymmetricMatrix,
        quad_slope: SymmetricMatrix,
        lin_base: Vec<f64>,
        lin_slope: Vec<f64>,
        mu: Interval,
        delta: Interval,
        lower: LowerBound,
        upper: f64,
    ) -> Result<Self> {
        let n = quad_base.dim();
        check_dim(n, quad_slope.dim())?;
        check_dim(n, lin_base.len())?;
        check_dim(n, lin_slope.len())?;
        if lin_base.iter().chain(&lin_slope).any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite linear coefficient"));
        }
        if !upper.is_finite() {
            return Err(Error::invalid("beta must be finite"));
        }
        if let LowerBound::Finite(alpha) = lower {
            if !alpha.is_finite() {
                return Err(Error::invalid("finite alpha must be a real number"));
            }
            if alpha >= upper {
                return Err(Error::invalid(format!(
                    "alpha<beta required, got alpha={alpha}, beta={upper}"
                )));
            }
        }
        Ok(Self { quad_base, quad_slope, lin_base, lin_slope, mu, delta, lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.quad_base.dim()
    }

    pub fn corner_params(&self, corner: Corner) -> (f64, f64) {
        let (i, j) = corner.indices();
        let mu = if i == 0 { self.mu.lo } else { self.mu.hi };
        let delta = if j == 0 { self.delta.lo } else { self.delta.hi };
        (mu, delta)
    }

    /// `B₁ + μB₂` without range checking.
    pub fn quad_at(&self, mu: f64) -> SymmetricMatrix {
        self.quad_base.add_scaled(&self.quad_slope, mu).expect("dimensions checked at construction")
    }

    /// `b₁ + δb₂` without range checking.
    pub fn lin_at(&self, delta: f64) -> Vec<f64> {
        self.lin_base.iter().zip(&self.lin_slope).map(|(b, s)| b + delta * s).collect()
    }

    /// Constraint value `g(x; μ, δ)` without range checking.
    pub fn value_at(&self, x: &[f64], mu: f64, delta: f64) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let base = 0.5 * self.quad_base.quad_form(x)? + dot(&self.lin_base, x);
        let slope_q = 0.5 * self.quad_slope.quad_form(x)?;
        let slope_l = dot(&self.lin_slope, x);
        Ok(base + mu * slope_q + delta * slope_l)
    }
}

/// `g(·; μ, δ)` as a quadratic function.
pub fn constraint_at(con: &UncertainConstraint, mu: f64, delta: f64) -> Result<QuadraticFunction> {
    if !con.mu.contains(mu) {
        return Err(Error::invalid(format!(
            "mu={mu} outside [{}, {}]",
            con.mu.lo, con.mu.hi
        )));
    }
    if !con.delta.contains(delta) {
        return Err(Error::invalid(format!(
            "delta={delta} outside [{}, {}]",
            con.delta.lo, con.delta.hi
        )));
    }
    QuadraticFunction::new(con.quad_at(mu), con.lin_at(delta), 0.0)
}

/// Constraint values at the four corners, in [`Corner::ALL`] order.
pub fn corner_values(con: &UncertainConstraint, x: &[f64]) -> Result<[f64; 4]> {
    check_dim(con.dim(), x.len())?;
    let base = 0.5 * con.quad_base.quad_form(x)? + dot(&con.lin_base, x);
    let slope_q = 0.5 * con.quad_slope.quad_form(x)?;
    let slope_l = dot(&con.lin_slope, x);
    let mut out = [0.0; 4];
    for (slot, corner) in out.iter_mut().zip(Corner::ALL) {
        let (mu, delta) = con.corner_params(corner);
        *slot = base + mu * slope_q + delta * slope_l;
    }
    Ok(out)
}

/// `(min, max)` of `g(x; μ, δ)` over the rectangle.
///
/// `g` is affine in `(μ, δ)`, so the extremes sit at corners.
pub fn robust_range(con: &UncertainConstraint, x: &[f64]) -> Result<(f64, f64)> {
    let v = corner_values(con, x)?;
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Objective plus one uncertain band constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustInstance {
    pub objective: QuadraticFunction,
    pub constraint: UncertainConstraint,
}

impl RobustInstance {
    pub fn new(objective: QuadraticFunction, constraint: UncertainConstraint) -> Result<Self> {
        check_dim(objective.dim(), constraint.dim())?;
        Ok(Self { objective, constraint })
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn is_one_sided(&self) -> bool {
        !self.constraint.lower.is_finite()
    }

    pub fn objective_value(&self, x: &[f64]) -> Result<f64> {
        eval_quadratic(&self.objective, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub g_min: f64,
    pub g_max: f64,
    /// `β − g_max`
    pub upper_margin: f64,
    /// `g_min − α`, `+∞` when one-sided.
    pub lower_margin: f64,
}

/// Robust feasibility within an absolute tolerance on constraint values.
pub fn is_robust_feasible(inst: &RobustInstance, x: &[f64], tol: f64) -> Result<FeasibilityReport> {
    if !(tol >= 0.0) {
        return Err(Error::invalid("tolerance must be nonnegative"));
    }
    let con = &inst.constraint;
    let (g_min, g_max) = robust_range(con, x)?;
    let upper_margin = con.upper - g_max;
    let lower_margin = match con.lower {
        LowerBound::Finite(a) => g_min - a,
        LowerBound::NegInfinity => f64::INFINITY,
    };
    let feasible = upper_margin >= -tol && lower_margin >= -tol;
    Ok(FeasibilityReport { feasible, g_min, g_max, upper_margin, lower_margin })
}
