//! Brute-force ground truth for small instances.
//!
//! Nothing in this module uses multipliers or the homogenized lifts; it only
//! evaluates the objective and the robust constraint at many points.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{is_robust_feasible, RobustInstance};

/// Largest grid evaluated before falling back to random sampling only.
pub const MAX_GRID_POINTS: usize = 10_000_000;

const REFINE_STEPS: usize = 200;
const REFINE_MARGIN: f64 = 1e-12;
const VIOLATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best_x: Option<Vec<f64>>,
    pub best_value: Option<f64>,
    pub samples_evaluated: usize,
    pub feasible_found: bool,
    /// Best value over the grid and random points, before refinement. This
    /// is the quantity that is monotone under nested grid refinement.
    pub sampled_value: Option<f64>,
    /// Whether the full grid was evaluated.
    pub grid_mode: bool,
}

/// Value first, then lexicographically smaller point.
fn incumbent_cmp(a: &(f64, Vec<f64>), b: &(f64, Vec<f64>)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| {
        a.1.iter()
            .zip(&b.1)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

fn better(cur: Option<(f64, Vec<f64>)>, cand: (f64, Vec<f64>)) -> Option<(f64, Vec<f64>)> {
    match cur {
        Some(c) if incumbent_cmp(&c, &cand) != Ordering::Greater => Some(c),
        _ => Some(cand),
    }
}

fn grid_size(n: usize, per_dim: usize) -> Option<usize> {
    if per_dim < 2 {
        return None;
    }
    let mut total: usize = 1;
    for _ in 0..n {
        total = total.checked_mul(per_dim)?;
        if total > MAX_GRID_POINTS {
            return None;
        }
    }
    Some(total)
}

/// Minimizes the objective over robust-feasible points of `[−R, R]ⁿ`.
///
/// Evaluates the full tensor grid when it has at most [`MAX_GRID_POINTS`]
/// points (otherwise only random points), adds `random_extra` seeded uniform
/// samples, then polishes the incumbent with 200 descent steps. Each step
/// tries the coordinate directions and a few seeded random directions, since
/// axis moves alone stall on curved constraint boundaries.
pub fn brute_force_min(
    inst: &RobustInstance,
    box_halfwidth: f64,
    grid_per_dim: usize,
    random_extra: usize,
    seed: u64,
) -> Result<OracleResult> {
    if !(box_halfwidth > 0.0) {
        return Err(Error::invalid("box half-width must be positive"));
    }
    let n = inst.dim();
    let r = box_halfwidth;
    let eval = |x: &[f64]| -> Option<f64> {
        let rep = is_robust_feasible(inst, x, 0.0).ok()?;
        if rep.feasible {
            inst.objective_value(x).ok()
        } else {
            None
        }
    };

    let mut evaluated = 0usize;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let grid = grid_size(n, grid_per_dim);
    if let Some(total) = grid {
        let k = grid_per_dim;
        let coord = |i: usize| -> f64 {
            if i == k - 1 {
                r
            } else {
                -r + 2.0 * r * i as f64 / (k - 1) as f64
            }
        };
        let found = (0..total)
            .into_par_iter()
            .filter_map(|mut idx| {
                let mut x = vec![0.0; n];
                for xi in x.iter_mut().rev() {
                    *xi = coord(idx % k);
                    idx /= k;
                }
                eval(&x).map(|v| (v, x))
            })
            .min_by(incumbent_cmp);
        evaluated += total;
        if let Some(c) = found {
            best = better(best, c);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; n];
    for _ in 0..random_extra {
        for xi in x.iter_mut() {
            *xi = rng.random_range(-r..=r);
        }
        if let Some(v) = eval(&x) {
            best = better(best, (v, x.clone()));
        }
    }
    evaluated += random_extra;

    let Some((value, x)) = best else {
        return Ok(OracleResult {
            best_x: None,
            best_value: None,
            samples_evaluated: evaluated,
            feasible_found: false,
            sampled_value: None,
            grid_mode: grid.is_some(),
        });
    };

    let initial_step = match grid {
        Some(_) => 2.0 * r / (grid_per_dim - 1) as f64,
        None => 0.1 * r,
    };
    let sampled_value = Some(value);
    let (value, x) = refine(inst, x, value, initial_step, seed)?;
    Ok(OracleResult {
        best_x: Some(x),
        best_value: Some(value),
        samples_evaluated: evaluated,
        feasible_found: true,
        sampled_value,
        grid_mode: grid.is_some(),
    })
}

fn refine(
    inst: &RobustInstance,
    x: Vec<f64>,
    value: f64,
    initial_step: f64,
    seed: u64,
) -> Result<(f64, Vec<f64>)> {
    let con = &inst.constraint;
    let lower = con.lower.as_f64();
    let eval = |y: &[f64]| -> Result<Option<f64>> {
        let rep = is_robust_feasible(inst, y, 0.0)?;
        if rep.g_max <= con.upper - REFINE_MARGIN && rep.g_min >= lower + REFINE_MARGIN {
            Ok(Some(inst.objective_value(y)?))
        } else {
            Ok(None)
        }
    };
    pattern_descent(x, value, initial_step, REFINE_STEPS, seed, &eval)
}

/// Derivative-free descent on `eval` (`None` marks points to avoid).
///
/// Each step tries `±eᵢ` and `2n` seeded random unit directions at the
/// current step length and moves to the best improving trial point. The step
/// halves after a failed step and doubles (capped at the initial length)
/// after a successful one.
pub(crate) fn pattern_descent(
    mut x: Vec<f64>,
    mut value: f64,
    initial_step: f64,
    steps: usize,
    seed: u64,
    eval: &dyn Fn(&[f64]) -> Result<Option<f64>>,
) -> Result<(f64, Vec<f64>)> {
    let n = x.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0fac_1e00);
    let mut step = initial_step;
    let extra_dirs = 2 * n;
    for _ in 0..steps {
        let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(2 * n + extra_dirs);
        for i in 0..n {
            for s in [-1.0, 1.0] {
                let mut d = vec![0.0; n];
                d[i] = s;
                dirs.push(d);
            }
        }
        for _ in 0..extra_dirs {
            let d: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let nrm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nrm > 0.0 {
                dirs.push(d.into_iter().map(|v| v / nrm).collect());
            }
        }
        let mut cand: Option<(f64, Vec<f64>)> = None;
        for d in &dirs {
            let y: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + step * di).collect();
            if let Some(v) = eval(&y)? {
                if v < value {
                    cand = better(cand, (v, y));
                }
            }
        }
        match cand {
            Some((v, y)) => {
                value = v;
                x = y;
                step = (2.0 * step).min(initial_step);
            }
            None => step *= 0.5,
        }
    }
    Ok((value, x))
}

/// Result of an empirical check of "feasible ⇒ `f + γ ≥ 0`".
#[derive(Debug, Clone, PartialEq)]
pub enum ImplicationOutcome {
    NoViolation {
        feasible_tested: usize,
        draws: usize,
        /// No feasible sample was found, so nothing was tested.
        vacuous: bool,
    },
    Violation { x: Vec<f64>, value: f64 },
}

/// Draws seeded uniform points in `[−R, R]ⁿ` until `samples` robust-feasible
/// ones have been tested (or `1000·samples` draws), and reports the first
/// feasible point with `f(x) + γ < −1e-9`.
pub fn sample_implication_check(
    inst: &RobustInstance,
    gamma: f64,
    samples: usize,
    seed: u64,
    box_halfwidth: f64,
) -> Result<ImplicationOutcome> {
    if samples == 0 {
        return Err(Error::invalid("samples must be positive"));
    }
    if !(box_halfwidth > 0.0) {
        return Err(Error::invalid("box half-width must be positive"));
    }
    let n = inst.dim();
    let r = box_halfwidth;
    let max_draws = samples.saturating_mul(1000);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; n];
    let mut tested = 0;
    let mut draws = 0;
    while tested < samples && draws < max_draws {
        draws += 1;
        for xi in x.iter_mut() {
            *xi = rng.random_range(-r..=r);
        }
        if !is_robust_feasible(inst, &x, 0.0)?.feasible {
            continue;
        }
        tested += 1;
        let value = inst.objective_value(&x)? + gamma;
        if value < -VIOLATION_TOL {
            return Ok(ImplicationOutcome::Violation { x: x.clone(), value });
        }
    }
    Ok(ImplicationOutcome::NoViolation { feasible_tested: tested, draws, vacuous: tested == 0 })
}
