//! Sufficient conditions for convexity of joint quadratic images, and
//! seeded falsifiers that can only ever disprove convexity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{least_squares_solve, min_eigenvalue, norm2, SymmetricMatrix};

pub const DEFAULT_DIM_LIMIT: usize = 4;
pub const DEFAULT_PREIMAGE_RESOLUTION: usize = 21;
pub const MIN_PREIMAGE_RESOLUTION: usize = 11;
/// Half-width of the preimage search box.
pub const PREIMAGE_BOX: f64 = 5.0;
/// Relative distance below which a target counts as reached.
pub const PREIMAGE_REL_TOL: f64 = 1e-3;
const PD_REL_TOL: f64 = 1e-9;
const LM_ITERS: usize = 200;
const GRID_KEEP: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledFamilyReport {
    pub passes: bool,
    pub a0_index: Option<usize>,
    /// Ratios for the non-anchor members, in list order.
    pub rho: Vec<f64>,
    pub m: usize,
    pub n: usize,
    pub reason: String,
}

/// Checks that the family is a scalar multiple of a positive definite anchor
/// `A₀` (the first PD member) and that `n ≥ m + 1`, `m` being the number of
/// non-anchor members.
pub fn check_scaled_family(blocks: &[SymmetricMatrix], tol: f64) -> ScaledFamilyReport {
    let m = blocks.len().saturating_sub(1);
    let n = blocks.first().map_or(0, SymmetricMatrix::dim);
    let fail = |a0_index, rho, reason: String| ScaledFamilyReport {
        passes: false,
        a0_index,
        rho,
        m,
        n,
        reason,
    };
    if blocks.len() < 2 {
        return fail(None, vec![], "need at least two matrices".into());
    }
    if let Some(b) = blocks.iter().find(|b| b.dim() != n) {
        return fail(None, vec![], format!("mixed dimensions {n} and {}", b.dim()));
    }
    let anchor = blocks
        .iter()
        .position(|b| min_eigenvalue(b).map(|e| e > tol).unwrap_or(false));
    let Some(a0) = anchor else {
        return fail(None, vec![], "no positive definite member".into());
    };
    let base = &blocks[a0];
    let norm_sq = base.frobenius_dot(base).unwrap_or(0.0);
    let mut rho = Vec::with_capacity(m);
    for (i, b) in blocks.iter().enumerate() {
        if i == a0 {
            continue;
        }
        let r = b.frobenius_dot(base).unwrap_or(0.0) / norm_sq;
        let resid = b.max_abs_diff(&base.scale(r)).unwrap_or(f64::INFINITY);
        if resid > tol * (1.0 + b.max_abs()) {
            rho.push(r);
            return fail(
                Some(a0),
                rho,
                format!("member {i} is not a multiple of member {a0} (residual {resid:.3e})"),
            );
        }
        rho.push(r);
    }
    if n < m + 1 {
        return fail(Some(a0), rho, format!("dimension condition fails: n={n} < m+1={}", m + 1));
    }
    ScaledFamilyReport {
        passes: true,
        a0_index: Some(a0),
        rho,
        m,
        n,
        reason: format!("all members are multiples of member {a0}; n={n} >= m+1={}", m + 1),
    }
}

/// Evaluates `Σ cᵢ·Mᵢ` and reports strict positive definiteness together with
/// its smallest eigenvalue.
pub fn verify_pd_combination(matrices: &[SymmetricMatrix], coeffs: &[f64]) -> Result<(bool, f64)> {
    let sum = SymmetricMatrix::linear_combination(matrices, coeffs)?;
    let e = min_eigenvalue(&sum)?;
    Ok((e > PD_REL_TOL * (1.0 + sum.max_abs()), e))
}

/// Directions tried by [`find_pd_combination`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdSearchGrid {
    pub random_directions: usize,
    /// Try every `±1` sign vector first (only for up to 16 matrices).
    pub sign_patterns: bool,
}

impl Default for PdSearchGrid {
    fn default() -> Self {
        PdSearchGrid { random_directions: 10_000, sign_patterns: true }
    }
}

/// Returns the first coefficient vector in sweep order whose combination is
/// positive definite: sign patterns (all `+` first), then seeded unit
/// directions.
pub fn find_pd_combination(
    matrices: &[SymmetricMatrix],
    grid: PdSearchGrid,
    seed: u64,
) -> Result<Option<Vec<f64>>> {
    let k = matrices.len();
    let first = matrices.first().ok_or_else(|| Error::invalid("empty matrix list"))?;
    for m in matrices {
        check_dim(first.dim(), m.dim())?;
    }
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    if grid.sign_patterns && k <= 16 {
        for mask in 0u32..(1 << k) {
            dirs.push((0..k).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..grid.random_directions {
        let d: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let nrm = norm2(&d);
        if nrm > 0.0 {
            dirs.push(d.iter().map(|v| v / nrm).collect());
        }
    }
    let hit = dirs.into_par_iter().find_map_first(|c| match verify_pd_combination(matrices, &c) {
        Ok((true, _)) => Some(c),
        _ => None,
    });
    Ok(hit)
}

/// `y ↦ (s·yᵀQⱼy + cⱼᵀy)ⱼ` with `s` either 1 or ½.
struct QuadMap<'a> {
    quads: Vec<&'a SymmetricMatrix>,
    lins: Vec<Option<&'a [f64]>>,
    scale: f64,
    dim: usize,
}

impl QuadMap<'_> {
    fn eval(&self, y: &[f64], homogeneous: bool) -> Vec<f64> {
        self.quads
            .iter()
            .zip(&self.lins)
            .map(|(q, c)| {
                let mut v = 0.0;
                let d = q.as_row_major();
                for i in 0..self.dim {
                    let row = &d[i * self.dim..(i + 1) * self.dim];
                    v += y[i] * row.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
                }
                v *= self.scale;
                if let (false, Some(c)) = (homogeneous, c) {
                    v += c.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
                }
                v
            })
            .collect()
    }

    /// Jacobian columns (one per coordinate of `y`).
    fn jacobian_columns(&self, y: &[f64]) -> Vec<Vec<f64>> {
        let k = self.quads.len();
        let mut cols = vec![vec![0.0; k]; self.dim];
        for (j, (q, c)) in self.quads.iter().zip(&self.lins).enumerate() {
            let d = q.as_row_major();
            for i in 0..self.dim {
                let row = &d[i * self.dim..(i + 1) * self.dim];
                let mut g = 2.0 * self.scale * row.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
                if let Some(c) = c {
                    g += c[i];
                }
                cols[i][j] = g;
            }
        }
        cols
    }

    fn residual(&self, y: &[f64], target: &[f64]) -> f64 {
        let v = self.eval(y, false);
        v.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    fn levenberg_marquardt(&self, start: &[f64], target: &[f64], stop: f64) -> (Vec<f64>, f64) {
        let k = target.len();
        let mut y = start.to_vec();
        let mut res = self.residual(&y, target);
        let mut damping: f64 = 1e-3;
        for _ in 0..LM_ITERS {
            if res <= stop || damping > 1e12 {
                break;
            }
            let r: Vec<f64> = self.eval(&y, false).iter().zip(target).map(|(a, b)| a - b).collect();
            let sq = damping.sqrt();
            let cols: Vec<Vec<f64>> = self
                .jacobian_columns(&y)
                .into_iter()
                .enumerate()
                .map(|(i, mut c)| {
                    c.resize(k + self.dim, 0.0);
                    c[k + i] = sq;
                    c
                })
                .collect();
            let mut rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            rhs.resize(k + self.dim, 0.0);
            let Ok((step, _)) = least_squares_solve(&cols, &rhs) else {
                break;
            };
            let cand: Vec<f64> = y.iter().zip(&step).map(|(a, b)| a + b).collect();
            let cand_res = self.residual(&cand, target);
            if cand_res < res {
                y = cand;
                res = cand_res;
                damping = (damping / 3.0).max(1e-15);
            } else {
                damping *= 4.0;
            }
        }
        (y, res)
    }

    /// Best preimage found for `target`: Levenberg–Marquardt from the given
    /// starts, then from the best points of a grid over the search box.
    fn preimage_search(&self, target: &[f64], starts: &[Vec<f64>], resolution: usize) -> (Vec<f64>, f64) {
        let thr = PREIMAGE_REL_TOL * norm2(target).max(1.0);
        let stop = 1e-3 * thr;
        let mut best = (vec![0.0; self.dim], self.residual(&vec![0.0; self.dim], target));
        let consider = |cand: (Vec<f64>, f64), best: &mut (Vec<f64>, f64)| {
            if cand.1 < best.1 {
                *best = cand;
            }
        };
        for s in starts {
            consider(self.levenberg_marquardt(s, target, stop), &mut best);
            if best.1 <= thr {
                return best;
            }
        }
        let total = resolution.pow(self.dim as u32);
        let coord = |i: usize| {
            if i == resolution - 1 {
                PREIMAGE_BOX
            } else {
                -PREIMAGE_BOX + 2.0 * PREIMAGE_BOX * i as f64 / (resolution - 1) as f64
            }
        };
        let mut kept: Vec<(f64, usize)> = Vec::with_capacity(GRID_KEEP + 1);
        let mut y = vec![0.0; self.dim];
        for idx in 0..total {
            let mut rem = idx;
            for yi in y.iter_mut().rev() {
                *yi = coord(rem % resolution);
                rem /= resolution;
            }
            let r = self.residual(&y, target);
            if kept.len() < GRID_KEEP || r < kept[kept.len() - 1].0 {
                let pos = kept.partition_point(|&(v, _)| v <= r);
                kept.insert(pos, (r, idx));
                kept.truncate(GRID_KEEP);
            }
        }
        for &(_, idx) in &kept {
            let mut rem = idx;
            let mut s = vec![0.0; self.dim];
            for si in s.iter_mut().rev() {
                *si = coord(rem % resolution);
                rem /= resolution;
            }
            consider(self.levenberg_marquardt(&s, target, stop), &mut best);
            if best.1 <= thr {
                break;
            }
        }
        best
    }
}

/// Trial `t` of a falsifier: structured sign-flip pairs first, then seeded
/// uniform pairs in `[−1, 1]ᵈ`.
fn trial_pair(t: usize, dim: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let ones = vec![1.0; dim];
    if t < dim {
        let mut flipped = ones.clone();
        flipped[t] = -1.0;
        return (ones, flipped);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t as u64);
    let a = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let b = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
    (a, b)
}

fn cheap_starts(a: &[f64], b: &[f64]) -> Vec<Vec<f64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    vec![
        a.to_vec(),
        b.to_vec(),
        a.iter().zip(b).map(|(x, y)| s * (x + y)).collect(),
        a.iter().zip(b).map(|(x, y)| s * (x - y)).collect(),
        a.iter().zip(b).map(|(x, y)| x + y).collect(),
    ]
}

/// Evidence that a quadratic image is not convex.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityWitness {
    pub point_a: Vec<f64>,
    pub point_b: Vec<f64>,
    pub preimage_a: Vec<f64>,
    pub preimage_b: Vec<f64>,
    pub midpoint: Vec<f64>,
    /// Smallest `‖F(y) − midpoint‖` reached by the search.
    pub best_residual: f64,
    pub preimage_search_resolution: usize,
    pub trial: usize,
}

fn check_falsifier_inputs(dim: usize, dim_limit: usize, resolution: usize) -> Result<()> {
    if dim > dim_limit {
        return Err(Error::Refused(format!(
            "dimension {dim} exceeds the falsifier limit {dim_limit}"
        )));
    }
    if resolution < MIN_PREIMAGE_RESOLUTION {
        return Err(Error::invalid(format!(
            "preimage resolution must be at least {MIN_PREIMAGE_RESOLUTION}, got {resolution}"
        )));
    }
    Ok(())
}

/// Searches for two points of the image of `y ↦ (yᵀMⱼy)ⱼ` whose midpoint has
/// no preimage at the given grid resolution.
///
/// `None` means no witness was found; it is not a proof of convexity.
pub fn falsify_image_convexity(
    matrices: &[SymmetricMatrix],
    dim_limit: usize,
    grid_resolution: usize,
    trials: usize,
    seed: u64,
) -> Result<Option<ConvexityWitness>> {
    let first = matrices.first().ok_or_else(|| Error::invalid("empty matrix list"))?;
    let dim = first.dim();
    for m in matrices {
        check_dim(dim, m.dim())?;
    }
    check_falsifier_inputs(dim, dim_limit, grid_resolution)?;
    let map = QuadMap {
        quads: matrices.iter().collect(),
        lins: vec![None; matrices.len()],
        scale: 1.0,
        dim,
    };
    let thr_for = |t: &[f64]| PREIMAGE_REL_TOL * norm2(t).max(1.0);
    let found = (0..dim + trials).into_par_iter().find_map_first(|t| {
        let (ya, yb) = trial_pair(t, dim, seed);
        let pa = map.eval(&ya, true);
        let pb = map.eval(&yb, true);
        let mid: Vec<f64> = pa.iter().zip(&pb).map(|(a, b)| 0.5 * (a + b)).collect();
        let (_, res) = map.preimage_search(&mid, &cheap_starts(&ya, &yb), grid_resolution);
        (res > thr_for(&mid)).then(|| ConvexityWitness {
            point_a: pa,
            point_b: pb,
            preimage_a: ya,
            preimage_b: yb,
            midpoint: mid,
            best_residual: res,
            preimage_search_resolution: grid_resolution,
            trial: t,
        })
    });
    Ok(found)
}

/// A sum `u + v` with `u` in the inhomogeneous image and `v` in the
/// homogeneous image that was not found in the inhomogeneous image.
#[derive(Debug, Clone, PartialEq)]
pub struct SumViolation {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub x_u: Vec<f64>,
    pub x_v: Vec<f64>,
    pub sum: Vec<f64>,
    pub best_residual: f64,
    pub trial: usize,
}

/// Tests the identity "inhomogeneous image + homogeneous image =
/// inhomogeneous image" for `F(x) = (½xᵀQⱼx + cⱼᵀx)ⱼ`.
///
/// `u = F(x_u)`, `v = F̄(x_v)` with `F̄` dropping the linear terms; the sum is
/// searched for a preimage under `F` at [`DEFAULT_PREIMAGE_RESOLUTION`].
pub fn falsify_sum_invariance(
    maps: &[(SymmetricMatrix, Vec<f64>)],
    trials: usize,
    seed: u64,
) -> Result<Option<SumViolation>> {
    let (q0, _) = maps.first().ok_or_else(|| Error::invalid("empty quadratic list"))?;
    let dim = q0.dim();
    for (q, c) in maps {
        check_dim(dim, q.dim())?;
        check_dim(dim, c.len())?;
    }
    check_falsifier_inputs(dim, DEFAULT_DIM_LIMIT, DEFAULT_PREIMAGE_RESOLUTION)?;
    let map = QuadMap {
        quads: maps.iter().map(|(q, _)| q).collect(),
        lins: maps.iter().map(|(_, c)| Some(c.as_slice())).collect(),
        scale: 0.5,
        dim,
    };
    let found = (0..dim + trials).into_par_iter().find_map_first(|t| {
        let (xu, xv) = trial_pair(t, dim, seed);
        let u = map.eval(&xu, false);
        let v = map.eval(&xv, true);
        let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let (_, res) = map.preimage_search(&sum, &cheap_starts(&xu, &xv), DEFAULT_PREIMAGE_RESOLUTION);
        (res > PREIMAGE_REL_TOL * norm2(&sum).max(1.0)).then(|| SumViolation {
            u,
            v,
            x_u: xu,
            x_v: xv,
            sum,
            best_residual: res,
            trial: t,
        })
    });
    Ok(found)
}
