//! Brute-force reference computations for tests.
//!
//! Everything here is deliberately independent of the production solvers it
//! checks: the LP oracle enumerates basic solutions instead of pivoting,
//! and the analytic-center oracle scans the potential on a refining grid
//! instead of taking Newton steps. Test code only; not tuned for size.

use nalgebra::{DMatrix, DVector};

use crate::accpm::Polytope;
use crate::lp::LinearProgram;

/// Exhaustive vertex enumeration for `max c'x, Ax <= b, x >= l`.
///
/// Visits every choice of `n` active constraints among the rows and bounds,
/// solves the square system, keeps feasible solutions, and returns the best
/// `(x, objective)`. Only valid on bounded feasible LPs; `None` when no
/// feasible vertex exists.
pub fn vertex_enumeration_max(lp: &LinearProgram) -> Option<(Vec<f64>, f64)> {
    let n = lp.n_vars();
    let m = lp.n_rows();
    let lower = lp.lower_bounds.clone().unwrap_or_else(|| vec![0.0; n]);

    // candidate active rows: all inequality rows, then the n lower bounds
    let total = m + n;
    let row_of = |idx: usize| -> (Vec<f64>, f64) {
        if idx < m {
            (lp.row(idx).to_vec(), lp.b_ub[idx])
        } else {
            let j = idx - m;
            let mut r = vec![0.0; n];
            r[j] = -1.0;
            (r, -lower[j])
        }
    };

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut combo: Vec<usize> = (0..n).collect();

    loop {
        let mut a = DMatrix::zeros(n, n);
        let mut rhs = DVector::zeros(n);
        for (r, &idx) in combo.iter().enumerate() {
            let (row, b) = row_of(idx);
            for c in 0..n {
                a[(r, c)] = row[c];
            }
            rhs[r] = b;
        }
        if let Some(x) = a.lu().solve(&rhs) {
            if x.iter().all(|v| v.is_finite()) {
                let feasible = (0..total).all(|idx| {
                    let (row, b) = row_of(idx);
                    let ax: f64 = row.iter().zip(x.iter()).map(|(a, v)| a * v).sum();
                    ax <= b + 1e-9
                });
                if feasible {
                    let obj: f64 = lp.objective.iter().zip(x.iter()).map(|(c, v)| c * v).sum();
                    if best.as_ref().is_none_or(|(_, cur)| obj > *cur) {
                        best = Some((x.iter().copied().collect(), obj));
                    }
                }
            }
        }

        // next lexicographic n-combination of 0..total
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if combo[i] != i + total - n {
                combo[i] += 1;
                for j in i + 1..n {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Log-slack potential of a point, `-inf` outside the polytope.
pub fn potential_at(polytope: &Polytope, x: &[f64]) -> f64 {
    polytope
        .slacks(x)
        .iter()
        .map(|&s| if s > 0.0 { s.ln() } else { f64::NEG_INFINITY })
        .sum()
}

/// Grid-search maximizer of the log-slack potential inside a bounding box,
/// refined around the incumbent. Returns `(argmax, final grid spacing)`.
pub fn potential_grid_argmax(
    polytope: &Polytope,
    lo: &[f64],
    hi: &[f64],
    points_per_axis: usize,
    rounds: usize,
) -> (Vec<f64>, f64) {
    let dim = lo.len();
    assert_eq!(dim, polytope.n_vars());
    assert!(dim <= 3, "grid search oracle is for tiny dimensions");

    let mut lo = lo.to_vec();
    let mut hi = hi.to_vec();
    let mut best_x = vec![0.0; dim];
    let mut best_v = f64::NEG_INFINITY;
    let mut spacing = 0.0;

    for _ in 0..rounds {
        let steps: Vec<f64> = (0..dim)
            .map(|d| (hi[d] - lo[d]) / (points_per_axis - 1) as f64)
            .collect();
        spacing = steps.iter().cloned().fold(0.0, f64::max);
        let mut idx = vec![0usize; dim];
        loop {
            let x: Vec<f64> = (0..dim).map(|d| lo[d] + steps[d] * idx[d] as f64).collect();
            let v = potential_at(polytope, &x);
            if v > best_v {
                best_v = v;
                best_x = x;
            }
            let mut d = 0;
            loop {
                if d == dim {
                    break;
                }
                idx[d] += 1;
                if idx[d] < points_per_axis {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == dim {
                break;
            }
        }
        // shrink the box around the incumbent for the next round
        for d in 0..dim {
            let half = 1.5 * steps[d];
            lo[d] = best_x[d] - half;
            hi[d] = best_x[d] + half;
        }
    }

    (best_x, spacing)
}
