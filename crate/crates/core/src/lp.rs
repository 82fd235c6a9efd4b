//! Dense two-phase primal simplex.
//!
//! Solves `max c'x  s.t.  A x <= b, x >= l` with `l = 0` by default. The
//! fast-adaptive baseline solves one of these per fading slot, and the
//! cutting-plane solver is validated against it. Dantzig pricing with a
//! switch to Bland's rule after a run of degenerate pivots; a stall is an
//! explicit error, never a silently wrong answer.

use crate::{Error, Result};
use crate::channel::{GainSample, SystemParams, UserProfile};

/// `max objective . x` subject to `a_ub x <= b_ub`, `x >= lower_bounds`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    /// Row-major `m_rows x n_vars`.
    pub a_ub: Vec<f64>,
    pub b_ub: Vec<f64>,
    /// Per-variable lower bounds; `None` means all zero.
    pub lower_bounds: Option<Vec<f64>>,
}

impl LinearProgram {
    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_rows(&self) -> usize {
        self.b_ub.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a_ub[i * self.n_vars()..(i + 1) * self.n_vars()]
    }

    pub fn validate(&self) -> Result<()> {
        if self.objective.is_empty() {
            return Err(Error::InvalidInput("LP needs at least one variable".into()));
        }
        if self.a_ub.len() != self.n_rows() * self.n_vars() {
            return Err(Error::InvalidInput("LP constraint matrix shape mismatch".into()));
        }
        let finite = self.objective.iter().chain(&self.a_ub).chain(&self.b_ub);
        if finite.clone().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("LP data must be finite".into()));
        }
        if let Some(l) = &self.lower_bounds {
            if l.len() != self.n_vars() || l.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("bad lower bounds".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
    /// `max(0, a_i x - b_i)` over rows, plus bound violations.
    pub primal_residual: f64,
    /// Most negative dual variable / reduced-cost violation.
    pub dual_residual: f64,
    /// Largest complementary-slackness product from original data.
    pub cs_residual: f64,
}

impl LpSolution {
    fn non_optimal(status: LpStatus, n: usize) -> Self {
        LpSolution {
            status,
            x: vec![0.0; n],
            objective_value: 0.0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            cs_residual: 0.0,
        }
    }
}

/// Per-slot LP of the fast-adaptive baseline: maximize the instantaneous
/// throughput subject to every user's rate demand and the per-subcarrier
/// airtime budget. Variables are `x[k * N + n]`.
pub fn build_fast_lp(
    gains: &GainSample,
    users: &[UserProfile],
    params: &SystemParams,
) -> LinearProgram {
    let k_users = users.len();
    let n_sc = params.n_subcarriers;
    let nv = k_users * n_sc;
    let mut rates = Vec::with_capacity(nv);
    for k in 0..k_users {
        for n in 0..n_sc {
            rates.push(crate::channel::instantaneous_rate(gains.get(k, n), params));
        }
    }

    let n_rows = k_users + n_sc;
    let mut a_ub = vec![0.0; n_rows * nv];
    let mut b_ub = vec![0.0; n_rows];
    // rate demands: -sum_n r_kn x_kn <= -q_k
    for k in 0..k_users {
        for n in 0..n_sc {
            a_ub[k * nv + k * n_sc + n] = -rates[k * n_sc + n];
        }
        b_ub[k] = -users[k].min_rate;
    }
    // airtime budget: sum_k x_kn <= 1
    for n in 0..n_sc {
        let row = k_users + n;
        for k in 0..k_users {
            a_ub[row * nv + k * n_sc + n] = 1.0;
        }
        b_ub[row] = 1.0;
    }

    LinearProgram {
        objective: rates,
        a_ub,
        b_ub,
        lower_bounds: None,
    }
}

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const BLAND_AFTER: usize = 30;

struct Tableau {
    n_vars: usize,
    n_slack: usize,
    n_art: usize,
    n_rows: usize,
    /// Rows of the equality system, each `n_total + 1` wide (rhs last).
    rows: Vec<f64>,
    /// Reduced-cost row, `n_total + 1` wide (objective value last, negated).
    cost: Vec<f64>,
    basis: Vec<usize>,
    /// +1 if the original row kept its orientation, -1 if negated.
    row_sign: Vec<f64>,
    /// Column index of the identity column of each row (slack or artificial).
    identity_col: Vec<usize>,
    degenerate_streak: usize,
    pivots: usize,
}

impl Tableau {
    fn n_total(&self) -> usize {
        self.n_vars + self.n_slack + self.n_art
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.rows[r * (self.n_total() + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.n_total())
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.n_total() + 1;
        let piv = self.rows[r * width + c];
        let inv = 1.0 / piv;
        for j in 0..width {
            self.rows[r * width + j] *= inv;
        }
        for i in 0..self.n_rows {
            if i == r {
                continue;
            }
            let factor = self.rows[i * width + c];
            if factor != 0.0 {
                for j in 0..width {
                    self.rows[i * width + j] -= factor * self.rows[r * width + j];
                }
                self.rows[i * width + c] = 0.0;
            }
        }
        let factor = self.cost[c];
        if factor != 0.0 {
            for j in 0..width {
                self.cost[j] -= factor * self.rows[r * width + j];
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Rebuilds the reduced-cost row for the minimization costs `c_min`
    /// (length `n_total`), given the current basis.
    fn load_costs(&mut self, c_min: &[f64]) {
        let width = self.n_total() + 1;
        self.cost = c_min.to_vec();
        self.cost.push(0.0);
        for r in 0..self.n_rows {
            let cb = c_min[self.basis[r]];
            if cb != 0.0 {
                for j in 0..width {
                    self.cost[j] -= cb * self.rows[r * width + j];
                }
            }
        }
        for r in 0..self.n_rows {
            self.cost[self.basis[r]] = 0.0;
        }
    }

    /// Runs simplex iterations on the loaded costs. `allowed` masks columns
    /// permitted to enter. Returns `Ok(true)` at optimum, `Ok(false)` when
    /// unbounded.
    fn iterate(&mut self, allowed: &[bool], max_pivots: usize) -> Result<bool> {
        loop {
            if self.pivots > max_pivots {
                return Err(Error::SimplexStall {
                    iterations: self.pivots,
                });
            }
            let bland = self.degenerate_streak >= BLAND_AFTER;
            let mut enter: Option<usize> = None;
            let mut best = -COST_TOL;
            for j in 0..self.n_total() {
                if !allowed[j] {
                    continue;
                }
                let d = self.cost[j];
                if d < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(col) = enter else {
                return Ok(true);
            };

            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for r in 0..self.n_rows {
                let coef = self.at(r, col);
                if coef > PIVOT_TOL {
                    let ratio = self.rhs(r) / coef;
                    let better = ratio < best_ratio - 1e-12
                        || (ratio < best_ratio + 1e-12
                            && leave.is_some_and(|l| self.basis[r] < self.basis[l]));
                    if better {
                        best_ratio = ratio;
                        leave = Some(r);
                    }
                }
            }
            let Some(row) = leave else {
                return Ok(false);
            };

            if best_ratio.abs() <= 1e-12 {
                self.degenerate_streak += 1;
            } else {
                self.degenerate_streak = 0;
            }
            self.pivot(row, col);
        }
    }
}

/// Solves the LP with the two-phase primal simplex.
pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let nv = lp.n_vars();
    let m = lp.n_rows();

    // Shift out lower bounds: y = x - l >= 0.
    let lower = lp
        .lower_bounds
        .clone()
        .unwrap_or_else(|| vec![0.0; nv]);
    let mut b = lp.b_ub.clone();
    for i in 0..m {
        let shift: f64 = lp.row(i).iter().zip(&lower).map(|(a, l)| a * l).sum();
        b[i] -= shift;
    }

    let n_slack = m;
    let negated: Vec<bool> = b.iter().map(|&bi| bi < 0.0).collect();
    let n_art = negated.iter().filter(|&&v| v).count();
    let n_total = nv + n_slack + n_art;
    let width = n_total + 1;

    let mut rows = vec![0.0; m * width];
    let mut basis = vec![0usize; m];
    let mut row_sign = vec![1.0; m];
    let mut identity_col = vec![0usize; m];
    let mut art = nv + n_slack;
    for i in 0..m {
        let sign = if negated[i] { -1.0 } else { 1.0 };
        row_sign[i] = sign;
        for j in 0..nv {
            rows[i * width + j] = sign * lp.row(i)[j];
        }
        rows[i * width + nv + i] = sign;
        rows[i * width + n_total] = sign * b[i];
        if negated[i] {
            rows[i * width + art] = 1.0;
            basis[i] = art;
            identity_col[i] = art;
            art += 1;
        } else {
            basis[i] = nv + i;
            identity_col[i] = nv + i;
        }
    }

    let mut t = Tableau {
        n_vars: nv,
        n_slack,
        n_art,
        n_rows: m,
        rows,
        cost: vec![],
        basis,
        row_sign,
        identity_col,
        degenerate_streak: 0,
        pivots: 0,
    };
    let max_pivots = 500 * (m + nv) + 5000;

    // Phase 1: minimize the sum of artificials.
    if n_art > 0 {
        let mut c1 = vec![0.0; n_total];
        for j in nv + n_slack..n_total {
            c1[j] = 1.0;
        }
        t.load_costs(&c1);
        let allowed = vec![true; n_total];
        if !t.iterate(&allowed, max_pivots)? {
            return Err(Error::SimplexStall {
                iterations: t.pivots,
            });
        }
        let phase1_obj = -t.cost[n_total];
        let scale = b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        if phase1_obj > 1e-7 * scale {
            return Ok(LpSolution::non_optimal(LpStatus::Infeasible, nv));
        }
        // Pivot any still-basic artificial out where possible.
        for r in 0..m {
            if t.basis[r] >= nv + n_slack {
                if let Some(col) =
                    (0..nv + n_slack).find(|&j| t.at(r, j).abs() > PIVOT_TOL)
                {
                    t.pivot(r, col);
                }
            }
        }
    }

    // Phase 2: minimize -objective over structural and slack columns.
    let mut c2 = vec![0.0; n_total];
    for j in 0..nv {
        c2[j] = -lp.objective[j];
    }
    t.load_costs(&c2);
    let mut allowed = vec![true; n_total];
    for a in allowed.iter_mut().skip(nv + n_slack) {
        *a = false;
    }
    t.degenerate_streak = 0;
    if !t.iterate(&allowed, max_pivots)? {
        return Ok(LpSolution::non_optimal(LpStatus::Unbounded, nv));
    }

    // Primal solution in original coordinates.
    let mut x = lower;
    for r in 0..m {
        if t.basis[r] < nv {
            x[t.basis[r]] += t.rhs(r);
        }
    }
    let objective_value: f64 = lp
        .objective
        .iter()
        .zip(&x)
        .map(|(c, v)| c * v)
        .sum::<f64>();

    // Duals of the original `<=` rows. Each row's identity column (its
    // artificial, or its slack when the row kept orientation) reads off a
    // column of the basis inverse; the row sign maps the equality
    // multiplier back to the original orientation and the leading minus
    // converts min(-c) multipliers to the max convention.
    let mut y = vec![0.0; m];
    for i in 0..m {
        let mut acc = 0.0;
        for r in 0..m {
            let cb = c2[t.basis[r]];
            if cb != 0.0 {
                acc += cb * t.at(r, t.identity_col[i]);
            }
        }
        y[i] = -acc * t.row_sign[i];
    }

    // Certification against the original data.
    let mut primal_residual = 0.0f64;
    let mut cs_residual = 0.0f64;
    for i in 0..m {
        let ax: f64 = lp.row(i).iter().zip(&x).map(|(a, v)| a * v).sum();
        let slack = lp.b_ub[i] - ax;
        primal_residual = primal_residual.max(-slack);
        cs_residual = cs_residual.max((y[i] * slack).abs());
    }
    let mut dual_residual = 0.0f64;
    for i in 0..m {
        dual_residual = dual_residual.max(-y[i]);
    }
    for j in 0..nv {
        let ya: f64 = (0..m).map(|i| y[i] * lp.row(i)[j]).sum();
        let reduced = ya - lp.objective[j];
        dual_residual = dual_residual.max(-reduced);
        cs_residual = cs_residual.max((reduced * (x[j] - lower_of(lp, j))).abs());
    }

    let scale = 1.0 + objective_value.abs();
    if primal_residual > 1e-6 * scale || !objective_value.is_finite() {
        return Err(Error::SimplexStall {
            iterations: t.pivots,
        });
    }

    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective_value,
        primal_residual,
        dual_residual,
        cs_residual,
    })
}

fn lower_of(lp: &LinearProgram, j: usize) -> f64 {
    lp.lower_bounds.as_ref().map_or(0.0, |l| l[j])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::vertex_enumeration_max;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(n_users: usize, n_subcarriers: usize) -> SystemParams {
        SystemParams {
            n_subcarriers,
            n_users,
            bandwidth_per_subcarrier: 1.0,
            tx_power_per_subcarrier: 1.0,
            noise_psd: 1.0,
            capacity_gap: 1.0,
            slot_length: 1e-3,
            window_length: 1.0,
            rng_seed: 0,
        }
    }

    fn user(sigma: f64, q: f64) -> UserProfile {
        UserProfile {
            avg_gain: sigma,
            min_rate: q,
            outage_tolerance: 0.1,
            distance: None,
            shadowing: None,
        }
    }

    #[test]
    fn box_optimum() {
        let lp = LinearProgram {
            objective: vec![1.0, 1.0],
            a_ub: vec![1.0, 0.0, 0.0, 1.0],
            b_ub: vec![1.0, 1.0],
            lower_bounds: None,
        };
        let sol = simplex_solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value - 2.0).abs() < 1e-12);
        assert!((sol.x[0] - 1.0).abs() < 1e-12 && (sol.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_demand() {
        // x <= 1 but we ask for x >= 3 (i.e. -x <= -3)
        let lp = LinearProgram {
            objective: vec![1.0],
            a_ub: vec![1.0, -1.0],
            b_ub: vec![1.0, -3.0],
            lower_bounds: None,
        };
        assert_eq!(simplex_solve(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let lp = LinearProgram {
            objective: vec![1.0, 0.0],
            a_ub: vec![0.0, 1.0],
            b_ub: vec![1.0],
            lower_bounds: None,
        };
        assert_eq!(simplex_solve(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn lower_bounds_shift() {
        // max x0 + x1, x0 + x1 <= 4, x >= [1, 2]
        let lp = LinearProgram {
            objective: vec![1.0, 1.0],
            a_ub: vec![1.0, 1.0],
            b_ub: vec![4.0],
            lower_bounds: Some(vec![1.0, 2.0]),
        };
        let sol = simplex_solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value - 4.0).abs() < 1e-12);
        assert!(sol.x[0] >= 1.0 - 1e-12 && sol.x[1] >= 2.0 - 1e-12);
    }

    #[test]
    fn fast_lp_shapes_and_saturation() {
        let p = params(1, 3);
        let users = vec![user(1.0, 0.5)];
        let gains = GainSample::new(1, 3, vec![1.0, 2.0, 3.0]);
        let lp = build_fast_lp(&gains, &users, &p);
        assert_eq!(lp.n_vars(), 3);
        assert_eq!(lp.n_rows(), 1 + 3);
        let sol = simplex_solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        // single user with an easy demand saturates every subcarrier
        for v in &sol.x {
            assert!((v - 1.0).abs() < 1e-9, "x = {:?}", sol.x);
        }
    }

    #[test]
    fn fast_lp_infeasible_when_demand_excessive() {
        let p = params(1, 2);
        let users = vec![user(1.0, 1e6)];
        let gains = GainSample::new(1, 2, vec![1.0, 1.0]);
        let lp = build_fast_lp(&gains, &users, &p);
        assert_eq!(simplex_solve(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn random_lps_match_vertex_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        let mut solved = 0;
        for _ in 0..100 {
            let (n, m) = (10usize, 6usize);
            let mut a = vec![0.0; m * n];
            for v in a.iter_mut() {
                *v = rng.random::<f64>() * 2.0 - 0.6;
            }
            // keep the feasible set bounded: add box rows x_j <= 2
            let mut a_full = a.clone();
            let mut b = Vec::with_capacity(m + n);
            let x0 = vec![0.3; n];
            for i in 0..m {
                let ax: f64 = (0..n).map(|j| a[i * n + j] * x0[j]).sum();
                b.push(ax + 0.3 + rng.random::<f64>());
            }
            for j in 0..n {
                let mut row = vec![0.0; n];
                row[j] = 1.0;
                a_full.extend_from_slice(&row);
                b.push(2.0);
            }
            let lp = LinearProgram {
                objective: (0..n).map(|_| rng.random::<f64>()).collect(),
                a_ub: a_full,
                b_ub: b,
                lower_bounds: None,
            };
            let sol = simplex_solve(&lp).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal);
            let (_, brute) = vertex_enumeration_max(&lp).expect("bounded feasible instance");
            assert!(
                (sol.objective_value - brute).abs() <= 1e-8 * (1.0 + brute.abs()),
                "simplex {} vs enumeration {brute}",
                sol.objective_value
            );
            assert!(sol.primal_residual <= 1e-9);
            assert!(sol.cs_residual <= 1e-7 * (1.0 + brute.abs()));
            assert!(sol.dual_residual <= 1e-7 * (1.0 + brute.abs()));
            solved += 1;
        }
        assert_eq!(solved, 100);
    }

    #[test]
    fn fast_lp_instance_matches_enumeration() {
        let p = params(2, 3);
        let users = vec![user(1.0, 1.2), user(1.0, 0.8)];
        let gains = GainSample::new(2, 3, vec![1.0, 0.4, 2.5, 0.7, 1.8, 0.2]);
        let lp = build_fast_lp(&gains, &users, &p);
        let sol = simplex_solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        let (_, brute) = vertex_enumeration_max(&lp).expect("feasible instance");
        assert!((sol.objective_value - brute).abs() <= 1e-8 * (1.0 + brute.abs()));
    }
}
