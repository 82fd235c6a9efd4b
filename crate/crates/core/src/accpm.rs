//! Analytic-center cutting-plane solver.
//!
//! The feasible set of the allocation problem sits inside a localization
//! polytope that shrinks one oracle answer at a time: query its analytic
//! center, ask the separation oracle, and append either feasibility cuts
//! (one per violated user, through the query point) or a single optimality
//! cut along the negated objective gradient. Centers are recomputed by
//! damped Newton steps warm-started from a point nudged off the new cut
//! faces, so each iteration costs a handful of Newton steps.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::bernstein::{self, Allocation, AllocationMode, SterConfig};
use crate::channel::{SystemParams, UserProfile};
use crate::lp::{self, LinearProgram, LpStatus};
use crate::{Error, Result};

/// Inequality system `A x <= b` with unit-norm rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    n_vars: usize,
    rows: Vec<f64>,
    b: Vec<f64>,
}

impl Polytope {
    pub fn new(n_vars: usize) -> Self {
        assert!(n_vars >= 1);
        Polytope {
            n_vars,
            rows: Vec::new(),
            b: Vec::new(),
        }
    }

    /// Base polytope of the full problem: per-subcarrier airtime budgets
    /// plus nonnegativity, `N + N K` rows over `N K` variables.
    pub fn base_full(n_users: usize, n_subcarriers: usize) -> Self {
        let nv = n_users * n_subcarriers;
        let mut p = Polytope::new(nv);
        for n in 0..n_subcarriers {
            let mut row = vec![0.0; nv];
            for k in 0..n_users {
                row[k * n_subcarriers + n] = 1.0;
            }
            p.add_cut(&row, 1.0).expect("base row");
        }
        for j in 0..nv {
            let mut row = vec![0.0; nv];
            row[j] = -1.0;
            p.add_cut(&row, 0.0).expect("base row");
        }
        p
    }

    /// Base polytope of the reduced problem: one airtime budget row plus
    /// nonnegativity, `1 + K` rows over `K` variables.
    pub fn base_reduced(n_users: usize) -> Self {
        let mut p = Polytope::new(n_users);
        p.add_cut(&vec![1.0; n_users], 1.0).expect("base row");
        for j in 0..n_users {
            let mut row = vec![0.0; n_users];
            row[j] = -1.0;
            p.add_cut(&row, 0.0).expect("base row");
        }
        p
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_rows(&self) -> usize {
        self.b.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.n_vars..(i + 1) * self.n_vars]
    }

    pub fn offset(&self, i: usize) -> f64 {
        self.b[i]
    }

    /// Appends `normal . x <= offset`, scaled to unit norm.
    pub fn add_cut(&mut self, normal: &[f64], offset: f64) -> Result<()> {
        assert_eq!(normal.len(), self.n_vars);
        let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 1e-300 && norm.is_finite() && offset.is_finite()) {
            return Err(Error::NonFinite("degenerate cut normal".into()));
        }
        self.rows.extend(normal.iter().map(|v| v / norm));
        self.b.push(offset / norm);
        Ok(())
    }

    pub fn slacks(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_rows())
            .map(|i| self.b[i] - dot(self.row(i), x))
            .collect()
    }

    pub fn min_slack(&self, x: &[f64]) -> f64 {
        self.slacks(x).into_iter().fold(f64::INFINITY, f64::min)
    }

    /// A strictly interior point found by maximizing the Euclidean margin
    /// with the simplex method (variables split into positive parts).
    pub fn interior_point(&self) -> Result<Vec<f64>> {
        let nv = self.n_vars;
        let m = self.n_rows();
        let total = 2 * nv + 1; // x+, x-, margin
        let mut a = vec![0.0; (m + 1) * total];
        let mut b = vec![0.0; m + 1];
        for i in 0..m {
            for j in 0..nv {
                let v = self.row(i)[j];
                a[i * total + j] = v;
                a[i * total + nv + j] = -v;
            }
            a[i * total + 2 * nv] = 1.0;
            b[i] = self.b[i];
        }
        // cap the margin so the LP is bounded even for huge polytopes
        a[m * total + 2 * nv] = 1.0;
        b[m] = 1.0;
        let mut objective = vec![0.0; total];
        objective[2 * nv] = 1.0;
        let sol = lp::simplex_solve(&LinearProgram {
            objective,
            a_ub: a,
            b_ub: b,
            lower_bounds: None,
        })?;
        if sol.status != LpStatus::Optimal || sol.objective_value <= 1e-10 {
            return Err(Error::EmptyInterior);
        }
        Ok((0..nv).map(|j| sol.x[j] - sol.x[nv + j]).collect())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// An approximate analytic center with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterState {
    pub point: Vec<f64>,
    pub slacks: Vec<f64>,
    /// Log-slack sum at the point.
    pub potential: f64,
    /// Newton decrement at exit.
    pub newton_decrement: f64,
}

/// Damped Newton maximization of the log-slack potential.
///
/// A warm start must be strictly feasible; without one a max-margin LP
/// finds a starting point or proves the interior empty.
pub fn analytic_center(
    polytope: &Polytope,
    warm_start: Option<&CenterState>,
    tol: f64,
) -> Result<CenterState> {
    let m = polytope.n_vars();
    let mut x = match warm_start {
        Some(state) => state.point.clone(),
        None => polytope.interior_point()?,
    };
    let mut slacks = polytope.slacks(&x);
    if slacks.iter().any(|&s| s <= 0.0) {
        return Err(if warm_start.is_some() {
            Error::InvalidInput("warm start is not strictly feasible".into())
        } else {
            Error::EmptyInterior
        });
    }

    let potential = |s: &[f64]| s.iter().map(|v| v.ln()).sum::<f64>();
    let mut decrement = f64::INFINITY;

    for _ in 0..500 {
        // gradient and Hessian of -sum ln s
        let mut grad = DVector::zeros(m);
        let mut hess = DMatrix::zeros(m, m);
        for i in 0..polytope.n_rows() {
            let row = polytope.row(i);
            let d = 1.0 / slacks[i];
            let d2 = d * d;
            for a in 0..m {
                grad[a] += row[a] * d;
                for b in a..m {
                    hess[(a, b)] += d2 * row[a] * row[b];
                }
            }
        }
        for a in 0..m {
            for b in 0..a {
                hess[(a, b)] = hess[(b, a)];
            }
        }

        let chol = match Cholesky::new(hess.clone()) {
            Some(c) => c,
            None => {
                let ridge = 1e-12 * (hess.trace() / m as f64 + 1.0);
                for a in 0..m {
                    hess[(a, a)] += ridge;
                }
                Cholesky::new(hess).ok_or_else(|| {
                    Error::NonFinite("singular Hessian in analytic center".into())
                })?
            }
        };
        let step = -chol.solve(&grad);
        let lambda_sq = -grad.dot(&step);
        decrement = lambda_sq.max(0.0).sqrt();
        if decrement <= tol {
            break;
        }

        // cap the step inside the polytope, then backtrack on the potential
        let mut t_max = f64::INFINITY;
        for i in 0..polytope.n_rows() {
            let along = dot(polytope.row(i), step.as_slice());
            if along > 0.0 {
                t_max = t_max.min(slacks[i] / along);
            }
        }
        let mut t = (0.995 * t_max).min(1.0);
        let phi0 = -potential(&slacks);
        let mut accepted = false;
        while t > 1e-18 {
            let cand: Vec<f64> = x
                .iter()
                .zip(step.as_slice())
                .map(|(xi, si)| xi + t * si)
                .collect();
            let s_cand = polytope.slacks(&cand);
            if s_cand.iter().all(|&s| s > 0.0) {
                let phi = -potential(&s_cand);
                if phi <= phi0 - 0.25 * t * lambda_sq * lambda_sq.signum() {
                    x = cand;
                    slacks = s_cand;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    Ok(CenterState {
        potential: potential(&slacks),
        point: x,
        slacks,
        newton_decrement: decrement,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutKind {
    Feasibility,
    Optimality,
}

/// What the separation oracle returns for one query point.
#[derive(Debug, Clone, PartialEq)]
pub struct CutResponse {
    pub kind: CutKind,
    /// Unit normals of the cuts to append.
    pub normals: Vec<Vec<f64>>,
    /// Matching offsets; every cut passes through the query point.
    pub offsets: Vec<f64>,
    /// Violated users (empty for an optimality cut).
    pub violated_users: Vec<usize>,
}

impl CutResponse {
    fn through_point(kind: CutKind, raw_normals: Vec<Vec<f64>>, x: &[f64], users: Vec<usize>) -> Result<Self> {
        let mut normals = Vec::with_capacity(raw_normals.len());
        let mut offsets = Vec::with_capacity(raw_normals.len());
        for mut n in raw_normals {
            let norm = n.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm > 1e-300 && norm.is_finite()) {
                return Err(Error::NonFinite("zero-length cut gradient".into()));
            }
            for v in &mut n {
                *v /= norm;
            }
            offsets.push(dot(&n, x));
            normals.push(n);
        }
        Ok(CutResponse {
            kind,
            normals,
            offsets,
            violated_users: users,
        })
    }
}

/// Queries the safe tractable constraints at `x_query`.
///
/// Any violated user contributes a feasibility cut along its constraint
/// gradient (zero outside the user's own coordinates); a fully feasible
/// point yields the single optimality cut along the negated objective
/// gradient.
pub fn separation_oracle(
    x_query: &[f64],
    users: &[UserProfile],
    params: &SystemParams,
    cfg: &SterConfig,
    objective_gradient: &[f64],
    mode: AllocationMode,
) -> Result<CutResponse> {
    let alloc = Allocation::from_point(mode, users.len(), params.n_subcarriers, x_query)?;
    let report = bernstein::stc_feasibility(&alloc, users, params, cfg)?;
    if report.violated.is_empty() {
        let v: Vec<f64> = objective_gradient.iter().map(|g| -g).collect();
        return CutResponse::through_point(CutKind::Optimality, vec![v], x_query, vec![]);
    }
    let nv = alloc.n_vars();
    let mut normals = Vec::with_capacity(report.violated.len());
    let mut violated = Vec::with_capacity(report.violated.len());
    for v in &report.violated {
        let mut normal = vec![0.0; nv];
        match mode {
            AllocationMode::Full => {
                let base = v.user * params.n_subcarriers;
                normal[base..base + params.n_subcarriers].copy_from_slice(&v.gradient);
            }
            AllocationMode::Reduced => normal[v.user] = v.gradient[0],
        }
        normals.push(normal);
        violated.push(v.user);
    }
    CutResponse::through_point(CutKind::Feasibility, normals, x_query, violated)
}

/// Why the solver stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    /// Objective stalled over the trailing feasible queries and the center
    /// step fell below delta.
    Converged,
    /// Hard cap `cap_scale * m * ln(1/delta)^2` reached.
    IterationCap,
    /// The localization polytope shrank below delta with no feasible point
    /// found, or its interior emptied.
    Infeasible,
}

impl TerminationReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            TerminationReason::Converged => "converged",
            TerminationReason::IterationCap => "iteration_cap",
            TerminationReason::Infeasible => "infeasible",
        }
    }
}

/// Stopping rules and budgets of the cutting-plane loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Localization radius: center steps below this (with a stalled
    /// objective) end the run.
    pub delta: f64,
    /// Relative objective improvement treated as a stall.
    pub objective_rel_tol: f64,
    /// Number of trailing feasible queries inspected by the stall test.
    pub stall_window: usize,
    /// Iteration cap factor `C` in `C * m * ln(1/delta)^2`.
    pub cap_scale: f64,
    /// Absolute tolerance when re-certifying the returned point.
    pub feasibility_tol: f64,
    /// Newton decrement target of the centering steps.
    pub center_tol: f64,
    /// Row budget factor: abort when rows exceed `factor * m`.
    pub row_cap_factor: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            delta: 1e-2,
            objective_rel_tol: 1e-5,
            stall_window: 10,
            cap_scale: 50.0,
            feasibility_tol: 1e-9,
            center_tol: 1e-8,
            row_cap_factor: 200,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidInput("delta must lie in (0, 1)".into()));
        }
        if !(self.objective_rel_tol > 0.0 && self.center_tol > 0.0 && self.cap_scale > 0.0) {
            return Err(Error::InvalidInput("solver tolerances must be > 0".into()));
        }
        if self.stall_window < 2 || self.row_cap_factor < 2 {
            return Err(Error::InvalidInput("solver windows must be >= 2".into()));
        }
        Ok(())
    }

    pub fn iteration_cap(&self, n_vars: usize) -> usize {
        let log_term = (1.0 / self.delta).ln().powi(2);
        ((self.cap_scale * n_vars as f64 * log_term).ceil() as usize).max(50)
    }
}

/// One row of the iteration trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub iteration: usize,
    pub cut: CutKind,
    /// Objective at the query point when it was feasible.
    pub objective: Option<f64>,
    pub potential: f64,
    pub n_rows: usize,
}

/// Outcome of a cutting-plane run on raw coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineReport {
    pub best_point: Option<Vec<f64>>,
    pub best_objective: f64,
    pub iterations: usize,
    /// Iteration of the first feasible query, or of the infeasibility
    /// declaration.
    pub feasibility_iterations: Option<usize>,
    pub cut_history: Vec<CutKind>,
    pub terminated_by: TerminationReason,
    pub trace: Vec<IterationTrace>,
}

/// Runs the cutting-plane loop over an arbitrary separation oracle.
///
/// `objective` is the (constant) gradient of the linear objective being
/// maximized; it scores feasible query points. `start_hint` seeds the first
/// centering when a strictly interior point is known.
pub fn cutting_plane<F>(
    mut oracle: F,
    objective: &[f64],
    mut polytope: Polytope,
    start_hint: Option<&[f64]>,
    opts: &SolveOptions,
) -> Result<EngineReport>
where
    F: FnMut(&[f64]) -> Result<CutResponse>,
{
    opts.validate()?;
    let m = polytope.n_vars();
    assert_eq!(objective.len(), m);
    let cap = opts.iteration_cap(m);
    let row_cap = opts.row_cap_factor * m;

    let hint_state = start_hint.map(|x| CenterState {
        point: x.to_vec(),
        slacks: polytope.slacks(x),
        potential: 0.0,
        newton_decrement: f64::INFINITY,
    });
    let mut center = analytic_center(&polytope, hint_state.as_ref(), opts.center_tol)?;

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut best_trail: Vec<f64> = Vec::new();
    let mut first_feasible: Option<usize> = None;
    let mut cut_history = Vec::new();
    let mut trace = Vec::new();
    let mut terminated_by = TerminationReason::IterationCap;
    let mut iterations = 0;

    for iter in 1..=cap {
        iterations = iter;
        debug_assert!(center.slacks.iter().all(|&s| s > 0.0));

        let response = oracle(&center.point)?;
        let mut query_objective = None;
        if response.kind == CutKind::Optimality {
            let obj = dot(objective, &center.point);
            query_objective = Some(obj);
            first_feasible.get_or_insert(iter);
            if best.as_ref().is_none_or(|(_, b)| obj > *b) {
                best = Some((center.point.clone(), obj));
            }
            best_trail.push(best.as_ref().expect("just set").1);
        }
        cut_history.push(response.kind);

        if polytope.n_rows() + response.normals.len() > row_cap {
            return Err(Error::CutBudget {
                rows: polytope.n_rows() + response.normals.len(),
                cap: row_cap,
            });
        }
        let mut normal_sum = vec![0.0; m];
        for (normal, offset) in response.normals.iter().zip(&response.offsets) {
            polytope.add_cut(normal, *offset)?;
            for (acc, v) in normal_sum.iter_mut().zip(normal) {
                *acc += v;
            }
        }

        trace.push(IterationTrace {
            iteration: iter,
            cut: response.kind,
            objective: query_objective,
            potential: center.potential,
            n_rows: polytope.n_rows(),
        });

        // Warm start: step off the new cut faces along the (negated) summed
        // normal by half the smallest old slack. Cuts of distinct users
        // have disjoint supports, so every new slack becomes positive.
        let old_min_slack = center.slacks.iter().cloned().fold(f64::INFINITY, f64::min);
        let sum_norm = normal_sum.iter().map(|v| v * v).sum::<f64>().sqrt();
        let step = 0.5 * old_min_slack / sum_norm.max(1e-300);
        let warm_point: Vec<f64> = center
            .point
            .iter()
            .zip(&normal_sum)
            .map(|(x, n)| x - step * n)
            .collect();
        let warm = if polytope.min_slack(&warm_point) > 0.0 {
            Some(CenterState {
                slacks: polytope.slacks(&warm_point),
                point: warm_point,
                potential: 0.0,
                newton_decrement: f64::INFINITY,
            })
        } else {
            None
        };

        let new_center = match analytic_center(&polytope, warm.as_ref(), opts.center_tol) {
            Ok(c) => c,
            Err(Error::EmptyInterior) => {
                terminated_by = if best.is_some() {
                    TerminationReason::Converged
                } else {
                    first_feasible = Some(iter);
                    TerminationReason::Infeasible
                };
                break;
            }
            Err(e) => return Err(e),
        };
        let step_norm = new_center
            .point
            .iter()
            .zip(&center.point)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        center = new_center;

        // (a) objective stall + small center motion
        if let Some((_, best_obj)) = &best {
            if best_trail.len() >= opts.stall_window {
                let before = best_trail[best_trail.len() - opts.stall_window];
                let rel = (best_obj - before) / best_obj.abs().max(1.0);
                if rel < opts.objective_rel_tol && step_norm < opts.delta {
                    terminated_by = TerminationReason::Converged;
                    break;
                }
            }
        }

        // (c) localization shrank below delta with nothing feasible found
        if best.is_none() {
            let max_slack = center.slacks.iter().cloned().fold(0.0, f64::max);
            if max_slack < opts.delta {
                first_feasible = Some(iter);
                terminated_by = TerminationReason::Infeasible;
                break;
            }
        }
    }

    if best.is_none() && terminated_by != TerminationReason::Infeasible {
        // ran out of budget without ever seeing a feasible point
        terminated_by = TerminationReason::Infeasible;
        first_feasible.get_or_insert(iterations);
    }

    let (best_point, best_objective) = match best {
        Some((x, o)) => (Some(x), o),
        None => (None, f64::NAN),
    };
    Ok(EngineReport {
        best_point,
        best_objective,
        iterations,
        feasibility_iterations: first_feasible,
        cut_history,
        terminated_by,
        trace,
    })
}

/// Base polytope for the given allocation mode.
pub fn base_polytope(params: &SystemParams, mode: AllocationMode) -> Polytope {
    match mode {
        AllocationMode::Full => Polytope::base_full(params.n_users, params.n_subcarriers),
        AllocationMode::Reduced => Polytope::base_reduced(params.n_users),
    }
}

/// Result of solving one window's allocation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Best feasible allocation, absent when the problem is infeasible.
    pub best_point: Option<Allocation>,
    /// Expected throughput of `best_point` in bits/s (NaN when infeasible).
    pub best_objective: f64,
    pub iterations: usize,
    pub feasibility_iterations: Option<usize>,
    pub cut_history: Vec<CutKind>,
    pub terminated_by: TerminationReason,
    pub trace: Vec<IterationTrace>,
}

impl SolveReport {
    pub fn feasible(&self) -> bool {
        self.best_point.is_some()
    }
}

/// Solves the chance-constrained allocation problem for one window.
///
/// Builds the expected-rate objective, the base polytope, and the
/// constraint oracle, runs the cutting-plane loop from the base polytope's
/// analytic center, and re-certifies the returned point.
pub fn solve(
    users: &[UserProfile],
    params: &SystemParams,
    cfg: &SterConfig,
    mode: AllocationMode,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    params.validate()?;
    cfg.validate()?;
    opts.validate()?;
    if users.len() != params.n_users {
        return Err(Error::InvalidInput(format!(
            "expected {} users, got {}",
            params.n_users,
            users.len()
        )));
    }
    for u in users {
        u.validate()?;
    }

    let quad = cfg.quad_opts();
    let rates: Vec<f64> = users
        .iter()
        .map(|u| crate::channel::expected_rate(u, params, &quad))
        .collect::<Result<_>>()?;
    let n_sc = params.n_subcarriers;
    let objective: Vec<f64> = match mode {
        AllocationMode::Full => rates
            .iter()
            .flat_map(|&r| std::iter::repeat_n(r, n_sc))
            .collect(),
        AllocationMode::Reduced => rates.iter().map(|&r| n_sc as f64 * r).collect(),
    };

    let polytope = base_polytope(params, mode);
    // exact analytic center of either base polytope
    let hint = vec![1.0 / (params.n_users as f64 + 1.0); polytope.n_vars()];

    let oracle = |x: &[f64]| separation_oracle(x, users, params, cfg, &objective, mode);
    let engine = cutting_plane(oracle, &objective, polytope, Some(&hint), opts)?;

    let best_point = match engine.best_point {
        Some(x) => {
            let alloc = Allocation::from_point(mode, users.len(), n_sc, &x)?;
            let recheck = bernstein::stc_feasibility(&alloc, users, params, cfg)?;
            let worst = recheck.result.worst();
            if worst > opts.feasibility_tol {
                return Err(Error::InvalidInput(format!(
                    "returned point fails re-certification: worst G = {worst:e}"
                )));
            }
            Some(alloc)
        }
        None => None,
    };

    Ok(SolveReport {
        best_point,
        best_objective: engine.best_objective,
        iterations: engine.iterations,
        feasibility_iterations: engine.feasibility_iterations,
        cut_history: engine.cut_history,
        terminated_by: engine.terminated_by,
        trace: engine.trace,
    })
}
