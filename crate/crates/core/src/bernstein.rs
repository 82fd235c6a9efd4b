//! Safe tractable constraint evaluation.
//!
//! For each user the chance constraint on the short-term rate is replaced
//! by the conservative convex condition `G_k(x) <= 0`, where
//!
//! ```text
//! G_k(x) = inf_{rho > 0} { q_k + rho * sum_n Lambda_k(-x_kn / rho) - rho * ln(eps_k) }
//! ```
//!
//! and `Lambda_k` is the cumulant generating function of the per-subcarrier
//! rate under the user's exponential gain law. Any allocation passing this
//! test keeps the user's outage probability at or below `eps_k`.
//! The inner infimum is taken by geometric bracketing plus golden-section
//! refinement over `rho`, relying on unimodality; if no interior bracket is
//! found the boundary value is used, which can only overestimate `G_k` and
//! therefore only tightens the constraint.

use rand::Rng;

use crate::channel::{GainSample, SystemParams, UserProfile};
use crate::quad::{self, QuadOpts};
use crate::{Error, Result};

/// Airtime fractions below this are treated as exactly zero in the CGF,
/// where the integral is analytically 1.
pub const X_FLOOR: f64 = 1e-12;

/// Tolerance used when validating allocation box/simplex invariants.
const ALLOC_TOL: f64 = 1e-9;

/// Variable layout of an allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationMode {
    /// One airtime fraction per (user, subcarrier): `K * N` variables.
    Full,
    /// One shared fraction per user across all subcarriers: `K` variables.
    Reduced,
}

/// An airtime allocation, either `K x N` (full) or length `K` (reduced).
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub mode: AllocationMode,
    pub n_users: usize,
    pub n_subcarriers: usize,
    x: Vec<f64>,
}

/// A single user's share of the allocation, as seen by the constraint.
#[derive(Debug, Clone, Copy)]
pub enum UserRow<'a> {
    /// Full mode: one fraction per subcarrier.
    PerSubcarrier(&'a [f64]),
    /// Reduced mode: one fraction counted `n` times.
    Shared { share: f64, n: usize },
}

impl Allocation {
    pub fn full(n_users: usize, n_subcarriers: usize, x: Vec<f64>) -> Result<Self> {
        if x.len() != n_users * n_subcarriers {
            return Err(Error::InvalidInput(format!(
                "full allocation needs {} entries, got {}",
                n_users * n_subcarriers,
                x.len()
            )));
        }
        let alloc = Allocation {
            mode: AllocationMode::Full,
            n_users,
            n_subcarriers,
            x,
        };
        alloc.validate()?;
        Ok(alloc)
    }

    pub fn reduced(n_users: usize, n_subcarriers: usize, x: Vec<f64>) -> Result<Self> {
        if x.len() != n_users {
            return Err(Error::InvalidInput(format!(
                "reduced allocation needs {} entries, got {}",
                n_users,
                x.len()
            )));
        }
        let alloc = Allocation {
            mode: AllocationMode::Reduced,
            n_users,
            n_subcarriers,
            x,
        };
        alloc.validate()?;
        Ok(alloc)
    }

    pub fn from_point(
        mode: AllocationMode,
        n_users: usize,
        n_subcarriers: usize,
        point: &[f64],
    ) -> Result<Self> {
        match mode {
            AllocationMode::Full => Allocation::full(n_users, n_subcarriers, point.to_vec()),
            AllocationMode::Reduced => Allocation::reduced(n_users, n_subcarriers, point.to_vec()),
        }
    }

    /// Number of decision variables for this mode.
    pub fn n_vars(&self) -> usize {
        self.x.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.x
    }

    pub fn user_row(&self, user: usize) -> UserRow<'_> {
        match self.mode {
            AllocationMode::Full => UserRow::PerSubcarrier(
                &self.x[user * self.n_subcarriers..(user + 1) * self.n_subcarriers],
            ),
            AllocationMode::Reduced => UserRow::Shared {
                share: self.x[user],
                n: self.n_subcarriers,
            },
        }
    }

    /// Realized aggregate rate of a user for one slot of gains.
    pub fn user_rate(&self, user: usize, gains: &GainSample, params: &SystemParams) -> f64 {
        let row = gains.user_row(user);
        match self.mode {
            AllocationMode::Full => {
                let x = &self.x[user * self.n_subcarriers..(user + 1) * self.n_subcarriers];
                row.iter()
                    .zip(x)
                    .map(|(&g, &xf)| xf * crate::channel::instantaneous_rate(g, params))
                    .sum()
            }
            AllocationMode::Reduced => {
                let total: f64 = row
                    .iter()
                    .map(|&g| crate::channel::instantaneous_rate(g, params))
                    .sum();
                self.x[user] * total
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .x
            .iter()
            .any(|&v| !((-ALLOC_TOL..=1.0 + ALLOC_TOL).contains(&v)))
        {
            return Err(Error::InvalidInput(
                "allocation entries must lie in [0, 1]".into(),
            ));
        }
        match self.mode {
            AllocationMode::Full => {
                for n in 0..self.n_subcarriers {
                    let col: f64 = (0..self.n_users)
                        .map(|k| self.x[k * self.n_subcarriers + n])
                        .sum();
                    if col > 1.0 + ALLOC_TOL {
                        return Err(Error::InvalidInput(format!(
                            "subcarrier {n} oversubscribed: column sum {col}"
                        )));
                    }
                }
            }
            AllocationMode::Reduced => {
                let total: f64 = self.x.iter().sum();
                if total > 1.0 + ALLOC_TOL {
                    return Err(Error::InvalidInput(format!(
                        "airtime oversubscribed: sum {total}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Tolerances for the constraint evaluation pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct SterConfig {
    /// Relative tolerance of each quadrature.
    pub quad_rel_tol: f64,
    /// Panel budget per quadrature.
    pub quad_max_panels: usize,
    /// Smallest rho probed by the bracket search.
    pub rho_bracket_lo: f64,
    /// Geometric expansion factor of the bracket search.
    pub rho_expand_factor: f64,
    /// Relative width at which golden-section refinement stops.
    pub rho_rel_tol: f64,
    /// Largest rho probed before giving up on an interior bracket.
    pub rho_max: f64,
}

impl Default for SterConfig {
    fn default() -> Self {
        SterConfig {
            quad_rel_tol: 1e-8,
            quad_max_panels: 4000,
            rho_bracket_lo: 1e-6,
            rho_expand_factor: 2.0,
            rho_rel_tol: 1e-6,
            rho_max: 1e6,
        }
    }
}

impl SterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.quad_rel_tol > 0.0 && self.rho_rel_tol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be > 0".into()));
        }
        if !(self.rho_bracket_lo > 0.0 && self.rho_bracket_lo < self.rho_max) {
            return Err(Error::InvalidInput(
                "need 0 < rho_bracket_lo < rho_max".into(),
            ));
        }
        if !(self.rho_expand_factor > 1.0) {
            return Err(Error::InvalidInput("rho_expand_factor must be > 1".into()));
        }
        if self.quad_max_panels < 16 {
            return Err(Error::InvalidInput("quad_max_panels too small".into()));
        }
        Ok(())
    }

    pub fn quad_opts(&self) -> QuadOpts {
        QuadOpts {
            rel_tol: self.quad_rel_tol,
            max_panels: self.quad_max_panels,
            ..QuadOpts::default()
        }
    }
}

/// Constraint value and minimizing rho for one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserSter {
    /// `G_k` at the evaluated allocation (bits/s scale).
    pub value: f64,
    /// The rho achieving it.
    pub rho_star: f64,
    /// False when no interior bracket was found and a boundary value was
    /// used instead; the reported value then overestimates the infimum,
    /// which only tightens the constraint.
    pub bracketed: bool,
}

/// Per-user constraint evaluations for a whole allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct SterResult {
    pub per_user: Vec<UserSter>,
}

impl SterResult {
    /// Worst (largest) constraint value across users.
    pub fn worst(&self) -> f64 {
        self.per_user
            .iter()
            .map(|u| u.value)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A user whose constraint is violated, with what a feasibility cut needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolatedUser {
    pub user: usize,
    pub rho_star: f64,
    /// Gradient of H w.r.t. the user's own variables (length N in full
    /// mode, length 1 in reduced mode).
    pub gradient: Vec<f64>,
}

/// Outcome of a feasibility check over all users.
#[derive(Debug, Clone, PartialEq)]
pub struct StcReport {
    pub result: SterResult,
    pub violated: Vec<ViolatedUser>,
}

/// Cumulant generating function of the rate at argument `-x_frac / rho`:
///
/// ```text
/// Lambda = ln Integral_0^inf (1 + p_t xi / (Gamma N0))^(-W x / (rho ln 2))
///              * (1 / sigma) exp(-xi / sigma) dxi
/// ```
///
/// computed after the substitution `u = xi / sigma`. Always `<= 0`, and
/// exactly 0 at `x_frac = 0`.
pub fn cgf_lambda(
    x_frac: f64,
    rho: f64,
    user: &UserProfile,
    params: &SystemParams,
    cfg: &SterConfig,
) -> Result<f64> {
    debug_assert!(x_frac >= -ALLOC_TOL && rho > 0.0);
    if x_frac < X_FLOOR {
        return Ok(0.0);
    }
    let a = params.bandwidth_per_subcarrier * x_frac / (rho * std::f64::consts::LN_2);
    let t = params.snr_scale() * user.avg_gain;
    let integral = quad::integrate(
        |u| (-a * (t * u).ln_1p() - u).exp(),
        0.0,
        crate::channel::RATE_INTEGRAL_LIMIT,
        &cfg.quad_opts(),
    )?;
    if !(integral > 0.0) {
        return Err(Error::NonFinite(format!(
            "CGF integral not positive: {integral:e}"
        )));
    }
    // The integrand sits below the density, so the true value is <= 0;
    // rounding may land a hair above.
    Ok(integral.ln().min(0.0))
}

/// The function under the infimum:
/// `H_k(x, rho) = q_k + rho * sum_n Lambda_k(-x_n / rho) - rho * ln(eps_k)`.
/// In reduced mode the sum collapses to `N * Lambda_k(-x / rho)`.
pub fn h_value(
    row: UserRow<'_>,
    rho: f64,
    user: &UserProfile,
    params: &SystemParams,
    cfg: &SterConfig,
) -> Result<f64> {
    debug_assert!(rho > 0.0);
    let lambda_sum = match row {
        UserRow::PerSubcarrier(xs) => {
            let mut acc = 0.0;
            for &x in xs {
                acc += cgf_lambda(x, rho, user, params, cfg)?;
            }
            acc
        }
        UserRow::Shared { share, n } => n as f64 * cgf_lambda(share, rho, user, params, cfg)?,
    };
    Ok(user.min_rate + rho * lambda_sum - rho * user.outage_tolerance.ln())
}

/// Golden-section minimization on a bracket `[a, b]` of a unimodal
/// function; stops at relative width `rel_tol`. Returns `(argmin, min)`.
fn golden_min<F>(mut f: F, mut a: f64, mut b: f64, rel_tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..200 {
        if b - a <= rel_tol * (0.5 * (a + b)).abs() {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// Evaluates `G_k = inf_{rho > 0} H_k(x, rho)` for one user.
///
/// The bracket expands geometrically from `rho_bracket_lo` until the middle
/// point sits below both ends, then golden section refines it. A bracket
/// failing at either end returns the best boundary evaluation flagged with
/// `bracketed = false`.
pub fn bernstein_g(
    row: UserRow<'_>,
    user: &UserProfile,
    params: &SystemParams,
    cfg: &SterConfig,
) -> Result<UserSter> {
    let mut h = |rho: f64| h_value(row, rho, user, params, cfg);

    let mut rho_prev = cfg.rho_bracket_lo;
    let h_prev = h(rho_prev)?;
    let mut rho_mid = rho_prev * cfg.rho_expand_factor;
    let mut h_mid = h(rho_mid)?;

    if h_mid > h_prev {
        // Monotone increasing from the smallest probe: the infimum sits at
        // or below it. Its value is an upper bound on G.
        return Ok(UserSter {
            value: h_prev,
            rho_star: rho_prev,
            bracketed: false,
        });
    }

    loop {
        let rho_next = (rho_mid * cfg.rho_expand_factor).min(cfg.rho_max);
        let h_next = h(rho_next)?;
        if h_mid <= h_next {
            let (rho_star, value) = golden_min(h, rho_prev, rho_next, cfg.rho_rel_tol)?;
            // The bracket interior point is itself a candidate.
            return Ok(if h_mid < value {
                UserSter {
                    value: h_mid,
                    rho_star: rho_mid,
                    bracketed: true,
                }
            } else {
                UserSter {
                    value,
                    rho_star,
                    bracketed: true,
                }
            });
        }
        if rho_next >= cfg.rho_max {
            return Ok(UserSter {
                value: h_next,
                rho_star: rho_next,
                bracketed: false,
            });
        }
        rho_prev = rho_mid;
        rho_mid = rho_next;
        h_mid = h_next;
    }
}

/// Gradient of `H_k(x, rho*)` w.r.t. the user's own variables, one
/// ratio-of-integrals entry per (distinct) coordinate:
///
/// ```text
/// u_n = -(W / ln 2) * Int (1+t u)^(-a) ln(1+t u) e^(-u) du
///                   / Int (1+t u)^(-a)            e^(-u) du
/// ```
///
/// All entries are strictly negative: granting airtime can only lower G.
/// In reduced mode the single entry carries the factor N.
pub fn grad_h_x(
    row: UserRow<'_>,
    rho_star: f64,
    user: &UserProfile,
    params: &SystemParams,
    cfg: &SterConfig,
) -> Result<Vec<f64>> {
    debug_assert!(rho_star > 0.0);
    let t = params.snr_scale() * user.avg_gain;
    let w = params.bandwidth_per_subcarrier;
    let opts = cfg.quad_opts();
    let per_coordinate = |x: f64| -> Result<f64> {
        let a = if x < X_FLOOR {
            0.0
        } else {
            w * x / (rho_star * std::f64::consts::LN_2)
        };
        let denom = quad::integrate(
            |u| (-a * (t * u).ln_1p() - u).exp(),
            0.0,
            crate::channel::RATE_INTEGRAL_LIMIT,
            &opts,
        )?;
        let numer = quad::integrate(
            |u| (t * u).ln_1p() * (-a * (t * u).ln_1p() - u).exp(),
            0.0,
            crate::channel::RATE_INTEGRAL_LIMIT,
            &opts,
        )?;
        Ok(-(w / std::f64::consts::LN_2) * numer / denom)
    };
    match row {
        UserRow::PerSubcarrier(xs) => xs.iter().map(|&x| per_coordinate(x)).collect(),
        UserRow::Shared { share, n } => Ok(vec![n as f64 * per_coordinate(share)?]),
    }
}

/// Evaluates every user's constraint at an allocation and collects the
/// violated set with the data feasibility cuts need.
pub fn stc_feasibility(
    alloc: &Allocation,
    users: &[UserProfile],
    params: &SystemParams,
    cfg: &SterConfig,
) -> Result<StcReport> {
    assert_eq!(users.len(), alloc.n_users);
    let mut per_user = Vec::with_capacity(users.len());
    let mut violated = Vec::new();
    for (k, user) in users.iter().enumerate() {
        let row = alloc.user_row(k);
        let eval = bernstein_g(row, user, params, cfg)?;
        if eval.value > 0.0 {
            violated.push(ViolatedUser {
                user: k,
                rho_star: eval.rho_star,
                gradient: grad_h_x(row, eval.rho_star, user, params, cfg)?,
            });
        }
        per_user.push(eval);
    }
    Ok(StcReport {
        result: SterResult { per_user },
        violated,
    })
}

/// Empirical outage probability of each user at `alloc` over `slots`
/// independently drawn fading slots.
pub fn monte_carlo_outage<R: Rng>(
    alloc: &Allocation,
    users: &[UserProfile],
    params: &SystemParams,
    slots: usize,
    rng: &mut R,
) -> Vec<f64> {
    let mut misses = vec![0usize; users.len()];
    for _ in 0..slots {
        let sample = crate::channel::sample_gains(users, params, rng);
        for (k, user) in users.iter().enumerate() {
            if alloc.user_rate(k, &sample, params) < user.min_rate {
                misses[k] += 1;
            }
        }
    }
    misses.iter().map(|&m| m as f64 / slots as f64).collect()
}
