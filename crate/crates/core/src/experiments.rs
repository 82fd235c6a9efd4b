//! Seeded Monte Carlo window batches.
//!
//! Each adaptation window draws fresh user geometry, solves the
//! chance-constrained allocation, then replays the window slot by slot:
//! the slow scheme keeps its allocation while the fast baseline re-solves
//! an LP on every slot. Outage is estimated on a longer evaluation stream
//! than the window itself (1000 slots resolve 10% outage far too coarsely
//! for acceptance-grade checks). Control signaling costs 10% of one slot
//! per allocation update, so the slow scheme pays it once per window and
//! the fast scheme every slot.
//!
//! Windows are independent work items with seeds derived from the master
//! seed; batches fan out over the worker pool and fold in window order, so
//! outputs are identical at any thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::accpm::{self, SolveOptions, SolveReport};
use crate::bernstein::{Allocation, AllocationMode, SterConfig};
use crate::channel::{
    self, CellGeometry, CorrelatedGainSampler, DelayProfile, GainSample, SystemParams, UserProfile,
};
use crate::lp::{self, LpStatus};
use crate::{exec, seed, Error, Result};

/// Fraction of one slot consumed by control signaling per allocation update.
pub const UPDATE_OVERHEAD: f64 = 0.1;

/// Sub-stream indices hung off a window seed.
const STREAM_PROFILES: u64 = 0;
const STREAM_WINDOW_SLOTS: u64 = 1;
const STREAM_EVAL_BASE: u64 = 1000;
const STREAM_CORR_EVAL_BASE: u64 = 2_000_000;

/// Slots per evaluation chunk; chunks are independent RNG streams so the
/// outage scan parallelizes without losing determinism.
const EVAL_CHUNK: usize = 2000;

/// Everything a window run needs besides its seed.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub params: SystemParams,
    pub geometry: CellGeometry,
    pub ster: SterConfig,
    pub solve: SolveOptions,
    /// Demand q_k applied to every drawn user, bits/s.
    pub min_rate: f64,
    /// Outage tolerance eps_k applied to every drawn user.
    pub outage_tolerance: f64,
    pub mode: AllocationMode,
    /// Slots of the outage evaluation stream.
    pub eval_slots: usize,
    /// Run the per-slot LP baseline (the expensive part).
    pub fast_baseline: bool,
    /// Delay profile of the correlated-channel experiment.
    pub delay_profile: DelayProfile,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.geometry.validate()?;
        self.ster.validate()?;
        self.solve.validate()?;
        self.delay_profile.validate()?;
        if !(self.outage_tolerance > 0.0 && self.outage_tolerance < 1.0) {
            return Err(Error::InvalidInput(
                "outage_tolerance must lie strictly in (0, 1)".into(),
            ));
        }
        if self.min_rate < 0.0 {
            return Err(Error::InvalidInput("min_rate must be >= 0".into()));
        }
        if self.eval_slots == 0 {
            return Err(Error::InvalidInput("eval_slots must be >= 1".into()));
        }
        Ok(())
    }

    /// Throughput factor left to the slow scheme after one update per
    /// window: `1 - 0.1 / slots_per_window`.
    pub fn slow_overhead_factor(&self) -> f64 {
        1.0 - UPDATE_OVERHEAD / self.params.slots_per_window() as f64
    }

    /// Throughput factor left to the fast scheme, which updates every
    /// slot: `1 - 0.1`.
    pub fn fast_overhead_factor(&self) -> f64 {
        1.0 - UPDATE_OVERHEAD
    }
}

/// Solver trace and Monte Carlo outcome of one adaptation window.
#[derive(Debug, Clone)]
pub struct WindowReport {
    pub window_id: usize,
    pub window_seed: u64,
    pub user_profiles: Vec<UserProfile>,
    pub solve_report: SolveReport,
    /// Empirical slow-scheme outage per user; empty when infeasible.
    pub per_user_outage: Vec<f64>,
    /// Window-average slow throughput in bits/s (0 when infeasible).
    pub slow_throughput: f64,
    /// Window-average fast-baseline throughput in bits/s (NaN when the
    /// baseline was not run).
    pub fast_throughput: f64,
    pub slow_overhead_factor: f64,
    pub fast_overhead_factor: f64,
    /// Slots where the per-slot LP was infeasible and demands were dropped.
    pub fast_infeasible_slots: usize,
    /// Fast-baseline outage per user under the drop-and-count policy.
    pub fast_per_user_outage: Vec<f64>,
    pub feasible: bool,
}

fn window_rng(window_seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed::derive(window_seed, stream))
}

/// Empirical per-user outage of an allocation over `slots` independent
/// fading slots, chunked over the worker pool.
fn outage_scan<S>(
    alloc: &Allocation,
    users: &[UserProfile],
    params: &SystemParams,
    slots: usize,
    sampler: S,
    window_seed: u64,
    stream_base: u64,
) -> Vec<f64>
where
    S: Fn(&mut ChaCha8Rng) -> GainSample + Sync,
{
    let n_chunks = slots.div_ceil(EVAL_CHUNK);
    let counts = exec::map_indexed(n_chunks, |chunk| {
        let mut rng = window_rng(window_seed, stream_base + chunk as u64);
        let chunk_slots = EVAL_CHUNK.min(slots - chunk * EVAL_CHUNK);
        let mut misses = vec![0u64; users.len()];
        for _ in 0..chunk_slots {
            let sample = sampler(&mut rng);
            for (k, user) in users.iter().enumerate() {
                if alloc.user_rate(k, &sample, params) < user.min_rate {
                    misses[k] += 1;
                }
            }
        }
        misses
    });
    let mut total = vec![0u64; users.len()];
    for c in counts {
        for (t, v) in total.iter_mut().zip(c) {
            *t += v;
        }
    }
    total.iter().map(|&m| m as f64 / slots as f64).collect()
}

/// Runs one adaptation window end to end.
pub fn run_window(window_id: usize, window_seed: u64, cfg: &ExperimentConfig) -> Result<WindowReport> {
    cfg.validate()?;
    let params = &cfg.params;

    let mut profile_rng = window_rng(window_seed, STREAM_PROFILES);
    let users = channel::draw_user_profiles(
        &cfg.geometry,
        params.n_users,
        cfg.min_rate,
        cfg.outage_tolerance,
        &mut profile_rng,
    )?;

    let solve_report = accpm::solve(&users, params, &cfg.ster, cfg.mode, &cfg.solve)?;
    let feasible = solve_report.feasible();

    // Window slots are drawn once and shared by both schemes.
    let slots = params.slots_per_window();
    let mut slot_rng = window_rng(window_seed, STREAM_WINDOW_SLOTS);
    let window_samples: Vec<GainSample> = (0..slots)
        .map(|_| channel::sample_gains(&users, params, &mut slot_rng))
        .collect();

    let mut slow_throughput = 0.0;
    let mut per_user_outage = Vec::new();
    if let Some(alloc) = &solve_report.best_point {
        let per_slot: Vec<f64> = window_samples
            .iter()
            .map(|s| {
                (0..users.len())
                    .map(|k| alloc.user_rate(k, s, params))
                    .sum::<f64>()
            })
            .collect();
        slow_throughput = per_slot.iter().sum::<f64>() / slots as f64;

        per_user_outage = outage_scan(
            alloc,
            &users,
            params,
            cfg.eval_slots,
            |rng| channel::sample_gains(&users, params, rng),
            window_seed,
            STREAM_EVAL_BASE,
        );
    }

    let mut fast_throughput = f64::NAN;
    let mut fast_infeasible_slots = 0;
    let mut fast_per_user_outage = Vec::new();
    if cfg.fast_baseline {
        let outcomes = exec::map_indexed(slots, |t| fast_slot(&window_samples[t], &users, params));
        let mut total = 0.0;
        let mut misses = vec![0u64; users.len()];
        for outcome in outcomes {
            let (rate, infeasible, slot_misses) = outcome?;
            total += rate;
            fast_infeasible_slots += usize::from(infeasible);
            for (m, v) in misses.iter_mut().zip(slot_misses) {
                *m += u64::from(v);
            }
        }
        fast_throughput = total / slots as f64;
        fast_per_user_outage = misses.iter().map(|&m| m as f64 / slots as f64).collect();
    }

    Ok(WindowReport {
        window_id,
        window_seed,
        user_profiles: users,
        solve_report,
        per_user_outage,
        slow_throughput,
        fast_throughput,
        slow_overhead_factor: cfg.slow_overhead_factor(),
        fast_overhead_factor: cfg.fast_overhead_factor(),
        fast_infeasible_slots,
        fast_per_user_outage,
        feasible,
    })
}

/// One fast-baseline slot: the throughput LP under rate demands, falling
/// back to a throughput-only allocation (best user per subcarrier) when the
/// demands are unattainable, counting outages for the users left short.
fn fast_slot(
    sample: &GainSample,
    users: &[UserProfile],
    params: &SystemParams,
) -> Result<(f64, bool, Vec<bool>)> {
    let lp_full = lp::build_fast_lp(sample, users, params);
    let sol = lp::simplex_solve(&lp_full)?;
    match sol.status {
        LpStatus::Optimal => Ok((sol.objective_value, false, vec![false; users.len()])),
        LpStatus::Infeasible => {
            let n = params.n_subcarriers;
            let mut rates = vec![0.0; users.len()];
            let mut total = 0.0;
            for sc in 0..n {
                let (best_k, best_rate) = (0..users.len())
                    .map(|k| (k, channel::instantaneous_rate(sample.get(k, sc), params)))
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .expect("at least one user");
                rates[best_k] += best_rate;
                total += best_rate;
            }
            let outage: Vec<bool> = users
                .iter()
                .zip(&rates)
                .map(|(u, &r)| r < u.min_rate)
                .collect();
            Ok((total, true, outage))
        }
        LpStatus::Unbounded => Err(Error::InvalidInput(
            "per-slot LP unbounded; allocation rows missing".into(),
        )),
    }
}

/// Runs `n_windows` windows with seeds derived from `master_seed`.
pub fn run_batch(
    master_seed: u64,
    n_windows: usize,
    cfg: &ExperimentConfig,
) -> Result<Vec<WindowReport>> {
    cfg.validate()?;
    let reports = exec::map_indexed(n_windows, |id| {
        run_window(id, seed::derive(master_seed, id as u64), cfg)
    });
    reports.into_iter().collect()
}

/// Mean over feasible windows of the overhead-adjusted slow/fast
/// throughput ratio. `None` without a feasible window that ran the
/// baseline.
pub fn efficiency_ratio(reports: &[WindowReport]) -> Option<f64> {
    let ratios: Vec<f64> = reports
        .iter()
        .filter(|r| r.feasible && r.fast_throughput.is_finite() && r.fast_throughput > 0.0)
        .map(|r| {
            (r.slow_throughput * r.slow_overhead_factor)
                / (r.fast_throughput * r.fast_overhead_factor)
        })
        .collect();
    if ratios.is_empty() {
        None
    } else {
        Some(ratios.iter().sum::<f64>() / ratios.len() as f64)
    }
}

/// One row per tolerance value of an epsilon sweep.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub epsilon_grid: Vec<f64>,
    /// Expected-throughput objective per epsilon (NaN when infeasible).
    pub objective_per_eps: Vec<f64>,
    /// Per-user empirical outage per epsilon (empty when infeasible).
    pub outage_per_eps: Vec<Vec<f64>>,
    /// 1 when that epsilon's problem was feasible.
    pub feasible_count_per_eps: Vec<usize>,
}

/// Re-solves one fixed window over an epsilon grid. Profiles and the
/// outage evaluation stream are shared across grid points, so only the
/// tolerance moves.
pub fn sweep_epsilon(
    window_seed: u64,
    grid: &[f64],
    cfg: &ExperimentConfig,
) -> Result<SweepReport> {
    cfg.validate()?;
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "epsilon grid must be ascending and nonempty".into(),
        ));
    }
    if grid.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::InvalidInput("epsilon grid must lie in (0, 1)".into()));
    }
    let params = &cfg.params;
    let mut profile_rng = window_rng(window_seed, STREAM_PROFILES);
    let base_users = channel::draw_user_profiles(
        &cfg.geometry,
        params.n_users,
        cfg.min_rate,
        cfg.outage_tolerance,
        &mut profile_rng,
    )?;

    let mut objective_per_eps = Vec::with_capacity(grid.len());
    let mut outage_per_eps = Vec::with_capacity(grid.len());
    let mut feasible_count_per_eps = Vec::with_capacity(grid.len());
    for &eps in grid {
        let users: Vec<UserProfile> = base_users
            .iter()
            .map(|u| UserProfile {
                outage_tolerance: eps,
                ..u.clone()
            })
            .collect();
        let report = accpm::solve(&users, params, &cfg.ster, cfg.mode, &cfg.solve)?;
        feasible_count_per_eps.push(usize::from(report.feasible()));
        objective_per_eps.push(report.best_objective);
        match &report.best_point {
            Some(alloc) => outage_per_eps.push(outage_scan(
                alloc,
                &users,
                params,
                cfg.eval_slots,
                |rng| channel::sample_gains(&users, params, rng),
                window_seed,
                STREAM_EVAL_BASE,
            )),
            None => outage_per_eps.push(Vec::new()),
        }
    }

    Ok(SweepReport {
        epsilon_grid: grid.to_vec(),
        objective_per_eps,
        outage_per_eps,
        feasible_count_per_eps,
    })
}

/// Paired outage of one user under independent and correlated fading.
#[derive(Debug, Clone)]
pub struct PairedOutage {
    pub user: usize,
    pub independent: f64,
    pub correlated: f64,
}

/// Outcome of one correlated-channel window.
#[derive(Debug, Clone)]
pub struct CorrelationReport {
    pub window_id: usize,
    pub eps_nominal: f64,
    pub eps_design: f64,
    pub feasible: bool,
    pub per_user: Vec<PairedOutage>,
    pub user_profiles: Vec<UserProfile>,
}

/// Solves one window with the independence-based constraint at
/// `eps_design`, then measures outage under both independent and
/// frequency-correlated fading. Violations of `eps_nominal` under
/// correlation expose the independence assumption; re-solving with a
/// stricter `eps_design` restores compliance.
pub fn correlation_experiment(
    window_id: usize,
    window_seed: u64,
    profile: &DelayProfile,
    eps_nominal: f64,
    eps_design: f64,
    cfg: &ExperimentConfig,
) -> Result<CorrelationReport> {
    cfg.validate()?;
    profile.validate()?;
    if !(eps_nominal > 0.0 && eps_nominal < 1.0 && eps_design > 0.0 && eps_design < 1.0) {
        return Err(Error::InvalidInput("tolerances must lie in (0, 1)".into()));
    }
    let params = &cfg.params;
    let mut profile_rng = window_rng(window_seed, STREAM_PROFILES);
    let users = channel::draw_user_profiles(
        &cfg.geometry,
        params.n_users,
        cfg.min_rate,
        eps_design,
        &mut profile_rng,
    )?;

    let report = accpm::solve(&users, params, &cfg.ster, cfg.mode, &cfg.solve)?;
    let Some(alloc) = &report.best_point else {
        return Ok(CorrelationReport {
            window_id,
            eps_nominal,
            eps_design,
            feasible: false,
            per_user: Vec::new(),
            user_profiles: users,
        });
    };

    let independent = outage_scan(
        alloc,
        &users,
        params,
        cfg.eval_slots,
        |rng| channel::sample_gains(&users, params, rng),
        window_seed,
        STREAM_EVAL_BASE,
    );
    let sampler = CorrelatedGainSampler::new(profile, params.n_subcarriers)?;
    let correlated = outage_scan(
        alloc,
        &users,
        params,
        cfg.eval_slots,
        |rng| sampler.sample(&users, rng),
        window_seed,
        STREAM_CORR_EVAL_BASE,
    );

    let per_user = independent
        .into_iter()
        .zip(correlated)
        .enumerate()
        .map(|(user, (independent, correlated))| PairedOutage {
            user,
            independent,
            correlated,
        })
        .collect();

    Ok(CorrelationReport {
        window_id,
        eps_nominal,
        eps_design,
        feasible: true,
        per_user,
        user_profiles: users,
    })
}

/// Aggregate solver statistics over a batch of reports.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStats {
    pub n_reports: usize,
    pub mean_iterations: f64,
    pub max_iterations: usize,
    pub mean_feasibility_iterations: f64,
}

/// Summarizes SolveReport fields; no recomputation.
pub fn convergence_stats(reports: &[WindowReport]) -> Option<ConvergenceStats> {
    if reports.is_empty() {
        return None;
    }
    let n = reports.len();
    let iter_sum: usize = reports.iter().map(|r| r.solve_report.iterations).sum();
    let max_iterations = reports
        .iter()
        .map(|r| r.solve_report.iterations)
        .max()
        .unwrap_or(0);
    let fb: Vec<usize> = reports
        .iter()
        .filter_map(|r| r.solve_report.feasibility_iterations)
        .collect();
    let mean_feasibility_iterations = if fb.is_empty() {
        f64::NAN
    } else {
        fb.iter().sum::<usize>() as f64 / fb.len() as f64
    };
    Some(ConvergenceStats {
        n_reports: n,
        mean_iterations: iter_sum as f64 / n as f64,
        max_iterations,
        mean_feasibility_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn paper_geometry() -> CellGeometry {
        CellGeometry {
            radius: 100.0,
            reference_distance: 1.0,
            path_loss_exponent: 4.0,
            shadowing_std_db: 8.0,
            ref_rx_power_db: 90.0,
        }
    }

    pub(crate) fn paper_config(n_users: usize, n_subcarriers: usize) -> ExperimentConfig {
        let gamma = channel::capacity_gap_from_ber(1e-4).unwrap();
        ExperimentConfig {
            params: SystemParams {
                n_subcarriers,
                n_users,
                bandwidth_per_subcarrier: 1.0,
                tx_power_per_subcarrier: channel::db_to_linear(90.0),
                noise_psd: 1.0,
                capacity_gap: gamma,
                slot_length: 1e-3,
                window_length: 1.0,
                rng_seed: 0,
            },
            geometry: paper_geometry(),
            ster: SterConfig::default(),
            solve: SolveOptions::default(),
            min_rate: 20.0,
            outage_tolerance: 0.1,
            mode: AllocationMode::Reduced,
            eval_slots: 100_000,
            fast_baseline: false,
            delay_profile: DelayProfile::new(8, 50e-9, 37.79e-9).unwrap(),
        }
    }

    #[test]
    fn overhead_factors_at_paper_scale() {
        let cfg = paper_config(4, 64);
        assert!((cfg.slow_overhead_factor() - 0.9999).abs() < 1e-12);
        assert!((cfg.fast_overhead_factor() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn window_is_deterministic() {
        let mut cfg = paper_config(2, 8);
        cfg.min_rate = 5.0;
        cfg.eval_slots = 5000;
        cfg.fast_baseline = true;
        let a = run_window(3, seed::derive(7, 3), &cfg).unwrap();
        let b = run_window(3, seed::derive(7, 3), &cfg).unwrap();
        assert_eq!(a.per_user_outage, b.per_user_outage);
        assert_eq!(a.slow_throughput, b.slow_throughput);
        assert_eq!(a.fast_throughput, b.fast_throughput);
        assert_eq!(
            a.solve_report.best_objective.to_bits(),
            b.solve_report.best_objective.to_bits()
        );
    }

    #[test]
    fn feasible_window_meets_outage_tolerance() {
        let mut cfg = paper_config(2, 16);
        cfg.min_rate = 8.0;
        cfg.eval_slots = 20_000;
        for id in 0..6 {
            let report = run_window(id, seed::derive(11, id as u64), &cfg).unwrap();
            if !report.feasible {
                continue;
            }
            let slack =
                3.0 * (cfg.outage_tolerance * (1.0 - cfg.outage_tolerance) / cfg.eval_slots as f64)
                    .sqrt();
            for (k, &outage) in report.per_user_outage.iter().enumerate() {
                assert!(
                    outage <= cfg.outage_tolerance + slack,
                    "window {id} user {k}: outage {outage}"
                );
            }
        }
    }

    #[test]
    fn fast_baseline_beats_slow_before_overhead() {
        let mut cfg = paper_config(2, 8);
        cfg.min_rate = 2.0;
        cfg.eval_slots = 1000;
        cfg.fast_baseline = true;
        let mut checked = 0;
        for id in 0..4 {
            let r = run_window(id, seed::derive(5, id as u64), &cfg).unwrap();
            if r.feasible && r.fast_infeasible_slots == 0 {
                assert!(
                    r.fast_throughput >= r.slow_throughput,
                    "window {id}: fast {} < slow {}",
                    r.fast_throughput,
                    r.slow_throughput
                );
                checked += 1;
            }
        }
        assert!(checked > 0, "no clean window to compare");
    }

    #[test]
    fn efficiency_ratio_trivial_cases() {
        let mut cfg = paper_config(2, 8);
        cfg.min_rate = 2.0;
        cfg.eval_slots = 1000;
        cfg.fast_baseline = true;
        let reports = run_batch(9, 3, &cfg).unwrap();
        let with_overhead = efficiency_ratio(&reports).unwrap();
        // stripping the overhead factors shrinks the ratio by 0.9 / 0.9999
        let mut stripped = reports.clone();
        for r in &mut stripped {
            r.slow_overhead_factor = 1.0;
            r.fast_overhead_factor = 1.0;
        }
        let without = efficiency_ratio(&stripped).unwrap();
        assert!(with_overhead > without);
        let expected = without * (cfg.slow_overhead_factor() / cfg.fast_overhead_factor());
        assert!((with_overhead - expected).abs() < 1e-12);
    }

    #[test]
    fn sweep_objective_monotone_in_eps() {
        let mut cfg = paper_config(2, 16);
        cfg.min_rate = 10.0;
        cfg.eval_slots = 5000;
        let grid = [0.1, 0.2, 0.4];
        let sweep = sweep_epsilon(seed::derive(13, 0), &grid, &cfg).unwrap();
        let mut last = f64::NEG_INFINITY;
        for (i, &obj) in sweep.objective_per_eps.iter().enumerate() {
            if sweep.feasible_count_per_eps[i] == 1 {
                assert!(obj >= last - 1e-9, "objective fell at eps {}", grid[i]);
                last = obj;
                for &o in &sweep.outage_per_eps[i] {
                    assert!(o <= grid[i] + 0.02);
                }
            }
        }
    }

    #[test]
    fn correlation_experiment_pairs_outages() {
        let mut cfg = paper_config(2, 16);
        cfg.min_rate = 6.0;
        cfg.eval_slots = 5000;
        let profile = DelayProfile::flat();
        for id in 0..4 {
            let rep = correlation_experiment(
                id,
                seed::derive(21, id as u64),
                &profile,
                0.3,
                0.3,
                &cfg,
            )
            .unwrap();
            if rep.feasible {
                assert_eq!(rep.per_user.len(), 2);
                for p in &rep.per_user {
                    assert!((0.0..=1.0).contains(&p.independent));
                    assert!((0.0..=1.0).contains(&p.correlated));
                }
                return;
            }
        }
        panic!("no feasible correlation window found");
    }

    #[test]
    fn convergence_stats_aggregate() {
        let mut cfg = paper_config(1, 8);
        cfg.min_rate = 1.0;
        cfg.eval_slots = 500;
        let reports = run_batch(2, 2, &cfg).unwrap();
        let stats = convergence_stats(&reports).unwrap();
        assert_eq!(stats.n_reports, 2);
        assert!(stats.max_iterations >= stats.mean_iterations as usize);
        assert!(convergence_stats(&[]).is_none());
    }

    #[test]
    fn reduced_mode_gives_identical_share_across_subcarriers() {
        // in reduced mode the allocation is one share per user by type;
        // expanding it to a gain sample touches every subcarrier equally
        let mut cfg = paper_config(1, 4);
        cfg.min_rate = 1.0;
        cfg.eval_slots = 100;
        let r = run_window(0, seed::derive(3, 0), &cfg).unwrap();
        let alloc = r.solve_report.best_point.as_ref().unwrap();
        assert_eq!(alloc.as_slice().len(), 1);
        let ones = GainSample::new(1, 4, vec![1.0; 4]);
        let rate = alloc.user_rate(0, &ones, &cfg.params);
        let single = channel::instantaneous_rate(1.0, &cfg.params);
        assert!((rate - 4.0 * alloc.as_slice()[0] * single).abs() < 1e-12);
    }
}
