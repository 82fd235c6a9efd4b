//! Statistical channel model.
//!
//! Long-term gains come from path loss and log-normal shadowing and stay
//! fixed for a whole adaptation window; small-scale Rayleigh fading redraws
//! every slot, making each power gain exponential with the user's long-term
//! mean. Everything is stored in linear units; dB enters only at config
//! ingestion.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};

use crate::quad::{self, QuadOpts};
use crate::{Error, Result};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Upper integration limit after the `u = xi / sigma` substitution; the
/// exponential tail beyond it carries less than 1e-12 of the density mass.
pub const RATE_INTEGRAL_LIMIT: f64 = 40.0;

/// Radio constants shared by every user.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Number of subcarriers (N).
    pub n_subcarriers: usize,
    /// Number of users (K).
    pub n_users: usize,
    /// Bandwidth of one subcarrier in Hz (W).
    pub bandwidth_per_subcarrier: f64,
    /// Transmit power per subcarrier, linear (p_t).
    pub tx_power_per_subcarrier: f64,
    /// Noise power spectral density, linear (N0).
    pub noise_psd: f64,
    /// Capacity gap, dimensionless and >= 1 (Gamma).
    pub capacity_gap: f64,
    /// Slot (coherence) length in seconds (T0).
    pub slot_length: f64,
    /// Adaptation window length in seconds (T).
    pub window_length: f64,
    /// Master RNG seed.
    pub rng_seed: u64,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidInput(msg.to_string()))
            }
        };
        check(self.n_subcarriers >= 1, "n_subcarriers must be >= 1")?;
        check(self.n_users >= 1, "n_users must be >= 1")?;
        check(
            self.bandwidth_per_subcarrier > 0.0,
            "bandwidth_per_subcarrier must be > 0",
        )?;
        check(
            self.tx_power_per_subcarrier > 0.0,
            "tx_power_per_subcarrier must be > 0",
        )?;
        check(self.noise_psd > 0.0, "noise_psd must be > 0")?;
        check(self.capacity_gap >= 1.0, "capacity_gap must be >= 1")?;
        check(self.slot_length > 0.0, "slot_length must be > 0")?;
        check(
            self.window_length >= self.slot_length,
            "window_length must be >= slot_length",
        )?;
        check(self.slots_per_window() >= 1, "slots_per_window must be >= 1")
    }

    /// Number of slots in one adaptation window, `round(T / T0)`.
    pub fn slots_per_window(&self) -> usize {
        (self.window_length / self.slot_length).round() as usize
    }

    /// `p_t / (Gamma N0)`: multiplies a gain to give the effective SNR.
    pub fn snr_scale(&self) -> f64 {
        self.tx_power_per_subcarrier / (self.capacity_gap * self.noise_psd)
    }
}

/// Per-user long-term statistics and QoS demand.
#[derive(Debug, Clone, PartialEq)]
pub struct UserProfile {
    /// Mean channel power gain (sigma_k), linear.
    pub avg_gain: f64,
    /// Short-term rate demand q_k in bits/s.
    pub min_rate: f64,
    /// Largest tolerable outage probability, in (0, 1).
    pub outage_tolerance: f64,
    /// Distance from the base station in meters, when drawn from geometry.
    pub distance: Option<f64>,
    /// Linear shadowing factor, when drawn from geometry.
    pub shadowing: Option<f64>,
}

impl UserProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.avg_gain > 0.0 && self.avg_gain.is_finite()) {
            return Err(Error::InvalidInput("avg_gain must be > 0".into()));
        }
        if !(self.min_rate >= 0.0) {
            return Err(Error::InvalidInput("min_rate must be >= 0".into()));
        }
        if !(self.outage_tolerance > 0.0 && self.outage_tolerance < 1.0) {
            return Err(Error::InvalidInput(
                "outage_tolerance must lie strictly in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Cell geometry and propagation parameters (dB where noted).
#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    /// Cell radius in meters (R).
    pub radius: f64,
    /// Reference distance in meters (d0).
    pub reference_distance: f64,
    /// Path-loss exponent applied to the mean power gain (gamma).
    pub path_loss_exponent: f64,
    /// Shadowing standard deviation in dB.
    pub shadowing_std_db: f64,
    /// Transmit power measured at d0, in dB; converts to linear p_t.
    pub ref_rx_power_db: f64,
}

impl CellGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > self.reference_distance && self.reference_distance > 0.0) {
            return Err(Error::InvalidInput(
                "cell radius must exceed reference_distance > 0".into(),
            ));
        }
        if !(self.path_loss_exponent > 0.0) {
            return Err(Error::InvalidInput("path_loss_exponent must be > 0".into()));
        }
        if !(self.shadowing_std_db >= 0.0) {
            return Err(Error::InvalidInput("shadowing_std_db must be >= 0".into()));
        }
        Ok(())
    }
}

/// One slot of channel power gains, row-major `K x N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSample {
    pub n_users: usize,
    pub n_subcarriers: usize,
    gains: Vec<f64>,
}

impl GainSample {
    pub fn new(n_users: usize, n_subcarriers: usize, gains: Vec<f64>) -> Self {
        assert_eq!(gains.len(), n_users * n_subcarriers);
        debug_assert!(gains.iter().all(|g| g.is_finite() && *g >= 0.0));
        GainSample {
            n_users,
            n_subcarriers,
            gains,
        }
    }

    pub fn get(&self, user: usize, subcarrier: usize) -> f64 {
        self.gains[user * self.n_subcarriers + subcarrier]
    }

    pub fn user_row(&self, user: usize) -> &[f64] {
        &self.gains[user * self.n_subcarriers..(user + 1) * self.n_subcarriers]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gains
    }
}

/// dB power value to linear.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear power value to dB.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Capacity gap for an uncoded target bit error rate: `-ln(5 BER) / 1.5`.
pub fn capacity_gap_from_ber(ber: f64) -> Result<f64> {
    if !(ber > 0.0 && ber < 0.2) {
        return Err(Error::InvalidInput(
            "ber_target must lie in (0, 0.2) for a positive capacity gap".into(),
        ));
    }
    Ok(-(5.0 * ber).ln() / 1.5)
}

/// Inverse CDF of the distance density `f(d) = 2d / R^2` on (0, R].
pub fn distance_from_uniform(u: f64, radius: f64) -> f64 {
    radius * u.sqrt()
}

/// Draws `k` users uniformly over the cell disc with log-normal shadowing.
///
/// Mean gain is `(d / d0)^(-gamma) * s`; demand and outage tolerance are
/// applied uniformly (callers may overwrite per user afterwards).
pub fn draw_user_profiles<R: Rng>(
    geometry: &CellGeometry,
    k: usize,
    min_rate: f64,
    outage_tolerance: f64,
    rng: &mut R,
) -> Result<Vec<UserProfile>> {
    if k == 0 {
        return Err(Error::InvalidInput("need at least one user".into()));
    }
    geometry.validate()?;
    let shadow = Normal::new(0.0, geometry.shadowing_std_db)
        .map_err(|e| Error::InvalidInput(format!("shadowing distribution: {e}")))?;
    let mut users = Vec::with_capacity(k);
    for _ in 0..k {
        let d = distance_from_uniform(rng.random::<f64>(), geometry.radius);
        let s = db_to_linear(shadow.sample(rng));
        let sigma = (d / geometry.reference_distance).powf(-geometry.path_loss_exponent) * s;
        let user = UserProfile {
            avg_gain: sigma,
            min_rate,
            outage_tolerance,
            distance: Some(d),
            shadowing: Some(s),
        };
        user.validate()?;
        users.push(user);
    }
    Ok(users)
}

/// One slot of independent exponential gains, mean `sigma_k` per user.
pub fn sample_gains<R: Rng>(
    users: &[UserProfile],
    params: &SystemParams,
    rng: &mut R,
) -> GainSample {
    assert!(!users.is_empty());
    let n = params.n_subcarriers;
    let mut gains = Vec::with_capacity(users.len() * n);
    for user in users {
        let exp = Exp::new(1.0 / user.avg_gain).expect("avg_gain validated > 0");
        for _ in 0..n {
            gains.push(exp.sample(rng));
        }
    }
    GainSample::new(users.len(), n, gains)
}

/// Instantaneous rate `W log2(1 + p_t g / (Gamma N0))` in bits/s.
pub fn instantaneous_rate(gain: f64, params: &SystemParams) -> f64 {
    debug_assert!(gain >= 0.0);
    params.bandwidth_per_subcarrier * (params.snr_scale() * gain).ln_1p() / std::f64::consts::LN_2
}

/// Expected per-subcarrier rate of a user, by quadrature over the
/// exponential gain density.
pub fn expected_rate(user: &UserProfile, params: &SystemParams, quad: &QuadOpts) -> Result<f64> {
    let t = params.snr_scale() * user.avg_gain;
    let w = params.bandwidth_per_subcarrier;
    quad::integrate(
        |u| w * (t * u).ln_1p() / std::f64::consts::LN_2 * (-u).exp(),
        0.0,
        RATE_INTEGRAL_LIMIT,
        quad,
    )
}

/// Channel coherence time `9 c / (16 pi f_c v)` in seconds.
pub fn coherence_time(carrier_freq: f64, speed: f64) -> f64 {
    assert!(carrier_freq > 0.0 && speed > 0.0);
    9.0 * SPEED_OF_LIGHT / (16.0 * std::f64::consts::PI * carrier_freq * speed)
}

/// Tapped delay line with exponentially decaying power profile.
///
/// `n_taps` taps sit at multiples of `tap_spacing` (seconds); the decay is
/// fitted so the profile's rms delay spread matches `rms_delay`. The N
/// subcarriers span the bandwidth `1 / tap_spacing` implied by the tap grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayProfile {
    pub n_taps: usize,
    pub tap_spacing: f64,
    pub rms_delay: f64,
}

impl DelayProfile {
    pub fn new(n_taps: usize, tap_spacing: f64, rms_delay: f64) -> Result<Self> {
        let profile = DelayProfile {
            n_taps,
            tap_spacing,
            rms_delay,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Single-tap profile: a frequency-flat channel, fully correlated
    /// across subcarriers.
    pub fn flat() -> Self {
        DelayProfile {
            n_taps: 1,
            tap_spacing: 50e-9,
            rms_delay: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_taps < 1 {
            return Err(Error::InvalidInput("delay profile needs n_taps >= 1".into()));
        }
        if !(self.tap_spacing > 0.0) {
            return Err(Error::InvalidInput("tap_spacing must be > 0".into()));
        }
        if !(self.rms_delay >= 0.0) {
            return Err(Error::InvalidInput("rms_delay must be >= 0".into()));
        }
        if self.n_taps == 1 && self.rms_delay > 0.0 {
            return Err(Error::InvalidInput(
                "a single tap cannot produce a positive rms delay".into(),
            ));
        }
        if self.rms_delay >= self.max_rms_delay() {
            return Err(Error::InvalidInput(format!(
                "rms_delay {:.3e}s unreachable: {} taps at {:.3e}s cap it at {:.3e}s",
                self.rms_delay,
                self.n_taps,
                self.tap_spacing,
                self.max_rms_delay()
            )));
        }
        Ok(())
    }

    /// rms delay of the uniform (no-decay) profile: the supremum over decays.
    fn max_rms_delay(&self) -> f64 {
        if self.n_taps == 1 {
            return f64::MIN_POSITIVE;
        }
        let l = self.n_taps as f64;
        self.tap_spacing * ((l * l - 1.0) / 12.0).sqrt()
    }

    /// Normalized tap powers `p_l ∝ r^l` with the geometric ratio fitted by
    /// bisection so the profile hits `rms_delay` exactly.
    pub fn tap_powers(&self) -> Vec<f64> {
        if self.n_taps == 1 || self.rms_delay == 0.0 {
            let mut p = vec![0.0; self.n_taps];
            p[0] = 1.0;
            return p;
        }
        let rms_of = |ratio: f64| -> f64 {
            let (mut s0, mut s1, mut s2, mut w) = (0.0, 0.0, 0.0, 1.0);
            for l in 0..self.n_taps {
                let lf = l as f64;
                s0 += w;
                s1 += w * lf;
                s2 += w * lf * lf;
                w *= ratio;
            }
            let mean = s1 / s0;
            self.tap_spacing * (s2 / s0 - mean * mean).max(0.0).sqrt()
        };
        let (mut lo, mut hi) = (0.0f64, 1.0 - 1e-12);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if rms_of(mid) < self.rms_delay {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let ratio = 0.5 * (lo + hi);
        let mut p: Vec<f64> = (0..self.n_taps).map(|l| ratio.powi(l as i32)).collect();
        let total: f64 = p.iter().sum();
        for v in &mut p {
            *v /= total;
        }
        p
    }
}

/// Draws frequency-correlated gains: per user, complex Gaussian taps with
/// the profile's powers, transformed to the N subcarrier frequencies.
/// Each marginal gain stays exponential with mean `sigma_k`.
pub struct CorrelatedGainSampler {
    n_subcarriers: usize,
    /// sqrt(p_l / 2) per tap; scaled by sqrt(sigma_k) at sample time.
    tap_scale: Vec<f64>,
    /// exp(-i 2 pi n l / N), flattened [n * L + l].
    twiddles: Vec<Complex64>,
}

impl CorrelatedGainSampler {
    pub fn new(profile: &DelayProfile, n_subcarriers: usize) -> Result<Self> {
        profile.validate()?;
        if n_subcarriers == 0 {
            return Err(Error::InvalidInput("need at least one subcarrier".into()));
        }
        let powers = profile.tap_powers();
        let tap_scale: Vec<f64> = powers.iter().map(|p| (p / 2.0).sqrt()).collect();
        let l_taps = profile.n_taps;
        let mut twiddles = Vec::with_capacity(n_subcarriers * l_taps);
        for n in 0..n_subcarriers {
            for l in 0..l_taps {
                let phase = -2.0 * std::f64::consts::PI * (n as f64) * (l as f64)
                    / (n_subcarriers as f64);
                twiddles.push(Complex64::new(phase.cos(), phase.sin()));
            }
        }
        Ok(CorrelatedGainSampler {
            n_subcarriers,
            tap_scale,
            twiddles,
        })
    }

    pub fn sample<R: Rng>(&self, users: &[UserProfile], rng: &mut R) -> GainSample {
        let l_taps = self.tap_scale.len();
        let n = self.n_subcarriers;
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        let mut gains = Vec::with_capacity(users.len() * n);
        let mut taps = vec![Complex64::default(); l_taps];
        for user in users {
            let amp = user.avg_gain.sqrt();
            for (tap, scale) in taps.iter_mut().zip(&self.tap_scale) {
                let re: f64 = normal.sample(rng);
                let im: f64 = normal.sample(rng);
                *tap = Complex64::new(re, im) * (amp * scale);
            }
            for sc in 0..n {
                let tw = &self.twiddles[sc * l_taps..(sc + 1) * l_taps];
                let h: Complex64 = taps.iter().zip(tw).map(|(t, w)| t * w).sum();
                gains.push(h.norm_sqr());
            }
        }
        GainSample::new(users.len(), n, gains)
    }
}

/// One-shot convenience wrapper around [`CorrelatedGainSampler`].
pub fn sample_correlated_gains<R: Rng>(
    users: &[UserProfile],
    params: &SystemParams,
    profile: &DelayProfile,
    rng: &mut R,
) -> Result<GainSample> {
    let sampler = CorrelatedGainSampler::new(profile, params.n_subcarriers)?;
    Ok(sampler.sample(users, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn test_params(n_users: usize, n_subcarriers: usize) -> SystemParams {
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

    fn test_user(sigma: f64) -> UserProfile {
        UserProfile {
            avg_gain: sigma,
            min_rate: 20.0,
            outage_tolerance: 0.1,
            distance: None,
            shadowing: None,
        }
    }

    #[test]
    fn params_validation() {
        let mut p = test_params(4, 64);
        p.validate().unwrap();
        assert_eq!(p.slots_per_window(), 1000);
        p.capacity_gap = 0.5;
        assert!(p.validate().is_err());
    }

    #[test]
    fn boundary_user_distance() {
        assert_eq!(distance_from_uniform(1.0, 100.0), 100.0);
    }

    #[test]
    fn boundary_received_power_matches_link_budget() {
        // 90 dB at 1 m, path loss exponent 4: 10 dB mean received power at 100 m
        let p_t = db_to_linear(90.0);
        let sigma = (100.0f64 / 1.0).powf(-4.0) * 1.0;
        assert!((linear_to_db(p_t * sigma) - 10.0).abs() < 1e-9);
    }

    #[test]
    fn distance_density_second_moment() {
        // E[d^2] = R^2 / 2 for f(d) = 2d / R^2
        let geo = CellGeometry {
            radius: 100.0,
            reference_distance: 1.0,
            path_loss_exponent: 4.0,
            shadowing_std_db: 8.0,
            ref_rx_power_db: 90.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let users = draw_user_profiles(&geo, 1_000_000, 20.0, 0.1, &mut rng).unwrap();
        let mean_d2: f64 = users
            .iter()
            .map(|u| u.distance.unwrap().powi(2))
            .sum::<f64>()
            / users.len() as f64;
        let expected = geo.radius * geo.radius / 2.0;
        assert!(
            (mean_d2 - expected).abs() / expected < 0.01,
            "mean d^2 = {mean_d2}"
        );
    }

    #[test]
    fn exponential_gain_mean() {
        let params = test_params(1, 1);
        let users = vec![test_user(1.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut sum = 0.0;
        let draws = 1_000_000;
        for _ in 0..draws {
            sum += sample_gains(&users, &params, &mut rng).get(0, 0);
        }
        let mean = sum / draws as f64;
        assert!((0.997..=1.003).contains(&mean), "mean = {mean}");
    }

    #[test]
    fn exponential_tail_probability() {
        let params = test_params(1, 1);
        let users = vec![test_user(2.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let draws = 1_000_000;
        let mut hits = 0usize;
        for _ in 0..draws {
            if sample_gains(&users, &params, &mut rng).get(0, 0) > 2.0 {
                hits += 1;
            }
        }
        let p = hits as f64 / draws as f64;
        assert!((p - (-1.0f64).exp()).abs() < 0.005 * (-1.0f64).exp() + 0.002, "p = {p}");
    }

    #[test]
    fn gains_are_deterministic_per_seed() {
        let params = test_params(3, 8);
        let users: Vec<_> = [0.5, 1.0, 2.0].iter().map(|&s| test_user(s)).collect();
        let a = sample_gains(&users, &params, &mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_gains(&users, &params, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn rate_at_zero_gain() {
        let params = test_params(1, 1);
        assert_eq!(instantaneous_rate(0.0, &params), 0.0);
    }

    #[test]
    fn rate_unit_point() {
        // W = 1, p_t / (Gamma N0) = 1, g = 1 -> log2(2) = 1
        let params = test_params(1, 1);
        assert!((instantaneous_rate(1.0, &params) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn capacity_gap_reference_value() {
        let gamma = capacity_gap_from_ber(1e-4).unwrap();
        assert!((gamma - 5.0673).abs() < 1e-4, "gamma = {gamma}");
        assert!(capacity_gap_from_ber(0.5).is_err());
    }

    #[test]
    fn rate_monotone_and_concave_in_gain() {
        let params = test_params(1, 1);
        let grid: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let rates: Vec<f64> = grid.iter().map(|&g| instantaneous_rate(g, &params)).collect();
        for w in rates.windows(3) {
            assert!(w[1] >= w[0]);
            assert!(w[2] - 2.0 * w[1] + w[0] <= 1e-12);
        }
    }

    #[test]
    fn expected_rate_degenerate_channel() {
        let params = test_params(1, 1);
        let r = expected_rate(&test_user(1e-12), &params, &QuadOpts::default()).unwrap();
        assert!(r < 1e-9, "r = {r:e}");
    }

    #[test]
    fn expected_rate_monte_carlo_oracle() {
        let params = test_params(1, 1);
        let user = test_user(1.0);
        let quad = expected_rate(&user, &params, &QuadOpts::default()).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let exp = Exp::new(1.0).unwrap();
        let draws = 10_000_000usize;
        let (mut sum, mut sumsq) = (0.0, 0.0);
        for _ in 0..draws {
            let r = instantaneous_rate(exp.sample(&mut rng), &params);
            sum += r;
            sumsq += r * r;
        }
        let mean = sum / draws as f64;
        let var = (sumsq / draws as f64 - mean * mean).max(0.0);
        let se = (var / draws as f64).sqrt();
        assert!(
            (quad - mean).abs() <= 3.0 * se,
            "quad = {quad}, mc = {mean} +- {se}"
        );
    }

    #[test]
    fn expected_rate_linear_in_bandwidth() {
        let mut params = test_params(1, 1);
        let user = test_user(0.7);
        let r1 = expected_rate(&user, &params, &QuadOpts::default()).unwrap();
        params.bandwidth_per_subcarrier = 2.0;
        let r2 = expected_rate(&user, &params, &QuadOpts::default()).unwrap();
        assert!((r2 - 2.0 * r1).abs() <= 1e-15 * r2.abs());
    }

    #[test]
    fn expected_rate_monotone_in_sigma() {
        let params = test_params(1, 1);
        let mut last = 0.0;
        for i in 1..=10 {
            let r = expected_rate(&test_user(0.3 * i as f64), &params, &QuadOpts::default())
                .unwrap();
            assert!(r > last);
            last = r;
        }
    }

    #[test]
    fn coherence_time_reference_point() {
        let mph45 = 20.1168;
        let t0 = coherence_time(2.5e9, mph45);
        assert!((t0 - 1.07e-3).abs() < 0.01e-3, "t0 = {t0}");
        assert!((coherence_time(2.5e9, 2.0 * mph45) - t0 / 2.0).abs() < 1e-18);
        let fc = 9.0 * SPEED_OF_LIGHT / (16.0 * std::f64::consts::PI);
        assert!((coherence_time(fc, 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delay_profile_validation() {
        assert!(DelayProfile::new(0, 50e-9, 0.0).is_err());
        assert!(DelayProfile::new(8, -1.0, 37.79e-9).is_err());
        assert!(DelayProfile::new(1, 50e-9, 10e-9).is_err());
        // 8 taps at 50 ns cap the rms spread at ~114.6 ns
        assert!(DelayProfile::new(8, 50e-9, 300e-9).is_err());
        DelayProfile::new(8, 50e-9, 37.79e-9).unwrap();
    }

    #[test]
    fn tap_powers_hit_requested_rms() {
        let profile = DelayProfile::new(8, 50e-9, 37.79e-9).unwrap();
        let p = profile.tap_powers();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mean: f64 = p.iter().enumerate().map(|(l, w)| l as f64 * w).sum();
        let second: f64 = p.iter().enumerate().map(|(l, w)| (l * l) as f64 * w).sum();
        let rms = 50e-9 * (second - mean * mean).sqrt();
        assert!((rms - 37.79e-9).abs() < 1e-15, "rms = {rms:e}");
    }

    #[test]
    fn flat_profile_is_fully_correlated() {
        let params = test_params(2, 16);
        let users = vec![test_user(1.0), test_user(3.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let sample =
            sample_correlated_gains(&users, &params, &DelayProfile::flat(), &mut rng).unwrap();
        for k in 0..2 {
            let row = sample.user_row(k);
            for &g in row {
                assert!((g - row[0]).abs() < 1e-12 * row[0].max(1.0));
            }
        }
    }

    #[test]
    fn correlated_gains_keep_exponential_mean() {
        let params = test_params(1, 8);
        let users = vec![test_user(2.0)];
        let profile = DelayProfile::new(8, 50e-9, 37.79e-9).unwrap();
        let sampler = CorrelatedGainSampler::new(&profile, params.n_subcarriers).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let draws = 200_000;
        let mut sums = vec![0.0f64; 8];
        for _ in 0..draws {
            let s = sampler.sample(&users, &mut rng);
            for (n, acc) in sums.iter_mut().enumerate() {
                *acc += s.get(0, n);
            }
        }
        for (n, acc) in sums.iter().enumerate() {
            let mean = acc / draws as f64;
            assert!(
                (mean - 2.0).abs() / 2.0 < 0.01,
                "subcarrier {n}: mean = {mean}"
            );
        }
    }

    #[test]
    fn adjacent_correlation_falls_with_delay_spread() {
        let params = test_params(1, 64);
        let users = vec![test_user(1.0)];
        let corr_at = |rms: f64, taps: usize| -> f64 {
            let profile = DelayProfile::new(taps, 50e-9, rms).unwrap();
            let sampler = CorrelatedGainSampler::new(&profile, params.n_subcarriers).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(23);
            let draws = 20_000;
            let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for _ in 0..draws {
                let s = sampler.sample(&users, &mut rng);
                let (x, y) = (s.get(0, 0), s.get(0, 1));
                sx += x;
                sy += y;
                sxx += x * x;
                syy += y * y;
                sxy += x * y;
            }
            let n = draws as f64;
            (sxy / n - sx / n * sy / n)
                / ((sxx / n - (sx / n).powi(2)) * (syy / n - (sy / n).powi(2))).sqrt()
        };
        let tight = corr_at(10e-9, 8);
        let wide = corr_at(300e-9, 32);
        assert!(
            tight > wide + 0.05,
            "corr(10ns) = {tight}, corr(300ns) = {wide}"
        );
    }
}
