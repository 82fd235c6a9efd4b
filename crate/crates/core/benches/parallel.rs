//! Parallel-vs-sequential comparison of the two Monte Carlo hot loops:
//! the outage evaluation stream and the per-slot LP baseline.

use criterion::{criterion_group, criterion_main, Criterion};

use ccp_ofdma_core::bernstein::Allocation;
use ccp_ofdma_core::channel::{self, SystemParams, UserProfile};
use ccp_ofdma_core::exec;
use ccp_ofdma_core::lp;
use ccp_ofdma_core::seed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params() -> SystemParams {
    SystemParams {
        n_subcarriers: 64,
        n_users: 4,
        bandwidth_per_subcarrier: 1.0,
        tx_power_per_subcarrier: channel::db_to_linear(90.0),
        noise_psd: 1.0,
        capacity_gap: channel::capacity_gap_from_ber(1e-4).unwrap(),
        slot_length: 1e-3,
        window_length: 1.0,
        rng_seed: 0,
    }
}

fn users() -> Vec<UserProfile> {
    [2e-7, 8e-8, 4e-8, 1e-8]
        .iter()
        .map(|&sigma| UserProfile {
            avg_gain: sigma,
            min_rate: 20.0,
            outage_tolerance: 0.1,
            distance: None,
            shadowing: None,
        })
        .collect()
}

fn outage_chunk(
    alloc: &Allocation,
    users: &[UserProfile],
    params: &SystemParams,
    chunk_seed: u64,
    slots: usize,
) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(chunk_seed);
    let mut misses = vec![0u64; users.len()];
    for _ in 0..slots {
        let sample = channel::sample_gains(users, params, &mut rng);
        for (k, user) in users.iter().enumerate() {
            if alloc.user_rate(k, &sample, params) < user.min_rate {
                misses[k] += 1;
            }
        }
    }
    misses
}

fn bench_outage_eval(c: &mut Criterion) {
    let params = params();
    let users = users();
    let alloc = Allocation::reduced(4, 64, vec![0.2, 0.25, 0.25, 0.3]).unwrap();
    let n_chunks = 16;
    let chunk_slots = 500;

    let mut group = c.benchmark_group("outage_eval");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| {
            exec::map_indexed_seq(n_chunks, |i| {
                outage_chunk(&alloc, &users, &params, seed::derive(1, i as u64), chunk_slots)
            })
        })
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| {
            exec::map_indexed(n_chunks, |i| {
                outage_chunk(&alloc, &users, &params, seed::derive(1, i as u64), chunk_slots)
            })
        })
    });
    group.finish();
}

fn bench_fast_lp_slots(c: &mut Criterion) {
    let params = params();
    let users = users();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let slots: Vec<_> = (0..32)
        .map(|_| channel::sample_gains(&users, &params, &mut rng))
        .collect();

    let solve_slot = |sample: &channel::GainSample| {
        let lp = lp::build_fast_lp(sample, &users, &params);
        lp::simplex_solve(&lp).unwrap().objective_value
    };

    let mut group = c.benchmark_group("fast_lp_slots");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| exec::map_indexed_seq(slots.len(), |i| solve_slot(&slots[i])))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| exec::map_indexed(slots.len(), |i| solve_slot(&slots[i])))
    });
    group.finish();
}

criterion_group!(benches, bench_outage_eval, bench_fast_lp_slots);
criterion_main!(benches);
