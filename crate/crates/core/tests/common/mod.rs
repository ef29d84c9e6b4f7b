#![allow(dead_code)]

use gridloss::{build_jacobian, build_ybus, compute_mismatch, validate, Branch, Bus, BusPartition, Network, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub buses: usize,
    pub charging: bool,
    pub taps: bool,
    pub shunts: bool,
}

impl Shape {
    pub fn full(buses: usize) -> Self {
        Self { buses, charging: true, taps: true, shunts: true }
    }

    /// Series-only, unit taps, no shunts.
    pub fn bare(buses: usize) -> Self {
        Self { buses, charging: false, taps: false, shunts: false }
    }
}

/// Connected random network: a random spanning tree plus extra branches.
/// Bus ids are `10, 20, ...` so that ids differ from indices. Loads are
/// light enough that the load flow normally converges.
pub fn random_network(seed: u64, shape: Shape) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = shape.buses.max(2);
    let id = |i: usize| 10 * (i as u32 + 1);
    let mut buses = Vec::with_capacity(n);
    for i in 0..n {
        let mut bus = if i == 0 {
            Bus::slack(id(i), rng.gen_range(1.0..1.06))
        } else if rng.gen_bool(0.3) {
            Bus::generator(id(i), rng.gen_range(0.0..0.4), rng.gen_range(0.98..1.05), -5.0, 5.0)
        } else {
            Bus::load(id(i), rng.gen_range(0.0..0.3), rng.gen_range(-0.05..0.12))
        };
        if shape.shunts && rng.gen_bool(0.3) {
            bus.shunt_b = rng.gen_range(-0.02..0.06);
        }
        buses.push(bus);
    }
    let mut branches = Vec::new();
    let mut add = |rng: &mut ChaCha8Rng, f: usize, t: usize| {
        let r = rng.gen_range(0.005..0.05);
        let x = rng.gen_range(0.03..0.2);
        let mut br = Branch::line(id(f), id(t), r, x, 0.0);
        if shape.charging {
            br.b_charging = rng.gen_range(0.0..0.06);
        }
        if shape.taps && rng.gen_bool(0.3) {
            br.tap = rng.gen_range(0.93..1.07);
            br.transformer = true;
        }
        branches.push(br);
    };
    for t in 1..n {
        let f = rng.gen_range(0..t);
        add(&mut rng, f, t);
    }
    for _ in 0..n / 2 {
        let f = rng.gen_range(0..n);
        let t = rng.gen_range(0..n);
        if f != t {
            add(&mut rng, f, t);
        }
    }
    Network { base_mva: 100.0, buses, branches }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    StateVector {
        v_mag: (0..n).map(|_| rng.gen_range(0.9..1.1)).collect(),
        v_ang: (0..n).map(|_| rng.gen_range(-0.3..0.3)).collect(),
    }
}

/// Largest entry-wise gap between the analytic Jacobian and central
/// differences of the calculated injections, relative to the largest entry.
pub fn jacobian_fd_error(seed: u64, states: usize) -> f64 {
    let network = random_network(seed, Shape::full(6 + seed as usize % 5));
    assert!(validate(&network).is_empty());
    let ybus = build_ybus(&network);
    let partition = BusPartition::from_network(&network);
    let angles = partition.angle_buses();
    let dim = partition.unknowns();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..states {
        let state = random_state(network.bus_count(), &mut rng);
        let jac = build_jacobian(&state, &ybus, &partition);
        assert_eq!(jac.len(), dim * dim);
        let scale = jac.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let columns = angles.iter().map(|&k| (k, true)).chain(partition.pq.iter().map(|&k| (k, false)));
        for (c, (k, is_angle)) in columns.enumerate() {
            let shifted = |delta: f64| {
                let mut s = state.clone();
                if is_angle {
                    s.v_ang[k] += delta;
                } else {
                    s.v_mag[k] += delta;
                }
                // mismatch is scheduled minus calculated
                compute_mismatch(&network, &s, &ybus, &partition)
            };
            let (plus, minus) = (shifted(h), shifted(-h));
            for r in 0..dim {
                let fd = -(plus[r] - minus[r]) / (2.0 * h);
                worst = worst.max((jac[r * dim + c] - fd).abs() / scale);
            }
        }
    }
    worst
}

