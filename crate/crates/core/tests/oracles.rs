//! Closed-form and hand-computed references.

use gridloss::cases::ieee30;
use gridloss::{
    analyze, build_ybus, initial_state, load_network, solve, Branch, Bus, BusKind, Network, SolverOptions,
};
use num_complex::Complex64;

fn two_bus(p: f64, q: f64, x: f64) -> Network {
    Network {
        base_mva: 100.0,
        buses: vec![Bus::slack(1, 1.0), Bus::load(2, p, q)],
        branches: vec![Branch::line(1, 2, 0.0, x, 0.0)],
    }
}

/// Lossless line feeding P + jQ from a 1.0 pu source:
/// `V^4 + (2Qx - 1) V^2 + x^2 (P^2 + Q^2) = 0`, high-voltage root, and
/// `sin(delta) = -P x / V`.
fn quartic_oracle(p: f64, q: f64, x: f64) -> (f64, f64) {
    let b = 2.0 * q * x - 1.0;
    let c = x * x * (p * p + q * q);
    let v2 = ((-b + (b * b - 4.0 * c).sqrt()) / 2.0).sqrt();
    (v2, (-p * x / v2).asin())
}

fn tight() -> SolverOptions {
    SolverOptions { tolerance: 1e-11, ..SolverOptions::default() }
}

#[test]
fn two_bus_matches_quartic() {
    let (v, d) = quartic_oracle(1.0, 0.0, 0.1);
    assert!((v - 0.994_936).abs() < 1e-6, "{v}");
    assert!((d.to_degrees() + 5.768_6).abs() < 1e-3, "{}", d.to_degrees());

    for (p, q, x) in [(1.0, 0.0, 0.1), (0.8, 0.3, 0.2), (0.5, -0.2, 0.15), (0.0, 0.0, 0.1)] {
        let net = two_bus(p, q, x);
        let sol = solve(&net, &tight()).unwrap();
        assert!(sol.converged);
        let (v, d) = quartic_oracle(p, q, x);
        assert!((sol.state.v_mag[1] - v).abs() < 1e-8, "V2 {} vs {v}", sol.state.v_mag[1]);
        assert!((sol.state.v_ang[1] - d).abs() < 1e-8, "d2 {} vs {d}", sol.state.v_ang[1]);

        // series current and reactive absorption
        let report = analyze(&net, &sol);
        let i = (Complex64::new(1.0, 0.0) - Complex64::from_polar(v, d)) / Complex64::new(0.0, x);
        assert!(report.total_p_loss_mw.abs() < 1e-8);
        assert!((report.total_q_loss_mvar / 100.0 - i.norm_sqr() * x).abs() < 1e-8);
    }
}

#[test]
fn two_bus_current_and_reactive_loss() {
    let sol = solve(&two_bus(1.0, 0.0, 0.1), &tight()).unwrap();
    let report = analyze(&two_bus(1.0, 0.0, 0.1), &sol);
    // |I| = P / (V cos(0)) since the receiving end draws no Q
    let v2 = sol.state.v_mag[1];
    assert!((1.0 / v2 - 1.005_09).abs() < 1e-5);
    assert!((report.total_q_loss_mvar / 100.0 - 0.101_02).abs() < 1e-5);
    // slack supplies P and the line's reactive absorption
    let gen = sol.generation(&two_bus(1.0, 0.0, 0.1), 0);
    assert!((gen.re - 1.0).abs() < 1e-10);
    assert!((gen.im - report.total_q_loss_mvar / 100.0).abs() < 1e-10);
}

#[test]
fn resistive_two_bus_loss_is_i_squared_r() {
    let mut net = two_bus(0.6, 0.2, 0.12);
    net.branches[0].r = 0.04;
    let sol = solve(&net, &tight()).unwrap();
    let v = sol.state.phasors();
    let i = (v[0] - v[1]) / Complex64::new(0.04, 0.12);
    let report = analyze(&net, &sol);
    assert!((report.total_p_loss_mw / 100.0 - i.norm_sqr() * 0.04).abs() < 1e-10);
    assert!((report.total_generation.p_mw - 60.0 - report.total_p_loss_mw).abs() < 1e-8);
}

#[test]
fn ieee30_fixture_shape() {
    let net = ieee30();
    assert_eq!(net.bus_count(), 30);
    assert_eq!(net.branches.len(), 41);
    assert_eq!(net.base_mva, 100.0);
    let count = |k: BusKind| net.buses.iter().filter(|b| b.kind == k).count();
    assert_eq!((count(BusKind::Slack), count(BusKind::Generator), count(BusKind::Load)), (1, 5, 24));
    assert!((net.total_p_demand() * 100.0 - 283.4).abs() < 1e-9);
    let q: f64 = net.buses.iter().map(|b| b.q_demand).sum();
    assert!((q * 100.0 - 126.2).abs() < 1e-9);

    let taps: Vec<(u32, u32, f64)> = net
        .branches
        .iter()
        .filter(|b| b.is_transformer() && b.tap != 1.0)
        .map(|b| (b.from_bus, b.to_bus, b.tap))
        .collect();
    assert_eq!(taps, vec![(6, 9, 0.978), (6, 10, 0.969), (4, 12, 0.932), (28, 27, 0.968)]);

    let set = |id: u32| net.bus(id).unwrap().v_set;
    assert_eq!([set(1), set(2), set(5), set(8), set(11), set(13)], [1.06, 1.043, 1.01, 1.01, 1.082, 1.071]);
}

#[test]
fn ieee30_shunts_and_diagonal() {
    let net = ieee30();
    let y = build_ybus(&net);
    assert!((net.bus(10).unwrap().shunt_b - 0.19).abs() < 1e-15);
    assert!((net.bus(24).unwrap().shunt_b - 0.043).abs() < 1e-15);

    // Y(1,1) by hand: lines 1-2 and 1-3 with half their charging
    let y12 = Complex64::new(0.0192, 0.0575).inv();
    let y13 = Complex64::new(0.0452, 0.1652).inv();
    let expected = y12 + y13 + Complex64::new(0.0, (0.0528 + 0.0408) / 2.0);
    assert!((y.get(0, 0) - expected).norm() < 1e-12);
    assert!((y.get(0, 1) + y12).norm() < 1e-12);

    // removing the bus-10 capacitor changes only that diagonal, by 0.19j
    let mut bare = net.clone();
    bare.buses[9].shunt_b = 0.0;
    let y0 = build_ybus(&bare);
    assert!((y.get(9, 9) - y0.get(9, 9) - Complex64::new(0.0, 0.19)).norm() < 1e-12);
}

#[test]
fn ieee30_flat_start() {
    let net = ieee30();
    let s = initial_state(&net);
    assert_eq!(s.v_mag[0], 1.06);
    assert_eq!(s.v_mag[1], 1.043);
    assert_eq!(s.v_mag[2], 1.0);
    assert_eq!(s.v_mag[10], 1.082);
    assert!(s.v_ang.iter().all(|a| *a == 0.0));
}

#[test]
fn per_unit_normalization() {
    let text = "[system]\nbase_mva=50\n[buses]\n1 slack 0 0 0 1.0 -10 10 0\n2 load 25 10 0 1 0 0 5\n\
                [branches]\n1 2 0.01 0.1 0.02 1\n";
    let net = load_network(text.as_bytes()).unwrap();
    let b = net.bus(2).unwrap();
    assert_eq!((b.p_demand, b.q_demand, b.shunt_b), (0.5, 0.2, 0.1));
    assert_eq!((net.bus(1).unwrap().q_min, net.bus(1).unwrap().q_max), (-0.2, 0.2));
    // impedances are already per-unit
    assert_eq!(net.branches[0].x, 0.1);
}

#[test]
fn ieee30_base_case_is_self_consistent() {
    let net = ieee30();
    let sol = solve(&net, &SolverOptions::default()).unwrap();
    assert!(sol.converged);
    // strictly decreasing mismatch once Newton takes over
    assert!(sol.mismatch_trace.windows(2).all(|w| w[1] < w[0]));
    let report = analyze(&net, &sol);
    let gen = report.total_generation.p_mw;
    assert!((gen - report.total_load.p_mw - report.total_p_loss_mw).abs() < 1e-6);
    // generator buses sit at their set-points when no limit binds
    assert!(sol.q_limit_switches.is_empty());
    for (i, b) in net.buses.iter().enumerate() {
        if b.kind != BusKind::Load {
            assert_eq!(sol.state.v_mag[i], b.v_set);
        }
    }
}

/// Dense complex inverse by Gauss-Jordan with partial pivoting.
fn invert(mut a: Vec<Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    let n = a.len();
    let mut inv: Vec<Vec<Complex64>> = (0..n)
        .map(|i| (0..n).map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].norm().total_cmp(&a[y][c].norm())).unwrap();
        a.swap(c, p);
        inv.swap(c, p);
        let d = a[c][c];
        for j in 0..n {
            a[c][j] /= d;
            inv[c][j] /= d;
        }
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                for j in 0..n {
                    let (ac, ic) = (a[c][j], inv[c][j]);
                    a[r][j] -= f * ac;
                    inv[r][j] -= f * ic;
                }
            }
        }
    }
    inv
}

/// Bus-pair loss formula with R = Re(Ybus^-1):
/// `sum_ij a_ij (Pi Pj + Qi Qj) + b_ij (Qi Pj - Pi Qj)`,
/// `a_ij = R_ij cos(di - dj) / (Vi Vj)`, `b_ij = R_ij sin(di - dj) / (Vi Vj)`.
/// `flip` uses `+ Pi Qj` in the second product instead.
fn bus_pair_loss(net: &Network, sol: &gridloss::LoadFlowSolution, flip: bool) -> f64 {
    let y = build_ybus(net);
    let n = y.n();
    let z = invert((0..n).map(|i| (0..n).map(|j| y.get(i, j)).collect()).collect());
    let (p, q) = (&sol.p_injection, &sol.q_injection);
    let (v, d) = (&sol.state.v_mag, &sol.state.v_ang);
    let mut loss = 0.0;
    for i in 0..n {
        for j in 0..n {
            let r = z[i][j].re / (v[i] * v[j]);
            let (a, b) = (r * (d[i] - d[j]).cos(), r * (d[i] - d[j]).sin());
            let cross = if flip { q[i] * p[j] + p[i] * q[j] } else { q[i] * p[j] - p[i] * q[j] };
            loss += a * (p[i] * p[j] + q[i] * q[j]) + b * cross;
        }
    }
    loss
}

#[test]
fn bus_pair_loss_formula_matches_branch_sum() {
    // IEEE-30 carries charging and shunts, so its Ybus is invertible
    let net = ieee30();
    let sol = solve(&net, &SolverOptions::default()).unwrap();
    let branch = analyze(&net, &sol).total_p_loss_mw / 100.0;
    let exact = bus_pair_loss(&net, &sol, false);
    assert!((exact - branch).abs() < 1e-8, "{exact} vs {branch}");
    // with a plus sign the antisymmetric b terms cancel and the formula misses
    let flipped = bus_pair_loss(&net, &sol, true);
    assert!((flipped - branch).abs() > 1e-4, "{flipped} vs {branch}");
}
