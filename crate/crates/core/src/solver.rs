//! Full Newton-Raphson load flow in polar coordinates.
//!
//! Unknowns are the angles of every non-slack bus followed by the voltage
//! magnitudes of the PQ buses. Mismatches and Jacobian rows use the same
//! ordering, both ascending in internal bus index.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::admittance::{build_ybus, AdmittanceMatrix};
use crate::error::{Error, Result};
use crate::linalg::lu_solve;
use crate::network::{BusKind, Network};

/// Mismatch magnitude above which an iterate is treated as divergent.
const DIVERGENCE_LIMIT: f64 = 1e6;

/// Q limits are only checked once the mismatch is below this, so that the
/// transient reactive output of early iterates does not trigger switching.
const Q_CHECK_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub v_mag: Vec<f64>,
    /// Radians.
    pub v_ang: Vec<f64>,
}

impl StateVector {
    pub fn len(&self) -> usize {
        self.v_mag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v_mag.is_empty()
    }

    pub fn phasor(&self, i: usize) -> Complex64 {
        Complex64::from_polar(self.v_mag[i], self.v_ang[i])
    }

    pub fn phasors(&self) -> Vec<Complex64> {
        (0..self.len()).map(|i| self.phasor(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub enforce_q_limits: bool,
    pub flat_start: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tolerance: 1e-6, max_iterations: 30, enforce_q_limits: true, flat_start: true }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance {} must be positive",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QLimit {
    Min,
    Max,
}

/// A PV bus converted to PQ, or a converted bus restored to PV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QLimitSwitch {
    pub bus: u32,
    pub iteration: usize,
    pub limit: QLimit,
    pub restored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadFlowSolution {
    pub state: StateVector,
    pub converged: bool,
    pub iterations: usize,
    /// Max |mismatch| (pu) evaluated at the start of each iteration.
    pub mismatch_trace: Vec<f64>,
    pub p_injection: Vec<f64>,
    pub q_injection: Vec<f64>,
    pub q_limit_switches: Vec<QLimitSwitch>,
}

impl LoadFlowSolution {
    pub fn final_mismatch(&self) -> f64 {
        self.mismatch_trace.last().copied().unwrap_or(f64::INFINITY)
    }

    /// Net complex generation at bus `i` (injection plus local demand).
    pub fn generation(&self, network: &Network, i: usize) -> Complex64 {
        let b = &network.buses[i];
        Complex64::new(self.p_injection[i] + b.p_demand, self.q_injection[i] + b.q_demand)
    }
}

/// Split of the non-slack buses into voltage-controlled and load buses.
///
/// `q_gen` pins the reactive generation of every PQ bus: zero for load buses,
/// the violated limit for generators switched to PQ.
#[derive(Debug, Clone, PartialEq)]
pub struct BusPartition {
    pub slack: usize,
    pub pv: Vec<usize>,
    pub pq: Vec<usize>,
    pub q_gen: Vec<f64>,
}

impl BusPartition {
    /// Partition following the network's bus kinds.
    pub fn from_network(network: &Network) -> Self {
        let mut pv = Vec::new();
        let mut pq = Vec::new();
        let mut slack = 0;
        for (i, b) in network.buses.iter().enumerate() {
            match b.kind {
                BusKind::Slack => slack = i,
                BusKind::Generator => pv.push(i),
                BusKind::Load => pq.push(i),
            }
        }
        Self { slack, pv, pq, q_gen: vec![0.0; network.bus_count()] }
    }

    /// Non-slack buses in ascending index order: the angle unknowns.
    pub fn angle_buses(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.pv.iter().chain(&self.pq).copied().collect();
        v.sort_unstable();
        v
    }

    pub fn unknowns(&self) -> usize {
        self.pv.len() + 2 * self.pq.len()
    }

    fn move_to_pq(&mut self, bus: usize, q_gen: f64) {
        self.pv.retain(|&b| b != bus);
        insert_sorted(&mut self.pq, bus);
        self.q_gen[bus] = q_gen;
    }

    fn move_to_pv(&mut self, bus: usize) {
        self.pq.retain(|&b| b != bus);
        insert_sorted(&mut self.pv, bus);
        self.q_gen[bus] = 0.0;
    }
}

fn insert_sorted(v: &mut Vec<usize>, x: usize) {
    let pos = v.partition_point(|&y| y < x);
    v.insert(pos, x);
}

/// Flat start: slack and generator buses at their set-point, load buses at
/// 1.0 pu, all angles zero.
pub fn initial_state(network: &Network) -> StateVector {
    let v_mag = network
        .buses
        .iter()
        .map(|b| match b.kind {
            BusKind::Slack | BusKind::Generator => b.v_set,
            BusKind::Load => 1.0,
        })
        .collect();
    StateVector { v_mag, v_ang: vec![0.0; network.bus_count()] }
}

/// Per-bus injected real and reactive power, `S_i = V_i * conj(sum_k Y_ik V_k)`.
pub fn compute_injections(state: &StateVector, ybus: &AdmittanceMatrix) -> (Vec<f64>, Vec<f64>) {
    let v = state.phasors();
    let s = complex_injections(&v, ybus);
    (s.iter().map(|s| s.re).collect(), s.iter().map(|s| s.im).collect())
}

fn complex_injections(v: &[Complex64], ybus: &AdmittanceMatrix) -> Vec<Complex64> {
    let currents = bus_currents(v, ybus);
    v.iter().zip(&currents).map(|(v, i)| v * i.conj()).collect()
}

fn bus_currents(v: &[Complex64], ybus: &AdmittanceMatrix) -> Vec<Complex64> {
    (0..v.len())
        .map(|i| ybus.row(i).iter().zip(v).map(|(y, v)| y * v).sum())
        .collect()
}

/// `[dP over non-slack buses, dQ over PQ buses]`, scheduled minus calculated.
pub fn compute_mismatch(
    network: &Network,
    state: &StateVector,
    ybus: &AdmittanceMatrix,
    partition: &BusPartition,
) -> Vec<f64> {
    let (p, q) = compute_injections(state, ybus);
    mismatch_from_injections(network, &p, &q, partition)
}

fn mismatch_from_injections(
    network: &Network,
    p: &[f64],
    q: &[f64],
    partition: &BusPartition,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(partition.unknowns());
    for i in partition.angle_buses() {
        let b = &network.buses[i];
        out.push(b.p_gen - b.p_demand - p[i]);
    }
    for &i in &partition.pq {
        let b = &network.buses[i];
        out.push(partition.q_gen[i] - b.q_demand - q[i]);
    }
    out
}

/// Polar Jacobian `[dP/dθ dP/d|V|; dQ/dθ dQ/d|V|]`, row-major, square with
/// side `partition.unknowns()`.
pub fn build_jacobian(
    state: &StateVector,
    ybus: &AdmittanceMatrix,
    partition: &BusPartition,
) -> Vec<f64> {
    let v = state.phasors();
    let currents = bus_currents(&v, ybus);
    let unit: Vec<Complex64> = v
        .iter()
        .zip(&state.v_mag)
        .map(|(v, m)| if *m != 0.0 { v / *m } else { Complex64::new(1.0, 0.0) })
        .collect();

    let angles = partition.angle_buses();
    let mags = &partition.pq;
    let dim = angles.len() + mags.len();
    let mut jac = vec![0.0; dim * dim];
    let j = Complex64::new(0.0, 1.0);

    // dS_i/dθ_k = j V_i conj(δ_ik I_i - Y_ik V_k)
    let ds_dtheta = |i: usize, k: usize| {
        let mut inner = -ybus.get(i, k) * v[k];
        if i == k {
            inner += currents[i];
        }
        j * v[i] * inner.conj()
    };
    // dS_i/d|V_k| = V_i conj(Y_ik u_k) + δ_ik conj(I_i) u_i
    let ds_dvm = |i: usize, k: usize| {
        let mut d = v[i] * (ybus.get(i, k) * unit[k]).conj();
        if i == k {
            d += currents[i].conj() * unit[i];
        }
        d
    };

    let rows = angles.iter().map(|&i| (i, false)).chain(mags.iter().map(|&i| (i, true)));
    for (r, (i, reactive)) in rows.enumerate() {
        let pick = |s: Complex64| if reactive { s.im } else { s.re };
        for (c, &k) in angles.iter().enumerate() {
            jac[r * dim + c] = pick(ds_dtheta(i, k));
        }
        for (c, &k) in mags.iter().enumerate() {
            jac[r * dim + angles.len() + c] = pick(ds_dvm(i, k));
        }
    }
    jac
}

pub fn solve(network: &Network, options: &SolverOptions) -> Result<LoadFlowSolution> {
    solve_from(network, options, None)
}

/// Solve starting from `warm` when `options.flat_start` is false and a warm
/// state is supplied; otherwise from the flat start.
pub fn solve_from(
    network: &Network,
    options: &SolverOptions,
    warm: Option<&StateVector>,
) -> Result<LoadFlowSolution> {
    options.validate()?;
    let ybus = build_ybus(network);
    let mut state = match warm {
        Some(w) if !options.flat_start => {
            assert_eq!(w.len(), network.bus_count(), "warm state has wrong dimension");
            let mut s = w.clone();
            pin_controlled(network, &mut s);
            s
        }
        _ => initial_state(network),
    };
    let mut partition = BusPartition::from_network(network);
    let mut switches = Vec::new();
    let mut trace = Vec::new();
    let mut converged = false;

    for iteration in 1..=options.max_iterations {
        let (p, q) = compute_injections(&state, &ybus);
        let mismatch = mismatch_from_injections(network, &p, &q, &partition);
        let worst = mismatch.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let worst = if mismatch.iter().any(|x| !x.is_finite()) { f64::INFINITY } else { worst };
        trace.push(worst);
        if !worst.is_finite() || worst > DIVERGENCE_LIMIT {
            break;
        }

        if options.enforce_q_limits && worst < Q_CHECK_THRESHOLD {
            let before = switches.len();
            check_q_limits(network, &state, &q, &mut partition, iteration, &mut switches);
            if switches.len() != before {
                // restored PV buses snap back to their set-point
                for s in &switches[before..] {
                    if s.restored {
                        let i = network.bus_index(s.bus).expect("switch bus exists");
                        state.v_mag[i] = network.buses[i].v_set;
                    }
                }
                continue;
            }
        }

        if worst < options.tolerance {
            converged = true;
            break;
        }
        if iteration == options.max_iterations {
            break;
        }

        let mut jac = build_jacobian(&state, &ybus, &partition);
        let mut step = mismatch;
        lu_solve(&mut jac, &mut step).map_err(|_| Error::SingularJacobian { iteration })?;
        let angles = partition.angle_buses();
        for (k, &i) in angles.iter().enumerate() {
            state.v_ang[i] += step[k];
        }
        for (k, &i) in partition.pq.iter().enumerate() {
            state.v_mag[i] += step[angles.len() + k];
        }
    }

    let (p_injection, q_injection) = compute_injections(&state, &ybus);
    Ok(LoadFlowSolution {
        state,
        converged,
        iterations: trace.len(),
        mismatch_trace: trace,
        p_injection,
        q_injection,
        q_limit_switches: switches,
    })
}

fn pin_controlled(network: &Network, state: &mut StateVector) {
    for (i, b) in network.buses.iter().enumerate() {
        match b.kind {
            BusKind::Slack => {
                state.v_mag[i] = b.v_set;
                state.v_ang[i] = 0.0;
            }
            BusKind::Generator => state.v_mag[i] = b.v_set,
            BusKind::Load => {}
        }
    }
}

/// PV buses outside `[q_min, q_max]` become PQ at the violated limit; buses
/// previously switched return to PV when their voltage crosses back over the
/// set-point in the relieving direction.
fn check_q_limits(
    network: &Network,
    state: &StateVector,
    q: &[f64],
    partition: &mut BusPartition,
    iteration: usize,
    switches: &mut Vec<QLimitSwitch>,
) {
    let mut to_pq = Vec::new();
    for &i in &partition.pv {
        let b = &network.buses[i];
        let q_gen = q[i] + b.q_demand;
        if q_gen > b.q_max {
            to_pq.push((i, b.q_max, QLimit::Max));
        } else if q_gen < b.q_min {
            to_pq.push((i, b.q_min, QLimit::Min));
        }
    }
    let mut to_pv = Vec::new();
    for &i in &partition.pq {
        let b = &network.buses[i];
        if b.kind != BusKind::Generator {
            continue;
        }
        let at_max = partition.q_gen[i] == b.q_max;
        let relieved =
            if at_max { state.v_mag[i] > b.v_set } else { state.v_mag[i] < b.v_set };
        if relieved {
            to_pv.push((i, if at_max { QLimit::Max } else { QLimit::Min }));
        }
    }
    for (i, limit_value, limit) in to_pq {
        partition.move_to_pq(i, limit_value);
        switches.push(QLimitSwitch { bus: network.buses[i].id, iteration, limit, restored: false });
    }
    for (i, limit) in to_pv {
        partition.move_to_pv(i);
        switches.push(QLimitSwitch { bus: network.buses[i].id, iteration, limit, restored: true });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Branch, Bus};

    fn two_bus(x: f64, p_load: f64, q_load: f64) -> Network {
        Network {
            base_mva: 100.0,
            buses: vec![Bus::slack(1, 1.0), Bus::load(2, p_load, q_load)],
            branches: vec![Branch::line(1, 2, 0.0, x, 0.0)],
        }
    }

    #[test]
    fn flat_start_profile() {
        let net = Network {
            base_mva: 100.0,
            buses: vec![Bus::slack(1, 1.05), Bus::load(2, 0.1, 0.0), Bus::load(3, 0.1, 0.0)],
            branches: vec![Branch::line(1, 2, 0.0, 0.1, 0.0), Branch::line(2, 3, 0.0, 0.1, 0.0)],
        };
        let s = initial_state(&net);
        assert_eq!(s.v_mag, vec![1.05, 1.0, 1.0]);
        assert_eq!(s.v_ang, vec![0.0; 3]);
    }

    #[test]
    fn lossless_flat_profile_has_no_real_injection() {
        let y = build_ybus(&two_bus(0.5, 0.0, 0.0));
        let (p, q) = compute_injections(&initial_state(&two_bus(0.5, 0.0, 0.0)), &y);
        assert!(p.iter().all(|p| p.abs() < 1e-15));
        assert!(q.iter().all(|q| q.abs() < 1e-15));
    }

    #[test]
    fn shunt_injection_sign() {
        let net = Network {
            base_mva: 100.0,
            buses: vec![Bus { shunt_b: 0.19, ..Bus::slack(1, 1.0) }],
            branches: vec![],
        };
        let (_, q) = compute_injections(&initial_state(&net), &build_ybus(&net));
        assert!((q[0] + 0.19).abs() < 1e-15, "injection {}", q[0]);
    }

    #[test]
    fn flat_start_mismatch_is_minus_load() {
        let net = two_bus(0.5, 1.0, 0.0);
        let y = build_ybus(&net);
        let m = compute_mismatch(&net, &initial_state(&net), &y, &BusPartition::from_network(&net));
        assert_eq!(m.len(), 2);
        assert!((m[0] + 1.0).abs() < 1e-15);
        assert!(m[1].abs() < 1e-15);
    }

    #[test]
    fn two_bus_jacobian_at_flat_start() {
        let net = two_bus(0.5, 0.0, 0.0);
        let y = build_ybus(&net);
        let jac = build_jacobian(&initial_state(&net), &y, &BusPartition::from_network(&net));
        // [dP2/dθ2, dP2/dV2; dQ2/dθ2, dQ2/dV2]
        assert!((jac[0] - 2.0).abs() < 1e-14);
        assert!(jac[1].abs() < 1e-14);
        assert!(jac[2].abs() < 1e-14);
        assert!((jac[3] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zero_load_converges_immediately() {
        let sol = solve(&two_bus(0.5, 0.0, 0.0), &SolverOptions::default()).unwrap();
        assert!(sol.converged);
        assert!(sol.iterations <= 1);
        assert_eq!(sol.state.v_mag, vec![1.0, 1.0]);
    }

    #[test]
    fn impossible_load_does_not_converge() {
        // far beyond the nose of the PV curve
        let sol = solve(&two_bus(0.5, 5.0, 0.0), &SolverOptions::default()).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.iterations, sol.mismatch_trace.len());
    }

    #[test]
    fn max_iterations_one_only_checks() {
        let opts = SolverOptions { max_iterations: 1, ..Default::default() };
        let sol = solve(&two_bus(0.1, 1.0, 0.0), &opts).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.iterations, 1);
        assert_eq!(sol.state, initial_state(&two_bus(0.1, 1.0, 0.0)));
    }

    #[test]
    fn rejects_bad_options() {
        let net = two_bus(0.1, 0.0, 0.0);
        let bad = SolverOptions { tolerance: 0.0, ..Default::default() };
        assert!(matches!(solve(&net, &bad), Err(Error::InvalidConfig(_))));
        let bad = SolverOptions { max_iterations: 0, ..Default::default() };
        assert!(matches!(solve(&net, &bad), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn q_limit_switches_generator_to_pq() {
        // generator at the far end of a long line holding 1.05 pu needs more
        // reactive output than its 0.1 pu ceiling
        let net = Network {
            base_mva: 100.0,
            buses: vec![
                Bus::slack(1, 1.0),
                Bus { p_demand: 0.5, q_demand: 0.3, ..Bus::generator(2, 0.0, 1.05, -0.1, 0.1) },
            ],
            branches: vec![Branch::line(1, 2, 0.02, 0.2, 0.0)],
        };
        let free = solve(&net, &SolverOptions { enforce_q_limits: false, ..Default::default() })
            .unwrap();
        assert!(free.converged);
        assert!(free.generation(&net, 1).im > 0.1);

        let sol = solve(&net, &SolverOptions::default()).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.q_limit_switches.len(), 1);
        assert_eq!(sol.q_limit_switches[0].limit, QLimit::Max);
        assert!((sol.generation(&net, 1).im - 0.1).abs() < 1e-6);
        assert!(sol.state.v_mag[1] < 1.05);
    }

    #[test]
    fn warm_start_reuses_state() {
        let net = two_bus(0.1, 1.0, 0.0);
        let cold = solve(&net, &SolverOptions::default()).unwrap();
        let warm_opts = SolverOptions { flat_start: false, ..Default::default() };
        let warm = solve_from(&net, &warm_opts, Some(&cold.state)).unwrap();
        assert!(warm.converged);
        assert!(warm.iterations <= 2);
    }
}
