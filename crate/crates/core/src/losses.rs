//! Per-branch flows and losses from a solved state.
//!
//! `s_from` and `s_to` both measure power flowing *into* the branch at that
//! end, so real loss is their sum. Reactive loss is reported as the series
//! `|I|^2 x` absorption; the reactive power generated by line charging is
//! kept separately in `q_charging`, so that
//! `Im(s_from) + Im(s_to) = q_loss - q_charging`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::admittance::{branch_admittance, branch_stamp};
use crate::network::{Branch, Network};
use crate::solver::{LoadFlowSolution, StateVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchFlow {
    pub branch: usize,
    pub from_bus: u32,
    pub to_bus: u32,
    pub s_from: Complex64,
    pub s_to: Complex64,
    /// Per-unit.
    pub p_loss: f64,
    /// Series reactive absorption, per-unit.
    pub q_loss: f64,
    /// Reactive power generated by the line charging, per-unit.
    pub q_charging: f64,
}

/// A (real, reactive) pair in MW / MVAR.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PowerPair {
    pub p_mw: f64,
    pub q_mvar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub branch_flows: Vec<BranchFlow>,
    pub total_p_loss_mw: f64,
    pub total_q_loss_mvar: f64,
    pub total_charging_mvar: f64,
    /// Reactive power delivered by bus shunts (capacitors positive).
    pub total_shunt_mvar: f64,
    pub total_generation: PowerPair,
    pub total_load: PowerPair,
}

impl LossReport {
    pub fn total_p_loss_pu(&self, base_mva: f64) -> f64 {
        self.total_p_loss_mw / base_mva
    }
}

/// Currents flowing into the branch at its from and to ends.
pub fn branch_currents(v_from: Complex64, v_to: Complex64, branch: &Branch) -> (Complex64, Complex64) {
    let [yff, ytt, yft] = branch_stamp(branch);
    (yff * v_from + yft * v_to, yft * v_from + ytt * v_to)
}

/// Currents into branch `index` of `network` at the given state.
pub fn branch_current(state: &StateVector, network: &Network, index: usize) -> (Complex64, Complex64) {
    let (f, t) = network.branch_endpoints()[index];
    branch_currents(state.phasor(f), state.phasor(t), &network.branches[index])
}

fn flow_for(index: usize, branch: &Branch, v_from: Complex64, v_to: Complex64) -> BranchFlow {
    let (i_from, i_to) = branch_currents(v_from, v_to, branch);
    let s_from = v_from * i_from.conj();
    let s_to = v_to * i_to.conj();
    let (y, half) = branch_admittance(branch);
    let v_internal = v_from / branch.tap;
    let series = y * (v_internal - v_to);
    BranchFlow {
        branch: index,
        from_bus: branch.from_bus,
        to_bus: branch.to_bus,
        s_from,
        s_to,
        p_loss: s_from.re + s_to.re,
        q_loss: series.norm_sqr() * branch.x,
        q_charging: half.im * (v_internal.norm_sqr() + v_to.norm_sqr()),
    }
}

pub fn branch_flows(state: &StateVector, network: &Network) -> Vec<BranchFlow> {
    network
        .branches
        .iter()
        .zip(network.branch_endpoints())
        .enumerate()
        .map(|(k, (br, (f, t)))| flow_for(k, br, state.phasor(f), state.phasor(t)))
        .collect()
}

/// System totals in MW / MVAR.
///
/// Generation at each bus is its computed injection plus its demand, so
/// `generation - load` equals the sum of all injections and therefore the
/// branch loss sum exactly (real part), and
/// `q_gen + charging + shunt - q_load = q_loss` for the reactive part.
pub fn total_losses(
    flows: &[BranchFlow],
    network: &Network,
    solution: &LoadFlowSolution,
) -> LossReport {
    let base = network.base_mva;
    let p_loss: f64 = flows.iter().map(|f| f.p_loss).sum();
    let q_loss: f64 = flows.iter().map(|f| f.q_loss).sum();
    let charging: f64 = flows.iter().map(|f| f.q_charging).sum();
    let shunt: f64 = network
        .buses
        .iter()
        .zip(&solution.state.v_mag)
        .map(|(b, v)| b.shunt_b * v * v)
        .sum();
    let mut gen = Complex64::new(0.0, 0.0);
    for i in 0..network.bus_count() {
        gen += solution.generation(network, i);
    }
    let load_p: f64 = network.buses.iter().map(|b| b.p_demand).sum();
    let load_q: f64 = network.buses.iter().map(|b| b.q_demand).sum();
    LossReport {
        branch_flows: flows.to_vec(),
        total_p_loss_mw: p_loss * base,
        total_q_loss_mvar: q_loss * base,
        total_charging_mvar: charging * base,
        total_shunt_mvar: shunt * base,
        total_generation: PowerPair { p_mw: gen.re * base, q_mvar: gen.im * base },
        total_load: PowerPair { p_mw: load_p * base, q_mvar: load_q * base },
    }
}

/// Flows and totals for a solved network in one call.
pub fn analyze(network: &Network, solution: &LoadFlowSolution) -> LossReport {
    let flows = branch_flows(&solution.state, network);
    total_losses(&flows, network, solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Bus;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn equal_voltages_no_current() {
        let br = Branch::line(1, 2, 0.01, 0.1, 0.0);
        let v = Complex64::from_polar(1.02, -0.1);
        let (i_f, i_t) = branch_currents(v, v, &br);
        assert!(i_f.norm() < 1e-14 && i_t.norm() < 1e-14);
    }

    #[test]
    fn pure_charging_current() {
        let br = Branch::line(1, 2, 0.02, 0.06, 0.06);
        let (i_f, i_t) = branch_currents(c(1.0, 0.0), c(1.0, 0.0), &br);
        assert!((i_f - c(0.0, 0.03)).norm() < 1e-14);
        assert!((i_t - c(0.0, 0.03)).norm() < 1e-14);
    }

    #[test]
    fn reactive_branch_has_no_real_loss() {
        let br = Branch::line(1, 2, 0.0, 0.3, 0.02);
        let f = flow_for(0, &br, Complex64::from_polar(1.05, 0.0), Complex64::from_polar(0.97, -0.2));
        assert!(f.p_loss.abs() < 1e-12);
        assert!(f.q_loss > 0.0);
        assert!((f.s_from.im + f.s_to.im - (f.q_loss - f.q_charging)).abs() < 1e-12);
    }

    #[test]
    fn tapped_branch_reactive_identity() {
        let mut br = Branch::line(1, 2, 0.01, 0.2, 0.05);
        br.tap = 0.95;
        let f = flow_for(0, &br, Complex64::from_polar(1.04, 0.05), Complex64::from_polar(0.98, -0.1));
        assert!((f.s_from.im + f.s_to.im - (f.q_loss - f.q_charging)).abs() < 1e-12);
        let (y, _) = branch_admittance(&br);
        let series = y * (Complex64::from_polar(1.04, 0.05) / 0.95 - Complex64::from_polar(0.98, -0.1));
        assert!((f.p_loss - series.norm_sqr() * br.r).abs() < 1e-12);
    }

    #[test]
    fn zero_load_zero_loss() {
        let net = Network {
            base_mva: 100.0,
            buses: vec![Bus::slack(1, 1.0), Bus::load(2, 0.0, 0.0)],
            branches: vec![Branch::line(1, 2, 0.01, 0.1, 0.0)],
        };
        let sol = crate::solver::solve(&net, &Default::default()).unwrap();
        let rep = analyze(&net, &sol);
        assert_eq!(rep.total_p_loss_mw, 0.0);
        assert_eq!(rep.total_q_loss_mvar, 0.0);
    }
}
