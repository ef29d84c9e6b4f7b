//! Loss-reduction strategies as pure `Network -> Network` transformations,
//! and a comparator that solves each scenario against the base case.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::{analyze, LossReport};
use crate::network::Network;
use crate::solver::{solve, LoadFlowSolution, SolverOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Strategy {
    /// Move `fraction` of the real demand at `from_bus` to `to_bus`.
    LoadShare { from_bus: u32, to_bus: u32, fraction: f64, move_reactive: bool },
    /// Fixed reactive injection at `bus`, in MVAR.
    ReactiveInjection { bus: u32, q_mvar: f64 },
    TapChange { from_bus: u32, to_bus: u32, new_tap: f64 },
}

impl Strategy {
    pub fn load_share(from_bus: u32, to_bus: u32, fraction: f64) -> Self {
        Strategy::LoadShare { from_bus, to_bus, fraction, move_reactive: false }
    }

    pub fn reactive_injection(bus: u32, q_mvar: f64) -> Self {
        Strategy::ReactiveInjection { bus, q_mvar }
    }

    pub fn tap_change(from_bus: u32, to_bus: u32, new_tap: f64) -> Self {
        Strategy::TapChange { from_bus, to_bus, new_tap }
    }

    pub fn label(&self) -> String {
        match self {
            Strategy::LoadShare { from_bus, to_bus, fraction, .. } => {
                format!("load share {}% {from_bus}->{to_bus}", fraction * 100.0)
            }
            Strategy::ReactiveInjection { bus, q_mvar } => {
                format!("reactive injection {q_mvar} MVAR @ {bus}")
            }
            Strategy::TapChange { from_bus, to_bus, new_tap } => {
                format!("tap {from_bus}-{to_bus} -> {new_tap}")
            }
        }
    }

    /// Check the strategy against `network` and return the transformed copy.
    pub fn apply(&self, network: &Network) -> Result<Network> {
        match *self {
            Strategy::LoadShare { from_bus, to_bus, fraction, move_reactive } => {
                share_load_with(network, from_bus, to_bus, fraction, move_reactive)
            }
            Strategy::ReactiveInjection { bus, q_mvar } => {
                if !(q_mvar >= 0.0) || !q_mvar.is_finite() {
                    return Err(invalid(self, format!("injection {q_mvar} MVAR must be >= 0")));
                }
                inject_reactive(network, bus, q_mvar)
            }
            Strategy::TapChange { from_bus, to_bus, new_tap } => {
                let k = network
                    .branch_index(from_bus, to_bus)
                    .ok_or(Error::BranchNotFound { from: from_bus, to: to_bus })?;
                if !network.branches[k].is_transformer() {
                    return Err(invalid(self, format!("branch {from_bus}-{to_bus} is not a transformer")));
                }
                set_tap(network, from_bus, to_bus, new_tap)
            }
        }
    }
}

fn invalid(strategy: &Strategy, message: String) -> Error {
    Error::InvalidStrategy { token: strategy.to_string(), message }
}

/// Canonical command-line syntax.
impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::LoadShare { from_bus, to_bus, fraction, move_reactive } => {
                write!(f, "load-share:from={from_bus},to={to_bus},frac={fraction}")?;
                if *move_reactive {
                    write!(f, ",with-q=true")?;
                }
                Ok(())
            }
            Strategy::ReactiveInjection { bus, q_mvar } => write!(f, "q-inject:bus={bus},mvar={q_mvar}"),
            Strategy::TapChange { from_bus, to_bus, new_tap } => {
                write!(f, "tap:from={from_bus},to={to_bus},tap={new_tap}")
            }
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    /// `load-share:from=5,to=4,frac=0.15`, `q-inject:bus=30,mvar=1.0`,
    /// `tap:from=4,to=12,tap=1.0`.
    fn from_str(spec: &str) -> Result<Self> {
        let err = |token: &str, message: String| Error::InvalidStrategy { token: token.to_string(), message };
        let (kind, args) = spec
            .split_once(':')
            .ok_or_else(|| err(spec, "expected `<kind>:key=value,...`".into()))?;

        let mut from = None;
        let mut to = None;
        let mut bus = None;
        let mut frac = None;
        let mut mvar = None;
        let mut tap = None;
        let mut with_q = false;

        for pair in args.split(',').filter(|s| !s.is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| err(pair, "expected key=value".into()))?;
            let num = |v: &str| -> Result<f64> {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| err(pair, format!("`{v}` is not a number")))
            };
            let id = |v: &str| -> Result<u32> {
                v.parse::<u32>()
                    .ok()
                    .filter(|x| *x > 0)
                    .ok_or_else(|| err(pair, format!("`{v}` is not a bus id")))
            };
            match (kind, key) {
                ("load-share" | "tap", "from") => from = Some(id(value)?),
                ("load-share" | "tap", "to") => to = Some(id(value)?),
                ("load-share", "frac") => {
                    let f = num(value)?;
                    if !(0.0..=1.0).contains(&f) {
                        return Err(err(pair, format!("fraction {f} outside [0, 1]")));
                    }
                    frac = Some(f);
                }
                ("load-share", "with-q") => {
                    with_q = value
                        .parse::<bool>()
                        .map_err(|_| err(pair, format!("`{value}` is not true/false")))?;
                }
                ("q-inject", "bus") => bus = Some(id(value)?),
                ("q-inject", "mvar") => {
                    let q = num(value)?;
                    if q < 0.0 {
                        return Err(err(pair, format!("injection {q} MVAR must be >= 0")));
                    }
                    mvar = Some(q);
                }
                ("tap", "tap") => {
                    let t = num(value)?;
                    if t <= 0.0 {
                        return Err(err(pair, format!("tap {t} must be positive")));
                    }
                    tap = Some(t);
                }
                ("load-share" | "q-inject" | "tap", _) => {
                    return Err(err(pair, format!("unknown key `{key}` for {kind}")))
                }
                _ => return Err(err(kind, "unknown strategy kind".into())),
            }
        }

        let need = |v: Option<f64>, key: &str| v.ok_or_else(|| err(spec, format!("missing `{key}`")));
        let need_id = |v: Option<u32>, key: &str| v.ok_or_else(|| err(spec, format!("missing `{key}`")));
        let strategy = match kind {
            "load-share" => {
                let (from_bus, to_bus) = (need_id(from, "from")?, need_id(to, "to")?);
                if from_bus == to_bus {
                    return Err(err(spec, "from and to must differ".into()));
                }
                Strategy::LoadShare { from_bus, to_bus, fraction: need(frac, "frac")?, move_reactive: with_q }
            }
            "q-inject" => Strategy::ReactiveInjection { bus: need_id(bus, "bus")?, q_mvar: need(mvar, "mvar")? },
            "tap" => Strategy::TapChange {
                from_bus: need_id(from, "from")?,
                to_bus: need_id(to, "to")?,
                new_tap: need(tap, "tap")?,
            },
            _ => return Err(err(kind, "unknown strategy kind".into())),
        };
        Ok(strategy)
    }
}

pub fn share_load(network: &Network, from_bus: u32, to_bus: u32, fraction: f64) -> Result<Network> {
    share_load_with(network, from_bus, to_bus, fraction, false)
}

/// Real load sharing; with `move_reactive` the same fraction of Q moves too.
pub fn share_load_with(
    network: &Network,
    from_bus: u32,
    to_bus: u32,
    fraction: f64,
    move_reactive: bool,
) -> Result<Network> {
    let strategy = Strategy::LoadShare { from_bus, to_bus, fraction, move_reactive };
    if from_bus == to_bus {
        return Err(invalid(&strategy, "from and to must differ".into()));
    }
    if !(0.0..=1.0).contains(&fraction) {
        return Err(invalid(&strategy, format!("fraction {fraction} outside [0, 1]")));
    }
    let f = network.bus_index(from_bus).ok_or(Error::BusNotFound(from_bus))?;
    let t = network.bus_index(to_bus).ok_or(Error::BusNotFound(to_bus))?;
    if !(network.buses[f].p_demand > 0.0) {
        return Err(invalid(&strategy, format!("bus {from_bus} has no real demand to share")));
    }
    let mut out = network.clone();
    let moved_p = fraction * network.buses[f].p_demand;
    out.buses[f].p_demand -= moved_p;
    out.buses[t].p_demand += moved_p;
    if move_reactive {
        let moved_q = fraction * network.buses[f].q_demand;
        out.buses[f].q_demand -= moved_q;
        out.buses[t].q_demand += moved_q;
    }
    Ok(out)
}

/// Reactive injection modeled as a demand offset (`q_demand` may go negative).
pub fn inject_reactive(network: &Network, bus: u32, q_mvar: f64) -> Result<Network> {
    let i = network.bus_index(bus).ok_or(Error::BusNotFound(bus))?;
    let mut out = network.clone();
    out.buses[i].q_demand -= q_mvar / network.base_mva;
    Ok(out)
}

pub fn set_tap(network: &Network, from_bus: u32, to_bus: u32, new_tap: f64) -> Result<Network> {
    let k = network
        .branch_index(from_bus, to_bus)
        .ok_or(Error::BranchNotFound { from: from_bus, to: to_bus })?;
    let mut out = network.clone();
    out.branches[k].tap = new_tap;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    /// Canonical spec for strategy rows, `None` for the base row.
    pub strategy: Option<Strategy>,
    pub converged: bool,
    pub iterations: usize,
    pub p_loss_mw: f64,
    pub q_loss_mvar: f64,
    pub delta_p_mw: f64,
    pub min_voltage_bus: u32,
    pub min_voltage_pu: f64,
    #[serde(skip)]
    pub solution: Option<LoadFlowSolution>,
    #[serde(skip)]
    pub report: Option<LossReport>,
}

/// Solve the base case and every strategy scenario; base row first, then
/// strategies in input order. Scenarios are solved in parallel.
pub fn compare(
    network: &Network,
    strategies: &[Strategy],
    options: &SolverOptions,
) -> Result<Vec<ComparisonRow>> {
    let mut scenarios = vec![("base case".to_string(), None, network.clone())];
    for s in strategies {
        scenarios.push((s.label(), Some(s.clone()), s.apply(network)?));
    }
    let mut rows: Vec<ComparisonRow> = scenarios
        .into_par_iter()
        .map(|(label, strategy, net)| scenario_row(label, strategy, &net, options))
        .collect::<Result<_>>()?;
    let base = rows[0].p_loss_mw;
    for row in &mut rows {
        row.delta_p_mw = row.p_loss_mw - base;
    }
    Ok(rows)
}

fn scenario_row(
    label: String,
    strategy: Option<Strategy>,
    network: &Network,
    options: &SolverOptions,
) -> Result<ComparisonRow> {
    let solution = match solve(network, options) {
        Ok(s) => s,
        Err(Error::SingularJacobian { .. }) => {
            return Ok(ComparisonRow {
                label,
                strategy,
                converged: false,
                iterations: 0,
                p_loss_mw: f64::NAN,
                q_loss_mvar: f64::NAN,
                delta_p_mw: f64::NAN,
                min_voltage_bus: 0,
                min_voltage_pu: f64::NAN,
                solution: None,
                report: None,
            })
        }
        Err(e) => return Err(e),
    };
    let report = analyze(network, &solution);
    let (min_idx, min_v) = solution
        .state
        .v_mag
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best });
    Ok(ComparisonRow {
        label,
        strategy,
        converged: solution.converged,
        iterations: solution.iterations,
        p_loss_mw: report.total_p_loss_mw,
        q_loss_mvar: report.total_q_loss_mvar,
        delta_p_mw: 0.0,
        min_voltage_bus: network.buses[min_idx].id,
        min_voltage_pu: min_v,
        solution: Some(solution),
        report: Some(report),
    })
}
