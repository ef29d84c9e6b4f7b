//! Network data model and the line-oriented case file format.
//!
//! A case file has three sections:
//!
//! ```text
//! [system]
//! base_mva=100
//!
//! [buses]
//! # id kind p_demand_MW q_demand_MVAR p_gen_MW v_set_pu q_min_MVAR q_max_MVAR shunt_MVAR
//! 1 slack 0 0 0 1.06 0 10 0
//! 2 load 21.7 12.7 0 1.0 0 0 0
//!
//! [branches]
//! # from to r_pu x_pu b_charging_pu tap [xfmr]
//! 1 2 0.0192 0.0575 0.0528 1
//! ```
//!
//! Powers in the file are in MW / MVAR and are divided by `base_mva` on load.
//! Impedances are already per-unit. `#` starts a comment anywhere on a line.
//! The optional trailing `xfmr` token marks a branch as a transformer even
//! when its tap is exactly 1.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusKind {
    Slack,
    Generator,
    Load,
}

impl BusKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BusKind::Slack => "slack",
            BusKind::Generator => "gen",
            BusKind::Load => "load",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "slack" => Some(BusKind::Slack),
            "gen" => Some(BusKind::Generator),
            "load" => Some(BusKind::Load),
            _ => None,
        }
    }
}

/// A bus. All power quantities are per-unit on the network base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: u32,
    pub kind: BusKind,
    pub p_demand: f64,
    pub q_demand: f64,
    pub p_gen: f64,
    pub v_set: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub shunt_b: f64,
}

impl Bus {
    /// A load bus with the given demand and no shunt.
    pub fn load(id: u32, p_demand: f64, q_demand: f64) -> Self {
        Self {
            id,
            kind: BusKind::Load,
            p_demand,
            q_demand,
            p_gen: 0.0,
            v_set: 1.0,
            q_min: 0.0,
            q_max: 0.0,
            shunt_b: 0.0,
        }
    }

    pub fn slack(id: u32, v_set: f64) -> Self {
        Self { kind: BusKind::Slack, v_set, ..Self::load(id, 0.0, 0.0) }
    }

    pub fn generator(id: u32, p_gen: f64, v_set: f64, q_min: f64, q_max: f64) -> Self {
        Self { kind: BusKind::Generator, p_gen, v_set, q_min, q_max, ..Self::load(id, 0.0, 0.0) }
    }
}

/// A pi-model branch. A tap other than 1 sits on the `from_bus` side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from_bus: u32,
    pub to_bus: u32,
    pub r: f64,
    pub x: f64,
    pub b_charging: f64,
    pub tap: f64,
    pub transformer: bool,
}

impl Branch {
    pub fn line(from_bus: u32, to_bus: u32, r: f64, x: f64, b_charging: f64) -> Self {
        Self { from_bus, to_bus, r, x, b_charging, tap: 1.0, transformer: false }
    }

    pub fn transformer(from_bus: u32, to_bus: u32, r: f64, x: f64, tap: f64) -> Self {
        Self { from_bus, to_bus, r, x, b_charging: 0.0, tap, transformer: true }
    }

    pub fn is_transformer(&self) -> bool {
        self.transformer || self.tap != 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
}

impl Network {
    pub fn bus_count(&self) -> usize {
        self.buses.len()
    }

    /// Internal (0-based) index of an external bus id.
    pub fn bus_index(&self, id: u32) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn bus(&self, id: u32) -> Option<&Bus> {
        self.buses.iter().find(|b| b.id == id)
    }

    pub fn slack_index(&self) -> Option<usize> {
        self.buses.iter().position(|b| b.kind == BusKind::Slack)
    }

    /// Index of the branch running `from -> to` in that orientation.
    pub fn branch_index(&self, from: u32, to: u32) -> Option<usize> {
        self.branches.iter().position(|b| b.from_bus == from && b.to_bus == to)
    }

    /// (from, to) internal indices for every branch. Panics on a dangling
    /// endpoint, which `validate` rules out.
    pub(crate) fn branch_endpoints(&self) -> Vec<(usize, usize)> {
        let index: HashMap<u32, usize> =
            self.buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect();
        self.branches
            .iter()
            .map(|br| (index[&br.from_bus], index[&br.to_bus]))
            .collect()
    }

    pub fn total_p_demand(&self) -> f64 {
        self.buses.iter().map(|b| b.p_demand).sum()
    }
}

/// Parse and validate a case file.
pub fn load_network(source: &[u8]) -> Result<Network> {
    let text = std::str::from_utf8(source).map_err(|e| Error::Parse {
        line: 0,
        field: "file".into(),
        message: format!("not valid UTF-8: {e}"),
    })?;
    let network = parse_network(text)?;
    let violations = validate(&network);
    if violations.is_empty() {
        Ok(network)
    } else {
        Err(Error::Validation(violations))
    }
}

pub fn load_network_file(path: impl AsRef<std::path::Path>) -> Result<Network> {
    let bytes = std::fs::read(path)?;
    load_network(&bytes)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    System,
    Buses,
    Branches,
}

const BUS_FIELDS: [&str; 9] = [
    "id",
    "kind",
    "p_demand_MW",
    "q_demand_MVAR",
    "p_gen_MW",
    "v_set_pu",
    "q_min_MVAR",
    "q_max_MVAR",
    "shunt_MVAR",
];

const BRANCH_FIELDS: [&str; 6] = ["from", "to", "r_pu", "x_pu", "b_charging_pu", "tap"];

struct RawBus {
    id: u32,
    kind: BusKind,
    values: [f64; 7],
}

/// Parse without running `validate`.
pub fn parse_network(text: &str) -> Result<Network> {
    let mut section = Section::None;
    let mut base_mva: Option<f64> = None;
    let mut raw_buses = Vec::new();
    let mut branches = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            section = match line {
                "[system]" => Section::System,
                "[buses]" => Section::Buses,
                "[branches]" => Section::Branches,
                other => {
                    return Err(parse_err(line_no, "section", format!("unknown section {other}")))
                }
            };
            continue;
        }
        match section {
            Section::None => {
                return Err(parse_err(line_no, "section", "data before first section header"))
            }
            Section::System => {
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| parse_err(line_no, line, "expected key=value"))?;
                let key = key.trim();
                match key {
                    "base_mva" => base_mva = Some(parse_f64(value.trim(), line_no, "base_mva")?),
                    other => {
                        return Err(parse_err(line_no, other, "unknown system key"));
                    }
                }
            }
            Section::Buses => {
                let tokens: Vec<&str> = line.split_whitespace().collect();
                if tokens.len() != BUS_FIELDS.len() {
                    return Err(parse_err(
                        line_no,
                        "row",
                        format!("expected {} bus fields, found {}", BUS_FIELDS.len(), tokens.len()),
                    ));
                }
                let id = parse_id(tokens[0], line_no, BUS_FIELDS[0])?;
                let kind = BusKind::parse(tokens[1]).ok_or_else(|| {
                    parse_err(line_no, BUS_FIELDS[1], format!("unknown bus kind `{}`", tokens[1]))
                })?;
                let mut values = [0.0; 7];
                for (k, slot) in values.iter_mut().enumerate() {
                    *slot = parse_f64(tokens[k + 2], line_no, BUS_FIELDS[k + 2])?;
                }
                raw_buses.push(RawBus { id, kind, values });
            }
            Section::Branches => {
                let tokens: Vec<&str> = line.split_whitespace().collect();
                let transformer = match tokens.len() {
                    6 => false,
                    7 if tokens[6] == "xfmr" => true,
                    7 => {
                        return Err(parse_err(
                            line_no,
                            "flag",
                            format!("unknown branch flag `{}`", tokens[6]),
                        ))
                    }
                    n => {
                        return Err(parse_err(
                            line_no,
                            "row",
                            format!("expected {} branch fields, found {n}", BRANCH_FIELDS.len()),
                        ))
                    }
                };
                branches.push(Branch {
                    from_bus: parse_id(tokens[0], line_no, BRANCH_FIELDS[0])?,
                    to_bus: parse_id(tokens[1], line_no, BRANCH_FIELDS[1])?,
                    r: parse_f64(tokens[2], line_no, BRANCH_FIELDS[2])?,
                    x: parse_f64(tokens[3], line_no, BRANCH_FIELDS[3])?,
                    b_charging: parse_f64(tokens[4], line_no, BRANCH_FIELDS[4])?,
                    tap: parse_f64(tokens[5], line_no, BRANCH_FIELDS[5])?,
                    transformer,
                });
            }
        }
    }

    let base_mva = base_mva.ok_or_else(|| parse_err(0, "base_mva", "missing [system] base_mva"))?;
    if !(base_mva > 0.0) || !base_mva.is_finite() {
        return Err(parse_err(0, "base_mva", "base_mva must be positive"));
    }
    let buses = raw_buses
        .into_iter()
        .map(|raw| {
            let [pd, qd, pg, v_set, qmin, qmax, shunt] = raw.values;
            Bus {
                id: raw.id,
                kind: raw.kind,
                p_demand: pd / base_mva,
                q_demand: qd / base_mva,
                p_gen: pg / base_mva,
                v_set,
                q_min: qmin / base_mva,
                q_max: qmax / base_mva,
                shunt_b: shunt / base_mva,
            }
        })
        .collect();
    Ok(Network { base_mva, buses, branches })
}

fn parse_err(line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Parse { line, field: field.to_string(), message: message.into() }
}

fn parse_f64(token: &str, line: usize, field: &str) -> Result<f64> {
    let value: f64 = token
        .parse()
        .map_err(|_| parse_err(line, field, format!("`{token}` is not a number")))?;
    if !value.is_finite() {
        return Err(parse_err(line, field, format!("`{token}` is not finite")));
    }
    Ok(value)
}

fn parse_id(token: &str, line: usize, field: &str) -> Result<u32> {
    match token.parse::<u32>() {
        Ok(0) | Err(_) => {
            Err(parse_err(line, field, format!("`{token}` is not a positive bus id")))
        }
        Ok(v) => Ok(v),
    }
}

/// Render a network back to the case file format. MW / MVAR columns are
/// written with full round-trip precision.
pub fn serialize_network(network: &Network) -> String {
    let base = network.base_mva;
    let mut out = String::new();
    let _ = writeln!(out, "[system]\nbase_mva={base}\n");
    let _ = writeln!(out, "[buses]");
    let _ = writeln!(out, "# {}", BUS_FIELDS.join(" "));
    for b in &network.buses {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {} {} {}",
            b.id,
            b.kind.as_str(),
            b.p_demand * base,
            b.q_demand * base,
            b.p_gen * base,
            b.v_set,
            b.q_min * base,
            b.q_max * base,
            b.shunt_b * base
        );
    }
    let _ = writeln!(out, "\n[branches]");
    let _ = writeln!(out, "# {}", BRANCH_FIELDS.join(" "));
    for br in &network.branches {
        let _ = write!(
            out,
            "{} {} {} {} {} {}",
            br.from_bus, br.to_bus, br.r, br.x, br.b_charging, br.tap
        );
        if br.transformer {
            out.push_str(" xfmr");
        }
        out.push('\n');
    }
    out
}

/// Every invariant violation in the network; empty when valid.
pub fn validate(network: &Network) -> Vec<Violation> {
    let mut out = Vec::new();

    if !(network.base_mva > 0.0) || !network.base_mva.is_finite() {
        out.push(Violation::new(format!("base_mva {} must be positive", network.base_mva)));
    }

    let mut seen = HashSet::new();
    for b in &network.buses {
        if b.id == 0 {
            out.push(Violation::new("bus id 0 is not a positive integer"));
        }
        if !seen.insert(b.id) {
            out.push(Violation::new(format!("duplicate bus id {}", b.id)));
        }
    }

    let slacks: Vec<u32> =
        network.buses.iter().filter(|b| b.kind == BusKind::Slack).map(|b| b.id).collect();
    match slacks.len() {
        0 => out.push(Violation::new("no slack bus")),
        1 => {}
        _ => out.push(Violation::new(format!(
            "multiple slack buses: {}",
            slacks.iter().map(u32::to_string).collect::<Vec<_>>().join(", ")
        ))),
    }

    for b in &network.buses {
        if b.q_min > b.q_max {
            out.push(Violation::new(format!(
                "bus {}: q_min {} exceeds q_max {}",
                b.id, b.q_min, b.q_max
            )));
        }
        if b.kind != BusKind::Load && !(b.v_set > 0.0) {
            out.push(Violation::new(format!(
                "bus {}: voltage set-point {} must be positive",
                b.id, b.v_set
            )));
        }
        let fields = [b.p_demand, b.q_demand, b.p_gen, b.v_set, b.q_min, b.q_max, b.shunt_b];
        if fields.iter().any(|v| !v.is_finite()) {
            out.push(Violation::new(format!("bus {}: non-finite value", b.id)));
        }
    }

    let mut endpoints_ok = true;
    for (k, br) in network.branches.iter().enumerate() {
        let label = format!("branch {} ({}-{})", k + 1, br.from_bus, br.to_bus);
        if br.from_bus == br.to_bus {
            out.push(Violation::new(format!("{label}: both ends on bus {}", br.from_bus)));
        }
        for end in [br.from_bus, br.to_bus] {
            if !seen.contains(&end) {
                endpoints_ok = false;
                out.push(Violation::new(format!("{label}: references missing bus {end}")));
            }
        }
        if !(br.r >= 0.0) {
            out.push(Violation::new(format!("{label}: negative resistance {}", br.r)));
        }
        if br.r == 0.0 && br.x == 0.0 {
            out.push(Violation::new(format!("{label}: zero impedance (r = x = 0)")));
        }
        if !(br.tap > 0.0) {
            out.push(Violation::new(format!("{label}: tap {} must be positive", br.tap)));
        }
        if ![br.r, br.x, br.b_charging, br.tap].iter().all(|v| v.is_finite()) {
            out.push(Violation::new(format!("{label}: non-finite value")));
        }
    }

    if endpoints_ok && !network.buses.is_empty() && seen.len() == network.buses.len() {
        let islanded = unreachable_buses(network);
        if !islanded.is_empty() {
            out.push(Violation::new(format!(
                "islanded buses not connected to bus {}: {}",
                network.buses[0].id,
                islanded.iter().map(u32::to_string).collect::<Vec<_>>().join(", ")
            )));
        }
    }

    out
}

fn unreachable_buses(network: &Network) -> Vec<u32> {
    let n = network.buses.len();
    let mut adjacency = vec![Vec::new(); n];
    for (f, t) in network.branch_endpoints() {
        adjacency[f].push(t);
        adjacency[t].push(f);
    }
    let mut visited = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    visited[0] = true;
    while let Some(i) = queue.pop_front() {
        for &j in &adjacency[i] {
            if !visited[j] {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    visited
        .iter()
        .zip(&network.buses)
        .filter(|(v, _)| !**v)
        .map(|(_, b)| b.id)
        .collect()
}

/// Per-bus shunt admittance `j * shunt_b`, in internal bus order.
pub fn apply_shunts(network: &Network) -> Vec<Complex64> {
    network.buses.iter().map(|b| Complex64::new(0.0, b.shunt_b)).collect()
}
