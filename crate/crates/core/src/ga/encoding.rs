use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{BusKind, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ControlKind {
    GeneratorVoltage { bus: u32 },
    GeneratorRealPower { bus: u32 },
    TransformerTap { from_bus: u32, to_bus: u32 },
}

impl ControlKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            ControlKind::GeneratorVoltage { .. } => "vgen",
            ControlKind::GeneratorRealPower { .. } => "pgen",
            ControlKind::TransformerTap { .. } => "tap",
        }
    }

    pub fn reference(&self) -> String {
        match self {
            ControlKind::GeneratorVoltage { bus } | ControlKind::GeneratorRealPower { bus } => {
                bus.to_string()
            }
            ControlKind::TransformerTap { from_bus, to_bus } => format!("{from_bus}-{to_bus}"),
        }
    }
}

impl fmt::Display for ControlKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.keyword(), self.reference())
    }
}

/// A bounded control variable, per-unit, encoded on `bits` bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlVariable {
    pub kind: ControlKind,
    pub lower: f64,
    pub upper: f64,
    pub bits: u32,
}

impl ControlVariable {
    pub fn new(kind: ControlKind, lower: f64, upper: f64) -> Self {
        Self { kind, lower, upper, bits: 5 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lower < self.upper) || !self.lower.is_finite() || !self.upper.is_finite() {
            return Err(Error::InvalidControl(format!(
                "{}: lower {} must be below upper {}",
                self.kind, self.lower, self.upper
            )));
        }
        if self.bits == 0 || self.bits > 52 {
            return Err(Error::InvalidControl(format!("{}: bits must be in 1..=52", self.kind)));
        }
        Ok(())
    }

    /// `lower + (upper - lower) * d / (2^bits - 1)`.
    pub fn decode_value(&self, d: u64) -> f64 {
        let levels = ((1u64 << self.bits) - 1) as f64;
        self.lower + (self.upper - self.lower) * d as f64 / levels
    }
}

/// Fixed-length bit string over an ordered control list, most significant
/// bit first within each control's slice.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chromosome(pub Vec<bool>);

impl Chromosome {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Parse a `0`/`1` string.
    pub fn parse(s: &str) -> Option<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Chromosome)
    }

    /// The chromosome whose decoded values are the nearest grid points to
    /// `values` (clamped into bounds).
    pub fn encode(values: &[f64], controls: &[ControlVariable]) -> Self {
        assert_eq!(values.len(), controls.len());
        let mut bits = Vec::with_capacity(chromosome_length(controls));
        for (v, c) in values.iter().zip(controls) {
            let levels = ((1u64 << c.bits) - 1) as f64;
            let t = ((v - c.lower) / (c.upper - c.lower)).clamp(0.0, 1.0);
            let d = (t * levels).round() as u64;
            for k in (0..c.bits).rev() {
                bits.push((d >> k) & 1 == 1);
            }
        }
        Chromosome(bits)
    }
}

impl fmt::Display for Chromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

pub fn chromosome_length(controls: &[ControlVariable]) -> usize {
    controls.iter().map(|c| c.bits as usize).sum()
}

pub fn decode(chromosome: &Chromosome, controls: &[ControlVariable]) -> Vec<f64> {
    assert_eq!(
        chromosome.len(),
        chromosome_length(controls),
        "chromosome length does not match control list"
    );
    let mut offset = 0;
    controls
        .iter()
        .map(|c| {
            let slice = &chromosome.0[offset..offset + c.bits as usize];
            offset += c.bits as usize;
            let d = slice.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
            c.decode_value(d)
        })
        .collect()
}

/// Write decoded control values into a copy of `network`.
pub fn apply_controls(network: &Network, controls: &[ControlVariable], values: &[f64]) -> Result<Network> {
    assert_eq!(controls.len(), values.len());
    let mut out = network.clone();
    for (c, &v) in controls.iter().zip(values) {
        match c.kind {
            ControlKind::GeneratorVoltage { bus } => {
                let i = out.bus_index(bus).ok_or(Error::BusNotFound(bus))?;
                if out.buses[i].kind == BusKind::Load {
                    return Err(Error::InvalidControl(format!("{}: bus {bus} is a load bus", c.kind)));
                }
                out.buses[i].v_set = v;
            }
            ControlKind::GeneratorRealPower { bus } => {
                let i = out.bus_index(bus).ok_or(Error::BusNotFound(bus))?;
                if out.buses[i].kind != BusKind::Generator {
                    return Err(Error::InvalidControl(format!(
                        "{}: bus {bus} is not a generator bus",
                        c.kind
                    )));
                }
                out.buses[i].p_gen = v;
            }
            ControlKind::TransformerTap { from_bus, to_bus } => {
                let k = out
                    .branch_index(from_bus, to_bus)
                    .ok_or(Error::BranchNotFound { from: from_bus, to: to_bus })?;
                out.branches[k].tap = v;
            }
        }
    }
    Ok(out)
}
