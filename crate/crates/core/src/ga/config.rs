//! GA configuration and its line-oriented file format:
//!
//! ```text
//! [ga]
//! population=50
//! generations=100
//! crossover=0.9
//! mutation_initial=0.9
//! beta=0.05
//! elite=2
//! seed=1
//!
//! [controls]
//! # kind ref lower upper bits
//! vgen 2 0.95 1.10 5
//! pgen 2 0.0 1.40 5
//! tap 4-12 0.90 1.10 5
//! ```
//!
//! Keys missing from `[ga]` keep their defaults. A `[controls]` section,
//! when present, replaces the default control list entirely.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::encoding::{ControlKind, ControlVariable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub max_generations: usize,
    pub crossover_rate: f64,
    pub mutation_initial: f64,
    pub beta: f64,
    pub elite_count: usize,
    pub rng_seed: u64,
    pub controls: Vec<ControlVariable>,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            max_generations: 100,
            crossover_rate: 0.9,
            mutation_initial: 0.9,
            beta: 0.05,
            elite_count: 2,
            rng_seed: 1,
            controls: ieee30_controls(),
        }
    }
}

/// Generator voltages and real outputs at buses 2, 5, 8, 11, 13 and the four
/// tap-changing transformers of the IEEE 30-bus case, 5 bits each.
///
/// Real-power bounds are the generator limits carried with the archive case
/// (MW): bus 2 0..140, buses 5, 8, 11 and 13 0..100.
pub fn ieee30_controls() -> Vec<ControlVariable> {
    let gens = [(2, 0.0, 1.40), (5, 0.0, 1.00), (8, 0.0, 1.00), (11, 0.0, 1.00), (13, 0.0, 1.00)];
    let mut out = Vec::new();
    for (bus, _, _) in gens {
        out.push(ControlVariable::new(ControlKind::GeneratorVoltage { bus }, 0.95, 1.10));
    }
    for (bus, lo, hi) in gens {
        out.push(ControlVariable::new(ControlKind::GeneratorRealPower { bus }, lo, hi));
    }
    for (from_bus, to_bus) in [(4, 12), (6, 9), (6, 10), (28, 27)] {
        out.push(ControlVariable::new(ControlKind::TransformerTap { from_bus, to_bus }, 0.90, 1.10));
    }
    out
}

impl GaConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.population_size == 0 || self.population_size % 2 != 0 {
            return bad(format!("population {} must be even and positive", self.population_size));
        }
        for (name, rate) in [
            ("crossover", self.crossover_rate),
            ("mutation_initial", self.mutation_initial),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return bad(format!("{name} rate {rate} outside [0, 1]"));
            }
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return bad(format!("beta {} must be non-negative", self.beta));
        }
        if self.elite_count == 0 || self.elite_count >= self.population_size {
            return bad(format!(
                "elite {} must be in 1..{}",
                self.elite_count, self.population_size
            ));
        }
        if self.controls.is_empty() {
            return bad("no control variables".into());
        }
        for c in &self.controls {
            c.validate()?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = GaConfig::default();
        let mut controls: Option<Vec<ControlVariable>> = None;
        let mut section = "";
        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: String| Error::InvalidConfig(format!("line {line_no}: {m}"));
            if line.starts_with('[') {
                section = match line {
                    "[ga]" => "ga",
                    "[controls]" => {
                        controls.get_or_insert_with(Vec::new);
                        "controls"
                    }
                    other => return Err(err(format!("unknown section {other}"))),
                };
                continue;
            }
            match section {
                "ga" => {
                    let (key, value) =
                        line.split_once('=').ok_or_else(|| err("expected key=value".into()))?;
                    let (key, value) = (key.trim(), value.trim());
                    let float = || value.parse::<f64>().map_err(|_| err(format!("bad number `{value}`")));
                    let int = || value.parse::<usize>().map_err(|_| err(format!("bad integer `{value}`")));
                    match key {
                        "population" => cfg.population_size = int()?,
                        "generations" => cfg.max_generations = int()?,
                        "crossover" => cfg.crossover_rate = float()?,
                        "mutation_initial" => cfg.mutation_initial = float()?,
                        "beta" => cfg.beta = float()?,
                        "elite" => cfg.elite_count = int()?,
                        "seed" => {
                            cfg.rng_seed =
                                value.parse().map_err(|_| err(format!("bad seed `{value}`")))?
                        }
                        other => return Err(err(format!("unknown key `{other}`"))),
                    }
                }
                "controls" => {
                    let tokens: Vec<&str> = line.split_whitespace().collect();
                    if tokens.len() != 5 {
                        return Err(err("expected `kind ref lower upper bits`".into()));
                    }
                    let bus = || {
                        tokens[1].parse::<u32>().map_err(|_| err(format!("bad bus `{}`", tokens[1])))
                    };
                    let kind = match tokens[0] {
                        "vgen" => ControlKind::GeneratorVoltage { bus: bus()? },
                        "pgen" => ControlKind::GeneratorRealPower { bus: bus()? },
                        "tap" => {
                            let (f, t) = tokens[1]
                                .split_once('-')
                                .and_then(|(f, t)| Some((f.parse().ok()?, t.parse().ok()?)))
                                .ok_or_else(|| err(format!("bad branch `{}`", tokens[1])))?;
                            ControlKind::TransformerTap { from_bus: f, to_bus: t }
                        }
                        other => return Err(err(format!("unknown control kind `{other}`"))),
                    };
                    let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number `{s}`")));
                    let control = ControlVariable {
                        kind,
                        lower: num(tokens[2])?,
                        upper: num(tokens[3])?,
                        bits: tokens[4].parse().map_err(|_| err(format!("bad bits `{}`", tokens[4])))?,
                    };
                    controls.get_or_insert_with(Vec::new).push(control);
                }
                _ => return Err(err("data before first section header".into())),
            }
        }
        if let Some(c) = controls {
            cfg.controls = c;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[ga]");
        let _ = writeln!(out, "population={}", self.population_size);
        let _ = writeln!(out, "generations={}", self.max_generations);
        let _ = writeln!(out, "crossover={}", self.crossover_rate);
        let _ = writeln!(out, "mutation_initial={}", self.mutation_initial);
        let _ = writeln!(out, "beta={}", self.beta);
        let _ = writeln!(out, "elite={}", self.elite_count);
        let _ = writeln!(out, "seed={}", self.rng_seed);
        let _ = writeln!(out, "\n[controls]\n# kind ref lower upper bits");
        for c in &self.controls {
            let _ = writeln!(out, "{} {} {} {} {}", c.kind.keyword(), c.kind.reference(), c.lower, c.upper, c.bits);
        }
        out
    }
}
