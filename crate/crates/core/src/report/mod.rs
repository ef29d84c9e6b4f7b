//! Report documents for the command-line front-end.
//!
//! Every document embeds a [`RunManifest`] and renders to a human table
//! (6 significant digits), CSV (full precision, `#`-headed sections) or JSON.
//! CSV and JSON are produced from the same records, and both print floats
//! in shortest round-trip form, so the two carry identical values.

mod svg;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::admittance::AdmittanceMatrix;
use crate::ga::{GaConfig, GenerationStats, OpfResult};
use crate::losses::analyze;
use crate::network::Network;
use crate::solver::{LoadFlowSolution, QLimit, QLimitSwitch, SolverOptions};
use crate::strategies::{ComparisonRow, Strategy};

pub use svg::{bar_chart, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Csv,
    Json,
}

/// What was run, on which bytes, with which settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub case_path: String,
    /// SHA-256 of the raw case file bytes, hex.
    pub case_sha256: String,
    pub solver_options: SolverOptions,
    pub strategies: Vec<String>,
    pub ga_config: Option<GaConfig>,
    pub tool_version: String,
    /// RFC 3339, UTC.
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: Vec<String>, case_path: &str, case_bytes: &[u8], options: SolverOptions) -> Self {
        Self {
            command,
            case_path: case_path.to_string(),
            case_sha256: sha256_hex(case_bytes),
            solver_options: options,
            strategies: Vec::new(),
            ga_config: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn with_strategies(mut self, strategies: &[Strategy]) -> Self {
        self.strategies = strategies.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_ga_config(mut self, config: &GaConfig) -> Self {
        self.ga_config = Some(config.clone());
        self
    }

    fn pairs(&self) -> Vec<(&'static str, String)> {
        let o = &self.solver_options;
        let mut out = vec![
            ("command", self.command.join(" ")),
            ("case_path", self.case_path.clone()),
            ("case_sha256", self.case_sha256.clone()),
            ("tolerance", o.tolerance.to_string()),
            ("max_iterations", o.max_iterations.to_string()),
            ("enforce_q_limits", o.enforce_q_limits.to_string()),
            ("flat_start", o.flat_start.to_string()),
        ];
        if !self.strategies.is_empty() {
            out.push(("strategies", self.strategies.join(" ")));
        }
        if let Some(cfg) = &self.ga_config {
            out.push(("ga_config", serde_json::to_string(cfg).expect("config serializes")));
        }
        out.push(("tool_version", self.tool_version.clone()));
        out.push(("timestamp", self.timestamp.clone()));
        out
    }

    fn table(&self) -> String {
        self.pairs().iter().map(|(k, v)| format!("# {k}: {v}\n")).collect()
    }

    fn csv(&self) -> String {
        let mut out = String::from("# manifest\nkey,value\n");
        for (k, v) in self.pairs() {
            let _ = writeln!(out, "{k},{}", csv_field(&v));
        }
        out
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Format with 6 significant digits in fixed notation.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let decimals = |m: i32| (5 - m).max(0) as usize;
    let mag = x.abs().log10().floor() as i32;
    let s = format!("{:.*}", decimals(mag), x);
    // rounding may carry into a new leading digit (9.999996 -> 10.00000)
    let rounded: f64 = s.parse().unwrap_or(x);
    if rounded.abs() >= 10f64.powi(mag + 1) {
        format!("{:.*}", decimals(mag + 1), x)
    } else {
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

/// Fixed-width text table, first column left-aligned, the rest right-aligned.
fn text_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                let _ = write!(s, "{cell:<w$}");
            } else {
                let _ = write!(s, "  {cell:>w$}");
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(headers.to_vec());
    out += &line(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(|s| s.as_str()).collect());
    for row in rows {
        out += &line(row.iter().map(|s| s.as_str()).collect());
    }
    out
}

/// Documents that render to the three output formats.
pub trait Render: Serialize {
    fn table(&self) -> String;
    fn csv(&self) -> String;

    fn json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.table(),
            Format::Csv => self.csv(),
            Format::Json => self.json(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusRecord {
    pub id: u32,
    pub kind: String,
    pub v_mag_pu: f64,
    pub v_ang_deg: f64,
    pub p_gen_mw: f64,
    pub q_gen_mvar: f64,
    pub p_load_mw: f64,
    pub q_load_mvar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub index: usize,
    pub from_bus: u32,
    pub to_bus: u32,
    pub p_from_mw: f64,
    pub q_from_mvar: f64,
    pub p_to_mw: f64,
    pub q_to_mvar: f64,
    pub p_loss_mw: f64,
    pub q_loss_mvar: f64,
    pub q_charging_mvar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub p_loss_mw: f64,
    pub q_loss_mvar: f64,
    pub q_charging_mvar: f64,
    pub q_shunt_mvar: f64,
    pub p_gen_mw: f64,
    pub q_gen_mvar: f64,
    pub p_load_mw: f64,
    pub q_load_mvar: f64,
}

/// A solved network flattened into engineering units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub converged: bool,
    pub iterations: usize,
    pub final_mismatch_pu: f64,
    pub mismatch_trace: Vec<f64>,
    pub q_limit_switches: Vec<QLimitSwitch>,
    pub buses: Vec<BusRecord>,
    pub branches: Vec<BranchRecord>,
    pub totals: Totals,
}

impl SolutionSummary {
    pub fn new(network: &Network, solution: &LoadFlowSolution) -> Self {
        let base = network.base_mva;
        let report = analyze(network, solution);
        let buses = network
            .buses
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let gen = solution.generation(network, i);
                BusRecord {
                    id: b.id,
                    kind: b.kind.as_str().to_string(),
                    v_mag_pu: solution.state.v_mag[i],
                    v_ang_deg: solution.state.v_ang[i].to_degrees(),
                    p_gen_mw: gen.re * base,
                    q_gen_mvar: gen.im * base,
                    p_load_mw: b.p_demand * base,
                    q_load_mvar: b.q_demand * base,
                }
            })
            .collect();
        let branches = report
            .branch_flows
            .iter()
            .map(|f| BranchRecord {
                index: f.branch,
                from_bus: f.from_bus,
                to_bus: f.to_bus,
                p_from_mw: f.s_from.re * base,
                q_from_mvar: f.s_from.im * base,
                p_to_mw: f.s_to.re * base,
                q_to_mvar: f.s_to.im * base,
                p_loss_mw: f.p_loss * base,
                q_loss_mvar: f.q_loss * base,
                q_charging_mvar: f.q_charging * base,
            })
            .collect();
        Self {
            converged: solution.converged,
            iterations: solution.iterations,
            final_mismatch_pu: solution.final_mismatch(),
            mismatch_trace: solution.mismatch_trace.clone(),
            q_limit_switches: solution.q_limit_switches.clone(),
            buses,
            branches,
            totals: Totals {
                p_loss_mw: report.total_p_loss_mw,
                q_loss_mvar: report.total_q_loss_mvar,
                q_charging_mvar: report.total_charging_mvar,
                q_shunt_mvar: report.total_shunt_mvar,
                p_gen_mw: report.total_generation.p_mw,
                q_gen_mvar: report.total_generation.q_mvar,
                p_load_mw: report.total_load.p_mw,
                q_load_mvar: report.total_load.q_mvar,
            },
        }
    }

    pub fn totals_line(&self) -> String {
        format!(
            "P_loss_MW={} Q_loss_MVAR={}",
            sig6(self.totals.p_loss_mw),
            sig6(self.totals.q_loss_mvar)
        )
    }

    fn table(&self) -> String {
        let mut out = String::new();
        let status = if self.converged { "converged" } else { "NOT CONVERGED" };
        let _ = writeln!(
            out,
            "{status} in {} iterations, max mismatch {} pu\n",
            self.iterations,
            sig6(self.final_mismatch_pu)
        );
        for s in &self.q_limit_switches {
            let what = if s.restored { "restored to PV".to_string() } else { format!("held at Q {}", limit_name(s.limit)) };
            let _ = writeln!(out, "bus {} {what} at iteration {}", s.bus, s.iteration);
        }
        if !self.q_limit_switches.is_empty() {
            out.push('\n');
        }
        out += "Bus voltages\n";
        let rows: Vec<Vec<String>> = self
            .buses
            .iter()
            .map(|b| {
                vec![
                    b.id.to_string(),
                    b.kind.clone(),
                    sig6(b.v_mag_pu),
                    sig6(b.v_ang_deg),
                    sig6(b.p_gen_mw),
                    sig6(b.q_gen_mvar),
                    sig6(b.p_load_mw),
                    sig6(b.q_load_mvar),
                ]
            })
            .collect();
        out += &text_table(
            &["bus", "type", "V_pu", "angle_deg", "P_gen_MW", "Q_gen_MVAR", "P_load_MW", "Q_load_MVAR"],
            &rows,
        );
        out += "\nBranch flows and losses\n";
        let rows: Vec<Vec<String>> = self
            .branches
            .iter()
            .map(|b| {
                vec![
                    (b.index + 1).to_string(),
                    format!("{}-{}", b.from_bus, b.to_bus),
                    sig6(b.p_from_mw),
                    sig6(b.q_from_mvar),
                    sig6(b.p_to_mw),
                    sig6(b.q_to_mvar),
                    sig6(b.p_loss_mw),
                    sig6(b.q_loss_mvar),
                    sig6(b.q_charging_mvar),
                ]
            })
            .collect();
        out += &text_table(
            &["#", "branch", "P_from_MW", "Q_from_MVAR", "P_to_MW", "Q_to_MVAR", "P_loss_MW", "Q_loss_MVAR", "Q_chg_MVAR"],
            &rows,
        );
        let t = &self.totals;
        out += "\nSystem totals\n";
        let _ = writeln!(out, "generation  {} MW  {} MVAR", sig6(t.p_gen_mw), sig6(t.q_gen_mvar));
        let _ = writeln!(out, "load        {} MW  {} MVAR", sig6(t.p_load_mw), sig6(t.q_load_mvar));
        let _ = writeln!(out, "charging    {} MVAR", sig6(t.q_charging_mvar));
        let _ = writeln!(out, "shunts      {} MVAR", sig6(t.q_shunt_mvar));
        let _ = writeln!(out, "{}", self.totals_line());
        out
    }

    fn csv(&self) -> String {
        let mut out = String::from("# summary\nconverged,iterations,final_mismatch_pu\n");
        let _ = writeln!(out, "{},{},{}", self.converged, self.iterations, num(self.final_mismatch_pu));
        out += "# mismatch_trace\niteration,max_mismatch_pu\n";
        for (k, m) in self.mismatch_trace.iter().enumerate() {
            let _ = writeln!(out, "{},{}", k + 1, num(*m));
        }
        out += "# q_limit_switches\nbus,iteration,limit,restored\n";
        for s in &self.q_limit_switches {
            let _ = writeln!(out, "{},{},{},{}", s.bus, s.iteration, limit_name(s.limit), s.restored);
        }
        out += "# buses\nid,kind,v_mag_pu,v_ang_deg,p_gen_mw,q_gen_mvar,p_load_mw,q_load_mvar\n";
        for b in &self.buses {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                b.id,
                b.kind,
                num(b.v_mag_pu),
                num(b.v_ang_deg),
                num(b.p_gen_mw),
                num(b.q_gen_mvar),
                num(b.p_load_mw),
                num(b.q_load_mvar)
            );
        }
        out += "# branches\nindex,from_bus,to_bus,p_from_mw,q_from_mvar,p_to_mw,q_to_mvar,p_loss_mw,q_loss_mvar,q_charging_mvar\n";
        for b in &self.branches {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                b.index,
                b.from_bus,
                b.to_bus,
                num(b.p_from_mw),
                num(b.q_from_mvar),
                num(b.p_to_mw),
                num(b.q_to_mvar),
                num(b.p_loss_mw),
                num(b.q_loss_mvar),
                num(b.q_charging_mvar)
            );
        }
        let t = &self.totals;
        out += "# totals\np_loss_mw,q_loss_mvar,q_charging_mvar,q_shunt_mvar,p_gen_mw,q_gen_mvar,p_load_mw,q_load_mvar\n";
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            num(t.p_loss_mw),
            num(t.q_loss_mvar),
            num(t.q_charging_mvar),
            num(t.q_shunt_mvar),
            num(t.p_gen_mw),
            num(t.q_gen_mvar),
            num(t.p_load_mw),
            num(t.q_load_mvar)
        );
        out
    }

    /// Per-branch real and reactive loss bars.
    pub fn svg(&self, description: &str) -> String {
        let groups: Vec<String> = self.branches.iter().map(|b| format!("{}-{}", b.from_bus, b.to_bus)).collect();
        let series = vec![
            Series::new("P loss (MW)", self.branches.iter().map(|b| b.p_loss_mw).collect()),
            Series::new("Q loss (MVAR)", self.branches.iter().map(|b| b.q_loss_mvar).collect()),
        ];
        bar_chart("Branch losses", "loss", &groups, &series, description)
    }
}

fn limit_name(limit: QLimit) -> &'static str {
    match limit {
        QLimit::Min => "min",
        QLimit::Max => "max",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub manifest: RunManifest,
    pub solution: SolutionSummary,
}

impl Render for SolveReport {
    fn table(&self) -> String {
        self.manifest.table() + "\n" + &self.solution.table()
    }

    fn csv(&self) -> String {
        self.manifest.csv() + &self.solution.csv()
    }
}

impl SolveReport {
    pub fn svg(&self) -> String {
        self.solution.svg(&serde_json::to_string(&self.manifest).expect("manifest serializes"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub manifest: RunManifest,
    pub rows: Vec<ComparisonRow>,
}

impl Render for StrategyReport {
    fn table(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.label.clone(),
                    if r.converged { "yes".into() } else { "no".into() },
                    r.iterations.to_string(),
                    sig6(r.p_loss_mw),
                    sig6(r.q_loss_mvar),
                    sig6(r.delta_p_mw),
                    format!("{} @ {}", sig6(r.min_voltage_pu), r.min_voltage_bus),
                ]
            })
            .collect();
        self.manifest.table()
            + "\n"
            + &text_table(
                &["scenario", "converged", "iter", "P_loss_MW", "Q_loss_MVAR", "dP_MW", "V_min_pu @ bus"],
                &rows,
            )
    }

    fn csv(&self) -> String {
        let mut out = self.manifest.csv();
        out += "# scenarios\nlabel,strategy,converged,iterations,p_loss_mw,q_loss_mvar,delta_p_mw,min_voltage_bus,min_voltage_pu\n";
        for r in &self.rows {
            let spec = r.strategy.as_ref().map(|s| s.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                csv_field(&r.label),
                csv_field(&spec),
                r.converged,
                r.iterations,
                num(r.p_loss_mw),
                num(r.q_loss_mvar),
                num(r.delta_p_mw),
                r.min_voltage_bus,
                num(r.min_voltage_pu)
            );
        }
        out
    }
}

impl StrategyReport {
    /// One bar group per scenario: real and reactive loss.
    pub fn svg(&self) -> String {
        let groups: Vec<String> = self.rows.iter().map(|r| r.label.clone()).collect();
        let series = vec![
            Series::new("P loss (MW)", self.rows.iter().map(|r| r.p_loss_mw).collect()),
            Series::new("Q loss (MVAR)", self.rows.iter().map(|r| r.q_loss_mvar).collect()),
        ];
        let desc = serde_json::to_string(&self.manifest).expect("manifest serializes");
        bar_chart("Losses per scenario", "loss", &groups, &series, &desc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlValue {
    pub control: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpfRunRecord {
    pub run: usize,
    pub seed: u64,
    pub best_loss_mw: f64,
    /// Reduction relative to the load-flow loss of the same network, percent.
    pub reduction_pct: f64,
    pub evaluations: usize,
    pub chromosome: String,
    pub controls: Vec<ControlValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub run: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub stats: GenerationStats,
}

/// Repeated GA runs on one network, with the load-flow loss of the
/// unoptimized network alongside for reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpfReport {
    pub manifest: RunManifest,
    /// Newton-Raphson loss of the network before optimization, MW.
    pub nr_base_loss_mw: f64,
    pub runs: Vec<OpfRunRecord>,
    pub mean_best_loss_mw: f64,
    pub mean_reduction_pct: f64,
    pub history: Vec<HistoryRecord>,
    /// Index into `runs` of the lowest-loss run.
    pub best_run: usize,
    pub best_solution: SolutionSummary,
}

impl OpfReport {
    /// `results[k]` must come from seed `seeds[k]`; at least one run.
    pub fn new(manifest: RunManifest, nr_base_loss_mw: f64, seeds: &[u64], results: &[OpfResult], config: &GaConfig) -> Self {
        assert!(!results.is_empty() && seeds.len() == results.len());
        let reduction = |loss: f64| 100.0 * (nr_base_loss_mw - loss) / nr_base_loss_mw;
        let runs: Vec<OpfRunRecord> = results
            .iter()
            .zip(seeds)
            .enumerate()
            .map(|(k, (r, &seed))| OpfRunRecord {
                run: k + 1,
                seed,
                best_loss_mw: r.best_loss_mw,
                reduction_pct: reduction(r.best_loss_mw),
                evaluations: r.evaluations,
                chromosome: r.best_chromosome.to_string(),
                controls: config
                    .controls
                    .iter()
                    .zip(&r.best_controls)
                    .map(|(c, v)| ControlValue { control: c.kind.to_string(), value: *v })
                    .collect(),
            })
            .collect();
        let history = results
            .iter()
            .zip(seeds)
            .enumerate()
            .flat_map(|(k, (r, &seed))| {
                r.history.iter().map(move |s| HistoryRecord { run: k + 1, seed, stats: s.clone() })
            })
            .collect();
        let n = runs.len() as f64;
        let mean_best_loss_mw = runs.iter().map(|r| r.best_loss_mw).sum::<f64>() / n;
        let best_run = (0..runs.len())
            .min_by(|&a, &b| runs[a].best_loss_mw.total_cmp(&runs[b].best_loss_mw))
            .expect("at least one run");
        let best = &results[best_run];
        Self {
            manifest,
            nr_base_loss_mw,
            mean_best_loss_mw,
            mean_reduction_pct: reduction(mean_best_loss_mw),
            runs,
            history,
            best_run,
            best_solution: SolutionSummary::new(&best.network, &best.solution),
        }
    }

    /// Per-generation statistics of every run.
    pub fn history_csv(&self) -> String {
        let mut out = String::from(
            "run,seed,generation,best_loss_mw,mean_loss_mw,best_fitness,mean_fitness,converged_members\n",
        );
        for h in &self.history {
            let s = &h.stats;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                h.run,
                h.seed,
                s.generation,
                num(s.best_loss_mw),
                num(s.mean_loss_mw),
                num(s.best_fitness),
                num(s.mean_fitness),
                s.converged_members
            );
        }
        out
    }

    /// One bar per run plus the mean, next to the unoptimized loss.
    pub fn svg(&self) -> String {
        let mut groups: Vec<String> = self.runs.iter().map(|r| format!("run {} (seed {})", r.run, r.seed)).collect();
        groups.push("average".into());
        let mut ga: Vec<f64> = self.runs.iter().map(|r| r.best_loss_mw).collect();
        ga.push(self.mean_best_loss_mw);
        let series = vec![
            Series::new("NR base loss (MW)", vec![self.nr_base_loss_mw; groups.len()]),
            Series::new("GA-optimized loss (MW)", ga),
        ];
        let desc = serde_json::to_string(&self.manifest).expect("manifest serializes");
        bar_chart("GA optimal power flow", "real loss (MW)", &groups, &series, &desc)
    }
}

impl Render for OpfReport {
    fn table(&self) -> String {
        let mut rows: Vec<Vec<String>> = self
            .runs
            .iter()
            .map(|r| {
                vec![
                    r.run.to_string(),
                    r.seed.to_string(),
                    sig6(r.best_loss_mw),
                    sig6(r.reduction_pct),
                    r.evaluations.to_string(),
                ]
            })
            .collect();
        rows.push(vec![
            "average".into(),
            String::new(),
            sig6(self.mean_best_loss_mw),
            sig6(self.mean_reduction_pct),
            String::new(),
        ]);
        let mut out = self.manifest.table();
        let _ = writeln!(out, "\nNR base loss (unoptimized): {} MW\n", sig6(self.nr_base_loss_mw));
        out += &text_table(&["run", "seed", "GA_loss_MW", "reduction_%", "evaluations"], &rows);
        let best = &self.runs[self.best_run];
        let _ = writeln!(out, "\nBest run {} controls", best.run);
        let rows: Vec<Vec<String>> =
            best.controls.iter().map(|c| vec![c.control.clone(), sig6(c.value)]).collect();
        out += &text_table(&["control", "value_pu"], &rows);
        out += "\nBest run solution\n";
        out += &self.best_solution.table();
        out
    }

    fn csv(&self) -> String {
        let mut out = self.manifest.csv();
        let _ = writeln!(out, "# nr_base\nnr_base_loss_mw\n{}", num(self.nr_base_loss_mw));
        out += "# runs\nrun,seed,best_loss_mw,reduction_pct,evaluations,chromosome\n";
        for r in &self.runs {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.run,
                r.seed,
                num(r.best_loss_mw),
                num(r.reduction_pct),
                r.evaluations,
                r.chromosome
            );
        }
        let _ = writeln!(
            out,
            "# average\nmean_best_loss_mw,mean_reduction_pct\n{},{}",
            num(self.mean_best_loss_mw),
            num(self.mean_reduction_pct)
        );
        out += "# best_controls\ncontrol,value\n";
        for c in &self.runs[self.best_run].controls {
            let _ = writeln!(out, "{},{}", c.control, num(c.value));
        }
        out += "# history\n";
        out += &self.history_csv();
        out + &self.best_solution.csv()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YbusEntry {
    pub i: u32,
    pub j: u32,
    pub g: f64,
    pub b: f64,
}

/// Nonzero admittance entries addressed by external bus number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YbusReport {
    pub manifest: RunManifest,
    pub entries: Vec<YbusEntry>,
}

impl YbusReport {
    pub fn new(manifest: RunManifest, network: &Network, ybus: &AdmittanceMatrix) -> Self {
        let entries = ybus
            .nonzeros()
            .map(|(i, j, y)| YbusEntry { i: network.buses[i].id, j: network.buses[j].id, g: y.re, b: y.im })
            .collect();
        Self { manifest, entries }
    }
}

impl Render for YbusReport {
    fn table(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .entries
            .iter()
            .map(|e| vec![e.i.to_string(), e.j.to_string(), sig6(e.g), sig6(e.b)])
            .collect();
        self.manifest.table() + "\n" + &text_table(&["i", "j", "G_pu", "B_pu"], &rows)
    }

    fn csv(&self) -> String {
        let mut out = self.manifest.csv();
        out += "# ybus\ni,j,g,b\n";
        for e in &self.entries {
            let _ = writeln!(out, "{},{},{},{}", e.i, e.j, num(e.g), num(e.b));
        }
        out
    }
}
