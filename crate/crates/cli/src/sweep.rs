//! The `sweep` subcommand: one scenario over a list of process counts.
//!
//! With iteration counts given (`--k`), only the closed-form counts are
//! tabulated and nothing is simulated.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use plaque_core::costs;

use crate::run::execute;
use crate::scenario::{RunMode, Scenario};

pub const SWEEP_SCHEMA: &str = "plaque-sweep/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepColumn {
    #[serde(rename = "P")]
    pub processes: usize,
    /// Failure message when the run did not finish.
    pub error: Option<String>,
    pub k_par: Option<usize>,
    pub per_iteration_errors: Vec<f64>,
    pub micro_problems: Option<u64>,
    pub micro_problems_formula: Option<u64>,
    pub rd_solves: Option<u64>,
    pub speedup: Option<f64>,
    pub efficiency: Option<f64>,
    pub runtime_master: Option<f64>,
    pub runtime_slaves_max: Option<f64>,
    pub runtime_total: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulaRow {
    #[serde(rename = "P")]
    pub processes: u64,
    pub k: u64,
    pub standard: u64,
    pub reusage: u64,
    pub heuristic: u64,
    pub rd_reusage: u64,
    pub speedup_standard: f64,
    pub speedup_reusage: f64,
    pub speedup_heuristic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema: String,
    pub scenario: String,
    pub mode: String,
    #[serde(rename = "N_l")]
    pub n_steps: usize,
    pub columns: Vec<SweepColumn>,
    pub formulas: Vec<FormulaRow>,
    /// Column with the highest speedup among finished runs.
    pub best_processes: Option<usize>,
}

impl SweepReport {
    pub fn failed(&self) -> Vec<&SweepColumn> {
        self.columns.iter().filter(|c| c.error.is_some()).collect()
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let json = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(dir.join("sweep.json"), json).context("writing sweep.json")?;
        std::fs::write(dir.join("table.txt"), self.table()).context("writing table.txt")?;
        Ok(())
    }

    pub fn table(&self) -> String {
        let mut t = String::new();
        let _ = writeln!(t, "scenario {}  mode {}  N_l {}", self.scenario, self.mode, self.n_steps);
        if !self.formulas.is_empty() {
            let _ = writeln!(
                t,
                "{:>6}{:>4}{:>10}{:>10}{:>10}{:>10}{:>9}{:>9}{:>9}",
                "P", "k", "standard", "reusage", "heur.", "rd(reus)", "S_std", "S_reus", "S_heur"
            );
            for r in &self.formulas {
                let _ = writeln!(
                    t,
                    "{:>6}{:>4}{:>10}{:>10}{:>10}{:>10}{:>9.2}{:>9.2}{:>9.2}",
                    r.processes,
                    r.k,
                    r.standard,
                    r.reusage,
                    r.heuristic,
                    r.rd_reusage,
                    r.speedup_standard,
                    r.speedup_reusage,
                    r.speedup_heuristic
                );
            }
            return t;
        }

        const W: usize = 13;
        let mut header = format!("{:<14}", "");
        for c in &self.columns {
            let star = if Some(c.processes) == self.best_processes { "*" } else { "" };
            header.push_str(&format!("{:>W$}", format!("P={}{}", c.processes, star)));
        }
        let _ = writeln!(t, "{header}");
        let kmax = self.columns.iter().map(|c| c.per_iteration_errors.len()).max().unwrap_or(0);
        for k in 0..kmax {
            let mut line = format!("{:<14}", format!("err k={}", k + 1));
            for c in &self.columns {
                let cell = c.per_iteration_errors.get(k).map_or(String::new(), |e| format!("{e:.3e}"));
                line.push_str(&format!("{cell:>W$}"));
            }
            let _ = writeln!(t, "{line}");
        }
        let rows: [(&str, fn(&SweepColumn) -> Option<String>); 7] = [
            ("k_par", |c| c.k_par.map(|k| k.to_string())),
            ("#mp", |c| c.micro_problems.map(|m| m.to_string())),
            ("#mp formula", |c| c.micro_problems_formula.map(|m| m.to_string())),
            ("speedup", |c| c.speedup.map(|s| format!("{s:.1}"))),
            ("efficiency", |c| c.efficiency.map(|e| format!("{:.1} %", 100.0 * e))),
            ("runtime", |c| c.runtime_total.map(|r| format!("{r:.0}"))),
            ("status", |c| Some(if c.error.is_some() { "FAILED".into() } else { "ok".into() })),
        ];
        for (name, f) in rows {
            let mut line = format!("{name:<14}");
            for c in &self.columns {
                line.push_str(&format!("{:>W$}", f(c).unwrap_or_else(|| "-".into())));
            }
            let _ = writeln!(t, "{line}");
        }
        for c in self.failed() {
            let _ = writeln!(t, "P={}: {}", c.processes, c.error.as_deref().unwrap_or(""));
        }
        t
    }
}

/// Simulates the scenario once per process count. Failed runs become
/// columns with an error message rather than aborting the sweep.
pub fn simulate(sc: &Scenario, processes: &[usize], threads: usize) -> anyhow::Result<SweepReport> {
    if sc.mode == RunMode::Serial {
        bail!("sweep needs a parallel mode (parareal, reusage or heuristic)");
    }
    let n_steps = sc.schedule_obj()?.n_steps;
    let mut columns = Vec::with_capacity(processes.len());
    for &p in processes {
        let mut s = sc.clone();
        s.schedule.processes = p;
        columns.push(match execute(&s, threads) {
            Ok(out) => {
                let r = out.report;
                SweepColumn {
                    processes: p,
                    error: None,
                    k_par: r.k_par,
                    per_iteration_errors: r.per_iteration_errors,
                    micro_problems: Some(r.micro_problems_total),
                    micro_problems_formula: r.micro_problems_formula,
                    rd_solves: Some(r.rd_solves_fine + r.rd_solves_coarse),
                    speedup: Some(r.speedup),
                    efficiency: Some(r.efficiency),
                    runtime_master: Some(r.estimated_runtime.master),
                    runtime_slaves_max: Some(r.estimated_runtime.slaves_max),
                    runtime_total: Some(r.estimated_runtime.total),
                }
            }
            Err(e) => SweepColumn {
                processes: p,
                error: Some(format!("{e:#}")),
                k_par: None,
                per_iteration_errors: Vec::new(),
                micro_problems: None,
                micro_problems_formula: None,
                rd_solves: None,
                speedup: None,
                efficiency: None,
                runtime_master: None,
                runtime_slaves_max: None,
                runtime_total: None,
            },
        });
    }
    let best_processes = columns
        .iter()
        .filter_map(|c| c.speedup.map(|s| (c.processes, s)))
        .fold(None, |best: Option<(usize, f64)>, (p, s)| match best {
            Some((_, b)) if b >= s => best,
            _ => Some((p, s)),
        })
        .map(|(p, _)| p);
    Ok(SweepReport {
        schema: SWEEP_SCHEMA.into(),
        scenario: sc.name.clone(),
        mode: sc.mode.name().into(),
        n_steps,
        columns,
        formulas: Vec::new(),
        best_processes,
    })
}

/// Closed-form counts for every `(P, k)` pair.
pub fn formulas(sc: &Scenario, processes: &[usize], ks: &[usize]) -> anyhow::Result<SweepReport> {
    let n = sc.schedule_obj()?.n_steps as u64;
    let mut rows = Vec::new();
    for &p in processes {
        for &k in ks {
            let (p, k) = (p as u64, k as u64);
            let standard = costs::count_standard(k, p, n)?;
            let reusage = costs::count_reusage(k, p, n)?;
            let heuristic = costs::count_heuristic(k, p, n)?;
            rows.push(FormulaRow {
                processes: p,
                k,
                standard,
                reusage,
                heuristic,
                rd_reusage: costs::count_rd_reusage(k, p, n)?,
                speedup_standard: costs::speedup_efficiency(standard, n, p)?.0,
                speedup_reusage: costs::speedup_efficiency(reusage, n, p)?.0,
                speedup_heuristic: costs::speedup_efficiency(heuristic, n, p)?.0,
            });
        }
    }
    Ok(SweepReport {
        schema: SWEEP_SCHEMA.into(),
        scenario: sc.name.clone(),
        mode: "formula".into(),
        n_steps: n as usize,
        columns: Vec::new(),
        formulas: rows,
        best_processes: None,
    })
}
