//! `report.json`, `trajectory.csv`, `table.txt` and the field snapshots.
//! Schemas are in `docs/`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use plaque_core::growth::field::FieldState;
use plaque_core::{TrajectoryRow, SECONDS_PER_DAY};

pub const REPORT_SCHEMA: &str = "plaque-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeReport {
    /// Coarse work on the coordinator.
    pub master: f64,
    /// Busiest fine process.
    pub slaves_max: f64,
    pub total: f64,
    /// The serial reference run under the same cost model.
    pub serial: f64,
    pub speedup: f64,
}

/// Everything that may differ between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub wall_clock_seconds: f64,
    pub threads: usize,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub scenario: String,
    pub model: String,
    pub mode: String,
    #[serde(rename = "P")]
    pub processes: usize,
    #[serde(rename = "N_l")]
    pub n_steps: usize,
    pub k_par: Option<usize>,
    pub stopping: Option<String>,
    pub eps_par: Option<f64>,
    /// `c_s` or `c_mid`.
    pub functional: String,
    pub per_iteration_errors: Vec<f64>,
    pub fine_endpoint_errors: Vec<f64>,
    pub coarse_endpoint_errors: Vec<f64>,
    pub final_value: f64,
    pub reference_value: f64,
    pub micro_problems_fine: u64,
    pub micro_problems_coarse: u64,
    pub micro_problems_total: u64,
    pub micro_problems_per_process: Vec<u64>,
    pub micro_problems_formula: Option<u64>,
    pub micro_time_steps: u64,
    pub rd_solves_fine: u64,
    pub rd_solves_coarse: u64,
    pub rd_solves_formula: Option<u64>,
    pub messages: u64,
    pub speedup: f64,
    pub efficiency: f64,
    pub estimated_runtime: RuntimeReport,
    pub warm_start: Option<String>,
    pub metadata: Metadata,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Fixed-width summary.
    pub fn table(&self) -> String {
        let mut t = String::new();
        let _ = writeln!(
            t,
            "scenario {}  model {}  mode {}  P {}  N_l {}",
            self.scenario, self.model, self.mode, self.processes, self.n_steps
        );
        if let (Some(stop), Some(eps)) = (&self.stopping, self.eps_par) {
            let _ = writeln!(t, "stopping {stop} endpoint, eps_par {eps:e}");
        }
        let _ = writeln!(t);
        if !self.per_iteration_errors.is_empty() {
            let _ = writeln!(t, "{:<12}{:>14}", "iteration", format!("err({})", self.functional));
            for (k, e) in self.per_iteration_errors.iter().enumerate() {
                let _ = writeln!(t, "{:<12}{:>14.3e}", k + 1, e);
            }
            let _ = writeln!(t);
        }
        let rows: Vec<(&str, String)> = vec![
            ("k_par", self.k_par.map_or("-".into(), |k| k.to_string())),
            ("final value", format!("{:.8}", self.final_value)),
            ("serial value", format!("{:.8}", self.reference_value)),
            ("#mp", self.micro_problems_total.to_string()),
            ("#mp fine / coarse", format!("{} / {}", self.micro_problems_fine, self.micro_problems_coarse)),
            ("#rd fine / coarse", format!("{} / {}", self.rd_solves_fine, self.rd_solves_coarse)),
            ("speedup", format!("{:.1}", self.speedup)),
            ("efficiency", format!("{:.1} %", 100.0 * self.efficiency)),
            (
                "est. runtime",
                format!(
                    "{:.0} + {:.0} = {:.0} (serial {:.0})",
                    self.estimated_runtime.master,
                    self.estimated_runtime.slaves_max,
                    self.estimated_runtime.total,
                    self.estimated_runtime.serial
                ),
            ),
        ];
        for (k, v) in rows {
            let _ = writeln!(t, "{k:<20}{v}");
        }
        t
    }
}

/// `trajectory.csv`. Scalar model: `t_days,c_s,gamma_bar,width,cycles`;
/// field model: `t_days,c_mid,c_mean,gamma_bar,width,cycles`. The first row
/// is the initial state and leaves `gamma_bar` and `cycles` empty.
pub fn trajectory_csv(rows: &[TrajectoryRow], field: bool) -> String {
    let mut s = String::new();
    s.push_str(if field { "t_days,c_mid,c_mean,gamma_bar,width,cycles\n" } else { "t_days,c_s,gamma_bar,width,cycles\n" });
    for r in rows {
        let _ = write!(s, "{},{}", r.t / SECONDS_PER_DAY, r.value);
        if field {
            let _ = write!(s, ",{}", r.mean.unwrap_or(f64::NAN));
        }
        let g = r.gamma_bar.map_or(String::new(), |g| g.to_string());
        let c = r.cycles.map_or(String::new(), |c| c.to_string());
        let _ = writeln!(s, ",{g},{},{c}", r.width);
    }
    s
}

/// `field.csv`: `x,y,c` for every node.
pub fn field_csv(state: &FieldState) -> String {
    let g = state.field.grid;
    let mut s = String::from("x,y,c\n");
    for j in 0..g.ny {
        for i in 0..g.nx {
            let _ = writeln!(s, "{},{},{}", g.x(i), g.y(j), state.field.get(i, j));
        }
    }
    s
}

/// `interface.csv`: `x,c` along `y = −1`.
pub fn interface_csv(state: &FieldState) -> String {
    let g = state.field.grid;
    let mut s = String::from("x,c\n");
    for (i, c) in state.field.top_row().iter().enumerate() {
        let _ = writeln!(s, "{},{}", g.x(i), c);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_headers_and_empty_cells() {
        let rows = vec![
            TrajectoryRow { t: 0.0, value: 0.0, mean: None, gamma_bar: None, width: 2.0, cycles: None },
            TrajectoryRow { t: 25_920.0, value: 0.01, mean: None, gamma_bar: Some(4e-7), width: 1.98, cycles: Some(3) },
        ];
        let s = trajectory_csv(&rows, false);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "t_days,c_s,gamma_bar,width,cycles");
        assert_eq!(lines[1], "0,0,,2,");
        assert_eq!(lines[2], "0.3,0.01,0.0000004,1.98,3");
    }
}
