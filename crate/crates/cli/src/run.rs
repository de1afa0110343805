//! The `run` subcommand: one scenario, one mode, all output files.

use std::path::Path;
use std::time::Instant;

use anyhow::Context;

use plaque_core::costs::{self, LedgerSnapshot};
use plaque_core::parareal::Parareal;
use plaque_core::{
    FieldState, GrowthModel, MicroState, OdeModel, PararealConfig, PdeModel, ScalarState, StoppingCriterion,
    TrajectoryRow, TwoScale,
};

use crate::exec::ThreadPool;
use crate::report::{self, Metadata, Report, RuntimeReport, REPORT_SCHEMA};
use crate::scenario::{ModelKind, RunMode, Scenario};

/// A finished run held in memory.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub rows: Vec<TrajectoryRow>,
    /// Final reaction-diffusion field, field model only.
    pub field: Option<FieldState>,
}

impl RunOutput {
    /// Writes `report.json`, `trajectory.csv`, `table.txt` and, for the field
    /// model, `field.csv` and `interface.csv`.
    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut files = vec![
            ("report.json", self.report.to_json()),
            ("trajectory.csv", report::trajectory_csv(&self.rows, self.field.is_some())),
            ("table.txt", self.report.table()),
        ];
        if let Some(f) = &self.field {
            files.push(("field.csv", report::field_csv(f)));
            files.push(("interface.csv", report::interface_csv(f)));
        }
        for (name, body) in files {
            let path = dir.join(name);
            std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

/// Final-state extras per model.
trait Snapshot: GrowthModel {
    const FUNCTIONAL: &'static str;
    fn field(state: &Self::State) -> Option<FieldState>;
}

impl Snapshot for OdeModel {
    const FUNCTIONAL: &'static str = "c_s";
    fn field(_: &ScalarState) -> Option<FieldState> {
        None
    }
}

impl Snapshot for PdeModel {
    const FUNCTIONAL: &'static str = "c_mid";
    fn field(state: &FieldState) -> Option<FieldState> {
        Some(state.clone())
    }
}

/// Runs the scenario with `threads` workers for the fine sweeps.
pub fn execute(sc: &Scenario, threads: usize) -> anyhow::Result<RunOutput> {
    sc.validate()?;
    let pool = ThreadPool::new(threads);
    match sc.model {
        ModelKind::Ode => {
            let model = OdeModel::new(sc.growth_params()?)?;
            execute_model(sc, &model, ScalarState::new(0.0), &pool)
        }
        ModelKind::Pde => {
            let model = PdeModel::new(sc.growth_params()?, sc.grid_obj()?)?;
            let init = model.initial_state();
            execute_model(sc, &model, init, &pool)
        }
    }
}

fn execute_model<M: Snapshot>(sc: &Scenario, model: &M, initial: M::State, pool: &ThreadPool) -> anyhow::Result<RunOutput> {
    let started = Instant::now();
    let micro = sc.micro_params();
    let ts = TwoScale::new(model, &micro, sc.periodicity())?;
    let schedule = sc.schedule_obj()?;
    let cost = sc.cost_params();
    let n = schedule.n_steps as u64;

    let (trajectory, ledger, serial_ledger, par) = match sc.mode.parareal_mode() {
        None => {
            let ledger = plaque_core::CostLedger::new(1);
            let tr = ts.run_serial(&schedule, &initial, MicroState::at_rest(), &ledger).context("serial run")?;
            let snap = ledger.snapshot();
            (tr, snap.clone(), snap, None)
        }
        Some(mode) => {
            let crit = StoppingCriterion { on: sc.stopping.on(), eps: sc.schedule.eps_par };
            let cfg = PararealConfig { max_iters: sc.schedule.max_iters, ..PararealConfig::new(schedule.processes, mode, crit) };
            let pr = Parareal::new(ts, &schedule, cfg, pool, initial, MicroState::at_rest())?;
            let r = pr.run().with_context(|| format!("{} run", mode.name()))?;
            let par = ParSummary {
                k_par: r.k_par,
                errors: r.per_iteration_errors,
                fine: r.fine_endpoint_errors,
                coarse: r.coarse_endpoint_errors,
                final_value: r.final_value,
                reference_value: r.reference_value,
                warm_start: r.warm_start,
            };
            (r.trajectory, r.ledger, r.reference_ledger, Some(par))
        }
    };

    let processes = ledger.per_process.len();
    let closed = par.as_ref().and_then(|p| closed_form(sc.mode, p.k_par as u64, processes as u64, n));
    let rd_closed = match (&par, sc.mode, M::REACTION_DIFFUSION) {
        (Some(p), RunMode::Reusage, true) if processes > 1 => costs::count_rd_reusage(p.k_par as u64, processes as u64, n).ok(),
        _ => None,
    };
    let mp = ledger.micro_serial_equivalent();
    let (speedup, efficiency) = costs::speedup_efficiency(mp.max(1), n, processes as u64)?;
    let rt = costs::runtime_breakdown(&ledger, &cost);
    let serial_rt = costs::estimate_parallel_runtime(&serial_ledger, &cost);
    let value = model.functional(&trajectory.final_state);

    let report = Report {
        schema: REPORT_SCHEMA.into(),
        scenario: sc.name.clone(),
        model: match sc.model {
            ModelKind::Ode => "ode".into(),
            ModelKind::Pde => "pde".into(),
        },
        mode: sc.mode.name().into(),
        processes,
        n_steps: schedule.n_steps,
        k_par: par.as_ref().map(|p| p.k_par),
        stopping: par.as_ref().map(|_| sc.stopping.name().into()),
        eps_par: par.as_ref().map(|_| sc.schedule.eps_par),
        functional: M::FUNCTIONAL.into(),
        per_iteration_errors: par.as_ref().map_or_else(Vec::new, |p| p.errors.clone()),
        fine_endpoint_errors: par.as_ref().map_or_else(Vec::new, |p| p.fine.clone()),
        coarse_endpoint_errors: par.as_ref().map_or_else(Vec::new, |p| p.coarse.clone()),
        final_value: par.as_ref().map_or(value, |p| p.final_value),
        reference_value: par.as_ref().map_or(value, |p| p.reference_value),
        micro_problems_fine: ledger.micro_fine(),
        micro_problems_coarse: ledger.micro_coarse(),
        micro_problems_total: mp,
        micro_problems_per_process: ledger.per_process_micro(),
        micro_problems_formula: closed,
        micro_time_steps: micro_steps(&ledger),
        rd_solves_fine: ledger.rd_fine(),
        rd_solves_coarse: ledger.rd_coarse(),
        rd_solves_formula: rd_closed,
        messages: ledger.messages,
        speedup,
        efficiency,
        estimated_runtime: RuntimeReport {
            master: rt.coarse,
            slaves_max: rt.fine_max(),
            total: rt.total(),
            serial: serial_rt,
            speedup: if rt.total() > 0.0 { serial_rt / rt.total() } else { 0.0 },
        },
        warm_start: par.as_ref().map(|p| p.warm_start.into()),
        metadata: Metadata {
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            threads: pool.threads(),
            version: env!("CARGO_PKG_VERSION").into(),
        },
    };
    let field = M::field(&trajectory.final_state);
    Ok(RunOutput { report, rows: trajectory.rows, field })
}

struct ParSummary {
    k_par: usize,
    errors: Vec<f64>,
    fine: Vec<f64>,
    coarse: Vec<f64>,
    final_value: f64,
    reference_value: f64,
    warm_start: &'static str,
}

/// Closed-form micro problem count for the mode; `None` for serial runs.
pub fn closed_form(mode: RunMode, k: u64, processes: u64, n_steps: u64) -> Option<u64> {
    if processes < 2 {
        return None;
    }
    match mode {
        RunMode::Serial => None,
        RunMode::Parareal => costs::count_standard(k, processes, n_steps).ok(),
        RunMode::Reusage => costs::count_reusage(k, processes, n_steps).ok(),
        RunMode::Heuristic => costs::count_heuristic(k, processes, n_steps).ok(),
    }
}

fn micro_steps(l: &LedgerSnapshot) -> u64 {
    l.coarse.micro_steps + l.per_process.iter().map(|c| c.micro_steps).sum::<u64>()
}
