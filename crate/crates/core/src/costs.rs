//! Cost accounting.
//!
//! The unit of cost is the *micro problem*: one periodic solve of the flow
//! problem at a frozen growth state. [`CostLedger`] counts them (and the
//! reaction-diffusion solves of the field model) per level while a run is in
//! progress; the `count_*` functions give the closed forms for a run that
//! needed `k` parareal iterations.
//!
//! Fine-level work is spread over `P` processes and is reported in the
//! "serial-equivalent" convention: the fine contribution is the work of the
//! busiest process, the coarse contribution is everything done by the
//! coordinator.

use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::math;

/// Where a unit of work is attributed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// Fine propagation on the given process (0-based).
    Fine(usize),
    /// Serial coarse propagation on the coordinator.
    Coarse,
}

/// Contention-safe counters. Integer increments commute, so the totals do not
/// depend on the order in which concurrent fine sweeps finish.
#[derive(Debug)]
pub struct CostLedger {
    per_process: Vec<ProcessCounters>,
    coarse: ProcessCounters,
    messages: AtomicU64,
}

#[derive(Debug, Default)]
struct ProcessCounters {
    micro: AtomicU64,
    micro_steps: AtomicU64,
    rd: AtomicU64,
}

impl ProcessCounters {
    fn snapshot(&self) -> Counts {
        Counts {
            micro: self.micro.load(Ordering::Relaxed),
            micro_steps: self.micro_steps.load(Ordering::Relaxed),
            rd: self.rd.load(Ordering::Relaxed),
        }
    }
}

impl CostLedger {
    pub fn new(processes: usize) -> Self {
        let processes = processes.max(1);
        CostLedger {
            per_process: (0..processes).map(|_| ProcessCounters::default()).collect(),
            coarse: ProcessCounters::default(),
            messages: AtomicU64::new(0),
        }
    }

    pub fn processes(&self) -> usize {
        self.per_process.len()
    }

    fn slot(&self, level: Level) -> &ProcessCounters {
        match level {
            Level::Coarse => &self.coarse,
            // Out-of-range process ids fold onto the last process.
            Level::Fine(p) => &self.per_process[p.min(self.per_process.len() - 1)],
        }
    }

    /// One micro problem that took `time_steps` micro time steps (cycles × N_s).
    pub fn record_micro(&self, level: Level, time_steps: u64) {
        let slot = self.slot(level);
        slot.micro.fetch_add(1, Ordering::Relaxed);
        slot.micro_steps.fetch_add(time_steps, Ordering::Relaxed);
    }

    pub fn record_rd(&self, level: Level) {
        self.slot(level).rd.fetch_add(1, Ordering::Relaxed);
    }

    pub fn record_messages(&self, n: u64) {
        self.messages.fetch_add(n, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        LedgerSnapshot {
            per_process: self.per_process.iter().map(ProcessCounters::snapshot).collect(),
            coarse: self.coarse.snapshot(),
            messages: self.messages.load(Ordering::Relaxed),
        }
    }
}

/// Work counted on one process.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub micro: u64,
    pub micro_steps: u64,
    pub rd: u64,
}

/// Plain copy of the ledger, taken after a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerSnapshot {
    pub per_process: Vec<Counts>,
    pub coarse: Counts,
    pub messages: u64,
}

impl LedgerSnapshot {
    pub fn micro_coarse(&self) -> u64 {
        self.coarse.micro
    }

    pub fn rd_coarse(&self) -> u64 {
        self.coarse.rd
    }

    /// Fine micro problems summed over all processes.
    pub fn micro_fine_total(&self) -> u64 {
        self.per_process.iter().map(|c| c.micro).sum()
    }

    pub fn rd_fine_total(&self) -> u64 {
        self.per_process.iter().map(|c| c.rd).sum()
    }

    /// Fine micro problems on the busiest process.
    pub fn micro_fine(&self) -> u64 {
        self.per_process.iter().map(|c| c.micro).max().unwrap_or(0)
    }

    /// Fine reaction-diffusion solves on the busiest process.
    pub fn rd_fine(&self) -> u64 {
        self.per_process.iter().map(|c| c.rd).max().unwrap_or(0)
    }

    /// Serial-equivalent micro problem count, the cost measure of the tables.
    pub fn micro_serial_equivalent(&self) -> u64 {
        self.micro_fine() + self.micro_coarse()
    }

    pub fn rd_serial_equivalent(&self) -> u64 {
        self.rd_fine() + self.rd_coarse()
    }

    pub fn per_process_micro(&self) -> Vec<u64> {
        self.per_process.iter().map(|c| c.micro).collect()
    }
}

/// Unit cost of one micro problem in the synthetic runtime model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MicroCost {
    /// Fixed cost per micro problem, seconds.
    PerProblem(f64),
    /// Cost per micro time step, so a problem costs `cycles · N_s · t`.
    PerTimeStep(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModelParams {
    pub micro: MicroCost,
    /// Seconds per reaction-diffusion solve.
    pub t_rd: f64,
}

impl Default for CostModelParams {
    fn default() -> Self {
        CostModelParams { micro: MicroCost::PerTimeStep(1.0), t_rd: 0.01 }
    }
}

impl CostModelParams {
    pub fn validate(&self) -> Result<()> {
        let t = match self.micro {
            MicroCost::PerProblem(t) | MicroCost::PerTimeStep(t) => t,
        };
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain { what: "micro unit cost", value: t });
        }
        if !(self.t_rd >= 0.0 && self.t_rd.is_finite()) {
            return Err(Error::Domain { what: "t_rd", value: self.t_rd });
        }
        Ok(())
    }

    /// The model assumes micro problems dominate; false when a single micro
    /// time step is not more expensive than a reaction-diffusion solve.
    pub fn micro_dominates(&self) -> bool {
        match self.micro {
            MicroCost::PerProblem(t) | MicroCost::PerTimeStep(t) => t > self.t_rd,
        }
    }

    fn time(&self, c: &Counts) -> f64 {
        let micro = match self.micro {
            MicroCost::PerProblem(t) => t * c.micro as f64,
            MicroCost::PerTimeStep(t) => t * c.micro_steps as f64,
        };
        micro + self.t_rd * c.rd as f64
    }
}

/// Synthetic runtime split into the coordinator's serial part and the
/// per-process parallel parts.
#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeEstimate {
    pub coarse: f64,
    pub fine_per_process: Vec<f64>,
}

impl RuntimeEstimate {
    pub fn fine_max(&self) -> f64 {
        self.fine_per_process.iter().copied().fold(0.0, f64::max)
    }

    pub fn fine_mean(&self) -> f64 {
        if self.fine_per_process.is_empty() {
            0.0
        } else {
            self.fine_per_process.iter().sum::<f64>() / self.fine_per_process.len() as f64
        }
    }

    pub fn total(&self) -> f64 {
        combine_runtime(self.coarse, &self.fine_per_process)
    }
}

pub fn runtime_breakdown(ledger: &LedgerSnapshot, params: &CostModelParams) -> RuntimeEstimate {
    RuntimeEstimate {
        coarse: params.time(&ledger.coarse),
        fine_per_process: ledger.per_process.iter().map(|c| params.time(c)).collect(),
    }
}

/// Estimated parallel runtime: serial coarse part plus the slowest process.
pub fn estimate_parallel_runtime(ledger: &LedgerSnapshot, params: &CostModelParams) -> f64 {
    runtime_breakdown(ledger, params).total()
}

/// `master + max(slaves)`; also used to recombine measured timings.
pub fn combine_runtime(master: f64, slaves: &[f64]) -> f64 {
    master + slaves.iter().copied().fold(0.0, f64::max)
}

fn check_counts(k: u64, processes: u64, n_steps: u64) -> Result<()> {
    if k < 1 {
        return Err(Error::Domain { what: "iterations k", value: k as f64 });
    }
    if processes < 1 || processes > n_steps {
        return Err(Error::Domain { what: "processes P", value: processes as f64 });
    }
    Ok(())
}

fn fine_per_process(processes: u64, n_steps: u64) -> u64 {
    math::ceil_div(n_steps as usize, processes as usize) as u64
}

/// Standard parareal: `k⌈N_l/P⌉ + (k+1)P`.
pub fn count_standard(k: u64, processes: u64, n_steps: u64) -> Result<u64> {
    check_counts(k, processes, n_steps)?;
    Ok(k * fine_per_process(processes, n_steps) + (k + 1) * processes)
}

/// Re-usage of growth values: `k⌈N_l/P⌉ + P`.
pub fn count_reusage(k: u64, processes: u64, n_steps: u64) -> Result<u64> {
    check_counts(k, processes, n_steps)?;
    Ok(k * fine_per_process(processes, n_steps) + processes)
}

/// Stationary (heuristic) coarse propagator: `k⌈N_l/P⌉`.
pub fn count_heuristic(k: u64, processes: u64, n_steps: u64) -> Result<u64> {
    check_counts(k, processes, n_steps)?;
    Ok(k * fine_per_process(processes, n_steps))
}

/// Reaction-diffusion solves of the re-usage variant: `k(N_l + ⌈N_l/P⌉) + P`.
pub fn count_rd_reusage(k: u64, processes: u64, n_steps: u64) -> Result<u64> {
    check_counts(k, processes, n_steps)?;
    Ok(k * (n_steps + fine_per_process(processes, n_steps)) + processes)
}

/// Upper bound `√N_l/2 + 1` on the ratio of reaction-diffusion solves in the
/// re-usage variant to micro problems in standard parareal.
pub fn rd_ratio_bound(n_steps: u64) -> f64 {
    math::sqrt(n_steps as f64) / 2.0 + 1.0
}

/// `N_l / count` and `speedup / P`.
pub fn speedup_efficiency(count: u64, n_steps: u64, processes: u64) -> Result<(f64, f64)> {
    if count == 0 {
        return Err(Error::Domain { what: "micro problem count", value: 0.0 });
    }
    if processes == 0 {
        return Err(Error::Domain { what: "processes P", value: 0.0 });
    }
    let speedup = n_steps as f64 / count as f64;
    Ok((speedup, speedup / processes as f64))
}

/// Which closed form to optimize in [`optimal_processes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostVariant {
    Standard,
    Reusage { k: u64 },
}

/// Process count minimizing the continuous cost model: `√N_l` for standard
/// parareal, `√(k N_l)` for the re-usage variant, rounded and clamped to `[1, N_l]`.
pub fn optimal_processes(n_steps: u64, variant: CostVariant) -> u64 {
    let target = match variant {
        CostVariant::Standard => math::sqrt(n_steps as f64),
        CostVariant::Reusage { k } => math::sqrt((k.max(1) * n_steps) as f64),
    };
    let rounded = libm::round(target) as u64;
    rounded.clamp(1, n_steps.max(1))
}
