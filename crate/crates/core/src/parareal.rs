//! Parareal on the macro scale.
//!
//! The time interval is split into `P` intervals `[T_p, T_{p+1}]`. The fine
//! propagator `ℱ` runs the two-scale scheme with step `δt` over one interval;
//! the coarse propagator `𝒞` takes one step over it. The iterates are
//!
//! ```text
//! c̄⁽ᵏ⁺¹⁾(T_{p+1}) = 𝒞(c̄⁽ᵏ⁺¹⁾(T_p)) + ℱ(c̄⁽ᵏ⁾(T_p)) − 𝒞(c̄⁽ᵏ⁾(T_p)).
//! ```
//!
//! Three variants:
//!
//! * [`Mode::Standard`]: `𝒞` is one two-scale step (one micro problem).
//! * [`Mode::HeuristicCoarse`]: `𝒞` uses the stationary flow surrogate and
//!   costs no micro problems.
//! * [`Mode::Reusage`]: the fine sweeps store their γ̄ values and the coarse
//!   pass re-runs the growth update over all fine steps with them, so no micro
//!   problem is solved outside the fine sweeps after initialization.
//!
//! Fine sweeps go through an [`Executor`]. All work is counted in a
//! [`CostLedger`] with integer counters, so results and counts do not depend
//! on the order in which sweeps finish.

use alloc::vec::Vec;

use crate::costs::{CostLedger, Level, LedgerSnapshot};
use crate::error::{config_error, Error, Result};
use crate::growth::GrowthModel;
use crate::microflow::MicroState;
use crate::twoscale::{CoarseMode, Schedule, Trajectory, TrajectoryRow, TwoScale};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Standard,
    Reusage,
    HeuristicCoarse,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Standard => "parareal",
            Mode::Reusage => "reusage",
            Mode::HeuristicCoarse => "heuristic",
        }
    }

    /// Where a fine sweep takes its initial flow state from.
    pub fn warm_start_policy(self) -> &'static str {
        match self {
            Mode::Standard | Mode::HeuristicCoarse => {
                "same-process: every sweep on interval p restarts from the flow state w(T_p) received at initialization"
            }
            Mode::Reusage => {
                "neighbour: the sweep on interval p starts from the flow state interval p-1 ended with in the previous sweep"
            }
        }
    }

    fn coarse_mode(self) -> CoarseMode {
        match self {
            Mode::HeuristicCoarse => CoarseMode::Heuristic,
            _ => CoarseMode::TwoScale,
        }
    }
}

/// Which end value is compared between consecutive iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopOn {
    /// `ℱ(c̄⁽ᵏ⁾(T_{P−1}))`, available from the second iteration on.
    FineEndpoint,
    /// `c̄⁽ᵏ⁾(T_P)`, compared from the first iteration on against the initial coarse sweep.
    CoarseEndpoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingCriterion {
    pub on: StopOn,
    pub eps: f64,
}

impl StoppingCriterion {
    pub fn validate(&self) -> Result<()> {
        crate::growth::positive("eps_par", self.eps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PararealConfig {
    pub processes: usize,
    pub mode: Mode,
    pub stopping: StoppingCriterion,
    pub max_iters: usize,
}

impl PararealConfig {
    pub fn new(processes: usize, mode: Mode, stopping: StoppingCriterion) -> Self {
        PararealConfig { processes, mode, stopping, max_iters: 20 }
    }
}

/// Runs independent jobs and returns their results in input order.
pub trait Executor: Sync {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(usize, T) -> R + Sync;
}

/// Runs jobs one after the other on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(usize, T) -> R + Sync,
    {
        items.into_iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
}

/// Iterate `k` of the algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct PararealState<M: GrowthModel> {
    pub k: usize,
    /// `c̄⁽ᵏ⁾(T_p)`, `p = 0..=P`.
    pub coarse: Vec<M::State>,
    /// `𝒞(c̄⁽ᵏ⁾(T_p))`, `p = 0..P`; empty in the re-usage variant.
    pub coarse_pred: Vec<M::State>,
    /// `ℱ(c̄⁽ᵏ⁻¹⁾(T_p))`; empty before the first sweep.
    pub fine: Vec<M::State>,
    /// Flow state each interval's next sweep starts from.
    pub warm: Vec<MicroState>,
    /// γ̄ of every fine step of the last sweep (re-usage only).
    pub rates: Vec<M::Rate>,
    /// The last sweep as one trajectory.
    pub sweep: Option<Trajectory<M>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PararealReport<M: GrowthModel> {
    pub mode: Mode,
    pub processes: usize,
    pub n_steps: usize,
    pub stopping: StoppingCriterion,
    pub k_par: usize,
    /// Endpoint error of the stopping functional per iteration, vs the serial run.
    pub per_iteration_errors: Vec<f64>,
    pub fine_endpoint_errors: Vec<f64>,
    pub coarse_endpoint_errors: Vec<f64>,
    /// Change tested against ε_par per iteration (`None` when not yet defined).
    pub changes: Vec<Option<f64>>,
    pub final_value: f64,
    pub reference_value: f64,
    pub ledger: LedgerSnapshot,
    /// The last fine sweep.
    pub trajectory: Trajectory<M>,
    pub reference: Trajectory<M>,
    pub reference_ledger: LedgerSnapshot,
    pub warm_start: &'static str,
}

pub struct Parareal<'a, M: GrowthModel, E: Executor> {
    pub two_scale: TwoScale<'a, M>,
    pub schedule: Schedule,
    pub config: PararealConfig,
    pub ledger: CostLedger,
    executor: &'a E,
    initial: M::State,
    w0: MicroState,
    lengths: Vec<usize>,
    offsets: Vec<usize>,
}

impl<'a, M: GrowthModel, E: Executor> Parareal<'a, M, E> {
    pub fn new(
        two_scale: TwoScale<'a, M>,
        schedule: &Schedule,
        config: PararealConfig,
        executor: &'a E,
        initial: M::State,
        w0: MicroState,
    ) -> Result<Self> {
        config.stopping.validate()?;
        if config.max_iters == 0 {
            return Err(config_error("max_iters must be at least 1"));
        }
        let schedule = schedule.with_processes(config.processes)?;
        Ok(Parareal {
            two_scale,
            schedule,
            config,
            ledger: CostLedger::new(config.processes),
            executor,
            initial,
            w0,
            lengths: schedule.partition(),
            offsets: schedule.interval_offsets(),
        })
    }

    fn processes(&self) -> usize {
        self.config.processes
    }

    fn interval_dt(&self, p: usize) -> f64 {
        self.lengths[p] as f64 * self.schedule.dt()
    }

    /// One coarse sweep from `c(T_0)`.
    pub fn initialize(&self) -> Result<PararealState<M>> {
        let n = self.processes();
        let mode = self.config.mode.coarse_mode();
        let mut coarse = Vec::with_capacity(n + 1);
        let mut coarse_pred = Vec::with_capacity(n);
        let mut warm = Vec::with_capacity(n);
        coarse.push(self.initial.clone());
        let mut w = self.w0;
        for p in 0..n {
            warm.push(w);
            let (c, w1, _) = self.two_scale.coarse_step(&coarse[p], w, self.interval_dt(p), mode, &self.ledger)?;
            coarse_pred.push(c.clone());
            coarse.push(c);
            w = w1;
        }
        self.ledger.record_messages(n as u64);
        if self.config.mode == Mode::Reusage {
            coarse_pred.clear();
        }
        Ok(PararealState { k: 0, coarse, coarse_pred, fine: Vec::new(), warm, rates: Vec::new(), sweep: None })
    }

    /// Concurrent fine sweeps over all intervals from the current coarse values.
    fn fine_sweeps(&self, state: &PararealState<M>) -> Result<Vec<Trajectory<M>>> {
        let items: Vec<(M::State, MicroState, usize)> =
            (0..self.processes()).map(|p| (state.coarse[p].clone(), state.warm[p], self.lengths[p])).collect();
        let dt = self.schedule.dt();
        let ts = &self.two_scale;
        let ledger = &self.ledger;
        let results = self
            .executor
            .map(items, |p, (start, w, n)| ts.run_segment(&start, w, n, dt, ledger, Level::Fine(p)));
        results.into_iter().collect()
    }

    fn join(segments: &[Trajectory<M>]) -> Trajectory<M> {
        let mut rows: Vec<TrajectoryRow> = Vec::new();
        let mut rates = Vec::new();
        for (p, seg) in segments.iter().enumerate() {
            let skip = usize::from(p > 0);
            rows.extend(seg.rows.iter().skip(skip).cloned());
            rates.extend(seg.rates.iter().cloned());
        }
        let last = segments.last().expect("at least one interval");
        Trajectory { rows, rates, final_state: last.final_state.clone(), final_micro: last.final_micro }
    }

    /// Fine sweeps, then the sequential predictor-corrector pass.
    pub fn iterate_standard(&self, state: PararealState<M>) -> Result<PararealState<M>> {
        let n = self.processes();
        let mode = self.config.mode.coarse_mode();
        let segments = self.fine_sweeps(&state)?;
        let fine: Vec<M::State> = segments.iter().map(|s| s.final_state.clone()).collect();
        self.ledger.record_messages(n as u64);

        let mut coarse = Vec::with_capacity(n + 1);
        let mut coarse_pred = Vec::with_capacity(n);
        coarse.push(self.initial.clone());
        let mut w = self.w0;
        for p in 0..n {
            let (pred, w1, _) = self.two_scale.coarse_step(&coarse[p], w, self.interval_dt(p), mode, &self.ledger)?;
            coarse.push(self.two_scale.model.correct(&pred, &fine[p], &state.coarse_pred[p]));
            coarse_pred.push(pred);
            w = w1;
        }
        self.ledger.record_messages(n as u64);
        Ok(PararealState {
            k: state.k + 1,
            coarse,
            coarse_pred,
            fine,
            warm: state.warm,
            rates: Vec::new(),
            sweep: Some(Self::join(&segments)),
        })
    }

    /// Fine sweeps storing γ̄, then a coarse pass over the fine grid driven by
    /// the stored values. No micro problems are solved by the coordinator.
    pub fn iterate_reusage(&self, state: PararealState<M>) -> Result<PararealState<M>> {
        let n = self.processes();
        let segments = self.fine_sweeps(&state)?;
        let fine: Vec<M::State> = segments.iter().map(|s| s.final_state.clone()).collect();
        let mut warm = Vec::with_capacity(n);
        warm.push(self.w0);
        warm.extend(segments[..n - 1].iter().map(|s| s.final_micro));
        let sweep = Self::join(&segments);
        // Flow states to neighbours, γ̄ batches to the coordinator.
        self.ledger.record_messages(2 * n as u64);

        let dt = self.schedule.dt();
        let mut coarse = Vec::with_capacity(n + 1);
        let mut c = self.initial.clone();
        coarse.push(c.clone());
        for p in 0..n {
            for j in self.offsets[p]..self.offsets[p + 1] {
                c = self.two_scale.advance(&c, &sweep.rates[j], dt, &self.ledger, Level::Coarse)?;
            }
            coarse.push(c.clone());
        }
        self.ledger.record_messages(n as u64);
        Ok(PararealState {
            k: state.k + 1,
            coarse,
            coarse_pred: Vec::new(),
            fine,
            warm,
            rates: sweep.rates.clone(),
            sweep: Some(sweep),
        })
    }

    pub fn iterate(&self, state: PararealState<M>) -> Result<PararealState<M>> {
        match self.config.mode {
            Mode::Reusage => self.iterate_reusage(state),
            Mode::Standard | Mode::HeuristicCoarse => self.iterate_standard(state),
        }
    }

    /// Serial two-scale run with its own ledger.
    pub fn reference(&self) -> Result<(Trajectory<M>, LedgerSnapshot)> {
        let ledger = CostLedger::new(1);
        let tr = self.two_scale.run_serial(&self.schedule, &self.initial, self.w0, &ledger)?;
        Ok((tr, ledger.snapshot()))
    }

    /// Iterates until the stopping criterion holds. `P = 1` is the serial run.
    pub fn run(&self) -> Result<PararealReport<M>> {
        let (reference, reference_ledger) = self.reference()?;
        let model = self.two_scale.model;
        let reference_value = model.functional(&reference.final_state);
        let crit = self.config.stopping;

        if self.processes() == 1 {
            let tr = self.two_scale.run_serial(&self.schedule, &self.initial, self.w0, &self.ledger)?;
            let value = model.functional(&tr.final_state);
            let err = (value - reference_value).abs();
            return Ok(PararealReport {
                mode: self.config.mode,
                processes: 1,
                n_steps: self.schedule.n_steps,
                stopping: crit,
                k_par: 1,
                per_iteration_errors: alloc::vec![err],
                fine_endpoint_errors: alloc::vec![err],
                coarse_endpoint_errors: alloc::vec![err],
                changes: alloc::vec![None],
                final_value: value,
                reference_value,
                ledger: self.ledger.snapshot(),
                trajectory: tr,
                reference,
                reference_ledger,
                warm_start: self.config.mode.warm_start_policy(),
            });
        }

        let mut state = self.initialize()?;
        let mut prev_coarse = model.functional(&state.coarse[self.processes()]);
        let mut prev_fine: Option<f64> = None;
        let mut fine_errors = Vec::new();
        let mut coarse_errors = Vec::new();
        let mut changes = Vec::new();
        loop {
            state = self.iterate(state)?;
            let fine_end = model.functional(state.fine.last().expect("fine sweep ran"));
            let coarse_end = model.functional(&state.coarse[self.processes()]);
            fine_errors.push((fine_end - reference_value).abs());
            coarse_errors.push((coarse_end - reference_value).abs());
            let change = match crit.on {
                StopOn::FineEndpoint => prev_fine.map(|f| (fine_end - f).abs()),
                StopOn::CoarseEndpoint => Some((coarse_end - prev_coarse).abs()),
            };
            changes.push(change);
            prev_fine = Some(fine_end);
            prev_coarse = coarse_end;
            if change.is_some_and(|c| c < crit.eps) {
                break;
            }
            if state.k >= self.config.max_iters {
                return Err(Error::PararealNotConverged {
                    iterations: state.k,
                    change: change.unwrap_or(f64::INFINITY),
                });
            }
        }

        let (per_iteration_errors, final_value) = match crit.on {
            StopOn::FineEndpoint => (fine_errors.clone(), prev_fine.unwrap_or(f64::NAN)),
            StopOn::CoarseEndpoint => (coarse_errors.clone(), prev_coarse),
        };
        Ok(PararealReport {
            mode: self.config.mode,
            processes: self.processes(),
            n_steps: self.schedule.n_steps,
            stopping: crit,
            k_par: state.k,
            per_iteration_errors,
            fine_endpoint_errors: fine_errors,
            coarse_endpoint_errors: coarse_errors,
            changes,
            final_value,
            reference_value,
            ledger: self.ledger.snapshot(),
            trajectory: state.sweep.expect("at least one iteration"),
            reference,
            reference_ledger,
            warm_start: self.config.mode.warm_start_policy(),
        })
    }
}
