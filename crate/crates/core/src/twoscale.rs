//! Serial two-scale driver: every macro step solves one micro problem,
//! warm-started from the flow state the previous step ended in, and advances
//! the growth model with the cycle-averaged rate.

use alloc::vec::Vec;

use crate::costs::{CostLedger, Level};
use crate::error::{config_error, Error, Result};
use crate::growth::GrowthModel;
use crate::microflow::{solve_micro_problem, solve_stationary_surrogate, GrowthSample, MicroParams, MicroState, Periodicity};

/// Macro time grid `t_n = n·δt`, `n = 0..N_l`, split into `P` parareal intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    /// End time, s.
    pub t_end: f64,
    pub n_steps: usize,
    pub processes: usize,
}

impl Schedule {
    pub fn new(t_end: f64, n_steps: usize, processes: usize) -> Result<Self> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::Domain { what: "T_end", value: t_end });
        }
        if n_steps == 0 {
            return Err(config_error("N_l must be at least 1"));
        }
        if processes == 0 {
            return Err(config_error("P must be at least 1"));
        }
        if processes > n_steps {
            return Err(config_error(alloc::format!("P = {processes} exceeds N_l = {n_steps}")));
        }
        Ok(Schedule { t_end, n_steps, processes })
    }

    /// Schedule from days; `t_end_days / dt_days` must be an integer.
    pub fn from_days(t_end_days: f64, dt_days: f64, processes: usize) -> Result<Self> {
        if !(dt_days > 0.0) {
            return Err(Error::Domain { what: "dt", value: dt_days });
        }
        let n = t_end_days / dt_days;
        let r = libm::round(n);
        if r < 1.0 || (r - n).abs() > 1e-9 * n {
            return Err(config_error(alloc::format!("dt = {dt_days} d does not divide T_end = {t_end_days} d")));
        }
        Schedule::new(t_end_days * crate::SECONDS_PER_DAY, r as usize, processes)
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    /// Fine steps per interval. The first `N_l mod P` intervals take one extra
    /// step, so no interval exceeds `⌈N_l/P⌉`.
    pub fn partition(&self) -> Vec<usize> {
        let base = self.n_steps / self.processes;
        let extra = self.n_steps % self.processes;
        (0..self.processes).map(|p| base + usize::from(p < extra)).collect()
    }

    /// Index of the fine step at which each interval starts, plus `N_l`.
    pub fn interval_offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.processes + 1);
        let mut acc = 0;
        out.push(0);
        for n in self.partition() {
            acc += n;
            out.push(acc);
        }
        out
    }

    pub fn with_processes(&self, processes: usize) -> Result<Self> {
        Schedule::new(self.t_end, self.n_steps, processes)
    }
}

/// How a coarse step obtains its growth rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoarseMode {
    /// One periodic micro problem.
    TwoScale,
    /// Stationary flow with the time-averaged inflow.
    Heuristic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    /// s.
    pub t: f64,
    /// `c_s`, or the interface midpoint value.
    pub value: f64,
    /// Interface mean (field model).
    pub mean: Option<f64>,
    /// Rate used for the step that ended here; `None` for the initial row.
    pub gamma_bar: Option<f64>,
    /// Narrowest channel width `2h`, cm.
    pub width: f64,
    pub cycles: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<M: GrowthModel> {
    /// `N + 1` rows including the initial state.
    pub rows: Vec<TrajectoryRow>,
    /// γ̄ of every step.
    pub rates: Vec<M::Rate>,
    pub final_state: M::State,
    pub final_micro: MicroState,
}

/// A two-scale propagator over one model.
#[derive(Debug)]
pub struct TwoScale<'a, M> {
    pub model: &'a M,
    pub micro: &'a MicroParams,
    pub periodicity: Periodicity,
}

impl<M> Clone for TwoScale<'_, M> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<M> Copy for TwoScale<'_, M> {}

impl<'a, M: GrowthModel> TwoScale<'a, M> {
    pub fn new(model: &'a M, micro: &'a MicroParams, periodicity: Periodicity) -> Result<Self> {
        micro.validate()?;
        periodicity.validate()?;
        Ok(TwoScale { model, micro, periodicity })
    }

    pub fn row(&self, state: &M::State, sample: Option<&GrowthSample<M::Rate>>) -> TrajectoryRow {
        TrajectoryRow {
            t: self.model.time(state),
            value: self.model.functional(state),
            mean: self.model.interface_mean(state),
            gamma_bar: sample.map(|s| self.model.rate_summary(&s.gamma_bar)),
            width: self.model.channel(state).width(),
            cycles: sample.map(|s| s.cycles_used),
        }
    }

    /// Growth update with a known rate; counted as a reaction-diffusion solve for the field model.
    pub fn advance(&self, state: &M::State, rate: &M::Rate, dt: f64, ledger: &CostLedger, level: Level) -> Result<M::State> {
        let next = self.model.advance(state, rate, dt)?;
        if M::REACTION_DIFFUSION {
            ledger.record_rd(level);
        }
        Ok(next)
    }

    /// Micro problem followed by a growth update of size `dt`.
    pub fn step(
        &self,
        state: &M::State,
        w: MicroState,
        dt: f64,
        ledger: &CostLedger,
        level: Level,
    ) -> Result<(M::State, MicroState, GrowthSample<M::Rate>)> {
        let (sample, w1) = solve_micro_problem(w, state, self.model, self.micro, &self.periodicity, ledger, level)?;
        let next = self.advance(state, &sample.gamma_bar, dt, ledger, level)?;
        Ok((next, w1, sample))
    }

    /// One coarse step of size `dt` on the coordinator. The heuristic mode
    /// leaves the flow state untouched.
    pub fn coarse_step(
        &self,
        state: &M::State,
        w: MicroState,
        dt: f64,
        mode: CoarseMode,
        ledger: &CostLedger,
    ) -> Result<(M::State, MicroState, GrowthSample<M::Rate>)> {
        match mode {
            CoarseMode::TwoScale => self.step(state, w, dt, ledger, Level::Coarse),
            CoarseMode::Heuristic => {
                let sample = solve_stationary_surrogate(state, self.model, self.micro)?;
                let next = self.advance(state, &sample.gamma_bar, dt, ledger, Level::Coarse)?;
                Ok((next, w, sample))
            }
        }
    }

    /// `n` steps of size `dt`.
    pub fn run_segment(
        &self,
        start: &M::State,
        w0: MicroState,
        n: usize,
        dt: f64,
        ledger: &CostLedger,
        level: Level,
    ) -> Result<Trajectory<M>> {
        let mut rows = Vec::with_capacity(n + 1);
        let mut rates = Vec::with_capacity(n);
        rows.push(self.row(start, None));
        let mut state = start.clone();
        let mut w = w0;
        for _ in 0..n {
            let (next, w1, sample) = self.step(&state, w, dt, ledger, level)?;
            rows.push(self.row(&next, Some(&sample)));
            rates.push(sample.gamma_bar);
            state = next;
            w = w1;
        }
        Ok(Trajectory { rows, rates, final_state: state, final_micro: w })
    }

    /// The full serial run, attributed to process 0.
    pub fn run_serial(&self, schedule: &Schedule, initial: &M::State, w0: MicroState, ledger: &CostLedger) -> Result<Trajectory<M>> {
        self.run_segment(initial, w0, schedule.n_steps, schedule.dt(), ledger, Level::Fine(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::{GrowthParams, OdeModel, ScalarState};
    use crate::SECONDS_PER_DAY;
    use proptest::prelude::*;

    fn ode(alpha: f64) -> OdeModel {
        OdeModel::new(GrowthParams { alpha, ..GrowthParams::ode_default() }).unwrap()
    }

    fn serial(model: &OdeModel, t_end_days: f64, dt_days: f64) -> (Trajectory<OdeModel>, CostLedger) {
        let micro = MicroParams::default();
        let ts = TwoScale::new(model, &micro, Periodicity::default()).unwrap();
        let sch = Schedule::from_days(t_end_days, dt_days, 1).unwrap();
        let ledger = CostLedger::new(1);
        let tr = ts.run_serial(&sch, &ScalarState::new(0.0), MicroState::at_rest(), &ledger).unwrap();
        (tr, ledger)
    }

    #[test]
    fn schedule_shapes() {
        let s = Schedule::from_days(300.0, 0.3, 30).unwrap();
        assert_eq!(s.n_steps, 1000);
        assert!((s.dt() - 0.3 * SECONDS_PER_DAY).abs() < 1e-9);
        let p = s.partition();
        assert_eq!(p.len(), 30);
        assert_eq!(p.iter().sum::<usize>(), 1000);
        assert_eq!(*p.iter().max().unwrap(), 34);
        assert_eq!(s.interval_offsets().last(), Some(&1000));
        assert!(Schedule::from_days(300.0, 0.7, 1).is_err());
        assert!(Schedule::from_days(300.0, 0.3, 2000).is_err());
        assert!(Schedule::new(1.0, 10, 0).is_err());
    }

    #[test]
    fn zero_growth_rate() {
        let (tr, ledger) = serial(&ode(0.0), 30.0, 0.3);
        assert!(tr.rows.iter().all(|r| r.value == 0.0));
        assert_eq!(ledger.snapshot().micro_fine(), 100);
    }

    #[test]
    fn serial_counts_and_shape() {
        let (tr, ledger) = serial(&ode(5e-7), 30.0, 0.3);
        assert_eq!(tr.rows.len(), 101);
        assert_eq!(tr.rates.len(), 100);
        assert_eq!(ledger.snapshot().micro_serial_equivalent(), 100);
        assert!(tr.rows.windows(2).all(|w| w[1].t > w[0].t));
        assert!(tr.rows.windows(2).all(|w| w[1].value >= w[0].value && w[1].width <= w[0].width));
        assert!(tr.rows[1..].iter().all(|r| matches!(r.cycles, Some(2..=3))));
    }

    #[test]
    fn serial_is_deterministic() {
        let m = ode(5e-7);
        assert_eq!(serial(&m, 30.0, 0.3).0, serial(&m, 30.0, 0.3).0);
    }

    #[test]
    fn coarser_steps_overestimate() {
        let m = ode(5e-7);
        let fine = serial(&m, 300.0, 0.3).0.final_state.c_s;
        let coarse = serial(&m, 300.0, 15.0).0.final_state.c_s;
        assert!(coarse >= fine, "{coarse} < {fine}");
    }

    #[test]
    fn coarse_step_modes() {
        let m = ode(5e-7);
        let micro = MicroParams::default();
        let ts = TwoScale::new(&m, &micro, Periodicity::default()).unwrap();
        let ledger = CostLedger::new(1);
        let s0 = ScalarState::new(0.1);
        let dt = 3.0 * SECONDS_PER_DAY;
        ts.coarse_step(&s0, MicroState::at_rest(), dt, CoarseMode::Heuristic, &ledger).unwrap();
        assert_eq!(ledger.snapshot().micro_coarse(), 0);
        let (c, w, _) = ts.coarse_step(&s0, MicroState::at_rest(), dt, CoarseMode::TwoScale, &ledger).unwrap();
        assert_eq!(ledger.snapshot().micro_coarse(), 1);
        // A coarse step with the fine step size is one serial step.
        let (f, wf, _) = ts.step(&s0, MicroState::at_rest(), dt, &CostLedger::new(1), Level::Fine(0)).unwrap();
        assert_eq!((c, w), (f, wf));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn concentration_monotone(alpha in 1e-8f64..1e-6, n in 2usize..20) {
            let m = ode(alpha);
            let micro = MicroParams::default();
            let ts = TwoScale::new(&m, &micro, Periodicity::default()).unwrap();
            let sch = Schedule::new(n as f64 * 0.5 * SECONDS_PER_DAY, n, 1).unwrap();
            let ledger = CostLedger::new(1);
            let tr = ts.run_serial(&sch, &ScalarState::new(0.0), MicroState::at_rest(), &ledger).unwrap();
            prop_assert!(tr.rows.windows(2).all(|w| w[1].value >= w[0].value));
            prop_assert_eq!(ledger.snapshot().micro_fine(), n as u64);
        }
    }
}
