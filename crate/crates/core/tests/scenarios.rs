use plaque_core::costs::{self, CostLedger};
use plaque_core::growth::field::interface_midpoint;
use plaque_core::growth::ReactionSign;
use plaque_core::parareal::Parareal;
use plaque_core::*;

/// Runs jobs on scoped threads in reverse start order to shake out order dependence.
struct Reversed;

impl Executor for Reversed {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(usize, T) -> R + Sync,
    {
        let n = items.len();
        let f = &f;
        std::thread::scope(|s| {
            let handles: Vec<_> = items.into_iter().enumerate().map(|(i, t)| s.spawn(move || f(i, t))).rev().collect();
            let mut out: Vec<R> = handles.into_iter().map(|h| h.join().unwrap()).collect();
            out.reverse();
            assert_eq!(out.len(), n);
            out
        })
    }
}

fn ode_model() -> OdeModel {
    OdeModel::new(GrowthParams::ode_default()).unwrap()
}

#[test]
fn ode_reference_run() {
    let model = ode_model();
    let micro = MicroParams::default();
    let ts = TwoScale::new(&model, &micro, Periodicity::default()).unwrap();
    let sch = Schedule::from_days(300.0, 0.3, 1).unwrap();
    let ledger = CostLedger::new(1);
    let tr = ts.run_serial(&sch, &ScalarState::new(0.0), MicroState::at_rest(), &ledger).unwrap();
    assert_eq!(ledger.snapshot().micro_serial_equivalent(), 1000);
    assert_eq!(tr.rows.len(), 1001);
    let c = tr.final_state.c_s;
    assert!(c > 0.8 && c < 0.9, "{c}");
    assert!(tr.rows[1..].iter().all(|r| matches!(r.cycles, Some(2..=3))));
}

#[test]
fn large_coarse_step_closes_channel() {
    let model = ode_model();
    let micro = MicroParams::default();
    let ts = TwoScale::new(&model, &micro, Periodicity::default()).unwrap();
    let sch = Schedule::from_days(300.0, 30.0, 1).unwrap();
    let r = ts.run_serial(&sch, &ScalarState::new(0.0), MicroState::at_rest(), &CostLedger::new(1));
    assert!(matches!(r, Err(Error::ChannelClosure { .. })));
}

#[test]
fn fine_sweep_order_does_not_matter() {
    let model = ode_model();
    let micro = MicroParams::default();
    let ts = TwoScale::new(&model, &micro, Periodicity::default()).unwrap();
    let sch = Schedule::from_days(30.0, 0.3, 1).unwrap();
    for mode in [Mode::Standard, Mode::Reusage, Mode::HeuristicCoarse] {
        let cfg = PararealConfig::new(10, mode, StoppingCriterion { on: StopOn::FineEndpoint, eps: 1e-3 });
        let a = Parareal::new(ts, &sch, cfg, &Sequential, ScalarState::new(0.0), MicroState::at_rest()).unwrap().run().unwrap();
        let b = Parareal::new(ts, &sch, cfg, &Reversed, ScalarState::new(0.0), MicroState::at_rest()).unwrap().run().unwrap();
        assert_eq!(a, b, "{mode:?}");
    }
}

fn small_pde() -> PdeModel {
    PdeModel::new(GrowthParams::pde_default(), Grid::new(21, 6).unwrap()).unwrap()
}

#[test]
fn pde_parareal_finite_termination() {
    let model = small_pde();
    let micro = MicroParams { inflow_offset: 1.0, ..Default::default() };
    let ts = TwoScale::new(&model, &micro, Periodicity { eps_p: 1e-13, max_cycles: 10 }).unwrap();
    let sch = Schedule::from_days(16.0, 1.0, 1).unwrap();
    for mode in [Mode::Standard, Mode::Reusage] {
        let cfg = PararealConfig::new(4, mode, StoppingCriterion { on: StopOn::FineEndpoint, eps: 1e-14 });
        let pr = Parareal::new(ts, &sch, cfg, &Sequential, model.initial_state(), MicroState::at_rest()).unwrap();
        let (reference, _) = pr.reference().unwrap();
        let offsets = pr.schedule.interval_offsets();
        let mut st = pr.initialize().unwrap();
        for _ in 0..4 {
            st = pr.iterate(st).unwrap();
        }
        for p in 1..=4 {
            let got = interface_midpoint(&st.coarse[p]).unwrap();
            let want = reference.rows[offsets[p]].value;
            assert!((got - want).abs() <= 1e-12, "{mode:?} p={p}: {got} vs {want}");
        }
    }
}

#[test]
fn pde_reusage_rd_counts() {
    let model = small_pde();
    let micro = MicroParams { inflow_offset: 1.0, ..Default::default() };
    let ts = TwoScale::new(&model, &micro, Periodicity::default()).unwrap();
    let sch = Schedule::from_days(20.0, 0.2, 1).unwrap();
    for p in [5usize, 10] {
        let cfg = PararealConfig::new(p, Mode::Reusage, StoppingCriterion { on: StopOn::FineEndpoint, eps: 1e-4 });
        let r = Parareal::new(ts, &sch, cfg, &Sequential, model.initial_state(), MicroState::at_rest()).unwrap().run().unwrap();
        let k = r.k_par as u64;
        // The coarse sweep of the initialization is a reaction-diffusion solve per interval.
        assert_eq!(r.ledger.rd_serial_equivalent(), costs::count_rd_reusage(k, p as u64, 100).unwrap());
        assert_eq!(r.ledger.micro_serial_equivalent(), costs::count_reusage(k, p as u64, 100).unwrap());
        // Standard parareal driven for the same number of iterations.
        let std_cfg = PararealConfig { mode: Mode::Standard, ..cfg };
        let sp = Parareal::new(ts, &sch, std_cfg, &Sequential, model.initial_state(), MicroState::at_rest()).unwrap();
        let mut st = sp.initialize().unwrap();
        for _ in 0..r.k_par {
            st = sp.iterate(st).unwrap();
        }
        let micro_standard = sp.ledger.snapshot().micro_serial_equivalent();
        assert_eq!(micro_standard, costs::count_standard(k, p as u64, 100).unwrap());
        let ratio = r.ledger.rd_serial_equivalent() as f64 / micro_standard as f64;
        assert!(ratio <= costs::rd_ratio_bound(100), "{ratio}");
    }
}

#[test]
fn pde_growth_is_symmetric_and_nonnegative() {
    let model = PdeModel::new(GrowthParams::pde_default(), Grid::default()).unwrap();
    let micro = MicroParams { inflow_offset: 1.0, ..Default::default() };
    let ts = TwoScale::new(&model, &micro, Periodicity::default()).unwrap();
    let sch = Schedule::from_days(20.0, 0.2, 1).unwrap();
    let tr = ts.run_serial(&sch, &model.initial_state(), MicroState::at_rest(), &CostLedger::new(1)).unwrap();
    assert!(tr.final_state.field.asymmetry() <= 1e-12);
    assert!(tr.final_state.field.min() >= -1e-12);
    assert!(tr.rows.windows(2).all(|w| w[1].value >= w[0].value));
}

#[test]
fn consumption_sign_runs() {
    let p = GrowthParams { reaction_sign: ReactionSign::Consumption, ..GrowthParams::pde_default() };
    let model = PdeModel::new(p, Grid::new(21, 6).unwrap()).unwrap();
    let micro = MicroParams { inflow_offset: 1.0, ..Default::default() };
    let ts = TwoScale::new(&model, &micro, Periodicity::default()).unwrap();
    let sch = Schedule::from_days(10.0, 0.5, 1).unwrap();
    let tr = ts.run_serial(&sch, &model.initial_state(), MicroState::at_rest(), &CostLedger::new(1)).unwrap();
    assert!(tr.final_state.field.min() >= -1e-12);
}

#[test]
fn reusage_unstable_on_long_saturating_run() {
    // Over 300 days the surrogate saturates; stale shear factors then swing
    // the re-usage coarse chain past closure. Standard parareal converges.
    let model = ode_model();
    let micro = MicroParams::default();
    let ts = TwoScale::new(&model, &micro, Periodicity::default()).unwrap();
    let sch = Schedule::from_days(300.0, 0.3, 1).unwrap();
    let crit = StoppingCriterion { on: StopOn::FineEndpoint, eps: 1e-3 };
    let run = |mode| Parareal::new(ts, &sch, PararealConfig::new(40, mode, crit), &Sequential, ScalarState::new(0.0), MicroState::at_rest()).unwrap().run();
    assert!(matches!(run(Mode::Reusage), Err(Error::ChannelClosure { .. })));
    assert_eq!(run(Mode::Standard).unwrap().k_par, 3);
}
