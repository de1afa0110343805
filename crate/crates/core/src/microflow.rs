//! Heartbeat-scale surrogate flow.
//!
//! The flow state at a cycle boundary is collapsed to a single amplitude `q`
//! that relaxes towards the pulsating inflow,
//!
//! ```text
//! dq/dτ = −λ (q − V(τ)),    V(τ) = A (offset + sin²(πτ/period)),
//! ```
//!
//! and the wall shear stress is a quasi-Poiseuille wall gradient
//! `c_geo · 2ρν q / h²`. A micro problem cycles this flow until the
//! cycle-averaged growth rate stops changing.

use alloc::vec::Vec;

use crate::costs::{CostLedger, Level};
use crate::error::{Error, Result};
use crate::growth::{positive, GrowthModel};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroParams {
    /// Fluid density, g/cm³.
    pub rho_f: f64,
    /// Kinematic viscosity, cm²/s.
    pub nu_f: f64,
    /// Relaxation rate of the surrogate, 1/s.
    pub lambda_relax: f64,
    pub c_geo: f64,
    /// cm/s.
    pub inflow_amplitude: f64,
    /// 0 or 1.
    pub inflow_offset: f64,
    /// Micro step, s.
    pub delta_tau: f64,
    /// Heartbeat period, s.
    pub period: f64,
    /// Smallest admissible half-width, cm.
    pub h_min: f64,
}

impl Default for MicroParams {
    fn default() -> Self {
        MicroParams {
            rho_f: 1.0,
            nu_f: 0.04,
            lambda_relax: 9.0,
            c_geo: 12.5,
            inflow_amplitude: 30.0,
            inflow_offset: 0.0,
            delta_tau: 0.02,
            period: 1.0,
            h_min: 0.05,
        }
    }
}

impl MicroParams {
    pub fn validate(&self) -> Result<()> {
        positive("rho_f", self.rho_f)?;
        positive("nu_f", self.nu_f)?;
        positive("lambda_relax", self.lambda_relax)?;
        positive("c_geo", self.c_geo)?;
        positive("inflow_amplitude", self.inflow_amplitude)?;
        positive("delta_tau", self.delta_tau)?;
        positive("period", self.period)?;
        positive("h_min", self.h_min)?;
        if self.inflow_offset != 0.0 && self.inflow_offset != 1.0 {
            return Err(Error::Domain { what: "inflow_offset", value: self.inflow_offset });
        }
        self.steps_per_cycle().map(|_| ())
    }

    /// `N_s = period / δτ`, required to be an integer.
    pub fn steps_per_cycle(&self) -> Result<usize> {
        let n = self.period / self.delta_tau;
        let r = libm::round(n);
        if r < 1.0 || (r - n).abs() > 1e-9 * n.max(1.0) {
            return Err(Error::Domain { what: "delta_tau (must divide the period)", value: self.delta_tau });
        }
        Ok(r as usize)
    }

    /// Time average of the inflow over one period.
    pub fn mean_inflow(&self) -> f64 {
        self.inflow_amplitude * (self.inflow_offset + 0.5)
    }

    /// `c_geo · 2ρν`: WSS per unit flow at unit half-width.
    fn wss_factor(&self) -> f64 {
        self.c_geo * 2.0 * self.rho_f * self.nu_f
    }
}

/// Flow amplitude at a cycle boundary, cm/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroState {
    pub q: f64,
}

impl MicroState {
    pub fn new(q: f64) -> Result<Self> {
        if q >= 0.0 && q.is_finite() {
            Ok(MicroState { q })
        } else {
            Err(Error::Domain { what: "flow amplitude q", value: q })
        }
    }

    pub fn at_rest() -> Self {
        MicroState { q: 0.0 }
    }
}

/// Lumen half-width seen by the flow.
#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    Uniform(f64),
    /// One half-width per interface node.
    Profile(Vec<f64>),
}

impl Channel {
    pub fn min_half_width(&self) -> f64 {
        match self {
            Channel::Uniform(h) => *h,
            Channel::Profile(hs) => hs.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    /// Narrowest width `2h`.
    pub fn width(&self) -> f64 {
        2.0 * self.min_half_width()
    }

    pub fn nodes(&self) -> usize {
        match self {
            Channel::Uniform(_) => 1,
            Channel::Profile(hs) => hs.len(),
        }
    }

    fn half_widths(&self) -> &[f64] {
        match self {
            Channel::Uniform(h) => core::slice::from_ref(h),
            Channel::Profile(hs) => hs,
        }
    }

    fn check_open(&self, h_min: f64) -> Result<()> {
        let h = self.min_half_width();
        // NaN counts as closed.
        if h > h_min {
            Ok(())
        } else {
            Err(Error::ChannelClosure { half_width: h, min: h_min })
        }
    }
}

/// WSS samples of one cycle, `samples × nodes`, row-major by sample.
#[derive(Debug, Clone, PartialEq)]
pub struct WssSeries {
    nodes: usize,
    values: Vec<f64>,
}

impl WssSeries {
    pub fn new(nodes: usize, values: Vec<f64>) -> Self {
        assert!(nodes > 0 && values.len() % nodes == 0, "WSS series shape");
        WssSeries { nodes, values }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn samples(&self) -> usize {
        self.values.len() / self.nodes
    }

    pub fn sample(&self, m: usize) -> &[f64] {
        &self.values[m * self.nodes..(m + 1) * self.nodes]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.nodes)
    }
}

/// Cycle-averaged growth value and the number of cycles spent on it.
/// `cycles_used` is 0 for the stationary surrogate.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSample<R> {
    pub gamma_bar: R,
    pub cycles_used: usize,
}

/// Stopping rule of the cycle loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Periodicity {
    /// Tolerance on the change of γ̄/α between consecutive cycles.
    pub eps_p: f64,
    pub max_cycles: usize,
}

impl Default for Periodicity {
    fn default() -> Self {
        Periodicity { eps_p: 1e-3, max_cycles: 10 }
    }
}

impl Periodicity {
    pub fn validate(&self) -> Result<()> {
        positive("eps_p", self.eps_p)?;
        if self.max_cycles < 2 {
            return Err(Error::Domain { what: "max_cycles", value: self.max_cycles as f64 });
        }
        Ok(())
    }
}

pub fn inflow_velocity(tau: f64, params: &MicroParams) -> f64 {
    let s = math::sin(core::f64::consts::PI * tau / params.period);
    params.inflow_amplitude * (params.inflow_offset + s * s)
}

pub fn wall_shear_stress(q: f64, h_local: f64, params: &MicroParams) -> f64 {
    params.wss_factor() * q / (h_local * h_local)
}

/// One heartbeat.
///
/// The relaxation is integrated exactly over each micro step with the inflow
/// frozen at the left end, `q ← V + (q − V) e^{−λδτ}`, so a full cycle
/// contracts deviations from the periodic orbit by exactly `e^{−λ·period}`.
/// WSS sample `m` is taken at the end of step `m`.
pub fn advance_cycle(w0: MicroState, channel: &Channel, params: &MicroParams) -> Result<(MicroState, WssSeries)> {
    channel.check_open(params.h_min)?;
    let n_s = params.steps_per_cycle()?;
    let decay = math::exp(-params.lambda_relax * params.delta_tau);
    let hs = channel.half_widths();
    let factor = params.wss_factor();
    let inv_h2: Vec<f64> = hs.iter().map(|h| 1.0 / (h * h)).collect();

    let mut values = Vec::with_capacity(n_s * hs.len());
    let mut q = w0.q;
    for m in 0..n_s {
        let v = inflow_velocity(m as f64 * params.delta_tau, params);
        q = v + (q - v) * decay;
        values.extend(inv_h2.iter().map(|s| factor * q * s));
    }
    Ok((MicroState { q }, WssSeries::new(hs.len(), values)))
}

/// Cycles the flow at a frozen growth state until γ̄ settles.
///
/// At least two cycles are run since the test compares consecutive averages.
/// Counts one micro problem (of `cycles · N_s` micro steps) at `level`.
pub fn solve_micro_problem<M: GrowthModel>(
    w0: MicroState,
    state: &M::State,
    model: &M,
    params: &MicroParams,
    periodicity: &Periodicity,
    ledger: &CostLedger,
    level: Level,
) -> Result<(GrowthSample<M::Rate>, MicroState)> {
    let channel = model.channel(state);
    let n_s = params.steps_per_cycle()?;
    let mut w = w0;
    let mut prev: Option<M::Rate> = None;
    let mut change = f64::INFINITY;
    for cycle in 1..=periodicity.max_cycles {
        let (end, wss) = advance_cycle(w, &channel, params)?;
        w = end;
        let gamma = model.cycle_average(&wss, state);
        if let Some(p) = &prev {
            change = model.rate_change(&gamma, p);
            if change < periodicity.eps_p {
                ledger.record_micro(level, (cycle * n_s) as u64);
                return Ok((GrowthSample { gamma_bar: gamma, cycles_used: cycle }, w));
            }
        }
        prev = Some(gamma);
    }
    Err(Error::MicroNotPeriodic { cycles: periodicity.max_cycles, change })
}

/// Steady flow driven by the time-averaged inflow. Not counted as a micro problem.
pub fn solve_stationary_surrogate<M: GrowthModel>(
    state: &M::State,
    model: &M,
    params: &MicroParams,
) -> Result<GrowthSample<M::Rate>> {
    let channel = model.channel(state);
    channel.check_open(params.h_min)?;
    let q = params.mean_inflow();
    let wss: Vec<f64> = channel.half_widths().iter().map(|&h| wall_shear_stress(q, h, params)).collect();
    Ok(GrowthSample { gamma_bar: model.rate_at(&wss, state), cycles_used: 0 })
}

#[cfg(test)]
#[allow(clippy::approx_constant)] // 6.28 is a perturbation size, not 2π
mod tests {
    use super::*;
    use crate::growth::{GrowthParams, OdeModel, ScalarState};
    use core::f64::consts::PI;
    use proptest::prelude::*;

    /// Periodic orbit of the continuous relaxation with V = 15(1 − cos 2πτ).
    fn q_periodic(tau: f64, lambda: f64) -> f64 {
        let w = 2.0 * PI;
        15.0 - 15.0 * lambda * (lambda * (w * tau).cos() + w * (w * tau).sin()) / (lambda * lambda + w * w)
    }

    fn ode() -> OdeModel {
        OdeModel::new(GrowthParams::ode_default()).unwrap()
    }

    #[test]
    fn inflow_examples() {
        let p = MicroParams::default();
        assert_eq!(inflow_velocity(0.0, &p), 0.0);
        assert!((inflow_velocity(0.5, &p) - 30.0).abs() < 1e-12);
        let p1 = MicroParams { inflow_offset: 1.0, ..p };
        assert!((inflow_velocity(0.5, &p1) - 60.0).abs() < 1e-12);
        assert!((inflow_velocity(1.3, &p) - inflow_velocity(0.3, &p)).abs() < 1e-12);
    }

    #[test]
    fn wss_examples() {
        let p = MicroParams::default();
        assert_eq!(wall_shear_stress(0.0, 1.0, &p), 0.0);
        assert!((wall_shear_stress(30.0, 1.0, &p) - 30.0).abs() < 1e-12);
        assert!((wall_shear_stress(30.0, 0.5, &p) - 120.0).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(MicroParams::default().validate().is_ok());
        assert!(MicroParams { delta_tau: 0.03, ..Default::default() }.validate().is_err());
        assert!(MicroParams { inflow_offset: 0.5, ..Default::default() }.validate().is_err());
        assert!(MicroParams { lambda_relax: 0.0, ..Default::default() }.validate().is_err());
        assert_eq!(MicroParams::default().steps_per_cycle().unwrap(), 50);
        assert!(Periodicity { eps_p: 1e-3, max_cycles: 1 }.validate().is_err());
        assert!(MicroState::new(-1.0).is_err());
    }

    #[test]
    fn orbit_start_returns_after_one_cycle() {
        let p = MicroParams::default();
        let q0 = q_periodic(0.0, 9.0);
        let (w1, wss) = advance_cycle(MicroState { q: q0 }, &Channel::Uniform(1.0), &p).unwrap();
        assert_eq!(wss.samples(), 50);
        // The discrete orbit lags the continuous one by O(δτ).
        let e1 = (w1.q - q0).abs();
        assert!(e1 < 30.0 * p.delta_tau, "{e1}");
        let p2 = MicroParams { delta_tau: 0.01, ..p };
        let (w2, _) = advance_cycle(MicroState { q: q0 }, &Channel::Uniform(1.0), &p2).unwrap();
        let ratio = e1 / (w2.q - q0).abs();
        assert!((ratio - 2.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn perturbation_decays_by_e_minus_lambda() {
        let p = MicroParams::default();
        let ch = Channel::Uniform(1.0);
        // Discrete periodic orbit start: iterate to the fixed point.
        let mut w = MicroState { q: q_periodic(0.0, 9.0) };
        for _ in 0..10 {
            w = advance_cycle(w, &ch, &p).unwrap().0;
        }
        let (w1, _) = advance_cycle(MicroState { q: w.q + 6.28 }, &ch, &p).unwrap();
        let dev = (w1.q - w.q).abs();
        let expected = 6.28 * (-9.0f64).exp();
        assert!((dev - expected).abs() <= 0.02 * expected, "{dev} vs {expected}");
        // Relative to the continuous orbit value as well.
        assert!((w1.q - q_periodic(0.0, 9.0)).abs() < 30.0 * p.delta_tau);
    }

    #[test]
    fn stationary_examples() {
        let m = ode();
        let p = MicroParams::default();
        assert_eq!(p.mean_inflow(), 15.0);
        assert_eq!(MicroParams { inflow_offset: 1.0, ..p }.mean_inflow(), 45.0);
        let s = solve_stationary_surrogate(&ScalarState::new(0.0), &m, &p).unwrap();
        assert!((s.gamma_bar.value - 0.8 * 5e-7).abs() < 1e-20);
        assert_eq!(s.cycles_used, 0);
    }

    #[test]
    fn micro_problem_on_orbit_takes_two_cycles() {
        let m = ode();
        let p = MicroParams::default();
        let ledger = CostLedger::new(1);
        let state = ScalarState::new(0.0);
        let mut w = MicroState::at_rest();
        for _ in 0..10 {
            w = advance_cycle(w, &Channel::Uniform(1.0), &p).unwrap().0;
        }
        let (s, _) = solve_micro_problem(w, &state, &m, &p, &Periodicity::default(), &ledger, Level::Fine(0)).unwrap();
        assert_eq!(s.cycles_used, 2);
        let snap = ledger.snapshot();
        assert_eq!(snap.micro_fine(), 1);
        assert_eq!(snap.per_process[0].micro_steps, 100);

        let (s, _) =
            solve_micro_problem(MicroState { q: w.q + 6.28 }, &state, &m, &p, &Periodicity::default(), &ledger, Level::Coarse)
                .unwrap();
        assert!((2..=3).contains(&s.cycles_used));
        assert_eq!(ledger.snapshot().micro_coarse(), 1);
    }

    #[test]
    fn weak_relaxation_hits_cycle_guard() {
        let m = ode();
        let p = MicroParams { lambda_relax: 0.1, ..Default::default() };
        let ledger = CostLedger::new(1);
        let per = Periodicity { eps_p: 1e-3, max_cycles: 10 };
        let r = solve_micro_problem(MicroState { q: 6.28 }, &ScalarState::new(0.0), &m, &p, &per, &ledger, Level::Fine(0));
        assert!(matches!(r, Err(Error::MicroNotPeriodic { cycles: 10, .. })));
        assert_eq!(ledger.snapshot().micro_fine(), 0);
    }

    #[test]
    fn closed_channel_rejected() {
        let p = MicroParams::default();
        let r = advance_cycle(MicroState::at_rest(), &Channel::Uniform(0.05), &p);
        assert!(matches!(r, Err(Error::ChannelClosure { .. })));
        let r = advance_cycle(MicroState::at_rest(), &Channel::Profile(vec![1.0, 0.01, 1.0]), &p);
        assert!(matches!(r, Err(Error::ChannelClosure { .. })));
    }

    #[test]
    fn micro_problem_is_deterministic() {
        let m = ode();
        let p = MicroParams::default();
        let run = || {
            let ledger = CostLedger::new(1);
            solve_micro_problem(MicroState { q: 3.0 }, &ScalarState::new(0.2), &m, &p, &Periodicity::default(), &ledger, Level::Coarse)
                .unwrap()
        };
        assert_eq!(run(), run());
    }

    proptest! {
        #[test]
        fn gamma_changes_decay_geometrically(q0 in 0.0f64..60.0, c in 0.0f64..0.5) {
            let m = ode();
            let p = MicroParams::default();
            let state = ScalarState::new(c);
            let ch = m.channel(&state);
            let mut w = MicroState { q: q0 };
            let mut gammas = Vec::new();
            for _ in 0..4 {
                let (w1, wss) = advance_cycle(w, &ch, &p).unwrap();
                gammas.push(m.cycle_average(&wss, &state));
                w = w1;
            }
            let d: Vec<f64> = gammas.windows(2).map(|g| (g[1].value - g[0].value).abs()).collect();
            // Below roundoff the ratio carries no information.
            if d[0] > 1e-18 && d[1] > 1e-18 {
                prop_assert!(d[1] / d[0] <= (-9.0f64).exp() + 0.05);
            }
        }

        #[test]
        fn wss_monotone_in_h_and_linear_in_q(q in 0.1f64..100.0, h in 0.1f64..2.0, dh in 1e-3f64..1.0, s in 0.1f64..10.0) {
            let p = MicroParams::default();
            prop_assert!(wall_shear_stress(q, h + dh, &p) < wall_shear_stress(q, h, &p));
            let a = wall_shear_stress(s * q, h, &p);
            let b = s * wall_shear_stress(q, h, &p);
            prop_assert!((a - b).abs() <= 1e-12 * b.abs());
        }
    }
}
