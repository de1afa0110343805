//! Macro-scale growth models.
//!
//! Both models share the damping law `(1 + ‖σ_WS‖²/σ₀²)⁻¹` of the growth rate by
//! the wall shear stress. The scalar model advances one foam cell
//! concentration with forward Euler; the field model solves a
//! reaction-diffusion equation on the lower wall (see [`field`]).

pub mod field;

use alloc::vec::Vec;
use core::fmt::Debug;

use crate::error::{Error, Result};
use crate::microflow::{Channel, WssSeries};

/// Sign of the logistic reaction term: `∂ₜc = DΔc + sign·R c(1−c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReactionSign {
    /// `+R c(1−c)`: the reaction produces foam cells.
    Production,
    /// `−R c(1−c)`.
    Consumption,
}

impl ReactionSign {
    pub fn value(self) -> f64 {
        match self {
            ReactionSign::Production => 1.0,
            ReactionSign::Consumption => -1.0,
        }
    }

    pub fn from_value(v: i32) -> Result<Self> {
        match v {
            1 => Ok(ReactionSign::Production),
            -1 => Ok(ReactionSign::Consumption),
            _ => Err(Error::Domain { what: "reaction_sign", value: v as f64 }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthParams {
    /// Scale separation parameter; 1/s for the scalar model, cm/s (flux) for the field model.
    pub alpha: f64,
    /// Reference wall shear stress, g/(cm·s²).
    pub sigma0: f64,
    /// Diffusion coefficient, cm²/s.
    pub d_s: f64,
    /// Reaction rate, 1/s.
    pub r_s: f64,
    /// IMEX weight in [0, 1].
    pub theta: f64,
    pub reaction_sign: ReactionSign,
}

impl GrowthParams {
    /// Scalar model parameters (α = 5·10⁻⁷ 1/s, σ₀ = 30).
    pub fn ode_default() -> Self {
        GrowthParams { alpha: 5.0e-7, sigma0: 30.0, ..Self::pde_default() }
    }

    /// Field model parameters (D = 1.2·10⁻⁷, R = 5·10⁻⁷, α = 5·10⁻⁸, σ₀ = 30, θ = 0.7).
    pub fn pde_default() -> Self {
        GrowthParams {
            alpha: 5.0e-8,
            sigma0: 30.0,
            d_s: 1.2e-7,
            r_s: 5.0e-7,
            theta: 0.7,
            reaction_sign: ReactionSign::Production,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("alpha", self.alpha)?;
        positive("sigma0", self.sigma0)?;
        positive("D_s", self.d_s)?;
        positive("R_s", self.r_s)?;
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::Domain { what: "theta", value: self.theta });
        }
        Ok(())
    }

    /// `(1 + σ²/σ₀²)⁻¹`.
    #[inline]
    pub fn shear_damping(&self, wss: f64) -> f64 {
        let r = wss / self.sigma0;
        1.0 / (1.0 + r * r)
    }
}

pub(crate) fn positive(what: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { what, value: v })
    }
}

pub(crate) fn relative_to_alpha(diff: f64, alpha: f64) -> f64 {
    if alpha > 0.0 {
        diff / alpha
    } else {
        diff
    }
}

/// Scalar growth rate `α (1+c_s)⁻¹ (1 + ‖σ‖²/σ₀²)⁻¹`, 1/s.
pub fn gamma_ode(wss_l2: f64, c_s: f64, p: &GrowthParams) -> f64 {
    p.alpha / (1.0 + c_s) * p.shear_damping(wss_l2)
}

/// Damaged-wall weight `min{0, (x−1)(x+1)}²`: `(x²−1)²` on (−1, 1), zero elsewhere.
pub fn delta_weight(x: f64) -> f64 {
    let s = (x - 1.0) * (x + 1.0);
    if s < 0.0 {
        s * s
    } else {
        0.0
    }
}

/// Values over the interface nodes (the top row of the wall grid).
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceProfile {
    pub values: Vec<f64>,
}

impl InterfaceProfile {
    pub fn zeros(n: usize) -> Self {
        InterfaceProfile { values: alloc::vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Pointwise flux `α δ(x) (1 + σ(x)²/σ₀²)⁻¹` at the nodes `xs`.
pub fn gamma_pde(wss: &[f64], xs: &[f64], p: &GrowthParams) -> InterfaceProfile {
    debug_assert_eq!(wss.len(), xs.len());
    InterfaceProfile {
        values: wss.iter().zip(xs).map(|(&s, &x)| p.alpha * delta_weight(x) * p.shear_damping(s)).collect(),
    }
}

/// Foam cell concentration of the scalar model at macro time `t` (seconds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarState {
    pub c_s: f64,
    pub t: f64,
}

impl ScalarState {
    pub fn new(c_s: f64) -> Self {
        ScalarState { c_s, t: 0.0 }
    }
}

/// Forward Euler: `c ← c + δt·γ̄`.
pub fn macro_step_ode(state: &ScalarState, gamma_bar: f64, dt: f64) -> Result<ScalarState> {
    positive("dt", dt)?;
    Ok(ScalarState { c_s: state.c_s + dt * gamma_bar, t: state.t + dt })
}

/// What the two-scale and parareal drivers need from a growth model.
pub trait GrowthModel: Sync {
    type State: Clone + Debug + PartialEq + Send + Sync;
    /// Cycle-averaged growth value: a scalar rate or an interface flux profile.
    type Rate: Clone + Debug + PartialEq + Send + Sync;

    /// Whether a macro step is a reaction-diffusion solve (recorded in the ledger).
    const REACTION_DIFFUSION: bool;

    fn params(&self) -> &GrowthParams;

    fn time(&self, state: &Self::State) -> f64;

    /// Lumen half-width implied by the growth state.
    fn channel(&self, state: &Self::State) -> Channel;

    /// Average of the growth rate over one cycle of WSS samples.
    fn cycle_average(&self, wss: &WssSeries, state: &Self::State) -> Self::Rate;

    /// Growth rate for a single WSS sample (one value per channel node).
    fn rate_at(&self, wss: &[f64], state: &Self::State) -> Self::Rate;

    /// `max |a − b| / α`, the quantity the periodicity test compares with ε_p.
    fn rate_change(&self, a: &Self::Rate, b: &Self::Rate) -> f64;

    fn advance(&self, state: &Self::State, rate: &Self::Rate, dt: f64) -> Result<Self::State>;

    /// Scalar observable used for stopping and error reporting:
    /// `c_s` or the concentration at the interface midpoint.
    fn functional(&self, state: &Self::State) -> f64;

    /// Mean concentration along the interface (field model only).
    fn interface_mean(&self, _state: &Self::State) -> Option<f64> {
        None
    }

    /// One representative number for trajectory output.
    fn rate_summary(&self, rate: &Self::Rate) -> f64;

    /// Parareal update `predictor + fine − coarse_old`, taking the time from `predictor`.
    fn correct(&self, predictor: &Self::State, fine: &Self::State, coarse_old: &Self::State) -> Self::State;
}

/// Cycle-averaged scalar growth rate and the concentration it was evaluated at.
///
/// The shear-stress part of the rate is reused as is when the rate is applied
/// at a different concentration; only the `(1+c_s)⁻¹` factor is re-evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeRate {
    pub value: f64,
    pub c_s: f64,
}

impl OdeRate {
    /// The rate at concentration `c_s`.
    pub fn at(&self, c_s: f64) -> f64 {
        if c_s == self.c_s {
            self.value
        } else {
            self.value * ((1.0 + self.c_s) / (1.0 + c_s))
        }
    }
}

/// The scalar ODE model. The wall grows into the lumen with the growth factor
/// at the wall centre, so the half-width is `1 − c_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeModel {
    pub params: GrowthParams,
}

impl OdeModel {
    /// `α = 0` is accepted: no growth, but the micro problems still run.
    pub fn new(params: GrowthParams) -> Result<Self> {
        if !(params.alpha >= 0.0 && params.alpha.is_finite()) {
            return Err(Error::Domain { what: "alpha", value: params.alpha });
        }
        positive("sigma0", params.sigma0)?;
        Ok(OdeModel { params })
    }
}

impl GrowthModel for OdeModel {
    type State = ScalarState;
    type Rate = OdeRate;
    const REACTION_DIFFUSION: bool = false;

    fn params(&self) -> &GrowthParams {
        &self.params
    }

    fn time(&self, state: &ScalarState) -> f64 {
        state.t
    }

    fn channel(&self, state: &ScalarState) -> Channel {
        Channel::Uniform(1.0 - state.c_s)
    }

    fn cycle_average(&self, wss: &WssSeries, state: &ScalarState) -> OdeRate {
        let n = wss.samples();
        let sum: f64 = wss.iter().map(|s| gamma_ode(s[0], state.c_s, &self.params)).sum();
        OdeRate { value: sum / n as f64, c_s: state.c_s }
    }

    fn rate_at(&self, wss: &[f64], state: &ScalarState) -> OdeRate {
        OdeRate { value: gamma_ode(wss[0], state.c_s, &self.params), c_s: state.c_s }
    }

    fn rate_change(&self, a: &OdeRate, b: &OdeRate) -> f64 {
        relative_to_alpha((a.value - b.value).abs(), self.params.alpha)
    }

    fn advance(&self, state: &ScalarState, rate: &OdeRate, dt: f64) -> Result<ScalarState> {
        macro_step_ode(state, rate.at(state.c_s), dt)
    }

    fn functional(&self, state: &ScalarState) -> f64 {
        state.c_s
    }

    fn rate_summary(&self, rate: &OdeRate) -> f64 {
        rate.value
    }

    fn correct(&self, predictor: &ScalarState, fine: &ScalarState, coarse_old: &ScalarState) -> ScalarState {
        ScalarState { c_s: predictor.c_s + fine.c_s - coarse_old.c_s, t: predictor.t }
    }
}
