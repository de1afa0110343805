//! Scenario files.
//!
//! A scenario is one JSON document. Every field is optional; missing fields
//! take the `ode_baseline` preset value. Unknown keys are rejected. See
//! `docs/scenario.schema.md`.

use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use plaque_core::costs::MicroCost;
use plaque_core::growth::ReactionSign;
use plaque_core::{CostModelParams, Grid, GrowthParams, MicroParams, Periodicity, Schedule, StopOn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ode,
    Pde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    Serial,
    Parareal,
    Reusage,
    Heuristic,
}

impl RunMode {
    pub fn name(self) -> &'static str {
        match self {
            RunMode::Serial => "serial",
            RunMode::Parareal => "parareal",
            RunMode::Reusage => "reusage",
            RunMode::Heuristic => "heuristic",
        }
    }

    pub fn parareal_mode(self) -> Option<plaque_core::Mode> {
        match self {
            RunMode::Serial => None,
            RunMode::Parareal => Some(plaque_core::Mode::Standard),
            RunMode::Reusage => Some(plaque_core::Mode::Reusage),
            RunMode::Heuristic => Some(plaque_core::Mode::HeuristicCoarse),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Stopping {
    Fine,
    Coarse,
}

impl Stopping {
    pub fn on(self) -> StopOn {
        match self {
            Stopping::Fine => StopOn::FineEndpoint,
            Stopping::Coarse => StopOn::CoarseEndpoint,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Stopping::Fine => "fine",
            Stopping::Coarse => "coarse",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSection {
    pub t_end_days: f64,
    pub dt_days: f64,
    pub processes: usize,
    pub eps_p: f64,
    pub eps_par: f64,
    pub max_iters: usize,
    pub max_cycles: usize,
}

impl Default for ScheduleSection {
    fn default() -> Self {
        ScheduleSection {
            t_end_days: 300.0,
            dt_days: 0.3,
            processes: 1,
            eps_p: 1e-3,
            eps_par: 1e-3,
            max_iters: 20,
            max_cycles: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthSection {
    pub alpha: f64,
    pub sigma0: f64,
    pub d_s: f64,
    pub r_s: f64,
    pub theta: f64,
    pub reaction_sign: i32,
}

impl Default for GrowthSection {
    fn default() -> Self {
        let p = GrowthParams::ode_default();
        GrowthSection { alpha: p.alpha, sigma0: p.sigma0, d_s: p.d_s, r_s: p.r_s, theta: p.theta, reaction_sign: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MicroSection {
    pub rho_f: f64,
    pub nu_f: f64,
    pub lambda_relax: f64,
    pub c_geo: f64,
    pub inflow_amplitude: f64,
    pub inflow_offset: f64,
    pub delta_tau: f64,
    pub h_min: f64,
}

impl Default for MicroSection {
    fn default() -> Self {
        let m = MicroParams::default();
        MicroSection {
            rho_f: m.rho_f,
            nu_f: m.nu_f,
            lambda_relax: m.lambda_relax,
            c_geo: m.c_geo,
            inflow_amplitude: m.inflow_amplitude,
            inflow_offset: m.inflow_offset,
            delta_tau: m.delta_tau,
            h_min: m.h_min,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        let g = Grid::default();
        GridSection { nx: g.nx, ny: g.ny }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MicroUnit {
    /// `t_micro` is charged per micro time step (cycles × N_s).
    TimeStep,
    /// `t_micro` is charged per micro problem.
    Problem,
}

/// Synthetic runtime model. Units are arbitrary but shared by all terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostSection {
    pub micro_unit: MicroUnit,
    pub t_micro: f64,
    pub t_rd: f64,
}

impl Default for CostSection {
    fn default() -> Self {
        CostSection { micro_unit: MicroUnit::TimeStep, t_micro: 1.0, t_rd: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub model: ModelKind,
    pub mode: RunMode,
    pub stopping: Stopping,
    pub schedule: ScheduleSection,
    pub growth: GrowthSection,
    pub micro: MicroSection,
    pub grid: GridSection,
    pub cost: CostSection,
    /// Worker threads for fine sweeps; `null` means available parallelism.
    pub threads: Option<usize>,
    pub out_dir: String,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            name: "ode_baseline".into(),
            model: ModelKind::Ode,
            mode: RunMode::Serial,
            stopping: Stopping::Fine,
            schedule: ScheduleSection::default(),
            growth: GrowthSection::default(),
            micro: MicroSection::default(),
            grid: GridSection::default(),
            cost: CostSection::default(),
            threads: None,
            out_dir: "out".into(),
        }
    }
}

pub const PRESET_NAMES: [&str; 2] = ["ode_baseline", "pde_baseline"];

/// Scalar model: 300 days at δt = 0.3 d, δτ = 0.02 s, ε_p = ε_par = 10⁻³.
pub fn ode_baseline() -> Scenario {
    Scenario::default()
}

/// Field model: 200 days at δt = 0.2 d, ε_par = 10⁻⁴, inflow offset 1.
pub fn pde_baseline() -> Scenario {
    let p = GrowthParams::pde_default();
    Scenario {
        name: "pde_baseline".into(),
        model: ModelKind::Pde,
        schedule: ScheduleSection { t_end_days: 200.0, dt_days: 0.2, eps_par: 1e-4, ..Default::default() },
        growth: GrowthSection { alpha: p.alpha, sigma0: p.sigma0, d_s: p.d_s, r_s: p.r_s, theta: p.theta, reaction_sign: 1 },
        micro: MicroSection { inflow_offset: 1.0, ..Default::default() },
        ..Default::default()
    }
}

pub fn preset(name: &str) -> Option<Scenario> {
    match name {
        "ode_baseline" => Some(ode_baseline()),
        "pde_baseline" => Some(pde_baseline()),
        _ => None,
    }
}

/// Parses and validates a scenario document. Errors carry the key path.
pub fn parse_scenario(text: &str) -> anyhow::Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        anyhow::anyhow!("scenario key `{path}`: {}", e.into_inner())
    })?;
    scenario.validate()?;
    Ok(scenario)
}

/// Reads a scenario file; a bare preset name is accepted when no such file exists.
pub fn load_scenario(path: &Path) -> anyhow::Result<Scenario> {
    if !path.exists() {
        if let Some(s) = path.to_str().and_then(preset) {
            return Ok(s);
        }
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading scenario {}", path.display()))?;
    parse_scenario(&text).with_context(|| format!("in {}", path.display()))
}

impl Scenario {
    pub fn validate(&self) -> anyhow::Result<()> {
        self.schedule_obj()?;
        self.micro_params().validate().context("micro")?;
        self.periodicity().validate().context("schedule.eps_p / schedule.max_cycles")?;
        let g = self.growth_params()?;
        match self.model {
            ModelKind::Ode => {
                plaque_core::OdeModel::new(g).context("growth")?;
            }
            ModelKind::Pde => {
                plaque_core::PdeModel::new(g, self.grid_obj()?).context("growth/grid")?;
            }
        }
        if !(self.schedule.eps_par > 0.0) {
            bail!("schedule.eps_par must be positive, got {}", self.schedule.eps_par);
        }
        if self.schedule.max_iters == 0 {
            bail!("schedule.max_iters must be at least 1");
        }
        if self.threads == Some(0) {
            bail!("threads must be at least 1");
        }
        self.cost_params().validate().context("cost")?;
        Ok(())
    }

    pub fn schedule_obj(&self) -> anyhow::Result<Schedule> {
        Schedule::from_days(self.schedule.t_end_days, self.schedule.dt_days, self.schedule.processes).context("schedule")
    }

    pub fn micro_params(&self) -> MicroParams {
        let m = &self.micro;
        MicroParams {
            rho_f: m.rho_f,
            nu_f: m.nu_f,
            lambda_relax: m.lambda_relax,
            c_geo: m.c_geo,
            inflow_amplitude: m.inflow_amplitude,
            inflow_offset: m.inflow_offset,
            delta_tau: m.delta_tau,
            period: 1.0,
            h_min: m.h_min,
        }
    }

    pub fn periodicity(&self) -> Periodicity {
        Periodicity { eps_p: self.schedule.eps_p, max_cycles: self.schedule.max_cycles }
    }

    pub fn growth_params(&self) -> anyhow::Result<GrowthParams> {
        let g = &self.growth;
        let p = GrowthParams {
            alpha: g.alpha,
            sigma0: g.sigma0,
            d_s: g.d_s,
            r_s: g.r_s,
            theta: g.theta,
            reaction_sign: ReactionSign::from_value(g.reaction_sign).context("growth.reaction_sign")?,
        };
        if !(p.sigma0 > 0.0) {
            bail!("growth.sigma0 must be positive, got {}", p.sigma0);
        }
        Ok(p)
    }

    pub fn grid_obj(&self) -> anyhow::Result<Grid> {
        Grid::new(self.grid.nx, self.grid.ny).context("grid")
    }

    pub fn cost_params(&self) -> CostModelParams {
        let micro = match self.cost.micro_unit {
            MicroUnit::TimeStep => MicroCost::PerTimeStep(self.cost.t_micro),
            MicroUnit::Problem => MicroCost::PerProblem(self.cost.t_micro),
        };
        CostModelParams { micro, t_rd: self.cost.t_rd }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}
