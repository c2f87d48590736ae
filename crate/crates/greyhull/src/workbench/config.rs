//! Workbench configuration: a preset name or a TOML file that starts from
//! a preset and overrides vessel, solver, or constraint settings.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::angle::deg_to_rad;
use crate::identification::ConstraintSet;
use crate::workbench::presets::{self, VesselPreset};
use crate::workbench::WorkbenchError;
use crate::{ConstraintSet64, SolverOptions64};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// Base preset name; defaults to shipA.
    pub preset: Option<String>,
    /// Integration timestep (s).
    pub dt: Option<f64>,
    pub vessel: Option<VesselOverrides>,
    pub solver: Option<SolverOverrides>,
    pub constraints: Option<ConstraintOverrides>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VesselOverrides {
    pub mass: Option<f64>,
    pub inertia_zz: Option<f64>,
    pub cog_x: Option<f64>,
    pub length: Option<f64>,
    pub rho: Option<f64>,
    pub rudder_area: Option<f64>,
    pub rudder_x: Option<f64>,
    pub prop_x: Option<f64>,
    pub prop_diameter: Option<f64>,
    pub wake_fraction: Option<f64>,
    pub thrust_deduction: Option<f64>,
    pub kt0: Option<f64>,
    pub kt1: Option<f64>,
    pub kt2: Option<f64>,
    pub delta_max_deg: Option<f64>,
    pub delta_rate_deg: Option<f64>,
    pub n_max: Option<f64>,
    pub n_rate: Option<f64>,
    pub rudder_angle_cap_deg: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    pub max_iterations: Option<usize>,
    pub inner_iterations: Option<usize>,
    pub feasibility_tol: Option<f64>,
    pub objective_rel_tol: Option<f64>,
    pub stall_iterations: Option<usize>,
    pub fd_step_rel: Option<f64>,
    pub fault_penalty: Option<f64>,
    pub initial_penalty: Option<f64>,
    pub penalty_growth: Option<f64>,
    pub max_penalty: Option<f64>,
    pub r_max: Option<f64>,
    pub per_trajectory_r_max: Option<bool>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintOverrides {
    pub resistance_lo: Option<f64>,
    pub resistance_hi: Option<f64>,
    pub monotonicity_margin: Option<f64>,
    pub thrust_band: Option<f64>,
    pub lift_bound: Option<f64>,
    pub drag_hi: Option<f64>,
    pub drag_at_zero: Option<f64>,
    pub surge_grid_points: Option<usize>,
    /// Fixed surge-grid ceiling; when unset the ceiling comes from the
    /// dataset statistics.
    pub surge_grid_max: Option<f64>,
    pub inflow_grid_points: Option<usize>,
    pub inflow_max_deg: Option<f64>,
}

/// A preset with all file overrides applied.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub preset: VesselPreset,
    pub dt: f64,
    pub solver: SolverOptions64,
    pub constraints: ConstraintOverrides,
}

impl ResolvedConfig {
    pub fn from_preset(preset: VesselPreset) -> Self {
        let dt = preset.default_dt;
        Self {
            preset,
            dt,
            solver: SolverOptions64::default(),
            constraints: ConstraintOverrides::default(),
        }
    }

    /// Builds the constraint set, taking the surge ceiling from the data
    /// unless the config pins one.
    pub fn build_constraints(&self, data_u_max: f64) -> ConstraintSet64 {
        let o = &self.constraints;
        let u_ceiling = o.surge_grid_max.unwrap_or(data_u_max);
        let mut cs = ConstraintSet::with_surge_ceiling(u_ceiling);
        if let Some(v) = o.resistance_lo {
            cs.resistance_lo = v;
        }
        if let Some(v) = o.resistance_hi {
            cs.resistance_hi = v;
        }
        if let Some(v) = o.monotonicity_margin {
            cs.monotonicity_margin = v;
        }
        if let Some(v) = o.thrust_band {
            cs.thrust_band = v;
        }
        if let Some(v) = o.lift_bound {
            cs.lift_bound = v;
        }
        if let Some(v) = o.drag_hi {
            cs.drag_hi = v;
        }
        if let Some(v) = o.drag_at_zero {
            cs.drag_at_zero = v;
        }
        let surge_points = o.surge_grid_points.unwrap_or(cs.surge_grid.len()).max(2);
        let inflow_points = o.inflow_grid_points.unwrap_or(cs.inflow_grid.len()).max(2);
        let inflow_max = deg_to_rad(o.inflow_max_deg.unwrap_or(35.0));
        cs.surge_grid = (0..surge_points)
            .map(|i| u_ceiling.max(1.0) * i as f64 / (surge_points - 1) as f64)
            .collect();
        cs.inflow_grid = (0..inflow_points)
            .map(|i| -inflow_max + 2.0 * inflow_max * i as f64 / (inflow_points - 1) as f64)
            .collect();
        cs
    }
}

/// Resolves `--config`: a preset name (`shipA`, `shipB`) or a TOML file.
pub fn load(selector: &str) -> Result<ResolvedConfig, WorkbenchError> {
    if let Some(preset) = presets::by_name(selector) {
        return Ok(ResolvedConfig::from_preset(preset));
    }
    let path = Path::new(selector);
    if !path.exists() {
        return Err(WorkbenchError::UnknownPreset(selector.to_string()));
    }
    let text = fs::read_to_string(path).map_err(|source| WorkbenchError::Io {
        path: selector.to_string(),
        source,
    })?;
    let file: ConfigFile = toml::from_str(&text).map_err(|e| WorkbenchError::Parse {
        path: selector.to_string(),
        line: e.span().map_or(0, |s| text[..s.start].lines().count().max(1)),
        message: e.message().to_string(),
    })?;

    let preset_name = file.preset.as_deref().unwrap_or("shipA");
    let preset = presets::by_name(preset_name)
        .ok_or_else(|| WorkbenchError::UnknownPreset(preset_name.to_string()))?;
    let mut resolved = ResolvedConfig::from_preset(preset);

    if let Some(dt) = file.dt {
        if !(dt > 0.0) {
            return Err(WorkbenchError::Invalid("dt must be positive".into()));
        }
        resolved.dt = dt;
    }
    if let Some(v) = file.vessel {
        let c = &mut resolved.preset.config;
        macro_rules! set {
            ($field:expr, $value:expr) => {
                if let Some(x) = $value {
                    $field = x;
                }
            };
        }
        set!(c.hydro.mass, v.mass);
        set!(c.hydro.inertia_zz, v.inertia_zz);
        set!(c.hydro.cog_x, v.cog_x);
        set!(c.length, v.length);
        set!(c.rho, v.rho);
        set!(c.rudder_area, v.rudder_area);
        set!(c.rudder_x, v.rudder_x);
        set!(c.prop_x, v.prop_x);
        set!(c.prop.diameter, v.prop_diameter);
        set!(c.prop.wake_fraction, v.wake_fraction);
        set!(c.prop.thrust_deduction, v.thrust_deduction);
        set!(c.prop.kt0, v.kt0);
        set!(c.prop.kt1, v.kt1);
        set!(c.prop.kt2, v.kt2);
        set!(c.n_max, v.n_max);
        set!(c.n_rate, v.n_rate);
        if let Some(x) = v.delta_max_deg {
            c.delta_max = deg_to_rad(x);
        }
        if let Some(x) = v.delta_rate_deg {
            c.delta_rate = deg_to_rad(x);
        }
        if let Some(x) = v.rudder_angle_cap_deg {
            c.rudder_angle_cap = deg_to_rad(x);
        }
        resolved
            .preset
            .config
            .validate()
            .map_err(|e| WorkbenchError::Invalid(e.to_string()))?;
    }
    if let Some(s) = file.solver {
        let o = &mut resolved.solver;
        macro_rules! set {
            ($field:expr, $value:expr) => {
                if let Some(x) = $value {
                    $field = x;
                }
            };
        }
        set!(o.max_iterations, s.max_iterations);
        set!(o.inner_iterations, s.inner_iterations);
        set!(o.feasibility_tol, s.feasibility_tol);
        set!(o.objective_rel_tol, s.objective_rel_tol);
        set!(o.stall_iterations, s.stall_iterations);
        set!(o.fd_step_rel, s.fd_step_rel);
        set!(o.fault_penalty, s.fault_penalty);
        set!(o.initial_penalty, s.initial_penalty);
        set!(o.penalty_growth, s.penalty_growth);
        set!(o.max_penalty, s.max_penalty);
        set!(o.r_max, s.r_max);
        set!(o.per_trajectory_r_max, s.per_trajectory_r_max);
    }
    if let Some(c) = file.constraints {
        resolved.constraints = c;
    }
    Ok(resolved)
}
