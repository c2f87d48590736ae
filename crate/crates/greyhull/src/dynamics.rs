//! Vessel state, rigid-body + hydrodynamic equations of motion, actuator
//! tracking, and the explicit-Euler trajectory rollout.
//!
//! The motion model is a 3-DoF hull-dynamics formulation: the surge equation
//! is a decoupled scalar once the centripetal coupling terms are moved to
//! the force side, and sway/yaw form a 2x2 linear system in the
//! accelerations. All maneuvering coefficients are fixed inputs; only the
//! force side carries fitted parameters.

use thiserror::Error;

use crate::angle::wrap_angle;
use crate::forces::{self, EnvInput, ForceTriple, KeyParams, PropellerModel};
use crate::real::Real;

/// Relative floor on the sway/yaw inertia determinant, as a fraction of
/// `(m - Y_vdot)(I_zz - N_rdot)`.
pub const DET_FLOOR_REL: f64 = 1e-9;

/// Full vessel state `[x, y, psi, u, v, r, n, delta]`.
///
/// Positions in meters, heading in radians (kept in `(-pi, pi]` by the
/// integrator), body velocities in m/s and rad/s, propeller speed in signed
/// rpm, rudder angle in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VesselState<T> {
    pub x: T,
    pub y: T,
    pub psi: T,
    pub u: T,
    pub v: T,
    pub r: T,
    pub n: T,
    pub delta: T,
}

impl<T: Real> VesselState<T> {
    pub fn at_rest() -> Self {
        Self {
            x: T::zero(),
            y: T::zero(),
            psi: T::zero(),
            u: T::zero(),
            v: T::zero(),
            r: T::zero(),
            n: T::zero(),
            delta: T::zero(),
        }
    }

    /// State channels in canonical order.
    pub fn channels(&self) -> [T; 8] {
        [
            self.x, self.y, self.psi, self.u, self.v, self.r, self.n, self.delta,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.channels().iter().all(|c| c.is_finite())
    }
}

/// Commanded propeller rpm and rudder angle (rad).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlInput<T> {
    pub c_n: T,
    pub c_delta: T,
}

impl<T: Real> ControlInput<T> {
    pub fn new(c_n: T, c_delta: T) -> Self {
        Self { c_n, c_delta }
    }

    pub fn zero() -> Self {
        Self {
            c_n: T::zero(),
            c_delta: T::zero(),
        }
    }

    /// Whether the commands respect the configured actuator limits.
    pub fn within_limits(&self, config: &VesselConfig<T>) -> bool {
        self.c_n.abs() <= config.n_max && self.c_delta.abs() <= config.delta_max
    }
}

/// Mass properties and maneuvering coefficients of the hull.
///
/// Added-mass and damping derivatives follow the usual convention of being
/// negative for a conventional hull; the code only assumes the effective
/// inertias are positive and the sway/yaw inertia matrix is invertible.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HydroCoefficients<T> {
    /// Ship mass (kg).
    pub mass: T,
    /// Yaw moment of inertia (kg m^2).
    pub inertia_zz: T,
    /// Longitudinal center-of-gravity offset (m).
    pub cog_x: T,
    // Added mass.
    pub x_udot: T,
    pub y_vdot: T,
    pub y_rdot: T,
    pub n_vdot: T,
    pub n_rdot: T,
    /// Surge centripetal coupling coefficient.
    pub x_vr: T,
    // Linear (speed-proportional) damping.
    pub y_v: T,
    pub y_r: T,
    pub n_v: T,
    pub n_r: T,
    // Nonlinear damping.
    pub y_vv: T,
    pub y_vr: T,
    pub y_rr: T,
    pub n_rr: T,
    pub n_rrv: T,
    pub n_vvr: T,
}

impl<T: Real> HydroCoefficients<T> {
    /// Effective surge inertia `m - X_udot`.
    pub fn surge_inertia(&self) -> T {
        self.mass - self.x_udot
    }

    /// Sway/yaw inertia matrix `[[m - Y_vdot, m x_G - Y_rdot],
    /// [m x_G - N_vdot, I_zz - N_rdot]]`.
    pub fn sway_yaw_inertia(&self) -> [[T; 2]; 2] {
        [
            [self.mass - self.y_vdot, self.mass * self.cog_x - self.y_rdot],
            [
                self.mass * self.cog_x - self.n_vdot,
                self.inertia_zz - self.n_rdot,
            ],
        ]
    }

    fn det_floor(&self) -> T {
        T::of(DET_FLOOR_REL) * (self.mass - self.y_vdot) * (self.inertia_zz - self.n_rdot)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let zero = T::zero();
        if !(self.surge_inertia() > zero) {
            return Err(SimError::InvalidConfig("m - X_udot must be positive".into()));
        }
        if !(self.mass - self.y_vdot > zero) {
            return Err(SimError::InvalidConfig("m - Y_vdot must be positive".into()));
        }
        if !(self.inertia_zz - self.n_rdot > zero) {
            return Err(SimError::InvalidConfig(
                "I_zz - N_rdot must be positive".into(),
            ));
        }
        let m = self.sway_yaw_inertia();
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() <= self.det_floor() {
            return Err(SimError::SingularInertia {
                det: det.to_f64_lossy(),
                floor: self.det_floor().to_f64_lossy(),
            });
        }
        Ok(())
    }
}

/// Geometry, actuator limits, and the propeller model for one vessel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VesselConfig<T> {
    pub hydro: HydroCoefficients<T>,
    /// Ship length (m).
    pub length: T,
    /// Water density (kg/m^3).
    pub rho: T,
    /// Rudder area (m^2).
    pub rudder_area: T,
    /// Rudder longitudinal position (m, negative aft).
    pub rudder_x: T,
    /// Propeller longitudinal position (m, negative aft).
    pub prop_x: T,
    pub prop: PropellerModel<T>,
    /// Rudder angle limit (rad).
    pub delta_max: T,
    /// Rudder slew rate (rad/s).
    pub delta_rate: T,
    /// Propeller rpm limit.
    pub n_max: T,
    /// Propeller slew rate (rpm/s).
    pub n_rate: T,
    /// Cap on the rudder inflow angle fed to the coefficient polynomials
    /// (rad).
    pub rudder_angle_cap: T,
}

impl<T: Real> VesselConfig<T> {
    pub fn validate(&self) -> Result<(), SimError> {
        let zero = T::zero();
        let positive: [(&str, T); 8] = [
            ("length", self.length),
            ("rho", self.rho),
            ("rudder_area", self.rudder_area),
            ("delta_max", self.delta_max),
            ("delta_rate", self.delta_rate),
            ("n_max", self.n_max),
            ("n_rate", self.n_rate),
            ("rudder_angle_cap", self.rudder_angle_cap),
        ];
        for (name, value) in positive {
            if !(value > zero) {
                return Err(SimError::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if !(self.prop.diameter > zero) {
            return Err(SimError::InvalidConfig(
                "propeller diameter must be positive".into(),
            ));
        }
        self.hydro.validate()
    }
}

/// Body-frame accelerations `(u_dot, v_dot, r_dot)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BodyAccel<T> {
    pub u_dot: T,
    pub v_dot: T,
    pub r_dot: T,
}

/// A rollout: `K + 1` states plus the `K` inputs that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub states: Vec<VesselState<T>>,
    pub inputs: Vec<ControlInput<T>>,
    pub dt: T,
}

impl<T: Real> Trajectory<T> {
    pub fn new(
        states: Vec<VesselState<T>>,
        inputs: Vec<ControlInput<T>>,
        dt: T,
    ) -> Result<Self, SimError> {
        if states.len() != inputs.len() + 1 {
            return Err(SimError::BadCall(format!(
                "trajectory needs inputs.len() + 1 states, got {} states and {} inputs",
                states.len(),
                inputs.len()
            )));
        }
        if !(dt > T::zero()) {
            return Err(SimError::BadCall("dt must be positive".into()));
        }
        Ok(Self { states, inputs, dt })
    }

    /// Number of steps `K`.
    pub fn knots(&self) -> usize {
        self.inputs.len()
    }

    /// Cartesian length of the `(x, y)` track.
    pub fn path_length(&self) -> T {
        let mut total = T::zero();
        for pair in self.states.windows(2) {
            let dx = pair[1].x - pair[0].x;
            let dy = pair[1].y - pair[0].y;
            total += (dx * dx + dy * dy).sqrt();
        }
        total
    }

    /// Mean of `sqrt(u^2 + v^2)` over all knots.
    pub fn mean_speed(&self) -> T {
        let mut total = T::zero();
        for s in &self.states {
            total += (s.u * s.u + s.v * s.v).sqrt();
        }
        total / T::of(self.states.len() as f64)
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("sway/yaw inertia matrix numerically singular (|det| {det:e} <= {floor:e})")]
    SingularInertia { det: f64, floor: f64 },
    #[error("non-finite {quantity}")]
    NonFinite { quantity: &'static str },
    #[error("bad call: {0}")]
    BadCall(String),
    #[error("simulation fault at step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<SimError>,
    },
}

/// Solves the equations of motion for the body accelerations given the
/// already-aggregated external forces.
///
/// The surge row is solved as a scalar after moving the
/// `(Y_vdot - X_vr - m) v r` and `(Y_rdot - m x_G) r^2` coupling terms to
/// the force side; sway and yaw are a 2x2 linear solve with all
/// velocity-dependent damping evaluated at the current state. The
/// `N_rrv r r v / U` and `N_vvr v v r / U` terms are dropped below the
/// speed floor where they vanish physically.
pub fn solve_accelerations<T: Real>(
    state: &VesselState<T>,
    total_forces: &ForceTriple<T>,
    hydro: &HydroCoefficients<T>,
) -> Result<BodyAccel<T>, SimError> {
    if !state.is_finite() {
        return Err(SimError::NonFinite { quantity: "state" });
    }
    if !total_forces.is_finite() {
        return Err(SimError::NonFinite { quantity: "forces" });
    }

    let (u, v, r) = (state.u, state.v, state.r);
    let speed = (u * u + v * v).sqrt();

    // Surge: (m - X_udot) u_dot = SX - (Y_vdot - X_vr - m) v r - (Y_rdot - m x_G) r^2
    let coupling = (hydro.y_vdot - hydro.x_vr - hydro.mass) * v * r
        + (hydro.y_rdot - hydro.mass * hydro.cog_x) * r * r;
    let u_dot = (total_forces.surge - coupling) / hydro.surge_inertia();

    // Sway/yaw damping evaluated at the current state.
    let sway_damping = -hydro.y_v * speed * v + (hydro.mass * u - hydro.y_r * speed) * r
        - hydro.y_vv * v * v.abs()
        - hydro.y_vr * v * r.abs()
        - hydro.y_rr * r * r.abs();
    let mut yaw_damping = -hydro.n_v * speed * v
        + (hydro.mass * hydro.cog_x * u - hydro.n_r * speed) * r
        - hydro.n_rr * r * r.abs();
    if speed >= T::of(forces::EPS_SPEED) {
        yaw_damping = yaw_damping - hydro.n_rrv * r * r * v / speed - hydro.n_vvr * v * v * r / speed;
    }

    let m = hydro.sway_yaw_inertia();
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.abs() <= hydro.det_floor() {
        return Err(SimError::SingularInertia {
            det: det.to_f64_lossy(),
            floor: hydro.det_floor().to_f64_lossy(),
        });
    }
    let b_sway = total_forces.sway - sway_damping;
    let b_yaw = total_forces.yaw - yaw_damping;
    let v_dot = (b_sway * m[1][1] - b_yaw * m[0][1]) / det;
    let r_dot = (m[0][0] * b_yaw - m[1][0] * b_sway) / det;

    let accel = BodyAccel { u_dot, v_dot, r_dot };
    if !(accel.u_dot.is_finite() && accel.v_dot.is_finite() && accel.r_dot.is_finite()) {
        return Err(SimError::NonFinite {
            quantity: "acceleration",
        });
    }
    Ok(accel)
}

fn move_toward<T: Real>(current: T, target: T, max_step: T) -> T {
    current + (target - current).max(-max_step).min(max_step)
}

/// One explicit-Euler step.
///
/// Kinematics and accelerations are evaluated at the current state (which
/// carries the current actuator values), then the actuators advance toward
/// the commands under symmetric rate limits and are clamped to their
/// hardware limits. The resulting heading is wrapped to `(-pi, pi]`.
pub fn step<T: Real>(
    state: &VesselState<T>,
    input: &ControlInput<T>,
    env: &EnvInput<T>,
    params: &KeyParams<T>,
    config: &VesselConfig<T>,
    dt: T,
) -> Result<VesselState<T>, SimError> {
    if !(dt > T::zero()) {
        return Err(SimError::BadCall("dt must be positive".into()));
    }
    if !state.is_finite() {
        return Err(SimError::NonFinite { quantity: "state" });
    }

    let forces = forces::aggregate(state, env, params, config);
    let accel = solve_accelerations(state, &forces, &config.hydro)?;

    let (sin_psi, cos_psi) = state.psi.sin_cos();
    let n_target = input.c_n.max(-config.n_max).min(config.n_max);
    let delta_target = input.c_delta.max(-config.delta_max).min(config.delta_max);

    let next = VesselState {
        x: state.x + dt * (state.u * cos_psi - state.v * sin_psi),
        y: state.y + dt * (state.u * sin_psi + state.v * cos_psi),
        psi: wrap_angle(state.psi + dt * state.r),
        u: state.u + dt * accel.u_dot,
        v: state.v + dt * accel.v_dot,
        r: state.r + dt * accel.r_dot,
        n: move_toward(state.n, n_target, config.n_rate * dt)
            .max(-config.n_max)
            .min(config.n_max),
        delta: move_toward(state.delta, delta_target, config.delta_rate * dt)
            .max(-config.delta_max)
            .min(config.delta_max),
    };
    if !next.is_finite() {
        return Err(SimError::NonFinite { quantity: "state" });
    }
    Ok(next)
}

/// Rolls out a trajectory from `initial` under the given input and
/// environment sequences. Deterministic: identical arguments produce
/// bit-identical trajectories.
pub fn simulate<T: Real>(
    initial: &VesselState<T>,
    inputs: &[ControlInput<T>],
    envs: &[EnvInput<T>],
    params: &KeyParams<T>,
    config: &VesselConfig<T>,
    dt: T,
) -> Result<Trajectory<T>, SimError> {
    if inputs.is_empty() {
        return Err(SimError::BadCall("need at least one input step".into()));
    }
    if inputs.len() != envs.len() {
        return Err(SimError::BadCall(format!(
            "inputs ({}) and envs ({}) must have equal length",
            inputs.len(),
            envs.len()
        )));
    }
    config.validate()?;

    let mut states = Vec::with_capacity(inputs.len() + 1);
    states.push(*initial);
    for (k, (input, env)) in inputs.iter().zip(envs.iter()).enumerate() {
        let next = step(&states[k], input, env, params, config, dt).map_err(|e| {
            SimError::AtStep {
                step: k,
                source: Box::new(e),
            }
        })?;
        states.push(next);
    }
    Ok(Trajectory {
        states,
        inputs: inputs.to_vec(),
        dt,
    })
}
