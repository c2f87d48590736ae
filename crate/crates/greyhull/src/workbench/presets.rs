//! Built-in vessel presets: two container ships of different sizes with
//! their baseline and reference fitted parameter vectors, fitting initial
//! guesses, and dataset statistics envelopes.
//!
//! The hull coefficients and propulsion constants are representative values
//! for vessels of these sizes, tuned so cruise shaft speeds produce cruise
//! surge speeds inside each ship's envelope. They are configuration inputs,
//! not fitted quantities.

use crate::angle::deg_to_rad;
use crate::dynamics::{HydroCoefficients, VesselConfig};
use crate::forces::{KeyParams, PropellerModel};

/// Min/max/mean envelope for one state channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl ChannelStats {
    fn new(min: f64, max: f64, mean: f64) -> Self {
        assert!(min <= mean && mean <= max, "inconsistent channel stats");
        Self { min, max, mean }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.min <= value && value <= self.max
    }
}

/// Dataset statistics envelope; `delta` is in degrees, matching how rudder
/// angles are reported in dataset files.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StatsEnvelope {
    pub u: ChannelStats,
    pub v: ChannelStats,
    pub r: ChannelStats,
    pub n: ChannelStats,
    pub delta_deg: ChannelStats,
}

/// A named vessel with config, parameter vectors, and scenario-generation
/// ranges.
#[derive(Clone, Debug)]
pub struct VesselPreset {
    pub name: &'static str,
    pub config: VesselConfig<f64>,
    /// Baseline parameters from traditional practice.
    pub baseline: KeyParams<f64>,
    /// Reference fitted parameters; used as synthetic truth.
    pub fitted: KeyParams<f64>,
    /// Documented initial guess for the fit.
    pub initial_guess: KeyParams<f64>,
    pub envelope: StatsEnvelope,
    pub default_dt: f64,
    /// Shaft-speed range used by the scenario generator (rpm).
    pub scenario_n_range: (f64, f64),
    /// Largest rudder command used by the scenario generator (deg).
    pub scenario_rudder_max_deg: f64,
}

pub fn ship_a() -> VesselPreset {
    let hydro = HydroCoefficients {
        mass: 3.6e6,
        inertia_zz: 1.5e9,
        cog_x: 0.8,
        x_udot: -1.44e5,
        y_vdot: -2.7e6,
        y_rdot: -2.0e7,
        n_vdot: -1.5e7,
        n_rdot: -7.5e8,
        x_vr: -1.8e6,
        y_v: -9.0e4,
        y_r: -2.5e6,
        n_v: -1.2e6,
        n_r: -4.0e7,
        y_vv: -1.2e5,
        y_vr: -1.5e6,
        y_rr: -3.0e6,
        n_rr: -2.0e8,
        n_rrv: -5.0e7,
        n_vvr: -3.0e7,
    };
    let config = VesselConfig {
        hydro,
        length: 85.0,
        rho: 1025.0,
        rudder_area: 12.0,
        rudder_x: -42.0,
        prop_x: -40.0,
        prop: PropellerModel {
            diameter: 3.2,
            wake_fraction: 0.18,
            thrust_deduction: 0.16,
            kt0: 0.40,
            kt1: -0.25,
            kt2: -0.18,
        },
        delta_max: deg_to_rad(35.0),
        delta_rate: deg_to_rad(2.32),
        n_max: 250.0,
        n_rate: 8.0,
        rudder_angle_cap: deg_to_rad(35.0),
    };
    VesselPreset {
        name: "shipA",
        config,
        baseline: KeyParams::from_f64([
            0.000, 10500.0, -1900.0, 346.0, -0.012, 0.864, 0.182, -1.191, 0.005, -0.1230, 0.779,
        ]),
        fitted: KeyParams::from_f64([
            -0.017, 34187.0, -12568.0, 1594.0, -0.039, 3.193, 0.205, -4.882, 0.048, 0.0746, 1.370,
        ]),
        initial_guess: KeyParams::from_f64([
            0.00, 34187.03, -12569.98, 1586.29, -0.02, 2.70, 0.42, -3.23, 0.06, -0.11, 1.97,
        ]),
        envelope: StatsEnvelope {
            u: ChannelStats::new(-4.47, 8.23, 3.27),
            v: ChannelStats::new(-2.05, 1.76, -0.02),
            r: ChannelStats::new(-0.03, 0.03, 0.0),
            n: ChannelStats::new(-249.1, 249.4, 95.0),
            delta_deg: ChannelStats::new(-32.5, 33.5, 1.2),
        },
        default_dt: 1.0,
        scenario_n_range: (70.0, 125.0),
        scenario_rudder_max_deg: 28.0,
    }
}

pub fn ship_b() -> VesselPreset {
    let hydro = HydroCoefficients {
        mass: 1.15e7,
        inertia_zz: 1.12e10,
        cog_x: 1.2,
        x_udot: -4.6e5,
        y_vdot: -9.2e6,
        y_rdot: -6.0e7,
        n_vdot: -4.0e7,
        n_rdot: -5.6e9,
        x_vr: -5.0e6,
        y_v: -2.4e5,
        y_r: -8.0e6,
        n_v: -4.5e6,
        n_r: -2.8e8,
        y_vv: -3.5e5,
        y_vr: -4.0e6,
        y_rr: -1.5e7,
        n_rr: -1.5e9,
        n_rrv: -2.0e8,
        n_vvr: -1.0e8,
    };
    let config = VesselConfig {
        hydro,
        length: 130.0,
        rho: 1025.0,
        rudder_area: 26.0,
        rudder_x: -63.0,
        prop_x: -60.0,
        prop: PropellerModel {
            diameter: 3.4,
            wake_fraction: 0.20,
            thrust_deduction: 0.17,
            kt0: 0.25,
            kt1: -0.20,
            kt2: -0.10,
        },
        delta_max: deg_to_rad(40.0),
        delta_rate: deg_to_rad(2.5),
        n_max: 175.0,
        n_rate: 5.0,
        rudder_angle_cap: deg_to_rad(35.0),
    };
    VesselPreset {
        name: "shipB",
        config,
        baseline: KeyParams::from_f64([
            0.000, 5669.0, -1127.0, 538.0, -0.012, 0.864, 0.182, -1.191, 0.005, -0.1230, 0.779,
        ]),
        fitted: KeyParams::from_f64([
            -0.027, 5505.0, -4215.0, 1077.0, 0.012, 2.420, -0.019, -3.195, 0.047, 0.0001, 1.359,
        ]),
        initial_guess: KeyParams::from_f64([
            -0.05, 5504.65, -4218.06, 1063.42, -0.01, 2.73, 0.35, -3.10, 0.06, -0.11, 1.97,
        ]),
        envelope: StatsEnvelope {
            u: ChannelStats::new(-0.47, 6.17, 3.83),
            v: ChannelStats::new(-1.04, 1.03, 0.04),
            r: ChannelStats::new(-0.02, 0.02, 0.0),
            n: ChannelStats::new(-158.8, 169.7, 93.3),
            delta_deg: ChannelStats::new(-40.0, 40.0, -1.0),
        },
        default_dt: 1.0,
        scenario_n_range: (75.0, 135.0),
        scenario_rudder_max_deg: 30.0,
    }
}

/// Looks up a preset by name.
pub fn by_name(name: &str) -> Option<VesselPreset> {
    match name {
        "shipA" | "shipa" | "ship-a" => Some(ship_a()),
        "shipB" | "shipb" | "ship-b" => Some(ship_b()),
        _ => None,
    }
}
