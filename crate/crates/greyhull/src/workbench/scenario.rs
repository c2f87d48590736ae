//! Maneuver scenario families and the closed-loop rollout that turns them
//! into recorded input sequences.
//!
//! Scenario generation may use state feedback (the zigzag flips its rudder
//! on heading thresholds), but what gets stored is the realized open-loop
//! input sequence, so replays under other parameter sets are exact.

use rand::Rng;
use rand_chacha::ChaCha20Rng;

use crate::angle::{deg_to_rad, wrap_diff};
use crate::dynamics::{step, ControlInput, SimError, Trajectory, VesselConfig, VesselState};
use crate::forces::{open_water_thrust, resistance_surge_force, EnvInput, KeyParams};
use crate::workbench::presets::VesselPreset;
use crate::workbench::WorkbenchError;

/// Piecewise-constant schedule: `(start_knot, value)` pairs, sorted by
/// knot; the value holds until the next entry.
pub type Schedule = Vec<(usize, f64)>;

fn schedule_value(schedule: &Schedule, knot: usize, default: f64) -> f64 {
    let mut value = default;
    for &(start, v) in schedule {
        if knot >= start {
            value = v;
        } else {
            break;
        }
    }
    value
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScenarioFamily {
    /// Constant shaft speed; rudder steps to a fixed angle at `start_knot`.
    TurningCircle {
        n_rpm: f64,
        rudder_deg: f64,
        start_knot: usize,
    },
    /// Classic zigzag: rudder flips sign whenever the heading deviation
    /// from the initial heading crosses the threshold.
    Zigzag {
        n_rpm: f64,
        rudder_deg: f64,
        threshold_deg: f64,
        start_knot: usize,
    },
    /// Straight run with shaft-speed steps.
    SpeedRun { n_schedule: Schedule },
    /// Port-approach composite: speed reduction plus alternating turns.
    PortApproach {
        n_schedule: Schedule,
        turn_schedule_deg: Schedule,
    },
}

impl ScenarioFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioFamily::TurningCircle { .. } => "turning-circle",
            ScenarioFamily::Zigzag { .. } => "zigzag",
            ScenarioFamily::SpeedRun { .. } => "speed-run",
            ScenarioFamily::PortApproach { .. } => "port-approach",
        }
    }

    /// Whether this family exercises maneuvering (vs. transit).
    pub fn is_maneuver(&self) -> bool {
        !matches!(self, ScenarioFamily::SpeedRun { .. })
    }

    /// Largest rudder and shaft commands the family can emit.
    fn command_bounds(&self) -> (f64, f64) {
        match self {
            ScenarioFamily::TurningCircle { n_rpm, rudder_deg, .. } => {
                (n_rpm.abs(), rudder_deg.abs())
            }
            ScenarioFamily::Zigzag { n_rpm, rudder_deg, .. } => (n_rpm.abs(), rudder_deg.abs()),
            ScenarioFamily::SpeedRun { n_schedule } => (
                n_schedule.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs())),
                0.0,
            ),
            ScenarioFamily::PortApproach {
                n_schedule,
                turn_schedule_deg,
            } => (
                n_schedule.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs())),
                turn_schedule_deg
                    .iter()
                    .fold(0.0f64, |m, (_, v)| m.max(v.abs())),
            ),
        }
    }
}

/// One maneuver: a command family plus initial state, length, and step.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub family: ScenarioFamily,
    pub initial: VesselState<f64>,
    pub knots: usize,
    pub dt: f64,
}

impl ScenarioSpec {
    pub fn validate(&self, config: &VesselConfig<f64>) -> Result<(), String> {
        if self.knots == 0 {
            return Err("scenario needs at least one knot".into());
        }
        if !(self.dt > 0.0) {
            return Err("dt must be positive".into());
        }
        let (n_cmd, rudder_cmd_deg) = self.family.command_bounds();
        if n_cmd > config.n_max {
            return Err(format!(
                "shaft command {n_cmd} rpm exceeds limit {}",
                config.n_max
            ));
        }
        if deg_to_rad(rudder_cmd_deg) > config.delta_max {
            return Err(format!(
                "rudder command {rudder_cmd_deg} deg exceeds limit {} deg",
                crate::angle::rad_to_deg(config.delta_max)
            ));
        }
        Ok(())
    }
}

/// Zigzag flip state.
struct ZigzagState {
    side: f64,
    initial_psi: f64,
}

/// Computes the commanded inputs for knot `k` given the current state.
fn command(
    family: &ScenarioFamily,
    k: usize,
    state: &VesselState<f64>,
    zigzag: &mut Option<ZigzagState>,
) -> ControlInput<f64> {
    match family {
        ScenarioFamily::TurningCircle {
            n_rpm,
            rudder_deg,
            start_knot,
        } => ControlInput::new(
            *n_rpm,
            if k >= *start_knot {
                deg_to_rad(*rudder_deg)
            } else {
                0.0
            },
        ),
        ScenarioFamily::Zigzag {
            n_rpm,
            rudder_deg,
            threshold_deg,
            start_knot,
        } => {
            if k < *start_knot {
                return ControlInput::new(*n_rpm, 0.0);
            }
            let z = zigzag.get_or_insert_with(|| ZigzagState {
                side: 1.0,
                initial_psi: state.psi,
            });
            let deviation = wrap_diff(state.psi, z.initial_psi);
            let threshold = deg_to_rad(*threshold_deg);
            // With an aft rudder, positive rudder angle turns the heading
            // negative; flip when the expected deviation is reached.
            if z.side > 0.0 && deviation <= -threshold {
                z.side = -1.0;
            } else if z.side < 0.0 && deviation >= threshold {
                z.side = 1.0;
            }
            ControlInput::new(*n_rpm, z.side * deg_to_rad(*rudder_deg))
        }
        ScenarioFamily::SpeedRun { n_schedule } => {
            ControlInput::new(schedule_value(n_schedule, k, 0.0), 0.0)
        }
        ScenarioFamily::PortApproach {
            n_schedule,
            turn_schedule_deg,
        } => ControlInput::new(
            schedule_value(n_schedule, k, 0.0),
            deg_to_rad(schedule_value(turn_schedule_deg, k, 0.0)),
        ),
    }
}

/// Simulates a scenario under the given parameters, recording the realized
/// input sequence.
pub fn roll_out(
    spec: &ScenarioSpec,
    params: &KeyParams<f64>,
    config: &VesselConfig<f64>,
) -> Result<Trajectory<f64>, SimError> {
    config.validate()?;
    let env = EnvInput::default();
    let mut states = Vec::with_capacity(spec.knots + 1);
    let mut inputs = Vec::with_capacity(spec.knots);
    states.push(spec.initial);
    let mut zigzag = None;
    for k in 0..spec.knots {
        let input = command(&spec.family, k, &states[k], &mut zigzag);
        let next = step(&states[k], &input, &env, params, config, spec.dt).map_err(|e| {
            SimError::AtStep {
                step: k,
                source: Box::new(e),
            }
        })?;
        inputs.push(input);
        states.push(next);
    }
    Trajectory::new(states, inputs, spec.dt)
}

/// Surge speed at which thrust balances resistance for a constant shaft
/// speed, found by bisection. Used to start scenarios near steady cruise.
pub fn steady_surge_speed(
    n_rpm: f64,
    params: &KeyParams<f64>,
    config: &VesselConfig<f64>,
) -> f64 {
    let balance = |u: f64| {
        open_water_thrust(u, n_rpm, &config.prop, config.rho)
            + resistance_surge_force(u, params)
    };
    let mut lo = 0.0;
    let mut hi = 12.0;
    if balance(lo) <= 0.0 {
        return 0.0;
    }
    if balance(hi) > 0.0 {
        return hi;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if balance(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Draws a mixed batch of scenarios: `maneuver_fraction` of them exercise
/// turning behavior, the rest are transit speed runs. All commands stay
/// inside the preset's envelope-safe ranges.
pub fn sample_scenarios(
    preset: &VesselPreset,
    truth: &KeyParams<f64>,
    count: usize,
    knots: usize,
    dt: f64,
    maneuver_fraction: f64,
    rng: &mut ChaCha20Rng,
) -> Vec<ScenarioSpec> {
    let (n_lo, n_hi) = preset.scenario_n_range;
    let rudder_hi = preset.scenario_rudder_max_deg;
    let mut scenarios = Vec::with_capacity(count);
    for _ in 0..count {
        let maneuver = rng.gen_range(0.0..1.0) < maneuver_fraction;
        let n_rpm = rng.gen_range(n_lo..n_hi);
        let family = if maneuver {
            match rng.gen_range(0..3) {
                0 => ScenarioFamily::TurningCircle {
                    n_rpm,
                    rudder_deg: rng.gen_range(10.0..rudder_hi) * side(rng),
                    start_knot: rng.gen_range(5..15),
                },
                1 => ScenarioFamily::Zigzag {
                    n_rpm,
                    rudder_deg: rng.gen_range(8.0..20.0f64.min(rudder_hi)),
                    threshold_deg: rng.gen_range(8.0..18.0),
                    start_knot: rng.gen_range(5..10),
                },
                _ => {
                    let n_mid = rng.gen_range(n_lo..n_rpm.max(n_lo + 1.0));
                    let n_lo_cmd = rng.gen_range(n_lo * 0.7..n_mid.max(n_lo * 0.7 + 1.0));
                    let theta1 = rng.gen_range(10.0..rudder_hi) * side(rng);
                    let theta2 = -theta1.signum() * rng.gen_range(10.0..rudder_hi);
                    let theta3 = rng.gen_range(4.0..10.0) * side(rng);
                    ScenarioFamily::PortApproach {
                        n_schedule: vec![(0, n_rpm), (40, n_mid), (80, n_lo_cmd)],
                        turn_schedule_deg: vec![
                            (rng.gen_range(8..14), theta1),
                            (rng.gen_range(40..55), theta2),
                            (rng.gen_range(80..95), theta3),
                        ],
                    }
                }
            }
        } else {
            let n_second = rng.gen_range(n_lo..n_hi);
            let n_third = rng.gen_range(n_lo * 0.7..n_hi);
            ScenarioFamily::SpeedRun {
                n_schedule: vec![
                    (0, n_rpm),
                    (rng.gen_range(30..50), n_second),
                    (rng.gen_range(75..95), n_third),
                ],
            }
        };

        let n0 = match &family {
            ScenarioFamily::TurningCircle { n_rpm, .. }
            | ScenarioFamily::Zigzag { n_rpm, .. } => *n_rpm,
            ScenarioFamily::SpeedRun { n_schedule }
            | ScenarioFamily::PortApproach { n_schedule, .. } => n_schedule[0].1,
        };
        let initial = VesselState {
            psi: rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
            u: steady_surge_speed(n0, truth, &preset.config),
            n: n0,
            ..VesselState::at_rest()
        };
        scenarios.push(ScenarioSpec {
            family,
            initial,
            knots,
            dt,
        });
    }
    scenarios
}

fn side(rng: &mut ChaCha20Rng) -> f64 {
    if rng.gen_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

// ---------------------------------------------------------------------
// Scenario file format.
// ---------------------------------------------------------------------

/// Parses a scenario file; see the crate README for the format.
pub fn parse_scenario(
    text: &str,
    path: &str,
    preset: &VesselPreset,
    params: &KeyParams<f64>,
) -> Result<ScenarioSpec, WorkbenchError> {
    let err = |line: usize, message: String| WorkbenchError::Parse {
        path: path.to_string(),
        line,
        message,
    };
    let mut family_name = None;
    let mut dt = preset.default_dt;
    let mut knots = 120usize;
    let mut initial: Option<VesselState<f64>> = None;
    let mut n_rpm = None;
    let mut rudder_deg = None;
    let mut threshold_deg = None;
    let mut start_knot = 0usize;
    let mut n_schedule: Schedule = Vec::new();
    let mut turn_schedule: Schedule = Vec::new();

    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != "greyhull-scenario v1" {
                return Err(err(lineno, "expected header `greyhull-scenario v1`".into()));
            }
            saw_header = true;
            continue;
        }
        let (key, rest) = line.split_once(char::is_whitespace).ok_or_else(|| {
            err(lineno, format!("expected `key value`, got `{line}`"))
        })?;
        let rest = rest.trim();
        let parse_f64 = |s: &str, lineno: usize| {
            s.parse::<f64>()
                .map_err(|_| err(lineno, format!("bad number `{s}`")))
        };
        match key {
            "family" => family_name = Some(rest.to_string()),
            "dt" => dt = parse_f64(rest, lineno)?,
            "knots" => {
                knots = rest
                    .parse()
                    .map_err(|_| err(lineno, format!("bad knot count `{rest}`")))?
            }
            "start-knot" => {
                start_knot = rest
                    .parse()
                    .map_err(|_| err(lineno, format!("bad knot index `{rest}`")))?
            }
            "n-rpm" => n_rpm = Some(parse_f64(rest, lineno)?),
            "rudder-deg" => rudder_deg = Some(parse_f64(rest, lineno)?),
            "threshold-deg" => threshold_deg = Some(parse_f64(rest, lineno)?),
            "initial" => {
                let fields: Vec<f64> = rest
                    .split_whitespace()
                    .map(|s| parse_f64(s, lineno))
                    .collect::<Result<_, _>>()?;
                if fields.len() != 8 {
                    return Err(err(
                        lineno,
                        format!("initial state needs 8 fields, got {}", fields.len()),
                    ));
                }
                initial = Some(VesselState {
                    x: fields[0],
                    y: fields[1],
                    psi: fields[2],
                    u: fields[3],
                    v: fields[4],
                    r: fields[5],
                    n: fields[6],
                    delta: deg_to_rad(fields[7]),
                });
            }
            "n-schedule" | "turn-schedule" => {
                let target = if key == "n-schedule" {
                    &mut n_schedule
                } else {
                    &mut turn_schedule
                };
                for pair in rest.split_whitespace() {
                    let (knot, value) = pair.split_once(':').ok_or_else(|| {
                        err(lineno, format!("expected `knot:value`, got `{pair}`"))
                    })?;
                    let knot = knot
                        .parse::<usize>()
                        .map_err(|_| err(lineno, format!("bad knot `{knot}`")))?;
                    target.push((knot, parse_f64(value, lineno)?));
                }
            }
            other => return Err(err(lineno, format!("unknown key `{other}`"))),
        }
    }
    if !saw_header {
        return Err(err(1, "missing header `greyhull-scenario v1`".into()));
    }

    let family = match family_name.as_deref() {
        Some("turning-circle") => ScenarioFamily::TurningCircle {
            n_rpm: n_rpm.ok_or_else(|| err(0, "turning-circle needs n-rpm".into()))?,
            rudder_deg: rudder_deg
                .ok_or_else(|| err(0, "turning-circle needs rudder-deg".into()))?,
            start_knot,
        },
        Some("zigzag") => ScenarioFamily::Zigzag {
            n_rpm: n_rpm.ok_or_else(|| err(0, "zigzag needs n-rpm".into()))?,
            rudder_deg: rudder_deg.ok_or_else(|| err(0, "zigzag needs rudder-deg".into()))?,
            threshold_deg: threshold_deg
                .ok_or_else(|| err(0, "zigzag needs threshold-deg".into()))?,
            start_knot,
        },
        Some("speed-run") => ScenarioFamily::SpeedRun {
            n_schedule: if n_schedule.is_empty() {
                vec![(0, n_rpm.ok_or_else(|| err(0, "speed-run needs n-schedule or n-rpm".into()))?)]
            } else {
                n_schedule
            },
        },
        Some("port-approach") => ScenarioFamily::PortApproach {
            n_schedule: if n_schedule.is_empty() {
                return Err(err(0, "port-approach needs n-schedule".into()));
            } else {
                n_schedule
            },
            turn_schedule_deg: turn_schedule,
        },
        Some(other) => return Err(err(0, format!("unknown family `{other}`"))),
        None => return Err(err(0, "missing `family`".into())),
    };

    let initial = initial.unwrap_or_else(|| {
        let n0 = match &family {
            ScenarioFamily::TurningCircle { n_rpm, .. }
            | ScenarioFamily::Zigzag { n_rpm, .. } => *n_rpm,
            ScenarioFamily::SpeedRun { n_schedule }
            | ScenarioFamily::PortApproach { n_schedule, .. } => n_schedule[0].1,
        };
        VesselState {
            u: steady_surge_speed(n0, params, &preset.config),
            n: n0,
            ..VesselState::at_rest()
        }
    });

    Ok(ScenarioSpec {
        family,
        initial,
        knots,
        dt,
    })
}
