//! External forces on the hull: resistance, propeller, rudder, and the
//! (stubbed) environment, parameterized by the eleven key parameters.
//!
//! Sign conventions: surge force positive forward, sway force positive to
//! port-normal of surge (same axis as `v`), yaw moment positive in the same
//! sense as `r`. Resistance enters the surge balance as a retarding term,
//! `-sign(u) * |R(u)|`.

use crate::dynamics::{VesselConfig, VesselState};
use crate::real::Real;

/// Speed floor (m/s) below which flow-direction quantities are undefined.
/// Used for the rudder inflow direction and the speed-normalized damping
/// terms in the yaw equation.
pub const EPS_SPEED: f64 = 1e-3;

/// Propeller rotation floor (rev/s) below which the advance ratio is
/// treated as zero.
pub const EPS_PROP_REV: f64 = 1e-3;

/// The eleven fitted force-model parameters `[p0 .. p10]`.
///
/// - `p0`: lateral thrust fraction (dimensionless)
/// - `p1..p3`: resistance polynomial coefficients (N s/m, N s^2/m^2, N s^3/m^3)
/// - `p4..p7`: rudder lift coefficient cubic in the inflow angle
/// - `p8..p10`: rudder drag coefficient quadratic in the inflow angle
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KeyParams<T> {
    pub p: [T; 11],
}

impl<T: Real> KeyParams<T> {
    pub fn new(p: [T; 11]) -> Self {
        Self { p }
    }

    pub fn zeros() -> Self {
        Self {
            p: [T::zero(); 11],
        }
    }

    pub fn from_f64(p: [f64; 11]) -> Self {
        Self {
            p: p.map(|x| T::of(x)),
        }
    }

    /// Lateral thrust fraction `p0`.
    pub fn thrust_coupling(&self) -> T {
        self.p[0]
    }

    /// Resistance polynomial coefficients `[p1, p2, p3]`.
    pub fn resistance_coeffs(&self) -> [T; 3] {
        [self.p[1], self.p[2], self.p[3]]
    }

    /// Lift polynomial coefficients `[p4, p5, p6, p7]`.
    pub fn lift_coeffs(&self) -> [T; 4] {
        [self.p[4], self.p[5], self.p[6], self.p[7]]
    }

    /// Drag polynomial coefficients `[p8, p9, p10]`.
    pub fn drag_coeffs(&self) -> [T; 3] {
        [self.p[8], self.p[9], self.p[10]]
    }

    pub fn is_finite(&self) -> bool {
        self.p.iter().all(|x| x.is_finite())
    }
}

/// Aggregated surge force, sway force, and yaw moment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForceTriple<T> {
    pub surge: T,
    pub sway: T,
    pub yaw: T,
}

impl<T: Real> ForceTriple<T> {
    pub fn zero() -> Self {
        Self {
            surge: T::zero(),
            sway: T::zero(),
            yaw: T::zero(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.surge.is_finite() && self.sway.is_finite() && self.yaw.is_finite()
    }
}

/// Wind, wave, and current descriptors.
///
/// The built-in force model is a zero stub ([`environment_forces`]); the
/// descriptors exist so scenarios can carry environment data for future
/// force models without a format change.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvInput<T> {
    pub wind_speed: T,
    pub wind_direction: T,
    pub wave_height: T,
    pub wave_direction: T,
    pub current_speed: T,
    pub current_direction: T,
}

impl<T: Real> Default for EnvInput<T> {
    fn default() -> Self {
        Self {
            wind_speed: T::zero(),
            wind_direction: T::zero(),
            wave_height: T::zero(),
            wave_direction: T::zero(),
            current_speed: T::zero(),
            current_direction: T::zero(),
        }
    }
}

/// Open-water propeller model with wake and thrust-deduction factors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropellerModel<T> {
    /// Propeller diameter (m).
    pub diameter: T,
    /// Wake fraction, `0 <= w < 1`.
    pub wake_fraction: T,
    /// Thrust deduction, `0 <= t < 1`.
    pub thrust_deduction: T,
    /// Open-water thrust coefficient polynomial `kt0 + kt1*J + kt2*J^2`.
    pub kt0: T,
    pub kt1: T,
    pub kt2: T,
}

/// Hull resistance `R(u) = p1 u + p2 u^2 + p3 u^3`, extended as an odd
/// function for astern speeds: `R(-u) = -R(|u|)`.
pub fn resistance<T: Real>(u: T, params: &KeyParams<T>) -> T {
    let [p1, p2, p3] = params.resistance_coeffs();
    let s = u.abs();
    let magnitude = s * (p1 + s * (p2 + s * p3));
    if u < T::zero() {
        -magnitude
    } else {
        magnitude
    }
}

/// Analytic slope of the resistance curve, `dR/du = p1 + 2 p2 u + 3 p3 u^2`,
/// valid for `u >= 0`.
pub fn resistance_slope<T: Real>(u: T, params: &KeyParams<T>) -> T {
    let [p1, p2, p3] = params.resistance_coeffs();
    let two = T::of(2.0);
    let three = T::of(3.0);
    p1 + two * p2 * u + three * p3 * u * u
}

/// Resistance as it enters the surge balance: `-sign(u) * |R(u)|`, so the
/// term always opposes the direction of motion.
pub fn resistance_surge_force<T: Real>(u: T, params: &KeyParams<T>) -> T {
    let magnitude = resistance(u, params).abs();
    if u > T::zero() {
        -magnitude
    } else if u < T::zero() {
        magnitude
    } else {
        T::zero()
    }
}

/// Open-water thrust at surge speed `u` and shaft speed `n_rpm`.
///
/// `J = u (1 - w) / (n_s D)` with `n_s = n/60` rev/s, treated as zero when
/// the shaft is nearly stopped; `X_n = (1 - t) rho n_s^2 D^4 K_T(J) sign(n_s)`.
pub fn open_water_thrust<T: Real>(u: T, n_rpm: T, prop: &PropellerModel<T>, rho: T) -> T {
    let n_s = n_rpm / T::of(60.0);
    let advance_ratio = if n_s.abs() < T::of(EPS_PROP_REV) {
        T::zero()
    } else {
        u * (T::one() - prop.wake_fraction) / (n_s * prop.diameter)
    };
    let kt = prop.kt0 + advance_ratio * (prop.kt1 + advance_ratio * prop.kt2);
    let d2 = prop.diameter * prop.diameter;
    let sign = if n_s > T::zero() {
        T::one()
    } else if n_s < T::zero() {
        -T::one()
    } else {
        T::zero()
    };
    (T::one() - prop.thrust_deduction) * rho * n_s * n_s * d2 * d2 * kt * sign
}

/// Propeller surge thrust, lateral force `Y_n = p0 X_n`, and the moment of
/// the lateral force about the origin, `N_n = x_P Y_n`.
pub fn propeller_forces<T: Real>(
    state: &VesselState<T>,
    params: &KeyParams<T>,
    config: &VesselConfig<T>,
) -> ForceTriple<T> {
    let thrust = open_water_thrust(state.u, state.n, &config.prop, config.rho);
    let lateral = params.thrust_coupling() * thrust;
    ForceTriple {
        surge: thrust,
        sway: lateral,
        yaw: config.prop_x * lateral,
    }
}

/// Rudder lift and drag coefficients at inflow angle `a_r` (rad).
///
/// Callers are expected to clamp `a_r` to the configured cap before
/// evaluation; see [`rudder_forces`].
pub fn rudder_coefficients<T: Real>(a_r: T, params: &KeyParams<T>) -> (T, T) {
    let [p4, p5, p6, p7] = params.lift_coeffs();
    let [p8, p9, p10] = params.drag_coeffs();
    let lift = p4 + a_r * (p5 + a_r * (p6 + a_r * p7));
    let drag = p8 + a_r * (p9 + a_r * p10);
    (lift, drag)
}

/// Rudder lift/drag resolved into body axes.
///
/// The inflow direction is `beta_R = atan2(v + x_R r, max(u, eps))`, the
/// inflow angle is `a_r = delta - beta_R` (clamped to the coefficient cap),
/// and the inflow speed satisfies `U_R^2 = u^2 + (v + x_R r)^2`.
pub fn rudder_forces<T: Real>(
    state: &VesselState<T>,
    params: &KeyParams<T>,
    config: &VesselConfig<T>,
) -> ForceTriple<T> {
    let lateral_flow = state.v + config.rudder_x * state.r;
    let beta_r = lateral_flow.atan2(state.u.max(T::of(EPS_SPEED)));
    let a_r = (state.delta - beta_r)
        .max(-config.rudder_angle_cap)
        .min(config.rudder_angle_cap);
    let inflow_sq = state.u * state.u + lateral_flow * lateral_flow;
    let pressure_area = T::of(0.5) * config.rho * config.rudder_area * inflow_sq;
    let (cl, cd) = rudder_coefficients(a_r, params);
    let lift = pressure_area * cl;
    let drag = pressure_area * cd;
    let (sin_b, cos_b) = beta_r.sin_cos();
    let sway = lift * cos_b + drag * sin_b;
    ForceTriple {
        surge: -drag * cos_b + lift * sin_b,
        sway,
        yaw: config.rudder_x * sway,
    }
}

/// Environmental force stub: always zero.
///
/// This is the extension point for wind/wave/current models; replacing it is
/// the only change needed to activate the `EnvInput` descriptors.
pub fn environment_forces<T: Real>(_env: &EnvInput<T>) -> ForceTriple<T> {
    ForceTriple::zero()
}

/// Sum of all external forces and moments:
/// `(X_n + X_d + X_e - sign(u)|R(u)|, Y_n + Y_d + Y_e, N_n + N_d + N_e)`.
pub fn aggregate<T: Real>(
    state: &VesselState<T>,
    env: &EnvInput<T>,
    params: &KeyParams<T>,
    config: &VesselConfig<T>,
) -> ForceTriple<T> {
    let prop = propeller_forces(state, params, config);
    let rudder = rudder_forces(state, params, config);
    let environment = environment_forces(env);
    let hull = resistance_surge_force(state.u, params);
    ForceTriple {
        surge: prop.surge + rudder.surge + environment.surge + hull,
        sway: prop.sway + rudder.sway + environment.sway,
        yaw: prop.yaw + rudder.yaw + environment.yaw,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::VesselState;
    use crate::workbench::presets;

    // Published fitted and baseline parameter vectors, [p0 .. p10].
    const SHIP_A_FITTED: [f64; 11] = [
        -0.017, 34187.0, -12568.0, 1594.0, -0.039, 3.193, 0.205, -4.882, 0.048, 0.0746, 1.370,
    ];
    const SHIP_A_BASELINE: [f64; 11] = [
        0.000, 10500.0, -1900.0, 346.0, -0.012, 0.864, 0.182, -1.191, 0.005, -0.1230, 0.779,
    ];
    const SHIP_B_FITTED: [f64; 11] = [
        -0.027, 5505.0, -4215.0, 1077.0, 0.012, 2.420, -0.019, -3.195, 0.047, 0.0001, 1.359,
    ];
    const SHIP_B_BASELINE: [f64; 11] = [
        0.000, 5669.0, -1127.0, 538.0, -0.012, 0.864, 0.182, -1.191, 0.005, -0.1230, 0.779,
    ];

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn resistance_zero_at_rest() {
        let params = KeyParams::from_f64(SHIP_A_FITTED);
        assert_eq!(resistance(0.0, &params), 0.0);
    }

    #[test]
    fn resistance_matches_direct_polynomial() {
        // Independent evaluation: explicit powers instead of Horner.
        let params = KeyParams::from_f64(SHIP_A_FITTED);
        let u = 2.0f64;
        let expected = 34187.0 * u + (-12568.0) * u * u + 1594.0 * u * u * u;
        assert!(rel_err(expected, 30854.0) < 1e-12);
        assert!(rel_err(resistance(u, &params), 30854.0) < 1e-12);

        let params_b = KeyParams::from_f64(SHIP_B_BASELINE);
        assert!(rel_err(resistance(1.0, &params_b), 5080.0) < 1e-12);
    }

    #[test]
    fn resistance_odd_extension() {
        let params = KeyParams::from_f64(SHIP_A_FITTED);
        for u in [0.1, 0.7, 2.0, 4.47, 8.23] {
            assert_eq!(resistance(-u, &params), -resistance(u, &params));
        }
    }

    #[test]
    fn resistance_surge_force_opposes_motion() {
        let params = KeyParams::from_f64(SHIP_A_FITTED);
        assert!(resistance_surge_force(3.0, &params) < 0.0);
        assert!(resistance_surge_force(-3.0, &params) > 0.0);
        assert_eq!(resistance_surge_force(0.0, &params), 0.0);
    }

    #[test]
    fn fitted_ship_a_resistance_positive_and_monotone_up_to_dataset_max() {
        // The published fitted curve is positive with positive slope over
        // the full dataset surge range (0, 8.23].
        let params = KeyParams::from_f64(SHIP_A_FITTED);
        let n = 2000;
        for i in 1..=n {
            let u = 8.23 * f64::from(i) / f64::from(n);
            assert!(resistance(u, &params) > 0.0, "R({u}) <= 0");
            assert!(resistance_slope(u, &params) > 0.0, "R'({u}) <= 0");
        }
    }

    #[test]
    fn thrust_zero_when_shaft_stopped() {
        let config = presets::ship_a().config;
        let params = KeyParams::from_f64(SHIP_A_FITTED);
        let state = VesselState {
            n: 0.0,
            u: 4.0,
            ..VesselState::at_rest()
        };
        let f = propeller_forces(&state, &params, &config);
        assert_eq!((f.surge, f.sway, f.yaw), (0.0, 0.0, 0.0));
    }

    #[test]
    fn advance_ratio_guard_keeps_thrust_bounded() {
        // Nearly stopped shaft with way on: J would blow up without the
        // guard; with it the thrust stays O(n_s^2).
        let config = presets::ship_a().config;
        let thrust = open_water_thrust(6.0, 0.05, &config.prop, config.rho);
        assert!(thrust.abs() < 1.0, "thrust={thrust}");
        assert!(thrust > 0.0);
    }

    #[test]
    fn zero_coupling_kills_lateral_force() {
        let config = presets::ship_a().config;
        let params = KeyParams::from_f64(SHIP_A_BASELINE);
        let state = VesselState {
            u: 3.0,
            n: 95.0,
            ..VesselState::at_rest()
        };
        let f = propeller_forces(&state, &params, &config);
        assert!(f.surge > 0.0);
        assert_eq!(f.sway, 0.0);
        assert_eq!(f.yaw, 0.0);
    }

    #[test]
    fn propeller_coupling_ratios() {
        // Y_n/X_n = p0 and N_n/Y_n = x_P whenever the denominators are
        // nonzero; spot values hand-computed from the stated formulas.
        let mut config = presets::ship_a().config;
        config.prop_x = -40.0;
        let params = KeyParams::from_f64(SHIP_A_FITTED);
        let state = VesselState {
            u: 4.0,
            n: 110.0,
            ..VesselState::at_rest()
        };
        let f = propeller_forces(&state, &params, &config);
        assert!(f.surge > 0.0);
        assert!(rel_err(f.sway / f.surge, -0.017) < 1e-12);
        assert!(rel_err(f.yaw / f.sway, -40.0) < 1e-12);
        // The worked example: X_n = 100 kN gives Y_n = -1700 N, N_n = 68 kN m.
        let xn = 100_000.0;
        assert_eq!(params.thrust_coupling() * xn, -1700.0);
        assert_eq!(config.prop_x * (params.thrust_coupling() * xn), 68_000.0);
    }

    #[test]
    fn rudder_coefficients_at_zero_inflow() {
        let a = KeyParams::from_f64(SHIP_A_FITTED);
        let (cl, cd) = rudder_coefficients(0.0, &a);
        assert_eq!(cl, -0.039);
        assert_eq!(cd, 0.048);
        let b = KeyParams::from_f64(SHIP_B_FITTED);
        let (cl, cd) = rudder_coefficients(0.0, &b);
        assert_eq!(cl, 0.012);
        assert_eq!(cd, 0.047);
    }

    #[test]
    fn rudder_coefficients_match_direct_evaluation() {
        let params = KeyParams::from_f64(SHIP_A_BASELINE);
        let a_r = 0.3f64;
        let (cl, cd) = rudder_coefficients(a_r, &params);
        let cl_direct = -0.012 + 0.864 * a_r + 0.182 * a_r * a_r - 1.191 * a_r * a_r * a_r;
        let cd_direct = 0.005 - 0.1230 * a_r + 0.779 * a_r * a_r;
        assert!(rel_err(cl, cl_direct) < 1e-14);
        assert!(rel_err(cd, cd_direct) < 1e-14);
    }

    #[test]
    fn rudder_zero_inflow_gives_zero_force() {
        let config = presets::ship_a().config;
        let params = KeyParams::from_f64(SHIP_A_FITTED);
        for delta_deg in [-35.0, -10.0, 0.0, 20.0, 35.0] {
            let state = VesselState {
                delta: crate::angle::deg_to_rad(delta_deg),
                ..VesselState::at_rest()
            };
            let f = rudder_forces(&state, &params, &config);
            assert_eq!((f.surge, f.sway, f.yaw), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn rudder_straight_running_matches_closed_form() {
        // delta = 0, v = r = 0: a_r = 0 and the only force is the small
        // zero-angle lift/drag at dynamic pressure 0.5 rho A_R u^2.
        let config = presets::ship_a().config;
        let params = KeyParams::from_f64(SHIP_A_FITTED);
        let state = VesselState {
            u: 4.0,
            ..VesselState::at_rest()
        };
        let f = rudder_forces(&state, &params, &config);
        let q = 0.5 * config.rho * config.rudder_area * 16.0;
        assert!(rel_err(f.sway, q * -0.039) < 1e-12);
        assert!(rel_err(f.surge, -q * 0.048) < 1e-12);
        assert!(rel_err(f.yaw, config.rudder_x * f.sway) < 1e-15);
    }

    #[test]
    fn rudder_fixed_state_dual_implementation() {
        // Independent re-implementation of the resolution formulas.
        let mut config = presets::ship_a().config;
        config.rudder_area = 12.0;
        config.rudder_x = -42.0;
        config.rho = 1025.0;
        let params = KeyParams::from_f64(SHIP_A_FITTED);
        let state = VesselState {
            u: 4.0,
            v: 0.2,
            r: 0.005,
            delta: crate::angle::deg_to_rad(15.0),
            ..VesselState::at_rest()
        };
        let f = rudder_forces(&state, &params, &config);

        let flow = 0.2 + (-42.0) * 0.005;
        let beta = f64::atan2(flow, 4.0f64.max(1e-3));
        let a_r = (state.delta - beta).clamp(-config.rudder_angle_cap, config.rudder_angle_cap);
        let ur2 = 4.0 * 4.0 + flow * flow;
        let cl = -0.039 + 3.193 * a_r + 0.205 * a_r.powi(2) - 4.882 * a_r.powi(3);
        let cd = 0.048 + 0.0746 * a_r + 1.370 * a_r.powi(2);
        let lift = 0.5 * 1025.0 * 12.0 * ur2 * cl;
        let drag = 0.5 * 1025.0 * 12.0 * ur2 * cd;
        let x = -drag * beta.cos() + lift * beta.sin();
        let y = lift * beta.cos() + drag * beta.sin();
        let n = -42.0 * y;
        assert!(rel_err(f.surge, x) < 1e-12);
        assert!(rel_err(f.sway, y) < 1e-12);
        assert!(rel_err(f.yaw, n) < 1e-12);
    }

    #[test]
    fn rudder_inflow_angle_is_clamped() {
        let config = presets::ship_a().config;
        let params = KeyParams::from_f64(SHIP_A_FITTED);
        let at = |delta_deg: f64| {
            let state = VesselState {
                u: 4.0,
                delta: crate::angle::deg_to_rad(delta_deg),
                ..VesselState::at_rest()
            };
            rudder_forces(&state, &params, &config)
        };
        // Past the cap the coefficients freeze, so the force stops changing.
        let capped = at(crate::angle::rad_to_deg(config.rudder_angle_cap));
        let beyond = at(crate::angle::rad_to_deg(config.rudder_angle_cap) + 5.0);
        assert_eq!(capped, beyond);
    }

    #[test]
    fn aggregate_is_component_sum() {
        let config = presets::ship_a().config;
        let params = KeyParams::from_f64(SHIP_A_FITTED);
        let env = EnvInput::default();
        let state = VesselState {
            u: 4.2,
            v: -0.3,
            r: 0.012,
            n: 105.0,
            delta: crate::angle::deg_to_rad(-8.0),
            ..VesselState::at_rest()
        };
        let total = aggregate(&state, &env, &params, &config);
        let prop = propeller_forces(&state, &params, &config);
        let rudder = rudder_forces(&state, &params, &config);
        let environment = environment_forces(&env);
        let hull = resistance_surge_force(state.u, &params);
        assert_eq!(
            total.surge,
            prop.surge + rudder.surge + environment.surge + hull
        );
        assert_eq!(total.sway, prop.sway + rudder.sway + environment.sway);
        assert_eq!(total.yaw, prop.yaw + rudder.yaw + environment.yaw);
    }

    #[test]
    fn aggregate_zero_state_zero_params() {
        let config = presets::ship_a().config;
        let env = EnvInput::default();
        let f = aggregate(
            &VesselState::at_rest(),
            &env,
            &KeyParams::zeros(),
            &config,
        );
        assert_eq!((f.surge, f.sway, f.yaw), (0.0, 0.0, 0.0));
    }

    #[test]
    fn aggregate_resistance_only_retards() {
        let mut params = KeyParams::from_f64(SHIP_B_FITTED);
        params.p[0] = 0.0; // no thrust coupling
        let config = presets::ship_b().config;
        let state = VesselState {
            u: 3.0,
            n: 0.0,
            ..VesselState::at_rest()
        };
        let f = aggregate(&state, &EnvInput::default(), &params, &config);
        assert!(f.surge < 0.0);
        assert!(rel_err(f.surge, -resistance(3.0, &params)) < 1e-12);
    }

    #[test]
    fn environment_stub_is_zero() {
        let env = EnvInput::<f64> {
            wind_speed: 12.0,
            wind_direction: 1.0,
            wave_height: 2.5,
            wave_direction: -0.5,
            current_speed: 0.8,
            current_direction: 2.0,
        };
        let f = environment_forces(&env);
        assert_eq!((f.surge, f.sway, f.yaw), (0.0, 0.0, 0.0));
    }

    #[test]
    fn works_in_single_precision() {
        let params = KeyParams::<f32>::from_f64(SHIP_B_FITTED);
        let r = resistance(1.0f32, &params);
        assert!((r - 2367.0).abs() / 2367.0 < 1e-5);
    }
}
