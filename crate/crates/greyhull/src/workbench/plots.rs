//! Plot-data emitters: tab-separated tables that any plotting tool can
//! consume. No rendering dependencies.

use std::fmt::Write as _;

use crate::angle::rad_to_deg;
use crate::dynamics::Trajectory;
use crate::forces::{resistance, rudder_coefficients, KeyParams};
use crate::workbench::dataset::fmt_g17;

/// Knot-indexed track and time-series columns for one trajectory.
pub fn trajectory_table(traj: &Trajectory<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "k\tt\tx\ty\tpsi_deg\tu\tv\tr\tn\tdelta_deg");
    for (k, s) in traj.states.iter().enumerate() {
        let _ = writeln!(
            out,
            "{k}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            fmt_g17(k as f64 * traj.dt),
            fmt_g17(s.x),
            fmt_g17(s.y),
            fmt_g17(rad_to_deg(s.psi)),
            fmt_g17(s.u),
            fmt_g17(s.v),
            fmt_g17(s.r),
            fmt_g17(s.n),
            fmt_g17(rad_to_deg(s.delta)),
        );
    }
    out
}

/// Ground-truth / baseline / fitted overlay for one scenario.
pub fn overlay_table(
    measured: &Trajectory<f64>,
    baseline: &Trajectory<f64>,
    fitted: &Trajectory<f64>,
) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "k\tx_gt\ty_gt\tpsi_gt\tu_gt\tv_gt\tr_gt\
         \tx_base\ty_base\tpsi_base\tu_base\tv_base\tr_base\
         \tx_fit\ty_fit\tpsi_fit\tu_fit\tv_fit\tr_fit"
    );
    for k in 0..measured.states.len() {
        let mut row = format!("{k}");
        for t in [measured, baseline, fitted] {
            let s = &t.states[k];
            for value in [s.x, s.y, s.psi, s.u, s.v, s.r] {
                let _ = write!(row, "\t{}", fmt_g17(value));
            }
        }
        let _ = writeln!(out, "{row}");
    }
    out
}

/// Resistance curves for two parameter sets sampled on `[0, u_max]`.
pub fn resistance_curve_table(
    label_a: &str,
    params_a: &KeyParams<f64>,
    label_b: &str,
    params_b: &KeyParams<f64>,
    u_max: f64,
    points: usize,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "u\tR_{label_a}\tR_{label_b}");
    for i in 0..points {
        let u = u_max * i as f64 / (points - 1) as f64;
        let _ = writeln!(
            out,
            "{}\t{}\t{}",
            fmt_g17(u),
            fmt_g17(resistance(u, params_a)),
            fmt_g17(resistance(u, params_b)),
        );
    }
    out
}

/// Lift and drag coefficient curves for two parameter sets over
/// +/- `a_max_deg`.
pub fn rudder_curve_table(
    label_a: &str,
    params_a: &KeyParams<f64>,
    label_b: &str,
    params_b: &KeyParams<f64>,
    a_max_deg: f64,
    points: usize,
) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "a_r_deg\tcl_{label_a}\tcl_{label_b}\tcd_{label_a}\tcd_{label_b}"
    );
    for i in 0..points {
        let a_deg = -a_max_deg + 2.0 * a_max_deg * i as f64 / (points - 1) as f64;
        let a = a_deg.to_radians();
        let (cl_a, cd_a) = rudder_coefficients(a, params_a);
        let (cl_b, cd_b) = rudder_coefficients(a, params_b);
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            fmt_g17(a_deg),
            fmt_g17(cl_a),
            fmt_g17(cl_b),
            fmt_g17(cd_a),
            fmt_g17(cd_b),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{ControlInput, VesselState};

    #[test]
    fn tables_have_expected_shape() {
        let states = vec![VesselState::<f64>::at_rest(); 4];
        let traj = Trajectory::new(states, vec![ControlInput::zero(); 3], 1.0).unwrap();
        let table = trajectory_table(&traj);
        assert_eq!(table.lines().count(), 5);
        assert!(table.starts_with("k\tt\tx"));

        let overlay = overlay_table(&traj, &traj, &traj);
        assert_eq!(overlay.lines().count(), 5);
        assert_eq!(overlay.lines().next().unwrap().split('\t').count(), 19);

        let p = KeyParams::zeros();
        let r = resistance_curve_table("base", &p, "fit", &p, 8.0, 16);
        assert_eq!(r.lines().count(), 17);
        let c = rudder_curve_table("base", &p, "fit", &p, 35.0, 16);
        assert_eq!(c.lines().count(), 17);
    }
}
