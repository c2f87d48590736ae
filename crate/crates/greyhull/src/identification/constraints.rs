//! Domain-knowledge constraint set for the parameter fit.
//!
//! Five families, discretized on fixed grids:
//!   (i)   resistance bounds `R_lo <= R(u) <= R_hi` on a surge grid,
//!   (ii)  resistance monotonicity `dR/du > margin` on the same grid,
//!   (iii) lateral-thrust band `|p0| <= k`,
//!   (iv)  lift bounds with sign gating: `-1 <= c_L <= 0` for negative
//!         inflow angles, `0 <= c_L <= 1` for non-negative ones,
//!   (v)   drag bounds `0 <= c_D <= hi` plus `c_D(0) <= cap`.
//!
//! Every scalar constraint is linear in the parameter vector, so the set
//! compiles to rows `g_j(p) = a_j . p + b_j <= 0` with constant gradients.
//! Rows are nondimensionalized (resistance rows are scaled by `R_hi`) so a
//! single feasibility tolerance applies across families.

use crate::dynamics::VesselConfig;
use crate::forces::KeyParams;
use crate::real::Real;

use super::FitError;

/// Constraint family tags, used for reporting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintFamily {
    ResistanceLow,
    ResistanceHigh,
    ResistanceSlope,
    ThrustBand,
    LiftBound,
    DragBound,
    DragAtZero,
}

impl ConstraintFamily {
    pub fn name(self) -> &'static str {
        match self {
            ConstraintFamily::ResistanceLow => "resistance-low",
            ConstraintFamily::ResistanceHigh => "resistance-high",
            ConstraintFamily::ResistanceSlope => "resistance-slope",
            ConstraintFamily::ThrustBand => "thrust-band",
            ConstraintFamily::LiftBound => "lift-bound",
            ConstraintFamily::DragBound => "drag-bound",
            ConstraintFamily::DragAtZero => "drag-at-zero",
        }
    }
}

/// One scalar constraint `g(p) = coeffs . p + offset <= 0`.
#[derive(Clone, Debug)]
pub struct LinearConstraint<T> {
    pub family: ConstraintFamily,
    /// Grid abscissa the row was generated at (surge speed or inflow
    /// angle), where applicable.
    pub at: Option<T>,
    pub coeffs: [T; 11],
    pub offset: T,
}

impl<T: Real> LinearConstraint<T> {
    pub fn value(&self, p: &KeyParams<T>) -> T {
        let mut acc = self.offset;
        for (c, x) in self.coeffs.iter().zip(p.p.iter()) {
            acc += *c * *x;
        }
        acc
    }

    pub fn label(&self) -> String {
        match self.at {
            Some(at) => format!("{}@{:.4}", self.family.name(), at.to_f64_lossy()),
            None => self.family.name().to_string(),
        }
    }
}

/// Bounds, gating rules, and evaluation grids for constraints (i)-(v).
#[derive(Clone, Debug)]
pub struct ConstraintSet<T> {
    /// Resistance lower bound (N).
    pub resistance_lo: T,
    /// Resistance upper bound (N); also the normalization scale.
    pub resistance_hi: T,
    /// Strictness margin for the resistance slope (N s/m).
    pub monotonicity_margin: T,
    /// Lateral-thrust band: `|p0| <= thrust_band`.
    pub thrust_band: T,
    /// Lift magnitude bound (applied with sign gating).
    pub lift_bound: T,
    /// Drag upper bound.
    pub drag_hi: T,
    /// Cap on `c_D(0)`.
    pub drag_at_zero: T,
    /// Surge-speed grid for (i)-(ii), strictly increasing, m/s.
    pub surge_grid: Vec<T>,
    /// Inflow-angle grid for (iv)-(v), strictly increasing, rad.
    pub inflow_grid: Vec<T>,
}

fn linspace<T: Real>(lo: f64, hi: f64, count: usize) -> Vec<T> {
    assert!(count >= 2);
    let span = hi - lo;
    (0..count)
        .map(|i| T::of(lo + span * (i as f64) / ((count - 1) as f64)))
        .collect()
}

impl<T: Real> ConstraintSet<T> {
    /// Default bounds with 64-point grids: surge over `[0, u_max]`, inflow
    /// angle over +/-35 degrees.
    pub fn with_surge_ceiling(u_max: f64) -> Self {
        let a_max = 35.0f64.to_radians();
        Self {
            resistance_lo: T::zero(),
            resistance_hi: T::of(80_000.0),
            monotonicity_margin: T::zero(),
            thrust_band: T::of(0.05),
            lift_bound: T::one(),
            drag_hi: T::of(1.5),
            drag_at_zero: T::of(0.05),
            surge_grid: linspace(0.0, u_max.max(1.0), 64),
            inflow_grid: linspace(-a_max, a_max, 64),
        }
    }

    /// Same bounds on custom grids.
    pub fn with_grids(surge_grid: Vec<T>, inflow_grid: Vec<T>) -> Self {
        let mut cs = Self::with_surge_ceiling(1.0);
        cs.surge_grid = surge_grid;
        cs.inflow_grid = inflow_grid;
        cs
    }

    /// A copy of this set with grids refined by the given factor, for
    /// cross-checking the discretization.
    pub fn refined(&self, factor: usize) -> Self {
        let refine = |grid: &[T]| {
            let lo = grid[0].to_f64_lossy();
            let hi = grid[grid.len() - 1].to_f64_lossy();
            linspace(lo, hi, grid.len() * factor)
        };
        let mut cs = self.clone();
        cs.surge_grid = refine(&self.surge_grid);
        cs.inflow_grid = refine(&self.inflow_grid);
        cs
    }

    pub fn validate(&self) -> Result<(), FitError> {
        for (name, grid) in [("surge", &self.surge_grid), ("inflow", &self.inflow_grid)] {
            if grid.is_empty() {
                return Err(FitError::Invalid(format!("{name} grid is empty")));
            }
            if grid.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(FitError::Invalid(format!(
                    "{name} grid must be strictly increasing"
                )));
            }
        }
        Ok(())
    }

    /// Compiles the set into linear rows `g_j(p) <= 0`.
    pub fn rows(&self) -> Vec<LinearConstraint<T>> {
        let mut rows = Vec::new();
        let zero = [T::zero(); 11];
        let r_scale = self.resistance_hi;
        let u_ceiling = self.surge_grid[self.surge_grid.len() - 1];
        let slope_scale = r_scale / u_ceiling.max(T::one());

        for &u in &self.surge_grid {
            let u2 = u * u;
            let u3 = u2 * u;
            // (i) lower: (R_lo - R(u)) / R_hi <= 0
            let mut coeffs = zero;
            coeffs[1] = -u / r_scale;
            coeffs[2] = -u2 / r_scale;
            coeffs[3] = -u3 / r_scale;
            rows.push(LinearConstraint {
                family: ConstraintFamily::ResistanceLow,
                at: Some(u),
                coeffs,
                offset: self.resistance_lo / r_scale,
            });
            // (i) upper: (R(u) - R_hi) / R_hi <= 0
            let mut coeffs = zero;
            coeffs[1] = u / r_scale;
            coeffs[2] = u2 / r_scale;
            coeffs[3] = u3 / r_scale;
            rows.push(LinearConstraint {
                family: ConstraintFamily::ResistanceHigh,
                at: Some(u),
                coeffs,
                offset: -T::one(),
            });
            // (ii): (margin - R'(u)) / slope_scale <= 0
            let mut coeffs = zero;
            coeffs[1] = -T::one() / slope_scale;
            coeffs[2] = -T::of(2.0) * u / slope_scale;
            coeffs[3] = -T::of(3.0) * u2 / slope_scale;
            rows.push(LinearConstraint {
                family: ConstraintFamily::ResistanceSlope,
                at: Some(u),
                coeffs,
                offset: self.monotonicity_margin / slope_scale,
            });
        }

        // (iii): p0 - k <= 0 and -p0 - k <= 0.
        for sign in [T::one(), -T::one()] {
            let mut coeffs = zero;
            coeffs[0] = sign;
            rows.push(LinearConstraint {
                family: ConstraintFamily::ThrustBand,
                at: None,
                coeffs,
                offset: -self.thrust_band,
            });
        }

        for &a in &self.inflow_grid {
            let a2 = a * a;
            let a3 = a2 * a;
            let lift = |scale: T| {
                let mut coeffs = zero;
                coeffs[4] = scale;
                coeffs[5] = scale * a;
                coeffs[6] = scale * a2;
                coeffs[7] = scale * a3;
                coeffs
            };
            let drag = |scale: T| {
                let mut coeffs = zero;
                coeffs[8] = scale;
                coeffs[9] = scale * a;
                coeffs[10] = scale * a2;
                coeffs
            };
            // (iv) sign gating: negative angles want c_L in [-bound, 0],
            // non-negative angles want c_L in [0, bound].
            let (upper_offset, lower_offset) = if a < T::zero() {
                (T::zero(), -self.lift_bound)
            } else {
                (-self.lift_bound, T::zero())
            };
            rows.push(LinearConstraint {
                family: ConstraintFamily::LiftBound,
                at: Some(a),
                coeffs: lift(T::one()),
                offset: upper_offset,
            });
            rows.push(LinearConstraint {
                family: ConstraintFamily::LiftBound,
                at: Some(a),
                coeffs: lift(-T::one()),
                offset: lower_offset,
            });
            // (v): 0 <= c_D <= drag_hi.
            rows.push(LinearConstraint {
                family: ConstraintFamily::DragBound,
                at: Some(a),
                coeffs: drag(T::one()),
                offset: -self.drag_hi,
            });
            rows.push(LinearConstraint {
                family: ConstraintFamily::DragBound,
                at: Some(a),
                coeffs: drag(-T::one()),
                offset: T::zero(),
            });
        }

        // (v) cap at zero inflow: c_D(0) = p8 <= cap.
        let mut coeffs = zero;
        coeffs[8] = T::one();
        rows.push(LinearConstraint {
            family: ConstraintFamily::DragAtZero,
            at: None,
            coeffs,
            offset: -self.drag_at_zero,
        });

        rows
    }
}

/// Violation magnitudes `max(0, g_j(p))` for every scalar constraint, in
/// row order. The vessel configuration is part of the documented call
/// surface for force-resolution constraint variants; the built-in families
/// depend on the parameters alone.
pub fn evaluate_constraints<T: Real>(
    p: &KeyParams<T>,
    cs: &ConstraintSet<T>,
    _config: &VesselConfig<T>,
) -> Vec<T> {
    cs.rows()
        .iter()
        .map(|row| row.value(p).max(T::zero()))
        .collect()
}

/// Labeled violation magnitudes, largest first, for diagnostics.
pub fn violation_report<T: Real>(
    p: &KeyParams<T>,
    cs: &ConstraintSet<T>,
) -> Vec<(String, T)> {
    let mut report: Vec<(String, T)> = cs
        .rows()
        .iter()
        .filter_map(|row| {
            let v = row.value(p).max(T::zero());
            (v > T::zero()).then(|| (row.label(), v))
        })
        .collect();
    report.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    report
}

/// Largest violation magnitude over the whole set.
pub fn max_violation<T: Real>(p: &KeyParams<T>, cs: &ConstraintSet<T>) -> T {
    cs.rows()
        .iter()
        .fold(T::zero(), |m, row| m.max(row.value(p)))
        .max(T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workbench::presets;

    fn ship_a_fitted() -> KeyParams<f64> {
        KeyParams::from_f64([
            -0.017, 34187.0, -12568.0, 1594.0, -0.039, 3.193, 0.205, -4.882, 0.048, 0.0746, 1.370,
        ])
    }

    #[test]
    fn row_values_match_direct_polynomials() {
        let cs = ConstraintSet::<f64>::with_surge_ceiling(8.23);
        let p = ship_a_fitted();
        for row in cs.rows() {
            let direct: f64 = row
                .coeffs
                .iter()
                .zip(p.p.iter())
                .map(|(c, x)| c * x)
                .sum::<f64>()
                + row.offset;
            assert!((row.value(&p) - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn fitted_ship_a_resistance_lower_and_slope_feasible() {
        // On the full dataset surge range the published fitted curve is
        // positive and strictly increasing.
        let cs = ConstraintSet::<f64>::with_surge_ceiling(8.23);
        let p = ship_a_fitted();
        for row in cs.rows() {
            match row.family {
                ConstraintFamily::ResistanceLow | ConstraintFamily::ResistanceSlope => {
                    assert!(
                        row.value(&p) <= 0.0,
                        "unexpected violation at {:?}",
                        row.at
                    );
                }
                _ => {}
            }
        }
    }

    #[test]
    fn drag_cap_at_zero_inflow() {
        let cs = ConstraintSet::<f64>::with_surge_ceiling(8.23);
        let config = presets::ship_a().config;
        let p = ship_a_fitted();
        let rows = cs.rows();
        let violations = evaluate_constraints(&p, &cs, &config);
        let idx = rows
            .iter()
            .position(|r| r.family == ConstraintFamily::DragAtZero)
            .unwrap();
        // c_D(0) = 0.048 <= 0.05.
        assert_eq!(violations[idx], 0.0);
    }

    #[test]
    fn steeply_negative_cubic_breaks_monotonicity() {
        let cs = ConstraintSet::<f64>::with_surge_ceiling(8.0);
        let p = KeyParams::from_f64([
            0.0, 1000.0, 0.0, -500.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        ]);
        let worst = cs
            .rows()
            .iter()
            .filter(|r| r.family == ConstraintFamily::ResistanceSlope)
            .map(|r| r.value(&p))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(worst > 0.0, "expected a slope violation, got {worst}");
    }

    #[test]
    fn thrust_band_limits_p0() {
        let cs = ConstraintSet::<f64>::with_surge_ceiling(8.0);
        let mut p = KeyParams::zeros();
        p.p[0] = 0.08;
        assert!(max_violation(&p, &cs) >= 0.03 - 1e-15);
        p.p[0] = -0.049;
        assert_eq!(max_violation(&p, &cs), 0.0);
    }

    #[test]
    fn resistance_over_bound_is_flagged() {
        let cs = ConstraintSet::<f64>::with_surge_ceiling(8.0);
        // Strongly cubic resistance exceeds 80 kN well before 8 m/s.
        let p = KeyParams::from_f64([
            0.0, 1000.0, 0.0, 400.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        ]);
        let report = violation_report(&p, &cs);
        assert!(report.iter().any(|(label, _)| label.starts_with("resistance-high")));
    }

    #[test]
    fn lift_gating_flips_sign_with_inflow_angle() {
        let cs = ConstraintSet::<f64>::with_surge_ceiling(8.0);
        // Constant positive lift: fine for a >= 0, violated for a < 0.
        let mut p = KeyParams::zeros();
        p.p[4] = 0.5;
        let rows = cs.rows();
        for row in rows.iter().filter(|r| r.family == ConstraintFamily::LiftBound) {
            let a = row.at.unwrap();
            let v = row.value(&p).max(0.0);
            if a < 0.0 {
                assert!(v == 0.0 || (v - 0.5).abs() < 1e-15);
            } else {
                assert_eq!(v, 0.0);
            }
        }
        assert!((max_violation(&p, &cs) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn grid_validation() {
        let mut cs = ConstraintSet::<f64>::with_surge_ceiling(8.0);
        cs.surge_grid = vec![];
        assert!(cs.validate().is_err());
        let mut cs = ConstraintSet::<f64>::with_surge_ceiling(8.0);
        cs.inflow_grid = vec![0.1, 0.1];
        assert!(cs.validate().is_err());
    }
}
