//! Trajectory distance measures and the baseline-vs-fitted evaluation
//! protocol.
//!
//! Two measures: a per-dimension Manhattan distance (mean absolute
//! deviation over knots 1..K) and a scalar vessel distance measure that
//! nondimensionalizes each channel with normalizers taken from the
//! *measured* trajectory — so it is deliberately not symmetric in its
//! arguments. Heading residuals are wrapped in both.

use thiserror::Error;

use crate::angle::wrap_diff;
use crate::dynamics::{simulate, SimError, Trajectory, VesselConfig};
use crate::forces::{EnvInput, KeyParams};
use crate::real::Real;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("knot count mismatch: measured {measured}, predicted {predicted}")]
    KnotMismatch { measured: usize, predicted: usize },
    #[error("degenerate measured trajectory: {what}")]
    Degenerate { what: &'static str },
    #[error("empty test set")]
    EmptyTestSet,
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Per-dimension mean absolute deviation over knots `1..=K` for the six
/// dynamic channels `(x, y, psi, u, v, r)`. Heading residuals are wrapped
/// to `(-pi, pi]`. Symmetric in its arguments.
pub fn manhattan_distance<T: Real>(
    measured: &Trajectory<T>,
    predicted: &Trajectory<T>,
) -> Result<[T; 6], MetricError> {
    if measured.states.len() != predicted.states.len() {
        return Err(MetricError::KnotMismatch {
            measured: measured.states.len(),
            predicted: predicted.states.len(),
        });
    }
    let steps = measured.knots();
    if steps == 0 {
        return Err(MetricError::Degenerate {
            what: "no knots to compare",
        });
    }
    let mut sums = [T::zero(); 6];
    for (sm, sp) in measured.states.iter().zip(predicted.states.iter()).skip(1) {
        sums[0] += (sm.x - sp.x).abs();
        sums[1] += (sm.y - sp.y).abs();
        sums[2] += wrap_diff(sm.psi, sp.psi).abs();
        sums[3] += (sm.u - sp.u).abs();
        sums[4] += (sm.v - sp.v).abs();
        sums[5] += (sm.r - sp.r).abs();
    }
    let count = T::of(steps as f64);
    Ok(sums.map(|s| s / count))
}

/// Scalar vessel distance measure:
/// `100/K * sum_k(|dx|/L + |dy|/L + |dpsi|/pi + |du|/U + |dv|/U + |dr|/r_max)`
/// with path length `L` and mean speed `U` of the measured trajectory.
pub fn cvdm<T: Real>(
    measured: &Trajectory<T>,
    predicted: &Trajectory<T>,
    r_max: T,
) -> Result<T, MetricError> {
    if measured.states.len() != predicted.states.len() {
        return Err(MetricError::KnotMismatch {
            measured: measured.states.len(),
            predicted: predicted.states.len(),
        });
    }
    if measured.knots() == 0 {
        return Err(MetricError::Degenerate {
            what: "no knots to compare",
        });
    }
    let path_length = measured.path_length();
    let mean_speed = measured.mean_speed();
    if !(path_length > T::zero()) {
        return Err(MetricError::Degenerate {
            what: "zero path length",
        });
    }
    if !(mean_speed > T::zero()) {
        return Err(MetricError::Degenerate {
            what: "zero mean speed",
        });
    }
    if !(r_max > T::zero()) {
        return Err(MetricError::Degenerate { what: "r_max <= 0" });
    }

    let mut total = T::zero();
    for (sm, sp) in measured.states.iter().zip(predicted.states.iter()).skip(1) {
        total += (sm.x - sp.x).abs() / path_length
            + (sm.y - sp.y).abs() / path_length
            + wrap_diff(sm.psi, sp.psi).abs() / T::PI()
            + (sm.u - sp.u).abs() / mean_speed
            + (sm.v - sp.v).abs() / mean_speed
            + (sm.r - sp.r).abs() / r_max;
    }
    Ok(T::of(100.0) * (total / T::of(measured.knots() as f64)))
}

/// Both distance measures for one measured/predicted pair, along with the
/// normalizers that were used.
#[derive(Clone, Copy, Debug)]
pub struct TrajectoryComparison<T> {
    pub md: [T; 6],
    pub cvdm: T,
    pub path_length: T,
    pub mean_speed: T,
    pub r_max: T,
}

pub fn compare<T: Real>(
    measured: &Trajectory<T>,
    predicted: &Trajectory<T>,
    r_max: T,
) -> Result<TrajectoryComparison<T>, MetricError> {
    Ok(TrajectoryComparison {
        md: manhattan_distance(measured, predicted)?,
        cvdm: cvdm(measured, predicted, r_max)?,
        path_length: measured.path_length(),
        mean_speed: measured.mean_speed(),
        r_max,
    })
}

/// One test scenario's distances and relative improvements.
#[derive(Clone, Debug)]
pub struct ScenarioEvaluation<T> {
    pub md_baseline: [T; 6],
    pub md_fitted: [T; 6],
    /// Per-dimension `100 (MD_b - MD_f) / MD_b`; `None` where the baseline
    /// distance is zero (degenerate channel, excluded with a flag).
    pub md_improvement: [Option<T>; 6],
    /// Mean of the included per-dimension improvements.
    pub average_relative_improvement: Option<T>,
    pub cvdm_baseline: T,
    pub cvdm_fitted: T,
    pub cvdm_improvement: Option<T>,
}

/// Aggregate report over a test set.
#[derive(Clone, Debug)]
pub struct EvaluationReport<T> {
    pub scenarios: Vec<ScenarioEvaluation<T>>,
    /// Median over scenarios of the per-scenario average relative
    /// improvement (percent).
    pub mari: Option<T>,
    /// Median over scenarios of the cvdm relative improvement (percent).
    pub cvdm_improvement: Option<T>,
    /// `100 (1 - Var(cvdm_fitted) / Var(cvdm_baseline))`, sample variance.
    pub consistency: Option<T>,
    /// Human-readable notes about excluded channels or degenerate
    /// statistics.
    pub flags: Vec<String>,
}

pub(crate) fn median<T: Real>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / T::of(2.0)
    })
}

/// Unbiased sample variance; `None` for fewer than two samples.
pub(crate) fn sample_variance<T: Real>(values: &[T]) -> Option<T> {
    if values.len() < 2 {
        return None;
    }
    let count = T::of(values.len() as f64);
    let mean = values.iter().fold(T::zero(), |a, v| a + *v) / count;
    let ss = values
        .iter()
        .fold(T::zero(), |a, v| a + (*v - mean) * (*v - mean));
    Some(ss / (count - T::one()))
}

fn relative_improvement<T: Real>(baseline: T, fitted: T) -> Option<T> {
    (baseline != T::zero()).then(|| T::of(100.0) * (baseline - fitted) / baseline)
}

/// Runs the evaluation protocol: for every test scenario, roll out the
/// baseline and fitted models from the measured initial state and recorded
/// inputs, compare each against the measurement, and aggregate.
pub fn evaluate_protocol<T: Real>(
    test_set: &[Trajectory<T>],
    baseline_params: &KeyParams<T>,
    fitted_params: &KeyParams<T>,
    config: &VesselConfig<T>,
    r_max: T,
) -> Result<EvaluationReport<T>, MetricError> {
    if test_set.is_empty() {
        return Err(MetricError::EmptyTestSet);
    }

    let mut scenarios = Vec::with_capacity(test_set.len());
    let mut flags = Vec::new();
    for (i, measured) in test_set.iter().enumerate() {
        let envs = vec![EnvInput::default(); measured.knots()];
        let roll = |params: &KeyParams<T>| {
            simulate(
                &measured.states[0],
                &measured.inputs,
                &envs,
                params,
                config,
                measured.dt,
            )
        };
        let baseline = compare(measured, &roll(baseline_params)?, r_max)?;
        let fitted = compare(measured, &roll(fitted_params)?, r_max)?;

        let mut md_improvement = [None; 6];
        let mut included = Vec::with_capacity(6);
        for d in 0..6 {
            match relative_improvement(baseline.md[d], fitted.md[d]) {
                Some(imp) => {
                    md_improvement[d] = Some(imp);
                    included.push(imp);
                }
                None => flags.push(format!(
                    "scenario {i}: channel {d} has zero baseline distance, excluded from ARI"
                )),
            }
        }
        let average_relative_improvement = (!included.is_empty()).then(|| {
            included.iter().fold(T::zero(), |a, v| a + *v) / T::of(included.len() as f64)
        });
        let cvdm_improvement = relative_improvement(baseline.cvdm, fitted.cvdm);
        if cvdm_improvement.is_none() {
            flags.push(format!("scenario {i}: zero baseline cvdm, excluded from median"));
        }
        scenarios.push(ScenarioEvaluation {
            md_baseline: baseline.md,
            md_fitted: fitted.md,
            md_improvement,
            average_relative_improvement,
            cvdm_baseline: baseline.cvdm,
            cvdm_fitted: fitted.cvdm,
            cvdm_improvement,
        });
    }

    let aris: Vec<T> = scenarios
        .iter()
        .filter_map(|s| s.average_relative_improvement)
        .collect();
    let cvdm_improvements: Vec<T> = scenarios
        .iter()
        .filter_map(|s| s.cvdm_improvement)
        .collect();
    let baseline_cvdms: Vec<T> = scenarios.iter().map(|s| s.cvdm_baseline).collect();
    let fitted_cvdms: Vec<T> = scenarios.iter().map(|s| s.cvdm_fitted).collect();

    let consistency = match (sample_variance(&baseline_cvdms), sample_variance(&fitted_cvdms)) {
        (Some(vb), Some(vf)) if vb > T::zero() => {
            Some(T::of(100.0) * (T::one() - vf / vb))
        }
        _ => {
            flags.push("baseline cvdm variance degenerate, consistency undefined".into());
            None
        }
    };

    Ok(EvaluationReport {
        mari: median(&aris),
        cvdm_improvement: median(&cvdm_improvements),
        consistency,
        scenarios,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::deg_to_rad;
    use crate::dynamics::{ControlInput, VesselState};
    use crate::workbench::presets;
    use std::f64::consts::PI;

    fn line_trajectory(speed: f64, knots: usize) -> Trajectory<f64> {
        let states: Vec<_> = (0..=knots)
            .map(|k| VesselState {
                x: speed * k as f64,
                u: speed,
                ..VesselState::at_rest()
            })
            .collect();
        Trajectory::new(states, vec![ControlInput::zero(); knots], 1.0).unwrap()
    }

    #[test]
    fn identical_trajectories_have_zero_distance() {
        let t = line_trajectory(2.0, 50);
        assert_eq!(manhattan_distance(&t, &t).unwrap(), [0.0; 6]);
        assert_eq!(cvdm(&t, &t, 0.0314).unwrap(), 0.0);
    }

    #[test]
    fn constant_offset_shows_in_one_channel() {
        let measured = line_trajectory(2.0, 50);
        let mut predicted = measured.clone();
        for s in &mut predicted.states {
            s.y += 2.0;
        }
        let md = manhattan_distance(&measured, &predicted).unwrap();
        assert_eq!(md, [0.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn heading_quarter_turn_gives_fifty() {
        let measured = line_trajectory(2.0, 120);
        let mut predicted = measured.clone();
        for s in predicted.states.iter_mut().skip(1) {
            s.psi = PI / 2.0;
        }
        assert_eq!(cvdm(&measured, &predicted, 0.0314).unwrap(), 50.0);
    }

    #[test]
    fn random_pair_matches_independent_resummation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(17);
        let knots = 60;
        let mut random_traj = || {
            let states: Vec<_> = (0..=knots)
                .map(|_| VesselState {
                    x: rng.gen_range(-500.0..500.0),
                    y: rng.gen_range(-500.0..500.0),
                    psi: rng.gen_range(-3.0..3.0),
                    u: rng.gen_range(0.5..8.0),
                    v: rng.gen_range(-2.0..2.0),
                    r: rng.gen_range(-0.03..0.03),
                    n: rng.gen_range(-200.0..200.0),
                    delta: rng.gen_range(-0.6..0.6),
                })
                .collect();
            Trajectory::new(states, vec![ControlInput::zero(); knots], 1.0).unwrap()
        };
        let measured = random_traj();
        let predicted = random_traj();

        // Independent oracle: per-dimension loops, reverse accumulation.
        let k = knots as f64;
        let mut md_oracle = [0.0f64; 6];
        for d in 0..6 {
            let mut parts: Vec<f64> = (1..=knots)
                .map(|i| {
                    let a: f64 = measured.states[i].channels()[d];
                    let b: f64 = predicted.states[i].channels()[d];
                    if d == 2 {
                        crate::angle::wrap_diff(a, b).abs()
                    } else {
                        (a - b).abs()
                    }
                })
                .collect();
            parts.reverse();
            md_oracle[d] = parts.iter().sum::<f64>() / k;
        }
        let md = manhattan_distance(&measured, &predicted).unwrap();
        for d in 0..6 {
            let rel = (md[d] - md_oracle[d]).abs() / md_oracle[d].abs().max(1e-300);
            assert!(rel < 1e-12, "dim {d}: {} vs {}", md[d], md_oracle[d]);
        }

        let l = measured.path_length();
        let u_bar = measured.mean_speed();
        let mut channel_sums = [0.0f64; 6];
        for i in 1..=knots {
            let a = &measured.states[i];
            let b = &predicted.states[i];
            channel_sums[0] += (a.x - b.x).abs();
            channel_sums[1] += (a.y - b.y).abs();
            channel_sums[2] += crate::angle::wrap_diff(a.psi, b.psi).abs();
            channel_sums[3] += (a.u - b.u).abs();
            channel_sums[4] += (a.v - b.v).abs();
            channel_sums[5] += (a.r - b.r).abs();
        }
        let cvdm_oracle = 100.0 / k
            * (channel_sums[0] / l
                + channel_sums[1] / l
                + channel_sums[2] / PI
                + channel_sums[3] / u_bar
                + channel_sums[4] / u_bar
                + channel_sums[5] / 0.0314);
        let got = cvdm(&measured, &predicted, 0.0314).unwrap();
        let rel = (got - cvdm_oracle).abs() / cvdm_oracle.abs().max(1e-300);
        assert!(rel < 1e-12, "{got} vs {cvdm_oracle}");
    }

    #[test]
    fn cvdm_is_asymmetric_when_normalizers_differ() {
        let slow = line_trajectory(1.0, 50);
        let fast = line_trajectory(3.0, 50);
        let ab = cvdm(&slow, &fast, 0.0314).unwrap();
        let ba = cvdm(&fast, &slow, 0.0314).unwrap();
        assert!(ab > 0.0 && ba > 0.0);
        assert!((ab - ba).abs() > 1e-6);
        // MD stays symmetric.
        assert_eq!(
            manhattan_distance(&slow, &fast).unwrap(),
            manhattan_distance(&fast, &slow).unwrap()
        );
    }

    #[test]
    fn degenerate_measured_trajectory_is_an_error() {
        let rest = Trajectory::new(
            vec![VesselState::<f64>::at_rest(); 11],
            vec![ControlInput::zero(); 10],
            1.0,
        )
        .unwrap();
        let moving = line_trajectory(1.0, 10);
        assert!(matches!(
            cvdm(&rest, &moving, 0.0314),
            Err(MetricError::Degenerate { .. })
        ));
    }

    #[test]
    fn knot_mismatch_is_an_error() {
        let a = line_trajectory(1.0, 10);
        let b = line_trajectory(1.0, 12);
        assert!(matches!(
            manhattan_distance(&a, &b),
            Err(MetricError::KnotMismatch { .. })
        ));
    }

    fn protocol_scenarios() -> (Vec<Trajectory<f64>>, KeyParams<f64>, KeyParams<f64>) {
        let config = presets::ship_a().config;
        let truth = KeyParams::from_f64([
            -0.017, 34187.0, -12568.0, 1594.0, -0.039, 3.193, 0.205, -4.882, 0.048, 0.0746, 1.370,
        ]);
        let baseline = KeyParams::from_f64([
            0.000, 10500.0, -1900.0, 346.0, -0.012, 0.864, 0.182, -1.191, 0.005, -0.1230, 0.779,
        ]);
        let mut test_set = Vec::new();
        for (n_cmd, delta_deg) in [(100.0, 15.0), (110.0, -20.0), (90.0, 5.0)] {
            let initial = VesselState {
                u: 4.0,
                n: n_cmd,
                ..VesselState::at_rest()
            };
            let inputs: Vec<_> = (0..60)
                .map(|k| {
                    ControlInput::new(n_cmd, if k > 5 { deg_to_rad(delta_deg) } else { 0.0 })
                })
                .collect();
            let envs = vec![EnvInput::default(); 60];
            test_set.push(simulate(&initial, &inputs, &envs, &truth, &config, 1.0).unwrap());
        }
        (test_set, baseline, truth)
    }

    #[test]
    fn protocol_with_identical_models_reports_zero() {
        let (test_set, baseline, _) = protocol_scenarios();
        let config = presets::ship_a().config;
        let report =
            evaluate_protocol(&test_set, &baseline, &baseline, &config, 0.0314).unwrap();
        assert_eq!(report.mari, Some(0.0));
        assert_eq!(report.cvdm_improvement, Some(0.0));
        assert_eq!(report.consistency, Some(0.0));
    }

    #[test]
    fn protocol_with_perfect_fitted_model_reports_hundred() {
        let (test_set, baseline, truth) = protocol_scenarios();
        let config = presets::ship_a().config;
        let report = evaluate_protocol(&test_set, &baseline, &truth, &config, 0.0314).unwrap();
        assert_eq!(report.mari, Some(100.0));
        assert_eq!(report.cvdm_improvement, Some(100.0));
        assert_eq!(report.consistency, Some(100.0));
        for s in &report.scenarios {
            assert_eq!(s.cvdm_fitted, 0.0);
        }
    }

    #[test]
    fn protocol_rejects_empty_test_set() {
        let config = presets::ship_a().config;
        let p = KeyParams::zeros();
        assert!(matches!(
            evaluate_protocol::<f64>(&[], &p, &p, &config, 0.0314),
            Err(MetricError::EmptyTestSet)
        ));
    }

    #[test]
    fn median_and_variance_helpers() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median::<f64>(&[]), None);
        assert_eq!(sample_variance(&[1.0]), None);
        assert_eq!(sample_variance(&[1.0, 3.0]), Some(2.0));
    }
}
