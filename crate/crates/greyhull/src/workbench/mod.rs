//! Presets, file formats, scenario generation, and the synthetic-dataset
//! generator behind the command-line tool.

pub mod config;
pub mod dataset;
pub mod plots;
pub mod presets;
pub mod report;
pub mod scenario;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::angle::{rad_to_deg, wrap_angle};
use crate::dynamics::SimError;
use crate::{KeyParams64, Trajectory64};
use dataset::DatasetFile;
use presets::VesselPreset;
use scenario::{roll_out, ScenarioSpec};

#[derive(Debug, Error)]
pub enum WorkbenchError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario {index} rejected: {reason}")]
    ScenarioRejected { index: usize, reason: String },
    #[error("unknown preset or config `{0}`")]
    UnknownPreset(String),
    #[error("bad selector `{0}`: expected baseline | fitted | paper-init | a params file path")]
    BadSelector(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("invalid value: {0}")]
    Invalid(String),
}

/// Per-channel measurement-noise standard deviations. The propeller and
/// rudder channels are never noised; they are replayed inputs.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct NoiseSpec {
    pub sigma_xy: f64,
    pub sigma_psi: f64,
    pub sigma_uv: f64,
    pub sigma_r: f64,
}

impl NoiseSpec {
    pub fn is_zero(&self) -> bool {
        self.sigma_xy == 0.0 && self.sigma_psi == 0.0 && self.sigma_uv == 0.0 && self.sigma_r == 0.0
    }
}

/// Min/max/mean of the generated data per reported channel.
#[derive(Clone, Copy, Debug)]
pub struct DatasetStats {
    pub u: (f64, f64, f64),
    pub v: (f64, f64, f64),
    pub r: (f64, f64, f64),
    pub n: (f64, f64, f64),
    pub delta_deg: (f64, f64, f64),
}

pub fn dataset_stats(trajectories: &[Trajectory64]) -> DatasetStats {
    let collect = |f: &dyn Fn(&crate::VesselState64) -> f64| {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        let mut count = 0usize;
        for t in trajectories {
            for s in &t.states {
                let value = f(s);
                min = min.min(value);
                max = max.max(value);
                sum += value;
                count += 1;
            }
        }
        (min, max, sum / count.max(1) as f64)
    };
    DatasetStats {
        u: collect(&|s| s.u),
        v: collect(&|s| s.v),
        r: collect(&|s| s.r),
        n: collect(&|s| s.n),
        delta_deg: collect(&|s| rad_to_deg(s.delta)),
    }
}

/// Warnings for any channel whose generated range leaves the preset
/// envelope.
pub fn envelope_warnings(stats: &DatasetStats, preset: &VesselPreset) -> Vec<String> {
    let mut warnings = Vec::new();
    let mut check = |name: &str, (min, max, _): (f64, f64, f64), ch: presets::ChannelStats| {
        if min < ch.min || max > ch.max {
            warnings.push(format!(
                "{name} range [{min:.3}, {max:.3}] leaves envelope [{:.3}, {:.3}]",
                ch.min, ch.max
            ));
        }
    };
    check("u", stats.u, preset.envelope.u);
    check("v", stats.v, preset.envelope.v);
    check("r", stats.r, preset.envelope.r);
    check("n", stats.n, preset.envelope.n);
    check("delta", stats.delta_deg, preset.envelope.delta_deg);
    warnings
}

/// Simulates the given scenarios under `truth`, optionally adds Gaussian
/// measurement noise, and packages the result as a dataset file.
///
/// Returns the dataset and any envelope warnings. Scenarios that command
/// past the actuator limits are rejected with their index.
pub fn generate_dataset(
    preset: &VesselPreset,
    scenarios: &[ScenarioSpec],
    truth: &KeyParams64,
    noise: Option<NoiseSpec>,
    seed: u64,
) -> Result<(DatasetFile, Vec<String>), WorkbenchError> {
    let mut trajectories = Vec::with_capacity(scenarios.len());
    for (index, spec) in scenarios.iter().enumerate() {
        spec.validate(&preset.config)
            .map_err(|reason| WorkbenchError::ScenarioRejected { index, reason })?;
        let traj = roll_out(spec, truth, &preset.config).map_err(|e| {
            WorkbenchError::ScenarioRejected {
                index,
                reason: e.to_string(),
            }
        })?;
        trajectories.push(traj);
    }

    if let Some(noise) = noise {
        if !noise.is_zero() {
            let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x6e6f_6973_65);
            apply_noise(&mut trajectories, &noise, &mut rng);
        }
    }

    let stats = dataset_stats(&trajectories);
    let warnings = envelope_warnings(&stats, preset);
    let dataset = DatasetFile::from_trajectories(
        preset.name,
        &trajectories,
        Some(seed),
        Some(*truth),
        noise.filter(|n| !n.is_zero()),
    )?;
    Ok((dataset, warnings))
}

fn apply_noise(trajectories: &mut [Trajectory64], noise: &NoiseSpec, rng: &mut ChaCha20Rng) {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let draw = |sigma: f64, rng: &mut ChaCha20Rng| -> f64 {
        if sigma > 0.0 {
            sigma * normal.sample(rng)
        } else {
            0.0
        }
    };
    for t in trajectories.iter_mut() {
        for s in t.states.iter_mut() {
            s.x += draw(noise.sigma_xy, rng);
            s.y += draw(noise.sigma_xy, rng);
            s.psi = wrap_angle(s.psi + draw(noise.sigma_psi, rng));
            s.u += draw(noise.sigma_uv, rng);
            s.v += draw(noise.sigma_uv, rng);
            s.r += draw(noise.sigma_r, rng);
        }
    }
}

/// Deterministic shuffled train/test split; the test share is rounded to
/// the nearest count and kept at least one when the dataset has more than
/// one trajectory.
pub fn split_train_test(
    count: usize,
    test_fraction: f64,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let mut indices: Vec<usize> = (0..count).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x73_706c_6974);
    // Fisher-Yates.
    for i in (1..indices.len()).rev() {
        let j = rng.gen_range(0..=i);
        indices.swap(i, j);
    }
    let mut test_count = ((count as f64) * test_fraction).round() as usize;
    if count > 1 {
        test_count = test_count.clamp(1, count - 1);
    } else {
        test_count = 0;
    }
    let test = indices.split_off(count - test_count);
    (indices, test)
}

/// Default train/test split share used by the fit command.
pub const TEST_FRACTION: f64 = 0.125;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_deterministic_and_disjoint() {
        let (train_a, test_a) = split_train_test(46, TEST_FRACTION, 7);
        let (train_b, test_b) = split_train_test(46, TEST_FRACTION, 7);
        assert_eq!(train_a, train_b);
        assert_eq!(test_a, test_b);
        assert_eq!(test_a.len(), 6);
        assert_eq!(train_a.len(), 40);
        let mut all: Vec<usize> = train_a.iter().chain(test_a.iter()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..46).collect::<Vec<_>>());

        let (_, test_c) = split_train_test(46, TEST_FRACTION, 8);
        assert_ne!(test_a, test_c, "different seeds should reshuffle");
    }

    #[test]
    fn split_edge_cases() {
        let (train, test) = split_train_test(1, TEST_FRACTION, 1);
        assert_eq!((train.len(), test.len()), (1, 0));
        let (train, test) = split_train_test(2, TEST_FRACTION, 1);
        assert_eq!((train.len(), test.len()), (1, 1));
    }
}
