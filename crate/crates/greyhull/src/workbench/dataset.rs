//! Dataset and parameter files: plain structured text with a typed header
//! block.
//!
//! All numbers are written with 17 significant digits so values survive a
//! text round trip exactly. Angles that datasets report in degrees (the
//! rudder state and command) are converted at this boundary only; the
//! in-memory records keep the file units, so write -> read -> write is
//! byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::angle::{deg_to_rad, rad_to_deg};
use crate::dynamics::{ControlInput, Trajectory, VesselState};
use crate::workbench::{NoiseSpec, WorkbenchError};
use crate::KeyParams64;

pub const DATASET_HEADER: &str = "greyhull-dataset v1";
pub const PARAMS_HEADER: &str = "greyhull-params v1";
const UNITS_LINE: &str = "units x=m y=m psi=rad u=m/s v=m/s r=rad/s n=rpm delta=deg";

/// Canonical float formatting: 17 significant digits, scientific.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// One trajectory in file units: state rows
/// `[x y psi u v r n delta_deg]`, input rows `[c_n c_delta_deg]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub states: Vec<[f64; 8]>,
    pub inputs: Vec<[f64; 2]>,
}

/// A dataset file: header plus `M` trajectory records.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetFile {
    pub vessel: String,
    pub dt: f64,
    pub knots: usize,
    pub seed: Option<u64>,
    /// Generating parameters, when the data is synthetic.
    pub truth: Option<KeyParams64>,
    pub noise: Option<NoiseSpec>,
    pub records: Vec<TrajectoryRecord>,
}

impl DatasetFile {
    pub fn from_trajectories(
        vessel: &str,
        trajectories: &[Trajectory<f64>],
        seed: Option<u64>,
        truth: Option<KeyParams64>,
        noise: Option<NoiseSpec>,
    ) -> Result<Self, WorkbenchError> {
        let Some(first) = trajectories.first() else {
            return Err(WorkbenchError::Invalid("dataset needs trajectories".into()));
        };
        let knots = first.knots();
        if trajectories.iter().any(|t| t.knots() != knots) {
            return Err(WorkbenchError::Invalid(
                "all trajectories must share one knot count".into(),
            ));
        }
        if trajectories.iter().any(|t| t.dt != first.dt) {
            return Err(WorkbenchError::Invalid(
                "all trajectories must share one dt".into(),
            ));
        }
        let records = trajectories
            .iter()
            .map(|t| TrajectoryRecord {
                states: t
                    .states
                    .iter()
                    .map(|s| {
                        [
                            s.x,
                            s.y,
                            s.psi,
                            s.u,
                            s.v,
                            s.r,
                            s.n,
                            rad_to_deg(s.delta),
                        ]
                    })
                    .collect(),
                inputs: t
                    .inputs
                    .iter()
                    .map(|i| [i.c_n, rad_to_deg(i.c_delta)])
                    .collect(),
            })
            .collect();
        Ok(Self {
            vessel: vessel.to_string(),
            dt: first.dt,
            knots,
            seed,
            truth,
            noise,
            records,
        })
    }

    /// Converts the records back to radian-based trajectories.
    pub fn trajectories(&self) -> Result<Vec<Trajectory<f64>>, WorkbenchError> {
        self.records
            .iter()
            .map(|rec| {
                let states = rec
                    .states
                    .iter()
                    .map(|s| VesselState {
                        x: s[0],
                        y: s[1],
                        psi: s[2],
                        u: s[3],
                        v: s[4],
                        r: s[5],
                        n: s[6],
                        delta: deg_to_rad(s[7]),
                    })
                    .collect();
                let inputs = rec
                    .inputs
                    .iter()
                    .map(|i| ControlInput::new(i[0], deg_to_rad(i[1])))
                    .collect();
                Trajectory::new(states, inputs, self.dt)
                    .map_err(|e| WorkbenchError::Invalid(e.to_string()))
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{DATASET_HEADER}");
        let _ = writeln!(out, "vessel {}", self.vessel);
        let _ = writeln!(out, "dt {}", fmt_g17(self.dt));
        let _ = writeln!(out, "knots {}", self.knots);
        let _ = writeln!(out, "trajectories {}", self.records.len());
        let _ = writeln!(out, "{UNITS_LINE}");
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed {seed}");
        }
        if let Some(truth) = &self.truth {
            let joined: Vec<String> = truth.p.iter().map(|x| fmt_g17(*x)).collect();
            let _ = writeln!(out, "truth {}", joined.join(" "));
        }
        if let Some(noise) = &self.noise {
            let _ = writeln!(
                out,
                "noise {} {} {} {}",
                fmt_g17(noise.sigma_xy),
                fmt_g17(noise.sigma_psi),
                fmt_g17(noise.sigma_uv),
                fmt_g17(noise.sigma_r)
            );
        }
        for (i, rec) in self.records.iter().enumerate() {
            let _ = writeln!(out, "trajectory {i}");
            for s in &rec.states {
                let joined: Vec<String> = s.iter().map(|x| fmt_g17(*x)).collect();
                let _ = writeln!(out, "s {}", joined.join(" "));
            }
            for inp in &rec.inputs {
                let _ = writeln!(out, "i {} {}", fmt_g17(inp[0]), fmt_g17(inp[1]));
            }
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> Result<(), WorkbenchError> {
        fs::write(path, self.to_text()).map_err(|source| WorkbenchError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn parse(text: &str, path: &str) -> Result<Self, WorkbenchError> {
        let err = |line: usize, message: String| WorkbenchError::Parse {
            path: path.to_string(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        let header = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        if header.1.trim() != DATASET_HEADER {
            return Err(err(1, format!("expected header `{DATASET_HEADER}`")));
        }

        let mut vessel = None;
        let mut dt = None;
        let mut knots = None;
        let mut count = None;
        let mut seed = None;
        let mut truth = None;
        let mut noise = None;
        let mut records: Vec<TrajectoryRecord> = Vec::new();

        let parse_floats = |rest: &str, lineno: usize, expect: usize| {
            let fields: Result<Vec<f64>, _> = rest
                .split_whitespace()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| err(lineno, format!("bad number `{s}`")))
                })
                .collect();
            let fields = fields?;
            if fields.len() != expect {
                return Err(err(
                    lineno,
                    format!("expected {expect} numbers, got {}", fields.len()),
                ));
            }
            Ok(fields)
        };

        for (idx, raw) in lines {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, rest) = match line.split_once(char::is_whitespace) {
                Some((k, r)) => (k, r.trim()),
                None => (line, ""),
            };
            match key {
                "vessel" => vessel = Some(rest.to_string()),
                "dt" => dt = Some(parse_floats(rest, lineno, 1)?[0]),
                "knots" => {
                    knots = Some(rest.parse::<usize>().map_err(|_| {
                        err(lineno, format!("bad knot count `{rest}`"))
                    })?)
                }
                "trajectories" => {
                    count = Some(rest.parse::<usize>().map_err(|_| {
                        err(lineno, format!("bad trajectory count `{rest}`"))
                    })?)
                }
                "units" => {
                    // Fixed by the format version; accepted for readability.
                }
                "seed" => {
                    seed = Some(rest.parse::<u64>().map_err(|_| {
                        err(lineno, format!("bad seed `{rest}`"))
                    })?)
                }
                "truth" => {
                    let fields = parse_floats(rest, lineno, 11)?;
                    let mut p = [0.0; 11];
                    p.copy_from_slice(&fields);
                    truth = Some(KeyParams64::new(p));
                }
                "noise" => {
                    let fields = parse_floats(rest, lineno, 4)?;
                    noise = Some(NoiseSpec {
                        sigma_xy: fields[0],
                        sigma_psi: fields[1],
                        sigma_uv: fields[2],
                        sigma_r: fields[3],
                    });
                }
                "trajectory" => {
                    let index: usize = rest.parse().map_err(|_| {
                        err(lineno, format!("bad trajectory index `{rest}`"))
                    })?;
                    if index != records.len() {
                        return Err(err(
                            lineno,
                            format!("trajectory {index} out of order, expected {}", records.len()),
                        ));
                    }
                    records.push(TrajectoryRecord {
                        states: Vec::new(),
                        inputs: Vec::new(),
                    });
                }
                "s" => {
                    let rec = records.last_mut().ok_or_else(|| {
                        err(lineno, "state row before any `trajectory` line".into())
                    })?;
                    let fields = parse_floats(rest, lineno, 8)?;
                    let mut row = [0.0; 8];
                    row.copy_from_slice(&fields);
                    rec.states.push(row);
                }
                "i" => {
                    let rec = records.last_mut().ok_or_else(|| {
                        err(lineno, "input row before any `trajectory` line".into())
                    })?;
                    let fields = parse_floats(rest, lineno, 2)?;
                    rec.inputs.push([fields[0], fields[1]]);
                }
                other => return Err(err(lineno, format!("unknown key `{other}`"))),
            }
        }

        let vessel = vessel.ok_or_else(|| err(0, "missing `vessel`".into()))?;
        let dt = dt.ok_or_else(|| err(0, "missing `dt`".into()))?;
        let knots = knots.ok_or_else(|| err(0, "missing `knots`".into()))?;
        let count = count.ok_or_else(|| err(0, "missing `trajectories`".into()))?;
        if records.len() != count {
            return Err(err(
                0,
                format!("header says {count} trajectories, found {}", records.len()),
            ));
        }
        for (i, rec) in records.iter().enumerate() {
            if rec.states.len() != knots + 1 {
                return Err(err(
                    0,
                    format!(
                        "trajectory {i}: expected {} state rows, found {}",
                        knots + 1,
                        rec.states.len()
                    ),
                ));
            }
            if rec.inputs.len() != knots {
                return Err(err(
                    0,
                    format!(
                        "trajectory {i}: expected {knots} input rows, found {}",
                        rec.inputs.len()
                    ),
                ));
            }
        }
        Ok(Self {
            vessel,
            dt,
            knots,
            seed,
            truth,
            noise,
            records,
        })
    }

    pub fn read_from(path: &Path) -> Result<Self, WorkbenchError> {
        let text = fs::read_to_string(path).map_err(|source| WorkbenchError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }
}

/// Writes a parameter vector file.
pub fn params_to_text(params: &KeyParams64) -> String {
    let joined: Vec<String> = params.p.iter().map(|x| fmt_g17(*x)).collect();
    format!("{PARAMS_HEADER}\n{}\n", joined.join(" "))
}

pub fn write_params(path: &Path, params: &KeyParams64) -> Result<(), WorkbenchError> {
    fs::write(path, params_to_text(params)).map_err(|source| WorkbenchError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn parse_params(text: &str, path: &str) -> Result<KeyParams64, WorkbenchError> {
    let err = |line: usize, message: String| WorkbenchError::Parse {
        path: path.to_string(),
        line,
        message,
    };
    let mut values: Vec<f64> = Vec::new();
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != PARAMS_HEADER {
                return Err(err(lineno, format!("expected header `{PARAMS_HEADER}`")));
            }
            saw_header = true;
            continue;
        }
        for field in line.split_whitespace() {
            values.push(
                field
                    .parse::<f64>()
                    .map_err(|_| err(lineno, format!("bad number `{field}`")))?,
            );
        }
    }
    if values.len() != 11 {
        return Err(err(0, format!("expected 11 parameters, got {}", values.len())));
    }
    let mut p = [0.0; 11];
    p.copy_from_slice(&values);
    Ok(KeyParams64::new(p))
}

pub fn read_params(path: &Path) -> Result<KeyParams64, WorkbenchError> {
    let text = fs::read_to_string(path).map_err(|source| WorkbenchError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_params(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::deg_to_rad;
    use crate::dynamics::{ControlInput, Trajectory, VesselState};

    fn sample_trajectories() -> Vec<Trajectory<f64>> {
        (0..2)
            .map(|t| {
                let states: Vec<_> = (0..=10)
                    .map(|k| VesselState {
                        x: k as f64 * 1.7 + t as f64,
                        y: (k as f64).sin(),
                        psi: 0.01 * k as f64,
                        u: 3.0,
                        v: -0.1,
                        r: 0.002,
                        n: 95.0,
                        delta: deg_to_rad(5.0 + k as f64 * 0.1),
                    })
                    .collect();
                let inputs = vec![ControlInput::new(95.0, deg_to_rad(5.0)); 10];
                Trajectory::new(states, inputs, 1.0).unwrap()
            })
            .collect()
    }

    #[test]
    fn write_read_write_is_byte_identical() {
        let trajectories = sample_trajectories();
        let ds = DatasetFile::from_trajectories(
            "shipA",
            &trajectories,
            Some(42),
            Some(KeyParams64::new([
                -0.017, 34187.0, -12568.0, 1594.0, -0.039, 3.193, 0.205, -4.882, 0.048, 0.0746,
                1.370,
            ])),
            Some(NoiseSpec {
                sigma_xy: 1.0,
                sigma_psi: 0.0,
                sigma_uv: 0.05,
                sigma_r: 0.001,
            }),
        )
        .unwrap();
        let text1 = ds.to_text();
        let parsed = DatasetFile::parse(&text1, "mem").unwrap();
        let text2 = parsed.to_text();
        assert_eq!(text1, text2);
        assert_eq!(ds, parsed);
    }

    #[test]
    fn trajectories_round_trip_values_exactly() {
        // File floats carry 17 significant digits, so the raw records
        // survive exactly; the degree/radian conversion happens once on
        // each side of the boundary.
        let trajectories = sample_trajectories();
        let ds =
            DatasetFile::from_trajectories("shipA", &trajectories, None, None, None).unwrap();
        let text = ds.to_text();
        let parsed = DatasetFile::parse(&text, "mem").unwrap();
        assert_eq!(ds.records, parsed.records);
        let restored = parsed.trajectories().unwrap();
        for (a, b) in trajectories.iter().zip(restored.iter()) {
            for (sa, sb) in a.states.iter().zip(b.states.iter()) {
                assert_eq!(sa.x, sb.x);
                assert_eq!(sa.u, sb.u);
                assert!((sa.delta - sb.delta).abs() <= 1e-18 + 4.0 * f64::EPSILON * sa.delta.abs());
            }
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "greyhull-dataset v1\nvessel shipA\ndt nope\n";
        match DatasetFile::parse(text, "bad") {
            Err(WorkbenchError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_dataset_is_rejected() {
        let trajectories = sample_trajectories();
        let ds =
            DatasetFile::from_trajectories("shipA", &trajectories, None, None, None).unwrap();
        let text = ds.to_text();
        let truncated: String = text.lines().take(12).map(|l| format!("{l}\n")).collect();
        assert!(DatasetFile::parse(&truncated, "mem").is_err());
    }

    #[test]
    fn params_file_round_trip() {
        let p = KeyParams64::new([
            -0.017, 34187.0, -12568.0, 1594.0, -0.039, 3.193, 0.205, -4.882, 0.048, 0.0746, 1.370,
        ]);
        let text = params_to_text(&p);
        let q = parse_params(&text, "mem").unwrap();
        assert_eq!(p.p, q.p);
    }

    #[test]
    fn g17_round_trips_f64() {
        for x in [
            0.0,
            -0.0,
            1.0,
            std::f64::consts::PI,
            -12568.0,
            1e-300,
            6.02214076e23,
            -0.017,
        ] {
            let s = fmt_g17(x);
            let y: f64 = s.parse().unwrap();
            assert_eq!(x.to_bits(), y.to_bits(), "{x} -> {s} -> {y}");
        }
    }
}
