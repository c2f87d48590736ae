//! Constrained nonlinear least-squares fitting of the eleven key
//! parameters to a set of measured trajectories.
//!
//! The objective is the mean, over trajectories, of the weighted squared
//! state deviation between a rollout under the candidate parameters and the
//! measurement. Weights nondimensionalize each state channel with
//! normalizers taken from the measured trajectory; the propeller and rudder
//! channels carry zero weight because the rollout replays the recorded
//! inputs.

mod constraints;
mod solver;

pub use constraints::{
    evaluate_constraints, max_violation, violation_report, ConstraintFamily, ConstraintSet,
    LinearConstraint,
};
pub use solver::fit;

use thiserror::Error;

use crate::angle::wrap_diff;
use crate::dynamics::{simulate, SimError, Trajectory, VesselConfig};
use crate::forces::{EnvInput, KeyParams};
use crate::real::Real;

/// Default cap on the yaw-rate normalizer (rad/s).
pub const DEFAULT_R_MAX: f64 = 0.0314;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("invalid fit problem: {0}")]
    Invalid(String),
    #[error("trajectory {index} is degenerate: {what}")]
    DegenerateTrajectory { index: usize, what: &'static str },
    #[error("knot count mismatch: predicted {predicted}, measured {measured}")]
    KnotMismatch { predicted: usize, measured: usize },
    #[error("no feasible point found (max violation {max_violation:e})")]
    Infeasible {
        max_violation: f64,
        report: Vec<(String, f64)>,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Per-trajectory diagonal weights
/// `diag(1/L, 1/L, 1/pi, 1/U, 1/U, 1/r_max, 0, 0)`
/// with the path length `L` and mean speed `U` of the measured trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightSpec<T> {
    pub path_length: T,
    pub mean_speed: T,
    pub r_max: T,
}

impl<T: Real> WeightSpec<T> {
    pub fn from_trajectory(
        measured: &Trajectory<T>,
        r_max: T,
        index: usize,
    ) -> Result<Self, FitError> {
        let path_length = measured.path_length();
        let mean_speed = measured.mean_speed();
        if !(path_length > T::zero()) {
            return Err(FitError::DegenerateTrajectory {
                index,
                what: "zero path length",
            });
        }
        if !(mean_speed > T::zero()) {
            return Err(FitError::DegenerateTrajectory {
                index,
                what: "zero mean speed",
            });
        }
        if !(r_max > T::zero()) {
            return Err(FitError::Invalid("r_max must be positive".into()));
        }
        Ok(Self {
            path_length,
            mean_speed,
            r_max,
        })
    }

    /// Diagonal of the 8x8 weight matrix in state-channel order.
    pub fn diag(&self) -> [T; 8] {
        let one = T::one();
        [
            one / self.path_length,
            one / self.path_length,
            one / T::PI(),
            one / self.mean_speed,
            one / self.mean_speed,
            one / self.r_max,
            T::zero(),
            T::zero(),
        ]
    }
}

/// Weighted squared deviation between a predicted and a measured
/// trajectory, summed over all knots. Heading residuals are wrapped to
/// `(-pi, pi]`; the propeller and rudder channels are skipped (zero
/// weight).
pub fn trajectory_cost<T: Real>(
    predicted: &Trajectory<T>,
    measured: &Trajectory<T>,
    weights: &WeightSpec<T>,
) -> Result<T, FitError> {
    if predicted.states.len() != measured.states.len() {
        return Err(FitError::KnotMismatch {
            predicted: predicted.states.len(),
            measured: measured.states.len(),
        });
    }
    let w = weights.diag();
    let mut acc = T::zero();
    for (sp, sm) in predicted.states.iter().zip(measured.states.iter()) {
        let dx = sm.x - sp.x;
        let dy = sm.y - sp.y;
        let dpsi = wrap_diff(sm.psi, sp.psi);
        let du = sm.u - sp.u;
        let dv = sm.v - sp.v;
        let dr = sm.r - sp.r;
        acc += w[0] * dx * dx
            + w[1] * dy * dy
            + w[2] * dpsi * dpsi
            + w[3] * du * du
            + w[4] * dv * dv
            + w[5] * dr * dr;
    }
    Ok(acc)
}

/// Solver configuration. The defaults pin the tolerances used by the
/// acceptance suite.
#[derive(Clone, Copy, Debug)]
pub struct SolverOptions<T> {
    /// Cap on cumulative inner quasi-Newton iterations.
    pub max_iterations: usize,
    /// Inner iteration budget per outer multiplier update.
    pub inner_iterations: usize,
    /// Feasibility tolerance on the normalized constraint values.
    pub feasibility_tol: T,
    /// Relative objective-decrease tolerance for convergence.
    pub objective_rel_tol: T,
    /// Number of consecutive stalled outer iterations that counts as
    /// converged.
    pub stall_iterations: usize,
    /// Relative forward-difference step for objective gradients.
    pub fd_step_rel: T,
    /// Objective value substituted when a rollout faults.
    pub fault_penalty: T,
    /// Initial augmented-Lagrangian penalty weight.
    pub initial_penalty: T,
    /// Penalty growth factor when feasibility stalls.
    pub penalty_growth: T,
    /// Penalty ceiling.
    pub max_penalty: T,
    /// Yaw-rate normalizer cap for the weights.
    pub r_max: T,
    /// Use each trajectory's own max |r| instead of the global cap.
    pub per_trajectory_r_max: bool,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            inner_iterations: 50,
            feasibility_tol: T::of(1e-6),
            objective_rel_tol: T::of(1e-8),
            stall_iterations: 5,
            fd_step_rel: T::of(1e-6),
            fault_penalty: T::of(1e12),
            initial_penalty: T::of(10.0),
            penalty_growth: T::of(10.0),
            max_penalty: T::of(1e9),
            r_max: T::of(DEFAULT_R_MAX),
            per_trajectory_r_max: false,
        }
    }
}

/// Why the solver stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// Feasible with a stalled objective.
    Converged,
    /// Iteration budget exhausted; best feasible iterate returned.
    MaxIterations,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max-iterations",
        }
    }
}

/// Dataset, weights, bounds, constraints, and solver options for one fit.
#[derive(Clone, Debug)]
pub struct FitProblem<T> {
    pub trajectories: Vec<Trajectory<T>>,
    pub weights: Vec<WeightSpec<T>>,
    pub config: VesselConfig<T>,
    pub p_init: KeyParams<T>,
    pub lower_bounds: [T; 11],
    pub upper_bounds: [T; 11],
    pub constraints: ConstraintSet<T>,
    pub options: SolverOptions<T>,
    envs: Vec<EnvInput<T>>,
}

impl<T: Real> FitProblem<T> {
    pub fn new(
        trajectories: Vec<Trajectory<T>>,
        config: VesselConfig<T>,
        p_init: KeyParams<T>,
        constraints: ConstraintSet<T>,
        options: SolverOptions<T>,
    ) -> Result<Self, FitError> {
        if trajectories.is_empty() {
            return Err(FitError::Invalid("dataset is empty".into()));
        }
        let knots = trajectories[0].knots();
        if knots == 0 {
            return Err(FitError::Invalid("trajectories must have K >= 1".into()));
        }
        if trajectories.iter().any(|t| t.knots() != knots) {
            return Err(FitError::Invalid(
                "all trajectories must share the same knot count".into(),
            ));
        }
        if !p_init.is_finite() {
            return Err(FitError::Invalid("initial parameters not finite".into()));
        }
        config.validate()?;
        constraints.validate()?;

        let mut weights = Vec::with_capacity(trajectories.len());
        for (i, t) in trajectories.iter().enumerate() {
            let r_max = if options.per_trajectory_r_max {
                t.states
                    .iter()
                    .fold(T::zero(), |m, s| m.max(s.r.abs()))
                    .max(T::of(1e-6))
            } else {
                options.r_max
            };
            weights.push(WeightSpec::from_trajectory(t, r_max, i)?);
        }
        let envs = vec![EnvInput::default(); knots];
        Ok(Self {
            trajectories,
            weights,
            config,
            p_init,
            lower_bounds: [-T::infinity(); 11],
            upper_bounds: [T::infinity(); 11],
            constraints,
            options,
            envs,
        })
    }

    /// Rollout under `p` replaying trajectory `i`'s initial state and
    /// inputs.
    fn rollout(&self, p: &KeyParams<T>, i: usize) -> Result<Trajectory<T>, SimError> {
        let measured = &self.trajectories[i];
        simulate(
            &measured.states[0],
            &measured.inputs,
            &self.envs[..measured.knots()],
            p,
            &self.config,
            measured.dt,
        )
    }

    /// Cost of every trajectory under `p`. Faulting rollouts get the fault
    /// penalty.
    pub fn per_trajectory_costs(&self, p: &KeyParams<T>) -> Vec<T> {
        (0..self.trajectories.len())
            .map(|i| match self.rollout(p, i) {
                Ok(predicted) => {
                    trajectory_cost(&predicted, &self.trajectories[i], &self.weights[i])
                        .unwrap_or(self.options.fault_penalty)
                }
                Err(_) => self.options.fault_penalty,
            })
            .collect()
    }
}

/// Result of the objective evaluation including the fault flag.
pub(crate) struct ObjectiveEval<T> {
    pub value: T,
    pub faulted: bool,
}

pub(crate) fn objective_eval<T: Real>(p: &KeyParams<T>, problem: &FitProblem<T>) -> ObjectiveEval<T> {
    if !p.is_finite() {
        return ObjectiveEval {
            value: problem.options.fault_penalty,
            faulted: true,
        };
    }
    let mut total = T::zero();
    let mut faulted = false;
    // Rollouts are independent; the sum runs in index order so repeated
    // evaluations are bit-identical.
    for i in 0..problem.trajectories.len() {
        match problem.rollout(p, i) {
            Ok(predicted) => {
                match trajectory_cost(&predicted, &problem.trajectories[i], &problem.weights[i]) {
                    Ok(cost) => total += cost,
                    Err(_) => {
                        total += problem.options.fault_penalty;
                        faulted = true;
                    }
                }
            }
            Err(_) => {
                total += problem.options.fault_penalty;
                faulted = true;
            }
        }
    }
    ObjectiveEval {
        value: total / T::of(problem.trajectories.len() as f64),
        faulted,
    }
}

/// Mean trajectory cost over the dataset. Faulting rollouts contribute a
/// large finite penalty so line searches stay total.
pub fn objective<T: Real>(p: &KeyParams<T>, problem: &FitProblem<T>) -> T {
    objective_eval(p, problem).value
}

/// Forward-difference gradient with per-parameter relative step
/// `h_j = rel_step * max(1, |p_j|)`. This is the gradient the solver uses.
pub fn forward_gradient<T: Real>(
    f: impl Fn(&KeyParams<T>) -> T,
    p: &KeyParams<T>,
    rel_step: T,
) -> [T; 11] {
    let base = f(p);
    let mut grad = [T::zero(); 11];
    for j in 0..11 {
        let h = rel_step * T::one().max(p.p[j].abs());
        let mut trial = *p;
        trial.p[j] = trial.p[j] + h;
        grad[j] = (f(&trial) - base) / h;
    }
    grad
}

/// Central-difference gradient with per-parameter relative step
/// `h_j = rel_step * max(1, |p_j|)`. Used as the independent oracle.
pub fn central_gradient<T: Real>(
    f: impl Fn(&KeyParams<T>) -> T,
    p: &KeyParams<T>,
    rel_step: T,
) -> [T; 11] {
    let mut grad = [T::zero(); 11];
    for j in 0..11 {
        let h = rel_step * T::one().max(p.p[j].abs());
        let mut hi = *p;
        hi.p[j] = hi.p[j] + h;
        let mut lo = *p;
        lo.p[j] = lo.p[j] - h;
        grad[j] = (f(&hi) - f(&lo)) / (T::of(2.0) * h);
    }
    grad
}

/// Max per-parameter relative discrepancy between two gradients. Near-zero
/// components are compared against a floor tied to the overall gradient
/// scale.
pub fn gradient_discrepancy<T: Real>(solver: &[T; 11], oracle: &[T; 11]) -> T {
    let scale = oracle
        .iter()
        .fold(T::zero(), |m, g| m.max(g.abs()))
        .max(T::min_positive_value());
    let floor = T::of(1e-9) * scale;
    let mut worst = T::zero();
    for j in 0..11 {
        let denom = oracle[j].abs().max(floor);
        worst = worst.max((solver[j] - oracle[j]).abs() / denom);
    }
    worst
}

/// Compares the solver's forward-difference objective gradient against a
/// central-difference oracle with an independent (10x larger) step;
/// returns the max relative discrepancy over the eleven parameters.
pub fn gradient_check<T: Real>(p: &KeyParams<T>, problem: &FitProblem<T>) -> T {
    let f = |q: &KeyParams<T>| objective(q, problem);
    let solver_grad = forward_gradient(f, p, problem.options.fd_step_rel);
    let oracle_grad = central_gradient(f, p, problem.options.fd_step_rel * T::of(10.0));
    gradient_discrepancy(&solver_grad, &oracle_grad)
}

/// Fitted parameters with diagnostics.
#[derive(Clone, Debug)]
pub struct FitResult<T> {
    pub p_star: KeyParams<T>,
    /// Objective at the initial guess (feasible or not).
    pub initial_objective: T,
    /// Objective at `p_star`.
    pub final_objective: T,
    /// Best feasible objective after each outer iteration, non-increasing.
    pub objective_trace: Vec<T>,
    /// Violation magnitude per scalar constraint at `p_star`, in row order.
    pub final_violations: Vec<T>,
    pub per_trajectory_costs: Vec<T>,
    /// Outer (multiplier-update) iterations performed.
    pub iterations: usize,
    pub termination: Termination,
}

impl<T: Real> FitResult<T> {
    pub fn max_violation(&self) -> T {
        self.final_violations
            .iter()
            .fold(T::zero(), |m, v| m.max(*v))
    }
}
