//! Augmented-Lagrangian solver for the constrained fit.
//!
//! Outer loop: classic multiplier updates for the inequality rows with a
//! penalty weight that grows while feasibility stalls. Inner loop: BFGS on
//! the augmented Lagrangian in a diagonally rescaled parameter space (the
//! raw parameters span six orders of magnitude), with an Armijo
//! backtracking line search and projection onto the box bounds.
//!
//! Objective gradients are forward finite differences with the documented
//! per-parameter relative step; the penalty gradient is analytic because
//! every constraint row is linear in the parameters.

use crate::forces::KeyParams;
use crate::real::Real;

use super::constraints::LinearConstraint;
use super::{
    objective, violation_report, FitError, FitProblem, FitResult, Termination,
};

/// Hard cap on outer multiplier updates; the cumulative inner-iteration
/// budget normally binds first.
const MAX_OUTER: usize = 60;

struct AugLag<'a, T: Real> {
    problem: &'a FitProblem<T>,
    rows: &'a [LinearConstraint<T>],
    lambda: &'a [T],
    mu: T,
    scale: [T; 11],
}

impl<'a, T: Real> AugLag<'a, T> {
    fn params(&self, z: &[T; 11]) -> KeyParams<T> {
        let mut p = [T::zero(); 11];
        for j in 0..11 {
            p[j] = z[j] * self.scale[j];
        }
        self.clamp(KeyParams::new(p))
    }

    fn clamp(&self, mut p: KeyParams<T>) -> KeyParams<T> {
        for j in 0..11 {
            p.p[j] = p.p[j]
                .max(self.problem.lower_bounds[j])
                .min(self.problem.upper_bounds[j]);
        }
        p
    }

    fn penalty(&self, p: &KeyParams<T>) -> T {
        let half = T::of(0.5);
        let mut acc = T::zero();
        for (row, &lam) in self.rows.iter().zip(self.lambda.iter()) {
            let shifted = (lam + self.mu * row.value(p)).max(T::zero());
            acc += half * (shifted * shifted - lam * lam) / self.mu;
        }
        acc
    }

    fn value(&self, z: &[T; 11]) -> T {
        let p = self.params(z);
        objective(&p, self.problem) + self.penalty(&p)
    }

    /// Gradient in the rescaled space: forward differences on the
    /// objective (spec step) plus the analytic penalty gradient, both
    /// chained through the diagonal scaling.
    fn gradient(&self, z: &[T; 11]) -> [T; 11] {
        let p = self.params(z);
        let rel = self.problem.options.fd_step_rel;
        let base = objective(&p, self.problem);
        let mut grad_p = [T::zero(); 11];
        for j in 0..11 {
            let h = rel * T::one().max(p.p[j].abs());
            let mut trial = p;
            trial.p[j] = trial.p[j] + h;
            grad_p[j] = (objective(&trial, self.problem) - base) / h;
        }
        for (row, &lam) in self.rows.iter().zip(self.lambda.iter()) {
            let multiplier = (lam + self.mu * row.value(&p)).max(T::zero());
            if multiplier > T::zero() {
                for j in 0..11 {
                    grad_p[j] += multiplier * row.coeffs[j];
                }
            }
        }
        let mut grad_z = [T::zero(); 11];
        for j in 0..11 {
            grad_z[j] = grad_p[j] * self.scale[j];
        }
        grad_z
    }
}

fn inf_norm<T: Real>(v: &[T; 11]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

fn dot<T: Real>(a: &[T; 11], b: &[T; 11]) -> T {
    let mut acc = T::zero();
    for j in 0..11 {
        acc += a[j] * b[j];
    }
    acc
}

/// One BFGS run on the augmented Lagrangian. Returns the new point, the
/// number of iterations consumed, and whether any step was accepted.
fn minimize_inner<T: Real>(al: &AugLag<'_, T>, z0: [T; 11], budget: usize) -> ([T; 11], usize, bool) {
    let mut z = z0;
    let mut value = al.value(&z);
    let mut grad = al.gradient(&z);
    let mut hess_inv = identity();
    let mut moved = false;
    let c1 = T::of(1e-4);

    for iter in 0..budget {
        let gtol = T::of(1e-8) * (T::one() + value.abs());
        if inf_norm(&grad) <= gtol {
            return (z, iter, moved);
        }

        let mut direction = neg_mat_vec(&hess_inv, &grad);
        let mut slope = dot(&grad, &direction);
        if !(slope < T::zero()) {
            hess_inv = identity();
            direction = grad.map(|g| -g);
            slope = dot(&grad, &direction);
        }

        // Armijo backtracking.
        let mut t = T::one();
        let mut accepted = None;
        for _ in 0..45 {
            let mut trial = z;
            for j in 0..11 {
                trial[j] = z[j] + t * direction[j];
            }
            let trial_value = al.value(&trial);
            if trial_value <= value + c1 * t * slope {
                accepted = Some((trial, trial_value));
                break;
            }
            t *= T::of(0.5);
        }
        let Some((z_next, value_next)) = accepted else {
            return (z, iter + 1, moved);
        };

        let grad_next = al.gradient(&z_next);
        let mut s = [T::zero(); 11];
        let mut y = [T::zero(); 11];
        for j in 0..11 {
            s[j] = z_next[j] - z[j];
            y[j] = grad_next[j] - grad[j];
        }
        let sy = dot(&s, &y);
        if sy > T::of(1e-12) * inf_norm(&s) * inf_norm(&y) {
            bfgs_update(&mut hess_inv, &s, &y, sy);
        } else {
            hess_inv = identity();
        }
        z = z_next;
        value = value_next;
        grad = grad_next;
        moved = true;
    }
    (z, budget, moved)
}

fn identity<T: Real>() -> [[T; 11]; 11] {
    let mut m = [[T::zero(); 11]; 11];
    for (j, row) in m.iter_mut().enumerate() {
        row[j] = T::one();
    }
    m
}

fn neg_mat_vec<T: Real>(m: &[[T; 11]; 11], v: &[T; 11]) -> [T; 11] {
    let mut out = [T::zero(); 11];
    for (i, row) in m.iter().enumerate() {
        out[i] = -dot(row, v);
    }
    out
}

/// BFGS inverse-Hessian update
/// `H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T`.
fn bfgs_update<T: Real>(h: &mut [[T; 11]; 11], s: &[T; 11], y: &[T; 11], sy: T) {
    let rho = T::one() / sy;
    let hy: [T; 11] = {
        let mut out = [T::zero(); 11];
        for (i, row) in h.iter().enumerate() {
            out[i] = dot(row, y);
        }
        out
    };
    let yhy = dot(&hy, y);
    for i in 0..11 {
        for j in 0..11 {
            h[i][j] = h[i][j] - rho * (s[i] * hy[j] + hy[i] * s[j])
                + rho * (T::one() + rho * yhy) * s[i] * s[j];
        }
    }
}

/// Solves the constrained fit. Returns the best feasible iterate with
/// diagnostics, or an explicit infeasibility report if no iterate ever
/// satisfied the constraints.
pub fn fit<T: Real>(problem: &FitProblem<T>) -> Result<FitResult<T>, FitError> {
    let opts = problem.options;
    let rows = problem.constraints.rows();
    let mut scale = [T::one(); 11];
    for j in 0..11 {
        scale[j] = T::one().max(problem.p_init.p[j].abs());
    }

    let initial_objective = objective(&problem.p_init, problem);
    let mut lambda = vec![T::zero(); rows.len()];
    let mut mu = opts.initial_penalty;

    let to_z = |p: &KeyParams<T>, scale: &[T; 11]| -> [T; 11] {
        let mut z = [T::zero(); 11];
        for j in 0..11 {
            z[j] = p.p[j] / scale[j];
        }
        z
    };

    // Current iterate (clamped to bounds) and incumbent best feasible point.
    let start = {
        let al = AugLag {
            problem,
            rows: &rows,
            lambda: &lambda,
            mu,
            scale,
        };
        al.clamp(problem.p_init)
    };
    let mut z = to_z(&start, &scale);
    let mut best: Option<(KeyParams<T>, T)> = None;
    {
        let viol = rows
            .iter()
            .fold(T::zero(), |m, row| m.max(row.value(&start)));
        if viol <= opts.feasibility_tol {
            best = Some((start, objective(&start, problem)));
        }
    }

    let mut trace: Vec<T> = Vec::new();
    let mut stall = 0usize;
    let mut inner_total = 0usize;
    let mut prev_viol = T::infinity();
    let mut outer = 0usize;

    let termination = loop {
        outer += 1;
        let budget = opts
            .inner_iterations
            .min(opts.max_iterations.saturating_sub(inner_total))
            .max(1);
        let al = AugLag {
            problem,
            rows: &rows,
            lambda: &lambda,
            mu,
            scale,
        };
        let (z_next, iters, moved) = minimize_inner(&al, z, budget);
        inner_total += iters;
        z = z_next;
        let p = al.params(&z);

        let violations: Vec<T> = rows.iter().map(|row| row.value(&p)).collect();
        let viol = violations
            .iter()
            .fold(T::zero(), |m, g| m.max(*g));
        let eval = super::objective_eval(&p, problem);
        let f = eval.value;
        // A faulted rollout carries the penalty value; never promote it.
        if viol <= opts.feasibility_tol && !eval.faulted {
            let improved = best
                .as_ref()
                .map_or(true, |(_, best_f)| f < *best_f);
            if improved {
                best = Some((p, f));
            }
        }

        if let Some((_, best_f)) = &best {
            trace.push(*best_f);
            if trace.len() >= 2 {
                let prev = trace[trace.len() - 2];
                if prev - *best_f <= opts.objective_rel_tol * T::one().max(best_f.abs()) {
                    stall += 1;
                } else {
                    stall = 0;
                }
            }
            if (!moved && viol <= opts.feasibility_tol) || stall >= opts.stall_iterations {
                break Termination::Converged;
            }
        }
        if inner_total >= opts.max_iterations || outer >= MAX_OUTER {
            break Termination::MaxIterations;
        }

        for (lam, g) in lambda.iter_mut().zip(violations.iter()) {
            *lam = (*lam + mu * *g).max(T::zero());
        }
        if viol > opts.feasibility_tol && viol > T::of(0.25) * prev_viol {
            mu = (mu * opts.penalty_growth).min(opts.max_penalty);
        }
        prev_viol = viol;
    };

    let Some((p_star, final_objective)) = best else {
        let al = AugLag {
            problem,
            rows: &rows,
            lambda: &lambda,
            mu,
            scale,
        };
        let p = al.params(&z);
        let report: Vec<(String, f64)> = violation_report(&p, &problem.constraints)
            .into_iter()
            .map(|(label, v)| (label, v.to_f64_lossy()))
            .collect();
        let max_violation = report.first().map_or(0.0, |(_, v)| *v);
        return Err(FitError::Infeasible {
            max_violation,
            report,
        });
    };

    let final_violations: Vec<T> = rows
        .iter()
        .map(|row| row.value(&p_star).max(T::zero()))
        .collect();
    let per_trajectory_costs = problem.per_trajectory_costs(&p_star);
    Ok(FitResult {
        p_star,
        initial_objective,
        final_objective,
        objective_trace: trace,
        final_violations,
        per_trajectory_costs,
        iterations: outer,
        termination,
    })
}
