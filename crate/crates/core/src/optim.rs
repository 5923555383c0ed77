//! Damped Gauss-Newton (Levenberg-Marquardt) over a retraction, and the
//! null-space extraction used by the linear position solvers.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A nonlinear least-squares problem `min 1/2 |r(x)|^2` over a manifold given
/// by a retraction.
pub trait LeastSquares {
    type State: Clone;

    fn dof(&self) -> usize;
    fn residuals(&self, state: &Self::State) -> DVector<f64>;
    fn retract(&self, state: &Self::State, delta: &DVector<f64>) -> Self::State;

    /// Central-difference Jacobian of the residuals with respect to the
    /// retraction increment at zero.
    fn jacobian(&self, state: &Self::State, r0: &DVector<f64>, step: f64) -> DMatrix<f64> {
        let n = self.dof();
        let mut jac = DMatrix::zeros(r0.len(), n);
        let mut delta = DVector::zeros(n);
        for k in 0..n {
            delta[k] = step;
            let plus = self.residuals(&self.retract(state, &delta));
            delta[k] = -step;
            let minus = self.residuals(&self.retract(state, &delta));
            delta[k] = 0.0;
            let mut col = (plus - minus) / (2.0 * step);
            // angular residuals may wrap across the finite-difference stencil
            for v in col.iter_mut() {
                if !v.is_finite() || v.abs() > 1.0 / step {
                    *v = 0.0;
                }
            }
            jac.set_column(k, &col);
        }
        jac
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LmConfig {
    pub max_iterations: usize,
    pub initial_damping: f64,
    pub fd_step: f64,
    /// Stop when the relative cost decrease of an accepted step falls below this.
    pub cost_tol: f64,
    pub step_tol: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig {
            max_iterations: 200,
            initial_damping: 1e-3,
            fd_step: 1e-6,
            cost_tol: 1e-15,
            step_tol: 1e-14,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LmOutcome<S> {
    pub state: S,
    pub initial_cost: f64,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Cost after each accepted step, starting with the initial cost.
    pub cost_history: Vec<f64>,
}

fn half_sq(r: &DVector<f64>) -> f64 {
    0.5 * r.norm_squared()
}

pub fn levenberg_marquardt<P: LeastSquares>(
    problem: &P,
    initial: P::State,
    config: &LmConfig,
) -> LmOutcome<P::State> {
    let n = problem.dof();
    let mut state = initial;
    let mut r = problem.residuals(&state);
    let mut cost = half_sq(&r);
    let initial_cost = cost;
    let mut history = vec![cost];
    let mut mu = config.initial_damping;
    let mut converged = n == 0 || r.is_empty() || cost == 0.0;
    let mut iterations = 0;

    while !converged && iterations < config.max_iterations {
        iterations += 1;
        let jac = problem.jacobian(&state, &r, config.fd_step);
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        if g.amax() <= 1e-300 {
            converged = true;
            break;
        }
        let mut accepted = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += mu * (jtj[(k, k)] + 1e-12);
            }
            let Some(chol) = a.cholesky() else {
                mu *= 10.0;
                continue;
            };
            let delta = -chol.solve(&g);
            let candidate = problem.retract(&state, &delta);
            let r_new = problem.residuals(&candidate);
            let c_new = half_sq(&r_new);
            if c_new.is_finite() && c_new < cost {
                let rel = (cost - c_new) / cost.max(1e-300);
                state = candidate;
                r = r_new;
                cost = c_new;
                history.push(cost);
                mu = (mu / 3.0).max(1e-12);
                accepted = true;
                if rel < config.cost_tol || delta.amax() < config.step_tol || cost < 1e-30 {
                    converged = true;
                }
                break;
            }
            mu *= 4.0;
            if delta.amax() < config.step_tol {
                break;
            }
        }
        if !accepted {
            // no descent direction left at machine precision
            converged = true;
        }
    }

    LmOutcome {
        state,
        initial_cost,
        cost,
        iterations,
        converged,
        cost_history: history,
    }
}

/// Unit vector spanning the numerical null space of `a`, with the relative
/// size of the smallest singular value. Errors if the null space has more
/// than one dimension at relative tolerance `tol`.
pub fn null_vector(a: &DMatrix<f64>, tol: f64) -> Result<DVector<f64>> {
    let cols = a.ncols();
    if cols == 0 {
        return Err(Error::RankDeficient { nullity: 0 });
    }
    let padded = if a.nrows() < cols {
        let mut m = DMatrix::zeros(cols, cols);
        m.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
        m
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd
        .v_t
        .ok_or_else(|| Error::DegenerateConfiguration("svd failed".into()))?;
    let sv = &svd.singular_values;
    let max = sv.max();
    let nullity = sv.iter().filter(|&&s| s <= tol * max).count();
    if nullity > 1 || max == 0.0 {
        return Err(Error::RankDeficient { nullity });
    }
    let (k, _) = sv
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    Ok(vt.row(k).transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rosenbrock;

    impl LeastSquares for Rosenbrock {
        type State = DVector<f64>;
        fn dof(&self) -> usize {
            2
        }
        fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
            DVector::from_vec(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]])
        }
        fn retract(&self, x: &DVector<f64>, d: &DVector<f64>) -> DVector<f64> {
            x + d
        }
    }

    #[test]
    fn lm_solves_rosenbrock_monotonically() {
        let out = levenberg_marquardt(
            &Rosenbrock,
            DVector::from_vec(vec![-1.2, 1.0]),
            &LmConfig::default(),
        );
        assert!(out.converged);
        assert!((out.state[0] - 1.0).abs() < 1e-9 && (out.state[1] - 1.0).abs() < 1e-9);
        assert!(out.cost_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn null_vector_detects_rank() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let v = null_vector(&a, 1e-10).unwrap();
        assert!((v[2].abs() - 1.0).abs() < 1e-12);
        let b = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        assert_eq!(null_vector(&b, 1e-10), Err(Error::RankDeficient { nullity: 2 }));
    }
}
