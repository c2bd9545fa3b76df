//! Levenberg–Marquardt least squares with finite-difference Jacobians.
//!
//! Parameters are optimized in normalized coordinates `u = p / scale`, so a
//! single set of tolerances serves parameters of very different magnitude.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Relative step tolerance.
    pub xtol: f64,
    /// Tolerance on the largest cosine between the residual vector and a
    /// Jacobian column (scale-free gradient test).
    pub gtol: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            xtol: 1e-10,
            gtol: 1e-12,
            fd_step: 6e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// Covariance `(JᵀJ)⁻¹ · SSR/(n − p)` in parameter units.
    pub covariance: DMatrix<f64>,
    /// Sum of squared residuals.
    pub ssr: f64,
    pub converged: bool,
    pub n_iter: usize,
    /// Scale-free gradient measure at the optimum (see [`LmOptions::gtol`]).
    pub gradient_norm: f64,
}

impl LmOutcome {
    pub fn sigmas(&self) -> Vec<f64> {
        (0..self.params.len())
            .map(|i| self.covariance[(i, i)].max(0.0).sqrt())
            .collect()
    }
}

struct Problem<'a, F> {
    residuals: &'a F,
    scale: &'a [f64],
    fd_step: f64,
}

impl<F> Problem<'_, F>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    fn eval(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        let p: Vec<f64> = u.iter().zip(self.scale).map(|(u, s)| u * s).collect();
        let r = (self.residuals)(&p)?;
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite residual".into()));
        }
        Ok(DVector::from_vec(r))
    }

    /// Central-difference Jacobian in normalized coordinates.
    fn jacobian(&self, u: &DVector<f64>, m: usize) -> Result<DMatrix<f64>> {
        let mut jac = DMatrix::zeros(m, u.len());
        for j in 0..u.len() {
            let h = self.fd_step * u[j].abs().max(1.0);
            let mut up = u.clone();
            let mut down = u.clone();
            up[j] += h;
            down[j] -= h;
            let column = match (self.eval(&up), self.eval(&down)) {
                (Ok(a), Ok(b)) => (a - b) / (2.0 * h),
                (Ok(a), Err(_)) => (a - self.eval(u)?) / h,
                (Err(_), Ok(b)) => (self.eval(u)? - b) / h,
                (Err(e), Err(_)) => return Err(e),
            };
            jac.set_column(j, &column);
        }
        Ok(jac)
    }
}

fn gradient_cosine(jac: &DMatrix<f64>, r: &DVector<f64>, grad: &DVector<f64>) -> f64 {
    let rn = r.norm();
    (0..jac.ncols())
        .map(|j| {
            let cn = jac.column(j).norm();
            if cn == 0.0 {
                0.0
            } else {
                grad[j].abs() / (cn * rn)
            }
        })
        .fold(0.0, f64::max)
}

fn pseudo_inverse(m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    match m.clone().try_inverse() {
        Some(inv) if inv.iter().all(|v| v.is_finite()) => inv,
        _ => m
            .svd(true, true)
            .pseudo_inverse(1e-14)
            .unwrap_or_else(|_| DMatrix::from_element(n, n, f64::INFINITY)),
    }
}

/// Minimizes `Σ r_i(p)²` starting from `p0`.
///
/// `scale` sets the natural magnitude of each parameter (non-zero). The
/// residual function may return an error for infeasible parameters; such
/// trial steps are rejected. Errors only if the starting point itself is
/// infeasible.
pub fn levenberg_marquardt<F>(
    residuals: F,
    p0: &[f64],
    scale: &[f64],
    options: &LmOptions,
) -> Result<LmOutcome>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    assert_eq!(p0.len(), scale.len(), "one scale per parameter");
    let scale: Vec<f64> = scale
        .iter()
        .map(|s| {
            if *s != 0.0 && s.is_finite() {
                s.abs()
            } else {
                1.0
            }
        })
        .collect();
    let problem = Problem {
        residuals: &residuals,
        scale: &scale,
        fd_step: options.fd_step,
    };
    let mut u = DVector::from_iterator(p0.len(), p0.iter().zip(&scale).map(|(p, s)| p / s));
    let mut r = problem.eval(&u)?;
    let m = r.len();
    let n = u.len();
    let mut ssr = r.norm_squared();
    let mut jac = problem.jacobian(&u, m)?;
    let mut lambda = -1.0;
    let mut converged = false;
    let mut n_iter = 0;

    while n_iter < options.max_iter {
        n_iter += 1;
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        if ssr == 0.0 || gradient_cosine(&jac, &r, &grad) < options.gtol {
            converged = true;
            break;
        }
        let max_diag = jtj.diagonal().max().max(f64::MIN_POSITIVE);
        if lambda < 0.0 {
            lambda = 1e-3;
        }
        let damping =
            DVector::from_iterator(n, jtj.diagonal().iter().map(|d| d.max(1e-12 * max_diag)));
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lambda * damping[i];
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => {
                    lambda *= 4.0;
                    continue;
                }
            };
            let small = step.norm() < options.xtol * (u.norm() + options.xtol);
            let trial = &u + &step;
            match problem.eval(&trial) {
                Ok(r_new) if r_new.norm_squared() < ssr => {
                    u = trial;
                    r = r_new;
                    ssr = r.norm_squared();
                    lambda = (lambda / 3.0).max(1e-12);
                    accepted = true;
                    converged = small;
                    break;
                }
                _ if small => {
                    converged = true;
                    break;
                }
                _ => lambda *= 4.0,
            }
        }
        if converged || !accepted {
            break;
        }
        jac = problem.jacobian(&u, m)?;
    }

    jac = problem.jacobian(&u, m)?;
    let gradient_norm = gradient_cosine(&jac, &r, &(jac.transpose() * &r));
    let dof = (m as f64 - n as f64).max(1.0);
    let cov_u = pseudo_inverse(jac.transpose() * &jac) * (ssr / dof);
    let s = DMatrix::from_diagonal(&DVector::from_vec(scale.clone()));
    Ok(LmOutcome {
        params: u.iter().zip(&scale).map(|(u, s)| u * s).collect(),
        covariance: &s * cov_u * &s,
        ssr,
        converged,
        n_iter,
        gradient_norm,
    })
}
