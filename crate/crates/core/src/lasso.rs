//! LASSO case study: sparse regression solved by the ADMM family and by
//! FISTA, with a high-accuracy reference solution for error curves.
//!
//! The splitting is `f(x) = 0.5 ||F x - b||^2`, `g(z) = tau ||z||_1` with
//! consensus constraint `x + z = 0`, so the recursion below is the direct
//! iteration specialized to this pair and `z` converges to `-x_star`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::lure::AlgorithmParams;

/// Scalar soft-thresholding `sign(x) max(|x| - t, 0)`.
pub fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

pub fn soft_threshold_vec(x: &DVector<f64>, t: f64) -> DVector<f64> {
    x.map(|xi| soft_threshold(xi, t))
}

/// A random sparse-regression instance.
#[derive(Clone, Debug)]
pub struct LassoInstance {
    pub f: DMatrix<f64>,
    pub b: DVector<f64>,
    pub tau: f64,
    /// Smallest eigenvalue of `F' F`.
    pub m: f64,
    /// Largest eigenvalue of `F' F`.
    pub l: f64,
}

impl LassoInstance {
    pub fn kappa(&self) -> f64 {
        self.l / self.m
    }

    pub fn dim(&self) -> usize {
        self.f.ncols()
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        let r = &self.f * x - &self.b;
        0.5 * r.norm_squared() + self.tau * x.iter().map(|v| v.abs()).sum::<f64>()
    }
}

/// Draws an instance: `F` is `rows x cols` standard normal with columns
/// normalized to unit Euclidean length, `b = F w0 + eps` for a `nnz`-sparse
/// standard-normal ground truth `w0` and noise `eps ~ N(0, noise_var I)`.
pub fn lasso_generate(
    rows: usize,
    cols: usize,
    nnz: usize,
    noise_var: f64,
    tau: f64,
    seed: u64,
) -> Result<LassoInstance> {
    if rows < cols || nnz > cols || tau <= 0.0 || noise_var < 0.0 {
        return Err(Error::Domain(format!(
            "bad instance shape: rows={rows}, cols={cols}, nnz={nnz}, tau={tau}, noise_var={noise_var}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng));
    for mut col in f.column_iter_mut() {
        let norm = col.norm();
        col /= norm;
    }

    let mut w0 = DVector::zeros(cols);
    // Sparse support: a Fisher-Yates prefix of the index set.
    let mut idx: Vec<usize> = (0..cols).collect();
    for i in 0..nnz {
        let j = rng.gen_range(i..cols);
        idx.swap(i, j);
    }
    for &i in &idx[..nnz] {
        w0[i] = StandardNormal.sample(&mut rng);
    }

    let noise_std = noise_var.sqrt();
    let eps = DVector::from_fn(rows, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        noise_std * z
    });
    let b = &f * &w0 + eps;

    let ftf = f.transpose() * &f;
    let eigs = ftf.symmetric_eigenvalues();
    let m = eigs.min();
    let l = eigs.max();
    if !(m > 0.0) {
        return Err(Error::Singular("F' F is singular; increase rows".into()));
    }
    Ok(LassoInstance { f, b, tau, m, l })
}

/// Iterates of a solver run, one entry per iteration including the start.
#[derive(Clone, Debug)]
pub struct RunTrace {
    pub iterates: Vec<DVector<f64>>,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }
}

/// Runs the ADMM family on the instance from zero initialization.
///
/// The `x`-update solves `(nu1 F'F + I) x = -z_hat - lam_hat + nu1 F' b`,
/// the `z`-update soft-thresholds, and the dual update is
/// `lam_next = alpha x_next + (alpha - 1) z_hat + z_next + lam_hat`, damped
/// by `d (. + lam)` when `d < 1`. Stops early once stationary to `stop_tol`
/// in successive iterates.
pub fn aadmm_lasso_run(
    inst: &LassoInstance,
    params: &AlgorithmParams,
    max_iters: usize,
    stop_tol: f64,
) -> Result<RunTrace> {
    let p = inst.dim();
    let (nu1, nu2, alpha, d) = (params.nu1, params.nu2, params.alpha, params.d);

    let ftf = inst.f.transpose() * &inst.f;
    let ftb = inst.f.transpose() * &inst.b;
    let sys = &ftf * nu1 + DMatrix::identity(p, p);
    let chol: Cholesky<f64, Dyn> = Cholesky::new(sys)
        .ok_or_else(|| Error::Singular("nu1 F'F + I not positive definite".into()))?;

    let mut x = DVector::zeros(p);
    let mut z = DVector::<f64>::zeros(p);
    let mut z_prev = z.clone();
    let mut lam = DVector::<f64>::zeros(p);
    let mut lam_prev = lam.clone();

    let mut trace = RunTrace { iterates: vec![x.clone()] };
    for _ in 0..max_iters {
        let z_hat = &z + (&z - &z_prev) * nu2;
        let lam_hat = &lam + (&lam - &lam_prev) * nu2;

        let rhs = -&z_hat - &lam_hat + &ftb * nu1;
        let x_next = chol.solve(&rhs);
        let z_arg = -&x_next * alpha - &z_hat * (alpha - 1.0) - &lam_hat;
        let z_next = soft_threshold_vec(&z_arg, inst.tau * nu1);
        let base = &x_next * alpha + &z_hat * (alpha - 1.0) + &z_next + &lam_hat;
        // The dual is damped toward its consistency value `base` so the
        // damped scheme keeps the undamped fixed point and still solves the
        // problem exactly. The analysis recursion damps literally
        // (`lambda' = d (base + lambda)`), which shifts the fixed point; that
        // form certifies rates but is useless as a solver. Both coincide at
        // `d = 1`.
        let lam_next = if params.is_damped() { &base * (1.0 - d) + &lam * d } else { base };

        let delta = (&x_next - &x).norm();
        z_prev = std::mem::replace(&mut z, z_next);
        lam_prev = std::mem::replace(&mut lam, lam_next);
        x = x_next;
        trace.iterates.push(x.clone());
        if delta <= stop_tol {
            break;
        }
    }
    Ok(trace)
}

/// FISTA with constant step `1/L` on the same objective, from zero.
pub fn fista_run(inst: &LassoInstance, max_iters: usize, stop_tol: f64) -> Result<RunTrace> {
    let p = inst.dim();
    let lip = inst.l;
    let step = 1.0 / lip;
    let ftf = inst.f.transpose() * &inst.f;
    let ftb = inst.f.transpose() * &inst.b;

    let mut x = DVector::<f64>::zeros(p);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut trace = RunTrace { iterates: vec![x.clone()] };
    for _ in 0..max_iters {
        let grad = &ftf * &y - &ftb;
        let x_next = soft_threshold_vec(&(&y - &grad * step), inst.tau * step);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = &x_next + (&x_next - &x) * ((t - 1.0) / t_next);

        let delta = (&x_next - &x).norm();
        x = x_next;
        t = t_next;
        trace.iterates.push(x.clone());
        if delta <= stop_tol {
            break;
        }
    }
    Ok(trace)
}

/// A high-accuracy minimizer with the residual it achieved.
#[derive(Clone, Debug)]
pub struct ReferenceSolution {
    pub x_star: DVector<f64>,
    pub kkt_residual: f64,
}

/// Computes the reference minimizer by plain ISTA, iterating until the
/// fixed-point residual `||x - S_{tau/L}(x - (1/L) F'(F x - b))||_inf`
/// drops below `tol`.
pub fn reference_solution(inst: &LassoInstance, tol: f64, max_iters: usize) -> Result<ReferenceSolution> {
    let step = 1.0 / inst.l;
    let ftf = inst.f.transpose() * &inst.f;
    let ftb = inst.f.transpose() * &inst.b;

    let mut x = DVector::<f64>::zeros(inst.dim());
    let mut residual = f64::INFINITY;
    for _ in 0..max_iters {
        let grad = &ftf * &x - &ftb;
        let x_next = soft_threshold_vec(&(&x - &grad * step), inst.tau * step);
        residual = (&x - &x_next).amax();
        x = x_next;
        if residual <= tol {
            return Ok(ReferenceSolution { x_star: x, kkt_residual: residual });
        }
    }
    Err(Error::NonConvergence(format!(
        "reference solve stalled at residual {residual:.3e} after {max_iters} iterations"
    )))
}

/// Normalized error curve `||x_k - x_star|| / ||x_0 - x_star||`.
pub fn error_trace(trace: &RunTrace, x_star: &DVector<f64>) -> Vec<f64> {
    let denom = (&trace.iterates[0] - x_star).norm();
    if denom == 0.0 {
        return vec![0.0; trace.len()];
    }
    trace.iterates.iter().map(|x| (x - x_star).norm() / denom).collect()
}

/// First iteration index with normalized error at or below `level`, if any.
pub fn iterations_to_level(errors: &[f64], level: f64) -> Option<usize> {
    errors.iter().position(|&e| e <= level)
}
