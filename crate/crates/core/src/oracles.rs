//! Proximal oracles supplied to the iteration engines.
//!
//! The engines work in transformed coordinates and only touch the objectives
//! through exact proximal maps; closed-form oracles for quadratics and the
//! scaled l1 norm cover every instance used in the benchmarks and tests.

use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lasso::soft_threshold_vec;

/// Exact proximal map of a scaled function: `prox(step, z)` returns
/// `argmin_x step * phi(x) + 1/2 ||x - z||^2`.
pub trait ProxOracle {
    fn prox(&self, step: f64, z: &DVector<f64>) -> Result<DVector<f64>>;
}

/// Separable quadratic `phi(x) = 1/2 sum_i curv_i x_i^2 + lin' x`.
#[derive(Clone, Debug)]
pub struct QuadraticOracle {
    pub curv: DVector<f64>,
    pub lin: DVector<f64>,
}

impl QuadraticOracle {
    pub fn new(curv: DVector<f64>, lin: DVector<f64>) -> Result<Self> {
        if curv.len() != lin.len() {
            return Err(Error::Shape("curvature/linear term length mismatch".into()));
        }
        if curv.iter().any(|&c| c < 0.0) {
            return Err(Error::Domain("quadratic oracle needs nonnegative curvature".into()));
        }
        Ok(Self { curv, lin })
    }

    /// `phi(x) = theta/2 ||x||^2`.
    pub fn isotropic(dim: usize, theta: f64) -> Self {
        Self { curv: DVector::from_element(dim, theta), lin: DVector::zeros(dim) }
    }

    /// Random separable quadratic with per-coordinate curvature in `[m, l]`
    /// and a random linear term.
    pub fn random_in_sector<R: Rng>(rng: &mut R, dim: usize, m: f64, l: f64) -> Self {
        let curv = DVector::from_fn(dim, |_, _| rng.gen_range(m..=l));
        let lin = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
        Self { curv, lin }
    }

    pub fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        x.component_mul(&self.curv) + &self.lin
    }
}

impl ProxOracle for QuadraticOracle {
    fn prox(&self, step: f64, z: &DVector<f64>) -> Result<DVector<f64>> {
        if z.len() != self.curv.len() {
            return Err(Error::Shape("prox argument dimension mismatch".into()));
        }
        // (I + step H)^{-1} (z - step q), elementwise for diagonal H.
        Ok(DVector::from_fn(z.len(), |i, _| {
            (z[i] - step * self.lin[i]) / (1.0 + step * self.curv[i])
        }))
    }
}

/// The zero function; its proximal map is the identity.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroOracle;

impl ProxOracle for ZeroOracle {
    fn prox(&self, _step: f64, z: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(z.clone())
    }
}

/// `phi(x) = weight * ||x||_1`; the proximal map is soft-thresholding.
#[derive(Clone, Copy, Debug)]
pub struct L1Oracle {
    pub weight: f64,
}

impl ProxOracle for L1Oracle {
    fn prox(&self, step: f64, z: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(soft_threshold_vec(z, step * self.weight))
    }
}

/// Quadratic-plus-linear-solve oracle for `phi(x) = 1/2 ||F x - b||^2`,
/// backed by a cached Cholesky factorization of `step F'F + I`. The cache is
/// keyed on the step size so repeated calls with the same step reuse the
/// factorization.
pub struct LeastSquaresOracle {
    ftf: nalgebra::DMatrix<f64>,
    ftb: DVector<f64>,
    cache: std::cell::RefCell<Option<(f64, nalgebra::Cholesky<f64, nalgebra::Dyn>)>>,
}

impl LeastSquaresOracle {
    pub fn new(f: &nalgebra::DMatrix<f64>, b: &DVector<f64>) -> Self {
        Self {
            ftf: f.transpose() * f,
            ftb: f.transpose() * b,
            cache: std::cell::RefCell::new(None),
        }
    }
}

impl ProxOracle for LeastSquaresOracle {
    fn prox(&self, step: f64, z: &DVector<f64>) -> Result<DVector<f64>> {
        let mut cache = self.cache.borrow_mut();
        let rebuild = match cache.as_ref() {
            Some((s, _)) => *s != step,
            None => true,
        };
        if rebuild {
            let p = self.ftf.nrows();
            let m = &self.ftf * step + nalgebra::DMatrix::identity(p, p);
            let chol = nalgebra::Cholesky::new(m)
                .ok_or_else(|| Error::Singular("step F'F + I not positive definite".into()))?;
            *cache = Some((step, chol));
        }
        let (_, chol) = cache.as_ref().unwrap();
        Ok(chol.solve(&(z + &self.ftb * step)))
    }
}
