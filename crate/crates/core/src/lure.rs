//! Dimension-free state-space models of accelerated over-relaxed ADMM.
//!
//! The algorithm family is parametrized by a step size `nu1`, a momentum
//! parameter `nu2`, an over-relaxation parameter `alpha` and a dual damping
//! factor `d` (`d = 1` means undamped). It can be run in two equivalent
//! ways:
//!
//! * [`iterate_direct`] evaluates the proximal recursion in transformed
//!   coordinates `(r, s, lambda)` directly;
//! * [`simulate_lure`] advances the linear system `xi_{k+1} = A xi_k + B w_k`
//!   where `w_k` collects the gradient of the smooth part and a subgradient
//!   of the nonsmooth part.
//!
//! Both paths must produce identical trajectories; the second one is the
//! object the convergence certification reasons about.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix2x4, Matrix4, Matrix4x2};

use crate::error::{Error, Result};
use crate::oracles::ProxOracle;

/// Tuning parameters of the accelerated over-relaxed ADMM.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AlgorithmParams {
    /// Step size, strictly positive.
    pub nu1: f64,
    /// Momentum (extrapolation) weight, nonnegative.
    pub nu2: f64,
    /// Over-relaxation, in `(0, 4]`.
    pub alpha: f64,
    /// Dual damping in `(0, 1]`; `d = 1` disables damping.
    pub d: f64,
}

impl AlgorithmParams {
    pub fn new(nu1: f64, nu2: f64, alpha: f64, d: f64) -> Result<Self> {
        if !(nu1 > 0.0 && nu1.is_finite()) {
            return Err(Error::Domain(format!("nu1 must be positive, got {nu1}")));
        }
        if !(nu2 >= 0.0 && nu2.is_finite()) {
            return Err(Error::Domain(format!("nu2 must be nonnegative, got {nu2}")));
        }
        if !(alpha > 0.0 && alpha <= 4.0) {
            return Err(Error::Domain(format!("alpha must lie in (0, 4], got {alpha}")));
        }
        if !(d > 0.0 && d <= 1.0) {
            return Err(Error::Domain(format!("d must lie in (0, 1], got {d}")));
        }
        Ok(Self { nu1, nu2, alpha, d })
    }

    /// Vanilla ADMM: no momentum, no over-relaxation, no damping.
    pub fn vanilla(nu1: f64) -> Result<Self> {
        Self::new(nu1, 0.0, 1.0, 1.0)
    }

    pub fn is_vanilla(&self) -> bool {
        self.nu2 == 0.0 && self.alpha == 1.0 && self.d == 1.0
    }

    /// The dual update is damped iff `d < 1`.
    pub fn is_damped(&self) -> bool {
        self.d < 1.0
    }
}

/// Normalized sector data of the strongly convex objective.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProblemClass {
    m_hat: f64,
    l_hat: f64,
    kappa: f64,
}

impl ProblemClass {
    pub fn new(m_hat: f64, l_hat: f64) -> Result<Self> {
        if !(m_hat > 0.0 && m_hat.is_finite()) {
            return Err(Error::Domain(format!("m_hat must be positive, got {m_hat}")));
        }
        if !(l_hat >= m_hat && l_hat.is_finite()) {
            return Err(Error::Domain(format!(
                "l_hat must satisfy l_hat >= m_hat > 0, got m_hat={m_hat}, l_hat={l_hat}"
            )));
        }
        Ok(Self { m_hat, l_hat, kappa: l_hat / m_hat })
    }

    /// Sweep normalization: `L_hat = 1`, `m_hat = 1/kappa`.
    pub fn from_kappa(kappa: f64) -> Result<Self> {
        if !(kappa >= 1.0 && kappa.is_finite()) {
            return Err(Error::Domain(format!("kappa must be >= 1, got {kappa}")));
        }
        Self::new(1.0 / kappa, 1.0)
    }

    pub fn m_hat(&self) -> f64 {
        self.m_hat
    }

    pub fn l_hat(&self) -> f64 {
        self.l_hat
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// Transforms raw curvature bounds `(m, L)` of `f` and the extreme singular
/// values of the coupling matrix `A` into the normalized sector
/// `m_hat = m / sigma_max(A)^2`, `L_hat = L / sigma_min(A)^2`.
pub fn normalize_problem(m: f64, l: f64, sigma_max_a: f64, sigma_min_a: f64) -> Result<ProblemClass> {
    if !(m > 0.0 && l >= m) {
        return Err(Error::Domain(format!("need 0 < m <= L, got m={m}, L={l}")));
    }
    if !(sigma_min_a > 0.0 && sigma_max_a >= sigma_min_a) {
        return Err(Error::Domain(format!(
            "need 0 < sigma_min <= sigma_max, got {sigma_min_a}, {sigma_max_a}"
        )));
    }
    ProblemClass::new(m / (sigma_max_a * sigma_max_a), l / (sigma_min_a * sigma_min_a))
}

/// Dimension-free realization of one ADMM variant with state
/// `xi_k = (lambda_{k-1}, s_{k-1}, lambda_k, s_k)`, input
/// `w_k = (grad f(r_{k+1}), gamma_k)` and output `v_k = (r_{k+1}, s_{k+1})`.
///
/// The constant output offset `v_bar = (-c, 0)` is carried as metadata only:
/// `v_bar` stores the multiples of the constraint constant `c` appearing in
/// each output channel. All certification runs in error coordinates where
/// the offset cancels.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpacePlant {
    pub a_hat: Matrix4<f64>,
    pub b_hat: Matrix4x2<f64>,
    pub c_hat: Matrix2x4<f64>,
    pub d_hat: Matrix2<f64>,
    /// Output offset coefficients: `v_bar = (v_bar[0] * c, v_bar[1] * c)`.
    pub v_bar: [f64; 2],
}

impl StateSpacePlant {
    pub const STATE_DIM: usize = 4;
    pub const IN_DIM: usize = 2;
    pub const OUT_DIM: usize = 2;

    /// Step size, recovered from the feed-through structure.
    pub fn nu1(&self) -> f64 {
        -self.d_hat[(0, 0)]
    }

    /// Over-relaxation parameter, recovered from the feed-through structure.
    pub fn alpha(&self) -> f64 {
        self.d_hat[(1, 0)] / self.nu1()
    }
}

/// Builds the four plant matrices for the given parameters.
///
/// For `d = 1` these are the matrices of the undamped realization. For
/// `d < 1` the dual recursion becomes `lambda_{k+1} = d lambda_k - d nu1
/// gamma_k`, which changes exactly row 3 of `A` (to `(0, 0, d, 0)`) and row 3
/// of `B` (to `(0, -d nu1)`); every other entry is unchanged.
pub fn build_plant(p: &AlgorithmParams) -> StateSpacePlant {
    let (nu1, nu2, alpha, d) = (p.nu1, p.nu2, p.alpha, p.d);
    let a_hat = Matrix4::new(
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, d_or_zero(d), 0.0, //
        -nu2 * (alpha - 1.0), -nu2, (alpha - 1.0) * (1.0 + nu2), 1.0 + nu2,
    );
    let b_hat = Matrix4x2::new(
        0.0, 0.0, //
        0.0, 0.0, //
        0.0, -d * nu1, //
        alpha * nu1, -nu1,
    );
    let c_hat = Matrix2x4::new(
        nu2, nu2, -(1.0 + nu2), -(1.0 + nu2), //
        -nu2 * (alpha - 1.0), -nu2, (alpha - 1.0) * (1.0 + nu2), 1.0 + nu2,
    );
    let d_hat = Matrix2::new(-nu1, 0.0, alpha * nu1, -nu1);
    StateSpacePlant { a_hat, b_hat, c_hat, d_hat, v_bar: [-1.0, 0.0] }
}

// Row 3 of A is identically zero when undamped (the dual update is
// lambda_{k+1} = -nu1 gamma_k); damping adds a d*lambda_k term.
fn d_or_zero(d: f64) -> f64 {
    if d < 1.0 {
        d
    } else {
        0.0
    }
}

/// A simulated trajectory of one ADMM variant.
///
/// `states[k]` is the 4 x p stacked state `xi_k` for `k = 0..=K`;
/// `outputs[k]` is the 2 x p output `v_k = (r_{k+1}; s_{k+1})` for
/// `k = 0..K-1`. The `r`, `s`, `lam` sequences are the per-iteration
/// coordinate vectors (`r[k] = r_{k+1}` etc.).
#[derive(Clone, Debug)]
pub struct Trace {
    pub states: Vec<DMatrix<f64>>,
    pub outputs: Vec<DMatrix<f64>>,
    pub r: Vec<DVector<f64>>,
    pub s: Vec<DVector<f64>>,
    pub lam: Vec<DVector<f64>>,
    pub horizon: usize,
}

/// Initial data `(s_{-1}, lambda_{-1}, s_0, lambda_0)` for a run.
#[derive(Clone, Debug)]
pub struct InitState {
    pub s_prev: DVector<f64>,
    pub lam_prev: DVector<f64>,
    pub s0: DVector<f64>,
    pub lam0: DVector<f64>,
}

impl InitState {
    pub fn zero(p: usize) -> Self {
        Self {
            s_prev: DVector::zeros(p),
            lam_prev: DVector::zeros(p),
            s0: DVector::zeros(p),
            lam0: DVector::zeros(p),
        }
    }

    /// Zero momentum at k = 0: replicate `(s_0, lambda_0)` into the history
    /// slots.
    pub fn cold(s0: DVector<f64>, lam0: DVector<f64>) -> Self {
        Self { s_prev: s0.clone(), lam_prev: lam0.clone(), s0, lam0 }
    }

    fn stack(&self) -> DMatrix<f64> {
        let p = self.s0.len();
        let mut xi = DMatrix::zeros(4, p);
        xi.row_mut(0).copy_from(&self.lam_prev.transpose());
        xi.row_mut(1).copy_from(&self.s_prev.transpose());
        xi.row_mut(2).copy_from(&self.lam0.transpose());
        xi.row_mut(3).copy_from(&self.s0.transpose());
        xi
    }
}

/// Runs the proximal recursion directly.
///
/// `prox_f` and `prox_g` must be the exact proximal maps of `nu1 * f_hat`
/// and `nu1 * g_hat`. When `d < 1` the dual update is
/// `lambda_{k+1} = d (alpha r_{k+1} + (alpha - 1) s_hat_k + s_{k+1}
/// - alpha c + lambda_hat_k + lambda_k)`.
pub fn iterate_direct(
    params: &AlgorithmParams,
    prox_f: &dyn ProxOracle,
    prox_g: &dyn ProxOracle,
    c: &DVector<f64>,
    init: &InitState,
    horizon: usize,
) -> Result<Trace> {
    let p = c.len();
    for v in [&init.s_prev, &init.lam_prev, &init.s0, &init.lam0] {
        if v.len() != p {
            return Err(Error::Shape(format!("init dimension {} != c dimension {p}", v.len())));
        }
    }
    let (nu1, nu2, alpha, d) = (params.nu1, params.nu2, params.alpha, params.d);

    let mut s_prev = init.s_prev.clone();
    let mut lam_prev = init.lam_prev.clone();
    let mut s = init.s0.clone();
    let mut lam = init.lam0.clone();

    let mut trace = Trace {
        states: Vec::with_capacity(horizon + 1),
        outputs: Vec::with_capacity(horizon),
        r: Vec::with_capacity(horizon),
        s: Vec::with_capacity(horizon),
        lam: Vec::with_capacity(horizon),
        horizon,
    };
    trace.states.push(init.stack());

    for _ in 0..horizon {
        let s_hat = &s + (&s - &s_prev) * nu2;
        let lam_hat = &lam + (&lam - &lam_prev) * nu2;

        let r_next = prox_f.prox(nu1, &(c - &s_hat - &lam_hat))?;
        let s_next = prox_g.prox(
            nu1,
            &(c * alpha - &r_next * alpha - &s_hat * (alpha - 1.0) - &lam_hat),
        )?;
        let base = &r_next * alpha + &s_hat * (alpha - 1.0) + &s_next - c * alpha + &lam_hat;
        let lam_next = if params.is_damped() { (base + &lam) * d } else { base };

        s_prev = std::mem::replace(&mut s, s_next.clone());
        lam_prev = std::mem::replace(&mut lam, lam_next.clone());

        let mut xi = DMatrix::zeros(4, p);
        xi.row_mut(0).copy_from(&lam_prev.transpose());
        xi.row_mut(1).copy_from(&s_prev.transpose());
        xi.row_mut(2).copy_from(&lam.transpose());
        xi.row_mut(3).copy_from(&s.transpose());
        trace.states.push(xi);

        let mut v = DMatrix::zeros(2, p);
        v.row_mut(0).copy_from(&r_next.transpose());
        v.row_mut(1).copy_from(&s_next.transpose());
        trace.outputs.push(v);

        trace.r.push(r_next);
        trace.s.push(s_next);
        trace.lam.push(lam_next);
    }
    Ok(trace)
}

/// Advances the state-space realization.
///
/// The output equations are implicit (`v` depends on `w` through the
/// feed-through `D`), but `D` is lower triangular so they resolve
/// sequentially through the proximal forms: channel 1 first
/// (`r_{k+1} = prox(u_f)` with `u_f = C_1 xi + c`, then
/// `w_1 = (u_f - r_{k+1}) / nu1`), channel 2 second
/// (`u_g = C_2 xi + alpha nu1 w_1`, `s_{k+1} = prox(u_g)`,
/// `w_2 = (u_g - s_{k+1}) / nu1`). With exact proximal oracles this
/// resolution is exact; a structural guard rejects plants whose feed-through
/// is not lower triangular.
pub fn simulate_lure(
    plant: &StateSpacePlant,
    prox_f: &dyn ProxOracle,
    prox_g: &dyn ProxOracle,
    c: &DVector<f64>,
    xi0: &DMatrix<f64>,
    horizon: usize,
) -> Result<Trace> {
    let p = c.len();
    if xi0.nrows() != 4 || xi0.ncols() != p {
        return Err(Error::Shape(format!(
            "xi0 must be 4 x {p}, got {} x {}",
            xi0.nrows(),
            xi0.ncols()
        )));
    }
    if plant.d_hat[(0, 1)] != 0.0 {
        return Err(Error::NonConvergence(
            "feed-through is not lower triangular; implicit output loop unresolvable".into(),
        ));
    }
    let nu1 = plant.nu1();
    if !(nu1 > 0.0) {
        return Err(Error::Domain(format!("plant implies nonpositive step size {nu1}")));
    }
    let d10 = plant.d_hat[(1, 0)]; // alpha * nu1
    let a_dyn = DMatrix::from_iterator(4, 4, plant.a_hat.iter().copied());
    let b_dyn = DMatrix::from_iterator(4, 2, plant.b_hat.iter().copied());

    let mut xi = xi0.clone();
    let mut trace = Trace {
        states: Vec::with_capacity(horizon + 1),
        outputs: Vec::with_capacity(horizon),
        r: Vec::with_capacity(horizon),
        s: Vec::with_capacity(horizon),
        lam: Vec::with_capacity(horizon),
        horizon,
    };
    trace.states.push(xi.clone());

    for _ in 0..horizon {
        // u_f = C_1 xi + c is the proximal argument of the r-update.
        let c1xi = (plant.c_hat.row(0) * &xi).transpose();
        let u_f = c1xi + c;
        let r_next = prox_f.prox(nu1, &u_f)?;
        let w1 = (&u_f - &r_next) / nu1;

        // u_g = C_2 xi + alpha nu1 w_1 is the proximal argument of the
        // s-update.
        let c2xi = (plant.c_hat.row(1) * &xi).transpose();
        let u_g = c2xi + &w1 * d10;
        let s_next = prox_g.prox(nu1, &u_g)?;
        let w2 = (&u_g - &s_next) / nu1;

        let mut w = DMatrix::zeros(2, p);
        w.row_mut(0).copy_from(&w1.transpose());
        w.row_mut(1).copy_from(&w2.transpose());

        xi = &a_dyn * &xi + &b_dyn * &w;
        trace.states.push(xi.clone());

        let mut v = DMatrix::zeros(2, p);
        v.row_mut(0).copy_from(&r_next.transpose());
        v.row_mut(1).copy_from(&s_next.transpose());
        trace.outputs.push(v);

        trace.lam.push(xi.row(2).transpose());
        trace.r.push(r_next);
        trace.s.push(s_next);
    }
    Ok(trace)
}

/// Closed-loop matrix for quadratic objectives.
///
/// For quadratic `f_hat`, `g_hat` the feedback is linear, `w = Theta v` with
/// `Theta = diag(theta_f, theta_g)`, and the trajectory (in error
/// coordinates) is governed by `A_cl = A + B Theta (I - D Theta)^{-1} C`.
/// Its spectral radius lower-bounds any valid certified rate for a problem
/// class containing `theta_f`.
pub fn closed_loop_matrix(
    plant: &StateSpacePlant,
    pc: &ProblemClass,
    theta_f: f64,
    theta_g: f64,
) -> Result<Matrix4<f64>> {
    let tol = 1e-12;
    if theta_f < pc.m_hat() * (1.0 - tol) - tol || theta_f > pc.l_hat() * (1.0 + tol) + tol {
        return Err(Error::Domain(format!(
            "theta_f = {theta_f} outside the sector [{}, {}]",
            pc.m_hat(),
            pc.l_hat()
        )));
    }
    if theta_g < 0.0 {
        return Err(Error::Domain(format!("theta_g must be nonnegative, got {theta_g}")));
    }
    let theta = Matrix2::new(theta_f, 0.0, 0.0, theta_g);
    let x = Matrix2::identity() - plant.d_hat * theta;
    let x_inv = x
        .try_inverse()
        .ok_or_else(|| Error::Singular("I - D Theta is singular".into()))?;
    Ok(plant.a_hat + plant.b_hat * theta * x_inv * plant.c_hat)
}

/// Spectral radius of a real square matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}
