//! Exponentially weighted O'Shea–Zames–Falb multipliers.
//!
//! The multiplier for each nonlinearity is a two-sided (noncausal) FIR
//! filter with taps `h_tau`, `tau = -n ... n`, applied to the input/output
//! pairs of the gradient and subgradient maps. Coefficient vectors are
//! stored with `2 n + 1` entries indexed by `i = tau + n`. The causal taps
//! act on delayed copies of the "slope-gap" signal `u`, the anticausal taps
//! on delayed copies of the complementary signal `r`; both histories are
//! realized as shift registers so the augmented `A`, `B` matrices are fixed
//! and the convergence LMI stays affine in the coefficients.

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::error::{Error, Result};
use crate::lure::{ProblemClass, StateSpacePlant};

/// Filter coefficients for both nonlinearities, validated against a
/// discount factor `rho`. Each vector has odd length `2 n_ozf + 1` and is
/// indexed by `tau + n_ozf` for `tau = -n_ozf ... n_ozf`.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct OzfMultiplier {
    pub n_ozf: usize,
    pub h_f: Vec<f64>,
    pub h_g: Vec<f64>,
    pub rho: f64,
}

impl OzfMultiplier {
    pub fn new(h_f: Vec<f64>, h_g: Vec<f64>, rho: f64) -> Result<Self> {
        if h_f.len() != h_g.len() || h_f.len() % 2 == 0 {
            return Err(Error::Shape(
                "h_f and h_g must be equally long with odd length".into(),
            ));
        }
        let n_ozf = (h_f.len() - 1) / 2;
        if !validate_coeffs(&h_f, rho)? || !validate_coeffs(&h_g, rho)? {
            return Err(Error::Domain("filter coefficients violate the multiplier constraints".into()));
        }
        Ok(Self { n_ozf, h_f, h_g, rho })
    }

    /// The static sector multiplier `h = e_0`.
    pub fn sector(rho: f64) -> Self {
        Self { n_ozf: 0, h_f: vec![1.0], h_g: vec![1.0], rho }
    }
}

/// Checks the coefficient constraints on a two-sided vector of odd length
/// `2 n + 1`: `h_tau <= 0` for all `tau != 0`, the weighted sum
/// `sum_tau rho^{-2 tau} h_tau >= 0`, and the plain sum `sum_tau h_tau >= 0`.
///
/// The weighted sum is evaluated in the rescaled form
/// `sum_tau rho^{2 (n - tau)} h_tau >= 0` (same sign, weights at most one),
/// which avoids the huge `rho^{-2 tau}` weights for small `rho`. A small
/// relative slack absorbs solver round-off in witnesses. The plain sum is
/// not implied by the weighted one once anticausal taps are present, so
/// both are checked.
pub fn validate_coeffs(h: &[f64], rho: f64) -> Result<bool> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("rho must lie in (0, 1), got {rho}")));
    }
    if h.is_empty() || h.len() % 2 == 0 {
        return Err(Error::Shape("coefficient vector must have odd length".into()));
    }
    let n = (h.len() - 1) / 2;
    let mut weighted = 0.0;
    let mut plain = 0.0;
    let mut scale = 0.0;
    for (i, &hi) in h.iter().enumerate() {
        // tau = i - n, weight rho^{2 (n - tau)} = rho^{2 (2 n - i)}.
        let w = rho.powi(2 * (2 * n - i) as i32);
        weighted += w * hi;
        plain += hi;
        scale += hi.abs();
    }
    let tol = 1e-9 * scale.max(1.0);
    let tail_ok = h
        .iter()
        .enumerate()
        .all(|(i, &hi)| i == n || hi <= tol);
    Ok(tail_ok && weighted >= -tol && plain >= -tol)
}

/// A two-input two-output LTI filter whose output matrices are affine in
/// the coefficient vector `h`: `C(h) = c0 + sum_tau h_tau c_h[tau]` and
/// likewise for `D`.
#[derive(Clone, Debug)]
pub struct ParametricFilter {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c0: DMatrix<f64>,
    pub d0: DMatrix<f64>,
    pub c_h: Vec<DMatrix<f64>>,
    pub d_h: Vec<DMatrix<f64>>,
}

impl ParametricFilter {
    pub fn order(&self) -> usize {
        self.c_h.len() - 1
    }

    pub fn realize(&self, h: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
        if h.len() != self.c_h.len() {
            return Err(Error::Shape(format!(
                "expected {} coefficients, got {}",
                self.c_h.len(),
                h.len()
            )));
        }
        let mut c = self.c0.clone();
        let mut d = self.d0.clone();
        for (tau, &htau) in h.iter().enumerate() {
            c += &self.c_h[tau] * htau;
            d += &self.d_h[tau] * htau;
        }
        Ok((self.a.clone(), self.b.clone(), c, d))
    }
}

/// Runs a discrete-time LTI system from `x0` over the given input sequence.
pub fn lti_simulate(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
    x0: &DVector<f64>,
    inputs: &[DVector<f64>],
) -> Vec<DVector<f64>> {
    let mut x = x0.clone();
    let mut out = Vec::with_capacity(inputs.len());
    for u in inputs {
        out.push(c * &x + d * u);
        x = a * &x + b * u;
    }
    out
}

/// Shift-register realization of the causal part of the subgradient-side
/// filter: channel 1 is the FIR filter `sum_{tau >= 0} h_tau z^{-tau}` on
/// the first input, channel 2 is a unit pass-through with no dynamics.
/// Takes the `n + 1` causal coefficients `(h_0, ..., h_n)`.
pub fn filter_g_realization(n_ozf: usize) -> ParametricFilter {
    filter_with_premap(n_ozf, &[1.0, 0.0], &[0.0, 1.0])
}

/// Causal part of the gradient-side filter: the static sector map
/// `[[L, -1], [-m, 1]]` followed by the FIR filter on the first channel.
/// Channel 1 is the `h`-filtered sequence of `L a - grad`, channel 2 is
/// `-m a + grad` unfiltered.
pub fn filter_f_realization(n_ozf: usize, m_hat: f64, l_hat: f64) -> Result<ParametricFilter> {
    if !(m_hat > 0.0 && l_hat >= m_hat) {
        return Err(Error::Domain(format!(
            "invalid sector: m_hat={m_hat}, l_hat={l_hat}"
        )));
    }
    Ok(filter_with_premap(n_ozf, &[l_hat, -1.0], &[-m_hat, 1.0]))
}

// Common shift-register construction. `row1` maps the raw 2-dim input to the
// scalar sequence that gets filtered; `row2` maps it to the unfiltered
// second output channel.
fn filter_with_premap(n: usize, row1: &[f64; 2], row2: &[f64; 2]) -> ParametricFilter {
    let mut a = DMatrix::zeros(n, n);
    for i in 1..n {
        a[(i, i - 1)] = 1.0;
    }
    let mut b = DMatrix::zeros(n, 2);
    if n > 0 {
        b[(0, 0)] = row1[0];
        b[(0, 1)] = row1[1];
    }
    let c0 = DMatrix::zeros(2, n);
    let d0 = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, row2[0], row2[1]]);

    let mut c_h = Vec::with_capacity(n + 1);
    let mut d_h = Vec::with_capacity(n + 1);
    // tau = 0 acts on the current input.
    c_h.push(DMatrix::zeros(2, n));
    d_h.push(DMatrix::from_row_slice(2, 2, &[row1[0], row1[1], 0.0, 0.0]));
    // tau >= 1 reads the registers.
    for tau in 1..=n {
        let mut c = DMatrix::zeros(2, n);
        c[(0, tau - 1)] = 1.0;
        c_h.push(c);
        d_h.push(DMatrix::zeros(2, 2));
    }
    ParametricFilter { a, b, c0, d0, c_h, d_h }
}

/// Register block indices of [`AugmentedPlant`]: the histories of the four
/// scalar signals entering the multiplier quadratic forms.
pub const BLOCK_UF: usize = 0;
pub const BLOCK_RF: usize = 1;
pub const BLOCK_UG: usize = 2;
pub const BLOCK_RG: usize = 3;

/// The algorithm plant augmented with shift registers for the four scalar
/// signals entering the multiplier quadratic forms:
///
/// * `u_f = L v1 - w1` and `r_f = -m v1 + w1` (gradient channel),
/// * `u_g = v2` and `r_g = w2` (subgradient channel).
///
/// States are ordered `(xi, eta_uf, eta_rf, eta_ug, eta_rg)` with `n_ozf`
/// registers per block; `A` and `B` are coefficient-free. Current and
/// delayed copies of each signal are exposed as rows over the stacked
/// vector `[x; w]`, from which the LMI assembles the (affine) multiplier
/// terms: causal taps pair `u(k - tau)` with `r(k)`, anticausal taps pair
/// `u(k)` with `r(k - s)`.
#[derive(Clone, Debug)]
pub struct AugmentedPlant {
    pub n_ozf: usize,
    pub m_hat: f64,
    pub l_hat: f64,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// Live signal rows over `[x; w]`, in block order `(u_f, r_f, u_g, r_g)`.
    pub rows: [RowDVector<f64>; 4],
}

impl AugmentedPlant {
    pub fn state_dim(&self) -> usize {
        4 + 4 * self.n_ozf
    }

    /// Row over `[x; w]` reproducing the block's signal delayed by `tau`
    /// steps: the live row for `tau = 0`, a register readout otherwise.
    pub fn hist(&self, block: usize, tau: usize) -> RowDVector<f64> {
        debug_assert!(block < 4 && tau <= self.n_ozf);
        if tau == 0 {
            return self.rows[block].clone();
        }
        let mut row = RowDVector::zeros(self.state_dim() + 2);
        row[4 + block * self.n_ozf + tau - 1] = 1.0;
        row
    }
}

pub fn build_augmented_plant(
    plant: &StateSpacePlant,
    pc: &ProblemClass,
    n_ozf: usize,
) -> AugmentedPlant {
    let n = n_ozf;
    let dim = 4 + 4 * n;
    let (m_hat, l_hat) = (pc.m_hat(), pc.l_hat());

    // Live rows over [x; w]: plant output rows composed with the sector map.
    let row = |cx: RowDVector<f64>, dw: [f64; 2]| -> RowDVector<f64> {
        let mut r = RowDVector::zeros(dim + 2);
        r.view_mut((0, 0), (1, 4)).copy_from(&cx);
        r[dim] = dw[0];
        r[dim + 1] = dw[1];
        r
    };
    let c1: RowDVector<f64> = RowDVector::from_iterator(4, plant.c_hat.row(0).iter().copied());
    let c2: RowDVector<f64> = RowDVector::from_iterator(4, plant.c_hat.row(1).iter().copied());
    let d1 = [plant.d_hat[(0, 0)], plant.d_hat[(0, 1)]];
    let d2 = [plant.d_hat[(1, 0)], plant.d_hat[(1, 1)]];
    let rows = [
        row(&c1 * l_hat, [l_hat * d1[0] - 1.0, l_hat * d1[1]]),
        row(&c1 * -m_hat, [-m_hat * d1[0] + 1.0, -m_hat * d1[1]]),
        row(c2.clone(), d2),
        row(RowDVector::zeros(4), [0.0, 1.0]),
    ];

    let mut a = DMatrix::zeros(dim, dim);
    let mut b = DMatrix::zeros(dim, 2);
    a.view_mut((0, 0), (4, 4)).copy_from(&plant.a_hat);
    b.view_mut((0, 0), (4, 2)).copy_from(&plant.b_hat);
    for (block, sig) in rows.iter().enumerate() {
        if n == 0 {
            break;
        }
        let off = 4 + block * n;
        a.view_mut((off, 0), (1, dim)).copy_from(&sig.columns(0, dim));
        b.view_mut((off, 0), (1, 2)).copy_from(&sig.columns(dim, 2));
        for i in 1..n {
            a[(off + i, off + i - 1)] = 1.0;
        }
    }

    AugmentedPlant { n_ozf: n, m_hat, l_hat, a, b, rows }
}

/// Error-coordinate input/output pairs of the two nonlinearities:
/// `v[k] = (v1_k, v2_k)` and `w[k] = (grad_f_tilde_k, gamma_tilde_k)`.
#[derive(Clone, Debug)]
pub struct SignalPair {
    pub v: Vec<[f64; 2]>,
    pub w: Vec<[f64; 2]>,
}

/// Checks the exponentially weighted quadratic constraint on sampled
/// signals: for each channel, every partial sum
/// `S_T = sum_{k <= T} rho^{-2k} q_k` with
/// `q_k = 2 (sum_{tau >= 0} h_tau u_{k-tau}) r_k
///      + 2 (sum_{s >= 1} rho^{2s} h_{-s} r_{k-s}) u_k`
/// must be nonnegative (up to a relative float slack). This is the
/// time-shifted rearrangement of the two-sided multiplier sum in which
/// every term of `S_T` involves only samples up to `T`; truncation
/// preserves nonnegativity because a truncated doubly hyperdominant matrix
/// stays doubly hyperdominant.
///
/// Partial sums are accumulated in the equivalent rescaled recursion
/// `S_T = rho^2 S_{T-1} + q_T` (the plain sums scaled by `rho^{2T} > 0`),
/// which never overflows.
pub fn iqc_sample_check(
    mult: &OzfMultiplier,
    pc: &ProblemClass,
    signals: &SignalPair,
    rho: f64,
) -> Result<bool> {
    if signals.v.len() != signals.w.len() {
        return Err(Error::Shape("signal pair lengths differ".into()));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("rho must lie in (0, 1), got {rho}")));
    }
    let n = mult.n_ozf;
    if mult.h_f.len() != 2 * n + 1 || mult.h_g.len() != 2 * n + 1 {
        return Err(Error::Shape("coefficient length does not match n_ozf".into()));
    }
    let horizon = signals.v.len();
    let (m_hat, l_hat) = (pc.m_hat(), pc.l_hat());

    // Per-channel (u, r) signal pairs.
    let mut channels = Vec::with_capacity(2);
    for (pick, h) in [(0usize, &mult.h_f), (1usize, &mult.h_g)] {
        let (u, r): (Vec<f64>, Vec<f64>) = signals
            .v
            .iter()
            .zip(&signals.w)
            .map(|(v, w)| {
                if pick == 0 {
                    (l_hat * v[0] - w[0], -m_hat * v[0] + w[0])
                } else {
                    (v[1], w[1])
                }
            })
            .unzip();
        channels.push((u, r, h));
    }

    let rho2 = rho * rho;
    let mut ok = true;
    for (u, r, h) in &channels {
        let mut sum = 0.0;
        let mut scale = 0.0;
        for k in 0..horizon {
            let mut causal = 0.0;
            let mut anti = 0.0;
            for tau in 0..=n.min(k) {
                causal += h[n + tau] * u[k - tau];
            }
            for s in 1..=n.min(k) {
                anti += rho2.powi(s as i32) * h[n - s] * r[k - s];
            }
            let quad = 2.0 * causal * r[k] + 2.0 * anti * u[k];
            sum = rho2 * sum + quad;
            scale = rho2 * scale + quad.abs();
            if sum < -1e-9 * scale.max(1.0) {
                ok = false;
            }
        }
    }
    Ok(ok)
}
