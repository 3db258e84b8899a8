//! Worst-case rate certification: assembles the convergence LMI as a small
//! dense SDP, decides strict feasibility behind a swappable backend, and
//! bisects over the rate `rho`.
//!
//! The LMI is homogeneous of degree one in the decision variables `(P, h_f,
//! h_g)` (the constant term is zero), so feasibility is pinned down by the
//! normalization `P >= I` plus box bounds on the filter coefficients and a
//! trace cap on `P`. Strict feasibility is decided by minimizing the largest
//! eigenvalue `t` of the LMI.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lure::{build_plant, AlgorithmParams, ProblemClass};
use crate::ozf::{
    build_augmented_plant, validate_coeffs, AugmentedPlant, BLOCK_RF, BLOCK_RG, BLOCK_UF,
    BLOCK_UG,
};

/// Strictness margin: the LMI is accepted as feasible only with largest
/// eigenvalue at most `-DELTA`.
pub const DELTA: f64 = 1e-8;
/// Box bound on filter coefficients.
pub const H_MAX: f64 = 1e3;
/// Trace cap on `P`, bounding the homogeneous cone away from infinity.
pub const TRACE_CAP: f64 = 1e3;
/// Positive-definiteness floor used inside the solver: `P >= FLOOR * I`.
/// The floor is tiny relative to the coefficient box because near-optimal
/// witnesses need filter-state Lyapunov weights many orders of magnitude
/// below the coefficient scale; the returned witness is rescaled to
/// `P >= I` afterwards (the LMI is homogeneous).
pub const P_FLOOR: f64 = 1e-6;

/// Index map from the scalar decision variables (upper triangle of `P`
/// column-major, then `h_f`, then `h_g`) into the decision vector. The
/// coefficient vectors are two-sided with `2 n_ozf + 1` entries each,
/// indexed by `tau + n_ozf`.
#[derive(Clone, Copy, Debug)]
pub struct VarLayout {
    pub state_dim: usize,
    pub n_ozf: usize,
}

impl VarLayout {
    pub fn num_p(&self) -> usize {
        self.state_dim * (self.state_dim + 1) / 2
    }

    pub fn num_h(&self) -> usize {
        2 * self.n_ozf + 1
    }

    /// Index of `P[(i, j)]` with `i <= j`.
    pub fn p_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j < self.state_dim);
        j * (j + 1) / 2 + i
    }

    /// Index of `h_f[tau]` addressed by the shifted tap `i = tau + n_ozf`.
    pub fn hf_index(&self, i: usize) -> usize {
        self.num_p() + i
    }

    /// Index of `h_g[tau]` addressed by the shifted tap `i = tau + n_ozf`.
    pub fn hg_index(&self, i: usize) -> usize {
        self.num_p() + self.num_h() + i
    }

    pub fn total(&self) -> usize {
        self.num_p() + 2 * self.num_h()
    }
}

/// An affine scalar constraint `sum coeffs[i].1 * y[coeffs[i].0] + constant >= 0`.
#[derive(Clone, Debug)]
pub struct LinearIneq {
    pub coeffs: Vec<(usize, f64)>,
    pub constant: f64,
}

/// The convergence LMI `F0 + sum_i y_i F_i <= 0` with side constraints.
#[derive(Clone, Debug)]
pub struct LmiProblem {
    pub size: usize,
    pub f0: DMatrix<f64>,
    pub basis: Vec<DMatrix<f64>>,
    pub lin: Vec<LinearIneq>,
    pub layout: VarLayout,
}

impl LmiProblem {
    /// Evaluates the LMI at a decision vector.
    pub fn eval(&self, y: &[f64]) -> DMatrix<f64> {
        let mut f = self.f0.clone();
        for (fi, &yi) in self.basis.iter().zip(y) {
            f += fi * yi;
        }
        f
    }
}

fn sym_outer(a: &DVector<f64>, b: &DVector<f64>, diagonal: bool) -> DMatrix<f64> {
    let ab = a * b.transpose();
    if diagonal {
        ab
    } else {
        &ab + ab.transpose()
    }
}

/// Assembles the LMI
/// `[A B]' P [A B] - rho^2 [I 0]' P [I 0] + Pi(h_f, h_g) <= 0`
/// together with the coefficient constraints at this `rho`, the box bounds
/// and the `P` normalization metadata.
///
/// The multiplier term `Pi` is linear in the two-sided coefficients: each
/// causal tap `h_tau` (`tau >= 0`) contributes the symmetrized outer product
/// of the `tau`-delayed `u` row with the live `r` row; each anticausal tap
/// `h_{-s}` (`s >= 1`) contributes `rho^{2s}` times the symmetrized outer
/// product of the live `u` row with the `s`-delayed `r` row. The `rho^{2s}`
/// weight comes from re-indexing the exponentially weighted sum so that
/// future samples never appear.
pub fn assemble_lmi(aug: &AugmentedPlant, rho: f64) -> Result<LmiProblem> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("rho must lie in (0, 1), got {rho}")));
    }
    let n = aug.state_dim();
    let size = n + 2;
    let layout = VarLayout { state_dim: n, n_ozf: aug.n_ozf };
    let mut basis = vec![DMatrix::zeros(size, size); layout.total()];

    // G = [A B] and E = [I 0], both n x (n + 2).
    let mut g = DMatrix::zeros(n, size);
    g.view_mut((0, 0), (n, n)).copy_from(&aug.a);
    g.view_mut((0, n), (n, 2)).copy_from(&aug.b);
    let mut e = DMatrix::zeros(n, size);
    e.view_mut((0, 0), (n, n)).fill_with_identity();

    // P block: the basis matrix of P[(i, j)] is G' E_ij G - rho^2 E' E_ij E,
    // which reduces to symmetrized outer products of the rows of G and E.
    let rho2 = rho * rho;
    for j in 0..n {
        for i in 0..=j {
            let gi = g.row(i).transpose();
            let gj = g.row(j).transpose();
            let ei = e.row(i).transpose();
            let ej = e.row(j).transpose();
            basis[layout.p_index(i, j)] =
                sym_outer(&gi, &gj, i == j) - sym_outer(&ei, &ej, i == j) * rho2;
        }
    }

    // Multiplier block: each tap pairs one delayed copy of the channel's
    // `u` signal with one delayed copy of its `r` signal, both read off the
    // augmented state. The bases are rank-two symmetrized outer products.
    let n_taps = aug.n_ozf;
    for (u_block, r_block, channel) in [(BLOCK_UF, BLOCK_RF, 0usize), (BLOCK_UG, BLOCK_RG, 1)] {
        let idx = |i: usize| {
            if channel == 0 {
                layout.hf_index(i)
            } else {
                layout.hg_index(i)
            }
        };
        let u0 = aug.hist(u_block, 0).transpose();
        let r0 = aug.hist(r_block, 0).transpose();
        for tau in 0..=n_taps {
            let ut = aug.hist(u_block, tau).transpose();
            basis[idx(n_taps + tau)] = sym_outer(&ut, &r0, false);
        }
        for s in 1..=n_taps {
            let rs = aug.hist(r_block, s).transpose();
            basis[idx(n_taps - s)] = sym_outer(&u0, &rs, false) * rho2.powi(s as i32);
        }
    }

    // Linear side constraints: coefficient validity at this rho (the weighted
    // sum is stated in the overflow-free rescaled form, the plain sum as is),
    // sign constraints on the off-center taps, box bounds, and the trace cap
    // pinning the homogeneous cone.
    let mut lin = Vec::new();
    for channel in [0usize, 1] {
        let idx = |i: usize| {
            if channel == 0 {
                layout.hf_index(i)
            } else {
                layout.hg_index(i)
            }
        };
        let weighted: Vec<(usize, f64)> = (0..layout.num_h())
            .map(|i| (idx(i), rho.powi(2 * (2 * n_taps - i) as i32)))
            .collect();
        lin.push(LinearIneq { coeffs: weighted, constant: 0.0 });
        let plain: Vec<(usize, f64)> = (0..layout.num_h()).map(|i| (idx(i), 1.0)).collect();
        lin.push(LinearIneq { coeffs: plain, constant: 0.0 });
        for i in 0..layout.num_h() {
            if i != n_taps {
                lin.push(LinearIneq { coeffs: vec![(idx(i), -1.0)], constant: 0.0 });
            }
            lin.push(LinearIneq { coeffs: vec![(idx(i), 1.0)], constant: H_MAX });
            lin.push(LinearIneq { coeffs: vec![(idx(i), -1.0)], constant: H_MAX });
        }
    }
    let trace: Vec<(usize, f64)> = (0..n).map(|i| (layout.p_index(i, i), -1.0)).collect();
    lin.push(LinearIneq { coeffs: trace, constant: TRACE_CAP });

    Ok(LmiProblem { size, f0: DMatrix::zeros(size, size), basis, lin, layout })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeasStatus {
    Feasible,
    Infeasible,
    NumericalFailure,
}

/// A feasibility witness: the decision variables plus the achieved margin
/// (largest eigenvalue of the LMI, recomputed from the witness itself).
#[derive(Clone, Debug)]
pub struct Witness {
    pub p: DMatrix<f64>,
    pub h_f: Vec<f64>,
    pub h_g: Vec<f64>,
    pub margin: f64,
    pub iterations: u32,
}

#[derive(Clone, Debug)]
pub struct FeasibilityResult {
    pub status: FeasStatus,
    pub witness: Option<Witness>,
}

/// Decides strict feasibility of one assembled LMI. Implementations own
/// their workspaces; a backend value is reusable but not shareable mid-solve.
pub trait FeasibilityBackend {
    fn solve(&self, lmi: &LmiProblem) -> Result<FeasibilityResult>;
}

/// Interior-point backend based on the Clarabel conic solver: minimizes the
/// largest eigenvalue `t` of the LMI subject to the side constraints,
/// `P >= I`, and a floor `t >= -1` that bounds the objective.
#[derive(Clone, Copy, Debug, Default)]
pub struct ClarabelBackend {
    pub tightened: bool,
}

// Scaled upper-triangle vectorization matching Clarabel's PSD triangle cone:
// column-major upper triangle with off-diagonal entries scaled by sqrt(2).
fn svec(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    let s = 2f64.sqrt();
    for j in 0..n {
        for i in 0..=j {
            out.push(if i == j { m[(i, j)] } else { s * m[(i, j)] });
        }
    }
    out
}

fn csc_from_triplets(
    m: usize,
    n: usize,
    entries: &mut Vec<(usize, usize, f64)>,
) -> clarabel::algebra::CscMatrix<f64> {
    entries.sort_by_key(|&(r, c, _)| (c, r));
    let mut colptr = vec![0usize; n + 1];
    let mut rowval = Vec::with_capacity(entries.len());
    let mut nzval = Vec::with_capacity(entries.len());
    for &(r, c, v) in entries.iter() {
        debug_assert!(r < m && c < n);
        colptr[c + 1] += 1;
        rowval.push(r);
        nzval.push(v);
    }
    for c in 0..n {
        colptr[c + 1] += colptr[c];
    }
    clarabel::algebra::CscMatrix::new(m, n, colptr, rowval, nzval)
}

impl FeasibilityBackend for ClarabelBackend {
    fn solve(&self, lmi: &LmiProblem) -> Result<FeasibilityResult> {
        use clarabel::solver::{
            DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
        };

        let nvars = lmi.basis.len();
        let t_col = nvars;
        let ncols = nvars + 1;

        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        let mut b: Vec<f64> = Vec::new();
        let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
        let mut row = 0usize;

        // Nonnegative block: the affine side constraints plus t >= -1.
        for c in &lmi.lin {
            for &(idx, coeff) in &c.coeffs {
                entries.push((row, idx, -coeff));
            }
            b.push(c.constant);
            row += 1;
        }
        entries.push((row, t_col, -1.0));
        b.push(1.0);
        row += 1;
        cones.push(SupportedConeT::NonnegativeConeT(lmi.lin.len() + 1));

        // PSD block: t I - F(y) >= 0.
        {
            let tri = lmi.size * (lmi.size + 1) / 2;
            for (col, fi) in lmi.basis.iter().enumerate() {
                for (k, v) in svec(fi).into_iter().enumerate() {
                    if v != 0.0 {
                        entries.push((row + k, col, v));
                    }
                }
            }
            let eye = svec(&DMatrix::identity(lmi.size, lmi.size));
            for (k, v) in eye.into_iter().enumerate() {
                if v != 0.0 {
                    entries.push((row + k, t_col, -v));
                }
            }
            let f0 = svec(&lmi.f0);
            b.extend(f0.iter().map(|v| -v));
            row += tri;
            cones.push(SupportedConeT::PSDTriangleConeT(lmi.size));
        }

        // PSD block: P - P_FLOOR * I >= 0 (only when P variables exist).
        let n = lmi.layout.state_dim;
        if n > 0 {
            let tri = n * (n + 1) / 2;
            for j in 0..n {
                for i in 0..=j {
                    let col = lmi.layout.p_index(i, j);
                    let mut eij = DMatrix::zeros(n, n);
                    eij[(i, j)] = 1.0;
                    eij[(j, i)] = 1.0;
                    for (k, v) in svec(&eij).into_iter().enumerate() {
                        if v != 0.0 {
                            entries.push((row + k, col, -v));
                        }
                    }
                }
            }
            let eye = svec(&DMatrix::identity(n, n));
            b.extend(eye.iter().map(|v| -v * P_FLOOR));
            row += tri;
            cones.push(SupportedConeT::PSDTriangleConeT(n));
        }

        let a = csc_from_triplets(row, ncols, &mut entries);
        let p = clarabel::algebra::CscMatrix::zeros((ncols, ncols));
        let mut q = vec![0.0; ncols];
        q[t_col] = 1.0;

        let mut settings = DefaultSettings::<f64>::default();
        settings.verbose = false;
        // The KKT system carries dense scaling blocks from the PSD cones;
        // faer's supernodal LDL factors those much faster than the default.
        settings.direct_solve_method = "faer".into();
        if self.tightened {
            settings.max_iter = 400;
            settings.tol_gap_abs = 1e-10;
            settings.tol_gap_rel = 1e-10;
            settings.tol_feas = 1e-10;
        }

        let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings);
        solver.solve();
        let status = solver.solution.status;
        let iterations = solver.info.iterations;
        match status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => {}
            _ => {
                return Ok(FeasibilityResult {
                    status: FeasStatus::NumericalFailure,
                    witness: None,
                })
            }
        }

        let y = &solver.solution.x[..nvars];
        let t = solver.solution.x[t_col];
        if t > -DELTA {
            return Ok(FeasibilityResult { status: FeasStatus::Infeasible, witness: None });
        }

        // Extract and lightly repair the witness: clamp tail coefficients to
        // be nonpositive (solver residuals can leave them epsilon-positive),
        // then recompute the margin from the repaired point.
        let layout = &lmi.layout;
        let mut p_mat = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = y[layout.p_index(i, j)];
                p_mat[(i, j)] = v;
                p_mat[(j, i)] = v;
            }
        }
        let n_ozf = layout.n_ozf;
        let clamp_tails = |h: &mut Vec<f64>| {
            for (i, v) in h.iter_mut().enumerate() {
                if i != n_ozf {
                    *v = v.min(0.0);
                }
            }
        };
        let has_layout = layout.total() == nvars && nvars > 0;
        let mut h_f: Vec<f64> = if has_layout {
            (0..layout.num_h()).map(|i| y[layout.hf_index(i)]).collect()
        } else {
            Vec::new()
        };
        let mut h_g: Vec<f64> = if has_layout {
            (0..layout.num_h()).map(|i| y[layout.hg_index(i)]).collect()
        } else {
            Vec::new()
        };
        clamp_tails(&mut h_f);
        clamp_tails(&mut h_g);

        let mut y_repaired = y.to_vec();
        if has_layout {
            for i in 0..layout.num_h() {
                y_repaired[layout.hf_index(i)] = h_f[i];
                y_repaired[layout.hg_index(i)] = h_g[i];
            }
        }
        let mut margin = lmi.eval(&y_repaired).symmetric_eigenvalues().max();

        // Rescale the homogeneous witness to the P >= I normalization.
        if n > 0 {
            let p_min = p_mat.clone().symmetric_eigenvalues().min();
            if p_min < P_FLOOR * 0.99 {
                return Ok(FeasibilityResult {
                    status: FeasStatus::NumericalFailure,
                    witness: None,
                });
            }
            let c = 1.0 / p_min;
            p_mat *= c;
            for v in h_f.iter_mut().chain(h_g.iter_mut()) {
                *v *= c;
            }
            margin *= c;
        }
        if margin > -DELTA {
            return Ok(FeasibilityResult {
                status: FeasStatus::NumericalFailure,
                witness: None,
            });
        }
        Ok(FeasibilityResult {
            status: FeasStatus::Feasible,
            witness: Some(Witness { p: p_mat, h_f, h_g, margin, iterations }),
        })
    }
}

/// Solves one feasibility problem with the default backend, retrying once
/// with tightened settings on numerical failure.
pub fn solve_feasibility(lmi: &LmiProblem) -> Result<FeasibilityResult> {
    let result = ClarabelBackend::default().solve(lmi)?;
    if result.status == FeasStatus::NumericalFailure {
        return ClarabelBackend { tightened: true }.solve(lmi);
    }
    Ok(result)
}

#[derive(Clone, Copy, Debug)]
pub struct BisectOpts {
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub tol: f64,
}

impl Default for BisectOpts {
    fn default() -> Self {
        Self { rho_lo: 1e-3, rho_hi: 1.0 - 1e-6, tol: 2f64.powi(-10) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProblemSummary {
    pub m_hat: f64,
    #[serde(rename = "L_hat")]
    pub l_hat: f64,
    pub kappa: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverStats {
    pub probes: usize,
    pub iterations: u32,
    pub status: String,
}

/// A certified worst-case linear rate with its Lyapunov witness.
#[derive(Clone, Debug, Serialize)]
pub struct RateCertificate {
    pub rho: f64,
    #[serde(rename = "kappa_P")]
    pub kappa_p: f64,
    pub margin: f64,
    pub n_ozf: usize,
    pub params: AlgorithmParams,
    pub problem: ProblemSummary,
    pub h_f: Vec<f64>,
    pub h_g: Vec<f64>,
    /// Row-major entries of the Lyapunov matrix `P`.
    #[serde(rename = "P")]
    pub p_row_major: Vec<f64>,
    pub solver: SolverStats,
    #[serde(skip)]
    pub p: DMatrix<f64>,
}

impl RateCertificate {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Solver(format!("certificate serialization failed: {e}")))
    }
}

/// Reference rates `rho1 = 1 - 1/sqrt(kappa)` and
/// `rho2 = sqrt(1 - sqrt(2 kappa - 1) / kappa)` for overlay curves.
pub fn theoretical_rates(kappa: f64) -> Result<(f64, f64)> {
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::Domain(format!("kappa must be >= 1, got {kappa}")));
    }
    let rho1 = 1.0 - 1.0 / kappa.sqrt();
    let rho2 = (1.0 - (2.0 * kappa - 1.0).sqrt() / kappa).sqrt();
    Ok((rho1, rho2))
}

/// Bisects the smallest certifiable rate for one algorithm/problem pairing.
///
/// Returns `None` when even `rho_hi` is infeasible ("no certificate"). A
/// post-pass probes `rho - 2 tol`: bisection assumes feasibility is monotone
/// in `rho`, and if the probe is unexpectedly feasible the better point is
/// kept.
pub fn min_rate(
    params: &AlgorithmParams,
    pc: &ProblemClass,
    n_ozf: usize,
    opts: &BisectOpts,
) -> Result<Option<RateCertificate>> {
    if !(opts.rho_lo > 0.0 && opts.rho_lo < opts.rho_hi && opts.rho_hi < 1.0 && opts.tol > 0.0) {
        return Err(Error::Domain(format!(
            "bad bisection options: lo={}, hi={}, tol={}",
            opts.rho_lo, opts.rho_hi, opts.tol
        )));
    }
    let plant = build_plant(params);
    let aug = build_augmented_plant(&plant, pc, n_ozf);
    let mut probes = 0usize;
    // Interior probes treat a numerical failure as "not certifiably
    // feasible" — the bisection then keeps the last verified witness, which
    // is conservative (the reported rate can only be larger).
    let mut probe = |rho: f64| -> Result<FeasibilityResult> {
        probes += 1;
        let lmi = assemble_lmi(&aug, rho)?;
        solve_feasibility(&lmi)
    };

    let top = probe(opts.rho_hi)?;
    if top.status == FeasStatus::NumericalFailure {
        return Err(Error::Solver(format!(
            "feasibility solve failed numerically at rho = {}",
            opts.rho_hi
        )));
    }
    if top.status != FeasStatus::Feasible {
        return Ok(None);
    }
    let mut hi = opts.rho_hi;
    let mut witness = top.witness.expect("feasible result carries a witness");

    let bottom = probe(opts.rho_lo)?;
    if bottom.status == FeasStatus::Feasible {
        hi = opts.rho_lo;
        witness = bottom.witness.expect("feasible result carries a witness");
    } else {
        let mut lo = opts.rho_lo;
        while hi - lo > opts.tol {
            let mid = 0.5 * (lo + hi);
            let res = probe(mid)?;
            if res.status == FeasStatus::Feasible {
                hi = mid;
                witness = res.witness.expect("feasible result carries a witness");
            } else {
                lo = mid;
            }
        }
        // Monotonicity guard.
        let check = hi - 2.0 * opts.tol;
        if check > opts.rho_lo {
            let res = probe(check)?;
            if res.status == FeasStatus::Feasible {
                hi = check;
                witness = res.witness.expect("feasible result carries a witness");
            }
        }
    }

    if !validate_coeffs(&witness.h_f, hi)? || !validate_coeffs(&witness.h_g, hi)? {
        return Err(Error::Solver(
            "witness coefficients fail validation after repair".into(),
        ));
    }
    let eigs = witness.p.clone().symmetric_eigenvalues();
    let kappa_p = eigs.max() / eigs.min();
    let p_row_major: Vec<f64> = {
        let n = witness.p.nrows();
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| witness.p[(i, j)]).collect()
    };
    Ok(Some(RateCertificate {
        rho: hi,
        kappa_p,
        margin: witness.margin,
        n_ozf,
        params: *params,
        problem: ProblemSummary { m_hat: pc.m_hat(), l_hat: pc.l_hat(), kappa: pc.kappa() },
        h_f: witness.h_f.clone(),
        h_g: witness.h_g.clone(),
        p_row_major,
        solver: SolverStats {
            probes,
            iterations: witness.iterations,
            status: "solved".into(),
        },
        p: witness.p,
    }))
}
