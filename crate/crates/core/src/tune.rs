//! Parameter selection: closed-form presets, regression approximations of
//! the grid-search momentum, exhaustive grid search, and condition-number
//! sweep drivers.

use rayon::prelude::*;
use serde::Serialize;

use crate::certify::{min_rate, BisectOpts, RateCertificate};
use crate::error::{Error, Result};
use crate::lure::{AlgorithmParams, ProblemClass};

/// Named parameter-selection schemes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemePreset {
    /// Plain ADMM with `nu1 = 1/L_hat` (the momentum-free baseline step).
    Vanilla,
    /// Vanilla step size with over-relaxation `alpha = 1.45`.
    VanillaOr,
    /// Nesterov-style momentum.
    Nm,
    /// Triple-momentum-style parameters.
    Tm,
    /// Triple momentum with dual damping (default `d = 0.1`).
    TmDamped,
    /// Grid-search regression fit, nominal `alpha = 1`.
    Gs,
    /// Grid-search regression fit with over-relaxation `alpha = 1.4`.
    GsOr,
}

impl SchemePreset {
    pub const ALL: [SchemePreset; 7] = [
        SchemePreset::Vanilla,
        SchemePreset::VanillaOr,
        SchemePreset::Nm,
        SchemePreset::Tm,
        SchemePreset::TmDamped,
        SchemePreset::Gs,
        SchemePreset::GsOr,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SchemePreset::Vanilla => "vanilla",
            SchemePreset::VanillaOr => "vanilla-or",
            SchemePreset::Nm => "nm",
            SchemePreset::Tm => "tm",
            SchemePreset::TmDamped => "tm-damped",
            SchemePreset::Gs => "gs",
            SchemePreset::GsOr => "gs-or",
        }
    }

    /// Generates the preset parameters for a problem class; `d_override`
    /// replaces the preset's damping factor when given.
    pub fn params(&self, pc: &ProblemClass, d_override: Option<f64>) -> Result<AlgorithmParams> {
        let base = match self {
            SchemePreset::Vanilla => {
                AlgorithmParams::new(1.0 / pc.l_hat(), 0.0, 1.0, 1.0)?
            }
            SchemePreset::VanillaOr => {
                AlgorithmParams::new(1.0 / pc.l_hat(), 0.0, 1.45, 1.0)?
            }
            SchemePreset::Nm => nm_params(pc)?,
            SchemePreset::Tm => tm_params(pc)?,
            SchemePreset::TmDamped => {
                let p = tm_params(pc)?;
                AlgorithmParams::new(p.nu1, p.nu2, p.alpha, 0.1)?
            }
            SchemePreset::Gs => gs_params(pc, false)?,
            SchemePreset::GsOr => gs_params(pc, true)?,
        };
        match d_override {
            Some(d) => AlgorithmParams::new(base.nu1, base.nu2, base.alpha, d),
            None => Ok(base),
        }
    }
}

impl std::str::FromStr for SchemePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemePreset::ALL
            .iter()
            .find(|p| p.name() == s)
            .copied()
            .ok_or_else(|| Error::Domain(format!("unknown scheme preset '{s}'")))
    }
}

impl std::fmt::Display for SchemePreset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Nesterov-style parameters: `nu1 = 1/L_hat`,
/// `nu2 = (sqrt(L_hat) - sqrt(m_hat)) / (sqrt(L_hat) + sqrt(m_hat))`.
pub fn nm_params(pc: &ProblemClass) -> Result<AlgorithmParams> {
    let (sl, sm) = (pc.l_hat().sqrt(), pc.m_hat().sqrt());
    AlgorithmParams::new(1.0 / pc.l_hat(), (sl - sm) / (sl + sm), 1.0, 1.0)
}

/// Triple-momentum-style parameters: with `rho = 1 - 1/sqrt(kappa)`,
/// `nu1 = (1 + rho)/L_hat`, `nu2 = rho^2 / (2 - rho)`.
pub fn tm_params(pc: &ProblemClass) -> Result<AlgorithmParams> {
    let rho = 1.0 - 1.0 / pc.kappa().sqrt();
    AlgorithmParams::new((1.0 + rho) / pc.l_hat(), rho * rho / (2.0 - rho), 1.0, 1.0)
}

/// Regression fit of the grid-search momentum (nominal `alpha = 1`).
pub fn gs_nu2(kappa: f64) -> f64 {
    ((kappa + 0.08) / (kappa + 49.9)).powf(0.25) - 0.2
}

/// Regression fit of the grid-search momentum under over-relaxation.
pub fn gs_nu2_or(kappa: f64) -> f64 {
    0.66 * kappa / (kappa + 11.97) + 0.06
}

/// Grid-search preset: TM step size, regression momentum, `alpha = 1` or
/// `1.4`.
pub fn gs_params(pc: &ProblemClass, over_relaxed: bool) -> Result<AlgorithmParams> {
    let tm = tm_params(pc)?;
    let (nu2, alpha) = if over_relaxed {
        (gs_nu2_or(pc.kappa()), 1.4)
    } else {
        (gs_nu2(pc.kappa()), 1.0)
    };
    AlgorithmParams::new(tm.nu1, nu2, alpha, 1.0)
}

/// Axes of the parameter grid; the TM pair is always an exact grid point.
#[derive(Clone, Debug)]
pub struct GridSpec {
    pub nu1: Vec<f64>,
    pub nu2: Vec<f64>,
    pub alpha: Option<Vec<f64>>,
    pub d: f64,
}

impl GridSpec {
    /// The default grid: 20 multiplicative `nu1` points over `TM x [1/4, 1]`
    /// with the TM step size as the exact top point (step sizes beyond TM
    /// trade stability margin for rate and are excluded); 20 linear `nu2`
    /// points over `[0, 0.95]` shifted so the TM momentum is a grid point;
    /// optionally `alpha` in `{0.2, 0.4, ..., 4.0}`.
    pub fn centered(pc: &ProblemClass, points: usize, with_alpha: bool) -> Result<Self> {
        if points == 0 {
            return Err(Error::Domain("grid needs at least one point per axis".into()));
        }
        let tm = tm_params(pc)?;
        let nu1 = if points == 1 {
            vec![tm.nu1]
        } else {
            let lo = 0.25f64.ln();
            (0..points)
                .map(|i| tm.nu1 * (lo - lo * i as f64 / (points - 1) as f64).exp())
                .collect()
        };
        let nu2 = if points == 1 {
            vec![tm.nu2]
        } else {
            let step = 0.95 / (points - 1) as f64;
            let shift = tm.nu2 - (tm.nu2 / step).round() * step;
            (0..points)
                .map(|i| (i as f64 * step + shift).max(0.0))
                .collect()
        };
        let alpha = with_alpha.then(|| (1..=20).map(|i| 0.2 * i as f64).collect());
        Ok(Self { nu1, nu2, alpha, d: 1.0 })
    }
}

/// One evaluated grid point. `rho` is absent when the point has no
/// certificate; `failed` marks solver breakdowns (distinct from clean
/// infeasibility).
#[derive(Clone, Debug, Serialize)]
pub struct GridPoint {
    pub nu1: f64,
    pub nu2: f64,
    pub alpha: f64,
    pub d: f64,
    pub rho: Option<f64>,
    pub kappa_p: Option<f64>,
    pub failed: bool,
}

#[derive(Debug)]
pub struct GridSearchResult {
    pub best: Option<(AlgorithmParams, RateCertificate)>,
    pub grid: Vec<GridPoint>,
}

/// Certifies every grid point and returns the argmin of the certified rate.
/// Ties break toward smaller `nu2`, then smaller `alpha`, then smaller
/// `nu1`. Per-point failures are recorded without aborting the grid.
pub fn grid_search(
    pc: &ProblemClass,
    spec: &GridSpec,
    n_ozf: usize,
    opts: &BisectOpts,
) -> Result<GridSearchResult> {
    let alphas = spec.alpha.clone().unwrap_or_else(|| vec![1.0]);
    let mut points = Vec::new();
    for &nu1 in &spec.nu1 {
        for &nu2 in &spec.nu2 {
            for &alpha in &alphas {
                points.push((nu1, nu2, alpha));
            }
        }
    }

    let evaluated: Vec<(GridPoint, Option<(AlgorithmParams, RateCertificate)>)> = points
        .par_iter()
        .map(|&(nu1, nu2, alpha)| {
            let params = match AlgorithmParams::new(nu1, nu2, alpha, spec.d) {
                Ok(p) => p,
                Err(_) => {
                    return (
                        GridPoint { nu1, nu2, alpha, d: spec.d, rho: None, kappa_p: None, failed: true },
                        None,
                    )
                }
            };
            match min_rate(&params, pc, n_ozf, opts) {
                Ok(Some(cert)) => (
                    GridPoint {
                        nu1,
                        nu2,
                        alpha,
                        d: spec.d,
                        rho: Some(cert.rho),
                        kappa_p: Some(cert.kappa_p),
                        failed: false,
                    },
                    Some((params, cert)),
                ),
                Ok(None) => (
                    GridPoint { nu1, nu2, alpha, d: spec.d, rho: None, kappa_p: None, failed: false },
                    None,
                ),
                Err(_) => (
                    GridPoint { nu1, nu2, alpha, d: spec.d, rho: None, kappa_p: None, failed: true },
                    None,
                ),
            }
        })
        .collect();

    let mut best: Option<(AlgorithmParams, RateCertificate)> = None;
    for (_, cand) in &evaluated {
        if let Some((params, cert)) = cand {
            let better = match &best {
                None => true,
                Some((bp, bc)) => {
                    (cert.rho, params.nu2, params.alpha, params.nu1)
                        < (bc.rho, bp.nu2, bp.alpha, bp.nu1)
                }
            };
            if better {
                best = Some((*params, cert.clone()));
            }
        }
    }
    Ok(GridSearchResult { best, grid: evaluated.into_iter().map(|(p, _)| p).collect() })
}

/// One sweep row; `feasible` distinguishes certificates, clean
/// infeasibility, and solver failures.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub kappa: f64,
    pub rho: Option<f64>,
    pub nu1: f64,
    pub nu2: f64,
    pub alpha: f64,
    pub d: f64,
    pub n_ozf: usize,
    pub kappa_p: Option<f64>,
    pub feasible: SweepOutcome,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepOutcome {
    True,
    False,
    Error,
}

impl std::fmt::Display for SweepOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepOutcome::True => "true",
            SweepOutcome::False => "false",
            SweepOutcome::Error => "error",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepCurve {
    pub preset: SchemePreset,
    pub rows: Vec<SweepRow>,
}

impl SweepCurve {
    pub const CSV_HEADER: &'static str = "kappa,rho,nu1,nu2,alpha,d,n_ozf,kappa_P,feasible";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let rho = r.rho.map(|v| format!("{v:.6}")).unwrap_or_default();
            let kp = r.kappa_p.map(|v| format!("{v:.6}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.kappa, rho, r.nu1, r.nu2, r.alpha, r.d, r.n_ozf, kp, r.feasible
            ));
        }
        out
    }
}

/// Runs `min_rate` for a preset over a list of condition numbers under the
/// normalization `L_hat = 1`, `m_hat = 1/kappa`. Per-point failures are
/// recorded and the sweep continues; result order follows the input order.
pub fn sweep_kappa(
    preset: SchemePreset,
    kappas: &[f64],
    n_ozf: usize,
    d_override: Option<f64>,
    opts: &BisectOpts,
) -> Result<SweepCurve> {
    if kappas.is_empty() {
        return Err(Error::Domain("empty kappa list".into()));
    }
    if kappas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("kappas must be strictly increasing".into()));
    }
    let rows: Vec<SweepRow> = kappas
        .par_iter()
        .map(|&kappa| -> Result<SweepRow> {
            let pc = ProblemClass::from_kappa(kappa)?;
            let params = preset.params(&pc, d_override)?;
            let (rho, kappa_p, feasible) = match min_rate(&params, &pc, n_ozf, opts) {
                Ok(Some(cert)) => (Some(cert.rho), Some(cert.kappa_p), SweepOutcome::True),
                Ok(None) => (None, None, SweepOutcome::False),
                Err(_) => (None, None, SweepOutcome::Error),
            };
            Ok(SweepRow {
                kappa,
                rho,
                nu1: params.nu1,
                nu2: params.nu2,
                alpha: params.alpha,
                d: params.d,
                n_ozf,
                kappa_p,
                feasible,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepCurve { preset, rows })
}

/// Log-spaced condition numbers, endpoints included.
pub fn log_kappas(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo >= 1.0 && hi > lo && points >= 2) {
        return Err(Error::Domain(format!(
            "need 1 <= lo < hi and points >= 2, got lo={lo}, hi={hi}, points={points}"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect())
}
