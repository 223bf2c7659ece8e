//! Quantum Fisher information engines, Cramér–Rao bounds and homodyne
//! error propagation.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{c, DensityMatrix, PureState, C64};
use crate::liouvillian::ModelParams;
use crate::moments::{gaussian_summary, GaussianSummary, MomentEngine, MomentTable};

/// Eigenvalue pairs with λ_i + λ_j at or below this are dropped from the SLD sum.
pub const SLD_EIGEN_CUTOFF: f64 = 1e-12;
/// Below this 1 − P⁴ the state is treated as pure in the Gaussian formula.
pub const PURITY_CLAMP: f64 = 1e-9;
/// Halving the χ step must change δχ by less than this (relative).
pub const RICHARDSON_TOL: f64 = 1e-3;

/// Total time T, interrogation time t and repetition count ν.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationBudget {
    pub total_time: f64,
    pub interrogation_time: f64,
    pub repetitions: f64,
}

impl EstimationBudget {
    /// ν = T/t.
    pub fn transient(total_time: f64, interrogation_time: f64) -> Result<Self> {
        if !(total_time > 0.0) || !(interrogation_time > 0.0) {
            return Err(Error::InvalidBudget("T and t must be positive".into()));
        }
        Self::checked(total_time, interrogation_time, total_time / interrogation_time)
    }

    /// Steady-state protocol: t = 1/γ, ν = Tγ.
    pub fn steady_state(total_time: f64, gamma: f64) -> Result<Self> {
        if !(total_time > 0.0) || !(gamma > 0.0) {
            return Err(Error::InvalidBudget("T and gamma must be positive".into()));
        }
        Self::checked(total_time, 1.0 / gamma, total_time * gamma)
    }

    /// Figure-reproduction budget, ν = 1.
    pub fn single_shot(interrogation_time: f64) -> Result<Self> {
        Self::checked(interrogation_time, interrogation_time, 1.0)
    }

    fn checked(total_time: f64, interrogation_time: f64, repetitions: f64) -> Result<Self> {
        if !(total_time > 0.0) || !(interrogation_time > 0.0) {
            return Err(Error::InvalidBudget("T and t must be positive".into()));
        }
        if !(repetitions >= 1.0) {
            return Err(Error::InvalidBudget(format!("repetitions {repetitions} < 1")));
        }
        Ok(Self {
            total_time,
            interrogation_time,
            repetitions,
        })
    }
}

/// δχ_min = 1/√(νF).
pub fn cramer_rao(fisher: f64, budget: &EstimationBudget) -> Result<f64> {
    if !(fisher > 0.0) {
        return Err(Error::NonPositiveFisher(fisher));
    }
    Ok(1.0 / (budget.repetitions * fisher).sqrt())
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// 4[⟨ψ'|ψ'⟩ − |⟨ψ'|ψ⟩|²].
pub fn qfi_pure(psi: &PureState, dpsi: &[C64]) -> Result<f64> {
    let amps: Vec<C64> = (0..psi.space().dim()).map(|i| psi.amplitudes()[i]).collect();
    if dpsi.len() != amps.len() {
        return Err(Error::DimensionMismatch {
            expected: amps.len(),
            found: dpsi.len(),
        });
    }
    let f = 4.0 * (inner(dpsi, dpsi).re - inner(dpsi, &amps).norm_sqr());
    Ok(f.max(0.0))
}

/// QFI of a state supported on two orthonormal eigenvectors:
/// Σ_k [λ'_k²/λ_k + 4λ_k⟨λ'_k|λ'_k⟩] − Σ_{j,k} 8λ_jλ_k/(λ_j+λ_k) |⟨λ_j|λ'_k⟩|².
pub fn qfi_two_level_mixture(
    lambdas: [f64; 2],
    vecs: [&[C64]; 2],
    dvecs: [&[C64]; 2],
    dlambdas: [f64; 2],
) -> Result<f64> {
    if lambdas.iter().any(|&l| l < -SLD_EIGEN_CUTOFF) || lambdas[0] + lambdas[1] > 1.0 + 1e-12 {
        return Err(Error::InvalidParams(format!("eigenvalues {lambdas:?} out of range")));
    }
    if lambdas[0] <= SLD_EIGEN_CUTOFF && lambdas[1] <= SLD_EIGEN_CUTOFF {
        return Err(Error::InvalidParams("both eigenvalues vanish".into()));
    }
    let n = vecs[0].len();
    for v in vecs.iter().chain(dvecs.iter()) {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    let mut f = 0.0;
    for k in 0..2 {
        if lambdas[k] > SLD_EIGEN_CUTOFF {
            f += dlambdas[k] * dlambdas[k] / lambdas[k];
            f += 4.0 * lambdas[k] * inner(dvecs[k], dvecs[k]).re;
        }
    }
    for j in 0..2 {
        for k in 0..2 {
            let s = lambdas[j] + lambdas[k];
            if s > SLD_EIGEN_CUTOFF {
                f -= 8.0 * lambdas[j] * lambdas[k] / s * inner(vecs[j], dvecs[k]).norm_sqr();
            }
        }
    }
    Ok(f.max(0.0))
}

/// Σ_{λ_i+λ_j > cutoff} 2|⟨i|∂ρ|j⟩|²/(λ_i+λ_j).
pub fn qfi_mixed_oracle(rho: &DensityMatrix, drho: &Mat<C64>) -> Result<f64> {
    let d = rho.dim();
    if drho.nrows() != d || drho.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: drho.nrows(),
        });
    }
    let (vals, u) = rho.eigen()?;
    let rotated = u.adjoint() * drho * &u;
    let mut f = 0.0;
    for i in 0..d {
        for j in 0..d {
            let s = vals[i] + vals[j];
            if s > SLD_EIGEN_CUTOFF {
                f += 2.0 * rotated[(i, j)].norm_sqr() / s;
            }
        }
    }
    Ok(f)
}

/// χ-derivative of a [`GaussianSummary`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianDerivative {
    pub dmean: [f64; 2],
    pub dcov: [[f64; 2]; 2],
}

fn inv2(m: &[[f64; 2]; 2]) -> Result<[[f64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !(det > 0.0) || !(m[0][0] > 0.0) {
        return Err(Error::InvalidCovariance(format!("not positive definite (det {det:e})")));
    }
    Ok([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

fn mul2(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut r = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

/// F = ½Tr[(C⁻¹C')²]/(1+P²) + 2P'²/(1−P⁴) + μ'ᵀC⁻¹μ', P = 1/(2√det C).
pub fn qfi_gaussian(g: &GaussianSummary, dg: &GaussianDerivative) -> Result<f64> {
    let cinv = inv2(&g.cov)?;
    let x = mul2(&cinv, &dg.dcov);
    let x2 = mul2(&x, &x);
    let p = g.purity();
    // P' = −P · Tr(C⁻¹C') / 2
    let dp = -0.5 * p * (x[0][0] + x[1][1]);
    let one_minus_p4 = 1.0 - p.powi(4);
    let purity_term = if one_minus_p4 < PURITY_CLAMP {
        if dp.abs() < PURITY_CLAMP {
            0.0
        } else {
            return Err(Error::InvalidCovariance(format!(
                "pure state with changing purity (P' = {dp:e})"
            )));
        }
    } else {
        2.0 * dp * dp / one_minus_p4
    };
    let m = dg.dmean;
    let mean_term = m[0] * (cinv[0][0] * m[0] + cinv[0][1] * m[1]) + m[1] * (cinv[1][0] * m[0] + cinv[1][1] * m[1]);
    let f = 0.5 * (x2[0][0] + x2[1][1]) / (1.0 + p * p) + purity_term + mean_term;
    Ok(f.max(0.0))
}

/// Central-difference χ step: 1e−4·|χ|, or 1e−6 at χ = 0.
pub fn default_chi_step(chi: f64) -> f64 {
    if chi == 0.0 {
        1e-6
    } else {
        1e-4 * chi.abs()
    }
}

/// χ step for covariance derivatives: min(χ/2, 1e−3·γ/(N̄+1)), with N̄ the
/// mean-field photon number.
pub fn gaussian_chi_step(params: &ModelParams) -> f64 {
    let n = params.mean_field_photon_number(crate::liouvillian::Variant::General).max(0.0);
    let scale = 1e-3 * params.gamma.max(params.kappa) / (n + 1.0);
    if params.chi == 0.0 {
        scale
    } else {
        scale.min(0.5 * params.chi.abs())
    }
}

fn summary_at(engine: &MomentEngine, params: &ModelParams, chi: f64) -> Result<GaussianSummary> {
    Ok(gaussian_summary(&engine.table(&params.with_chi(chi))?))
}

/// Gaussian summary at χ and its central-difference χ-derivative.
pub fn gaussian_with_derivative(
    engine: &MomentEngine,
    params: &ModelParams,
    step: f64,
) -> Result<(GaussianSummary, GaussianDerivative)> {
    let g = summary_at(engine, params, params.chi)?;
    let gp = summary_at(engine, params, params.chi + step)?;
    let gm = summary_at(engine, params, params.chi - step)?;
    let d = |a: f64, b: f64| (a - b) / (2.0 * step);
    let dg = GaussianDerivative {
        dmean: [d(gp.mean[0], gm.mean[0]), d(gp.mean[1], gm.mean[1])],
        dcov: [
            [d(gp.cov[0][0], gm.cov[0][0]), d(gp.cov[0][1], gm.cov[0][1])],
            [d(gp.cov[1][0], gm.cov[1][0]), d(gp.cov[1][1], gm.cov[1][1])],
        ],
    };
    Ok((g, dg))
}

/// Gaussian QFI of the steady state produced by `engine`.
pub fn steady_state_gaussian_qfi(engine: &MomentEngine, params: &ModelParams, step: Option<f64>) -> Result<f64> {
    let h = step.unwrap_or_else(|| gaussian_chi_step(params));
    let (g, dg) = gaussian_with_derivative(engine, params, h)?;
    qfi_gaussian(&g, &dg)
}

/// Measured observable for homodyne error propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    P,
    Q,
    PSquared,
    QSquared,
}

impl std::str::FromStr for Observable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p" => Ok(Observable::P),
            "q" => Ok(Observable::Q),
            "p2" | "p_squared" | "p^2" => Ok(Observable::PSquared),
            "q2" | "q_squared" | "q^2" => Ok(Observable::QSquared),
            other => Err(Error::Config(format!("unknown observable `{other}`"))),
        }
    }
}

impl std::fmt::Display for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Observable::P => "p",
            Observable::Q => "q",
            Observable::PSquared => "p2",
            Observable::QSquared => "q2",
        })
    }
}

/// Quadrature X = u a + v a†.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    Q,
    P,
}

impl Quadrature {
    fn coefficients(self) -> (C64, C64) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Quadrature::Q => (c(s, 0.0), c(s, 0.0)),
            Quadrature::P => (c(0.0, -s), c(0.0, s)),
        }
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// ⟨Xⁿ⟩ for n ≤ 4 from normal-ordered moments:
/// ⟨Xⁿ⟩ = Σ_j n!/(j! 2^j (n−2j)!) (uv)^j ⟨:X^{n−2j}:⟩.
pub fn quadrature_moment(table: &MomentTable, quad: Quadrature, n: usize) -> Result<f64> {
    let (u, v) = quad.coefficients();
    let normal = |r: usize| -> Result<C64> {
        let mut s = c(0.0, 0.0);
        for l in 0..=r {
            s += v.powu(l as u32) * u.powu((r - l) as u32) * binom(r, l) * table.get(l, r - l)?;
        }
        Ok(s)
    };
    let uv = u * v;
    let mut total = c(0.0, 0.0);
    for j in 0..=n / 2 {
        let coeff = factorial(n) / (factorial(j) * 2f64.powi(j as i32) * factorial(n - 2 * j));
        total += uv.powu(j as u32) * coeff * normal(n - 2 * j)?;
    }
    Ok(total.re)
}

/// (⟨M⟩, ⟨M²⟩).
pub fn observable_moments(table: &MomentTable, obs: Observable) -> Result<(f64, f64)> {
    let (quad, power) = match obs {
        Observable::P => (Quadrature::P, 1),
        Observable::Q => (Quadrature::Q, 1),
        Observable::PSquared => (Quadrature::P, 2),
        Observable::QSquared => (Quadrature::Q, 2),
    };
    Ok((quadrature_moment(table, quad, power)?, quadrature_moment(table, quad, 2 * power)?))
}

/// Outcome of homodyne error propagation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorPropagation {
    /// δχ; infinite when the signal derivative vanishes.
    pub delta_chi: f64,
    pub mean: f64,
    pub variance: f64,
    pub signal_derivative: f64,
    pub step: f64,
    /// Relative change of δχ when the step is halved.
    pub richardson_change: f64,
}

impl ErrorPropagation {
    pub fn is_finite(&self) -> bool {
        self.delta_chi.is_finite()
    }

    pub fn richardson_ok(&self) -> bool {
        self.richardson_change < RICHARDSON_TOL
    }
}

fn signal_derivative(engine: &MomentEngine, params: &ModelParams, obs: Observable, h: f64) -> Result<f64> {
    let plus = observable_moments(&engine.table(&params.with_chi(params.chi + h))?, obs)?.0;
    let minus = observable_moments(&engine.table(&params.with_chi(params.chi - h))?, obs)?.0;
    Ok((plus - minus) / (2.0 * h))
}

/// δχ = √[(⟨M²⟩ − ⟨M⟩²)/(ν |d⟨M⟩/dχ|²)].
pub fn error_propagation(
    params: &ModelParams,
    engine: &MomentEngine,
    obs: Observable,
    budget: &EstimationBudget,
    step: Option<f64>,
) -> Result<ErrorPropagation> {
    let h = step.unwrap_or_else(|| default_chi_step(params.chi));
    if !(h > 0.0) {
        return Err(Error::InvalidParams(format!("derivative step {h} must be positive")));
    }
    let (mean, second) = observable_moments(&engine.table(params)?, obs)?;
    let variance = (second - mean * mean).max(0.0);
    let d1 = signal_derivative(engine, params, obs, h)?;
    let d2 = signal_derivative(engine, params, obs, 0.5 * h)?;
    let resolution = 1e-13 * (mean.abs() + variance.sqrt()) / h;
    let delta = |d: f64| {
        if d.abs() <= resolution || d == 0.0 {
            f64::INFINITY
        } else {
            (variance / (budget.repetitions * d * d)).sqrt()
        }
    };
    let (e1, e2) = (delta(d1), delta(d2));
    let richardson_change = if e1.is_finite() && e2.is_finite() {
        (e1 - e2).abs() / e2
    } else if e1.is_infinite() && e2.is_infinite() {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(ErrorPropagation {
        delta_chi: e2,
        mean,
        variance,
        signal_derivative: d2,
        step: 0.5 * h,
        richardson_change,
    })
}

/// Small-χ one-photon photon number 4Ω²/(4Δ²+γ²).
pub fn one_photon_linear_photon_number(params: &ModelParams) -> f64 {
    4.0 * params.omega_drive.powi(2) / (4.0 * params.delta.powi(2) + params.gamma.powi(2))
}

/// Small-χ one-photon QFI 16N³/(4Δ²+γ²).
pub fn qfi_one_photon_small_chi(params: &ModelParams) -> f64 {
    let n = one_photon_linear_photon_number(params);
    16.0 * n.powi(3) / (4.0 * params.delta.powi(2) + params.gamma.powi(2))
}

/// Small-χ one-photon bound √(4Δ²+γ²)/(4√(γT) N^{3/2}).
pub fn delta_chi_one_photon_small_chi(params: &ModelParams, total_time: f64) -> f64 {
    let n = one_photon_linear_photon_number(params);
    (4.0 * params.delta.powi(2) + params.gamma.powi(2)).sqrt() / (4.0 * (params.gamma * total_time).sqrt() * n.powf(1.5))
}

/// Pure Kerr phase estimation: 1/((2N² − N)√(Tt)).
pub fn delta_chi_pure_kerr(n: usize, total_time: f64, t: f64) -> f64 {
    let n = n as f64;
    1.0 / ((2.0 * n * n - n) * (total_time * t).sqrt())
}

/// Two-photon drive small-χ form √(χ³/Λ).
pub fn delta_chi_two_photon_small_chi(chi: f64, lambda: f64) -> f64 {
    (chi.powi(3) / lambda).sqrt()
}

/// The same quantity written as 2√2Λ/N^{3/2} with N = 2Λ/χ.
pub fn delta_chi_two_photon_photon_form(lambda: f64, n: f64) -> f64 {
    2.0 * std::f64::consts::SQRT_2 * lambda / n.powf(1.5)
}
