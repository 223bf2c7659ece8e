//! Closed-form steady-state correlation functions ⟨a†ˡ aᵏ⟩ and the Gaussian
//! (mean, covariance) summary built from them.
//!
//! Two analytic engines are provided:
//!
//! * one-photon drive, single-photon loss: a ratio of ₀F₂ series with
//!   ε = 2Ω/(iχ), β = (2Δ − iγ)/χ;
//! * the general drive/loss model: ⟨a†ˡaᵏ⟩ = Σ_m 𝓕*_{m+l} 𝓕_{m+k}/m! / (𝓝 √2^{l+k})
//!   with 𝓕_m = (−ζ)^m ₂F₁(−m, y; z; 2). The sequence 𝓕_m is generated by the
//!   contiguous recurrence
//!   (z + m) 𝓕_{m+1} = 2A 𝓕_m + m ζ² 𝓕_{m−1},  𝓕_0 = 1,
//!   where χ̃ = χ − iκ, ζ² = −2Λ/χ̃, z = (2Δ − iγ)/χ̃ and A = −i√2Ω/χ̃.
//!   The recurrence only involves ζ², so it has no branch ambiguity in ζ and
//!   reduces to 𝓕_m = (2A)^m/(z)_m at Λ = 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{annihilation_op, c, DensityMatrix, FockOperator, FockSpace, C64};
use crate::liouvillian::{build_liouvillian, steady_state, ModelParams, Variant};
use crate::special::{hyper0f2, hyper2f1_terminating, ConvergenceMonitor, LogComplex, LogSum, SERIES_MAX_TERMS};

/// Highest supported l + k.
pub const MAX_MOMENT_ORDER: usize = 4;

/// ε = 2Ω/(iχ), β = (2Δ − iγ)/χ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentParamsOnePhoton {
    pub epsilon: C64,
    pub beta: C64,
}

impl MomentParamsOnePhoton {
    pub fn from_params(p: &ModelParams) -> Result<Self> {
        if p.chi == 0.0 {
            return Err(Error::InvalidParams("one-photon moments need chi != 0".into()));
        }
        let epsilon = c(2.0 * p.omega_drive, 0.0) / c(0.0, p.chi);
        let beta = c(2.0 * p.delta, -p.gamma) / p.chi;
        Ok(Self { epsilon, beta })
    }
}

/// Parameters of the hypergeometric representation for the general model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentParamsTwoPhoton {
    /// ζ = i√(2Λ/χ̃) on the principal square-root branch.
    pub zeta: C64,
    /// ζ², the only power of ζ entering the recurrence.
    pub zeta_sq: C64,
    /// y = z/2 − i√2Ω/(ζχ̃); infinite at Λ = 0 with Ω > 0.
    pub y: C64,
    pub z: C64,
    /// 2A = −2i√2Ω/χ̃ = ζ(2y − z)
    pub two_a: C64,
    pub effective_chi: C64,
}

impl MomentParamsTwoPhoton {
    pub fn from_params(p: &ModelParams) -> Result<Self> {
        let effective_chi = c(p.chi, -p.kappa);
        if effective_chi.norm() == 0.0 {
            return Err(Error::InvalidParams(
                "hypergeometric moments need chi != 0 or kappa != 0".into(),
            ));
        }
        let zeta_sq = c(-2.0 * p.lambda_drive, 0.0) / effective_chi;
        let zeta = c(0.0, 1.0) * (c(2.0 * p.lambda_drive, 0.0) / effective_chi).sqrt();
        let z = c(2.0 * p.delta, -p.gamma) / effective_chi;
        let two_a = c(0.0, -2.0 * std::f64::consts::SQRT_2 * p.omega_drive) / effective_chi;
        let y = if zeta.norm() > 0.0 {
            z * 0.5 + two_a / (zeta * 2.0)
        } else if p.omega_drive == 0.0 {
            z * 0.5
        } else {
            c(f64::INFINITY, f64::INFINITY)
        };
        Ok(Self {
            zeta,
            zeta_sq,
            y,
            z,
            two_a,
            effective_chi,
        })
    }

    /// Parameters exactly as printed for the two-photon drive without loss
    /// or one-photon drive: ζ = i√(2Λ/χ), y = (2Δ − iγ)/(2χζ), z = (2Δ − iγ)/χ.
    pub fn printed_two_photon(p: &ModelParams) -> Result<(C64, C64, C64)> {
        if p.chi == 0.0 || p.lambda_drive == 0.0 {
            return Err(Error::InvalidParams("needs chi != 0 and lambda > 0".into()));
        }
        let zeta = c(0.0, (2.0 * p.lambda_drive / p.chi).abs().sqrt())
            * if p.chi > 0.0 { c(1.0, 0.0) } else { c(0.0, -1.0) };
        let z = c(2.0 * p.delta, -p.gamma) / p.chi;
        let y = c(2.0 * p.delta, -p.gamma) / (zeta * 2.0 * p.chi);
        Ok((zeta, y, z))
    }

    /// Substituted parameters as printed for the general model:
    /// ζ → i√(2Λ/χ̃), z → (2Δ − iγ)/χ̃, y → [−2√2 iΩ + ζ(Δ − iγ)]/(2ζχ̃).
    pub fn printed_general(p: &ModelParams) -> Result<(C64, C64, C64)> {
        let chi_t = c(p.chi, -p.kappa);
        if chi_t.norm() == 0.0 || p.lambda_drive == 0.0 {
            return Err(Error::InvalidParams("needs chi - i kappa != 0 and lambda > 0".into()));
        }
        let zeta = c(0.0, 1.0) * (c(2.0 * p.lambda_drive, 0.0) / chi_t).sqrt();
        let z = c(2.0 * p.delta, -p.gamma) / chi_t;
        let y = (c(0.0, -2.0 * std::f64::consts::SQRT_2 * p.omega_drive) + zeta * c(p.delta, -p.gamma))
            / (zeta * 2.0 * chi_t);
        Ok((zeta, y, z))
    }
}

/// All moments ⟨a†ˡ aᵏ⟩ with l + k ≤ 4.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    values: [[C64; MAX_MOMENT_ORDER + 1]; MAX_MOMENT_ORDER + 1],
}

impl MomentTable {
    fn from_fn(mut f: impl FnMut(usize, usize) -> Result<C64>) -> Result<Self> {
        let mut values = [[c(0.0, 0.0); MAX_MOMENT_ORDER + 1]; MAX_MOMENT_ORDER + 1];
        for l in 0..=MAX_MOMENT_ORDER {
            for k in 0..=MAX_MOMENT_ORDER - l {
                values[l][k] = f(l, k)?;
            }
        }
        Ok(Self { values })
    }

    /// ⟨a†ˡ aᵏ⟩.
    pub fn get(&self, l: usize, k: usize) -> Result<C64> {
        if l + k > MAX_MOMENT_ORDER {
            return Err(Error::MomentOrder(l + k));
        }
        Ok(self.values[l][k])
    }

    /// Mean photon number ⟨a†a⟩.
    pub fn photon_number(&self) -> f64 {
        self.values[1][1].re
    }

    /// Moments of a coherent state |α⟩.
    pub fn coherent(alpha: C64) -> Self {
        Self::from_fn(|l, k| Ok(alpha.conj().powu(l as u32) * alpha.powu(k as u32)))
            .expect("infallible")
    }

    /// Moments of a density matrix on a truncated Fock space.
    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        let space = rho.space();
        let a = annihilation_op(space);
        let ad = a.adjoint();
        let mut ad_pows = vec![FockOperator::identity(space)];
        let mut a_pows = vec![FockOperator::identity(space)];
        for n in 1..=MAX_MOMENT_ORDER {
            ad_pows.push(&ad_pows[n - 1] * &ad);
            a_pows.push(&a_pows[n - 1] * &a);
        }
        Self::from_fn(|l, k| rho.expectation(&(&ad_pows[l] * &a_pows[k])))
    }

    /// Largest relative deviation over all entries, measured against `reference`.
    pub fn max_rel_diff(&self, reference: &MomentTable) -> f64 {
        let mut worst = 0.0f64;
        for l in 0..=MAX_MOMENT_ORDER {
            for k in 0..=MAX_MOMENT_ORDER - l {
                let r = reference.values[l][k];
                let d = (self.values[l][k] - r).norm();
                worst = worst.max(d / r.norm().max(1e-300));
            }
        }
        worst
    }

    /// Same as [`Self::max_rel_diff`] restricted to l, k ≤ `max_each`.
    pub fn max_rel_diff_upto(&self, reference: &MomentTable, max_each: usize) -> f64 {
        let mut worst = 0.0f64;
        for l in 0..=max_each {
            for k in 0..=max_each {
                if l + k > MAX_MOMENT_ORDER {
                    continue;
                }
                let r = reference.values[l][k];
                if r.norm() < 1e-13 && self.values[l][k].norm() < 1e-13 {
                    continue;
                }
                let d = (self.values[l][k] - r).norm();
                worst = worst.max(d / r.norm().max(1e-300));
            }
        }
        worst
    }
}

fn check_order(l: usize, k: usize) -> Result<()> {
    if l + k > MAX_MOMENT_ORDER {
        Err(Error::MomentOrder(l + k))
    } else {
        Ok(())
    }
}

fn require_one_photon(p: &ModelParams) -> Result<()> {
    if p.chi == 0.0 || !(p.gamma > 0.0) || p.kappa != 0.0 || p.lambda_drive != 0.0 {
        return Err(Error::InvalidParams(
            "one-photon moments need chi != 0, gamma > 0, kappa = 0, lambda = 0".into(),
        ));
    }
    Ok(())
}

/// ⟨a†ˡaᵏ⟩ for the one-photon drive with single-photon loss, as the ₀F₂ ratio
/// (ε*)ˡ εᵏ / ((β*)_l (β)_k) · ₀F₂(β*+l, β+k; 2|ε|²) / ₀F₂(β*, β; 2|ε|²).
pub fn moments_one_photon(params: &ModelParams, l: usize, k: usize) -> Result<C64> {
    check_order(l, k)?;
    require_one_photon(params)?;
    let mp = MomentParamsOnePhoton::from_params(params)?;
    let x = 2.0 * mp.epsilon.norm_sqr();
    let norm = hyper0f2(mp.beta.conj(), mp.beta, x)?;
    one_photon_entry(&mp, x, &norm, l, k)
}

fn one_photon_entry(mp: &MomentParamsOnePhoton, x: f64, norm: &LogComplex, l: usize, k: usize) -> Result<C64> {
    if l == 0 && k == 0 {
        return Ok(c(1.0, 0.0));
    }
    if mp.epsilon.norm() == 0.0 {
        return Ok(c(0.0, 0.0));
    }
    let bstar = mp.beta.conj();
    let mut pre = LogComplex::from_complex(mp.epsilon.conj()).powi(l as u32)
        .mul(&LogComplex::from_complex(mp.epsilon).powi(k as u32));
    for j in 0..l {
        pre = pre.div(&LogComplex::from_complex(bstar + j as f64));
    }
    for j in 0..k {
        pre = pre.div(&LogComplex::from_complex(mp.beta + j as f64));
    }
    let shifted = hyper0f2(bstar + l as f64, mp.beta + k as f64, x)?;
    Ok(pre.mul(&shifted).div(norm).to_complex())
}

/// Full moment table from the ₀F₂ representation.
pub fn one_photon_table(params: &ModelParams) -> Result<MomentTable> {
    require_one_photon(params)?;
    let mp = MomentParamsOnePhoton::from_params(params)?;
    let x = 2.0 * mp.epsilon.norm_sqr();
    let norm = hyper0f2(mp.beta.conj(), mp.beta, x)?;
    MomentTable::from_fn(|l, k| one_photon_entry(&mp, x, &norm, l, k))
}

/// Generates log-domain 𝓕_m by the contiguous recurrence and accumulates
/// every Σ_m 𝓕*_{m+l}𝓕_{m+k}/m! (l + k ≤ 4) until all sums have converged.
fn hypergeometric_table(mp: &MomentParamsTwoPhoton) -> Result<MomentTable> {
    let z = mp.z;
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::PochhammerPole {
            z: format!("{z}"),
            k: (-z.re) as usize + 1,
        });
    }
    const W: usize = MAX_MOMENT_ORDER + 1;
    // window of log-domain 𝓕 values, f_log[j] = 𝓕_{m+j}
    let mut f_log: Vec<LogComplex> = Vec::with_capacity(W + 1);
    // recurrence state 𝓕_{n−1}, 𝓕_n as mantissas with a shared log scale
    let mut prev = c(0.0, 0.0);
    let mut cur = c(1.0, 0.0);
    let mut scale = 0.0f64;
    let mut n = 0usize;
    let to_log = |v: C64, s: f64| {
        let lc = LogComplex::from_complex(v);
        if lc.is_zero() {
            lc
        } else {
            LogComplex::new(lc.log_modulus + s, lc.phase)
        }
    };
    let next = |prev: &mut C64, cur: &mut C64, scale: &mut f64, n: &mut usize| {
        let nf = *n as f64;
        let new = (mp.two_a * *cur + mp.zeta_sq * nf * *prev) / (z + nf);
        *prev = *cur;
        *cur = new;
        *n += 1;
        let m = cur.norm().max(prev.norm());
        if m > 1e150 || (m < 1e-150 && m > 0.0) {
            *prev /= m;
            *cur /= m;
            *scale += m.ln();
        }
    };
    f_log.push(to_log(cur, scale));
    while f_log.len() < W {
        next(&mut prev, &mut cur, &mut scale, &mut n);
        f_log.push(to_log(cur, scale));
    }

    let mut sums = vec![LogSum::default(); W * W];
    let mut monitors = vec![ConvergenceMonitor::new(0.0); W * W];
    let mut done = vec![false; W * W];
    for l in 0..W {
        for k in 0..W {
            if l + k > MAX_MOMENT_ORDER {
                done[l * W + k] = true;
            }
        }
    }
    let mut ln_fact = 0.0f64;
    for m in 0..SERIES_MAX_TERMS {
        if m > 0 {
            ln_fact += (m as f64).ln();
        }
        let inv_fact = LogComplex::new(-ln_fact, 0.0);
        for l in 0..W {
            for k in 0..W - l {
                let idx = l * W + k;
                if done[idx] {
                    continue;
                }
                let term = f_log[l].conj().mul(&f_log[k]).mul(&inv_fact);
                sums[idx].add(term);
                let reference = sums[idx].log_modulus().max(sums[0].log_modulus());
                if monitors[idx].converged(m, term.log_modulus, reference) {
                    done[idx] = true;
                }
            }
        }
        if done.iter().all(|&d| d) {
            let norm = sums[0].value();
            if norm.is_zero() {
                return Err(Error::NonConvergence { terms: m + 1 });
            }
            return MomentTable::from_fn(|l, k| {
                let raw = sums[l * W + k].value().div(&norm);
                let pow2 = LogComplex::new(-0.5 * (l + k) as f64 * std::f64::consts::LN_2, 0.0);
                Ok(raw.mul(&pow2).to_complex())
            });
        }
        next(&mut prev, &mut cur, &mut scale, &mut n);
        f_log.remove(0);
        f_log.push(to_log(cur, scale));
    }
    Err(Error::NonConvergence {
        terms: SERIES_MAX_TERMS,
    })
}

fn require_hypergeometric(p: &ModelParams) -> Result<()> {
    if p.chi == 0.0 && p.kappa == 0.0 {
        return Err(Error::InvalidParams("needs chi != 0 or kappa != 0".into()));
    }
    if !(p.gamma > 0.0) {
        return Err(Error::InvalidParams("needs gamma > 0".into()));
    }
    Ok(())
}

fn require_two_photon(p: &ModelParams) -> Result<()> {
    require_hypergeometric(p)?;
    if !(p.lambda_drive > 0.0) || p.omega_drive != 0.0 || p.kappa != 0.0 {
        return Err(Error::InvalidParams(
            "two-photon moments need lambda > 0, omega = 0, kappa = 0".into(),
        ));
    }
    Ok(())
}

/// ⟨a†ˡaᵏ⟩ for the two-photon drive with single-photon loss.
pub fn moments_two_photon(params: &ModelParams, l: usize, k: usize) -> Result<C64> {
    check_order(l, k)?;
    two_photon_table(params)?.get(l, k)
}

pub fn two_photon_table(params: &ModelParams) -> Result<MomentTable> {
    require_two_photon(params)?;
    hypergeometric_table(&MomentParamsTwoPhoton::from_params(params)?)
}

/// ⟨a†ˡaᵏ⟩ for one- and two-photon drives with one- and two-photon loss.
pub fn moments_general(params: &ModelParams, l: usize, k: usize) -> Result<C64> {
    check_order(l, k)?;
    general_table(params)?.get(l, k)
}

pub fn general_table(params: &ModelParams) -> Result<MomentTable> {
    require_hypergeometric(params)?;
    hypergeometric_table(&MomentParamsTwoPhoton::from_params(params)?)
}

/// Evaluates the hypergeometric moment formula directly from (ζ, y, z),
/// summing ₂F₁ term by term in plain arithmetic. Independent of the
/// recurrence; only usable while |ζ|^{2m}/m! stays within f64 range.
pub fn hypergeometric_moment_direct(zeta: C64, y: C64, z: C64, l: usize, k: usize, terms: usize) -> Result<C64> {
    check_order(l, k)?;
    let f: Vec<C64> = (0..terms + MAX_MOMENT_ORDER + 1)
        .map(|m| Ok((-zeta).powu(m as u32) * hyper2f1_terminating(m, y, z)?))
        .collect::<Result<_>>()?;
    let mut fact = 1.0f64;
    let mut norm = c(0.0, 0.0);
    let mut num = c(0.0, 0.0);
    for m in 0..terms {
        if m > 0 {
            fact *= m as f64;
        }
        norm += f[m].conj() * f[m] / fact;
        num += f[m + l].conj() * f[m + k] / fact;
    }
    Ok(num / norm / 2f64.powf(0.5 * (l + k) as f64))
}

/// Which formula produces the steady-state moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentEngine {
    /// ₀F₂ ratio (one-photon drive, κ = Λ = 0).
    OnePhoton,
    /// Hypergeometric recurrence (any drive, χ − iκ ≠ 0).
    General,
    /// Coherent state α = 2Ω/(γ + 2iΔ) of the linear cavity (χ = κ = Λ = 0).
    LinearCavity,
    /// Picks the analytic engine matching the parameters.
    Auto,
    /// Brute-force Lindblad steady state on a truncated Fock space.
    Oracle { dim: Option<usize> },
}

impl MomentEngine {
    pub fn table(&self, params: &ModelParams) -> Result<MomentTable> {
        match *self {
            MomentEngine::OnePhoton => one_photon_table(params),
            MomentEngine::General => general_table(params),
            MomentEngine::LinearCavity => {
                if params.chi != 0.0 || params.kappa != 0.0 || params.lambda_drive != 0.0 || !(params.gamma > 0.0) {
                    return Err(Error::InvalidParams("linear cavity needs chi = kappa = lambda = 0".into()));
                }
                Ok(MomentTable::coherent(c(2.0 * params.omega_drive, 0.0) / c(params.gamma, 2.0 * params.delta)))
            }
            MomentEngine::Auto => {
                if params.kappa == 0.0 && params.lambda_drive == 0.0 {
                    if params.chi == 0.0 {
                        MomentEngine::LinearCavity.table(params)
                    } else {
                        one_photon_table(params)
                    }
                } else {
                    general_table(params)
                }
            }
            MomentEngine::Oracle { dim } => {
                let dim = dim.unwrap_or_else(|| params.suggested_dim(Variant::General));
                let rho = steady_state(&build_liouvillian(params, Variant::General, FockSpace::new(dim)?))?;
                MomentTable::from_density(&rho)
            }
        }
    }
}

/// Quadrature mean vector (⟨q⟩, ⟨p⟩) and covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSummary {
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

impl GaussianSummary {
    pub fn det(&self) -> f64 {
        self.cov[0][0] * self.cov[1][1] - self.cov[0][1] * self.cov[1][0]
    }

    /// P = 1/(2√det C).
    pub fn purity(&self) -> f64 {
        0.5 / self.det().sqrt()
    }

    pub fn vacuum() -> Self {
        Self {
            mean: [0.0, 0.0],
            cov: [[0.5, 0.0], [0.0, 0.5]],
        }
    }
}

/// Builds (⟨q⟩, ⟨p⟩) and C from ⟨a⟩, ⟨a²⟩ and ⟨a†a⟩.
pub fn gaussian_summary(table: &MomentTable) -> GaussianSummary {
    let sq2 = std::f64::consts::SQRT_2;
    let a = table.values[0][1];
    let a2 = table.values[0][2];
    let n = table.values[1][1].re;
    let q = sq2 * a.re;
    let p = sq2 * a.im;
    let qq = a2.re + n + 0.5;
    let pp = -a2.re + n + 0.5;
    let qp = a2.im;
    GaussianSummary {
        mean: [q, p],
        cov: [[qq - q * q, qp - q * p], [qp - q * p, pp - p * p]],
    }
}

/// Gaussian summary from any moment engine.
pub fn gaussian_summary_for(engine: &MomentEngine, params: &ModelParams) -> Result<GaussianSummary> {
    Ok(gaussian_summary(&engine.table(params)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_photon(delta: f64, chi: f64, gamma: f64, omega: f64) -> ModelParams {
        ModelParams {
            delta,
            chi,
            gamma,
            omega_drive: omega,
            ..Default::default()
        }
    }

    fn oracle(p: &ModelParams, dim: usize) -> MomentTable {
        MomentEngine::Oracle { dim: Some(dim) }.table(p).unwrap()
    }

    #[test]
    fn normalization_and_zero_drive() {
        let p = one_photon(0.3, 0.2, 1.0, 1.5);
        assert_eq!(moments_one_photon(&p, 0, 0).unwrap(), c(1.0, 0.0));
        let p0 = one_photon(0.3, 0.2, 1.0, 0.0);
        for (l, k) in [(0, 1), (1, 1), (2, 0), (2, 2)] {
            assert_eq!(moments_one_photon(&p0, l, k).unwrap(), c(0.0, 0.0));
        }
        assert!(matches!(moments_one_photon(&p, 3, 2), Err(Error::MomentOrder(5))));
    }

    #[test]
    fn one_photon_matches_lindblad_oracle() {
        let p = one_photon(0.5, 0.3, 1.0, 2.0);
        let analytic = one_photon_table(&p).unwrap();
        let brute = oracle(&p, 60);
        let err = analytic.max_rel_diff_upto(&brute, 2);
        assert!(err < 1e-7, "relative error {err:e}");
    }

    #[test]
    fn one_photon_hermitian_symmetry() {
        let p = one_photon(-0.4, 0.7, 1.3, 3.0);
        let t = one_photon_table(&p).unwrap();
        for l in 0..=4 {
            for k in 0..=4 - l {
                let d = t.get(l, k).unwrap() - t.get(k, l).unwrap().conj();
                assert!(d.norm() <= 1e-12 * t.get(l, k).unwrap().norm().max(1.0));
            }
        }
        assert!(t.get(1, 1).unwrap().re >= 0.0 && t.get(1, 1).unwrap().im.abs() < 1e-12);
        assert!(t.get(2, 2).unwrap().re >= 0.0 && t.get(2, 2).unwrap().im.abs() < 1e-10);
    }

    #[test]
    fn small_chi_limit_is_coherent() {
        for (delta, gamma, omega) in [(0.0, 1.0, 0.5), (0.5, 2.0, 1.0), (-1.0, 1.0, 2.0)] {
            let p = one_photon(delta, 1e-6 * gamma, gamma, omega);
            let t = one_photon_table(&p).unwrap();
            let alpha = c(2.0 * omega, 0.0) / c(gamma, 2.0 * delta);
            let n = 4.0 * omega * omega / (4.0 * delta * delta + gamma * gamma);
            assert!((t.get(0, 1).unwrap() - alpha).norm() < 1e-3 * alpha.norm());
            assert!((t.photon_number() - n).abs() < 1e-3 * n);
        }
    }

    #[test]
    fn gaussian_summary_examples() {
        let g = gaussian_summary(&MomentTable::coherent(c(0.0, 0.0)));
        assert_eq!(g, GaussianSummary::vacuum());

        let (gamma, omega) = (1.0, 0.8);
        let g = gaussian_summary_for(&MomentEngine::Auto, &one_photon(0.0, 1e-6, gamma, omega)).unwrap();
        let sq2 = std::f64::consts::SQRT_2;
        assert!((g.mean[0] - 2.0 * sq2 * omega / gamma).abs() < 1e-5);
        assert!(g.mean[1].abs() < 1e-4);
        assert!((g.cov[0][0] - 0.5).abs() < 1e-5 && (g.cov[1][1] - 0.5).abs() < 1e-5);
        assert!(g.det() >= 0.25 - 1e-9);
    }

    #[test]
    fn recurrence_matches_direct_hypergeometric_sum() {
        let p = ModelParams {
            delta: 0.3,
            chi: 0.4,
            gamma: 1.0,
            kappa: 0.2,
            omega_drive: 0.7,
            lambda_drive: 0.5,
            ..Default::default()
        };
        let mp = MomentParamsTwoPhoton::from_params(&p).unwrap();
        let table = general_table(&p).unwrap();
        for (l, k) in [(1, 1), (0, 1), (0, 2), (2, 2), (1, 3)] {
            let direct = hypergeometric_moment_direct(mp.zeta, mp.y, mp.z, l, k, 80).unwrap();
            let rec = table.get(l, k).unwrap();
            assert!((direct - rec).norm() < 1e-10 * direct.norm().max(1e-3), "({l},{k}): {direct} vs {rec}");
        }
    }

    #[test]
    fn two_photon_matches_lindblad_oracle() {
        let p = ModelParams {
            chi: 0.4,
            gamma: 1.0,
            lambda_drive: 0.5,
            ..Default::default()
        };
        let analytic = two_photon_table(&p).unwrap();
        let brute = oracle(&p, 40);
        let err = analytic.max_rel_diff_upto(&brute, 2);
        assert!(err < 1e-6, "relative error {err:e}");
        // parity: odd moments vanish
        assert!(analytic.get(0, 1).unwrap().norm() < 1e-14);
    }

    #[test]
    fn general_with_two_photon_loss_matches_oracle() {
        let p = ModelParams {
            chi: 0.4,
            gamma: 1.0,
            kappa: 0.5,
            lambda_drive: 0.5,
            ..Default::default()
        };
        let err = general_table(&p).unwrap().max_rel_diff_upto(&oracle(&p, 40), 2);
        assert!(err < 1e-5, "relative error {err:e}");
    }

    #[test]
    fn general_full_drive_detuned_matches_oracle() {
        let p = ModelParams {
            delta: 0.6,
            chi: 0.5,
            gamma: 1.0,
            kappa: 0.3,
            omega_drive: 1.2,
            lambda_drive: 0.4,
            ..Default::default()
        };
        let err = general_table(&p).unwrap().max_rel_diff_upto(&oracle(&p, 45), 2);
        assert!(err < 1e-6, "relative error {err:e}");
    }

    #[test]
    fn general_reduces_to_two_photon() {
        let p = ModelParams {
            delta: 0.2,
            chi: 0.3,
            gamma: 1.0,
            lambda_drive: 0.4,
            ..Default::default()
        };
        let a = two_photon_table(&p).unwrap();
        let b = general_table(&p).unwrap();
        assert!(a.max_rel_diff_upto(&b, 2) < 1e-12);
    }

    #[test]
    fn general_lambda_zero_matches_one_photon_grid() {
        for omega in [1.0, 5.0] {
            for gamma in [1.0, 5.0] {
                for chi in [0.2, 1.0] {
                    for delta in [0.0, 1.0] {
                        let p = one_photon(delta, chi, gamma, omega);
                        let a = one_photon_table(&p).unwrap();
                        let b = general_table(&p).unwrap();
                        let err = b.max_rel_diff_upto(&a, 2);
                        assert!(err < 1e-10, "Ω={omega} γ={gamma} χ={chi} Δ={delta}: {err:e}");
                    }
                }
            }
        }
    }

    #[test]
    fn lambda_zero_without_one_photon_drive_is_vacuum() {
        let p = ModelParams {
            chi: 0.3,
            gamma: 1.0,
            kappa: 0.2,
            ..Default::default()
        };
        let t = general_table(&p).unwrap();
        assert_eq!(t.get(0, 0).unwrap(), c(1.0, 0.0));
        assert!(t.get(1, 1).unwrap().norm() < 1e-300);
    }

    #[test]
    fn unsupported_parameters_rejected() {
        let p = ModelParams {
            chi: 0.0,
            gamma: 1.0,
            lambda_drive: 0.3,
            ..Default::default()
        };
        assert!(general_table(&p).is_err());
        let p = ModelParams {
            chi: 0.1,
            gamma: 1.0,
            kappa: 0.1,
            lambda_drive: 0.3,
            ..Default::default()
        };
        assert!(two_photon_table(&p).is_err());
        assert!(moments_one_photon(&p, 1, 1).is_err());
    }
}
