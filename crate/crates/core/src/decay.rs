//! Exact decay of the superposition (|0⟩ + |2N⟩)/√2 under the undriven Kerr
//! Hamiltonian ω_c a†a + (χ/2)a†²a² with single-photon loss γ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::qfi_two_level_mixture;
use crate::fock::{c, C64};
use crate::liouvillian::ModelParams;
use crate::special::log_gamma;

/// Trace identity tolerance of a snapshot.
pub const SNAPSHOT_TRACE_TOL: f64 = 1e-10;
/// Relative tolerance of the optimal-time search.
pub const OPTIMAL_TIME_REL_TOL: f64 = 1e-8;
/// Upper end of the optimal-time search, in units of 1/γ.
pub const OPTIMAL_TIME_BRACKET: f64 = 20.0;

/// λ_{m,μ} = −i(ω_c − χ/2)m − (γ + iχm)(|m| + 2μ)/2.
pub fn liouvillian_eigenvalue(m: i64, mu: u64, params: &ModelParams) -> C64 {
    let mf = m as f64;
    let k = (m.unsigned_abs() + 2 * mu) as f64;
    c(0.0, -(params.omega_c - 0.5 * params.chi) * mf) - c(params.gamma, params.chi * mf) * (0.5 * k)
}

/// The same spectrum with the frequency term written as −i(ω_c − χ)m.
/// Off by iχm/2 from the generator of the undriven Kerr oscillator.
pub fn liouvillian_eigenvalue_naive(m: i64, mu: u64, params: &ModelParams) -> C64 {
    let mf = m as f64;
    let k = (m.unsigned_abs() + 2 * mu) as f64;
    c(0.0, -(params.omega_c - params.chi) * mf) - c(params.gamma, params.chi * mf) * (0.5 * k)
}

/// Density-matrix elements of the decaying superposition at time t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySnapshot {
    pub n: usize,
    pub t: f64,
    pub rho00: f64,
    /// ρ_{2N,0}.
    pub rho_2n_0: C64,
    /// |ρ_{2N,0}| = ½e^{−Nγt}, free of χ.
    pub rho_2n_0_abs: f64,
    /// ρ_jj for j = 1..=2N.
    pub diag: Vec<f64>,
}

impl DecaySnapshot {
    pub fn rho_2n_2n(&self) -> f64 {
        *self.diag.last().expect("N >= 1")
    }

    pub fn trace(&self) -> f64 {
        let mut s = self.rho00;
        let mut comp = 0.0;
        for &v in &self.diag {
            let t = s + v;
            comp += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
            s = t;
        }
        s + comp
    }

    /// Coherence bound |ρ_{2N,0}|² ≤ ρ00 ρ_{2N,2N}.
    pub fn coherence_defect(&self) -> f64 {
        self.rho_2n_0_abs.powi(2) - self.rho00 * self.rho_2n_2n()
    }

    /// Dense (2N+1)×(2N+1) density matrix.
    pub fn to_dense(&self) -> faer::Mat<C64> {
        let d = 2 * self.n + 1;
        let mut m = faer::Mat::<C64>::zeros(d, d);
        m[(0, 0)] = c(self.rho00, 0.0);
        for j in 1..d {
            m[(j, j)] = c(self.diag[j - 1], 0.0);
        }
        m[(d - 1, 0)] = self.rho_2n_0;
        m[(0, d - 1)] = self.rho_2n_0.conj();
        m
    }
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    let lg = |x: usize| log_gamma(c(x as f64 + 1.0, 0.0)).expect("positive argument").re;
    lg(n) - lg(k) - lg(n - k)
}

/// ρ_jj = ½ C(2N, j) e^{−jγt} (1 − e^{−γt})^{2N−j}, summed in the log domain.
pub fn decay_snapshot(n: usize, params: &ModelParams, t: f64) -> Result<DecaySnapshot> {
    if n == 0 {
        return Err(Error::InvalidParams("N must be positive".into()));
    }
    if !(params.gamma > 0.0) || !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParams("decay needs gamma > 0 and t >= 0".into()));
    }
    let two_n = 2 * n;
    let gt = params.gamma * t;
    // ln(1 − e^{−γt})
    let ln_q = if gt == 0.0 { f64::NEG_INFINITY } else { (-(-gt).exp_m1()).ln() };
    let diag = (1..=two_n)
        .map(|j| {
            let rest = (two_n - j) as f64;
            let ln_rest = if rest == 0.0 { 0.0 } else { rest * ln_q };
            0.5 * (ln_binomial(two_n, j) - j as f64 * gt + ln_rest).exp()
        })
        .collect();
    let rho00 = 0.5 + 0.5 * (two_n as f64 * ln_q).exp();
    let lambda = liouvillian_eigenvalue(two_n as i64, 0, params);
    let rho_2n_0 = (lambda * t).exp() * 0.5;
    Ok(DecaySnapshot {
        n,
        t,
        rho00,
        rho_2n_0,
        rho_2n_0_abs: 0.5 * (lambda.re * t).exp(),
        diag,
    })
}

/// Eigenvalues λ± and normalizers 𝓝± of the {|0⟩, |2N⟩} block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelSpectrum {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub norm_plus: f64,
    pub norm_minus: f64,
}

impl TwoLevelSpectrum {
    pub fn lambdas(&self) -> [f64; 2] {
        [self.lambda_plus, self.lambda_minus]
    }

    pub fn norms(&self) -> [f64; 2] {
        [self.norm_plus, self.norm_minus]
    }
}

pub fn diagonalize_snapshot(s: &DecaySnapshot) -> TwoLevelSpectrum {
    let (a, b) = (s.rho00, s.rho_2n_2n());
    let coh2 = s.rho_2n_0_abs.powi(2);
    let mean = 0.5 * (a + b);
    let half_gap = 0.5 * (a - b);
    let root = (coh2 + half_gap * half_gap).sqrt();
    let lambda_plus = mean + root;
    // λ₋ via the determinant, free of cancellation
    let det = a * b - coh2;
    let lambda_minus = if lambda_plus > 0.0 { det / lambda_plus } else { mean - root };
    TwoLevelSpectrum {
        lambda_plus,
        lambda_minus,
        norm_plus: coh2 + (lambda_plus - a).powi(2),
        norm_minus: coh2 + (lambda_minus - a).powi(2),
    }
}

/// (2N² − N)t, the χ-derivative of the coherence phase.
pub fn phase_derivative(n: usize, t: f64) -> f64 {
    let nf = n as f64;
    (2.0 * nf * nf - nf) * t
}

/// Eigenvectors |λ±⟩ in the {|0⟩, |2N⟩} basis and their χ-derivatives.
/// Rank-deficient branches (𝓝 = 0) come back as zero vectors.
/// With `rephased` the |0⟩ amplitude is taken real; the QFI is unchanged.
pub fn eigenvectors_with_derivatives(
    s: &DecaySnapshot,
    spectrum: &TwoLevelSpectrum,
    rephased: bool,
) -> ([[C64; 2]; 2], [[C64; 2]; 2]) {
    let r02n = if rephased {
        c(s.rho_2n_0_abs, 0.0)
    } else {
        s.rho_2n_0.conj()
    };
    let dr02n = r02n * c(0.0, phase_derivative(s.n, s.t));
    let mut vecs = [[c(0.0, 0.0); 2]; 2];
    let mut dvecs = [[c(0.0, 0.0); 2]; 2];
    for (k, (&lam, &nk)) in spectrum.lambdas().iter().zip(spectrum.norms().iter()).enumerate() {
        if nk <= 0.0 {
            continue;
        }
        let inv = 1.0 / nk.sqrt();
        vecs[k] = [r02n * inv, c((lam - s.rho00) * inv, 0.0)];
        dvecs[k] = [dr02n * inv, c(0.0, 0.0)];
    }
    (vecs, dvecs)
}

/// QFI of the decaying superposition from the two-level eigen-decomposition.
pub fn qfi_decay(n: usize, gamma: f64, t: f64) -> Result<f64> {
    qfi_decay_at(
        n,
        &ModelParams {
            gamma,
            ..Default::default()
        },
        t,
    )
}

/// [`qfi_decay`] for arbitrary ω_c and χ, which it does not depend on.
pub fn qfi_decay_at(n: usize, params: &ModelParams, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParams("qfi_decay needs t > 0".into()));
    }
    let s = decay_snapshot(n, params, t)?;
    let spectrum = diagonalize_snapshot(&s);
    let (vecs, dvecs) = eigenvectors_with_derivatives(&s, &spectrum, true);
    qfi_two_level_mixture(
        [spectrum.lambda_plus, spectrum.lambda_minus.max(0.0)],
        [&vecs[0], &vecs[1]],
        [&dvecs[0], &dvecs[1]],
        [0.0, 0.0],
    )
}

/// Closed form of [`qfi_decay`]:
/// Σ± 4λ K'²|ρ|²/𝓝 (1 − |ρ|²/𝓝) − 16 λ₊λ₋/(λ₊+λ₋) |ρ|⁴ K'²/(𝓝₊𝓝₋), K' = (2N² − N)t.
pub fn qfi_decay_closed_form(n: usize, gamma: f64, t: f64) -> Result<f64> {
    closed_form(n, gamma, t, phase_derivative(n, t), true)
}

/// Closed form with K' = (2N − 4N²)t and no 1/(λ₊+λ₋) in the cross term.
pub fn qfi_decay_naive(n: usize, gamma: f64, t: f64) -> Result<f64> {
    let nf = n as f64;
    closed_form(n, gamma, t, (2.0 * nf - 4.0 * nf * nf) * t, false)
}

fn closed_form(n: usize, gamma: f64, t: f64, k: f64, cross_normalized: bool) -> Result<f64> {
    let params = ModelParams {
        gamma,
        ..Default::default()
    };
    let s = decay_snapshot(n, &params, t)?;
    let sp = diagonalize_snapshot(&s);
    let coh2 = s.rho_2n_0_abs.powi(2);
    let mut f = 0.0;
    for (lam, nk) in [(sp.lambda_plus, sp.norm_plus), (sp.lambda_minus, sp.norm_minus)] {
        if nk > 0.0 && lam > 0.0 {
            f += 4.0 * lam * coh2 * k * k / nk * (1.0 - coh2 / nk);
        }
    }
    if sp.norm_plus > 0.0 && sp.norm_minus > 0.0 {
        let prod = s.rho00 * s.rho_2n_2n() - coh2;
        let weight = if cross_normalized {
            prod / (sp.lambda_plus + sp.lambda_minus)
        } else {
            prod
        };
        f -= 16.0 * weight * coh2 * coh2 * k * k / (sp.norm_plus * sp.norm_minus);
    }
    Ok(f.max(0.0))
}

/// δχ_min(t) = √(t/(T F)).
pub fn precision_profile(n: usize, gamma: f64, total_time: f64, t: f64) -> Result<f64> {
    if !(total_time > 0.0) || !(t > 0.0) {
        return Err(Error::InvalidParams("precision profile needs T > 0 and t > 0".into()));
    }
    let f = qfi_decay(n, gamma, t)?;
    if !(f > 0.0) {
        return Ok(f64::INFINITY);
    }
    Ok((t / (total_time * f)).sqrt())
}

/// Minimizer of [`precision_profile`] over (0, 20/γ].
pub fn optimal_time(n: usize, gamma: f64, total_time: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParams("optimal time needs gamma > 0".into()));
    }
    let objective = |t: f64| precision_profile(n, gamma, total_time, t);
    let hi = OPTIMAL_TIME_BRACKET / gamma;
    let lo = hi * 1e-12;
    const GRID: usize = 600;
    let ratio = (hi / lo).powf(1.0 / (GRID - 1) as f64);
    let grid: Vec<f64> = (0..GRID).map(|i| lo * ratio.powi(i as i32)).collect();
    let values = grid.iter().map(|&t| objective(t)).collect::<Result<Vec<_>>>()?;
    let (best, &vbest) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    let vmax = values.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if !vbest.is_finite() || (vmax - vbest) <= 1e-14 * vbest.abs() {
        return Err(Error::FlatObjective);
    }
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(GRID - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = objective(x1)?;
    let mut f2 = objective(x2)?;
    while (b - a) > OPTIMAL_TIME_REL_TOL * 0.5 * (a + b) {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = objective(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = objective(x2)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Which exponential enters the closed-form precision at t = 1/(4Nγ).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuarterTimeForm {
    /// (1 − e^{1/(4N)})^{2N}
    PositiveExponent,
    /// (1 − e^{−1/(4N)})^{2N}
    NegativeExponent,
}

/// √[(√e γ + eγ + eγ X)/(2N(2N−1)²T)] with X the population term selected by `form`.
pub fn delta_chi_quarter_time_closed_form(n: usize, gamma: f64, total_time: f64, form: QuarterTimeForm) -> f64 {
    let nf = n as f64;
    let e = std::f64::consts::E;
    let x = match form {
        QuarterTimeForm::PositiveExponent => (1.0 - (0.25 / nf).exp()).powi(2 * n as i32),
        QuarterTimeForm::NegativeExponent => (-(-0.25 / nf).exp_m1()).powi(2 * n as i32),
    };
    ((e.sqrt() * gamma + e * gamma + e * gamma * x) / (2.0 * nf * (2.0 * nf - 1.0).powi(2) * total_time)).sqrt()
}

/// Large-N asymptote √((√e + e)γ/(8N³T)).
pub fn delta_chi_quarter_time_asymptote(n: usize, gamma: f64, total_time: f64) -> f64 {
    let e = std::f64::consts::E;
    ((e.sqrt() + e) * gamma / (8.0 * (n as f64).powi(3) * total_time)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_traits::{One, ToPrimitive, Zero};
    use proptest::prelude::*;

    fn params(gamma: f64, chi: f64, omega_c: f64) -> ModelParams {
        ModelParams {
            gamma,
            chi,
            omega_c,
            ..Default::default()
        }
    }

    fn binomial(n: usize, k: usize) -> BigInt {
        let mut r = BigInt::one();
        for i in 0..k {
            r = r * BigInt::from(n - i) / BigInt::from(i + 1);
        }
        r
    }

    /// ρ_jj as the alternating sum Σ_{μ=j}^{2N} (−1)^{μ+j} (2N)! e^{−γμt} / (2(2N−μ)!(μ−j)!j!),
    /// exact integer coefficients with Neumaier accumulation.
    fn alternating_population(n: usize, j: usize, gt: f64) -> (f64, f64) {
        let two_n = 2 * n;
        let (mut s, mut comp, mut abs) = (0.0f64, 0.0f64, 0.0f64);
        for mu in j..=two_n {
            let coeff = binomial(two_n, j) * binomial(two_n - j, mu - j);
            let sign = if (mu + j) % 2 == 0 { 1.0 } else { -1.0 };
            let term = sign * coeff.to_f64().unwrap() * (-(mu as f64) * gt).exp() * 0.5;
            let t = s + term;
            comp += if s.abs() >= term.abs() { (s - t) + term } else { (term - t) + s };
            s = t;
            abs += term.abs();
        }
        assert!(!binomial(two_n, j).is_zero());
        (s + comp, abs)
    }

    #[test]
    fn eigenvalue_examples() {
        let p = params(0.3, 0.7, 1.0);
        assert_eq!(liouvillian_eigenvalue(0, 1, &p), c(-0.3, 0.0));
        assert!((liouvillian_eigenvalue(6, 0, &p).re + 3.0 * 0.3).abs() < 1e-15);
        let m = 2i64;
        let d = liouvillian_eigenvalue_naive(m, 0, &p) - liouvillian_eigenvalue(m, 0, &p);
        assert!((d - c(0.0, 0.5 * 0.7 * m as f64)).norm() < 1e-15);
    }

    #[test]
    fn snapshot_initial_and_late() {
        let p = params(0.2, 0.7, 1.0);
        let s = decay_snapshot(3, &p, 0.0).unwrap();
        assert_eq!(s.rho00, 0.5);
        assert!((s.rho_2n_0 - c(0.5, 0.0)).norm() < 1e-15);
        for j in 0..5 {
            assert_eq!(s.diag[j], 0.0);
        }
        assert_eq!(s.rho_2n_2n(), 0.5);
        let late = decay_snapshot(3, &p, 500.0).unwrap();
        assert!((late.rho00 - 1.0).abs() < 1e-12);
        let sp = diagonalize_snapshot(&s);
        assert!((sp.lambda_plus - 1.0).abs() < 1e-15 && sp.lambda_minus.abs() < 1e-15);
        let sp = diagonalize_snapshot(&late);
        assert!((sp.lambda_plus - 1.0).abs() < 1e-12 && sp.lambda_minus.abs() < 1e-12);
    }

    #[test]
    fn closed_populations_match_alternating_sum() {
        for n in [1usize, 2, 4, 8] {
            for gt in [0.05, 0.4, 1.3] {
                let s = decay_snapshot(n, &params(1.0, 0.0, 0.0), gt).unwrap();
                for j in 1..=2 * n {
                    let (alt, scale) = alternating_population(n, j, gt);
                    assert!((s.diag[j - 1] - alt).abs() < 1e-15 * scale.max(1.0), "N={n} j={j} γt={gt}");
                }
            }
        }
    }

    #[test]
    fn large_n_trace_identity() {
        for n in [50usize, 256, 1000] {
            for gt in [1e-4, 0.01, 0.3, 3.0] {
                let s = decay_snapshot(n, &params(1.0, 0.0, 0.0), gt).unwrap();
                assert!((s.trace() - 1.0).abs() < SNAPSHOT_TRACE_TOL, "N={n} γt={gt}: {}", s.trace());
            }
        }
    }

    #[test]
    fn qfi_pure_limit_and_closed_form() {
        for n in [1usize, 2, 5] {
            let t = 0.7;
            let f = qfi_decay(n, 1e-9, t).unwrap();
            let pure = phase_derivative(n, t).powi(2);
            assert!((f / pure - 1.0).abs() < 1e-6, "N={n}: {f} vs {pure}");
        }
        for (n, gamma, t) in [(2usize, 0.2, 1.0), (1, 1.0, 0.3), (4, 0.05, 2.0)] {
            let a = qfi_decay(n, gamma, t).unwrap();
            let b = qfi_decay_closed_form(n, gamma, t).unwrap();
            assert!((a - b).abs() < 1e-10 * a, "{a} vs {b}");
        }
    }

    #[test]
    fn precision_profile_scales_with_total_time() {
        let a = precision_profile(3, 0.1, 100.0, 0.5).unwrap();
        let b = precision_profile(3, 0.1, 400.0, 0.5).unwrap();
        assert!((a / b - 2.0).abs() < 1e-14);
    }

    #[test]
    fn optimal_time_is_a_minimum() {
        let (n, gamma, total) = (10usize, 0.1, 100.0);
        let t = optimal_time(n, gamma, total).unwrap();
        let f = precision_profile(n, gamma, total, t).unwrap();
        for s in [0.9, 0.99, 1.01, 1.1] {
            assert!(precision_profile(n, gamma, total, t * s).unwrap() >= f);
        }
    }

    #[test]
    fn closed_form_variants_differ_for_small_n() {
        let a = delta_chi_quarter_time_closed_form(1, 0.1, 100.0, QuarterTimeForm::PositiveExponent);
        let b = delta_chi_quarter_time_closed_form(1, 0.1, 100.0, QuarterTimeForm::NegativeExponent);
        assert!((a - 0.0479).abs() < 5e-5, "{a}");
        assert!(a != b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn snapshot_invariants(n in 1usize..40, gt in 0.0f64..8.0, chi in -2.0f64..2.0) {
            let s = decay_snapshot(n, &params(1.0, chi, 1.0), gt).unwrap();
            prop_assert!((s.trace() - 1.0).abs() < SNAPSHOT_TRACE_TOL);
            prop_assert!(s.coherence_defect() <= 1e-12);
            let sp = diagonalize_snapshot(&s);
            prop_assert!(sp.lambda_minus >= -1e-12);
            prop_assert!(sp.lambda_plus >= 0.5 - 1e-12 && sp.lambda_minus <= 0.5 + 1e-12);
            prop_assert!((sp.lambda_plus + sp.lambda_minus - s.rho00 - s.rho_2n_2n()).abs() < 1e-14);
        }

        #[test]
        fn qfi_decay_is_chi_independent(n in 1usize..20, gt in 0.01f64..5.0) {
            let f = qfi_decay_at(n, &params(1.0, 0.3, 1.0), gt).unwrap();
            prop_assert!(f >= 0.0);
            prop_assert_eq!(f, qfi_decay_at(n, &params(1.0, 1.7, 1.0), gt).unwrap());
        }
    }

    #[test]
    fn bigint_binomial_sanity() {
        assert_eq!(binomial(10, 3), BigInt::from(120));
        assert_eq!(binomial(200, 100).to_string().len(), 59);
    }
}
