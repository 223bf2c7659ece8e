//! Complex-parameter special functions evaluated in the log domain:
//! log-gamma, ₀F₂ with large positive argument and terminating ₂F₁ sums.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::fock::{c, C64};

/// Relative size below which a series term no longer changes the sum.
pub const SERIES_REL_TOL: f64 = 1e-16;
/// Consecutive negligible terms required (past the term peak) before stopping.
pub const SERIES_STABLE_TERMS: usize = 50;
/// Hard cap on the number of series terms.
pub const SERIES_MAX_TERMS: usize = 50_000_000;

/// exp(log_modulus + i·phase), phase in (−π, π].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    pub log_modulus: f64,
    pub phase: f64,
}

fn wrap_phase(p: f64) -> f64 {
    let mut r = p.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        log_modulus: f64::NEG_INFINITY,
        phase: 0.0,
    };
    pub const ONE: LogComplex = LogComplex {
        log_modulus: 0.0,
        phase: 0.0,
    };

    pub fn new(log_modulus: f64, phase: f64) -> Self {
        Self {
            log_modulus,
            phase: wrap_phase(phase),
        }
    }

    pub fn from_complex(z: C64) -> Self {
        if z.norm() == 0.0 {
            return Self::ZERO;
        }
        Self::new(z.norm().ln(), z.arg())
    }

    /// Principal logarithm value ln|z| + i·arg z as a complex number.
    pub fn ln(&self) -> C64 {
        c(self.log_modulus, self.phase)
    }

    pub fn is_zero(&self) -> bool {
        self.log_modulus == f64::NEG_INFINITY
    }

    /// Converts to a plain complex number; overflows to infinity when out of range.
    pub fn to_complex(&self) -> C64 {
        if self.is_zero() {
            return c(0.0, 0.0);
        }
        let m = self.log_modulus.exp();
        c(m * self.phase.cos(), m * self.phase.sin())
    }

    pub fn mul(&self, other: &LogComplex) -> LogComplex {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.log_modulus + other.log_modulus, self.phase + other.phase)
    }

    pub fn div(&self, other: &LogComplex) -> LogComplex {
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.log_modulus - other.log_modulus, self.phase - other.phase)
    }

    pub fn conj(&self) -> LogComplex {
        Self::new(self.log_modulus, -self.phase)
    }

    pub fn powi(&self, n: u32) -> LogComplex {
        if n == 0 {
            return Self::ONE;
        }
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.log_modulus * n as f64, self.phase * n as f64)
    }
}

/// Running sum Σ t_m of log-domain terms, stored as `acc · e^scale`.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    scale: f64,
    acc: C64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self {
            scale: f64::NEG_INFINITY,
            acc: c(0.0, 0.0),
        }
    }
}

impl LogSum {
    pub fn add(&mut self, t: LogComplex) {
        if t.is_zero() {
            return;
        }
        let unit = c(t.phase.cos(), t.phase.sin());
        if self.scale == f64::NEG_INFINITY {
            self.scale = t.log_modulus;
            self.acc = unit;
        } else if t.log_modulus > self.scale {
            self.acc = self.acc * (self.scale - t.log_modulus).exp() + unit;
            self.scale = t.log_modulus;
        } else {
            self.acc += unit * (t.log_modulus - self.scale).exp();
        }
        let m = self.acc.norm();
        if m != 0.0 && !(1e-100..=1e100).contains(&m) {
            self.scale += m.ln();
            self.acc /= m;
        }
    }

    pub fn value(&self) -> LogComplex {
        if self.scale == f64::NEG_INFINITY || self.acc.norm() == 0.0 {
            return LogComplex::ZERO;
        }
        LogComplex::new(self.scale + self.acc.norm().ln(), self.acc.arg())
    }

    /// log|Σ|, or −∞ for an empty sum.
    pub fn log_modulus(&self) -> f64 {
        self.value().log_modulus
    }
}

/// Tracks the "50 negligible terms past the peak" stopping rule.
#[derive(Debug, Clone)]
pub(crate) struct ConvergenceMonitor {
    peak_index: f64,
    prev_log_term: f64,
    past_peak: bool,
    stable: usize,
}

impl ConvergenceMonitor {
    pub(crate) fn new(peak_index: f64) -> Self {
        Self {
            peak_index,
            prev_log_term: f64::NEG_INFINITY,
            past_peak: false,
            stable: 0,
        }
    }

    /// Feeds term `m` (log-modulus) and the current sum; returns true once converged.
    pub(crate) fn converged(&mut self, m: usize, log_term: f64, log_sum: f64) -> bool {
        if !self.past_peak && (m as f64) >= self.peak_index
            && (log_term < self.prev_log_term || log_term == f64::NEG_INFINITY)
        {
            self.past_peak = true;
        }
        self.prev_log_term = log_term;
        if !self.past_peak {
            return false;
        }
        if log_term == f64::NEG_INFINITY || log_term - log_sum < SERIES_REL_TOL.ln() {
            self.stable += 1;
        } else {
            self.stable = 0;
        }
        self.stable >= SERIES_STABLE_TERMS
    }
}

fn is_nonpositive_integer(z: C64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

// B_{2k} / (2k(2k−1)), k = 1..10
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

const STIRLING_MIN_RE: f64 = 15.0;
const SHIFT_LIMIT: f64 = -50.0;

fn stirling(z: C64) -> C64 {
    let half_ln_2pi = 0.5 * (TAU).ln();
    let zinv = z.inv();
    let zinv2 = zinv * zinv;
    let mut corr = c(0.0, 0.0);
    let mut pow = zinv;
    for coef in STIRLING {
        corr += pow * coef;
        pow *= zinv2;
    }
    (z - 0.5) * z.ln() - z + half_ln_2pi + corr
}

/// ln sin(πz) without overflow, modulo 2πi.
fn ln_sin_pi(z: C64) -> C64 {
    if z.im < 0.0 {
        return ln_sin_pi(z.conj()).conj();
    }
    // sin w = e^{−iw}(e^{2iw} − 1)/(2i), with |e^{2iw}| ≤ 1 for Im w ≥ 0
    let w = z * PI;
    let i = c(0.0, 1.0);
    let e2 = (i * w * 2.0).exp();
    -i * w + ((e2 - 1.0) / (i * 2.0)).ln()
}

/// Log-gamma on the principal branch (analytic continuation from the
/// positive real axis), via upward recurrence into the Stirling region.
/// For Re z < −50 the reflection formula is used and the imaginary part is
/// only defined modulo 2π.
pub fn log_gamma(z: C64) -> Result<C64> {
    if is_nonpositive_integer(z) {
        return Err(Error::GammaPole(z.re));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidParams(format!("log_gamma of non-finite {z}")));
    }
    if z.re < SHIFT_LIMIT {
        let refl = log_gamma(c(1.0, 0.0) - z)?;
        return Ok(c(PI.ln(), 0.0) - ln_sin_pi(z) - refl);
    }
    let mut shifted = z;
    let mut correction = c(0.0, 0.0);
    while shifted.re < STIRLING_MIN_RE {
        correction += shifted.ln();
        shifted += 1.0;
    }
    Ok(stirling(shifted) - correction)
}

/// (r)_k = r (r+1) ⋯ (r+k−1) as a running product.
pub fn pochhammer(r: C64, k: usize) -> C64 {
    (0..k).fold(c(1.0, 0.0), |acc, j| acc * (r + j as f64))
}

/// Log-domain ₀F₂(;b1,b2;x) = Σ_m x^m / ((b1)_m (b2)_m m!), x ≥ 0.
pub fn hyper0f2(b1: C64, b2: C64, x: f64) -> Result<LogComplex> {
    Ok(hyper0f2_counted(b1, b2, x)?.0)
}

/// As [`hyper0f2`], also returning the number of terms summed.
pub fn hyper0f2_counted(b1: C64, b2: C64, x: f64) -> Result<(LogComplex, usize)> {
    for b in [b1, b2] {
        if is_nonpositive_integer(b) {
            return Err(Error::PochhammerPole {
                z: format!("{b}"),
                k: (-b.re) as usize,
            });
        }
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::InvalidParams(format!("0F2 argument must be finite and >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok((LogComplex::ONE, 1));
    }
    let ln_x = x.ln();
    let mut sum = LogSum::default();
    let mut term = LogComplex::ONE;
    let mut monitor = ConvergenceMonitor::new(x.cbrt());
    for m in 0..SERIES_MAX_TERMS {
        sum.add(term);
        if monitor.converged(m, term.log_modulus, sum.log_modulus()) {
            return Ok((sum.value(), m + 1));
        }
        let mf = m as f64;
        let l1 = (b1 + mf).ln();
        let l2 = (b2 + mf).ln();
        term = LogComplex::new(
            term.log_modulus + ln_x - (mf + 1.0).ln() - l1.re - l2.re,
            term.phase - l1.im - l2.im,
        );
    }
    Err(Error::NonConvergence {
        terms: SERIES_MAX_TERMS,
    })
}

/// ₂F₁(−m, y; z; 2) = Σ_{k=0}^{m} (−m)_k (y)_k 2^k / ((z)_k k!), summed exactly.
pub fn hyper2f1_terminating(m: usize, y: C64, z: C64) -> Result<C64> {
    Ok(hyper2f1_terms(m, y, z)?.into_iter().sum())
}

/// Individual terms of the terminating ₂F₁ sum, in increasing k.
pub fn hyper2f1_terms(m: usize, y: C64, z: C64) -> Result<Vec<C64>> {
    let mut terms = Vec::with_capacity(m + 1);
    let mut t = c(1.0, 0.0);
    terms.push(t);
    for k in 0..m {
        let denom = (z + k as f64) * (k as f64 + 1.0);
        if (z + k as f64).norm() == 0.0 {
            return Err(Error::PochhammerPole {
                z: format!("{z}"),
                k: k + 1,
            });
        }
        t = t * (k as f64 - m as f64) * (y + k as f64) * 2.0 / denom;
        terms.push(t);
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn log_gamma_integers_and_half() {
        assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-15);
        assert!(log_gamma(c(2.0, 0.0)).unwrap().norm() < 1e-15);
        assert!(close(log_gamma(c(5.0, 0.0)).unwrap(), c(24f64.ln(), 0.0), 1e-14));
        assert!(close(log_gamma(c(0.5, 0.0)).unwrap(), c(0.5 * PI.ln(), 0.0), 1e-14));
        let f20: f64 = (1..20).map(|k| (k as f64).ln()).sum();
        assert!(close(log_gamma(c(20.0, 0.0)).unwrap(), c(f20, 0.0), 1e-14));
    }

    #[test]
    fn log_gamma_negative_real() {
        // Γ(−0.5) = −2√π
        let v = log_gamma(c(-0.5, 0.0)).unwrap();
        assert!(((v.re) - (2.0 * PI.sqrt()).ln()).abs() < 1e-13);
        assert!((v.im.abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn log_gamma_poles() {
        for z in [0.0, -1.0, -7.0] {
            assert_eq!(log_gamma(c(z, 0.0)), Err(Error::GammaPole(z)));
        }
    }

    #[test]
    fn log_gamma_recurrence_off_axis() {
        let z = c(0.5, -20.0);
        let lhs = log_gamma(z + 1.0).unwrap();
        let rhs = log_gamma(z).unwrap() + z.ln();
        assert!(close(lhs, rhs, 1e-13), "{lhs} vs {rhs}");
    }

    #[test]
    fn log_gamma_imaginary_axis_modulus() {
        // |Γ(iy)|² = π / (y sinh πy)
        for y in [0.3, 2.0, 17.0, 250.0] {
            let v = log_gamma(c(0.0, y)).unwrap();
            let expected = 0.5 * (PI.ln() - y.ln() - ((PI * y) - (2.0f64).ln() + (1.0 - (-2.0 * PI * y).exp()).ln()));
            assert!((v.re - expected).abs() < 1e-12 * expected.abs().max(1.0), "y={y}");
        }
    }

    #[test]
    fn log_gamma_large_argument_reflection() {
        // Reflection region vs recurrence: Γ(z)Γ(1−z) = π / sin(πz)
        let z = c(-80.3, 2.5);
        let lhs = log_gamma(z).unwrap() + log_gamma(c(1.0, 0.0) - z).unwrap();
        let rhs = c(PI.ln(), 0.0) - (z * PI).sin().ln();
        let d = lhs - rhs;
        assert!(d.re.abs() < 1e-10);
        let k = (d.im / TAU).round();
        assert!((d.im - k * TAU).abs() < 1e-9);
    }

    #[test]
    fn log_gamma_huge_modulus_recurrence() {
        let z = c(3.0, 9.0e5);
        let lhs = log_gamma(z + 1.0).unwrap();
        let rhs = log_gamma(z).unwrap() + z.ln();
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm());
    }

    #[test]
    fn hyper0f2_empty_argument() {
        let v = hyper0f2(c(1.0, 2.0), c(3.0, -1.0), 0.0).unwrap();
        assert_eq!(v, LogComplex::ONE);
    }

    #[test]
    fn hyper0f2_matches_naive_sum() {
        for x in [0.1, 1.0, 4.0, 10.0] {
            let mut term = 1.0f64;
            let mut naive = 1.0f64;
            for m in 0..30 {
                let mf = m as f64;
                term *= x / ((1.0 + mf) * (1.0 + mf) * (mf + 1.0));
                naive += term;
            }
            let v = hyper0f2(c(1.0, 0.0), c(1.0, 0.0), x).unwrap().to_complex();
            assert!((v.re - naive).abs() < 1e-14 * naive && v.im.abs() < 1e-14);
        }
    }

    #[test]
    fn hyper0f2_complex_naive() {
        let (b1, b2, x) = (c(0.7, 1.3), c(2.1, -0.4), 6.0);
        let mut term = c(1.0, 0.0);
        let mut naive = term;
        for m in 0..60 {
            let mf = m as f64;
            term = term * x / ((b1 + mf) * (b2 + mf) * (mf + 1.0));
            naive += term;
        }
        let v = hyper0f2(b1, b2, x).unwrap().to_complex();
        assert!(close(v, naive, 1e-14));
    }

    #[test]
    fn hyper0f2_log_domain_stress() {
        let b = c(1.0, -20.0);
        let (v, terms) = hyper0f2_counted(b, b.conj(), 8e8).unwrap();
        assert!(v.log_modulus.is_finite() && v.log_modulus > 700.0);
        assert!(v.phase.abs() < 1e-12);
        assert!(terms > 928, "terms={terms}");
    }

    #[test]
    fn hyper0f2_pole() {
        assert!(matches!(
            hyper0f2(c(-2.0, 0.0), c(1.0, 0.0), 1.0),
            Err(Error::PochhammerPole { .. })
        ));
    }

    #[test]
    fn hyper2f1_small_orders() {
        let (y, z) = (c(1.3, -0.2), c(0.4, 2.0));
        assert_eq!(hyper2f1_terminating(0, y, z).unwrap(), c(1.0, 0.0));
        let one = hyper2f1_terminating(1, y, z).unwrap();
        assert!(close(one, c(1.0, 0.0) - y * 2.0 / z, 1e-15));
    }

    #[test]
    fn hyper2f1_order_reversal() {
        let (y, z) = (c(2.0, 1.0), c(3.0, -2.0));
        let terms = hyper2f1_terms(7, y, z).unwrap();
        let forward: C64 = terms.iter().sum();
        let backward: C64 = terms.iter().rev().sum();
        assert!(close(forward, backward, 1e-12));
        assert!(close(hyper2f1_terminating(7, y, z).unwrap(), backward, 1e-12));
    }

    #[test]
    fn hyper2f1_pole() {
        assert!(matches!(
            hyper2f1_terminating(5, c(1.0, 0.0), c(-2.0, 0.0)),
            Err(Error::PochhammerPole { k: 3, .. })
        ));
        // pole beyond the last term is harmless
        assert!(hyper2f1_terminating(2, c(1.0, 0.0), c(-2.0, 0.0)).is_ok());
    }

    #[test]
    fn hyper2f1_parity_identity() {
        // ₂F₁(−m, b; 2b; 2) vanishes for odd m
        let b = c(0.3, -4.0);
        for m in [1usize, 3, 5, 9] {
            let v = hyper2f1_terminating(m, b, b * 2.0).unwrap();
            assert!(v.norm() < 1e-12, "m={m}: {v}");
        }
    }

    #[test]
    fn log_sum_handles_extreme_scales() {
        let mut s = LogSum::default();
        s.add(LogComplex::new(1000.0, 0.3));
        s.add(LogComplex::new(1000.0, 0.3));
        let v = s.value();
        assert!((v.log_modulus - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert!((v.phase - 0.3).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn conjugate_pair_0f2_is_real_and_at_least_one(re in 0.1f64..10.0, im in -50.0f64..50.0, x in 0.0f64..1e4) {
            let b = c(re, im);
            let v = hyper0f2(b, b.conj(), x).unwrap();
            prop_assert!(v.log_modulus >= -1e-15);
            prop_assert!(v.phase.abs() < 1e-10);
        }

        #[test]
        fn pochhammer_two_ways(re in -5.0f64..20.0, im in 0.1f64..30.0, k in 0usize..200) {
            let r = c(re, im);
            let by_product: C64 = (0..k).map(|j| (r + j as f64).ln()).sum();
            let by_gamma = log_gamma(r + k as f64).unwrap() - log_gamma(r).unwrap();
            let d = by_product - by_gamma;
            prop_assert!(d.re.abs() < 1e-11 * by_product.re.abs().max(1.0));
            let wrapped = d.im - (d.im / TAU).round() * TAU;
            prop_assert!(wrapped.abs() < 1e-11 * by_product.im.abs().max(1.0));
        }
    }
}
