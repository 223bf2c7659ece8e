//! Hamiltonians and Lindblad generators for the Kerr oscillator variants,
//! time integration of the master equation and dense steady-state solves.
//!
//! Density matrices are vectorized column-stacked: `vec(ρ)[i + j·d] = ρ[i, j]`.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use faer::linalg::solvers::Solve;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{annihilation_op, c, DensityMatrix, FockOperator, FockSpace, C64};

/// Trace-preservation tolerance of a generator.
pub const TRACE_PRESERVATION_TOL: f64 = 1e-9;
/// Residual bound ‖L ρ_ss‖ accepted from the steady-state solve.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-9;

/// Physical rates and drive amplitudes of one model instance.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega_c: f64,
    pub omega_p: f64,
    pub delta: f64,
    pub chi: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub omega_drive: f64,
    pub lambda_drive: f64,
}

impl ModelParams {
    /// Sets both frequencies and the detuning Δ = ω_c − ω_p.
    pub fn with_frequencies(mut self, omega_c: f64, omega_p: f64) -> Self {
        self.omega_c = omega_c;
        self.omega_p = omega_p;
        self.delta = omega_c - omega_p;
        self
    }

    pub fn with_chi(mut self, chi: f64) -> Self {
        self.chi = chi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_c", self.omega_c),
            ("omega_p", self.omega_p),
            ("delta", self.delta),
            ("chi", self.chi),
            ("gamma", self.gamma),
            ("kappa", self.kappa),
            ("omega_drive", self.omega_drive),
            ("lambda_drive", self.lambda_drive),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} is not finite")));
            }
        }
        for (name, v) in [
            ("gamma", self.gamma),
            ("kappa", self.kappa),
            ("omega_drive", self.omega_drive),
            ("lambda_drive", self.lambda_drive),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be >= 0, got {v}")));
            }
        }
        if (self.omega_c != 0.0 || self.omega_p != 0.0)
            && (self.delta - (self.omega_c - self.omega_p)).abs() > 1e-12 * self.omega_c.abs().max(1.0)
        {
            return Err(Error::InvalidParams(format!(
                "delta = {} disagrees with omega_c - omega_p = {}",
                self.delta,
                self.omega_c - self.omega_p
            )));
        }
        Ok(())
    }

    /// Mean-field photon number used to size the Fock truncation.
    pub fn mean_field_photon_number(&self, variant: Variant) -> f64 {
        let mut nbar: f64 = 0.0;
        let gh = 0.5 * self.gamma;
        if matches!(variant, Variant::OnePhoton | Variant::General) && self.omega_drive > 0.0 {
            // n [(Δ + χ n)² + (γ/2 + κ n)²] = Ω², largest root by bisection
            let f = |n: f64| {
                n * ((self.delta + self.chi * n).powi(2) + (gh + self.kappa * n).powi(2))
                    - self.omega_drive.powi(2)
            };
            let mut hi = 1.0;
            while f(hi) < 0.0 && hi < 1e12 {
                hi *= 2.0;
            }
            let mut lo = 0.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            nbar = nbar.max(hi);
        }
        if matches!(variant, Variant::TwoPhoton | Variant::General) && self.lambda_drive > 0.0 {
            let l2 = self.lambda_drive.powi(2);
            let detuned = gh * gh + self.delta * self.delta;
            if l2 < detuned {
                // squeezed-vacuum population below threshold
                nbar = nbar.max(l2 / (detuned - l2) + 1.0);
            }
            // above threshold: (Δ + χ n)² + (γ/2 + κ n)² = Λ²
            let nl = (self.chi.powi(2) + self.kappa.powi(2)).sqrt();
            if nl > 0.0 {
                nbar = nbar.max((self.lambda_drive + self.delta.abs()) / nl);
            }
        }
        nbar
    }

    /// Truncation heuristic ⌈N̄ + 8√(N̄+1) + 10⌉.
    pub fn suggested_dim(&self, variant: Variant) -> usize {
        let n = self.mean_field_photon_number(variant);
        (n + 8.0 * (n + 1.0).sqrt() + 10.0).ceil() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// ω_c a†a + (χ/2) a†²a²
    LabKerr,
    /// Rotating frame, coherent one-photon drive.
    OnePhoton,
    /// Rotating frame, two-photon drive.
    TwoPhoton,
    /// Rotating frame, one- and two-photon drives.
    General,
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "lab_kerr" => Ok(Variant::LabKerr),
            "one_photon" => Ok(Variant::OnePhoton),
            "two_photon" => Ok(Variant::TwoPhoton),
            "general" => Ok(Variant::General),
            other => Err(Error::UnknownVariant(other.to_string())),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::LabKerr => "lab_kerr",
            Variant::OnePhoton => "one_photon",
            Variant::TwoPhoton => "two_photon",
            Variant::General => "general",
        })
    }
}

pub fn build_hamiltonian(params: &ModelParams, variant: Variant, space: FockSpace) -> FockOperator {
    let a = annihilation_op(space);
    let ad = a.adjoint();
    let kerr = FockOperator::from_fn(space, |i, j| {
        if i == j {
            c(0.5 * params.chi * (i * i.saturating_sub(1)) as f64, 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    let number = |w: f64| {
        FockOperator::from_fn(space, |i, j| if i == j { c(w * i as f64, 0.0) } else { c(0.0, 0.0) })
    };
    // iΩ(a† − a)
    let one_photon = || (&ad - &a).scale(c(0.0, params.omega_drive));
    // (Λ/2)(a†² + a²)
    let two_photon = || (&(&ad * &ad) + &(&a * &a)).scale(c(0.5 * params.lambda_drive, 0.0));
    match variant {
        Variant::LabKerr => &number(params.omega_c) + &kerr,
        Variant::OnePhoton => &(&number(params.delta) + &kerr) + &one_photon(),
        Variant::TwoPhoton => &(&number(params.delta) + &kerr) + &two_photon(),
        Variant::General => &(&(&number(params.delta) + &kerr) + &two_photon()) + &one_photon(),
    }
}

/// Lindblad generator L(ρ) = −i[H,ρ] + Σ_k r_k 𝓓[O_k]ρ with
/// 𝓓[O]ρ = OρO† − {O†O, ρ}/2.
pub struct Superoperator {
    space: FockSpace,
    hamiltonian: FockOperator,
    jumps: Vec<Jump>,
    anticommutator_sign: f64,
    dense: OnceLock<Mat<C64>>,
}

struct Jump {
    rate: f64,
    op: FockOperator,
    op_dag: FockOperator,
    op_dag_op: FockOperator,
}

impl Clone for Superoperator {
    fn clone(&self) -> Self {
        Self::from_generator(
            self.hamiltonian.clone(),
            self.jumps.iter().map(|j| (j.rate, j.op.clone())).collect(),
        )
        .with_anticommutator_sign(self.anticommutator_sign)
    }
}

impl fmt::Debug for Superoperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Superoperator")
            .field("dim", &self.space.dim())
            .field("jumps", &self.jumps.iter().map(|j| j.rate).collect::<Vec<_>>())
            .finish()
    }
}

impl Superoperator {
    pub fn from_generator(hamiltonian: FockOperator, jumps: Vec<(f64, FockOperator)>) -> Self {
        let space = hamiltonian.space();
        let jumps = jumps
            .into_iter()
            .filter(|(r, _)| *r != 0.0)
            .map(|(rate, op)| {
                let op_dag = op.adjoint();
                let op_dag_op = &op_dag * &op;
                Jump {
                    rate,
                    op,
                    op_dag,
                    op_dag_op,
                }
            })
            .collect();
        Self {
            space,
            hamiltonian,
            jumps,
            anticommutator_sign: 1.0,
            dense: OnceLock::new(),
        }
    }

    /// Flips the sign of the anticommutator term of every dissipator. Test
    /// fixture for checking that trace-preservation diagnostics fire.
    #[doc(hidden)]
    pub fn with_anticommutator_sign(mut self, sign: f64) -> Self {
        self.anticommutator_sign = sign;
        self.dense = OnceLock::new();
        self
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn hamiltonian(&self) -> &FockOperator {
        &self.hamiltonian
    }

    pub fn is_dissipative(&self) -> bool {
        self.jumps.iter().any(|j| j.rate > 0.0)
    }

    /// L(ρ) in matrix form.
    pub fn apply(&self, rho: &Mat<C64>) -> Mat<C64> {
        let h = self.hamiltonian.entries();
        let mut out = (h * rho - rho * h) * faer::Scale(c(0.0, -1.0));
        for j in &self.jumps {
            let sandwich = j.op.entries() * rho * j.op_dag.entries();
            let anti = j.op_dag_op.entries() * rho + rho * j.op_dag_op.entries();
            out = out + (sandwich - anti * faer::Scale(c(0.5 * self.anticommutator_sign, 0.0)))
                * faer::Scale(c(j.rate, 0.0));
        }
        out
    }

    /// Heisenberg-picture adjoint L†(X), with Tr[X L(ρ)] = Tr[L†(X) ρ].
    pub fn adjoint_apply(&self, x: &Mat<C64>) -> Mat<C64> {
        let h = self.hamiltonian.entries();
        let mut out = (h * x - x * h) * faer::Scale(c(0.0, 1.0));
        for j in &self.jumps {
            let sandwich = j.op_dag.entries() * x * j.op.entries();
            let anti = j.op_dag_op.entries() * x + x * j.op_dag_op.entries();
            out = out + (sandwich - anti * faer::Scale(c(0.5 * self.anticommutator_sign, 0.0)))
                * faer::Scale(c(j.rate, 0.0));
        }
        out
    }

    /// ‖Tr∘L‖: Frobenius norm of the trace functional composed with L,
    /// which equals ‖L†(1)‖.
    pub fn trace_defect(&self) -> f64 {
        let d = self.space.dim();
        let id = Mat::<C64>::identity(d, d);
        self.adjoint_apply(&id).norm_l2()
    }

    /// Dense d²×d² matrix acting on column-stacked density matrices.
    pub fn entries(&self) -> &Mat<C64> {
        self.dense.get_or_init(|| self.assemble_dense())
    }

    fn assemble_dense(&self) -> Mat<C64> {
        let d = self.space.dim();
        let n = d * d;
        let mut m = Mat::<C64>::zeros(n, n);
        // vec(A ρ B)[i + j d] = Σ_{k,l} A[i,k] B[l,j] ρ[k,l]
        let mut sandwich = |a: &Mat<C64>, b: &Mat<C64>, coef: C64| {
            for i in 0..d {
                for k in 0..d {
                    let aik = a[(i, k)];
                    if aik == c(0.0, 0.0) {
                        continue;
                    }
                    for l in 0..d {
                        for j in 0..d {
                            let blj = b[(l, j)];
                            if blj == c(0.0, 0.0) {
                                continue;
                            }
                            m[(i + j * d, k + l * d)] += coef * aik * blj;
                        }
                    }
                }
            }
        };
        let id = Mat::<C64>::identity(d, d);
        let h = self.hamiltonian.entries();
        sandwich(h, &id, c(0.0, -1.0));
        sandwich(&id, h, c(0.0, 1.0));
        for j in &self.jumps {
            let half = c(-0.5 * self.anticommutator_sign * j.rate, 0.0);
            sandwich(j.op.entries(), j.op_dag.entries(), c(j.rate, 0.0));
            sandwich(j.op_dag_op.entries(), &id, half);
            sandwich(&id, j.op_dag_op.entries(), half);
        }
        m
    }

    /// Multiplies the dense matrix onto a column-stacked vector.
    pub fn apply_vec(&self, v: &[C64]) -> Vec<C64> {
        let d = self.space.dim();
        let rho = unvec(v, d);
        vec_of(&self.apply(&rho))
    }
}

pub(crate) fn vec_of(m: &Mat<C64>) -> Vec<C64> {
    let d = m.nrows();
    let mut v = Vec::with_capacity(d * m.ncols());
    for j in 0..m.ncols() {
        for i in 0..d {
            v.push(m[(i, j)]);
        }
    }
    v
}

pub(crate) fn unvec(v: &[C64], d: usize) -> Mat<C64> {
    Mat::from_fn(d, d, |i, j| v[i + j * d])
}

pub fn build_liouvillian(params: &ModelParams, variant: Variant, space: FockSpace) -> Superoperator {
    let h = build_hamiltonian(params, variant, space);
    let a = annihilation_op(space);
    let a2 = &a * &a;
    Superoperator::from_generator(h, vec![(params.gamma, a), (params.kappa, a2)])
}

/// Tolerances for [`evolve`].
#[derive(Debug, Clone, Copy)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-13,
            min_step: 1e-14,
            max_steps: 5_000_000,
        }
    }
}

/// ρ(t) = exp(L t) ρ0 with the Dormand–Prince 5(4) embedded pair.
pub fn evolve(rho0: &DensityMatrix, l: &Superoperator, t: f64, tol: f64) -> Result<DensityMatrix> {
    let opts = IntegratorOptions {
        rtol: tol,
        ..IntegratorOptions::default()
    };
    evolve_with(rho0, l, t, &opts)
}

pub fn evolve_with(
    rho0: &DensityMatrix,
    l: &Superoperator,
    t: f64,
    opts: &IntegratorOptions,
) -> Result<DensityMatrix> {
    if rho0.space() != l.space() {
        return Err(Error::DimensionMismatch {
            expected: l.space().dim(),
            found: rho0.dim(),
        });
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidParams(format!("evolution time must be >= 0, got {t}")));
    }
    let y = integrate_dopri5(|y| l.apply(y), rho0.entries().clone(), t, opts)?;
    DensityMatrix::new_unchecked(l.space(), y)
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b − b̂ (error weights)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn lin(y: &Mat<C64>, terms: &[(f64, &Mat<C64>)]) -> Mat<C64> {
    let mut out = y.clone();
    for (w, k) in terms {
        if *w != 0.0 {
            out = out + *k * faer::Scale(c(*w, 0.0));
        }
    }
    out
}

pub(crate) fn integrate_dopri5<F>(f: F, y0: Mat<C64>, t_end: f64, opts: &IntegratorOptions) -> Result<Mat<C64>>
where
    F: Fn(&Mat<C64>) -> Mat<C64>,
{
    let mut y = y0;
    if t_end == 0.0 {
        return Ok(y);
    }
    let mut t = 0.0;
    let mut k1 = f(&y);
    let scale0 = y.norm_max().max(1e-300);
    let mut h = (0.01 * scale0 / k1.norm_max().max(1e-300)).min(t_end).max(opts.min_step * 10.0);
    let mut steps = 0usize;
    while t < t_end {
        if steps >= opts.max_steps {
            return Err(Error::StepSizeUnderflow { t, h, err: f64::NAN });
        }
        steps += 1;
        if t + h > t_end {
            h = t_end - t;
        }
        let zero = Mat::<C64>::zeros(y.nrows(), y.ncols());
        let k2 = f(&lin(&y, &[(h * A21, &k1)]));
        let k3 = f(&lin(&y, &[(h * A31, &k1), (h * A32, &k2)]));
        let k4 = f(&lin(&y, &[(h * A41, &k1), (h * A42, &k2), (h * A43, &k3)]));
        let k5 = f(&lin(&y, &[(h * A51, &k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)]));
        let k6 = f(&lin(
            &y,
            &[(h * A61, &k1), (h * A62, &k2), (h * A63, &k3), (h * A64, &k4), (h * A65, &k5)],
        ));
        let y_new = lin(&y, &[(h * B1, &k1), (h * B3, &k3), (h * B4, &k4), (h * B5, &k5), (h * B6, &k6)]);
        let k7 = f(&y_new);
        let err_vec = lin(
            &zero,
            &[(h * E1, &k1), (h * E3, &k3), (h * E4, &k4), (h * E5, &k5), (h * E6, &k6), (h * E7, &k7)],
        );
        let mut err: f64 = 0.0;
        for j in 0..y.ncols() {
            for i in 0..y.nrows() {
                let sc = opts.atol + opts.rtol * y[(i, j)].norm().max(y_new[(i, j)].norm());
                err = err.max(err_vec[(i, j)].norm() / sc);
            }
        }
        if err <= 1.0 {
            t += h;
            y = y_new;
            k1 = k7;
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            h *= fac;
            if h < opts.min_step {
                return Err(Error::StepSizeUnderflow { t, h, err });
            }
        }
    }
    Ok(y)
}

/// exp(L t) as a dense matrix via scaling and squaring of a Taylor series.
/// Intended for small spaces (d² up to a few hundred).
pub fn propagator_expm(l: &Superoperator, t: f64) -> Mat<C64> {
    let m = l.entries() * faer::Scale(c(t, 0.0));
    let n = m.nrows();
    let norm: f64 = (0..n)
        .map(|j| (0..n).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = &m * faer::Scale(c(0.5f64.powi(squarings as i32), 0.0));
    let mut result = Mat::<C64>::identity(n, n);
    let mut term = Mat::<C64>::identity(n, n);
    for k in 1..=30 {
        term = (&term * &scaled) * faer::Scale(c(1.0 / k as f64, 0.0));
        result = result + &term;
        if term.norm_max() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Unique null vector of a dissipative generator, Hermitized and
/// trace-normalized.
///
/// One row of L is replaced by the trace functional and the bordered system
/// is solved by LU with partial pivoting. A degenerate null space leaves the
/// bordered system singular, which is reported with its dimension.
pub fn steady_state(l: &Superoperator) -> Result<DensityMatrix> {
    if !l.is_dissipative() {
        return Err(Error::InvalidParams(
            "steady state requires gamma > 0 or kappa > 0".into(),
        ));
    }
    let d = l.space().dim();
    let n = d * d;
    let dense = l.entries();
    let scale = dense.norm_max().max(1.0);
    let mut bordered = dense.clone();
    for col in 0..n {
        bordered[(0, col)] = c(0.0, 0.0);
    }
    for i in 0..d {
        bordered[(0, i + i * d)] = c(scale, 0.0);
    }
    let mut rhs = Mat::<C64>::zeros(n, 1);
    rhs[(0, 0)] = c(scale, 0.0);
    let lu = bordered.partial_piv_lu();
    let sol = lu.solve(&rhs);
    let finite = (0..n).all(|i| sol[(i, 0)].re.is_finite() && sol[(i, 0)].im.is_finite());
    let rho = if finite {
        let m = Mat::from_fn(d, d, |i, j| sol[(i + j * d, 0)]);
        let herm = crate::fock::hermitian_part(&m);
        let tr: C64 = (0..d).map(|i| herm[(i, i)]).sum();
        Some(herm * faer::Scale(c(1.0, 0.0) / tr))
    } else {
        None
    };
    let residual = rho.as_ref().map(|r| l.apply(r).norm_l2()).unwrap_or(f64::INFINITY);
    if !(residual < STEADY_RESIDUAL_TOL * scale.max(1.0)) {
        let k = null_space_dimension(l, 1e-10)?;
        if k != 1 {
            return Err(Error::DegenerateSteadyState(k));
        }
        return Err(Error::LinearAlgebra(format!(
            "steady-state residual {residual:e} exceeds tolerance"
        )));
    }
    DensityMatrix::new_unchecked(l.space(), rho.expect("finite solution"))
}

/// Number of singular values of L below `rel_tol · σ_max`.
pub fn null_space_dimension(l: &Superoperator, rel_tol: f64) -> Result<usize> {
    let sv = l
        .entries()
        .singular_values()
        .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
    let smax = sv.first().copied().unwrap_or(0.0);
    Ok(sv.iter().filter(|&&s| s <= rel_tol * smax.max(1e-300)).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{number_op, number_superposition_state, PureState};

    fn space(d: usize) -> FockSpace {
        FockSpace::new(d).unwrap()
    }

    #[test]
    fn lab_kerr_diagonal() {
        let p = ModelParams {
            omega_c: 1.0,
            chi: 2.0,
            ..Default::default()
        };
        let h = build_hamiltonian(&p, Variant::LabKerr, space(3));
        let diag: Vec<f64> = (0..3).map(|i| h.get(i, i).re).collect();
        assert_eq!(diag, vec![0.0, 1.0, 4.0]);
    }

    #[test]
    fn one_photon_without_drive_is_detuned_kerr() {
        let p = ModelParams {
            delta: 0.7,
            chi: 0.3,
            ..Default::default()
        };
        let h = build_hamiltonian(&p, Variant::OnePhoton, space(6));
        for i in 0..6usize {
            for j in 0..6 {
                let expected = if i == j {
                    0.7 * i as f64 + 0.15 * (i * i.saturating_sub(1)) as f64
                } else {
                    0.0
                };
                assert!((h.get(i, j) - c(expected, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn hamiltonians_are_hermitian() {
        let p = ModelParams {
            omega_c: 1.1,
            delta: 0.4,
            chi: 0.3,
            omega_drive: 1.7,
            lambda_drive: 0.6,
            ..Default::default()
        };
        for v in [Variant::LabKerr, Variant::OnePhoton, Variant::TwoPhoton, Variant::General] {
            assert!(build_hamiltonian(&p, v, space(12)).hermiticity_defect() < 1e-12);
        }
    }

    #[test]
    fn unknown_variant_rejected() {
        assert!(matches!("three_photon".parse::<Variant>(), Err(Error::UnknownVariant(_))));
        assert_eq!("two-photon".parse::<Variant>().unwrap(), Variant::TwoPhoton);
    }

    #[test]
    fn unitary_generator_has_imaginary_spectrum() {
        let p = ModelParams {
            delta: 0.3,
            chi: 0.2,
            omega_drive: 0.5,
            ..Default::default()
        };
        let l = build_liouvillian(&p, Variant::OnePhoton, space(5));
        let eig = l.entries().eigenvalues().unwrap();
        for z in eig {
            assert!(z.re.abs() < 1e-9, "{z}");
        }
    }

    #[test]
    fn single_photon_decay_action() {
        let s = space(4);
        let p = ModelParams {
            gamma: 1.0,
            ..Default::default()
        };
        let l = build_liouvillian(&p, Variant::OnePhoton, s);
        let rho = PureState::fock(s, 1).unwrap().to_density();
        let out = l.apply(rho.entries());
        for i in 0..4 {
            for j in 0..4 {
                let expected = match (i, j) {
                    (0, 0) => 1.0,
                    (1, 1) => -1.0,
                    _ => 0.0,
                };
                assert!((out[(i, j)] - c(expected, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn two_photon_decay_action() {
        let s = space(4);
        let p = ModelParams {
            kappa: 1.0,
            ..Default::default()
        };
        let l = build_liouvillian(&p, Variant::OnePhoton, s);
        let rho = PureState::fock(s, 2).unwrap().to_density();
        let out = l.apply(rho.entries());
        let dense = l.apply_vec(&vec_of(rho.entries()));
        for i in 0..4 {
            for j in 0..4 {
                let expected = match (i, j) {
                    (0, 0) => 2.0,
                    (2, 2) => -2.0,
                    _ => 0.0,
                };
                assert!((out[(i, j)] - c(expected, 0.0)).norm() < 1e-14);
                assert!((dense[i + 4 * j] - c(expected, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn dense_matches_operator_form() {
        let s = space(5);
        let p = ModelParams {
            delta: 0.4,
            chi: 0.3,
            gamma: 0.8,
            kappa: 0.2,
            omega_drive: 0.9,
            lambda_drive: 0.3,
            ..Default::default()
        };
        let l = build_liouvillian(&p, Variant::General, s);
        let rho = PureState::coherent(s, c(0.3, 0.2)).unwrap().to_density();
        let v = vec_of(rho.entries());
        let dense = l.entries();
        let out = l.apply(rho.entries());
        for row in 0..25 {
            let mut acc = c(0.0, 0.0);
            for col in 0..25 {
                acc += dense[(row, col)] * v[col];
            }
            assert!((acc - out[(row % 5, row / 5)]).norm() < 1e-13);
        }
        assert!(l.trace_defect() < TRACE_PRESERVATION_TOL);
    }

    #[test]
    fn injected_sign_error_breaks_trace() {
        let p = ModelParams {
            gamma: 1.0,
            ..Default::default()
        };
        let l = build_liouvillian(&p, Variant::OnePhoton, space(6)).with_anticommutator_sign(-1.0);
        assert!(l.trace_defect() > 1.0);
    }

    #[test]
    fn evolve_zero_time_is_identity() {
        let s = space(6);
        let p = ModelParams {
            gamma: 1.0,
            chi: 0.5,
            omega_drive: 1.0,
            ..Default::default()
        };
        let l = build_liouvillian(&p, Variant::OnePhoton, s);
        let rho0 = PureState::coherent(s, c(0.5, 0.0)).unwrap().to_density();
        let out = evolve(&rho0, &l, 0.0, 1e-10).unwrap();
        assert_eq!(out.max_abs_diff(&rho0).unwrap(), 0.0);
        assert!(evolve(&rho0, &l, -1.0, 1e-10).is_err());
    }

    #[test]
    fn damped_cavity_population() {
        let s = space(4);
        let p = ModelParams {
            gamma: 0.7,
            ..Default::default()
        };
        let l = build_liouvillian(&p, Variant::OnePhoton, s);
        let rho0 = PureState::fock(s, 1).unwrap().to_density();
        for t in [0.1, 1.0, 3.0] {
            let rho = evolve(&rho0, &l, t, 1e-10).unwrap();
            let n = rho.expectation(&number_op(s)).unwrap().re;
            assert!((n - (-0.7 * t).exp()).abs() < 1e-9, "t={t}: {n}");
            assert!((rho.trace() - c(1.0, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn closed_kerr_phase_matches_energy_difference() {
        let s = space(4);
        let (wc, chi, t) = (1.0, 0.4, 1.3);
        let p = ModelParams {
            omega_c: wc,
            chi,
            ..Default::default()
        };
        let l = build_liouvillian(&p, Variant::LabKerr, s);
        let rho0 = number_superposition_state(1, s).unwrap().to_density();
        let rho = evolve(&rho0, &l, t, 1e-11).unwrap();
        // E(2) − E(0) = 2ω_c + χ
        let phase = -(2.0 * wc + chi) * t;
        let expected = c(0.0, phase).exp() * 0.5;
        assert!((rho.get(2, 0) - expected).norm() < 1e-9);
    }

    #[test]
    fn expm_agrees_with_integrator() {
        let s = space(5);
        let p = ModelParams {
            delta: 0.2,
            chi: 0.3,
            gamma: 1.0,
            omega_drive: 0.8,
            ..Default::default()
        };
        let l = build_liouvillian(&p, Variant::OnePhoton, s);
        let rho0 = DensityMatrix::vacuum(s);
        let prop = propagator_expm(&l, 2.0);
        let v = vec_of(rho0.entries());
        let mut out = vec![c(0.0, 0.0); 25];
        for i in 0..25 {
            for j in 0..25 {
                out[i] += prop[(i, j)] * v[j];
            }
        }
        let by_ode = evolve(&rho0, &l, 2.0, 1e-11).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert!((out[i + 5 * j] - by_ode.get(i, j)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn undriven_steady_state_is_vacuum() {
        let s = space(8);
        let p = ModelParams {
            delta: 0.3,
            chi: 0.5,
            gamma: 1.0,
            ..Default::default()
        };
        let rho = steady_state(&build_liouvillian(&p, Variant::OnePhoton, s)).unwrap();
        assert!(rho.max_abs_diff(&DensityMatrix::vacuum(s)).unwrap() < 1e-12);
    }

    #[test]
    fn linear_cavity_steady_state() {
        // α = 2Ω/(γ + 2iΔ), N = 4Ω²/(4Δ² + γ²)
        let p = ModelParams {
            gamma: 1.0,
            omega_drive: 0.5,
            ..Default::default()
        };
        let s = space(p.suggested_dim(Variant::OnePhoton));
        let rho = steady_state(&build_liouvillian(&p, Variant::OnePhoton, s)).unwrap();
        let a = annihilation_op(s);
        assert!((rho.expectation(&a).unwrap() - c(1.0, 0.0)).norm() < 1e-9);
        assert!((rho.expectation(&number_op(s)).unwrap().re - 1.0).abs() < 1e-9);
        rho.validate(1e-9).unwrap();
    }

    #[test]
    fn steady_state_truncation_convergence() {
        let p = ModelParams {
            delta: 0.5,
            chi: 0.3,
            gamma: 1.0,
            omega_drive: 2.0,
            ..Default::default()
        };
        let d = p.suggested_dim(Variant::OnePhoton);
        let n = |d: usize| {
            let s = space(d);
            steady_state(&build_liouvillian(&p, Variant::OnePhoton, s))
                .unwrap()
                .expectation(&number_op(s))
                .unwrap()
                .re
        };
        assert!((n(d) - n(2 * d)).abs() < 1e-8);
    }

    #[test]
    fn degenerate_null_space_reported() {
        // Without dissipation every Fock projector is stationary.
        let p = ModelParams {
            chi: 0.3,
            ..Default::default()
        };
        let l = build_liouvillian(&p, Variant::LabKerr, space(4));
        assert!(steady_state(&l).is_err());
        assert_eq!(null_space_dimension(&l, 1e-10).unwrap(), 4 + 2);
    }

    #[test]
    fn mean_field_linear_limit() {
        let p = ModelParams {
            delta: 0.5,
            gamma: 1.0,
            omega_drive: 3.0,
            ..Default::default()
        };
        let n = p.mean_field_photon_number(Variant::OnePhoton);
        assert!((n - 36.0 / 2.0).abs() < 1e-9);
    }
}
