//! Truncated single-mode Fock space: ladder and quadrature operators, pure
//! states and density matrices stored as dense complex matrices.

use std::ops::{Add, Mul, Sub};

use faer::{Col, Mat};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Hermiticity and trace tolerance for [`DensityMatrix`].
pub const DENSITY_TOL: f64 = 1e-10;
/// Norm tolerance for [`PureState`].
pub const PURE_NORM_TOL: f64 = 1e-12;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Basis |0⟩ … |dim−1⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockSpace {
    dim: usize,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check(&self, other: &FockSpace) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

/// Square operator on a truncated Fock space.
#[derive(Debug, Clone)]
pub struct FockOperator {
    space: FockSpace,
    entries: Mat<C64>,
}

impl FockOperator {
    pub fn from_mat(space: FockSpace, entries: Mat<C64>) -> Result<Self> {
        if entries.nrows() != space.dim() || entries.ncols() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: entries.nrows().max(entries.ncols()),
            });
        }
        Ok(Self { space, entries })
    }

    pub fn from_fn(space: FockSpace, f: impl FnMut(usize, usize) -> C64) -> Self {
        let d = space.dim();
        Self {
            space,
            entries: Mat::from_fn(d, d, f),
        }
    }

    pub fn zeros(space: FockSpace) -> Self {
        Self::from_fn(space, |_, _| C64::new(0.0, 0.0))
    }

    pub fn identity(space: FockSpace) -> Self {
        Self::from_fn(space, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn entries(&self) -> &Mat<C64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space,
            entries: self.entries.adjoint().to_owned(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_fn(self.space, |i, j| self.entries[(i, j)] * s)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Largest entrywise deviation ‖A − A†‖_max.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.entries[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        let d = self.dim();
        let mut m = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                m = m.max(self.entries[(i, j)].norm());
            }
        }
        m
    }

    pub fn apply(&self, psi: &PureState) -> Result<Col<C64>> {
        self.space.check(&psi.space)?;
        Ok(&self.entries * &psi.amplitudes)
    }
}

impl<'a> Mul<&'a FockOperator> for &'a FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: &'a FockOperator) -> FockOperator {
        assert_eq!(self.space, rhs.space, "operator spaces differ");
        FockOperator {
            space: self.space,
            entries: &self.entries * &rhs.entries,
        }
    }
}

impl<'a> Add<&'a FockOperator> for &'a FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: &'a FockOperator) -> FockOperator {
        assert_eq!(self.space, rhs.space, "operator spaces differ");
        FockOperator {
            space: self.space,
            entries: &self.entries + &rhs.entries,
        }
    }
}

impl<'a> Sub<&'a FockOperator> for &'a FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: &'a FockOperator) -> FockOperator {
        assert_eq!(self.space, rhs.space, "operator spaces differ");
        FockOperator {
            space: self.space,
            entries: &self.entries - &rhs.entries,
        }
    }
}

/// a|n⟩ = √n |n−1⟩.
pub fn annihilation_op(space: FockSpace) -> FockOperator {
    FockOperator::from_fn(space, |i, j| {
        if j == i + 1 {
            c((j as f64).sqrt(), 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

pub fn creation_op(space: FockSpace) -> FockOperator {
    annihilation_op(space).adjoint()
}

pub fn number_op(space: FockSpace) -> FockOperator {
    FockOperator::from_fn(space, |i, j| {
        if i == j {
            c(i as f64, 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

/// q = (a + a†)/√2 and p = (a − a†)/(i√2).
pub fn quadrature_ops(space: FockSpace) -> (FockOperator, FockOperator) {
    let a = annihilation_op(space);
    let ad = a.adjoint();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let q = (&a + &ad).scale(c(s, 0.0));
    // 1/(i√2) = −i/√2
    let p = (&a - &ad).scale(c(0.0, -s));
    (q, p)
}

/// Normalized pure state.
#[derive(Debug, Clone)]
pub struct PureState {
    space: FockSpace,
    amplitudes: Col<C64>,
}

impl PureState {
    pub fn new(space: FockSpace, amplitudes: Col<C64>) -> Result<Self> {
        if amplitudes.nrows() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: amplitudes.nrows(),
            });
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > PURE_NORM_TOL {
            return Err(Error::InvalidState(format!("norm² = {norm}")));
        }
        Ok(Self { space, amplitudes })
    }

    /// Normalizes the given amplitudes.
    pub fn normalized(space: FockSpace, amplitudes: Col<C64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite norm".into()));
        }
        let amps = Col::from_fn(amplitudes.nrows(), |i| amplitudes[i] / norm);
        Self::new(space, amps)
    }

    pub fn fock(space: FockSpace, n: usize) -> Result<Self> {
        if n >= space.dim() {
            return Err(Error::TruncationTooSmall {
                dim: space.dim(),
                needed: n,
            });
        }
        Self::new(
            space,
            Col::from_fn(space.dim(), |i| if i == n { c(1.0, 0.0) } else { c(0.0, 0.0) }),
        )
    }

    /// Coherent state with amplitude `alpha`, renormalized after truncation.
    pub fn coherent(space: FockSpace, alpha: C64) -> Result<Self> {
        let mut amps = Col::zeros(space.dim());
        let mut term = c((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        for n in 0..space.dim() {
            if n > 0 {
                term = term * alpha / (n as f64).sqrt();
            }
            amps[n] = term;
        }
        Self::normalized(space, amps)
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &Col<C64> {
        &self.amplitudes
    }

    pub fn to_density(&self) -> DensityMatrix {
        let d = self.space.dim();
        DensityMatrix {
            space: self.space,
            entries: Mat::from_fn(d, d, |i, j| self.amplitudes[i] * self.amplitudes[j].conj()),
        }
    }

    pub fn expectation(&self, op: &FockOperator) -> Result<C64> {
        let v = op.apply(self)?;
        Ok((0..self.space.dim())
            .map(|i| self.amplitudes[i].conj() * v[i])
            .sum())
    }
}

/// (|0⟩ + |2N⟩)/√2, which carries mean photon number N.
pub fn number_superposition_state(n: usize, space: FockSpace) -> Result<PureState> {
    if n == 0 {
        return Err(Error::InvalidState("photon number N must be positive".into()));
    }
    if space.dim() <= 2 * n {
        return Err(Error::TruncationTooSmall {
            dim: space.dim(),
            needed: 2 * n,
        });
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PureState::new(
        space,
        Col::from_fn(space.dim(), |i| {
            if i == 0 || i == 2 * n {
                c(s, 0.0)
            } else {
                c(0.0, 0.0)
            }
        }),
    )
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    space: FockSpace,
    entries: Mat<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity (eigenvalues ≥ −1e−10).
    pub fn new(space: FockSpace, entries: Mat<C64>) -> Result<Self> {
        let rho = Self::new_unchecked(space, entries)?;
        rho.validate(DENSITY_TOL)?;
        Ok(rho)
    }

    /// Checks shape only. Used for intermediate results (integrator output)
    /// whose invariants hold to a looser tolerance.
    pub fn new_unchecked(space: FockSpace, entries: Mat<C64>) -> Result<Self> {
        if entries.nrows() != space.dim() || entries.ncols() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: entries.nrows().max(entries.ncols()),
            });
        }
        Ok(Self { space, entries })
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let op = self.as_operator();
        let herm = op.hermiticity_defect();
        if herm > tol {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (defect {herm:e})"
            )));
        }
        let tr = op.trace();
        if (tr - c(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidDensityMatrix(format!("trace = {tr}")));
        }
        let min_eig = self.eigenvalues()?.first().copied().unwrap_or(0.0);
        if min_eig < -tol {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(())
    }

    pub fn vacuum(space: FockSpace) -> Self {
        PureState::fock(space, 0)
            .expect("dim >= 2 always holds the vacuum")
            .to_density()
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn entries(&self) -> &Mat<C64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    pub fn as_operator(&self) -> FockOperator {
        FockOperator {
            space: self.space,
            entries: self.entries.clone(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.entries[(i, i)]).sum()
    }

    /// Eigenvalues in nondecreasing order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let herm = hermitian_part(&self.entries);
        herm.self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))
    }

    /// Spectral decomposition (eigenvalues nondecreasing, eigenvectors as columns).
    pub fn eigen(&self) -> Result<(Vec<f64>, Mat<C64>)> {
        let herm = hermitian_part(&self.entries);
        let evd = herm
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
        let vals = evd.S().column_vector().iter().map(|z| z.re).collect();
        Ok((vals, evd.U().to_owned()))
    }

    pub fn purity(&self) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += self.entries[(i, j)].norm_sqr();
            }
        }
        s
    }

    /// Tr[M ρ].
    pub fn expectation(&self, op: &FockOperator) -> Result<C64> {
        self.space.check(&op.space())?;
        let d = self.dim();
        let m = op.entries();
        let mut acc = c(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += m[(i, j)] * self.entries[(j, i)];
            }
        }
        Ok(acc)
    }

    /// Largest entrywise difference to another density matrix.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> Result<f64> {
        self.space.check(&other.space)?;
        let d = self.dim();
        let mut m = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                m = m.max((self.entries[(i, j)] - other.entries[(i, j)]).norm());
            }
        }
        Ok(m)
    }
}

/// (A + A†)/2, removing round-off anti-Hermitian parts before eigensolves.
pub(crate) fn hermitian_part(m: &Mat<C64>) -> Mat<C64> {
    let n = m.nrows();
    Mat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(d: usize) -> FockSpace {
        FockSpace::new(d).unwrap()
    }

    #[test]
    fn rejects_tiny_space() {
        assert_eq!(FockSpace::new(1), Err(Error::InvalidDimension(1)));
    }

    #[test]
    fn ladder_dim2() {
        let a = annihilation_op(space(2));
        assert_eq!(a.get(0, 1), c(1.0, 0.0));
        assert_eq!(a.get(0, 0), c(0.0, 0.0));
        assert_eq!(a.get(1, 0), c(0.0, 0.0));
        assert_eq!(a.get(1, 1), c(0.0, 0.0));
    }

    #[test]
    fn number_operator_diagonal() {
        let s = space(3);
        let a = annihilation_op(s);
        let n = &a.adjoint() * &a;
        for k in 0..3 {
            assert!((n.get(k, k) - c(k as f64, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn commutator_truncation_artifact() {
        let s = space(20);
        let a = annihilation_op(s);
        let comm = a.commutator(&a.adjoint());
        for i in 0..20 {
            for j in 0..20 {
                let expected = match (i, j) {
                    (19, 19) => -19.0,
                    _ if i == j => 1.0,
                    _ => 0.0,
                };
                assert!((comm.get(i, j) - c(expected, 0.0)).norm() < 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn ladder_action_on_fock_states() {
        let s = space(12);
        let a = annihilation_op(s);
        for n in 0..12 {
            let v = a.apply(&PureState::fock(s, n).unwrap()).unwrap();
            for k in 0..12 {
                let expected = if n > 0 && k == n - 1 { (n as f64).sqrt() } else { 0.0 };
                assert_eq!(v[k], c(expected, 0.0));
            }
        }
    }

    #[test]
    fn quadratures_dim2_and_canonical_commutator() {
        let (q, p) = quadrature_ops(space(2));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((q.get(0, 1) - c(s, 0.0)).norm() < 1e-15);
        assert!((q.get(1, 0) - c(s, 0.0)).norm() < 1e-15);

        let d = 15;
        let (q, p2) = quadrature_ops(space(d));
        assert!(q.is_hermitian(1e-15) && p2.is_hermitian(1e-15) && p.is_hermitian(1e-15));
        let comm = q.commutator(&p2);
        for i in 0..d - 1 {
            for j in 0..d - 1 {
                let expected = if i == j { c(0.0, 1.0) } else { c(0.0, 0.0) };
                assert!((comm.get(i, j) - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn vacuum_quadrature_moments() {
        let s = space(6);
        let rho = DensityMatrix::vacuum(s);
        let (q, p) = quadrature_ops(s);
        assert!(rho.expectation(&q).unwrap().norm() < 1e-15);
        assert!(rho.expectation(&p).unwrap().norm() < 1e-15);
        assert!((rho.expectation(&(&q * &q)).unwrap().re - 0.5).abs() < 1e-15);
        assert!((rho.expectation(&(&p * &p)).unwrap().re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coherent_state_quadrature_mean() {
        let s = space(60);
        let alpha = c(1.3, -0.4);
        let psi = PureState::coherent(s, alpha).unwrap();
        let (q, p) = quadrature_ops(s);
        let a = annihilation_op(s);
        assert!((psi.expectation(&a).unwrap() - alpha).norm() < 1e-10);
        let sq2 = std::f64::consts::SQRT_2;
        assert!((psi.expectation(&q).unwrap().re - sq2 * alpha.re).abs() < 1e-10);
        assert!((psi.expectation(&p).unwrap().re - sq2 * alpha.im).abs() < 1e-10);
    }

    #[test]
    fn expectation_examples() {
        let s = space(5);
        let n = number_op(s);
        assert_eq!(DensityMatrix::vacuum(s).expectation(&n).unwrap(), c(0.0, 0.0));
        for k in 0..5 {
            let rho = PureState::fock(s, k).unwrap().to_density();
            assert_eq!(rho.expectation(&n).unwrap(), c(k as f64, 0.0));
        }
        let mix = number_superposition_state(1, s).unwrap().to_density();
        assert!((mix.expectation(&n).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!((mix.expectation(&FockOperator::identity(s)).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let rho = DensityMatrix::vacuum(space(3));
        assert!(matches!(
            rho.expectation(&number_op(space(4))),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn superposition_state_support() {
        let s = space(4);
        let psi = number_superposition_state(1, s).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps: Vec<C64> = psi.amplitudes().iter().copied().collect();
        assert_eq!(amps, vec![c(h, 0.0), c(0.0, 0.0), c(h, 0.0), c(0.0, 0.0)]);

        let psi = number_superposition_state(2, space(8)).unwrap();
        let support: Vec<usize> = (0..8).filter(|&i| psi.amplitudes()[i].norm() > 0.0).collect();
        assert_eq!(support, vec![0, 4]);

        assert!(matches!(
            number_superposition_state(2, space(4)),
            Err(Error::TruncationTooSmall { .. })
        ));
    }

    #[test]
    fn superposition_mean_photon_number_exact() {
        // Weights are exactly 1/2 on |0⟩ and |2N⟩, so 2⟨n⟩ = 2N in integers.
        for n in 1..=12usize {
            let s = space(2 * n + 1);
            let psi = number_superposition_state(n, s).unwrap();
            let twice_mean: usize = (0..s.dim())
                .filter(|&k| psi.amplitudes()[k].norm() > 0.0)
                .map(|k| k)
                .sum();
            assert_eq!(twice_mean, 2 * n);
            let mean = psi.expectation(&number_op(s)).unwrap();
            assert!((mean.re - n as f64).abs() < 1e-12 * n as f64);
        }
    }

    #[test]
    fn density_validation_rejects_bad_trace() {
        let s = space(2);
        let m = Mat::from_fn(2, 2, |i, j| if i == j { c(0.6, 0.0) } else { c(0.0, 0.0) });
        assert!(DensityMatrix::new(s, m).is_err());
        let m = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c(1.2, 0.0),
            (1, 1) => c(-0.2, 0.0),
            _ => c(0.0, 0.0),
        });
        assert!(DensityMatrix::new(s, m).is_err());
    }
}
