//! Density matrices with validity checks.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hermiticity tolerance accepted by the checked constructor.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Trace-deviation tolerance accepted by the checked constructor.
pub const TRACE_TOL: f64 = 1e-12;
/// How far below zero the smallest eigenvalue may sit before a state is
/// rejected; allows roundoff from solvers without admitting real negativity.
pub const EIGENVALUE_FLOOR: f64 = -1e-10;

/// A unit-trace, Hermitian, positive-semidefinite matrix (up to the
/// documented tolerances).
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace, and positivity before wrapping.
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::Domain("density matrix must be square".into()));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("density matrix has non-finite entries".into()));
        }
        let herm = hermiticity_defect(&mat);
        if herm > HERMITICITY_TOL {
            return Err(Error::Domain(format!(
                "density matrix is not Hermitian: max |rho - rho^dag| = {herm:.3e}"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Domain(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        let min_eig = min_hermitian_eigenvalue(&mat);
        if min_eig < EIGENVALUE_FLOOR {
            return Err(Error::Domain(format!(
                "density matrix has negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { mat })
    }

    /// Wraps without validation. For solver internals that already guarantee
    /// (or separately monitor) the state invariants.
    pub fn from_matrix_unchecked(mat: DMatrix<Complex64>) -> Self {
        Self { mat }
    }

    /// Pure state |v><v| from a nonzero vector, normalized internally.
    pub fn pure(v: &DVector<Complex64>) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Domain("pure state vector must be nonzero and finite".into()));
        }
        let u = v.map(|z| z / Complex64::from(n));
        Ok(Self { mat: &u * u.adjoint() })
    }

    /// The ground state |0><0| of a D-dimensional system.
    pub fn ground(dim: usize) -> Self {
        let mut mat = DMatrix::<Complex64>::zeros(dim, dim);
        mat[(0, 0)] = Complex64::new(1.0, 0.0);
        Self { mat }
    }

    /// Maximally mixed state on D levels.
    pub fn maximally_mixed(dim: usize) -> Self {
        let mat = DMatrix::<Complex64>::identity(dim, dim) / Complex64::from(dim as f64);
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    /// Diagonal entry <i|rho|i> (real part; the imaginary part of a diagonal
    /// entry of a Hermitian matrix is zero).
    pub fn population(&self, i: usize) -> f64 {
        self.mat[(i, i)].re
    }

    /// Expectation <v|rho|v> for a unit vector v.
    pub fn expectation(&self, v: &DVector<Complex64>) -> f64 {
        v.dotc(&(&self.mat * v)).re
    }

    /// Matrix element <v|rho|w>.
    pub fn coherence(&self, v: &DVector<Complex64>, w: &DVector<Complex64>) -> Complex64 {
        v.dotc(&(&self.mat * w))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.mat)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_hermitian_eigenvalue(&self.mat)
    }

    /// Largest absolute entry of rho - sigma.
    pub fn max_abs_difference(&self, other: &DensityMatrix) -> f64 {
        (&self.mat - &other.mat)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// max |m - m^dagger| over entries.
pub fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let d = m - m.adjoint();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Smallest eigenvalue of a (near-)Hermitian matrix; the matrix is
/// symmetrized first so tiny antihermitian noise cannot poison the solve.
pub fn min_hermitian_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    let h = (m + m.adjoint()).scale(0.5);
    h.symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Largest absolute entry of a complex matrix.
pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ground_state_is_valid() {
        let rho = DensityMatrix::ground(4);
        let checked = DensityMatrix::new(rho.matrix().clone()).unwrap();
        assert_relative_eq!(checked.population(0), 1.0);
        assert_relative_eq!(checked.trace().re, 1.0);
        assert!(checked.min_eigenvalue() >= -1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        m[(0, 1)] = Complex64::new(0.5, 0.0);
        assert!(matches!(DensityMatrix::new(m), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_wrong_trace() {
        let m = DMatrix::<Complex64>::identity(2, 2);
        assert!(matches!(DensityMatrix::new(m), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_negative_eigenvalue() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 0)] = Complex64::new(1.5, 0.0);
        m[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(matches!(DensityMatrix::new(m), Err(Error::Domain(_))));
    }

    #[test]
    fn pure_state_normalizes() {
        let v = DVector::from_vec(vec![
            Complex64::new(3.0, 0.0),
            Complex64::new(0.0, 4.0),
        ]);
        let rho = DensityMatrix::pure(&v).unwrap();
        assert_relative_eq!(rho.trace().re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(rho.population(0), 9.0 / 25.0, epsilon = 1e-14);
        assert_relative_eq!(rho.population(1), 16.0 / 25.0, epsilon = 1e-14);
    }

    #[test]
    fn expectation_and_coherence_agree_with_entries() {
        let v = DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]);
        let w = DVector::from_vec(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]);
        let plus = DVector::from_vec(vec![
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ]);
        let rho = DensityMatrix::pure(&plus).unwrap();
        assert_relative_eq!(rho.expectation(&v), 0.5, epsilon = 1e-14);
        assert_relative_eq!(rho.coherence(&v, &w).re, 0.5, epsilon = 1e-14);
    }
}
