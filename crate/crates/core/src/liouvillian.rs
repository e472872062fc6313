//! The three dissipative generators and their matrix form.
//!
//! Each reservoir contributes a generator acting on density matrices. The
//! photon generator exchanges population between the ground level |0> and the
//! normalized bright vector |chi~> with collective weight ||chi||^2; the
//! phonon generator does the same between |1> and |psi~> with weight
//! ||psi||^2; the sink generator couples |1> and |0> with weight one. For a
//! transition with upper vector |u>, lower vector |l>, and weight w, the
//! contribution is
//!
//!   w * [ 2 gm_re (<u|rho|u> |l><l| - {rho, |u><u|}/2) - i gm_im [rho, |u><u|]
//!       + 2 gp_re (<l|rho|l> |u><u| - {rho, |l><l|}/2) + i gp_im [rho, |l><l|] ]
//!
//! There is no Hamiltonian commutator term: the generators are written in the
//! interaction picture, and level energies enter only through the thermal
//! occupation numbers inside the rates.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{
    embed_degenerate, ground_vector, projector, sink_vector, BrightGeometry, RateSet,
    ReservoirRates,
};

/// One transition's dissipator, linear in `rho` (no conjugation), so it can be
/// applied to arbitrary complex matrices when assembling the matrix form.
fn dissipator(
    rho: &DMatrix<Complex64>,
    upper: &DVector<Complex64>,
    lower: &DVector<Complex64>,
    weight: f64,
    r: &ReservoirRates,
) -> DMatrix<Complex64> {
    let pu = projector(upper);
    let pl = projector(lower);
    let up_occ = upper.dotc(&(rho * upper));
    let low_occ = lower.dotc(&(rho * lower));
    let i = Complex64::i();

    let mut out = (&pl * up_occ - (rho * &pu + &pu * rho).scale(0.5)).scale(2.0 * r.gm_re);
    if r.gm_im != 0.0 {
        out -= (rho * &pu - &pu * rho) * (i * r.gm_im);
    }
    out += (&pu * low_occ - (rho * &pl + &pl * rho).scale(0.5)).scale(2.0 * r.gp_re);
    if r.gp_im != 0.0 {
        out += (rho * &pl - &pl * rho) * (i * r.gp_im);
    }
    out.scale(weight)
}

fn check_dim(geom: &BrightGeometry, rho: &DMatrix<Complex64>) -> Result<()> {
    let d = geom.hilbert_dim();
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::Domain(format!(
            "state is {}x{}, expected {d}x{d}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    Ok(())
}

fn theta_em_raw(
    rates: &RateSet,
    geom: &BrightGeometry,
    rho: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let d = geom.hilbert_dim();
    let chi = embed_degenerate(&geom.chi_hat);
    dissipator(rho, &chi, &ground_vector(d), geom.chi_weight(), &rates.em)
}

fn theta_ph_raw(
    rates: &RateSet,
    geom: &BrightGeometry,
    rho: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let d = geom.hilbert_dim();
    let psi = embed_degenerate(&geom.psi_hat);
    dissipator(rho, &psi, &sink_vector(d), geom.psi_weight(), &rates.ph)
}

fn theta_sink_raw(
    rates: &RateSet,
    geom: &BrightGeometry,
    rho: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let d = geom.hilbert_dim();
    dissipator(rho, &sink_vector(d), &ground_vector(d), 1.0, &rates.sink)
}

pub(crate) fn apply_total_raw(
    rates: &RateSet,
    geom: &BrightGeometry,
    rho: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    theta_em_raw(rates, geom, rho) + theta_ph_raw(rates, geom, rho) + theta_sink_raw(rates, geom, rho)
}

/// Photon-reservoir generator applied to a state.
pub fn apply_theta_em(
    rates: &RateSet,
    geom: &BrightGeometry,
    rho: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    check_dim(geom, rho)?;
    Ok(theta_em_raw(rates, geom, rho))
}

/// Phonon-reservoir generator applied to a state.
pub fn apply_theta_ph(
    rates: &RateSet,
    geom: &BrightGeometry,
    rho: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    check_dim(geom, rho)?;
    Ok(theta_ph_raw(rates, geom, rho))
}

/// Sink-reservoir generator applied to a state.
pub fn apply_theta_sink(
    rates: &RateSet,
    geom: &BrightGeometry,
    rho: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    check_dim(geom, rho)?;
    Ok(theta_sink_raw(rates, geom, rho))
}

/// Sum of all three generators: the right-hand side of the master equation
/// d rho / dt = theta_em(rho) + theta_ph(rho) + theta_sink(rho).
pub fn apply_total(
    rates: &RateSet,
    geom: &BrightGeometry,
    rho: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    check_dim(geom, rho)?;
    Ok(apply_total_raw(rates, geom, rho))
}

/// Flattens a D x D complex matrix into 2 D^2 reals. Entry (i, j) occupies
/// slots 2 (i D + j) and 2 (i D + j) + 1 as its real and imaginary parts
/// (row-major over entries, interleaved parts). `unvectorize` inverts this.
pub fn vectorize(m: &DMatrix<Complex64>) -> DVector<f64> {
    let d = m.nrows();
    let mut out = DVector::<f64>::zeros(2 * d * d);
    for i in 0..d {
        for j in 0..d {
            let k = 2 * (i * d + j);
            out[k] = m[(i, j)].re;
            out[k + 1] = m[(i, j)].im;
        }
    }
    out
}

/// Inverse of `vectorize` for a D x D matrix.
pub fn unvectorize(v: &DVector<f64>, dim: usize) -> DMatrix<Complex64> {
    assert_eq!(v.len(), 2 * dim * dim, "vector length does not match dimension");
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let k = 2 * (i * dim + j);
            m[(i, j)] = Complex64::new(v[k], v[k + 1]);
        }
    }
    m
}

/// Dense matrix form of the total generator on the 2 D^2-dimensional real
/// vector space of complex D x D matrices (see `vectorize` for the layout).
#[derive(Debug, Clone)]
pub struct LiouvillianMatrix {
    mat: DMatrix<f64>,
    dim: usize,
}

impl LiouvillianMatrix {
    /// Hilbert-space dimension D the matrix acts on.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The underlying 2 D^2 x 2 D^2 real matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// Applies the matrix form to a state: unvectorize(M * vectorize(rho)).
    pub fn apply(&self, rho: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::Domain(format!(
                "state is {}x{}, expected {}x{}",
                rho.nrows(),
                rho.ncols(),
                self.dim,
                self.dim
            )));
        }
        Ok(unvectorize(&(&self.mat * vectorize(rho)), self.dim))
    }
}

/// Assembles the matrix form column by column: column k is the vectorized
/// image of the k-th coordinate matrix (a single 1 or i entry).
pub fn build_superoperator(rates: &RateSet, geom: &BrightGeometry) -> LiouvillianMatrix {
    let d = geom.hilbert_dim();
    let n = 2 * d * d;
    let mut mat = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let idx = k / 2;
        let (i, j) = (idx / d, idx % d);
        let mut e = DMatrix::<Complex64>::zeros(d, d);
        e[(i, j)] = if k % 2 == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 1.0)
        };
        let image = vectorize(&apply_total_raw(rates, geom, &e));
        mat.set_column(k, &image);
    }
    LiouvillianMatrix { mat, dim: d }
}

/// Hermitian basis of the six-dimensional subspace left invariant by the
/// dynamics: the projectors on |0>, |1>, |psi~>, |eta>, and the real and
/// imaginary coherence directions between |psi~> and |eta>. Needs M >= 2 for
/// the eta direction to exist.
pub fn invariant_basis(geom: &BrightGeometry) -> Result<Vec<DMatrix<Complex64>>> {
    let eta = geom.eta_hat.as_ref().ok_or_else(|| {
        Error::Configuration("the invariant subspace basis needs an eta direction (M >= 2)".into())
    })?;
    let d = geom.hilbert_dim();
    let psi = embed_degenerate(&geom.psi_hat);
    let eta = embed_degenerate(eta);
    let psi_eta = &psi * eta.adjoint();
    let eta_psi = &eta * psi.adjoint();
    let i = Complex64::i();
    Ok(vec![
        projector(&ground_vector(d)),
        projector(&sink_vector(d)),
        projector(&psi),
        projector(&eta),
        &psi_eta + &eta_psi,
        (&psi_eta - &eta_psi) * i,
    ])
}

/// Hermitian basis of the three-projector subspace {|0><0|, |1><1|,
/// |psi~><psi~|}, invariant when the bright vectors are parallel.
pub fn parallel_basis(geom: &BrightGeometry) -> Vec<DMatrix<Complex64>> {
    let d = geom.hilbert_dim();
    let psi = embed_degenerate(&geom.psi_hat);
    vec![
        projector(&ground_vector(d)),
        projector(&sink_vector(d)),
        projector(&psi),
    ]
}

/// Coordinates of `m` in an orthogonal Hermitian basis under the
/// Hilbert-Schmidt inner product tr(B^dag M).
pub fn basis_coordinates(basis: &[DMatrix<Complex64>], m: &DMatrix<Complex64>) -> Vec<f64> {
    basis
        .iter()
        .map(|b| {
            let ip = (b.adjoint() * m).trace();
            let n2 = (b.adjoint() * b).trace().re;
            ip.re / n2
        })
        .collect()
}

/// Rebuilds a matrix from basis coordinates.
pub fn basis_reconstruct(
    basis: &[DMatrix<Complex64>],
    coords: &[f64],
) -> DMatrix<Complex64> {
    let d = basis[0].nrows();
    let mut out = DMatrix::<Complex64>::zeros(d, d);
    for (b, &c) in basis.iter().zip(coords) {
        out += b.scale(c);
    }
    out
}

/// Largest entry of the component of `m` outside the span of `basis`. Zero
/// (to roundoff) exactly when `m` lies in the subspace.
pub fn off_basis_residual(basis: &[DMatrix<Complex64>], m: &DMatrix<Complex64>) -> f64 {
    let coords = basis_coordinates(basis, m);
    let rec = basis_reconstruct(basis, &coords);
    crate::density::max_abs(&(m - rec))
}
