//! Stationary states of the summed generators, computed three ways.
//!
//! The closed forms express everything through the ratios of the reservoir
//! rates. Writing a+/a- for the em pump/decay rates, b+/b- for ph, c+/c- for
//! sink, X and P for the squared coupling norms, and c2/s2 for cos^2/sin^2 of
//! the bright angle, the building blocks are
//!
//!   H = X a- + P b-,    S = X s2 a- + P b-,    Q = X P c2 a- b+ + c- H.
//!
//! The parallel (alpha = 0) solver uses the three-level population balance
//! directly; the general solver uses the population ratios u, v, w and the
//! bright-pair coherence; the numeric solver extracts the kernel of the
//! generator restricted to the invariant subspace, sharing no algebra with
//! the closed forms.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::density::{max_abs, DensityMatrix};
use crate::error::{Error, Result};
use crate::linalg::{null_space_dimension, null_vector};
use crate::liouvillian::{
    basis_coordinates, basis_reconstruct, invariant_basis, parallel_basis, LiouvillianMatrix,
};
use crate::model::{
    embed_degenerate, ground_vector, projector, sink_vector, BrightGeometry, RateSet,
};

/// Relative singular-value cutoff for the restricted kernel. The restricted
/// matrix is at most 6x6 and its true kernel directions sit at roundoff, far
/// below this cutoff; decaying modes sit far above it unless the bright angle
/// is within a whisker of the delegation threshold.
const RESTRICTED_KERNEL_REL_TOL: f64 = 1e-10;

/// Relative singular-value cutoff for full-space kernel counting.
const FULL_KERNEL_REL_TOL: f64 = 1e-8;

/// How a stationary state was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    AnalyticAlpha0,
    AnalyticGeneral,
    NumericNullspace,
    LongTimeIntegration,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::AnalyticAlpha0 => "analytic_alpha0",
            Method::AnalyticGeneral => "analytic_general",
            Method::NumericNullspace => "numeric_nullspace",
            Method::LongTimeIntegration => "long_time_integration",
        };
        f.write_str(s)
    }
}

/// A stationary state reduced to the invariant-subspace coordinates, plus the
/// full density matrix it reconstructs to.
///
/// `rho_psieta` is the coherence between the phonon-bright vector and its
/// orthogonal partner, reported in the frame where the overlap phase of the
/// photon-bright vector is rotated away; at zero Lamb shifts it is real in
/// that frame.
#[derive(Debug, Clone)]
pub struct StationaryResult {
    pub rho00: f64,
    pub rho11: f64,
    pub rho_psipsi: f64,
    pub rho_etaeta: f64,
    pub rho_psieta: f64,
    pub full_rho: DensityMatrix,
    pub method: Method,
}

impl StationaryResult {
    /// The six reduced coordinates in a fixed order.
    pub fn coordinates(&self) -> [f64; 6] {
        [
            self.rho00,
            self.rho11,
            self.rho_psipsi,
            self.rho_etaeta,
            self.rho_psieta,
            1.0 - self.rho00 - self.rho11 - self.rho_psipsi - self.rho_etaeta,
        ]
    }

    /// Largest absolute difference across the six reduced coordinates.
    pub fn max_coordinate_deviation(&self, other: &StationaryResult) -> f64 {
        self.coordinates()
            .iter()
            .zip(other.coordinates().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

struct RateRatios {
    a_p: f64,
    a_m: f64,
    b_p: f64,
    b_m: f64,
    c_p: f64,
    c_m: f64,
}

impl RateRatios {
    fn from(rates: &RateSet) -> Self {
        RateRatios {
            a_p: rates.em.gp_re,
            a_m: rates.em.gm_re,
            b_p: rates.ph.gp_re,
            b_m: rates.ph.gm_re,
            c_p: rates.sink.gp_re,
            c_m: rates.sink.gm_re,
        }
    }
}

/// Closed-form stationary populations for parallel bright vectors. The state
/// is supported on the ground level, the sink level, and the single bright
/// direction, so only the squared coupling norms enter. The returned
/// `full_rho` lives in a canonical three-level space with the bright
/// direction as its last basis vector. Lamb shifts leave populations of this
/// block untouched (projector commutators vanish on diagonal states), so the
/// imaginary rate parts are ignored.
pub fn stationary_alpha0(
    rates: &RateSet,
    norm_chi2: f64,
    norm_psi2: f64,
) -> Result<StationaryResult> {
    if !(norm_chi2 >= 0.0 && norm_chi2.is_finite()) || !(norm_psi2 >= 0.0 && norm_psi2.is_finite())
    {
        return Err(Error::Domain(
            "squared coupling norms must be finite and nonnegative".into(),
        ));
    }
    let r = RateRatios::from(rates);
    let (x, p) = (norm_chi2, norm_psi2);

    let num_pp = r.a_p * r.b_p * x * p + r.a_p * r.c_m * x + r.b_p * r.c_p * p;
    let num_11 = r.a_p * r.b_m * x * p + r.a_m * r.c_p * x + r.b_m * r.c_p * p;
    let num_00 = r.a_m * r.b_p * x * p + r.a_m * r.c_m * x + r.b_m * r.c_m * p;
    let delta = num_pp + num_11 + num_00;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::DegenerateModel(format!(
            "population normalization is not positive (got {delta}); the reservoirs do not connect the levels"
        )));
    }

    let rho00 = num_00 / delta;
    let rho11 = num_11 / delta;
    let rho_psipsi = num_pp / delta;
    let full_rho = DensityMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::from(rho00),
        Complex64::from(rho11),
        Complex64::from(rho_psipsi),
    ])))?;

    Ok(StationaryResult {
        rho00,
        rho11,
        rho_psipsi,
        rho_etaeta: 0.0,
        rho_psieta: 0.0,
        full_rho,
        method: Method::AnalyticAlpha0,
    })
}

fn embed_parallel(
    base: &StationaryResult,
    geom: &BrightGeometry,
) -> Result<StationaryResult> {
    let d = geom.hilbert_dim();
    let psi = embed_degenerate(&geom.psi_hat);
    let mat = projector(&ground_vector(d)).scale(base.rho00)
        + projector(&sink_vector(d)).scale(base.rho11)
        + projector(&psi).scale(base.rho_psipsi);
    Ok(StationaryResult {
        full_rho: DensityMatrix::new(mat)?,
        ..base.clone()
    })
}

/// Closed-form stationary state for a general bright angle, valid at zero
/// Lamb shifts. Delegates to the parallel form when the bright vectors are
/// parallel within the geometry's tolerance.
pub fn stationary_general(rates: &RateSet, geom: &BrightGeometry) -> Result<StationaryResult> {
    if !rates.lamb_shifts_are_zero() {
        return Err(Error::Assumption(
            "the general closed form requires zero Lamb shifts (imaginary rate parts)".into(),
        ));
    }
    let x = geom.chi_weight();
    let p = geom.psi_weight();
    if geom.is_parallel() {
        let base = stationary_alpha0(rates, x, p)?;
        return embed_parallel(&base, geom);
    }

    let r = RateRatios::from(rates);
    if !(r.a_m > 0.0) || !(r.b_m > 0.0) {
        return Err(Error::DegenerateModel(
            "the general closed form needs positive photon and phonon decay rates".into(),
        ));
    }
    let c2 = geom.cos_alpha * geom.cos_alpha;
    let s2 = geom.sin_alpha * geom.sin_alpha;

    let h = x * r.a_m + p * r.b_m;
    let s = x * s2 * r.a_m + p * r.b_m;
    let q = x * p * c2 * r.a_m * r.b_p + r.c_m * h;
    if !(q > 0.0) || !(s > 0.0) {
        return Err(Error::DegenerateModel(format!(
            "closed-form denominators are not positive (Q = {q}, S = {s})"
        )));
    }

    let u = (x * p * c2 * r.a_p * r.b_m + r.c_p * h) / q;
    let v = (x * c2 * r.a_p * r.b_m * (p * r.b_p + r.c_m) + r.b_p * r.c_p * s) / (r.b_m * q);
    let w = ((r.a_p / r.a_m) * (x * (s2 - c2) * r.a_m + p * r.b_m) + x * c2 * r.a_m * v) / s;

    let rho00 = 1.0 / (1.0 + u + v + w);
    let rho11 = u * rho00;
    let rho_psipsi = v * rho00;
    let rho_etaeta = w * rho00;
    if ![rho00, rho11, rho_psipsi, rho_etaeta]
        .iter()
        .all(|t| t.is_finite())
    {
        return Err(Error::DegenerateModel(
            "closed-form populations are not finite".into(),
        ));
    }
    let rho_psieta =
        x * geom.cos_alpha * geom.sin_alpha * (r.a_p * rho00 - r.a_m * rho_psipsi) / s;

    let eta = geom.eta_hat.as_ref().ok_or_else(|| {
        Error::Configuration("a non-parallel geometry must carry an eta direction".into())
    })?;
    let d = geom.hilbert_dim();
    let psi = embed_degenerate(&geom.psi_hat);
    let eta = embed_degenerate(eta);
    let coh = geom.phase * Complex64::from(rho_psieta);
    let mat = projector(&ground_vector(d)).scale(rho00)
        + projector(&sink_vector(d)).scale(rho11)
        + projector(&psi).scale(rho_psipsi)
        + projector(&eta).scale(rho_etaeta)
        + (&psi * eta.adjoint()) * coh
        + (&eta * psi.adjoint()) * coh.conj();

    Ok(StationaryResult {
        rho00,
        rho11,
        rho_psipsi,
        rho_etaeta,
        rho_psieta,
        full_rho: DensityMatrix::new(mat)?,
        method: Method::AnalyticGeneral,
    })
}

/// Kernel of the generator restricted to the invariant subspace, found from
/// the matrix form without using any closed-form algebra. Parallel
/// geometries use the three-projector subspace (the eta directions decouple
/// there and would make the six-dimensional kernel ambiguous).
pub fn stationary_numeric(lv: &LiouvillianMatrix, geom: &BrightGeometry) -> Result<StationaryResult> {
    if lv.dim() != geom.hilbert_dim() {
        return Err(Error::Domain(format!(
            "matrix form acts on dimension {}, geometry has {}",
            lv.dim(),
            geom.hilbert_dim()
        )));
    }
    let parallel = geom.is_parallel() || geom.eta_hat.is_none();
    let basis = if parallel {
        parallel_basis(geom)
    } else {
        invariant_basis(geom)?
    };
    let n = basis.len();

    let mut restricted = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let image = lv.apply(&basis[j])?;
        let coords = basis_coordinates(&basis, &image);
        let rec = basis_reconstruct(&basis, &coords);
        let leak = max_abs(&(&image - rec));
        if leak > 1e-8 * (1.0 + max_abs(&image)) {
            return Err(Error::Assumption(format!(
                "generator leaks outside the invariant subspace (leak {leak:.3e})"
            )));
        }
        for i in 0..n {
            restricted[(i, j)] = coords[i];
        }
    }

    let mut coords = null_vector(&restricted, RESTRICTED_KERNEL_REL_TOL)?;
    let trace: f64 = coords.iter().take(if parallel { 3 } else { 4 }).sum();
    if trace.abs() < 1e-12 * coords.norm() {
        return Err(Error::DegenerateModel(
            "the kernel direction is traceless and cannot be normalized to a state".into(),
        ));
    }
    coords /= trace;

    let mat = basis_reconstruct(&basis, coords.as_slice());
    let full_rho = DensityMatrix::new(mat)?;
    let (rho_etaeta, rho_psieta) = if parallel {
        (0.0, 0.0)
    } else {
        let raw = Complex64::new(coords[4], coords[5]);
        ((coords[3]), (geom.phase.conj() * raw).re)
    };
    Ok(StationaryResult {
        rho00: coords[0],
        rho11: coords[1],
        rho_psipsi: coords[2],
        rho_etaeta,
        rho_psieta,
        full_rho,
        method: Method::NumericNullspace,
    })
}

/// Dimension of the full-space kernel of the matrix form, counted as complex
/// dimensions (the generator is complex-linear, so real kernel directions
/// come in pairs). Exceeds one exactly when dark directions exist.
pub fn full_kernel_dimension(lv: &LiouvillianMatrix) -> usize {
    null_space_dimension(lv.matrix(), FULL_KERNEL_REL_TOL) / 2
}
