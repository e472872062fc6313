//! Model description: level structure, reservoir couplings, thermal rates,
//! and the geometry of the two bright vectors.
//!
//! The system has a ground level |0>, an intermediate "sink" level |1>, and an
//! M-fold degenerate upper level, so the Hilbert space dimension is D = M + 2.
//! Basis convention used everywhere: index 0 is |0>, index 1 is |1>, indices
//! 2..M+2 are the degenerate block. Three bosonic reservoirs drive transitions:
//! photons (em) between the degenerate level and |0>, phonons (ph) between the
//! degenerate level and |1>, and the sink between |1> and |0>. The reservoirs
//! couple to the degenerate block only through two collective "bright" vectors,
//! chi (photonic) and psi (phononic).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Below this value of sin(alpha) the bright vectors are treated as parallel:
/// the eta direction decouples on relaxation timescales growing like
/// 1/sin^2(alpha), so the parallel-case analysis applies.
pub const PARALLEL_SIN_TOL: f64 = 1e-6;

/// Level energies and bright vectors of the three-level system.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    /// Ground level energy.
    pub eps0: f64,
    /// Sink level energy.
    pub eps1: f64,
    /// Energy of the degenerate upper level.
    pub eps2: f64,
    /// Degeneracy M of the upper level (M >= 1).
    pub degenerate_dim: usize,
    /// Photonic bright vector, length M, nonzero. Not necessarily normalized.
    pub chi: DVector<Complex64>,
    /// Phononic bright vector, length M, nonzero. Not necessarily normalized.
    pub psi: DVector<Complex64>,
}

impl SystemSpec {
    /// Validates level ordering eps0 < eps1 < eps2, the degeneracy, and that
    /// both bright vectors have length M and nonzero norm.
    pub fn new(
        eps0: f64,
        eps1: f64,
        eps2: f64,
        degenerate_dim: usize,
        chi: DVector<Complex64>,
        psi: DVector<Complex64>,
    ) -> Result<Self> {
        for (name, v) in [("eps0", eps0), ("eps1", eps1), ("eps2", eps2)] {
            if !v.is_finite() {
                return Err(Error::Configuration(format!("{name} is not finite")));
            }
        }
        if !(eps0 < eps1 && eps1 < eps2) {
            return Err(Error::Configuration(format!(
                "level energies must satisfy eps0 < eps1 < eps2, got {eps0}, {eps1}, {eps2}"
            )));
        }
        if degenerate_dim == 0 {
            return Err(Error::Configuration(
                "degenerate_dim must be at least 1".into(),
            ));
        }
        for (name, v) in [("chi", &chi), ("psi", &psi)] {
            if v.len() != degenerate_dim {
                return Err(Error::Configuration(format!(
                    "{name} has length {}, expected degenerate_dim = {degenerate_dim}",
                    v.len()
                )));
            }
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Configuration(format!("{name} has non-finite entries")));
            }
            if v.norm() == 0.0 {
                return Err(Error::Configuration(format!("{name} must be nonzero")));
            }
        }
        Ok(Self { eps0, eps1, eps2, degenerate_dim, chi, psi })
    }

    /// Hilbert space dimension D = M + 2.
    pub fn hilbert_dim(&self) -> usize {
        self.degenerate_dim + 2
    }

    /// Transition frequency served by the given reservoir.
    pub fn bohr_frequency(&self, label: ReservoirLabel) -> f64 {
        match label {
            ReservoirLabel::Em => self.eps2 - self.eps0,
            ReservoirLabel::Ph => self.eps2 - self.eps1,
            ReservoirLabel::Sink => self.eps1 - self.eps0,
        }
    }
}

/// The three reservoirs, named by the transition they serve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReservoirLabel {
    /// Photon bath on the |degenerate> <-> |0> transition.
    Em,
    /// Phonon bath on the |degenerate> <-> |1> transition.
    Ph,
    /// Sink bath on the |1> <-> |0> transition.
    Sink,
}

impl std::fmt::Display for ReservoirLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReservoirLabel::Em => write!(f, "em"),
            ReservoirLabel::Ph => write!(f, "ph"),
            ReservoirLabel::Sink => write!(f, "sink"),
        }
    }
}

/// Physical description of one thermal reservoir.
#[derive(Debug, Clone)]
pub struct ReservoirSpec {
    pub label: ReservoirLabel,
    /// Inverse temperature, > 0.
    pub beta: f64,
    /// Bare coupling rate gamma0 >= 0; the real parts of the absorption and
    /// emission rates are gamma0 * N and gamma0 * (N + 1).
    pub gamma0_re: f64,
    /// Lamb-shift imaginary part attached to the absorption (gamma+) term.
    pub lamb_plus: f64,
    /// Lamb-shift imaginary part attached to the emission (gamma-) term.
    pub lamb_minus: f64,
}

impl ReservoirSpec {
    /// A reservoir with no Lamb shift.
    pub fn thermal(label: ReservoirLabel, beta: f64, gamma0_re: f64) -> Self {
        Self { label, beta, gamma0_re, lamb_plus: 0.0, lamb_minus: 0.0 }
    }
}

/// Transition rates of one reservoir evaluated at its Bohr frequency.
///
/// `gp` (absorption, gamma+) and `gm` (emission, gamma-) satisfy the
/// detailed-balance ratio gp_re / gm_re = exp(-beta * bohr) by construction:
/// gp_re = gamma0 * N and gm_re = gamma0 * (N + 1) with N the Planck
/// occupation, and N / (N + 1) = exp(-beta * bohr) identically.
#[derive(Debug, Clone, Copy)]
pub struct ReservoirRates {
    pub gp_re: f64,
    pub gp_im: f64,
    pub gm_re: f64,
    pub gm_im: f64,
    /// Transition frequency these rates were evaluated at.
    pub bohr: f64,
}

impl ReservoirRates {
    /// Inverse temperature recovered from the detailed-balance ratio,
    /// beta = ln(gm_re / gp_re) / bohr. Returns +infinity when gp_re = 0
    /// (zero occupation) and an error when the rates carry no temperature
    /// information (gm_re = 0).
    pub fn recovered_beta(&self) -> Result<f64> {
        if self.gm_re == 0.0 {
            return Err(Error::DegenerateModel(
                "cannot recover beta from a reservoir with gm_re = 0".into(),
            ));
        }
        if self.gp_re == 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok((self.gm_re / self.gp_re).ln() / self.bohr)
    }
}

/// Rates of all three reservoirs.
#[derive(Debug, Clone, Copy)]
pub struct RateSet {
    pub em: ReservoirRates,
    pub ph: ReservoirRates,
    pub sink: ReservoirRates,
}

impl RateSet {
    pub fn get(&self, label: ReservoirLabel) -> &ReservoirRates {
        match label {
            ReservoirLabel::Em => &self.em,
            ReservoirLabel::Ph => &self.ph,
            ReservoirLabel::Sink => &self.sink,
        }
    }

    /// True when every Lamb-shift imaginary part vanishes.
    pub fn lamb_shifts_are_zero(&self) -> bool {
        [self.em, self.ph, self.sink]
            .iter()
            .all(|r| r.gp_im == 0.0 && r.gm_im == 0.0)
    }
}

/// Mean occupation of a bosonic mode, 1 / (exp(beta * omega) - 1).
///
/// Strictly decreasing in beta * omega; behaves like 1 / (beta * omega) for
/// small arguments and like exp(-beta * omega) for large ones.
pub fn planck_occupation(beta: f64, omega: f64) -> Result<f64> {
    let x = beta * omega;
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "planck occupation needs beta * omega > 0, got {x}"
        )));
    }
    Ok(1.0 / x.exp_m1())
}

/// Evaluates the thermal rates of all three reservoirs at their Bohr
/// frequencies: gp_re = gamma0 * N, gm_re = gamma0 * (N + 1), with the
/// Lamb-shift imaginary parts copied through unchanged.
///
/// The reservoir list must carry the labels em, ph, sink exactly once
/// each, in any order.
pub fn build_rates(sys: &SystemSpec, reservoirs: &[ReservoirSpec]) -> Result<RateSet> {
    if reservoirs.len() != 3 {
        return Err(Error::Configuration(format!(
            "expected exactly 3 reservoirs, got {}",
            reservoirs.len()
        )));
    }
    let mut found: [Option<&ReservoirSpec>; 3] = [None, None, None];
    for spec in reservoirs {
        let slot = match spec.label {
            ReservoirLabel::Em => 0,
            ReservoirLabel::Ph => 1,
            ReservoirLabel::Sink => 2,
        };
        if found[slot].is_some() {
            return Err(Error::Configuration(format!(
                "duplicate reservoir label {}",
                spec.label
            )));
        }
        found[slot] = Some(spec);
    }
    let rate_for = |spec: &ReservoirSpec| -> Result<ReservoirRates> {
        if !spec.beta.is_finite() || spec.beta <= 0.0 {
            return Err(Error::Configuration(format!(
                "reservoir {} needs beta > 0, got {}",
                spec.label, spec.beta
            )));
        }
        if !spec.gamma0_re.is_finite() || spec.gamma0_re < 0.0 {
            return Err(Error::Configuration(format!(
                "reservoir {} needs gamma0_re >= 0, got {}",
                spec.label, spec.gamma0_re
            )));
        }
        if !spec.lamb_plus.is_finite() || !spec.lamb_minus.is_finite() {
            return Err(Error::Configuration(format!(
                "reservoir {} has non-finite Lamb shifts",
                spec.label
            )));
        }
        let bohr = sys.bohr_frequency(spec.label);
        let n = planck_occupation(spec.beta, bohr)?;
        Ok(ReservoirRates {
            gp_re: spec.gamma0_re * n,
            gp_im: spec.lamb_plus,
            gm_re: spec.gamma0_re * (n + 1.0),
            gm_im: spec.lamb_minus,
            bohr,
        })
    };
    match found {
        [Some(em), Some(ph), Some(sink)] => Ok(RateSet {
            em: rate_for(em)?,
            ph: rate_for(ph)?,
            sink: rate_for(sink)?,
        }),
        _ => {
            let missing: Vec<&str> = [
                (found[0], "em"),
                (found[1], "ph"),
                (found[2], "sink"),
            ]
            .iter()
            .filter(|(f, _)| f.is_none())
            .map(|(_, n)| *n)
            .collect();
            Err(Error::Configuration(format!(
                "missing reservoir label(s): {}",
                missing.join(", ")
            )))
        }
    }
}

/// Relative orientation of the two bright vectors.
///
/// `psi_hat` is psi normalized. The angle alpha between the rays of chi and
/// psi is defined through cos(alpha) = |<psi_hat, chi>| / ||chi||, so it
/// ignores global phases of either vector. `eta_hat` is the unit vector along
/// the component of chi orthogonal to psi_hat, and `phase` is the unimodular
/// number carrying the overlap phase, giving the exact decomposition
///
///   chi / ||chi|| = cos(alpha) * phase * psi_hat + sin(alpha) * eta_hat.
///
/// When chi and psi are parallel (sin(alpha) below roundoff) `eta_hat` is an
/// arbitrary deterministic unit vector orthogonal to psi_hat, or absent when
/// M = 1 leaves no room for one.
#[derive(Debug, Clone)]
pub struct BrightGeometry {
    pub norm_chi: f64,
    pub norm_psi: f64,
    pub cos_alpha: f64,
    pub sin_alpha: f64,
    /// Unimodular overlap phase of <psi_hat, chi_hat>; 1 when the overlap
    /// vanishes.
    pub phase: Complex64,
    /// Normalized psi, length M.
    pub psi_hat: DVector<Complex64>,
    /// Normalized chi, length M.
    pub chi_hat: DVector<Complex64>,
    /// Unit vector orthogonal to psi_hat spanning the rest of the bright
    /// plane; None only when M = 1.
    pub eta_hat: Option<DVector<Complex64>>,
}

impl BrightGeometry {
    pub fn degenerate_dim(&self) -> usize {
        self.psi_hat.len()
    }

    pub fn hilbert_dim(&self) -> usize {
        self.psi_hat.len() + 2
    }

    /// ||chi||^2, the superabsorption weight of the photon coupling.
    pub fn chi_weight(&self) -> f64 {
        self.norm_chi * self.norm_chi
    }

    /// ||psi||^2, the supertransfer weight of the phonon coupling.
    pub fn psi_weight(&self) -> f64 {
        self.norm_psi * self.norm_psi
    }

    /// True when the bright vectors are parallel for all practical purposes.
    pub fn is_parallel(&self) -> bool {
        self.sin_alpha < PARALLEL_SIN_TOL
    }

    /// Same norms and psi_hat/eta_hat plane, but with chi rotated to the given
    /// angle: chi_hat = cos(alpha) psi_hat + sin(alpha) eta_hat, phase 1.
    /// Needs an eta direction, hence M >= 2.
    pub fn with_angle(&self, alpha: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&alpha) {
            return Err(Error::Domain(format!(
                "bright angle must lie in [0, pi/2], got {alpha}"
            )));
        }
        let eta = self.eta_hat.clone().ok_or_else(|| {
            Error::Configuration(
                "rotating the bright angle needs an eta direction (M >= 2)".into(),
            )
        })?;
        let (s, c) = alpha.sin_cos();
        let chi_hat = &self.psi_hat * Complex64::new(c, 0.0) + &eta * Complex64::new(s, 0.0);
        Ok(Self {
            norm_chi: self.norm_chi,
            norm_psi: self.norm_psi,
            cos_alpha: c,
            sin_alpha: s,
            phase: Complex64::new(1.0, 0.0),
            psi_hat: self.psi_hat.clone(),
            chi_hat,
            eta_hat: Some(eta),
        })
    }
}

/// Computes the bright-vector geometry of a system: norms, the angle between
/// the chi and psi rays, the orthonormal pair (psi_hat, eta_hat) spanning the
/// bright plane, and the overlap phase.
pub fn bright_geometry(sys: &SystemSpec) -> Result<BrightGeometry> {
    let norm_chi = sys.chi.norm();
    let norm_psi = sys.psi.norm();
    if norm_chi == 0.0 || norm_psi == 0.0 {
        return Err(Error::Domain("bright vectors must be nonzero".into()));
    }
    let m = sys.degenerate_dim;
    let psi_hat = sys.psi.map(|z| z / Complex64::from(norm_psi));
    let chi_hat = sys.chi.map(|z| z / Complex64::from(norm_chi));

    let overlap = psi_hat.dotc(&chi_hat);
    let cos_alpha = overlap.norm().min(1.0);
    let phase = if overlap.norm() > 1e-300 {
        overlap / Complex64::from(overlap.norm())
    } else {
        Complex64::new(1.0, 0.0)
    };

    // Component of chi_hat orthogonal to psi_hat; its norm is sin(alpha).
    let perp = &chi_hat - &psi_hat * overlap;
    let sin_alpha = perp.norm().min(1.0);

    let eta_hat = if sin_alpha > 1e-12 {
        Some(perp.map(|z| z / Complex64::from(sin_alpha)))
    } else if m >= 2 {
        Some(fallback_orthogonal(&psi_hat))
    } else {
        None
    };

    Ok(BrightGeometry {
        norm_chi,
        norm_psi,
        cos_alpha,
        sin_alpha,
        phase,
        psi_hat,
        chi_hat,
        eta_hat,
    })
}

/// Deterministic unit vector orthogonal to `v` (which must be unit, M >= 2):
/// take the coordinate axis where v is smallest and project v out of it.
fn fallback_orthogonal(v: &DVector<Complex64>) -> DVector<Complex64> {
    let k = (0..v.len())
        .min_by(|&a, &b| v[a].norm().partial_cmp(&v[b].norm()).unwrap())
        .unwrap();
    let mut e = DVector::<Complex64>::zeros(v.len());
    e[k] = Complex64::new(1.0, 0.0);
    let out = &e - v * v.dotc(&e);
    let n = out.norm();
    out.map(|z| z / Complex64::from(n))
}

/// Embeds a length-M vector on the degenerate block into the full
/// D = M + 2 space (indices 2..M+2).
pub fn embed_degenerate(v: &DVector<Complex64>) -> DVector<Complex64> {
    let m = v.len();
    let mut out = DVector::<Complex64>::zeros(m + 2);
    for i in 0..m {
        out[i + 2] = v[i];
    }
    out
}

/// Basis vector of the full space: |0> for the ground level.
pub fn ground_vector(dim: usize) -> DVector<Complex64> {
    let mut v = DVector::<Complex64>::zeros(dim);
    v[0] = Complex64::new(1.0, 0.0);
    v
}

/// Basis vector of the full space: |1> for the sink level.
pub fn sink_vector(dim: usize) -> DVector<Complex64> {
    let mut v = DVector::<Complex64>::zeros(dim);
    v[1] = Complex64::new(1.0, 0.0);
    v
}

/// Projector |v><v| as a dense matrix.
pub fn projector(v: &DVector<Complex64>) -> DMatrix<Complex64> {
    v * v.adjoint()
}
