//! Exciton flow into the sink, its closed forms, the angle law, dark
//! directions, and parameter sweeps.
//!
//! The defining flow is the net sink absorption read off a stationary state,
//!
//!   F = 2 gm_re_sink rho11 - 2 gp_re_sink rho00,
//!
//! positive when excitons move into the sink reservoir. The closed forms
//! reuse the rate-ratio notation of the stationary module.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::density::max_abs;
use crate::error::{Error, Result};
use crate::liouvillian::{apply_total, build_superoperator};
use crate::model::{
    bright_geometry, build_rates, embed_degenerate, BrightGeometry, RateSet, ReservoirLabel,
    ReservoirSpec, SystemSpec,
};
use crate::stationary::{stationary_alpha0, stationary_general, stationary_numeric, StationaryResult};

/// A flow value together with the state it was read from. When the value
/// comes from a closed form, `decomposition` holds the exact (numerator,
/// denominator) pair with `flow = numerator / denominator`.
#[derive(Debug, Clone)]
pub struct FlowResult {
    pub flow: f64,
    pub state: StationaryResult,
    pub decomposition: Option<(f64, f64)>,
}

/// Net sink absorption of a stationary state, by the defining formula.
pub fn flow_from_state(rates: &RateSet, st: &StationaryResult) -> FlowResult {
    let flow = 2.0 * rates.sink.gm_re * st.rho11 - 2.0 * rates.sink.gp_re * st.rho00;
    FlowResult {
        flow,
        state: st.clone(),
        decomposition: None,
    }
}

fn betas_match(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        a == b
    } else {
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
    }
}

/// Closed-form flow for parallel bright vectors. Assumes the phonon and sink
/// reservoirs share one temperature (checked through the rate ratios when
/// both are defined) and cross-checks the difference-of-products numerator
/// against the equivalent exponential-factor form whenever every rate is
/// strictly positive.
pub fn flow_alpha0(rates: &RateSet, norm_chi2: f64, norm_psi2: f64) -> Result<FlowResult> {
    if let (Ok(bp), Ok(bs)) = (rates.ph.recovered_beta(), rates.sink.recovered_beta()) {
        if !betas_match(bp, bs) {
            return Err(Error::Assumption(format!(
                "the parallel flow form assumes beta_ph = beta_sink (rate ratios give {bp} and {bs})"
            )));
        }
    }
    let st = stationary_alpha0(rates, norm_chi2, norm_psi2)?;
    let (x, p) = (norm_chi2, norm_psi2);
    let (a_p, a_m) = (rates.em.gp_re, rates.em.gm_re);
    let (b_p, b_m) = (rates.ph.gp_re, rates.ph.gm_re);
    let (c_p, c_m) = (rates.sink.gp_re, rates.sink.gm_re);

    let raw = a_p * b_m * c_m - a_m * b_p * c_p;
    let numerator = 2.0 * x * p * raw;
    let num_pp = a_p * b_p * x * p + a_p * c_m * x + b_p * c_p * p;
    let num_11 = a_p * b_m * x * p + a_m * c_p * x + b_m * c_p * p;
    let num_00 = a_m * b_p * x * p + a_m * c_m * x + b_m * c_m * p;
    let delta = num_pp + num_11 + num_00;

    if [a_p, a_m, b_p, b_m, c_p, c_m].iter().all(|&r| r > 0.0) {
        let be = rates.em.recovered_beta()?;
        let bp = rates.ph.recovered_beta()?;
        let bs = rates.sink.recovered_beta()?;
        let exponent = bp * rates.ph.bohr + bs * rates.sink.bohr - be * rates.em.bohr;
        let factor = a_m * b_p * c_p * exponent.exp_m1();
        let tol = 1e-9 * (a_m * b_p * c_p * (1.0 + exponent.exp_m1().abs()) + raw.abs());
        if (raw - factor).abs() > tol {
            return Err(Error::Assumption(format!(
                "rates are inconsistent with the exponential flow factor (difference {:.3e})",
                (raw - factor).abs()
            )));
        }
    }

    Ok(FlowResult {
        flow: numerator / delta,
        state: st,
        decomposition: Some((numerator, delta)),
    })
}

fn flux_denominator(rates: &RateSet, geom: &BrightGeometry) -> f64 {
    let (x, p) = (geom.chi_weight(), geom.psi_weight());
    let c2 = geom.cos_alpha * geom.cos_alpha;
    let h = x * rates.em.gm_re + p * rates.ph.gm_re;
    x * p * c2 * rates.em.gm_re * rates.ph.gp_re + rates.sink.gm_re * h
}

/// Closed-form flow for a general bright angle (zero Lamb shifts): the
/// ground population from the general stationary state times the
/// cos^2-weighted rate numerator over the denominator Q.
pub fn flow_general(rates: &RateSet, geom: &BrightGeometry) -> Result<FlowResult> {
    let st = stationary_general(rates, geom)?;
    let (x, p) = (geom.chi_weight(), geom.psi_weight());
    let c2 = geom.cos_alpha * geom.cos_alpha;
    let raw = rates.em.gp_re * rates.ph.gm_re * rates.sink.gm_re
        - rates.em.gm_re * rates.ph.gp_re * rates.sink.gp_re;
    let q = flux_denominator(rates, geom);
    if !(q > 0.0) {
        return Err(Error::DegenerateModel(format!(
            "flow denominator is not positive (Q = {q})"
        )));
    }
    let numerator = st.rho00 * 2.0 * x * p * c2 * raw;
    Ok(FlowResult {
        flow: numerator / q,
        state: st,
        decomposition: Some((numerator, q)),
    })
}

/// One row of the angle-law table: the flow at a bright angle, the
/// denominator-scaled numerator that the cos^2 statement is about, and the
/// pure cos^2 rescaling of the parallel flow for comparison.
#[derive(Debug, Clone)]
pub struct AngleLawRow {
    pub alpha: f64,
    pub scaled_numerator: f64,
    pub flow: f64,
    pub flow_cos2_approx: f64,
}

#[derive(Debug, Clone)]
pub struct AngleLawTable {
    pub rows: Vec<AngleLawRow>,
}

/// Evaluates the flow across a grid of bright angles at fixed rates and
/// norms, reporting F(alpha) alongside F * Q / rho00. The latter equals
/// 2 X P cos^2(alpha) (a+ b- c- - a- b+ c+), so dividing it by cos^2(alpha)
/// is constant in alpha; the full flow is not, and the table carries the
/// cos^2 rescaling of F(0) so the gap is visible.
pub fn numerator_angle_law(
    rates: &RateSet,
    geom: &BrightGeometry,
    alphas: &[f64],
) -> Result<AngleLawTable> {
    let base = geom.with_angle(0.0)?;
    let st0 = stationary_general(rates, &base)?;
    let flow0 = flow_from_state(rates, &st0).flow;
    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let g = geom.with_angle(alpha)?;
        let st = stationary_general(rates, &g)?;
        let flow = flow_from_state(rates, &st).flow;
        let q = flux_denominator(rates, &g);
        rows.push(AngleLawRow {
            alpha,
            scaled_numerator: flow * q / st.rho00,
            flow,
            flow_cos2_approx: flow0 * g.cos_alpha * g.cos_alpha,
        });
    }
    Ok(AngleLawTable { rows })
}

/// Orthogonal projector, on the degenerate block, onto the complement of the
/// span of the two coupling vectors. Its range consists of the dark
/// directions; the rank is M minus the span dimension (parallel geometries
/// count the span as one-dimensional).
pub fn dark_projector(geom: &BrightGeometry) -> DMatrix<Complex64> {
    let m = geom.degenerate_dim();
    let mut p = DMatrix::<Complex64>::identity(m, m);
    p -= &geom.psi_hat * geom.psi_hat.adjoint();
    if !geom.is_parallel() {
        if let Some(eta) = &geom.eta_hat {
            p -= eta * eta.adjoint();
        }
    }
    p
}

/// Orthonormal dark vectors, embedded in the full Hilbert space, obtained by
/// orthogonalizing the columns of the dark projector in order.
pub fn dark_basis(geom: &BrightGeometry) -> Vec<DVector<Complex64>> {
    let p = dark_projector(geom);
    let mut basis: Vec<DVector<Complex64>> = Vec::new();
    for j in 0..p.ncols() {
        let mut v: DVector<Complex64> = p.column(j).into_owned();
        for b in &basis {
            let overlap = b.dotc(&v);
            v -= b * overlap;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / Complex64::from(norm));
        }
    }
    basis.iter().map(embed_degenerate).collect()
}

/// Which model parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Alpha,
    Gamma0Em,
    BetaEm,
}

impl std::fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SweepParameter::Alpha => "alpha",
            SweepParameter::Gamma0Em => "gamma0_em",
            SweepParameter::BetaEm => "beta_em",
        };
        f.write_str(s)
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(SweepParameter::Alpha),
            "gamma0_em" => Ok(SweepParameter::Gamma0Em),
            "beta_em" => Ok(SweepParameter::BetaEm),
            other => Err(Error::Configuration(format!(
                "unknown sweep parameter '{other}' (expected alpha, gamma0_em, or beta_em)"
            ))),
        }
    }
}

/// One solved sweep point. `flagged` marks points whose stationarity
/// residual exceeded the acceptance threshold; their values are still
/// reported.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub flow: f64,
    pub rho00: f64,
    pub rho11: f64,
    pub rho_psipsi: f64,
    pub rho_etaeta: f64,
    pub residual: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub parameter: SweepParameter,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Relative change of the flow across the final decade of the parameter
    /// grid (useful for saturation sweeps). None when the grid spans less
    /// than a decade or the final flow vanishes.
    pub fn final_decade_relative_change(&self) -> Option<f64> {
        let last = self.rows.last()?;
        if last.value <= 0.0 || last.flow == 0.0 {
            return None;
        }
        let cutoff = last.value / 10.0;
        let start = self.rows.iter().rev().find(|r| r.value <= cutoff)?;
        Some(((last.flow - start.flow) / last.flow).abs())
    }
}

const SWEEP_RESIDUAL_TOL: f64 = 1e-8;

fn solve_point(rates: &RateSet, geom: &BrightGeometry) -> Result<StationaryResult> {
    if rates.lamb_shifts_are_zero() {
        if let Ok(st) = stationary_general(rates, geom) {
            return Ok(st);
        }
    }
    let lv = build_superoperator(rates, geom);
    stationary_numeric(&lv, geom)
}

/// Solves the stationary state afresh at every grid point of one varying
/// parameter and tabulates the flow and populations. The grid must be
/// strictly monotone. Points are flagged (not dropped) when the stationarity
/// residual exceeds 1e-8; solver failures abort the sweep.
pub fn sweep(
    sys: &SystemSpec,
    reservoirs: &[ReservoirSpec],
    parameter: SweepParameter,
    grid: &[f64],
) -> Result<SweepTable> {
    if grid.is_empty() {
        return Err(Error::Configuration("sweep grid is empty".into()));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::Configuration("sweep grid holds non-finite values".into()));
    }
    if grid.len() > 1 {
        let increasing = grid[1] > grid[0];
        for w in grid.windows(2) {
            let ok = if increasing { w[1] > w[0] } else { w[1] < w[0] };
            if !ok {
                return Err(Error::Configuration(
                    "sweep grid must be strictly monotone".into(),
                ));
            }
        }
    }

    let base_geom = bright_geometry(sys)?;
    let base_rates = build_rates(sys, reservoirs)?;
    let mut rows = Vec::with_capacity(grid.len());
    for &value in grid {
        let (rates, geom) = match parameter {
            SweepParameter::Alpha => (base_rates, base_geom.with_angle(value)?),
            SweepParameter::Gamma0Em | SweepParameter::BetaEm => {
                let mut specs = reservoirs.to_vec();
                let em = specs
                    .iter_mut()
                    .find(|s| s.label == ReservoirLabel::Em)
                    .ok_or_else(|| {
                        Error::Configuration("sweep needs an em reservoir to vary".into())
                    })?;
                match parameter {
                    SweepParameter::Gamma0Em => em.gamma0_re = value,
                    SweepParameter::BetaEm => em.beta = value,
                    SweepParameter::Alpha => unreachable!(),
                }
                (build_rates(sys, &specs)?, base_geom.clone())
            }
        };
        let st = solve_point(&rates, &geom)?;
        let residual = max_abs(&apply_total(&rates, &geom, st.full_rho.matrix())?);
        let flow = flow_from_state(&rates, &st).flow;
        rows.push(SweepRow {
            value,
            flow,
            rho00: st.rho00,
            rho11: st.rho11,
            rho_psipsi: st.rho_psipsi,
            rho_etaeta: st.rho_etaeta,
            residual,
            flagged: residual > SWEEP_RESIDUAL_TOL,
        });
    }
    Ok(SweepTable { parameter, rows })
}
