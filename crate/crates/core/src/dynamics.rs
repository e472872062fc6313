//! Fixed-step time integration of the master equation with sanity monitors.
//!
//! A classical fourth-order step is enough here: the problems are small and
//! dissipative, and a fixed step keeps trajectories bit-reproducible. The
//! integrator re-Hermitizes after every step, tracks trace drift and the most
//! negative eigenvalue it saw, and reports the residual of the generator at
//! the final state so callers can tell whether the run actually reached the
//! fixed point.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::density::{max_abs, min_hermitian_eigenvalue, DensityMatrix};
use crate::error::{Error, Result};
use crate::linalg::linear_fit;
use crate::liouvillian::apply_total_raw;
use crate::model::{BrightGeometry, RateSet, ReservoirRates};

/// Largest allowed value of dt times the rate scale.
pub const STEP_PRODUCT_LIMIT: f64 = 0.1;

/// Residual threshold under which a trajectory counts as converged.
pub const CONVERGENCE_RESIDUAL: f64 = 1e-10;

const TRACE_DRIFT_LIMIT: f64 = 1e-6;
const EIGENVALUE_LIMIT: f64 = -1e-6;
const MAX_RECORDS: usize = 2000;
const MAX_EIGEN_CHECKS: usize = 200_000;

/// Total outflow bound of the generator: the sum over channels of twice the
/// weighted rate magnitudes. Used for the time-step guard.
pub fn rate_scale(rates: &RateSet, geom: &BrightGeometry) -> f64 {
    fn channel(w: f64, r: &ReservoirRates) -> f64 {
        2.0 * w * (r.gp_re + r.gm_re + r.gp_im.abs() + r.gm_im.abs())
    }
    channel(geom.chi_weight(), &rates.em)
        + channel(geom.psi_weight(), &rates.ph)
        + channel(1.0, &rates.sink)
}

/// A time-integration record. States are sampled at a uniform stride (at most
/// a couple of thousand records) plus the final step; monitors cover every
/// integration step for the trace and a bounded subset of steps for the
/// eigenvalue floor.
#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub trace_drift: f64,
    pub min_eigenvalue_seen: f64,
    pub converged: bool,
    pub final_residual: f64,
}

impl EvolutionTrace {
    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("a trace holds at least one state")
    }
}

/// Integrates d rho / dt = theta_em + theta_ph + theta_sink from `rho0` to
/// `t_end` with steps of at most `dt` (the actual step divides `t_end`
/// evenly). Errors if the step is too coarse for the rates or if the
/// monitors trip.
pub fn evolve(
    rates: &RateSet,
    geom: &BrightGeometry,
    rho0: &DensityMatrix,
    t_end: f64,
    dt: f64,
) -> Result<EvolutionTrace> {
    let d = geom.hilbert_dim();
    if rho0.dim() != d {
        return Err(Error::Domain(format!(
            "initial state has dimension {}, geometry has {d}",
            rho0.dim()
        )));
    }
    if !(dt > 0.0) || !dt.is_finite() || !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::Domain("t_end and dt must be positive and finite".into()));
    }
    let product = dt * rate_scale(rates, geom);
    if product > STEP_PRODUCT_LIMIT {
        return Err(Error::TimeStepTooLarge {
            product,
            limit: STEP_PRODUCT_LIMIT,
        });
    }

    let steps = (t_end / dt).ceil() as usize;
    let steps = steps.max(1);
    let h = t_end / steps as f64;
    let hc = Complex64::from(h);
    let record_stride = steps.div_ceil(MAX_RECORDS).max(1);
    let eigen_stride = steps.div_ceil(MAX_EIGEN_CHECKS).max(1);

    let mut rho: DMatrix<Complex64> = rho0.matrix().clone();
    let mut times = vec![0.0];
    let mut states = vec![rho0.clone()];
    let mut trace_drift: f64 = (rho.trace() - Complex64::from(1.0)).norm();
    let mut min_eig = min_hermitian_eigenvalue(&rho);

    for step in 1..=steps {
        let k1 = apply_total_raw(rates, geom, &rho);
        let k2 = apply_total_raw(rates, geom, &(&rho + &k1 * (hc * 0.5)));
        let k3 = apply_total_raw(rates, geom, &(&rho + &k2 * (hc * 0.5)));
        let k4 = apply_total_raw(rates, geom, &(&rho + &k3 * hc));
        rho += (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4)
            * (hc / Complex64::from(6.0));

        let drift = (rho.trace() - Complex64::from(1.0)).norm();
        trace_drift = trace_drift.max(drift);
        if drift > TRACE_DRIFT_LIMIT {
            return Err(Error::IntegrationQuality(format!(
                "trace drifted by {drift:.3e} at step {step}"
            )));
        }
        rho = (&rho + rho.adjoint()).scale(0.5);

        if step % eigen_stride == 0 || step == steps {
            let eig = min_hermitian_eigenvalue(&rho);
            min_eig = min_eig.min(eig);
            if eig < EIGENVALUE_LIMIT {
                return Err(Error::IntegrationQuality(format!(
                    "state lost positivity (eigenvalue {eig:.3e}) at step {step}"
                )));
            }
        }
        if step % record_stride == 0 || step == steps {
            times.push(step as f64 * h);
            states.push(DensityMatrix::from_matrix_unchecked(rho.clone()));
        }
    }

    let final_residual = max_abs(&apply_total_raw(rates, geom, &rho));
    Ok(EvolutionTrace {
        times,
        states,
        trace_drift,
        min_eigenvalue_seen: min_eig,
        converged: final_residual < CONVERGENCE_RESIDUAL,
        final_residual,
    })
}

/// Slowest decay rate toward the fixed point, from a log-linear fit of the
/// distance to the final state over the final decade of the recorded samples.
/// Returns zero when the trajectory never left the fixed point.
pub fn relaxation_rate(trace: &EvolutionTrace) -> Result<f64> {
    if !trace.converged {
        return Err(Error::FitFailure(
            "the trajectory has not converged to a fixed point".into(),
        ));
    }
    if trace.states.len() < 10 {
        return Err(Error::FitFailure(format!(
            "needs at least 10 recorded samples, got {}",
            trace.states.len()
        )));
    }
    let rho_final = trace.final_state().matrix();
    let n = trace.states.len() - 1;
    let dist: Vec<f64> = trace.states[..n]
        .iter()
        .map(|s| max_abs(&(s.matrix() - rho_final)))
        .collect();
    let dmax = dist.iter().cloned().fold(0.0, f64::max);
    if dmax <= 1e-12 {
        return Ok(0.0);
    }

    // Near the endpoint the measured distance is contaminated by the final
    // state's own offset from the true fixed point, so the fit stays a few
    // orders of magnitude above the smallest scales in the data.
    let floor = 1e-12_f64
        .max(1e-6 * dmax)
        .max(1e-3 * trace.final_residual);
    let tail_end = match dist.iter().rposition(|&dv| dv >= floor) {
        Some(i) => i,
        None => return Ok(0.0),
    };
    let d_tail = dist[tail_end];
    let window: Vec<usize> = (0..=tail_end)
        .filter(|&i| dist[i] <= 10.0 * d_tail && dist[i] >= floor)
        .collect();
    if window.len() < 3 {
        return Err(Error::FitFailure(
            "too few samples in the final decade of the decay".into(),
        ));
    }
    for pair in window.windows(2) {
        let (a, b) = (dist[pair[0]], dist[pair[1]]);
        if b > a * 1.05 + 1e-15 {
            return Err(Error::FitFailure(format!(
                "distance to the fixed point is not monotone in the tail ({a:.3e} -> {b:.3e})"
            )));
        }
    }

    let xs: Vec<f64> = window.iter().map(|&i| trace.times[i]).collect();
    let ys: Vec<f64> = window.iter().map(|&i| dist[i].ln()).collect();
    let (slope, _) = linear_fit(&xs, &ys)
        .ok_or_else(|| Error::FitFailure("degenerate fit window".into()))?;
    if slope > 1e-12 {
        return Err(Error::FitFailure(
            "distance to the fixed point grows in the tail".into(),
        ));
    }
    Ok((-slope).max(0.0))
}
