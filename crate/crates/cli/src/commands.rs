//! The four analysis commands and their CSV/JSON serializations.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use excitonflow::density::{max_abs, DensityMatrix};
use excitonflow::dynamics::{evolve, rate_scale, EvolutionTrace};
use excitonflow::liouvillian::{apply_total, build_superoperator};
use excitonflow::model::{
    bright_geometry, build_rates, embed_degenerate, BrightGeometry, RateSet, SystemSpec,
};
use excitonflow::stationary::{
    full_kernel_dimension, stationary_general, stationary_numeric, Method, StationaryResult,
};
use excitonflow::transport::{dark_basis, flow_from_state, sweep, SweepParameter, SweepTable};

use crate::config::{vector_to_pairs, ModelConfig};
use crate::{Failure, Format};

/// 17 significant digits, enough to reproduce any f64 exactly.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn open_out(path: Option<&PathBuf>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| {
                Failure::Config(format!("cannot create output file {}: {e}", p.display()))
            })?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn write_failure(e: io::Error) -> Failure {
    Failure::Config(format!("cannot write output: {e}"))
}

struct Model {
    sys: SystemSpec,
    rates: RateSet,
    geom: BrightGeometry,
}

fn build_model(cfg: &ModelConfig) -> Result<Model, Failure> {
    let sys = cfg.system_spec()?;
    let rates = build_rates(&sys, &cfg.reservoir_specs())?;
    let geom = bright_geometry(&sys)?;
    Ok(Model { sys, rates, geom })
}

/// Populations and the aligned upper-level coherence of a state, in the same
/// convention the stationary solvers report.
fn state_coordinates(geom: &BrightGeometry, state: &DensityMatrix) -> (f64, f64, f64, f64, f64) {
    let psi = embed_degenerate(&geom.psi_hat);
    let psipsi = state.expectation(&psi);
    let (etaeta, psieta) = match geom.eta_hat.as_ref() {
        Some(eta_hat) => {
            let eta = embed_degenerate(eta_hat);
            let coh = state.coherence(&psi, &eta);
            (state.expectation(&eta), (geom.phase.conj() * coh).re)
        }
        None => (0.0, 0.0),
    };
    (state.population(0), state.population(1), psipsi, etaeta, psieta)
}

fn generator_residual(m: &Model, state: &DensityMatrix) -> Result<f64, Failure> {
    let image = apply_total(&m.rates, &m.geom, state.matrix())?;
    Ok(max_abs(&image) / (1.0 + rate_scale(&m.rates, &m.geom)))
}

#[derive(Serialize)]
struct MethodReport {
    method: String,
    rho00: f64,
    rho11: f64,
    rho_psipsi: f64,
    rho_etaeta: f64,
    rho_psieta: f64,
    flow: f64,
    residual: f64,
}

#[derive(Serialize)]
struct StationaryReport {
    config: ModelConfig,
    methods: Vec<MethodReport>,
    cross_method_max_deviation: Option<f64>,
    restricted_kernel_dimension: usize,
    full_kernel_dimension: usize,
    reference_method: String,
    flow: f64,
}

pub fn cmd_stationary(
    cfg: &ModelConfig,
    format: Format,
    out: Option<&PathBuf>,
) -> Result<(), Failure> {
    let m = build_model(cfg)?;
    let lv = build_superoperator(&m.rates, &m.geom);

    let mut results: Vec<StationaryResult> = Vec::new();
    if m.rates.lamb_shifts_are_zero() {
        results.push(stationary_general(&m.rates, &m.geom)?);
    }
    results.push(stationary_numeric(&lv, &m.geom)?);
    if let Some(solver) = &cfg.solver {
        let rho0 = DensityMatrix::ground(m.geom.hilbert_dim());
        let trace = evolve(&m.rates, &m.geom, &rho0, solver.t_end, solver.dt)?;
        if !trace.converged {
            return Err(Failure::Numerical(format!(
                "long-time integration did not converge: residual {:.3e} after t = {}",
                trace.final_residual, solver.t_end
            )));
        }
        let state = trace.final_state().clone();
        let (rho00, rho11, rho_psipsi, rho_etaeta, rho_psieta) =
            state_coordinates(&m.geom, &state);
        results.push(StationaryResult {
            rho00,
            rho11,
            rho_psipsi,
            rho_etaeta,
            rho_psieta,
            full_rho: state,
            method: Method::LongTimeIntegration,
        });
    }

    let mut cross: Option<f64> = None;
    for i in 0..results.len() {
        for j in (i + 1)..results.len() {
            let dev = results[i].max_coordinate_deviation(&results[j]);
            cross = Some(cross.unwrap_or(0.0).max(dev));
        }
    }

    let reference = &results[0];
    let flow = flow_from_state(&m.rates, reference).flow;
    let reference_method = reference.method.to_string();
    let full_dim = full_kernel_dimension(&lv);

    let mut rows = Vec::new();
    let mut worst_residual = 0.0f64;
    for r in &results {
        let residual = generator_residual(&m, &r.full_rho)?;
        worst_residual = worst_residual.max(residual);
        rows.push(MethodReport {
            method: r.method.to_string(),
            rho00: r.rho00,
            rho11: r.rho11,
            rho_psipsi: r.rho_psipsi,
            rho_etaeta: r.rho_etaeta,
            rho_psieta: r.rho_psieta,
            flow: flow_from_state(&m.rates, r).flow,
            residual,
        });
    }

    let mut w = open_out(out)?;
    match format {
        Format::Csv => {
            writeln!(w, "method,rho00,rho11,rho_psipsi,rho_etaeta,rho_psieta,flow,residual")
                .map_err(write_failure)?;
            for r in &rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    r.method,
                    fmt(r.rho00),
                    fmt(r.rho11),
                    fmt(r.rho_psipsi),
                    fmt(r.rho_etaeta),
                    fmt(r.rho_psieta),
                    fmt(r.flow),
                    fmt(r.residual)
                )
                .map_err(write_failure)?;
            }
        }
        Format::Json => {
            let report = StationaryReport {
                config: cfg.clone(),
                methods: rows,
                cross_method_max_deviation: cross,
                restricted_kernel_dimension: 1,
                full_kernel_dimension: full_dim,
                reference_method: reference_method.clone(),
                flow,
            };
            serde_json::to_writer_pretty(&mut w, &report)
                .map_err(|e| Failure::Config(format!("cannot serialize report: {e}")))?;
            writeln!(w).map_err(write_failure)?;
        }
    }
    w.flush().map_err(write_failure)?;

    let method_names: Vec<String> = results.iter().map(|r| r.method.to_string()).collect();
    eprintln!("methods: {}", method_names.join(", "));
    match cross {
        Some(c) => eprintln!("cross-method max coordinate deviation: {c:.3e}"),
        None => eprintln!("cross-method max coordinate deviation: n/a (single method)"),
    }
    eprintln!("kernel dimensions: restricted 1, full {full_dim}");
    eprintln!("flow ({reference_method}): {flow:.10e}");

    let tol = cfg.residual_tol();
    if worst_residual > tol {
        return Err(Failure::Numerical(format!(
            "stationarity residual {worst_residual:.3e} exceeds tolerance {tol:.3e}"
        )));
    }
    Ok(())
}

fn initial_state(m: &Model, selector: &str) -> Result<DensityMatrix, Failure> {
    let dim = m.geom.hilbert_dim();
    match selector {
        "ground" => Ok(DensityMatrix::ground(dim)),
        "sink" => {
            Ok(DensityMatrix::pure(&excitonflow::model::sink_vector(dim)).expect("unit vector"))
        }
        "bright_chi" => Ok(DensityMatrix::pure(&embed_degenerate(&m.geom.chi_hat))
            .expect("unit vector")),
        "bright_psi" => Ok(DensityMatrix::pure(&embed_degenerate(&m.geom.psi_hat))
            .expect("unit vector")),
        "dark" => {
            let basis = dark_basis(&m.geom);
            match basis.first() {
                Some(d) => Ok(DensityMatrix::pure(d).expect("unit vector")),
                None => Err(Failure::Config(
                    "no dark direction exists for this coupling geometry".into(),
                )),
            }
        }
        other => match other.strip_prefix("custom:") {
            Some(path) => load_custom_state(Path::new(path), dim),
            None => Err(Failure::Config(format!(
                "unknown initial state selector '{other}' (expected ground, sink, bright_chi, \
                 bright_psi, dark, or custom:PATH)"
            ))),
        },
    }
}

fn load_custom_state(path: &Path, dim: usize) -> Result<DensityMatrix, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read state file {}: {e}", path.display())))?;
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(&text)
        .map_err(|e| Failure::Config(format!("state file {}: {e}", path.display())))?;
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Failure::Config(format!(
            "state file {} must hold a {dim}x{dim} matrix of [re, im] pairs",
            path.display()
        )));
    }
    let mat = DMatrix::from_fn(dim, dim, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1]));
    DensityMatrix::new(mat)
        .map_err(|e| Failure::Config(format!("state file {}: {e}", path.display())))
}

#[derive(Serialize)]
struct EvolveReport {
    config: ModelConfig,
    initial: String,
    times: Vec<f64>,
    rho00: Vec<f64>,
    rho11: Vec<f64>,
    rho_psipsi: Vec<f64>,
    rho_etaeta: Vec<f64>,
    re_rho_psieta: Vec<f64>,
    trace_err: Vec<f64>,
    trace_drift: f64,
    min_eigenvalue_seen: f64,
    converged: bool,
    final_residual: f64,
}

fn evolve_report(
    cfg: &ModelConfig,
    m: &Model,
    selector: &str,
    trace: &EvolutionTrace,
) -> EvolveReport {
    let n = trace.times.len();
    let mut report = EvolveReport {
        config: cfg.clone(),
        initial: selector.to_string(),
        times: trace.times.clone(),
        rho00: Vec::with_capacity(n),
        rho11: Vec::with_capacity(n),
        rho_psipsi: Vec::with_capacity(n),
        rho_etaeta: Vec::with_capacity(n),
        re_rho_psieta: Vec::with_capacity(n),
        trace_err: Vec::with_capacity(n),
        trace_drift: trace.trace_drift,
        min_eigenvalue_seen: trace.min_eigenvalue_seen,
        converged: trace.converged,
        final_residual: trace.final_residual,
    };
    for state in &trace.states {
        let (p0, p1, pp, ee, pe) = state_coordinates(&m.geom, state);
        report.rho00.push(p0);
        report.rho11.push(p1);
        report.rho_psipsi.push(pp);
        report.rho_etaeta.push(ee);
        report.re_rho_psieta.push(pe);
        report.trace_err.push((state.trace() - Complex64::from(1.0)).norm());
    }
    report
}

pub fn cmd_evolve(
    cfg: &ModelConfig,
    selector: &str,
    format: Format,
    out: Option<&PathBuf>,
) -> Result<(), Failure> {
    let solver = cfg.solver.as_ref().ok_or_else(|| {
        Failure::Config("evolve needs a [solver] section with dt and t_end".into())
    })?;
    let m = build_model(cfg)?;
    let rho0 = initial_state(&m, selector)?;
    let trace = evolve(&m.rates, &m.geom, &rho0, solver.t_end, solver.dt)?;
    let report = evolve_report(cfg, &m, selector, &trace);

    let mut w = open_out(out)?;
    match format {
        Format::Csv => {
            writeln!(w, "t,rho00,rho11,rho_psipsi,rho_etaeta,re_rho_psieta,trace_err")
                .map_err(write_failure)?;
            for k in 0..report.times.len() {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    fmt(report.times[k]),
                    fmt(report.rho00[k]),
                    fmt(report.rho11[k]),
                    fmt(report.rho_psipsi[k]),
                    fmt(report.rho_etaeta[k]),
                    fmt(report.re_rho_psieta[k]),
                    fmt(report.trace_err[k])
                )
                .map_err(write_failure)?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &report)
                .map_err(|e| Failure::Config(format!("cannot serialize report: {e}")))?;
            writeln!(w).map_err(write_failure)?;
        }
    }
    w.flush().map_err(write_failure)?;

    eprintln!(
        "converged: {} (final residual {:.3e})",
        trace.converged, trace.final_residual
    );
    eprintln!(
        "trace drift: {:.3e}, lowest eigenvalue seen: {:.3e}",
        trace.trace_drift, trace.min_eigenvalue_seen
    );
    Ok(())
}

#[derive(Serialize)]
struct SweepRowReport {
    value: f64,
    flow: f64,
    rho00: f64,
    rho11: f64,
    rho_psipsi: f64,
    rho_etaeta: f64,
    residual: f64,
    flagged: bool,
}

#[derive(Serialize)]
struct SweepReport {
    config: ModelConfig,
    parameter: String,
    rows: Vec<SweepRowReport>,
    final_decade_relative_change: Option<f64>,
    flagged_rows: usize,
}

pub fn cmd_sweep(cfg: &ModelConfig, format: Format, out: Option<&PathBuf>) -> Result<(), Failure> {
    let section = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Failure::Config("sweep needs a [sweep] section".into()))?;
    let parameter: SweepParameter = section
        .parameter
        .parse()
        .map_err(|e: excitonflow::Error| Failure::from(e))?;
    let sys = cfg.system_spec()?;
    let specs = cfg.reservoir_specs();
    let table: SweepTable = sweep(&sys, &specs, parameter, &section.grid)?;

    let flagged = table.rows.iter().filter(|r| r.flagged).count();
    let saturation = match parameter {
        SweepParameter::Gamma0Em => table.final_decade_relative_change(),
        _ => None,
    };

    let mut w = open_out(out)?;
    match format {
        Format::Csv => {
            writeln!(w, "parameter,F,rho00,rho11,rho_psipsi,rho_etaeta,residual")
                .map_err(write_failure)?;
            for r in &table.rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    fmt(r.value),
                    fmt(r.flow),
                    fmt(r.rho00),
                    fmt(r.rho11),
                    fmt(r.rho_psipsi),
                    fmt(r.rho_etaeta),
                    fmt(r.residual)
                )
                .map_err(write_failure)?;
            }
        }
        Format::Json => {
            let report = SweepReport {
                config: cfg.clone(),
                parameter: parameter.to_string(),
                rows: table
                    .rows
                    .iter()
                    .map(|r| SweepRowReport {
                        value: r.value,
                        flow: r.flow,
                        rho00: r.rho00,
                        rho11: r.rho11,
                        rho_psipsi: r.rho_psipsi,
                        rho_etaeta: r.rho_etaeta,
                        residual: r.residual,
                        flagged: r.flagged,
                    })
                    .collect(),
                final_decade_relative_change: saturation,
                flagged_rows: flagged,
            };
            serde_json::to_writer_pretty(&mut w, &report)
                .map_err(|e| Failure::Config(format!("cannot serialize report: {e}")))?;
            writeln!(w).map_err(write_failure)?;
        }
    }
    w.flush().map_err(write_failure)?;

    eprintln!("rows: {}, flagged: {flagged}", table.rows.len());
    if let Some(s) = saturation {
        eprintln!("saturation: final-decade relative change {s:.3e}");
    }
    if flagged > 0 {
        return Err(Failure::Numerical(format!(
            "{flagged} sweep point(s) exceeded the stationarity residual tolerance"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct DarkReport {
    config: ModelConfig,
    degenerate_dim: usize,
    rank: usize,
    basis: Vec<Vec<[f64; 2]>>,
}

pub fn cmd_dark(cfg: &ModelConfig, format: Format, out: Option<&PathBuf>) -> Result<(), Failure> {
    let m = build_model(cfg)?;
    let basis = dark_basis(&m.geom);
    let rank = basis.len();

    let mut w = open_out(out)?;
    match format {
        Format::Csv => {
            writeln!(w, "vector,component,re,im").map_err(write_failure)?;
            for (k, v) in basis.iter().enumerate() {
                for (i, z) in v.iter().enumerate() {
                    writeln!(w, "{k},{i},{},{}", fmt(z.re), fmt(z.im)).map_err(write_failure)?;
                }
            }
        }
        Format::Json => {
            let report = DarkReport {
                config: cfg.clone(),
                degenerate_dim: m.sys.degenerate_dim,
                rank,
                basis: basis.iter().map(vector_to_pairs).collect(),
            };
            serde_json::to_writer_pretty(&mut w, &report)
                .map_err(|e| Failure::Config(format!("cannot serialize report: {e}")))?;
            writeln!(w).map_err(write_failure)?;
        }
    }
    w.flush().map_err(write_failure)?;

    eprintln!("dark subspace rank {rank} ({} upper levels)", m.sys.degenerate_dim);
    Ok(())
}
