//! Configuration file handling. The file is TOML with fixed sections; any
//! unknown key is rejected so typos cannot silently fall back to defaults.

use std::fs;
use std::path::Path;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use excitonflow::model::{ReservoirLabel, ReservoirSpec, SystemSpec};

use crate::Failure;

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub system: SystemSection,
    pub reservoirs: ReservoirsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub eps0: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub degenerate_dim: usize,
    /// Complex amplitudes as [re, im] pairs, one per degenerate level.
    pub chi: Vec<[f64; 2]>,
    pub psi: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirsSection {
    pub em: ReservoirSection,
    pub ph: ReservoirSection,
    pub sink: ReservoirSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirSection {
    pub beta: f64,
    pub gamma0_re: f64,
    #[serde(default)]
    pub lamb_plus: f64,
    #[serde(default)]
    pub lamb_minus: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
}

fn default_residual_tol() -> f64 {
    DEFAULT_RESIDUAL_TOL
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// One of alpha, gamma0_em, beta_em.
    pub parameter: String,
    pub grid: Vec<f64>,
}

impl ModelConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path).map_err(|e| {
            Failure::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| Failure::Config(format!("config {}: {e}", path.display())))
    }

    pub fn system_spec(&self) -> Result<SystemSpec, Failure> {
        let s = &self.system;
        SystemSpec::new(
            s.eps0,
            s.eps1,
            s.eps2,
            s.degenerate_dim,
            pairs_to_vector(&s.chi),
            pairs_to_vector(&s.psi),
        )
        .map_err(Failure::from)
    }

    pub fn reservoir_specs(&self) -> Vec<ReservoirSpec> {
        let section = |label, r: &ReservoirSection| ReservoirSpec {
            label,
            beta: r.beta,
            gamma0_re: r.gamma0_re,
            lamb_plus: r.lamb_plus,
            lamb_minus: r.lamb_minus,
        };
        vec![
            section(ReservoirLabel::Em, &self.reservoirs.em),
            section(ReservoirLabel::Ph, &self.reservoirs.ph),
            section(ReservoirLabel::Sink, &self.reservoirs.sink),
        ]
    }

    pub fn residual_tol(&self) -> f64 {
        self.solver
            .as_ref()
            .map(|s| s.residual_tol)
            .unwrap_or(DEFAULT_RESIDUAL_TOL)
    }
}

pub fn pairs_to_vector(pairs: &[[f64; 2]]) -> DVector<Complex64> {
    DVector::from_iterator(pairs.len(), pairs.iter().map(|p| Complex64::new(p[0], p[1])))
}

pub fn vector_to_pairs(v: &DVector<Complex64>) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}
