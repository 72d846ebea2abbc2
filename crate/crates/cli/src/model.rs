//! Model construction from the `[model]` section and from model files.

use std::path::Path;

use markovlen::models::{ising_chain, ising_grid};
use markovlen::stabilizer::models::{cluster_chain, toric_patch};
use markovlen::stabilizer::{PauliOperator, PauliTerm, StabilizerHamiltonian};
use markovlen::{GibbsModel, Hypergraph};

use crate::config::{ClassicalSpec, LoadedConfig, ModelSpec, PauliSpec, TermSpec};
use crate::error::CliError;

#[derive(Debug, Clone)]
pub enum Model {
    Classical(GibbsModel),
    Stabilizer(StabilizerHamiltonian),
}

impl Model {
    pub fn graph(&self) -> &Hypergraph {
        match self {
            Model::Classical(m) => m.graph(),
            Model::Stabilizer(h) => h.graph(),
        }
    }
}

pub fn build_model(cfg: &LoadedConfig) -> Result<Model, CliError> {
    let beta = cfg.config.beta;
    if !beta.is_finite() || beta < 0.0 {
        return Err(CliError::Config(format!(
            "beta must be finite and nonnegative, got {beta}"
        )));
    }
    let spec = cfg
        .config
        .model
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [model] section".into()))?;
    let need = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(CliError::Config(what.to_string()))
        }
    };
    Ok(match spec {
        ModelSpec::IsingChain { n, periodic } => {
            need(*n >= 2, "ising_chain needs n >= 2")?;
            Model::Classical(ising_chain(*n, *periodic, beta))
        }
        ModelSpec::IsingGrid {
            rows,
            cols,
            periodic,
        } => {
            need(
                *rows >= 1 && *cols >= 1 && rows * cols >= 2,
                "ising_grid needs at least two sites",
            )?;
            Model::Classical(ising_grid(*rows, *cols, *periodic, beta))
        }
        ModelSpec::ToricPatch { l, coupling } => {
            need(*l >= 2, "toric_patch needs l >= 2")?;
            Model::Stabilizer(toric_patch(*l, *coupling)?)
        }
        ModelSpec::ClusterChain { n, coupling } => {
            need(*n >= 2, "cluster_chain needs n >= 2")?;
            Model::Stabilizer(cluster_chain(*n, *coupling)?)
        }
        ModelSpec::Classical(spec) => Model::Classical(classical_model(spec, beta)?),
        ModelSpec::Pauli(spec) => Model::Stabilizer(pauli_model(spec)?),
        ModelSpec::ClassicalFromFile { path } => {
            let path = cfg.resolve(path);
            Model::Classical(classical_model(&read_classical_file(&path)?, beta)?)
        }
        ModelSpec::PauliFromFile { path } => {
            let path = cfg.resolve(path);
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            Model::Stabilizer(pauli_model(&parse_pauli_file(&text)?)?)
        }
    })
}

pub fn classical_model(spec: &ClassicalSpec, beta: f64) -> Result<GibbsModel, CliError> {
    let g = Hypergraph::new(spec.n, spec.q, spec.edges.clone())?;
    let tables = match (&spec.tables, &spec.table) {
        (Some(t), None) => t.clone(),
        (None, Some(t)) => vec![t.clone(); spec.edges.len()],
        _ => {
            return Err(CliError::Config(
                "classical model needs exactly one of `tables` or `table`".into(),
            ))
        }
    };
    Ok(GibbsModel::new(g, beta, tables)?)
}

/// Reads a classical model file: JSON when the extension is `.json`, TOML
/// otherwise, with the fields of an inline `kind = "classical"` model.
pub fn read_classical_file(path: &Path) -> Result<ClassicalSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |e: String| CliError::Config(format!("{}: {e}", path.display()));
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| bad(e.to_string()))
    } else {
        toml::from_str(&text).map_err(|e| bad(e.to_string()))
    }
}

pub fn pauli_model(spec: &PauliSpec) -> Result<StabilizerHamiltonian, CliError> {
    let terms: Vec<PauliTerm> = spec
        .terms
        .iter()
        .map(|t| {
            Ok(PauliTerm::new(
                t.coefficient,
                PauliOperator::parse(spec.n, spec.q, &t.operator)?,
            ))
        })
        .collect::<Result<_, CliError>>()?;
    if terms.is_empty() {
        return Err(CliError::Config("Pauli model has no terms".into()));
    }
    Ok(match &spec.generators {
        Some(gens) => {
            let gens: Vec<PauliOperator> = gens
                .iter()
                .map(|g| PauliOperator::parse(spec.n, spec.q, g))
                .collect::<Result<_, _>>()?;
            StabilizerHamiltonian::with_generators(spec.n, spec.q, terms, gens)?
        }
        None => StabilizerHamiltonian::new(spec.n, spec.q, terms)?,
    })
}

/// Parses the line-based Pauli model format:
///
/// ```text
/// # comment
/// n 8
/// q 2
/// term -1.0 0:X 1:X 2:X 3:X
/// generator 0:Z 1:Z
/// ```
pub fn parse_pauli_file(text: &str) -> Result<PauliSpec, CliError> {
    let mut n = None;
    let mut q = 2;
    let mut terms = Vec::new();
    let mut generators = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| CliError::Config(format!("Pauli file line {}: {msg}", k + 1));
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match key {
            "n" => {
                n = Some(
                    rest.parse()
                        .map_err(|_| bad("expected an integer after `n`"))?,
                )
            }
            "q" => {
                q = rest
                    .parse()
                    .map_err(|_| bad("expected an integer after `q`"))?
            }
            "term" => {
                let (coef, op) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                let coefficient: f64 = coef
                    .parse()
                    .map_err(|_| bad("expected a coefficient after `term`"))?;
                terms.push(TermSpec {
                    coefficient,
                    operator: op.trim().to_string(),
                });
            }
            "generator" => generators.push(rest.to_string()),
            other => return Err(bad(&format!("unknown keyword `{other}`"))),
        }
    }
    let n = n.ok_or_else(|| CliError::Config("Pauli file does not set `n`".into()))?;
    Ok(PauliSpec {
        n,
        q,
        terms,
        generators: (!generators.is_empty()).then_some(generators),
    })
}
