//! Problem-file schema and conversion to domain objects.
//!
//! A problem file is UTF-8 JSON with the exact field set below; unknown keys
//! are rejected. Polynomials are lists of terms, each a coefficient plus one
//! exponent per coordinate, with the basis tagged at the polynomial level.

use serde::Deserialize;

use sosvol::poly::{Basis, MultiIndex, Polynomial};
use sosvol::semialg::{OuterDomain, SemialgebraicSet, SetRole};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dimension: usize,
    #[serde(rename = "X")]
    pub outer: OuterSpec,
    #[serde(rename = "K")]
    pub inner: InnerSpec,
    #[serde(default)]
    pub options: Options,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum OuterSpec {
    Box { half_widths: Vec<f64> },
    Ball { radius: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerSpec {
    pub inequalities: Vec<PolySpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolySpec {
    #[serde(default)]
    pub basis: BasisSpec,
    pub terms: Vec<TermSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coefficient: f64,
    pub exponents: Vec<u32>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum BasisSpec {
    #[default]
    Monomial,
    Chebyshev,
}

impl From<BasisSpec> for Basis {
    fn from(b: BasisSpec) -> Basis {
        match b {
            BasisSpec::Monomial => Basis::Monomial,
            BasisSpec::Chebyshev => Basis::ChebyshevTensor,
        }
    }
}

/// Per-file defaults; command-line flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    pub dmin: Option<usize>,
    pub dmax: Option<usize>,
    pub step: Option<usize>,
    pub basis: Option<BasisSpec>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub degrees: Option<Vec<usize>>,
    pub t_values: Option<Vec<f64>>,
    pub grid: Option<usize>,
    /// Reference volume for approximation errors when known analytically;
    /// estimated by Monte Carlo otherwise.
    pub vol_ref: Option<f64>,
}

#[derive(Debug)]
pub struct LoadedProblem {
    pub k_set: SemialgebraicSet,
    pub x_dom: OuterDomain,
    pub options: Options,
}

#[derive(Debug)]
pub enum LoadError {
    /// JSON syntax or schema error with line/column information.
    Parse(String),
    /// Structurally valid file describing an invalid problem.
    Invalid(String),
}

impl std::fmt::Display for LoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LoadError::Parse(m) => write!(f, "parse error: {m}"),
            LoadError::Invalid(m) => write!(f, "invalid problem: {m}"),
        }
    }
}

pub fn load_problem(text: &str) -> Result<LoadedProblem, LoadError> {
    let file: ProblemFile = serde_json::from_str(text)
        .map_err(|e| LoadError::Parse(format!("line {} column {}: {}", e.line(), e.column(), e)))?;
    let n = file.dimension;
    if n == 0 {
        return Err(LoadError::Invalid("dimension must be at least 1".into()));
    }
    let x_dom = match file.outer {
        OuterSpec::Box { half_widths } => OuterDomain::boxed(n, half_widths),
        OuterSpec::Ball { radius } => OuterDomain::ball(n, radius),
    }
    .map_err(|e| LoadError::Invalid(e.to_string()))?;
    let mut gs = Vec::with_capacity(file.inner.inequalities.len());
    for (i, spec) in file.inner.inequalities.iter().enumerate() {
        let terms: Vec<(MultiIndex, f64)> = spec
            .terms
            .iter()
            .map(|t| {
                if t.exponents.len() != n {
                    return Err(LoadError::Invalid(format!(
                        "inequality {i}: term has {} exponents, expected {n}",
                        t.exponents.len()
                    )));
                }
                Ok((MultiIndex::new(t.exponents.clone()), t.coefficient))
            })
            .collect::<Result<_, _>>()?;
        let p = Polynomial::from_terms(n, spec.basis.into(), &terms)
            .map_err(|e| LoadError::Invalid(format!("inequality {i}: {e}")))?;
        gs.push(p);
    }
    let k_set = SemialgebraicSet::new(n, SetRole::InnerK, gs)
        .map_err(|e| LoadError::Invalid(e.to_string()))?;
    Ok(LoadedProblem {
        k_set,
        x_dom,
        options: file.options,
    })
}
