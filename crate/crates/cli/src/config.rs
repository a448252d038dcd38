use serde::Deserialize;
use symtypes::quantum::{self, DensityMatrix};
use symtypes::tableaux::ProbVec;

use crate::CliError;

/// A state given as a Bloch vector (`d = 2`), a diagonal, or a full matrix of
/// `[re, im]` pairs.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum StateSpec {
    Bloch { bloch: [f64; 3] },
    Diag { diag: Vec<f64> },
    Matrix { matrix: Vec<Vec<[f64; 2]>> },
}

impl StateSpec {
    pub fn to_state(&self) -> Result<DensityMatrix, CliError> {
        let s = match self {
            StateSpec::Bloch { bloch } => DensityMatrix::from_bloch(*bloch),
            StateSpec::Diag { diag } => {
                ProbVec::new(diag.clone()).and_then(|p| DensityMatrix::from_diagonal(p.weights()))
            }
            StateSpec::Matrix { matrix } => {
                quantum::matrix_from_pairs(matrix).and_then(DensityMatrix::new)
            }
        };
        s.map_err(CliError::from)
    }
}

/// Experiment parameters. Every field is optional; each mode fills in its
/// own defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub n_range: Option<[usize; 2]>,
    pub epsilon: Option<f64>,
    /// Use the `ε_n` schedule instead of a fixed `ε`.
    pub schedule: Option<bool>,
    pub nu: Option<f64>,
    pub sigma: Option<StateSpec>,
    pub null_set: Option<Vec<StateSpec>>,
    /// Treat `null_set` as the generators of a convex hull.
    pub hull: Option<bool>,
    pub delta: Option<f64>,
    pub f: Option<Vec<usize>>,
    pub lambda: Option<Vec<usize>>,
    pub samples: Option<usize>,
    /// Upper edge `c` of the region `x₃ ≤ c` in the Bloch example.
    pub region_x3_max: Option<f64>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("config: {e}")))
    }

    pub fn ns(&self, lo: usize, hi: usize) -> Result<Vec<usize>, CliError> {
        let [a, b] = self.n_range.unwrap_or([lo, hi]);
        if a == 0 || a > b {
            return Err(CliError::Parse(format!(
                "n_range [{a}, {b}] must satisfy 1 ≤ lo ≤ hi"
            )));
        }
        Ok((a..=b).collect())
    }

    pub fn sigma_or(&self, default: StateSpec) -> Result<DensityMatrix, CliError> {
        self.sigma.clone().unwrap_or(default).to_state()
    }

    pub fn null_states_or(&self, default: Vec<StateSpec>) -> Result<Vec<DensityMatrix>, CliError> {
        self.null_set
            .clone()
            .unwrap_or(default)
            .iter()
            .map(StateSpec::to_state)
            .collect()
    }

    /// Checks that every state has dimension `d` (when `d` is given) and
    /// returns the common dimension.
    pub fn check_dims(&self, states: &[&DensityMatrix]) -> Result<usize, CliError> {
        let d = self
            .d
            .unwrap_or_else(|| states.first().map_or(2, |s| s.dim()));
        if let Some(s) = states.iter().find(|s| s.dim() != d) {
            return Err(CliError::Parse(format!(
                "state of dimension {} where d = {d}",
                s.dim()
            )));
        }
        Ok(d)
    }
}

pub fn diag(v: &[f64]) -> StateSpec {
    StateSpec::Diag { diag: v.to_vec() }
}

pub fn bloch(x: f64, y: f64, z: f64) -> StateSpec {
    StateSpec::Bloch { bloch: [x, y, z] }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_specs_parse() {
        let c = Config::parse(r#"{"sigma":{"bloch":[0,0,0.5]},"null_set":[{"diag":[0.7,0.3]},{"matrix":[[[1,0],[0,0]],[[0,0],[0,0]]]}]}"#)
            .unwrap();
        let s = c.sigma_or(diag(&[0.5, 0.5])).unwrap();
        assert!((s.matrix()[(0, 0)].re - 0.75).abs() < 1e-12);
        let null = c.null_states_or(vec![]).unwrap();
        assert_eq!(null.len(), 2);
        assert!((null[1].matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_field_is_rejected() {
        assert!(matches!(
            Config::parse(r#"{"dd":2}"#),
            Err(CliError::Parse(_))
        ));
        assert!(matches!(Config::parse("{"), Err(CliError::Parse(_))));
    }

    #[test]
    fn bad_state_is_domain_error() {
        let c = Config::parse(r#"{"sigma":{"diag":[0.7,0.7]}}"#).unwrap();
        assert!(c.sigma_or(diag(&[0.5, 0.5])).is_err());
    }

    #[test]
    fn n_range_validation() {
        let c = Config::parse(r#"{"n_range":[5,3]}"#).unwrap();
        assert!(c.ns(1, 2).is_err());
        assert_eq!(Config::default().ns(4, 6).unwrap(), vec![4, 5, 6]);
    }
}
