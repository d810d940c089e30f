//! Polytope-spec JSON files and preset lookup.

use std::path::Path;

use bernstein_core::polytope::FacetSpec;
use bernstein_core::{ExpFamily, FaceLattice, NewtonConfig, Preset, WeightedSupport};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeSpec {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faces: Option<Vec<FaceSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceSpec {
    pub indices: Vec<usize>,
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl PolytopeSpec {
    pub fn parse(text: &str) -> CliResult<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| CliError::SpecParse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_preset(p: &Preset) -> Self {
        Self { dim: p.dim(), points: p.points.clone(), weights: Some(p.weights.clone()), faces: None }
    }

    fn validate(&self) -> CliResult<()> {
        if self.dim == 0 {
            return Err(CliError::Validation("dim must be at least 1".into()));
        }
        if let Some(i) = self.points.iter().position(|p| p.len() != self.dim) {
            return Err(CliError::Validation(format!("point {i} does not have {} coordinates", self.dim)));
        }
        if let Some(w) = &self.weights {
            if w.len() != self.points.len() {
                return Err(CliError::Validation(format!("{} weights for {} points", w.len(), self.points.len())));
            }
        }
        for (i, f) in self.faces.iter().flatten().enumerate() {
            if f.normal.len() != self.dim {
                return Err(CliError::Validation(format!("face {i}: normal does not have {} coordinates", self.dim)));
            }
            if let Some(&j) = f.indices.iter().find(|&&j| j >= self.points.len()) {
                return Err(CliError::Validation(format!("face {i}: index {j} out of range")));
            }
        }
        Ok(())
    }

    pub fn family(&self, newton: NewtonConfig) -> CliResult<ExpFamily> {
        let weights = self.weights.clone().unwrap_or_else(|| vec![1.0; self.points.len()]);
        let support = WeightedSupport::new(self.points.clone(), weights)?;
        let fam = match &self.faces {
            None => ExpFamily::new(support)?,
            Some(faces) => {
                let facets = faces
                    .iter()
                    .map(|f| FacetSpec { indices: f.indices.clone(), normal: f.normal.clone(), offset: f.offset })
                    .collect();
                let lattice = FaceLattice::from_facets(&support, facets)?;
                ExpFamily::with_lattice(support, lattice)?
            }
        };
        Ok(fam.with_newton(newton))
    }
}

/// Resolves `--preset` or `--spec` into a polytope spec.
pub fn load(preset: Option<&str>, path: Option<&Path>) -> CliResult<PolytopeSpec> {
    match (preset, path) {
        (Some(name), None) => Preset::by_name(name)
            .map(|p| PolytopeSpec::from_preset(&p))
            .map_err(|e| CliError::Validation(e.to_string())),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| CliError::Io { context: format!("reading {}", path.display()), source })?;
            PolytopeSpec::parse(&text)
        }
        (None, None) => Err(CliError::Usage("one of --preset or --spec is required".into())),
        (Some(_), Some(_)) => Err(CliError::Usage("--preset and --spec are mutually exclusive".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_and_explicit_specs() {
        let s = PolytopeSpec::parse(r#"{"dim": 1, "points": [[0], [1]]}"#).unwrap();
        assert_eq!(s.weights, None);
        let fam = s.family(NewtonConfig::default()).unwrap();
        assert_eq!(fam.support().weights(), &[1.0, 1.0]);

        let text = r#"{"dim": 1, "points": [[0], [1]], "weights": [1, 2],
            "faces": [{"indices": [0], "normal": [1], "offset": 0},
                      {"indices": [1], "normal": [-1], "offset": -1}]}"#;
        let fam = PolytopeSpec::parse(text).unwrap().family(NewtonConfig::default()).unwrap();
        assert!(fam.lattice().contains(&[0.5]));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(PolytopeSpec::parse("{"), Err(CliError::SpecParse(_))));
        assert!(matches!(PolytopeSpec::parse(r#"{"dim": 2, "points": [[0]]}"#), Err(CliError::Validation(_))));
        let w = r#"{"dim": 1, "points": [[0], [1]], "weights": [1]}"#;
        assert!(matches!(PolytopeSpec::parse(w), Err(CliError::Validation(_))));
        let flat = PolytopeSpec::parse(r#"{"dim": 2, "points": [[0, 0], [1, 1], [2, 2]]}"#).unwrap();
        assert!(matches!(flat.family(NewtonConfig::default()), Err(CliError::Core(_))));
    }
}
