//! Built-in weighted supports.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::family::ExpFamily;
use crate::polytope::WeightedSupport;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    /// Where the preset comes from and what it is used to check.
    pub provenance: &'static str,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl Preset {
    pub fn all() -> Vec<Preset> {
        let unit_square = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let triangle = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let mut cube = Vec::new();
        for i in 0..8u32 {
            cube.push((0..3).map(|b| ((i >> b) & 1) as f64).collect());
        }
        let mut centered = unit_square.clone();
        centered.push(vec![0.5, 0.5]);
        vec![
            Preset {
                name: "interval",
                description: "S = {0, 1} with unit weights",
                provenance: "standard simplex in dimension 1; classical Bernstein polynomials",
                points: vec![vec![0.0], vec![1.0]],
                weights: vec![1.0, 1.0],
            },
            Preset {
                name: "simplex2",
                description: "vertices of the standard 2-simplex with unit weights",
                provenance: "standard simplex; multivariate Bernstein polynomials on a triangle",
                points: triangle.clone(),
                weights: vec![1.0; 3],
            },
            Preset {
                name: "square",
                description: "vertices of [0,1]^2 with unit weights",
                provenance: "product of two intervals; tensor-product Bernstein polynomials",
                points: unit_square.clone(),
                weights: vec![1.0; 4],
            },
            Preset {
                name: "cube",
                description: "vertices of [0,1]^3 with unit weights",
                provenance: "product of three intervals",
                points: cube,
                weights: vec![1.0; 8],
            },
            Preset {
                name: "weighted-interval",
                description: "S = {0, 1} with weights (1, 2)",
                provenance: "weighted interval; on a simplex the weights do not change the measure",
                points: vec![vec![0.0], vec![1.0]],
                weights: vec![1.0, 2.0],
            },
            Preset {
                name: "weighted-simplex2",
                description: "vertices of the standard 2-simplex with weights (1, 2, 3)",
                provenance: "weighted simplex; weight-invariance check",
                points: triangle,
                weights: vec![1.0, 2.0, 3.0],
            },
            Preset {
                name: "weighted-square",
                description: "vertices of [0,1]^2 with weights (1, 2, 3, 4)",
                provenance: "non-product weights on the square; an unbalanced lattice family",
                points: unit_square,
                weights: vec![1.0, 2.0, 3.0, 4.0],
            },
            Preset {
                name: "interval2",
                description: "S = {0, 1, 2} with unit weights",
                provenance: "dilated interval with a lattice point inside; an unbalanced lattice family",
                points: vec![vec![0.0], vec![1.0], vec![2.0]],
                weights: vec![1.0; 3],
            },
            Preset {
                name: "square-centered",
                description: "vertices of [0,1]^2 plus the interior point (1/2, 1/2), unit weights",
                provenance: "support with a non-vertex point; non-lattice convolution path",
                points: centered,
                weights: vec![1.0; 5],
            },
        ]
    }

    pub fn by_name(name: &str) -> Result<Preset> {
        Self::all().into_iter().find(|p| p.name == name).ok_or_else(|| {
            let names: Vec<&str> = Self::all().iter().map(|p| p.name).collect();
            Error::InvalidArgument(alloc::format!("unknown preset `{name}` (known: {})", names.join(", ")))
        })
    }

    pub fn names() -> Vec<String> {
        Self::all().iter().map(|p| String::from(p.name)).collect()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn support(&self) -> Result<WeightedSupport> {
        WeightedSupport::new(self.points.clone(), self.weights.clone())
    }

    pub fn family(&self) -> Result<ExpFamily> {
        ExpFamily::new(self.support()?)
    }
}
