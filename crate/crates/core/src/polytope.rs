//! Weighted support sets, the face lattice of `P = conv(S)`, and point location.
//!
//! Facet normals are unit vectors pointing into `P`, so for a facet `(u, λ)`
//! the slack `⟨x,u⟩ − λ` is the signed Euclidean distance of `x` to the
//! facet hyperplane. A face is identified by `S_K`, the support points in its
//! closure; every face except `P°` is an intersection of facets.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::linalg::{complement_vector, dot, orthonormal_basis, sub};
use crate::{Error, Result};

/// Absolute tolerance for face membership.
pub const TOL_GEOM: f64 = 1e-9;

/// Largest dimension for which the face lattice is computed automatically.
pub const MAX_AUTO_DIM: usize = 3;

/// The generator `(S, c)` of a finitely supported Bernstein measure.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSupport {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    dim: usize,
}

impl WeightedSupport {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let dim = match points.first() {
            Some(p) if !p.is_empty() => p.len(),
            Some(_) => return Err(Error::InvalidSupport("points must have dimension >= 1".into())),
            None => return Err(Error::InvalidSupport("support is empty".into())),
        };
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidSupport("points have inconsistent dimensions".into()));
        }
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSupport("non-finite coordinate".into()));
        }
        if weights.len() != points.len() {
            return Err(Error::InvalidSupport(format!(
                "{} weights for {} points",
                weights.len(),
                points.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidSupport(format!("weight {w} is not strictly positive")));
        }
        for i in 0..points.len() {
            for j in 0..i {
                if points[i] == points[j] {
                    return Err(Error::InvalidSupport(format!("duplicate point {:?}", points[i])));
                }
            }
        }
        let diffs: Vec<Vec<f64>> = points.iter().skip(1).map(|p| sub(p, &points[0])).collect();
        if orthonormal_basis(&diffs, dim, 1e-10).ncols() < dim {
            return Err(Error::DegenerateHull);
        }
        Ok(Self { points, weights, dim })
    }

    /// All weights equal to one.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![1.0; n])
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when every coordinate of every point is an integer.
    pub fn is_lattice(&self) -> bool {
        self.points.iter().flatten().all(|c| (c - libm::round(*c)).abs() <= 1e-12)
    }
}

/// A relatively open face `K` of `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Indices into the support of the points in the closure of the face.
    pub indices: Vec<usize>,
    /// Inward unit normal `u` with `⟨y,u⟩ = offset` on the closure; zero for `P°`.
    pub normal: Vec<f64>,
    /// `λ(u) = min_P ⟨y,u⟩`.
    pub offset: f64,
    pub dim: usize,
    /// Orthonormal basis of `X_K` as columns (`m × dim`). Identity for `P°`.
    pub tangent_basis: DMatrix<f64>,
    /// Positions (in [`FaceLattice::faces`]) of the facets whose closure contains this face.
    pub facets: Vec<usize>,
}

impl Face {
    pub fn is_top(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn is_vertex(&self) -> bool {
        self.dim == 0
    }
}

/// A facet given by the caller (required for `dim > 3`).
#[derive(Debug, Clone, PartialEq)]
pub struct FacetSpec {
    pub indices: Vec<usize>,
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// The faces of `P`, ordered by dimension, with closure incidence.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceLattice {
    pub faces: Vec<Face>,
    /// `incidence[i]` lists the faces `j ≠ i` whose closure contains face `i`.
    pub incidence: Vec<Vec<usize>>,
    facet_ids: Vec<usize>,
    by_indices: BTreeMap<Vec<usize>, usize>,
    dim: usize,
    n_points: usize,
}

/// Computes the complete face lattice of `conv(S)` for `dim <= 3`.
pub fn build_face_lattice(support: &WeightedSupport) -> Result<FaceLattice> {
    if support.dim() > MAX_AUTO_DIM {
        return Err(Error::UnsupportedDimension { dim: support.dim() });
    }
    let facets = enumerate_facets(support)?;
    FaceLattice::from_facets(support, facets)
}

fn coord_scale(support: &WeightedSupport) -> f64 {
    1.0 + support.points().iter().flatten().fold(0.0f64, |a, c| a.max(c.abs()))
}

// Brute force over m-subsets: each affinely independent subset spans a
// hyperplane, which is a facet iff all points lie on one side of it.
fn enumerate_facets(support: &WeightedSupport) -> Result<Vec<FacetSpec>> {
    let m = support.dim();
    let pts = support.points();
    let n = pts.len();
    let tol = TOL_GEOM * coord_scale(support);
    let mut found: BTreeMap<Vec<usize>, FacetSpec> = BTreeMap::new();
    let mut combo: Vec<usize> = (0..m).collect();
    if n < m {
        return Err(Error::DegenerateHull);
    }
    loop {
        let diffs: Vec<Vec<f64>> = combo[1..].iter().map(|&i| sub(&pts[i], &pts[combo[0]])).collect();
        let basis = orthonormal_basis(&diffs, m, 1e-10);
        if basis.ncols() == m - 1 {
            if let Some(normal) = complement_vector(&basis) {
                let level = dot(&pts[combo[0]], &normal);
                let vals: Vec<f64> = pts.iter().map(|p| dot(p, &normal) - level).collect();
                let sign = if vals.iter().all(|&v| v >= -tol) {
                    Some(1.0)
                } else if vals.iter().all(|&v| v <= tol) {
                    Some(-1.0)
                } else {
                    None
                };
                if let Some(sign) = sign {
                    let indices: Vec<usize> = (0..n).filter(|&i| vals[i].abs() <= tol).collect();
                    let normal: Vec<f64> = normal.iter().map(|c| sign * c).collect();
                    let offset = sign * level;
                    found.entry(indices.clone()).or_insert(FacetSpec { indices, normal, offset });
                }
            }
        }
        // next combination
        let mut k = m;
        loop {
            if k == 0 {
                return Ok(found.into_values().collect());
            }
            k -= 1;
            if combo[k] < n - m + k {
                combo[k] += 1;
                for j in k + 1..m {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}

impl FaceLattice {
    /// Builds the lattice from a complete list of facets by closing the facet
    /// point sets under intersection. Works in any dimension.
    pub fn from_facets(support: &WeightedSupport, facets: Vec<FacetSpec>) -> Result<Self> {
        let m = support.dim();
        let pts = support.points();
        let n = pts.len();
        let tol = TOL_GEOM * coord_scale(support);
        if facets.is_empty() {
            return Err(Error::InvalidSupport("no facets".into()));
        }

        // Normalize and validate the facets.
        let mut unit: Vec<FacetSpec> = Vec::with_capacity(facets.len());
        for f in facets {
            if f.normal.len() != m {
                return Err(Error::InvalidSupport("facet normal has wrong dimension".into()));
            }
            let len = crate::linalg::norm(&f.normal);
            if len == 0.0 {
                return Err(Error::InvalidSupport("facet normal is zero".into()));
            }
            let normal: Vec<f64> = f.normal.iter().map(|c| c / len).collect();
            let offset = f.offset / len;
            let mut indices: Vec<usize> = Vec::new();
            for (i, p) in pts.iter().enumerate() {
                let s = dot(p, &normal) - offset;
                if s < -tol {
                    return Err(Error::InvalidSupport(format!("point {i} violates facet {:?}", f.indices)));
                }
                if s <= tol {
                    indices.push(i);
                }
            }
            let mut declared = f.indices.clone();
            declared.sort_unstable();
            declared.dedup();
            if declared != indices {
                return Err(Error::InvalidSupport(format!(
                    "facet indices {:?} do not match the points on its hyperplane {:?}",
                    f.indices, indices
                )));
            }
            unit.push(FacetSpec { indices, normal, offset });
        }

        // Close under intersection.
        let mut sets: BTreeMap<Vec<usize>, ()> = BTreeMap::new();
        for f in &unit {
            sets.insert(f.indices.clone(), ());
        }
        let mut frontier: Vec<Vec<usize>> = sets.keys().cloned().collect();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for s in &frontier {
                for f in &unit {
                    let inter: Vec<usize> = s.iter().copied().filter(|i| f.indices.binary_search(i).is_ok()).collect();
                    if !inter.is_empty() && !sets.contains_key(&inter) {
                        sets.insert(inter.clone(), ());
                        next.push(inter);
                    }
                }
            }
            frontier = next;
        }

        let mut faces: Vec<Face> = Vec::new();
        for indices in sets.into_keys() {
            let containing: Vec<usize> = (0..unit.len())
                .filter(|&k| indices.iter().all(|i| unit[k].indices.binary_search(i).is_ok()))
                .collect();
            let diffs: Vec<Vec<f64>> = indices[1..].iter().map(|&i| sub(&pts[i], &pts[indices[0]])).collect();
            let tangent_basis = orthonormal_basis(&diffs, m, 1e-10);
            let mut normal = vec![0.0; m];
            for &k in &containing {
                for (a, b) in normal.iter_mut().zip(&unit[k].normal) {
                    *a += b;
                }
            }
            let len = crate::linalg::norm(&normal);
            normal.iter_mut().for_each(|c| *c /= len);
            let offset = pts.iter().map(|p| dot(p, &normal)).fold(f64::INFINITY, f64::min);
            faces.push(Face { dim: tangent_basis.ncols(), indices, normal, offset, tangent_basis, facets: containing });
        }
        if faces.iter().any(|f| f.dim >= m) {
            return Err(Error::InvalidSupport("a facet is not a proper face".into()));
        }
        faces.push(Face {
            indices: (0..n).collect(),
            normal: vec![0.0; m],
            offset: 0.0,
            dim: m,
            tangent_basis: DMatrix::identity(m, m),
            facets: Vec::new(),
        });
        faces.sort_by(|a, b| a.dim.cmp(&b.dim).then_with(|| a.indices.cmp(&b.indices)));

        // `Face::facets` must point at positions in the sorted list.
        let mut by_indices = BTreeMap::new();
        for (pos, f) in faces.iter().enumerate() {
            by_indices.insert(f.indices.clone(), pos);
        }
        let facet_pos: Vec<usize> = unit.iter().map(|f| by_indices[&f.indices]).collect();
        for f in faces.iter_mut() {
            for k in f.facets.iter_mut() {
                *k = facet_pos[*k];
            }
            f.facets.sort_unstable();
        }
        let mut facet_ids = facet_pos;
        facet_ids.sort_unstable();
        facet_ids.dedup();
        if facet_ids.iter().any(|&k| faces[k].dim + 1 != m) {
            return Err(Error::InvalidSupport("a supplied facet is not (m-1)-dimensional".into()));
        }

        let incidence = (0..faces.len())
            .map(|i| {
                (0..faces.len())
                    .filter(|&j| {
                        j != i
                            && faces[j].indices.len() > faces[i].indices.len()
                            && faces[i].indices.iter().all(|a| faces[j].indices.binary_search(a).is_ok())
                    })
                    .collect()
            })
            .collect();

        Ok(Self { faces, incidence, facet_ids, by_indices, dim: m, n_points: n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of support points the lattice was built for.
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn top(&self) -> &Face {
        self.faces.last().expect("lattice always contains the top face")
    }

    pub fn top_id(&self) -> usize {
        self.faces.len() - 1
    }

    pub fn facet_ids(&self) -> &[usize] {
        &self.facet_ids
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.faces.iter().enumerate().filter(|(_, f)| f.dim == 0).map(|(i, _)| i)
    }

    /// Face whose closure contains exactly the given support points.
    pub fn face_by_indices(&self, indices: &[usize]) -> Option<usize> {
        self.by_indices.get(indices).copied()
    }

    /// Signed distances `⟨x,u⟩ − λ(u)` to every facet, in `facet_ids` order.
    pub fn slacks(&self, x: &[f64]) -> Vec<f64> {
        self.facet_ids.iter().map(|&k| dot(x, &self.faces[k].normal) - self.faces[k].offset).collect()
    }

    /// Smallest facet slack: the distance to `∂P` for points of `P`.
    pub fn min_slack(&self, x: &[f64]) -> f64 {
        self.slacks(x).into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim && self.min_slack(x) >= -TOL_GEOM
    }

    /// The unique relatively open face containing `x`.
    pub fn locate_face(&self, x: &[f64]) -> Result<usize> {
        self.locate_face_with_tol(x, TOL_GEOM)
    }

    /// Point location with a custom membership tolerance.
    pub fn locate_face_with_tol(&self, x: &[f64], tol: f64) -> Result<usize> {
        if x.len() != self.dim {
            return Err(Error::InvalidArgument(format!("point has dimension {}, expected {}", x.len(), self.dim)));
        }
        let slacks = self.slacks(x);
        let min = slacks.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min >= -TOL_GEOM.max(tol)) {
            return Err(Error::OutsidePolytope { distance: min });
        }
        let mut common: Option<Vec<usize>> = None;
        for (s, &k) in slacks.iter().zip(&self.facet_ids) {
            if *s <= tol {
                let idx = &self.faces[k].indices;
                common = Some(match common {
                    None => idx.clone(),
                    Some(c) => c.into_iter().filter(|i| idx.binary_search(i).is_ok()).collect(),
                });
            }
        }
        match common {
            None => Ok(self.top_id()),
            Some(c) => self.face_by_indices(&c).ok_or(Error::OutsidePolytope { distance: min }),
        }
    }

    /// True when `y` lies in the closure of face `face_id`.
    pub fn in_closure(&self, face_id: usize, y: &[f64]) -> bool {
        if !self.contains(y) {
            return false;
        }
        self.faces[face_id].facets.iter().all(|&k| {
            let f = &self.faces[k];
            (dot(y, &f.normal) - f.offset).abs() <= TOL_GEOM
        })
    }

    /// Faces of dimension `dim` contained in the closure of `face_id`.
    pub fn subfaces(&self, face_id: usize, dim: usize) -> Vec<usize> {
        (0..self.faces.len())
            .filter(|&j| self.faces[j].dim == dim && self.incidence[j].contains(&face_id))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice(points: Vec<Vec<f64>>) -> FaceLattice {
        build_face_lattice(&WeightedSupport::uniform(points).unwrap()).unwrap()
    }

    #[test]
    fn interval_has_two_vertices_and_top() {
        let l = lattice(vec![vec![0.0], vec![1.0]]);
        let dims: Vec<usize> = l.faces.iter().map(|f| f.dim).collect();
        assert_eq!(dims, vec![0, 0, 1]);
        assert_eq!(l.faces[l.locate_face(&[0.5]).unwrap()].dim, 1);
        let v = l.locate_face(&[0.0]).unwrap();
        assert_eq!(l.faces[v].indices, vec![0]);
        assert!(l.contains(&[0.5]));
        assert!(!l.contains(&[1.1]));
        assert!(matches!(l.locate_face(&[1.1]), Err(Error::OutsidePolytope { .. })));
    }

    #[test]
    fn triangle_lattice() {
        let l = lattice(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        let count = |d| l.faces.iter().filter(|f| f.dim == d).count();
        assert_eq!((count(0), count(1), count(2)), (3, 3, 1));
        let e = l.locate_face(&[0.5, 0.0]).unwrap();
        assert_eq!(l.faces[e].indices, vec![0, 1]);
        let u = &l.faces[e].normal;
        assert!((u[0]).abs() < 1e-15 && (u[1] - 1.0).abs() < 1e-15);
        assert!(l.contains(&[0.4, 0.4]));
        assert!(l.in_closure(e, &[1.0, 0.0]));
        assert!(!l.in_closure(e, &[0.2, 0.2]));
    }

    #[test]
    fn interior_support_point_is_in_no_proper_face() {
        let l = lattice(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![0.5, 0.5]]);
        for f in l.faces.iter().filter(|f| !f.is_top()) {
            assert!(!f.indices.contains(&4));
        }
        assert_eq!(l.faces.iter().filter(|f| f.dim == 1).count(), 4);
        assert_eq!(l.faces.iter().filter(|f| f.dim == 0).count(), 4);
    }

    #[test]
    fn cube_lattice_counts() {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push(vec![(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64]);
        }
        let l = lattice(pts);
        let count = |d| l.faces.iter().filter(|f| f.dim == d).count();
        assert_eq!((count(0), count(1), count(2), count(3)), (8, 12, 6, 1));
    }

    #[test]
    fn rejects_bad_supports() {
        assert_eq!(WeightedSupport::uniform(vec![vec![0.0, 0.0], vec![1.0, 1.0]]), Err(Error::DegenerateHull));
        assert!(WeightedSupport::new(vec![vec![0.0], vec![1.0]], vec![1.0, 0.0]).is_err());
        assert!(WeightedSupport::uniform(vec![vec![0.0], vec![0.0], vec![1.0]]).is_err());
        let four = WeightedSupport::uniform(
            (0..5).map(|i| (0..4).map(|j| if i == j + 1 { 1.0 } else { 0.0 }).collect()).collect(),
        )
        .unwrap();
        assert_eq!(build_face_lattice(&four), Err(Error::UnsupportedDimension { dim: 4 }));
    }

    #[test]
    fn explicit_facets_in_four_dimensions() {
        let pts: Vec<Vec<f64>> = (0..5).map(|i| (0..4).map(|j| if i == j + 1 { 1.0 } else { 0.0 }).collect()).collect();
        let s = WeightedSupport::uniform(pts).unwrap();
        let mut facets: Vec<FacetSpec> = (0..4)
            .map(|j| {
                let mut normal = vec![0.0; 4];
                normal[j] = 1.0;
                FacetSpec { indices: (0..5).filter(|&i| i != j + 1).collect(), normal, offset: 0.0 }
            })
            .collect();
        facets.push(FacetSpec { indices: vec![1, 2, 3, 4], normal: vec![-1.0; 4], offset: -1.0 });
        let l = FaceLattice::from_facets(&s, facets).unwrap();
        // a 4-simplex has C(5,k+1) faces of dimension k
        let count = |d| l.faces.iter().filter(|f| f.dim == d).count();
        assert_eq!((count(0), count(1), count(2), count(3), count(4)), (5, 10, 10, 5, 1));
    }
}
