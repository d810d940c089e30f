//! The finitely supported Bernstein measure generated by `(S, c)`.
//!
//! For `τ ∈ ℝ^m` the moment map is the softmax mean
//! `μ(τ) = Σ_α c(α)e^{⟨α,τ⟩} α / χ(τ)` with `χ(τ) = Σ_α c(α)e^{⟨α,τ⟩}`.
//! Its inverse at `x ∈ P°` is the minimizer of the strictly convex function
//! `F(τ) = log χ(τ) − ⟨x,τ⟩`, whose minimum value is the Legendre potential
//! `δ(x)`. On a proper face `K` the same construction is carried out in the
//! tangent coordinates of `X_K` using only the support points `S_K`; this is
//! how boundary values of the masses and of `δ` are evaluated.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::linalg::{dot, log_sum_exp, spd_solve};
use crate::polytope::{build_face_lattice, FaceLattice, WeightedSupport};
use crate::{Error, Result};

/// Largest change of any logit in one Newton step.
const MAX_LOGIT_STEP: f64 = 20.0;

/// Points this close to `∂P` fall back to face-restricted evaluation when the
/// full-dimensional Newton solve fails.
pub const INTERIOR_THRESHOLD: f64 = 1e-8;

/// Damped Newton configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Stop when the gradient `|μ(τ) − x|∞` drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Smallest step fraction tried by the backtracking line search.
    pub min_step: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 200, min_step: 1e-12 }
    }
}

/// A finitely supported probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    pub atoms: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn barycenter(&self) -> Vec<f64> {
        let dim = self.atoms.first().map_or(0, |a| a.len());
        let mut b = vec![0.0; dim];
        for (a, &w) in self.atoms.iter().zip(&self.masses) {
            for (bi, ai) in b.iter_mut().zip(a) {
                *bi += w * ai;
            }
        }
        b
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.atoms.iter().zip(&self.masses).filter(|(_, &w)| w != 0.0).map(|(a, &w)| w * f(a)).sum()
    }
}

/// `A(x) = Σ m_α(x)(α−x)⊗(α−x)` and, on `P°`, its inverse `K(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrices {
    pub a: DMatrix<f64>,
    pub k: Option<DMatrix<f64>>,
}

/// Everything known about `x` after solving on its face.
#[derive(Debug, Clone)]
pub(crate) struct FaceSolution {
    pub face: usize,
    /// Coordinates of `τ_K(x)` in the face's tangent basis.
    pub xi: Vec<f64>,
    /// `τ_K(x)` embedded in `ℝ^m`.
    pub tau: Vec<f64>,
    /// `m_α(x)` for every support point (zero off `S_K`).
    pub masses: Vec<f64>,
    /// `δ_K(x)`.
    pub delta: f64,
}

/// Minimizes `ξ ↦ log Σ_α exp(ℓ_α + ⟨a_α, ξ⟩) − ⟨t, ξ⟩` over `ℝ^k`.
pub(crate) struct SoftmaxProblem {
    pub coords: Vec<Vec<f64>>,
    pub logits: Vec<f64>,
    pub target: Vec<f64>,
}

pub(crate) struct SoftmaxMinimum {
    pub xi: Vec<f64>,
    pub value: f64,
    pub weights: Vec<f64>,
}

impl SoftmaxProblem {
    fn eval(&self, xi: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let k = self.target.len();
        let z: Vec<f64> = self.coords.iter().zip(&self.logits).map(|(a, l)| l + dot(a, xi)).collect();
        let lse = log_sum_exp(&z);
        let weights: Vec<f64> = z.iter().map(|v| libm::exp(v - lse)).collect();
        let mut grad = vec![0.0; k];
        for (a, w) in self.coords.iter().zip(&weights) {
            for (g, ai) in grad.iter_mut().zip(a) {
                *g += w * ai;
            }
        }
        for (g, t) in grad.iter_mut().zip(&self.target) {
            *g -= t;
        }
        (lse - dot(&self.target, xi), grad, weights)
    }

    fn hessian(&self, weights: &[f64]) -> DMatrix<f64> {
        let k = self.target.len();
        let mut mean = vec![0.0; k];
        for (a, w) in self.coords.iter().zip(weights) {
            for (m, ai) in mean.iter_mut().zip(a) {
                *m += w * ai;
            }
        }
        let mut h = DMatrix::zeros(k, k);
        for (a, w) in self.coords.iter().zip(weights) {
            for i in 0..k {
                let di = a[i] - mean[i];
                for j in 0..=i {
                    h[(i, j)] += w * di * (a[j] - mean[j]);
                }
            }
        }
        for i in 0..k {
            for j in 0..i {
                h[(j, i)] = h[(i, j)];
            }
        }
        h
    }

    fn newton_step(&self, grad: &[f64], weights: &[f64]) -> Option<Vec<f64>> {
        let h = self.hessian(weights);
        let rhs = DVector::from_iterator(grad.len(), grad.iter().map(|g| -g));
        spd_solve(&h, &rhs).map(|d| d.iter().copied().collect())
    }

    pub fn minimize(&self, cfg: &NewtonConfig) -> Result<SoftmaxMinimum> {
        let k = self.target.len();
        let mut xi = vec![0.0; k];
        let (mut f, mut grad, mut weights) = self.eval(&xi);
        if k == 0 {
            return Ok(SoftmaxMinimum { xi, value: f, weights });
        }
        let sup = |g: &[f64]| g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for _ in 0..cfg.max_iter {
            let gnorm = sup(&grad);
            if gnorm <= cfg.tol {
                // One extra full step usually lands at machine precision.
                if let Some(d) = self.newton_step(&grad, &weights) {
                    let cand: Vec<f64> = xi.iter().zip(&d).map(|(a, b)| a + b).collect();
                    let (f2, g2, w2) = self.eval(&cand);
                    if sup(&g2) < gnorm {
                        return Ok(SoftmaxMinimum { xi: cand, value: f2, weights: w2 });
                    }
                }
                return Ok(SoftmaxMinimum { xi, value: f, weights });
            }
            let mut d = self.newton_step(&grad, &weights).ok_or(Error::NoConvergence {
                iterations: 0,
                residual: gnorm,
            })?;
            // a flat corner of the softmax gives huge Newton steps; limit the logit change
            let shifts = self.coords.iter().map(|a| dot(a, &d));
            let (lo, hi) = shifts.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
            let spread = hi - lo;
            if spread > MAX_LOGIT_STEP {
                d.iter_mut().for_each(|v| *v *= MAX_LOGIT_STEP / spread);
            }
            let slope = dot(&grad, &d);
            let mut t = 1.0;
            let mut accepted = false;
            while t >= cfg.min_step {
                let cand: Vec<f64> = xi.iter().zip(&d).map(|(a, b)| a + t * b).collect();
                let (f2, g2, w2) = self.eval(&cand);
                // f is a difference of two terms of size about |⟨t, ξ⟩|
                let slack = 8.0 * f64::EPSILON * (1.0 + f.abs() + dot(&self.target, &xi).abs());
                let armijo = f2 <= f + 1e-4 * t * slope + slack;
                // near the optimum f stalls at rounding level while g still shrinks
                let stalled = f2 <= f + slack && sup(&g2) < 0.5 * gnorm;
                if f2.is_finite() && (armijo || stalled) {
                    xi = cand;
                    f = f2;
                    grad = g2;
                    weights = w2;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                return Err(Error::NoConvergence { iterations: cfg.max_iter, residual: gnorm });
            }
        }
        let residual = sup(&grad);
        if residual <= cfg.tol {
            return Ok(SoftmaxMinimum { xi, value: f, weights });
        }
        Err(Error::NoConvergence { iterations: cfg.max_iter, residual })
    }
}

/// `(S, c)` together with its face lattice and solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpFamily {
    support: WeightedSupport,
    lattice: FaceLattice,
    log_weights: Vec<f64>,
    newton: NewtonConfig,
}

impl ExpFamily {
    /// Builds the face lattice automatically (`dim <= 3`).
    pub fn new(support: WeightedSupport) -> Result<Self> {
        let lattice = build_face_lattice(&support)?;
        Self::with_lattice(support, lattice)
    }

    pub fn with_lattice(support: WeightedSupport, lattice: FaceLattice) -> Result<Self> {
        if lattice.dim() != support.dim() || lattice.n_points() != support.len() {
            return Err(Error::InvalidSupport("face lattice does not belong to this support".into()));
        }
        let log_weights = support.weights().iter().map(|&c| libm::log(c)).collect();
        Ok(Self { support, lattice, log_weights, newton: NewtonConfig::default() })
    }

    pub fn with_newton(mut self, newton: NewtonConfig) -> Self {
        self.newton = newton;
        self
    }

    pub fn support(&self) -> &WeightedSupport {
        &self.support
    }

    pub fn lattice(&self) -> &FaceLattice {
        &self.lattice
    }

    pub fn newton(&self) -> &NewtonConfig {
        &self.newton
    }

    pub fn dim(&self) -> usize {
        self.support.dim()
    }

    /// `log χ_{S,c}(τ)`.
    pub fn log_partition(&self, tau: &[f64]) -> f64 {
        let z: Vec<f64> = self.support.points().iter().zip(&self.log_weights).map(|(a, l)| l + dot(a, tau)).collect();
        log_sum_exp(&z)
    }

    /// `μ_{S,c}(τ)`, evaluated with the max-shift trick.
    pub fn moment_map(&self, tau: &[f64]) -> Vec<f64> {
        let pts = self.support.points();
        let z: Vec<f64> = pts.iter().zip(&self.log_weights).map(|(a, l)| l + dot(a, tau)).collect();
        let lse = log_sum_exp(&z);
        let mut mu = vec![0.0; self.dim()];
        for (a, zi) in pts.iter().zip(&z) {
            let w = libm::exp(zi - lse);
            for (m, ai) in mu.iter_mut().zip(a) {
                *m += w * ai;
            }
        }
        mu
    }

    /// `τ_{S,c}(x)` for `x ∈ P°`.
    pub fn inverse_moment_map(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_inside(x)?;
        Ok(self.solve_on_face(self.lattice.top_id(), x)?.tau)
    }

    /// `τ_K(x)` in the tangent coordinates of face `face_id`.
    pub fn inverse_moment_map_on_face(&self, face_id: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.check_inside(x)?;
        if face_id >= self.lattice.faces.len() {
            return Err(Error::InvalidArgument(format!("no face with id {face_id}")));
        }
        Ok(self.solve_on_face(face_id, x)?.xi)
    }

    /// `B_{S,c}(x) = Σ m_α(x) δ_α`; atoms are listed in support order.
    pub fn measure_at(&self, x: &[f64]) -> Result<DiscreteMeasure> {
        let sol = self.solve(x)?;
        Ok(DiscreteMeasure { atoms: self.support.points().to_vec(), masses: sol.masses })
    }

    /// `δ_{S,c}(x)`, or `δ_K(x)` when `x` lies in a proper face `K`.
    pub fn legendre_delta(&self, x: &[f64]) -> Result<f64> {
        Ok(self.solve(x)?.delta)
    }

    pub fn moment_matrices(&self, x: &[f64]) -> Result<MomentMatrices> {
        let sol = self.solve(x)?;
        let m = self.dim();
        let mut a = DMatrix::zeros(m, m);
        for (alpha, &w) in self.support.points().iter().zip(&sol.masses) {
            if w == 0.0 {
                continue;
            }
            for i in 0..m {
                let di = alpha[i] - x[i];
                for j in 0..=i {
                    a[(i, j)] += w * di * (alpha[j] - x[j]);
                }
            }
        }
        a.fill_upper_triangle_with_lower_triangle();
        let k = if self.lattice.faces[sol.face].is_top() {
            a.clone().cholesky().map(|c| {
                let inv = c.inverse();
                (&inv + inv.transpose()) * 0.5
            })
        } else {
            None
        };
        Ok(MomentMatrices { a, k })
    }

    fn check_inside(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::InvalidArgument(format!("point has dimension {}, expected {}", x.len(), self.dim())));
        }
        let min = self.lattice.min_slack(x);
        if min < -crate::TOL_GEOM || min.is_nan() {
            return Err(Error::OutsidePolytope { distance: min });
        }
        Ok(())
    }

    /// Locates `x` and solves on its face, falling back to the face picked out
    /// by [`INTERIOR_THRESHOLD`] when Newton fails right next to `∂P`.
    pub(crate) fn solve(&self, x: &[f64]) -> Result<FaceSolution> {
        let face = self.lattice.locate_face(x)?;
        match self.solve_on_face(face, x) {
            Err(Error::NoConvergence { .. }) if self.lattice.min_slack(x) <= INTERIOR_THRESHOLD => {
                let near = self.lattice.locate_face_with_tol(x, INTERIOR_THRESHOLD)?;
                self.solve_on_face(near, x)
            }
            other => other,
        }
    }

    pub(crate) fn solve_on_face(&self, face_id: usize, x: &[f64]) -> Result<FaceSolution> {
        let face = &self.lattice.faces[face_id];
        let basis = &face.tangent_basis;
        let project = |p: &[f64]| -> Vec<f64> {
            (0..basis.ncols()).map(|j| basis.column(j).iter().zip(p).map(|(b, c)| b * c).sum()).collect()
        };
        let pts = self.support.points();
        let problem = SoftmaxProblem {
            coords: face.indices.iter().map(|&i| project(&pts[i])).collect(),
            logits: face.indices.iter().map(|&i| self.log_weights[i]).collect(),
            target: project(x),
        };
        let min = problem.minimize(&self.newton)?;
        let mut masses = vec![0.0; pts.len()];
        for (&i, &w) in face.indices.iter().zip(&min.weights) {
            masses[i] = w;
        }
        let tau: Vec<f64> = (0..self.dim())
            .map(|r| (0..basis.ncols()).map(|j| basis[(r, j)] * min.xi[j]).sum())
            .collect();
        // Recompute δ in ambient coordinates so that x need not lie exactly on the face.
        let z: Vec<f64> = face.indices.iter().map(|&i| self.log_weights[i] + dot(&pts[i], &tau)).collect();
        let delta = log_sum_exp(&z) - dot(x, &tau);
        Ok(FaceSolution { face: face_id, xi: min.xi, tau, masses, delta })
    }
}
