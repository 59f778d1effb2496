//! Band-subspace linear algebra: the orthonormal mode basis restricted to a
//! frequency annulus, matrix-free operator applications, a dense Hermitian
//! eigensolver, and a restarted Lanczos solver with an explicit residual
//! certificate `||A v - lambda v|| <= tol * max(1, |lambda|)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{BandWindow, KineticOperator, Representation, SpectralGrid, WaveFunction};

/// Residual certificate tolerance, absolute on the normalized operator.
pub const EIG_RESIDUAL_TOL: f64 = 1e-10;
/// Largest subspace dimension solved densely under [`Strategy::Auto`].
pub const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Auto,
    Dense,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverPath {
    Dense,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremal {
    Smallest,
    Largest,
}

/// An extremal eigenpair with its explicit residual.
#[derive(Debug, Clone)]
pub struct EigOutcome {
    pub value: f64,
    pub residual: f64,
    pub path: SolverPath,
}

/// Orthonormal basis of band modes `a <= |xi_k| <= R` (Nyquist excluded).
pub struct BandSubspace {
    grid: Arc<SpectralGrid>,
    indices: Vec<usize>,
}

impl BandSubspace {
    pub fn new(grid: Arc<SpectralGrid>, band: &BandWindow) -> Result<Self> {
        band.validate_for(&grid)?;
        let indices = band.mode_indices(&grid);
        Ok(BandSubspace { grid, indices })
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Kinetic multiplier restricted to the band modes.
    pub fn restricted_multiplier(&self, kinetic: &KineticOperator) -> Vec<f64> {
        self.indices.iter().map(|&k| kinetic.multiplier()[k]).collect()
    }

    /// Embed orthonormal coefficients as a frequency-representation state.
    pub fn embed(&self, coeffs: &[Complex64]) -> WaveFunction {
        debug_assert_eq!(coeffs.len(), self.dim());
        let norm = 1.0 / self.grid.weight(Representation::Frequency).sqrt();
        let mut hat = WaveFunction::zeros(self.grid.clone(), Representation::Frequency);
        for (&k, &c) in self.indices.iter().zip(coeffs) {
            hat.amplitudes_mut()[k] = c * norm;
        }
        hat
    }

    /// Read orthonormal coefficients off a frequency-representation state.
    pub fn restrict(&self, hat: &WaveFunction) -> Vec<Complex64> {
        debug_assert_eq!(hat.representation(), Representation::Frequency);
        let norm = self.grid.weight(Representation::Frequency).sqrt();
        self.indices
            .iter()
            .map(|&k| hat.amplitudes()[k] * norm)
            .collect()
    }

    /// `P M_V P` in band coordinates: embed, multiply by the sampled
    /// potential in position space, restrict.
    pub fn apply_potential(&self, v_field: &[f64], coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut state = self.embed(coeffs);
        state.transform_inplace(Representation::Position);
        state.scale_by_real(v_field);
        state.transform_inplace(Representation::Frequency);
        self.restrict(&state)
    }

    /// Dense Hermitian band matrix of the potential quadratic form.
    pub fn potential_matrix(&self, v_field: &[f64]) -> DMatrix<Complex64> {
        let d = self.dim();
        let mut mat = DMatrix::<Complex64>::zeros(d, d);
        let mut unit = vec![Complex64::default(); d];
        for col in 0..d {
            unit[col] = Complex64::new(1.0, 0.0);
            let out = self.apply_potential(v_field, &unit);
            unit[col] = Complex64::default();
            for (row, v) in out.into_iter().enumerate() {
                mat[(row, col)] = v;
            }
        }
        // clean roundoff asymmetry; the operator is Hermitian
        let adj = mat.adjoint();
        (mat + adj) * Complex64::new(0.5, 0.0)
    }
}

/// Extremal eigenpair of a dense Hermitian matrix.
pub fn extremal_eig_dense(mat: DMatrix<Complex64>, which: Extremal) -> Result<EigOutcome> {
    let d = mat.nrows();
    if d == 0 {
        return Err(Error::Eigensolver("empty subspace".into()));
    }
    let mat_copy = mat.clone();
    let eig = nalgebra::SymmetricEigen::new(mat);
    let mut idx = 0usize;
    for i in 1..d {
        let better = match which {
            Extremal::Smallest => eig.eigenvalues[i] < eig.eigenvalues[idx],
            Extremal::Largest => eig.eigenvalues[i] > eig.eigenvalues[idx],
        };
        if better {
            idx = i;
        }
    }
    let value = eig.eigenvalues[idx];
    let vec = eig.eigenvectors.column(idx).into_owned();
    let residual = (&mat_copy * &vec - &vec * Complex64::new(value, 0.0)).norm();
    Ok(EigOutcome {
        value,
        residual,
        path: SolverPath::Dense,
    })
}

/// Restarted fully-reorthogonalized Lanczos for an extremal eigenvalue of a
/// Hermitian operator given as a matrix-free application.
pub fn extremal_eig_lanczos(
    dim: usize,
    apply: &dyn Fn(&[Complex64]) -> Vec<Complex64>,
    which: Extremal,
    seed: u64,
) -> Result<EigOutcome> {
    if dim == 0 {
        return Err(Error::Eigensolver("empty subspace".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v0: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    normalize(&mut v0);

    let sweep = dim.min(120);
    let max_restarts = 60;
    for restart in 0..max_restarts {
        let mut basis: Vec<Vec<Complex64>> = vec![v0.clone()];
        let mut alphas: Vec<f64> = Vec::with_capacity(sweep);
        let mut betas: Vec<f64> = Vec::new();
        let mut exhausted = false;

        for i in 0..sweep {
            let mut w = apply(&basis[i]);
            let alpha = dot(&basis[i], &w).re;
            alphas.push(alpha);
            axpy(&mut w, -Complex64::new(alpha, 0.0), &basis[i]);
            if i > 0 {
                axpy(&mut w, -Complex64::new(betas[i - 1], 0.0), &basis[i - 1]);
            }
            // full reorthogonalization, twice for stability
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    axpy(&mut w, -c, v);
                }
            }
            let beta = norm(&w);
            if basis.len() == dim || beta < 1e-14 {
                exhausted = true;
                break;
            }
            betas.push(beta);
            let inv = 1.0 / beta;
            for x in w.iter_mut() {
                *x *= inv;
            }
            basis.push(w);
        }

        // Ritz extraction from the real symmetric tridiagonal
        let m = alphas.len();
        let mut tri = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            tri[(i, i)] = alphas[i];
            if i + 1 < m {
                tri[(i, i + 1)] = betas[i];
                tri[(i + 1, i)] = betas[i];
            }
        }
        let eig = nalgebra::SymmetricEigen::new(tri);
        let mut idx = 0usize;
        for i in 1..m {
            let better = match which {
                Extremal::Smallest => eig.eigenvalues[i] < eig.eigenvalues[idx],
                Extremal::Largest => eig.eigenvalues[i] > eig.eigenvalues[idx],
            };
            if better {
                idx = i;
            }
        }
        let value = eig.eigenvalues[idx];
        let y: DVector<f64> = eig.eigenvectors.column(idx).into_owned();
        let mut x = vec![Complex64::default(); dim];
        for (v, &yi) in basis.iter().zip(y.iter()) {
            axpy(&mut x, Complex64::new(yi, 0.0), v);
        }
        normalize(&mut x);
        let ax = apply(&x);
        let mut r = ax;
        axpy(&mut r, -Complex64::new(value, 0.0), &x);
        let residual = norm(&r);
        if residual <= EIG_RESIDUAL_TOL * value.abs().max(1.0) || exhausted {
            if residual > EIG_RESIDUAL_TOL * value.abs().max(1.0) {
                return Err(Error::Eigensolver(format!(
                    "Krylov space exhausted at residual {residual:.3e} (restart {restart})"
                )));
            }
            return Ok(EigOutcome {
                value,
                residual,
                path: SolverPath::Iterative,
            });
        }
        v0 = x;
    }
    Err(Error::Eigensolver(format!(
        "no convergence to residual {EIG_RESIDUAL_TOL:.1e} within {max_restarts} restarts"
    )))
}

/// Dispatch between the dense and iterative paths.
pub fn extremal_eig(
    dim: usize,
    dense_matrix: &dyn Fn() -> DMatrix<Complex64>,
    apply: &dyn Fn(&[Complex64]) -> Vec<Complex64>,
    which: Extremal,
    strategy: Strategy,
    seed: u64,
) -> Result<EigOutcome> {
    let dense = match strategy {
        Strategy::Dense => true,
        Strategy::Iterative => false,
        Strategy::Auto => dim <= DENSE_LIMIT,
    };
    if dense {
        extremal_eig_dense(dense_matrix(), which)
    } else {
        extremal_eig_lanczos(dim, apply, which, seed)
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(y: &mut [Complex64], c: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

fn normalize(v: &mut [Complex64]) {
    let n = norm(v);
    if n > 0.0 {
        let inv = 1.0 / n;
        for x in v.iter_mut() {
            *x *= inv;
        }
    }
}
