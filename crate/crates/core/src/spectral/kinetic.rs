//! Fractional kinetic operator `p^{2 theta}` as a frequency multiplier.

use std::sync::Arc;

use crate::error::{Error, Result};

use super::grid::{Representation, SpectralGrid};
use super::state::WaveFunction;

/// The multiplier `mu_k = |xi_k|^{2 theta}` together with the mass, so the
/// Hamiltonian kinetic part is `mu / (2m)`.
#[derive(Debug, Clone)]
pub struct KineticOperator {
    grid: Arc<SpectralGrid>,
    theta: f64,
    mass: f64,
    multiplier: Vec<f64>,
}

impl KineticOperator {
    pub fn new(grid: Arc<SpectralGrid>, theta: f64, mass: f64) -> Result<Self> {
        if !(theta >= 0.5) || !theta.is_finite() {
            return Err(Error::invalid("theta", format!("must be >= 1/2, got {theta}")));
        }
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::invalid("mass", format!("must be positive, got {mass}")));
        }
        let multiplier = (0..grid.len())
            .map(|k| grid.xi_norm_sq(k).powf(theta))
            .collect();
        Ok(KineticOperator {
            grid,
            theta,
            mass,
            multiplier,
        })
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `|xi_k|^{2 theta}` per flat mode index.
    pub fn multiplier(&self) -> &[f64] {
        &self.multiplier
    }

    /// Apply `p^{2 theta}` (multiplier action in frequency space); the result
    /// is returned in the input's representation.
    pub fn apply(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        if !std::sync::Arc::ptr_eq(psi.grid(), &self.grid) && **psi.grid() != *self.grid {
            return Err(Error::GridMismatch);
        }
        let original = psi.representation();
        let mut hat = psi.transform(Representation::Frequency);
        for (a, &mu) in hat.amplitudes_mut().iter_mut().zip(&self.multiplier) {
            *a *= mu;
        }
        Ok(hat.transform(original))
    }

    /// `F = (p^{2 theta} psi, psi) = sum mu_k |psi_hat_k|^2 dxi^dim`, the
    /// kinetic quadratic form (not normalized by the state's norm).
    pub fn expectation(&self, psi: &WaveFunction) -> Result<f64> {
        if !std::sync::Arc::ptr_eq(psi.grid(), &self.grid) && **psi.grid() != *self.grid {
            return Err(Error::GridMismatch);
        }
        let hat = psi.transform(Representation::Frequency);
        let w = self.grid.weight(Representation::Frequency);
        let mut s = 0.0;
        for (a, &mu) in hat.amplitudes().iter().zip(&self.multiplier) {
            s += mu * a.norm_sqr();
        }
        Ok(s * w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::make_grid;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn unit_mode(grid: &Arc<SpectralGrid>, idx: usize) -> WaveFunction {
        let mut hat = WaveFunction::zeros(grid.clone(), Representation::Frequency);
        let w = grid.weight(Representation::Frequency);
        hat.amplitudes_mut()[idx] = Complex64::new(1.0 / w.sqrt(), 0.0);
        hat
    }

    #[test]
    fn multiplier_is_nonnegative_and_zero_at_origin() {
        let grid = make_grid(1, 64, 11.0).unwrap();
        let k = KineticOperator::new(grid, 0.75, 1.0).unwrap();
        assert_eq!(k.multiplier()[0], 0.0);
        assert!(k.multiplier().iter().all(|&m| m >= 0.0));
    }

    #[test]
    fn multiplier_is_radially_symmetric() {
        let grid = make_grid(1, 64, 11.0).unwrap();
        let k = KineticOperator::new(grid.clone(), 1.3, 1.0).unwrap();
        let n = grid.points_per_dim();
        for idx in 1..n / 2 {
            let plus = k.multiplier()[idx];
            let minus = k.multiplier()[n - idx];
            assert_eq!(plus, minus, "mode {idx}");
        }
    }

    #[test]
    fn expectation_on_unit_modes() {
        // |xi| = 1, theta = 1 -> F = 1
        let grid = make_grid(1, 32, 2.0 * PI).unwrap();
        let k = KineticOperator::new(grid.clone(), 1.0, 1.0).unwrap();
        let psi = unit_mode(&grid, 1);
        assert!((k.expectation(&psi).unwrap() - 1.0).abs() < 1e-13);

        // |xi| = 2, theta = 3/4 -> F = 2^{3/2}
        let k34 = KineticOperator::new(grid.clone(), 0.75, 1.0).unwrap();
        let psi2 = unit_mode(&grid, 2);
        let f = k34.expectation(&psi2).unwrap();
        assert!((f - 2f64.powf(1.5)).abs() < 1e-13, "{f}");
    }

    #[test]
    fn gaussian_kinetic_expectation_matches_moment_oracle() {
        // psi = pi^{-1/4} exp(-x^2/2), theta = 1:
        // F = integral xi^2 pi^{-1/2} exp(-xi^2) d xi = 1/2.
        let grid = make_grid(1, 1024, 80.0).unwrap();
        let k = KineticOperator::new(grid.clone(), 1.0, 1.0).unwrap();
        let psi = WaveFunction::from_position_fn(grid, |x| {
            Complex64::new(PI.powf(-0.25) * (-x[0] * x[0] / 2.0).exp(), 0.0)
        });
        let f = k.expectation(&psi).unwrap();
        assert!((f - 0.5).abs() < 1e-8, "{f}");
    }

    #[test]
    fn apply_matches_expectation() {
        let grid = make_grid(1, 64, 9.0).unwrap();
        let k = KineticOperator::new(grid.clone(), 0.5, 2.0).unwrap();
        let psi = WaveFunction::from_position_fn(grid, |x| {
            Complex64::new((-x[0] * x[0]).exp(), 0.3 * (-x[0] * x[0] / 2.0).exp())
        });
        let applied = k.apply(&psi).unwrap();
        let via_inner = psi.inner(&applied).unwrap();
        let direct = k.expectation(&psi).unwrap();
        assert!((via_inner.re - direct).abs() < 1e-12 * direct.max(1.0));
        assert!(via_inner.im.abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        let grid = make_grid(1, 32, 1.0).unwrap();
        assert!(KineticOperator::new(grid.clone(), 0.4, 1.0).is_err());
        assert!(KineticOperator::new(grid, 1.0, 0.0).is_err());
    }
}
