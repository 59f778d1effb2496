//! Annular frequency windows and the band projection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::grid::{Representation, SpectralGrid};
use super::state::WaveFunction;

/// Frequency annulus `a <= |xi| <= R`. Nyquist modes are never eligible,
/// so they keep conjugate symmetry under real-potential multiplication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandWindow {
    pub a: f64,
    pub r: f64,
}

impl BandWindow {
    pub fn new(a: f64, r: f64) -> Result<Self> {
        if !(a > 0.0) || !(r > a) || !r.is_finite() {
            return Err(Error::invalid(
                "band",
                format!("requires 0 < a < R, got a = {a}, R = {r}"),
            ));
        }
        Ok(BandWindow { a, r })
    }

    /// True if the flat mode lies in the annulus and is not a Nyquist mode.
    pub fn contains(&self, grid: &SpectralGrid, flat: usize) -> bool {
        if grid.is_nyquist(flat) {
            return false;
        }
        let m = grid.xi_norm_sq(flat).sqrt();
        self.a <= m && m <= self.r
    }

    /// Flat indices of the eligible modes, ascending.
    pub fn mode_indices(&self, grid: &SpectralGrid) -> Vec<usize> {
        (0..grid.len()).filter(|&k| self.contains(grid, k)).collect()
    }

    /// Check the window against a grid: R within the usable lattice and at
    /// least one eligible mode.
    pub fn validate_for(&self, grid: &SpectralGrid) -> Result<()> {
        if self.r > grid.max_usable_freq() {
            return Err(Error::invalid(
                "band",
                format!(
                    "R = {} exceeds the largest usable lattice frequency {}",
                    self.r,
                    grid.max_usable_freq()
                ),
            ));
        }
        if self.mode_indices(grid).is_empty() {
            return Err(Error::EmptyBand { a: self.a, r: self.r });
        }
        Ok(())
    }
}

/// Zero every frequency coefficient outside the window (and all Nyquist
/// modes). The result is always in frequency representation, which makes
/// repeated application bit-exactly idempotent.
pub fn band_project(psi: &WaveFunction, window: &BandWindow) -> Result<WaveFunction> {
    window.validate_for(psi.grid())?;
    let mut hat = psi.transform(Representation::Frequency);
    let grid = hat.grid().clone();
    for (k, a) in hat.amplitudes_mut().iter_mut().enumerate() {
        if !window.contains(&grid, k) {
            *a = num_complex::Complex64::default();
        }
    }
    Ok(hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::make_grid;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn window_validation() {
        assert!(BandWindow::new(0.0, 1.0).is_err());
        assert!(BandWindow::new(2.0, 1.0).is_err());
        let grid = make_grid(1, 32, 2.0 * PI).unwrap();
        // usable max is 15 on this lattice
        assert!(BandWindow::new(1.0, 20.0).unwrap().validate_for(&grid).is_err());
        // gap between lattice points 3 and 4 contains no mode
        assert!(BandWindow::new(3.2, 3.8).unwrap().validate_for(&grid).is_err());
        assert!(BandWindow::new(0.5, 3.0).unwrap().validate_for(&grid).is_ok());
    }

    #[test]
    fn keeps_inside_zeroes_outside() {
        let grid = make_grid(1, 32, 2.0 * PI).unwrap();
        let w = BandWindow::new(1.5, 4.5).unwrap();
        let mut hat = WaveFunction::zeros(grid.clone(), Representation::Frequency);
        hat.amplitudes_mut()[2] = Complex64::new(0.4, -0.1); // |xi| = 2, inside
        hat.amplitudes_mut()[6] = Complex64::new(1.0, 2.0); // |xi| = 6, outside
        let proj = band_project(&hat, &w).unwrap();
        assert_eq!(proj.amplitudes()[2], Complex64::new(0.4, -0.1));
        assert_eq!(proj.amplitudes()[6], Complex64::default());

        let single_out = {
            let mut h = WaveFunction::zeros(grid.clone(), Representation::Frequency);
            h.amplitudes_mut()[7] = Complex64::new(1.0, 0.0);
            band_project(&h, &w).unwrap()
        };
        assert!(single_out.amplitudes().iter().all(|a| *a == Complex64::default()));
    }

    #[test]
    fn nyquist_mode_is_always_dropped() {
        let grid = make_grid(1, 16, 2.0 * PI).unwrap();
        let w = BandWindow::new(1.0, 7.0).unwrap();
        let mut hat = WaveFunction::zeros(grid.clone(), Representation::Frequency);
        hat.amplitudes_mut()[8] = Complex64::new(1.0, 0.0); // k = -8, |xi| = 8 > R anyway
        let proj = band_project(&hat, &w).unwrap();
        assert_eq!(proj.amplitudes()[8], Complex64::default());
        // the window never reports a Nyquist index as eligible
        assert!(!w.contains(&grid, 8));
    }

    #[test]
    fn projection_is_idempotent_and_orthogonal() {
        let grid = make_grid(1, 64, 11.0).unwrap();
        let w = BandWindow::new(0.8, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let amps: Vec<Complex64> = (0..grid.len())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let psi = WaveFunction::new(grid.clone(), Representation::Frequency, amps).unwrap();
            let p1 = band_project(&psi, &w).unwrap();
            let p2 = band_project(&p1, &w).unwrap();
            assert_eq!(p1.amplitudes(), p2.amplitudes(), "P^2 must equal P bit-exactly");

            // inner(P psi, (1 - P) psi) = 0
            let mut rest = psi.clone();
            for (r, p) in rest.amplitudes_mut().iter_mut().zip(p1.amplitudes()) {
                *r -= p;
            }
            let ip = p1.inner(&rest).unwrap();
            assert!(ip.norm() <= 1e-13 * psi.norm_l2().powi(2));
            // contractive
            assert!(p1.norm_l2() <= psi.norm_l2() * (1.0 + 1e-15));
        }
    }

    #[test]
    fn band_limited_kinetic_expectation_is_pinched() {
        use crate::spectral::kinetic::KineticOperator;
        let grid = make_grid(1, 64, 11.0).unwrap();
        let w = BandWindow::new(0.8, 3.0).unwrap();
        let k = KineticOperator::new(grid.clone(), 0.9, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..50 {
            let amps: Vec<Complex64> = (0..grid.len())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let psi = WaveFunction::new(grid.clone(), Representation::Frequency, amps).unwrap();
            let proj = band_project(&psi, &w).unwrap();
            let n2 = proj.norm_l2().powi(2);
            if n2 < 1e-12 {
                continue;
            }
            let f = k.expectation(&proj).unwrap();
            let lo = w.a.powf(2.0 * k.theta()) * n2;
            let hi = w.r.powf(2.0 * k.theta()) * n2;
            assert!(f >= lo * (1.0 - 1e-12), "{f} < {lo}");
            assert!(f <= hi * (1.0 + 1e-12), "{f} > {hi}");
        }
    }

    #[test]
    fn split_and_bracket_sobolev_norms_agree_on_band_states() {
        // For band-limited states with a >= 1 the two norms differ by at most
        // max(2^{theta/2}, 2^{1/2}).
        use crate::spectral::kinetic::KineticOperator;
        let grid = make_grid(1, 64, 2.0 * PI).unwrap();
        let w = BandWindow::new(1.0, 10.0).unwrap();
        for theta in [0.5, 1.0, 1.5] {
            let k = KineticOperator::new(grid.clone(), theta, 1.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for _ in 0..20 {
                let amps: Vec<Complex64> = (0..grid.len())
                    .map(|_| {
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                    })
                    .collect();
                let psi = WaveFunction::new(grid.clone(), Representation::Frequency, amps).unwrap();
                let proj = band_project(&psi, &w).unwrap();
                let split = (proj.norm_l2().powi(2) + k.expectation(&proj).unwrap()).sqrt();
                let bracket = proj.norm_sobolev(theta).unwrap();
                let factor = (2f64.powf(theta / 2.0)).max(2f64.sqrt());
                assert!(bracket <= factor * split * (1.0 + 1e-12));
                assert!(split <= factor * bracket * (1.0 + 1e-12));
            }
        }
    }
}
