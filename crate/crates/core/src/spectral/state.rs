//! Complex state vectors, unitary transforms between representations,
//! inner products and norms.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::grid::{Representation, SpectralGrid};

/// A state on a [`SpectralGrid`] in either position or frequency representation.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    grid: Arc<SpectralGrid>,
    rep: Representation,
    amps: Vec<Complex64>,
}

impl WaveFunction {
    /// Wrap raw amplitudes. Length must match the grid.
    pub fn new(
        grid: Arc<SpectralGrid>,
        rep: Representation,
        amps: Vec<Complex64>,
    ) -> Result<Self> {
        if amps.len() != grid.len() {
            return Err(Error::invalid(
                "amplitudes",
                format!("expected {} values, got {}", grid.len(), amps.len()),
            ));
        }
        Ok(WaveFunction { grid, rep, amps })
    }

    /// Zero state in the given representation.
    pub fn zeros(grid: Arc<SpectralGrid>, rep: Representation) -> Self {
        let n = grid.len();
        WaveFunction {
            grid,
            rep,
            amps: vec![Complex64::default(); n],
        }
    }

    /// Build a position-space state by sampling `f` at the grid nodes.
    pub fn from_position_fn(grid: Arc<SpectralGrid>, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let dim = grid.dim();
        let amps = (0..grid.len())
            .map(|j| {
                let p = grid.position(j);
                f(&p[..dim])
            })
            .collect();
        WaveFunction {
            grid,
            rep: Representation::Position,
            amps,
        }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.rep
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn same_grid(&self, other: &WaveFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }

    /// Convert to the target representation; no-op (clone) if already there.
    pub fn transform(&self, target: Representation) -> WaveFunction {
        let mut out = self.clone();
        out.transform_inplace(target);
        out
    }

    /// In-place representation change.
    pub fn transform_inplace(&mut self, target: Representation) {
        let mut scratch = Vec::new();
        self.transform_inplace_with(target, &mut scratch);
    }

    /// In-place representation change reusing a caller-owned scratch buffer.
    pub(crate) fn transform_inplace_with(
        &mut self,
        target: Representation,
        scratch: &mut Vec<Complex64>,
    ) {
        if self.rep == target {
            return;
        }
        match target {
            Representation::Frequency => self.grid.forward_inplace(&mut self.amps, scratch),
            Representation::Position => self.grid.inverse_inplace(&mut self.amps, scratch),
        }
        self.rep = target;
    }

    pub fn to_position(&self) -> WaveFunction {
        self.transform(Representation::Position)
    }

    pub fn to_frequency(&self) -> WaveFunction {
        self.transform(Representation::Frequency)
    }

    /// Discrete L^2 inner product, conjugate-linear in the first slot.
    /// Both states must share grid and representation.
    pub fn inner(&self, other: &WaveFunction) -> Result<Complex64> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        if self.rep != other.rep {
            return Err(Error::RepresentationMismatch {
                expected: self.rep.to_string(),
                found: other.rep.to_string(),
            });
        }
        let w = self.grid.weight(self.rep);
        let mut acc = Complex64::default();
        for (a, b) in self.amps.iter().zip(&other.amps) {
            acc += a.conj() * b;
        }
        Ok(acc * w)
    }

    /// L^2 norm; representation independent up to roundoff.
    pub fn norm_l2(&self) -> f64 {
        let w = self.grid.weight(self.rep);
        let s: f64 = self.amps.iter().map(|a| a.norm_sqr()).sum();
        (s * w).sqrt()
    }

    /// Inhomogeneous Sobolev norm `|| <p>^sigma psi ||_2` with the bracket
    /// multiplier `(1 + |xi|^2)^(sigma/2)`.
    pub fn norm_sobolev(&self, sigma: f64) -> Result<f64> {
        if !(sigma >= 0.0) {
            return Err(Error::invalid(
                "sigma",
                format!("must be >= 0, got {sigma}"),
            ));
        }
        let hat = self.transform(Representation::Frequency);
        let w = hat.grid.weight(Representation::Frequency);
        let mut s = 0.0;
        for (k, a) in hat.amps.iter().enumerate() {
            let bracket = 1.0 + hat.grid.xi_norm_sq(k);
            s += bracket.powf(sigma) * a.norm_sqr();
        }
        Ok((s * w).sqrt())
    }

    /// Discrete L^p norm `(sum |psi_j|^p dx^dim)^(1/p)`, evaluated in position
    /// representation (converting if needed). Requires finite `p >= 2`.
    pub fn norm_lp(&self, p: f64) -> Result<f64> {
        if !(p >= 2.0) || !p.is_finite() {
            return Err(Error::invalid("p", format!("must be finite and >= 2, got {p}")));
        }
        let pos = self.transform(Representation::Position);
        let w = pos.grid.weight(Representation::Position);
        let s: f64 = pos.amps.iter().map(|a| a.norm().powf(p)).sum();
        Ok((s * w).powf(1.0 / p))
    }

    /// Multiply pointwise by a real field in the current representation.
    pub fn scale_by_real(&mut self, field: &[f64]) {
        debug_assert_eq!(field.len(), self.amps.len());
        for (a, &v) in self.amps.iter_mut().zip(field) {
            *a *= v;
        }
    }

    /// Rescale so the L^2 norm is 1. Errors on (near-)zero states.
    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm_l2();
        if !(n > 1e-300) || !n.is_finite() {
            return Err(Error::invalid("state", "cannot normalize a zero state"));
        }
        let inv = 1.0 / n;
        for a in self.amps.iter_mut() {
            *a *= inv;
        }
        Ok(n)
    }
}
