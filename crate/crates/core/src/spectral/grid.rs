//! Periodic torus discretization and its frequency lattice.
//!
//! Positions are centered, `x_j = -L/2 + j*dx`, and the frequency lattice is
//! `xi_k = 2*pi*k/L` for signed integers `k` in `[-N/2, N/2)`, stored in FFT
//! order (`k = K` for `K < N/2`, else `K - N`). The discrete transform is
//! normalized so that Parseval holds exactly between the position quadrature
//! weight `dx^dim` and the frequency weight `(2*pi/L)^dim`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Which representation a state's amplitudes are stored in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Position,
    Frequency,
}

impl std::fmt::Display for Representation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Representation::Position => write!(f, "position"),
            Representation::Frequency => write!(f, "frequency"),
        }
    }
}

/// Periodic torus grid in 1 or 2 dimensions with precomputed FFT plans.
pub struct SpectralGrid {
    dim: usize,
    points_per_dim: usize,
    box_length: f64,
    spacing: f64,
    freq_step: f64,
    /// Signed frequency per storage index, FFT order, length `points_per_dim`.
    freqs: Vec<f64>,
    /// Centered position per index, length `points_per_dim`.
    positions: Vec<f64>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("dim", &self.dim)
            .field("points_per_dim", &self.points_per_dim)
            .field("box_length", &self.box_length)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.points_per_dim == other.points_per_dim
            && self.box_length == other.box_length
    }
}

/// Build a grid. `points_per_dim` must be a power of two >= 8; `dim` is 1 or 2.
pub fn make_grid(dim: usize, points_per_dim: usize, box_length: f64) -> Result<Arc<SpectralGrid>> {
    if dim != 1 && dim != 2 {
        return Err(Error::invalid("dim", format!("must be 1 or 2, got {dim}")));
    }
    if points_per_dim < 8 || !points_per_dim.is_power_of_two() {
        return Err(Error::invalid(
            "points_per_dim",
            format!("must be a power of two >= 8, got {points_per_dim}"),
        ));
    }
    if !(box_length > 0.0) || !box_length.is_finite() {
        return Err(Error::invalid(
            "box_length",
            format!("must be positive and finite, got {box_length}"),
        ));
    }
    let n = points_per_dim;
    let spacing = box_length / n as f64;
    let freq_step = 2.0 * PI / box_length;
    let freqs = (0..n)
        .map(|idx| {
            let k = if idx < n / 2 {
                idx as i64
            } else {
                idx as i64 - n as i64
            };
            freq_step * k as f64
        })
        .collect();
    let positions = (0..n)
        .map(|j| -0.5 * box_length + j as f64 * spacing)
        .collect();
    let mut planner = FftPlanner::new();
    let fft_fwd = planner.plan_fft_forward(n);
    let fft_inv = planner.plan_fft_inverse(n);
    Ok(Arc::new(SpectralGrid {
        dim,
        points_per_dim,
        box_length,
        spacing,
        freq_step,
        freqs,
        positions,
        fft_fwd,
        fft_inv,
    }))
}

impl SpectralGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_dim(&self) -> usize {
        self.points_per_dim
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn freq_step(&self) -> f64 {
        self.freq_step
    }

    /// Total number of lattice sites / modes.
    pub fn len(&self) -> usize {
        self.points_per_dim.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight for the given representation.
    pub fn weight(&self, rep: Representation) -> f64 {
        match rep {
            Representation::Position => self.spacing.powi(self.dim as i32),
            Representation::Frequency => self.freq_step.powi(self.dim as i32),
        }
    }

    /// Per-axis storage indices of a flat index.
    #[inline]
    pub fn axis_indices(&self, flat: usize) -> [usize; 2] {
        match self.dim {
            1 => [flat, 0],
            _ => [flat / self.points_per_dim, flat % self.points_per_dim],
        }
    }

    /// Frequency vector of a flat mode index (second component 0 in 1-D).
    #[inline]
    pub fn xi(&self, flat: usize) -> [f64; 2] {
        let [ix, iy] = self.axis_indices(flat);
        match self.dim {
            1 => [self.freqs[ix], 0.0],
            _ => [self.freqs[ix], self.freqs[iy]],
        }
    }

    /// Squared Euclidean norm of the frequency vector at a flat mode index.
    #[inline]
    pub fn xi_norm_sq(&self, flat: usize) -> f64 {
        let [ix, iy] = self.axis_indices(flat);
        match self.dim {
            1 => self.freqs[ix] * self.freqs[ix],
            _ => self.freqs[ix] * self.freqs[ix] + self.freqs[iy] * self.freqs[iy],
        }
    }

    /// Position vector of a flat site index (second component 0 in 1-D).
    #[inline]
    pub fn position(&self, flat: usize) -> [f64; 2] {
        let [ix, iy] = self.axis_indices(flat);
        match self.dim {
            1 => [self.positions[ix], 0.0],
            _ => [self.positions[ix], self.positions[iy]],
        }
    }

    /// True if any axis index sits on the unpaired Nyquist mode `k = -N/2`.
    #[inline]
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let nyq = self.points_per_dim / 2;
        let [ix, iy] = self.axis_indices(flat);
        ix == nyq || (self.dim == 2 && iy == nyq)
    }

    /// Largest `|xi|` over modes with no Nyquist component.
    pub fn max_usable_freq(&self) -> f64 {
        let per_axis = self.freq_step * (self.points_per_dim / 2 - 1) as f64;
        match self.dim {
            1 => per_axis,
            _ => per_axis * std::f64::consts::SQRT_2,
        }
    }

    /// Signed frequency values along one axis, FFT storage order.
    pub fn axis_freqs(&self) -> &[f64] {
        &self.freqs
    }

    /// Centered positions along one axis.
    pub fn axis_positions(&self) -> &[f64] {
        &self.positions
    }

    /// In-place centered unitary-normalized transform, position -> frequency.
    pub(crate) fn forward_inplace(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        debug_assert_eq!(data.len(), self.len());
        self.run_fft(&self.fft_fwd.clone(), data, scratch);
        let scale = (self.spacing / (2.0 * PI).sqrt()).powi(self.dim as i32);
        self.apply_center_phase_and_scale(data, scale);
    }

    /// In-place centered unitary-normalized transform, frequency -> position.
    pub(crate) fn inverse_inplace(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        debug_assert_eq!(data.len(), self.len());
        let scale = (self.freq_step / (2.0 * PI).sqrt()).powi(self.dim as i32);
        self.apply_center_phase_and_scale(data, scale);
        self.run_fft(&self.fft_inv.clone(), data, scratch);
    }

    /// Alternating-sign phase from the centered coordinates, fused with `scale`.
    fn apply_center_phase_and_scale(&self, data: &mut [Complex64], scale: f64) {
        let n = self.points_per_dim;
        match self.dim {
            1 => {
                for (idx, v) in data.iter_mut().enumerate() {
                    let s = if idx % 2 == 0 { scale } else { -scale };
                    *v *= s;
                }
            }
            _ => {
                for ix in 0..n {
                    let row = &mut data[ix * n..(ix + 1) * n];
                    for (iy, v) in row.iter_mut().enumerate() {
                        let s = if (ix + iy) % 2 == 0 { scale } else { -scale };
                        *v *= s;
                    }
                }
            }
        }
    }

    /// Run the 1-D plan along every axis of the flat array.
    fn run_fft(
        &self,
        plan: &Arc<dyn Fft<f64>>,
        data: &mut [Complex64],
        scratch: &mut Vec<Complex64>,
    ) {
        let n = self.points_per_dim;
        let needed = plan.get_inplace_scratch_len();
        if scratch.len() < needed.max(n) {
            scratch.resize(needed.max(n), Complex64::default());
        }
        match self.dim {
            1 => plan.process_with_scratch(data, &mut scratch[..needed]),
            _ => {
                // rows (second axis is contiguous)
                for ix in 0..n {
                    plan.process_with_scratch(
                        &mut data[ix * n..(ix + 1) * n],
                        &mut scratch[..needed],
                    );
                }
                // columns, gathered through a stride buffer
                let mut col = vec![Complex64::default(); n];
                for iy in 0..n {
                    for ix in 0..n {
                        col[ix] = data[ix * n + iy];
                    }
                    plan.process_with_scratch(&mut col, &mut scratch[..needed]);
                    for ix in 0..n {
                        data[ix * n + iy] = col[ix];
                    }
                }
            }
        }
    }
}
