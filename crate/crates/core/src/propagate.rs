//! Unitary time evolution by Strang splitting, plus the exact free-evolution
//! multiplier used as an oracle.
//!
//! One step applies `exp(-i dt/2 mu/(2m))` in frequency, `exp(-i dt V(t+dt/2))`
//! in position, then the kinetic half again. Every factor is a unimodular
//! multiplier, so the discrete flow is norm-preserving to roundoff, and the
//! midpoint evaluation of the potential keeps the scheme second order for
//! time-dependent `V`. The step is time-symmetric: stepping with `-dt` from
//! `t + dt` inverts it exactly.

use num_complex::Complex64;

use crate::bounds::{observables, EvolutionRecord, ObservableParams};
use crate::error::{Error, Result};
use crate::potential::PotentialModel;
use crate::quadrature::Trapezoid;
use crate::spectral::{KineticOperator, Representation, WaveFunction};

/// State of an evolution in progress.
#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub current_time: f64,
    pub state: WaveFunction,
    pub dt: f64,
    pub step_count: u64,
}

impl EvolutionState {
    pub fn new(state: WaveFunction, start_time: f64, dt: f64) -> Result<Self> {
        if dt == 0.0 || !dt.is_finite() {
            return Err(Error::invalid("dt", format!("must be nonzero and finite, got {dt}")));
        }
        Ok(EvolutionState {
            current_time: start_time,
            state: state.to_position(),
            dt,
            step_count: 0,
        })
    }
}

/// One Strang step; advances the state from `t` to `t + dt`.
pub fn strang_step(
    st: EvolutionState,
    kinetic: &KineticOperator,
    potential: &PotentialModel,
) -> Result<EvolutionState> {
    let mut stepper = Stepper::new(kinetic, st.dt);
    let mut st = st;
    stepper.advance(&mut st, potential);
    Ok(st)
}

/// Exact free evolution `exp(-i dt mu/(2m))` applied as a frequency
/// multiplier; returns the state in its original representation.
pub fn free_propagate_exact(
    psi: &WaveFunction,
    kinetic: &KineticOperator,
    dt: f64,
) -> Result<WaveFunction> {
    if dt == 0.0 {
        return Ok(psi.clone());
    }
    let original = psi.representation();
    let mut hat = psi.transform(Representation::Frequency);
    let scale = dt / (2.0 * kinetic.mass());
    for (a, &mu) in hat.amplitudes_mut().iter_mut().zip(kinetic.multiplier()) {
        *a *= Complex64::cis(-scale * mu);
    }
    Ok(hat.transform(original))
}

/// Evolve `phi_s` from `s` to `horizon_end`, sampling observables every
/// `sample_stride` steps (plus the initial and final times). `dt` must divide
/// `horizon_end - s` to within roundoff.
pub fn evolve(
    phi_s: &WaveFunction,
    kinetic: &KineticOperator,
    potential: &PotentialModel,
    s: f64,
    horizon_end: f64,
    dt: f64,
    sample_stride: usize,
    params: &ObservableParams,
) -> Result<EvolutionRecord> {
    if horizon_end < s {
        return Err(Error::invalid("horizon", format!("end {horizon_end} precedes start {s}")));
    }
    if sample_stride == 0 {
        return Err(Error::invalid("sample_stride", "must be >= 1"));
    }
    let span = horizon_end - s;
    let n_steps = if span == 0.0 {
        0
    } else {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
        }
        let steps = (span / dt).round();
        if steps < 1.0 || ((steps * dt - span) / span).abs() > 1e-9 {
            return Err(Error::invalid(
                "dt",
                format!("dt = {dt} does not divide the horizon {span} within roundoff"),
            ));
        }
        steps as u64
    };

    let mut record = EvolutionRecord::new(params);
    record.set_initial_state(phi_s.clone());
    let mut st = EvolutionState::new(phi_s.clone(), s, if n_steps == 0 { 1.0 } else { dt })?;
    let mut quad = Trapezoid::new();
    let time_dependent = !potential.is_static();
    let mut pv = if time_dependent {
        potential_dt_expectation(&st.state, s, potential)
    } else {
        0.0
    };
    quad.push(s, pv);

    let row0 = observables(&st.state, s, kinetic, potential, params)?;
    record.push(s, row0, quad.total());

    let mut stepper = Stepper::new(kinetic, dt);
    for step in 1..=n_steps {
        stepper.advance(&mut st, potential);
        // trapezoid of (dV/dt u, u) at step resolution feeds the identity check
        if time_dependent {
            pv = potential_dt_expectation(&st.state, st.current_time, potential);
        }
        quad.push(st.current_time, pv);
        if step % sample_stride as u64 == 0 || step == n_steps {
            let row = observables(&st.state, st.current_time, kinetic, potential, params)?;
            if !row.l2.is_finite() {
                return Err(Error::NonFinite {
                    context: "state amplitudes diverged; dt is too large for this potential"
                        .into(),
                    time: st.current_time,
                });
            }
            record.push(st.current_time, row, quad.total());
        }
    }
    record.set_final_state(st.state);
    Ok(record)
}

/// `(dV/dt(t) u, u)` for a position-representation state.
pub fn potential_dt_expectation(u: &WaveFunction, t: f64, potential: &PotentialModel) -> f64 {
    let pos = u.to_position();
    let grid = pos.grid();
    let w = grid.weight(Representation::Position);
    let dim = grid.dim();
    let mut acc = 0.0;
    for (j, a) in pos.amplitudes().iter().enumerate() {
        let p = grid.position(j);
        acc += potential.dt_value(t, &p[..dim]) * a.norm_sqr();
    }
    acc * w
}

/// Reusable stepping context: cached kinetic half-step phases and buffers.
struct Stepper {
    kin_half: Vec<Complex64>,
    v_field: Vec<f64>,
    scratch: Vec<Complex64>,
    dt: f64,
}

impl Stepper {
    fn new(kinetic: &KineticOperator, dt: f64) -> Self {
        let scale = 0.5 * dt / (2.0 * kinetic.mass());
        let kin_half = kinetic
            .multiplier()
            .iter()
            .map(|&mu| Complex64::cis(-scale * mu))
            .collect();
        Stepper {
            kin_half,
            v_field: vec![0.0; kinetic.grid().len()],
            scratch: Vec::new(),
            dt,
        }
    }

    fn advance(&mut self, st: &mut EvolutionState, potential: &PotentialModel) {
        debug_assert_eq!(st.dt, self.dt);
        let grid = st.state.grid().clone();
        let t_mid = st.current_time + 0.5 * self.dt;
        let dim = grid.dim();
        for (j, v) in self.v_field.iter_mut().enumerate() {
            let p = grid.position(j);
            *v = potential.value(t_mid, &p[..dim]);
        }

        st.state
            .transform_inplace_with(Representation::Frequency, &mut self.scratch);
        for (a, ph) in st.state.amplitudes_mut().iter_mut().zip(&self.kin_half) {
            *a *= ph;
        }
        st.state
            .transform_inplace_with(Representation::Position, &mut self.scratch);
        for (a, &v) in st.state.amplitudes_mut().iter_mut().zip(&self.v_field) {
            *a *= Complex64::cis(-self.dt * v);
        }
        st.state
            .transform_inplace_with(Representation::Frequency, &mut self.scratch);
        for (a, ph) in st.state.amplitudes_mut().iter_mut().zip(&self.kin_half) {
            *a *= ph;
        }
        st.state
            .transform_inplace_with(Representation::Position, &mut self.scratch);

        st.step_count += 1;
        st.current_time += self.dt;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{moving_bump, uniform, DriftProfile, PotentialModel};
    use crate::spectral::{make_grid, KineticOperator, SpectralGrid};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn gaussian_state(grid: &Arc<SpectralGrid>, sigma: f64, carrier: f64) -> WaveFunction {
        let mut psi = WaveFunction::from_position_fn(grid.clone(), |x| {
            Complex64::from_polar(
                (-x[0] * x[0] / (2.0 * sigma * sigma)).exp(),
                carrier * x[0],
            )
        });
        psi.normalize().unwrap();
        psi
    }

    fn bump() -> PotentialModel {
        moving_bump(0.1, 1.0, DriftProfile::arctan(vec![1.0]).unwrap()).unwrap()
    }

    fn max_amp_diff(a: &WaveFunction, b: &WaveFunction) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn free_step_matches_exact_multiplier() {
        let grid = make_grid(1, 128, 20.0).unwrap();
        let k = KineticOperator::new(grid.clone(), 1.0, 0.5).unwrap();
        let psi = gaussian_state(&grid, 1.0, 1.5);
        let st = EvolutionState::new(psi.clone(), 0.0, 1e-2).unwrap();
        let stepped = strang_step(st, &k, &uniform(0.0).unwrap()).unwrap();
        let exact = free_propagate_exact(&psi, &k, 1e-2).unwrap();
        assert!(max_amp_diff(&stepped.state, &exact) < 1e-14);
    }

    #[test]
    fn free_propagate_identity_and_phase() {
        let grid = make_grid(1, 32, 2.0 * PI).unwrap();
        let k = KineticOperator::new(grid.clone(), 1.0, 0.5).unwrap();
        let psi = gaussian_state(&grid, 1.0, 0.0);
        let same = free_propagate_exact(&psi, &k, 0.0).unwrap();
        assert_eq!(psi.amplitudes(), same.amplitudes());

        // single mode |xi| = 1, theta = 1, m = 1/2, dt = pi: phase exp(-i pi) = -1
        let mut hat = WaveFunction::zeros(grid.clone(), Representation::Frequency);
        hat.amplitudes_mut()[1] = Complex64::new(1.0, 0.0);
        let rotated = free_propagate_exact(&hat, &k, PI).unwrap();
        assert!((rotated.amplitudes()[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn gaussian_spreading_matches_analytic_variance() {
        // free theta = 1 evolution of exp(-x^2/(2 s0^2)):
        // Var_{|u|^2}(t) = s0^2/2 + t^2/(2 s0^2 m^2)
        let grid = make_grid(1, 512, 60.0).unwrap();
        let mass = 1.0;
        let k = KineticOperator::new(grid.clone(), 1.0, mass).unwrap();
        let s0 = 1.3;
        let psi = gaussian_state(&grid, s0, 0.0);
        let t = 2.0;
        let evolved = free_propagate_exact(&psi, &k, t).unwrap();
        let w = grid.weight(Representation::Position);
        let var: f64 = evolved
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(j, a)| {
                let x = grid.position(j)[0];
                x * x * a.norm_sqr()
            })
            .sum::<f64>()
            * w;
        let expect = s0 * s0 / 2.0 + t * t / (2.0 * s0 * s0 * mass * mass);
        assert!((var - expect).abs() < 1e-8, "{var} vs {expect}");
    }

    #[test]
    fn local_error_is_third_order_for_static_potential() {
        let grid = make_grid(1, 128, 20.0).unwrap();
        let k = KineticOperator::new(grid.clone(), 1.0, 0.5).unwrap();
        let v = crate::potential::inverse_power_regularized(0.5, 1.0, 1.0).unwrap();
        let psi = gaussian_state(&grid, 1.0, 1.0);
        let local_err = |dt: f64| -> f64 {
            let full = strang_step(EvolutionState::new(psi.clone(), 0.0, dt).unwrap(), &k, &v)
                .unwrap()
                .state;
            let half1 = strang_step(
                EvolutionState::new(psi.clone(), 0.0, dt / 2.0).unwrap(),
                &k,
                &v,
            )
            .unwrap();
            let half2 = strang_step(half1, &k, &v).unwrap().state;
            max_amp_diff(&full, &half2)
        };
        let e1 = local_err(2e-2);
        let e2 = local_err(1e-2);
        let ratio = e1 / e2;
        assert!((6.0..10.0).contains(&ratio), "local order ratio {ratio}");
    }

    #[test]
    fn self_convergence_is_second_order() {
        let grid = make_grid(1, 128, 20.0).unwrap();
        let k = KineticOperator::new(grid.clone(), 1.0, 0.5).unwrap();
        let v = bump();
        let psi = gaussian_state(&grid, 1.0, 1.5);
        let params = ObservableParams::new(None, vec![]);
        let run = |dt: f64| -> WaveFunction {
            evolve(&psi, &k, &v, 0.0, 1.0, dt, usize::MAX, &params)
                .unwrap()
                .final_state
                .unwrap()
        };
        let u1 = run(2e-2);
        let u2 = run(1e-2);
        let u3 = run(5e-3);
        let d12 = max_amp_diff(&u1, &u2);
        let d23 = max_amp_diff(&u2, &u3);
        let ratio = d12 / d23;
        assert!((3.6..=4.4).contains(&ratio), "convergence ratio {ratio}");
    }

    #[test]
    fn evolution_is_time_reversible() {
        let grid = make_grid(1, 128, 20.0).unwrap();
        let k = KineticOperator::new(grid.clone(), 1.0, 0.5).unwrap();
        let v = bump();
        let psi = gaussian_state(&grid, 1.0, 1.0);
        let dt = 1e-2;
        let steps = 100;
        let mut st = EvolutionState::new(psi.clone(), 0.0, dt).unwrap();
        for _ in 0..steps {
            st = strang_step(st, &k, &v).unwrap();
        }
        let mut back = EvolutionState::new(st.state, st.current_time, -dt).unwrap();
        for _ in 0..steps {
            back = strang_step(back, &k, &v).unwrap();
        }
        assert!(back.current_time.abs() < 1e-12);
        assert!(max_amp_diff(&back.state, &psi) < 1e-10);
    }

    #[test]
    fn segmented_evolution_composes() {
        let grid = make_grid(1, 64, 20.0).unwrap();
        let k = KineticOperator::new(grid.clone(), 1.0, 0.5).unwrap();
        let v = bump();
        let psi = gaussian_state(&grid, 1.2, 0.7);
        let params = ObservableParams::new(None, vec![]);
        let whole = evolve(&psi, &k, &v, 0.0, 2.0, 1e-2, usize::MAX, &params)
            .unwrap()
            .final_state
            .unwrap();
        let mid = evolve(&psi, &k, &v, 0.0, 0.8, 1e-2, usize::MAX, &params)
            .unwrap()
            .final_state
            .unwrap();
        let joined = evolve(&mid, &k, &v, 0.8, 2.0, 1e-2, usize::MAX, &params)
            .unwrap()
            .final_state
            .unwrap();
        assert!(max_amp_diff(&whole, &joined) < 1e-12);
    }

    #[test]
    fn zero_duration_evolve_is_identity() {
        let grid = make_grid(1, 64, 20.0).unwrap();
        let k = KineticOperator::new(grid.clone(), 1.0, 0.5).unwrap();
        let v = bump();
        let psi = gaussian_state(&grid, 1.0, 0.0);
        let rec = evolve(&psi, &k, &v, 0.0, 0.0, 1e-2, 1, &ObservableParams::new(None, vec![]))
            .unwrap();
        assert_eq!(rec.len(), 1);
        assert_eq!(
            rec.final_state.unwrap().amplitudes(),
            psi.to_position().amplitudes()
        );
    }

    #[test]
    fn norm_is_conserved_over_many_steps() {
        let grid = make_grid(1, 64, 20.0).unwrap();
        let k = KineticOperator::new(grid.clone(), 1.0, 0.5).unwrap();
        let v = bump();
        let psi = gaussian_state(&grid, 1.0, 1.0);
        let n0 = psi.norm_l2();
        let mut st = EvolutionState::new(psi, 0.0, 1e-3).unwrap();
        for _ in 0..10_000 {
            st = strang_step(st, &k, &v).unwrap();
        }
        let drift = (st.state.norm_l2() / n0 - 1.0).abs();
        assert!(drift <= 1e-11, "norm drift {drift}");
    }

    #[test]
    fn evolve_with_zero_potential_matches_exact_oracle() {
        for theta in [0.5, 0.75, 1.0, 1.5] {
            let grid = make_grid(1, 128, 20.0).unwrap();
            let k = KineticOperator::new(grid.clone(), theta, 0.5).unwrap();
            let v = uniform(0.0).unwrap();
            let psi = gaussian_state(&grid, 1.0, 1.0);
            let rec = evolve(
                &psi,
                &k,
                &v,
                0.0,
                2.0,
                1e-2,
                usize::MAX,
                &ObservableParams::new(None, vec![]),
            )
            .unwrap();
            let exact = free_propagate_exact(&psi, &k, 2.0).unwrap();
            let diff = max_amp_diff(&rec.final_state.unwrap(), &exact);
            assert!(diff <= 1e-12, "theta = {theta}: {diff}");
        }
    }

    #[test]
    fn evolve_validates_inputs() {
        let grid = make_grid(1, 32, 10.0).unwrap();
        let k = KineticOperator::new(grid.clone(), 1.0, 0.5).unwrap();
        let v = uniform(0.0).unwrap();
        let psi = gaussian_state(&grid, 1.0, 0.0);
        let params = ObservableParams::new(None, vec![]);
        assert!(evolve(&psi, &k, &v, 0.0, -1.0, 1e-2, 1, &params).is_err());
        assert!(evolve(&psi, &k, &v, 0.0, 1.0, 3e-1, 1, &params).is_err());
        assert!(evolve(&psi, &k, &v, 0.0, 1.0, 1e-2, 0, &params).is_err());
    }
}
