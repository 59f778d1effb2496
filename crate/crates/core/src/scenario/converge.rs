//! Self-convergence study over a dt ladder, validating the discretization
//! that feeds every theorem check.

use serde::Serialize;

use crate::assumptions::estimate_hardy;
use crate::bounds::{identity_residual, ObservableParams};
use crate::error::{Error, Result};
use crate::propagate::evolve;
use crate::spectral::WaveFunction;

use super::config::ScenarioConfig;

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRung {
    pub dt: f64,
    /// L^2 distance between this rung's terminal state and the next finer one.
    pub terminal_diff: Option<f64>,
    pub max_residual: Option<f64>,
    /// `log2(diff_i / diff_{i+1})`.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStudy {
    pub rungs: Vec<ConvergenceRung>,
    /// Least-squares slope of `ln diff` against `ln dt`.
    pub fitted_order: Option<f64>,
    pub residual_tolerance: f64,
    pub recommended_dt: Option<f64>,
    pub warnings: Vec<String>,
}

/// Evolve the scenario at every dt in the ladder (each entry half the
/// previous) and fit the observed convergence order.
pub fn convergence_study(
    cfg: &ScenarioConfig,
    ladder: &[f64],
    residual_tol: f64,
) -> Result<ConvergenceStudy> {
    if ladder.len() < 3 {
        return Err(Error::invalid("ladder", "need at least 3 dt entries"));
    }
    for w in ladder.windows(2) {
        let ratio = w[1] / w[0];
        if !(0.49..=0.51).contains(&ratio) {
            return Err(Error::invalid(
                "ladder",
                format!("entries must halve dt; got ratio {ratio} between {} and {}", w[0], w[1]),
            ));
        }
    }

    let grid = cfg.build_grid()?;
    let kinetic = cfg.build_kinetic(&grid)?;
    let potential = cfg.build_potential()?;
    let phi = cfg.build_initial_state(&grid)?;
    let s = cfg.dynamics.s;
    let t_end = cfg.dynamics.t_end;

    let c_hardy = estimate_hardy(
        &kinetic,
        &potential,
        s,
        &cfg.initial_state.band,
        cfg.verification.strategy,
    )?
    .certified_value();

    let mut finals: Vec<WaveFunction> = Vec::with_capacity(ladder.len());
    let mut residual_max: Vec<Option<f64>> = Vec::with_capacity(ladder.len());
    for &dt in ladder {
        let n_steps = ((t_end - s) / dt).round().max(1.0) as usize;
        let stride = (n_steps / 100).max(1);
        let params = ObservableParams::new(c_hardy, Vec::new());
        let record = evolve(&phi, &kinetic, &potential, s, t_end, dt, stride, &params)?;
        residual_max.push(c_hardy.map(|ch| {
            identity_residual(&record, ch, cfg.dynamics.mass)
                .iter()
                .fold(0.0f64, |a, b| a.max(b.abs()))
        }));
        finals.push(record.final_state.expect("final state"));
    }

    let mut diffs: Vec<Option<f64>> = Vec::with_capacity(ladder.len());
    for i in 0..ladder.len() {
        if i + 1 < ladder.len() {
            let d = l2_diff(&finals[i], &finals[i + 1]);
            diffs.push(Some(d));
        } else {
            diffs.push(None);
        }
    }

    let mut warnings = Vec::new();
    let valid: Vec<(f64, f64)> = ladder
        .iter()
        .zip(&diffs)
        .filter_map(|(&dt, d)| d.map(|d| (dt, d)))
        .collect();
    for w in valid.windows(2) {
        if w[1].1 >= w[0].1 {
            warnings.push(format!(
                "terminal differences are not monotone between dt = {} and {}; \
                 outside the asymptotic regime",
                w[0].0, w[1].0
            ));
        }
    }

    let fitted_order = if valid.len() >= 2 && valid.iter().all(|&(_, d)| d > 0.0) {
        Some(least_squares_slope(
            &valid.iter().map(|&(dt, _)| dt.ln()).collect::<Vec<_>>(),
            &valid.iter().map(|&(_, d)| d.ln()).collect::<Vec<_>>(),
        ))
    } else {
        None
    };

    let rungs: Vec<ConvergenceRung> = (0..ladder.len())
        .map(|i| ConvergenceRung {
            dt: ladder[i],
            terminal_diff: diffs[i],
            max_residual: residual_max[i],
            order: match (diffs[i], diffs.get(i + 1).copied().flatten()) {
                (Some(a), Some(b)) if b > 0.0 => Some((a / b).log2()),
                _ => None,
            },
        })
        .collect();

    // recommend the dt that brings the residual under the tolerance,
    // extrapolating the observed O(dt^2) scaling from the finest rung
    let recommended_dt = match (rungs.last().and_then(|r| r.max_residual), ladder.last()) {
        (Some(res), Some(&dt_last)) if res > 0.0 => {
            if res <= residual_tol {
                // coarsest rung already within tolerance wins
                rungs
                    .iter()
                    .find(|r| r.max_residual.is_some_and(|m| m <= residual_tol))
                    .map(|r| r.dt)
            } else {
                Some(dt_last * (residual_tol / res).sqrt())
            }
        }
        _ => None,
    };

    Ok(ConvergenceStudy {
        rungs,
        fitted_order,
        residual_tolerance: residual_tol,
        recommended_dt,
        warnings,
    })
}

fn l2_diff(a: &WaveFunction, b: &WaveFunction) -> f64 {
    let mut d = a.to_position();
    let b = b.to_position();
    for (x, y) in d.amplitudes_mut().iter_mut().zip(b.amplitudes()) {
        *x -= y;
    }
    d.norm_l2()
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let num: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let den: f64 = x.iter().map(|xi| (xi - mx) * (xi - mx)).sum();
    num / den
}
