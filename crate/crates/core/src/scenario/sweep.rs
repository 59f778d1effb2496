//! Parameter sweeps over the model families: deterministic row order,
//! per-row failures captured as row status, rows run concurrently.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::CheckStatus;
use crate::error::{Error, Result};

use super::config::{DriftSpec, PotentialSpec, ScenarioConfig, SweepAxis};
use super::run::{run_pipeline, RunOutcome};

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    /// Axis values in axis order.
    pub values: Vec<f64>,
    /// "ok" or the error text.
    pub status: String,
    pub exit_code: Option<i32>,
    pub assumption1: Option<bool>,
    pub assumption2: Option<bool>,
    pub assumption3: Option<bool>,
    pub c_hardy: Option<f64>,
    pub i_inf: Option<f64>,
    pub assumption2_min_eig: Option<f64>,
    pub delta: Option<f64>,
    pub a_tilde: Option<f64>,
    pub r_tilde: Option<f64>,
    pub theorem1_lower_margin: Option<f64>,
    pub theorem1_upper_margin: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub params: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Worst exit class across rows: 1 beats 3 beats 2 beats 0.
    pub fn worst_exit(&self) -> i32 {
        let mut worst = 0;
        for row in &self.rows {
            let class = row.exit_code.unwrap_or(1);
            let rank = |c: i32| match c {
                1 => 3,
                3 => 2,
                2 => 1,
                _ => 0,
            };
            if rank(class) > rank(worst) {
                worst = class;
            }
        }
        worst
    }
}

/// Run the Cartesian product of the axes. Row order is row-major in axis
/// order and independent of the thread schedule.
pub fn sweep(base: &ScenarioConfig, axes: &[SweepAxis]) -> Result<SweepTable> {
    if axes.is_empty() {
        return Err(Error::invalid("sweep", "no axes given"));
    }
    let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
    for ax in axes {
        let mut next = Vec::with_capacity(combos.len() * ax.values.len());
        for combo in &combos {
            for &v in &ax.values {
                let mut c = combo.clone();
                c.push(v);
                next.push(c);
            }
        }
        combos = next;
    }

    let rows: Vec<SweepRow> = combos
        .par_iter()
        .map(|values| {
            let mut cfg = base.clone();
            for (ax, &v) in axes.iter().zip(values) {
                if let Err(e) = apply_axis(&mut cfg, &ax.param, v) {
                    return error_row(values.clone(), &e);
                }
            }
            if let Err(e) = cfg.validate() {
                return error_row(values.clone(), &e);
            }
            match run_pipeline(&cfg, &[]) {
                Ok(outcome) => ok_row(values.clone(), &outcome),
                Err(e) => error_row(values.clone(), &e),
            }
        })
        .collect();

    Ok(SweepTable {
        params: axes.iter().map(|a| a.param.clone()).collect(),
        rows,
    })
}

fn ok_row(values: Vec<f64>, outcome: &RunOutcome) -> SweepRow {
    let rep = &outcome.report;
    let margin = |m: &crate::bounds::MarginReport| match m.status {
        CheckStatus::NotCertified => None,
        _ => m.min_margin,
    };
    SweepRow {
        values,
        status: "ok".into(),
        exit_code: Some(outcome.exit_code),
        assumption1: Some(rep.certificates.assumption1),
        assumption2: Some(rep.certificates.assumption2),
        assumption3: Some(rep.certificates.assumption3),
        c_hardy: outcome.c_hardy(),
        i_inf: rep.assumptions.integrability.constant,
        assumption2_min_eig: rep.assumptions.assumption2.as_ref().map(|a| a.min_eig),
        delta: Some(rep.assumptions.delta.delta),
        a_tilde: rep.constants.as_ref().map(|c| c.a_tilde),
        r_tilde: rep.constants.as_ref().and_then(|c| c.r_tilde),
        theorem1_lower_margin: margin(&rep.verifications.theorem1_lower),
        theorem1_upper_margin: margin(&rep.verifications.theorem1_upper),
    }
}

fn error_row(values: Vec<f64>, e: &Error) -> SweepRow {
    SweepRow {
        values,
        status: format!("error: {e}"),
        exit_code: None,
        assumption1: None,
        assumption2: None,
        assumption3: None,
        c_hardy: None,
        i_inf: None,
        assumption2_min_eig: None,
        delta: None,
        a_tilde: None,
        r_tilde: None,
        theorem1_lower_margin: None,
        theorem1_upper_margin: None,
    }
}

/// Point one of the supported parameter paths at a new value.
pub fn apply_axis(cfg: &mut ScenarioConfig, param: &str, value: f64) -> Result<()> {
    match param {
        "dynamics.mass" => {
            cfg.dynamics.mass = value;
            Ok(())
        }
        "dynamics.theta" => {
            cfg.dynamics.theta = value;
            Ok(())
        }
        "potential.amplitude" => set_amplitude(&mut cfg.potential, value),
        "potential.shape_power" => set_shape_power(&mut cfg.potential, value),
        "potential.drift.scale" => set_drift_scale(&mut cfg.potential, value),
        other => Err(Error::invalid(
            "sweep",
            format!("unsupported axis `{other}`"),
        )),
    }
}

fn set_amplitude(spec: &mut PotentialSpec, value: f64) -> Result<()> {
    match spec {
        PotentialSpec::MovingBump { amplitude, .. }
        | PotentialSpec::InversePowerRegularized { amplitude, .. } => {
            *amplitude = value;
            Ok(())
        }
        PotentialSpec::Static { value: v } => {
            *v = value;
            Ok(())
        }
        PotentialSpec::DecayingEnvelope { base, .. } => set_amplitude(base, value),
    }
}

fn set_shape_power(spec: &mut PotentialSpec, value: f64) -> Result<()> {
    match spec {
        PotentialSpec::MovingBump { shape_power, .. } => {
            *shape_power = value;
            Ok(())
        }
        PotentialSpec::InversePowerRegularized { power, .. } => {
            *power = value;
            Ok(())
        }
        PotentialSpec::Static { .. } => Err(Error::invalid(
            "sweep",
            "`potential.shape_power` does not apply to a static potential",
        )),
        PotentialSpec::DecayingEnvelope { base, .. } => set_shape_power(base, value),
    }
}

fn set_drift_scale(spec: &mut PotentialSpec, value: f64) -> Result<()> {
    match spec {
        PotentialSpec::MovingBump { drift, .. } => match drift {
            DriftSpec::ArctanDrift { velocity } | DriftSpec::Periodic { velocity, .. } => {
                let norm: f64 = velocity.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return Err(Error::invalid("sweep", "drift velocity is zero; no direction"));
                }
                for v in velocity.iter_mut() {
                    *v *= value / norm;
                }
                Ok(())
            }
            DriftSpec::Constant { .. } => Err(Error::invalid(
                "sweep",
                "`potential.drift.scale` does not apply to a constant drift",
            )),
        },
        PotentialSpec::DecayingEnvelope { base, .. } => set_drift_scale(base, value),
        _ => Err(Error::invalid(
            "sweep",
            "`potential.drift.scale` applies only to moving bumps",
        )),
    }
}

/// Aggregate table CSV in deterministic column order.
pub fn render_sweep_csv(table: &SweepTable) -> String {
    let mut out = String::new();
    for p in &table.params {
        out.push_str(p);
        out.push(',');
    }
    out.push_str(
        "status,exit_code,assumption1,assumption2,assumption3,c_hardy,i_inf,\
         assumption2_min_eig,delta,a_tilde,r_tilde,theorem1_lower_margin,theorem1_upper_margin\n",
    );
    let fmt_opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.16e}"));
    let fmt_bool = |v: Option<bool>| v.map_or(String::new(), |b| b.to_string());
    for row in &table.rows {
        for v in &row.values {
            out.push_str(&format!("{v:.16e},"));
        }
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.status.replace(',', ";"),
            row.exit_code.map_or(String::new(), |c| c.to_string()),
            fmt_bool(row.assumption1),
            fmt_bool(row.assumption2),
            fmt_bool(row.assumption3),
            fmt_opt(row.c_hardy),
            fmt_opt(row.i_inf),
            fmt_opt(row.assumption2_min_eig),
            fmt_opt(row.delta),
            fmt_opt(row.a_tilde),
            fmt_opt(row.r_tilde),
            fmt_opt(row.theorem1_lower_margin),
            fmt_opt(row.theorem1_upper_margin),
        ));
    }
    out
}
