//! The full scenario pipeline: certify assumptions, derive constants,
//! evolve, verify bounds, and assemble the report.

use serde::Serialize;

use crate::assumptions::{certify, AssumptionReport, HardyEstimate};
use crate::bounds::{
    derive_constants, identity_residual, observables, sobolev_constants, sobolev_pair_p,
    verify_corollary1, verify_hardy_along_flow, verify_sobolev, verify_theorem1, verify_theorem2,
    Certificates, CheckStatus, EvolutionRecord, MarginReport, ObservableParams, SobolevConstant,
    SobolevReport, StabilityConstants,
};
use crate::error::Result;
use crate::propagate::evolve;

use super::config::ScenarioConfig;

/// Norm-conservation tolerance along the discrete flow.
pub const UNITARITY_TOL: f64 = 1e-11;

pub mod exit_code {
    pub const OK: i32 = 0;
    pub const OPERATIONAL: i32 = 1;
    pub const NOT_CERTIFIED: i32 = 2;
    pub const BOUND_VIOLATED: i32 = 3;
}

/// Rayleigh data of the initial state.
#[derive(Debug, Clone, Serialize)]
pub struct MeasuredInitial {
    pub l2: f64,
    pub f_kinetic: f64,
    pub energy: f64,
    /// `a1 = r1 = (H(s) phi, phi)/||phi||^2`.
    pub a1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verifications {
    pub unitarity: MarginReport,
    pub hardy_along_flow: MarginReport,
    pub theorem1_lower: MarginReport,
    pub theorem1_upper: MarginReport,
    pub theorem2_lower: MarginReport,
    pub theorem2_upper: MarginReport,
    pub energy_sandwich: MarginReport,
    pub corollary1_lower: MarginReport,
    pub corollary1_upper: MarginReport,
    pub sobolev: Vec<SobolevReport>,
}

impl Verifications {
    pub fn any_fail(&self) -> bool {
        let core = [
            &self.unitarity,
            &self.hardy_along_flow,
            &self.theorem1_lower,
            &self.theorem1_upper,
            &self.theorem2_lower,
            &self.theorem2_upper,
            &self.energy_sandwich,
            &self.corollary1_lower,
            &self.corollary1_upper,
        ];
        core.iter().any(|m| m.status == CheckStatus::Fail)
            || self.sobolev.iter().any(|s| s.status == CheckStatus::Fail)
    }

    pub fn all_pass(&self) -> bool {
        let core = [
            &self.unitarity,
            &self.hardy_along_flow,
            &self.theorem1_lower,
            &self.theorem1_upper,
            &self.theorem2_lower,
            &self.theorem2_upper,
            &self.energy_sandwich,
            &self.corollary1_lower,
            &self.corollary1_upper,
        ];
        core.iter().all(|m| m.status == CheckStatus::Pass)
            && self.sobolev.iter().all(|s| s.status == CheckStatus::Pass)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub fracstab: &'static str,
}

/// The JSON report (schema_version 1).
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub exit_code: i32,
    pub config: ScenarioConfig,
    pub defaults_applied: Vec<String>,
    pub warnings: Vec<String>,
    pub assumptions: AssumptionReport,
    pub certificates: Certificates,
    pub initial: MeasuredInitial,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<StabilityConstants>,
    pub sobolev_constants: Vec<SobolevConstant>,
    pub verifications: Verifications,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity_residual_max: Option<f64>,
    pub samples: usize,
    pub versions: Versions,
    /// Excluded from determinism comparisons.
    pub wall_time_s: f64,
}

/// Everything a run produces, before any file is written.
pub struct RunOutcome {
    pub exit_code: i32,
    pub report: RunReport,
    pub record: EvolutionRecord,
    pub residuals: Option<Vec<f64>>,
}

/// Run the whole pipeline in memory: check -> derive -> evolve -> verify.
pub fn run_pipeline(cfg: &ScenarioConfig, defaults: &[String]) -> Result<RunOutcome> {
    let started = std::time::Instant::now();
    let grid = cfg.build_grid()?;
    let kinetic = cfg.build_kinetic(&grid)?;
    let potential = cfg.build_potential()?;
    let band = cfg.initial_state.band;
    let s = cfg.dynamics.s;

    let mut warnings = Vec::new();
    boundary_warning(&potential, s, &grid, &mut warnings);

    // hard-validate the Sobolev pairing before doing any work
    for &(gamma, p) in &cfg.verification.gamma_p_pairs {
        let expect = sobolev_pair_p(grid.dim(), gamma)?;
        if (p - expect).abs() > 1e-9 * expect {
            return Err(crate::error::Error::config(
                "verification.gamma_p_pairs",
                format!("p = {p} does not match the pairing value {expect} for gamma = {gamma}"),
            ));
        }
    }

    let assumptions = certify(
        &kinetic,
        &potential,
        s,
        &band,
        cfg.verification.quad_horizon,
        &cfg.sample_times(),
        &cfg.delta_times(),
        cfg.verification.strategy,
    )?;
    let certs = assumptions.certificates();

    let phi = cfg.build_initial_state(&grid)?;
    let f0 = kinetic.expectation(&phi)?;
    let v0 = crate::bounds::potential_expectation(&phi, s, &potential);
    let l2_0 = phi.norm_l2();
    let e0 = f0 / (2.0 * cfg.dynamics.mass) + v0;
    let a1 = e0 / (l2_0 * l2_0);
    let initial = MeasuredInitial {
        l2: l2_0,
        f_kinetic: f0,
        energy: e0,
        a1,
    };

    let c_hardy = assumptions.hardy.certified_value();
    let constants = match (c_hardy, assumptions.integrability.constant) {
        (Some(ch), Some(i_inf)) => Some(derive_constants(
            ch,
            i_inf,
            assumptions.delta.delta,
            cfg.dynamics.mass,
            cfg.dynamics.theta,
            &band,
            a1,
            a1,
        )?),
        _ => None,
    };

    let sob_constants = match constants.as_ref().and_then(|c| c.c_upper) {
        Some(c_upper) if !cfg.verification.gamma_p_pairs.is_empty() => sobolev_constants(
            &grid,
            &band,
            cfg.dynamics.theta,
            c_upper,
            &cfg.verification.gamma_p_pairs,
            cfg.initial_state.seed,
        )?,
        _ => Vec::new(),
    };

    let mut p_list: Vec<f64> = cfg.verification.gamma_p_pairs.iter().map(|&(_, p)| p).collect();
    p_list.sort_by(|a, b| a.partial_cmp(b).unwrap());
    p_list.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let params = ObservableParams::new(c_hardy, p_list);
    let record = evolve(
        &phi,
        &kinetic,
        &potential,
        s,
        cfg.dynamics.t_end,
        cfg.dynamics.dt,
        cfg.dynamics.sample_stride,
        &params,
    )?;

    let residuals = c_hardy.map(|ch| identity_residual(&record, ch, cfg.dynamics.mass));
    let residual_max = residuals
        .as_ref()
        .map(|r| r.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs())));

    let verifications = build_verifications(&record, constants.as_ref(), &sob_constants, &certs)?;

    let exit_code = if verifications.any_fail() {
        exit_code::BOUND_VIOLATED
    } else if !(certs.assumption1 && certs.assumption2 && certs.assumption3) {
        exit_code::NOT_CERTIFIED
    } else {
        exit_code::OK
    };

    let report = RunReport {
        schema_version: 1,
        exit_code,
        config: cfg.clone(),
        defaults_applied: defaults.to_vec(),
        warnings,
        assumptions,
        certificates: certs,
        initial,
        constants,
        sobolev_constants: sob_constants,
        verifications,
        identity_residual_max: residual_max,
        samples: record.len(),
        versions: Versions {
            fracstab: env!("CARGO_PKG_VERSION"),
        },
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    Ok(RunOutcome {
        exit_code,
        report,
        record,
        residuals,
    })
}

/// Assumptions-only pipeline (the `check` subcommand): no evolution.
pub fn check_pipeline(cfg: &ScenarioConfig, defaults: &[String]) -> Result<RunOutcome> {
    let started = std::time::Instant::now();
    let grid = cfg.build_grid()?;
    let kinetic = cfg.build_kinetic(&grid)?;
    let potential = cfg.build_potential()?;
    let band = cfg.initial_state.band;
    let s = cfg.dynamics.s;
    let mut warnings = Vec::new();
    boundary_warning(&potential, s, &grid, &mut warnings);

    let assumptions = certify(
        &kinetic,
        &potential,
        s,
        &band,
        cfg.verification.quad_horizon,
        &cfg.sample_times(),
        &cfg.delta_times(),
        cfg.verification.strategy,
    )?;
    let certs = assumptions.certificates();

    let phi = cfg.build_initial_state(&grid)?;
    let f0 = kinetic.expectation(&phi)?;
    let v0 = crate::bounds::potential_expectation(&phi, s, &potential);
    let l2_0 = phi.norm_l2();
    let e0 = f0 / (2.0 * cfg.dynamics.mass) + v0;
    let a1 = e0 / (l2_0 * l2_0);

    let constants = match (
        assumptions.hardy.certified_value(),
        assumptions.integrability.constant,
    ) {
        (Some(ch), Some(i_inf)) => Some(derive_constants(
            ch,
            i_inf,
            assumptions.delta.delta,
            cfg.dynamics.mass,
            cfg.dynamics.theta,
            &band,
            a1,
            a1,
        )?),
        _ => None,
    };

    // a single initial sample so the record is well formed
    let params = ObservableParams::new(assumptions.hardy.certified_value(), Vec::new());
    let mut record = EvolutionRecord::new(&params);
    let row = observables(&phi, s, &kinetic, &potential, &params)?;
    record.push(s, row, 0.0);
    record.set_initial_state(phi.clone());
    record.set_final_state(phi.to_position());

    let exit_code = if certs.assumption1 && certs.assumption2 && certs.assumption3 {
        exit_code::OK
    } else {
        exit_code::NOT_CERTIFIED
    };
    let verifications = build_verifications(&record, constants.as_ref(), &[], &certs)?;
    let report = RunReport {
        schema_version: 1,
        exit_code,
        config: cfg.clone(),
        defaults_applied: defaults.to_vec(),
        warnings,
        assumptions,
        certificates: certs,
        initial: MeasuredInitial {
            l2: l2_0,
            f_kinetic: f0,
            energy: e0,
            a1,
        },
        constants,
        sobolev_constants: Vec::new(),
        verifications,
        identity_residual_max: None,
        samples: 1,
        versions: Versions {
            fracstab: env!("CARGO_PKG_VERSION"),
        },
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    Ok(RunOutcome {
        exit_code,
        report,
        record,
        residuals: None,
    })
}

fn build_verifications(
    record: &EvolutionRecord,
    constants: Option<&StabilityConstants>,
    sob_constants: &[SobolevConstant],
    certs: &Certificates,
) -> Result<Verifications> {
    let unitarity = unitarity_check(record);
    let hardy_flow = verify_hardy_along_flow(record, certs);

    let (t1_lower, t1_upper, t2_lower, t2_upper, sandwich, c1_lower, c1_upper) = match constants {
        Some(c) => {
            let (lo, up) = verify_theorem1(record, c, certs);
            let (e_lo, e_up, sw) = verify_theorem2(record, c, certs);
            let (h_lo, h_up) = verify_corollary1(record, c, certs);
            (lo, up, e_lo, e_up, sw, h_lo, h_up)
        }
        None => {
            let nc = |name: &str| MarginReport {
                name: name.to_string(),
                status: CheckStatus::NotCertified,
                min_margin: None,
                argmin_time: None,
                scale: None,
                missing: vec!["assumption1".into()],
            };
            (
                nc("theorem1_lower"),
                nc("theorem1_upper"),
                nc("theorem2_lower"),
                nc("theorem2_upper"),
                nc("energy_sandwich"),
                nc("corollary1_lower"),
                nc("corollary1_upper"),
            )
        }
    };

    let mut sobolev = Vec::with_capacity(sob_constants.len());
    for sc in sob_constants {
        sobolev.push(verify_sobolev(record, sc, certs)?);
    }

    Ok(Verifications {
        unitarity,
        hardy_along_flow: hardy_flow,
        theorem1_lower: t1_lower,
        theorem1_upper: t1_upper,
        theorem2_lower: t2_lower,
        theorem2_upper: t2_upper,
        energy_sandwich: sandwich,
        corollary1_lower: c1_lower,
        corollary1_upper: c1_upper,
        sobolev,
    })
}

/// `| ||u(t)||/||phi|| - 1 | <= UNITARITY_TOL` at every sample.
fn unitarity_check(record: &EvolutionRecord) -> MarginReport {
    let n0 = record.l2[0];
    let mut worst = 0.0f64;
    let mut at = record.times[0];
    for (t, l2) in record.times.iter().zip(&record.l2) {
        let drift = (l2 / n0 - 1.0).abs();
        if drift > worst {
            worst = drift;
            at = *t;
        }
    }
    MarginReport {
        name: "unitarity".into(),
        status: if worst <= UNITARITY_TOL {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        min_margin: Some(UNITARITY_TOL - worst),
        argmin_time: Some(at),
        scale: Some(UNITARITY_TOL),
        missing: Vec::new(),
    }
}

/// Warn when the potential has not decayed at the torus boundary.
fn boundary_warning(
    potential: &crate::potential::PotentialModel,
    t: f64,
    grid: &crate::spectral::SpectralGrid,
    warnings: &mut Vec<String>,
) {
    let field = potential.eval_on_grid(t, grid);
    let max_abs = field.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
    if max_abs == 0.0 {
        return;
    }
    let mut boundary_max = 0.0f64;
    for (j, v) in field.iter().enumerate() {
        let idx = grid.axis_indices(j);
        let on_edge = idx[0] == 0 || (grid.dim() == 2 && idx[1] == 0);
        if on_edge {
            boundary_max = boundary_max.max(v.abs());
        }
    }
    if boundary_max > 1e-6 * max_abs {
        warnings.push(format!(
            "potential boundary amplitude {boundary_max:.3e} exceeds 1e-6 of its max {max_abs:.3e}; \
             enlarge box_length so the periodic wrap is negligible"
        ));
    }
}

impl RunOutcome {
    /// Echo the hardy estimate for tables.
    pub fn c_hardy(&self) -> Option<f64> {
        match &self.report.assumptions.hardy {
            HardyEstimate::Certified { c_hardy, .. } => Some(*c_hardy),
            HardyEstimate::Unsupported { .. } => None,
        }
    }
}
