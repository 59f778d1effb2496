//! Scenario configuration: TOML loading, validation with named fields,
//! defaults with provenance tracking, and builders for the domain objects.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assumptions::Strategy;
use crate::error::{Error, Result};
use crate::potential::{
    decaying_envelope, inverse_power_regularized, moving_bump, uniform, DriftProfile,
    PotentialModel,
};
use crate::spectral::{
    band_project, make_grid, BandWindow, KineticOperator, Representation, SpectralGrid,
    WaveFunction,
};

// ---------------------------------------------------------------------------
// raw (deserialization) layer: everything optional, unknown keys rejected
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    grid: Option<RawGrid>,
    dynamics: Option<RawDynamics>,
    potential: Option<RawPotential>,
    initial_state: Option<RawInitialState>,
    verification: Option<RawVerification>,
    output: Option<RawOutput>,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    dim: Option<usize>,
    points_per_dim: Option<usize>,
    box_length: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDynamics {
    theta: Option<f64>,
    mass: Option<f64>,
    s: Option<f64>,
    t_end: Option<f64>,
    dt: Option<f64>,
    sample_stride: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    kind: String,
    amplitude: Option<f64>,
    shape_power: Option<f64>,
    drift: Option<RawDrift>,
    power: Option<f64>,
    smoothing: Option<f64>,
    value: Option<f64>,
    rate: Option<f64>,
    t0: Option<f64>,
    base: Option<Box<RawPotential>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrift {
    kind: String,
    velocity: Option<Vec<f64>>,
    omega: Option<f64>,
    offset: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitialState {
    kind: String,
    center: Option<Vec<f64>>,
    width: Option<f64>,
    momentum: Option<Vec<f64>>,
    modes: Option<Vec<RawMode>>,
    seed: Option<u64>,
    normalize: Option<bool>,
    band: Option<RawBand>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawMode {
    pub index: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBand {
    a: f64,
    r: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVerification {
    gamma_p_pairs: Option<Vec<Vec<f64>>>,
    quad_horizon: Option<f64>,
    delta_samples: Option<usize>,
    strategy: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
    csv: Option<String>,
    report: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axes: Vec<RawAxis>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    param: String,
    values: Vec<f64>,
}

// ---------------------------------------------------------------------------
// resolved layer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct GridConfig {
    pub dim: usize,
    pub points_per_dim: usize,
    pub box_length: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DynamicsConfig {
    pub theta: f64,
    pub mass: f64,
    pub s: f64,
    pub t_end: f64,
    pub dt: f64,
    pub sample_stride: usize,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    MovingBump {
        amplitude: f64,
        shape_power: f64,
        drift: DriftSpec,
    },
    InversePowerRegularized {
        amplitude: f64,
        power: f64,
        smoothing: f64,
    },
    Static {
        value: f64,
    },
    DecayingEnvelope {
        rate: f64,
        t0: f64,
        base: Box<PotentialSpec>,
    },
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriftSpec {
    Constant { offset: Vec<f64> },
    ArctanDrift { velocity: Vec<f64> },
    Periodic { velocity: Vec<f64>, omega: f64 },
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialStateSpec {
    Gaussian {
        center: Vec<f64>,
        width: f64,
        momentum: Vec<f64>,
    },
    ModeSum {
        modes: Vec<RawMode>,
    },
    RandomBand,
}

#[derive(Debug, Clone, Serialize)]
pub struct InitialStateConfig {
    #[serde(flatten)]
    pub spec: InitialStateSpec,
    pub seed: u64,
    pub normalize: bool,
    pub band: BandWindow,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationConfig {
    /// `(gamma, p)` pairs for the Sobolev-type check; `p` must satisfy
    /// `1/p + gamma/n = 1/2`.
    pub gamma_p_pairs: Vec<(f64, f64)>,
    /// Quadrature horizon for the integrability constant.
    pub quad_horizon: f64,
    /// Number of uniformly spaced times at which delta is certified.
    pub delta_samples: usize,
    pub strategy: Strategy,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputConfig {
    pub dir: String,
    pub csv: String,
    pub report: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepAxis {
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioConfig {
    pub grid: GridConfig,
    pub dynamics: DynamicsConfig,
    pub potential: PotentialSpec,
    pub initial_state: InitialStateConfig,
    pub verification: VerificationConfig,
    pub output: OutputConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepAxis>>,
}

/// Load and fully resolve a scenario configuration file. Unknown keys are
/// hard errors; every defaulted field is recorded in the second return value.
pub fn load_config(path: &Path) -> Result<(ScenarioConfig, Vec<String>)> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

/// Parse a configuration from TOML text (see [`load_config`]).
pub fn parse_config(text: &str) -> Result<(ScenarioConfig, Vec<String>)> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| Error::ConfigParse(suggest_nearest(&e.to_string())))?;
    resolve(raw)
}

/// Append a "did you mean" hint to serde's unknown-field message.
fn suggest_nearest(message: &str) -> String {
    let Some(rest) = message.split("unknown field `").nth(1) else {
        return message.to_string();
    };
    let Some(unknown) = rest.split('`').next() else {
        return message.to_string();
    };
    let Some(expected) = message.split("expected one of ").nth(1) else {
        return message.to_string();
    };
    let candidates: Vec<&str> = expected
        .split('`')
        .filter(|s| !s.trim_matches(|c: char| c == ',' || c.is_whitespace() || c == '.').is_empty())
        .filter(|s| s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'))
        .collect();
    let best = candidates
        .iter()
        .min_by_key(|c| levenshtein(unknown, c))
        .copied();
    match best {
        Some(b) if levenshtein(unknown, b) <= 3 => {
            format!("{message}; did you mean `{b}`?")
        }
        _ => message.to_string(),
    }
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let cost = usize::from(ca != cb);
            cur[j + 1] = (prev[j] + cost).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn resolve(raw: RawConfig) -> Result<(ScenarioConfig, Vec<String>)> {
    let mut defaults: Vec<String> = Vec::new();
    macro_rules! noted {
        ($name:expr, $value:expr) => {
            defaults.push(format!("{} = {} (default)", $name, $value))
        };
    }

    let rg = raw.grid.unwrap_or_default();
    let dim = rg.dim.unwrap_or_else(|| {
        noted!("grid.dim", "1");
        1
    });
    if dim != 1 && dim != 2 {
        return Err(Error::config("grid.dim", format!("must be 1 or 2, got {dim}")));
    }
    let default_n = if dim == 1 { 1024 } else { 256 };
    let default_l = if dim == 1 { 80.0 } else { 40.0 };
    let points_per_dim = rg.points_per_dim.unwrap_or_else(|| {
        noted!("grid.points_per_dim", default_n.to_string());
        default_n
    });
    let box_length = rg.box_length.unwrap_or_else(|| {
        noted!("grid.box_length", default_l.to_string());
        default_l
    });

    let rd = raw.dynamics.unwrap_or_default();
    let theta = rd.theta.unwrap_or_else(|| {
        noted!("dynamics.theta", "1");
        1.0
    });
    let mass = rd.mass.unwrap_or_else(|| {
        noted!("dynamics.mass", "0.5");
        0.5
    });
    let s = rd.s.unwrap_or_else(|| {
        noted!("dynamics.s", "0");
        0.0
    });
    let t_end = rd.t_end.unwrap_or_else(|| {
        noted!("dynamics.t_end", format!("{}", s + 50.0));
        s + 50.0
    });
    let dt = rd.dt.unwrap_or_else(|| {
        noted!("dynamics.dt", "0.001");
        1e-3
    });
    let sample_stride = rd.sample_stride.unwrap_or_else(|| {
        noted!("dynamics.sample_stride", "100");
        100
    });
    if !(theta >= 0.5) {
        return Err(Error::config("dynamics.theta", format!("must be >= 1/2, got {theta}")));
    }
    if !(mass > 0.0) {
        return Err(Error::config("dynamics.mass", format!("must be positive, got {mass}")));
    }
    if !(t_end > s) {
        return Err(Error::config(
            "dynamics.t_end",
            format!("must exceed dynamics.s = {s}, got {t_end}"),
        ));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::config("dynamics.dt", format!("must be positive, got {dt}")));
    }
    if sample_stride == 0 {
        return Err(Error::config("dynamics.sample_stride", "must be >= 1"));
    }

    let potential = match raw.potential {
        Some(rp) => resolve_potential(rp, s, dim, &mut defaults)?,
        None => {
            defaults.push(
                "potential = moving_bump(amplitude 0.1, shape_power 1, arctan velocity 1) (default)"
                    .into(),
            );
            PotentialSpec::MovingBump {
                amplitude: 0.1,
                shape_power: 1.0,
                drift: DriftSpec::ArctanDrift {
                    velocity: unit_velocity(dim),
                },
            }
        }
    };

    let initial_state = resolve_initial_state(raw.initial_state, dim, &mut defaults)?;

    let rv = raw.verification.unwrap_or_default();
    let gamma_p_pairs = match rv.gamma_p_pairs {
        Some(pairs) => {
            let mut out = Vec::with_capacity(pairs.len());
            for (i, p) in pairs.iter().enumerate() {
                if p.len() != 2 {
                    return Err(Error::config(
                        "verification.gamma_p_pairs",
                        format!("entry {i} must be a [gamma, p] pair"),
                    ));
                }
                out.push((p[0], p[1]));
            }
            out
        }
        None => {
            defaults.push("verification.gamma_p_pairs = [] (default)".into());
            Vec::new()
        }
    };
    let quad_horizon = rv.quad_horizon.unwrap_or_else(|| {
        let h = (s + 200.0).max(t_end);
        noted!("verification.quad_horizon", format!("{h}"));
        h
    });
    if quad_horizon < t_end {
        return Err(Error::config(
            "verification.quad_horizon",
            format!("must reach at least t_end = {t_end}, got {quad_horizon}"),
        ));
    }
    let delta_samples = rv.delta_samples.unwrap_or_else(|| {
        noted!("verification.delta_samples", "9");
        9
    });
    if delta_samples == 0 {
        return Err(Error::config("verification.delta_samples", "must be >= 1"));
    }
    let strategy = match rv.strategy.as_deref() {
        None => {
            noted!("verification.strategy", "auto");
            Strategy::Auto
        }
        Some("auto") => Strategy::Auto,
        Some("dense") => Strategy::Dense,
        Some("iterative") => Strategy::Iterative,
        Some(other) => {
            return Err(Error::config(
                "verification.strategy",
                format!("must be one of auto/dense/iterative, got `{other}`"),
            ))
        }
    };

    let ro = raw.output.unwrap_or_default();
    let output = OutputConfig {
        dir: ro.dir.unwrap_or_else(|| {
            noted!("output.dir", "out");
            "out".into()
        }),
        csv: ro.csv.unwrap_or_else(|| {
            noted!("output.csv", "series.csv");
            "series.csv".into()
        }),
        report: ro.report.unwrap_or_else(|| {
            noted!("output.report", "report.json");
            "report.json".into()
        }),
    };

    let sweep = match raw.sweep {
        Some(rs) => {
            let mut axes = Vec::with_capacity(rs.axes.len());
            for ax in rs.axes {
                validate_sweep_param(&ax.param)?;
                if ax.values.is_empty() {
                    return Err(Error::config("sweep.axes", "axis value list is empty"));
                }
                axes.push(SweepAxis {
                    param: ax.param,
                    values: ax.values,
                });
            }
            Some(axes)
        }
        None => None,
    };

    let cfg = ScenarioConfig {
        grid: GridConfig {
            dim,
            points_per_dim,
            box_length,
        },
        dynamics: DynamicsConfig {
            theta,
            mass,
            s,
            t_end,
            dt,
            sample_stride,
        },
        potential,
        initial_state,
        verification: VerificationConfig {
            gamma_p_pairs,
            quad_horizon,
            delta_samples,
            strategy,
        },
        output,
        sweep,
    };
    cfg.validate()?;
    Ok((cfg, defaults))
}

fn unit_velocity(dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[0] = 1.0;
    v
}

fn require<T>(field: Option<T>, kind: &str, name: &str) -> Result<T> {
    field.ok_or_else(|| {
        Error::config(
            format!("potential.{name}"),
            format!("required by kind `{kind}`"),
        )
    })
}

fn reject_unused<T>(field: &Option<T>, kind: &str, name: &str) -> Result<()> {
    if field.is_some() {
        return Err(Error::config(
            format!("potential.{name}"),
            format!("not used by kind `{kind}`"),
        ));
    }
    Ok(())
}

fn resolve_potential(
    rp: RawPotential,
    s: f64,
    dim: usize,
    defaults: &mut Vec<String>,
) -> Result<PotentialSpec> {
    match rp.kind.as_str() {
        "moving_bump" => {
            reject_unused(&rp.power, "moving_bump", "power")?;
            reject_unused(&rp.smoothing, "moving_bump", "smoothing")?;
            reject_unused(&rp.value, "moving_bump", "value")?;
            reject_unused(&rp.rate, "moving_bump", "rate")?;
            reject_unused(&rp.base, "moving_bump", "base")?;
            let amplitude = require(rp.amplitude, "moving_bump", "amplitude")?;
            let shape_power = require(rp.shape_power, "moving_bump", "shape_power")?;
            let drift = match rp.drift {
                Some(rd) => resolve_drift(rd, dim)?,
                None => {
                    defaults.push("potential.drift = constant 0 (default)".into());
                    DriftSpec::Constant {
                        offset: vec![0.0; dim],
                    }
                }
            };
            Ok(PotentialSpec::MovingBump {
                amplitude,
                shape_power,
                drift,
            })
        }
        "inverse_power_regularized" => {
            reject_unused(&rp.shape_power, "inverse_power_regularized", "shape_power")?;
            reject_unused(&rp.drift, "inverse_power_regularized", "drift")?;
            reject_unused(&rp.value, "inverse_power_regularized", "value")?;
            reject_unused(&rp.rate, "inverse_power_regularized", "rate")?;
            reject_unused(&rp.base, "inverse_power_regularized", "base")?;
            Ok(PotentialSpec::InversePowerRegularized {
                amplitude: require(rp.amplitude, "inverse_power_regularized", "amplitude")?,
                power: require(rp.power, "inverse_power_regularized", "power")?,
                smoothing: require(rp.smoothing, "inverse_power_regularized", "smoothing")?,
            })
        }
        "static" => {
            reject_unused(&rp.amplitude, "static", "amplitude")?;
            reject_unused(&rp.shape_power, "static", "shape_power")?;
            reject_unused(&rp.drift, "static", "drift")?;
            reject_unused(&rp.rate, "static", "rate")?;
            reject_unused(&rp.base, "static", "base")?;
            Ok(PotentialSpec::Static {
                value: require(rp.value, "static", "value")?,
            })
        }
        "decaying_envelope" => {
            reject_unused(&rp.amplitude, "decaying_envelope", "amplitude")?;
            reject_unused(&rp.value, "decaying_envelope", "value")?;
            let rate = require(rp.rate, "decaying_envelope", "rate")?;
            let t0 = rp.t0.unwrap_or_else(|| {
                defaults.push(format!("potential.t0 = {s} (default, scenario start)"));
                s
            });
            let base = require(rp.base, "decaying_envelope", "base")?;
            let base = resolve_potential(*base, s, dim, defaults)?;
            Ok(PotentialSpec::DecayingEnvelope {
                rate,
                t0,
                base: Box::new(base),
            })
        }
        other => Err(Error::config(
            "potential.kind",
            format!(
                "unknown kind `{other}`; expected one of moving_bump, \
                 inverse_power_regularized, static, decaying_envelope"
            ),
        )),
    }
}

fn resolve_drift(rd: RawDrift, dim: usize) -> Result<DriftSpec> {
    let check_dim = |v: &[f64], name: &str| -> Result<()> {
        if v.len() != dim {
            return Err(Error::config(
                format!("potential.drift.{name}"),
                format!("needs {dim} components to match grid.dim, got {}", v.len()),
            ));
        }
        Ok(())
    };
    match rd.kind.as_str() {
        "constant" => {
            let offset = rd.offset.unwrap_or_else(|| vec![0.0; dim]);
            check_dim(&offset, "offset")?;
            if rd.velocity.is_some() || rd.omega.is_some() {
                return Err(Error::config(
                    "potential.drift",
                    "`velocity`/`omega` are not used by kind `constant`",
                ));
            }
            Ok(DriftSpec::Constant { offset })
        }
        "arctan_drift" | "arctan" => {
            let velocity = rd.velocity.ok_or_else(|| {
                Error::config("potential.drift.velocity", "required by kind `arctan_drift`")
            })?;
            check_dim(&velocity, "velocity")?;
            if rd.omega.is_some() || rd.offset.is_some() {
                return Err(Error::config(
                    "potential.drift",
                    "`omega`/`offset` are not used by kind `arctan_drift`",
                ));
            }
            Ok(DriftSpec::ArctanDrift { velocity })
        }
        "periodic" => {
            let velocity = rd.velocity.ok_or_else(|| {
                Error::config("potential.drift.velocity", "required by kind `periodic`")
            })?;
            check_dim(&velocity, "velocity")?;
            let omega = rd.omega.ok_or_else(|| {
                Error::config("potential.drift.omega", "required by kind `periodic`")
            })?;
            if rd.offset.is_some() {
                return Err(Error::config(
                    "potential.drift",
                    "`offset` is not used by kind `periodic`",
                ));
            }
            Ok(DriftSpec::Periodic { velocity, omega })
        }
        other => Err(Error::config(
            "potential.drift.kind",
            format!("unknown kind `{other}`; expected one of constant, arctan_drift, periodic"),
        )),
    }
}

fn resolve_initial_state(
    raw: Option<RawInitialState>,
    dim: usize,
    defaults: &mut Vec<String>,
) -> Result<InitialStateConfig> {
    let Some(ri) = raw else {
        defaults.push("initial_state = random_band, seed 7, band [0.5, 3] (default)".into());
        return Ok(InitialStateConfig {
            spec: InitialStateSpec::RandomBand,
            seed: 7,
            normalize: true,
            band: BandWindow::new(0.5, 3.0).expect("valid default band"),
        });
    };
    let band = match ri.band {
        Some(rb) => BandWindow::new(rb.a, rb.r)
            .map_err(|e| Error::config("initial_state.band", e.to_string()))?,
        None => {
            defaults.push("initial_state.band = [0.5, 3] (default)".into());
            BandWindow::new(0.5, 3.0).expect("valid default band")
        }
    };
    let seed = ri.seed.unwrap_or_else(|| {
        defaults.push("initial_state.seed = 7 (default)".into());
        7
    });
    let normalize = ri.normalize.unwrap_or(true);

    let reject = |present: bool, kind: &str, name: &str| -> Result<()> {
        if present {
            return Err(Error::config(
                format!("initial_state.{name}"),
                format!("not used by kind `{kind}`"),
            ));
        }
        Ok(())
    };
    let spec = match ri.kind.as_str() {
        "gaussian" => {
            reject(ri.modes.is_some(), "gaussian", "modes")?;
            let center = ri.center.unwrap_or_else(|| vec![0.0; dim]);
            let momentum = ri.momentum.unwrap_or_else(|| vec![0.0; dim]);
            let width = ri.width.unwrap_or(1.0);
            if center.len() != dim || momentum.len() != dim {
                return Err(Error::config(
                    "initial_state",
                    format!("center/momentum need {dim} components to match grid.dim"),
                ));
            }
            if !(width > 0.0) {
                return Err(Error::config("initial_state.width", "must be positive"));
            }
            InitialStateSpec::Gaussian {
                center,
                width,
                momentum,
            }
        }
        "mode_sum" => {
            reject(ri.center.is_some(), "mode_sum", "center")?;
            reject(ri.width.is_some(), "mode_sum", "width")?;
            reject(ri.momentum.is_some(), "mode_sum", "momentum")?;
            let modes = ri
                .modes
                .ok_or_else(|| Error::config("initial_state.modes", "required by kind `mode_sum`"))?;
            if modes.is_empty() {
                return Err(Error::config("initial_state.modes", "must not be empty"));
            }
            for m in &modes {
                if m.index.len() != dim {
                    return Err(Error::config(
                        "initial_state.modes",
                        format!("mode index needs {dim} components, got {:?}", m.index),
                    ));
                }
            }
            InitialStateSpec::ModeSum { modes }
        }
        "random_band" => {
            reject(ri.center.is_some(), "random_band", "center")?;
            reject(ri.width.is_some(), "random_band", "width")?;
            reject(ri.momentum.is_some(), "random_band", "momentum")?;
            reject(ri.modes.is_some(), "random_band", "modes")?;
            InitialStateSpec::RandomBand
        }
        other => {
            return Err(Error::config(
                "initial_state.kind",
                format!("unknown kind `{other}`; expected one of gaussian, mode_sum, random_band"),
            ))
        }
    };
    Ok(InitialStateConfig {
        spec,
        seed,
        normalize,
        band,
    })
}

fn validate_sweep_param(param: &str) -> Result<()> {
    const VALID: [&str; 5] = [
        "potential.amplitude",
        "potential.shape_power",
        "potential.drift.scale",
        "dynamics.mass",
        "dynamics.theta",
    ];
    if VALID.contains(&param) {
        Ok(())
    } else {
        Err(Error::config(
            "sweep.axes.param",
            format!("unknown axis `{param}`; expected one of {}", VALID.join(", ")),
        ))
    }
}

// ---------------------------------------------------------------------------
// builders
// ---------------------------------------------------------------------------

impl ScenarioConfig {
    /// Cross-field validation that the raw layer cannot express.
    pub fn validate(&self) -> Result<()> {
        let steps = (self.dynamics.t_end - self.dynamics.s) / self.dynamics.dt;
        if steps.round() < 1.0 || ((steps.round() * self.dynamics.dt
            - (self.dynamics.t_end - self.dynamics.s))
            / (self.dynamics.t_end - self.dynamics.s))
            .abs()
            > 1e-9
        {
            return Err(Error::config(
                "dynamics.dt",
                format!(
                    "dt = {} does not divide t_end - s = {} within roundoff",
                    self.dynamics.dt,
                    self.dynamics.t_end - self.dynamics.s
                ),
            ));
        }
        let grid = self.build_grid()?;
        self.initial_state
            .band
            .validate_for(&grid)
            .map_err(|e| Error::config("initial_state.band", e.to_string()))?;
        self.check_drift_dims(&self.potential)?;
        Ok(())
    }

    fn check_drift_dims(&self, spec: &PotentialSpec) -> Result<()> {
        match spec {
            PotentialSpec::MovingBump { drift, .. } => {
                let len = match drift {
                    DriftSpec::Constant { offset } => offset.len(),
                    DriftSpec::ArctanDrift { velocity } => velocity.len(),
                    DriftSpec::Periodic { velocity, .. } => velocity.len(),
                };
                if len != self.grid.dim {
                    return Err(Error::config(
                        "potential.drift",
                        format!("vector length {len} does not match grid.dim {}", self.grid.dim),
                    ));
                }
                Ok(())
            }
            PotentialSpec::DecayingEnvelope { base, .. } => self.check_drift_dims(base),
            _ => Ok(()),
        }
    }

    pub fn build_grid(&self) -> Result<Arc<SpectralGrid>> {
        make_grid(self.grid.dim, self.grid.points_per_dim, self.grid.box_length)
    }

    pub fn build_kinetic(&self, grid: &Arc<SpectralGrid>) -> Result<KineticOperator> {
        KineticOperator::new(grid.clone(), self.dynamics.theta, self.dynamics.mass)
    }

    pub fn build_potential(&self) -> Result<PotentialModel> {
        build_potential_spec(&self.potential)
    }

    /// Construct, band-project, and optionally normalize the initial state.
    pub fn build_initial_state(&self, grid: &Arc<SpectralGrid>) -> Result<WaveFunction> {
        let band = &self.initial_state.band;
        let raw = match &self.initial_state.spec {
            InitialStateSpec::Gaussian {
                center,
                width,
                momentum,
            } => {
                let (c, w, k0) = (center.clone(), *width, momentum.clone());
                WaveFunction::from_position_fn(grid.clone(), move |x| {
                    let r2: f64 = x.iter().zip(&c).map(|(xi, ci)| (xi - ci) * (xi - ci)).sum();
                    let phase: f64 = x.iter().zip(&k0).map(|(xi, ki)| xi * ki).sum();
                    Complex64::from_polar((-r2 / (2.0 * w * w)).exp(), phase)
                })
            }
            InitialStateSpec::ModeSum { modes } => {
                let mut hat = WaveFunction::zeros(grid.clone(), Representation::Frequency);
                let n = grid.points_per_dim() as i64;
                for m in modes {
                    let mut flat = 0usize;
                    for &k in &m.index {
                        if k <= -n / 2 || k >= n / 2 {
                            return Err(Error::config(
                                "initial_state.modes",
                                format!("index {k} outside the usable lattice (-N/2, N/2)"),
                            ));
                        }
                        let storage = k.rem_euclid(n) as usize;
                        flat = flat * grid.points_per_dim() + storage;
                    }
                    hat.amplitudes_mut()[flat] += Complex64::new(m.re, m.im);
                }
                hat
            }
            InitialStateSpec::RandomBand => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.initial_state.seed);
                let mut hat = WaveFunction::zeros(grid.clone(), Representation::Frequency);
                for k in band.mode_indices(grid) {
                    hat.amplitudes_mut()[k] =
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                }
                hat
            }
        };
        let mut projected = band_project(&raw, band)?;
        if projected.norm_l2() < 1e-12 * raw.norm_l2().max(1e-12) {
            return Err(Error::config(
                "initial_state",
                "state has no content inside the band window after projection",
            ));
        }
        if self.initial_state.normalize {
            projected.normalize()?;
        }
        Ok(projected.to_position())
    }

    /// Observable sample times implied by dt and the stride.
    pub fn sample_times(&self) -> Vec<f64> {
        let n_steps = ((self.dynamics.t_end - self.dynamics.s) / self.dynamics.dt).round() as u64;
        let stride = self.dynamics.sample_stride as u64;
        let mut out = vec![self.dynamics.s];
        for step in 1..=n_steps {
            if step % stride == 0 || step == n_steps {
                out.push(self.dynamics.s + step as f64 * self.dynamics.dt);
            }
        }
        out
    }

    /// Uniformly spaced times for the delta certification.
    pub fn delta_times(&self) -> Vec<f64> {
        let n = self.verification.delta_samples;
        if n == 1 {
            return vec![self.dynamics.s];
        }
        (0..n)
            .map(|i| {
                self.dynamics.s
                    + (self.dynamics.t_end - self.dynamics.s) * i as f64 / (n - 1) as f64
            })
            .collect()
    }
}

fn build_potential_spec(spec: &PotentialSpec) -> Result<PotentialModel> {
    match spec {
        PotentialSpec::MovingBump {
            amplitude,
            shape_power,
            drift,
        } => {
            let profile = match drift {
                DriftSpec::Constant { offset } => DriftProfile::constant(offset.clone())?,
                DriftSpec::ArctanDrift { velocity } => DriftProfile::arctan(velocity.clone())?,
                DriftSpec::Periodic { velocity, omega } => {
                    DriftProfile::periodic(velocity.clone(), *omega)?
                }
            };
            moving_bump(*amplitude, *shape_power, profile)
        }
        PotentialSpec::InversePowerRegularized {
            amplitude,
            power,
            smoothing,
        } => inverse_power_regularized(*amplitude, *power, *smoothing),
        PotentialSpec::Static { value } => uniform(*value),
        PotentialSpec::DecayingEnvelope { rate, t0, base } => {
            let base = build_potential_spec(base)?;
            decaying_envelope(base, *rate, *t0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_resolves_with_defaults() {
        let (cfg, defaults) = parse_config("").unwrap();
        assert_eq!(cfg.grid.dim, 1);
        assert_eq!(cfg.grid.points_per_dim, 1024);
        assert_eq!(cfg.grid.box_length, 80.0);
        assert_eq!(cfg.dynamics.dt, 1e-3);
        assert!(matches!(cfg.potential, PotentialSpec::MovingBump { .. }));
        assert!(matches!(cfg.initial_state.spec, InitialStateSpec::RandomBand));
        assert!(defaults.iter().any(|d| d.contains("grid.points_per_dim")));
        assert!(defaults.iter().any(|d| d.contains("dynamics.dt")));
    }

    #[test]
    fn unknown_key_suggests_nearest() {
        let err = parse_config("[potenital]\nkind = \"static\"\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("potenital"), "{msg}");
        assert!(msg.contains("did you mean `potential`?"), "{msg}");
    }

    #[test]
    fn bad_band_names_the_field() {
        let text = r#"
[initial_state]
kind = "random_band"
[initial_state.band]
a = 3.0
r = 0.5
"#;
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("band"), "{err}");
    }

    #[test]
    fn full_scenario_parses() {
        let text = r#"
[grid]
dim = 1
points_per_dim = 64
box_length = 20.0

[dynamics]
theta = 1.0
mass = 0.5
s = 0.0
t_end = 1.0
dt = 0.01
sample_stride = 10

[potential]
kind = "moving_bump"
amplitude = 0.1
shape_power = 1.0

[potential.drift]
kind = "arctan_drift"
velocity = [1.0]

[initial_state]
kind = "gaussian"
width = 1.0
momentum = [1.5]
seed = 3

[initial_state.band]
a = 0.5
r = 3.0

[verification]
gamma_p_pairs = [[0.25, 4.0]]
quad_horizon = 100.0

[output]
dir = "artifacts"
"#;
        let (cfg, _) = parse_config(text).unwrap();
        assert_eq!(cfg.grid.points_per_dim, 64);
        assert_eq!(cfg.verification.gamma_p_pairs, vec![(0.25, 4.0)]);
        assert_eq!(cfg.output.dir, "artifacts");
        let grid = cfg.build_grid().unwrap();
        let phi = cfg.build_initial_state(&grid).unwrap();
        assert!((phi.norm_l2() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wrong_kind_fields_are_rejected() {
        let text = r#"
[potential]
kind = "static"
value = 0.1
amplitude = 0.3
"#;
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("amplitude"), "{err}");
    }

    #[test]
    fn dt_must_divide_horizon() {
        let text = r#"
[dynamics]
t_end = 1.0
dt = 0.3
"#;
        assert!(parse_config(text).is_err());
    }

    #[test]
    fn mode_sum_state_lands_on_requested_modes() {
        let text = r#"
[grid]
points_per_dim = 32
box_length = 6.283185307179586

[dynamics]
t_end = 1.0
dt = 0.01

[initial_state]
kind = "mode_sum"
modes = [{ index = [2], re = 1.0, im = 0.0 }, { index = [-3], re = 0.0, im = 1.0 }]
normalize = false

[initial_state.band]
a = 1.5
r = 4.0
"#;
        let (cfg, _) = parse_config(text).unwrap();
        let grid = cfg.build_grid().unwrap();
        let phi = cfg.build_initial_state(&grid).unwrap().to_frequency();
        assert!(phi.amplitudes()[2].norm() > 0.9);
        assert!(phi.amplitudes()[32 - 3].norm() > 0.9);
    }

    #[test]
    fn sweep_axes_validated() {
        let good = "[sweep]\naxes = [{ param = \"potential.amplitude\", values = [0.1, 0.2] }]";
        assert!(parse_config(good).unwrap().0.sweep.is_some());
        let bad = "[sweep]\naxes = [{ param = \"potential.bogus\", values = [0.1] }]";
        assert!(parse_config(bad).is_err());
    }
}
