//! Command-line driver: check assumptions, run the full verification
//! pipeline, run convergence studies and parameter sweeps, and pretty-print
//! reports.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use fracstab::bounds::CheckStatus;
use fracstab::scenario::{
    check_pipeline, convergence_study, load_config, render_report_json, render_sweep_csv,
    run_pipeline, sweep, write_artifacts, RunOutcome, ScenarioConfig,
};

#[derive(Parser)]
#[command(name = "fracstab", version, about = "Split-step simulator and energy-stability verifier for fractional Schrodinger equations with time-dependent potentials")]
struct Cli {
    /// Scenario configuration file (TOML)
    #[arg(long, global = true, default_value = "scenario.toml")]
    config: PathBuf,

    /// Output directory; overrides `output.dir` from the config
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for sweep rows (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Suppress warnings and progress chatter on stderr
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the assumptions (Hardy constant, integrability, positivity)
    /// and derive the stability constants; no evolution
    Check,
    /// Full pipeline: check, derive, evolve, verify; writes CSV + JSON report
    Run,
    /// Self-convergence study over a dt ladder
    Converge {
        /// Comma-separated dt ladder, each entry half the previous
        /// (default: 4*dt, 2*dt, dt from the config)
        #[arg(long)]
        ladder: Option<String>,
        /// Residual tolerance the recommended dt should achieve
        #[arg(long, default_value_t = 1e-5)]
        tolerance: f64,
    },
    /// Run the configured parameter sweep
    Sweep,
    /// Pretty-print a previously written JSON report
    Report {
        /// Path to a report.json
        file: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<i32> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::Check => {
            let (cfg, defaults) = load_cfg(cli)?;
            let outcome = check_pipeline(&cfg, &defaults)?;
            emit_warnings(cli, &outcome);
            let dir = out_dir(cli, &cfg);
            std::fs::create_dir_all(&dir)?;
            let path = dir.join(&cfg.output.report);
            std::fs::write(&path, render_report_json(&outcome)?)?;
            if !cli.quiet {
                print_summary(&outcome);
                println!("report: {}", path.display());
            }
            Ok(outcome.exit_code)
        }
        Command::Run => {
            let (cfg, defaults) = load_cfg(cli)?;
            let outcome = run_pipeline(&cfg, &defaults)?;
            emit_warnings(cli, &outcome);
            let dir = out_dir(cli, &cfg);
            let (csv, report) = write_artifacts(&outcome, &dir)?;
            if !cli.quiet {
                print_summary(&outcome);
                println!("series: {csv}");
                println!("report: {report}");
            }
            Ok(outcome.exit_code)
        }
        Command::Converge { ladder, tolerance } => {
            let (cfg, _) = load_cfg(cli)?;
            let rungs = match ladder {
                Some(text) => text
                    .split(',')
                    .map(|s| s.trim().parse::<f64>().context("parsing --ladder"))
                    .collect::<anyhow::Result<Vec<f64>>>()?,
                None => vec![cfg.dynamics.dt * 4.0, cfg.dynamics.dt * 2.0, cfg.dynamics.dt],
            };
            let study = convergence_study(&cfg, &rungs, *tolerance)?;
            let dir = out_dir(cli, &cfg);
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("converge.json");
            std::fs::write(&path, serde_json::to_string_pretty(&study)?)?;
            println!(
                "{:>12} {:>14} {:>14} {:>8}",
                "dt", "terminal_diff", "max_residual", "order"
            );
            for r in &study.rungs {
                println!(
                    "{:>12.3e} {:>14} {:>14} {:>8}",
                    r.dt,
                    r.terminal_diff.map_or("-".into(), |d| format!("{d:.6e}")),
                    r.max_residual.map_or("-".into(), |d| format!("{d:.6e}")),
                    r.order.map_or("-".into(), |o| format!("{o:.3}")),
                );
            }
            if let Some(order) = study.fitted_order {
                println!("fitted order: {order:.3}");
            }
            if let Some(dt) = study.recommended_dt {
                println!("recommended dt for residual <= {tolerance:.1e}: {dt:.3e}");
            }
            for w in &study.warnings {
                eprintln!("warning: {w}");
            }
            println!("study: {}", path.display());
            Ok(0)
        }
        Command::Sweep => {
            let (cfg, _) = load_cfg(cli)?;
            let Some(axes) = cfg.sweep.clone() else {
                bail!("the config has no [sweep] section");
            };
            let table = sweep(&cfg, &axes)?;
            let dir = out_dir(cli, &cfg);
            std::fs::create_dir_all(&dir)?;
            let csv_path = dir.join("sweep.csv");
            std::fs::write(&csv_path, render_sweep_csv(&table))?;
            let json_path = dir.join("sweep.json");
            std::fs::write(&json_path, serde_json::to_string_pretty(&table)?)?;
            if !cli.quiet {
                for row in &table.rows {
                    println!(
                        "{:?} -> {} (exit {})",
                        row.values,
                        row.status,
                        row.exit_code.map_or("-".into(), |c| c.to_string())
                    );
                }
                println!("table: {} / {}", csv_path.display(), json_path.display());
            }
            Ok(table.worst_exit())
        }
        Command::Report { file } => {
            let text = std::fs::read_to_string(file)
                .with_context(|| format!("reading {}", file.display()))?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            print_report_value(&value);
            Ok(0)
        }
    }
}

fn load_cfg(cli: &Cli) -> anyhow::Result<(ScenarioConfig, Vec<String>)> {
    load_config(&cli.config).with_context(|| format!("loading {}", cli.config.display()))
}

fn out_dir(cli: &Cli, cfg: &ScenarioConfig) -> PathBuf {
    cli.out
        .clone()
        .unwrap_or_else(|| Path::new(&cfg.output.dir).to_path_buf())
}

fn emit_warnings(cli: &Cli, outcome: &RunOutcome) {
    if cli.quiet {
        return;
    }
    for w in &outcome.report.warnings {
        eprintln!("warning: {w}");
    }
}

fn status_word(status: CheckStatus) -> &'static str {
    match status {
        CheckStatus::Pass => "PASS",
        CheckStatus::Fail => "FAIL",
        CheckStatus::NotCertified => "NOT CERTIFIED",
    }
}

fn print_summary(outcome: &RunOutcome) {
    let rep = &outcome.report;
    for (name, ok) in [
        ("assumption 1 (Hardy + integrability)", rep.certificates.assumption1),
        ("assumption 2 (shifted positivity)", rep.certificates.assumption2),
        ("assumption 3 (strict positivity)", rep.certificates.assumption3),
    ] {
        println!("{name}: {}", if ok { "certified" } else { "not certified" });
    }
    if let Some(c) = &rep.constants {
        println!(
            "constants: kappa={:.6e} a~={:.6e} R~={} a1~={} R1~={} c_m={:.6e} c_M={}",
            c.kappa,
            c.a_tilde,
            c.r_tilde.map_or("-".into(), |v| format!("{v:.6e}")),
            c.a1_tilde.map_or("-".into(), |v| format!("{v:.6e}")),
            c.r1_tilde.map_or("-".into(), |v| format!("{v:.6e}")),
            c.c_lower,
            c.c_upper.map_or("-".into(), |v| format!("{v:.6e}")),
        );
    }
    let v = &rep.verifications;
    for m in [
        &v.unitarity,
        &v.hardy_along_flow,
        &v.theorem1_lower,
        &v.theorem1_upper,
        &v.theorem2_lower,
        &v.theorem2_upper,
        &v.energy_sandwich,
        &v.corollary1_lower,
        &v.corollary1_upper,
    ] {
        match m.min_margin {
            Some(margin) => println!(
                "{:<18} {} (min margin {:.3e} at t = {:.4})",
                m.name,
                status_word(m.status),
                margin,
                m.argmin_time.unwrap_or(f64::NAN)
            ),
            None => println!("{:<18} {}", m.name, status_word(m.status)),
        }
    }
    for s in &v.sobolev {
        println!(
            "sobolev g={:.3} p={:.3} {} (sup ratio {} <= c = {:.6e})",
            s.gamma,
            s.p,
            status_word(s.status),
            s.sup_ratio.map_or("-".into(), |r| format!("{r:.6e}")),
            s.c
        );
    }
    if let Some(r) = rep.identity_residual_max {
        println!("max identity residual: {r:.3e}");
    }
    println!("exit code: {}", rep.exit_code);
}

fn print_report_value(value: &serde_json::Value) {
    let get = |path: &[&str]| -> Option<&serde_json::Value> {
        let mut cur = value;
        for p in path {
            cur = cur.get(p)?;
        }
        Some(cur)
    };
    println!(
        "schema {} | exit code {}",
        get(&["schema_version"]).and_then(|v| v.as_u64()).unwrap_or(0),
        get(&["exit_code"]).and_then(|v| v.as_i64()).unwrap_or(-1)
    );
    if let Some(c) = get(&["certificates"]) {
        println!("certificates: {c}");
    }
    if let Some(consts) = get(&["constants"]) {
        println!("constants:");
        println!("{}", serde_json::to_string_pretty(consts).unwrap_or_default());
    }
    if let Some(ver) = get(&["verifications"]).and_then(|v| v.as_object()) {
        println!("verifications:");
        for (name, m) in ver {
            if name == "sobolev" {
                if let Some(arr) = m.as_array() {
                    for s in arr {
                        println!(
                            "  sobolev gamma={} p={}: {}",
                            s.get("gamma").unwrap_or(&serde_json::Value::Null),
                            s.get("p").unwrap_or(&serde_json::Value::Null),
                            s.get("status").unwrap_or(&serde_json::Value::Null)
                        );
                    }
                }
                continue;
            }
            println!(
                "  {name}: {}",
                m.get("status").unwrap_or(&serde_json::Value::Null)
            );
        }
    }
    for w in get(&["warnings"]).and_then(|v| v.as_array()).unwrap_or(&vec![]) {
        println!("warning: {w}");
    }
}
