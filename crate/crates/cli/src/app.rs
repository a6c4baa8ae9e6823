//! Command-line interface: argument parsing, commands and exit codes.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use distdp_core::checks::{step_stiffness, verify_settled, verify_trajectory, Check};
use distdp_core::dpflow::{
    build, consensus_error, equilibrium, integrate_with, lyapunov_series, tracking_error, FlowKind,
    Method,
};
use distdp_core::random::{random_problem, RandomSpec};
use distdp_core::tolerances::DT_STABILITY_WARN;

use crate::config::{preset_text, Algo, ConfigError, MethodName, Overrides, RunConfig, PRESETS};
use crate::output;

#[derive(Debug, Parser)]
#[command(
    name = "distdp",
    version,
    about = "Simulate distributed policy-evaluation flows"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one flow and write CSV outputs.
    Run(CommonArgs),
    /// Integrate and print PASS/FAIL for every convergence check.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Check all three flows instead of the configured one.
        #[arg(long)]
        all_flows: bool,
        /// Instead of the configured problem, settle this many seeded random
        /// problems and compare their limits with the centralized solution.
        #[arg(long, value_name = "N")]
        sweep: Option<u64>,
    },
    /// Print a bundled preset.
    Preset {
        /// Preset name; lists the presets when omitted.
        name: Option<String>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(short, long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Bundled preset to start from (e.g. paper-sec5).
    #[arg(short, long)]
    pub preset: Option<String>,
    #[arg(long, value_enum)]
    pub algo: Option<Algo>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-final")]
    pub t_final: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodName>,
    /// Seeded uniform [-1, 1] initial state.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(short, long = "output-dir", value_name = "DIR")]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub decimation: Option<i64>,
}

impl CommonArgs {
    fn load(&self) -> Result<RunConfig, Failure> {
        if self.config.is_none() && self.preset.is_none() {
            return Err(Failure::Validation("give --config or --preset".into()));
        }
        let overrides = Overrides {
            preset: self.preset.clone(),
            algo: self.algo,
            dt: self.dt,
            t_final: self.t_final,
            method: self.method,
            seed: self.seed,
            output_dir: self.output_dir.clone(),
            decimation: self.decimation,
        };
        Ok(RunConfig::load(self.config.as_deref(), &overrides)?)
    }
}

/// A command failure and its exit status.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0} check(s) failed")]
    Verification(usize),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Verification(_) => 3,
            Failure::Io(_) => 4,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Read { .. } => Failure::Io(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<distdp_core::Error> for Failure {
    fn from(e: distdp_core::Error) -> Self {
        use distdp_core::Error::*;
        match e {
            Invalid { .. }
            | NotStochastic { .. }
            | NotSymmetric { .. }
            | DimensionMismatch(_)
            | NodeOutOfRange { .. }
            | NonFinite(_) => Failure::Validation(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Final numbers of a run, also written to `summary.txt`.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub lines: Vec<(String, String)>,
    pub final_tracking_error: f64,
}

fn warn_if_stiff(cfg: &RunConfig, flow: &distdp_core::dpflow::LinearFlow) -> Result<f64, Failure> {
    let stiffness = step_stiffness(flow, cfg.dt)?;
    if stiffness > DT_STABILITY_WARN {
        log::warn!(
            "dt * max|eig| = {stiffness:.3} exceeds {DT_STABILITY_WARN}; the fixed-step integrator may be unstable"
        );
    }
    Ok(stiffness)
}

/// Runs the configured flow and writes `trajectory.csv`, `metrics.csv`,
/// `equilibrium.csv` and `summary.txt` into the output directory.
pub fn run(cfg: &RunConfig) -> Result<RunSummary, Failure> {
    let started = Instant::now();
    let prob = &cfg.problem;
    let kind = cfg.algo.kind();
    let flow = build(prob, kind);
    let stiffness = warn_if_stiff(cfg, &flow)?;
    let x0 = cfg.initial_state();
    let traj = integrate_with(
        &flow,
        &x0,
        cfg.dt,
        cfg.t_final,
        Method::from(cfg.method),
        cfg.decimation,
    )?;
    let report = equilibrium(prob, kind)?;

    let consensus = flow
        .blocks()
        .iter()
        .map(|b| Ok((b.name.clone(), consensus_error(&traj, &b.name)?)))
        .collect::<Result<Vec<_>, distdp_core::Error>>()?;
    let tracking = tracking_error(&traj, kind.consensus_block(), &report.theta_c)?;
    let monitors = lyapunov_series(&traj, &report)?;

    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir)?;
    output::write_trajectory(&dir.join("trajectory.csv"), &traj)?;
    output::write_metrics(
        &dir.join("metrics.csv"),
        &traj,
        &output::Metrics {
            consensus: consensus.clone(),
            tracking: &tracking,
            monitors: &monitors,
        },
    )?;
    output::write_equilibrium(&dir.join("equilibrium.csv"), &report, prob.n_features())?;

    let last = |s: &[(f64, f64)]| s.last().map(|p| p.1).unwrap_or(f64::NAN);
    let mut lines: Vec<(String, String)> = vec![
        ("algo".into(), kind.name().into()),
        ("agents".into(), prob.n_agents().to_string()),
        ("states".into(), prob.core().n_states().to_string()),
        ("features".into(), prob.n_features().to_string()),
        ("gamma".into(), prob.core().gamma().to_string()),
        ("dt".into(), cfg.dt.to_string()),
        ("t_final".into(), cfg.t_final.to_string()),
        ("method".into(), format!("{:?}", cfg.method).to_lowercase()),
        ("recorded_samples".into(), traj.len().to_string()),
        ("dt_times_spectral_radius".into(), output::num(stiffness)),
        ("e_t_block".into(), kind.consensus_block().into()),
        ("e_0".into(), output::num(tracking[0].1)),
        ("e_final".into(), output::num(last(&tracking))),
    ];
    for (b, s) in &consensus {
        lines.push((format!("consensus_{b}_final"), output::num(last(s))));
    }
    for m in &monitors {
        lines.push((format!("{}_final", m.name), output::num(last(&m.values))));
    }
    if kind == FlowKind::Version1 {
        let l_bar = prob.stack().l_bar;
        let w = flow.slice(traj.final_state(), "w")?;
        lines.push((
            "lim_Lw_norm_inf".into(),
            output::num(l_bar.matvec(w).norm_inf()),
        ));
    }
    lines.push((
        "wall_time_s".into(),
        format!("{:.3}", started.elapsed().as_secs_f64()),
    ));
    output::write_summary(&dir.join("summary.txt"), &lines)?;

    Ok(RunSummary {
        output_dir: dir.clone(),
        final_tracking_error: last(&tracking),
        lines,
    })
}

/// Runs and checks the configured flow (or all flows); returns the number
/// of failed checks.
pub fn verify(cfg: &RunConfig, all_flows: bool, out: &mut impl Write) -> Result<usize, Failure> {
    let algos: Vec<Algo> = if all_flows {
        vec![Algo::Central, Algo::V1, Algo::V2]
    } else {
        vec![cfg.algo]
    };
    let mut failed = 0;
    for algo in algos {
        let cfg = RunConfig {
            algo,
            ..cfg.clone()
        };
        let flow = build(&cfg.problem, algo.kind());
        warn_if_stiff(&cfg, &flow)?;
        let traj = integrate_with(
            &flow,
            &cfg.initial_state(),
            cfg.dt,
            cfg.t_final,
            Method::from(cfg.method),
            cfg.decimation,
        )?;
        let v = verify_trajectory(&cfg.problem, &traj, cfg.dt)?;
        output::print_verification(out, &v)?;
        failed += v.checks.iter().filter(|c| !c.passed).count();
    }
    Ok(failed)
}

/// Settles `n` seeded random problems; returns the number of failed
/// problems.
pub fn sweep(n: u64, dt: f64, out: &mut impl Write) -> Result<usize, Failure> {
    let spec = RandomSpec::default();
    let mut failed = 0;
    for seed in 0..n {
        let prob = random_problem(&spec, seed);
        let checks = verify_settled(&prob, dt)?;
        let bad: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
        let worst = checks
            .iter()
            .filter(|c| c.name.ends_with("_limit"))
            .map(|c| c.measured)
            .fold(0.0, f64::max);
        writeln!(
            out,
            "{} seed {seed}: N={} |S|={} q={} gamma={} worst limit error {worst:.3e}",
            if bad.is_empty() { "PASS" } else { "FAIL" },
            prob.n_agents(),
            prob.core().n_states(),
            prob.n_features(),
            prob.core().gamma()
        )?;
        for c in &bad {
            writeln!(out, "  {c}")?;
        }
        failed += usize::from(!bad.is_empty());
    }
    Ok(failed)
}

fn execute(cli: Cli, out: &mut impl Write) -> Result<(), Failure> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.load()?;
            let summary = run(&cfg)?;
            writeln!(out, "wrote {}", summary.output_dir.display())?;
            for (k, v) in &summary.lines {
                writeln!(out, "{k} = {v}")?;
            }
            Ok(())
        }
        Command::Verify {
            common,
            all_flows,
            sweep: Some(n),
        } => {
            if all_flows {
                return Err(Failure::Validation(
                    "--all-flows has no effect with --sweep".into(),
                ));
            }
            let dt = common.dt.unwrap_or(0.01);
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Failure::Validation(format!(
                    "invalid `dt`: {dt} is not positive"
                )));
            }
            match sweep(n, dt, out)? {
                0 => Ok(()),
                k => Err(Failure::Verification(k)),
            }
        }
        Command::Verify {
            common,
            all_flows,
            sweep: None,
        } => {
            let cfg = common.load()?;
            match verify(&cfg, all_flows, out)? {
                0 => Ok(()),
                k => Err(Failure::Verification(k)),
            }
        }
        Command::Preset { name: None } => {
            for (n, _) in PRESETS {
                writeln!(out, "{n}")?;
            }
            Ok(())
        }
        Command::Preset { name: Some(name) } => {
            let text = preset_text(&name)
                .ok_or_else(|| Failure::Validation(format!("unknown preset `{name}`")))?;
            write!(out, "{text}")?;
            Ok(())
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = write!(
                if e.use_stderr() {
                    err as &mut dyn Write
                } else {
                    out as &mut dyn Write
                },
                "{}",
                e.render()
            );
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            f.exit_code()
        }
    }
}
