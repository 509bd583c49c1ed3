use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use upwind_cli::config::{parse_config, ExperimentConfig, ScenarioConfig};
use upwind_cli::error::{CliError, CliResult};
use upwind_cli::scenario::{analyze, operator_check, output_dir, run_scenario, Outcome};

#[derive(Parser, Debug)]
#[command(name = "upwind", version, about = "Nonlocal upwind schemes for scalar conservation laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Experiment description (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; falls back to UPWIND_THREADS, then to all cores.
    #[arg(long, env = "UPWIND_THREADS")]
    threads: Option<usize>,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the scenario named in the config.
    Run(Common),
    /// Run a `zero_filter_sweep` or `filter_stability_sweep` scenario.
    Sweep(Common),
    /// Compare the folded operator with its defining sum on the initial state.
    OperatorCheck(Common),
    /// Run a `resolvent_check` scenario.
    ResolventCheck(Common),
    /// Diagnostics of a solution CSV.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        /// Adds the exact-solution error for Burgers Riemann data.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(common: &Common) -> CliResult<ExperimentConfig> {
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::config("threads", "must be at least 1"));
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut cfg = parse_config(&common.config)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn expect_kind(cfg: &ExperimentConfig, kinds: &[&str], command: &str) -> CliResult<()> {
    let name = cfg.scenario.name();
    if !kinds.contains(&name) {
        return Err(CliError::config("scenario.kind", format!("`{command}` expects one of {kinds:?}, config has `{name}`")));
    }
    Ok(())
}

fn scenario(common: &Common, kinds: Option<(&[&str], &str)>) -> CliResult<Outcome> {
    let cfg = load(common)?;
    if let Some((kinds, command)) = kinds {
        expect_kind(&cfg, kinds, command)?;
    }
    let out = output_dir(Some(&cfg), common.out.as_deref());
    log::info!("scenario {} -> {}", cfg.scenario.name(), out.display());
    run_scenario(&cfg, &out)
}

fn dispatch(cli: Cli) -> CliResult<Outcome> {
    match cli.command {
        Command::Run(c) => scenario(&c, None),
        Command::Sweep(c) => scenario(&c, Some((&["zero_filter_sweep", "filter_stability_sweep"], "sweep"))),
        Command::ResolventCheck(c) => scenario(&c, Some((&["resolvent_check"], "resolvent-check"))),
        Command::OperatorCheck(c) => {
            let cfg = load(&c)?;
            if !matches!(cfg.scenario, ScenarioConfig::Run { .. }) {
                log::warn!("operator-check ignores scenario `{}`", cfg.scenario.name());
            }
            let out = output_dir(Some(&cfg), c.out.as_deref());
            operator_check(&cfg, &out)
        }
        Command::Analyze { input, config, out } => {
            let cfg = config.as_deref().map(parse_config).transpose()?;
            let out = out.unwrap_or_else(|| output_dir(cfg.as_ref(), None));
            analyze(Path::new(&input), cfg.as_ref(), &out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(outcome) => {
            println!("{}", outcome.summary());
            if outcome.pass() {
                ExitCode::SUCCESS
            } else {
                for (name, detail) in &outcome.failures {
                    eprintln!("{}", CliError::Assertion { name: name.clone(), detail: detail.clone() });
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
