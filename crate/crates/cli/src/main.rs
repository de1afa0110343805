use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use plaque_cli::exec::ThreadPool;
use plaque_cli::run::execute;
use plaque_cli::scenario::{load_scenario, preset, RunMode, Scenario, Stopping, PRESET_NAMES};
use plaque_cli::sweep;

#[derive(Parser)]
#[command(name = "plaque", version, about = "Two-scale plaque growth with parallel-in-time integration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run(Common),
    /// Run one scenario for several process counts.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Iteration counts; tabulates the closed-form counts without simulating.
        #[arg(long = "k", value_delimiter = ',')]
        k: Vec<usize>,
    },
    /// List the built-in scenarios.
    Presets {
        /// Write each preset as `<name>.json` into this directory.
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file, or a preset name.
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum)]
    mode: Option<RunMode>,
    /// Process count; a comma-separated list for `sweep`.
    #[arg(long = "P", value_delimiter = ',')]
    processes: Vec<usize>,
    /// Worker threads for fine sweeps (default: available parallelism).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    stopping: Option<Stopping>,
}

impl Common {
    fn scenario(&self) -> anyhow::Result<Scenario> {
        let mut s = load_scenario(&self.scenario)?;
        if let Some(m) = self.mode {
            s.mode = m;
        }
        if let Some(st) = self.stopping {
            s.stopping = st;
        }
        if let Some(t) = self.threads {
            s.threads = Some(t);
        }
        Ok(s)
    }

    fn threads(&self, s: &Scenario) -> usize {
        s.threads.unwrap_or_else(|| ThreadPool::available().threads())
    }

    fn out(&self, s: &Scenario) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(&s.out_dir))
    }
}

fn run(c: &Common) -> anyhow::Result<()> {
    let mut s = c.scenario()?;
    match c.processes.as_slice() {
        [] => {}
        [p] => s.schedule.processes = *p,
        _ => anyhow::bail!("run takes a single --P value; use sweep for a list"),
    }
    if s.mode == RunMode::Serial && s.schedule.processes > 1 {
        s.mode = RunMode::Parareal;
    }
    let out = execute(&s, c.threads(&s))?;
    let dir = c.out(&s);
    out.write(&dir)?;
    print!("{}", out.report.table());
    eprintln!("wrote {}", dir.display());
    Ok(())
}

fn sweep_cmd(c: &Common, k: &[usize]) -> anyhow::Result<bool> {
    let mut s = c.scenario()?;
    if c.processes.is_empty() {
        anyhow::bail!("sweep needs --P with one or more process counts");
    }
    let report = if k.is_empty() {
        if s.mode == RunMode::Serial {
            s.mode = RunMode::Parareal;
        }
        sweep::simulate(&s, &c.processes, c.threads(&s))?
    } else {
        sweep::formulas(&s, &c.processes, k)?
    };
    let dir = c.out(&s);
    report.write(&dir)?;
    print!("{}", report.table());
    Ok(report.failed().is_empty())
}

fn presets(write: Option<&PathBuf>) -> anyhow::Result<()> {
    for name in PRESET_NAMES {
        let s = preset(name).expect("listed preset exists");
        let n = s.schedule_obj()?.n_steps;
        println!("{name:<12} model {:?}, {} d at {} d ({n} steps)", s.model, s.schedule.t_end_days, s.schedule.dt_days);
        if let Some(dir) = write {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            std::fs::write(dir.join(format!("{name}.json")), s.to_json() + "\n")?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => run(c).map(|_| true),
        Command::Sweep { common, k } => sweep_cmd(common, k),
        Command::Presets { write } => presets(write.as_ref()).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: some sweep columns failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
