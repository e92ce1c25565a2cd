//! `mediamem` command-line driver.
//!
//! Exit codes: 0 success, 2 config error, 3 data error, 4 estimation error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mediamem::config::RunConfig;
use mediamem::inference::{ModelReport, TiesMethod};
use mediamem::panel::PanelTable;
use mediamem::pipeline::{
    censor_year, load_inputs, run_models, run_panel, run_scoring, run_topics, tokenize, Outputs,
};
use mediamem::synth::{generate_mini, MiniSpec};
use mediamem::{Error, ErrorKind, Result};

#[derive(Parser)]
#[command(name = "mediamem", version, about = "Media memorability scores and funding hazard models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate all inputs without computing anything.
    IngestCheck(Overrides),
    /// Yearly networks, brand scores, favorability and topic intensities.
    Score(Overrides),
    /// Pooled network and topic keywords only.
    Topics(Overrides),
    /// Scores plus the startup-year panel, descriptives and correlations.
    Panel(Overrides),
    /// Full pipeline: scores, panel and every configured model.
    Fit(Overrides),
    /// Fit the configured models on an existing panel.csv and print the table.
    Report(Overrides),
    /// Write the synthetic mini corpus and its config.
    Synth {
        /// Target directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = MiniSpec::default().seed)]
        seed: u64,
    },
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Topic detection seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    ties: Option<TiesMethod>,
    #[arg(long)]
    censor_year: Option<i32>,
    #[arg(long)]
    threads: Option<usize>,
}

impl Overrides {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(out) = &self.out {
            // Command-line paths are relative to the working directory.
            cfg.output_dir = std::path::absolute(out)
                .map_err(|e| Error::Config(format!("--out {}: {e}", out.display())))?;
        }
        if let Some(s) = self.seed {
            cfg.topics.seed = s;
        }
        if let Some(w) = self.window {
            cfg.window = w;
        }
        if let Some(t) = self.ties {
            cfg.ties = t;
        }
        if let Some(y) = self.censor_year {
            cfg.censor_year = Some(y);
        }
        if let Some(n) = self.threads {
            cfg.threads = Some(n);
        }
        cfg.validate()?;
        if let Some(n) = cfg.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        }
        Ok(cfg)
    }
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn print_warnings(report: &ModelReport) {
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
}

fn ingest_check(cfg: &RunConfig) -> Result<()> {
    let inputs = load_inputs(cfg)?;
    let years = inputs.docs.years();
    let labels: usize = inputs.docs.iter().map(|d| d.labels.len()).sum();
    println!("documents: {}", inputs.docs.len());
    if let (Some(a), Some(b)) = (years.first(), years.last()) {
        println!("years: {a}-{b} ({} with news)", years.len());
    }
    println!("labels: {labels}");
    println!(
        "startups: {} ({} funded)",
        inputs.registry.len(),
        inputs.registry.iter().filter(|s| s.is_funded()).count()
    );
    println!("censor year: {}", censor_year(cfg, &inputs.docs)?);
    println!("models: {}", cfg.model_specs().len());
    Ok(())
}

fn score(cfg: &RunConfig, out: &Outputs) -> Result<()> {
    let inputs = load_inputs(cfg)?;
    let run = run_scoring(cfg, &inputs)?;
    for (year, terms, edges) in run.term_counts() {
        println!("{year}: {terms} terms, {edges} edges");
    }
    println!("topics: {}", run.topics.k);
    print_written(&out.write_scores(&run)?);
    Ok(())
}

fn topics(cfg: &RunConfig, out: &Outputs) -> Result<()> {
    let inputs = load_inputs(cfg)?;
    let (global, model) = run_topics(cfg, &tokenize(cfg, &inputs))?;
    println!("pooled network: {} terms, {} edges", global.node_count(), global.edge_count());
    println!("topics: {}", model.k);
    print_written(&out.write_topics(&global, &model)?);
    Ok(())
}

fn panel(cfg: &RunConfig, out: &Outputs) -> Result<PanelTable> {
    let inputs = load_inputs(cfg)?;
    let censor = censor_year(cfg, &inputs.docs)?;
    let run = run_scoring(cfg, &inputs)?;
    let panel = run_panel(cfg, &inputs.registry, &run.table, censor)?;
    println!(
        "panel: {} rows, {} startups, {} events, censored at {censor}",
        panel.len(),
        panel.startups().len(),
        panel.events()
    );
    let mut written = out.write_scores(&run)?;
    written.extend(out.write_panel(&panel)?);
    print_written(&written);
    Ok(panel)
}

fn fit(cfg: &RunConfig, out: &Outputs) -> Result<()> {
    let panel = panel(cfg, out)?;
    let report = run_models(cfg, &panel)?;
    print_warnings(&report);
    print_written(&out.write_report(&report)?);
    Ok(())
}

fn report(cfg: &RunConfig, out: &Outputs) -> Result<()> {
    let path = out.path("panel.csv");
    if !path.is_file() {
        return Err(Error::Config(format!(
            "{} not found; run `mediamem panel` first",
            path.display()
        )));
    }
    let panel = PanelTable::read_csv(&path)?;
    let report = run_models(cfg, &panel)?;
    print_warnings(&report);
    print!("{}", report.to_text());
    out.write_report(&report)?;
    Ok(())
}

fn synth(dir: &Path, seed: u64) -> Result<()> {
    let spec = MiniSpec {
        seed,
        ..MiniSpec::default()
    };
    let mini = generate_mini(&spec)?;
    mini.write(dir)?;
    println!(
        "wrote {} documents and {} startups to {}",
        mini.documents.len(),
        mini.registry.len(),
        dir.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let o = match &cli.command {
        Command::Synth { out, seed } => return synth(out, *seed),
        Command::IngestCheck(o)
        | Command::Score(o)
        | Command::Topics(o)
        | Command::Panel(o)
        | Command::Fit(o)
        | Command::Report(o) => o,
    };
    let cfg = o.load()?;
    let out = Outputs::new(cfg.output_path());
    match cli.command {
        Command::IngestCheck(_) => ingest_check(&cfg),
        Command::Score(_) => score(&cfg, &out),
        Command::Topics(_) => topics(&cfg, &out),
        Command::Panel(_) => panel(&cfg, &out).map(|_| ()),
        Command::Fit(_) => fit(&cfg, &out),
        Command::Report(_) => report(&cfg, &out),
        Command::Synth { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Data => 3,
                ErrorKind::Estimation => 4,
            })
        }
    }
}
