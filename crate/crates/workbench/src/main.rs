use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use workbench::config::RunConfig;
use workbench::report::Report;
use workbench::{commands, verify};

#[derive(Parser)]
#[command(name = "workbench", version, about = "Exact checks of invariants, orbital integrals and Satake transforms over F_q((pi))")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    over: Overrides,
}

#[derive(Subcommand)]
enum Cmd {
    /// Invariant of a seeded pair and of its matched pair.
    Invariant,
    /// Orbital integrals of a seeded pair and its matched pair against `hecke`.
    Orbital,
    /// Satake transform of `hecke`, and its partial transform when `split` is set.
    Satake,
    /// Run one suite, or all of them.
    Verify,
}

#[derive(Args)]
struct Overrides {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    precision: Option<u32>,
    #[arg(long, global = true)]
    window: Option<i64>,
    #[arg(long, global = true)]
    suite: Option<String>,
    #[arg(long, global = true)]
    q: Option<u8>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    hecke: Option<String>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for report.jsonl, summary.csv and run.json; JSONL goes to
    /// stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = &self.$f { cfg.$f = v.clone(); })* };
        }
        macro_rules! set_opt {
            ($($f:ident),*) => { $(if let Some(v) = &self.$f { cfg.$f = Some(v.clone()); })* };
        }
        set!(seed, precision, window, hecke, samples, threads);
        set_opt!(suite, q, n);
    }
}

fn load(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match &cli.over.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cli.over.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let start = Instant::now();
    let result = match cli.cmd {
        Cmd::Invariant => commands::invariant(&cfg),
        Cmd::Orbital => commands::orbital(&cfg),
        Cmd::Satake => commands::satake(&cfg),
        Cmd::Verify => verify(&cfg),
    };
    let report: Report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let written = match &cli.over.out {
        Some(dir) => report.write_to(dir).and_then(|()| {
            let run = json!({ "precision": cfg.precision, "threads": cfg.threads, "version": env!("CARGO_PKG_VERSION"), "config": cfg });
            std::fs::write(dir.join("run.json"), serde_json::to_string_pretty(&run)? + "\n")?;
            Ok(())
        }),
        None => {
            print!("{}", report.to_jsonl());
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: writing report: {e:#}");
        return ExitCode::from(1);
    }
    for r in report.failures() {
        eprintln!("FAIL {} {}{}", r.suite, r.id, r.error.as_deref().map(|e| format!(": {e}")).unwrap_or_default());
    }
    let failed = report.failures().count();
    eprintln!("{} records, {} failed, precision {}, {} threads, {:.1}s", report.records.len(), failed, cfg.precision, cfg.threads, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
