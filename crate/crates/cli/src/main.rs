use biharm_cli::config::{Cli, RunConfig};
use biharm_cli::error::{CliError, CliResult, EXIT_SUCCESS};
use biharm_cli::output::OutputDir;
use biharm_cli::run::{run, ErrorRecord, ERROR_JSON};
use clap::Parser;

const THREADS_VAR: &str = "BIHARM_THREADS";

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_VAR} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot configure {n} threads: {e}")))
}

fn report(e: &CliError, out: Option<&OutputDir>) -> i32 {
    let record = ErrorRecord::from_error(e);
    if let Some(dir) = out {
        if let Err(w) = dir.write_json(ERROR_JSON, &record) {
            log::error!("could not write the error record: {w}");
        }
    }
    eprintln!("{}", serde_json::to_string(&record).unwrap_or_else(|_| e.to_string()));
    record.exit_code
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match configure_threads().and_then(|_| OutputDir::acquire(&cli.out)) {
        Err(e) => report(&e, None),
        Ok(out) => match RunConfig::from_cli(&cli).and_then(|cfg| run(&cfg, &out)) {
            Ok(()) => EXIT_SUCCESS,
            Err(e) => report(&e, Some(&out)),
        },
    };
    std::process::exit(code);
}
