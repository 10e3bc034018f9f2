use std::process::ExitCode;

use clap::Parser;
use ppife_cli::{settings_from, Args, CliError, Settings};
use ppife_core::study::{export_field, run_study_with};

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("PPIFE_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("PPIFE_THREADS must be a positive integer, got `{raw}`")))?;
    // fails only if a global pool already exists
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn run(settings: &Settings) -> Result<(), CliError> {
    let cfg = &settings.run;
    eprintln!(
        "theta = {}, epsilon = {}, sigma0 = {}, alpha = {}, beta = ({}, {}), dt = {} h, T = {}, init = {}",
        cfg.theta, cfg.epsilon, cfg.sigma0, cfg.alpha, cfg.beta_minus, cfg.beta_plus, cfg.dt_ratio, cfg.t_final, cfg.init
    );
    let finest = *cfg.study.last().expect("validated study is nonempty");
    let mut flush_error = None;
    let report = run_study_with(cfg, |report, outcome| {
        let r = &outcome.record;
        eprintln!("N = {:>5}: {:.2}s, {} solver iterations", r.n_side, outcome.seconds, outcome.total_iterations);
        if let Some(path) = &settings.csv {
            if let Err(source) = std::fs::write(path, report.to_csv()) {
                flush_error.get_or_insert(ppife_core::Error::Io { path: path.clone(), source });
            }
        }
        if r.n_side == finest {
            if let Some(path) = &settings.export {
                if let Err(e) = export_field(&outcome.space, &outcome.solution, path) {
                    flush_error.get_or_insert(e);
                }
            }
        }
    })?;
    if let Some(e) = flush_error {
        return Err(e.into());
    }
    print!("{}", report.to_table());
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = configure_threads().and_then(|_| settings_from(&args)).and_then(|s| run(&s));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ CliError::Usage(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            let mut msg = format!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                msg.push_str(&format!("\n  caused by: {s}"));
                source = s.source();
            }
            eprintln!("{msg}");
            ExitCode::FAILURE
        }
    }
}
