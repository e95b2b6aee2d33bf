use std::process::ExitCode;

use mrv_lab_cli::{config::SEED_ENV, parse_config, run};

fn main() -> ExitCode {
    let env_seed = std::env::var(SEED_ENV).ok();
    let cfg = match parse_config(std::env::args_os(), env_seed.as_deref()) {
        Ok(Some(cfg)) => cfg,
        Ok(None) => return ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mrv-lab: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&cfg) {
        Ok(outcome) => {
            for path in &outcome.files {
                println!("wrote {}", path.display());
            }
            println!(
                "{} scenarios in {:.1} s (seed {})",
                outcome.report.metrics.len(),
                outcome.elapsed_secs,
                cfg.master_seed
            );
            if outcome.report.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in &outcome.report.failures {
                    eprintln!(
                        "mrv-lab: scenario variance {}, n {}, {} failed: {}",
                        f.key.population_variance,
                        f.key.sample_size,
                        f.key.kind.label(),
                        f.error
                    );
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("mrv-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
