//! The experiment pipeline end to end: train two configurations over a few
//! seeds, then summarize them into a report with charts.

use expectrl::harness::{build_report, default_report_dir, train, Algorithm, RunConfig};
use expectrl::agents::EpsilonSchedule;

fn main() -> expectrl::Result<()> {
    let root = std::env::temp_dir().join("expectrl-pipeline-example");
    let mut dirs = Vec::new();
    for alpha in [0.5, 0.2] {
        let mut config = RunConfig::new("cliff_grid", Algorithm::QExpectile);
        config.alpha = alpha;
        config.n_seeds = 3;
        config.n_eval = 10;
        config.tabular.episodes = 1500;
        config.tabular.epsilon = EpsilonSchedule {
            start: 1.0,
            end: 0.1,
            decay_episodes: 750,
        };
        let (dir, record) = train(&config, &root, None)?;
        println!("{}: {} seeds, {} failed", record.run_id, record.seeds.len(), record.failed());
        dirs.push(dir);
    }
    let report = build_report(&dirs)?;
    for row in &report.rows {
        println!(
            "{:<28} R_worst {:+.3} ± {:.3}  R_average {:+.3} ± {:.3}",
            row.run_id, row.worst_mean, row.worst_stderr, row.average_mean, row.average_stderr
        );
    }
    let out = default_report_dir(&dirs);
    let files = report.write(&out)?;
    println!("wrote {} files under {}", files.len(), out.display());
    Ok(())
}
