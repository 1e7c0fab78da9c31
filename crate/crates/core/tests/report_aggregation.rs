//! Report tables recomputed by brute force from the raw per-seed CSV files.

use std::fs;
use std::path::{Path, PathBuf};

use expectrl::agents::EpsilonSchedule;
use expectrl::harness::{build_report, train, Algorithm, RunConfig};

fn tiny(family: &str, algorithm: Algorithm, alpha: f64, seeds: usize) -> RunConfig {
    let mut cfg = RunConfig::new(family, algorithm);
    cfg.alpha = alpha;
    cfg.n_seeds = seeds;
    cfg.n_eval = 3;
    cfg.tabular.episodes = 150;
    cfg.tabular.epsilon = EpsilonSchedule::constant(0.3);
    cfg
}

/// Worst and average of the `R_k` column of an `eval.csv`.
fn metrics_from_csv(path: &Path) -> (f64, f64) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "R_k").unwrap();
    let r: Vec<f64> = lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect();
    let worst = r.iter().copied().fold(f64::INFINITY, f64::min);
    let average = r.iter().sum::<f64>() / r.len() as f64;
    (worst, average.max(worst))
}

fn brute_mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let mut ss = 0.0;
    for x in xs {
        ss += (x - mean) * (x - mean);
    }
    (mean, (ss / (n - 1.0)).sqrt() / n.sqrt())
}

#[test]
fn summary_matches_brute_force_recomputation() {
    let root = tempfile::tempdir().unwrap();
    let mut dirs: Vec<PathBuf> = Vec::new();
    for alpha in [0.5, 0.2] {
        let (dir, _) = train(&tiny("cliff_grid", Algorithm::QExpectile, alpha, 4), root.path(), None).unwrap();
        dirs.push(dir);
    }
    let report = build_report(&dirs).unwrap();
    assert_eq!(report.rows.len(), 2);
    for row in &report.rows {
        let dir = root.path().join(&row.run_id);
        let (worst, average): (Vec<f64>, Vec<f64>) = (0..4)
            .map(|k| metrics_from_csv(&dir.join(format!("seed-{k}")).join("eval.csv")))
            .unzip();
        let (wm, ws) = brute_mean_se(&worst);
        let (am, as_) = brute_mean_se(&average);
        assert!((row.worst_mean - wm).abs() < 1e-12);
        assert!((row.worst_stderr - ws).abs() < 1e-12);
        assert!((row.average_mean - am).abs() < 1e-12);
        assert!((row.average_stderr - as_).abs() < 1e-12);
        assert_eq!(row.n_seeds, 4);
    }
    let out = root.path().join("report");
    let files = report.write(&out).unwrap();
    assert!(files.iter().any(|f| f.ends_with("summary.csv")));
    assert!(files.iter().any(|f| f.extension().is_some_and(|e| e == "svg")));
    let first = fs::read(out.join("summary.csv")).unwrap();
    // Order of arguments does not change the table.
    let reversed: Vec<PathBuf> = dirs.iter().rev().cloned().collect();
    let again = build_report(&reversed).unwrap();
    assert_eq!(again.summary_csv().unwrap().as_bytes(), first.as_slice());
}

#[test]
fn single_seed_has_zero_standard_error() {
    let root = tempfile::tempdir().unwrap();
    let (dir, _) = train(&tiny("slip_grid", Algorithm::QExpectile, 0.3, 1), root.path(), None).unwrap();
    let report = build_report(&[dir]).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert_eq!(report.rows[0].worst_stderr, 0.0);
    assert_eq!(report.rows[0].average_stderr, 0.0);
}

#[test]
fn identical_runs_have_identical_rows() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut cfg = tiny("cliff_grid", Algorithm::QExpectile, 0.4, 3);
    let (da, _) = train(&cfg, a.path(), None).unwrap();
    cfg.run_id = Some("copy".into());
    let (db, _) = train(&cfg, b.path(), None).unwrap();
    let report = build_report(&[da, db]).unwrap();
    let (r0, r1) = (&report.rows[0], &report.rows[1]);
    assert_eq!((r0.worst_mean, r0.worst_stderr), (r1.worst_mean, r1.worst_stderr));
    assert_eq!((r0.average_mean, r0.average_stderr), (r1.average_mean, r1.average_stderr));
}

#[test]
fn incompatible_grids_are_rejected() {
    let root = tempfile::tempdir().unwrap();
    let cfg = tiny("cliff_grid", Algorithm::QExpectile, 0.5, 1);
    let (da, _) = train(&cfg, root.path(), None).unwrap();
    let mut coarse = cfg.clone();
    coarse.grid.per_dim = 4;
    coarse.run_id = Some("coarse".into());
    let (db, _) = train(&coarse, root.path(), None).unwrap();
    let err = build_report(&[da, db]).unwrap_err().to_string();
    assert!(err.contains("incompatible"), "{err}");
}

#[test]
fn auto_runs_get_bandit_plots() {
    let root = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new("arm_separation", Algorithm::Auto);
    cfg.n_seeds = 2;
    cfg.n_eval = 2;
    cfg.actor_critic.total_steps = 60;
    cfg.actor_critic.warmup_steps = 10;
    cfg.actor_critic.batch = 4;
    cfg.actor_critic.hidden = vec![4, 4];
    let (dir, _) = train(&cfg, root.path(), None).unwrap();
    let report = build_report(&[dir]).unwrap();
    let files = report.write(&root.path().join("report")).unwrap();
    assert!(files.iter().any(|f| f.ends_with("bandit.csv")));
    assert!(files.iter().any(|f| f.to_string_lossy().ends_with("-bandit.svg")));
    let curves = report.bandit_curves();
    let (_, arms, series) = &curves[0];
    assert_eq!(arms.len(), 4);
    for i in 0..series[0].points.len() {
        let total: f64 = series.iter().map(|s| s.points[i].1).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}
