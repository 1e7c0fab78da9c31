//! Aggregation of finished run directories into tables and charts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::RunConfig;
use super::svg::{bar_chart, line_chart, Bar, Series};
use super::train::{seed_dir, RunRecord, CONFIG_FILE, EVAL_FILE, LOG_FILE};
use crate::envs::{EvalReport, OmegaGrid};
use crate::error::{Error, Result};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const RETURNS_FILE: &str = "returns.csv";
pub const BANDIT_FILE: &str = "bandit.csv";

/// Sample mean and standard error (sample std / √n, 0 for a single value).
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Per-episode columns read back from a training log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LogSeries {
    pub episodes: Vec<f64>,
    pub returns: Vec<f64>,
    /// One column per arm; empty when the run had no bandit.
    pub probs: Vec<Vec<f64>>,
}

pub fn read_log(path: &Path) -> Result<LogSeries> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("{}: missing column `{name}`", path.display())))
    };
    let (ep, ret) = (col("episode")?, col("return")?);
    let prob_cols: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with("p_"))
        .map(|(i, _)| i)
        .collect();
    let mut out = LogSeries {
        probs: vec![Vec::new(); prob_cols.len()],
        ..Default::default()
    };
    let parse = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| Error::Config(format!("{}: bad number `{s}`: {e}", path.display())))
    };
    for row in reader.records() {
        let row = row?;
        out.episodes.push(parse(&row[ep])?);
        out.returns.push(parse(&row[ret])?);
        for (j, &c) in prob_cols.iter().enumerate() {
            out.probs[j].push(parse(&row[c])?);
        }
    }
    Ok(out)
}

/// Everything the report needs from one run directory.
#[derive(Debug, Clone)]
pub struct RunData {
    pub dir: PathBuf,
    pub config: RunConfig,
    pub record: RunRecord,
    /// Evaluation reports of the seeds that finished, by seed index.
    pub evals: Vec<EvalReport>,
    pub logs: Vec<LogSeries>,
}

impl RunData {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        let config = RunConfig::load(dir.join(CONFIG_FILE))?;
        let record = RunRecord::load(&dir)?;
        let mut evals = Vec::new();
        let mut logs = Vec::new();
        for s in record.seeds.iter().filter(|s| s.ok) {
            let sd = seed_dir(&dir, s.index);
            evals.push(serde_json::from_str(&fs::read_to_string(sd.join(EVAL_FILE))?)?);
            logs.push(read_log(&sd.join(LOG_FILE))?);
        }
        Ok(Self {
            dir,
            config,
            record,
            evals,
            logs,
        })
    }

    pub fn label(&self) -> String {
        self.record.run_id.clone()
    }
}

/// One table row: a run summarized across its seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub family: String,
    pub algorithm: String,
    pub run_id: String,
    pub n_seeds: usize,
    pub worst_mean: f64,
    pub worst_stderr: f64,
    pub average_mean: f64,
    pub average_stderr: f64,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub runs: Vec<RunData>,
}

/// Summarizes runs. Rows are ordered by family, algorithm and run id.
/// Runs of one family must share the same evaluation grid.
pub fn build_report(run_dirs: &[PathBuf]) -> Result<Report> {
    if run_dirs.is_empty() {
        return Err(Error::InvalidArgument("no run directories given".into()));
    }
    let mut runs = run_dirs.iter().map(RunData::load).collect::<Result<Vec<_>>>()?;
    runs.sort_by(|a, b| {
        (&a.record.family, a.record.algorithm.name(), &a.record.run_id)
            .cmp(&(&b.record.family, b.record.algorithm.name(), &b.record.run_id))
    });
    let mut grids: BTreeMap<String, (OmegaGrid, PathBuf)> = BTreeMap::new();
    for run in &runs {
        for eval in &run.evals {
            match grids.get(&run.record.family) {
                None => {
                    grids.insert(run.record.family.clone(), (eval.grid.clone(), run.dir.clone()));
                }
                Some((grid, first)) if grid != &eval.grid => {
                    return Err(Error::Config(format!(
                        "incompatible evaluation grids for family `{}`: {} and {}",
                        run.record.family,
                        first.display(),
                        run.dir.display()
                    )));
                }
                Some(_) => {}
            }
        }
    }
    let rows = runs
        .iter()
        .map(|run| {
            let worst: Vec<f64> = run.evals.iter().map(|e| e.worst).collect();
            let average: Vec<f64> = run.evals.iter().map(|e| e.average).collect();
            let (worst_mean, worst_stderr) = mean_and_stderr(&worst);
            let (average_mean, average_stderr) = mean_and_stderr(&average);
            ReportRow {
                family: run.record.family.clone(),
                algorithm: run.record.algorithm.name().to_string(),
                run_id: run.record.run_id.clone(),
                n_seeds: worst.len(),
                worst_mean,
                worst_stderr,
                average_mean,
                average_stderr,
            }
        })
        .collect();
    Ok(Report { rows, runs })
}

impl Report {
    pub fn summary_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
    }

    /// Seed-averaged training return per episode for each run.
    pub fn return_curves(&self) -> Vec<Series> {
        self.runs
            .iter()
            .filter(|r| !r.logs.is_empty())
            .map(|r| Series {
                label: r.label(),
                points: seed_mean(&r.logs, |l| &l.returns),
            })
            .collect()
    }

    /// Seed-averaged arm probabilities per episode, per run with a bandit.
    pub fn bandit_curves(&self) -> Vec<(String, Vec<f64>, Vec<Series>)> {
        self.runs
            .iter()
            .filter(|r| r.logs.first().is_some_and(|l| !l.probs.is_empty()))
            .map(|r| {
                let arms = r.config.arms.clone();
                let series = (0..r.logs[0].probs.len())
                    .map(|d| Series {
                        label: match arms.get(d) {
                            Some(a) => format!("alpha {a}"),
                            None => format!("arm {d}"),
                        },
                        points: seed_mean(&r.logs, |l| &l.probs[d]),
                    })
                    .collect();
                (r.label(), arms, series)
            })
            .collect()
    }

    /// Writes the summary table, bar charts, return curves and bandit
    /// probability plots into `outdir`.
    pub fn write(&self, outdir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(outdir)?;
        let mut written = Vec::new();
        let mut put = |name: String, text: String| -> Result<()> {
            let path = outdir.join(name);
            fs::write(&path, text)?;
            written.push(path);
            Ok(())
        };
        put(SUMMARY_FILE.into(), self.summary_csv()?)?;
        let families: Vec<&str> = {
            let mut f: Vec<&str> = self.rows.iter().map(|r| r.family.as_str()).collect();
            f.dedup();
            f
        };
        for fam in families {
            let rows: Vec<&ReportRow> = self.rows.iter().filter(|r| r.family == fam).collect();
            for (metric, pick) in [("worst", 0), ("average", 1)] {
                let bars: Vec<Bar> = rows
                    .iter()
                    .map(|r| {
                        let (value, error) = if pick == 0 {
                            (r.worst_mean, r.worst_stderr)
                        } else {
                            (r.average_mean, r.average_stderr)
                        };
                        Bar {
                            label: r.run_id.clone(),
                            value,
                            error,
                        }
                    })
                    .collect();
                let title = format!("{fam}: {metric}-case return (mean ± s.e.)");
                put(format!("{fam}-{metric}.svg"), bar_chart(&title, &format!("R_{metric}"), &bars))?;
            }
        }
        let curves = self.return_curves();
        if !curves.is_empty() {
            put(RETURNS_FILE.into(), series_csv("run", &curves))?;
            let smoothed: Vec<Series> = curves.iter().map(smooth).collect();
            put(
                "returns.svg".into(),
                line_chart("Training return (seed mean, smoothed)", "episode", "return", &smoothed),
            )?;
        }
        let bandits = self.bandit_curves();
        if !bandits.is_empty() {
            let mut all = Vec::new();
            for (label, _, series) in &bandits {
                put(
                    format!("{label}-bandit.svg"),
                    line_chart(&format!("{label}: arm probabilities"), "episode", "probability", series),
                )?;
                all.extend(series.iter().map(|s| Series {
                    label: format!("{label}/{}", s.label),
                    points: s.points.clone(),
                }));
            }
            put(BANDIT_FILE.into(), series_csv("series", &all))?;
        }
        Ok(written)
    }
}

/// Default report location for a set of run directories: `report/` next to
/// the first run.
pub fn default_report_dir(run_dirs: &[PathBuf]) -> PathBuf {
    run_dirs
        .first()
        .and_then(|d| d.parent())
        .unwrap_or_else(|| Path::new("."))
        .join("report")
}

fn seed_mean(logs: &[LogSeries], column: impl Fn(&LogSeries) -> &Vec<f64>) -> Vec<(f64, f64)> {
    let len = logs.iter().map(|l| column(l).len()).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            let mean = logs.iter().map(|l| column(l)[i]).sum::<f64>() / logs.len() as f64;
            (logs[0].episodes[i], mean)
        })
        .collect()
}

/// Moving average over a window of about 1% of the curve.
fn smooth(s: &Series) -> Series {
    let w = (s.points.len() / 100).max(1);
    let points = s
        .points
        .chunks(w)
        .map(|c| {
            let n = c.len() as f64;
            (c.iter().map(|p| p.0).sum::<f64>() / n, c.iter().map(|p| p.1).sum::<f64>() / n)
        })
        .collect();
    Series {
        label: s.label.clone(),
        points,
    }
}

fn series_csv(key: &str, series: &[Series]) -> String {
    let mut out = format!("{key},episode,value\n");
    for s in series {
        for (x, y) in &s.points {
            out.push_str(&format!("{},{x},{y}\n", s.label));
        }
    }
    out
}
