//! Cross-algorithm ranking and the `report` command's outputs.

use std::cmp::Ordering;
use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::aggregate::{aggregate_files, AggregateError, Metric, Summary, FINAL_WINDOW, SMOOTHING_WINDOW};
use crate::plot;

pub const LABEL: &str = "Observed at desk scale on the simulated cluster; not a reproduction of live-cluster measurements.";
pub const REPORT_FILE: &str = "report.txt";
pub const SUMMARY_FILE: &str = "summary.json";
pub const PLOT_DIR: &str = "plots";

/// A ranked criterion and the value each algorithm scored on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub criterion: String,
    pub higher_is_better: bool,
    /// Best first.
    pub order: Vec<(String, Option<f64>)>,
}

/// Best first; missing values last; ties by tag.
pub fn rank(criterion: &str, higher_is_better: bool, values: &[(&str, f64)]) -> Ranking {
    let mut v: Vec<(&str, f64)> = values.to_vec();
    v.sort_by(|(ta, a), (tb, b)| {
        let by_value = match (a.is_nan(), b.is_nan()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
            _ if higher_is_better => b.total_cmp(a),
            _ => a.total_cmp(b),
        };
        by_value.then_with(|| ta.cmp(tb))
    });
    Ranking {
        criterion: criterion.into(),
        higher_is_better,
        order: v.into_iter().map(|(t, x)| (t.to_owned(), (!x.is_nan()).then_some(x))).collect(),
    }
}

pub fn rankings(summaries: &[Summary]) -> Vec<Ranking> {
    let mut out: Vec<Ranking> = Metric::ALL
        .into_iter()
        .map(|m| {
            let vals: Vec<(&str, f64)> = summaries.iter().map(|s| (s.algorithm.as_str(), s.final_means[&m])).collect();
            rank(&format!("{} (mean of last {FINAL_WINDOW} episodes)", m.column()), m.higher_is_better(), &vals)
        })
        .collect();
    let vals: Vec<(&str, f64)> = summaries.iter().map(|s| (s.algorithm.as_str(), s.episodes_to_best_reward as f64)).collect();
    out.push(rank(&format!("episodes to best smoothed total_reward (window {SMOOTHING_WINDOW})"), false, &vals));
    let vals: Vec<(&str, f64)> = summaries.iter().map(|s| (s.algorithm.as_str(), s.reward_trend)).collect();
    out.push(rank("Spearman of episode vs smoothed total_reward", true, &vals));
    out
}

fn fmt_value(v: Option<f64>) -> String {
    match v {
        None => "n/a".into(),
        Some(x) if x.fract() == 0.0 && x.abs() < 1e9 => format!("{x:.0}"),
        Some(x) => format!("{x:.3}"),
    }
}

/// Plain-text comparison table. Needs at least two algorithms to rank.
pub fn compare_report(summaries: &[Summary]) -> String {
    let mut s = String::new();
    let w = &mut s;
    let _ = writeln!(w, "Planner comparison");
    let _ = writeln!(w, "{LABEL}");
    let _ = writeln!(w);
    let _ = writeln!(w, "{:<8} {:>6} {:>9} {:>10}", "algo", "seeds", "episodes", "converged");
    let mut sorted: Vec<&Summary> = summaries.iter().collect();
    sorted.sort_by(|a, b| a.algorithm.cmp(&b.algorithm));
    for x in &sorted {
        let _ = writeln!(w, "{:<8} {:>6} {:>9} {:>9.1}%", x.algorithm, x.seeds, x.episodes, 100.0 * x.converged_fraction);
    }
    if summaries.len() < 2 {
        let _ = writeln!(w, "\nOnly one algorithm present; nothing to rank.");
        return s;
    }
    for r in rankings(summaries) {
        let _ = writeln!(w, "\n{} [{} is better]", r.criterion, if r.higher_is_better { "higher" } else { "lower" });
        for (k, (tag, v)) in r.order.iter().enumerate() {
            let _ = writeln!(w, "  {}. {:<8} {:>14}", k + 1, tag, fmt_value(*v));
        }
    }
    s
}

/// What `report` wrote, including charts it had to skip.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportManifest {
    pub label: String,
    pub summaries: Vec<Summary>,
    pub rankings: Vec<Ranking>,
    pub plots: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("no runs found under {0} (expected <algo>/seed-*.csv)")]
    NoRuns(PathBuf),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

fn io(context: String) -> impl FnOnce(std::io::Error) -> ReportError {
    move |source| ReportError::Io { context, source }
}

/// Finds `<dir>/<algo>/seed-*.csv`, sorted by algorithm then file name.
pub fn discover(dir: &Path) -> Result<Vec<(String, Vec<PathBuf>)>, ReportError> {
    let mut runs = Vec::new();
    let entries = fs::read_dir(dir).map_err(io(format!("reading {}", dir.display())))?;
    let mut subdirs: Vec<PathBuf> = entries.filter_map(Result::ok).map(|e| e.path()).filter(|p| p.is_dir()).collect();
    subdirs.sort();
    for sub in subdirs {
        let Some(tag) = sub.file_name().and_then(|n| n.to_str()) else { continue };
        if tag.parse::<adapt_swarm_core::Algorithm>().is_err() {
            continue;
        }
        let mut csvs: Vec<PathBuf> = fs::read_dir(&sub)
            .map_err(io(format!("reading {}", sub.display())))?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| {
                let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
                name.starts_with("seed-") && name.ends_with(".csv")
            })
            .collect();
        csvs.sort();
        if !csvs.is_empty() {
            runs.push((tag.to_owned(), csvs));
        }
    }
    if runs.is_empty() {
        return Err(ReportError::NoRuns(dir.to_owned()));
    }
    Ok(runs)
}

/// Aggregates every run under `dir` and writes plots, `summary.json` and
/// `report.txt` next to them.
pub fn report_dir(dir: &Path) -> Result<ReportManifest, ReportError> {
    let mut summaries = Vec::new();
    for (tag, csvs) in discover(dir)? {
        summaries.push(aggregate_files(&tag, &csvs)?);
    }
    let plot_dir = dir.join(PLOT_DIR);
    fs::create_dir_all(&plot_dir).map_err(io(format!("creating {}", plot_dir.display())))?;
    let mut plots = Vec::new();
    let mut warnings = Vec::new();
    for metric in Metric::ALL {
        let path = plot_dir.join(plot::file_name(metric));
        let Some(svg) = plot::render(metric, &summaries) else {
            // A stale chart from an earlier report would contradict this one.
            let _ = fs::remove_file(&path);
            warnings.push(format!("{}: no values in any run; chart omitted", metric.column()));
            continue;
        };
        fs::write(&path, svg).map_err(io(format!("writing {}", path.display())))?;
        plots.push(PathBuf::from(PLOT_DIR).join(plot::file_name(metric)));
        for s in summaries.iter().filter(|s| s.curves[&metric].iter().all(|x| x.is_nan())) {
            warnings.push(format!("{}: no values for {}; series omitted", metric.column(), s.algorithm));
        }
    }
    let text = compare_report(&summaries);
    fs::write(dir.join(REPORT_FILE), &text).map_err(io("writing report".into()))?;
    let manifest = ReportManifest { label: LABEL.into(), rankings: rankings(&summaries), summaries, plots, warnings };
    let mut json = serde_json::to_string_pretty(&manifest).expect("summary is serialisable");
    json.push('\n');
    fs::write(dir.join(SUMMARY_FILE), json).map_err(io("writing summary".into()))?;
    Ok(manifest)
}
