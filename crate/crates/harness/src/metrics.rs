//! The per-episode CSV format.

use std::io::{Read, Write};

use adapt_swarm_core::EpisodeMetrics;

pub const HEADER: [&str; 8] = ["episode", "steps", "total_reward", "mean_q", "mae", "loss", "adaptation_time_s", "converged"];

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("csv header mismatch: expected `{}`, found `{found}`", HEADER.join(","))]
    Header { found: String },
    #[error("row {row}: column `{column}`: cannot parse `{value}`")]
    Value { row: usize, column: &'static str, value: String },
    #[error("row {row}: expected {} columns, found {found}", HEADER.len())]
    Width { row: usize, found: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Real values print in shortest round-trip form; NaN (a metric that does
/// not apply, or no training happened) prints as an empty field.
fn real(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        x.to_string()
    }
}

pub fn record(m: &EpisodeMetrics) -> [String; 8] {
    [
        m.episode.to_string(),
        m.steps.to_string(),
        real(m.total_reward),
        real(m.mean_q),
        real(m.mae),
        real(m.loss),
        real(m.adaptation_time_s),
        m.converged.to_string(),
    ]
}

/// Writes rows one at a time, flushing after each.
pub struct MetricsWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> MetricsWriter<W> {
    pub fn new(w: W) -> Result<Self, CsvError> {
        let mut inner = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        inner.write_record(HEADER)?;
        inner.flush()?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, m: &EpisodeMetrics) -> Result<(), CsvError> {
        self.inner.write_record(record(m))?;
        self.inner.flush()?;
        Ok(())
    }
}

pub fn read_metrics(r: impl Read) -> Result<Vec<EpisodeMetrics>, CsvError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(r);
    let mut rows = reader.records();
    let header = rows.next().transpose()?.unwrap_or_default();
    if header.iter().ne(HEADER) {
        return Err(CsvError::Header { found: header.iter().collect::<Vec<_>>().join(",") });
    }
    let mut out = Vec::new();
    for (i, rec) in rows.enumerate() {
        let rec = rec?;
        let row = i + 1;
        if rec.len() != HEADER.len() {
            return Err(CsvError::Width { row, found: rec.len() });
        }
        let bad = |k: usize| CsvError::Value { row, column: HEADER[k], value: rec[k].to_owned() };
        let int = |k: usize| rec[k].parse::<usize>().map_err(|_| bad(k));
        let real = |k: usize| match &rec[k] {
            "" => Ok(f64::NAN),
            s => s.parse::<f64>().map_err(|_| bad(k)),
        };
        out.push(EpisodeMetrics {
            episode: int(0)?,
            steps: int(1)?,
            total_reward: real(2)?,
            mean_q: real(3)?,
            mae: real(4)?,
            loss: real(5)?,
            adaptation_time_s: real(6)?,
            converged: rec[7].parse::<bool>().map_err(|_| bad(7))?,
        });
    }
    Ok(out)
}
