//! Per-episode metrics files (CSV, header row, one file per method and seed)
//! and the summary statistics derived from them.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::{io_err, HarnessError};

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub episode: u64,
    pub returns: Vec<f64>,
    pub score: f64,
    pub moving_average: f64,
}

/// Running mean over the last `window` scores.
#[derive(Debug, Clone)]
pub struct MovingAverage {
    window: usize,
    values: std::collections::VecDeque<f64>,
}

impl MovingAverage {
    pub fn new(window: usize) -> Self {
        Self {
            window: window.max(1),
            values: Default::default(),
        }
    }

    pub fn push(&mut self, v: f64) -> f64 {
        if self.values.len() == self.window {
            self.values.pop_front();
        }
        self.values.push_back(v);
        // summed fresh each time so the value depends only on the window contents
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

pub struct MetricsWriter<W: Write> {
    out: W,
    n_agents: usize,
}

impl MetricsWriter<BufWriter<File>> {
    pub fn create(path: &Path, n_agents: usize) -> Result<Self, HarnessError> {
        let file = File::create(path).map_err(io_err(path))?;
        let mut w = Self {
            out: BufWriter::new(file),
            n_agents,
        };
        w.header().map_err(io_err(path))?;
        Ok(w)
    }
}

impl<W: Write> MetricsWriter<W> {
    pub fn new(out: W, n_agents: usize) -> std::io::Result<Self> {
        let mut w = Self { out, n_agents };
        w.header()?;
        Ok(w)
    }

    fn header(&mut self) -> std::io::Result<()> {
        let mut cols = vec!["episode".to_string()];
        cols.extend((0..self.n_agents).map(|i| format!("return_{i}")));
        cols.push("score".into());
        cols.push("moving_average".into());
        writeln!(self.out, "{}", cols.join(","))
    }

    pub fn write_row(&mut self, row: &MetricsRow) -> std::io::Result<()> {
        debug_assert_eq!(row.returns.len(), self.n_agents);
        write!(self.out, "{}", row.episode)?;
        for r in &row.returns {
            write!(self.out, ",{r}")?;
        }
        writeln!(self.out, ",{},{}", row.score, row.moving_average)
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.out.flush()
    }
}

/// Reads a metrics file; malformed content reports its line number.
pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>, HarnessError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let parse_err = |line: u64, msg: String| HarnessError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let n_cols = headers.len();
    if n_cols < 4
        || &headers[0] != "episode"
        || &headers[n_cols - 2] != "score"
        || &headers[n_cols - 1] != "moving_average"
    {
        return Err(parse_err(1, "unexpected header".into()));
    }
    let mut rows: Vec<MetricsRow> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let num = |k: usize| -> Result<f64, HarnessError> {
            record[k]
                .trim()
                .parse::<f64>()
                .map_err(|e| parse_err(line, format!("column {}: {e}", &headers[k])))
        };
        let episode = record[0]
            .trim()
            .parse::<u64>()
            .map_err(|e| parse_err(line, format!("episode: {e}")))?;
        if let Some(prev) = rows.last() {
            if episode <= prev.episode {
                return Err(parse_err(line, "episode indices must increase".into()));
            }
        }
        let returns = (1..n_cols - 2).map(num).collect::<Result<Vec<_>, _>>()?;
        rows.push(MetricsRow {
            episode,
            returns,
            score: num(n_cols - 2)?,
            moving_average: num(n_cols - 1)?,
        });
    }
    Ok(rows)
}

/// Mean score over the last `window` rows.
pub fn final_window_mean(rows: &[MetricsRow], window: usize) -> f64 {
    let tail = &rows[rows.len().saturating_sub(window)..];
    if tail.is_empty() {
        return 0.0;
    }
    tail.iter().map(|r| r.score).sum::<f64>() / tail.len() as f64
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
