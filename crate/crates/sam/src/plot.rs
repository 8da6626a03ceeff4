//! Score curves as standalone SVG: moving-average score against episode,
//! one line per method, shaded ±1 std across seeds.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::metrics::{mean_std, read_metrics};
use crate::{io_err, HarnessError};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 60.0;
const MAX_POINTS: usize = 400;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Mean and std of the moving-average score across seeds at each episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub method: String,
    pub episodes: Vec<u64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// `{task}_{method}_seed{k}.metrics.csv` → (task, method).
fn parse_name(name: &str) -> Option<(String, String)> {
    let stem = name.strip_suffix(".metrics.csv")?;
    let (head, seed) = stem.rsplit_once("_seed")?;
    seed.parse::<u64>().ok()?;
    let (task, method) = head.split_once('_')?;
    Some((task.to_string(), method.to_string()))
}

/// Groups the metrics files of `dir` by task, then method.
pub fn collect(dir: &Path) -> Result<BTreeMap<String, BTreeMap<String, Vec<PathBuf>>>, HarnessError> {
    let mut out: BTreeMap<String, BTreeMap<String, Vec<PathBuf>>> = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if let Some((task, method)) = parse_name(name) {
            out.entry(task).or_default().entry(method).or_default().push(path);
        }
    }
    for methods in out.values_mut() {
        for files in methods.values_mut() {
            files.sort();
        }
    }
    Ok(out)
}

pub fn curve(method: &str, files: &[PathBuf]) -> Result<Curve, HarnessError> {
    let runs = files.iter().map(|f| read_metrics(f)).collect::<Result<Vec<_>, _>>()?;
    let len = runs.iter().map(|r| r.len()).min().unwrap_or(0);
    let mut c = Curve {
        method: method.to_string(),
        episodes: Vec::with_capacity(len),
        mean: Vec::with_capacity(len),
        std: Vec::with_capacity(len),
    };
    for k in 0..len {
        let vals: Vec<f64> = runs.iter().map(|r| r[k].moving_average).collect();
        // population std so a single seed gives a zero-width band
        let (m, _) = mean_std(&vals);
        let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / vals.len() as f64;
        c.episodes.push(runs[0][k].episode);
        c.mean.push(m);
        c.std.push(var.sqrt());
    }
    Ok(c)
}

pub fn render_svg(title: &str, curves: &[Curve]) -> String {
    let mut x_max = 1.0f64;
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in curves {
        if let Some(&e) = c.episodes.last() {
            x_max = x_max.max(e as f64);
        }
        for (m, s) in c.mean.iter().zip(&c.std) {
            y_min = y_min.min(m - s);
            y_max = y_max.max(m + s);
        }
    }
    if !y_min.is_finite() {
        (y_min, y_max) = (0.0, 0.0);
    }
    if y_max - y_min < 1e-9 {
        y_min -= 1.0;
        y_max += 1.0;
    }
    let pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;
    let sx = |x: f64| MARGIN + x / x_max * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_min) / (y_max - y_min) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title)).unwrap();
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    writeln!(s, r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#).unwrap();
    for i in 0..=4 {
        let v = y_min + (y_max - y_min) * i as f64 / 4.0;
        let y = sy(v);
        writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 4.0, x0 - 6.0, y + 4.0, tick(v)).unwrap();
        let e = x_max * i as f64 / 4.0;
        let x = sx(e);
        writeln!(s, r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, y0 + 4.0, y0 + 18.0, e.round()).unwrap();
    }
    if y_min < 0.0 && y_max > 0.0 {
        writeln!(s, r##"<line x1="{x0}" y1="{0:.2}" x2="{x1}" y2="{0:.2}" stroke="#bbb" stroke-dasharray="4 3"/>"##, sy(0.0)).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">episode</text>"#, WIDTH / 2.0, HEIGHT - 16.0).unwrap();
    writeln!(s, r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">score (moving average)</text>"#, HEIGHT / 2.0, HEIGHT / 2.0).unwrap();

    for (ci, c) in curves.iter().enumerate() {
        let color = COLORS[ci % COLORS.len()];
        let idx = thin(c.episodes.len());
        if idx.is_empty() {
            continue;
        }
        let mut band = String::new();
        for &k in &idx {
            let p = if band.is_empty() { 'M' } else { 'L' };
            write!(band, "{p}{:.2},{:.2} ", sx(c.episodes[k] as f64), sy(c.mean[k] + c.std[k])).unwrap();
        }
        for &k in idx.iter().rev() {
            write!(band, "L{:.2},{:.2} ", sx(c.episodes[k] as f64), sy(c.mean[k] - c.std[k])).unwrap();
        }
        writeln!(s, r#"<path d="{}Z" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, band).unwrap();
        let mut line = String::new();
        for &k in &idx {
            let p = if line.is_empty() { 'M' } else { 'L' };
            write!(line, "{p}{:.2},{:.2} ", sx(c.episodes[k] as f64), sy(c.mean[k])).unwrap();
        }
        writeln!(s, r#"<path class="curve" data-method="{}" d="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#, escape(&c.method), line.trim_end()).unwrap();
        let ly = MARGIN + 16.0 * ci as f64;
        writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/><text x="{}" y="{}">{}</text>"#, x1 - 130.0, x1 - 110.0, x1 - 104.0, ly + 4.0, escape(&c.method)).unwrap();
    }
    writeln!(s, "</svg>").unwrap();
    s
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// At most `MAX_POINTS` evenly spaced indices, always including the last.
fn thin(len: usize) -> Vec<usize> {
    if len <= MAX_POINTS {
        return (0..len).collect();
    }
    let mut idx: Vec<usize> = (0..MAX_POINTS).map(|i| i * (len - 1) / (MAX_POINTS - 1)).collect();
    idx.dedup();
    idx
}

/// Writes one SVG per task found in `dir`. With a single task the image goes
/// to `out`; otherwise to `{out stem}_{task}.svg` next to it.
pub fn plot_dir(dir: &Path, out: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let groups = collect(dir)?;
    if groups.is_empty() {
        return Err(HarnessError::Config(format!("no metrics files in {}", dir.display())));
    }
    let mut written = Vec::new();
    for (task, methods) in &groups {
        let curves = methods
            .iter()
            .map(|(m, files)| curve(m, files))
            .collect::<Result<Vec<_>, _>>()?;
        let seeds = methods.values().map(|f| f.len()).max().unwrap_or(0);
        let svg = render_svg(&format!("{task} ({seeds} seeds)"), &curves);
        let path = if groups.len() == 1 {
            out.to_path_buf()
        } else {
            let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
            out.with_file_name(format!("{stem}_{task}.svg"))
        };
        std::fs::write(&path, svg).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}
