//! CSV tables with a `#` manifest header, and the builders for the
//! bounds and AWGN tables.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::awgn::{converse_bounds_many, oracle_converse, AwgnConfig};
use crate::dist::DistributionSpec;
use crate::engine::{classify, convergence_rate, grid_points, make_seed, GridSpec, SeedKind, Spacing, TailSide, Verdict};
use crate::error::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_TIMESTAMP: &str = "unspecified";

#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Vec<(String, String)>,
    pub tool_version: String,
    pub timestamp: String,
    /// Grid and tolerance settings actually used.
    pub settings: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, timestamp: Option<&str>) -> RunManifest {
        RunManifest {
            command: command.into(),
            parameters: Vec::new(),
            tool_version: TOOL_VERSION.to_string(),
            timestamp: timestamp.unwrap_or(DEFAULT_TIMESTAMP).to_string(),
            settings: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> RunManifest {
        self.parameters.push((key.to_string(), value.to_string()));
        self
    }

    pub fn setting(mut self, key: &str, value: impl ToString) -> RunManifest {
        self.settings.push((key.to_string(), value.to_string()));
        self
    }

    pub fn header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# command: {}", self.command);
        let _ = writeln!(s, "# tool_version: {}", self.tool_version);
        let _ = writeln!(s, "# timestamp: {}", self.timestamp);
        for (k, v) in &self.parameters {
            let _ = writeln!(s, "# param {k} = {v}");
        }
        for (k, v) in &self.settings {
            let _ = writeln!(s, "# setting {k} = {v}");
        }
        s
    }
}

/// 17 significant digits; NaN becomes an empty field.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(t) => t.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub manifest: RunManifest,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn render(&self) -> String {
        let mut s = self.manifest.header();
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Writes through a temporary file in the target directory and renames it.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| Error::Param(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct BoundsRequest {
    pub dist: Arc<DistributionSpec>,
    pub side: TailSide,
    pub seed: SeedKind,
    pub iters: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    pub tol: f64,
    /// Emit ln P_i instead of P_i.
    pub log_values: bool,
    pub timestamp: Option<String>,
}

pub const MAX_CLI_ITERS: usize = 8;

/// x, P_0..P_I, verdict_0..verdict_I, threshold_0..threshold_I, R_0..R_{I−1}.
///
/// The verdict cell holds the iterate's verdict where x lies in its
/// verified region and X elsewhere.
pub fn bounds_table(req: &BoundsRequest) -> Result<CsvTable> {
    if req.iters > MAX_CLI_ITERS {
        return Err(Error::Param(format!("at most {MAX_CLI_ITERS} iterations, got {}", req.iters)));
    }
    let spacing = if req.x_min > 0.0 { Spacing::Geometric } else { Spacing::Uniform };
    let rows_grid = GridSpec { points: req.points, spacing, ..GridSpec::default() };
    let class_grid = GridSpec { points: req.points.max(512), spacing, ..GridSpec::default() };
    let xs = grid_points(req.x_min, req.x_max, &rows_grid)?;
    let window = (req.x_min, req.x_max);

    let mut its = vec![make_seed(req.dist.clone(), req.seed.clone(), req.side)?];
    for _ in 0..req.iters {
        let next = its[its.len() - 1].iterate()?;
        its.push(next);
    }
    let classes = its.iter().map(|it| classify(it, window, &class_grid, req.tol)).collect::<Result<Vec<_>>>()?;
    if classes[0].verdict == Verdict::Invalid {
        return Err(Error::SeedInvalid(format!(
            "P0 is neither an upper nor a lower bound anywhere on [{}, {}]",
            req.x_min, req.x_max
        )));
    }

    let p = if req.log_values { "lnP" } else { "P" };
    let mut columns = vec!["x".to_string()];
    columns.extend((0..=req.iters).map(|i| format!("{p}_{i}")));
    columns.extend((0..=req.iters).map(|i| format!("verdict_{i}")));
    columns.extend((0..=req.iters).map(|i| format!("threshold_{i}")));
    columns.extend((0..req.iters).map(|i| format!("R_{i}")));

    let mut rows = Vec::with_capacity(xs.len());
    for &x in &xs {
        let mut row = vec![Cell::Num(x)];
        for it in &its {
            let v = if req.log_values { it.ln_value(x) } else { it.value(x) };
            row.push(Cell::Num(v.unwrap_or(f64::NAN)));
        }
        for c in &classes {
            let letter = if c.covers(x, req.side) { c.verdict.letter() } else { Verdict::Invalid.letter() };
            row.push(Cell::Text(letter.to_string()));
        }
        for c in &classes {
            row.push(Cell::Num(c.threshold));
        }
        for it in &its[..req.iters] {
            row.push(Cell::Num(convergence_rate(it, x).unwrap_or(f64::NAN)));
        }
        rows.push(row);
    }

    let mut manifest = RunManifest::new("bounds", req.timestamp.as_deref()).param("dist", &req.dist.name);
    for (k, v) in &req.dist.params {
        manifest = manifest.param(k, format_number(*v));
    }
    let manifest = manifest
        .param("side", if req.side == TailSide::Right { "right" } else { "left" })
        .param("seed", req.seed.label())
        .param("iters", req.iters)
        .param("x_min", format_number(req.x_min))
        .param("x_max", format_number(req.x_max))
        .param("points", req.points)
        .param("log", req.log_values)
        .setting("row_spacing", format!("{spacing:?}").to_lowercase())
        .setting("classification_points", class_grid.points)
        .setting("tol", format_number(req.tol))
        .setting("limit_tol", format_number(class_grid.limit_tol));
    Ok(CsvTable { manifest, columns, rows })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AwgnRequest {
    pub omega: f64,
    pub eps: f64,
    pub ns: Vec<u64>,
    pub oracle: bool,
    /// Largest n for which the series oracle is evaluated.
    pub oracle_max_n: u64,
    pub timestamp: Option<String>,
}

pub const DEFAULT_ORACLE_MAX_N: u64 = 2000;

/// Integer blocklengths log-spaced over [n_min, n_max], deduplicated.
pub fn log_spaced_ns(n_min: u64, n_max: u64, points: usize) -> Result<Vec<u64>> {
    if n_min < 2 || n_max < n_min || points == 0 {
        return Err(Error::Param(format!("bad blocklength range {n_min}..{n_max} with {points} points")));
    }
    if points == 1 {
        return Ok(vec![n_min]);
    }
    let (a, b) = ((n_min as f64).ln(), (n_max as f64).ln());
    let mut ns: Vec<u64> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp().round() as u64)
        .map(|n| n.clamp(n_min, n_max))
        .collect();
    ns.dedup();
    Ok(ns)
}

/// n, lambda_p0, lambda_p1, lambda_asym, r_lower, r_upper, r_asym, r_na,
/// capacity, oracle_converse.
pub fn awgn_table(req: &AwgnRequest) -> Result<CsvTable> {
    let cfgs = req.ns.iter().map(|&n| AwgnConfig::new(n, req.omega, req.eps)).collect::<Result<Vec<_>>>()?;
    let points = converse_bounds_many(&cfgs);
    let columns = [
        "n",
        "lambda_p0",
        "lambda_p1",
        "lambda_asym",
        "r_lower",
        "r_upper",
        "r_asym",
        "r_na",
        "capacity",
        "oracle_converse",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut rows = Vec::with_capacity(cfgs.len());
    for (cfg, p) in cfgs.iter().zip(points) {
        let p = p?;
        let oracle = if req.oracle && cfg.n <= req.oracle_max_n { oracle_converse(cfg)? } else { f64::NAN };
        rows.push(vec![
            Cell::Int(cfg.n),
            Cell::Num(p.lambda_p0),
            Cell::Num(p.lambda_p1),
            Cell::Num(p.lambda_asym),
            Cell::Num(p.r_lower),
            Cell::Num(p.r_upper),
            Cell::Num(p.r_asym),
            Cell::Num(p.r_na),
            Cell::Num(p.capacity),
            Cell::Num(oracle),
        ]);
    }
    let ns: Vec<String> = req.ns.iter().map(u64::to_string).collect();
    let manifest = RunManifest::new("awgn", req.timestamp.as_deref())
        .param("omega", format_number(req.omega))
        .param("eps", format_number(req.eps))
        .param("n_list", ns.join(" "))
        .param("oracle", if req.oracle { "on" } else { "off" })
        .setting("oracle_max_n", req.oracle_max_n)
        .setting("lambda_rel_tol", "1e-10");
    Ok(CsvTable { manifest, columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::make_gaussian;

    #[test]
    fn number_format() {
        assert_eq!(format_number(f64::NAN), "");
        assert_eq!(format_number(0.1), "1.0000000000000001e-1");
        assert_eq!(format_number(-2.0), "-2.0000000000000000e0");
        assert_eq!(format_number(f64::INFINITY), "inf");
    }

    #[test]
    fn bounds_table_is_reproducible() {
        let req = BoundsRequest {
            dist: Arc::new(make_gaussian(0.0, 1.0).unwrap()),
            side: TailSide::Right,
            seed: SeedKind::PdfSeed,
            iters: 2,
            x_min: 1.0,
            x_max: 10.0,
            points: 64,
            tol: 1e-12,
            log_values: false,
            timestamp: None,
        };
        let a = bounds_table(&req).unwrap().render();
        let b = bounds_table(&req).unwrap().render();
        assert_eq!(a, b);
        let header = a.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, "x,P_0,P_1,P_2,verdict_0,verdict_1,verdict_2,threshold_0,threshold_1,threshold_2,R_0,R_1");
        assert_eq!(a.lines().filter(|l| !l.starts_with('#')).count(), 65);
    }

    #[test]
    fn log_spacing() {
        assert_eq!(log_spaced_ns(10, 1000, 3).unwrap(), vec![10, 100, 1000]);
        assert_eq!(log_spaced_ns(2, 3, 10).unwrap(), vec![2, 3]);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, "a\n").unwrap();
        write_atomic(&p, "b\n").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "b\n");
    }
}
