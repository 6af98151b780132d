//! Command-line front end. `run` takes raw arguments and returns the process
//! exit status: 0 success, 1 failed check, 2 invalid input, 3 resource limit.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::expansion::{expansion_degree, remainder_order_fit, ExpansionCoefficients};
use crate::group_duals::{spectral_gap, FamilyType, GroupFamily};
use crate::gw::build_gw_series;
use crate::heat_trace::{central_heat_trace, limit_trace, TraceRequest};
use crate::hurwitz::{covering_integral_degree_cutoff, covering_integral_euler_cutoff, HurwitzTable};
use crate::qseries::CertifiedValue;
use crate::verify;

/// Significant digits used when printing double-double values.
const DIGITS: usize = 30;

#[derive(Parser, Debug)]
#[command(name = "heattrace", version, about = "Heat traces on compact classical groups and torus Hurwitz theory")]
pub struct Cli {
    /// Worker threads (falls back to HEATTRACE_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// key=value file supplying defaults for any long option; flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write (x,y) columns for external plotting.
    #[arg(long, global = true)]
    pub emit_plot_data: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Certified central heat trace for one or more matrix sizes.
    Trace {
        #[arg(long)]
        family: FamilyType,
        /// Matrix size, or a comma-separated grid.
        #[arg(long = "N", value_delimiter = ',', required = true)]
        n: Vec<u32>,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Add the N -> infinity limit as extra columns.
        #[arg(long)]
        limit: bool,
    },
    /// Expansion coefficients a_0 .. a_p.
    Coeffs {
        #[arg(long)]
        family: FamilyType,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 1e-20)]
        tol: f64,
    },
    /// Remainder of the truncated expansion against the exact trace.
    ExpandCheck {
        #[arg(long)]
        family: FamilyType,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        p: u32,
        #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
        grid: Vec<u32>,
    },
    /// Exact table of torus Hurwitz numbers.
    Hurwitz {
        #[arg(long)]
        nmax: u32,
        #[arg(long)]
        kmax: u32,
    },
    /// Truncated GW partition function as exact coefficients.
    Gw {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        dmax: u32,
        #[arg(long)]
        zcap: u32,
    },
    /// Covering-space integral with an Euler-characteristic (--p) or degree (--gamma) cutoff.
    Surface {
        #[arg(long)]
        family: FamilyType,
        #[arg(long = "N", value_delimiter = ',', required = true)]
        n: Vec<u32>,
        #[arg(long)]
        t: f64,
        #[arg(long, conflicts_with = "gamma", required_unless_present = "gamma")]
        p: Option<u32>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 1e-20)]
        tol: f64,
    },
    /// Budgeted spectral gap scan.
    Gap {
        #[arg(long)]
        family: FamilyType,
        #[arg(long = "N", value_delimiter = ',', required = true)]
        n: Vec<u32>,
        #[arg(long, default_value_t = 4)]
        budget: u32,
    },
    /// Run the acceptance suite.
    Verify {
        /// Reduced grids.
        #[arg(long)]
        quick: bool,
        /// Only these check numbers.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

#[derive(Clone, Debug, PartialEq)]
enum Cell {
    /// Exact or high-precision text; a JSON string.
    Text(String),
    Int(i64),
    Float(f64),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:e}"),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Int(i) => Value::from(*i),
            Cell::Float(x) => serde_json::Number::from_f64(*x).map(Value::Number).unwrap_or(Value::Null),
        }
    }
}

fn dd_cell(v: DoubleDouble) -> Cell {
    Cell::Text(v.to_sci_string(DIGITS))
}

#[derive(Debug, Default)]
struct Table {
    headers: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
    plot: Vec<(f64, f64)>,
    /// Replaces the row rendering for JSON output.
    json_override: Option<Value>,
    /// Set when a check inside the command failed.
    failed: bool,
    /// Progress lines for stderr.
    notes: Vec<String>,
}

impl Table {
    fn new(headers: &[&'static str]) -> Self {
        Self {
            headers: headers.to_vec(),
            ..Self::default()
        }
    }

    fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let err = |e: csv::Error| Error::Validation(format!("csv output failed: {e}"));
                w.write_record(&self.headers).map_err(err)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv)).map_err(err)?;
                }
                w.into_inner().map_err(|e| Error::Validation(format!("csv output failed: {e}")))
            }
            Format::Json => {
                let value = match &self.json_override {
                    Some(v) => v.clone(),
                    None => Value::Array(
                        self.rows
                            .iter()
                            .map(|row| {
                                let obj: Map<String, Value> = self
                                    .headers
                                    .iter()
                                    .zip(row)
                                    .map(|(h, c)| (h.to_string(), c.json()))
                                    .collect();
                                Value::Object(obj)
                            })
                            .collect(),
                    ),
                };
                let mut out = serde_json::to_vec_pretty(&value)
                    .map_err(|e| Error::Validation(format!("json output failed: {e}")))?;
                out.push(b'\n');
                Ok(out)
            }
        }
    }
}

fn certified_cells(v: &CertifiedValue) -> [Cell; 3] {
    [dd_cell(v.value), Cell::Float(v.tail_bound), Cell::Int(v.cutoff as i64)]
}

fn groups(family: FamilyType, sizes: &[u32]) -> Result<Vec<GroupFamily>> {
    sizes.iter().map(|&n| GroupFamily::new(family, n)).collect()
}

fn run_trace(family: FamilyType, sizes: &[u32], t: f64, tol: f64, with_limit: bool) -> Result<Table> {
    let mut headers = vec!["family", "N", "t", "value", "tail_bound", "cutoff"];
    if with_limit {
        headers.extend(["limit", "limit_tail_bound"]);
    }
    let mut table = Table::new(&headers);
    let limit = if with_limit { Some(limit_trace(family, t)?) } else { None };
    for g in groups(family, sizes)? {
        let v = central_heat_trace(&TraceRequest::new(g, t, tol)?)?;
        let mut row = vec![
            Cell::Text(family.to_string()),
            Cell::Int(g.matrix_size() as i64),
            Cell::Float(t),
        ];
        row.extend(certified_cells(&v));
        if let Some(l) = &limit {
            row.extend([dd_cell(l.value), Cell::Float(l.tail_bound)]);
        }
        table.plot.push((g.matrix_size() as f64, v.value_f64()));
        table.rows.push(row);
    }
    Ok(table)
}

fn run_coeffs(family: FamilyType, t: f64, p: u32, tol: f64) -> Result<Table> {
    let coeffs = ExpansionCoefficients::compute(family, t, p, tol)?;
    let mut table = Table::new(&["family", "t", "k", "value", "tail_bound", "cutoff"]);
    for (k, a) in coeffs.coeffs.iter().enumerate() {
        let mut row = vec![Cell::Text(family.to_string()), Cell::Float(t), Cell::Int(k as i64)];
        row.extend(certified_cells(a));
        table.plot.push((k as f64, a.value_f64()));
        table.rows.push(row);
    }
    Ok(table)
}

fn run_expand_check(family: FamilyType, t: f64, p: u32, grid: &[u32]) -> Result<Table> {
    let fit = remainder_order_fit(family, t, p, grid)?;
    let mut table = Table::new(&["family", "t", "p", "terms", "N", "residual", "noise", "slope"]);
    let slope = match fit.slope {
        Some(s) => Cell::Float(s),
        None => Cell::Text("saturated".into()),
    };
    for pt in &fit.points {
        table.rows.push(vec![
            Cell::Text(family.to_string()),
            Cell::Float(t),
            Cell::Int(p as i64),
            Cell::Int(expansion_degree(family, p) as i64),
            Cell::Int(pt.matrix_size as i64),
            Cell::Float(pt.residual),
            Cell::Float(pt.noise),
            slope.clone(),
        ]);
        if pt.is_resolved() {
            table.plot.push(((pt.matrix_size as f64).ln(), pt.residual.ln()));
        }
    }
    Ok(table)
}

fn run_hurwitz(nmax: u32, kmax: u32) -> Result<Table> {
    let h = HurwitzTable::build(nmax, kmax)?;
    let mut table = Table::new(&["n", "k", "H1"]);
    for (n, k, v) in h.iter() {
        table.rows.push(vec![Cell::Int(n as i64), Cell::Int(k as i64), Cell::Text(v.to_string())]);
    }
    Ok(table)
}

fn run_gw(n: u32, dmax: u32, zcap: u32) -> Result<Table> {
    let series = build_gw_series(n, dmax, zcap)?;
    let json = series.to_json();
    let mut table = Table::new(&["d", "exponents", "coefficient"]);
    for d in 1..=dmax {
        if let Some(Value::Object(slice)) = json.get(d.to_string()) {
            for (key, c) in slice {
                let c = c.as_str().unwrap_or_default().to_string();
                table.rows.push(vec![Cell::Int(d as i64), Cell::Text(key.clone()), Cell::Text(c)]);
            }
        }
    }
    table.json_override = Some(json);
    Ok(table)
}

fn run_surface(family: FamilyType, sizes: &[u32], t: f64, p: Option<u32>, gamma: Option<f64>, tol: f64) -> Result<Table> {
    let mut table = Table::new(&[
        "family",
        "N",
        "t",
        "cutoff_kind",
        "cutoff_parameter",
        "value",
        "tail_bound",
        "trace",
        "residual",
    ]);
    for g in groups(family, sizes)? {
        let (kind, param, v) = match (p, gamma) {
            (Some(p), _) => ("euler", p as f64, covering_integral_euler_cutoff(&g, t, p, tol)?),
            (None, Some(gm)) => ("degree", gm, covering_integral_degree_cutoff(&g, t, gm, tol)?),
            (None, None) => return Err(Error::Validation("surface needs --p or --gamma".into())),
        };
        let tr = central_heat_trace(&TraceRequest::new(g, t, tol)?)?;
        let residual = (v.value - tr.value).abs().to_f64();
        table.rows.push(vec![
            Cell::Text(family.to_string()),
            Cell::Int(g.matrix_size() as i64),
            Cell::Float(t),
            Cell::Text(kind.into()),
            Cell::Float(param),
            dd_cell(v.value),
            Cell::Float(v.tail_bound),
            dd_cell(tr.value),
            Cell::Float(residual),
        ]);
        table.plot.push((g.matrix_size() as f64, residual));
    }
    Ok(table)
}

fn run_gap(family: FamilyType, sizes: &[u32], budget: u32) -> Result<Table> {
    let mut table = Table::new(&["family", "N", "budget", "gap", "argmin", "beyond_budget_bound", "certified"]);
    for g in groups(family, sizes)? {
        let r = spectral_gap(&g, budget)?;
        table.rows.push(vec![
            Cell::Text(family.to_string()),
            Cell::Int(g.matrix_size() as i64),
            Cell::Int(budget as i64),
            Cell::Text(r.gap.to_string()),
            Cell::Text(r.argmin.to_string()),
            Cell::Text(r.beyond_budget_bound.to_string()),
            Cell::Text(r.is_certified().to_string()),
        ]);
        let gap = DoubleDouble::from_rational(&r.gap).to_f64();
        table.plot.push((g.matrix_size() as f64, gap));
    }
    Ok(table)
}

fn run_verify(quick: bool, only: &[u32]) -> Result<Table> {
    let ids: Vec<u32> = if only.is_empty() {
        (1..=verify::CHECK_COUNT).collect()
    } else {
        only.to_vec()
    };
    let mut table = Table::new(&["check", "name", "status", "seconds", "detail"]);
    for id in ids {
        let r = verify::run_check(id, quick);
        table.notes.push(r.to_string());
        table.failed |= !r.passed;
        table.rows.push(vec![
            Cell::Int(r.id as i64),
            Cell::Text(r.name.into()),
            Cell::Text(if r.passed { "PASS" } else { "FAIL" }.into()),
            Cell::Float(r.elapsed.as_secs_f64()),
            Cell::Text(r.detail),
        ]);
    }
    Ok(table)
}

fn dispatch(cli: &Cli) -> Result<Table> {
    match &cli.command {
        Command::Trace { family, n, t, tol, limit } => run_trace(*family, n, *t, *tol, *limit),
        Command::Coeffs { family, t, p, tol } => run_coeffs(*family, *t, *p, *tol),
        Command::ExpandCheck { family, t, p, grid } => run_expand_check(*family, *t, *p, grid),
        Command::Hurwitz { nmax, kmax } => run_hurwitz(*nmax, *kmax),
        Command::Gw { n, dmax, zcap } => run_gw(*n, *dmax, *zcap),
        Command::Surface { family, n, t, p, gamma, tol } => run_surface(*family, n, *t, *p, *gamma, *tol),
        Command::Gap { family, n, budget } => run_gap(*family, n, *budget),
        Command::Verify { quick, only } => run_verify(*quick, only),
    }
}

/// Exit status for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Validation(_) | Error::Convergence(_) => 2,
        Error::Resource { .. } | Error::CutoffTooSmall(_) => 3,
    }
}

/// Parses a `key=value` file; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Validation(format!("config line {} is not key=value: '{line}'", i + 1)))?;
        out.push((k.trim().trim_start_matches("--").to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Appends config entries whose flag is absent from `args`.
fn merge_config(mut args: Vec<OsString>) -> Result<Vec<OsString>> {
    let strings: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let path = strings.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            strings.get(i + 1).cloned()
        } else {
            a.strip_prefix("--config=").map(str::to_string)
        }
    });
    let Some(path) = path else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::Validation(format!("cannot read config file {path}: {e}")))?;
    for (key, value) in parse_config(&text)? {
        let flag = format!("--{key}");
        let present = strings.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if present || key == "config" {
            continue;
        }
        match value.as_str() {
            "true" => args.push(flag.into()),
            "false" => {}
            _ => {
                args.push(flag.into());
                args.push(value.into());
            }
        }
    }
    Ok(args)
}

fn write_output(path: Option<&Path>, bytes: &[u8], out: &mut dyn Write) -> Result<()> {
    let io_err = |e: io::Error| Error::Validation(format!("cannot write output: {e}"));
    match path {
        Some(p) => fs::write(p, bytes).map_err(io_err),
        None => out.write_all(bytes).map_err(io_err),
    }
}

fn threads(cli: &Cli) -> Result<Option<usize>> {
    if let Some(n) = cli.threads {
        return Ok(Some(n));
    }
    match std::env::var("HEATTRACE_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Validation(format!("HEATTRACE_THREADS must be a positive integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<bool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads(cli)? {
        if n == 0 {
            return Err(Error::Validation("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::resource(format!("cannot start worker threads: {e}"), f64::INFINITY))?;
    let table = pool.install(|| dispatch(cli))?;
    for note in &table.notes {
        let _ = writeln!(err, "{note}");
    }
    write_output(cli.out.as_deref(), &table.render(cli.format)?, out)?;
    if let Some(path) = &cli.emit_plot_data {
        if table.plot.is_empty() {
            let _ = writeln!(err, "note: this command has no plot data; {} not written", path.display());
        } else {
            let mut text = String::from("x,y\n");
            for (x, y) in &table.plot {
                text.push_str(&format!("{x:e},{y:e}\n"));
            }
            fs::write(path, text).map_err(|e| Error::Validation(format!("cannot write plot data: {e}")))?;
        }
    }
    Ok(!table.failed)
}

/// Runs the command line `args` (program name first), writing results to
/// `out` and diagnostics to `err`; returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = match merge_config(args.into_iter().map(Into::into).collect()) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
