//! Solution files (ACF v1) and the curve and spectrum tables.
//!
//! An ACF v1 file is ASCII: seven header lines
//!
//! ```text
//! acf 1
//! potential <id>
//! grid <L> <h> <n>
//! theta <value>
//! r <value>
//! residual <value>
//! classify <theta - pi/4> <r>
//! ```
//!
//! followed by `n` lines of `n` values, row `j` holding `u(x_i, y_j)` for
//! increasing `i`. Values carry 17 significant digits, so a write/read cycle
//! reproduces every bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::continuation::ModuliCurve;
use crate::discretization::{Field, QuadrantGrid};
use crate::error::{Error, Result};
use crate::solver::Solution;
use crate::spectra::SpectrumReport;

pub const ACF_VERSION: u32 = 1;

/// Contents of a solution file.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub potential: String,
    pub theta: f64,
    pub r: f64,
    pub residual: f64,
    /// `(theta - pi/4, r)` as extracted by the balancing integrals; NaN when absent.
    pub classify: (f64, f64),
    pub field: Field,
}

impl SolutionFile {
    pub fn from_solution(sol: &Solution) -> Self {
        SolutionFile {
            potential: sol.potential_id.clone(),
            theta: sol.theta,
            r: sol.r,
            residual: sol.residual,
            classify: sol
                .classification
                .map_or((f64::NAN, f64::NAN), |c| c.pair()),
            field: sol.field.clone(),
        }
    }

    pub fn grid(&self) -> &QuadrantGrid {
        self.field.grid()
    }
}

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_acf<W: Write>(mut w: W, file: &SolutionFile) -> Result<()> {
    let grid = file.grid();
    if file.potential.is_empty() || file.potential.contains(char::is_whitespace) {
        return Err(Error::Domain(format!(
            "potential id {:?} is not a single word",
            file.potential
        )));
    }
    writeln!(w, "acf {ACF_VERSION}")?;
    writeln!(w, "potential {}", file.potential)?;
    writeln!(
        w,
        "grid {} {} {}",
        grid.half_width(),
        grid.spacing(),
        grid.n()
    )?;
    writeln!(w, "theta {}", sci(file.theta))?;
    writeln!(w, "r {}", sci(file.r))?;
    writeln!(w, "residual {}", sci(file.residual))?;
    writeln!(
        w,
        "classify {} {}",
        sci(file.classify.0),
        sci(file.classify.1)
    )?;
    let mut line = String::new();
    for row in file.field.values().chunks(grid.n()) {
        line.clear();
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&sci(*v));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_acf(path: &Path, file: &SolutionFile) -> Result<()> {
    write_acf(BufWriter::new(File::create(path)?), file)
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self, what: &str) -> Result<String> {
        self.number += 1;
        match self.inner.next() {
            Some(line) => Ok(line?),
            None => Err(self.error(format!("unexpected end of file, expected {what}"))),
        }
    }

    fn error(&self, message: String) -> Error {
        Error::Parse {
            line: self.number,
            message,
        }
    }

    fn number<T: std::str::FromStr>(&self, token: &str, what: &str) -> Result<T> {
        token
            .parse()
            .map_err(|_| self.error(format!("cannot read {what} from {token:?}")))
    }

    /// Reads `<key> <v1> ... <vk>` and returns the values.
    fn keyed(&mut self, key: &str, count: usize) -> Result<Vec<String>> {
        let line = self.next_line(key)?;
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some(k) if k == key => {}
            Some(k) => return Err(self.error(format!("expected `{key}`, found `{k}`"))),
            None => return Err(self.error(format!("expected `{key}`, found an empty line"))),
        }
        let values: Vec<String> = tokens.map(str::to_owned).collect();
        if values.len() != count {
            return Err(self.error(format!(
                "`{key}` takes {count} value(s), found {}",
                values.len()
            )));
        }
        Ok(values)
    }
}

pub fn read_acf<R: BufRead>(reader: R) -> Result<SolutionFile> {
    let mut lines = Lines {
        inner: reader.lines(),
        number: 0,
    };
    let version = lines.keyed("acf", 1)?;
    let version: u32 = lines.number(&version[0], "format version")?;
    if version != ACF_VERSION {
        return Err(lines.error(format!("unsupported format version {version}")));
    }
    let potential = lines.keyed("potential", 1)?.remove(0);
    let g = lines.keyed("grid", 3)?;
    let half_width: f64 = lines.number(&g[0], "half width")?;
    let spacing: f64 = lines.number(&g[1], "spacing")?;
    let n: usize = lines.number(&g[2], "node count")?;
    let grid = QuadrantGrid::new(half_width, spacing).map_err(|e| lines.error(e.to_string()))?;
    if grid.n() != n {
        return Err(lines.error(format!(
            "node count {n} does not match L/h + 1 = {}",
            grid.n()
        )));
    }
    let mut scalar = |key: &str| -> Result<f64> {
        let v = lines.keyed(key, 1)?;
        lines.number(&v[0], key)
    };
    let theta = scalar("theta")?;
    let r = scalar("r")?;
    let residual = scalar("residual")?;
    let c = lines.keyed("classify", 2)?;
    let classify = (
        lines.number(&c[0], "classify")?,
        lines.number(&c[1], "classify")?,
    );
    let mut values = Vec::with_capacity(n * n);
    for j in 0..n {
        let line = lines.next_line(&format!("field row {j}"))?;
        let before = values.len();
        for token in line.split_whitespace() {
            let v: f64 = lines.number(token, "field value")?;
            values.push(v);
        }
        if values.len() - before != n {
            return Err(lines.error(format!(
                "field row {j} has {} values, expected {n}",
                values.len() - before
            )));
        }
    }
    while let Some(extra) = lines.inner.next() {
        lines.number += 1;
        if !extra?.trim().is_empty() {
            return Err(lines.error("unexpected data after the last field row".into()));
        }
    }
    Ok(SolutionFile {
        potential,
        theta,
        r,
        residual,
        classify,
        field: Field::from_values(grid, values)?,
    })
}

pub fn load_acf(path: &Path) -> Result<SolutionFile> {
    read_acf(BufReader::new(File::open(path)?))
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Domain(format!("csv: {other:?}")),
    }
}

fn optional<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub const CURVE_COLUMNS: [&str; 7] = [
    "theta_imposed",
    "theta_extracted",
    "r",
    "residual",
    "margin",
    "index",
    "file",
];

/// One row per sample; absent margins, indices and file names are empty cells.
pub fn write_curve_csv<W: Write>(w: W, curve: &ModuliCurve) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CURVE_COLUMNS).map_err(csv_error)?;
    for s in &curve.samples {
        out.write_record([
            s.theta_imposed().to_string(),
            s.theta_extracted.to_string(),
            s.r().to_string(),
            s.solution.residual.to_string(),
            optional(s.margin),
            optional(s.index),
            s.file.clone().unwrap_or_default(),
        ])
        .map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

/// Rows `sector,R,lambda_1..lambda_k`, padded with empty cells to the longest report.
pub fn write_spectrum_csv<W: Write>(w: W, reports: &[SpectrumReport]) -> Result<()> {
    let k = reports
        .iter()
        .map(|r| r.eigenvalues.len())
        .max()
        .unwrap_or(0);
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["sector".to_string(), "R".to_string()];
    header.extend((1..=k).map(|i| format!("lambda_{i}")));
    out.write_record(&header).map_err(csv_error)?;
    for rep in reports {
        let mut row = vec![rep.sector.label().to_string(), rep.radius.to_string()];
        row.extend((0..k).map(|i| optional(rep.eigenvalues.get(i))));
        out.write_record(&row).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}
