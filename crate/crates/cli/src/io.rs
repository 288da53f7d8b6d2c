//! Chain JSON input, spectrum JSON output and trajectory CSV.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use volterra_core::hill::{self, Gap};
use volterra_core::{ChainState, HillCoefficients};

use crate::{CliError, CliResult};

/// `{"n": 3, "u": [...]}` or `{"n": 3, "a": [...]}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainInput {
    pub n: usize,
    #[serde(default)]
    pub u: Option<Vec<f64>>,
    #[serde(default)]
    pub a: Option<Vec<f64>>,
}

impl ChainInput {
    pub fn into_chain(self) -> CliResult<ChainState> {
        let (field, values) = match (self.u, self.a) {
            (Some(u), None) => ("u", u),
            (None, Some(a)) => ("a", a),
            (Some(_), Some(_)) => return Err(CliError::input("give exactly one of \"u\" and \"a\", not both")),
            (None, None) => return Err(CliError::input("chain needs a \"u\" or an \"a\" list")),
        };
        if values.len() != self.n {
            return Err(CliError::input(format!(
                "\"n\" is {} but \"{field}\" has {} entries",
                self.n,
                values.len()
            )));
        }
        let chain = match field {
            "u" => ChainState::new(values, 0.0),
            _ => ChainState::from_a(&values, 0.0),
        };
        Ok(chain?)
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

pub fn parse_chain(text: &str) -> CliResult<ChainState> {
    let input: ChainInput =
        serde_json::from_str(text).map_err(|e| CliError::input(format!("malformed chain JSON: {e}")))?;
    input.into_chain()
}

pub fn read_chain(path: &Path) -> CliResult<ChainState> {
    parse_chain(&read_text(path)?)
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub lo: f64,
    pub hi: f64,
    pub closed: bool,
}

impl From<&Gap> for GapRecord {
    fn from(g: &Gap) -> Self {
        Self {
            lo: g.lo,
            hi: g.hi,
            closed: g.closed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub n: usize,
    pub lambda: Vec<f64>,
    pub gaps: Vec<GapRecord>,
    /// Indexed by shift `k = 0..N-1`.
    pub mu: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<i8>>,
}

pub fn spectrum_record(chain: &ChainState) -> CliResult<SpectrumRecord> {
    let c = HillCoefficients::from_chain(chain);
    let spectrum = hill::periodic_spectrum(&c);
    let aux = hill::all_aux_spectra(&c)?;
    Ok(SpectrumRecord {
        n: c.period(),
        gaps: spectrum.gaps.iter().map(GapRecord::from).collect(),
        lambda: spectrum.lambda,
        mu: aux.iter().map(|a| a.mu.clone()).collect(),
        sigma: aux.into_iter().map(|a| a.sigma).collect(),
    })
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:?}")
}

/// A table of floats with named columns, written as LF-terminated CSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io_err = |e: csv::Error| CliError::input(format!("CSV encoding failed: {e}"));
        w.write_record(&self.header).map_err(io_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| fmt_float(*x))).map_err(io_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::input(format!("CSV encoding failed: {e}")))?;
        String::from_utf8(bytes).map_err(|e| CliError::input(e.to_string()))
    }

    pub fn from_csv(text: &str) -> CliResult<Self> {
        let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let header: Vec<String> = r
            .headers()
            .map_err(|e| CliError::input(format!("unreadable CSV header: {e}")))?
            .iter()
            .map(str::to_owned)
            .collect();
        if header.iter().all(|h| h.is_empty()) {
            return Err(CliError::input("CSV is empty"));
        }
        let mut table = Table::new(header);
        for (line, record) in r.records().enumerate() {
            let record = record.map_err(|e| CliError::input(format!("CSV row {}: {e}", line + 1)))?;
            let row = record
                .iter()
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::input(format!("CSV row {}: {f:?} is not a number", line + 1)))
                })
                .collect::<CliResult<Vec<f64>>>()?;
            table.push(row);
        }
        if table.rows.is_empty() {
            return Err(CliError::input("CSV has a header but no rows"));
        }
        Ok(table)
    }
}
