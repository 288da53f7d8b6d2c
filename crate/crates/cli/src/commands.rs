//! Subcommand implementations.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use volterra_core::flow::evolve_spectral;
use volterra_core::hill::{self, HillCoefficients};
use volterra_core::lattice::{integrate_direct, slot};
use volterra_core::reconstruct::{self, reconstruct_trajectory};
use volterra_core::symm_poly::{lemma_sweep, SweepConfig, SweepMode};
use volterra_core::verify::{self, ReportConfig, VerifyConfig, VerifyReport};
use volterra_core::ChainState;

use crate::io::{self, Table};
use crate::plot::{Chart, Series};
use crate::{CliError, CliResult, Status};

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    /// Chain JSON: {"n": N, "u": [...]} or {"n": N, "a": [...]}
    #[arg(long)]
    pub input: PathBuf,
    /// Spectrum JSON (stdout if omitted)
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Direct,
    Spectral,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "spectral")]
    pub method: Method,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Write a row every this many steps; the final time is always written
    #[arg(long, default_value_t = 10)]
    pub sample_every: usize,
    /// Trajectory CSV (stdout if omitted)
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Chain JSON; mutually exclusive with --seed
    #[arg(long, conflicts_with = "seed", required_unless_present = "seed")]
    pub input: Option<PathBuf>,
    /// Verify a random chain with u_k uniform in [0.5, 2]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Period of the random chain (default 3 + seed mod 3)
    #[arg(long, requires = "seed")]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 10)]
    pub sample_every: usize,
    /// Test hook: reverse the branch sign of mu_{j,k} (gap j from 1, shift k from 0) before evolving
    #[arg(long, value_name = "J,K", value_parser = parse_flip)]
    pub flip_sigma: Option<(usize, usize)>,
    /// Report JSON, written whatever the outcome
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Debug, Clone, Args)]
pub struct LemmaArgs {
    /// Nodes are x_0..x_n
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub s_min: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub s_max: Option<i64>,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: Mode,
    /// Per-row CSV (n,s,value,max_residual,max_term,pass)
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum What {
    U,
    Mu,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    /// Trajectory CSV written by `evolve`
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "u")]
    pub what: What,
}

fn parse_flip(s: &str) -> Result<(usize, usize), String> {
    let (j, k) = s.split_once(',').ok_or_else(|| format!("expected J,K, got {s:?}"))?;
    let j: usize = j.trim().parse().map_err(|_| format!("bad gap index {j:?}"))?;
    let k: usize = k.trim().parse().map_err(|_| format!("bad shift {k:?}"))?;
    if j == 0 {
        return Err("gap index J starts at 1".into());
    }
    Ok((j, k))
}

pub fn spectrum(args: &SpectrumArgs) -> CliResult<Status> {
    let chain = io::read_chain(&args.input)?;
    let record = io::spectrum_record(&chain)?;
    let mut text = serde_json::to_string_pretty(&record).map_err(|e| CliError::input(e.to_string()))?;
    text.push('\n');
    io::write_output(args.output.as_deref(), &text)?;
    Ok(Status::Pass)
}

/// Column names of a trajectory CSV for period `n`.
pub fn trajectory_header(n: usize, method: Method) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|i| format!("u_{i}")));
    match method {
        Method::Direct => {
            h.push("sum_drift".into());
            h.push("product_drift".into());
        }
        Method::Spectral => {
            for k in 0..n {
                h.extend((1..n).map(|j| format!("mu_{j}_{k}")));
            }
            h.push("pair_sum_residual".into());
            h.push("zero_trace_residual".into());
            if n % 2 == 1 {
                h.push("odd_period_residual".into());
            }
        }
    }
    h
}

pub fn evolve_table(chain: &ChainState, method: Method, t_end: f64, dt: f64, every: usize) -> CliResult<Table> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(CliError::input(format!("--dt must be positive, got {dt}")));
    }
    if every == 0 {
        return Err(CliError::input("--sample-every must be at least 1"));
    }
    let n = chain.period();
    let mut table = Table::new(trajectory_header(n, method));
    match method {
        Method::Direct => {
            let traj = integrate_direct(chain, t_end, dt, every)?;
            for (s, inv) in traj.samples.iter().zip(&traj.invariant_log) {
                let mut row = vec![s.t];
                row.extend(&s.u);
                row.push(inv.sum);
                row.push(inv.product);
                table.push(row);
            }
        }
        Method::Spectral => {
            let traj = evolve_spectral(chain, t_end, dt, every)?;
            let reports = reconstruct_trajectory(&traj)?;
            for (s, r) in traj.samples.iter().zip(&reports) {
                let mut row = vec![s.t];
                row.extend(&r.u);
                for a in &s.aux {
                    row.extend(&a.mu);
                }
                let mut pair = 0.0_f64;
                let mut trace = 0.0_f64;
                for (k, a) in s.aux.iter().enumerate() {
                    let lhs = 0.25 * (r.u[slot(k as i64, n)] + r.u[slot(k as i64 + 1, n)]);
                    pair = pair.max((lhs - reconstruct::pair_sum(&traj.spectrum, a)).abs());
                    trace = trace.max(a.trace().abs());
                }
                row.push(pair);
                row.push(trace);
                if n % 2 == 1 {
                    let mut odd = 0.0_f64;
                    for m in 1..=n {
                        let v = reconstruct::reconstruct_odd_period(&traj.spectrum, &s.aux, m as i64)?;
                        odd = odd.max((v - 0.25 * r.u[m - 1]).abs());
                    }
                    row.push(odd);
                }
                table.push(row);
            }
        }
    }
    Ok(table)
}

pub fn evolve(args: &EvolveArgs) -> CliResult<Status> {
    let chain = io::read_chain(&args.input)?;
    let table = evolve_table(&chain, args.method, args.t_end, args.dt, args.sample_every)?;
    io::write_output(args.output.as_deref(), &table.to_csv()?)?;
    Ok(Status::Pass)
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    config: ReportConfig,
}

#[derive(Serialize)]
struct StatusReport<'a> {
    passed: bool,
    #[serde(flatten)]
    report: &'a VerifyReport,
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> CliResult<()> {
    let Some(path) = path else { return Ok(()) };
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::input(e.to_string()))?;
    text.push('\n');
    io::write_output(Some(path), &text)
}

pub fn verify_chain(args: &VerifyArgs) -> CliResult<ChainState> {
    match (&args.input, args.seed) {
        (Some(path), _) => io::read_chain(path),
        (None, Some(seed)) => {
            let n = args.n.unwrap_or(3 + (seed % 3) as usize);
            Ok(verify::random_chain(seed, n)?)
        }
        (None, None) => Err(CliError::input("give --input or --seed")),
    }
}

pub fn verify(args: &VerifyArgs) -> CliResult<Status> {
    let chain = verify_chain(args)?;
    let n = chain.period();
    if let Some((j, k)) = args.flip_sigma {
        if j >= n || k >= n {
            return Err(CliError::input(format!(
                "--flip-sigma {j},{k} out of range for period {n} (gap 1..{}, shift 0..{})",
                n - 1,
                n - 1
            )));
        }
    }
    let cfg = VerifyConfig {
        t_end: args.t_end,
        dt: args.dt,
        sample_every: args.sample_every.max(1),
        flip_sigma: args.flip_sigma.map(|(j, k)| (j - 1, k)),
    };
    let report = match verify::end_to_end(&chain, &cfg) {
        Ok(r) => r,
        Err(e) => {
            let err = CliError::from(e);
            let config = ReportConfig {
                n,
                u: chain.u().to_vec(),
                run: cfg,
            };
            write_json(args.output.as_deref(), &ErrorReport { error: &err.message, config })?;
            return Err(err);
        }
    };
    for c in &report.checks {
        println!(
            "{} {:<36} {:>12.3e}  tol {:.1e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.max_residual,
            c.tolerance
        );
    }
    write_json(
        args.output.as_deref(),
        &StatusReport {
            passed: report.passed(),
            report: &report,
        },
    )?;
    let failures = report.failures();
    if failures.is_empty() {
        return Ok(Status::Pass);
    }
    let diagnosis: Vec<String> = failures
        .iter()
        .map(|c| {
            let mut d = format!("{} = {:e} (tol {:e})", c.name, c.max_residual, c.tolerance);
            if let Some(t) = c.worst_t {
                d.push_str(&format!(" at t = {t}"));
            }
            if let Some(i) = &c.worst_index {
                d.push_str(&format!(" [{i}]"));
            }
            d
        })
        .collect();
    let headline = if report.check("reconstruction_positive").is_some_and(|c| !c.pass) {
        "negative a^2 in reconstruction"
    } else {
        "direct and spectral runs disagree"
    };
    Err(CliError::check(format!("verify failed: {headline}\n  {}", diagnosis.join("\n  "))))
}

pub fn lemma(args: &LemmaArgs) -> CliResult<Status> {
    let n = args.n as i64;
    let cfg = SweepConfig {
        n: args.n,
        s_min: args.s_min.unwrap_or(-n - 1),
        s_max: args.s_max.unwrap_or(2 * n + 1),
        trials: args.trials,
        seed: args.seed,
        mode: match args.mode {
            Mode::Exact => SweepMode::Exact,
            Mode::Float => SweepMode::Float,
        },
    };
    let rows = lemma_sweep(&cfg)?;
    println!("{:>3} {:>4} {:>14} {:>12} {:>12}", "n", "s", "value", "max_resid", "max_term");
    for r in &rows {
        println!(
            "{:>3} {:>4} {:>14.6e} {:>12.3e} {:>12.3e} {}",
            r.n,
            r.s,
            r.value,
            r.max_residual,
            r.max_term,
            if r.pass { "ok" } else { "FAIL" }
        );
    }
    if let Some(path) = &args.output {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        for r in &rows {
            w.serialize(r).map_err(|e| CliError::input(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::input(e.to_string()))?;
        io::write_output(Some(path), &String::from_utf8_lossy(&bytes))?;
    }
    let failed: Vec<i64> = rows.iter().filter(|r| !r.pass).map(|r| r.s).collect();
    if failed.is_empty() {
        Ok(Status::Pass)
    } else {
        Err(CliError::check(format!("lemma residual out of tolerance for s = {failed:?}")))
    }
}

fn is_known_column(name: &str) -> bool {
    let indexed = |prefix: &str, parts: usize| {
        name.strip_prefix(prefix).is_some_and(|rest| {
            let p: Vec<&str> = rest.split('_').collect();
            p.len() == parts && p.iter().all(|x| x.parse::<usize>().is_ok())
        })
    };
    name == "t"
        || indexed("u_", 1)
        || indexed("mu_", 2)
        || matches!(
            name,
            "sum_drift" | "product_drift" | "pair_sum_residual" | "zero_trace_residual" | "odd_period_residual"
        )
}

/// Builds the chart for `what`, checking that every `μ_{j,0}` stays in gap `j`.
pub fn plot_chart(table: &Table, what: What) -> CliResult<Chart> {
    if table.header.first().map(String::as_str) != Some("t") {
        return Err(CliError::input("first CSV column must be \"t\""));
    }
    if let Some(bad) = table.header.iter().find(|h| !is_known_column(h)) {
        return Err(CliError::input(format!("unknown CSV column {bad:?}")));
    }
    let t = table.column("t").unwrap_or_default();
    let u: Vec<Vec<f64>> = (1..)
        .map_while(|i| table.column(&format!("u_{i}")))
        .collect();
    if u.len() < 2 {
        return Err(CliError::input("CSV needs columns u_1..u_N with N >= 2"));
    }
    let n = u.len();
    match what {
        What::U => Ok(Chart {
            title: format!("Volterra chain, N = {n}"),
            x_label: "t".into(),
            y_label: "u_n".into(),
            series: u
                .into_iter()
                .enumerate()
                .map(|(i, y)| Series {
                    name: format!("u_{}", i + 1),
                    x: t.clone(),
                    y,
                })
                .collect(),
            bands: Vec::new(),
        }),
        What::Mu => {
            let mu: Vec<Vec<f64>> = (1..n)
                .map(|j| {
                    table
                        .column(&format!("mu_{j}_0"))
                        .ok_or_else(|| CliError::input(format!("CSV has no column mu_{j}_0; write it with --method spectral")))
                })
                .collect::<CliResult<_>>()?;
            let first = ChainState::new(u.iter().map(|c| c[0]).collect(), t[0])?;
            let c = HillCoefficients::from_chain(&first);
            let spectrum = hill::periodic_spectrum(&c);
            let tol = 1e-9 * c.scale();
            for (j, (series, gap)) in mu.iter().zip(&spectrum.gaps).enumerate() {
                if let Some((i, m)) = series.iter().enumerate().find(|(_, m)| !gap.contains(**m, tol)) {
                    return Err(CliError::invariant(format!(
                        "mu_{}_0 = {m} at t = {} leaves its gap [{}, {}]",
                        j + 1,
                        t[i],
                        gap.lo,
                        gap.hi
                    )));
                }
            }
            Ok(Chart {
                title: format!("Dirichlet eigenvalues, shift 0, N = {n}"),
                x_label: "t".into(),
                y_label: "mu_j".into(),
                series: mu
                    .into_iter()
                    .enumerate()
                    .map(|(j, y)| Series {
                        name: format!("mu_{}", j + 1),
                        x: t.clone(),
                        y,
                    })
                    .collect(),
                bands: spectrum.gaps.iter().map(|g| (g.lo, g.hi)).collect(),
            })
        }
    }
}

pub fn plot(args: &PlotArgs) -> CliResult<Status> {
    let table = Table::from_csv(&io::read_text(&args.input)?)?;
    let chart = plot_chart(&table, args.what)?;
    io::write_output(Some(&args.output), &chart.render())?;
    Ok(Status::Pass)
}
