//! Config-driven experiment commands and their report files.
//!
//! Every command evaluates its grid cells in parallel, gathers the rows in
//! grid order and writes them with a single writer. Each CSV starts with a
//! `# schema: cpdual/<table>/v<N>` line followed by the column header. Random
//! draws are keyed by the master seed, a purpose label and grid coordinates,
//! so the files are byte-identical for any thread count.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, OutputTypes};
use crate::covering::{
    best_q, exponent_report, simulate_covering, CoveringConfig, OutputTypeChoice, RateExponent,
};
use crate::distortion::check_duality;
use crate::error::Error;
use crate::oracle::blahut_arimoto;
use crate::packing::{
    bound_check, estimate_omega, packing_bound, simulate_packing, DistortionProfile,
};
use crate::prob::{ArithPolicy, Prob};
use crate::rng::StreamKey;
use crate::stats::Estimate;
use crate::types::{enumerate_types, format_rational, TypeVector};
use crate::Rational;

/// Tolerance handed to Blahut-Arimoto for the reference column.
const ORACLE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Duality,
    Exponent,
    Cover,
    Pack,
    Separation,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Duality => "duality",
            Command::Exponent => "exponent",
            Command::Cover => "cover",
            Command::Pack => "pack",
            Command::Separation => "separation",
        }
    }
}

/// Command-line overrides of the `[run]` section.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub arith: Option<ArithPolicy>,
    pub threads: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("budget exceeded: {0}")]
    Budget(Error),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Invariant(_) => 2,
            RunError::Config(_) => 3,
            RunError::Budget(_) => 4,
            RunError::Io { .. } => 1,
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } => RunError::Budget(e),
            other => RunError::Config(other.to_string()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub operation: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_sha256: String,
    pub seed: u64,
    pub arith: ArithPolicy,
    pub threads: Option<usize>,
    pub timings: Vec<Timing>,
    pub outputs: Vec<String>,
    /// Rows that broke an invariant; nonempty means exit code 2.
    pub violations: Vec<String>,
    pub notes: Vec<String>,
}

/// Result of a completed command. The report files are already written.
#[derive(Clone, Debug)]
pub struct Report {
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.manifest.violations.is_empty() {
            0
        } else {
            2
        }
    }
}

/// Reads and validates a config file; returns it with its raw text.
pub fn load_config(path: &Path) -> Result<(ExperimentConfig, String), RunError> {
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
    let cfg = ExperimentConfig::parse(&text)
        .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
    Ok((cfg, text))
}

struct Table {
    file: String,
    schema: String,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(file: impl Into<String>, schema: &str, header: &[&'static str]) -> Self {
        Self {
            file: file.into(),
            schema: schema.to_string(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn render(&self) -> Vec<u8> {
        let mut out = format!("# schema: cpdual/{}\n", self.schema).into_bytes();
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut out);
        w.write_record(&self.header).expect("write to memory");
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.header.len());
            w.write_record(row).expect("write to memory");
        }
        w.flush().expect("write to memory");
        drop(w);
        out
    }
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    seed: u64,
    arith: ArithPolicy,
    timings: Vec<Timing>,
    violations: Vec<String>,
    notes: Vec<String>,
}

impl Context<'_> {
    fn timed<T>(&mut self, operation: &str, f: impl FnOnce(&Self) -> T) -> T {
        let start = Instant::now();
        let value = f(self);
        self.timings.push(Timing {
            operation: operation.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        value
    }

    fn key(&self, purpose: &str, coords: &[usize]) -> StreamKey {
        let coords: Vec<u64> = coords.iter().map(|&c| c as u64).collect();
        StreamKey::new(self.seed, purpose, &coords)
    }
}

/// Runs `command`, writes its CSVs and manifest, and returns the report.
pub fn run(
    command: Command,
    cfg: &ExperimentConfig,
    config_text: &str,
    opts: &RunOptions,
) -> Result<Report, RunError> {
    let mut ctx = Context {
        cfg,
        seed: opts.seed.unwrap_or(cfg.run.seed),
        arith: opts.arith.unwrap_or(cfg.run.arith),
        timings: Vec::new(),
        violations: Vec::new(),
        notes: Vec::new(),
    };
    let out_dir = opts
        .out
        .clone()
        .or_else(|| cfg.run.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));

    let tables = match command {
        Command::Duality => cmd_duality(&mut ctx)?,
        Command::Exponent => cmd_exponent(&mut ctx)?,
        Command::Cover => cmd_cover(&mut ctx)?,
        Command::Pack => cmd_pack(&mut ctx)?,
        Command::Separation => cmd_separation(&mut ctx)?,
    };

    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Io { path, source }
    };
    fs::create_dir_all(&out_dir).map_err(io(&out_dir))?;
    let mut outputs = Vec::new();
    for table in &tables {
        let path = out_dir.join(&table.file);
        fs::write(&path, table.render()).map_err(io(&path))?;
        outputs.push(table.file.clone());
    }
    let manifest_name = format!("manifest-{}.json", command.name());
    outputs.push(manifest_name.clone());
    let manifest = RunManifest {
        tool: "cpdual",
        version: env!("CARGO_PKG_VERSION"),
        command: command.name(),
        config_sha256: sha256_hex(config_text.as_bytes()),
        seed: ctx.seed,
        arith: ctx.arith,
        threads: opts.threads,
        timings: ctx.timings,
        outputs,
        violations: ctx.violations,
        notes: ctx.notes,
    };
    let path = out_dir.join(&manifest_name);
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    fs::write(&path, json).map_err(io(&path))?;
    Ok(Report { out_dir, manifest })
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn rational_cell(r: &Rational) -> String {
    format_rational(r)
}

fn float_cell(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.12e}")
    }
}

fn exponent_cell(e: RateExponent) -> String {
    float_cell(e.as_f64())
}

fn estimate_cells(e: &Estimate) -> [String; 3] {
    let (lo, hi) = e.wilson();
    [float_cell(e.point()), float_cell(lo), float_cell(hi)]
}

/// Output types a command iterates over at block length `n`.
fn output_types(
    ctx: &Context,
    choice: &OutputTypes,
    p: &TypeVector,
    level: Rational,
) -> Result<Vec<TypeVector>, RunError> {
    let cfg = ctx.cfg;
    Ok(match choice {
        OutputTypes::All => enumerate_types(
            cfg.output_alphabet.size(),
            p.n(),
            cfg.limits.enumeration_budget,
        )?,
        OutputTypes::Best => {
            vec![best_q(p, level, cfg.distortion.as_fn(), ctx.arith, &cfg.limits)?.q]
        }
        OutputTypes::List(list) => list.iter().filter(|q| q.n() == p.n()).cloned().collect(),
    })
}

fn require_rates(cfg: &ExperimentConfig) -> Result<(), RunError> {
    if cfg.rates.is_empty() {
        Err(RunError::Config(
            "grid.rates must be nonempty for this command".into(),
        ))
    } else {
        Ok(())
    }
}

fn cmd_duality(ctx: &mut Context) -> Result<Vec<Table>, RunError> {
    let cfg = ctx.cfg;
    let choice = cfg.output_types.clone().unwrap_or(OutputTypes::All);
    let mut instances = Vec::new();
    for (ni, &n) in cfg.blocklengths.iter().enumerate() {
        let p = cfg.source_type(n)?;
        for (li, &level) in cfg.levels.iter().enumerate() {
            for (qi, q) in output_types(ctx, &choice, &p, level)?
                .into_iter()
                .enumerate()
            {
                instances.push((ni, li, qi, p.clone(), q, level));
            }
        }
    }
    let rows = ctx.timed("duality", |ctx| {
        instances
            .par_iter()
            .map(|(ni, li, qi, p, q, level)| {
                let key = ctx.key("duality", &[*ni, *li, *qi]);
                let report = check_duality(
                    p,
                    q,
                    *level,
                    cfg.distortion.as_fn(),
                    cfg.run.probes,
                    &key,
                    &cfg.limits,
                );
                let head = vec![
                    p.n().to_string(),
                    p.compact(),
                    q.compact(),
                    rational_cell(level),
                ];
                match report {
                    Ok(r) => {
                        let join = |v: &[crate::prob::ExactProb]| {
                            v.iter()
                                .map(|x| x.to_ratio_string())
                                .collect::<Vec<_>>()
                                .join(";")
                        };
                        let tail = vec![
                            "ok".to_string(),
                            join(&r.lhs),
                            join(&r.rhs),
                            r.both_random.to_ratio_string(),
                            r.equal.to_string(),
                        ];
                        Ok((
                            head.into_iter().chain(tail).collect::<Vec<_>>(),
                            Some(r.equal),
                        ))
                    }
                    Err(Error::BudgetExceeded { .. }) => {
                        let tail = ["skipped", "", "", "", ""].map(String::from);
                        Ok((head.into_iter().chain(tail).collect(), None))
                    }
                    Err(e) => Err(RunError::from(e)),
                }
            })
            .collect::<Result<Vec<_>, RunError>>()
    })?;
    let mut table = Table::new(
        "duality.csv",
        "duality/v1",
        &[
            "n",
            "p",
            "q",
            "level",
            "status",
            "fixed_y",
            "fixed_u",
            "both_random",
            "equal",
        ],
    );
    let mut skipped = 0;
    for (row, equal) in rows {
        match equal {
            Some(false) => ctx.violations.push(format!(
                "duality fails at n={} p={} q={} level={}",
                row[0], row[1], row[2], row[3]
            )),
            None => skipped += 1,
            Some(true) => {}
        }
        table.rows.push(row);
    }
    if skipped > 0 {
        ctx.notes.push(format!(
            "{skipped} instances skipped: enumeration budget exceeded"
        ));
    }
    Ok(vec![table])
}

fn cmd_exponent(ctx: &mut Context) -> Result<Vec<Table>, RunError> {
    let cfg = ctx.cfg;
    let d = cfg.distortion.as_fn();
    let mut cells = Vec::new();
    for li in 0..cfg.levels.len() {
        for ni in 0..cfg.blocklengths.len() {
            cells.push((li, ni));
        }
    }
    let reports = ctx.timed("exponent", |ctx| {
        cells
            .par_iter()
            .map(|&(li, ni)| {
                let p = cfg.source_type(cfg.blocklengths[ni])?;
                exponent_report(&p, cfg.levels[li], d, ctx.arith, &cfg.limits)
            })
            .collect::<Result<Vec<_>, Error>>()
    })?;
    let oracle: Vec<Option<f64>> = ctx.timed("oracle", |_| {
        cfg.levels
            .iter()
            .map(|level| {
                if !d.is_additive() {
                    return None;
                }
                let level = *level.numer() as f64 / *level.denom() as f64;
                blahut_arimoto(
                    &cfg.pmf.to_f64(),
                    &cfg.distortion.matrix().to_f64(),
                    level,
                    ORACLE_TOL,
                )
                .ok()
                .map(|pt| pt.rate)
            })
            .collect()
    });
    if d.is_additive() {
        ctx.notes.push(
            "reference column is the i.i.d. rate-distortion function R(D) of the source pmf, \
             assumed to be the limit of the finite-length exponents for additive distortion"
                .into(),
        );
        if oracle.iter().any(Option::is_none) {
            ctx.notes.push(
                "Blahut-Arimoto did not converge for some levels; reference left empty".into(),
            );
        }
    } else {
        ctx.notes
            .push("no rate-distortion reference for non-additive distortion".into());
    }

    let mut table = Table::new(
        "exponent.csv",
        "exponent/v1",
        &[
            "level",
            "n",
            "best_q",
            "a",
            "log2_beta",
            "exponent",
            "reference_rd",
            "gap",
        ],
    );
    let mut plots: Vec<Table> = cfg
        .levels
        .iter()
        .enumerate()
        .map(|(li, level)| {
            Table::new(
                format!("exponent_plot_{li}.csv"),
                &format!("exponent-plot/v1 level={}", format_rational(level)),
                &["n", "exponent"],
            )
        })
        .collect();
    for (&(li, ni), report) in cells.iter().zip(&reports) {
        let reference = oracle[li];
        let exponent = report.exponent;
        table.rows.push(vec![
            rational_cell(&cfg.levels[li]),
            cfg.blocklengths[ni].to_string(),
            report.best.q.compact(),
            report.best.a().to_cell(),
            float_cell(report.log2_beta),
            exponent_cell(exponent),
            reference.map(float_cell).unwrap_or_default(),
            reference
                .map(|r| float_cell(exponent.as_f64() - r))
                .unwrap_or_default(),
        ]);
        plots[li].rows.push(vec![
            cfg.blocklengths[ni].to_string(),
            exponent_cell(exponent),
        ]);
    }
    let mut tables = vec![table];
    tables.extend(plots);
    Ok(tables)
}

fn cmd_cover(ctx: &mut Context) -> Result<Vec<Table>, RunError> {
    let cfg = ctx.cfg;
    require_rates(cfg)?;
    let d = cfg.distortion.as_fn();
    let choice = cfg.output_types.clone().unwrap_or(OutputTypes::Best);
    let mut runs = Vec::new();
    for (ni, &n) in cfg.blocklengths.iter().enumerate() {
        let p = cfg.source_type(n)?;
        for (li, &level) in cfg.levels.iter().enumerate() {
            for (ri, &rate) in cfg.rates.iter().enumerate() {
                let qs: Vec<OutputTypeChoice> = match &choice {
                    OutputTypes::All => vec![OutputTypeChoice::Sweep],
                    OutputTypes::Best => vec![OutputTypeChoice::Best],
                    OutputTypes::List(list) => list
                        .iter()
                        .filter(|q| q.n() == n)
                        .map(|q| OutputTypeChoice::Fixed(q.clone()))
                        .collect(),
                };
                for (qi, q) in qs.into_iter().enumerate() {
                    let run = CoveringConfig {
                        p: p.clone(),
                        q,
                        level,
                        rate,
                        trials: cfg.run.trials,
                    };
                    runs.push(([ni, li, ri, qi], run));
                }
            }
        }
    }
    let results = ctx.timed("cover", |ctx| {
        runs.par_iter()
            .map(|(coords, run)| {
                simulate_covering(run, d, &ctx.key("cover", coords), ctx.arith, &cfg.limits)
            })
            .collect::<Result<Vec<_>, Error>>()
    })?;
    let mut table = Table::new(
        "cover.csv",
        "cover/v1",
        &[
            "n",
            "level",
            "rate",
            "q",
            "best",
            "codebook_size",
            "explicit",
            "trials",
            "failures",
            "empirical",
            "wilson_lo",
            "wilson_hi",
            "analytic",
            "analytic_f64",
            "within_interval",
        ],
    );
    let mut inside = 0usize;
    let mut total = 0usize;
    for ((_, run), result) in runs.iter().zip(&results) {
        for (i, cell) in result.cells.iter().enumerate() {
            let analytic = cell.analytic.to_f64();
            let within = cell.empirical.contains(analytic);
            inside += usize::from(within);
            total += 1;
            let [point, lo, hi] = estimate_cells(&cell.empirical);
            let best = matches!(run.q, OutputTypeChoice::Best) || i == result.chosen;
            table.rows.push(vec![
                run.p.n().to_string(),
                rational_cell(&run.level),
                run.rate.to_string(),
                cell.q.compact(),
                best.to_string(),
                cell.codebook_size.to_string(),
                cell.explicit.to_string(),
                cell.empirical.trials.to_string(),
                cell.empirical.successes.to_string(),
                point,
                lo,
                hi,
                cell.analytic.to_cell(),
                float_cell(analytic),
                within.to_string(),
            ]);
        }
    }
    ctx.notes.push(format!(
        "{inside} of {total} cells have the analytic failure inside the 95% Wilson interval"
    ));
    Ok(vec![table])
}

/// Channel excess probability and covering quantity for one `(n, D)` pair.
struct CellPrep {
    p: TypeVector,
    level: Rational,
    omega: DistortionProfile,
    a: Prob,
    channel_name: String,
}

fn prepare_cells(ctx: &Context, wrapped: bool) -> Result<Vec<(usize, usize, CellPrep)>, RunError> {
    let cfg = ctx.cfg;
    let d = cfg.distortion.as_fn();
    let mut pairs = Vec::new();
    for ni in 0..cfg.blocklengths.len() {
        for li in 0..cfg.levels.len() {
            pairs.push((ni, li));
        }
    }
    pairs
        .par_iter()
        .map(|&(ni, li)| {
            let p = cfg.source_type(cfg.blocklengths[ni])?;
            let level = cfg.levels[li];
            let ch = if wrapped {
                cfg.build_wrapped_channel(level)?
            } else {
                cfg.build_channel(level)?
            };
            let omega = estimate_omega(
                &*ch,
                &p,
                level,
                d,
                cfg.omega_trials(),
                &ctx.key("omega", &[ni, li]),
            )?;
            let a = best_q(&p, level, d, ctx.arith, &cfg.limits)?.tails.excess;
            Ok((
                ni,
                li,
                CellPrep {
                    p,
                    level,
                    omega,
                    a,
                    channel_name: ch.name(),
                },
            ))
        })
        .collect()
}

fn cmd_pack(ctx: &mut Context) -> Result<Vec<Table>, RunError> {
    let cfg = ctx.cfg;
    require_rates(cfg)?;
    let d = cfg.distortion.as_fn();
    let prep = ctx.timed("omega", |ctx| prepare_cells(ctx, false))?;
    let mut runs = Vec::new();
    for (pi, (ni, li, _)) in prep.iter().enumerate() {
        for ri in 0..cfg.rates.len() {
            runs.push((pi, [*ni, *li, ri]));
        }
    }
    let results = ctx.timed("pack", |ctx| {
        runs.par_iter()
            .map(|&(pi, coords)| {
                let cell = &prep[pi].2;
                let ch = cfg.build_channel(cell.level)?;
                simulate_packing(
                    &*ch,
                    &cell.p,
                    cell.level,
                    d,
                    cfg.rates[coords[2]],
                    cfg.run.trials,
                    &ctx.key("pack", &coords),
                    ctx.arith,
                    &cfg.limits,
                )
            })
            .collect::<Result<Vec<_>, Error>>()
    })?;
    let mut table = Table::new(
        "pack.csv",
        "pack/v1",
        &[
            "n",
            "level",
            "rate",
            "channel",
            "codebook_size",
            "explicit",
            "trials",
            "correct",
            "wrong_unique",
            "none_typical",
            "ambiguous",
            "correct_rate",
            "wilson_lo",
            "wilson_hi",
            "omega",
            "omega_upper",
            "a",
            "bound",
            "conservative_bound",
            "slack",
            "margin",
            "pass",
        ],
    );
    for (&(pi, _), result) in runs.iter().zip(&results) {
        let cell = &prep[pi].2;
        let check = bound_check(result, &cell.a, &cell.omega);
        if !check.pass {
            ctx.violations.push(format!(
                "packing bound fails at n={} level={} rate={}",
                result.blocklength,
                format_rational(&cell.level),
                result.rate
            ));
        }
        let [point, lo, hi] = estimate_cells(&result.correct_estimate());
        table.rows.push(vec![
            result.blocklength.to_string(),
            rational_cell(&cell.level),
            result.rate.to_string(),
            cell.channel_name.clone(),
            result.codebook_size.to_string(),
            result.explicit.to_string(),
            result.trials.to_string(),
            result.correct.to_string(),
            result.wrong_unique.to_string(),
            result.none_typical.to_string(),
            result.ambiguous.to_string(),
            point,
            lo,
            hi,
            float_cell(cell.omega.point()),
            float_cell(cell.omega.upper()),
            cell.a.to_cell(),
            float_cell(check.bound),
            float_cell(check.conservative_bound),
            float_cell(check.slack),
            float_cell(check.margin),
            check.pass.to_string(),
        ]);
    }
    Ok(vec![table])
}

fn cmd_separation(ctx: &mut Context) -> Result<Vec<Table>, RunError> {
    let cfg = ctx.cfg;
    let d = cfg.distortion.as_fn();
    let sep = cfg
        .separation
        .clone()
        .ok_or_else(|| RunError::Config("a [separation] section is required".into()))?;
    let prep = ctx.timed("omega", |ctx| prepare_cells(ctx, true))?;
    for (_, _, cell) in &prep {
        if cell.omega.point() >= sep.omega_threshold {
            return Err(RunError::Invariant(format!(
                "wrapped channel {} has estimated excess probability {:.4} >= {} at n={} level={}; \
                 it does not communicate the source within the distortion level, so no rate is reported",
                cell.channel_name,
                cell.omega.point(),
                sep.omega_threshold,
                cell.p.n(),
                format_rational(&cell.level)
            )));
        }
    }
    let exponents = ctx.timed("exponent", |ctx| {
        prep.par_iter()
            .map(|(_, _, cell)| {
                exponent_report(&cell.p, cell.level, d, ctx.arith, &cfg.limits).map(|r| r.exponent)
            })
            .collect::<Result<Vec<_>, Error>>()
    })?;
    let mut runs = Vec::new();
    for (pi, exponent) in exponents.iter().enumerate() {
        runs.push((pi, 0usize, "target", sep.rate));
        if let RateExponent::Finite(e) = exponent {
            runs.push((pi, 1, "overshoot", e + sep.overshoot));
        }
    }
    let results = ctx.timed("pack", |ctx| {
        runs.par_iter()
            .map(|&(pi, role, _, rate)| {
                let (ni, li, cell) = &prep[pi];
                let ch = cfg.build_wrapped_channel(cell.level)?;
                simulate_packing(
                    &*ch,
                    &cell.p,
                    cell.level,
                    d,
                    rate,
                    cfg.run.trials,
                    &ctx.key("separation", &[*ni, *li, role]),
                    ctx.arith,
                    &cfg.limits,
                )
            })
            .collect::<Result<Vec<_>, Error>>()
    })?;
    let mut table = Table::new(
        "separation.csv",
        "separation/v1",
        &[
            "n",
            "level",
            "channel",
            "omega",
            "omega_upper",
            "exponent",
            "role",
            "rate",
            "below_exponent",
            "codebook_size",
            "trials",
            "correct",
            "correct_rate",
            "wilson_lo",
            "wilson_hi",
            "a",
            "bound",
        ],
    );
    for (&(pi, _, role, rate), result) in runs.iter().zip(&results) {
        let cell = &prep[pi].2;
        let exponent = exponents[pi];
        let [point, lo, hi] = estimate_cells(&result.correct_estimate());
        table.rows.push(vec![
            cell.p.n().to_string(),
            rational_cell(&cell.level),
            cell.channel_name.clone(),
            float_cell(cell.omega.point()),
            float_cell(cell.omega.upper()),
            exponent_cell(exponent),
            role.to_string(),
            float_cell(rate),
            (rate < exponent.as_f64()).to_string(),
            result.codebook_size.to_string(),
            result.trials.to_string(),
            result.correct.to_string(),
            point,
            lo,
            hi,
            cell.a.to_cell(),
            float_cell(packing_bound(
                &cell.a,
                cell.omega.point(),
                result.codebook_size,
            )),
        ]);
    }
    Ok(vec![table])
}
