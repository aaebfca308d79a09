//! Scenario files, train-then-evaluate pipelines and CSV results.
//!
//! A scenario is a TOML file with four tables:
//!
//! ```toml
//! [system]
//! ues = 3
//! gamma_db = 10.0
//! omega_db = [-11.0, -9.0, -8.0, -12.0, -13.0, -15.0, -10.0]  # U1R..UMR, U1B..UMB, RB
//! variants = ["1:1", "2:3"]   # K_R:K_B pairs; alternatively k_r = .. and k_b = ..
//!
//! [trainer]                   # every key optional
//! lambda_init = 0.0
//! step0 = 1.0
//! step_schedule = "inverse_sqrt"  # constant | inverse | inverse_sqrt
//! batch_slots = 100000
//! tol = 1e-3
//! max_iters = 200
//! seed = 1                    # defaults to [output].seed
//!
//! [sweep]                     # optional
//! parameter = "omega_u1b"     # omega_u<m>r, omega_u<m>b, omega_rb or gamma
//! values_db = [-20.0, -10.0, 0.0]   # or start_db / stop_db / step_db
//!
//! [output]
//! name = "fig2"
//! eval_slots = 1000000
//! seed = 1
//! baselines = ["direct_only"]
//! ```
//!
//! Gains and `Γ` are given in dB and converted once when the file is loaded.

use std::fs;
use std::io::{BufWriter, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;
use toml::Spanned;

use crate::channel::{db_to_linear, LinkId, SystemConfig};
use crate::error::{Error, Result};
use crate::numfmt::sig6;
use crate::rates::{ActionKind, SubsetCatalog};
use crate::sim::{run_with_observer, Policy, SimulationReport, SlotTraceWriter};
use crate::trainer::{train_lambda, StepSchedule, TrainerParams, TrainerResult};

pub const DEFAULT_EVAL_SLOTS: u64 = 1_000_000;

/// The quantity varied by a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParameter {
    Gain(LinkId),
    Gamma,
}

impl SweepParameter {
    pub fn parse(name: &str, ues: usize) -> Option<Self> {
        if name == "gamma" {
            return Some(SweepParameter::Gamma);
        }
        if name == "omega_rb" {
            return Some(SweepParameter::Gain(LinkId::RelayBase));
        }
        let rest = name.strip_prefix("omega_u")?;
        let (index, kind) = rest.split_at(rest.len().checked_sub(1)?);
        let m: usize = index.parse().ok()?;
        if m == 0 || m > ues {
            return None;
        }
        match kind {
            "r" => Some(SweepParameter::Gain(LinkId::UeRelay(m - 1))),
            "b" => Some(SweepParameter::Gain(LinkId::UeBase(m - 1))),
            _ => None,
        }
    }

    pub fn apply(self, cfg: &SystemConfig, value_db: f64) -> Result<SystemConfig> {
        match self {
            SweepParameter::Gain(link) => cfg.with_gain(link, db_to_linear(value_db)),
            SweepParameter::Gamma => cfg.with_gamma(db_to_linear(value_db)),
        }
    }
}

impl std::fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepParameter::Gamma => f.write_str("gamma"),
            SweepParameter::Gain(LinkId::RelayBase) => f.write_str("omega_rb"),
            SweepParameter::Gain(LinkId::UeRelay(m)) => write!(f, "omega_u{}r", m + 1),
            SweepParameter::Gain(LinkId::UeBase(m)) => write!(f, "omega_u{}b", m + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values_db: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Baseline {
    DirectOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    /// Base configuration; its access limits are those of the first variant.
    pub cfg: SystemConfig,
    /// `(K_R, K_B)` pairs evaluated at every sweep point.
    pub variants: Vec<(usize, usize)>,
    pub trainer: TrainerParams,
    pub eval_slots: u64,
    /// Master seed for evaluation runs.
    pub seed: u64,
    pub sweep: Option<Sweep>,
    pub baselines: Vec<Baseline>,
}

impl Scenario {
    /// Replaces the master seed; the trainer follows it.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.trainer.seed = seed;
        self
    }

    pub fn with_variants(mut self, variants: Vec<(usize, usize)>) -> Result<Self> {
        for &(k_r, k_b) in &variants {
            self.cfg.with_access(k_r, k_b)?;
        }
        if let Some(&(k_r, k_b)) = variants.first() {
            self.cfg = self.cfg.with_access(k_r, k_b)?;
        }
        self.variants = variants;
        Ok(self)
    }

    /// Sweep values, or a single `None` point without a sweep.
    pub fn points(&self) -> Vec<Option<f64>> {
        match &self.sweep {
            Some(s) => s.values_db.iter().copied().map(Some).collect(),
            None => vec![None],
        }
    }

    /// Configuration of one (sweep value, variant) point.
    pub fn config_for(&self, value_db: Option<f64>, (k_r, k_b): (usize, usize)) -> Result<SystemConfig> {
        let cfg = match (&self.sweep, value_db) {
            (Some(s), Some(v)) => s.parameter.apply(&self.cfg, v)?,
            _ => self.cfg.clone(),
        };
        cfg.with_access(k_r, k_b)
    }
}

/// Parses `"KR:KB"`.
pub fn parse_variant(s: &str) -> std::result::Result<(usize, usize), String> {
    let (r, b) = s
        .split_once(':')
        .ok_or_else(|| format!("variant `{s}` is not of the form KR:KB"))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("variant `{s}` is not of the form KR:KB"));
    Ok((parse(r)?, parse(b)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    system: Spanned<RawSystem>,
    #[serde(default)]
    trainer: RawTrainer,
    sweep: Option<Spanned<RawSweep>>,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    ues: Spanned<usize>,
    gamma_db: Spanned<f64>,
    omega_db: Spanned<Vec<f64>>,
    k_r: Option<Spanned<usize>>,
    k_b: Option<Spanned<usize>>,
    variants: Option<Spanned<Vec<Spanned<String>>>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTrainer {
    lambda_init: Option<f64>,
    step0: Option<Spanned<f64>>,
    step_schedule: Option<Spanned<String>>,
    batch_slots: Option<Spanned<u64>>,
    tol: Option<Spanned<f64>>,
    max_iters: Option<Spanned<usize>>,
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    parameter: Spanned<String>,
    values_db: Option<Vec<f64>>,
    start_db: Option<f64>,
    stop_db: Option<f64>,
    step_db: Option<Spanned<f64>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    name: Option<String>,
    eval_slots: Option<Spanned<u64>>,
    seed: Option<u64>,
    baselines: Option<Vec<Spanned<String>>>,
}

struct SourceMap<'a> {
    path: &'a Path,
    text: &'a str,
}

impl SourceMap<'_> {
    fn line(&self, offset: usize) -> usize {
        let offset = offset.min(self.text.len());
        self.text[..offset].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn error(&self, span: Range<usize>, message: impl Into<String>) -> Error {
        Error::Scenario {
            path: self.path.to_path_buf(),
            line: self.line(span.start),
            message: message.into(),
        }
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_scenario(&text, path)
}

/// Parses scenario text; `path` is used for messages and the default name.
pub fn parse_scenario(text: &str, path: &Path) -> Result<Scenario> {
    let src = SourceMap { path, text };
    let raw: RawScenario = toml::from_str(text).map_err(|e| {
        let span = e.span().unwrap_or(0..0);
        src.error(span, e.message().trim().to_string())
    })?;

    let sys_span = raw.system.span();
    let sys = raw.system.into_inner();
    let ues = *sys.ues.get_ref();
    if ues == 0 {
        return Err(src.error(sys.ues.span(), "ues must be at least 1"));
    }
    let omega_db = sys.omega_db.get_ref();
    if omega_db.len() != 2 * ues + 1 {
        return Err(src.error(
            sys.omega_db.span(),
            format!("expected {} gains for ues = {ues}, got {}", 2 * ues + 1, omega_db.len()),
        ));
    }
    if let Some(v) = omega_db.iter().find(|v| !v.is_finite()) {
        return Err(src.error(sys.omega_db.span(), format!("gain {v} dB is not a finite number")));
    }
    let gamma_db = *sys.gamma_db.get_ref();
    if !gamma_db.is_finite() {
        return Err(src.error(sys.gamma_db.span(), "gamma_db must be finite"));
    }

    let variants = match (&sys.variants, &sys.k_r, &sys.k_b) {
        (Some(list), None, None) => {
            if list.get_ref().is_empty() {
                return Err(src.error(list.span(), "variants must not be empty"));
            }
            list.get_ref()
                .iter()
                .map(|v| parse_variant(v.get_ref()).map_err(|m| src.error(v.span(), m)))
                .collect::<Result<Vec<_>>>()?
        }
        (None, Some(k_r), Some(k_b)) => vec![(*k_r.get_ref(), *k_b.get_ref())],
        (None, _, _) => return Err(src.error(sys_span, "missing k_r/k_b or variants in [system]")),
        (Some(list), _, _) => return Err(src.error(list.span(), "give either variants or k_r/k_b, not both")),
    };
    let (k_r0, k_b0) = variants[0];
    let cfg = SystemConfig::from_db(ues, k_r0, k_b0, gamma_db, omega_db)
        .map_err(|e| src.error(sys.omega_db.span(), config_message(e)))?;
    let variant_span = sys
        .variants
        .as_ref()
        .map(|v| v.span())
        .or(sys.k_r.as_ref().map(|k| k.span()))
        .unwrap_or(sys_span);
    for &(k_r, k_b) in &variants {
        cfg.with_access(k_r, k_b).map_err(|e| src.error(variant_span.clone(), config_message(e)))?;
    }

    let output = raw.output;
    let seed = output.seed.unwrap_or(0);
    let eval_slots = match &output.eval_slots {
        Some(n) if *n.get_ref() == 0 => return Err(src.error(n.span(), "eval_slots must be at least 1")),
        Some(n) => *n.get_ref(),
        None => DEFAULT_EVAL_SLOTS,
    };
    let baselines = match &output.baselines {
        None => vec![Baseline::DirectOnly],
        Some(list) => list
            .iter()
            .map(|b| match b.get_ref().as_str() {
                "direct_only" => Ok(Baseline::DirectOnly),
                other => Err(src.error(b.span(), format!("unknown baseline `{other}` (expected direct_only)"))),
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let name = output.name.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".to_string())
    });

    let trainer = parse_trainer(&src, raw.trainer, seed)?;
    let sweep = raw.sweep.map(|s| parse_sweep(&src, s, ues)).transpose()?;
    if let Some(sweep) = &sweep {
        for &v in &sweep.values_db {
            sweep
                .parameter
                .apply(&cfg, v)
                .map_err(|e| src.error(0..0, format!("sweep value {v} dB: {}", config_message(e))))?;
        }
    }

    Ok(Scenario {
        name,
        cfg,
        variants,
        trainer,
        eval_slots,
        seed,
        sweep,
        baselines,
    })
}

fn config_message(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

fn parse_trainer(src: &SourceMap<'_>, raw: RawTrainer, seed: u64) -> Result<TrainerParams> {
    let defaults = TrainerParams::default();
    let positive = |v: &Option<Spanned<f64>>, key: &str, default: f64| -> Result<f64> {
        match v {
            Some(x) if !(x.get_ref().is_finite() && *x.get_ref() > 0.0) => {
                Err(src.error(x.span(), format!("{key} must be positive")))
            }
            Some(x) => Ok(*x.get_ref()),
            None => Ok(default),
        }
    };
    let step_schedule = match &raw.step_schedule {
        Some(s) => s.get_ref().parse::<StepSchedule>().map_err(|m| src.error(s.span(), m))?,
        None => defaults.step_schedule,
    };
    let batch_slots = match &raw.batch_slots {
        Some(b) if *b.get_ref() == 0 => return Err(src.error(b.span(), "batch_slots must be at least 1")),
        Some(b) => *b.get_ref(),
        None => defaults.batch_slots,
    };
    let max_iters = match &raw.max_iters {
        Some(m) if *m.get_ref() == 0 => return Err(src.error(m.span(), "max_iters must be at least 1")),
        Some(m) => *m.get_ref(),
        None => defaults.max_iters,
    };
    Ok(TrainerParams {
        lambda_init: raw.lambda_init.unwrap_or(defaults.lambda_init),
        step0: positive(&raw.step0, "step0", defaults.step0)?,
        step_schedule,
        batch_slots,
        tol: positive(&raw.tol, "tol", defaults.tol)?,
        max_iters,
        seed: raw.seed.unwrap_or(seed),
    })
}

fn parse_sweep(src: &SourceMap<'_>, raw: Spanned<RawSweep>, ues: usize) -> Result<Sweep> {
    let span = raw.span();
    let raw = raw.into_inner();
    let parameter = SweepParameter::parse(raw.parameter.get_ref(), ues).ok_or_else(|| {
        src.error(
            raw.parameter.span(),
            format!(
                "sweep parameter `{}` does not name a gain (omega_u<m>r, omega_u<m>b, omega_rb) or gamma",
                raw.parameter.get_ref()
            ),
        )
    })?;
    let values_db = match (raw.values_db, raw.start_db, raw.stop_db, raw.step_db) {
        (Some(v), None, None, None) => v,
        (None, Some(start), Some(stop), Some(step)) => {
            let step_span = step.span();
            let step = step.into_inner();
            if !(step > 0.0) || stop < start {
                return Err(src.error(step_span, "need step_db > 0 and stop_db >= start_db"));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=n).map(|k| start + k as f64 * step).collect()
        }
        _ => {
            return Err(src.error(span, "give either values_db or start_db, stop_db and step_db"));
        }
    };
    if values_db.is_empty() {
        return Err(src.error(span, "sweep has no values"));
    }
    Ok(Sweep { parameter, values_db })
}

/// One CSV row: a sweep value evaluated under one `(K_R, K_B)` variant.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub sweep_value_db: Option<f64>,
    pub k_r: usize,
    pub k_b: usize,
    pub lambda_star: f64,
    pub tau_bar: f64,
    pub tau_bar_direct: Option<f64>,
    pub arrival_rate: f64,
    pub departure_rate: f64,
    /// `|R̄_A - R̄_D|` of the evaluation run.
    pub residual: f64,
    /// A1, A2, A3 selection frequencies.
    pub freq: [f64; 3],
    pub seed: u64,
    pub eval_slots: u64,
    pub tau_bar_se: f64,
    /// Standard error of `tau_bar - tau_bar_direct` on the shared trace.
    pub paired_se: Option<f64>,
    pub trainer_iterations: usize,
    pub converged: bool,
    pub case2: bool,
}

pub const CSV_HEADER: [&str; 20] = [
    "scenario",
    "sweep_value_db",
    "k_r",
    "k_b",
    "lambda_star",
    "tau_bar",
    "tau_bar_direct",
    "arrival_rate",
    "departure_rate",
    "residual",
    "freq_a1",
    "freq_a2",
    "freq_a3",
    "seed",
    "eval_slots",
    "tau_bar_se",
    "paired_se",
    "trainer_iterations",
    "converged",
    "case2",
];

impl ResultRow {
    pub fn csv_record(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(sig6).unwrap_or_default();
        vec![
            self.scenario.clone(),
            opt(self.sweep_value_db),
            self.k_r.to_string(),
            self.k_b.to_string(),
            sig6(self.lambda_star),
            sig6(self.tau_bar),
            opt(self.tau_bar_direct),
            sig6(self.arrival_rate),
            sig6(self.departure_rate),
            sig6(self.residual),
            sig6(self.freq[0]),
            sig6(self.freq[1]),
            sig6(self.freq[2]),
            self.seed.to_string(),
            self.eval_slots.to_string(),
            sig6(self.tau_bar_se),
            opt(self.paired_se),
            self.trainer_iterations.to_string(),
            self.converged.to_string(),
            self.case2.to_string(),
        ]
    }

    pub fn summary(&self) -> String {
        let point = self.sweep_value_db.map(|v| format!(" @ {} dB", sig6(v))).unwrap_or_default();
        let direct = self
            .tau_bar_direct
            .map(|d| format!(" direct={}", sig6(d)))
            .unwrap_or_default();
        let flag = if self.converged { "" } else { " [trainer did not converge]" };
        format!(
            "{}{} K_R={} K_B={}: λ*={} τ̄={}{} R̄_A={} R̄_D={}{}",
            self.scenario,
            point,
            self.k_r,
            self.k_b,
            sig6(self.lambda_star),
            sig6(self.tau_bar),
            direct,
            sig6(self.arrival_rate),
            sig6(self.departure_rate),
            flag
        )
    }
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.csv_record())?;
    }
    w.flush()?;
    Ok(())
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_csv_atomic(rows: &[ResultRow], path: &Path) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut out = BufWriter::new(tmp.as_file_mut());
        write_csv(rows, &mut out)?;
        out.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Everything computed for one (sweep value, variant) point.
#[derive(Clone, Debug)]
pub struct PointResult {
    pub row: ResultRow,
    pub trainer: TrainerResult,
    pub adaptive: SimulationReport,
    pub direct: Option<SimulationReport>,
}

fn evaluate_point(
    scenario: &Scenario,
    value_db: Option<f64>,
    variant: (usize, usize),
    mut trace: Option<&mut SlotTraceWriter<Box<dyn Write>>>,
) -> Result<PointResult> {
    let cfg = scenario.config_for(value_db, variant)?;
    let catalog = SubsetCatalog::new(&cfg);
    let trainer = train_lambda(&cfg, &catalog, &scenario.trainer);
    if !trainer.converged {
        log::warn!(
            "{}: trainer stopped after {} iterations with |Δλ| = {}",
            scenario.name,
            trainer.iterations,
            trainer.residual
        );
    }
    let label = |policy: &str| {
        let point = value_db.map(sig6).unwrap_or_default();
        format!("{point}:{}:{}:{policy}", variant.0, variant.1)
    };

    let mut run = |policy: Policy, name: &str| -> Result<SimulationReport> {
        let mut io_err = None;
        let report = match trace.as_deref_mut() {
            Some(w) => {
                let run_label = label(name);
                run_with_observer(&cfg, &catalog, policy, scenario.eval_slots, scenario.seed, |_, o| {
                    if io_err.is_none() {
                        io_err = w.record(&run_label, &catalog, o).err();
                    }
                })
            }
            None => run_with_observer(&cfg, &catalog, policy, scenario.eval_slots, scenario.seed, |_, _| {}),
        };
        match io_err {
            Some(e) => Err(e),
            None => Ok(report),
        }
    };

    let adaptive = run(Policy::Adaptive(trainer.dual()), "adaptive")?;
    let direct = if scenario.baselines.contains(&Baseline::DirectOnly) {
        Some(run(Policy::DirectOnly, "direct")?)
    } else {
        None
    };

    let row = ResultRow {
        scenario: scenario.name.clone(),
        sweep_value_db: value_db,
        k_r: variant.0,
        k_b: variant.1,
        lambda_star: trainer.lambda_star,
        tau_bar: adaptive.tau_bar,
        tau_bar_direct: direct.as_ref().map(|d| d.tau_bar),
        arrival_rate: adaptive.arrival_rate,
        departure_rate: adaptive.departure_rate,
        residual: adaptive.residual(),
        freq: ActionKind::ALL.map(|k| adaptive.action_frequency(k)),
        seed: scenario.seed,
        eval_slots: scenario.eval_slots,
        tau_bar_se: adaptive.tau_standard_error(),
        paired_se: direct.as_ref().map(|d| adaptive.paired_standard_error(d)),
        trainer_iterations: trainer.iterations,
        converged: trainer.converged,
        case2: trainer.case2,
    };
    Ok(PointResult {
        row,
        trainer,
        adaptive,
        direct,
    })
}

/// Trains and evaluates every (sweep value × variant) point, in sweep order
/// then variant order. Points run in parallel unless a slot trace is
/// requested.
pub fn run_points(scenario: &Scenario, trace: Option<&Path>) -> Result<Vec<PointResult>> {
    let jobs: Vec<(Option<f64>, (usize, usize))> = scenario
        .points()
        .into_iter()
        .flat_map(|p| scenario.variants.iter().map(move |&v| (p, v)))
        .collect();

    match trace {
        None => jobs
            .into_par_iter()
            .map(|(p, v)| evaluate_point(scenario, p, v, None))
            .collect(),
        Some(path) => {
            let file: Box<dyn Write> = Box::new(BufWriter::new(fs::File::create(path)?));
            let mut writer = SlotTraceWriter::new(file)?;
            let results = jobs
                .into_iter()
                .map(|(p, v)| evaluate_point(scenario, p, v, Some(&mut writer)))
                .collect::<Result<Vec<_>>>()?;
            writer.finish()?.flush()?;
            Ok(results)
        }
    }
}

/// Runs the scenario and writes the result CSV atomically to `out`.
pub fn run_experiment(scenario: &Scenario, out: &Path, trace: Option<&Path>) -> Result<Vec<ResultRow>> {
    let rows: Vec<ResultRow> = run_points(scenario, trace)?.into_iter().map(|p| p.row).collect();
    write_csv_atomic(&rows, out)?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG2: &str = r#"
[system]
ues = 3
gamma_db = 10.0
omega_db = [-11.0, -9.0, -8.0, -12.0, -13.0, -15.0, -10.0]
variants = ["1:1", "2:3"]

[sweep]
parameter = "omega_u1b"
start_db = -20.0
stop_db = 0.0
step_db = 1.0

[output]
name = "fig2"
seed = 7
"#;

    fn parse(text: &str) -> Result<Scenario> {
        parse_scenario(text, Path::new("test.toml"))
    }

    fn line_of(err: Error) -> (usize, String) {
        match err {
            Error::Scenario { line, message, .. } => (line, message),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parses_fig2() {
        let s = parse(FIG2).unwrap();
        assert_eq!(s.name, "fig2");
        assert_eq!(s.cfg.omega().len(), 7);
        assert_eq!(s.variants, vec![(1, 1), (2, 3)]);
        let sweep = s.sweep.as_ref().unwrap();
        assert_eq!(sweep.parameter, SweepParameter::Gain(LinkId::UeBase(0)));
        assert_eq!(sweep.values_db.len(), 21);
        assert_eq!(sweep.values_db[20], 0.0);
        assert_eq!(s.seed, 7);
        assert_eq!(s.trainer.seed, 7);
        assert_eq!(s.eval_slots, DEFAULT_EVAL_SLOTS);
        assert_eq!(s.baselines, vec![Baseline::DirectOnly]);
        let cfg = s.config_for(Some(-16.0), (2, 3)).unwrap();
        assert!((cfg.gain(LinkId::UeBase(0)) - 0.025118864315095794).abs() < 1e-15);
        assert_eq!((cfg.k_r(), cfg.k_b()), (2, 3));
        assert!((cfg.gamma() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn wrong_gain_count_is_line_anchored() {
        let text = "[system]\nues = 3\ngamma_db = 10.0\nomega_db = [-11.0, -9.0, -8.0, -13.0, -15.0, -10.0]\nk_r = 1\nk_b = 1\n";
        let (line, message) = line_of(parse(text).unwrap_err());
        assert_eq!(line, 4);
        assert!(message.contains("expected 7 gains"), "{message}");
    }

    #[test]
    fn missing_key_and_syntax_errors() {
        let (_, message) = line_of(parse("[system]\nues = 3\ngamma_db = 10.0\nk_r = 1\nk_b = 1\n").unwrap_err());
        assert!(message.contains("omega_db"), "{message}");
        let (line, _) = line_of(parse("[system]\nues = 3\ngamma_db = = 10\n").unwrap_err());
        assert_eq!(line, 3);
        let (line, _) = line_of(parse("[system]\nues = 3\nbogus = 1\n").unwrap_err());
        assert_eq!(line, 3);
    }

    #[test]
    fn rejects_bad_sweep_and_variants() {
        let bad_param = FIG2.replace("omega_u1b", "omega_u4b");
        let (line, message) = line_of(parse(&bad_param).unwrap_err());
        assert_eq!(line, 9);
        assert!(message.contains("omega_u4b"));
        let bad_variant = FIG2.replace("\"2:3\"", "\"3:5\"");
        assert!(parse(&bad_variant).is_err());
        let malformed = FIG2.replace("\"2:3\"", "\"23\"");
        let (line, _) = line_of(parse(&malformed).unwrap_err());
        assert_eq!(line, 6);
        let nonpositive = FIG2.replace("gamma_db = 10.0", "gamma_db = 10.0\nk_r = 1");
        assert!(parse(&nonpositive).is_err());
    }

    #[test]
    fn sweep_parameter_names() {
        for name in ["gamma", "omega_rb", "omega_u1r", "omega_u3b"] {
            let p = SweepParameter::parse(name, 3).unwrap();
            assert_eq!(p.to_string(), name);
        }
        for name in ["omega_u0r", "omega_u4r", "omega_u1x", "omega_", "rb"] {
            assert!(SweepParameter::parse(name, 3).is_none(), "{name}");
        }
    }

    #[test]
    fn variant_parsing() {
        assert_eq!(parse_variant("2:3"), Ok((2, 3)));
        assert!(parse_variant("2-3").is_err());
        assert!(parse_variant("a:3").is_err());
    }

    #[test]
    fn csv_layout() {
        let row = ResultRow {
            scenario: "s".into(),
            sweep_value_db: Some(-12.0),
            k_r: 1,
            k_b: 1,
            lambda_star: -0.25,
            tau_bar: 1.0890123,
            tau_bar_direct: None,
            arrival_rate: 0.4,
            departure_rate: 0.4,
            residual: 0.0,
            freq: [0.5, 0.25, 0.25],
            seed: 1,
            eval_slots: 10,
            tau_bar_se: 0.001,
            paired_se: None,
            trainer_iterations: 3,
            converged: true,
            case2: false,
        };
        let mut buf = Vec::new();
        write_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(
            lines.next().unwrap(),
            "s,-12,1,1,-0.25,1.08901,,0.4,0.4,0,0.5,0.25,0.25,1,10,0.001,,3,true,false"
        );
    }
}
