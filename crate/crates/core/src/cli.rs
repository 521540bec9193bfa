//! `zeta-audit <command> [--key value]...`
//!
//! Exit codes: 0 when no record fails, 1 when one does, 2 for usage or domain
//! errors, 3 when a computation cannot be certified.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::abel::{abel_zeta, phi, phi_tilde, psi, QuadSpec};
use crate::audit::{AuditRecord, ClaimId};
use crate::error::AuditError;
use crate::expansion::{
    audit_bound_iterated, audit_eq3, audit_eq4, audit_eq7_trend, audit_tail_under_zero_hypothesis, ExpansionParams,
    TailMode,
};
use crate::oracle::{critical_line_zeros, zeta_ref};
use crate::report::{plot_script, records_csv, scan_csv, to_json, values_csv, Report, ReportConfig, TOOL_VERSION};
use crate::scanner::{audit_proposition_on, identity_residual, proposition_record, reflection_check, scan_phi_zeros};
use crate::types::{Horizon, StripPoint};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;

pub const THREADS_ENV: &str = "ZETA_AUDIT_THREADS";

/// First nontrivial zero ordinate, used by the default scan and audit points.
pub const FIRST_ZERO_TAU: f64 = 14.1347251417;

const USAGE: &str = "usage: zeta-audit <eval-zeta|phi|scan|zeros|audit> [--key value]...
  eval-zeta  --x X --tau T [--method abel|oracle|both] [--tol TOL]
  phi        --x X --tau T [--t T|inf] [--gamma G]
  scan       --tau T [--x-min A] [--x-max B] [--steps N] [--tol TOL]
  zeros      --tau-min A --tau-max B [--tol TOL]
  audit      [--claims c1,c2,...] [--x X] [--gamma G] [--y Y] [--tau T] [--beta B] [--t T] [--n N] [--tol TOL]
common: --segments N --em-order M --out PATH --format json|csv --config FILE --timing on|off";

const FLAGS: &[&str] = &[
    "x", "tau", "t", "gamma", "y", "beta", "n", "x-min", "x-max", "steps", "tau-min", "tau-max", "claims", "method",
    "tol", "segments", "em-order", "out", "format", "config", "timing",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    EvalZeta,
    Phi,
    Scan,
    Zeros,
    Audit,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::EvalZeta => "eval-zeta",
            Command::Phi => "phi",
            Command::Scan => "scan",
            Command::Zeros => "zeros",
            Command::Audit => "audit",
        }
    }
}

impl FromStr for Command {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "eval-zeta" => Command::EvalZeta,
            "phi" => Command::Phi,
            "scan" => Command::Scan,
            "zeros" => Command::Zeros,
            "audit" => Command::Audit,
            other => return Err(CliError::Usage(format!("unknown command `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Abel,
    Oracle,
    Both,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Audit(AuditError),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Audit(AuditError::Convergence(_) | AuditError::CapExceeded(_)) => EXIT_CONVERGENCE,
            _ => EXIT_USAGE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Audit(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<AuditError> for CliError {
    fn from(e: AuditError) -> Self {
        CliError::Audit(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// A parsed invocation. `parameters` holds every flag after merging the config
/// file, keyed without the leading dashes.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub parameters: BTreeMap<String, String>,
    pub quad: QuadSpec,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub timing: bool,
}

impl RunConfig {
    pub fn parse<S: AsRef<str>>(argv: &[S]) -> CliResult<Self> {
        let mut args = argv.iter().map(AsRef::as_ref);
        let command: Command = args.next().ok_or_else(|| CliError::Usage("missing command".into()))?.parse()?;

        let mut given = BTreeMap::new();
        while let Some(flag) = args.next() {
            let key = flag
                .strip_prefix("--")
                .ok_or_else(|| CliError::Usage(format!("expected `--key`, found `{flag}`")))?;
            check_flag(key)?;
            let value = args.next().ok_or_else(|| CliError::Usage(format!("`--{key}` needs a value")))?;
            given.insert(key.to_string(), value.to_string());
        }

        let mut parameters = match given.get("config") {
            Some(path) => read_config_file(Path::new(path))?,
            None => BTreeMap::new(),
        };
        parameters.extend(given);
        parameters.remove("config");

        let mut quad = QuadSpec::default();
        if let Some(n) = parameters.get("segments") {
            quad.n_segments = parse_value("segments", n)?;
        }
        if let Some(m) = parameters.get("em-order") {
            quad.em_order = parse_value("em-order", m)?;
        }
        quad.validate()?;

        let format = match parameters.get("format").map(String::as_str) {
            None | Some("json") => Format::Json,
            Some("csv") => Format::Csv,
            Some(other) => return Err(CliError::Usage(format!("unknown format `{other}`"))),
        };
        let timing = match parameters.get("timing").map(String::as_str) {
            None | Some("off") => false,
            Some("on") => true,
            Some(other) => return Err(CliError::Usage(format!("--timing takes on|off, not `{other}`"))),
        };
        let output_path = parameters.get("out").map(PathBuf::from);
        Ok(Self { command, parameters, quad, output_path, format, timing })
    }

    fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.parameters.get(key).map(|v| parse_value(key, v)).transpose()
    }

    fn require<T: FromStr>(&self, key: &str) -> CliResult<T> {
        self.get(key)?.ok_or_else(|| CliError::Usage(format!("`{}` requires --{key}", self.command.as_str())))
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn list(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        self.parameters
            .get(key)
            .map(|v| v.split(',').map(|item| parse_value(key, item.trim())).collect())
            .transpose()
    }
}

fn check_flag(key: &str) -> CliResult<()> {
    if FLAGS.contains(&key) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("unknown flag `--{key}`")))
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value.parse().map_err(|_| CliError::Usage(format!("cannot parse `{value}` for --{key}")))
}

/// `key = value` lines; blank lines and `#` comments are skipped. Keys may be
/// written with or without the leading dashes.
fn read_config_file(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        let k = k.trim().trim_start_matches("--");
        check_flag(k)?;
        if k == "config" {
            return Err(CliError::Usage("config files cannot include other config files".into()));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn parse_horizon(text: &str) -> CliResult<Horizon> {
    match text.to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(Horizon::Infinite),
        _ => Ok(Horizon::finite(parse_value("t", text)?)?),
    }
}

/// Artifacts produced by a run, before anything is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    /// Rendered report in the requested format.
    pub text: String,
    /// Sibling gnuplot script for CSV scans: `(file name, contents)`.
    pub plot: Option<(PathBuf, String)>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.has_failure() {
            EXIT_FAIL
        } else {
            EXIT_OK
        }
    }
}

/// Executes a parsed configuration without touching the filesystem.
pub fn execute(config: &RunConfig) -> CliResult<Outcome> {
    let start = Instant::now();
    let mut report = Report {
        tool_version: TOOL_VERSION.to_string(),
        command: config.command.as_str().to_string(),
        config: ReportConfig {
            parameters: config.parameters.clone(),
            quad: config.quad,
            format: config.format.as_str().to_string(),
        },
        records: Vec::new(),
        scan: None,
        values: None,
        wall_time_s: 0.0,
    };
    match config.command {
        Command::EvalZeta => eval_zeta(config, &mut report)?,
        Command::Phi => eval_phi(config, &mut report)?,
        Command::Scan => scan(config, &mut report)?,
        Command::Zeros => zeros(config, &mut report)?,
        Command::Audit => report.records = audit(config)?,
    }
    if config.timing {
        report.wall_time_s = start.elapsed().as_secs_f64();
    }

    let text = match (config.format, &report.scan, &report.values) {
        (Format::Json, _, _) => to_json(&report).map_err(|e| CliError::Io(e.to_string()))?,
        (Format::Csv, Some(scan), _) => scan_csv(scan),
        (Format::Csv, None, Some(values)) => values_csv(values),
        (Format::Csv, None, None) => records_csv(&report.records),
    };
    let plot = match (config.format, &report.scan) {
        (Format::Csv, Some(scan)) => {
            let csv = config.output_path.clone().unwrap_or_else(|| PathBuf::from("scan.csv"));
            let name = csv.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            Some((csv.with_extension("plot"), plot_script(&name, scan.tau)))
        }
        _ => None,
    };
    Ok(Outcome { report, text, plot })
}

fn eval_zeta(config: &RunConfig, report: &mut Report) -> CliResult<()> {
    let x: f64 = config.require("x")?;
    let tau: f64 = config.require("tau")?;
    let method = match config.parameters.get("method").map(String::as_str) {
        None | Some("both") => Method::Both,
        Some("abel") => Method::Abel,
        Some("oracle") => Method::Oracle,
        Some(other) => return Err(CliError::Usage(format!("unknown method `{other}`"))),
    };
    let tol = config.get_or("tol", 1e-12)?;
    let p = StripPoint::new(x, tau)?;
    let mut values = BTreeMap::from([("x".to_string(), x), ("tau".to_string(), tau)]);
    let abel = match method {
        Method::Abel | Method::Both => Some(abel_zeta(p, &config.quad)?),
        Method::Oracle => None,
    };
    let oracle = match method {
        Method::Oracle | Method::Both => Some(zeta_ref(p.s(), tol)?),
        Method::Abel => None,
    };
    if let Some(a) = abel {
        values.insert("abel_re".into(), a.value.re);
        values.insert("abel_im".into(), a.value.im);
        values.insert("abel_err".into(), a.err_estimate);
    }
    if let Some(o) = oracle {
        values.insert("oracle_re".into(), o.value.re);
        values.insert("oracle_im".into(), o.value.im);
        values.insert("oracle_err".into(), o.err_estimate);
    }
    if let (Some(a), Some(o)) = (abel, oracle) {
        values.insert("residual".into(), (a.value - o.value).norm());
    }
    report.values = Some(values);
    Ok(())
}

fn eval_phi(config: &RunConfig, report: &mut Report) -> CliResult<()> {
    let x: f64 = config.require("x")?;
    let tau: f64 = config.require("tau")?;
    let t = match config.parameters.get("t") {
        Some(text) => parse_horizon(text)?,
        None => Horizon::Infinite,
    };
    let point = phi(StripPoint::new(x, tau)?, t, &config.quad)?;
    let mut values = BTreeMap::from([
        ("x".to_string(), x),
        ("tau".to_string(), tau),
        ("psi".to_string(), psi(x, tau)?),
        ("phi".to_string(), point.value),
        ("err".to_string(), point.err_estimate),
    ]);
    if let Horizon::Finite(t) = t {
        values.insert("t".into(), t);
    }
    if let Some(gamma) = config.get::<f64>("gamma")? {
        let t = match t {
            Horizon::Finite(t) => t,
            Horizon::Infinite => return Err(CliError::Usage("--gamma needs a finite --t".into())),
        };
        values.insert("gamma".into(), gamma);
        values.insert("phi_tilde".into(), phi_tilde(x, gamma, tau, t, &config.quad)?);
    }
    report.values = Some(values);
    Ok(())
}

fn scan(config: &RunConfig, report: &mut Report) -> CliResult<()> {
    let tau: f64 = config.require("tau")?;
    let x_min = config.get_or("x-min", 0.05)?;
    let x_max = config.get_or("x-max", 0.95)?;
    let steps = config.get_or("steps", 1801usize)?;
    let scan = scan_phi_zeros(tau, x_min, x_max, steps, &config.quad)?;
    report.records.push(proposition_record(&scan));
    report.scan = Some(scan);
    Ok(())
}

fn zeros(config: &RunConfig, report: &mut Report) -> CliResult<()> {
    let lo: f64 = config.require("tau-min")?;
    let hi: f64 = config.require("tau-max")?;
    let tol = config.get_or("tol", 1e-8)?;
    let (found, best) = critical_line_zeros(lo, hi, tol)?;
    let mut values = BTreeMap::from([
        ("tau_min".to_string(), lo),
        ("tau_max".to_string(), hi),
        ("count".to_string(), found.len() as f64),
        ("best_abs".to_string(), best),
    ]);
    for (i, g) in found.iter().enumerate() {
        values.insert(format!("zero_{i:03}"), *g);
    }
    report.values = Some(values);
    Ok(())
}

fn audit(config: &RunConfig) -> CliResult<Vec<AuditRecord>> {
    let claims: Vec<ClaimId> = match config.parameters.get("claims") {
        Some(list) => list
            .split(',')
            .map(|c| c.trim().parse().map_err(|_| CliError::Usage(format!("unknown claim `{}`", c.trim()))))
            .collect::<CliResult<_>>()?,
        None => ClaimId::ALL.to_vec(),
    };
    let spec = &config.quad;
    let tol = config.get_or("tol", 1e-6)?;
    let tau_list = config.list("tau")?;
    let tau = tau_list.as_ref().and_then(|l| l.first().copied());
    let params = ExpansionParams::new(
        config.get_or("x", 0.4)?,
        config.get("gamma")?,
        config.get_or("y", 0.6)?,
        tau.unwrap_or(2.0),
        config.get("beta")?,
    )?;

    let mut records = Vec::new();
    let mut bound_done = false;
    for claim in claims {
        match claim {
            ClaimId::Identity => {
                for x in [0.2, 0.5, 0.8] {
                    for t in [1.0, 5.0, 14.134725, 21.022040] {
                        records.push(identity_residual(StripPoint::new(x, t)?, spec)?);
                    }
                }
            }
            ClaimId::Eq3 => {
                let ts = match config.get::<f64>("t")? {
                    Some(t) => vec![t],
                    None => vec![1.0, 2.0, 3.0],
                };
                records.extend(audit_eq3(&params, &ts, tol, spec)?);
            }
            ClaimId::Eq4 => {
                let t = config.get_or("t", 2.0)?;
                let ns = match config.get::<usize>("n")? {
                    Some(n) => vec![n],
                    None => vec![1, 3, 6],
                };
                records.extend(audit_eq4(&params, t, &ns, tol, spec)?);
            }
            ClaimId::Eq6 | ClaimId::SupBound => {
                if !bound_done {
                    let n_max = config.get_or("n", 6usize)?;
                    let b = audit_bound_iterated(
                        params.x(),
                        params.gamma(),
                        params.tau(),
                        &[0.5, 1.0, 2.0, 4.0],
                        n_max,
                        spec,
                    )?;
                    records.push(b.bound);
                    records.push(b.premise);
                    bound_done = true;
                }
            }
            ClaimId::Eq7Trend => records.push(audit_eq7_trend(&params, &[8, 12, 16, 24], spec)?),
            ClaimId::TailBound => {
                let ts = [0.0, 1.0, 3.0, 6.0];
                records.push(audit_tail_under_zero_hypothesis(
                    0.5,
                    0.6,
                    tau.unwrap_or(FIRST_ZERO_TAU),
                    &ts,
                    TailMode::Hypothesis,
                    spec,
                )?);
                records.push(audit_tail_under_zero_hypothesis(
                    params.x(),
                    params.gamma(),
                    params.tau(),
                    &ts,
                    TailMode::Shifted,
                    spec,
                )?);
            }
            ClaimId::Prop1 => {
                let taus = tau_list.clone().unwrap_or_else(|| vec![FIRST_ZERO_TAU]);
                let x_min = config.get_or("x-min", 0.05)?;
                let x_max = config.get_or("x-max", 0.95)?;
                let steps = config.get_or("steps", 1801usize)?;
                records.extend(audit_proposition_on(&taus, x_min, x_max, steps, spec));
            }
            ClaimId::Reflection => {
                for (x, t) in [(0.3, 2.0), (0.5, FIRST_ZERO_TAU), (0.3, FIRST_ZERO_TAU)] {
                    records.push(reflection_check(x, t, tol)?);
                }
            }
        }
    }
    Ok(records)
}

/// Reads `ZETA_AUDIT_THREADS` and sizes the global rayon pool.
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be an integer >= 1, got `{raw}`")))?;
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Full entry point: parse, execute, write artifacts. Returns the exit code.
pub fn run<S: AsRef<str>>(argv: &[S], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match run_inner(argv, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "zeta-audit: {e}");
            if matches!(e, CliError::Usage(_)) {
                let _ = writeln!(stderr, "{USAGE}");
            }
            e.exit_code()
        }
    }
}

fn run_inner<S: AsRef<str>>(argv: &[S], stdout: &mut dyn Write) -> CliResult<i32> {
    configure_threads()?;
    let config = RunConfig::parse(argv)?;
    let outcome = execute(&config)?;
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match &config.output_path {
        Some(path) => fs::write(path, &outcome.text).map_err(io)?,
        None => stdout.write_all(outcome.text.as_bytes()).map_err(io)?,
    }
    if let (Some(_), Some((path, script))) = (&config.output_path, &outcome.plot) {
        fs::write(path, script).map_err(io)?;
    }
    Ok(outcome.exit_code())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> CliResult<RunConfig> {
        RunConfig::parse(args)
    }

    #[test]
    fn grammar() {
        let c = parse(&["eval-zeta", "--x", "0.5", "--tau", "3", "--segments", "2000"]).unwrap();
        assert_eq!(c.command, Command::EvalZeta);
        assert_eq!(c.quad.n_segments, 2000);
        assert_eq!(c.format, Format::Json);
        assert_eq!(c.parameters["tau"], "3");
        assert!(matches!(parse(&[]), Err(CliError::Usage(_))));
        assert!(matches!(parse(&["plot"]), Err(CliError::Usage(_))));
        assert!(matches!(parse(&["phi", "--bogus", "1"]), Err(CliError::Usage(_))));
        assert!(matches!(parse(&["phi", "--x"]), Err(CliError::Usage(_))));
        assert!(matches!(parse(&["phi", "x", "1"]), Err(CliError::Usage(_))));
        assert!(matches!(parse(&["scan", "--format", "xml"]), Err(CliError::Usage(_))));
        assert!(matches!(parse(&["scan", "--em-order", "9"]), Err(CliError::Audit(AuditError::Domain(_)))));
    }

    #[test]
    fn config_file_is_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "# defaults\nx = 0.3\n--tau=7\nsegments = 500\n").unwrap();
        let c = parse(&["phi", "--config", path.to_str().unwrap(), "--tau", "9"]).unwrap();
        assert_eq!(c.parameters["x"], "0.3");
        assert_eq!(c.parameters["tau"], "9");
        assert_eq!(c.quad.n_segments, 500);
        assert!(!c.parameters.contains_key("config"));

        fs::write(&path, "x 0.3\n").unwrap();
        assert!(matches!(parse(&["phi", "--config", path.to_str().unwrap()]), Err(CliError::Usage(_))));
    }

    #[test]
    fn horizon_text() {
        assert_eq!(parse_horizon("inf").unwrap(), Horizon::Infinite);
        assert_eq!(parse_horizon("2.5").unwrap(), Horizon::Finite(2.5));
        assert!(parse_horizon("-1").is_err());
    }

    #[test]
    fn exit_code_mapping() {
        assert_eq!(CliError::Usage(String::new()).exit_code(), EXIT_USAGE);
        assert_eq!(CliError::Audit(AuditError::Domain(String::new())).exit_code(), EXIT_USAGE);
        assert_eq!(CliError::Audit(AuditError::Convergence(String::new())).exit_code(), EXIT_CONVERGENCE);
    }

    #[test]
    fn any_fail_verdict_exits_one() {
        let c = parse(&["phi", "--x", "0.4", "--tau", "2", "--segments", "400"]).unwrap();
        let mut outcome = execute(&c).unwrap();
        assert_eq!(outcome.exit_code(), EXIT_OK);
        outcome.report.records.push(AuditRecord::equality(ClaimId::Eq3, [("t", 1.0)], 1.0, 0.0, 1e-6, 0.0));
        assert_eq!(outcome.exit_code(), EXIT_FAIL);
    }

    #[test]
    fn phi_tilde_needs_finite_horizon() {
        let c = parse(&["phi", "--x", "0.4", "--tau", "2", "--gamma", "0.5", "--segments", "400"]).unwrap();
        assert!(matches!(execute(&c), Err(CliError::Usage(_))));
    }
}
