//! Run configuration and text/record rendering for the command-line tool.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::chart::Chart;
use crate::check::{CheckConfig, CheckResult, DEFAULT_SAMPLES, DEFAULT_SEED};
use crate::contact::{hamiltonian_residuals, reeb_residual, ContactSystem};
use crate::error::{Error, Result};
use crate::forms::{share, DifferentialForm};
use crate::models::{build_model, ModelKey};
use crate::toric::{EquivalenceClass, YpqReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    /// One JSON object per line.
    Records,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Self::Text),
            "records" => Ok(Self::Records),
            _ => Err(Error::InvalidParameter(format!(
                "unknown format `{s}` (expected text or records)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub samples: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            samples: DEFAULT_SAMPLES,
            tolerances: BTreeMap::new(),
            format: OutputFormat::Text,
        }
    }
}

fn parse_number<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad value `{value}` for `{key}`")))
}

impl RunConfig {
    /// Sets one setting by its config-file key: `seed`, `samples`, `format`
    /// or `tol.NAME`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "seed" => self.seed = parse_number(key, value)?,
            "samples" => self.samples = parse_number(key, value)?,
            "format" => self.format = value.parse()?,
            _ => match key.strip_prefix("tol.") {
                Some(name) => self.set_tolerance(name, parse_number(key, value)?),
                None => return Err(Error::InvalidParameter(format!("unknown setting `{key}`"))),
            },
        }
        Ok(())
    }

    pub fn set_tolerance(&mut self, name: &str, value: f64) {
        self.tolerances.insert(name.to_string(), value);
    }

    /// Parses `NAME=VALUE` as given to `--tol`.
    pub fn set_tolerance_assignment(&mut self, assignment: &str) -> Result<()> {
        let (name, value) = assignment.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!("tolerance override `{assignment}` is not NAME=VALUE"))
        })?;
        let name = name.trim();
        self.set_tolerance(name, parse_number(name, value.trim())?);
        Ok(())
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, contents: &str) -> Result<()> {
        for (number, line) in contents.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("config line {}: expected key = value", number + 1))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Validated check configuration.
    pub fn check_config(&self) -> Result<CheckConfig> {
        if self.samples == 0 {
            return Err(Error::InvalidParameter("samples must be at least 1".into()));
        }
        let mut config = CheckConfig::default()
            .with_samples(self.samples)
            .with_seed(self.seed);
        for (name, value) in &self.tolerances {
            config.tolerances.set(name, *value)?;
        }
        Ok(config)
    }
}

/// Process exit status for an error.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::NotContact { .. } | Error::Singular { .. } => 3,
        Error::NotFree { .. } => 4,
        _ => 2,
    }
}

pub struct ModelRun {
    pub key: ModelKey,
    pub description: String,
    pub results: Vec<CheckResult>,
}

impl ModelRun {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

/// Expands `all` and parses the remaining keys, keeping their order.
pub fn resolve_keys<S: AsRef<str>>(names: &[S]) -> Result<Vec<ModelKey>> {
    let mut keys = Vec::new();
    for name in names {
        let name = name.as_ref();
        if name == "all" {
            keys.extend(ModelKey::all());
        } else {
            keys.push(name.parse()?);
        }
    }
    Ok(keys)
}

pub fn run_verify(keys: &[ModelKey], config: &CheckConfig) -> Result<Vec<ModelRun>> {
    keys.iter()
        .map(|key| {
            let model = build_model(key)?;
            Ok(ModelRun {
                key: key.clone(),
                description: model.description.clone(),
                results: model.verify(config)?,
            })
        })
        .collect()
}

fn format_point(point: &[f64]) -> String {
    let parts: Vec<String> = point.iter().map(|v| format!("{v:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn check_record(model: &str, r: &CheckResult) -> Value {
    let mut value = serde_json::to_value(r).expect("check results serialize");
    let object = value.as_object_mut().expect("check result is an object");
    object.insert("kind".into(), json!("check"));
    object.insert("model".into(), json!(model));
    value
}

pub fn render_verify(runs: &[ModelRun], format: OutputFormat) -> String {
    let total: usize = runs.iter().map(|r| r.results.len()).sum();
    let failed: usize = runs
        .iter()
        .map(|r| r.results.iter().filter(|c| !c.passed).count())
        .sum();
    let mut out = String::new();
    match format {
        OutputFormat::Text => {
            for run in runs {
                writeln!(out, "model {}: {}", run.key, run.description).unwrap();
                let width = run.results.iter().map(|r| r.name.len()).max().unwrap_or(0);
                for r in &run.results {
                    let status = if r.passed { "PASS" } else { "FAIL" };
                    write!(
                        out,
                        "  {status}  {:<width$}  residual {:.3e}  tol {:.1e}  samples {}",
                        r.name, r.max_residual, r.tolerance, r.samples
                    )
                    .unwrap();
                    if !r.passed {
                        if let Some(w) = &r.witness {
                            write!(out, "  witness {}", format_point(w)).unwrap();
                        }
                        if let Some(d) = &r.detail {
                            write!(out, "  ({d})").unwrap();
                        }
                    }
                    out.push('\n');
                }
            }
            writeln!(out, "summary: {total} checks, {failed} failed").unwrap();
        }
        OutputFormat::Records => {
            for run in runs {
                for r in &run.results {
                    writeln!(out, "{}", check_record(&run.key.to_string(), r)).unwrap();
                }
            }
            writeln!(out, "{}", json!({"kind": "summary", "checks": total, "failed": failed})).unwrap();
        }
    }
    out
}

/// Jacobi bracket at a point together with the residuals of the systems
/// defining the Hamiltonian and Reeb fields there.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketReport {
    pub value: f64,
    pub residuals: Vec<(String, f64)>,
}

fn parse_point(source: &str) -> Result<Vec<f64>> {
    source
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad point coordinate `{t}`")))
        })
        .collect()
}

/// Evaluates `{f, g}` for a chart given as comma-separated coordinate names.
pub fn evaluate_bracket(
    chart: &str,
    eta: &str,
    f: &str,
    g: &str,
    point: &str,
    config: &CheckConfig,
) -> Result<BracketReport> {
    let names: Vec<&str> = chart.split(',').map(str::trim).collect();
    if names.iter().any(|n| n.is_empty()) {
        return Err(Error::InvalidParameter(format!("bad chart `{chart}`")));
    }
    let chart = share(Chart::new("cli", &names));
    let system = ContactSystem::unchecked(DifferentialForm::parse_one_form(&chart, eta)?)?;
    let (f, g) = (system.parse_function(f)?, system.parse_function(g)?);
    let point = parse_point(point)?;
    if point.len() != chart.dim() {
        return Err(Error::PointDimension {
            expected: chart.dim(),
            got: point.len(),
        });
    }
    if system.contact_margin(&point)? <= config.tol("contact") {
        return Err(Error::NotContact { witness: point });
    }
    let frame = system.frame_at(&point)?;
    let mut residuals = vec![("reeb".to_string(), reeb_residual(&frame))];
    for (label, h) in [("f", &f), ("g", &g)] {
        let (value, transformation) = hamiltonian_residuals(&frame, h)?;
        residuals.push((format!("hamiltonian[{label}]"), value));
        residuals.push((format!("transformation[{label}]"), transformation));
    }
    Ok(BracketReport {
        value: system.jacobi_bracket_at(&f, &g, &point)?,
        residuals,
    })
}

pub fn render_bracket(report: &BracketReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => {
            let mut out = format!("{{f, g}} = {}\n", report.value);
            for (name, r) in &report.residuals {
                writeln!(out, "  residual {name} {r:.3e}").unwrap();
            }
            out
        }
        OutputFormat::Records => {
            let residuals: serde_json::Map<String, Value> =
                report.residuals.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
            format!(
                "{}\n",
                json!({"kind": "bracket", "value": report.value, "residuals": residuals})
            )
        }
    }
}

fn tuple<T: std::fmt::Display>(items: &[T]) -> String {
    let parts: Vec<String> = items.iter().map(T::to_string).collect();
    format!("({})", parts.join(", "))
}

pub fn render_ypq(report: &YpqReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Records => {
            let mut value = serde_json::to_value(report).expect("reports serialize");
            value
                .as_object_mut()
                .expect("report is an object")
                .insert("kind".into(), json!("ypq"));
            format!("{value}\n")
        }
        OutputFormat::Text => {
            let h = &report.hirzebruch;
            let k = &report.quotient_kahler;
            let reduced: Vec<String> = report
                .reparametrized_weights
                .iter()
                .enumerate()
                .map(|(i, w)| format!("z{} {}", i + 1, tuple(w)))
                .collect();
            let rows = [
                ("circle weights", format!("{}  sum {}", tuple(&report.circle_weights), report.weight_sum)),
                ("free", "yes".to_string()),
                (
                    "reeb generator",
                    format!("{}  minimum on level set {}", tuple(&report.reeb_generator), report.reeb_minimum),
                ),
                (
                    "basis change",
                    format!("{} {}", tuple(&report.basis_change[0]), tuple(&report.basis_change[1])),
                ),
                ("reduced weights", reduced.join("  ")),
                (
                    "hirzebruch",
                    format!("(S_{}, Delta_{})  branch {}", h.surface_index, h.ramification, h.branch),
                ),
                (
                    "quotient",
                    format!(
                        "({}, {})  omega = {} omega_1 + {} omega_2",
                        k.weights.0, k.weights.1, k.omega.0, k.omega.1
                    ),
                ),
                ("phi(p)", report.phi_p.to_string()),
                ("torus classes >=", report.torus_classes_lower_bound.to_string()),
                ("class key", report.equivalence_class_key.to_string()),
            ];
            let mut out = format!("Y({},{})\n", report.p, report.q);
            for (label, value) in rows {
                writeln!(out, "  {label:<17} {value}").unwrap();
            }
            out
        }
    }
}

pub fn render_classes(classes: &[EquivalenceClass], format: OutputFormat) -> String {
    let mut out = String::new();
    match format {
        OutputFormat::Records => {
            for class in classes {
                let members: Vec<u64> = class.members.iter().map(|m| m.q).collect();
                let record = json!({
                    "kind": "class",
                    "p": class.p,
                    "phi_p": class.phi_p,
                    "size": members.len(),
                    "members": members,
                });
                writeln!(out, "{record}").unwrap();
            }
        }
        OutputFormat::Text => {
            writeln!(out, "{:>4}  {:>6}  {:>4}  members q", "p", "phi(p)", "size").unwrap();
            for class in classes {
                let members: Vec<String> = class.members.iter().map(|m| m.q.to_string()).collect();
                writeln!(
                    out,
                    "{:>4}  {:>6}  {:>4}  {}",
                    class.p,
                    class.phi_p,
                    class.members.len(),
                    members.join(" ")
                )
                .unwrap();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_and_overrides() {
        let mut run = RunConfig::default();
        run.apply_file("# comment\nseed = 7\nsamples=16\ntol.reeb = 1e-6\nformat = records\n")
            .unwrap();
        assert_eq!((run.seed, run.samples, run.format), (7, 16, OutputFormat::Records));
        let config = run.check_config().unwrap();
        assert_eq!(config.tol("reeb"), 1e-6);
        assert!(run.apply_file("bogus = 1").is_err());
        assert!(run.apply_file("seed 7").is_err());
        run.set_tolerance_assignment("nosuch=1").unwrap();
        assert!(run.check_config().is_err());
        run.samples = 0;
        assert!(run.check_config().is_err());
    }

    #[test]
    fn bracket_values() {
        let config = CheckConfig::default();
        let r = evaluate_bracket("x,y,z", "dz - y*dx", "-y", "z", "1,2,3", &config).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.residuals.iter().all(|(_, v)| *v < 1e-12));
        let r = evaluate_bracket("x,y,z", "dz - y*dx", "1", "z", "1,2,3", &config).unwrap();
        assert_eq!(r.value, 1.0);
        let e = evaluate_bracket("x,y,z", "dz", "1", "z", "1,2,3", &config).unwrap_err();
        assert_eq!(exit_code(&e), 3);
        assert!(e.to_string().contains("contact condition fails"));
        let e = evaluate_bracket("x,y,z", "dz - y*", "1", "z", "1,2,3", &config).unwrap_err();
        assert_eq!(exit_code(&e), 2);
    }

    #[test]
    fn keys_expand() {
        assert_eq!(resolve_keys(&["all"]).unwrap(), ModelKey::all());
        assert!(resolve_keys(&["nosuchmodel"]).is_err());
    }
}
