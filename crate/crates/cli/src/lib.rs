//! Library side of the `kropina` binary, so that runs can be driven from
//! tests without spawning a process.

pub mod args;
mod commands;
pub mod json;

use std::fmt::Write as _;

use kropina_core::CoreError;
use serde_json::{json, Value};
use thiserror::Error;

pub use args::{BackendArg, Cli, Command, Common, OutputFormat};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Compute {
        context: String,
        #[source]
        source: CoreError,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub(crate) fn compute(context: impl Into<String>) -> impl FnOnce(CoreError) -> CliError {
        let context = context.into();
        move |source| match source {
            CoreError::Config(msg) => CliError::Config(msg),
            source => CliError::Compute { context, source },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Compute { .. } | CliError::Io(_) => EXIT_COMPUTE,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Compute { source, .. } => match source {
                CoreError::DomainViolation(_) | CoreError::EmptyCone(_) => "DomainViolation",
                CoreError::ExactBackendUnavailable(_) => "ExactBackendUnavailable",
                _ => "ComputationError",
            },
            CliError::Io(_) => "IoError",
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::compute("run")(e)
    }
}

/// One result entry plus whether it counts as holding.
pub(crate) struct Item {
    pub value: Value,
    pub holds: bool,
    /// Short human line for text mode.
    pub line: String,
}

/// Outcome of a run: the report and the exit status it implies.
#[derive(Debug)]
pub struct Outcome {
    pub report: Value,
    pub exit_code: i32,
}

impl Outcome {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => json::to_string(&self.report),
            OutputFormat::Text => render_text(&self.report),
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Compute { .. } => "compute",
        Command::RationalityTable { .. } => "rationality-table",
        Command::Classify { .. } => "classify",
        Command::FieldResidual { .. } => "field-residual",
        Command::VerifyExample { .. } => "verify-example",
    }
}

/// Runs one command. Never panics on bad input; errors become a report with
/// a structured `error` entry and a nonzero exit status.
pub fn run(cli: &Cli) -> Outcome {
    let echo = json!({
        "command": serde_json::to_value(&cli.command).unwrap_or(Value::Null),
        "common": serde_json::to_value(&cli.common).unwrap_or(Value::Null),
    });
    let mut report = json!({
        "command": command_name(&cli.command),
        "config-echo": echo,
        "version": env!("CARGO_PKG_VERSION"),
    });
    match commands::dispatch(cli) {
        Ok(items) => {
            let failures: Vec<Value> = items
                .iter()
                .enumerate()
                .filter(|(_, it)| !it.holds)
                .map(|(k, it)| json!({"index": k, "summary": it.line}))
                .collect();
            let holds = failures.is_empty();
            report["results"] = Value::Array(items.iter().map(|it| it.value.clone()).collect());
            report["lines"] = Value::Array(items.into_iter().map(|it| Value::String(it.line)).collect());
            report["verdict"] = json!(if holds { "holds" } else { "fails" });
            if !holds {
                report["failures"] = Value::Array(failures);
            }
            Outcome {
                report,
                exit_code: if holds { EXIT_HOLDS } else { EXIT_FAILS },
            }
        }
        Err(e) => {
            let context = match &e {
                CliError::Compute { context, .. } => context.clone(),
                _ => String::new(),
            };
            report["results"] = json!([]);
            report["verdict"] = json!("error");
            report["error"] = json!({"kind": e.kind(), "message": e.to_string(), "context": context});
            Outcome {
                report,
                exit_code: e.exit_code(),
            }
        }
    }
}

fn render_text(report: &Value) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "kropina {} {}", report["command"].as_str().unwrap_or(""), report["version"].as_str().unwrap_or(""));
    if let Some(lines) = report["lines"].as_array() {
        for l in lines {
            let _ = writeln!(s, "  {}", l.as_str().unwrap_or(""));
        }
    }
    if let Some(err) = report.get("error") {
        let _ = writeln!(s, "error [{}]: {}", err["kind"].as_str().unwrap_or(""), err["message"].as_str().unwrap_or(""));
    }
    let _ = writeln!(s, "verdict: {}", report["verdict"].as_str().unwrap_or(""));
    s
}
