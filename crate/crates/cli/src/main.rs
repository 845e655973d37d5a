//! `propor` command-line entry point.
//!
//! Exit status: 0 on success, 1 for usage or validation errors, 2 for I/O
//! errors. Nothing is written to the output stream unless the command
//! succeeds.

mod render;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use propor::{
    parse_scenario_bytes, run_episode, select_response, sweep, AxisSpec, ModelVariant,
    PolitenessStrategy, ScenarioDocument, Severity, SpeechAct,
};

const GRID_STEP_ENV: &str = "PROPOR_GRID_STEP";

#[derive(Parser, Debug)]
#[command(
    name = "propor",
    version,
    about = "Select and evaluate proportional responses to norm violations",
    after_help = "Environment:\n  PROPOR_GRID_STEP  overrides params.grid_step, in (0, 1]"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score one act (--act) or every candidate act.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        /// Act to score, as strategy:severity (e.g. bald:0.9, negative_politeness:0.55)
        #[arg(long, value_name = "STRATEGY:SEVERITY")]
        act: Option<String>,
    },
    /// Pick the utility-maximizing response and explain it.
    Select {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Re-run selection across values of one parameter.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// name=v1,v2,... or name=start:stop:step; names: s_a, beta, alpha, gamma, kappa, rho, n
        #[arg(long, value_name = "SPEC")]
        axis: String,
    },
    /// Play out the episode section of the scenario file.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
    },
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Evaluate { common, .. }
            | Command::Select { common }
            | Command::Sweep { common, .. }
            | Command::Simulate { common } => common,
        }
    }
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Scenario file (JSON)
    scenario: PathBuf,
    #[arg(long, value_enum, default_value_t = VariantArg::Base)]
    variant: VariantArg,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write results here instead of standard output
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum VariantArg {
    Base,
    Extended,
}

impl From<VariantArg> for ModelVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Base => ModelVariant::Base,
            VariantArg::Extended => ModelVariant::Extended,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Format {
    Table,
    Csv,
}

#[derive(Debug)]
enum CliError {
    /// Bad flags or input values.
    Invalid(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Invalid(m) | CliError::Io(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    let common = command.common();
    let doc = load(&common.scenario)?;
    let variant = ModelVariant::from(common.variant);
    let scenario = doc.scenario();

    let text = match &command {
        Command::Evaluate { act, .. } => {
            let act = act
                .as_deref()
                .map(|spec| parse_act(spec, scenario.params()))
                .transpose()?;
            render::evaluate(scenario, act.as_ref(), variant, common.format)
        }
        Command::Select { .. } => {
            let result = select_response(scenario, variant);
            render::select(scenario, &result, common.format)
        }
        Command::Sweep { axis, .. } => {
            let spec: AxisSpec = axis
                .parse()
                .map_err(|e| CliError::Invalid(format!("--axis: {e}")))?;
            let rows = sweep(scenario, &spec, variant)
                .map_err(|e| CliError::Invalid(format!("--axis: {e}")))?;
            render::sweep(spec.axis, &rows, common.format)
        }
        Command::Simulate { .. } => {
            let script = doc.episode().ok_or_else(|| {
                CliError::Invalid(format!(
                    "{}: no episode section to simulate",
                    common.scenario.display()
                ))
            })?;
            let trace = run_episode(script, variant);
            render::simulate(&trace, common.format)
        }
    };
    emit(common.output.as_deref(), &text)
}

fn load(path: &Path) -> Result<ScenarioDocument, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let doc = parse_scenario_bytes(&bytes)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    apply_grid_override(doc, std::env::var(GRID_STEP_ENV).ok().as_deref())
}

fn apply_grid_override(
    doc: ScenarioDocument,
    value: Option<&str>,
) -> Result<ScenarioDocument, CliError> {
    let Some(raw) = value else { return Ok(doc) };
    let step: f64 = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Invalid(format!("{GRID_STEP_ENV}: '{raw}' is not a number")))?;
    if !(step > 0.0 && step <= 1.0) {
        return Err(CliError::Invalid(format!(
            "{GRID_STEP_ENV}: value {step} outside permitted range (0, 1]"
        )));
    }
    let mut params = doc.scenario().params().clone();
    params.grid_step = step;
    doc.with_params(params)
        .map_err(|e| CliError::Invalid(format!("{GRID_STEP_ENV}: {e}")))
}

fn parse_act(spec: &str, params: &propor::ModelParams) -> Result<SpeechAct, CliError> {
    let invalid = |msg: String| CliError::Invalid(format!("--act: {msg}"));
    if spec.trim().eq_ignore_ascii_case("silence") {
        return Ok(SpeechAct::Silence);
    }
    let (strategy, severity) = spec
        .split_once(':')
        .ok_or_else(|| invalid(format!("expected strategy:severity, got '{spec}'")))?;
    let strategy: PolitenessStrategy = strategy.parse().map_err(|e| invalid(format!("{e}")))?;
    let severity: f64 = severity
        .trim()
        .parse()
        .map_err(|_| invalid(format!("'{severity}' is not a number")))?;
    let severity = Severity::new(severity).map_err(|e| invalid(format!("severity {e}")))?;
    SpeechAct::utterance(strategy, severity, params).map_err(|e| invalid(e.to_string()))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("cannot write to standard output: {e}")))
        }
    }
}
