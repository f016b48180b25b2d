//! Argument parsing and command execution.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kmboot_core::bands::{gini_interval_run, lorenz_band_run, mrl_band_run};
use kmboot_core::covariance::censoring_diagnostic;
use kmboot_core::{
    km_fit, sigma2_hat, suggest_t2, ObservedSample, ResamplePlan, StepFunction,
    DEFAULT_T2_THRESHOLD,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::ingest::ingest;
use crate::scenario::Scenario;

#[derive(Debug, Parser)]
#[command(
    name = "kmboot",
    version,
    about = "Kaplan-Meier estimates and bootstrap confidence bands"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kaplan-Meier, Nelson-Aalen, censoring KM and variance step functions.
    Fit {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Simultaneous confidence band for the mean residual lifetime or Lorenz curve.
    Band {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        boot: BootArgs,
        #[arg(long, value_enum, default_value_t = BandChoice::Mrl)]
        kind: BandChoice,
        /// Left end of the band interval (mrl).
        #[arg(long, default_value_t = 0.0)]
        t1: f64,
        /// Right end of the band interval (mrl): a number or `auto`.
        #[arg(long, default_value = "auto")]
        t2: T2,
        /// Number of grid intervals on [0, 1] (lorenz).
        #[arg(long, default_value_t = 100)]
        resolution: usize,
    },
    /// Confidence interval for the Gini index.
    Gini {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        boot: BootArgs,
    },
    /// Run a Monte Carlo scenario file.
    Simulate {
        scenario: PathBuf,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Plug-in censoring diagnostics for powers 1 and 3.
    CheckConditions {
        #[command(flatten)]
        io: IoArgs,
        /// Lower integration limit.
        #[arg(long, default_value_t = 0.0)]
        t: f64,
    },
}

#[derive(Debug, Args)]
pub struct IoArgs {
    /// CSV file with header `time,status`.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BootArgs {
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Bootstrap replicates.
    #[arg(long = "B", default_value_t = 1000)]
    pub replicates: usize,
    /// Random seed; generated and reported when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BandChoice {
    Mrl,
    Lorenz,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum T2 {
    Auto,
    At(f64),
}

impl std::str::FromStr for T2 {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(T2::Auto);
        }
        s.parse::<f64>()
            .map(T2::At)
            .map_err(|_| format!("expected a number or `auto`, got `{s}`"))
    }
}

/// Top-level JSON document written by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub command: String,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub alpha: Option<f64>,
    #[serde(rename = "B")]
    pub replicates: Option<usize>,
    #[serde(rename = "B_dropped")]
    pub dropped: Option<usize>,
    pub warnings: Vec<String>,
    pub result: Value,
}

impl Envelope {
    fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            seed: None,
            n: None,
            alpha: None,
            replicates: None,
            dropped: None,
            warnings: Vec::new(),
            result: Value::Null,
        }
    }
}

/// What a command produced: the JSON envelope and its CSV rendering.
pub struct Artifact {
    pub envelope: Envelope,
    pub csv: String,
}

impl Artifact {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.envelope).expect("serializable");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut header = String::new();
                let e = &self.envelope;
                let _ = writeln!(header, "# command={}", e.command);
                for (key, value) in [
                    ("seed", e.seed.map(|v| v.to_string())),
                    ("n", e.n.map(|v| v.to_string())),
                    ("alpha", e.alpha.map(|v| v.to_string())),
                    ("B", e.replicates.map(|v| v.to_string())),
                    ("B_dropped", e.dropped.map(|v| v.to_string())),
                ] {
                    if let Some(v) = value {
                        let _ = writeln!(header, "# {key}={v}");
                    }
                }
                for w in &e.warnings {
                    let _ = writeln!(header, "# warning: {w}");
                }
                header + &self.csv
            }
        }
    }
}

pub fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Fit { .. } => "fit",
        Command::Band { .. } => "band",
        Command::Gini { .. } => "gini",
        Command::Simulate { .. } => "simulate",
        Command::CheckConditions { .. } => "check-conditions",
    }
}

/// Output destination and format of a command.
pub fn destination(command: &Command) -> (Option<PathBuf>, Format) {
    match command {
        Command::Fit { io }
        | Command::Band { io, .. }
        | Command::Gini { io, .. }
        | Command::CheckConditions { io, .. } => (io.output.clone(), io.format),
        Command::Simulate { output, format, .. } => (output.clone(), *format),
    }
}

fn resolve_seed(seed: Option<u64>, warnings: &mut Vec<String>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        warnings.push(format!("no seed given; generated seed {s}"));
        s
    })
}

fn load(io: &IoArgs, envelope: &mut Envelope) -> CliResult<ObservedSample> {
    let data = ingest(&io.input)?;
    envelope.warnings.extend(data.warnings);
    envelope.n = Some(data.sample.len());
    Ok(data.sample)
}

fn csv_line(fields: &[String]) -> String {
    let mut line = fields.join(",");
    line.push('\n');
    line
}

fn step_json(f: &StepFunction) -> Value {
    let mut rows = vec![json!({"t": 0.0, "value": f.eval(0.0), "value_left": f.initial_value()})];
    for (&t, &v) in f.breakpoints().iter().zip(f.values()) {
        rows.push(
            json!({"t": t, "value": v, "value_left": f.eval_left(t).expect("positive breakpoint")}),
        );
    }
    json!({
        "initial_value": f.initial_value(),
        "breakpoints": f.breakpoints(),
        "values": f.values(),
        "rows": rows,
    })
}

fn fit_command(io: &IoArgs) -> CliResult<Artifact> {
    let mut envelope = Envelope::new("fit");
    let sample = load(io, &mut envelope)?;
    let fit = km_fit(&sample);
    let sigma2 = sigma2_hat(&fit);
    let functions: [(&str, &StepFunction); 4] = [
        ("km", fit.km()),
        ("na", fit.na()),
        ("censor_km", fit.censor_km()),
        ("sigma2", &sigma2),
    ];
    let mut result = serde_json::Map::new();
    let mut csv = String::from("function,t,value,value_left\n");
    for (name, f) in functions {
        result.insert(name.into(), step_json(f));
        csv += &csv_line(&[
            name.into(),
            "0".into(),
            f.eval(0.0).to_string(),
            f.initial_value().to_string(),
        ]);
        for (&t, &v) in f.breakpoints().iter().zip(f.values()) {
            let left = f.eval_left(t)?;
            csv += &csv_line(&[name.into(), t.to_string(), v.to_string(), left.to_string()]);
        }
    }
    result.insert("largest_time".into(), json!(fit.largest_time()));
    envelope.result = Value::Object(result);
    Ok(Artifact { envelope, csv })
}

fn band_command(
    io: &IoArgs,
    boot: &BootArgs,
    kind: BandChoice,
    t1: f64,
    t2: T2,
    resolution: usize,
) -> CliResult<Artifact> {
    let mut envelope = Envelope::new("band");
    let sample = load(io, &mut envelope)?;
    let seed = resolve_seed(boot.seed, &mut envelope.warnings);
    let plan = ResamplePlan::new(seed, boot.replicates)?;
    envelope.seed = Some(seed);
    envelope.alpha = Some(boot.alpha);
    envelope.replicates = Some(boot.replicates);

    let (run, extra) = match kind {
        BandChoice::Mrl => {
            let (t2, auto) = match t2 {
                T2::At(v) => (v, false),
                T2::Auto => {
                    let v = suggest_t2(&km_fit(&sample), DEFAULT_T2_THRESHOLD);
                    log::info!("t2 auto-selected: {v}");
                    (v, true)
                }
            };
            if t1 > t2 {
                return Err(CliError::Config(format!(
                    "need t1 <= t2, got t1 = {t1}, t2 = {t2}"
                )));
            }
            let run = mrl_band_run(&sample, t1, t2, boot.alpha, &plan)?;
            (run, json!({"t1": t1, "t2": t2, "t2_auto": auto}))
        }
        BandChoice::Lorenz => {
            let run = lorenz_band_run(&sample, boot.alpha, &plan, resolution)?;
            (run, json!({"resolution": resolution}))
        }
    };
    let band = run.region;
    envelope.dropped = Some(band.replicates_dropped);
    let mut csv = format!(
        "# quantile={}\n# half_width={}\n# clipped={}\n# tail_adjusted={}\n{},center,lower,upper\n",
        band.quantile,
        band.quantile_used,
        band.clipped,
        band.tail_adjusted,
        if kind == BandChoice::Mrl { "t" } else { "p" },
    );
    for i in 0..band.grid.len() {
        csv += &csv_line(&[
            band.grid[i].to_string(),
            band.center[i].to_string(),
            band.lower[i].to_string(),
            band.upper[i].to_string(),
        ]);
    }
    let mut result = serde_json::to_value(&band).expect("serializable");
    if let (Value::Object(r), Value::Object(x)) = (&mut result, extra) {
        r.extend(x);
    }
    envelope.result = result;
    Ok(Artifact { envelope, csv })
}

fn gini_command(io: &IoArgs, boot: &BootArgs) -> CliResult<Artifact> {
    let mut envelope = Envelope::new("gini");
    let sample = load(io, &mut envelope)?;
    let seed = resolve_seed(boot.seed, &mut envelope.warnings);
    let plan = ResamplePlan::new(seed, boot.replicates)?;
    envelope.seed = Some(seed);
    envelope.alpha = Some(boot.alpha);
    envelope.replicates = Some(boot.replicates);
    let ci = gini_interval_run(&sample, boot.alpha, &plan)?.region;
    envelope.dropped = Some(ci.replicates_dropped);
    let csv = String::from("estimate,lower,upper,quantile,half_width,tail_adjusted\n")
        + &csv_line(&[
            ci.estimate.to_string(),
            ci.lower.to_string(),
            ci.upper.to_string(),
            ci.quantile.to_string(),
            ci.quantile_used.to_string(),
            ci.tail_adjusted.to_string(),
        ]);
    envelope.result = serde_json::to_value(&ci).expect("serializable");
    Ok(Artifact { envelope, csv })
}

fn check_conditions_command(io: &IoArgs, t: f64) -> CliResult<Artifact> {
    let mut envelope = Envelope::new("check-conditions");
    let sample = load(io, &mut envelope)?;
    let fit = km_fit(&sample);
    let mut csv = String::from("power,t,value,zero_denominator,zero_denominator_jumps\n");
    let mut diagnostics = Vec::new();
    for power in [1, 3] {
        let d = censoring_diagnostic(&fit, t, power)?;
        if d.zero_denominator() {
            envelope.warnings.push(format!(
                "power {power}: {} Kaplan-Meier jumps where the censoring survival is zero; condition likely violated",
                d.zero_denominator_jumps
            ));
        }
        csv += &csv_line(&[
            power.to_string(),
            t.to_string(),
            d.value.to_string(),
            d.zero_denominator().to_string(),
            d.zero_denominator_jumps.to_string(),
        ]);
        diagnostics.push(json!({
            "power": power,
            "t": t,
            "value": d.value,
            "zero_denominator": d.zero_denominator(),
            "zero_denominator_jumps": d.zero_denominator_jumps,
        }));
    }
    envelope.result = json!({ "diagnostics": diagnostics });
    Ok(Artifact { envelope, csv })
}

fn simulate_command(path: &std::path::Path, seed: Option<u64>) -> CliResult<Artifact> {
    let mut envelope = Envelope::new("simulate");
    let scenario = Scenario::load(path)?;
    let seed = resolve_seed(seed.or(scenario.seed()), &mut envelope.warnings);
    envelope.seed = Some(seed);
    envelope.n = scenario.sample_size();
    envelope.alpha = scenario.alpha();
    envelope.replicates = scenario.replicates();
    let report = scenario.run(seed)?;
    let mut csv = format!("# scenario={}\n", report.scenario);
    for s in &report.summary {
        let _ = writeln!(
            csv,
            "# summary {}={} std_error={} bound={} pass={}",
            s.name,
            s.value,
            s.std_error.map_or("NA".into(), |v| v.to_string()),
            s.bound.map_or("NA".into(), |v| v.to_string()),
            s.pass.map_or("NA".into(), |v| v.to_string()),
        );
    }
    csv += "group,index,value,pass\n";
    for o in &report.outcomes {
        csv += &csv_line(&[
            o.group.clone(),
            o.index.to_string(),
            o.value.map_or("NA".into(), |v| v.to_string()),
            o.pass.map_or("NA".into(), |v| v.to_string()),
        ]);
    }
    envelope.result = serde_json::to_value(&report).expect("serializable");
    Ok(Artifact { envelope, csv })
}

pub fn execute(command: &Command) -> CliResult<Artifact> {
    match command {
        Command::Fit { io } => fit_command(io),
        Command::Band {
            io,
            boot,
            kind,
            t1,
            t2,
            resolution,
        } => band_command(io, boot, *kind, *t1, *t2, *resolution),
        Command::Gini { io, boot } => gini_command(io, boot),
        Command::Simulate { scenario, seed, .. } => simulate_command(scenario, *seed),
        Command::CheckConditions { io, t } => check_conditions_command(io, *t),
    }
}

/// JSON document describing a failure.
pub fn error_document(command: &str, err: &CliError) -> String {
    let doc = json!({
        "command": command,
        "error": { "code": err.code(), "message": err.to_string() },
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}
