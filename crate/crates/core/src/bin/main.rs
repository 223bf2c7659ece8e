use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kerr_estimation::experiments::config::{load_config_file, merge, ConfigMap};
use kerr_estimation::experiments::{
    run_chi_scan, run_decay_profile, run_scaling_fit, run_validate, write_csv, write_json, OutputFormat,
    ScanConfig, ScanRecord,
};
use kerr_estimation::Error;

#[derive(Parser)]
#[command(name = "kerr-estimation", version, about = "Kerr nonlinearity estimation scans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// 1/δχ against interrogation time for the decaying superposition.
    DecayProfile(ScanArgs),
    /// δχ against χ for steady-state engines.
    ChiScan(ScanArgs),
    /// Log-log slope of δχ against photon number.
    ScalingFit(ScanArgs),
    /// Run every oracle check; exit status 1 on any failure.
    Validate(ValidateArgs),
}

/// Every config key is also a flag; flags override the config file.
#[derive(Args, Default)]
struct ScanArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    #[arg(long)]
    oracle_check: bool,
    /// figure (ν = 1) or budget (ν = Tγ).
    #[arg(long)]
    mode: Option<String>,
    /// default, fig1, fig2, fig3, fig4 or fig5.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    variant: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    chi: Option<String>,
    #[arg(long)]
    kappa: Option<String>,
    #[arg(long)]
    omega: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    #[arg(long)]
    omega_c: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    total_time: Option<String>,
    /// Comma list of homodyne_p, gaussian, oracle, decay.
    #[arg(long)]
    engine: Option<String>,
    /// p, q, p2 or q2.
    #[arg(long)]
    observable: Option<String>,
    #[arg(long)]
    oracle_dim: Option<String>,
    /// pure_kerr, decay_optimal, one_photon or two_photon.
    #[arg(long)]
    fit: Option<String>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    /// text or json.
    #[arg(long, default_value = "text")]
    format: String,
}

impl ScanArgs {
    fn flag_map(&self) -> ConfigMap {
        let pairs = [
            ("out", &self.out),
            ("format", &self.format),
            ("workers", &self.workers),
            ("mode", &self.mode),
            ("preset", &self.preset),
            ("variant", &self.variant),
            ("chi", &self.chi),
            ("kappa", &self.kappa),
            ("omega", &self.omega),
            ("lambda", &self.lambda),
            ("gamma", &self.gamma),
            ("delta", &self.delta),
            ("omega_c", &self.omega_c),
            ("n", &self.n),
            ("t", &self.t),
            ("total_time", &self.total_time),
            ("engine", &self.engine),
            ("observable", &self.observable),
            ("oracle_dim", &self.oracle_dim),
            ("fit", &self.fit),
        ];
        let mut map: ConfigMap = pairs
            .iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect();
        if self.oracle_check {
            map.insert("oracle_check".into(), "true".into());
        }
        map
    }

    fn resolve(&self) -> kerr_estimation::Result<ScanConfig> {
        let file = match &self.config {
            Some(path) => load_config_file(path)?,
            None => ConfigMap::new(),
        };
        ScanConfig::from_map(&merge(&file, &self.flag_map())?)
    }
}

fn sink(out: Option<&std::path::Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit<S: serde::Serialize>(
    cfg: &ScanConfig,
    command: &str,
    records: &[ScanRecord],
    summary: Option<&S>,
) -> kerr_estimation::Result<()> {
    let mut w = sink(cfg.output.as_deref())?;
    match cfg.format {
        OutputFormat::Csv => write_csv(&mut w, records)?,
        OutputFormat::Json => {
            write_json(&mut w, command, records, summary)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InsufficientSpan { .. } | Error::InvalidParams(_) | Error::UnknownVariant(_) => 2,
        _ => 1,
    }
}

fn run_scan(command: &str, args: &ScanArgs) -> kerr_estimation::Result<()> {
    let cfg = args.resolve()?;
    match command {
        "decay-profile" => emit::<()>(&cfg, command, &run_decay_profile(&cfg)?, None),
        "chi-scan" => emit::<()>(&cfg, command, &run_chi_scan(&cfg)?, None),
        _ => {
            let (records, fit) = run_scaling_fit(&cfg)?;
            eprintln!(
                "{} slope = {:.6} ± {:.2e} over {} points, {:.2} decades",
                fit.regime, fit.slope, fit.stderr, fit.points, fit.span_decades
            );
            emit(&cfg, command, &records, Some(&fit))
        }
    }
}

fn run_validate_cmd(args: &ValidateArgs) -> kerr_estimation::Result<bool> {
    let report = run_validate();
    let mut w = sink(args.out.as_deref())?;
    match args.format.as_str() {
        "json" => {
            serde_json::to_writer_pretty(&mut w, &report).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(w)?;
        }
        "text" => {
            for c in &report.checks {
                writeln!(w, "{}", c.line())?;
            }
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            writeln!(w, "{} checks, {failed} failed, {:.1} s", report.checks.len(), report.runtime_seconds)?;
        }
        other => return Err(Error::Config(format!("validate format must be text or json, got `{other}`"))),
    }
    w.flush()?;
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::DecayProfile(a) => run_scan("decay-profile", a).map(|_| true),
        Command::ChiScan(a) => run_scan("chi-scan", a).map(|_| true),
        Command::ScalingFit(a) => run_scan("scaling-fit", a).map(|_| true),
        Command::Validate(a) => run_validate_cmd(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
