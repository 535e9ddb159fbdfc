//! `fisher-clt`: coefficient tables, convergence studies, the inequality
//! suite, cf-decay diagnostics and step-density decomposition.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fisher_clt::harness::{
    builtin_families, parse_n_list, run_convergence_study, run_inequality_suite, run_cf_decay_diagnostics,
    write_study_csv, write_study_json, RowOutcome,
};
use fisher_clt::scalar::parse_rational;
use fisher_clt::{
    analytic_cumulants, decompose_step_density, empirical_cumulants, CoefficientRecord, CumulantVector, Error,
    ExpansionCoefficients, Family, OutputFormat, Rational, StepDensity, StudyConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "fisher-clt", version, about = "Fisher information expansions for normalized sums")]
struct Cli {
    /// Flat `key = value` config file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    /// Summand family: gaussian, exponential, uniform, beta33, bernoulli,
    /// two_point:P, gaussian_mixture[:w,m,s;...]
    #[arg(long)]
    family: Option<String>,
    /// Expansion order s (coefficients c_1..c_⌊(s−2)/2⌋).
    #[arg(long)]
    s: Option<usize>,
    /// Comma-separated, strictly increasing sample sizes.
    #[arg(long)]
    n: Option<String>,
    /// Grid points (power of two).
    #[arg(long = "grid-N")]
    grid_n: Option<usize>,
    /// Half-width of the x-grid.
    #[arg(long)]
    xmax: Option<f64>,
    /// Positivity threshold relative to max p.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact coefficient table c_1..c_J.
    Coeffs {
        #[command(flatten)]
        common: Common,
        /// Cumulants γ_3, γ_4, … as rationals, e.g. "1/2,1/3,1/4".
        #[arg(long, conflicts_with = "sample")]
        cumulants: Option<String>,
        /// File of observations (one per line) for empirical cumulants.
        #[arg(long)]
        sample: Option<PathBuf>,
        /// Draw this many observations from --family with --seed instead.
        #[arg(long, conflicts_with_all = ["sample", "cumulants"])]
        sample_size: Option<usize>,
    },
    /// Convergence study of I(Z_n||Z) against the coefficient prediction.
    Study {
        #[command(flatten)]
        common: Common,
        /// ρ_n in the split point: `loglog` or a number.
        #[arg(long)]
        rho: Option<String>,
    },
    /// Inequality suite; exits with status 3 on any violation.
    Inequalities {
        #[command(flatten)]
        common: Common,
        /// Families to run (repeatable); all built-in families by default.
        #[arg(long = "families", value_delimiter = ',')]
        families: Vec<String>,
        /// Replace every per-inequality slack with this value.
        #[arg(long, allow_negative_numbers = true)]
        slack: Option<f64>,
    },
    /// Decay diagnostics of the summand's characteristic function.
    #[command(name = "cf-decay", alias = "thm13")]
    CfDecay {
        #[command(flatten)]
        common: Common,
    },
    /// Uniform-mixture decomposition of a step density JSON file.
    Decompose {
        /// `{"breakpoints": [...], "values": [...]}` with rational strings.
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Numerical(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::CfTailTooHeavy { .. }
            | Error::InterpolatedPowerRefused { .. }
            | Error::QuantileInapplicable(_)
            | Error::DegenerateDistribution
            | Error::InsufficientOrder { .. }
            | Error::IrrationalStandardization { .. }
            | Error::NotStandardized(_) => Failure::Numerical(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn config(path: &Option<PathBuf>, c: &Common) -> Outcome<StudyConfig> {
    let mut cfg = StudyConfig::default();
    if let Some(p) = path {
        cfg.apply_file(p)?;
    }
    let mut set = |k: &str, v: Option<String>| -> Outcome {
        if let Some(v) = v {
            cfg.set(k, &v)?;
        }
        Ok(())
    };
    set("family", c.family.clone())?;
    set("s", c.s.map(|v| v.to_string()))?;
    set("n", c.n.clone())?;
    set("grid_n", c.grid_n.map(|v| v.to_string()))?;
    set("xmax", c.xmax.map(|v| v.to_string()))?;
    set("threshold", c.threshold.map(|v| v.to_string()))?;
    set("seed", c.seed.map(|v| v.to_string()))?;
    set("format", c.format.clone())?;
    set("out", c.out.as_ref().map(|p| p.display().to_string()))?;
    Ok(cfg)
}

fn sink(out: &Option<PathBuf>) -> Outcome<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn coefficient_records(
    cfg: &StudyConfig,
    cumulants: Option<String>,
    sample: Option<PathBuf>,
    sample_size: Option<usize>,
) -> Outcome<(Vec<CoefficientRecord>, &'static str)> {
    let s = cfg.s;
    if let Some(text) = cumulants {
        let higher = text
            .split(',')
            .map(|v| parse_rational(v).ok_or_else(|| Failure::Usage(format!("not a rational: {v:?}"))))
            .collect::<Outcome<Vec<Rational>>>()?;
        let c = CumulantVector::from_higher(higher);
        return Ok((ExpansionCoefficients::compute(&c, s)?.records(), "exact"));
    }
    let data = match (sample, sample_size) {
        (Some(path), _) => Some(fisher_clt::cumulants::read_sample_file(path)?),
        (None, Some(size)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            Some((0..size).map(|_| cfg.family.sample(&mut rng)).collect())
        }
        (None, None) => None,
    };
    if let Some(data) = data {
        let c = empirical_cumulants(&data, s)?;
        return Ok((ExpansionCoefficients::compute(&c, s)?.records(), "empirical"));
    }
    match analytic_cumulants::<Rational>(&cfg.family, s) {
        Ok(c) => Ok((ExpansionCoefficients::compute(&c, s)?.records(), "exact")),
        Err(Error::IrrationalStandardization { .. }) => {
            let c = analytic_cumulants::<f64>(&cfg.family, s)?;
            Ok((ExpansionCoefficients::compute(&c, s)?.records(), "float"))
        }
        Err(e) => Err(e.into()),
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Coeffs { common, cumulants, sample, sample_size } => {
            let mut cfg = config(&cli.config, &common)?;
            if let (Some(text), None) = (&cumulants, common.s) {
                // γ_3..γ_s given explicitly
                cfg.s = text.split(',').count() + 2;
            }
            if cfg.s < 2 {
                return Err(Failure::Usage(format!("s = {} must be at least 2", cfg.s)));
            }
            let (records, provenance) = coefficient_records(&cfg, cumulants, sample, sample_size)?;
            let mut w = sink(&cfg.out)?;
            match cfg.format {
                OutputFormat::Json => {
                    let doc = serde_json::json!({ "s": cfg.s, "provenance": provenance, "coefficients": records });
                    serde_json::to_writer_pretty(&mut w, &doc)?;
                    writeln!(w)?;
                }
                OutputFormat::Csv => {
                    writeln!(w, "j,numerator,denominator,float")?;
                    for r in records {
                        writeln!(w, "{},{},{},{:.11e}", r.j, r.numerator, r.denominator, r.float)?;
                    }
                }
            }
            w.flush()?;
        }
        Command::Study { common, rho } => {
            let mut cfg = config(&cli.config, &common)?;
            if let Some(r) = rho {
                cfg.set("rho", &r)?;
            }
            cfg.validate()?;
            let rows = run_convergence_study(&cfg)?;
            for r in &rows {
                if let RowOutcome::Skipped { reason } = &r.outcome {
                    eprintln!("n = {}: skipped ({reason})", r.n);
                }
            }
            let mut w = sink(&cfg.out)?;
            match cfg.format {
                OutputFormat::Csv => write_study_csv(&rows, &mut w)?,
                OutputFormat::Json => {
                    write_study_json(&cfg, &rows, &mut w)?;
                    writeln!(w)?;
                }
            }
            w.flush()?;
        }
        Command::Inequalities { common, families, slack } => {
            let mut cfg = config(&cli.config, &common)?;
            if let Some(v) = slack {
                cfg.slack = Some(v);
            }
            if common.n.is_none() && cli.config.is_none() {
                cfg.n_list = parse_n_list("1,2,4,8,16,32,64,128,256,512").expect("literal list");
            }
            cfg.validate()?;
            let families = if families.is_empty() {
                builtin_families()
            } else {
                families.iter().map(|f| f.parse::<Family>()).collect::<Result<_, _>>()?
            };
            let report = run_inequality_suite(&families, &cfg.n_list, &cfg)?;
            let mut w = sink(&cfg.out)?;
            match cfg.format {
                OutputFormat::Json => {
                    serde_json::to_writer_pretty(&mut w, &report)?;
                    writeln!(w)?;
                }
                OutputFormat::Csv => {
                    writeln!(w, "name,subject,lhs,rhs,slack,passed")?;
                    for c in &report.checks {
                        writeln!(w, "{},\"{}\",{:.11e},{:.11e},{:e},{}", c.name, c.subject, c.lhs, c.rhs, c.slack, c.passed)?;
                    }
                }
            }
            w.flush()?;
            let v = report.violations();
            if !v.is_empty() {
                let names: Vec<String> = v.iter().map(|c| format!("{} on {}", c.name, c.subject)).collect();
                return Err(Failure::Violation(format!("{} violations: {}", v.len(), names.join("; "))));
            }
        }
        Command::CfDecay { common } => {
            let cfg = config(&cli.config, &common)?;
            cfg.validate()?;
            let report = run_cf_decay_diagnostics(&cfg.family, &cfg)?;
            let mut w = sink(&cfg.out)?;
            match cfg.format {
                OutputFormat::Json => {
                    serde_json::to_writer_pretty(&mut w, &report)?;
                    writeln!(w)?;
                }
                OutputFormat::Csv => {
                    writeln!(w, "quantity,value")?;
                    writeln!(w, "decay_exponent,{:.11e}", report.decay_exponent)?;
                    writeln!(w, "decays,{}", report.decays)?;
                    for v in &report.weighted {
                        writeln!(w, "weighted_integral_nu{},{:.11e}", v.nu, v.integral.value)?;
                    }
                    for t in &report.tv {
                        let tv = t.tv.map(|v| format!("{v:.11e}")).unwrap_or_default();
                        writeln!(w, "tv_n{},{tv}", t.n)?;
                    }
                    let n0 = report.n0_estimate.map(|n| n.to_string()).unwrap_or_default();
                    writeln!(w, "n0_estimate,{n0}")?;
                }
            }
            w.flush()?;
        }
        Command::Decompose { input, out } => {
            let p = StepDensity::read_json(input)?;
            let m = decompose_step_density(&p);
            let doc = serde_json::json!({
                "total_variation": p.total_variation().to_string(),
                "mixture_total_variation": m.total_variation().to_string(),
                "components": m,
            });
            let mut w = sink(&out)?;
            serde_json::to_writer_pretty(&mut w, &doc)?;
            writeln!(w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical precondition failed: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Violation(m)) => {
            eprintln!("inequality suite: {m}");
            ExitCode::from(3)
        }
    }
}
