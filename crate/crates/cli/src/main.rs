use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use ppdio::bounds::{
    advantage_regions, compare_scan, decomposition_params, exponent_profile, k_choice_type1,
    k_choice_type2, rho, smoothing_params, theta_warning, verdict_changes, Comparison,
    DecompositionParams, SmoothingParams,
};
use ppdio::exp_sums::{self, ExpSumRecord, ExpSums, Standard};
use ppdio::experiments::{dyadic_grid, theorem_check, ConfigSnapshot, ExperimentRun, Experiments};
use ppdio::fourier_smoothing::{montgomery_check, vaaler_check, MontgomeryCheck};
use ppdio::{Error, OutputFormat, PseudoPolynomial, Real, Result, RunConfig};

/// Certified experiments on pseudo-polynomials at primes.
#[derive(Parser, Debug)]
#[command(name = "ppdio", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// `key = value` configuration file; flags and PPDIO_* variables override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    start_bits: Option<u32>,
    #[arg(long, global = true)]
    max_bits: Option<u32>,
    #[arg(long, global = true)]
    segment_bits: Option<u32>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SumKindArg {
    Prime,
    Lambda,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// rho, rho_d and the frequency range for theta (or the theta of --f).
    Exponents {
        #[arg(long, conflicts_with = "f", required_unless_present = "f")]
        theta: Option<Real>,
        #[arg(long)]
        f: Option<PseudoPolynomial>,
    },
    /// Running minimum of ||xi floor(f(p))|| along a grid.
    MinSearch {
        #[arg(long)]
        f: PseudoPolynomial,
        #[arg(long)]
        xi: Real,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Exponential sums over primes or von Mangoldt weighted integers.
    ExpSum {
        #[arg(long)]
        f: PseudoPolynomial,
        #[arg(long)]
        y: Real,
        #[arg(long, value_enum, default_value = "prime")]
        kind: SumKindArg,
        #[command(flatten)]
        grid: GridArgs,
        /// Report |S| / X^exponent (default: 1 - rho).
        #[arg(long)]
        exponent: Option<f64>,
    },
    /// Type I sum with coefficients a (zero, one, d2..d4, at:<n>).
    Type1 {
        #[arg(long, default_value = "one")]
        a: Standard,
        #[arg(long)]
        f: PseudoPolynomial,
        #[arg(long)]
        y: Real,
        #[arg(long = "M")]
        m: u64,
        #[arg(long = "X")]
        x: u64,
    },
    /// Type II sum with coefficients a, b.
    Type2 {
        #[arg(long, default_value = "one")]
        a: Standard,
        #[arg(long, default_value = "one")]
        b: Standard,
        #[arg(long)]
        f: PseudoPolynomial,
        #[arg(long)]
        y: Real,
        #[arg(long = "M")]
        m: u64,
        #[arg(long = "N")]
        n: u64,
        #[arg(long = "X")]
        x: u64,
    },
    /// Largest excess of the indicator error over its majorant on a grid.
    VaalerCheck {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        left: f64,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        right: f64,
        #[arg(long = "H", default_value_t = 16)]
        h: u32,
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
    },
    /// Montgomery's inequality on given points or a seeded random instance.
    MontgomeryCheck {
        #[arg(long = "M")]
        m: u32,
        /// Random instance size when --points is absent.
        #[arg(long = "N", default_value_t = 1000)]
        n: usize,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        points: Option<Vec<f64>>,
    },
    /// Smallest primes p with m | floor(f(p)).
    Divisibility {
        #[arg(long)]
        f: PseudoPolynomial,
        #[arg(long, default_value_t = 2)]
        m_min: u64,
        #[arg(long)]
        m_max: u64,
        #[arg(long, default_value_t = 1_000_000)]
        p_cap: u64,
    },
    /// The three smoothed sums and the balanced bound.
    ThreeSums {
        #[arg(long)]
        f: PseudoPolynomial,
        #[arg(long)]
        xi: Real,
        #[arg(long, default_value_t = 1)]
        m: u64,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Star discrepancy of f(p) mod 1 along a grid.
    Discrepancy {
        #[arg(long)]
        f: PseudoPolynomial,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Decomposition and smoothing parameters with constraint flags.
    Params {
        #[arg(long = "Y")]
        y: u64,
        /// rho directly, or via --theta.
        #[arg(long, conflicts_with = "theta", required_unless_present = "theta")]
        rho: Option<f64>,
        #[arg(long)]
        theta: Option<Real>,
        #[arg(long, default_value_t = 1)]
        m: u64,
        /// X for the smoothing parameters (default: Y).
        #[arg(long = "X")]
        x: Option<f64>,
        #[arg(long)]
        alpha: Option<Real>,
        #[arg(long)]
        tau: Option<Real>,
    },
    /// rho_d against the Madritsch-Tichy exponent over a range of c.
    Compare {
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value = "4")]
        lo: Real,
        #[arg(long, default_value = "12")]
        hi: Real,
        #[arg(long, default_value = "1/4")]
        step: Real,
    },
}

#[derive(Args, Debug)]
struct GridArgs {
    /// `dyadic` (powers of two in [xmin, xmax]) or a comma-separated list.
    #[arg(long, default_value = "dyadic")]
    grid: String,
    #[arg(long)]
    xmax: Option<u64>,
    #[arg(long, default_value_t = 2)]
    xmin: u64,
}

impl GridArgs {
    fn values(&self) -> Result<Vec<u64>> {
        if self.grid == "dyadic" {
            let hi = self
                .xmax
                .ok_or_else(|| Error::Config("--grid dyadic needs --xmax".into()))?;
            return Ok(dyadic_grid(self.xmin.max(2), hi));
        }
        self.grid
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Parse(format!("bad grid value `{s}`")))
            })
            .collect()
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    kind: &'a str,
    config: ConfigSnapshot,
    rows: T,
}

struct Ctx {
    config: RunConfig,
}

impl Ctx {
    fn sink(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.config.output {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn json<T: Serialize>(&self, value: &T) -> Result<()> {
        let mut out = self.sink()?;
        serde_json::to_writer_pretty(&mut out, value)?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }

    fn envelope<T: Serialize>(&self, kind: &str, rows: &T) -> Result<()> {
        self.json(&Envelope {
            kind,
            config: ConfigSnapshot::from(&self.config),
            rows,
        })
    }

    fn csv<R: Serialize>(&self, rows: &[R]) -> Result<()> {
        let mut out = self.sink()?;
        {
            let mut w = csv::Writer::from_writer(&mut out);
            for r in rows {
                w.serialize(r).map_err(Error::from)?;
            }
            w.flush()?;
        }
        out.flush()?;
        Ok(())
    }

    fn run(&self, run: &ExperimentRun) -> Result<()> {
        match self.config.format {
            OutputFormat::Json => self.json(run),
            OutputFormat::Csv => {
                let mut out = self.sink()?;
                run.write_csv(&mut out)?;
                out.flush()?;
                Ok(())
            }
        }
    }

    fn records(&self, kind: &str, recs: &[ExpSumRecord], exponent: Option<f64>) -> Result<()> {
        match self.config.format {
            OutputFormat::Json => self.envelope(kind, &recs),
            OutputFormat::Csv => {
                let mut out = self.sink()?;
                exp_sums::write_csv(recs, exponent, &mut out)?;
                out.flush()?;
                Ok(())
            }
        }
    }
}

fn build_config(g: &Global) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &g.config {
        cfg.apply_file(path)?;
    }
    cfg.apply_env(std::env::vars())?;
    if let Some(v) = g.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = g.seed {
        cfg.seed = v;
    }
    if let Some(v) = g.threads {
        cfg.threads = Some(v);
    }
    if let Some(v) = g.format {
        cfg.format = match v {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    if let Some(v) = &g.out {
        cfg.output = Some(v.clone());
    }
    if let Some(v) = g.start_bits {
        cfg.precision.start_bits = v;
    }
    if let Some(v) = g.max_bits {
        cfg.precision.max_bits = v;
    }
    if let Some(v) = g.segment_bits {
        cfg.sieve.segment_bits = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn rational(r: &Real, what: &str) -> Result<rug::Rational> {
    r.as_rational()
        .cloned()
        .ok_or_else(|| Error::Precondition(format!("{what} must be rational, got {r}")))
}

fn warn_theta(theta: &Real) {
    if let Some(w) = theta_warning(theta) {
        eprintln!("warning: {w}");
    }
}

#[derive(Serialize)]
struct VaalerReport {
    left: f64,
    right: f64,
    h: u32,
    grid: usize,
    max_violation: f64,
    holds: bool,
}

#[derive(Serialize)]
struct ParamsReport {
    decomposition: DecompositionParams,
    smoothing: SmoothingParams,
    k_type1: Option<u32>,
    k_type2: Option<u32>,
}

#[derive(Serialize)]
struct CompareReport {
    scan: Vec<Comparison>,
    verdict_changes: Vec<(f64, f64)>,
    advantage_regions: Vec<(f64, f64)>,
}

const VAALER_TOLERANCE: f64 = 1e-12;

fn execute(command: Command, ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.config;
    match command {
        Command::Exponents { theta, f } => {
            let theta = match (theta, f) {
                (Some(t), _) => t,
                (None, Some(f)) => f.theta().clone(),
                (None, None) => unreachable!("clap requires one of --theta, --f"),
            };
            let profile = exponent_profile(&theta)?;
            warn_theta(&theta);
            ctx.json(&profile)
        }
        Command::MinSearch { f, xi, grid } => {
            warn_theta(f.theta());
            let run = Experiments::new(cfg)?.min_search(&f, &xi, &grid.values()?)?;
            let rd = ppdio::bounds::rho_d(f.theta())?.to_f64();
            let flags = theorem_check(&run, rd)?;
            let held = flags.iter().filter(|f| f.holds).count();
            eprintln!("m(X) <= X^-rho_d at {held}/{} grid points", flags.len());
            if let Some(fit) = &run.fit {
                eprintln!("decay slope {:.6} (-rho_d = {:.6})", fit.slope, -rd);
            }
            ctx.run(&run)
        }
        Command::ExpSum {
            f,
            y,
            kind,
            grid,
            exponent,
        } => {
            let engine = ExpSums::new(cfg.precision, cfg.sieve);
            let xs = grid.values()?;
            let recs = match kind {
                SumKindArg::Prime => engine.prime_sum_grid(&f, &y, &xs)?,
                SumKindArg::Lambda => xs
                    .iter()
                    .map(|&x| engine.lambda_sum(&f, &y, x))
                    .collect::<Result<_>>()?,
            };
            let exponent = match exponent {
                Some(e) => e,
                None => 1.0 - rho(f.theta())?.to_f64(),
            };
            ctx.records(
                match kind {
                    SumKindArg::Prime => "prime",
                    SumKindArg::Lambda => "lambda",
                },
                &recs,
                Some(exponent),
            )
        }
        Command::Type1 { a, f, y, m, x } => {
            let rec = ExpSums::new(cfg.precision, cfg.sieve).type1_sum(&a, &f, &y, m, x)?;
            ctx.records("type1", &[rec], None)
        }
        Command::Type2 { a, b, f, y, m, n, x } => {
            let rec = ExpSums::new(cfg.precision, cfg.sieve).type2_sum(&a, &b, &f, &y, m, n, x)?;
            ctx.records("type2", &[rec], None)
        }
        Command::VaalerCheck { left, right, h, grid } => {
            let v = vaaler_check((left, right), h, grid)?;
            let report = VaalerReport {
                left,
                right,
                h,
                grid,
                max_violation: v,
                holds: v <= VAALER_TOLERANCE,
            };
            match cfg.format {
                OutputFormat::Json => ctx.envelope("vaaler_check", &[&report])?,
                OutputFormat::Csv => ctx.csv(&[&report])?,
            }
            if report.holds {
                Ok(())
            } else {
                Err(Error::Precondition(format!("majorant violated by {v:e}")))
            }
        }
        Command::MontgomeryCheck { m, n, points } => {
            let xs = match points {
                Some(p) => p,
                None => {
                    if m < 2 {
                        return Err(Error::Precondition("random instances need M >= 2".into()));
                    }
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    (0..n)
                        .map(|_| {
                            let d = rng.gen_range(1.0 / f64::from(m)..=0.5);
                            if rng.gen() {
                                d
                            } else {
                                1.0 - d
                            }
                        })
                        .collect()
                }
            };
            let report: MontgomeryCheck = montgomery_check(&xs, m);
            match cfg.format {
                OutputFormat::Json => ctx.envelope("montgomery_check", &[&report]),
                OutputFormat::Csv => ctx.csv(&[&report]),
            }
        }
        Command::Divisibility { f, m_min, m_max, p_cap } => {
            if m_min > m_max {
                return Err(Error::Precondition("--m-min exceeds --m-max".into()));
            }
            let ms: Vec<u64> = (m_min..=m_max).collect();
            let run = Experiments::new(cfg)?.divisibility_run(&f, &ms, p_cap)?;
            if let Some(max) = run.rows.iter().filter_map(|r| r.witness).max() {
                eprintln!("largest witness prime: {max}");
            }
            let missing = run.rows.iter().filter(|r| r.witness.is_none()).count();
            if missing > 0 {
                eprintln!("no witness below {p_cap} for {missing} value(s) of m");
            }
            ctx.run(&run)
        }
        Command::ThreeSums { f, xi, m, grid } => {
            let run = Experiments::new(cfg)?.three_sums_run(&f, &xi, m, &grid.values()?)?;
            ctx.run(&run)
        }
        Command::Discrepancy { f, grid } => {
            let run = Experiments::new(cfg)?.discrepancy_run(&f, &grid.values()?)?;
            ctx.run(&run)
        }
        Command::Params {
            y,
            rho: rho_arg,
            theta,
            m,
            x,
            alpha,
            tau,
        } => {
            let r = match (rho_arg, &theta) {
                (Some(r), _) => r,
                (None, Some(t)) => {
                    warn_theta(t);
                    rho(t)?.to_f64()
                }
                (None, None) => unreachable!("clap requires one of --rho, --theta"),
            };
            let rho_q = match &theta {
                Some(t) => rho(t)?.exact().cloned(),
                None => rug::Rational::from_f64(r),
            };
            let k1 = match (&alpha, &rho_q) {
                (Some(a), Some(rq)) => Some(k_choice_type1(&rational(a, "alpha")?, rq)?),
                _ => None,
            };
            let k2 = match &alpha {
                Some(a) => {
                    let t = tau.as_ref().map_or(Ok(rug::Rational::new()), |t| rational(t, "tau"))?;
                    Some(k_choice_type2(&rational(a, "alpha")?, &t)?)
                }
                None => None,
            };
            let report = ParamsReport {
                decomposition: decomposition_params(y, r)?,
                smoothing: smoothing_params(m, x.unwrap_or(y as f64), r, cfg.epsilon)?,
                k_type1: k1,
                k_type2: k2,
            };
            ctx.json(&report)
        }
        Command::Compare { k, lo, hi, step } => {
            let scan = compare_scan(
                &rational(&lo, "lo")?,
                &rational(&hi, "hi")?,
                &rational(&step, "step")?,
                k,
            )?;
            let floor = |r: &Real| -> u32 { r.ceil().to_u32().unwrap_or(0).saturating_sub(1) };
            let report = CompareReport {
                verdict_changes: verdict_changes(&scan),
                advantage_regions: advantage_regions(floor(&lo), hi.ceil().to_u32().unwrap_or(0), k),
                scan,
            };
            for (a, b) in &report.advantage_regions {
                eprintln!("rho_d > rho_MT on ({a}, {b:.6})");
            }
            match cfg.format {
                OutputFormat::Json => ctx.envelope("compare", &report),
                OutputFormat::Csv => ctx.csv(&report.scan),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(&cli.global).and_then(|config| {
        if let Some(n) = config.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        execute(cli.command, &Ctx { config })
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
