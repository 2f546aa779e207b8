//! Command-line driver for the numerical laboratory.
//!
//! Exit codes: 0 when every verdict passes, 2 when an experiment ran but
//! a verdict failed, 1 for usage or runtime errors.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use temperlab::config::Document;
use temperlab::experiments::{self, ExperimentOutput};
use temperlab::report::{fmt_sig, write_text, VerdictSummary};

#[derive(Parser)]
#[command(
    name = "temperlab",
    about = "Growth of matrix-coefficient ball integrals, exponential-sum asymptotics, \
             p-adic oscillatory sums, and Folner ratios",
    version
)]
struct Cli {
    /// Worker threads for parallel sweeps (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory for experiment CSV/JSON files
    /// (default: $TEMPERLAB_OUT or ./out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed override for randomized experiments
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exponential-sum growth engine
    Expsum {
        #[command(subcommand)]
        cmd: ExpsumCmd,
    },
    /// The real group
    Sl2r {
        #[command(subcommand)]
        cmd: Sl2rCmd,
    },
    /// The p-adic group
    Pgl2 {
        #[command(subcommand)]
        cmd: Pgl2Cmd,
    },
    /// Discrete-group ratios
    Folner {
        #[command(subcommand)]
        cmd: FolnerCmd,
    },
    /// Config-driven experiments
    Experiment {
        #[command(subcommand)]
        cmd: ExperimentCmd,
    },
}

#[derive(Subcommand)]
enum ExpsumCmd {
    /// Predict degree and limit for a configured collection; prints a
    /// JSON record {degree, limit, brute_ratios}
    Predict {
        #[arg(long)]
        config: PathBuf,
        /// Radii at which to also report brute-force ratios
        #[arg(long, value_delimiter = ' ', num_args = 0..)]
        brute_radii: Vec<f64>,
    },
    /// Exact lattice sum at one radius
    Brute {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        radius: f64,
    },
}

#[derive(Subcommand)]
enum Sl2rCmd {
    /// One matrix coefficient <a(e^x) h_n, h_m>
    Coeff(CoeffArgs),
    /// The spherical function at x
    Xi {
        #[arg(long)]
        x: f64,
    },
    /// Orthogonality report (defaults: s = 1, types {0, +-2})
    Schur {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Slowest-decrease bounds: self-ratio, window ratios, shell ladder
    Bounds {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CoeffArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    s: f64,
    #[arg(long, default_value_t = 0)]
    eps: u8,
    #[arg(long, allow_hyphen_values = true)]
    n: i64,
    #[arg(long, allow_hyphen_values = true)]
    m: i64,
    #[arg(long, allow_hyphen_values = true)]
    x: f64,
}

#[derive(Subcommand)]
enum Pgl2Cmd {
    /// One stabilized coefficient <a(p^{-j}) h_theta, h_mu> for level-1
    /// types indexed by position in the character enumeration
    Coeff {
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        conductor: u32,
        #[arg(long, default_value_t = 1)]
        unit_exponent: u64,
        /// chi(p) as a fraction of a full turn, e.g. 1/8
        #[arg(long, default_value = "1/8")]
        alpha: String,
        #[arg(long)]
        theta: usize,
        #[arg(long)]
        mu: usize,
        #[arg(long)]
        j: i64,
    },
    /// One oscillatory shell integral
    Jm {
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long, default_value_t = 0)]
        conductor: u32,
        #[arg(long, default_value_t = 0)]
        unit_exponent: u64,
        #[arg(long, default_value = "1/8")]
        alpha: String,
        /// valuation of the first character scale
        #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
        va1: i64,
        #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
        va2: i64,
        #[arg(long)]
        n: i64,
        #[arg(long)]
        m: i64,
    },
    /// Exhaustive oscillatory sweep with case-table verification
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Orthogonality report over valuation shells
    Schur {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Character-formula check with a seeded Hermitian window
    Character {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FolnerCmd {
    /// Ratio report; without --group, runs all three reference groups
    Run {
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        nmax: Option<u64>,
    },
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Run the experiment described by a config file
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-evaluate the verdicts of an emitted CSV and compare them to
    /// the stored summary
    Replay {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        summary: PathBuf,
    },
}

fn out_dir(cli_out: &Option<PathBuf>) -> PathBuf {
    cli_out
        .clone()
        .or_else(|| std::env::var_os("TEMPERLAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn print_value(v: num::complex::Complex64) {
    if v.im.abs() < 5e-13 {
        println!("{:.12}", v.re);
    } else {
        println!("{:.12} {:+.12}i", v.re, v.im);
    }
}

fn emit(output: &ExperimentOutput, dir: &PathBuf) -> temperlab::Result<bool> {
    let csv_path = dir.join(format!("{}.csv", output.name));
    let json_path = dir.join(format!("{}_verdicts.json", output.name));
    write_text(&csv_path, &output.csv)?;
    write_text(&json_path, &output.summary.to_json())?;
    for r in &output.summary.records {
        println!(
            "{}: {} (measured {}, reference {})",
            r.id,
            if r.pass { "pass" } else { "FAIL" },
            fmt_sig(r.measured),
            fmt_sig(r.reference),
        );
    }
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(output.summary.all_pass())
}

fn doc_or_default(path: &Option<PathBuf>, kind: &str) -> temperlab::Result<Document> {
    match path {
        Some(p) => Document::load(p),
        None => Document::parse(&format!("[experiment]\nkind = {kind}\n")),
    }
}

fn run(cli: Cli) -> temperlab::Result<bool> {
    let dir = out_dir(&cli.out);
    match cli.command {
        Command::Expsum { cmd } => match cmd {
            ExpsumCmd::Predict { config, brute_radii } => {
                let doc = Document::load(&config)?;
                let (coll, fam) = temperlab::config::read_collection(&doc)?;
                let p = temperlab::expsum::predicted_growth_lattice(&coll, &fam)?;
                let ratios: Vec<(f64, f64)> = brute_radii
                    .iter()
                    .map(|&r| {
                        let d = p.degree_u32().unwrap_or(0) as i32;
                        temperlab::expsum::squared_lattice_sum(&coll, &fam, r)
                            .map(|s| (r, s / r.powi(d)))
                    })
                    .collect::<temperlab::Result<_>>()?;
                println!(
                    "{}",
                    temperlab::experiments::appendix::prediction_record_json(
                        p.degree_u32(),
                        p.limit,
                        &ratios
                    )
                );
                Ok(true)
            }
            ExpsumCmd::Brute { config, radius } => {
                let doc = Document::load(&config)?;
                let (coll, fam) = temperlab::config::read_collection(&doc)?;
                let v = temperlab::expsum::squared_lattice_sum(&coll, &fam, radius)?;
                println!("{:.12}", v);
                Ok(true)
            }
        },
        Command::Sl2r { cmd } => match cmd {
            Sl2rCmd::Coeff(a) => {
                let chi = temperlab::sl2::UnitaryCharacterR::new(a.s, a.eps)?;
                print_value(temperlab::sl2::matrix_coeff(&chi, a.n, a.m, a.x)?);
                Ok(true)
            }
            Sl2rCmd::Xi { x } => {
                println!("{:.12}", temperlab::sl2::xi(x));
                Ok(true)
            }
            Sl2rCmd::Schur { config } => {
                let doc = doc_or_default(&config, "sl2r_schur")?;
                emit(&experiments::run(&doc, cli.seed)?, &dir)
            }
            Sl2rCmd::Bounds { config } => {
                let doc = doc_or_default(&config, "v1_slowest")?;
                emit(&experiments::run(&doc, cli.seed)?, &dir)
            }
        },
        Command::Pgl2 { cmd } => match cmd {
            Pgl2Cmd::Coeff {
                p,
                conductor,
                unit_exponent,
                alpha,
                theta,
                mu,
                j,
            } => {
                let doc = Document::parse(&format!(
                    "[experiment]\nkind = pgl2_schur\n[group]\np = {p}\nconductor = {conductor}\n\
                     unit_exponent = {unit_exponent}\nalpha = {alpha}\n"
                ))?;
                let chi = temperlab::experiments::padic::read_chi(&doc)?;
                let torus = temperlab::pgl2::TorusLevel::new(chi.ctx, 1)?;
                let chars = temperlab::pgl2::enumerate_k_types(&torus)?;
                let get = |i: usize| {
                    chars
                        .get(i)
                        .ok_or_else(|| temperlab::Error::invalid(format!("type index {i}")))
                };
                let (value, level) = temperlab::pgl2::matrix_coeff(&chi, get(theta)?, get(mu)?, j)?;
                eprintln!("stabilized at level {level}");
                print_value(value);
                Ok(true)
            }
            Pgl2Cmd::Jm {
                p,
                conductor,
                unit_exponent,
                alpha,
                va1,
                va2,
                n,
                m,
            } => {
                let doc = Document::parse(&format!(
                    "[experiment]\nkind = jm_sweep\n[group]\np = {p}\nconductor = {conductor}\n\
                     unit_exponent = {unit_exponent}\nalpha = {alpha}\n"
                ))?;
                let chi = temperlab::experiments::padic::read_chi(&doc)?;
                let ctx = chi.ctx;
                let prec = 30.min(ctx.max_precision());
                let params = temperlab::pgl2::osc::OscillatoryParams {
                    chi,
                    a1: temperlab::pgl2::Qp::from_unit(ctx, 1, va1, prec),
                    a2: temperlab::pgl2::Qp::from_unit(ctx, 1, va2, prec),
                    alpha1: temperlab::pgl2::TruncatedPowerSeries::identity(ctx, prec),
                    alpha2: temperlab::pgl2::TruncatedPowerSeries::identity(ctx, prec),
                    n,
                };
                print_value(temperlab::pgl2::j_m_bruteforce(&params, m)?);
                Ok(true)
            }
            Pgl2Cmd::Sweep { config } => {
                let doc = doc_or_default(&config, "jm_sweep")?;
                emit(&experiments::run(&doc, cli.seed)?, &dir)
            }
            Pgl2Cmd::Schur { config } => {
                let doc = doc_or_default(&config, "pgl2_schur")?;
                emit(&experiments::run(&doc, cli.seed)?, &dir)
            }
            Pgl2Cmd::Character { config } => {
                let doc = doc_or_default(&config, "character_formula")?;
                emit(&experiments::run(&doc, cli.seed)?, &dir)
            }
        },
        Command::Folner { cmd } => match cmd {
            FolnerCmd::Run { group, nmax } => {
                let mut text = String::from("[experiment]\nkind = folner\n[group]\n");
                if let Some(g) = group {
                    text.push_str(&format!("name = {g}\n"));
                }
                if let Some(n) = nmax {
                    text.push_str(&format!("[grid]\nn_max = {n}\n"));
                }
                let doc = Document::parse(&text)?;
                emit(&experiments::run(&doc, cli.seed)?, &dir)
            }
        },
        Command::Experiment { cmd } => match cmd {
            ExperimentCmd::Run { config } => {
                let doc = Document::load(&config)?;
                emit(&experiments::run(&doc, cli.seed)?, &dir)
            }
            ExperimentCmd::Replay { csv, summary } => {
                let csv_text = std::fs::read_to_string(&csv)?;
                let summary_text = std::fs::read_to_string(&summary)?;
                let summary = VerdictSummary::from_json(&summary_text)?;
                experiments::replay(&csv_text, &summary)?;
                println!("replay verified: verdicts identical");
                Ok(summary.all_pass())
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            use clap::error::ErrorKind;
            let kind = e.kind();
            let _ = e.print();
            return if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("failed to configure worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
