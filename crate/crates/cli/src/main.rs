//! `oscbound`: rearrangements, oscillation seminorms, Calderón–Zygmund
//! decompositions, and the inequality verification suites, from the shell.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use oscbound_core::cz::{self, CzMethod};
use oscbound_core::grid::{GridFunction, PrefixSumTable};
use oscbound_core::oscillation;
use oscbound_core::rearrange;
use oscbound_core::shape::BasisDescriptor;
use oscbound_core::verify::{self, corpus, SuiteConfig, SuiteId};
use oscbound_core::ConcentrationInstance;

#[derive(Parser)]
#[command(
    name = "oscbound",
    version,
    about = "Oscillation bounds on rearrangements, verified at desk scale"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    Cubes,
    Rectangles,
    Falsecubes,
}

impl BasisArg {
    fn descriptor(self, permuted: bool) -> BasisDescriptor {
        match self {
            BasisArg::Cubes => BasisDescriptor::cubes(),
            BasisArg::Rectangles => BasisDescriptor::rectangles(),
            BasisArg::Falsecubes => BasisDescriptor::false_cubes().with_permuted_axes(permuted),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Dyadic,
    Bisection,
    Risingsun,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the decreasing rearrangement of a grid function.
    Rearrange {
        #[arg(long)]
        input: PathBuf,
        /// CSV output (breakpoint,value rows).
        #[arg(long)]
        out_csv: Option<PathBuf>,
        /// JSON output.
        #[arg(long)]
        out_json: Option<PathBuf>,
        /// Also emit the distribution function next to each output.
        #[arg(long)]
        distribution: bool,
    },
    /// Scan a basis for the BMO seminorm of a grid function.
    Oscillation {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        basis: BasisArg,
        /// Re-optimize the argmax shape with real endpoints.
        #[arg(long)]
        refine: bool,
        /// For false cubes: allow long sides on any axes.
        #[arg(long)]
        permuted: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Construct and validate a Calderón–Zygmund decomposition.
    Czd {
        #[arg(long)]
        input: PathBuf,
        /// Target measure (level = mean of g* over (0, t)).
        #[arg(long)]
        t: Option<f64>,
        /// Direct level (expert mode).
        #[arg(long)]
        level: Option<f64>,
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact bounded-differences concentration checks on random tables, or
    /// on an instance loaded from JSON.
    Concentration {
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Per-coordinate Bernoulli bias.
        #[arg(long, default_value_t = 0.5)]
        bias: f64,
        /// Check a single instance from a JSON file ({"m":..,"table":[..],"bias":..}).
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite and write its report.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        dim: Option<usize>,
        /// Cells per axis (square grids).
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Refine the majorant argmax shapes (the default).
        #[arg(long)]
        refine: bool,
        /// Disable refinement (diagnostics only; majorants then undershoot).
        #[arg(long, conflicts_with = "refine")]
        no_refine: bool,
        /// Relative slack override.
        #[arg(long)]
        slack: Option<f64>,
        /// Supersampling factor for rasterized symmetrizations.
        #[arg(long)]
        supersample: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Per-trial ratios as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Append a dimension-vs-ratio row for plotting.
        #[arg(long)]
        plot_data: Option<PathBuf>,
        /// Dump reproducers for violated trials here.
        #[arg(long)]
        reproducer_dir: Option<PathBuf>,
    },
    /// Print the constants table for a dimension (or 1..=5).
    Constants {
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Generate a deterministic corpus of grid functions.
    Corpus {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        count: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Rearrange {
            input,
            out_csv,
            out_json,
            distribution,
        } => {
            let f = GridFunction::load_path(&input)?;
            let fstar = rearrange::decreasing_rearrangement(&f);
            if let Some(path) = &out_csv {
                std::fs::write(path, fstar.to_csv())?;
            }
            if let Some(path) = &out_json {
                std::fs::write(path, serde_json::to_string_pretty(&fstar)?)?;
            }
            if distribution {
                let mu = rearrange::distribution(&f);
                if let Some(path) = &out_csv {
                    std::fs::write(path.with_extension("distribution.csv"), mu.to_csv())?;
                }
                if let Some(path) = &out_json {
                    std::fs::write(
                        path.with_extension("distribution.json"),
                        serde_json::to_string_pretty(&mu)?,
                    )?;
                }
            }
            if out_csv.is_none() && out_json.is_none() {
                println!("{}", fstar.to_csv());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Oscillation {
            input,
            basis,
            refine,
            permuted,
            out,
        } => {
            let f = GridFunction::load_path(&input)?;
            let table = PrefixSumTable::build(&f);
            let descriptor = basis.descriptor(permuted);
            let report = oscillation::bmo_seminorm(&f, &table, &descriptor, refine)?;
            std::fs::write(&out, serde_json::to_string_pretty(&report)?)?;
            println!(
                "seminorm {} over {} shapes",
                report.seminorm, report.shapes_scanned
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Czd {
            input,
            t,
            level,
            method,
            out,
        } => {
            let g = GridFunction::load_path(&input)?;
            let d = match (method, t, level) {
                (MethodArg::Dyadic, Some(t), None) => cz::dyadic_cz_from_t(&g, t)?,
                (MethodArg::Dyadic, None, Some(gamma)) => cz::dyadic_cz(&g, gamma)?,
                (MethodArg::Bisection, Some(t), None) => cz::bisection_cz(&g, t)?,
                (MethodArg::Risingsun, t_opt, level_opt) => {
                    let gamma = match (t_opt, level_opt) {
                        (Some(t), None) => cz::level_from_t(&g, t)?,
                        (None, Some(gamma)) => gamma,
                        _ => return Err("pass exactly one of --t or --level".into()),
                    };
                    cz::rising_sun_1d(&g, gamma)?
                }
                (MethodArg::Bisection, None, Some(_)) => {
                    return Err("bisection derives its level from --t".into())
                }
                _ => return Err("pass exactly one of --t or --level".into()),
            };
            let validation = cz::validate_cz(&g, &d);
            let payload = serde_json::json!({
                "gamma": d.gamma,
                "c_star": d.c_star,
                "method": d.method,
                "t": d.t,
                "pairs": d.pairs,
                "validation": validation,
            });
            std::fs::write(&out, serde_json::to_string_pretty(&payload)?)?;
            let verdict = if validation.ok() { "valid" } else { "INVALID" };
            println!(
                "{} decomposition at level {} with {} pairs: {}",
                match d.method {
                    CzMethod::Dyadic => "dyadic",
                    CzMethod::Bisection => "bisection",
                    CzMethod::RisingSun => "rising-sun",
                },
                d.gamma,
                d.pairs.len(),
                verdict
            );
            Ok(if validation.ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Concentration {
            m,
            trials,
            seed,
            bias,
            instance,
            out,
        } => {
            use rand::{Rng, SeedableRng};
            let mut rows = Vec::new();
            let mut all_ok = true;
            if let Some(path) = &instance {
                let inst: ConcentrationInstance =
                    serde_json::from_str(&std::fs::read_to_string(path)?)?;
                let inst = ConcentrationInstance::new(inst.m, inst.table, inst.bias)?;
                let a = oscbound_core::concentration::bounded_differences(&inst);
                let (lhs, rhs) = oscbound_core::concentration::check_concentration(&inst);
                let ok = lhs <= rhs + 1e-12 * (1.0 + lhs.abs() + rhs.abs());
                all_ok &= ok;
                rows.push(serde_json::json!({
                    "lhs": lhs, "rhs": rhs, "pass": ok, "bounded_differences": a,
                }));
            } else {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                for trial in 0..trials {
                    let table: Vec<f64> = (0..1usize << m)
                        .map(|_| rng.random_range(-1.0..1.0))
                        .collect();
                    let inst = ConcentrationInstance::new(m, table, bias)?;
                    let (lhs, rhs) = oscbound_core::concentration::check_concentration(&inst);
                    let ok = lhs <= rhs + 1e-12 * (1.0 + lhs.abs() + rhs.abs());
                    all_ok &= ok;
                    rows.push(serde_json::json!({
                        "trial": trial, "lhs": lhs, "rhs": rhs, "pass": ok,
                    }));
                }
            }
            let payload = serde_json::json!({
                "m": m, "bias": bias, "trials": rows.len(), "all_pass": all_ok, "rows": rows,
            });
            if let Some(path) = out {
                std::fs::write(path, serde_json::to_string_pretty(&payload)?)?;
            } else {
                println!("{}", serde_json::to_string_pretty(&payload)?);
            }
            Ok(if all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Verify {
            suite,
            dim,
            grid,
            trials,
            seed,
            refine,
            no_refine,
            slack,
            supersample,
            out,
            csv,
            plot_data,
            reproducer_dir,
        } => {
            let id: SuiteId = suite.parse()?;
            let dim = dim.unwrap_or_else(|| id.default_dim());
            let mut cfg = SuiteConfig::with_dim(id, dim);
            if let Some(e) = grid {
                cfg.extents = vec![e; dim];
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if refine {
                cfg.refine = true;
            }
            if no_refine {
                cfg.refine = false;
            }
            if let Some(s) = slack {
                cfg.slack_rel = Some(s);
            }
            if let Some(k) = supersample {
                cfg.supersample = k;
            }
            cfg.reproducer_dir = reproducer_dir;
            let report = verify::run_suite(&cfg)?;
            report.write_json(&out)?;
            if let Some(path) = csv {
                report.write_csv(path)?;
            }
            if let Some(path) = plot_data {
                report.append_plot_row(path)?;
            }
            println!(
                "{}: {} (constant {}, max ratio {:.6}, {} trials, {:.2}s)",
                report.suite,
                report.verdict,
                report.constant,
                report.max_ratio,
                report.trials.len(),
                report.wall_time_s
            );
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Constants { dim } => {
            let dims: Vec<usize> = dim.map(|d| vec![d]).unwrap_or_else(|| (1..=5).collect());
            let rows: Vec<_> = dims.into_iter().map(verify::constants).collect();
            println!("{}", serde_json::to_string_pretty(&rows)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Corpus {
            dim,
            grid,
            seed,
            count,
            out_dir,
        } => {
            let extents = grid
                .map(|e| vec![e; dim])
                .unwrap_or_else(|| corpus::default_extents(dim));
            let geom = corpus::geometry_for(dim, &extents);
            std::fs::create_dir_all(&out_dir)?;
            for (i, f) in corpus::generate_corpus(&geom, &corpus::default_weights(), seed, count)
                .iter()
                .enumerate()
            {
                let path = out_dir.join(format!("corpus_{dim}d_seed{seed}_{i:03}.oscg"));
                f.save_path(&path)?;
            }
            println!("wrote {count} grid functions to {}", out_dir.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
