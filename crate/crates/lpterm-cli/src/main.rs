use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use lpterm::frontend::{parse_program, parse_query_spec};
use lpterm::oracle::cross_check;
use lpterm::prove::{prepare, prove_prepared, Analysis, Config, OpenReason, Verdict};
use lpterm::refine::HeuristicKind;
use lpterm::transform::transform_new;

/// Termination prover for definite logic programs.
#[derive(Parser, Debug)]
#[command(name = "lpterm", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    opts: Opts,
    /// Program file, or a directory of `.pl` files.
    path: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cross-check the prover against SLD resolution on sampled queries.
    Check {
        #[command(flatten)]
        opts: Opts,
        path: PathBuf,
        #[arg(long, default_value_t = 100, env = "LPTERM_SAMPLES")]
        samples: usize,
        #[arg(long, default_value_t = 10_000, env = "LPTERM_DEPTH_BOUND")]
        depth_bound: usize,
        #[arg(long, default_value_t = 0, env = "LPTERM_SEED")]
        seed: u64,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// Refinement heuristic: im, om, om2, tb or tb2.
    #[arg(long, default_value = "tb2", env = "LPTERM_HEURISTIC")]
    heuristic: HeuristicKind,
    #[arg(long, value_enum, default_value = "on", env = "LPTERM_MODE_SPLITTING")]
    mode_splitting: Switch,
    /// Largest coefficient of polynomial interpretations.
    #[arg(long, default_value_t = 2, env = "LPTERM_MAX_COEFF", value_parser = clap::value_parser!(u8).range(1..=5))]
    max_coeff: u8,
    /// Seconds per program.
    #[arg(long, default_value_t = 60, env = "LPTERM_TIMEOUT", value_parser = clap::value_parser!(u64).range(1..))]
    timeout: u64,
    #[arg(long, value_enum, default_value = "text", env = "LPTERM_PROOF_FORMAT")]
    proof_format: Format,
    /// Print the transformed rewrite system and stop.
    #[arg(long, env = "LPTERM_EMIT_TRS")]
    emit_trs: bool,
    /// Classical transformation of well-moded programs.
    #[arg(long, env = "LPTERM_CLASSICAL")]
    classical: bool,
}

impl Opts {
    fn config(&self) -> Config {
        Config {
            heuristic: self.heuristic,
            mode_splitting: matches!(self.mode_splitting, Switch::On),
            max_coeff: self.max_coeff,
            timeout: Duration::from_secs(self.timeout),
            classical: self.classical,
            ..Config::default()
        }
    }
}

fn analyze_file(path: &Path, cfg: &Config) -> Result<(Analysis, Duration), String> {
    let started = Instant::now();
    let src = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let prog = parse_program(&src).map_err(|e| e.to_string())?;
    let spec = parse_query_spec(&src).map_err(|e| e.to_string())?;
    let prepared = prepare(&prog, &spec, cfg).map_err(|e| e.to_string())?;
    let a = prove_prepared(prepared, cfg, started).map_err(|e| e.to_string())?;
    Ok((a, started.elapsed()))
}

fn emit_trs(path: &Path, cfg: &Config) -> Result<String, String> {
    let src = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let prog = parse_program(&src).map_err(|e| e.to_string())?;
    if cfg.classical {
        let spec = parse_query_spec(&src).map_err(|e| e.to_string())?;
        let m = spec.moding(&prog).map_err(|e| e.to_string())?;
        Ok(lpterm::transform::transform_classical(&prog, &m).map_err(|e| e.to_string())?.to_string())
    } else {
        Ok(transform_new(&prog).to_string())
    }
}

fn exit_for(v: &Verdict) -> ExitCode {
    match v {
        Verdict::Terminating => ExitCode::from(0),
        Verdict::Unknown(_) => ExitCode::from(1),
    }
}

fn run_file(path: &Path, opts: &Opts) -> ExitCode {
    let cfg = opts.config();
    if opts.emit_trs {
        return match emit_trs(path, &cfg) {
            Ok(s) => {
                print!("{s}");
                ExitCode::from(0)
            }
            Err(e) => fail(path, &e),
        };
    }
    match analyze_file(path, &cfg) {
        Ok((a, _)) => {
            match opts.proof_format {
                Format::Text => print!("{}", a.render_text()),
                Format::Json => println!("{}", serde_json::to_string_pretty(&a.to_json()).expect("serializable")),
            }
            exit_for(&a.verdict)
        }
        Err(e) => fail(path, &e),
    }
}

fn fail(path: &Path, e: &str) -> ExitCode {
    eprintln!("lpterm: {}: {e}", path.display());
    ExitCode::from(2)
}

fn programs_in(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "pl"))
        .collect();
    files.sort();
    Ok(files)
}

fn run_dir(dir: &Path, opts: &Opts) -> ExitCode {
    let files = match programs_in(dir) {
        Ok(f) => f,
        Err(e) => return fail(dir, &e.to_string()),
    };
    let cfg = opts.config();
    let results: Vec<_> = files.par_iter().map(|f| (f, analyze_file(f, &cfg))).collect();
    let (mut ok, mut failed, mut timeouts, mut errors) = (0, 0, 0, 0);
    let json = opts.proof_format == Format::Json;
    if !json {
        println!("{:<28} {:<12} {:>10}", "program", "verdict", "time (s)");
    }
    for (f, r) in &results {
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let (verdict, secs) = match r {
            Ok((a, t)) => {
                match a.verdict {
                    Verdict::Terminating => ok += 1,
                    Verdict::Unknown(OpenReason::Timeout) => timeouts += 1,
                    Verdict::Unknown(_) => failed += 1,
                }
                let v = match a.verdict {
                    Verdict::Terminating => "TERMINATING",
                    Verdict::Unknown(OpenReason::Timeout) => "TIMEOUT",
                    Verdict::Unknown(_) => "UNKNOWN",
                };
                (v.to_string(), t.as_secs_f64())
            }
            Err(e) => {
                errors += 1;
                eprintln!("lpterm: {}: {e}", f.display());
                ("ERROR".to_string(), 0.0)
            }
        };
        if json {
            let rec = serde_json::json!({ "program": name, "verdict": verdict, "seconds": secs });
            println!("{rec}");
        } else {
            println!("{name:<28} {verdict:<12} {secs:>10.3}");
        }
    }
    if json {
        let rec = serde_json::json!({ "successes": ok, "failures": failed, "timeouts": timeouts, "errors": errors });
        println!("{rec}");
    } else {
        println!();
        println!("Successes: {ok}  Failures: {failed}  Timeouts: {timeouts}  Errors: {errors}");
    }
    if errors > 0 {
        ExitCode::from(2)
    } else if failed + timeouts > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::from(0)
    }
}

fn run_check(path: &Path, opts: &Opts, samples: usize, depth_bound: usize, seed: u64) -> ExitCode {
    let cfg = opts.config();
    let inner = || -> Result<(Verdict, lpterm::oracle::CheckReport), String> {
        let (a, _) = analyze_file(path, &cfg)?;
        let src = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let prog = parse_program(&src).map_err(|e| e.to_string())?;
        let spec = parse_query_spec(&src).map_err(|e| e.to_string())?;
        let rp = transform_new(&prog);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rep = cross_check(&prog, &spec, &rp, samples, depth_bound, &mut rng).map_err(|e| e.to_string())?;
        Ok((a.verdict, rep))
    };
    let (verdict, rep) = match inner() {
        Ok(x) => x,
        Err(e) => return fail(path, &e),
    };
    let contradiction = verdict == Verdict::Terminating && rep.depth_exceeded > 0;
    if opts.proof_format == Format::Json {
        let rec = serde_json::json!({
            "verdict": verdict.to_string(),
            "report": rep,
            "consistent": !contradiction && rep.simulation_failures == 0,
        });
        println!("{rec}");
    } else {
        println!("verdict: {verdict}");
        println!("queries: {}", rep.queries);
        println!("  success: {}", rep.successes);
        println!("  failure: {}", rep.failures);
        println!("  depth bound {depth_bound} exceeded: {}", rep.depth_exceeded);
        println!("  budget exceeded: {}", rep.budget_exceeded);
        println!("simulated derivations: {} ({} invalid)", rep.simulated, rep.simulation_failures);
        for q in rep.non_terminating.iter().take(5) {
            println!("  runs past the bound: {q}");
        }
        if contradiction {
            println!("inconsistent: proof claims termination but a sampled query ran past the bound");
        }
    }
    if contradiction || rep.simulation_failures > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::from(0)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match (&cli.command, &cli.path) {
        (Some(Command::Check { opts, path, samples, depth_bound, seed }), _) => {
            run_check(path, opts, *samples, *depth_bound, *seed)
        }
        (None, Some(p)) if p.is_dir() => run_dir(p, &cli.opts),
        (None, Some(p)) => run_file(p, &cli.opts),
        (None, None) => {
            eprintln!("lpterm: no program given (see --help)");
            ExitCode::from(2)
        }
    }
}
