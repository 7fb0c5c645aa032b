//! Command-line front end: lock, attack, verify, eval, gen.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gatelock::attack::{run_attack, AttackOptions};
use gatelock::bench::{parse_bench_file, write_bench_file};
use gatelock::experiment::{aggregate_json, csv_text, run_experiment, ExperimentSpec};
use gatelock::locker::{parse_key_file, Scheme};
use gatelock::sim::{check_equivalence, EquivOutcome};

#[derive(Parser)]
#[command(
    name = "gatelock",
    version,
    about = "Lock gate-level netlists with XOR/XNOR key gates, attack them by structural search, and measure the outcome"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Rll,
    Sll,
    Cm,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Scheme {
        match s {
            SchemeArg::Rll => Scheme::Rll,
            SchemeArg::Sll => Scheme::Sll,
            SchemeArg::Cm => Scheme::Cm,
        }
    }
}

#[derive(Args)]
struct LockArgs {
    /// Original `.bench` netlist.
    bench: PathBuf,
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    /// Number of key gates (RLL/SLL).
    #[arg(long, conflicts_with = "budget")]
    keys: Option<usize>,
    /// Key-size range MIN:MAX for the countermeasure scheme.
    #[arg(long)]
    budget: Option<String>,
    /// Key gates per cluster (SLL and clustered countermeasure).
    #[arg(long, default_value_t = 3)]
    cluster: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Share of inverting key gates realized by the successor rewrite.
    #[arg(long, default_value_t = gatelock::locker::DEFAULT_DEMORGAN_SHARE)]
    demorgan_share: f64,
    /// Cone depth for countermeasure family discovery.
    #[arg(long, default_value_t = 2)]
    layers: u32,
    /// Give every countermeasure instance its own key input instead of one
    /// shared input per family (weaker; kept for experiments).
    #[arg(long)]
    independent_keys: bool,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct AttackArgs {
    /// Locked `.bench` netlist; key files are never read.
    locked: PathBuf,
    #[arg(long, default_value_t = 4)]
    max_layers: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    original: PathBuf,
    locked: PathBuf,
    /// `keyinput<i>=<bit>` key file.
    #[arg(long)]
    key: PathBuf,
    /// Random vectors when the input space is too wide for exhaustion.
    #[arg(long, default_value_t = 10_000)]
    vectors: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct EvalArgs {
    bench: PathBuf,
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    #[arg(long, conflicts_with = "budget")]
    keys: Option<usize>,
    #[arg(long)]
    budget: Option<String>,
    #[arg(long, default_value_t = 3)]
    cluster: usize,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    #[arg(long, default_value_t = 1)]
    base_seed: u64,
    #[arg(long, default_value_t = 4)]
    max_layers: u32,
    #[arg(long, default_value_t = gatelock::locker::DEFAULT_DEMORGAN_SHARE)]
    demorgan_share: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    /// Circuit to synthesize: a benchmark-class stand-in (c880, c1355,
    /// c1908, c2670, c3540, c5315, c6288, c7552) or adder<N>/mult<N>.
    name: String,
    /// Output `.bench` path (defaults to <name>.bench).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Insert key gates and emit the locked netlist, key file and record.
    Lock(LockArgs),
    /// Recover keys from a locked netlist by structural search alone.
    Attack(AttackArgs),
    /// Check functional equivalence of original and locked under a key.
    Verify(VerifyArgs),
    /// Lock, attack and score many seeded instances; emit CSV and JSON.
    Eval(EvalArgs),
    /// Generate a deterministic circuit (stand-ins and test shapes).
    Gen(GenArgs),
}

fn parse_budget(text: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| format!("budget `{text}` must look like MIN:MAX"))?;
    let lo = lo.trim().parse().map_err(|e| format!("budget min: {e}"))?;
    let hi = hi.trim().parse().map_err(|e| format!("budget max: {e}"))?;
    if lo == 0 || lo > hi {
        return Err(format!("budget `{text}` must satisfy 0 < MIN <= MAX"));
    }
    Ok((lo, hi))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "netlist".into())
}

fn cmd_lock(args: &LockArgs) -> Result<(), String> {
    let n = parse_bench_file(&args.bench).map_err(|e| e.to_string())?;
    let spec_budget = match &args.budget {
        Some(b) => Some(parse_budget(b)?),
        None => None,
    };
    let locked = match Scheme::from(args.scheme) {
        Scheme::Rll => {
            let keys = args.keys.ok_or("--keys is required for RLL")?;
            gatelock::locker::lock_rll_with(&n, keys, args.seed, args.demorgan_share)
        }
        Scheme::Sll => {
            let keys = args.keys.ok_or("--keys is required for SLL")?;
            gatelock::locker::lock_sll_with(&n, keys, args.cluster, args.seed, args.demorgan_share)
        }
        Scheme::Cm => {
            let (min, max) = spec_budget.ok_or("--budget MIN:MAX is required for CM")?;
            let mut opts = if args.cluster > 1 {
                gatelock::countermeasure::CmOptions::sll(
                    gatelock::countermeasure::KeyBudget::new(min, max),
                    args.cluster,
                    args.seed,
                )
            } else {
                gatelock::countermeasure::CmOptions::rll(
                    gatelock::countermeasure::KeyBudget::new(min, max),
                    args.seed,
                )
            };
            opts.layers = args.layers;
            opts.shared_key = !args.independent_keys;
            gatelock::countermeasure::lock_cm(&n, &opts)
        }
    }
    .map_err(|e| e.to_string())?;

    std::fs::create_dir_all(&args.out).map_err(|e| e.to_string())?;
    let base = stem(&args.bench);
    let bench_path = args.out.join(format!("{base}.locked.bench"));
    let key_path = args.out.join(format!("{base}.key"));
    let json_path = args.out.join(format!("{base}.lock.json"));
    write_bench_file(&locked.netlist, &bench_path).map_err(|e| e.to_string())?;
    std::fs::write(&key_path, locked.key_file_text()).map_err(|e| e.to_string())?;
    std::fs::write(&json_path, locked.record_json()).map_err(|e| e.to_string())?;
    println!(
        "locked {} with {} key gates ({} key inputs); wrote {}, {}, {}",
        args.bench.display(),
        locked.records.len(),
        locked.netlist.key_inputs().len(),
        bench_path.display(),
        key_path.display(),
        json_path.display()
    );
    Ok(())
}

fn cmd_attack(args: &AttackArgs) -> Result<(), String> {
    let n = parse_bench_file(&args.locked).map_err(|e| e.to_string())?;
    if n.key_inputs().is_empty() {
        eprintln!(
            "warning: {} has no key inputs; emitting an empty prediction set",
            args.locked.display()
        );
    }
    let report = run_attack(
        &n,
        &AttackOptions {
            max_layers: args.max_layers,
            seed: args.seed,
        },
    );
    std::fs::create_dir_all(&args.out).map_err(|e| e.to_string())?;
    let base = stem(&args.locked);
    let pred_path = args.out.join(format!("{base}.pred"));
    let json_path = args.out.join(format!("{base}.attack.json"));
    std::fs::write(&pred_path, report.predictions_text()).map_err(|e| e.to_string())?;
    std::fs::write(&json_path, report.to_json()).map_err(|e| e.to_string())?;
    println!(
        "attacked {}: {} of {} keys definite (sr {}%); wrote {}, {}",
        args.locked.display(),
        report.definite(),
        report.predictions.len(),
        gatelock::attack::format_percent(report.sr),
        pred_path.display(),
        json_path.display()
    );
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool, String> {
    let original = parse_bench_file(&args.original).map_err(|e| e.to_string())?;
    let locked = parse_bench_file(&args.locked).map_err(|e| e.to_string())?;
    let key_text = std::fs::read_to_string(&args.key).map_err(|e| e.to_string())?;
    let key: HashMap<String, bool> = parse_key_file(&key_text).map_err(|e| e.to_string())?;
    let outcome = check_equivalence(&original, &locked, &key, args.vectors, args.seed, 16)
        .map_err(|e| e.to_string())?;
    match outcome {
        EquivOutcome::Equivalent { vectors_checked } => {
            println!("PASS: outputs match on all {vectors_checked} vectors");
            Ok(true)
        }
        EquivOutcome::Mismatch(cex) => {
            println!("FAIL: output `{}` differs ({} vs {})", cex.output, cex.lhs as u8, cex.rhs as u8);
            let mut parts: Vec<String> = cex
                .assignment
                .iter()
                .map(|(name, bit)| format!("{name}={}", *bit as u8))
                .collect();
            parts.sort();
            println!("counterexample: {}", parts.join(" "));
            Ok(false)
        }
    }
}

fn cmd_eval(args: &EvalArgs) -> Result<(), String> {
    let n = parse_bench_file(&args.bench).map_err(|e| e.to_string())?;
    let mut spec = ExperimentSpec::new(args.bench.clone(), args.scheme.into(), 0);
    match Scheme::from(args.scheme) {
        Scheme::Cm => {
            let text = args.budget.as_deref().ok_or("--budget MIN:MAX is required for CM")?;
            spec.budget = Some(parse_budget(text)?);
        }
        _ => {
            spec.key_size = args.keys.ok_or("--keys is required for RLL/SLL")?;
        }
    }
    spec.cluster = args.cluster;
    spec.runs = args.runs;
    spec.base_seed = args.base_seed;
    spec.max_layers = args.max_layers;
    spec.demorgan_share = args.demorgan_share;

    let result = run_experiment(&n, &spec).map_err(|e| e.to_string())?;
    std::fs::create_dir_all(&args.out).map_err(|e| e.to_string())?;
    let base = format!("{}.{}", stem(&args.bench), Scheme::from(args.scheme).to_string().to_lowercase());
    let csv_path = args.out.join(format!("{base}.csv"));
    let json_path = args.out.join(format!("{base}.json"));
    std::fs::write(&csv_path, csv_text(&result)).map_err(|e| e.to_string())?;
    std::fs::write(&json_path, aggregate_json(&spec, &result)).map_err(|e| e.to_string())?;
    let a = &result.aggregates;
    println!(
        "{} runs: sr mean {} stddev {:.2}, mr mean {}, time {:.2}/{:.2}/{:.2}s (min/mean/max); wrote {}, {}",
        spec.runs,
        gatelock::attack::format_percent(a.sr_mean),
        a.sr_stddev,
        gatelock::attack::format_percent(a.mr_mean),
        a.time_min,
        a.time_mean,
        a.time_max,
        csv_path.display(),
        json_path.display()
    );
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> Result<(), String> {
    let n = if let Some(n) = gatelock::benchgen::standin(&args.name) {
        n
    } else if let Some(bits) = args.name.strip_prefix("adder") {
        let bits: usize = bits.parse().map_err(|e| format!("adder width: {e}"))?;
        gatelock::benchgen::ripple_carry_adder(bits)
    } else if let Some(width) = args.name.strip_prefix("mult") {
        let width: usize = width.parse().map_err(|e| format!("multiplier width: {e}"))?;
        gatelock::benchgen::array_multiplier(width)
    } else {
        return Err(format!(
            "unknown circuit `{}`; try c880, c1355, c1908, c2670, c3540, c5315, c6288, c7552, adder<N> or mult<N>",
            args.name
        ));
    };
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.bench", args.name)));
    write_bench_file(&n, &out).map_err(|e| e.to_string())?;
    println!(
        "wrote {} ({} gates, {} inputs, {} outputs)",
        out.display(),
        n.num_logic_gates(),
        n.primary_inputs().len(),
        n.primary_outputs().len()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Lock(args) => cmd_lock(args).map(|_| true),
        Command::Attack(args) => cmd_attack(args).map(|_| true),
        Command::Verify(args) => cmd_verify(args),
        Command::Eval(args) => cmd_eval(args).map(|_| true),
        Command::Gen(args) => cmd_gen(args).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
