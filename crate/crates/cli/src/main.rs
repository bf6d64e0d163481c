//! `knotoidal`: universal invariants of the tabulated knotoid pairs and knot
//! measures of open curves.
//!
//! Exit codes: 0 success, 1 usage, 2 input could not be read or parsed,
//! 3 truncation orders out of range, 4 `--expect-distinct` not met.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use knotoidal_core::diagram::{fixture, reverse_decomposition, RotDecomp, TABLE};
use knotoidal_core::invariant::{compare, element_to_json, epsilon_coefficient, evaluate_z, Comparison, InvariantValue};
use knotoidal_core::measure::{self, dominant_knotoid, estimate_measure, OpenCurve3D, Phi};
use knotoidal_core::series::Caps;
use rayon::prelude::*;
use serde_json::{json, Value};

/// Largest accepted truncation orders.
const MAX_EPS: u32 = 4;
const MAX_HBAR: u32 = 16;

#[derive(Parser)]
#[command(name = "knotoidal", version, about = "Knotoid invariants and knot measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print Z of a decomposition.
    Invariant(InvariantArgs),
    /// Compare Z of two decompositions.
    Compare(CompareArgs),
    /// Compare every tabulated pair.
    Table(TableArgs),
    /// Estimate the knot measure of an open curve.
    Measure(MeasureArgs),
    /// Print a decomposition of the reverse.
    Reverse(ReverseArgs),
}

#[derive(Args, Clone, Copy)]
struct CapsArgs {
    #[arg(long, default_value_t = 1)]
    eps_order: u32,
    #[arg(long, default_value_t = 6)]
    hbar_order: u32,
}

impl CapsArgs {
    fn caps(self) -> Result<Caps, Failure> {
        if self.eps_order > MAX_EPS || self.hbar_order > MAX_HBAR {
            return Err(Failure::Caps(format!(
                "truncation orders ({}, {}) exceed the supported ({MAX_EPS}, {MAX_HBAR})",
                self.eps_order, self.hbar_order
            )));
        }
        Ok(Caps::new(self.eps_order, self.hbar_order))
    }
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Input {
    /// A built-in fixture such as `5_9` or `trivial`.
    #[arg(long)]
    fixture: Option<String>,
    /// A decomposition file (`labels L` then one token per line).
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct InvariantArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    caps: CapsArgs,
    /// Print only the coefficient of ε^K.
    #[arg(long, value_name = "K")]
    coefficient: Option<u32>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct PairInput {
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    fixtures: Option<Vec<String>>,
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    files: Option<Vec<PathBuf>>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    input: PairInput,
    #[command(flatten)]
    caps: CapsArgs,
    /// Also compare the reverse of the first against the second.
    #[arg(long)]
    with_reversal: bool,
    /// Exit 4 unless every comparison differs.
    #[arg(long)]
    expect_distinct: bool,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct TableArgs {
    #[command(flatten)]
    caps: CapsArgs,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum PhiArg {
    Classes,
    Zmean,
}

#[derive(Args)]
#[group(id = "curve", required = true, multiple = false)]
struct CurveInput {
    /// A curve file with one `x y z` triple per line.
    #[arg(long)]
    file: Option<PathBuf>,
    /// The bundled `open_trefoil` curve.
    #[arg(long)]
    fixture: Option<String>,
}

#[derive(Args)]
struct MeasureArgs {
    #[command(flatten)]
    input: CurveInput,
    #[command(flatten)]
    caps: CapsArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = PhiArg::Classes)]
    phi: PhiArg,
    /// Also write `class,count,frequency` rows here.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct ReverseArgs {
    #[command(flatten)]
    input: Input,
}

enum Failure {
    Usage(String),
    Load(String),
    Caps(String),
    Expectation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Load(_) => 2,
            Failure::Caps(_) => 3,
            Failure::Expectation(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Load(m) | Failure::Caps(m) | Failure::Expectation(m) => m,
        }
    }
}

fn load_decomp(fixture_name: Option<&str>, file: Option<&PathBuf>) -> Result<(String, RotDecomp), Failure> {
    if let Some(name) = fixture_name {
        let f = fixture(name).ok_or_else(|| Failure::Load(format!("unknown fixture `{name}`")))?;
        return Ok((name.to_string(), f.decomposition));
    }
    let path = file.expect("clap requires one input");
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Load(format!("{}: {e}", path.display())))?;
    let d = RotDecomp::parse(&text).map_err(|e| Failure::Load(format!("{}: {e}", path.display())))?;
    Ok((path.display().to_string(), d))
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json value serializes"));
}

fn describe(c: &Comparison) -> String {
    match c {
        Comparison::Equal => "equal up to caps".to_string(),
        Comparison::Differ(w) => format!(
            "differ at eps^{} hbar^{} on {}: {} vs {}",
            w.eps, w.hbar, w.monomial, w.left, w.right
        ),
    }
}

fn cmd_invariant(a: InvariantArgs) -> Result<(), Failure> {
    let caps = a.caps.caps()?;
    let (_, d) = load_decomp(a.input.fixture.as_deref(), a.input.file.as_ref())?;
    let z = evaluate_z(&d, caps);
    let element = match a.coefficient {
        None => z.element.clone(),
        Some(k) => epsilon_coefficient(&z, k).map_err(|e| Failure::Caps(e.to_string()))?,
    };
    match a.format {
        Format::Text => print!("{}", element.canonical_text()),
        Format::Json => print_json(&json!({
            "decomposition": d.to_string(),
            "fingerprint": z.fingerprint,
            "coefficient": a.coefficient,
            "value": element_to_json(&element),
        })),
    }
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> Result<(), Failure> {
    let caps = a.caps.caps()?;
    let ((na, da), (nb, db)) = match (&a.input.fixtures, &a.input.files) {
        (Some(f), _) => (load_decomp(Some(&f[0]), None)?, load_decomp(Some(&f[1]), None)?),
        (_, Some(p)) => (load_decomp(None, Some(&p[0]))?, load_decomp(None, Some(&p[1]))?),
        _ => return Err(Failure::Usage("give --fixtures or --files".into())),
    };
    let mut inputs = vec![da.clone(), db];
    if a.with_reversal {
        inputs.push(reverse_decomposition(&da));
    }
    let values: Vec<InvariantValue> = inputs.par_iter().map(|d| evaluate_z(d, caps)).collect();
    let direct = compare(&values[0], &values[1]).map_err(|e| Failure::Caps(e.to_string()))?;
    let reversed = match values.get(2) {
        Some(r) => Some(compare(r, &values[1]).map_err(|e| Failure::Caps(e.to_string()))?),
        None => None,
    };
    match a.format {
        Format::Text => {
            println!("caps {caps}");
            println!("{na} vs {nb}: {}", describe(&direct));
            if let Some(r) = &reversed {
                println!("-{na} vs {nb}: {}", describe(r));
            }
        }
        Format::Json => print_json(&json!({
            "a": na,
            "b": nb,
            "caps": caps,
            "direct": direct,
            "reversed": reversed,
        })),
    }
    if a.expect_distinct {
        let all_differ = !direct.is_equal() && reversed.as_ref().map_or(true, |r| !r.is_equal());
        if !all_differ {
            return Err(Failure::Expectation(format!("{na} and {nb} were not distinguished")));
        }
    }
    Ok(())
}

fn cmd_table(a: TableArgs) -> Result<(), Failure> {
    let caps = a.caps.caps()?;
    let results: Vec<Option<Comparison>> = TABLE
        .par_iter()
        .map(|row| {
            let (f, g) = fixture(row.first).zip(fixture(row.second))?;
            let (x, y) = rayon::join(
                || evaluate_z(&f.decomposition, caps),
                || evaluate_z(&g.decomposition, caps),
            );
            Some(compare(&x, &y).expect("same caps"))
        })
        .collect();
    let differ = results.iter().flatten().filter(|c| !c.is_equal()).count();
    let equal = results.iter().flatten().filter(|c| c.is_equal()).count();
    let missing = results.iter().filter(|c| c.is_none()).count();
    match a.format {
        Format::Text => {
            println!("caps {caps}");
            for (row, result) in TABLE.iter().zip(&results) {
                let status = result.as_ref().map_or("n/a (no decomposition bundled)".to_string(), describe);
                println!("{} {}: {status}", row.first, row.second);
            }
            println!("differ {differ}, equal {equal}, n/a {missing}");
        }
        Format::Json => {
            let rows: Vec<Value> = TABLE
                .iter()
                .zip(&results)
                .map(|(row, result)| {
                    json!({
                        "first": row.first,
                        "second": row.second,
                        "code": row.code,
                        "comparison": result,
                    })
                })
                .collect();
            print_json(&json!({
                "caps": caps,
                "rows": rows,
                "summary": { "differ": differ, "equal": equal, "unavailable": missing },
            }))
        }
    }
    Ok(())
}

fn cmd_measure(a: MeasureArgs) -> Result<(), Failure> {
    let phi = match a.phi {
        PhiArg::Classes => Phi::Classes,
        PhiArg::Zmean => Phi::ZMean(a.caps.caps()?),
    };
    if !(a.tol > 0.0) {
        return Err(Failure::Usage("--tol must be positive".into()));
    }
    let curve = match (&a.input.fixture, &a.input.file) {
        (Some(name), _) if name == "open_trefoil" => OpenCurve3D::parse(measure::OPEN_TREFOIL),
        (Some(name), _) => return Err(Failure::Load(format!("unknown curve fixture `{name}`"))),
        (_, Some(path)) => measure::load_curve(path),
        _ => return Err(Failure::Usage("give --file or --fixture".into())),
    }
    .map_err(|e| Failure::Load(e.to_string()))?;
    let e = estimate_measure(&curve, a.samples as usize, a.seed, a.tol, phi)
        .map_err(|e| Failure::Load(e.to_string()))?;
    let dominant = dominant_knotoid(&e).map_err(|e| Failure::Load(e.to_string()))?;
    if let Some(path) = &a.csv {
        std::fs::write(path, e.to_csv()).map_err(|err| Failure::Load(format!("{}: {err}", path.display())))?;
    }
    match a.format {
        Format::Text => {
            println!("samples {} accepted {} rejected {}", e.samples, e.accepted, e.rejected);
            for (class, count) in &e.class_counts {
                println!("{count:>6} {:.4} {class}", e.class_freq[class]);
            }
            println!("dominant {dominant}");
        }
        Format::Json => {
            let mut v = serde_json::to_value(&e).expect("estimate serializes");
            v["dominant"] = json!(dominant);
            print_json(&v);
        }
    }
    Ok(())
}

fn cmd_reverse(a: ReverseArgs) -> Result<(), Failure> {
    let (_, d) = load_decomp(a.input.fixture.as_deref(), a.input.file.as_ref())?;
    print!("{}", reverse_decomposition(&d).render());
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("KNOTOIDAL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("KNOTOIDAL_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Invariant(a) => cmd_invariant(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Table(a) => cmd_table(a),
        Command::Measure(a) => cmd_measure(a),
        Command::Reverse(a) => cmd_reverse(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
