use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use csp_sampling::io::{parse_instance, parse_operation, parse_structures, parse_theory_spec, print_structures};
use csp_sampling::polymorphisms::{
    builtin_operation, check_polymorphism, is_near_unanimity, is_totally_symmetric, BuiltinOperation,
    OperationTable,
};
use csp_sampling::samplings::SampleFamily;
use csp_sampling::solvers::{
    instance_index, solve_ac_over_sampling, solve_nu_over_sampling, solve_via_sampling, SolveResult,
};

#[derive(Parser)]
#[command(version, about = "Sampling-based CSP solving for first-order theories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide satisfiability of an instance in a theory.
    ///
    /// Exits 0 when satisfiable, 1 when unsatisfiable and 2 on error.
    Solve {
        /// Theory specification file.
        #[arg(long)]
        theory: PathBuf,
        /// Instance file.
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Hom)]
        method: Method,
        /// Theory to use; defaults to the last one in the file.
        #[arg(long)]
        name: Option<String>,
        /// Print the report as one JSON object.
        #[arg(long)]
        json: bool,
    },
    /// Write the samples of a theory at index N in the structure format.
    Sample {
        #[arg(long)]
        theory: PathBuf,
        #[arg(short = 'n')]
        n: usize,
        #[arg(long)]
        name: Option<String>,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check an operation against a structure.
    Checkpoly {
        /// Structure file.
        #[arg(long)]
        structure: PathBuf,
        /// Which structure of the file, counting from 0.
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Operation table file.
        #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
        op: Option<PathBuf>,
        /// `majority` (f(x,y,z) = y if y = z, else x) or `min:K` (K-ary
        /// minimum in id order).
        #[arg(long)]
        builtin: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// Exact backtracking search.
    Hom,
    /// Arc-consistency.
    Ac,
    /// (2,3)-consistency.
    Nu,
}

impl Method {
    fn as_str(self) -> &'static str {
        match self {
            Method::Hom => "hom",
            Method::Ac => "ac",
            Method::Nu => "nu",
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_theory(path: &Path, name: Option<&str>) -> Result<SampleFamily> {
    let spec = parse_theory_spec(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    match name {
        Some(n) => spec
            .get(n)
            .cloned()
            .ok_or_else(|| anyhow!("{} defines no theory `{n}`", path.display())),
        None => spec.last().cloned().ok_or_else(|| anyhow!("{} defines no theory", path.display())),
    }
}

fn solve(theory: &Path, instance: &Path, method: Method, name: Option<&str>, as_json: bool) -> Result<bool> {
    let family = load_theory(theory, name)?;
    let inst = parse_instance(&read(instance)?, family.signature()).with_context(|| format!("in {}", instance.display()))?;
    match method {
        Method::Hom => {}
        Method::Ac => eprintln!(
            "warning: arc-consistency is exact only when every sample maps into a model with totally symmetric \
             polymorphisms of all arities; otherwise `satisfiable` may be wrong"
        ),
        Method::Nu => eprintln!(
            "warning: (2,3)-consistency is exact only when every sample has a ternary near-unanimity polymorphism; \
             otherwise `satisfiable` may be wrong"
        ),
    }

    let started = Instant::now();
    let index = instance_index(&family, &inst)?;
    let samples = match index {
        Some(n) => Some(family.generate(n)?),
        None => None,
    };
    let generate_ms = started.elapsed().as_secs_f64() * 1e3;

    let started = Instant::now();
    let result: SolveResult = match method {
        Method::Hom => solve_via_sampling(&family, &inst)?,
        Method::Ac => solve_ac_over_sampling(&family, &inst)?,
        Method::Nu => solve_nu_over_sampling(&family, &inst)?,
    };
    let solve_ms = started.elapsed().as_secs_f64() * 1e3;

    let witness: Vec<(String, String)> = match (&result.witness, &samples) {
        (Some(w), Some(samples)) => {
            let sample = &samples[w.sample_index];
            w.assignment.iter().map(|(v, e)| (v.to_string(), sample.label(e))).collect()
        }
        _ => Vec::new(),
    };
    let sample_index = result.witness.as_ref().map(|w| w.sample_index);

    if as_json {
        let report = json!({
            "theory": family.name(),
            "method": method.as_str(),
            "verdict": result.verdict.to_string(),
            "sample_index": sample_index,
            "witness": witness.iter().map(|(v, l)| (v.clone(), json!(l))).collect::<serde_json::Map<_, _>>(),
            "timings": { "generate_ms": generate_ms, "solve_ms": solve_ms },
        });
        println!("{report}");
    } else {
        println!("theory: {}", family.name());
        println!("method: {}", method.as_str());
        println!("verdict: {}", result.verdict);
        if let Some(i) = sample_index {
            println!("sample_index: {i}");
        }
        for (v, label) in &witness {
            println!("witness.{v}: {label}");
        }
        println!("time_generate_ms: {generate_ms:.3}");
        println!("time_solve_ms: {solve_ms:.3}");
    }
    Ok(result.is_sat())
}

fn sample(theory: &Path, n: usize, name: Option<&str>, out: Option<&Path>) -> Result<()> {
    let family = load_theory(theory, name)?;
    let samples = family.generate(n)?;
    let names: Vec<String> = (0..samples.len()).map(|i| format!("{}_{i}", family.name())).collect();
    let text = print_structures(names.iter().map(String::as_str).zip(samples.iter()));
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn builtin(spec: &str, domain_size: usize) -> Result<OperationTable> {
    let kind = match spec.split_once(':') {
        None if spec == "majority" => BuiltinOperation::MajorityEq { domain_size },
        Some(("min", k)) => BuiltinOperation::Min {
            order: (0..domain_size as u32).collect(),
            arity: k.parse().with_context(|| format!("bad arity in `{spec}`"))?,
        },
        None if spec == "min" => BuiltinOperation::Min {
            order: (0..domain_size as u32).collect(),
            arity: 2,
        },
        _ => bail!("unknown builtin operation `{spec}`; expected `majority` or `min:K`"),
    };
    Ok(builtin_operation(&kind)?)
}

fn checkpoly(structure: &Path, index: usize, op: Option<&Path>, builtin_spec: Option<&str>) -> Result<()> {
    let structures = parse_structures(&read(structure)?).with_context(|| format!("in {}", structure.display()))?;
    let (_, s) = structures
        .get(index)
        .ok_or_else(|| anyhow!("{} has {} structures, no index {index}", structure.display(), structures.len()))?;
    let f = match (op, builtin_spec) {
        (Some(path), _) => parse_operation(&read(path)?, s.domain_size()).with_context(|| format!("in {}", path.display()))?,
        (None, Some(b)) => builtin(b, s.domain_size())?,
        (None, None) => bail!("one of --op and --builtin is required"),
    };
    println!("polymorphism: {}", check_polymorphism(&f, s)?);
    println!("totally_symmetric: {}", is_totally_symmetric(&f));
    match f.arity() {
        0..=2 => println!("near_unanimity: n/a"),
        _ => println!("near_unanimity: {}", is_near_unanimity(&f)?),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve {
            theory,
            instance,
            method,
            name,
            json,
        } => {
            let sat = solve(&theory, &instance, method, name.as_deref(), json)?;
            Ok(ExitCode::from(if sat { 0 } else { 1 }))
        }
        Command::Sample { theory, n, name, out } => {
            sample(&theory, n, name.as_deref(), out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Checkpoly {
            structure,
            index,
            op,
            builtin,
        } => {
            checkpoly(&structure, index, op.as_deref(), builtin.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
