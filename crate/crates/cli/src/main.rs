use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tempinv_core::canon;
use tempinv_core::lifted::Analysis;
use tempinv_core::load::{load_domain, load_problem, LoadError, LoadedDomain};
use tempinv_core::oracle::{verify_template, Bounds, GroundProblem, OracleVerdict};
use tempinv_core::statevar::{build_state_variables, Encoding, Format};
use tempinv_core::synth::{synthesize, Mode, Options, SynthesisReport};
use tempinv_core::template::Template;
use tempinv_core::FORMAT_HEADER;

#[derive(Parser)]
#[command(name = "tempinv", version, about = "Mutual-exclusion invariants for temporal PDDL domains")]
struct Cli {
    /// Worker threads for template checking (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthMode {
    Tis,
    Sis,
}

impl From<SynthMode> for Mode {
    fn from(m: SynthMode) -> Self {
        match m {
            SynthMode::Tis => Mode::Tis,
            SynthMode::Sis => Mode::Sis,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VarMode {
    Bis,
    Sis,
    Tis,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Text,
    Json,
}

#[derive(clap::Args)]
struct SynthArgs {
    /// Largest number of components of a repaired template.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    repair_cap: u32,
    /// Try every counted position for components added by repair.
    #[arg(long)]
    repair_exhaustive: bool,
}

impl SynthArgs {
    fn options(&self) -> Options {
        Options { repair_cap: self.repair_cap as usize, repair_exhaustive: self.repair_exhaustive }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the canonical form of a domain.
    Canon { domain: PathBuf },
    /// Synthesize invariant templates.
    Invariants {
        #[arg(long, value_enum, default_value = "tis")]
        mode: SynthMode,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
        /// Include wall-clock timings (output is then not reproducible).
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        synth: SynthArgs,
        domain: PathBuf,
    },
    /// Build multi-valued state variables for a problem.
    Statevars {
        #[arg(long, value_enum, default_value = "tis")]
        mode: VarMode,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
        #[command(flatten)]
        synth: SynthArgs,
        domain: PathBuf,
        problem: PathBuf,
    },
    /// Check a template by exhaustive bounded search of a problem.
    Verify {
        #[arg(long)]
        template: String,
        #[arg(long, default_value_t = 8)]
        max_depth: usize,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
        max_sim: u32,
        #[arg(long, default_value_t = 2_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        state_cap: u64,
        /// Also ground with repeated objects (outside the analysed model).
        #[arg(long)]
        allow_repeats: bool,
        domain: PathBuf,
        problem: PathBuf,
    },
    /// Compare expected invariants with the synthesized ones and explain
    /// the missing ones.
    Debug {
        #[arg(long = "expect", required = true)]
        expected: Vec<String>,
        #[arg(long, value_enum, default_value = "tis")]
        mode: SynthMode,
        #[command(flatten)]
        synth: SynthArgs,
        domain: PathBuf,
    },
}

/// A diagnostic for stderr and exit code 1.
struct Diag(String);

fn located(path: &Path, e: &LoadError) -> Diag {
    match e {
        LoadError::Parse(_) | LoadError::Canon(_) => Diag(format!("{}:{e}", path.display())),
        _ => Diag(format!("{}: {e}", path.display())),
    }
}

fn read(path: &Path) -> Result<String, Diag> {
    fs::read_to_string(path).map_err(|e| Diag(format!("{}: {e}", path.display())))
}

fn domain(path: &Path) -> Result<LoadedDomain, Diag> {
    load_domain(&read(path)?).map_err(|e| located(path, &e))
}

fn problem(d: &LoadedDomain, dpath: &Path, path: &Path) -> Result<GroundProblem, Diag> {
    let p = load_problem(d, &read(path)?).map_err(|e| match e {
        LoadError::CanonicalDomainForProblem => located(dpath, &e),
        e => located(path, &e),
    })?;
    GroundProblem::new(&d.domain, &p, false).map_err(|e| located(path, &LoadError::Ground(e)))
}

fn template(key: &str) -> Result<Template, Diag> {
    Template::parse(key).map_err(|e| Diag(format!("template '{key}': {e}")))
}

fn report_json(r: &SynthesisReport) -> String {
    let mut v = serde_json::to_value(r).expect("report serializes");
    v.as_object_mut().expect("report is an object").insert("format".into(), FORMAT_HEADER.into());
    let mut s = serde_json::to_string_pretty(&v).expect("json values serialize");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<(String, u8), Diag> {
    match cli.command {
        Command::Canon { domain: path } => {
            let d = domain(&path)?;
            Ok((format!("{FORMAT_HEADER}\n{}", canon::render(&d.domain)), 0))
        }
        Command::Invariants { mode, format, timing, synth, domain: path } => {
            let d = domain(&path)?;
            let mut r = synthesize(&d.domain, mode.into(), synth.options());
            if !timing {
                r.timing = None;
            }
            let out = match format {
                OutFormat::Text => {
                    let mut s = format!("{FORMAT_HEADER}\n{}", r.to_text());
                    if let Some(t) = &r.timing {
                        s.push_str(&format!("; check {:.3}s total {:.3}s\n", t.check_seconds, t.total_seconds));
                    }
                    s
                }
                OutFormat::Json => report_json(&r),
            };
            Ok((out, 0))
        }
        Command::Statevars { mode, format, synth, domain: dpath, problem: ppath } => {
            let d = domain(&dpath)?;
            let gp = problem(&d, &dpath, &ppath)?;
            let (enc, invariants) = match mode {
                VarMode::Bis => (Encoding::Bis, Vec::new()),
                VarMode::Sis | VarMode::Tis => {
                    let (enc, m) = if matches!(mode, VarMode::Sis) { (Encoding::Sis, Mode::Sis) } else { (Encoding::Tis, Mode::Tis) };
                    let r = synthesize(&d.domain, m, synth.options());
                    (enc, r.accepted.into_iter().map(|a| a.template).collect())
                }
            };
            let vars = build_state_variables(&invariants, &d.domain, &gp, enc);
            let f = match format {
                OutFormat::Text => Format::Text,
                OutFormat::Json => Format::Json,
            };
            Ok((vars.emit(f), 0))
        }
        Command::Verify { template: key, max_depth, max_sim, state_cap, allow_repeats, domain: dpath, problem: ppath } => {
            let t = template(&key)?;
            let d = domain(&dpath)?;
            let p = load_problem(&d, &read(&ppath)?).map_err(|e| located(&ppath, &e))?;
            let gp = GroundProblem::new(&d.domain, &p, allow_repeats).map_err(|e| located(&ppath, &LoadError::Ground(e)))?;
            let bounds = Bounds { max_depth, max_sim: max_sim as usize, state_cap: state_cap as usize };
            let mut out = format!("{FORMAT_HEADER}\n");
            let code = match verify_template(&t, &gp, bounds) {
                OracleVerdict::Holds { states, .. } => {
                    log::info!("{states} states explored");
                    out.push_str(&format!("Holds (depth {max_depth})\n"));
                    0
                }
                OracleVerdict::Inconclusive { states } => {
                    out.push_str(&format!("Inconclusive (state cap reached after {states} states)\n"));
                    0
                }
                OracleVerdict::Violated { trace, instance, atoms } => {
                    let atoms: Vec<String> = atoms.iter().map(|a| a.to_string()).collect();
                    out.push_str(&format!("Violated: instance {instance} has {} true\n", atoms.join(", ")));
                    out.push_str("; executable-reachable witness, one happening per line\n");
                    for h in &trace {
                        out.push_str(&gp.format_happening(h));
                        out.push('\n');
                    }
                    2
                }
                OracleVerdict::InitViolation { instance, atoms } => {
                    let atoms: Vec<String> = atoms.iter().map(|a| a.to_string()).collect();
                    return Err(Diag(format!(
                        "{}: initial state gives instance {instance} of {t} weight two or more: {}",
                        ppath.display(),
                        atoms.join(", ")
                    )));
                }
            };
            Ok((out, code))
        }
        Command::Debug { expected, mode, synth, domain: path } => {
            let d = domain(&path)?;
            let expected: Vec<Template> = expected.iter().map(|k| template(k)).collect::<Result<_, _>>()?;
            let r = synthesize(&d.domain, mode.into(), synth.options());
            let mut out = format!("{FORMAT_HEADER}\n");
            for t in &expected {
                if r.contains(t.key()).is_some() {
                    out.push_str(&format!("found {t}\n"));
                    continue;
                }
                out.push_str(&format!("missing {t}\n"));
                if let Some(rej) = r.rejected.iter().find(|x| x.template == *t) {
                    out.push_str(&format!("  rejected: {}\n", rej.reason));
                }
                let mut a = Analysis::new(t, &d.domain);
                a.decide();
                for line in a.describe().iter().chain(a.trace()) {
                    out.push_str(&format!("  {line}\n"));
                }
            }
            for a in &r.accepted {
                if !expected.contains(&a.template) {
                    out.push_str(&format!("unexpected {}\n", a.template));
                }
            }
            Ok((out, 0))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TEMPINV_LOG", "warn")).init();
    // Exit code 2 is reserved for violated templates.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("tempinv: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(Diag(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}
