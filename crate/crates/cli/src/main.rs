use clap::{Args, Parser, Subcommand, ValueEnum};
use dsu_core::analysis::{analyze, Var};
use dsu_core::difftest::{run_campaign, CampaignConfig};
use dsu_core::dsu::{simulate_update, CompatStatus, UpdatePair};
use dsu_core::equiv::{Checker, Verdict};
use dsu_core::interp::{format_trace, run, Outcome};
use dsu_core::lang::{load, parse_program, pretty_program, Checked};
use dsu_core::update_classes::{
    check_config_vars, check_enum_extension, check_exit_on_error, check_missing_init, check_prompt_change,
    check_type_weakening, classify_update, Assumption, Rho, UpdateClassReport,
};
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const OK: u8 = 0;
const REJECTED: u8 = 1;
const INCONCLUSIVE: u8 = 2;
const USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "dsu-check", version, about = "Check programs and their updates for backward compatibility")]
struct Cli {
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a program and print its syntax tree.
    Parse { file: PathBuf },
    /// Typecheck a program and print its variable environment.
    Typecheck { file: PathBuf },
    /// Run a program, printing its I/O trace and a JSON summary.
    Run {
        file: PathBuf,
        #[arg(long)]
        inputs: Option<PathBuf>,
        #[arg(long)]
        fuel: Option<u64>,
    },
    /// Print the variable analyses of a program's statements.
    Analyze { file: PathBuf },
    /// Check two programs with one of the equivalence proof rules.
    CheckEquiv {
        old: PathBuf,
        new: PathBuf,
        #[arg(long, value_enum, default_value = "out")]
        rule: Rule,
        /// Variable for the computation rule.
        #[arg(long)]
        var: Option<String>,
    },
    /// Check whether an update belongs to a backward-compatible class.
    CheckUpdate {
        old: PathBuf,
        new: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        class: Class,
        /// JSON object with values of new configuration variables.
        #[arg(long)]
        rho: Option<PathBuf>,
    },
    /// Update a running old program before one of its outputs and continue with the new one.
    DsuSim {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        inputs: Option<PathBuf>,
        /// Update just before this output of the old run (1-based).
        #[arg(long, default_value_t = 1)]
        at_output: usize,
        #[arg(long)]
        fuel: Option<u64>,
    },
    /// Run both programs on random inputs and compare their traces.
    Difftest {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        fuel: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated assumptions: auto, no-undefined, guard, init, modulo-prompt, weakened, new-labels.
        #[arg(long, value_delimiter = ',')]
        assume: Vec<String>,
    },
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    old: PathBuf,
    #[arg(long)]
    new: PathBuf,
    /// JSON object with values of new configuration variables.
    #[arg(long)]
    rho: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Comp,
    Term,
    Out,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Class {
    Auto,
    Config,
    Enum,
    Weaken,
    Exit,
    Prompt,
    Init,
}

/// A failure reported on stderr with exit code 3.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type CmdResult = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_file(path: &Path) -> Result<Checked, Failure> {
    load(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn read_inputs(path: Option<&Path>) -> Result<Vec<i64>, Failure> {
    let Some(path) = path else { return Ok(vec![]) };
    read(path)?
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<i64>().map_err(|e| Failure(format!("{}: bad input `{t}`: {e}", path.display()))))
        .collect()
}

fn read_rho(path: Option<&Path>) -> Result<Option<Rho>, Failure> {
    path.map(|p| serde_json::from_str(&read(p)?).map_err(|e| Failure(format!("{}: {e}", p.display())))).transpose()
}

fn default_fuel(fuel: Option<u64>) -> u64 {
    fuel.or_else(|| std::env::var("DSU_CHECK_FUEL").ok()?.parse().ok()).unwrap_or(100_000)
}

/// Write to stdout, ignoring a closed pipe.
fn out(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn emit(v: &Value, pretty: bool) {
    if pretty {
        out(&format!("{}\n", serde_json::to_string_pretty(v).expect("json")));
    } else {
        out(&format!("{v}\n"));
    }
}

fn verdict_code(v: &Verdict) -> u8 {
    if v.accepted {
        OK
    } else {
        REJECTED
    }
}

fn cmd_parse(file: &Path, pretty: bool) -> CmdResult {
    let p = parse_program(&read(file)?).map_err(|e| Failure(format!("{}: {e}", file.display())))?;
    if pretty {
        out(&pretty_program(&p));
    } else {
        emit(&serde_json::to_value(&p)?, false);
    }
    Ok(OK)
}

fn cmd_run(file: &Path, inputs: Option<&Path>, fuel: Option<u64>, pretty: bool) -> CmdResult {
    let c = load_file(file)?;
    let r = run(&c, &read_inputs(inputs)?, default_fuel(fuel));
    out(&format_trace(&r.trace));
    emit(&serde_json::to_value(r.summary())?, pretty);
    Ok(if r.outcome == Outcome::FuelExhausted { INCONCLUSIVE } else { OK })
}

fn cmd_check_equiv(old: &Path, new: &Path, rule: Rule, var: Option<&str>, pretty: bool) -> CmdResult {
    let (o, n) = (load_file(old)?, load_file(new)?);
    let mut ck = Checker::new(&o.env, &n.env);
    let (a, b) = (&o.program.entry, &n.program.entry);
    let v = match rule {
        Rule::Comp => {
            let x = var.ok_or_else(|| Failure("--rule comp needs --var".into()))?;
            ck.comp_verdict(a, b, &Var::named(x))
        }
        Rule::Term => ck.term_verdict(a, b),
        Rule::Out => ck.out_verdict(a, b),
    };
    emit(&serde_json::to_value(&v)?, pretty);
    Ok(verdict_code(&v))
}

fn cmd_check_update(old: &Path, new: &Path, class: Class, rho: Option<&Path>, pretty: bool) -> CmdResult {
    let (o, n) = (load_file(old)?, load_file(new)?);
    let rho = read_rho(rho)?;
    let reports: Vec<Value> = match class {
        Class::Auto => classify_update(&o, &n, rho.as_ref()).iter().map(serde_json::to_value).collect::<Result<_, _>>()?,
        Class::Config => {
            let rho = rho.ok_or_else(|| Failure("--class config needs --rho".into()))?;
            vec![serde_json::to_value(check_config_vars(&o, &n, &rho))?]
        }
        Class::Enum => match check_enum_extension(&o, &n) {
            Ok(r) => vec![serde_json::to_value(r)?],
            Err(e) => vec![json!({"class": "enumExtension", "verdict": {"accepted": false, "failureReason": e.to_string()}, "assumptions": []})],
        },
        Class::Weaken => vec![serde_json::to_value(check_type_weakening(&o, &n))?],
        Class::Exit => vec![serde_json::to_value(check_exit_on_error(&o, &n))?],
        Class::Prompt => vec![serde_json::to_value(check_prompt_change(&o, &n))?],
        Class::Init => vec![serde_json::to_value(check_missing_init(&o, &n))?],
    };
    let accepted = reports.iter().any(|r| r["verdict"]["accepted"] == Value::Bool(true));
    emit(&Value::Array(reports), pretty);
    Ok(if accepted { OK } else { REJECTED })
}

fn cmd_dsu_sim(pair: &PairArgs, inputs: Option<&Path>, at: usize, fuel: Option<u64>, pretty: bool) -> CmdResult {
    let (o, n) = (load_file(&pair.old)?, load_file(&pair.new)?);
    let rho = read_rho(pair.rho.as_deref())?;
    let mut up = UpdatePair::new(&o, &n);
    if let Some(r) = &rho {
        up = up.with_rho(r);
    }
    let report = simulate_update(&up, &read_inputs(inputs)?, at, default_fuel(fuel));
    if let Some(h) = &report.hybrid {
        out(&format_trace(&h.combined));
    }
    let verdict = json!({
        "mapped": report.mapped,
        "hybridEqualsPureNew": report.hybrid_equals_pure_new,
        "backwardCompatible": report.backward_compatible,
        "error": report.error,
    });
    emit(&verdict, pretty);
    let code = match (report.backward_compatible, report.hybrid_equals_pure_new) {
        (Some(CompatStatus::Incompatible { .. }), _) | (_, Some(false)) => REJECTED,
        (Some(CompatStatus::Compatible), Some(true)) => OK,
        _ => INCONCLUSIVE,
    };
    Ok(code)
}

fn assumptions_for(names: &[String], o: &Checked, n: &Checked, rho: Option<&Rho>) -> Result<Vec<Assumption>, Failure> {
    let mut out = Vec::new();
    for name in names {
        match name.as_str() {
            "auto" => {
                let reports: Vec<UpdateClassReport> = classify_update(o, n, rho);
                for r in reports {
                    out.extend(r.assumptions);
                }
            }
            "no-undefined" => out.push(Assumption::OldRunReadsNoUndefined),
            "guard" => out.push(Assumption::GuardDoesNotCrash),
            "init" => out.push(Assumption::InitDoesNotCrash),
            "modulo-prompt" => out.push(Assumption::OutputsComparedModuloPrompt),
            "weakened" => {
                let vars = dsu_core::update_classes::weakened_vars(&o.program.vars, &n.program.vars).unwrap_or_default();
                out.push(Assumption::NoOverflowOnWeakened { vars });
            }
            "new-labels" => {
                let labels = dsu_core::update_classes::enum_extension_labels(&o.program.enums, &n.program.enums)?
                    .unwrap_or_default();
                out.push(Assumption::NoInputOfNewLabels { labels });
            }
            other => return Err(Failure(format!("unknown assumption `{other}`"))),
        }
    }
    if let Some(r) = rho {
        out.push(Assumption::ConfigValues { rho: r.clone() });
    }
    Ok(out)
}

fn cmd_difftest(pair: &PairArgs, trials: usize, fuel: Option<u64>, seed: u64, assume: &[String], pretty: bool) -> CmdResult {
    if trials == 0 {
        return Err(Failure("--trials must be at least 1".into()));
    }
    let (o, n) = (load_file(&pair.old)?, load_file(&pair.new)?);
    let rho = read_rho(pair.rho.as_deref())?;
    let assumptions = assumptions_for(assume, &o, &n, rho.as_ref())?;
    let cfg = CampaignConfig { trials, fuel: default_fuel(fuel), seed, assumptions, ..Default::default() };
    let report = run_campaign(&UpdatePair::new(&o, &n), &cfg);
    emit(&serde_json::to_value(&report)?, pretty);
    Ok(report.exit_code() as u8)
}

fn dispatch(cli: Cli) -> CmdResult {
    let pretty = cli.pretty;
    match cli.command {
        Command::Parse { file } => cmd_parse(&file, pretty),
        Command::Typecheck { file } => {
            let c = load_file(&file)?;
            emit(&json!({"wellTyped": true, "env": c.env}), pretty);
            Ok(OK)
        }
        Command::Run { file, inputs, fuel } => cmd_run(&file, inputs.as_deref(), fuel, pretty),
        Command::Analyze { file } => {
            let c = load_file(&file)?;
            emit(&serde_json::to_value(analyze(&c.program.entry, &c.env))?, pretty);
            Ok(OK)
        }
        Command::CheckEquiv { old, new, rule, var } => cmd_check_equiv(&old, &new, rule, var.as_deref(), pretty),
        Command::CheckUpdate { old, new, class, rho } => cmd_check_update(&old, &new, class, rho.as_deref(), pretty),
        Command::DsuSim { pair, inputs, at_output, fuel } => cmd_dsu_sim(&pair, inputs.as_deref(), at_output, fuel, pretty),
        Command::Difftest { pair, trials, fuel, seed, assume } => cmd_difftest(&pair, trials, fuel, seed, &assume, pretty),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
    }
}
