mod input;
mod render;

use std::collections::BTreeMap;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qcm_core::analysis::{self, AnalysisError, Criterion, InputDomain};
use qcm_core::embedding::{self, ClassicalProgram, EmbeddingError, EmbeddingMode};
use qcm_core::isa::{parse_program, ParseError, Program};
use qcm_core::machine::{self, MachineConfig, MachineError, MachineRun, Snapshot, TraceMode, Warning};
use qcm_core::oracle::{self, OracleMatrix};
use qcm_core::qstate::{format_label, Field, QuantumState, Separability};
use serde_json::{json, Map, Value};

use render::Kind;

const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_DOMAIN: u8 = 3;
const EXIT_CHECK: u8 = 4;

#[derive(Parser)]
#[command(name = "qcm", version, about = "Simulator, assembler and analysis tools for the quantum control machine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Program source, or `-` for stdin.
    program: String,
    /// Word size in bits.
    #[arg(short = 'k', long = "word-size", default_value_t = 4)]
    k: u32,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct InputArgs {
    /// Basis input such as `x=3,y=0`; unnamed registers are 0.
    #[arg(long, conflicts_with = "input_file")]
    input: Option<String>,
    /// JSON superposition `{"amps": [{"re", "im", "regs": {..}}]}`.
    #[arg(long)]
    input_file: Option<PathBuf>,
}

#[derive(Args)]
struct DomainArgs {
    /// Hold registers constant, e.g. `x=2,max=2`.
    #[arg(long)]
    fix: Vec<String>,
    /// Enumerate a register, e.g. `y=0..2` or `y=1,3`.
    #[arg(long)]
    vary: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Pretty,
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    Terminated,
    Definition,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleName {
    CondInc,
    Expo,
    Majorana,
    Hwalk,
    Cwalk,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Naive,
    History,
    HistoryCopy,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble and print the listing with resolved offsets.
    Asm {
        #[command(flatten)]
        common: Common,
    },
    /// Run for `t` cycles (or until halted) and print the final state.
    Run {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        input: InputArgs,
        #[arg(short = 't')]
        t: Option<usize>,
    },
    /// Print post-fetch snapshots of a run.
    Trace {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        input: InputArgs,
        #[arg(short = 't')]
        t: Option<usize>,
        /// Keep only snapshots where every term has br = 1.
        #[arg(long)]
        br1_only: bool,
    },
    /// Print the exact outcome distribution of the final state.
    Measure {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        input: InputArgs,
        #[arg(short = 't')]
        t: Option<usize>,
        /// Comma-separated registers to measure; all by default.
        #[arg(long)]
        registers: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check synchronization over an input domain.
    Sync {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(short = 't', required_unless_present = "scan", conflicts_with = "scan")]
        t: Option<usize>,
        /// List every synchronized t up to this bound.
        #[arg(long)]
        scan: Option<usize>,
        #[arg(long, value_enum, default_value_t = CriterionArg::Terminated)]
        criterion: CriterionArg,
    },
    /// Compare a program against a reference oracle.
    Compare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long, value_enum)]
        oracle: OracleName,
        /// Termination time; found by scanning when omitted.
        #[arg(short = 't')]
        t: Option<usize>,
        /// Loop bound for the exponentiation oracle.
        #[arg(long)]
        max: Option<u64>,
        /// Attach a pc history to every term (random-walk comparison).
        #[arg(long)]
        history: bool,
        #[arg(long, default_value_t = 200)]
        scan_limit: usize,
    },
    /// Run a classical program under a lifted embedding.
    Embed {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Number of steps.
        #[arg(short = 't')]
        t: usize,
    },
}

fn read_source(path: &str) -> Result<String> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text).context("cannot read stdin")?;
        return Ok(text);
    }
    std::fs::read_to_string(path).with_context(|| format!("cannot read `{path}`"))
}

fn load_program(common: &Common) -> Result<Program> {
    Ok(parse_program(&read_source(&common.program)?, common.k)?)
}

fn load_input(args: &InputArgs, word_size: u32, registers: &[String]) -> Result<QuantumState> {
    match (&args.input, &args.input_file) {
        (Some(text), None) => input::inline_state(word_size, registers, text),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read `{}`", path.display()))?;
            let (state, off) = input::file_state(word_size, registers, &text)?;
            if let Some(norm) = off {
                eprintln!("warning: input norm {norm} renormalized to 1");
            }
            Ok(state)
        }
        (None, None) => input::inline_state(word_size, registers, ""),
        (Some(_), Some(_)) => bail!("give either --input or --input-file"),
    }
}

fn emit(kind: Kind, value: &Value, format: Format) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(value).expect("json")),
        Format::Pretty => println!("{}", render::pretty(kind, value, render::color_enabled())),
    }
}

fn report_warnings(run: &MachineRun) {
    for w in run.warnings() {
        match w {
            Warning::BranchRegisterZero { cycle, terms } => {
                eprintln!("warning: cycle {cycle}: {terms} term(s) have br = 0 and repeat their line")
            }
        }
    }
}

fn execute(config: &MachineConfig, input: &QuantumState, t: Option<usize>) -> Result<MachineRun> {
    let mut run = machine::init_run(config, input)?;
    match t {
        Some(t) => run.run_for(t)?,
        None => {
            let limit = 64usize << config.word_size();
            while !run.is_halted() {
                if run.cycle() >= limit {
                    bail!("machine did not halt within {limit} cycles; pass -t");
                }
                run.step()?;
            }
        }
    }
    report_warnings(&run);
    Ok(run)
}

fn cmd_asm(common: &Common) -> Result<u8> {
    let program = load_program(common)?;
    let mut by_line: BTreeMap<usize, &str> = BTreeMap::new();
    for (name, line) in program.labels() {
        by_line.entry(*line).or_insert(name);
    }
    let lines: Vec<Value> = program
        .listing()
        .into_iter()
        .map(|(line, text)| {
            let mut entry = Map::new();
            entry.insert("line".into(), line.into());
            if let Some(label) = by_line.get(&line) {
                entry.insert("label".into(), (*label).into());
            }
            entry.insert("text".into(), text.into());
            Value::Object(entry)
        })
        .collect();
    let names = |ids: &std::collections::BTreeSet<qcm_core::isa::RegId>| -> Vec<String> {
        ids.iter().map(|id| program.registers()[id.0].clone()).collect()
    };
    let value = json!({
        "word_size": program.word_size(),
        "registers": program.registers(),
        "in": names(program.z_in()),
        "out": names(program.z_out()),
        "lines": lines,
    });
    emit(Kind::Asm, &value, common.format);
    Ok(0)
}

fn cmd_run(common: &Common, input: &InputArgs, t: Option<usize>) -> Result<u8> {
    let program = load_program(common)?;
    let state = load_input(input, program.word_size(), program.registers())?;
    let run = execute(&MachineConfig::new(program), &state, t)?;
    let mut value = Snapshot {
        cycle: run.cycle(),
        state: run.state().clone(),
    }
    .to_json();
    value
        .as_object_mut()
        .expect("object")
        .insert("halted".into(), run.is_halted().into());
    emit(Kind::Run, &value, common.format);
    Ok(0)
}

fn cmd_trace(common: &Common, input: &InputArgs, t: Option<usize>, br1_only: bool) -> Result<u8> {
    let program = load_program(common)?;
    let state = load_input(input, program.word_size(), program.registers())?;
    let mode = if br1_only { TraceMode::Br1Only } else { TraceMode::EveryCycle };
    let run = execute(&MachineConfig::new(program).with_trace(mode), &state, t)?;
    let snapshots: Vec<Value> = run.trace()?.iter().map(Snapshot::to_json).collect();
    emit(Kind::Trace, &json!({ "snapshots": snapshots }), common.format);
    Ok(0)
}

fn outcome_key(values: &[u64]) -> String {
    values.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

fn cmd_measure(
    common: &Common,
    input: &InputArgs,
    t: Option<usize>,
    registers: Option<&str>,
    samples: Option<usize>,
    seed: u64,
) -> Result<u8> {
    let program = load_program(common)?;
    let state = load_input(input, program.word_size(), program.registers())?;
    let run = execute(&MachineConfig::new(program.clone()), &state, t)?;
    let names: Vec<String> = match registers {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
        None => program.registers().to_vec(),
    };
    let dist = run.state().measure_distribution(&names)?;
    let dist: Map<String, Value> = dist.iter().map(|(k, p)| (outcome_key(k), json!(p))).collect();
    let value = match samples {
        None => Value::Object(dist),
        Some(n) => {
            let drawn: Vec<String> = run.state().sample(&names, n, seed)?.iter().map(|v| outcome_key(v)).collect();
            json!({ "registers": names, "distribution": dist, "seed": seed, "samples": drawn })
        }
    };
    emit(Kind::Measure, &value, common.format);
    Ok(0)
}

fn domain_or_full(program: &Program, args: &DomainArgs) -> Result<InputDomain> {
    Ok(input::build_domain(&args.fix, &args.vary)?.unwrap_or_else(|| InputDomain::full(program)))
}

fn cmd_sync(
    common: &Common,
    domain_args: &DomainArgs,
    t: Option<usize>,
    scan: Option<usize>,
    criterion: CriterionArg,
) -> Result<u8> {
    let program = load_program(common)?;
    let domain = domain_or_full(&program, domain_args)?;
    let criterion = match criterion {
        CriterionArg::Terminated => Criterion::Terminated,
        CriterionArg::Definition => Criterion::Definition,
    };
    if let Some(t_max) = scan {
        let times = analysis::find_sync_times_with(&program, &domain, t_max, criterion)?;
        let found = !times.is_empty();
        emit(Kind::Scan, &json!({ "t_max": t_max, "times": times }), common.format);
        return Ok(if found { 0 } else { EXIT_CHECK });
    }
    let t = t.ok_or_else(|| anyhow!("pass -t or --scan"))?;
    let report = analysis::check_synchronized_with(&program, &domain, t, criterion)?;
    emit(Kind::Sync, &report.to_json(), common.format);
    if report.is_synchronized() {
        return Ok(0);
    }
    if let Some(reason) = report.reason {
        eprintln!("not synchronized over {} inputs: {reason:?}", report.inputs);
    }
    Ok(EXIT_CHECK)
}

fn required(fix: &[String], name: &str, oracle: &str) -> Result<u64> {
    input::fixed_value(fix, name)?.ok_or_else(|| anyhow!("the {oracle} oracle needs --fix {name}=<value>"))
}

fn oracle_matrix(which: OracleName, k: u32, domain: &DomainArgs, max: Option<u64>) -> Result<OracleMatrix> {
    Ok(match which {
        OracleName::CondInc => oracle::conditional_increment(k),
        OracleName::Expo => {
            let max = match max {
                Some(m) => m,
                None => required(&domain.fix, "max", "expo")?,
            };
            oracle::exponentiation_map(k, max)?
        }
        OracleName::Majorana => oracle::majorana_unitary(k, required(&domain.fix, "i", "majorana")? as u32)?,
        OracleName::Hwalk => oracle::hadamard_walk_map(k, required(&domain.fix, "i", "hwalk")? as u32),
        OracleName::Cwalk => unreachable!("distribution oracle"),
    })
}

fn cmd_compare_walk(common: &Common, domain: &DomainArgs, history: bool, t: Option<usize>) -> Result<u8> {
    let program = load_program(common)?;
    let i = required(&domain.fix, "i", "cwalk")?;
    let x0 = required(&domain.fix, "x", "cwalk")?;
    let state = input::inline_state(program.word_size(), program.registers(), &domain.fix.join(","))?;
    let mut config = MachineConfig::new(program);
    if history {
        config = config.with_history();
    }
    let run = execute(&config, &state, t)?;
    let measured = run.state().measure_distribution(&["x"])?;
    let reference = oracle::classical_walk_reference(i as u32, x0 as i64)?;
    let mut deviation: f64 = 0.0;
    let mut keys: std::collections::BTreeSet<i64> = reference.keys().copied().collect();
    keys.extend(measured.keys().map(|v| v[0] as i64));
    for x in keys {
        let got = measured.get(&vec![x as u64]).copied().unwrap_or(0.0);
        deviation = deviation.max((got - reference.get(&x).copied().unwrap_or(0.0)).abs());
    }
    let matches = deviation <= qcm_core::qstate::TOLERANCE;
    let value = json!({
        "oracle": "cwalk",
        "description": format!("classical random walk, {i} steps from x={x0}"),
        "t": run.cycle(),
        "match": matches,
        "max_deviation": deviation,
        "distribution": measured.iter().map(|(k, p)| (outcome_key(k), json!(p))).collect::<Map<_, _>>(),
        "reference": reference.iter().map(|(k, p)| (k.to_string(), json!(p))).collect::<Map<_, _>>(),
    });
    emit(Kind::Compare, &value, common.format);
    Ok(if matches { 0 } else { EXIT_CHECK })
}

#[allow(clippy::too_many_arguments)]
fn cmd_compare(
    common: &Common,
    domain_args: &DomainArgs,
    which: OracleName,
    t: Option<usize>,
    max: Option<u64>,
    history: bool,
    scan_limit: usize,
) -> Result<u8> {
    if let OracleName::Cwalk = which {
        return cmd_compare_walk(common, domain_args, history, t);
    }
    let program = load_program(common)?;
    let domain = domain_or_full(&program, domain_args)?;
    let reference = oracle_matrix(which, program.word_size(), domain_args, max)?;
    let t = match t {
        Some(t) => t,
        None => match analysis::first_sync_time(&program, &domain, scan_limit)? {
            Some(t) => t,
            None => {
                eprintln!("program never synchronizes on this domain for t <= {scan_limit}");
                return Ok(EXIT_CHECK);
            }
        },
    };
    let map = analysis::induced_data_map(&program, &domain, t)?;
    let cmp = analysis::compare_with_oracle(&map, &reference, qcm_core::qstate::TOLERANCE)?;
    let value = json!({
        "oracle": reference_name(which),
        "description": reference.description,
        "t": t,
        "match": cmp.matches,
        "max_deviation": cmp.max_deviation,
        "phase": cmp.phase.map(|p| vec![p.re, p.im]),
        "compared": cmp.compared,
    });
    emit(Kind::Compare, &value, common.format);
    Ok(if cmp.matches { 0 } else { EXIT_CHECK })
}

fn reference_name(which: OracleName) -> &'static str {
    match which {
        OracleName::CondInc => "cond-inc",
        OracleName::Expo => "expo",
        OracleName::Majorana => "majorana",
        OracleName::Hwalk => "hwalk",
        OracleName::Cwalk => "cwalk",
    }
}

fn verdict_json(state: &QuantumState, control: &[Field]) -> Result<Value> {
    if state.norm() <= qcm_core::qstate::PRUNE_THRESHOLD {
        return Ok(Value::Null);
    }
    let state = state.normalized()?;
    let names: Vec<String> = control
        .iter()
        .filter_map(|f| match f {
            Field::Register(name) => Some(name.clone()),
            _ => None,
        })
        .collect();
    Ok(match state.separability_verdict(control)? {
        Separability::Separable { control } => json!({
            "verdict": "separable",
            "control": format_label(&names, &control),
        }),
        Separability::Entangled(w) => json!({
            "verdict": "entangled",
            "proportional": w.proportional,
            "controls": w.controls.iter().map(|c| format_label(&names, c)).collect::<Vec<_>>(),
        }),
    })
}

fn cmd_embed(common: &Common, input_args: &InputArgs, mode: ModeArg, steps: usize) -> Result<u8> {
    let program = ClassicalProgram::parse(&read_source(&common.program)?, common.k)?;
    let mode = match mode {
        ModeArg::Naive => EmbeddingMode::Naive,
        ModeArg::History => EmbeddingMode::History,
        ModeArg::HistoryCopy => EmbeddingMode::HistoryCopy,
    };
    let state = load_input(input_args, common.k, &program.registers)?;
    let run = embedding::run_lifted(&program, mode, &state, steps)?;
    let control = match mode {
        EmbeddingMode::Naive => vec![Field::Pc],
        _ => vec![Field::Pc, Field::History],
    };
    let mut value = json!({
        "mode": mode.name(),
        "steps": steps,
        "norms": run.norms,
        "final_norm": run.final_norm(),
        "state": run.state.to_json(),
        "verdict": verdict_json(&run.state, &control)?,
    });
    if mode == EmbeddingMode::HistoryCopy {
        let residual = embedding::uncompute_history(&program, &run.state, steps)?;
        let copies: Vec<Field> = program
            .registers
            .iter()
            .map(|r| Field::Register(format!("{r}_in")))
            .collect();
        let obj = value.as_object_mut().expect("object");
        obj.insert("residual_verdict".into(), verdict_json(&residual, &copies)?);
        obj.insert("residual".into(), serde_json::to_value(residual.to_json())?);
    }
    if !run.is_physical() {
        eprintln!("note: naive lifting is not unitary; norms are diagnostic only");
    }
    emit(Kind::Embed, &value, common.format);
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<u8> {
    match &cli.command {
        Command::Asm { common } => cmd_asm(common),
        Command::Run { common, input, t } => cmd_run(common, input, *t),
        Command::Trace {
            common,
            input,
            t,
            br1_only,
        } => cmd_trace(common, input, *t, *br1_only),
        Command::Measure {
            common,
            input,
            t,
            registers,
            samples,
            seed,
        } => cmd_measure(common, input, *t, registers.as_deref(), *samples, *seed),
        Command::Sync {
            common,
            domain,
            t,
            scan,
            criterion,
        } => cmd_sync(common, domain, *t, *scan, *criterion),
        Command::Compare {
            common,
            domain,
            oracle,
            t,
            max,
            history,
            scan_limit,
        } => cmd_compare(common, domain, *oracle, *t, *max, *history, *scan_limit),
        Command::Embed {
            common,
            input,
            mode,
            t,
        } => cmd_embed(common, input, *mode, *t),
    }
}

fn is_domain_violation(e: &MachineError) -> bool {
    matches!(e, MachineError::DomainViolation { .. })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<ParseError>().is_some() {
            return EXIT_PARSE;
        }
        if let Some(e) = cause.downcast_ref::<MachineError>() {
            if is_domain_violation(e) {
                return EXIT_DOMAIN;
            }
        }
        match cause.downcast_ref::<AnalysisError>() {
            Some(AnalysisError::Machine(e)) if is_domain_violation(e) => return EXIT_DOMAIN,
            Some(AnalysisError::NotCertified(_)) => return EXIT_CHECK,
            _ => {}
        }
        match cause.downcast_ref::<EmbeddingError>() {
            Some(EmbeddingError::Parse(_)) => return EXIT_PARSE,
            Some(EmbeddingError::Machine(e)) if is_domain_violation(e) => return EXIT_DOMAIN,
            _ => {}
        }
    }
    EXIT_USAGE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
