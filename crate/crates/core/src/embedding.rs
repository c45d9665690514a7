//! Conventional absolute-jump machines lifted to superposition.
//!
//! Three lifts of the same classical step function are provided:
//!
//! * `Naive` applies the step linearly. Jumps from different lines to the
//!   same target collide, so the lifted map is not an isometry and the norm
//!   can drop (even to zero). This mode is a diagnostic, not a machine.
//! * `History` pushes the previous pc onto a per-term history, making the
//!   step injective at the cost of entangling data with the history.
//! * `HistoryCopy` additionally copies every register at step 0 so the
//!   history can be uncomputed from the copies afterwards; the copies remain
//!   entangled with the output.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::corpus;
use crate::isa::{is_ident, ParseError};
use crate::machine::{self, MachineConfig, MachineError};
use crate::qstate::{word_mask, BasisLabel, QuantumState, StateError, TOLERANCE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error("input names unknown register `{0}`")]
    UnknownRegister(String),
    #[error("invalid input: {0}")]
    BadInput(String),
    #[error("machine did not halt within {0} cycles")]
    NotHalted(usize),
    #[error("uncomputation failed on {0}")]
    Uncompute(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddingMode {
    Naive,
    History,
    HistoryCopy,
}

impl EmbeddingMode {
    pub fn name(self) -> &'static str {
        match self {
            EmbeddingMode::Naive => "naive",
            EmbeddingMode::History => "history",
            EmbeddingMode::HistoryCopy => "history-copy",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "naive" => Some(EmbeddingMode::Naive),
            "history" => Some(EmbeddingMode::History),
            "history-copy" | "history_copy" => Some(EmbeddingMode::HistoryCopy),
            _ => None,
        }
    }

    fn keeps_history(self) -> bool {
        self != EmbeddingMode::Naive
    }
}

impl fmt::Display for EmbeddingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassicalInstruction {
    /// `pc := target` if the register is nonzero, else `pc + 1`.
    Jnz { target: usize, reg: usize },
    Jmp { target: usize },
    Add { reg: usize, imm: u64 },
    Nop,
}

/// Program for the conventional machine: absolute jumps, 1-indexed lines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalProgram {
    pub word_size: u32,
    pub registers: Vec<String>,
    pub instructions: Vec<ClassicalInstruction>,
    pub labels: BTreeMap<String, usize>,
}

impl ClassicalProgram {
    pub fn parse(text: &str, word_size: u32) -> Result<Self, ParseError> {
        let mut labels = BTreeMap::new();
        let mut lines: Vec<(usize, String, Vec<String>)> = Vec::new();
        let mut declared: Option<Vec<String>> = None;
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let mut line = line.split(';').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix(".registers") {
                declared = Some(rest.split_whitespace().map(str::to_string).collect());
                continue;
            }
            if let Some(pos) = line.find(':') {
                let head = line[..pos].trim();
                if is_ident(head) {
                    if labels.insert(head.to_string(), lines.len() + 1).is_some() {
                        return Err(ParseError::new(lineno, format!("duplicate label `{head}`")));
                    }
                    line = line[pos + 1..].trim();
                }
            }
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace().map(str::to_string);
            let mnemonic = tokens.next().expect("non-empty");
            lines.push((lineno, mnemonic, tokens.collect()));
        }
        let mut registers = declared.unwrap_or_default();
        let reg = |name: &str, lineno: usize, registers: &mut Vec<String>| -> Result<usize, ParseError> {
            if !is_ident(name) {
                return Err(ParseError::new(lineno, format!("invalid register `{name}`")));
            }
            Ok(match registers.iter().position(|r| r == name) {
                Some(i) => i,
                None => {
                    registers.push(name.to_string());
                    registers.len() - 1
                }
            })
        };
        let target = |name: &str, lineno: usize| -> Result<usize, ParseError> {
            labels
                .get(name)
                .copied()
                .ok_or_else(|| ParseError::new(lineno, format!("undefined label `{name}`")))
        };
        let mask = word_mask(word_size);
        let mut instructions = Vec::with_capacity(lines.len());
        for (lineno, mnemonic, ops) in &lines {
            let lineno = *lineno;
            let arity = |n: usize| {
                if ops.len() == n {
                    Ok(())
                } else {
                    Err(ParseError::new(lineno, format!("`{mnemonic}` expects {n} operand(s)")))
                }
            };
            let instr = match mnemonic.as_str() {
                "jnz" => {
                    arity(2)?;
                    ClassicalInstruction::Jnz {
                        target: target(&ops[0], lineno)?,
                        reg: reg(&ops[1], lineno, &mut registers)?,
                    }
                }
                "jmp" => {
                    arity(1)?;
                    ClassicalInstruction::Jmp {
                        target: target(&ops[0], lineno)?,
                    }
                }
                "add" => {
                    arity(2)?;
                    let imm = ops[1]
                        .strip_prefix('$')
                        .and_then(|d| d.parse::<u64>().ok())
                        .filter(|v| v & !mask == 0)
                        .ok_or_else(|| ParseError::new(lineno, format!("invalid immediate `{}`", ops[1])))?;
                    ClassicalInstruction::Add {
                        reg: reg(&ops[0], lineno, &mut registers)?,
                        imm,
                    }
                }
                "nop" => {
                    arity(0)?;
                    ClassicalInstruction::Nop
                }
                other => return Err(ParseError::new(lineno, format!("unknown mnemonic `{other}`"))),
            };
            instructions.push(instr);
        }
        if instructions.is_empty() {
            return Err(ParseError::new(0, "empty program"));
        }
        Ok(ClassicalProgram {
            word_size,
            registers,
            instructions,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Registers of lifted states in `mode`: the program registers, then one
    /// `<name>_in` copy per register in history-copy mode.
    pub fn state_registers(&self, mode: EmbeddingMode) -> Vec<String> {
        let mut names = self.registers.clone();
        if mode == EmbeddingMode::HistoryCopy {
            names.extend(self.registers.iter().map(|r| format!("{r}_in")));
        }
        names
    }

    /// Next pc and register file for a classical configuration; `None` when
    /// pc does not address a line (the machine has halted).
    fn transition(&self, pc: u64, regs: &mut [u64]) -> Option<u64> {
        let instr = (pc as usize).checked_sub(1).and_then(|i| self.instructions.get(i))?;
        let mask = word_mask(self.word_size);
        Some(match instr {
            ClassicalInstruction::Jnz { target, reg } => {
                if regs[*reg] != 0 {
                    *target as u64
                } else {
                    pc + 1
                }
            }
            ClassicalInstruction::Jmp { target } => *target as u64,
            ClassicalInstruction::Add { reg, imm } => {
                regs[*reg] = (regs[*reg] + imm) & mask;
                pc + 1
            }
            ClassicalInstruction::Nop => pc + 1,
        })
    }
}

/// One classical step on a basis term. Halted terms are left unchanged,
/// except that history modes still record the current pc.
pub fn classical_step(label: &BasisLabel, program: &ClassicalProgram, mode: EmbeddingMode) -> BasisLabel {
    let mut out = label.clone();
    let pc = label.pc.unwrap_or(1);
    let n = program.registers.len();
    if let Some(next) = program.transition(pc, &mut out.regs[..n]) {
        out.pc = Some(next);
    }
    if mode.keeps_history() {
        out.history.get_or_insert_with(Vec::new).insert(0, pc);
    }
    out
}

/// Result of [`run_lifted`].
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedRun {
    pub mode: EmbeddingMode,
    pub state: QuantumState,
    /// Norm before the first step and after every step.
    pub norms: Vec<f64>,
}

impl LiftedRun {
    pub fn final_norm(&self) -> f64 {
        *self.norms.last().expect("at least the initial norm")
    }

    /// Naive runs are diagnostics only; their states need not be normalized.
    pub fn is_physical(&self) -> bool {
        self.mode != EmbeddingMode::Naive
    }
}

/// Lifts `input` into the mode's state space: pc defaults to 1, histories
/// start empty, and history-copy mode snapshots every register.
pub fn lift_input(
    program: &ClassicalProgram,
    mode: EmbeddingMode,
    input: &QuantumState,
) -> Result<QuantumState, EmbeddingError> {
    let k = program.word_size;
    let n = program.registers.len();
    let positions = input
        .registers()
        .iter()
        .map(|name| {
            program
                .registers
                .iter()
                .position(|r| r == name)
                .ok_or_else(|| EmbeddingError::UnknownRegister(name.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if input.word_size() != k {
        return Err(EmbeddingError::BadInput(format!(
            "input word size {} differs from program word size {k}",
            input.word_size()
        )));
    }
    let names = program.state_registers(mode);
    let mut terms = Vec::new();
    for (label, amp) in input.terms() {
        let mut regs = vec![0u64; n];
        for (v, &p) in label.regs.iter().zip(&positions) {
            regs[p] = *v;
        }
        if mode == EmbeddingMode::HistoryCopy {
            regs.extend_from_within(..n);
        }
        let lifted = BasisLabel {
            regs,
            pc: Some(label.pc.unwrap_or(1)),
            br: None,
            instr: None,
            history: mode.keeps_history().then(|| label.history.clone().unwrap_or_default()),
        };
        terms.push((lifted, *amp));
    }
    Ok(QuantumState::from_terms(k, &names, terms)?)
}

/// Applies [`classical_step`] linearly `steps` times, summing amplitudes of
/// colliding labels.
pub fn run_lifted(
    program: &ClassicalProgram,
    mode: EmbeddingMode,
    input: &QuantumState,
    steps: usize,
) -> Result<LiftedRun, EmbeddingError> {
    let mut state = lift_input(program, mode, input)?;
    let mut norms = vec![state.norm()];
    for _ in 0..steps {
        let mut next: BTreeMap<BasisLabel, Complex64> = BTreeMap::new();
        for (label, amp) in state.terms() {
            *next.entry(classical_step(label, program, mode)).or_default() += amp;
        }
        state = QuantumState::from_parts(state.word_size(), state.registers_arc(), next);
        norms.push(state.norm());
    }
    Ok(LiftedRun { mode, state, norms })
}

/// Erases pc and history from a history-copy state by recomputing each
/// term's classical trajectory from its register copies.
pub fn uncompute_history(
    program: &ClassicalProgram,
    state: &QuantumState,
    steps: usize,
) -> Result<QuantumState, EmbeddingError> {
    let n = program.registers.len();
    let mut terms = Vec::new();
    for (label, amp) in state.terms() {
        if label.regs.len() != 2 * n {
            return Err(EmbeddingError::Uncompute("a state without register copies".into()));
        }
        let mut expected = BasisLabel {
            regs: label.regs[n..].to_vec(),
            pc: Some(1),
            history: Some(Vec::new()),
            ..Default::default()
        };
        for _ in 0..steps {
            expected = classical_step(&expected, program, EmbeddingMode::History);
        }
        if expected.pc != label.pc || expected.history != label.history || expected.regs[..] != label.regs[..n] {
            return Err(EmbeddingError::Uncompute(crate::qstate::format_label(state.registers(), label)));
        }
        terms.push((BasisLabel::data(label.regs.clone()), *amp));
    }
    Ok(QuantumState::from_terms(state.word_size(), state.registers(), terms)?)
}

/// Runs the coined walk program with a pc history attached to every term
/// until all terms halt. `i` rounds start from `x = x0` with coin 0.
pub fn walk_with_history(i: u64, x0: u64, word_size: u32) -> Result<QuantumState, EmbeddingError> {
    let program = corpus::hadamard_walk(word_size)?;
    let config = MachineConfig::new(program).with_history();
    let input = QuantumState::basis(
        word_size,
        &["i", "x"],
        BasisLabel::data(vec![i, x0]),
    )?;
    let mut run = machine::init_run(&config, &input)?;
    let limit = 64 * (1usize << word_size);
    while !run.is_halted() {
        if run.cycle() >= limit {
            return Err(EmbeddingError::NotHalted(limit));
        }
        run.step()?;
    }
    Ok(run.into_state())
}

/// Convenience wrapper for callers that already hold labels by name.
pub fn data_state(
    word_size: u32,
    registers: &[&str],
    terms: &[(&[u64], Complex64)],
) -> Result<QuantumState, StateError> {
    QuantumState::from_terms(
        word_size,
        registers,
        terms.iter().map(|(v, a)| (BasisLabel::data(v.to_vec()), *a)),
    )
}

/// Checks that every history-mode norm stayed at 1.
pub fn norms_preserved(run: &LiftedRun) -> bool {
    run.norms.iter().all(|n| (n - 1.0).abs() <= TOLERANCE)
}
