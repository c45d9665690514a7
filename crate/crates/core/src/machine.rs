//! The quantum control machine: fetch, execute and retire over superposed
//! machine states.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use smallvec::{smallvec, SmallVec};
use thiserror::Error;

use crate::isa::{wrap_signed, Direction, Instruction, Operand, Program, RegId};
use crate::qstate::{format_label, single_bit_images, BasisLabel, QuantumState, StateError, TOLERANCE};

/// Images of one basis term with their amplitude factors.
pub type Images = SmallVec<[(BasisLabel, Complex64); 2]>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TraceMode {
    #[default]
    Off,
    EveryCycle,
    /// Keep only snapshots in which every term has `br = 1`.
    Br1Only,
}

/// Why a partial instruction could not be applied to a basis term.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum Violation {
    #[error("get target register is not zero")]
    GetTargetNonzero,
    #[error("bit index {index} is not below the word size")]
    BitIndexOutOfRange { index: u64 },
    #[error("rget source value {value} is not a single bit")]
    RgetSourceNotBit { value: u64 },
    #[error("rget destination bit {index} is already set")]
    RgetBitOccupied { index: u64 },
    #[error("doubling {value} overflows")]
    DoublingOverflow { value: u64 },
    #[error("halving odd value {value}")]
    HalvingOdd { value: u64 },
    #[error("multiplication by zero")]
    MulByZero,
    #[error("product {lhs} * {rhs} overflows")]
    MulOverflow { lhs: u64, rhs: u64 },
    #[error("{divisor} does not divide {value}")]
    NotDivisible { value: u64, divisor: u64 },
    #[error("{value} is not a perfect square")]
    NotPerfectSquare { value: u64 },
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum MachineError {
    #[error("domain violation at cycle {cycle}, line {line} ({instruction}) on {term}: {violation}")]
    DomainViolation {
        cycle: usize,
        line: usize,
        instruction: String,
        term: String,
        label: BasisLabel,
        violation: Violation,
    },
    #[error("input register `{0}` must be zero in every term")]
    InputNotZeroed(String),
    #[error("input is not normalized (norm {norm})")]
    UnnormalizedInput { norm: f64 },
    #[error("input names unknown register `{0}`")]
    UnknownRegister(String),
    #[error("input word size {input} does not match program word size {program}")]
    WordSizeMismatch { input: u32, program: u32 },
    #[error("input terms must not carry control fields")]
    ControlInInput,
    #[error("run was not traced")]
    TraceUnavailable,
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Clone, Debug)]
pub struct MachineConfig {
    pub program: Arc<Program>,
    pub trace_mode: TraceMode,
    /// Push the fetched pc onto a per-term history every cycle.
    pub record_history: bool,
}

impl MachineConfig {
    pub fn new(program: Program) -> Self {
        MachineConfig {
            program: Arc::new(program),
            trace_mode: TraceMode::Off,
            record_history: false,
        }
    }

    pub fn with_trace(mut self, mode: TraceMode) -> Self {
        self.trace_mode = mode;
        self
    }

    pub fn with_history(mut self) -> Self {
        self.record_history = true;
        self
    }

    pub fn word_size(&self) -> u32 {
        self.program.word_size()
    }
}

/// Post-fetch state of one cycle; cycle 0 is the initial state.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub cycle: usize,
    pub state: QuantumState,
}

impl Snapshot {
    /// `{"cycle": t, "word_size": k, "terms": [...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut value = serde_json::to_value(self.state.to_json()).expect("state serializes");
        let map = value.as_object_mut().expect("object");
        let mut out = serde_json::Map::new();
        out.insert("cycle".into(), self.cycle.into());
        out.append(map);
        serde_json::Value::Object(out)
    }
}

/// Non-fatal diagnostics collected during a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Warning {
    /// Some terms have `br = 0` and will re-execute the same line.
    BranchRegisterZero { cycle: usize, terms: usize },
}

#[derive(Clone, Debug)]
pub struct MachineRun {
    config: MachineConfig,
    state: QuantumState,
    cycle: usize,
    trace: Option<Vec<Snapshot>>,
    warnings: Vec<Warning>,
}

impl MachineRun {
    pub fn state(&self) -> &QuantumState {
        &self.state
    }

    pub fn into_state(self) -> QuantumState {
        self.state
    }

    pub fn cycle(&self) -> usize {
        self.cycle
    }

    pub fn config(&self) -> &MachineConfig {
        &self.config
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn trace(&self) -> Result<&[Snapshot], MachineError> {
        self.trace.as_deref().ok_or(MachineError::TraceUnavailable)
    }

    /// Advances one fetch/execute/retire cycle.
    pub fn step(&mut self) -> Result<(), MachineError> {
        let program = &self.config.program;
        let k = program.word_size();
        let cycle = self.cycle + 1;
        let registers = self.state.registers_arc();

        let fetched: Vec<(BasisLabel, Complex64)> = self
            .state
            .terms()
            .map(|(label, amp)| (fetch(program, label, self.config.record_history), *amp))
            .collect();
        if let Some(trace) = &mut self.trace {
            let keep = match self.config.trace_mode {
                TraceMode::Br1Only => fetched.iter().all(|(l, _)| l.br == Some(1)),
                _ => true,
            };
            if keep {
                let state = QuantumState::from_parts(k, registers.clone(), fetched.iter().cloned().collect());
                trace.push(Snapshot { cycle, state });
            }
        }

        let mut next: BTreeMap<BasisLabel, Complex64> = BTreeMap::new();
        for (label, amp) in fetched {
            let line = label.pc.expect("machine term has pc") as usize;
            let images = match label.instr.is_some().then(|| program.instruction(line)).flatten() {
                Some(instr) => execute_semantics(&label, instr, k).map_err(|violation| {
                    MachineError::DomainViolation {
                        cycle,
                        line,
                        instruction: program.identifier(line).map(|s| s.to_string()).unwrap_or_default(),
                        term: format_label(&registers, &label),
                        label: label.clone(),
                        violation,
                    }
                })?,
                None => smallvec![(label, Complex64::new(1.0, 0.0))],
            };
            for (mut out, factor) in images {
                out.instr = None;
                *next.entry(out).or_default() += amp * factor;
            }
        }
        self.state = QuantumState::from_parts(k, registers, next);
        self.cycle = cycle;

        let stuck = self.state.terms().filter(|(l, _)| l.br == Some(0)).count();
        let was_stuck = matches!(self.warnings.last(), Some(Warning::BranchRegisterZero { cycle: c, .. }) if *c + 1 == cycle);
        if stuck > 0 {
            if was_stuck {
                if let Some(Warning::BranchRegisterZero { cycle: c, terms }) = self.warnings.last_mut() {
                    *c = cycle;
                    *terms = stuck;
                }
            } else {
                self.warnings.push(Warning::BranchRegisterZero { cycle, terms: stuck });
            }
        }
        Ok(())
    }

    pub fn run_for(&mut self, cycles: usize) -> Result<(), MachineError> {
        for _ in 0..cycles {
            self.step()?;
        }
        Ok(())
    }

    /// True when every term has executed the last line and sits at `br = 1`.
    pub fn is_halted(&self) -> bool {
        is_halted(&self.config.program, &self.state)
    }
}

pub(crate) fn is_halted(program: &Program, state: &QuantumState) -> bool {
    let len = program.len() as u64;
    state
        .terms()
        .all(|(l, _)| l.br == Some(1) && l.pc.is_some_and(|pc| pc >= len))
}

/// Lifts a data-register input to `|pc:0, br:1, in:0⟩ ⊗ input`.
///
/// The input may name any subset of the program's registers, in any order;
/// unnamed registers start at 0.
pub fn init_run(config: &MachineConfig, input: &QuantumState) -> Result<MachineRun, MachineError> {
    let program = &config.program;
    let k = program.word_size();
    if input.word_size() != k {
        return Err(MachineError::WordSizeMismatch {
            input: input.word_size(),
            program: k,
        });
    }
    let norm = input.norm();
    if (norm - 1.0).abs() > TOLERANCE {
        return Err(MachineError::UnnormalizedInput { norm });
    }
    let positions = input
        .registers()
        .iter()
        .map(|name| {
            program
                .register_id(name)
                .map(|r| r.0)
                .ok_or_else(|| MachineError::UnknownRegister(name.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n = program.registers().len();
    let mut terms = BTreeMap::new();
    for (label, amp) in input.terms() {
        if label.pc.is_some() || label.br.is_some() || label.instr.is_some() || label.history.is_some() {
            return Err(MachineError::ControlInInput);
        }
        let mut regs = vec![0u64; n];
        for (value, &pos) in label.regs.iter().zip(&positions) {
            regs[pos] = *value;
        }
        if let Some(r) = program.z_in().iter().find(|r| regs[r.0] != 0) {
            return Err(MachineError::InputNotZeroed(program.registers()[r.0].clone()));
        }
        let machine_label = BasisLabel {
            regs,
            pc: Some(0),
            br: Some(1),
            instr: None,
            history: config.record_history.then(Vec::new),
        };
        terms.insert(machine_label, *amp);
    }
    let registers: Arc<[String]> = program.registers().to_vec().into();
    let state = QuantumState::from_parts(k, registers, terms);
    let trace = match config.trace_mode {
        TraceMode::Off => None,
        _ => Some(vec![Snapshot {
            cycle: 0,
            state: state.clone(),
        }]),
    };
    Ok(MachineRun {
        config: config.clone(),
        state,
        cycle: 0,
        trace,
        warnings: Vec::new(),
    })
}

/// Pure form of [`MachineRun::step`].
pub fn step_cycle(run: &MachineRun) -> Result<MachineRun, MachineError> {
    let mut next = run.clone();
    next.step()?;
    Ok(next)
}

/// Runs `cycles` cycles from the lifted input.
pub fn run(config: &MachineConfig, input: &QuantumState, cycles: usize) -> Result<MachineRun, MachineError> {
    let mut run = init_run(config, input)?;
    run.run_for(cycles)?;
    Ok(run)
}

/// Fetch stage: `pc := pc + br`, then load the instruction identifier when
/// the new pc addresses a line.
pub fn fetch(program: &Program, label: &BasisLabel, record_history: bool) -> BasisLabel {
    let modulus = 1i64 << program.word_size();
    let pc = label.pc.unwrap_or(0) as i64;
    let br = label.br.unwrap_or(1);
    let new_pc = (pc + br).rem_euclid(modulus) as u64;
    let mut out = label.clone();
    out.pc = Some(new_pc);
    out.instr = program.identifier(new_pc as usize).cloned();
    if record_history {
        out.history.get_or_insert_with(Vec::new).insert(0, new_pc);
    }
    out
}

/// One full cycle on a single basis term, including fetch and retire.
pub fn cycle_basis(program: &Program, label: &BasisLabel) -> Result<Images, (usize, Violation)> {
    let fetched = fetch(program, label, false);
    let line = fetched.pc.unwrap_or(0) as usize;
    let mut images = match fetched.instr.is_some().then(|| program.instruction(line)).flatten() {
        Some(instr) => execute_semantics(&fetched, instr, program.word_size()).map_err(|v| (line, v))?,
        None => smallvec![(fetched, Complex64::new(1.0, 0.0))],
    };
    for (l, _) in images.iter_mut() {
        l.instr = None;
    }
    Ok(images)
}

fn value(label: &BasisLabel, op: &Operand) -> u64 {
    match op {
        Operand::Reg(RegId(i)) => label.regs[*i],
        Operand::Imm(v) => *v,
    }
}

/// Execute stage for one basis term.
pub fn execute_semantics(label: &BasisLabel, instr: &Instruction, word_size: u32) -> Result<Images, Violation> {
    let mask = crate::qstate::word_mask(word_size);
    let one = Complex64::new(1.0, 0.0);
    let mut out = label.clone();
    let adjust_br = |out: &mut BasisLabel, delta: i64, dir: Direction| {
        let br = out.br.unwrap_or(1);
        let next = match dir {
            Direction::Forward => br + delta,
            Direction::Reverse => br - delta,
        };
        out.br = Some(wrap_signed(next, word_size));
    };
    match instr {
        Instruction::Nop => {}
        Instruction::Gate { gate, reg, dir } => {
            let matrix = match dir {
                Direction::Forward => gate.matrix(),
                Direction::Reverse => gate.adjoint_matrix(),
            };
            return Ok(single_bit_images(label.regs[reg.0], 0, &matrix)
                .into_iter()
                .map(|(v, amp)| {
                    let mut l = label.clone();
                    l.regs[reg.0] = v;
                    (l, amp)
                })
                .collect());
        }
        Instruction::Swap(a, b) => out.regs.swap(a.0, b.0),
        Instruction::Get {
            index,
            target,
            source,
            dir,
        } => {
            let i = value(label, index);
            if i >= word_size as u64 {
                return Err(Violation::BitIndexOutOfRange { index: i });
            }
            let t = label.regs[target.0];
            let s = label.regs[source.0];
            match dir {
                Direction::Forward => {
                    if t != 0 {
                        return Err(Violation::GetTargetNonzero);
                    }
                    out.regs[target.0] = (s >> i) & 1;
                    out.regs[source.0] = s & !(1 << i);
                }
                Direction::Reverse => {
                    if t > 1 {
                        return Err(Violation::RgetSourceNotBit { value: t });
                    }
                    if (s >> i) & 1 != 0 {
                        return Err(Violation::RgetBitOccupied { index: i });
                    }
                    out.regs[source.0] = s | (t << i);
                    out.regs[target.0] = 0;
                }
            }
        }
        Instruction::Add { dst, src, dir } => {
            let a = label.regs[dst.0];
            out.regs[dst.0] = if *src == Operand::Reg(*dst) {
                match dir {
                    Direction::Forward if a >> (word_size - 1) != 0 => {
                        return Err(Violation::DoublingOverflow { value: a })
                    }
                    Direction::Forward => a << 1,
                    Direction::Reverse if a & 1 != 0 => return Err(Violation::HalvingOdd { value: a }),
                    Direction::Reverse => a >> 1,
                }
            } else {
                let b = value(label, src);
                match dir {
                    Direction::Forward => a.wrapping_add(b) & mask,
                    Direction::Reverse => a.wrapping_sub(b) & mask,
                }
            };
        }
        Instruction::Mul { dst, src, dir } => {
            let a = label.regs[dst.0];
            let square = *src == Operand::Reg(*dst);
            let b = value(label, src);
            out.regs[dst.0] = match (dir, square) {
                (Direction::Forward, _) => {
                    if b == 0 && !square {
                        return Err(Violation::MulByZero);
                    }
                    match a.checked_mul(b) {
                        Some(p) if p <= mask => p,
                        _ => return Err(Violation::MulOverflow { lhs: a, rhs: b }),
                    }
                }
                (Direction::Reverse, false) => {
                    if b == 0 {
                        return Err(Violation::MulByZero);
                    }
                    if !a.is_multiple_of(b) {
                        return Err(Violation::NotDivisible { value: a, divisor: b });
                    }
                    a / b
                }
                (Direction::Reverse, true) => {
                    let root = integer_sqrt(a);
                    if root * root != a {
                        return Err(Violation::NotPerfectSquare { value: a });
                    }
                    root
                }
            };
        }
        Instruction::Jump { offset, dir } => adjust_br(&mut out, *offset, *dir),
        Instruction::Branch {
            pred,
            offset,
            lhs,
            rhs,
            dir,
        } => {
            let a = value(label, lhs);
            let b = rhs.as_ref().map_or(0, |r| value(label, r));
            if pred.holds(a, b) {
                adjust_br(&mut out, *offset, *dir);
            }
        }
        Instruction::JumpIndirect { reg, dir } => adjust_br(&mut out, label.regs[reg.0] as i64, *dir),
    }
    Ok(smallvec![(out, one)])
}

fn integer_sqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}
