//! Instruction set, assembler and canonical printer.
//!
//! Source is line oriented: `[label:] [mnemonic operand*] [; comment]`, plus
//! the header directives `.registers`, `.in` and `.out`. Labels are resolved
//! in a second pass into signed branch offsets relative to the jumping line.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::qstate::Gate;

pub const MIN_WORD_SIZE: u32 = 2;
pub const MAX_WORD_SIZE: u32 = 16;

/// Names that cannot be used for registers or labels.
pub const RESERVED_NAMES: [&str; 4] = ["pc", "br", "in", "history"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, reason: impl Into<String>) -> Self {
        ParseError {
            line,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("offset {offset} does not fit in a signed {word_size}-bit branch register")]
pub struct OffsetOverflow {
    pub offset: i64,
    pub word_size: u32,
}

/// Index into a program's register file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operand {
    Reg(RegId),
    Imm(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Forward => Direction::Reverse,
            Direction::Reverse => Direction::Forward,
        }
    }

    fn prefix(self) -> &'static str {
        match self {
            Direction::Forward => "",
            Direction::Reverse => "r",
        }
    }
}

/// Branch predicates; all comparisons are unsigned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Predicate {
    Z,
    Nz,
    Eq,
    Ne,
    G,
    Le,
}

impl Predicate {
    pub const ALL: [Predicate; 6] = [
        Predicate::Z,
        Predicate::Nz,
        Predicate::Eq,
        Predicate::Ne,
        Predicate::G,
        Predicate::Le,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Predicate::Z => "z",
            Predicate::Nz => "nz",
            Predicate::Eq => "eq",
            Predicate::Ne => "ne",
            Predicate::G => "g",
            Predicate::Le => "le",
        }
    }

    fn from_name(name: &str) -> Option<Predicate> {
        Predicate::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Number of value operands: one for the zero tests, two otherwise.
    pub fn arity(self) -> usize {
        match self {
            Predicate::Z | Predicate::Nz => 1,
            _ => 2,
        }
    }

    /// Evaluates the predicate; `b` is ignored for unary predicates.
    pub fn holds(self, a: u64, b: u64) -> bool {
        match self {
            Predicate::Z => a == 0,
            Predicate::Nz => a != 0,
            Predicate::Eq => a == b,
            Predicate::Ne => a != b,
            Predicate::G => a > b,
            Predicate::Le => a <= b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Instruction {
    Nop,
    /// Single-bit gate on bit 0 of `reg`; the reverse flavor applies the adjoint.
    Gate {
        gate: Gate,
        reg: RegId,
        dir: Direction,
    },
    Swap(RegId, RegId),
    /// Moves bit `value(index)` of `source` into bit 0 of `target`.
    Get {
        index: Operand,
        target: RegId,
        source: RegId,
        dir: Direction,
    },
    Add {
        dst: RegId,
        src: Operand,
        dir: Direction,
    },
    Mul {
        dst: RegId,
        src: Operand,
        dir: Direction,
    },
    Jump {
        offset: i64,
        dir: Direction,
    },
    Branch {
        pred: Predicate,
        offset: i64,
        lhs: Operand,
        rhs: Option<Operand>,
        dir: Direction,
    },
    JumpIndirect {
        reg: RegId,
        dir: Direction,
    },
}

impl Instruction {
    /// Mnemonic as written in source, e.g. `rjnz` or `jmp*`.
    pub fn mnemonic(&self) -> String {
        match self {
            Instruction::Nop => "nop".into(),
            Instruction::Swap(..) => "swap".into(),
            Instruction::Gate { dir, .. } => format!("{}u", dir.prefix()),
            Instruction::Get { dir, .. } => format!("{}get", dir.prefix()),
            Instruction::Add { dir, .. } => format!("{}add", dir.prefix()),
            Instruction::Mul { dir, .. } => format!("{}mul", dir.prefix()),
            Instruction::Jump { dir, .. } => format!("{}jmp", dir.prefix()),
            Instruction::Branch { pred, dir, .. } => format!("{}j{}", dir.prefix(), pred.name()),
            Instruction::JumpIndirect { dir, .. } => format!("{}jmp*", dir.prefix()),
        }
    }

    pub fn is_jump(&self) -> bool {
        matches!(
            self,
            Instruction::Jump { .. } | Instruction::Branch { .. } | Instruction::JumpIndirect { .. }
        )
    }

    /// Canonical text using the given register names, e.g. `jz +3 r1`.
    pub fn display<'a>(&'a self, registers: &'a [String]) -> InstructionDisplay<'a> {
        InstructionDisplay {
            instr: self,
            registers,
        }
    }
}

pub struct InstructionDisplay<'a> {
    instr: &'a Instruction,
    registers: &'a [String],
}

impl fmt::Display for InstructionDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let reg = |r: &RegId| self.registers[r.0].as_str();
        let op = |o: &Operand| match o {
            Operand::Reg(r) => self.registers[r.0].clone(),
            Operand::Imm(v) => format!("${v}"),
        };
        let m = self.instr.mnemonic();
        match self.instr {
            Instruction::Nop => write!(f, "{m}"),
            Instruction::Gate { gate, reg: r, .. } => write!(f, "{m} {gate} {}", reg(r)),
            Instruction::Swap(a, b) => write!(f, "{m} {} {}", reg(a), reg(b)),
            Instruction::Get {
                index,
                target,
                source,
                ..
            } => write!(f, "{m} {} {} {}", op(index), reg(target), reg(source)),
            Instruction::Add { dst, src, .. } | Instruction::Mul { dst, src, .. } => {
                write!(f, "{m} {} {}", reg(dst), op(src))
            }
            Instruction::Jump { offset, .. } => write!(f, "{m} {offset:+}"),
            Instruction::Branch {
                offset, lhs, rhs, ..
            } => {
                write!(f, "{m} {offset:+} {}", op(lhs))?;
                if let Some(rhs) = rhs {
                    write!(f, " {}", op(rhs))?;
                }
                Ok(())
            }
            Instruction::JumpIndirect { reg: r, .. } => write!(f, "{m} {}", reg(r)),
        }
    }
}

/// The inverse instruction: flips the direction flavor, keeps operands.
/// `nop` and `swap` are their own inverses.
pub fn reverse_of(instr: &Instruction) -> Instruction {
    let mut out = instr.clone();
    match &mut out {
        Instruction::Nop | Instruction::Swap(..) => {}
        Instruction::Gate { dir, .. }
        | Instruction::Get { dir, .. }
        | Instruction::Add { dir, .. }
        | Instruction::Mul { dir, .. }
        | Instruction::Jump { dir, .. }
        | Instruction::Branch { dir, .. }
        | Instruction::JumpIndirect { dir, .. } => *dir = dir.flip(),
    }
    out
}

/// Wraps an integer into the signed `word_size`-bit range.
pub fn wrap_signed(value: i64, word_size: u32) -> i64 {
    let modulus = 1i64 << word_size;
    let half = modulus / 2;
    (value + half).rem_euclid(modulus) - half
}

/// Offset carried by a jump at line `i` whose label sits on line `j`.
///
/// Forward jumps use `j - i - 1`; reverse jumps carry the offset of the
/// matching forward jump from `j` to `i`, i.e. `i - j - 1`, and subtract it.
/// The result is reduced into the signed `word_size`-bit range, which is
/// exact because pc and br arithmetic are both modulo `2^k`.
pub fn resolve_offset(i: usize, j: usize, dir: Direction, word_size: u32) -> Result<i64, OffsetOverflow> {
    let raw = match dir {
        Direction::Forward => j as i64 - i as i64 - 1,
        Direction::Reverse => i as i64 - j as i64 - 1,
    };
    reduce_offset(raw, word_size)
}

fn reduce_offset(raw: i64, word_size: u32) -> Result<i64, OffsetOverflow> {
    if raw.unsigned_abs() >= 1u64 << word_size {
        return Err(OffsetOverflow {
            offset: raw,
            word_size,
        });
    }
    Ok(wrap_signed(raw, word_size))
}

/// An assembled program. Lines are numbered from 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    word_size: u32,
    registers: Vec<String>,
    instructions: Vec<Instruction>,
    labels: BTreeMap<String, usize>,
    z_in: BTreeSet<RegId>,
    z_out: BTreeSet<RegId>,
    identifiers: Vec<Arc<str>>,
}

impl Program {
    /// Validates and assembles a program from already-resolved parts.
    pub fn new(
        word_size: u32,
        registers: Vec<String>,
        instructions: Vec<Instruction>,
        labels: BTreeMap<String, usize>,
        z_in: BTreeSet<RegId>,
        z_out: BTreeSet<RegId>,
    ) -> Result<Program, ParseError> {
        if !(MIN_WORD_SIZE..=MAX_WORD_SIZE).contains(&word_size) {
            return Err(ParseError::new(
                0,
                format!("word size {word_size} outside [{MIN_WORD_SIZE}, {MAX_WORD_SIZE}]"),
            ));
        }
        let len = instructions.len();
        if len < 2 || len as u64 >= 1u64 << word_size {
            return Err(ParseError::new(
                0,
                format!("program length {len} must satisfy 2 <= length < 2^{word_size}"),
            ));
        }
        if registers.is_empty() {
            return Err(ParseError::new(0, "program declares no registers"));
        }
        for (i, name) in registers.iter().enumerate() {
            if registers[..i].contains(name) {
                return Err(ParseError::new(0, format!("duplicate register `{name}`")));
            }
        }
        for (name, &line) in &labels {
            if line == 0 || line > len {
                return Err(ParseError::new(0, format!("label `{name}` points outside the program")));
            }
        }
        let mask = (1u64 << word_size) - 1;
        let n = registers.len();
        let check_reg = |r: &RegId| r.0 < n;
        let check_op = |o: &Operand| match o {
            Operand::Reg(r) => r.0 < n,
            Operand::Imm(v) => v & !mask == 0,
        };
        let half = 1i64 << (word_size - 1);
        for (idx, instr) in instructions.iter().enumerate() {
            let ok = match instr {
                Instruction::Nop => true,
                Instruction::Gate { reg, .. } | Instruction::JumpIndirect { reg, .. } => check_reg(reg),
                Instruction::Swap(a, b) => check_reg(a) && check_reg(b),
                Instruction::Get {
                    index,
                    target,
                    source,
                    ..
                } => check_op(index) && check_reg(target) && check_reg(source),
                Instruction::Add { dst, src, .. } | Instruction::Mul { dst, src, .. } => {
                    check_reg(dst) && check_op(src)
                }
                Instruction::Jump { offset, .. } => (-half..half).contains(offset),
                Instruction::Branch {
                    pred,
                    offset,
                    lhs,
                    rhs,
                    ..
                } => {
                    (-half..half).contains(offset)
                        && check_op(lhs)
                        && rhs.as_ref().is_none_or(check_op)
                        && rhs.is_some() == (pred.arity() == 2)
                }
            };
            if !ok {
                return Err(ParseError::new(0, format!("malformed instruction at program line {}", idx + 1)));
            }
        }
        if z_in.iter().chain(&z_out).any(|r| r.0 >= n) {
            return Err(ParseError::new(0, "zero-set names an unknown register"));
        }
        let identifiers = instructions
            .iter()
            .map(|instr| Arc::from(instr.display(&registers).to_string()))
            .collect();
        Ok(Program {
            word_size,
            registers,
            instructions,
            labels,
            z_in,
            z_out,
            identifiers,
        })
    }

    pub fn word_size(&self) -> u32 {
        self.word_size
    }

    pub fn registers(&self) -> &[String] {
        &self.registers
    }

    pub fn register_id(&self, name: &str) -> Option<RegId> {
        self.registers.iter().position(|r| r == name).map(RegId)
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    /// Number of instructions ℓ.
    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Instruction on 1-indexed `line`.
    pub fn instruction(&self, line: usize) -> Option<&Instruction> {
        line.checked_sub(1).and_then(|i| self.instructions.get(i))
    }

    pub fn labels(&self) -> &BTreeMap<String, usize> {
        &self.labels
    }

    pub fn z_in(&self) -> &BTreeSet<RegId> {
        &self.z_in
    }

    pub fn z_out(&self) -> &BTreeSet<RegId> {
        &self.z_out
    }

    /// Identifier loaded into `in` when line `line` is fetched.
    pub fn identifier(&self, line: usize) -> Option<&Arc<str>> {
        line.checked_sub(1).and_then(|i| self.identifiers.get(i))
    }

    /// Prints the program back to source with numeric offsets. Parsing the
    /// output yields an equal program.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(".registers {}\n", self.registers.join(" ")));
        for (directive, set) in [(".in", &self.z_in), (".out", &self.z_out)] {
            if !set.is_empty() {
                let names: Vec<&str> = set.iter().map(|r| self.registers[r.0].as_str()).collect();
                out.push_str(&format!("{directive} {}\n", names.join(" ")));
            }
        }
        let mut by_line: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
        for (name, &line) in &self.labels {
            by_line.entry(line).or_default().push(name);
        }
        for (idx, ident) in self.identifiers.iter().enumerate() {
            let names = by_line.get(&(idx + 1)).map(Vec::as_slice).unwrap_or(&[]);
            if let Some((last, rest)) = names.split_last() {
                for name in rest {
                    out.push_str(&format!("{name}:\n"));
                }
                out.push_str(&format!("{last}: {ident}\n"));
            } else {
                out.push_str(&format!("    {ident}\n"));
            }
        }
        out
    }

    /// Resolved listing, one `line: instruction` row per line.
    pub fn listing(&self) -> Vec<(usize, String)> {
        self.identifiers
            .iter()
            .enumerate()
            .map(|(i, s)| (i + 1, s.to_string()))
            .collect()
    }
}

/// Canonical identifier of an instruction within `program`. Identical
/// instructions on different lines share an identifier.
pub fn encode_instruction(program: &Program, instr: &Instruction) -> String {
    instr.display(program.registers()).to_string()
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

enum Target {
    Label(String),
    Offset(i64),
}

enum RawOperand {
    Name(String),
    Imm(u64),
}

/// Instruction before register and label resolution.
struct RawLine {
    source_line: usize,
    mnemonic: String,
    operands: Vec<String>,
}

/// Assembles `text` for a machine with `word_size`-bit words.
pub fn parse_program(text: &str, word_size: u32) -> Result<Program, ParseError> {
    if !(MIN_WORD_SIZE..=MAX_WORD_SIZE).contains(&word_size) {
        return Err(ParseError::new(
            0,
            format!("word size {word_size} outside [{MIN_WORD_SIZE}, {MAX_WORD_SIZE}]"),
        ));
    }
    let mut declared: Option<Vec<String>> = None;
    let mut z_in_names: Vec<(usize, String)> = Vec::new();
    let mut z_out_names: Vec<(usize, String)> = Vec::new();
    let mut labels: BTreeMap<String, usize> = BTreeMap::new();
    let mut raw: Vec<RawLine> = Vec::new();
    let mut seen_order: Vec<String> = Vec::new();

    // Pass 1: labels, directives, tokens.
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.split(';').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('.') {
            let mut tokens = rest.split_whitespace();
            let directive = tokens.next().unwrap_or("");
            let names: Vec<String> = tokens.map(str::to_string).collect();
            for name in &names {
                check_register_name(name, lineno)?;
            }
            match directive {
                "registers" => {
                    if declared.is_some() {
                        return Err(ParseError::new(lineno, "duplicate .registers directive"));
                    }
                    if names.is_empty() {
                        return Err(ParseError::new(lineno, ".registers needs at least one name"));
                    }
                    for (i, name) in names.iter().enumerate() {
                        if names[..i].contains(name) {
                            return Err(ParseError::new(lineno, format!("duplicate register `{name}`")));
                        }
                    }
                    declared = Some(names);
                }
                "in" => z_in_names.extend(names.into_iter().map(|n| (lineno, n))),
                "out" => z_out_names.extend(names.into_iter().map(|n| (lineno, n))),
                other => return Err(ParseError::new(lineno, format!("unknown directive `.{other}`"))),
            }
            continue;
        }
        let mut body = line;
        if let Some(pos) = line.find(':') {
            let head = line[..pos].trim();
            if is_ident(head) {
                if RESERVED_NAMES.contains(&head) {
                    return Err(ParseError::new(lineno, format!("`{head}` is reserved")));
                }
                if labels.insert(head.to_string(), raw.len() + 1).is_some() {
                    return Err(ParseError::new(lineno, format!("duplicate label `{head}`")));
                }
                body = line[pos + 1..].trim();
            }
        }
        if body.is_empty() {
            continue;
        }
        let mut tokens = body.split_whitespace().map(str::to_string);
        let mnemonic = tokens.next().expect("non-empty body");
        raw.push(RawLine {
            source_line: lineno,
            mnemonic,
            operands: tokens.collect(),
        });
    }

    let len = raw.len();
    if len < 2 || len as u64 >= 1u64 << word_size {
        let at = raw.last().map_or(0, |r| r.source_line);
        return Err(ParseError::new(
            at,
            format!("program length {len} must satisfy 2 <= length < 2^{word_size}"),
        ));
    }
    if let Some((name, _)) = labels.iter().find(|(_, &line)| line > len) {
        return Err(ParseError::new(0, format!("label `{name}` is not followed by an instruction")));
    }

    // Register discovery by first appearance when undeclared.
    let mut decoded = Vec::with_capacity(len);
    for line in &raw {
        let shape = decode_shape(line)?;
        for name in shape.register_names() {
            check_register_name(name, line.source_line)?;
            if !seen_order.iter().any(|s| s == name) {
                seen_order.push(name.to_string());
            }
        }
        decoded.push(shape);
    }
    let registers = match declared {
        Some(names) => {
            if let Some(missing) = seen_order.iter().find(|n| !names.contains(n)) {
                let at = raw
                    .iter()
                    .zip(&decoded)
                    .find(|(_, s)| s.register_names().any(|n| n == missing))
                    .map_or(0, |(r, _)| r.source_line);
                return Err(ParseError::new(at, format!("undeclared register `{missing}`")));
            }
            names
        }
        None => {
            for (_, name) in z_in_names.iter().chain(&z_out_names) {
                if !seen_order.contains(name) {
                    seen_order.push(name.clone());
                }
            }
            seen_order
        }
    };
    let lookup = |name: &str, lineno: usize| -> Result<RegId, ParseError> {
        registers
            .iter()
            .position(|r| r == name)
            .map(RegId)
            .ok_or_else(|| ParseError::new(lineno, format!("unknown register `{name}`")))
    };
    let zero_set = |names: &[(usize, String)]| -> Result<BTreeSet<RegId>, ParseError> {
        names.iter().map(|(l, n)| lookup(n, *l)).collect()
    };
    let z_in = zero_set(&z_in_names)?;
    let z_out = zero_set(&z_out_names)?;

    // Pass 2: resolve names and labels.
    let mask = (1u64 << word_size) - 1;
    let mut instructions = Vec::with_capacity(len);
    for (idx, (line, shape)) in raw.iter().zip(decoded).enumerate() {
        let lineno = line.source_line;
        let reg = |name: &str| lookup(name, lineno);
        let operand = |o: &RawOperand| -> Result<Operand, ParseError> {
            match o {
                RawOperand::Name(n) => Ok(Operand::Reg(lookup(n, lineno)?)),
                RawOperand::Imm(v) if v & !mask == 0 => Ok(Operand::Imm(*v)),
                RawOperand::Imm(v) => Err(ParseError::new(
                    lineno,
                    format!("immediate ${v} does not fit in {word_size} bits"),
                )),
            }
        };
        let offset = |t: &Target, dir: Direction| -> Result<i64, ParseError> {
            let result = match t {
                Target::Label(name) => {
                    let j = *labels
                        .get(name)
                        .ok_or_else(|| ParseError::new(lineno, format!("undefined label `{name}`")))?;
                    resolve_offset(idx + 1, j, dir, word_size)
                }
                Target::Offset(p) => reduce_offset(*p, word_size),
            };
            result.map_err(|e| ParseError::new(lineno, e.to_string()))
        };
        let instr = match shape {
            Shape::Nop => Instruction::Nop,
            Shape::Gate { gate, reg: r, dir } => Instruction::Gate {
                gate,
                reg: reg(&r)?,
                dir,
            },
            Shape::Swap(a, b) => Instruction::Swap(reg(&a)?, reg(&b)?),
            Shape::Get {
                index,
                target,
                source,
                dir,
            } => {
                let index = operand(&index)?;
                let target = reg(&target)?;
                let source = reg(&source)?;
                if target == source || index == Operand::Reg(target) || index == Operand::Reg(source) {
                    return Err(ParseError::new(lineno, "get operands must be distinct registers"));
                }
                Instruction::Get {
                    index,
                    target,
                    source,
                    dir,
                }
            }
            Shape::Arith { mul, dst, src, dir } => {
                let dst = reg(&dst)?;
                let src = operand(&src)?;
                if mul {
                    Instruction::Mul { dst, src, dir }
                } else {
                    Instruction::Add { dst, src, dir }
                }
            }
            Shape::Jump { target, dir } => Instruction::Jump {
                offset: offset(&target, dir)?,
                dir,
            },
            Shape::Branch {
                pred,
                target,
                lhs,
                rhs,
                dir,
            } => Instruction::Branch {
                pred,
                offset: offset(&target, dir)?,
                lhs: operand(&lhs)?,
                rhs: rhs.as_ref().map(operand).transpose()?,
                dir,
            },
            Shape::JumpIndirect { reg: r, dir } => Instruction::JumpIndirect { reg: reg(&r)?, dir },
        };
        instructions.push(instr);
    }

    Program::new(word_size, registers, instructions, labels, z_in, z_out)
}

fn check_register_name(name: &str, lineno: usize) -> Result<(), ParseError> {
    if !is_ident(name) {
        return Err(ParseError::new(lineno, format!("invalid register name `{name}`")));
    }
    if RESERVED_NAMES.contains(&name) {
        return Err(ParseError::new(lineno, format!("`{name}` is reserved")));
    }
    Ok(())
}

enum Shape {
    Nop,
    Gate {
        gate: Gate,
        reg: String,
        dir: Direction,
    },
    Swap(String, String),
    Get {
        index: RawOperand,
        target: String,
        source: String,
        dir: Direction,
    },
    Arith {
        mul: bool,
        dst: String,
        src: RawOperand,
        dir: Direction,
    },
    Jump {
        target: Target,
        dir: Direction,
    },
    Branch {
        pred: Predicate,
        target: Target,
        lhs: RawOperand,
        rhs: Option<RawOperand>,
        dir: Direction,
    },
    JumpIndirect {
        reg: String,
        dir: Direction,
    },
}

impl Shape {
    fn register_names(&self) -> impl Iterator<Item = &str> {
        fn push_op<'a>(o: &'a RawOperand, names: &mut Vec<&'a str>) {
            if let RawOperand::Name(n) = o {
                names.push(n);
            }
        }
        let mut names: Vec<&str> = Vec::new();
        match self {
            Shape::Nop | Shape::Jump { .. } => {}
            Shape::Gate { reg, .. } | Shape::JumpIndirect { reg, .. } => names.push(reg),
            Shape::Swap(a, b) => {
                names.push(a);
                names.push(b);
            }
            Shape::Get {
                index,
                target,
                source,
                ..
            } => {
                push_op(index, &mut names);
                names.push(target);
                names.push(source);
            }
            Shape::Arith { dst, src, .. } => {
                names.push(dst);
                push_op(src, &mut names);
            }
            Shape::Branch { lhs, rhs, .. } => {
                push_op(lhs, &mut names);
                if let Some(rhs) = rhs {
                    push_op(rhs, &mut names);
                }
            }
        }
        names.into_iter()
    }
}

fn decode_shape(line: &RawLine) -> Result<Shape, ParseError> {
    let lineno = line.source_line;
    let ops = &line.operands;
    let arity = |n: usize| -> Result<(), ParseError> {
        if ops.len() == n {
            Ok(())
        } else {
            Err(ParseError::new(
                lineno,
                format!("`{}` expects {n} operand(s), found {}", line.mnemonic, ops.len()),
            ))
        }
    };
    let name = |s: &str| -> Result<String, ParseError> {
        if is_ident(s) {
            Ok(s.to_string())
        } else {
            Err(ParseError::new(lineno, format!("expected a register, found `{s}`")))
        }
    };
    let value = |s: &str| -> Result<RawOperand, ParseError> {
        if let Some(digits) = s.strip_prefix('$') {
            digits
                .parse::<u64>()
                .map(RawOperand::Imm)
                .map_err(|_| ParseError::new(lineno, format!("invalid immediate `{s}`")))
        } else {
            name(s).map(RawOperand::Name)
        }
    };
    let target = |s: &str| -> Result<Target, ParseError> {
        if is_ident(s) {
            return Ok(Target::Label(s.to_string()));
        }
        let digits = s.strip_prefix('+').unwrap_or(s);
        digits
            .parse::<i64>()
            .map(Target::Offset)
            .map_err(|_| ParseError::new(lineno, format!("invalid jump target `{s}`")))
    };

    let (dir, base) = split_direction(&line.mnemonic);
    let shape = match base {
        "nop" if dir == Direction::Forward => {
            arity(0)?;
            Shape::Nop
        }
        "swap" if dir == Direction::Forward => {
            arity(2)?;
            Shape::Swap(name(&ops[0])?, name(&ops[1])?)
        }
        "u" => {
            arity(2)?;
            let gate = Gate::from_name(&ops[0])
                .ok_or_else(|| ParseError::new(lineno, format!("unknown gate `{}`", ops[0])))?;
            Shape::Gate {
                gate,
                reg: name(&ops[1])?,
                dir,
            }
        }
        "get" => {
            arity(3)?;
            Shape::Get {
                index: value(&ops[0])?,
                target: name(&ops[1])?,
                source: name(&ops[2])?,
                dir,
            }
        }
        "add" | "mul" => {
            arity(2)?;
            Shape::Arith {
                mul: base == "mul",
                dst: name(&ops[0])?,
                src: value(&ops[1])?,
                dir,
            }
        }
        "jmp" => {
            arity(1)?;
            Shape::Jump {
                target: target(&ops[0])?,
                dir,
            }
        }
        "jmp*" => {
            arity(1)?;
            Shape::JumpIndirect {
                reg: name(&ops[0])?,
                dir,
            }
        }
        other => {
            let pred = other
                .strip_prefix('j')
                .and_then(Predicate::from_name)
                .ok_or_else(|| ParseError::new(lineno, format!("unknown mnemonic `{}`", line.mnemonic)))?;
            arity(1 + pred.arity())?;
            Shape::Branch {
                pred,
                target: target(&ops[0])?,
                lhs: value(&ops[1])?,
                rhs: ops.get(2).map(|s| value(s)).transpose()?,
                dir,
            }
        }
    };
    Ok(shape)
}

/// Splits a leading `r` reverse marker. Mnemonics that begin with `r` only
/// through the marker are all listed here, so the split is unambiguous.
fn split_direction(mnemonic: &str) -> (Direction, &str) {
    match mnemonic.strip_prefix('r') {
        Some(rest) if !rest.is_empty() => (Direction::Reverse, rest),
        _ => (Direction::Forward, mnemonic),
    }
}
