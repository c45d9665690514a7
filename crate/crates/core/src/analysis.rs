//! Synchronization checking, sync-time scanning, induced data maps and
//! oracle comparison.
//!
//! All checks run the machine on an explicitly enumerated set of basis
//! inputs, so a certificate covers exactly that set and nothing more.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::isa::Program;
use crate::machine::{self, MachineConfig, MachineError, MachineRun};
use crate::oracle::{column_gram_deviation, OracleMatrix};
use crate::qstate::{BasisLabel, QuantumState, Separability, StateError, PRUNE_THRESHOLD};

pub const DEFAULT_DOMAIN_CAP: usize = 4096;
pub const MAX_SCAN_CYCLES: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("domain has {size} inputs, more than the cap of {cap}")]
    DomainTooLarge { size: usize, cap: usize },
    #[error("domain is empty")]
    EmptyDomain,
    #[error("domain names unknown register `{0}`")]
    UnknownRegister(String),
    #[error("register `{0}` is assumed zero on input")]
    InputNotZeroed(String),
    #[error("value {value} of `{register}` does not fit in the word")]
    ValueOutOfRange { register: String, value: u64 },
    #[error("scan limit {0} exceeds {MAX_SCAN_CYCLES} cycles")]
    ScanTooLong(usize),
    #[error("program is not synchronized on this domain at t = {0}")]
    NotCertified(usize),
    #[error("map has {rows} output labels but {cols} inputs")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Finite set of basis inputs: the cartesian product of the free registers'
/// value lists, with fixed registers held constant and every other register 0.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InputDomain {
    pub free: Vec<(String, Vec<u64>)>,
    pub fixed: BTreeMap<String, u64>,
    pub cap: usize,
}

impl InputDomain {
    pub fn new() -> Self {
        InputDomain {
            cap: DEFAULT_DOMAIN_CAP,
            ..Default::default()
        }
    }

    pub fn vary(mut self, register: &str, values: impl IntoIterator<Item = u64>) -> Self {
        self.free.push((register.to_string(), values.into_iter().collect()));
        self
    }

    pub fn fix(mut self, register: &str, value: u64) -> Self {
        self.fixed.insert(register.to_string(), value);
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    /// Every free register of `program` ranging over all word values.
    pub fn full(program: &Program) -> Self {
        let top = (1u64 << program.word_size()) - 1;
        let mut domain = InputDomain::new();
        for (i, name) in program.registers().iter().enumerate() {
            if !program.z_in().contains(&crate::isa::RegId(i)) {
                domain = domain.vary(name, 0..=top);
            }
        }
        domain
    }

    /// Register vectors in program order, sorted and deduplicated.
    pub fn enumerate(&self, program: &Program) -> Result<Vec<Vec<u64>>, AnalysisError> {
        let n = program.registers().len();
        let top = (1u64 << program.word_size()) - 1;
        let index = |name: &str| {
            program
                .register_id(name)
                .map(|r| r.0)
                .ok_or_else(|| AnalysisError::UnknownRegister(name.to_string()))
        };
        let check = |name: &str, value: u64| -> Result<(), AnalysisError> {
            let id = index(name)?;
            if value > top {
                return Err(AnalysisError::ValueOutOfRange {
                    register: name.to_string(),
                    value,
                });
            }
            if value != 0 && program.z_in().contains(&crate::isa::RegId(id)) {
                return Err(AnalysisError::InputNotZeroed(name.to_string()));
            }
            Ok(())
        };
        let mut base = vec![0u64; n];
        for (name, &value) in &self.fixed {
            check(name, value)?;
            base[index(name)?] = value;
        }
        let mut size: usize = 1;
        for (name, values) in &self.free {
            for &v in values {
                check(name, v)?;
            }
            size = size.saturating_mul(values.len());
        }
        if size > self.cap {
            return Err(AnalysisError::DomainTooLarge { size, cap: self.cap });
        }
        let mut inputs = vec![base];
        for (name, values) in &self.free {
            let id = index(name)?;
            inputs = inputs
                .into_iter()
                .flat_map(|v| {
                    values.iter().map(move |&x| {
                        let mut w = v.clone();
                        w[id] = x;
                        w
                    })
                })
                .collect();
        }
        inputs.sort();
        inputs.dedup();
        if inputs.is_empty() {
            return Err(AnalysisError::EmptyDomain);
        }
        Ok(inputs)
    }
}

/// What "synchronized" demands of the final control state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Criterion {
    /// Common `pc = x`, `br = 1`, `in = 0` across all inputs, with
    /// `x >= ℓ`: every branch has executed the last line.
    #[default]
    Terminated,
    /// Common `pc = x`, `br = 1`, `in = 0` with no constraint on `x`.
    /// Holds trivially at `t = 0` and before any branch diverges.
    Definition,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SyncVerdict {
    Synchronized,
    NotSynchronized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureReason {
    /// Two inputs end with different control values.
    DivergentControl,
    /// One input ends with its control in superposition.
    SuperposedControl,
    /// Control agrees but `br != 1`.
    BrNotOne,
    /// Control agrees with `br = 1` but the last line has not run yet.
    Unfinished,
}

/// One side of a witness pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessEntry {
    pub input: serde_json::Map<String, serde_json::Value>,
    pub pc: Option<u64>,
    pub br: Option<i64>,
    #[serde(skip)]
    pub registers: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SyncReport {
    pub verdict: SyncVerdict,
    pub pc: Option<u64>,
    pub t: usize,
    pub witness: Option<Vec<WitnessEntry>>,
    pub unitary_deviation: Option<f64>,
    #[serde(skip)]
    pub reason: Option<FailureReason>,
    #[serde(skip)]
    pub inputs: usize,
}

impl SyncReport {
    pub fn is_synchronized(&self) -> bool {
        self.verdict == SyncVerdict::Synchronized
    }

    /// Final pcs of the witness pair, if any.
    pub fn witness_pcs(&self) -> Option<Vec<Option<u64>>> {
        self.witness.as_ref().map(|w| w.iter().map(|e| e.pc).collect())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Column map from input register vectors to output data vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct InducedMap {
    pub registers: Vec<String>,
    pub columns: BTreeMap<Vec<u64>, BTreeMap<Vec<u64>, Complex64>>,
    /// Output labels reached from the enumerated domain.
    pub rows: BTreeSet<Vec<u64>>,
}

impl InducedMap {
    pub fn new(registers: Vec<String>, columns: BTreeMap<Vec<u64>, BTreeMap<Vec<u64>, Complex64>>) -> Self {
        let rows = columns.values().flat_map(|c| c.keys().cloned()).collect();
        InducedMap {
            registers,
            columns,
            rows,
        }
    }

    /// Largest entry of `|M†M − I|`; meaningful for non-square maps too.
    pub fn isometry_deviation(&self) -> f64 {
        let cols: Vec<_> = self.columns.values().collect();
        column_gram_deviation(&cols)
    }

    /// Drops one column but keeps the row space.
    pub fn without_column(&self, input: &[u64]) -> InducedMap {
        let mut out = self.clone();
        out.columns.remove(input);
        out
    }
}

fn basis_input(program: &Program, regs: &[u64]) -> Result<QuantumState, StateError> {
    QuantumState::basis(program.word_size(), program.registers(), BasisLabel::data(regs.to_vec()))
}

fn input_map(program: &Program, regs: &[u64]) -> serde_json::Map<String, serde_json::Value> {
    program
        .registers()
        .iter()
        .zip(regs)
        .map(|(n, v)| (n.clone(), (*v).into()))
        .collect()
}

type Control = (Option<u64>, Option<i64>, bool);

fn controls(state: &QuantumState) -> BTreeSet<Control> {
    state
        .terms()
        .map(|(l, _)| (l.pc, l.br, l.instr.is_some()))
        .collect()
}

fn entry(program: &Program, regs: &[u64], control: Control) -> WitnessEntry {
    WitnessEntry {
        input: input_map(program, regs),
        pc: control.0,
        br: control.1,
        registers: regs.to_vec(),
    }
}

fn data_column(state: &QuantumState) -> BTreeMap<Vec<u64>, Complex64> {
    let mut col = BTreeMap::new();
    for (l, a) in state.terms() {
        *col.entry(l.regs.clone()).or_insert(Complex64::new(0.0, 0.0)) += a;
    }
    col.retain(|_, a: &mut Complex64| a.norm() >= PRUNE_THRESHOLD);
    col
}

/// Verdict over final states indexed by input, in enumeration order.
fn judge(
    program: &Program,
    inputs: &[Vec<u64>],
    finals: &[QuantumState],
    t: usize,
    criterion: Criterion,
) -> SyncReport {
    let mut report = SyncReport {
        verdict: SyncVerdict::NotSynchronized,
        pc: None,
        t,
        witness: None,
        unitary_deviation: None,
        reason: None,
        inputs: inputs.len(),
    };
    let per_input: Vec<BTreeSet<Control>> = finals.iter().map(controls).collect();
    if let Some(i) = per_input.iter().position(|c| c.len() > 1) {
        let mut it = per_input[i].iter();
        let (a, b) = (*it.next().expect("two"), *it.next().expect("two"));
        report.reason = Some(FailureReason::SuperposedControl);
        report.witness = Some(vec![entry(program, &inputs[i], a), entry(program, &inputs[i], b)]);
        return report;
    }
    let first = *per_input[0].iter().next().expect("non-empty final state");
    if let Some(j) = per_input.iter().position(|c| *c.iter().next().expect("non-empty") != first) {
        let other = *per_input[j].iter().next().expect("non-empty");
        report.reason = Some(FailureReason::DivergentControl);
        report.witness = Some(vec![entry(program, &inputs[0], first), entry(program, &inputs[j], other)]);
        return report;
    }
    let (pc, br, loaded) = first;
    report.pc = pc;
    if br != Some(1) || loaded {
        report.reason = Some(FailureReason::BrNotOne);
        return report;
    }
    if criterion == Criterion::Terminated && pc.is_none_or(|x| x < program.len() as u64) {
        report.reason = Some(FailureReason::Unfinished);
        return report;
    }
    report.verdict = SyncVerdict::Synchronized;
    let cols: Vec<_> = finals.iter().map(data_column).collect();
    let refs: Vec<_> = cols.iter().collect();
    report.unitary_deviation = Some(column_gram_deviation(&refs));
    report
}

fn run_all(program: &Arc<Program>, inputs: &[Vec<u64>], t: usize) -> Result<Vec<QuantumState>, AnalysisError> {
    let config = MachineConfig {
        program: program.clone(),
        trace_mode: machine::TraceMode::Off,
        record_history: false,
    };
    inputs
        .par_iter()
        .map(|regs| {
            let input = basis_input(program, regs)?;
            Ok(machine::run(&config, &input, t)?.into_state())
        })
        .collect()
}

/// Runs every input of `domain` for `t` cycles and checks that all final
/// states share one control value `|pc:x, br:1, in:0⟩` with `x >= ℓ`.
pub fn check_synchronized(program: &Program, domain: &InputDomain, t: usize) -> Result<SyncReport, AnalysisError> {
    check_synchronized_with(program, domain, t, Criterion::Terminated)
}

pub fn check_synchronized_with(
    program: &Program,
    domain: &InputDomain,
    t: usize,
    criterion: Criterion,
) -> Result<SyncReport, AnalysisError> {
    let inputs = domain.enumerate(program)?;
    let program = Arc::new(program.clone());
    let finals = run_all(&program, &inputs, t)?;
    Ok(judge(&program, &inputs, &finals, t, criterion))
}

/// All `t <= t_max` at which [`check_synchronized`] passes.
pub fn find_sync_times(program: &Program, domain: &InputDomain, t_max: usize) -> Result<Vec<usize>, AnalysisError> {
    find_sync_times_with(program, domain, t_max, Criterion::Terminated)
}

pub fn find_sync_times_with(
    program: &Program,
    domain: &InputDomain,
    t_max: usize,
    criterion: Criterion,
) -> Result<Vec<usize>, AnalysisError> {
    scan(program, domain, t_max, criterion, false)
}

/// Smallest `t <= t_max` at which [`check_synchronized`] passes. Stops there,
/// so later cycles that would leave the machine's domain are never run.
pub fn first_sync_time(program: &Program, domain: &InputDomain, t_max: usize) -> Result<Option<usize>, AnalysisError> {
    Ok(scan(program, domain, t_max, Criterion::Terminated, true)?.first().copied())
}

fn scan(
    program: &Program,
    domain: &InputDomain,
    t_max: usize,
    criterion: Criterion,
    stop_at_first: bool,
) -> Result<Vec<usize>, AnalysisError> {
    if t_max > MAX_SCAN_CYCLES {
        return Err(AnalysisError::ScanTooLong(t_max));
    }
    let inputs = domain.enumerate(program)?;
    let config = MachineConfig::new(program.clone());
    let mut runs: Vec<MachineRun> = inputs
        .iter()
        .map(|regs| Ok(machine::init_run(&config, &basis_input(program, regs)?)?))
        .collect::<Result<_, AnalysisError>>()?;
    let mut times = Vec::new();
    for t in 0..=t_max {
        if t > 0 {
            runs.par_iter_mut().try_for_each(|r| r.step())?;
        }
        let finals: Vec<QuantumState> = runs.iter().map(|r| r.state().clone()).collect();
        if judge(program, &inputs, &finals, t, criterion).is_synchronized() {
            times.push(t);
            if stop_at_first {
                break;
            }
        }
    }
    Ok(times)
}

/// Data map of a synchronized run: one column per enumerated input.
pub fn induced_data_map(program: &Program, domain: &InputDomain, t: usize) -> Result<InducedMap, AnalysisError> {
    let inputs = domain.enumerate(program)?;
    let shared = Arc::new(program.clone());
    let finals = run_all(&shared, &inputs, t)?;
    if !judge(program, &inputs, &finals, t, Criterion::Terminated).is_synchronized() {
        return Err(AnalysisError::NotCertified(t));
    }
    Ok(InducedMap::new(
        program.registers().to_vec(),
        inputs.into_iter().zip(finals.iter().map(data_column)).collect(),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitarityReport {
    pub unitary: bool,
    pub max_deviation: f64,
}

/// Checks `M†M = I` for a square induced map.
pub fn assert_unitary(map: &InducedMap, tolerance: f64) -> Result<UnitarityReport, AnalysisError> {
    let rows = map.rows.len();
    let cols = map.columns.len();
    if rows != cols {
        return Err(AnalysisError::NonSquare { rows, cols });
    }
    let max_deviation = map.isometry_deviation();
    Ok(UnitarityReport {
        unitary: max_deviation <= tolerance,
        max_deviation,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleComparison {
    pub matches: bool,
    pub max_deviation: f64,
    /// Global phase λ with `map ≈ λ·oracle`.
    pub phase: Option<Complex64>,
    /// Number of columns compared.
    pub compared: usize,
}

/// Compares `map` with `oracle` up to one global phase, on the inputs where
/// both are defined. Registers are matched by name; registers the oracle does
/// not mention must come out unchanged.
pub fn compare_with_oracle(
    map: &InducedMap,
    oracle: &OracleMatrix,
    tolerance: f64,
) -> Result<OracleComparison, AnalysisError> {
    let positions = oracle
        .registers
        .iter()
        .map(|name| {
            map.registers
                .iter()
                .position(|r| r == name)
                .ok_or_else(|| AnalysisError::DimensionMismatch(format!("map has no register `{name}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let extras: Vec<usize> = (0..map.registers.len()).filter(|i| !positions.contains(i)).collect();
    let project = |v: &[u64]| positions.iter().map(|&p| v[p]).collect::<Vec<_>>();

    let mut pairs: Vec<(Complex64, Complex64)> = Vec::new();
    let mut compared = 0;
    let mut side_effects = false;
    for (input, column) in &map.columns {
        let Some(reference) = oracle.column(&project(input)) else {
            continue;
        };
        compared += 1;
        let mut projected: BTreeMap<Vec<u64>, Complex64> = BTreeMap::new();
        for (out, a) in column {
            if extras.iter().any(|&e| out[e] != input[e]) {
                side_effects = true;
            }
            *projected.entry(project(out)).or_default() += a;
        }
        let zero = Complex64::new(0.0, 0.0);
        for (label, a) in &projected {
            pairs.push((*a, *reference.get(label).unwrap_or(&zero)));
        }
        for (label, b) in reference {
            if !projected.contains_key(label) {
                pairs.push((zero, *b));
            }
        }
    }
    if compared == 0 {
        return Err(AnalysisError::DimensionMismatch(
            "no input lies in both the map and the oracle's defined domain".into(),
        ));
    }
    let anchor = pairs
        .iter()
        .filter(|(_, b)| b.norm() > PRUNE_THRESHOLD)
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()));
    let phase = anchor.and_then(|(a, b)| {
        let lambda = a / b;
        (lambda.norm() > PRUNE_THRESHOLD).then(|| lambda / lambda.norm())
    });
    let lambda = phase.unwrap_or(Complex64::new(1.0, 0.0));
    let max_deviation = pairs.iter().map(|(a, b)| (a - lambda * b).norm()).fold(0.0, f64::max);
    Ok(OracleComparison {
        matches: !side_effects && phase.is_some() && max_deviation <= tolerance,
        max_deviation,
        phase,
        compared,
    })
}

/// Runs `(|a⟩ + |b⟩)/√2` over two witness inputs and reports the final
/// control separability together with whether the two branches end with
/// the same data.
pub fn superposed_witness_run(
    program: &Program,
    a: &[u64],
    b: &[u64],
    t: usize,
) -> Result<(Separability, bool), AnalysisError> {
    let config = MachineConfig::new(program.clone());
    let finals = [a, b]
        .iter()
        .map(|regs| Ok(machine::run(&config, &basis_input(program, regs)?, t)?.into_state()))
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    let same_data = data_column(&finals[0]) == data_column(&finals[1]);
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let input = QuantumState::from_terms(
        program.word_size(),
        program.registers(),
        [(BasisLabel::data(a.to_vec()), h), (BasisLabel::data(b.to_vec()), h)],
    )?;
    let state = machine::run(&config, &input, t)?.into_state();
    let fields = [crate::qstate::Field::Pc, crate::qstate::Field::Br, crate::qstate::Field::In];
    Ok((state.separability_verdict(&fields)?, same_data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::oracle;

    #[test]
    fn conditional_increment_synchronizes_at_five() {
        let p = corpus::conditional_increment(4).unwrap();
        let domain = InputDomain::new().vary("x", [0, 3]).vary("y", [0, 3, 4]);
        let report = check_synchronized(&p, &domain, 5).unwrap();
        assert!(report.is_synchronized(), "{report:?}");
        assert_eq!(report.pc, Some(7));
        assert!(report.unitary_deviation.unwrap() < 1e-12);
        let not_yet = check_synchronized(&p, &domain, 4).unwrap();
        assert!(!not_yet.is_synchronized());
    }

    #[test]
    fn report_json_has_fixed_fields() {
        let p = corpus::conditional_increment(4).unwrap();
        let domain = InputDomain::new().vary("x", [0, 3]);
        let json = check_synchronized(&p, &domain, 5).unwrap().to_json();
        let keys: Vec<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["verdict", "pc", "t", "witness", "unitary_deviation"]);
        assert_eq!(json["verdict"], "synchronized");
    }

    #[test]
    fn first_sync_time_stops_early() {
        let p = corpus::exponentiation_padded(4).unwrap();
        let domain = InputDomain::new().fix("x", 2).fix("max", 2).vary("y", 0..=2);
        assert_eq!(first_sync_time(&p, &domain, 200), Ok(Some(21)));
        assert!(find_sync_times(&p, &domain, 200).is_err());
        let p = corpus::exponentiation(5).unwrap();
        let domain = InputDomain::new().fix("x", 2).vary("y", 1..=2);
        assert_eq!(first_sync_time(&p, &domain, 50), Ok(None));
    }

    #[test]
    fn definition_criterion_is_trivial_at_zero() {
        let p = corpus::conditional_increment(4).unwrap();
        let domain = InputDomain::new().vary("x", [0, 3]);
        assert!(check_synchronized_with(&p, &domain, 0, Criterion::Definition)
            .unwrap()
            .is_synchronized());
        let report = check_synchronized(&p, &domain, 0).unwrap();
        assert_eq!(report.reason, Some(FailureReason::Unfinished));
    }

    #[test]
    fn domain_enumeration() {
        let p = corpus::exponentiation_padded(4).unwrap();
        let domain = InputDomain::new().fix("x", 2).fix("max", 2).vary("y", 0..=2);
        let inputs = domain.enumerate(&p).unwrap();
        assert_eq!(inputs, vec![vec![0, 0, 2, 0, 2], vec![0, 0, 2, 1, 2], vec![0, 0, 2, 2, 2]]);
        assert_eq!(
            InputDomain::new().fix("res", 1).enumerate(&p),
            Err(AnalysisError::InputNotZeroed("res".into()))
        );
        assert!(matches!(
            InputDomain::new().vary("x", 0..=15).vary("y", 0..=15).with_cap(100).enumerate(&p),
            Err(AnalysisError::DomainTooLarge { size: 256, cap: 100 })
        ));
        assert_eq!(
            InputDomain::new().vary("q", [1]).enumerate(&p),
            Err(AnalysisError::UnknownRegister("q".into()))
        );
    }

    #[test]
    fn identity_program_is_unitary() {
        let p = crate::isa::parse_program(".registers a\nnop\nnop", 2).unwrap();
        let domain = InputDomain::full(&p);
        let map = induced_data_map(&p, &domain, 2).unwrap();
        let report = assert_unitary(&map, 1e-9).unwrap();
        assert!(report.unitary);
        assert_eq!(report.max_deviation, 0.0);
        let truncated = map.without_column(&[1]);
        assert_eq!(
            assert_unitary(&truncated, 1e-9),
            Err(AnalysisError::NonSquare { rows: 4, cols: 3 })
        );
    }

    #[test]
    fn unsynchronized_map_is_not_certified() {
        let p = corpus::conditional_increment(4).unwrap();
        let domain = InputDomain::new().vary("x", [0, 3]);
        assert_eq!(induced_data_map(&p, &domain, 3), Err(AnalysisError::NotCertified(3)));
    }

    #[test]
    fn oracle_comparison_uses_names_and_phase() {
        let p = corpus::conditional_increment(3).unwrap();
        let domain = InputDomain::new().vary("x", 0..=6).vary("y", 0..=7);
        let map = induced_data_map(&p, &domain, 5).unwrap();
        let cmp = compare_with_oracle(&map, &oracle::conditional_increment(3), 1e-9).unwrap();
        assert!(cmp.matches, "{cmp:?}");
        assert_eq!(cmp.compared, 56);
        let mut wrong = oracle::conditional_increment(3);
        wrong.columns.insert(vec![0, 0], oracle::conditional_increment(3).columns[&vec![1, 0]].clone());
        assert!(!compare_with_oracle(&map, &wrong, 1e-9).unwrap().matches);
        let other = oracle::majorana_unitary(3, 0).unwrap();
        assert!(!compare_with_oracle(&map, &other, 1e-9).unwrap().matches);
    }
}
