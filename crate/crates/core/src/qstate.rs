//! Sparse superpositions over classical machine configurations.
//!
//! A [`QuantumState`] maps [`BasisLabel`]s to complex amplitudes. Labels carry
//! the data registers of a machine plus optional control fields (`pc`, `br`,
//! `in`) and an optional program-counter history, so the same container holds
//! plain data states, machine states and the history-augmented states of the
//! embedding demonstrations.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Amplitudes with modulus below this are dropped from sparse maps.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Default tolerance for norm and amplitude comparisons.
pub const TOLERANCE: f64 = 1e-9;

pub type Amplitude = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("bit index {bit} out of range for word size {word_size}")]
    BitOutOfRange { bit: u32, word_size: u32 },
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("value {value} of register `{register}` does not fit in {word_size} bits")]
    ValueOutOfRange {
        register: String,
        value: u64,
        word_size: u32,
    },
    #[error("label has {found} register values, state declares {expected}")]
    RegisterArity { expected: usize, found: usize },
    #[error("state is not normalized (norm {norm})")]
    UnnormalizedState { norm: f64 },
    #[error("state has zero norm")]
    ZeroState,
    #[error("non-finite amplitude")]
    NonFinite,
    #[error("duplicate register name `{0}`")]
    DuplicateRegister(String),
    #[error("malformed state JSON: {0}")]
    Json(String),
}

/// One classical configuration: data register values plus optional control
/// fields. Field order defines the canonical sort order (registers first).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisLabel {
    pub regs: Vec<u64>,
    pub pc: Option<u64>,
    /// Signed two's complement value, kept in `[-2^(k-1), 2^(k-1))`.
    pub br: Option<i64>,
    /// Canonical identifier of the instruction held by the `in` register;
    /// `None` is the zero word.
    pub instr: Option<Arc<str>>,
    /// Program-counter history, newest first.
    pub history: Option<Vec<u64>>,
}

impl BasisLabel {
    pub fn data(regs: Vec<u64>) -> Self {
        BasisLabel {
            regs,
            ..Default::default()
        }
    }

    /// Label with only the data registers kept.
    pub fn data_part(&self) -> BasisLabel {
        BasisLabel::data(self.regs.clone())
    }
}

/// A field of a basis label that can be selected for grouping.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Pc,
    Br,
    In,
    History,
    Register(String),
}

impl Field {
    /// Parses a field name; `pc`, `br`, `in` and `history` are reserved,
    /// anything else names a register.
    pub fn parse(name: &str) -> Field {
        match name {
            "pc" => Field::Pc,
            "br" => Field::Br,
            "in" => Field::In,
            "history" => Field::History,
            other => Field::Register(other.to_string()),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Pc => f.write_str("pc"),
            Field::Br => f.write_str("br"),
            Field::In => f.write_str("in"),
            Field::History => f.write_str("history"),
            Field::Register(name) => f.write_str(name),
        }
    }
}

/// Single-bit gates supported by the machine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gate {
    H,
    Not,
    Y,
    Z,
}

/// 2x2 matrix; `m[row][col]` is the amplitude of `|row⟩` in the image of `|col⟩`.
pub type GateMatrix = [[Complex64; 2]; 2];

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::H, Gate::Not, Gate::Y, Gate::Z];

    pub fn matrix(self) -> GateMatrix {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        match self {
            Gate::H => [[h, h], [h, -h]],
            Gate::Not => [[zero, one], [one, zero]],
            Gate::Y => [[zero, -i], [i, zero]],
            Gate::Z => [[one, zero], [zero, -one]],
        }
    }

    /// Conjugate transpose of [`Gate::matrix`].
    pub fn adjoint_matrix(self) -> GateMatrix {
        let m = self.matrix();
        [
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate::H => "H",
            Gate::Not => "NOT",
            Gate::Y => "Y",
            Gate::Z => "Z",
        }
    }

    pub fn from_name(name: &str) -> Option<Gate> {
        match name {
            "H" => Some(Gate::H),
            "NOT" | "X" => Some(Gate::Not),
            "Y" => Some(Gate::Y),
            "Z" => Some(Gate::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Images of `value` under `matrix` acting on bit `bit`. Zero entries are
/// skipped, so permutation-like gates yield a single branch.
pub fn single_bit_images(value: u64, bit: u32, matrix: &GateMatrix) -> smallvec::SmallVec<[(u64, Complex64); 2]> {
    let col = ((value >> bit) & 1) as usize;
    let cleared = value & !(1u64 << bit);
    let mut out = smallvec::SmallVec::new();
    for (row, entry) in matrix.iter().enumerate() {
        let amp = entry[col];
        if amp.norm() > 0.0 {
            out.push((cleared | ((row as u64) << bit), amp));
        }
    }
    out
}

/// Sparse superposition over basis labels sharing one register layout.
///
/// Values are immutable snapshots: every operation returns a new state.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    word_size: u32,
    registers: Arc<[String]>,
    terms: BTreeMap<BasisLabel, Complex64>,
}

impl QuantumState {
    /// Empty (zero) state with the given register layout.
    pub fn zero(word_size: u32, registers: &[impl AsRef<str>]) -> Result<Self, StateError> {
        let names: Vec<String> = registers.iter().map(|r| r.as_ref().to_string()).collect();
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(StateError::DuplicateRegister(name.clone()));
            }
        }
        Ok(QuantumState {
            word_size,
            registers: names.into(),
            terms: BTreeMap::new(),
        })
    }

    /// Builds a state from `(label, amplitude)` pairs, summing duplicate
    /// labels and pruning negligible amplitudes.
    pub fn from_terms<I>(word_size: u32, registers: &[impl AsRef<str>], terms: I) -> Result<Self, StateError>
    where
        I: IntoIterator<Item = (BasisLabel, Complex64)>,
    {
        let mut state = Self::zero(word_size, registers)?;
        let mask = state.mask();
        let mut acc: BTreeMap<BasisLabel, Complex64> = BTreeMap::new();
        for (label, amp) in terms {
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(StateError::NonFinite);
            }
            if label.regs.len() != state.registers.len() {
                return Err(StateError::RegisterArity {
                    expected: state.registers.len(),
                    found: label.regs.len(),
                });
            }
            for (value, name) in label.regs.iter().zip(state.registers.iter()) {
                if value & !mask != 0 {
                    return Err(StateError::ValueOutOfRange {
                        register: name.clone(),
                        value: *value,
                        word_size,
                    });
                }
            }
            *acc.entry(label).or_default() += amp;
        }
        acc.retain(|_, amp| amp.norm() >= PRUNE_THRESHOLD);
        state.terms = acc;
        Ok(state)
    }

    /// A single basis state with unit amplitude.
    pub fn basis(word_size: u32, registers: &[impl AsRef<str>], label: BasisLabel) -> Result<Self, StateError> {
        Self::from_terms(word_size, registers, [(label, Complex64::new(1.0, 0.0))])
    }

    /// Builds a state from already-validated parts. Callers guarantee label
    /// arity and value range; amplitudes are still pruned.
    pub(crate) fn from_parts(
        word_size: u32,
        registers: Arc<[String]>,
        mut terms: BTreeMap<BasisLabel, Complex64>,
    ) -> Self {
        terms.retain(|_, amp| amp.norm() >= PRUNE_THRESHOLD);
        QuantumState {
            word_size,
            registers,
            terms,
        }
    }

    pub fn word_size(&self) -> u32 {
        self.word_size
    }

    pub fn mask(&self) -> u64 {
        word_mask(self.word_size)
    }

    pub fn registers(&self) -> &[String] {
        &self.registers
    }

    pub(crate) fn registers_arc(&self) -> Arc<[String]> {
        self.registers.clone()
    }

    pub fn register_index(&self, name: &str) -> Result<usize, StateError> {
        self.registers
            .iter()
            .position(|r| r == name)
            .ok_or_else(|| StateError::UnknownRegister(name.to_string()))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisLabel, &Complex64)> {
        self.terms.iter()
    }

    pub fn term_map(&self) -> &BTreeMap<BasisLabel, Complex64> {
        &self.terms
    }

    pub fn amplitude(&self, label: &BasisLabel) -> Complex64 {
        self.terms.get(label).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sum of squared amplitude moduli, `⟨ψ|ψ⟩`.
    pub fn norm(&self) -> f64 {
        self.terms.values().fold(0.0, |acc, a| acc + a.norm_sqr())
    }

    pub fn scaled(&self, factor: Complex64) -> QuantumState {
        let terms = self.terms.iter().map(|(l, a)| (l.clone(), a * factor)).collect();
        Self::from_parts(self.word_size, self.registers.clone(), terms)
    }

    /// Rescales to unit norm.
    pub fn normalized(&self) -> Result<QuantumState, StateError> {
        let norm = self.norm();
        if norm < PRUNE_THRESHOLD {
            return Err(StateError::ZeroState);
        }
        Ok(self.scaled(Complex64::new(1.0 / norm.sqrt(), 0.0)))
    }

    fn require_normalized(&self) -> Result<(), StateError> {
        let norm = self.norm();
        if (norm - 1.0).abs() > TOLERANCE {
            return Err(StateError::UnnormalizedState { norm });
        }
        Ok(())
    }

    /// Applies a single-bit gate to bit `bit` of `register` in every term.
    pub fn apply_gate(&self, register: &str, bit: u32, gate: Gate) -> Result<QuantumState, StateError> {
        self.apply_matrix(register, bit, &gate.matrix())
    }

    /// Like [`QuantumState::apply_gate`] for an arbitrary 2x2 matrix. This is
    /// the extension point for gates outside the built-in set.
    pub fn apply_matrix(&self, register: &str, bit: u32, matrix: &GateMatrix) -> Result<QuantumState, StateError> {
        if bit >= self.word_size {
            return Err(StateError::BitOutOfRange {
                bit,
                word_size: self.word_size,
            });
        }
        let idx = self.register_index(register)?;
        let mut out: BTreeMap<BasisLabel, Complex64> = BTreeMap::new();
        for (label, amp) in &self.terms {
            for (value, factor) in single_bit_images(label.regs[idx], bit, matrix) {
                let mut next = label.clone();
                next.regs[idx] = value;
                *out.entry(next).or_default() += amp * factor;
            }
        }
        Ok(Self::from_parts(self.word_size, self.registers.clone(), out))
    }

    fn field_selector(&self, fields: &[Field]) -> Result<FieldMask, StateError> {
        let mut mask = FieldMask::default();
        for field in fields {
            match field {
                Field::Pc => mask.pc = true,
                Field::Br => mask.br = true,
                Field::In => mask.instr = true,
                Field::History => mask.history = true,
                Field::Register(name) => mask.regs.push(self.register_index(name)?),
            }
        }
        Ok(mask)
    }

    /// Outcome probabilities of measuring the given registers.
    pub fn measure_distribution(&self, registers: &[impl AsRef<str>]) -> Result<BTreeMap<Vec<u64>, f64>, StateError> {
        self.require_normalized()?;
        let indices = registers
            .iter()
            .map(|r| self.register_index(r.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        let mut dist: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
        for (label, amp) in &self.terms {
            let key = indices.iter().map(|&i| label.regs[i]).collect();
            *dist.entry(key).or_default() += amp.norm_sqr();
        }
        Ok(dist)
    }

    /// Draws `count` outcomes from [`QuantumState::measure_distribution`]
    /// with a ChaCha generator seeded from `seed`.
    pub fn sample(&self, registers: &[impl AsRef<str>], count: usize, seed: u64) -> Result<Vec<Vec<u64>>, StateError> {
        let dist = self.measure_distribution(registers)?;
        let (outcomes, weights): (Vec<_>, Vec<_>) = dist.into_iter().unzip();
        let index = WeightedIndex::new(&weights).map_err(|_| StateError::ZeroState)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..count).map(|_| outcomes[index.sample(&mut rng)].clone()).collect())
    }

    /// Groups terms by the selected control fields and reports whether the
    /// control part is a single computational basis value.
    pub fn separability_verdict(&self, control: &[Field]) -> Result<Separability, StateError> {
        self.require_normalized()?;
        let mask = self.field_selector(control)?;
        let mut groups: BTreeMap<BasisLabel, BTreeMap<BasisLabel, Complex64>> = BTreeMap::new();
        for (label, amp) in &self.terms {
            let (ctrl, data) = mask.split(label);
            groups.entry(ctrl).or_default().insert(data, *amp);
        }
        let mut iter = groups.into_iter();
        let (first_ctrl, first_data) = iter.next().ok_or(StateError::ZeroState)?;
        let rest: Vec<_> = iter.collect();
        if rest.is_empty() {
            return Ok(Separability::Separable { control: first_ctrl });
        }
        let first_data = normalize_map(first_data);
        let rest: Vec<_> = rest.into_iter().map(|(c, d)| (c, normalize_map(d))).collect();
        let pick = rest
            .iter()
            .position(|(_, d)| !maps_equal_up_to_phase(&first_data, d, TOLERANCE))
            .unwrap_or(0);
        let proportional = maps_equal_up_to_phase(&first_data, &rest[pick].1, TOLERANCE);
        let (second_ctrl, second_data) = rest.into_iter().nth(pick).expect("index in range");
        Ok(Separability::Entangled(EntanglementWitness {
            controls: [first_ctrl, second_ctrl],
            conditional: [first_data, second_data],
            proportional,
        }))
    }

    /// True iff `self = λ·other` for some unit-modulus λ, within `tolerance`
    /// per amplitude.
    pub fn equal_up_to_global_phase(&self, other: &QuantumState, tolerance: f64) -> Result<bool, StateError> {
        if self.norm() < tolerance || other.norm() < tolerance {
            return Err(StateError::ZeroState);
        }
        if self.registers != other.registers {
            return Ok(false);
        }
        Ok(maps_equal_up_to_phase(&self.terms, &other.terms, tolerance))
    }

    /// Per-amplitude comparison without phase freedom.
    pub fn approx_eq(&self, other: &QuantumState, tolerance: f64) -> bool {
        self.registers == other.registers && max_map_difference(&self.terms, &other.terms) <= tolerance
    }

    pub fn to_json(&self) -> StateJson {
        StateJson::from(self)
    }

    pub fn from_json(json: &StateJson) -> Result<QuantumState, StateError> {
        json.to_state()
    }
}

pub(crate) fn word_mask(word_size: u32) -> u64 {
    if word_size >= 64 {
        u64::MAX
    } else {
        (1u64 << word_size) - 1
    }
}

#[derive(Default)]
struct FieldMask {
    regs: Vec<usize>,
    pc: bool,
    br: bool,
    instr: bool,
    history: bool,
}

impl FieldMask {
    /// Splits a label into (control projection, remaining data).
    fn split(&self, label: &BasisLabel) -> (BasisLabel, BasisLabel) {
        let ctrl = BasisLabel {
            regs: self.regs.iter().map(|&i| label.regs[i]).collect(),
            pc: if self.pc { label.pc } else { None },
            br: if self.br { label.br } else { None },
            instr: if self.instr { label.instr.clone() } else { None },
            history: if self.history { label.history.clone() } else { None },
        };
        let data = BasisLabel {
            regs: label
                .regs
                .iter()
                .enumerate()
                .filter(|(i, _)| !self.regs.contains(i))
                .map(|(_, v)| *v)
                .collect(),
            pc: if self.pc { None } else { label.pc },
            br: if self.br { None } else { label.br },
            instr: if self.instr { None } else { label.instr.clone() },
            history: if self.history { None } else { label.history.clone() },
        };
        (ctrl, data)
    }
}

fn normalize_map(map: BTreeMap<BasisLabel, Complex64>) -> BTreeMap<BasisLabel, Complex64> {
    let norm: f64 = map.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    map.into_iter().map(|(l, a)| (l, a / norm)).collect()
}

fn max_map_difference<K: Ord>(a: &BTreeMap<K, Complex64>, b: &BTreeMap<K, Complex64>) -> f64 {
    let zero = Complex64::new(0.0, 0.0);
    let left = a.iter().map(|(k, x)| (x - b.get(k).unwrap_or(&zero)).norm());
    let right = b.iter().filter(|(k, _)| !a.contains_key(k)).map(|(_, y)| y.norm());
    left.chain(right).fold(0.0, f64::max)
}

/// Phase-insensitive comparison of sparse vectors. λ is taken from the
/// largest-modulus term present in both.
pub(crate) fn maps_equal_up_to_phase<K: Ord>(
    a: &BTreeMap<K, Complex64>,
    b: &BTreeMap<K, Complex64>,
    tolerance: f64,
) -> bool {
    let anchor = a
        .iter()
        .filter_map(|(k, x)| b.get(k).map(|y| (x, y)))
        .max_by(|(x1, _), (x2, _)| x1.norm().total_cmp(&x2.norm()));
    let Some((x, y)) = anchor else {
        return false;
    };
    let lambda = x / y;
    if (lambda.norm() - 1.0).abs() > tolerance.max(PRUNE_THRESHOLD) * 10.0 {
        return false;
    }
    let lambda = lambda / lambda.norm();
    let zero = Complex64::new(0.0, 0.0);
    a.iter()
        .all(|(k, x)| (x - lambda * b.get(k).unwrap_or(&zero)).norm() <= tolerance)
        && b.iter().all(|(k, y)| a.contains_key(k) || y.norm() <= tolerance)
}

/// Result of [`QuantumState::separability_verdict`].
#[derive(Clone, Debug, PartialEq)]
pub enum Separability {
    /// Every term carries this control value (only the selected fields are set).
    Separable { control: BasisLabel },
    Entangled(EntanglementWitness),
}

impl Separability {
    pub fn is_separable(&self) -> bool {
        matches!(self, Separability::Separable { .. })
    }
}

/// Two control values with their normalized conditional data vectors.
/// `proportional` means the data vectors agree up to phase, i.e. the state
/// is a product with superposed control rather than genuinely entangled.
#[derive(Clone, Debug, PartialEq)]
pub struct EntanglementWitness {
    pub controls: [BasisLabel; 2],
    pub conditional: [BTreeMap<BasisLabel, Complex64>; 2],
    pub proportional: bool,
}

/// JSON form of a state:
/// `{"word_size": k, "terms": [{"amp": [re, im], "pc", "br", "in", "regs", "history"}]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StateJson {
    pub word_size: u32,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TermJson {
    pub amp: [f64; 2],
    pub pc: Option<u64>,
    pub br: Option<i64>,
    #[serde(rename = "in")]
    pub instr: Option<String>,
    pub regs: serde_json::Map<String, serde_json::Value>,
    pub history: Option<Vec<u64>>,
}

impl From<&QuantumState> for StateJson {
    fn from(state: &QuantumState) -> Self {
        let terms = state
            .terms
            .iter()
            .map(|(label, amp)| TermJson {
                amp: [amp.re, amp.im],
                pc: label.pc,
                br: label.br,
                instr: label.instr.as_ref().map(|s| s.to_string()),
                regs: state
                    .registers
                    .iter()
                    .zip(&label.regs)
                    .map(|(n, v)| (n.clone(), serde_json::Value::from(*v)))
                    .collect(),
                history: label.history.clone(),
            })
            .collect();
        StateJson {
            word_size: state.word_size,
            terms,
        }
    }
}

impl StateJson {
    /// Register order is taken from the first term.
    pub fn to_state(&self) -> Result<QuantumState, StateError> {
        let names: Vec<String> = self
            .terms
            .first()
            .map(|t| t.regs.keys().cloned().collect())
            .unwrap_or_default();
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let mut regs = Vec::with_capacity(names.len());
            if t.regs.len() != names.len() {
                return Err(StateError::RegisterArity {
                    expected: names.len(),
                    found: t.regs.len(),
                });
            }
            for name in &names {
                let value = t
                    .regs
                    .get(name)
                    .ok_or_else(|| StateError::UnknownRegister(name.clone()))?
                    .as_u64()
                    .ok_or_else(|| StateError::Json(format!("register `{name}` is not an unsigned integer")))?;
                regs.push(value);
            }
            let label = BasisLabel {
                regs,
                pc: t.pc,
                br: t.br,
                instr: t.instr.as_deref().map(Arc::from),
                history: t.history.clone(),
            };
            terms.push((label, Complex64::new(t.amp[0], t.amp[1])));
        }
        QuantumState::from_terms(self.word_size, &names, terms)
    }
}

impl Serialize for QuantumState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        StateJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QuantumState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let json = StateJson::deserialize(deserializer)?;
        json.to_state().map_err(serde::de::Error::custom)
    }
}

/// Formats a label as `|x:0, y:4, pc:7, br:1⟩` using the given register names.
pub fn format_label(registers: &[String], label: &BasisLabel) -> String {
    let mut parts: Vec<String> = registers
        .iter()
        .zip(&label.regs)
        .map(|(n, v)| format!("{n}:{v}"))
        .collect();
    if let Some(pc) = label.pc {
        parts.push(format!("pc:{pc}"));
    }
    if let Some(br) = label.br {
        parts.push(format!("br:{br}"));
    }
    if let Some(instr) = &label.instr {
        parts.push(format!("in:{instr}"));
    }
    if let Some(history) = &label.history {
        let h: Vec<String> = history.iter().map(|v| v.to_string()).collect();
        parts.push(format!("history:[{}]", h.join(",")));
    }
    format!("|{}⟩", parts.join(", "))
}

impl fmt::Display for QuantumState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (label, amp)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{:+.6}{:+.6}i {}", amp.re, amp.im, format_label(&self.registers, label))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single(name: &str, terms: &[(u64, Complex64)]) -> QuantumState {
        QuantumState::from_terms(
            4,
            &[name],
            terms.iter().map(|&(v, a)| (BasisLabel::data(vec![v]), a)),
        )
        .unwrap()
    }

    fn bell() -> QuantumState {
        QuantumState::from_terms(
            1,
            &["a", "b"],
            [
                (BasisLabel::data(vec![0, 0]), c(FRAC_1_SQRT_2, 0.0)),
                (BasisLabel::data(vec![1, 1]), c(FRAC_1_SQRT_2, 0.0)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn norm_examples() {
        assert_eq!(single("q", &[(0, c(1.0, 0.0))]).norm(), 1.0);
        assert!((bell().norm() - 1.0).abs() < 1e-12);
        assert_eq!(QuantumState::zero(4, &["q"]).unwrap().norm(), 0.0);
    }

    #[test]
    fn hadamard_splits_and_recombines() {
        let s = single("c", &[(0, c(1.0, 0.0))]);
        let h = s.apply_gate("c", 0, Gate::H).unwrap();
        assert_eq!(h.len(), 2);
        assert!((h.amplitude(&BasisLabel::data(vec![0])) - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        assert!((h.amplitude(&BasisLabel::data(vec![1])) - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        let hh = h.apply_gate("c", 0, Gate::H).unwrap();
        assert!(hh.approx_eq(&s, 1e-12));
        assert_eq!(hh.len(), 1);
    }

    #[test]
    fn z_is_trivial_on_zero_and_y_matches_definition() {
        let s = single("c", &[(0, c(1.0, 0.0))]);
        assert!(s.apply_gate("c", 0, Gate::Z).unwrap().approx_eq(&s, 0.0));
        let y0 = s.apply_gate("c", 0, Gate::Y).unwrap();
        assert!((y0.amplitude(&BasisLabel::data(vec![1])) - c(0.0, 1.0)).norm() < 1e-15);
        let y1 = single("c", &[(1, c(1.0, 0.0))]).apply_gate("c", 0, Gate::Y).unwrap();
        assert!((y1.amplitude(&BasisLabel::data(vec![0])) - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn gate_on_higher_bit() {
        let s = single("r", &[(0b0101, c(1.0, 0.0))]);
        let out = s.apply_gate("r", 1, Gate::Not).unwrap();
        assert_eq!(out.amplitude(&BasisLabel::data(vec![0b0111])), c(1.0, 0.0));
        assert_eq!(
            s.apply_gate("r", 4, Gate::H),
            Err(StateError::BitOutOfRange { bit: 4, word_size: 4 })
        );
    }

    #[test]
    fn measurement_examples() {
        let plus = single("q", &[(0, c(FRAC_1_SQRT_2, 0.0)), (1, c(FRAC_1_SQRT_2, 0.0))]);
        let dist = plus.measure_distribution(&["q"]).unwrap();
        assert!((dist[&vec![0]] - 0.5).abs() < 1e-12);
        assert!((dist[&vec![1]] - 0.5).abs() < 1e-12);
        let five = single("x", &[(5, c(1.0, 0.0))]);
        assert_eq!(five.measure_distribution(&["x"]).unwrap()[&vec![5]], 1.0);
        let half = single("q", &[(0, c(0.5, 0.0))]);
        assert!(matches!(
            half.measure_distribution(&["q"]),
            Err(StateError::UnnormalizedState { .. })
        ));
    }

    #[test]
    fn sampling_is_seeded() {
        let one = single("q", &[(1, c(1.0, 0.0))]);
        assert_eq!(one.sample(&["q"], 3, 7).unwrap(), vec![vec![1]; 3]);
        let plus = single("q", &[(0, c(FRAC_1_SQRT_2, 0.0)), (1, c(FRAC_1_SQRT_2, 0.0))]);
        let a = plus.sample(&["q"], 10_000, 1).unwrap();
        assert_eq!(a, plus.sample(&["q"], 10_000, 1).unwrap());
        let ones = a.iter().filter(|v| v[0] == 1).count() as f64 / 10_000.0;
        assert!((ones - 0.5).abs() < 0.02, "frequency {ones}");
    }

    #[test]
    fn separable_control_with_superposed_data() {
        let label = |x, y| BasisLabel {
            regs: vec![x, y],
            pc: Some(7),
            br: Some(1),
            ..Default::default()
        };
        let s = QuantumState::from_terms(
            4,
            &["x", "y"],
            [
                (label(0, 4), c(FRAC_1_SQRT_2, 0.0)),
                (label(4, 0), c(-FRAC_1_SQRT_2, 0.0)),
            ],
        )
        .unwrap();
        match s.separability_verdict(&[Field::Pc, Field::Br]).unwrap() {
            Separability::Separable { control } => {
                assert_eq!(control.pc, Some(7));
                assert_eq!(control.br, Some(1));
            }
            other => panic!("expected separable, got {other:?}"),
        }
    }

    #[test]
    fn bell_state_is_entangled() {
        let verdict = bell()
            .separability_verdict(&[Field::Register("a".into())])
            .unwrap();
        match verdict {
            Separability::Entangled(w) => assert!(!w.proportional),
            other => panic!("expected entangled, got {other:?}"),
        }
    }

    #[test]
    fn product_with_superposed_control_is_flagged_proportional() {
        let s = QuantumState::from_terms(
            1,
            &["a", "b"],
            [
                (BasisLabel::data(vec![0, 1]), c(FRAC_1_SQRT_2, 0.0)),
                (BasisLabel::data(vec![1, 1]), c(0.0, FRAC_1_SQRT_2)),
            ],
        )
        .unwrap();
        match s.separability_verdict(&[Field::parse("a")]).unwrap() {
            Separability::Entangled(w) => assert!(w.proportional),
            other => panic!("expected superposed control, got {other:?}"),
        }
    }

    #[test]
    fn global_phase_examples() {
        let zero = single("q", &[(0, c(1.0, 0.0))]);
        let minus_zero = single("q", &[(0, c(-1.0, 0.0))]);
        let one = single("q", &[(1, c(1.0, 0.0))]);
        assert!(zero.equal_up_to_global_phase(&minus_zero, 1e-9).unwrap());
        assert!(!zero.equal_up_to_global_phase(&one, 1e-9).unwrap());
        let a = single("q", &[(0, c(0.0, FRAC_1_SQRT_2)), (1, c(0.0, FRAC_1_SQRT_2))]);
        let b = single("q", &[(0, c(FRAC_1_SQRT_2, 0.0)), (1, c(FRAC_1_SQRT_2, 0.0))]);
        assert!(a.equal_up_to_global_phase(&b, 1e-9).unwrap());
        let empty = QuantumState::zero(4, &["q"]).unwrap();
        assert_eq!(zero.equal_up_to_global_phase(&empty, 1e-9), Err(StateError::ZeroState));
    }

    #[test]
    fn rejects_out_of_range_values() {
        let err = QuantumState::basis(2, &["x"], BasisLabel::data(vec![4])).unwrap_err();
        assert!(matches!(err, StateError::ValueOutOfRange { .. }));
    }

    #[test]
    fn json_round_trip_keeps_register_order_and_fields() {
        let label = BasisLabel {
            regs: vec![3, 1],
            pc: Some(2),
            br: Some(-3),
            instr: Some(Arc::from("jz +3 y")),
            history: Some(vec![1, 0]),
        };
        let s = QuantumState::from_terms(4, &["y", "x"], [(label, c(0.6, -0.8))]).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(
            text,
            r#"{"word_size":4,"terms":[{"amp":[0.6,-0.8],"pc":2,"br":-3,"in":"jz +3 y","regs":{"y":3,"x":1},"history":[1,0]}]}"#
        );
        let back: QuantumState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
