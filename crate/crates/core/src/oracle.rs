//! Reference operators built directly from arithmetic and linear algebra,
//! without going through the instruction set.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use thiserror::Error;

use crate::qstate::{word_mask, Gate};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("bit index {index} out of range for word size {word_size}")]
    IndexOutOfRange { index: u32, word_size: u32 },
    #[error("walk of {iterations} steps from {x0} leaves [0, 2^{word_size})")]
    Wraparound { iterations: u32, x0: u64, word_size: u32 },
    #[error("parameter out of range: {0}")]
    Parameter(String),
}

/// Sparse column vector over register-value tuples.
pub type Column = BTreeMap<Vec<u64>, Complex64>;

/// A linear map given column by column. A `None` column marks an input on
/// which the reference operation is undefined.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleMatrix {
    pub registers: Vec<String>,
    pub word_size: u32,
    pub columns: BTreeMap<Vec<u64>, Option<Column>>,
    /// Inputs whose column is a documented completion rather than a value
    /// of the underlying partial function.
    pub completed: BTreeSet<Vec<u64>>,
    pub description: String,
}

impl OracleMatrix {
    pub fn column(&self, input: &[u64]) -> Option<&Column> {
        self.columns.get(input).and_then(Option::as_ref)
    }

    pub fn defined_inputs(&self) -> impl Iterator<Item = &Vec<u64>> {
        self.columns.iter().filter(|(_, c)| c.is_some()).map(|(k, _)| k)
    }

    /// Largest entry of `|C†C − I|` over the defined columns.
    pub fn unitarity_deviation(&self) -> f64 {
        let cols: Vec<&Column> = self.columns.values().flatten().collect();
        column_gram_deviation(&cols)
    }

    pub fn is_unitary(&self, tolerance: f64) -> bool {
        self.unitarity_deviation() <= tolerance
    }
}

/// Largest entry of `|C†C − I|` for sparse columns, accumulated row by row.
pub fn column_gram_deviation<K: Ord>(cols: &[&BTreeMap<K, Complex64>]) -> f64 {
    let mut by_row: BTreeMap<&K, Vec<(usize, Complex64)>> = BTreeMap::new();
    for (j, col) in cols.iter().enumerate() {
        for (row, amp) in col.iter() {
            by_row.entry(row).or_default().push((j, *amp));
        }
    }
    let mut gram: std::collections::HashMap<(usize, usize), Complex64> = std::collections::HashMap::new();
    for entries in by_row.values() {
        for (a, va) in entries {
            for (b, vb) in entries {
                if a <= b {
                    *gram.entry((*a, *b)).or_default() += va.conj() * vb;
                }
            }
        }
    }
    let mut worst: f64 = 0.0;
    for j in 0..cols.len() {
        let diag = gram.get(&(j, j)).copied().unwrap_or_default();
        worst = worst.max((diag - 1.0).norm());
    }
    for (&(a, b), v) in &gram {
        if a != b {
            worst = worst.max(v.norm());
        }
    }
    worst
}

fn basis_column(output: Vec<u64>) -> Column {
    BTreeMap::from([(output, Complex64::new(1.0, 0.0))])
}

/// `if x != 0 then x += 1 else y += 1` over registers `[x, y]`.
///
/// Overflow cells are completed so the whole map is a permutation: `y`
/// wraps modulo `2^k`, and `x` cycles through `1..2^k` (so `2^k − 1 ↦ 1`).
pub fn conditional_increment(word_size: u32) -> OracleMatrix {
    let top = word_mask(word_size);
    let mut columns = BTreeMap::new();
    let mut completed = BTreeSet::new();
    for x in 0..=top {
        for y in 0..=top {
            let out = if x == 0 {
                if y == top {
                    completed.insert(vec![x, y]);
                }
                vec![0, (y + 1) & top]
            } else if x == top {
                completed.insert(vec![x, y]);
                vec![1, y]
            } else {
                vec![x + 1, y]
            };
            columns.insert(vec![x, y], Some(basis_column(out)));
        }
    }
    OracleMatrix {
        registers: vec!["x".into(), "y".into()],
        word_size,
        columns,
        completed,
        description: format!("conditional increment, k={word_size}"),
    }
}

/// `res := x^y` over registers `[x, y, res, r1]`, on inputs with
/// `res = r1 = 0`. Cells with `y > max` or `x^y >= 2^k` are undefined.
pub fn exponentiation_map(word_size: u32, max: u64) -> Result<OracleMatrix, OracleError> {
    let top = word_mask(word_size);
    if max > top {
        return Err(OracleError::Parameter(format!("max {max} does not fit in {word_size} bits")));
    }
    let mut columns = BTreeMap::new();
    for x in 0..=top {
        for y in 0..=top {
            let power = (y <= max)
                .then(|| x.checked_pow(y as u32))
                .flatten()
                .filter(|p| *p <= top);
            columns.insert(vec![x, y, 0, 0], power.map(|p| basis_column(vec![x, y, p, 0])));
        }
    }
    Ok(OracleMatrix {
        registers: ["x", "y", "res", "r1"].map(String::from).to_vec(),
        word_size,
        columns,
        completed: BTreeSet::new(),
        description: format!("exponentiation, k={word_size}, max={max}"),
    })
}

type Dense = Vec<Vec<Complex64>>;

fn kron(a: &Dense, b: &Dense) -> Dense {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![Complex64::new(0.0, 0.0); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for p in 0..m {
                for q in 0..m {
                    out[i * m + p][j * m + q] = a[i][j] * b[p][q];
                }
            }
        }
    }
    out
}

fn dense_gate(gate: Option<Gate>) -> Dense {
    match gate {
        Some(g) => g.matrix().iter().map(|row| row.to_vec()).collect(),
        None => {
            let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
            vec![vec![l, o], vec![o, l]]
        }
    }
}

/// `Y` on bit `i`, `Z` on bits `i−1 … 0`, identity above, over register `[x]`.
/// Assembled as a Kronecker product with the most significant bit first.
pub fn majorana_unitary(word_size: u32, i: u32) -> Result<OracleMatrix, OracleError> {
    if i >= word_size {
        return Err(OracleError::IndexOutOfRange { index: i, word_size });
    }
    if word_size > 10 {
        return Err(OracleError::Parameter(format!("word size {word_size} too large for a dense matrix")));
    }
    let mut m: Dense = vec![vec![Complex64::new(1.0, 0.0)]];
    for bit in (0..word_size).rev() {
        let gate = match bit.cmp(&i) {
            std::cmp::Ordering::Greater => None,
            std::cmp::Ordering::Equal => Some(Gate::Y),
            std::cmp::Ordering::Less => Some(Gate::Z),
        };
        m = kron(&m, &dense_gate(gate));
    }
    let columns = (0..m.len())
        .map(|col| {
            let entries = (0..m.len())
                .filter(|&row| m[row][col].norm() > 0.0)
                .map(|row| (vec![row as u64], m[row][col]))
                .collect();
            (vec![col as u64], Some(entries))
        })
        .collect();
    Ok(OracleMatrix {
        registers: vec!["x".into()],
        word_size,
        columns,
        completed: BTreeSet::new(),
        description: format!("Majorana operator, k={word_size}, i={i}"),
    })
}

/// Amplitudes over `(x, c)` pairs.
pub type WalkVector = BTreeMap<(u64, u64), Complex64>;

#[derive(Clone, Debug, PartialEq)]
pub struct WalkRound {
    pub after_coin: WalkVector,
    pub after_shift: WalkVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkReference {
    pub rounds: Vec<WalkRound>,
    pub amplitudes: WalkVector,
    pub distribution: BTreeMap<u64, f64>,
}

impl WalkReference {
    /// Probability of measuring `x`.
    pub fn probability(&self, x: u64) -> f64 {
        self.distribution.get(&x).copied().unwrap_or(0.0)
    }
}

fn walk_round(psi: &WalkVector) -> WalkRound {
    let h = Gate::H.matrix();
    let mut coin: WalkVector = BTreeMap::new();
    for (&(x, c), amp) in psi {
        for out in 0..2u64 {
            *coin.entry((x, out)).or_default() += h[out as usize][c as usize] * amp;
        }
    }
    coin.retain(|_, a| a.norm() >= crate::qstate::PRUNE_THRESHOLD);
    let after_shift = coin
        .iter()
        .map(|(&(x, c), a)| ((if c == 0 { x - 1 } else { x + 1 }, c), *a))
        .collect();
    WalkRound {
        after_coin: coin,
        after_shift,
    }
}

fn check_walk_bounds(iterations: u32, x0: u64, word_size: u32) -> Result<(), OracleError> {
    if (iterations as u64) > x0 || x0 + iterations as u64 > word_mask(word_size) {
        return Err(OracleError::Wraparound {
            iterations,
            x0,
            word_size,
        });
    }
    Ok(())
}

/// Coined walk: each round applies `H` to the coin, then moves `x` down
/// when the coin is 0 and up when it is 1. The coin starts at 0.
pub fn hadamard_walk_reference(iterations: u32, x0: u64, word_size: u32) -> Result<WalkReference, OracleError> {
    check_walk_bounds(iterations, x0, word_size)?;
    let mut psi: WalkVector = BTreeMap::from([((x0, 0), Complex64::new(1.0, 0.0))]);
    let mut rounds = Vec::with_capacity(iterations as usize);
    for _ in 0..iterations {
        let round = walk_round(&psi);
        psi = round.after_shift.clone();
        rounds.push(round);
    }
    let mut distribution = BTreeMap::new();
    for (&(x, _), a) in &psi {
        *distribution.entry(x).or_insert(0.0) += a.norm_sqr();
    }
    Ok(WalkReference {
        rounds,
        amplitudes: psi,
        distribution,
    })
}

/// The `iterations`-round walk as a map over registers `[x, c]`, defined on
/// every start position that cannot wrap around.
pub fn hadamard_walk_map(word_size: u32, iterations: u32) -> OracleMatrix {
    let top = word_mask(word_size);
    let mut columns = BTreeMap::new();
    for x0 in 0..=top {
        for c0 in 0..2u64 {
            let column = check_walk_bounds(iterations, x0, word_size).ok().map(|_| {
                let mut psi: WalkVector = BTreeMap::from([((x0, c0), Complex64::new(1.0, 0.0))]);
                for _ in 0..iterations {
                    psi = walk_round(&psi).after_shift;
                }
                psi.into_iter().map(|((x, c), a)| (vec![x, c], a)).collect()
            });
            columns.insert(vec![x0, c0], column);
        }
    }
    OracleMatrix {
        registers: vec!["x".into(), "c".into()],
        word_size,
        columns,
        completed: BTreeSet::new(),
        description: format!("Hadamard walk, k={word_size}, {iterations} rounds"),
    }
}

/// Exact distribution of an unbiased ±1 random walk by path counting.
pub fn classical_walk_reference(iterations: u32, x0: i64) -> Result<BTreeMap<i64, f64>, OracleError> {
    if iterations > 60 {
        return Err(OracleError::Parameter(format!("{iterations} iterations is too many")));
    }
    let total = 2f64.powi(iterations as i32);
    let mut binom: u64 = 1;
    let mut out = BTreeMap::new();
    for up in 0..=iterations as u64 {
        let x = x0 - iterations as i64 + 2 * up as i64;
        out.insert(x, binom as f64 / total);
        binom = binom * (iterations as u64 - up) / (up + 1);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn image(m: &OracleMatrix, input: &[u64]) -> Vec<u64> {
        let col = m.column(input).unwrap();
        assert_eq!(col.len(), 1);
        col.keys().next().unwrap().clone()
    }

    #[test]
    fn conditional_increment_truth_table() {
        let m = conditional_increment(1);
        assert_eq!(image(&m, &[0, 0]), [0, 1]);
        assert_eq!(image(&m, &[0, 1]), [0, 0]);
        assert_eq!(image(&m, &[1, 0]), [1, 0]);
        assert_eq!(image(&m, &[1, 1]), [1, 1]);
        let m3 = conditional_increment(3);
        assert_eq!(image(&m3, &[0, 3]), [0, 4]);
        assert_eq!(image(&m3, &[3, 0]), [4, 0]);
        for k in 1..=4 {
            assert!(conditional_increment(k).is_unitary(1e-12));
        }
    }

    #[test]
    fn exponentiation_cells() {
        let m = exponentiation_map(4, 2).unwrap();
        assert_eq!(image(&m, &[2, 1, 0, 0]), [2, 1, 2, 0]);
        assert_eq!(image(&m, &[2, 2, 0, 0]), [2, 2, 4, 0]);
        assert_eq!(image(&m, &[5, 0, 0, 0]), [5, 0, 1, 0]);
        assert!(m.column(&[2, 3, 0, 0]).is_none());
        assert!(m.column(&[4, 2, 0, 0]).is_none());
        assert!(m.is_unitary(1e-12));
    }

    #[test]
    fn majorana_small_cases() {
        let y = majorana_unitary(1, 0).unwrap();
        let i = Complex64::new(0.0, 1.0);
        assert_eq!(y.column(&[0]).unwrap()[&vec![1]], i);
        assert_eq!(y.column(&[1]).unwrap()[&vec![0]], -i);
        let yz = majorana_unitary(2, 1).unwrap();
        // |x=1⟩ = |b1=0, b0=1⟩ ↦ Y|0⟩ ⊗ Z|1⟩ = −i|1⟩|1⟩
        assert_eq!(yz.column(&[1]).unwrap()[&vec![3]], -i);
        let y0 = majorana_unitary(2, 0).unwrap();
        assert_eq!(y0.column(&[2]).unwrap()[&vec![3]], i);
        for k in 1..=4 {
            for bit in 0..k {
                assert!(majorana_unitary(k, bit).unwrap().is_unitary(1e-12));
            }
        }
        assert!(majorana_unitary(2, 2).is_err());
    }

    #[test]
    fn hadamard_walk_three_steps() {
        let w = hadamard_walk_reference(3, 3, 4).unwrap();
        let expect = [(0, 0.125), (2, 0.625), (4, 0.125), (6, 0.125)];
        assert_eq!(w.distribution.len(), 4);
        for (x, p) in expect {
            assert!((w.probability(x) - p).abs() < 1e-12, "x={x}");
        }
        let third = &w.rounds[2].after_coin;
        assert!(third.get(&(3, 1)).map_or(0.0, |a| a.norm()) < 1e-12);
        assert!((w.rounds[0].after_coin[&(3, 1)] - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        let total: f64 = w.distribution.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(hadamard_walk_reference(0, 3, 4).unwrap().distribution, BTreeMap::from([(3, 1.0)]));
        assert!(hadamard_walk_reference(4, 3, 4).is_err());
    }

    #[test]
    fn walk_map_is_unitary_where_defined() {
        let m = hadamard_walk_map(4, 2);
        assert!(m.is_unitary(1e-12));
        assert!(m.column(&[1, 0]).is_none());
        let col = m.column(&[3, 0]).unwrap();
        let reference = hadamard_walk_reference(2, 3, 4).unwrap();
        for ((x, c), a) in &reference.amplitudes {
            assert!((col[&vec![*x, *c]] - a).norm() < 1e-15);
        }
    }

    #[test]
    fn classical_walk_is_binomial() {
        let d = classical_walk_reference(3, 3).unwrap();
        assert_eq!(d, BTreeMap::from([(0, 0.125), (2, 0.375), (4, 0.375), (6, 0.125)]));
        assert_eq!(classical_walk_reference(0, 3).unwrap(), BTreeMap::from([(3, 1.0)]));
        assert_eq!(classical_walk_reference(1, 3).unwrap(), BTreeMap::from([(2, 0.5), (4, 0.5)]));
    }
}
