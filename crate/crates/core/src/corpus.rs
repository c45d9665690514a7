//! Bundled example programs.

use crate::isa::{parse_program, ParseError, Program};

pub const CONDITIONAL_INCREMENT_CLASSICAL: &str = include_str!("../../../figs/fig1-classical.qcm");
pub const CONDITIONAL_INCREMENT: &str = include_str!("../../../figs/fig3.qcm");
pub const EXPONENTIATION: &str = include_str!("../../../figs/fig7-expo.qcm");
pub const EXPONENTIATION_PADDED: &str = include_str!("../../../figs/fig8-expo.qcm");
pub const HADAMARD_WALK: &str = include_str!("../../../figs/walk.qcm");
pub const MAJORANA: &str = include_str!("../../../figs/majorana.qcm");

/// `(file name, source)` for every program that runs on the machine.
pub const MACHINE_PROGRAMS: [(&str, &str); 5] = [
    ("fig3.qcm", CONDITIONAL_INCREMENT),
    ("fig7-expo.qcm", EXPONENTIATION),
    ("fig8-expo.qcm", EXPONENTIATION_PADDED),
    ("walk.qcm", HADAMARD_WALK),
    ("majorana.qcm", MAJORANA),
];

pub fn conditional_increment(word_size: u32) -> Result<Program, ParseError> {
    parse_program(CONDITIONAL_INCREMENT, word_size)
}

pub fn exponentiation(word_size: u32) -> Result<Program, ParseError> {
    parse_program(EXPONENTIATION, word_size)
}

pub fn exponentiation_padded(word_size: u32) -> Result<Program, ParseError> {
    parse_program(EXPONENTIATION_PADDED, word_size)
}

pub fn hadamard_walk(word_size: u32) -> Result<Program, ParseError> {
    parse_program(HADAMARD_WALK, word_size)
}

pub fn majorana(word_size: u32) -> Result<Program, ParseError> {
    parse_program(MAJORANA, word_size)
}
