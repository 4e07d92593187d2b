//! Model sources shipped with the crate.

use crate::lang::{parse_program, validate_among, Diagnostic, OracleProgram, ParseError};

macro_rules! bundle {
    ($($path:literal),* $(,)?) => {
        /// `(path relative to models/, source)` for every bundled model.
        pub const BUNDLED: &[(&str, &str)] = &[
            $(($path, include_str!(concat!("../../models/", $path)))),*
        ];
    };
}

bundle!(
    "commit_real.ocl",
    "commit_dummy.ocl",
    "commit_func.ocl",
    "commit_sim.ocl",
    "commit_sim_blind.ocl",
    "commit_sim_silent.ocl",
    "wg_real.ocl",
    "wg_dummy.ocl",
    "wg_func.ocl",
    "wg_sim.ocl",
    "wg_leaky.ocl",
    "wg_g1_elided.ocl",
    "wg_g2_ctxt.ocl",
    "wg_g3_lookup.ocl",
    "wg_g4_cpa.ocl",
    "wg_g5_nokeys.ocl",
    "wg_g6_tags.ocl",
    "toy/prg_zero.ocl",
    "toy/prg_one.ocl",
    "toy/prg_coin.ocl",
    "toy/prg_notcoin.ocl",
    "toy/ctx_silent.ocl",
    "toy/ctx_one.ocl",
    "toy/ctx_leak.ocl",
    "toy/ctx_leakneg.ocl",
    "toy/ctx_heavy.ocl",
    "undeclared_read.ocl",
);

/// Source of a bundled model.
pub fn source(path: &str) -> &'static str {
    BUNDLED
        .iter()
        .find(|(p, _)| *p == path)
        .map(|(_, s)| *s)
        .unwrap_or_else(|| panic!("no bundled model `{path}`"))
}

pub fn parse(path: &str) -> Result<OracleProgram, ParseError> {
    parse_program(source(path))
}

/// Parses a bundled model known to be well formed.
pub fn load(path: &str) -> OracleProgram {
    parse(path).unwrap_or_else(|e| panic!("bundled model `{path}`: {e}"))
}

/// Diagnostics of `path` when checked next to its partners.
pub fn diagnostics(path: &str, partners: &[&str]) -> Vec<Diagnostic> {
    let others: Vec<OracleProgram> = partners.iter().map(|p| load(p)).collect();
    let refs: Vec<&OracleProgram> = others.iter().collect();
    validate_among(&load(path), &refs)
}
