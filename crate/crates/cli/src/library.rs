//! The built-in toy endmember library and external library loading.

use std::path::Path;

use anyhow::{Context, Result};
use pnmf_core::io::{load_endmember_csv, parse_endmember_csv};
use pnmf_core::Endmembers;

/// Four smooth synthetic reflectance spectra (vegetation-, soil-, water- and
/// mineral-like), 224 samples each, built from sums of Gaussian bumps.
pub const TOY_LIBRARY_CSV: &str = include_str!("../data/toy_library.csv");

pub fn toy_library() -> Endmembers {
    parse_endmember_csv(TOY_LIBRARY_CSV).expect("built-in library is valid")
}

pub fn load(path: Option<&Path>) -> Result<Endmembers> {
    match path {
        Some(p) => load_endmember_csv(p).with_context(|| format!("loading endmember library {}", p.display())),
        None => Ok(toy_library()),
    }
}
