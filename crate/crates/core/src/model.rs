//! Domain types shared by the wrapper designer, the scheduler and the parsers.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised when constructing or evaluating model values.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("core `{0}` has zero test patterns")]
    ZeroPatterns(String),
    #[error("core `{core}` has a scan chain of length 0 at position {index}")]
    ZeroLengthChain { core: String, index: usize },
    #[error("core `{0}` has no functional I/O and no scan chains; nothing to test")]
    NothingToTest(String),
    #[error("invalid name `{0}`: names must be non-empty and contain no whitespace or `#`")]
    InvalidName(String),
    #[error("duplicate core name `{0}`")]
    DuplicateCore(String),
    #[error("core ids must be contiguous from 1; found {found} at position {position}")]
    NonContiguousIds { position: usize, found: u32 },
    #[error("an SOC needs at least one core")]
    EmptySoc,
    #[error("test time overflows 64-bit cycle counter")]
    Overflow,
    #[error("pattern count must be at least 1")]
    NoPatterns,
    #[error("TAM width must be at least 1")]
    ZeroWidth,
}

pub(crate) fn valid_name(name: &str) -> bool {
    !name.is_empty() && !name.chars().any(|c| c.is_whitespace() || c == '#')
}

/// Testability parameters of one embedded core.
///
/// Bidirectional pins receive a wrapper cell on the input side and one on
/// the output side.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoreSpec {
    pub id: u32,
    pub name: String,
    pub num_inputs: u32,
    pub num_outputs: u32,
    pub num_bidirs: u32,
    pub num_patterns: u32,
    pub scan_chain_lengths: Vec<u32>,
}

impl CoreSpec {
    pub fn new(
        id: u32,
        name: impl Into<String>,
        num_inputs: u32,
        num_outputs: u32,
        num_bidirs: u32,
        num_patterns: u32,
        scan_chain_lengths: Vec<u32>,
    ) -> Result<Self, ModelError> {
        let core = Self {
            id,
            name: name.into(),
            num_inputs,
            num_outputs,
            num_bidirs,
            num_patterns,
            scan_chain_lengths,
        };
        core.check()?;
        Ok(core)
    }

    pub fn check(&self) -> Result<(), ModelError> {
        if !valid_name(&self.name) {
            return Err(ModelError::InvalidName(self.name.clone()));
        }
        if self.num_patterns == 0 {
            return Err(ModelError::ZeroPatterns(self.name.clone()));
        }
        if let Some(index) = self.scan_chain_lengths.iter().position(|&l| l == 0) {
            return Err(ModelError::ZeroLengthChain { core: self.name.clone(), index });
        }
        if self.scan_chain_lengths.is_empty() && self.io_cells() == 0 {
            return Err(ModelError::NothingToTest(self.name.clone()));
        }
        Ok(())
    }

    /// A core without internal scan chains.
    pub fn is_combinational(&self) -> bool {
        self.scan_chain_lengths.is_empty()
    }

    /// Wrapper cells on the scan-in side: functional inputs plus bidirs.
    pub fn input_cells(&self) -> u64 {
        u64::from(self.num_inputs) + u64::from(self.num_bidirs)
    }

    /// Wrapper cells on the scan-out side: functional outputs plus bidirs.
    pub fn output_cells(&self) -> u64 {
        u64::from(self.num_outputs) + u64::from(self.num_bidirs)
    }

    /// All wrapper cells, `I + O + 2B`.
    pub fn io_cells(&self) -> u64 {
        self.input_cells() + self.output_cells()
    }

    pub fn total_scan_length(&self) -> u64 {
        self.scan_chain_lengths.iter().map(|&l| u64::from(l)).sum()
    }

    /// Length of the wrapper chain obtained when every scanned element of
    /// the core is concatenated onto one TAM wire.
    pub fn single_chain_length(&self) -> u64 {
        self.input_cells().max(self.output_cells()) + self.total_scan_length()
    }
}

/// A named collection of cores with ids `1..=N` in file order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SocSpec {
    pub name: String,
    pub cores: Vec<CoreSpec>,
}

impl SocSpec {
    pub fn new(name: impl Into<String>, cores: Vec<CoreSpec>) -> Result<Self, ModelError> {
        let soc = Self { name: name.into(), cores };
        soc.check()?;
        Ok(soc)
    }

    pub fn check(&self) -> Result<(), ModelError> {
        if !valid_name(&self.name) {
            return Err(ModelError::InvalidName(self.name.clone()));
        }
        if self.cores.is_empty() {
            return Err(ModelError::EmptySoc);
        }
        let mut names = HashSet::new();
        for (position, core) in self.cores.iter().enumerate() {
            core.check()?;
            if core.id as usize != position + 1 {
                return Err(ModelError::NonContiguousIds { position, found: core.id });
            }
            if !names.insert(core.name.as_str()) {
                return Err(ModelError::DuplicateCore(core.name.clone()));
            }
        }
        Ok(())
    }

    pub fn core(&self, id: u32) -> Option<&CoreSpec> {
        id.checked_sub(1).and_then(|i| self.cores.get(i as usize))
    }

    /// Resolves a selector: an exact core name first, then a numeric id.
    pub fn select(&self, selector: &str) -> Option<&CoreSpec> {
        self.cores
            .iter()
            .find(|c| c.name == selector)
            .or_else(|| selector.parse().ok().and_then(|id| self.core(id)))
    }
}

/// Test application time of a core, in clock cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TestTime(pub u64);

impl TestTime {
    pub fn cycles(self) -> u64 {
        self.0
    }
}

impl fmt::Display for TestTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Scan-based test time `p * (1 + max(si, so)) + min(si, so)`.
///
/// Every pattern needs the longer of the load/unload shifts plus one capture
/// cycle, and the final response unload overlaps nothing.
pub fn compute_test_time(patterns: u64, scan_in: u64, scan_out: u64) -> Result<TestTime, ModelError> {
    if patterns == 0 {
        return Err(ModelError::NoPatterns);
    }
    let longest = scan_in.max(scan_out);
    let shortest = scan_in.min(scan_out);
    longest
        .checked_add(1)
        .and_then(|per_pattern| per_pattern.checked_mul(patterns))
        .and_then(|t| t.checked_add(shortest))
        .map(TestTime)
        .ok_or(ModelError::Overflow)
}
