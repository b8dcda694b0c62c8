//! Benchmark descriptions shipped with the crate.

use crate::model::SocSpec;
use crate::parse::{parse, InputFormat};

pub const D695_CANONICAL: &str = include_str!("../data/d695.soc");
pub const D695_ITC02: &str = include_str!("../data/d695.itc02");
pub const P93791_M6_CANONICAL: &str = include_str!("../data/p93791_m6.soc");
pub const P93791_M6_ITC02: &str = include_str!("../data/p93791_m6.itc02");

pub fn d695() -> SocSpec {
    parse(D695_CANONICAL, InputFormat::Canonical).expect("bundled d695 parses").soc
}

/// Module 6 of p93791 as a one-core SOC.
pub fn p93791_m6() -> SocSpec {
    parse(P93791_M6_CANONICAL, InputFormat::Canonical).expect("bundled p93791 module parses").soc
}
