#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

use proptest::prelude::*;
use soctam::model::{CoreSpec, SocSpec};
use soctam::scheduler::Assignment;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn soctam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_soctam")).args(args).output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 stdout")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8 stderr")
}

/// Cycle-by-cycle wire count; `true` when `w_max` is never exceeded.
pub fn replay_capacity_ok(assignments: &[Assignment], w_max: u32) -> bool {
    let end = assignments.iter().map(|a| a.finish).max().unwrap_or(0);
    (0..end).all(|t| {
        let load: u64 =
            assignments.iter().filter(|a| a.start <= t && t < a.finish).map(|a| u64::from(a.width)).sum();
        load <= u64::from(w_max)
    })
}

/// `T = s_i + 1 + (p - 1)(max + 1) + s_o`: first load, p - 1 overlapped
/// shift/capture rounds, last unload.
pub fn test_time_by_phases(p: u64, si: u64, so: u64) -> u128 {
    let (p, si, so) = (u128::from(p), u128::from(si), u128::from(so));
    si + 1 + (p - 1) * (si.max(so) + 1) + so
}

pub fn arb_core(id: u32) -> impl Strategy<Value = CoreSpec> {
    ("[a-z][a-z0-9_]{0,7}", 0u32..80, 0u32..80, 0u32..6, 1u32..300, prop::collection::vec(1u32..400, 0..10))
        .prop_filter_map("nothing to test", move |(name, i, o, b, p, scan)| {
            CoreSpec::new(id, format!("{name}{id}"), i, o, b, p, scan).ok()
        })
}

pub fn arb_soc(max_cores: u32) -> impl Strategy<Value = SocSpec> {
    (1..=max_cores, "[A-Za-z][A-Za-z0-9_.-]{0,10}").prop_flat_map(|(n, name)| {
        let cores: Vec<_> = (1..=n).map(arb_core).collect();
        cores.prop_map(move |cores| SocSpec::new(name.clone(), cores).expect("unique names"))
    })
}
