use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scheduler::{Assignment, RectangleSet, TestSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// More than `w_max` wires in use at some instant.
    Capacity,
    DoubleSchedule,
    /// A core of the SOC has no assignment.
    Unscheduled,
    /// The assignment names a core the SOC does not have.
    UnknownCore,
    /// Width is not a rectangle height of the core, or exceeds `w_max`.
    BadWidth,
    /// `finish - start` differs from the test time at that width.
    BadDuration,
    /// A start or finish before zero, or a finish before its start.
    NegativeTime,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Capacity => "capacity",
            Self::DoubleSchedule => "double-schedule",
            Self::Unscheduled => "unscheduled",
            Self::UnknownCore => "unknown-core",
            Self::BadWidth => "bad-width",
            Self::BadDuration => "bad-duration",
            Self::NegativeTime => "negative-time",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub core: Option<u32>,
    pub time: Option<i64>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    /// Latest finish time over all assignments.
    pub makespan: i64,
    /// Busy wire-cycles over `w_max × makespan`.
    pub utilization: f64,
}

impl ValidationReport {
    pub fn summary(&self) -> String {
        if self.ok {
            return "ok".into();
        }
        self.violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

pub fn validate(schedule: &TestSchedule, sets: &[RectangleSet], w_max: u32) -> ValidationReport {
    validate_assignments(&schedule.assignments(), sets, w_max)
}

/// Checks assignments against the rectangle sets of an SOC whose core ids
/// are `1..=sets.len()`. Capacity is checked with an event sweep over
/// half-open intervals `[start, finish)`.
pub fn validate_assignments(
    assignments: &[Assignment],
    sets: &[RectangleSet],
    w_max: u32,
) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen = vec![false; sets.len()];
    let mut intervals: Vec<(i64, i64, u32, u32)> = Vec::new();

    for a in assignments {
        let core = Some(a.core);
        let Some(set) = (a.core as usize).checked_sub(1).and_then(|i| sets.get(i)) else {
            violations.push(Violation {
                kind: ViolationKind::UnknownCore,
                core,
                time: None,
                message: format!("core {} is not part of the SOC", a.core),
            });
            continue;
        };
        let index = a.core as usize - 1;
        if std::mem::replace(&mut seen[index], true) {
            violations.push(Violation {
                kind: ViolationKind::DoubleSchedule,
                core,
                time: Some(a.start),
                message: format!("core {} is assigned more than once", a.core),
            });
        }
        if a.start < 0 || a.finish < a.start {
            violations.push(Violation {
                kind: ViolationKind::NegativeTime,
                core,
                time: Some(a.start.min(a.finish)),
                message: format!("core {} runs from {} to {}", a.core, a.start, a.finish),
            });
            continue;
        }
        let expected = set.time_at(a.width);
        if a.width > w_max || expected.is_none() {
            let heights: Vec<String> = set.heights().map(|h| h.to_string()).collect();
            violations.push(Violation {
                kind: ViolationKind::BadWidth,
                core,
                time: Some(a.start),
                message: format!(
                    "core {} uses width {}; allowed {{{}}} up to {w_max}",
                    a.core,
                    a.width,
                    heights.join(",")
                ),
            });
        }
        if let Some(t) = expected {
            let duration = a.finish - a.start;
            if i64::try_from(t).ok() != Some(duration) {
                violations.push(Violation {
                    kind: ViolationKind::BadDuration,
                    core,
                    time: Some(a.start),
                    message: format!(
                        "core {} lasts {duration} cycles at width {}; expected {t}",
                        a.core, a.width
                    ),
                });
            }
        }
        intervals.push((a.start, a.finish, a.width, a.core));
    }

    for (i, done) in seen.iter().enumerate() {
        if !done {
            violations.push(Violation {
                kind: ViolationKind::Unscheduled,
                core: Some(i as u32 + 1),
                time: None,
                message: format!("core {} is never scheduled", i + 1),
            });
        }
    }

    violations.extend(capacity_violations(&intervals, w_max));

    let makespan = assignments.iter().map(|a| a.finish).max().unwrap_or(0).max(0);
    let busy: f64 = intervals.iter().map(|&(s, f, w, _)| f64::from(w) * (f - s) as f64).sum();
    let utilization = if makespan > 0 { busy / (f64::from(w_max) * makespan as f64) } else { 0.0 };
    ValidationReport { ok: violations.is_empty(), violations, makespan, utilization }
}

/// One violation per maximal stretch of time over capacity.
fn capacity_violations(intervals: &[(i64, i64, u32, u32)], w_max: u32) -> Vec<Violation> {
    // (time, is_start, index); releases sort before acquisitions.
    let mut events: Vec<(i64, bool, usize)> = Vec::with_capacity(intervals.len() * 2);
    for (i, &(s, f, _, _)) in intervals.iter().enumerate() {
        if f > s {
            events.push((s, true, i));
            events.push((f, false, i));
        }
    }
    events.sort_unstable();

    let mut out = Vec::new();
    let mut active = BTreeSet::new();
    let mut load: u64 = 0;
    let mut over = false;
    let mut k = 0;
    while k < events.len() {
        let t = events[k].0;
        while k < events.len() && events[k].0 == t {
            let (_, is_start, i) = events[k];
            let w = u64::from(intervals[i].2);
            if is_start {
                load += w;
                active.insert(intervals[i].3);
            } else {
                load -= w;
                active.remove(&intervals[i].3);
            }
            k += 1;
        }
        let now_over = load > u64::from(w_max);
        if now_over && !over {
            let cores: Vec<String> = active.iter().map(|c| c.to_string()).collect();
            out.push(Violation {
                kind: ViolationKind::Capacity,
                core: None,
                time: Some(t),
                message: format!(
                    "{load} wires in use at cycle {t} (cores {}); limit {w_max}",
                    cores.join(",")
                ),
            });
        }
        over = now_over;
    }
    out
}
