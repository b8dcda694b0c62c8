//! Rectangle-packing test scheduler.
//!
//! Every core contributes a set of rectangles (height = TAM wires used,
//! width = test cycles). Cores are ranked by the diagonal of their tallest
//! rectangle after dividing all times by the smallest peak-width test time,
//! then placed greedily into a bin of height `w_max`. Wires are fungible:
//! the bin is a cumulative capacity, not a geometric strip.

use std::cmp::Ordering;
use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::model::{CoreSpec, ModelError, SocSpec};
use crate::wrapper::{design_wrapper, WrapperConfig};

/// Relative tolerance for floating-point diagonal comparisons.
pub const DIAGONAL_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestRectangle {
    pub core_id: u32,
    /// TAM wires used.
    pub height: u32,
    /// Test cycles at that width.
    pub width: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectangleSet {
    pub core_id: u32,
    /// Tallest first, heights pairwise distinct.
    pub rects: Vec<TestRectangle>,
    pub peak_tam: u32,
    pub peak_time: u64,
}

impl RectangleSet {
    pub fn heights(&self) -> impl Iterator<Item = u32> + '_ {
        self.rects.iter().map(|r| r.height)
    }

    pub fn time_at(&self, height: u32) -> Option<u64> {
        self.rects.iter().find(|r| r.height == height).map(|r| r.width)
    }

    /// Tallest rectangle that fits in `w_avail` wires.
    pub fn possible_tam(&self, w_avail: u32) -> Option<u32> {
        self.rects.iter().map(|r| r.height).find(|&h| h <= w_avail)
    }
}

/// One rectangle per distinct TAM utilization reachable with `1..=w_max`
/// wires offered. When several offered widths reach the same utilization,
/// the fastest plan is kept.
pub fn build_rectangle_set(
    core: &CoreSpec,
    w_max: u32,
    config: &WrapperConfig,
) -> Result<RectangleSet, ModelError> {
    if w_max == 0 {
        return Err(ModelError::ZeroWidth);
    }
    let mut best: Vec<Option<u64>> = vec![None; w_max as usize + 1];
    for w in 1..=w_max {
        let plan = design_wrapper(core, w, config)?;
        let slot = &mut best[plan.tam_utilized as usize];
        let t = plan.test_time.cycles();
        *slot = Some(slot.map_or(t, |old| old.min(t)));
    }
    let rects: Vec<TestRectangle> = best
        .iter()
        .enumerate()
        .rev()
        .filter_map(|(h, t)| t.map(|width| TestRectangle { core_id: core.id, height: h as u32, width }))
        .collect();
    let tallest = rects[0];
    Ok(RectangleSet { core_id: core.id, peak_tam: tallest.height, peak_time: tallest.width, rects })
}

pub fn build_rectangle_sets(
    soc: &SocSpec,
    w_max: u32,
    config: &WrapperConfig,
) -> Result<Vec<RectangleSet>, ModelError> {
    soc.cores.iter().map(|c| build_rectangle_set(c, w_max, config)).collect()
}

/// Smallest peak-width test time over all cores.
pub fn compute_t_min(sets: &[RectangleSet]) -> u64 {
    sets.iter().map(|s| s.peak_time).min().expect("at least one core")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalKey {
    pub core_id: u32,
    pub peak_tam: u32,
    pub normalized_time: f64,
    pub diagonal: f64,
    /// `(peak_time, t_min)` when the key came from integer cycle counts, so
    /// that comparisons can be done exactly.
    #[serde(skip)]
    exact: Option<(u64, u64)>,
}

impl DiagonalKey {
    pub fn new(core_id: u32, peak_tam: u32, peak_time: u64, t_min: u64) -> Self {
        assert!(t_min > 0, "t_min must be positive");
        let normalized_time = peak_time as f64 / t_min as f64;
        Self {
            core_id,
            peak_tam,
            normalized_time,
            diagonal: f64::from(peak_tam).hypot(normalized_time),
            exact: Some((peak_time, t_min)),
        }
    }

    /// A key whose time is already divided by `t_min`.
    pub fn from_normalized(core_id: u32, peak_tam: u32, normalized_time: f64) -> Self {
        Self {
            core_id,
            peak_tam,
            normalized_time,
            diagonal: f64::from(peak_tam).hypot(normalized_time),
            exact: None,
        }
    }

    /// `diagonal² · t_min²` as an integer, if it fits.
    fn scaled_square(&self, t_min: u64) -> Option<u128> {
        let (time, _) = self.exact?;
        let h = u128::from(self.peak_tam);
        let t = u128::from(t_min);
        let time = u128::from(time);
        h.checked_mul(h)?.checked_mul(t)?.checked_mul(t)?.checked_add(time.checked_mul(time)?)
    }

    fn compare_diagonal(&self, other: &Self) -> Ordering {
        if let (Some((_, ta)), Some((_, tb))) = (self.exact, other.exact) {
            if ta == tb {
                if let (Some(a), Some(b)) = (self.scaled_square(ta), other.scaled_square(tb)) {
                    return a.cmp(&b);
                }
            }
        }
        let (a, b) = (self.diagonal, other.diagonal);
        if (a - b).abs() <= DIAGONAL_EPSILON * a.abs().max(b.abs()) {
            Ordering::Equal
        } else {
            a.total_cmp(&b)
        }
    }
}

pub fn diagonal_keys(sets: &[RectangleSet], t_min: u64) -> Vec<DiagonalKey> {
    sets.iter().map(|s| DiagonalKey::new(s.core_id, s.peak_tam, s.peak_time, t_min)).collect()
}

/// Core ids by descending diagonal; ties go to the taller rectangle, then
/// to the lower id.
pub fn diagonal_order(keys: &[DiagonalKey]) -> Vec<u32> {
    let mut sorted: Vec<&DiagonalKey> = keys.iter().collect();
    sorted.sort_by(|a, b| {
        b.compare_diagonal(a).then(b.peak_tam.cmp(&a.peak_tam)).then(a.core_id.cmp(&b.core_id))
    });
    sorted.into_iter().map(|k| k.core_id).collect()
}

/// Per-core record of the schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreSlot {
    pub core_id: u32,
    pub name: String,
    /// TAM wires assigned.
    pub width: u32,
    pub start: u64,
    pub finish: u64,
    pub scheduled: bool,
    pub complete: bool,
    pub peak_tam: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestSchedule {
    pub soc: String,
    pub w_max: u32,
    pub t_min: u64,
    pub makespan: u64,
    /// Wire-cycles left unused inside the `w_max × makespan` bin.
    pub idle_area: u64,
    /// Indexed by `core_id - 1`.
    pub slots: Vec<CoreSlot>,
}

/// One core's placement in interchange form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub core: u32,
    #[serde(default)]
    pub name: String,
    pub width: u32,
    /// Signed so that malformed input can be reported, not rejected.
    pub start: i64,
    pub finish: i64,
}

impl TestSchedule {
    pub fn assignments(&self) -> Vec<Assignment> {
        self.slots
            .iter()
            .filter(|s| s.scheduled)
            .map(|s| Assignment {
                core: s.core_id,
                name: s.name.clone(),
                width: s.width,
                start: i64::try_from(s.start).unwrap_or(i64::MAX),
                finish: i64::try_from(s.finish).unwrap_or(i64::MAX),
            })
            .collect()
    }

    pub fn slot(&self, core_id: u32) -> &CoreSlot {
        &self.slots[core_id as usize - 1]
    }

    pub fn busy_area(&self) -> u64 {
        self.slots.iter().map(|s| u64::from(s.width) * s.finish.saturating_sub(s.start)).sum()
    }

    pub fn utilization(&self) -> f64 {
        if self.makespan == 0 {
            return 0.0;
        }
        self.busy_area() as f64 / (f64::from(self.w_max) * self.makespan as f64)
    }

    /// Recomputes makespan and idle area from the slots.
    pub fn finalize(&mut self) {
        self.makespan = self.slots.iter().map(|s| s.finish).max().unwrap_or(0);
        self.idle_area = (u64::from(self.w_max) * self.makespan).saturating_sub(self.busy_area());
    }
}

/// What the scheduling loop did, in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TraceEvent {
    Start {
        time: u64,
        core: u32,
        width: u32,
        from_pending: bool,
    },
    Deferred {
        time: u64,
        core: u32,
    },
    /// Free wires left unused until the next finish.
    Idle {
        time: u64,
        free: u32,
    },
    Advance {
        time: u64,
        free: u32,
    },
}

/// Mutable state of the scheduling loop: the schedule under construction,
/// the clock, and the free wires.
pub struct ScheduleState<'a> {
    sets: &'a [RectangleSet],
    pub schedule: TestSchedule,
    pub now: u64,
    pub w_avail: u32,
}

impl<'a> ScheduleState<'a> {
    pub fn new(soc: &SocSpec, sets: &'a [RectangleSet], w_max: u32, t_min: u64) -> Self {
        let slots = soc
            .cores
            .iter()
            .zip(sets)
            .map(|(core, set)| CoreSlot {
                core_id: core.id,
                name: core.name.clone(),
                width: 0,
                start: 0,
                finish: 0,
                scheduled: false,
                complete: false,
                peak_tam: set.peak_tam,
            })
            .collect();
        Self {
            sets,
            schedule: TestSchedule { soc: soc.name.clone(), w_max, t_min, makespan: 0, idle_area: 0, slots },
            now: 0,
            w_avail: w_max,
        }
    }

    fn set(&self, core_id: u32) -> &RectangleSet {
        &self.sets[core_id as usize - 1]
    }

    /// Starts `core_id` now on `width` wires.
    ///
    /// Panics if the core is already scheduled, `width` is not one of its
    /// rectangle heights, or fewer than `width` wires are free.
    pub fn apply_assignment(&mut self, core_id: u32, width: u32) {
        let duration = self
            .set(core_id)
            .time_at(width)
            .unwrap_or_else(|| panic!("core {core_id} has no rectangle of height {width}"));
        assert!(width <= self.w_avail, "core {core_id}: {width} wires requested, {} free", self.w_avail);
        let now = self.now;
        let slot = &mut self.schedule.slots[core_id as usize - 1];
        assert!(!slot.scheduled, "core {core_id} scheduled twice");
        slot.start = now;
        slot.scheduled = true;
        slot.finish = now + duration;
        slot.width = width;
        self.w_avail -= width;
    }

    /// Moves the clock to the next finish time and frees the wires of every
    /// core ending then.
    fn advance(&mut self) {
        let next = self
            .schedule
            .slots
            .iter()
            .filter(|s| s.scheduled && !s.complete && s.finish > self.now)
            .map(|s| s.finish)
            .min()
            .expect("scheduler stalled with no running test");
        self.now = next;
        for slot in &mut self.schedule.slots {
            if slot.scheduled && !slot.complete && slot.finish == next {
                slot.complete = true;
                self.w_avail += slot.width;
            }
        }
    }

    fn finish(mut self) -> TestSchedule {
        for slot in &mut self.schedule.slots {
            slot.complete = true;
        }
        self.schedule.finalize();
        self.schedule
    }
}

pub fn schedule_tests(soc: &SocSpec, w_max: u32, config: &WrapperConfig) -> Result<TestSchedule, ModelError> {
    let sets = build_rectangle_sets(soc, w_max, config)?;
    Ok(schedule_rectangles(soc, &sets, w_max))
}

/// The greedy placement loop over prepared rectangle sets.
pub fn schedule_rectangles(soc: &SocSpec, sets: &[RectangleSet], w_max: u32) -> TestSchedule {
    schedule_rectangles_traced(soc, sets, w_max).0
}

pub fn schedule_rectangles_traced(
    soc: &SocSpec,
    sets: &[RectangleSet],
    w_max: u32,
) -> (TestSchedule, Vec<TraceEvent>) {
    assert!(w_max >= 1);
    let mut trace = Vec::new();
    let t_min = compute_t_min(sets);
    let mut initial: VecDeque<u32> = diagonal_order(&diagonal_keys(sets, t_min)).into();
    let mut pending: VecDeque<u32> = VecDeque::new();
    let mut state = ScheduleState::new(soc, sets, w_max, t_min);
    let mut idle = false;
    let peak = |id: u32| sets[id as usize - 1].peak_tam;

    while !initial.is_empty() || !pending.is_empty() {
        let now = state.now;
        let start = |state: &mut ScheduleState, trace: &mut Vec<TraceEvent>, core, width, from_pending| {
            state.apply_assignment(core, width);
            trace.push(TraceEvent::Start { time: now, core, width, from_pending });
        };
        if state.w_avail > 0 && !idle {
            if let Some(c) = initial.pop_front() {
                let set = &sets[c as usize - 1];
                if state.w_avail >= set.peak_tam {
                    start(&mut state, &mut trace, c, set.peak_tam, false);
                } else {
                    match set.possible_tam(state.w_avail) {
                        Some(h) if h >= set.peak_tam.div_ceil(2) => {
                            start(&mut state, &mut trace, c, h, false)
                        }
                        _ => {
                            pending.push_back(c);
                            trace.push(TraceEvent::Deferred { time: now, core: c });
                        }
                    }
                }
                if let Some(&p) = pending.front() {
                    if peak(p) <= state.w_avail {
                        start(&mut state, &mut trace, p, peak(p), true);
                        pending.pop_front();
                    }
                }
            } else {
                let p = *pending.front().expect("loop condition");
                if peak(p) <= state.w_avail {
                    start(&mut state, &mut trace, p, peak(p), true);
                    pending.pop_front();
                } else {
                    idle = true;
                    trace.push(TraceEvent::Idle { time: now, free: state.w_avail });
                }
            }
        } else {
            state.advance();
            idle = false;
            trace.push(TraceEvent::Advance { time: state.now, free: state.w_avail });
        }
    }
    (state.finish(), trace)
}
