use super::OracleError;
use crate::model::SocSpec;
use crate::scheduler::{build_rectangle_sets, compute_t_min, RectangleSet, ScheduleState, TestSchedule};
use crate::wrapper::WrapperConfig;

pub const MAX_ORACLE_CORES: usize = 6;
/// Cap on the product of rectangle-set sizes.
pub const MAX_ORACLE_COMBINATIONS: u128 = 100_000;

pub fn exact_schedule(
    soc: &SocSpec,
    w_max: u32,
    config: &WrapperConfig,
) -> Result<TestSchedule, OracleError> {
    let sets = build_rectangle_sets(soc, w_max, config)?;
    exact_schedule_rectangles(soc, &sets, w_max)
}

/// Minimum-makespan schedule using one rectangle per core.
///
/// Enumerates every rectangle choice and every core order, placing each core
/// at the earliest instant its wires are free for its whole duration. Every
/// active schedule arises from some order, so the best one found is optimal.
/// Branches whose lower bound cannot beat the incumbent are cut; among equal
/// makespans the first found in (core id, tallest rectangle) order wins.
pub fn exact_schedule_rectangles(
    soc: &SocSpec,
    sets: &[RectangleSet],
    w_max: u32,
) -> Result<TestSchedule, OracleError> {
    if sets.len() > MAX_ORACLE_CORES {
        return Err(OracleError::TooManyCores(sets.len()));
    }
    let combinations: u128 = sets.iter().map(|s| s.rects.len() as u128).product();
    if combinations > MAX_ORACLE_COMBINATIONS {
        return Err(OracleError::TooManyCombinations(combinations));
    }

    let mut search = Search {
        sets,
        w_max: u64::from(w_max),
        min_area: sets
            .iter()
            .map(|s| s.rects.iter().map(|r| u64::from(r.height) * r.width).min().unwrap_or(0))
            .collect(),
        min_time: sets.iter().map(|s| s.rects.iter().map(|r| r.width).min().unwrap_or(0)).collect(),
        placed: Vec::with_capacity(sets.len()),
        choice: vec![None; sets.len()],
        best: None,
    };
    search.descend(0, 0);
    let (_, choice) = search.best.expect("a full-width serial schedule always exists");

    let mut state = ScheduleState::new(soc, sets, w_max, compute_t_min(sets));
    let mut order: Vec<(u64, usize, u32)> = choice.iter().enumerate().map(|(i, c)| (c.1, i, c.0)).collect();
    order.sort_unstable();
    // Replays the placements through the builder so its checks apply; starts
    // are visited in time order with wires reclaimed in between.
    let mut running: Vec<(u64, u32)> = Vec::new();
    for (start, index, width) in order {
        running.retain(|&(finish, w)| {
            if finish <= start {
                state.w_avail += w;
                false
            } else {
                true
            }
        });
        state.now = start;
        state.apply_assignment(index as u32 + 1, width);
        running.push((state.schedule.slots[index].finish, width));
    }
    for slot in &mut state.schedule.slots {
        slot.complete = true;
    }
    let mut schedule = state.schedule;
    schedule.finalize();
    Ok(schedule)
}

struct Search<'a> {
    sets: &'a [RectangleSet],
    w_max: u64,
    min_area: Vec<u64>,
    min_time: Vec<u64>,
    /// `(start, finish, width)` of placed cores.
    placed: Vec<(u64, u64, u64)>,
    /// `(width, start)` per core.
    choice: Vec<Option<(u32, u64)>>,
    best: Option<(u64, Vec<(u32, u64)>)>,
}

impl Search<'_> {
    fn incumbent(&self) -> u64 {
        self.best.as_ref().map_or(u64::MAX, |b| b.0)
    }

    fn descend(&mut self, area: u64, makespan: u64) {
        if self.placed.len() == self.sets.len() {
            if makespan < self.incumbent() {
                self.best = Some((makespan, self.choice.iter().map(|c| c.unwrap()).collect()));
            }
            return;
        }
        let (mut rest_area, mut rest_time) = (0, 0);
        for (i, c) in self.choice.iter().enumerate() {
            if c.is_none() {
                rest_area += self.min_area[i];
                rest_time = rest_time.max(self.min_time[i]);
            }
        }
        let bound = makespan.max(rest_time).max((area + rest_area).div_ceil(self.w_max));
        if bound >= self.incumbent() {
            return;
        }
        for i in 0..self.sets.len() {
            if self.choice[i].is_some() {
                continue;
            }
            for r in &self.sets[i].rects {
                let height = u64::from(r.height);
                let start = self.earliest_start(height, r.width);
                let finish = start + r.width;
                if finish >= self.incumbent() {
                    continue;
                }
                self.placed.push((start, finish, height));
                self.choice[i] = Some((r.height, start));
                self.descend(area + height * r.width, makespan.max(finish));
                self.choice[i] = None;
                self.placed.pop();
            }
        }
    }

    fn earliest_start(&self, height: u64, duration: u64) -> u64 {
        let mut candidates: Vec<u64> = self.placed.iter().map(|p| p.1).collect();
        candidates.push(0);
        candidates.sort_unstable();
        candidates.dedup();
        candidates
            .into_iter()
            .find(|&t| self.fits(t, t + duration, height))
            .expect("after every placed core finishes the bin is empty")
    }

    /// Load only rises at starts, so `[from, to)` is checked at `from` and at
    /// every placed start inside it.
    fn fits(&self, from: u64, to: u64, height: u64) -> bool {
        let load_at =
            |x: u64| -> u64 { self.placed.iter().filter(|p| p.0 <= x && x < p.1).map(|p| p.2).sum() };
        std::iter::once(from)
            .chain(self.placed.iter().map(|p| p.0).filter(|&s| from < s && s < to))
            .all(|x| load_at(x) + height <= self.w_max)
    }
}
