//! Wrapper scan-chain construction for a single core under a TAM width cap.
//!
//! Sequential cores: internal scan chains are packed, longest first, into
//! wrapper chains bounded by `ceil(total / max(1, w/2))` scanned elements.
//! Wrapper input and output cells are then added one at a time to the
//! currently shortest chain. Combinational cores either connect every
//! wrapper cell directly to the TAM or are chained over `w` wires.

use serde::{Deserialize, Serialize};

use crate::model::{compute_test_time, CoreSpec, ModelError, TestTime};

/// How internal scan chains are placed onto existing wrapper chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Packing {
    /// The chain whose length after the assignment is largest without
    /// exceeding the bound.
    #[default]
    BestFit,
    /// The first chain, in creation order, with room left.
    FirstFit,
}

/// How wrapper I/O cells are added after the internal chains are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum IoPadding {
    /// Shortest chain first; when the shortest chain already reaches the
    /// longest internal chain, open a new wrapper chain while wires remain.
    #[default]
    GrowWithinCap,
    /// Shortest chain first; never open new chains.
    Balance,
}

/// Which I/O cell count enters the packing bound's scanned-element total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TotalIo {
    /// `I + O + 2B`
    #[default]
    BothSides,
    /// `max(I + B, O + B)`, i.e. the single-chain length.
    SingleChain,
    /// `I + O`, bidirs ignored.
    PinsOnly,
}

/// Scan timing of a combinational core chained over fewer wires than cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CombinationalTiming {
    /// `s_i = ceil((I+B)/w)`, `s_o = ceil((O+B)/w)`
    #[default]
    SplitSides,
    /// `s_i = s_o = ceil((I+O+2B)/w)`
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct WrapperConfig {
    pub packing: Packing,
    pub io_padding: IoPadding,
    pub total_io: TotalIo,
    pub combinational: CombinationalTiming,
}

/// One wrapper scan chain, fed by one TAM wire.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WrapperChain {
    pub internal_lengths: Vec<u32>,
    pub input_cells: u64,
    pub output_cells: u64,
}

impl WrapperChain {
    pub fn internal_length(&self) -> u64 {
        self.internal_lengths.iter().map(|&l| u64::from(l)).sum()
    }

    pub fn scan_in_length(&self) -> u64 {
        self.input_cells + self.internal_length()
    }

    pub fn scan_out_length(&self) -> u64 {
        self.output_cells + self.internal_length()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WrapperPlan {
    pub core_id: u32,
    pub w_max: u32,
    pub chains: Vec<WrapperChain>,
    pub tam_utilized: u32,
    pub s_i: u64,
    pub s_o: u64,
    pub test_time: TestTime,
    /// Packing bound used for sequential cores; `None` for combinational.
    pub peak_scan_element: Option<u64>,
}

impl WrapperPlan {
    pub fn longest_chain(&self) -> u64 {
        self.s_i.max(self.s_o)
    }

    /// The triple that determines both the rectangle and the band a plan
    /// belongs to.
    pub fn signature(&self) -> (u32, u64, u64) {
        (self.tam_utilized, self.s_i, self.s_o)
    }
}

fn ceil_div(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

/// Splits `cells` as evenly as possible over `slots`, larger shares first.
fn spread(cells: u64, slots: usize) -> impl Iterator<Item = u64> {
    let q = cells / slots as u64;
    let r = (cells % slots as u64) as usize;
    (0..slots).map(move |k| q + u64::from(k < r))
}

/// Builds the wrapper for `core` with at most `w_max` TAM wires.
pub fn design_wrapper(
    core: &CoreSpec,
    w_max: u32,
    config: &WrapperConfig,
) -> Result<WrapperPlan, ModelError> {
    if w_max == 0 {
        return Err(ModelError::ZeroWidth);
    }
    if core.is_combinational() {
        combinational(core, w_max, config)
    } else {
        sequential(core, w_max, config)
    }
}

fn combinational(core: &CoreSpec, w_max: u32, config: &WrapperConfig) -> Result<WrapperPlan, ModelError> {
    let inputs = core.input_cells();
    let outputs = core.output_cells();
    let cells = inputs + outputs;
    let patterns = u64::from(core.num_patterns);

    if cells <= u64::from(w_max) {
        // One wire per wrapper cell: one shift to load, one to unload.
        let chains = (0..inputs)
            .map(|_| WrapperChain { input_cells: 1, ..Default::default() })
            .chain((0..outputs).map(|_| WrapperChain { output_cells: 1, ..Default::default() }))
            .collect();
        return Ok(WrapperPlan {
            core_id: core.id,
            w_max,
            chains,
            tam_utilized: cells as u32,
            s_i: 1,
            s_o: 1,
            test_time: compute_test_time(patterns, 1, 1)?,
            peak_scan_element: None,
        });
    }

    let slots = w_max as usize;
    let mut chains: Vec<WrapperChain> =
        spread(inputs, slots).map(|input_cells| WrapperChain { input_cells, ..Default::default() }).collect();
    let (s_i, s_o) = match config.combinational {
        CombinationalTiming::SplitSides => {
            for (chain, n) in chains.iter_mut().zip(spread(outputs, slots)) {
                chain.output_cells = n;
            }
            (ceil_div(inputs, slots as u64), ceil_div(outputs, slots as u64))
        }
        CombinationalTiming::Joint => {
            // Both spreads put larger shares first, so each chain's share of
            // all cells is at least its share of the inputs.
            for (chain, total) in chains.iter_mut().zip(spread(cells, slots)) {
                chain.output_cells = total - chain.input_cells;
            }
            let s = ceil_div(cells, slots as u64);
            (s, s)
        }
    };
    Ok(WrapperPlan {
        core_id: core.id,
        w_max,
        chains,
        tam_utilized: w_max,
        s_i,
        s_o,
        test_time: compute_test_time(patterns, s_i, s_o)?,
        peak_scan_element: None,
    })
}

/// Packing bound: scanned-element total over `max(1, floor(w/2))` lines,
/// rounded up.
pub fn peak_scan_element(core: &CoreSpec, w_max: u32, total_io: TotalIo) -> u64 {
    let io = match total_io {
        TotalIo::BothSides => core.io_cells(),
        TotalIo::SingleChain => core.input_cells().max(core.output_cells()),
        TotalIo::PinsOnly => u64::from(core.num_inputs) + u64::from(core.num_outputs),
    };
    let mid_lines = u64::from((w_max / 2).max(1));
    ceil_div(io + core.total_scan_length(), mid_lines)
}

fn sequential(core: &CoreSpec, w_max: u32, config: &WrapperConfig) -> Result<WrapperPlan, ModelError> {
    let peak = peak_scan_element(core, w_max, config.total_io);
    let cap = w_max as usize;

    let mut order: Vec<usize> = (0..core.scan_chain_lengths.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(core.scan_chain_lengths[i]), i));

    let mut chains: Vec<WrapperChain> = Vec::new();
    let mut lengths: Vec<u64> = Vec::new();
    for i in order {
        let len = core.scan_chain_lengths[i];
        let fits = |&(_, &l): &(usize, &u64)| l + u64::from(len) <= peak;
        let target = match config.packing {
            Packing::FirstFit => lengths.iter().enumerate().find(fits).map(|(k, _)| k),
            // max_by_key keeps the last maximum; rev() makes it the lowest index.
            Packing::BestFit => {
                lengths.iter().enumerate().rev().filter(fits).max_by_key(|&(_, &l)| l).map(|(k, _)| k)
            }
        };
        let target = match target {
            Some(k) => k,
            None if chains.len() < cap => {
                chains.push(WrapperChain::default());
                lengths.push(0);
                chains.len() - 1
            }
            // Out of wires: the shortest chain absorbs the overflow.
            None => argmin(&lengths),
        };
        chains[target].internal_lengths.push(len);
        lengths[target] += u64::from(len);
    }

    let internal_cap = lengths.iter().copied().max().unwrap_or(0);
    pad(&mut chains, core.input_cells(), internal_cap, cap, config.io_padding, Side::In);
    pad(&mut chains, core.output_cells(), internal_cap, cap, config.io_padding, Side::Out);

    let s_i = chains.iter().map(WrapperChain::scan_in_length).max().unwrap_or(0);
    let s_o = chains.iter().map(WrapperChain::scan_out_length).max().unwrap_or(0);
    Ok(WrapperPlan {
        core_id: core.id,
        w_max,
        tam_utilized: chains.len() as u32,
        chains,
        s_i,
        s_o,
        test_time: compute_test_time(u64::from(core.num_patterns), s_i, s_o)?,
        peak_scan_element: Some(peak),
    })
}

fn argmin(values: &[u64]) -> usize {
    values.iter().enumerate().min_by_key(|&(k, &v)| (v, k)).map(|(k, _)| k).expect("at least one chain")
}

#[derive(Clone, Copy)]
enum Side {
    In,
    Out,
}

fn pad(
    chains: &mut Vec<WrapperChain>,
    cells: u64,
    internal_cap: u64,
    max_chains: usize,
    padding: IoPadding,
    side: Side,
) {
    let length = |c: &WrapperChain| match side {
        Side::In => c.scan_in_length(),
        Side::Out => c.scan_out_length(),
    };
    let mut lengths: Vec<u64> = chains.iter().map(length).collect();
    for _ in 0..cells {
        let mut k = argmin(&lengths);
        if padding == IoPadding::GrowWithinCap && lengths[k] + 1 > internal_cap && chains.len() < max_chains {
            chains.push(WrapperChain::default());
            lengths.push(0);
            k = chains.len() - 1;
        }
        match side {
            Side::In => chains[k].input_cells += 1,
            Side::Out => chains[k].output_cells += 1,
        }
        lengths[k] += 1;
    }
}

/// Checks that no single wrapper I/O cell can move to another chain and
/// shorten the longest chain on its side.
pub fn is_cell_balanced(plan: &WrapperPlan) -> bool {
    let side_ok = |len: &dyn Fn(&WrapperChain) -> u64, cells: &dyn Fn(&WrapperChain) -> u64| {
        let lengths: Vec<u64> = plan.chains.iter().map(len).collect();
        let Some(&longest) = lengths.iter().max() else { return true };
        let at_max = lengths.iter().filter(|&&l| l == longest).count();
        let shortest = lengths.iter().copied().min().unwrap_or(0);
        // A move lowers the maximum only if the sole longest chain holds an
        // I/O cell and some other chain stays below the maximum after +1.
        !plan
            .chains
            .iter()
            .zip(&lengths)
            .any(|(c, &l)| l == longest && at_max == 1 && cells(c) > 0 && shortest + 1 < longest)
    };
    side_ok(&WrapperChain::scan_in_length, &|c| c.input_cells)
        && side_ok(&WrapperChain::scan_out_length, &|c| c.output_cells)
}

/// A run of consecutive TAM widths producing identical wrapper plans.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WrapperBand {
    pub min_width: u32,
    pub max_width: u32,
    pub tam_utilized: u32,
    pub s_i: u64,
    pub s_o: u64,
    pub longest_chain: u64,
    pub test_time: TestTime,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WrapperBandTable {
    pub core_id: u32,
    pub max_width: u32,
    /// Widest band first.
    pub rows: Vec<WrapperBand>,
}

impl WrapperBandTable {
    pub fn band_for(&self, width: u32) -> Option<&WrapperBand> {
        self.rows.iter().find(|b| (b.min_width..=b.max_width).contains(&width))
    }
}

/// Designs the wrapper at every width `1..=w_max` and merges runs of equal
/// `(tam_utilized, s_i, s_o)` into bands.
pub fn wrapper_table(
    core: &CoreSpec,
    w_max: u32,
    config: &WrapperConfig,
) -> Result<WrapperBandTable, ModelError> {
    if w_max == 0 {
        return Err(ModelError::ZeroWidth);
    }
    let mut rows: Vec<WrapperBand> = Vec::new();
    for w in 1..=w_max {
        let plan = design_wrapper(core, w, config)?;
        match rows.last_mut() {
            Some(band) if (band.tam_utilized, band.s_i, band.s_o) == plan.signature() => {
                band.max_width = w;
            }
            _ => rows.push(WrapperBand {
                min_width: w,
                max_width: w,
                tam_utilized: plan.tam_utilized,
                s_i: plan.s_i,
                s_o: plan.s_o,
                longest_chain: plan.longest_chain(),
                test_time: plan.test_time,
            }),
        }
    }
    rows.reverse();
    Ok(WrapperBandTable { core_id: core.id, max_width: w_max, rows })
}
