use std::collections::BTreeSet;
use std::fmt::Write;

use crate::model::CoreSpec;
use crate::scheduler::TestSchedule;
use crate::wrapper::WrapperBandTable;

pub fn band_table_text(core: &CoreSpec, table: &WrapperBandTable) -> String {
    let mut out = format!("core {} `{}`, widths 1..={}\n", core.id, core.name, table.max_width);
    let _ = writeln!(
        out,
        "{:>10}  {:>12}  {:>13}  {:>12}",
        "TAM width", "TAM utilized", "longest chain", "test time"
    );
    for b in &table.rows {
        let range = if b.min_width == b.max_width {
            b.min_width.to_string()
        } else {
            format!("{}-{}", b.min_width, b.max_width)
        };
        let _ = writeln!(
            out,
            "{:>10}  {:>12}  {:>13}  {:>12}",
            range, b.tam_utilized, b.longest_chain, b.test_time
        );
    }
    out
}

pub fn schedule_text(s: &TestSchedule) -> String {
    let mut out = format!(
        "soc {}  w_max {}  t_min {}  makespan {}  utilization {:.4}\n",
        s.soc,
        s.w_max,
        s.t_min,
        s.makespan,
        s.utilization()
    );
    let _ = writeln!(out, "{:>4}  {:<12}  {:>5}  {:>10}  {:>10}", "core", "name", "width", "start", "finish");
    let mut slots: Vec<_> = s.slots.iter().collect();
    slots.sort_by_key(|x| (x.start, x.core_id));
    for x in slots {
        let _ = writeln!(
            out,
            "{:>4}  {:<12}  {:>5}  {:>10}  {:>10}",
            x.core_id, x.name, x.width, x.start, x.finish
        );
    }
    out
}

/// A contiguous block of wires held by one core.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WireRun {
    pub core_id: u32,
    /// First wire, 0-based.
    pub first: u32,
    pub count: u32,
}

/// Gives every core concrete wires, lowest free first, in start order.
/// Panics if the schedule exceeds `w_max` at some instant.
pub fn allocate_wires(s: &TestSchedule) -> Vec<WireRun> {
    // (time, is_start, core index); releases first at equal times.
    let mut events: Vec<(u64, bool, usize)> = Vec::new();
    for (i, x) in s.slots.iter().enumerate() {
        if x.scheduled && x.finish > x.start {
            events.push((x.start, true, i));
            events.push((x.finish, false, i));
        }
    }
    events.sort_unstable();
    let mut free: BTreeSet<u32> = (0..s.w_max).collect();
    let mut held: Vec<Vec<u32>> = vec![Vec::new(); s.slots.len()];
    let mut runs = Vec::new();
    for (_, is_start, i) in events {
        if is_start {
            let take: Vec<u32> = free.iter().take(s.slots[i].width as usize).copied().collect();
            assert_eq!(take.len(), s.slots[i].width as usize, "schedule exceeds w_max");
            for w in &take {
                free.remove(w);
            }
            let mut k = 0;
            while k < take.len() {
                let mut n = 1;
                while k + n < take.len() && take[k + n] == take[k] + n as u32 {
                    n += 1;
                }
                runs.push(WireRun { core_id: s.slots[i].core_id, first: take[k], count: n as u32 });
                k += n;
            }
            held[i] = take;
        } else {
            free.extend(held[i].drain(..));
        }
    }
    runs
}

pub const SVG_PLOT_WIDTH: f64 = 1000.0;
pub const SVG_WIRE_HEIGHT: f64 = 16.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f",
    "#bab0ac",
];

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// SVG 1.1 Gantt chart: x is time, y is wire index. The plot group declares
/// its scale factors; a core's rectangle spans
/// `x = start · x-scale`, `width = (finish - start) · x-scale`, and its wire
/// runs stack to `width · y-scale` in total height.
pub fn schedule_svg(s: &TestSchedule, manifest_json: &str) -> String {
    let x_scale = if s.makespan > 0 { SVG_PLOT_WIDTH / s.makespan as f64 } else { 1.0 };
    let plot_h = f64::from(s.w_max) * SVG_WIRE_HEIGHT;
    let (total_w, total_h) = (SVG_PLOT_WIDTH + 2.0 * MARGIN, plot_h + 2.0 * MARGIN);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{total_w}" height="{total_h}" viewBox="0 0 {total_w} {total_h}">"#
    );
    let _ = writeln!(out, "<metadata>{}</metadata>", escape(manifest_json));
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="14">{} w_max={} makespan={} t_min={}</text>"#,
        MARGIN - 14.0,
        escape(&s.soc),
        s.w_max,
        s.makespan,
        s.t_min
    );
    let _ = writeln!(
        out,
        r#"<g id="plot" transform="translate({MARGIN},{MARGIN})" data-x-scale="{x_scale}" data-y-scale="{SVG_WIRE_HEIGHT}">"#
    );
    let _ = writeln!(
        out,
        r##"<rect x="0" y="0" width="{SVG_PLOT_WIDTH}" height="{plot_h}" fill="#ffffff" stroke="#000000"/>"##
    );
    for run in allocate_wires(s) {
        let slot = s.slot(run.core_id);
        let color = PALETTE[(run.core_id as usize - 1) % PALETTE.len()];
        let x = slot.start as f64 * x_scale;
        let w = (slot.finish - slot.start) as f64 * x_scale;
        let y = f64::from(run.first) * SVG_WIRE_HEIGHT;
        let h = f64::from(run.count) * SVG_WIRE_HEIGHT;
        let _ = writeln!(
            out,
            r##"<rect x="{x}" y="{y}" width="{w}" height="{h}" fill="{color}" stroke="#333333" data-core="{}" data-start="{}" data-finish="{}" data-wires="{}"><title>{} ({} wires)</title></rect>"##,
            run.core_id,
            slot.start,
            slot.finish,
            run.count,
            escape(&slot.name),
            slot.width
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}
