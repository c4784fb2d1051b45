//! Hand-written SVG: accuracy bars, MAT/O scatter and disk charts.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::{ChoiceRow, Grid, GridRow};
use crate::strategies::StrategyId;

const W: f64 = 800.0;
const H: f64 = 500.0;
const SET_COLOURS: [&str; 5] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(title: &str) -> String {
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#).unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title)).unwrap();
    s
}

/// Bars per cell and strategy, stacked by item set.
pub fn grid_svg(rows: &[GridRow], grid: Grid) -> String {
    let mut s = open(&format!("{grid} accuracy by cell, stacked by set"));
    let (left, right, top, bottom) = (50.0, 110.0, 40.0, 110.0);
    let (pw, ph) = (W - left - right, H - top - bottom);
    for k in 0..=4 {
        let v = k as f64 / 4.0;
        let y = top + ph * (1.0 - v);
        writeln!(s, r##"<line x1="{left}" x2="{}" y1="{y:.1}" y2="{y:.1}" stroke="#ddd"/>"##, left + pw).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.2}</text>"#, left - 4.0, y + 4.0).unwrap();
    }
    let sets: BTreeSet<String> = rows.iter().flat_map(|r| r.by_set.iter().flat_map(|(_, m)| m.keys().cloned())).collect();
    let sets: Vec<String> = sets.into_iter().collect();
    let n = rows.len().max(1) as f64;
    let slot = pw / n;
    for (ci, r) in rows.iter().enumerate() {
        let k = r.results.len().max(1) as f64;
        let bw = slot * 0.8 / k;
        for (si, ((_, tally), (_, by_set))) in r.results.iter().zip(&r.by_set).enumerate() {
            let x = left + slot * ci as f64 + slot * 0.1 + bw * si as f64;
            let mut y = top + ph;
            for (i, set) in sets.iter().enumerate() {
                let c = by_set.get(set).copied().unwrap_or(0);
                if c == 0 || tally.total == 0 {
                    continue;
                }
                let h = ph * c as f64 / tally.total as f64;
                y -= h;
                writeln!(
                    s,
                    r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{h:.2}" fill="{}"/>"#,
                    (bw - 0.5).max(0.5),
                    SET_COLOURS[i % SET_COLOURS.len()]
                )
                .unwrap();
            }
        }
        let cx = left + slot * (ci as f64 + 0.5);
        let ly = top + ph + 8.0;
        writeln!(
            s,
            r#"<text x="{cx:.1}" y="{ly:.1}" transform="rotate(60 {cx:.1} {ly:.1})">{}</text>"#,
            escape(&r.cell.label)
        )
        .unwrap();
    }
    let lx = W - right + 15.0;
    for (i, set) in sets.iter().enumerate() {
        let y = top + 16.0 * i as f64;
        writeln!(s, r#"<rect x="{lx}" y="{y}" width="10" height="10" fill="{}"/>"#, SET_COLOURS[i % SET_COLOURS.len()]).unwrap();
        writeln!(s, r#"<text x="{}" y="{}">set {}</text>"#, lx + 14.0, y + 9.0, escape(set)).unwrap();
    }
    if let Some(r) = rows.first() {
        let names: Vec<&str> = r.results.iter().map(|(s, _)| s.name()).collect();
        writeln!(s, r#"<text x="{lx}" y="{}">bars: {}</text>"#, top + 16.0 * sets.len() as f64 + 10.0, names.len()).unwrap();
        for (i, name) in names.iter().enumerate() {
            writeln!(s, r#"<text x="{lx}" y="{}">{}. {}</text>"#, top + 16.0 * (sets.len() + 1 + i) as f64 + 10.0, i + 1, name).unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}

fn first_strategy(rows: &[ChoiceRow]) -> Option<StrategyId> {
    let present: BTreeSet<&str> = rows.iter().map(|r| r.strategy.name()).collect();
    [StrategyId::MPrudent]
        .into_iter()
        .find(|s| present.contains(s.name()))
        .or_else(|| rows.first().map(|r| r.strategy))
}

/// MAT against O for every option's best record under one strategy
/// (M-prudent when present). Correct options are circles, others crosses;
/// chosen options are drawn bold.
pub fn scatter_svg(rows: &[ChoiceRow]) -> String {
    let strategy = first_strategy(rows);
    let title = format!("MAT vs O ({})", strategy.map(|s| s.name()).unwrap_or("empty"));
    let mut s = open(&title);
    let (left, top, size) = (80.0, 40.0, 420.0);
    writeln!(s, r#"<rect x="{left}" y="{top}" width="{size}" height="{size}" fill="none" stroke="black"/>"#).unwrap();
    for k in 0..=4 {
        let v = k as f64 / 4.0;
        let x = left + size * v;
        let y = top + size * (1.0 - v);
        writeln!(s, r#"<text x="{x:.1}" y="{}" text-anchor="middle">{v:.2}</text>"#, top + size + 14.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.2}</text>"#, left - 4.0, y + 4.0).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">MAT</text>"#, left + size / 2.0, top + size + 30.0).unwrap();
    writeln!(s, r#"<text x="30" y="{}" text-anchor="middle">O</text>"#, top + size / 2.0).unwrap();
    for r in rows.iter().filter(|r| Some(r.strategy) == strategy) {
        let x = left + size * r.mat.clamp(0.0, 1.0);
        let y = top + size * (1.0 - r.o.clamp(0.0, 1.0));
        let width = if r.chosen { 2.0 } else { 0.8 };
        if r.correct {
            writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="none" stroke="#2a7" stroke-width="{width}"/>"##).unwrap();
        } else {
            writeln!(
                s,
                r##"<path d="M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}" stroke="#c33" stroke-width="{width}"/>"##,
                x - 3.0,
                y - 3.0,
                x + 3.0,
                y + 3.0,
                x - 3.0,
                y + 3.0,
                x + 3.0,
                y - 3.0
            )
            .unwrap();
        }
    }
    let lx = left + size + 40.0;
    writeln!(s, r##"<circle cx="{lx}" cy="60" r="4" fill="none" stroke="#2a7"/>"##).unwrap();
    writeln!(s, r#"<text x="{}" y="64">correct option</text>"#, lx + 10.0).unwrap();
    writeln!(s, r##"<path d="M{} 77L{} 83M{} 83L{} 77" stroke="#c33"/>"##, lx - 3.0, lx + 3.0, lx - 3.0, lx + 3.0).unwrap();
    writeln!(s, r#"<text x="{}" y="84">incorrect option</text>"#, lx + 10.0).unwrap();
    writeln!(s, r#"<text x="{lx}" y="104">bold: chosen</text>"#).unwrap();
    s.push_str("</svg>\n");
    s
}

/// One disk per problem and strategy for the chosen option: area follows
/// MATO, green when correct, red otherwise.
pub fn disk_svg(rows: &[ChoiceRow]) -> String {
    let mut s = open("chosen answers per problem");
    let chosen: Vec<&ChoiceRow> = rows.iter().filter(|r| r.chosen).collect();
    let mut problems: Vec<&str> = Vec::new();
    let mut strategies: Vec<StrategyId> = Vec::new();
    for r in &chosen {
        if !problems.contains(&r.problem_id.as_str()) {
            problems.push(&r.problem_id);
        }
        if !strategies.contains(&r.strategy) {
            strategies.push(r.strategy);
        }
    }
    let (left, top) = (100.0, 50.0);
    let cw = (W - left - 20.0) / problems.len().max(1) as f64;
    let rh = (H - top - 40.0) / strategies.len().max(1) as f64;
    let rmax = (cw.min(rh) / 2.0 - 0.5).max(0.5);
    for (i, st) in strategies.iter().enumerate() {
        let y = top + rh * (i as f64 + 0.5);
        writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, left - 6.0, y + 4.0, st.name()).unwrap();
    }
    for r in chosen {
        let px = problems.iter().position(|p| *p == r.problem_id).expect("listed");
        let py = strategies.iter().position(|p| *p == r.strategy).expect("listed");
        let cx = left + cw * (px as f64 + 0.5);
        let cy = top + rh * (py as f64 + 0.5);
        let radius = rmax * r.mato.clamp(0.0, 1.0).sqrt();
        let fill = if r.correct { "#2a7" } else { "#c33" };
        writeln!(
            s,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{radius:.2}" fill="{fill}"><title>{} {} option {}</title></circle>"#,
            escape(&r.problem_id),
            r.strategy.name(),
            r.option_index
        )
        .unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">problems ({})</text>"#, W / 2.0, H - 12.0, problems.len()).unwrap();
    s.push_str("</svg>\n");
    s
}
