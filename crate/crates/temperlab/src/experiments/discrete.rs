//! Discrete-group experiment: two-sided ratios along candidate
//! sequences in the three reference groups.

use super::ExperimentOutput;
use crate::config::Document;
use crate::error::{Error, Result};
use crate::folner::{folner_report, DiscreteGroup, FolnerRow, GroupKind};
use crate::report::{fmt_sig, RefSource, VerdictRecord, VerdictSummary};
use std::time::Instant;

pub const FOLNER_CSV_HEADER: &str = "group,n,ball_size,sup_ratio";

fn rows_to_csv(rows: &[FolnerRow]) -> String {
    let mut out = String::from(FOLNER_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.group,
            r.n,
            r.ball_size,
            fmt_sig(r.sup_ratio)
        ));
    }
    out
}

fn rows_from_csv(text: &str) -> Result<Vec<FolnerRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::config("empty CSV"))?;
    if header.trim() != FOLNER_CSV_HEADER {
        return Err(Error::config(format!("unexpected CSV header: {header}")));
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(Error::config(format!("bad row: {line}")));
        }
        rows.push(FolnerRow {
            group: f[0].to_string(),
            n: f[1].parse().map_err(|e| Error::config(format!("{e}")))?,
            ball_size: f[2].parse().map_err(|e| Error::config(format!("{e}")))?,
            sup_ratio: f[3].parse().map_err(|e| Error::config(format!("{e}")))?,
        });
    }
    Ok(rows)
}

fn parse_group(name: &str) -> Result<GroupKind> {
    match name {
        "z1" => Ok(GroupKind::Zn(1)),
        "z2" => Ok(GroupKind::Zn(2)),
        "z3" => Ok(GroupKind::Zn(3)),
        "heisenberg3" | "heisenberg" => Ok(GroupKind::Heisenberg3),
        "f2" => Ok(GroupKind::Free2),
        other => Err(Error::config(format!("unknown group {other}"))),
    }
}

/// Runs the configured groups (default: all three reference groups with
/// the grids of the acceptance targets).
pub fn run(doc: &Document, seed: u64) -> Result<ExperimentOutput> {
    let start = Instant::now();
    let k_radius = doc.get_u64("group", "k_radius")?.unwrap_or(2) as u32;
    let mut rows: Vec<FolnerRow> = Vec::new();
    let configured = doc.get("group", "name");
    let plans: Vec<(GroupKind, Vec<u32>)> = match configured {
        Some(name) => {
            let n_max = doc.get_u64("grid", "n_max")?.unwrap_or(10) as u32;
            vec![(parse_group(name)?, (1..=n_max).collect())]
        }
        None => vec![
            (GroupKind::Zn(2), vec![10, 25, 50, 100]),
            (GroupKind::Heisenberg3, vec![4, 8, 15, 16, 30]),
            (GroupKind::Free2, (1..=10).collect()),
        ],
    };
    for (kind, indices) in plans {
        let group = DiscreteGroup::new(kind)?;
        rows.extend(folner_report(&group, &indices, k_radius)?);
    }
    let mut records = verdicts(&rows)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    for r in records.iter_mut() {
        r.runtime_ms = elapsed;
    }
    Ok(ExperimentOutput {
        name: "folner".into(),
        csv: rows_to_csv(&rows),
        summary: VerdictSummary {
            experiment: "folner".into(),
            seed,
            records,
        },
    })
}

fn verdicts(rows: &[FolnerRow]) -> Result<Vec<VerdictRecord>> {
    let mut out = Vec::new();
    let of = |g: &str| -> Vec<&FolnerRow> { rows.iter().filter(|r| r.group == g).collect() };

    let z2 = of("z2");
    if let Some(top) = z2.iter().max_by_key(|r| r.n) {
        out.push(VerdictRecord::new(
            "z2_vanishing",
            top.sup_ratio,
            0.1,
            RefSource::Oracle,
            top.sup_ratio <= 0.1,
            format!("plane boxes at n = {}", top.n),
        ));
    }
    let h = of("heisenberg3");
    if !h.is_empty() {
        // ratio at n no larger than at floor(n/2), for n >= 8 present in the grid
        let mut ok = true;
        let mut checked = 0;
        for r in &h {
            if r.n >= 8 {
                if let Some(half) = h.iter().find(|s| s.n == r.n / 2) {
                    checked += 1;
                    if r.sup_ratio > half.sup_ratio + 1e-12 {
                        ok = false;
                    }
                }
            }
        }
        out.push(VerdictRecord::new(
            "heisenberg_decreasing",
            if ok { 1.0 } else { 0.0 },
            1.0,
            RefSource::Oracle,
            ok && checked > 0,
            format!("halving comparisons checked: {checked}"),
        ));
    }
    let f2 = of("f2");
    if !f2.is_empty() {
        let min = f2.iter().map(|r| r.sup_ratio).fold(f64::INFINITY, f64::min);
        out.push(VerdictRecord::new(
            "f2_bounded_below",
            min,
            0.4,
            RefSource::Oracle,
            min >= 0.4,
            "free-group balls never become almost invariant",
        ));
    }
    if out.is_empty() {
        return Err(Error::Degenerate("no rows to judge".into()));
    }
    Ok(out)
}

pub fn verdicts_from_csv(csv: &str) -> Result<Vec<VerdictRecord>> {
    verdicts(&rows_from_csv(csv)?)
}
