use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::Method;
use super::runner::ExperimentResult;
use super::HarnessError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodStats {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    pub seeds: Vec<u64>,
    pub per_seed: Vec<f64>,
    pub alarms: usize,
}

impl MethodStats {
    fn of(r: &ExperimentResult) -> Self {
        Self {
            name: r.name.clone(),
            mean: r.mean_accuracy(),
            std: r.std_accuracy(),
            seeds: r.runs.iter().map(|s| s.seed).collect(),
            per_seed: r.seed_accuracies(),
            alarms: r.runs.iter().map(|s| s.alarms().len()).sum(),
        }
    }
}

/// Per-seed comparison counts for a paired cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairedCounts {
    pub dtd_better: usize,
    pub equal: usize,
    pub baseline_better: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub cell: String,
    pub baseline: Option<MethodStats>,
    pub dtd: Option<MethodStats>,
    /// DTD mean minus baseline mean.
    pub delta: Option<f64>,
    pub paired: Option<PairedCounts>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub cells: Vec<CellReport>,
    /// Cells holding both methods.
    pub compared: usize,
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
    /// Fraction of compared cells where the DTD mean is strictly higher.
    pub win_rate: Option<f64>,
    /// Fraction of compared cells where the DTD mean is at least the baseline mean.
    pub non_loss_rate: Option<f64>,
}

fn check_pair(cell: &str, b: &ExperimentResult, d: &ExperimentResult) -> Result<(), HarnessError> {
    let shape = |r: &ExperimentResult| -> Vec<(u64, usize)> {
        r.runs.iter().map(|s| (s.seed, s.records.len())).collect()
    };
    if shape(b) != shape(d) {
        return Err(HarnessError::Report(format!(
            "cell `{cell}`: baseline and DTD runs differ in seeds or chunk counts"
        )));
    }
    Ok(())
}

/// Groups results by cell and compares the methods within each cell.
pub fn summarize(results: &[ExperimentResult]) -> Result<Report, HarnessError> {
    if results.is_empty() {
        return Err(HarnessError::Report("no results to summarize".into()));
    }
    let mut cells: BTreeMap<&str, BTreeMap<Method, &ExperimentResult>> = BTreeMap::new();
    for r in results {
        if cells
            .entry(&r.cell)
            .or_default()
            .insert(r.method, r)
            .is_some()
        {
            return Err(HarnessError::Report(format!(
                "duplicate {} result for cell `{}`",
                r.method, r.cell
            )));
        }
    }
    let mut out = Vec::with_capacity(cells.len());
    let (mut wins, mut ties, mut losses) = (0, 0, 0);
    for (cell, methods) in cells {
        let b = methods.get(&Method::Baseline).copied();
        let d = methods.get(&Method::Dtd).copied();
        let mut report = CellReport {
            cell: cell.to_string(),
            baseline: b.map(MethodStats::of),
            dtd: d.map(MethodStats::of),
            delta: None,
            paired: None,
        };
        if let (Some(b), Some(d)) = (b, d) {
            check_pair(cell, b, d)?;
            let (bm, dm) = (b.mean_accuracy(), d.mean_accuracy());
            report.delta = Some(dm - bm);
            match dm.partial_cmp(&bm) {
                Some(std::cmp::Ordering::Greater) => wins += 1,
                Some(std::cmp::Ordering::Equal) => ties += 1,
                _ => losses += 1,
            }
            let mut p = PairedCounts::default();
            for (x, y) in b.seed_accuracies().into_iter().zip(d.seed_accuracies()) {
                match y.partial_cmp(&x) {
                    Some(std::cmp::Ordering::Greater) => p.dtd_better += 1,
                    Some(std::cmp::Ordering::Equal) => p.equal += 1,
                    _ => p.baseline_better += 1,
                }
            }
            report.paired = Some(p);
        }
        out.push(report);
    }
    let compared = wins + ties + losses;
    let rate = |n: usize| (compared > 0).then(|| n as f64 / compared as f64);
    Ok(Report {
        cells: out,
        compared,
        wins,
        ties,
        losses,
        win_rate: rate(wins),
        non_loss_rate: rate(wins + ties),
    })
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    /// Aligned text table with accuracies in percent.
    pub fn table(&self) -> String {
        let pct = |m: &Option<MethodStats>| match m {
            Some(m) => format!("{:.2} ± {:.2}", 100.0 * m.mean, 100.0 * m.std),
            None => "-".into(),
        };
        let rows: Vec<[String; 5]> = self
            .cells
            .iter()
            .map(|c| {
                [
                    c.cell.clone(),
                    pct(&c.baseline),
                    pct(&c.dtd),
                    c.delta.map_or("-".into(), |d| format!("{:+.2}", 100.0 * d)),
                    c.paired.map_or("-".into(), |p| {
                        format!("{}/{}/{}", p.dtd_better, p.equal, p.baseline_better)
                    }),
                ]
            })
            .collect();
        let header = ["cell", "baseline", "dtd", "delta", "seeds +/=/-"];
        let mut widths = header.map(|h| h.chars().count());
        for row in &rows {
            for (w, v) in widths.iter_mut().zip(row) {
                *w = (*w).max(v.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cols: &[String]| {
            for (i, (v, w)) in cols.iter().zip(widths).enumerate() {
                let pad = w - v.chars().count();
                if i == 0 {
                    let _ = write!(out, "{v}{}", " ".repeat(pad));
                } else {
                    let _ = write!(out, "  {}{v}", " ".repeat(pad));
                }
            }
            out.push('\n');
        };
        line(&mut out, &header.map(String::from));
        for row in &rows {
            line(&mut out, row);
        }
        if let Some(rate) = self.win_rate {
            let _ = writeln!(
                out,
                "\nDTD vs baseline: {} wins, {} ties, {} losses (win rate {:.1}%)",
                self.wins,
                self.ties,
                self.losses,
                100.0 * rate
            );
        }
        out
    }
}
