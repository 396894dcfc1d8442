use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use super::CoreIdError;
use crate::math;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedCompound {
    pub compound_id: String,
    pub probability: f64,
}

/// Whether the core landed within each cutoff. Percentage cutoffs use
/// `k = ceil(p * N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopkFlags {
    pub top1: bool,
    pub top5: bool,
    pub top10: bool,
    pub top1pct: bool,
    pub top5pct: bool,
    pub top10pct: bool,
}

/// `ceil(percent * n / 100)` in integer arithmetic.
pub fn percent_k(percent: usize, n: usize) -> usize {
    (percent * n).div_ceil(100)
}

impl TopkFlags {
    /// `rank` is 1-based.
    pub fn from_rank(rank: usize, n: usize) -> Self {
        Self {
            top1: rank <= 1,
            top5: rank <= 5,
            top10: rank <= 10,
            top1pct: rank <= percent_k(1, n),
            top5pct: rank <= percent_k(5, n),
            top10pct: rank <= percent_k(10, n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub patent_id: String,
    pub n_compounds: usize,
    /// Descending probability; ties by ascending compound id.
    pub ranking: Vec<RankedCompound>,
    /// 1-based rank of the labeled core.
    pub rank_of_core: Option<usize>,
    pub flags: Option<TopkFlags>,
}

/// Orders compounds by probability and locates `core_id` if given.
pub fn rank_with_probabilities(patent_id: &str, ids: &[String], probs: &[f64], core_id: Option<&str>) -> RankingReport {
    let mut ranking: Vec<RankedCompound> = ids
        .iter()
        .zip(probs)
        .map(|(id, &p)| RankedCompound {
            compound_id: id.clone(),
            probability: p,
        })
        .collect();
    ranking.sort_by(|a, b| {
        b.probability
            .total_cmp(&a.probability)
            .then_with(|| a.compound_id.cmp(&b.compound_id))
    });
    let n = ranking.len();
    let rank_of_core = core_id.and_then(|c| ranking.iter().position(|r| r.compound_id == c).map(|p| p + 1));
    RankingReport {
        patent_id: patent_id.into(),
        n_compounds: n,
        ranking,
        rank_of_core,
        flags: rank_of_core.map(|r| TopkFlags::from_rank(r, n)),
    }
}

impl RankingReport {
    /// Ranked list followed by a one-row Top-k table for this patent.
    pub fn to_markdown(&self) -> String {
        let mut out = format!(
            "### Patent {}\n\n| Rank | Compound | Probability |\n|---:|---|---:|\n",
            self.patent_id
        );
        for (i, r) in self.ranking.iter().enumerate() {
            let mark = if Some(i + 1) == self.rank_of_core {
                " (core)"
            } else {
                ""
            };
            let _ = writeln!(out, "| {} | {}{} | {:.4} |", i + 1, r.compound_id, mark, r.probability);
        }
        if let Some(f) = self.flags {
            let summary = TopkSummary::from_flags(&[f]);
            out.push('\n');
            out.push_str(&markdown_table(&[(self.patent_id.clone(), summary)], false));
        }
        out
    }
}

/// Percentages over patents, rounded to two decimals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopkSummary {
    pub patents: usize,
    pub top1: f64,
    pub top5: f64,
    pub top10: f64,
    pub top1pct: f64,
    pub top5pct: f64,
    pub top10pct: f64,
}

fn pct(hits: usize, total: usize) -> f64 {
    math::round(hits as f64 * 100.0 / total as f64 * 100.0) / 100.0
}

impl TopkSummary {
    fn from_flags(flags: &[TopkFlags]) -> Self {
        let n = flags.len().max(1);
        let count = |f: fn(&TopkFlags) -> bool| flags.iter().filter(|x| f(x)).count();
        Self {
            patents: flags.len(),
            top1: pct(count(|f| f.top1), n),
            top5: pct(count(|f| f.top5), n),
            top10: pct(count(|f| f.top10), n),
            top1pct: pct(count(|f| f.top1pct), n),
            top5pct: pct(count(|f| f.top5pct), n),
            top10pct: pct(count(|f| f.top10pct), n),
        }
    }
}

pub fn topk_metrics(reports: &[RankingReport]) -> Result<TopkSummary, CoreIdError> {
    let flags = reports
        .iter()
        .map(|r| r.flags.ok_or_else(|| CoreIdError::UnlabeledReport(r.patent_id.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TopkSummary::from_flags(&flags))
}

/// Table with columns Top 1 / Top 5 / Top 10 / Top 5% / Top 10%, plus
/// Top 1% when requested.
pub fn markdown_table(rows: &[(String, TopkSummary)], include_top1pct: bool) -> String {
    let mut out = String::from("| Model | Top 1 | Top 5 | Top 10 |");
    if include_top1pct {
        out.push_str(" Top 1% |");
    }
    out.push_str(" Top 5% | Top 10% |\n|---|---:|---:|---:|");
    if include_top1pct {
        out.push_str("---:|");
    }
    out.push_str("---:|---:|\n");
    for (label, s) in rows {
        let _ = write!(out, "| {label} | {:.2} | {:.2} | {:.2} |", s.top1, s.top5, s.top10);
        if include_top1pct {
            let _ = write!(out, " {:.2} |", s.top1pct);
        }
        let _ = writeln!(out, " {:.2} | {:.2} |", s.top5pct, s.top10pct);
    }
    out
}

impl TopkSummary {
    pub fn to_markdown(&self, label: &str, include_top1pct: bool) -> String {
        markdown_table(&[(label.into(), self.clone())], include_top1pct)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i:02}")).collect()
    }

    #[test]
    fn rank_three_of_ten() {
        let f = TopkFlags::from_rank(3, 10);
        assert!(!f.top1 && f.top5 && f.top10 && !f.top10pct && !f.top5pct);
    }

    #[test]
    fn ceiling_rule() {
        assert_eq!(percent_k(10, 10), 1);
        assert_eq!(percent_k(10, 30), 3);
        assert_eq!(percent_k(5, 21), 2);
        assert_eq!(percent_k(1, 1), 1);
    }

    #[test]
    fn oracle_model_ranks_core_first() {
        let mut probs = vec![0.1; 10];
        probs[7] = 0.9;
        let r = rank_with_probabilities("P", &ids(10), &probs, Some("c07"));
        assert_eq!(r.rank_of_core, Some(1));
        assert!(r.flags.unwrap().top1);
    }

    #[test]
    fn ties_by_id() {
        let mut names = ids(5);
        names.reverse();
        let r = rank_with_probabilities("P", &names, &[0.5; 5], None);
        let order: Vec<&str> = r.ranking.iter().map(|c| c.compound_id.as_str()).collect();
        assert_eq!(order, ["c00", "c01", "c02", "c03", "c04"]);
        assert!(r.flags.is_none());
        assert_eq!(
            topk_metrics(&[r]).unwrap_err(),
            CoreIdError::UnlabeledReport("P".to_string())
        );
    }

    #[test]
    fn markdown_layout() {
        let s = TopkSummary::from_flags(&[TopkFlags::from_rank(1, 10), TopkFlags::from_rank(20, 30)]);
        let t = s.to_markdown("ensemble", false);
        assert!(t.starts_with("| Model | Top 1 | Top 5 | Top 10 | Top 5% | Top 10% |"));
        assert!(t.contains("| ensemble | 50.00 | 50.00 | 50.00 | 50.00 | 50.00 |"));
    }
}
