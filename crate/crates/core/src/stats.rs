//! Rank-based method comparison and the pooled two-sample t-test.
//!
//! Within a group, the highest score gets rank 1 and ties share the mean of
//! the ranks they span, so each group of `n` always sums to `n(n+1)/2`. Rank
//! sums per method then order methods (smaller is better). The t-test is the
//! two-tailed Student test with pooled variance; its p-value comes from the
//! regularized incomplete beta function.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::MetricRow;

pub const DEFAULT_ALPHAS: [f64; 3] = [0.05, 0.2, 0.35];

/// Ranks in descending score order, mid-rank on ties.
pub fn rank_scores(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1 ..= end
        let mid = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = mid;
        }
        start = end;
    }
    Ok(ranks)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    #[serde(rename = "image-id")]
    pub item: String,
    #[serde(rename = "config-name")]
    pub method: String,
    pub metric: String,
    pub score: f64,
}

/// Raw scores keyed by `(item, method, metric)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreTable {
    rows: Vec<ScoreRow>,
    keys: HashSet<(String, String, String)>,
}

/// How scores are grouped before ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Grouping {
    /// Rank methods within each `(item, metric)`.
    #[default]
    Item,
    /// Average each method's scores over items, then rank within each metric.
    Metric,
}

impl std::str::FromStr for Grouping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "item" | "image" | "image-id" => Ok(Self::Item),
            "metric" => Ok(Self::Metric),
            _ => Err(Error::Config(format!("unknown grouping {s:?}, expected item or metric"))),
        }
    }
}

impl ScoreTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: ScoreRow) -> Result<()> {
        let key = (row.item.clone(), row.method.clone(), row.metric.clone());
        if !self.keys.insert(key) {
            return Err(Error::DuplicateScore {
                item: row.item,
                method: row.method,
                metric: row.metric,
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[ScoreRow] {
        &self.rows
    }

    /// Reads either the long layout (`image-id, config-name, metric, score`)
    /// or the wide evaluation layout (`image-id, config-name, accuracy, iou,
    /// dice, mean-bf-score`). Wide rows with image id `mean` are summaries and
    /// are skipped.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let long = headers.iter().any(|h| h == "metric");
        let mut table = Self::new();
        let row_err = |row: usize, message: String| Error::Table { row, message };
        if long {
            for (i, rec) in rdr.deserialize::<ScoreRow>().enumerate() {
                let row = i + 2;
                let rec = rec.map_err(|e| row_err(row, e.to_string()))?;
                if !rec.score.is_finite() {
                    return Err(row_err(row, "non-finite score".into()));
                }
                table.push(rec).map_err(|e| row_err(row, e.to_string()))?;
            }
        } else {
            for (i, rec) in rdr.deserialize::<MetricRow>().enumerate() {
                let row = i + 2;
                let rec = rec.map_err(|e| row_err(row, e.to_string()))?;
                if rec.image_id == "mean" {
                    continue;
                }
                for (metric, score) in rec.scores() {
                    if !score.is_finite() {
                        return Err(row_err(row, format!("non-finite {metric}")));
                    }
                    table
                        .push(ScoreRow {
                            item: rec.image_id.clone(),
                            method: rec.config_name.clone(),
                            metric: metric.to_owned(),
                            score,
                        })
                        .map_err(|e| row_err(row, e.to_string()))?;
                }
            }
        }
        Ok(table)
    }

    pub fn rank(&self, grouping: Grouping) -> Result<RankTable> {
        // group key -> (method, score) in insertion order
        let mut groups: BTreeMap<(String, String), Vec<(String, f64)>> = BTreeMap::new();
        match grouping {
            Grouping::Item => {
                for r in &self.rows {
                    groups
                        .entry((r.item.clone(), r.metric.clone()))
                        .or_default()
                        .push((r.method.clone(), r.score));
                }
            }
            Grouping::Metric => {
                let mut acc: BTreeMap<(String, String), (f64, usize)> = BTreeMap::new();
                let mut method_order: Vec<(String, String)> = Vec::new();
                for r in &self.rows {
                    let key = (r.metric.clone(), r.method.clone());
                    let e = acc.entry(key.clone()).or_insert_with(|| {
                        method_order.push(key.clone());
                        (0.0, 0)
                    });
                    e.0 += r.score;
                    e.1 += 1;
                }
                for (metric, method) in method_order {
                    let (sum, n) = acc[&(metric.clone(), method.clone())];
                    groups
                        .entry(("mean".to_owned(), metric))
                        .or_default()
                        .push((method, sum / n as f64));
                }
            }
        }
        let mut table = RankTable::default();
        for ((item, metric), members) in groups {
            let scores: Vec<f64> = members.iter().map(|m| m.1).collect();
            for ((method, _), rank) in members.into_iter().zip(rank_scores(&scores)?) {
                table.rows.push(RankRow {
                    item: item.clone(),
                    metric: metric.clone(),
                    method,
                    rank,
                });
            }
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    #[serde(rename = "image-id")]
    pub item: String,
    pub metric: String,
    #[serde(rename = "config-name")]
    pub method: String,
    pub rank: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RankTable {
    pub rows: Vec<RankRow>,
}

impl RankTable {
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut rows = Vec::new();
        for (i, rec) in rdr.deserialize::<RankRow>().enumerate() {
            let rec = rec.map_err(|e| Error::Table {
                row: i + 2,
                message: e.to_string(),
            })?;
            if !(rec.rank.is_finite() && rec.rank > 0.0) {
                return Err(Error::Table {
                    row: i + 2,
                    message: format!("rank {} is not positive", rec.rank),
                });
            }
            rows.push(rec);
        }
        Ok(Self { rows })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        if self.rows.is_empty() {
            w.write_record(["image-id", "metric", "config-name", "rank"])?;
        }
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn methods(&self) -> Vec<String> {
        let mut seen = Vec::<String>::new();
        for r in &self.rows {
            if !seen.contains(&r.method) {
                seen.push(r.method.clone());
            }
        }
        seen
    }

    pub fn metrics(&self) -> Vec<String> {
        let mut seen = Vec::<String>::new();
        for r in &self.rows {
            if !seen.contains(&r.metric) {
                seen.push(r.metric.clone());
            }
        }
        seen
    }

    /// Ranks of `method` for `metric`, ordered by item id.
    pub fn samples(&self, metric: &str, method: &str) -> Vec<f64> {
        let mut v: Vec<(&str, f64)> = self
            .rows
            .iter()
            .filter(|r| r.metric == metric && r.method == method)
            .map(|r| (r.item.as_str(), r.rank))
            .collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v.into_iter().map(|(_, r)| r).collect()
    }
}

/// Per-method rank totals, smallest (best) first; ties broken by name.
pub fn sum_ranks(table: &RankTable) -> Vec<(String, f64)> {
    let mut sums: HashMap<&str, f64> = HashMap::new();
    for r in &table.rows {
        *sums.entry(r.method.as_str()).or_default() += r.rank;
    }
    let mut out: Vec<(String, f64)> = sums.into_iter().map(|(m, s)| (m.to_owned(), s)).collect();
    out.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    out
}

pub fn write_rank_sums<W: Write>(sums: &[(String, f64)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["config-name", "rank-sum"])?;
    for (m, s) in sums {
        w.write_record([m.clone(), s.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TTestResult {
    pub t: f64,
    pub df: f64,
    pub p: f64,
    /// `(alpha, h)`; `h` is true when the null hypothesis is rejected.
    pub decisions: Vec<(f64, bool)>,
    /// Both samples have zero variance but different means.
    pub degenerate: bool,
}

impl TTestResult {
    pub fn h_values(&self) -> Vec<u8> {
        self.decisions.iter().map(|&(_, h)| u8::from(h)).collect()
    }
}

/// Reject at `alpha` iff `p < alpha`.
pub fn decide(p: f64, alpha: f64) -> bool {
    p < alpha
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

/// Two-tailed pooled-variance two-sample t-test.
pub fn ttest2(a: &[f64], b: &[f64], alphas: &[f64]) -> Result<TTestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::SampleTooSmall(a.len(), b.len()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let df = na + nb - 2.0;
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
    let diff = ma - mb;
    let (t, p, degenerate) = if pooled == 0.0 {
        if diff == 0.0 {
            (0.0, 1.0, false)
        } else {
            (f64::INFINITY.copysign(diff), 0.0, true)
        }
    } else {
        let t = diff / (pooled * (1.0 / na + 1.0 / nb)).sqrt();
        (t, student_t_two_tailed(t, df), false)
    };
    Ok(TTestResult {
        t,
        df,
        p,
        decisions: alphas.iter().map(|&a| (a, decide(p, a))).collect(),
        degenerate,
    })
}

/// `P(|T| >= |t|)` for Student's t with `df` degrees of freedom.
pub fn student_t_two_tailed(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let x = df / (df + t * t);
    reg_inc_beta(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    // The continued fraction converges fast for x < (a+1)/(a+b+2).
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 10_000;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// One line of the t-test output table.
#[derive(Debug, Clone, PartialEq)]
pub struct TTestRow {
    pub metric: String,
    pub method_pair: String,
    pub result: TTestResult,
}

/// Tests method `a` against `b` separately for every metric in `ranks`.
pub fn ttest_by_metric(ranks: &RankTable, a: &str, b: &str, alphas: &[f64]) -> Result<Vec<TTestRow>> {
    let methods = ranks.methods();
    for m in [a, b] {
        if !methods.iter().any(|x| x == m) {
            return Err(Error::Config(format!("unknown method {m:?}")));
        }
    }
    ranks
        .metrics()
        .into_iter()
        .map(|metric| {
            let result = ttest2(&ranks.samples(&metric, a), &ranks.samples(&metric, b), alphas)?;
            Ok(TTestRow {
                metric,
                method_pair: format!("{a}/{b}"),
                result,
            })
        })
        .collect()
}

pub fn write_ttest_csv<W: Write>(rows: &[TTestRow], alphas: &[f64], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["metric".to_owned(), "method-pair".to_owned(), "p-value".to_owned()];
    header.extend(alphas.iter().map(|a| format!("h@{a}")));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.metric.clone(), r.method_pair.clone(), format!("{:.4}", r.result.p)];
        rec.extend(r.result.h_values().iter().map(|h| h.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::published;
    use proptest::prelude::*;
    use statrs::distribution::{ContinuousCDF, StudentsT};

    #[test]
    fn ranks_descending_with_mid_rank_ties() {
        assert_eq!(rank_scores(&[0.9, 0.8, 0.7]).unwrap(), [1.0, 2.0, 3.0]);
        assert_eq!(rank_scores(&[0.5, 0.5, 0.2]).unwrap(), [1.5, 1.5, 3.0]);
        assert_eq!(rank_scores(&[0.3]).unwrap(), [1.0]);
        assert_eq!(rank_scores(&[0.1, 0.4, 0.4, 0.4]).unwrap(), [4.0, 2.0, 2.0, 2.0]);
        assert!(matches!(rank_scores(&[0.1, f64::NAN]), Err(Error::NonFinite)));
    }

    #[test]
    fn sums_of_one_group() {
        let mut t = ScoreTable::new();
        for (m, s) in [("m1", 0.9), ("m2", 0.8), ("m3", 0.7)] {
            t.push(ScoreRow { item: "a".into(), method: m.into(), metric: "iou".into(), score: s }).unwrap();
        }
        let sums = sum_ranks(&t.rank(Grouping::Item).unwrap());
        assert_eq!(sums, [("m1".into(), 1.0), ("m2".into(), 2.0), ("m3".into(), 3.0)]);
    }

    #[test]
    fn duplicate_scores_rejected() {
        let mut t = ScoreTable::new();
        let row = ScoreRow { item: "a".into(), method: "m".into(), metric: "iou".into(), score: 0.5 };
        t.push(row.clone()).unwrap();
        assert!(matches!(t.push(row), Err(Error::DuplicateScore { .. })));
    }

    #[test]
    fn metric_grouping_ranks_means() {
        let csv = "image-id,config-name,metric,score\n\
                   a,X,iou,0.9\na,Y,iou,0.5\nb,X,iou,0.1\nb,Y,iou,0.6\n";
        let t = ScoreTable::read_csv(csv.as_bytes()).unwrap();
        let ranks = t.rank(Grouping::Metric).unwrap();
        // means X = 0.5, Y = 0.55
        assert_eq!(ranks.rows.len(), 2);
        assert_eq!(ranks.samples("iou", "Y"), [1.0]);
        assert_eq!(ranks.samples("iou", "X"), [2.0]);
    }

    #[test]
    fn wide_layout_is_melted() {
        let csv = "image-id,config-name,accuracy,iou,dice,mean-bf-score\n\
                   a,X,1,0.5,0.6,0.7\nmean,X,1,0.5,0.6,0.7\n";
        let t = ScoreTable::read_csv(csv.as_bytes()).unwrap();
        assert_eq!(t.rows().len(), 4);
        assert_eq!(t.rows()[3].metric, "mean-bf-score");
    }

    #[test]
    fn malformed_row_reports_line() {
        let csv = "image-id,config-name,metric,score\na,X,iou,0.9\na,Y,iou,oops\n";
        match ScoreTable::read_csv(csv.as_bytes()) {
            Err(Error::Table { row: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn identical_samples() {
        let r = ttest2(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], &DEFAULT_ALPHAS).unwrap();
        assert_eq!((r.t, r.p), (0.0, 1.0));
        assert_eq!(r.h_values(), [0, 0, 0]);
    }

    #[test]
    fn reference_example() {
        // scipy.stats.ttest_ind([1,2,3,4], [2,3,4,5])
        let r = ttest2(&[1.0, 2.0, 3.0, 4.0], &[2.0, 3.0, 4.0, 5.0], &DEFAULT_ALPHAS).unwrap();
        assert!((r.t - -1.0954451150103321).abs() < 1e-12);
        assert_eq!(r.df, 6.0);
        assert!((r.p - 0.3153335962012298).abs() < 1e-10);
    }

    #[test]
    fn degenerate_variance() {
        let r = ttest2(&[2.0, 2.0], &[2.0, 2.0, 2.0], &DEFAULT_ALPHAS).unwrap();
        assert_eq!((r.t, r.p, r.degenerate), (0.0, 1.0, false));
        let r = ttest2(&[1.0, 1.0], &[3.0, 3.0], &DEFAULT_ALPHAS).unwrap();
        assert_eq!(r.p, 0.0);
        assert!(r.degenerate);
        assert_eq!(r.h_values(), [1, 1, 1]);
        assert!(matches!(ttest2(&[1.0], &[1.0, 2.0], &[]), Err(Error::SampleTooSmall(1, 2))));
    }

    #[test]
    fn published_decisions() {
        assert_eq!(ttest2_decide(0.0249), [1, 1, 1]);
        assert_eq!(ttest2_decide(0.0705), [0, 1, 1]);
        for row in published::ROWS {
            assert_eq!(ttest2_decide(row.p), row.h, "{row:?}");
        }
    }

    fn ttest2_decide(p: f64) -> [u8; 3] {
        DEFAULT_ALPHAS.map(|a| u8::from(decide(p, a)))
    }

    #[test]
    fn ln_gamma_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-14);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn by_metric_rejects_unknown_method() {
        let ranks = RankTable { rows: vec![RankRow { item: "a".into(), metric: "iou".into(), method: "X".into(), rank: 1.0 }] };
        assert!(matches!(ttest_by_metric(&ranks, "X", "Z", &DEFAULT_ALPHAS), Err(Error::Config(_))));
    }

    proptest! {
        #[test]
        fn rank_sum_conserved(scores in proptest::collection::vec(0u8..4, 1..12)) {
            let s: Vec<f64> = scores.iter().map(|&v| v as f64 / 4.0).collect();
            let n = s.len() as f64;
            prop_assert_eq!(rank_scores(&s).unwrap().iter().sum::<f64>(), n * (n + 1.0) / 2.0);
        }

        #[test]
        fn ranks_invariant_under_monotone_maps(s in proptest::collection::vec(0.0f64..1.0, 1..10)) {
            let mapped: Vec<f64> = s.iter().map(|v| (3.0 * v).exp() - 7.0).collect();
            prop_assert_eq!(rank_scores(&s).unwrap(), rank_scores(&mapped).unwrap());
        }

        #[test]
        fn ttest_matches_reference_and_is_symmetric(
            a in proptest::collection::vec(-5.0f64..5.0, 2..15),
            b in proptest::collection::vec(-5.0f64..5.0, 2..15),
        ) {
            let r = ttest2(&a, &b, &DEFAULT_ALPHAS).unwrap();
            let s = ttest2(&b, &a, &DEFAULT_ALPHAS).unwrap();
            prop_assert_eq!(r.t, -s.t);
            prop_assert_eq!(r.p, s.p);
            let reference = 2.0 * StudentsT::new(0.0, 1.0, r.df).unwrap().cdf(-r.t.abs());
            prop_assert!((r.p - reference).abs() <= 1e-10, "{} vs {}", r.p, reference);
            let h = r.h_values();
            prop_assert!(h.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
