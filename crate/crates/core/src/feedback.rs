//! Community feedback: k-index, distractor-normalized scores, Spearman
//! correlation, multi-community participation and k-index histograms.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::classify::ScoreTable;
use crate::error::{Error, Result};

/// Largest k such that at least k comments have karma strictly greater
/// than k.
pub fn k_index(karma: &[i64]) -> u64 {
    let mut sorted = karma.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    // after sorting, k qualifies iff the k-th largest value exceeds k
    let mut k = 0;
    for (i, &x) in sorted.iter().enumerate() {
        let cand = i as i64 + 1;
        if x > cand {
            k = cand as u64;
        } else {
            break;
        }
    }
    k
}

/// Scores relative to the distractor column: s̃ = s − s_distractor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedTable {
    pub model_id: String,
    /// Named communities, distractor excluded.
    pub communities: Vec<String>,
    pub rows: Vec<NormalizedRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedRow {
    pub doc_id: String,
    pub true_community: String,
    pub s_tilde: Vec<f64>,
}

impl NormalizedTable {
    pub fn column(&self, community: &str) -> Option<usize> {
        self.communities.iter().position(|c| c == community)
    }
}

pub fn normalize_scores(table: &ScoreTable, distractor: &str) -> Result<NormalizedTable> {
    let m = table
        .column(distractor)
        .ok_or_else(|| Error::MissingColumn(distractor.to_string()))?;
    let keep: Vec<usize> = (0..table.communities.len()).filter(|&j| j != m).collect();
    Ok(NormalizedTable {
        model_id: table.model_id.clone(),
        communities: keep.iter().map(|&j| table.communities[j].clone()).collect(),
        rows: table
            .rows
            .iter()
            .map(|r| NormalizedRow {
                doc_id: r.doc_id.clone(),
                true_community: r.true_community.clone(),
                s_tilde: keep.iter().map(|&j| r.scores[j] - r.scores[m]).collect(),
            })
            .collect(),
    })
}

/// 1-based ranks, ties sharing their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation; `None` when either side is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho with a two-sided p-value. Both are `None` when
/// undefined (fewer than three pairs, or a constant side).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spearman {
    pub rho: Option<f64>,
    pub p_value: Option<f64>,
    pub n: usize,
}

impl Spearman {
    pub fn is_defined(&self) -> bool {
        self.rho.is_some()
    }

    pub fn significant(&self, level: f64) -> bool {
        self.p_value.is_some_and(|p| p < level)
    }
}

/// Two-sided p-value of a correlation under the t approximation.
pub fn t_test_p(rho: f64, n: usize) -> f64 {
    if rho.abs() >= 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<Spearman> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "spearman inputs differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Ok(Spearman { rho: None, p_value: None, n });
    }
    let rho = pearson(&average_ranks(x), &average_ranks(y));
    Ok(Spearman {
        rho,
        p_value: rho.map(|r| t_test_p(r, n)),
        n,
    })
}

/// Two-sided permutation p-value of Spearman's rho: the share of seeded
/// shuffles of `y` whose |rho| reaches the observed one (with the usual +1
/// correction).
pub fn permutation_p(x: &[f64], y: &[f64], permutations: usize, seed: u64) -> Result<Option<f64>> {
    let observed = match spearman(x, y)?.rho {
        Some(r) => r.abs(),
        None => return Ok(None),
    };
    let rx = average_ranks(x);
    let mut ry = average_ranks(y);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..permutations {
        ry.shuffle(&mut rng);
        if pearson(&rx, &ry).is_some_and(|r| r.abs() >= observed - 1e-12) {
            hits += 1;
        }
    }
    Ok(Some((hits + 1) as f64 / (permutations + 1) as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub community: String,
    pub model_id: String,
    pub n: usize,
    pub rho: Option<f64>,
    pub p_value: Option<f64>,
}

impl CorrelationResult {
    /// Table cell: rho to three decimals, starred when p < 0.05.
    pub fn cell(&self) -> String {
        match (self.rho, self.p_value) {
            (Some(r), Some(p)) => format!("{r:.3}{}", if p < 0.05 { "*" } else { "" }),
            _ => "undefined".to_string(),
        }
    }
}

/// Options for [`correlate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationOptions {
    /// Replace the t-approximation p-value with a permutation p-value.
    pub permutations: Option<usize>,
    pub seed: u64,
}

impl Default for CorrelationOptions {
    fn default() -> Self {
        CorrelationOptions {
            permutations: None,
            seed: 0,
        }
    }
}

/// Per named community, Spearman correlation between the community's own
/// s̃ column and the feedback value of its documents. Documents without a
/// feedback value are skipped.
pub fn correlate(
    table: &NormalizedTable,
    feedback: &BTreeMap<String, f64>,
    options: &CorrelationOptions,
) -> Result<Vec<CorrelationResult>> {
    let mut out = Vec::with_capacity(table.communities.len());
    for (j, community) in table.communities.iter().enumerate() {
        let (x, y): (Vec<f64>, Vec<f64>) = table
            .rows
            .iter()
            .filter(|r| &r.true_community == community)
            .filter_map(|r| feedback.get(&r.doc_id).map(|&k| (r.s_tilde[j], k)))
            .unzip();
        let s = spearman(&x, &y)?;
        let p_value = match (options.permutations, s.rho) {
            (Some(n), Some(_)) => permutation_p(&x, &y, n, options.seed)?,
            _ => s.p_value,
        };
        out.push(CorrelationResult {
            community: community.clone(),
            model_id: table.model_id.clone(),
            n: s.n,
            rho: s.rho,
            p_value,
        });
    }
    Ok(out)
}

/// Thread-level correlation with post karma (`doc_id → karma`).
pub fn correlate_threads(
    table: &NormalizedTable,
    post_karma: &BTreeMap<String, i64>,
    options: &CorrelationOptions,
) -> Result<Vec<CorrelationResult>> {
    let fb = post_karma.iter().map(|(k, &v)| (k.clone(), v as f64)).collect();
    correlate(table, &fb, options)
}

/// User-level correlation with k-index (`user doc id → k-index`).
pub fn correlate_users(
    table: &NormalizedTable,
    k_indices: &BTreeMap<String, u64>,
    options: &CorrelationOptions,
) -> Result<Vec<CorrelationResult>> {
    let fb = k_indices.iter().map(|(k, &v)| (k.clone(), v as f64)).collect();
    correlate(table, &fb, options)
}

/// Writes communities as rows and models as columns, cells as rho with a
/// star for p < 0.05.
pub fn write_correlation_csv<W: Write>(w: W, results: &[CorrelationResult]) -> Result<()> {
    let models: Vec<&str> = {
        let mut seen = Vec::new();
        for r in results {
            if !seen.contains(&r.model_id.as_str()) {
                seen.push(r.model_id.as_str());
            }
        }
        seen
    };
    let mut grid: BTreeMap<&str, BTreeMap<&str, &CorrelationResult>> = BTreeMap::new();
    for r in results {
        grid.entry(&r.community).or_default().insert(&r.model_id, r);
    }
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["community"];
    header.extend(&models);
    out.write_record(&header)?;
    for (community, row) in &grid {
        let mut rec = vec![community.to_string()];
        rec.extend(models.iter().map(|m| row.get(m).map(|r| r.cell()).unwrap_or_default()));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Activity of one user in one community.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserCommunityStat {
    pub author: String,
    pub community: String,
    pub comments: usize,
    pub k_index: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MultiCommunityOptions {
    pub min_comments: usize,
    pub high_k: u64,
    pub low_k: u64,
    /// k-index levels counted in a user's second-best community.
    pub secondary_k: Vec<u64>,
}

impl Default for MultiCommunityOptions {
    fn default() -> Self {
        MultiCommunityOptions {
            min_comments: 100,
            high_k: 100,
            low_k: 5,
            secondary_k: vec![50, 20],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub users: usize,
    /// Median number of communities; `None` for an empty group.
    pub median_communities: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiCommunitySummary {
    /// Users with at least `min_comments` comments overall.
    pub active_users: usize,
    /// max k-index ≥ high_k.
    pub high: GroupSummary,
    /// max k-index ≤ low_k.
    pub low: GroupSummary,
    /// (level, high-group users whose second-best k-index reaches it).
    pub secondary: Vec<(u64, usize)>,
}

fn median(mut v: Vec<usize>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_unstable();
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    })
}

pub fn multicommunity_stats(stats: &[UserCommunityStat], options: &MultiCommunityOptions) -> MultiCommunitySummary {
    let mut users: BTreeMap<&str, Vec<&UserCommunityStat>> = BTreeMap::new();
    for s in stats.iter().filter(|s| s.comments > 0) {
        users.entry(&s.author).or_default().push(s);
    }
    let mut high = Vec::new();
    let mut low = Vec::new();
    let mut secondary = vec![0usize; options.secondary_k.len()];
    let mut active = 0;
    for rows in users.values() {
        let total: usize = rows.iter().map(|r| r.comments).sum();
        if total < options.min_comments {
            continue;
        }
        active += 1;
        let communities = rows.iter().map(|r| &r.community).collect::<BTreeSet<_>>().len();
        let mut ks: Vec<u64> = rows.iter().map(|r| r.k_index).collect();
        ks.sort_unstable_by(|a, b| b.cmp(a));
        let max_k = ks[0];
        if max_k >= options.high_k {
            high.push(communities);
            let second = ks.get(1).copied().unwrap_or(0);
            for (slot, &level) in secondary.iter_mut().zip(&options.secondary_k) {
                if second >= level {
                    *slot += 1;
                }
            }
        }
        if max_k <= options.low_k {
            low.push(communities);
        }
    }
    MultiCommunitySummary {
        active_users: active,
        high: GroupSummary {
            users: high.len(),
            median_communities: median(high),
        },
        low: GroupSummary {
            users: low.len(),
            median_communities: median(low),
        },
        secondary: options.secondary_k.iter().copied().zip(secondary).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    /// Lower edge of the bin.
    pub bin: u64,
    pub count: usize,
    /// `None` for empty bins.
    pub log10_count: Option<f64>,
}

/// Integer bins of the given width from 0 through the largest value.
pub fn kindex_histogram(values: &[u64], width: u64) -> Result<Vec<HistogramBin>> {
    if values.is_empty() {
        return Err(Error::Empty("k-index histogram input"));
    }
    if width == 0 {
        return Err(Error::InvalidArgument("histogram bin width must be positive".into()));
    }
    let max = *values.iter().max().expect("nonempty");
    let mut counts = vec![0usize; (max / width) as usize + 1];
    for &v in values {
        counts[(v / width) as usize] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| HistogramBin {
            bin: i as u64 * width,
            count: c,
            log10_count: (c > 0).then(|| (c as f64).log10()),
        })
        .collect())
}

pub fn write_histogram_csv<W: Write>(w: W, community: &str, bins: &[HistogramBin]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["community", "bin", "count", "log10_count"])?;
    for b in bins {
        let log = b.log10_count.map(|x| format!("{x:.6}")).unwrap_or_default();
        out.write_record([community, &b.bin.to_string(), &b.count.to_string(), &log])?;
    }
    out.flush()?;
    Ok(())
}
