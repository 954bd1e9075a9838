//! Trigram language models with interpolated modified Kneser-Ney or
//! Witten-Bell smoothing, and document scoring.
//!
//! Every sequence is padded as `<s> <s> w1 .. wn </s>`; each of the n+1
//! predicted positions contributes exactly one trigram, one bigram and one
//! unigram event, so lower-order counts are marginals of the trigram
//! counts. Probabilities are kept as natural logs in a back-off layout
//! (stored n-gram probability plus per-context back-off weight), which is
//! exact for interpolated models and maps one-to-one onto the ARPA text
//! format.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::ops::{Add, AddAssign};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::Token;
use crate::vocab::{SymbolId, Vocabulary};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

/// Discount used when count-of-counts leave a modified-KN discount undefined.
pub const FALLBACK_DISCOUNT: f64 = 0.5;

// ARPA placeholder for events that are never predicted.
const ARPA_NEVER: f64 = -99.0;

type Bigram = (SymbolId, SymbolId);
type Trigram = (SymbolId, SymbolId, SymbolId);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    ModifiedKn,
    WittenBell,
}

impl fmt::Display for Smoothing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Smoothing::ModifiedKn => "modified_kn",
            Smoothing::WittenBell => "witten_bell",
        })
    }
}

impl FromStr for Smoothing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "modified_kn" => Ok(Smoothing::ModifiedKn),
            "witten_bell" => Ok(Smoothing::WittenBell),
            other => Err(Error::InvalidArgument(format!("unknown smoothing {other:?}"))),
        }
    }
}

/// Trigram, bigram and unigram event counts over a symbol space of size
/// `n_symbols` (boundary symbols excluded).
///
/// Ids `n_symbols` and `n_symbols + 1` stand for `</s>` and `<s>`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NgramCounts {
    n_symbols: usize,
    pub unigrams: HashMap<SymbolId, u64>,
    pub bigrams: HashMap<Bigram, u64>,
    pub trigrams: HashMap<Trigram, u64>,
}

impl NgramCounts {
    pub fn new(n_symbols: usize) -> Self {
        NgramCounts {
            n_symbols,
            ..Default::default()
        }
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn eos(&self) -> SymbolId {
        self.n_symbols as SymbolId
    }

    pub fn bos(&self) -> SymbolId {
        self.n_symbols as SymbolId + 1
    }

    pub fn is_empty(&self) -> bool {
        self.trigrams.is_empty()
    }

    /// Counts one padded sequence.
    pub fn add_sequence(&mut self, seq: &[SymbolId]) -> Result<()> {
        if let Some(&bad) = seq.iter().find(|&&s| s as usize >= self.n_symbols) {
            return Err(Error::SymbolOutOfSpace {
                id: bad,
                size: self.n_symbols,
            });
        }
        let (bos, eos) = (self.bos(), self.eos());
        let (mut u, mut v) = (bos, bos);
        for &w in seq.iter().chain(std::iter::once(&eos)) {
            *self.trigrams.entry((u, v, w)).or_insert(0) += 1;
            *self.bigrams.entry((v, w)).or_insert(0) += 1;
            *self.unigrams.entry(w).or_insert(0) += 1;
            u = v;
            v = w;
        }
        Ok(())
    }

    pub fn merge(mut self, other: NgramCounts) -> Self {
        debug_assert_eq!(self.n_symbols, other.n_symbols);
        for (k, c) in other.trigrams {
            *self.trigrams.entry(k).or_insert(0) += c;
        }
        for (k, c) in other.bigrams {
            *self.bigrams.entry(k).or_insert(0) += c;
        }
        for (k, c) in other.unigrams {
            *self.unigrams.entry(k).or_insert(0) += c;
        }
        self
    }

    /// Σ_w c(u, v, w).
    pub fn context_count(&self, u: SymbolId, v: SymbolId) -> u64 {
        self.trigrams
            .iter()
            .filter(|((a, b, _), _)| *a == u && *b == v)
            .map(|(_, c)| c)
            .sum()
    }
}

/// Counts all sequences, in parallel.
pub fn count_ngrams<S>(sequences: &[S], n_symbols: usize) -> Result<NgramCounts>
where
    S: AsRef<[SymbolId]> + Sync,
{
    sequences
        .par_iter()
        .try_fold(
            || NgramCounts::new(n_symbols),
            |mut acc, s| {
                acc.add_sequence(s.as_ref())?;
                Ok(acc)
            },
        )
        .try_reduce(|| NgramCounts::new(n_symbols), |a, b| Ok(a.merge(b)))
}

/// Modified-KN discounts D1, D2, D3+ from counts-of-counts n1..n4.
pub fn kn_discounts(n: [u64; 4]) -> [f64; 3] {
    let [n1, n2, n3, n4] = n.map(|x| x as f64);
    let y = if n1 + 2.0 * n2 > 0.0 {
        n1 / (n1 + 2.0 * n2)
    } else {
        0.0
    };
    let checked = |d: f64, denom: f64, cap: f64| {
        if denom > 0.0 && d > 0.0 && d <= cap {
            d
        } else {
            FALLBACK_DISCOUNT
        }
    };
    [
        checked(1.0 - 2.0 * y * n2 / n1, n1, 1.0),
        checked(2.0 - 3.0 * y * n3 / n2, n2, 2.0),
        checked(3.0 - 4.0 * y * n4 / n3, n3, 3.0),
    ]
}

fn count_of_counts<'a>(counts: impl Iterator<Item = &'a u64>) -> [u64; 4] {
    let mut n = [0u64; 4];
    for &c in counts {
        if (1..=4).contains(&c) {
            n[c as usize - 1] += 1;
        }
    }
    n
}

fn discount_for(d: &[f64; 3], c: u64) -> f64 {
    match c {
        0 => 0.0,
        1 => d[0],
        2 => d[1],
        _ => d[2],
    }
}

#[derive(Default)]
struct ContextStats {
    total: u64,
    // distinct continuations with count 1, 2, 3+
    buckets: [u64; 3],
}

impl ContextStats {
    fn add(&mut self, c: u64) {
        self.total += c;
        self.buckets[(c.min(3) - 1) as usize] += 1;
    }

    fn types(&self) -> u64 {
        self.buckets.iter().sum()
    }

    fn kn_gamma(&self, d: &[f64; 3]) -> f64 {
        (d[0] * self.buckets[0] as f64 + d[1] * self.buckets[1] as f64 + d[2] * self.buckets[2] as f64)
            / self.total as f64
    }
}

/// A smoothed trigram model. Immutable after estimation.
///
/// Invariant: for every context, the conditional distribution over the
/// vocabulary symbols plus `</s>` sums to one and is strictly positive.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigramModel {
    smoothing: Smoothing,
    symbols: Vec<String>,
    /// ln p(w) for every predictable symbol (vocabulary plus `</s>`).
    unigram: Vec<f64>,
    /// Back-off weight of unigram contexts, indexed by id (incl. `<s>`).
    unigram_bow: Vec<f64>,
    bigram: HashMap<Bigram, f64>,
    bigram_bow: HashMap<Bigram, f64>,
    trigram: HashMap<Trigram, f64>,
    /// Modified-KN discounts per order (unigram, bigram, trigram).
    discounts: Option<[[f64; 3]; 3]>,
}

/// Log-probability of a document or sequence.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StyleScore {
    /// Natural log.
    pub total_logprob: f64,
    pub token_count: usize,
}

impl StyleScore {
    pub fn per_token(&self) -> f64 {
        if self.token_count == 0 {
            0.0
        } else {
            self.total_logprob / self.token_count as f64
        }
    }

    pub fn perplexity(&self) -> f64 {
        (-self.per_token()).exp()
    }
}

impl Add for StyleScore {
    type Output = StyleScore;

    fn add(self, rhs: StyleScore) -> StyleScore {
        StyleScore {
            total_logprob: self.total_logprob + rhs.total_logprob,
            token_count: self.token_count + rhs.token_count,
        }
    }
}

impl AddAssign for StyleScore {
    fn add_assign(&mut self, rhs: StyleScore) {
        *self = *self + rhs;
    }
}

fn check_symbols(counts: &NgramCounts, symbols: &[String]) -> Result<()> {
    if counts.is_empty() {
        return Err(Error::Empty("n-gram counts"));
    }
    if symbols.len() != counts.n_symbols() {
        return Err(Error::InvalidArgument(format!(
            "{} symbol names for a space of {}",
            symbols.len(),
            counts.n_symbols()
        )));
    }
    Ok(())
}

/// Interpolated modified Kneser-Ney. Lower orders use continuation counts;
/// the unigram level interpolates with a uniform distribution over the
/// predictable symbols.
pub fn estimate_kn(counts: &NgramCounts, symbols: &[String]) -> Result<TrigramModel> {
    check_symbols(counts, symbols)?;
    let n_pred = counts.n_symbols() + 1;

    // continuation counts
    let mut cont2: HashMap<Bigram, u64> = HashMap::new();
    for &(_, v, w) in counts.trigrams.keys() {
        *cont2.entry((v, w)).or_insert(0) += 1;
    }
    let mut cont1 = vec![0u64; n_pred];
    for &(_, w) in cont2.keys() {
        cont1[w as usize] += 1;
    }

    let d3 = kn_discounts(count_of_counts(counts.trigrams.values()));
    let d2 = kn_discounts(count_of_counts(cont2.values()));
    let d1 = kn_discounts(count_of_counts(cont1.iter()));

    // unigram level
    let mut uni_stats = ContextStats::default();
    for &c in cont1.iter().filter(|&&c| c > 0) {
        uni_stats.add(c);
    }
    let uni_gamma = uni_stats.kn_gamma(&d1);
    let uniform = 1.0 / n_pred as f64;
    let unigram_p: Vec<f64> = cont1
        .iter()
        .map(|&c| (c as f64 - discount_for(&d1, c)).max(0.0) / uni_stats.total as f64 + uni_gamma * uniform)
        .collect();

    // bigram level
    let mut ctx2: HashMap<SymbolId, ContextStats> = HashMap::new();
    for (&(v, _), &c) in &cont2 {
        ctx2.entry(v).or_default().add(c);
    }
    let gamma2: HashMap<SymbolId, f64> = ctx2.iter().map(|(&v, s)| (v, s.kn_gamma(&d2))).collect();
    let bigram_p: HashMap<Bigram, f64> = cont2
        .iter()
        .map(|(&(v, w), &c)| {
            let s = &ctx2[&v];
            let p = (c as f64 - discount_for(&d2, c)).max(0.0) / s.total as f64
                + gamma2[&v] * unigram_p[w as usize];
            ((v, w), p)
        })
        .collect();

    // trigram level
    let mut ctx3: HashMap<Bigram, ContextStats> = HashMap::new();
    for (&(u, v, _), &c) in &counts.trigrams {
        ctx3.entry((u, v)).or_default().add(c);
    }
    let gamma3: HashMap<Bigram, f64> = ctx3.iter().map(|(&k, s)| (k, s.kn_gamma(&d3))).collect();
    let trigram_p: HashMap<Trigram, f64> = counts
        .trigrams
        .iter()
        .map(|(&(u, v, w), &c)| {
            let s = &ctx3[&(u, v)];
            let p = (c as f64 - discount_for(&d3, c)).max(0.0) / s.total as f64
                + gamma3[&(u, v)] * bigram_p[&(v, w)];
            ((u, v, w), p)
        })
        .collect();

    Ok(assemble(
        Smoothing::ModifiedKn,
        symbols,
        unigram_p,
        gamma2,
        bigram_p,
        gamma3,
        trigram_p,
        Some([d1, d2, d3]),
    ))
}

/// Witten-Bell: p(w|h) = (c(h,w) + T(h)·p(w|h')) / (c(h) + T(h)), with T(h)
/// the number of distinct continuations of h, bottoming out in a uniform
/// distribution over the predictable symbols.
pub fn estimate_wb(counts: &NgramCounts, symbols: &[String]) -> Result<TrigramModel> {
    check_symbols(counts, symbols)?;
    let n_pred = counts.n_symbols() + 1;

    let mut uni_counts = vec![0u64; n_pred];
    for (&w, &c) in &counts.unigrams {
        uni_counts[w as usize] += c;
    }
    let total: u64 = uni_counts.iter().sum();
    let types = uni_counts.iter().filter(|&&c| c > 0).count() as f64;
    let uniform = 1.0 / n_pred as f64;
    let unigram_p: Vec<f64> = uni_counts
        .iter()
        .map(|&c| (c as f64 + types * uniform) / (total as f64 + types))
        .collect();

    let mut ctx2: HashMap<SymbolId, ContextStats> = HashMap::new();
    for (&(v, _), &c) in &counts.bigrams {
        ctx2.entry(v).or_default().add(c);
    }
    let wb_gamma = |s: &ContextStats| s.types() as f64 / (s.total + s.types()) as f64;
    let gamma2: HashMap<SymbolId, f64> = ctx2.iter().map(|(&v, s)| (v, wb_gamma(s))).collect();
    let bigram_p: HashMap<Bigram, f64> = counts
        .bigrams
        .iter()
        .map(|(&(v, w), &c)| {
            let s = &ctx2[&v];
            let p = (c as f64 + s.types() as f64 * unigram_p[w as usize])
                / (s.total + s.types()) as f64;
            ((v, w), p)
        })
        .collect();

    let mut ctx3: HashMap<Bigram, ContextStats> = HashMap::new();
    for (&(u, v, _), &c) in &counts.trigrams {
        ctx3.entry((u, v)).or_default().add(c);
    }
    let gamma3: HashMap<Bigram, f64> = ctx3.iter().map(|(&k, s)| (k, wb_gamma(s))).collect();
    let trigram_p: HashMap<Trigram, f64> = counts
        .trigrams
        .iter()
        .map(|(&(u, v, w), &c)| {
            let s = &ctx3[&(u, v)];
            let lower = bigram_p[&(v, w)];
            let p = (c as f64 + s.types() as f64 * lower) / (s.total + s.types()) as f64;
            ((u, v, w), p)
        })
        .collect();

    Ok(assemble(
        Smoothing::WittenBell,
        symbols,
        unigram_p,
        gamma2,
        bigram_p,
        gamma3,
        trigram_p,
        None,
    ))
}

/// Estimates with the given smoothing.
pub fn estimate(counts: &NgramCounts, symbols: &[String], smoothing: Smoothing) -> Result<TrigramModel> {
    match smoothing {
        Smoothing::ModifiedKn => estimate_kn(counts, symbols),
        Smoothing::WittenBell => estimate_wb(counts, symbols),
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    smoothing: Smoothing,
    symbols: &[String],
    unigram_p: Vec<f64>,
    gamma2: HashMap<SymbolId, f64>,
    bigram_p: HashMap<Bigram, f64>,
    gamma3: HashMap<Bigram, f64>,
    trigram_p: HashMap<Trigram, f64>,
    discounts: Option<[[f64; 3]; 3]>,
) -> TrigramModel {
    let n_ids = symbols.len() + 2;
    let mut unigram_bow = vec![0.0; n_ids];
    for (v, g) in gamma2 {
        unigram_bow[v as usize] = g.ln();
    }
    TrigramModel {
        smoothing,
        symbols: symbols.to_vec(),
        unigram: unigram_p.into_iter().map(f64::ln).collect(),
        unigram_bow,
        bigram: bigram_p.into_iter().map(|(k, p)| (k, p.ln())).collect(),
        bigram_bow: gamma3.into_iter().map(|(k, g)| (k, g.ln())).collect(),
        trigram: trigram_p.into_iter().map(|(k, p)| (k, p.ln())).collect(),
        discounts,
    }
}

impl TrigramModel {
    pub fn smoothing(&self) -> Smoothing {
        self.smoothing
    }

    /// Vocabulary symbols, boundary symbols excluded.
    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn n_symbols(&self) -> usize {
        self.symbols.len()
    }

    pub fn eos(&self) -> SymbolId {
        self.symbols.len() as SymbolId
    }

    pub fn bos(&self) -> SymbolId {
        self.symbols.len() as SymbolId + 1
    }

    pub fn discounts(&self) -> Option<&[[f64; 3]; 3]> {
        self.discounts.as_ref()
    }

    /// Ids that can be predicted: every vocabulary symbol plus `</s>`.
    pub fn predictable(&self) -> impl Iterator<Item = SymbolId> {
        0..=self.eos()
    }

    /// Id of a symbol name, including the boundary symbols.
    pub fn id_of(&self, name: &str) -> Option<SymbolId> {
        match name {
            EOS => Some(self.eos()),
            BOS => Some(self.bos()),
            _ => self.symbols.iter().position(|s| s == name).map(|i| i as SymbolId),
        }
    }

    fn bigram_logprob(&self, v: SymbolId, w: SymbolId) -> f64 {
        match self.bigram.get(&(v, w)) {
            Some(&lp) => lp,
            None => self.unigram_bow[v as usize] + self.unigram[w as usize],
        }
    }

    /// ln p(w | u, v).
    pub fn logprob(&self, u: SymbolId, v: SymbolId, w: SymbolId) -> f64 {
        match self.trigram.get(&(u, v, w)) {
            Some(&lp) => lp,
            None => self.bigram_bow.get(&(u, v)).copied().unwrap_or(0.0) + self.bigram_logprob(v, w),
        }
    }

    pub fn prob(&self, u: SymbolId, v: SymbolId, w: SymbolId) -> f64 {
        self.logprob(u, v, w).exp()
    }

    /// Lowest-order probability of `w` (the continuation distribution for KN).
    pub fn unigram_prob(&self, w: SymbolId) -> f64 {
        self.unigram[w as usize].exp()
    }

    /// Scores one sequence, `</s>` included and `<s>` padding not scored.
    pub fn score(&self, seq: &[SymbolId]) -> Result<StyleScore> {
        let n = self.symbols.len();
        if let Some(&bad) = seq.iter().find(|&&s| s as usize >= n) {
            return Err(Error::SymbolOutOfSpace { id: bad, size: n });
        }
        let (mut u, mut v) = (self.bos(), self.bos());
        let mut total = 0.0;
        for &w in seq.iter().chain(std::iter::once(&self.eos())) {
            total += self.logprob(u, v, w);
            u = v;
            v = w;
        }
        Ok(StyleScore {
            total_logprob: total,
            token_count: seq.len() + 1,
        })
    }

    /// Scores a document (ordered token sequences), each sequence padded on
    /// its own, totals and counts summed.
    pub fn score_document(&self, vocab: &Vocabulary, document: &[Vec<Token>]) -> Result<StyleScore> {
        if document.is_empty() {
            return Err(Error::Empty("document has no sequences"));
        }
        let mut out = StyleScore::default();
        for seq in document {
            out += self.score(&vocab.apply(seq)?)?;
        }
        Ok(out)
    }

    /// Writes the model in ARPA back-off format (log10, as the format
    /// expects). A comment preamble records smoothing and log base.
    pub fn write_arpa<W: Write>(&self, mut w: W, header: &[String]) -> Result<()> {
        let l10 = |x: f64| x / std::f64::consts::LN_10;
        let name = |id: SymbolId| -> &str {
            if id == self.eos() {
                EOS
            } else if id == self.bos() {
                BOS
            } else {
                &self.symbols[id as usize]
            }
        };
        for line in header {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "# smoothing={} logbase=10", self.smoothing)?;
        if let Some(d) = &self.discounts {
            for (order, d) in d.iter().enumerate() {
                writeln!(w, "# discounts order{}={} {} {}", order + 1, d[0], d[1], d[2])?;
            }
        }

        let bos = self.bos();
        let bigrams: BTreeMap<Bigram, f64> = self.bigram.iter().map(|(k, v)| (*k, *v)).collect();
        let trigrams: BTreeMap<Trigram, f64> = self.trigram.iter().map(|(k, v)| (*k, *v)).collect();
        let has_bos_bos = self.bigram_bow.contains_key(&(bos, bos));

        writeln!(w, "\n\\data\\")?;
        writeln!(w, "ngram 1={}", self.symbols.len() + 2)?;
        writeln!(w, "ngram 2={}", bigrams.len() + usize::from(has_bos_bos))?;
        writeln!(w, "ngram 3={}", trigrams.len())?;

        writeln!(w, "\n\\1-grams:")?;
        for id in 0..=bos {
            let lp = if id == bos { ARPA_NEVER } else { l10(self.unigram[id as usize]) };
            let bow = self.unigram_bow[id as usize];
            if bow != 0.0 || self.bigram.keys().any(|&(v, _)| v == id) {
                writeln!(w, "{lp}\t{}\t{}", name(id), l10(bow))?;
            } else {
                writeln!(w, "{lp}\t{}", name(id))?;
            }
        }

        writeln!(w, "\n\\2-grams:")?;
        if has_bos_bos {
            writeln!(w, "{ARPA_NEVER}\t{BOS} {BOS}\t{}", l10(self.bigram_bow[&(bos, bos)]))?;
        }
        for (&(u, v), &lp) in &bigrams {
            match self.bigram_bow.get(&(u, v)) {
                Some(&bow) => writeln!(w, "{}\t{} {}\t{}", l10(lp), name(u), name(v), l10(bow))?,
                None => writeln!(w, "{}\t{} {}", l10(lp), name(u), name(v))?,
            }
        }

        writeln!(w, "\n\\3-grams:")?;
        for (&(u, v, x), &lp) in &trigrams {
            writeln!(w, "{}\t{} {} {}", l10(lp), name(u), name(v), name(x))?;
        }
        writeln!(w, "\n\\end\\")?;
        Ok(())
    }

    pub fn save_arpa(&self, path: &Path, header: &[String]) -> Result<()> {
        let mut buf = Vec::new();
        self.write_arpa(&mut buf, header)?;
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    /// Reads a model written by [`write_arpa`](Self::write_arpa). Returns the
    /// model and the free-form `#` header lines (without the `# ` prefix).
    pub fn read_arpa<R: BufRead>(reader: R) -> Result<(TrigramModel, Vec<String>)> {
        let bad = |m: String| Error::ModelFormat(m);
        let mut header = Vec::new();
        let mut smoothing = None;
        let mut discounts = [[0.0; 3]; 3];
        let mut have_discounts = false;
        let mut section = 0usize;
        let mut rows: [Vec<(f64, Vec<String>, Option<f64>)>; 3] = Default::default();

        for line in reader.lines() {
            let line = line?;
            let line = line.trim_end();
            if let Some(comment) = line.strip_prefix("# ") {
                if let Some(rest) = comment.strip_prefix("smoothing=") {
                    let s = rest.split_whitespace().next().unwrap_or_default();
                    smoothing = Some(s.parse::<Smoothing>()?);
                } else if let Some(rest) = comment.strip_prefix("discounts order") {
                    let (order, vals) = rest
                        .split_once('=')
                        .ok_or_else(|| bad(format!("bad discount line {line:?}")))?;
                    let order: usize = order.parse().map_err(|_| bad(format!("bad order in {line:?}")))?;
                    let vals: Vec<f64> = vals
                        .split_whitespace()
                        .map(|v| v.parse().map_err(|_| bad(format!("bad discount {v:?}"))))
                        .collect::<Result<_>>()?;
                    if !(1..=3).contains(&order) || vals.len() != 3 {
                        return Err(bad(format!("bad discount line {line:?}")));
                    }
                    discounts[order - 1].copy_from_slice(&vals);
                    have_discounts = true;
                } else {
                    header.push(comment.to_string());
                }
                continue;
            }
            match line {
                "" | "\\data\\" | "\\end\\" => continue,
                "\\1-grams:" => section = 1,
                "\\2-grams:" => section = 2,
                "\\3-grams:" => section = 3,
                l if l.starts_with("ngram ") => continue,
                l if section > 0 => {
                    let mut parts = l.split('\t');
                    let lp: f64 = parts
                        .next()
                        .and_then(|x| x.parse().ok())
                        .ok_or_else(|| bad(format!("bad n-gram line {l:?}")))?;
                    let gram: Vec<String> = parts
                        .next()
                        .ok_or_else(|| bad(format!("bad n-gram line {l:?}")))?
                        .split(' ')
                        .map(str::to_string)
                        .collect();
                    let bow = match parts.next() {
                        Some(b) => Some(b.parse::<f64>().map_err(|_| bad(format!("bad back-off in {l:?}")))?),
                        None => None,
                    };
                    if gram.len() != section {
                        return Err(bad(format!("expected {section}-gram in {l:?}")));
                    }
                    rows[section - 1].push((lp, gram, bow));
                }
                l => return Err(bad(format!("unexpected line {l:?}"))),
            }
        }

        let smoothing = smoothing.ok_or_else(|| bad("missing smoothing header".into()))?;
        let ln = |x: f64| x * std::f64::consts::LN_10;

        let symbols: Vec<String> = rows[0]
            .iter()
            .map(|(_, g, _)| g[0].clone())
            .filter(|s| s != BOS && s != EOS)
            .collect();
        let n = symbols.len();
        let mut ids: HashMap<&str, SymbolId> =
            symbols.iter().enumerate().map(|(i, s)| (s.as_str(), i as SymbolId)).collect();
        ids.insert(EOS, n as SymbolId);
        ids.insert(BOS, n as SymbolId + 1);
        let id = |s: &str| ids.get(s).copied().ok_or_else(|| bad(format!("unknown symbol {s:?}")));

        let mut unigram = vec![f64::NEG_INFINITY; n + 1];
        let mut unigram_bow = vec![0.0; n + 2];
        for (lp, g, bow) in &rows[0] {
            let i = id(&g[0])?;
            if (i as usize) <= n {
                unigram[i as usize] = ln(*lp);
            }
            if let Some(b) = bow {
                unigram_bow[i as usize] = ln(*b);
            }
        }
        let mut bigram = HashMap::new();
        let mut bigram_bow = HashMap::new();
        for (lp, g, bow) in &rows[1] {
            let k = (id(&g[0])?, id(&g[1])?);
            if g[1] != BOS {
                bigram.insert(k, ln(*lp));
            }
            if let Some(b) = bow {
                bigram_bow.insert(k, ln(*b));
            }
        }
        let mut trigram = HashMap::new();
        for (lp, g, _) in &rows[2] {
            trigram.insert((id(&g[0])?, id(&g[1])?, id(&g[2])?), ln(*lp));
        }
        if unigram.iter().any(|x| !x.is_finite()) {
            return Err(bad("unigram section is incomplete".into()));
        }
        let model = TrigramModel {
            smoothing,
            symbols,
            unigram,
            unigram_bow,
            bigram,
            bigram_bow,
            trigram,
            discounts: have_discounts.then_some(discounts),
        };
        Ok((model, header))
    }

    pub fn load_arpa(path: &Path) -> Result<(TrigramModel, Vec<String>)> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        TrigramModel::read_arpa(BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::TagSet;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
    }

    fn counts_of(seqs: &[&[SymbolId]], n: usize) -> NgramCounts {
        count_ngrams(seqs, n).unwrap()
    }

    fn assert_normalized(m: &TrigramModel) {
        let ids: Vec<SymbolId> = (0..=m.bos()).collect();
        for &u in &ids {
            for &v in &ids {
                if v == m.eos() || (u == m.eos()) {
                    continue;
                }
                let s: f64 = m.predictable().map(|w| m.prob(u, v, w)).sum();
                assert!((s - 1.0).abs() < 1e-9, "context ({u},{v}) sums to {s}");
                assert!(m.predictable().all(|w| m.prob(u, v, w) > 0.0));
            }
        }
    }

    #[test]
    fn counts_pad_each_sequence() {
        let c = counts_of(&[&[0]], 1);
        let (bos, eos) = (c.bos(), c.eos());
        assert_eq!(c.trigrams[&(bos, bos, 0)], 1);
        assert_eq!(c.trigrams[&(bos, 0, eos)], 1);
        assert_eq!(c.trigrams.len(), 2);
        let twice = counts_of(&[&[0, 1], &[0, 1]], 2);
        assert_eq!(twice.trigrams[&(bos + 1, bos + 1, 0)], 2);
        assert!(counts_of(&[], 3).is_empty());
        assert!(count_ngrams(&[vec![5u32]], 3).is_err());
    }

    #[test]
    fn bigram_counts_are_trigram_marginals() {
        let c = counts_of(&[&[0, 1, 0, 1, 2], &[2, 2, 1]], 3);
        let mut marg: HashMap<Bigram, u64> = HashMap::new();
        for (&(_, v, w), &n) in &c.trigrams {
            *marg.entry((v, w)).or_insert(0) += n;
        }
        assert_eq!(marg, c.bigrams);
    }

    #[test]
    fn discount_formula_and_fallback() {
        let d = kn_discounts([2, 1, 0, 0]);
        assert!((d[0] - 0.5).abs() < 1e-15);
        assert!((d[1] - 2.0).abs() < 1e-15);
        assert_eq!(d[2], FALLBACK_DISCOUNT);
        assert_eq!(kn_discounts([0, 0, 0, 0]), [FALLBACK_DISCOUNT; 3]);
    }

    #[test]
    fn both_smoothers_normalize_on_toy_corpus() {
        // "a b a b c"
        let c = counts_of(&[&[0, 1, 0, 1, 2]], 3);
        assert_normalized(&estimate_kn(&c, &names(3)).unwrap());
        assert_normalized(&estimate_wb(&c, &names(3)).unwrap());
        let c = counts_of(&[&[0, 1], &[1, 1, 0], &[2]], 4);
        assert_normalized(&estimate_kn(&c, &names(4)).unwrap());
        assert_normalized(&estimate_wb(&c, &names(4)).unwrap());
    }

    #[test]
    fn unseen_symbol_keeps_positive_mass() {
        let c = counts_of(&[&[0, 0, 1]], 3);
        for m in [estimate_kn(&c, &names(3)).unwrap(), estimate_wb(&c, &names(3)).unwrap()] {
            assert!(m.prob(0, 0, 2) > 0.0);
            assert!(m.unigram_prob(2) > 0.0);
        }
    }

    #[test]
    fn wb_backoff_mass() {
        // context (a, b) seen 3 times with 2 distinct continuations
        let c = counts_of(&[&[0, 1, 2], &[0, 1, 2], &[0, 1]], 3);
        let m = estimate_wb(&c, &names(3)).unwrap();
        let (a, b) = (0, 1);
        assert_eq!(c.context_count(a, b), 3);
        assert!((m.bigram_bow[&(a, b)].exp() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn empty_counts_are_rejected() {
        let c = NgramCounts::new(2);
        assert!(estimate_kn(&c, &names(2)).is_err());
        assert!(estimate_wb(&c, &names(2)).is_err());
    }

    #[test]
    fn deterministic_corpus_scores_near_zero() {
        let seq: Vec<SymbolId> = vec![0; 400];
        let c = counts_of(&[&seq], 2);
        let m = estimate_wb(&c, &names(2)).unwrap();
        assert!(m.prob(0, 0, 0) > 0.99);
        let s = m.score(&seq).unwrap();
        assert!(s.per_token() < 0.0 && s.per_token() > -0.05, "{}", s.per_token());
    }

    #[test]
    fn scoring_is_additive_over_sequences() {
        let c = counts_of(&[&[0, 1, 0, 1, 2]], 3);
        let m = estimate_kn(&c, &names(3)).unwrap();
        let a = m.score(&[0, 1]).unwrap();
        let b = m.score(&[2, 2, 0]).unwrap();
        let ts = TagSet::default();
        let vocab = Vocabulary::word_only(["a", "b"]);
        // word_only over {a, b}: symbols a, b, <unk>
        let doc = vec![
            vec![Token::new("a", None), Token::new("b", None)],
            vec![Token::new("z", ts.get("NN")), Token::new("q", None), Token::new("a", None)],
        ];
        let d = m.score_document(&vocab, &doc).unwrap();
        assert!((d.total_logprob - (a.total_logprob + b.total_logprob)).abs() < 1e-12);
        assert_eq!(d.token_count, 3 + 4);
        let one = m.score_document(&vocab, &doc[..1]).unwrap();
        assert_eq!(one, a);
        let dup = m.score_document(&vocab, &[doc[0].clone(), doc[0].clone()]).unwrap();
        assert_eq!(dup.total_logprob, 2.0 * a.total_logprob);
        assert!(m.score_document(&vocab, &[]).is_err());
        assert!(m.score(&[7]).is_err());
    }

    #[test]
    fn arpa_round_trip() {
        let c = counts_of(&[&[0, 1, 0, 1, 2], &[2, 1]], 3);
        for m in [estimate_kn(&c, &names(3)).unwrap(), estimate_wb(&c, &names(3)).unwrap()] {
            let mut buf = Vec::new();
            m.write_arpa(&mut buf, &["config=abc".into()]).unwrap();
            let (back, header) = TrigramModel::read_arpa(buf.as_slice()).unwrap();
            assert_eq!(header, ["config=abc"]);
            assert_eq!(back.symbols(), m.symbols());
            assert_eq!(back.smoothing(), m.smoothing());
            for u in 0..=m.bos() {
                for v in 0..=m.bos() {
                    for w in m.predictable() {
                        let (x, y) = (m.logprob(u, v, w), back.logprob(u, v, w));
                        assert!((x - y).abs() < 1e-12, "{x} vs {y}");
                    }
                }
            }
            let mut again = Vec::new();
            back.write_arpa(&mut again, &["config=abc".into()]).unwrap();
            let (third, _) = TrigramModel::read_arpa(again.as_slice()).unwrap();
            assert_eq!(third.trigram.len(), m.trigram.len());
        }
    }
}
