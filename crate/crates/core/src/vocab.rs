//! Style vocabularies and their symbol spaces.
//!
//! Four recipes are supported: a closed word vocabulary with `<unk>`, two
//! hybrid vocabularies (a retained word list, every other token replaced by
//! its POS tag) and a tag-only vocabulary. Frequency ties are always broken
//! lexicographically.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{TagSet, Token};

pub const UNK: &str = "<unk>";

/// Cap on the default `word_only` vocabulary size.
pub const WORD_ONLY_CAP: usize = 156_000;
/// Size of the large hybrid vocabulary.
pub const HYB15K_WORDS: usize = 15_000;

/// Dense id of a symbol in a vocabulary's event space.
pub type SymbolId = u32;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    /// `None` for a table pooled over all communities.
    pub community: Option<String>,
    pub counts: HashMap<String, u64>,
    pub total_tokens: u64,
}

impl FrequencyTable {
    pub fn new(community: Option<String>) -> Self {
        FrequencyTable {
            community,
            ..Default::default()
        }
    }

    pub fn add(&mut self, surface: &str) {
        match self.counts.get_mut(surface) {
            Some(c) => *c += 1,
            None => {
                self.counts.insert(surface.to_string(), 1);
            }
        }
        self.total_tokens += 1;
    }

    /// Sums counts. The community label survives only if both sides agree.
    pub fn merge(&mut self, other: &FrequencyTable) {
        for (w, c) in &other.counts {
            *self.counts.entry(w.clone()).or_insert(0) += c;
        }
        self.total_tokens += other.total_tokens;
        if self.community != other.community {
            self.community = None;
        }
    }

    pub fn get(&self, surface: &str) -> u64 {
        self.counts.get(surface).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// All entries by descending count, ties lexicographic.
    pub fn ranked(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<(&str, u64)> = self.counts.iter().map(|(w, c)| (w.as_str(), *c)).collect();
        v.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    pub fn top(&self, k: usize) -> Vec<&str> {
        self.ranked().into_iter().take(k).map(|(w, _)| w).collect()
    }
}

/// Exact surface counts over a token stream.
pub fn count_frequencies<'a, I>(tokens: I, community: Option<&str>) -> FrequencyTable
where
    I: IntoIterator<Item = &'a str>,
{
    let mut t = FrequencyTable::new(community.map(str::to_string));
    for tok in tokens {
        t.add(tok);
    }
    t
}

/// Default `word_only` size: words seen at least twice, capped at 156K.
pub fn default_word_only_top_k(table: &FrequencyTable) -> usize {
    table.counts.values().filter(|&&c| c >= 2).count().clamp(1, WORD_ONLY_CAP)
}

/// Training token sequences of one community, in deterministic thread order.
#[derive(Clone, Debug)]
pub struct CommunityTokens {
    pub community: String,
    pub sequences: Vec<Vec<String>>,
}

impl CommunityTokens {
    pub fn token_count(&self) -> usize {
        self.sequences.iter().map(Vec::len).sum()
    }
}

/// The first N tokens of every community, N being the smallest community's
/// token total, concatenated in input order.
pub fn balanced_subset(communities: &[CommunityTokens]) -> Result<Vec<&str>> {
    if communities.len() < 2 {
        return Err(Error::InvalidArgument(
            "balanced subset needs at least two communities".into(),
        ));
    }
    if let Some(c) = communities.iter().find(|c| c.token_count() == 0) {
        return Err(Error::InvalidArgument(format!(
            "community {} has no training tokens",
            c.community
        )));
    }
    let n = communities.iter().map(CommunityTokens::token_count).min().unwrap_or(0);
    let mut out = Vec::with_capacity(n * communities.len());
    for c in communities {
        out.extend(c.sequences.iter().flatten().take(n).map(String::as_str));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VocabKind {
    WordOnly,
    Hybrid,
    TagOnly,
}

impl fmt::Display for VocabKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VocabKind::WordOnly => "word_only",
            VocabKind::Hybrid => "hyb",
            VocabKind::TagOnly => "tag_only",
        })
    }
}

impl FromStr for VocabKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word_only" => Ok(VocabKind::WordOnly),
            "hyb" => Ok(VocabKind::Hybrid),
            "tag_only" => Ok(VocabKind::TagOnly),
            other => Err(Error::InvalidArgument(format!("unknown vocabulary kind {other:?}"))),
        }
    }
}

/// A style model's event space.
///
/// Symbols are numbered densely: retained words in sorted order, then
/// `<unk>` (word_only) or the tag names not already taken by a word.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    kind: VocabKind,
    words: BTreeSet<String>,
    tags: Option<TagSet>,
    symbols: Vec<String>,
    word_ids: HashMap<String, SymbolId>,
    tag_ids: Vec<SymbolId>,
    unk_id: Option<SymbolId>,
}

impl Vocabulary {
    fn build(kind: VocabKind, words: BTreeSet<String>, tags: Option<TagSet>) -> Self {
        let mut symbols: Vec<String> = words.iter().cloned().collect();
        let word_ids: HashMap<String, SymbolId> = symbols
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as SymbolId))
            .collect();
        let mut unk_id = None;
        let mut tag_ids = Vec::new();
        match (&kind, &tags) {
            (VocabKind::WordOnly, _) => {
                unk_id = Some(symbols.len() as SymbolId);
                symbols.push(UNK.to_string());
            }
            (_, Some(ts)) => {
                for name in ts.names() {
                    let id = match word_ids.get(name) {
                        Some(&id) => id,
                        None => {
                            symbols.push(name.clone());
                            (symbols.len() - 1) as SymbolId
                        }
                    };
                    tag_ids.push(id);
                }
            }
            (_, None) => unreachable!("tagged vocabularies carry a tag set"),
        }
        Vocabulary {
            kind,
            words,
            tags,
            symbols,
            word_ids,
            tag_ids,
            unk_id,
        }
    }

    pub fn word_only<I: IntoIterator<Item = S>, S: Into<String>>(words: I) -> Self {
        Vocabulary::build(
            VocabKind::WordOnly,
            words.into_iter().map(Into::into).collect(),
            None,
        )
    }

    pub fn hybrid<I: IntoIterator<Item = S>, S: Into<String>>(words: I, tags: TagSet) -> Self {
        Vocabulary::build(
            VocabKind::Hybrid,
            words.into_iter().map(Into::into).collect(),
            Some(tags),
        )
    }

    pub fn tag_only(tags: TagSet) -> Self {
        Vocabulary::build(VocabKind::TagOnly, BTreeSet::new(), Some(tags))
    }

    pub fn kind(&self) -> VocabKind {
        self.kind
    }

    pub fn words(&self) -> &BTreeSet<String> {
        &self.words
    }

    pub fn tags(&self) -> Option<&TagSet> {
        self.tags.as_ref()
    }

    pub fn unk_symbol(&self) -> Option<&str> {
        self.unk_id.map(|_| UNK)
    }

    /// The full symbol space, indexed by [`SymbolId`].
    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, id: SymbolId) -> &str {
        &self.symbols[id as usize]
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    fn tag_symbol(&self, tok: &Token) -> Result<SymbolId> {
        let tag = tok.tag.ok_or_else(|| Error::Untagged {
            surface: tok.surface.clone(),
        })?;
        Ok(self.tag_ids[tag.0 as usize])
    }

    /// Maps tokens into the symbol space; output length equals input length.
    pub fn apply(&self, tokens: &[Token]) -> Result<Vec<SymbolId>> {
        tokens
            .iter()
            .map(|tok| match self.kind {
                VocabKind::WordOnly => Ok(self
                    .word_ids
                    .get(&tok.surface)
                    .copied()
                    .unwrap_or(self.unk_id.expect("word_only has <unk>"))),
                VocabKind::Hybrid => match self.word_ids.get(&tok.surface) {
                    Some(&id) => Ok(id),
                    None => self.tag_symbol(tok),
                },
                VocabKind::TagOnly => self.tag_symbol(tok),
            })
            .collect()
    }

    /// [`apply`](Self::apply) rendered as symbol strings.
    pub fn apply_symbols(&self, tokens: &[Token]) -> Result<Vec<&str>> {
        Ok(self.apply(tokens)?.into_iter().map(|id| self.symbol(id)).collect())
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let (n_tags, hash) = match &self.tags {
            Some(t) => (t.len(), t.hash()),
            None => (0, "-".to_string()),
        };
        writeln!(
            w,
            "#commlang-vocab kind={} words={} symbols={} tags={} taghash={}",
            self.kind,
            self.words.len(),
            self.symbols.len(),
            n_tags,
            hash
        )?;
        for word in &self.words {
            writeln!(w, "{word}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    /// Reads a vocabulary file. Tagged kinds must be given the tag set whose
    /// hash is recorded in the header.
    pub fn read<R: BufRead>(reader: R, tags: Option<&TagSet>) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or(Error::Empty("vocabulary file"))??;
        let fields: HashMap<&str, &str> = header
            .strip_prefix("#commlang-vocab ")
            .ok_or_else(|| Error::ModelFormat(format!("bad vocabulary header {header:?}")))?
            .split_whitespace()
            .filter_map(|kv| kv.split_once('='))
            .collect();
        let field = |k: &str| {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| Error::ModelFormat(format!("vocabulary header lacks {k}")))
        };
        let kind: VocabKind = field("kind")?.parse()?;
        let n_words: usize = field("words")?
            .parse()
            .map_err(|_| Error::ModelFormat("bad word count".into()))?;
        let words = lines.collect::<std::io::Result<BTreeSet<String>>>()?;
        if words.len() != n_words {
            return Err(Error::ModelFormat(format!(
                "header says {n_words} words, file has {}",
                words.len()
            )));
        }
        let vocab = match kind {
            VocabKind::WordOnly => Vocabulary::word_only(words),
            _ => {
                let ts = tags.ok_or_else(|| {
                    Error::InvalidArgument(format!("{kind} vocabulary needs a tag set"))
                })?;
                if ts.hash() != field("taghash")? {
                    return Err(Error::ModelFormat("tag set hash mismatch".into()));
                }
                match kind {
                    VocabKind::Hybrid => Vocabulary::hybrid(words, ts.clone()),
                    _ => Vocabulary::tag_only(ts.clone()),
                }
            }
        };
        Ok(vocab)
    }

    pub fn load(path: &Path, tags: Option<&TagSet>) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Vocabulary::read(BufReader::new(file), tags)
    }
}

/// The `top_k` most frequent surfaces plus `<unk>`.
pub fn build_word_only_vocab(table: &FrequencyTable, top_k: usize) -> Result<Vocabulary> {
    if top_k == 0 {
        return Err(Error::InvalidArgument("top_k must be at least 1".into()));
    }
    Ok(Vocabulary::word_only(table.top(top_k)))
}

/// The `top_k` most frequent surfaces with every other token mapped to its tag.
pub fn build_hyb15k_vocab(table: &FrequencyTable, top_k: usize, tags: &TagSet) -> Vocabulary {
    Vocabulary::hybrid(table.top(top_k), tags.clone())
}

/// General words (top `n_general` of the balanced table) united with, for each
/// community, its top `n_per_community` words outside the general set.
pub fn build_hybrid_vocab(
    balanced: &FrequencyTable,
    per_community: &[FrequencyTable],
    n_general: usize,
    n_per_community: usize,
    tags: &TagSet,
) -> Vocabulary {
    let general: BTreeSet<&str> = balanced.top(n_general).into_iter().collect();
    let mut words: BTreeSet<&str> = general.clone();
    for table in per_community {
        words.extend(
            table
                .ranked()
                .into_iter()
                .map(|(w, _)| w)
                .filter(|w| !general.contains(w))
                .take(n_per_community),
        );
    }
    Vocabulary::hybrid(words, tags.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(pairs: &[(&str, u64)]) -> FrequencyTable {
        let mut t = FrequencyTable::new(None);
        for (w, c) in pairs {
            t.counts.insert(w.to_string(), *c);
            t.total_tokens += c;
        }
        t
    }

    fn tokens(ts: &TagSet) -> Vec<Token> {
        vec![
            Token::new("the", ts.get("DT")),
            Token::new("cat", ts.get("NN")),
            Token::new("sat", ts.get("VBD")),
        ]
    }

    #[test]
    fn counting_and_merging() {
        let t = count_frequencies(["a", "b", "a"], Some("x"));
        assert_eq!(t.get("a"), 2);
        assert_eq!(t.get("b"), 1);
        assert_eq!(t.total_tokens, 3);
        let mut m = table(&[("a", 2)]);
        m.merge(&table(&[("a", 1), ("c", 1)]));
        assert_eq!(m.counts, table(&[("a", 3), ("c", 1)]).counts);
        let empty = count_frequencies([], None);
        assert!(empty.is_empty());
        assert_eq!(empty.total_tokens, 0);
    }

    #[test]
    fn word_only_top_k_and_ties() {
        let v = build_word_only_vocab(&table(&[("a", 3), ("b", 2), ("c", 1)]), 2).unwrap();
        assert_eq!(v.words().iter().collect::<Vec<_>>(), ["a", "b"]);
        assert_eq!(v.unk_symbol(), Some(UNK));
        let all = build_word_only_vocab(&table(&[("a", 3), ("b", 2)]), 10).unwrap();
        assert_eq!(all.words().len(), 2);
        let tie = build_word_only_vocab(&table(&[("a", 2), ("c", 1), ("b", 1)]), 2).unwrap();
        assert_eq!(tie.words().iter().collect::<Vec<_>>(), ["a", "b"]);
        assert!(build_word_only_vocab(&table(&[]), 0).is_err());
    }

    #[test]
    fn default_top_k_counts_repeated_words() {
        assert_eq!(default_word_only_top_k(&table(&[("a", 3), ("b", 2), ("c", 1)])), 2);
        assert_eq!(default_word_only_top_k(&table(&[("c", 1)])), 1);
    }

    #[test]
    fn balanced_subset_takes_min() {
        let c = |name: &str, n: usize| CommunityTokens {
            community: name.into(),
            sequences: vec![(0..n).map(|i| format!("{name}{i}")).collect()],
        };
        let three = [c("a", 100), c("b", 200), c("c", 300)];
        let out = balanced_subset(&three).unwrap();
        assert_eq!(out.len(), 300);
        assert_eq!(out[100], "b0");
        assert_eq!(balanced_subset(&[c("a", 5), c("b", 5)]).unwrap().len(), 10);
        assert!(balanced_subset(&[c("a", 5)]).is_err());
        assert!(balanced_subset(&[c("a", 5), c("b", 0)]).is_err());
    }

    #[test]
    fn hybrid_vocab_examples() {
        let ts = TagSet::default();
        let balanced = table(&[("the", 9), ("a", 8), ("cat", 1)]);
        let same = table(&[("the", 5), ("dog", 4), ("a", 3)]);
        let v = build_hybrid_vocab(&balanced, &[same.clone(), same.clone()], 2, 1, &ts);
        assert_eq!(v.words().iter().collect::<Vec<_>>(), ["a", "dog", "the"]);
        let general_only = build_hybrid_vocab(&balanced, &[same], 2, 0, &ts);
        assert_eq!(general_only.words().len(), 2);
        assert_eq!(general_only.len(), 2 + 38);
    }

    #[test]
    fn hyb15k_ranks() {
        let ts = TagSet::default();
        let mut t = FrequencyTable::new(None);
        for i in 0..20u64 {
            t.counts.insert(format!("w{i:02}"), 100 - i);
        }
        let v = build_hyb15k_vocab(&t, 15, &ts);
        assert_eq!(v.words().len(), 15);
        assert_eq!(v.len(), 15 + 38);
        assert!(!v.words().contains("w15"));
        assert_eq!(v, build_hyb15k_vocab(&t, 15, &ts));
    }

    #[test]
    fn apply_each_kind() {
        let ts = TagSet::default();
        let toks = tokens(&ts);
        let hyb = Vocabulary::hybrid(["cat"], ts.clone());
        assert_eq!(hyb.apply_symbols(&toks).unwrap(), ["DT", "cat", "VBD"]);
        let wo = Vocabulary::word_only(["cat"]);
        assert_eq!(wo.apply_symbols(&toks).unwrap(), ["<unk>", "cat", "<unk>"]);
        let to = Vocabulary::tag_only(ts.clone());
        assert_eq!(to.apply_symbols(&toks).unwrap(), ["DT", "NN", "VBD"]);
        let untagged = [Token::untagged("dog")];
        assert!(matches!(hyb.apply(&untagged), Err(Error::Untagged { .. })));
        assert!(matches!(to.apply(&untagged), Err(Error::Untagged { .. })));
        assert_eq!(wo.apply_symbols(&untagged).unwrap(), ["<unk>"]);
    }

    #[test]
    fn punctuation_word_shares_tag_symbol() {
        let ts = TagSet::default();
        let v = Vocabulary::hybrid([".", "cat"], ts.clone());
        assert_eq!(v.len(), 2 + 37);
        let ids = v
            .apply(&[Token::new(".", ts.get(".")), Token::new("!", ts.get("."))])
            .unwrap();
        assert_eq!(ids[0], ids[1]);
    }

    #[test]
    fn file_round_trip_and_hash_check() {
        let ts = TagSet::default();
        for v in [
            Vocabulary::word_only(["b", "a"]),
            Vocabulary::hybrid(["cat", "."], ts.clone()),
            Vocabulary::tag_only(ts.clone()),
        ] {
            let mut buf = Vec::new();
            v.write(&mut buf).unwrap();
            assert_eq!(Vocabulary::read(buf.as_slice(), Some(&ts)).unwrap(), v);
        }
        let mut buf = Vec::new();
        Vocabulary::hybrid(["x"], ts.clone()).write(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replace(&ts.hash(), "0000000000000000");
        assert!(Vocabulary::read(text.as_bytes(), Some(&ts)).is_err());
    }
}
