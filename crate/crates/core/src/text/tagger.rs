//! Averaged-perceptron POS tagger with greedy left-to-right decoding.
//!
//! Feature templates follow the usual perceptron tagger recipe: word
//! identity, affixes and shape, the two previous predicted tags, and the
//! neighbouring words. Punctuation never reaches the model; it is tagged by
//! [`TagSet::punct_tag`].

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Tag, TagSet, Token};
use crate::error::{Error, Result};

const FORMAT: &str = "commlang-tagger";
const VERSION: u32 = 1;

const START: [&str; 2] = ["-START-", "-START2-"];
const END: [&str; 2] = ["-END-", "-END2-"];

// Words this frequent and this unambiguous bypass the model.
const DICT_MIN_COUNT: usize = 20;
const DICT_MIN_SHARE: f64 = 0.97;

#[derive(Clone, Debug)]
pub struct TaggerTrainOptions {
    pub iterations: usize,
    pub seed: u64,
}

impl Default for TaggerTrainOptions {
    fn default() -> Self {
        TaggerTrainOptions {
            iterations: 5,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaggerTrainReport {
    pub sequences: usize,
    pub tokens: usize,
    pub train_accuracy: f64,
    pub dev_accuracy: Option<f64>,
}

/// Trained tagger. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggerModel {
    tagset: TagSet,
    weights: HashMap<String, Vec<f64>>,
    tag_dict: HashMap<String, Tag>,
    iterations: usize,
    seed: u64,
}

fn suffix(w: &str, n: usize) -> &str {
    match w.char_indices().rev().nth(n.saturating_sub(1)) {
        Some((i, _)) => &w[i..],
        None => w,
    }
}

fn prefix(w: &str, n: usize) -> &str {
    match w.char_indices().nth(n) {
        Some((i, _)) => &w[..i],
        None => w,
    }
}

fn shape(w: &str) -> &'static str {
    let digit = w.chars().any(|c| c.is_ascii_digit());
    let alpha = w.chars().any(char::is_alphabetic);
    match (digit, alpha, w.contains('-')) {
        (true, false, _) => "num",
        (true, true, _) => "alnum",
        (_, _, true) => "hyph",
        _ => "word",
    }
}

fn features(words: &[&str], i: usize, p1: &str, p2: &str) -> Vec<String> {
    let at = |j: isize| -> &str {
        if j < 0 {
            START[(-j - 1) as usize]
        } else if j as usize >= words.len() {
            END[(j as usize - words.len()).min(1)]
        } else {
            words[j as usize]
        }
    };
    let i = i as isize;
    let w = at(i);
    vec![
        "bias".to_string(),
        format!("w={w}"),
        format!("s3={}", suffix(w, 3)),
        format!("s2={}", suffix(w, 2)),
        format!("p1={}", prefix(w, 1)),
        format!("shape={}", shape(w)),
        format!("t1={p1}"),
        format!("t2={p2}"),
        format!("t1t2={p1}|{p2}"),
        format!("t1w={p1}|{w}"),
        format!("w-1={}", at(i - 1)),
        format!("s3-1={}", suffix(at(i - 1), 3)),
        format!("w-2={}", at(i - 2)),
        format!("w+1={}", at(i + 1)),
        format!("s3+1={}", suffix(at(i + 1), 3)),
        format!("w+2={}", at(i + 2)),
    ]
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

struct Trainer {
    n_tags: usize,
    weights: HashMap<String, Vec<f64>>,
    totals: HashMap<String, Vec<f64>>,
    stamps: HashMap<String, Vec<u64>>,
    instances: u64,
}

impl Trainer {
    fn scores(&self, feats: &[String]) -> Vec<f64> {
        score_with(&self.weights, self.n_tags, feats)
    }

    fn update(&mut self, truth: usize, guess: usize, feats: &[String]) {
        self.instances += 1;
        if truth == guess {
            return;
        }
        for f in feats {
            let n = self.n_tags;
            let w = self.weights.entry(f.clone()).or_insert_with(|| vec![0.0; n]);
            let t = self.totals.entry(f.clone()).or_insert_with(|| vec![0.0; n]);
            let s = self.stamps.entry(f.clone()).or_insert_with(|| vec![0; n]);
            for (class, delta) in [(truth, 1.0), (guess, -1.0)] {
                t[class] += (self.instances - s[class]) as f64 * w[class];
                s[class] = self.instances;
                w[class] += delta;
            }
        }
    }

    fn averaged(mut self) -> HashMap<String, Vec<f64>> {
        let instances = self.instances.max(1);
        let mut out = HashMap::with_capacity(self.weights.len());
        for (f, w) in self.weights.drain() {
            let t = &self.totals[&f];
            let s = &self.stamps[&f];
            let avg: Vec<f64> = (0..self.n_tags)
                .map(|c| (t[c] + (instances - s[c]) as f64 * w[c]) / instances as f64)
                .collect();
            if avg.iter().any(|&v| v != 0.0) {
                out.insert(f, avg);
            }
        }
        out
    }
}

fn score_with(weights: &HashMap<String, Vec<f64>>, n_tags: usize, feats: &[String]) -> Vec<f64> {
    let mut scores = vec![0.0; n_tags];
    for f in feats {
        if let Some(w) = weights.get(f) {
            for (s, v) in scores.iter_mut().zip(w) {
                *s += v;
            }
        }
    }
    scores
}

struct GoldSeq {
    words: Vec<String>,
    tags: Vec<Tag>,
}

fn validate(corpus: &[Vec<(String, String)>], tagset: &TagSet) -> Result<Vec<GoldSeq>> {
    corpus
        .iter()
        .map(|seq| {
            let mut words = Vec::with_capacity(seq.len());
            let mut tags = Vec::with_capacity(seq.len());
            for (w, t) in seq {
                let tag = tagset.get(t).ok_or_else(|| Error::UnknownTag {
                    tag: t.clone(),
                    line: None,
                })?;
                words.push(w.to_lowercase());
                tags.push(tag);
            }
            Ok(GoldSeq { words, tags })
        })
        .collect()
}

fn build_tag_dict(seqs: &[GoldSeq]) -> HashMap<String, Tag> {
    let mut counts: HashMap<&str, BTreeMap<Tag, usize>> = HashMap::new();
    for s in seqs {
        for (w, t) in s.words.iter().zip(&s.tags) {
            *counts.entry(w).or_default().entry(*t).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .filter_map(|(w, by_tag)| {
            let total: usize = by_tag.values().sum();
            let (&tag, &n) = by_tag.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))?;
            (total >= DICT_MIN_COUNT && n as f64 / total as f64 >= DICT_MIN_SHARE)
                .then(|| (w.to_string(), tag))
        })
        .collect()
}

/// Trains a tagger on `(surface, gold tag)` sequences. Sequence order is
/// reshuffled every iteration from `options.seed`, so training is
/// deterministic. When `dev` is given its token accuracy is reported.
pub fn train_tagger(
    corpus: &[Vec<(String, String)>],
    dev: Option<&[Vec<(String, String)>]>,
    tagset: &TagSet,
    options: &TaggerTrainOptions,
) -> Result<(TaggerModel, TaggerTrainReport)> {
    if corpus.is_empty() {
        return Err(Error::Empty("tagger training corpus has no sequences"));
    }
    let gold = validate(corpus, tagset)?;
    let dev = dev.map(|d| validate(d, tagset)).transpose()?;
    let tag_dict = build_tag_dict(&gold);

    let mut trainer = Trainer {
        n_tags: tagset.len(),
        weights: HashMap::new(),
        totals: HashMap::new(),
        stamps: HashMap::new(),
        instances: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut order: Vec<usize> = (0..gold.len()).collect();
    for _ in 0..options.iterations {
        order.shuffle(&mut rng);
        for &si in &order {
            let seq = &gold[si];
            let words: Vec<&str> = seq.words.iter().map(String::as_str).collect();
            let (mut p1, mut p2) = (START[0].to_string(), START[1].to_string());
            for (i, &truth) in seq.tags.iter().enumerate() {
                let fixed = tagset
                    .punct_tag(words[i])
                    .or_else(|| tag_dict.get(words[i]).copied());
                let guess = match fixed {
                    Some(t) => t,
                    None => {
                        let feats = features(&words, i, &p1, &p2);
                        let guess = argmax(&trainer.scores(&feats));
                        trainer.update(truth.0 as usize, guess, &feats);
                        Tag(guess as u8)
                    }
                };
                p2 = std::mem::replace(&mut p1, tagset.name(guess).to_string());
            }
        }
    }

    let model = TaggerModel {
        tagset: tagset.clone(),
        weights: trainer.averaged(),
        tag_dict,
        iterations: options.iterations,
        seed: options.seed,
    };
    let train_accuracy = model.accuracy_on(&gold);
    let dev_accuracy = dev.as_deref().map(|d| model.accuracy_on(d));
    let report = TaggerTrainReport {
        sequences: gold.len(),
        tokens: gold.iter().map(|s| s.words.len()).sum(),
        train_accuracy,
        dev_accuracy,
    };
    Ok((model, report))
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    iterations: usize,
    seed: u64,
    tagset: Vec<String>,
    tag_dict: BTreeMap<String, String>,
    weights: BTreeMap<String, Vec<(String, f64)>>,
}

impl TaggerModel {
    pub fn tagset(&self) -> &TagSet {
        &self.tagset
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Tags already-tokenized surfaces; output length equals input length.
    pub fn tag<S: AsRef<str>>(&self, surfaces: &[S]) -> Vec<Token> {
        let words: Vec<&str> = surfaces.iter().map(AsRef::as_ref).collect();
        let mut out = Vec::with_capacity(words.len());
        let (mut p1, mut p2) = (START[0], START[1]);
        for i in 0..words.len() {
            let tag = self
                .tagset
                .punct_tag(words[i])
                .or_else(|| self.tag_dict.get(words[i]).copied())
                .unwrap_or_else(|| {
                    let feats = features(&words, i, p1, p2);
                    Tag(argmax(&score_with(&self.weights, self.tagset.len(), &feats)) as u8)
                });
            out.push(Token::new(words[i], Some(tag)));
            p2 = p1;
            p1 = self.tagset.name(tag);
        }
        out
    }

    fn accuracy_on(&self, seqs: &[GoldSeq]) -> f64 {
        let (mut right, mut total) = (0usize, 0usize);
        for s in seqs {
            for (tok, gold) in self.tag(&s.words).iter().zip(&s.tags) {
                right += usize::from(tok.tag == Some(*gold));
                total += 1;
            }
        }
        if total == 0 {
            0.0
        } else {
            right as f64 / total as f64
        }
    }

    /// Token accuracy against gold `(surface, tag)` sequences.
    pub fn accuracy(&self, gold: &[Vec<(String, String)>]) -> Result<f64> {
        Ok(self.accuracy_on(&validate(gold, &self.tagset)?))
    }

    pub fn to_json(&self) -> Result<String> {
        let name = |t: Tag| self.tagset.name(t).to_string();
        let file = ModelFile {
            format: FORMAT.into(),
            version: VERSION,
            iterations: self.iterations,
            seed: self.seed,
            tagset: self.tagset.names().to_vec(),
            tag_dict: self.tag_dict.iter().map(|(w, t)| (w.clone(), name(*t))).collect(),
            weights: self
                .weights
                .iter()
                .map(|(f, w)| {
                    let sparse = w
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| **v != 0.0)
                        .map(|(i, v)| (name(Tag(i as u8)), *v))
                        .collect();
                    (f.clone(), sparse)
                })
                .collect(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != FORMAT || file.version != VERSION {
            return Err(Error::ModelFormat(format!(
                "expected {FORMAT} v{VERSION}, found {} v{}",
                file.format, file.version
            )));
        }
        let tagset = TagSet::new(file.tagset)?;
        let lookup = |t: &str| {
            tagset.get(t).ok_or_else(|| Error::UnknownTag {
                tag: t.to_string(),
                line: None,
            })
        };
        let mut weights = HashMap::with_capacity(file.weights.len());
        for (f, sparse) in file.weights {
            let mut dense = vec![0.0; tagset.len()];
            for (t, v) in sparse {
                dense[lookup(&t)?.0 as usize] = v;
            }
            weights.insert(f, dense);
        }
        let tag_dict = file
            .tag_dict
            .into_iter()
            .map(|(w, t)| Ok((w, lookup(&t)?)))
            .collect::<Result<_>>()?;
        Ok(TaggerModel {
            tagset,
            weights,
            tag_dict,
            iterations: file.iterations,
            seed: file.seed,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TaggerModel::from_json(&text)
    }
}
