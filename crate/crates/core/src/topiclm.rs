//! Topic models: tf-idf weighting, LDA by batch variational Bayes over
//! fractional counts, per-document topic inference, k-means community
//! profiles and the top-3 cosine topic score.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};
use crate::text::{is_punct_token, URL_TOKEN};

/// Number of entries in the bundled stopword list.
pub const STOPWORD_COUNT: usize = 250;
/// Centroids per community profile.
pub const PROFILE_CENTROIDS: usize = 50;
/// Similarities averaged by [`topic_score`].
pub const TOP_SIMILARITIES: usize = 3;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

/// The bundled English function-word list.
pub fn default_stopwords() -> HashSet<String> {
    parse_stopwords(DEFAULT_STOPWORDS)
}

/// One word per line, lowercased; blank lines and `#` comments ignored.
pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

fn is_content_word(w: &str, stopwords: &HashSet<String>) -> bool {
    w != URL_TOKEN && !is_punct_token(w) && !stopwords.contains(w)
}

/// Sparse L2-normalized tf-idf vector, sorted by word id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedDoc {
    pub doc_id: String,
    pub weights: Vec<(u32, f64)>,
}

impl WeightedDoc {
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().map(|(_, w)| w).sum()
    }
}

/// Word inventory and idf values learned from the training comments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdfTable {
    pub words: Vec<String>,
    pub idf: Vec<f64>,
    pub df: Vec<u64>,
    pub n_docs: u64,
    pub stopwords: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, u32>,
    #[serde(skip)]
    stopword_set: HashSet<String>,
}

impl IdfTable {
    fn rebuild_index(&mut self) {
        self.index = self
            .words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        self.stopword_set = self.stopwords.iter().cloned().collect();
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    /// tf-idf weights of a token list, L2-normalized. Stopwords and words
    /// outside the table are ignored.
    pub fn weigh<S: AsRef<str>>(&self, doc_id: impl Into<String>, tokens: &[S]) -> WeightedDoc {
        let mut tf: BTreeMap<u32, u64> = BTreeMap::new();
        for t in tokens {
            let t = t.as_ref();
            if !is_content_word(t, &self.stopword_set) {
                continue;
            }
            if let Some(id) = self.id(t) {
                *tf.entry(id).or_insert(0) += 1;
            }
        }
        weigh_counts(doc_id.into(), &tf, &self.idf)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut t: IdfTable = read_json(path)?;
        t.rebuild_index();
        Ok(t)
    }
}

fn weigh_counts(doc_id: String, tf: &BTreeMap<u32, u64>, idf: &[f64]) -> WeightedDoc {
    let raw: Vec<(u32, f64)> = tf
        .iter()
        .map(|(&id, &c)| (id, c as f64 * idf[id as usize]))
        .filter(|&(_, w)| w > 0.0)
        .collect();
    let norm = raw.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
    WeightedDoc {
        doc_id,
        weights: raw.into_iter().map(|(id, w)| (id, w / norm)).collect(),
    }
}

/// Weighted training corpus.
#[derive(Clone, Debug)]
pub struct TfIdf {
    pub table: IdfTable,
    pub docs: Vec<WeightedDoc>,
    /// Comments with no content words left after stopword removal.
    pub dropped: usize,
}

/// Computes idf = ln(N / df) over the documents that keep at least one
/// content word, then weighs each of them. Words present in every document
/// get weight zero.
pub fn build_tfidf<S: AsRef<str>>(
    docs: &[(String, Vec<S>)],
    stopwords: &HashSet<String>,
) -> Result<TfIdf> {
    if docs.is_empty() {
        return Err(Error::Empty("topic training corpus"));
    }
    let mut kept: Vec<(&String, BTreeMap<&str, u64>)> = Vec::with_capacity(docs.len());
    let mut dropped = 0;
    for (id, tokens) in docs {
        let mut tf: BTreeMap<&str, u64> = BTreeMap::new();
        for t in tokens {
            let t = t.as_ref();
            if is_content_word(t, stopwords) {
                *tf.entry(t).or_insert(0) += 1;
            }
        }
        if tf.is_empty() {
            dropped += 1;
        } else {
            kept.push((id, tf));
        }
    }
    if kept.is_empty() {
        return Err(Error::Empty("every document is stopwords only"));
    }
    let mut df: BTreeMap<&str, u64> = BTreeMap::new();
    for (_, tf) in &kept {
        for w in tf.keys() {
            *df.entry(w).or_insert(0) += 1;
        }
    }
    let n = kept.len() as u64;
    let words: Vec<String> = df.keys().map(|w| w.to_string()).collect();
    let dfs: Vec<u64> = df.values().copied().collect();
    let idf: Vec<f64> = dfs.iter().map(|&d| (n as f64 / d as f64).ln()).collect();
    let mut sw: Vec<String> = stopwords.iter().cloned().collect();
    sw.sort();
    let mut table = IdfTable {
        words,
        idf,
        df: dfs,
        n_docs: n,
        stopwords: sw,
        index: HashMap::new(),
        stopword_set: HashSet::new(),
    };
    table.rebuild_index();
    let docs = kept
        .into_iter()
        .map(|(id, tf)| {
            let tf: BTreeMap<u32, u64> = tf.into_iter().map(|(w, c)| (table.index[w], c)).collect();
            weigh_counts(id.clone(), &tf, &table.idf)
        })
        .collect();
    Ok(TfIdf { table, docs, dropped })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdaOptions {
    pub k: usize,
    /// Symmetric document-topic prior; `None` means 1/K.
    pub alpha: Option<f64>,
    pub eta: f64,
    pub iterations: usize,
    pub seed: u64,
    pub e_step_max_iter: usize,
    /// Mean absolute change of γ that ends a document's E-step.
    pub e_step_tol: f64,
}

impl LdaOptions {
    pub fn new(k: usize, seed: u64) -> Self {
        LdaOptions {
            k,
            alpha: None,
            eta: 0.01,
            iterations: 200,
            seed,
            e_step_max_iter: 100,
            e_step_tol: 1e-5,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(1.0 / self.k as f64)
    }
}

/// Trained LDA model. `lambda` holds the variational Dirichlet parameters
/// of each topic; the topic-word matrix is their row normalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub k: usize,
    pub alpha: f64,
    pub eta: f64,
    pub seed: u64,
    pub iterations: usize,
    pub words: Vec<String>,
    /// K × V, row-major.
    pub lambda: Vec<f64>,
    #[serde(skip)]
    exp_elog_beta: Vec<f64>,
}

impl TopicModel {
    fn new(k: usize, alpha: f64, eta: f64, seed: u64, iterations: usize, words: Vec<String>, lambda: Vec<f64>) -> Self {
        let mut m = TopicModel {
            k,
            alpha,
            eta,
            seed,
            iterations,
            words,
            lambda,
            exp_elog_beta: Vec::new(),
        };
        m.refresh();
        m
    }

    fn refresh(&mut self) {
        self.exp_elog_beta = exp_elog_beta(&self.lambda, self.k, self.words.len());
    }

    pub fn n_words(&self) -> usize {
        self.words.len()
    }

    /// Row `k` of the topic-word matrix.
    pub fn topic(&self, k: usize) -> Vec<f64> {
        let v = self.n_words();
        let row = &self.lambda[k * v..(k + 1) * v];
        let s: f64 = row.iter().sum();
        row.iter().map(|x| x / s).collect()
    }

    /// The `n` most probable words of each topic, ties by word.
    pub fn top_words(&self, n: usize) -> Vec<Vec<(String, f64)>> {
        (0..self.k)
            .map(|k| {
                let row = self.topic(k);
                let mut idx: Vec<usize> = (0..row.len()).collect();
                idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then_with(|| self.words[a].cmp(&self.words[b])));
                idx.into_iter().take(n).map(|i| (self.words[i].clone(), row[i])).collect()
            })
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut m: TopicModel = read_json(path)?;
        if m.lambda.len() != m.k * m.words.len() {
            return Err(Error::ModelFormat(format!(
                "topic matrix has {} entries, expected {}",
                m.lambda.len(),
                m.k * m.words.len()
            )));
        }
        m.refresh();
        Ok(m)
    }
}

// exp(E[log β_kw]) transposed to V × K for per-word access.
fn exp_elog_beta(lambda: &[f64], k: usize, v: usize) -> Vec<f64> {
    let mut out = vec![0.0; k * v];
    for t in 0..k {
        let row = &lambda[t * v..(t + 1) * v];
        let dsum = digamma(row.iter().sum());
        for (w, &l) in row.iter().enumerate() {
            out[w * k + t] = (digamma(l) - dsum).exp();
        }
    }
    out
}

fn exp_elog_theta(gamma: &[f64]) -> Vec<f64> {
    let dsum = digamma(gamma.iter().sum());
    gamma.iter().map(|&g| (digamma(g) - dsum).exp()).collect()
}

struct EStep {
    gamma: Vec<f64>,
    // n_w · φ_wk for each word of the document, K entries per word
    sstats: Vec<f64>,
}

fn e_step(doc: &WeightedDoc, gamma0: &[f64], eeb: &[f64], alpha: f64, max_iter: usize, tol: f64) -> EStep {
    let k = gamma0.len();
    let mut gamma = gamma0.to_vec();
    let mut eet = exp_elog_theta(&gamma);
    let phinorm = |eet: &[f64], w: u32| -> f64 {
        let b = &eeb[w as usize * k..(w as usize + 1) * k];
        eet.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() + 1e-100
    };
    for _ in 0..max_iter.max(1) {
        let mut acc = vec![0.0; k];
        for &(w, n) in &doc.weights {
            let scale = n / phinorm(&eet, w);
            let b = &eeb[w as usize * k..(w as usize + 1) * k];
            for t in 0..k {
                acc[t] += scale * b[t];
            }
        }
        let mut change = 0.0;
        for t in 0..k {
            let g = alpha + eet[t] * acc[t];
            change += (g - gamma[t]).abs();
            gamma[t] = g;
        }
        eet = exp_elog_theta(&gamma);
        if change / (k as f64) < tol {
            break;
        }
    }
    let mut sstats = Vec::with_capacity(doc.weights.len() * k);
    for &(w, n) in &doc.weights {
        let scale = n / phinorm(&eet, w);
        let b = &eeb[w as usize * k..(w as usize + 1) * k];
        sstats.extend((0..k).map(|t| scale * eet[t] * b[t]));
    }
    EStep { gamma, sstats }
}

/// Variational lower bound with φ optimized out, given γ for every document
/// and the current λ.
fn elbo(docs: &[&WeightedDoc], gammas: &[Vec<f64>], lambda: &[f64], eeb: &[f64], k: usize, v: usize, alpha: f64, eta: f64) -> f64 {
    let lg_alpha = ln_gamma(alpha);
    let lg_kalpha = ln_gamma(k as f64 * alpha);
    let per_doc: Vec<f64> = docs
        .par_iter()
        .zip(gammas.par_iter())
        .map(|(doc, gamma)| {
            let dsum = digamma(gamma.iter().sum());
            let elog_theta: Vec<f64> = gamma.iter().map(|&g| digamma(g) - dsum).collect();
            let eet: Vec<f64> = elog_theta.iter().map(|x| x.exp()).collect();
            let mut s = 0.0;
            for &(w, n) in &doc.weights {
                let b = &eeb[w as usize * k..(w as usize + 1) * k];
                let dot: f64 = eet.iter().zip(b).map(|(x, y)| x * y).sum();
                s += n * (dot + 1e-100).ln();
            }
            for t in 0..k {
                s += (alpha - gamma[t]) * elog_theta[t] + ln_gamma(gamma[t]) - lg_alpha;
            }
            s + lg_kalpha - ln_gamma(gamma.iter().sum())
        })
        .collect();
    let mut total: f64 = per_doc.iter().sum();
    let lg_eta = ln_gamma(eta);
    let lg_veta = ln_gamma(v as f64 * eta);
    let per_topic: Vec<f64> = (0..k)
        .into_par_iter()
        .map(|t| {
            let row = &lambda[t * v..(t + 1) * v];
            let rsum: f64 = row.iter().sum();
            let dsum = digamma(rsum);
            let mut s = 0.0;
            for &l in row {
                s += (eta - l) * (digamma(l) - dsum) + ln_gamma(l) - lg_eta;
            }
            s + lg_veta - ln_gamma(rsum)
        })
        .collect();
    total += per_topic.iter().sum::<f64>();
    total
}

/// Result of [`train_lda`].
#[derive(Clone, Debug)]
pub struct LdaFit {
    pub model: TopicModel,
    /// Bound after each M-step.
    pub elbo: Vec<f64>,
}

/// Batch variational Bayes LDA over weighted documents. Per-document γ is
/// warm-started across iterations so each pass is a full coordinate-ascent
/// sweep and the bound never decreases.
pub fn train_lda(docs: &[WeightedDoc], n_words: usize, words: &[String], options: &LdaOptions) -> Result<LdaFit> {
    let k = options.k;
    if k < 2 {
        return Err(Error::InvalidArgument(format!("LDA needs K >= 2, got {k}")));
    }
    if words.len() != n_words {
        return Err(Error::InvalidArgument("word list does not match vocabulary size".into()));
    }
    let docs: Vec<&WeightedDoc> = docs.iter().filter(|d| !d.is_empty()).collect();
    if docs.is_empty() {
        return Err(Error::Empty("LDA training documents"));
    }
    let mut seen: HashSet<u32> = HashSet::new();
    for d in &docs {
        for &(w, _) in &d.weights {
            if w as usize >= n_words {
                return Err(Error::SymbolOutOfSpace { id: w, size: n_words });
            }
            seen.insert(w);
        }
    }
    if k > seen.len() {
        return Err(Error::InvalidArgument(format!(
            "K = {k} exceeds the {} distinct words in the corpus",
            seen.len()
        )));
    }

    let v = n_words;
    let alpha = options.alpha();
    let eta = options.eta;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let init = Gamma::new(100.0, 0.01).expect("valid gamma parameters");
    let mut lambda: Vec<f64> = (0..k * v).map(|_| init.sample(&mut rng)).collect();
    let mut gammas: Vec<Vec<f64>> = vec![vec![1.0; k]; docs.len()];
    let mut history = Vec::with_capacity(options.iterations);

    for _ in 0..options.iterations {
        let eeb = exp_elog_beta(&lambda, k, v);
        let steps: Vec<EStep> = docs
            .par_iter()
            .zip(gammas.par_iter())
            .map(|(d, g)| e_step(d, g, &eeb, alpha, options.e_step_max_iter, options.e_step_tol))
            .collect();
        // M-step, reduced in document order
        lambda.iter_mut().for_each(|l| *l = eta);
        for (d, s) in docs.iter().zip(&steps) {
            for (j, &(w, _)) in d.weights.iter().enumerate() {
                for t in 0..k {
                    lambda[t * v + w as usize] += s.sstats[j * k + t];
                }
            }
        }
        gammas = steps.into_iter().map(|s| s.gamma).collect();
        let eeb = exp_elog_beta(&lambda, k, v);
        history.push(elbo(&docs, &gammas, &lambda, &eeb, k, v, alpha, eta));
    }

    Ok(LdaFit {
        model: TopicModel::new(k, alpha, eta, options.seed, options.iterations, words.to_vec(), lambda),
        elbo: history,
    })
}

/// Inferred topic proportions of one document.
#[derive(Clone, Debug, PartialEq)]
pub struct Inferred {
    pub theta: Vec<f64>,
    /// Set when no document word is in the model vocabulary; θ is uniform.
    pub empty: bool,
}

/// Variational inference of θ with the topic-word matrix held fixed. Words
/// outside the model vocabulary are ignored.
pub fn infer_topics(model: &TopicModel, doc: &WeightedDoc) -> Inferred {
    let k = model.k;
    let known = WeightedDoc {
        doc_id: doc.doc_id.clone(),
        weights: doc
            .weights
            .iter()
            .copied()
            .filter(|&(w, n)| (w as usize) < model.n_words() && n > 0.0)
            .collect(),
    };
    if known.is_empty() {
        return Inferred {
            theta: vec![1.0 / k as f64; k],
            empty: true,
        };
    }
    let step = e_step(&known, &vec![1.0; k], &model.exp_elog_beta, model.alpha, 1000, 1e-8);
    let s: f64 = step.gamma.iter().sum();
    Inferred {
        theta: step.gamma.iter().map(|g| g / s).collect(),
        empty: false,
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Outcome of [`kmeans`].
#[derive(Clone, Debug)]
pub struct KMeans {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Inertia after each assignment step.
    pub inertia: Vec<f64>,
}

/// Lloyd's k-means with seeded k-means++ initialization. Uses
/// k' = min(k, n) clusters; an emptied cluster takes the point farthest
/// from its current centroid.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, max_iter: usize) -> Result<KMeans> {
    if points.is_empty() {
        return Err(Error::Empty("k-means input"));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k-means needs k >= 1".into()));
    }
    let k = k.min(points.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut chosen = vec![rng.gen_range(0..points.len())];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[chosen[0]])).collect();
    while chosen.len() < k {
        let next = match WeightedIndex::new(&d2) {
            Ok(dist) => dist.sample(&mut rng),
            Err(_) => {
                // every point coincides with a chosen centroid
                let free: Vec<usize> = (0..points.len()).filter(|i| !chosen.contains(i)).collect();
                free[rng.gen_range(0..free.len())]
            }
        };
        chosen.push(next);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &points[next]));
        }
    }
    let mut centroids: Vec<Vec<f64>> = chosen.iter().map(|&i| points[i].clone()).collect();
    let mut assignments = vec![0usize; points.len()];
    let mut inertia: Vec<f64> = Vec::new();
    let dim = points[0].len();

    for _ in 0..max_iter.max(1) {
        let assigned: Vec<(usize, f64)> = points
            .par_iter()
            .map(|p| {
                let mut best = (0, f64::INFINITY);
                for (c, cen) in centroids.iter().enumerate() {
                    let d = sq_dist(p, cen);
                    if d < best.1 {
                        best = (c, d);
                    }
                }
                best
            })
            .collect();
        let changed = assigned.iter().zip(&assignments).any(|(a, &b)| a.0 != b);
        for (slot, &(c, _)) in assignments.iter_mut().zip(&assigned) {
            *slot = c;
        }
        let mut dists: Vec<f64> = assigned.iter().map(|&(_, d)| d).collect();

        // reseed empty clusters
        let mut sizes = vec![0usize; k];
        for &a in &assignments {
            sizes[a] += 1;
        }
        for c in 0..k {
            if sizes[c] > 0 {
                continue;
            }
            let far = (0..points.len())
                .filter(|&i| sizes[assignments[i]] > 1)
                .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)));
            if let Some(i) = far {
                sizes[assignments[i]] -= 1;
                assignments[i] = c;
                sizes[c] = 1;
                dists[i] = 0.0;
                centroids[c] = points[i].clone();
            }
        }
        let current: f64 = dists.iter().sum();
        let previous = inertia.last().copied();
        inertia.push(current);

        let mut sums = vec![vec![0.0; dim]; k];
        for (p, &a) in points.iter().zip(&assignments) {
            for (s, x) in sums[a].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if sizes[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / sizes[c] as f64).collect();
            }
        }

        let converged = match previous {
            Some(prev) if prev > 0.0 => (prev - current).abs() / prev < 1e-6,
            Some(_) => true,
            None => false,
        };
        if converged || (!changed && previous.is_some()) {
            break;
        }
    }
    Ok(KMeans {
        centroids,
        assignments,
        inertia,
    })
}

/// A community summarized by the L2-normalized k-means centroids of its
/// thread topic vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunityTopicProfile {
    pub community: String,
    pub centroids: Vec<Vec<f64>>,
    pub sizes: Vec<usize>,
}

fn l2_normalize(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / n).collect()
    }
}

pub fn build_profile(community: &str, vectors: &[Vec<f64>], k: usize, seed: u64) -> Result<CommunityTopicProfile> {
    let km = kmeans(vectors, k, seed, 100)?;
    let mut sizes = vec![0usize; km.centroids.len()];
    for &a in &km.assignments {
        sizes[a] += 1;
    }
    Ok(CommunityTopicProfile {
        community: community.to_string(),
        centroids: km.centroids.iter().map(|c| l2_normalize(c)).collect(),
        sizes,
    })
}

/// Mean of the three largest cosine similarities between `v` and the
/// profile centroids (all of them when there are fewer than three).
pub fn topic_score(profile: &CommunityTopicProfile, v: &[f64]) -> Result<f64> {
    if profile.centroids.is_empty() {
        return Err(Error::Empty("topic profile has no centroids"));
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("zero topic vector".into()));
    }
    let mut sims: Vec<f64> = profile
        .centroids
        .iter()
        .map(|c| c.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / norm)
        .collect();
    sims.sort_by(|a, b| b.total_cmp(a));
    let top = &sims[..sims.len().min(TOP_SIMILARITIES)];
    Ok(top.iter().sum::<f64>() / top.len() as f64)
}

pub fn save_profiles(path: &Path, profiles: &[CommunityTopicProfile]) -> Result<()> {
    write_json(path, &profiles)
}

pub fn load_profiles(path: &Path) -> Result<Vec<CommunityTopicProfile>> {
    read_json(path)
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string(value)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
