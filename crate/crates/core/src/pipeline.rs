//! The staged pipeline behind the `commlang` binary.
//!
//! Every stage reads and writes files under one workspace directory and
//! leaves a stamp in `stages/<stage>.json` carrying the hash of the config
//! that produced it. A stage refuses to start when an upstream stamp is
//! missing or was written under a different config.
//!
//! Workspace layout:
//!
//! ```text
//! stages/<stage>.json               stamps with config hash and counts
//! corpus/threads/<community>.jsonl  assembled threads above the size threshold
//! corpus/split/<class>.{train,test}.jsonl
//! tagger/model.json
//! vocab/<model>.vocab
//! style/<model>/<class>.arpa
//! topic/idf.json, topic/lda-<K>.json, topic/profiles-<K>.json
//! scores/<level>.<model>.json       score tables and evaluations
//! reports/*.csv                     first line `# config_hash=<hex>`
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classify::{
    annotate_threads, assemble_thread_doc, assemble_user_docs, classify, evaluate, random_predictions, truths,
    AnnotatedThread, Document, EvalReport, ScoreTable, StyleScorer, TopicScorer,
};
use crate::error::Error;
use crate::feedback::{
    correlate_threads, correlate_users, k_index, kindex_histogram, multicommunity_stats, normalize_scores,
    write_correlation_csv, write_histogram_csv, CorrelationOptions, MultiCommunityOptions, UserCommunityStat,
};
use crate::ingest::{
    assemble_threads, build_merged_distractor, filter_corpus, open_dump, parse_comments, parse_posts, read_threads,
    split_train_test, write_threads, CommunityCorpus, ParseStats, ThreadRecord,
};
use crate::stylelm::{count_ngrams, estimate, Smoothing, TrigramModel};
use crate::text::{read_pretagged, tokenize, train_tagger, Annotator, TagSet, TaggerModel, TaggerTrainOptions, Token};
use crate::topiclm::{
    build_profile, build_tfidf, default_stopwords, infer_topics, load_profiles, parse_stopwords, save_profiles,
    train_lda, IdfTable, LdaOptions, TopicModel,
};
use crate::vocab::{
    balanced_subset, build_hyb15k_vocab, build_hybrid_vocab, build_word_only_vocab, count_frequencies,
    default_word_only_top_k, CommunityTokens, Vocabulary,
};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Comment dumps (`.jsonl` or `.jsonl.gz`).
    pub comments: Vec<PathBuf>,
    /// Post dumps.
    pub posts: Vec<PathBuf>,
    /// Pre-tagged `surface_TAG` corpus for training the tagger.
    pub tagger_corpus: Option<PathBuf>,
    /// Tag inventory file; the bundled 38-tag set when absent.
    pub tagset: Option<PathBuf>,
    /// Stopword file; the bundled 250-word list when absent.
    pub stopwords: Option<PathBuf>,
    pub workspace: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Distractor {
    pub name: String,
    /// Communities pooled into the distractor.
    pub members: Vec<String>,
}

impl Default for Distractor {
    fn default() -> Self {
        Distractor {
            name: "merged_others".into(),
            members: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub min_thread_comments: usize,
    pub test_fraction: f64,
    pub min_user_comments: usize,
    /// Remove comments with karma ≤ 0 from training threads.
    pub drop_nonpositive_karma: bool,
    /// Same for test threads.
    pub drop_nonpositive_karma_test: bool,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            min_thread_comments: 100,
            test_fraction: 0.2,
            min_user_comments: 1,
            drop_nonpositive_karma: true,
            drop_nonpositive_karma_test: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VocabParams {
    /// Size of the word-only vocabulary; by default every word seen twice.
    pub top_k_word: Option<usize>,
    pub hyb15k: usize,
    pub n_general: usize,
    pub n_per_community: usize,
}

impl Default for VocabParams {
    fn default() -> Self {
        VocabParams {
            top_k_word: None,
            hyb15k: 15_000,
            n_general: 500,
            n_per_community: 30,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicParams {
    /// One LDA model per entry.
    pub k: Vec<usize>,
    /// Symmetric document-topic prior; 1/K when absent.
    pub alpha: Option<f64>,
    pub eta: f64,
    pub iterations: usize,
    pub e_step_max_iter: usize,
    pub e_step_tol: f64,
    /// k-means centroids per community profile.
    pub clusters: usize,
    /// Cap on training comments per class, in thread order.
    pub max_docs_per_community: Option<usize>,
}

impl Default for TopicParams {
    fn default() -> Self {
        TopicParams {
            k: vec![100, 200],
            alpha: None,
            eta: 0.01,
            iterations: 200,
            e_step_max_iter: 100,
            e_step_tol: 1e-5,
            clusters: 50,
            max_docs_per_community: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    pub split: u64,
    pub tagger: u64,
    pub lda: u64,
    pub kmeans: u64,
    pub baseline: u64,
    pub permutation: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds {
            split: 1,
            tagger: 2,
            lda: 3,
            kmeans: 4,
            baseline: 5,
            permutation: 6,
        }
    }
}

impl Seeds {
    fn set_all(&mut self, seed: u64) {
        *self = Seeds {
            split: seed,
            tagger: seed,
            lda: seed,
            kmeans: seed,
            baseline: seed,
            permutation: seed,
        };
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Flags {
    /// Permutation p-values instead of the t approximation.
    pub permutation_p: bool,
    pub permutations: usize,
    /// Classify style models by per-token rather than total log-probability.
    /// Correlations always use per-token scores.
    pub per_token_scores: bool,
}

impl Default for Flags {
    fn default() -> Self {
        Flags {
            permutation_p: false,
            permutations: 1000,
            per_token_scores: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaggerParams {
    pub iterations: usize,
}

impl Default for TaggerParams {
    fn default() -> Self {
        TaggerParams { iterations: 5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportParams {
    pub histogram_bin_width: u64,
    pub multicommunity: MultiCommunityOptions,
    pub top_words: usize,
}

impl Default for ReportParams {
    fn default() -> Self {
        ReportParams {
            histogram_bin_width: 1,
            multicommunity: MultiCommunityOptions::default(),
            top_words: 10,
        }
    }
}

/// The whole pipeline configuration. Every field has a default; relative
/// paths are resolved against the config file's directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    /// Target communities.
    pub communities: Vec<String>,
    pub distractor: Distractor,
    pub thresholds: Thresholds,
    pub vocab: VocabParams,
    pub topic: TopicParams,
    pub seeds: Seeds,
    pub flags: Flags,
    pub tagger: TaggerParams,
    pub report: ReportParams,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Pipeline failure, mapped to the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid config at {path}: {message}")]
    Config { path: String, message: String },
    #[error("missing upstream stage {stage}: {detail}")]
    MissingStage { stage: Stage, detail: String },
    #[error(
        "stage {stage} is stale: produced under config hash {found}, current config hash is {expected}; re-run {stage}"
    )]
    StaleStage {
        stage: Stage,
        found: String,
        expected: String,
    },
    #[error(transparent)]
    Run(#[from] Error),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::MissingStage { .. } | PipelineError::StaleStage { .. } => 2,
            PipelineError::Config { .. } | PipelineError::Run(_) => 1,
        }
    }

    fn config(path: &str, message: impl Into<String>) -> Self {
        PipelineError::Config {
            path: path.to_string(),
            message: message.into(),
        }
    }
}

pub type PipelineResult<T> = std::result::Result<T, PipelineError>;

impl PipelineConfig {
    /// Parses JSON; errors name the offending field path.
    pub fn from_json(text: &str, base_dir: &Path) -> PipelineResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut cfg: PipelineConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            PipelineError::config(&path, e.into_inner().to_string())
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> PipelineResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::Run(Error::io(path, e)))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, &base)
    }

    pub fn validate(&self) -> PipelineResult<()> {
        fn err(path: &str, message: impl Into<String>) -> PipelineError {
            PipelineError::config(path, message)
        }
        if self.communities.is_empty() {
            return Err(err("communities", "at least one target community is required"));
        }
        let mut seen = HashSet::new();
        for (i, c) in self.communities.iter().chain(&self.distractor.members).enumerate() {
            let field = if i < self.communities.len() {
                format!("communities[{i}]")
            } else {
                format!("distractor.members[{}]", i - self.communities.len())
            };
            if c.is_empty() || c.contains(['/', '\\']) {
                return Err(err(&field, format!("invalid community name {c:?}")));
            }
            if !seen.insert(c.as_str()) {
                return Err(err(&field, format!("community {c:?} listed twice")));
            }
        }
        if self.distractor.members.is_empty() {
            return Err(err("distractor.members", "the distractor needs at least one member"));
        }
        if self.distractor.name.is_empty() || seen.contains(self.distractor.name.as_str()) {
            return Err(err("distractor.name", "must be nonempty and differ from every community"));
        }
        let t = &self.thresholds;
        if t.min_thread_comments == 0 {
            return Err(err("thresholds.min_thread_comments", "must be positive"));
        }
        if !(t.test_fraction > 0.0 && t.test_fraction < 1.0) {
            return Err(err("thresholds.test_fraction", "must be in (0, 1)"));
        }
        if t.min_user_comments == 0 {
            return Err(err("thresholds.min_user_comments", "must be positive"));
        }
        if self.vocab.top_k_word == Some(0) {
            return Err(err("vocab.top_k_word", "must be positive"));
        }
        if self.vocab.hyb15k == 0 {
            return Err(err("vocab.hyb15k", "must be positive"));
        }
        if self.topic.k.is_empty() {
            return Err(err("topic.k", "at least one topic count is required"));
        }
        if let Some(i) = self.topic.k.iter().position(|&k| k < 2) {
            return Err(err(&format!("topic.k[{i}]"), "must be at least 2"));
        }
        let mut ks = self.topic.k.clone();
        ks.sort_unstable();
        ks.dedup();
        if ks.len() != self.topic.k.len() {
            return Err(err("topic.k", "topic counts must be distinct"));
        }
        if self.topic.alpha.is_some_and(|a| !(a > 0.0)) {
            return Err(err("topic.alpha", "must be positive"));
        }
        if !(self.topic.eta > 0.0) {
            return Err(err("topic.eta", "must be positive"));
        }
        if self.topic.iterations == 0 {
            return Err(err("topic.iterations", "must be positive"));
        }
        if self.topic.clusters == 0 {
            return Err(err("topic.clusters", "must be positive"));
        }
        if self.topic.max_docs_per_community == Some(0) {
            return Err(err("topic.max_docs_per_community", "must be positive"));
        }
        if self.tagger.iterations == 0 {
            return Err(err("tagger.iterations", "must be positive"));
        }
        if self.flags.permutation_p && self.flags.permutations == 0 {
            return Err(err("flags.permutations", "must be positive"));
        }
        if self.report.histogram_bin_width == 0 {
            return Err(err("report.histogram_bin_width", "must be positive"));
        }
        if self.report.top_words == 0 {
            return Err(err("report.top_words", "must be positive"));
        }
        Ok(())
    }

    /// Hex SHA-256 of the config as JSON, workspace excluded so that the
    /// same analysis in two directories carries the same hash.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.paths.workspace = None;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn override_seeds(&mut self, seed: u64) {
        self.seeds.set_all(seed);
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn workspace(&self) -> PipelineResult<PathBuf> {
        self.paths
            .workspace
            .as_deref()
            .map(|p| self.resolve(p))
            .ok_or_else(|| PipelineError::config("paths.workspace", "no workspace given"))
    }

    /// Targets followed by distractor members.
    pub fn source_communities(&self) -> Vec<String> {
        self.communities.iter().chain(&self.distractor.members).cloned().collect()
    }

    /// Classification labels: targets plus the distractor, sorted.
    pub fn classes(&self) -> Vec<String> {
        let mut c = self.communities.clone();
        c.push(self.distractor.name.clone());
        c.sort();
        c
    }
}

/// Pipeline stages in dependency order, plus `all`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Split,
    TrainTagger,
    BuildVocab,
    TrainStyle,
    TrainTopic,
    Profile,
    Classify,
    Correlate,
    Report,
    All,
}

impl Stage {
    pub const PIPELINE: [Stage; 10] = [
        Stage::Ingest,
        Stage::Split,
        Stage::TrainTagger,
        Stage::BuildVocab,
        Stage::TrainStyle,
        Stage::TrainTopic,
        Stage::Profile,
        Stage::Classify,
        Stage::Correlate,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Split => "split",
            Stage::TrainTagger => "train-tagger",
            Stage::BuildVocab => "build-vocab",
            Stage::TrainStyle => "train-style",
            Stage::TrainTopic => "train-topic",
            Stage::Profile => "profile",
            Stage::Classify => "classify",
            Stage::Correlate => "correlate",
            Stage::Report => "report",
            Stage::All => "all",
        }
    }

    /// Stages whose outputs this one reads.
    pub fn requires(self) -> &'static [Stage] {
        match self {
            Stage::Ingest | Stage::TrainTagger | Stage::All => &[],
            Stage::Split => &[Stage::Ingest],
            Stage::BuildVocab => &[Stage::Split, Stage::TrainTagger],
            Stage::TrainStyle => &[Stage::Split, Stage::TrainTagger, Stage::BuildVocab],
            Stage::TrainTopic => &[Stage::Split],
            Stage::Profile => &[Stage::Split, Stage::TrainTopic],
            Stage::Classify => &[Stage::Split, Stage::TrainTagger, Stage::TrainStyle, Stage::Profile],
            Stage::Correlate => &[Stage::Split, Stage::Classify],
            Stage::Report => &[Stage::Split, Stage::TrainTopic, Stage::Classify, Stage::Correlate],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Stage::PIPELINE
            .iter()
            .chain([&Stage::All])
            .find(|st| st.name() == s)
            .copied()
            .ok_or_else(|| format!("unknown stage {s:?}"))
    }
}

/// Style model families: id and smoothing.
pub const STYLE_MODELS: [(&str, Smoothing); 4] = [
    ("word_only", Smoothing::ModifiedKn),
    ("hyb-15k", Smoothing::WittenBell),
    ("hyb-500.30", Smoothing::WittenBell),
    ("tag_only", Smoothing::WittenBell),
];

pub const LEVELS: [&str; 2] = ["thread", "user"];

pub fn topic_model_id(k: usize) -> String {
    format!("lda-{k}")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Stamp {
    pub stage: String,
    pub config_hash: String,
    pub summary: serde_json::Value,
}

/// Per-stage counts returned to the caller.
#[derive(Clone, Debug)]
pub struct StageOutcome {
    pub stage: Stage,
    pub summary: serde_json::Value,
}

/// Runs one stage, or every stage in order for [`Stage::All`].
pub fn run(stage: Stage, config: &PipelineConfig) -> PipelineResult<Vec<StageOutcome>> {
    config.validate()?;
    let ctx = Context::new(config)?;
    let stages: Vec<Stage> = if stage == Stage::All {
        Stage::PIPELINE.to_vec()
    } else {
        vec![stage]
    };
    let mut out = Vec::new();
    for st in stages {
        for &dep in st.requires() {
            ctx.require(dep)?;
        }
        let summary = match st {
            Stage::Ingest => ctx.ingest()?,
            Stage::Split => ctx.split()?,
            Stage::TrainTagger => ctx.train_tagger()?,
            Stage::BuildVocab => ctx.build_vocab()?,
            Stage::TrainStyle => ctx.train_style()?,
            Stage::TrainTopic => ctx.train_topic()?,
            Stage::Profile => ctx.profile()?,
            Stage::Classify => ctx.classify()?,
            Stage::Correlate => ctx.correlate()?,
            Stage::Report => ctx.report()?,
            Stage::All => unreachable!("expanded above"),
        };
        ctx.write_json(&ctx.stamp_path(st), &Stamp {
            stage: st.name().to_string(),
            config_hash: ctx.hash.clone(),
            summary: summary.clone(),
        })?;
        out.push(StageOutcome { stage: st, summary });
    }
    Ok(out)
}

struct Context<'a> {
    cfg: &'a PipelineConfig,
    ws: PathBuf,
    hash: String,
    tags: TagSet,
}

#[derive(Clone, Copy)]
enum Part {
    Train,
    Test,
}

impl Part {
    fn name(self) -> &'static str {
        match self {
            Part::Train => "train",
            Part::Test => "test",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

/// Non-empty token sequences of threads, post first.
fn sequences(threads: &[AnnotatedThread]) -> impl Iterator<Item = &Vec<Token>> {
    threads
        .iter()
        .flat_map(|t| std::iter::once(&t.post).chain(t.comments.iter().map(|c| &c.tokens)))
        .filter(|s| !s.is_empty())
}

fn thread_texts(t: &ThreadRecord) -> impl Iterator<Item = String> + '_ {
    std::iter::once(t.post.text()).chain(t.comments.iter().map(|c| c.body.clone()))
}

impl<'a> Context<'a> {
    fn new(cfg: &'a PipelineConfig) -> PipelineResult<Self> {
        let ws = cfg.workspace()?;
        let tags = match &cfg.paths.tagset {
            Some(p) => TagSet::load(&cfg.resolve(p))?,
            None => TagSet::default(),
        };
        Ok(Context {
            cfg,
            ws,
            hash: cfg.hash(),
            tags,
        })
    }

    fn path(&self, rel: impl AsRef<Path>) -> PathBuf {
        self.ws.join(rel)
    }

    fn stamp_path(&self, stage: Stage) -> PathBuf {
        self.path(format!("stages/{}.json", stage.name()))
    }

    fn require(&self, stage: Stage) -> PipelineResult<Stamp> {
        let path = self.stamp_path(stage);
        if !path.exists() {
            return Err(PipelineError::MissingStage {
                stage,
                detail: format!("{} not found; run `{stage}` first", path.display()),
            });
        }
        let stamp: Stamp = self.read_json(&path)?;
        if stamp.config_hash != self.hash {
            return Err(PipelineError::StaleStage {
                stage,
                found: stamp.config_hash,
                expected: self.hash.clone(),
            });
        }
        Ok(stamp)
    }

    fn ensure_parent(&self, path: &Path) -> Result<(), Error> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        Ok(())
    }

    fn write_bytes(&self, path: &Path, bytes: &[u8]) -> Result<(), Error> {
        self.ensure_parent(path)?;
        fs::write(path, bytes).map_err(io_err(path))
    }

    fn write_json<T: Serialize>(&self, path: &Path, value: &T) -> Result<(), Error> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_bytes(path, &bytes)
    }

    fn read_json<T: DeserializeOwned>(&self, path: &Path) -> Result<T, Error> {
        let f = fs::File::open(path).map_err(io_err(path))?;
        Ok(serde_json::from_reader(BufReader::new(f))?)
    }

    /// Writes `reports/<name>` with the config hash as its first line.
    fn write_report(
        &self,
        name: &str,
        body: impl FnOnce(&mut Vec<u8>) -> Result<(), Error>,
    ) -> Result<(), Error> {
        let mut buf = format!("# config_hash={}\n", self.hash).into_bytes();
        body(&mut buf)?;
        self.write_bytes(&self.path(Path::new("reports").join(name)), &buf)
    }

    fn split_path(&self, class: &str, part: Part) -> PathBuf {
        self.path(format!("corpus/split/{class}.{}.jsonl", part.name()))
    }

    fn load_part(&self, class: &str, part: Part) -> Result<Vec<ThreadRecord>, Error> {
        let threads = read_threads(&self.split_path(class, part))?;
        let drop = match part {
            Part::Train => self.cfg.thresholds.drop_nonpositive_karma,
            Part::Test => self.cfg.thresholds.drop_nonpositive_karma_test,
        };
        Ok(filter_corpus(threads, 0, drop))
    }

    fn annotator(&self) -> Result<Annotator, Error> {
        Ok(Annotator::new(Some(TaggerModel::load(&self.path("tagger/model.json"))?)))
    }

    fn annotated(&self, annotator: &Annotator, part: Part) -> Result<BTreeMap<String, Vec<AnnotatedThread>>, Error> {
        self.cfg
            .classes()
            .into_iter()
            .map(|c| {
                let threads = self.load_part(&c, part)?;
                let ann = annotate_threads(&threads, &c, annotator);
                Ok((c, ann))
            })
            .collect()
    }

    fn ingest(&self) -> PipelineResult<serde_json::Value> {
        let cfg = self.cfg;
        if cfg.paths.posts.is_empty() {
            return Err(PipelineError::config("paths.posts", "no post dumps given"));
        }
        if cfg.paths.comments.is_empty() {
            return Err(PipelineError::config("paths.comments", "no comment dumps given"));
        }
        let wanted: HashSet<String> = cfg.source_communities().into_iter().collect();
        let mut posts = Vec::new();
        let mut post_stats = ParseStats::default();
        for p in &cfg.paths.posts {
            let parsed = parse_posts(open_dump(&cfg.resolve(p))?)?;
            post_stats.merge(parsed.stats);
            posts.extend(parsed.records.into_iter().filter(|r| wanted.contains(&r.community)));
        }
        let mut comments = Vec::new();
        let mut comment_stats = ParseStats::default();
        for p in &cfg.paths.comments {
            let parsed = parse_comments(open_dump(&cfg.resolve(p))?)?;
            comment_stats.merge(parsed.stats);
            comments.extend(parsed.records.into_iter().filter(|r| wanted.contains(&r.community)));
        }

        let mut per_comm: BTreeMap<String, serde_json::Value> = BTreeMap::new();
        for c in cfg.source_communities() {
            let p: Vec<_> = posts.iter().filter(|r| r.community == c).cloned().collect();
            let cm: Vec<_> = comments.iter().filter(|r| r.community == c).cloned().collect();
            let asm = assemble_threads(p, cm);
            let assembled = asm.threads.len();
            let kept = filter_corpus(asm.threads, cfg.thresholds.min_thread_comments, false);
            if kept.is_empty() {
                return Err(Error::Empty("a community has no thread above min_thread_comments").into());
            }
            let n_comments: usize = kept.iter().map(|t| t.comments.len()).sum();
            write_threads_at(self, &format!("corpus/threads/{c}.jsonl"), &kept)?;
            per_comm.insert(
                c,
                serde_json::json!({
                    "threads_assembled": assembled,
                    "threads_kept": kept.len(),
                    "comments_kept": n_comments,
                    "orphans": asm.orphans,
                }),
            );
        }
        Ok(serde_json::json!({
            "posts": post_stats,
            "comments": comment_stats,
            "communities": per_comm,
        }))
    }

    fn split(&self) -> PipelineResult<serde_json::Value> {
        let cfg = self.cfg;
        let mut corpora = BTreeMap::new();
        for (i, c) in cfg.source_communities().iter().enumerate() {
            let threads = read_threads(&self.path(format!("corpus/threads/{c}.jsonl")))?;
            let seed = cfg.seeds.split.wrapping_add(i as u64);
            let (train, test) = split_train_test(threads, cfg.thresholds.test_fraction, seed)?;
            corpora.insert(
                c.clone(),
                CommunityCorpus {
                    community: c.clone(),
                    train_threads: train,
                    test_threads: test,
                },
            );
        }
        let members: Vec<CommunityCorpus> = cfg
            .distractor
            .members
            .iter()
            .map(|m| corpora[m].clone())
            .collect();
        let distractor = build_merged_distractor(&members, &cfg.distractor.name)?;
        let mut summary = BTreeMap::new();
        for corpus in cfg
            .communities
            .iter()
            .map(|c| &corpora[c])
            .chain(std::iter::once(&distractor))
            .chain(members.iter())
        {
            let c = &corpus.community;
            write_threads_at(self, &format!("corpus/split/{c}.train.jsonl"), &corpus.train_threads)?;
            write_threads_at(self, &format!("corpus/split/{c}.test.jsonl"), &corpus.test_threads)?;
            summary.insert(
                c.clone(),
                serde_json::json!({"train": corpus.train_threads.len(), "test": corpus.test_threads.len()}),
            );
        }
        Ok(serde_json::json!({ "seed": cfg.seeds.split, "classes": summary }))
    }

    fn train_tagger(&self) -> PipelineResult<serde_json::Value> {
        let cfg = self.cfg;
        let path = cfg
            .paths
            .tagger_corpus
            .as_deref()
            .ok_or_else(|| PipelineError::config("paths.tagger_corpus", "no tagger training corpus given"))?;
        let path = cfg.resolve(path);
        let f = fs::File::open(&path).map_err(io_err(&path))?;
        let seqs = read_pretagged(BufReader::new(f), &self.tags)?;
        let corpus: Vec<Vec<(String, String)>> = seqs
            .iter()
            .map(|s| {
                s.iter()
                    .map(|t| (t.surface.clone(), self.tags.name(t.tag.expect("pretagged")).to_string()))
                    .collect()
            })
            .collect();
        let options = TaggerTrainOptions {
            iterations: cfg.tagger.iterations,
            seed: cfg.seeds.tagger,
        };
        let (model, report) = train_tagger(&corpus, None, &self.tags, &options)?;
        let out = self.path("tagger/model.json");
        self.ensure_parent(&out)?;
        model.save(&out)?;
        Ok(serde_json::json!({
            "sequences": report.sequences,
            "tokens": report.tokens,
            "train_accuracy": report.train_accuracy,
        }))
    }

    fn build_vocab(&self) -> PipelineResult<serde_json::Value> {
        let cfg = self.cfg;
        let annotator = self.annotator()?;
        let train = self.annotated(&annotator, Part::Train)?;
        let per_class: Vec<CommunityTokens> = train
            .iter()
            .map(|(c, threads)| CommunityTokens {
                community: c.clone(),
                sequences: sequences(threads)
                    .map(|s| s.iter().map(|t| t.surface.clone()).collect())
                    .collect(),
            })
            .collect();
        let all = count_frequencies(
            per_class.iter().flat_map(|c| c.sequences.iter().flatten().map(String::as_str)),
            None,
        );
        let top_k = cfg.vocab.top_k_word.unwrap_or_else(|| default_word_only_top_k(&all));
        let balanced = count_frequencies(balanced_subset(&per_class)?, None);
        let tables: Vec<_> = per_class
            .iter()
            .map(|c| count_frequencies(c.sequences.iter().flatten().map(String::as_str), Some(&c.community)))
            .collect();
        let vocabs = [
            ("word_only", build_word_only_vocab(&all, top_k)?),
            ("hyb-15k", build_hyb15k_vocab(&all, cfg.vocab.hyb15k, &self.tags)),
            (
                "hyb-500.30",
                build_hybrid_vocab(&balanced, &tables, cfg.vocab.n_general, cfg.vocab.n_per_community, &self.tags),
            ),
            ("tag_only", Vocabulary::tag_only(self.tags.clone())),
        ];
        let mut summary = BTreeMap::new();
        for (id, v) in &vocabs {
            let path = self.path(format!("vocab/{id}.vocab"));
            self.ensure_parent(&path)?;
            v.save(&path)?;
            summary.insert(id.to_string(), serde_json::json!({"words": v.words().len(), "symbols": v.len()}));
        }
        Ok(serde_json::json!({ "training_tokens": all.total_tokens, "vocabularies": summary }))
    }

    fn load_vocab(&self, id: &str) -> Result<Vocabulary, Error> {
        Vocabulary::load(&self.path(format!("vocab/{id}.vocab")), Some(&self.tags))
    }

    fn train_style(&self) -> PipelineResult<serde_json::Value> {
        let annotator = self.annotator()?;
        let train = self.annotated(&annotator, Part::Train)?;
        let mut summary = BTreeMap::new();
        for (id, smoothing) in STYLE_MODELS {
            let vocab = self.load_vocab(id)?;
            let models: Vec<(String, TrigramModel, usize)> = train
                .par_iter()
                .map(|(class, threads)| {
                    let seqs: Vec<Vec<u32>> = sequences(threads).map(|s| vocab.apply(s)).collect::<Result<_, _>>()?;
                    let counts = count_ngrams(&seqs, vocab.len())?;
                    let model = estimate(&counts, vocab.symbols(), smoothing)?;
                    Ok((class.clone(), model, seqs.len()))
                })
                .collect::<Result<_, Error>>()?;
            let mut per = BTreeMap::new();
            for (class, model, n) in models {
                let path = self.path(format!("style/{id}/{class}.arpa"));
                self.ensure_parent(&path)?;
                let header = vec![
                    format!("config_hash={}", self.hash),
                    format!("model={id}"),
                    format!("community={class}"),
                ];
                model.save_arpa(&path, &header)?;
                per.insert(class, n);
            }
            summary.insert(id.to_string(), per);
        }
        Ok(serde_json::json!({ "training_sequences": summary }))
    }

    fn load_style(&self, id: &str, class: &str) -> PipelineResult<TrigramModel> {
        let (model, header) = TrigramModel::load_arpa(&self.path(format!("style/{id}/{class}.arpa")))?;
        let want = format!("config_hash={}", self.hash);
        if !header.iter().any(|h| *h == want) {
            let found = header
                .iter()
                .find_map(|h| h.strip_prefix("config_hash="))
                .unwrap_or("none")
                .to_string();
            return Err(PipelineError::StaleStage {
                stage: Stage::TrainStyle,
                found,
                expected: self.hash.clone(),
            });
        }
        Ok(model)
    }

    fn stopwords(&self) -> Result<HashSet<String>, Error> {
        match &self.cfg.paths.stopwords {
            Some(p) => {
                let p = self.cfg.resolve(p);
                Ok(parse_stopwords(&fs::read_to_string(&p).map_err(io_err(&p))?))
            }
            None => Ok(default_stopwords()),
        }
    }

    fn train_topic(&self) -> PipelineResult<serde_json::Value> {
        let cfg = self.cfg;
        let mut docs: Vec<(String, Vec<String>)> = Vec::new();
        for class in cfg.classes() {
            let threads = self.load_part(&class, Part::Train)?;
            let mut class_docs: Vec<(String, Vec<String>)> = threads
                .iter()
                .flat_map(|t| {
                    let id = t.post.id.clone();
                    let class = class.clone();
                    thread_texts(t)
                        .enumerate()
                        .map(move |(i, text)| (format!("{class}/{id}/{i}"), tokenize(&text)))
                })
                .collect();
            if let Some(cap) = cfg.topic.max_docs_per_community {
                class_docs.truncate(cap);
            }
            docs.extend(class_docs);
        }
        let tfidf = build_tfidf(&docs, &self.stopwords()?)?;
        let idf_path = self.path("topic/idf.json");
        self.ensure_parent(&idf_path)?;
        tfidf.table.save(&idf_path)?;
        let mut models = BTreeMap::new();
        for &k in &cfg.topic.k {
            let options = LdaOptions {
                k,
                alpha: cfg.topic.alpha,
                eta: cfg.topic.eta,
                iterations: cfg.topic.iterations,
                seed: cfg.seeds.lda,
                e_step_max_iter: cfg.topic.e_step_max_iter,
                e_step_tol: cfg.topic.e_step_tol,
            };
            let fit = train_lda(&tfidf.docs, tfidf.table.len(), &tfidf.table.words, &options)?;
            fit.model.save(&self.path(format!("topic/{}.json", topic_model_id(k))))?;
            models.insert(
                topic_model_id(k),
                serde_json::json!({"final_elbo": fit.elbo.last().copied()}),
            );
        }
        Ok(serde_json::json!({
            "documents": tfidf.docs.len(),
            "dropped": tfidf.dropped,
            "words": tfidf.table.len(),
            "models": models,
        }))
    }

    fn profile(&self) -> PipelineResult<serde_json::Value> {
        let cfg = self.cfg;
        let idf = IdfTable::load(&self.path("topic/idf.json"))?;
        let mut train = BTreeMap::new();
        for class in cfg.classes() {
            train.insert(class.clone(), self.load_part(&class, Part::Train)?);
        }
        let mut summary = BTreeMap::new();
        for &k in &cfg.topic.k {
            let model = TopicModel::load(&self.path(format!("topic/{}.json", topic_model_id(k))))?;
            let profiles = train
                .iter()
                .map(|(class, threads)| {
                    let vectors: Vec<Vec<f64>> = threads
                        .par_iter()
                        .map(|t| {
                            let tokens: Vec<String> = thread_texts(t).flat_map(|s| tokenize(&s)).collect();
                            infer_topics(&model, &idf.weigh(t.post.id.clone(), &tokens)).theta
                        })
                        .collect();
                    build_profile(class, &vectors, cfg.topic.clusters, cfg.seeds.kmeans)
                })
                .collect::<Result<Vec<_>, Error>>()?;
            save_profiles(&self.path(format!("topic/profiles-{k}.json")), &profiles)?;
            summary.insert(
                topic_model_id(k),
                profiles
                    .iter()
                    .map(|p| (p.community.clone(), p.centroids.len()))
                    .collect::<BTreeMap<_, _>>(),
            );
        }
        Ok(serde_json::json!({ "centroids": summary }))
    }

    fn test_documents(&self) -> Result<(Vec<Document>, Vec<Document>, usize), Error> {
        let annotator = self.annotator()?;
        let test = self.annotated(&annotator, Part::Test)?;
        let mut threads = Vec::new();
        let mut users = Vec::new();
        let mut empty = 0;
        for ann in test.values() {
            for t in ann {
                match assemble_thread_doc(t) {
                    Ok(d) => threads.push(d),
                    Err(_) => empty += 1,
                }
            }
            users.extend(assemble_user_docs(ann, self.cfg.thresholds.min_user_comments));
        }
        Ok((threads, users, empty))
    }

    fn model_ids(&self) -> Vec<String> {
        STYLE_MODELS
            .iter()
            .map(|(id, _)| id.to_string())
            .chain(self.cfg.topic.k.iter().map(|&k| topic_model_id(k)))
            .collect()
    }

    fn classify(&self) -> PipelineResult<serde_json::Value> {
        let cfg = self.cfg;
        let classes = cfg.classes();
        let (thread_docs, user_docs, empty_threads) = self.test_documents()?;
        let idf = IdfTable::load(&self.path("topic/idf.json"))?;
        let mut summary = BTreeMap::new();

        // (model id, per-token table, classification table) per level
        let mut tables: Vec<(&str, String, ScoreTable, Option<ScoreTable>)> = Vec::new();
        for (id, _) in STYLE_MODELS {
            let vocab = self.load_vocab(id)?;
            let models: Vec<(String, TrigramModel)> = classes
                .iter()
                .map(|c| Ok((c.clone(), self.load_style(id, c)?)))
                .collect::<PipelineResult<_>>()?;
            let scorer = |per_token| StyleScorer {
                vocab: &vocab,
                models: models.iter().map(|(c, m)| (c.clone(), m)).collect(),
                per_token,
            };
            for (level, docs) in LEVELS.iter().zip([&thread_docs, &user_docs]) {
                let per_token = crate::classify::score_all(docs, &scorer(true), id);
                let total = (!cfg.flags.per_token_scores).then(|| crate::classify::score_all(docs, &scorer(false), id));
                tables.push((level, id.to_string(), per_token, total));
            }
        }
        for &k in &cfg.topic.k {
            let id = topic_model_id(k);
            let model = TopicModel::load(&self.path(format!("topic/{id}.json")))?;
            let profiles = load_profiles(&self.path(format!("topic/profiles-{k}.json")))?;
            let by_class: BTreeMap<&str, _> = profiles.iter().map(|p| (p.community.as_str(), p)).collect();
            let scorer = TopicScorer {
                idf: &idf,
                model: &model,
                profiles: classes
                    .iter()
                    .map(|c| {
                        by_class.get(c.as_str()).copied().ok_or_else(|| {
                            Error::ModelFormat(format!("topic profiles for K={k} lack community {c}"))
                        })
                    })
                    .collect::<Result<_, _>>()?,
            };
            for (level, docs) in LEVELS.iter().zip([&thread_docs, &user_docs]) {
                tables.push((level, id.clone(), crate::classify::score_all(docs, &scorer, &id), None));
            }
        }

        for (level, id, stored, total) in &tables {
            let used = total.as_ref().unwrap_or(stored);
            let preds = classify(used);
            let report = evaluate(&preds, &truths(used), &classes)?;
            self.write_json(&self.path(format!("scores/{level}.{id}.json")), stored)?;
            self.write_json(&self.path(format!("scores/eval.{level}.{id}.json")), &report)?;
            self.write_report(&format!("scores_{level}_{id}.csv"), |b| used.write_csv(b))?;
            self.write_report(&format!("accuracy_{level}_{id}.csv"), |b| report.write_accuracy_csv(b, id))?;
            self.write_report(&format!("confusion_{level}_{id}.csv"), |b| report.write_confusion_csv(b))?;
            summary.insert(
                format!("{level}.{id}"),
                serde_json::json!({
                    "documents": used.rows.len(),
                    "errors": used.errors.len(),
                    "ties": preds.ties,
                    "average_accuracy": report.average_accuracy,
                }),
            );
        }
        for (level, docs) in LEVELS.iter().zip([&thread_docs, &user_docs]) {
            let ids: Vec<String> = docs.iter().map(|d| d.doc_id.clone()).collect();
            let truth: BTreeMap<String, String> =
                docs.iter().map(|d| (d.doc_id.clone(), d.true_community.clone())).collect();
            let preds = random_predictions(&ids, &classes, cfg.seeds.baseline);
            let report = evaluate(&preds, &truth, &classes)?;
            self.write_json(&self.path(format!("scores/eval.{level}.random.json")), &report)?;
        }
        Ok(serde_json::json!({
            "thread_documents": thread_docs.len(),
            "user_documents": user_docs.len(),
            "empty_threads": empty_threads,
            "tables": summary,
        }))
    }

    /// k-index per (author, community) over every comment of a community,
    /// training and test threads alike.
    fn user_stats(&self) -> Result<Vec<UserCommunityStat>, Error> {
        let mut out = Vec::new();
        for c in self.cfg.source_communities() {
            let mut karma: BTreeMap<String, Vec<i64>> = BTreeMap::new();
            for part in [Part::Train, Part::Test] {
                for t in read_threads(&self.split_path(&c, part))? {
                    for cm in t.comments {
                        if cm.author != crate::classify::DELETED_AUTHOR {
                            karma.entry(cm.author).or_default().push(cm.karma);
                        }
                    }
                }
            }
            out.extend(karma.into_iter().map(|(author, ks)| UserCommunityStat {
                author,
                community: c.clone(),
                comments: ks.len(),
                k_index: k_index(&ks),
            }));
        }
        Ok(out)
    }

    fn correlate(&self) -> PipelineResult<serde_json::Value> {
        let cfg = self.cfg;
        let mut post_karma = BTreeMap::new();
        for c in &cfg.communities {
            for t in read_threads(&self.split_path(c, Part::Test))? {
                post_karma.insert(t.post.id.clone(), t.post.karma);
            }
        }
        let k_indices: BTreeMap<String, u64> = self
            .user_stats()?
            .into_iter()
            .map(|s| (crate::classify::user_doc_id(&s.community, &s.author), s.k_index))
            .collect();
        let options = CorrelationOptions {
            permutations: cfg.flags.permutation_p.then_some(cfg.flags.permutations),
            seed: cfg.seeds.permutation,
        };
        let mut thread_results = Vec::new();
        let mut user_results = Vec::new();
        for id in self.model_ids() {
            let load = |level: &str| -> Result<ScoreTable, Error> {
                self.read_json(&self.path(format!("scores/{level}.{id}.json")))
            };
            let threads = normalize_scores(&load("thread")?, &cfg.distractor.name)?;
            thread_results.extend(correlate_threads(&threads, &post_karma, &options)?);
            let users = normalize_scores(&load("user")?, &cfg.distractor.name)?;
            user_results.extend(correlate_users(&users, &k_indices, &options)?);
        }
        self.write_report("correlation_threads.csv", |b| write_correlation_csv(b, &thread_results))?;
        self.write_report("correlation_users.csv", |b| write_correlation_csv(b, &user_results))?;
        let significant = |rs: &[crate::feedback::CorrelationResult]| {
            rs.iter().filter(|r| r.p_value.is_some_and(|p| p < 0.05)).count()
        };
        Ok(serde_json::json!({
            "thread_correlations": thread_results.len(),
            "thread_significant": significant(&thread_results),
            "user_correlations": user_results.len(),
            "user_significant": significant(&user_results),
        }))
    }

    fn report(&self) -> PipelineResult<serde_json::Value> {
        let cfg = self.cfg;
        let mut rows = Vec::new();
        for id in self.model_ids().into_iter().chain(["random".to_string()]) {
            let mut row = vec![id.clone()];
            for level in LEVELS {
                let r: EvalReport = self.read_json(&self.path(format!("scores/eval.{level}.{id}.json")))?;
                row.push(format!("{:.6}", r.average_accuracy));
            }
            rows.push(row);
        }
        self.write_report("accuracy_summary.csv", |b| {
            let mut w = csv::Writer::from_writer(b);
            w.write_record(["model", "thread_accuracy", "user_accuracy"])?;
            for r in &rows {
                w.write_record(r)?;
            }
            w.flush()?;
            Ok(())
        })?;

        let stats = self.user_stats()?;
        for c in &cfg.communities {
            let ks: Vec<u64> = stats.iter().filter(|s| &s.community == c).map(|s| s.k_index).collect();
            if ks.is_empty() {
                continue;
            }
            let bins = kindex_histogram(&ks, cfg.report.histogram_bin_width)?;
            self.write_report(&format!("kindex_histogram_{c}.csv"), |b| write_histogram_csv(b, c, &bins))?;
        }
        let multi = multicommunity_stats(&stats, &cfg.report.multicommunity);
        self.write_report("multicommunity.csv", |b| {
            let mut w = csv::Writer::from_writer(b);
            w.write_record(["statistic", "value"])?;
            let med = |m: Option<f64>| m.map(|x| x.to_string()).unwrap_or_else(|| "undefined".into());
            w.write_record(["active_users", &multi.active_users.to_string()])?;
            w.write_record(["high_k_users", &multi.high.users.to_string()])?;
            w.write_record(["high_k_median_communities", &med(multi.high.median_communities)])?;
            w.write_record(["low_k_users", &multi.low.users.to_string()])?;
            w.write_record(["low_k_median_communities", &med(multi.low.median_communities)])?;
            for (level, n) in &multi.secondary {
                w.write_record([format!("high_k_second_community_k_ge_{level}"), n.to_string()])?;
            }
            w.flush()?;
            Ok(())
        })?;

        for &k in &cfg.topic.k {
            let model = TopicModel::load(&self.path(format!("topic/{}.json", topic_model_id(k))))?;
            let top = model.top_words(cfg.report.top_words);
            self.write_report(&format!("topic_words_{}.csv", topic_model_id(k)), |b| {
                let mut w = csv::Writer::from_writer(b);
                w.write_record(["topic", "rank", "word", "probability"])?;
                for (t, words) in top.iter().enumerate() {
                    for (r, (word, p)) in words.iter().enumerate() {
                        w.write_record([t.to_string(), (r + 1).to_string(), word.clone(), format!("{p:.6}")])?;
                    }
                }
                w.flush()?;
                Ok(())
            })?;
        }
        Ok(serde_json::json!({
            "models": rows.len(),
            "active_users": multi.active_users,
        }))
    }
}

fn write_threads_at(ctx: &Context, rel: &str, threads: &[ThreadRecord]) -> Result<(), Error> {
    let path = ctx.path(rel);
    ctx.ensure_parent(&path)?;
    write_threads(&path, threads)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> PipelineConfig {
        PipelineConfig::from_json(
            r#"{"communities": ["a", "b"], "distractor": {"members": ["c"]},
                "paths": {"workspace": "ws"}}"#,
            Path::new("/tmp"),
        )
        .unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let c = minimal();
        assert_eq!(c.thresholds.min_thread_comments, 100);
        assert_eq!(c.topic.k, vec![100, 200]);
        assert_eq!(c.distractor.name, "merged_others");
        assert_eq!(c.classes(), ["a", "b", "merged_others"]);
        assert_eq!(c.workspace().unwrap(), Path::new("/tmp/ws"));
        c.validate().unwrap();
    }

    #[test]
    fn config_errors_name_the_field() {
        let e = PipelineConfig::from_json(r#"{"thresholds": {"test_fraction": "x"}}"#, Path::new(".")).unwrap_err();
        assert!(matches!(&e, PipelineError::Config { path, .. } if path == "thresholds.test_fraction"), "{e}");
        assert_eq!(e.exit_code(), 1);
        let e = PipelineConfig::from_json(r#"{"topic": {"kk": 3}}"#, Path::new(".")).unwrap_err();
        assert!(matches!(&e, PipelineError::Config { path, .. } if path.starts_with("topic")), "{e}");

        let mut c = minimal();
        c.topic.k = vec![100, 1];
        let e = c.validate().unwrap_err();
        assert!(matches!(&e, PipelineError::Config { path, .. } if path == "topic.k[1]"), "{e}");
        let mut c = minimal();
        c.distractor.members.push("a".into());
        assert!(c.validate().is_err());
    }

    #[test]
    fn hash_ignores_workspace_but_not_seeds() {
        let a = minimal();
        let mut b = minimal();
        b.paths.workspace = Some("elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        b.override_seeds(99);
        assert_ne!(a.hash(), b.hash());
        assert_eq!(b.seeds.lda, 99);
    }

    #[test]
    fn stage_names_round_trip() {
        for s in Stage::PIPELINE.iter().chain([&Stage::All]) {
            assert_eq!(s.name().parse::<Stage>().unwrap(), *s);
        }
        assert!("nope".parse::<Stage>().is_err());
    }

    #[test]
    fn missing_upstream_stage_exits_2() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = minimal();
        c.paths.workspace = Some(dir.path().to_path_buf());
        let e = run(Stage::Classify, &c).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("split"), "{e}");
    }
}
