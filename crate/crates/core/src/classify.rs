//! Thread- and user-level documents, per-community score tables, argmax
//! classification and accuracy reports.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ThreadRecord;
use crate::stylelm::TrigramModel;
use crate::text::{Annotator, Token};
use crate::topiclm::{infer_topics, topic_score, CommunityTopicProfile, IdfTable, TopicModel};
use crate::vocab::Vocabulary;

/// Author name of comments whose account no longer exists.
pub const DELETED_AUTHOR: &str = "[deleted]";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Thread,
    User,
}

/// A unit to classify: ordered token sequences with a known community.
#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub doc_id: String,
    pub level: Level,
    pub true_community: String,
    pub content: Vec<Vec<Token>>,
}

impl Document {
    pub fn token_count(&self) -> usize {
        self.content.iter().map(Vec::len).sum()
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.content.iter().flatten().map(|t| t.surface.as_str()).collect()
    }
}

/// A comment after tokenization and tagging.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnotatedComment {
    pub author: String,
    pub karma: i64,
    pub tokens: Vec<Token>,
}

/// A thread after tokenization and tagging, so that thread and user
/// documents can share one annotation pass.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnotatedThread {
    pub id: String,
    pub community: String,
    pub post_karma: i64,
    pub post: Vec<Token>,
    pub comments: Vec<AnnotatedComment>,
}

impl AnnotatedThread {
    pub fn new(thread: &ThreadRecord, community: &str, annotator: &Annotator) -> Self {
        AnnotatedThread {
            id: thread.post.id.clone(),
            community: community.to_string(),
            post_karma: thread.post.karma,
            post: annotator.annotate(&thread.post.text()),
            comments: thread
                .comments
                .iter()
                .map(|c| AnnotatedComment {
                    author: c.author.clone(),
                    karma: c.karma,
                    tokens: annotator.annotate(&c.body),
                })
                .collect(),
        }
    }
}

/// Annotates threads in parallel, preserving order.
pub fn annotate_threads(threads: &[ThreadRecord], community: &str, annotator: &Annotator) -> Vec<AnnotatedThread> {
    threads
        .par_iter()
        .map(|t| AnnotatedThread::new(t, community, annotator))
        .collect()
}

/// Post (title and body) first, then the comments in thread order. Empty
/// token sequences are skipped.
pub fn assemble_thread_doc(thread: &AnnotatedThread) -> Result<Document> {
    let content: Vec<Vec<Token>> = std::iter::once(&thread.post)
        .chain(thread.comments.iter().map(|c| &c.tokens))
        .filter(|s| !s.is_empty())
        .cloned()
        .collect();
    if content.is_empty() {
        return Err(Error::Empty("thread has no text"));
    }
    Ok(Document {
        doc_id: thread.id.clone(),
        level: Level::Thread,
        true_community: thread.community.clone(),
        content,
    })
}

/// Row id of a user document.
pub fn user_doc_id(community: &str, author: &str) -> String {
    format!("{community}/{author}")
}

/// One document per (author, community) pooling the author's comments in
/// thread order. Authors with fewer than `min_user_comments` comments and
/// deleted accounts are skipped. Output is sorted by doc id.
pub fn assemble_user_docs(threads: &[AnnotatedThread], min_user_comments: usize) -> Vec<Document> {
    let mut by_user: BTreeMap<(&str, &str), Vec<Vec<Token>>> = BTreeMap::new();
    for t in threads {
        for c in &t.comments {
            if c.author == DELETED_AUTHOR {
                continue;
            }
            by_user
                .entry((t.community.as_str(), c.author.as_str()))
                .or_default()
                .push(c.tokens.clone());
        }
    }
    by_user
        .into_iter()
        .filter(|(_, seqs)| seqs.len() >= min_user_comments.max(1))
        .filter_map(|((community, author), seqs)| {
            let content: Vec<Vec<Token>> = seqs.into_iter().filter(|s| !s.is_empty()).collect();
            (!content.is_empty()).then(|| Document {
                doc_id: user_doc_id(community, author),
                level: Level::User,
                true_community: community.to_string(),
                content,
            })
        })
        .collect()
}

/// Scores a document against every community of a model family.
pub trait CommunityScorer: Sync {
    fn communities(&self) -> Vec<String>;
    fn score(&self, doc: &Document) -> Result<Vec<f64>>;
}

/// Style similarity: log-probability under each community's trigram model.
pub struct StyleScorer<'a> {
    pub vocab: &'a Vocabulary,
    pub models: Vec<(String, &'a TrigramModel)>,
    /// Per-token instead of total log-probability.
    pub per_token: bool,
}

impl CommunityScorer for StyleScorer<'_> {
    fn communities(&self) -> Vec<String> {
        self.models.iter().map(|(c, _)| c.clone()).collect()
    }

    fn score(&self, doc: &Document) -> Result<Vec<f64>> {
        let seqs: Vec<Vec<u32>> = doc
            .content
            .iter()
            .map(|s| self.vocab.apply(s))
            .collect::<Result<_>>()?;
        if seqs.is_empty() {
            return Err(Error::Empty("document has no sequences"));
        }
        self.models
            .iter()
            .map(|(_, m)| {
                let mut total = crate::stylelm::StyleScore::default();
                for s in &seqs {
                    total += m.score(s)?;
                }
                Ok(if self.per_token {
                    total.per_token()
                } else {
                    total.total_logprob
                })
            })
            .collect()
    }
}

/// Topic similarity: the document's inferred topic vector against each
/// community profile.
pub struct TopicScorer<'a> {
    pub idf: &'a IdfTable,
    pub model: &'a TopicModel,
    pub profiles: Vec<&'a CommunityTopicProfile>,
}

impl CommunityScorer for TopicScorer<'_> {
    fn communities(&self) -> Vec<String> {
        self.profiles.iter().map(|p| p.community.clone()).collect()
    }

    fn score(&self, doc: &Document) -> Result<Vec<f64>> {
        let weighted = self.idf.weigh(doc.doc_id.clone(), &doc.surfaces());
        let theta = infer_topics(self.model, &weighted).theta;
        self.profiles.iter().map(|p| topic_score(p, &theta)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub doc_id: String,
    pub true_community: String,
    pub scores: Vec<f64>,
}

/// Complete document × community score matrix for one model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub model_id: String,
    pub communities: Vec<String>,
    pub rows: Vec<ScoreRow>,
    /// Documents that could not be scored, with the reason.
    pub errors: Vec<(String, String)>,
}

impl ScoreTable {
    pub fn column(&self, community: &str) -> Option<usize> {
        self.communities.iter().position(|c| c == community)
    }

    /// CSV with one row per document and one column per community.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["doc_id".to_string(), "true_community".to_string()];
        header.extend(self.communities.iter().cloned());
        out.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.doc_id.clone(), r.true_community.clone()];
            rec.extend(r.scores.iter().map(|s| s.to_string()));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Scores every document in parallel; rows keep the input order.
pub fn score_all(docs: &[Document], scorer: &dyn CommunityScorer, model_id: &str) -> ScoreTable {
    let results: Vec<Result<Vec<f64>>> = docs.par_iter().map(|d| scorer.score(d)).collect();
    let mut rows = Vec::with_capacity(docs.len());
    let mut errors = Vec::new();
    for (d, r) in docs.iter().zip(results) {
        match r {
            Ok(scores) => rows.push(ScoreRow {
                doc_id: d.doc_id.clone(),
                true_community: d.true_community.clone(),
                scores,
            }),
            Err(e) => errors.push((d.doc_id.clone(), e.to_string())),
        }
    }
    ScoreTable {
        model_id: model_id.to_string(),
        communities: scorer.communities(),
        rows,
        errors,
    }
}

/// Argmax labels per document.
#[derive(Clone, Debug, PartialEq)]
pub struct Predictions {
    pub labels: BTreeMap<String, String>,
    /// Rows whose maximum was shared by two or more communities.
    pub ties: usize,
}

/// Argmax of each row; exact ties go to the alphabetically first community.
pub fn classify(table: &ScoreTable) -> Predictions {
    let mut labels = BTreeMap::new();
    let mut ties = 0;
    for r in &table.rows {
        let best = r.scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut winners: Vec<&String> = table
            .communities
            .iter()
            .zip(&r.scores)
            .filter(|(_, &s)| s == best)
            .map(|(c, _)| c)
            .collect();
        winners.sort();
        if winners.len() > 1 {
            ties += 1;
        }
        if let Some(w) = winners.first() {
            labels.insert(r.doc_id.clone(), (*w).clone());
        }
    }
    Predictions { labels, ties }
}

/// Uniform random labels, for a chance baseline.
pub fn random_predictions(doc_ids: &[String], classes: &[String], seed: u64) -> Predictions {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = doc_ids
        .iter()
        .map(|d| (d.clone(), classes[rng.gen_range(0..classes.len())].clone()))
        .collect();
    Predictions { labels, ties: 0 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classes: Vec<String>,
    /// Documents per true class.
    pub support: Vec<usize>,
    /// `None` for classes without documents.
    pub accuracy: Vec<Option<f64>>,
    /// Unweighted mean over classes with at least one document.
    pub average_accuracy: f64,
    /// confusion[true][predicted]
    pub confusion: Vec<Vec<usize>>,
}

impl EvalReport {
    pub fn evaluated(&self) -> usize {
        self.support.iter().sum()
    }

    pub fn confusion_between(&self, truth: &str, predicted: &str) -> usize {
        let i = self.classes.iter().position(|c| c == truth);
        let j = self.classes.iter().position(|c| c == predicted);
        match (i, j) {
            (Some(i), Some(j)) => self.confusion[i][j],
            _ => 0,
        }
    }

    pub fn write_accuracy_csv<W: Write>(&self, w: W, model_id: &str) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["model", "community", "documents", "accuracy"])?;
        for ((c, n), a) in self.classes.iter().zip(&self.support).zip(&self.accuracy) {
            let acc = a.map(|x| format!("{x:.6}")).unwrap_or_default();
            out.write_record([model_id, c, &n.to_string(), &acc])?;
        }
        out.write_record([
            model_id,
            "average",
            &self.evaluated().to_string(),
            &format!("{:.6}", self.average_accuracy),
        ])?;
        out.flush()?;
        Ok(())
    }

    pub fn write_confusion_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["true\\predicted".to_string()];
        header.extend(self.classes.iter().cloned());
        out.write_record(&header)?;
        for (c, row) in self.classes.iter().zip(&self.confusion) {
            let mut rec = vec![c.clone()];
            rec.extend(row.iter().map(|n| n.to_string()));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Compares predictions with the true labels (`doc_id → community`).
pub fn evaluate(
    predictions: &Predictions,
    truths: &BTreeMap<String, String>,
    classes: &[String],
) -> Result<EvalReport> {
    let index: HashMap<&str, usize> = classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let n = classes.len();
    let mut confusion = vec![vec![0usize; n]; n];
    for (doc, truth) in truths {
        let pred = predictions
            .labels
            .get(doc)
            .ok_or_else(|| Error::InvalidArgument(format!("no prediction for document {doc:?}")))?;
        let lookup = |c: &str| {
            index
                .get(c)
                .copied()
                .ok_or_else(|| Error::InvalidArgument(format!("unknown class {c:?}")))
        };
        confusion[lookup(truth)?][lookup(pred)?] += 1;
    }
    let support: Vec<usize> = confusion.iter().map(|r| r.iter().sum()).collect();
    let accuracy: Vec<Option<f64>> = (0..n)
        .map(|i| (support[i] > 0).then(|| confusion[i][i] as f64 / support[i] as f64))
        .collect();
    let present: Vec<f64> = accuracy.iter().flatten().copied().collect();
    if present.is_empty() {
        return Err(Error::Empty("no documents to evaluate"));
    }
    Ok(EvalReport {
        classes: classes.to_vec(),
        support,
        accuracy,
        average_accuracy: present.iter().sum::<f64>() / present.len() as f64,
        confusion,
    })
}

/// Truth labels of a score table's rows.
pub fn truths(table: &ScoreTable) -> BTreeMap<String, String> {
    table
        .rows
        .iter()
        .map(|r| (r.doc_id.clone(), r.true_community.clone()))
        .collect()
}
