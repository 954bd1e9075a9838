//! Forum dump parsing, thread assembly, filtering and train/test splitting.
//!
//! Dumps are newline-delimited JSON using the public Reddit archive field
//! names (`id`, `subreddit`, `author`, `body`/`title`/`selftext`, `score`,
//! `created_utc`, `parent_id`, `link_id`). Files ending in `.gz` are
//! decompressed on the fly.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Comment bodies that carry no text.
pub const DELETED_BODIES: [&str; 2] = ["[deleted]", "[removed]"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentRecord {
    pub id: String,
    pub parent_id: String,
    /// Id of the post that roots the thread, without the `t3_` kind prefix.
    pub link_id: String,
    pub community: String,
    pub author: String,
    pub body: String,
    pub karma: i64,
    pub created_utc: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostRecord {
    pub id: String,
    pub community: String,
    pub author: String,
    pub title: String,
    pub body: String,
    pub karma: i64,
    pub created_utc: i64,
}

impl PostRecord {
    /// Title and body as one text.
    pub fn text(&self) -> String {
        if self.body.is_empty() {
            self.title.clone()
        } else {
            format!("{}\n{}", self.title, self.body)
        }
    }
}

/// A post with its comments in chronological order (ties by id).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreadRecord {
    pub post: PostRecord,
    pub comments: Vec<CommentRecord>,
    /// Comment count at assembly time. The size threshold is tested against
    /// this, so karma filtering never changes a thread's eligibility.
    pub assembled_comments: usize,
}

impl ThreadRecord {
    pub fn id(&self) -> &str {
        &self.post.id
    }

    /// Community the thread was collected from.
    pub fn source_community(&self) -> &str {
        &self.post.community
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityCorpus {
    pub community: String,
    pub train_threads: Vec<ThreadRecord>,
    pub test_threads: Vec<ThreadRecord>,
}

impl CommunityCorpus {
    pub fn all_threads(&self) -> impl Iterator<Item = &ThreadRecord> {
        self.train_threads.iter().chain(self.test_threads.iter())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DumpKind {
    Comment,
    Post,
}

/// Line accounting for one parsed dump.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseStats {
    /// Non-blank lines seen.
    pub lines: usize,
    /// Lines that were not a complete record of the requested kind.
    pub malformed: usize,
    /// Well-formed records dropped for a deleted/removed body.
    pub deleted: usize,
}

impl ParseStats {
    pub fn well_formed(&self) -> usize {
        self.lines - self.malformed
    }

    pub fn merge(&mut self, other: ParseStats) {
        self.lines += other.lines;
        self.malformed += other.malformed;
        self.deleted += other.deleted;
    }
}

#[derive(Clone, Debug)]
pub struct ParsedDump<T> {
    pub records: Vec<T>,
    pub stats: ParseStats,
}

#[derive(Clone, Debug)]
pub enum DumpRecords {
    Comments(Vec<CommentRecord>),
    Posts(Vec<PostRecord>),
}

// Archive dumps are inconsistent about numeric fields.
#[derive(Deserialize)]
#[serde(untagged)]
enum Num {
    Int(i64),
    Float(f64),
    Str(String),
}

impl Num {
    fn get(&self) -> Option<i64> {
        match self {
            Num::Int(v) => Some(*v),
            Num::Float(v) if v.is_finite() => Some(*v as i64),
            Num::Float(_) => None,
            Num::Str(s) => s.trim().parse::<f64>().ok().map(|v| v as i64),
        }
    }
}

#[derive(Deserialize)]
struct RawComment {
    id: String,
    subreddit: String,
    author: String,
    body: String,
    score: Num,
    created_utc: Num,
    parent_id: String,
    link_id: String,
}

#[derive(Deserialize)]
struct RawPost {
    id: String,
    subreddit: String,
    author: String,
    title: String,
    #[serde(default)]
    selftext: Option<String>,
    #[serde(default)]
    body: Option<String>,
    score: Num,
    created_utc: Num,
}

fn strip_kind(id: &str) -> &str {
    match id.split_once('_') {
        Some((kind, rest)) if kind.len() == 2 && kind.starts_with('t') => rest,
        _ => id,
    }
}

fn is_deleted(body: &str) -> bool {
    DELETED_BODIES.contains(&body)
}

enum LineOutcome<T> {
    Record(T),
    Deleted,
    Malformed,
}

fn comment_from_line(line: &str) -> LineOutcome<CommentRecord> {
    let Ok(raw) = serde_json::from_str::<RawComment>(line) else {
        return LineOutcome::Malformed;
    };
    let (Some(karma), Some(created_utc)) = (raw.score.get(), raw.created_utc.get()) else {
        return LineOutcome::Malformed;
    };
    if raw.id.is_empty() {
        return LineOutcome::Malformed;
    }
    if is_deleted(&raw.body) {
        return LineOutcome::Deleted;
    }
    LineOutcome::Record(CommentRecord {
        link_id: strip_kind(&raw.link_id).to_string(),
        id: raw.id,
        parent_id: raw.parent_id,
        community: raw.subreddit,
        author: raw.author,
        body: raw.body,
        karma,
        created_utc,
    })
}

fn post_from_line(line: &str) -> LineOutcome<PostRecord> {
    let Ok(raw) = serde_json::from_str::<RawPost>(line) else {
        return LineOutcome::Malformed;
    };
    let (Some(karma), Some(created_utc)) = (raw.score.get(), raw.created_utc.get()) else {
        return LineOutcome::Malformed;
    };
    if raw.id.is_empty() || raw.title.trim().is_empty() {
        return LineOutcome::Malformed;
    }
    // A post whose self-text was deleted still roots its discussion; keep the title.
    let mut body = raw.selftext.or(raw.body).unwrap_or_default();
    if is_deleted(&body) {
        body.clear();
    }
    LineOutcome::Record(PostRecord {
        id: strip_kind(&raw.id).to_string(),
        community: raw.subreddit,
        author: raw.author,
        title: raw.title,
        body,
        karma,
        created_utc,
    })
}

fn parse_lines<R, T>(reader: R, parse: fn(&str) -> LineOutcome<T>) -> Result<ParsedDump<T>>
where
    R: BufRead,
{
    let mut records = Vec::new();
    let mut stats = ParseStats::default();
    for line in reader.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        stats.lines += 1;
        match parse(line) {
            LineOutcome::Record(r) => records.push(r),
            LineOutcome::Deleted => stats.deleted += 1,
            LineOutcome::Malformed => stats.malformed += 1,
        }
    }
    if stats.malformed * 2 > stats.lines {
        return Err(Error::DumpFormat {
            malformed: stats.malformed,
            lines: stats.lines,
        });
    }
    Ok(ParsedDump { records, stats })
}

pub fn parse_comments<R: BufRead>(reader: R) -> Result<ParsedDump<CommentRecord>> {
    parse_lines(reader, comment_from_line)
}

pub fn parse_posts<R: BufRead>(reader: R) -> Result<ParsedDump<PostRecord>> {
    parse_lines(reader, post_from_line)
}

/// Parses a dump of the given kind. Malformed lines are skipped and counted;
/// more than half malformed is fatal.
pub fn parse_dump<R: BufRead>(reader: R, kind: DumpKind) -> Result<(DumpRecords, ParseStats)> {
    Ok(match kind {
        DumpKind::Comment => {
            let d = parse_comments(reader)?;
            (DumpRecords::Comments(d.records), d.stats)
        }
        DumpKind::Post => {
            let d = parse_posts(reader)?;
            (DumpRecords::Posts(d.records), d.stats)
        }
    })
}

/// Opens a dump file, transparently decompressing `.gz`.
pub fn open_dump(path: &Path) -> Result<Box<dyn BufRead + Send>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    if path.extension().is_some_and(|e| e == "gz") {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

/// Result of grouping comments under their posts.
#[derive(Clone, Debug)]
pub struct Assembly {
    pub threads: Vec<ThreadRecord>,
    /// Comments whose `link_id` matched no post.
    pub orphans: usize,
}

fn comment_order(a: &CommentRecord, b: &CommentRecord) -> std::cmp::Ordering {
    a.created_utc
        .cmp(&b.created_utc)
        .then_with(|| a.id.cmp(&b.id))
}

/// Groups comments by `link_id` under matching posts. Threads come out
/// sorted by post id, comments chronologically with ties broken by id.
pub fn assemble_threads(posts: Vec<PostRecord>, comments: Vec<CommentRecord>) -> Assembly {
    let mut by_post: BTreeMap<String, (PostRecord, Vec<CommentRecord>)> = posts
        .into_iter()
        .map(|p| (p.id.clone(), (p, Vec::new())))
        .collect();
    let mut orphans = 0;
    for c in comments {
        match by_post.get_mut(&c.link_id) {
            Some((_, list)) => list.push(c),
            None => orphans += 1,
        }
    }
    let threads = by_post
        .into_values()
        .map(|(post, mut comments)| {
            comments.sort_by(comment_order);
            ThreadRecord {
                assembled_comments: comments.len(),
                post,
                comments,
            }
        })
        .collect();
    Assembly { threads, orphans }
}

/// Drops threads below the size threshold, then optionally removes
/// comments with karma ≤ 0 from the survivors.
pub fn filter_corpus(
    threads: Vec<ThreadRecord>,
    min_thread_comments: usize,
    drop_nonpositive_karma: bool,
) -> Vec<ThreadRecord> {
    threads
        .into_iter()
        .filter(|t| t.assembled_comments >= min_thread_comments)
        .map(|mut t| {
            if drop_nonpositive_karma {
                t.comments.retain(|c| c.karma > 0);
            }
            t
        })
        .collect()
}

/// Number of threads a fraction holds out; ceiling, with a guard against
/// products like `10 * 0.2` landing a hair above an integer.
pub fn test_count(n: usize, test_fraction: f64) -> usize {
    ((n as f64 * test_fraction) - 1e-9).ceil().max(0.0) as usize
}

/// Seeded split. Threads are put in post-id order, shuffled by a permutation
/// drawn from `seed`, and the last ⌈n·test_fraction⌉ become the test set.
pub fn split_train_test(
    mut threads: Vec<ThreadRecord>,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<ThreadRecord>, Vec<ThreadRecord>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test_fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    if threads.is_empty() {
        return Ok((Vec::new(), Vec::new()));
    }
    threads.sort_by(|a, b| a.post.id.cmp(&b.post.id));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    threads.shuffle(&mut rng);
    let n_test = test_count(threads.len(), test_fraction);
    let test = threads.split_off(threads.len() - n_test);
    Ok((threads, test))
}

/// Pools several corpora into one open-class community. Threads keep their
/// source community in `post.community`.
pub fn build_merged_distractor(corpora: &[CommunityCorpus], name: &str) -> Result<CommunityCorpus> {
    if corpora.is_empty() {
        return Err(Error::Empty("distractor needs at least one corpus"));
    }
    let mut seen: HashMap<&str, &str> = HashMap::new();
    for corpus in corpora {
        for t in corpus.all_threads() {
            if let Some(prev) = seen.insert(t.id(), &corpus.community) {
                return Err(Error::DuplicateThread {
                    id: t.id().to_string(),
                    first: prev.to_string(),
                    second: corpus.community.clone(),
                });
            }
        }
    }
    let mut train: Vec<ThreadRecord> = corpora
        .iter()
        .flat_map(|c| c.train_threads.iter().cloned())
        .collect();
    let mut test: Vec<ThreadRecord> = corpora
        .iter()
        .flat_map(|c| c.test_threads.iter().cloned())
        .collect();
    train.sort_by(|a, b| a.post.id.cmp(&b.post.id));
    test.sort_by(|a, b| a.post.id.cmp(&b.post.id));
    Ok(CommunityCorpus {
        community: name.to_string(),
        train_threads: train,
        test_threads: test,
    })
}

pub fn write_threads(path: &Path, threads: &[ThreadRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for t in threads {
        serde_json::to_writer(&mut w, t)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_threads(path: &Path) -> Result<Vec<ThreadRecord>> {
    let reader = open_dump(path)?;
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let t = serde_json::from_str(&line).map_err(|e| {
            Error::ModelFormat(format!("{}:{}: {e}", path.display(), i + 1))
        })?;
        out.push(t);
    }
    Ok(out)
}
