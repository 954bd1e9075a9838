//! Synthetic forums with known structure.
//!
//! Communities write English-like comments from sentence templates over
//! POS slots. A community's style is its weighting of templates, function
//! words and sentence-final punctuation; its topics decide which content
//! words fill the open slots. Authors differ in how closely they follow the
//! community style, and karma rises with that conformity, so feedback
//! correlations have a planted direction. Output is either archive-style
//! JSON lines or gold-tagged token sequences.
//!
//! [`TrigramSource`] is a second, less English-like generator: a random
//! second-order Markov chain over tags with per-tag word emissions.

use std::collections::BTreeMap;
use std::io::Write;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Gamma, Normal};
use serde_json::json;

use crate::classify::{AnnotatedComment, AnnotatedThread};
use crate::error::{Error, Result};
use crate::ingest::{CommentRecord, PostRecord};
use crate::text::{is_punct_token, TagSet, Token};

const BUNDLED_LEXICON: &str = include_str!("../data/synth_lexicon.txt");

/// Sentence skeletons. Tags from the function section draw closed-class
/// words, `@TAG` draws an auxiliary, `word/TAG` is literal, `.` is the
/// community's sentence-final mark and other tags are open-class slots.
pub const TEMPLATES: &[&str] = &[
    "PRP VBD DT NN .",
    "DT JJ NN @VBZ JJ .",
    "PRP VBP DT NNS IN DT NN .",
    "WRB MD PRP VB DT NN ?/.",
    "EX @VBZ DT JJ NN IN PRP$ NN .",
    "PRP MD RB VB PRP$ NNS .",
    "UH ,/PUNCT PRP @VBP RB JJ .",
    "DT NN VBD IN PRP$ NN CC VBD JJ .",
    "PRP VBP TO VB DT JJ NN .",
    "PRP @VBD RB VBG DT NNS .",
    "DT NNS @VBP JJR IN DT NN .",
    "WP @VBZ DT JJS NN IN NNP ?/.",
    "PRP do/VBP n't/RB VB WRB PRP VBP DT NN .",
    "NNP @VBZ DT JJ NN .",
    "PRP @VBP VBN DT NN IN CD NNS .",
    "RB ,/PUNCT DT NN @VBZ RB JJ .",
    "PRP$ NN VBZ DT NNS CC PRP VBP PRP .",
    "IN PRP$ NN ,/PUNCT DT NNS @VBP JJ .",
    "@VBZ PRP JJ TO VB DT NN ?/.",
    "PRP RB VBD DT NN IN DT JJ NN .",
    "DT @VBZ DT JJS NN .",
    "PRP MD VB DT NN IN NNP .",
    "UH .",
    "CD NNS IN DT NN .",
    "PRP VBP PRP$ JJ NN .",
    "WRB @VBP PRP VBG DT NN ?/.",
    "DT NN @VBZ RB VBN IN DT NN .",
    "PRP @VBD n't/RB VB DT NNS .",
    "CC PRP VBD PRP IN DT NN .",
    "PRP VBP NNS @VBP JJ CC JJ .",
    "JJ NN ,/PUNCT JJ NNS .",
    "PRP$ NNS RB VBP DT NN .",
    "DT NN VBZ PRP :/PUNCT NNP .",
    "PRP VBD TO VB PRP IN DT NN (/PUNCT NNP )/PUNCT .",
    "DT NN VBD .",
];

/// Sentence-final punctuation variants a style chooses between.
pub const END_MARKS: &[&[&str]] = &[&["."], &["!"], &["!", "!"], &[".", ".", "."]];

/// Word lists of the generator, keyed by tag.
#[derive(Clone, Debug, PartialEq)]
pub struct Lexicon {
    pub function: BTreeMap<String, Vec<String>>,
    pub aux: BTreeMap<String, Vec<String>>,
    pub general: BTreeMap<String, Vec<String>>,
    pub topics: BTreeMap<String, BTreeMap<String, Vec<String>>>,
}

fn ends_with_sibilant(w: &str) -> bool {
    ["s", "x", "z", "ch", "sh"].iter().any(|e| w.ends_with(e))
}

fn consonant_y(w: &str) -> bool {
    let b = w.as_bytes();
    b.len() >= 2 && b[b.len() - 1] == b'y' && !b"aeiou".contains(&b[b.len() - 2])
}

/// Regular plural or third-person singular.
pub fn add_s(w: &str) -> String {
    if ends_with_sibilant(w) {
        format!("{w}es")
    } else if consonant_y(w) {
        format!("{}ies", &w[..w.len() - 1])
    } else {
        format!("{w}s")
    }
}

/// Regular past tense.
pub fn add_ed(w: &str) -> String {
    if w.ends_with('e') {
        format!("{w}d")
    } else if consonant_y(w) {
        format!("{}ied", &w[..w.len() - 1])
    } else {
        format!("{w}ed")
    }
}

/// Regular present participle.
pub fn add_ing(w: &str) -> String {
    if w.ends_with('e') && !w.ends_with("ee") {
        format!("{}ing", &w[..w.len() - 1])
    } else {
        format!("{w}ing")
    }
}

fn push_words(map: &mut BTreeMap<String, Vec<String>>, tag: &str, words: impl IntoIterator<Item = String>) {
    let list = map.entry(tag.to_string()).or_default();
    for w in words {
        if !list.contains(&w) {
            list.push(w);
        }
    }
}

impl Lexicon {
    pub fn bundled() -> Self {
        Lexicon::parse(BUNDLED_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lex = Lexicon {
            function: BTreeMap::new(),
            aux: BTreeMap::new(),
            general: BTreeMap::new(),
            topics: BTreeMap::new(),
        };
        let mut section: Option<String> = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = Some(name.to_string());
                continue;
            }
            let mut parts = line.split_whitespace();
            let head = parts.next().expect("nonempty line");
            let words: Vec<String> = parts.map(str::to_string).collect();
            let target = match section.as_deref() {
                Some("function") => &mut lex.function,
                Some("aux") => &mut lex.aux,
                Some("general") => &mut lex.general,
                Some(s) if s.starts_with("topic ") => lex.topics.entry(s[6..].trim().to_string()).or_default(),
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "lexicon line {} outside a section",
                        i + 1
                    )))
                }
            };
            match head {
                "NOUN" => {
                    push_words(target, "NN", words.iter().cloned());
                    push_words(target, "NNS", words.iter().map(|w| add_s(w)));
                }
                "VERB" => {
                    push_words(target, "VB", words.iter().cloned());
                    push_words(target, "VBP", words.iter().cloned());
                    push_words(target, "VBZ", words.iter().map(|w| add_s(w)));
                    push_words(target, "VBD", words.iter().map(|w| add_ed(w)));
                    push_words(target, "VBN", words.iter().map(|w| add_ed(w)));
                    push_words(target, "VBG", words.iter().map(|w| add_ing(w)));
                }
                tag => push_words(target, tag, words),
            }
        }
        Ok(lex)
    }

    pub fn topic_names(&self) -> Vec<&str> {
        self.topics.keys().map(String::as_str).collect()
    }

    /// Every tag the generator can emit.
    pub fn tags(&self) -> Vec<String> {
        let mut tags: Vec<String> = self
            .function
            .keys()
            .chain(self.aux.keys())
            .chain(self.general.keys())
            .chain(self.topics.values().flat_map(|t| t.keys()))
            .cloned()
            .chain([".".to_string(), "PUNCT".to_string()])
            .collect();
        tags.sort();
        tags.dedup();
        tags
    }

    /// All words that can carry `tag`, across sections.
    pub fn words_for(&self, tag: &str) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let sections = [&self.function, &self.aux, &self.general];
        for m in sections.into_iter().chain(self.topics.values()) {
            if let Some(ws) = m.get(tag) {
                for w in ws {
                    if !out.contains(w) {
                        out.push(w.clone());
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Slot {
    Function(String),
    Aux(String),
    Open(String),
    Literal(String, String),
    End,
}

fn parse_template(t: &str, lex: &Lexicon) -> Vec<Slot> {
    t.split_whitespace()
        .map(|s| {
            if s == "." {
                Slot::End
            } else if let Some(tag) = s.strip_prefix('@') {
                Slot::Aux(tag.to_string())
            } else if let Some((w, tag)) = s.rsplit_once('/') {
                Slot::Literal(w.to_string(), tag.to_string())
            } else if lex.function.contains_key(s) {
                Slot::Function(s.to_string())
            } else {
                Slot::Open(s.to_string())
            }
        })
        .collect()
}

fn dirichlet<R: Rng>(rng: &mut R, n: usize, concentration: f64) -> Vec<f64> {
    let g = Gamma::new(concentration, 1.0).expect("positive concentration");
    let mut v: Vec<f64> = (0..n).map(|_| g.sample(rng).max(1e-300)).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn pick<'a, R: Rng>(rng: &mut R, items: &'a [String], weights: &[f64]) -> &'a str {
    let i = WeightedIndex::new(weights).map(|d| d.sample(rng)).unwrap_or(0);
    &items[i]
}

/// How a community writes: weights over templates, closed-class words and
/// sentence-final marks.
#[derive(Clone, Debug, PartialEq)]
pub struct StyleProfile {
    pub templates: Vec<f64>,
    pub function: BTreeMap<String, Vec<f64>>,
    pub aux: BTreeMap<String, Vec<f64>>,
    pub ends: Vec<f64>,
    /// Inclusive range of sentences per comment.
    pub sentences: (usize, usize),
    /// Capitalize sentence starts when rendering text.
    pub capitalize: bool,
}

impl StyleProfile {
    /// Every choice equally likely.
    pub fn uniform(lex: &Lexicon) -> Self {
        let flat = |m: &BTreeMap<String, Vec<String>>| {
            m.iter()
                .map(|(k, v)| (k.clone(), vec![1.0 / v.len() as f64; v.len()]))
                .collect()
        };
        StyleProfile {
            templates: vec![1.0 / TEMPLATES.len() as f64; TEMPLATES.len()],
            function: flat(&lex.function),
            aux: flat(&lex.aux),
            ends: vec![1.0 / END_MARKS.len() as f64; END_MARKS.len()],
            sentences: (1, 3),
            capitalize: true,
        }
    }

    /// Dirichlet-distributed weights; smaller `concentration` gives more
    /// peaked, more distinctive styles.
    pub fn random<R: Rng>(lex: &Lexicon, rng: &mut R, concentration: f64) -> Self {
        let draw = |m: &BTreeMap<String, Vec<String>>, rng: &mut R| {
            m.iter()
                .map(|(k, v)| (k.clone(), dirichlet(rng, v.len(), concentration)))
                .collect()
        };
        let templates = dirichlet(rng, TEMPLATES.len(), concentration);
        let function = draw(&lex.function, rng);
        let aux = draw(&lex.aux, rng);
        let ends = dirichlet(rng, END_MARKS.len(), concentration);
        let lo = rng.gen_range(1..=2);
        let hi = lo + rng.gen_range(0..=2);
        StyleProfile {
            templates,
            function,
            aux,
            ends,
            sentences: (lo, hi),
            capitalize: rng.gen_bool(0.7),
        }
    }

    /// Mixture `(1 - t)·self + t·other` of all weights.
    pub fn blend(&self, other: &StyleProfile, t: f64) -> StyleProfile {
        let mix = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect();
        let mix_map = |a: &BTreeMap<String, Vec<f64>>, b: &BTreeMap<String, Vec<f64>>| {
            a.iter().map(|(k, v)| (k.clone(), mix(v, &b[k]))).collect()
        };
        StyleProfile {
            templates: mix(&self.templates, &other.templates),
            function: mix_map(&self.function, &other.function),
            aux: mix_map(&self.aux, &other.aux),
            ends: mix(&self.ends, &other.ends),
            sentences: self.sentences,
            capitalize: self.capitalize,
        }
    }
}

/// Tagged token as produced by the generators.
pub type Tagged = (String, String);

/// Fills templates with words.
#[derive(Clone, Debug)]
pub struct SentenceGenerator {
    lex: Lexicon,
    templates: Vec<Vec<Slot>>,
}

impl SentenceGenerator {
    pub fn new(lex: Lexicon) -> Self {
        let templates = TEMPLATES.iter().map(|t| parse_template(t, &lex)).collect();
        SentenceGenerator { lex, templates }
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lex
    }

    fn open_word<R: Rng>(&self, rng: &mut R, tag: &str, topic: Option<&str>, topic_rate: f64) -> String {
        let from_topic = topic
            .and_then(|t| self.lex.topics.get(t))
            .and_then(|m| m.get(tag))
            .filter(|_| rng.gen_bool(topic_rate));
        let list = from_topic
            .or_else(|| self.lex.general.get(tag))
            .or_else(|| self.lex.topics.values().find_map(|m| m.get(tag)))
            .unwrap_or_else(|| panic!("no words for tag {tag}"));
        list[rng.gen_range(0..list.len())].clone()
    }

    /// One sentence in the given style, content words drawn from `topic`
    /// with probability `topic_rate` and from the general pool otherwise.
    pub fn sentence<R: Rng>(&self, rng: &mut R, style: &StyleProfile, topic: Option<&str>, topic_rate: f64) -> Vec<Tagged> {
        let t = WeightedIndex::new(&style.templates).expect("template weights").sample(rng);
        let mut out = Vec::new();
        for slot in &self.templates[t] {
            match slot {
                Slot::Function(tag) => {
                    let w = pick(rng, &self.lex.function[tag], &style.function[tag]);
                    out.push((w.to_string(), tag.clone()));
                }
                Slot::Aux(tag) => {
                    let w = pick(rng, &self.lex.aux[tag], &style.aux[tag]);
                    out.push((w.to_string(), tag.clone()));
                }
                Slot::Open(tag) => out.push((self.open_word(rng, tag, topic, topic_rate), tag.clone())),
                Slot::Literal(w, tag) => out.push((w.clone(), tag.clone())),
                Slot::End => {
                    let e = WeightedIndex::new(&style.ends).expect("end weights").sample(rng);
                    out.extend(END_MARKS[e].iter().map(|m| (m.to_string(), ".".to_string())));
                }
            }
        }
        out
    }

    /// Several sentences, their count drawn from the style's range.
    pub fn comment<R: Rng>(&self, rng: &mut R, style: &StyleProfile, topic: Option<&str>, topic_rate: f64) -> Vec<Tagged> {
        let n = rng.gen_range(style.sentences.0..=style.sentences.1.max(style.sentences.0));
        (0..n).flat_map(|_| self.sentence(rng, style, topic, topic_rate)).collect()
    }
}

/// Joins tokens into text that [`tokenize`](crate::text::tokenize) splits
/// back into the same tokens.
pub fn render(tokens: &[Tagged], capitalize: bool) -> String {
    let mut out = String::new();
    let mut sentence_start = true;
    for (w, tag) in tokens {
        let attach = (is_punct_token(w) && w != "(") || w == "n't";
        let mut surface = w.clone();
        if tag == "NNP" || (w == "i" && tag == "PRP") || (capitalize && sentence_start && !is_punct_token(w)) {
            let mut cs = surface.chars();
            if let Some(c) = cs.next() {
                surface = c.to_uppercase().chain(cs).collect();
            }
        }
        if !out.is_empty() && !attach && !out.ends_with('(') {
            out.push(' ');
        }
        out.push_str(&surface);
        if !is_punct_token(w) {
            sentence_start = false;
        } else if tag == "." {
            sentence_start = true;
        }
    }
    out
}

/// Gold tokens with tags resolved against `tags`.
pub fn to_tokens(tagged: &[Tagged], tags: &TagSet) -> Result<Vec<Token>> {
    tagged
        .iter()
        .map(|(w, t)| {
            let tag = tags.get(t).ok_or_else(|| Error::UnknownTag {
                tag: t.clone(),
                line: None,
            })?;
            Ok(Token::new(w.clone(), Some(tag)))
        })
        .collect()
}

/// Gold-tagged sentences in the neutral style covering every topic, for
/// training a tagger. One in five loses its final punctuation, as forum
/// text often does.
pub fn tagger_corpus(gen: &SentenceGenerator, sentences: usize, seed: u64) -> Vec<Vec<Tagged>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let style = StyleProfile::uniform(gen.lexicon());
    let topics = gen.lexicon().topic_names();
    (0..sentences)
        .map(|_| {
            let topic = topics[rng.gen_range(0..topics.len())];
            let mut s = gen.sentence(&mut rng, &style, Some(topic), 0.6);
            if rng.gen_bool(0.2) {
                while s.len() > 1 && s.last().is_some_and(|(_, t)| t == ".") {
                    s.pop();
                }
            }
            s
        })
        .collect()
}

/// A community of the synthetic forum.
#[derive(Clone, Debug, PartialEq)]
pub struct CommunitySpec {
    pub name: String,
    pub style: StyleProfile,
    pub topics: Vec<(String, f64)>,
    /// Probability that an open slot takes a topic word.
    pub topic_rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForumOptions {
    pub threads_per_community: usize,
    /// Inclusive range of comments per thread.
    pub comments_per_thread: (usize, usize),
    pub authors: usize,
    pub seed: u64,
    pub start_utc: i64,
    pub deleted_body_rate: f64,
    pub deleted_author_rate: f64,
    pub orphan_comments: usize,
    pub malformed_lines: usize,
}

impl Default for ForumOptions {
    fn default() -> Self {
        ForumOptions {
            threads_per_community: 20,
            comments_per_thread: (30, 45),
            authors: 200,
            seed: 7,
            start_utc: 1_420_070_400,
            deleted_body_rate: 0.01,
            deleted_author_rate: 0.02,
            orphan_comments: 3,
            malformed_lines: 2,
        }
    }
}

/// A generated user.
#[derive(Clone, Debug, PartialEq)]
pub struct Author {
    pub name: String,
    /// 0..1, how closely the author follows a community's style and topics.
    pub conformity: f64,
    /// Indices into the community list.
    pub communities: Vec<usize>,
    pub activity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedComment {
    pub record: CommentRecord,
    /// Empty for deleted comments.
    pub tokens: Vec<Tagged>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedThread {
    pub community: String,
    /// 0..1; raises post karma and the conformity of the discussion.
    pub quality: f64,
    pub post: PostRecord,
    pub post_tokens: Vec<Tagged>,
    pub comments: Vec<GeneratedComment>,
}

impl GeneratedThread {
    /// Gold-tagged view, deleted comments left out.
    pub fn annotated(&self, tags: &TagSet) -> Result<AnnotatedThread> {
        Ok(AnnotatedThread {
            id: self.post.id.clone(),
            community: self.community.clone(),
            post_karma: self.post.karma,
            post: to_tokens(&self.post_tokens, tags)?,
            comments: self
                .comments
                .iter()
                .filter(|c| !c.tokens.is_empty())
                .map(|c| {
                    Ok(AnnotatedComment {
                        author: c.record.author.clone(),
                        karma: c.record.karma,
                        tokens: to_tokens(&c.tokens, tags)?,
                    })
                })
                .collect::<Result<_>>()?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Forum {
    pub threads: Vec<GeneratedThread>,
    pub orphans: Vec<CommentRecord>,
    pub authors: Vec<Author>,
    malformed_lines: usize,
}

fn base36(mut n: u64) -> String {
    const DIGITS: &[u8] = b"0123456789abcdefghijklmnopqrstuvwxyz";
    let mut out = Vec::new();
    loop {
        out.push(DIGITS[(n % 36) as usize]);
        n /= 36;
        if n == 0 {
            break;
        }
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

impl Forum {
    pub fn threads_of<'a>(&'a self, community: &'a str) -> impl Iterator<Item = &'a GeneratedThread> + 'a {
        self.threads.iter().filter(move |t| t.community == community)
    }

    /// Archive-style JSON lines for posts and for comments.
    pub fn write_jsonl<P: Write, C: Write>(&self, mut posts: P, mut comments: C) -> Result<()> {
        for t in &self.threads {
            let p = &t.post;
            let line = json!({
                "id": p.id,
                "subreddit": p.community,
                "author": p.author,
                "title": p.title,
                "selftext": p.body,
                "score": p.karma,
                "created_utc": p.created_utc,
                "num_comments": t.comments.len(),
            });
            writeln!(posts, "{line}")?;
        }
        let all = self.threads.iter().flat_map(|t| t.comments.iter().map(|c| &c.record));
        for (i, c) in all.chain(self.orphans.iter()).enumerate() {
            let line = json!({
                "id": c.id,
                "subreddit": c.community,
                "author": c.author,
                "body": c.body,
                "score": c.karma,
                "created_utc": c.created_utc,
                "parent_id": c.parent_id,
                "link_id": format!("t3_{}", c.link_id),
            });
            writeln!(comments, "{line}")?;
            if i < self.malformed_lines {
                // a record cut off mid-object, as in damaged archives
                let s = line.to_string();
                writeln!(comments, "{}", &s[..s.len() / 2])?;
            }
        }
        Ok(())
    }
}

/// Generates threads for every community. Deterministic given the options.
pub fn generate_forum(gen: &SentenceGenerator, communities: &[CommunitySpec], options: &ForumOptions) -> Forum {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let lex = gen.lexicon();
    let neutral = StyleProfile::uniform(lex);
    let all_topics = lex.topic_names();
    let n_comm = communities.len();

    // Conformant authors specialize: they join fewer communities.
    let mut authors: Vec<Author> = (0..options.authors)
        .map(|i| {
            let conformity: f64 = rng.gen::<f64>().powf(0.8);
            let max_comm = if conformity > 0.7 { 2 } else { 5 };
            let m = rng.gen_range(1..=max_comm.min(n_comm));
            let mut comms: Vec<usize> = (0..n_comm).collect();
            comms.shuffle(&mut rng);
            comms.truncate(m);
            comms.sort_unstable();
            Author {
                name: format!("user_{i:04}"),
                conformity,
                communities: comms,
                activity: 1.0 / (i as f64 + 1.0).powf(0.6),
            }
        })
        .collect();
    // every community needs members
    for c in 0..n_comm {
        if !authors.iter().any(|a| a.communities.contains(&c)) {
            let i = c % authors.len();
            authors[i].communities.push(c);
            authors[i].communities.sort_unstable();
        }
    }
    let members: Vec<Vec<usize>> = (0..n_comm)
        .map(|c| (0..authors.len()).filter(|&a| authors[a].communities.contains(&c)).collect())
        .collect();

    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let mut post_counter: u64 = 1_000_000;
    let mut comment_counter: u64 = 60_000_000;
    let mut threads = Vec::new();
    let mut clock = options.start_utc;

    for _ in 0..options.threads_per_community {
        for (ci, spec) in communities.iter().enumerate() {
            let quality: f64 = rng.gen();
            let topic_weights: Vec<f64> = spec.topics.iter().map(|(_, w)| *w).collect();
            let topic_dist = WeightedIndex::new(&topic_weights).expect("topic weights");
            let pool = &members[ci];
            let pool_weights: Vec<f64> = pool.iter().map(|&a| authors[a].activity).collect();
            let author_dist = WeightedIndex::new(&pool_weights).expect("author weights");

            let op = &authors[pool[author_dist.sample(&mut rng)]];
            let thread_topic = spec.topics[topic_dist.sample(&mut rng)].0.clone();
            let title_tokens = gen.sentence(&mut rng, &spec.style, Some(&thread_topic), spec.topic_rate);
            let body_tokens = if rng.gen_bool(0.6) {
                gen.comment(&mut rng, &spec.style, Some(&thread_topic), spec.topic_rate)
            } else {
                Vec::new()
            };
            clock += 600 + rng.gen_range(0..600);
            let post_id = base36(post_counter);
            post_counter += rng.gen_range(1..50);
            let post_karma = (5.0 * (2.5 * quality + 0.35 * noise.sample(&mut rng)).exp()).floor() as i64;
            let post = PostRecord {
                id: post_id.clone(),
                community: spec.name.clone(),
                author: op.name.clone(),
                title: render(&title_tokens, spec.style.capitalize),
                body: render(&body_tokens, spec.style.capitalize),
                karma: post_karma,
                created_utc: clock,
            };
            let mut post_tokens = title_tokens;
            post_tokens.extend(body_tokens);

            let n = rng.gen_range(options.comments_per_thread.0..=options.comments_per_thread.1);
            let mut t = clock;
            let mut comments: Vec<GeneratedComment> = Vec::with_capacity(n);
            for _ in 0..n {
                let author = &authors[pool[author_dist.sample(&mut rng)]];
                let w = (0.25 + 0.35 * quality + 0.4 * author.conformity).min(1.0);
                let on_topic = rng.gen_bool(w);
                let topic = if on_topic {
                    spec.topics[topic_dist.sample(&mut rng)].0.clone()
                } else {
                    all_topics[rng.gen_range(0..all_topics.len())].to_string()
                };
                let style = if rng.gen_bool(w) { &spec.style } else { &neutral };
                let tokens = gen.comment(&mut rng, style, Some(&topic), spec.topic_rate);
                let karma = if rng.gen_bool(0.04) {
                    -rng.gen_range(0..5)
                } else {
                    ((0.2 + 3.2 * author.conformity + 0.6 * noise.sample(&mut rng)).exp().floor() as i64 - 1).max(0)
                };
                t += rng.gen_range(0..90);
                let parent = if comments.is_empty() || rng.gen_bool(0.4) {
                    format!("t3_{post_id}")
                } else {
                    format!("t1_{}", comments[rng.gen_range(0..comments.len())].record.id)
                };
                let deleted = rng.gen_bool(options.deleted_body_rate);
                let author_name = if rng.gen_bool(options.deleted_author_rate) {
                    "[deleted]".to_string()
                } else {
                    author.name.clone()
                };
                let id = base36(comment_counter);
                comment_counter += rng.gen_range(1..20);
                comments.push(GeneratedComment {
                    record: CommentRecord {
                        id,
                        parent_id: parent,
                        link_id: post_id.clone(),
                        community: spec.name.clone(),
                        author: author_name,
                        body: if deleted {
                            "[deleted]".to_string()
                        } else {
                            render(&tokens, style.capitalize)
                        },
                        karma,
                        created_utc: t,
                    },
                    tokens: if deleted { Vec::new() } else { tokens },
                });
            }
            threads.push(GeneratedThread {
                community: spec.name.clone(),
                quality,
                post,
                post_tokens,
                comments,
            });
        }
    }

    let orphans = (0..options.orphan_comments)
        .map(|i| {
            let spec = &communities[i % n_comm];
            let tokens = gen.comment(&mut rng, &spec.style, None, 0.0);
            let id = base36(comment_counter);
            comment_counter += 1;
            CommentRecord {
                id,
                parent_id: "t3_zzzzzz".into(),
                link_id: "zzzzzz".into(),
                community: spec.name.clone(),
                author: authors[0].name.clone(),
                body: render(&tokens, true),
                karma: 1,
                created_utc: clock,
            }
        })
        .collect();

    Forum {
        threads,
        orphans,
        authors,
        malformed_lines: options.malformed_lines,
    }
}

/// Communities with their own random style and a dominant topic each.
/// `names` must name lexicon topics.
pub fn topical_communities(gen: &SentenceGenerator, names: &[&str], seed: u64) -> Result<Vec<CommunitySpec>> {
    let lex = gen.lexicon();
    let topics = lex.topic_names();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    names
        .iter()
        .map(|&name| {
            if !lex.topics.contains_key(name) {
                return Err(Error::InvalidArgument(format!("no lexicon topic {name:?}")));
            }
            let others: Vec<&str> = topics.iter().copied().filter(|t| *t != name).collect();
            let side = others[rng.gen_range(0..others.len())];
            Ok(CommunitySpec {
                name: name.to_string(),
                style: StyleProfile::random(lex, &mut rng, 0.4),
                topics: vec![(name.to_string(), 0.8), (side.to_string(), 0.2)],
                topic_rate: 0.7,
            })
        })
        .collect()
}

/// Communities that talk about the same topics in different styles.
pub fn shared_topic_communities(gen: &SentenceGenerator, names: &[&str], topics: &[&str], seed: u64) -> Vec<CommunitySpec> {
    let lex = gen.lexicon();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mix: Vec<(String, f64)> = topics.iter().map(|t| (t.to_string(), 1.0)).collect();
    names
        .iter()
        .map(|&name| CommunitySpec {
            name: name.to_string(),
            style: StyleProfile::random(lex, &mut rng, 0.3),
            topics: mix.clone(),
            topic_rate: 0.7,
        })
        .collect()
}

/// A random second-order Markov chain over tags emitting (word, tag)
/// pairs, with sparse transition rows.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigramSource {
    tags: Vec<String>,
    words: Vec<Vec<String>>,
    // rows indexed by t2 * (n + 1) + t1, with n the start symbol; the last
    // column ends the sequence
    transitions: Vec<Vec<f64>>,
    emissions: Vec<Vec<f64>>,
}

impl TrigramSource {
    pub fn random(lex: &Lexicon, seed: u64, concentration: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tags: Vec<String> = lex.tags().into_iter().filter(|t| t != "." && t != "PUNCT").collect();
        let n = tags.len();
        let words: Vec<Vec<String>> = tags.iter().map(|t| lex.words_for(t)).collect();
        let transitions = (0..(n + 1) * (n + 1))
            .map(|_| {
                let mut row = dirichlet(&mut rng, n + 1, concentration);
                // keep comments short
                row.iter_mut().for_each(|x| *x *= 0.85);
                row[n] += 0.15;
                row
            })
            .collect();
        let emissions = words.iter().map(|w| dirichlet(&mut rng, w.len(), 0.5)).collect();
        TrigramSource {
            tags,
            words,
            transitions,
            emissions,
        }
    }

    /// A nearby source: every distribution moves a fraction `strength`
    /// toward a fresh random one.
    pub fn perturb(&self, strength: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.clone();
        for row in out.transitions.iter_mut().chain(out.emissions.iter_mut()) {
            let fresh = dirichlet(&mut rng, row.len(), 0.3);
            for (x, y) in row.iter_mut().zip(fresh) {
                *x = (1.0 - strength) * *x + strength * y;
            }
        }
        out
    }

    /// One sequence of at most `max_len` tokens (at least one).
    pub fn sample<R: Rng>(&self, rng: &mut R, max_len: usize) -> Vec<Tagged> {
        let n = self.tags.len();
        let (mut t2, mut t1) = (n, n);
        let mut out = Vec::new();
        while out.len() < max_len.max(1) {
            let row = &self.transitions[t2 * (n + 1) + t1];
            let next = WeightedIndex::new(row).expect("transition weights").sample(rng);
            if next == n {
                if out.is_empty() {
                    continue;
                }
                break;
            }
            let w = WeightedIndex::new(&self.emissions[next]).expect("emission weights").sample(rng);
            out.push((self.words[next][w].clone(), self.tags[next].clone()));
            t2 = t1;
            t1 = next;
        }
        out
    }

    /// Gold-tagged threads of `comments` sequences each.
    pub fn threads(&self, community: &str, count: usize, comments: usize, max_len: usize, seed: u64, tags: &TagSet) -> Result<Vec<AnnotatedThread>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|i| {
                let post = to_tokens(&self.sample(&mut rng, max_len), tags)?;
                let comments = (0..comments)
                    .map(|j| {
                        Ok(AnnotatedComment {
                            author: format!("{community}_u{}", (i * 7 + j) % 50),
                            karma: 1,
                            tokens: to_tokens(&self.sample(&mut rng, max_len), tags)?,
                        })
                    })
                    .collect::<Result<_>>()?;
                Ok(AnnotatedThread {
                    id: format!("{community}_{i:04}"),
                    community: community.to_string(),
                    post_karma: 1,
                    post,
                    comments,
                })
            })
            .collect()
    }
}
