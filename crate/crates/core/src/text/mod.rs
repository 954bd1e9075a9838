//! Tokenization and part-of-speech tagging.

mod pretagged;
mod tagger;
mod tokenize;

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use pretagged::{read_pretagged, write_pretagged};
pub use tagger::{train_tagger, TaggerModel, TaggerTrainOptions, TaggerTrainReport};
pub use tokenize::{is_punct_char, is_punct_token, tokenize, URL_TOKEN};

/// Number of symbols in a tag inventory.
pub const TAGSET_SIZE: usize = 38;
/// Tag for `.`, `!` and `?` runs.
pub const SENTENCE_FINAL_TAG: &str = ".";
/// Tag for every other punctuation or symbol token.
pub const OTHER_PUNCT_TAG: &str = "PUNCT";

const DEFAULT_TAGSET: &str = include_str!("../../data/tagset.txt");

/// Index of a tag within its [`TagSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Tag(pub u8);

/// Ordered inventory of exactly 38 tags: the Penn Treebank word tags plus
/// one sentence-final and one other-punctuation tag.
#[derive(Clone, PartialEq, Eq)]
pub struct TagSet {
    names: Vec<String>,
    index: HashMap<String, Tag>,
}

impl fmt::Debug for TagSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.names).finish()
    }
}

impl Default for TagSet {
    fn default() -> Self {
        TagSet::parse(DEFAULT_TAGSET).expect("bundled tag set is valid")
    }
}

impl TagSet {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() != TAGSET_SIZE {
            return Err(Error::TagSet(format!(
                "expected {TAGSET_SIZE} tags, found {}",
                names.len()
            )));
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || n.chars().any(char::is_whitespace) {
                return Err(Error::TagSet(format!("bad tag symbol {n:?}")));
            }
            if index.insert(n.clone(), Tag(i as u8)).is_some() {
                return Err(Error::TagSet(format!("duplicate tag {n:?}")));
            }
        }
        for required in [SENTENCE_FINAL_TAG, OTHER_PUNCT_TAG] {
            if !index.contains_key(required) {
                return Err(Error::TagSet(format!("missing punctuation tag {required:?}")));
            }
        }
        Ok(TagSet { names, index })
    }

    /// One tag per line; blank lines and `#` comments ignored.
    pub fn parse(text: &str) -> Result<Self> {
        TagSet::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TagSet::parse(&text)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<Tag> {
        self.index.get(name).copied()
    }

    pub fn name(&self, tag: Tag) -> &str {
        &self.names[tag.0 as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn iter(&self) -> impl Iterator<Item = Tag> + '_ {
        (0..self.names.len()).map(|i| Tag(i as u8))
    }

    /// Short content hash, recorded in vocabulary headers.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for n in &self.names {
            h.update(n.as_bytes());
            h.update(b"\n");
        }
        hex::encode(&h.finalize()[..8])
    }

    /// Rule-based tag for punctuation tokens; `None` for anything else.
    pub fn punct_tag(&self, surface: &str) -> Option<Tag> {
        if !is_punct_token(surface) {
            return None;
        }
        let name = if surface.chars().all(|c| matches!(c, '.' | '!' | '?')) {
            SENTENCE_FINAL_TAG
        } else {
            OTHER_PUNCT_TAG
        };
        self.get(name)
    }
}

/// A lowercased surface form with its POS tag, if it has been tagged.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Token {
    pub surface: String,
    pub tag: Option<Tag>,
}

impl Token {
    pub fn new(surface: impl Into<String>, tag: Option<Tag>) -> Self {
        Token {
            surface: surface.into(),
            tag,
        }
    }

    pub fn untagged(surface: impl Into<String>) -> Self {
        Token::new(surface, None)
    }
}

/// Tokenizes text and tags it when a tagger is available.
#[derive(Clone, Debug, Default)]
pub struct Annotator {
    tagger: Option<TaggerModel>,
}

impl Annotator {
    pub fn new(tagger: Option<TaggerModel>) -> Self {
        Annotator { tagger }
    }

    pub fn tagger(&self) -> Option<&TaggerModel> {
        self.tagger.as_ref()
    }

    pub fn annotate(&self, raw: &str) -> Vec<Token> {
        let surfaces = tokenize(raw);
        match &self.tagger {
            Some(t) => t.tag(&surfaces),
            None => surfaces.into_iter().map(Token::untagged).collect(),
        }
    }
}
