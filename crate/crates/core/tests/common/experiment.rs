//! Miniature train/classify runs over gold-tagged synthetic threads.

use std::collections::BTreeMap;

use commlang::classify::{
    assemble_thread_doc, classify, evaluate, score_all, truths, AnnotatedThread, Document, EvalReport, StyleScorer,
    TopicScorer,
};
use commlang::stylelm::{count_ngrams, estimate, Smoothing, TrigramModel};
use commlang::text::{TagSet, Token};
use commlang::topiclm::{build_profile, build_tfidf, default_stopwords, infer_topics, train_lda, LdaOptions};
use commlang::vocab::{balanced_subset, build_hybrid_vocab, count_frequencies, CommunityTokens, Vocabulary};

pub struct Split {
    pub train: BTreeMap<String, Vec<AnnotatedThread>>,
    pub test: BTreeMap<String, Vec<AnnotatedThread>>,
}

impl Split {
    /// The last `test_fraction` of every community's threads are held out.
    pub fn new(communities: BTreeMap<String, Vec<AnnotatedThread>>, test_fraction: f64) -> Self {
        let mut train = BTreeMap::new();
        let mut test = BTreeMap::new();
        for (c, mut threads) in communities {
            let n_test = ((threads.len() as f64) * test_fraction).round() as usize;
            let held = threads.split_off(threads.len() - n_test);
            train.insert(c.clone(), threads);
            test.insert(c, held);
        }
        Split { train, test }
    }

    pub fn classes(&self) -> Vec<String> {
        self.train.keys().cloned().collect()
    }

    pub fn test_docs(&self) -> Vec<Document> {
        self.test
            .values()
            .flatten()
            .map(|t| assemble_thread_doc(t).expect("non-empty thread"))
            .collect()
    }
}

fn sequences(threads: &[AnnotatedThread]) -> impl Iterator<Item = &Vec<Token>> {
    threads
        .iter()
        .flat_map(|t| std::iter::once(&t.post).chain(t.comments.iter().map(|c| &c.tokens)))
        .filter(|s| !s.is_empty())
}

pub fn hybrid_vocab(split: &Split, n_general: usize, n_per_community: usize, tags: &TagSet) -> Vocabulary {
    let per_class: Vec<CommunityTokens> = split
        .train
        .iter()
        .map(|(c, threads)| CommunityTokens {
            community: c.clone(),
            sequences: sequences(threads)
                .map(|s| s.iter().map(|t| t.surface.clone()).collect())
                .collect(),
        })
        .collect();
    let balanced = count_frequencies(balanced_subset(&per_class).unwrap(), None);
    let tables: Vec<_> = per_class
        .iter()
        .map(|c| count_frequencies(c.sequences.iter().flatten().map(String::as_str), Some(&c.community)))
        .collect();
    build_hybrid_vocab(&balanced, &tables, n_general, n_per_community, tags)
}

pub fn style_models(split: &Split, vocab: &Vocabulary, smoothing: Smoothing) -> Vec<(String, TrigramModel)> {
    split
        .train
        .iter()
        .map(|(c, threads)| {
            let seqs: Vec<Vec<u32>> = sequences(threads).map(|s| vocab.apply(s).unwrap()).collect();
            let counts = count_ngrams(&seqs, vocab.len()).unwrap();
            (c.clone(), estimate(&counts, vocab.symbols(), smoothing).unwrap())
        })
        .collect()
}

/// Thread-level evaluation of a style model family.
pub fn style_accuracy(split: &Split, vocab: &Vocabulary, models: &[(String, TrigramModel)]) -> EvalReport {
    let scorer = StyleScorer {
        vocab,
        models: models.iter().map(|(c, m)| (c.clone(), m)).collect(),
        per_token: false,
    };
    let table = score_all(&split.test_docs(), &scorer, "style");
    assert!(table.errors.is_empty(), "{:?}", table.errors);
    evaluate(&classify(&table), &truths(&table), &split.classes()).unwrap()
}

fn surfaces(t: &AnnotatedThread) -> impl Iterator<Item = String> + '_ {
    sequences(std::slice::from_ref(t)).flatten().map(|tok| tok.surface.clone())
}

/// Thread-level evaluation of an LDA topic model with k-means profiles.
pub fn topic_accuracy(split: &Split, k: usize, clusters: usize, iterations: usize, seed: u64) -> EvalReport {
    let mut docs: Vec<(String, Vec<String>)> = Vec::new();
    for (c, threads) in &split.train {
        for t in threads {
            for (i, s) in sequences(std::slice::from_ref(t)).enumerate() {
                docs.push((format!("{c}/{}/{i}", t.id), s.iter().map(|x| x.surface.clone()).collect()));
            }
        }
    }
    let tfidf = build_tfidf(&docs, &default_stopwords()).unwrap();
    let options = LdaOptions {
        iterations,
        ..LdaOptions::new(k, seed)
    };
    let model = train_lda(&tfidf.docs, tfidf.table.len(), &tfidf.table.words, &options)
        .unwrap()
        .model;
    let profiles: Vec<_> = split
        .train
        .iter()
        .map(|(c, threads)| {
            let vectors: Vec<Vec<f64>> = threads
                .iter()
                .map(|t| {
                    let tokens: Vec<String> = surfaces(t).collect();
                    infer_topics(&model, &tfidf.table.weigh(t.id.clone(), &tokens)).theta
                })
                .collect();
            build_profile(c, &vectors, clusters, seed).unwrap()
        })
        .collect();
    let scorer = TopicScorer {
        idf: &tfidf.table,
        model: &model,
        profiles: profiles.iter().collect(),
    };
    let table = score_all(&split.test_docs(), &scorer, "topic");
    assert!(table.errors.is_empty(), "{:?}", table.errors);
    evaluate(&classify(&table), &truths(&table), &split.classes()).unwrap()
}
