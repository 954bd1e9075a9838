//! Relates style similarity to community feedback on a synthetic forum
//! whose karma rises with how closely authors follow the community style.
//! Prints thread- and user-level Spearman correlations of distractor-
//! normalized scores, and the k-index distribution.
//!
//! ```bash
//! cargo run -p commlang --example feedback_correlation
//! ```

use std::collections::BTreeMap;

use commlang::classify::{assemble_thread_doc, assemble_user_docs, score_all, user_doc_id, AnnotatedThread, StyleScorer};
use commlang::feedback::{
    correlate_threads, correlate_users, k_index, kindex_histogram, normalize_scores, CorrelationOptions,
};
use commlang::stylelm::{count_ngrams, estimate, Smoothing};
use commlang::synth::{generate_forum, topical_communities, ForumOptions, Lexicon, SentenceGenerator};
use commlang::text::TagSet;
use commlang::vocab::Vocabulary;

const TARGETS: [&str; 2] = ["cycling", "photography"];
const OTHERS: [&str; 3] = ["finance", "music", "travel"];
const DISTRACTOR: &str = "merged_others";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tags = TagSet::default();
    let gen = SentenceGenerator::new(Lexicon::bundled());
    let names: Vec<&str> = TARGETS.iter().chain(&OTHERS).copied().collect();
    let forum = generate_forum(
        &gen,
        &topical_communities(&gen, &names, 41)?,
        &ForumOptions {
            threads_per_community: 30,
            authors: 150,
            ..ForumOptions::default()
        },
    );

    // even threads train, odd threads are scored; the distractor pools the others
    let mut train: BTreeMap<String, Vec<AnnotatedThread>> = BTreeMap::new();
    let mut test: Vec<AnnotatedThread> = Vec::new();
    for c in &names {
        let class = if TARGETS.contains(c) { c.to_string() } else { DISTRACTOR.to_string() };
        for (i, t) in forum.threads_of(c).enumerate() {
            let a = t.annotated(&tags)?;
            if i % 2 == 0 {
                train.entry(class.clone()).or_default().push(a);
            } else if TARGETS.contains(c) {
                test.push(a);
            }
        }
    }

    let vocab = Vocabulary::tag_only(tags.clone());
    let mut models = Vec::new();
    for (class, threads) in &train {
        let ids: Vec<Vec<u32>> = threads
            .iter()
            .flat_map(|t| t.comments.iter().map(|c| vocab.apply(&c.tokens)))
            .collect::<Result<_, _>>()?;
        models.push((class.clone(), estimate(&count_ngrams(&ids, vocab.len())?, vocab.symbols(), Smoothing::WittenBell)?));
    }
    let scorer = StyleScorer {
        vocab: &vocab,
        models: models.iter().map(|(c, m)| (c.clone(), m)).collect(),
        per_token: true,
    };
    let options = CorrelationOptions::default();

    let thread_docs = test.iter().map(assemble_thread_doc).collect::<Result<Vec<_>, _>>()?;
    let threads = normalize_scores(&score_all(&thread_docs, &scorer, "tag_only"), DISTRACTOR)?;
    let post_karma: BTreeMap<String, i64> = test.iter().map(|t| (t.id.clone(), t.post_karma)).collect();
    println!("thread level (post karma):");
    for r in correlate_threads(&threads, &post_karma, &options)? {
        println!("  {:<12} n={:<3} rho {}", r.community, r.n, r.cell());
    }

    let mut karma: BTreeMap<String, Vec<i64>> = BTreeMap::new();
    for t in &test {
        for c in &t.comments {
            karma.entry(user_doc_id(&t.community, &c.author)).or_default().push(c.karma);
        }
    }
    let k: BTreeMap<String, u64> = karma.iter().map(|(u, ks)| (u.clone(), k_index(ks))).collect();
    let users = normalize_scores(&score_all(&assemble_user_docs(&test, 3), &scorer, "tag_only"), DISTRACTOR)?;
    println!("user level (k-index):");
    for r in correlate_users(&users, &k, &options)? {
        println!("  {:<12} n={:<3} rho {}", r.community, r.n, r.cell());
    }

    let values: Vec<u64> = k.values().copied().collect();
    println!("k-index histogram over {} users:", values.len());
    for bin in kindex_histogram(&values, 2)? {
        println!("  {:>3}+ {}", bin.bin, "#".repeat(bin.count));
    }
    Ok(())
}
