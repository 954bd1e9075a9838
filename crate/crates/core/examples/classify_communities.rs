//! Classifies held-out synthetic threads and user documents with hybrid
//! style models, and compares against the random baseline.
//!
//! ```bash
//! cargo run -p commlang --example classify_communities
//! ```

use std::collections::BTreeMap;

use commlang::classify::{
    assemble_thread_doc, assemble_user_docs, classify, evaluate, random_predictions, score_all, truths,
    AnnotatedThread, StyleScorer,
};
use commlang::stylelm::{count_ngrams, estimate, Smoothing};
use commlang::synth::{generate_forum, topical_communities, ForumOptions, Lexicon, SentenceGenerator};
use commlang::text::TagSet;
use commlang::vocab::{balanced_subset, build_hybrid_vocab, count_frequencies, CommunityTokens};

const NAMES: [&str; 4] = ["boardgames", "cooking", "photography", "woodworking"];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tags = TagSet::default();
    let gen = SentenceGenerator::new(Lexicon::bundled());
    let forum = generate_forum(
        &gen,
        &topical_communities(&gen, &NAMES, 31)?,
        &ForumOptions {
            threads_per_community: 16,
            ..ForumOptions::default()
        },
    );
    let mut train: BTreeMap<&str, Vec<AnnotatedThread>> = BTreeMap::new();
    let mut test: Vec<AnnotatedThread> = Vec::new();
    for c in NAMES {
        for (i, t) in forum.threads_of(c).enumerate() {
            let a = t.annotated(&tags)?;
            if i % 4 == 3 { test.push(a) } else { train.entry(c).or_default().push(a) }
        }
    }

    let seqs = |threads: &[AnnotatedThread]| -> Vec<Vec<commlang::text::Token>> {
        threads
            .iter()
            .flat_map(|t| std::iter::once(t.post.clone()).chain(t.comments.iter().map(|c| c.tokens.clone())))
            .filter(|s| !s.is_empty())
            .collect()
    };
    let per_class: Vec<CommunityTokens> = train
        .iter()
        .map(|(c, threads)| CommunityTokens {
            community: c.to_string(),
            sequences: seqs(threads)
                .iter()
                .map(|s| s.iter().map(|t| t.surface.clone()).collect())
                .collect(),
        })
        .collect();
    let balanced = count_frequencies(balanced_subset(&per_class)?, None);
    let tables: Vec<_> = per_class
        .iter()
        .map(|c| count_frequencies(c.sequences.iter().flatten().map(String::as_str), None))
        .collect();
    let vocab = build_hybrid_vocab(&balanced, &tables, 60, 12, &tags);

    let mut models = Vec::new();
    for (c, threads) in &train {
        let ids: Vec<Vec<u32>> = seqs(threads).iter().map(|s| vocab.apply(s)).collect::<Result<_, _>>()?;
        models.push((c.to_string(), estimate(&count_ngrams(&ids, vocab.len())?, vocab.symbols(), Smoothing::WittenBell)?));
    }
    let scorer = StyleScorer {
        vocab: &vocab,
        models: models.iter().map(|(c, m)| (c.clone(), m)).collect(),
        per_token: false,
    };
    let classes: Vec<String> = NAMES.iter().map(|s| s.to_string()).collect();

    let thread_docs = test.iter().map(assemble_thread_doc).collect::<Result<Vec<_>, _>>()?;
    let user_docs = assemble_user_docs(&test, 1);
    for (level, docs) in [("thread", thread_docs), ("user", user_docs)] {
        let table = score_all(&docs, &scorer, "hyb-500.30");
        let report = evaluate(&classify(&table), &truths(&table), &classes)?;
        let ids: Vec<String> = table.rows.iter().map(|r| r.doc_id.clone()).collect();
        let chance = evaluate(&random_predictions(&ids, &classes, 5), &truths(&table), &classes)?;
        println!(
            "\n{level} level: {} documents, style accuracy {:.3}, random {:.3}",
            report.evaluated(),
            report.average_accuracy,
            chance.average_accuracy
        );
        let mut csv = Vec::new();
        report.write_confusion_csv(&mut csv)?;
        print!("{}", String::from_utf8(csv)?);
    }
    Ok(())
}
