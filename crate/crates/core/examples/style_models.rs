//! Trains hybrid word/POS trigram models for three synthetic communities
//! with both smoothing methods and prints the per-token perplexity of each
//! community's held-out comments under each model.
//!
//! ```bash
//! cargo run -p commlang --example style_models
//! ```

use commlang::stylelm::{count_ngrams, estimate, Smoothing, TrigramModel};
use commlang::synth::{generate_forum, topical_communities, ForumOptions, Lexicon, SentenceGenerator};
use commlang::text::{TagSet, Token};
use commlang::vocab::{balanced_subset, build_hybrid_vocab, count_frequencies, CommunityTokens, Vocabulary};

const NAMES: [&str; 3] = ["astronomy", "cooking", "cycling"];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tags = TagSet::default();
    let gen = SentenceGenerator::new(Lexicon::bundled());
    let forum = generate_forum(
        &gen,
        &topical_communities(&gen, &NAMES, 11)?,
        &ForumOptions {
            threads_per_community: 12,
            ..ForumOptions::default()
        },
    );

    // the first ten threads of each community train, the rest are held out
    let mut train: Vec<Vec<Vec<Token>>> = Vec::new();
    let mut held: Vec<Vec<Vec<Token>>> = Vec::new();
    for c in NAMES {
        let (mut tr, mut he) = (Vec::new(), Vec::new());
        for (i, t) in forum.threads_of(c).enumerate() {
            let seqs = t.annotated(&tags)?.comments.into_iter().map(|m| m.tokens);
            if i < 10 { tr.extend(seqs) } else { he.extend(seqs) }
        }
        train.push(tr);
        held.push(he);
    }

    let per_class: Vec<CommunityTokens> = NAMES
        .iter()
        .zip(&train)
        .map(|(c, seqs)| CommunityTokens {
            community: c.to_string(),
            sequences: seqs.iter().map(|s| s.iter().map(|t| t.surface.clone()).collect()).collect(),
        })
        .collect();
    let balanced = count_frequencies(balanced_subset(&per_class)?, None);
    let tables: Vec<_> = per_class
        .iter()
        .map(|c| count_frequencies(c.sequences.iter().flatten().map(String::as_str), None))
        .collect();
    let vocab = build_hybrid_vocab(&balanced, &tables, 40, 10, &tags);
    println!("hybrid vocabulary: {} words + {} tags", vocab.words().len(), tags.len());

    for smoothing in [Smoothing::ModifiedKn, Smoothing::WittenBell] {
        let models: Vec<TrigramModel> = train
            .iter()
            .map(|seqs| {
                let ids: Vec<Vec<u32>> = seqs.iter().map(|s| vocab.apply(s)).collect::<Result<_, _>>()?;
                estimate(&count_ngrams(&ids, vocab.len())?, vocab.symbols(), smoothing)
            })
            .collect::<Result<_, _>>()?;
        println!("\n{smoothing}: perplexity of held-out comments (rows) under each model (columns)");
        println!("{:>12} {}", "", NAMES.map(|n| format!("{n:>10}")).join(" "));
        for (name, seqs) in NAMES.iter().zip(&held) {
            let row: Vec<String> = models
                .iter()
                .map(|m| perplexity(m, &vocab, seqs).map(|p| format!("{p:>10.2}")))
                .collect::<Result<_, _>>()?;
            println!("{name:>12} {}", row.join(" "));
        }
        if smoothing == Smoothing::WittenBell {
            let mut arpa = Vec::new();
            models[0].write_arpa(&mut arpa, &["community=astronomy".to_string()])?;
            let text = String::from_utf8(arpa)?;
            println!("\nfirst lines of the astronomy model in ARPA format:");
            for line in text.lines().take(12) {
                println!("  {line}");
            }
        }
    }
    Ok(())
}

fn perplexity(model: &TrigramModel, vocab: &Vocabulary, seqs: &[Vec<Token>]) -> commlang::Result<f64> {
    let mut total = commlang::stylelm::StyleScore::default();
    for s in seqs {
        total += model.score(&vocab.apply(s)?)?;
    }
    Ok(total.perplexity())
}
