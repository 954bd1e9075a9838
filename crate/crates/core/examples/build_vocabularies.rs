//! Builds the four vocabularies from a synthetic forum and shows how one
//! comment looks in each symbol space.
//!
//! ```bash
//! cargo run -p commlang --example build_vocabularies
//! ```

use commlang::synth::{generate_forum, topical_communities, ForumOptions, Lexicon, SentenceGenerator};
use commlang::text::TagSet;
use commlang::vocab::{
    balanced_subset, build_hyb15k_vocab, build_hybrid_vocab, build_word_only_vocab, count_frequencies,
    default_word_only_top_k, CommunityTokens, Vocabulary,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tags = TagSet::default();
    let gen = SentenceGenerator::new(Lexicon::bundled());
    let names = ["astronomy", "cooking", "cycling"];
    let forum = generate_forum(
        &gen,
        &topical_communities(&gen, &names, 3)?,
        &ForumOptions {
            threads_per_community: 8,
            ..ForumOptions::default()
        },
    );

    let per_class: Vec<CommunityTokens> = names
        .iter()
        .map(|&c| CommunityTokens {
            community: c.to_string(),
            sequences: forum
                .threads_of(c)
                .flat_map(|t| &t.comments)
                .map(|m| m.tokens.iter().map(|(w, _)| w.clone()).collect())
                .collect(),
        })
        .collect();
    let all = count_frequencies(per_class.iter().flat_map(|c| c.sequences.iter().flatten().map(String::as_str)), None);
    let balanced = count_frequencies(balanced_subset(&per_class)?, None);
    let tables: Vec<_> = per_class
        .iter()
        .map(|c| count_frequencies(c.sequences.iter().flatten().map(String::as_str), Some(&c.community)))
        .collect();

    let vocabs = [
        ("word_only", build_word_only_vocab(&all, default_word_only_top_k(&all))?),
        ("hyb-15k", build_hyb15k_vocab(&all, 150, &tags)),
        ("hyb-500.30", build_hybrid_vocab(&balanced, &tables, 40, 10, &tags)),
        ("tag_only", Vocabulary::tag_only(tags.clone())),
    ];
    println!("{} training tokens, {} distinct words", all.total_tokens, all.len());

    let sample = forum.threads_of("cooking").next().expect("a cooking thread").annotated(&tags)?;
    let tokens = &sample.comments[0].tokens;
    let surface: Vec<&str> = tokens.iter().map(|t| t.surface.as_str()).collect();
    println!("\ncomment: {}", surface.join(" "));
    for (id, v) in &vocabs {
        println!("\n{id}: {} words, {} symbols", v.words().len(), v.len());
        println!("  {}", v.apply_symbols(tokens)?.join(" "));
    }
    Ok(())
}
