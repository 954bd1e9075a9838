//! Fits LDA on tf-idf weighted comments of a synthetic forum, prints the
//! top words of each topic and scores a held-out thread against each
//! community's k-means topic profile.
//!
//! ```bash
//! cargo run -p commlang --example topic_profiles
//! ```

use commlang::synth::{generate_forum, topical_communities, ForumOptions, GeneratedThread, Lexicon, SentenceGenerator};
use commlang::topiclm::{build_profile, build_tfidf, default_stopwords, infer_topics, topic_score, train_lda, LdaOptions};

const NAMES: [&str; 4] = ["astronomy", "cooking", "cycling", "gardening"];

fn words(t: &GeneratedThread) -> Vec<String> {
    t.comments.iter().flat_map(|c| c.tokens.iter().map(|(w, _)| w.clone())).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gen = SentenceGenerator::new(Lexicon::bundled());
    let forum = generate_forum(
        &gen,
        &topical_communities(&gen, &NAMES, 21)?,
        &ForumOptions {
            threads_per_community: 12,
            ..ForumOptions::default()
        },
    );

    // every comment of the first ten threads per community is a document
    let mut docs = Vec::new();
    for c in NAMES {
        for t in forum.threads_of(c).take(10) {
            for (i, m) in t.comments.iter().enumerate() {
                let tokens: Vec<String> = m.tokens.iter().map(|(w, _)| w.clone()).collect();
                docs.push((format!("{}/{i}", t.post.id), tokens));
            }
        }
    }
    let tfidf = build_tfidf(&docs, &default_stopwords())?;
    println!(
        "{} documents ({} stopword-only dropped), {} words",
        tfidf.docs.len(),
        tfidf.dropped,
        tfidf.table.len()
    );

    let options = LdaOptions {
        iterations: 60,
        ..LdaOptions::new(6, 3)
    };
    let fit = train_lda(&tfidf.docs, tfidf.table.len(), &tfidf.table.words, &options)?;
    println!("ELBO {:.1} -> {:.1}", fit.elbo[0], fit.elbo[fit.elbo.len() - 1]);
    for (k, top) in fit.model.top_words(6).iter().enumerate() {
        let ws: Vec<&str> = top.iter().map(|(w, _)| w.as_str()).collect();
        println!("  topic {k}: {}", ws.join(" "));
    }

    let profiles: Vec<_> = NAMES
        .iter()
        .map(|&c| {
            let vectors: Vec<Vec<f64>> = forum
                .threads_of(c)
                .take(10)
                .map(|t| infer_topics(&fit.model, &tfidf.table.weigh(t.post.id.clone(), &words(t))).theta)
                .collect();
            build_profile(c, &vectors, 5, 4)
        })
        .collect::<Result<_, _>>()?;

    for c in NAMES {
        let held = forum.threads_of(c).nth(10).expect("held-out thread");
        let theta = infer_topics(&fit.model, &tfidf.table.weigh(held.post.id.clone(), &words(held))).theta;
        let scores: Vec<String> = profiles
            .iter()
            .map(|p| topic_score(p, &theta).map(|s| format!("{}={s:.3}", p.community)))
            .collect::<Result<_, _>>()?;
        println!("held-out {c} thread: {}", scores.join("  "));
    }
    Ok(())
}
