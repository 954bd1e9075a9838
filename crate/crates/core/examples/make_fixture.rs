//! Regenerates the bundled fixture: a small synthetic forum in archive
//! JSON-lines format, a pre-tagged tagger corpus and a pipeline config.
//!
//! ```bash
//! cargo run -p commlang --example make_fixture -- crates/core/fixtures
//! ```

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use commlang::synth::{generate_forum, tagger_corpus, topical_communities, ForumOptions, Lexicon, SentenceGenerator};

const TARGETS: [&str; 4] = ["astronomy", "boardgames", "cooking", "cycling"];
const MEMBERS: [&str; 3] = ["gardening", "photography", "woodworking"];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    fs::create_dir_all(&out)?;

    let gen = SentenceGenerator::new(Lexicon::bundled());
    let names: Vec<&str> = TARGETS.iter().chain(&MEMBERS).copied().collect();
    let communities = topical_communities(&gen, &names, 2015)?;
    let options = ForumOptions {
        threads_per_community: 20,
        comments_per_thread: (20, 34),
        authors: 220,
        seed: 2015,
        ..ForumOptions::default()
    };
    let forum = generate_forum(&gen, &communities, &options);
    forum.write_jsonl(
        BufWriter::new(File::create(out.join("posts.jsonl"))?),
        BufWriter::new(File::create(out.join("comments.jsonl"))?),
    )?;

    let mut w = BufWriter::new(File::create(out.join("tagger_corpus.txt"))?);
    for sentence in tagger_corpus(&gen, 2500, 7) {
        let line: Vec<String> = sentence.iter().map(|(s, t)| format!("{s}_{t}")).collect();
        writeln!(w, "{}\n", line.join(" "))?;
    }
    w.flush()?;

    let config = serde_json::json!({
        "paths": {
            "posts": ["posts.jsonl"],
            "comments": ["comments.jsonl"],
            "tagger_corpus": "tagger_corpus.txt",
        },
        "communities": TARGETS,
        "distractor": { "name": "merged_others", "members": MEMBERS },
        "thresholds": { "min_thread_comments": 20, "test_fraction": 0.25, "min_user_comments": 1 },
        "vocab": { "hyb15k": 300, "n_general": 100, "n_per_community": 15 },
        "topic": { "k": [8, 16], "iterations": 60, "clusters": 10 },
        "report": {
            "multicommunity": { "min_comments": 20, "high_k": 8, "low_k": 2, "secondary_k": [5, 3] }
        }
    });
    fs::write(out.join("config.json"), serde_json::to_string_pretty(&config)? + "\n")?;

    let kept = forum
        .threads
        .iter()
        .filter(|t| t.comments.len() >= 20)
        .count();
    println!(
        "wrote {} threads ({kept} with 20+ comments) to {}",
        forum.threads.len(),
        out.display()
    );
    Ok(())
}
