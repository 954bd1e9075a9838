//! Parses the fixture dumps, assembles threads and applies the size and
//! karma filters, printing the accounting at each step.
//!
//! ```bash
//! cargo run -p commlang --example ingest_dump
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use commlang::ingest::{assemble_threads, filter_corpus, open_dump, parse_comments, parse_posts, split_train_test};

fn main() -> commlang::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let posts = parse_posts(open_dump(&dir.join("posts.jsonl"))?)?;
    let comments = parse_comments(open_dump(&dir.join("comments.jsonl"))?)?;
    println!(
        "comments: {} lines, {} malformed, {} deleted bodies, {} kept",
        comments.stats.lines,
        comments.stats.malformed,
        comments.stats.deleted,
        comments.records.len()
    );
    println!("posts: {}", posts.records.len());

    let assembly = assemble_threads(posts.records, comments.records);
    println!("threads: {}, orphan comments: {}", assembly.threads.len(), assembly.orphans);

    let mut by_community: BTreeMap<String, Vec<_>> = BTreeMap::new();
    for t in filter_corpus(assembly.threads, 20, true) {
        by_community.entry(t.post.community.clone()).or_default().push(t);
    }
    for (community, threads) in by_community {
        let comments: usize = threads.iter().map(|t| t.comments.len()).sum();
        let (train, test) = split_train_test(threads, 0.25, 1)?;
        println!(
            "  {community:<12} {:>3} train / {:>2} test threads, {comments} positive-karma comments",
            train.len(),
            test.len()
        );
    }
    Ok(())
}
