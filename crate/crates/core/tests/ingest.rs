use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use commlang::ingest::{
    assemble_threads, build_merged_distractor, filter_corpus, open_dump, parse_comments, parse_posts, read_threads,
    split_train_test, test_count, write_threads, CommentRecord, CommunityCorpus, PostRecord, ThreadRecord,
};
use flate2::write::GzEncoder;
use proptest::prelude::*;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn fixture_records() -> (Vec<PostRecord>, Vec<CommentRecord>, usize, usize) {
    let posts = parse_posts(open_dump(&fixture("posts.jsonl")).unwrap()).unwrap();
    let comments = parse_comments(open_dump(&fixture("comments.jsonl")).unwrap()).unwrap();
    (posts.records, comments.records, comments.stats.malformed, comments.stats.deleted)
}

#[test]
fn fixture_parses_with_expected_accounting() {
    let (posts, comments, malformed, deleted) = fixture_records();
    let raw_lines = fs::read_to_string(fixture("comments.jsonl"))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .count();
    assert_eq!(malformed, 2);
    assert!(deleted > 0);
    assert_eq!(comments.len() + malformed + deleted, raw_lines);
    assert!(comments.iter().all(|c| !c.link_id.starts_with("t3_")));
    assert!(comments.iter().all(|c| c.body != "[deleted]" && c.body != "[removed]"));
    assert!(!posts.is_empty());
}

#[test]
fn assembly_conserves_comments() {
    let (posts, comments, _, _) = fixture_records();
    let n_comments = comments.len();
    let n_posts = posts.len();
    let assembly = assemble_threads(posts, comments);
    assert_eq!(assembly.threads.len(), n_posts);
    let placed: usize = assembly.threads.iter().map(|t| t.comments.len()).sum();
    assert_eq!(placed + assembly.orphans, n_comments);
    assert_eq!(assembly.orphans, 3);
    for t in &assembly.threads {
        assert_eq!(t.assembled_comments, t.comments.len());
        assert!(t.comments.iter().all(|c| c.link_id == t.post.id));
        assert!(t
            .comments
            .windows(2)
            .all(|w| (w[0].created_utc, &w[0].id) <= (w[1].created_utc, &w[1].id)));
    }
    assert!(assembly.threads.windows(2).all(|w| w[0].post.id < w[1].post.id));
}

#[test]
fn filtering_keeps_eligibility_and_drops_nonpositive_karma() {
    let (posts, comments, _, _) = fixture_records();
    let threads = assemble_threads(posts, comments).threads;
    let eligible: BTreeSet<String> = threads
        .iter()
        .filter(|t| t.assembled_comments >= 30)
        .map(|t| t.post.id.clone())
        .collect();
    let kept = filter_corpus(threads.clone(), 30, true);
    let kept_ids: BTreeSet<String> = kept.iter().map(|t| t.post.id.clone()).collect();
    assert_eq!(kept_ids, eligible);
    for t in &kept {
        assert!(t.comments.iter().all(|c| c.karma > 0));
        let original = threads.iter().find(|o| o.post.id == t.post.id).unwrap();
        let positive = original.comments.iter().filter(|c| c.karma > 0).count();
        assert_eq!(t.comments.len(), positive);
        assert_eq!(t.assembled_comments, original.assembled_comments);
    }
    // filtering twice changes nothing
    assert_eq!(filter_corpus(kept.clone(), 30, true), kept);
}

#[test]
fn thread_files_round_trip() {
    let (posts, comments, _, _) = fixture_records();
    let threads = assemble_threads(posts, comments).threads;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("threads.jsonl");
    write_threads(&path, &threads).unwrap();
    assert_eq!(read_threads(&path).unwrap(), threads);
}

#[test]
fn gzip_dumps_are_read_transparently() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("comments.jsonl.gz");
    let mut enc = GzEncoder::new(fs::File::create(&path).unwrap(), flate2::Compression::default());
    enc.write_all(&fs::read(fixture("comments.jsonl")).unwrap()).unwrap();
    enc.finish().unwrap();
    let plain = parse_comments(open_dump(&fixture("comments.jsonl")).unwrap()).unwrap();
    let gz = parse_comments(open_dump(&path).unwrap()).unwrap();
    assert_eq!(plain.records, gz.records);
    assert_eq!(plain.stats, gz.stats);
}

fn toy_threads(ids: &[u16]) -> Vec<ThreadRecord> {
    ids.iter()
        .map(|i| ThreadRecord {
            post: PostRecord {
                id: format!("p{i:05}"),
                community: "c".into(),
                author: "a".into(),
                title: "t".into(),
                body: String::new(),
                karma: *i as i64,
                created_utc: 0,
            },
            comments: Vec::new(),
            assembled_comments: 0,
        })
        .collect()
}

#[test]
fn distractor_pools_members_and_rejects_duplicates() {
    let a = CommunityCorpus {
        community: "a".into(),
        train_threads: toy_threads(&[3, 1]),
        test_threads: toy_threads(&[7]),
    };
    let b = CommunityCorpus {
        community: "b".into(),
        train_threads: toy_threads(&[2]),
        test_threads: toy_threads(&[5, 4]),
    };
    let merged = build_merged_distractor(&[a.clone(), b], "merged_others").unwrap();
    let ids = |ts: &[ThreadRecord]| ts.iter().map(|t| t.post.id.clone()).collect::<Vec<_>>();
    assert_eq!(ids(&merged.train_threads), ["p00001", "p00002", "p00003"]);
    assert_eq!(ids(&merged.test_threads), ["p00004", "p00005", "p00007"]);
    assert!(build_merged_distractor(&[a.clone(), a], "m").is_err());
}

proptest! {
    #[test]
    fn split_is_a_seeded_partition(ids in prop::collection::btree_set(0u16..5000, 0..80), frac in 0.05f64..0.95, seed in 0u64..1000) {
        let threads = toy_threads(&ids.iter().copied().collect::<Vec<_>>());
        let (train, test) = split_train_test(threads.clone(), frac, seed).unwrap();
        prop_assert_eq!(test.len(), test_count(threads.len(), frac));
        let mut all: Vec<String> = train.iter().chain(&test).map(|t| t.post.id.clone()).collect();
        all.sort();
        let expected: Vec<String> = threads.iter().map(|t| t.post.id.clone()).collect();
        prop_assert_eq!(all, expected);
        // input order does not matter, the seed does
        let mut reversed = threads.clone();
        reversed.reverse();
        prop_assert_eq!(split_train_test(reversed, frac, seed).unwrap(), (train, test));
    }
}

#[test]
fn split_rejects_bad_fractions() {
    assert!(split_train_test(toy_threads(&[1, 2]), 0.0, 1).is_err());
    assert!(split_train_test(toy_threads(&[1, 2]), 1.0, 1).is_err());
    assert_eq!(test_count(10, 0.2), 2);
    assert_eq!(test_count(11, 0.2), 3);
}
