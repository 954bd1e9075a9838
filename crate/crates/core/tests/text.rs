use std::fs;
use std::path::Path;

use commlang::text::{read_pretagged, tokenize, train_tagger, write_pretagged, TagSet, TaggerModel, TaggerTrainOptions, Token};
use proptest::prelude::*;

const GOLDEN_SENTENCES: [&str; 5] = [
    "the cat sat",
    "Their oven takes some garlic, or we bake it!",
    "Is she going to simmer those recipes?",
    "I don't think the comet's tail was blurry...",
    "Check https://example.com for 2015 ideas.",
];

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn fixture_tagger() -> TaggerModel {
    let tags = TagSet::default();
    let text = fs::read_to_string(fixture("tagger_corpus.txt")).unwrap();
    let corpus: Vec<Vec<(String, String)>> = read_pretagged(text.as_bytes(), &tags)
        .unwrap()
        .into_iter()
        .map(|s| {
            s.into_iter()
                .map(|t| (t.surface, tags.name(t.tag.unwrap()).to_string()))
                .collect()
        })
        .collect();
    let options = TaggerTrainOptions { iterations: 5, seed: 2 };
    train_tagger(&corpus, None, &tags, &options).unwrap().0
}

#[test]
fn fixture_tagger_fits_its_training_data() {
    let tags = TagSet::default();
    let text = fs::read_to_string(fixture("tagger_corpus.txt")).unwrap();
    let gold = read_pretagged(text.as_bytes(), &tags).unwrap();
    let model = fixture_tagger();
    let (mut right, mut total) = (0usize, 0usize);
    for sentence in &gold {
        let bare: Vec<&str> = sentence.iter().map(|t| t.surface.as_str()).collect();
        for (want, got) in sentence.iter().zip(model.tag(&bare)) {
            total += 1;
            right += (want.tag == got.tag) as usize;
        }
    }
    let acc = right as f64 / total as f64;
    assert!(acc >= 0.95, "training accuracy {acc}");
}

fn render(model: &TaggerModel, sentence: &str) -> String {
    let tags = model.tagset();
    model
        .tag(&tokenize(sentence))
        .iter()
        .map(|t| format!("{}_{}", t.surface, tags.name(t.tag.unwrap())))
        .collect::<Vec<_>>()
        .join(" ")
}

#[test]
fn fixture_tagger_output_is_frozen() {
    let model = fixture_tagger();
    let tags = model.tagset();
    let got: Vec<&str> = model
        .tag(&tokenize("the cat sat"))
        .iter()
        .map(|t| tags.name(t.tag.unwrap()))
        .collect();
    assert_eq!(got, ["DT", "NN", "VBD"]);

    let rendered: String = GOLDEN_SENTENCES.iter().map(|s| render(&model, s) + "\n").collect();
    let path = fixture("golden/tagged.txt");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, &rendered).unwrap();
    }
    assert_eq!(rendered, fs::read_to_string(&path).unwrap());
}

#[test]
fn tagger_json_round_trip() {
    let model = fixture_tagger();
    let back = TaggerModel::from_json(&model.to_json().unwrap()).unwrap();
    for s in GOLDEN_SENTENCES {
        assert_eq!(render(&back, s), render(&model, s));
    }
}

#[test]
fn punctuation_tags_are_rule_based() {
    let tags = TagSet::default();
    for (s, want) in [(".", "."), ("!", "."), ("?!", "."), ("...", "."), (",", "PUNCT"), (":", "PUNCT"), ("(", "PUNCT")] {
        assert_eq!(tags.name(tags.punct_tag(s).unwrap()), want, "{s}");
    }
    assert!(tags.punct_tag("cat").is_none());
    let model = fixture_tagger();
    let tagged = model.tag(&tokenize("well , yes !"));
    assert_eq!(tags.name(tagged[1].tag.unwrap()), "PUNCT");
    assert_eq!(tags.name(tagged[3].tag.unwrap()), ".");
}

#[test]
fn tokenizer_examples() {
    assert_eq!(tokenize("Don't panic."), ["do", "n't", "panic", "."]);
    assert_eq!(tokenize("the cat's bowl"), ["the", "cat", "'s", "bowl"]);
    assert_eq!(tokenize("see (https://x.org/a)."), ["see", "(", "<url>", ")", "."]);
    assert!(tokenize("   ").is_empty());
}

proptest! {
    #[test]
    fn tokenize_is_a_fixed_point(raw in "[a-zA-Z0-9 ,.!?'()\"-]{0,60}") {
        let once = tokenize(&raw);
        let again = tokenize(&once.join(" "));
        prop_assert_eq!(again, once);
    }

    #[test]
    fn tokens_are_lowercase_and_nonempty(raw in "\\PC{0,40}") {
        for t in tokenize(&raw) {
            prop_assert!(!t.is_empty());
            prop_assert!(!t.chars().any(char::is_whitespace));
            prop_assert_eq!(t.to_lowercase(), t.clone());
        }
    }

    #[test]
    fn pretagged_round_trip(seqs in prop::collection::vec(prop::collection::vec(("[a-z]{1,6}", 0u8..38), 1..8), 0..5)) {
        let tags = TagSet::default();
        let seqs: Vec<Vec<Token>> = seqs
            .into_iter()
            .map(|s| s.into_iter().map(|(w, t)| Token::new(w, Some(commlang::text::Tag(t)))).collect())
            .collect();
        let mut buf = Vec::new();
        write_pretagged(&mut buf, &seqs, &tags).unwrap();
        prop_assert_eq!(read_pretagged(buf.as_slice(), &tags).unwrap(), seqs);
    }
}
