//! Trains the perceptron tagger on the fixture's pre-tagged corpus and tags
//! a few sentences.
//!
//! ```bash
//! cargo run -p commlang --example tokenize_and_tag -- "Any text you like."
//! ```

use std::fs;
use std::path::Path;

use commlang::text::{read_pretagged, tokenize, train_tagger, Annotator, TagSet, TaggerTrainOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tags = TagSet::default();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/tagger_corpus.txt");
    let text = fs::read_to_string(&path)?;
    let corpus: Vec<Vec<(String, String)>> = read_pretagged(text.as_bytes(), &tags)?
        .into_iter()
        .map(|s| {
            s.into_iter()
                .map(|t| (t.surface, tags.name(t.tag.expect("pre-tagged")).to_string()))
                .collect()
        })
        .collect();
    let (held_out, train) = corpus.split_at(corpus.len() / 10);
    let (model, report) = train_tagger(train, Some(held_out), &tags, &TaggerTrainOptions::default())?;
    println!(
        "trained on {} tokens: train accuracy {:.4}, held-out accuracy {:.4}",
        report.tokens,
        report.train_accuracy,
        report.dev_accuracy.unwrap_or(f64::NAN)
    );

    let mut inputs: Vec<String> = std::env::args().skip(1).collect();
    if inputs.is_empty() {
        inputs = vec![
            "the cat sat".into(),
            "I don't think the comet's tail was blurry...".into(),
            "Check https://example.com for more ideas!".into(),
        ];
    }
    let annotator = Annotator::new(Some(model));
    for s in &inputs {
        println!("\n{s}\n  tokens: {:?}", tokenize(s));
        let tagged: Vec<String> = annotator
            .annotate(s)
            .iter()
            .map(|t| format!("{}/{}", t.surface, tags.name(t.tag.expect("tagged"))))
            .collect();
        println!("  tagged: {}", tagged.join(" "));
    }
    Ok(())
}
