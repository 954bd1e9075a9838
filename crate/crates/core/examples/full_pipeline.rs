//! Runs every pipeline stage on the bundled fixture in a scratch workspace
//! and prints the accuracy summary. The same run is available as
//! `commlang --config crates/core/fixtures/config.json --workspace <dir> all`.
//!
//! ```bash
//! cargo run --release -p commlang --example full_pipeline
//! ```

use std::path::Path;

use commlang::pipeline::{run, PipelineConfig, Stage};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = PipelineConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/config.json"))?;
    let workspace = std::env::temp_dir().join("commlang-full-pipeline");
    config.paths.workspace = Some(workspace.clone());
    for outcome in run(Stage::All, &config)? {
        let summary = outcome.summary.to_string();
        let short: String = summary.chars().take(110).collect();
        println!("{:<13} {short}{}", outcome.stage.to_string(), if summary.len() > 110 { " ..." } else { "" });
    }
    let reports = workspace.join("reports");
    println!("\n{}", std::fs::read_to_string(reports.join("accuracy_summary.csv"))?);
    println!("{}", std::fs::read_to_string(reports.join("correlation_users.csv"))?);
    println!("reports in {}", reports.display());
    Ok(())
}
