//! Rewrites the bundled fixture files.
//!
//! Usage: `build-fixtures [DIR]` (defaults to `fixtures`).

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use praisetag_core::dataset::{save_jsonl, write_predictions};
use praisetag_fixtures::{praise_corpus, tag_count_corpus, four_cases_gold, four_cases_predictions, FOUR_CASES_PRED};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".to_string()));
    std::fs::create_dir_all(&dir)?;
    for corpus in [praise_corpus(), tag_count_corpus(), four_cases_gold()] {
        let path = dir.join(format!("{}.jsonl", corpus.name()));
        save_jsonl(&corpus, &path)?;
        println!("wrote {} ({} responses)", path.display(), corpus.len());
    }
    let path = dir.join(format!("{FOUR_CASES_PRED}.jsonl"));
    write_predictions(&four_cases_predictions(), BufWriter::new(File::create(&path)?))?;
    println!("wrote {}", path.display());
    Ok(())
}
