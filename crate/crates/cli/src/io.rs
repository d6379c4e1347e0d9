use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::CliError;

/// `-` means stdin.
pub fn open_input(path: &str) -> Result<Box<dyn BufRead>, CliError> {
    if path == "-" {
        return Ok(Box::new(BufReader::new(io::stdin().lock())));
    }
    let file = File::open(path).map_err(|e| CliError::Data(format!("{path}: {e}")))?;
    Ok(Box::new(BufReader::new(file)))
}

/// `-` means stdout.
pub fn open_output(path: &str) -> Result<Box<dyn Write>, CliError> {
    if path == "-" {
        return Ok(Box::new(BufWriter::new(io::stdout().lock())));
    }
    let file = File::create(path).map_err(|e| CliError::Data(format!("{path}: {e}")))?;
    Ok(Box::new(BufWriter::new(file)))
}

pub fn corpus_name(path: &str) -> String {
    if path == "-" {
        return "stdin".to_string();
    }
    Path::new(path).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "corpus".to_string())
}
