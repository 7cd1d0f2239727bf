//! Stems a word list from stdin to stdout, one word per line, deduplicated
//! and sorted. Useful for building noun-lexicon files, which are matched
//! against already-stemmed tokens:
//!
//! ```text
//! cargo run -p archminer-core --example stem_wordlist < raw.txt > stemmed.txt
//! ```
//!
//! Blank lines and `#` comments are skipped.

use std::collections::BTreeSet;
use std::io::{self, BufRead, Write};

use archminer_core::preprocess::porter_stem;

fn main() -> io::Result<()> {
    let stdin = io::stdin();
    let mut stems = BTreeSet::new();
    for line in stdin.lock().lines() {
        let line = line?;
        let word = line.trim();
        if word.is_empty() || word.starts_with('#') {
            continue;
        }
        stems.insert(porter_stem(&word.to_lowercase()));
    }
    let mut stdout = io::stdout().lock();
    for stem in stems {
        writeln!(stdout, "{stem}")?;
    }
    Ok(())
}
