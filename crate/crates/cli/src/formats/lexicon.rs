//! Name lexicon directories holding `male_names.txt` and
//! `female_names.txt`: UTF-8, one name per line, `#` comments.

use std::fs;
use std::path::Path;

use electorate_core::labeler::NameLexicon;

use super::FormatError;

pub const MALE_FILE: &str = "male_names.txt";
pub const FEMALE_FILE: &str = "female_names.txt";

fn names(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty())
}

/// Loads a lexicon, returning it with the ambiguous names that were left out.
pub fn load_dir(dir: &Path) -> Result<(NameLexicon, Vec<String>), FormatError> {
    let male = fs::read_to_string(dir.join(MALE_FILE))?;
    let female = fs::read_to_string(dir.join(FEMALE_FILE))?;
    Ok(from_texts(&male, &female))
}

pub fn from_texts(male: &str, female: &str) -> (NameLexicon, Vec<String>) {
    NameLexicon::from_lists(names(male), names(female))
}

/// The lexicon shipped in `data/lexicon/`, compiled into the binary.
pub fn builtin() -> NameLexicon {
    from_texts(
        include_str!("../../data/lexicon/male_names.txt"),
        include_str!("../../data/lexicon/female_names.txt"),
    )
    .0
}
