use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use super::embeddings::read_input;
use super::is_valid_language_code;
use crate::error::{Error, Result};

/// One transcribed word form, one codepoint per segment.
pub type Segments = Vec<char>;

/// The 40-item core vocabulary, numbered by position in the 100-item
/// Swadesh list.
pub const ASJP_MEANINGS: [u32; 40] = [
    1, 2, 3, 11, 12, 18, 19, 21, 22, 23, 25, 28, 30, 31, 34, 39, 40, 41, 43, 44, 47, 48, 51, 53,
    54, 57, 58, 61, 66, 72, 74, 75, 77, 82, 85, 86, 92, 95, 96, 100,
];

const MODIFIERS: [char; 5] = ['~', '$', '*', '"', ' '];

/// Removes modifier codepoints and spaces; every remaining codepoint is a segment.
pub fn strip_modifiers(transcription: &str) -> Segments {
    transcription.chars().filter(|c| !MODIFIERS.contains(c) && !c.is_whitespace()).collect()
}

/// Word forms per language and meaning; synonyms kept in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WordList {
    entries: BTreeMap<String, BTreeMap<u32, Vec<Segments>>>,
}

impl WordList {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one synonym. Empty forms are ignored.
    pub fn push(&mut self, iso: &str, meaning: u32, form: Segments) {
        if form.is_empty() {
            return;
        }
        self.entries
            .entry(iso.to_string())
            .or_default()
            .entry(meaning)
            .or_default()
            .push(form);
    }

    pub fn language(&self, iso: &str) -> Option<&BTreeMap<u32, Vec<Segments>>> {
        self.entries.get(iso)
    }

    pub fn contains(&self, iso: &str) -> bool {
        self.entries.contains_key(iso)
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn write_tsv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "iso\tmeaning_id\ttranscription")?;
        for (iso, meanings) in &self.entries {
            for (m, forms) in meanings {
                for f in forms {
                    writeln!(out, "{iso}\t{m}\t{}", f.iter().collect::<String>())?;
                }
            }
        }
        Ok(())
    }
}

pub fn load_wordlists(path: &Path) -> Result<WordList> {
    load_wordlists_with(path, &ASJP_MEANINGS)
}

pub fn load_wordlists_with(path: &Path, inventory: &[u32]) -> Result<WordList> {
    let bytes = read_input(path)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| Error::MalformedRecord { line: 0, msg: e.to_string() })?;
    parse_wordlists(text, inventory)
}

/// Parses `iso<TAB>meaning_id<TAB>transcription` rows. A leading header
/// row naming the columns is skipped.
pub fn parse_wordlists(text: &str, inventory: &[u32]) -> Result<WordList> {
    let allowed: BTreeSet<u32> = inventory.iter().copied().collect();
    let mut list = WordList::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if k == 0 && fields.get(1) == Some(&"meaning_id") {
            continue;
        }
        let [iso, meaning, transcription] = fields[..] else {
            return Err(Error::MalformedRecord { line, msg: format!("expected 3 columns, got {}", fields.len()) });
        };
        if !is_valid_language_code(iso) {
            return Err(Error::InvalidLanguage(iso.to_string()));
        }
        let meaning: u32 = meaning.trim().parse().map_err(|_| Error::MalformedRecord {
            line,
            msg: format!("meaning id {meaning:?} is not an integer"),
        })?;
        if !allowed.contains(&meaning) {
            return Err(Error::UnknownMeaning(meaning));
        }
        let segments = strip_modifiers(transcription);
        if segments.is_empty() {
            return Err(Error::EmptyTranscription(line));
        }
        list.push(iso, meaning, segments);
    }
    Ok(list)
}
