//! Weak gender labels from display names and 1:1 class balancing.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::gender::Gender;
use crate::rng;

/// Case-folds, strips diacritics and drops every non-letter.
pub fn normalize_name(token: &str) -> String {
    token
        .nfd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .filter(|c| c.is_alphabetic())
        .collect()
}

/// Disjoint sets of normalized male and female given names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NameLexicon {
    male: BTreeSet<String>,
    female: BTreeSet<String>,
}

impl NameLexicon {
    /// Builds a lexicon from raw name lists. Names that normalize to an entry
    /// in both lists are ambiguous: they are left out and returned.
    pub fn from_lists<'a, M, F>(male: M, female: F) -> (Self, Vec<String>)
    where
        M: IntoIterator<Item = &'a str>,
        F: IntoIterator<Item = &'a str>,
    {
        let norm = |names: M| -> BTreeSet<String> {
            names.into_iter().map(normalize_name).filter(|n| !n.is_empty()).collect()
        };
        let mut male_set = norm(male);
        let mut female_set: BTreeSet<String> =
            female.into_iter().map(normalize_name).filter(|n| !n.is_empty()).collect();
        let ambiguous: Vec<String> = male_set.intersection(&female_set).cloned().collect();
        for name in &ambiguous {
            male_set.remove(name);
            female_set.remove(name);
        }
        (NameLexicon { male: male_set, female: female_set }, ambiguous)
    }

    pub fn lookup(&self, normalized: &str) -> Option<Gender> {
        if self.male.contains(normalized) {
            Some(Gender::Male)
        } else if self.female.contains(normalized) {
            Some(Gender::Female)
        } else {
            None
        }
    }

    pub fn male_len(&self) -> usize {
        self.male.len()
    }

    pub fn female_len(&self) -> usize {
        self.female.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeakLabel {
    Known(Gender),
    Unknown,
}

impl WeakLabel {
    pub fn gender(self) -> Option<Gender> {
        match self {
            WeakLabel::Known(g) => Some(g),
            WeakLabel::Unknown => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            WeakLabel::Known(g) => g.as_str(),
            WeakLabel::Unknown => "unknown",
        }
    }
}

/// Labels a display name by its first whitespace-delimited token.
pub fn label(display_name: &str, lexicon: &NameLexicon) -> WeakLabel {
    display_name
        .split_whitespace()
        .next()
        .map(normalize_name)
        .and_then(|token| lexicon.lookup(&token))
        .map_or(WeakLabel::Unknown, WeakLabel::Known)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot balance: no {0} examples")]
pub struct EmptyClass(pub Gender);

/// Downsamples the majority class so both classes have
/// `min(n_male, n_female)` examples. Unknown labels are dropped. Selected
/// examples keep their input order. Deterministic per seed.
pub fn balance<T>(labeled: Vec<(T, WeakLabel)>, seed: u64) -> Result<Vec<(T, Gender)>, EmptyClass> {
    let known: Vec<(T, Gender)> =
        labeled.into_iter().filter_map(|(item, l)| l.gender().map(|g| (item, g))).collect();
    let count = |g| known.iter().filter(|(_, x)| *x == g).count();
    let (n_male, n_female) = (count(Gender::Male), count(Gender::Female));
    if n_male == 0 {
        return Err(EmptyClass(Gender::Male));
    }
    if n_female == 0 {
        return Err(EmptyClass(Gender::Female));
    }
    let keep = n_male.min(n_female);
    let majority = if n_male > n_female { Gender::Male } else { Gender::Female };

    let mut majority_positions: Vec<usize> =
        known.iter().enumerate().filter(|(_, (_, g))| *g == majority).map(|(i, _)| i).collect();
    let mut stream = rng::stream(seed, &[0xBA1A]);
    // Partial Fisher-Yates: the first `keep` slots become a uniform sample.
    for i in 0..keep {
        let j = i + rng::below(&mut stream, (majority_positions.len() - i) as u64) as usize;
        majority_positions.swap(i, j);
    }
    let mut selected = alloc::vec![false; known.len()];
    for &p in &majority_positions[..keep] {
        selected[p] = true;
    }
    Ok(known
        .into_iter()
        .enumerate()
        .filter(|(i, (_, g))| *g != majority || selected[*i])
        .map(|(_, x)| x)
        .collect())
}
