//! Per-language letter tables: vowel/consonant partition, harmony classes,
//! casing rules and letter frequencies.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

const TURKISH_PROFILE: &str = include_str!("../data/profiles/turkish.profile");
const FINNISH_PROFILE: &str = include_str!("../data/profiles/finnish.profile");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Turkish,
    Finnish,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::Turkish => "turkish",
            Language::Finnish => "finnish",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "turkish" | "tr" => Ok(Language::Turkish),
            "finnish" | "fi" => Ok(Language::Finnish),
            other => Err(Error::Config(format!("unknown language {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Harmony {
    Front,
    Back,
    Neutral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LetterClass {
    Vowel(Harmony),
    Consonant,
}

impl LetterClass {
    pub fn is_vowel(self) -> bool {
        matches!(self, LetterClass::Vowel(_))
    }
}

/// Immutable once loaded; share freely across threads.
#[derive(Debug, Clone)]
pub struct LanguageProfile {
    pub language: Language,
    pub vowels: BTreeSet<char>,
    pub consonants: BTreeSet<char>,
    pub harmony: BTreeMap<char, Harmony>,
    pub rounded: BTreeSet<char>,
    /// Relative frequency within the letter's own class (vowels or consonants).
    pub frequency: BTreeMap<char, f64>,
    /// Uppercase letter to lowercase letter.
    pub casing: BTreeMap<char, char>,
}

impl LanguageProfile {
    pub fn bundled(language: Language) -> LanguageProfile {
        let text = match language {
            Language::Turkish => TURKISH_PROFILE,
            Language::Finnish => FINNISH_PROFILE,
        };
        Self::parse(text, language.as_str()).expect("bundled profile is valid")
    }

    pub fn turkish() -> LanguageProfile {
        Self::bundled(Language::Turkish)
    }

    pub fn finnish() -> LanguageProfile {
        Self::bundled(Language::Finnish)
    }

    pub fn load(path: &Path) -> Result<LanguageProfile> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses the `key = value` profile format. `origin` is only used in
    /// diagnostics.
    pub fn parse(text: &str, origin: &str) -> Result<LanguageProfile> {
        let bad = |detail: String| Error::Profile {
            path: origin.to_string(),
            detail,
        };

        let mut fields: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected key = value", lineno + 1)))?;
            fields.insert(key.trim().to_string(), value.nfc().collect::<String>().trim().to_string());
        }
        let field = |key: &str| -> Result<&str> {
            fields
                .get(key)
                .map(String::as_str)
                .ok_or_else(|| bad(format!("missing key {key:?}")))
        };
        let letters = |key: &str| -> Result<BTreeSet<char>> {
            let mut set = BTreeSet::new();
            for tok in field(key)?.split_whitespace() {
                let mut chars = tok.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => {
                        set.insert(c);
                    }
                    _ => return Err(bad(format!("{key}: {tok:?} is not a single letter"))),
                }
            }
            Ok(set)
        };

        let language: Language = field("language")?.parse()?;
        let vowels = letters("vowels")?;
        let consonants = letters("consonants")?;
        if let Some(c) = vowels.intersection(&consonants).next() {
            return Err(bad(format!("{c:?} is listed as both vowel and consonant")));
        }

        let mut harmony = BTreeMap::new();
        for (key, class) in [
            ("front", Harmony::Front),
            ("back", Harmony::Back),
            ("neutral", Harmony::Neutral),
        ] {
            for c in letters(key)? {
                if !vowels.contains(&c) {
                    return Err(bad(format!("harmony letter {c:?} is not a vowel")));
                }
                if harmony.insert(c, class).is_some() {
                    return Err(bad(format!("{c:?} has two harmony classes")));
                }
            }
        }
        if let Some(v) = vowels.iter().find(|v| !harmony.contains_key(v)) {
            return Err(bad(format!("vowel {v:?} has no harmony class")));
        }
        let rounded = letters("rounded")?;

        let mut casing = BTreeMap::new();
        for c in vowels.iter().chain(consonants.iter()) {
            let mut upper = c.to_uppercase();
            if let (Some(u), None) = (upper.next(), upper.next()) {
                if u != *c {
                    casing.insert(u, *c);
                }
            }
        }
        for pair in field("casing")?.split_whitespace() {
            let (u, l) = pair
                .split_once(':')
                .ok_or_else(|| bad(format!("casing pair {pair:?} must be U:l")))?;
            let (mut u, mut l) = (u.chars(), l.chars());
            match (u.next(), u.next(), l.next(), l.next()) {
                (Some(u), None, Some(l), None) => {
                    casing.insert(u, l);
                }
                _ => return Err(bad(format!("casing pair {pair:?} must be single letters"))),
            }
        }

        let mut raw_freq: BTreeMap<char, f64> = BTreeMap::new();
        for pair in field("freq")?.split_whitespace() {
            let (letter, value) = pair
                .split_once(':')
                .ok_or_else(|| bad(format!("frequency entry {pair:?} must be letter:value")))?;
            let mut chars = letter.chars();
            let letter = match (chars.next(), chars.next()) {
                (Some(c), None) => c,
                _ => return Err(bad(format!("frequency key {letter:?} is not a letter"))),
            };
            let value: f64 = value
                .parse()
                .map_err(|_| bad(format!("frequency {value:?} is not a number")))?;
            if !(value >= 0.0 && value.is_finite()) {
                return Err(bad(format!("frequency of {letter:?} must be nonnegative")));
            }
            raw_freq.insert(letter, value);
        }
        let mut frequency = BTreeMap::new();
        for class in [&vowels, &consonants] {
            let total: f64 = class.iter().map(|c| raw_freq.get(c).copied().unwrap_or(0.0)).sum();
            if total <= 0.0 {
                return Err(bad("a letter class has zero total frequency".into()));
            }
            for c in class {
                frequency.insert(*c, raw_freq.get(c).copied().unwrap_or(0.0) / total);
            }
        }
        if let Some(c) = raw_freq.keys().find(|c| !frequency.contains_key(c)) {
            return Err(bad(format!("frequency given for {c:?}, which is outside the alphabet")));
        }

        Ok(LanguageProfile {
            language,
            vowels,
            consonants,
            harmony,
            rounded,
            frequency,
            casing,
        })
    }

    pub fn in_alphabet(&self, letter: char) -> bool {
        self.vowels.contains(&letter) || self.consonants.contains(&letter)
    }

    pub fn alphabet(&self) -> impl Iterator<Item = char> + '_ {
        self.vowels.iter().chain(self.consonants.iter()).copied()
    }

    fn fold_char(&self, c: char) -> char {
        self.casing.get(&c).copied().unwrap_or(c)
    }

    pub fn classify(&self, letter: char) -> Result<LetterClass> {
        let letter = self.fold_char(letter);
        if let Some(h) = self.harmony.get(&letter) {
            Ok(LetterClass::Vowel(*h))
        } else if self.consonants.contains(&letter) {
            Ok(LetterClass::Consonant)
        } else {
            Err(Error::UnknownLetter {
                letter,
                language: self.language.to_string(),
            })
        }
    }

    fn classes(&self, word: &str) -> Result<Vec<LetterClass>> {
        word.chars().map(|c| self.classify(c)).collect()
    }

    pub fn has_adjacent_vowels(&self, word: &str) -> Result<bool> {
        let classes = self.classes(word)?;
        Ok(classes
            .windows(2)
            .any(|pair| pair[0].is_vowel() && pair[1].is_vowel()))
    }

    /// Character range from the final vowel through the end of the word.
    pub fn last_vowel_suffix_span(&self, word: &str) -> Result<Range<usize>> {
        let classes = self.classes(word)?;
        let last = classes
            .iter()
            .rposition(|c| c.is_vowel())
            .ok_or_else(|| Error::NoVowel(word.to_string()))?;
        Ok(last..classes.len())
    }

    /// NFC-normalizes, then lowercases with the profile's casing pairs.
    /// Characters without a pair are left alone.
    pub fn case_fold(&self, word: &str) -> String {
        word.nfc().map(|c| self.fold_char(c)).collect()
    }

    /// First letter outside the alphabet, if any.
    pub fn first_foreign_letter(&self, word: &str) -> Option<char> {
        word.chars().find(|c| !self.in_alphabet(*c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn classify_examples() {
        let tr = LanguageProfile::turkish();
        let fi = LanguageProfile::finnish();
        assert_eq!(tr.classify('a').unwrap(), LetterClass::Vowel(Harmony::Back));
        assert_eq!(tr.classify('ş').unwrap(), LetterClass::Consonant);
        assert_eq!(fi.classify('ä').unwrap(), LetterClass::Vowel(Harmony::Front));
        assert_eq!(fi.classify('e').unwrap(), LetterClass::Vowel(Harmony::Neutral));
        assert!(matches!(tr.classify('q'), Err(Error::UnknownLetter { letter: 'q', .. })));
        // uppercase input is folded first
        assert_eq!(tr.classify('I').unwrap(), LetterClass::Vowel(Harmony::Back));
    }

    #[test]
    fn bundled_tables_match_expected_classes() {
        let tr = LanguageProfile::turkish();
        let tr_vowels: BTreeSet<char> = "aeıioöuü".chars().collect();
        assert_eq!(tr.vowels, tr_vowels);
        let fi = LanguageProfile::finnish();
        let by = |h| fi.harmony.iter().filter(|(_, v)| **v == h).map(|(k, _)| *k).collect::<BTreeSet<_>>();
        assert_eq!(by(Harmony::Neutral), "ei".chars().collect());
        assert_eq!(by(Harmony::Front), "äöy".chars().collect());
        assert_eq!(by(Harmony::Back), "aou".chars().collect());
    }

    #[test]
    fn frequencies_normalize_per_class() {
        for p in [LanguageProfile::turkish(), LanguageProfile::finnish()] {
            let v: f64 = p.vowels.iter().map(|c| p.frequency[c]).sum();
            let c: f64 = p.consonants.iter().map(|c| p.frequency[c]).sum();
            assert!((v - 1.0).abs() < 1e-12 && (c - 1.0).abs() < 1e-12);
            assert!(p.frequency.values().all(|f| *f >= 0.0));
        }
    }

    #[test]
    fn adjacent_vowel_examples() {
        let tr = LanguageProfile::turkish();
        assert!(tr.has_adjacent_vowels("sınıflandırıılmalarnı").unwrap());
        assert!(!tr.has_adjacent_vowels("sohbetler").unwrap());
        // scan oracle: pairs of letter classes, computed independently of the method
        let word = "değeriplendir";
        let vowels: Vec<bool> = word.chars().map(|c| "aeıioöuü".contains(c)).collect();
        let oracle = (0..vowels.len() - 1).any(|i| vowels[i] && vowels[i + 1]);
        assert!(!oracle);
        assert_eq!(tr.has_adjacent_vowels(word).unwrap(), oracle);
        assert!(tr.has_adjacent_vowels("xa").is_err());
    }

    #[test]
    fn suffix_span_examples() {
        let tr = LanguageProfile::turkish();
        let chars = |w: &str, r: Range<usize>| w.chars().skip(r.start).take(r.len()).collect::<String>();
        assert_eq!(chars("sanat", tr.last_vowel_suffix_span("sanat").unwrap()), "at");
        assert_eq!(chars("sıra", tr.last_vowel_suffix_span("sıra").unwrap()), "a");
        assert_eq!(chars("kuş", tr.last_vowel_suffix_span("kuş").unwrap()), "uş");
        assert_eq!(tr.last_vowel_suffix_span("sanat").unwrap(), 3..5);
        assert!(matches!(tr.last_vowel_suffix_span("brr"), Err(Error::NoVowel(_))));
    }

    #[test]
    fn case_fold_examples() {
        let tr = LanguageProfile::turkish();
        let fi = LanguageProfile::finnish();
        assert_eq!(tr.case_fold("Sohbetler"), "sohbetler");
        assert_eq!(tr.case_fold("Istanbul"), "ıstanbul");
        assert_eq!(tr.case_fold("İzmir"), "izmir");
        assert_eq!(fi.case_fold("ÄITI"), "äiti");
        // non-alphabet characters pass through
        assert_eq!(tr.case_fold("Q-1"), "Q-1");
    }

    #[test]
    fn parse_rejects_overlapping_classes() {
        let text = "language = turkish\nvowels = a\nconsonants = a b\nfront =\nback = a\nneutral =\nrounded =\ncasing =\nfreq = a:1 b:1\n";
        assert!(matches!(LanguageProfile::parse(text, "t"), Err(Error::Profile { .. })));
    }

    fn tr_word() -> impl Strategy<Value = String> {
        let letters: Vec<char> = LanguageProfile::turkish().alphabet().collect();
        prop::collection::vec(prop::sample::select(letters), 0..16)
            .prop_map(|v| v.into_iter().collect())
    }

    proptest! {
        #[test]
        fn classify_partitions_alphabet(c in prop::sample::select(LanguageProfile::turkish().alphabet().collect::<Vec<_>>())) {
            let tr = LanguageProfile::turkish();
            let class = tr.classify(c).unwrap();
            prop_assert_eq!(class.is_vowel(), tr.vowels.contains(&c));
            prop_assert_eq!(!class.is_vowel(), tr.consonants.contains(&c));
        }

        #[test]
        fn adjacency_is_reversal_invariant(w in tr_word()) {
            let tr = LanguageProfile::turkish();
            let rev: String = w.chars().rev().collect();
            prop_assert_eq!(tr.has_adjacent_vowels(&w).unwrap(), tr.has_adjacent_vowels(&rev).unwrap());
        }

        #[test]
        fn case_fold_is_idempotent(w in "[a-zA-ZçğıöşüÇĞİIÖŞÜäÄ ]{0,16}") {
            for p in [LanguageProfile::turkish(), LanguageProfile::finnish()] {
                let once = p.case_fold(&w);
                prop_assert_eq!(p.case_fold(&once), once.clone());
            }
        }

        #[test]
        fn suffix_span_is_vowel_then_consonants(w in tr_word()) {
            let tr = LanguageProfile::turkish();
            if let Ok(span) = tr.last_vowel_suffix_span(&w) {
                let chars: Vec<char> = w.chars().collect();
                prop_assert_eq!(span.end, chars.len());
                prop_assert!(tr.classify(chars[span.start]).unwrap().is_vowel());
                for c in &chars[span.start + 1..] {
                    prop_assert!(!tr.classify(*c).unwrap().is_vowel());
                }
            }
        }
    }
}
