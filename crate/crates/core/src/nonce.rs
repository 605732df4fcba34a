//! Nonce ("wug") roots for the out-of-distribution suites.
//!
//! Turkish keeps the final vowel and any consonants after it, since suffix
//! allomorphy is decided there, and resamples every earlier letter within its
//! class (vowels also keep front/back). Finnish resamples every letter, with
//! vowels restricted to the original vowel's harmony class plus the neutral
//! vowels.

use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang_profile::{Harmony, Language, LanguageProfile, LetterClass};
use crate::seed::{self, Rng};

pub const RETRY_LIMIT: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonceMapping {
    pub original_root: String,
    pub nonce_root: String,
    pub language: Language,
    pub seed: u64,
    pub attempts: u32,
    /// Length of the random prefix added when the root had nothing to replace.
    pub prefix_len: usize,
}

/// A frequency-weighted sampler over a fixed set of letters.
struct LetterPool {
    letters: Vec<char>,
    dist: WeightedIndex<f64>,
}

impl LetterPool {
    fn new(profile: &LanguageProfile, letters: impl IntoIterator<Item = char>) -> LetterPool {
        let letters: Vec<char> = letters.into_iter().collect();
        let weights: Vec<f64> = letters
            .iter()
            .map(|c| profile.frequency.get(c).copied().unwrap_or(0.0))
            .collect();
        let dist = WeightedIndex::new(&weights).expect("letter pool has positive total weight");
        LetterPool { letters, dist }
    }

    fn sample(&self, rng: &mut Rng) -> char {
        self.letters[self.dist.sample(rng)]
    }
}

struct Pools {
    consonants: LetterPool,
    front: LetterPool,
    back: LetterPool,
    neutral: Option<LetterPool>,
}

impl Pools {
    fn new(profile: &LanguageProfile) -> Pools {
        let with = |pred: &dyn Fn(Harmony) -> bool| {
            profile
                .harmony
                .iter()
                .filter(|(_, h)| pred(**h))
                .map(|(c, _)| *c)
                .collect::<Vec<_>>()
        };
        let neutral = with(&|h| h == Harmony::Neutral);
        // Turkish has no neutral vowels, so these reduce to the plain classes.
        let front = with(&|h| h != Harmony::Back);
        let back = with(&|h| h != Harmony::Front);
        Pools {
            consonants: LetterPool::new(profile, profile.consonants.iter().copied()),
            front: LetterPool::new(profile, front),
            back: LetterPool::new(profile, back),
            neutral: (!neutral.is_empty()).then(|| LetterPool::new(profile, neutral)),
        }
    }

    fn vowel(&self, class: Harmony) -> &LetterPool {
        match class {
            Harmony::Front => &self.front,
            Harmony::Back => &self.back,
            Harmony::Neutral => self.neutral.as_ref().unwrap_or(&self.front),
        }
    }
}

fn validate_root(root: &str, profile: &LanguageProfile) -> Result<Vec<LetterClass>> {
    if root.is_empty() {
        return Err(Error::NoVowel(root.to_string()));
    }
    let classes = root
        .chars()
        .map(|c| profile.classify(c))
        .collect::<Result<Vec<_>>>()?;
    if !classes.iter().any(|c| c.is_vowel()) {
        return Err(Error::NoVowel(root.to_string()));
    }
    Ok(classes)
}

fn accept(candidate: &str, root: &str, lexicon: &HashSet<String>) -> bool {
    candidate != root && !lexicon.contains(candidate)
}

pub fn nonce_turkish(
    root: &str,
    profile: &LanguageProfile,
    lexicon: &HashSet<String>,
    rng: &mut Rng,
    seed: u64,
) -> Result<NonceMapping> {
    let classes = validate_root(root, profile)?;
    let span = profile.last_vowel_suffix_span(root)?;
    let chars: Vec<char> = root.chars().collect();
    let pools = Pools::new(profile);

    // Nothing before the frozen span: prepend a CVC prefix instead. Its vowel
    // follows the backness of the root's first vowel.
    let prefix_len = if span.start == 0 { 3 } else { 0 };
    let prefix_class = match classes[0] {
        LetterClass::Vowel(h) => h,
        LetterClass::Consonant => Harmony::Back,
    };

    for attempt in 1..=RETRY_LIMIT {
        let mut out = String::with_capacity(root.len() + 6);
        if prefix_len > 0 {
            out.push(pools.consonants.sample(rng));
            out.push(pools.vowel(prefix_class).sample(rng));
            out.push(pools.consonants.sample(rng));
        }
        for (i, (c, class)) in chars.iter().zip(&classes).enumerate() {
            if span.contains(&i) {
                out.push(*c);
                continue;
            }
            out.push(match class {
                LetterClass::Vowel(h) => pools.vowel(*h).sample(rng),
                LetterClass::Consonant => pools.consonants.sample(rng),
            });
        }
        if accept(&out, root, lexicon) {
            return Ok(NonceMapping {
                original_root: root.to_string(),
                nonce_root: out,
                language: profile.language,
                seed,
                attempts: attempt,
                prefix_len,
            });
        }
    }
    Err(Error::ExhaustedRetries {
        root: root.to_string(),
        attempts: RETRY_LIMIT,
    })
}

pub fn nonce_finnish(
    root: &str,
    profile: &LanguageProfile,
    lexicon: &HashSet<String>,
    rng: &mut Rng,
    seed: u64,
) -> Result<NonceMapping> {
    let classes = validate_root(root, profile)?;
    let pools = Pools::new(profile);

    for attempt in 1..=RETRY_LIMIT {
        let out: String = classes
            .iter()
            .map(|class| match class {
                LetterClass::Vowel(h) => pools.vowel(*h).sample(rng),
                LetterClass::Consonant => pools.consonants.sample(rng),
            })
            .collect();
        if accept(&out, root, lexicon) {
            return Ok(NonceMapping {
                original_root: root.to_string(),
                nonce_root: out,
                language: profile.language,
                seed,
                attempts: attempt,
                prefix_len: 0,
            });
        }
    }
    Err(Error::ExhaustedRetries {
        root: root.to_string(),
        attempts: RETRY_LIMIT,
    })
}

/// Generates a nonce for `root` with a generator derived from
/// `(seed, record_id)`, dispatching on the profile's language.
pub fn generate(
    root: &str,
    record_id: &str,
    profile: &LanguageProfile,
    lexicon: &HashSet<String>,
    seed: u64,
) -> Result<NonceMapping> {
    let record_seed = seed::derive_seed(seed, &["nonce", record_id]);
    let mut rng = seed::rng_for(record_seed, &[]);
    match profile.language {
        Language::Turkish => nonce_turkish(root, profile, lexicon, &mut rng, record_seed),
        Language::Finnish => nonce_finnish(root, profile, lexicon, &mut rng, record_seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr() -> LanguageProfile {
        LanguageProfile::turkish()
    }

    fn vowel_positions(p: &LanguageProfile, w: &str) -> Vec<usize> {
        w.chars()
            .enumerate()
            .filter(|(_, c)| p.vowels.contains(c))
            .map(|(i, _)| i)
            .collect()
    }

    #[test]
    fn sanat_keeps_at() {
        let p = tr();
        for s in 0..20 {
            let m = generate("sanat", "r", &p, &HashSet::new(), s).unwrap();
            assert_eq!(m.nonce_root.chars().count(), 5);
            assert!(m.nonce_root.ends_with("at"));
            assert_eq!(vowel_positions(&p, &m.nonce_root), vec![1, 3]);
        }
    }

    #[test]
    fn sira_keeps_final_a_and_back_vowel() {
        let p = tr();
        for s in 0..20 {
            let m = generate("sıra", "r", &p, &HashSet::new(), s).unwrap();
            let chars: Vec<char> = m.nonce_root.chars().collect();
            assert_eq!(chars.len(), 4);
            assert_eq!(chars[3], 'a');
            assert_eq!(p.classify(chars[1]).unwrap(), LetterClass::Vowel(Harmony::Back));
        }
    }

    #[test]
    fn two_letter_root_gets_cvc_prefix() {
        let p = tr();
        let m = generate("at", "r", &p, &HashSet::new(), 3).unwrap();
        let chars: Vec<char> = m.nonce_root.chars().collect();
        assert_eq!(chars.len(), 5);
        assert_eq!(m.prefix_len, 3);
        assert!(m.nonce_root.ends_with("at"));
        let shape: Vec<bool> = chars.iter().map(|c| p.vowels.contains(c)).collect();
        assert_eq!(shape, vec![false, true, false, true, false]);
    }

    #[test]
    fn finnish_examples_keep_shape_and_harmony() {
        let p = LanguageProfile::finnish();
        let front: HashSet<char> = "äöy".chars().collect();
        let back: HashSet<char> = "aou".chars().collect();
        for s in 0..20 {
            let m = generate("sano", "r", &p, &HashSet::new(), s).unwrap();
            assert_eq!(vowel_positions(&p, &m.nonce_root), vec![1, 3]);
            assert!(!m.nonce_root.chars().any(|c| front.contains(&c)));

            let m = generate("petoks", "r", &p, &HashSet::new(), s).unwrap();
            assert_eq!(m.nonce_root.chars().count(), 6);
            assert_eq!(vowel_positions(&p, &m.nonce_root), vec![1, 3]);
            assert!(!m.nonce_root.chars().any(|c| front.contains(&c)));

            let m = generate("äiti", "r", &p, &HashSet::new(), s).unwrap();
            assert_eq!(m.nonce_root.chars().count(), 4);
            assert!(!m.nonce_root.chars().any(|c| back.contains(&c)));
        }
    }

    #[test]
    fn lexicon_collisions_exhaust() {
        let p = tr();
        // only the initial consonant of "su" is replaceable
        let lexicon: HashSet<String> = p.consonants.iter().map(|c| format!("{c}u")).collect();
        let err = generate("su", "r", &p, &lexicon, 1).unwrap_err();
        assert!(matches!(err, Error::ExhaustedRetries { attempts: RETRY_LIMIT, .. }));
    }

    #[test]
    fn rejects_vowelless_and_foreign() {
        let p = tr();
        assert!(matches!(generate("brr", "r", &p, &HashSet::new(), 1), Err(Error::NoVowel(_))));
        assert!(matches!(generate("", "r", &p, &HashSet::new(), 1), Err(Error::NoVowel(_))));
        assert!(matches!(
            generate("wax", "r", &p, &HashSet::new(), 1),
            Err(Error::UnknownLetter { .. })
        ));
    }

    #[test]
    fn deterministic_per_seed_and_record() {
        let p = tr();
        let a = generate("değer", "r1", &p, &HashSet::new(), 9).unwrap();
        let b = generate("değer", "r1", &p, &HashSet::new(), 9).unwrap();
        assert_eq!(a, b);
    }
}
