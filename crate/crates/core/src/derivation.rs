//! Surface composition from a root and slotted affixes, enumeration of
//! alternative affix orderings, and selection of negative derivations.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang_profile::{Language, LanguageProfile};
use crate::seed::Rng;

/// 7!·2: the longest paper suffix chains with room to spare.
pub const DEFAULT_ORDERING_CAP: usize = 10080;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Prefix,
    Suffix,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Affix {
    pub form: String,
    pub slot: Slot,
    /// Position within its slot block in the gold word.
    pub gold_index: usize,
}

impl Affix {
    pub fn suffix(form: &str, gold_index: usize) -> Affix {
        Affix {
            form: form.to_string(),
            slot: Slot::Suffix,
            gold_index,
        }
    }

    pub fn prefix(form: &str, gold_index: usize) -> Affix {
        Affix {
            form: form.to_string(),
            slot: Slot::Prefix,
            gold_index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentedWord {
    pub record_id: String,
    pub language: Language,
    pub root: String,
    pub affixes: Vec<Affix>,
    pub gold_surface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence: Option<String>,
    /// Non-surface morpheme labels; carried along, never composed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub meta_affixes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manual_negative_affix: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub known_valid_alternatives: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonce_root: Option<String>,
}

impl SegmentedWord {
    pub fn morpheme_count(&self) -> usize {
        self.affixes.len()
    }

    fn block(&self, slot: Slot) -> Vec<&Affix> {
        let mut block: Vec<&Affix> = self.affixes.iter().filter(|a| a.slot == slot).collect();
        block.sort_by_key(|a| a.gold_index);
        block
    }

    /// Affixes in gold order: prefix block, then suffix block.
    pub fn gold_order(&self) -> Vec<Affix> {
        let mut out: Vec<Affix> = self.block(Slot::Prefix).into_iter().cloned().collect();
        out.extend(self.block(Slot::Suffix).into_iter().cloned());
        out
    }

    pub fn is_valid_surface(&self, surface: &str) -> bool {
        surface == self.gold_surface || self.known_valid_alternatives.contains(surface)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateDerivation {
    pub surface: String,
    /// Affixes in the order they attach (prefix block, then suffix block).
    pub ordering: Vec<Affix>,
    pub is_gold: bool,
    pub levenshtein_to_gold: usize,
}

/// Concatenates the prefix block, the root and the suffix block. Affixes are
/// already surface-realized, so no phonology is applied.
pub fn compose(root: &str, ordered_affixes: &[Affix]) -> Result<String> {
    if let Some(i) = ordered_affixes.iter().position(|a| a.form.is_empty()) {
        return Err(Error::EmptyAffix(i));
    }
    let mut out = String::new();
    for a in ordered_affixes.iter().filter(|a| a.slot == Slot::Prefix) {
        out.push_str(&a.form);
    }
    out.push_str(root);
    for a in ordered_affixes.iter().filter(|a| a.slot == Slot::Suffix) {
        out.push_str(&a.form);
    }
    Ok(out)
}

/// Edit distance over arbitrary symbols with unit costs.
pub fn levenshtein_by<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let above = row[j + 1];
            let cost = usize::from(x != y);
            row[j + 1] = (above + 1).min(row[j] + 1).min(diag + cost);
            diag = above;
        }
    }
    row[b.len()]
}

/// Levenshtein distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_by(&a, &b)
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

pub fn ordering_count(word: &SegmentedWord) -> u128 {
    let prefixes = word.affixes.iter().filter(|a| a.slot == Slot::Prefix).count();
    factorial(prefixes) * factorial(word.affixes.len() - prefixes)
}

/// Advances `perm` to its lexicographic successor; false once it wraps.
fn next_permutation(perm: &mut [usize]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let Some(i) = (0..perm.len() - 1).rev().find(|&i| perm[i] < perm[i + 1]) else {
        return false;
    };
    let j = (i + 1..perm.len()).rev().find(|&j| perm[j] > perm[i]).unwrap();
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = vec![perm.clone()];
    while next_permutation(&mut perm) {
        out.push(perm.clone());
    }
    out
}

fn candidate(word: &SegmentedWord, ordering: Vec<Affix>) -> Result<CandidateDerivation> {
    let surface = compose(&word.root, &ordering)?;
    Ok(CandidateDerivation {
        is_gold: word.is_valid_surface(&surface),
        levenshtein_to_gold: levenshtein(&surface, &word.gold_surface),
        surface,
        ordering,
    })
}

fn dedup_by_surface(candidates: Vec<CandidateDerivation>) -> Vec<CandidateDerivation> {
    let mut seen = HashSet::new();
    candidates
        .into_iter()
        .filter(|c| seen.insert(c.surface.clone()))
        .collect()
}

/// Every ordering that permutes affixes within their slot block, deduplicated
/// by surface. The gold ordering comes first.
pub fn enumerate_orderings(word: &SegmentedWord, cap: usize) -> Result<Vec<CandidateDerivation>> {
    let total = ordering_count(word);
    if total > cap as u128 {
        return Err(Error::CombinatorialCap {
            orderings: total,
            cap,
        });
    }
    let gold = word.gold_order();
    let split = gold.iter().filter(|a| a.slot == Slot::Prefix).count();
    let (prefixes, suffixes) = gold.split_at(split);
    let prefix_perms = all_permutations(prefixes.len());
    let suffix_perms = all_permutations(suffixes.len());

    let mut out = Vec::with_capacity(total as usize);
    for pp in &prefix_perms {
        for sp in &suffix_perms {
            let ordering: Vec<Affix> = pp
                .iter()
                .map(|&i| prefixes[i].clone())
                .chain(sp.iter().map(|&i| suffixes[i].clone()))
                .collect();
            out.push(candidate(word, ordering)?);
        }
    }
    Ok(dedup_by_surface(out))
}

/// Uniformly samples `cap` distinct orderings (gold always included) for
/// words whose full enumeration would exceed the cap.
pub fn sample_orderings(
    word: &SegmentedWord,
    cap: usize,
    rng: &mut Rng,
) -> Result<Vec<CandidateDerivation>> {
    let gold = word.gold_order();
    let split = gold.iter().filter(|a| a.slot == Slot::Prefix).count();
    let (prefixes, suffixes) = gold.split_at(split);
    let target = (cap as u128).min(ordering_count(word)) as usize;

    let mut seen: HashSet<(Vec<usize>, Vec<usize>)> = HashSet::new();
    let identity = ((0..prefixes.len()).collect(), (0..suffixes.len()).collect());
    seen.insert(identity);
    let mut out = vec![candidate(word, gold.clone())?];
    while seen.len() < target {
        let mut pp: Vec<usize> = (0..prefixes.len()).collect();
        let mut sp: Vec<usize> = (0..suffixes.len()).collect();
        pp.shuffle(rng);
        sp.shuffle(rng);
        if !seen.insert((pp.clone(), sp.clone())) {
            continue;
        }
        let ordering: Vec<Affix> = pp
            .iter()
            .map(|&i| prefixes[i].clone())
            .chain(sp.iter().map(|&i| suffixes[i].clone()))
            .collect();
        out.push(candidate(word, ordering)?);
    }
    Ok(dedup_by_surface(out))
}

/// Candidate pool for negative selection; the flag reports whether the
/// enumeration was truncated to a uniform sample.
pub fn candidate_pool(
    word: &SegmentedWord,
    cap: usize,
    rng: &mut Rng,
) -> Result<(Vec<CandidateDerivation>, bool)> {
    match enumerate_orderings(word, cap) {
        Ok(all) => Ok((all, false)),
        Err(Error::CombinatorialCap { .. }) => Ok((sample_orderings(word, cap, rng)?, true)),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeStrategy {
    Random,
    LangAgnostic,
    LangSpecificTr,
}

impl NegativeStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            NegativeStrategy::Random => "random",
            NegativeStrategy::LangAgnostic => "lang_agnostic",
            NegativeStrategy::LangSpecificTr => "lang_specific_tr",
        }
    }
}

impl fmt::Display for NegativeStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NegativeStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(NegativeStrategy::Random),
            "lang_agnostic" | "lang-agnostic" => Ok(NegativeStrategy::LangAgnostic),
            "lang_specific_tr" | "lang-specific-tr" => Ok(NegativeStrategy::LangSpecificTr),
            other => Err(Error::Config(format!("unknown negative strategy {other:?}"))),
        }
    }
}

/// How many negatives each item gets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KPolicy {
    /// One negative for one- and two-morpheme items, four otherwise.
    ByMorphemeCount,
    Fixed(usize),
}

impl KPolicy {
    pub fn k_for(self, morpheme_count: usize) -> usize {
        match self {
            KPolicy::ByMorphemeCount if morpheme_count <= 2 => 1,
            KPolicy::ByMorphemeCount => 4,
            KPolicy::Fixed(k) => k,
        }
    }
}

fn by_rank(a: &CandidateDerivation, b: &CandidateDerivation) -> Ordering {
    a.levenshtein_to_gold
        .cmp(&b.levenshtein_to_gold)
        .then_with(|| a.surface.cmp(&b.surface))
}

/// Picks up to `k` invalid derivations for `word`.
///
/// Single-morpheme items have no reordering, so their one negative is the
/// root with the record's manual negative affix. Everything else is drawn
/// from the ordering pool with gold and known-valid surfaces removed, and is
/// returned sorted by (distance to gold, surface).
pub fn select_negatives(
    word: &SegmentedWord,
    profile: &LanguageProfile,
    strategy: NegativeStrategy,
    k: usize,
    cap: usize,
    rng: &mut Rng,
) -> Result<Vec<CandidateDerivation>> {
    if strategy == NegativeStrategy::LangSpecificTr && word.language != Language::Turkish {
        return Err(Error::UnsupportedStrategy {
            strategy: strategy.to_string(),
            language: word.language.to_string(),
        });
    }

    if word.morpheme_count() == 1 {
        let form = word
            .manual_negative_affix
            .as_deref()
            .filter(|f| !f.is_empty())
            .ok_or_else(|| Error::NoNegativeAvailable(word.record_id.clone()))?;
        let slot = word.affixes[0].slot;
        let neg = candidate(
            word,
            vec![Affix {
                form: form.to_string(),
                slot,
                gold_index: 0,
            }],
        )?;
        return if neg.is_gold {
            Err(Error::NoNegativeAvailable(word.record_id.clone()))
        } else {
            Ok(vec![neg])
        };
    }

    let (pool, _) = candidate_pool(word, cap, rng)?;
    let mut candidates: Vec<CandidateDerivation> = pool.into_iter().filter(|c| !c.is_gold).collect();
    if candidates.is_empty() {
        return Err(Error::NoNegativeAvailable(word.record_id.clone()));
    }
    candidates.sort_by(by_rank);
    if candidates.len() <= k {
        return Ok(candidates);
    }

    let chosen = match strategy {
        NegativeStrategy::Random => {
            let mut picked = index::sample(rng, candidates.len(), k).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|i| candidates[i].clone()).collect()
        }
        NegativeStrategy::LangAgnostic => {
            candidates.truncate(k);
            candidates
        }
        NegativeStrategy::LangSpecificTr => {
            let mut clean = Vec::new();
            let mut adjacent = Vec::new();
            for c in candidates {
                if profile.has_adjacent_vowels(&c.surface)? {
                    adjacent.push(c);
                } else {
                    clean.push(c);
                }
            }
            clean.extend(adjacent);
            clean.truncate(k);
            clean.sort_by(by_rank);
            clean
        }
    };
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_for;
    use proptest::prelude::*;

    fn tr_word(id: &str, root: &str, suffixes: &[&str], gold: &str) -> SegmentedWord {
        SegmentedWord {
            record_id: id.into(),
            language: Language::Turkish,
            root: root.into(),
            affixes: suffixes.iter().enumerate().map(|(i, s)| Affix::suffix(s, i)).collect(),
            gold_surface: gold.into(),
            sentence: None,
            meta_affixes: vec![],
            manual_negative_affix: None,
            known_valid_alternatives: BTreeSet::new(),
            nonce_root: None,
        }
    }

    fn palvelu() -> SegmentedWord {
        SegmentedWord {
            record_id: "fi-palvelu".into(),
            language: Language::Finnish,
            root: "palvelu".into(),
            affixes: vec![
                Affix::prefix("laina", 0),
                Affix::prefix("n", 1),
                Affix::prefix("välitys", 2),
                Affix::suffix("j", 0),
                Affix::suffix("a", 1),
            ],
            gold_surface: "lainanvälityspalveluja".into(),
            sentence: None,
            meta_affixes: vec![],
            manual_negative_affix: None,
            known_valid_alternatives: BTreeSet::new(),
            nonce_root: None,
        }
    }

    /// Textbook full-matrix DP, kept separate from the two-row version.
    fn lev_oracle(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in d.iter_mut().enumerate() {
            row[0] = i;
        }
        for j in 0..=b.len() {
            d[0][j] = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
                d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
            }
        }
        d[a.len()][b.len()]
    }

    #[test]
    fn compose_examples() {
        assert_eq!(compose("sohbet", &[Affix::suffix("ler", 0)]).unwrap(), "sohbetler");
        let fi = [
            Affix::prefix("kuvaus", 0),
            Affix::suffix("i", 0),
            Affix::suffix("lta", 1),
            Affix::suffix("an", 2),
        ];
        assert_eq!(compose("olosuhte", &fi).unwrap(), "kuvausolosuhteiltaan");
        assert_eq!(compose("değer", &[]).unwrap(), "değer");
        assert!(matches!(compose("x", &[Affix::suffix("", 0)]), Err(Error::EmptyAffix(0))));
    }

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein("x", "x"), 0);
        assert_eq!(levenshtein("abc", ""), 3);
        assert_eq!(levenshtein("", "abc"), 3);
        let d = lev_oracle("sıradanmış", "sıramışdan");
        assert_eq!(d, 6);
        assert_eq!(levenshtein("sıradanmış", "sıramışdan"), d);
    }

    #[test]
    fn sira_has_one_alternative() {
        let w = tr_word("sira", "sıra", &["dan", "mış"], "sıradanmış");
        let c = enumerate_orderings(&w, DEFAULT_ORDERING_CAP).unwrap();
        let surfaces: Vec<&str> = c.iter().map(|c| c.surface.as_str()).collect();
        assert_eq!(surfaces, vec!["sıradanmış", "sıramışdan"]);
        assert!(c[0].is_gold && !c[1].is_gold);
    }

    #[test]
    fn deger_has_six_orderings() {
        let w = tr_word("deger", "değer", &["len", "dir", "ip"], "değerlendirip");
        let c = enumerate_orderings(&w, DEFAULT_ORDERING_CAP).unwrap();
        assert_eq!(c.len(), 6);
        assert_eq!(c.iter().filter(|c| c.is_gold).count(), 1);
    }

    #[test]
    fn palvelu_permutes_within_blocks() {
        let w = palvelu();
        let c = enumerate_orderings(&w, DEFAULT_ORDERING_CAP).unwrap();
        assert_eq!(c.len(), 12);
        // brute force: every prefix permutation × suffix permutation
        let prefixes = ["laina", "n", "välitys"];
        let suffixes = ["j", "a"];
        let mut expected = BTreeSet::new();
        for p in all_permutations(3) {
            for s in all_permutations(2) {
                let mut w = String::new();
                p.iter().for_each(|&i| w.push_str(prefixes[i]));
                w.push_str("palvelu");
                s.iter().for_each(|&i| w.push_str(suffixes[i]));
                expected.insert(w);
            }
        }
        let got: BTreeSet<String> = c.iter().map(|c| c.surface.clone()).collect();
        assert_eq!(got, expected);
        assert!(got.contains("nlainavälityspalveluja"));
        assert!(got.contains("lainanvälityspalveluaj"));
        for cand in &c {
            assert!(cand.surface.contains("palvelu"));
            assert_eq!(cand.levenshtein_to_gold, lev_oracle(&cand.surface, &w.gold_surface));
        }
    }

    #[test]
    fn duplicate_affixes_dedup_to_one_gold() {
        let w = tr_word("hayal", "hayal", &["ler", "im", "de", "ki", "ler", "i"], "hayallerimdekileri");
        let c = enumerate_orderings(&w, DEFAULT_ORDERING_CAP).unwrap();
        assert_eq!(c.iter().filter(|c| c.is_gold).count(), 1);
        assert_eq!(c.len(), 360);
    }

    #[test]
    fn cap_is_enforced_and_sampling_falls_back() {
        let w = tr_word("long", "a", &["b", "c", "d", "e", "f"], "abcdef");
        assert!(matches!(
            enumerate_orderings(&w, 100),
            Err(Error::CombinatorialCap { orderings: 120, cap: 100 })
        ));
        let mut rng = rng_for(1, &[]);
        let (pool, truncated) = candidate_pool(&w, 100, &mut rng).unwrap();
        assert!(truncated);
        assert_eq!(pool.len(), 100);
        assert!(pool[0].is_gold);
    }

    #[test]
    fn deger_lang_agnostic_top_four() {
        let p = LanguageProfile::turkish();
        let w = tr_word("deger", "değer", &["len", "dir", "ip"], "değerlendirip");
        let mut rng = rng_for(0, &[]);
        let got = select_negatives(&w, &p, NegativeStrategy::LangAgnostic, 4, DEFAULT_ORDERING_CAP, &mut rng).unwrap();
        assert_eq!(got.len(), 4);
        let excluded: Vec<_> = enumerate_orderings(&w, DEFAULT_ORDERING_CAP)
            .unwrap()
            .into_iter()
            .filter(|c| !c.is_gold && !got.iter().any(|g| g.surface == c.surface))
            .collect();
        for g in &got {
            for e in &excluded {
                assert!(g.levenshtein_to_gold <= e.levenshtein_to_gold);
            }
        }
    }

    #[test]
    fn sira_single_negative_any_strategy() {
        let p = LanguageProfile::turkish();
        let w = tr_word("sira", "sıra", &["dan", "mış"], "sıradanmış");
        for s in [NegativeStrategy::Random, NegativeStrategy::LangAgnostic, NegativeStrategy::LangSpecificTr] {
            let mut rng = rng_for(3, &[]);
            let got = select_negatives(&w, &p, s, 1, DEFAULT_ORDERING_CAP, &mut rng).unwrap();
            assert_eq!(got.len(), 1);
            assert_eq!(got[0].surface, "sıramışdan");
        }
    }

    #[test]
    fn single_morpheme_uses_manual_negative() {
        let p = LanguageProfile::turkish();
        let mut w = tr_word("sohbet", "sohbet", &["ler"], "sohbetler");
        let mut rng = rng_for(3, &[]);
        assert!(matches!(
            select_negatives(&w, &p, NegativeStrategy::LangAgnostic, 1, DEFAULT_ORDERING_CAP, &mut rng),
            Err(Error::NoNegativeAvailable(_))
        ));
        w.manual_negative_affix = Some("yin".into());
        let got = select_negatives(&w, &p, NegativeStrategy::LangAgnostic, 1, DEFAULT_ORDERING_CAP, &mut rng).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].surface, "sohbetyin");
    }

    #[test]
    fn lang_specific_rejected_for_finnish() {
        let p = LanguageProfile::finnish();
        let mut rng = rng_for(3, &[]);
        assert!(matches!(
            select_negatives(&palvelu(), &p, NegativeStrategy::LangSpecificTr, 4, DEFAULT_ORDERING_CAP, &mut rng),
            Err(Error::UnsupportedStrategy { .. })
        ));
    }

    #[test]
    fn lang_specific_prefers_no_adjacent_vowels() {
        let p = LanguageProfile::turkish();
        let w = tr_word("sinif", "sınıf", &["lan", "dır", "ıl", "ma", "lar", "ı", "nı"], "sınıflandırılmalarını");
        let mut rng = rng_for(3, &[]);
        let got = select_negatives(&w, &p, NegativeStrategy::LangSpecificTr, 4, DEFAULT_ORDERING_CAP, &mut rng).unwrap();
        assert_eq!(got.len(), 4);
        for g in &got {
            assert!(!p.has_adjacent_vowels(&g.surface).unwrap(), "{}", g.surface);
        }
    }

    #[test]
    fn known_valid_alternatives_never_returned() {
        let p = LanguageProfile::turkish();
        let mut w = tr_word("deger", "değer", &["len", "dir", "ip"], "değerlendirip");
        w.known_valid_alternatives.insert("değerlenipdir".into());
        for s in [NegativeStrategy::Random, NegativeStrategy::LangAgnostic, NegativeStrategy::LangSpecificTr] {
            let mut rng = rng_for(5, &[]);
            let got = select_negatives(&w, &p, s, 10, DEFAULT_ORDERING_CAP, &mut rng).unwrap();
            assert_eq!(got.len(), 4);
            assert!(got.iter().all(|g| !w.is_valid_surface(&g.surface)));
        }
    }

    #[test]
    fn k_policy_defaults() {
        assert_eq!(KPolicy::ByMorphemeCount.k_for(1), 1);
        assert_eq!(KPolicy::ByMorphemeCount.k_for(2), 1);
        assert_eq!(KPolicy::ByMorphemeCount.k_for(3), 4);
        assert_eq!(KPolicy::ByMorphemeCount.k_for(7), 4);
        assert_eq!(KPolicy::Fixed(2).k_for(7), 2);
    }

    fn small_string() -> impl Strategy<Value = String> {
        prop::collection::vec(prop::sample::select(vec!['a', 'b', 'ı', 'ş', 'ä']), 0..10)
            .prop_map(|v| v.into_iter().collect())
    }

    proptest! {
        #[test]
        fn levenshtein_matches_oracle(a in small_string(), b in small_string()) {
            prop_assert_eq!(levenshtein(&a, &b), lev_oracle(&a, &b));
        }

        #[test]
        fn levenshtein_is_a_metric(a in small_string(), b in small_string(), c in small_string()) {
            let ab = levenshtein(&a, &b);
            prop_assert_eq!(levenshtein(&a, &a), 0);
            prop_assert_eq!(ab == 0, a == b);
            prop_assert_eq!(ab, levenshtein(&b, &a));
            prop_assert!(levenshtein(&a, &c) <= ab + levenshtein(&b, &c));
        }

        #[test]
        fn compose_length_is_additive(root in small_string(), forms in prop::collection::vec("[a-z]{1,4}", 0..5)) {
            let affixes: Vec<Affix> = forms.iter().enumerate().map(|(i, f)| Affix::suffix(f, i)).collect();
            let surface = compose(&root, &affixes).unwrap();
            let expected = root.chars().count() + forms.iter().map(|f| f.chars().count()).sum::<usize>();
            prop_assert_eq!(surface.chars().count(), expected);
        }

        #[test]
        fn random_negatives_are_subset_and_safe(seed in any::<u64>(), k in 1usize..6) {
            let p = LanguageProfile::turkish();
            let w = tr_word("endise", "endişe", &["len", "dir", "me", "mek"], "endişelendirmemek");
            let all: BTreeSet<String> = enumerate_orderings(&w, DEFAULT_ORDERING_CAP).unwrap()
                .into_iter().filter(|c| !c.is_gold).map(|c| c.surface).collect();
            let mut rng = rng_for(seed, &[]);
            let got = select_negatives(&w, &p, NegativeStrategy::Random, k, DEFAULT_ORDERING_CAP, &mut rng).unwrap();
            prop_assert_eq!(got.len(), k);
            for g in &got {
                prop_assert!(all.contains(&g.surface));
                prop_assert!(g.surface != w.gold_surface);
            }
        }
    }
}
