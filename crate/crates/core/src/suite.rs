//! Ingestion of segmented records, stratified diverse sampling, and
//! construction of productivity / systematicity task instances.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::ops::RangeInclusive;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::derivation::{
    compose, enumerate_orderings, ordering_count, select_negatives, Affix, KPolicy,
    NegativeStrategy, SegmentedWord, Slot,
};
use crate::error::{Error, Result};
use crate::lang_profile::{Language, LanguageProfile};
use crate::seed::{self, sha256_hex};

pub const BLANK: &str = "___";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Productivity,
    Systematicity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    Id,
    Ood,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderMode {
    Shuffled,
    Correct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Eval,
    Demo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Valid,
    Invalid,
}

macro_rules! str_enum {
    ($ty:ty, $($variant:path => $name:literal),+ $(,)?) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $($variant => $name),+ }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($name => Ok($variant),)+
                    other => Err(Error::Config(format!(
                        "unknown {} {other:?}", stringify!($ty).to_lowercase()
                    ))),
                }
            }
        }
    };
}

str_enum!(Task, Task::Productivity => "productivity", Task::Systematicity => "systematicity");
str_enum!(Distribution, Distribution::Id => "id", Distribution::Ood => "ood");
str_enum!(OrderMode, OrderMode::Shuffled => "shuffled", OrderMode::Correct => "correct");
str_enum!(Label, Label::Valid => "valid", Label::Invalid => "invalid");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentedAffix {
    pub form: String,
    pub slot: Slot,
}

impl From<&Affix> for PresentedAffix {
    fn from(a: &Affix) -> Self {
        PresentedAffix {
            form: a.form.clone(),
            slot: a.slot,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystematicityOption {
    pub surface: String,
    pub label: Label,
    /// Affix list shown alongside this derivation. Differs from the
    /// instance-level list only for single-morpheme items, whose negative
    /// uses a different affix.
    pub affixes: Vec<PresentedAffix>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub instance_id: String,
    pub record_id: String,
    pub task: Task,
    pub distribution: Distribution,
    pub language: Language,
    pub split: Split,
    pub shown_root: String,
    /// For OOD items: the real root the nonce stands for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub definition: Option<String>,
    pub presented_affixes: Vec<PresentedAffix>,
    pub order_mode: OrderMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_sentence: Option<String>,
    pub morpheme_count: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub options: Vec<SystematicityOption>,
    /// Productivity answer; used for scoring and demonstrations only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_surface: Option<String>,
    /// Other accepted productivity answers (manually repaired items).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alternatives: Vec<String>,
    /// Gold affix order, for scoring baselines. Never rendered.
    pub gold_order: Vec<PresentedAffix>,
}

impl TaskInstance {
    pub fn accepts(&self, surface: &str) -> bool {
        self.gold_surface.as_deref() == Some(surface) || self.alternatives.iter().any(|a| a == surface)
    }
}

/// A problem with one input record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_id: Option<String>,
    pub message: String,
}

#[derive(Debug)]
pub struct Ingested {
    pub records: Vec<SegmentedWord>,
    pub rejected: Vec<Diagnostic>,
    pub digest: String,
}

fn normalize(profile: &LanguageProfile, s: &str) -> String {
    profile.case_fold(s.trim())
}

fn check_alphabet(profile: &LanguageProfile, what: &str, word: &str) -> Result<()> {
    match profile.first_foreign_letter(word) {
        Some(letter) => Err(Error::Schema(format!(
            "{what} {word:?} contains {letter:?}, which is outside the {} alphabet",
            profile.language
        ))),
        None => Ok(()),
    }
}

/// Normalizes and validates one record.
pub fn validate_record(mut word: SegmentedWord, profile: &LanguageProfile) -> Result<SegmentedWord> {
    if word.language != profile.language {
        return Err(Error::Schema(format!(
            "record {} is {}, expected {}",
            word.record_id, word.language, profile.language
        )));
    }
    if word.affixes.is_empty() {
        return Err(Error::Schema(format!("record {} has no affixes", word.record_id)));
    }
    word.root = normalize(profile, &word.root);
    word.gold_surface = normalize(profile, &word.gold_surface);
    for a in &mut word.affixes {
        a.form = normalize(profile, &a.form);
        if a.form.is_empty() {
            return Err(Error::Schema(format!("record {} has an empty affix", word.record_id)));
        }
    }
    word.manual_negative_affix = word.manual_negative_affix.map(|a| normalize(profile, &a));
    word.nonce_root = word.nonce_root.map(|a| normalize(profile, &a));
    word.known_valid_alternatives = word
        .known_valid_alternatives
        .iter()
        .map(|a| normalize(profile, a))
        .collect();
    word.sentence = word.sentence.map(|s| s.nfc().collect());

    for slot in [Slot::Prefix, Slot::Suffix] {
        let mut indices: Vec<usize> = word
            .affixes
            .iter()
            .filter(|a| a.slot == slot)
            .map(|a| a.gold_index)
            .collect();
        indices.sort_unstable();
        if indices.iter().enumerate().any(|(i, g)| i != *g) {
            return Err(Error::Schema(format!(
                "record {}: {slot:?} gold_index values must be 0..n without gaps or repeats",
                word.record_id
            )));
        }
    }

    if word.root.is_empty() {
        return Err(Error::Schema(format!("record {} has an empty root", word.record_id)));
    }
    check_alphabet(profile, "root", &word.root)?;
    for a in &word.affixes {
        check_alphabet(profile, "affix", &a.form)?;
    }
    check_alphabet(profile, "gold surface", &word.gold_surface)?;
    if let Some(neg) = &word.manual_negative_affix {
        check_alphabet(profile, "manual negative affix", neg)?;
    }
    if let Some(nonce) = &word.nonce_root {
        check_alphabet(profile, "nonce root", nonce)?;
    }

    if let Some(sentence) = &word.sentence {
        let blanks = sentence.matches(BLANK).count();
        if blanks != 1 {
            return Err(Error::Schema(format!(
                "record {}: sentence must contain exactly one {BLANK} blank, found {blanks}",
                word.record_id
            )));
        }
    }

    let composed = compose(&word.root, &word.gold_order())?;
    if composed != word.gold_surface {
        return Err(Error::CompositionMismatch {
            record_id: word.record_id.clone(),
            composed,
            gold: word.gold_surface.clone(),
        });
    }
    Ok(word)
}

/// Reads a SegmentedWord JSONL file. Bad records are collected as
/// diagnostics; only I/O failures abort.
pub fn ingest(path: &Path, profile: &LanguageProfile) -> Result<Ingested> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let digest = sha256_hex(&bytes);
    let text = String::from_utf8(bytes)
        .map_err(|e| Error::Schema(format!("{}: not UTF-8: {e}", path.display())))?;
    let (records, rejected) = ingest_str(&text, profile);
    Ok(Ingested {
        records,
        rejected,
        digest,
    })
}

pub fn ingest_str(text: &str, profile: &LanguageProfile) -> (Vec<SegmentedWord>, Vec<Diagnostic>) {
    let mut records = Vec::new();
    let mut rejected = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: std::result::Result<SegmentedWord, _> = serde_json::from_str(line);
        let outcome = match parsed {
            Err(e) => Err((None, Error::Schema(e.to_string()))),
            Ok(word) => {
                let id = word.record_id.clone();
                if !ids.insert(id.clone()) {
                    Err((Some(id.clone()), Error::Schema(format!("duplicate record_id {id}"))))
                } else {
                    validate_record(word, profile).map_err(|e| (Some(id), e))
                }
            }
        };
        match outcome {
            Ok(word) => records.push(word),
            Err((record_id, e)) => rejected.push(Diagnostic {
                line: Some(i + 1),
                record_id,
                message: e.to_string(),
            }),
        }
    }
    (records, rejected)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumCount {
    pub available: usize,
    pub target: usize,
    pub sampled: usize,
    pub demos: usize,
    pub eval: usize,
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub records: Vec<SegmentedWord>,
    pub counts: BTreeMap<usize, StratumCount>,
    pub deficits: Vec<usize>,
}

/// Greedy diverse sampling: within each morpheme-count stratum, repeatedly
/// take the record that adds a new root, then the most new affix forms, with
/// a seeded random order breaking remaining ties. Diversity is tracked across
/// the whole sample; strata are filled in ascending order.
pub fn stratified_sample(
    pool: &[SegmentedWord],
    per_stratum: usize,
    strata: RangeInclusive<usize>,
    seed: u64,
) -> Sample {
    let mut seen_roots: HashSet<&str> = HashSet::new();
    let mut seen_affixes: HashSet<&str> = HashSet::new();
    let mut records = Vec::new();
    let mut counts = BTreeMap::new();
    let mut deficits = Vec::new();

    for stratum in strata {
        let members: Vec<&SegmentedWord> =
            pool.iter().filter(|w| w.morpheme_count() == stratum).collect();
        let mut order: Vec<usize> = (0..members.len()).collect();
        order.shuffle(&mut seed::rng_for(seed, &["sample", &stratum.to_string()]));
        let mut tiebreak = vec![0usize; members.len()];
        for (rank, idx) in order.into_iter().enumerate() {
            tiebreak[idx] = rank;
        }

        let mut remaining: Vec<usize> = (0..members.len()).collect();
        let mut taken = 0;
        while taken < per_stratum && !remaining.is_empty() {
            let score = |i: usize| {
                let w = members[i];
                let new_root = !seen_roots.contains(w.root.as_str());
                let new_affixes = w
                    .affixes
                    .iter()
                    .map(|a| a.form.as_str())
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .filter(|f| !seen_affixes.contains(f))
                    .count();
                (new_root, new_affixes, std::cmp::Reverse(tiebreak[i]))
            };
            let (pos, _) = remaining
                .iter()
                .enumerate()
                .max_by_key(|(_, &i)| score(i))
                .expect("remaining is nonempty");
            let i = remaining.swap_remove(pos);
            let w = members[i];
            seen_roots.insert(w.root.as_str());
            seen_affixes.extend(w.affixes.iter().map(|a| a.form.as_str()));
            records.push(w.clone());
            taken += 1;
        }

        if taken < per_stratum {
            deficits.push(stratum);
        }
        counts.insert(
            stratum,
            StratumCount {
                available: members.len(),
                target: per_stratum,
                sampled: taken,
                ..Default::default()
            },
        );
    }
    Sample {
        records,
        counts,
        deficits,
    }
}

/// Holds out a demonstration slice per stratum: `ceil(fraction · n)` records,
/// raised to `min_demos`, but always leaving at least one evaluation record.
pub fn assign_splits(
    records: &[SegmentedWord],
    demo_fraction: f64,
    min_demos: usize,
    seed: u64,
) -> Vec<Split> {
    let mut by_stratum: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, w) in records.iter().enumerate() {
        by_stratum.entry(w.morpheme_count()).or_default().push(i);
    }
    let mut splits = vec![Split::Eval; records.len()];
    for (stratum, mut idx) in by_stratum {
        let n = idx.len();
        let wanted = ((demo_fraction * n as f64).ceil() as usize).max(min_demos);
        let n_demo = wanted.min(n.saturating_sub(1));
        idx.shuffle(&mut seed::rng_for(seed, &["split", &stratum.to_string()]));
        for &i in idx.iter().take(n_demo) {
            splits[i] = Split::Demo;
        }
    }
    splits
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub language: Language,
    pub seed: u64,
    pub task: Task,
    pub distribution: Distribution,
    pub context: bool,
    pub order_mode: OrderMode,
    pub strategy: NegativeStrategy,
    pub k_policy: KPolicy,
    pub per_stratum: usize,
    pub min_morphemes: usize,
    pub max_morphemes: usize,
    pub demo_fraction: f64,
    pub min_demos: usize,
    pub ordering_cap: usize,
}

impl SuiteConfig {
    pub fn new(language: Language, task: Task, distribution: Distribution) -> SuiteConfig {
        let max_morphemes = match language {
            Language::Turkish => 7,
            Language::Finnish => 6,
        };
        SuiteConfig {
            language,
            seed: 0,
            task,
            distribution,
            context: false,
            order_mode: OrderMode::Shuffled,
            strategy: NegativeStrategy::LangAgnostic,
            k_policy: KPolicy::ByMorphemeCount,
            per_stratum: 150,
            min_morphemes: 1,
            max_morphemes,
            demo_fraction: 0.1,
            min_demos: 5,
            ordering_cap: crate::derivation::DEFAULT_ORDERING_CAP,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct BuildOutcome {
    pub instances: Vec<TaskInstance>,
    pub skipped: Vec<Diagnostic>,
    /// Records whose ordering pool was a uniform sample rather than complete.
    pub truncated: Vec<String>,
}

fn presented_order(word: &SegmentedWord, gold: &[Affix], mode: OrderMode, seed: u64) -> Vec<Affix> {
    let forms_equal = |a: &[Affix]| a.iter().zip(gold).all(|(x, y)| x.form == y.form);
    let all_same = gold.windows(2).all(|p| p[0].form == p[1].form);
    if mode == OrderMode::Correct || gold.len() < 2 || all_same {
        return gold.to_vec();
    }
    let mut rng = seed::rng_for(seed, &["present", &word.record_id]);
    let mut order = gold.to_vec();
    loop {
        order.shuffle(&mut rng);
        if !forms_equal(&order) {
            return order;
        }
    }
}

/// Builds one instance per record for the configured task and distribution.
/// All random choices are keyed by record id, so the ID and OOD builds of a
/// record differ only in the root.
pub fn build_instances(
    records: &[SegmentedWord],
    splits: &[Split],
    cfg: &SuiteConfig,
    profile: &LanguageProfile,
) -> Result<BuildOutcome> {
    let mut out = BuildOutcome::default();
    for (word, split) in records.iter().zip(splits) {
        let shown_root = match cfg.distribution {
            Distribution::Id => word.root.clone(),
            Distribution::Ood => word
                .nonce_root
                .clone()
                .ok_or_else(|| Error::MissingNonce(word.record_id.clone()))?,
        };
        let context_sentence = if cfg.context {
            Some(
                word.sentence
                    .clone()
                    .ok_or_else(|| Error::MissingContext(word.record_id.clone()))?,
            )
        } else {
            None
        };
        let gold = word.gold_order();
        let presented: Vec<PresentedAffix> = presented_order(word, &gold, cfg.order_mode, cfg.seed)
            .iter()
            .map(PresentedAffix::from)
            .collect();

        let mut instance = TaskInstance {
            instance_id: format!("{}/{}/{}", word.record_id, cfg.task, cfg.distribution),
            record_id: word.record_id.clone(),
            task: cfg.task,
            distribution: cfg.distribution,
            language: word.language,
            split: *split,
            definition: (cfg.distribution == Distribution::Ood).then(|| word.root.clone()),
            shown_root: shown_root.clone(),
            presented_affixes: presented.clone(),
            order_mode: cfg.order_mode,
            context_sentence,
            morpheme_count: word.morpheme_count(),
            options: Vec::new(),
            gold_surface: None,
            alternatives: Vec::new(),
            gold_order: gold.iter().map(PresentedAffix::from).collect(),
        };

        match cfg.task {
            Task::Productivity => {
                instance.gold_surface = Some(compose(&shown_root, &gold)?);
                instance.alternatives = alternatives_for(word, &shown_root, cfg)?;
            }
            Task::Systematicity => {
                let k = cfg.k_policy.k_for(word.morpheme_count());
                let mut rng = seed::rng_for(cfg.seed, &["negatives", &word.record_id]);
                let negatives = match select_negatives(word, profile, cfg.strategy, k, cfg.ordering_cap, &mut rng) {
                    Ok(n) => n,
                    Err(e @ Error::NoNegativeAvailable(_)) => {
                        out.skipped.push(Diagnostic {
                            line: None,
                            record_id: Some(word.record_id.clone()),
                            message: e.to_string(),
                        });
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                if ordering_count(word) > cfg.ordering_cap as u128 {
                    out.truncated.push(word.record_id.clone());
                }
                let option_affixes = |ordering: &[Affix]| {
                    if word.morpheme_count() == 1 {
                        ordering.iter().map(PresentedAffix::from).collect()
                    } else {
                        presented.clone()
                    }
                };
                let mut options = vec![SystematicityOption {
                    surface: compose(&shown_root, &gold)?,
                    label: Label::Valid,
                    affixes: option_affixes(&gold),
                }];
                for neg in &negatives {
                    options.push(SystematicityOption {
                        surface: compose(&shown_root, &neg.ordering)?,
                        label: Label::Invalid,
                        affixes: option_affixes(&neg.ordering),
                    });
                }
                options.shuffle(&mut seed::rng_for(cfg.seed, &["options", &word.record_id]));
                instance.options = options;
            }
        }
        out.instances.push(instance);
    }
    Ok(out)
}

/// Known-valid alternatives re-expressed on the shown root. Alternatives that
/// are not a reordering of the gold affixes can only be carried over for ID.
fn alternatives_for(word: &SegmentedWord, shown_root: &str, cfg: &SuiteConfig) -> Result<Vec<String>> {
    if word.known_valid_alternatives.is_empty() {
        return Ok(Vec::new());
    }
    if cfg.distribution == Distribution::Id {
        return Ok(word.known_valid_alternatives.iter().cloned().collect());
    }
    let Ok(all) = enumerate_orderings(word, cfg.ordering_cap) else {
        return Ok(Vec::new());
    };
    let mut alts = BTreeSet::new();
    for c in all.iter().filter(|c| c.is_gold && c.surface != word.gold_surface) {
        alts.insert(compose(shown_root, &c.ordering)?);
    }
    Ok(alts.into_iter().collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub tool: String,
    pub version: String,
    pub config: SuiteConfig,
    pub input_path: String,
    pub input_digest: String,
    pub records_read: usize,
    pub rejected: Vec<Diagnostic>,
    pub strata: BTreeMap<usize, StratumCount>,
    pub deficits: Vec<usize>,
    pub skipped: Vec<Diagnostic>,
    pub truncated: Vec<String>,
    pub instances: usize,
}

/// End to end: sample, split, build. Returns the instances (eval and demo)
/// together with the manifest describing them.
pub fn build_suite(
    ingested: &Ingested,
    input_path: &str,
    cfg: &SuiteConfig,
    profile: &LanguageProfile,
) -> Result<(Vec<TaskInstance>, SuiteManifest)> {
    if cfg.strategy == NegativeStrategy::LangSpecificTr && cfg.language != Language::Turkish {
        return Err(Error::UnsupportedStrategy {
            strategy: cfg.strategy.to_string(),
            language: cfg.language.to_string(),
        });
    }
    let sample = stratified_sample(
        &ingested.records,
        cfg.per_stratum,
        cfg.min_morphemes..=cfg.max_morphemes,
        cfg.seed,
    );
    let splits = assign_splits(&sample.records, cfg.demo_fraction, cfg.min_demos, cfg.seed);
    let outcome = build_instances(&sample.records, &splits, cfg, profile)?;

    let mut strata = sample.counts;
    for inst in &outcome.instances {
        let entry = strata.entry(inst.morpheme_count).or_default();
        match inst.split {
            Split::Demo => entry.demos += 1,
            Split::Eval => entry.eval += 1,
        }
    }
    let manifest = SuiteManifest {
        tool: crate::TOOL_NAME.to_string(),
        version: crate::VERSION.to_string(),
        config: cfg.clone(),
        input_path: input_path.to_string(),
        input_digest: ingested.digest.clone(),
        records_read: ingested.records.len() + ingested.rejected.len(),
        rejected: ingested.rejected.clone(),
        strata,
        deficits: sample.deficits,
        skipped: outcome.skipped,
        truncated: outcome.truncated,
        instances: outcome.instances.len(),
    };
    Ok((outcome.instances, manifest))
}
