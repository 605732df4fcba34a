//! Few-shot prompt rendering from external template files.
//!
//! A template file has `=== name` section headers. `body` holds the
//! instruction and one `{examples}` slot; `shot` and `query` describe one
//! worked example and the unanswered query; systematicity templates also
//! carry `yes` and `no` with the answer words of the instruction language.
//! Worked examples and the query are joined with a blank line.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang_profile::Language;
use crate::seed;
use crate::suite::{Distribution, Label, Split, Task, TaskInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstructionLanguage {
    English,
    Turkish,
    Finnish,
}

impl InstructionLanguage {
    pub const ALL: [InstructionLanguage; 3] =
        [InstructionLanguage::English, InstructionLanguage::Turkish, InstructionLanguage::Finnish];

    pub fn code(self) -> &'static str {
        match self {
            InstructionLanguage::English => "en",
            InstructionLanguage::Turkish => "tr",
            InstructionLanguage::Finnish => "fi",
        }
    }

    /// Name of `target` as written in this instruction language.
    pub fn language_name(self, target: Language) -> &'static str {
        match (self, target) {
            (InstructionLanguage::English, Language::Turkish) => "Turkish",
            (InstructionLanguage::English, Language::Finnish) => "Finnish",
            (InstructionLanguage::Turkish, Language::Turkish) => "Türkçe",
            (InstructionLanguage::Turkish, Language::Finnish) => "Fince",
            (InstructionLanguage::Finnish, Language::Turkish) => "turkki",
            (InstructionLanguage::Finnish, Language::Finnish) => "suomi",
        }
    }
}

impl fmt::Display for InstructionLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for InstructionLanguage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "en" | "english" => Ok(InstructionLanguage::English),
            "tr" | "turkish" => Ok(InstructionLanguage::Turkish),
            "fi" | "finnish" => Ok(InstructionLanguage::Finnish),
            other => Err(Error::Config(format!("unknown instruction language {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Standard,
    Context,
    Cot,
    Paraphrased,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Standard, Variant::Context, Variant::Cot, Variant::Paraphrased];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Standard => "standard",
            Variant::Context => "context",
            Variant::Cot => "cot",
            Variant::Paraphrased => "paraphrased",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown template variant {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TemplateKey {
    pub instruction_language: InstructionLanguage,
    pub variant: Variant,
    pub task: Task,
    pub distribution: Distribution,
}

impl TemplateKey {
    pub fn new(lang: InstructionLanguage, variant: Variant, task: Task, distribution: Distribution) -> Self {
        TemplateKey {
            instruction_language: lang,
            variant,
            task,
            distribution,
        }
    }

    /// Path relative to a template directory.
    pub fn relative_path(&self) -> String {
        format!(
            "{}/{}/{}_{}.txt",
            self.instruction_language.code(),
            self.variant,
            self.task,
            self.distribution
        )
    }

    pub fn all() -> impl Iterator<Item = TemplateKey> {
        InstructionLanguage::ALL.into_iter().flat_map(|l| {
            Variant::ALL.into_iter().flat_map(move |v| {
                [Task::Productivity, Task::Systematicity].into_iter().flat_map(move |t| {
                    [Distribution::Id, Distribution::Ood]
                        .into_iter()
                        .map(move |d| TemplateKey::new(l, v, t, d))
                })
            })
        })
    }
}

impl fmt::Display for TemplateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.relative_path())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    pub key: TemplateKey,
    pub body: String,
    pub shot: String,
    pub query: String,
    pub yes: Option<String>,
    pub no: Option<String>,
}

const EXAMPLE_FIELDS: &[&str] = &["language", "index", "root", "definition", "affixes", "derived_word", "sentence"];

fn placeholders(text: &str) -> BTreeSet<&str> {
    let mut found = BTreeSet::new();
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) if after[..close].chars().all(|c| c.is_ascii_alphanumeric() || c == '_') && close > 0 => {
                found.insert(&after[..close]);
                rest = &after[close + 1..];
            }
            _ => rest = after,
        }
    }
    found
}

impl TemplateSet {
    pub fn parse(key: TemplateKey, text: &str) -> Result<TemplateSet> {
        let text = text.replace("\r\n", "\n");
        let mut sections: BTreeMap<String, Vec<&str>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for line in text.lines() {
            if let Some(name) = line.strip_prefix("=== ") {
                let name = name.trim().to_string();
                if sections.contains_key(&name) {
                    return Err(mismatch(key, format!("section {name} appears twice")));
                }
                sections.insert(name.clone(), Vec::new());
                current = Some(name);
            } else if let Some(name) = &current {
                sections.get_mut(name).expect("section exists").push(line);
            } else if !line.trim().is_empty() {
                return Err(mismatch(key, "text before the first section header".into()));
            }
        }
        let mut take = |name: &str| sections.remove(name).map(|lines| lines.join("\n"));
        let body = take("body").ok_or_else(|| mismatch(key, "missing body section".into()))?;
        let shot = take("shot").ok_or_else(|| mismatch(key, "missing shot section".into()))?;
        let query = take("query").ok_or_else(|| mismatch(key, "missing query section".into()))?;
        let yes = take("yes").map(|s| s.trim().to_string());
        let no = take("no").map(|s| s.trim().to_string());
        if let Some(extra) = sections.keys().next() {
            return Err(mismatch(key, format!("unknown section {extra}")));
        }
        let set = TemplateSet {
            key,
            body,
            shot,
            query,
            yes,
            no,
        };
        set.validate()?;
        Ok(set)
    }

    fn validate(&self) -> Result<()> {
        let key = self.key;
        let check = |section: &str, text: &str, allowed: &[&str], required: &[&str]| -> Result<()> {
            let found = placeholders(text);
            if let Some(bad) = found.iter().find(|p| !allowed.contains(p)) {
                return Err(mismatch(key, format!("unknown placeholder {{{bad}}} in {section}")));
            }
            if let Some(missing) = required.iter().find(|p| !found.contains(*p)) {
                return Err(mismatch(key, format!("{section} lacks {{{missing}}}")));
            }
            Ok(())
        };

        check("body", &self.body, &["language", "examples"], &["examples"])?;
        if self.body.matches("{examples}").count() != 1 {
            return Err(mismatch(key, "body must contain {examples} exactly once".into()));
        }
        let mut required = vec!["root", "affixes"];
        if key.distribution == Distribution::Ood {
            required.push("definition");
        }
        if key.variant == Variant::Context {
            required.push("sentence");
        }
        if key.task == Task::Systematicity {
            required.push("derived_word");
        }
        check("query", &self.query, EXAMPLE_FIELDS, &required)?;
        let shot_fields: Vec<&str> = EXAMPLE_FIELDS.iter().copied().chain(["answer"]).collect();
        required.push("answer");
        check("shot", &self.shot, &shot_fields, &required)?;

        if key.task == Task::Systematicity && (self.yes.is_none() || self.no.is_none()) {
            return Err(mismatch(key, "systematicity templates need yes and no sections".into()));
        }
        Ok(())
    }
}

fn mismatch(key: TemplateKey, detail: String) -> Error {
    Error::PlaceholderMismatch {
        key: key.to_string(),
        detail,
    }
}

/// All templates of one catalogue.
#[derive(Debug, Clone, Default)]
pub struct TemplateCatalog {
    pub sets: BTreeMap<TemplateKey, TemplateSet>,
}

macro_rules! bundled_templates {
    ($($lang:literal / $variant:literal),+ $(,)?) => {
        &[$(
            ($lang, $variant, "productivity", "id", include_str!(concat!("../data/templates/", $lang, "/", $variant, "/productivity_id.txt"))),
            ($lang, $variant, "productivity", "ood", include_str!(concat!("../data/templates/", $lang, "/", $variant, "/productivity_ood.txt"))),
            ($lang, $variant, "systematicity", "id", include_str!(concat!("../data/templates/", $lang, "/", $variant, "/systematicity_id.txt"))),
            ($lang, $variant, "systematicity", "ood", include_str!(concat!("../data/templates/", $lang, "/", $variant, "/systematicity_ood.txt"))),
        )+]
    };
}

const BUNDLED: &[(&str, &str, &str, &str, &str)] = bundled_templates!(
    "en" / "standard", "en" / "context", "en" / "cot", "en" / "paraphrased",
    "tr" / "standard", "tr" / "context", "tr" / "cot", "tr" / "paraphrased",
    "fi" / "standard", "fi" / "context", "fi" / "cot", "fi" / "paraphrased",
);

fn parse_key(lang: &str, variant: &str, task: &str, dist: &str) -> Result<TemplateKey> {
    Ok(TemplateKey::new(lang.parse()?, variant.parse()?, task.parse()?, dist.parse()?))
}

impl TemplateCatalog {
    /// The catalogue compiled into the library.
    pub fn bundled() -> TemplateCatalog {
        let mut sets = BTreeMap::new();
        for (lang, variant, task, dist, text) in BUNDLED {
            let key = parse_key(lang, variant, task, dist).expect("bundled key");
            let set = TemplateSet::parse(key, text).expect("bundled template is valid");
            sets.insert(key, set);
        }
        TemplateCatalog { sets }
    }

    /// Loads `<dir>/<lang>/<variant>/<task>_<dist>.txt` for every key. All
    /// absent files are reported together.
    pub fn load(dir: &Path) -> Result<TemplateCatalog> {
        let mut sets = BTreeMap::new();
        let mut missing = Vec::new();
        for key in TemplateKey::all() {
            let path = dir.join(key.relative_path());
            if !path.is_file() {
                missing.push(key.to_string());
                continue;
            }
            let text = crate::io::read_text(&path)?;
            sets.insert(key, TemplateSet::parse(key, &text)?);
        }
        if !missing.is_empty() {
            return Err(Error::MissingTemplate(missing));
        }
        Ok(TemplateCatalog { sets })
    }

    /// Writes the catalogue back out in the directory layout `load` reads.
    pub fn write(&self, dir: &Path) -> Result<()> {
        for (key, set) in &self.sets {
            let mut text = format!("=== body\n{}\n=== shot\n{}\n=== query\n{}\n", set.body, set.shot, set.query);
            if let (Some(yes), Some(no)) = (&set.yes, &set.no) {
                text.push_str(&format!("=== yes\n{yes}\n=== no\n{no}\n"));
            }
            crate::io::write_text(&dir.join(key.relative_path()), &text)?;
        }
        Ok(())
    }

    pub fn get(&self, key: TemplateKey) -> Result<&TemplateSet> {
        self.sets.get(&key).ok_or_else(|| Error::MissingTemplate(vec![key.to_string()]))
    }
}

/// One demonstration: an instance plus, for systematicity, the option shown.
#[derive(Debug, Clone, Copy)]
pub struct Demo<'a> {
    pub instance: &'a TaskInstance,
    pub option: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub instance_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub option_index: Option<usize>,
    pub task: Task,
    pub instruction_language: InstructionLanguage,
    pub variant: Variant,
    pub prompt: String,
    /// Instance ids of the demonstrations, in prompt order.
    pub demos: Vec<String>,
}

fn substitute(template: &str, fields: &BTreeMap<&str, String>) -> String {
    let mut out = String::with_capacity(template.len() + 64);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}').and_then(|close| fields.get(&after[..close]).map(|v| (close, v))) {
            Some((close, value)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

fn example_fields(
    set: &TemplateSet,
    language: &str,
    index: usize,
    instance: &TaskInstance,
    option: Option<usize>,
) -> Result<BTreeMap<&'static str, String>> {
    let mut f = BTreeMap::new();
    f.insert("language", language.to_string());
    f.insert("index", index.to_string());
    f.insert("root", instance.shown_root.clone());
    f.insert("definition", instance.definition.clone().unwrap_or_default());
    f.insert("sentence", instance.context_sentence.clone().unwrap_or_default());

    let affixes = match (instance.task, option) {
        (Task::Systematicity, Some(i)) => &instance.options[i].affixes,
        _ => &instance.presented_affixes,
    };
    f.insert(
        "affixes",
        affixes.iter().map(|a| a.form.as_str()).collect::<Vec<_>>().join(", "),
    );
    match instance.task {
        Task::Productivity => {
            f.insert("answer", instance.gold_surface.clone().unwrap_or_default());
        }
        Task::Systematicity => {
            let i = option.ok_or_else(|| {
                Error::Config(format!("systematicity instance {} needs an option index", instance.instance_id))
            })?;
            let opt = instance.options.get(i).ok_or_else(|| {
                Error::Config(format!("instance {} has no option {i}", instance.instance_id))
            })?;
            f.insert("derived_word", opt.surface.clone());
            let word = match opt.label {
                Label::Valid => set.yes.clone(),
                Label::Invalid => set.no.clone(),
            };
            f.insert("answer", word.unwrap_or_default());
        }
    }
    Ok(f)
}

fn check_instance(set: &TemplateSet, instance: &TaskInstance) -> Result<()> {
    if set.key.variant == Variant::Context && instance.context_sentence.is_none() {
        return Err(Error::MissingContext(instance.record_id.clone()));
    }
    if set.key.distribution == Distribution::Ood && instance.definition.is_none() {
        return Err(Error::MissingNonce(instance.record_id.clone()));
    }
    if instance.task != set.key.task || instance.distribution != set.key.distribution {
        return Err(Error::Config(format!(
            "instance {} does not fit template {}",
            instance.instance_id, set.key
        )));
    }
    Ok(())
}

/// Renders demonstrations followed by the unanswered query.
pub fn render_prompt(
    set: &TemplateSet,
    query: &TaskInstance,
    query_option: Option<usize>,
    demos: &[Demo<'_>],
) -> Result<String> {
    let language = set.key.instruction_language.language_name(query.language);
    let mut blocks = Vec::with_capacity(demos.len() + 1);
    for (i, demo) in demos.iter().enumerate() {
        check_instance(set, demo.instance)?;
        let fields = example_fields(set, language, i + 1, demo.instance, demo.option)?;
        blocks.push(substitute(&set.shot, &fields));
    }
    check_instance(set, query)?;
    let fields = example_fields(set, language, demos.len() + 1, query, query_option)?;
    blocks.push(substitute(&set.query, &fields));

    let mut body_fields = BTreeMap::new();
    body_fields.insert("language", language.to_string());
    body_fields.insert("examples", blocks.join("\n\n"));
    Ok(substitute(&set.body, &body_fields))
}

/// Picks `n_shots` demonstrations for `instance` from `pool`: same task,
/// distribution and morpheme count, demo split only, never the same record.
/// Selection depends only on the seed and the instance id.
pub fn select_demos<'a>(
    instance: &TaskInstance,
    pool: &'a [TaskInstance],
    n_shots: usize,
    seed: u64,
) -> Result<Vec<Demo<'a>>> {
    let eligible: Vec<&TaskInstance> = pool
        .iter()
        .filter(|d| {
            d.split == Split::Demo
                && d.task == instance.task
                && d.distribution == instance.distribution
                && d.morpheme_count == instance.morpheme_count
                && d.record_id != instance.record_id
        })
        .collect();
    if eligible.len() < n_shots {
        return Err(Error::InsufficientDemos {
            instance: instance.instance_id.clone(),
            morphemes: instance.morpheme_count,
            needed: n_shots,
            found: eligible.len(),
        });
    }
    let mut rng = seed::rng_for(seed, &["demos", &instance.instance_id]);
    let picked = index::sample(&mut rng, eligible.len(), n_shots);
    Ok(picked
        .into_iter()
        .map(|i| {
            let d = eligible[i];
            let option = (d.task == Task::Systematicity).then(|| rng.random_range(0..d.options.len()));
            Demo { instance: d, option }
        })
        .collect())
}

/// Renders every prompt for `instance`: one for productivity, one per option
/// for systematicity, all sharing the same demonstrations.
pub fn render(
    instance: &TaskInstance,
    set: &TemplateSet,
    n_shots: usize,
    pool: &[TaskInstance],
    seed: u64,
) -> Result<Vec<PromptRecord>> {
    let demos = select_demos(instance, pool, n_shots, seed)?;
    let demo_ids: Vec<String> = demos.iter().map(|d| d.instance.instance_id.clone()).collect();
    let options: Vec<Option<usize>> = match instance.task {
        Task::Productivity => vec![None],
        Task::Systematicity => (0..instance.options.len()).map(Some).collect(),
    };
    options
        .into_iter()
        .map(|option| {
            Ok(PromptRecord {
                instance_id: instance.instance_id.clone(),
                option_index: option,
                task: instance.task,
                instruction_language: set.key.instruction_language,
                variant: set.key.variant,
                prompt: render_prompt(set, instance, option, &demos)?,
                demos: demo_ids.clone(),
            })
        })
        .collect()
}

/// Renders all evaluation instances of a suite; demo-split instances only
/// serve as demonstrations.
pub fn render_suite(
    suite: &[TaskInstance],
    catalog: &TemplateCatalog,
    lang: InstructionLanguage,
    variant: Variant,
    n_shots: usize,
    seed: u64,
) -> Result<Vec<PromptRecord>> {
    let mut out = Vec::new();
    for inst in suite.iter().filter(|i| i.split == Split::Eval) {
        let set = catalog.get(TemplateKey::new(lang, variant, inst.task, inst.distribution))?;
        out.extend(render(inst, set, n_shots, suite, seed)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::Slot;
    use crate::suite::{OrderMode, PresentedAffix, SystematicityOption};

    fn affixes(forms: &[&str]) -> Vec<PresentedAffix> {
        forms
            .iter()
            .map(|f| PresentedAffix {
                form: f.to_string(),
                slot: Slot::Suffix,
            })
            .collect()
    }

    fn prod(id: &str, root: &str, forms: &[&str], gold: &str, split: Split) -> TaskInstance {
        TaskInstance {
            instance_id: format!("{id}/productivity/id"),
            record_id: id.into(),
            task: Task::Productivity,
            distribution: Distribution::Id,
            language: Language::Turkish,
            split,
            shown_root: root.into(),
            definition: None,
            presented_affixes: affixes(forms),
            order_mode: OrderMode::Shuffled,
            context_sentence: None,
            morpheme_count: forms.len(),
            options: vec![],
            gold_surface: Some(gold.into()),
            alternatives: vec![],
            gold_order: affixes(forms),
        }
    }

    #[test]
    fn bundled_catalog_is_complete() {
        let c = TemplateCatalog::bundled();
        assert_eq!(c.sets.len(), 48);
    }

    #[test]
    fn english_productivity_opens_with_instruction() {
        let c = TemplateCatalog::bundled();
        let key = TemplateKey::new(InstructionLanguage::English, Variant::Standard, Task::Productivity, Distribution::Id);
        let demo = prod("a", "bulaş", &["ma", "sa", "tır", "ydı", "k"], "bulaştırmasaydık", Split::Demo);
        let query = prod("b", "bekle", &["me", "di", "z", "n", "e"], "beklemediniz", Split::Eval);
        let text = render_prompt(c.get(key).unwrap(), &query, None, &[Demo { instance: &demo, option: None }]).unwrap();
        assert!(text.starts_with("You are given a word root and a list of affixes"));
        assert!(text.ends_with("Example 2:\nWord root: bekle\nAffixes: me, di, z, n, e\nAnswer:"));
        assert!(!text.contains("beklemediniz"));
    }

    #[test]
    fn turkish_ood_systematicity_uses_evet_hayir() {
        let c = TemplateCatalog::bundled();
        let key = TemplateKey::new(InstructionLanguage::Turkish, Variant::Standard, Task::Systematicity, Distribution::Ood);
        assert!(c.get(key).unwrap().body.contains("Sadece Evet veya Hayır ile cevap verin"));
        let key = TemplateKey::new(InstructionLanguage::English, Variant::Cot, Task::Systematicity, Distribution::Id);
        assert!(c.get(key).unwrap().body.contains("within the tags <Answer>Yes/No</Answer>"));
    }

    #[test]
    fn unknown_placeholder_is_rejected() {
        let key = TemplateKey::new(InstructionLanguage::English, Variant::Standard, Task::Productivity, Distribution::Id);
        let text = "=== body\n{foo}\n{examples}\n=== shot\n{root} {affixes} {answer}\n=== query\n{root} {affixes}\n";
        assert!(matches!(TemplateSet::parse(key, text), Err(Error::PlaceholderMismatch { .. })));
        let ood = TemplateKey { distribution: Distribution::Ood, ..key };
        let text = "=== body\n{examples}\n=== shot\n{root} {affixes} {answer}\n=== query\n{root} {affixes}\n";
        assert!(TemplateSet::parse(key, text).is_ok());
        assert!(matches!(TemplateSet::parse(ood, text), Err(Error::PlaceholderMismatch { .. })));
    }

    #[test]
    fn missing_file_is_listed() {
        let dir = tempfile::tempdir().unwrap();
        TemplateCatalog::bundled().write(dir.path()).unwrap();
        assert_eq!(TemplateCatalog::load(dir.path()).unwrap().sets.len(), 48);
        std::fs::remove_file(dir.path().join("fi/cot/systematicity_ood.txt")).unwrap();
        match TemplateCatalog::load(dir.path()) {
            Err(Error::MissingTemplate(keys)) => assert_eq!(keys, vec!["fi/cot/systematicity_ood.txt".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn demos_match_morpheme_count_and_are_deterministic() {
        let mut pool: Vec<TaskInstance> = (0..8)
            .map(|i| prod(&format!("d{i}"), "ev", &["ler", "de"], "evlerde", Split::Demo))
            .collect();
        pool.extend((0..8).map(|i| prod(&format!("t{i}"), "ev", &["ler", "de", "ki"], "evlerdeki", Split::Demo)));
        let query = prod("q", "göz", &["ler", "de"], "gözlerde", Split::Eval);
        let a = select_demos(&query, &pool, 5, 1).unwrap();
        assert!(a.iter().all(|d| d.instance.morpheme_count == 2));
        let b = select_demos(&query, &pool, 5, 1).unwrap();
        let ids = |v: &[Demo]| v.iter().map(|d| d.instance.record_id.clone()).collect::<Vec<_>>();
        assert_eq!(ids(&a), ids(&b));
        assert!(matches!(
            select_demos(&query, &pool[..3], 5, 1),
            Err(Error::InsufficientDemos { found: 3, .. })
        ));
    }

    #[test]
    fn systematicity_renders_one_prompt_per_option() {
        let c = TemplateCatalog::bundled();
        let key = TemplateKey::new(InstructionLanguage::English, Variant::Standard, Task::Systematicity, Distribution::Id);
        let mut inst = prod("s", "sıra", &["dan", "mış"], "sıradanmış", Split::Eval);
        inst.task = Task::Systematicity;
        inst.instance_id = "s/systematicity/id".into();
        inst.gold_surface = None;
        inst.options = vec![
            SystematicityOption { surface: "sıramışdan".into(), label: Label::Invalid, affixes: affixes(&["mış", "dan"]) },
            SystematicityOption { surface: "sıradanmış".into(), label: Label::Valid, affixes: affixes(&["mış", "dan"]) },
        ];
        let prompts = render(&inst, c.get(key).unwrap(), 0, &[], 0).unwrap();
        assert_eq!(prompts.len(), 2);
        assert!(prompts[0].prompt.ends_with("Derived word: sıramışdan\nAnswer:"));
        assert_eq!(prompts[1].option_index, Some(1));
    }

    #[test]
    fn placeholder_scan_ignores_non_identifiers() {
        let found = placeholders("{root} {} { x} <Answer>Yes/No</Answer> {derived_word}");
        assert_eq!(found.into_iter().collect::<Vec<_>>(), vec!["derived_word", "root"]);
    }
}
