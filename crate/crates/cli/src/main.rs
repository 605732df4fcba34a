//! `morphcomp` command-line interface.
//!
//! Every subcommand reads and writes files only; diagnostics go to stderr.
//! Exit status: 0 success, 1 usage or validation error, 2 transport error.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use morphcomp::derivation::{KPolicy, NegativeStrategy, SegmentedWord, DEFAULT_ORDERING_CAP};
use morphcomp::eval_client::{self, EvalRecord, ModelConfig, Parsed, Provider, ResponseCache};
use morphcomp::lang_profile::{Language, LanguageProfile};
use morphcomp::prompting::{self, InstructionLanguage, PromptRecord, TemplateCatalog, Variant};
use morphcomp::report::{self, ScoreReport};
use morphcomp::seed::sha256_hex;
use morphcomp::suite::{self, Diagnostic, Distribution, OrderMode, SuiteConfig, Task, TaskInstance};
use morphcomp::{io, metrics, nonce, Error, Result};

#[derive(Parser)]
#[command(name = "morphcomp", version, about = "Build and score morphological generalization suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Attach a nonce root to every record.
    GenNonce(GenNonceArgs),
    /// Sample records and build task instances.
    BuildSuite(BuildSuiteArgs),
    /// Render few-shot prompts for a suite.
    Render(RenderArgs),
    /// Query a model (or a built-in baseline) with rendered prompts.
    Evaluate(EvaluateArgs),
    /// Score evaluation records against their suite.
    Score(ScoreArgs),
    /// Cohen's kappa between two annotation files.
    Kappa(KappaArgs),
    /// Merge score reports into comparison tables.
    Report(ReportArgs),
}

/// Where arguments may come from besides the command line.
#[derive(Args, Default)]
struct Source {
    /// JSON object whose keys override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run manifest whose recorded args are reused; flags given explicitly win.
    #[arg(long)]
    replay: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenNonceArgs {
    #[command(flatten)]
    #[serde(skip)]
    source: Source,
    #[arg(long, required_unless_present_any = ["config", "replay"])]
    lang: Option<Language>,
    #[arg(long = "in", required_unless_present_any = ["config", "replay"])]
    input: Option<PathBuf>,
    #[arg(long, required_unless_present_any = ["config", "replay"])]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Real words that nonces must avoid, one per line. Corpus roots are always added.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Language profile replacing the bundled one.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Where to write the nonce mapping table (JSONL).
    #[arg(long)]
    mappings: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BuildSuiteArgs {
    #[command(flatten)]
    #[serde(skip)]
    source: Source,
    #[arg(long, required_unless_present_any = ["config", "replay"])]
    lang: Option<Language>,
    #[arg(long, required_unless_present_any = ["config", "replay"])]
    task: Option<Task>,
    #[arg(long = "dist", required_unless_present_any = ["config", "replay"])]
    distribution: Option<Distribution>,
    /// Attach each record's context sentence.
    #[arg(long)]
    context: bool,
    #[arg(long = "order", default_value = "shuffled")]
    order_mode: OrderMode,
    #[arg(long, default_value = "lang_agnostic")]
    strategy: NegativeStrategy,
    /// Negatives per item: "auto" (1 up to two morphemes, else 4) or a number.
    #[arg(long, default_value = "auto")]
    k: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 150)]
    per_stratum: usize,
    #[arg(long, default_value_t = 1)]
    min_morphemes: usize,
    /// Defaults to 7 for Turkish and 6 for Finnish.
    #[arg(long)]
    max_morphemes: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    demo_fraction: f64,
    #[arg(long, default_value_t = 5)]
    min_demos: usize,
    #[arg(long, default_value_t = DEFAULT_ORDERING_CAP)]
    ordering_cap: usize,
    #[arg(long = "in", required_unless_present_any = ["config", "replay"])]
    input: Option<PathBuf>,
    #[arg(long, required_unless_present_any = ["config", "replay"])]
    out: Option<PathBuf>,
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RenderArgs {
    #[command(flatten)]
    #[serde(skip)]
    source: Source,
    #[arg(long, required_unless_present_any = ["config", "replay"])]
    suite: Option<PathBuf>,
    /// Template directory; the bundled catalogue when absent.
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Instruction language: en, tr or fi.
    #[arg(long = "lang", default_value = "en")]
    instruction_language: InstructionLanguage,
    #[arg(long, default_value = "standard")]
    variant: Variant,
    #[arg(long, default_value_t = 5)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, required_unless_present_any = ["config", "replay"])]
    out: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvaluateArgs {
    #[command(flatten)]
    #[serde(skip)]
    source: Source,
    #[arg(long, required_unless_present_any = ["config", "replay"])]
    prompts: Option<PathBuf>,
    /// Suite the prompts were rendered from; supplies gold answers.
    #[arg(long, required_unless_present_any = ["config", "replay"])]
    suite: Option<PathBuf>,
    /// Model configuration (JSON).
    #[arg(long, conflicts_with = "mock")]
    model_config: Option<PathBuf>,
    /// Built-in model instead of a configuration file: echo-gold, random or majority.
    #[arg(long)]
    mock: Option<String>,
    /// Seed for the random baseline when --mock is used.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, required_unless_present_any = ["config", "replay"])]
    out: Option<PathBuf>,
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScoreArgs {
    #[command(flatten)]
    #[serde(skip)]
    source: Source,
    #[arg(long, required_unless_present_any = ["config", "replay"])]
    records: Option<PathBuf>,
    #[arg(long, required_unless_present_any = ["config", "replay"])]
    suite: Option<PathBuf>,
    /// Receives report.json, report.csv, report.txt and manifest.json.
    #[arg(long, required_unless_present_any = ["config", "replay"])]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KappaArgs {
    #[command(flatten)]
    #[serde(skip)]
    source: Source,
    /// Labels of the first annotator: one JSON value, or {"id", "label"} object, per line.
    #[arg(long, required_unless_present_any = ["config", "replay"])]
    a: Option<PathBuf>,
    #[arg(long, required_unless_present_any = ["config", "replay"])]
    b: Option<PathBuf>,
    #[arg(long, required_unless_present_any = ["config", "replay"])]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportArgs {
    #[command(flatten)]
    #[serde(skip)]
    source: Source,
    /// report.json files to merge.
    #[arg(long, num_args = 1.., required_unless_present_any = ["config", "replay"])]
    reports: Vec<PathBuf>,
    #[arg(long, required_unless_present_any = ["config", "replay"])]
    out_dir: Option<PathBuf>,
}

fn need<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Error::Config(format!("missing required argument --{flag}")))
}

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest<'a, A: Serialize, D: Serialize> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    args: &'a A,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    details: D,
}

fn digest(path: &Path) -> Result<FileDigest> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

fn write_manifest<A: Serialize, D: Serialize>(
    path: &Path,
    command: &str,
    args: &A,
    inputs: &[&Path],
    outputs: &[&Path],
    details: D,
) -> Result<()> {
    let manifest = RunManifest {
        tool: morphcomp::TOOL_NAME,
        version: morphcomp::VERSION,
        command,
        args,
        inputs: inputs.iter().map(|p| digest(p)).collect::<Result<_>>()?,
        outputs: outputs.iter().map(|p| digest(p)).collect::<Result<_>>()?,
        details,
    };
    io::write_json(path, &manifest)
}

fn json_object(path: &Path) -> Result<serde_json::Map<String, Value>> {
    match io::read_json::<Value>(path)? {
        Value::Object(map) => Ok(map),
        _ => Err(Error::Config(format!("{}: expected a JSON object", path.display()))),
    }
}

trait HasSource {
    fn source(&self) -> &Source;
    fn source_mut(&mut self) -> &mut Source;
}

macro_rules! has_source {
    ($($t:ty),*) => {$(
        impl HasSource for $t {
            fn source(&self) -> &Source { &self.source }
            fn source_mut(&mut self) -> &mut Source { &mut self.source }
        }
    )*};
}
has_source!(GenNonceArgs, BuildSuiteArgs, RenderArgs, EvaluateArgs, ScoreArgs, KappaArgs, ReportArgs);

/// Combines the parsed flags with `--replay` and `--config`. Precedence,
/// lowest first: defaults, replayed args, explicit flags, config keys.
fn resolve<A>(args: A, matches: &ArgMatches) -> Result<A>
where
    A: Serialize + DeserializeOwned + HasSource,
{
    let config = args.source().config.clone();
    let replay = args.source().replay.clone();
    if config.is_none() && replay.is_none() {
        return Ok(args);
    }
    let mut value = serde_json::to_value(&args)?;
    let target = value.as_object_mut().expect("args serialize to an object");
    if let Some(path) = &replay {
        let manifest = json_object(path)?;
        let Some(Value::Object(recorded)) = manifest.get("args") else {
            return Err(Error::Config(format!("{}: no recorded args", path.display())));
        };
        for (k, v) in recorded {
            let explicit = matches!(
                matches.try_get_raw(k),
                Ok(Some(_)) if matches.value_source(k) == Some(ValueSource::CommandLine)
            );
            if !explicit {
                target.insert(k.clone(), v.clone());
            }
        }
    }
    if let Some(path) = &config {
        for (k, v) in json_object(path)? {
            target.insert(k, v);
        }
    }
    let mut merged: A = serde_json::from_value(value)
        .map_err(|e| Error::Config(format!("invalid arguments after merging: {e}")))?;
    *merged.source_mut() = Source { config, replay };
    Ok(merged)
}

fn load_profile(lang: Language, path: Option<&Path>) -> Result<LanguageProfile> {
    let profile = match path {
        Some(p) => LanguageProfile::load(p)?,
        None => LanguageProfile::bundled(lang),
    };
    if profile.language != lang {
        return Err(Error::Config(format!(
            "profile is for {}, but the run is for {lang}",
            profile.language
        )));
    }
    Ok(profile)
}

fn parse_k(k: &str) -> Result<KPolicy> {
    if k.eq_ignore_ascii_case("auto") {
        return Ok(KPolicy::ByMorphemeCount);
    }
    match k.parse::<usize>() {
        Ok(n) if n > 0 => Ok(KPolicy::Fixed(n)),
        _ => Err(Error::Config(format!("--k must be \"auto\" or a positive number, got {k:?}"))),
    }
}

fn report_rejected(rejected: &[Diagnostic]) {
    for d in rejected {
        eprintln!(
            "rejected line {}{}: {}",
            d.line.map_or_else(|| "?".into(), |l| l.to_string()),
            d.record_id.as_deref().map_or_else(String::new, |id| format!(" ({id})")),
            d.message
        );
    }
}

#[derive(Serialize)]
struct NonceDetails {
    records: usize,
    rejected: Vec<Diagnostic>,
    failed: Vec<Diagnostic>,
    lexicon_size: usize,
    external_lexicon: bool,
}

fn gen_nonce(args: GenNonceArgs) -> Result<()> {
    let lang = *need(&args.lang, "lang")?;
    let input = need(&args.input, "in")?;
    let out = need(&args.out, "out")?;
    let profile = load_profile(lang, args.profile.as_deref())?;
    let ingested = suite::ingest(input, &profile)?;
    report_rejected(&ingested.rejected);

    let mut lexicon: HashSet<String> = ingested.records.iter().map(|r| r.root.clone()).collect();
    match &args.lexicon {
        Some(path) => {
            for line in io::read_text(path)?.lines() {
                let word = profile.case_fold(line.trim());
                if !word.is_empty() {
                    lexicon.insert(word);
                }
            }
        }
        None => eprintln!("warning: no --lexicon; nonces are only checked against corpus roots"),
    }

    let mut records: Vec<SegmentedWord> = Vec::with_capacity(ingested.records.len());
    let mut mappings = Vec::new();
    let mut failed = Vec::new();
    for mut rec in ingested.records {
        match nonce::generate(&rec.root, &rec.record_id, &profile, &lexicon, args.seed) {
            Ok(m) => {
                rec.nonce_root = Some(m.nonce_root.clone());
                mappings.push(m);
            }
            Err(e) => {
                eprintln!("{}: {e}", rec.record_id);
                failed.push(Diagnostic {
                    line: None,
                    record_id: Some(rec.record_id.clone()),
                    message: e.to_string(),
                });
            }
        }
        records.push(rec);
    }
    io::write_jsonl(out, &records)?;
    let mut outputs = vec![out.as_path()];
    if let Some(path) = &args.mappings {
        io::write_jsonl(path, &mappings)?;
        outputs.push(path);
    }
    eprintln!("{} records, {} nonces, {} failures", records.len(), mappings.len(), failed.len());
    if let Some(path) = &args.manifest {
        let mut inputs = vec![input.as_path()];
        inputs.extend(args.lexicon.as_deref());
        let details = NonceDetails {
            records: records.len(),
            rejected: ingested.rejected,
            failed,
            lexicon_size: lexicon.len(),
            external_lexicon: args.lexicon.is_some(),
        };
        write_manifest(path, "gen-nonce", &args, &inputs, &outputs, details)?;
    }
    Ok(())
}

fn build_suite(args: BuildSuiteArgs) -> Result<()> {
    let lang = *need(&args.lang, "lang")?;
    let input = need(&args.input, "in")?;
    let out = need(&args.out, "out")?;
    let profile = load_profile(lang, args.profile.as_deref())?;
    let mut cfg = SuiteConfig::new(lang, *need(&args.task, "task")?, *need(&args.distribution, "dist")?);
    cfg.seed = args.seed;
    cfg.context = args.context;
    cfg.order_mode = args.order_mode;
    cfg.strategy = args.strategy;
    cfg.k_policy = parse_k(&args.k)?;
    cfg.per_stratum = args.per_stratum;
    cfg.min_morphemes = args.min_morphemes;
    if let Some(max) = args.max_morphemes {
        cfg.max_morphemes = max;
    }
    cfg.demo_fraction = args.demo_fraction;
    cfg.min_demos = args.min_demos;
    cfg.ordering_cap = args.ordering_cap;

    let ingested = suite::ingest(input, &profile)?;
    report_rejected(&ingested.rejected);
    let (instances, manifest) =
        suite::build_suite(&ingested, &input.display().to_string(), &cfg, &profile)?;
    for stratum in &manifest.deficits {
        let c = &manifest.strata[stratum];
        eprintln!("stratum {stratum}: {} of {} records available", c.sampled, c.target);
    }
    for d in &manifest.skipped {
        eprintln!("skipped {}: {}", d.record_id.as_deref().unwrap_or("?"), d.message);
    }
    io::write_jsonl(out, &instances)?;
    eprintln!("{} instances written to {}", instances.len(), out.display());
    if let Some(path) = &args.manifest {
        write_manifest(path, "build-suite", &args, &[input], &[out], manifest)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct RenderDetails {
    prompts: usize,
    templates: String,
}

fn render(args: RenderArgs) -> Result<()> {
    let suite_path = need(&args.suite, "suite")?;
    let out = need(&args.out, "out")?;
    let suite: Vec<TaskInstance> = io::read_jsonl(suite_path)?;
    let catalog = match &args.templates {
        Some(dir) => TemplateCatalog::load(dir)?,
        None => TemplateCatalog::bundled(),
    };
    let prompts = prompting::render_suite(
        &suite,
        &catalog,
        args.instruction_language,
        args.variant,
        args.shots,
        args.seed,
    )?;
    io::write_jsonl(out, &prompts)?;
    eprintln!("{} prompts written to {}", prompts.len(), out.display());
    if let Some(path) = &args.manifest {
        let details = RenderDetails {
            prompts: prompts.len(),
            templates: args
                .templates
                .as_ref()
                .map_or_else(|| "bundled".to_string(), |p| p.display().to_string()),
        };
        write_manifest(path, "render", &args, &[suite_path], &[out], details)?;
    }
    Ok(())
}

fn mock_provider(name: &str) -> Result<Provider> {
    match name {
        "echo-gold" => Ok(Provider::EchoGold),
        "random" => Ok(Provider::Random),
        "majority" => Ok(Provider::Majority),
        other => Err(Error::Config(format!(
            "unknown mock {other:?} (expected echo-gold, random or majority)"
        ))),
    }
}

#[derive(Serialize)]
struct EvaluateDetails<'a> {
    model: &'a ModelConfig,
    records: usize,
    cached: usize,
    parse_failures: usize,
    normalization: &'a str,
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let prompts_path = need(&args.prompts, "prompts")?;
    let suite_path = need(&args.suite, "suite")?;
    let out = need(&args.out, "out")?;
    let cfg = match (&args.model_config, &args.mock) {
        (Some(_), Some(_)) => {
            return Err(Error::Config("--model-config and --mock are exclusive".into()))
        }
        (Some(path), None) => io::read_json::<ModelConfig>(path)?,
        (None, Some(name)) => {
            let mut cfg = ModelConfig::mock(mock_provider(name)?);
            cfg.seed = args.seed;
            cfg
        }
        (None, None) => return Err(Error::Config("give --model-config or --mock".into())),
    };
    cfg.validate()?;
    let prompts: Vec<PromptRecord> = io::read_jsonl(prompts_path)?;
    let suite: Vec<TaskInstance> = io::read_jsonl(suite_path)?;
    let language = suite
        .first()
        .map(|i| i.language)
        .ok_or_else(|| Error::Config("suite is empty".into()))?;
    let profile = load_profile(language, args.profile.as_deref())?;
    let instances: HashMap<String, TaskInstance> =
        suite.into_iter().map(|i| (i.instance_id.clone(), i)).collect();
    let cache = args.cache.as_deref().map(ResponseCache::open).transpose()?;

    let records = eval_client::evaluate(&prompts, &instances, &cfg, cache.as_ref(), &profile)?;
    io::write_jsonl(out, &records)?;
    let cached = records.iter().filter(|r| r.cached).count();
    let failures = records.iter().filter(|r| r.parsed == Parsed::ParseFailure).count();
    eprintln!(
        "{} responses ({cached} from cache, {failures} unparseable) written to {}",
        records.len(),
        out.display()
    );
    if let Some(path) = &args.manifest {
        let mut inputs = vec![prompts_path.as_path(), suite_path.as_path()];
        inputs.extend(args.model_config.as_deref());
        let details = EvaluateDetails {
            model: &cfg,
            records: records.len(),
            cached,
            parse_failures: failures,
            normalization: report::NORMALIZATION,
        };
        write_manifest(path, "evaluate", &args, &inputs, &[out], details)?;
    }
    Ok(())
}

fn score(args: ScoreArgs) -> Result<()> {
    let records_path = need(&args.records, "records")?;
    let suite_path = need(&args.suite, "suite")?;
    let out_dir = need(&args.out_dir, "out-dir")?;
    let records: Vec<EvalRecord> = io::read_jsonl(records_path)?;
    let suite: Vec<TaskInstance> = io::read_jsonl(suite_path)?;
    let mut report: ScoreReport = report::stratify_report(&records, &suite)?;
    report.manifest = Some("manifest.json".into());
    report.write(out_dir)?;
    eprint!("{}", report.to_text());
    let outputs: Vec<PathBuf> = ["report.json", "report.csv", "report.txt"]
        .iter()
        .map(|f| out_dir.join(f))
        .collect();
    let outputs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    write_manifest(
        &out_dir.join("manifest.json"),
        "score",
        &args,
        &[records_path, suite_path],
        &outputs,
        (),
    )
}

#[derive(Deserialize)]
#[serde(untagged)]
enum LabelLine {
    Keyed { id: Option<Value>, label: Value },
    Bare(Value),
}

fn label_text(v: Value) -> String {
    match v {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

fn read_labels(path: &Path) -> Result<Vec<(Option<String>, String)>> {
    let lines: Vec<LabelLine> = io::read_jsonl(path)?;
    Ok(lines
        .into_iter()
        .map(|l| match l {
            LabelLine::Keyed { id, label } => (id.map(label_text), label_text(label)),
            LabelLine::Bare(v) => (None, label_text(v)),
        })
        .collect())
}

#[derive(Serialize)]
struct KappaOutput {
    n: usize,
    observed_agreement: f64,
    kappa: f64,
    /// Label → (count in a, count in b).
    labels: BTreeMap<String, (usize, usize)>,
}

fn kappa(args: KappaArgs) -> Result<()> {
    let a = read_labels(need(&args.a, "a")?)?;
    let b = read_labels(need(&args.b, "b")?)?;
    let out = need(&args.out, "out")?;
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    for (i, ((ia, _), (ib, _))) in a.iter().zip(&b).enumerate() {
        if let (Some(x), Some(y)) = (ia, ib) {
            if x != y {
                return Err(Error::Config(format!("line {}: id {x} does not match id {y}", i + 1)));
            }
        }
    }
    let la: Vec<String> = a.into_iter().map(|(_, l)| l).collect();
    let lb: Vec<String> = b.into_iter().map(|(_, l)| l).collect();
    let k: f64 = metrics::cohens_kappa(&la, &lb)?;
    let mut labels: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for l in &la {
        labels.entry(l.clone()).or_default().0 += 1;
    }
    for l in &lb {
        labels.entry(l.clone()).or_default().1 += 1;
    }
    let agree = la.iter().zip(&lb).filter(|(x, y)| x == y).count();
    let result = KappaOutput {
        n: la.len(),
        observed_agreement: agree as f64 / la.len() as f64,
        kappa: k,
        labels,
    };
    io::write_json(out, &result)?;
    eprintln!("kappa = {k:.4} over {} items", result.n);
    Ok(())
}

fn merge(args: ReportArgs) -> Result<()> {
    if args.reports.is_empty() {
        return Err(Error::Config("missing required argument --reports".into()));
    }
    let out_dir = need(&args.out_dir, "out-dir")?;
    let reports: Vec<ScoreReport> = args
        .reports
        .iter()
        .map(|p| io::read_json(p))
        .collect::<Result<_>>()?;
    let (text, csv) = report::merge_reports(&reports);
    let txt_path = out_dir.join("comparison.txt");
    let csv_path = out_dir.join("comparison.csv");
    io::write_text(&txt_path, &text)?;
    io::write_text(&csv_path, &csv)?;
    eprint!("{text}");
    let inputs: Vec<&Path> = args.reports.iter().map(PathBuf::as_path).collect();
    write_manifest(
        &out_dir.join("manifest.json"),
        "report",
        &args,
        &inputs,
        &[&txt_path, &csv_path],
        (),
    )
}

fn dispatch<A>(matches: &ArgMatches, f: fn(A) -> Result<()>) -> Result<()>
where
    A: FromArgMatches + Serialize + DeserializeOwned + HasSource,
{
    let args = A::from_arg_matches(matches).map_err(|e| Error::Config(e.to_string()))?;
    f(resolve(args, matches)?)
}

fn run(matches: &ArgMatches) -> Result<()> {
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    match name {
        "gen-nonce" => dispatch(sub, gen_nonce),
        "build-suite" => dispatch(sub, build_suite),
        "render" => dispatch(sub, render),
        "evaluate" => dispatch(sub, evaluate),
        "score" => dispatch(sub, score),
        "kappa" => dispatch(sub, kappa),
        "report" => dispatch(sub, merge),
        other => Err(Error::Config(format!("unknown subcommand {other}"))),
    }
}

fn main() -> ExitCode {
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_transport() { 2 } else { 1 })
        }
    }
}
