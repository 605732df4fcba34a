//! Model access: chat-completion requests over HTTP, built-in baseline and
//! mock models, a content-addressed response cache, and answer parsing.

use std::collections::HashMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::derivation::{compose, Affix, Slot};
use crate::error::{Error, Result};
use crate::lang_profile::LanguageProfile;
use crate::prompting::{InstructionLanguage, PromptRecord, Variant};
use crate::seed::{self, sha256_hex};
use crate::suite::{Label, Task, TaskInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provider {
    /// OpenAI-style chat-completions endpoint.
    Http,
    /// Answers every item correctly; a pipeline self-check.
    EchoGold,
    /// Random affix order for productivity, fair coin for systematicity.
    Random,
    /// Always "no" for systematicity; no answer for productivity.
    Majority,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub model_name: String,
    #[serde(default = "default_provider")]
    pub provider: Provider,
    #[serde(default)]
    pub endpoint_url: Option<String>,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "one")]
    pub top_p: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff")]
    pub backoff_base_ms: u64,
    /// Name of the environment variable holding the bearer token.
    #[serde(default)]
    pub auth_token_env: Option<String>,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    /// Seed for the random baseline.
    #[serde(default)]
    pub seed: u64,
}

fn default_provider() -> Provider {
    Provider::Http
}
fn one() -> f64 {
    1.0
}
fn default_max_tokens() -> u32 {
    256
}
fn default_timeout() -> u64 {
    60
}
fn default_retries() -> u32 {
    3
}
fn default_backoff() -> u64 {
    500
}
fn default_parallelism() -> usize {
    4
}

impl ModelConfig {
    pub fn mock(provider: Provider) -> ModelConfig {
        let name = match provider {
            Provider::Http => "http",
            Provider::EchoGold => "echo-gold",
            Provider::Random => "random",
            Provider::Majority => "majority",
        };
        ModelConfig {
            model_name: name.to_string(),
            provider,
            endpoint_url: None,
            temperature: 0.0,
            top_p: 1.0,
            max_tokens: default_max_tokens(),
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            backoff_base_ms: default_backoff(),
            auth_token_env: None,
            parallelism: default_parallelism(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0) {
            return Err(Error::Config(format!("temperature must be >= 0, got {}", self.temperature)));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(Error::Config(format!("top_p must be in (0, 1], got {}", self.top_p)));
        }
        if self.provider == Provider::Http && self.endpoint_url.is_none() {
            return Err(Error::Config("http provider needs endpoint_url".into()));
        }
        if self.parallelism == 0 {
            return Err(Error::Config("parallelism must be at least 1".into()));
        }
        Ok(())
    }

    /// Digest of everything that can change a response.
    pub fn cache_key(&self, prompt: &str) -> String {
        let key = serde_json::json!({
            "endpoint": self.endpoint_url,
            "model": self.model_name,
            "temperature": self.temperature,
            "top_p": self.top_p,
            "max_tokens": self.max_tokens,
            "prompt": prompt,
        });
        sha256_hex(key.to_string().as_bytes())
    }
}

/// Directory of response files named by cache key. Writes go through a
/// temporary file and a rename, so readers never see partial entries.
#[derive(Debug, Clone)]
pub struct ResponseCache {
    dir: PathBuf,
}

impl ResponseCache {
    pub fn open(dir: &Path) -> Result<ResponseCache> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(ResponseCache { dir: dir.to_path_buf() })
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.txt"))
    }

    pub fn get(&self, key: &str) -> Result<Option<String>> {
        let path = self.path(key);
        match fs::read_to_string(&path) {
            Ok(text) => Ok(Some(text)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(&path, e)),
        }
    }

    pub fn put(&self, key: &str, response: &str) -> Result<()> {
        let path = self.path(key);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        tmp.write_all(response.as_bytes()).map_err(|e| Error::io(tmp.path(), e))?;
        tmp.persist(&path).map_err(|e| Error::io(&path, e.error))?;
        Ok(())
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
    top_p: f64,
    max_tokens: u32,
}

/// Blocking chat-completions client with retry.
pub struct HttpClient {
    client: reqwest::blocking::Client,
    cfg: ModelConfig,
    token: Option<String>,
}

impl HttpClient {
    pub fn new(cfg: &ModelConfig) -> Result<HttpClient> {
        cfg.validate()?;
        let token = match &cfg.auth_token_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                Error::Auth(format!("environment variable {var} is not set"))
            })?),
            None => None,
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build()
            .map_err(|e| Error::Transport(e.to_string()))?;
        Ok(HttpClient {
            client,
            cfg: cfg.clone(),
            token,
        })
    }

    fn backoff(&self, attempt: u32) -> Duration {
        Duration::from_millis(self.cfg.backoff_base_ms.saturating_mul(1 << attempt.min(16)))
    }

    /// One completion. 5xx and connection failures are retried with
    /// exponential backoff; 429 waits for its retry-after when given.
    pub fn complete(&self, prompt: &str) -> Result<String> {
        let url = self.cfg.endpoint_url.as_deref().expect("validated");
        let body = ChatRequest {
            model: &self.cfg.model_name,
            messages: vec![ChatMessage { role: "user", content: prompt }],
            temperature: self.cfg.temperature,
            top_p: self.cfg.top_p,
            max_tokens: self.cfg.max_tokens,
        };
        let mut last = Error::Transport("no attempt made".into());
        for attempt in 0..=self.cfg.max_retries {
            if attempt > 0 {
                let wait = match &last {
                    Error::RateLimited { retry_after_secs: Some(s) } => Duration::from_secs(*s),
                    _ => self.backoff(attempt - 1),
                };
                std::thread::sleep(wait);
            }
            let mut req = self.client.post(url).json(&body);
            if let Some(token) = &self.token {
                req = req.bearer_auth(token);
            }
            let resp = match req.send() {
                Ok(r) => r,
                Err(e) => {
                    last = Error::Transport(e.to_string());
                    continue;
                }
            };
            let status = resp.status();
            if status.as_u16() == 401 || status.as_u16() == 403 {
                return Err(Error::Auth(format!("{url} answered {status}")));
            }
            if status.as_u16() == 429 {
                let retry_after_secs = resp
                    .headers()
                    .get(reqwest::header::RETRY_AFTER)
                    .and_then(|v| v.to_str().ok())
                    .and_then(|v| v.trim().parse().ok());
                last = Error::RateLimited { retry_after_secs };
                continue;
            }
            if status.is_server_error() {
                last = Error::Transport(format!("{url} answered {status}"));
                continue;
            }
            if !status.is_success() {
                return Err(Error::Transport(format!("{url} answered {status}")));
            }
            let text = resp.text().map_err(|e| Error::Transport(e.to_string()))?;
            return extract_content(&text);
        }
        Err(match last {
            Error::RateLimited { .. } => last,
            Error::Transport(msg) => Error::Transport(format!(
                "{msg} (after {} attempts)",
                self.cfg.max_retries + 1
            )),
            other => other,
        })
    }
}

fn extract_content(body: &str) -> Result<String> {
    let value: serde_json::Value =
        serde_json::from_str(body).map_err(|e| Error::Transport(format!("malformed response: {e}")))?;
    value["choices"][0]["message"]["content"]
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| Error::Transport("response has no choices[0].message.content".into()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Parsed {
    Word(String),
    Yes,
    No,
    ParseFailure,
}

impl Parsed {
    pub fn label(&self) -> Option<Label> {
        match self {
            Parsed::Yes => Some(Label::Valid),
            Parsed::No => Some(Label::Invalid),
            _ => None,
        }
    }

    pub fn word(&self) -> Option<&str> {
        match self {
            Parsed::Word(w) => Some(w),
            _ => None,
        }
    }
}

const ANSWER_OPEN: &str = "<answer>";
const ANSWER_CLOSE: &str = "</answer>";
const ANSWER_LABELS: &[&str] = &["answer", "cevap", "vastaus", "derived word", "word"];

/// Byte offset of the last ASCII-case-insensitive occurrence of `needle`.
/// `needle` is ASCII, so any match starts on a char boundary.
fn rfind_ascii_ci(haystack: &str, needle: &str, before: usize) -> Option<usize> {
    let (h, n) = (haystack.as_bytes(), needle.as_bytes());
    (0..=before.saturating_sub(n.len()))
        .rev()
        .find(|&i| i + n.len() <= h.len() && h[i..i + n.len()].eq_ignore_ascii_case(n))
}

fn find_ascii_ci(haystack: &str, needle: &str, from: usize) -> Option<usize> {
    let (h, n) = (haystack.as_bytes(), needle.as_bytes());
    (from..h.len().saturating_sub(n.len()) + 1).find(|&i| h[i..i + n.len()].eq_ignore_ascii_case(n))
}

/// Contents of the last `<Answer>…</Answer>` span; an unclosed tag runs to
/// the end of the text.
fn last_answer_span(raw: &str) -> Option<&str> {
    if raw.len() < ANSWER_OPEN.len() {
        return None;
    }
    let open = rfind_ascii_ci(raw, ANSWER_OPEN, raw.len())?;
    let start = open + ANSWER_OPEN.len();
    let end = find_ascii_ci(raw, ANSWER_CLOSE, start).unwrap_or(raw.len());
    Some(&raw[start..end])
}

fn last_nonempty_line(text: &str) -> &str {
    text.lines().rev().map(str::trim).find(|l| !l.is_empty()).unwrap_or("")
}

fn strip_label(line: &str) -> &str {
    if let Some((head, tail)) = line.split_once(':') {
        let head = head.trim().trim_matches(|c: char| !c.is_alphanumeric() && c != ' ');
        if ANSWER_LABELS.contains(&head.to_lowercase().as_str()) {
            return tail.trim();
        }
    }
    line
}

fn trim_punctuation(s: &str) -> &str {
    s.trim_matches(|c: char| !c.is_alphanumeric())
}

/// Extracts the generated word: the last `<Answer>` span if present,
/// otherwise the last nonempty line, without a leading answer label or
/// surrounding punctuation, NFC-normalized and case-folded.
pub fn parse_productivity(raw: &str, profile: &LanguageProfile) -> Parsed {
    let text = last_answer_span(raw).unwrap_or(raw);
    let line = strip_label(last_nonempty_line(text));
    let word = profile.case_fold(trim_punctuation(line));
    if word.is_empty() {
        Parsed::ParseFailure
    } else {
        Parsed::Word(word)
    }
}

/// Maps a yes/no answer in any of the instruction languages to a polarity.
/// The first word of the last nonempty line decides.
pub fn parse_systematicity(raw: &str, cot: bool) -> Parsed {
    let text = if cot { last_answer_span(raw).unwrap_or(raw) } else { raw };
    let line = strip_label(last_nonempty_line(text));
    let first: String = line.nfc().collect::<String>();
    let first = first.split_whitespace().next().map(trim_punctuation).unwrap_or("");
    match first.to_lowercase().as_str() {
        "yes" | "evet" | "kyllä" => Parsed::Yes,
        "no" | "hayır" | "hayir" | "ei" => Parsed::No,
        _ => Parsed::ParseFailure,
    }
}

pub fn parse_response(raw: &str, task: Task, variant: Variant, profile: &LanguageProfile) -> Parsed {
    match task {
        Task::Productivity => parse_productivity(raw, profile),
        Task::Systematicity => parse_systematicity(raw, variant == Variant::Cot),
    }
}

fn yes_no_word(lang: InstructionLanguage, label: Label) -> &'static str {
    match (lang, label) {
        (InstructionLanguage::English, Label::Valid) => "Yes",
        (InstructionLanguage::English, Label::Invalid) => "No",
        (InstructionLanguage::Turkish, Label::Valid) => "Evet",
        (InstructionLanguage::Turkish, Label::Invalid) => "Hayır",
        (InstructionLanguage::Finnish, Label::Valid) => "Kyllä",
        (InstructionLanguage::Finnish, Label::Invalid) => "Ei",
    }
}

/// Composition with each slot block shuffled independently.
pub fn random_composition(instance: &TaskInstance, rng: &mut seed::Rng) -> Result<String> {
    let mut prefixes: Vec<Affix> = Vec::new();
    let mut suffixes: Vec<Affix> = Vec::new();
    for (i, a) in instance.gold_order.iter().enumerate() {
        let affix = Affix {
            form: a.form.clone(),
            slot: a.slot,
            gold_index: i,
        };
        match a.slot {
            Slot::Prefix => prefixes.push(affix),
            Slot::Suffix => suffixes.push(affix),
        }
    }
    prefixes.shuffle(rng);
    suffixes.shuffle(rng);
    prefixes.extend(suffixes);
    compose(&instance.shown_root, &prefixes)
}

/// Raw response of a built-in model for one prompt.
pub fn baseline_response(
    provider: Provider,
    prompt: &PromptRecord,
    instance: &TaskInstance,
    seed_value: u64,
) -> Result<String> {
    let option = prompt.option_index;
    let wrap = |s: &str| {
        if prompt.variant == Variant::Cot {
            format!("<Answer>{s}</Answer>")
        } else {
            s.to_string()
        }
    };
    let option_tag = option.map_or_else(String::new, |o| o.to_string());
    let mut rng = seed::rng_for(seed_value, &["mock", &instance.instance_id, &option_tag]);
    let label = |i: usize| instance.options.get(i).map(|o| o.label);
    Ok(match (provider, instance.task) {
        (Provider::EchoGold, Task::Productivity) => wrap(instance.gold_surface.as_deref().unwrap_or_default()),
        (Provider::EchoGold, Task::Systematicity) => {
            let l = option.and_then(label).ok_or_else(|| missing_option(prompt))?;
            wrap(yes_no_word(prompt.instruction_language, l))
        }
        (Provider::Random, Task::Productivity) => wrap(&random_composition(instance, &mut rng)?),
        (Provider::Random, Task::Systematicity) => {
            let l = if rng.random_bool(0.5) { Label::Valid } else { Label::Invalid };
            wrap(yes_no_word(prompt.instruction_language, l))
        }
        (Provider::Majority, Task::Productivity) => String::new(),
        (Provider::Majority, Task::Systematicity) => wrap(yes_no_word(prompt.instruction_language, Label::Invalid)),
        (Provider::Http, _) => return Err(Error::Config("http provider is not a baseline".into())),
    })
}

fn missing_option(prompt: &PromptRecord) -> Error {
    Error::Config(format!("prompt for {} has no valid option index", prompt.instance_id))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub instance_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub option_index: Option<usize>,
    pub raw_response: String,
    pub parsed: Parsed,
    /// Gold word, or "yes"/"no" for systematicity.
    pub gold: String,
    pub model_name: String,
    pub cached: bool,
}

fn gold_of(prompt: &PromptRecord, instance: &TaskInstance) -> Result<String> {
    match instance.task {
        Task::Productivity => Ok(instance.gold_surface.clone().unwrap_or_default()),
        Task::Systematicity => {
            let opt = prompt
                .option_index
                .and_then(|i| instance.options.get(i))
                .ok_or_else(|| missing_option(prompt))?;
            Ok(match opt.label {
                Label::Valid => "yes",
                Label::Invalid => "no",
            }
            .to_string())
        }
    }
}

/// Runs every prompt against the configured model. Output order follows the
/// input; the first transport or auth failure aborts the run, while already
/// cached responses are kept for the next attempt.
pub fn evaluate(
    prompts: &[PromptRecord],
    instances: &HashMap<String, TaskInstance>,
    cfg: &ModelConfig,
    cache: Option<&ResponseCache>,
    profile: &LanguageProfile,
) -> Result<Vec<EvalRecord>> {
    cfg.validate()?;
    let client = match cfg.provider {
        Provider::Http => Some(HttpClient::new(cfg)?),
        _ => None,
    };
    let one = |p: &PromptRecord| -> Result<EvalRecord> {
        let instance = instances
            .get(&p.instance_id)
            .ok_or_else(|| Error::OrphanRecord(p.instance_id.clone()))?;
        let (raw, cached) = match &client {
            None => (baseline_response(cfg.provider, p, instance, cfg.seed)?, false),
            Some(client) => {
                let key = cfg.cache_key(&p.prompt);
                match cache.map(|c| c.get(&key)).transpose()?.flatten() {
                    Some(hit) => (hit, true),
                    None => {
                        let text = client.complete(&p.prompt)?;
                        if let Some(c) = cache {
                            c.put(&key, &text)?;
                        }
                        (text, false)
                    }
                }
            }
        };
        Ok(EvalRecord {
            instance_id: p.instance_id.clone(),
            option_index: p.option_index,
            parsed: parse_response(&raw, p.task, p.variant, profile),
            raw_response: raw,
            gold: gold_of(p, instance)?,
            model_name: cfg.model_name.clone(),
            cached,
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| prompts.par_iter().map(one).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read};
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    fn tr() -> LanguageProfile {
        LanguageProfile::turkish()
    }

    #[test]
    fn productivity_parsing() {
        let p = tr();
        assert_eq!(parse_productivity("sohbetler", &p), Parsed::Word("sohbetler".into()));
        assert_eq!(parse_productivity("Answer: Sohbetler.", &p), Parsed::Word("sohbetler".into()));
        assert_eq!(parse_productivity("", &p), Parsed::ParseFailure);
        assert_eq!(parse_productivity("  \n \n", &p), Parsed::ParseFailure);
        assert_eq!(
            parse_productivity("Let me think.\nFirst ...\n<Answer>DEĞERLENDİRİP</Answer>\n", &p),
            Parsed::Word("değerlendirip".into())
        );
        assert_eq!(parse_productivity("Cevap: \"Işıklar\"", &p), Parsed::Word("ışıklar".into()));
    }

    #[test]
    fn systematicity_parsing() {
        assert_eq!(parse_systematicity("Evet", false), Parsed::Yes);
        assert_eq!(parse_systematicity("Hayır.", false), Parsed::No);
        assert_eq!(parse_systematicity("Kyllä", false), Parsed::Yes);
        assert_eq!(parse_systematicity("ei", false), Parsed::No);
        assert_eq!(parse_systematicity("Answer: Yes", false), Parsed::Yes);
        assert_eq!(
            parse_systematicity("The suffix order looks wrong, yes.\n<Answer>No</Answer>", true),
            Parsed::No
        );
        assert_eq!(parse_systematicity("maybe", false), Parsed::ParseFailure);
    }

    #[test]
    fn parsing_is_idempotent_on_outputs() {
        let p = tr();
        for raw in ["Answer: Sohbetler.", "«kitaplık»", "x\n<Answer>Gözlükçü</Answer>"] {
            if let Parsed::Word(w) = parse_productivity(raw, &p) {
                assert_eq!(parse_productivity(&w, &p), Parsed::Word(w.clone()));
            }
        }
        assert_eq!(parse_systematicity("yes", false), Parsed::Yes);
        assert_eq!(parse_systematicity("no", true), Parsed::No);
    }

    #[test]
    fn cache_key_depends_on_every_parameter() {
        let mut cfg = ModelConfig::mock(Provider::Http);
        cfg.endpoint_url = Some("http://x".into());
        let base = cfg.cache_key("p");
        assert_eq!(base, cfg.cache_key("p"));
        assert_ne!(base, cfg.cache_key("q"));
        let mut c = cfg.clone();
        c.temperature = 0.3;
        assert_ne!(base, c.cache_key("p"));
        let mut c = cfg.clone();
        c.top_p = 0.9;
        assert_ne!(base, c.cache_key("p"));
        let mut c = cfg.clone();
        c.max_tokens = 1;
        assert_ne!(base, c.cache_key("p"));
        let mut c = cfg;
        c.model_name = "other".into();
        assert_ne!(base, c.cache_key("p"));
    }

    #[test]
    fn config_validation() {
        let mut cfg = ModelConfig::mock(Provider::EchoGold);
        assert!(cfg.validate().is_ok());
        cfg.top_p = 0.0;
        assert!(cfg.validate().is_err());
        cfg.top_p = 1.0;
        cfg.temperature = -0.1;
        assert!(cfg.validate().is_err());
        let http = ModelConfig::mock(Provider::Http);
        assert!(http.validate().is_err());
    }

    /// Serves canned (status, body) pairs in order, one per connection.
    fn serve(responses: Vec<(u16, String)>) -> (String, Arc<AtomicUsize>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let hits = Arc::new(AtomicUsize::new(0));
        let counter = hits.clone();
        std::thread::spawn(move || {
            for (status, body) in responses {
                let Ok((mut stream, _)) = listener.accept() else { return };
                counter.fetch_add(1, Ordering::SeqCst);
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0usize;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                }
                let mut buf = vec![0; len];
                reader.read_exact(&mut buf).unwrap();
                let extra = if status == 429 { "Retry-After: 0\r\n" } else { "" };
                let resp = format!(
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\n{extra}Content-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(resp.as_bytes()).unwrap();
            }
        });
        (format!("http://{addr}/v1/chat/completions"), hits)
    }

    fn ok_body(text: &str) -> String {
        serde_json::json!({"choices": [{"message": {"role": "assistant", "content": text}}]}).to_string()
    }

    fn http_cfg(url: String) -> ModelConfig {
        let mut cfg = ModelConfig::mock(Provider::Http);
        cfg.model_name = "test-model".into();
        cfg.endpoint_url = Some(url);
        cfg.backoff_base_ms = 1;
        cfg.max_retries = 2;
        cfg.timeout_secs = 5;
        cfg
    }

    #[test]
    fn retries_server_errors_then_succeeds() {
        let (url, hits) = serve(vec![(500, "{}".into()), (503, "{}".into()), (200, ok_body("evet"))]);
        let client = HttpClient::new(&http_cfg(url)).unwrap();
        assert_eq!(client.complete("p").unwrap(), "evet");
        assert_eq!(hits.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn persistent_server_errors_become_transport_error() {
        let (url, hits) = serve(vec![(500, "{}".into()); 3]);
        let client = HttpClient::new(&http_cfg(url)).unwrap();
        let err = client.complete("p").unwrap_err();
        assert!(matches!(err, Error::Transport(_)), "{err:?}");
        assert!(err.is_transport());
        assert_eq!(hits.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn auth_and_rate_limit() {
        let (url, _) = serve(vec![(401, "{}".into())]);
        let err = HttpClient::new(&http_cfg(url)).unwrap().complete("p").unwrap_err();
        assert!(matches!(err, Error::Auth(_)));
        let (url, _) = serve(vec![(429, "{}".into()); 3]);
        let err = HttpClient::new(&http_cfg(url)).unwrap().complete("p").unwrap_err();
        assert!(matches!(err, Error::RateLimited { retry_after_secs: Some(0) }), "{err:?}");
        let mut cfg = http_cfg("http://127.0.0.1:9".into());
        cfg.auth_token_env = Some("MORPHCOMP_TEST_UNSET_TOKEN".into());
        assert!(matches!(HttpClient::new(&cfg), Err(Error::Auth(_))));
    }

    #[test]
    fn second_identical_call_is_cached() {
        use crate::suite::{Distribution, OrderMode, Split};
        let (url, hits) = serve(vec![(200, ok_body("Answer: Sohbetler"))]);
        let cfg = http_cfg(url);
        let dir = tempfile::tempdir().unwrap();
        let cache = ResponseCache::open(dir.path()).unwrap();
        let inst = TaskInstance {
            instance_id: "s/productivity/id".into(),
            record_id: "s".into(),
            task: Task::Productivity,
            distribution: Distribution::Id,
            language: crate::lang_profile::Language::Turkish,
            split: Split::Eval,
            shown_root: "sohbet".into(),
            definition: None,
            presented_affixes: vec![],
            order_mode: OrderMode::Shuffled,
            context_sentence: None,
            morpheme_count: 1,
            options: vec![],
            gold_surface: Some("sohbetler".into()),
            alternatives: vec![],
            gold_order: vec![],
        };
        let prompt = PromptRecord {
            instance_id: inst.instance_id.clone(),
            option_index: None,
            task: Task::Productivity,
            instruction_language: InstructionLanguage::English,
            variant: Variant::Standard,
            prompt: "prompt".into(),
            demos: vec![],
        };
        let map = HashMap::from([(inst.instance_id.clone(), inst)]);
        let first = evaluate(&[prompt.clone()], &map, &cfg, Some(&cache), &tr()).unwrap();
        let second = evaluate(&[prompt], &map, &cfg, Some(&cache), &tr()).unwrap();
        assert!(!first[0].cached);
        assert!(second[0].cached);
        assert_eq!(second[0].parsed, Parsed::Word("sohbetler".into()));
        assert_eq!(first[0].raw_response, second[0].raw_response);
        assert_eq!(hits.load(Ordering::SeqCst), 1);
    }
}
