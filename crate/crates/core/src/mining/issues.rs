use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};
use std::thread;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const TOKEN_ENV: &str = "COMMITVEC_TRACKER_TOKEN";

/// The five-level priority scheme, ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Priority {
    Trivial,
    Minor,
    Major,
    Critical,
    Blocker,
}

impl Priority {
    pub const ALL: [Priority; 5] =
        [Priority::Blocker, Priority::Critical, Priority::Major, Priority::Minor, Priority::Trivial];

    pub fn name(self) -> &'static str {
        match self {
            Priority::Trivial => "Trivial",
            Priority::Minor => "Minor",
            Priority::Major => "Major",
            Priority::Critical => "Critical",
            Priority::Blocker => "Blocker",
        }
    }
}

impl FromStr for Priority {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Priority::ALL.into_iter().find(|p| p.name().eq_ignore_ascii_case(s.trim())).ok_or_else(|| s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JiraIssue {
    pub key: String,
    pub priority: Priority,
    pub labels: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IssueError {
    #[error("malformed issue key {0:?}")]
    InvalidKey(String),
    #[error("issue {0} not found")]
    IssueNotFound(String),
    #[error("issue {key} uses priority {priority:?}, outside the five-level scheme")]
    Nonconforming { key: String, priority: String },
    #[error("tracker unavailable for {key} after {attempts} attempts: {message}")]
    TrackerUnavailable { key: String, attempts: u32, message: String },
    #[error("bad tracker response for {key}: {message}")]
    BadResponse { key: String, message: String },
    #[error("issue cache: {0}")]
    Cache(String),
}

fn key_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[A-Z][A-Z0-9]+-[0-9]+$").unwrap())
}

pub fn is_issue_key(key: &str) -> bool {
    key_regex().is_match(key)
}

#[derive(Deserialize)]
struct RawIssue {
    key: String,
    fields: RawFields,
}

#[derive(Deserialize)]
struct RawFields {
    priority: Option<RawPriority>,
    #[serde(default)]
    labels: Vec<String>,
}

#[derive(Deserialize)]
struct RawPriority {
    name: String,
}

/// Parses the tracker's issue JSON (`key`, `fields.priority.name`,
/// `fields.labels`).
pub fn parse_issue(body: &str) -> Result<JiraIssue, IssueError> {
    let raw: RawIssue = serde_json::from_str(body)
        .map_err(|e| IssueError::BadResponse { key: String::new(), message: e.to_string() })?;
    if !is_issue_key(&raw.key) {
        return Err(IssueError::InvalidKey(raw.key));
    }
    let name = raw.fields.priority.map(|p| p.name).unwrap_or_default();
    let priority = name.parse().map_err(|priority| IssueError::Nonconforming { key: raw.key.clone(), priority })?;
    Ok(JiraIssue { key: raw.key, priority, labels: raw.fields.labels.into_iter().collect() })
}

pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

/// HTTP GET; `Err` means the request never produced a response.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str, token: Option<&str>) -> Result<HttpResponse, String>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder().timeout_global(Some(timeout)).http_status_as_error(false).build();
        Self { agent: config.into() }
    }
}

impl Transport for UreqTransport {
    fn get(&self, url: &str, token: Option<&str>) -> Result<HttpResponse, String> {
        let mut req = self.agent.get(url).header("Accept", "application/json");
        if let Some(t) = token {
            req = req.header("Authorization", &format!("Bearer {t}"));
        }
        let mut resp = req.call().map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
        Ok(HttpResponse { status, body })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    pub base_url: String,
    pub max_retries: u32,
    pub backoff_ms: u64,
    /// Minimum spacing between request starts.
    pub min_interval_ms: u64,
    pub max_concurrent: usize,
    pub timeout_s: u64,
    /// Never touch the network; uncached keys fail as unavailable.
    pub offline: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            base_url: "https://issues.apache.org/jira".into(),
            max_retries: 4,
            backoff_ms: 500,
            min_interval_ms: 100,
            max_concurrent: 4,
            timeout_s: 30,
            offline: false,
        }
    }
}

/// Issue-tracker client with an on-disk response cache, one
/// `<KEY>.json` per issue.
pub struct IssueClient {
    config: TrackerConfig,
    cache_dir: PathBuf,
    transport: Box<dyn Transport>,
    token: Option<String>,
    last_request: Mutex<Option<Instant>>,
}

impl IssueClient {
    pub fn new(config: TrackerConfig, cache_dir: impl Into<PathBuf>, transport: Box<dyn Transport>) -> Self {
        Self {
            config,
            cache_dir: cache_dir.into(),
            transport,
            token: std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty()),
            last_request: Mutex::new(None),
        }
    }

    pub fn with_ureq(config: TrackerConfig, cache_dir: impl Into<PathBuf>) -> Self {
        let t = UreqTransport::new(Duration::from_secs(config.timeout_s));
        Self::new(config, cache_dir, Box::new(t))
    }

    pub fn cache_dir(&self) -> &Path {
        &self.cache_dir
    }

    fn cache_path(&self, key: &str) -> PathBuf {
        self.cache_dir.join(format!("{key}.json"))
    }

    fn missing_path(&self, key: &str) -> PathBuf {
        self.cache_dir.join(format!("{key}.missing"))
    }

    fn throttle(&self) {
        let wait = {
            let mut last = self.last_request.lock().unwrap();
            let now = Instant::now();
            let interval = Duration::from_millis(self.config.min_interval_ms);
            let start = match *last {
                Some(t) if t + interval > now => t + interval,
                _ => now,
            };
            *last = Some(start);
            start - now
        };
        if !wait.is_zero() {
            thread::sleep(wait);
        }
    }

    fn download(&self, key: &str) -> Result<String, IssueError> {
        let url =
            format!("{}/rest/api/2/issue/{key}?fields=priority,labels", self.config.base_url.trim_end_matches('/'));
        let mut last_err = String::new();
        let attempts = self.config.max_retries + 1;
        for attempt in 0..attempts {
            if attempt > 0 {
                thread::sleep(Duration::from_millis(self.config.backoff_ms << (attempt - 1).min(16)));
            }
            self.throttle();
            match self.transport.get(&url, self.token.as_deref()) {
                Ok(r) if r.status == 200 => return Ok(r.body),
                Ok(r) if r.status == 404 => {
                    self.write_cache(&self.missing_path(key), "")?;
                    return Err(IssueError::IssueNotFound(key.to_string()));
                }
                Ok(r) if r.status == 429 || r.status >= 500 => last_err = format!("HTTP {}", r.status),
                Ok(r) => {
                    return Err(IssueError::BadResponse { key: key.to_string(), message: format!("HTTP {}", r.status) })
                }
                Err(e) => last_err = e,
            }
            log::debug!("{key}: attempt {} failed: {last_err}", attempt + 1);
        }
        Err(IssueError::TrackerUnavailable { key: key.to_string(), attempts, message: last_err })
    }

    fn write_cache(&self, path: &Path, body: &str) -> Result<(), IssueError> {
        fs::create_dir_all(&self.cache_dir).map_err(|e| IssueError::Cache(e.to_string()))?;
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, body).and_then(|_| fs::rename(&tmp, path)).map_err(|e| IssueError::Cache(e.to_string()))
    }

    /// Cache first, then the tracker. Responses are cached verbatim, so a
    /// rerun over a warm cache is network-free and gives identical results.
    pub fn fetch_issue(&self, key: &str) -> Result<JiraIssue, IssueError> {
        if !is_issue_key(key) {
            return Err(IssueError::InvalidKey(key.to_string()));
        }
        let cached = self.cache_path(key);
        let body = match fs::read_to_string(&cached) {
            Ok(b) => b,
            Err(_) if self.missing_path(key).exists() => return Err(IssueError::IssueNotFound(key.to_string())),
            Err(_) if self.config.offline => {
                return Err(IssueError::TrackerUnavailable {
                    key: key.to_string(),
                    attempts: 0,
                    message: "offline and not cached".into(),
                })
            }
            Err(_) => {
                let b = self.download(key)?;
                self.write_cache(&cached, &b)?;
                b
            }
        };
        parse_issue(&body).map_err(|e| match e {
            IssueError::BadResponse { message, .. } => IssueError::BadResponse { key: key.to_string(), message },
            other => other,
        })
    }

    /// Fetches many keys with at most `max_concurrent` requests in flight.
    /// A failing key is reported in the map, never aborting the rest.
    pub fn fetch_all(&self, keys: &BTreeSet<String>) -> BTreeMap<String, Result<JiraIssue, IssueError>> {
        let keys: Vec<&String> = keys.iter().collect();
        let run = || -> Vec<_> { keys.par_iter().map(|k| ((*k).clone(), self.fetch_issue(k))).collect() };
        let results = match rayon::ThreadPoolBuilder::new().num_threads(self.config.max_concurrent.max(1)).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        };
        results.into_iter().collect()
    }
}

/// sha256 over the sorted cache entries, identifying the snapshot a corpus
/// was built from.
pub fn cache_fingerprint(dir: &Path) -> std::io::Result<String> {
    let mut h = Sha256::new();
    let mut names: Vec<PathBuf> = match fs::read_dir(dir) {
        Ok(rd) => rd.filter_map(|e| e.ok().map(|e| e.path())).collect(),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(e),
    };
    names.retain(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("json" | "missing")));
    names.sort();
    for p in names {
        h.update(p.file_name().unwrap().to_string_lossy().as_bytes());
        h.update([0]);
        h.update(fs::read(&p)?);
        h.update([0]);
    }
    Ok(hex::encode(h.finalize()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    struct Scripted {
        statuses: Vec<u16>,
        calls: Arc<AtomicUsize>,
    }

    impl Transport for Scripted {
        fn get(&self, url: &str, _: Option<&str>) -> Result<HttpResponse, String> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst);
            let status = *self.statuses.get(n).unwrap_or(self.statuses.last().unwrap());
            if status == 0 {
                return Err("connection refused".into());
            }
            let key = url.rsplit('/').next().unwrap().split('?').next().unwrap();
            let body =
                format!(r#"{{"key":"{key}","fields":{{"priority":{{"name":"Critical"}},"labels":["Security"]}}}}"#);
            Ok(HttpResponse { status, body })
        }
    }

    fn client(dir: &Path, statuses: Vec<u16>) -> (IssueClient, Arc<AtomicUsize>) {
        let calls = Arc::new(AtomicUsize::new(0));
        let cfg = TrackerConfig { backoff_ms: 1, min_interval_ms: 0, ..Default::default() };
        let t = Scripted { statuses, calls: calls.clone() };
        (IssueClient::new(cfg, dir, Box::new(t)), calls)
    }

    #[test]
    fn priorities_parse_case_insensitively() {
        assert_eq!("major".parse::<Priority>(), Ok(Priority::Major));
        assert!("P0".parse::<Priority>().is_err());
        assert!(Priority::Blocker > Priority::Critical && Priority::Minor > Priority::Trivial);
    }

    #[test]
    fn keys() {
        assert!(is_issue_key("PROJ-1"));
        assert!(is_issue_key("A1-22"));
        assert!(!is_issue_key("A-1"));
        assert!(!is_issue_key("proj-1"));
    }

    #[test]
    fn retries_then_caches() {
        let dir = tempfile::tempdir().unwrap();
        let (c, calls) = client(dir.path(), vec![503, 0, 200]);
        let issue = c.fetch_issue("SEC-7").unwrap();
        assert_eq!(issue.priority, Priority::Critical);
        assert_eq!(calls.load(Ordering::SeqCst), 3);
        assert_eq!(c.fetch_issue("SEC-7").unwrap(), issue);
        assert_eq!(calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn gives_up_per_key() {
        let dir = tempfile::tempdir().unwrap();
        let (c, calls) = client(dir.path(), vec![500]);
        let err = c.fetch_issue("SEC-7").unwrap_err();
        assert!(matches!(err, IssueError::TrackerUnavailable { attempts: 5, .. }));
        assert_eq!(calls.load(Ordering::SeqCst), 5);
    }

    #[test]
    fn not_found_is_remembered() {
        let dir = tempfile::tempdir().unwrap();
        let (c, calls) = client(dir.path(), vec![404]);
        assert_eq!(c.fetch_issue("SEC-8"), Err(IssueError::IssueNotFound("SEC-8".into())));
        assert_eq!(c.fetch_issue("SEC-8"), Err(IssueError::IssueNotFound("SEC-8".into())));
        assert_eq!(calls.load(Ordering::SeqCst), 1);
    }
}
