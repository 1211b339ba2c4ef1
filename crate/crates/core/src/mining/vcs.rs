use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};

use super::MiningError;
use crate::commit::{CommitInput, FileChange};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitMeta {
    pub repo_id: String,
    pub commit_id: String,
    pub message: String,
    /// `None` for a root commit.
    pub parent_id: Option<String>,
    pub changed_paths: Vec<String>,
}

impl CommitMeta {
    /// `repo_id:commit_id`, the identifier used in corpora.
    pub fn qualified_id(&self) -> String {
        format!("{}:{}", self.repo_id, self.commit_id)
    }
}

/// Read access to a version-control repository.
pub trait VcsClient: Sync {
    /// Every non-merge commit reachable from the default branch, oldest first.
    fn scan(&self, repo: &Path, repo_id: &str) -> Result<Vec<CommitMeta>, MiningError>;
    /// Pre/post contents of the Java files a commit touches.
    fn commit_input(&self, repo: &Path, meta: &CommitMeta) -> Result<CommitInput, MiningError>;
}

/// Shells out to the `git` executable and parses its plumbing output.
#[derive(Debug, Clone)]
pub struct GitCli {
    pub program: PathBuf,
}

impl Default for GitCli {
    fn default() -> Self {
        Self { program: PathBuf::from("git") }
    }
}

impl GitCli {
    fn run(&self, repo: &Path, args: &[&str]) -> Result<std::process::Output, MiningError> {
        Command::new(&self.program)
            .arg("-C")
            .arg(repo)
            .args(args)
            .output()
            .map_err(|e| MiningError::RepoUnavailable { repo: repo.display().to_string(), message: e.to_string() })
    }

    fn stdout(&self, repo: &Path, args: &[&str]) -> Result<Vec<u8>, MiningError> {
        let out = self.run(repo, args)?;
        if !out.status.success() {
            return Err(MiningError::RepoUnavailable {
                repo: repo.display().to_string(),
                message: format!("git {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim()),
            });
        }
        Ok(out.stdout)
    }

    fn show_blob(&self, repo: &Path, rev: &str, path: &str) -> Result<String, MiningError> {
        let bytes = self.stdout(repo, &["show", &format!("{rev}:{path}")])?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }
}

fn split_z(bytes: &[u8]) -> Vec<String> {
    bytes.split(|&b| b == 0).filter(|s| !s.is_empty()).map(|s| String::from_utf8_lossy(s).into_owned()).collect()
}

impl VcsClient for GitCli {
    fn scan(&self, repo: &Path, repo_id: &str) -> Result<Vec<CommitMeta>, MiningError> {
        self.stdout(repo, &["rev-parse", "--git-dir"])?;
        if !self.run(repo, &["rev-parse", "--verify", "-q", "HEAD"])?.status.success() {
            return Ok(Vec::new());
        }
        let list = self.stdout(repo, &["rev-list", "--reverse", "--topo-order", "--no-merges", "HEAD"])?;
        let mut metas = Vec::new();
        for sha in String::from_utf8_lossy(&list).split_whitespace() {
            let head = self.stdout(repo, &["show", "-s", "--format=%P%x00%B", sha])?;
            let head = String::from_utf8_lossy(&head);
            let (parents, message) = head.split_once('\0').unwrap_or((&head, ""));
            let paths =
                self.stdout(repo, &["diff-tree", "--no-commit-id", "-r", "--root", "--name-only", "-z", sha])?;
            metas.push(CommitMeta {
                repo_id: repo_id.to_string(),
                commit_id: sha.to_string(),
                message: message.trim_end().to_string(),
                parent_id: parents.split_whitespace().next().map(str::to_string),
                changed_paths: split_z(&paths),
            });
        }
        Ok(metas)
    }

    fn commit_input(&self, repo: &Path, meta: &CommitMeta) -> Result<CommitInput, MiningError> {
        let raw = self
            .stdout(repo, &["diff-tree", "--no-commit-id", "-r", "--root", "--name-status", "-z", &meta.commit_id])?;
        let fields = split_z(&raw);
        let mut changes = Vec::new();
        let mut i = 0;
        while i + 1 < fields.len() {
            let status = fields[i].chars().next().unwrap_or('M');
            // renames and copies carry two paths
            let (path, step) = if matches!(status, 'R' | 'C') && i + 2 < fields.len() {
                (&fields[i + 2], 3)
            } else {
                (&fields[i + 1], 2)
            };
            i += step;
            if !path.ends_with(".java") {
                continue;
            }
            let pre_text = match (&meta.parent_id, status) {
                (Some(p), 'M' | 'D' | 'T') => Some(self.show_blob(repo, p, path)?),
                _ => None,
            };
            let post_text = match status {
                'D' => None,
                _ => Some(self.show_blob(repo, &meta.commit_id, path)?),
            };
            changes.push(FileChange { path: path.clone(), pre_text, post_text });
        }
        Ok(CommitInput {
            repo_id: meta.repo_id.clone(),
            commit_id: meta.qualified_id(),
            changes,
            message: meta.message.clone(),
        })
    }
}
