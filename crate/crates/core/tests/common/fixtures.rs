//! A small git repository and a cached set of tracker issues.

use std::path::Path;
use std::process::Command;

fn git(dir: &Path, args: &[&str]) {
    let out = Command::new("git")
        .arg("-C")
        .arg(dir)
        .args(["-c", "user.name=Fixture", "-c", "user.email=fixture@example.com", "-c", "commit.gpgsign=false"])
        .args(args)
        .env("GIT_AUTHOR_DATE", "2020-01-01T00:00:00Z")
        .env("GIT_COMMITTER_DATE", "2020-01-01T00:00:00Z")
        .output()
        .expect("git runs");
    assert!(out.status.success(), "git {args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn commit(dir: &Path, files: &[(&str, &str)], message: &str) {
    for (path, text) in files {
        let p = dir.join(path);
        std::fs::create_dir_all(p.parent().unwrap()).unwrap();
        std::fs::write(p, text).unwrap();
        git(dir, &["add", path]);
    }
    git(dir, &["commit", "-q", "-m", message]);
}

fn auth(body: &str) -> String {
    format!("class Auth {{\n  boolean check(String user, String token) {{\n    {body}\n  }}\n}}\n")
}

fn session(body: &str) -> String {
    format!("class Session {{\n  void open(int id) {{\n    {body}\n  }}\n}}\n")
}

pub const MESSAGES: [&str; 8] = [
    "Initial import",
    "SEC-1: fix authentication bypass",
    "Update README",
    "SEC-2 SEC-3 harden session handling",
    "Refactor token check",
    "Add logging to session",
    "Bump version [release]",
    "Fix typo in comment",
];

/// Eight linear commits plus a merge of a one-commit branch.
pub fn build_repo(dir: &Path) {
    git(dir, &["init", "-q", "-b", "main"]);
    commit(
        dir,
        &[("src/Auth.java", &auth("return user != null;")), ("src/Session.java", &session("log(id);"))],
        MESSAGES[0],
    );
    commit(dir, &[("src/Auth.java", &auth("return user != null && verify(token);"))], MESSAGES[1]);
    commit(dir, &[("README.md", "fixture\n")], MESSAGES[2]);
    git(dir, &["checkout", "-q", "-b", "feature"]);
    commit(
        dir,
        &[("src/Session.java", &session("if (id < 0) { throw new IllegalStateException(); } log(id);"))],
        MESSAGES[3],
    );
    git(dir, &["checkout", "-q", "main"]);
    git(dir, &["merge", "-q", "--no-ff", "-m", "Merge branch feature", "feature"]);
    commit(dir, &[("src/Auth.java", &auth("return user != null && verifyToken(token);"))], MESSAGES[4]);
    commit(
        dir,
        &[("src/Session.java", &session("if (id < 0) { throw new IllegalStateException(); } logger.info(id);"))],
        MESSAGES[5],
    );
    commit(dir, &[("src/Auth.java", &auth("return user != null && verifyToken(token, 2);"))], MESSAGES[6]);
    commit(
        dir,
        &[("src/Auth.java", &auth("// checks the token\n    return user != null && verifyToken(token, 2);"))],
        MESSAGES[7],
    );
}

fn issue_json(key: &str, priority: &str, labels: &[&str]) -> String {
    serde_json::json!({ "key": key, "fields": { "priority": { "name": priority }, "labels": labels } }).to_string()
}

/// Cached tracker responses for SEC-1..SEC-4.
pub fn write_issue_cache(dir: &Path) {
    std::fs::create_dir_all(dir).unwrap();
    for (key, priority, labels) in [
        ("SEC-1", "Critical", &["security"][..]),
        ("SEC-2", "Minor", &["Authentication"][..]),
        ("SEC-3", "Blocker", &[][..]),
        ("SEC-4", "P0", &["security"][..]),
    ] {
        std::fs::write(dir.join(format!("{key}.json")), issue_json(key, priority, labels)).unwrap();
    }
}
