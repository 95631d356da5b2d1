use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use adomian_core::Result;

/// Formats a float with 17 significant digits.
pub fn f(x: f64) -> String {
    format!("{x:.16e}")
}

/// Output directory of one command run.
pub struct Output {
    dir: PathBuf,
    summary: String,
    files: Vec<String>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            summary: String::new(),
            files: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn line(&mut self, s: impl AsRef<str>) {
        self.summary.push_str(s.as_ref());
        self.summary.push('\n');
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(self.path(name), text)?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Writes a CSV with a header row; every cell is already formatted.
    pub fn csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<()> {
        let mut w = csv::Writer::from_path(self.path(name))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn record_file(&mut self, name: String) {
        self.files.push(name);
    }

    /// Writes `summary.txt` and `manifest.json`. The manifest is the only file
    /// that carries a timestamp.
    pub fn finish(
        mut self,
        command: &str,
        config: &Value,
        seed: Option<u64>,
        passed: bool,
        extra: Value,
    ) -> Result<()> {
        self.line(format!("status: {}", if passed { "PASS" } else { "FAIL" }));
        fs::File::create(self.path("summary.txt"))?.write_all(self.summary.as_bytes())?;
        self.files.push("summary.txt".into());
        let created = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let manifest = json!({
            "command": command,
            "config": config,
            "seed": seed,
            "passed": passed,
            "files": self.files,
            "versions": {
                "adomian-cli": env!("CARGO_PKG_VERSION"),
                "adomian-core": adomian_core::VERSION,
            },
            "created_unix": created,
            "extra": extra,
        });
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(self.path("manifest.json"), text)?;
        print!("{}", self.summary);
        Ok(())
    }
}
