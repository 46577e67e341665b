use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Everything a run depends on. Config files use the same field names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub catalog: Option<String>,
    pub m: Option<u64>,
    pub range: Option<String>,
    pub radius: Option<u32>,
    pub epsilon: f64,
    pub tol: f64,
    pub jobs: usize,
    pub seed: u64,
    pub out: Option<String>,
    pub format: Format,
    pub method: String,
    pub relators: Vec<String>,
    pub samples: usize,
    pub terms: usize,
    pub cap: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            catalog: None,
            m: None,
            range: None,
            radius: None,
            epsilon: 1e-3,
            tol: 1e-6,
            jobs: 1,
            seed: 0,
            out: None,
            format: Format::Json,
            method: "auto".into(),
            relators: Vec::new(),
            samples: 10,
            terms: 2,
            cap: cayley_roe::cohomology::DEFAULT_CAP,
        }
    }
}

impl RunConfig {
    /// Overlays the keys of a JSON config file; the subcommand is kept.
    pub fn overlay_file(&self, path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let patch: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        let Value::Object(patch) = patch else {
            return Err(CliError::Usage("config file must hold a JSON object".into()));
        };
        let mut base = serde_json::to_value(self).expect("config serializes");
        let obj = base.as_object_mut().expect("object");
        for (k, v) in patch {
            obj.insert(k, v);
        }
        let mut out: RunConfig = serde_json::from_value(base).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        out.command = self.command.clone();
        Ok(out)
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON, output path excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        Sha256::digest(&bytes)[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Inclusive index range from `--m` or `--range` (`a..b`, `a..=b` or `a-b`).
    pub fn indices(&self) -> Result<Option<Vec<u64>>, CliError> {
        match (&self.m, &self.range) {
            (Some(_), Some(_)) => Err(CliError::Usage("--m and --range are exclusive".into())),
            (Some(m), None) => Ok(Some(vec![*m])),
            (None, Some(r)) => parse_range(r).map(Some),
            (None, None) => Ok(None),
        }
    }
}

pub fn parse_range(text: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Usage(format!("bad range '{text}', expected a..b"));
    let (a, b) = text
        .split_once("..=")
        .or_else(|| text.split_once(".."))
        .or_else(|| text.split_once('-'))
        .ok_or_else(bad)?;
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_hash() {
        let c = RunConfig {
            command: "gap".into(),
            catalog: Some("cyclic".into()),
            range: Some("3..6".into()),
            ..RunConfig::default()
        };
        let text = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        let mut d = c.clone();
        d.out = Some("x.json".into());
        assert_eq!(d.hash(), c.hash());
        d.seed = 1;
        assert_ne!(d.hash(), c.hash());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("3..6").unwrap(), vec![3, 4, 5, 6]);
        assert_eq!(parse_range("3..=4").unwrap(), vec![3, 4]);
        assert_eq!(parse_range("2-2").unwrap(), vec![2]);
        assert!(parse_range("5..3").is_err());
        assert!(parse_range("x").is_err());
    }
}
