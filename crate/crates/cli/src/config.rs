//! Run configuration: a JSON file merged with command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ocn_core::tau::dims::dims;
use ocn_core::verify::search::SearchConfig;
use ocn_core::verify::thresholds::Thresholds;
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_BUDGET: u64 = 10_000;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Only "certify" is accepted when present.
    pub command: Option<String>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub budget: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Clone, Debug)]
pub struct Resolved {
    pub search: SearchConfig,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
    }

    /// Flags win over the file.
    pub fn merge(mut self, flags: RunConfig) -> Self {
        self.n = flags.n.or(self.n);
        self.seed = flags.seed.or(self.seed);
        self.budget = flags.budget.or(self.budget);
        self.out = flags.out.or(self.out);
        self.tolerances.extend(flags.tolerances);
        self
    }

    pub fn resolve(self) -> Result<Resolved, String> {
        if let Some(c) = &self.command {
            if c != "certify" {
                return Err(format!("config command must be \"certify\", got {c:?}"));
            }
        }
        let n = self.n.ok_or("n is required")?;
        dims(n).map_err(|e| e.to_string())?;
        let mut t = Thresholds::default();
        for (name, &v) in &self.tolerances {
            t.set(name, v).map_err(|e| e.to_string())?;
        }
        let seed = self.seed.unwrap_or(DEFAULT_SEED);
        let mut search = SearchConfig::new(n, seed, self.budget.unwrap_or(DEFAULT_BUDGET));
        search.thresholds = t;
        let out = self.out.unwrap_or_else(|| PathBuf::from(format!("certificate-n{n}-seed{seed}.json")));
        Ok(Resolved { search, out })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_and_small_n_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"n": 4, "colour": 1}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"n": 1}"#).unwrap();
        assert!(c.resolve().is_err());
        let c: RunConfig = serde_json::from_str(r#"{"n": 4, "tolerances": {"need9": 1}}"#).unwrap();
        assert!(c.resolve().is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"seed": -3}"#).is_err());
    }

    #[test]
    fn flags_override_file() {
        let file: RunConfig =
            serde_json::from_str(r#"{"n": 3, "seed": 9, "tolerances": {"need1": 0.1, "grid": 8}}"#).unwrap();
        let mut flags = RunConfig { n: Some(4), ..Default::default() };
        flags.tolerances.insert("need1".into(), 0.2);
        let r = file.merge(flags).resolve().unwrap();
        assert_eq!(r.search.n, 4);
        assert_eq!(r.search.seed, 9);
        assert_eq!(r.search.budget, DEFAULT_BUDGET);
        assert_eq!(r.search.thresholds.need1, 0.2);
        assert_eq!(r.search.thresholds.grid, 8);
        assert_eq!(r.out, PathBuf::from("certificate-n4-seed9.json"));
    }
}
