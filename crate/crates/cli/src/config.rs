//! Flat `key = value` configuration files.

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};

pub const KEYS: &[&str] = &["engine", "mode", "m_hat", "params", "metrics", "csv", "budget_multiplier"];

/// Parses a config file; unknown keys are rejected.
pub fn parse(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').with_context(|| format!("config line {}: expected key = value", i + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            bail!("config line {}: unknown key {k:?}", i + 1);
        }
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_and_comments() {
        let c = parse("engine = main # pick\n\nmode=layered\n").unwrap();
        assert_eq!(c["engine"], "main");
        assert_eq!(c["mode"], "layered");
        assert!(parse("colour = red").is_err());
        assert!(parse("engine main").is_err());
    }
}
