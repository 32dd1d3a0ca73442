//! Flat `key = value` config files. Keys mirror the CLI flags; the CLI wins
//! when both are present.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
        let key = k.trim();
        if key.is_empty() {
            return Err(Error::Parse(format!("line {}: empty key", lineno + 1)));
        }
        map.insert(key.to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub fn get_u64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<u64>> {
    map.get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| Error::Parse(format!("config key {key}: bad integer {v:?}")))
        })
        .transpose()
}

pub fn get_i64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<i64>> {
    map.get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| Error::Parse(format!("config key {key}: bad integer {v:?}")))
        })
        .transpose()
}

pub fn get_f64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>> {
    map.get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| Error::Parse(format!("config key {key}: bad number {v:?}")))
        })
        .transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_trims() {
        let m = parse_config("# comment\n x = 100000 \nformat=json\n\n").unwrap();
        assert_eq!(m.get("x").unwrap(), "100000");
        assert_eq!(m.get("format").unwrap(), "json");
        assert_eq!(get_u64(&m, "x").unwrap(), Some(100_000));
        assert_eq!(get_u64(&m, "missing").unwrap(), None);
        assert!(get_u64(&m, "format").is_err());
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_config("just words").is_err());
        assert!(parse_config("= value").is_err());
    }
}
