//! Flat `key=value` settings shared by config files, flags and output headers.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;

use tapered_lp::{Error, Result};

/// Keys that never enter an output header.
const TRANSIENT: &[&str] = &["threads", "out", "config"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    map: BTreeMap<String, String>,
}

impl Settings {
    /// Parses `key=value` lines. Blank lines are skipped, a leading `#` is
    /// stripped so output headers read back as configs, and other comment
    /// lines (no `=`) are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let body = line.strip_prefix('#').map(str::trim).unwrap_or(line);
            if body.is_empty() {
                continue;
            }
            match body.split_once('=') {
                Some((k, v)) => {
                    let k = k.trim();
                    if k.is_empty() || k.contains(char::is_whitespace) {
                        if line.starts_with('#') {
                            continue;
                        }
                        return Err(Error::Usage(format!("config line {}: bad key in {raw:?}", no + 1)));
                    }
                    map.insert(k.to_string(), v.trim().to_string());
                }
                None if line.starts_with('#') => {}
                None => return Err(Error::Usage(format!("config line {}: expected key=value, got {raw:?}", no + 1))),
            }
        }
        Ok(Self { map })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// First line of a JSON-lines output: `{"config": {...}}`.
    pub fn from_json_header(line: &str) -> Result<Self> {
        let v: serde_json::Value =
            serde_json::from_str(line).map_err(|e| Error::Usage(format!("bad JSON header: {e}")))?;
        let obj = v
            .get("config")
            .and_then(|c| c.as_object())
            .ok_or_else(|| Error::Usage("JSON header lacks a config object".into()))?;
        let map = obj
            .iter()
            .map(|(k, v)| (k.clone(), v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string())))
            .collect();
        Ok(Self { map })
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.map.insert(key.to_string(), value.to_string());
    }

    /// Fill `key` if absent and return its value.
    pub fn default_to(&mut self, key: &str, value: impl Display) -> String {
        self.map.entry(key.to_string()).or_insert_with(|| value.to_string()).clone()
    }

    pub fn overlay(&mut self, other: Settings) {
        self.map.extend(other.map);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn bad(key: &str, v: &str, what: &str) -> Error {
        Error::Usage(format!("--{key}={v} is not {what}"))
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| parse_f64(v).ok_or_else(|| Self::bad(key, v, "a number"))).transpose()
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.get(key).map(|v| parse_u64(v).ok_or_else(|| Self::bad(key, v, "a non-negative integer"))).transpose()
    }

    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| parse_f64(s.trim()).ok_or_else(|| Self::bad(key, v, "a comma-separated number list")))
                    .collect()
            })
            .transpose()
    }

    pub fn u64_list(&self, key: &str) -> Result<Option<Vec<u64>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| parse_u64(s.trim()).ok_or_else(|| Self::bad(key, v, "a comma-separated integer list")))
                    .collect()
            })
            .transpose()
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.f64(key)?.ok_or_else(|| Error::Usage(format!("--{key} is required")))
    }

    /// `# key=value` header lines.
    pub fn header_lines(&self) -> String {
        self.map.iter().filter(|(k, _)| !TRANSIENT.contains(&k.as_str())).map(|(k, v)| format!("# {k}={v}\n")).collect()
    }

    pub fn header_json(&self) -> serde_json::Value {
        let obj: serde_json::Map<String, serde_json::Value> = self
            .map
            .iter()
            .filter(|(k, _)| !TRANSIENT.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        serde_json::json!({ "config": obj })
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| !v.is_nan())
}

/// Integers, also written as `1e4` or `16384.0`.
fn parse_u64(s: &str) -> Option<u64> {
    if let Ok(v) = s.parse::<u64>() {
        return Some(v);
    }
    let f = s.parse::<f64>().ok()?;
    (f >= 0.0 && f.fract() == 0.0 && f < 1.8e19).then_some(f as u64)
}

/// `a:step:b`, the points `a + k·step` for `k = 0 .. round((b−a)/step)`,
/// excluding `b` itself.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Usage(format!("--grid={spec} is not a:step:b"));
    let parts: Vec<f64> = spec.split(':').map(|s| parse_f64(s.trim())).collect::<Option<_>>().ok_or_else(bad)?;
    let [a, step, b] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || !(b > a) {
        return Err(Error::Usage(format!("--grid={spec} needs step > 0 and b > a")));
    }
    let count = ((b - a) / step).round() as usize;
    if count == 0 || count > 1_000_000 {
        return Err(Error::Usage(format!("--grid={spec} gives {count} points")));
    }
    Ok((0..count).map(|k| a + k as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip() {
        let mut s = Settings::default();
        s.set("j", 8);
        s.set("beta", 1.2);
        s.set("threads", 4);
        let text = s.header_lines();
        assert!(!text.contains("threads"));
        let back =
            Settings::parse(&format!("{text}case_j,n\n").lines().take(2).collect::<Vec<_>>().join("\n")).unwrap();
        assert_eq!(back.get("j"), Some("8"));
        assert_eq!(back.get("beta"), Some("1.2"));
    }

    #[test]
    fn comments_and_errors() {
        let s = Settings::parse("# a comment\n\nj = 4\n#beta=0.7\n").unwrap();
        assert_eq!(s.get("j"), Some("4"));
        assert_eq!(s.get("beta"), Some("0.7"));
        assert!(Settings::parse("nonsense").is_err());
    }

    #[test]
    fn numbers() {
        let mut s = Settings::default();
        s.set("n", "1e4,16384");
        assert_eq!(s.u64_list("n").unwrap().unwrap(), vec![10_000, 16_384]);
        s.set("n", "1.5");
        assert!(s.u64_list("n").is_err());
    }

    #[test]
    fn grid_points() {
        let g = parse_grid("0:0.05:2").unwrap();
        assert_eq!(g.len(), 40);
        assert_eq!(g[0], 0.0);
        assert!((g[39] - 1.95).abs() < 1e-12);
        assert!(parse_grid("1:0:2").is_err());
    }
}
