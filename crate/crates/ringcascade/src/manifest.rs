//! Run manifests: a flat key/value text format with `[section]` headers.
//!
//! Every run is fully determined by its manifest; the CLI writes the resolved
//! manifest next to the artifacts so any output can be reproduced exactly.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    /// (section, key) -> (value, source line). The top level is section "".
    values: BTreeMap<(String, String), (String, usize)>,
    label: String,
}

impl Manifest {
    pub fn parse(text: &str, label: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| Error::Config {
                    location: format!("{label}:{line_no}"),
                    reason: "unterminated section header".into(),
                })?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                location: format!("{label}:{line_no}"),
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            values.insert(
                (section.clone(), key.trim().to_string()),
                (value.trim().to_string(), line_no),
            );
        }
        Ok(Manifest {
            values,
            label: label.to_string(),
        })
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, section: &str, key: &str, value: impl Into<String>) {
        self.values
            .insert((section.to_string(), key.to_string()), (value.into(), 0));
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.values
            .get(&(section.to_string(), key.to_string()))
            .map(|(v, _)| v.as_str())
    }

    fn location(&self, section: &str, key: &str) -> String {
        match self.values.get(&(section.to_string(), key.to_string())) {
            Some((_, 0)) | None => {
                if section.is_empty() {
                    format!("{} key `{key}`", self.label)
                } else {
                    format!("{} [{section}] {key}", self.label)
                }
            }
            Some((_, line)) => format!("{}:{line}", self.label),
        }
    }

    pub fn require(&self, section: &str, key: &str) -> Result<&str> {
        self.get(section, key).ok_or_else(|| Error::Config {
            location: self.location(section, key),
            reason: format!("missing required key `{key}` in section `[{section}]`"),
        })
    }

    pub fn get_f64(&self, section: &str, key: &str) -> Result<Option<f64>> {
        match self.get(section, key) {
            None => Ok(None),
            Some("inf") => Ok(Some(f64::INFINITY)),
            Some(v) => v.parse::<f64>().map(Some).map_err(|_| Error::Config {
                location: self.location(section, key),
                reason: format!("`{v}` is not a number"),
            }),
        }
    }

    pub fn f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        Ok(self.get_f64(section, key)?.unwrap_or(default))
    }

    pub fn get_usize(&self, section: &str, key: &str) -> Result<Option<usize>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => v.parse::<usize>().map(Some).map_err(|_| Error::Config {
                location: self.location(section, key),
                reason: format!("`{v}` is not a nonnegative integer"),
            }),
        }
    }

    pub fn usize_or(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        Ok(self.get_usize(section, key)?.unwrap_or(default))
    }

    pub fn get_list_f64(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|_| Error::Config {
                        location: self.location(section, key),
                        reason: format!("`{s}` is not a number in list `{v}`"),
                    })
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }

    pub fn get_list_usize(&self, section: &str, key: &str) -> Result<Option<Vec<usize>>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim().parse::<usize>().map_err(|_| Error::Config {
                        location: self.location(section, key),
                        reason: format!("`{s}` is not an integer in list `{v}`"),
                    })
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }

    /// Deterministic rendering of all resolved values.
    pub fn to_resolved_text(&self) -> String {
        let mut out = String::from("# resolved ringcascade manifest\n");
        let mut current = None::<&str>;
        for ((section, key), (value, _)) in &self.values {
            if current != Some(section.as_str()) {
                if !section.is_empty() {
                    out.push_str(&format!("\n[{section}]\n"));
                }
                current = Some(section.as_str());
            }
            out.push_str(&format!("{key} = {value}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_comments_and_values() {
        let text = "\n# comment\nkind = cascade\n[cascade]\neps = 1.5 # inline\nm = 64\nalpha_list = 0.1, 0.2,0.3\n";
        let m = Manifest::parse(text, "test").unwrap();
        assert_eq!(m.get("", "kind"), Some("cascade"));
        assert_eq!(m.f64_or("cascade", "eps", 0.0).unwrap(), 1.5);
        assert_eq!(m.usize_or("cascade", "m", 0).unwrap(), 64);
        assert_eq!(
            m.get_list_f64("cascade", "alpha_list").unwrap().unwrap(),
            vec![0.1, 0.2, 0.3]
        );
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "kind = ok\nbroken line without equals\n";
        match Manifest::parse(text, "m.conf") {
            Err(Error::Config { location, .. }) => assert_eq!(location, "m.conf:2"),
            other => panic!("expected config error, got {other:?}"),
        }
        let m = Manifest::parse("[cascade]\neps = abc\n", "m.conf").unwrap();
        match m.get_f64("cascade", "eps") {
            Err(Error::Config { location, .. }) => assert_eq!(location, "m.conf:2"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn overrides_take_precedence_and_render_deterministically() {
        let mut m = Manifest::parse("[cascade]\neps = 1\nm = 8\n", "t").unwrap();
        m.set("cascade", "eps", "2.5");
        assert_eq!(m.f64_or("cascade", "eps", 0.0).unwrap(), 2.5);
        let a = m.to_resolved_text();
        let b = m.to_resolved_text();
        assert_eq!(a, b);
        assert!(a.contains("eps = 2.5"));
    }
}
