//! Flat `key=value` configuration text.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub type KeyValues = BTreeMap<String, String>;

/// Parse `key=value` lines. Blank lines and `#` comments are skipped.
pub fn parse_kv(text: &str) -> Result<KeyValues> {
    let mut out = KeyValues::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: idx + 1,
            message: format!("expected key=value, got `{line}`"),
        })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Parse {
                line: idx + 1,
                message: "empty key".into(),
            });
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn read_kv(path: impl AsRef<Path>) -> Result<KeyValues> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_kv(&text)
}

pub(crate) fn get<T: FromStr>(kv: &KeyValues, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    kv.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|e| Error::Config(format!("{key}={v}: {e}")))
        })
        .transpose()
}

pub(crate) fn set<T: FromStr>(kv: &KeyValues, key: &str, slot: &mut T) -> Result<()>
where
    T::Err: std::fmt::Display,
{
    if let Some(v) = get(kv, key)? {
        *slot = v;
    }
    Ok(())
}
