//! Flat `key = value` configuration files.
//!
//! Keys are dotted (`crop.t_base`, `soil.cn2`, `episode.seed`). Lines
//! starting with `#` and blank lines are ignored. Every configurable struct
//! implements [`Section`], which accepts the keys it owns and renders its
//! current values for log headers.

use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("config key `{key}`: cannot parse `{value}` ({expected})")]
    Value {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("cannot read config file {path}: {message}")]
    Io { path: PathBuf, message: String },
}

/// Parses `key = value` lines into ordered pairs.
pub fn parse_flat(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: line.to_string(),
            });
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: line.to_string(),
            });
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

pub fn read_flat(path: &Path) -> Result<Vec<(String, String)>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_flat(&text)
}

/// Renders pairs in the same flat format, one per line.
pub fn render_flat(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect()
}

/// A value that can live on the right-hand side of a config line.
pub trait ConfigValue: Sized {
    const EXPECTED: &'static str;
    fn parse_value(s: &str) -> Option<Self>;
    fn render(&self) -> String;
}

macro_rules! from_str_value {
    ($($ty:ty => $what:literal),* $(,)?) => {$(
        impl ConfigValue for $ty {
            const EXPECTED: &'static str = $what;
            fn parse_value(s: &str) -> Option<Self> {
                s.trim().parse().ok()
            }
            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

from_str_value!(
    f32 => "a number",
    f64 => "a number",
    u32 => "a non-negative integer",
    u64 => "a non-negative integer",
    usize => "a non-negative integer",
    bool => "`true` or `false`",
);

impl<A: ConfigValue, B: ConfigValue> ConfigValue for (A, B) {
    const EXPECTED: &'static str = "a pair `a,b`";
    fn parse_value(s: &str) -> Option<Self> {
        let (a, b) = s.split_once(',')?;
        Some((A::parse_value(a)?, B::parse_value(b)?))
    }
    fn render(&self) -> String {
        format!("{},{}", self.0.render(), self.1.render())
    }
}

impl<A: ConfigValue> ConfigValue for Vec<A> {
    const EXPECTED: &'static str = "a `;`-separated list";
    fn parse_value(s: &str) -> Option<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Some(Vec::new());
        }
        s.split(';').map(A::parse_value).collect()
    }
    fn render(&self) -> String {
        self.iter().map(A::render).collect::<Vec<_>>().join(";")
    }
}

impl ConfigValue for Option<PathBuf> {
    const EXPECTED: &'static str = "a path, or empty";
    fn parse_value(s: &str) -> Option<Self> {
        let s = s.trim();
        Some(if s.is_empty() || s == "none" {
            None
        } else {
            Some(PathBuf::from(s))
        })
    }
    fn render(&self) -> String {
        self.as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_default()
    }
}

/// Parses `value` for `key`, mapping failures to [`ConfigError::Value`].
pub fn parse_for<V: ConfigValue>(key: &str, value: &str) -> Result<V, ConfigError> {
    V::parse_value(value).ok_or_else(|| ConfigError::Value {
        key: key.to_string(),
        value: value.to_string(),
        expected: V::EXPECTED,
    })
}

/// A struct configurable through flat keys.
pub trait Section {
    /// Applies `key = value` if the key belongs to this section. Returns
    /// `Ok(false)` for keys it does not own.
    fn set(&mut self, key: &str, value: &str) -> Result<bool, ConfigError>;

    /// Current values as flat pairs.
    fn pairs(&self) -> Vec<(String, String)>;

    /// Applies every pair, failing on the first key no section owns.
    fn apply_all(&mut self, pairs: &[(String, String)]) -> Result<(), ConfigError> {
        for (k, v) in pairs {
            if !self.set(k, v)? {
                return Err(ConfigError::UnknownKey(k.clone()));
            }
        }
        Ok(())
    }
}

/// Implements [`Section`] for a struct whose listed fields are all
/// [`ConfigValue`]s, under the key prefix `$prefix.`.
#[macro_export]
macro_rules! config_section {
    (impl<$($gen:ident : $bound:path),*> for $ty:ty, $prefix:literal { $($field:ident),* $(,)? }) => {
        impl<$($gen: $bound),*> $crate::config::Section for $ty {
            fn set(&mut self, key: &str, value: &str) -> Result<bool, $crate::config::ConfigError> {
                let Some(name) = key.strip_prefix(concat!($prefix, ".")) else {
                    return Ok(false);
                };
                match name {
                    $(stringify!($field) => {
                        self.$field = $crate::config::parse_for(key, value)?;
                        Ok(true)
                    })*
                    _ => Ok(false),
                }
            }

            fn pairs(&self) -> Vec<(String, String)> {
                vec![$((
                    concat!($prefix, ".", stringify!($field)).to_string(),
                    $crate::config::ConfigValue::render(&self.$field),
                )),*]
            }
        }
    };
}
