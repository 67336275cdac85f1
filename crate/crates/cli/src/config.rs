//! `key = value` run files.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: invalid key {key:?}")]
    Key { line: usize, key: String },
}

/// Entries in file order. Blank lines and `#` comments are skipped; a `#`
/// after the value starts a comment as well.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        let ok = !k.is_empty()
            && k.chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        if !ok {
            return Err(ConfigError::Key {
                line: i + 1,
                key: k.to_string(),
            });
        }
        let v = v
            .strip_prefix('"')
            .and_then(|s| s.strip_suffix('"'))
            .unwrap_or(v);
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Vec<(String, String)>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_quotes_and_blanks() {
        let c =
            parse("# run\nentry = ppwave\n\nQ = \"x^2 + y^2\"  # potential\nsamples=20\n").unwrap();
        assert_eq!(
            c,
            vec![
                ("entry".into(), "ppwave".into()),
                ("Q".into(), "x^2 + y^2".into()),
                ("samples".into(), "20".into())
            ]
        );
    }

    proptest::proptest! {
        #[test]
        fn written_entries_parse_back(
            entries in proptest::collection::vec(("[A-Za-z_][A-Za-z0-9_-]{0,8}", "[^#\"\n\r]{0,16}"), 0..6)
        ) {
            let text: String = entries.iter().map(|(k, v)| format!("{k} = \"{v}\"\n")).collect();
            let back = parse(&text).unwrap();
            let want: Vec<(String, String)> =
                entries.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
            proptest::prop_assert_eq!(back, want);
        }
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(
            parse("entry ppwave"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(parse("a b = 1"), Err(ConfigError::Key { .. })));
    }
}
