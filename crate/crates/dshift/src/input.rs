//! Reading frequency distributions from CSV and JSON text.
//!
//! CSV holds one distribution per line as comma-separated nonnegative
//! integers; blank lines are skipped and there is no header. JSON holds either
//! one flat array of nonnegative integers or an array of such arrays.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use dshift_core::FrequencyDistribution;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// JSON if the first non-blank character opens an array, CSV otherwise.
    pub fn detect(text: &str) -> Format {
        if text.trim_start().starts_with('[') {
            Format::Json
        } else {
            Format::Csv
        }
    }

    /// From a file extension, falling back to the content.
    pub fn for_path(path: &Path, text: &str) -> Format {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("json") => Format::Json,
            Some("csv") | Some("txt") => Format::Csv,
            _ => Format::detect(text),
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown input format '{other}' (expected csv or json)")),
        }
    }
}

/// Where in the input a problem was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Position {
    /// 1-based line and column.
    Text { line: usize, column: usize },
    /// Array indices from the document root.
    Json(Vec<usize>),
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::Text { line, column } => write!(f, "line {line}, column {column}"),
            Position::Json(path) => {
                f.write_str("element ")?;
                if path.is_empty() {
                    return f.write_str("(root)");
                }
                for i in path {
                    write!(f, "[{i}]")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InputError {
    #[error("parse error at {position}: {message}")]
    Syntax { position: Position, message: String },
    #[error("negative count {value} at {position}")]
    NegativeCount { position: Position, value: String },
    #[error("non-integer count {value} at {position}")]
    NotInteger { position: Position, value: String },
    #[error("invalid distribution at {position}: {source}")]
    Invalid { position: Position, source: dshift_core::Error },
    #[error("no distribution found in input")]
    Empty,
    #[error("expected exactly one distribution, found {0}")]
    NotSingle(usize),
}

/// Parses text holding exactly one distribution.
pub fn parse_distribution(text: &str, format: Format) -> Result<FrequencyDistribution, InputError> {
    let mut all = parse_distributions(text, format)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        n => Err(InputError::NotSingle(n)),
    }
}

/// Parses every distribution in the text, in order.
pub fn parse_distributions(text: &str, format: Format) -> Result<Vec<FrequencyDistribution>, InputError> {
    let out = match format {
        Format::Csv => parse_csv(text)?,
        Format::Json => parse_json(text)?,
    };
    if out.is_empty() {
        return Err(InputError::Empty);
    }
    Ok(out)
}

fn parse_csv(text: &str) -> Result<Vec<FrequencyDistribution>, InputError> {
    let mut out = Vec::new();
    for (l, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut counts = Vec::new();
        let mut column = 1;
        for field in line.split(',') {
            let lead = field.len() - field.trim_start().len();
            let position = Position::Text { line: l + 1, column: column + lead };
            counts.push(parse_count(field.trim(), position)?);
            column += field.len() + 1;
        }
        let position = Position::Text { line: l + 1, column: 1 };
        out.push(FrequencyDistribution::new(counts).map_err(|source| InputError::Invalid { position, source })?);
    }
    Ok(out)
}

fn parse_count(token: &str, position: Position) -> Result<u64, InputError> {
    if let Ok(v) = token.parse::<u64>() {
        return Ok(v);
    }
    let value = token.to_string();
    if token.parse::<i128>().is_ok() {
        return Err(InputError::NegativeCount { position, value });
    }
    match token.parse::<f64>() {
        Ok(x) if x < 0.0 => Err(InputError::NegativeCount { position, value }),
        Ok(_) => Err(InputError::NotInteger { position, value }),
        Err(_) => {
            let message = if token.is_empty() { "empty field".into() } else { format!("'{token}' is not a count") };
            Err(InputError::Syntax { position, message })
        }
    }
}

fn parse_json(text: &str) -> Result<Vec<FrequencyDistribution>, InputError> {
    let root: Value = serde_json::from_str(text).map_err(|e| InputError::Syntax {
        position: Position::Text { line: e.line(), column: e.column() },
        message: e.to_string(),
    })?;
    let Value::Array(items) = root else {
        return Err(InputError::Syntax {
            position: Position::Json(Vec::new()),
            message: "expected an array of counts or an array of arrays".into(),
        });
    };
    if items.iter().any(Value::is_array) {
        items
            .iter()
            .enumerate()
            .map(|(i, item)| match item {
                Value::Array(inner) => json_distribution(inner, vec![i]),
                _ => Err(InputError::Syntax {
                    position: Position::Json(vec![i]),
                    message: "mixed counts and arrays".into(),
                }),
            })
            .collect()
    } else {
        Ok(vec![json_distribution(&items, Vec::new())?])
    }
}

fn json_distribution(items: &[Value], path: Vec<usize>) -> Result<FrequencyDistribution, InputError> {
    let mut counts = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let mut at = path.clone();
        at.push(i);
        let position = Position::Json(at);
        let count = match item {
            Value::Number(num) => {
                if let Some(v) = num.as_u64() {
                    v
                } else if num.is_i64() || num.as_f64().is_some_and(|x| x < 0.0) {
                    return Err(InputError::NegativeCount { position, value: num.to_string() });
                } else {
                    return Err(InputError::NotInteger { position, value: num.to_string() });
                }
            }
            other => {
                return Err(InputError::Syntax { position, message: format!("expected a count, found {other}") });
            }
        };
        counts.push(count);
    }
    FrequencyDistribution::new(counts).map_err(|source| InputError::Invalid { position: Position::Json(path), source })
}
