//! File formats and rendering behind the `lamlab` command-line tool.

#![allow(clippy::result_large_err, clippy::large_enum_variant)]

pub mod app;
pub mod document;
pub mod svg;

use std::path::Path;

use lamlab::circle::Degree;
use lamlab::FixedPointPortrait;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot access {0}: {1}")]
    Io(String, std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid document: {0}")]
    Invalid(String),
    #[error(transparent)]
    Lamination(#[from] lamlab::Error),
}

impl CliError {
    /// 2 for problems with the invocation or its inputs, 1 when a
    /// computation on valid inputs fails.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lamination(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Default cap on pullback depth when `LAMLAB_MAX_DEPTH` is unset.
pub const DEFAULT_MAX_DEPTH: usize = 12;

/// The depth cap from `LAMLAB_MAX_DEPTH`, given the variable's raw value.
pub fn max_depth(raw: Option<&str>) -> Result<usize> {
    match raw {
        None => Ok(DEFAULT_MAX_DEPTH),
        Some(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("LAMLAB_MAX_DEPTH must be a non-negative integer, got `{s}`"))),
    }
}

/// Parses a portrait given either as a path to a JSON file
/// (`{"degree": d, "blocks": [[...], ...]}`) or inline as blocks of
/// fixed-point indices separated by `;`, e.g. `0,1;2,3`. Indices left out
/// become singletons; the empty string is the empty portrait.
pub fn parse_fpp_spec(spec: &str, degree: Degree) -> Result<FixedPointPortrait> {
    if spec.ends_with(".json") {
        let path = Path::new(spec);
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(spec.to_string(), e))?;
        let p: FixedPointPortrait = serde_json::from_str(&text)?;
        if p.degree() != degree {
            return Err(CliError::Usage(format!("portrait file has degree {}, expected {degree}", p.degree())));
        }
        return Ok(p);
    }
    let mut blocks = Vec::new();
    for block in spec.split(';').filter(|b| !b.trim().is_empty()) {
        let ids = block
            .split(',')
            .map(|i| {
                i.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("bad fixed-point index `{i}` in `{spec}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        blocks.push(ids);
    }
    FixedPointPortrait::new(degree, blocks).map_err(|e| CliError::Usage(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fpp_specs() {
        let d = Degree::new(5).unwrap();
        assert_eq!(parse_fpp_spec("0,1;2,3", d).unwrap().blocks(), &[vec![0, 1], vec![2, 3]]);
        assert_eq!(parse_fpp_spec("", d).unwrap(), FixedPointPortrait::empty(d));
        assert!(parse_fpp_spec("0,2;1,3", d).is_err());
        assert!(parse_fpp_spec("0,x", d).is_err());
        assert!(parse_fpp_spec("missing.json", d).is_err());
    }

    #[test]
    fn depth_cap() {
        assert_eq!(max_depth(None).unwrap(), 12);
        assert_eq!(max_depth(Some("3")).unwrap(), 3);
        assert!(max_depth(Some("deep")).is_err());
    }
}
