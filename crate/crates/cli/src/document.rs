//! The JSON file format shared by every subcommand.

use std::fs;
use std::path::Path;

use lamlab::circle::Degree;
use lamlab::leaves::{Lamination, Leaf};
use lamlab::pullback::{CriticalPortrait, PullbackState};
use lamlab::FixedPointPortrait;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool_version: String,
    pub command: String,
}

impl Metadata {
    pub fn new(command: impl Into<String>) -> Self {
        Metadata { tool_version: env!("CARGO_PKG_VERSION").to_string(), command: command.into() }
    }
}

/// A lamination stage on disk. Leaves are kept sorted by `(min, max)`;
/// `first_depth`, when present, runs parallel to `leaves`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaminationDocument {
    pub degree: Degree,
    pub leaves: Vec<Leaf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical_portrait: Option<CriticalPortrait>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fpp: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_depth: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

impl LaminationDocument {
    pub fn from_lamination(lam: &Lamination) -> Self {
        LaminationDocument {
            degree: lam.degree,
            leaves: lam.leaves.iter().cloned().collect(),
            critical_portrait: None,
            fpp: None,
            first_depth: None,
            metadata: None,
        }
    }

    /// The last stage of `state`, annotated with the stage each leaf first
    /// appeared in.
    pub fn from_state(state: &PullbackState) -> Self {
        let mut doc = Self::from_lamination(state.last());
        doc.critical_portrait = Some(state.portrait.clone());
        doc.fpp = state.fpp.as_ref().map(|p| p.blocks().to_vec());
        doc.first_depth = Some(doc.leaves.iter().map(|l| state.first_depth[l]).collect());
        doc
    }

    pub fn with_metadata(mut self, m: Metadata) -> Self {
        self.metadata = Some(m);
        self
    }

    /// Stage count recorded in the annotations, 0 when absent.
    pub fn depth(&self) -> usize {
        self.first_depth.as_ref().and_then(|v| v.iter().max().copied()).unwrap_or(0)
    }

    pub fn lamination(&self) -> Lamination {
        Lamination::new(self.degree, self.leaves.iter().cloned()).with_depth(self.depth())
    }

    /// Leaves that appeared at or before stage `k`.
    pub fn stage(&self, k: usize) -> Lamination {
        let leaves = match &self.first_depth {
            Some(ds) => self.leaves.iter().zip(ds).filter(|(_, &d)| d <= k).map(|(l, _)| l.clone()).collect(),
            None => self.leaves.clone(),
        };
        Lamination::new(self.degree, leaves).with_depth(k)
    }

    pub fn portrait(&self) -> Option<crate::Result<FixedPointPortrait>> {
        self.fpp.as_ref().map(|b| FixedPointPortrait::new(self.degree, b.clone()).map_err(CliError::from))
    }

    /// Sorts leaves (carrying annotations along) and drops duplicates.
    fn canonicalize(&mut self) -> crate::Result<()> {
        if let Some(ds) = &self.first_depth {
            if ds.len() != self.leaves.len() {
                return Err(CliError::Invalid(format!(
                    "first_depth has {} entries for {} leaves",
                    ds.len(),
                    self.leaves.len()
                )));
            }
        }
        let mut pairs: Vec<(Leaf, Option<usize>)> = match &self.first_depth {
            Some(ds) => self.leaves.drain(..).zip(ds.iter().map(|&d| Some(d))).collect(),
            None => self.leaves.drain(..).map(|l| (l, None)).collect(),
        };
        pairs.sort();
        pairs.dedup_by(|a, b| a.0 == b.0);
        if self.first_depth.is_some() {
            self.first_depth = Some(pairs.iter().map(|(_, d)| d.expect("annotated")).collect());
        }
        self.leaves = pairs.into_iter().map(|(l, _)| l).collect();
        if let Some(c) = &self.critical_portrait {
            if c.degree() != self.degree {
                return Err(CliError::Invalid("critical portrait degree differs from document degree".into()));
            }
        }
        if let Some(b) = &mut self.fpp {
            let p = FixedPointPortrait::new(self.degree, b.clone())?;
            *b = p.blocks().to_vec();
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        let mut doc: LaminationDocument = serde_json::from_str(text)?;
        doc.canonicalize()?;
        Ok(doc)
    }

    pub fn read(path: &Path) -> crate::Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> crate::Result<()> {
        fs::write(path, self.to_json()).map_err(|e| CliError::Io(path.display().to_string(), e))
    }
}
