use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Per-mode maximum photon number; the local dimension of mode `k` is
/// `per_mode_max[k] + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CutoffSpec {
    per_mode_max: Vec<usize>,
}

impl CutoffSpec {
    pub fn new(per_mode_max: Vec<usize>) -> Result<Self> {
        if per_mode_max.is_empty() {
            return Err(Error::invalid("a cutoff needs at least one mode"));
        }
        Ok(CutoffSpec { per_mode_max })
    }

    /// Same maximum photon number on every mode.
    pub fn uniform(modes: usize, n_max: usize) -> Result<Self> {
        Self::new(vec![n_max; modes])
    }

    pub fn modes(&self) -> usize {
        self.per_mode_max.len()
    }

    pub fn per_mode_max(&self) -> &[usize] {
        &self.per_mode_max
    }

    pub fn max(&self, mode: usize) -> usize {
        self.per_mode_max[mode]
    }

    pub fn dims(&self) -> Vec<usize> {
        self.per_mode_max.iter().map(|n| n + 1).collect()
    }

    /// Dimension of the full product basis.
    pub fn dim(&self) -> usize {
        self.per_mode_max.iter().map(|n| n + 1).product()
    }

    /// Largest total photon number representable.
    pub fn total_max(&self) -> usize {
        self.per_mode_max.iter().sum()
    }

    pub fn contains(&self, pattern: &PhotonPattern) -> bool {
        pattern.counts().len() == self.modes()
            && pattern.counts().iter().zip(&self.per_mode_max).all(|(n, m)| n <= m)
    }

    /// Concatenation, as for a tensor product.
    pub fn join(&self, other: &CutoffSpec) -> CutoffSpec {
        let mut v = self.per_mode_max.clone();
        v.extend_from_slice(&other.per_mode_max);
        CutoffSpec { per_mode_max: v }
    }
}

/// Photon counts, one per mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhotonPattern {
    counts: Vec<usize>,
}

impl PhotonPattern {
    pub fn new(counts: Vec<usize>) -> Self {
        PhotonPattern { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub(crate) fn check_within(&self, cutoff: &CutoffSpec) -> Result<()> {
        if cutoff.contains(self) {
            Ok(())
        } else {
            Err(Error::OutOfRange { pattern: self.counts.clone(), cutoff: cutoff.per_mode_max().to_vec() })
        }
    }
}

impl From<Vec<usize>> for PhotonPattern {
    fn from(counts: Vec<usize>) -> Self {
        PhotonPattern { counts }
    }
}

impl std::fmt::Display for PhotonPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.counts.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}
