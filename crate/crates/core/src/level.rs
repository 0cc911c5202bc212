use serde::{Deserialize, Serialize};

use crate::error::{LandauError, Result};

/// Landau level k in half-dimension n; eigenvalue 2k + n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LevelIndex {
    pub k: u32,
    pub n: u32,
}

impl LevelIndex {
    pub fn new(k: u32, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(LandauError::InvalidInput("half-dimension n must be >= 1".into()));
        }
        Ok(Self { k, n })
    }

    /// Planar level (n = 1).
    pub fn planar(k: u32) -> Self {
        Self { k, n: 1 }
    }

    pub fn eigenvalue_exact(&self) -> u64 {
        2 * self.k as u64 + self.n as u64
    }

    pub fn eigenvalue(&self) -> f64 {
        self.eigenvalue_exact() as f64
    }

    pub(crate) fn require_planar(&self) -> Result<()> {
        if self.n != 1 {
            return Err(LandauError::UnsupportedDimension(self.n));
        }
        Ok(())
    }
}

pub fn landau_eigenvalue(idx: LevelIndex) -> f64 {
    idx.eigenvalue()
}

/// Distance from a real energy to the planar spectrum {1, 3, 5, ...}.
pub fn distance_to_spectrum(e: f64) -> f64 {
    if e <= 1.0 {
        return 1.0 - e;
    }
    let k = ((e - 1.0) / 2.0).round();
    (e - (2.0 * k + 1.0)).abs()
}

/// Levels 0..=k_max, angular indices 0..=m_max per level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisTruncation {
    pub k_max: u32,
    pub m_max: u32,
}

impl BasisTruncation {
    pub fn new(k_max: u32, m_max: u32) -> Self {
        Self { k_max, m_max }
    }

    pub fn dimension(&self) -> usize {
        (self.k_max as usize + 1) * (self.m_max as usize + 1)
    }

    /// Flat index of (k, m), level-major.
    pub fn index(&self, k: u32, m: u32) -> usize {
        k as usize * (self.m_max as usize + 1) + m as usize
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..=self.k_max).flat_map(move |k| (0..=self.m_max).map(move |m| (k, m)))
    }
}
