use crate::error::{Error, Result};

/// Default cap on the basis size.
pub const DEFAULT_DIM_LIMIT: usize = 2_000_000;

/// Truncated Fock space of modes `-M..=M` with per-mode photon cutoffs.
///
/// Basis states are indexed in mixed radix with mode `-M` most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockSpace {
    m: usize,
    cutoffs: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
}

impl FockSpace {
    pub fn new(m: usize, cutoffs: Vec<usize>) -> Result<Self> {
        Self::with_limit(m, cutoffs, DEFAULT_DIM_LIMIT)
    }

    pub fn uniform(m: usize, cutoff: usize) -> Result<Self> {
        Self::new(m, vec![cutoff; 2 * m + 1])
    }

    pub fn with_limit(m: usize, cutoffs: Vec<usize>, limit: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::param("M", "need at least modes ±1"));
        }
        if cutoffs.len() != 2 * m + 1 {
            return Err(Error::param(
                "cutoffs",
                format!("expected {} entries, got {}", 2 * m + 1, cutoffs.len()),
            ));
        }
        if cutoffs.iter().all(|&c| c == 0) {
            return Err(Error::TrivialSpace);
        }
        let dim = cutoffs
            .iter()
            .try_fold(1u128, |acc, &c| acc.checked_mul(c as u128 + 1))
            .unwrap_or(u128::MAX);
        if dim > limit as u128 {
            return Err(Error::DimensionOverflow { dim, limit });
        }
        let mut strides = vec![1; cutoffs.len()];
        for i in (0..cutoffs.len() - 1).rev() {
            strides[i] = strides[i + 1] * (cutoffs[i + 1] + 1);
        }
        Ok(Self {
            m,
            cutoffs,
            strides,
            dim: dim as usize,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoff(&self, k: i32) -> usize {
        self.cutoffs[self.slot(k)]
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn slot(&self, k: i32) -> usize {
        (k + self.m as i32) as usize
    }

    /// Index of an occupation vector (slot order), or `None` beyond a cutoff.
    pub fn index(&self, occ: &[usize]) -> Option<usize> {
        let mut idx = 0;
        for ((&n, &c), &s) in occ.iter().zip(&self.cutoffs).zip(&self.strides) {
            if n > c {
                return None;
            }
            idx += n * s;
        }
        Some(idx)
    }

    pub fn occupation(&self, index: usize) -> Vec<usize> {
        self.strides
            .iter()
            .zip(&self.cutoffs)
            .map(|(&s, &c)| (index / s) % (c + 1))
            .collect()
    }

    /// Whether any mode of the basis state sits at its cutoff.
    pub fn on_boundary(&self, index: usize) -> bool {
        self.occupation(index)
            .iter()
            .zip(&self.cutoffs)
            .any(|(n, c)| n == c)
    }
}
