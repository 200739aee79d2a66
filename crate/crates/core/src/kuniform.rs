//! k-uniform strategies: uniform distributions over a multiset of `k` pure
//! strategies, stored as a sorted multiset.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::MixedStrategy;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KUniformError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("action count must be at least 1")]
    ZeroActions,
    #[error("multiset has {got} entries, expected k = {k}")]
    WrongSize { got: usize, k: usize },
    #[error("action {action} out of range for {m} actions")]
    ActionOutOfRange { action: usize, m: usize },
    #[error("epsilon must lie in (0, 1], got {0}")]
    BadEpsilon(f64),
    #[error("n and m must be at least 1")]
    EmptyGame,
}

/// Uniform distribution over a multiset of `k` pure strategies.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KUniformStrategy {
    m: usize,
    multiset: Vec<usize>,
}

impl KUniformStrategy {
    /// Builds from any ordering of the multiset; it is stored sorted.
    pub fn new(m: usize, mut multiset: Vec<usize>) -> Result<Self, KUniformError> {
        if m == 0 {
            return Err(KUniformError::ZeroActions);
        }
        if multiset.is_empty() {
            return Err(KUniformError::ZeroK);
        }
        if let Some(&action) = multiset.iter().find(|&&a| a >= m) {
            return Err(KUniformError::ActionOutOfRange { action, m });
        }
        multiset.sort_unstable();
        Ok(Self { m, multiset })
    }

    /// Builds from per-action multiplicities summing to `k`.
    pub fn from_counts(counts: &[usize]) -> Result<Self, KUniformError> {
        let multiset = counts
            .iter()
            .enumerate()
            .flat_map(|(a, &c)| std::iter::repeat_n(a, c))
            .collect();
        Self::new(counts.len(), multiset)
    }

    pub fn k(&self) -> usize {
        self.multiset.len()
    }

    pub fn num_actions(&self) -> usize {
        self.m
    }

    pub fn multiset(&self) -> &[usize] {
        &self.multiset
    }

    /// Multiplicity of each action.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.m];
        for &a in &self.multiset {
            c[a] += 1;
        }
        c
    }

    pub fn probs(&self) -> Vec<f64> {
        let k = self.k() as f64;
        self.counts().into_iter().map(|c| c as f64 / k).collect()
    }

    pub fn to_mixed(&self) -> MixedStrategy {
        MixedStrategy::new(self.probs()).expect("multiplicities over k form a distribution")
    }
}

/// Number of multisets of size `k` over `m` actions, `C(m + k - 1, k)`.
pub fn count_k_uniform(m: usize, k: usize) -> u128 {
    if m == 0 {
        return 0;
    }
    binomial((m + k - 1) as u128, k as u128)
}

pub(crate) fn binomial(n: u128, r: u128) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// All k-uniform strategies over `m` actions in lexicographic order of the
/// sorted multiset.
pub fn enumerate_k_uniform(m: usize, k: usize) -> Result<Vec<KUniformStrategy>, KUniformError> {
    if k == 0 {
        return Err(KUniformError::ZeroK);
    }
    if m == 0 {
        return Err(KUniformError::ZeroActions);
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; k];
    loop {
        out.push(KUniformStrategy {
            m,
            multiset: cur.clone(),
        });
        // advance to the next non-decreasing sequence
        let Some(pos) = cur.iter().rposition(|&a| a + 1 < m) else {
            break;
        };
        let next = cur[pos] + 1;
        for a in &mut cur[pos..] {
            *a = next;
        }
    }
    Ok(out)
}

fn bound_numerator(n: usize, m: usize, eps: f64) -> Result<f64, KUniformError> {
    if n == 0 || m == 0 {
        return Err(KUniformError::EmptyGame);
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(KUniformError::BadEpsilon(eps));
    }
    Ok((m as f64).ln() + (n as f64).ln() - eps.ln() + 8f64.ln())
}

/// `ceil(128 (ln m + ln n - ln eps + ln 8) / eps^2)`: the sample count for
/// which the tree-decomposition solver is guaranteed to find a 1.5-eps
/// equilibrium.
pub fn k_bound(n: usize, m: usize, eps: f64) -> Result<u64, KUniformError> {
    let num = bound_numerator(n, m, eps)?;
    Ok((128.0 * num / (eps * eps)).ceil() as u64)
}

/// `ceil(8 (ln m + ln n - ln eps + ln 8) / eps^2)`: the sample count at which
/// every game has a k-uniform eps-equilibrium.
pub fn k_bound_existence(n: usize, m: usize, eps: f64) -> Result<u64, KUniformError> {
    let num = bound_numerator(n, m, eps)?;
    Ok((8.0 * num / (eps * eps)).ceil() as u64)
}
