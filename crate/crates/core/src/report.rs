//! Signature heterogeneity statistics over a set of equivalent solutions.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::equivalence::EquivalentSolutionSet;
use crate::{Error, Result};

/// `|a ∩ b| / |a ∪ b|`, with `J(∅, ∅) = 1`.
pub fn jaccard(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Size of the symmetric difference.
pub fn solution_specific_count(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> usize {
    a.symmetric_difference(b).count()
}

/// Sample standard deviation (`n − 1`) over the mean.
pub fn coefficient_of_variation(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::TooFew {
            needed: 2,
            got: values.len(),
        });
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return Err(Error::ZeroMean);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(var.sqrt() / mean)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureGroup {
    pub signature_size: usize,
    pub count: usize,
    /// Mean over all pairs in the group; absent for single-member groups.
    pub mean_jaccard: Option<f64>,
    pub mean_solution_specific: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureReport {
    /// Ordered by signature size.
    pub groups: Vec<SignatureGroup>,
    pub cov_performance: Option<f64>,
    pub cov_size: Option<f64>,
    pub n_signatures: usize,
}

/// Groups the solutions' supports by size and summarizes pairwise overlap
/// within each group.
///
/// Each solution counts as one signature. `cov_size` is absent with fewer
/// than two solutions; `cov_performance` is computed from `holdout_scores`
/// when given and absent when the scores are too few or average zero.
pub fn signature_report(
    set: &EquivalentSolutionSet,
    holdout_scores: Option<&[f64]>,
) -> SignatureReport {
    let sigs: Vec<BTreeSet<usize>> = set
        .solutions
        .iter()
        .map(|s| s.support.iter().copied().collect())
        .collect();
    let mut by_size: BTreeMap<usize, Vec<&BTreeSet<usize>>> = BTreeMap::new();
    for s in &sigs {
        by_size.entry(s.len()).or_default().push(s);
    }
    let groups = by_size
        .into_iter()
        .map(|(size, members)| {
            let mut jac = 0.0;
            let mut spec = 0.0;
            let mut pairs = 0usize;
            for (i, a) in members.iter().enumerate() {
                for b in &members[i + 1..] {
                    jac += jaccard(a, b);
                    spec += solution_specific_count(a, b) as f64;
                    pairs += 1;
                }
            }
            let mean = |v: f64| (pairs > 0).then(|| v / pairs as f64);
            SignatureGroup {
                signature_size: size,
                count: members.len(),
                mean_jaccard: mean(jac),
                mean_solution_specific: mean(spec),
            }
        })
        .collect();
    let sizes: Vec<f64> = sigs.iter().map(|s| s.len() as f64).collect();
    SignatureReport {
        groups,
        cov_performance: holdout_scores.and_then(|v| coefficient_of_variation(v).ok()),
        cov_size: coefficient_of_variation(&sizes).ok(),
        n_signatures: sigs.len(),
    }
}
