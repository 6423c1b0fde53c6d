//! Clustering and alignment evaluation: label-matching accuracy, adjusted
//! mutual information, homogeneity/completeness, and pairwise relative
//! rotation/translation errors.

use crate::error::{Error, Result};
use crate::scalar::{wrap_angle, Scalar};

/// A pair of clusterings over the same samples.
#[derive(Debug, Clone)]
pub struct ClusteringPair {
    pub true_labels: Vec<usize>,
    pub predicted_labels: Vec<usize>,
}

impl ClusteringPair {
    pub fn new(true_labels: Vec<usize>, predicted_labels: Vec<usize>) -> Result<Self> {
        if true_labels.is_empty() {
            return Err(Error::invalid("empty clustering"));
        }
        if true_labels.len() != predicted_labels.len() {
            return Err(Error::DimensionMismatch {
                expected: true_labels.len(),
                got: predicted_labels.len(),
            });
        }
        Ok(Self {
            true_labels,
            predicted_labels,
        })
    }

    pub fn len(&self) -> usize {
        self.true_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.true_labels.is_empty()
    }
}

/// Per-image true and predicted rigid poses.
#[derive(Debug, Clone)]
pub struct AlignmentRecord<T: Scalar> {
    pub alpha_true: T,
    pub alpha_pred: T,
    pub t_true: [T; 2],
    pub t_pred: [T; 2],
}

/// Contingency counts: rows = true labels, cols = predicted labels.
fn contingency(pair: &ClusteringPair) -> (Vec<Vec<usize>>, usize, usize) {
    let rows = pair.true_labels.iter().max().unwrap() + 1;
    let cols = pair.predicted_labels.iter().max().unwrap() + 1;
    let mut table = vec![vec![0usize; cols]; rows];
    for (&c, &k) in pair.true_labels.iter().zip(&pair.predicted_labels) {
        table[c][k] += 1;
    }
    (table, rows, cols)
}

/// Maximum-weight assignment on a rectangular profit matrix via the O(n^3)
/// Hungarian algorithm (shortest augmenting paths with potentials); returns
/// the total matched profit.
fn max_assignment(profit: &[Vec<usize>]) -> usize {
    let rows = profit.len();
    let cols = profit[0].len();
    let n = rows.max(cols);
    let big = profit
        .iter()
        .flat_map(|r| r.iter())
        .copied()
        .max()
        .unwrap_or(0) as i64;
    // pad to square and convert to a min-cost problem
    let cost = |i: usize, j: usize| -> i64 {
        if i < rows && j < cols {
            big - profit[i][j] as i64
        } else {
            big
        }
    };
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut matched = vec![n; n + 1]; // matched[j] = row assigned to column j
    for i in 0..n {
        let mut j0 = n;
        matched[j0] = i;
        let mut min_v = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        let mut prev = vec![n; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = i64::MAX;
            let mut j1 = n;
            for j in 0..n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < min_v[j] {
                    min_v[j] = cur;
                    prev[j] = j0;
                }
                if min_v[j] < delta {
                    delta = min_v[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_v[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == n {
                break;
            }
        }
        // augment along the alternating path
        while j0 != n {
            let j1 = prev[j0];
            matched[j0] = matched[j1];
            j0 = j1;
        }
    }
    let mut total = 0usize;
    for j in 0..n {
        let i = matched[j];
        if i < rows && j < cols {
            total += profit[i][j];
        }
    }
    total
}

/// Fraction of samples matched under the best injective mapping between the
/// two label sets.
pub fn accuracy(pair: &ClusteringPair) -> f64 {
    let (table, _, _) = contingency(pair);
    max_assignment(&table) as f64 / pair.len() as f64
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n + 1];
    for k in 2..=n {
        t[k] = t[k - 1] + (k as f64).ln();
    }
    t
}

fn entropy(counts: &[usize], n: usize) -> f64 {
    let nf = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / nf;
            -p * p.ln()
        })
        .sum()
}

fn mutual_information(table: &[Vec<usize>], a: &[usize], b: &[usize], n: usize) -> f64 {
    let nf = n as f64;
    let mut mi = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij == 0 {
                continue;
            }
            let p = nij as f64 / nf;
            mi += p * ((nf * nij as f64) / (a[i] as f64 * b[j] as f64)).ln();
        }
    }
    mi
}

/// Exact permutation-model expectation of the mutual information
/// (hypergeometric sum over feasible cell counts).
fn expected_mi(a: &[usize], b: &[usize], n: usize) -> f64 {
    let lf = ln_factorials(n);
    let nf = n as f64;
    let mut emi = 0.0;
    for &ai in a {
        for &bj in b {
            if ai == 0 || bj == 0 {
                continue;
            }
            let lo = 1.max((ai + bj).saturating_sub(n));
            let hi = ai.min(bj);
            for nij in lo..=hi {
                let term = (nij as f64 / nf) * ((nf * nij as f64) / (ai as f64 * bj as f64)).ln();
                let ln_p = lf[ai] + lf[bj] + lf[n - ai] + lf[n - bj]
                    - lf[n]
                    - lf[nij]
                    - lf[ai - nij]
                    - lf[bj - nij]
                    - lf[n + nij - ai - bj];
                emi += term * ln_p.exp();
            }
        }
    }
    emi
}

fn marginals(table: &[Vec<usize>]) -> (Vec<usize>, Vec<usize>) {
    let rows = table.len();
    let cols = table[0].len();
    let a: Vec<usize> = (0..rows).map(|i| table[i].iter().sum()).collect();
    let b: Vec<usize> = (0..cols).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    (a, b)
}

/// Adjusted mutual information with arithmetic-mean normalization and the
/// exact hypergeometric expectation; natural logarithms throughout.
pub fn adjusted_mutual_information(pair: &ClusteringPair) -> f64 {
    let (table, _, _) = contingency(pair);
    let (a, b) = marginals(&table);
    let n = pair.len();
    let h_a = entropy(&a, n);
    let h_b = entropy(&b, n);
    if h_a == 0.0 && h_b == 0.0 {
        return 1.0;
    }
    let mi = mutual_information(&table, &a, &b, n);
    let emi = expected_mi(&a, &b, n);
    let denom = 0.5 * (h_a + h_b) - emi;
    if denom.abs() < 1e-15 {
        return 0.0;
    }
    (mi - emi) / denom
}

/// Homogeneity (each predicted cluster pure) and completeness (each true
/// cluster kept whole): `h = 1 - H(C|K)/H(C)`, `c = 1 - H(K|C)/H(K)`,
/// degenerate denominators give 1.
pub fn homogeneity_completeness(pair: &ClusteringPair) -> (f64, f64) {
    let (table, _, _) = contingency(pair);
    let (a, b) = marginals(&table);
    let n = pair.len();
    let h_c = entropy(&a, n);
    let h_k = entropy(&b, n);
    let mi = mutual_information(&table, &a, &b, n);
    // H(C|K) = H(C) - I(C;K), H(K|C) = H(K) - I(C;K)
    let h = if h_c == 0.0 { 1.0 } else { mi / h_c };
    let c = if h_k == 0.0 { 1.0 } else { mi / h_k };
    (h.clamp(0.0, 1.0), c.clamp(0.0, 1.0))
}

/// RMS relative rotation (radians, wrapped to [0, pi]) and translation
/// (pixels) errors over ordered sample pairs assigned together by both
/// clusterings. Exact O(n^2) within each joint group.
pub fn relative_alignment_errors<T: Scalar>(
    records: &[AlignmentRecord<T>],
    pair: &ClusteringPair,
) -> Result<(T, T, usize)> {
    if records.len() != pair.len() {
        return Err(Error::DimensionMismatch {
            expected: pair.len(),
            got: records.len(),
        });
    }
    // bucket indices by (true, predicted) label pair
    use std::collections::HashMap;
    let mut groups: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for i in 0..pair.len() {
        groups
            .entry((pair.true_labels[i], pair.predicted_labels[i]))
            .or_default()
            .push(i);
    }
    let mut ae_sum = T::zero();
    let mut te_sum = T::zero();
    let mut count = 0usize;
    for idx in groups.values() {
        for (p, &i) in idx.iter().enumerate() {
            for &j in &idx[p + 1..] {
                let (ri, rj) = (&records[i], &records[j]);
                let da = wrap_angle(
                    (ri.alpha_true - rj.alpha_true) - (ri.alpha_pred - rj.alpha_pred),
                );
                let dx = (ri.t_true[0] - rj.t_true[0]) - (ri.t_pred[0] - rj.t_pred[0]);
                let dy = (ri.t_true[1] - rj.t_true[1]) - (ri.t_pred[1] - rj.t_pred[1]);
                // unordered pairs doubled = the ordered-pair sum
                ae_sum += T::lit(2.0) * da * da;
                te_sum += T::lit(2.0) * (dx * dx + dy * dy);
                count += 2;
            }
        }
    }
    if count == 0 {
        return Err(Error::invalid("undefined AE-2/TE-2: no jointly-assigned pairs"));
    }
    let nf = T::from_usize(count).unwrap();
    Ok(((ae_sum / nf).sqrt(), (te_sum / nf).sqrt(), count))
}
