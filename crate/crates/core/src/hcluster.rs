//! Agglomerative clustering with Ward linkage and nearest-centroid routing.
//!
//! A cluster is identified during agglomeration by the smallest row index it
//! contains; merging `a < b` keeps identifier `a`. Distances are Ward merge
//! heights, `sqrt(2 |A| |B| / (|A| + |B|)) * ||c_A - c_B||`, maintained through
//! the Lance-Williams recurrence on squared heights. Among equal minima the
//! lexicographically smallest `(a, b)` pair merges first.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkageStep {
    pub merged_a: usize,
    pub merged_b: usize,
    pub distance: f64,
    pub new_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub n_main_clusters: usize,
    /// Label per training row; label 0 is the largest cluster.
    pub assignments: Vec<usize>,
    /// Centroids in standardized space, indexed by label.
    pub centroids: Matrix,
    pub member_counts: Vec<usize>,
    /// Full merge trace, `n - 1` steps.
    pub linkage: Vec<LinkageStep>,
}

impl ClusterModel {
    pub fn dim(&self) -> usize {
        self.centroids.first().map_or(0, Vec::len)
    }

    /// Training row indices per label.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.n_main_clusters];
        for (row, &label) in self.assignments.iter().enumerate() {
            members[label].push(row);
        }
        members
    }
}

/// Index of pair `(i, j)`, `i < j`, in a condensed upper-triangular matrix.
#[inline]
fn condensed(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    n * i - i * (i + 1) / 2 + (j - i - 1)
}

fn check_rows(rows: &[Vec<f64>]) -> Result<usize> {
    let d = rows.first().map_or(0, Vec::len);
    for row in rows {
        if row.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("clustering input holds a non-finite value".into()));
        }
    }
    Ok(d)
}

/// Complete Ward dendrogram of `rows`.
pub fn ward_linkage(rows: &[Vec<f64>]) -> Result<Vec<LinkageStep>> {
    check_rows(rows)?;
    let n = rows.len();
    if n < 2 {
        return Ok(Vec::new());
    }
    let mut dist = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dist.push(rows[i].iter().zip(&rows[j]).map(|(x, y)| (x - y).powi(2)).sum::<f64>());
        }
    }
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut nn = vec![usize::MAX; n];
    let mut nn_dist = vec![f64::INFINITY; n];

    let rescan = |i: usize, active: &[bool], dist: &[f64], nn: &mut [usize], nn_dist: &mut [f64]| {
        nn[i] = usize::MAX;
        nn_dist[i] = f64::INFINITY;
        for j in (i + 1)..n {
            if active[j] {
                let d = dist[condensed(n, i, j)];
                if d < nn_dist[i] {
                    nn_dist[i] = d;
                    nn[i] = j;
                }
            }
        }
    };
    for i in 0..n {
        rescan(i, &active, &dist, &mut nn, &mut nn_dist);
    }

    let mut steps = Vec::with_capacity(n - 1);
    for _ in 0..(n - 1) {
        let mut a = usize::MAX;
        let mut best = f64::INFINITY;
        for i in 0..n {
            if active[i] && nn[i] != usize::MAX && (a == usize::MAX || nn_dist[i] < best) {
                a = i;
                best = nn_dist[i];
            }
        }
        let b = nn[a];
        let d_ab = best;
        steps.push(LinkageStep {
            merged_a: a,
            merged_b: b,
            distance: d_ab.sqrt(),
            new_size: size[a] + size[b],
        });

        let (sa, sb) = (size[a] as f64, size[b] as f64);
        for k in 0..n {
            if !active[k] || k == a || k == b {
                continue;
            }
            let sk = size[k] as f64;
            let ka = dist[condensed(n, k.min(a), k.max(a))];
            let kb = dist[condensed(n, k.min(b), k.max(b))];
            let updated = ((sa + sk) * ka + (sb + sk) * kb - sk * d_ab) / (sa + sb + sk);
            dist[condensed(n, k.min(a), k.max(a))] = updated.max(0.0);
        }
        size[a] += size[b];
        active[b] = false;
        nn[b] = usize::MAX;
        nn_dist[b] = f64::INFINITY;

        for i in 0..n {
            if !active[i] || i == a {
                continue;
            }
            if i < b && (nn[i] == a || nn[i] == b) {
                rescan(i, &active, &dist, &mut nn, &mut nn_dist);
            } else if i < a {
                let d = dist[condensed(n, i, a)];
                if d < nn_dist[i] || (d == nn_dist[i] && a < nn[i]) {
                    nn[i] = a;
                    nn_dist[i] = d;
                }
            }
        }
        rescan(a, &active, &dist, &mut nn, &mut nn_dist);
    }
    Ok(steps)
}

/// Cuts the Ward dendrogram of `rows` into exactly `k` clusters.
pub fn cluster(rows: &[Vec<f64>], k: usize) -> Result<ClusterModel> {
    let n = rows.len();
    if k == 0 {
        return Err(Error::Config("number of clusters must be at least 1".into()));
    }
    if k > n {
        return Err(Error::Config(format!("cannot form {k} clusters from {n} rows")));
    }
    let linkage = ward_linkage(rows)?;
    let d = rows[0].len();

    let mut parent: Vec<usize> = (0..n).collect();
    for step in &linkage[..n - k] {
        parent[step.merged_b] = step.merged_a;
    }
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();

    let mut counts = vec![0usize; n];
    for &r in &roots {
        counts[r] += 1;
    }
    let mut order: Vec<usize> = (0..n).filter(|&r| counts[r] > 0).collect();
    order.sort_by(|&x, &y| counts[y].cmp(&counts[x]).then(x.cmp(&y)));
    let mut label_of = vec![usize::MAX; n];
    for (label, &root) in order.iter().enumerate() {
        label_of[root] = label;
    }
    let assignments: Vec<usize> = roots.iter().map(|&r| label_of[r]).collect();

    let mut centroids = vec![vec![0.0; d]; k];
    let mut member_counts = vec![0usize; k];
    for (row, &label) in rows.iter().zip(&assignments) {
        member_counts[label] += 1;
        for (c, v) in centroids[label].iter_mut().zip(row) {
            *c += v;
        }
    }
    for (centroid, &count) in centroids.iter_mut().zip(&member_counts) {
        for c in centroid.iter_mut() {
            *c /= count as f64;
        }
    }
    Ok(ClusterModel {
        n_main_clusters: k,
        assignments,
        centroids,
        member_counts,
        linkage,
    })
}

/// Nearest centroid by Euclidean distance; ties go to the lowest label.
pub fn nearest_cluster(point: &[f64], model: &ClusterModel) -> Result<(usize, f64)> {
    if point.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: point.len(),
        });
    }
    let mut best = (0, f64::INFINITY);
    for (label, centroid) in model.centroids.iter().enumerate() {
        let d = centroid.iter().zip(point).map(|(c, x)| (c - x).powi(2)).sum::<f64>();
        if d < best.1 {
            best = (label, d);
        }
    }
    Ok((best.0, best.1.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn model_with(centroids: Matrix) -> ClusterModel {
        let k = centroids.len();
        ClusterModel {
            n_main_clusters: k,
            assignments: (0..k).collect(),
            centroids,
            member_counts: vec![1; k],
            linkage: Vec::new(),
        }
    }

    #[test]
    fn separated_pairs() {
        let rows = vec![vec![0.0, 0.0], vec![10.0, 10.0], vec![0.0, 0.1], vec![10.0, 10.1]];
        let m = cluster(&rows, 2).unwrap();
        assert_eq!(m.assignments[0], m.assignments[2]);
        assert_eq!(m.assignments[1], m.assignments[3]);
        assert_ne!(m.assignments[0], m.assignments[1]);
        assert_eq!(m.member_counts, vec![2, 2]);
        // equal sizes: the cluster holding row 0 is labelled first
        assert_eq!(m.assignments[0], 0);
        assert!((m.centroids[0][1] - 0.05).abs() < 1e-12);
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let rows = vec![vec![1.0], vec![4.0], vec![2.0]];
        let m = cluster(&rows, 3).unwrap();
        let labels: BTreeSet<usize> = m.assignments.iter().copied().collect();
        assert_eq!(labels.len(), 3);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(&m.centroids[m.assignments[i]], row);
        }
    }

    #[test]
    fn invalid_k() {
        let rows = vec![vec![1.0], vec![2.0]];
        assert!(cluster(&rows, 0).is_err());
        assert!(cluster(&rows, 3).is_err());
    }

    #[test]
    fn ward_heights_match_centroid_formula() {
        // {0,1} merge at 1, {5} joins: sqrt(2*2*1/3) * |0.5 - 5|
        let rows = vec![vec![0.0], vec![1.0], vec![5.0]];
        let steps = ward_linkage(&rows).unwrap();
        assert_eq!((steps[0].merged_a, steps[0].merged_b, steps[0].new_size), (0, 1, 2));
        assert!((steps[0].distance - 1.0).abs() < 1e-12);
        assert_eq!((steps[1].merged_a, steps[1].merged_b, steps[1].new_size), (0, 2, 3));
        let expected = (4.0f64 / 3.0).sqrt() * 4.5;
        assert!((steps[1].distance - expected).abs() < 1e-12);
    }

    #[test]
    fn ties_merge_smallest_pair_first() {
        let rows = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let steps = ward_linkage(&rows).unwrap();
        assert_eq!((steps[0].merged_a, steps[0].merged_b), (0, 1));
        assert_eq!((steps[1].merged_a, steps[1].merged_b), (2, 3));
    }

    #[test]
    fn routing_examples() {
        let m = model_with(vec![vec![0.0, 0.0], vec![3.0, 4.0]]);
        assert_eq!(nearest_cluster(&[3.0, 4.0], &m).unwrap(), (1, 0.0));
        let d = {
            let c = &m.centroids[1];
            ((c[0] - 0.0f64).powi(2) + (c[1] - 0.0f64).powi(2)).sqrt()
        };
        assert_eq!(d, 5.0);
        assert_eq!(nearest_cluster(&[0.0, 0.0], &m).unwrap(), (0, 0.0));

        let m = model_with(vec![vec![9.0], vec![-1.0], vec![1.0], vec![7.0]]);
        assert_eq!(nearest_cluster(&[0.0], &m).unwrap(), (1, 1.0));
        assert_eq!(nearest_cluster(&[7.0], &m).unwrap(), (3, 0.0));
        assert!(matches!(
            nearest_cluster(&[0.0, 1.0], &m),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    /// O(n^3) greedy Ward straight from the centroid definition.
    fn naive_ward(rows: &[Vec<f64>]) -> Vec<(f64, BTreeSet<usize>)> {
        let mut clusters: Vec<Vec<usize>> = (0..rows.len()).map(|i| vec![i]).collect();
        let centroid = |members: &[usize]| -> Vec<f64> {
            let d = rows[0].len();
            let mut c = vec![0.0; d];
            for &m in members {
                for (cj, x) in c.iter_mut().zip(&rows[m]) {
                    *cj += x / members.len() as f64;
                }
            }
            c
        };
        let mut merges = Vec::new();
        while clusters.len() > 1 {
            let mut best = (f64::INFINITY, 0, 0);
            for i in 0..clusters.len() {
                for j in (i + 1)..clusters.len() {
                    let (ci, cj) = (centroid(&clusters[i]), centroid(&clusters[j]));
                    let (ni, nj) = (clusters[i].len() as f64, clusters[j].len() as f64);
                    let d2: f64 = ci.iter().zip(&cj).map(|(a, b)| (a - b).powi(2)).sum();
                    let h = (2.0 * ni * nj / (ni + nj) * d2).sqrt();
                    if h < best.0 {
                        best = (h, i, j);
                    }
                }
            }
            let merged: Vec<usize> = clusters[best.1].iter().chain(&clusters[best.2]).copied().collect();
            merges.push((best.0, merged.iter().copied().collect()));
            clusters.remove(best.2);
            clusters[best.1] = merged;
        }
        merges
    }

    fn partition(assignments: &[usize]) -> BTreeSet<BTreeSet<usize>> {
        let k = assignments.iter().max().map_or(0, |m| m + 1);
        (0..k)
            .map(|c| (0..assignments.len()).filter(|&i| assignments[i] == c).collect())
            .collect()
    }

    fn points() -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 2), 2..24)
    }

    proptest! {
        #[test]
        fn matches_naive_ward(rows in points()) {
            let fast = ward_linkage(&rows).unwrap();
            let slow = naive_ward(&rows);
            prop_assert_eq!(fast.len(), slow.len());
            for (f, s) in fast.iter().zip(&slow) {
                prop_assert!((f.distance - s.0).abs() <= 1e-9 * (1.0 + s.0));
                prop_assert_eq!(f.new_size, s.1.len());
            }
        }

        #[test]
        fn heights_are_monotone(rows in points()) {
            let steps = ward_linkage(&rows).unwrap();
            for w in steps.windows(2) {
                prop_assert!(w[1].distance >= w[0].distance);
            }
        }

        #[test]
        fn model_invariants(rows in points(), k_seed in 0usize..100) {
            let k = 1 + k_seed % rows.len();
            let m = cluster(&rows, k).unwrap();
            prop_assert_eq!(m.member_counts.iter().sum::<usize>(), rows.len());
            prop_assert!(m.member_counts.iter().all(|&c| c > 0));
            prop_assert!(m.member_counts.windows(2).all(|w| w[0] >= w[1]));
            for (label, members) in m.members().iter().enumerate() {
                for j in 0..2 {
                    let mean = members.iter().map(|&i| rows[i][j]).sum::<f64>() / members.len() as f64;
                    prop_assert!((mean - m.centroids[label][j]).abs() < 1e-9);
                }
            }
            for row in &rows {
                let (label, _) = nearest_cluster(row, &m).unwrap();
                prop_assert!(label < k);
            }
        }

        #[test]
        fn row_order_does_not_change_partition(rows in points(), k_seed in 0usize..100, rot in 0usize..100) {
            let k = 1 + k_seed % rows.len();
            let n = rows.len();
            let perm: Vec<usize> = (0..n).map(|i| (i * 7 + rot) % n).collect();
            prop_assume!({
                let mut p = perm.clone();
                p.sort_unstable();
                p.dedup();
                p.len() == n
            });
            let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| rows[i].clone()).collect();
            let a = cluster(&rows, k).unwrap();
            let b = cluster(&permuted, k).unwrap();
            let pa = partition(&a.assignments);
            let pb: BTreeSet<BTreeSet<usize>> = partition(&b.assignments)
                .into_iter()
                .map(|set| set.into_iter().map(|i| perm[i]).collect())
                .collect();
            prop_assert_eq!(pa, pb);
        }
    }
}
