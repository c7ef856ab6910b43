//! Squared-Euclidean distances and average-linkage (UPGMA) agglomeration.
//!
//! Node ids follow the usual stepwise-dendrogram convention: leaves are
//! `0..n` in matrix order and the merge at 0-based step `s` creates node
//! `n + s`. Heights stay in squared-distance units.

use std::cmp::Ordering;
use std::io::Write;

use serde::Serialize;

use crate::diag::Warning;
use crate::error::{Error, Result};
use crate::standardize::{FoiRow, FoiTable};

pub const DENDROGRAM_HEADER: [&str; 5] = ["step", "left", "right", "height", "size"];
pub const CUT_HEADER: [&str; 2] = ["country", "cluster_id"];

/// Sum of squared coordinate differences. Not a metric.
pub fn sq_euclidean(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Squared distance between two rows' `(F, O, I)` points.
pub fn foi_distance(a: &FoiRow, b: &FoiRow) -> Result<f64> {
    Ok(sq_euclidean(&a.require_point()?, &b.require_point()?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    data: Vec<f64>,
    excluded: Vec<String>,
    year: Option<i32>,
}

impl DistanceMatrix {
    pub fn from_points<P: AsRef<[f64]>>(labels: Vec<String>, points: &[P]) -> Self {
        assert_eq!(labels.len(), points.len(), "one label per point");
        let n = points.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = sq_euclidean(points[i].as_ref(), points[j].as_ref());
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        DistanceMatrix {
            labels,
            data,
            excluded: Vec::new(),
            year: None,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.len() + j]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn between(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.get(self.index_of(a)?, self.index_of(b)?))
    }

    /// Countries left out because an index was missing.
    pub fn excluded(&self) -> &[String] {
        &self.excluded
    }

    pub fn warnings(&self) -> Vec<Warning> {
        self.excluded
            .iter()
            .map(|c| Warning::ExcludedFromClustering {
                country: c.clone(),
                year: self.year.unwrap_or_default(),
            })
            .collect()
    }
}

/// Matrix over the countries of `year` with all three indices present.
pub fn distance_matrix(foi: &FoiTable, year: i32) -> Result<DistanceMatrix> {
    let mut labels = Vec::new();
    let mut points = Vec::new();
    let mut excluded = Vec::new();
    for row in foi.year(year) {
        match row.point() {
            Some(p) => {
                labels.push(row.country.clone());
                points.push(p);
            }
            None => excluded.push(row.country.clone()),
        }
    }
    if labels.len() < 2 {
        return Err(Error::TooFewPoints(labels.len()));
    }
    let mut dm = DistanceMatrix::from_points(labels, &points);
    dm.excluded = excluded;
    dm.year = Some(year);
    Ok(dm)
}

/// Cluster-distance update rule. Only between-groups average linkage is provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Linkage {
    #[default]
    Average,
}

impl Linkage {
    /// Distance from cluster `k` to the union of `i` and `j` (Lance-Williams).
    ///
    /// Written as `lo + w * (hi - lo)` so the result never drops below the
    /// smaller input, which keeps merge heights monotone in floating point.
    fn update(self, d_ki: f64, d_kj: f64, size_i: usize, size_j: usize) -> f64 {
        match self {
            Linkage::Average => {
                let total = (size_i + size_j) as f64;
                let (lo, hi, w_hi) = if d_ki <= d_kj {
                    (d_ki, d_kj, size_j as f64 / total)
                } else {
                    (d_kj, d_ki, size_i as f64 / total)
                };
                lo + w_hi * (hi - lo)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Merge {
    /// Smaller node id of the pair.
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dendrogram {
    labels: Vec<String>,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn leaves(&self) -> usize {
        self.labels.len()
    }

    /// Leaf label, or `#step` (1-based) for an internal node.
    pub fn node_name(&self, node: usize) -> String {
        match self.labels.get(node) {
            Some(label) => label.clone(),
            None => format!("#{}", node - self.labels.len() + 1),
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(DENDROGRAM_HEADER).map_err(Error::csv)?;
        for (s, m) in self.merges.iter().enumerate() {
            wtr.write_record([
                (s + 1).to_string(),
                self.node_name(m.left),
                self.node_name(m.right),
                m.height.to_string(),
                m.size.to_string(),
            ])
            .map_err(Error::csv)?;
        }
        wtr.flush().map_err(|e| Error::io("<dendrogram>", e))
    }
}

pub fn agglomerate(dm: &DistanceMatrix) -> Result<Dendrogram> {
    agglomerate_with(dm, Linkage::Average)
}

/// Merges the closest pair of active clusters until one remains.
///
/// Equal distances go to the pair with the smallest node id, then the
/// smallest second node id.
pub fn agglomerate_with(dm: &DistanceMatrix, linkage: Linkage) -> Result<Dendrogram> {
    let n = dm.len();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    // Slot-indexed working copy; a merged cluster lives on in the first slot of its pair.
    let mut d = dm.data.clone();
    let mut node: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for a in (0..n).filter(|&a| active[a]) {
            for b in ((a + 1)..n).filter(|&b| active[b]) {
                let dist = d[a * n + b];
                let (lo, hi) = if node[a] < node[b] { (node[a], node[b]) } else { (node[b], node[a]) };
                let better = match best {
                    None => true,
                    Some((bd, blo, bhi, _, _)) => dist
                        .total_cmp(&bd)
                        .then(lo.cmp(&blo))
                        .then(hi.cmp(&bhi))
                        == Ordering::Less,
                };
                if better {
                    best = Some((dist, lo, hi, a, b));
                }
            }
        }
        let (height, left, right, a, b) = best.expect("at least two active clusters");

        for k in (0..n).filter(|&k| active[k] && k != a && k != b) {
            let v = linkage.update(d[k * n + a], d[k * n + b], size[a], size[b]);
            d[k * n + a] = v;
            d[a * n + k] = v;
        }
        size[a] += size[b];
        active[b] = false;
        node[a] = n + step;
        merges.push(Merge {
            left,
            right,
            height,
            size: size[a],
        });
    }

    Ok(Dendrogram {
        labels: dm.labels.clone(),
        merges,
    })
}

/// A flat partition into `k` clusters numbered `1..=k`.
///
/// Clusters are numbered in order of their first leaf in label order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterCut {
    pub k: usize,
    labels: Vec<String>,
    assignment: Vec<usize>,
}

impl ClusterCut {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn cluster_of(&self, country: &str) -> Option<usize> {
        let i = self.labels.iter().position(|l| l == country)?;
        Some(self.assignment[i])
    }

    pub fn members(&self, cluster: usize) -> Vec<&str> {
        self.labels
            .iter()
            .zip(&self.assignment)
            .filter(|(_, c)| **c == cluster)
            .map(|(l, _)| l.as_str())
            .collect()
    }

    /// Member lists for clusters `1..=k`.
    pub fn clusters(&self) -> Vec<Vec<&str>> {
        (1..=self.k).map(|c| self.members(c)).collect()
    }

    pub fn assignments(&self) -> impl Iterator<Item = (&str, usize)> {
        self.labels.iter().map(String::as_str).zip(self.assignment.iter().copied())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(CUT_HEADER).map_err(Error::csv)?;
        for (label, c) in self.assignments() {
            wtr.write_record([label, &c.to_string()]).map_err(Error::csv)?;
        }
        wtr.flush().map_err(|e| Error::io("<cut>", e))
    }
}

/// Partition left after undoing the last `k − 1` merges.
pub fn cut(tree: &Dendrogram, k: usize) -> Result<ClusterCut> {
    let n = tree.leaves();
    if k < 1 || k > n {
        return Err(Error::CutOutOfRange { k, n });
    }
    // Union-find over all 2n − 1 node ids.
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (s, m) in tree.merges.iter().take(n - k).enumerate() {
        let joined = n + s;
        let l = find(&mut parent, m.left);
        let r = find(&mut parent, m.right);
        parent[l] = joined;
        parent[r] = joined;
    }

    let mut root_ids: Vec<usize> = Vec::with_capacity(k);
    let mut assignment = Vec::with_capacity(n);
    for leaf in 0..n {
        let root = find(&mut parent, leaf);
        let id = match root_ids.iter().position(|&r| r == root) {
            Some(i) => i + 1,
            None => {
                root_ids.push(root);
                root_ids.len()
            }
        };
        assignment.push(id);
    }
    debug_assert_eq!(root_ids.len(), k);
    Ok(ClusterCut {
        k,
        labels: tree.labels.clone(),
        assignment,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterMeans {
    pub cluster: usize,
    pub size: usize,
    /// Mean `(F, O, I)`.
    pub means: [f64; 3],
}

/// Per-cluster arithmetic means of the members' `(F, O, I)` in `year`.
pub fn cluster_means(cut: &ClusterCut, foi: &FoiTable, year: i32) -> Result<Vec<ClusterMeans>> {
    let mut out = Vec::with_capacity(cut.k);
    for (idx, members) in cut.clusters().into_iter().enumerate() {
        let mut sums = [0.0; 3];
        for country in &members {
            let row = foi.get(country, year).ok_or_else(|| Error::MissingIndex {
                country: country.to_string(),
                year,
                pillar: crate::panel::PillarId::F,
            })?;
            let p = row.require_point()?;
            for (s, v) in sums.iter_mut().zip(p) {
                *s += v;
            }
        }
        let size = members.len();
        out.push(ClusterMeans {
            cluster: idx + 1,
            size,
            means: sums.map(|s| s / size as f64),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Proximity {
    pub country: String,
    pub distance: f64,
}

/// Co-members of `focal`'s cluster, nearest first (ties by country code).
pub fn proximity_report(dm: &DistanceMatrix, focal: &str, cut: &ClusterCut) -> Result<Vec<Proximity>> {
    let fi = dm.index_of(focal).ok_or_else(|| Error::UnknownFocal(focal.to_string()))?;
    let cluster = cut
        .cluster_of(focal)
        .ok_or_else(|| Error::UnknownFocal(focal.to_string()))?;
    let mut out: Vec<Proximity> = cut
        .members(cluster)
        .into_iter()
        .filter(|c| *c != focal)
        .filter_map(|c| {
            dm.index_of(c).map(|j| Proximity {
                country: c.to_string(),
                distance: dm.get(fi, j),
            })
        })
        .collect();
    out.sort_by(|a, b| a.distance.total_cmp(&b.distance).then_with(|| a.country.cmp(&b.country)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("P{i}")).collect()
    }

    fn line_matrix(xs: &[f64]) -> DistanceMatrix {
        let pts: Vec<[f64; 1]> = xs.iter().map(|x| [*x]).collect();
        DistanceMatrix::from_points(labels(xs.len()), &pts)
    }

    #[test]
    fn sq_euclidean_examples() {
        let hun = [3.1, 4.4, 2.6];
        assert_eq!(sq_euclidean(&hun, &hun), 0.0);
        assert!((sq_euclidean(&hun, &[3.4, 4.8, 2.9]) - 0.34).abs() < 1e-12);
        assert!((sq_euclidean(&hun, &[3.8, 4.9, 3.6]) - 1.74).abs() < 1e-12);
        let partial = FoiRow {
            country: "X".into(),
            year: 2020,
            indices: [Some(1.0), None, Some(1.0)],
            coverage: [1.0; 3],
        };
        let full = FoiRow::complete("Y", 2020, 1.0, 1.0, 1.0);
        assert!(foi_distance(&partial, &full).is_err());
        assert_eq!(foi_distance(&full, &full).unwrap(), 0.0);
    }

    #[test]
    fn matrix_from_table_excludes_incomplete() {
        let mut foi = FoiTable::from_rows([
            FoiRow::complete("AAA", 2020, 2.0, 2.0, 2.0),
            FoiRow::complete("BBB", 2020, 2.0, 2.0, 2.0),
        ]);
        let dm = distance_matrix(&foi, 2020).unwrap();
        assert_eq!(dm.len(), 2);
        assert!(dm.data.iter().all(|d| *d == 0.0));

        foi.insert(FoiRow {
            country: "CCC".into(),
            year: 2020,
            indices: [Some(1.0), None, Some(1.0)],
            coverage: [1.0, 0.0, 1.0],
        });
        let dm = distance_matrix(&foi, 2020).unwrap();
        assert_eq!(dm.labels(), ["AAA", "BBB"]);
        assert_eq!(dm.excluded(), ["CCC"]);
        assert_eq!(dm.warnings().len(), 1);

        foi.remove("BBB", 2020);
        assert!(matches!(distance_matrix(&foi, 2020), Err(Error::TooFewPoints(1))));
    }

    #[test]
    fn two_leaves_merge_once() {
        let tree = agglomerate(&line_matrix(&[0.0, 2.0])).unwrap();
        assert_eq!(tree.merges(), [Merge { left: 0, right: 1, height: 4.0, size: 2 }]);
        assert!(agglomerate(&line_matrix(&[1.0])).is_err());
    }

    #[test]
    fn three_points_on_a_line() {
        // Pairwise squared distances 1, 9, 4.
        let tree = agglomerate(&line_matrix(&[0.0, 1.0, 3.0])).unwrap();
        let m = tree.merges();
        assert_eq!((m[0].left, m[0].right, m[0].height), (0, 1, 1.0));
        assert_eq!((m[1].left, m[1].right, m[1].height, m[1].size), (2, 3, 6.5, 3));
    }

    #[test]
    fn equal_distances_break_on_smallest_ids() {
        // Square corners: four sides of length 1, all tied.
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let tree = agglomerate(&DistanceMatrix::from_points(labels(4), &pts)).unwrap();
        let m = tree.merges();
        assert_eq!((m[0].left, m[0].right), (0, 1));
        assert_eq!((m[1].left, m[1].right), (2, 3));
        assert_eq!((m[2].left, m[2].right), (4, 5));
    }

    #[test]
    fn cut_extremes_and_errors() {
        let tree = agglomerate(&line_matrix(&[0.0, 1.0, 3.0, 10.0])).unwrap();
        let all = cut(&tree, 4).unwrap();
        assert_eq!(all.clusters().iter().map(Vec::len).collect::<Vec<_>>(), vec![1; 4]);
        let one = cut(&tree, 1).unwrap();
        assert_eq!(one.members(1).len(), 4);
        let two = cut(&tree, 2).unwrap();
        assert_eq!(two.members(1), ["P0", "P1", "P2"]);
        assert_eq!(two.members(2), ["P3"]);
        assert!(matches!(cut(&tree, 0), Err(Error::CutOutOfRange { .. })));
        assert!(matches!(cut(&tree, 5), Err(Error::CutOutOfRange { .. })));
    }

    #[test]
    fn means_and_proximity() {
        let foi = FoiTable::from_rows([
            FoiRow::complete("AAA", 2020, 3.0, 4.0, 5.0),
            FoiRow::complete("BBB", 2020, 5.0, 4.0, 3.0),
            FoiRow::complete("ZZZ", 2020, 7.0, 7.0, 7.0),
        ]);
        let dm = distance_matrix(&foi, 2020).unwrap();
        let tree = agglomerate(&dm).unwrap();
        let two = cut(&tree, 2).unwrap();
        let means = cluster_means(&two, &foi, 2020).unwrap();
        assert_eq!(means[0].means, [4.0, 4.0, 4.0]);
        assert_eq!(means[1].means, [7.0, 7.0, 7.0]);
        assert_eq!(means[1].size, 1);

        assert!(proximity_report(&dm, "ZZZ", &two).unwrap().is_empty());
        let near = proximity_report(&dm, "AAA", &two).unwrap();
        assert_eq!(near, vec![Proximity { country: "BBB".into(), distance: 8.0 }]);
        assert!(matches!(proximity_report(&dm, "QQQ", &two), Err(Error::UnknownFocal(_))));
    }

    #[test]
    fn dendrogram_csv_names_nodes() {
        let tree = agglomerate(&line_matrix(&[0.0, 1.0, 3.0])).unwrap();
        let mut buf = Vec::new();
        tree.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "step,left,right,height,size\n1,P0,P1,1,2\n2,P2,#1,6.5,3\n"
        );
    }

    fn points_strategy() -> impl Strategy<Value = Vec<[f64; 3]>> {
        prop::collection::vec(prop::array::uniform3(1f64..7.0), 2..12)
    }

    proptest! {
        #[test]
        fn matrix_properties(pts in points_strategy()) {
            let dm = DistanceMatrix::from_points(labels(pts.len()), &pts);
            for i in 0..dm.len() {
                prop_assert_eq!(dm.get(i, i), 0.0);
                for j in 0..dm.len() {
                    prop_assert_eq!(dm.get(i, j), dm.get(j, i));
                    prop_assert!(dm.get(i, j) >= 0.0);
                }
            }
        }

        #[test]
        fn heights_monotone_and_cuts_nest(pts in points_strategy()) {
            let dm = DistanceMatrix::from_points(labels(pts.len()), &pts);
            let tree = agglomerate(&dm).unwrap();
            prop_assert_eq!(tree.merges().len(), pts.len() - 1);
            for w in tree.merges().windows(2) {
                prop_assert!(w[0].height <= w[1].height);
            }
            for k in 1..pts.len() {
                let coarse = cut(&tree, k).unwrap();
                let fine = cut(&tree, k + 1).unwrap();
                prop_assert_eq!(coarse.clusters().len(), k);
                let coarse_sets: Vec<Vec<&str>> = coarse.clusters();
                let fine_sets: Vec<Vec<&str>> = fine.clusters();
                let kept = coarse_sets.iter().filter(|c| fine_sets.contains(c)).count();
                prop_assert_eq!(kept, k - 1, "exactly one cluster splits");
                for f in &fine_sets {
                    prop_assert!(coarse_sets.iter().any(|c| f.iter().all(|m| c.contains(m))));
                }
            }
        }

        #[test]
        fn order_independent_with_distinct_distances(pts in points_strategy(), rot in 0usize..12) {
            let n = pts.len();
            let names = labels(n);
            let dm = DistanceMatrix::from_points(names.clone(), &pts);
            let rot = rot % n;
            let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
            let p_names: Vec<String> = perm.iter().map(|&i| names[i].clone()).collect();
            let p_pts: Vec<[f64; 3]> = perm.iter().map(|&i| pts[i]).collect();
            let dm2 = DistanceMatrix::from_points(p_names, &p_pts);
            let t1 = agglomerate(&dm).unwrap();
            let t2 = agglomerate(&dm2).unwrap();
            for k in 1..=n {
                let (c1, c2) = (cut(&t1, k).unwrap(), cut(&t2, k).unwrap());
                let mut a: Vec<Vec<&str>> = c1.clusters().into_iter().map(|mut c| { c.sort(); c }).collect();
                let mut b: Vec<Vec<&str>> = c2.clusters().into_iter().map(|mut c| { c.sort(); c }).collect();
                a.sort();
                b.sort();
                prop_assert_eq!(a, b);
            }
        }
    }
}
