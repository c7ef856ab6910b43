//! Brute-force average linkage, kept separate from the production path.
//!
//! Every step recomputes the mean pairwise leaf distance between all pairs of
//! current clusters from the original points. No distance matrix and no
//! update formula is shared with [`crate::cluster`].

/// `(left node, right node, height, size)` per merge, same node-id convention
/// and tie rule as the production dendrogram.
pub type OracleMerge = (usize, usize, f64, usize);

pub fn upgma_brute_force(points: &[[f64; 3]]) -> Vec<OracleMerge> {
    let n = points.len();
    let dist = |a: usize, b: usize| -> f64 {
        points[a].iter().zip(&points[b]).map(|(x, y)| (x - y) * (x - y)).sum()
    };

    // (node id, leaves)
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut merges = Vec::new();
    let mut next_id = n;
    while clusters.len() > 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for x in 0..clusters.len() {
            for y in (x + 1)..clusters.len() {
                let (ia, la) = &clusters[x];
                let (ib, lb) = &clusters[y];
                let mut total = 0.0;
                for &p in la {
                    for &q in lb {
                        total += dist(p, q);
                    }
                }
                let avg = total / (la.len() * lb.len()) as f64;
                let (lo, hi) = ((*ia).min(*ib), (*ia).max(*ib));
                let take = match best {
                    None => true,
                    Some((d, blo, bhi, _, _)) => avg < d || (avg == d && (lo, hi) < (blo, bhi)),
                };
                if take {
                    best = Some((avg, lo, hi, x, y));
                }
            }
        }
        let (height, lo, hi, x, y) = best.expect("two clusters remain");
        let (_, lb) = clusters.remove(y);
        let (_, la) = clusters.remove(x);
        let mut leaves = la;
        leaves.extend(lb);
        merges.push((lo, hi, height, leaves.len()));
        clusters.push((next_id, leaves));
        next_id += 1;
    }
    merges
}
