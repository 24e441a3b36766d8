//! Static kd-tree over points of any fixed dimension (Euclidean metric).

const LEAF: usize = 8;

#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    coords: Vec<f64>,
    order: Vec<usize>,
    split: Vec<u8>,
}

impl KdTree {
    /// Builds a tree over `points`; the index of a point is its position in the input.
    pub fn build<P: AsRef<[f64]>>(dim: usize, points: &[P]) -> Self {
        let mut coords = Vec::with_capacity(dim * points.len());
        for p in points {
            let p = p.as_ref();
            assert_eq!(p.len(), dim, "point dimension mismatch");
            coords.extend_from_slice(p);
        }
        let n = points.len();
        let mut tree = KdTree { dim, coords, order: (0..n).collect(), split: vec![0; n] };
        tree.build_range(0, n);
        tree
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn build_range(&mut self, lo: usize, hi: usize) {
        if hi - lo <= LEAF {
            return;
        }
        let dim = self.dim;
        let mut best = (0, -1.0);
        for d in 0..dim {
            let (mut mn, mut mx) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in &self.order[lo..hi] {
                let v = self.coords[i * dim + d];
                mn = mn.min(v);
                mx = mx.max(v);
            }
            if mx - mn > best.1 {
                best = (d, mx - mn);
            }
        }
        let d = best.0;
        let mid = (lo + hi) / 2;
        let coords = &self.coords;
        self.order[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
            coords[a * dim + d].total_cmp(&coords[b * dim + d]).then(a.cmp(&b))
        });
        self.split[mid] = d as u8;
        self.build_range(lo, mid);
        self.build_range(mid + 1, hi);
    }

    /// Nearest stored point: `(index, distance)`. Ties resolve to the lower index.
    pub fn nearest(&self, q: &[f64]) -> Option<(usize, f64)> {
        if self.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_rec(0, self.len(), q, &mut best);
        Some((best.0, best.1.sqrt()))
    }

    fn consider(best: &mut (usize, f64), i: usize, d2: f64) {
        if d2 < best.1 || (d2 == best.1 && i < best.0) {
            *best = (i, d2);
        }
    }

    fn nearest_rec(&self, lo: usize, hi: usize, q: &[f64], best: &mut (usize, f64)) {
        if hi - lo <= LEAF {
            for &i in &self.order[lo..hi] {
                Self::consider(best, i, crate::vecops::dist_sq(self.point(i), q));
            }
            return;
        }
        let mid = (lo + hi) / 2;
        let i = self.order[mid];
        Self::consider(best, i, crate::vecops::dist_sq(self.point(i), q));
        let d = self.split[mid] as usize;
        let diff = q[d] - self.coords[i * self.dim + d];
        let (first, second) = if diff < 0.0 { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.nearest_rec(first.0, first.1, q, best);
        if diff * diff <= best.1 {
            self.nearest_rec(second.0, second.1, q, best);
        }
    }

    /// The `k` nearest points, sorted by `(distance, index)`.
    pub fn k_nearest(&self, q: &[f64], k: usize) -> Vec<(usize, f64)> {
        let mut heap: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        if k > 0 && !self.is_empty() {
            self.knn_rec(0, self.len(), q, k, &mut heap);
        }
        heap.into_iter().map(|(d2, i)| (i, d2.sqrt())).collect()
    }

    fn knn_push(heap: &mut Vec<(f64, usize)>, k: usize, i: usize, d2: f64) {
        if heap.len() == k {
            let last = heap[k - 1];
            if (d2, i) >= last {
                return;
            }
            heap.pop();
        }
        let pos = heap.partition_point(|e| *e < (d2, i));
        heap.insert(pos, (d2, i));
    }

    fn knn_rec(&self, lo: usize, hi: usize, q: &[f64], k: usize, heap: &mut Vec<(f64, usize)>) {
        if hi - lo <= LEAF {
            for &i in &self.order[lo..hi] {
                Self::knn_push(heap, k, i, crate::vecops::dist_sq(self.point(i), q));
            }
            return;
        }
        let mid = (lo + hi) / 2;
        let i = self.order[mid];
        Self::knn_push(heap, k, i, crate::vecops::dist_sq(self.point(i), q));
        let d = self.split[mid] as usize;
        let diff = q[d] - self.coords[i * self.dim + d];
        let (first, second) = if diff < 0.0 { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.knn_rec(first.0, first.1, q, k, heap);
        if heap.len() < k || diff * diff <= heap[heap.len() - 1].0 {
            self.knn_rec(second.0, second.1, q, k, heap);
        }
    }

    /// Indices of all points within distance `r` of `q`, sorted ascending.
    pub fn within(&self, q: &[f64], r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if !self.is_empty() {
            self.within_rec(0, self.len(), q, r * r, &mut out);
        }
        out.sort_unstable();
        out
    }

    fn within_rec(&self, lo: usize, hi: usize, q: &[f64], r2: f64, out: &mut Vec<usize>) {
        if hi - lo <= LEAF {
            for &i in &self.order[lo..hi] {
                if crate::vecops::dist_sq(self.point(i), q) <= r2 {
                    out.push(i);
                }
            }
            return;
        }
        let mid = (lo + hi) / 2;
        let i = self.order[mid];
        if crate::vecops::dist_sq(self.point(i), q) <= r2 {
            out.push(i);
        }
        let d = self.split[mid] as usize;
        let diff = q[d] - self.coords[i * self.dim + d];
        if diff <= 0.0 || diff * diff <= r2 {
            self.within_rec(lo, mid, q, r2, out);
        }
        if diff >= 0.0 || diff * diff <= r2 {
            self.within_rec(mid + 1, hi, q, r2, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use rand::Rng;

    fn brute_nearest(pts: &[Vec<f64>], q: &[f64]) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for (i, p) in pts.iter().enumerate() {
            let d = crate::vecops::dist_sq(p, q);
            if d < best.1 {
                best = (i, d);
            }
        }
        (best.0, best.1.sqrt())
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = substream(3, &[9]);
        for dim in 1..=4 {
            let pts: Vec<Vec<f64>> = (0..500).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
            let tree = KdTree::build(dim, &pts);
            for _ in 0..200 {
                let q: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 1.2 - 0.1).collect();
                let (i, d) = tree.nearest(&q).unwrap();
                let (bi, bd) = brute_nearest(&pts, &q);
                assert_eq!(i, bi);
                assert!((d - bd).abs() < 1e-15);
                let knn = tree.k_nearest(&q, 5);
                let mut all: Vec<(f64, usize)> =
                    pts.iter().enumerate().map(|(j, p)| (crate::vecops::dist_sq(p, &q), j)).collect();
                all.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let want: Vec<usize> = all[..5].iter().map(|e| e.1).collect();
                let got: Vec<usize> = knn.iter().map(|e| e.0).collect();
                assert_eq!(got, want);
                let w = tree.within(&q, 0.2);
                let want_w: Vec<usize> = (0..pts.len()).filter(|&j| all.iter().any(|e| e.1 == j && e.0 <= 0.04)).collect();
                assert_eq!(w, want_w);
            }
        }
    }

    #[test]
    fn empty_tree() {
        let tree = KdTree::build::<Vec<f64>>(2, &[]);
        assert!(tree.nearest(&[0.0, 0.0]).is_none());
        assert!(tree.k_nearest(&[0.0, 0.0], 3).is_empty());
    }
}
