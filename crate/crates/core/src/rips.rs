//! Open Vietoris-Rips 2-skeleton of a finite metric space.
//!
//! A simplex belongs to the complex at parameter `r` iff its diameter is
//! strictly less than `r`; the 2-skeleton suffices because pi1 and H1 only
//! see it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::DistanceMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub diam: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triangle {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub diam: f64,
}

/// All edges and triangles up to the build horizon, sorted ascending by
/// diameter with lexicographic tie-break on vertex indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Filtration2Skeleton {
    pub n: usize,
    pub edges: Vec<Edge>,
    pub triangles: Vec<Triangle>,
    pub rmax: f64,
}

/// The complex materialized at a fixed parameter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Complex2 {
    pub n: usize,
    pub r: f64,
    pub edges: Vec<(usize, usize)>,
    pub triangles: Vec<(usize, usize, usize)>,
}

/// Enumerate all pairs and triples of diameter < `rmax`.
pub fn build_filtration(dm: &DistanceMatrix, rmax: f64) -> Result<Filtration2Skeleton> {
    if !(rmax > 0.0) {
        return Err(Error::Argument(format!("rmax must be positive, got {rmax}")));
    }
    dm.validate()?;
    let n = dm.n();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dm.get(i, j);
            if d < rmax {
                edges.push(Edge { i, j, diam: d });
            }
        }
    }
    // neighbor lists above the current vertex keep the triple pass near the
    // edge count rather than n^3
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in &edges {
        nbrs[e.i].push(e.j);
    }
    let mut triangles = Vec::new();
    for i in 0..n {
        let ni = &nbrs[i];
        for (a, &j) in ni.iter().enumerate() {
            let dij = dm.get(i, j);
            for &k in ni.iter().skip(a + 1) {
                let djk = dm.get(j, k);
                if djk < rmax {
                    let diam = dij.max(djk).max(dm.get(i, k));
                    triangles.push(Triangle { i, j, k, diam });
                }
            }
        }
    }
    edges.sort_by(|a, b| a.diam.total_cmp(&b.diam).then(a.i.cmp(&b.i)).then(a.j.cmp(&b.j)));
    triangles.sort_by(|a, b| {
        a.diam
            .total_cmp(&b.diam)
            .then(a.i.cmp(&b.i))
            .then(a.j.cmp(&b.j))
            .then(a.k.cmp(&b.k))
    });
    Ok(Filtration2Skeleton { n, edges, triangles, rmax })
}

impl Filtration2Skeleton {
    /// Simplices of diameter strictly below `r`.
    pub fn complex_at(&self, r: f64) -> Result<Complex2> {
        if r > self.rmax {
            return Err(Error::Horizon { r, rmax: self.rmax });
        }
        let edges = self
            .edges
            .iter()
            .take_while(|e| e.diam < r)
            .map(|e| (e.i, e.j))
            .collect();
        let triangles = self
            .triangles
            .iter()
            .take_while(|t| t.diam < r)
            .map(|t| (t.i, t.j, t.k))
            .collect();
        Ok(Complex2 { n: self.n, r, edges, triangles })
    }

    /// Distinct simplex diameters, ascending.
    pub fn critical_radii(&self) -> Vec<f64> {
        let mut radii: Vec<f64> = self
            .edges
            .iter()
            .map(|e| e.diam)
            .chain(self.triangles.iter().map(|t| t.diam))
            .collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        radii
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("skeleton serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::DistanceMatrix;

    fn equilateral3() -> DistanceMatrix {
        DistanceMatrix::from_fn(3, |i, j| if i == j { 0.0 } else { 1.0 })
    }

    /// Four points evenly spaced on a circle of circumference 4.
    fn circle4() -> DistanceMatrix {
        DistanceMatrix::from_fn(4, |i, j| {
            let d = (i as f64 - j as f64).abs();
            d.min(4.0 - d)
        })
    }

    #[test]
    fn three_equidistant_points() {
        let f = build_filtration(&equilateral3(), 2.0).unwrap();
        assert_eq!(f.edges.len(), 3);
        assert_eq!(f.triangles.len(), 1);
        assert_eq!(f.triangles[0].diam, 1.0);
    }

    #[test]
    fn four_point_circle_enumeration() {
        // hand oracle: 6 pairs (4 at diameter 1, 2 at 2), 4 triples all at 2
        let f = build_filtration(&circle4(), 3.0).unwrap();
        let d1 = f.edges.iter().filter(|e| e.diam == 1.0).count();
        let d2 = f.edges.iter().filter(|e| e.diam == 2.0).count();
        assert_eq!((d1, d2), (4, 2));
        assert_eq!(f.triangles.len(), 4);
        assert!(f.triangles.iter().all(|t| t.diam == 2.0));
        assert_eq!(f.critical_radii(), vec![1.0, 2.0]);
    }

    #[test]
    fn horizon_below_min_distance_is_empty() {
        let f = build_filtration(&equilateral3(), 0.5).unwrap();
        assert!(f.edges.is_empty());
        assert!(f.triangles.is_empty());
        assert!(f.critical_radii().is_empty());
    }

    #[test]
    fn openness_convention_is_strict() {
        let d3 = DistanceMatrix::from_fn(3, |i, j| if i == j { 0.0 } else { 1.0 / 3.0 });
        let f = build_filtration(&d3, 1.0).unwrap();
        let at = f.complex_at(1.0 / 3.0).unwrap();
        assert!(at.edges.is_empty(), "diam == r must be excluded");
        let just_above = f.complex_at(1.0 / 3.0 + 1e-9).unwrap();
        assert_eq!(just_above.edges.len(), 3);
        assert_eq!(just_above.triangles.len(), 1);
        let zero = f.complex_at(0.0).unwrap();
        assert!(zero.edges.is_empty() && zero.triangles.is_empty());
        assert_eq!(zero.n, 3);
    }

    #[test]
    fn complex_at_beyond_horizon_errors() {
        let f = build_filtration(&equilateral3(), 2.0).unwrap();
        assert!(matches!(f.complex_at(2.5), Err(Error::Horizon { .. })));
    }

    #[test]
    fn complex_at_equals_fresh_rebuild() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(17);
        let pts: Vec<(f64, f64)> = (0..12).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
        let dm = DistanceMatrix::from_fn(12, |i, j| {
            let (dx, dy) = (pts[i].0 - pts[j].0, pts[i].1 - pts[j].1);
            dx.hypot(dy)
        });
        let f = build_filtration(&dm, 2.0).unwrap();
        for _ in 0..50 {
            let r = rng.gen::<f64>() * 2.0;
            let at = f.complex_at(r).unwrap();
            let fresh = build_filtration(&dm, r.max(f64::MIN_POSITIVE)).unwrap();
            assert_eq!(at.edges, fresh.edges.iter().map(|e| (e.i, e.j)).collect::<Vec<_>>());
            assert_eq!(
                at.triangles,
                fresh.triangles.iter().map(|t| (t.i, t.j, t.k)).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn faces_present_and_monotone() {
        let f = build_filtration(&circle4(), 3.0).unwrap();
        for r in [0.5, 1.0, 1.5, 2.0, 2.5, 3.0] {
            let cx = f.complex_at(r).unwrap();
            let edge_set: std::collections::HashSet<(usize, usize)> =
                cx.edges.iter().copied().collect();
            for &(i, j, k) in &cx.triangles {
                assert!(edge_set.contains(&(i, j)));
                assert!(edge_set.contains(&(j, k)));
                assert!(edge_set.contains(&(i, k)));
            }
        }
        // monotone in r
        let small = f.complex_at(1.5).unwrap();
        let big = f.complex_at(2.5).unwrap();
        for e in &small.edges {
            assert!(big.edges.contains(e));
        }
    }
}
