//! Bottleneck distance between decorated diagrams: the least M admitting a
//! perfect M-matching with diagonal matches allowed, found by scanning
//! candidate values with bipartite feasibility checks.

use serde::{Deserialize, Serialize};

use super::DecoratedDiagram;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchingPair {
    /// `(index in A, index in B)`.
    Points(usize, usize),
    /// Interval of A matched to the diagonal.
    DiagonalA(usize),
    /// Interval of B matched to the diagonal.
    DiagonalB(usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Matching {
    pub distance: f64,
    pub pairs: Vec<MatchingPair>,
}

struct Block {
    /// `(birth, death, original index)`.
    a: Vec<(f64, f64, usize)>,
    b: Vec<(f64, f64, usize)>,
    /// Diagonal matches allowed (finite block only).
    diagonal: bool,
}

impl Block {
    fn cost(&self, i: usize, j: usize) -> f64 {
        let (ab, ad, _) = self.a[i];
        let (bb, bd, _) = self.b[j];
        (ab - bb).abs().max((ad - bd).abs())
    }

    fn half_a(&self, i: usize) -> f64 {
        (self.a[i].1 - self.a[i].0) / 2.0
    }

    fn half_b(&self, j: usize) -> f64 {
        (self.b[j].1 - self.b[j].0) / 2.0
    }

    /// Perfect matching in the diagonal-augmented bipartite graph at
    /// tolerance `m`; returns the A-side assignment on success.
    fn feasible(&self, m: f64) -> Option<Vec<usize>> {
        let (na, nb) = (self.a.len(), self.b.len());
        let (left, right) = if self.diagonal { (na + nb, nb + na) } else { (na, nb) };
        if !self.diagonal && na != nb {
            return None;
        }
        // adjacency of left node l: real A points first, then diagonal
        // stand-ins for B points
        let neighbors = |l: usize| -> Vec<usize> {
            let mut out = Vec::new();
            if l < na {
                for j in 0..nb {
                    if self.cost(l, j) <= m {
                        out.push(j);
                    }
                }
                if self.diagonal && self.half_a(l) <= m {
                    out.push(nb + l);
                }
            } else {
                let j = l - na;
                if self.half_b(j) <= m {
                    out.push(j);
                }
                for i in 0..na {
                    out.push(nb + i);
                }
            }
            out
        };
        let mut match_right: Vec<Option<usize>> = vec![None; right];
        fn augment(
            l: usize,
            neighbors: &dyn Fn(usize) -> Vec<usize>,
            match_right: &mut Vec<Option<usize>>,
            seen: &mut Vec<bool>,
        ) -> bool {
            for r in neighbors(l) {
                if seen[r] {
                    continue;
                }
                seen[r] = true;
                if match_right[r].is_none()
                    || augment(match_right[r].unwrap(), neighbors, match_right, seen)
                {
                    match_right[r] = Some(l);
                    return true;
                }
            }
            false
        }
        let mut size = 0;
        for l in 0..left {
            let mut seen = vec![false; right];
            if augment(l, &neighbors, &mut match_right, &mut seen) {
                size += 1;
            }
        }
        if size != left {
            return None;
        }
        let mut assign = vec![usize::MAX; na];
        for (r, l) in match_right.iter().enumerate() {
            if let Some(l) = *l {
                if l < na {
                    assign[l] = r; // r < nb: real point; r >= nb: diagonal
                }
            }
        }
        Some(assign)
    }
}

/// Bottleneck distance and an optimal matching. Censored intervals may only
/// match censored intervals; a count mismatch is an error.
pub fn bottleneck(a: &DecoratedDiagram, b: &DecoratedDiagram) -> Result<(f64, Matching)> {
    let split = |d: &DecoratedDiagram| -> (Vec<(f64, f64, usize)>, Vec<(f64, f64, usize)>) {
        let mut fin = Vec::new();
        let mut cens = Vec::new();
        for (i, iv) in d.intervals.iter().enumerate() {
            if iv.censored {
                cens.push((iv.birth, iv.death, i));
            } else {
                fin.push((iv.birth, iv.death, i));
            }
        }
        (fin, cens)
    };
    let (fa, ca) = split(a);
    let (fb, cb) = split(b);
    if ca.len() != cb.len() {
        return Err(Error::CensoredMismatch);
    }
    let blocks = [
        Block { a: fa, b: fb, diagonal: true },
        Block { a: ca, b: cb, diagonal: false },
    ];
    // candidate tolerances: every pair cost and every half-lifespan
    let mut candidates = vec![0.0f64];
    for bl in &blocks {
        for i in 0..bl.a.len() {
            for j in 0..bl.b.len() {
                candidates.push(bl.cost(i, j));
            }
            if bl.diagonal {
                candidates.push(bl.half_a(i));
            }
        }
        if bl.diagonal {
            for j in 0..bl.b.len() {
                candidates.push(bl.half_b(j));
            }
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let all_feasible = |m: f64| -> Option<Vec<Vec<usize>>> {
        blocks.iter().map(|bl| bl.feasible(m)).collect()
    };
    // binary search over the sorted candidate values
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    if all_feasible(candidates[hi]).is_none() {
        return Err(Error::Invalid("no perfect matching exists at any tolerance".into()));
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        if all_feasible(candidates[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let distance = candidates[lo];
    let assigns = all_feasible(distance).expect("feasible at the optimum");
    let mut pairs = Vec::new();
    for (bl, assign) in blocks.iter().zip(&assigns) {
        let nb = bl.b.len();
        let mut b_used = vec![false; nb];
        for (i, &r) in assign.iter().enumerate() {
            if r < nb {
                pairs.push(MatchingPair::Points(bl.a[i].2, bl.b[r].2));
                b_used[r] = true;
            } else {
                pairs.push(MatchingPair::DiagonalA(bl.a[i].2));
            }
        }
        for (j, used) in b_used.iter().enumerate() {
            if !used {
                pairs.push(MatchingPair::DiagonalB(bl.b[j].2));
            }
        }
    }
    Ok((distance, Matching { distance, pairs }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::PersistenceInterval;

    fn iv(birth: f64, death: f64, censored: bool) -> PersistenceInterval {
        PersistenceInterval {
            birth,
            death,
            left_open: true,
            right_closed: !censored,
            censored,
            representative: vec![],
            representative_loop: vec![],
        }
    }

    fn diag(ivs: Vec<PersistenceInterval>) -> DecoratedDiagram {
        DecoratedDiagram { rmax: 10.0, intervals: ivs }
    }

    #[test]
    fn identical_diagrams_have_distance_zero() {
        let d = diag(vec![iv(0.0, 1.0 / 3.0, false), iv(0.1, 0.2, false)]);
        let (m, _) = bottleneck(&d, &d).unwrap();
        assert_eq!(m, 0.0);
    }

    #[test]
    fn single_bar_to_empty_matches_diagonal() {
        let d = diag(vec![iv(0.0, 1.0 / 3.0, false)]);
        let e = diag(vec![]);
        let (m, matching) = bottleneck(&d, &e).unwrap();
        assert!((m - 1.0 / 6.0).abs() < 1e-15, "half the lifespan, got {m}");
        assert_eq!(matching.pairs, vec![MatchingPair::DiagonalA(0)]);
    }

    #[test]
    fn offset_bars_match_directly() {
        let d = diag(vec![iv(0.0, 1.0 / 3.0, false)]);
        let e = diag(vec![iv(0.01, 0.35, false)]);
        let (m, matching) = bottleneck(&d, &e).unwrap();
        let expect = (0.35f64 - 1.0 / 3.0).max(0.01);
        assert!((m - expect).abs() < 1e-15, "got {m}, want {expect}");
        assert_eq!(matching.pairs, vec![MatchingPair::Points(0, 0)]);
    }

    #[test]
    fn censored_mismatch_is_an_error() {
        let d = diag(vec![iv(0.0, 10.0, true)]);
        let e = diag(vec![iv(0.0, 0.3, false)]);
        assert!(matches!(bottleneck(&d, &e), Err(Error::CensoredMismatch)));
        // censored-censored is fine
        let f = diag(vec![iv(0.05, 10.0, true)]);
        let (m, _) = bottleneck(&d, &f).unwrap();
        assert!((m - 0.05).abs() < 1e-15);
    }

    #[test]
    fn metric_axioms_on_random_diagrams() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(13);
        let random_diagram = |rng: &mut StdRng| -> DecoratedDiagram {
            let n = rng.gen_range(0..5);
            diag(
                (0..n)
                    .map(|_| {
                        let b = rng.gen::<f64>();
                        iv(b, b + rng.gen::<f64>(), false)
                    })
                    .collect(),
            )
        };
        for _ in 0..40 {
            let (x, y, z) =
                (random_diagram(&mut rng), random_diagram(&mut rng), random_diagram(&mut rng));
            let dxy = bottleneck(&x, &y).unwrap().0;
            let dyx = bottleneck(&y, &x).unwrap().0;
            assert!((dxy - dyx).abs() < 1e-15, "symmetry");
            let dxz = bottleneck(&x, &z).unwrap().0;
            let dyz = bottleneck(&y, &z).unwrap().0;
            assert!(dxz <= dxy + dyz + 1e-12, "triangle inequality");
            assert_eq!(bottleneck(&x, &x).unwrap().0, 0.0);
        }
    }

    #[test]
    fn exhaustive_two_bar_cross_check() {
        // the optimal assignment beats the crossed one
        let d = diag(vec![iv(0.0, 1.0, false), iv(0.0, 0.5, false)]);
        let e = diag(vec![iv(0.0, 0.55, false), iv(0.0, 0.95, false)]);
        let (m, _) = bottleneck(&d, &e).unwrap();
        assert!((m - 0.05).abs() < 1e-15, "got {m}");
    }
}
