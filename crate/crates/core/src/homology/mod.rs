//! H1 persistence of the open Rips filtration over a prime field: decorated
//! intervals with representative cycles, inclusion-induced maps between
//! parameters, kernels, surjectivity checks, bottleneck distance and a dense
//! rank oracle.

mod bottleneck;
mod reduction;

pub use bottleneck::{bottleneck, Matching, MatchingPair};
pub use reduction::{induced_map_h1, kernel_subspace, persist_h1, H1Engine, InducedMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rips::Complex2;

/// The prime field F_p of coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldP {
    p: u32,
}

impl Default for FieldP {
    fn default() -> Self {
        FieldP { p: 2 }
    }
}

impl FieldP {
    pub fn new(p: u32) -> Result<FieldP> {
        if p < 2 || !is_prime(p) {
            return Err(Error::Argument(format!("{p} is not prime")));
        }
        Ok(FieldP { p })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn inv(&self, a: u32) -> u32 {
        assert!(a % self.p != 0, "zero has no inverse");
        self.pow(a, self.p - 2)
    }

    pub fn pow(&self, mut base: u32, mut e: u32) -> u32 {
        let mut acc = 1u32;
        base %= self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Canonical representative of a signed integer.
    pub fn from_i64(&self, x: i64) -> u32 {
        x.rem_euclid(self.p as i64) as u32
    }
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// One H1 interval of the open filtration, alive exactly on `(birth, death]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PersistenceInterval {
    pub birth: f64,
    /// Triangle diameter that kills the class; `rmax` when censored.
    pub death: f64,
    pub left_open: bool,
    pub right_closed: bool,
    pub censored: bool,
    /// Representative cycle at birth as an edge chain `(i, j, coef)`.
    pub representative: Vec<(usize, usize, u32)>,
    /// The same cycle as a closed vertex walk; kept out of the JSON schema.
    #[serde(skip)]
    pub representative_loop: Vec<usize>,
}

impl PersistenceInterval {
    pub fn lifespan(&self) -> f64 {
        self.death - self.birth
    }

    /// Membership in the open-left closed-right interval.
    pub fn contains(&self, r: f64) -> bool {
        self.birth < r && r <= self.death
    }
}

/// H1 persistence diagram with decorations, censored at `rmax`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecoratedDiagram {
    pub intervals: Vec<PersistenceInterval>,
    pub rmax: f64,
}

impl DecoratedDiagram {
    /// Number of intervals alive at `r`.
    pub fn count_alive(&self, r: f64) -> usize {
        self.intervals.iter().filter(|i| i.contains(r)).count()
    }

    /// The spec'd interchange format: a bare array of decorated intervals.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.intervals).expect("diagram serializes")
    }

    pub fn from_json(json: &str) -> Result<DecoratedDiagram> {
        let intervals: Vec<PersistenceInterval> = serde_json::from_str(json)?;
        let rmax = intervals.iter().map(|i| i.death).fold(0.0f64, f64::max);
        Ok(DecoratedDiagram { intervals, rmax })
    }

    pub fn deaths_sorted(&self) -> Vec<f64> {
        let mut d: Vec<f64> = self.intervals.iter().map(|i| i.death).collect();
        d.sort_by(f64::total_cmp);
        d
    }
}

/// H1 rank of a fixed complex via dense boundary ranks over F_p:
/// `dim ker d1 - rank d2`. Independent oracle for the reduction path.
pub fn brute_force_h1_rank(cx: &Complex2, field: FieldP) -> Result<usize> {
    let size = cx.n + cx.edges.len() + cx.triangles.len();
    if size > 2500 {
        return Err(Error::Argument(format!(
            "complex with {size} simplices exceeds the dense oracle limit of 2500"
        )));
    }
    let ne = cx.edges.len();
    // d1: vertices x edges
    let mut d1 = vec![vec![0u32; ne]; cx.n];
    for (c, &(i, j)) in cx.edges.iter().enumerate() {
        d1[i][c] = field.neg(1);
        d1[j][c] = 1;
    }
    let rank1 = dense_rank(&mut d1, field);
    // d2: edges x triangles
    let index: std::collections::HashMap<(usize, usize), usize> =
        cx.edges.iter().copied().enumerate().map(|(c, e)| (e, c)).collect();
    let mut d2 = vec![vec![0u32; cx.triangles.len()]; ne];
    for (c, &(i, j, k)) in cx.triangles.iter().enumerate() {
        d2[index[&(j, k)]][c] = 1;
        d2[index[&(i, k)]][c] = field.neg(1);
        d2[index[&(i, j)]][c] = 1;
    }
    let rank2 = dense_rank(&mut d2, field);
    Ok(ne - rank1 - rank2)
}

/// In-place Gaussian elimination rank over F_p.
pub(crate) fn dense_rank(m: &mut [Vec<u32>], field: FieldP) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, pivot);
        let inv = field.inv(m[rank][c]);
        for j in 0..cols {
            m[rank][j] = field.mul(m[rank][j], inv);
        }
        for r in 0..rows {
            if r != rank && m[r][c] != 0 {
                let f = m[r][c];
                for j in 0..cols {
                    let sub = field.mul(f, m[rank][j]);
                    m[r][j] = field.sub(m[r][j], sub);
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_arithmetic() {
        let f3 = FieldP::new(3).unwrap();
        assert_eq!(f3.add(2, 2), 1);
        assert_eq!(f3.neg(1), 2);
        assert_eq!(f3.mul(2, 2), 1);
        assert_eq!(f3.inv(2), 2);
        assert_eq!(f3.from_i64(-1), 2);
        assert!(FieldP::new(4).is_err());
        assert!(FieldP::new(1).is_err());
        assert!(FieldP::new(101).is_ok());
    }

    #[test]
    fn brute_rank_examples() {
        let f2 = FieldP::default();
        // 4-cycle, no triangles
        let cx = Complex2 {
            n: 4,
            r: 1.0,
            edges: vec![(0, 1), (0, 3), (1, 2), (2, 3)],
            triangles: vec![],
        };
        assert_eq!(brute_force_h1_rank(&cx, f2).unwrap(), 1);
        // full triangle
        let cx = Complex2 { n: 3, r: 1.0, edges: vec![(0, 1), (0, 2), (1, 2)], triangles: vec![(0, 1, 2)] };
        assert_eq!(brute_force_h1_rank(&cx, f2).unwrap(), 0);
        // two disjoint 4-cycles
        let cx = Complex2 {
            n: 8,
            r: 1.0,
            edges: vec![(0, 1), (0, 3), (1, 2), (2, 3), (4, 5), (4, 7), (5, 6), (6, 7)],
            triangles: vec![],
        };
        assert_eq!(brute_force_h1_rank(&cx, f2).unwrap(), 2);
    }

    #[test]
    fn diagram_json_round_trip() {
        let d = DecoratedDiagram {
            intervals: vec![PersistenceInterval {
                birth: 0.1,
                death: 0.5,
                left_open: true,
                right_closed: true,
                censored: false,
                representative: vec![(0, 1, 1), (1, 2, 1), (0, 2, 1)],
                representative_loop: vec![0, 1, 2],
            }],
            rmax: 0.5,
        };
        let json = d.to_json();
        assert!(json.contains("\"birth\""));
        let back = DecoratedDiagram::from_json(&json).unwrap();
        assert_eq!(back.intervals.len(), 1);
        assert_eq!(back.intervals[0].death, 0.5);
        assert_eq!(back.rmax, 0.5);
        // emit(parse(emit(x))) is stable
        assert_eq!(back.to_json(), json);
    }
}
