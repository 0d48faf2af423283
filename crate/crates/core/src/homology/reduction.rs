//! Column reduction of the 2-skeleton boundary matrix over F_p, decorated
//! interval extraction, and inclusion-induced maps between parameters.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{DecoratedDiagram, FieldP, PersistenceInterval};
use crate::error::{Error, Result};
use crate::rips::Filtration2Skeleton;

/// Sparse F_p vector over edge indices, sorted ascending, no zero entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct SparseVec {
    pub entries: Vec<(u32, u32)>,
}

impl SparseVec {
    fn top(&self) -> Option<(u32, u32)> {
        self.entries.last().copied()
    }

    /// `self + factor * other`.
    fn add_scaled(&self, other: &SparseVec, factor: u32, f: FieldP) -> SparseVec {
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (0, 0);
        while a < self.entries.len() || b < other.entries.len() {
            let ea = self.entries.get(a);
            let eb = other.entries.get(b);
            match (ea, eb) {
                (Some(&(ia, ca)), Some(&(ib, cb))) => {
                    if ia < ib {
                        out.push((ia, ca));
                        a += 1;
                    } else if ib < ia {
                        let c = f.mul(factor, cb);
                        if c != 0 {
                            out.push((ib, c));
                        }
                        b += 1;
                    } else {
                        let c = f.add(ca, f.mul(factor, cb));
                        if c != 0 {
                            out.push((ia, c));
                        }
                        a += 1;
                        b += 1;
                    }
                }
                (Some(&(ia, ca)), None) => {
                    out.push((ia, ca));
                    a += 1;
                }
                (None, Some(&(ib, cb))) => {
                    let c = f.mul(factor, cb);
                    if c != 0 {
                        out.push((ib, c));
                    }
                    b += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        SparseVec { entries: out }
    }

    fn from_unsorted(mut entries: Vec<(u32, u32)>, f: FieldP) -> SparseVec {
        entries.sort_by_key(|e| e.0);
        let mut out: Vec<(u32, u32)> = Vec::with_capacity(entries.len());
        for (i, c) in entries {
            if let Some(last) = out.last_mut() {
                if last.0 == i {
                    last.1 = f.add(last.1, c);
                    continue;
                }
            }
            out.push((i, c));
        }
        out.retain(|e| e.1 != 0);
        SparseVec { entries: out }
    }
}

/// A reduced negative-triangle column; its top entry is the pivot edge.
#[derive(Debug, Clone)]
struct BoundaryCol {
    diam: f64,
    col: SparseVec,
}

/// Reduction state of one filtration over one field; answers diagram,
/// induced-map, kernel and cycle-membership queries.
pub struct H1Engine {
    field: FieldP,
    rmax: f64,
    edge_diam: Vec<f64>,
    edge_verts: Vec<(usize, usize)>,
    boundary_cols: Vec<BoundaryCol>,
    /// edge index -> owning reduced column, if any
    pivot_owner: Vec<Option<u32>>,
    intervals: Vec<PersistenceInterval>,
    chains: Vec<SparseVec>,
}

/// The matrix of `H1(Rips(S, p)) -> H1(Rips(S, q))` in the recorded interval
/// bases at `p` and `q`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InducedMap {
    pub p: f64,
    pub q: f64,
    /// `matrix[row][col]`, rows indexed by the target basis.
    pub matrix: Vec<Vec<u32>>,
    /// `(birth, death)` of each source basis interval.
    pub source_basis: Vec<(f64, f64)>,
    /// `(birth, death)` of each target basis interval.
    pub target_basis: Vec<(f64, f64)>,
    pub field: FieldP,
}

impl InducedMap {
    pub fn rank(&self) -> usize {
        if self.matrix.is_empty() || self.source_basis.is_empty() {
            return 0;
        }
        let mut m = self.matrix.clone();
        super::dense_rank(&mut m, self.field)
    }

    /// Surjectivity over F_p: rank equals the target dimension.
    pub fn is_surjective(&self) -> (bool, usize) {
        let rank = self.rank();
        (rank == self.target_basis.len(), rank)
    }

    pub fn is_isomorphism(&self) -> bool {
        let rank = self.rank();
        rank == self.target_basis.len() && rank == self.source_basis.len()
    }

    /// Basis of the kernel, in source-basis coordinates.
    pub fn kernel_basis(&self) -> Vec<Vec<u32>> {
        nullspace(&self.matrix, self.source_basis.len(), self.field)
    }

    /// Compose with a map `other` from an earlier parameter: `self o other`.
    pub fn compose(&self, other: &InducedMap) -> Vec<Vec<u32>> {
        let f = self.field;
        let rows = self.matrix.len();
        let mid = self.source_basis.len();
        let cols = other.source_basis.len();
        assert_eq!(mid, other.target_basis.len(), "incompatible bases");
        let mut out = vec![vec![0u32; cols]; rows];
        for r in 0..rows {
            for c in 0..cols {
                let mut acc = 0u32;
                for k in 0..mid {
                    acc = f.add(acc, f.mul(self.matrix[r][k], other.matrix[k][c]));
                }
                out[r][c] = acc;
            }
        }
        out
    }
}

/// Nullspace basis of `m` (rows x cols) over F_p.
fn nullspace(m: &[Vec<u32>], cols: usize, f: FieldP) -> Vec<Vec<u32>> {
    let mut mat: Vec<Vec<u32>> = m.to_vec();
    let rows = mat.len();
    let mut pivot_col_of_row: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    for c in 0..cols {
        let Some(pr) = (rank..rows).find(|&r| mat[r][c] != 0) else { continue };
        mat.swap(rank, pr);
        let inv = f.inv(mat[rank][c]);
        for j in 0..cols {
            mat[rank][j] = f.mul(mat[rank][j], inv);
        }
        for r in 0..rows {
            if r != rank && mat[r][c] != 0 {
                let factor = mat[r][c];
                for j in 0..cols {
                    let sub = f.mul(factor, mat[rank][j]);
                    mat[r][j] = f.sub(mat[r][j], sub);
                }
            }
        }
        pivot_col_of_row.push(c);
        rank += 1;
        if rank == rows {
            break;
        }
    }
    let pivot_cols: std::collections::HashSet<usize> = pivot_col_of_row.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![0u32; cols];
        v[free] = 1;
        for (row, &pc) in pivot_col_of_row.iter().enumerate() {
            v[pc] = f.neg(mat[row][free]);
        }
        basis.push(v);
    }
    basis
}

impl H1Engine {
    pub fn new(skel: &Filtration2Skeleton, field: FieldP) -> H1Engine {
        let ne = skel.edges.len();
        let edge_diam: Vec<f64> = skel.edges.iter().map(|e| e.diam).collect();
        let edge_verts: Vec<(usize, usize)> = skel.edges.iter().map(|e| (e.i, e.j)).collect();
        let edge_index: HashMap<(usize, usize), u32> =
            edge_verts.iter().enumerate().map(|(c, &e)| (e, c as u32)).collect();

        // union-find over vertices; forest adjacency for representatives
        let mut parent: Vec<usize> = (0..skel.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut forest: Vec<Vec<(usize, usize)>> = vec![Vec::new(); skel.n];
        // positive (creator) edges in filtration order
        let mut positive: Vec<u32> = Vec::new();
        for (idx, e) in skel.edges.iter().enumerate() {
            let (ri, rj) = (find(&mut parent, e.i), find(&mut parent, e.j));
            if ri == rj {
                positive.push(idx as u32);
            } else {
                parent[ri] = rj;
                forest[e.i].push((e.j, idx));
                forest[e.j].push((e.i, idx));
            }
        }

        // reduce triangle columns
        let mut pivot_owner: Vec<Option<u32>> = vec![None; ne];
        let mut boundary_cols: Vec<BoundaryCol> = Vec::new();
        let mut death_of_edge: Vec<Option<f64>> = vec![None; ne];
        for t in &skel.triangles {
            let mut col = SparseVec::from_unsorted(
                vec![
                    (edge_index[&(t.j, t.k)], 1),
                    (edge_index[&(t.i, t.k)], field.neg(1)),
                    (edge_index[&(t.i, t.j)], 1),
                ],
                field,
            );
            while let Some((piv, coef)) = col.top() {
                let Some(owner) = pivot_owner[piv as usize] else { break };
                let oc = &boundary_cols[owner as usize];
                let factor = field.neg(field.mul(coef, field.inv(oc.col.top().unwrap().1)));
                col = col.add_scaled(&oc.col, factor, field);
            }
            if let Some((piv, _)) = col.top() {
                pivot_owner[piv as usize] = Some(boundary_cols.len() as u32);
                death_of_edge[piv as usize] = Some(t.diam);
                boundary_cols.push(BoundaryCol { diam: t.diam, col });
            }
        }

        // decorated intervals for positive edges
        let mut intervals = Vec::new();
        let mut chains = Vec::new();
        for &eidx in &positive {
            let birth = edge_diam[eidx as usize];
            let (death, censored) = match death_of_edge[eidx as usize] {
                Some(d) => (d, false),
                None => (skel.rmax, true),
            };
            if !censored && death == birth {
                // zero-persistence pair: the interval (b, b] is empty
                continue;
            }
            let (i, j) = edge_verts[eidx as usize];
            let path = forest_path(&forest, j, i);
            // closed walk i -> j -> ... -> i
            let mut walk = vec![i];
            walk.extend(path);
            walk.pop(); // drop the final i; the loop closes implicitly
            let chain = walk_chain(&walk, &edge_index, field);
            let representative: Vec<(usize, usize, u32)> = chain
                .entries
                .iter()
                .map(|&(e, c)| {
                    let (a, b) = edge_verts[e as usize];
                    (a, b, c)
                })
                .collect();
            intervals.push(PersistenceInterval {
                birth,
                death,
                left_open: true,
                right_closed: !censored,
                censored,
                representative,
                representative_loop: walk,
            });
            chains.push(chain);
        }

        H1Engine {
            field,
            rmax: skel.rmax,
            edge_diam,
            edge_verts,
            boundary_cols,
            pivot_owner,
            intervals,
            chains,
        }
    }

    pub fn field(&self) -> FieldP {
        self.field
    }

    pub fn diagram(&self) -> DecoratedDiagram {
        DecoratedDiagram { intervals: self.intervals.clone(), rmax: self.rmax }
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if r <= 0.0 || r > self.rmax {
            return Err(Error::Horizon { r, rmax: self.rmax });
        }
        Ok(())
    }

    /// Interval ids alive at `r` (birth < r <= death).
    pub fn alive_at(&self, r: f64) -> Vec<usize> {
        self.intervals
            .iter()
            .enumerate()
            .filter(|(_, iv)| iv.contains(r))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn rank_at(&self, r: f64) -> usize {
        self.alive_at(r).len()
    }

    /// Eliminate every entry sitting on the pivot of a boundary column
    /// available at `r`. The result is the canonical representative of the
    /// class modulo boundaries of triangles with diameter < r.
    fn reduce_mod_boundaries(&self, mut v: SparseVec, r: f64) -> SparseVec {
        loop {
            let mut target: Option<(u32, u32, u32)> = None;
            for &(idx, coef) in v.entries.iter().rev() {
                if let Some(owner) = self.pivot_owner[idx as usize] {
                    if self.boundary_cols[owner as usize].diam < r {
                        target = Some((idx, coef, owner));
                        break;
                    }
                }
            }
            let Some((_, coef, owner)) = target else { return v };
            let oc = &self.boundary_cols[owner as usize];
            let factor = self.field.neg(self.field.mul(coef, self.field.inv(oc.col.top().unwrap().1)));
            v = v.add_scaled(&oc.col, factor, self.field);
        }
    }

    /// Coordinates of a cycle (supported at parameter `r`) in the alive
    /// interval basis at `r`.
    pub fn express_cycle(&self, cycle: &[(usize, usize, u32)], r: f64) -> Result<Vec<u32>> {
        self.check_radius(r)?;
        let v = self.chain_from_edges(cycle, r)?;
        let ids = self.alive_at(r);
        self.express(&v, &ids, r)
    }

    /// Whether a cycle is a boundary at parameter `r`.
    pub fn is_null_at(&self, cycle: &[(usize, usize, u32)], r: f64) -> Result<bool> {
        Ok(self.express_cycle(cycle, r)?.iter().all(|&c| c == 0))
    }

    fn chain_from_edges(&self, cycle: &[(usize, usize, u32)], r: f64) -> Result<SparseVec> {
        let index: HashMap<(usize, usize), u32> =
            self.edge_verts.iter().enumerate().map(|(c, &e)| (e, c as u32)).collect();
        let mut entries = Vec::new();
        for &(a, b, coef) in cycle {
            if a == b {
                continue;
            }
            let (key, coef) = if a < b { ((a, b), coef) } else { ((b, a), self.field.neg(coef)) };
            let Some(&idx) = index.get(&key) else {
                return Err(Error::Argument(format!("edge {key:?} is not in the filtration")));
            };
            if self.edge_diam[idx as usize] >= r {
                return Err(Error::Argument(format!(
                    "edge {key:?} (diam {}) is absent at r = {r}",
                    self.edge_diam[idx as usize]
                )));
            }
            entries.push((idx, coef));
        }
        Ok(SparseVec::from_unsorted(entries, self.field))
    }

    /// Solve `sum c_j z_j = v` modulo boundaries at `r` for the alive basis.
    fn express(&self, v: &SparseVec, basis_ids: &[usize], r: f64) -> Result<Vec<u32>> {
        let reduced_v = self.reduce_mod_boundaries(v.clone(), r);
        let reduced_basis: Vec<SparseVec> = basis_ids
            .iter()
            .map(|&id| self.reduce_mod_boundaries(self.chains[id].clone(), r))
            .collect();
        if reduced_v.entries.is_empty() {
            return Ok(vec![0; basis_ids.len()]);
        }
        // collect the support
        let mut support: Vec<u32> = reduced_v.entries.iter().map(|e| e.0).collect();
        for b in &reduced_basis {
            support.extend(b.entries.iter().map(|e| e.0));
        }
        support.sort_unstable();
        support.dedup();
        let row_of: HashMap<u32, usize> = support.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let g = basis_ids.len();
        // [basis columns | v] augmented system
        let mut m = vec![vec![0u32; g + 1]; support.len()];
        for (c, b) in reduced_basis.iter().enumerate() {
            for &(idx, coef) in &b.entries {
                m[row_of[&idx]][c] = coef;
            }
        }
        for &(idx, coef) in &reduced_v.entries {
            m[row_of[&idx]][g] = coef;
        }
        // eliminate
        let f = self.field;
        let rows = m.len();
        let mut rank_rows: Vec<usize> = Vec::new();
        let mut coords = vec![0u32; g];
        for c in 0..g {
            let start = rank_rows.len();
            let Some(pr) = (start..rows).find(|&rr| m[rr][c] != 0) else { continue };
            m.swap(start, pr);
            let inv = f.inv(m[start][c]);
            for j in 0..=g {
                m[start][j] = f.mul(m[start][j], inv);
            }
            for rr in 0..rows {
                if rr != start && m[rr][c] != 0 {
                    let factor = m[rr][c];
                    for j in 0..=g {
                        let sub = f.mul(factor, m[start][j]);
                        m[rr][j] = f.sub(m[rr][j], sub);
                    }
                }
            }
            rank_rows.push(c);
        }
        // inconsistent system means the input was not a cycle at r
        for rr in rank_rows.len()..rows {
            if m[rr][g] != 0 {
                return Err(Error::Argument(
                    "chain is not a combination of the alive basis at r".into(),
                ));
            }
        }
        for (row, &pc) in rank_rows.iter().enumerate() {
            coords[pc] = m[row][g];
        }
        Ok(coords)
    }

    /// The inclusion-induced map `H1(r=p) -> H1(r=q)` in interval bases.
    pub fn induced_map(&self, p: f64, q: f64) -> Result<InducedMap> {
        if !(p < q) {
            return Err(Error::Argument(format!("need p < q, got p = {p}, q = {q}")));
        }
        self.check_radius(p)?;
        self.check_radius(q)?;
        let source = self.alive_at(p);
        let target = self.alive_at(q);
        let mut matrix = vec![vec![0u32; source.len()]; target.len()];
        for (c, &sid) in source.iter().enumerate() {
            let coords = self.express(&self.chains[sid], &target, q)?;
            for (rw, &v) in coords.iter().enumerate() {
                matrix[rw][c] = v;
            }
        }
        let basis_of = |ids: &[usize]| {
            ids.iter().map(|&i| (self.intervals[i].birth, self.intervals[i].death)).collect()
        };
        Ok(InducedMap {
            p,
            q,
            matrix,
            source_basis: basis_of(&source),
            target_basis: basis_of(&target),
            field: self.field,
        })
    }
}

/// BFS path between two vertices of the reduction forest, inclusive.
fn forest_path(forest: &[Vec<(usize, usize)>], from: usize, to: usize) -> Vec<usize> {
    if from == to {
        return vec![from];
    }
    let mut prev: Vec<Option<usize>> = vec![None; forest.len()];
    let mut queue = std::collections::VecDeque::from([from]);
    prev[from] = Some(from);
    while let Some(v) = queue.pop_front() {
        if v == to {
            break;
        }
        for &(w, _) in &forest[v] {
            if prev[w].is_none() {
                prev[w] = Some(v);
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![to];
    let mut cur = to;
    while cur != from {
        cur = prev[cur].expect("endpoints lie in one tree");
        path.push(cur);
    }
    path.reverse();
    path
}

/// Oriented edge chain of a closed vertex walk.
fn walk_chain(walk: &[usize], edge_index: &HashMap<(usize, usize), u32>, f: FieldP) -> SparseVec {
    let mut entries = Vec::new();
    for w in 0..walk.len() {
        let (a, b) = (walk[w], walk[(w + 1) % walk.len()]);
        if a == b {
            continue;
        }
        let (key, coef) = if a < b { ((a, b), 1) } else { ((b, a), f.neg(1)) };
        entries.push((edge_index[&key], coef));
    }
    SparseVec::from_unsorted(entries, f)
}

/// Decorated H1 persistence of the open filtration.
pub fn persist_h1(skel: &Filtration2Skeleton, field: FieldP) -> DecoratedDiagram {
    H1Engine::new(skel, field).diagram()
}

/// One-off inclusion-induced map; build an [`H1Engine`] for repeated queries.
pub fn induced_map_h1(skel: &Filtration2Skeleton, p: f64, q: f64, field: FieldP) -> Result<InducedMap> {
    H1Engine::new(skel, field).induced_map(p, q)
}

/// Basis of `ker i_{p,q}` in the alive-interval coordinates at `p`.
pub fn kernel_subspace(skel: &Filtration2Skeleton, p: f64, q: f64, field: FieldP) -> Result<Vec<Vec<u32>>> {
    Ok(induced_map_h1(skel, p, q, field)?.kernel_basis())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rips::build_filtration;
    use crate::sampling::DistanceMatrix;

    fn circle4() -> Filtration2Skeleton {
        let dm = DistanceMatrix::from_fn(4, |i, j| {
            let d = (i as f64 - j as f64).abs();
            d.min(4.0 - d)
        });
        build_filtration(&dm, 3.0).unwrap()
    }

    #[test]
    fn four_point_circle_has_one_interval() {
        // oracle: H1 rank is 1 exactly on (1, 2]
        let f = circle4();
        let d = persist_h1(&f, FieldP::default());
        assert_eq!(d.intervals.len(), 1);
        let iv = &d.intervals[0];
        assert_eq!((iv.birth, iv.death), (1.0, 2.0));
        assert!(!iv.censored && iv.left_open && iv.right_closed);
        for (r, want) in [(0.5, 0), (1.0, 0), (1.5, 1), (2.0, 1), (2.5, 0)] {
            assert_eq!(d.count_alive(r), want, "at r = {r}");
            let cx = f.complex_at(r).unwrap();
            assert_eq!(super::super::brute_force_h1_rank(&cx, FieldP::default()).unwrap(), want);
        }
        // representative is a genuine 4-cycle
        assert_eq!(iv.representative.len(), 4);
        assert_eq!(iv.representative_loop.len(), 4);
    }

    #[test]
    fn triangle_enters_with_last_edge() {
        let dm = DistanceMatrix::from_fn(3, |i, j| if i == j { 0.0 } else { 1.0 });
        let f = build_filtration(&dm, 2.0).unwrap();
        let d = persist_h1(&f, FieldP::default());
        assert!(d.intervals.is_empty(), "any r-loop of size 3 is r-null");
    }

    #[test]
    fn single_vertex_empty_diagram() {
        let dm = DistanceMatrix::from_fn(1, |_, _| 0.0);
        let f = build_filtration(&dm, 1.0).unwrap();
        assert!(persist_h1(&f, FieldP::default()).intervals.is_empty());
    }

    #[test]
    fn censoring_at_low_horizon() {
        let dm = DistanceMatrix::from_fn(4, |i, j| {
            let d = (i as f64 - j as f64).abs();
            d.min(4.0 - d)
        });
        let f = build_filtration(&dm, 1.5).unwrap();
        let d = persist_h1(&f, FieldP::default());
        assert_eq!(d.intervals.len(), 1);
        assert!(d.intervals[0].censored);
        assert_eq!(d.intervals[0].death, 1.5);
        assert!(!d.intervals[0].right_closed);
    }

    #[test]
    fn induced_map_examples() {
        let f = circle4();
        let field = FieldP::default();
        let id_map = induced_map_h1(&f, 1.5, 1.9, field).unwrap();
        assert_eq!(id_map.matrix, vec![vec![1]]);
        assert!(id_map.is_surjective().0);
        assert!(id_map.is_isomorphism());

        let zero_map = induced_map_h1(&f, 1.5, 2.5, field).unwrap();
        assert_eq!(zero_map.matrix.len(), 0);
        assert_eq!(zero_map.source_basis.len(), 1);
        assert!(zero_map.is_surjective().0, "vacuously surjective onto rank 0");

        assert!(induced_map_h1(&f, 1.5, 1.5, field).is_err());
    }

    #[test]
    fn kernel_dimensions() {
        let f = circle4();
        let field = FieldP::default();
        assert_eq!(kernel_subspace(&f, 1.5, 2.5, field).unwrap().len(), 1);
        assert_eq!(kernel_subspace(&f, 1.5, 1.6, field).unwrap().len(), 0);
        // empty diagram
        let dm = DistanceMatrix::from_fn(3, |i, j| if i == j { 0.0 } else { 1.0 });
        let fe = build_filtration(&dm, 2.0).unwrap();
        assert_eq!(kernel_subspace(&fe, 1.5, 1.8, field).unwrap().len(), 0);
    }

    #[test]
    fn composition_law_on_random_triples() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(23);
        for trial in 0..20 {
            let n = 8;
            let pts: Vec<(f64, f64)> =
                (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
            let dm = DistanceMatrix::from_fn(n, |i, j| {
                (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1)
            });
            let f = build_filtration(&dm, 2.0).unwrap();
            let field = if trial % 2 == 0 { FieldP::default() } else { FieldP::new(5).unwrap() };
            let eng = H1Engine::new(&f, field);
            for _ in 0..10 {
                let mut abc = [rng.gen::<f64>() * 1.8 + 0.05, rng.gen::<f64>() * 1.8 + 0.05, rng.gen::<f64>() * 1.8 + 0.05];
                abc.sort_by(f64::total_cmp);
                let [o, p, q] = abc;
                if o >= p || p >= q {
                    continue;
                }
                let m_op = eng.induced_map(o, p).unwrap();
                let m_pq = eng.induced_map(p, q).unwrap();
                let m_oq = eng.induced_map(o, q).unwrap();
                assert_eq!(m_pq.compose(&m_op), m_oq.matrix, "composition law at {o} {p} {q}");
            }
        }
    }

    #[test]
    fn oracle_equivalence_on_random_filtrations() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(99);
        for _ in 0..30 {
            let n = rng.gen_range(3..=10);
            let pts: Vec<(f64, f64)> =
                (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
            let dm = DistanceMatrix::from_fn(n, |i, j| {
                (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1)
            });
            let f = build_filtration(&dm, 2.0).unwrap();
            let diag = persist_h1(&f, FieldP::default());
            let mut grid = vec![0.05];
            let radii = f.critical_radii();
            for w in radii.windows(2) {
                grid.push((w[0] + w[1]) / 2.0);
            }
            if let Some(&last) = radii.last() {
                grid.push((last + 2.0) / 2.0);
            }
            for r in grid {
                let cx = f.complex_at(r).unwrap();
                let brute = super::super::brute_force_h1_rank(&cx, FieldP::default()).unwrap();
                assert_eq!(diag.count_alive(r), brute, "rank mismatch at r = {r}");
            }
        }
    }
}
