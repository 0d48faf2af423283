//! Edge-path group presentation of a Rips 2-skeleton at a parameter,
//! bounded Tietze simplification, and abelianization rank over F_p.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::homology::{dense_rank, FieldP};
use crate::rips::Complex2;

/// A finite group presentation. Relator words are sequences of signed
/// 1-based generator references: `+g` for the generator, `-g` for its
/// inverse.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Presentation {
    pub generators: Vec<String>,
    pub relators: Vec<Vec<i64>>,
    pub basepoint: usize,
    /// The complex edge behind each generator, when built from a complex.
    pub generator_edges: Vec<(usize, usize)>,
}

impl Presentation {
    pub fn to_text(&self) -> String {
        let word = |w: &[i64]| -> String {
            if w.is_empty() {
                return "1".to_string();
            }
            w.iter()
                .map(|&g| {
                    let name = &self.generators[(g.unsigned_abs() - 1) as usize];
                    if g > 0 {
                        name.clone()
                    } else {
                        format!("{name}^-1")
                    }
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!(
            "< {} | {} >",
            self.generators.join(", "),
            self.relators.iter().map(|w| word(w)).collect::<Vec<_>>().join(", ")
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("presentation serializes")
    }
}

/// Vertices reachable from `basepoint` through the complex's edges.
pub fn component_of(cx: &Complex2, basepoint: usize) -> Vec<bool> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); cx.n];
    for &(i, j) in &cx.edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut seen = vec![false; cx.n];
    seen[basepoint] = true;
    let mut queue = VecDeque::from([basepoint]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// BFS spanning tree from the basepoint; one generator per non-tree edge,
/// one relator per triangle. The complex is silently restricted to the
/// basepoint's component.
pub fn edge_path_presentation(cx: &Complex2, basepoint: usize) -> Presentation {
    assert!(basepoint < cx.n, "basepoint out of range");
    let seen = component_of(cx, basepoint);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); cx.n];
    for &(i, j) in &cx.edges {
        if seen[i] && seen[j] {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
    }
    // BFS tree (shallow trees give short relator words)
    let mut in_tree: std::collections::HashSet<(usize, usize)> = Default::default();
    let mut visited = vec![false; cx.n];
    visited[basepoint] = true;
    let mut queue = VecDeque::from([basepoint]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !visited[w] {
                visited[w] = true;
                in_tree.insert((v.min(w), v.max(w)));
                queue.push_back(w);
            }
        }
    }
    let mut generators = Vec::new();
    let mut generator_edges = Vec::new();
    let mut gen_of_edge: std::collections::HashMap<(usize, usize), i64> = Default::default();
    for &(i, j) in &cx.edges {
        if seen[i] && seen[j] && !in_tree.contains(&(i, j)) {
            let id = generators.len() as i64 + 1;
            generators.push(format!("g{}", generators.len()));
            generator_edges.push((i, j));
            gen_of_edge.insert((i, j), id);
        }
    }
    // word of a directed edge: identity on tree edges, +-generator otherwise
    let letter = |a: usize, b: usize| -> Option<i64> {
        let key = (a.min(b), a.max(b));
        gen_of_edge.get(&key).map(|&g| if a < b { g } else { -g })
    };
    let mut relators = Vec::new();
    for &(i, j, k) in &cx.triangles {
        if !(seen[i] && seen[j] && seen[k]) {
            continue;
        }
        let word: Vec<i64> =
            [letter(i, j), letter(j, k), letter(k, i)].into_iter().flatten().collect();
        let word = free_reduce(&word);
        if !word.is_empty() {
            relators.push(word);
        }
    }
    Presentation { generators, relators, basepoint, generator_edges }
}

fn free_reduce(word: &[i64]) -> Vec<i64> {
    let mut out: Vec<i64> = Vec::with_capacity(word.len());
    for &l in word {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

fn cyclic_reduce(mut word: Vec<i64>) -> Vec<i64> {
    word = free_reduce(&word);
    while word.len() >= 2 && word.first() == word.last().map(|&l| -l).as_ref() {
        word.remove(0);
        word.pop();
        word = free_reduce(&word);
    }
    word
}

/// Remove trivial generators and length-<=2 relators for up to
/// `pass_budget` passes; the isomorphism class is preserved.
pub fn tietze_simplify(pres: &Presentation, pass_budget: usize) -> Presentation {
    assert!(pass_budget >= 1, "pass budget must be at least 1");
    let mut gens = pres.generators.clone();
    let mut gen_edges = pres.generator_edges.clone();
    let mut relators: Vec<Vec<i64>> = pres.relators.clone();
    for _ in 0..pass_budget {
        let mut changed = false;
        relators = relators.into_iter().map(cyclic_reduce).filter(|w| !w.is_empty()).collect();
        relators.sort();
        relators.dedup();

        // substitution target: a length-1 relator kills its generator; a
        // length-2 relator on distinct generators expresses one by the other
        let mut action: Option<(usize, Vec<i64>, usize)> = None; // (gen idx 0-based, replacement word for +gen, relator idx)
        for (ri, w) in relators.iter().enumerate() {
            match w.len() {
                1 => {
                    action = Some(((w[0].unsigned_abs() - 1) as usize, Vec::new(), ri));
                    break;
                }
                2 => {
                    let (x, y) = (w[0], w[1]);
                    if x.unsigned_abs() != y.unsigned_abs() {
                        // eliminate the higher-numbered generator G: the
                        // relator says G^ed K^ek = 1, i.e. G = K^(-ek*ed)
                        let (dead, keep) = if x.unsigned_abs() > y.unsigned_abs() { (x, y) } else { (y, x) };
                        let sign = -(dead.signum() * keep.signum());
                        let rep = vec![sign * keep.abs()];
                        action = Some(((dead.unsigned_abs() - 1) as usize, rep, ri));
                        break;
                    }
                }
                _ => {}
            }
        }
        if let Some((dead, rep, ri)) = action {
            relators.remove(ri);
            let dead_ref = dead as i64 + 1;
            relators = relators
                .into_iter()
                .map(|w| {
                    let mut out = Vec::with_capacity(w.len());
                    for l in w {
                        if l == dead_ref {
                            out.extend(rep.iter().copied());
                        } else if l == -dead_ref {
                            out.extend(rep.iter().rev().map(|&x| -x));
                        } else {
                            out.push(l);
                        }
                    }
                    free_reduce(&out)
                })
                .filter(|w| !w.is_empty())
                .collect();
            // drop the generator and shift references above it
            gens.remove(dead);
            if dead < gen_edges.len() {
                gen_edges.remove(dead);
            }
            for w in relators.iter_mut() {
                for l in w.iter_mut() {
                    let idx = (l.unsigned_abs() - 1) as usize;
                    if idx > dead {
                        *l = if *l > 0 { *l - 1 } else { *l + 1 };
                    }
                }
            }
            changed = true;
        }
        if !changed {
            break;
        }
    }
    Presentation { generators: gens, relators, basepoint: pres.basepoint, generator_edges: gen_edges }
}

/// `#generators - rank` of the exponent-sum matrix over F_p.
pub fn abelianization_rank(pres: &Presentation, field: FieldP) -> usize {
    let g = pres.generators.len();
    if g == 0 {
        return 0;
    }
    let mut m: Vec<Vec<u32>> = pres
        .relators
        .iter()
        .map(|w| {
            let mut row = vec![0i64; g];
            for &l in w {
                let idx = (l.unsigned_abs() - 1) as usize;
                row[idx] += l.signum();
            }
            row.into_iter().map(|x| field.from_i64(x)).collect()
        })
        .collect();
    g - dense_rank(&mut m, field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::brute_force_h1_rank;

    fn four_cycle() -> Complex2 {
        Complex2 { n: 4, r: 1.0, edges: vec![(0, 1), (0, 3), (1, 2), (2, 3)], triangles: vec![] }
    }

    #[test]
    fn free_rank_one_from_cycle() {
        let p = edge_path_presentation(&four_cycle(), 0);
        assert_eq!(p.generators.len(), 1);
        assert!(p.relators.is_empty());
        assert_eq!(abelianization_rank(&p, FieldP::default()), 1);
    }

    #[test]
    fn full_triangle_is_trivial() {
        let cx =
            Complex2 { n: 3, r: 1.0, edges: vec![(0, 1), (0, 2), (1, 2)], triangles: vec![(0, 1, 2)] };
        let p = edge_path_presentation(&cx, 0);
        assert_eq!(p.generators.len(), 1);
        assert_eq!(p.relators.len(), 1);
        assert_eq!(abelianization_rank(&p, FieldP::default()), 0);
        let simplified = tietze_simplify(&p, 10);
        assert!(simplified.generators.is_empty());
        assert!(simplified.relators.is_empty());
    }

    #[test]
    fn isolated_basepoint_gives_trivial_presentation() {
        let cx = Complex2 { n: 3, r: 1.0, edges: vec![(1, 2)], triangles: vec![] };
        let p = edge_path_presentation(&cx, 0);
        assert!(p.generators.is_empty());
        assert!(p.relators.is_empty());
    }

    #[test]
    fn tietze_examples() {
        // relator "a" removes the generator
        let p = Presentation {
            generators: vec!["a".into(), "b".into()],
            relators: vec![vec![1]],
            basepoint: 0,
            generator_edges: vec![(0, 1), (1, 2)],
        };
        let s = tietze_simplify(&p, 5);
        assert_eq!(s.generators, vec!["b".to_string()]);
        assert!(s.relators.is_empty());

        // a free presentation is untouched
        let free = Presentation {
            generators: vec!["a".into(), "b".into()],
            relators: vec![],
            basepoint: 0,
            generator_edges: vec![(0, 1), (1, 2)],
        };
        let s = tietze_simplify(&free, 5);
        assert_eq!(s.generators.len(), 2);

        // a = b^-1 substitution
        let p = Presentation {
            generators: vec!["a".into(), "b".into()],
            relators: vec![vec![1, 2], vec![1, 1, 1]],
            basepoint: 0,
            generator_edges: vec![(0, 1), (1, 2)],
        };
        let s = tietze_simplify(&p, 10);
        assert_eq!(s.generators.len(), 1);
        assert_eq!(abelianization_rank(&s, FieldP::new(5).unwrap()),
                   abelianization_rank(&p, FieldP::new(5).unwrap()));
    }

    #[test]
    fn abelianization_examples() {
        let free2 = Presentation {
            generators: vec!["a".into(), "b".into()],
            relators: vec![],
            basepoint: 0,
            generator_edges: vec![],
        };
        assert_eq!(abelianization_rank(&free2, FieldP::default()), 2);
        let killed = Presentation {
            generators: vec!["a".into()],
            relators: vec![vec![1]],
            basepoint: 0,
            generator_edges: vec![],
        };
        assert_eq!(abelianization_rank(&killed, FieldP::default()), 0);
    }

    #[test]
    fn hurewicz_consistency_on_random_complexes() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        use crate::rips::build_filtration;
        use crate::sampling::DistanceMatrix;
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..25 {
            let n = rng.gen_range(4..=10);
            let pts: Vec<(f64, f64)> =
                (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
            let dm = DistanceMatrix::from_fn(n, |i, j| {
                (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1)
            });
            let skel = build_filtration(&dm, 2.0).unwrap();
            let r = rng.gen::<f64>() * 1.5 + 0.1;
            let cx = skel.complex_at(r).unwrap();
            // restrict the oracle to the basepoint's component
            let seen = component_of(&cx, 0);
            if seen.iter().any(|&s| !s) {
                continue;
            }
            let p = edge_path_presentation(&cx, 0);
            for field in [FieldP::default(), FieldP::new(3).unwrap()] {
                let simplified = tietze_simplify(&p, 50);
                let want = brute_force_h1_rank(&cx, field).unwrap();
                assert_eq!(abelianization_rank(&p, field), want);
                assert_eq!(abelianization_rank(&simplified, field), want, "rank preserved");
            }
        }
    }
}
