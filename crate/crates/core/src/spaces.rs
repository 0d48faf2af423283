//! Exact models of compact geodesic spaces: circles, wedges of circles,
//! flat tori and metric graphs, with closed-form distances, geodesic
//! interpolation and the analytic catalogue of geodesic circles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homology::{DecoratedDiagram, FieldP, PersistenceInterval};

/// Two points of a model closer than this are treated as equal.
pub const POINT_TOL: f64 = 1e-12;

/// A point of a model, in the model's fundamental domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpacePoint {
    /// Arc position in `[0, circumference)`.
    Circle { pos: f64 },
    /// Petal index and arc position in `[0, length_i)`. The wedge point is
    /// canonically `{ circle: 0, pos: 0.0 }`.
    Wedge { circle: usize, pos: f64 },
    /// Coordinates in `[0, w) x [0, h)`.
    Torus { u: f64, v: f64 },
    /// Edge id and offset in `[0, edge length]`.
    Graph { edge: usize, offset: f64 },
}

/// Serializable description of a model; see the model file format.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Circle {
        circumference: f64,
    },
    Wedge {
        lengths: Vec<f64>,
    },
    Torus {
        w: f64,
        h: f64,
    },
    Graph {
        vertices: usize,
        edges: Vec<(usize, usize, f64)>,
        basepoint: (usize, f64),
    },
}

/// Shortest-path data for a metric graph, precomputed on construction.
#[derive(Debug, Clone)]
struct GraphCache {
    /// Vertex-to-vertex shortest path lengths (exactly symmetric).
    dist: Vec<Vec<f64>>,
    /// `next[i][j]`: first hop after `i` on the chosen path to `j`.
    next: Vec<Vec<usize>>,
    /// Cheapest direct edge id for a vertex pair, if any.
    hop_edge: Vec<Vec<Option<usize>>>,
}

/// An exact model of a compact geodesic space.
#[derive(Debug, Clone, Serialize)]
#[serde(into = "ModelSpec")]
pub struct GeodesicSpaceModel {
    spec: ModelSpec,
    graph: Option<GraphCache>,
}

impl From<GeodesicSpaceModel> for ModelSpec {
    fn from(m: GeodesicSpaceModel) -> ModelSpec {
        m.spec
    }
}

impl<'de> Deserialize<'de> for GeodesicSpaceModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = ModelSpec::deserialize(d)?;
        GeodesicSpaceModel::from_spec(spec).map_err(serde::de::Error::custom)
    }
}

fn require_finite_positive(x: f64, what: &str) -> Result<()> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Invalid(format!("{what} must be finite and > 0, got {x}")));
    }
    Ok(())
}

/// Wrap `x` into `[0, period)`.
fn wrap(x: f64, period: f64) -> f64 {
    let mut r = x % period;
    if r < 0.0 {
        r += period;
    }
    if r >= period {
        r = 0.0;
    }
    r
}

/// Geodesic distance on a circle of circumference `c`.
fn circle_dist(c: f64, a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(c - d)
}

/// Signed arc of the chosen geodesic from `a` to `b` on a circle of
/// circumference `c`: the shorter arc, the positively oriented one on ties.
fn circle_step(c: f64, a: f64, b: f64) -> f64 {
    let fw = wrap(b - a, c);
    let bw = c - fw;
    if fw <= bw {
        fw
    } else {
        -bw
    }
}

impl GeodesicSpaceModel {
    pub fn circle(circumference: f64) -> Result<Self> {
        Self::from_spec(ModelSpec::Circle { circumference })
    }

    pub fn wedge(lengths: Vec<f64>) -> Result<Self> {
        Self::from_spec(ModelSpec::Wedge { lengths })
    }

    pub fn flat_torus(w: f64, h: f64) -> Result<Self> {
        Self::from_spec(ModelSpec::Torus { w, h })
    }

    pub fn metric_graph(
        vertices: usize,
        edges: Vec<(usize, usize, f64)>,
        basepoint: (usize, f64),
    ) -> Result<Self> {
        Self::from_spec(ModelSpec::Graph { vertices, edges, basepoint })
    }

    pub fn from_spec(spec: ModelSpec) -> Result<Self> {
        match &spec {
            ModelSpec::Circle { circumference } => {
                require_finite_positive(*circumference, "circumference")?;
            }
            ModelSpec::Wedge { lengths } => {
                for l in lengths {
                    require_finite_positive(*l, "petal length")?;
                }
            }
            ModelSpec::Torus { w, h } => {
                require_finite_positive(*w, "torus width")?;
                require_finite_positive(*h, "torus height")?;
            }
            ModelSpec::Graph { vertices, edges, basepoint } => {
                if *vertices == 0 {
                    return Err(Error::Invalid("graph needs at least one vertex".into()));
                }
                for &(u, v, len) in edges {
                    if u >= *vertices || v >= *vertices {
                        return Err(Error::Invalid(format!(
                            "edge ({u},{v}) references a vertex >= {vertices}"
                        )));
                    }
                    require_finite_positive(len, "edge length")?;
                }
                let (be, boff) = *basepoint;
                if be >= edges.len() {
                    return Err(Error::Invalid(format!("basepoint edge {be} out of range")));
                }
                if !boff.is_finite() || boff < 0.0 || boff > edges[be].2 {
                    return Err(Error::Invalid(format!(
                        "basepoint offset {boff} outside [0, {}]",
                        edges[be].2
                    )));
                }
                // connectivity
                let mut parent: Vec<usize> = (0..*vertices).collect();
                fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
                    while p[x] != x {
                        p[x] = p[p[x]];
                        x = p[x];
                    }
                    x
                }
                for &(u, v, _) in edges {
                    let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                    parent[ru] = rv;
                }
                let r0 = find(&mut parent, 0);
                for i in 1..*vertices {
                    if find(&mut parent, i) != r0 {
                        return Err(Error::Invalid("metric graph must be connected".into()));
                    }
                }
            }
        }
        let graph = match &spec {
            ModelSpec::Graph { vertices, edges, .. } => Some(GraphCache::build(*vertices, edges)),
            _ => None,
        };
        Ok(GeodesicSpaceModel { spec, graph })
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.spec).expect("model spec serializes")
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    /// Stable identifier used to reject cross-model inputs.
    pub fn model_id(&self) -> String {
        match &self.spec {
            ModelSpec::Circle { circumference } => format!("circle[{circumference}]"),
            ModelSpec::Wedge { lengths } => format!("wedge{lengths:?}"),
            ModelSpec::Torus { w, h } => format!("torus[{w}x{h}]"),
            ModelSpec::Graph { vertices, edges, basepoint } => {
                format!("graph[n={vertices},e={edges:?},bp={basepoint:?}]")
            }
        }
    }

    pub fn basepoint(&self) -> SpacePoint {
        match &self.spec {
            ModelSpec::Circle { .. } => SpacePoint::Circle { pos: 0.0 },
            ModelSpec::Wedge { .. } => SpacePoint::Wedge { circle: 0, pos: 0.0 },
            ModelSpec::Torus { .. } => SpacePoint::Torus { u: 0.0, v: 0.0 },
            ModelSpec::Graph { basepoint, .. } => {
                SpacePoint::Graph { edge: basepoint.0, offset: basepoint.1 }
            }
        }
    }

    /// Checks that the point's shape and coordinates fit this model.
    pub fn contains(&self, p: &SpacePoint) -> bool {
        match (&self.spec, p) {
            (ModelSpec::Circle { circumference }, SpacePoint::Circle { pos }) => {
                (0.0..*circumference).contains(pos)
            }
            (ModelSpec::Wedge { lengths }, SpacePoint::Wedge { circle, pos }) => {
                if lengths.is_empty() {
                    *circle == 0 && *pos == 0.0
                } else {
                    *circle < lengths.len() && (0.0..lengths[*circle]).contains(pos)
                }
            }
            (ModelSpec::Torus { w, h }, SpacePoint::Torus { u, v }) => {
                (0.0..*w).contains(u) && (0.0..*h).contains(v)
            }
            (ModelSpec::Graph { edges, .. }, SpacePoint::Graph { edge, offset }) => {
                *edge < edges.len() && (0.0..=edges[*edge].2).contains(offset)
            }
            _ => false,
        }
    }

    fn check_point(&self, p: &SpacePoint) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::Domain(format!("point {p:?} does not belong to {}", self.model_id())))
        }
    }

    /// Normalize a point into the fundamental domain; collapses any wedge
    /// petal origin onto the canonical wedge point.
    pub fn normalize(&self, p: SpacePoint) -> SpacePoint {
        match (&self.spec, p) {
            (ModelSpec::Circle { circumference }, SpacePoint::Circle { pos }) => {
                SpacePoint::Circle { pos: wrap(pos, *circumference) }
            }
            (ModelSpec::Wedge { lengths }, SpacePoint::Wedge { circle, pos }) => {
                if lengths.is_empty() {
                    return SpacePoint::Wedge { circle: 0, pos: 0.0 };
                }
                let pos = wrap(pos, lengths[circle]);
                if pos == 0.0 {
                    SpacePoint::Wedge { circle: 0, pos: 0.0 }
                } else {
                    SpacePoint::Wedge { circle, pos }
                }
            }
            (ModelSpec::Torus { w, h }, SpacePoint::Torus { u, v }) => {
                SpacePoint::Torus { u: wrap(u, *w), v: wrap(v, *h) }
            }
            (ModelSpec::Graph { edges, .. }, SpacePoint::Graph { edge, offset }) => {
                SpacePoint::Graph { edge, offset: offset.clamp(0.0, edges[edge].2) }
            }
            (_, p) => p,
        }
    }

    /// Exact geodesic distance between two points of the model.
    pub fn distance(&self, x: &SpacePoint, y: &SpacePoint) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(match (&self.spec, x, y) {
            (ModelSpec::Circle { circumference }, SpacePoint::Circle { pos: a }, SpacePoint::Circle { pos: b }) => {
                circle_dist(*circumference, *a, *b)
            }
            (
                ModelSpec::Wedge { lengths },
                SpacePoint::Wedge { circle: i, pos: u },
                SpacePoint::Wedge { circle: j, pos: v },
            ) => {
                if lengths.is_empty() {
                    0.0
                } else if i == j {
                    circle_dist(lengths[*i], *u, *v)
                } else {
                    let du = u.min(lengths[*i] - u);
                    let dv = v.min(lengths[*j] - v);
                    // canonical accumulation keeps the matrix exactly symmetric
                    du.min(dv) + du.max(dv)
                }
            }
            (ModelSpec::Torus { w, h }, SpacePoint::Torus { u: u1, v: v1 }, SpacePoint::Torus { u: u2, v: v2 }) => {
                let du = circle_dist(*w, *u1, *u2);
                let dv = circle_dist(*h, *v1, *v2);
                du.hypot(dv)
            }
            (ModelSpec::Graph { edges, .. }, SpacePoint::Graph { .. }, SpacePoint::Graph { .. }) => {
                self.graph.as_ref().unwrap().point_distance(edges, x, y)
            }
            _ => unreachable!("check_point filters mismatched kinds"),
        })
    }

    /// The point at fraction `t` along the chosen geodesic from `x` to `y`.
    ///
    /// Tie-breaks: antipodal pairs on a circle factor take the positively
    /// oriented arc; on the torus, the translate with the lexicographically
    /// smallest displacement vector wins.
    pub fn geodesic_point(&self, x: &SpacePoint, y: &SpacePoint, t: f64) -> Result<SpacePoint> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Argument(format!("interpolation fraction {t} outside [0, 1]")));
        }
        self.check_point(x)?;
        self.check_point(y)?;
        let p = match (&self.spec, x, y) {
            (ModelSpec::Circle { circumference }, SpacePoint::Circle { pos: a }, SpacePoint::Circle { pos: b }) => {
                let step = circle_step(*circumference, *a, *b);
                SpacePoint::Circle { pos: wrap(a + t * step, *circumference) }
            }
            (
                ModelSpec::Wedge { lengths },
                SpacePoint::Wedge { circle: i, pos: u },
                SpacePoint::Wedge { circle: j, pos: v },
            ) => {
                if lengths.is_empty() {
                    SpacePoint::Wedge { circle: 0, pos: 0.0 }
                } else if i == j {
                    let step = circle_step(lengths[*i], *u, *v);
                    SpacePoint::Wedge { circle: *i, pos: wrap(u + t * step, lengths[*i]) }
                } else {
                    // two legs through the wedge point
                    let a = u.min(lengths[*i] - u);
                    let b = v.min(lengths[*j] - v);
                    let m = t * (a + b);
                    if m <= a && a > 0.0 {
                        let step = circle_step(lengths[*i], *u, 0.0);
                        SpacePoint::Wedge { circle: *i, pos: wrap(u + (m / a) * step, lengths[*i]) }
                    } else if b > 0.0 {
                        let frac = ((m - a) / b).clamp(0.0, 1.0);
                        let step = circle_step(lengths[*j], 0.0, *v);
                        SpacePoint::Wedge { circle: *j, pos: wrap(frac * step, lengths[*j]) }
                    } else {
                        SpacePoint::Wedge { circle: 0, pos: 0.0 }
                    }
                }
            }
            (ModelSpec::Torus { w, h }, SpacePoint::Torus { u: u1, v: v1 }, SpacePoint::Torus { u: u2, v: v2 }) => {
                let (du, dv) = torus_displacement(*w, *h, (*u1, *v1), (*u2, *v2));
                SpacePoint::Torus { u: wrap(u1 + t * du, *w), v: wrap(v1 + t * dv, *h) }
            }
            (ModelSpec::Graph { edges, .. }, SpacePoint::Graph { .. }, SpacePoint::Graph { .. }) => {
                self.graph.as_ref().unwrap().geodesic_point(edges, x, y, t)
            }
            _ => unreachable!(),
        };
        Ok(self.normalize(p))
    }

    /// Signed per-feature increments of the chosen geodesic from `x` to `y`,
    /// in the coordinates of [`critical_circles`](Self::critical_circles).
    ///
    /// Circle: one signed arc. Wedge: one signed arc per petal. Torus: the
    /// chosen displacement vector. Used to accumulate winding numbers.
    pub fn geodesic_increments(&self, x: &SpacePoint, y: &SpacePoint) -> Result<Vec<f64>> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(match (&self.spec, x, y) {
            (ModelSpec::Circle { circumference }, SpacePoint::Circle { pos: a }, SpacePoint::Circle { pos: b }) => {
                vec![circle_step(*circumference, *a, *b)]
            }
            (
                ModelSpec::Wedge { lengths },
                SpacePoint::Wedge { circle: i, pos: u },
                SpacePoint::Wedge { circle: j, pos: v },
            ) => {
                let mut inc = vec![0.0; lengths.len()];
                if lengths.is_empty() {
                } else if i == j {
                    inc[*i] = circle_step(lengths[*i], *u, *v);
                } else {
                    if *u != 0.0 {
                        inc[*i] += circle_step(lengths[*i], *u, 0.0);
                    }
                    if *v != 0.0 {
                        inc[*j] += circle_step(lengths[*j], 0.0, *v);
                    }
                }
                inc
            }
            (ModelSpec::Torus { w, h }, SpacePoint::Torus { u: u1, v: v1 }, SpacePoint::Torus { u: u2, v: v2 }) => {
                let (du, dv) = torus_displacement(*w, *h, (*u1, *v1), (*u2, *v2));
                vec![du, dv]
            }
            (ModelSpec::Graph { .. }, _, _) => {
                return Err(Error::NoAnalyticCatalogue);
            }
            _ => unreachable!(),
        })
    }

    /// Analytic catalogue of geodesic circles of the model.
    pub fn critical_circles(&self) -> Result<Vec<CriticalCircleFeature>> {
        match &self.spec {
            ModelSpec::Circle { circumference } => Ok(vec![CriticalCircleFeature {
                label: "circle".into(),
                length: *circumference,
                kind: CircleKind::Whole,
            }]),
            ModelSpec::Wedge { lengths } => Ok(lengths
                .iter()
                .enumerate()
                .map(|(i, l)| CriticalCircleFeature {
                    label: format!("petal{i}"),
                    length: *l,
                    kind: CircleKind::WedgePetal(i),
                })
                .collect()),
            // Axis loops only; diagonal circles of a square torus are left to
            // the refined-sample oracle.
            ModelSpec::Torus { w, h } => Ok(vec![
                CriticalCircleFeature {
                    label: "axis-u".into(),
                    length: *w,
                    kind: CircleKind::TorusAxisU,
                },
                CriticalCircleFeature {
                    label: "axis-v".into(),
                    length: *h,
                    kind: CircleKind::TorusAxisV,
                },
            ]),
            ModelSpec::Graph { .. } => Err(Error::NoAnalyticCatalogue),
        }
    }

    /// The model's H1 persistence diagram: one interval `(0, l/3]` per
    /// catalogue circle of length `l`.
    pub fn known_diagram(&self, field: FieldP) -> Result<DecoratedDiagram> {
        let circles = self.critical_circles()?;
        let _ = field;
        let mut intervals: Vec<PersistenceInterval> = circles
            .iter()
            .map(|c| PersistenceInterval {
                birth: 0.0,
                death: c.length / 3.0,
                left_open: true,
                right_closed: true,
                censored: false,
                representative: Vec::new(),
                representative_loop: Vec::new(),
            })
            .collect();
        intervals.sort_by(|a, b| a.death.total_cmp(&b.death));
        let rmax = intervals.last().map(|i| i.death * 1.5).unwrap_or(1.0);
        Ok(DecoratedDiagram { intervals, rmax })
    }

    /// A safe upper bound on the diameter of the model.
    pub fn diameter_bound(&self) -> f64 {
        match &self.spec {
            ModelSpec::Circle { circumference } => circumference / 2.0,
            ModelSpec::Wedge { lengths } => {
                let mut halves: Vec<f64> = lengths.iter().map(|l| l / 2.0).collect();
                halves.sort_by(f64::total_cmp);
                halves.iter().rev().take(2).sum::<f64>().max(f64::MIN_POSITIVE)
            }
            ModelSpec::Torus { w, h } => (w / 2.0).hypot(h / 2.0),
            ModelSpec::Graph { edges, .. } => {
                let total: f64 = edges.iter().map(|e| e.2).sum();
                total.max(f64::MIN_POSITIVE)
            }
        }
    }

    /// Uniform probe points along every parametrization of the model at
    /// spacing <= `step`; used by samplers and density certificates.
    pub fn probe_points(&self, step: f64) -> Vec<SpacePoint> {
        let mut out = Vec::new();
        match &self.spec {
            ModelSpec::Circle { circumference } => {
                let k = segments_for(*circumference, step);
                for i in 0..k {
                    out.push(SpacePoint::Circle { pos: i as f64 * circumference / k as f64 });
                }
            }
            ModelSpec::Wedge { lengths } => {
                if lengths.is_empty() {
                    out.push(SpacePoint::Wedge { circle: 0, pos: 0.0 });
                }
                for (c, l) in lengths.iter().enumerate() {
                    let k = segments_for(*l, step);
                    for i in 0..k {
                        out.push(self.normalize(SpacePoint::Wedge {
                            circle: c,
                            pos: i as f64 * l / k as f64,
                        }));
                    }
                }
            }
            ModelSpec::Torus { w, h } => {
                let ku = segments_for(*w, step);
                let kv = segments_for(*h, step);
                for i in 0..ku {
                    for j in 0..kv {
                        out.push(SpacePoint::Torus {
                            u: i as f64 * w / ku as f64,
                            v: j as f64 * h / kv as f64,
                        });
                    }
                }
            }
            ModelSpec::Graph { edges, .. } => {
                for (e, &(_, _, len)) in edges.iter().enumerate() {
                    let k = segments_for(len, step);
                    for i in 0..=k {
                        out.push(SpacePoint::Graph { edge: e, offset: i as f64 * len / k as f64 });
                    }
                }
            }
        }
        out
    }
}

/// Smallest segment count `k >= 1` with `total / k < step` (strict), so a
/// grid of `k` segments is strictly denser than `step`.
pub(crate) fn segments_for(total: f64, step: f64) -> usize {
    let k = (total / step).floor() as usize + 1;
    k.max(1)
}

/// Minimizing displacement vector from `a` to a translate of `b` on the
/// flat torus, lexicographically smallest on ties.
fn torus_displacement(w: f64, h: f64, a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let mut best: Option<(f64, (f64, f64))> = None;
    for i in [-1.0, 0.0, 1.0] {
        for j in [-1.0, 0.0, 1.0] {
            let du = b.0 - a.0 + i * w;
            let dv = b.1 - a.1 + j * h;
            let n = du.hypot(dv);
            let cand = (n, (du, dv));
            best = Some(match best {
                None => cand,
                Some(cur) => {
                    if n < cur.0 || (n == cur.0 && (du, dv) < cur.1) {
                        cand
                    } else {
                        cur
                    }
                }
            });
        }
    }
    best.unwrap().1
}

/// Where a geodesic circle of the catalogue lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum CircleKind {
    Whole,
    WedgePetal(usize),
    TorusAxisU,
    TorusAxisV,
}

/// An isometrically embedded geodesic circle of the model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalCircleFeature {
    pub label: String,
    pub length: f64,
    kind: CircleKind,
}

impl CriticalCircleFeature {
    /// Isometric parametrization by arc length, `t` taken modulo `length`.
    pub fn point_at(&self, model: &GeodesicSpaceModel, t: f64) -> SpacePoint {
        let t = wrap(t, self.length);
        let p = match self.kind {
            CircleKind::Whole => SpacePoint::Circle { pos: t },
            CircleKind::WedgePetal(i) => SpacePoint::Wedge { circle: i, pos: t },
            CircleKind::TorusAxisU => SpacePoint::Torus { u: t, v: 0.0 },
            CircleKind::TorusAxisV => SpacePoint::Torus { u: 0.0, v: t },
        };
        model.normalize(p)
    }

    /// Which petal winding coordinate this circle contributes to, in the
    /// ordering of [`GeodesicSpaceModel::critical_circles`].
    pub fn coordinate_index(&self) -> usize {
        match self.kind {
            CircleKind::Whole => 0,
            CircleKind::WedgePetal(i) => i,
            CircleKind::TorusAxisU => 0,
            CircleKind::TorusAxisV => 1,
        }
    }

    /// Exact distance from `p` to the circle's image, with the arc parameter
    /// of the nearest circle point.
    pub fn locate(&self, model: &GeodesicSpaceModel, p: &SpacePoint) -> Result<(f64, f64)> {
        let p = model.normalize(*p);
        Ok(match (self.kind, p) {
            (CircleKind::Whole, SpacePoint::Circle { pos }) => (0.0, pos),
            (CircleKind::WedgePetal(i), SpacePoint::Wedge { circle, pos }) => {
                if circle == i || pos == 0.0 {
                    (0.0, if circle == i { pos } else { 0.0 })
                } else {
                    // nearest point of another petal is the wedge point
                    (model.distance(&p, &model.basepoint())?, 0.0)
                }
            }
            (CircleKind::TorusAxisU, SpacePoint::Torus { u, v }) => {
                let ModelSpec::Torus { h, .. } = model.spec() else { unreachable!() };
                (circle_dist(*h, v, 0.0), u)
            }
            (CircleKind::TorusAxisV, SpacePoint::Torus { u, v }) => {
                let ModelSpec::Torus { w, .. } = model.spec() else { unreachable!() };
                (circle_dist(*w, u, 0.0), v)
            }
            _ => return Err(Error::Domain("point does not belong to the circle's model".into())),
        })
    }
}

impl GraphCache {
    fn build(n: usize, edges: &[(usize, usize, f64)]) -> GraphCache {
        let inf = f64::INFINITY;
        let mut dist = vec![vec![inf; n]; n];
        let mut next = vec![vec![usize::MAX; n]; n];
        let mut hop_edge = vec![vec![None; n]; n];
        for i in 0..n {
            dist[i][i] = 0.0;
            next[i][i] = i;
        }
        for (id, &(u, v, len)) in edges.iter().enumerate() {
            if u == v {
                continue;
            }
            if len < dist[u][v] {
                dist[u][v] = len;
                dist[v][u] = len;
                next[u][v] = v;
                next[v][u] = u;
                hop_edge[u][v] = Some(id);
                hop_edge[v][u] = Some(id);
            }
        }
        // Floyd-Warshall with strict improvement keeps the matrix exactly
        // symmetric and the hop choice deterministic.
        for k in 0..n {
            for i in 0..n {
                if dist[i][k] == inf {
                    continue;
                }
                for j in 0..n {
                    let via = dist[i][k] + dist[k][j];
                    if via < dist[i][j] {
                        dist[i][j] = via;
                        next[i][j] = next[i][k];
                    }
                }
            }
        }
        GraphCache { dist, next, hop_edge }
    }

    /// Endpoint anchors of a point: (vertex, offset cost, edge end offset).
    /// The third component distinguishes the two ends of a self-loop.
    fn anchors(edges: &[(usize, usize, f64)], p: &SpacePoint) -> [(usize, f64, f64); 2] {
        let SpacePoint::Graph { edge, offset } = p else { unreachable!() };
        let (u, v, len) = edges[*edge];
        [(u, *offset, 0.0), (v, len - *offset, len)]
    }

    fn point_distance(&self, edges: &[(usize, usize, f64)], x: &SpacePoint, y: &SpacePoint) -> f64 {
        let (SpacePoint::Graph { edge: e1, offset: o1 }, SpacePoint::Graph { edge: e2, offset: o2 }) = (x, y)
        else {
            unreachable!()
        };
        let mut best = f64::INFINITY;
        if e1 == e2 {
            best = (o1 - o2).abs();
        }
        for (a, da, _) in GraphCache::anchors(edges, x) {
            for (b, db, _) in GraphCache::anchors(edges, y) {
                // canonical accumulation order: matrix distance + offsets
                let cand = (self.dist[a][b] + da.min(db)) + da.max(db);
                if cand < best {
                    best = cand;
                }
            }
        }
        best
    }

    /// Walk the chosen shortest path from `x` to `y` and return the point at
    /// fraction `t` of its length.
    fn geodesic_point(
        &self,
        edges: &[(usize, usize, f64)],
        x: &SpacePoint,
        y: &SpacePoint,
        t: f64,
    ) -> SpacePoint {
        let (SpacePoint::Graph { edge: e1, offset: o1 }, SpacePoint::Graph { edge: e2, offset: o2 }) = (x, y)
        else {
            unreachable!()
        };
        let total = self.point_distance(edges, x, y);
        if total == 0.0 {
            return *x;
        }
        let target = t * total;
        // direct along the shared edge
        if e1 == e2 && (o1 - o2).abs() == total {
            let dir = if o2 >= o1 { 1.0 } else { -1.0 };
            return SpacePoint::Graph { edge: *e1, offset: o1 + dir * target };
        }
        // best anchored route, in fixed candidate order
        let mut route = None;
        'outer: for ax in GraphCache::anchors(edges, x) {
            for ay in GraphCache::anchors(edges, y) {
                let cand = (self.dist[ax.0][ay.0] + ax.1.min(ay.1)) + ax.1.max(ay.1);
                if cand == total {
                    route = Some((ax, ay));
                    break 'outer;
                }
            }
        }
        let ((a, da, a_end), (b, _, b_end)) = route.expect("distance is attained by some route");
        // leg 1: from x toward anchor a along edge e1
        if target <= da && da > 0.0 {
            let dir = if a_end > *o1 { 1.0 } else { -1.0 };
            return SpacePoint::Graph { edge: *e1, offset: (o1 + dir * target).clamp(0.0, edges[*e1].2) };
        }
        // leg 2: vertex path a -> b
        let mut walked = da;
        let mut cur = a;
        while cur != b {
            let nxt = self.next[cur][b];
            let eid = self.hop_edge[cur][nxt].expect("next hop has a direct edge");
            let (u, _, len) = edges[eid];
            if target <= walked + len {
                let along = target - walked;
                let offset = if cur == u { along } else { len - along };
                return SpacePoint::Graph { edge: eid, offset: offset.clamp(0.0, len) };
            }
            walked += len;
            cur = nxt;
        }
        // leg 3: from anchor b into edge e2 toward y
        let len2 = edges[*e2].2;
        let rem = (target - walked).max(0.0);
        let dir = if *o2 > b_end { 1.0 } else { -1.0 };
        SpacePoint::Graph { edge: *e2, offset: (b_end + dir * rem).clamp(0.0, len2) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn models() -> Vec<GeodesicSpaceModel> {
        vec![
            GeodesicSpaceModel::circle(1.0).unwrap(),
            GeodesicSpaceModel::wedge(vec![1.0, 2.0]).unwrap(),
            GeodesicSpaceModel::flat_torus(1.0, 1.0).unwrap(),
            GeodesicSpaceModel::metric_graph(
                4,
                vec![(0, 1, 1.0), (1, 2, 0.5), (2, 3, 0.7), (3, 0, 0.3), (1, 3, 0.9)],
                (0, 0.25),
            )
            .unwrap(),
        ]
    }

    fn random_point(model: &GeodesicSpaceModel, rng: &mut StdRng) -> SpacePoint {
        match model.spec() {
            ModelSpec::Circle { circumference } => {
                SpacePoint::Circle { pos: rng.gen::<f64>() * circumference }
            }
            ModelSpec::Wedge { lengths } => {
                let c = rng.gen_range(0..lengths.len());
                model.normalize(SpacePoint::Wedge { circle: c, pos: rng.gen::<f64>() * lengths[c] })
            }
            ModelSpec::Torus { w, h } => {
                SpacePoint::Torus { u: rng.gen::<f64>() * w, v: rng.gen::<f64>() * h }
            }
            ModelSpec::Graph { edges, .. } => {
                let e = rng.gen_range(0..edges.len());
                SpacePoint::Graph { edge: e, offset: rng.gen::<f64>() * edges[e].2 }
            }
        }
    }

    #[test]
    fn circle_distance_examples() {
        let m = GeodesicSpaceModel::circle(1.0).unwrap();
        let d = m
            .distance(&SpacePoint::Circle { pos: 0.0 }, &SpacePoint::Circle { pos: 0.7 })
            .unwrap();
        assert!((d - 0.3).abs() < 1e-12);
        let d0 = m
            .distance(&SpacePoint::Circle { pos: 0.25 }, &SpacePoint::Circle { pos: 0.25 })
            .unwrap();
        assert_eq!(d0, 0.0);
    }

    #[test]
    fn torus_distance_example() {
        // minimum over the nine nearest lattice translates
        let m = GeodesicSpaceModel::flat_torus(1.0, 1.0).unwrap();
        let d = m
            .distance(&SpacePoint::Torus { u: 0.0, v: 0.0 }, &SpacePoint::Torus { u: 0.6, v: 0.8 })
            .unwrap();
        assert!((d - (0.4f64 * 0.4 + 0.2 * 0.2).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn torus_distance_matches_brute_translates() {
        let m = GeodesicSpaceModel::flat_torus(1.3, 0.7).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..500 {
            let x = random_point(&m, &mut rng);
            let y = random_point(&m, &mut rng);
            let (SpacePoint::Torus { u: a, v: b }, SpacePoint::Torus { u: c, v: d }) = (x, y)
            else {
                unreachable!()
            };
            let mut brute = f64::INFINITY;
            for i in -2..=2 {
                for j in -2..=2 {
                    let du = c - a + i as f64 * 1.3;
                    let dv = d - b + j as f64 * 0.7;
                    brute = brute.min(du.hypot(dv));
                }
            }
            assert!((m.distance(&x, &y).unwrap() - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn graph_distance_matches_dijkstra_oracle() {
        let edges = vec![(0, 1, 1.0), (1, 2, 0.5), (2, 3, 0.7), (3, 0, 0.3), (1, 3, 0.9)];
        let m = GeodesicSpaceModel::metric_graph(4, edges.clone(), (0, 0.25)).unwrap();
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..300 {
            let x = random_point(&m, &mut rng);
            let y = random_point(&m, &mut rng);
            let d = m.distance(&x, &y).unwrap();
            let oracle = dijkstra_with_temp_vertices(&edges, &x, &y);
            assert!(
                (d - oracle).abs() < 1e-12,
                "graph distance {d} vs dijkstra {oracle} for {x:?} {y:?}"
            );
        }
    }

    /// Independent oracle: insert both offsets as temporary vertices and run
    /// Dijkstra on the refined graph.
    fn dijkstra_with_temp_vertices(
        edges: &[(usize, usize, f64)],
        x: &SpacePoint,
        y: &SpacePoint,
    ) -> f64 {
        let (SpacePoint::Graph { edge: e1, offset: o1 }, SpacePoint::Graph { edge: e2, offset: o2 }) = (x, y)
        else {
            unreachable!()
        };
        let base = edges.iter().map(|e| e.0.max(e.1)).max().unwrap() + 1;
        let (sx, sy) = (base, base + 1);
        let mut segs: Vec<(usize, usize, f64)> = Vec::new();
        for (id, &(u, v, len)) in edges.iter().enumerate() {
            let mut cuts: Vec<(f64, usize)> = Vec::new();
            if id == *e1 {
                cuts.push((*o1, sx));
            }
            if id == *e2 {
                cuts.push((*o2, sy));
            }
            cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut prev = (0.0, u);
            for (off, node) in cuts {
                segs.push((prev.1, node, off - prev.0));
                prev = (off, node);
            }
            segs.push((prev.1, v, len - prev.0));
        }
        let n = base + 2;
        let mut dist = vec![f64::INFINITY; n];
        dist[sx] = 0.0;
        let mut done = vec![false; n];
        for _ in 0..n {
            let mut cur = usize::MAX;
            for i in 0..n {
                if !done[i] && (cur == usize::MAX || dist[i] < dist[cur]) {
                    cur = i;
                }
            }
            if cur == usize::MAX || dist[cur] == f64::INFINITY {
                break;
            }
            done[cur] = true;
            for &(a, b, w) in &segs {
                if a == cur && dist[cur] + w < dist[b] {
                    dist[b] = dist[cur] + w;
                }
                if b == cur && dist[cur] + w < dist[a] {
                    dist[a] = dist[cur] + w;
                }
            }
        }
        dist[sy]
    }

    #[test]
    fn metric_axioms_random_triples() {
        for m in models() {
            let mut rng = StdRng::seed_from_u64(42);
            let exact = matches!(m.spec(), ModelSpec::Circle { .. } | ModelSpec::Wedge { .. });
            for _ in 0..1000 {
                let x = random_point(&m, &mut rng);
                let y = random_point(&m, &mut rng);
                let z = random_point(&m, &mut rng);
                let dxy = m.distance(&x, &y).unwrap();
                let dyx = m.distance(&y, &x).unwrap();
                assert_eq!(dxy, dyx, "symmetry on {}", m.model_id());
                assert!(dxy >= 0.0);
                let dxz = m.distance(&x, &z).unwrap();
                let dyz = m.distance(&y, &z).unwrap();
                // closed forms are exact up to the final roundings: a few
                // ulps for circle/wedge, 1e-12 for torus/graph
                let tol = if exact { 4.0 * f64::EPSILON * (1.0 + dxy + dyz) } else { 1e-12 };
                assert!(
                    dxz <= dxy + dyz + tol,
                    "triangle inequality on {}: {dxz} > {dxy} + {dyz}",
                    m.model_id()
                );
                assert_eq!(m.distance(&x, &x).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn geodesic_point_midpoint_property() {
        for m in models() {
            let mut rng = StdRng::seed_from_u64(5);
            for _ in 0..300 {
                let x = random_point(&m, &mut rng);
                let y = random_point(&m, &mut rng);
                let d = m.distance(&x, &y).unwrap();
                let t = rng.gen::<f64>();
                let z = m.geodesic_point(&x, &y, t).unwrap();
                let dxz = m.distance(&x, &z).unwrap();
                let dzy = m.distance(&z, &y).unwrap();
                assert!(
                    (dxz - t * d).abs() < 1e-12,
                    "{}: d(x,z)={dxz} vs t*d={}",
                    m.model_id(),
                    t * d
                );
                assert!((dzy - (1.0 - t) * d).abs() < 1e-12);
                let mid = m.geodesic_point(&x, &y, 0.5).unwrap();
                let dm = m.distance(&x, &mid).unwrap();
                assert!((dm - d / 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn circle_geodesic_examples() {
        let m = GeodesicSpaceModel::circle(1.0).unwrap();
        let z = m
            .geodesic_point(&SpacePoint::Circle { pos: 0.0 }, &SpacePoint::Circle { pos: 0.4 }, 0.5)
            .unwrap();
        assert_eq!(z, SpacePoint::Circle { pos: 0.2 });
        // antipodal tie-break: positively oriented arc
        let z = m
            .geodesic_point(&SpacePoint::Circle { pos: 0.0 }, &SpacePoint::Circle { pos: 0.5 }, 0.5)
            .unwrap();
        assert_eq!(z, SpacePoint::Circle { pos: 0.25 });
    }

    #[test]
    fn torus_geodesic_example() {
        let m = GeodesicSpaceModel::flat_torus(1.0, 1.0).unwrap();
        let z = m
            .geodesic_point(
                &SpacePoint::Torus { u: 0.0, v: 0.0 },
                &SpacePoint::Torus { u: 0.6, v: 0.8 },
                0.5,
            )
            .unwrap();
        let SpacePoint::Torus { u, v } = z else { panic!() };
        assert!((u - 0.8).abs() < 1e-12 && (v - 0.9).abs() < 1e-12, "got ({u}, {v})");
    }

    #[test]
    fn critical_circles_catalogue() {
        let c = GeodesicSpaceModel::circle(1.0).unwrap();
        let feats = c.critical_circles().unwrap();
        assert_eq!(feats.len(), 1);
        assert_eq!(feats[0].length, 1.0);

        let w = GeodesicSpaceModel::wedge(vec![1.0, 2.0]).unwrap();
        let lens: Vec<f64> = w.critical_circles().unwrap().iter().map(|f| f.length).collect();
        assert_eq!(lens, vec![1.0, 2.0]);

        let t = GeodesicSpaceModel::flat_torus(1.0, 1.0).unwrap();
        let lens: Vec<f64> = t.critical_circles().unwrap().iter().map(|f| f.length).collect();
        assert_eq!(lens, vec![1.0, 1.0]);

        let g = GeodesicSpaceModel::metric_graph(2, vec![(0, 1, 1.0)], (0, 0.0)).unwrap();
        assert!(matches!(g.critical_circles(), Err(Error::NoAnalyticCatalogue)));
    }

    #[test]
    fn circle_feature_is_isometric_embedding() {
        for m in models() {
            let Ok(circles) = m.critical_circles() else { continue };
            let mut rng = StdRng::seed_from_u64(3);
            for c in circles {
                for _ in 0..200 {
                    let t1 = rng.gen::<f64>() * c.length;
                    let t2 = rng.gen::<f64>() * c.length;
                    let expect = {
                        let d = (t1 - t2).abs();
                        d.min(c.length - d)
                    };
                    let d = m
                        .distance(&c.point_at(&m, t1), &c.point_at(&m, t2))
                        .unwrap();
                    assert!(
                        (d - expect).abs() < 1e-12,
                        "{} circle {}: {d} vs arc {expect}",
                        m.model_id(),
                        c.label
                    );
                }
            }
        }
    }

    #[test]
    fn known_diagram_examples() {
        let f2 = FieldP::new(2).unwrap();
        let c = GeodesicSpaceModel::circle(1.0).unwrap();
        let d = c.known_diagram(f2).unwrap();
        assert_eq!(d.intervals.len(), 1);
        assert!((d.intervals[0].death - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.intervals[0].birth, 0.0);

        let w = GeodesicSpaceModel::wedge(vec![1.0, 2.0]).unwrap();
        let d = w.known_diagram(f2).unwrap();
        let deaths: Vec<f64> = d.intervals.iter().map(|i| i.death).collect();
        assert!((deaths[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((deaths[1] - 2.0 / 3.0).abs() < 1e-15);

        let point = GeodesicSpaceModel::wedge(vec![]).unwrap();
        assert!(point.known_diagram(f2).unwrap().intervals.is_empty());
    }

    #[test]
    fn model_json_round_trip() {
        for m in models() {
            let json = m.to_json();
            let back = GeodesicSpaceModel::from_json(&json).unwrap();
            assert_eq!(back.model_id(), m.model_id());
        }
        let m = GeodesicSpaceModel::from_json(r#"{"kind":"circle","circumference":1.0}"#).unwrap();
        assert_eq!(m.model_id(), "circle[1]");
        assert!(GeodesicSpaceModel::from_json(r#"{"kind":"circle","circumference":-1.0}"#).is_err());
        assert!(GeodesicSpaceModel::from_json(
            r#"{"kind":"graph","vertices":3,"edges":[[0,1,1.0]],"basepoint":[0,0.0]}"#
        )
        .is_err());
    }

    #[test]
    fn mismatched_model_point_is_domain_error() {
        let c = GeodesicSpaceModel::circle(1.0).unwrap();
        let err = c
            .distance(&SpacePoint::Circle { pos: 0.1 }, &SpacePoint::Torus { u: 0.0, v: 0.0 })
            .unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }
}
