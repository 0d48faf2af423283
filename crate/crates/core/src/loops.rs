//! r-loops, fillings, delta-samples of circles, the snapping map onto a
//! sample, winding-number classes, and the explicit simplicial nullhomotopy
//! of a snapped circle sample.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homology::FieldP;
use crate::sampling::{DistanceMatrix, SampleSet};
use crate::spaces::{CriticalCircleFeature, GeodesicSpaceModel, ModelSpec, SpacePoint, POINT_TOL};

/// A cyclic point sequence with consecutive distances < `bound`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RLoop {
    pub points: Vec<SpacePoint>,
    pub bound: f64,
}

impl RLoop {
    pub fn new(model: &GeodesicSpaceModel, points: Vec<SpacePoint>, bound: f64) -> Result<RLoop> {
        if points.is_empty() {
            return Err(Error::Argument("an r-loop needs at least one point".into()));
        }
        for i in 0..points.len() {
            let j = (i + 1) % points.len();
            let d = model.distance(&points[i], &points[j])?;
            if d >= bound {
                return Err(Error::Argument(format!(
                    "consecutive points #{i}, #{j} at distance {d} >= bound {bound}"
                )));
            }
        }
        Ok(RLoop { points, bound })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Join two loops based at the same point.
    pub fn concatenate(&self, model: &GeodesicSpaceModel, other: &RLoop) -> Result<RLoop> {
        if model.distance(&self.points[0], &other.points[0])? >= POINT_TOL {
            return Err(Error::Argument("concatenation requires a shared basepoint".into()));
        }
        let mut points = self.points.clone();
        points.extend(other.points.iter().copied());
        RLoop::new(model, points, self.bound.max(other.bound))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("loop serializes")
    }
}

/// A loop through sample indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledLoop {
    pub indices: Vec<usize>,
    pub bound: f64,
}

impl SampledLoop {
    /// The loop as an oriented edge chain `(i, j, coef)` with `i < j`;
    /// degenerate steps are dropped.
    pub fn edge_chain(&self, field: FieldP) -> Vec<(usize, usize, u32)> {
        let mut chain = Vec::new();
        for w in 0..self.indices.len() {
            let (a, b) = (self.indices[w], self.indices[(w + 1) % self.indices.len()]);
            if a == b {
                continue;
            }
            if a < b {
                chain.push((a, b, 1u32));
            } else {
                chain.push((b, a, field.neg(1)));
            }
        }
        chain
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("loop serializes")
    }
}

/// Piecewise-geodesic filling of an r-loop, parametrized by arc length.
#[derive(Debug, Clone)]
pub struct FilledLoop {
    pub points: Vec<SpacePoint>,
    pub segment_lengths: Vec<f64>,
    pub total_length: f64,
}

impl FilledLoop {
    /// Point at arc length `s` in `[0, total_length]`.
    pub fn point_at(&self, model: &GeodesicSpaceModel, s: f64) -> Result<SpacePoint> {
        if self.total_length == 0.0 {
            return Ok(self.points[0]);
        }
        let mut s = s.clamp(0.0, self.total_length);
        for (i, &len) in self.segment_lengths.iter().enumerate() {
            if s <= len || i + 1 == self.segment_lengths.len() {
                let t = if len == 0.0 { 0.0 } else { (s / len).clamp(0.0, 1.0) };
                let a = &self.points[i];
                let b = &self.points[(i + 1) % self.points.len()];
                return model.geodesic_point(a, b, t);
            }
            s -= len;
        }
        Ok(self.points[0])
    }
}

/// A uniform delta-sample of a geodesic circle as an r-loop; at least three
/// points so the cyclic edge set is well defined. `t = 0` sits at the
/// circle's distinguished point.
pub fn r_sample_of_circle(
    model: &GeodesicSpaceModel,
    circle: &CriticalCircleFeature,
    delta: f64,
) -> Result<RLoop> {
    if !(delta > 0.0) {
        return Err(Error::Argument(format!("delta must be positive, got {delta}")));
    }
    let m = ((circle.length / delta).floor() as usize + 1).max(3);
    let points: Vec<SpacePoint> =
        (0..m).map(|i| circle.point_at(model, i as f64 * circle.length / m as f64)).collect();
    RLoop::new(model, points, delta)
}

/// Connect consecutive loop points by the tie-broken geodesics.
pub fn fill(model: &GeodesicSpaceModel, rloop: &RLoop) -> Result<FilledLoop> {
    let n = rloop.points.len();
    let mut segment_lengths = Vec::with_capacity(n);
    for i in 0..n {
        segment_lengths.push(model.distance(&rloop.points[i], &rloop.points[(i + 1) % n])?);
    }
    let total_length = segment_lengths.iter().sum();
    Ok(FilledLoop { points: rloop.points.clone(), segment_lengths, total_length })
}

/// Replace each loop point by its nearest sample point (lowest index on
/// ties); a based loop keeps index 0 as its basepoint. The resulting bound
/// is `r + 2s` by the triangle inequality.
pub fn snap_to_sample(
    model: &GeodesicSpaceModel,
    rloop: &RLoop,
    sample: &SampleSet,
) -> Result<SampledLoop> {
    let s = sample.claimed_density;
    let based = model.distance(&rloop.points[0], &model.basepoint())? < POINT_TOL;
    let mut indices = Vec::with_capacity(rloop.points.len());
    for (i, p) in rloop.points.iter().enumerate() {
        if i == 0 && based {
            indices.push(0);
            continue;
        }
        let (idx, d) = sample.nearest(p)?;
        if d >= s {
            return Err(Error::DensityViolation { index: i, found: d, claimed: s });
        }
        indices.push(idx);
    }
    Ok(SampledLoop { indices, bound: rloop.bound + 2.0 * s })
}

/// Winding numbers of a filled loop around the model's catalogue circles,
/// reduced mod p.
pub fn homology_class_of_loop(
    model: &GeodesicSpaceModel,
    filled: &FilledLoop,
    field: FieldP,
) -> Result<Vec<u32>> {
    let lengths: Vec<f64> = match model.spec() {
        ModelSpec::Circle { circumference } => vec![*circumference],
        ModelSpec::Wedge { lengths } => lengths.clone(),
        ModelSpec::Torus { w, h } => vec![*w, *h],
        ModelSpec::Graph { .. } => return Err(Error::NoAnalyticCatalogue),
    };
    let mut totals = vec![0.0f64; lengths.len()];
    let n = filled.points.len();
    for i in 0..n {
        let inc = model.geodesic_increments(&filled.points[i], &filled.points[(i + 1) % n])?;
        for (t, d) in totals.iter_mut().zip(inc) {
            *t += d;
        }
    }
    let mut coords = Vec::with_capacity(lengths.len());
    for (t, l) in totals.iter().zip(&lengths) {
        let w = t / l;
        let rounded = w.round();
        if (w - rounded).abs() > 1e-6 {
            return Err(Error::Invalid(format!(
                "accumulated increment {t} is not an integer multiple of the circle length {l}"
            )));
        }
        coords.push(field.from_i64(rounded as i64));
    }
    Ok(coords)
}

/// A geodesic lasso: an approach path from the basepoint to a geodesic
/// circle, traversed as approach * circle * inverse approach.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lasso {
    /// Points from the basepoint to a point on the circle.
    pub approach: Vec<SpacePoint>,
    pub circle: CriticalCircleFeature,
}

impl Lasso {
    pub fn new(
        model: &GeodesicSpaceModel,
        approach: Vec<SpacePoint>,
        circle: CriticalCircleFeature,
    ) -> Result<Lasso> {
        let Some(first) = approach.first() else {
            return Err(Error::Argument("a lasso needs a nonempty approach path".into()));
        };
        if model.distance(first, &model.basepoint())? >= POINT_TOL {
            return Err(Error::Argument("the approach must start at the basepoint".into()));
        }
        let last = approach.last().unwrap();
        let (on_circle, _) = circle.locate(model, last)?;
        if on_circle >= POINT_TOL {
            return Err(Error::Argument(format!(
                "the approach must end on the circle (off by {on_circle})"
            )));
        }
        Ok(Lasso { approach, circle })
    }

    /// The lasso as a based r-loop: walk out, go around a delta-sample of
    /// the circle rotated to start at the attachment point, walk back.
    pub fn to_rloop(&self, model: &GeodesicSpaceModel, delta: f64) -> Result<RLoop> {
        let attach = *self.approach.last().unwrap();
        let (_, t0) = self.circle.locate(model, &attach)?;
        let m = ((self.circle.length / delta).floor() as usize + 1).max(3);
        let mut points = self.approach.clone();
        for i in 0..=m {
            points.push(self.circle.point_at(model, t0 + i as f64 * self.circle.length / m as f64));
        }
        points.extend(self.approach.iter().rev().copied());
        // bound: the largest consecutive step
        let mut bound = delta;
        for w in 0..points.len() {
            let d = model.distance(&points[w], &points[(w + 1) % points.len()])?;
            bound = bound.max(d);
        }
        RLoop::new(model, points, bound + POINT_TOL)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NhMode {
    /// Item "short circle": requires `length < 3 (r - 2s)`.
    Dense,
    /// Item "enriched circle": requires `length < 3 r` and the three
    /// equidistant points present in the sample.
    Equidistant,
}

/// An explicit simplicial disk bounding a snapped circle sample in
/// `Rips(S, r)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NullHomotopy {
    /// Sample indices of the three interior cone points.
    pub interior_vertices: [usize; 3],
    /// Triangles as sample index triples (possibly degenerate).
    pub triangles: Vec<[usize; 3]>,
    pub boundary: SampledLoop,
}

impl NullHomotopy {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("nullhomotopy serializes")
    }
}

/// Build the nullhomotopy of a snapped delta-sample of `circle`:
/// a central triangle on the three near-equidistant cone points, a fan of
/// triangles from each boundary edge to its nearest cone point, and one
/// bridge triangle per fan transition.
pub fn build_nullhomotopy(
    model: &GeodesicSpaceModel,
    circle: &CriticalCircleFeature,
    sample: &SampleSet,
    r: f64,
    s: f64,
    mode: NhMode,
    delta: f64,
) -> Result<NullHomotopy> {
    let a = circle.length;
    if !(r > delta + 2.0 * s) {
        return Err(Error::PreconditionFailed(format!(
            "r > delta + 2*s violated: r = {r}, delta + 2*s = {}",
            delta + 2.0 * s
        )));
    }
    match mode {
        NhMode::Dense => {
            if !(a < 3.0 * (r - 2.0 * s)) {
                return Err(Error::PreconditionFailed(format!(
                    "length < 3*(r - 2*s) violated: length = {a}, 3*(r - 2*s) = {}",
                    3.0 * (r - 2.0 * s)
                )));
            }
        }
        NhMode::Equidistant => {
            if !(a < 3.0 * r) {
                return Err(Error::PreconditionFailed(format!(
                    "length < 3*r violated: length = {a}, 3*r = {}",
                    3.0 * r
                )));
            }
        }
    }

    // cone points: nearest sample points to three equidistant circle points
    let mut cone = [0usize; 3];
    for (j, c) in cone.iter_mut().enumerate() {
        let w = circle.point_at(model, j as f64 * a / 3.0);
        let (idx, d) = sample.nearest(&w)?;
        match mode {
            NhMode::Dense => {
                if d >= s {
                    return Err(Error::DensityViolation { index: j, found: d, claimed: s });
                }
            }
            NhMode::Equidistant => {
                if d >= POINT_TOL {
                    return Err(Error::PreconditionFailed(format!(
                        "equidistant point at arc {} is not in the sample (enrich it first)",
                        j as f64 * a / 3.0
                    )));
                }
            }
        }
        *c = idx;
    }

    let rloop = r_sample_of_circle(model, circle, delta)?;
    let snapped = snap_to_sample(model, &rloop, sample)?;
    let m = snapped.indices.len();
    let spacing = a / m as f64;

    // one anchor vertex per arc midpoint between consecutive cone points;
    // nearest loop vertex, left one on ties, so anchors sit within half a
    // spacing of their midpoint
    let mut anchors = [0usize; 3];
    for (j, anchor) in anchors.iter_mut().enumerate() {
        let mid = (j as f64 + 0.5) * a / 3.0;
        let left = (mid / spacing).floor() as usize % m;
        let frac = mid - left as f64 * spacing;
        *anchor = if frac <= spacing - frac { left } else { (left + 1) % m };
    }
    if !(anchors[0] < anchors[1] && anchors[1] < anchors[2]) {
        return Err(Error::ConstructionFailed(format!(
            "fan anchors {anchors:?} are not strictly ordered (loop too coarse)"
        )));
    }

    // cap fan of each boundary edge (v, v+1)
    let fan_of = |e: usize| -> usize {
        if e >= anchors[0] && e < anchors[1] {
            1
        } else if e >= anchors[1] && e < anchors[2] {
            2
        } else {
            0
        }
    };
    let ls = &snapped.indices;
    let mut triangles: Vec<[usize; 3]> = Vec::with_capacity(m + 4);
    triangles.push([cone[0], cone[1], cone[2]]);
    for e in 0..m {
        triangles.push([ls[e], ls[(e + 1) % m], cone[fan_of(e)]]);
    }
    for j in 0..3 {
        triangles.push([ls[anchors[j]], cone[j], cone[(j + 1) % 3]]);
    }

    // every emitted triangle must fit below r
    for t in &triangles {
        let diam = triangle_diam(model, sample, t)?;
        if diam >= r {
            return Err(Error::ConstructionFailed(format!(
                "triangle {t:?} has diameter {diam} >= r = {r}"
            )));
        }
    }

    Ok(NullHomotopy { interior_vertices: cone, triangles, boundary: snapped })
}

fn triangle_diam(model: &GeodesicSpaceModel, sample: &SampleSet, t: &[usize; 3]) -> Result<f64> {
    let mut diam = 0.0f64;
    for x in 0..3 {
        for y in (x + 1)..3 {
            if t[x] != t[y] {
                diam = diam.max(model.distance(&sample.points[t[x]], &sample.points[t[y]])?);
            }
        }
    }
    Ok(diam)
}

/// Verification verdict; failures are reported, not thrown.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NhVerification {
    pub pass: bool,
    pub first_violation: Option<String>,
}

/// Check (a) every triangle has diameter < r in the matrix, and (b) the
/// mod-2 edge boundary of the triangle multiset equals the boundary loop's
/// edge set.
pub fn verify_nullhomotopy(nh: &NullHomotopy, dmatrix: &DistanceMatrix, r: f64) -> NhVerification {
    for (k, t) in nh.triangles.iter().enumerate() {
        let mut diam = 0.0f64;
        for x in 0..3 {
            for y in (x + 1)..3 {
                if t[x] != t[y] {
                    diam = diam.max(dmatrix.get(t[x], t[y]));
                }
            }
        }
        if diam >= r {
            return NhVerification {
                pass: false,
                first_violation: Some(format!(
                    "triangle #{k} {t:?} has diameter {diam} >= r = {r}"
                )),
            };
        }
    }
    let mut boundary: std::collections::BTreeSet<(usize, usize)> = Default::default();
    let toggle = |a: usize, b: usize, set: &mut std::collections::BTreeSet<(usize, usize)>| {
        if a == b {
            return;
        }
        let e = (a.min(b), a.max(b));
        if !set.insert(e) {
            set.remove(&e);
        }
    };
    for t in &nh.triangles {
        toggle(t[0], t[1], &mut boundary);
        toggle(t[1], t[2], &mut boundary);
        toggle(t[0], t[2], &mut boundary);
    }
    let mut loop_edges: std::collections::BTreeSet<(usize, usize)> = Default::default();
    let idx = &nh.boundary.indices;
    for w in 0..idx.len() {
        toggle(idx[w], idx[(w + 1) % idx.len()], &mut loop_edges);
    }
    if boundary != loop_edges {
        let diff: Vec<(usize, usize)> =
            boundary.symmetric_difference(&loop_edges).copied().collect();
        return NhVerification {
            pass: false,
            first_violation: Some(format!(
                "mod-2 boundary mismatch; first differing edges: {:?}",
                &diff[..diff.len().min(4)]
            )),
        };
    }
    NhVerification { pass: true, first_violation: None }
}
