//! Finite s-dense subsets of a model: uniform samplers with optional jitter,
//! resolution-limited density certificates, enrichment with three equidistant
//! points per critical circle, and the restricted distance matrix.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{CriticalCircleFeature, GeodesicSpaceModel, SpacePoint, POINT_TOL};

/// Relative safety margin of the samplers. The density requirement is a
/// strict inequality; jitter amplitudes stay within `s * MARGIN / 2` so a
/// jittered grid still covers with room to spare.
pub const DENSITY_MARGIN: f64 = 0.05;

/// A finite subset of a model. Index 0 is always the model basepoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSet {
    pub model: GeodesicSpaceModel,
    pub points: Vec<SpacePoint>,
    pub claimed_density: f64,
    pub seed: u64,
    pub enriched_circles: Vec<String>,
}

/// Approximate certificate of the cover condition, exact up to one probe
/// resolution step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityCertificate {
    pub s: f64,
    pub probe_resolution: f64,
    pub max_gap_found: f64,
    pub verdict: bool,
}

/// Restriction of the model metric to a sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> DistanceMatrix {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = f(i, j);
            }
        }
        DistanceMatrix { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..self.n {
            if self.get(i, i) != 0.0 {
                return Err(Error::Invalid(format!("nonzero diagonal entry at {i}")));
            }
            for j in 0..self.n {
                let d = self.get(i, j);
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::Invalid(format!("entry ({i},{j}) = {d} is not a distance")));
                }
                if d != self.get(j, i) {
                    return Err(Error::Invalid(format!("asymmetric entries at ({i},{j})")));
                }
            }
        }
        Ok(())
    }

    /// Row-major CSV with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            let row: Vec<String> =
                (0..self.n).map(|j| format!("{:.16e}", self.get(i, j))).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

impl SampleSet {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sample serializes")
    }

    pub fn from_json(json: &str) -> Result<SampleSet> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the nearest sample point, lowest index on ties.
    pub fn nearest(&self, p: &SpacePoint) -> Result<(usize, f64)> {
        let mut best = (usize::MAX, f64::INFINITY);
        for (i, q) in self.points.iter().enumerate() {
            let d = self.model.distance(p, q)?;
            if d < best.1 {
                best = (i, d);
            }
        }
        Ok(best)
    }
}

/// Uniform sample along every parametrization of the model at spacing
/// strictly below `s`, guaranteeing strict s-density; the basepoint is
/// always index 0. With `jitter`, points move uniformly within
/// `±s * DENSITY_MARGIN / 2` along their parametrization.
pub fn sample_uniform(
    model: &GeodesicSpaceModel,
    s: f64,
    seed: u64,
    jitter: bool,
) -> Result<SampleSet> {
    if !(s > 0.0) {
        return Err(Error::Argument(format!("density s must be positive, got {s}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amp = s * DENSITY_MARGIN / 2.0;
    let mut points = vec![model.basepoint()];
    for p in model.probe_points(s) {
        let p = if jitter { jitter_point(model, &p, amp, &mut rng) } else { p };
        push_dedup(model, &mut points, p)?;
    }
    Ok(SampleSet {
        model: model.clone(),
        points,
        claimed_density: s,
        seed,
        enriched_circles: Vec::new(),
    })
}

fn jitter_point(
    model: &GeodesicSpaceModel,
    p: &SpacePoint,
    amp: f64,
    rng: &mut ChaCha8Rng,
) -> SpacePoint {
    let mut shift = || rng.gen_range(-amp..=amp);
    let moved = match *p {
        SpacePoint::Circle { pos } => SpacePoint::Circle { pos: pos + shift() },
        SpacePoint::Wedge { circle, pos } => {
            if pos == 0.0 {
                // the wedge point stays put
                SpacePoint::Wedge { circle, pos }
            } else {
                SpacePoint::Wedge { circle, pos: pos + shift() }
            }
        }
        SpacePoint::Torus { u, v } => SpacePoint::Torus { u: u + shift(), v: v + shift() },
        SpacePoint::Graph { edge, offset } => SpacePoint::Graph { edge, offset: offset + shift() },
    };
    model.normalize(moved)
}

fn push_dedup(
    model: &GeodesicSpaceModel,
    points: &mut Vec<SpacePoint>,
    p: SpacePoint,
) -> Result<bool> {
    for q in points.iter() {
        if model.distance(q, &p)? < POINT_TOL {
            return Ok(false);
        }
    }
    points.push(p);
    Ok(true)
}

/// Probe a grid of spacing <= `resolution` over every parametrization and
/// measure the largest distance to the sample.
pub fn verify_density(
    model: &GeodesicSpaceModel,
    sample: &SampleSet,
    s: f64,
    resolution: f64,
) -> Result<DensityCertificate> {
    if !(resolution > 0.0) || resolution > s / 10.0 {
        return Err(Error::Argument(format!(
            "probe resolution must lie in (0, s/10]; got {resolution} for s = {s}"
        )));
    }
    if sample.model.model_id() != model.model_id() {
        return Err(Error::Domain("sample belongs to a different model".into()));
    }
    let probes = model.probe_points(resolution);
    let gaps: Vec<f64> = probes
        .par_iter()
        .map(|p| {
            let mut best = f64::INFINITY;
            for q in &sample.points {
                let d = model.distance(p, q).expect("probe and sample share the model");
                if d < best {
                    best = d;
                }
            }
            best
        })
        .collect();
    let max_gap_found = gaps.into_iter().fold(0.0f64, f64::max);
    Ok(DensityCertificate { s, probe_resolution: resolution, max_gap_found, verdict: max_gap_found < s })
}

/// Add the three equidistant points `parametrize(0)`, `parametrize(l/3)`,
/// `parametrize(2l/3)` of each circle, deduplicated; idempotent.
pub fn enrich_with_critical_points(
    model: &GeodesicSpaceModel,
    sample: &SampleSet,
    circles: &[CriticalCircleFeature],
) -> Result<SampleSet> {
    if sample.model.model_id() != model.model_id() {
        return Err(Error::Domain("sample belongs to a different model".into()));
    }
    let catalogue = model.critical_circles().unwrap_or_default();
    let mut out = sample.clone();
    for c in circles {
        if !catalogue.iter().any(|k| k.label == c.label && k.length == c.length) {
            return Err(Error::Domain(format!(
                "circle {} does not belong to {}",
                c.label,
                model.model_id()
            )));
        }
        for m in 0..3 {
            let p = c.point_at(model, m as f64 * c.length / 3.0);
            push_dedup(model, &mut out.points, p)?;
        }
        if !out.enriched_circles.contains(&c.label) {
            out.enriched_circles.push(c.label.clone());
        }
    }
    Ok(out)
}

/// The restricted metric as a full matrix.
pub fn restrict_metric(model: &GeodesicSpaceModel, sample: &SampleSet) -> Result<DistanceMatrix> {
    if sample.is_empty() {
        return Err(Error::Argument("sample must be nonempty".into()));
    }
    if sample.model.model_id() != model.model_id() {
        return Err(Error::Domain("sample belongs to a different model".into()));
    }
    let n = sample.points.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| model.distance(&sample.points[i], &sample.points[j]).unwrap())
                .collect()
        })
        .collect();
    let mut entries = Vec::with_capacity(n * n);
    for row in rows {
        entries.extend(row);
    }
    Ok(DistanceMatrix { n, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle() -> GeodesicSpaceModel {
        GeodesicSpaceModel::circle(1.0).unwrap()
    }

    #[test]
    fn uniform_circle_spacing() {
        let m = circle();
        let s = sample_uniform(&m, 0.26, 0, false).unwrap();
        let mut pos: Vec<f64> = s
            .points
            .iter()
            .map(|p| match p {
                SpacePoint::Circle { pos } => *pos,
                _ => unreachable!(),
            })
            .collect();
        pos.sort_by(f64::total_cmp);
        assert_eq!(pos, vec![0.0, 0.25, 0.5, 0.75]);

        let coarse = sample_uniform(&m, 0.6, 0, false).unwrap();
        assert_eq!(coarse.len(), 2);
        let cert = verify_density(&m, &coarse, 0.6, 0.01).unwrap();
        assert!(cert.verdict);
        assert!((cert.max_gap_found - 0.25).abs() < 0.02);
    }

    #[test]
    fn density_larger_than_diameter_is_fine() {
        let m = circle();
        let s = sample_uniform(&m, 2.0, 0, false).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.points[0], m.basepoint());
        let cert = verify_density(&m, &s, 2.0, 0.05).unwrap();
        assert!(cert.verdict);
    }

    #[test]
    fn wedge_uniform_point_count() {
        let m = GeodesicSpaceModel::wedge(vec![1.0, 2.0]).unwrap();
        let s = sample_uniform(&m, 0.1, 0, false).unwrap();
        assert!(s.len() >= 31, "got {}", s.len());
        let cert = verify_density(&m, &s, 0.1, 0.001).unwrap();
        assert!(cert.verdict);
    }

    #[test]
    fn uniform_always_passes_its_own_certificate() {
        let models = [
            GeodesicSpaceModel::circle(1.0).unwrap(),
            GeodesicSpaceModel::wedge(vec![1.0, 2.0]).unwrap(),
            GeodesicSpaceModel::flat_torus(1.0, 1.0).unwrap(),
            GeodesicSpaceModel::metric_graph(3, vec![(0, 1, 1.0), (1, 2, 0.8), (2, 0, 0.6)], (0, 0.0))
                .unwrap(),
        ];
        for m in &models {
            for (seed, jitter) in [(1u64, false), (2, true), (3, true)] {
                let s = sample_uniform(m, 0.21, seed, jitter).unwrap();
                let cert = verify_density(m, &s, 0.21, 0.21 / 20.0).unwrap();
                assert!(cert.verdict, "{} seed {seed}: gap {}", m.model_id(), cert.max_gap_found);
            }
        }
    }

    #[test]
    fn verify_density_examples() {
        let m = circle();
        let two = SampleSet {
            model: m.clone(),
            points: vec![SpacePoint::Circle { pos: 0.0 }, SpacePoint::Circle { pos: 0.5 }],
            claimed_density: 0.3,
            seed: 0,
            enriched_circles: vec![],
        };
        let cert = verify_density(&m, &two, 0.3, 0.01).unwrap();
        assert!(cert.verdict, "worst probe sits at gap 0.25 < 0.3");
        assert!((cert.max_gap_found - 0.25).abs() < 0.02);

        let one = SampleSet { points: vec![SpacePoint::Circle { pos: 0.0 }], ..two.clone() };
        let cert = verify_density(&m, &one, 0.3, 0.01).unwrap();
        assert!(!cert.verdict);
        assert!((cert.max_gap_found - 0.5).abs() < 0.02);
    }

    #[test]
    fn torus_grid_density_gap_measurement() {
        // 10x10 grid on the unit torus: true worst gap is half the cell
        // diagonal ~ 0.0707, below s = 0.08
        let m = GeodesicSpaceModel::flat_torus(1.0, 1.0).unwrap();
        let mut points = vec![m.basepoint()];
        for i in 0..10 {
            for j in 0..10 {
                let p = SpacePoint::Torus { u: i as f64 / 10.0, v: j as f64 / 10.0 };
                push_dedup(&m, &mut points, p).unwrap();
            }
        }
        let s = SampleSet {
            model: m.clone(),
            points,
            claimed_density: 0.08,
            seed: 0,
            enriched_circles: vec![],
        };
        let cert = verify_density(&m, &s, 0.08, 0.008).unwrap();
        assert!(cert.verdict, "measured gap {}", cert.max_gap_found);
        assert!(
            cert.max_gap_found > 0.06 && cert.max_gap_found <= 0.0708,
            "measured gap {}",
            cert.max_gap_found
        );
    }

    #[test]
    fn enrichment_adds_exact_thirds_and_is_idempotent() {
        let m = circle();
        let base = SampleSet {
            model: m.clone(),
            points: vec![m.basepoint()],
            claimed_density: 0.5,
            seed: 0,
            enriched_circles: vec![],
        };
        let circles = m.critical_circles().unwrap();
        let enriched = enrich_with_critical_points(&m, &base, &circles).unwrap();
        assert_eq!(enriched.len(), 3);
        let dm = restrict_metric(&m, &enriched).unwrap();
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert!((dm.get(i, j) - 1.0 / 3.0).abs() < 1e-12);
            }
        }
        let again = enrich_with_critical_points(&m, &enriched, &circles).unwrap();
        assert_eq!(again.len(), enriched.len());
        assert_eq!(again.enriched_circles, vec!["circle".to_string()]);
    }

    #[test]
    fn enrichment_on_wedge_dedupes_wedge_point() {
        let m = GeodesicSpaceModel::wedge(vec![1.0, 2.0]).unwrap();
        let base = SampleSet {
            model: m.clone(),
            points: vec![m.basepoint()],
            claimed_density: 0.5,
            seed: 0,
            enriched_circles: vec![],
        };
        let circles = m.critical_circles().unwrap();
        let enriched = enrich_with_critical_points(&m, &base, &circles).unwrap();
        // 3 per petal minus the shared wedge point counted once
        assert_eq!(enriched.len(), 5);
        assert!(enriched.points.len() > base.points.len());
    }

    #[test]
    fn enrichment_rejects_foreign_circles() {
        let m = circle();
        let other = GeodesicSpaceModel::wedge(vec![3.0]).unwrap();
        let base = sample_uniform(&m, 0.3, 0, false).unwrap();
        let foreign = other.critical_circles().unwrap();
        assert!(enrich_with_critical_points(&m, &base, &foreign).is_err());
    }

    #[test]
    fn restricted_metric_examples() {
        let m = circle();
        let single = SampleSet {
            model: m.clone(),
            points: vec![m.basepoint()],
            claimed_density: 1.0,
            seed: 0,
            enriched_circles: vec![],
        };
        let dm = restrict_metric(&m, &single).unwrap();
        assert_eq!(dm.n(), 1);
        assert_eq!(dm.get(0, 0), 0.0);

        // cross-petal distances decompose through the wedge point
        let w = GeodesicSpaceModel::wedge(vec![1.0, 2.0]).unwrap();
        let s = SampleSet {
            model: w.clone(),
            points: vec![
                w.basepoint(),
                SpacePoint::Wedge { circle: 0, pos: 0.2 },
                SpacePoint::Wedge { circle: 1, pos: 0.3 },
            ],
            claimed_density: 1.0,
            seed: 0,
            enriched_circles: vec![],
        };
        let dm = restrict_metric(&w, &s).unwrap();
        assert!((dm.get(1, 2) - 0.5).abs() < 1e-15);
        dm.validate().unwrap();
    }

    #[test]
    fn csv_has_17_significant_digits() {
        let dm = DistanceMatrix::from_fn(2, |i, j| if i == j { 0.0 } else { 1.0 / 3.0 });
        let csv = dm.to_csv();
        assert!(csv.contains("3.3333333333333331e-1"), "{csv}");
    }

    #[test]
    fn sample_json_round_trip() {
        let m = circle();
        let s = sample_uniform(&m, 0.26, 7, true).unwrap();
        let back = SampleSet::from_json(&s.to_json()).unwrap();
        assert_eq!(back.points.len(), s.points.len());
        assert_eq!(back.seed, s.seed);
    }
}
