//! Verifiers for the intrinsic stability guarantees, the partial order on
//! initially constant surjective persistences, and the sampling-minimality
//! property, against known model diagrams.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homology::{bottleneck, persist_h1, DecoratedDiagram, FieldP, H1Engine};
use crate::loops::{fill, homology_class_of_loop, RLoop};
use crate::rips::build_filtration;
use crate::sampling::{restrict_metric, verify_density, SampleSet};
use crate::spaces::GeodesicSpaceModel;

/// Slack for the stability inequality checks.
const TOL: f64 = 1e-12;

/// Outcome of checking the three stability conditions for one sample
/// diagram against the model diagram.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    pub s: f64,
    /// `(model interval index, sample interval index)` pairs.
    pub matched: Vec<(usize, usize)>,
    /// Sample intervals matched to the diagonal.
    pub diagonal: Vec<usize>,
    pub violations: Vec<String>,
    pub verdict: bool,
    /// Condition 1: every sample bar is born by 2s.
    pub births_ok: bool,
    /// Condition 2: matched deaths lie in [d, d + 2s].
    pub deaths_ok: bool,
    /// Condition 3: diagonal bars have lifespan at most s.
    pub diagonal_ok: bool,
    pub max_sample_birth: f64,
    /// `death_S - death_X` per matched pair, in `matched` order.
    pub death_offsets: Vec<f64>,
    pub max_spurious_lifespan: f64,
    /// Classical bound for contrast; absent when censored bars block it.
    pub bottleneck_distance: Option<f64>,
}

/// Check the promised 2s-matching: every sample bar is born by `2s`,
/// matched deaths never undershoot and overshoot by at most `2s`, and
/// everything else is diagonal-short.
pub fn verify_stability(
    diag_x: &DecoratedDiagram,
    diag_s: &DecoratedDiagram,
    s: f64,
) -> Result<StabilityReport> {
    if !(s > 0.0) {
        return Err(Error::Argument(format!("density s must be positive, got {s}")));
    }
    if diag_x.intervals.iter().any(|iv| iv.birth != 0.0) {
        return Err(Error::Argument(
            "the model diagram must be intrinsic (all births zero)".into(),
        ));
    }
    let feasible = |xi: usize, si: usize| -> bool {
        let (x, y) = (&diag_x.intervals[xi], &diag_s.intervals[si]);
        !y.censored
            && y.birth <= 2.0 * s + TOL
            && y.death >= x.death - TOL
            && y.death <= x.death + 2.0 * s + TOL
    };

    // greedy by descending model death, taking the earliest feasible death
    let mut x_order: Vec<usize> = (0..diag_x.intervals.len()).collect();
    x_order.sort_by(|&a, &b| diag_x.intervals[b].death.total_cmp(&diag_x.intervals[a].death));
    let mut taken = vec![false; diag_s.intervals.len()];
    let mut matched: Vec<(usize, usize)> = Vec::new();
    let mut greedy_ok = true;
    for &xi in &x_order {
        let pick = (0..diag_s.intervals.len())
            .filter(|&si| !taken[si] && feasible(xi, si))
            .min_by(|&a, &b| {
                diag_s.intervals[a]
                    .death
                    .total_cmp(&diag_s.intervals[b].death)
                    .then(diag_s.intervals[a].birth.total_cmp(&diag_s.intervals[b].birth))
            });
        match pick {
            Some(si) => {
                taken[si] = true;
                matched.push((xi, si));
            }
            None => {
                greedy_ok = false;
                break;
            }
        }
    }
    // diagonal leftovers must be short; when the greedy pass cannot finish,
    // fall back to exhaustive assignment before declaring failure
    let diagonal_ok = |taken: &[bool]| -> bool {
        diag_s
            .intervals
            .iter()
            .enumerate()
            .all(|(si, iv)| taken[si] || iv.lifespan() <= s + TOL)
    };
    if !greedy_ok || !diagonal_ok(&taken) {
        if let Some(assignment) = exhaustive_matching(diag_x, diag_s, &feasible, &diagonal_ok) {
            matched = assignment;
            taken = vec![false; diag_s.intervals.len()];
            for &(_, si) in &matched {
                taken[si] = true;
            }
        }
    }

    let mut violations = Vec::new();
    let matched_x: std::collections::HashSet<usize> = matched.iter().map(|&(x, _)| x).collect();
    for (xi, iv) in diag_x.intervals.iter().enumerate() {
        if !matched_x.contains(&xi) {
            violations.push(format!(
                "condition 2: model interval (0, {:.6}] has no sample partner with death in [d, d + 2s] and birth <= 2s",
                iv.death
            ));
        }
    }
    for (si, iv) in diag_s.intervals.iter().enumerate() {
        if iv.censored {
            violations.push(format!(
                "sample interval #{si} is censored at rmax = {}; rebuild with a larger horizon",
                iv.death
            ));
        }
        if iv.birth > 2.0 * s + TOL {
            violations.push(format!(
                "condition 1: sample interval #{si} is born at {} > 2s = {}",
                iv.birth,
                2.0 * s
            ));
        }
    }
    let mut death_offsets = Vec::new();
    for &(xi, si) in &matched {
        let (x, y) = (&diag_x.intervals[xi], &diag_s.intervals[si]);
        death_offsets.push(y.death - x.death);
        if y.death < x.death - TOL {
            violations.push(format!(
                "condition 2: matched death {} undershoots the model death {}",
                y.death, x.death
            ));
        }
        if y.death > x.death + 2.0 * s + TOL {
            violations.push(format!(
                "condition 2: matched death {} exceeds the model death {} by more than 2s",
                y.death, x.death
            ));
        }
    }
    let mut diagonal = Vec::new();
    let mut max_spurious_lifespan = 0.0f64;
    for (si, iv) in diag_s.intervals.iter().enumerate() {
        if !taken[si] {
            diagonal.push(si);
            max_spurious_lifespan = max_spurious_lifespan.max(iv.lifespan());
            if iv.lifespan() > s + TOL {
                violations.push(format!(
                    "condition 3: diagonal interval #{si} has lifespan {} > s = {s}",
                    iv.lifespan()
                ));
            }
        }
    }
    let max_sample_birth =
        diag_s.intervals.iter().map(|iv| iv.birth).fold(0.0f64, f64::max);
    let bottleneck_distance = bottleneck(diag_x, diag_s).ok().map(|(d, _)| d);
    let births_ok = !violations.iter().any(|v| v.contains("condition 1"));
    let deaths_ok = !violations.iter().any(|v| v.contains("condition 2"));
    let diagonal_ok = !violations.iter().any(|v| v.contains("condition 3"));
    Ok(StabilityReport {
        s,
        verdict: violations.is_empty(),
        births_ok,
        deaths_ok,
        diagonal_ok,
        matched,
        diagonal,
        violations,
        max_sample_birth,
        death_offsets,
        max_spurious_lifespan,
        bottleneck_distance,
    })
}

/// Backtracking search over injective model-to-sample assignments.
fn exhaustive_matching(
    diag_x: &DecoratedDiagram,
    diag_s: &DecoratedDiagram,
    feasible: &dyn Fn(usize, usize) -> bool,
    diagonal_ok: &dyn Fn(&[bool]) -> bool,
) -> Option<Vec<(usize, usize)>> {
    fn go(
        xi: usize,
        nx: usize,
        ns: usize,
        feasible: &dyn Fn(usize, usize) -> bool,
        diagonal_ok: &dyn Fn(&[bool]) -> bool,
        taken: &mut Vec<bool>,
        acc: &mut Vec<(usize, usize)>,
    ) -> bool {
        if xi == nx {
            return diagonal_ok(taken);
        }
        for si in 0..ns {
            if !taken[si] && feasible(xi, si) {
                taken[si] = true;
                acc.push((xi, si));
                if go(xi + 1, nx, ns, feasible, diagonal_ok, taken, acc) {
                    return true;
                }
                acc.pop();
                taken[si] = false;
            }
        }
        false
    }
    let mut taken = vec![false; diag_s.intervals.len()];
    let mut acc = Vec::new();
    go(0, diag_x.intervals.len(), diag_s.intervals.len(), feasible, diagonal_ok, &mut taken, &mut acc)
        .then_some(acc)
}

/// One bar of an initially constant surjective persistence, with the class
/// coordinates of its representative inside `G = H1(X; F_p)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IcpInterval {
    pub birth: f64,
    pub death: f64,
    pub coords: Vec<u32>,
}

/// The sample persistence restricted to `r > r0`, identified inside the
/// model homology through winding coordinates of filled representatives.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InitiallyConstantPersistence {
    pub r0: f64,
    /// Constancy horizon: the first death after `r0`.
    pub eps_h: f64,
    pub dim_g: usize,
    pub field: FieldP,
    pub intervals: Vec<IcpInterval>,
}

/// Build the initially constant persistence of a sample: run persistence,
/// map each surviving representative to winding coordinates, and check the
/// classes span `G` right after `r0`.
pub fn build_icp(
    model: &GeodesicSpaceModel,
    sample: &SampleSet,
    field: FieldP,
    r0: f64,
    grid: &[f64],
) -> Result<InitiallyConstantPersistence> {
    let rmax = grid.iter().copied().fold(f64::NAN, f64::max);
    if !(r0 > 0.0) || !(rmax > r0) {
        return Err(Error::Argument(format!(
            "need 0 < r0 < max(grid); got r0 = {r0}, grid max = {rmax}"
        )));
    }
    let dim_g = model.critical_circles()?.len();
    let dm = restrict_metric(model, sample)?;
    let skel = build_filtration(&dm, rmax)?;
    let diagram = persist_h1(&skel, field);
    let mut intervals = Vec::new();
    for iv in &diagram.intervals {
        if iv.death <= r0 + TOL && !iv.censored {
            continue;
        }
        if iv.censored {
            return Err(Error::Argument(format!(
                "interval censored at rmax = {}; extend the grid horizon",
                iv.death
            )));
        }
        if iv.birth > r0 + 1e-9 {
            return Err(Error::NotInitiallyConstant(format!(
                "an interval is born at {} > r0 = {r0}",
                iv.birth
            )));
        }
        let points = iv.representative_loop.iter().map(|&i| sample.points[i]).collect();
        let rloop = RLoop::new(model, points, iv.birth + POINT_SLACK)?;
        let coords = homology_class_of_loop(model, &fill(model, &rloop)?, field)?;
        intervals.push(IcpInterval { birth: iv.birth, death: iv.death, coords });
    }
    intervals.sort_by(|a, b| a.death.total_cmp(&b.death));
    if intervals.len() != dim_g {
        return Err(Error::NotInitiallyConstant(format!(
            "{} classes survive past r0 = {r0}, expected dim G = {dim_g} (sample too sparse?)",
            intervals.len()
        )));
    }
    let mut m: Vec<Vec<u32>> = intervals.iter().map(|iv| iv.coords.clone()).collect();
    if crate::homology::dense_rank(&mut m, field) != dim_g {
        return Err(Error::NotInitiallyConstant(
            "representative classes do not span the model homology".into(),
        ));
    }
    let eps_h = intervals.first().map(|iv| iv.death).unwrap_or(rmax);
    Ok(InitiallyConstantPersistence { r0, eps_h, dim_g, field, intervals })
}

const POINT_SLACK: f64 = 1e-9;

/// Kernel of the bonding map `i_{p,q}` as a list of G-coordinate vectors:
/// the classes alive at `p` and dead by `q`.
fn kernel_span(icp: &InitiallyConstantPersistence, p: f64, q: f64) -> Vec<Vec<u32>> {
    icp.intervals
        .iter()
        .filter(|iv| p <= iv.death && iv.death < q)
        .map(|iv| iv.coords.clone())
        .collect()
}

/// Is `span(sub)` contained in `span(sup)` over F_p?
fn span_contained(sub: &[Vec<u32>], sup: &[Vec<u32>], field: FieldP) -> bool {
    if sub.is_empty() {
        return true;
    }
    let mut base: Vec<Vec<u32>> = sup.to_vec();
    let sup_rank = crate::homology::dense_rank(&mut base, field);
    let mut joint: Vec<Vec<u32>> = sup.to_vec();
    joint.extend(sub.iter().cloned());
    crate::homology::dense_rank(&mut joint, field) == sup_rank
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderVerdict {
    Isomorphic,
    /// `H_A <= H_B` (A's kernels contain B's).
    ALeB,
    /// `H_B <= H_A`.
    BLeA,
    Incomparable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelCheck {
    pub q: f64,
    /// `ker i^A_{p,q}` contained in `ker i^B_{p,q}`.
    pub a_in_b: bool,
    pub b_in_a: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderComparisonResult {
    pub p: f64,
    pub kernel_inclusions: Vec<KernelCheck>,
    /// Sorted-lifespan dominance, the necessary condition of the order.
    pub dominance_a_le_b: bool,
    pub dominance_b_le_a: bool,
    pub verdict: OrderVerdict,
}

/// Decide the order between two initially constant persistences sharing the
/// same `G`, by kernel inclusion at every kernel-changing radius.
pub fn compare_order(
    icp_a: &InitiallyConstantPersistence,
    icp_b: &InitiallyConstantPersistence,
    p: f64,
    grid: &[f64],
) -> Result<OrderComparisonResult> {
    if icp_a.dim_g != icp_b.dim_g || icp_a.field != icp_b.field {
        return Err(Error::Domain(
            "order comparison needs the same model homology and field".into(),
        ));
    }
    if (icp_a.r0 - icp_b.r0).abs() > TOL {
        return Err(Error::Argument("persistences start at different r0".into()));
    }
    let eps = icp_a.eps_h.min(icp_b.eps_h);
    if !(p > icp_a.r0 && p < eps) {
        return Err(Error::Argument(format!(
            "p = {p} must lie in the shared constancy window ({}, {eps})",
            icp_a.r0
        )));
    }
    // kernels change exactly at deaths; probe midpoints plus one point
    // beyond the last death, plus any user-supplied radii
    let mut deaths: Vec<f64> = icp_a
        .intervals
        .iter()
        .chain(icp_b.intervals.iter())
        .map(|iv| iv.death)
        .collect();
    deaths.sort_by(f64::total_cmp);
    deaths.dedup();
    let mut qs: Vec<f64> = Vec::new();
    for w in deaths.windows(2) {
        qs.push((w[0] + w[1]) / 2.0);
    }
    if let Some(&last) = deaths.last() {
        qs.push(last * 1.125 + 0.0625);
    }
    qs.extend(grid.iter().copied());
    qs.retain(|&q| q > p);
    qs.sort_by(f64::total_cmp);
    qs.dedup();

    let field = icp_a.field;
    let mut kernel_inclusions = Vec::new();
    for &q in &qs {
        let ka = kernel_span(icp_a, p, q);
        let kb = kernel_span(icp_b, p, q);
        kernel_inclusions.push(KernelCheck {
            q,
            a_in_b: span_contained(&ka, &kb, field),
            b_in_a: span_contained(&kb, &ka, field),
        });
    }
    let a_le_b = kernel_inclusions.iter().all(|k| k.b_in_a);
    let b_le_a = kernel_inclusions.iter().all(|k| k.a_in_b);

    let lifespans = |icp: &InitiallyConstantPersistence| -> Vec<f64> {
        let mut l: Vec<f64> = icp.intervals.iter().map(|iv| iv.death - icp.r0).collect();
        l.sort_by(|x, y| y.total_cmp(x));
        l
    };
    let (la, lb) = (lifespans(icp_a), lifespans(icp_b));
    let dominance_a_le_b = la.iter().zip(&lb).all(|(a, b)| *a <= *b + TOL);
    let dominance_b_le_a = lb.iter().zip(&la).all(|(b, a)| *b <= *a + TOL);
    // the sorted-dominance implication is a theorem; treat a breach as an
    // internal inconsistency rather than a verdict
    if (a_le_b && !dominance_a_le_b) || (b_le_a && !dominance_b_le_a) {
        return Err(Error::Invalid(
            "kernel order holds but sorted-lifespan dominance fails; inconsistent input".into(),
        ));
    }
    let verdict = match (a_le_b, b_le_a) {
        (true, true) => OrderVerdict::Isomorphic,
        (true, false) => OrderVerdict::ALeB,
        (false, true) => OrderVerdict::BLeA,
        (false, false) => OrderVerdict::Incomparable,
    };
    Ok(OrderComparisonResult {
        p,
        kernel_inclusions,
        dominance_a_le_b,
        dominance_b_le_a,
        verdict,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "outcome")]
pub enum CandidateOutcome {
    /// Not s-dense; excluded from the comparison, not a minimality failure.
    ExcludedByDensity { max_gap: f64 },
    Compared { enriched_le_candidate: bool, deaths_dominate_known: bool },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimalityReport {
    pub pass: bool,
    /// `(expected l/3, measured death)` per catalogue circle.
    pub realization: Vec<(f64, f64)>,
    pub realization_exact: bool,
    pub candidates: Vec<CandidateOutcome>,
}

/// Check that the enriched sample realizes the known deaths exactly and is
/// the minimum among the candidates in the kernel-inclusion order.
pub fn minimality_check(
    model: &GeodesicSpaceModel,
    field: FieldP,
    s: f64,
    candidates: &[SampleSet],
    enriched: &SampleSet,
) -> Result<MinimalityReport> {
    let known = model.known_diagram(field)?;
    let c_min = known
        .intervals
        .first()
        .map(|iv| iv.death)
        .ok_or_else(|| Error::Argument("model has no circles to realize".into()))?;
    if !(s < c_min / 2.0) {
        return Err(Error::Argument(format!(
            "need s < c/2 where c = {c_min} is the smallest critical value; got s = {s}"
        )));
    }
    let r0 = 2.0 * s;
    let d_max = known.intervals.last().map(|iv| iv.death).unwrap();
    let horizon = d_max + 2.0 * s + 0.25 * c_min;
    let grid = [horizon];

    let icp_enriched = build_icp(model, enriched, field, r0, &grid)?;
    let known_deaths = known.deaths_sorted();
    let enriched_deaths: Vec<f64> = {
        let mut d: Vec<f64> = icp_enriched.intervals.iter().map(|iv| iv.death).collect();
        d.sort_by(f64::total_cmp);
        d
    };
    let realization: Vec<(f64, f64)> =
        known_deaths.iter().copied().zip(enriched_deaths.iter().copied()).collect();
    let realization_exact = realization.iter().all(|(want, got)| (want - got).abs() <= TOL);

    let p = r0 + 0.25 * (icp_enriched.eps_h - r0).max(0.0);
    let mut outcomes = Vec::new();
    let mut all_ok = true;
    for cand in candidates {
        let cert = verify_density(model, cand, s, s / 20.0)?;
        if !cert.verdict {
            outcomes.push(CandidateOutcome::ExcludedByDensity { max_gap: cert.max_gap_found });
            continue;
        }
        let icp_cand = build_icp(model, cand, field, r0, &grid)?;
        let p_pair = p.min(r0 + 0.25 * (icp_cand.eps_h - r0).max(0.0));
        let cmp = compare_order(&icp_enriched, &icp_cand, p_pair, &grid)?;
        let enriched_le_candidate =
            matches!(cmp.verdict, OrderVerdict::ALeB | OrderVerdict::Isomorphic);
        let mut cand_deaths: Vec<f64> = icp_cand.intervals.iter().map(|iv| iv.death).collect();
        cand_deaths.sort_by(f64::total_cmp);
        let deaths_dominate_known = known_deaths
            .iter()
            .zip(&cand_deaths)
            .all(|(want, got)| *got >= *want - TOL);
        all_ok &= enriched_le_candidate && deaths_dominate_known;
        outcomes.push(CandidateOutcome::Compared { enriched_le_candidate, deaths_dominate_known });
    }
    Ok(MinimalityReport {
        pass: realization_exact && all_ok,
        realization,
        realization_exact,
        candidates: outcomes,
    })
}

/// Convenience: the sample diagram at horizon `rmax`.
pub fn sample_diagram(
    model: &GeodesicSpaceModel,
    sample: &SampleSet,
    field: FieldP,
    rmax: f64,
) -> Result<DecoratedDiagram> {
    let dm = restrict_metric(model, sample)?;
    let skel = build_filtration(&dm, rmax)?;
    Ok(persist_h1(&skel, field))
}

/// Convenience: an [`H1Engine`] over the sample filtration.
pub fn sample_engine(
    model: &GeodesicSpaceModel,
    sample: &SampleSet,
    field: FieldP,
    rmax: f64,
) -> Result<H1Engine> {
    let dm = restrict_metric(model, sample)?;
    let skel = build_filtration(&dm, rmax)?;
    Ok(H1Engine::new(&skel, field))
}
