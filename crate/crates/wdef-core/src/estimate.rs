//! Scatterer estimators: the ellipse-fitting pipeline over the wavenumber
//! spectrum, plus Gaussian-mixture baselines that map cluster statistics to
//! arrival direction and distance.

use std::fmt;

use rand_chacha::ChaCha8Rng;

use crate::conic::Axis;
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, CartesianCoord, SphericalCoord};
use crate::gmm::{gmm_cluster, GmmParams};
use crate::scalar::{sc, Scalar};
use crate::segment::{
    extract_boundary_points, partition_boundaries, threshold_support, BoundarySets,
};
use crate::spectrum::PowerSpectrum;

/// Estimation method tag; doubles as the CLI/CSV method name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Wdef,
    Gmm,
    PowerWeightedGmm,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Wdef, Method::Gmm, Method::PowerWeightedGmm];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Wdef => "wdef",
            Method::Gmm => "gmm",
            Method::PowerWeightedGmm => "pw-gmm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wdef" => Ok(Method::Wdef),
            "gmm" => Ok(Method::Gmm),
            "pw-gmm" => Ok(Method::PowerWeightedGmm),
            other => Err(Error::InvalidInput(format!(
                "unknown method '{other}' (expected wdef, gmm or pw-gmm)"
            ))),
        }
    }
}

/// How the baseline maps the cluster spread `norm([sigma_x, sigma_y])` to a
/// distance. The angular subtense of the panel shrinks with distance, so the
/// inverse law is the physical default; the linear law is kept for
/// comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMap {
    /// `r = gamma / norm([sigma_x, sigma_y])` (default).
    InverseSpread,
    /// `r = gamma * norm([sigma_x, sigma_y])`.
    LinearSpread,
}

/// Shared estimator knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorParams<T> {
    /// Support threshold in dB below the spectrum peak.
    pub rel_db: T,
    /// Candidate scatterer counts for silhouette selection.
    pub s_candidates: std::ops::RangeInclusive<usize>,
    pub gmm: GmmParams<T>,
    /// Distance law used by the GMM baselines.
    pub distance_map: DistanceMap,
}

impl<T: Scalar> Default for EstimatorParams<T> {
    fn default() -> Self {
        Self {
            rel_db: sc(15.0),
            s_candidates: 1..=4,
            gmm: GmmParams::default(),
            distance_map: DistanceMap::InverseSpread,
        }
    }
}

/// One root of the recovery quadratic with its implied height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootCandidate<T> {
    /// In-plane coordinate (x or y component).
    pub r: T,
    /// Height implied by this root through the low-side coefficient.
    pub r_z: T,
}

/// Roots recovered from one opposite-edge coefficient pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisRecovery<T> {
    pub roots: Vec<RootCandidate<T>>,
    /// True when the coefficients matched and the quadratic degenerated to
    /// the single root 0.
    pub degenerate: bool,
}

/// Inverts an opposite-edge coefficient pair to in-plane coordinate
/// candidates.
///
/// `a_low` is the coefficient of the positive edge's arc (boundary 1 or 2),
/// `a_high` of the mirrored edge (boundary 3 or 4), `aperture` the panel
/// aperture along that axis. With `rho = (a_low - 1)/(a_high - 1)` the two
/// roots of `(1 - rho) r^2 + (1 + rho) L r + (1 - rho) L^2/4 = 0` multiply
/// to `L^2/4`; each carries `r_z = sqrt(a_low - 1) * |L/2 - r|`.
pub fn recover_axis_pair<T: Scalar>(a_low: T, a_high: T, aperture: T) -> Result<AxisRecovery<T>> {
    if !(a_low > T::one()) || !(a_high > T::one()) {
        return Err(Error::InconsistentCoefficients(format!(
            "boundary coefficients must exceed 1, got ({a_low}, {a_high})"
        )));
    }
    if !(aperture > T::zero()) {
        return Err(Error::InvalidInput("aperture must be positive".into()));
    }
    let rho = (a_low - T::one()) / (a_high - T::one());
    let half_l = aperture * sc(0.5);
    let rz_of = |r: T| (a_low - T::one()).sqrt() * (half_l - r).abs();

    if (T::one() - rho).abs() < sc(1e-9) {
        // Symmetric pair: the quadratic degenerates to the single root 0.
        let r = T::zero();
        return Ok(AxisRecovery {
            roots: vec![RootCandidate { r, r_z: rz_of(r) }],
            degenerate: true,
        });
    }

    let alpha = T::one() - rho;
    let beta = T::one() + rho;
    // beta^2 - alpha^2 factors exactly to 4 rho, which avoids cancellation
    // for both rho near 1 and rho large.
    let disc = sc::<T>(4.0) * rho;
    if disc < T::zero() {
        return Err(Error::InconsistentCoefficients(format!(
            "negative discriminant for ({a_low}, {a_high})"
        )));
    }
    // Stable quadratic roots: the large root from the non-cancelling sum,
    // the small one from the product alpha r1 r2 = alpha L^2/4.
    let qq = -(beta + disc.sqrt()) * aperture * sc(0.5);
    let r1 = qq / alpha;
    let r2 = alpha * aperture * aperture * sc(0.25) / qq;
    let (r1, r2) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    Ok(AxisRecovery {
        roots: vec![
            RootCandidate { r: r1, r_z: rz_of(r1) },
            RootCandidate { r: r2, r_z: rz_of(r2) },
        ],
        degenerate: false,
    })
}

/// Cross-pair root choice: indices into the x/y root lists, the winning
/// height gap and the runner-up gap (for tie diagnostics).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootChoice<T> {
    pub ix: usize,
    pub iy: usize,
    pub gap: T,
    pub runner_up_gap: Option<T>,
}

/// Picks the root combination whose implied heights agree best; both roots
/// of each quadratic satisfy their own edge constraints exactly, so only
/// this cross-pair consistency can discriminate them.
pub fn disambiguate_roots<T: Scalar>(x: &AxisRecovery<T>, y: &AxisRecovery<T>) -> RootChoice<T> {
    let mut combos: Vec<(usize, usize, T)> = Vec::with_capacity(x.roots.len() * y.roots.len());
    for (i, rx) in x.roots.iter().enumerate() {
        for (j, ry) in y.roots.iter().enumerate() {
            combos.push((i, j, (rx.r_z - ry.r_z).abs()));
        }
    }
    combos.sort_by(|a, b| {
        a.2.partial_cmp(&b.2)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
            .then(a.1.cmp(&b.1))
    });
    let (ix, iy, gap) = combos[0];
    RootChoice {
        ix,
        iy,
        gap,
        runner_up_gap: combos.get(1).map(|c| c.2),
    }
}

/// Per-scatterer diagnostics carried alongside an ellipse-fitting estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct WdefDiagnostics<T> {
    /// Fitted canonical coefficients for boundaries 1..=4.
    pub boundary_a: [T; 4],
    pub roots_x: Vec<RootCandidate<T>>,
    pub roots_y: Vec<RootCandidate<T>>,
    pub choice: RootChoice<T>,
}

/// One estimated scatterer.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult<T> {
    pub cartesian: CartesianCoord<T>,
    pub spherical: SphericalCoord<T>,
    pub method: Method,
    pub diagnostics: Option<WdefDiagnostics<T>>,
}

/// A cluster the pipeline gave up on, with the stage error.
#[derive(Debug)]
pub struct ClusterFailure {
    pub cluster: usize,
    pub error: Error,
}

/// Estimates plus per-cluster failures; a failing cluster never aborts the
/// others.
#[derive(Debug, Default)]
pub struct EstimateOutcome<T> {
    pub estimates: Vec<EstimationResult<T>>,
    pub failures: Vec<ClusterFailure>,
}

impl<T> EstimateOutcome<T> {
    pub fn n_found(&self) -> usize {
        self.estimates.len()
    }

    pub fn n_failed(&self) -> usize {
        self.failures.len()
    }
}

/// Full ellipse-fitting estimator: threshold, cluster, extract and partition
/// the boundary outline, fit each arc with a constrained ellipse, and invert
/// the coefficient pairs to coordinates. Root signs follow from which arc
/// feeds the low side of each pair; the root pair is disambiguated by
/// cross-pair height agreement and the height estimate averages both pairs.
pub fn wdef_estimate<T: Scalar>(
    spectrum: &PowerSpectrum<T>,
    geometry: &ArrayGeometry<T>,
    params: &EstimatorParams<T>,
    rng: &mut ChaCha8Rng,
) -> Result<EstimateOutcome<T>> {
    let mask = threshold_support(spectrum, params.rel_db)?;
    let points = mask.points();
    let model = gmm_cluster(&points, None, params.s_candidates.clone(), &params.gmm, rng)?;

    let step = spectrum.grid.step_kx().max(spectrum.grid.step_ky());
    let mut outcome = EstimateOutcome::default();
    for cluster in 0..model.s_count {
        let run = || -> Result<EstimationResult<T>> {
            let edge_pts = extract_boundary_points(&mask, cluster, &model.labels)?;
            let mean = model.means[cluster];
            // The mask perimeter rides the leakage skirt outside the true
            // support; pull each outline point back to the half-level
            // crossing of the local knife-edge profile.
            let edge_pts = refine_edge_points(spectrum, mean, &edge_pts, step);
            // Thin supports can underfill the dominance partition; the
            // coefficient fit then seeds from directional extremes instead.
            let sets = partition_boundaries(&edge_pts, mean).ok();
            // The arcs are known to be centered axis-aligned ellipses with a
            // unit semi-axis along the non-governed direction, so each is
            // fitted within that one-parameter family; a free conic fit
            // leaves five directions to be pinned by bin-quantization noise
            // on these short arcs. Corner spillover from the offset rule is
            // reassigned to the nearest curve and the coefficients refitted.
            let a = fit_boundary_coefficients(&edge_pts, mean, sets.as_ref(), step * sc(3.0))?;

            let rx = recover_axis_pair(a[0], a[2], geometry.aperture_x())?;
            let ry = recover_axis_pair(a[1], a[3], geometry.aperture_y())?;
            let choice = disambiguate_roots(&rx, &ry);
            let cx = rx.roots[choice.ix];
            let cy = ry.roots[choice.iy];
            let r_z = (cx.r_z + cy.r_z) * sc(0.5);

            let cartesian = CartesianCoord::new(cx.r, cy.r, r_z);
            let spherical = cartesian.to_spherical()?;
            Ok(EstimationResult {
                cartesian,
                spherical,
                method: Method::Wdef,
                diagnostics: Some(WdefDiagnostics {
                    boundary_a: a,
                    roots_x: rx.roots,
                    roots_y: ry.roots,
                    choice,
                }),
            })
        };
        match run() {
            Ok(est) => outcome.estimates.push(est),
            Err(error) => outcome.failures.push(ClusterFailure { cluster, error }),
        }
    }
    Ok(outcome)
}

/// Gaussian-mixture baseline: arrival direction from the cluster mean,
/// distance from the calibrated spread map. `power_weighted` switches both
/// the mixture statistics and the silhouette to spectrum-power weighting.
pub fn gmm_baseline_estimate<T: Scalar>(
    spectrum: &PowerSpectrum<T>,
    _geometry: &ArrayGeometry<T>,
    gamma: T,
    power_weighted: bool,
    params: &EstimatorParams<T>,
    rng: &mut ChaCha8Rng,
) -> Result<EstimateOutcome<T>> {
    if !(gamma > T::zero()) || !gamma.is_finite() {
        return Err(Error::InvalidInput(format!(
            "gamma must be positive and finite, got {gamma}"
        )));
    }
    let mask = threshold_support(spectrum, params.rel_db)?;
    let points = mask.points();
    let weights: Option<Vec<T>> = power_weighted.then(|| {
        mask.indices()
            .into_iter()
            .map(|(i, j)| spectrum.power[(i, j)])
            .collect()
    });
    let model = gmm_cluster(
        &points,
        weights.as_deref(),
        params.s_candidates.clone(),
        &params.gmm,
        rng,
    )?;

    let method = if power_weighted {
        Method::PowerWeightedGmm
    } else {
        Method::Gmm
    };
    let mut outcome = EstimateOutcome::default();
    for cluster in 0..model.s_count {
        let run = || -> Result<EstimationResult<T>> {
            let [mx, my] = model.means[cluster];
            let norm2 = mx * mx + my * my;
            if norm2 >= T::one() {
                return Err(Error::InvalidDirection {
                    kx: mx.to_f64().unwrap_or(f64::NAN),
                    ky: my.to_f64().unwrap_or(f64::NAN),
                });
            }
            let [sx, sy] = model.sigmas(cluster);
            let spread = (sx * sx + sy * sy).sqrt();
            if !(spread > T::zero()) {
                return Err(Error::InvalidInput("cluster has zero spectral spread".into()));
            }
            let r = match params.distance_map {
                DistanceMap::InverseSpread => gamma / spread,
                DistanceMap::LinearSpread => gamma * spread,
            };
            let uz = (T::one() - norm2).sqrt();
            let cartesian = CartesianCoord::new(r * mx, r * my, r * uz);
            let spherical = cartesian.to_spherical()?;
            Ok(EstimationResult {
                cartesian,
                spherical,
                method,
                diagnostics: None,
            })
        };
        match run() {
            Ok(est) => outcome.estimates.push(est),
            Err(error) => outcome.failures.push(ClusterFailure { cluster, error }),
        }
    }
    Ok(outcome)
}

/// Subpixel edge localization along rays from the cluster mean.
///
/// The support edge is a knife-edge diffraction profile: its amplitude
/// passes through half the unobstructed interior level exactly at the
/// geometric boundary, while the thresholded mask rides the skirt outside
/// it. For every outline point this samples the spectrum amplitude along
/// the outward ray, flattens it by the known interior amplitude law,
/// estimates the interior plateau by a ripple-robust median and moves the
/// point to the outermost half-plateau crossing. Points whose profile gives
/// no usable crossing are kept as-is.
fn refine_edge_points<T: Scalar>(
    spectrum: &PowerSpectrum<T>,
    mean: [T; 2],
    edge_pts: &[[T; 2]],
    step: T,
) -> Vec<[T; 2]> {
    let sample_step = step * sc(0.25);
    let outward_reach = step * sc(6.0);

    edge_pts
        .iter()
        .map(|&p| {
            let dx = p[0] - mean[0];
            let dy = p[1] - mean[1];
            let dist = (dx * dx + dy * dy).sqrt();
            if !(dist > step * sc(4.0)) {
                return p; // too close to the mean for a plateau estimate
            }
            let n = [dx / dist, dy / dist];
            let flat_amp = |t: T| -> T {
                let x = p[0] + n[0] * t;
                let y = p[1] + n[1] * t;
                let rho = x * x + y * y;
                // Divide out the interior amplitude law so the plateau is
                // level; evanescent samples keep a tiny positive factor.
                let kz2 = (T::one() - rho).max(sc(1e-6));
                (spectrum.sample_power(x, y) * kz2).sqrt()
            };

            // Interior plateau: median over a deep window, clearing the edge
            // transition whose width scales with the support size.
            let t_in0 = -dist * sc(0.75);
            let t_in1 = -dist * sc(0.45);
            let mut plateau_samples = Vec::new();
            let mut t = t_in0;
            while t <= t_in1 {
                plateau_samples.push(flat_amp(t));
                t += sample_step;
            }
            if plateau_samples.len() < 5 {
                return p;
            }
            plateau_samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let plateau = plateau_samples[plateau_samples.len() / 2];
            if !(plateau > T::zero()) {
                return p;
            }
            let half = plateau * sc(0.5);

            // Outermost downward half-crossing between the plateau window
            // and a few bins beyond the mask perimeter.
            let mut t = t_in1;
            let mut prev = flat_amp(t);
            let mut crossing: Option<T> = None;
            while t < outward_reach {
                let t_next = t + sample_step;
                let cur = flat_amp(t_next);
                if prev >= half && cur < half {
                    let frac = (prev - half) / (prev - cur);
                    crossing = Some(t + sample_step * frac);
                }
                prev = cur;
                t = t_next;
            }
            match crossing {
                Some(tc) => [p[0] + n[0] * tc, p[1] + n[1] * tc],
                None => p,
            }
        })
        .collect()
}

/// Boundary coefficients from the outline via the canonical curve family.
///
/// Seeds each arc's coefficient from the strongly offset-dominant core of
/// the partition (falling back to directional extremes for thin supports),
/// then alternates residual-driven reassignment of all outline points with
/// coefficient refits. Points beyond `max_dist` of every side-consistent
/// curve, or with two near-tied candidates (corner neighborhoods), are
/// dropped.
fn fit_boundary_coefficients<T: Scalar>(
    edge_pts: &[[T; 2]],
    mean: [T; 2],
    partition: Option<&BoundarySets<T>>,
    max_dist: T,
) -> Result<[T; 4]> {
    let strong = sc::<T>(1.6);
    let mut core: [Vec<[T; 2]>; 4] = Default::default();
    for &p in edge_pts {
        let dx = p[0] - mean[0];
        let dy = p[1] - mean[1];
        let (ax, ay) = (dx.abs(), dy.abs());
        if ax > strong * ay {
            core[if dx < T::zero() { 0 } else { 2 }].push(p);
        } else if ay > strong * ax {
            core[if dy < T::zero() { 1 } else { 3 }].push(p);
        }
    }

    let mut a = [T::zero(); 4];
    for j in 0..4 {
        let partition_set = partition.map(|s| &s.sets[j]);
        a[j] = if core[j].len() >= 6 {
            fit_canonical_coefficient(&core[j], j + 1)?
        } else if let Some(set) = partition_set.filter(|s| s.len() >= 6) {
            fit_canonical_coefficient(set, j + 1)?
        } else {
            seed_coefficient_from_extreme(edge_pts, mean, j + 1)?
        };
    }

    for _ in 0..2 {
        let sets = reassign_outline(edge_pts, mean, &a, max_dist)?;
        for j in 0..4 {
            a[j] = fit_canonical_coefficient(&sets.sets[j], j + 1)?;
        }
    }
    Ok(a)
}

/// Coefficient seed for an arc too thin to dominate any offset band: the
/// outline point most extreme along the arc's offset direction lies
/// mid-arc, where the canonical curve passes through it exactly.
fn seed_coefficient_from_extreme<T: Scalar>(
    edge_pts: &[[T; 2]],
    mean: [T; 2],
    j: usize,
) -> Result<T> {
    let key = |p: &[T; 2]| -> T {
        match j {
            1 => mean[0] - p[0],
            2 => mean[1] - p[1],
            3 => p[0] - mean[0],
            _ => p[1] - mean[1],
        }
    };
    let extreme = edge_pts
        .iter()
        .max_by(|a, b| key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal))
        .ok_or_else(|| Error::InsufficientBoundary("empty outline".into()))?;
    let (g, o) = if j == 1 || j == 3 {
        (extreme[0], extreme[1])
    } else {
        (extreme[1], extreme[0])
    };
    if g == T::zero() {
        return Err(Error::InsufficientBoundary(format!(
            "no directional extreme for boundary {j}"
        )));
    }
    let a = (T::one() - o * o) / (g * g);
    if !(a > T::one()) {
        return Err(Error::InconsistentCoefficients(format!(
            "extreme-point seed for boundary {j} gives a = {a}"
        )));
    }
    Ok(a)
}

/// Reassigns every outline point to the side-consistent curve with the
/// smallest normalized residual.
fn reassign_outline<T: Scalar>(
    edge_pts: &[[T; 2]],
    mean: [T; 2],
    a: &[T; 4],
    max_dist: T,
) -> Result<BoundarySets<T>> {
    let mut sets = BoundarySets::default();
    for &p in edge_pts {
        let dx = p[0] - mean[0];
        let dy = p[1] - mean[1];
        let mut candidates: Vec<(usize, T)> = Vec::with_capacity(2);
        if dx < T::zero() {
            candidates.push((1, canonical_distance(a[0], p, Axis::X)));
        } else if dx > T::zero() {
            candidates.push((3, canonical_distance(a[2], p, Axis::X)));
        }
        if dy < T::zero() {
            candidates.push((2, canonical_distance(a[1], p, Axis::Y)));
        } else if dy > T::zero() {
            candidates.push((4, canonical_distance(a[3], p, Axis::Y)));
        }
        candidates.sort_by(|l, r| {
            l.1.partial_cmp(&r.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(l.0.cmp(&r.0))
        });
        let Some(&(j, best)) = candidates.first() else {
            continue;
        };
        if best > max_dist {
            continue;
        }
        if let Some(&(_, second)) = candidates.get(1) {
            if second < best * sc(1.5) {
                continue; // corner-ambiguous under both curves
            }
        }
        sets.sets[j - 1].push(p);
    }

    for (k, set) in sets.sets.iter().enumerate() {
        if set.len() < 6 {
            return Err(Error::InsufficientBoundary(format!(
                "refined boundary {} kept {} points",
                k + 1,
                set.len()
            )));
        }
    }
    Ok(sets)
}

/// One-parameter least squares of `a k_g^2 = 1 - k_o^2` over arc points.
fn fit_canonical_coefficient<T: Scalar>(pts: &[[T; 2]], j: usize) -> Result<T> {
    if pts.len() < 6 {
        return Err(Error::InsufficientBoundary(format!(
            "arc {j} core has {} points",
            pts.len()
        )));
    }
    let mut num = T::zero();
    let mut den = T::zero();
    for p in pts {
        let (g, o) = if j == 1 || j == 3 { (p[0], p[1]) } else { (p[1], p[0]) };
        let g2 = g * g;
        num += g2 * (T::one() - o * o);
        den += g2 * g2;
    }
    if !(den > T::zero()) {
        return Err(Error::DegenerateFit(format!("arc {j} has no spread")));
    }
    let a = num / den;
    if !(a > T::one()) {
        return Err(Error::InconsistentCoefficients(format!(
            "arc {j} canonical coefficient {a} <= 1"
        )));
    }
    Ok(a)
}

/// Approximate point-to-curve distance for `a k_g^2 + k_o^2 = 1`.
fn canonical_distance<T: Scalar>(a: T, p: [T; 2], axis: Axis) -> T {
    let (g, o) = match axis {
        Axis::X => (p[0], p[1]),
        Axis::Y => (p[1], p[0]),
    };
    let residual = a * g * g + o * o - T::one();
    let gnorm = sc::<T>(2.0) * ((a * g) * (a * g) + o * o).sqrt();
    if gnorm > T::zero() {
        residual.abs() / gnorm
    } else {
        residual.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn symmetric_pair_gives_single_zero_root() {
        let rec = recover_axis_pair(2.0, 2.0, 2.0).unwrap();
        assert!(rec.degenerate);
        assert_eq!(rec.roots.len(), 1);
        assert_eq!(rec.roots[0].r, 0.0);
        assert_relative_eq!(rec.roots[0].r_z, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn worked_pair_roots_and_heights() {
        // Forward values of the scatterer (0.5, _, 2.0) on a 2 m aperture.
        let rec = recover_axis_pair(17.0, 25.0 / 9.0, 2.0).unwrap();
        let roots: Vec<f64> = rec.roots.iter().map(|c| c.r).collect();
        assert_relative_eq!(roots[0], 0.5, max_relative = 1e-12);
        assert_relative_eq!(roots[1], 2.0, max_relative = 1e-12);
        assert_relative_eq!(rec.roots[0].r_z, 2.0, max_relative = 1e-12);
        assert_relative_eq!(rec.roots[1].r_z, 4.0, max_relative = 1e-12);
        // Root product is L^2/4.
        assert_relative_eq!(roots[0] * roots[1], 1.0, max_relative = 1e-12);
    }

    #[test]
    fn swapped_orientation_mirrors_roots() {
        let rec = recover_axis_pair(25.0 / 9.0, 17.0, 2.0).unwrap();
        let roots: Vec<f64> = rec.roots.iter().map(|c| c.r).collect();
        assert_relative_eq!(roots[0], -2.0, max_relative = 1e-12);
        assert_relative_eq!(roots[1], -0.5, max_relative = 1e-12);
    }

    #[test]
    fn invalid_coefficients_rejected() {
        assert!(matches!(
            recover_axis_pair(1.0, 2.0, 1.0),
            Err(Error::InconsistentCoefficients(_))
        ));
        assert!(matches!(
            recover_axis_pair(2.0, 0.5, 1.0),
            Err(Error::InconsistentCoefficients(_))
        ));
    }

    #[test]
    fn root_product_equals_quarter_aperture_squared() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let a_low = 1.0 + rng.gen::<f64>() * 30.0;
            let a_high = 1.0 + rng.gen::<f64>() * 30.0;
            let l = 0.1 + rng.gen::<f64>() * 10.0;
            let rec = recover_axis_pair(a_low, a_high, l).unwrap();
            if !rec.degenerate {
                let prod = rec.roots[0].r * rec.roots[1].r;
                assert_relative_eq!(prod, l * l / 4.0, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn disambiguation_prefers_matching_heights() {
        let x = AxisRecovery {
            roots: vec![
                RootCandidate { r: 0.5, r_z: 2.0 },
                RootCandidate { r: 2.0, r_z: 4.0 },
            ],
            degenerate: false,
        };
        let y = AxisRecovery {
            roots: vec![RootCandidate { r: 0.0, r_z: 2.0 }],
            degenerate: true,
        };
        let choice = disambiguate_roots(&x, &y);
        assert_eq!((choice.ix, choice.iy), (0, 0));
        assert_eq!(choice.gap, 0.0);
        assert_eq!(choice.runner_up_gap, Some(2.0));
    }
}
