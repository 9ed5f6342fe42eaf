//! Two-dimensional Gaussian mixture clustering with EM, k-means++-style
//! seeding, optional per-point power weights, and silhouette-based selection
//! of the component count.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::sym2_eigen;
use crate::scalar::{sc, sc_usize, Scalar};

/// EM and model-selection knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmmParams<T> {
    /// Hard cap on EM iterations per restart.
    pub max_iter: usize,
    /// Stop when the per-unit-weight log-likelihood gain drops below this,
    /// which keeps the criterion independent of the mask size.
    pub tol: T,
    /// Random restarts per candidate component count; best likelihood wins,
    /// earlier restart on ties.
    pub restarts: usize,
    /// Eigenvalue floor applied to every covariance after each M-step, so a
    /// collapsing component is regularized instead of failing.
    pub cov_floor: T,
    /// Silhouette stand-in assigned to the single-cluster candidate, which
    /// the textbook score leaves undefined.
    pub single_cluster_score: T,
    /// Silhouette point cap; larger masks are deterministically subsampled
    /// before scoring to keep the O(n^2) cost bounded.
    pub silhouette_cap: usize,
}

impl<T: Scalar> Default for GmmParams<T> {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol: sc(1e-7),
            restarts: 5,
            cov_floor: sc(1e-8),
            single_cluster_score: sc(0.5),
            silhouette_cap: 2048,
        }
    }
}

/// A fitted mixture over masked spectrum bins.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel<T> {
    pub s_count: usize,
    /// Mixile weights, nonnegative, summing to one.
    pub weights: Vec<T>,
    pub means: Vec<[T; 2]>,
    /// Symmetric positive-definite 2x2 covariances.
    pub covariances: Vec<[[T; 2]; 2]>,
    /// Hard assignment per input point (argmax responsibility).
    pub labels: Vec<usize>,
    /// Silhouette score of the hard labeling.
    pub silhouette: T,
    pub log_likelihood: T,
    /// Log-likelihood after each EM iteration of the winning restart.
    pub ll_trace: Vec<T>,
}

impl<T: Scalar> ClusterModel<T> {
    /// Standard deviations `(sigma_x, sigma_y)` of component `k`, the square
    /// roots of the covariance diagonal.
    pub fn sigmas(&self, k: usize) -> [T; 2] {
        let c = &self.covariances[k];
        [c[0][0].sqrt(), c[1][1].sqrt()]
    }
}

/// Fits mixtures for every candidate component count and returns the one
/// with the best silhouette score (ties break toward fewer components).
///
/// `weights` makes EM statistics and the silhouette power-weighted; pass
/// `None` for plain occupancy clustering. Fully deterministic given the RNG
/// state.
pub fn gmm_cluster<T: Scalar>(
    points: &[[T; 2]],
    weights: Option<&[T]>,
    s_candidates: std::ops::RangeInclusive<usize>,
    params: &GmmParams<T>,
    rng: &mut ChaCha8Rng,
) -> Result<ClusterModel<T>> {
    let (lo, hi) = (*s_candidates.start(), *s_candidates.end());
    if lo < 1 || hi < lo {
        return Err(Error::InvalidInput(format!(
            "bad candidate range {lo}..={hi}"
        )));
    }
    if points.len() < 2 * hi {
        return Err(Error::InvalidInput(format!(
            "{} points are too few for up to {hi} components",
            points.len()
        )));
    }
    if let Some(w) = weights {
        if w.len() != points.len() {
            return Err(Error::InvalidInput("weights/points length mismatch".into()));
        }
        if w.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidInput("weights must be finite and >= 0".into()));
        }
    }

    // One shared subsample for silhouette scoring across candidates.
    let sil_idx = silhouette_subsample(points.len(), params.silhouette_cap, rng);

    let mut best: Option<ClusterModel<T>> = None;
    for s in lo..=hi {
        let mut model = fit_mixture(points, weights, s, params, rng)?;
        model.silhouette = if s == 1 {
            params.single_cluster_score
        } else {
            scored_silhouette(points, &model.labels, weights, &sil_idx)
        };
        let better = match &best {
            None => true,
            Some(b) => model.silhouette > b.silhouette,
        };
        if better {
            best = Some(model);
        }
    }
    Ok(best.expect("candidate range is nonempty"))
}

/// EM fit for a fixed component count with restarts.
fn fit_mixture<T: Scalar>(
    points: &[[T; 2]],
    weights: Option<&[T]>,
    s: usize,
    params: &GmmParams<T>,
    rng: &mut ChaCha8Rng,
) -> Result<ClusterModel<T>> {
    let mut best: Option<ClusterModel<T>> = None;
    for _ in 0..params.restarts.max(1) {
        let model = fit_once(points, weights, s, params, rng)?;
        let better = match &best {
            None => true,
            Some(b) => model.log_likelihood > b.log_likelihood,
        };
        if better {
            best = Some(model);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn fit_once<T: Scalar>(
    points: &[[T; 2]],
    weights: Option<&[T]>,
    s: usize,
    params: &GmmParams<T>,
    rng: &mut ChaCha8Rng,
) -> Result<ClusterModel<T>> {
    let n = points.len();
    let w_of = |i: usize| weights.map_or(T::one(), |w| w[i]);
    let total_w: T = (0..n).map(w_of).sum();
    if !(total_w > T::zero()) {
        return Err(Error::InvalidInput("total weight is zero".into()));
    }

    // k-means++-style seeding: first mean weight-proportional, the rest
    // proportional to weight times squared distance to the nearest seed.
    let mut means: Vec<[T; 2]> = Vec::with_capacity(s);
    let first = sample_index(n, |i| w_of(i), rng);
    means.push(points[first]);
    let mut d2: Vec<T> = points.iter().map(|p| dist2(p, &means[0])).collect();
    while means.len() < s {
        let next = sample_index(n, |i| w_of(i) * d2[i], rng);
        means.push(points[next]);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(dist2(p, means.last().unwrap()));
        }
    }

    // Isotropic initial covariances at the overall data spread.
    let mut mean_all = [T::zero(); 2];
    for (i, p) in points.iter().enumerate() {
        mean_all[0] += w_of(i) * p[0];
        mean_all[1] += w_of(i) * p[1];
    }
    mean_all[0] /= total_w;
    mean_all[1] /= total_w;
    let mut var_all = T::zero();
    for (i, p) in points.iter().enumerate() {
        var_all += w_of(i) * dist2(p, &mean_all);
    }
    var_all = (var_all / total_w / sc(2.0)).max(params.cov_floor);
    let mut covs = vec![[[var_all, T::zero()], [T::zero(), var_all]]; s];
    let mut pis = vec![T::one() / sc_usize::<T>(s); s];

    let mut resp = vec![T::zero(); n * s];
    let mut logs = vec![T::neg_infinity(); s];
    let mut ll_prev = T::neg_infinity();
    let mut trace = Vec::new();

    for _ in 0..params.max_iter {
        // E-step in the log domain.
        let comp: Vec<GaussParams<T>> = (0..s)
            .map(|k| GaussParams::new(&means[k], &covs[k], pis[k]))
            .collect();
        let mut ll = T::zero();
        for (i, p) in points.iter().enumerate() {
            let mut max_log = T::neg_infinity();
            for (k, c) in comp.iter().enumerate() {
                let l = c.log_weighted_density(p);
                logs[k] = l;
                max_log = max_log.max(l);
            }
            let mut sum = T::zero();
            for l in logs.iter() {
                sum += (*l - max_log).exp();
            }
            let log_norm = max_log + sum.ln();
            ll += w_of(i) * log_norm;
            for (k, l) in logs.iter().enumerate() {
                resp[i * s + k] = (*l - log_norm).exp();
            }
        }
        trace.push(ll);

        // M-step with per-point weights folded into the responsibilities.
        for k in 0..s {
            let mut nk = T::zero();
            let mut mx = T::zero();
            let mut my = T::zero();
            for (i, p) in points.iter().enumerate() {
                let g = w_of(i) * resp[i * s + k];
                nk += g;
                mx += g * p[0];
                my += g * p[1];
            }
            if nk > T::min_positive_value() * sc(1e4) {
                means[k] = [mx / nk, my / nk];
                let mut cxx = T::zero();
                let mut cxy = T::zero();
                let mut cyy = T::zero();
                for (i, p) in points.iter().enumerate() {
                    let g = w_of(i) * resp[i * s + k];
                    let dx = p[0] - means[k][0];
                    let dy = p[1] - means[k][1];
                    cxx += g * dx * dx;
                    cxy += g * dx * dy;
                    cyy += g * dy * dy;
                }
                covs[k] = floor_spd(
                    [[cxx / nk, cxy / nk], [cxy / nk, cyy / nk]],
                    params.cov_floor,
                );
            }
            pis[k] = (nk / total_w).max(T::min_positive_value());
        }

        if ll - ll_prev < params.tol * total_w && ll_prev.is_finite() {
            ll_prev = ll;
            break;
        }
        ll_prev = ll;
    }

    // Hard labels from the final responsibilities.
    let labels: Vec<usize> = (0..n)
        .map(|i| {
            let mut best_k = 0;
            let mut best_r = resp[i * s];
            for k in 1..s {
                if resp[i * s + k] > best_r {
                    best_r = resp[i * s + k];
                    best_k = k;
                }
            }
            best_k
        })
        .collect();

    Ok(ClusterModel {
        s_count: s,
        weights: pis,
        means,
        covariances: covs,
        labels,
        silhouette: T::zero(),
        log_likelihood: ll_prev,
        ll_trace: trace,
    })
}

struct GaussParams<T> {
    mean: [T; 2],
    inv: [[T; 2]; 2],
    log_coeff: T,
}

impl<T: Scalar> GaussParams<T> {
    fn new(mean: &[T; 2], cov: &[[T; 2]; 2], pi: T) -> Self {
        let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
        let inv_det = det.recip();
        let inv = [
            [cov[1][1] * inv_det, -cov[0][1] * inv_det],
            [-cov[1][0] * inv_det, cov[0][0] * inv_det],
        ];
        let two_pi = T::PI() + T::PI();
        let log_coeff = pi.max(T::min_positive_value()).ln()
            - two_pi.ln()
            - sc::<T>(0.5) * det.ln();
        Self {
            mean: *mean,
            inv,
            log_coeff,
        }
    }

    fn log_weighted_density(&self, p: &[T; 2]) -> T {
        let dx = p[0] - self.mean[0];
        let dy = p[1] - self.mean[1];
        let q = dx * (self.inv[0][0] * dx + self.inv[0][1] * dy)
            + dy * (self.inv[1][0] * dx + self.inv[1][1] * dy);
        self.log_coeff - sc::<T>(0.5) * q
    }
}

/// Floors the eigenvalues of a symmetric 2x2 matrix.
fn floor_spd<T: Scalar>(c: [[T; 2]; 2], floor: T) -> [[T; 2]; 2] {
    let (vals, vecs) = sym2_eigen(c[0][0], c[0][1], c[1][1]);
    if vals[1] >= floor {
        return c;
    }
    let l = [vals[0].max(floor), vals[1].max(floor)];
    let [v1, v2] = vecs;
    let mut out = [[T::zero(); 2]; 2];
    for (lambda, v) in [(l[0], v1), (l[1], v2)] {
        out[0][0] += lambda * v[0] * v[0];
        out[0][1] += lambda * v[0] * v[1];
        out[1][1] += lambda * v[1] * v[1];
    }
    out[1][0] = out[0][1];
    out
}

fn dist2<T: Scalar>(a: &[T; 2], b: &[T; 2]) -> T {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Samples an index with probability proportional to `weight(i)`; falls back
/// to uniform when all weights vanish.
fn sample_index<T: Scalar, F: Fn(usize) -> T>(n: usize, weight: F, rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = (0..n).map(|i| weight(i).to_f64().unwrap_or(0.0)).sum();
    if total <= 0.0 {
        return rng.gen_range(0..n);
    }
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for i in 0..n {
        acc += weight(i).to_f64().unwrap_or(0.0);
        if acc >= target {
            return i;
        }
    }
    n - 1
}

/// Deterministic silhouette subsample: identity below the cap, otherwise a
/// partial Fisher-Yates draw of `cap` indices (sorted).
fn silhouette_subsample(n: usize, cap: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if n <= cap || cap == 0 {
        return (0..n).collect();
    }
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..cap {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
    }
    let mut out = idx[..cap].to_vec();
    out.sort_unstable();
    out
}

/// Silhouette over a subsample, guarding against clusters that the subsample
/// misses entirely.
fn scored_silhouette<T: Scalar>(
    points: &[[T; 2]],
    labels: &[usize],
    weights: Option<&[T]>,
    subsample: &[usize],
) -> T {
    let mut idx = subsample.to_vec();
    // Make sure every populated cluster keeps at least one representative.
    let k_max = labels.iter().copied().max().unwrap_or(0);
    for k in 0..=k_max {
        if !idx.iter().any(|&i| labels[i] == k) {
            if let Some(i) = labels.iter().position(|&l| l == k) {
                idx.push(i);
            }
        }
    }
    idx.sort_unstable();
    idx.dedup();
    let sub_pts: Vec<[T; 2]> = idx.iter().map(|&i| points[i]).collect();
    let sub_lab: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
    let sub_w: Option<Vec<T>> = weights.map(|w| idx.iter().map(|&i| w[i]).collect());
    silhouette_score(&sub_pts, &sub_lab, sub_w.as_deref()).unwrap_or_else(|_| -T::one())
}

/// Textbook silhouette score in `[-1, 1]` over hard labels, optionally
/// weighted: cluster-mean distances become weighted means and the overall
/// score a weighted average. Needs at least two populated clusters.
pub fn silhouette_score<T: Scalar>(
    points: &[[T; 2]],
    labels: &[usize],
    weights: Option<&[T]>,
) -> Result<T> {
    let n = points.len();
    if labels.len() != n || n == 0 {
        return Err(Error::InvalidInput("labels/points mismatch".into()));
    }
    let k = labels.iter().copied().max().unwrap() + 1;
    let w_of = |i: usize| weights.map_or(T::one(), |w| w[i]);

    let mut cluster_w = vec![T::zero(); k];
    for i in 0..n {
        cluster_w[labels[i]] += w_of(i);
    }
    if cluster_w.iter().filter(|w| **w > T::zero()).count() < 2 {
        return Err(Error::InvalidInput(
            "silhouette needs at least two populated clusters".into(),
        ));
    }

    let mut acc = T::zero();
    let mut acc_w = T::zero();
    let mut sums = vec![T::zero(); k];
    for i in 0..n {
        for s in sums.iter_mut() {
            *s = T::zero();
        }
        for j in 0..n {
            if i == j {
                continue;
            }
            sums[labels[j]] += w_of(j) * dist2(&points[i], &points[j]).sqrt();
        }
        let own = labels[i];
        let own_w = cluster_w[own] - w_of(i);
        let s_i = if own_w > T::zero() {
            let a = sums[own] / own_w;
            let mut b = T::infinity();
            for c in 0..k {
                if c != own && cluster_w[c] > T::zero() {
                    b = b.min(sums[c] / cluster_w[c]);
                }
            }
            (b - a) / a.max(b)
        } else {
            // Singleton cluster: defined as zero.
            T::zero()
        };
        acc += w_of(i) * s_i;
        acc_w += w_of(i);
    }
    Ok(acc / acc_w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn blob(cx: f64, cy: f64, sigma: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
        let norm = Normal::new(0.0, sigma).unwrap();
        (0..n)
            .map(|_| [cx + norm.sample(rng), cy + norm.sample(rng)])
            .collect()
    }

    #[test]
    fn silhouette_matches_hand_computed_instance() {
        // Two 3-point clusters; expected values computed independently from
        // the textbook definition.
        let pts = [
            [0.0, 0.0],
            [0.0, 1.0],
            [1.0, 0.0],
            [4.0, 0.0],
            [4.0, 1.0],
            [5.0, 0.0],
        ];
        let labels = [0, 0, 0, 1, 1, 1];
        let s = silhouette_score(&pts, &labels, None).unwrap();
        assert_relative_eq!(s, 0.7156198462107238, max_relative = 1e-12);
        // Unit weights must agree with the unweighted score.
        let w = [1.0; 6];
        let sw = silhouette_score(&pts, &labels, Some(&w)).unwrap();
        assert_relative_eq!(s, sw, max_relative = 1e-12);
    }

    #[test]
    fn silhouette_requires_two_clusters_and_stays_bounded() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(silhouette_score(&pts, &[0, 0, 0], None).is_err());
        let s = silhouette_score(&pts, &[0, 1, 0], None).unwrap();
        assert!((-1.0..=1.0).contains(&s));
    }

    #[test]
    fn two_separated_blobs_select_two_components() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sigma = 0.05;
        let mut pts = blob(0.0, 0.0, sigma, 150, &mut rng);
        pts.extend(blob(10.0 * sigma * 10.0, 0.0, sigma, 150, &mut rng));
        let params = GmmParams::default();
        let model = gmm_cluster(&pts, None, 1..=3, &params, &mut rng).unwrap();
        assert_eq!(model.s_count, 2);
        // Means within 0.5 sigma of the blob centers (order-free).
        let mut got: Vec<f64> = model.means.iter().map(|m| m[0]).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((got[0] - 0.0).abs() < 0.5 * sigma, "mean {}", got[0]);
        assert!((got[1] - 5.0).abs() < 0.5 * sigma, "mean {}", got[1]);
    }

    #[test]
    fn single_blob_selects_one_component() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts = blob(1.0, -2.0, 0.3, 300, &mut rng);
        let model = gmm_cluster(&pts, None, 1..=3, &GmmParams::default(), &mut rng).unwrap();
        assert_eq!(model.s_count, 1);
    }

    #[test]
    fn em_log_likelihood_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pts = blob(0.0, 0.0, 0.4, 120, &mut rng);
        pts.extend(blob(3.0, 1.0, 0.6, 140, &mut rng));
        let model = gmm_cluster(&pts, None, 2..=2, &GmmParams::default(), &mut rng).unwrap();
        for w in model.ll_trace.windows(2) {
            assert!(
                w[1] >= w[0] - 1e-9,
                "log-likelihood decreased: {} -> {}",
                w[0],
                w[1]
            );
        }
        assert!(model.ll_trace.len() >= 2);
    }

    #[test]
    fn deterministic_given_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pts = {
            let mut p = blob(0.0, 0.0, 0.2, 100, &mut rng);
            p.extend(blob(4.0, 0.0, 0.2, 100, &mut rng));
            p
        };
        let run = |seed: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            gmm_cluster(&pts, None, 1..=4, &GmmParams::default(), &mut r).unwrap()
        };
        let a = run(9);
        let b = run(9);
        assert_eq!(a, b);
    }

    #[test]
    fn covariance_collapse_is_regularized() {
        // Many duplicated points would collapse a covariance; the floor must
        // keep the fit finite and SPD.
        let mut pts = vec![[1.0f64, 1.0]; 40];
        pts.extend(vec![[2.0, 2.0]; 40]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let model = gmm_cluster(&pts, None, 2..=2, &GmmParams::default(), &mut rng).unwrap();
        for c in &model.covariances {
            let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
            assert!(det > 0.0 && c[0][0] > 0.0 && c[1][1] > 0.0);
            assert!(model.log_likelihood.is_finite());
        }
    }

    #[test]
    fn power_weights_shift_the_mean() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]];
        let w = [1.0, 1.0, 1.0, 100.0];
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let model = gmm_cluster(&pts, Some(&w), 1..=1, &GmmParams::default(), &mut rng).unwrap();
        assert!(model.means[0][0] > 2.5, "weighted mean {}", model.means[0][0]);
    }

    #[test]
    fn rejects_too_few_points() {
        let pts = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(gmm_cluster(&pts, None, 1..=2, &GmmParams::default(), &mut rng).is_err());
    }
}
