//! Spectrum pre-processing: power thresholding, boundary-bin extraction and
//! partitioning of the closed outline into the four per-edge arcs.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::{sc, Scalar};
use crate::spectrum::{PowerSpectrum, WavenumberGrid};

/// Boolean occupancy mask over a wavenumber grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportMask<T> {
    pub grid: WavenumberGrid<T>,
    pub mask: Array2<bool>,
}

impl<T: Scalar> SupportMask<T> {
    /// Number of masked bins.
    pub fn len(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|m| *m)
    }

    /// Masked bin indices in row-major order; the canonical point order that
    /// cluster label maps refer to.
    pub fn indices(&self) -> Vec<(usize, usize)> {
        self.mask
            .indexed_iter()
            .filter_map(|((i, j), m)| m.then_some((i, j)))
            .collect()
    }

    /// Masked bin centers as `(kappa_x, kappa_y)` points, row-major order.
    pub fn points(&self) -> Vec<[T; 2]> {
        self.indices()
            .into_iter()
            .map(|(i, j)| [self.grid.kx_of(i), self.grid.ky_of(j)])
            .collect()
    }
}

/// Masks bins whose power reaches `peak * 10^(-rel_db / 10)`.
pub fn threshold_support<T: Scalar>(
    spectrum: &PowerSpectrum<T>,
    rel_db: T,
) -> Result<SupportMask<T>> {
    if !(rel_db > T::zero()) {
        return Err(Error::InvalidInput(format!(
            "threshold must be dB below peak (> 0), got {rel_db}"
        )));
    }
    let peak = spectrum.peak();
    if !(peak > T::zero()) {
        return Err(Error::EmptySpectrum);
    }
    let cut = peak * sc::<T>(10.0).powf(-rel_db / sc(10.0));
    let mask = spectrum.power.mapv(|p| p >= cut);
    Ok(SupportMask {
        grid: spectrum.grid,
        mask,
    })
}

/// Morphological boundary of one cluster: masked bins of the cluster whose
/// 4-neighborhood leaves it (other cluster, unmasked bin, or grid edge).
/// Returned as `(kappa_x, kappa_y)` coordinates.
///
/// `labels` assigns a cluster to every masked bin in the mask's row-major
/// point order.
pub fn extract_boundary_points<T: Scalar>(
    mask: &SupportMask<T>,
    cluster: usize,
    labels: &[usize],
) -> Result<Vec<[T; 2]>> {
    let indices = mask.indices();
    if labels.len() != indices.len() {
        return Err(Error::InvalidInput(format!(
            "label map covers {} bins but the mask has {}",
            labels.len(),
            indices.len()
        )));
    }
    let (nx, ny) = mask.mask.dim();
    let mut label_grid = Array2::from_elem((nx, ny), usize::MAX);
    let mut cluster_size = 0usize;
    for (&(i, j), &l) in indices.iter().zip(labels.iter()) {
        label_grid[(i, j)] = l;
        if l == cluster {
            cluster_size += 1;
        }
    }
    if cluster_size < 12 {
        return Err(Error::InsufficientBoundary(format!(
            "cluster {cluster} has {cluster_size} bins, need >= 12"
        )));
    }

    let mut out = Vec::new();
    for &(i, j) in &indices {
        if label_grid[(i, j)] != cluster {
            continue;
        }
        let neighbors = [
            (i.wrapping_sub(1), j),
            (i + 1, j),
            (i, j.wrapping_sub(1)),
            (i, j + 1),
        ];
        let interior = neighbors
            .iter()
            .all(|&(a, b)| a < nx && b < ny && label_grid[(a, b)] == cluster);
        if !interior {
            out.push([mask.grid.kx_of(i), mask.grid.ky_of(j)]);
        }
    }
    Ok(out)
}

/// Per-cluster boundary point sets, one per panel edge, indexed as the
/// boundary curves are numbered (1..=4).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundarySets<T> {
    /// `sets[0]` is B1 (`x = +Lx/2` edge, negative-offset kappa_x arc),
    /// `sets[1]` B2, `sets[2]` B3, `sets[3]` B4.
    pub sets: [Vec<[T; 2]>; 4],
}

impl<T> BoundarySets<T> {
    /// Point set for boundary index `j` in 1..=4.
    pub fn set(&self, j: usize) -> &[[T; 2]] {
        &self.sets[j - 1]
    }
}

/// Assigns each outline point to a boundary arc by its dominant offset from
/// the cluster mean: x-dominant offsets go to B1 (negative) or B3
/// (positive), y-dominant to B2 (negative) or B4 (positive).
/// Corner-ambiguous points with `|dkx| / |dky|` inside `[0.8, 1.25]` are
/// dropped. Every surviving arc must keep at least 6 points.
pub fn partition_boundaries<T: Scalar>(
    edge_points: &[[T; 2]],
    cluster_mean: [T; 2],
) -> Result<BoundarySets<T>> {
    if edge_points.len() < 24 {
        return Err(Error::InsufficientBoundary(format!(
            "{} outline points are too few to partition (need >= 24)",
            edge_points.len()
        )));
    }
    let mut sets = BoundarySets::default();
    for (p, arc) in classify_offsets(edge_points, cluster_mean) {
        if let Some(j) = arc {
            sets.sets[j - 1].push(p);
        }
    }
    for (k, set) in sets.sets.iter().enumerate() {
        if set.len() < 6 {
            return Err(Error::InsufficientBoundary(format!(
                "boundary {} kept {} points, need >= 6",
                k + 1,
                set.len()
            )));
        }
    }
    Ok(sets)
}

/// Offset classification shared by [`partition_boundaries`] and the
/// estimator's refinement stage: `None` marks a dropped corner point.
pub(crate) fn classify_offsets<T: Scalar>(
    edge_points: &[[T; 2]],
    cluster_mean: [T; 2],
) -> impl Iterator<Item = ([T; 2], Option<usize>)> + '_ {
    let lo = sc::<T>(0.8);
    let hi = sc::<T>(1.25);
    edge_points.iter().map(move |&p| {
        let dx = p[0] - cluster_mean[0];
        let dy = p[1] - cluster_mean[1];
        let (ax, ay) = (dx.abs(), dy.abs());
        // |dkx|/|dky| > 1.25 is x-dominant, < 0.8 y-dominant (division-free).
        let arc = if ax > hi * ay {
            Some(if dx < T::zero() { 1 } else { 3 })
        } else if ax < lo * ay {
            Some(if dy < T::zero() { 2 } else { 4 })
        } else {
            None
        };
        (p, arc)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ArrayGeometry;
    use ndarray::Array2;

    fn grid_8x8() -> WavenumberGrid<f64> {
        let geo = ArrayGeometry::half_wavelength(8, 8, 28e9).unwrap();
        WavenumberGrid::new(&geo, 1).unwrap()
    }

    fn spectrum_with(power: Array2<f64>) -> PowerSpectrum<f64> {
        PowerSpectrum {
            grid: grid_8x8(),
            power,
        }
    }

    #[test]
    fn threshold_single_bin() {
        let mut power = Array2::zeros((8, 8));
        power[(3, 4)] = 2.0;
        let mask = threshold_support(&spectrum_with(power), 20.0).unwrap();
        assert_eq!(mask.len(), 1);
        assert_eq!(mask.indices(), vec![(3, 4)]);
    }

    #[test]
    fn threshold_constant_spectrum_keeps_everything() {
        let power = Array2::from_elem((8, 8), 0.7);
        let mask = threshold_support(&spectrum_with(power), 20.0).unwrap();
        assert_eq!(mask.len(), 64);
    }

    #[test]
    fn threshold_monotonicity() {
        let mut power = Array2::zeros((8, 8));
        for ((i, j), v) in power.indexed_iter_mut() {
            *v = ((i * 13 + j * 7) % 23) as f64 / 22.0;
        }
        let spec = spectrum_with(power);
        let tight = threshold_support(&spec, 3.0).unwrap();
        let loose = threshold_support(&spec, 12.0).unwrap();
        for (a, b) in tight.mask.iter().zip(loose.mask.iter()) {
            assert!(!a | b, "tighter mask must be a subset");
        }
    }

    #[test]
    fn threshold_rejects_empty_and_bad_args() {
        let spec = spectrum_with(Array2::zeros((8, 8)));
        assert!(matches!(
            threshold_support(&spec, 10.0),
            Err(Error::EmptySpectrum)
        ));
        let mut power = Array2::zeros((8, 8));
        power[(0, 0)] = 1.0;
        assert!(threshold_support(&spectrum_with(power), 0.0).is_err());
    }

    /// Builds a mask plus single-cluster labels from bin indices.
    fn mask_of(bins: &[(usize, usize)]) -> (SupportMask<f64>, Vec<usize>) {
        let mut mask = Array2::from_elem((8, 8), false);
        for &(i, j) in bins {
            mask[(i, j)] = true;
        }
        let m = SupportMask {
            grid: grid_8x8(),
            mask,
        };
        let n = m.len();
        (m, vec![0; n])
    }

    #[test]
    fn solid_square_boundary_is_its_perimeter() {
        let bins: Vec<(usize, usize)> = (1..6)
            .flat_map(|i| (2..7).map(move |j| (i, j)))
            .collect();
        let (mask, labels) = mask_of(&bins);
        let boundary = extract_boundary_points(&mask, 0, &labels).unwrap();
        assert_eq!(boundary.len(), 16);
        // Interior bin (3, 4) must not be on the boundary.
        let g = &mask.grid;
        assert!(!boundary
            .iter()
            .any(|p| p[0] == g.kx_of(3) && p[1] == g.ky_of(4)));
    }

    #[test]
    fn single_row_is_all_boundary() {
        let bins: Vec<(usize, usize)> = (0..8).map(|j| (4, j)).collect();
        let mut bins = bins;
        bins.extend((0..4).map(|j| (5, j))); // pad to >= 12 bins
        let (mask, labels) = mask_of(&bins);
        let boundary = extract_boundary_points(&mask, 0, &labels).unwrap();
        assert_eq!(boundary.len(), bins.len());
    }

    #[test]
    fn cluster_too_small_is_rejected() {
        let bins: Vec<(usize, usize)> = (0..11).map(|k| (k / 4, k % 4)).collect();
        let (mask, labels) = mask_of(&bins);
        assert!(matches!(
            extract_boundary_points(&mask, 0, &labels),
            Err(Error::InsufficientBoundary(_))
        ));
    }

    #[test]
    fn other_cluster_counts_as_outside() {
        // Two vertical halves of a solid block: the split line must appear
        // in both clusters' boundaries.
        let bins: Vec<(usize, usize)> = (0..8)
            .flat_map(|i| (0..8).map(move |j| (i, j)))
            .collect();
        let (mask, _) = mask_of(&bins);
        let labels: Vec<usize> = mask
            .indices()
            .into_iter()
            .map(|(i, _)| if i < 4 { 0 } else { 1 })
            .collect();
        let b0 = extract_boundary_points(&mask, 0, &labels).unwrap();
        let g = &mask.grid;
        // Row i = 3 borders cluster 1, so all of it is boundary.
        for j in 0..8 {
            assert!(b0
                .iter()
                .any(|p| p[0] == g.kx_of(3) && p[1] == g.ky_of(j)));
        }
    }

    /// Axis-aligned square outline around the origin with `m` points per
    /// open side segment plus the 4 corners.
    fn square_outline(half: f64, m: usize) -> Vec<[f64; 2]> {
        let mut pts = Vec::new();
        for k in 0..m {
            let t = -half + 2.0 * half * (k as f64 + 0.5) / m as f64;
            pts.push([half, t]);
            pts.push([-half, t]);
            pts.push([t, half]);
            pts.push([t, -half]);
        }
        for corner in [
            [half, half],
            [half, -half],
            [-half, half],
            [-half, -half],
        ] {
            pts.push(corner);
        }
        pts
    }

    #[test]
    fn square_outline_partitions_into_four_equal_sets() {
        let pts = square_outline(1.0, 9);
        let sets = partition_boundaries(&pts, [0.0, 0.0]).unwrap();
        // Side points with |t| in [0.8, 1.25]-band relative to the side
        // offset are corner-ambiguous; with m = 9 the band keeps 7 of 9.
        let n = sets.sets[0].len();
        assert!(n >= 6);
        for s in &sets.sets {
            assert_eq!(s.len(), n, "sets must be equal by symmetry");
        }
        // Corners dropped: total kept < total input.
        let kept: usize = sets.sets.iter().map(Vec::len).sum();
        assert!(kept < pts.len());
        // Every point of B1 sits on the x = -1 side, B3 on x = +1.
        assert!(sets.set(1).iter().all(|p| p[0] == -1.0));
        assert!(sets.set(3).iter().all(|p| p[0] == 1.0));
        assert!(sets.set(2).iter().all(|p| p[1] == -1.0));
        assert!(sets.set(4).iter().all(|p| p[1] == 1.0));
    }

    #[test]
    fn partition_completeness_every_kept_point_lands_once() {
        let pts = square_outline(0.7, 11);
        let sets = partition_boundaries(&pts, [0.0, 0.0]).unwrap();
        let dropped = pts.len()
            - sets.sets.iter().map(Vec::len).sum::<usize>();
        // Re-classify and confirm the drop count matches exactly.
        let n_dropped = classify_offsets(&pts, [0.0, 0.0])
            .filter(|(_, a)| a.is_none())
            .count();
        assert_eq!(dropped, n_dropped);
    }

    #[test]
    fn collinear_points_underfill_sets() {
        let pts: Vec<[f64; 2]> = (0..30).map(|k| [k as f64 * 0.1, 0.0]).collect();
        assert!(matches!(
            partition_boundaries(&pts, [1.5, 0.0]),
            Err(Error::InsufficientBoundary(_))
        ));
    }

    #[test]
    fn too_few_points_rejected() {
        let pts = vec![[0.0, 0.0]; 23];
        assert!(partition_boundaries(&pts, [0.0, 0.0]).is_err());
    }
}
