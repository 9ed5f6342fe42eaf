//! Wavenumber-domain transform and the closed-form spectrum geometry: the
//! amplitude law and the four elliptic boundary curves of a spherical
//! wavefront clipped by the panel.
//!
//! Directions use the incident convention: the unit vector `kappa` points
//! from a panel point toward the scatterer, `kappa = norm(r_s - p)`, with
//! `kappa_z > 0`. A plane wave incident from `(kx, ky)` therefore has the
//! panel field `exp(+j k_c (kx x + ky y))`, and the transform correlates the
//! response against `exp(-j k_c (kx x + ky y))`.

use std::io::{BufRead, Write};

use ndarray::Array2;
use num_complex::Complex;
use rustfft::{FftNum, FftPlanner};

use crate::conic::Axis;
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, CartesianCoord};
use crate::scalar::{sc, sc_usize, Scalar};

/// Uniform grid over the direction-cosine plane.
///
/// Bin `i` along x maps to `kappa_x = scale * 2 (i - n_kx/2) / n_kx` where
/// `scale = lambda / (2 spacing)`; for half-wavelength spacing the axes span
/// exactly `[-1, 1)` and `kappa = 0` lies on a grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavenumberGrid<T> {
    pub q: usize,
    pub n_kx: usize,
    pub n_ky: usize,
    /// `lambda / (2 spacing)`: half-span of the grid per axis.
    pub scale: T,
}

impl<T: Scalar> WavenumberGrid<T> {
    pub fn new(geometry: &ArrayGeometry<T>, q: usize) -> Result<Self> {
        if q < 1 {
            return Err(Error::InvalidInput("oversampling factor q must be >= 1".into()));
        }
        Ok(Self {
            q,
            n_kx: q * geometry.nx,
            n_ky: q * geometry.ny,
            scale: geometry.wavelength() / (sc::<T>(2.0) * geometry.spacing),
        })
    }

    #[inline]
    pub fn kx_of(&self, i: usize) -> T {
        Self::axis_value(i, self.n_kx, self.scale)
    }

    #[inline]
    pub fn ky_of(&self, j: usize) -> T {
        Self::axis_value(j, self.n_ky, self.scale)
    }

    fn axis_value(i: usize, n: usize, scale: T) -> T {
        let center = (n / 2) as isize;
        let m = i as isize - center;
        scale * sc::<T>(2.0) * T::from_isize(m).unwrap() / sc_usize(n)
    }

    /// Grid spacing along x.
    pub fn step_kx(&self) -> T {
        self.scale * sc::<T>(2.0) / sc_usize(self.n_kx)
    }

    /// Grid spacing along y.
    pub fn step_ky(&self) -> T {
        self.scale * sc::<T>(2.0) / sc_usize(self.n_ky)
    }
}

/// Real nonnegative power over a [`WavenumberGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum<T> {
    pub grid: WavenumberGrid<T>,
    pub power: Array2<T>,
}

impl<T: Scalar> PowerSpectrum<T> {
    pub fn peak(&self) -> T {
        self.power.iter().cloned().fold(T::zero(), T::max)
    }

    pub fn total_power(&self) -> T {
        self.power.iter().cloned().sum()
    }

    /// Bilinearly interpolated power at fractional wavenumber coordinates;
    /// zero outside the grid.
    pub fn sample_power(&self, kx: T, ky: T) -> T {
        let g = &self.grid;
        let fi = kx / g.step_kx() + sc_usize::<T>(g.n_kx / 2);
        let fj = ky / g.step_ky() + sc_usize::<T>(g.n_ky / 2);
        if fi < T::zero() || fj < T::zero() {
            return T::zero();
        }
        let i0 = fi.floor().to_usize().unwrap_or(usize::MAX);
        let j0 = fj.floor().to_usize().unwrap_or(usize::MAX);
        if i0 + 1 >= self.power.nrows() || j0 + 1 >= self.power.ncols() {
            return T::zero();
        }
        let di = fi - fi.floor();
        let dj = fj - fj.floor();
        let p00 = self.power[(i0, j0)];
        let p10 = self.power[(i0 + 1, j0)];
        let p01 = self.power[(i0, j0 + 1)];
        let p11 = self.power[(i0 + 1, j0 + 1)];
        let one = T::one();
        (one - di) * ((one - dj) * p00 + dj * p01) + di * ((one - dj) * p10 + dj * p11)
    }

    /// Power-weighted centroid `(kx, ky)`.
    pub fn power_weighted_centroid(&self) -> [T; 2] {
        let mut wx = T::zero();
        let mut wy = T::zero();
        let mut w = T::zero();
        for ((i, j), &p) in self.power.indexed_iter() {
            wx += p * self.grid.kx_of(i);
            wy += p * self.grid.ky_of(j);
            w += p;
        }
        if w > T::zero() {
            [wx / w, wy / w]
        } else {
            [T::zero(), T::zero()]
        }
    }
}

/// Centered 2-D DFT power spectrum of the response, zero-padded by the
/// oversampling factor `q`. Power is `|F|^2 / (nx ny)`, so the total output
/// power equals `q^2` times the response energy (Parseval).
pub fn spatial_to_wavenumber<T: Scalar + FftNum>(
    response: &crate::channel::ArrayResponse<T>,
    q: usize,
) -> Result<PowerSpectrum<T>> {
    let geo = &response.geometry;
    let grid = WavenumberGrid::new(geo, q)?;
    let (mx, my) = (grid.n_kx, grid.n_ky);

    let mut buf = Array2::from_elem((mx, my), Complex::new(T::zero(), T::zero()));
    for ((i, j), v) in response.values.indexed_iter() {
        buf[(i, j)] = *v;
    }

    let mut planner = FftPlanner::<T>::new();
    let fft_y = planner.plan_fft_forward(my);
    let fft_x = planner.plan_fft_forward(mx);

    // Rows are contiguous in standard layout: one pass over the y axis.
    fft_y.process(buf.as_slice_mut().expect("standard layout"));

    // Columns gathered into scratch.
    let mut col = vec![Complex::new(T::zero(), T::zero()); mx];
    for j in 0..my {
        for i in 0..mx {
            col[i] = buf[(i, j)];
        }
        fft_x.process(&mut col);
        for i in 0..mx {
            buf[(i, j)] = col[i];
        }
    }

    // Shift so kappa = 0 is centered, square magnitudes, normalize.
    let norm = T::one() / sc_usize::<T>(geo.nx * geo.ny);
    let (cx, cy) = (mx / 2, my / 2);
    let mut power = Array2::from_elem((mx, my), T::zero());
    for i in 0..mx {
        let si = (i + mx - cx) % mx;
        for j in 0..my {
            let sj = (j + my - cy) % my;
            power[(i, j)] = buf[(si, sj)].norm_sqr() * norm;
        }
    }

    Ok(PowerSpectrum { grid, power })
}

/// Closed-form spectrum amplitude `(1 - (kx^2 + ky^2))^(-1/2)` inside the
/// visible region.
pub fn theoretical_amplitude<T: Scalar>(kx: T, ky: T) -> Result<T> {
    let rho = kx * kx + ky * ky;
    if rho >= T::one() {
        return Err(Error::EvanescentRegion {
            kx: kx.to_f64().unwrap_or(f64::NAN),
            ky: ky.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok((T::one() - rho).sqrt().recip())
}

/// The four panel edges, indexed the way the boundary curves are numbered:
/// 1 and 3 are the `x = +Lx/2` and `x = -Lx/2` edges (curves governing
/// `kappa_x`), 2 and 4 the `y = +Ly/2` and `y = -Ly/2` edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    XPos,
    YPos,
    XNeg,
    YNeg,
}

impl Boundary {
    pub const ALL: [Boundary; 4] = [Boundary::XPos, Boundary::YPos, Boundary::XNeg, Boundary::YNeg];

    pub fn from_index(j: usize) -> Result<Self> {
        match j {
            1 => Ok(Boundary::XPos),
            2 => Ok(Boundary::YPos),
            3 => Ok(Boundary::XNeg),
            4 => Ok(Boundary::YNeg),
            _ => Err(Error::InvalidInput(format!("boundary index {j} not in 1..=4"))),
        }
    }

    pub fn index(&self) -> usize {
        match self {
            Boundary::XPos => 1,
            Boundary::YPos => 2,
            Boundary::XNeg => 3,
            Boundary::YNeg => 4,
        }
    }

    /// Which wavenumber component the curve coefficient multiplies.
    pub fn governed_axis(&self) -> Axis {
        match self {
            Boundary::XPos | Boundary::XNeg => Axis::X,
            Boundary::YPos | Boundary::YNeg => Axis::Y,
        }
    }
}

/// One elliptic boundary curve `a * kappa_g^2 + kappa_o^2 = 1` restricted to
/// `sign(kappa_g) = sign`, where `kappa_g` is the governed component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCoefficient<T> {
    pub boundary: Boundary,
    /// Ellipse coefficient; `> 1` whenever the scatterer is off the edge
    /// plane.
    pub a: T,
    /// Required sign (+1/-1) of the governed component on the arc.
    pub sign: i8,
}

impl<T: Scalar> BoundaryCoefficient<T> {
    /// Signed residual of the curve equation at `(kx, ky)`.
    pub fn curve_residual(&self, kx: T, ky: T) -> T {
        match self.boundary.governed_axis() {
            Axis::X => self.a * kx * kx + ky * ky - T::one(),
            Axis::Y => self.a * ky * ky + kx * kx - T::one(),
        }
    }

    /// True when the governed component of `(kx, ky)` has the arc's sign.
    pub fn sign_matches(&self, kx: T, ky: T) -> bool {
        let g = match self.boundary.governed_axis() {
            Axis::X => kx,
            Axis::Y => ky,
        };
        if self.sign > 0 {
            g > T::zero()
        } else {
            g < T::zero()
        }
    }

    /// `n` points on the arc, parameterized by the non-governed component
    /// sweeping `(-1, 1)` (endpoints excluded to stay in the visible region).
    pub fn sample_arc(&self, n: usize) -> Vec<[T; 2]> {
        let mut pts = Vec::with_capacity(n);
        let sgn = if self.sign > 0 { T::one() } else { -T::one() };
        for k in 0..n {
            let t = (sc_usize::<T>(k) + sc(0.5)) / sc_usize::<T>(n); // (0, 1)
            let other = sc::<T>(2.0) * t - T::one();
            let g = ((T::one() - other * other) / self.a).sqrt() * sgn;
            match self.boundary.governed_axis() {
                Axis::X => pts.push([g, other]),
                Axis::Y => pts.push([other, g]),
            }
        }
        pts
    }
}

/// Boundary-curve coefficient for one panel edge (closed form).
///
/// For the `x = +Lx/2` edge: `a = ((Lx/2 - r_x)^2 + r_z^2) / (Lx/2 - r_x)^2`
/// with `sign(kappa_x) = sign(r_x - Lx/2)`; the other edges are the mirrored
/// and y-axis analogues.
pub fn boundary_coefficient<T: Scalar>(
    scatterer: &CartesianCoord<T>,
    geometry: &ArrayGeometry<T>,
    boundary: Boundary,
) -> Result<BoundaryCoefficient<T>> {
    if scatterer.z <= T::zero() {
        return Err(Error::OutOfHalfspace {
            z: scatterer.z.to_f64().unwrap_or(f64::NAN),
        });
    }
    let half = sc::<T>(0.5);
    let (edge_offset, coord) = match boundary {
        Boundary::XPos => (geometry.aperture_x() * half, scatterer.x),
        Boundary::XNeg => (geometry.aperture_x() * half, scatterer.x),
        Boundary::YPos => (geometry.aperture_y() * half, scatterer.y),
        Boundary::YNeg => (geometry.aperture_y() * half, scatterer.y),
    };
    // Distance from the scatterer's in-plane coordinate to the edge plane,
    // signed so that `sign(kappa_g) = sign(-denom)` for the positive edges
    // and `sign(+denom)` for the negative ones.
    let (denom, sign) = match boundary {
        Boundary::XPos | Boundary::YPos => {
            let d = edge_offset - coord;
            (d, -sign_of(d))
        }
        Boundary::XNeg | Boundary::YNeg => {
            let d = edge_offset + coord;
            (d, sign_of(d))
        }
    };
    if denom == T::zero() {
        return Err(Error::DegenerateBoundary {
            boundary: boundary.index(),
        });
    }
    let a = (denom * denom + scatterer.z * scatterer.z) / (denom * denom);
    Ok(BoundaryCoefficient { boundary, a, sign })
}

fn sign_of<T: Scalar>(v: T) -> i8 {
    if v >= T::zero() {
        1
    } else {
        -1
    }
}

/// All four boundary curves of a scatterer.
pub fn boundary_coefficients<T: Scalar>(
    scatterer: &CartesianCoord<T>,
    geometry: &ArrayGeometry<T>,
) -> Result<[BoundaryCoefficient<T>; 4]> {
    Ok([
        boundary_coefficient(scatterer, geometry, Boundary::XPos)?,
        boundary_coefficient(scatterer, geometry, Boundary::YPos)?,
        boundary_coefficient(scatterer, geometry, Boundary::XNeg)?,
        boundary_coefficient(scatterer, geometry, Boundary::YNeg)?,
    ])
}

/// Exact ray-panel membership oracle the boundary curves are derived from.
///
/// Casts the ray from the scatterer along `-kappa` (with
/// `kappa_z = sqrt(1 - kx^2 - ky^2) > 0`) down to the panel plane and checks
/// that the hit point lies within the panel rectangle; edge hits count as
/// members.
pub fn support_membership<T: Scalar>(
    scatterer: &CartesianCoord<T>,
    geometry: &ArrayGeometry<T>,
    kx: T,
    ky: T,
) -> Result<bool> {
    if scatterer.z <= T::zero() {
        return Err(Error::OutOfHalfspace {
            z: scatterer.z.to_f64().unwrap_or(f64::NAN),
        });
    }
    let rho = kx * kx + ky * ky;
    if rho >= T::one() {
        return Err(Error::EvanescentRegion {
            kx: kx.to_f64().unwrap_or(f64::NAN),
            ky: ky.to_f64().unwrap_or(f64::NAN),
        });
    }
    let kz = (T::one() - rho).sqrt();
    let t = scatterer.z / kz;
    let px = scatterer.x - t * kx;
    let py = scatterer.y - t * ky;
    let half = sc::<T>(0.5);
    Ok(px.abs() <= geometry.aperture_x() * half && py.abs() <= geometry.aperture_y() * half)
}

/// Writes the plain-text grid dump: header `n_kx n_ky q`, then row-major
/// power values, one grid row per line.
pub fn write_spectrum_text<T: Scalar, W: Write>(spectrum: &PowerSpectrum<T>, mut w: W) -> Result<()> {
    let g = &spectrum.grid;
    writeln!(w, "{} {} {}", g.n_kx, g.n_ky, g.q)?;
    for i in 0..g.n_kx {
        let mut line = String::new();
        for j in 0..g.n_ky {
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&format!("{}", spectrum.power[(i, j)]));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Reads a grid dump written by [`write_spectrum_text`]; the geometry must
/// match the dumped grid dimensions.
pub fn read_spectrum_text<T: Scalar, R: BufRead>(
    mut r: R,
    geometry: &ArrayGeometry<T>,
) -> Result<PowerSpectrum<T>> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let mut it = header.split_whitespace();
    let n_kx: usize = parse_field(it.next(), "n_kx")?;
    let n_ky: usize = parse_field(it.next(), "n_ky")?;
    let q: usize = parse_field(it.next(), "q")?;
    if it.next().is_some() {
        return Err(Error::Parse("trailing fields in spectrum header".into()));
    }
    let grid = WavenumberGrid::new(geometry, q)?;
    if grid.n_kx != n_kx || grid.n_ky != n_ky {
        return Err(Error::Parse(format!(
            "grid {n_kx}x{n_ky} does not match geometry ({}x{} expected)",
            grid.n_kx, grid.n_ky
        )));
    }
    let mut power = Array2::from_elem((n_kx, n_ky), T::zero());
    let mut line = String::new();
    for i in 0..n_kx {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(Error::Parse(format!("unexpected end of file at row {i}")));
        }
        let mut j = 0;
        for tok in line.split_whitespace() {
            if j >= n_ky {
                return Err(Error::Parse(format!("row {i} has more than {n_ky} values")));
            }
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad value '{tok}' at row {i}")))?;
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Parse(format!("power must be finite and >= 0, got {v}")));
            }
            power[(i, j)] = sc(v);
            j += 1;
        }
        if j != n_ky {
            return Err(Error::Parse(format!("row {i} has {j} values, expected {n_ky}")));
        }
    }
    Ok(PowerSpectrum { grid, power })
}

fn parse_field<F: std::str::FromStr>(tok: Option<&str>, name: &str) -> Result<F> {
    tok.ok_or_else(|| Error::Parse(format!("missing header field {name}")))?
        .parse()
        .map_err(|_| Error::Parse(format!("bad header field {name}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{synthesize_response, ArrayResponse, Scene};
    use crate::geometry::{Scatterer, SphericalCoord, SPEED_OF_LIGHT};
    use approx::assert_relative_eq;

    #[test]
    fn grid_axes_span_unit_interval_for_half_wavelength() {
        let geo = ArrayGeometry::half_wavelength(64, 32, 28e9).unwrap();
        let grid = WavenumberGrid::new(&geo, 2).unwrap();
        assert_eq!(grid.n_kx, 128);
        assert_eq!(grid.n_ky, 64);
        assert_relative_eq!(grid.scale, 1.0, max_relative = 1e-12);
        assert_relative_eq!(grid.kx_of(0), -1.0, max_relative = 1e-12);
        assert_eq!(grid.kx_of(64), 0.0);
        assert_relative_eq!(grid.kx_of(127), 1.0 - 2.0 / 128.0, max_relative = 1e-12);
        assert_relative_eq!(grid.step_kx(), 2.0 / 128.0, max_relative = 1e-12);
    }

    #[test]
    fn on_grid_incident_wave_hits_single_bin() {
        // A plane wave incident from kappa_x0 = 2*8/64 = 0.25 has panel field
        // exp(+j k_c kx0 x); it must land in exactly one bin, at +0.25.
        let geo = ArrayGeometry::half_wavelength(64, 64, 28e9).unwrap();
        let k_c = geo.wavenumber();
        let kx0 = 0.25;
        let mut values = ndarray::Array2::from_elem((64, 64), num_complex::Complex::new(0.0, 0.0));
        for ix in 0..64 {
            for iy in 0..64 {
                let p = geo.element_position(ix, iy).unwrap();
                values[(ix, iy)] = num_complex::Complex::from_polar(1.0, k_c * kx0 * p.x);
            }
        }
        let resp = ArrayResponse { values, geometry: geo };
        let spec = spatial_to_wavenumber(&resp, 1).unwrap();

        let mut nonzero = Vec::new();
        let peak = spec.peak();
        for ((i, j), &p) in spec.power.indexed_iter() {
            if p > peak * 1e-18 {
                nonzero.push((i, j));
            }
        }
        assert_eq!(nonzero.len(), 1);
        let (i, j) = nonzero[0];
        assert_relative_eq!(spec.grid.kx_of(i), 0.25, max_relative = 1e-12);
        assert_eq!(spec.grid.ky_of(j), 0.0);

        // The conjugate field (a wave propagating toward +x) lands at -0.25.
        let mut values = resp.values.clone();
        values.mapv_inplace(|v| v.conj());
        let spec = spatial_to_wavenumber(&ArrayResponse { values, geometry: geo }, 1).unwrap();
        let (mut bi, mut bj, mut bp) = (0, 0, 0.0);
        for ((i, j), &p) in spec.power.indexed_iter() {
            if p > bp {
                (bi, bj, bp) = (i, j, p);
            }
        }
        assert_relative_eq!(spec.grid.kx_of(bi), -0.25, max_relative = 1e-12);
        assert_eq!(spec.grid.ky_of(bj), 0.0);
    }

    #[test]
    fn zero_response_gives_zero_spectrum() {
        let geo = ArrayGeometry::half_wavelength(8, 8, 28e9).unwrap();
        let values = ndarray::Array2::from_elem((8, 8), num_complex::Complex::new(0.0, 0.0));
        let spec = spatial_to_wavenumber(&ArrayResponse { values, geometry: geo }, 2).unwrap();
        assert_eq!(spec.total_power(), 0.0);
    }

    #[test]
    fn parseval_up_to_fixed_normalization() {
        let geo = ArrayGeometry::half_wavelength(16, 12, 28e9).unwrap();
        let pos = CartesianCoord::new(0.01, -0.02, 0.2);
        let scene = Scene::noiseless(geo, vec![Scatterer::unit(pos).unwrap()], 1).unwrap();
        let resp = synthesize_response(&scene).unwrap();
        let energy: f64 = resp.values.iter().map(|v| v.norm_sqr()).sum();
        for q in [1usize, 2, 3] {
            let spec = spatial_to_wavenumber(&resp, q).unwrap();
            let total = spec.total_power();
            assert_relative_eq!(total, (q * q) as f64 * energy, max_relative = 1e-10);
        }
    }

    #[test]
    fn far_field_centroid_matches_direction() {
        let geo = ArrayGeometry::half_wavelength(64, 64, 28e9).unwrap();
        let fresnel = geo.fresnel_distance_x();
        let s = SphericalCoord::new(50.0 * fresnel, 30f64.to_radians(), 0.0).unwrap();
        let scene =
            Scene::noiseless(geo, vec![Scatterer::unit(s.to_cartesian()).unwrap()], 0).unwrap();
        let resp = synthesize_response(&scene).unwrap();
        let spec = spatial_to_wavenumber(&resp, 1).unwrap();
        let [cx, cy] = spec.power_weighted_centroid();
        let bin = spec.grid.step_kx();
        assert!((cx - 0.5).abs() < bin, "centroid kx {cx}");
        assert!(cy.abs() < bin, "centroid ky {cy}");
    }

    #[test]
    fn amplitude_law_values() {
        assert_relative_eq!(theoretical_amplitude(0.0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(theoretical_amplitude(0.6, 0.0).unwrap(), 1.25, max_relative = 1e-12);
        assert!(matches!(
            theoretical_amplitude(1.0, 0.0),
            Err(Error::EvanescentRegion { .. })
        ));
    }

    fn panel(lx: f64) -> ArrayGeometry<f64> {
        // 2x2 panel with spacing = Lx gives aperture Lx on both axes.
        ArrayGeometry::new(2, 2, lx, SPEED_OF_LIGHT).unwrap()
    }

    #[test]
    fn boundary_coefficients_worked_examples() {
        let geo = panel(2.0);

        // On-axis scatterer at height 1: a = 2, arc on the negative side.
        let c = boundary_coefficient(&CartesianCoord::new(0.0, 0.0, 1.0), &geo, Boundary::XPos)
            .unwrap();
        assert_relative_eq!(c.a, 2.0, max_relative = 1e-12);
        assert_eq!(c.sign, -1);
        let c3 = boundary_coefficient(&CartesianCoord::new(0.0, 0.0, 1.0), &geo, Boundary::XNeg)
            .unwrap();
        assert_relative_eq!(c3.a, 2.0, max_relative = 1e-12);
        assert_eq!(c3.sign, 1);

        // Off-center scatterer (0.5, 0, 2): a1 = 17, a3 = 25/9.
        let p = CartesianCoord::new(0.5, 0.0, 2.0);
        let c1 = boundary_coefficient(&p, &geo, Boundary::XPos).unwrap();
        assert_relative_eq!(c1.a, 17.0, max_relative = 1e-12);
        assert_eq!(c1.sign, -1);
        let c3 = boundary_coefficient(&p, &geo, Boundary::XNeg).unwrap();
        assert_relative_eq!(c3.a, 25.0 / 9.0, max_relative = 1e-12);
        assert_eq!(c3.sign, 1);

        // Scatterer directly above the +x edge: degenerate.
        assert!(matches!(
            boundary_coefficient(&CartesianCoord::new(1.0, 0.0, 1.0), &geo, Boundary::XPos),
            Err(Error::DegenerateBoundary { boundary: 1 })
        ));
    }

    #[test]
    fn boundary_mirror_symmetry_is_exact() {
        let geo = panel(1.7);
        for (rx, rz) in [(0.3, 0.9), (-0.62, 0.2), (1.4, 2.0)] {
            let a1 = boundary_coefficient(&CartesianCoord::new(rx, 0.0, rz), &geo, Boundary::XPos)
                .unwrap()
                .a;
            let a3 = boundary_coefficient(&CartesianCoord::new(-rx, 0.0, rz), &geo, Boundary::XNeg)
                .unwrap()
                .a;
            assert_eq!(a1, a3);
            let a2 = boundary_coefficient(&CartesianCoord::new(0.0, rx, rz), &geo, Boundary::YPos)
                .unwrap()
                .a;
            let a4 = boundary_coefficient(&CartesianCoord::new(0.0, -rx, rz), &geo, Boundary::YNeg)
                .unwrap()
                .a;
            assert_eq!(a2, a4);
        }
    }

    #[test]
    fn membership_oracle_cases() {
        let geo = panel(2.0);
        let s = CartesianCoord::new(0.0, 0.0, 1.0);
        assert!(support_membership(&s, &geo, 0.0, 0.0).unwrap());
        assert!(!support_membership(&s, &geo, 0.9, 0.0).unwrap());
        assert!(matches!(
            support_membership(&s, &geo, 0.8, 0.6),
            Err(Error::EvanescentRegion { .. })
        ));

        // Worked instance: Lx = 1, kappa = (-1/sqrt(5), 0) lies on the a1 = 5
        // curve and the ray lands exactly on the +x edge at (0.5, 0, 0).
        let geo = panel(1.0);
        let c1 = boundary_coefficient(&s, &geo, Boundary::XPos).unwrap();
        assert_relative_eq!(c1.a, 5.0, max_relative = 1e-12);
        let kx = -1.0 / 5f64.sqrt();
        assert_relative_eq!(c1.curve_residual(kx, 0.0), 0.0, epsilon = 1e-12);
        assert!(support_membership(&s, &geo, kx, 0.0).unwrap());
        // Nudging outward leaves the support.
        assert!(!support_membership(&s, &geo, kx - 1e-9, 0.0).unwrap());
    }

    #[test]
    fn arc_points_map_to_their_edge() {
        // Analytic arc samples must hit the matching panel edge exactly.
        let geo = panel(1.3);
        let s = CartesianCoord::new(0.21, -0.33, 0.8);
        for boundary in Boundary::ALL {
            let c = boundary_coefficient(&s, &geo, boundary).unwrap();
            for [kx, ky] in c.sample_arc(64) {
                let kz = (1.0 - kx * kx - ky * ky).sqrt();
                let t = s.z / kz;
                let px = s.x - t * kx;
                let py = s.y - t * ky;
                let half_l = geo.aperture_x() / 2.0;
                match boundary {
                    Boundary::XPos => assert_relative_eq!(px, half_l, epsilon = 1e-12),
                    Boundary::XNeg => assert_relative_eq!(px, -half_l, epsilon = 1e-12),
                    Boundary::YPos => assert_relative_eq!(py, half_l, epsilon = 1e-12),
                    Boundary::YNeg => assert_relative_eq!(py, -half_l, epsilon = 1e-12),
                }
            }
        }
    }

    #[test]
    fn spectrum_dump_roundtrip() {
        let geo = ArrayGeometry::half_wavelength(4, 3, 28e9).unwrap();
        let grid = WavenumberGrid::new(&geo, 2).unwrap();
        let mut power = Array2::from_elem((grid.n_kx, grid.n_ky), 0.0f64);
        for ((i, j), v) in power.indexed_iter_mut() {
            *v = (i * 31 + j) as f64 * 0.125;
        }
        let spec = PowerSpectrum { grid, power };
        let mut buf = Vec::new();
        write_spectrum_text(&spec, &mut buf).unwrap();
        let back = read_spectrum_text(std::io::BufReader::new(&buf[..]), &geo).unwrap();
        assert_eq!(back, spec);

        // Mismatched geometry is rejected.
        let other = ArrayGeometry::half_wavelength(5, 3, 28e9).unwrap();
        assert!(read_spectrum_text(std::io::BufReader::new(&buf[..]), &other).is_err());
    }
}
