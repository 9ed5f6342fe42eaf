//! Coordinate systems, panel geometry and the near-field distance bounds.
//!
//! The panel is a uniform planar array centered at the origin of the `xoy`
//! plane, so its edges sit at `x = +-Lx/2` and `y = +-Ly/2`; scatterers live
//! strictly in the `z > 0` halfspace.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{sc, sc_usize, Scalar};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Spherical position: distance `r > 0`, elevation `theta` in `[0, pi/2)`
/// measured from the `+z` axis, azimuth `phi` in `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalCoord<T> {
    pub r: T,
    pub theta: T,
    pub phi: T,
}

impl<T: Scalar> SphericalCoord<T> {
    /// Validates the invariants and normalizes `phi` into `[0, 2pi)`.
    pub fn new(r: T, theta: T, phi: T) -> Result<Self> {
        if !(r.is_finite() && theta.is_finite() && phi.is_finite()) {
            return Err(Error::InvalidInput("non-finite spherical coordinate".into()));
        }
        if r <= T::zero() {
            return Err(Error::InvalidInput(format!("distance must be positive, got {r}")));
        }
        if theta < T::zero() || theta >= T::FRAC_PI_2() {
            return Err(Error::InvalidInput(format!(
                "elevation must lie in [0, pi/2), got {theta}"
            )));
        }
        let two_pi = T::PI() + T::PI();
        let mut phi = phi % two_pi;
        if phi < T::zero() {
            phi += two_pi;
        }
        Ok(Self { r, theta, phi })
    }

    /// `(r sin(theta) cos(phi), r sin(theta) sin(phi), r cos(theta))`.
    pub fn to_cartesian(&self) -> CartesianCoord<T> {
        let (st, ct) = (self.theta.sin(), self.theta.cos());
        let (sp, cp) = (self.phi.sin(), self.phi.cos());
        CartesianCoord {
            x: self.r * st * cp,
            y: self.r * st * sp,
            z: self.r * ct,
        }
    }
}

/// Cartesian position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CartesianCoord<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> CartesianCoord<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> T {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Inverse of [`SphericalCoord::to_cartesian`] for points in front of the
    /// panel. On-axis points (`x = y = 0`) get `phi = 0` by convention.
    pub fn to_spherical(&self) -> Result<SphericalCoord<T>> {
        let r = self.norm();
        if r <= T::zero() {
            return Err(Error::InvalidInput("zero-norm point has no direction".into()));
        }
        if self.z <= T::zero() {
            return Err(Error::OutOfHalfspace {
                z: self.z.to_f64().unwrap_or(f64::NAN),
            });
        }
        let theta = (self.z / r).min(T::one()).acos();
        let phi = if self.x.abs() == T::zero() && self.y.abs() == T::zero() {
            T::zero()
        } else {
            let two_pi = T::PI() + T::PI();
            let raw = self.y.atan2(self.x);
            let mut p = raw % two_pi;
            if p < T::zero() {
                p += two_pi;
            }
            p
        };
        SphericalCoord::new(r, theta, phi)
    }
}

/// Point scatterer: position in front of the panel plus a complex path gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scatterer<T> {
    pub position: CartesianCoord<T>,
    pub gain: Complex<T>,
}

impl<T: Scalar> Scatterer<T> {
    pub fn new(position: CartesianCoord<T>, gain: Complex<T>) -> Result<Self> {
        if position.z <= T::zero() {
            return Err(Error::OutOfHalfspace {
                z: position.z.to_f64().unwrap_or(f64::NAN),
            });
        }
        if gain.norm_sqr() <= T::zero() {
            return Err(Error::InvalidInput("scatterer gain must be nonzero".into()));
        }
        Ok(Self { position, gain })
    }

    /// Unit-gain scatterer, convenient in tests and synthetic scenes.
    pub fn unit(position: CartesianCoord<T>) -> Result<Self> {
        Self::new(position, Complex::new(T::one(), T::zero()))
    }
}

/// Uniform planar array: `nx x ny` elements with uniform spacing `spacing`
/// (meters) at carrier frequency `carrier_freq` (Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry<T> {
    pub nx: usize,
    pub ny: usize,
    pub spacing: T,
    pub carrier_freq: T,
}

impl<T: Scalar> ArrayGeometry<T> {
    pub fn new(nx: usize, ny: usize, spacing: T, carrier_freq: T) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidInput(format!(
                "array needs at least 2 elements per axis, got {nx}x{ny}"
            )));
        }
        if !(spacing > T::zero()) || !spacing.is_finite() {
            return Err(Error::InvalidInput("element spacing must be positive".into()));
        }
        if !(carrier_freq > T::zero()) || !carrier_freq.is_finite() {
            return Err(Error::InvalidInput("carrier frequency must be positive".into()));
        }
        Ok(Self {
            nx,
            ny,
            spacing,
            carrier_freq,
        })
    }

    /// Half-wavelength spaced panel at the given carrier.
    pub fn half_wavelength(nx: usize, ny: usize, carrier_freq: T) -> Result<Self> {
        let lambda = sc::<T>(SPEED_OF_LIGHT) / carrier_freq;
        Self::new(nx, ny, lambda * sc(0.5), carrier_freq)
    }

    pub fn wavelength(&self) -> T {
        sc::<T>(SPEED_OF_LIGHT) / self.carrier_freq
    }

    /// Carrier wavenumber `k_c = 2 pi / lambda`.
    pub fn wavenumber(&self) -> T {
        (T::PI() + T::PI()) / self.wavelength()
    }

    /// Aperture along x: `(nx - 1) * spacing`.
    pub fn aperture_x(&self) -> T {
        sc_usize::<T>(self.nx - 1) * self.spacing
    }

    /// Aperture along y: `(ny - 1) * spacing`.
    pub fn aperture_y(&self) -> T {
        sc_usize::<T>(self.ny - 1) * self.spacing
    }

    /// Fresnel distance `0.5 * sqrt(D^3 / lambda)` for a per-axis aperture
    /// `D`; below this bound the parabolic phase approximation breaks down.
    pub fn fresnel_distance(&self, axis_aperture: T) -> T {
        let d3 = axis_aperture * axis_aperture * axis_aperture;
        sc::<T>(0.5) * (d3 / self.wavelength()).sqrt()
    }

    /// Fresnel distance for the x-axis aperture.
    pub fn fresnel_distance_x(&self) -> T {
        self.fresnel_distance(self.aperture_x())
    }

    /// Rayleigh (far-field) distance `2 D^2 / lambda`; scenario labeling only.
    pub fn rayleigh_distance(&self, axis_aperture: T) -> T {
        sc::<T>(2.0) * axis_aperture * axis_aperture / self.wavelength()
    }

    /// Position of element `(ix, iy)`; the grid is centered so corner
    /// elements sit exactly at `(+-Lx/2, +-Ly/2, 0)`.
    pub fn element_position(&self, ix: usize, iy: usize) -> Result<CartesianCoord<T>> {
        if ix >= self.nx || iy >= self.ny {
            return Err(Error::IndexOutOfRange {
                ix,
                iy,
                nx: self.nx,
                ny: self.ny,
            });
        }
        let half = sc::<T>(0.5);
        let cx = sc_usize::<T>(self.nx - 1) * half;
        let cy = sc_usize::<T>(self.ny - 1) * half;
        Ok(CartesianCoord {
            x: (sc_usize::<T>(ix) - cx) * self.spacing,
            y: (sc_usize::<T>(iy) - cy) * self.spacing,
            z: T::zero(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn on_axis_direction() {
        let s = SphericalCoord::new(1.0, 0.0, 1.234).unwrap();
        let c = s.to_cartesian();
        assert_relative_eq!(c.x, 0.0, epsilon = 1e-15);
        assert_relative_eq!(c.y, 0.0, epsilon = 1e-15);
        assert_relative_eq!(c.z, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn exact_trig_values() {
        let s = SphericalCoord::new(2.0, 60f64.to_radians(), 90f64.to_radians()).unwrap();
        let c = s.to_cartesian();
        assert_relative_eq!(c.x, 0.0, epsilon = 1e-15);
        assert_relative_eq!(c.y, 1.7320508075688772, max_relative = 1e-12);
        assert_relative_eq!(c.z, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn roundtrip_at_benchmark_point() {
        let s = SphericalCoord::new(15.0, 45f64.to_radians(), 120f64.to_radians()).unwrap();
        let back = s.to_cartesian().to_spherical().unwrap();
        assert_relative_eq!(back.r, s.r, max_relative = 1e-12);
        assert_relative_eq!(back.theta, s.theta, max_relative = 1e-12);
        assert_relative_eq!(back.phi, s.phi, max_relative = 1e-12);
    }

    #[test]
    fn cartesian_to_spherical_cases() {
        let s = CartesianCoord::new(0.0, 0.0, 5.0).to_spherical().unwrap();
        assert_eq!(s.phi, 0.0);
        assert_eq!(s.theta, 0.0);
        assert_relative_eq!(s.r, 5.0);

        let s = CartesianCoord::new(1.0, 1.0, 2f64.sqrt()).to_spherical().unwrap();
        assert_relative_eq!(s.r, 2.0, max_relative = 1e-12);
        assert_relative_eq!(s.theta, 45f64.to_radians(), max_relative = 1e-12);
        assert_relative_eq!(s.phi, 45f64.to_radians(), max_relative = 1e-12);

        assert!(matches!(
            CartesianCoord::new(0.0, 0.0, 0.0).to_spherical(),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            CartesianCoord::new(1.0, 0.0, -1.0).to_spherical(),
            Err(Error::OutOfHalfspace { .. })
        ));
    }

    #[test]
    fn fresnel_distance_values() {
        // D = 1 m, lambda = 0.5 m -> 0.5 * sqrt(2)
        let g = ArrayGeometry::new(2, 2, 1.0, SPEED_OF_LIGHT / 0.5).unwrap();
        assert_relative_eq!(g.fresnel_distance(1.0), 0.5 * 2f64.sqrt(), max_relative = 1e-12);

        // 512 elements, half-wavelength at 7 GHz: aperture ~10.94 m, Fresnel
        // just under 90 m.
        let g = ArrayGeometry::half_wavelength(512, 512, 7e9).unwrap();
        assert_relative_eq!(g.aperture_x(), 10.9424, max_relative = 1e-4);
        let f = g.fresnel_distance_x();
        assert!((87.0..89.0).contains(&f), "fresnel {f}");

        // Desk scale: 128 elements at 28 GHz.
        let g = ArrayGeometry::half_wavelength(128, 128, 28e9).unwrap();
        assert_relative_eq!(g.aperture_x(), 0.6799, max_relative = 1e-3);
        assert_relative_eq!(g.fresnel_distance_x(), 2.7088, max_relative = 1e-3);
    }

    #[test]
    fn fresnel_monotonicity() {
        let g = ArrayGeometry::new(2, 2, 1.0, SPEED_OF_LIGHT / 0.5).unwrap();
        let mut prev = 0.0;
        for d in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let f = g.fresnel_distance(d);
            assert!(f > prev);
            prev = f;
        }
        let g_short = ArrayGeometry::new(2, 2, 1.0, SPEED_OF_LIGHT / 0.25).unwrap();
        assert!(g_short.fresnel_distance(1.0) > g.fresnel_distance(1.0));
    }

    #[test]
    fn element_positions() {
        let g = ArrayGeometry::new(3, 3, 1.0, 1e9).unwrap();
        let c = g.element_position(1, 1).unwrap();
        assert_eq!((c.x, c.y, c.z), (0.0, 0.0, 0.0));
        let c = g.element_position(2, 0).unwrap();
        assert_eq!((c.x, c.y), (1.0, -1.0));

        let g = ArrayGeometry::new(2, 2, 0.5, 1e9).unwrap();
        let c = g.element_position(0, 0).unwrap();
        assert_eq!((c.x, c.y), (-0.25, -0.25));

        assert!(g.element_position(2, 0).is_err());
    }

    #[test]
    fn corner_positions_hit_half_apertures_exactly() {
        let g = ArrayGeometry::<f64>::half_wavelength(9, 5, 28e9).unwrap();
        let mut max_x: f64 = 0.0;
        let mut max_y: f64 = 0.0;
        for ix in 0..g.nx {
            for iy in 0..g.ny {
                let p = g.element_position(ix, iy).unwrap();
                max_x = max_x.max(p.x.abs());
                max_y = max_y.max(p.y.abs());
            }
        }
        assert_eq!(max_x, g.aperture_x() / 2.0);
        assert_eq!(max_y, g.aperture_y() / 2.0);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(SphericalCoord::new(0.0, 0.1, 0.0).is_err());
        assert!(SphericalCoord::new(1.0, std::f64::consts::FRAC_PI_2, 0.0).is_err());
        assert!(Scatterer::unit(CartesianCoord::new(0.0, 0.0, -1.0)).is_err());
        assert!(Scatterer::new(
            CartesianCoord::new(0.0, 0.0, 1.0),
            Complex::new(0.0, 0.0)
        )
        .is_err());
        assert!(ArrayGeometry::new(1, 4, 0.1, 1e9).is_err());
    }

    #[test]
    fn phi_normalized_into_range() {
        let s = SphericalCoord::new(1.0f64, 0.3, -1.0).unwrap();
        assert!(s.phi >= 0.0 && s.phi < 2.0 * std::f64::consts::PI);
        assert_relative_eq!(s.phi, 2.0 * std::f64::consts::PI - 1.0, max_relative = 1e-12);
    }

    #[test]
    fn generic_scalar_f32_smoke() {
        let g = ArrayGeometry::<f32>::half_wavelength(16, 16, 28e9).unwrap();
        assert!(g.fresnel_distance_x() > 0.0);
        let s = SphericalCoord::<f32>::new(2.0, 0.5, 1.0).unwrap();
        let back = s.to_cartesian().to_spherical().unwrap();
        assert_relative_eq!(back.r, 2.0, max_relative = 1e-5);
    }
}
