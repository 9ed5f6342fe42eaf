//! Direct least-squares ellipse fitting under the conic constraint
//! `4ac - b^2 = 1`, plus canonicalization to the axis-aligned coefficient
//! used by the boundary curves.
//!
//! The fit solves the generalized eigenproblem `S xi = lambda C xi` with
//! `S = D^T D` built from rows `[x^2, xy, y^2, x, y, 1]` and the constraint
//! matrix `C` encoding `xi^T C xi = 4ac - b^2`. The 6x6 pencil is reduced to
//! its quadratic/linear blocks, which turns the problem into a 3x3
//! eigenproblem whose unique admissible eigenvector (positive constraint
//! value) is the ellipse; the pair is then polished by generalized Rayleigh
//! quotient iteration so noiseless data reproduces coefficients to machine
//! precision.

use crate::error::{Error, Result};
use crate::linalg::{
    eigenvalues3, inverse3, mat3_mul, mat3_transpose, mat3_vec, null_direction3, solve3, vec3_dot,
    vec3_norm, Mat3, Vec3,
};
use crate::scalar::{sc, sc_usize, Scalar};

/// Which wavenumber component a canonical boundary ellipse governs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

/// General-conic coefficients `(a, b, c, d, e, f)` of
/// `a x^2 + b xy + c y^2 + d x + e y + f = 0`, scale-free up to a nonzero
/// multiple. Fit results are normalized to `xi^T C xi = 4ac - b^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicCoefficients<T> {
    pub xi: [T; 6],
}

impl<T: Scalar> ConicCoefficients<T> {
    pub fn new(xi: [T; 6]) -> Result<Self> {
        if xi.iter().all(|v| *v == T::zero()) {
            return Err(Error::InvalidInput("all-zero conic".into()));
        }
        if !xi.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("non-finite conic coefficient".into()));
        }
        Ok(Self { xi })
    }

    /// `4ac - b^2`, positive exactly for ellipses.
    pub fn constraint_value(&self) -> T {
        let [a, b, c, ..] = self.xi;
        sc::<T>(4.0) * a * c - b * b
    }

    pub fn is_ellipse(&self) -> bool {
        self.constraint_value() > T::zero()
    }

    /// Algebraic residual `a x^2 + b xy + c y^2 + d x + e y + f`.
    pub fn evaluate(&self, x: T, y: T) -> T {
        let [a, b, c, d, e, f] = self.xi;
        a * x * x + b * x * y + c * y * y + d * x + e * y + f
    }

    /// Residual divided by the local gradient norm; an approximate geometric
    /// distance to the curve.
    pub fn normalized_residual(&self, x: T, y: T) -> T {
        let [a, b, c, d, e, _] = self.xi;
        let gx = sc::<T>(2.0) * a * x + b * y + d;
        let gy = b * x + sc::<T>(2.0) * c * y + e;
        let g = (gx * gx + gy * gy).sqrt();
        if g > T::zero() {
            self.evaluate(x, y).abs() / g
        } else {
            self.evaluate(x, y).abs()
        }
    }
}

/// Fits an ellipse to `points` by the one-shot constrained least-squares
/// method; needs at least 6 points in general position.
pub fn fit_ellipse_direct<T: Scalar>(points: &[[T; 2]]) -> Result<ConicCoefficients<T>> {
    if points.len() < 6 {
        return Err(Error::InsufficientBoundary(format!(
            "ellipse fit needs >= 6 points, got {}",
            points.len()
        )));
    }

    // Center and scale to zero mean / unit RMS radius for conditioning.
    let n = sc_usize::<T>(points.len());
    let mut mx = T::zero();
    let mut my = T::zero();
    for p in points {
        mx += p[0];
        my += p[1];
    }
    mx /= n;
    my /= n;
    let mut ms = T::zero();
    for p in points {
        let dx = p[0] - mx;
        let dy = p[1] - my;
        ms += dx * dx + dy * dy;
    }
    let rms = (ms / n).sqrt();
    if !(rms > T::zero()) {
        return Err(Error::DegenerateFit("all points coincide".into()));
    }
    let s = T::one() / rms;

    // Scatter blocks of D = [x^2, xy, y^2 | x, y, 1] in normalized coords:
    // s11 = Q^T Q, s12 = Q^T L, s22 = L^T L.
    let mut s11 = [[T::zero(); 3]; 3];
    let mut s12 = [[T::zero(); 3]; 3];
    let mut s22 = [[T::zero(); 3]; 3];
    for p in points {
        let x = (p[0] - mx) * s;
        let y = (p[1] - my) * s;
        let quad = [x * x, x * y, y * y];
        let lin = [x, y, T::one()];
        for i in 0..3 {
            for j in 0..3 {
                s11[i][j] += quad[i] * quad[j];
                s12[i][j] += quad[i] * lin[j];
                s22[i][j] += lin[i] * lin[j];
            }
        }
    }

    let s22_inv = inverse3(&s22).ok_or_else(|| {
        Error::DegenerateFit("linear block singular (collinear or coincident points)".into())
    })?;

    // Reduced quadratic-block matrix R = S11 - S12 S22^-1 S12^T.
    let s12_t = mat3_transpose(&s12);
    let r_mat = sub3(&s11, &mat3_mul(&s12, &mat3_mul(&s22_inv, &s12_t)));

    // Constraint block C1 and its inverse (constant).
    let two = sc::<T>(2.0);
    let c1: Mat3<T> = [
        [T::zero(), T::zero(), two],
        [T::zero(), -T::one(), T::zero()],
        [two, T::zero(), T::zero()],
    ];
    let c1_inv: Mat3<T> = [
        [T::zero(), T::zero(), sc(0.5)],
        [T::zero(), -T::one(), T::zero()],
        [sc(0.5), T::zero(), T::zero()],
    ];

    // Eigen-decompose C1^-1 R; its spectrum is real because R is symmetric
    // positive semidefinite.
    let m = mat3_mul(&c1_inv, &r_mat);
    let eigenvalues = eigenvalues3(&m);

    // Exactly one eigenvector carries a positive constraint value for
    // elliptical data; pick it (smallest such eigenvalue if several appear).
    let scale_ref = frobenius3(&r_mat).max(T::min_positive_value());
    let mut best: Option<(T, Vec3<T>)> = None;
    for &lambda in &eigenvalues {
        if let Some((vec, _)) = refine_pencil_eigenpair(&r_mat, &c1, lambda, scale_ref) {
            let cval = vec3_dot(&vec, &mat3_vec(&c1, &vec));
            if cval > T::zero() && best.as_ref().map_or(true, |(l, _)| lambda < *l) {
                best = Some((lambda, vec));
            }
        }
    }
    let (_, a1) = best.ok_or_else(|| {
        Error::FitFailure("no eigenvector with positive ellipse constraint".into())
    })?;

    // Back-substitute the linear block and undo the normalization.
    let a2 = mat3_vec(&s22_inv, &mat3_vec(&s12_t, &a1));
    let a2 = [-a2[0], -a2[1], -a2[2]];
    let xi_n = [a1[0], a1[1], a1[2], a2[0], a2[1], a2[2]];
    let xi = denormalize_conic(xi_n, mx, my, s);

    // Rescale so xi^T C xi = 4ac - b^2 = 1 exactly.
    let k = sc::<T>(4.0) * xi[0] * xi[2] - xi[1] * xi[1];
    if !(k > T::zero()) {
        return Err(Error::FitFailure(format!(
            "fitted conic is not an ellipse (4ac - b^2 = {k})"
        )));
    }
    let inv = k.sqrt().recip();
    let mut xi = xi.map(|v| v * inv);
    // Fix the overall sign so the quadratic part is positive definite.
    if xi[0] < T::zero() {
        xi = xi.map(|v| -v);
    }
    ConicCoefficients::new(xi)
}

/// Ratio of the canonical axis-aligned form `a_g k_g^2 + k_o^2 = 1`.
///
/// Preconditions: the conic must be nearly centered and axis-aligned
/// (`|b|, |d|, |e| < 0.05 max(|a|, |c|)`); violations signal a
/// mispartitioned boundary upstream. Scale-invariant by construction.
pub fn canonical_axis_ratio<T: Scalar>(conic: &ConicCoefficients<T>, governed: Axis) -> Result<T> {
    let [a, b, c, d, e, _] = conic.xi;
    let m = a.abs().max(c.abs());
    if m == T::zero() {
        return Err(Error::NotAxisAligned("quadratic part vanishes".into()));
    }
    let tol = sc::<T>(0.05) * m;
    if b.abs() >= tol || d.abs() >= tol || e.abs() >= tol {
        return Err(Error::NotAxisAligned(format!(
            "cross/linear terms too large: |b|={}, |d|={}, |e|={} vs 0.05*max(|a|,|c|)={}",
            b.abs(),
            d.abs(),
            e.abs(),
            tol
        )));
    }
    match governed {
        Axis::X => Ok(a / c),
        Axis::Y => Ok(c / a),
    }
}

fn sub3<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][j] - b[i][j];
        }
    }
    out
}

fn frobenius3<T: Scalar>(m: &Mat3<T>) -> T {
    let mut acc = T::zero();
    for row in m {
        for v in row {
            acc += *v * *v;
        }
    }
    acc.sqrt()
}

/// Polishes an eigenpair of the pencil `(R, C1)` by inverse iteration with a
/// Rayleigh-quotient update. Returns `(vector, lambda)`.
fn refine_pencil_eigenpair<T: Scalar>(
    r_mat: &Mat3<T>,
    c1: &Mat3<T>,
    mut lambda: T,
    scale: T,
) -> Option<(Vec3<T>, T)> {
    let shifted = |l: T| -> Mat3<T> {
        let mut m = *r_mat;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = m[i][j] - l * c1[i][j];
            }
        }
        m
    };

    let mut v = null_direction3(&shifted(lambda));
    for _ in 0..3 {
        let rhs = mat3_vec(c1, &v);
        // Tiny diagonal shift keeps the solve well-posed when lambda is
        // exact; the direction converges to the same eigenvector.
        let eps = scale * T::epsilon() * sc(64.0);
        let mut m = shifted(lambda);
        for i in 0..3 {
            m[i][i] += eps;
        }
        let Some(next) = solve3(&m, &rhs) else {
            break;
        };
        let n = vec3_norm(&next);
        if !(n > T::zero()) || !n.is_finite() {
            break;
        }
        v = [next[0] / n, next[1] / n, next[2] / n];
        let denom = vec3_dot(&v, &mat3_vec(c1, &v));
        if denom.abs() > T::zero() {
            lambda = vec3_dot(&v, &mat3_vec(r_mat, &v)) / denom;
        }
    }
    if v.iter().all(|x| x.is_finite()) {
        Some((v, lambda))
    } else {
        None
    }
}

/// Conic transform for `x = s (X - mx)`, `y = s (Y - my)` back to original
/// coordinates.
fn denormalize_conic<T: Scalar>(c: [T; 6], mx: T, my: T, s: T) -> [T; 6] {
    let [a, b, cc, d, e, f] = c;
    let s2 = s * s;
    let two = sc::<T>(2.0);
    [
        a * s2,
        b * s2,
        cc * s2,
        -two * a * s2 * mx - b * s2 * my + d * s,
        -b * s2 * mx - two * cc * s2 * my + e * s,
        a * s2 * mx * mx + b * s2 * mx * my + cc * s2 * my * my - d * s * mx - e * s * my + f,
    ]
}
