//! Tiny dense linear algebra used by the conic fit and the clustering EM:
//! 3x3 solves/eigenpairs and 2x2 symmetric eigendecompositions.

use crate::scalar::{sc, Scalar};

pub(crate) type Mat3<T> = [[T; 3]; 3];
pub(crate) type Vec3<T> = [T; 3];

pub(crate) fn mat3_vec<T: Scalar>(m: &Mat3<T>, v: &Vec3<T>) -> Vec3<T> {
    let mut out = [T::zero(); 3];
    for (r, row) in m.iter().enumerate() {
        out[r] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
    }
    out
}

pub(crate) fn mat3_mul<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = T::zero();
            for (k, bk) in b.iter().enumerate() {
                acc = acc + a[i][k] * bk[j];
            }
            out[i][j] = acc;
        }
    }
    out
}

pub(crate) fn mat3_transpose<T: Scalar>(a: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

pub(crate) fn vec3_dot<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn vec3_norm<T: Scalar>(a: &Vec3<T>) -> T {
    vec3_dot(a, a).sqrt()
}

pub(crate) fn vec3_cross<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Solves `m x = rhs` by Gaussian elimination with partial pivoting.
/// Returns `None` when the pivot underflows (singular system).
pub(crate) fn solve3<T: Scalar>(m: &Mat3<T>, rhs: &Vec3<T>) -> Option<Vec3<T>> {
    let mut a = *m;
    let mut b = *rhs;
    for col in 0..3 {
        let mut pivot = col;
        for row in col + 1..3 {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < T::min_positive_value() * sc(16.0) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] = a[row][k] - f * a[col][k];
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = [T::zero(); 3];
    for col in (0..3).rev() {
        let mut acc = b[col];
        for k in col + 1..3 {
            acc = acc - a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

pub(crate) fn inverse3<T: Scalar>(m: &Mat3<T>) -> Option<Mat3<T>> {
    let cols = [
        solve3(m, &[T::one(), T::zero(), T::zero()])?,
        solve3(m, &[T::zero(), T::one(), T::zero()])?,
        solve3(m, &[T::zero(), T::zero(), T::one()])?,
    ];
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for (j, col) in cols.iter().enumerate() {
            out[i][j] = col[i];
        }
    }
    Some(out)
}

/// Real roots of `x^3 + p2 x^2 + p1 x + p0 = 0`.
///
/// The caller guarantees the spectrum is real (here: the matrix is similar to
/// a symmetric one); complex pairs arising from rounding are collapsed onto
/// their real part. Roots are Newton-polished.
pub(crate) fn cubic_roots<T: Scalar>(p2: T, p1: T, p0: T) -> Vec<T> {
    let third = T::one() / sc(3.0);
    // Depressed cubic t^3 + p t + q with x = t - p2/3.
    let shift = p2 * third;
    let p = p1 - p2 * p2 * third;
    let q = p0 - p1 * p2 * third + sc::<T>(2.0) * p2 * p2 * p2 * third * third * third;

    let mut roots: Vec<T> = Vec::with_capacity(3);
    let half_q = q * sc(0.5);
    let disc = half_q * half_q + p * p * p / sc(27.0);

    if disc <= T::zero() {
        // Three real roots: trigonometric form.
        let m = sc::<T>(2.0) * (-p * third).max(T::zero()).sqrt();
        if m <= T::zero() {
            roots.push(-shift);
        } else {
            let arg = (sc::<T>(3.0) * q / (p * m)).max(-T::one()).min(T::one());
            let phi = arg.acos() * third;
            for k in 0..3 {
                let angle = phi - sc::<T>(2.0) * T::PI() * sc_k(k) * third;
                roots.push(m * angle.cos() - shift);
            }
        }
    } else {
        // One real root (Cardano); rounding may have pushed a near-double
        // root across disc = 0, so treat the real part as the single root.
        let sq = disc.sqrt();
        let u = cbrt(-half_q + sq);
        let v = cbrt(-half_q - sq);
        roots.push(u + v - shift);
    }

    for r in roots.iter_mut() {
        *r = newton_polish_cubic(*r, p2, p1, p0);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

fn sc_k<T: Scalar>(k: usize) -> T {
    T::from_usize(k).unwrap()
}

fn cbrt<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        x.powf(T::one() / sc(3.0))
    } else {
        -(-x).powf(T::one() / sc(3.0))
    }
}

fn newton_polish_cubic<T: Scalar>(mut x: T, p2: T, p1: T, p0: T) -> T {
    for _ in 0..4 {
        let f = ((x + p2) * x + p1) * x + p0;
        let df = (sc::<T>(3.0) * x + sc::<T>(2.0) * p2) * x + p1;
        if df.abs() < T::min_positive_value() * sc(16.0) {
            break;
        }
        let step = f / df;
        x = x - step;
        if step.abs() <= x.abs() * T::epsilon() {
            break;
        }
    }
    x
}

/// Real eigenvalues of a 3x3 matrix whose spectrum is known to be real.
pub(crate) fn eigenvalues3<T: Scalar>(m: &Mat3<T>) -> Vec<T> {
    let tr = m[0][0] + m[1][1] + m[2][2];
    // Sum of principal 2x2 minors.
    let m2 = m[1][1] * m[2][2] - m[1][2] * m[2][1] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[0][0] * m[1][1]
        - m[0][1] * m[1][0];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    // charpoly: lambda^3 - tr lambda^2 + m2 lambda - det
    cubic_roots(-tr, m2, -det)
}

/// Null-direction of a (near-)singular 3x3 matrix via the largest row cross
/// product; used to seed eigenvector refinement.
pub(crate) fn null_direction3<T: Scalar>(a: &Mat3<T>) -> Vec3<T> {
    let c01 = vec3_cross(&a[0], &a[1]);
    let c02 = vec3_cross(&a[0], &a[2]);
    let c12 = vec3_cross(&a[1], &a[2]);
    let mut best = c01;
    for c in [c02, c12] {
        if vec3_norm(&c) > vec3_norm(&best) {
            best = c;
        }
    }
    let n = vec3_norm(&best);
    if n > T::zero() {
        [best[0] / n, best[1] / n, best[2] / n]
    } else {
        // Matrix has rank <= 1; any unit vector orthogonal to row 0 works.
        let r = a[0];
        let trial = if r[0].abs() < r[1].abs() {
            vec3_cross(&r, &[T::one(), T::zero(), T::zero()])
        } else {
            vec3_cross(&r, &[T::zero(), T::one(), T::zero()])
        };
        let n = vec3_norm(&trial);
        if n > T::zero() {
            [trial[0] / n, trial[1] / n, trial[2] / n]
        } else {
            [T::one(), T::zero(), T::zero()]
        }
    }
}

/// Eigen-decomposition of a symmetric 2x2 matrix `[[a, b], [b, c]]`.
/// Returns `(eigenvalues, eigenvectors)` with eigenvalues descending and
/// eigenvectors as unit columns.
pub(crate) fn sym2_eigen<T: Scalar>(a: T, b: T, c: T) -> ([T; 2], [[T; 2]; 2]) {
    let half = sc::<T>(0.5);
    let mean = (a + c) * half;
    let diff = (a - c) * half;
    let rad = (diff * diff + b * b).sqrt();
    let l1 = mean + rad;
    let l2 = mean - rad;
    let v1 = if b.abs() > T::epsilon() * (a.abs() + c.abs()) {
        normalize2([l1 - c, b])
    } else if a >= c {
        [T::one(), T::zero()]
    } else {
        [T::zero(), T::one()]
    };
    let v2 = [-v1[1], v1[0]];
    ([l1, l2], [v1, v2])
}

fn normalize2<T: Scalar>(v: [T; 2]) -> [T; 2] {
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    if n > T::zero() {
        [v[0] / n, v[1] / n]
    } else {
        [T::one(), T::zero()]
    }
}
