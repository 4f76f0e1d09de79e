//! Small dense 3x3 and 3x3x3x3 tensor helpers.

pub type Mat3 = [[f64; 3]; 3];

/// Fourth-order tensor with the pair `(i, j)` flattened to `3 i + j`.
pub type Tensor4 = [[f64; 9]; 9];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
pub const ZERO: Mat3 = [[0.0; 3]; 3];

pub fn det(a: &Mat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Inverse; `None` when the determinant vanishes.
pub fn inverse(a: &Mat3) -> Option<Mat3> {
    let d = det(a);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut inv = ZERO;
    inv[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / d;
    inv[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / d;
    inv[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / d;
    inv[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / d;
    inv[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / d;
    inv[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / d;
    inv[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / d;
    inv[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / d;
    inv[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / d;
    Some(inv)
}

pub fn transpose(a: &Mat3) -> Mat3 {
    let mut t = ZERO;
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

pub fn mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = ZERO;
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    c
}

/// `a^T b`
pub fn tmul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = ZERO;
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[0][i] * b[0][j] + a[1][i] * b[1][j] + a[2][i] * b[2][j];
        }
    }
    c
}

pub fn add(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = *a;
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] += b[i][j];
        }
    }
    c
}

pub fn scale(a: &Mat3, s: f64) -> Mat3 {
    let mut c = *a;
    for row in c.iter_mut() {
        for v in row.iter_mut() {
            *v *= s;
        }
    }
    c
}

/// `a += s * b`
pub fn axpy(a: &mut Mat3, s: f64, b: &Mat3) {
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] += s * b[i][j];
        }
    }
}

/// Double contraction `a : b = a_ij b_ij`.
pub fn ddot(a: &Mat3, b: &Mat3) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += a[i][j] * b[i][j];
        }
    }
    s
}

pub fn trace(a: &Mat3) -> f64 {
    a[0][0] + a[1][1] + a[2][2]
}

pub fn outer(a: &[f64; 3], b: &[f64; 3]) -> Mat3 {
    let mut c = ZERO;
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i] * b[j];
        }
    }
    c
}

pub fn diag(d: [f64; 3]) -> Mat3 {
    [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]]
}

/// Frobenius norm.
pub fn norm(a: &Mat3) -> f64 {
    crate::math::sqrt(ddot(a, a))
}

pub fn unit(i: usize, j: usize) -> Mat3 {
    let mut e = ZERO;
    e[i][j] = 1.0;
    e
}

/// `A : X` for a fourth-order tensor in flattened form.
pub fn contract(a: &Tensor4, x: &Mat3) -> Mat3 {
    let mut out = ZERO;
    for p in 0..9 {
        let mut s = 0.0;
        for q in 0..9 {
            s += a[p][q] * x[q / 3][q % 3];
        }
        out[p / 3][p % 3] = s;
    }
    out
}

pub fn norm4(a: &Tensor4) -> f64 {
    crate::math::sqrt(a.iter().flatten().map(|v| v * v).sum())
}
