//! Closed-form 2×2 complex linear algebra.

use num_complex::Complex64;

pub type C64 = Complex64;

/// 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        Mat2([
            [C64::from(m[0][0]), C64::from(m[0][1])],
            [C64::from(m[1][0]), C64::from(m[1][1])],
        ])
    }

    pub fn diag(a: C64, b: C64) -> Self {
        Mat2([[a, ZERO], [ZERO, b]])
    }

    pub fn from_columns(c0: [C64; 2], c1: [C64; 2]) -> Self {
        Mat2([[c0[0], c1[0]], [c0[1], c1[1]]])
    }

    pub fn column(&self, j: usize) -> [C64; 2] {
        [self.0[0][j], self.0[1][j]]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn conj(&self) -> Self {
        Mat2(self.0.map(|r| r.map(|z| z.conj())))
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2(self.0.map(|r| r.map(|z| z * s)))
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == 0.0 {
            return None;
        }
        let m = &self.0;
        Some(Mat2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]))
    }

    /// Singular values `(σ_max, σ_min)`, with `σ_min = |det| / σ_max` for accuracy.
    pub fn singular_values(&self) -> (f64, f64) {
        let f2 = self.frobenius().powi(2);
        let d = self.det().norm();
        let disc = (f2 * f2 - 4.0 * d * d).max(0.0).sqrt();
        let smax = ((f2 + disc) / 2.0).sqrt();
        let smin = if smax > 0.0 { d / smax } else { 0.0 };
        (smax, smin)
    }

    /// Unit right-singular vector for the smallest singular value.
    pub fn min_right_singular_vector(&self) -> [C64; 2] {
        let h = self.adjoint() * *self;
        let eig = hermitian_eigen(h);
        eig.vectors[0]
    }
}

impl std::ops::Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

impl std::ops::Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self.0;
        for (row, r) in out.iter_mut().zip(rhs.0) {
            for (x, y) in row.iter_mut().zip(r) {
                *x += y;
            }
        }
        Mat2(out)
    }
}

impl std::ops::Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let mut out = self.0;
        for (row, r) in out.iter_mut().zip(rhs.0) {
            for (x, y) in row.iter_mut().zip(r) {
                *x -= y;
            }
        }
        Mat2(out)
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone, Copy)]
pub struct HermitianEigen {
    pub values: [f64; 2],
    pub vectors: [[C64; 2]; 2],
}

/// Eigenvalues come from the stable trace/discriminant form; vectors are
/// taken from whichever row of `H − λ` is better conditioned.
pub fn hermitian_eigen(h: Mat2) -> HermitianEigen {
    let a = h.0[0][0].re;
    let d = h.0[1][1].re;
    let b = h.0[0][1];
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let r = half.hypot(b.norm());
    let values = [mean - r, mean + r];
    if b.norm() <= 1e-300 {
        let (lo, hi) = if a <= d { (0, 1) } else { (1, 0) };
        let mut e = [[ZERO; 2]; 2];
        e[0][lo] = ONE;
        e[1][hi] = ONE;
        return HermitianEigen { values: [a.min(d), a.max(d)], vectors: e };
    }
    let vec_for = |lam: f64| -> [C64; 2] {
        // rows of H − λI are (a−λ, b) and (b̄, d−λ); (r1, −r0) annihilates row r
        let r0 = [C64::from(a - lam), b];
        let r1 = [b.conj(), C64::from(d - lam)];
        let n0 = r0[0].norm_sqr() + r0[1].norm_sqr();
        let n1 = r1[0].norm_sqr() + r1[1].norm_sqr();
        let row = if n0 >= n1 { r0 } else { r1 };
        let v = [row[1], -row[0]];
        normalize(v)
    };
    HermitianEigen { values, vectors: [vec_for(values[0]), vec_for(values[1])] }
}

pub fn norm2(v: [C64; 2]) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

pub fn normalize(v: [C64; 2]) -> [C64; 2] {
    let n = norm2(v);
    if n == 0.0 {
        v
    } else {
        [v[0] / n, v[1] / n]
    }
}

/// `⟨u, w⟩ = Σ u_k conj(w_k)`.
pub fn inner(u: [C64; 2], w: [C64; 2]) -> C64 {
    u[0] * w[0].conj() + u[1] * w[1].conj()
}
