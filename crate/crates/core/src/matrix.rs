//! Fixed-capacity complex matrices of dimension 2 or 3.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::error::{Error, Result};

pub type Complex = num_complex::Complex64;

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);

/// `true` when both components are finite.
pub fn is_finite(z: Complex) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Hermitian inner product `⟨a|b⟩ = Σ conj(aᵢ) bᵢ`.
pub fn inner(a: &[Complex], b: &[Complex]) -> Complex {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[Complex]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// An `n × n` complex matrix with `n ∈ {2, 3}`.
///
/// Storage is always 3×3; entries outside the active `n × n` block are zero.
#[derive(Clone, Copy, PartialEq)]
pub struct SmallMatrix {
    n: usize,
    e: [[Complex; 3]; 3],
}

impl SmallMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(SmallMatrix { n, e: [[ZERO; 3]; 3] })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            m.e[i][i] = ONE;
        }
        Ok(m)
    }

    pub fn diag(values: &[Complex]) -> Result<Self> {
        let mut m = Self::zeros(values.len())?;
        for (i, &v) in values.iter().enumerate() {
            m.e[i][i] = v;
        }
        m.check_finite()?;
        Ok(m)
    }

    /// Build from row-major rows. Every row must have length `rows.len()`.
    pub fn from_rows<R: AsRef<[Complex]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n)?;
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            m.e[i][..n].copy_from_slice(row);
        }
        m.check_finite()?;
        Ok(m)
    }

    /// Build from `n²` row-major entries.
    pub fn from_flat(entries: &[Complex]) -> Result<Self> {
        let n = match entries.len() {
            4 => 2,
            9 => 3,
            k => return Err(Error::DimensionMismatch { expected: 9, got: k }),
        };
        let mut m = Self::zeros(n)?;
        for (k, &z) in entries.iter().enumerate() {
            m.e[k / n][k % n] = z;
        }
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let rows: Vec<Vec<Complex>> =
            rows.iter().map(|r| r.as_ref().iter().map(|&x| Complex::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Row-major entries of the active block.
    pub fn to_flat(&self) -> Vec<Complex> {
        (0..self.n * self.n).map(|k| self.e[k / self.n][k % self.n]).collect()
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.to_flat().into_iter().all(is_finite) {
            Ok(())
        } else {
            Err(Error::NonFinite("matrix"))
        }
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.to_flat().into_iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Tolerance scale `max(1, ‖m‖_max)`.
    pub fn scale(&self) -> f64 {
        self.max_norm().max(1.0)
    }

    pub fn trace(&self) -> Complex {
        (0..self.n).map(|i| self.e[i][i]).sum()
    }

    pub fn det(&self) -> Complex {
        let e = &self.e;
        match self.n {
            2 => e[0][0] * e[1][1] - e[0][1] * e[1][0],
            _ => {
                e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1]) - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
                    + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0])
            }
        }
    }

    /// Adjugate (transpose of the cofactor matrix), so `adj(A)·A = det(A)·I`.
    pub fn adjugate(&self) -> SmallMatrix {
        let e = &self.e;
        let mut out = SmallMatrix { n: self.n, e: [[ZERO; 3]; 3] };
        match self.n {
            2 => {
                out.e[0][0] = e[1][1];
                out.e[0][1] = -e[0][1];
                out.e[1][0] = -e[1][0];
                out.e[1][1] = e[0][0];
            }
            _ => {
                for i in 0..3 {
                    for j in 0..3 {
                        let (r0, r1) = others(j);
                        let (c0, c1) = others(i);
                        let minor = e[r0][c0] * e[r1][c1] - e[r0][c1] * e[r1][c0];
                        out.e[i][j] = if (i + j) % 2 == 0 { minor } else { -minor };
                    }
                }
            }
        }
        out
    }

    /// `self − λ·I`
    pub fn shifted(&self, lambda: Complex) -> SmallMatrix {
        let mut m = *self;
        for i in 0..self.n {
            m.e[i][i] -= lambda;
        }
        m
    }

    pub fn scaled(&self, s: f64) -> SmallMatrix {
        let mut m = *self;
        for row in m.e.iter_mut() {
            for z in row.iter_mut() {
                *z = z.scale(s);
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[Complex]) -> Vec<Complex> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.e[i][j] * v[j]).sum()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<Complex> {
        (0..self.n).map(|i| self.e[i][j]).collect()
    }

    pub fn row(&self, i: usize) -> Vec<Complex> {
        self.e[i][..self.n].to_vec()
    }

    /// Embed a 2×2 block in the upper-left corner of a 3×3 with `corner` at (2,2).
    pub fn embed3(&self, corner: Complex) -> SmallMatrix {
        let mut m = SmallMatrix { n: 3, e: self.e };
        m.e[2][2] = corner;
        m
    }
}

fn others(k: usize) -> (usize, usize) {
    match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

impl Index<(usize, usize)> for SmallMatrix {
    type Output = Complex;
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        assert!(i < self.n && j < self.n, "index ({i}, {j}) out of bounds for n = {}", self.n);
        &self.e[i][j]
    }
}

impl IndexMut<(usize, usize)> for SmallMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        assert!(i < self.n && j < self.n, "index ({i}, {j}) out of bounds for n = {}", self.n);
        &mut self.e[i][j]
    }
}

impl Add for SmallMatrix {
    type Output = SmallMatrix;
    fn add(mut self, rhs: SmallMatrix) -> SmallMatrix {
        assert_eq!(self.n, rhs.n);
        for i in 0..3 {
            for j in 0..3 {
                self.e[i][j] += rhs.e[i][j];
            }
        }
        self
    }
}

impl Sub for SmallMatrix {
    type Output = SmallMatrix;
    fn sub(mut self, rhs: SmallMatrix) -> SmallMatrix {
        assert_eq!(self.n, rhs.n);
        for i in 0..3 {
            for j in 0..3 {
                self.e[i][j] -= rhs.e[i][j];
            }
        }
        self
    }
}

impl Mul for SmallMatrix {
    type Output = SmallMatrix;
    fn mul(self, rhs: SmallMatrix) -> SmallMatrix {
        assert_eq!(self.n, rhs.n);
        let mut out = SmallMatrix { n: self.n, e: [[ZERO; 3]; 3] };
        for i in 0..self.n {
            for j in 0..self.n {
                out.e[i][j] = (0..self.n).map(|k| self.e[i][k] * rhs.e[k][j]).sum();
            }
        }
        out
    }
}

impl fmt::Debug for SmallMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<_> = (0..self.n).map(|i| self.row(i)).collect();
        f.debug_struct("SmallMatrix").field("n", &self.n).field("rows", &rows).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert_eq!(SmallMatrix::zeros(4).unwrap_err(), Error::UnsupportedDimension(4));
        assert!(SmallMatrix::from_flat(&[ONE; 5]).is_err());
        assert!(SmallMatrix::from_rows(&[vec![ONE, ONE], vec![ONE]]).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        let err = SmallMatrix::from_flat(&[ONE, c(f64::NAN, 0.0), ONE, ONE]).unwrap_err();
        assert_eq!(err, Error::NonFinite("matrix"));
    }

    #[test]
    fn adjugate_times_matrix_is_det_identity() {
        let m = SmallMatrix::from_rows(&[
            [c(1.0, 2.0), c(0.5, -1.0), c(3.0, 0.0)],
            [c(-2.0, 0.1), c(0.0, 1.0), c(1.0, 1.0)],
            [c(0.3, 0.0), c(2.0, -2.0), c(-1.0, 0.5)],
        ])
        .unwrap();
        let prod = m.adjugate() * m;
        let det = m.det();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { det } else { ZERO };
                assert!((prod[(i, j)] - expect).norm() < 1e-12);
            }
        }
        let m2 = SmallMatrix::from_flat(&[c(1.0, 1.0), c(2.0, 0.0), c(0.0, -1.0), c(4.0, 0.0)]).unwrap();
        let prod2 = m2.adjugate() * m2;
        assert!((prod2[(0, 0)] - m2.det()).norm() < 1e-14);
        assert!(prod2[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn scale_is_at_least_one() {
        let m = SmallMatrix::diag(&[c(0.1, 0.0), c(0.0, 0.2)]).unwrap();
        assert_eq!(m.scale(), 1.0);
        let m = SmallMatrix::diag(&[c(3.0, 4.0), ZERO]).unwrap();
        assert_eq!(m.scale(), 5.0);
    }
}
