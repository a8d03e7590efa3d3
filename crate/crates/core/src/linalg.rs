//! Small dense complex matrices and polynomial roots.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMat {
    pub n: usize,
    pub data: Vec<C64>,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        CMat { n, data: vec![zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for j in 0..n {
            m.data[j * n + j] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Validation("matrix must be square".into()));
        }
        Ok(CMat { n, data: rows.iter().flatten().copied().collect() })
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.n).map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec()).collect()
    }

    /// `u v^T`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        let n = u.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = u[i] * v[j];
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] = v;
    }

    pub fn add(&self, o: &CMat) -> CMat {
        CMat { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &CMat) -> CMat {
        CMat { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, c: C64) -> CMat {
        CMat { n: self.n, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn shift(&self, w: C64) -> CMat {
        let mut m = self.clone();
        for j in 0..self.n {
            m.data[j * self.n + j] -= w;
        }
        m
    }

    pub fn mul(&self, o: &CMat) -> CMat {
        let n = self.n;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                for j in 0..n {
                    m.data[i * n + j] += a * o.data[k * n + j];
                }
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum()).collect()
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMat {
        let n = self.n;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        m
    }

    pub fn commutator(&self, o: &CMat) -> CMat {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|j| self.get(j, j)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> C64 {
        let n = self.n;
        if n == 0 {
            return C64::new(1.0, 0.0);
        }
        if n == 1 {
            return self.data[0];
        }
        if n == 2 {
            return self.data[0] * self.data[3] - self.data[1] * self.data[2];
        }
        let mut a = self.data.clone();
        let mut det = C64::new(1.0, 0.0);
        for c in 0..n {
            let p = (c..n).max_by(|&x, &y| a[x * n + c].norm().partial_cmp(&a[y * n + c].norm()).unwrap()).unwrap();
            if a[p * n + c].norm() == 0.0 {
                return zero();
            }
            if p != c {
                for j in 0..n {
                    a.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            let piv = a[c * n + c];
            det *= piv;
            for r in c + 1..n {
                let f = a[r * n + c] / piv;
                for j in c..n {
                    let t = a[c * n + j];
                    a[r * n + j] -= f * t;
                }
            }
        }
        det
    }

    /// Characteristic polynomial `det(w - A)` (ascending coefficients) and
    /// the adjugate of `A`, both by Faddeev-LeVerrier.
    pub fn char_poly_adj(&self) -> (Vec<C64>, CMat) {
        let n = self.n;
        let mut c = vec![zero(); n + 1];
        c[n] = C64::new(1.0, 0.0);
        let mut m = Self::zeros(n);
        for k in 1..=n {
            let mut next = self.mul(&m);
            for j in 0..n {
                next.data[j * n + j] += c[n - k + 1];
            }
            m = next;
            c[n - k] = -self.mul(&m).trace() / k as f64;
        }
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        (c, m.scale(C64::new(sign, 0.0)))
    }

    pub fn char_poly(&self) -> Vec<C64> {
        self.char_poly_adj().0
    }

    /// Adjugate by cofactors, exact in structure for singular matrices.
    pub fn adjugate(&self) -> CMat {
        let n = self.n;
        if n == 1 {
            return CMat::identity(1);
        }
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut minor = Self::zeros(n - 1);
                let mut r = 0;
                for a in 0..n {
                    if a == i {
                        continue;
                    }
                    let mut s = 0;
                    for b in 0..n {
                        if b == j {
                            continue;
                        }
                        minor.data[r * (n - 1) + s] = self.get(a, b);
                        s += 1;
                    }
                    r += 1;
                }
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                // adj(A)_{j,i} = cofactor_{i,j}
                out.data[j * n + i] = minor.det() * sign;
            }
        }
        out
    }

    /// Singular values, largest first.
    pub fn singular_values(&self) -> Vec<f64> {
        let m = nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j));
        let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s
    }

    /// Numerical rank with a relative singular-value cutoff.
    pub fn rank(&self, rel: f64) -> usize {
        let s = self.singular_values();
        let top = s.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            return 0;
        }
        s.iter().filter(|&&x| x > rel * top).count()
    }

    /// Eigenvalues as roots of the characteristic polynomial.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        poly_roots(&self.char_poly())
    }
}

/// Evaluate a polynomial with ascending coefficients.
pub fn peval(p: &[C64], x: C64) -> C64 {
    p.iter().rev().fold(zero(), |acc, &c| acc * x + c)
}

pub fn pderiv(p: &[C64]) -> Vec<C64> {
    p.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

pub fn pmul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![zero(); a.len() + b.len() - 1];
    for (j, x) in a.iter().enumerate() {
        for (k, y) in b.iter().enumerate() {
            out[j + k] += x * y;
        }
    }
    out
}

pub fn padd(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n).map(|k| a.get(k).copied().unwrap_or_default() + b.get(k).copied().unwrap_or_default()).collect()
}

pub fn pscale(a: &[C64], c: C64) -> Vec<C64> {
    a.iter().map(|x| x * c).collect()
}

/// Drop leading coefficients that are negligible relative to the largest.
pub fn ptrim(p: &[C64], rel: f64) -> Vec<C64> {
    let big = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut v = p.to_vec();
    while v.len() > 1 && v.last().unwrap().norm() <= rel * big {
        v.pop();
    }
    v
}

/// All roots of a polynomial (ascending coefficients) by Aberth iteration
/// followed by Newton polishing.
pub fn poly_roots(p: &[C64]) -> Result<Vec<C64>> {
    let p = ptrim(p, 0.0);
    let n = p.len() - 1;
    if n == 0 {
        return Ok(vec![]);
    }
    let lead = p[n];
    if lead.norm() == 0.0 {
        return Err(Error::Numerical("zero polynomial".into()));
    }
    let monic: Vec<C64> = p.iter().map(|c| c / lead).collect();
    if n == 1 {
        return Ok(vec![-monic[0]]);
    }
    if n == 2 {
        let (b, c) = (monic[1], monic[0]);
        let disc = (b * b - 4.0 * c).sqrt();
        // numerically stable pair
        let q = if (b.conj() * disc).re >= 0.0 { -0.5 * (b + disc) } else { -0.5 * (b - disc) };
        let r1 = q;
        let r2 = if q.norm() > 0.0 { c / q } else { -b - q };
        return Ok(vec![r1, r2]);
    }
    let dp = pderiv(&monic);
    let radius = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(0.5 * radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for k in 0..n {
            let pv = peval(&monic, z[k]);
            let dv = peval(&dp, z[k]);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / dv;
            let s: C64 = (0..n).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            if w.re.is_finite() && w.im.is_finite() {
                z[k] -= w;
                moved = moved.max(w.norm() / (1.0 + z[k].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    for r in z.iter_mut() {
        for _ in 0..3 {
            let pv = peval(&monic, *r);
            let dv = peval(&dp, *r);
            if dv.norm() == 0.0 {
                break;
            }
            let step = pv / dv;
            if !(step.re.is_finite() && step.im.is_finite()) || step.norm() > 1e-6 * (1.0 + r.norm()) {
                break;
            }
            *r -= step;
        }
    }
    if z.iter().any(|r| !(r.re.is_finite() && r.im.is_finite())) {
        return Err(Error::Numerical("polynomial root finder produced non-finite roots".into()));
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn mat(n: usize, vals: &[f64]) -> CMat {
        CMat { n, data: (0..n * n).map(|k| c(vals[2 * k], vals[2 * k + 1])).collect() }
    }

    #[test]
    fn roots_of_known_cubic() {
        let r = [c(1.0, 0.5), c(-0.3, 2.0), c(0.0, -1.0)];
        let p = pmul(&pmul(&[-r[0], c(1.0, 0.0)], &[-r[1], c(1.0, 0.0)]), &[-r[2], c(1.0, 0.0)]);
        let found = poly_roots(&p).unwrap();
        for x in r {
            assert!(found.iter().any(|y| (x - y).norm() < 1e-12));
        }
    }

    proptest! {
        #[test]
        fn adjugate_identity(vals in proptest::collection::vec(-2.0f64..2.0, 18)) {
            let a = mat(3, &vals);
            let prod = a.mul(&a.adjugate());
            let d = a.det();
            let expected = CMat::identity(3).scale(d);
            prop_assert!(prod.sub(&expected).frobenius() < 1e-10 * (1.0 + d.norm()));
            let (_, adj2) = a.char_poly_adj();
            prop_assert!(adj2.sub(&a.adjugate()).frobenius() < 1e-9 * (1.0 + a.frobenius().powi(2)));
        }

        #[test]
        fn char_poly_matches_det(vals in proptest::collection::vec(-2.0f64..2.0, 32), wr in -2.0f64..2.0, wi in -2.0f64..2.0) {
            let a = mat(4, &vals);
            let w = c(wr, wi);
            let p = a.char_poly();
            let d = CMat::identity(4).scale(w).sub(&a).det();
            prop_assert!((peval(&p, w) - d).norm() < 1e-9 * (1.0 + d.norm()));
        }

        #[test]
        fn eigenvalues_annihilate(vals in proptest::collection::vec(-2.0f64..2.0, 18)) {
            let a = mat(3, &vals);
            for e in a.eigenvalues().unwrap() {
                let d = a.shift(e).det();
                prop_assert!(d.norm() < 1e-8 * (1.0 + a.frobenius().powi(3)));
            }
        }
    }
}
