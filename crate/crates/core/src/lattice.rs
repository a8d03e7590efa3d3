//! Lattices `Z + tau Z`, torus points and the Weierstrass functions.
//!
//! Everything is evaluated from q-expansions after reducing the argument to
//! the centred period parallelogram, so the series converge geometrically
//! with ratio at most `|q|^(1/2)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SERIES_TOL: f64 = 1e-17;
const MAX_TERMS: usize = 20_000;
/// Distance to a lattice point below which an evaluation counts as a pole.
pub const POLE_GUARD: f64 = 1e-13;

/// Which Weierstrass function to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    P,
    PPrime,
    Zeta,
}

/// The lattice `Z + tau Z` together with its invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub tau: C64,
    pub q: C64,
    pub g2: C64,
    pub g3: C64,
    /// `zeta(u + 1) - zeta(u)`.
    pub eta1: C64,
    /// `zeta(u + tau) - zeta(u)`.
    pub eta2: C64,
    /// `wp(1/2), wp(tau/2), wp((1+tau)/2)`.
    pub roots: [C64; 3],
}

/// A point of the torus `C / Lambda`, stored by a representative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub z: C64,
}

fn i() -> C64 {
    C64::new(0.0, 1.0)
}

impl Lattice {
    pub fn new(tau: C64) -> Result<Self> {
        if !(tau.re.is_finite() && tau.im.is_finite()) || tau.im <= 0.0 {
            return Err(Error::Domain(format!("Im tau must be positive, got tau = {tau}")));
        }
        if tau.im < 0.05 {
            return Err(Error::Domain(format!(
                "Im tau = {} is too small for the q-expansions",
                tau.im
            )));
        }
        let q = (2.0 * PI * i() * tau).exp();
        // Lambert series for sigma_3, sigma_5 and the E2 correction.
        let (mut s3, mut s5, mut s1) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        let mut qn = C64::new(1.0, 0.0);
        for n in 1..MAX_TERMS {
            qn *= q;
            let nf = n as f64;
            let l = qn / (1.0 - qn);
            let t5 = nf.powi(5) * l;
            s3 += nf.powi(3) * l;
            s5 += t5;
            s1 += qn / ((1.0 - qn) * (1.0 - qn));
            if t5.norm() < SERIES_TOL && n > 2 {
                break;
            }
        }
        let pi2 = PI * PI;
        let g2 = (4.0 * pi2 * pi2 / 3.0) * (1.0 + 240.0 * s3);
        let g3 = (8.0 * pi2 * pi2 * pi2 / 27.0) * (1.0 - 504.0 * s5);
        let eta1 = pi2 / 3.0 - 8.0 * pi2 * s1;
        let mut lat = Lattice {
            tau,
            q,
            g2,
            g3,
            eta1,
            eta2: tau * eta1 - 2.0 * PI * i(),
            roots: [C64::new(0.0, 0.0); 3],
        };
        // Legendre relation, checked against a direct quasi-period.
        let u0 = C64::new(0.31, 0.0) - 0.45 * tau;
        let direct = lat.series(u0 + tau)?.1 - lat.series(u0)?.1;
        if (direct - lat.eta2).norm() > 1e-9 * (1.0 + lat.eta2.norm()) {
            return Err(Error::Numerical(format!(
                "Legendre relation failed: {} vs {}",
                direct, lat.eta2
            )));
        }
        lat.eta2 = direct;
        let h = lat.half_periods();
        for j in 0..3 {
            lat.roots[j] = lat.wp(h[j + 1])?;
        }
        Ok(lat)
    }

    /// `0, 1/2, tau/2, (1+tau)/2`.
    pub fn half_periods(&self) -> [C64; 4] {
        [
            C64::new(0.0, 0.0),
            C64::new(0.5, 0.0),
            0.5 * self.tau,
            0.5 * (1.0 + self.tau),
        ]
    }

    /// Real lattice coordinates `(a, b)` with `u = a + b tau`.
    pub fn coords(&self, u: C64) -> (f64, f64) {
        let b = u.im / self.tau.im;
        let a = u.re - b * self.tau.re;
        (a, b)
    }

    /// `u = r + m + n tau` with `r` in the centred parallelogram.
    pub fn reduce_centered(&self, u: C64) -> (C64, f64, f64) {
        let (a, b) = self.coords(u);
        let (m, n) = (a.round(), b.round());
        (u - m - n * self.tau, m, n)
    }

    /// Representative with lattice coordinates in `[0, 1)`.
    pub fn reduce_fundamental(&self, u: C64) -> C64 {
        let (a, b) = self.coords(u);
        let (fa, fb) = (a - a.floor(), b - b.floor());
        let (fa, fb) = (if fa >= 1.0 { 0.0 } else { fa }, if fb >= 1.0 { 0.0 } else { fb });
        C64::new(fa, 0.0) + fb * self.tau
    }

    /// Distance on the torus between two representatives.
    pub fn torus_distance(&self, a: C64, b: C64) -> f64 {
        let (r, _, _) = self.reduce_centered(a - b);
        let mut best = r.norm();
        for dm in -1..=1 {
            for dn in -1..=1 {
                let d = (r + dm as f64 + dn as f64 * self.tau).norm();
                if d < best {
                    best = d;
                }
            }
        }
        best
    }

    pub fn same_point(&self, a: C64, b: C64, tol: f64) -> bool {
        self.torus_distance(a, b) <= tol
    }

    /// Order of `z` in the group `C / Lambda`: 1, 2, or 0 for anything else.
    pub fn point_order(&self, z: C64, tol: f64) -> u32 {
        if self.torus_distance(z, C64::new(0.0, 0.0)) <= tol {
            1
        } else if self.torus_distance(2.0 * z, C64::new(0.0, 0.0)) <= tol {
            2
        } else {
            0
        }
    }

    /// q-series for `(wp, zeta, wp')` at an argument with `|Im u| < Im tau`.
    /// The caller is responsible for reduction.
    fn series(&self, u: C64) -> Result<(C64, C64, C64)> {
        if u.norm() < POLE_GUARD {
            return Err(Error::Pole(format!("argument {u} is a lattice point")));
        }
        let two_pi_i = 2.0 * PI * i();
        let x = (two_pi_i * u).exp();
        let xi = 1.0 / x;
        let s = (PI * u).sin();
        let c = (PI * u).cos();
        let mut sp = C64::new(0.0, 0.0);
        let mut sz = C64::new(0.0, 0.0);
        let mut sd = C64::new(0.0, 0.0);
        let big = x.norm().max(xi.norm());
        let mut qn = C64::new(1.0, 0.0);
        for n in 1..MAX_TERMS {
            qn *= self.q;
            let a = qn * x;
            let b = qn * xi;
            let oa = 1.0 - a;
            let ob = 1.0 - b;
            sp += a / (oa * oa) + b / (ob * ob);
            sz += 1.0 / oa - 1.0 / ob;
            sd += a * (1.0 + a) / (oa * oa * oa) - b * (1.0 + b) / (ob * ob * ob);
            if qn.norm() * big < SERIES_TOL && n > 1 {
                break;
            }
        }
        let pi2 = PI * PI;
        let wp = pi2 / (s * s) - self.eta1 + two_pi_i * two_pi_i * sp;
        let zeta = PI * c / s + self.eta1 * u - two_pi_i * sz;
        let wpp = -2.0 * pi2 * PI * c / (s * s * s) + two_pi_i * two_pi_i * two_pi_i * sd;
        Ok((wp, zeta, wpp))
    }

    pub fn eval(&self, u: C64, which: Which) -> Result<C64> {
        if !(u.re.is_finite() && u.im.is_finite()) {
            return Err(Error::Domain(format!("non-finite argument {u}")));
        }
        let (r, m, n) = self.reduce_centered(u);
        let (p, z, d) = self.series(r)?;
        Ok(match which {
            Which::P => p,
            Which::PPrime => d,
            Which::Zeta => z + m * self.eta1 + n * self.eta2,
        })
    }

    /// `(wp, wp', zeta)` in one pass.
    pub fn eval_all(&self, u: C64) -> Result<(C64, C64, C64)> {
        let (r, m, n) = self.reduce_centered(u);
        let (p, z, d) = self.series(r)?;
        Ok((p, d, z + m * self.eta1 + n * self.eta2))
    }

    pub fn wp(&self, u: C64) -> Result<C64> {
        self.eval(u, Which::P)
    }

    pub fn wp_prime(&self, u: C64) -> Result<C64> {
        self.eval(u, Which::PPrime)
    }

    pub fn zeta(&self, u: C64) -> Result<C64> {
        self.eval(u, Which::Zeta)
    }

    /// The n-th derivative of `wp`, via `wp'' = 6 wp^2 - g2/2`.
    pub fn wp_derivative(&self, n: usize, u: C64) -> Result<C64> {
        let (p, d, _) = self.eval_all(u)?;
        let (a, b) = self.derivative_polys(n);
        Ok(poly_eval(&a, p) + d * poly_eval(&b, p))
    }

    /// Polynomials `(A_n, B_n)` with `wp^(n) = A_n(wp) + wp' B_n(wp)`.
    pub fn derivative_polys(&self, n: usize) -> (Vec<C64>, Vec<C64>) {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let mut a = vec![z, one];
        let mut b: Vec<C64> = vec![];
        // wp'' as a polynomial and wp'^2 as a polynomial in wp
        let second = vec![-0.5 * self.g2, z, 6.0 * one];
        let square = vec![-self.g3, -self.g2, z, 4.0 * one];
        for _ in 0..n {
            let na = poly_add(&poly_mul(&second, &b), &poly_mul(&square, &poly_deriv(&b)));
            let nb = poly_deriv(&a);
            a = na;
            b = nb;
        }
        (a, b)
    }
}

impl TorusPoint {
    pub fn new(z: C64) -> Self {
        TorusPoint { z }
    }

    pub fn neg(&self) -> Self {
        TorusPoint { z: -self.z }
    }

    pub fn reduced(&self, lat: &Lattice) -> Self {
        TorusPoint { z: lat.reduce_fundamental(self.z) }
    }

    pub fn approx_eq(&self, other: &TorusPoint, lat: &Lattice, tol: f64) -> bool {
        lat.same_point(self.z, other.z, tol)
    }
}

pub(crate) fn poly_eval(p: &[C64], x: C64) -> C64 {
    p.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

fn poly_add(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| a.get(k).copied().unwrap_or_default() + b.get(k).copied().unwrap_or_default())
        .collect()
}

fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (j, x) in a.iter().enumerate() {
        for (k, y) in b.iter().enumerate() {
            out[j + k] += x * y;
        }
    }
    out
}

fn poly_deriv(a: &[C64]) -> Vec<C64> {
    a.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

/// Free-function form used by the CLI and the tests.
pub fn weierstrass_eval(lat: &Lattice, u: C64, which: Which) -> Result<C64> {
    lat.eval(u, which)
}
