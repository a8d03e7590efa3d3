//! Elliptic functions written in the Weierstrass basis
//! `c + sum a_j zeta(u - p_j) + sum b_{j,m} wp^(m-2)(u - p_j)`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::argument::{self, Parallelogram, ZeroOptions, ZeroSet};
use crate::error::{Error, Result};
use crate::lattice::{poly_eval, Lattice};

/// One basis term. Order 1 is `zeta(u - pole)`, order `m >= 2` is
/// `wp^(m-2)(u - pole)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub pole: C64,
    pub order: u32,
    pub coeff: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticFunction {
    pub lattice: Lattice,
    pub constant: C64,
    pub terms: Vec<Term>,
}

const SAME_POLE: f64 = 1e-12;

impl EllipticFunction {
    /// Build and validate: the zeta coefficients must sum to zero.
    pub fn new(lattice: Lattice, constant: C64, terms: Vec<Term>) -> Result<Self> {
        let f = Self::unchecked(lattice, constant, terms)?;
        let sum: C64 = f.terms.iter().filter(|t| t.order == 1).map(|t| t.coeff).sum();
        let mag: f64 = f.terms.iter().filter(|t| t.order == 1).map(|t| t.coeff.norm()).sum();
        if sum.norm() > 1e-10 * (1.0 + mag) {
            return Err(Error::Validation(format!(
                "residues sum to {sum}, so the function is not doubly periodic"
            )));
        }
        Ok(f)
    }

    /// Build without the residue check. Used for intermediate sums.
    pub fn unchecked(lattice: Lattice, constant: C64, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if t.order == 0 {
                return Err(Error::Validation("pole order must be at least 1".into()));
            }
            if !(t.coeff.re.is_finite() && t.coeff.im.is_finite() && t.pole.re.is_finite() && t.pole.im.is_finite()) {
                return Err(Error::Validation("non-finite term".into()));
            }
        }
        let terms = terms
            .into_iter()
            .map(|t| Term { pole: lattice.reduce_fundamental(t.pole), ..t })
            .collect();
        Ok(EllipticFunction { lattice, constant, terms })
    }

    pub fn constant(lattice: Lattice, c: C64) -> Self {
        EllipticFunction { lattice, constant: c, terms: vec![] }
    }

    /// `c (zeta(u - a) - zeta(u - b))`.
    pub fn zeta_difference(lattice: Lattice, a: C64, b: C64, c: C64) -> Result<Self> {
        Self::new(
            lattice,
            C64::new(0.0, 0.0),
            vec![Term { pole: a, order: 1, coeff: c }, Term { pole: b, order: 1, coeff: -c }],
        )
    }

    /// `c wp(u - a)`.
    pub fn wp_shift(lattice: Lattice, a: C64, c: C64) -> Result<Self> {
        Self::new(lattice, C64::new(0.0, 0.0), vec![Term { pole: a, order: 2, coeff: c }])
    }

    pub fn eval(&self, u: C64) -> Result<C64> {
        let mut acc = self.constant;
        for t in &self.terms {
            let x = u - t.pole;
            acc += t.coeff
                * match t.order {
                    1 => self.lattice.zeta(x)?,
                    2 => self.lattice.wp(x)?,
                    3 => self.lattice.wp_prime(x)?,
                    m => self.lattice.wp_derivative(m as usize - 2, x)?,
                };
        }
        Ok(acc)
    }

    /// Evaluate many terms with one series evaluation per distinct pole.
    pub fn eval_grouped(&self, u: C64) -> Result<C64> {
        let mut acc = self.constant;
        let mut done = vec![false; self.terms.len()];
        for j in 0..self.terms.len() {
            if done[j] {
                continue;
            }
            let p = self.terms[j].pole;
            let (wp, dwp, zeta) = self.lattice.eval_all(u - p)?;
            for k in j..self.terms.len() {
                let t = &self.terms[k];
                if done[k] || (t.pole - p).norm() > SAME_POLE {
                    continue;
                }
                done[k] = true;
                acc += t.coeff
                    * match t.order {
                        1 => zeta,
                        2 => wp,
                        3 => dwp,
                        m => {
                            let (a, b) = self.lattice.derivative_polys(m as usize - 2);
                            poly_eval(&a, wp) + dwp * poly_eval(&b, wp)
                        }
                    };
            }
        }
        Ok(acc)
    }

    pub fn derivative(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| match t.order {
                1 => Term { pole: t.pole, order: 2, coeff: -t.coeff },
                m => Term { pole: t.pole, order: m + 1, coeff: t.coeff },
            })
            .collect();
        EllipticFunction { lattice: self.lattice, constant: C64::new(0.0, 0.0), terms }
    }

    pub fn scale(&self, c: C64) -> Self {
        EllipticFunction {
            lattice: self.lattice,
            constant: self.constant * c,
            terms: self.terms.iter().map(|t| Term { coeff: t.coeff * c, ..*t }).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().copied());
        EllipticFunction { lattice: self.lattice, constant: self.constant + other.constant, terms }
    }

    /// Residue (coefficient of `1/(u - p)`) at a torus point.
    pub fn residue_at(&self, p: C64) -> C64 {
        self.terms
            .iter()
            .filter(|t| t.order == 1 && self.lattice.same_point(t.pole, p, 1e-10))
            .map(|t| t.coeff)
            .sum()
    }

    /// Distinct poles with their orders, dropping cancelled terms.
    pub fn poles(&self) -> Vec<(C64, u32)> {
        let mut out: Vec<(C64, u32)> = vec![];
        for t in &self.terms {
            if out.iter().any(|(p, _)| self.lattice.same_point(*p, t.pole, 1e-10)) {
                continue;
            }
            let mut order = 0;
            for m in 1..=8u32 {
                let c: C64 = self
                    .terms
                    .iter()
                    .filter(|s| s.order == m && self.lattice.same_point(s.pole, t.pole, 1e-10))
                    .map(|s| s.coeff)
                    .sum();
                if c.norm() > 1e-14 {
                    order = m;
                }
            }
            if order > 0 {
                out.push((t.pole, order));
            }
        }
        out
    }

    pub fn is_constant(&self) -> bool {
        self.poles().is_empty()
    }

    /// Number of zeros in a region, or on the whole torus when `None`.
    pub fn zero_count(&self, region: Option<&Parallelogram>) -> Result<i64> {
        let poles = self.poles();
        match region {
            None => Ok(poles.iter().map(|p| p.1 as i64).sum()),
            Some(r) => {
                let f = |u: C64| self.eval_grouped(u);
                argument::count_zeros(&f, r, Some(&self.lattice), &poles)
            }
        }
    }

    /// All zeros on the torus with multiplicities.
    pub fn zeros(&self) -> Result<ZeroSet> {
        if self.is_constant() {
            if self.constant.norm() == 0.0 {
                return Err(Error::Degeneracy("the zero function has no isolated zeros".into()));
            }
            return Ok(ZeroSet { roots: vec![], poles: vec![] });
        }
        let f = |u: C64| self.eval_grouped(u);
        argument::find_zeros_torus_with_poles(&f, &self.lattice, &self.poles(), ZeroOptions::default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn lat() -> Lattice {
        Lattice::new(c(0.15, 1.2)).unwrap()
    }

    #[test]
    fn rejects_nonzero_residue_sum() {
        let r = EllipticFunction::new(lat(), c(0.0, 0.0), vec![Term { pole: c(0.2, 0.1), order: 1, coeff: c(1.0, 0.0) }]);
        assert!(matches!(r, Err(Error::Validation(_))));
    }

    #[test]
    fn zeta_difference_is_doubly_periodic() {
        let l = lat();
        let f = EllipticFunction::zeta_difference(l, c(0.3, 0.2), c(-0.3, -0.2), c(1.0, 0.5)).unwrap();
        let u = c(0.11, 0.47);
        let v = f.eval(u).unwrap();
        assert!((f.eval(u + 1.0).unwrap() - v).norm() < 1e-11);
        assert!((f.eval(u + l.tau).unwrap() - v).norm() < 1e-11);
        assert!((f.eval_grouped(u).unwrap() - v).norm() < 1e-12);
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let l = lat();
        let f = EllipticFunction::new(
            l,
            c(0.5, 0.0),
            vec![
                Term { pole: c(0.3, 0.2), order: 1, coeff: c(1.0, 0.0) },
                Term { pole: c(0.6, 0.4), order: 1, coeff: c(-1.0, 0.0) },
                Term { pole: c(0.1, 0.8), order: 3, coeff: c(0.2, -0.1) },
            ],
        )
        .unwrap();
        let d = f.derivative();
        let u = c(0.41, 0.03);
        let h = 1e-5;
        let fd = (f.eval(u + h).unwrap() - f.eval(u - h).unwrap()) / (2.0 * h);
        assert!((fd - d.eval(u).unwrap()).norm() < 1e-5 * fd.norm().max(1.0));
    }

    #[test]
    fn zeros_equal_poles_and_sum_rule() {
        let l = lat();
        let (a, b) = (c(0.3, 0.2), c(0.7, 0.5));
        let f = EllipticFunction::zeta_difference(l, a, b, c(1.0, 0.0)).unwrap();
        let f = EllipticFunction { constant: c(0.4, -0.2), ..f };
        let zs = f.zeros().unwrap();
        assert_eq!(zs.total_multiplicity(), 2);
        // Abel: sum of zeros equals sum of poles modulo the lattice
        let s: C64 = zs.roots.iter().map(|r| r.z * r.multiplicity as f64).sum();
        assert!(l.same_point(s, a + b, 1e-8));
        for r in &zs.roots {
            assert!(f.eval(r.z).unwrap().norm() < 1e-9);
        }
    }

    #[test]
    fn residues_and_poles() {
        let l = lat();
        let f = EllipticFunction::zeta_difference(l, c(0.3, 0.2), c(-0.3, -0.2), c(2.0, 0.0)).unwrap();
        assert!((f.residue_at(c(1.3, 0.2)) - c(2.0, 0.0)).norm() < 1e-14);
        assert_eq!(f.poles().len(), 2);
        assert_eq!(f.derivative().poles().iter().map(|p| p.1).sum::<u32>(), 4);
    }
}
