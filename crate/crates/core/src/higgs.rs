//! Meromorphic Higgs fields on the dual torus with simple poles at `±xi0`.
//!
//! A field is `Phi(xi) = C + R+ zeta(xi - xi0) + R- zeta(xi + xi0)` with
//! constant `C` and rank-one residues `R± = u± v±^T`. Double periodicity
//! forces `R- = -R+` entrywise, so `Phi` is automatically even in `xi`.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::elliptic::{EllipticFunction, Term};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, TorusPoint};
use crate::linalg::{peval, CMat};

/// Rank-one residue dyads `R± = u± v±^T`. The order-2 variant carries a
/// second dyad at the single pole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueData {
    pub u_plus: Vec<C64>,
    pub v_plus: Vec<C64>,
    pub u_minus: Vec<C64>,
    pub v_minus: Vec<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second: Option<(Vec<C64>, Vec<C64>)>,
}

impl ResidueData {
    /// `R+ = u v^T`, `R- = -u v^T`.
    pub fn symmetric(u: Vec<C64>, v: Vec<C64>) -> Self {
        let um = u.iter().map(|x| -x).collect();
        ResidueData { u_plus: u, v_plus: v.clone(), u_minus: um, v_minus: v, second: None }
    }

    pub fn r_plus(&self) -> CMat {
        let mut m = CMat::outer(&self.u_plus, &self.v_plus);
        if let Some((u, v)) = &self.second {
            m = m.add(&CMat::outer(u, v));
        }
        m
    }

    pub fn r_minus(&self) -> CMat {
        CMat::outer(&self.u_minus, &self.v_minus)
    }
}

/// How the entries are put together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldKind {
    /// Simple poles at `±xi0` with constant regular part.
    Standard,
    /// `Phi = wp(xi - base)` for a 2-torsion `base`; rank one.
    WeierstrassGraph { base: C64 },
    /// Arbitrary elliptic entries, no pole-structure validation. Used to
    /// build counterexamples.
    Relaxed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HiggsField {
    pub k: usize,
    pub lattice: Lattice,
    pub xi0: TorusPoint,
    pub epsilon: C64,
    pub residues: ResidueData,
    pub regular: CMat,
    pub seed: Option<u64>,
    pub kind: FieldKind,
    /// Row-major `k x k` entries.
    pub entries: Vec<EllipticFunction>,
    pub su2_symmetric: bool,
    r_plus: CMat,
    r_minus: CMat,
}

fn cz() -> C64 {
    C64::new(0.0, 0.0)
}

/// Sign `s` with `zeta(u - a) - zeta(u + a) + 2 zeta(a) = s wp'(a) / (wp(u) - wp(a))`,
/// measured on the given lattice.
pub fn zeta_wp_sign(lattice: &Lattice) -> Result<f64> {
    let a = C64::new(0.23, 0.0) + 0.17 * lattice.tau;
    let mut votes = [0usize; 2];
    for j in 0..7 {
        let u = C64::new(0.11 + 0.09 * j as f64, 0.0) + (0.31 + 0.05 * j as f64) * lattice.tau;
        let lhs = lattice.zeta(u - a)? - lattice.zeta(u + a)? + 2.0 * lattice.zeta(a)?;
        let rhs = lattice.wp_prime(a)? / (lattice.wp(u)? - lattice.wp(a)?);
        let tol = 1e-9 * (1.0 + lhs.norm());
        if (lhs - rhs).norm() < tol {
            votes[0] += 1;
        } else if (lhs + rhs).norm() < tol {
            votes[1] += 1;
        }
    }
    match votes {
        [7, 0] => Ok(1.0),
        [0, 7] => Ok(-1.0),
        _ => Err(Error::Numerical(format!("zeta/wp identity inconclusive: {votes:?}"))),
    }
}

impl HiggsField {
    /// Validate inputs and assemble the entries.
    pub fn build(
        k: usize,
        lattice: Lattice,
        xi0: C64,
        residues: ResidueData,
        regular: CMat,
        seed: Option<u64>,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::Validation("rank k must be positive".into()));
        }
        if regular.n != k {
            return Err(Error::Validation(format!("regular part is {}x{}, expected {k}x{k}", regular.n, regular.n)));
        }
        for v in [&residues.u_plus, &residues.v_plus, &residues.u_minus, &residues.v_minus] {
            if v.len() != k {
                return Err(Error::Validation(format!("residue vector has length {}, expected {k}", v.len())));
            }
        }
        let order = lattice.point_order(xi0, 1e-8);
        if order == 1 {
            return Err(Error::Validation("xi0 is the identity of the dual torus".into()));
        }
        let rp = residues.r_plus();
        let rm = residues.r_minus();
        let scale = 1.0 + rp.frobenius();
        if order == 2 {
            // One pole: its residue alone must vanish entrywise.
            let r = rp.add(&rm);
            if r.frobenius() > 1e-10 * scale {
                return Err(Error::Validation(
                    "xi0 has order 2, so each entry has a single simple pole whose residue must vanish".into(),
                ));
            }
        } else {
            if residues.second.is_some() {
                return Err(Error::Validation("a second dyad is only allowed when xi0 has order 2".into()));
            }
            let s = rp.add(&rm);
            if s.frobenius() > 1e-10 * scale {
                return Err(Error::Validation(format!(
                    "entrywise residue sum is nonzero (norm {:e})",
                    s.frobenius()
                )));
            }
        }
        let max_rank = if order == 2 { 2 } else { 1 };
        for (name, r) in [("R+", &rp), ("R-", &rm)] {
            if r.rank(1e-10) > max_rank {
                return Err(Error::Validation(format!("{name} has rank above {max_rank}")));
            }
        }
        let eps = dot(&residues.v_plus, &residues.u_plus);
        let eps_m = dot(&residues.v_minus, &residues.u_minus);
        if order != 2 && (eps.norm() <= 1e-6 || eps_m.norm() <= 1e-6) {
            return Err(Error::Validation("residue is nilpotent (v^T u = 0), not semi-simple".into()));
        }
        let mut entries = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                let mut terms = vec![];
                let (a, b) = (rp.get(i, j), rm.get(i, j));
                if a.norm() > 0.0 {
                    terms.push(Term { pole: xi0, order: 1, coeff: a });
                }
                if b.norm() > 0.0 {
                    terms.push(Term { pole: -xi0, order: 1, coeff: b });
                }
                entries.push(EllipticFunction::new(lattice, regular.get(i, j), terms)?);
            }
        }
        let mut field = HiggsField {
            k,
            lattice,
            xi0: TorusPoint::new(xi0),
            epsilon: eps,
            residues,
            regular,
            seed,
            kind: FieldKind::Standard,
            entries,
            su2_symmetric: false,
            r_plus: rp,
            r_minus: rm,
        };
        field.su2_symmetric = field.check_even(24, 1e-9)?;
        Ok(field)
    }

    /// Reproducible generic field: residue `u v^T` with `v^T u = epsilon`
    /// and a random constant regular part.
    pub fn random(k: usize, lattice: Lattice, xi0: C64, epsilon: C64, seed: u64) -> Result<Self> {
        if lattice.point_order(xi0, 1e-8) == 2 {
            return Err(Error::Validation("random fields need xi0 not of order 2; use ResidueData with two dyads".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut normal = || C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
        let (u, v) = loop {
            let u: Vec<C64> = (0..k).map(|_| normal()).collect();
            let v: Vec<C64> = (0..k).map(|_| normal()).collect();
            let d = dot(&v, &u);
            if d.norm() > 1e-3 {
                let s = epsilon / d;
                break (u, v.iter().map(|x| x * s).collect::<Vec<_>>());
            }
        };
        let mut c = CMat::zeros(k);
        for x in c.data.iter_mut() {
            *x = normal();
        }
        Self::build(k, lattice, xi0, ResidueData::symmetric(u, v), c, Some(seed))
    }

    /// The rank-one field `Phi = wp(xi - base)`, base a point of order <= 2.
    pub fn weierstrass_graph(lattice: Lattice, base: C64) -> Result<Self> {
        if lattice.point_order(base, 1e-8) == 0 {
            return Err(Error::Validation("the graph base point must have order 1 or 2".into()));
        }
        let entry = EllipticFunction::wp_shift(lattice, base, C64::new(1.0, 0.0))?;
        let mut f = HiggsField {
            k: 1,
            lattice,
            xi0: TorusPoint::new(base),
            epsilon: cz(),
            residues: ResidueData::symmetric(vec![cz()], vec![cz()]),
            regular: CMat::zeros(1),
            seed: None,
            kind: FieldKind::WeierstrassGraph { base },
            entries: vec![entry],
            su2_symmetric: false,
            r_plus: CMat::zeros(1),
            r_minus: CMat::zeros(1),
        };
        f.su2_symmetric = f.check_even(24, 1e-9)?;
        Ok(f)
    }

    /// Copy with elliptic functions added to chosen entries and no
    /// pole-structure validation.
    pub fn relaxed(&self, extra: &[(usize, usize, EllipticFunction)]) -> Result<Self> {
        let mut f = self.clone();
        for (i, j, e) in extra {
            if *i >= self.k || *j >= self.k {
                return Err(Error::Validation("entry index out of range".into()));
            }
            f.entries[i * self.k + j] = f.entries[i * self.k + j].add(e);
        }
        f.kind = FieldKind::Relaxed;
        f.su2_symmetric = f.check_even(24, 1e-9)?;
        Ok(f)
    }

    /// Poles of the entries (as representatives).
    pub fn pole_points(&self) -> Vec<C64> {
        match &self.kind {
            FieldKind::WeierstrassGraph { base } => vec![*base],
            FieldKind::Standard => {
                if self.lattice.point_order(self.xi0.z, 1e-8) == 2 {
                    vec![self.xi0.z]
                } else {
                    vec![self.xi0.z, -self.xi0.z]
                }
            }
            FieldKind::Relaxed => {
                let mut out: Vec<C64> = vec![];
                for e in &self.entries {
                    for (p, _) in e.poles() {
                        if !out.iter().any(|q| self.lattice.same_point(*q, p, 1e-10)) {
                            out.push(p);
                        }
                    }
                }
                out
            }
        }
    }

    pub fn r_plus(&self) -> &CMat {
        &self.r_plus
    }

    pub fn r_minus(&self) -> &CMat {
        &self.r_minus
    }

    /// `Phi(xi)`.
    pub fn eval(&self, xi: C64) -> Result<CMat> {
        match self.kind {
            FieldKind::Standard => {
                let zp = self.lattice.zeta(xi - self.xi0.z)?;
                let zm = self.lattice.zeta(xi + self.xi0.z)?;
                Ok(self.regular.add(&self.r_plus.scale(zp)).add(&self.r_minus.scale(zm)))
            }
            _ => {
                let mut m = CMat::zeros(self.k);
                for (idx, e) in self.entries.iter().enumerate() {
                    m.data[idx] = e.eval_grouped(xi)?;
                }
                Ok(m)
            }
        }
    }

    /// `(Phi(xi), dPhi/dxi)`.
    pub fn eval_with_derivative(&self, xi: C64) -> Result<(CMat, CMat)> {
        match &self.kind {
            FieldKind::Standard => {
                let (pp, _, zp) = self.lattice.eval_all(xi - self.xi0.z)?;
                let (pm, _, zm) = self.lattice.eval_all(xi + self.xi0.z)?;
                let phi = self.regular.add(&self.r_plus.scale(zp)).add(&self.r_minus.scale(zm));
                let d = self.r_plus.scale(-pp).add(&self.r_minus.scale(-pm));
                Ok((phi, d))
            }
            FieldKind::WeierstrassGraph { base } => {
                let (p, dp, _) = self.lattice.eval_all(xi - base)?;
                Ok((CMat { n: 1, data: vec![p] }, CMat { n: 1, data: vec![dp] }))
            }
            FieldKind::Relaxed => {
                let mut m = CMat::zeros(self.k);
                let mut d = CMat::zeros(self.k);
                for (idx, e) in self.entries.iter().enumerate() {
                    m.data[idx] = e.eval_grouped(xi)?;
                    d.data[idx] = e.derivative().eval_grouped(xi)?;
                }
                Ok((m, d))
            }
        }
    }

    /// `det(Phi(xi) - w)`, the defining function of the spectral curve.
    pub fn det_shift(&self, xi: C64, w: C64) -> Result<C64> {
        Ok(self.eval(xi)?.shift(w).det())
    }

    /// Coefficients of `det(w - Phi(xi))`, ascending in `w`.
    pub fn char_poly_at(&self, xi: C64) -> Result<Vec<C64>> {
        Ok(self.eval(xi)?.char_poly())
    }

    pub fn char_coeffs(&self) -> CharCoeffs<'_> {
        CharCoeffs { field: self }
    }

    /// `a_j(-xi) = a_j(xi)` at `n` deterministic sample points.
    pub fn check_even(&self, n: usize, tol: f64) -> Result<bool> {
        let cc = self.char_coeffs();
        for s in 0..n {
            let t = s as f64 / n as f64;
            let xi = C64::new(0.137 + 0.61 * t, 0.0) + (0.093 + 0.83 * (t * 7.0).fract()) * self.lattice.tau;
            if self.pole_points().iter().any(|p| self.lattice.torus_distance(*p, xi) < 0.05)
                || self.pole_points().iter().any(|p| self.lattice.torus_distance(*p, -xi) < 0.05)
            {
                continue;
            }
            for j in 1..=self.k {
                let (a, b) = (cc.eval(j, xi)?, cc.eval(j, -xi)?);
                if (a - b).norm() > tol * (1.0 + a.norm()) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn to_doc(&self) -> HiggsDoc {
        HiggsDoc {
            k: self.k,
            tau: self.lattice.tau,
            xi0: self.xi0.z,
            epsilon: self.epsilon,
            residues: self.residues.clone(),
            regular: self.regular.to_rows(),
            seed: self.seed,
            kind: self.kind.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    pub fn from_doc(doc: &HiggsDoc) -> Result<Self> {
        let lattice = Lattice::new(doc.tau)?;
        match &doc.kind {
            FieldKind::Standard => {
                let f = Self::build(doc.k, lattice, doc.xi0, doc.residues.clone(), CMat::from_rows(&doc.regular)?, doc.seed)?;
                if (f.epsilon - doc.epsilon).norm() > 1e-9 * (1.0 + doc.epsilon.norm()) {
                    return Err(Error::Validation("stored epsilon disagrees with v^T u".into()));
                }
                Ok(f)
            }
            FieldKind::WeierstrassGraph { base } => Self::weierstrass_graph(lattice, *base),
            FieldKind::Relaxed => Err(Error::Validation("relaxed fields are not serializable".into())),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: HiggsDoc = serde_json::from_str(s)?;
        Self::from_doc(&doc)
    }
}

/// JSON layout of a field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiggsDoc {
    pub k: usize,
    pub tau: C64,
    pub xi0: C64,
    pub epsilon: C64,
    pub residues: ResidueData,
    pub regular: Vec<Vec<C64>>,
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub kind: FieldKind,
}

/// The coefficients `a_j` of `w^k + a_1 w^(k-1) + ... + a_k = det(w - Phi)`.
pub struct CharCoeffs<'a> {
    field: &'a HiggsField,
}

impl CharCoeffs<'_> {
    pub fn eval(&self, j: usize, xi: C64) -> Result<C64> {
        if j == 0 || j > self.field.k {
            return Err(Error::Domain(format!("a_{j} does not exist for k = {}", self.field.k)));
        }
        let p = self.field.char_poly_at(xi)?;
        Ok(p[self.field.k - j])
    }

    pub fn all(&self, xi: C64) -> Result<Vec<C64>> {
        let p = self.field.char_poly_at(xi)?;
        Ok((1..=self.field.k).map(|j| p[self.field.k - j]).collect())
    }

    /// `det(w - Phi(xi))` from the coefficients.
    pub fn poly_value(&self, xi: C64, w: C64) -> Result<C64> {
        Ok(peval(&self.field.char_poly_at(xi)?, w))
    }
}

pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::argument::{find_zeros_torus, ZeroOptions};
    use std::f64::consts::PI;

    #[test]
    fn random_rejects_order_two_pole() {
        let lat = Lattice::new(C64::new(0.0, 1.0)).unwrap();
        for z in [C64::new(0.5, 0.0), C64::new(0.0, 0.5), C64::new(0.5, 0.5)] {
            assert!(matches!(HiggsField::random(2, lat, z, C64::new(1.0, 0.0), 1), Err(Error::Validation(_))));
        }
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn lat() -> Lattice {
        Lattice::new(c(0.0, 2.0)).unwrap()
    }

    fn xi0() -> C64 {
        c(0.3, 0.4)
    }

    #[test]
    fn zeta_identity_sign_is_plus() {
        let l = lat();
        assert_eq!(zeta_wp_sign(&l).unwrap(), 1.0);
        // pointwise at many points, independent of the sign routine
        let a = xi0();
        for j in 0..100 {
            let u = c(0.01 + 0.0097 * j as f64, 0.05 + 0.019 * j as f64);
            if l.torus_distance(u, a) < 0.05 || l.torus_distance(u, -a) < 0.05 || l.torus_distance(u, c(0.0, 0.0)) < 0.05 {
                continue;
            }
            let lhs = l.zeta(u - a).unwrap() - l.zeta(u + a).unwrap() + 2.0 * l.zeta(a).unwrap();
            let rhs = l.wp_prime(a).unwrap() / (l.wp(u).unwrap() - l.wp(a).unwrap());
            assert!((lhs - rhs).norm() < 1e-9 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn k1_field_is_even_with_opposite_residues() {
        let l = lat();
        let eps = c(1.0, 0.0);
        let f = HiggsField::build(1, l, xi0(), ResidueData::symmetric(vec![eps], vec![c(1.0, 0.0)]), CMat { n: 1, data: vec![c(0.2, 0.1)] }, None)
            .unwrap();
        assert!(f.su2_symmetric);
        let e = &f.entries[0];
        assert!((e.residue_at(xi0()) - eps).norm() < 1e-15);
        assert!((e.residue_at(-xi0()) + eps).norm() < 1e-15);
        let x = c(0.17, 0.83);
        assert!((f.eval(x).unwrap().data[0] - f.eval(-x).unwrap().data[0]).norm() < 1e-10);
        assert!((f.eval(x + 1.0 + l.tau).unwrap().data[0] - f.eval(x).unwrap().data[0]).norm() < 1e-9);
    }

    #[test]
    fn lone_zeta_is_rejected() {
        let l = lat();
        let r = ResidueData {
            u_plus: vec![c(1.0, 0.0)],
            v_plus: vec![c(1.0, 0.0)],
            u_minus: vec![c(0.0, 0.0)],
            v_minus: vec![c(0.0, 0.0)],
            second: None,
        };
        let e = HiggsField::build(1, l, xi0(), r, CMat::zeros(1), None);
        assert!(matches!(e, Err(Error::Validation(_))));
    }

    #[test]
    fn identity_xi0_is_rejected() {
        let e = HiggsField::random(2, lat(), c(1.0, 2.0), c(1.0, 0.0), 3);
        assert!(matches!(e, Err(Error::Validation(_))));
    }

    /// Singular values of a 2x2 complex matrix in closed form.
    fn sv2(m: &CMat) -> (f64, f64) {
        let f2 = m.frobenius().powi(2);
        let d = m.det().norm();
        let disc = (f2 * f2 - 4.0 * d * d).max(0.0).sqrt();
        (((f2 + disc) / 2.0).sqrt(), ((f2 - disc) / 2.0).max(0.0).sqrt())
    }

    #[test]
    fn k2_seed7_residues_rank_one() {
        let f = HiggsField::random(2, lat(), xi0(), c(1.0, 0.0), 7).unwrap();
        for r in [f.r_plus(), f.r_minus()] {
            let (s1, s2) = sv2(r);
            assert!(s1 > 1e-6 && s2 < 1e-12 * s1);
        }
        assert!((f.r_plus().trace() + f.r_minus().trace()).norm() < 1e-12);
        assert!((f.r_plus().trace() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn laurent_limit_at_xi0() {
        let f = HiggsField::random(2, lat(), xi0(), c(1.0, 0.0), 11).unwrap();
        let mut prev = f64::INFINITY;
        for j in 1..5 {
            let r = 10f64.powi(-j);
            let xi = xi0() + C64::from_polar(r, 0.7);
            let e = f.eval(xi).unwrap().scale(xi - xi0()).sub(f.r_plus()).frobenius();
            assert!(e < prev);
            // linear in r
            assert!(e / r < 50.0);
            prev = e;
        }
    }

    #[test]
    fn char_coeffs_residue_of_a1() {
        let f = HiggsField::random(2, lat(), xi0(), c(0.7, 0.2), 5).unwrap();
        let cc = f.char_coeffs();
        let n = 256;
        let rad = 0.05;
        let mut s = c(0.0, 0.0);
        for j in 0..n {
            let th = 2.0 * PI * (j as f64 + 0.5) / n as f64;
            let z = xi0() + C64::from_polar(rad, th);
            let dz = C64::from_polar(rad, th) * c(0.0, 2.0 * PI / n as f64);
            s += cc.eval(1, z).unwrap() * dz;
        }
        let res = s / c(0.0, 2.0 * PI);
        assert!((res + f.epsilon).norm() < 1e-9, "{res}");
        // second-order coefficient of a_2 vanishes for rank-one residue
        let mut s2 = c(0.0, 0.0);
        for j in 0..n {
            let th = 2.0 * PI * (j as f64 + 0.5) / n as f64;
            let z = xi0() + C64::from_polar(rad, th);
            let dz = C64::from_polar(rad, th) * c(0.0, 2.0 * PI / n as f64);
            s2 += cc.eval(2, z).unwrap() * (z - xi0()) * dz;
        }
        assert!((s2 / c(0.0, 2.0 * PI)).norm() < 1e-9);
    }

    #[test]
    fn char_coeffs_k1_and_periodicity() {
        let f = HiggsField::random(1, lat(), xi0(), c(1.0, 0.0), 2).unwrap();
        let x = c(0.21, 0.37);
        assert!((f.char_coeffs().eval(1, x).unwrap() + f.eval(x).unwrap().data[0]).norm() < 1e-13);
        let g = HiggsField::random(3, lat(), xi0(), c(1.0, 0.0), 2).unwrap();
        for j in 1..=3 {
            let a = g.char_coeffs().eval(j, x).unwrap();
            let b = g.char_coeffs().eval(j, x + g.lattice.tau).unwrap();
            assert!((a - b).norm() < 1e-8 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn det_shift_has_two_zeros() {
        for (k, seed) in [(1usize, 1u64), (2, 4), (3, 9)] {
            let f = HiggsField::random(k, lat(), xi0(), c(1.0, 0.0), seed).unwrap();
            for j in 0..10 {
                let w = c(-1.5 + 0.31 * j as f64, 0.7 - 0.17 * j as f64);
                let g = |xi: C64| f.det_shift(xi, w);
                let zs = find_zeros_torus(&g, &f.lattice, &f.pole_points(), ZeroOptions::default()).unwrap();
                assert_eq!(zs.total_multiplicity(), 2, "k={k} w={w}");
                assert!(zs.poles.iter().all(|p| p.1 == 1));
            }
        }
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let f = HiggsField::random(3, lat(), xi0(), c(1.0, 0.0), 42).unwrap();
        let s = f.to_json().unwrap();
        let g = HiggsField::from_json(&s).unwrap();
        assert_eq!(f.to_doc(), g.to_doc());
        assert_eq!(s, g.to_json().unwrap());
    }

    #[test]
    fn graph_field_is_even() {
        let l = lat();
        for b in l.half_periods() {
            let f = HiggsField::weierstrass_graph(l, b).unwrap();
            assert!(f.su2_symmetric);
        }
        assert!(HiggsField::weierstrass_graph(l, xi0()).is_err());
    }
}
