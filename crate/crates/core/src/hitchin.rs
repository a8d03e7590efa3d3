//! Residuals of the Hitchin equations `F_B + [Phi, Phi*] = 0`,
//! `dbar_B Phi = 0` for pairs sampled on a grid, plus exact abelian and
//! Biquard-model configurations.
//!
//! Derivatives use a Cauchy-Riemann stencil: central differences along
//! several lattice directions, weighted so that `dbar` annihilates the
//! holomorphic Taylor terms up to order 13 (and `d` the antiholomorphic
//! ones). General smooth data sees a second-order stencil.

use std::path::Path;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::higgs::{HiggsField, ResidueData};
use crate::lattice::Lattice;
use crate::linalg::CMat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricFlag {
    Euclidean,
    Poincare,
}

impl std::str::FromStr for MetricFlag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(MetricFlag::Euclidean),
            "poincare" => Ok(MetricFlag::Poincare),
            _ => Err(Error::Parse(format!("metric must be euclidean or poincare, got {s:?}"))),
        }
    }
}

/// Sampling domain: sites `origin + i e1 + j e2`, `0 <= i, j < m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub origin: C64,
    pub e1: C64,
    pub e2: C64,
    pub m: usize,
    /// Wrap indices (a torus grid over one period parallelogram).
    pub periodic: bool,
    /// Lattice for torus distances when periodic.
    pub tau: Option<C64>,
    pub punctures: Vec<C64>,
    pub r0: f64,
    /// Keep only `|xi - origin_center| <= outer` when set (annuli).
    pub outer: Option<(C64, f64)>,
}

impl Domain {
    /// Fundamental domain of `Z + tau Z` minus discs around the punctures.
    pub fn torus(lattice: &Lattice, m: usize, punctures: Vec<C64>, r0: f64) -> Self {
        Domain {
            origin: C64::new(0.0, 0.0),
            e1: C64::new(1.0 / m as f64, 0.0),
            e2: lattice.tau / m as f64,
            m,
            periodic: true,
            tau: Some(lattice.tau),
            punctures,
            r0,
            outer: None,
        }
    }

    /// Square grid on the annulus `r0 <= |xi - center| <= outer`.
    pub fn annulus(center: C64, r0: f64, outer: f64, m: usize) -> Self {
        let h = 2.0 * outer / (m - 1) as f64;
        Domain {
            origin: center - C64::new(outer, outer),
            e1: C64::new(h, 0.0),
            e2: C64::new(0.0, h),
            m,
            periodic: false,
            tau: None,
            punctures: vec![center],
            r0,
            outer: Some((center, outer)),
        }
    }

    pub fn site(&self, i: usize, j: usize) -> C64 {
        self.origin + self.e1 * i as f64 + self.e2 * j as f64
    }

    fn distance(&self, a: C64, b: C64) -> f64 {
        match (self.periodic, self.tau) {
            (true, Some(tau)) => Lattice::new(tau).map(|l| l.torus_distance(a, b)).unwrap_or((a - b).norm()),
            _ => (a - b).norm(),
        }
    }

    pub fn retained(&self, i: usize, j: usize) -> bool {
        let x = self.site(i, j);
        if let Some((c, r)) = self.outer {
            if (x - c).norm() > r {
                return false;
            }
        }
        self.punctures.iter().all(|p| self.distance(x, *p) >= self.r0)
    }

    /// Neighbour index `(i + a, j + b)` or `None` off the grid.
    fn shift(&self, i: usize, j: usize, a: i64, b: i64) -> Option<usize> {
        let m = self.m as i64;
        let (mut x, mut y) = (i as i64 + a, j as i64 + b);
        if self.periodic {
            x = x.rem_euclid(m);
            y = y.rem_euclid(m);
        } else if x < 0 || y < 0 || x >= m || y >= m {
            return None;
        }
        Some(x as usize * self.m + y as usize)
    }
}

/// Directions, and weights giving `dbar f ~ sum_j w_j (f(x + v_j) - f(x - v_j)) / 2`.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub steps: Vec<(i64, i64)>,
    pub vectors: Vec<C64>,
    pub dbar: Vec<C64>,
    pub reach: f64,
}

impl Stencil {
    pub fn new(e1: C64, e2: C64) -> Result<Self> {
        // the ten shortest step vectors up to sign
        let mut cand = vec![];
        for a in -4i64..=4 {
            for b in 0i64..=4 {
                if b == 0 && a <= 0 {
                    continue;
                }
                let v = e1 * a as f64 + e2 * b as f64;
                cand.push(((a, b), v));
            }
        }
        cand.sort_by(|x, y| x.1.norm().partial_cmp(&y.1.norm()).unwrap());
        cand.truncate(10);
        let h = cand[0].1.norm();
        let u: Vec<C64> = cand.iter().map(|c| c.1 / h).collect();
        // rows: conj(u) normalisation, then u^n = 0 for odd n <= 13
        let orders = [1, 3, 5, 7, 9, 11, 13];
        let rows = 1 + orders.len();
        let a = nalgebra::DMatrix::<C64>::from_fn(rows, u.len(), |r, c| if r == 0 { u[c].conj() } else { u[c].powi(orders[r - 1]) });
        let mut rhs = nalgebra::DVector::<C64>::zeros(rows);
        rhs[0] = C64::new(1.0, 0.0);
        let svd = a.svd(true, true);
        let smax = svd.singular_values.max();
        if svd.singular_values.min() < 1e-10 * smax {
            return Err(Error::Stencil("degenerate stencil directions".into()));
        }
        let w = svd.solve(&rhs, 1e-14 * smax).map_err(|e| Error::Stencil(e.to_string()))?;
        Ok(Stencil {
            steps: cand.iter().map(|c| c.0).collect(),
            vectors: cand.iter().map(|c| c.1).collect(),
            dbar: w.iter().map(|x| x / h).collect(),
            reach: cand.last().unwrap().1.norm(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitchinConfiguration {
    pub k: usize,
    pub domain: Domain,
    /// Per site, `m * m` row-major; excluded sites hold zeros.
    pub mask: Vec<bool>,
    pub b_z: Vec<CMat>,
    pub b_zbar: Vec<CMat>,
    pub phi: Vec<CMat>,
    pub metric: MetricFlag,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub r1: f64,
    pub r2: f64,
    /// `1 + max |B|^2 + max |Phi|^2 + (max |B| + max |Phi|) / r0`.
    pub scale: f64,
    pub sites: usize,
}

impl Residual {
    pub fn passes(&self, tol: f64) -> bool {
        self.r1 < tol * self.scale && self.r2 < tol * self.scale
    }
}

impl HitchinConfiguration {
    /// Sample `B = b(xi) dxi - b(xi)^dagger dxibar` and `Phi = phi(xi) dxi`.
    pub fn from_fn(
        k: usize,
        domain: Domain,
        b: impl Fn(C64) -> Result<CMat>,
        phi: impl Fn(C64) -> Result<CMat>,
    ) -> Result<Self> {
        let m = domain.m;
        let mut cfg = HitchinConfiguration {
            k,
            mask: vec![false; m * m],
            b_z: vec![CMat::zeros(k); m * m],
            b_zbar: vec![CMat::zeros(k); m * m],
            phi: vec![CMat::zeros(k); m * m],
            domain,
            metric: MetricFlag::Euclidean,
        };
        for i in 0..m {
            for j in 0..m {
                if !cfg.domain.retained(i, j) {
                    continue;
                }
                let x = cfg.domain.site(i, j);
                let p = i * m + j;
                let bz = b(x)?;
                cfg.b_zbar[p] = bz.dagger().scale(C64::new(-1.0, 0.0));
                cfg.b_z[p] = bz;
                cfg.phi[p] = phi(x)?;
                cfg.mask[p] = true;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.domain.m;
        for v in [&self.b_z, &self.b_zbar, &self.phi] {
            if v.len() != m * m || v.iter().any(|a| a.n != self.k) {
                return Err(Error::Validation("site arrays do not match the grid".into()));
            }
        }
        if self.mask.len() != m * m {
            return Err(Error::Validation("mask does not match the grid".into()));
        }
        for p in 0..m * m {
            if !self.mask[p] {
                continue;
            }
            let (i, j) = (p / m, p % m);
            if !self.domain.retained(i, j) {
                return Err(Error::Radius(format!("site {:?} lies inside an excluded disc", self.domain.site(i, j))));
            }
            let skew = self.b_zbar[p].add(&self.b_z[p].dagger());
            let mag = 1.0 + self.b_z[p].frobenius();
            if skew.frobenius() > 1e-12 * mag {
                return Err(Error::Validation(format!("B is not anti-hermitian at site {p}")));
            }
            if self.phi[p].data.iter().chain(&self.b_z[p].data).any(|c| !(c.re.is_finite() && c.im.is_finite())) {
                return Err(Error::Validation(format!("non-finite field at site {p}")));
            }
        }
        Ok(())
    }

    pub fn with_metric(&self, metric: MetricFlag) -> Self {
        HitchinConfiguration { metric, ..self.clone() }
    }

    /// Conjugate by a constant unitary.
    pub fn conjugate(&self, u: &CMat) -> Self {
        let ud = u.dagger();
        let f = |v: &Vec<CMat>| v.iter().map(|a| u.mul(a).mul(&ud)).collect();
        HitchinConfiguration { b_z: f(&self.b_z), b_zbar: f(&self.b_zbar), phi: f(&self.phi), ..self.clone() }
    }

    /// Add i.i.d. gaussian noise of size `delta` to `B` (kept anti-hermitian)
    /// and to `Phi` on retained sites.
    pub fn perturb(&self, delta: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.clone();
        let k = self.k;
        let g = |rng: &mut ChaCha8Rng| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im) * delta
        };
        for p in 0..self.mask.len() {
            if !self.mask[p] {
                continue;
            }
            let mut db = CMat::zeros(k);
            let mut dp = CMat::zeros(k);
            for e in 0..k * k {
                db.data[e] = g(&mut rng);
                dp.data[e] = g(&mut rng);
            }
            out.b_z[p] = out.b_z[p].add(&db);
            out.b_zbar[p] = out.b_zbar[p].sub(&db.dagger());
            out.phi[p] = out.phi[p].add(&dp);
        }
        out
    }

    /// JSON header plus a little-endian `f64` blob (`path.json`, `path.bin`).
    pub fn dump(&self, path: &Path) -> Result<()> {
        let mut blob: Vec<u8> = Vec::new();
        for v in [&self.b_z, &self.b_zbar, &self.phi] {
            for a in v {
                for c in &a.data {
                    blob.extend_from_slice(&c.re.to_le_bytes());
                    blob.extend_from_slice(&c.im.to_le_bytes());
                }
            }
        }
        let header = serde_json::json!({
            "k": self.k,
            "domain": self.domain,
            "mask": self.mask,
            "metric": self.metric,
            "layout": "b_z, b_zbar, phi; sites row-major; entries row-major; re, im as f64 LE",
        });
        std::fs::write(path.with_extension("json"), serde_json::to_vec_pretty(&header)?)?;
        std::fs::write(path.with_extension("bin"), blob)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let header: serde_json::Value = serde_json::from_slice(&std::fs::read(path.with_extension("json"))?)?;
        let k = header["k"].as_u64().ok_or_else(|| Error::Parse("missing k".into()))? as usize;
        let domain: Domain = serde_json::from_value(header["domain"].clone())?;
        let mask: Vec<bool> = serde_json::from_value(header["mask"].clone())?;
        let metric: MetricFlag = serde_json::from_value(header["metric"].clone())?;
        let blob = std::fs::read(path.with_extension("bin"))?;
        let sites = domain.m * domain.m;
        if blob.len() != 3 * sites * k * k * 16 {
            return Err(Error::Parse("binary blob has the wrong length".into()));
        }
        let mut vals = blob.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap()));
        let mut read = || -> Vec<CMat> {
            (0..sites)
                .map(|_| CMat { n: k, data: (0..k * k).map(|_| C64::new(vals.next().unwrap(), vals.next().unwrap())).collect() })
                .collect()
        };
        let b_z = read();
        let b_zbar = read();
        let phi = read();
        let cfg = HitchinConfiguration { k, domain, mask, b_z, b_zbar, phi, metric };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Grid maxima of `|F_B + [Phi, Phi*]|` and `|dbar Phi + [B_zbar, Phi]|`, as
/// `dxi ^ dxibar` coefficients. Sites whose stencil leaves the retained set
/// are skipped.
pub fn residual(cfg: &HitchinConfiguration) -> Result<Residual> {
    let d = &cfg.domain;
    let st = Stencil::new(d.e1, d.e2)?;
    if st.reach >= d.r0 {
        return Err(Error::Stencil(format!(
            "stencil reach {:.4} is not below the puncture radius {:.4}: refine the grid",
            st.reach, d.r0
        )));
    }
    let m = d.m;
    let k = cfg.k;
    let (mut r1, mut r2, mut bmax, mut pmax) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut count = 0;
    let del = st.dbar.iter().map(|w| w.conj()).collect::<Vec<_>>();
    let mut nb = Vec::with_capacity(2 * st.steps.len());
    for p in 0..m * m {
        if !cfg.mask[p] {
            continue;
        }
        bmax = bmax.max(cfg.b_z[p].frobenius());
        pmax = pmax.max(cfg.phi[p].frobenius());
        let (i, j) = (p / m, p % m);
        nb.clear();
        let mut ok = true;
        for &(a, b) in &st.steps {
            match (d.shift(i, j, a, b), d.shift(i, j, -a, -b)) {
                (Some(x), Some(y)) if cfg.mask[x] && cfg.mask[y] => nb.push((x, y)),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        count += 1;
        let mut d_bzbar = CMat::zeros(k);
        let mut dbar_bz = CMat::zeros(k);
        let mut dbar_phi = CMat::zeros(k);
        for (s, &(x, y)) in nb.iter().enumerate() {
            for e in 0..k * k {
                d_bzbar.data[e] += del[s] * 0.5 * (cfg.b_zbar[x].data[e] - cfg.b_zbar[y].data[e]);
                dbar_bz.data[e] += st.dbar[s] * 0.5 * (cfg.b_z[x].data[e] - cfg.b_z[y].data[e]);
                dbar_phi.data[e] += st.dbar[s] * 0.5 * (cfg.phi[x].data[e] - cfg.phi[y].data[e]);
            }
        }
        let phi = &cfg.phi[p];
        let f = d_bzbar
            .sub(&dbar_bz)
            .add(&cfg.b_z[p].commutator(&cfg.b_zbar[p]))
            .add(&phi.commutator(&phi.dagger()));
        let g = dbar_phi.add(&cfg.b_zbar[p].commutator(phi));
        r1 = r1.max(f.frobenius());
        r2 = r2.max(g.frobenius());
    }
    if count == 0 {
        return Err(Error::Stencil("no site has its full stencil inside the retained region".into()));
    }
    let scale = 1.0 + bmax * bmax + pmax * pmax + (bmax + pmax) / d.r0;
    Ok(Residual { r1, r2, scale, sites: count })
}

/// Residuals under both metric flags agree bit for bit: the equations only
/// involve 2-form coefficients.
pub fn conformal_flag_check(cfg: &HitchinConfiguration) -> Result<bool> {
    let a = residual(&cfg.with_metric(MetricFlag::Euclidean))?;
    let b = residual(&cfg.with_metric(MetricFlag::Poincare))?;
    Ok(a.r1.to_bits() == b.r1.to_bits() && a.r2.to_bits() == b.r2.to_bits())
}

/// `U(1)` solution: constant flat `B = b dxi - conj(b) dxibar` and the rank-one
/// Higgs field `c + eps (zeta(xi - xi0) - zeta(xi + xi0))`.
pub fn abelian_solution(
    lattice: Lattice,
    xi0: C64,
    c: C64,
    epsilon: C64,
    b: C64,
    m: usize,
    r0: f64,
) -> Result<(HitchinConfiguration, HiggsField)> {
    if !(r0 > 0.0) {
        return Err(Error::Radius(format!("puncture radius must be positive, got {r0}")));
    }
    let field = HiggsField::build(
        1,
        lattice,
        xi0,
        ResidueData::symmetric(vec![epsilon], vec![C64::new(1.0, 0.0)]),
        CMat { n: 1, data: vec![c] },
        None,
    )?;
    let poles = field.pole_points();
    let min_period = 1f64.min(lattice.tau.norm()).min((lattice.tau - 1.0).norm()).min((lattice.tau + 1.0).norm());
    if poles.len() == 2 && lattice.torus_distance(poles[0], poles[1]) < 2.0 * r0 || r0 >= 0.5 * min_period {
        return Err(Error::Radius(format!("puncture discs of radius {r0} overlap or cover the torus")));
    }
    let domain = Domain::torus(&lattice, m, poles, r0);
    let cfg = HitchinConfiguration::from_fn(1, domain, |_| Ok(CMat { n: 1, data: vec![b] }), |x| field.eval(x))?;
    Ok((cfg, field))
}

/// Biquard model on an annulus: `B = b dxi/xi - b^dagger dxibar/xibar`,
/// `Phi = phi0 dxi/xi`.
pub fn biquard_model(b: &CMat, phi0: &CMat, r0: f64, outer: f64, m: usize) -> Result<HitchinConfiguration> {
    let k = b.n;
    if phi0.n != k {
        return Err(Error::Validation("b and phi0 have different sizes".into()));
    }
    if !(r0 > 0.0 && outer > r0) {
        return Err(Error::Radius(format!("need 0 < r0 < outer, got {r0}, {outer}")));
    }
    let domain = Domain::annulus(C64::new(0.0, 0.0), r0, outer, m);
    HitchinConfiguration::from_fn(k, domain, |x| Ok(b.scale(1.0 / x)), |x| Ok(phi0.scale(1.0 / x)))
}

pub fn residual_json(cfg: &HitchinConfiguration, r: &Residual) -> serde_json::Value {
    serde_json::json!({
        "k": cfg.k,
        "grid": cfg.domain.m,
        "r0": cfg.domain.r0,
        "metric": cfg.metric,
        "r1": r.r1,
        "r2": r.r2,
        "scale": r.scale,
        "sites": r.sites,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn lat() -> Lattice {
        Lattice::new(c(0.0, 1.0)).unwrap()
    }

    fn diag(a: C64, b: C64) -> CMat {
        CMat { n: 2, data: vec![a, c(0.0, 0.0), c(0.0, 0.0), b] }
    }

    #[test]
    fn stencil_exact_on_holomorphic_second_order_otherwise() {
        let x = c(0.2, -0.1);
        let apply = |st: &Stencil, f: &dyn Fn(C64) -> C64| -> C64 {
            st.vectors.iter().zip(&st.dbar).map(|(v, w)| w * 0.5 * (f(x + v) - f(x - v))).sum()
        };
        let st = Stencil::new(c(0.01, 0.0), c(0.003, 0.01)).unwrap();
        let hol = |z: C64| z.powi(5) + 1.0 / (z - c(0.5, 0.5));
        assert!(apply(&st, &hol).norm() < 1e-11);
        // dbar (z conj(z)^2) = 2 z conj(z)
        let mixed = |z: C64| z * z.conj() * z.conj();
        let exact = 2.0 * x * x.conj();
        let e1 = (apply(&st, &mixed) - exact).norm();
        let fine = Stencil::new(c(0.005, 0.0), c(0.0015, 0.005)).unwrap();
        let e2 = (apply(&fine, &mixed) - exact).norm();
        assert!(e1 / e2 > 3.5 && e1 / e2 < 4.5, "{e1} {e2}");
    }

    #[test]
    fn abelian_solution_passes() {
        for b in [c(0.0, 0.0), c(0.4, -1.3)] {
            let (cfg, field) = abelian_solution(lat(), c(0.3, 0.25), c(0.5, 0.1), c(0.7, 0.2), b, 256, 0.08).unwrap();
            let r = residual(&cfg).unwrap();
            assert!(r.passes(1e-10), "{r:?}");
            assert!((field.r_plus().trace() + field.r_minus().trace()).norm() < 1e-14);
            assert!(conformal_flag_check(&cfg).unwrap());
        }
    }

    #[test]
    fn biquard_commuting_model_passes() {
        let b = diag(c(0.3, 0.2), c(-0.1, 0.5));
        let phi0 = diag(c(1.0, -0.5), c(-0.7, 0.2));
        let cfg = biquard_model(&b, &phi0, 0.08, 0.5, 256).unwrap();
        let r = residual(&cfg).unwrap();
        assert!(r.passes(1e-9), "{r:?}");
        assert!(conformal_flag_check(&cfg).unwrap());
    }

    #[test]
    fn noncommuting_model_reports_residual() {
        let b = diag(c(0.3, 0.2), c(-0.1, 0.5));
        let phi0 = CMat { n: 2, data: vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)] };
        let cfg = biquard_model(&b, &phi0, 0.08, 0.5, 128).unwrap();
        let r = residual(&cfg).unwrap();
        assert!(!r.passes(1e-6));
    }

    #[test]
    fn perturbation_response_is_linear() {
        let (cfg, _) = abelian_solution(lat(), c(0.3, 0.25), c(0.5, 0.1), c(0.7, 0.2), c(0.1, 0.0), 128, 0.1).unwrap();
        let r: Vec<f64> = [1e-4, 1e-3, 1e-2].iter().map(|d| residual(&cfg.perturb(*d, 11)).unwrap().r1).collect();
        assert!((r[1] / r[0] / 10.0 - 1.0).abs() < 0.2);
        assert!((r[2] / r[1] / 10.0 - 1.0).abs() < 0.2);
        assert!(conformal_flag_check(&cfg.perturb(1e-3, 11)).unwrap());
    }

    #[test]
    fn gauge_covariance() {
        let b = diag(c(0.3, 0.2), c(-0.1, 0.5));
        let phi0 = CMat { n: 2, data: vec![c(0.2, 0.0), c(1.0, 0.0), c(0.0, 0.3), c(-0.4, 0.0)] };
        let cfg = biquard_model(&b, &phi0, 0.1, 0.5, 96).unwrap();
        let th: f64 = 0.7;
        let u = CMat {
            n: 2,
            data: vec![c(th.cos(), 0.0), c(0.0, th.sin()), c(0.0, th.sin()), c(th.cos(), 0.0)],
        };
        let (a, z) = (residual(&cfg).unwrap(), residual(&cfg.conjugate(&u)).unwrap());
        assert!((a.r1 - z.r1).abs() < 1e-12 * (1.0 + a.r1));
        assert!((a.r2 - z.r2).abs() < 1e-12 * (1.0 + a.r2));
        assert!(conformal_flag_check(&cfg).unwrap());
    }

    /// `g = exp(i t1 s3) exp(i t2 s1)` applied to a constant commuting pair:
    /// an exact smooth nonabelian solution.
    fn gauge_rotated(m: usize) -> HitchinConfiguration {
        let l = lat();
        let tau = l.tau;
        let i = c(0.0, 1.0);
        let coords = move |x: C64| {
            let a = (tau.conj() * x - tau * x.conj()) / (tau.conj() - tau);
            let b = (x - x.conj()) / (tau - tau.conj());
            (a.re, b.re)
        };
        let del = move |ta: f64, tb: f64| ta * tau.conj() / (tau.conj() - tau) + tb / (tau - tau.conj());
        let s1 = CMat { n: 2, data: vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)] };
        let s3 = diag(c(1.0, 0.0), c(-1.0, 0.0));
        let expi = move |t: f64, s: &CMat| CMat::identity(2).scale(c(t.cos(), 0.0)).add(&s.scale(i * t.sin()));
        let phi0 = diag(c(0.4, 0.1), c(-0.4, -0.1));
        let (s1b, s3b) = (s1.clone(), s3.clone());
        let fields = move |x: C64| {
            let (a, b) = coords(x);
            let w = 2.0 * PI;
            let t1 = 0.3 * (w * a).sin() * (w * b).cos();
            let t2 = 0.2 * (w * b).sin() + 0.1 * (w * (a + b)).cos();
            let d1 = del(0.3 * w * (w * a).cos() * (w * b).cos(), -0.3 * w * (w * a).sin() * (w * b).sin());
            let d2 = del(-0.1 * w * (w * (a + b)).sin(), 0.2 * w * (w * b).cos() - 0.1 * w * (w * (a + b)).sin());
            let r = expi(t2, &s1b);
            let g = expi(t1, &s3b).mul(&r);
            let bz = r.dagger().mul(&s3b.scale(i * d1)).mul(&r).add(&s1b.scale(i * d2));
            (bz, g.dagger().mul(&phi0).mul(&g))
        };
        let f2 = fields.clone();
        let domain = Domain::torus(&l, m, vec![c(0.5, 0.5)], 0.1);
        HitchinConfiguration::from_fn(2, domain, move |x| Ok(fields(x).0), move |x| Ok(f2(x).1)).unwrap()
    }

    #[test]
    fn refinement_is_second_order_on_smooth_solution() {
        let coarse = residual(&gauge_rotated(64)).unwrap();
        let fine = residual(&gauge_rotated(128)).unwrap();
        assert!(coarse.r1 / fine.r1 >= 3.0, "{} -> {}", coarse.r1, fine.r1);
        assert!(fine.r1 < 1e-3 * fine.scale);
    }

    #[test]
    fn coarse_grid_is_a_stencil_error() {
        let r = abelian_solution(lat(), c(0.3, 0.25), c(0.5, 0.1), c(0.7, 0.2), c(0.0, 0.0), 16, 0.08);
        let (cfg, _) = r.unwrap();
        assert!(matches!(residual(&cfg), Err(Error::Stencil(_))));
        assert!(matches!(
            abelian_solution(lat(), c(0.3, 0.25), c(0.5, 0.1), c(0.7, 0.2), c(0.0, 0.0), 64, 0.0),
            Err(Error::Radius(_))
        ));
    }

    #[test]
    fn dump_and_load_roundtrip() {
        let b = diag(c(0.3, 0.2), c(-0.1, 0.5));
        let cfg = biquard_model(&b, &b, 0.1, 0.5, 24).unwrap().with_metric(MetricFlag::Poincare);
        let dir = std::env::temp_dir().join(format!("hsk-hitchin-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg");
        cfg.dump(&path).unwrap();
        assert_eq!(HitchinConfiguration::load(&path).unwrap(), cfg);
        std::fs::remove_dir_all(&dir).ok();
    }
}
