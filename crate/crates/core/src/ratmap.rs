//! Rational maps `P^1 -> T^/±` in the `wp` chart, fitted from spectral
//! curves and used to rebuild them.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::argument::{find_zeros_torus_with_poles, ZeroOptions};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{peval, poly_roots};
use crate::spectral::SpectralCurve;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalMap {
    pub k: usize,
    /// Ascending coefficients.
    pub num: Vec<C64>,
    pub den: Vec<C64>,
    pub lattice: Lattice,
    pub xi0: C64,
    /// Index of the denominator coefficient pinned to 1.
    pub pinned: usize,
    /// Relative residual of the least-squares fit.
    pub fit_residual: f64,
    /// Worst relative error on the holdout samples.
    pub holdout_error: f64,
}

const FIT_TOL: f64 = 1e-8;

/// A value on the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Projective {
    Finite(C64),
    Infinity,
}

impl Projective {
    pub fn finite(self) -> Option<C64> {
        match self {
            Projective::Finite(z) => Some(z),
            Projective::Infinity => None,
        }
    }
}

/// Fit `num(w) - y den(w) = 0` of degree `k` through samples `(w, y)`.
/// Returns `(num, den, relative residual, gap to the next singular value)`.
pub fn fit_coefficients(samples: &[(C64, C64)], k: usize, scale: f64) -> Result<(Vec<C64>, Vec<C64>, f64, f64)> {
    let m = 2 * k + 2;
    if samples.len() < m {
        return Err(Error::Extraction(format!("need at least {m} samples, got {}", samples.len())));
    }
    let a = nalgebra::DMatrix::<C64>::from_fn(samples.len(), m, |r, c| {
        let (w, y) = samples[r];
        let t = w / scale;
        let row_norm = 1.0 + y.norm();
        if c <= k {
            t.powi(c as i32) / row_norm
        } else {
            -y * t.powi((c - k - 1) as i32) / row_norm
        }
    });
    let svd = a.svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::Extraction("SVD failed".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[x].partial_cmp(&svd.singular_values[y]).unwrap());
    let smin = svd.singular_values[order[0]];
    let snext = svd.singular_values[order[1]];
    let smax = svd.singular_values[order[order.len() - 1]];
    let v: Vec<C64> = (0..m).map(|c| vt[(order[0], c)].conj()).collect();
    // back from t = w/scale to w
    let num: Vec<C64> = (0..=k).map(|j| v[j] / scale.powi(j as i32)).collect();
    let den: Vec<C64> = (0..=k).map(|j| v[k + 1 + j] / scale.powi(j as i32)).collect();
    Ok((num, den, smin / smax, snext / smax))
}

impl RationalMap {
    pub fn from_coefficients(k: usize, num: Vec<C64>, den: Vec<C64>, lattice: Lattice, xi0: C64) -> Result<Self> {
        if num.len() != k + 1 || den.len() != k + 1 {
            return Err(Error::Validation(format!("expected {} coefficients", k + 1)));
        }
        let (pinned, big) = den
            .iter()
            .enumerate()
            .map(|(j, c)| (j, c.norm()))
            .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if big == 0.0 {
            return Err(Error::Validation("denominator vanishes identically".into()));
        }
        let s = den[pinned];
        let num: Vec<C64> = num.iter().map(|c| c / s).collect();
        let den: Vec<C64> = den.iter().map(|c| c / s).collect();
        Ok(RationalMap { k, num, den, lattice, xi0, pinned, fit_residual: 0.0, holdout_error: 0.0 })
    }

    /// Fit the map of a symmetric curve.
    pub fn extract(curve: &SpectralCurve) -> Result<Self> {
        let k = curve.k();
        let lat = curve.field.lattice;
        let (center, radius) = sample_circle(curve);
        let avoid: Vec<C64> = curve.pi2_branch.iter().filter_map(|b| b.w).collect();
        let mut fit = vec![];
        let mut j = 0;
        while fit.len() < 4 * k + 4 {
            let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.37) / (4 * k + 4) as f64;
            j += 1;
            if j > 20 * (4 * k + 4) {
                return Err(Error::Extraction("could not find enough generic samples".into()));
            }
            let w = center + C64::from_polar(radius * (1.0 + 0.13 * (j % 3) as f64), th);
            if let Some(s) = sample(curve, &lat, w, &avoid, radius)? {
                fit.push(s);
            }
        }
        let (num, den, resid, gap) = fit_coefficients(&fit, k, radius)?;
        if resid > FIT_TOL {
            return Err(Error::Extraction(format!("fit residual {resid:e} exceeds {FIT_TOL:e}")));
        }
        if gap < 1e-6 {
            return Err(Error::Extraction(format!("fit is not unique (next singular value {gap:e})")));
        }
        let mut map = Self::from_coefficients(k, num, den, lat, curve.field.xi0.z)?;
        map.fit_residual = resid;
        let mut worst = 0.0f64;
        let mut count = 0;
        let mut j = 0;
        while count < 50 {
            j += 1;
            if j > 1000 {
                return Err(Error::Extraction("could not find holdout samples".into()));
            }
            let th = 2.0 * std::f64::consts::PI * (j as f64 * 0.618_033_988_7).fract();
            let w = center + C64::from_polar(radius * (0.55 + 0.9 * (j as f64 * 0.414_213_562).fract()), th);
            if let Some((w, y)) = sample(curve, &lat, w, &avoid, radius)? {
                let r = map.eval(w)?.finite().unwrap_or(C64::new(f64::INFINITY, 0.0));
                worst = worst.max((r - y).norm() / (1.0 + y.norm()));
                count += 1;
            }
        }
        map.holdout_error = worst;
        if !(worst < FIT_TOL) {
            return Err(Error::Extraction(format!("holdout error {worst:e} exceeds {FIT_TOL:e}")));
        }
        Ok(map)
    }

    /// `num(w) / den(w)` on the sphere.
    pub fn eval(&self, w: C64) -> Result<Projective> {
        let n = peval(&self.num, w);
        let d = peval(&self.den, w);
        let scale = 1.0 + w.norm().powi(self.k as i32);
        if d.norm() <= 1e-14 * scale {
            if n.norm() <= 1e-12 * scale {
                return Err(Error::CommonRoot(format!("numerator and denominator vanish at {w}")));
            }
            return Ok(Projective::Infinity);
        }
        Ok(Projective::Finite(n / d))
    }

    pub fn eval_infinity(&self) -> Projective {
        let big = self.num.iter().chain(&self.den).map(|c| c.norm()).fold(0.0, f64::max);
        let dn = effective_degree(&self.num, big);
        let dd = effective_degree(&self.den, big);
        if dn > dd {
            Projective::Infinity
        } else if dn < dd {
            Projective::Finite(C64::new(0.0, 0.0))
        } else {
            Projective::Finite(self.num[dn] / self.den[dd])
        }
    }

    pub fn degree(&self) -> usize {
        let big = self.num.iter().chain(&self.den).map(|c| c.norm()).fold(0.0, f64::max);
        effective_degree(&self.num, big).max(effective_degree(&self.den, big))
    }

    /// Branch values of the rebuilt curve over `P^1`: preimages of the
    /// critical values `e1, e2, e3, infinity` of `wp`. `None` is `w = infinity`.
    pub fn branch_values(&self) -> Result<Vec<Option<C64>>> {
        let big = self.num.iter().chain(&self.den).map(|c| c.norm()).fold(0.0, f64::max);
        let mut out = vec![];
        let mut push_roots = |p: Vec<C64>| -> Result<()> {
            let d = effective_degree(&p, big);
            for r in poly_roots(&p[..=d])? {
                out.push(Some(r));
            }
            for _ in d..self.k {
                out.push(None);
            }
            Ok(())
        };
        for e in self.lattice.roots {
            push_roots(self.num.iter().zip(&self.den).map(|(a, b)| a - e * b).collect())?;
        }
        push_roots(self.den.clone())?;
        Ok(out)
    }

    /// Points `(±xi, w)` of the curve `wp(xi) = R(w)` over the given `w`.
    pub fn reconstruct(&self, ws: &[C64]) -> Result<Vec<(C64, [C64; 2])>> {
        let lat = self.lattice;
        let mut out = vec![];
        for &w in ws {
            let pts = match self.eval(w)? {
                Projective::Infinity => [C64::new(0.0, 0.0); 2],
                Projective::Finite(y) => invert_wp(&lat, y)?,
            };
            out.push((w, pts));
        }
        Ok(out)
    }

    /// The `2k+1` free coefficients: everything but the pinned one.
    pub fn free_parameters(&self) -> Vec<C64> {
        let mut v = self.num.clone();
        v.extend(self.den.iter().enumerate().filter(|(j, _)| *j != self.pinned).map(|(_, c)| *c));
        v
    }

    pub fn with_free_parameters(&self, p: &[C64]) -> Self {
        let mut m = self.clone();
        m.num = p[..=self.k].to_vec();
        let mut it = p[self.k + 1..].iter();
        for j in 0..=self.k {
            if j != self.pinned {
                m.den[j] = *it.next().unwrap();
            }
        }
        m
    }

    pub fn to_json(&self) -> serde_json::Value {
        let c = |z: &C64| serde_json::json!([z.re, z.im]);
        let p = self.lattice.wp(self.xi0).ok();
        serde_json::json!({
            "k": self.k,
            "tau": c(&self.lattice.tau),
            "xi0": c(&self.xi0),
            "num": self.num.iter().map(c).collect::<Vec<_>>(),
            "den": self.den.iter().map(c).collect::<Vec<_>>(),
            "p_of_xi0": p.map(|z| c(&z)).unwrap_or(serde_json::Value::String("inf".into())),
            "fit_residual": self.fit_residual,
            "holdout_error": self.holdout_error,
        })
    }
}

fn effective_degree(p: &[C64], big: f64) -> usize {
    let mut d = p.len() - 1;
    while d > 0 && p[d].norm() <= 1e-9 * big {
        d -= 1;
    }
    d
}

/// Solve `wp(xi) = y`: two points `±xi`.
pub fn invert_wp(lat: &Lattice, y: C64) -> Result<[C64; 2]> {
    let f = |xi: C64| Ok(lat.wp(xi)? - y);
    let zs = find_zeros_torus_with_poles(&f, lat, &[(C64::new(0.0, 0.0), 2)], ZeroOptions::default())?;
    let mut pts = vec![];
    for r in &zs.roots {
        for _ in 0..r.multiplicity {
            pts.push(r.z);
        }
    }
    if pts.len() != 2 {
        return Err(Error::Numerical(format!("wp = {y} has {} solutions", pts.len())));
    }
    Ok([pts[0], pts[1]])
}

/// `k` for a given rank: the dimension count `2k + 1`.
pub fn param_count(k: usize) -> usize {
    2 * k + 1
}

/// Rank of the finite-difference Jacobian of the `4k` branch values with
/// respect to the `2k+1` free coefficients, and its singular values.
pub fn param_jacobian_rank(map: &RationalMap) -> Result<(usize, Vec<f64>)> {
    let base = finite_branch_values(map)?;
    let p0 = map.free_parameters();
    let h = 1e-6 * (1.0 + p0.iter().map(|c| c.norm()).fold(0.0, f64::max));
    let n = base.len();
    let mut jac = nalgebra::DMatrix::<C64>::zeros(n, p0.len());
    for c in 0..p0.len() {
        let mut pp = p0.clone();
        let mut pm = p0.clone();
        pp[c] += h;
        pm[c] -= h;
        let bp = matched(&base, &finite_branch_values(&map.with_free_parameters(&pp))?)?;
        let bm = matched(&base, &finite_branch_values(&map.with_free_parameters(&pm))?)?;
        for r in 0..n {
            jac[(r, c)] = (bp[r] - bm[r]) / (2.0 * h);
        }
    }
    let mut s: Vec<f64> = jac.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let top = s[0];
    let rank = s.iter().filter(|&&x| x > 1e-7 * top).count();
    Ok((rank, s))
}

fn finite_branch_values(map: &RationalMap) -> Result<Vec<C64>> {
    let v = map.branch_values()?;
    if v.iter().any(|x| x.is_none()) {
        return Err(Error::Degeneracy("a branch value sits at infinity".into()));
    }
    Ok(v.into_iter().flatten().collect())
}

/// Reorder `new` to follow `base` by nearest matching.
fn matched(base: &[C64], new: &[C64]) -> Result<Vec<C64>> {
    let mut left: Vec<C64> = new.to_vec();
    let mut out = vec![];
    for b in base {
        let (i, _) = left
            .iter()
            .enumerate()
            .map(|(i, x)| (i, (x - b).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .ok_or_else(|| Error::Numerical("branch value lost under perturbation".into()))?;
        out.push(left.remove(i));
    }
    Ok(out)
}

fn sample_circle(curve: &SpectralCurve) -> (C64, f64) {
    let lat = &curve.field.lattice;
    let mut s = 0.0f64;
    let mut n = 0;
    for j in 0..6 {
        let xi = C64::new(0.11 + 0.13 * j as f64, 0.0) + (0.17 + 0.11 * j as f64) * lat.tau;
        if let Ok(ws) = curve.fiber_over_base(xi) {
            for w in ws {
                s += w.norm();
                n += 1;
            }
        }
    }
    (C64::new(0.0, 0.0), 0.5 + s / n.max(1) as f64)
}

/// `(w, wp(xi_w))` or `None` when `w` is too close to a branch value.
fn sample(curve: &SpectralCurve, lat: &Lattice, w: C64, avoid: &[C64], radius: f64) -> Result<Option<(C64, C64)>> {
    if avoid.iter().any(|b| (b - w).norm() < 0.05 * radius) {
        return Ok(None);
    }
    let pts = curve.fiber_over_w(w)?;
    // keep away from the critical points of wp
    for p in &pts {
        if lat.wp_prime(*p).map(|d| d.norm()).unwrap_or(0.0) < 1e-2 {
            return Ok(None);
        }
    }
    let y1 = lat.wp(pts[0])?;
    let y2 = lat.wp(pts[1])?;
    if (y1 - y2).norm() > 1e-8 * (1.0 + y1.norm()) {
        return Err(Error::Extraction(format!(
            "fiber points over w = {w} have different wp values {y1} and {y2}: curve is not symmetric"
        )));
    }
    Ok(Some((w, 0.5 * (y1 + y2))))
}

/// Hausdorff distance between the original and rebuilt fibers over the
/// sample points, on the torus.
pub fn roundtrip_distance(curve: &SpectralCurve, map: &RationalMap, ws: &[C64]) -> Result<f64> {
    let lat = &curve.field.lattice;
    let rebuilt = map.reconstruct(ws)?;
    let mut worst = 0.0f64;
    for (w, pts) in rebuilt {
        let orig = curve.fiber_over_w(w)?;
        for set in [(&orig[..], &pts[..]), (&pts[..], &orig[..])] {
            for a in set.0 {
                let d = set.1.iter().map(|b| lat.torus_distance(*a, *b)).fold(f64::INFINITY, f64::min);
                worst = worst.max(d);
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::higgs::{HiggsField, ResidueData};
    use crate::linalg::CMat;

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
    fn mobius_field_gives_closed_form_map() {
        let l = lat();
        let eps = c(0.7, 0.2);
        let c0 = c(0.3, -0.1);
        let f = HiggsField::build(1, l, xi0(), ResidueData::symmetric(vec![eps], vec![c(1.0, 0.0)]), CMat { n: 1, data: vec![c0] }, None)
            .unwrap();
        let cv = SpectralCurve::build(&f).unwrap();
        let m = RationalMap::extract(&cv).unwrap();
        assert_eq!(m.degree(), 1);
        let cp = c0 - 2.0 * eps * l.zeta(xi0()).unwrap();
        let (p0, d0) = (l.wp(xi0()).unwrap(), l.wp_prime(xi0()).unwrap());
        for w in [c(0.2, 0.9), c(-1.3, 0.4), c(2.0, -2.0)] {
            let exact = p0 + eps * d0 / (w - cp);
            let got = m.eval(w).unwrap().finite().unwrap();
            assert!((got - exact).norm() < 1e-8 * (1.0 + exact.norm()));
        }
        let inf = m.eval_infinity().finite().unwrap();
        assert!((inf - p0).norm() < 1e-8 * (1.0 + p0.norm()));
        assert_eq!(m.eval(cp).unwrap(), Projective::Infinity);
    }

    #[test]
    fn wp_graph_gives_identity() {
        let l = Lattice::new(c(0.0, 1.0)).unwrap();
        let f = HiggsField::weierstrass_graph(l, c(0.0, 0.0)).unwrap();
        let cv = SpectralCurve::build(&f).unwrap();
        let m = RationalMap::extract(&cv).unwrap();
        for w in [c(0.3, 0.2), c(-1.0, 2.0)] {
            assert!((m.eval(w).unwrap().finite().unwrap() - w).norm() < 1e-8 * (1.0 + w.norm()));
        }
        assert_eq!(m.eval_infinity(), Projective::Infinity);
    }

    #[test]
    fn k2_seed7_degree_two_and_value_at_infinity() {
        let f = HiggsField::random(2, lat(), xi0(), c(1.0, 0.0), 7).unwrap();
        let cv = SpectralCurve::build(&f).unwrap();
        let m = RationalMap::extract(&cv).unwrap();
        assert_eq!(m.degree(), 2);
        assert!(m.num[2].norm() > 1e-6 && m.den[2].norm() > 1e-6);
        let p0 = lat().wp(xi0()).unwrap();
        assert!((m.eval_infinity().finite().unwrap() - p0).norm() < 1e-7 * (1.0 + p0.norm()));
        // rebuilt curve: fibers agree and branch values agree
        let ws: Vec<C64> = (0..20).map(|j| C64::from_polar(1.7, 0.3 + j as f64 * 0.31)).collect();
        assert!(roundtrip_distance(&cv, &m, &ws).unwrap() < 1e-8);
        let bv = m.branch_values().unwrap();
        assert_eq!(bv.len(), 8);
        for b in cv.pi2_values() {
            let b = b.unwrap();
            assert!(bv.iter().any(|x| x.is_some_and(|x| (x - b).norm() < 1e-7 * (1.0 + b.norm()))));
        }
    }

    #[test]
    fn extract_reconstruct_extract_is_stable() {
        let f = HiggsField::random(2, lat(), xi0(), c(1.0, 0.0), 3).unwrap();
        let cv = SpectralCurve::build(&f).unwrap();
        let m = RationalMap::extract(&cv).unwrap();
        let ws: Vec<C64> = (0..12).map(|j| C64::from_polar(1.3 + 0.1 * j as f64, 0.2 + j as f64 * 0.5)).collect();
        let samples: Vec<(C64, C64)> = m
            .reconstruct(&ws)
            .unwrap()
            .into_iter()
            .map(|(w, p)| (w, lat().wp(p[0]).unwrap()))
            .collect();
        let (n2, d2, r, _) = fit_coefficients(&samples, 2, 2.0).unwrap();
        assert!(r < 1e-8);
        let m2 = RationalMap::from_coefficients(2, n2, d2, lat(), xi0()).unwrap();
        for (a, b) in m.num.iter().chain(&m.den).zip(m2.num.iter().chain(&m2.den)) {
            assert!((a - b).norm() < 1e-7);
        }
    }

    #[test]
    fn param_count_values_and_rank() {
        assert_eq!(param_count(1), 3);
        assert_eq!(param_count(2), 5);
        assert_eq!(param_count(3), 7);
        let f = HiggsField::random(2, lat(), xi0(), c(1.0, 0.0), 7).unwrap();
        let m = RationalMap::extract(&SpectralCurve::build(&f).unwrap()).unwrap();
        let (rank, _) = param_jacobian_rank(&m).unwrap();
        assert_eq!(rank, 5);
    }

    #[test]
    fn common_root_is_reported() {
        let m = RationalMap::from_coefficients(1, vec![c(-1.0, 0.0), c(1.0, 0.0)], vec![c(-1.0, 0.0), c(1.0, 0.0)], lat(), xi0()).unwrap();
        assert!(matches!(m.eval(c(1.0, 0.0)), Err(Error::CommonRoot(_))));
    }
}
