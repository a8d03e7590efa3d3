//! Spectral curves `C = {det(Phi(xi) - w) = 0}` in `T^ x P^1`.
//!
//! Branch points of the projection to `T^` are the zeros of the
//! discriminant of the characteristic polynomial. Branch points of the
//! projection to `P^1` are the zeros of `prod_s dF/dxi (xi, w_s(xi))`,
//! together with ramification over `w = infinity` read off from pole orders.

use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::argument::{find_zeros_torus, find_zeros_torus_with_poles, pole_order, Root, ZeroOptions};
use crate::error::{Error, Result};
use crate::higgs::{FieldKind, HiggsField};
use crate::linalg::CMat;

/// A ramification point of the projection to `P^1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pi2Branch {
    pub xi: C64,
    /// `None` for the point at infinity.
    pub w: Option<C64>,
    /// Ramification index minus one.
    pub multiplicity: u32,
    /// `dF/dw` vanishes here too, so the curve is singular.
    pub node: bool,
}

/// How a rank-2 bundle restricts to the fiber over `w`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RestrictionType {
    SplitDistinct { xi: C64, minus_xi: C64 },
    IndecomposableF2 { xi: C64 },
    DoublePoint { xi: C64 },
}

#[derive(Debug, Clone)]
pub struct SpectralCurve {
    pub field: HiggsField,
    pub pi1_branch: Vec<Root>,
    pub pi2_branch: Vec<Pi2Branch>,
    /// Pole orders of the discriminant at the poles of `Phi`.
    pub disc_poles: Vec<(C64, u32)>,
    /// `(sheets over T^, sheets over P^1)`.
    pub homology: (usize, usize),
    pub genus_pi1: i64,
    pub genus_pi2: i64,
    pub smooth: bool,
    /// Pole orders of `xi -> F(xi, w)` for generic `w`.
    pub fiber_poles: Vec<(C64, u32)>,
}

fn opts() -> ZeroOptions {
    ZeroOptions::default()
}

/// Discriminant of a polynomial (ascending coefficients) via the
/// Sylvester resultant with its derivative.
pub fn discriminant(p: &[C64]) -> C64 {
    let n = p.len() - 1;
    if n <= 1 {
        return C64::new(1.0, 0.0);
    }
    if n == 2 {
        return (p[1] * p[1] - 4.0 * p[0] * p[2]) / (p[2] * p[2]);
    }
    let lead = p[n];
    let dp: Vec<C64> = p.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect();
    let size = 2 * n - 1;
    let mut s = CMat::zeros(size);
    // rows of p (descending), n-1 of them
    for r in 0..n - 1 {
        for (j, c) in p.iter().rev().enumerate() {
            s.set(r, r + j, *c);
        }
    }
    for r in 0..n {
        for (j, c) in dp.iter().rev().enumerate() {
            s.set(n - 1 + r, r + j, *c);
        }
    }
    let sign = if (n * (n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    s.det() * sign / lead.powi(2 * n as i32 - 1)
}

/// Eigenvalues sorted by `(Re, Im)`.
pub fn sorted_eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    let mut e = m.eigenvalues()?;
    e.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    Ok(e)
}

impl SpectralCurve {
    pub fn build(field: &HiggsField) -> Result<Self> {
        let field = field.clone();
        let k = field.k;
        let lat = field.lattice;
        let poles = field.pole_points();

        // discriminant zeros
        let disc = |xi: C64| -> Result<C64> { Ok(discriminant(&field.char_poly_at(xi)?)) };
        let (pi1_branch, disc_poles) = if k == 1 {
            (vec![], poles.iter().map(|p| (*p, 0)).collect())
        } else {
            let zs = find_zeros_torus(&disc, &lat, &poles, opts())
                .map_err(|e| Error::Numerical(format!("discriminant zeros: {e}")))?;
            (zs.roots, zs.poles)
        };
        let b1: u32 = pi1_branch.iter().map(|r| r.multiplicity).sum();
        let mut smooth = pi1_branch.iter().all(|r| r.multiplicity == 1)
            && pi1_branch.iter().all(|r| is_simple_zero(&disc, r.z));

        // finite ramification of pi2
        let h = |xi: C64| -> Result<C64> {
            let (phi, dphi) = field.eval_with_derivative(xi)?;
            let ws = phi.eigenvalues()?;
            let mut acc = C64::new(1.0, 0.0);
            for w in ws {
                acc *= phi.shift(w).adjugate().mul(&dphi).trace();
            }
            Ok(acc)
        };
        let hz = find_zeros_torus(&h, &lat, &poles, opts())
            .map_err(|e| Error::Numerical(format!("pi2 ramification: {e}")))?;
        let mut pi2_branch = vec![];
        for r in &hz.roots {
            let phi = field.eval(r.z)?;
            let dphi = field.eval_with_derivative(r.z)?.1;
            let mut ws: Vec<(f64, C64)> = sorted_eigenvalues(&phi)?
                .into_iter()
                .map(|w| (phi.shift(w).adjugate().mul(&dphi).trace().norm(), w))
                .collect();
            ws.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            // a zero of h of multiplicity m is shared by m sheets (generic case)
            for &(_, w) in ws.iter().take(r.multiplicity as usize) {
                let (xi, w) = polish_branch(&field, r.z, w);
                let node = is_node(&field, xi, w)?;
                if node {
                    smooth = false;
                }
                pi2_branch.push(Pi2Branch { xi: lat.reduce_fundamental(xi), w: Some(w), multiplicity: 1, node });
            }
            if (r.multiplicity as usize) > k {
                return Err(Error::Numerical(format!("h has a zero of order {} above {k} sheets", r.multiplicity)));
            }
        }
        // ramification over infinity
        let wg = generic_w(&field);
        let fw = |xi: C64| field.det_shift(xi, wg);
        let mut fiber_poles = vec![];
        for p in &poles {
            let d = pole_order(&fw, *p, 0.02)?;
            if d < 0 {
                return Err(Error::Numerical(format!("F(., w) vanishes at the pole {p}")));
            }
            fiber_poles.push((*p, d as u32));
            if d > 1 {
                pi2_branch.push(Pi2Branch { xi: lat.reduce_fundamental(*p), w: None, multiplicity: d as u32 - 1, node: false });
            }
        }
        let b2: u32 = pi2_branch.iter().map(|b| b.multiplicity).sum();

        // degree of pi2 from a few generic fibers
        let mut deg2 = None;
        for s in 0..3 {
            let w = wg * C64::new(1.0 + 0.37 * s as f64, -0.21 * s as f64);
            let f = |xi: C64| field.det_shift(xi, w);
            let zs = find_zeros_torus_with_poles(&f, &lat, &fiber_poles, opts())?;
            let d = zs.total_multiplicity() as usize;
            if deg2.is_some_and(|x| x != d) {
                return Err(Error::Invariant(format!("pi2 degree varies between fibers ({} vs {d})", deg2.unwrap())));
            }
            deg2 = Some(d);
        }
        let homology = (k, deg2.unwrap_or(0));
        let genus_pi1 = b1 as i64 / 2 + 1;
        let genus_pi2 = b2 as i64 / 2 + 1 - homology.1 as i64;
        if b1 % 2 == 1 || b2 % 2 == 1 {
            smooth = false;
        }
        Ok(SpectralCurve { field, pi1_branch, pi2_branch, disc_poles, homology, genus_pi1, genus_pi2, smooth, fiber_poles })
    }

    pub fn k(&self) -> usize {
        self.field.k
    }

    /// Genus when the two Riemann-Hurwitz computations agree.
    pub fn genus(&self) -> Result<i64> {
        if self.genus_pi1 != self.genus_pi2 {
            return Err(Error::Invariant(format!(
                "genus from pi1 ({}) differs from genus from pi2 ({})",
                self.genus_pi1, self.genus_pi2
            )));
        }
        Ok(self.genus_pi1)
    }

    pub fn pi1_count(&self) -> u32 {
        self.pi1_branch.iter().map(|r| r.multiplicity).sum()
    }

    pub fn pi2_count(&self) -> u32 {
        self.pi2_branch.iter().map(|b| b.multiplicity).sum()
    }

    /// Branch values of `pi2`; `None` stands for infinity.
    pub fn pi2_values(&self) -> Vec<Option<C64>> {
        self.pi2_branch.iter().map(|b| b.w).collect()
    }

    /// Eigenvalues of `Phi(xi)`, sorted.
    pub fn fiber_over_base(&self, xi: C64) -> Result<Vec<C64>> {
        sorted_eigenvalues(&self.field.eval(xi)?)
    }

    /// The two points of `T^` over `w`.
    pub fn fiber_over_w(&self, w: C64) -> Result<Vec<C64>> {
        let f = |xi: C64| self.field.det_shift(xi, w);
        let zs = find_zeros_torus_with_poles(&f, &self.field.lattice, &self.fiber_poles, opts())?;
        let mut out = vec![];
        for r in &zs.roots {
            for _ in 0..r.multiplicity {
                out.push(r.z);
            }
        }
        if out.len() != 2 {
            return Err(Error::Invariant(format!("fiber over w = {w} has {} points, expected 2", out.len())));
        }
        Ok(out)
    }

    /// `(±xi0, infinity)` lie on the curve: the divergent eigenvalue grows
    /// like `|residue| / |xi - p|^d`.
    pub fn infinity_membership(&self) -> Result<bool> {
        for p in self.field.pole_points() {
            let mut ratios = vec![];
            for j in 2..5 {
                let r = 10f64.powi(-j);
                let xi = p + C64::from_polar(r, 0.3);
                let big = self.fiber_over_base(xi)?.iter().map(|w| w.norm()).fold(0.0, f64::max);
                ratios.push(big * r);
            }
            let d = if matches!(self.field.kind, FieldKind::WeierstrassGraph { .. }) { 2 } else { 1 };
            let ratios: Vec<f64> = ratios
                .iter()
                .enumerate()
                .map(|(i, x)| x * 10f64.powi(-(i as i32 + 2) * (d - 1)))
                .collect();
            // converges to a positive finite limit
            let last = ratios[ratios.len() - 1];
            if !(last > 1e-8 && (ratios[ratios.len() - 2] - last).abs() < 0.05 * last) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `F(-xi, w) = F(xi, w)` at sample points and the fixed points of the
    /// involution coincide with the `pi2` ramification points.
    pub fn involution_check(&self) -> Result<bool> {
        if !involution_symmetric(&self.field)? {
            return Ok(false);
        }
        let fixed = self.involution_fixed_points()?;
        if fixed.len() != self.pi2_branch.len() {
            return Ok(false);
        }
        let lat = &self.field.lattice;
        for (xi, w) in &fixed {
            let hit = self.pi2_branch.iter().any(|b| {
                lat.same_point(b.xi, *xi, 1e-7)
                    && match (b.w, w) {
                        (None, None) => true,
                        (Some(a), Some(c)) => (a - c).norm() <= 1e-7 * (1.0 + c.norm()),
                        _ => false,
                    }
            });
            if !hit {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Points `(xi, w)` with `xi = -xi`, counted once per sheet.
    pub fn involution_fixed_points(&self) -> Result<Vec<(C64, Option<C64>)>> {
        let lat = &self.field.lattice;
        let poles = self.field.pole_points();
        let mut out = vec![];
        for h in lat.half_periods() {
            if let Some(p) = poles.iter().find(|p| lat.same_point(**p, h, 1e-8)) {
                out.push((lat.reduce_fundamental(*p), None));
                continue;
            }
            for w in self.fiber_over_base(h)? {
                out.push((lat.reduce_fundamental(h), Some(w)));
            }
        }
        Ok(out)
    }

    pub fn restriction_type(&self, w: C64) -> Result<RestrictionType> {
        let pts = self.fiber_over_w(w)?;
        let lat = &self.field.lattice;
        let d = lat.torus_distance(pts[0], pts[1]);
        if d > 1e-4 {
            return Ok(RestrictionType::SplitDistinct { xi: pts[0], minus_xi: pts[1] });
        }
        if d > 1e-6 {
            return Err(Error::Classification(format!(
                "fiber points {} and {} are {d:e} apart: split_distinct or a collision",
                pts[0], pts[1]
            )));
        }
        let xi = 0.5 * (pts[0] + pts[1]);
        let m = self.field.eval(xi)?.shift(w);
        let fw = m.adjugate().trace().norm();
        let scale = (1.0 + self.field.eval(xi)?.frobenius()).powi(self.k() as i32 - 1);
        let r = fw / scale;
        if r < 1e-6 {
            Ok(RestrictionType::DoublePoint { xi })
        } else if r > 1e-4 {
            Ok(RestrictionType::IndecomposableF2 { xi })
        } else {
            Err(Error::Classification(format!(
                "dF/dw relative size {r:e} at {xi}: indecomposable_f2 or double_point"
            )))
        }
    }

    /// Unit kernel vector of `Phi(xi) - w`, largest component real positive.
    pub fn eigenline(&self, xi: C64, w: C64) -> Result<Vec<C64>> {
        eigenline(&self.field, xi, w)
    }

    /// Degree of the eigenline bundle, as zeros minus poles of a cofactor
    /// component, counted through its norm down to `T^`.
    pub fn eigenline_degree(&self) -> Result<i64> {
        eigenline_degree(&self.field)
    }

    /// `fiber_over_w` then `fiber_over_base` returns `w`.
    pub fn fiber_consistency(&self, w: C64) -> Result<f64> {
        let mut worst = 0.0f64;
        for xi in self.fiber_over_w(w)? {
            let ws = self.fiber_over_base(xi)?;
            let best = ws.iter().map(|x| (x - w).norm()).fold(f64::INFINITY, f64::min);
            worst = worst.max(best / (1.0 + w.norm()));
        }
        Ok(worst)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let c = |z: C64| serde_json::json!([z.re, z.im]);
        serde_json::json!({
            "k": self.k(),
            "tau": c(self.field.lattice.tau),
            "xi0": c(self.field.xi0.z),
            "branch_pi1": self.pi1_branch.iter().map(|r| serde_json::json!({"xi": c(r.z), "multiplicity": r.multiplicity})).collect::<Vec<_>>(),
            "branch_pi2": self.pi2_branch.iter().map(|b| serde_json::json!({
                "xi": c(b.xi),
                "w": b.w.map(c).unwrap_or(serde_json::Value::String("inf".into())),
                "multiplicity": b.multiplicity,
                "node": b.node,
            })).collect::<Vec<_>>(),
            "genus": if self.genus_pi1 == self.genus_pi2 { serde_json::json!(self.genus_pi1) } else { serde_json::Value::Null },
            "genus_pi1": self.genus_pi1,
            "genus_pi2": self.genus_pi2,
            "homology": [self.homology.0, self.homology.1],
            "smooth": self.smooth,
        })
    }

    /// Sheets sampled on an `n x n` grid of the fundamental domain.
    pub fn sample_csv(&self, n: usize) -> Result<String> {
        let lat = &self.field.lattice;
        let poles = self.field.pole_points();
        let mut s = String::from("xi_re,xi_im,w_re,w_im,sheet\n");
        for j in 0..n {
            for i in 0..n {
                let xi = C64::new((i as f64 + 0.5) / n as f64, 0.0) + (j as f64 + 0.5) / n as f64 * lat.tau;
                if poles.iter().any(|p| lat.torus_distance(*p, xi) < 0.02) {
                    continue;
                }
                for (sheet, w) in self.fiber_over_base(xi)?.iter().enumerate() {
                    let _ = writeln!(s, "{},{},{},{},{}", xi.re, xi.im, w.re, w.im, sheet);
                }
            }
        }
        Ok(s)
    }
}

/// `F(-xi, w) = F(xi, w)` to `1e-9` at 100 deterministic sample points.
pub fn involution_symmetric(field: &HiggsField) -> Result<bool> {
    let lat = &field.lattice;
    let poles = field.pole_points();
    let mut tested = 0;
    let mut j = 0;
    while tested < 100 {
        j += 1;
        let t = j as f64;
        let xi = C64::new((0.618 * t).fract(), 0.0) + (0.414 * t).fract() * lat.tau;
        if poles.iter().any(|p| lat.torus_distance(*p, xi) < 0.05 || lat.torus_distance(*p, -xi) < 0.05) {
            continue;
        }
        let w = C64::new(3.0 * ((0.7548 * t).fract() - 0.5), 3.0 * ((0.5698 * t).fract() - 0.5));
        let a = field.det_shift(xi, w)?;
        let b = field.det_shift(-xi, w)?;
        if (a - b).norm() > 1e-9 * (1.0 + a.norm()) {
            return Ok(false);
        }
        tested += 1;
    }
    Ok(true)
}

pub fn eigenline(field: &HiggsField, xi: C64, w: C64) -> Result<Vec<C64>> {
    let phi = field.eval(xi)?;
    let m = phi.shift(w);
    let k = field.k;
    if k == 1 {
        return Ok(vec![C64::new(1.0, 0.0)]);
    }
    let scale = (1.0 + phi.frobenius() + w.norm()).powi(k as i32);
    if m.det().norm() > 1e-8 * scale {
        return Err(Error::Domain(format!("({xi}, {w}) is not on the curve")));
    }
    let adj = m.adjugate();
    let mut best = (0.0, 0usize);
    for j in 0..k {
        let n: f64 = (0..k).map(|i| adj.get(i, j).norm_sqr()).sum::<f64>().sqrt();
        if n > best.0 {
            best = (n, j);
        }
    }
    if best.0 <= 1e-10 * scale / (1.0 + phi.frobenius() + w.norm()) {
        return Err(Error::Node(format!("kernel of Phi - w at ({xi}, {w}) is two-dimensional")));
    }
    let v: Vec<C64> = (0..k).map(|i| adj.get(i, best.1) / best.0).collect();
    Ok(normalize_phase(v))
}

fn normalize_phase(v: Vec<C64>) -> Vec<C64> {
    let mut idx = 0;
    for (i, x) in v.iter().enumerate() {
        if x.norm() > v[idx].norm() * (1.0 + 1e-12) {
            idx = i;
        }
    }
    let ph = v[idx] / v[idx].norm();
    let n: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.iter().map(|x| x / ph / n).collect()
}

pub fn eigenline_degree(field: &HiggsField) -> Result<i64> {
    let k = field.k;
    if k == 1 {
        return Ok(0);
    }
    let lat = &field.lattice;
    let poles = field.pole_points();
    let mut last = Error::Degeneracy("no cofactor component tried".into());
    for comp in 0..k * k {
        let (ci, cj) = (comp / k, comp % k);
        let norm = |xi: C64| -> Result<C64> {
            let phi = field.eval(xi)?;
            let mut acc = C64::new(1.0, 0.0);
            for w in phi.eigenvalues()? {
                acc *= phi.shift(w).adjugate().get(ci, cj);
            }
            Ok(acc)
        };
        // identically small on the sample grid: try the next component
        let probe: f64 = (0..9)
            .map(|s| {
                let xi = C64::new(0.13 + 0.09 * s as f64, 0.0) + (0.21 + 0.07 * s as f64) * lat.tau;
                norm(xi).map(|v| v.norm()).unwrap_or(0.0)
            })
            .fold(0.0, f64::max);
        if probe < 1e-12 {
            last = Error::Degeneracy(format!("component ({ci},{cj}) vanishes identically"));
            continue;
        }
        let mut pole_total = 0i64;
        let mut zero_at_poles = 0i64;
        let mut pole_list = vec![];
        for p in &poles {
            let o = pole_order(&norm, *p, 0.02)?;
            if o >= 0 {
                pole_total += o;
                pole_list.push((*p, o as u32));
            } else {
                zero_at_poles += -o;
                pole_list.push((*p, 0));
            }
        }
        match crate::argument::find_zeros_torus_with_poles(&norm, lat, &pole_list, opts()) {
            Ok(zs) => {
                let zeros = zs.total_multiplicity() as i64 + zero_at_poles;
                return Ok(zeros - pole_total);
            }
            Err(e) => last = e,
        }
    }
    Err(Error::Degeneracy(format!("every cofactor component failed: {last}")))
}

/// A generic value of `w` scaled to the field.
fn generic_w(field: &HiggsField) -> C64 {
    let xi = C64::new(0.377, 0.0) + 0.291 * field.lattice.tau;
    let s = field.eval(xi).map(|m| m.frobenius()).unwrap_or(1.0);
    C64::new(0.731, 0.419) * (1.0 + s)
}

fn is_simple_zero(f: &dyn Fn(C64) -> Result<C64>, z: C64) -> bool {
    let h = 1e-3;
    let d = match (f(z + h), f(z - h)) {
        (Ok(a), Ok(b)) => (a - b).norm() / (2.0 * h),
        _ => return false,
    };
    let ring = (0..8)
        .filter_map(|j| f(z + C64::from_polar(h, j as f64 * std::f64::consts::FRAC_PI_4)).ok())
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    d > 1e-5 * ring / h
}

/// `dF/dw = -tr adj(Phi - w)` relative to the local scale is tiny.
fn is_node(field: &HiggsField, xi: C64, w: C64) -> Result<bool> {
    let phi = field.eval(xi)?;
    let fw = phi.shift(w).adjugate().trace().norm();
    let scale = (1.0 + phi.frobenius()).powi(field.k as i32 - 1);
    Ok(fw < 1e-6 * scale)
}

/// Newton on `{F = 0, dF/dxi = 0}` from a seed.
fn polish_branch(field: &HiggsField, xi0: C64, w0: C64) -> (C64, C64) {
    let f = |xi: C64, w: C64| -> Option<(C64, C64)> {
        let (phi, dphi) = field.eval_with_derivative(xi).ok()?;
        let m = phi.shift(w);
        Some((m.det(), m.adjugate().mul(&dphi).trace()))
    };
    let (mut xi, mut w) = (xi0, w0);
    let h = 1e-6;
    for _ in 0..20 {
        let Some((a, b)) = f(xi, w) else { return (xi0, w0) };
        let (Some((ax, bx)), Some((axm, bxm))) = (f(xi + h, w), f(xi - h, w)) else { return (xi, w) };
        let (Some((aw, bw)), Some((awm, bwm))) = (f(xi, w + h), f(xi, w - h)) else { return (xi, w) };
        let j = [[(ax - axm) / (2.0 * h), (aw - awm) / (2.0 * h)], [(bx - bxm) / (2.0 * h), (bw - bwm) / (2.0 * h)]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.norm() == 0.0 {
            return (xi, w);
        }
        let dx = (j[1][1] * a - j[0][1] * b) / det;
        let dw = (-j[1][0] * a + j[0][0] * b) / det;
        if !(dx.re.is_finite() && dw.re.is_finite()) {
            return (xi, w);
        }
        xi -= dx;
        w -= dw;
        if dx.norm() + dw.norm() < 1e-14 * (1.0 + w.norm()) {
            break;
        }
    }
    (xi, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::higgs::ResidueData;
    use crate::lattice::Lattice;

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
    fn discriminant_of_known_cubic() {
        let r = [c(1.0, 0.0), c(2.0, 1.0), c(-1.0, 0.5)];
        let p = crate::linalg::pmul(
            &crate::linalg::pmul(&[-r[0], c(1.0, 0.0)], &[-r[1], c(1.0, 0.0)]),
            &[-r[2], c(1.0, 0.0)],
        );
        let expected = ((r[0] - r[1]) * (r[0] - r[2]) * (r[1] - r[2])).powi(2);
        assert!((discriminant(&p) - expected).norm() < 1e-12 * expected.norm());
    }

    #[test]
    fn k1_curve_has_four_branch_values_at_half_periods() {
        let f = HiggsField::random(1, lat(), xi0(), c(1.0, 0.0), 3).unwrap();
        let cv = SpectralCurve::build(&f).unwrap();
        assert_eq!(cv.pi1_count(), 0);
        assert_eq!(cv.pi2_count(), 4);
        assert_eq!(cv.genus().unwrap(), 1);
        for h in lat().half_periods() {
            let v = f.eval(h).unwrap().data[0];
            assert!(cv.pi2_values().iter().any(|w| w.is_some_and(|w| (w - v).norm() < 1e-8)));
        }
    }

    #[test]
    fn wp_graph_branch_values() {
        let l = lat();
        let f = HiggsField::weierstrass_graph(l, c(0.0, 0.0)).unwrap();
        let cv = SpectralCurve::build(&f).unwrap();
        assert_eq!(cv.genus().unwrap(), 1);
        assert_eq!(cv.pi2_count(), 4);
        let vals = cv.pi2_values();
        assert!(vals.contains(&None));
        for e in l.roots {
            assert!(vals.iter().any(|w| w.is_some_and(|w| (w - e).norm() < 1e-8)));
        }
        assert!(cv.involution_check().unwrap());
        assert!(cv.infinity_membership().unwrap());
    }

    #[test]
    fn k2_seed7_counts() {
        let f = HiggsField::random(2, lat(), xi0(), c(1.0, 0.0), 7).unwrap();
        let cv = SpectralCurve::build(&f).unwrap();
        assert_eq!((cv.pi1_count(), cv.pi2_count()), (4, 8));
        assert_eq!(cv.genus().unwrap(), 3);
        assert_eq!(cv.homology, (2, 2));
        assert!(cv.smooth);
        assert!(cv.involution_check().unwrap());
        assert!(cv.infinity_membership().unwrap());
        assert_eq!(cv.involution_fixed_points().unwrap().len(), 8);
    }

    #[test]
    fn k3_counts() {
        let f = HiggsField::random(3, lat(), xi0(), c(1.0, 0.0), 2).unwrap();
        let cv = SpectralCurve::build(&f).unwrap();
        assert_eq!((cv.pi2_count(), cv.pi1_count()), (12, 8));
        assert_eq!(cv.genus().unwrap(), 5);
    }

    #[test]
    fn fiber_over_base_near_pole_and_symmetry() {
        let f = HiggsField::random(2, lat(), xi0(), c(0.8, 0.3), 4).unwrap();
        let cv = SpectralCurve::build(&f).unwrap();
        let r = 1e-4;
        let big = cv.fiber_over_base(xi0() + r).unwrap().iter().map(|w| w.norm()).fold(0.0, f64::max);
        assert!((big * r - f.epsilon.norm()).abs() < 1e-3);
        let x = c(0.17, 0.71);
        let a = cv.fiber_over_base(x).unwrap();
        let b = cv.fiber_over_base(-x).unwrap();
        for w in &a {
            assert!(b.iter().any(|v| (v - w).norm() < 1e-8));
        }
    }

    #[test]
    fn fiber_over_w_is_symmetric_and_consistent() {
        let f = HiggsField::random(2, lat(), xi0(), c(1.0, 0.0), 8).unwrap();
        let cv = SpectralCurve::build(&f).unwrap();
        let w = c(0.9, -0.4);
        let pts = cv.fiber_over_w(w).unwrap();
        assert!(lat().same_point(pts[0], -pts[1], 1e-8));
        assert!(cv.fiber_consistency(w).unwrap() < 1e-8);
        // large w approaches the poles
        let pts = cv.fiber_over_w(c(1e5, 3e4)).unwrap();
        for p in pts {
            let d = lat().torus_distance(p, xi0()).min(lat().torus_distance(p, -xi0()));
            assert!(d < 1e-4);
        }
    }

    #[test]
    fn mobius_field_fiber_matches_inversion() {
        let l = lat();
        let eps = c(0.7, 0.2);
        let c0 = c(0.3, -0.1);
        let f = HiggsField::build(1, l, xi0(), ResidueData::symmetric(vec![eps], vec![c(1.0, 0.0)]), CMat { n: 1, data: vec![c0] }, None)
            .unwrap();
        let cv = SpectralCurve::build(&f).unwrap();
        let cp = c0 - 2.0 * eps * l.zeta(xi0()).unwrap();
        let w = c(1.1, 0.6);
        let target = l.wp(xi0()).unwrap() + eps * l.wp_prime(xi0()).unwrap() / (w - cp);
        for xi in cv.fiber_over_w(w).unwrap() {
            assert!((l.wp(xi).unwrap() - target).norm() < 1e-8 * (1.0 + target.norm()));
        }
    }

    #[test]
    fn restriction_types() {
        let f = HiggsField::random(2, lat(), xi0(), c(1.0, 0.0), 7).unwrap();
        let cv = SpectralCurve::build(&f).unwrap();
        assert!(matches!(cv.restriction_type(c(0.4, 0.9)).unwrap(), RestrictionType::SplitDistinct { .. }));
        let b = cv.pi2_branch[0].w.unwrap();
        assert!(matches!(cv.restriction_type(b).unwrap(), RestrictionType::IndecomposableF2 { .. }));
    }

    /// Regular part chosen so that Phi at the half period 1/2 is a Jordan
    /// block: the curve acquires a node there.
    fn nodal_field() -> HiggsField {
        let l = lat();
        let u = vec![c(1.0, 0.2), c(-0.4, 0.7)];
        let v0 = vec![c(0.3, -0.5), c(0.9, 0.1)];
        let d: C64 = u.iter().zip(&v0).map(|(a, b)| a * b).sum();
        let v: Vec<C64> = v0.iter().map(|x| x / d).collect();
        let r = CMat::outer(&u, &v);
        let w1 = c(0.5, 0.0);
        let g = l.zeta(w1 - xi0()).unwrap() - l.zeta(w1 + xi0()).unwrap();
        let a = c(0.6, -0.2);
        let m = CMat::from_rows(&[vec![a, c(1.0, 0.0)], vec![c(0.0, 0.0), a]]).unwrap();
        let cst = m.sub(&r.scale(g));
        HiggsField::build(2, l, xi0(), ResidueData::symmetric(u, v), cst, None).unwrap()
    }

    #[test]
    fn engineered_node_is_double_point() {
        let f = nodal_field();
        // discriminant has a double zero at 1/2 (independent check)
        let disc = |xi: C64| discriminant(&f.char_poly_at(xi).unwrap());
        let h = 1e-3;
        let w1 = c(0.5, 0.0);
        assert!(disc(w1).norm() < 1e-10);
        let second = (disc(w1 + h) + disc(w1 - h) - 2.0 * disc(w1)) / (h * h);
        let first = (disc(w1 + h) - disc(w1 - h)) / (2.0 * h);
        assert!(first.norm() < 1e-6 * second.norm());
        let cv = SpectralCurve::build(&f).unwrap();
        assert!(!cv.smooth);
        let t = cv.restriction_type(c(0.6, -0.2)).unwrap();
        assert!(matches!(t, RestrictionType::DoublePoint { .. }), "{t:?}");
    }

    #[test]
    fn odd_perturbation_breaks_involution() {
        let l = lat();
        let f = HiggsField::random(2, l, xi0(), c(1.0, 0.0), 7).unwrap();
        let odd = crate::elliptic::EllipticFunction::wp_shift(l, xi0(), c(0.3, 0.0))
            .unwrap()
            .add(&crate::elliptic::EllipticFunction::wp_shift(l, -xi0(), c(-0.3, 0.0)).unwrap());
        let g = f.relaxed(&[(0, 0, odd)]).unwrap();
        assert!(!involution_symmetric(&g).unwrap());
        assert!(!g.su2_symmetric);
    }

    #[test]
    fn eigenline_properties() {
        let f = HiggsField::random(2, lat(), xi0(), c(1.0, 0.0), 7).unwrap();
        let cv = SpectralCurve::build(&f).unwrap();
        let xi = c(0.21, 0.77);
        let phi = f.eval(xi).unwrap();
        for w in cv.fiber_over_base(xi).unwrap() {
            let v = cv.eigenline(xi, w).unwrap();
            let r = phi.shift(w).mul_vec(&v);
            assert!(r.iter().map(|x| x.norm()).fold(0.0, f64::max) < 1e-9);
            let n: f64 = v.iter().map(|x| x.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
        let g = HiggsField::random(1, lat(), xi0(), c(1.0, 0.0), 7).unwrap();
        let cg = SpectralCurve::build(&g).unwrap();
        let w = cg.fiber_over_base(xi).unwrap()[0];
        assert_eq!(cg.eigenline(xi, w).unwrap(), vec![c(1.0, 0.0)]);
    }

    #[test]
    fn eigenline_has_no_monodromy_on_small_loop() {
        let f = HiggsField::random(2, lat(), xi0(), c(1.0, 0.0), 7).unwrap();
        let center = c(0.21, 0.77);
        let n = 200;
        let mut w = SpectralCurve::build(&f).unwrap().fiber_over_base(center + 0.01).unwrap()[0];
        let start = eigenline(&f, center + 0.01, w).unwrap();
        let mut prev = start.clone();
        for j in 1..=n {
            let xi = center + C64::from_polar(0.01, 2.0 * std::f64::consts::PI * j as f64 / n as f64);
            let ws = f.eval(xi).unwrap().eigenvalues().unwrap();
            w = *ws.iter().min_by(|a, b| (*a - w).norm().partial_cmp(&(*b - w).norm()).unwrap()).unwrap();
            let v = eigenline(&f, xi, w).unwrap();
            let overlap: C64 = v.iter().zip(&prev).map(|(a, b)| a.conj() * b).sum();
            assert!(overlap.norm() > 0.99);
            prev = v;
        }
        let back: f64 = prev.iter().zip(&start).map(|(a, b)| (a - b).norm()).sum();
        assert!(back < 1e-8);
    }

    #[test]
    fn eigenline_degree_zero() {
        for seed in [7u64, 13] {
            let f = HiggsField::random(2, lat(), xi0(), c(1.0, 0.0), seed).unwrap();
            assert_eq!(eigenline_degree(&f).unwrap(), 0);
        }
        let g = HiggsField::random(1, lat(), xi0(), c(1.0, 0.0), 1).unwrap();
        assert_eq!(eigenline_degree(&g).unwrap(), 0);
    }
}
