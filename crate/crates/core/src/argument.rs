//! Argument-principle zero finding for meromorphic functions on the torus
//! and on parallelograms in the plane.
//!
//! Arguments are tracked along straight edges by adaptive bisection, zero
//! counts are `winding + pole orders`, and located zeros are polished with
//! a multiplicity-aware Newton step.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Lattice;

/// `origin + s e1 + t e2` for `s, t` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parallelogram {
    pub origin: C64,
    pub e1: C64,
    pub e2: C64,
}

impl Parallelogram {
    pub fn new(origin: C64, e1: C64, e2: C64) -> Self {
        Parallelogram { origin, e1, e2 }
    }

    pub fn vertices(&self) -> [C64; 4] {
        let o = self.origin;
        [o, o + self.e1, o + self.e1 + self.e2, o + self.e2]
    }

    pub fn center(&self) -> C64 {
        self.origin + 0.5 * (self.e1 + self.e2)
    }

    pub fn diameter(&self) -> f64 {
        (self.e1 + self.e2).norm().max((self.e1 - self.e2).norm())
    }

    /// Coordinates `(s, t)` of `z`.
    pub fn local(&self, z: C64) -> (f64, f64) {
        let d = z - self.origin;
        let det = self.e1.re * self.e2.im - self.e1.im * self.e2.re;
        let s = (d.re * self.e2.im - d.im * self.e2.re) / det;
        let t = (self.e1.re * d.im - self.e1.im * d.re) / det;
        (s, t)
    }

    pub fn contains(&self, z: C64, margin: f64) -> bool {
        let (s, t) = self.local(z);
        s >= -margin && s <= 1.0 + margin && t >= -margin && t <= 1.0 + margin
    }

    pub fn split(&self) -> [Parallelogram; 4] {
        self.split_at(0.5, 0.5)
    }

    /// Four cells cut at fractions `s` and `t` of the two sides.
    pub fn split_at(&self, s: f64, t: f64) -> [Parallelogram; 4] {
        let (a1, b1) = (s * self.e1, (1.0 - s) * self.e1);
        let (a2, b2) = (t * self.e2, (1.0 - t) * self.e2);
        let o = self.origin;
        [
            Parallelogram::new(o, a1, a2),
            Parallelogram::new(o + a1, b1, a2),
            Parallelogram::new(o + a2, a1, b2),
            Parallelogram::new(o + a1 + a2, b1, b2),
        ]
    }
}

/// A located zero with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub z: C64,
    pub multiplicity: u32,
}

/// Zeros of a function on the torus together with the pole orders used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroSet {
    pub roots: Vec<Root>,
    pub poles: Vec<(C64, u32)>,
}

impl ZeroSet {
    pub fn total_multiplicity(&self) -> u32 {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn total_pole_order(&self) -> u32 {
        self.poles.iter().map(|p| p.1).sum()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroOptions {
    /// Cells per side of the coarse subdivision.
    pub grid: usize,
    /// Cells smaller than this are treated as holding one multiple zero.
    pub min_cell: f64,
    /// Accept a root when `|f| <= f_tol * scale`.
    pub f_tol: f64,
    pub max_retries: usize,
    /// Radius of the circles used to measure pole orders.
    pub pole_radius: f64,
}

impl Default for ZeroOptions {
    fn default() -> Self {
        ZeroOptions { grid: 16, min_cell: 1e-7, f_tol: 1e-10, max_retries: 8, pole_radius: 0.02 }
    }
}

const OFFSETS: [(f64, f64); 8] = [
    (0.0137, 0.0071),
    (-0.0213, 0.0157),
    (0.0311, -0.0229),
    (0.0051, 0.0263),
    (-0.0089, -0.0181),
    (0.0241, 0.0307),
    (-0.0293, 0.0043),
    (0.0173, -0.0127),
];

/// Tracks `arg f` along segments.
pub struct ArgTracker<'a> {
    f: &'a dyn Fn(C64) -> Result<C64>,
    floor: f64,
    min_len: f64,
}

impl<'a> ArgTracker<'a> {
    pub fn new(f: &'a dyn Fn(C64) -> Result<C64>, floor: f64, min_len: f64) -> Self {
        ArgTracker { f, floor, min_len }
    }

    pub fn value(&self, z: C64) -> Result<C64> {
        let v = (self.f)(z).map_err(|e| Error::Contour(format!("evaluation failed on contour: {e}")))?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Contour(format!("non-finite value at {z}")));
        }
        if v.norm() <= self.floor {
            return Err(Error::Contour(format!("contour passes through a zero near {z}")));
        }
        Ok(v)
    }

    fn seg(&self, a: C64, b: C64, fa: C64, fb: C64) -> Result<f64> {
        let m = 0.5 * (a + b);
        let fm = self.value(m)?;
        // Small relative change between neighbouring samples rules out a
        // zero or pole hiding next to the segment.
        let (r1, r2) = (fm / fa, fb / fm);
        let (d1, d2) = (r1.arg(), r2.arg());
        let smooth = (r1 - 1.0).norm() < 0.35 && (r2 - 1.0).norm() < 0.35;
        if smooth {
            return Ok(d1 + d2);
        }
        if (b - a).norm() < self.min_len.max(8.0 * f64::EPSILON * (1.0 + a.norm())) {
            return Err(Error::Contour(format!("argument unresolved near {m}")));
        }
        Ok(self.seg(a, m, fa, fm)? + self.seg(m, b, fm, fb)?)
    }

    /// Change of `arg f` from `a` to `b`.
    pub fn edge(&self, a: C64, b: C64) -> Result<f64> {
        let fa = self.value(a)?;
        let fb = self.value(b)?;
        self.edge_with(a, b, fa, fb)
    }

    pub fn edge_with(&self, a: C64, b: C64, fa: C64, fb: C64) -> Result<f64> {
        const PIECES: usize = 4;
        let mut total = 0.0;
        let mut prev = (a, fa);
        for j in 1..=PIECES {
            let z = a + (b - a) * (j as f64 / PIECES as f64);
            let fz = if j == PIECES { fb } else { self.value(z)? };
            total += self.seg(prev.0, z, prev.1, fz)?;
            prev = (z, fz);
        }
        Ok(total)
    }

    /// Winding number of `f` around a closed polygon.
    pub fn winding_polygon(&self, vertices: &[C64]) -> Result<i64> {
        let mut total = 0.0;
        for j in 0..vertices.len() {
            let a = vertices[j];
            let b = vertices[(j + 1) % vertices.len()];
            total += self.edge(a, b)?;
        }
        to_integer(total)
    }

    /// Winding number around a circle.
    pub fn winding_circle(&self, center: C64, radius: f64) -> Result<i64> {
        let n = 16;
        let pts: Vec<C64> = (0..n)
            .map(|j| center + C64::from_polar(radius, 2.0 * PI * j as f64 / n as f64))
            .collect();
        self.winding_polygon(&pts)
    }
}

fn to_integer(total: f64) -> Result<i64> {
    let w = total / (2.0 * PI);
    let r = w.round();
    if (w - r).abs() > 0.05 {
        return Err(Error::Contour(format!("winding {w} is not close to an integer")));
    }
    Ok(r as i64)
}

/// Winding number of `f` around the boundary of a parallelogram.
pub fn winding(f: &dyn Fn(C64) -> Result<C64>, region: &Parallelogram) -> Result<i64> {
    let scale = boundary_scale(f, region);
    let t = ArgTracker::new(f, 1e-14 * scale, 1e-13 * region.diameter());
    t.winding_polygon(&region.vertices())
}

fn boundary_scale(f: &dyn Fn(C64) -> Result<C64>, region: &Parallelogram) -> f64 {
    let mut vals: Vec<f64> = region
        .vertices()
        .iter()
        .chain([region.center()].iter())
        .filter_map(|&z| f(z).ok().map(|v| v.norm()))
        .filter(|v| v.is_finite())
        .collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals.get(vals.len() / 2).copied().unwrap_or(1.0).max(1e-300)
}

/// Order of the pole of `f` at `p`, from the winding on a small circle.
/// Returns 0 for a regular point and negative values for zeros.
pub fn pole_order(f: &dyn Fn(C64) -> Result<C64>, p: C64, radius: f64) -> Result<i64> {
    let probe = |r: f64| -> Result<i64> {
        let scale = f(p + r).map(|v| v.norm()).unwrap_or(1.0).max(1e-300);
        let t = ArgTracker::new(f, 1e-14 * scale, 1e-9 * r);
        Ok(-t.winding_circle(p, r)?)
    };
    let mut last = None;
    for k in 0..4 {
        let r = radius * 0.37f64.powi(k);
        match probe(r) {
            Ok(o) => {
                if last == Some(o) {
                    return Ok(o);
                }
                last = Some(o);
            }
            Err(_) => continue,
        }
    }
    last.ok_or_else(|| Error::Contour(format!("could not measure pole order at {p}")))
}

/// Poles of `f` (given as representatives with orders) lying in `region`.
fn poles_inside(region: &Parallelogram, lattice: Option<&Lattice>, poles: &[(C64, u32)]) -> u32 {
    let mut n = 0;
    for &(p, o) in poles {
        match lattice {
            Some(l) => {
                for a in -2..=2 {
                    for b in -2..=2 {
                        let z = p + a as f64 + b as f64 * l.tau;
                        if region.contains(z, 0.0) {
                            n += o;
                        }
                    }
                }
            }
            None => {
                if region.contains(p, 0.0) {
                    n += o;
                }
            }
        }
    }
    n
}

/// Number of zeros minus nothing: winding plus enclosed pole orders.
pub fn count_zeros(
    f: &dyn Fn(C64) -> Result<C64>,
    region: &Parallelogram,
    lattice: Option<&Lattice>,
    poles: &[(C64, u32)],
) -> Result<i64> {
    let w = winding(f, region)?;
    Ok(w + poles_inside(region, lattice, poles) as i64)
}

fn newton(f: &dyn Fn(C64) -> Result<C64>, z0: C64, m: u32, h: f64) -> Option<C64> {
    let mut z = z0;
    for _ in 0..80 {
        let fz = f(z).ok()?;
        if fz.norm() == 0.0 {
            return Some(z);
        }
        let d = (f(z + h).ok()? - f(z - h).ok()?) / (2.0 * h);
        if d.norm() == 0.0 || !d.re.is_finite() {
            return None;
        }
        let step = m as f64 * fz / d;
        z -= step;
        if step.norm() < 1e-15 * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    // Multiple zeros converge slowly; accept the last iterate and let the
    // residual test decide.
    Some(z)
}

struct Resolver<'a> {
    f: &'a dyn Fn(C64) -> Result<C64>,
    lattice: Option<&'a Lattice>,
    poles: &'a [(C64, u32)],
    opts: ZeroOptions,
    scale: f64,
}

impl<'a> Resolver<'a> {
    fn accept(&self, z: C64, cell: &Parallelogram) -> bool {
        let margin = 1e-7;
        if !cell.contains(z, margin) {
            return false;
        }
        match (self.f)(z) {
            Ok(v) => v.norm() <= self.opts.f_tol * self.scale.max(1.0),
            Err(_) => false,
        }
    }

    fn resolve(&self, cell: &Parallelogram, count: i64, out: &mut Vec<Root>) -> Result<()> {
        if count <= 0 {
            if count < 0 {
                return Err(Error::Contour(format!("negative zero count in cell at {}", cell.origin)));
            }
            return Ok(());
        }
        let diam = cell.diameter();
        let h = (1e-4 * diam).clamp(1e-11, 1e-6);
        if count == 1 {
            if let Some(z) = newton(self.f, cell.center(), 1, h) {
                if self.accept(z, cell) {
                    out.push(Root { z, multiplicity: 1 });
                    return Ok(());
                }
            }
        }
        if diam < self.opts.min_cell {
            let m = count as u32;
            let z = newton(self.f, cell.center(), m, h).unwrap_or(cell.center());
            let z = if cell.contains(z, 1.0) { z } else { cell.center() };
            out.push(Root { z, multiplicity: m });
            return Ok(());
        }
        // Cut lines that graze a zero are moved and retried.
        let mut last = Error::Contour("no split attempted".into());
        for (ds, dt) in [(0.0, 0.0), (0.0173, -0.0119), (-0.0291, 0.0231), (0.0412, 0.0377)] {
            let subs = cell.split_at(0.5 + ds, 0.5 + dt);
            let counts: Result<Vec<i64>> =
                subs.iter().map(|s| count_zeros(self.f, s, self.lattice, self.poles)).collect();
            let counts = match counts {
                Ok(c) => c,
                Err(e) => {
                    last = e;
                    continue;
                }
            };
            if counts.iter().sum::<i64>() != count {
                last = Error::Contour(format!("subdivision counts {:?} do not add up to {count}", counts));
                continue;
            }
            for (j, s) in subs.iter().enumerate() {
                self.resolve(s, counts[j], out)?;
            }
            return Ok(());
        }
        // A multiple zero whose neighbourhood sinks into rounding noise
        // cannot be split further; report the cluster.
        if count >= 2 && diam < 1e-3 {
            let m = count as u32;
            let z = newton(self.f, cell.center(), m, h).filter(|z| cell.contains(*z, 0.5)).unwrap_or(cell.center());
            out.push(Root { z, multiplicity: m });
            return Ok(());
        }
        Err(last)
    }
}

/// All zeros of `f` inside a parallelogram of the plane.
pub fn find_zeros_region(
    f: &dyn Fn(C64) -> Result<C64>,
    region: &Parallelogram,
    poles: &[(C64, u32)],
    opts: ZeroOptions,
) -> Result<Vec<Root>> {
    let scale = boundary_scale(f, region);
    let count = count_zeros(f, region, None, poles)?;
    let r = Resolver { f, lattice: None, poles, opts, scale };
    let mut out = vec![];
    r.resolve(region, count, &mut out)?;
    let mut merged: Vec<Root> = vec![];
    for x in out {
        if let Some(o) = merged.iter_mut().find(|o| (o.z - x.z).norm() < 1e-9) {
            o.multiplicity = o.multiplicity.max(x.multiplicity);
        } else {
            merged.push(x);
        }
    }
    Ok(merged)
}

/// Measure the pole orders of `f` at the given points.
pub fn measure_poles(
    f: &dyn Fn(C64) -> Result<C64>,
    lattice: &Lattice,
    at: &[C64],
    radius: f64,
) -> Result<Vec<(C64, u32)>> {
    let mut seen: Vec<C64> = vec![];
    let mut out = vec![];
    for &p in at {
        if seen.iter().any(|&s| lattice.same_point(s, p, 1e-9)) {
            continue;
        }
        seen.push(p);
        let o = pole_order(f, p, radius)?;
        if o < 0 {
            return Err(Error::Contour(format!("point {p} declared a pole but f vanishes there")));
        }
        out.push((p, o as u32));
    }
    Ok(out)
}

/// All zeros of an elliptic function on the torus. `pole_points` lists the
/// candidate pole locations; their orders are measured numerically.
pub fn find_zeros_torus(
    f: &dyn Fn(C64) -> Result<C64>,
    lattice: &Lattice,
    pole_points: &[C64],
    opts: ZeroOptions,
) -> Result<ZeroSet> {
    let poles = measure_poles(f, lattice, pole_points, opts.pole_radius)?;
    find_zeros_torus_with_poles(f, lattice, &poles, opts)
}

/// As [`find_zeros_torus`] with known pole orders.
pub fn find_zeros_torus_with_poles(
    f: &dyn Fn(C64) -> Result<C64>,
    lattice: &Lattice,
    poles: &[(C64, u32)],
    opts: ZeroOptions,
) -> Result<ZeroSet> {
    let mut last_err = Error::Contour("no attempt made".into());
    for attempt in 0..opts.max_retries.min(OFFSETS.len()) {
        let (da, db) = OFFSETS[attempt];
        let origin = C64::new(da, 0.0) + db * lattice.tau;
        match torus_attempt(f, lattice, poles, opts, origin) {
            Ok(roots) => {
                return Ok(ZeroSet { roots, poles: poles.to_vec() });
            }
            Err(e) => last_err = e,
        }
    }
    Err(Error::Contour(format!(
        "argument principle failed after {} contour perturbations: {last_err}",
        opts.max_retries
    )))
}

fn torus_attempt(
    f: &dyn Fn(C64) -> Result<C64>,
    lattice: &Lattice,
    poles: &[(C64, u32)],
    opts: ZeroOptions,
    origin: C64,
) -> Result<Vec<Root>> {
    let g = opts.grid;
    let (d1, d2) = (C64::new(1.0 / g as f64, 0.0), lattice.tau / g as f64);
    // Poles must sit well away from the grid lines.
    for &(p, _) in poles {
        let (a, b) = lattice.coords(p - origin);
        let (fa, fb) = ((a * g as f64).rem_euclid(1.0), (b * g as f64).rem_euclid(1.0));
        if fa.min(1.0 - fa) < 1e-3 || fb.min(1.0 - fb) < 1e-3 {
            return Err(Error::Contour(format!("pole {p} too close to the grid")));
        }
    }
    let vertex = |i: usize, j: usize| origin + d1 * i as f64 + d2 * j as f64;
    let mut vals = vec![C64::new(0.0, 0.0); g * g];
    let mut mags = Vec::with_capacity(g * g);
    for j in 0..g {
        for i in 0..g {
            let v = f(vertex(i, j)).map_err(|e| Error::Contour(e.to_string()))?;
            vals[j * g + i] = v;
            mags.push(v.norm());
        }
    }
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let scale = mags[mags.len() / 2].max(1e-300);
    let tracker = ArgTracker::new(f, 1e-14 * scale, 1e-10 * d1.norm().min(d2.norm()));
    let val = |i: usize, j: usize| vals[(j % g) * g + (i % g)];
    // horizontal edges h[j][i]: vertex(i,j) -> vertex(i+1,j); periodic in j
    let mut hor = vec![0.0; g * g];
    let mut ver = vec![0.0; g * g];
    for j in 0..g {
        for i in 0..g {
            hor[j * g + i] = tracker.edge_with(vertex(i, j), vertex(i + 1, j), val(i, j), val(i + 1, j))?;
            ver[j * g + i] = tracker.edge_with(vertex(i, j), vertex(i, j + 1), val(i, j), val(i, j + 1))?;
        }
    }
    let resolver = Resolver { f, lattice: Some(lattice), poles, opts, scale };
    let mut roots = vec![];
    let mut total = 0i64;
    for j in 0..g {
        for i in 0..g {
            let w = hor[j * g + i] + ver[j * g + (i + 1) % g]
                - hor[((j + 1) % g) * g + i]
                - ver[j * g + i];
            let cell = Parallelogram::new(vertex(i, j), d1, d2);
            let count = to_integer(w)? + poles_inside(&cell, Some(lattice), poles) as i64;
            total += count.max(0);
            resolver.resolve(&cell, count, &mut roots)?;
        }
    }
    let expected: u32 = poles.iter().map(|p| p.1).sum();
    if total != expected as i64 {
        return Err(Error::Contour(format!(
            "found {total} zeros but the poles have total order {expected}"
        )));
    }
    let roots = dedupe(lattice, roots);
    let located: u32 = roots.iter().map(|r| r.multiplicity).sum();
    if located != expected {
        return Err(Error::Contour(format!("located {located} zeros, expected {expected}")));
    }
    Ok(roots
        .into_iter()
        .map(|r| Root { z: lattice.reduce_fundamental(r.z), multiplicity: r.multiplicity })
        .collect())
}

fn dedupe(lattice: &Lattice, roots: Vec<Root>) -> Vec<Root> {
    let mut out: Vec<Root> = vec![];
    for r in roots {
        if let Some(o) = out.iter_mut().find(|o| lattice.same_point(o.z, r.z, 1e-9)) {
            o.multiplicity = o.multiplicity.max(r.multiplicity);
        } else {
            out.push(r);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn polynomial_roots_in_square() {
        let roots = [c(0.1, 0.2), c(-0.3, 0.05), c(0.25, -0.35)];
        let f = move |z: C64| -> Result<C64> { Ok(roots.iter().fold(c(1.0, 0.0), |a, &r| a * (z - r))) };
        let region = Parallelogram::new(c(-0.5, -0.5), c(1.0, 0.0), c(0.0, 1.0));
        let found = find_zeros_region(&f, &region, &[], ZeroOptions::default()).unwrap();
        assert_eq!(found.len(), 3);
        for r in roots {
            assert!(found.iter().any(|x| (x.z - r).norm() < 1e-10));
        }
    }

    #[test]
    fn double_root_gets_multiplicity_two() {
        let f = |z: C64| -> Result<C64> { Ok((z - c(0.1, 0.1)).powi(2) * (z + c(0.2, 0.0))) };
        let region = Parallelogram::new(c(-0.5, -0.5), c(1.0, 0.0), c(0.0, 1.0));
        let found = find_zeros_region(&f, &region, &[], ZeroOptions::default()).unwrap();
        let total: u32 = found.iter().map(|r| r.multiplicity).sum();
        assert_eq!(total, 3);
        assert!(found.iter().any(|r| r.multiplicity == 2 && (r.z - c(0.1, 0.1)).norm() < 1e-6));
    }

    #[test]
    fn rational_function_counts_zeros_with_poles() {
        let f = |z: C64| -> Result<C64> { Ok((z - c(0.1, 0.0)) * (z + c(0.1, 0.3)) / (z * z)) };
        let region = Parallelogram::new(c(-0.5, -0.45), c(1.0, 0.0), c(0.0, 1.0));
        assert_eq!(count_zeros(&f, &region, None, &[(c(0.0, 0.0), 2)]).unwrap(), 2);
        assert_eq!(pole_order(&f, c(0.0, 0.0), 0.05).unwrap(), 2);
    }

    #[test]
    fn wp_minus_constant_on_torus() {
        let lat = Lattice::new(c(0.1, 1.1)).unwrap();
        let target = c(1.3, -0.7);
        let f = move |z: C64| -> Result<C64> { Ok(lat.wp(z)? - target) };
        let zs = find_zeros_torus(&f, &lat, &[c(0.0, 0.0)], ZeroOptions::default()).unwrap();
        assert_eq!(zs.total_pole_order(), 2);
        assert_eq!(zs.roots.len(), 2);
        // the two zeros are negatives of each other
        assert!(lat.same_point(zs.roots[0].z, -zs.roots[1].z, 1e-8));
        for r in &zs.roots {
            assert!((lat.wp(r.z).unwrap() - target).norm() < 1e-9);
        }
    }

    #[test]
    fn wp_prime_zeros_are_half_periods() {
        let lat = Lattice::new(c(-0.2, 0.9)).unwrap();
        let f = move |z: C64| lat.wp_prime(z);
        let zs = find_zeros_torus(&f, &lat, &[c(0.0, 0.0)], ZeroOptions::default()).unwrap();
        assert_eq!(zs.total_pole_order(), 3);
        assert_eq!(zs.roots.len(), 3);
        for h in &lat.half_periods()[1..] {
            assert!(zs.roots.iter().any(|r| lat.same_point(r.z, *h, 1e-8)));
        }
    }
}
