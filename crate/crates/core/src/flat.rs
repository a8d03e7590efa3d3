//! Flat model on `T x C`: the twisted torus Laplacian, the screened
//! fundamental solution `K0(lambda |w|) / 2pi`, and the Green operator.
//!
//! Conventions: unit square torus, modes `phi_n(z) = exp(i (2 pi n + xi) . z)`,
//! positive Laplacians, so each mode solves `(-d^2_w + lambda_n^2) g_n = rho_n`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `K0` by its power series. Accurate for `r <= 2`.
pub fn k0_series(r: f64) -> f64 {
    let t = r * r / 4.0;
    let (mut term, mut i0, mut acc, mut h) = (1.0, 1.0, 0.0, 0.0);
    for k in 1..200 {
        let kf = k as f64;
        term *= t / (kf * kf);
        h += 1.0 / kf;
        i0 += term;
        acc += term * h;
        if term < 1e-18 * i0 {
            break;
        }
    }
    -((r / 2.0).ln() + EULER_GAMMA) * i0 + acc
}

/// `exp(r) int_0^inf exp(-r cosh t) cosh(m t) dt`, trapezoid rule.
fn scaled_cosh_integral(r: f64, m: f64) -> f64 {
    // the integrand narrows like a gaussian of width r^{-1/2}
    let h = 0.25f64.min((0.5 / r).sqrt());
    // r (cosh t - 1) > 45 makes the tail negligible
    let t_max = (1.0 + 45.0 / r).acosh() + 1.0;
    let mut s = 0.5;
    let mut t = h;
    while t < t_max {
        s += (-r * (t.cosh() - 1.0)).exp() * (m * t).cosh();
        t += h;
    }
    s * h
}

/// `K0(r) = int_0^inf exp(-r cosh t) dt`.
pub fn k0_integral(r: f64) -> f64 {
    (-r).exp() * scaled_cosh_integral(r, 0.0)
}

pub fn k0(r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("K0 needs r > 0, got {r}")));
    }
    Ok(if r <= 2.0 { k0_series(r) } else { k0_integral(r) })
}

pub fn k1(r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("K1 needs r > 0, got {r}")));
    }
    Ok((-r).exp() * scaled_cosh_integral(r, 1.0))
}

/// `int_{R^2} K0(|w|) d^2w`, by quadrature in `s = ln r`.
pub fn k0_l1() -> f64 {
    let h = 0.01;
    let mut s = -30.0;
    let mut acc = 0.0;
    while s < 60f64.ln() {
        let r = s.exp();
        acc += r * r * k0(r).unwrap();
        s += h;
    }
    2.0 * PI * acc * h
}

/// Sorted `|2 pi n + xi|` over `|n|_inf <= cutoff`.
pub fn torus_spectrum(xi: [f64; 2], cutoff: i32) -> Vec<f64> {
    let mut v: Vec<f64> = modes(cutoff).iter().map(|n| mode_lambda(xi, *n)).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

pub fn mode_lambda(xi: [f64; 2], n: [i32; 2]) -> f64 {
    let k = [2.0 * PI * n[0] as f64 + xi[0], 2.0 * PI * n[1] as f64 + xi[1]];
    (k[0] * k[0] + k[1] * k[1]).sqrt()
}

fn modes(cutoff: i32) -> Vec<[i32; 2]> {
    let mut v = vec![];
    for a in -cutoff..=cutoff {
        for b in -cutoff..=cutoff {
            v.push([a, b]);
        }
    }
    v
}

#[derive(Debug, Clone, Serialize)]
pub struct FlatModelOperator {
    pub xi: [f64; 2],
    pub cutoff: i32,
    /// Half-width: the plane grid covers `[-extent, extent]^2`.
    pub extent: f64,
    /// Points per side.
    pub resolution: usize,
    /// `(lambda_n, n)` ascending.
    pub spectrum: Vec<(f64, [i32; 2])>,
}

impl FlatModelOperator {
    pub fn new(xi: [f64; 2], cutoff: i32) -> Result<Self> {
        let lmin = torus_spectrum(xi, cutoff.max(1))[0];
        let extent = if lmin > 0.0 { (20.0 / lmin).max(10.0) } else { 10.0 };
        Self::with_grid(xi, cutoff, extent, 256)
    }

    pub fn with_grid(xi: [f64; 2], cutoff: i32, extent: f64, resolution: usize) -> Result<Self> {
        if cutoff < 1 {
            return Err(Error::Validation("Fourier cutoff must be at least 1".into()));
        }
        if !(extent > 0.0) || resolution < 8 {
            return Err(Error::Validation("plane grid too small".into()));
        }
        let mut spectrum: Vec<(f64, [i32; 2])> = modes(cutoff).into_iter().map(|n| (mode_lambda(xi, n), n)).collect();
        spectrum.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(FlatModelOperator { xi, cutoff, extent, resolution, spectrum })
    }

    pub fn lambda_min(&self) -> f64 {
        self.spectrum[0].0
    }

    pub fn h(&self) -> f64 {
        2.0 * self.extent / self.resolution as f64
    }

    /// Cell-centre coordinate of index `i`.
    pub fn coord(&self, i: usize) -> f64 {
        -self.extent + (i as f64 + 0.5) * self.h()
    }

    pub fn lambda(&self, n: [i32; 2]) -> f64 {
        mode_lambda(self.xi, n)
    }

    fn require_invertible(&self) -> Result<()> {
        if self.lambda_min() < 1e-12 {
            return Err(Error::Invertibility(format!(
                "twist {:?} is trivial: the flat Laplacian has a zero mode",
                self.xi
            )));
        }
        Ok(())
    }
}

/// A section over `T x C`, stored by Fourier mode on the plane grid
/// (row-major, index `i * resolution + j` for `(x_i, y_j)`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaneField {
    pub extent: f64,
    pub resolution: usize,
    pub modes: Vec<([i32; 2], Vec<C64>)>,
    pub warnings: Vec<String>,
}

impl PlaneField {
    pub fn zeros_like(op: &FlatModelOperator) -> Self {
        PlaneField { extent: op.extent, resolution: op.resolution, modes: vec![], warnings: vec![] }
    }

    fn h(&self) -> f64 {
        2.0 * self.extent / self.resolution as f64
    }

    /// Compactly supported smooth bump `(1 - r^2/R^2)^4` in the given modes.
    pub fn bump(op: &FlatModelOperator, center: [f64; 2], radius: f64, weights: &[([i32; 2], C64)]) -> Self {
        let n = op.resolution;
        let mut base = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (op.coord(i) - center[0], op.coord(j) - center[1]);
                let s = (x * x + y * y) / (radius * radius);
                if s < 1.0 {
                    base[i * n + j] = C64::new((1.0 - s).powi(4), 0.0);
                }
            }
        }
        PlaneField {
            extent: op.extent,
            resolution: n,
            modes: weights.iter().map(|(m, c)| (*m, base.iter().map(|b| b * c).collect())).collect(),
            warnings: vec![],
        }
    }

    pub fn mode(&self, n: [i32; 2]) -> Option<&[C64]> {
        self.modes.iter().find(|(m, _)| *m == n).map(|(_, g)| &g[..])
    }

    /// `sum_n ||g_n||^2`.
    pub fn norm2(&self) -> f64 {
        let h2 = self.h() * self.h();
        self.modes.iter().map(|(_, g)| g.iter().map(|c| c.norm_sqr()).sum::<f64>()).sum::<f64>() * h2
    }

    /// `||f||^2` from point samples on `T x C`; equals `norm2` by Parseval.
    pub fn sampled_norm2(&self, xi: [f64; 2]) -> f64 {
        let nmax = self.modes.iter().map(|(m, _)| m[0].abs().max(m[1].abs())).max().unwrap_or(0);
        let m = (2 * nmax + 2) as usize;
        let h2 = self.h() * self.h();
        let mut phases = vec![];
        for a in 0..m {
            for b in 0..m {
                let z = [a as f64 / m as f64, b as f64 / m as f64];
                phases.push(
                    self.modes
                        .iter()
                        .map(|(n, _)| {
                            let k = [2.0 * PI * n[0] as f64 + xi[0], 2.0 * PI * n[1] as f64 + xi[1]];
                            C64::from_polar(1.0, k[0] * z[0] + k[1] * z[1])
                        })
                        .collect::<Vec<_>>(),
                );
            }
        }
        let mut acc = 0.0;
        for p in 0..self.resolution * self.resolution {
            for ph in &phases {
                let f: C64 = self.modes.iter().zip(ph).map(|((_, g), e)| g[p] * e).sum();
                acc += f.norm_sqr();
            }
        }
        acc * h2 / (m * m) as f64
    }

    /// Pointwise `sqrt(sum_n |g_n|^2)`, the `L^2(T)` norm over each plane point.
    pub fn amplitude(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.resolution * self.resolution];
        for (_, g) in &self.modes {
            for (o, c) in out.iter_mut().zip(g) {
                *o += c.norm_sqr();
            }
        }
        out.iter().map(|x| x.sqrt()).collect()
    }

    pub fn lin_comb(&self, a: C64, other: &Self, b: C64) -> Self {
        let mut out = self.clone();
        out.modes = vec![];
        let mut keys: Vec<[i32; 2]> = self.modes.iter().chain(&other.modes).map(|(m, _)| *m).collect();
        keys.dedup();
        keys.sort();
        keys.dedup();
        let zero = vec![C64::new(0.0, 0.0); self.resolution * self.resolution];
        for k in keys {
            let x = self.mode(k).unwrap_or(&zero);
            let y = other.mode(k).unwrap_or(&zero);
            out.modes.push((k, x.iter().zip(y).map(|(p, q)| a * p + b * q).collect()));
        }
        out
    }

    /// Amplitude grid as CSV rows `x,y,amplitude`.
    pub fn to_csv(&self) -> String {
        let amp = self.amplitude();
        let h = self.h();
        let mut s = String::from("x,y,amplitude\n");
        for i in 0..self.resolution {
            for j in 0..self.resolution {
                let (x, y) = (-self.extent + (i as f64 + 0.5) * h, -self.extent + (j as f64 + 0.5) * h);
                s.push_str(&format!("{x},{y},{:e}\n", amp[i * self.resolution + j]));
            }
        }
        s
    }
}

/// Tabulated `h^2 K0(lambda |d|) / 2pi` on grid offsets `0..=n` per axis, the
/// centre cell integrated exactly over the disc of equal area.
fn kernel_table(lambda: f64, h: f64, n: usize) -> Vec<f64> {
    let mut t = vec![0.0; (n + 1) * (n + 1)];
    for a in 0..=n {
        for b in 0..=n {
            if a == 0 && b == 0 {
                let x = lambda * h / PI.sqrt();
                t[0] = (1.0 - x * k1(x).unwrap()) / (lambda * lambda);
            } else {
                let r = lambda * h * ((a * a + b * b) as f64).sqrt();
                t[a * (n + 1) + b] = h * h * k0(r).unwrap() / (2.0 * PI);
            }
        }
    }
    t
}

/// Gauss-Legendre rule on `[0, 1]`.
fn gauss_unit(m: usize) -> Vec<(f64, f64)> {
    GaussLegendre::new(NonZeroUsize::new(m).expect("positive order")).iter().map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect()
}

/// Galerkin matrix of `G = K0(lambda |w|) / 2 pi` on cell indicators, as a
/// function of the cell offset: `h^{-2} int_{cell_i} int_{cell_j} G`. Its
/// operator norm never exceeds `||G||_{L^2 -> L^2} = 1 / lambda^2`.
fn galerkin_table(lambda: f64, h: f64, n: usize) -> Vec<f64> {
    let fine = gauss_unit(16);
    let coarse = gauss_unit(6);
    let g = |x: f64, y: f64| k0(lambda * (x * x + y * y).sqrt()).unwrap_or(0.0) / (2.0 * PI);
    let mut t = vec![0.0; (n + 1) * (n + 1)];
    for a in 0..=n {
        for b in 0..=n {
            let (ca, cb) = (a as f64 * h, b as f64 * h);
            // offset density is the product of two unit tents of half-width h
            let f = |x: f64, y: f64| g(x, y) * (1.0 - (x - ca).abs() / h) * (1.0 - (y - cb).abs() / h) / (h * h);
            let corner = |lo: f64, hi: f64| {
                if lo == 0.0 {
                    Some(1.0)
                } else if hi == 0.0 {
                    Some(-1.0)
                } else {
                    None
                }
            };
            let mut acc = 0.0;
            for (x0, x1) in [(ca - h, ca), (ca, ca + h)] {
                for (y0, y1) in [(cb - h, cb), (cb, cb + h)] {
                    if let (Some(dx), Some(dy)) = (corner(x0, x1), corner(y0, y1)) {
                        // log singularity at a corner: Duffy split into two triangles
                        // s = q^2 smooths the remaining s ln s behaviour
                        for &(q, wq) in &fine {
                            let s = q * q;
                            for &(u, wu) in &fine {
                                let v = f(dx * h * s, dy * h * s * u) + f(dx * h * s * u, dy * h * s);
                                acc += 2.0 * q * wq * wu * h * h * s * v;
                            }
                        }
                    } else {
                        let rule = if a.max(b) <= 8 { &fine } else { &coarse };
                        for &(s, ws) in rule {
                            for &(u, wu) in rule {
                                acc += ws * wu * h * h * f(x0 + h * s, y0 + h * u);
                            }
                        }
                    }
                }
            }
            t[a * (n + 1) + b] = h * h * acc;
        }
    }
    t
}

/// Mode-wise convolution with the screened fundamental solution.
pub fn solve_flat(op: &FlatModelOperator, rho: &PlaneField) -> Result<PlaneField> {
    op.require_invertible()?;
    if rho.resolution != op.resolution || (rho.extent - op.extent).abs() > 1e-12 * op.extent {
        return Err(Error::Validation("source grid does not match the operator grid".into()));
    }
    let n = op.resolution;
    let mut out = PlaneField::zeros_like(op);
    // support margin
    let mut reach = 0.0f64;
    for (_, g) in &rho.modes {
        for (p, c) in g.iter().enumerate() {
            if c.norm() > 0.0 {
                reach = reach.max(op.coord(p / n).abs()).max(op.coord(p % n).abs());
            }
        }
    }
    let margin = op.extent - reach;
    if margin < 5.0 / op.lambda_min() {
        out.warnings.push(format!(
            "truncation: source support is {margin:.3} from the grid edge, less than 5/lambda_min = {:.3}",
            5.0 / op.lambda_min()
        ));
    }
    let mut tables: HashMap<u64, Vec<f64>> = HashMap::new();
    for (m, g) in &rho.modes {
        let lambda = op.lambda(*m);
        if lambda < 1e-12 {
            return Err(Error::Invertibility(format!("mode {m:?} has lambda = 0")));
        }
        let t = tables.entry(lambda.to_bits()).or_insert_with(|| kernel_table(lambda, op.h(), n));
        out.modes.push((*m, convolve_direct(t, g, n)));
    }
    Ok(out)
}

/// Direct sum over the support of `src`; keeps relative accuracy in the tails.
fn convolve_direct(t: &[f64], src: &[C64], n: usize) -> Vec<C64> {
    let w = n + 1;
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for (p, &c) in src.iter().enumerate() {
        if c.norm() == 0.0 {
            continue;
        }
        let (si, sj) = (p / n, p % n);
        for i in 0..n {
            let row = &t[si.abs_diff(i) * w..si.abs_diff(i) * w + w];
            let o = &mut out[i * n..(i + 1) * n];
            for (j, oj) in o.iter_mut().enumerate() {
                *oj += c * row[sj.abs_diff(j)];
            }
        }
    }
    out
}

/// Relative residual `||(-Delta_h + lambda^2) g - rho|| / ||rho||` over the
/// interior, worst mode. `Delta_h` is the 5-point stencil.
pub fn residual(op: &FlatModelOperator, rho: &PlaneField, f: &PlaneField) -> f64 {
    let n = op.resolution;
    let h2 = op.h() * op.h();
    let mut worst = 0.0f64;
    for (m, r) in &rho.modes {
        let g = match f.mode(*m) {
            Some(g) => g,
            None => return f64::INFINITY,
        };
        let l2 = op.lambda(*m).powi(2);
        let (mut num, mut den) = (0.0, 0.0);
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                let p = i * n + j;
                let lap = (4.0 * g[p] - g[p - 1] - g[p + 1] - g[p - n] - g[p + n]) / h2;
                num += (lap + l2 * g[p] - r[p]).norm_sqr();
                den += r[p].norm_sqr();
            }
        }
        worst = worst.max((num / den).sqrt());
    }
    worst
}

/// Exponential decay rate of the amplitude: least-squares slope of
/// `log |f|` against `|w|` on the annulus `[0.5, 0.8] * extent`.
pub fn decay_fit(f: &PlaneField) -> Result<f64> {
    let amp = f.amplitude();
    let n = f.resolution;
    let h = f.h();
    let (mut sx, mut sy, mut sxx, mut sxy, mut cnt) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (-f.extent + (i as f64 + 0.5) * h, -f.extent + (j as f64 + 0.5) * h);
            let r = (x * x + y * y).sqrt();
            if r < 0.5 * f.extent || r > 0.8 * f.extent {
                continue;
            }
            let a = amp[i * n + j];
            if !(a > 1e-280) {
                return Err(Error::Numerical(format!(
                    "field is below the floating-point floor at |w| = {r:.3}: increase the grid or reduce the extent"
                )));
            }
            let ly = a.ln();
            sx += r;
            sy += ly;
            sxx += r * r;
            sxy += r * ly;
            cnt += 1.0;
        }
    }
    if cnt < 3.0 {
        return Err(Error::Numerical("annulus holds too few grid points: increase the grid".into()));
    }
    let slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    Ok(-slope)
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenNorm {
    /// Estimated norm of `G : L^2 -> L^2_2`, i.e. `1 + ||G||_{L^2 -> L^2}`.
    pub empirical: f64,
    /// `1 + C / lambda_min^2`.
    pub bound: f64,
    pub constant: f64,
    pub l2_norm: f64,
    pub starts: usize,
}

fn fft2(data: &mut [C64], n: usize, planner: &mut FftPlanner<f64>, inverse: bool) {
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = data[i * n + j];
        }
        fft.process(&mut col);
        for i in 0..n {
            data[i * n + j] = col[i];
        }
    }
}

/// Convolution with a tabulated kernel restricted to the box, via a padded FFT.
struct BoxConvolution {
    n: usize,
    kernel_hat: Vec<C64>,
    planner: FftPlanner<f64>,
}

impl BoxConvolution {
    fn new(t: &[f64], n: usize) -> Self {
        let m = 2 * n;
        let mut k = vec![C64::new(0.0, 0.0); m * m];
        for a in 0..m {
            for b in 0..m {
                let (da, db) = (a.min(m - a), b.min(m - b));
                if da < n && db < n {
                    k[a * m + b] = C64::new(t[da * (n + 1) + db], 0.0);
                }
            }
        }
        let mut planner = FftPlanner::new();
        fft2(&mut k, m, &mut planner, false);
        BoxConvolution { n, kernel_hat: k, planner }
    }

    fn apply(&mut self, x: &[f64]) -> Vec<f64> {
        let (n, m) = (self.n, 2 * self.n);
        let mut buf = vec![C64::new(0.0, 0.0); m * m];
        for i in 0..n {
            for j in 0..n {
                buf[i * m + j] = C64::new(x[i * n + j], 0.0);
            }
        }
        fft2(&mut buf, m, &mut self.planner, false);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        fft2(&mut buf, m, &mut self.planner, true);
        let s = 1.0 / (m * m) as f64;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = buf[i * m + j].re * s;
            }
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest eigenvalue of a symmetric operator by Krylov-accelerated power
/// iteration (Lanczos with full reorthogonalisation).
fn top_eigenvalue(op: &mut BoxConvolution, start: Vec<f64>) -> Result<f64> {
    let mut basis: Vec<Vec<f64>> = vec![];
    let mut alpha = vec![];
    let mut beta: Vec<f64> = vec![];
    let nrm = dot(&start, &start).sqrt();
    let mut q: Vec<f64> = start.iter().map(|x| x / nrm).collect();
    let mut last = f64::NAN;
    for step in 0..200 {
        let mut w = op.apply(&q);
        let a = dot(&q, &w);
        basis.push(q.clone());
        alpha.push(a);
        for b in &basis {
            let c = dot(b, &w);
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= c * bi;
            }
        }
        let bnorm = dot(&w, &w).sqrt();
        let m = alpha.len();
        let tri = nalgebra::DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let top = tri.symmetric_eigenvalues().iter().copied().fold(f64::MIN, f64::max);
        if step > 2 && ((top - last).abs() <= 1e-9 * top || bnorm < 1e-14 * top) {
            return Ok(top);
        }
        last = top;
        beta.push(bnorm);
        q = w.iter().map(|x| x / bnorm).collect();
    }
    Err(Error::Iteration("Green operator norm iteration did not converge in 200 steps".into()))
}

/// Empirical norm of the Green operator `L^2 -> L^2_2` against `1 + C/lambda^2`.
///
/// The norm is `1 + ||G||_{L^2}`. Modes decouple and the kernel is positive
/// and decreasing in `lambda`, so the lowest mode carries the norm.
pub fn green_norm_bound(op: &FlatModelOperator, resolution: usize, starts: usize, seed: u64) -> Result<GreenNorm> {
    op.require_invertible()?;
    let lambda = op.lambda_min();
    let h = 2.0 * op.extent / resolution as f64;
    let t = galerkin_table(lambda, h, resolution);
    let mut conv = BoxConvolution::new(&t, resolution);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..starts {
        // random source supported in the central half of the box
        let mut x = vec![0.0; resolution * resolution];
        for i in resolution / 4..3 * resolution / 4 {
            for j in resolution / 4..3 * resolution / 4 {
                x[i * resolution + j] = rng.gen_range(-1.0..1.0);
            }
        }
        best = best.max(top_eigenvalue(&mut conv, x)?);
    }
    let constant = k0_l1() / (2.0 * PI);
    Ok(GreenNorm { empirical: 1.0 + best, bound: 1.0 + constant / (lambda * lambda), constant, l2_norm: best, starts })
}

#[derive(Debug, Clone, Serialize)]
pub struct WeitzenbockReport {
    /// Largest `|D*D - (lambda_n^2 + |p|^2) I|` entry.
    pub max_deviation: f64,
    pub max_off_diagonal: f64,
    /// Largest `lambda_n^2 + |p|^2` compared.
    pub max_scalar: f64,
}

/// Symbol of `D = 2 [[dbar_z, -d_w], [dbar_w, d_z]]` on mode `n` at plane
/// frequency `p`, acting on `Lambda^0 + Lambda^{0,2}`.
pub fn dirac_symbol(xi: [f64; 2], n: [i32; 2], p: [f64; 2]) -> [[C64; 2]; 2] {
    let k = [2.0 * PI * n[0] as f64 + xi[0], 2.0 * PI * n[1] as f64 + xi[1]];
    let i = C64::new(0.0, 1.0);
    let a = 0.5 * i * C64::new(k[0], k[1]);
    let b = 0.5 * i * C64::new(p[0], p[1]);
    // d_z has symbol -conj(a)
    [[2.0 * a, 2.0 * b.conj()], [2.0 * b, -2.0 * a.conj()]]
}

/// Compare `D*D` with the scalar Laplacian mode by mode.
pub fn weitzenbock_check(op: &FlatModelOperator, plane_freqs: &[[f64; 2]]) -> WeitzenbockReport {
    let mut dev = 0.0f64;
    let mut off = 0.0f64;
    let mut top = 0.0f64;
    for (lambda, n) in &op.spectrum {
        for p in plane_freqs {
            let m = dirac_symbol(op.xi, *n, *p);
            let mut dd = [[C64::new(0.0, 0.0); 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    dd[r][c] = m[0][r].conj() * m[0][c] + m[1][r].conj() * m[1][c];
                }
            }
            let scalar = lambda * lambda + p[0] * p[0] + p[1] * p[1];
            top = top.max(scalar);
            dev = dev.max((dd[0][0] - scalar).norm()).max((dd[1][1] - scalar).norm());
            off = off.max(dd[0][1].norm()).max(dd[1][0].norm());
        }
    }
    WeitzenbockReport { max_deviation: dev.max(off), max_off_diagonal: off, max_scalar: top }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlatReport {
    pub xi: [f64; 2],
    pub lambda_min: f64,
    pub k0_l1: f64,
    pub decay_rate: f64,
    pub green_norm: f64,
    pub green_bound: f64,
    pub weitzenbock_dev: f64,
    /// `weitzenbock_dev` relative to the largest symbol compared.
    pub weitzenbock_rel: f64,
    pub warnings: Vec<String>,
}

/// Full flat-model report for one twist, lowest mode excited by a bump.
pub fn flat_report(op: &FlatModelOperator, seed: u64) -> Result<FlatReport> {
    op.require_invertible()?;
    let n0 = op.spectrum[0].1;
    let rho = PlaneField::bump(op, [0.0, 0.0], 4.0 * op.h().max(0.125), &[(n0, C64::new(1.0, 0.0))]);
    let f = solve_flat(op, &rho)?;
    let rate = decay_fit(&f)?;
    let g = green_norm_bound(op, 128, 20, seed)?;
    let freqs: Vec<[f64; 2]> = (-3..=3).flat_map(|a| (-3..=3).map(move |b| [a as f64 * 1.7, b as f64 * 0.9])).collect();
    let w = weitzenbock_check(op, &freqs);
    Ok(FlatReport {
        xi: op.xi,
        lambda_min: op.lambda_min(),
        k0_l1: k0_l1(),
        decay_rate: rate,
        green_norm: g.empirical,
        green_bound: g.bound,
        weitzenbock_dev: w.max_deviation,
        weitzenbock_rel: w.max_deviation / w.max_scalar.max(1.0),
        warnings: f.warnings,
    })
}
