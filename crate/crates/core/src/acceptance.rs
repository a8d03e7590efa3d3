//! Acceptance suite: twelve numbered criteria with pinned tolerances and
//! time budgets. Reports carry no timings so that repeated runs compare
//! byte for byte.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use num_rational::Rational64;
use serde::Serialize;
use serde_json::json;

use crate::cohomology::{self, ring_eval, RingElement};
use crate::error::Result;
use crate::flat::{self, FlatModelOperator, PlaneField};
use crate::higgs::HiggsField;
use crate::hitchin;
use crate::lattice::Lattice;
use crate::linalg::CMat;
use crate::ratmap::{self, RationalMap};
use crate::spectral::SpectralCurve;

pub const K0_L1_TOL: f64 = 1e-6;
pub const DECAY_REL_TOL: f64 = 0.05;
pub const GREEN_GROWTH_MIN: f64 = 10.0;
pub const WEITZENBOCK_TOL: f64 = 1e-12;
pub const SPECTRAL_SEEDS: u64 = 20;
pub const HAUSDORFF_TOL: f64 = 1e-8;
pub const R_INF_TOL: f64 = 1e-7;
pub const HITCHIN_TOL: f64 = 1e-9;
pub const LINEARITY_TOL: f64 = 0.2;

#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: serde_json::Value,
    #[serde(skip)]
    pub elapsed: Duration,
    #[serde(skip)]
    pub budget: Duration,
}

impl Criterion {
    pub fn within_budget(&self) -> bool {
        self.elapsed <= self.budget
    }

    pub fn ok(&self) -> bool {
        self.passed && self.within_budget()
    }

    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<28} {}  ({:.2}s, budget {}s)",
            self.id,
            self.name,
            if self.ok() { "PASS" } else { "FAIL" },
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

fn timed(id: u32, name: &'static str, budget_s: u64, f: impl FnOnce() -> Result<(bool, serde_json::Value)>) -> Criterion {
    let t = Instant::now();
    let (passed, detail) = match f() {
        Ok(x) => x,
        Err(e) => (false, json!({ "error": e.to_string() })),
    };
    Criterion { id, name, passed, detail, elapsed: t.elapsed(), budget: Duration::from_secs(budget_s) }
}

pub fn lattice() -> Lattice {
    Lattice::new(C64::new(0.0, 2.0)).expect("fixed lattice")
}

pub fn xi0() -> C64 {
    C64::new(0.3, 0.4)
}

pub fn c1_bessel_mass() -> Criterion {
    timed(1, "bessel mass", 1, || {
        let v = flat::k0_l1();
        Ok(((v - 2.0 * PI).abs() < K0_L1_TOL, json!({ "k0_l1": v, "target": 2.0 * PI })))
    })
}

pub fn c2_k0_asymptotics() -> Criterion {
    timed(2, "K0 asymptotics", 1, || {
        let mut ok = true;
        let mut rows = vec![];
        for r in [10.0f64, 20.0] {
            let lhs = flat::k0(r)? * r.sqrt() * r.exp() / (PI / 2.0).sqrt();
            let rhs = 1.0 - 1.0 / (8.0 * r) + 9.0 / (128.0 * r * r);
            let bound = 2.0 * 75.0 / (1024.0 * r.powi(3));
            ok &= (lhs - rhs).abs() < bound;
            rows.push(json!({ "r": r, "deviation": (lhs - rhs).abs(), "bound": bound }));
        }
        Ok((ok, json!(rows)))
    })
}

pub fn c3_flat_decay() -> Criterion {
    timed(3, "flat-model decay", 30, || {
        let op = FlatModelOperator::new([PI, PI], 8)?;
        let n0 = op.spectrum[0].1;
        let rho = PlaneField::bump(&op, [0.0, 0.0], 4.0 * op.h(), &[(n0, C64::new(1.0, 0.0))]);
        let rate = flat::decay_fit(&flat::solve_flat(&op, &rho)?)?;
        let target = 2f64.sqrt() * PI;
        let ok = (rate / target - 1.0).abs() < DECAY_REL_TOL && op.resolution == 256;
        Ok((ok, json!({ "rate": rate, "lambda_min": op.lambda_min(), "grid": op.resolution })))
    })
}

pub fn c4_green_bound() -> Criterion {
    timed(4, "Green operator bound", 120, || {
        let mut ok = true;
        let mut rows = vec![];
        for xi in [[PI, PI], [PI / 2.0, 0.0], [1.0, 0.5]] {
            let op = FlatModelOperator::new(xi, 8)?;
            let g = flat::green_norm_bound(&op, 128, 20, 17)?;
            ok &= g.empirical <= g.bound;
            rows.push(json!({ "xi": xi, "empirical": g.empirical, "bound": g.bound }));
        }
        // lambda_min shrinks 4x along a ray towards the trivial twist
        let ray = [0.4, 0.2, 0.1].map(|l: f64| [l * 0.8, l * 0.6]);
        let mut norms = vec![];
        for xi in ray {
            let op = FlatModelOperator::new(xi, 2)?;
            let g = flat::green_norm_bound(&op, 64, 3, 17)?;
            ok &= g.empirical <= g.bound;
            norms.push(json!({ "xi": xi, "lambda_min": op.lambda_min(), "empirical": g.empirical, "bound": g.bound }));
        }
        let e0 = norms[0]["empirical"].as_f64().unwrap_or(f64::NAN);
        let e2 = norms[2]["empirical"].as_f64().unwrap_or(f64::NAN);
        let growth = e2 / e0;
        ok &= growth >= GREEN_GROWTH_MIN;
        Ok((ok, json!({ "twists": rows, "ray": norms, "growth": growth })))
    })
}

pub fn c5_weitzenbock() -> Criterion {
    timed(5, "Weitzenbock identity", 1, || {
        let op = FlatModelOperator::with_grid([PI, 0.7], 8, 10.0, 16)?;
        let freqs: Vec<[f64; 2]> = (-4..=4).flat_map(|a| (-4..=4).map(move |b| [a as f64 * 0.75, b as f64 * 1.25])).collect();
        let w = flat::weitzenbock_check(&op, &freqs);
        Ok((
            w.max_off_diagonal == 0.0 && w.max_deviation < WEITZENBOCK_TOL,
            json!({ "max_deviation": w.max_deviation, "max_off_diagonal": w.max_off_diagonal }),
        ))
    })
}

/// Curves for criteria 6 and 7: `k` in 1..=3, twenty seeds each.
pub fn spectral_sample() -> Vec<(usize, u64, Result<SpectralCurve>)> {
    let mut out = vec![];
    for k in 1..=3 {
        for seed in 1..=SPECTRAL_SEEDS {
            let curve = HiggsField::random(k, lattice(), xi0(), C64::new(1.0, 0.0), seed).and_then(|f| SpectralCurve::build(&f));
            out.push((k, seed, curve));
        }
    }
    out
}

pub fn c6_spectral_invariants(sample: &[(usize, u64, Result<SpectralCurve>)]) -> Criterion {
    timed(6, "spectral-curve invariants", 300, || {
        let mut failures = vec![];
        for (k, seed, curve) in sample {
            let k = *k as i64;
            let check = || -> Result<Vec<&'static str>> {
                let c = curve.as_ref().map_err(|e| e.clone())?;
                let mut bad = vec![];
                if c.genus()? != 2 * k - 1 {
                    bad.push("genus");
                }
                if c.pi2_count() as i64 != 4 * k {
                    bad.push("pi2 count");
                }
                if c.pi1_count() as i64 != 4 * k - 4 {
                    bad.push("pi1 count");
                }
                if c.homology != (k as usize, 2) {
                    bad.push("homology");
                }
                if !c.involution_check()? {
                    bad.push("involution");
                }
                if !c.infinity_membership()? {
                    bad.push("infinity membership");
                }
                Ok(bad)
            };
            match check() {
                Ok(bad) if bad.is_empty() => {}
                Ok(bad) => failures.push(json!({ "k": k, "seed": seed, "failed": bad })),
                Err(e) => failures.push(json!({ "k": k, "seed": seed, "error": e.to_string() })),
            }
        }
        Ok((failures.is_empty(), json!({ "curves": sample.len(), "failures": failures })))
    })
}

pub fn c7_riemann_hurwitz(sample: &[(usize, u64, Result<SpectralCurve>)]) -> Criterion {
    timed(7, "Riemann-Hurwitz B2 = B1 + 4", 1, || {
        let mut failures = vec![];
        for (k, seed, curve) in sample {
            match curve {
                Ok(c) if c.pi2_count() == c.pi1_count() + 4 => {}
                Ok(c) => failures.push(json!({ "k": k, "seed": seed, "b1": c.pi1_count(), "b2": c.pi2_count() })),
                Err(e) => failures.push(json!({ "k": k, "seed": seed, "error": e.to_string() })),
            }
        }
        Ok((failures.is_empty(), json!({ "curves": sample.len(), "failures": failures })))
    })
}

pub fn c8_rational_map() -> Criterion {
    timed(8, "rational-map roundtrip", 120, || {
        let mut ok = true;
        let mut rows = vec![];
        let ws: Vec<C64> = (0..200)
            .map(|j| C64::from_polar(0.5 + 3.0 * ((j as f64 * 0.754_877_666).fract()), 2.0 * PI * (j as f64 * 0.569_840_29).fract()))
            .collect();
        for (k, seed) in [(1usize, 1u64), (2, 7), (2, 13), (3, 3), (3, 5)] {
            let row = (|| -> Result<serde_json::Value> {
                let f = HiggsField::random(k, lattice(), xi0(), C64::new(1.0, 0.0), seed)?;
                let curve = SpectralCurve::build(&f)?;
                let m = RationalMap::extract(&curve)?;
                let dist = ratmap::roundtrip_distance(&curve, &m, &ws)?;
                let p0 = lattice().wp(xi0())?;
                let r_inf = m.eval_infinity().finite();
                let r_inf_err = r_inf.map(|z| (z - p0).norm() / (1.0 + p0.norm())).unwrap_or(f64::INFINITY);
                let (rank, _) = ratmap::param_jacobian_rank(&m)?;
                let pass = dist < HAUSDORFF_TOL
                    && m.degree() == k
                    && r_inf_err < R_INF_TOL
                    && rank == ratmap::param_count(k)
                    && m.free_parameters().len() == ratmap::param_count(k);
                Ok(json!({
                    "k": k, "seed": seed, "hausdorff": dist, "degree": m.degree(),
                    "r_inf_error": r_inf_err, "jacobian_rank": rank, "param_count": ratmap::param_count(k), "pass": pass,
                }))
            })();
            match row {
                Ok(r) => {
                    ok &= r["pass"].as_bool().unwrap_or(false);
                    rows.push(r);
                }
                Err(e) => {
                    ok = false;
                    rows.push(json!({ "k": k, "seed": seed, "error": e.to_string() }));
                }
            }
        }
        Ok((ok, json!(rows)))
    })
}

pub fn c9_cohomology() -> Criterion {
    timed(9, "cohomology scenarios", 1, || {
        let mut failures = vec![];
        for k in 1..=10i64 {
            let checks = [
                ("ch_V", cohomology::ch_v(k) == ring_eval(&format!("{k} - 2 that"))?),
                ("deg_V", cohomology::degree_of_v(k) == Rational64::from_integer(-2)),
                ("rank_V", cohomology::rank_of_v(k) == Rational64::from_integer(k)),
                ("ch_E_check", cohomology::ch_e_check(k) == ring_eval(&format!("2 - {k} t p"))?),
                ("deg_I", cohomology::deg_i(k).is_zero()),
                ("index_c1", cohomology::index_c1(k) == RingElement::int(-k)),
            ];
            for (name, good) in checks {
                if !good {
                    failures.push(json!({ "k": k, "scenario": name }));
                }
            }
        }
        Ok((failures.is_empty(), json!({ "failures": failures, "ch_V_3": cohomology::ch_v(3).to_string() })))
    })
}

pub fn c10_hitchin() -> Criterion {
    timed(10, "Hitchin residuals", 60, || {
        let lat = Lattice::new(C64::new(0.0, 1.0))?;
        let (ab, _) = hitchin::abelian_solution(lat, xi0(), C64::new(0.5, 0.1), C64::new(0.7, 0.2), C64::new(0.2, -0.4), 256, 0.08)?;
        let ra = hitchin::residual(&ab)?;
        let z = C64::new(0.0, 0.0);
        let diag = |a: C64, b: C64| CMat { n: 2, data: vec![a, z, z, b] };
        let bq = hitchin::biquard_model(&diag(C64::new(0.3, 0.2), C64::new(-0.1, 0.5)), &diag(C64::new(1.0, -0.5), C64::new(-0.7, 0.2)), 0.08, 0.5, 256)?;
        let rb = hitchin::residual(&bq)?;
        let pert: Vec<f64> = [1e-4, 1e-3, 1e-2]
            .iter()
            .map(|d| hitchin::residual(&ab.perturb(*d, 23)).map(|r| r.r1))
            .collect::<Result<_>>()?;
        let ratios = [pert[1] / pert[0], pert[2] / pert[1]];
        let linear = ratios.iter().all(|r| (r / 10.0 - 1.0).abs() < LINEARITY_TOL);
        let conformal = hitchin::conformal_flag_check(&ab)? && hitchin::conformal_flag_check(&bq)? && hitchin::conformal_flag_check(&ab.perturb(1e-3, 23))?;
        let ok = ra.passes(HITCHIN_TOL) && rb.passes(HITCHIN_TOL) && linear && conformal;
        Ok((
            ok,
            json!({
                "abelian": ra, "biquard": rb, "perturbation_r1": pert, "ratios": ratios, "conformal": conformal,
            }),
        ))
    })
}

pub fn c11_eigenline_degree() -> Criterion {
    timed(11, "eigenline degree", 120, || {
        let mut rows = vec![];
        let mut ok = true;
        for k in 1..=2 {
            for seed in [7u64, 13, 21, 34, 55] {
                let d = HiggsField::random(k, lattice(), xi0(), C64::new(1.0, 0.0), seed).and_then(|f| crate::spectral::eigenline_degree(&f));
                match d {
                    Ok(d) => {
                        ok &= d == 0;
                        rows.push(json!({ "k": k, "seed": seed, "degree": d }));
                    }
                    Err(e) => {
                        ok = false;
                        rows.push(json!({ "k": k, "seed": seed, "error": e.to_string() }));
                    }
                }
            }
        }
        Ok((ok, json!(rows)))
    })
}

/// Criteria 1 to 11 in order.
pub fn run_suite() -> Vec<Criterion> {
    let sample = spectral_sample_timed();
    vec![
        c1_bessel_mass(),
        c2_k0_asymptotics(),
        c3_flat_decay(),
        c4_green_bound(),
        c5_weitzenbock(),
        sample.1,
        c7_riemann_hurwitz(&sample.0),
        c8_rational_map(),
        c9_cohomology(),
        c10_hitchin(),
        c11_eigenline_degree(),
    ]
}

/// Build the sample inside criterion 6 so its time counts against that budget.
fn spectral_sample_timed() -> (Vec<(usize, u64, Result<SpectralCurve>)>, Criterion) {
    let t = Instant::now();
    let sample = spectral_sample();
    let build = t.elapsed();
    let mut c = c6_spectral_invariants(&sample);
    c.elapsed += build;
    (sample, c)
}

/// Report body compared in criterion 12.
pub fn report_json(criteria: &[Criterion]) -> serde_json::Value {
    json!({
        "schema": "hsk/1",
        "version": env!("CARGO_PKG_VERSION"),
        "criteria": criteria,
        "all_passed": criteria.iter().all(|c| c.passed),
    })
}

/// Criterion 12 from two independent runs' serialized reports.
pub fn c12_determinism(first: &str, second: &str) -> Criterion {
    timed(12, "determinism", 1, || {
        Ok((first == second, json!({ "bytes": first.len(), "identical": first == second })))
    })
}
