//! Run configuration: JSON config file merged with command-line flags.

use hsk_core::hitchin::MetricFlag;
use hsk_core::C64;
use serde_json::{json, Map, Value};

use crate::Common;

const KEYS: [&str; 11] = ["k", "tau", "xi0", "epsilon", "seed", "out", "grid", "cutoff", "tol", "metric", "xi"];

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub k: i64,
    pub tau: C64,
    pub xi0: C64,
    pub epsilon: C64,
    pub seed: u64,
    pub out: Option<String>,
    pub grid: Option<usize>,
    pub cutoff: Option<i32>,
    pub tol: Option<f64>,
    pub metric: MetricFlag,
    pub xi: [f64; 2],
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            k: 2,
            tau: C64::new(0.0, 1.0),
            xi0: C64::new(0.3, 0.4),
            epsilon: C64::new(1.0, 0.0),
            seed: 0,
            out: None,
            grid: None,
            cutoff: None,
            tol: None,
            metric: MetricFlag::Euclidean,
            xi: [0.25, 0.25],
        }
    }
}

/// Parses `a+bi`, `a-bi`, `bi`, `i`, `-i` or a plain real.
pub fn parse_complex(src: &str) -> Result<C64, String> {
    let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("invalid complex number {src:?}");
    let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return Ok(C64::new(num(&s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&j| (bytes[j] == b'+' || bytes[j] == b'-') && !matches!(bytes[j - 1], b'e' | b'E'));
    let imag = |t: &str| match t {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => num(t),
    };
    match split {
        Some(j) => Ok(C64::new(num(&body[..j])?, imag(&body[j..])?)),
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

fn complex_value(key: &str, v: &Value) -> Result<C64, String> {
    match v {
        Value::String(s) => parse_complex(s),
        Value::Number(n) => Ok(C64::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(a) if a.len() == 2 => match (a[0].as_f64(), a[1].as_f64()) {
            (Some(re), Some(im)) => Ok(C64::new(re, im)),
            _ => Err(format!("{key}: expected [re, im] numbers")),
        },
        _ => Err(format!("{key}: expected \"a+bi\" or [re, im]")),
    }
}

fn parse_pair(src: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = src.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => match (a.parse(), b.parse()) {
            (Ok(a), Ok(b)) => Ok([a, b]),
            _ => Err(format!("invalid pair {src:?}")),
        },
        _ => Err(format!("expected \"a,b\", got {src:?}")),
    }
}

impl RunConfig {
    fn apply_file(&mut self, obj: &Map<String, Value>) -> Result<(), String> {
        for (key, v) in obj {
            let uint = || v.as_u64().ok_or_else(|| format!("{key}: expected a non-negative integer"));
            match key.as_str() {
                "k" => self.k = v.as_i64().ok_or("k: expected an integer")?,
                "tau" => self.tau = complex_value(key, v)?,
                "xi0" => self.xi0 = complex_value(key, v)?,
                "epsilon" => self.epsilon = complex_value(key, v)?,
                "seed" => self.seed = uint()?,
                "out" => self.out = Some(v.as_str().ok_or("out: expected a string")?.to_string()),
                "grid" => self.grid = Some(uint()? as usize),
                "cutoff" => self.cutoff = Some(v.as_i64().ok_or("cutoff: expected an integer")? as i32),
                "tol" => self.tol = Some(v.as_f64().ok_or("tol: expected a number")?),
                "metric" => self.metric = v.as_str().ok_or("metric: expected a string")?.parse().map_err(|e: hsk_core::Error| e.to_string())?,
                "xi" => {
                    self.xi = match v {
                        Value::String(s) => parse_pair(s)?,
                        Value::Array(a) if a.len() == 2 && a.iter().all(Value::is_number) => [a[0].as_f64().unwrap(), a[1].as_f64().unwrap()],
                        _ => return Err("xi: expected \"a,b\" or [a, b]".into()),
                    }
                }
                _ => return Err(format!("unknown config key {key:?}; allowed: {}", KEYS.join(", "))),
            }
        }
        Ok(())
    }

    /// Defaults, then the config file, then flags.
    pub fn resolve(c: &Common, xi: Option<&str>) -> Result<Self, String> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &c.config {
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {path}: {e}"))?;
            let v: Value = serde_json::from_str(&text).map_err(|e| format!("invalid config JSON: {e}"))?;
            let obj = v.as_object().ok_or("config must be a JSON object")?;
            cfg.apply_file(obj)?;
        }
        if let Some(k) = c.k {
            cfg.k = k;
        }
        if let Some(s) = &c.tau {
            cfg.tau = parse_complex(s)?;
        }
        if let Some(s) = &c.xi0 {
            cfg.xi0 = parse_complex(s)?;
        }
        if let Some(s) = &c.epsilon {
            cfg.epsilon = parse_complex(s)?;
        }
        if let Some(s) = c.seed {
            cfg.seed = s;
        }
        if c.out.is_some() {
            cfg.out = c.out.clone();
        }
        if c.grid.is_some() {
            cfg.grid = c.grid;
        }
        if c.cutoff.is_some() {
            cfg.cutoff = c.cutoff;
        }
        if c.tol.is_some() {
            cfg.tol = c.tol;
        }
        if let Some(m) = &c.metric {
            cfg.metric = m.parse().map_err(|e: hsk_core::Error| e.to_string())?;
        }
        if let Some(s) = xi {
            cfg.xi = parse_pair(s)?;
        }
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), String> {
        if self.k < 1 {
            return Err(format!("k must be at least 1, got {}", self.k));
        }
        if !(self.tau.im > 0.0) {
            return Err(format!("tau must lie in the upper half plane, got {}", self.tau));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(format!("tol must be positive, got {t}"));
            }
        }
        if let Some(g) = self.grid {
            if g < 8 {
                return Err(format!("grid must be at least 8, got {g}"));
            }
        }
        if self.xi.iter().any(|x| !x.is_finite()) {
            return Err("xi must be finite".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "tau": [self.tau.re, self.tau.im],
            "xi0": [self.xi0.re, self.xi0.im],
            "epsilon": [self.epsilon.re, self.epsilon.im],
            "seed": self.seed,
            "out": self.out,
            "grid": self.grid,
            "cutoff": self.cutoff,
            "tol": self.tol,
            "metric": self.metric,
            "xi": self.xi,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        let cases = [
            ("0.3+0.4i", C64::new(0.3, 0.4)),
            ("2i", C64::new(0.0, 2.0)),
            ("-i", C64::new(0.0, -1.0)),
            ("1.5", C64::new(1.5, 0.0)),
            ("1e-3-2.5e-1i", C64::new(1e-3, -0.25)),
            (" 0 + 1 i", C64::new(0.0, 1.0)),
            ("-0.5+i", C64::new(-0.5, 1.0)),
        ];
        for (s, z) in cases {
            assert_eq!(parse_complex(s).unwrap(), z, "{s}");
        }
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("1+2k").is_err());
    }

    #[test]
    fn complex_values_from_json() {
        assert_eq!(complex_value("tau", &json!([0.0, 2.0])).unwrap(), C64::new(0.0, 2.0));
        assert_eq!(complex_value("tau", &json!("2i")).unwrap(), C64::new(0.0, 2.0));
        assert!(complex_value("tau", &json!({"re": 1})).is_err());
    }

    #[test]
    fn unknown_key_rejected() {
        let mut c = RunConfig::default();
        let v = json!({"kk": 1});
        assert!(c.apply_file(v.as_object().unwrap()).is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join("hsk_cfg_test");
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("c.json");
        std::fs::write(&p, r#"{"k": 3, "tau": [0, 2], "seed": 5}"#).unwrap();
        let common = Common { config: Some(p.to_string_lossy().into()), k: Some(4), ..Default::default() };
        let cfg = RunConfig::resolve(&common, None).unwrap();
        assert_eq!(cfg.k, 4);
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.tau, C64::new(0.0, 2.0));
    }
}
