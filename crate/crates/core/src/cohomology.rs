//! Even-degree cohomology calculator for `T x P^1 x T^` and friends.
//!
//! Generators `t, t^, p, s` square to zero; the Poincare class `pi`
//! satisfies `pi^2 = 2 t t^` and `pi t = pi t^ = 0` (`pi` carries one odd
//! class from each torus factor). Coefficients are exact rationals.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Gen {
    T,
    THat,
    P,
    S,
}

impl Gen {
    pub const ALL: [Gen; 4] = [Gen::T, Gen::THat, Gen::P, Gen::S];

    fn bit(self) -> u8 {
        1 << (self as u8)
    }

    pub fn name(self) -> &'static str {
        match self {
            Gen::T => "t",
            Gen::THat => "t̂",
            Gen::P => "p",
            Gen::S => "s",
        }
    }
}

/// Square-free product of the generators times `pi^e`, `e` in `{0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub mask: u8,
    pub pi: u8,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { mask: 0, pi: 0 };

    pub fn gen(g: Gen) -> Self {
        Monomial { mask: g.bit(), pi: 0 }
    }

    pub const PI: Monomial = Monomial { mask: 0, pi: 1 };

    pub fn degree(&self) -> u32 {
        2 * (self.mask.count_ones() + self.pi as u32)
    }

    pub fn contains(&self, g: Gen) -> bool {
        self.mask & g.bit() != 0
    }

    /// Product with the relations applied: `None` when it vanishes.
    fn mul(self, o: Monomial) -> Option<(i64, Monomial)> {
        if self.mask & o.mask != 0 {
            return None;
        }
        let mut mask = self.mask | o.mask;
        let mut coeff = 1;
        let mut pi = self.pi + o.pi;
        if pi == 2 {
            let tt = Gen::T.bit() | Gen::THat.bit();
            if mask & tt != 0 {
                return None;
            }
            mask |= tt;
            coeff = 2;
            pi = 0;
        }
        if pi == 1 && mask & (Gen::T.bit() | Gen::THat.bit()) != 0 {
            return None;
        }
        Some((coeff, Monomial { mask, pi }))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<&str> = Gen::ALL.iter().filter(|g| self.contains(**g)).map(|g| g.name()).collect();
        if self.pi == 1 {
            parts.push("π");
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("·"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RingElement {
    pub terms: BTreeMap<Monomial, Rational64>,
}

impl RingElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn scalar(c: Rational64) -> Self {
        let mut r = Self::zero();
        r.push(Monomial::ONE, c);
        r
    }

    pub fn int(c: i64) -> Self {
        Self::scalar(Rational64::from_integer(c))
    }

    pub fn gen(g: Gen) -> Self {
        let mut r = Self::zero();
        r.push(Monomial::gen(g), Rational64::one());
        r
    }

    pub fn pi() -> Self {
        let mut r = Self::zero();
        r.push(Monomial::PI, Rational64::one());
        r
    }

    fn push(&mut self, m: Monomial, c: Rational64) {
        let e = self.terms.entry(m).or_insert_with(Rational64::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.push(*m, *c);
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-Rational64::one()))
    }

    pub fn scale(&self, c: Rational64) -> Self {
        let mut r = Self::zero();
        for (m, x) in &self.terms {
            r.push(*m, x * c);
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero();
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                if let Some((c, m)) = a.mul(*b) {
                    r.push(m, x * y * Rational64::from_integer(c));
                }
            }
        }
        r
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut r = Self::int(1);
        for _ in 0..n {
            r = r.mul(self);
        }
        r
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: Monomial) -> Rational64 {
        self.terms.get(&m).copied().unwrap_or_else(Rational64::zero)
    }

    /// Degree-0 part.
    pub fn rank(&self) -> Rational64 {
        self.coeff(Monomial::ONE)
    }

    /// Integrate over the fibre spanned by the given generators: keep the
    /// terms containing all of them and strip them off.
    pub fn integrate(&self, fibre: &[Gen]) -> Self {
        let bits: u8 = fibre.iter().map(|g| g.bit()).fold(0, |a, b| a | b);
        let mut r = Self::zero();
        for (m, c) in &self.terms {
            if m.mask & bits == bits && m.pi == 0 {
                r.push(Monomial { mask: m.mask & !bits, pi: 0 }, *c);
            }
        }
        r
    }

    pub fn monomials_json(&self) -> Vec<serde_json::Value> {
        self.terms
            .iter()
            .map(|(m, c)| serde_json::json!({ "monomial": m.to_string(), "coeff": c.to_string() }))
            .collect()
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // lower degree first, so that ranks lead
        let mut terms: Vec<(&Monomial, &Rational64)> = self.terms.iter().collect();
        terms.sort_by_key(|(m, _)| (m.degree(), **m));
        for (i, (m, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if *m == Monomial::ONE {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{a}·{m}")?;
            }
        }
        Ok(())
    }
}

/// Parse and evaluate an expression: integers, `a/b`, generators
/// `t`, `that` (or `t^` / `t̂`), `p`, `s`, `pi` (or `π`), `+ - * ^ ( )`
/// and juxtaposition.
pub fn ring_eval(src: &str) -> Result<RingElement> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("unexpected {:?}", p.toks[p.pos])));
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(i64),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let cs: Vec<char> = src.chars().collect();
    let mut out = vec![];
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let mut v: i64 = 0;
            while i < cs.len() && cs[i].is_ascii_digit() {
                v = v
                    .checked_mul(10)
                    .and_then(|v| v.checked_add(cs[i] as i64 - '0' as i64))
                    .ok_or_else(|| Error::Parse("integer overflow".into()))?;
                i += 1;
            }
            out.push(Tok::Num(v));
        } else if c.is_alphabetic() {
            let mut s = String::new();
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_' || cs[i] == '\u{302}') {
                s.push(cs[i]);
                i += 1;
            }
            // `t^` written as hat, not power, when no exponent follows
            if s == "t" && i < cs.len() && cs[i] == '^' && !cs.get(i + 1).is_some_and(|d| d.is_ascii_digit() || *d == '(') {
                s = "that".into();
                i += 1;
            }
            out.push(Tok::Ident(s));
        } else if "+-*/^()·".contains(c) {
            out.push(Tok::Op(if c == '·' { '*' } else { c }));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn expr(&mut self) -> Result<RingElement> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let t = self.term()?;
            acc = if c == '+' { acc.add(&t) } else { acc.sub(&t) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RingElement> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Op('*')) => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some(Tok::Op('/')) => {
                    self.pos += 1;
                    match self.peek() {
                        Some(Tok::Num(d)) if *d != 0 => {
                            let d = *d;
                            self.pos += 1;
                            acc = acc.scale(Rational64::new(1, d));
                        }
                        _ => return Err(Error::Parse("division only by a nonzero integer".into())),
                    }
                }
                Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::Op('(')) => {
                    acc = acc.mul(&self.unary()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<RingElement> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(self.unary()?.scale(-Rational64::one()));
        }
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            match self.peek() {
                Some(Tok::Num(n)) if *n <= 64 => {
                    let n = *n as u32;
                    self.pos += 1;
                    return Ok(base.pow(n));
                }
                _ => return Err(Error::Parse("exponent must be a small integer".into())),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RingElement> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(RingElement::int(n))
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                match s.as_str() {
                    "t" => Ok(RingElement::gen(Gen::T)),
                    "that" | "t\u{302}" => Ok(RingElement::gen(Gen::THat)),
                    "p" => Ok(RingElement::gen(Gen::P)),
                    "s" => Ok(RingElement::gen(Gen::S)),
                    "pi" | "π" => Ok(RingElement::pi()),
                    _ => Err(Error::UnknownGenerator(s)),
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::Op(')')) {
                    return Err(Error::Parse("missing ')'".into()));
                }
                self.pos += 1;
                Ok(e)
            }
            other => Err(Error::Parse(format!("unexpected {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scenario {
    ChV,
    ChECheck,
    DegI,
    IndexC1,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::ChV, Scenario::ChECheck, Scenario::DegI, Scenario::IndexC1];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::ChV => "ch_V",
            Scenario::ChECheck => "ch_E_check",
            Scenario::DegI => "deg_I",
            Scenario::IndexC1 => "index_c1",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown scenario {s:?}; expected ch_V, ch_E_check, deg_I or index_c1")))
    }
}

fn k_elem(k: i64) -> RingElement {
    RingElement::int(k)
}

/// `ch(E) = 2 - c_2(E)` with `c_2(E) = k t p` on `T x P^1`.
pub fn ch_e(k: i64) -> RingElement {
    RingElement::int(2).sub(&k_elem(k).mul(&ring_eval("t p").unwrap()))
}

/// `ch(P) = 1 + pi + pi^2/2`.
pub fn ch_poincare() -> RingElement {
    let pi = RingElement::pi();
    RingElement::int(1).add(&pi).add(&pi.mul(&pi).scale(Rational64::new(1, 2)))
}

/// `ch(V) = -ch(E) ch(P) td(T x P^1) / [T x P^1]`, `td = 1 + p`.
pub fn ch_v(k: i64) -> RingElement {
    ch_e(k)
        .mul(&ch_poincare())
        .mul(&ring_eval("1 + p").unwrap())
        .integrate(&[Gen::T, Gen::P])
        .scale(-Rational64::one())
}

/// `(c1(Pz) - c1(V) + c1(Pz) p - (k/2) pi^2 p) / [T^]`, with `c1(V)` read off
/// `ch_V` and `c1(Pz) = 0` (a flat line bundle on `T^`).
pub fn ch_e_check(k: i64) -> RingElement {
    let v = ch_v(k);
    let c1_v = RingElement::gen(Gen::THat).scale(v.coeff(Monomial::gen(Gen::THat)));
    let c1_pz = RingElement::zero();
    let p = RingElement::gen(Gen::P);
    let pi = RingElement::pi();
    c1_pz
        .sub(&c1_v)
        .add(&c1_pz.mul(&p))
        .sub(&pi.mul(&pi).mul(&p).scale(Rational64::new(k, 2)))
        .integrate(&[Gen::THat])
}

/// `(2 - k t (2s)) (1 + pi + (2t)(ks)/2) / [T x S]`.
pub fn deg_i(k: i64) -> RingElement {
    let ts = ring_eval("t s").unwrap();
    let a = RingElement::int(2).sub(&ts.scale(Rational64::from_integer(2 * k)));
    let b = RingElement::int(1).add(&RingElement::pi()).add(&ts.scale(Rational64::from_integer(k)));
    a.mul(&b).integrate(&[Gen::T, Gen::S])
}

/// `int_{P^1} ch(E) td(K_T^{-1}) / [T]`; `td(K_T^{-1}) = 1` on a flat torus.
pub fn index_c1(k: i64) -> RingElement {
    ch_e(k).mul(&RingElement::int(1)).integrate(&[Gen::T]).integrate(&[Gen::P])
}

pub fn scenario(s: Scenario, k: i64) -> RingElement {
    match s {
        Scenario::ChV => ch_v(k),
        Scenario::ChECheck => ch_e_check(k),
        Scenario::DegI => deg_i(k),
        Scenario::IndexC1 => index_c1(k),
    }
}

/// `t^`-coefficient of `ch_V`: the degree of the transformed bundle.
pub fn degree_of_v(k: i64) -> Rational64 {
    ch_v(k).coeff(Monomial::gen(Gen::THat))
}

pub fn rank_of_v(k: i64) -> Rational64 {
    ch_v(k).rank()
}

pub fn scenario_json(s: Scenario, k: i64) -> serde_json::Value {
    let r = scenario(s, k);
    serde_json::json!({
        "scenario": s.name(),
        "k": k,
        "result": r.to_string(),
        "result_monomials": r.monomials_json(),
    })
}
