//! Truncated discrete valuation rings `R/π^n` with finite residue field `F_q`.
//!
//! Two concrete models are provided: `Z/p^n` and `F_q[t]/(t^n)` where `F_q` is
//! built as `F_p[α]/(f)` for the lexicographically least monic irreducible `f`
//! of degree `m`. In both models an element of level `n` is stored as a code in
//! `0..q^n` whose base-`q` digits are its expansion along the standard section
//! of the residue field, so reduction, multiplication by `π^k` and valuation
//! are the same integer operations for both models. Only addition and
//! multiplication differ.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "zp")]
    IntegerPadic,
    #[serde(rename = "fqt")]
    PolynomialOverPrimeField,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRingSpec")]
pub struct RingSpec {
    pub model: Model,
    pub p: u32,
    pub m: u32,
}

#[derive(Deserialize)]
struct RawRingSpec {
    model: Model,
    p: u32,
    #[serde(default = "one")]
    m: u32,
}

fn one() -> u32 {
    1
}

impl TryFrom<RawRingSpec> for RingSpec {
    type Error = Error;

    fn try_from(raw: RawRingSpec) -> Result<Self> {
        RingSpec::new(raw.model, raw.p, raw.m)
    }
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

impl RingSpec {
    pub fn new(model: Model, p: u32, m: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidRing(format!("{p} is not prime")));
        }
        if m == 0 {
            return Err(Error::InvalidRing("extension degree must be >= 1".into()));
        }
        if model == Model::IntegerPadic && m != 1 {
            return Err(Error::InvalidRing("the integer model requires m = 1".into()));
        }
        if (p as u64).checked_pow(m).is_none_or(|q| q > 256) {
            return Err(Error::InvalidRing(format!("residue field {p}^{m} too large")));
        }
        Ok(RingSpec { model, p, m })
    }

    pub fn zp(p: u32) -> Result<Self> {
        Self::new(Model::IntegerPadic, p, 1)
    }

    pub fn fqt(p: u32, m: u32) -> Result<Self> {
        Self::new(Model::PolynomialOverPrimeField, p, m)
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.m)
    }

    /// True iff the residue field has at least three elements.
    pub fn multiplicity_free_regime(&self) -> bool {
        self.q() >= 3
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.model {
            Model::IntegerPadic => write!(f, "zp:{}", self.p),
            Model::PolynomialOverPrimeField if self.m == 1 => write!(f, "fqt:{}", self.p),
            Model::PolynomialOverPrimeField => write!(f, "fqt:{}^{}", self.p, self.m),
        }
    }
}

impl FromStr for RingSpec {
    type Err = Error;

    /// Parses `zp:<p>` or `fqt:<p>` / `fqt:<p>^<m>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad ring `{s}`, expected zp:<p> or fqt:<p>^<m>"));
        let (kind, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let (p, m) = match rest.split_once('^') {
            Some((p, m)) => (p.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?),
            None => (rest.parse().map_err(|_| bad())?, 1),
        };
        match kind {
            "zp" => RingSpec::new(Model::IntegerPadic, p, m),
            "fqt" => RingSpec::new(Model::PolynomialOverPrimeField, p, m),
            _ => Err(bad()),
        }
    }
}

/// An element of the residue field, encoded as `Σ c_i p^i` over the
/// polynomial basis of `F_p[α]/(f)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ResidueElem(pub u32);

/// Element of `R/π^level`. The code is always reduced below `q^level`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingElem {
    code: u64,
    level: u32,
}

impl RingElem {
    pub fn code(&self) -> u64 {
        self.code
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn is_zero(&self) -> bool {
        self.code == 0
    }
}

/// Finite field tables for `F_q`.
#[derive(Debug, Clone)]
struct Field {
    q: u32,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

impl Field {
    fn new(p: u32, m: u32) -> Self {
        let q = p.pow(m);
        let modulus = least_irreducible(p, m);
        let digits = |x: u32| -> Vec<u32> {
            let mut x = x;
            (0..m)
                .map(|_| {
                    let d = x % p;
                    x /= p;
                    d
                })
                .collect()
        };
        let encode = |c: &[u32]| c.iter().rev().fold(0, |acc, &d| acc * p + d);
        let mut add = vec![0u8; (q * q) as usize];
        let mut mul = vec![0u8; (q * q) as usize];
        for a in 0..q {
            let da = digits(a);
            for b in 0..q {
                let db = digits(b);
                let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[(a * q + b) as usize] = encode(&sum) as u8;
                let mut prod = vec![0u32; (2 * m) as usize];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                // reduce by the monic modulus, highest degree first
                for deg in (m as usize..prod.len()).rev() {
                    let c = prod[deg];
                    if c == 0 {
                        continue;
                    }
                    for (k, &fk) in modulus.iter().enumerate().take(m as usize) {
                        let idx = deg - m as usize + k;
                        prod[idx] = (prod[idx] + (p - c) * fk) % p;
                    }
                    prod[deg] = 0;
                }
                mul[(a * q + b) as usize] = encode(&prod[..m as usize]) as u8;
            }
        }
        let neg = (0..q)
            .map(|a| (0..q).find(|&b| add[(a * q + b) as usize] == 0).unwrap() as u8)
            .collect();
        let inv = (0..q)
            .map(|a| {
                if a == 0 {
                    0
                } else {
                    (1..q).find(|&b| mul[(a * q + b) as usize] == 1).unwrap() as u8
                }
            })
            .collect();
        Field { q, add, mul, neg, inv }
    }

    #[inline]
    fn add(&self, a: u32, b: u32) -> u32 {
        self.add[(a * self.q + b) as usize] as u32
    }

    #[inline]
    fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[(a * self.q + b) as usize] as u32
    }
}

/// Coefficients (low to high, length m + 1, monic) of the lexicographically
/// least monic irreducible polynomial of degree `m` over `F_p`.
fn least_irreducible(p: u32, m: u32) -> Vec<u32> {
    if m == 1 {
        return vec![0, 1];
    }
    let count = p.pow(m);
    (0..count)
        .map(|low| {
            let mut c: Vec<u32> = Vec::with_capacity(m as usize + 1);
            let mut x = low;
            for _ in 0..m {
                c.push(x % p);
                x /= p;
            }
            c.push(1);
            c
        })
        .find(|f| is_irreducible(f, p))
        .expect("an irreducible polynomial of every degree exists")
}

fn poly_rem(num: &[u32], den: &[u32], p: u32) -> Vec<u32> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    let lead_inv = (1..p).find(|&x| x * den[dd] % p == 1).unwrap();
    while r.len() > dd {
        let c = r[r.len() - 1] * lead_inv % p;
        let shift = r.len() - 1 - dd;
        for (k, &dk) in den.iter().enumerate() {
            r[shift + k] = (r[shift + k] + (p - c) * dk % p) % p;
        }
        r.pop();
        while r.last() == Some(&0) && r.len() > dd {
            r.pop();
        }
    }
    r
}

fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    for d in 1..=deg / 2 {
        for low in 0..p.pow(d as u32) {
            let mut g = Vec::with_capacity(d + 1);
            let mut x = low;
            for _ in 0..d {
                g.push(x % p);
                x /= p;
            }
            g.push(1);
            if poly_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Arithmetic context for a truncated DVR. Read-only after construction.
#[derive(Debug, Clone)]
pub struct Ring {
    spec: RingSpec,
    q: u64,
    field: Field,
}

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for Ring {}

impl Ring {
    pub fn new(spec: RingSpec) -> Self {
        Ring { q: spec.q(), field: Field::new(spec.p, spec.m), spec }
    }

    pub fn spec(&self) -> RingSpec {
        self.spec
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn p(&self) -> u32 {
        self.spec.p
    }

    /// `q^k`, the cardinality of `R/π^k`.
    #[inline]
    pub fn size(&self, level: u32) -> u64 {
        self.q.pow(level)
    }

    // ---- raw code arithmetic, shared by the hot loops of the module code ----

    #[inline]
    pub fn reduce_raw(&self, code: u64, level: u32) -> u64 {
        code % self.size(level)
    }

    pub fn add_raw(&self, level: u32, a: u64, b: u64) -> u64 {
        match self.spec.model {
            Model::IntegerPadic => (a + b) % self.size(level),
            Model::PolynomialOverPrimeField => {
                let (mut a, mut b, mut out, mut place) = (a, b, 0, 1);
                for _ in 0..level {
                    let d = self.field.add((a % self.q) as u32, (b % self.q) as u32);
                    out += d as u64 * place;
                    place *= self.q;
                    a /= self.q;
                    b /= self.q;
                }
                out
            }
        }
    }

    pub fn neg_raw(&self, level: u32, a: u64) -> u64 {
        match self.spec.model {
            Model::IntegerPadic => (self.size(level) - a % self.size(level)) % self.size(level),
            Model::PolynomialOverPrimeField => {
                let (mut a, mut out, mut place) = (a, 0, 1);
                for _ in 0..level {
                    out += self.field.neg[(a % self.q) as usize] as u64 * place;
                    place *= self.q;
                    a /= self.q;
                }
                out
            }
        }
    }

    pub fn sub_raw(&self, level: u32, a: u64, b: u64) -> u64 {
        self.add_raw(level, a, self.neg_raw(level, b))
    }

    pub fn mul_raw(&self, level: u32, a: u64, b: u64) -> u64 {
        match self.spec.model {
            Model::IntegerPadic => ((a as u128 * b as u128) % self.size(level) as u128) as u64,
            Model::PolynomialOverPrimeField => {
                let da = self.digits_raw(a, level);
                let db = self.digits_raw(b, level);
                let mut prod = vec![0u32; level as usize];
                for (i, &x) in da.iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    for (j, &y) in db.iter().enumerate().take(level as usize - i) {
                        prod[i + j] = self.field.add(prod[i + j], self.field.mul(x, y));
                    }
                }
                self.from_digits_raw(&prod)
            }
        }
    }

    /// Multiplication by `π^k` at the given level.
    #[inline]
    pub fn shift_up_raw(&self, level: u32, a: u64, k: u32) -> u64 {
        if k >= level {
            0
        } else {
            (a * self.size(k)) % self.size(level)
        }
    }

    /// Division by `π^k` along the section: drops the `k` lowest digits.
    #[inline]
    pub fn shift_down_raw(&self, a: u64, k: u32) -> u64 {
        a / self.size(k)
    }

    /// Valuation capped at the level: returns `level` for zero.
    #[inline]
    pub fn val_capped_raw(&self, level: u32, a: u64) -> u32 {
        if a == 0 {
            return level;
        }
        let mut v = 0;
        let mut a = a;
        while a.is_multiple_of(self.q) {
            a /= self.q;
            v += 1;
        }
        v
    }

    pub fn digits_raw(&self, a: u64, level: u32) -> Vec<u32> {
        let mut a = a;
        (0..level)
            .map(|_| {
                let d = (a % self.q) as u32;
                a /= self.q;
                d
            })
            .collect()
    }

    pub fn from_digits_raw(&self, digits: &[u32]) -> u64 {
        digits.iter().rev().fold(0, |acc, &d| acc * self.q + d as u64)
    }

    /// Inverse of a unit; `None` for non-units.
    pub fn inverse_raw(&self, level: u32, a: u64) -> Option<u64> {
        if level == 0 {
            return Some(0);
        }
        if a.is_multiple_of(self.q) {
            return None;
        }
        match self.spec.model {
            Model::IntegerPadic => {
                let n = self.size(level) as i128;
                let (mut r0, mut r1) = (n, (a % self.size(level)) as i128);
                let (mut t0, mut t1) = (0i128, 1i128);
                while r1 != 0 {
                    let quo = r0 / r1;
                    (r0, r1) = (r1, r0 - quo * r1);
                    (t0, t1) = (t1, t0 - quo * t1);
                }
                Some(t0.rem_euclid(n) as u64)
            }
            Model::PolynomialOverPrimeField => {
                let u = self.digits_raw(a, level);
                let u0_inv = self.field.inv[u[0] as usize] as u32;
                let mut w = vec![0u32; level as usize];
                w[0] = u0_inv;
                for i in 1..level as usize {
                    let mut acc = 0;
                    for j in 1..=i {
                        acc = self.field.add(acc, self.field.mul(u[j], w[i - j]));
                    }
                    w[i] = self.field.mul(self.field.neg[acc as usize] as u32, u0_inv);
                }
                Some(self.from_digits_raw(&w))
            }
        }
    }

    // ---- checked element API ----

    pub fn elem(&self, code: u64, level: u32) -> RingElem {
        RingElem { code: self.reduce_raw(code, level), level }
    }

    pub fn zero(&self, level: u32) -> RingElem {
        RingElem { code: 0, level }
    }

    pub fn one(&self, level: u32) -> RingElem {
        self.elem(1, level)
    }

    /// `π^k` at the given level.
    pub fn pi_pow(&self, k: u32, level: u32) -> RingElem {
        RingElem { code: self.shift_up_raw(level, 1, k), level }
    }

    fn check(&self, a: &RingElem, b: &RingElem) -> Result<u32> {
        if a.level != b.level {
            return Err(Error::LevelMismatch { left: a.level, right: b.level });
        }
        Ok(a.level)
    }

    pub fn add(&self, a: &RingElem, b: &RingElem) -> Result<RingElem> {
        let level = self.check(a, b)?;
        Ok(RingElem { code: self.add_raw(level, a.code, b.code), level })
    }

    pub fn sub(&self, a: &RingElem, b: &RingElem) -> Result<RingElem> {
        let level = self.check(a, b)?;
        Ok(RingElem { code: self.sub_raw(level, a.code, b.code), level })
    }

    pub fn mul(&self, a: &RingElem, b: &RingElem) -> Result<RingElem> {
        let level = self.check(a, b)?;
        Ok(RingElem { code: self.mul_raw(level, a.code, b.code), level })
    }

    pub fn neg(&self, a: &RingElem) -> RingElem {
        RingElem { code: self.neg_raw(a.level, a.code), level: a.level }
    }

    /// Valuation; `None` stands for `∞` (the zero element).
    pub fn valuation(&self, x: &RingElem) -> Option<u32> {
        (x.code != 0).then(|| self.val_capped_raw(x.level, x.code))
    }

    pub fn is_unit(&self, x: &RingElem) -> bool {
        x.level > 0 && !x.code.is_multiple_of(self.q)
    }

    pub fn unit_inverse(&self, x: &RingElem) -> Result<RingElem> {
        self.inverse_raw(x.level, x.code)
            .filter(|_| x.level > 0)
            .map(|code| RingElem { code, level: x.level })
            .ok_or(Error::NotAUnit)
    }

    /// Reduction to a lower level (or the section lift to a higher one).
    pub fn to_level(&self, x: &RingElem, level: u32) -> RingElem {
        self.elem(x.code, level)
    }

    pub fn residue(&self, x: &RingElem) -> ResidueElem {
        ResidueElem((x.code % self.q) as u32)
    }

    /// Digits `c_0..c_{n-1}` with `x = Σ s(c_i) π^i`.
    pub fn digits(&self, x: &RingElem) -> Vec<ResidueElem> {
        self.digits_raw(x.code, x.level).into_iter().map(ResidueElem).collect()
    }

    pub fn from_digits(&self, digits: &[ResidueElem]) -> RingElem {
        let raw: Vec<u32> = digits.iter().map(|d| d.0).collect();
        RingElem { code: self.from_digits_raw(&raw), level: digits.len() as u32 }
    }

    /// All units of `R/π^level`, ascending by code.
    pub fn units(&self, level: u32) -> impl Iterator<Item = RingElem> + '_ {
        (0..self.size(level))
            .filter(move |c| level > 0 && c % self.q != 0)
            .map(move |code| RingElem { code, level })
    }

    pub fn residue_add(&self, a: ResidueElem, b: ResidueElem) -> ResidueElem {
        ResidueElem(self.field.add(a.0, b.0))
    }

    pub fn residue_mul(&self, a: ResidueElem, b: ResidueElem) -> ResidueElem {
        ResidueElem(self.field.mul(a.0, b.0))
    }

    pub fn residue_neg(&self, a: ResidueElem) -> ResidueElem {
        ResidueElem(self.field.neg[a.0 as usize] as u32)
    }

    pub fn residue_inv(&self, a: ResidueElem) -> Option<ResidueElem> {
        (a.0 != 0).then(|| ResidueElem(self.field.inv[a.0 as usize] as u32))
    }

    /// Rank of a list of vectors over the residue field.
    pub fn residue_rank(&self, rows: &[Vec<u32>]) -> usize {
        let mut m: Vec<Vec<u32>> = rows.to_vec();
        let cols = m.first().map_or(0, |r| r.len());
        let mut rank = 0;
        for c in 0..cols {
            let Some(piv) = (rank..m.len()).find(|&r| m[r][c] != 0) else {
                continue;
            };
            m.swap(rank, piv);
            let inv = self.field.inv[m[rank][c] as usize] as u32;
            for r in 0..m.len() {
                if r != rank && m[r][c] != 0 {
                    let f = self.field.mul(m[r][c], inv);
                    for k in c..cols {
                        let t = self.field.mul(f, m[rank][k]);
                        m[r][k] = self.field.add(m[r][k], self.field.neg[t as usize] as u32);
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}
