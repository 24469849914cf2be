//! Counting lemmas behind commutativity of the orbital algebra, each as a
//! closed form next to an exhaustive count over `R_n^k`.
//!
//! Vectors are slices of ring codes at a common level. A closed form only
//! applies when the counted set is nonempty, so a result holds when the
//! count is zero or equals the formula, and the swapped count agrees.

use serde::Serialize;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dvr::{Ring, RingSpec};
use crate::error::{Error, Result};

/// `π^r A` or `π^r A*` inside `A = R_n^k`, where `A* = A − πA`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Layer {
    Full,
    Units,
}

/// Which pair of congruence systems of the linear-independence lemma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum IndependenceSystem {
    /// Both independence conditions imposed.
    Both,
    /// Only the condition on the outer congruence.
    One,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Lemma {
    /// `|(y + π^r X) ∩ (y' + π^{r'} Y)|` for layers `X`, `Y`.
    Cosets { n: u32, r: u32, r_prime: u32, left: Layer, right: Layer, y: Vec<u64>, y_prime: Vec<u64> },
    /// `e ≡ a ≡ b (mod π^r)` with both `π^{-r}(e - a)` and `π^{-r}(e - b)`
    /// independent of the residue vector `x`.
    IndependentLifts { n: u32, r: u32, x: Vec<u32>, a: Vec<u64>, b: Vec<u64> },
    /// `e ∈ π^s R_t^{ρ*}` with `b ≡ e y_2 (mod π^{r_2})`, `e ≡ a y_1 (mod π^{r_1})`
    /// and independence conditions; compared with `y_1, r_1 ↔ y_2, r_2`.
    Independences {
        system: IndependenceSystem,
        t: u32,
        s: u32,
        r1: u32,
        r2: u32,
        a: Vec<u64>,
        b: Vec<u64>,
        y1: u64,
        y2: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LemmaCount {
    /// Closed form, valid when the counted set is nonempty.
    pub formula: i128,
    pub count: u64,
    /// Count of the mirrored system.
    pub swapped: u64,
}

impl LemmaCount {
    pub fn holds(&self) -> bool {
        (self.count == 0 || self.count as i128 == self.formula) && self.count == self.swapped
    }
}

struct Vectors<'a> {
    ring: &'a Ring,
    level: u32,
}

impl Vectors<'_> {
    fn sub(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| self.ring.sub_raw(self.level, x, y)).collect()
    }

    fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| self.ring.add_raw(self.level, x, y)).collect()
    }

    fn scale(&self, c: u64, a: &[u64]) -> Vec<u64> {
        a.iter().map(|&x| self.ring.mul_raw(self.level, c, x)).collect()
    }

    fn shift(&self, a: &[u64], k: u32) -> Vec<u64> {
        a.iter().map(|&x| self.ring.shift_up_raw(self.level, x, k)).collect()
    }

    fn val(&self, a: &[u64]) -> u32 {
        a.iter().map(|&x| self.ring.val_capped_raw(self.level, x)).min().unwrap_or(self.level)
    }

    /// Residue vector of `π^{-r} a`.
    fn digit(&self, a: &[u64], r: u32) -> Vec<u32> {
        a.iter().map(|&x| (self.ring.shift_down_raw(x, r) % self.ring.q()) as u32).collect()
    }

    fn independent(&self, u: &[u32], v: &[u32]) -> bool {
        self.ring.residue_rank(&[u.to_vec(), v.to_vec()]) == 2
    }

    fn in_layer(&self, d: &[u64], r: u32, layer: Layer) -> bool {
        match layer {
            Layer::Full => self.val(d) >= r,
            Layer::Units => self.val(d) == r,
        }
    }

    fn all(&self, k: usize) -> impl Iterator<Item = Vec<u64>> + '_ {
        let base = self.ring.size(self.level);
        let total = base.pow(k as u32);
        (0..total).map(move |mut i| {
            (0..k)
                .map(|_| {
                    let c = i % base;
                    i /= base;
                    c
                })
                .collect()
        })
    }
}

fn pow(q: u64, e: u32) -> i128 {
    (q as i128).pow(e)
}

fn violated(msg: impl Into<String>) -> Error {
    Error::HypothesisViolated(msg.into())
}

pub fn lemma_count(ring: &Ring, lemma: &Lemma) -> Result<LemmaCount> {
    match lemma {
        Lemma::Cosets { n, r, r_prime, left, right, y, y_prime } => cosets(ring, *n, *r, *r_prime, *left, *right, y, y_prime),
        Lemma::IndependentLifts { n, r, x, a, b } => independent_lifts(ring, *n, *r, x, a, b),
        Lemma::Independences { system, t, s, r1, r2, a, b, y1, y2 } => {
            independences(ring, *system, *t, *s, *r1, *r2, a, b, *y1, *y2)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cosets(ring: &Ring, n: u32, r: u32, rp: u32, left: Layer, right: Layer, y: &[u64], yp: &[u64]) -> Result<LemmaCount> {
    if y.len() != yp.len() || y.is_empty() {
        return Err(violated("vectors must share a positive length"));
    }
    if r > n || rp > n || (left == Layer::Units && r >= n) || (right == Layer::Units && rp >= n) {
        return Err(violated(format!("exponents out of range: r = {r}, r' = {rp}, n = {n}")));
    }
    let v = Vectors { ring, level: n };
    let k = y.len() as u32;
    let q = ring.q();
    let count = |y: &[u64], yp: &[u64]| {
        v.all(y.len()).filter(|x| v.in_layer(&v.sub(x, y), r, left) && v.in_layer(&v.sub(x, yp), rp, right)).count() as u64
    };
    let formula = match (left, right) {
        (Layer::Units, Layer::Units) => {
            let big = r.max(rp);
            let units = if r != rp || v.val(&v.sub(y, yp)) > r { pow(q, k) - 1 } else { pow(q, k) - 2 };
            pow(q, (n - big - 1) * k) * units
        }
        (Layer::Full, Layer::Full) => pow(q, (n - r.max(rp)) * k),
        (Layer::Full, Layer::Units) => {
            if r > rp {
                pow(q, (n - r) * k)
            } else {
                pow(q, (n - rp - 1) * k) * (pow(q, k) - 1)
            }
        }
        (Layer::Units, Layer::Full) => return Err(violated("the unit layer goes on the right")),
    };
    Ok(LemmaCount { formula, count: count(y, yp), swapped: count(yp, y) })
}

fn independent_lifts(ring: &Ring, n: u32, r: u32, x: &[u32], a: &[u64], b: &[u64]) -> Result<LemmaCount> {
    let k = x.len();
    if a.len() != k || b.len() != k || k == 0 {
        return Err(violated("vectors must share a positive length"));
    }
    if r >= n {
        return Err(violated(format!("need r < n, got r = {r}, n = {n}")));
    }
    if x.iter().all(|&c| c == 0) {
        return Err(violated("x must be nonzero"));
    }
    let v = Vectors { ring, level: n };
    if v.val(&v.sub(a, b)) < r {
        return Err(violated("a and b must agree modulo π^r"));
    }
    let q = ring.q();
    let outside = |d: &[u32]| v.independent(d, x);
    let count = |a: &[u64], b: &[u64]| {
        v.all(k)
            .filter(|e| {
                let da = v.sub(e, a);
                let db = v.sub(e, b);
                v.val(&da) >= r && outside(&v.digit(&da, r)) && outside(&v.digit(&db, r))
            })
            .count() as u64
    };
    let factor = if outside(&v.digit(&v.sub(a, b), r)) { pow(q, k as u32) - 2 * q as i128 } else { pow(q, k as u32) - q as i128 };
    Ok(LemmaCount { formula: pow(q, k as u32 * (n - r - 1)) * factor, count: count(a, b), swapped: count(b, a) })
}

#[allow(clippy::too_many_arguments)]
fn independences(
    ring: &Ring,
    system: IndependenceSystem,
    t: u32,
    s: u32,
    r1: u32,
    r2: u32,
    a: &[u64],
    b: &[u64],
    y1: u64,
    y2: u64,
) -> Result<LemmaCount> {
    let rho = a.len();
    let q = ring.q();
    if q == 2 && rho <= 2 {
        return Err(violated(format!("residue field of order 2 needs multiplicity > 2, got {rho}")));
    }
    if b.len() != rho || rho == 0 {
        return Err(violated("vectors must share a positive length"));
    }
    if !(s <= r1 && s <= r2 && r1 < t && r2 < t) {
        return Err(violated(format!("need s <= r1, r2 < t; got s = {s}, r1 = {r1}, r2 = {r2}, t = {t}")));
    }
    let v = Vectors { ring, level: t };
    if v.val(a) != s || v.val(b) != s {
        return Err(violated("a and b must lie in π^s R_t^{ρ*}"));
    }
    if ring.inverse_raw(t, y1).is_none() || ring.inverse_raw(t, y2).is_none() {
        return Err(violated("y1 and y2 must be units"));
    }
    let abar = v.digit(a, s);
    // congruences b ≡ e·yo (mod π^ro), e ≡ a·yi (mod π^ri); the single-condition
    // system keeps the outer condition, its mirror the inner one
    let count = |yo: u64, ro: u32, yi: u64, ri: u32, mirrored: bool| {
        v.all(rho)
            .filter(|e| {
                if v.val(e) != s {
                    return false;
                }
                let outer = v.sub(b, &v.scale(yo, e));
                let inner = v.sub(e, &v.scale(yi, a));
                if v.val(&outer) < ro || v.val(&inner) < ri {
                    return false;
                }
                let c_outer = || v.independent(&v.digit(&outer, ro), &v.digit(e, s));
                let c_inner = || v.independent(&v.digit(&inner, ri), &abar);
                match (system, mirrored) {
                    (IndependenceSystem::Both, _) => c_outer() && c_inner(),
                    (IndependenceSystem::One, false) => c_outer(),
                    (IndependenceSystem::One, true) => c_inner(),
                }
            })
            .count() as u64
    };
    let rho32 = rho as u32;
    let qr = pow(q, rho32);
    let qq = q as i128;
    let formula = match system {
        IndependenceSystem::Both => {
            if r1 != r2 {
                pow(q, rho32 * (t - r1.max(r2) - 1)) * (qr - qq)
            } else if s < r1 {
                let r = r1;
                let d = v.sub(&v.scale(ring.mul_raw(t, y1, y2), a), b);
                let in_s = v.val(&d) >= r && v.independent(&v.digit(&d, r), &abar);
                pow(q, rho32 * (t - r - 1)) * if in_s { qr - 2 * qq } else { qr - qq }
            } else if v.independent(&abar, &v.digit(b, s)) {
                pow(q, rho32 * (t - s - 1)) * (qr - 2 * qq + 1)
            } else {
                pow(q, rho32 * (t - s - 1)) * (qr - qq)
            }
        }
        IndependenceSystem::One => {
            if r1 < r2 {
                pow(q, rho32 * (t - r2 - 1)) * (qr - qq)
            } else if r2 < r1 {
                pow(q, rho32 * (t - r1))
            } else {
                pow(q, rho32 * (t - r1 - 1)) * (qr - qq)
            }
        }
    };
    Ok(LemmaCount { formula, count: count(y2, r2, y1, r1, false), swapped: count(y1, r1, y2, r2, true) })
}

/// One instance of the lemma sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub ring: RingSpec,
    pub lemma: Lemma,
    pub result: LemmaCount,
    pub holds: bool,
}

fn random_vector(rng: &mut ChaCha8Rng, ring: &Ring, level: u32, len: usize) -> Vec<u64> {
    (0..len).map(|_| rng.gen_range(0..ring.size(level))).collect()
}

/// Random vector with at least one unit coordinate.
fn random_primitive(rng: &mut ChaCha8Rng, ring: &Ring, level: u32, len: usize) -> Vec<u64> {
    loop {
        let v = random_vector(rng, ring, level, len);
        if v.iter().any(|&c| c % ring.q() != 0) {
            return v;
        }
    }
}

fn random_unit(rng: &mut ChaCha8Rng, ring: &Ring, level: u32) -> u64 {
    loop {
        let u = rng.gen_range(0..ring.size(level));
        if u % ring.q() != 0 {
            return u;
        }
    }
}

/// Lift of a residue vector to codes at `level`.
fn lift(residues: &[u32]) -> Vec<u64> {
    residues.iter().map(|&c| c as u64).collect()
}

/// A residue vector independent of the nonzero vector `x` (length ≥ 2).
fn independent_of(ring: &Ring, x: &[u32]) -> Vec<u32> {
    let pivot = x.iter().position(|&c| c != 0).unwrap();
    let mut u = vec![0u32; x.len()];
    u[(pivot + 1) % x.len()] = 1;
    if ring.residue_rank(&[u.clone(), x.to_vec()]) == 2 {
        u
    } else {
        let mut w = vec![0u32; x.len()];
        w[pivot] = 1;
        w
    }
}

fn coset_instances(ring: &Ring, rng: &mut ChaCha8Rng, out: &mut Vec<Lemma>) {
    let cases = [(Layer::Units, Layer::Units), (Layer::Full, Layer::Full), (Layer::Full, Layer::Units)];
    for n in 1..=3u32 {
        let v = Vectors { ring, level: n };
        for k in 1..=2usize {
            for (left, right) in cases {
                let top = |layer: Layer| if layer == Layer::Units { n - 1 } else { n };
                for r in 0..=top(left) {
                    for r_prime in 0..=top(right) {
                        // one pair per valuation class of y' - y
                        for d in 0..=n {
                            let y = random_vector(rng, ring, n, k);
                            let w = random_primitive(rng, ring, n, k);
                            let y_prime = v.add(&y, &v.shift(&w, d));
                            out.push(Lemma::Cosets { n, r, r_prime, left, right, y, y_prime });
                        }
                    }
                }
            }
        }
    }
}

fn lift_instances(ring: &Ring, rng: &mut ChaCha8Rng, out: &mut Vec<Lemma>) {
    let k = 2usize;
    let q = ring.q() as u32;
    let xs: Vec<Vec<u32>> = (1..q * q).map(|c| vec![c % q, c / q]).collect();
    for n in 1..=3u32 {
        let v = Vectors { ring, level: n };
        for x in &xs {
            for r in 0..n {
                let a = random_vector(rng, ring, n, k);
                let ds = [vec![0; k], lift(x), lift(&independent_of(ring, x)), random_vector(rng, ring, n, k)];
                for d in ds {
                    let b = v.add(&a, &v.shift(&d, r));
                    out.push(Lemma::IndependentLifts { n, r, x: x.clone(), a: a.clone(), b });
                }
            }
        }
    }
}

fn independence_instances(ring: &Ring, rho: usize, rng: &mut ChaCha8Rng, out: &mut Vec<Lemma>) {
    for t in 1..=3u32 {
        let v = Vectors { ring, level: t };
        for s in 0..t {
            for r1 in s..t {
                for r2 in s..t {
                    for system in [IndependenceSystem::Both, IndependenceSystem::One] {
                        for _ in 0..2 {
                            let a = v.shift(&random_primitive(rng, ring, t, rho), s);
                            let (y1, y2) = (random_unit(rng, ring, t), random_unit(rng, ring, t));
                            let abar = v.digit(&a, s);
                            let r = r1.min(r2);
                            let base = v.scale(ring.mul_raw(t, y1, y2), &a);
                            let ds = [vec![0; rho], lift(&abar), lift(&independent_of(ring, &abar)), random_vector(rng, ring, t, rho)];
                            let mut bs: Vec<Vec<u64>> = ds.iter().map(|d| v.sub(&base, &v.shift(d, r))).collect();
                            bs.push(v.shift(&random_primitive(rng, ring, t, rho), s));
                            for b in bs {
                                if v.val(&b) == s {
                                    out.push(Lemma::Independences { system, t, s, r1, r2, a: a.clone(), b, y1, y2 });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

/// The full deterministic grid: cosets for `n ≤ 3, k ≤ 2, q ∈ {3,4,5}`;
/// independent lifts for `n ≤ 3, k = 2, q = 3`; independences for
/// `t ≤ 3` with `ρ = 2, q ∈ {3,5}` and `ρ = 3, q = 3`. With `only`, just
/// the instances over that ring are evaluated; the instances themselves do
/// not depend on the filter.
pub fn lemma_sweep(seed: u64, only: Option<&RingSpec>) -> Result<Vec<SweepRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs: Vec<(RingSpec, Lemma)> = Vec::new();
    let mut push = |spec: &str, build: &mut dyn FnMut(&Ring, &mut ChaCha8Rng, &mut Vec<Lemma>)| {
        let spec: RingSpec = spec.parse().expect("fixed ring spec");
        let ring = Ring::new(spec);
        let mut out = Vec::new();
        build(&ring, &mut rng, &mut out);
        if only.is_some_and(|o| *o != spec) {
            return;
        }
        jobs.extend(out.into_iter().map(|l| (spec, l)));
    };
    for spec in ["zp:3", "fqt:2^2", "zp:5"] {
        push(spec, &mut coset_instances);
    }
    push("zp:3", &mut lift_instances);
    push("zp:3", &mut |r, g, o| independence_instances(r, 2, g, o));
    push("zp:5", &mut |r, g, o| independence_instances(r, 2, g, o));
    push("zp:3", &mut |r, g, o| independence_instances(r, 3, g, o));
    jobs.into_par_iter()
        .map(|(spec, lemma)| {
            let ring = Ring::new(spec);
            let result = lemma_count(&ring, &lemma)?;
            Ok(SweepRow { ring: spec, holds: result.holds(), lemma, result })
        })
        .collect()
}
