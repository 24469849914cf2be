//! B-sets `I(r, a) = Π_i π^{r_i} (R_{λ_i}^{ρ_i})^{a_i}`: per block, `a_i = 0`
//! is the layer `π^{r_i} R^{ρ_i}` and `a_i = 1` drops its `π^{r_i + 1}` part.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pmodule::{Module, Partition};
use crate::poset::OrderIdeal;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BSet {
    lengths: Vec<u32>,
    r: Vec<u32>,
    a: Vec<bool>,
}

impl BSet {
    /// `r_i` may range over `0..=λ_i`.
    pub fn new(partition: &Partition, r: Vec<u32>, a: Vec<bool>) -> Result<Self> {
        let lengths = partition.lengths();
        if r.len() != lengths.len() || a.len() != lengths.len() {
            return Err(Error::ShapeMismatch { expected: lengths.len(), got: r.len().max(a.len()) });
        }
        if let Some((&ri, &l)) = r.iter().zip(&lengths).find(|(ri, l)| ri > l) {
            return Err(Error::InvalidPartition(format!("exponent {ri} exceeds part {l}")));
        }
        Ok(BSet { lengths, r, a })
    }

    /// The characteristic submodule `R_λ^I`: all `a_i = 0`, `r_i = ∂_{λ_i} I`.
    pub fn from_ideal(ideal: &OrderIdeal) -> Self {
        BSet { lengths: ideal.partition().lengths(), r: ideal.boundary().to_vec(), a: vec![false; ideal.boundary().len()] }
    }

    pub fn r(&self) -> &[u32] {
        &self.r
    }

    pub fn a(&self) -> &[bool] {
        &self.a
    }

    pub fn contains_codes(&self, module: &Module, codes: &[u64]) -> bool {
        (0..self.r.len()).all(|i| {
            let v = module.block_val_codes(codes, i);
            if self.a[i] {
                v == self.r[i]
            } else {
                v >= self.r[i]
            }
        })
    }

    /// Closed-form cardinality.
    pub fn size(&self, partition: &Partition, q: u64) -> u128 {
        let q = q as u128;
        partition
            .parts()
            .iter()
            .zip(self.r.iter().zip(&self.a))
            .map(|(&(l, rho), (&r, &a))| {
                let full = q.pow(rho * (l - r));
                match (a, r < l) {
                    (false, _) => full,
                    (true, true) => full - q.pow(rho * (l - r - 1)),
                    (true, false) => 1,
                }
            })
            .product()
    }

    fn check_same(&self, other: &BSet) -> Result<()> {
        if self.lengths != other.lengths {
            return Err(Error::PartitionMismatch);
        }
        Ok(())
    }

    /// `I(r ∪ s, a + b − ab)`, or `None` when some block has `r_i < s_i`
    /// with `a_i = 1` (or symmetrically).
    pub fn intersect(&self, other: &BSet) -> Result<Option<BSet>> {
        self.check_same(other)?;
        let mut r = Vec::with_capacity(self.r.len());
        let mut a = Vec::with_capacity(self.r.len());
        for i in 0..self.r.len() {
            let (ri, si, ai, bi) = (self.r[i], other.r[i], self.a[i], other.a[i]);
            if (ri < si && ai) || (si < ri && bi) {
                return Ok(None);
            }
            r.push(ri.max(si));
            a.push(ai || bi);
        }
        Ok(Some(BSet { lengths: self.lengths.clone(), r, a }))
    }

    /// `I(r ∩ s, c)`: `c_i` follows the smaller exponent, and is 0 on ties.
    /// Needs an odd prime; over `Z/2^n` two units can only sum to a non-unit.
    pub fn sum(&self, other: &BSet, p: u32) -> Result<BSet> {
        self.check_same(other)?;
        if p == 2 {
            return Err(Error::EvenPrime(p));
        }
        let (r, a) = (0..self.r.len())
            .map(|i| {
                let (ri, si) = (self.r[i], other.r[i]);
                let c = match ri.cmp(&si) {
                    std::cmp::Ordering::Less => self.a[i],
                    std::cmp::Ordering::Greater => other.a[i],
                    std::cmp::Ordering::Equal => false,
                };
                (ri.min(si), c)
            })
            .unzip();
        Ok(BSet { lengths: self.lengths.clone(), r, a })
    }

    pub fn meet(&self, other: &BSet) -> Result<Option<BSet>> {
        self.intersect(other)
    }

    pub fn join(&self, other: &BSet, p: u32) -> Result<BSet> {
        self.sum(other, p)
    }
}

impl fmt::Display for BSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r: Vec<String> = self.r.iter().map(u32::to_string).collect();
        let a: Vec<String> = self.a.iter().map(|&b| (b as u8).to_string()).collect();
        write!(f, "I(({}),({}))", r.join(","), a.join(","))
    }
}

/// All B-sets over the partition, with `r_i ∈ 1..=λ_i`, or `0..=λ_i` when
/// `include_zero` is set.
pub fn enumerate_bsets(partition: &Partition, include_zero: bool) -> Vec<BSet> {
    let lengths = partition.lengths();
    let lo = if include_zero { 0 } else { 1 };
    let mut out = vec![BSet { lengths: lengths.clone(), r: Vec::new(), a: Vec::new() }];
    for &l in &lengths {
        out = out
            .into_iter()
            .flat_map(|s| {
                (lo..=l).flat_map(move |r| {
                    let s = s.clone();
                    [false, true].into_iter().map(move |a| {
                        let mut t = s.clone();
                        t.r.push(r);
                        t.a.push(a);
                        t
                    })
                })
            })
            .collect();
    }
    out
}

/// Membership bitmap over element indices.
pub fn members(module: &Module, s: &BSet) -> Vec<bool> {
    let mut codes = vec![0u64; module.num_coords()];
    (0..module.size() as u64)
        .map(|i| {
            module.codes_of_index(i, &mut codes);
            s.contains_codes(module, &codes)
        })
        .collect()
}

/// Minkowski sum of two membership bitmaps.
pub fn minkowski_sum(module: &Module, x: &[bool], y: &[bool]) -> Vec<bool> {
    let nc = module.num_coords();
    let idx = |m: &[bool]| -> Vec<u64> { m.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u64).collect() };
    let (xs, ys) = (idx(x), idx(y));
    let mut out = vec![false; x.len()];
    let (mut a, mut b, mut c) = (vec![0u64; nc], vec![0u64; nc], vec![0u64; nc]);
    let levels = module.levels();
    let ring = module.ring();
    for &i in &xs {
        module.codes_of_index(i, &mut a);
        for &j in &ys {
            module.codes_of_index(j, &mut b);
            for t in 0..nc {
                c[t] = ring.add_raw(levels[t], a[t], b[t]);
            }
            out[module.index_of_codes(&c) as usize] = true;
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct BSetVerification {
    pub bsets: usize,
    pub pairs: usize,
    pub size_mismatches: Vec<String>,
    pub intersect_mismatches: Vec<String>,
    pub sum_mismatches: Vec<String>,
    /// For `p = 2`: whether every sum was rejected.
    pub even_prime_rejected: Option<bool>,
    pub agrees: bool,
}

/// Checks sizes, intersections and sums of every pair of B-sets against
/// enumerated member sets.
pub fn verify_bsets(module: &Module, include_zero: bool, cap: u128) -> Result<BSetVerification> {
    module.check_cap(cap)?;
    let partition = module.partition();
    let sets = enumerate_bsets(partition, include_zero);
    let maps: Vec<Vec<bool>> = sets.iter().map(|s| members(module, s)).collect();
    let p = module.ring().p();
    let q = module.ring().q();
    let mut v = BSetVerification {
        bsets: sets.len(),
        pairs: sets.len() * sets.len(),
        size_mismatches: Vec::new(),
        intersect_mismatches: Vec::new(),
        sum_mismatches: Vec::new(),
        even_prime_rejected: None,
        agrees: false,
    };
    for (s, m) in sets.iter().zip(&maps) {
        if m.iter().filter(|&&b| b).count() as u128 != s.size(partition, q) {
            v.size_mismatches.push(s.to_string());
        }
    }
    let mut rejected = true;
    for (i, s) in sets.iter().enumerate() {
        for (j, t) in sets.iter().enumerate() {
            let literal: Vec<bool> = maps[i].iter().zip(&maps[j]).map(|(&x, &y)| x && y).collect();
            let formula = match s.intersect(t)? {
                Some(u) => members(module, &u),
                None => vec![false; literal.len()],
            };
            if formula != literal {
                v.intersect_mismatches.push(format!("{s} ∩ {t}"));
            }
            match s.sum(t, p) {
                Ok(u) => {
                    if members(module, &u) != minkowski_sum(module, &maps[i], &maps[j]) {
                        v.sum_mismatches.push(format!("{s} + {t}"));
                    }
                }
                Err(Error::EvenPrime(_)) => {}
                Err(e) => return Err(e),
            }
            rejected &= matches!(s.sum(t, p), Err(Error::EvenPrime(_)));
        }
    }
    if p == 2 {
        v.even_prime_rejected = Some(rejected);
    }
    v.agrees = v.size_mismatches.is_empty()
        && v.intersect_mismatches.is_empty()
        && v.sum_mismatches.is_empty()
        && v.even_prime_rejected.unwrap_or(true);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dvr::{Ring, RingSpec};
    use crate::poset::enumerate_ideals;

    fn module(ring: &str, lengths: &[u32]) -> Module {
        let ring = Ring::new(ring.parse::<RingSpec>().unwrap());
        Module::new(&ring, &Partition::from_lengths(lengths).unwrap())
    }

    fn bset(m: &Module, r: &[u32], a: &[u8]) -> BSet {
        BSet::new(m.partition(), r.to_vec(), a.iter().map(|&x| x == 1).collect()).unwrap()
    }

    #[test]
    fn membership_examples() {
        let m = module("zp:3", &[2, 1]);
        let s = bset(&m, &[1, 1], &[1, 0]);
        assert!(s.contains_codes(&m, &[3, 0]));
        assert!(!s.contains_codes(&m, &[6, 2]));
        assert!(bset(&m, &[2, 1], &[0, 0]).contains_codes(&m, &[0, 0]));
        assert!(BSet::new(m.partition(), vec![3, 1], vec![false, false]).is_err());
    }

    #[test]
    fn intersection_examples() {
        let m = module("zp:3", &[2]);
        let (s1, s0, s2) = (bset(&m, &[1], &[1]), bset(&m, &[1], &[0]), bset(&m, &[2], &[0]));
        assert_eq!(s1.intersect(&s1).unwrap(), Some(s1.clone()));
        assert_eq!(s1.intersect(&s0).unwrap(), Some(s1.clone()));
        assert_eq!(s1.intersect(&s2).unwrap(), None);
    }

    #[test]
    fn sum_examples() {
        let m = module("zp:3", &[3]);
        let s1 = bset(&m, &[1], &[1]);
        assert_eq!(s1.sum(&s1, 3).unwrap(), bset(&m, &[1], &[0]));
        assert_eq!(s1.sum(&bset(&m, &[2], &[1]), 3).unwrap(), s1);
        assert_eq!(s1.sum(&bset(&m, &[3], &[0]), 3).unwrap(), s1);
        assert_eq!(s1.join(&s1, 3).unwrap(), s1.sum(&s1, 3).unwrap());
        assert_eq!(s1.sum(&s1, 2), Err(Error::EvenPrime(2)));
    }

    #[test]
    fn set_level_truth() {
        for (ring, lengths) in [("zp:3", vec![2, 1]), ("zp:3", vec![3, 1]), ("zp:3", vec![2, 2, 1]), ("zp:5", vec![2, 1])] {
            let m = module(ring, &lengths);
            let v = verify_bsets(&m, true, 1 << 16).unwrap();
            assert!(v.agrees, "{ring} {lengths:?}: {v:?}");
        }
        let v = verify_bsets(&module("zp:2", &[2, 1]), false, 1 << 16).unwrap();
        assert_eq!(v.even_prime_rejected, Some(true));
    }

    #[test]
    fn join_is_additively_closed_and_absorbs() {
        let m = module("zp:3", &[2, 1]);
        let sets = enumerate_bsets(m.partition(), false);
        for s in &sets {
            for t in &sets {
                let j = s.join(t, 3).unwrap();
                let jm = members(&m, &j);
                let sum = minkowski_sum(&m, &members(&m, s), &members(&m, t));
                assert!(sum.iter().zip(&jm).all(|(&x, &y)| !x || y));
                if !s.contains_codes(&m, &[0, 0]) {
                    continue;
                }
                // with 0 ∈ s: meet(join(s, t), t) ⊇ t
                let meet = j.meet(t).unwrap();
                let tm = members(&m, t);
                let mm = meet.map(|u| members(&m, &u)).unwrap_or_else(|| vec![false; tm.len()]);
                assert!(tm.iter().zip(&mm).all(|(&x, &y)| !x || y), "{s} {t}");
            }
        }
    }

    #[test]
    fn absorption_needs_zero_in_the_left_set() {
        let m = module("zp:3", &[2]);
        let (s, t) = (bset(&m, &[1], &[1]), bset(&m, &[2], &[0]));
        let j = s.join(&t, 3).unwrap();
        assert_eq!(j, s);
        assert!(t.contains_codes(&m, &[0]) && !j.contains_codes(&m, &[0]));
    }

    #[test]
    fn characteristic_submodules_are_bsets() {
        let m = module("zp:3", &[2, 1]);
        for ideal in enumerate_ideals(m.partition()) {
            let s = BSet::from_ideal(&ideal);
            let mut codes = vec![0u64; m.num_coords()];
            for i in 0..m.size() as u64 {
                m.codes_of_index(i, &mut codes);
                assert_eq!(s.contains_codes(&m, &codes), crate::orbits::char_submodule_contains_codes(&m, &ideal, &codes));
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn intersection_is_pointwise_and(
            r in proptest::collection::vec(0u32..=3, 2), a in proptest::collection::vec(proptest::bool::ANY, 2),
            s in proptest::collection::vec(0u32..=3, 2), b in proptest::collection::vec(proptest::bool::ANY, 2),
            e in 0u64..81,
        ) {
            let m = module("zp:3", &[3, 1]);
            let clamp = |v: Vec<u32>| vec![v[0], v[1].min(1)];
            let (x, y) = (BSet::new(m.partition(), clamp(r), a).unwrap(), BSet::new(m.partition(), clamp(s), b).unwrap());
            let mut codes = vec![0u64; 2];
            m.codes_of_index(e, &mut codes);
            let both = x.contains_codes(&m, &codes) && y.contains_codes(&m, &codes);
            let via = x.intersect(&y).unwrap().is_some_and(|u| u.contains_codes(&m, &codes));
            proptest::prop_assert_eq!(both, via);
            proptest::prop_assert_eq!(x.sum(&y, 3).unwrap(), y.sum(&x, 3).unwrap());
            proptest::prop_assert_eq!(x.intersect(&y).unwrap(), y.intersect(&x).unwrap());
        }
    }
}
