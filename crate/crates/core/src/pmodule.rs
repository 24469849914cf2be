//! The finite module `R_λ = ⊕ (R/π^{λ_i})^{ρ_i}`, its elements and its
//! endomorphisms in block form.
//!
//! Elements are flat coordinate vectors; coordinate `c` lives at level
//! `levels[c]`. An element's index is the mixed-radix number formed by its
//! coordinate codes (first coordinate least significant), which gives O(1)
//! conversions in both directions.
//!
//! A [`BlockMatrix`] stores, for every pair of coordinates `(s, t)`, an
//! unscaled coefficient `c_st` at level `min(λ_s, λ_t)`. The map it represents
//! sends `x_t` to `π^{max(0, λ_s - λ_t)} · c_st · x_t` in coordinate `s`, which
//! parameterizes `Hom(R/π^{λ_t}, R/π^{λ_s})` exactly.

use std::collections::HashSet;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dvr::{Model, Ring, RingElem};
use crate::error::{Error, Result};

/// `λ = (λ_1^{ρ_1}, …, λ_k^{ρ_k})` with strictly decreasing parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<(u32, u32)>,
}

impl Partition {
    pub fn new(parts: Vec<(u32, u32)>) -> Result<Self> {
        for w in parts.windows(2) {
            if w[0].0 <= w[1].0 {
                return Err(Error::InvalidPartition(format!(
                    "parts must strictly decrease, got {} before {}",
                    w[0].0, w[1].0
                )));
            }
        }
        if let Some(&(l, r)) = parts.iter().find(|&&(l, r)| l == 0 || r == 0) {
            return Err(Error::InvalidPartition(format!(
                "parts and multiplicities must be positive, got {l}^{r}"
            )));
        }
        Ok(Partition { parts })
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    /// Builds a partition from a multiset of part lengths in any order.
    pub fn from_lengths(lengths: &[u32]) -> Result<Self> {
        let mut sorted = lengths.to_vec();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let mut parts: Vec<(u32, u32)> = Vec::new();
        for l in sorted {
            match parts.last_mut() {
                Some((last, mult)) if *last == l => *mult += 1,
                _ => parts.push((l, 1)),
            }
        }
        Partition::new(parts)
    }

    pub fn parts(&self) -> &[(u32, u32)] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// The distinct part lengths, decreasing.
    pub fn lengths(&self) -> Vec<u32> {
        self.parts.iter().map(|&(l, _)| l).collect()
    }

    pub fn num_blocks(&self) -> usize {
        self.parts.len()
    }

    pub fn num_coords(&self) -> usize {
        self.parts.iter().map(|&(_, r)| r as usize).sum()
    }

    /// Level of every coordinate, in layout order.
    pub fn coordinate_levels(&self) -> Vec<u32> {
        self.parts.iter().flat_map(|&(l, r)| std::iter::repeat_n(l, r as usize)).collect()
    }

    pub fn block_of_length(&self, l: u32) -> Option<usize> {
        self.parts.iter().position(|&(len, _)| len == l)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .parts
            .iter()
            .map(|&(l, r)| if r == 1 { l.to_string() } else { format!("{l}^{r}") })
            .collect();
        write!(f, "{}", items.join(","))
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses `"2^2,1"`; surrounding parentheses and spaces are ignored.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('(').trim_end_matches(')').trim();
        if body.is_empty() {
            return Ok(Partition::empty());
        }
        let parts = body
            .split(',')
            .map(|item| {
                let item = item.trim();
                let bad = || Error::Parse(format!("bad partition item `{item}`"));
                match item.split_once('^') {
                    Some((l, r)) => Ok((
                        l.trim().parse().map_err(|_| bad())?,
                        r.trim().parse().map_err(|_| bad())?,
                    )),
                    None => Ok((item.parse().map_err(|_| bad())?, 1)),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModuleElement {
    coords: Vec<RingElem>,
}

impl ModuleElement {
    pub fn coords(&self) -> &[RingElem] {
        &self.coords
    }

    pub fn codes(&self) -> Vec<u64> {
        self.coords.iter().map(|c| c.code()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }
}

/// Endomorphism of `R_λ` as a coordinate matrix of unscaled coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockMatrix {
    n: usize,
    coeffs: Vec<u64>,
}

impl BlockMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Unscaled coefficient for the map from coordinate `t` into coordinate `s`.
    pub fn coeff(&self, s: usize, t: usize) -> u64 {
        self.coeffs[s * self.n + t]
    }

    pub fn set_coeff(&mut self, s: usize, t: usize, code: u64) {
        self.coeffs[s * self.n + t] = code;
    }
}

/// `R_λ` over a fixed ring: layout, index encoding and matrix action.
#[derive(Debug, Clone)]
pub struct Module {
    ring: Ring,
    partition: Partition,
    levels: Vec<u32>,
    blocks: Vec<Range<usize>>,
    block_of: Vec<usize>,
    radix: Vec<u64>,
    size: u128,
}

impl PartialEq for Module {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.partition == other.partition
    }
}

impl Module {
    pub fn new(ring: &Ring, partition: &Partition) -> Self {
        let levels = partition.coordinate_levels();
        let mut blocks = Vec::new();
        let mut block_of = Vec::new();
        let mut start = 0;
        for (b, &(_, r)) in partition.parts().iter().enumerate() {
            blocks.push(start..start + r as usize);
            block_of.extend(std::iter::repeat_n(b, r as usize));
            start += r as usize;
        }
        let radix: Vec<u64> = levels.iter().map(|&l| ring.size(l)).collect();
        let size = radix.iter().map(|&r| r as u128).product();
        Module { ring: ring.clone(), partition: partition.clone(), levels, blocks, block_of, radix, size }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn num_coords(&self) -> usize {
        self.levels.len()
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, coord: usize) -> usize {
        self.block_of[coord]
    }

    /// `|R_λ| = Π q^{λ_i ρ_i}`.
    pub fn size(&self) -> u128 {
        self.size
    }

    pub fn check_cap(&self, cap: u128) -> Result<()> {
        if self.size > cap {
            return Err(Error::SizeCapExceeded { size: self.size, cap });
        }
        Ok(())
    }

    pub fn zero(&self) -> ModuleElement {
        ModuleElement { coords: self.levels.iter().map(|&l| self.ring.zero(l)).collect() }
    }

    /// Element from raw coordinate codes (each reduced at its level).
    pub fn element(&self, codes: &[u64]) -> Result<ModuleElement> {
        if codes.len() != self.levels.len() {
            return Err(Error::ShapeMismatch { expected: self.levels.len(), got: codes.len() });
        }
        Ok(ModuleElement {
            coords: codes.iter().zip(&self.levels).map(|(&c, &l)| self.ring.elem(c, l)).collect(),
        })
    }

    fn check_shape(&self, e: &ModuleElement) -> Result<()> {
        let ok = e.coords.len() == self.levels.len()
            && e.coords.iter().zip(&self.levels).all(|(c, &l)| c.level() == l);
        if !ok {
            return Err(Error::ShapeMismatch { expected: self.levels.len(), got: e.coords.len() });
        }
        Ok(())
    }

    pub fn index_of_codes(&self, codes: &[u64]) -> u64 {
        let mut idx = 0u64;
        for (c, &r) in codes.iter().zip(&self.radix).rev() {
            idx = idx * r + c;
        }
        idx
    }

    pub fn codes_of_index(&self, idx: u64, out: &mut [u64]) {
        let mut idx = idx;
        for (o, &r) in out.iter_mut().zip(&self.radix) {
            *o = idx % r;
            idx /= r;
        }
    }

    pub fn index_of(&self, e: &ModuleElement) -> u64 {
        self.index_of_codes(&e.codes())
    }

    pub fn element_at(&self, idx: u64) -> ModuleElement {
        let mut codes = vec![0; self.levels.len()];
        self.codes_of_index(idx, &mut codes);
        ModuleElement {
            coords: codes.iter().zip(&self.levels).map(|(&c, &l)| self.ring.elem(c, l)).collect(),
        }
    }

    /// Every element exactly once, in index order.
    pub fn enumerate_elements(&self, cap: u128) -> Result<impl Iterator<Item = ModuleElement> + '_> {
        self.check_cap(cap)?;
        Ok((0..self.size as u64).map(move |i| self.element_at(i)))
    }

    pub fn add(&self, a: &ModuleElement, b: &ModuleElement) -> ModuleElement {
        ModuleElement {
            coords: a.coords.iter().zip(&b.coords).map(|(x, y)| self.ring.add(x, y).unwrap()).collect(),
        }
    }

    pub fn sub(&self, a: &ModuleElement, b: &ModuleElement) -> ModuleElement {
        ModuleElement {
            coords: a.coords.iter().zip(&b.coords).map(|(x, y)| self.ring.sub(x, y).unwrap()).collect(),
        }
    }

    /// Scalar multiple by the ring element with the given code.
    pub fn scale(&self, code: u64, a: &ModuleElement) -> ModuleElement {
        ModuleElement {
            coords: a
                .coords
                .iter()
                .map(|x| self.ring.elem(self.ring.mul_raw(x.level(), self.ring.reduce_raw(code, x.level()), x.code()), x.level()))
                .collect(),
        }
    }

    /// Capped valuation of one coordinate (`level` for zero).
    pub fn coord_val(&self, e: &ModuleElement, c: usize) -> u32 {
        self.ring.val_capped_raw(self.levels[c], e.coords[c].code())
    }

    /// Minimum capped valuation over the coordinates of a block.
    pub fn block_val(&self, e: &ModuleElement, block: usize) -> u32 {
        self.block_val_codes(&e.codes(), block)
    }

    pub fn block_val_codes(&self, codes: &[u64], block: usize) -> u32 {
        let level = self.partition.parts()[block].0;
        self.blocks[block]
            .clone()
            .map(|c| self.ring.val_capped_raw(level, codes[c]))
            .min()
            .unwrap_or(level)
    }

    pub fn format_element(&self, e: &ModuleElement) -> String {
        let items: Vec<String> = e
            .coords
            .iter()
            .map(|c| match self.ring.spec().model {
                Model::IntegerPadic => c.code().to_string(),
                Model::PolynomialOverPrimeField => {
                    let d: Vec<String> = self.ring.digits(c).iter().map(|r| r.0.to_string()).collect();
                    format!("[{}]", d.join(","))
                }
            })
            .collect();
        format!("({})", items.join(", "))
    }

    // ---- block matrices ----

    #[inline]
    fn shift(&self, s: usize, t: usize) -> u32 {
        self.levels[s].saturating_sub(self.levels[t])
    }

    /// Level of the unscaled coefficient `c_st`.
    pub fn coeff_level(&self, s: usize, t: usize) -> u32 {
        self.levels[s].min(self.levels[t])
    }

    pub fn zero_matrix(&self) -> BlockMatrix {
        let n = self.levels.len();
        BlockMatrix { n, coeffs: vec![0; n * n] }
    }

    pub fn identity(&self) -> BlockMatrix {
        let mut m = self.zero_matrix();
        for c in 0..m.n {
            m.coeffs[c * m.n + c] = self.ring.reduce_raw(1, self.levels[c]);
        }
        m
    }

    /// Matrix from coefficients; each entry is reduced to its coefficient level.
    pub fn matrix(&self, coeffs: Vec<u64>) -> Result<BlockMatrix> {
        let n = self.levels.len();
        if coeffs.len() != n * n {
            return Err(Error::ShapeMismatch { expected: n * n, got: coeffs.len() });
        }
        let mut m = BlockMatrix { n, coeffs };
        for s in 0..n {
            for t in 0..n {
                let l = self.coeff_level(s, t);
                m.coeffs[s * n + t] = self.ring.reduce_raw(m.coeffs[s * n + t], l);
            }
        }
        Ok(m)
    }

    pub fn apply_codes(&self, m: &BlockMatrix, x: &[u64], out: &mut [u64]) {
        let n = self.levels.len();
        for s in 0..n {
            let ls = self.levels[s];
            let mut acc = 0;
            for t in 0..n {
                let c = m.coeffs[s * n + t];
                if c == 0 || x[t] == 0 {
                    continue;
                }
                let xt = self.ring.reduce_raw(x[t], ls);
                let term = self.ring.mul_raw(ls, c, xt);
                let term = self.ring.shift_up_raw(ls, term, self.shift(s, t));
                acc = self.ring.add_raw(ls, acc, term);
            }
            out[s] = acc;
        }
    }

    pub fn apply(&self, m: &BlockMatrix, e: &ModuleElement) -> Result<ModuleElement> {
        self.check_shape(e)?;
        if m.n != self.levels.len() {
            return Err(Error::ShapeMismatch { expected: self.levels.len(), got: m.n });
        }
        let mut out = vec![0; m.n];
        self.apply_codes(m, &e.codes(), &mut out);
        self.element(&out)
    }

    /// The composite `a ∘ b` (apply `b` first).
    pub fn compose(&self, a: &BlockMatrix, b: &BlockMatrix) -> BlockMatrix {
        let n = self.levels.len();
        let top = self.levels.iter().copied().max().unwrap_or(0);
        let mut out = self.zero_matrix();
        for s in 0..n {
            for t in 0..n {
                let mut acc = 0;
                for u in 0..n {
                    let e = self.shift(s, u) + self.shift(u, t) - self.shift(s, t);
                    let prod = self.ring.mul_raw(top, a.coeffs[s * n + u], b.coeffs[u * n + t]);
                    acc = self.ring.add_raw(top, acc, self.ring.shift_up_raw(top, prod, e));
                }
                out.coeffs[s * n + t] = self.ring.reduce_raw(acc, self.coeff_level(s, t));
            }
        }
        out
    }

    /// True iff every diagonal block is invertible modulo `π`.
    pub fn is_automorphism(&self, m: &BlockMatrix) -> bool {
        let q = self.ring.q();
        self.blocks.iter().all(|range| {
            let rows: Vec<Vec<u32>> = range
                .clone()
                .map(|s| range.clone().map(|t| (m.coeffs[s * m.n + t] % q) as u32).collect())
                .collect();
            self.ring.residue_rank(&rows) == range.len()
        })
    }

    /// The action of a matrix as a table on element indices.
    pub fn permutation(&self, m: &BlockMatrix) -> Vec<u32> {
        let n = self.levels.len();
        (0..self.size as u64)
            .into_par_iter()
            .map_init(
                || (vec![0u64; n], vec![0u64; n]),
                |(x, y), i| {
                    self.codes_of_index(i, x);
                    self.apply_codes(m, x, y);
                    self.index_of_codes(y) as u32
                },
            )
            .collect()
    }

    /// Generators of `G_λ`: unit scalings of each coordinate by a generating
    /// set of `(R/π^{λ_c})^*`, and for every ordered pair of distinct
    /// coordinates the transvection adding `π^{max(0, λ_s - λ_t)} x_t` to `x_s`.
    pub fn aut_generators(&self) -> Vec<BlockMatrix> {
        let n = self.levels.len();
        let mut gens = Vec::new();
        for c in 0..n {
            for u in unit_group_generators(&self.ring, self.levels[c]) {
                let mut m = self.identity();
                m.coeffs[c * n + c] = u;
                gens.push(m);
            }
        }
        for s in 0..n {
            for t in 0..n {
                if s != t {
                    let mut m = self.identity();
                    m.coeffs[s * n + t] = 1;
                    gens.push(m);
                }
            }
        }
        gens
    }

    pub fn generator_permutations(&self) -> Vec<Vec<u32>> {
        self.aut_generators().iter().map(|g| self.permutation(g)).collect()
    }

    /// Closed-form `|G_λ|` for the automorphism group of a finite module over
    /// a DVR with residue field of order `q`.
    pub fn aut_order(&self) -> BigUint {
        let q = BigUint::from(self.ring.q());
        let mut e: Vec<u32> = self.levels.clone();
        e.sort_unstable();
        let n = e.len();
        let mut order = BigUint::from(1u32);
        for k in 0..n {
            let d = (0..n).rev().find(|&l| e[l] == e[k]).unwrap() + 1;
            let c = (0..n).find(|&l| e[l] == e[k]).unwrap() + 1;
            order *= q.pow(d as u32) - q.pow(k as u32);
            order *= q.pow(e[k] * (n - d) as u32);
            order *= q.pow((e[k] - 1) * (n - c + 1) as u32);
        }
        order
    }

    /// Deterministic random automorphism: coefficients drawn uniformly,
    /// diagonal blocks resampled until invertible modulo `π`.
    pub fn random_automorphism(&self, seed: u64) -> BlockMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.levels.len();
        let mut m = self.zero_matrix();
        for s in 0..n {
            for t in 0..n {
                if self.block_of[s] != self.block_of[t] {
                    m.coeffs[s * n + t] = rng.gen_range(0..self.ring.size(self.coeff_level(s, t)));
                }
            }
        }
        for range in &self.blocks {
            loop {
                for s in range.clone() {
                    for t in range.clone() {
                        m.coeffs[s * n + t] = rng.gen_range(0..self.ring.size(self.coeff_level(s, t)));
                    }
                }
                let q = self.ring.q();
                let rows: Vec<Vec<u32>> = range
                    .clone()
                    .map(|s| range.clone().map(|t| (m.coeffs[s * n + t] % q) as u32).collect())
                    .collect();
                if self.ring.residue_rank(&rows) == range.len() {
                    break;
                }
            }
        }
        m
    }

    /// `|End(R_λ)| = Π_{s,t} q^{min(λ_s, λ_t)}`.
    pub fn endomorphism_count(&self) -> u128 {
        let n = self.levels.len();
        (0..n)
            .flat_map(|s| (0..n).map(move |t| (s, t)))
            .map(|(s, t)| self.ring.size(self.coeff_level(s, t)) as u128)
            .product()
    }

    /// The endomorphism with the given mixed-radix index over its coefficients.
    pub fn endomorphism_at(&self, idx: u128) -> BlockMatrix {
        let n = self.levels.len();
        let mut m = self.zero_matrix();
        let mut idx = idx;
        for s in 0..n {
            for t in 0..n {
                let r = self.ring.size(self.coeff_level(s, t)) as u128;
                m.coeffs[s * n + t] = (idx % r) as u64;
                idx /= r;
            }
        }
        m
    }

    /// Every endomorphism of `R_λ` (exponential; oracle use only).
    pub fn all_endomorphisms(&self, cap: u128) -> Result<impl Iterator<Item = BlockMatrix> + '_> {
        let count = self.endomorphism_count();
        if count > cap {
            return Err(Error::SizeCapExceeded { size: count, cap });
        }
        Ok((0..count).map(move |i| self.endomorphism_at(i)))
    }
}

/// A small generating set of `(R/π^level)^*`, chosen greedily by code.
pub fn unit_group_generators(ring: &Ring, level: u32) -> Vec<u64> {
    let mut group: HashSet<u64> = HashSet::from([ring.reduce_raw(1, level)]);
    let mut gens = Vec::new();
    for u in ring.units(level) {
        if group.contains(&u.code()) {
            continue;
        }
        gens.push(u.code());
        let mut frontier: Vec<u64> = group.iter().copied().collect();
        while let Some(x) = frontier.pop() {
            for &g in &gens {
                let y = ring.mul_raw(level, x, g);
                if group.insert(y) {
                    frontier.push(y);
                }
            }
        }
    }
    gens
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dvr::RingSpec;
    use proptest::prelude::*;

    fn module(ring: &str, part: &str) -> Module {
        Module::new(&Ring::new(ring.parse::<RingSpec>().unwrap()), &part.parse().unwrap())
    }

    /// Orbit-closure of the identity under the generators, as permutations.
    fn generated_group_order(m: &Module) -> usize {
        let gens = m.generator_permutations();
        let id: Vec<u32> = (0..m.size() as u32).collect();
        let mut seen: HashSet<Vec<u32>> = HashSet::from([id.clone()]);
        let mut frontier = vec![id];
        while let Some(p) = frontier.pop() {
            for g in &gens {
                let next: Vec<u32> = p.iter().map(|&i| g[i as usize]).collect();
                if seen.insert(next.clone()) {
                    frontier.push(next);
                }
            }
        }
        seen.len()
    }

    /// Bijective endomorphisms counted by brute force.
    fn bijective_endomorphisms(m: &Module) -> usize {
        m.all_endomorphisms(1 << 20)
            .unwrap()
            .filter(|e| {
                let p = m.permutation(e);
                let mut hit = vec![false; p.len()];
                p.iter().all(|&i| !std::mem::replace(&mut hit[i as usize], true))
            })
            .count()
    }

    #[test]
    fn partition_parsing() {
        let p: Partition = "2^2,1".parse().unwrap();
        assert_eq!(p.parts(), &[(2, 2), (1, 1)]);
        assert_eq!(p.to_string(), "2^2,1");
        assert!("1,2".parse::<Partition>().is_err());
        assert!("2,2".parse::<Partition>().is_err());
        assert!("".parse::<Partition>().unwrap().is_empty());
        assert_eq!(Partition::from_lengths(&[1, 2, 2]).unwrap(), p);
    }

    #[test]
    fn element_counts() {
        assert_eq!(module("zp:3", "1").enumerate_elements(1000).unwrap().count(), 3);
        assert_eq!(module("zp:3", "2,1").enumerate_elements(1000).unwrap().count(), 27);
        assert_eq!(module("zp:3", "2^2,1").enumerate_elements(1000).unwrap().count(), 243);
        assert!(matches!(
            module("zp:3", "2^2,1").enumerate_elements(100).err(),
            Some(Error::SizeCapExceeded { .. })
        ));
    }

    #[test]
    fn index_bijection() {
        let m = module("fqt:2^2", "2,1");
        for (i, e) in m.enumerate_elements(1 << 20).unwrap().enumerate() {
            assert_eq!(m.index_of(&e), i as u64);
        }
    }

    #[test]
    fn apply_examples() {
        let m = module("zp:3", "2,1");
        let e = m.element(&[1, 1]).unwrap();
        assert_eq!(m.apply(&m.identity(), &e).unwrap(), e);
        // A12 = [1] (scaled by π), A21 = [1], identity diagonal
        let g = m.matrix(vec![1, 1, 1, 1]).unwrap();
        assert_eq!(m.apply(&g, &e).unwrap().codes(), vec![4, 2]);
        let bad = module("zp:3", "2").element(&[1]).unwrap();
        assert!(matches!(m.apply(&g, &bad), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn automorphism_examples() {
        let m = module("zp:3", "2,1");
        assert!(m.is_automorphism(&m.identity()));
        let g = m.matrix(vec![3, 0, 0, 1]).unwrap();
        assert!(!m.is_automorphism(&g));
    }

    #[test]
    fn is_automorphism_matches_bijectivity() {
        for (ring, part) in [("zp:3", "2,1"), ("zp:3", "1^2"), ("zp:2", "2,1"), ("fqt:2^2", "1^2")] {
            let m = module(ring, part);
            for e in m.all_endomorphisms(1 << 16).unwrap() {
                let p = m.permutation(&e);
                let distinct: HashSet<u32> = p.iter().copied().collect();
                assert_eq!(m.is_automorphism(&e), distinct.len() == p.len(), "{ring} {part}");
            }
        }
    }

    #[test]
    fn generator_examples() {
        let m = module("zp:3", "1");
        assert_eq!(m.aut_generators().len(), 1);
        assert_eq!(generated_group_order(&m), 2);
        assert_eq!(generated_group_order(&module("zp:3", "2,1")), 108);
        assert_eq!(generated_group_order(&module("zp:3", "1^2")), 48);
    }

    #[test]
    fn aut_order_examples() {
        for ring in ["zp:3", "zp:5", "fqt:2^2"] {
            let q = ring.parse::<RingSpec>().unwrap().q();
            for n in 1..=4 {
                let expect = q.pow(n - 1) * (q - 1);
                assert_eq!(module(ring, &n.to_string()).aut_order(), BigUint::from(expect));
            }
        }
        assert_eq!(module("zp:3", "2,1").aut_order(), BigUint::from(108u32));
        assert_eq!(module("zp:3", "1^2").aut_order(), BigUint::from(48u32));
    }

    #[test]
    fn aut_order_matches_brute_force() {
        // bijective endomorphisms, then the generated group, for every |End| <= 3^8
        for (ring, part) in [("zp:3", "2,1"), ("zp:3", "1^2"), ("zp:2", "3,1"), ("zp:2", "2,1^2"), ("zp:3", "3,1"), ("fqt:2^2", "1^2"), ("zp:5", "2,1")] {
            let m = module(ring, part);
            if m.endomorphism_count() > 3u128.pow(8) {
                continue;
            }
            let order: usize = m.aut_order().try_into().unwrap();
            assert_eq!(bijective_endomorphisms(&m), order, "{ring} {part}");
            assert_eq!(generated_group_order(&m), order, "{ring} {part}");
        }
    }

    #[test]
    fn generators_are_bijections() {
        for (ring, part) in [("zp:3", "2^2,1"), ("fqt:2^2", "2,1"), ("zp:5", "3,1")] {
            let m = module(ring, part);
            for p in m.generator_permutations() {
                let distinct: HashSet<u32> = p.iter().copied().collect();
                assert_eq!(distinct.len(), p.len());
            }
        }
    }

    #[test]
    fn random_automorphisms() {
        let m = module("zp:3", "2^2,1");
        assert_eq!(m.random_automorphism(7), m.random_automorphism(7));
        for seed in 0..50 {
            assert!(m.is_automorphism(&m.random_automorphism(seed)));
        }
    }

    #[test]
    fn random_orbit_inside_bfs_orbit() {
        let m = module("zp:3", "2,1");
        let gens = m.generator_permutations();
        let start = m.index_of(&m.element(&[3, 1]).unwrap()) as u32;
        let mut bfs: HashSet<u32> = HashSet::from([start]);
        let mut frontier = vec![start];
        while let Some(x) = frontier.pop() {
            for g in &gens {
                if bfs.insert(g[x as usize]) {
                    frontier.push(g[x as usize]);
                }
            }
        }
        let e = m.element_at(start as u64);
        for seed in 0..10_000 {
            let g = m.random_automorphism(seed);
            let img = m.apply(&g, &e).unwrap();
            assert!(bfs.contains(&(m.index_of(&img) as u32)));
        }
    }

    fn matrix_strategy(m: &Module) -> impl Strategy<Value = BlockMatrix> {
        let n = m.num_coords();
        let m2 = m.clone();
        proptest::collection::vec(any::<u64>(), n * n).prop_map(move |c| m2.matrix(c).unwrap())
    }

    proptest! {
        #[test]
        fn composition_and_additivity(
            (a, b, x, y) in {
                let m = module("zp:3", "3,2^2,1");
                (matrix_strategy(&m), matrix_strategy(&m), proptest::collection::vec(any::<u64>(), 4), proptest::collection::vec(any::<u64>(), 4))
            }
        ) {
            let m = module("zp:3", "3,2^2,1");
            let x = m.element(&x).unwrap();
            let y = m.element(&y).unwrap();
            let ab = m.compose(&a, &b);
            prop_assert_eq!(m.apply(&ab, &x).unwrap(), m.apply(&a, &m.apply(&b, &x).unwrap()).unwrap());
            let lhs = m.apply(&a, &m.add(&x, &y)).unwrap();
            let rhs = m.add(&m.apply(&a, &x).unwrap(), &m.apply(&a, &y).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn composition_polynomial_model(
            (a, b, x) in {
                let m = module("fqt:2^2", "3,1^2");
                (matrix_strategy(&m), matrix_strategy(&m), proptest::collection::vec(any::<u64>(), 3))
            }
        ) {
            let m = module("fqt:2^2", "3,1^2");
            let x = m.element(&x).unwrap();
            let ab = m.compose(&a, &b);
            prop_assert_eq!(m.apply(&ab, &x).unwrap(), m.apply(&a, &m.apply(&b, &x).unwrap()).unwrap());
        }
    }
}
