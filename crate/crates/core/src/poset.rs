//! The poset `P = {(v, l) : 0 ≤ v < l}` and its order ideals restricted to
//! the columns of a partition.
//!
//! Within one column the order is a chain (`(v, l) ≤ (v', l)` iff `v ≥ v'`),
//! so an ideal is determined by its boundary: the least `v` it contains in
//! each column, or `l` when the column is empty. [`OrderIdeal`] stores that
//! vector together with the derived maximal antichain.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmodule::{Module, ModuleElement, Partition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PosetPoint {
    pub v: u32,
    pub l: u32,
}

impl PosetPoint {
    pub fn new(v: u32, l: u32) -> Result<Self> {
        if v >= l {
            return Err(Error::Parse(format!("({v},{l}) is not a point of the poset: need v < l")));
        }
        Ok(PosetPoint { v, l })
    }
}

impl fmt::Display for PosetPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.v, self.l)
    }
}

/// `a ≤ b` iff `v ≥ v'` and `l - v ≤ l' - v'`.
pub fn poset_leq(a: PosetPoint, b: PosetPoint) -> bool {
    a.v >= b.v && (a.l as i64 - a.v as i64) <= (b.l as i64 - b.v as i64)
}

/// Least `v` with `(v, l)` below some generator, or `l` if there is none.
fn column_boundary(l: u32, gens: &[PosetPoint]) -> u32 {
    gens.iter()
        .map(|g| g.v.max((l + g.v).saturating_sub(g.l)))
        .filter(|&v| v < l)
        .min()
        .unwrap_or(l)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderIdeal {
    partition: Partition,
    boundary: Vec<u32>,
    max: Vec<PosetPoint>,
}

impl OrderIdeal {
    fn from_boundary_unchecked(partition: &Partition, boundary: Vec<u32>) -> Self {
        let lengths = partition.lengths();
        let present: Vec<PosetPoint> = lengths
            .iter()
            .zip(&boundary)
            .filter(|(l, b)| b < l)
            .map(|(&l, &v)| PosetPoint { v, l })
            .collect();
        let max = present
            .iter()
            .copied()
            .filter(|&a| !present.iter().any(|&b| b != a && poset_leq(a, b)))
            .collect();
        OrderIdeal { partition: partition.clone(), boundary, max }
    }

    /// The downward closure of `points`, intersected with the columns of `λ`.
    pub fn from_generators(points: &[PosetPoint], partition: &Partition) -> Self {
        let boundary = partition.lengths().iter().map(|&l| column_boundary(l, points)).collect();
        Self::from_boundary_unchecked(partition, boundary)
    }

    /// The ideal with the given per-block boundary, if that vector is the
    /// boundary of some ideal.
    pub fn from_boundary(partition: &Partition, boundary: &[u32]) -> Option<Self> {
        let lengths = partition.lengths();
        if boundary.len() != lengths.len() || boundary.iter().zip(&lengths).any(|(b, l)| b > l) {
            return None;
        }
        let gens: Vec<PosetPoint> = lengths
            .iter()
            .zip(boundary)
            .filter(|(l, b)| b < l)
            .map(|(&l, &v)| PosetPoint { v, l })
            .collect();
        let ideal = Self::from_generators(&gens, partition);
        (ideal.boundary == boundary).then_some(ideal)
    }

    pub fn empty(partition: &Partition) -> Self {
        Self::from_generators(&[], partition)
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// Maximal elements, ordered by decreasing column.
    pub fn max_antichain(&self) -> &[PosetPoint] {
        &self.max
    }

    /// `∂_{λ_i} I` for every block `i` of the partition.
    pub fn boundary(&self) -> &[u32] {
        &self.boundary
    }

    /// `∂_l I` for an arbitrary column `l`, from the maximal antichain.
    pub fn boundary_at(&self, l: u32) -> u32 {
        column_boundary(l, &self.max)
    }

    /// Whether `(∂_{λ_i} I, λ_i)` is a maximal element of `I`.
    pub fn is_max_block(&self, block: usize) -> bool {
        let l = self.partition.parts()[block].0;
        self.max.iter().any(|m| m.l == l)
    }

    pub fn is_empty(&self) -> bool {
        self.max.is_empty()
    }

    pub fn contains(&self, point: PosetPoint) -> bool {
        self.max.iter().any(|&m| poset_leq(point, m))
    }

    /// All points of `I` (within the columns of `λ`).
    pub fn points(&self) -> Vec<PosetPoint> {
        self.partition
            .lengths()
            .iter()
            .zip(&self.boundary)
            .flat_map(|(&l, &b)| (b..l).map(move |v| PosetPoint { v, l }))
            .collect()
    }

    pub fn is_subset(&self, other: &OrderIdeal) -> bool {
        self.partition == other.partition && self.boundary.iter().zip(&other.boundary).all(|(a, b)| a >= b)
    }

    fn combine(&self, other: &OrderIdeal, f: impl Fn(u32, u32) -> u32) -> Result<OrderIdeal> {
        if self.partition != other.partition {
            return Err(Error::PartitionMismatch);
        }
        let b = self.boundary.iter().zip(&other.boundary).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_boundary_unchecked(&self.partition, b))
    }

    pub fn union(&self, other: &OrderIdeal) -> Result<OrderIdeal> {
        self.combine(other, u32::min)
    }

    pub fn intersection(&self, other: &OrderIdeal) -> Result<OrderIdeal> {
        self.combine(other, u32::max)
    }

    /// Parses `max={(1,4),(0,1)}` (the `max=` prefix is optional).
    pub fn parse(s: &str, partition: &Partition) -> Result<Self> {
        let body = s.trim();
        let body = body.strip_prefix("max=").unwrap_or(body).trim();
        let body = body
            .strip_prefix('{')
            .and_then(|b| b.strip_suffix('}'))
            .ok_or_else(|| Error::Parse(format!("ideal literal must be braced: `{s}`")))?;
        let mut points = Vec::new();
        let mut rest = body.trim();
        while !rest.is_empty() {
            let inner_start = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::Parse(format!("expected `(` in `{s}`")))?;
            let (pair, tail) = inner_start
                .split_once(')')
                .ok_or_else(|| Error::Parse(format!("unclosed point in `{s}`")))?;
            let (v, l) = pair
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("point needs two entries: `({pair})`")))?;
            let num = |x: &str| x.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad number `{x}`")));
            let point = PosetPoint::new(num(v)?, num(l)?)?;
            if partition.block_of_length(point.l).is_none() {
                return Err(Error::NoMatchingColumn(point.l));
            }
            points.push(point);
            rest = tail.trim_start().trim_start_matches(',').trim_start();
        }
        Ok(Self::from_generators(&points, partition))
    }
}

impl fmt::Display for OrderIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.max.iter().map(|p| p.to_string()).collect();
        write!(f, "max={{{}}}", items.join(","))
    }
}

/// Every order ideal of `P_λ`, each once, in lexicographic order of boundary.
pub fn enumerate_ideals(partition: &Partition) -> Vec<OrderIdeal> {
    let lengths = partition.lengths();
    let mut out = Vec::new();
    let mut b = vec![0u32; lengths.len()];
    loop {
        if let Some(ideal) = OrderIdeal::from_boundary(partition, &b) {
            out.push(ideal);
        }
        let mut i = 0;
        loop {
            if i == b.len() {
                return out;
            }
            if b[i] < lengths[i] {
                b[i] += 1;
                break;
            }
            b[i] = 0;
            i += 1;
        }
    }
}

/// `I(e)`: generated by `(min_t val(e_{λ_i,t}), λ_i)` over the nonzero blocks.
pub fn ideal_of_element(module: &Module, e: &ModuleElement) -> OrderIdeal {
    ideal_of_codes(module, &e.codes())
}

pub fn ideal_of_codes(module: &Module, codes: &[u64]) -> OrderIdeal {
    let partition = module.partition();
    let gens: Vec<PosetPoint> = partition
        .lengths()
        .iter()
        .enumerate()
        .map(|(b, &l)| PosetPoint { v: module.block_val_codes(codes, b), l })
        .filter(|p| p.v < p.l)
        .collect();
    OrderIdeal::from_generators(&gens, partition)
}
