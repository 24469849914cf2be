//! Orbits of `G_λ` on pairs `O × O` for a single orbit `O = R_λ^{I*}`.
//!
//! Pair orbits containing `e(I)` in the first slot correspond to orbits of
//! the stabilizer `G_λ^I` on `O`. For a general pair `(a, b)` we build an
//! automorphism `h_a` with `h_a(e(I)) = a` and classify `(a, b)` by the
//! stabilizer orbit of `h_a^{-1}(b)`. Stabilizer orbits are described by the
//! splitting `R_λ = R_λ' ⊕ R_λ''`, where `λ'` holds the first coordinate of
//! every block carrying a maximal element of `I`:
//!
//! * `l' ∈ m' + R_λ'^{J ∪ K}` and
//! * `l'' ∈ R_λ''^{K*} + R_λ''^{J}`,
//!
//! with `J = I(m̄')` (the ideal of `m'` modulo the submodule generated by
//! `e(I)'`) and `K = I(m'')`.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::orbits::{canonical_form, orbit_contains_codes, orbit_elements, OrbitPartition};
use crate::pmodule::{BlockMatrix, Module, Partition};
use crate::poset::{poset_leq, OrderIdeal, PosetPoint};

/// The splitting `R_λ = R_λ' ⊕ R_λ''` attached to an ideal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    /// Maximal elements of the ideal, by decreasing column.
    pub max_points: Vec<PosetPoint>,
    pub prime: Partition,
    pub second: Partition,
    /// Coordinate of `R_λ` holding each coordinate of `R_λ'`.
    pub prime_coords: Vec<usize>,
    /// Block of `λ` that each `λ'` coordinate comes from.
    pub prime_blocks: Vec<usize>,
    /// Blocks of `λ''`: originating block of `λ`, and its coordinates in `R_λ`.
    pub second_blocks: Vec<(usize, Vec<usize>)>,
}

impl Decomposition {
    /// Coordinate permutation: `R_λ'` coordinates first, then `R_λ''`.
    pub fn coordinate_order(&self) -> Vec<usize> {
        let mut order = self.prime_coords.clone();
        order.extend(self.second_blocks.iter().flat_map(|(_, c)| c.iter().copied()));
        order
    }
}

pub fn decompose(partition: &Partition, ideal: &OrderIdeal) -> Decomposition {
    let mut starts = Vec::new();
    let mut pos = 0;
    for &(_, r) in partition.parts() {
        starts.push(pos);
        pos += r as usize;
    }
    let max_points = ideal.max_antichain().to_vec();
    let prime_blocks: Vec<usize> =
        max_points.iter().map(|p| partition.block_of_length(p.l).expect("ideal lies over λ")).collect();
    let prime_coords: Vec<usize> = prime_blocks.iter().map(|&b| starts[b]).collect();
    let mut second_blocks = Vec::new();
    for (b, &(_, r)) in partition.parts().iter().enumerate() {
        let coords: Vec<usize> =
            (starts[b]..starts[b] + r as usize).filter(|c| !prime_coords.contains(c)).collect();
        if !coords.is_empty() {
            second_blocks.push((b, coords));
        }
    }
    let prime = Partition::new(max_points.iter().map(|p| (p.l, 1)).collect()).expect("antichain columns are distinct");
    let second = Partition::new(
        second_blocks.iter().map(|(b, c)| (partition.parts()[*b].0, c.len() as u32)).collect(),
    )
    .expect("sub-partition of λ");
    Decomposition { max_points, prime, second, prime_coords, prime_blocks, second_blocks }
}

/// Data determining the stabilizer orbit of `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabOrbitParams {
    /// `m'` as codes, one per maximal element.
    pub m_prime: Vec<u64>,
    /// `J = I(m̄')`.
    pub j: OrderIdeal,
    /// `K = I(m'')`.
    pub k: OrderIdeal,
}

/// `I(m̄')`, computed column by column: for every part `l_i` of `λ`, the least
/// valuation of `ψ(m')` over maps `ψ: R_λ' → R/π^{l_i}` vanishing on `e(I)'`.
fn quotient_ideal(module: &Module, dec: &Decomposition, m_prime: &[u64]) -> OrderIdeal {
    let ring = module.ring();
    let pts = &dec.max_points;
    let mut gens = Vec::new();
    if pts.is_empty() {
        return OrderIdeal::empty(module.partition());
    }
    for li in module.partition().lengths() {
        let shift = |lj: u32| li.saturating_sub(lj);
        let vu: Vec<u32> = pts.iter().map(|p| (shift(p.l) + p.v).min(li)).collect();
        let w: Vec<u64> = pts
            .iter()
            .zip(m_prime)
            .map(|(p, &m)| ring.shift_up_raw(li, ring.reduce_raw(m, li), shift(p.l)))
            .collect();
        let mu = *vu.iter().min().unwrap();
        let boundary = if mu == li {
            w.iter().map(|&x| ring.val_capped_raw(li, x)).min().unwrap()
        } else {
            let j0 = vu.iter().position(|&x| x == mu).unwrap();
            let mut best = ring.val_capped_raw(li, ring.shift_up_raw(li, w[j0], li - mu));
            for j in (0..pts.len()).filter(|&j| j != j0) {
                let g = ring.sub_raw(li, w[j], ring.shift_up_raw(li, w[j0], vu[j] - mu));
                best = best.min(ring.val_capped_raw(li, g));
            }
            best
        };
        if boundary < li {
            gens.push(PosetPoint { v: boundary, l: li });
        }
    }
    OrderIdeal::from_generators(&gens, module.partition())
}

pub fn stab_orbit_params(module: &Module, dec: &Decomposition, m: &[u64]) -> StabOrbitParams {
    let ring = module.ring();
    let m_prime: Vec<u64> = dec.prime_coords.iter().map(|&c| m[c]).collect();
    let j = quotient_ideal(module, dec, &m_prime);
    let k_gens: Vec<PosetPoint> = dec
        .second_blocks
        .iter()
        .map(|(b, coords)| {
            let l = module.partition().parts()[*b].0;
            PosetPoint { v: coords.iter().map(|&c| ring.val_capped_raw(l, m[c])).min().unwrap(), l }
        })
        .filter(|p| p.v < p.l)
        .collect();
    let k = OrderIdeal::from_generators(&k_gens, module.partition());
    StabOrbitParams { m_prime, j, k }
}

/// Per `λ''` block: least allowed valuation, and whether it must be attained.
fn second_bounds(module: &Module, dec: &Decomposition, params: &StabOrbitParams) -> Vec<(u32, bool)> {
    dec.second_blocks
        .iter()
        .map(|(b, _)| {
            let l = module.partition().parts()[*b].0;
            let dk = params.k.boundary_at(l);
            let dj = params.j.boundary_at(l);
            let k_max = dk < l && params.k.max_antichain().contains(&PosetPoint { v: dk, l });
            (dk.min(dj), dj > dk && k_max)
        })
        .collect()
}

/// `∂_{l_j}(J ∪ K)` for each `λ'` coordinate.
fn prime_bounds(dec: &Decomposition, params: &StabOrbitParams) -> Vec<u32> {
    dec.max_points.iter().map(|p| params.j.boundary_at(p.l).min(params.k.boundary_at(p.l))).collect()
}

/// Whether `l` lies in the orbit of `m` under the stabilizer of `e(I)`.
pub fn stabilizer_orbit_contains(module: &Module, ideal: &OrderIdeal, m: &[u64], l: &[u64]) -> bool {
    let dec = decompose(module.partition(), ideal);
    stabilizer_orbit_contains_with(module, &dec, m, l)
}

fn stabilizer_orbit_contains_with(module: &Module, dec: &Decomposition, m: &[u64], l: &[u64]) -> bool {
    let ring = module.ring();
    let params = stab_orbit_params(module, dec, m);
    let first = dec.prime_coords.iter().zip(&dec.max_points).zip(prime_bounds(dec, &params)).all(|((&c, p), beta)| {
        ring.val_capped_raw(p.l, ring.sub_raw(p.l, l[c], m[c])) >= beta
    });
    first
        && dec.second_blocks.iter().zip(second_bounds(module, dec, &params)).all(|((b, coords), (bound, exact))| {
            let lvl = module.partition().parts()[*b].0;
            let v = coords.iter().map(|&c| ring.val_capped_raw(lvl, l[c])).min().unwrap();
            if exact {
                v == bound
            } else {
                v >= bound
            }
        })
}

/// Canonical key of a stabilizer orbit: the residues of `m'` modulo
/// `π^{∂(J ∪ K)}` and the `λ''` valuation constraints.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct StabKey {
    pub prime: Vec<(u32, u64)>,
    pub second: Vec<(u32, bool)>,
}

pub fn stab_key(module: &Module, dec: &Decomposition, m: &[u64]) -> StabKey {
    let ring = module.ring();
    let params = stab_orbit_params(module, dec, m);
    let prime = prime_bounds(dec, &params)
        .into_iter()
        .zip(&params.m_prime)
        .map(|(beta, &x)| (beta, ring.reduce_raw(x, beta)))
        .collect();
    StabKey { prime, second: second_bounds(module, dec, &params) }
}

/// An automorphism `h` with `h(e(I)) = a`, for `a ∈ R_λ^{I*}`.
pub fn transporter(module: &Module, dec: &Decomposition, a: &[u64]) -> BlockMatrix {
    let ring = module.ring();
    let levels = module.levels();
    let mut h = module.zero_matrix();
    let mut block_owner: HashMap<usize, usize> = HashMap::new();
    for (j, &b) in dec.prime_blocks.iter().enumerate() {
        block_owner.insert(b, j);
    }
    for (b, range) in module.blocks().iter().enumerate() {
        if !block_owner.contains_key(&b) {
            for c in range.clone() {
                h.set_coeff(c, c, 1);
            }
        }
    }
    for s in 0..module.num_coords() {
        let ls = levels[s];
        let v = ring.val_capped_raw(ls, a[s]);
        if v == ls {
            continue;
        }
        let j = match block_owner.get(&module.block_of(s)) {
            Some(&j) => j,
            None => dec
                .max_points
                .iter()
                .position(|&p| poset_leq(PosetPoint { v, l: ls }, p))
                .expect("element lies in the orbit"),
        };
        let p = dec.max_points[j];
        let coeff = ring.shift_down_raw(a[s], p.v + ls.saturating_sub(p.l));
        h.set_coeff(s, dec.prime_coords[j], ring.reduce_raw(coeff, ls.min(p.l)));
    }
    for (j, &b) in dec.prime_blocks.iter().enumerate() {
        let range = module.blocks()[b].clone();
        let cj = dec.prime_coords[j];
        let t = range
            .clone()
            .find(|&c| ring.val_capped_raw(levels[c], a[c]) == dec.max_points[j].v)
            .expect("maximal block attains its boundary");
        let cols = range.clone().filter(|&c| c != cj);
        let rows = range.clone().filter(|&c| c != t);
        for (col, row) in cols.zip(rows) {
            h.set_coeff(row, col, 1);
        }
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CaseLabel {
    A,
    B,
    #[serde(rename = "i")]
    I,
    #[serde(rename = "ii")]
    II,
    #[serde(rename = "iii")]
    III,
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseLabel::A => "A",
            CaseLabel::B => "B",
            CaseLabel::I => "i",
            CaseLabel::II => "ii",
            CaseLabel::III => "iii",
        };
        f.write_str(s)
    }
}

/// Per-block parameters of a pair orbit in the component-wise description.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ComponentDescriptor {
    pub block: usize,
    pub length: u32,
    pub multiplicity: u32,
    pub is_max: bool,
    /// `∂_{λ_i} I`.
    pub s: u32,
    /// Valuation of the `λ''` part of the characteristic element, if any.
    pub r: Option<u32>,
    /// Threshold `m_i`; `None` when every term of the minimum is absent.
    pub m: Option<u32>,
    /// The unit `y` of a maximal block (code, precision); for other blocks the
    /// maximal block whose unit is used as reference.
    pub y: Option<(u64, u32)>,
    pub reference: Option<usize>,
    pub case: CaseLabel,
}

/// Pair-orbit descriptor. Equality and hashing use only the canonical key.
#[derive(Debug, Clone, Serialize)]
pub struct PairDescriptor {
    pub key: StabKey,
    pub components: Vec<ComponentDescriptor>,
}

impl PartialEq for PairDescriptor {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for PairDescriptor {}

impl std::hash::Hash for PairDescriptor {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.key.hash(state)
    }
}

/// The characteristic representative `f = m̃' ⊕ x` of the stabilizer orbit
/// of `m`: `m̃'_j = π^{s_j} y_j` and `x` has `π^{r}` in the first coordinate of
/// each `λ''` block.
pub fn characteristic_pair_element(module: &Module, dec: &Decomposition, m: &[u64]) -> Vec<u64> {
    let ring = module.ring();
    let key = stab_key(module, dec, m);
    let mut f = vec![0u64; module.num_coords()];
    for ((&c, p), &(beta, _)) in dec.prime_coords.iter().zip(&dec.max_points).zip(&key.prime) {
        f[c] = if ring.val_capped_raw(p.l, m[c]) == p.v || beta > p.v {
            m[c]
        } else {
            ring.pi_pow(p.v, p.l).code()
        };
    }
    for ((b, coords), &(bound, _)) in dec.second_blocks.iter().zip(&key.second) {
        let l = module.partition().parts()[*b].0;
        f[coords[0]] = ring.pi_pow(bound, l).code();
    }
    f
}

fn component_descriptors(module: &Module, dec: &Decomposition, ideal: &OrderIdeal, m: &[u64]) -> Vec<ComponentDescriptor> {
    let ring = module.ring();
    let parts = module.partition().parts();
    let key = stab_key(module, dec, m);
    let f = characteristic_pair_element(module, dec, m);
    let k = parts.len();
    let s: Vec<u32> = ideal.boundary().to_vec();
    let is_max: Vec<bool> = (0..k).map(|b| dec.prime_blocks.contains(&b)).collect();
    let mut r: Vec<Option<u32>> = vec![None; k];
    for ((b, _), &(bound, _)) in dec.second_blocks.iter().zip(&key.second) {
        r[*b] = Some(bound);
    }
    // y_j = m̃'_j / π^{s_j}, known modulo π^{∂(J∪K) - s_j}
    let mut y: Vec<Option<(u64, u32)>> = vec![None; k];
    for (j, &b) in dec.prime_blocks.iter().enumerate() {
        let p = dec.max_points[j];
        let prec = key.prime[j].0.saturating_sub(p.v);
        let unit = ring.shift_down_raw(f[dec.prime_coords[j]], p.v);
        y[b] = Some((ring.reduce_raw(unit, prec), prec));
    }
    let lam = |b: usize| parts[b].0;
    let rho = |b: usize| parts[b].1;
    let diff_val = |a: (u64, u32), b: (u64, u32)| {
        let lvl = a.1.min(b.1);
        ring.val_capped_raw(lvl, ring.sub_raw(lvl, ring.reduce_raw(a.0, lvl), ring.reduce_raw(b.0, lvl)))
    };
    let threshold = |i: usize, reference: usize| -> Option<u32> {
        let yref = y[reference]?;
        let mut terms = Vec::new();
        for j in (0..k).filter(|&j| j != i) {
            let lift = if j < i { 0 } else { lam(i) - lam(j) };
            if let Some(yj) = y[j] {
                terms.push(lift + s[j] + diff_val(yj, yref));
            }
            if let Some(rj) = r[j] {
                if !is_max[j] || rho(j) > 1 {
                    terms.push(lift + rj);
                }
            }
        }
        terms.into_iter().min()
    };
    (0..k)
        .map(|i| {
            let (reference, m_i, case) = if is_max[i] {
                let m_i = threshold(i, i);
                let case = match (rho(i), m_i, r[i]) {
                    (1, _, _) => CaseLabel::A,
                    (_, Some(mv), Some(rv)) if mv <= rv => CaseLabel::A,
                    (_, Some(_), None) => CaseLabel::A,
                    _ => CaseLabel::B,
                };
                (None, m_i, case)
            } else {
                let left = (0..i).rev().find(|&j| is_max[j]);
                let right = (i + 1..k).find(|&j| is_max[j]);
                let attains_left = left.is_some_and(|j| s[j] == s[i]);
                let reference = if attains_left { left } else { right };
                let m_i = reference.and_then(|rf| threshold(i, rf));
                let ri = r[i].expect("non-maximal blocks lie in λ''");
                let case = match m_i {
                    Some(mv) if ri >= mv && mv > s[i] => CaseLabel::I,
                    Some(mv) if mv > ri => CaseLabel::II,
                    None => CaseLabel::II,
                    _ => CaseLabel::III,
                };
                (reference, m_i, case)
            };
            ComponentDescriptor {
                block: i,
                length: lam(i),
                multiplicity: rho(i),
                is_max: is_max[i],
                s: s[i],
                r: r[i],
                m: m_i,
                y: if is_max[i] { y[i] } else { reference.and_then(|rf| y[rf]) },
                reference,
                case,
            }
        })
        .collect()
}

/// Descriptor of the pair orbit through `(e(I), x)`.
pub fn descriptor_of_stab_orbit(module: &Module, ideal: &OrderIdeal, x: &[u64]) -> PairDescriptor {
    let dec = decompose(module.partition(), ideal);
    PairDescriptor { key: stab_key(module, &dec, x), components: component_descriptors(module, &dec, ideal, x) }
}

/// Descriptor of the pair orbit through `(a, b)`; both must lie in `R_λ^{I*}`.
pub fn pair_descriptor(module: &Module, ideal: &OrderIdeal, a: &[u64], b: &[u64]) -> Result<PairDescriptor> {
    if !orbit_contains_codes(module, ideal, a) || !orbit_contains_codes(module, ideal, b) {
        return Err(Error::NotInOrbit);
    }
    let dec = decompose(module.partition(), ideal);
    let h = transporter(module, &dec, a);
    let target = module.index_of_codes(b);
    let n = module.num_coords();
    let mut x = vec![0u64; n];
    let mut y = vec![0u64; n];
    for i in 0..module.size() as u64 {
        module.codes_of_index(i, &mut x);
        module.apply_codes(&h, &x, &mut y);
        if module.index_of_codes(&y) == target {
            return Ok(descriptor_of_stab_orbit(module, ideal, &x));
        }
    }
    unreachable!("transporter is invertible")
}

/// Elements of `O` with a local index for each.
struct OrbitIndex {
    elements: Vec<u64>,
    local: HashMap<u64, u32>,
}

impl OrbitIndex {
    fn new(module: &Module, ideal: &OrderIdeal, cap: u128) -> Result<Self> {
        let elements = orbit_elements(module, ideal, cap)?;
        let size = (elements.len() as u128).pow(2);
        if size > cap {
            return Err(Error::SizeCapExceeded { size, cap });
        }
        let local = elements.iter().enumerate().map(|(i, &e)| (e, i as u32)).collect();
        Ok(OrbitIndex { elements, local })
    }
}

/// Orbits of the diagonal action on `O × O`; pair `(i, j)` of local indices
/// is numbered `i·|O| + j`. Returns the elements of `O` and the partition.
/// The cap bounds both `|R_λ|` (enumerated to find `O`) and `|O|²`.
pub fn pair_orbit_partition_bruteforce(module: &Module, ideal: &OrderIdeal, cap: u128) -> Result<(Vec<u64>, OrbitPartition)> {
    let idx = OrbitIndex::new(module, ideal, cap)?;
    let n = idx.elements.len();
    let perms: Vec<Vec<u32>> = module
        .generator_permutations()
        .into_iter()
        .map(|p| idx.elements.iter().map(|&e| idx.local[&(p[e as usize] as u64)]).collect())
        .collect();
    let partition = OrbitPartition::from_unions(n * n, |uf| {
        for p in &perms {
            for i in 0..n {
                for j in 0..n {
                    uf.union((i * n + j) as u32, p[i] * n as u32 + p[j]);
                }
            }
        }
    });
    Ok((idx.elements, partition))
}

/// Descriptor classes on `O × O` (same numbering as the brute-force partition).
pub struct PairDescriptorTable {
    pub elements: Vec<u64>,
    pub descriptors: Vec<PairDescriptor>,
    /// Descriptor id of every pair.
    pub labels: Vec<u32>,
}

pub fn pair_descriptor_table(module: &Module, ideal: &OrderIdeal, cap: u128) -> Result<PairDescriptorTable> {
    let idx = OrbitIndex::new(module, ideal, cap)?;
    let dec = decompose(module.partition(), ideal);
    let n = idx.elements.len();
    let nc = module.num_coords();
    let mut keys: HashMap<StabKey, u32> = HashMap::new();
    let mut descriptors = Vec::new();
    let mut key_of = Vec::with_capacity(n);
    let mut codes = vec![0u64; nc];
    for &e in &idx.elements {
        module.codes_of_index(e, &mut codes);
        let key = stab_key(module, &dec, &codes);
        let next = descriptors.len() as u32;
        let id = *keys.entry(key.clone()).or_insert_with(|| {
            descriptors.push(PairDescriptor { key, components: component_descriptors(module, &dec, ideal, &codes) });
            next
        });
        key_of.push(id);
    }
    let labels: Vec<u32> = idx
        .elements
        .par_iter()
        .flat_map_iter(|&a| {
            let mut ac = vec![0u64; nc];
            module.codes_of_index(a, &mut ac);
            let h = transporter(module, &dec, &ac);
            debug_assert_eq!(module.index_of_codes(&{
                let e = canonical_form(module, ideal).unwrap().codes();
                let mut out = vec![0; nc];
                module.apply_codes(&h, &e, &mut out);
                out
            }), a);
            let mut row = vec![0u32; n];
            let (mut x, mut y) = (vec![0u64; nc], vec![0u64; nc]);
            for (xi, &xe) in idx.elements.iter().enumerate() {
                module.codes_of_index(xe, &mut x);
                module.apply_codes(&h, &x, &mut y);
                row[idx.local[&module.index_of_codes(&y)] as usize] = key_of[xi];
            }
            row
        })
        .collect();
    Ok(PairDescriptorTable { elements: idx.elements, descriptors, labels })
}

#[derive(Debug, Clone, Serialize)]
pub struct PairOrbitRow {
    pub size: u64,
    pub representative: (u64, u64),
    pub descriptor: PairDescriptor,
    pub verified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairVerification {
    pub orbit_size: usize,
    pub pair_orbits: usize,
    pub descriptor_classes: usize,
    pub rows: Vec<PairOrbitRow>,
    pub mismatches: Vec<String>,
    pub agrees: bool,
}

/// Checks that equal descriptors ⟺ same brute-force pair orbit, and that the
/// characteristic representative of each class lies in its stabilizer orbit.
pub fn verify_pair_descriptors(module: &Module, ideal: &OrderIdeal, cap: u128) -> Result<PairVerification> {
    let (elements, bfs) = pair_orbit_partition_bruteforce(module, ideal, cap)?;
    let table = pair_descriptor_table(module, ideal, cap)?;
    let dec = decompose(module.partition(), ideal);
    let n = elements.len();
    let mut desc_of_orbit: Vec<Option<u32>> = vec![None; bfs.num_orbits()];
    let mut orbit_of_desc: Vec<Option<u32>> = vec![None; table.descriptors.len()];
    let mut mismatches = Vec::new();
    for p in 0..n * n {
        let o = bfs.label(p as u64);
        let d = table.labels[p];
        let witness = || format!("pair ({}, {})", elements[p / n], elements[p % n]);
        if *desc_of_orbit[o as usize].get_or_insert(d) != d && mismatches.len() < 10 {
            mismatches.push(format!("orbit {o} carries two descriptors, e.g. at {}", witness()));
        }
        if *orbit_of_desc[d as usize].get_or_insert(o) != o && mismatches.len() < 10 {
            mismatches.push(format!("descriptor {d} spans two orbits, e.g. at {}", witness()));
        }
    }
    let e = canonical_form(module, ideal)?.codes();
    let e_local = elements.iter().position(|&x| x == module.index_of_codes(&e)).expect("e(I) lies in O");
    let rows: Vec<PairOrbitRow> = (0..bfs.num_orbits())
        .map(|o| {
            let rep = bfs.reps()[o] as usize;
            let d = table.labels[rep];
            let descriptor = table.descriptors[d as usize].clone();
            // the class through (e(I), x) for x = characteristic representative
            let verified = desc_of_orbit[o] == Some(d) && orbit_of_desc[d as usize] == Some(o as u32) && {
                let x_local = (0..n).find(|&j| table.labels[e_local * n + j] == d);
                x_local.is_some_and(|j| {
                    let mut x = vec![0u64; module.num_coords()];
                    module.codes_of_index(elements[j], &mut x);
                    let f = characteristic_pair_element(module, &dec, &x);
                    orbit_contains_codes(module, ideal, &f)
                        && stabilizer_orbit_contains_with(module, &dec, &x, &f)
                        && bfs.label((e_local * n) as u64 + elements.iter().position(|&z| z == module.index_of_codes(&f)).unwrap() as u64) == o as u32
                })
            };
            PairOrbitRow {
                size: bfs.sizes()[o],
                representative: (elements[rep / n], elements[rep % n]),
                descriptor,
                verified,
            }
        })
        .collect();
    let agrees = mismatches.is_empty() && bfs.num_orbits() == table.descriptors.len() && rows.iter().all(|r| r.verified);
    Ok(PairVerification {
        orbit_size: n,
        pair_orbits: bfs.num_orbits(),
        descriptor_classes: table.descriptors.len(),
        rows,
        mismatches,
        agrees,
    })
}

/// All automorphisms fixing `e`, by filtering every endomorphism (oracle).
/// Returned as endomorphism indices, see [`Module::endomorphism_at`].
pub fn automorphisms_bruteforce(module: &Module, cap: u128) -> Result<Vec<u128>> {
    let count = module.endomorphism_count();
    if count > cap {
        return Err(Error::SizeCapExceeded { size: count, cap });
    }
    Ok((0..count).into_par_iter().filter(|&i| module.is_automorphism(&module.endomorphism_at(i))).collect())
}

/// Orbits on `R_λ` of the listed automorphisms that fix `e(I)`.
pub fn literal_stabilizer_orbits(module: &Module, ideal: &OrderIdeal, automorphisms: &[u128]) -> Result<OrbitPartition> {
    let e = canonical_form(module, ideal)?.codes();
    let nc = module.num_coords();
    let stab: Vec<BlockMatrix> = automorphisms
        .par_iter()
        .map(|&i| module.endomorphism_at(i))
        .filter(|g| {
            let mut out = vec![0u64; nc];
            module.apply_codes(g, &e, &mut out);
            out == e
        })
        .collect();
    let size = module.size() as usize;
    let mut done = vec![false; size];
    let mut classes: Vec<Vec<u32>> = Vec::new();
    for start in 0..size {
        if done[start] {
            continue;
        }
        let mut x = vec![0u64; nc];
        module.codes_of_index(start as u64, &mut x);
        let images: Vec<u32> = stab
            .par_iter()
            .map_init(
                || vec![0u64; nc],
                |y, g| {
                    module.apply_codes(g, &x, y);
                    module.index_of_codes(y) as u32
                },
            )
            .collect();
        for &i in &images {
            done[i as usize] = true;
        }
        classes.push(images);
    }
    Ok(OrbitPartition::from_unions(size, |uf| {
        for c in &classes {
            for w in c.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
    }))
}
