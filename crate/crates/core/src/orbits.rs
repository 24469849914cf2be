//! Orbits of `G_λ` on `R_λ`: the valuative descriptor `R_λ^{I*}`, canonical
//! forms `e(I)`, characteristic submodules `R_λ^I`, and a generator-closure
//! oracle to check them against.

use std::collections::{HashMap, HashSet};

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::pmodule::{Module, ModuleElement};
use crate::poset::{enumerate_ideals, ideal_of_codes, ideal_of_element, OrderIdeal};

/// Partition of `0..n` into classes, numbered by least member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitPartition {
    labels: Vec<u32>,
    reps: Vec<u64>,
    sizes: Vec<u64>,
}

impl OrbitPartition {
    /// Builds the partition from the connected components left by `unite`.
    pub fn from_unions(n: usize, unite: impl FnOnce(&mut UnionFind<u32>)) -> Self {
        let mut uf = UnionFind::new(n);
        unite(&mut uf);
        let mut root_label: HashMap<u32, u32> = HashMap::new();
        let mut labels = Vec::with_capacity(n);
        let mut reps = Vec::new();
        let mut sizes = Vec::new();
        for i in 0..n as u32 {
            let next = reps.len() as u32;
            let label = *root_label.entry(uf.find_mut(i)).or_insert(next);
            if label == next {
                reps.push(i as u64);
                sizes.push(0);
            }
            sizes[label as usize] += 1;
            labels.push(label);
        }
        OrbitPartition { labels, reps, sizes }
    }

    /// Orbits of the group generated by the given permutations of `0..n`.
    pub fn from_permutations(n: usize, perms: &[Vec<u32>]) -> Self {
        Self::from_unions(n, |uf| {
            for p in perms {
                for (i, &j) in p.iter().enumerate() {
                    uf.union(i as u32, j);
                }
            }
        })
    }

    pub fn num_orbits(&self) -> usize {
        self.reps.len()
    }

    pub fn label(&self, i: u64) -> u32 {
        self.labels[i as usize]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Least member of each orbit.
    pub fn reps(&self) -> &[u64] {
        &self.reps
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn members(&self, label: u32) -> Vec<u64> {
        (0..self.labels.len() as u64).filter(|&i| self.labels[i as usize] == label).collect()
    }
}

/// The valuative description of one orbit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrbitDescriptor {
    pub ideal: OrderIdeal,
    pub boundary: Vec<u32>,
    pub max_blocks: Vec<bool>,
}

impl OrbitDescriptor {
    pub fn new(ideal: &OrderIdeal) -> Self {
        OrbitDescriptor {
            ideal: ideal.clone(),
            boundary: ideal.boundary().to_vec(),
            max_blocks: (0..ideal.boundary().len()).map(|b| ideal.is_max_block(b)).collect(),
        }
    }
}

pub fn orbit_contains_codes(module: &Module, ideal: &OrderIdeal, codes: &[u64]) -> bool {
    let boundary = ideal.boundary();
    (0..boundary.len()).all(|b| {
        let v = module.block_val_codes(codes, b);
        if ideal.is_max_block(b) {
            v == boundary[b]
        } else {
            v >= boundary[b]
        }
    })
}

/// Membership in `R_λ^{I*}`: every coordinate has valuation at least
/// `∂_{λ_i} I`, with equality attained in each block whose boundary point is
/// maximal in `I`.
pub fn orbit_contains(module: &Module, ideal: &OrderIdeal, e: &ModuleElement) -> bool {
    orbit_contains_codes(module, ideal, &e.codes())
}

pub fn char_submodule_contains_codes(module: &Module, ideal: &OrderIdeal, codes: &[u64]) -> bool {
    let boundary = ideal.boundary();
    (0..boundary.len()).all(|b| module.block_val_codes(codes, b) >= boundary[b])
}

/// Membership in `R_λ^I`: every coordinate has valuation at least `∂_{λ_i} I`.
pub fn char_submodule_contains(module: &Module, ideal: &OrderIdeal, e: &ModuleElement) -> bool {
    char_submodule_contains_codes(module, ideal, &e.codes())
}

/// `e(I)`: `π^{v}` in the first coordinate of the block of length `l` for
/// each maximal `(v, l)`, zero elsewhere.
pub fn canonical_form(module: &Module, ideal: &OrderIdeal) -> Result<ModuleElement> {
    let mut codes = vec![0u64; module.num_coords()];
    for m in ideal.max_antichain() {
        let block = module.partition().block_of_length(m.l).ok_or(Error::NoMatchingColumn(m.l))?;
        let c = module.blocks()[block].start;
        codes[c] = module.ring().pi_pow(m.v, m.l).code();
    }
    module.element(&codes)
}

/// Characteristic form of `e`: `π^{r_i}` in the first coordinate of block `i`,
/// where `r_i = ∂_{λ_i} I(e)`. With `all_coords`, `π^{r_i}` fills the whole block.
pub fn characteristic_form(module: &Module, e: &ModuleElement, all_coords: bool) -> ModuleElement {
    let ideal = ideal_of_element(module, e);
    let mut codes = vec![0u64; module.num_coords()];
    for (b, range) in module.blocks().iter().enumerate() {
        let l = module.partition().parts()[b].0;
        let x = module.ring().pi_pow(ideal.boundary()[b], l).code();
        let end = if all_coords { range.end } else { range.start + 1 };
        codes[range.start..end].fill(x);
    }
    module.element(&codes).expect("shape matches")
}

/// Element indices of `R_λ^{I*}`, increasing.
pub fn orbit_elements(module: &Module, ideal: &OrderIdeal, cap: u128) -> Result<Vec<u64>> {
    module.check_cap(cap)?;
    let mut codes = vec![0u64; module.num_coords()];
    Ok((0..module.size() as u64)
        .filter(|&i| {
            module.codes_of_index(i, &mut codes);
            orbit_contains_codes(module, ideal, &codes)
        })
        .collect())
}

/// Orbits of the group generated by [`Module::aut_generators`].
pub fn orbit_partition_bruteforce(module: &Module, cap: u128) -> Result<OrbitPartition> {
    module.check_cap(cap)?;
    Ok(OrbitPartition::from_permutations(module.size() as usize, &module.generator_permutations()))
}

/// Whether some endomorphism maps `e` to `f`, decided by `I(f) ⊆ I(e)`.
pub fn hom_image_exists(module: &Module, e: &ModuleElement, f: &ModuleElement) -> bool {
    ideal_of_element(module, f).is_subset(&ideal_of_element(module, e))
}

/// Indices of all endomorphic images of `e`, by exhaustive search.
pub fn hom_images_bruteforce(module: &Module, e: &ModuleElement, cap: u128) -> Result<HashSet<u64>> {
    let mut out = HashSet::new();
    for m in module.all_endomorphisms(cap)? {
        out.insert(module.index_of(&module.apply(&m, e)?));
    }
    Ok(out)
}

/// Whether a set of element indices is mapped into itself by every generator.
pub fn is_generator_invariant(module: &Module, set: &[u64]) -> bool {
    let members: HashSet<u64> = set.iter().copied().collect();
    module.aut_generators().iter().all(|g| {
        set.iter().all(|&i| {
            let img = module.apply(g, &module.element_at(i)).unwrap();
            members.contains(&module.index_of(&img))
        })
    })
}

/// Whether a set of element indices equals `R_λ^I` for some ideal `I`.
pub fn is_characteristic_submodule(module: &Module, set: &[u64]) -> bool {
    let members: HashSet<u64> = set.iter().copied().collect();
    let mut codes = vec![0u64; module.num_coords()];
    enumerate_ideals(module.partition()).iter().any(|ideal| {
        (0..module.size() as u64).all(|i| {
            module.codes_of_index(i, &mut codes);
            char_submodule_contains_codes(module, ideal, &codes) == members.contains(&i)
        })
    })
}

/// One line of the orbit/ideal comparison.
#[derive(Debug, Clone)]
pub struct OrbitRow {
    pub ideal: OrderIdeal,
    pub boundary: Vec<u32>,
    pub size: u64,
    pub canonical_form: ModuleElement,
    pub verified: bool,
}

#[derive(Debug, Clone)]
pub struct OrbitTable {
    pub rows: Vec<OrbitRow>,
    pub bfs_orbits: usize,
    pub ideal_count: usize,
    /// Every generator-closure orbit is exactly one descriptor class and vice versa.
    pub agrees: bool,
}

/// Compares the generator-closure orbits with the descriptors `R_λ^{I*}`.
pub fn orbit_table(module: &Module, cap: u128) -> Result<OrbitTable> {
    let bfs = orbit_partition_bruteforce(module, cap)?;
    let ideals = enumerate_ideals(module.partition());
    let index: HashMap<&OrderIdeal, usize> = ideals.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let n = module.size() as u64;
    let mut codes = vec![0u64; module.num_coords()];
    // ideal of each element, and the BFS orbit each ideal landed in
    let mut orbit_of_ideal: Vec<Option<u32>> = vec![None; ideals.len()];
    let mut ideal_of_orbit: Vec<Option<usize>> = vec![None; bfs.num_orbits()];
    let mut sizes = vec![0u64; ideals.len()];
    let mut agrees = bfs.num_orbits() == ideals.len();
    for i in 0..n {
        module.codes_of_index(i, &mut codes);
        let id = index[&ideal_of_codes(module, &codes)];
        sizes[id] += 1;
        let orbit = bfs.label(i);
        agrees &= *orbit_of_ideal[id].get_or_insert(orbit) == orbit;
        agrees &= *ideal_of_orbit[orbit as usize].get_or_insert(id) == id;
        for (j, ideal) in ideals.iter().enumerate() {
            agrees &= orbit_contains_codes(module, ideal, &codes) == (j == id);
        }
    }
    let mut rows = Vec::new();
    for (id, ideal) in ideals.iter().enumerate() {
        let e = canonical_form(module, ideal)?;
        let e_orbit = bfs.label(module.index_of(&e));
        let verified = agrees
            && orbit_of_ideal[id] == Some(e_orbit)
            && bfs.sizes()[e_orbit as usize] == sizes[id]
            && orbit_contains(module, ideal, &e);
        rows.push(OrbitRow {
            ideal: ideal.clone(),
            boundary: ideal.boundary().to_vec(),
            size: sizes[id],
            canonical_form: e,
            verified,
        });
    }
    let agrees = agrees && rows.iter().all(|r| r.verified);
    Ok(OrbitTable { rows, bfs_orbits: bfs.num_orbits(), ideal_count: ideals.len(), agrees })
}
