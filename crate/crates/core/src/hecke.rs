//! The orbital algebra of `G_λ` acting on an orbit `O`: basis of pair
//! orbits, integer structure constants, and the commutativity verdict.

pub mod lemmas;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pairs::{pair_descriptor_table, pair_orbit_partition_bruteforce, PairDescriptor};
use crate::pmodule::Module;
use crate::poset::OrderIdeal;

/// Full constancy of structure constants is checked up to this many pairs.
pub const FULL_CONSTANCY_LIMIT: usize = 100_000;
/// Extra representatives per orbital when only spot-checking.
pub const SPOT_CHECKS: usize = 3;

/// Pair orbits on `O × O`, numbered by their least pair. Pair `(x, y)` of
/// local indices is stored at `x·|O| + y`, so the diagonal orbit is 0.
#[derive(Debug, Clone)]
pub struct OrbitalBasis {
    pub elements: Vec<u64>,
    pub labels: Vec<u32>,
    pub sizes: Vec<u64>,
    /// Least pair of each orbital, as local indices.
    pub reps: Vec<(u32, u32)>,
    pub descriptors: Vec<PairDescriptor>,
    /// Whether the descriptor partition matched the generator closure.
    pub verified: bool,
}

impl OrbitalBasis {
    pub fn rank(&self) -> usize {
        self.sizes.len()
    }

    pub fn orbit_size(&self) -> usize {
        self.elements.len()
    }

    pub fn diagonal(&self) -> u32 {
        0
    }

    pub fn label(&self, x: u32, y: u32) -> u32 {
        self.labels[x as usize * self.elements.len() + y as usize]
    }

    /// Local index of a module element index, if it lies in `O`.
    pub fn local(&self, element: u64) -> Option<u32> {
        self.elements.binary_search(&element).ok().map(|i| i as u32)
    }

    fn members(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.rank()];
        for (p, &l) in self.labels.iter().enumerate() {
            out[l as usize].push(p as u32);
        }
        out
    }
}

/// Orbital basis via pair descriptors, checked against the orbit closure of
/// the automorphism generators on `O × O`.
pub fn orbital_basis(module: &Module, ideal: &OrderIdeal, cap: u128) -> Result<OrbitalBasis> {
    let table = pair_descriptor_table(module, ideal, cap)?;
    let (_, bfs) = pair_orbit_partition_bruteforce(module, ideal, cap)?;
    let mut renumber = vec![u32::MAX; table.descriptors.len()];
    let mut descriptors = Vec::new();
    let mut reps = Vec::new();
    let n = table.elements.len();
    let mut labels = Vec::with_capacity(table.labels.len());
    for (p, &d) in table.labels.iter().enumerate() {
        if renumber[d as usize] == u32::MAX {
            renumber[d as usize] = descriptors.len() as u32;
            descriptors.push(table.descriptors[d as usize].clone());
            reps.push(((p / n) as u32, (p % n) as u32));
        }
        labels.push(renumber[d as usize]);
    }
    let mut sizes = vec![0u64; descriptors.len()];
    for &l in &labels {
        sizes[l as usize] += 1;
    }
    // same descriptor ⟺ same generator orbit
    let mut to_bfs = vec![u32::MAX; descriptors.len()];
    let mut verified = bfs.num_orbits() == descriptors.len();
    for (p, &l) in labels.iter().enumerate() {
        let b = bfs.label(p as u64);
        if to_bfs[l as usize] == u32::MAX {
            to_bfs[l as usize] = b;
        } else if to_bfs[l as usize] != b {
            verified = false;
        }
    }
    Ok(OrbitalBasis { elements: table.elements, labels, sizes, reps, descriptors, verified })
}

/// `c[i][j][k] = |{z : (x,z) ∈ O_i, (z,y) ∈ O_j}|` for any `(x,y) ∈ O_k`,
/// stored flat at `(i·d + j)·d + k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureConstants {
    pub rank: usize,
    pub c: Vec<u64>,
    /// Whether every pair of every orbital was checked, not a sample.
    pub full_constancy: bool,
}

/// Sorted multiset of `(label(x,z), label(z,y))` over `z`.
fn z_profile(basis: &OrbitalBasis, x: u32, y: u32) -> Vec<(u32, u32)> {
    let mut v: Vec<(u32, u32)> = (0..basis.orbit_size() as u32).map(|z| (basis.label(x, z), basis.label(z, y))).collect();
    v.sort_unstable();
    v
}

impl StructureConstants {
    pub fn get(&self, i: usize, j: usize, k: usize) -> u64 {
        self.c[(i * self.rank + j) * self.rank + k]
    }

    /// Least `(i, j, k)` with `i < j` and `c[i][j][k] ≠ c[j][i][k]`.
    pub fn commutativity_witness(&self) -> Option<(usize, usize, usize)> {
        let d = self.rank;
        (0..d)
            .flat_map(|i| (i + 1..d).flat_map(move |j| (0..d).map(move |k| (i, j, k))))
            .find(|&(i, j, k)| self.get(i, j, k) != self.get(j, i, k))
    }

    pub fn is_commutative(&self) -> bool {
        self.commutativity_witness().is_none()
    }

    /// `(I_i * I_j) * I_l = I_i * (I_j * I_l)` on every basis triple.
    pub fn is_associative(&self) -> bool {
        let d = self.rank;
        (0..d).into_par_iter().all(|i| {
            for j in 0..d {
                for l in 0..d {
                    for k in 0..d {
                        let left: u64 = (0..d).map(|m| self.get(i, j, m) * self.get(m, l, k)).sum();
                        let right: u64 = (0..d).map(|m| self.get(j, l, m) * self.get(i, m, k)).sum();
                        if left != right {
                            return false;
                        }
                    }
                }
            }
            true
        })
    }

    /// The diagonal orbital is a two-sided identity.
    pub fn diagonal_is_identity(&self, diag: usize) -> bool {
        let d = self.rank;
        (0..d).all(|j| (0..d).all(|k| self.get(diag, j, k) == (j == k) as u64 && self.get(j, diag, k) == (j == k) as u64))
    }

    /// `Σ_k c[i][j][k]·|O_k| = |O_i|·|O_j| / |O|`.
    pub fn row_sums_consistent(&self, basis: &OrbitalBasis) -> bool {
        let d = self.rank;
        let n = basis.orbit_size() as u64;
        (0..d).all(|i| {
            (0..d).all(|j| {
                let lhs: u64 = (0..d).map(|k| self.get(i, j, k) * basis.sizes[k]).sum();
                lhs * n == basis.sizes[i] * basis.sizes[j]
            })
        })
    }
}

/// Counts from the least pair of each orbital, then checks constancy on
/// every pair when `|O × O| ≤ FULL_CONSTANCY_LIMIT`, otherwise on
/// `SPOT_CHECKS` seeded representatives plus the largest pair.
pub fn structure_constants(basis: &OrbitalBasis, seed: u64) -> Result<StructureConstants> {
    let d = basis.rank();
    let columns: Vec<Vec<(u32, u32)>> = basis.reps.par_iter().map(|&(x, y)| z_profile(basis, x, y)).collect();
    let full = basis.labels.len() <= FULL_CONSTANCY_LIMIT;
    let members = basis.members();
    let n = basis.orbit_size() as u32;
    columns.par_iter().zip(members.par_iter()).enumerate().try_for_each(|(k, (col, mem))| {
        let sample: Vec<u32> = if full {
            mem.clone()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ k as u64);
            let mut s: Vec<u32> = mem.choose_multiple(&mut rng, SPOT_CHECKS).copied().collect();
            s.extend(mem.last());
            s
        };
        for p in sample {
            let (x, y) = (p / n, p % n);
            if z_profile(basis, x, y) != *col {
                let (x0, y0) = basis.reps[k];
                return Err(Error::NonConstantCount {
                    orbital: k,
                    witness: format!("pairs ({x0},{y0}) and ({x},{y}) give different counts"),
                });
            }
        }
        Ok(())
    })?;
    let mut c = vec![0u64; d * d * d];
    for (k, col) in columns.iter().enumerate() {
        for &(i, j) in col {
            c[(i as usize * d + j as usize) * d + k] += 1;
        }
    }
    Ok(StructureConstants { rank: d, c, full_constancy: full })
}

/// First pair `(x, y)` and orbitals `(i, j)` where the number of `z` with
/// `(x,z) ∈ O_i, (z,y) ∈ O_j` differs from the count with `i, j` swapped.
pub fn pointwise_swap_witness(basis: &OrbitalBasis) -> Option<(u32, u32, u32, u32)> {
    let n = basis.orbit_size() as u32;
    (0..n * n).into_par_iter().find_map_first(|p| {
        let (x, y) = (p / n, p % n);
        let prof = z_profile(basis, x, y);
        let count = |a: u32, b: u32| prof.iter().filter(|&&t| t == (a, b)).count();
        prof.iter().find(|&&(i, j)| i < j && count(i, j) != count(j, i)).map(|&(i, j)| (x, y, i, j))
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommutativityVerdict {
    pub rank: usize,
    pub commutative: bool,
    pub witnesses: Vec<(usize, usize, usize)>,
    /// Residue field of order 2: commutativity is not predicted there.
    pub outside_hypothesis: bool,
}

pub fn commutativity_check(module: &Module, constants: &StructureConstants) -> CommutativityVerdict {
    let witness = constants.commutativity_witness();
    CommutativityVerdict {
        rank: constants.rank,
        commutative: witness.is_none(),
        witnesses: witness.into_iter().collect(),
        outside_hypothesis: module.ring().q() == 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dvr::{Ring, RingSpec};
    use crate::pmodule::Partition;
    use crate::poset::PosetPoint;

    fn module(ring: &str, lengths: &[u32]) -> Module {
        let ring = Ring::new(ring.parse::<RingSpec>().unwrap());
        Module::new(&ring, &Partition::from_lengths(lengths).unwrap())
    }

    fn ideal(m: &Module, pts: &[(u32, u32)]) -> OrderIdeal {
        let pts: Vec<PosetPoint> = pts.iter().map(|&(v, l)| PosetPoint::new(v, l).unwrap()).collect();
        OrderIdeal::from_generators(&pts, m.partition())
    }

    #[test]
    fn rank_examples() {
        let m = module("zp:3", &[2]);
        let b = orbital_basis(&m, &ideal(&m, &[(0, 2)]), 1 << 20).unwrap();
        assert!(b.verified);
        assert_eq!(b.rank(), 6);
        let m = module("zp:3", &[1, 1]);
        let b = orbital_basis(&m, &ideal(&m, &[(0, 1)]), 1 << 20).unwrap();
        assert_eq!(b.rank(), 3);
        let b = orbital_basis(&m, &OrderIdeal::empty(m.partition()), 1 << 20).unwrap();
        assert_eq!(b.rank(), 1);
        let sc = structure_constants(&b, 0).unwrap();
        assert!(sc.is_commutative());
    }

    /// Triple loop over `O` straight from the generator-closure partition.
    fn constants_bruteforce(m: &Module, i: &OrderIdeal) -> (Vec<u32>, usize, Vec<u64>) {
        let (elements, part) = pair_orbit_partition_bruteforce(m, i, 1 << 20).unwrap();
        let n = elements.len();
        let d = part.num_orbits();
        let lab = |x: usize, y: usize| part.label((x * n + y) as u64) as usize;
        let mut c = vec![u64::MAX; d * d * d];
        for x in 0..n {
            for y in 0..n {
                let k = lab(x, y);
                let mut local = vec![0u64; d * d];
                for z in 0..n {
                    local[lab(x, z) * d + lab(z, y)] += 1;
                }
                for (ij, &v) in local.iter().enumerate() {
                    let slot = &mut c[ij * d + k];
                    assert!(*slot == u64::MAX || *slot == v);
                    *slot = v;
                }
            }
        }
        (part.labels().to_vec(), d, c)
    }

    #[test]
    fn full_tensor_matches_triple_loop() {
        let m = module("zp:3", &[2, 1]);
        let i = ideal(&m, &[(0, 1)]);
        let b = orbital_basis(&m, &i, 1 << 20).unwrap();
        assert_eq!(b.orbit_size(), 6);
        let sc = structure_constants(&b, 0).unwrap();
        assert!(sc.full_constancy);
        let (bfs_labels, d, c) = constants_bruteforce(&m, &i);
        assert_eq!(d, b.rank());
        // translate closure labels to basis labels
        let mut map = vec![0usize; d];
        for (p, &l) in bfs_labels.iter().enumerate() {
            map[l as usize] = b.labels[p] as usize;
        }
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    assert_eq!(c[(i * d + j) * d + k], sc.get(map[i], map[j], map[k]));
                }
            }
        }
    }

    #[test]
    fn algebra_sanity() {
        for (ring, lengths, pts) in [
            ("zp:3", vec![2, 1], vec![(0, 2)]),
            ("zp:3", vec![3, 1], vec![(1, 3), (0, 1)]),
            ("fqt:2^2", vec![2, 1], vec![(0, 1)]),
            ("zp:5", vec![2], vec![(0, 2)]),
        ] {
            let m = module(ring, &lengths);
            let b = orbital_basis(&m, &ideal(&m, &pts), 1 << 20).unwrap();
            assert!(b.verified);
            let sc = structure_constants(&b, 7).unwrap();
            assert!(sc.diagonal_is_identity(b.diagonal() as usize));
            assert!(sc.row_sums_consistent(&b));
            assert!(sc.is_associative());
            assert!(sc.is_commutative());
            assert_eq!(pointwise_swap_witness(&b), None);
        }
    }

    #[test]
    fn cyclic_unit_multiplication() {
        let m = module("zp:3", &[3]);
        let r = m.ring().clone();
        for j in 0..3u32 {
            let b = orbital_basis(&m, &ideal(&m, &[(j, 3)]), 1 << 20).unwrap();
            let sc = structure_constants(&b, 0).unwrap();
            assert_eq!(b.rank() as u64, 3u64.pow(3 - j - 1) * 2);
            let e = r.pi_pow(j, 3).code();
            let x = b.local(e).unwrap();
            let lab = |u: u64| b.label(x, b.local(r.mul_raw(3, e, u)).unwrap()) as usize;
            let units: Vec<u64> = (0..27).filter(|u| u % 3 != 0).collect();
            for &u1 in &units {
                for &u2 in &units {
                    let k = lab(r.mul_raw(3, u1, u2));
                    assert_eq!(sc.get(lab(u1), lab(u2), k), 1);
                }
            }
        }
    }

    /// On `π^j R_n^{k*}`, `k ≥ 2`, the stabilizer of `e_1` sorts `y = (y_1, y')` by
    /// `s = val(y')` and `y_1 mod π^s`, giving `1 + Σ_{s=1}^{n-j} q^{s-1}(q-1) = q^{n-j}`
    /// orbitals; the non-scalar part splits once `n - j ≥ 2`.
    #[test]
    fn single_column_rank_is_a_power_of_q() {
        for (ring, n, k) in [("zp:3", 1, 2), ("zp:3", 2, 2), ("zp:3", 2, 3), ("zp:3", 3, 2), ("zp:5", 2, 2), ("fqt:2^2", 2, 2)] {
            let m = module(ring, &vec![n; k]);
            let q = m.ring().q();
            for j in 0..n {
                let b = orbital_basis(&m, &ideal(&m, &[(j, n)]), 1 << 20).unwrap();
                assert!(b.verified);
                assert_eq!(b.rank() as u64, q.pow(n - j), "{ring} ({n}^{k}) j = {j}");
            }
        }
    }

    #[test]
    fn small_field_is_flagged() {
        let m = module("zp:2", &[3, 1]);
        let b = orbital_basis(&m, &ideal(&m, &[(1, 3), (0, 1)]), 1 << 20).unwrap();
        let sc = structure_constants(&b, 0).unwrap();
        assert!(commutativity_check(&m, &sc).outside_hypothesis);
    }

    proptest::proptest! {
        #[test]
        fn labels_are_invariant_under_automorphisms(seed in 0u64..1000, x in 0u32..18, y in 0u32..18) {
            let m = module("zp:3", &[2, 1]);
            let b = orbital_basis(&m, &ideal(&m, &[(0, 2)]), 1 << 20).unwrap();
            let g = m.random_automorphism(seed);
            let move_ = |i: u32| {
                let mut out = vec![0u64; 2];
                let mut codes = vec![0u64; 2];
                m.codes_of_index(b.elements[i as usize], &mut codes);
                m.apply_codes(&g, &codes, &mut out);
                b.local(m.index_of_codes(&out)).unwrap()
            };
            proptest::prop_assert_eq!(b.label(x, y), b.label(move_(x), move_(y)));
        }
    }
}
