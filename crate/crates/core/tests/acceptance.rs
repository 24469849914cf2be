//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::{BTreeSet, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use dvr_orbits::bsets::verify_bsets;
use dvr_orbits::dvr::{Ring, RingSpec};
use dvr_orbits::hecke::lemmas::{lemma_sweep, Lemma};
use dvr_orbits::hecke::{orbital_basis, structure_constants};
use dvr_orbits::orbits::{
    char_submodule_contains_codes, hom_image_exists, hom_images_bruteforce, is_generator_invariant, orbit_elements,
    orbit_table,
};
use dvr_orbits::pairs::{automorphisms_bruteforce, literal_stabilizer_orbits, stabilizer_orbit_contains, verify_pair_descriptors};
use dvr_orbits::pmodule::{Module, Partition};
use dvr_orbits::poset::{enumerate_ideals, poset_leq, OrderIdeal, PosetPoint};

const CAP: u128 = 1_000_000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn module(ring: &str, lengths: &[u32]) -> Module {
    let ring = Ring::new(ring.parse::<RingSpec>().unwrap());
    Module::new(&ring, &Partition::from_lengths(lengths).unwrap())
}

fn grid() -> Vec<Vec<u32>> {
    let mut g: Vec<Vec<u32>> = vec![vec![2, 1], vec![3, 1], vec![2, 2, 1], vec![2, 1, 1], vec![3, 2, 1], vec![1, 1, 1], vec![2, 2]];
    g.extend((1..=4).map(|n| vec![n]));
    g.extend((1..=2).map(|n| vec![n, n]));
    let mut seen = HashSet::new();
    g.retain(|l| seen.insert(l.clone()));
    g
}

const RINGS: [&str; 3] = ["zp:3", "zp:5", "fqt:2^2"];

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Antichains of the poset of points `(v, l)`, `0 ≤ v < l`, counted by subsets.
fn antichain_count(lengths: &[u32]) -> usize {
    let mut cols: Vec<u32> = lengths.to_vec();
    cols.dedup();
    let pts: Vec<PosetPoint> = cols.iter().flat_map(|&l| (0..l).map(move |v| PosetPoint::new(v, l).unwrap())).collect();
    (0u32..1 << pts.len())
        .filter(|mask| {
            let chosen: Vec<&PosetPoint> = (0..pts.len()).filter(|i| mask >> i & 1 == 1).map(|i| &pts[i]).collect();
            chosen.iter().enumerate().all(|(i, a)| chosen[i + 1..].iter().all(|b| !poset_leq(**a, **b) && !poset_leq(**b, **a)))
        })
        .count()
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut checked = 0;
    for ring in RINGS {
        for lengths in grid() {
            let m = module(ring, &lengths);
            let table = orbit_table(&m, CAP).map_err(|e| e.to_string())?;
            let antichains = antichain_count(&lengths);
            ensure(table.agrees && table.bfs_orbits == table.ideal_count && table.ideal_count == antichains, || {
                format!("{ring} {lengths:?}: {} orbits, {} ideals, {antichains} antichains", table.bfs_orbits, table.ideal_count)
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} modules, {:.1}s", t.elapsed().as_secs_f64()))
}

fn cyclic_ideal(m: &Module, j: u32, n: u32) -> OrderIdeal {
    OrderIdeal::from_generators(&[PosetPoint::new(j, n).unwrap()], m.partition())
}

fn criterion_2() -> Outcome {
    let q = 3u64;
    for n in 1..=4u32 {
        let m = module("zp:3", &[n]);
        let r = m.ring().clone();
        let table = orbit_table(&m, CAP).map_err(|e| e.to_string())?;
        ensure(table.agrees && table.bfs_orbits == n as usize + 1, || format!("(n = {n}): {} orbits", table.bfs_orbits))?;
        for j in 0..n {
            let b = orbital_basis(&m, &cyclic_ideal(&m, j, n), CAP).map_err(|e| e.to_string())?;
            let expected = q.pow(n - j - 1) * (q - 1);
            ensure(b.verified && b.rank() as u64 == expected, || format!("n = {n}, j = {j}: rank {} vs {expected}", b.rank()))?;
            let sc = structure_constants(&b, 0).map_err(|e| e.to_string())?;
            let e = r.pi_pow(j, n).code();
            let x = b.local(e).unwrap();
            let lab = |u: u64| b.label(x, b.local(r.mul_raw(n, e, u)).unwrap()) as usize;
            let units: Vec<u64> = (0..r.size(n)).filter(|u| u % q != 0).collect();
            for &u1 in &units {
                for &u2 in &units {
                    let k = lab(r.mul_raw(n, u1, u2));
                    for k2 in 0..b.rank() {
                        let want = (k2 == k) as u64;
                        ensure(sc.get(lab(u1), lab(u2), k2) == want, || format!("n = {n}, j = {j}: I_{u1} * I_{u2} at {k2}"))?;
                    }
                }
            }
        }
    }
    Ok("n ≤ 4, every j".into())
}

fn criterion_3() -> Outcome {
    let q = 3u64;
    let (mut checked, mut failures) = (0, Vec::new());
    for n in 1..=2u32 {
        for k in 2..=3usize {
            let m = module("zp:3", &vec![n; k]);
            let r = m.ring().clone();
            for j in 0..n {
                checked += 1;
                let b = orbital_basis(&m, &cyclic_ideal(&m, j, n), CAP).map_err(|e| e.to_string())?;
                let expected = q.pow(n - j - 1) * (q - 1) + 1;
                if !b.verified {
                    failures.push(format!("({n}^{k}), j = {j}: basis differs from closure"));
                    continue;
                }
                // scalar orbitals (x, u·x), and the rest of O × O
                let mut scalar_pairs = HashSet::new();
                let mut scalar_labels = BTreeSet::new();
                let mut codes = vec![0u64; m.num_coords()];
                for (xi, &xe) in b.elements.iter().enumerate() {
                    m.codes_of_index(xe, &mut codes);
                    for u in (0..r.size(n)).filter(|u| u % q != 0) {
                        let ux: Vec<u64> = codes.iter().map(|&c| r.mul_raw(n, u, c)).collect();
                        let yi = b.local(m.index_of_codes(&ux)).unwrap();
                        scalar_pairs.insert((xi as u32, yi));
                        scalar_labels.insert(b.label(xi as u32, yi));
                    }
                }
                let size = b.orbit_size() as u32;
                let rest: BTreeSet<u32> = (0..size)
                    .flat_map(|x| (0..size).map(move |y| (x, y)))
                    .filter(|p| !scalar_pairs.contains(p))
                    .map(|(x, y)| b.label(x, y))
                    .collect();
                if b.rank() as u64 != expected || scalar_labels.len() as u64 != expected - 1 || rest.len() != 1 {
                    failures.push(format!(
                        "({n}^{k}), j = {j}: rank {} vs q^(n-j-1)(q-1)+1 = {expected}; {} scalar orbitals, complement splits into {} orbits",
                        b.rank(),
                        scalar_labels.len(),
                        rest.len()
                    ));
                }
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("{checked} orbits"))
    } else {
        Err(format!("{} of {checked} orbits: {}", failures.len(), failures.join("; ")))
    }
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let (mut ideals, mut orbitals) = (0, 0);
    for lengths in grid() {
        let m = module("zp:3", &lengths);
        for ideal in enumerate_ideals(m.partition()) {
            let v = verify_pair_descriptors(&m, &ideal, CAP).map_err(|e| format!("{lengths:?} {ideal}: {e}"))?;
            ensure(v.agrees, || format!("{lengths:?} {ideal}: {:?}", &v.mismatches[..v.mismatches.len().min(3)]))?;
            ideals += 1;
            orbitals += v.pair_orbits;
        }
    }
    Ok(format!("{ideals} ideals, {orbitals} pair orbits, 0 mismatches, {:.1}s", t.elapsed().as_secs_f64()))
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let mut detail = Vec::new();
    for lengths in [vec![2, 1], vec![2, 2, 1]] {
        let m = module("zp:3", &lengths);
        let auts = automorphisms_bruteforce(&m, 1 << 22).map_err(|e| e.to_string())?;
        let order = m.aut_order();
        ensure(order == auts.len().into(), || format!("{lengths:?}: {} automorphisms vs closed form {order}", auts.len()))?;
        let n = m.size() as u64;
        let (mut x, mut y) = (vec![0; m.num_coords()], vec![0; m.num_coords()]);
        for ideal in enumerate_ideals(m.partition()) {
            let stab = literal_stabilizer_orbits(&m, &ideal, &auts).map_err(|e| e.to_string())?;
            for i in 0..n {
                m.codes_of_index(i, &mut x);
                for j in 0..n {
                    m.codes_of_index(j, &mut y);
                    let predicate = stabilizer_orbit_contains(&m, &ideal, &x, &y);
                    ensure(predicate == (stab.label(i) == stab.label(j)), || format!("{lengths:?} {ideal}: {x:?} ~ {y:?}"))?;
                }
            }
        }
        detail.push(format!("{lengths:?}: |Aut| = {order}"));
    }
    Ok(format!("{}, {:.1}s", detail.join(", "), t.elapsed().as_secs_f64()))
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let rows = lemma_sweep(0, None).map_err(|e| e.to_string())?;
    let bad: Vec<_> = rows.iter().filter(|r| !r.holds).collect();
    ensure(bad.is_empty(), || format!("{} discrepancies, first {:?}", bad.len(), bad[0]))?;
    let nonempty = rows.iter().filter(|r| r.result.count > 0).count();
    let swaps = rows.iter().filter(|r| matches!(r.lemma, Lemma::Cosets { .. } | Lemma::Independences { .. })).count();
    Ok(format!("{} instances ({nonempty} nonempty, {swaps} swap pairs), {:.1}s", rows.len(), t.elapsed().as_secs_f64()))
}

fn criterion_7() -> Outcome {
    let t = Instant::now();
    let (mut algebras, mut skipped) = (0, 0);
    for ring in RINGS {
        for lengths in grid() {
            let m = module(ring, &lengths);
            for ideal in enumerate_ideals(m.partition()) {
                let size = orbit_elements(&m, &ideal, CAP).map_err(|e| e.to_string())?.len() as u128;
                if size * size > CAP {
                    skipped += 1;
                    continue;
                }
                let b = orbital_basis(&m, &ideal, CAP).map_err(|e| e.to_string())?;
                let sc = structure_constants(&b, 0).map_err(|e| format!("{ring} {lengths:?} {ideal}: {e}"))?;
                ensure(b.verified, || format!("{ring} {lengths:?} {ideal}: basis differs from closure"))?;
                if let Some(w) = sc.commutativity_witness() {
                    return Err(format!("{ring} {lengths:?} {ideal}: witness {w:?}"));
                }
                algebras += 1;
            }
        }
    }
    Ok(format!("{algebras} algebras commutative, {skipped} over the size bound, {:.1}s", t.elapsed().as_secs_f64()))
}

fn criterion_8() -> Outcome {
    let m = module("zp:2", &[3, 1]);
    let h: Vec<u64> = [[0, 0], [2, 1], [4, 0], [6, 1]].iter().map(|c| m.index_of_codes(c)).collect();
    ensure(is_generator_invariant(&m, &h), || "H is not invariant".into())?;
    let hs: HashSet<u64> = h.iter().copied().collect();
    let mut codes = vec![0u64; 2];
    for ideal in enumerate_ideals(m.partition()) {
        let members: HashSet<u64> = (0..m.size() as u64)
            .filter(|&i| {
                m.codes_of_index(i, &mut codes);
                char_submodule_contains_codes(&m, &ideal, &codes)
            })
            .collect();
        ensure(members != hs, || format!("H equals the submodule of {ideal}"))?;
    }
    Ok("invariant, matches none of the characteristic submodules".into())
}

fn criterion_9() -> Outcome {
    let mut pairs = 0;
    for ring in ["zp:3", "zp:5"] {
        for lengths in [vec![2, 1], vec![3, 1]] {
            let v = verify_bsets(&module(ring, &lengths), false, CAP).map_err(|e| e.to_string())?;
            ensure(v.agrees, || format!("{ring} {lengths:?}: {v:?}"))?;
            pairs += v.pairs;
        }
    }
    let v = verify_bsets(&module("zp:2", &[2, 1]), false, CAP).map_err(|e| e.to_string())?;
    ensure(v.even_prime_rejected == Some(true), || "p = 2 sum accepted".into())?;
    Ok(format!("{pairs} pairs, p = 2 sum rejected"))
}

fn criterion_10() -> Outcome {
    let m = module("zp:3", &[2, 1]);
    let elements: Vec<_> = (0..m.size() as u64).map(|i| m.element_at(i)).collect();
    for e in &elements {
        let images = hom_images_bruteforce(&m, e, CAP).map_err(|e| e.to_string())?;
        for f in &elements {
            ensure(images.contains(&m.index_of(f)) == hom_image_exists(&m, e, f), || {
                format!("{} -> {}", m.format_element(e), m.format_element(f))
            })?;
        }
    }
    Ok(format!("{0}×{0} pairs", elements.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("orbit-ideal bijection", criterion_1),
        ("cyclic counts", criterion_2),
        ("single-column counts", criterion_3),
        ("pair descriptors", criterion_4),
        ("stabilizer-orbit predicate", criterion_5),
        ("counting lemmas", criterion_6),
        ("commutative orbital algebras", criterion_7),
        ("q = 2 invariant subgroup", criterion_8),
        ("B-set lattice", criterion_9),
        ("hom criterion", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
