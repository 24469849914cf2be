use std::time::{Instant, SystemTime, UNIX_EPOCH};

use dvr_orbits::bsets::{enumerate_bsets, verify_bsets};
use dvr_orbits::dvr::Ring;
use dvr_orbits::hecke::lemmas::{lemma_sweep, IndependenceSystem, Layer, Lemma};
use dvr_orbits::hecke::{
    commutativity_check, orbital_basis, pointwise_swap_witness, structure_constants, StructureConstants, FULL_CONSTANCY_LIMIT,
};
use dvr_orbits::orbits::orbit_table;
use dvr_orbits::pairs::verify_pair_descriptors;
use dvr_orbits::pmodule::{Module, Partition};
use dvr_orbits::poset::{enumerate_ideals, OrderIdeal};
use dvr_orbits::Error;
use sha2::{Digest, Sha256};

use crate::config::{Command, ExperimentConfig};
use crate::report::{Check, Record, Report, Status};

/// Associativity is O(d^5); skipped above this rank.
const ASSOCIATIVITY_RANK_LIMIT: usize = 64;

pub fn run(cfg: &ExperimentConfig) -> Report {
    let mut report = Report {
        schema_version: crate::report::SCHEMA_VERSION,
        command: cfg.command,
        ring: cfg.ring.to_string(),
        partition: cfg.partition.as_ref().map(Partition::to_string),
        seed: cfg.seed,
        timestamp: cfg.timestamp.then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())),
        checks: Vec::new(),
        records: Vec::new(),
        passed: false,
        digest: String::new(),
    };
    let ring = Ring::new(cfg.ring);
    let module = cfg.partition.as_ref().map(|p| Module::new(&ring, p));
    match (cfg.command, &module) {
        (Command::Orbits, Some(m)) => orbits(cfg, m, &mut report),
        (Command::Pairs, Some(m)) => pairs(cfg, m, &mut report),
        (Command::Hecke, Some(m)) => hecke(cfg, m, &mut report),
        (Command::Bsets { verify }, Some(m)) => bsets(cfg, m, verify, &mut report),
        (Command::Lemmas { sweep }, _) => lemmas(cfg, sweep, &mut report),
        (Command::VerifyAll, Some(m)) => {
            orbits(cfg, m, &mut report);
            pairs(cfg, m, &mut report);
            hecke(cfg, m, &mut report);
            bsets(cfg, m, true, &mut report);
            lemmas(cfg, false, &mut report);
        }
        (_, None) => unreachable!("config validation requires a partition"),
    }
    if !cfg.timestamp {
        for r in &mut report.records {
            r.millis = None;
        }
    }
    report.finish();
    report
}

fn selected_ideals(cfg: &ExperimentConfig, m: &Module) -> Vec<OrderIdeal> {
    match &cfg.ideal {
        Some(i) => vec![i.clone()],
        None => enumerate_ideals(m.partition()),
    }
}

fn error_record(kind: &'static str, ideal: Option<String>, e: Error) -> Record {
    match e {
        Error::SizeCapExceeded { .. } => Record::skipped(kind, ideal, e.to_string()),
        e => Record { ideal, detail: Some(e.to_string()), ..Record::new(kind, Status::Fail) },
    }
}

fn elapsed(t: Instant) -> Option<u64> {
    Some(t.elapsed().as_millis() as u64)
}

fn orbits(cfg: &ExperimentConfig, m: &Module, report: &mut Report) {
    let t = Instant::now();
    let table = match orbit_table(m, cfg.cap_elements) {
        Ok(t) => t,
        Err(e) => return report.records.push(error_record("orbit", None, e)),
    };
    report.checks.push(Check {
        name: "orbit partition equals ideal descriptors".into(),
        passed: table.agrees,
        detail: Some(format!("{} orbits, {} ideals", table.bfs_orbits, table.ideal_count)),
    });
    for row in table.rows.iter().filter(|r| cfg.ideal.as_ref().is_none_or(|i| *i == r.ideal)) {
        report.records.push(Record {
            ideal: Some(row.ideal.to_string()),
            orbit_size: Some(row.size),
            canonical_form: Some(m.format_element(&row.canonical_form)),
            millis: elapsed(t),
            ..Record::new("orbit", Status::from_bool(row.verified))
        });
    }
}

fn pairs(cfg: &ExperimentConfig, m: &Module, report: &mut Report) {
    for ideal in selected_ideals(cfg, m) {
        let t = Instant::now();
        let name = Some(ideal.to_string());
        report.records.push(match verify_pair_descriptors(m, &ideal, cfg.cap_pairs) {
            Ok(v) => Record {
                ideal: name,
                orbit_size: Some(v.orbit_size as u64),
                rank: Some(v.pair_orbits),
                detail: Some(format!("{} descriptor classes, {} mismatches", v.descriptor_classes, v.mismatches.len())),
                millis: elapsed(t),
                ..Record::new("pairs", Status::from_bool(v.agrees))
            },
            Err(e) => error_record("pairs", name, e),
        });
    }
}

pub fn constants_digest(sc: &StructureConstants) -> String {
    let mut h = Sha256::new();
    h.update((sc.rank as u64).to_le_bytes());
    for &c in &sc.c {
        h.update(c.to_le_bytes());
    }
    hex::encode(h.finalize())
}

fn hecke(cfg: &ExperimentConfig, m: &Module, report: &mut Report) {
    for ideal in selected_ideals(cfg, m) {
        let t = Instant::now();
        let name = Some(ideal.to_string());
        let basis = match orbital_basis(m, &ideal, cfg.cap_pairs) {
            Ok(b) => b,
            Err(e) => {
                report.records.push(error_record("hecke", name, e));
                continue;
            }
        };
        let sc = match structure_constants(&basis, cfg.seed) {
            Ok(sc) => sc,
            Err(e) => {
                report.records.push(error_record("hecke", name, e));
                continue;
            }
        };
        let verdict = commutativity_check(m, &sc);
        let mut failed = Vec::new();
        if !basis.verified {
            failed.push("basis differs from generator closure");
        }
        if !sc.diagonal_is_identity(basis.diagonal() as usize) {
            failed.push("diagonal is not the identity");
        }
        if !sc.row_sums_consistent(&basis) {
            failed.push("row sums");
        }
        if sc.rank <= ASSOCIATIVITY_RANK_LIMIT && !sc.is_associative() {
            failed.push("associativity");
        }
        let pointwise = basis.labels.len() <= FULL_CONSTANCY_LIMIT;
        if pointwise && !verdict.outside_hypothesis && pointwise_swap_witness(&basis).is_some() {
            failed.push("pointwise swapped counts");
        }
        if !verdict.outside_hypothesis && !verdict.commutative {
            failed.push("not commutative");
        }
        let status = match (failed.is_empty(), verdict.outside_hypothesis) {
            (false, _) => Status::Fail,
            (true, true) => Status::Info,
            (true, false) => Status::Pass,
        };
        let detail = if !failed.is_empty() {
            Some(failed.join("; "))
        } else if verdict.outside_hypothesis {
            Some("residue field of order 2: outside the q >= 3 hypothesis, commutativity reported only".into())
        } else {
            None
        };
        report.records.push(Record {
            ideal: name,
            orbit_size: Some(basis.orbit_size() as u64),
            rank: Some(verdict.rank),
            commutative: Some(verdict.commutative),
            witnesses: Some(verdict.witnesses),
            structure_constants_digest: Some(constants_digest(&sc)),
            detail,
            millis: elapsed(t),
            ..Record::new("hecke", status)
        });
    }
}

fn family(l: &Lemma) -> &'static str {
    match l {
        Lemma::Cosets { left: Layer::Units, right: Layer::Units, .. } => "cosets A*/A*",
        Lemma::Cosets { left: Layer::Full, right: Layer::Full, .. } => "cosets A/A",
        Lemma::Cosets { .. } => "cosets A/A*",
        Lemma::IndependentLifts { .. } => "independent lifts",
        Lemma::Independences { system: IndependenceSystem::Both, .. } => "independences (both conditions)",
        Lemma::Independences { system: IndependenceSystem::One, .. } => "independences (one condition)",
    }
}

fn lemmas(cfg: &ExperimentConfig, sweep: bool, report: &mut Report) {
    let t = Instant::now();
    let rows = match lemma_sweep(cfg.seed, (!sweep).then_some(&cfg.ring)) {
        Ok(r) => r,
        Err(e) => return report.records.push(error_record("lemma", None, e)),
    };
    if rows.is_empty() {
        let mut r = Record::new("lemma", Status::Info);
        r.detail = Some(format!("no lemma instances over {}", cfg.ring));
        return report.records.push(r);
    }
    // (ring, family) groups in order of first appearance
    let mut groups: Vec<(String, &'static str, usize, usize, Vec<usize>)> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let key = (row.ring.to_string(), family(&row.lemma));
        let g = match groups.iter().position(|g| g.0 == key.0 && g.1 == key.1) {
            Some(g) => g,
            None => {
                groups.push((key.0, key.1, 0, 0, Vec::new()));
                groups.len() - 1
            }
        };
        groups[g].2 += 1;
        groups[g].3 += (row.result.count > 0) as usize;
        if !row.holds {
            groups[g].4.push(i);
        }
    }
    for (ring, fam, n, nonempty, bad) in groups {
        let mut detail = format!("{fam} over {ring}: {n} instances, {nonempty} nonempty, {} failures", bad.len());
        if let Some(&i) = bad.first() {
            detail += &format!("; first: {:?} -> {:?}", rows[i].lemma, rows[i].result);
        }
        report.records.push(Record { detail: Some(detail), millis: elapsed(t), ..Record::new("lemma", Status::from_bool(bad.is_empty())) });
    }
}

fn bsets(cfg: &ExperimentConfig, m: &Module, verify: bool, report: &mut Report) {
    let q = m.ring().q();
    if !verify {
        for s in enumerate_bsets(m.partition(), false) {
            let mut r = Record::new("bset", Status::Info);
            r.detail = Some(format!("{s} has {} elements", s.size(m.partition(), q)));
            report.records.push(r);
        }
        return;
    }
    let t = Instant::now();
    let v = match verify_bsets(m, false, cfg.cap_elements) {
        Ok(v) => v,
        Err(e) => return report.records.push(error_record("bset", None, e)),
    };
    let mut push = |what: &str, bad: &[String]| {
        let mut detail = format!("{what}: {} pairs, {} mismatches", v.pairs, bad.len());
        if let Some(b) = bad.first() {
            detail += &format!("; first: {b}");
        }
        report.records.push(Record { detail: Some(detail), millis: elapsed(t), ..Record::new("bset", Status::from_bool(bad.is_empty())) });
    };
    push("sizes", &v.size_mismatches);
    push("intersection", &v.intersect_mismatches);
    if let Some(rejected) = v.even_prime_rejected {
        let mut r = Record::new("bset", Status::from_bool(rejected));
        r.detail = Some("sum rejected for p = 2".into());
        report.records.push(r);
    } else {
        push("sum", &v.sum_mismatches);
    }
}
