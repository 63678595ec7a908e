//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::collections::BTreeSet;

use common::*;
use plexdist::comm::{compare_volumes, predict_volumes, stage, CommWorld};
use plexdist::datalayout::{Label, Section};
use plexdist::distribute::{
    distribute, distribute_by_label, imbalance, partition_label_closure, partition_label_invert,
    redistribute, resolve_shared_points, DistributeOptions, DistributedMesh, PartitionMethod,
};
use plexdist::invariants::{check_distributed, serial_ids, tag_serial_ids};
use plexdist::meshgen::{box_2d_counts, box_3d_counts, gen_box_2d, gen_box_3d, gen_doublet};
use plexdist::migrate::distribute_section;
use plexdist::overlap::distribute_overlap;
use plexdist::plex::{uniform_refine_2d, Adjacency, Plex, BOUNDARY};
use plexdist::starforest::{create_section_sf, DistributedSf, RemotePoint, StarForest};

type Outcome = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn doublet_queries() -> Outcome {
    let m = gen_doublet();
    let cone: BTreeSet<usize> = m.cone(A).unwrap().iter().copied().collect();
    ensure(cone == set(&[EA, EB, EE]), || format!("cone(A) = {cone:?}"))?;
    let supp: BTreeSet<usize> = m.support(BETA).unwrap().iter().copied().collect();
    ensure(supp == set(&[EA, EC, EE]), || format!("supp(beta) = {supp:?}"))?;
    let cl: BTreeSet<usize> = m.closure(A).unwrap().into_iter().collect();
    ensure(cl == set(&[A, EA, EB, EE, ALPHA, BETA, GAMMA]), || format!("cl(A) = {cl:?}"))?;
    let st: BTreeSet<usize> = m.star(BETA).unwrap().into_iter().collect();
    ensure(st == set(&[BETA, EA, EC, EE, A, B]), || format!("st(beta) = {st:?}"))
}

fn doublet_distribution() -> Outcome {
    let mut m = gen_doublet();
    tag_serial_ids(&mut m);
    let mut part = Label::new();
    part.insert(0, B);
    part.insert(1, A);

    // Sender side with shared points given to the highest bidder.
    let resolved = resolve_shared_points(&partition_label_closure(&m, &part));
    let (s_part, points) = resolved.to_section(0..2).map_err(|e| e.to_string())?;
    let layout = [(s_part.dof(0), s_part.offset(0)), (s_part.dof(1), s_part.offset(1))];
    ensure(layout == [(4, 0), (7, 4)], || format!("S_part = {layout:?}"))?;
    let w = CommWorld::new(2).unwrap();
    let plexes = vec![m.clone(), Plex::default()];
    let inv = partition_label_invert(&w, "check", &plexes, &[resolved, Label::new()], &DistributedSf::empty(&[11, 0]))
        .map_err(|e| e.to_string())?;
    let r0: BTreeSet<usize> = inv[0].stratum(0).into_iter().collect();
    let r1: BTreeSet<usize> = inv[1].stratum(0).into_iter().collect();
    ensure(r0 == set(&[B, EC, ED, DELTA]), || format!("rank 0 receives {r0:?}"))?;
    ensure(r1 == set(&[A, EA, EB, EE, ALPHA, BETA, GAMMA]), || format!("rank 1 receives {r1:?}"))?;
    ensure(points.len() == 11, || format!("{} labeled points", points.len()))?;

    // The full pipeline: rank 0 mirrors e, beta, gamma from rank 1.
    let w = CommWorld::new(2).unwrap();
    let d = distribute_by_label(&w, &m, &part, 0, Adjacency::Fv).map_err(|e| e.to_string())?;
    let f0 = d.point_sf.forest(0);
    ensure(f0.nleaves() == 3 && d.point_sf.forest(1).nleaves() == 0, || {
        format!("leaf counts {} and {}", f0.nleaves(), d.point_sf.forest(1).nleaves())
    })?;
    let ids0 = serial_ids(&d.plexes[0]).ok_or("rank 0 lost serial ids")?;
    let ids1 = serial_ids(&d.plexes[1]).ok_or("rank 1 lost serial ids")?;
    let mut pairs = BTreeSet::new();
    for (l, rp) in f0.iter() {
        ensure(rp.rank == 1, || format!("leaf {l} targets rank {}", rp.rank))?;
        pairs.insert((ids0[l], ids1[rp.index]));
    }
    let want: BTreeSet<(usize, usize)> = [(EE, EE), (BETA, BETA), (GAMMA, GAMMA)].into();
    ensure(pairs == want, || format!("shared points {pairs:?}"))
}

fn section_pushforward() -> Outcome {
    // Rank 0: c, d, f, eps, delta, phi. Rank 1: a, b, e, alpha, beta, gamma.
    let (f, eps, phi) = (2, 3, 5);
    let (e, beta, gamma) = (2, 4, 5);
    let forward = StarForest::new(
        6,
        Some(vec![f, eps, phi]),
        vec![RemotePoint::new(1, e), RemotePoint::new(1, beta), RemotePoint::new(1, gamma)],
    )
    .unwrap();
    let backward = StarForest::new(
        6,
        Some(vec![e, beta, gamma]),
        vec![RemotePoint::new(0, f), RemotePoint::new(0, eps), RemotePoint::new(0, phi)],
    )
    .unwrap();
    let layout = Section::from_dofs(0, vec![2, 2, 2, 3, 3, 3]);
    let sections = vec![layout.clone(), layout.clone()];
    let listing = |sf: &DistributedSf, r: usize| -> Result<Vec<(usize, usize, usize)>, String> {
        let w = CommWorld::new(2).unwrap();
        let (remote, _) = distribute_section(&w, "dof", sf, &sections).map_err(|e| e.to_string())?;
        let dof = create_section_sf(sf, &sections, &remote, &sections).map_err(|e| e.to_string())?;
        Ok(dof.forest(r).sorted_leaves().into_iter().map(|(l, rp)| (l, rp.index, rp.rank)).collect())
    };
    let sf0 = DistributedSf::new(2, vec![forward, StarForest::empty(6)]).unwrap();
    let got0 = listing(&sf0, 0)?;
    let want0 = vec![(4, 4, 1), (5, 5, 1), (6, 9, 1), (7, 10, 1), (8, 11, 1), (12, 12, 1), (13, 13, 1), (14, 14, 1)];
    ensure(got0 == want0, || format!("rank 0 dof forest {got0:?}"))?;
    let sf1 = DistributedSf::new(2, vec![StarForest::empty(6), backward]).unwrap();
    let got1 = listing(&sf1, 1)?;
    let want1 = vec![(4, 4, 0), (5, 5, 0), (9, 6, 0), (10, 7, 0), (11, 8, 0), (12, 12, 0), (13, 13, 0), (14, 14, 0)];
    ensure(got1 == want1, || format!("rank 1 dof forest {got1:?}"))
}

fn volume_model() -> Outcome {
    let v = predict_volumes(12_582_912, 25_264_128, 14_827_904, 2_146_689);
    ensure(v.partition == 1_096_432_660, || format!("Vpartition = {}", v.partition))?;
    ensure(v.migration == 3_069_225_024, || format!("Vmigration = {}", v.migration))?;
    for unit in [1e9, (1u64 << 30) as f64] {
        let part = v.partition as f64 / (1.1 * unit);
        let mig = v.migration as f64 / (2.8 * unit);
        ensure((part - 1.0).abs() <= 0.1 && (mig - 1.0).abs() <= 0.1, || {
            format!("ratios {part:.3} and {mig:.3} for a GB of {unit}")
        })?;
    }
    Ok(())
}

fn mesh_counts() -> Outcome {
    let c = box_3d_counts(128);
    let got = (c.cells, c.faces, c.edges, c.vertices);
    ensure(got == (12_582_912, 25_264_128, 14_827_904, 2_146_689), || format!("n=128 counts {got:?}"))?;
    for n in 1..=4 {
        let m = gen_box_3d(n).map_err(|e| e.to_string())?;
        let k = simplex_counts(&cell_vertices(&m));
        let c = box_3d_counts(n as u64);
        let built = m.counts();
        let enumerated = (k[3] as u64, k[2] as u64, k[1] as u64, k[0] as u64);
        ensure(enumerated == (c.cells, c.faces, c.edges, c.vertices), || format!("3D n={n} enumerated {enumerated:?}"))?;
        let built = (built.cells as u64, built.faces as u64, built.edges as u64, built.vertices as u64);
        ensure(built == enumerated, || format!("3D n={n} built {built:?}"))?;
        let chi = k[0] as i64 - k[1] as i64 + k[2] as i64 - k[3] as i64;
        ensure(chi == 1 && m.euler_characteristic() == 1, || format!("3D n={n} chi {chi}"))?;

        let m = gen_box_2d(n).map_err(|e| e.to_string())?;
        let k = simplex_counts(&cell_vertices(&m));
        let c = box_2d_counts(n as u64);
        ensure((k[2] as u64, k[1] as u64, k[0] as u64) == (c.cells, c.edges, c.vertices), || format!("2D n={n} {k:?}"))?;
        ensure(k[0] + k[2] == k[1] + 1 && m.euler_characteristic() == 1, || format!("2D n={n} chi"))?;
    }
    Ok(())
}

fn measured_volume() -> Outcome {
    let m = gen_box_3d(8).map_err(|e| e.to_string())?;
    let c = m.counts();
    let p = predict_volumes(c.cells as u64, c.faces as u64, c.edges as u64, c.vertices as u64);
    let mut ledgers = Vec::new();
    for _ in 0..2 {
        let w = CommWorld::new(2).unwrap();
        distribute(&w, &m, &DistributeOptions::default()).map_err(|e| e.to_string())?;
        let cmp = compare_volumes(p.distribution_total(), &w, &[stage::PARTITION, stage::MIGRATION]);
        ensure(cmp.within(0.2), || format!("measured {} predicted {}", cmp.measured, cmp.predicted))?;
        ledgers.push(w.ledger());
    }
    ensure(ledgers[0] == ledgers[1], || "ledgers differ between runs".into())
}

fn overlap_cases() -> Vec<(String, Plex, usize)> {
    let mut out = Vec::new();
    for n in [2, 4, 8] {
        for p in [2, 3, 4, 8] {
            out.push((format!("2D n={n} P={p}"), gen_box_2d(n).unwrap(), p));
        }
    }
    for n in [2, 4] {
        for p in [2, 3, 4, 8] {
            out.push((format!("3D n={n} P={p}"), gen_box_3d(n).unwrap(), p));
        }
    }
    out
}

/// Runs every overlap configuration, returning all pipeline outputs for
/// the invariant criterion.
fn overlap_oracle_equivalence(outputs: &mut Vec<(String, DistributedMesh, Plex)>) -> Outcome {
    for (name, mesh, p) in overlap_cases() {
        let case = distribute_case(mesh, p, &PartitionMethod::GreedyBfs);
        outputs.push((format!("{name} distributed"), case.dist.clone(), case.serial.clone()));
        for kind in [Adjacency::Fe, Adjacency::Fv] {
            for levels in [1, 2] {
                let o = distribute_overlap(&case.world, &case.dist, levels, kind).map_err(|e| e.to_string())?;
                let got = held_ids(&o);
                let want = overlap_oracle(&case.serial, &case.cells_of, levels, kind);
                ensure(got == want, || format!("{name} {kind:?} levels={levels}: point sets differ"))?;
                outputs.push((format!("{name} {kind:?} levels={levels}"), o, case.serial.clone()));
            }
        }
    }
    Ok(())
}

fn invariant_suite(outputs: &[(String, DistributedMesh, Plex)]) -> Outcome {
    ensure(!outputs.is_empty(), || "no pipeline outputs to check".into())?;
    for (name, d, serial) in outputs {
        let v = check_distributed(d, Some(serial));
        ensure(v.is_empty(), || format!("{name}: {}", v[0]))?;
    }
    Ok(())
}

fn redistribution_balance(outputs: &mut Vec<(String, DistributedMesh, Plex)>) -> Outcome {
    let mut m = gen_box_2d(16).map_err(|e| e.to_string())?;
    tag_serial_ids(&mut m);
    let w = CommWorld::new(4).unwrap();
    let opts = DistributeOptions {
        method: PartitionMethod::Random { seed: 1 },
        ..Default::default()
    };
    let d = distribute(&w, &m, &opts).map_err(|e| e.to_string())?;
    let r = redistribute(&w, &d, &PartitionMethod::GreedyBfs).map_err(|e| e.to_string())?;
    let before = d.owned_cell_counts();
    let after = r.owned_cell_counts();
    let bound = 1.25 * (512.0 / 4.0);
    ensure((*after.iter().max().unwrap() as f64) <= bound, || format!("owned cells after {after:?}"))?;
    ensure(imbalance(&after) < imbalance(&before), || format!("before {before:?} after {after:?}"))?;
    outputs.push(("random distribution".into(), d, m.clone()));
    outputs.push(("redistribution".into(), r, m));
    Ok(())
}

fn refinement() -> Outcome {
    for n in [1, 2, 4] {
        let mut m = gen_box_2d(n).map_err(|e| e.to_string())?;
        for level in 1..=2 {
            let cells = m.cells().len();
            m = uniform_refine_2d(&m).map_err(|e| e.to_string())?;
            ensure(m.cells().len() == 4 * cells, || format!("n={n} level {level}: {} cells", m.cells().len()))?;
            ensure(m.euler_characteristic() == 1, || format!("n={n} level {level}: chi"))?;
            let mut fresh = m.clone();
            fresh.mark_boundary();
            ensure(m.label(BOUNDARY) == fresh.label(BOUNDARY), || format!("n={n} level {level}: boundary label"))?;
        }
    }
    Ok(())
}

fn main() {
    let mut outputs = Vec::new();
    let c2_mesh = {
        let mut m = gen_doublet();
        tag_serial_ids(&mut m);
        let w = CommWorld::new(2).unwrap();
        let mut part = Label::new();
        part.insert(0, B);
        part.insert(1, A);
        distribute_by_label(&w, &m, &part, 1, Adjacency::Fv).map(|d| (d, m))
    };
    if let Ok((d, m)) = c2_mesh {
        outputs.push(("doublet with overlap".into(), d, m));
    }

    let c7 = overlap_oracle_equivalence(&mut outputs);
    let c9 = redistribution_balance(&mut outputs);
    let results: Vec<(&str, Outcome)> = vec![
        ("doublet golden queries", doublet_queries()),
        ("doublet distribution example", doublet_distribution()),
        ("section push-forward", section_pushforward()),
        ("volume model", volume_model()),
        ("mesh counts", mesh_counts()),
        ("measured vs model volume", measured_volume()),
        ("overlap oracle equivalence", c7),
        ("invariant suite", invariant_suite(&outputs)),
        ("redistribution balance", c9),
        ("refinement properties", refinement()),
    ];
    let mut failed = 0;
    for (i, (name, r)) in results.iter().enumerate() {
        match r {
            Ok(()) => println!("criterion {}: PASS {name}", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {e}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
