mod common;

use std::collections::BTreeSet;

use common::*;
use plexdist::comm::{stage, CommWorld};
use plexdist::distribute::{
    distribute, partition, redistribute, relabel, DistributeOptions, PartitionMethod,
};
use plexdist::invariants::{check_distributed, serial_ids, tag_serial_ids};
use plexdist::meshgen::{gen_box_2d, gen_box_3d, gen_doublet};
use plexdist::overlap::{create_overlap, distribute_overlap};
use plexdist::plex::{Adjacency, Plex};
use proptest::prelude::*;

fn owned_cell_ids(d: &plexdist::distribute::DistributedMesh) -> Vec<BTreeSet<usize>> {
    (0..d.nranks())
        .map(|r| {
            let ids = serial_ids(&d.plexes[r]).unwrap();
            d.owned_cells(r).into_iter().map(|c| ids[c]).collect()
        })
        .collect()
}

#[test]
fn fe_level_one_is_closure_of_star() {
    for (mesh, p) in [(gen_box_2d(4).unwrap(), 3), (gen_box_3d(2).unwrap(), 4), (gen_box_2d(3).unwrap(), 2)] {
        let case = distribute_case(mesh, p, &PartitionMethod::GreedyBfs);
        let dag = Dag::new(&case.serial);
        let o = distribute_overlap(&case.world, &case.dist, 1, Adjacency::Fe).unwrap();
        let held = held_ids(&case.dist);
        for (r, got) in held_ids(&o).iter().enumerate() {
            let want = dag.closure(dag.star(held[r].iter().copied()));
            assert_eq!(got, &want, "rank {r} of {p}");
        }
    }
}

#[test]
fn levels_are_monotone() {
    let case = distribute_case(gen_box_2d(6).unwrap(), 4, &PartitionMethod::GreedyBfs);
    for kind in [Adjacency::Fe, Adjacency::Fv] {
        let mut prev = held_ids(&case.dist);
        for levels in 1..=3 {
            let o = distribute_overlap(&case.world, &case.dist, levels, kind).unwrap();
            let now = held_ids(&o);
            for r in 0..4 {
                assert!(prev[r].is_subset(&now[r]), "{kind:?} level {levels} rank {r}");
            }
            prev = now;
        }
    }
}

#[test]
fn fe_level_one_sends_only_needed_points() {
    let case = distribute_case(gen_box_3d(3).unwrap(), 3, &PartitionMethod::GreedyBfs);
    let dag = Dag::new(&case.serial);
    let before = held_ids(&case.dist);
    let o = distribute_overlap(&case.world, &case.dist, 1, Adjacency::Fe).unwrap();
    for (r, after) in held_ids(&o).iter().enumerate() {
        // Anchored at the receiver's partition, ghosts of its cells included.
        let reach = dag.closure(dag.star(before[r].iter().copied()));
        for q in after.difference(&before[r]) {
            assert!(reach.contains(q), "rank {r} received {q} which its partition does not need");
        }
    }
}

#[test]
fn fv_donations_are_cells_across_the_cut() {
    let case = distribute_case(gen_box_2d(4).unwrap(), 2, &PartitionMethod::Chunk);
    let dag = Dag::new(&case.serial);
    let fv = create_overlap(&case.world, &case.dist, 1, Adjacency::Fv).unwrap();
    let fe = create_overlap(&case.world, &case.dist, 1, Adjacency::Fe).unwrap();
    let cells: BTreeSet<usize> = dag.cells().into_iter().collect();
    for s in 0..2 {
        let other = &case.cells_of[1 - s];
        let ids = serial_ids(&case.dist.plexes[s]).unwrap();
        let donated = |l: &plexdist::datalayout::Label| -> BTreeSet<usize> {
            l.stratum((1 - s) as i32).into_iter().map(|p| ids[p]).collect()
        };
        let want: BTreeSet<usize> = case.cells_of[s]
            .iter()
            .copied()
            .filter(|&c| {
                dag.cones[c]
                    .iter()
                    .any(|&f| dag.supports[f].iter().any(|d| other.contains(d)))
            })
            .collect();
        let fv_set = donated(&fv[s]);
        let fv_cells: BTreeSet<usize> = fv_set.intersection(&cells).copied().collect();
        assert_eq!(fv_cells, want, "rank {s}");
        assert!(fv_set.is_subset(&donated(&fe[s])));
    }
}

#[test]
fn doublet_overlap_everywhere() {
    let w = CommWorld::new(2).unwrap();
    let mut m = gen_doublet();
    tag_serial_ids(&mut m);
    let opts = DistributeOptions {
        overlap: 1,
        ..Default::default()
    };
    let d = distribute(&w, &m, &opts).unwrap();
    for (r, held) in held_ids(&d).iter().enumerate() {
        assert_eq!(held.len(), 11, "rank {r}");
    }
    assert!(check_distributed(&d, Some(&m)).is_empty());
    assert!(w.total_sent(&[stage::OVERLAP]) > 0);
}

#[test]
fn redistribution_is_idempotent() {
    for (mut m, p) in [(gen_box_2d(6).unwrap(), 3), (gen_box_2d(8).unwrap(), 4), (gen_box_3d(2).unwrap(), 2)] {
        tag_serial_ids(&mut m);
        for method in [PartitionMethod::Chunk, PartitionMethod::GreedyBfs] {
            let w = CommWorld::new(p).unwrap();
            let opts = DistributeOptions {
                method: method.clone(),
                ..Default::default()
            };
            let d = distribute(&w, &m, &opts).unwrap();
            let r = redistribute(&w, &d, &method).unwrap();
            assert_eq!(owned_cell_ids(&d), owned_cell_ids(&r), "{method:?} on {p} ranks");
            assert!(check_distributed(&r, Some(&m)).is_empty());
        }
    }
}

#[test]
fn identity_redistribution_keeps_the_mesh() {
    let mut m = gen_box_3d(2).unwrap();
    tag_serial_ids(&mut m);
    let w = CommWorld::new(2).unwrap();
    let opts = DistributeOptions {
        method: PartitionMethod::GreedyBfs,
        ..Default::default()
    };
    let d = distribute(&w, &m, &opts).unwrap();
    // Cells reach the partitioner in global-id order, which is rank-major.
    let counts = d.owned_cell_counts();
    let identity = PartitionMethod::Explicit((0..2).flat_map(|r| vec![r; counts[r]]).collect());
    let r = redistribute(&w, &d, &identity).unwrap();
    assert_eq!(held_ids(&r), held_ids(&d));
    assert_eq!(owned_ids(&r), owned_ids(&d));
}

#[test]
fn ledger_is_deterministic() {
    let m = gen_box_3d(3).unwrap();
    let run = || {
        let w = CommWorld::new(3).unwrap();
        let opts = DistributeOptions {
            method: PartitionMethod::GreedyBfs,
            overlap: 1,
            adjacency: Adjacency::Fe,
        };
        let d = distribute(&w, &m, &opts).unwrap();
        (w.ledger(), d)
    };
    let (l1, d1) = run();
    let (l2, d2) = run();
    assert_eq!(l1, l2);
    assert_eq!(d1, d2);
    assert!(l1.total_sent(stage::MIGRATION) > 0);
    assert!(l1.total_sent(stage::PARTITION) > 0);
}

#[test]
fn relabeled_doublet_matches_owner_rule() {
    let w = CommWorld::new(2).unwrap();
    let mut m = gen_doublet();
    tag_serial_ids(&mut m);
    let label = relabel(&partition(&m, 2, &PartitionMethod::Chunk).unwrap(), &[1, 0]).unwrap();
    let d = plexdist::distribute::distribute_by_label(&w, &m, &label, 0, Adjacency::Fv).unwrap();
    let owned = owned_ids(&d);
    assert_eq!(owned[0], set(&[B, DELTA, EC, ED]));
    assert_eq!(owned[1], set(&[A, ALPHA, BETA, GAMMA, EA, EB, EE]));
}

fn mesh_strategy() -> impl Strategy<Value = (Plex, usize, u64)> {
    (1usize..5, prop::bool::ANY, 1usize..6, any::<u64>()).prop_map(|(n, three, p, seed)| {
        let m = if three { gen_box_3d(n.min(2)).unwrap() } else { gen_box_2d(n).unwrap() };
        (m, p, seed)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_distributions_are_valid((m, p, seed) in mesh_strategy(), levels in 0usize..3, fe in any::<bool>()) {
        let mut m = m;
        tag_serial_ids(&mut m);
        let w = CommWorld::new(p).unwrap();
        let opts = DistributeOptions {
            method: PartitionMethod::Random { seed },
            overlap: levels,
            adjacency: if fe { Adjacency::Fe } else { Adjacency::Fv },
        };
        let d = distribute(&w, &m, &opts).unwrap();
        let v = check_distributed(&d, Some(&m));
        prop_assert!(v.is_empty(), "{:?}", v.first());
        let union: BTreeSet<usize> = held_ids(&d).into_iter().flatten().collect();
        prop_assert_eq!(union.len(), m.num_points());
    }

    #[test]
    fn redistribution_stays_valid(n in 2usize..6, p in 2usize..5, seed in any::<u64>()) {
        let mut m = gen_box_2d(n).unwrap();
        tag_serial_ids(&mut m);
        let w = CommWorld::new(p).unwrap();
        let opts = DistributeOptions { method: PartitionMethod::Random { seed }, ..Default::default() };
        let d = distribute(&w, &m, &opts).unwrap();
        let r = redistribute(&w, &d, &PartitionMethod::GreedyBfs).unwrap();
        prop_assert!(check_distributed(&r, Some(&m)).is_empty());
        let counts = r.owned_cell_counts();
        prop_assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
    }
}
