//! Overlap construction and overlap migration.
//!
//! Donations are computed from local adjacency only: a rank labels the
//! adjacency of every point it shares with the ranks sharing it, grows the
//! label by further adjacency passes and closes it. The donated points are
//! then migrated together with every retained point, so existing data is
//! carried along by the same star forest.

use std::collections::BTreeSet;

use crate::comm::{stage, CommWorld};
use crate::datalayout::{Label, Section};
use crate::distribute::{migrate_by_label, partition_label_closure, retain_all, DistributedMesh, Stages};
use crate::error::{invalid, Result};
use crate::migrate::{migrate_data, OwnershipRule};
use crate::plex::{canonical_stratum_key, Adjacency, Plex};
use crate::starforest::DistributedSf;
use crate::Point;

/// Replace every stratum by its union with the adjacency of its points.
pub fn partition_label_adjacency(m: &Plex, label: &Label, kind: Adjacency) -> Label {
    let mut out = Label::new();
    for (v, set) in label.iter() {
        let mut grown: BTreeSet<Point> = BTreeSet::new();
        for &p in set {
            m.adjacency_into(p, kind, &mut grown);
        }
        out.extend(v, grown);
    }
    out
}

/// Per-rank donation labels: value = receiving rank, points = local
/// points sent to it. Closed under cone; no rank donates to itself.
pub fn create_overlap(
    world: &CommWorld,
    mesh: &DistributedMesh,
    levels: usize,
    kind: Adjacency,
) -> Result<Vec<Label>> {
    if levels == 0 {
        return invalid("overlap needs at least one level");
    }
    let p = world.size();
    let sf = &mesh.point_sf;
    let roots = sf.compute_ownership(world, stage::OVERLAP)?;

    // Leaves learn the full sharer list of their root, indexed by leaf point.
    let sections: Vec<Section> = roots.iter().map(|r| r.degree.clone()).collect();
    let ranks: Vec<Vec<i32>> = roots
        .iter()
        .map(|r| r.leaf_ranks.iter().map(|&x| x as i32).collect())
        .collect();
    let (leaf_secs, leaf_ranks) = migrate_data(world, stage::OVERLAP, sf, &sections, &ranks)?;

    let mut out = Vec::with_capacity(p);
    for r in 0..p {
        let m = &mesh.plexes[r];
        let mut label = Label::new();
        let donate = |q: Point, to: usize, label: &mut Label| {
            if to != r {
                let mut adj = BTreeSet::new();
                m.adjacency_into(q, kind, &mut adj);
                label.extend(to as i32, adj);
            }
        };
        // Receive side: a ghost is shared with its owner and co-sharers.
        let f = sf.forest(r);
        for (q, rp) in f.iter() {
            donate(q, rp.rank, &mut label);
            for &s in &leaf_ranks[r][leaf_secs[r].range(q)] {
                donate(q, s as usize, &mut label);
            }
        }
        // Send side: an owned point is shared with every rank mirroring it.
        for q in 0..m.num_points() {
            for &s in roots[r].ranks_of(q) {
                donate(q, s, &mut label);
            }
        }
        for _ in 1..levels {
            label = partition_label_adjacency(m, &label, kind);
        }
        let mut closed = partition_label_closure(m, &label);
        for q in closed.stratum(r as i32) {
            closed.remove(r as i32, q);
        }
        out.push(closed);
    }
    Ok(out)
}

/// Permute the leaves of a migration forest so each target chart lists
/// its points in canonical stratum order, keeping the received order
/// within a stratum. One broadcast of sender depths.
pub fn stratify_migration_sf(
    world: &CommWorld,
    stage: &str,
    plexes: &[Plex],
    sf: &DistributedSf,
) -> Result<DistributedSf> {
    let depths: Vec<Vec<i32>> = plexes
        .iter()
        .map(|m| m.depths().iter().map(|&d| d as i32).collect())
        .collect();
    let incoming = sf.bcast(world, stage, &depths)?;
    let local_max: Vec<i32> = plexes
        .iter()
        .map(|m| if m.num_points() == 0 { -1 } else { m.depth() as i32 })
        .collect();
    let max_depth = world.allgather(stage, &local_max)?.into_iter().max().unwrap_or(-1).max(0) as usize;
    let leaves = incoming
        .iter()
        .map(|d| {
            let mut order: Vec<usize> = (0..d.len()).collect();
            order.sort_by_key(|&i| canonical_stratum_key(d[i] as usize, max_depth));
            let mut leaf = vec![0; d.len()];
            for (new, i) in order.into_iter().enumerate() {
                leaf[i] = new;
            }
            leaf
        })
        .collect();
    sf.with_leaf_indices(leaves)
}

/// Grow a distributed mesh by `levels` layers of overlap. Every rank keeps
/// its points; owners stay owners and new copies become ghosts.
pub fn distribute_overlap(
    world: &CommWorld,
    mesh: &DistributedMesh,
    levels: usize,
    kind: Adjacency,
) -> Result<DistributedMesh> {
    let send = create_overlap(world, mesh, levels, kind)?;
    let retained: Vec<Label> = (0..mesh.nranks())
        .map(|r| retain_all(r, &mesh.plexes[r], mesh.point_sf.forest(r)))
        .collect();
    migrate_by_label(
        world,
        Stages::OVERLAP,
        mesh,
        &send,
        Some(&retained),
        OwnershipRule::KeepRootOwner,
    )
}
