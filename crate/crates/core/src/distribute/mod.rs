//! Partitioning, one-to-all distribution and many-to-many redistribution.
//!
//! Both drivers run the same pipeline on a sender-side partition label:
//! invert it into receiver-side labels, build and stratify the migration
//! forest, migrate the meshes through a global numbering and derive the
//! new point star forest.

mod label;
mod partition;

use std::collections::HashMap;

use crate::comm::{decode, encode, stage, CommWorld, Outgoing};
use crate::datalayout::Label;
use crate::error::{Error, Result};
use crate::migrate::{create_global_numbering, migrate_mesh, migrate_sf, OwnershipRule};
use crate::overlap::{distribute_overlap, stratify_migration_sf};
use crate::plex::{Adjacency, Plex};
use crate::starforest::DistributedSf;
use crate::Point;

pub use label::{
    partition_label_closure, partition_label_create_sf, partition_label_invert, process_sf,
    resolve_shared_points,
};
pub(crate) use label::{merge, retain_all};
pub use partition::{imbalance, partition, relabel, CellGraph, PartitionMethod, Partitioner};

/// One local mesh per rank plus the point star forest tying shared points
/// to their owners.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributedMesh {
    pub plexes: Vec<Plex>,
    pub point_sf: DistributedSf,
}

impl DistributedMesh {
    /// A serial mesh held by rank 0 of `nranks`.
    pub fn serial(m: Plex, nranks: usize) -> Self {
        let mut plexes = vec![m];
        plexes.resize_with(nranks, Plex::default);
        let sizes: Vec<usize> = plexes.iter().map(Plex::num_points).collect();
        Self {
            point_sf: DistributedSf::empty(&sizes),
            plexes,
        }
    }

    pub fn nranks(&self) -> usize {
        self.plexes.len()
    }

    /// Local points of `rank` that are not leaves of the point forest.
    pub fn owned_points(&self, rank: usize) -> Vec<Point> {
        let mut owned = vec![true; self.plexes[rank].num_points()];
        for (p, _) in self.point_sf.forest(rank).iter() {
            owned[p] = false;
        }
        (0..owned.len()).filter(|&p| owned[p]).collect()
    }

    pub fn owned_cells(&self, rank: usize) -> Vec<Point> {
        let cells = self.plexes[rank].cells();
        self.owned_points(rank).into_iter().filter(|p| cells.contains(p)).collect()
    }

    pub fn owned_cell_counts(&self) -> Vec<usize> {
        (0..self.nranks()).map(|r| self.owned_cells(r).len()).collect()
    }
}

/// Ledger stage used by each step of the migration pipeline.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stages<'a> {
    pub invert: &'a str,
    pub stratify: &'a str,
    pub numbering: &'a str,
    pub migrate: &'a str,
    pub ownership: &'a str,
}

impl Stages<'static> {
    pub const DISTRIBUTE: Self = Self {
        invert: stage::PARTITION,
        stratify: stage::PARTITION,
        numbering: stage::MIGRATION,
        migrate: stage::MIGRATION,
        ownership: stage::OWNERSHIP,
    };
    pub const REDISTRIBUTE: Self = Self {
        invert: stage::REDISTRIBUTION,
        stratify: stage::REDISTRIBUTION,
        numbering: stage::INVERSION,
        migrate: stage::REDISTRIBUTION,
        ownership: stage::REDISTRIBUTION,
    };
    pub const OVERLAP: Self = Self {
        invert: stage::OVERLAP,
        stratify: stage::OVERLAP,
        numbering: stage::OVERLAP,
        migrate: stage::OVERLAP,
        ownership: stage::OVERLAP,
    };
}

/// Move the mesh as described by closed sender-side labels. `retained`
/// adds receiver-side points each rank keeps without communication.
pub(crate) fn migrate_by_label(
    world: &CommWorld,
    stages: Stages,
    mesh: &DistributedMesh,
    send: &[Label],
    retained: Option<&[Label]>,
    rule: OwnershipRule,
) -> Result<DistributedMesh> {
    let mut receivers = partition_label_invert(world, stages.invert, &mesh.plexes, send, &mesh.point_sf)?;
    if let Some(keep) = retained {
        receivers = receivers.iter().zip(keep).map(|(a, b)| merge(a, b)).collect();
    }
    let sf = partition_label_create_sf(&mesh.plexes, &receivers)?;
    let sf = stratify_migration_sf(world, stages.stratify, &mesh.plexes, &sf)?;
    let numbering = create_global_numbering(world, stages.numbering, &mesh.plexes, &mesh.point_sf)?;
    let l2g: Vec<Vec<usize>> = numbering.into_iter().map(|g| g.globals).collect();
    let plexes = migrate_mesh(world, stages.migrate, &mesh.plexes, &sf, &l2g)?;
    let point_sf = migrate_sf(world, stages.ownership, &sf, rule)?;
    Ok(DistributedMesh { plexes, point_sf })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistributeOptions {
    pub method: PartitionMethod,
    /// Overlap levels added after the distribution; 0 for none.
    pub overlap: usize,
    pub adjacency: Adjacency,
}

impl Default for DistributeOptions {
    fn default() -> Self {
        Self {
            method: PartitionMethod::Chunk,
            overlap: 0,
            adjacency: Adjacency::Fv,
        }
    }
}

/// Distribute a serial mesh from rank 0 to every rank of `world`.
pub fn distribute(world: &CommWorld, serial: &Plex, opts: &DistributeOptions) -> Result<DistributedMesh> {
    distribute_with(world, serial, &opts.method, opts.overlap, opts.adjacency)
}

/// As [`distribute`], with any partitioner.
pub fn distribute_with(
    world: &CommWorld,
    serial: &Plex,
    partitioner: &dyn Partitioner,
    overlap: usize,
    adjacency: Adjacency,
) -> Result<DistributedMesh> {
    let p = world.size();
    let cells = partition(serial, p, partitioner)?;
    distribute_by_label(world, serial, &cells, overlap, adjacency)
}

/// Distribute with an explicit cell partition label on the serial mesh.
pub fn distribute_by_label(
    world: &CommWorld,
    serial: &Plex,
    cells: &Label,
    overlap: usize,
    adjacency: Adjacency,
) -> Result<DistributedMesh> {
    let p = world.size();
    let mesh = DistributedMesh::serial(serial.clone(), p);
    let mut send = vec![Label::new(); p];
    send[0] = partition_label_closure(serial, cells);
    let out = migrate_by_label(world, Stages::DISTRIBUTE, &mesh, &send, None, OwnershipRule::Vote)?;
    if overlap > 0 {
        distribute_overlap(world, &out, overlap, adjacency)
    } else {
        Ok(out)
    }
}

const TAG_GRAPH: u32 = 11;
const TAG_PARTS: u32 = 12;

/// Repartition a distributed mesh. Owned cells are gathered on rank 0 as
/// `(global id, facet global ids)` records, partitioned there, and the
/// assignment is sent back; the mesh then moves with the distribution
/// pipeline.
pub fn redistribute(
    world: &CommWorld,
    mesh: &DistributedMesh,
    partitioner: &dyn Partitioner,
) -> Result<DistributedMesh> {
    let p = world.size();
    if mesh.nranks() != p {
        return Err(Error::ContractViolation("one local mesh per rank expected".into()));
    }
    let numbering = create_global_numbering(world, stage::INVERSION, &mesh.plexes, &mesh.point_sf)?;
    let owned_cells: Vec<Vec<Point>> = (0..p).map(|r| mesh.owned_cells(r)).collect();

    let outgoing = (0..p)
        .map(|r| {
            let m = &mesh.plexes[r];
            let g = &numbering[r].globals;
            let mut rec: Vec<i32> = Vec::new();
            for &c in &owned_cells[r] {
                let cone = m.cone_raw(c);
                rec.push(g[c] as i32);
                rec.push(cone.len() as i32);
                rec.extend(cone.iter().map(|&f| g[f] as i32));
            }
            vec![Outgoing::new(0, TAG_GRAPH, encode(&rec))]
        })
        .collect();
    let inbox = world.exchange(stage::REDISTRIBUTION, outgoing)?;

    // Rank 0: cells in global id order, neighbors through shared facets.
    let mut records: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    for msg in &inbox[0] {
        let rec = decode::<i32>(&msg.payload);
        let mut i = 0;
        while i < rec.len() {
            let n = rec[i + 1] as usize;
            let facets = rec[i + 2..i + 2 + n].iter().map(|&x| x as usize).collect();
            records.push((rec[i] as usize, msg.source, facets));
            i += 2 + n;
        }
    }
    records.sort_by_key(|r| r.0);
    let mut by_facet: HashMap<usize, Vec<usize>> = HashMap::new();
    for (k, (_, _, facets)) in records.iter().enumerate() {
        for &f in facets {
            by_facet.entry(f).or_default().push(k);
        }
    }
    let lists = records
        .iter()
        .map(|(_, _, facets)| facets.iter().flat_map(|f| by_facet[f].iter().copied()).collect())
        .collect();
    let graph = CellGraph::from_lists(lists)?;
    let parts = partitioner.partition(&graph, p)?;

    // Answer every rank in the order its cells arrived.
    let mut answers: Vec<Vec<i32>> = vec![Vec::new(); p];
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by_key(|&k| records[k].1);
    let mut arrival: Vec<Vec<(usize, usize)>> = vec![Vec::new(); p];
    for k in order {
        arrival[records[k].1].push((records[k].0, parts[k]));
    }
    for (r, cells) in arrival.iter_mut().enumerate() {
        let pos: HashMap<usize, usize> = owned_cells[r]
            .iter()
            .enumerate()
            .map(|(i, &c)| (numbering[r].globals[c], i))
            .collect();
        cells.sort_by_key(|(g, _)| pos[g]);
        answers[r] = cells.iter().map(|&(_, part)| part as i32).collect();
    }
    let mut outgoing: Vec<Vec<Outgoing>> = vec![Vec::new(); p];
    outgoing[0] = answers
        .iter()
        .enumerate()
        .map(|(r, a)| Outgoing::new(r, TAG_PARTS, encode(a)))
        .collect();
    let inbox = world.exchange(stage::REDISTRIBUTION, outgoing)?;

    let mut send = Vec::with_capacity(p);
    for r in 0..p {
        let parts = inbox[r].first().map(|m| decode::<i32>(&m.payload)).unwrap_or_default();
        let mut l = Label::new();
        for (&c, &t) in owned_cells[r].iter().zip(&parts) {
            l.insert(t, c);
        }
        send.push(partition_label_closure(&mesh.plexes[r], &l));
    }
    migrate_by_label(world, Stages::REDISTRIBUTE, mesh, &send, None, OwnershipRule::Vote)
}
