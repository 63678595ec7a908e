//! Brute-force oracles shared by the integration tests. They read only
//! cones from the library and rebuild everything else by hand.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use plexdist::comm::CommWorld;
use plexdist::distribute::{distribute_by_label, partition, DistributedMesh, PartitionMethod};
use plexdist::invariants::{serial_ids, tag_serial_ids};
use plexdist::plex::{Adjacency, Plex};

pub const A: usize = 0;
pub const B: usize = 1;
pub const ALPHA: usize = 2;
pub const BETA: usize = 3;
pub const GAMMA: usize = 4;
pub const DELTA: usize = 5;
pub const EA: usize = 6;
pub const EB: usize = 7;
pub const EC: usize = 8;
pub const ED: usize = 9;
pub const EE: usize = 10;

pub fn set(v: &[usize]) -> BTreeSet<usize> {
    v.iter().copied().collect()
}

/// Cones and transposed cones of a mesh.
pub struct Dag {
    pub cones: Vec<Vec<usize>>,
    pub supports: Vec<Vec<usize>>,
}

impl Dag {
    pub fn new(m: &Plex) -> Self {
        let n = m.num_points();
        let cones: Vec<Vec<usize>> = (0..n).map(|p| m.cone(p).unwrap().to_vec()).collect();
        let mut supports = vec![Vec::new(); n];
        for (p, c) in cones.iter().enumerate() {
            for &q in c {
                supports[q].push(p);
            }
        }
        Self { cones, supports }
    }

    fn reach(&self, from: impl IntoIterator<Item = usize>, edges: &[Vec<usize>]) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<usize> = VecDeque::new();
        for p in from {
            if seen.insert(p) {
                queue.push_back(p);
            }
        }
        while let Some(p) = queue.pop_front() {
            for &q in &edges[p] {
                if seen.insert(q) {
                    queue.push_back(q);
                }
            }
        }
        seen
    }

    pub fn closure(&self, from: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        self.reach(from, &self.cones)
    }

    pub fn star(&self, from: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        self.reach(from, &self.supports)
    }

    /// Adjacency of `p` inside the sub-mesh spanned by `within`.
    pub fn adjacency_within(&self, p: usize, kind: Adjacency, within: &BTreeSet<usize>) -> BTreeSet<usize> {
        match kind {
            Adjacency::Fe => {
                let st: Vec<usize> = self.star([p]).into_iter().filter(|q| within.contains(q)).collect();
                self.closure(st)
            }
            Adjacency::Fv => {
                let mut out = set(&[p]);
                for &s in &self.supports[p] {
                    out.insert(s);
                }
                for &c in &self.cones[p] {
                    out.extend(self.supports[c].iter().copied());
                }
                out.retain(|q| within.contains(q));
                out
            }
        }
    }

    pub fn cells(&self) -> Vec<usize> {
        let depth = self.depths();
        let top = depth.iter().copied().max().unwrap_or(0);
        (0..self.cones.len()).filter(|&p| depth[p] == top).collect()
    }

    pub fn depths(&self) -> Vec<usize> {
        let n = self.cones.len();
        let mut depth = vec![0; n];
        // Cones point to shallower points; relax until stable.
        loop {
            let mut changed = false;
            for p in 0..n {
                let d = self.cones[p].iter().map(|&q| depth[q] + 1).max().unwrap_or(0);
                if d != depth[p] {
                    depth[p] = d;
                    changed = true;
                }
            }
            if !changed {
                return depth;
            }
        }
    }
}

/// Point set of every rank after `levels` of overlap, from the serial mesh
/// and the cell assignment alone.
pub fn overlap_oracle(
    serial: &Plex,
    cells_of: &[BTreeSet<usize>],
    levels: usize,
    kind: Adjacency,
) -> Vec<BTreeSet<usize>> {
    let dag = Dag::new(serial);
    let held: Vec<BTreeSet<usize>> = cells_of.iter().map(|c| dag.closure(c.iter().copied())).collect();
    let p = held.len();
    let mut out = held.clone();
    for s in 0..p {
        for r in 0..p {
            if r == s {
                continue;
            }
            let mut grown: BTreeSet<usize> = held[s].intersection(&held[r]).copied().collect();
            if grown.is_empty() {
                continue;
            }
            for _ in 0..levels {
                grown = grown
                    .iter()
                    .flat_map(|&q| dag.adjacency_within(q, kind, &held[s]))
                    .collect();
            }
            out[r].extend(dag.closure(grown));
        }
    }
    out
}

/// Serial ids held by each rank.
pub fn held_ids(d: &DistributedMesh) -> Vec<BTreeSet<usize>> {
    d.plexes
        .iter()
        .map(|m| serial_ids(m).expect("serial ids migrated").into_iter().collect())
        .collect()
}

/// Serial ids owned by each rank.
pub fn owned_ids(d: &DistributedMesh) -> Vec<BTreeSet<usize>> {
    (0..d.nranks())
        .map(|r| {
            let ids = serial_ids(&d.plexes[r]).expect("serial ids migrated");
            d.owned_points(r).into_iter().map(|p| ids[p]).collect()
        })
        .collect()
}

/// A serial mesh with serial ids, its cell assignment and the distribution
/// of it without overlap.
pub struct Case {
    pub world: CommWorld,
    pub serial: Plex,
    pub cells_of: Vec<BTreeSet<usize>>,
    pub dist: DistributedMesh,
}

pub fn distribute_case(mut serial: Plex, nranks: usize, method: &PartitionMethod) -> Case {
    tag_serial_ids(&mut serial);
    let world = CommWorld::new(nranks).unwrap();
    let label = partition(&serial, nranks, method).unwrap();
    let cells_of = (0..nranks)
        .map(|r| label.stratum(r as i32).into_iter().collect())
        .collect();
    let dist = distribute_by_label(&world, &serial, &label, 0, Adjacency::Fv).unwrap();
    Case {
        world,
        serial,
        cells_of,
        dist,
    }
}

/// Counts of distinct sub-simplices of the given cells, by dimension,
/// enumerated from cell vertex sets.
pub fn simplex_counts(cells: &[Vec<usize>]) -> Vec<usize> {
    let k = cells.first().map_or(0, Vec::len);
    let mut seen: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); k];
    for c in cells {
        let mut c = c.clone();
        c.sort_unstable();
        for mask in 1u32..(1 << k) {
            let sub: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| c[i]).collect();
            seen[sub.len() - 1].insert(sub);
        }
    }
    seen.iter().map(BTreeSet::len).collect()
}

/// Vertex set of every cell of a mesh, read through the oracle closure.
pub fn cell_vertices(m: &Plex) -> Vec<Vec<usize>> {
    let dag = Dag::new(m);
    dag.cells()
        .into_iter()
        .map(|c| dag.closure([c]).into_iter().filter(|&q| dag.cones[q].is_empty()).collect())
        .collect()
}
