//! Structural checks on single meshes and on distributed meshes.
//!
//! Every check returns the list of violations it found; an empty list
//! means the property holds. Distributed checks read all ranks at once and
//! do not communicate.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use crate::datalayout::Label;
use crate::distribute::DistributedMesh;
use crate::plex::{canonical_stratum_key, Adjacency, Plex};
use crate::Point;

/// Label carrying the serial id of every point as its value.
pub const SERIAL_ID: &str = "serial-id";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub check: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.check, self.message)
    }
}

fn violation(check: &'static str, message: String) -> Violation {
    Violation { check, message }
}

/// Tag every point with its own id, so copies can be traced back after
/// distribution.
pub fn tag_serial_ids(m: &mut Plex) {
    let mut l = Label::new();
    for p in m.chart() {
        l.insert(p as i32, p);
    }
    m.set_label(SERIAL_ID, l).expect("points are in the chart");
}

/// Serial id per local point, if every point carries exactly one.
pub fn serial_ids(m: &Plex) -> Option<Vec<usize>> {
    let l = m.label(SERIAL_ID)?;
    let mut ids = vec![usize::MAX; m.num_points()];
    for (v, set) in l.iter() {
        for &p in set {
            if ids[p] != usize::MAX {
                return None;
            }
            ids[p] = v as usize;
        }
    }
    ids.iter().all(|&i| i != usize::MAX).then_some(ids)
}

/// `q ∈ cone(p)` exactly when `p ∈ supp(q)`, with matching multiplicity.
pub fn check_duality(m: &Plex) -> Vec<Violation> {
    let mut out = Vec::new();
    for p in m.chart() {
        for &q in m.cone_raw(p) {
            if !m.support_raw(q).contains(&p) {
                out.push(violation("duality", format!("{q} in cone({p}) but {p} not in supp({q})")));
            }
        }
        for &q in m.support_raw(p) {
            if !m.cone_raw(q).contains(&p) {
                out.push(violation("duality", format!("{q} in supp({p}) but {p} not in cone({q})")));
            }
        }
    }
    out
}

/// Every cone point is strictly shallower, which rules out cycles.
pub fn check_acyclic(m: &Plex) -> Vec<Violation> {
    let d = m.depths();
    let mut out = Vec::new();
    for p in m.chart() {
        for &q in m.cone_raw(p) {
            if d[q] >= d[p] {
                out.push(violation("acyclicity", format!("cone point {q} of {p} is not shallower")));
            }
        }
    }
    out
}

/// Strata are contiguous and in canonical order.
pub fn check_stratified(m: &Plex) -> Vec<Violation> {
    let d = m.depths();
    let top = m.depth();
    let mut out = Vec::new();
    for p in 1..m.num_points() {
        if canonical_stratum_key(d[p], top) < canonical_stratum_key(d[p - 1], top) {
            out.push(violation("stratification", format!("point {p} of depth {} out of order", d[p])));
        }
    }
    out
}

/// Adjacency is a symmetric relation.
pub fn check_adjacency_symmetric(m: &Plex, kind: Adjacency) -> Vec<Violation> {
    let adj: Vec<BTreeSet<Point>> = m
        .chart()
        .map(|p| {
            let mut s = BTreeSet::new();
            m.adjacency_into(p, kind, &mut s);
            s
        })
        .collect();
    let mut out = Vec::new();
    for (p, set) in adj.iter().enumerate() {
        for &q in set {
            if !adj[q].contains(&p) {
                out.push(violation("adjacency symmetry", format!("{q} adjacent to {p} but not conversely")));
            }
        }
    }
    out
}

/// All single-mesh checks, FE adjacency symmetry included.
pub fn check_plex(m: &Plex) -> Vec<Violation> {
    let mut out = check_duality(m);
    out.extend(check_acyclic(m));
    out.extend(check_stratified(m));
    out.extend(check_adjacency_symmetric(m, Adjacency::Fe));
    out
}

/// Ownership: every leaf points at a root that is owned on its rank, no
/// root is mirrored twice by one rank, and the closure of a shared point
/// is shared.
pub fn check_ownership(d: &DistributedMesh) -> Vec<Violation> {
    let mut out = Vec::new();
    let p = d.nranks();
    let leaves: Vec<HashSet<Point>> = (0..p)
        .map(|r| d.point_sf.forest(r).iter().map(|(q, _)| q).collect())
        .collect();
    let mut mirrored: HashSet<(usize, Point)> = HashSet::new();
    for r in 0..p {
        let mut seen = HashSet::new();
        for (q, rp) in d.point_sf.forest(r).iter() {
            if rp.rank == r {
                out.push(violation("unique ownership", format!("rank {r} leaf {q} is rooted on itself")));
            } else if rp.index >= d.plexes[rp.rank].num_points() || leaves[rp.rank].contains(&rp.index) {
                out.push(violation(
                    "unique ownership",
                    format!("rank {r} leaf {q} targets ({}, {}), not an owned point", rp.rank, rp.index),
                ));
            }
            if !seen.insert(rp) {
                out.push(violation("unique ownership", format!("rank {r} mirrors ({}, {}) twice", rp.rank, rp.index)));
            }
            if q >= d.plexes[r].num_points() {
                out.push(violation("unique ownership", format!("rank {r} leaf {q} outside its chart")));
            }
            mirrored.insert((rp.rank, rp.index));
        }
    }
    if !out.is_empty() {
        return out;
    }
    #[allow(clippy::needless_range_loop)]
    for r in 0..p {
        let m = &d.plexes[r];
        let shared = |q: Point| leaves[r].contains(&q) || mirrored.contains(&(r, q));
        for &g in &leaves[r] {
            for q in m.closure_of([g]) {
                if !shared(q) {
                    out.push(violation("closedness", format!("rank {r}: {q} in closure of ghost {g} is not shared")));
                }
            }
        }
    }
    out
}

/// Compare a distributed mesh with the serial mesh it came from, using
/// serial ids: each local mesh is the induced sub-mesh on its ids, its
/// ids are closed in the serial mesh, and every serial point is owned
/// exactly once.
pub fn check_against_serial(d: &DistributedMesh, serial: &Plex) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut owners = vec![0usize; serial.num_points()];
    for (r, m) in d.plexes.iter().enumerate() {
        let Some(ids) = serial_ids(m) else {
            out.push(violation("point conservation", format!("rank {r} lacks serial ids")));
            continue;
        };
        if ids.iter().any(|&g| g >= serial.num_points()) {
            out.push(violation("point conservation", format!("rank {r} has an unknown serial id")));
            continue;
        }
        let held: HashSet<usize> = ids.iter().copied().collect();
        if held.len() != ids.len() {
            out.push(violation("point conservation", format!("rank {r} holds a serial point twice")));
        }
        for p in m.chart() {
            let g = ids[p];
            let local: Vec<(usize, i32)> = m
                .cone_raw(p)
                .iter()
                .map(|&q| ids[q])
                .zip(m.orientation_raw(p).iter().copied())
                .collect();
            let global: Vec<(usize, i32)> = serial
                .cone_raw(g)
                .iter()
                .copied()
                .zip(serial.orientation_raw(g).iter().copied())
                .collect();
            if local != global {
                out.push(violation("closedness", format!("rank {r}: cone of {p} differs from serial point {g}")));
            }
        }
        if m.has_coordinates() && serial.has_coordinates() {
            for v in m.vertices() {
                if m.vertex_coordinates(v).ok() != serial.vertex_coordinates(ids[v]).ok() {
                    out.push(violation("point conservation", format!("rank {r}: coordinates of vertex {v} differ")));
                }
            }
        }
        for q in d.owned_points(r) {
            owners[ids[q]] += 1;
        }
    }
    for (g, &n) in owners.iter().enumerate() {
        if n != 1 {
            out.push(violation("unique ownership", format!("serial point {g} owned {n} times")));
        }
    }
    out
}

/// Every check on every rank, plus the serial comparison when given.
pub fn check_distributed(d: &DistributedMesh, serial: Option<&Plex>) -> Vec<Violation> {
    let mut out = Vec::new();
    for (r, m) in d.plexes.iter().enumerate() {
        out.extend(check_plex(m).into_iter().map(|v| Violation {
            message: format!("rank {r}: {}", v.message),
            ..v
        }));
    }
    out.extend(check_ownership(d));
    if let Some(s) = serial {
        out.extend(check_against_serial(d, s));
    }
    out
}

/// Summary of a run of checks, grouped by check name.
pub fn summarize(violations: &[Violation]) -> BTreeMap<&'static str, usize> {
    let mut out = BTreeMap::new();
    for v in violations {
        *out.entry(v.check).or_insert(0) += 1;
    }
    out
}
