use std::collections::{BTreeMap, BTreeSet};

use crate::comm::{CommWorld, Owner};
use crate::datalayout::{Label, Section};
use crate::error::{invalid, Error, Result};
use crate::migrate::migrate_data;
use crate::plex::Plex;
use crate::starforest::{DistributedSf, RemotePoint, StarForest};
use crate::Point;

/// Replace every stratum by the union of closures of its points.
pub fn partition_label_closure(m: &Plex, label: &Label) -> Label {
    let mut out = Label::new();
    for (v, set) in label.iter() {
        out.extend(v, m.closure_of(set.iter().copied()));
    }
    out
}

/// Keep each point only in its highest-valued stratum, so that every point
/// is sent by exactly one rank.
pub fn resolve_shared_points(label: &Label) -> Label {
    let mut best: BTreeMap<Point, i32> = BTreeMap::new();
    for (v, set) in label.iter() {
        for &p in set {
            best.entry(p).and_modify(|b| *b = (*b).max(v)).or_insert(v);
        }
    }
    let mut strata: BTreeMap<i32, BTreeSet<Point>> = BTreeMap::new();
    for (p, v) in best {
        strata.entry(v).or_default().insert(p);
    }
    Label::from_strata(strata)
}

/// The complete process graph: leaf `i` on rank `r` mirrors root `r` on
/// rank `i`.
pub fn process_sf(nranks: usize) -> DistributedSf {
    let forests = (0..nranks)
        .map(|r| {
            let remotes = (0..nranks).map(|i| RemotePoint::new(i, r)).collect();
            StarForest::new(nranks, None, remotes).expect("no leaf repeats")
        })
        .collect();
    DistributedSf::new(nranks, forests).expect("ranks in range")
}

/// The owning `(rank, index)` of every local point on `rank`.
pub(crate) fn owner_map(rank: usize, n: usize, sf_point: &StarForest) -> Vec<Owner> {
    let mut owners: Vec<Owner> = (0..n).map(|p| Owner::new(rank, p)).collect();
    for (p, rp) in sf_point.iter() {
        owners[p] = Owner::new(rp.rank, rp.index);
    }
    owners
}

/// Turn sender-side partition labels (value = destination rank) into
/// receiver-side labels (value = owner rank, points = owner-local ids),
/// with one data migration over the process graph.
///
/// Points are named by their owner, so a ghost sent by several ranks
/// arrives once.
pub fn partition_label_invert(
    world: &CommWorld,
    stage: &str,
    plexes: &[Plex],
    labels: &[Label],
    sf_point: &DistributedSf,
) -> Result<Vec<Label>> {
    let p = world.size();
    if plexes.len() != p || labels.len() != p {
        return Err(Error::ContractViolation("one mesh and label per rank expected".into()));
    }
    let mut secs = Vec::with_capacity(p);
    let mut data = Vec::with_capacity(p);
    for (r, (m, l)) in plexes.iter().zip(labels).enumerate() {
        let owners = owner_map(r, m.num_points(), sf_point.forest(r));
        let mut counts = vec![0usize; p];
        let mut d = Vec::with_capacity(l.num_entries());
        for (v, set) in l.iter() {
            if v < 0 || v as usize >= p {
                return invalid(format!("partition label value {v} is not a rank of {p}"));
            }
            counts[v as usize] = set.len();
            for &q in set {
                if q >= m.num_points() {
                    return invalid(format!("rank {r} labels point {q} outside its mesh"));
                }
                d.push(owners[q]);
            }
        }
        secs.push(Section::from_dofs(0, counts));
        data.push(d);
    }
    let (_, received) = migrate_data(world, stage, &process_sf(p), &secs, &data)?;
    Ok(received
        .into_iter()
        .map(|pairs| {
            let mut l = Label::new();
            for o in pairs {
                l.insert(o.rank, o.index as usize);
            }
            l
        })
        .collect())
}

/// Migration forest of receiver-side labels: leaf `i` is the `i`-th
/// `(value, point)` pair and mirrors `point` on rank `value`.
pub fn partition_label_create_sf(plexes: &[Plex], receivers: &[Label]) -> Result<DistributedSf> {
    let forests = plexes
        .iter()
        .zip(receivers)
        .map(|(m, l)| {
            let remotes = l
                .iter()
                .flat_map(|(v, set)| set.iter().map(move |&q| RemotePoint::new(v as usize, q)))
                .collect();
            StarForest::new(m.num_points(), None, remotes)
        })
        .collect::<Result<Vec<_>>>()?;
    DistributedSf::new(plexes.len(), forests)
}

/// Receiver-side label that keeps every local point where it is.
pub(crate) fn retain_all(rank: usize, m: &Plex, sf_point: &StarForest) -> Label {
    let mut l = Label::new();
    for o in owner_map(rank, m.num_points(), sf_point) {
        l.insert(o.rank, o.index as usize);
    }
    l
}

/// Merge receiver labels, for instance retained and incoming points.
pub(crate) fn merge(a: &Label, b: &Label) -> Label {
    let mut out = a.clone();
    for (v, set) in b.iter() {
        out.extend(v, set.iter().copied());
    }
    out
}
