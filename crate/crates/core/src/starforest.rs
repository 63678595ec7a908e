//! Star forests: one-sided sharing graphs and their collectives.
//!
//! Each rank stores only its leaves, every leaf naming the `(rank, index)`
//! of the root it mirrors. The root side needed for broadcasts and
//! reductions is discovered the first time a collective runs on the
//! [`DistributedSf`]: every leaf sends its 4-byte root index to the root's
//! rank, which is the setup cost of a star forest.

use std::collections::HashSet;
use std::sync::OnceLock;

use crate::comm::{decode, encode, CommWorld, Outgoing, Owner, Wire};
use crate::datalayout::Section;
use crate::error::{invalid, Error, Result};
use crate::Point;

const TAG_SETUP: u32 = 1;
const TAG_BCAST: u32 = 2;
const TAG_REDUCE: u32 = 3;
const TAG_GATHER: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RemotePoint {
    pub rank: usize,
    pub index: usize,
}

impl RemotePoint {
    pub fn new(rank: usize, index: usize) -> Self {
        Self { rank, index }
    }
}

/// The leaf side of a star forest on one rank. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarForest {
    nroots: usize,
    leaves: Option<Vec<Point>>,
    remotes: Vec<RemotePoint>,
}

impl StarForest {
    /// `leaves = None` means leaf `i` is local point `i`.
    pub fn new(nroots: usize, leaves: Option<Vec<Point>>, remotes: Vec<RemotePoint>) -> Result<Self> {
        if let Some(l) = &leaves {
            if l.len() != remotes.len() {
                return invalid(format!(
                    "{} leaf indices but {} remote points",
                    l.len(),
                    remotes.len()
                ));
            }
            let mut seen = HashSet::with_capacity(l.len());
            if let Some(d) = l.iter().find(|&&p| !seen.insert(p)) {
                return invalid(format!("duplicate leaf index {d}"));
            }
        }
        Ok(Self {
            nroots,
            leaves,
            remotes,
        })
    }

    pub fn empty(nroots: usize) -> Self {
        Self {
            nroots,
            leaves: None,
            remotes: Vec::new(),
        }
    }

    /// Every local point `0..n` is a leaf of the same point on `rank`.
    pub fn identity(rank: usize, n: usize) -> Self {
        Self {
            nroots: n,
            leaves: None,
            remotes: (0..n).map(|i| RemotePoint::new(rank, i)).collect(),
        }
    }

    pub fn nroots(&self) -> usize {
        self.nroots
    }

    pub fn nleaves(&self) -> usize {
        self.remotes.len()
    }

    pub fn leaf(&self, i: usize) -> Point {
        match &self.leaves {
            Some(l) => l[i],
            None => i,
        }
    }

    pub fn remote(&self, i: usize) -> RemotePoint {
        self.remotes[i]
    }

    pub fn remotes(&self) -> &[RemotePoint] {
        &self.remotes
    }

    /// `(leaf point, remote)` pairs in leaf-position order.
    pub fn iter(&self) -> impl Iterator<Item = (Point, RemotePoint)> + '_ {
        (0..self.nleaves()).map(move |i| (self.leaf(i), self.remotes[i]))
    }

    /// Smallest local space containing every leaf.
    pub fn leaf_space_len(&self) -> usize {
        match &self.leaves {
            Some(l) => l.iter().map(|&p| p + 1).max().unwrap_or(0),
            None => self.remotes.len(),
        }
    }

    /// Leaves sorted by local index, as `(leaf point, remote)`.
    pub fn sorted_leaves(&self) -> Vec<(Point, RemotePoint)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_unstable_by_key(|&(l, _)| l);
        v
    }

    /// Leaf positions grouped by remote rank, ranks ascending, positions
    /// ascending within a rank.
    fn positions_by_rank(&self) -> Vec<(usize, Vec<usize>)> {
        let mut order: Vec<usize> = (0..self.nleaves()).collect();
        order.sort_by_key(|&i| (self.remotes[i].rank, i));
        let mut out: Vec<(usize, Vec<usize>)> = Vec::new();
        for i in order {
            let r = self.remotes[i].rank;
            match out.last_mut() {
                Some((lr, v)) if *lr == r => v.push(i),
                _ => out.push((r, vec![i])),
            }
        }
        out
    }
}

/// Root-side view built during setup: who mirrors each root, grouped by
/// leaf rank in leaf-position order.
#[derive(Debug, Clone, PartialEq, Eq)]
struct RootEntry {
    leaf_rank: usize,
    root: usize,
}

/// A star forest across all ranks of a world.
#[derive(Debug)]
pub struct DistributedSf {
    forests: Vec<StarForest>,
    pattern: OnceLock<Vec<Vec<RootEntry>>>,
}

impl Clone for DistributedSf {
    fn clone(&self) -> Self {
        let pattern = OnceLock::new();
        if let Some(p) = self.pattern.get() {
            let _ = pattern.set(p.clone());
        }
        Self {
            forests: self.forests.clone(),
            pattern,
        }
    }
}

impl PartialEq for DistributedSf {
    fn eq(&self, other: &Self) -> bool {
        self.forests == other.forests
    }
}

impl DistributedSf {
    pub fn new(nranks: usize, forests: Vec<StarForest>) -> Result<Self> {
        if forests.len() != nranks {
            return Err(Error::ContractViolation(format!(
                "star forest has {} rank graphs for {nranks} ranks",
                forests.len()
            )));
        }
        for (r, f) in forests.iter().enumerate() {
            if let Some(bad) = f.remotes.iter().find(|rp| rp.rank >= nranks) {
                return invalid(format!(
                    "rank {r} has a leaf rooted on rank {} of {nranks}",
                    bad.rank
                ));
            }
        }
        Ok(Self {
            forests,
            pattern: OnceLock::new(),
        })
    }

    /// A forest with no leaves on any rank.
    pub fn empty(nroots: &[usize]) -> Self {
        Self {
            forests: nroots.iter().map(|&n| StarForest::empty(n)).collect(),
            pattern: OnceLock::new(),
        }
    }

    pub fn nranks(&self) -> usize {
        self.forests.len()
    }

    pub fn forest(&self, rank: usize) -> &StarForest {
        &self.forests[rank]
    }

    pub fn forests(&self) -> &[StarForest] {
        &self.forests
    }

    pub fn total_leaves(&self) -> usize {
        self.forests.iter().map(StarForest::nleaves).sum()
    }

    /// Same remotes in the same leaf order, new local leaf indices. The
    /// root side is unchanged, so a completed setup carries over.
    pub fn with_leaf_indices(&self, leaves: Vec<Vec<Point>>) -> Result<Self> {
        if leaves.len() != self.nranks() {
            return Err(Error::ContractViolation("leaf index list per rank expected".into()));
        }
        let forests = self
            .forests
            .iter()
            .zip(leaves)
            .map(|(f, l)| StarForest::new(f.nroots, Some(l), f.remotes.clone()))
            .collect::<Result<Vec<_>>>()?;
        let out = Self {
            forests,
            pattern: OnceLock::new(),
        };
        if let Some(p) = self.pattern.get() {
            let _ = out.pattern.set(p.clone());
        }
        Ok(out)
    }

    /// Make sure the root side is known, communicating if needed.
    pub fn set_up(&self, world: &CommWorld, stage: &str) -> Result<()> {
        self.pattern(world, stage).map(|_| ())
    }

    fn pattern(&self, world: &CommWorld, stage: &str) -> Result<&Vec<Vec<RootEntry>>> {
        if let Some(p) = self.pattern.get() {
            return Ok(p);
        }
        self.check_world(world)?;
        let outgoing = self
            .forests
            .iter()
            .map(|f| {
                f.positions_by_rank()
                    .into_iter()
                    .map(|(r, pos)| {
                        let idx: Vec<i32> = pos.iter().map(|&i| f.remotes[i].index as i32).collect();
                        Outgoing::new(r, TAG_SETUP, encode(&idx))
                    })
                    .collect()
            })
            .collect();
        let inbox = world.exchange(stage, outgoing)?;
        let mut pattern = Vec::with_capacity(self.nranks());
        for (r, msgs) in inbox.into_iter().enumerate() {
            let nroots = self.forests[r].nroots;
            let mut entries = Vec::new();
            for m in msgs {
                for idx in decode::<i32>(&m.payload) {
                    if idx < 0 || idx as usize >= nroots {
                        return invalid(format!(
                            "rank {} has a leaf on root {idx} of rank {r}, which has {nroots} roots",
                            m.source
                        ));
                    }
                    entries.push(RootEntry {
                        leaf_rank: m.source,
                        root: idx as usize,
                    });
                }
            }
            pattern.push(entries);
        }
        let _ = self.pattern.set(pattern);
        Ok(self.pattern.get().expect("pattern just set"))
    }

    fn check_world(&self, world: &CommWorld) -> Result<()> {
        if world.size() != self.nranks() {
            return Err(Error::ContractViolation(format!(
                "star forest over {} ranks used in a world of {}",
                self.nranks(),
                world.size()
            )));
        }
        Ok(())
    }

    fn check_per_rank<T>(&self, data: &[T], what: &str) -> Result<()> {
        if data.len() != self.nranks() {
            return Err(Error::ContractViolation(format!(
                "{what}: {} rank contributions for {} ranks",
                data.len(),
                self.nranks()
            )));
        }
        Ok(())
    }

    /// Broadcast fixed-width items from roots to leaves. `root_data[r]`
    /// holds `nroots * width` bytes; the result holds `nleaves * width`
    /// bytes per rank in leaf-position order.
    pub fn bcast_bytes(
        &self,
        world: &CommWorld,
        stage: &str,
        width: usize,
        root_data: &[Vec<u8>],
    ) -> Result<Vec<Vec<u8>>> {
        self.check_per_rank(root_data, "bcast")?;
        for (r, (f, d)) in self.forests.iter().zip(root_data).enumerate() {
            if d.len() != f.nroots * width {
                return invalid(format!(
                    "rank {r}: root buffer of {} bytes, expected {} roots x {width} bytes",
                    d.len(),
                    f.nroots
                ));
            }
        }
        let pattern = self.pattern(world, stage)?;
        let outgoing = pattern
            .iter()
            .zip(root_data)
            .map(|(entries, data)| {
                let mut msgs: Vec<Outgoing> = Vec::new();
                for e in entries {
                    if msgs.last().map(|m| m.dest) != Some(e.leaf_rank) {
                        msgs.push(Outgoing::new(e.leaf_rank, TAG_BCAST, Vec::new()));
                    }
                    let item = &data[e.root * width..(e.root + 1) * width];
                    msgs.last_mut().unwrap().payload.extend_from_slice(item);
                }
                msgs
            })
            .collect();
        let inbox = world.exchange(stage, outgoing)?;
        let mut out = Vec::with_capacity(self.nranks());
        for (f, msgs) in self.forests.iter().zip(inbox) {
            let mut buf = vec![0u8; f.nleaves() * width];
            let groups = f.positions_by_rank();
            for m in msgs {
                let (_, pos) = groups
                    .iter()
                    .find(|(r, _)| *r == m.source)
                    .ok_or_else(|| Error::ContractViolation("unexpected broadcast sender".into()))?;
                for (k, &i) in pos.iter().enumerate() {
                    buf[i * width..(i + 1) * width].copy_from_slice(&m.payload[k * width..(k + 1) * width]);
                }
            }
            out.push(buf);
        }
        Ok(out)
    }

    /// Typed broadcast; leaf values come back in leaf-position order.
    pub fn bcast<T: Wire>(&self, world: &CommWorld, stage: &str, root_data: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
        let bytes: Vec<Vec<u8>> = root_data.iter().map(|d| encode(d)).collect();
        let out = self.bcast_bytes(world, stage, T::WIDTH, &bytes)?;
        Ok(out.iter().map(|b| decode(b)).collect())
    }

    /// Broadcast and scatter into dense arrays indexed by leaf point.
    /// Entries that are not leaves keep `fill`.
    pub fn bcast_to_points<T: Wire>(
        &self,
        world: &CommWorld,
        stage: &str,
        root_data: &[Vec<T>],
        space: &[usize],
        fill: T,
    ) -> Result<Vec<Vec<T>>> {
        let packed = self.bcast(world, stage, root_data)?;
        Ok(self.scatter(&packed, space, fill))
    }

    /// Place packed leaf values at their leaf points.
    pub fn scatter<T: Copy>(&self, packed: &[Vec<T>], space: &[usize], fill: T) -> Vec<Vec<T>> {
        self.forests
            .iter()
            .zip(packed)
            .zip(space)
            .map(|((f, vals), &n)| {
                let mut out = vec![fill; n.max(f.leaf_space_len())];
                for (i, v) in vals.iter().enumerate() {
                    out[f.leaf(i)] = *v;
                }
                out
            })
            .collect()
    }

    /// Combine leaf values into root values with `op`. `root_data` is both
    /// the initial root state and the result.
    pub fn reduce<T: Reducible>(
        &self,
        world: &CommWorld,
        stage: &str,
        leaf_data: &[Vec<T>],
        root_data: &mut [Vec<T>],
        op: ReduceOp,
    ) -> Result<()> {
        self.check_per_rank(leaf_data, "reduce")?;
        self.check_per_rank(root_data, "reduce")?;
        for (r, f) in self.forests.iter().enumerate() {
            if leaf_data[r].len() != f.nleaves() || root_data[r].len() != f.nroots {
                return invalid(format!(
                    "rank {r}: reduce buffers of {}/{} items, expected {}/{}",
                    leaf_data[r].len(),
                    root_data[r].len(),
                    f.nleaves(),
                    f.nroots
                ));
            }
        }
        // Fail before any communication if the type cannot do this op.
        if let Some(v) = leaf_data.iter().flatten().next() {
            let mut probe = *v;
            T::combine(op, &mut probe, *v)?;
        }
        let pattern = self.pattern(world, stage)?;
        let outgoing = self
            .forests
            .iter()
            .zip(leaf_data)
            .map(|(f, data)| {
                f.positions_by_rank()
                    .into_iter()
                    .map(|(r, pos)| {
                        let items: Vec<T> = pos.iter().map(|&i| data[i]).collect();
                        Outgoing::new(r, TAG_REDUCE, encode(&items))
                    })
                    .collect()
            })
            .collect();
        let inbox = world.exchange(stage, outgoing)?;
        for ((entries, msgs), roots) in pattern.iter().zip(inbox).zip(root_data.iter_mut()) {
            let items: Vec<T> = msgs.iter().flat_map(|m| decode::<T>(&m.payload)).collect();
            debug_assert_eq!(items.len(), entries.len());
            for (e, item) in entries.iter().zip(items) {
                T::combine(op, &mut roots[e.root], item)?;
            }
        }
        Ok(())
    }

    /// Gather leaf values at their roots. For each rank, the result is a
    /// section over its roots (degree per root) and the gathered values,
    /// ordered by leaf rank and then leaf position.
    pub fn gather<T: Wire>(
        &self,
        world: &CommWorld,
        stage: &str,
        leaf_data: &[Vec<T>],
    ) -> Result<Vec<(Section, Vec<T>)>> {
        self.check_per_rank(leaf_data, "gather")?;
        let pattern = self.pattern(world, stage)?;
        let outgoing = self
            .forests
            .iter()
            .zip(leaf_data)
            .map(|(f, data)| {
                f.positions_by_rank()
                    .into_iter()
                    .map(|(r, pos)| {
                        let items: Vec<T> = pos.iter().map(|&i| data[i]).collect();
                        Outgoing::new(r, TAG_GATHER, encode(&items))
                    })
                    .collect()
            })
            .collect();
        let inbox = world.exchange(stage, outgoing)?;
        let mut out = Vec::with_capacity(self.nranks());
        for ((f, entries), msgs) in self.forests.iter().zip(pattern).zip(inbox) {
            let items: Vec<T> = msgs.iter().flat_map(|m| decode::<T>(&m.payload)).collect();
            let mut degree = vec![0usize; f.nroots];
            for e in entries {
                degree[e.root] += 1;
            }
            let section = Section::from_dofs(0, degree);
            let mut fill = section.offsets().to_vec();
            let mut values: Vec<Option<T>> = vec![None; items.len()];
            for (e, item) in entries.iter().zip(items) {
                values[fill[e.root]] = Some(item);
                fill[e.root] += 1;
            }
            out.push((section, values.into_iter().map(|v| v.expect("slot filled")).collect()));
        }
        Ok(out)
    }

    /// Degree of each root and the ranks of the leaves mirroring it.
    pub fn compute_ownership(&self, world: &CommWorld, stage: &str) -> Result<Vec<RootInfo>> {
        let ranks: Vec<Vec<i32>> = self
            .forests
            .iter()
            .enumerate()
            .map(|(r, f)| vec![r as i32; f.nleaves()])
            .collect();
        let gathered = self.gather(world, stage, &ranks)?;
        Ok(gathered
            .into_iter()
            .map(|(degree, ranks)| RootInfo {
                degree,
                leaf_ranks: ranks.into_iter().map(|r| r as usize).collect(),
            })
            .collect())
    }
}

/// Root-side sharing information for one rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootInfo {
    /// Leaf count per root.
    pub degree: Section,
    /// Ranks of those leaves, ascending per root.
    pub leaf_ranks: Vec<usize>,
}

impl RootInfo {
    pub fn ranks_of(&self, root: Point) -> &[usize] {
        &self.leaf_ranks[self.degree.range(root)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReduceOp {
    Sum,
    Replace,
    /// Keep the `(rank, index)` pair with the largest rank, then index.
    MaxLoc,
}

pub trait Reducible: Wire {
    fn combine(op: ReduceOp, acc: &mut Self, incoming: Self) -> Result<()>;
}

impl Reducible for i32 {
    fn combine(op: ReduceOp, acc: &mut Self, incoming: Self) -> Result<()> {
        match op {
            ReduceOp::Sum => *acc += incoming,
            ReduceOp::Replace => *acc = incoming,
            ReduceOp::MaxLoc => return invalid("MAXLOC needs (rank, index) items"),
        }
        Ok(())
    }
}

impl Reducible for f64 {
    fn combine(op: ReduceOp, acc: &mut Self, incoming: Self) -> Result<()> {
        match op {
            ReduceOp::Sum => *acc += incoming,
            ReduceOp::Replace => *acc = incoming,
            ReduceOp::MaxLoc => return invalid("MAXLOC needs (rank, index) items"),
        }
        Ok(())
    }
}

impl Reducible for Owner {
    fn combine(op: ReduceOp, acc: &mut Self, incoming: Self) -> Result<()> {
        match op {
            ReduceOp::MaxLoc => {
                if incoming > *acc {
                    *acc = incoming;
                }
            }
            ReduceOp::Replace => *acc = incoming,
            ReduceOp::Sum => return invalid("SUM is not defined on (rank, index) pairs"),
        }
        Ok(())
    }
}

/// Push a point star forest forward along a section: every shared point
/// becomes one leaf per dof.
///
/// `remote_offsets[r][i]` is the root-side offset of leaf position `i`
/// on rank `r`, as broadcast over `sf`. Dof counts on both sides must
/// agree; the check reads the root ranks' sections directly and is not
/// communication-accounted.
pub fn create_section_sf(
    sf: &DistributedSf,
    sec_source: &[Section],
    remote_offsets: &[Vec<usize>],
    sec_target: &[Section],
) -> Result<DistributedSf> {
    sf.check_per_rank(sec_source, "section sf")?;
    sf.check_per_rank(sec_target, "section sf")?;
    sf.check_per_rank(remote_offsets, "section sf")?;
    let mut forests = Vec::with_capacity(sf.nranks());
    for (r, f) in sf.forests.iter().enumerate() {
        if remote_offsets[r].len() != f.nleaves() {
            return invalid(format!(
                "rank {r}: {} remote offsets for {} leaves",
                remote_offsets[r].len(),
                f.nleaves()
            ));
        }
        let mut leaves = Vec::new();
        let mut remotes = Vec::new();
        for (i, (p, rp)) in f.iter().enumerate() {
            let dof = sec_target[r].dof(p);
            let remote_dof = sec_source[rp.rank].dof(rp.index);
            if dof != remote_dof {
                return Err(Error::InconsistentLayout(format!(
                    "rank {r} point {p} has {dof} dofs but its root {} on rank {} has {remote_dof}",
                    rp.index, rp.rank
                )));
            }
            let off = sec_target[r].offset(p);
            for k in 0..dof {
                leaves.push(off + k);
                remotes.push(RemotePoint::new(rp.rank, remote_offsets[r][i] + k));
            }
        }
        forests.push(StarForest::new(sec_source[r].storage_size(), Some(leaves), remotes)?);
    }
    DistributedSf::new(sf.nranks(), forests)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Local numbering of the two halves of the parallel doublet used in the
    // Taylor-Hood example: rank 0 = c, d, f, eps, delta, phi; rank 1 = a, b,
    // e, alpha, beta, gamma.
    const F: Point = 2;
    const EPS: Point = 3;
    const PHI: Point = 5;
    const E: Point = 2;
    const BETA: Point = 4;
    const GAMMA: Point = 5;

    fn doublet_point_sf() -> DistributedSf {
        let r0 = StarForest::new(
            6,
            Some(vec![F, EPS, PHI]),
            vec![
                RemotePoint::new(1, E),
                RemotePoint::new(1, BETA),
                RemotePoint::new(1, GAMMA),
            ],
        )
        .unwrap();
        DistributedSf::new(2, vec![r0, StarForest::empty(6)]).unwrap()
    }

    #[test]
    fn set_graph_validation() {
        let sf = doublet_point_sf();
        assert_eq!(sf.forest(0).nleaves(), 3);
        assert_eq!(sf.forest(0).leaf(1), EPS);
        assert_eq!(sf.forest(0).remote(0), RemotePoint::new(1, E));
        assert_eq!(StarForest::new(4, None, vec![]).unwrap().nleaves(), 0);
        assert!(matches!(
            StarForest::new(4, Some(vec![1, 1]), vec![RemotePoint::new(0, 0); 2]),
            Err(Error::InvalidArgument(_))
        ));
        let bad = StarForest::new(1, None, vec![RemotePoint::new(3, 0)]).unwrap();
        assert!(matches!(
            DistributedSf::new(2, vec![bad, StarForest::empty(1)]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn root_index_checked_at_setup() {
        let w = CommWorld::new(2).unwrap();
        let f = StarForest::new(0, None, vec![RemotePoint::new(1, 9)]).unwrap();
        let sf = DistributedSf::new(2, vec![f, StarForest::empty(2)]).unwrap();
        assert!(matches!(sf.set_up(&w, "s"), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn identity_bcast() {
        let w = CommWorld::new(2).unwrap();
        let sf = DistributedSf::new(2, vec![StarForest::identity(0, 3), StarForest::identity(1, 2)]).unwrap();
        let roots = vec![vec![1, 2, 3], vec![7, 8]];
        assert_eq!(sf.bcast(&w, "s", &roots).unwrap(), roots);
    }

    #[test]
    fn doublet_depth_bcast() {
        let w = CommWorld::new(2).unwrap();
        let sf = doublet_point_sf();
        // Rank 1 depths in its local numbering a, b, e, alpha, beta, gamma.
        let roots = vec![vec![0; 6], vec![1, 1, 1, 0, 0, 0]];
        let leaves = sf.bcast(&w, "s", &roots).unwrap();
        assert_eq!(leaves[0], vec![1, 0, 0]);
        assert!(leaves[1].is_empty());
        // Setup (3 x 4 bytes) plus payload (3 x 4 bytes).
        assert_eq!(w.ledger().total_sent("s"), 24);
        let again = sf.bcast(&w, "t", &roots).unwrap();
        assert_eq!(again, leaves);
        assert_eq!(w.ledger().total_sent("t"), 12);
    }

    #[test]
    fn empty_bcast_moves_nothing() {
        let w = CommWorld::new(3).unwrap();
        let sf = DistributedSf::empty(&[2, 0, 1]);
        let out = sf.bcast(&w, "s", &[vec![1, 2], vec![], vec![3]]).unwrap();
        assert!(out.iter().all(Vec::is_empty));
        assert_eq!(w.ledger().total_sent("s"), 0);
    }

    #[test]
    fn bcast_width_mismatch() {
        let w = CommWorld::new(2).unwrap();
        let sf = doublet_point_sf();
        assert!(matches!(
            sf.bcast_bytes(&w, "s", 4, &[vec![0; 24], vec![0; 23]]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn bcast_moves_leaf_count_times_width() {
        let w = CommWorld::new(3).unwrap();
        let forests = vec![
            StarForest::new(2, None, vec![RemotePoint::new(2, 0), RemotePoint::new(1, 1)]).unwrap(),
            StarForest::new(2, None, vec![RemotePoint::new(0, 0)]).unwrap(),
            StarForest::new(1, Some(vec![4]), vec![RemotePoint::new(0, 1)]).unwrap(),
        ];
        let sf = DistributedSf::new(3, forests).unwrap();
        sf.set_up(&w, "setup").unwrap();
        let roots = vec![vec![1.5, 2.5], vec![3.5, 4.5], vec![5.5]];
        let out = sf.bcast(&w, "b", &roots).unwrap();
        assert_eq!(out, vec![vec![5.5, 4.5], vec![1.5], vec![2.5]]);
        assert_eq!(w.ledger().total_sent("b"), 4 * 8);
        assert_eq!(w.ledger().total_sent("setup"), 4 * 4);
        let dense = sf.scatter(&out, &[2, 1, 5], -1.0);
        assert_eq!(dense[2], vec![-1.0, -1.0, -1.0, -1.0, 2.5]);
    }

    #[test]
    fn maxloc_picks_highest_rank() {
        let w = CommWorld::new(2).unwrap();
        let sf = DistributedSf::new(
            2,
            vec![
                StarForest::new(1, None, vec![RemotePoint::new(0, 0)]).unwrap(),
                StarForest::new(0, None, vec![RemotePoint::new(0, 0)]).unwrap(),
            ],
        )
        .unwrap();
        let leaves = vec![vec![Owner::new(0, 5)], vec![Owner::new(1, 9)]];
        let mut roots = vec![vec![Owner::NONE], vec![]];
        sf.reduce(&w, "r", &leaves, &mut roots, ReduceOp::MaxLoc).unwrap();
        assert_eq!(roots[0][0], Owner::new(1, 9));

        let mut ints = vec![vec![0], vec![]];
        assert!(matches!(
            sf.reduce(&w, "r", &[vec![1], vec![2]], &mut ints, ReduceOp::MaxLoc),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn sum_and_replace() {
        let w = CommWorld::new(2).unwrap();
        let sf = DistributedSf::new(2, vec![StarForest::identity(0, 3), StarForest::identity(1, 1)]).unwrap();
        let mut roots = vec![vec![0; 3], vec![0]];
        sf.reduce(&w, "r", &[vec![1; 3], vec![1]], &mut roots, ReduceOp::Sum).unwrap();
        assert_eq!(roots, vec![vec![1; 3], vec![1]]);

        let single = DistributedSf::new(
            2,
            vec![StarForest::new(0, None, vec![RemotePoint::new(1, 0)]).unwrap(), StarForest::empty(1)],
        )
        .unwrap();
        let mut roots = vec![vec![], vec![3]];
        single.reduce(&w, "r", &[vec![42], vec![]], &mut roots, ReduceOp::Replace).unwrap();
        assert_eq!(roots[1], vec![42]);
    }

    #[test]
    fn ownership() {
        let w = CommWorld::new(2).unwrap();
        let info = doublet_point_sf().compute_ownership(&w, "o").unwrap();
        for p in 0..6 {
            let expect: &[usize] = if [E, BETA, GAMMA].contains(&p) { &[0] } else { &[] };
            assert_eq!(info[1].ranks_of(p), expect);
        }
        assert_eq!(info[0].degree.storage_size(), 0);

        let empty = DistributedSf::empty(&[3, 3]).compute_ownership(&w, "o").unwrap();
        assert!(empty.iter().all(|i| i.degree.storage_size() == 0));

        let w3 = CommWorld::new(3).unwrap();
        let forests = vec![
            StarForest::empty(1),
            StarForest::new(0, None, vec![RemotePoint::new(0, 0)]).unwrap(),
            StarForest::new(0, None, vec![RemotePoint::new(0, 0)]).unwrap(),
        ];
        let info = DistributedSf::new(3, forests).unwrap().compute_ownership(&w3, "o").unwrap();
        assert_eq!(info[0].degree.dof(0), 2);
        assert_eq!(info[0].ranks_of(0), &[1, 2]);
    }

    #[test]
    fn section_pushforward_unrolls_dofs() {
        let forests = vec![
            StarForest::new(0, None, vec![RemotePoint::new(1, 0)]).unwrap(),
            StarForest::empty(1),
        ];
        let sf = DistributedSf::new(2, forests).unwrap();
        let target = vec![Section::from_dofs(0, vec![2]), Section::default()];
        let mut src1 = Section::new(0..1);
        src1.set_dof(0, 2).unwrap();
        src1.set_up();
        let source = vec![Section::default(), src1];
        let dof_sf = create_section_sf(&sf, &source, &[vec![6], vec![]], &target).unwrap();
        let got: Vec<_> = dof_sf.forest(0).iter().collect();
        assert_eq!(got, vec![(0, RemotePoint::new(1, 6)), (1, RemotePoint::new(1, 7))]);

        let zero = vec![Section::from_dofs(0, vec![0]), Section::from_dofs(0, vec![0])];
        let dof_sf = create_section_sf(&sf, &zero, &[vec![0], vec![]], &zero).unwrap();
        assert_eq!(dof_sf.total_leaves(), 0);

        let mismatched = vec![Section::from_dofs(0, vec![1]), Section::from_dofs(0, vec![3])];
        assert!(matches!(
            create_section_sf(&sf, &mismatched, &[vec![0], vec![]], &mismatched),
            Err(Error::InconsistentLayout(_))
        ));
    }

    #[test]
    fn replace_then_bcast_roundtrips_on_bijection() {
        let w = CommWorld::new(2).unwrap();
        // Swap: rank 0 leaves mirror rank 1 roots and vice versa.
        let forests = vec![
            StarForest::new(2, None, vec![RemotePoint::new(1, 1), RemotePoint::new(1, 0)]).unwrap(),
            StarForest::new(2, None, vec![RemotePoint::new(0, 0), RemotePoint::new(0, 1)]).unwrap(),
        ];
        let sf = DistributedSf::new(2, forests).unwrap();
        let leaves = vec![vec![10, 20], vec![30, 40]];
        let mut roots = vec![vec![0; 2], vec![0; 2]];
        sf.reduce(&w, "r", &leaves, &mut roots, ReduceOp::Replace).unwrap();
        assert_eq!(sf.bcast(&w, "r", &roots).unwrap(), leaves);
    }
}
