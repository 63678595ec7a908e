use std::collections::{BTreeSet, VecDeque};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::datalayout::{Label, Section};
use crate::error::{invalid, Error, Result};
use crate::plex::Plex;

/// Cells and the cells sharing a facet with each, in CSR form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellGraph {
    offsets: Section,
    neighbors: Vec<usize>,
}

impl CellGraph {
    /// Build from neighbor lists; lists are sorted and deduplicated.
    pub fn from_lists(lists: Vec<Vec<usize>>) -> Result<Self> {
        let n = lists.len();
        let mut neighbors = Vec::new();
        let mut counts = Vec::with_capacity(n);
        for (c, mut l) in lists.into_iter().enumerate() {
            l.sort_unstable();
            l.dedup();
            l.retain(|&x| x != c);
            if let Some(&bad) = l.iter().find(|&&x| x >= n) {
                return invalid(format!("cell {c} has neighbor {bad} of {n}"));
            }
            counts.push(l.len());
            neighbors.extend(l);
        }
        Ok(Self {
            offsets: Section::from_dofs(0, counts),
            neighbors,
        })
    }

    /// Facet adjacency between the cells of a mesh, indexed from 0.
    pub fn from_plex(m: &Plex) -> Self {
        let cells = m.cells();
        let lists = cells
            .clone()
            .map(|c| {
                m.cone_raw(c)
                    .iter()
                    .flat_map(|&f| m.support_raw(f).iter().map(|&d| d - cells.start))
                    .collect()
            })
            .collect();
        Self::from_lists(lists).expect("supports of facets are cells")
    }

    pub fn num_cells(&self) -> usize {
        self.offsets.chart().len()
    }

    pub fn neighbors(&self, c: usize) -> &[usize] {
        &self.neighbors[self.offsets.range(c)]
    }

    /// Number of neighbor pairs split between different parts.
    pub fn edge_cut(&self, parts: &[usize]) -> usize {
        (0..self.num_cells())
            .map(|c| self.neighbors(c).iter().filter(|&&d| d > c && parts[d] != parts[c]).count())
            .sum()
    }
}

/// Cell-to-rank assignment. Implementations must assign every cell a rank
/// in `0..nparts`.
pub trait Partitioner {
    fn partition(&self, graph: &CellGraph, nparts: usize) -> Result<Vec<usize>>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionMethod {
    /// Contiguous blocks of cells in id order, sizes differing by at most one.
    Chunk,
    /// Independent uniform rank per cell.
    Random { seed: u64 },
    /// Breadth-first region growing over facet adjacency.
    GreedyBfs,
    /// A given rank per cell.
    Explicit(Vec<usize>),
}

impl FromStr for PartitionMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chunk" => Ok(Self::Chunk),
            "random" => Ok(Self::Random { seed: 0 }),
            "greedy-bfs" | "greedy" => Ok(Self::GreedyBfs),
            _ => invalid(format!("unknown partition method '{s}'")),
        }
    }
}

impl PartitionMethod {
    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            Self::Random { .. } => Self::Random { seed },
            other => other,
        }
    }
}

/// Balanced part sizes: the first `n % p` parts get one extra cell.
fn target_sizes(n: usize, p: usize) -> Vec<usize> {
    (0..p).map(|k| n / p + usize::from(k < n % p)).collect()
}

impl Partitioner for PartitionMethod {
    fn partition(&self, graph: &CellGraph, nparts: usize) -> Result<Vec<usize>> {
        if nparts == 0 {
            return invalid("cannot partition into zero parts");
        }
        let n = graph.num_cells();
        match self {
            Self::Chunk => {
                let mut out = Vec::with_capacity(n);
                for (k, size) in target_sizes(n, nparts).into_iter().enumerate() {
                    out.extend(std::iter::repeat_n(k, size));
                }
                Ok(out)
            }
            Self::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..n).map(|_| rng.gen_range(0..nparts)).collect())
            }
            Self::GreedyBfs => Ok(greedy_bfs(graph, nparts)),
            Self::Explicit(parts) => {
                if parts.len() != n {
                    return invalid(format!("{} ranks given for {n} cells", parts.len()));
                }
                if let Some(&bad) = parts.iter().find(|&&r| r >= nparts) {
                    return invalid(format!("rank {bad} outside 0..{nparts}"));
                }
                Ok(parts.clone())
            }
        }
    }
}

/// Farthest cell from `start` by BFS, lowest id on ties.
fn farthest(graph: &CellGraph, start: usize) -> usize {
    let mut dist = vec![usize::MAX; graph.num_cells()];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut best = start;
    while let Some(c) = queue.pop_front() {
        if dist[c] > dist[best] || (dist[c] == dist[best] && c < best) {
            best = c;
        }
        for &d in graph.neighbors(c) {
            if dist[d] == usize::MAX {
                dist[d] = dist[c] + 1;
                queue.push_back(d);
            }
        }
    }
    best
}

/// Grow parts one after another to their exact target size. Each part
/// starts from the lowest unassigned cell touching earlier parts (a
/// pseudo-peripheral cell for the first part) and repeatedly absorbs the
/// unassigned cell with the most neighbors already in the part.
fn greedy_bfs(graph: &CellGraph, nparts: usize) -> Vec<usize> {
    let n = graph.num_cells();
    const FREE: usize = usize::MAX;
    let mut part = vec![FREE; n];
    if n == 0 {
        return part;
    }
    let targets = target_sizes(n, nparts);
    let next_seed = |part: &[usize]| -> Option<usize> {
        let touching = (0..n)
            .filter(|&c| part[c] == FREE)
            .find(|&c| graph.neighbors(c).iter().any(|&d| part[d] != FREE));
        touching.or_else(|| (0..n).find(|&c| part[c] == FREE))
    };
    for (k, &target) in targets.iter().enumerate() {
        let mut size = 0;
        // Connection count to part k for candidate cells.
        let mut conn = vec![0usize; n];
        let mut frontier: BTreeSet<(std::cmp::Reverse<usize>, usize)> = BTreeSet::new();
        while size < target {
            let c = match frontier.pop_first() {
                Some((_, c)) => c,
                None if k == 0 && size == 0 => farthest(graph, farthest(graph, 0)),
                None => match next_seed(&part) {
                    Some(s) => s,
                    None => break,
                },
            };
            part[c] = k;
            size += 1;
            for &d in graph.neighbors(c) {
                if part[d] == FREE {
                    frontier.remove(&(std::cmp::Reverse(conn[d]), d));
                    conn[d] += 1;
                    frontier.insert((std::cmp::Reverse(conn[d]), d));
                }
            }
        }
    }
    part
}

/// Partition the cells of `m` into a label with the target rank as value.
pub fn partition(m: &Plex, nparts: usize, method: &dyn Partitioner) -> Result<Label> {
    let graph = CellGraph::from_plex(m);
    let parts = method.partition(&graph, nparts)?;
    let cells = m.cells();
    let mut label = Label::new();
    for (i, &r) in parts.iter().enumerate() {
        label.insert(r as i32, cells.start + i);
    }
    Ok(label)
}

/// Apply `perm[old] = new` to the values of a partition label.
pub fn relabel(label: &Label, perm: &[usize]) -> Result<Label> {
    let mut out = Label::new();
    for (v, set) in label.iter() {
        let Some(&nv) = perm.get(v as usize) else {
            return invalid(format!("no new rank for value {v}"));
        };
        out.extend(nv as i32, set.iter().copied());
    }
    Ok(out)
}

/// Largest part size over the mean part size.
pub fn imbalance(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 1.0;
    }
    let mean = total as f64 / counts.len() as f64;
    *counts.iter().max().unwrap() as f64 / mean
}
