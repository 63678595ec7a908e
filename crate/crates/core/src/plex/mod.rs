//! Mesh topology as a Hasse diagram.
//!
//! Every cell, face, edge and vertex is a point. The covering relation is
//! stored as cones (in-edges, ordered, with orientations); supports are
//! the transpose. Points are numbered so each depth stratum is contiguous,
//! in the order cells, vertices, then intermediate strata from highest
//! depth down (faces, then edges).

mod interpolate;
mod refine;

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::ops::Range;

use crate::datalayout::{Label, Section};
use crate::error::{check_point, invalid, Error, Result};
use crate::Point;

pub use interpolate::{interpolate_simplices, orientation_of};
pub use refine::uniform_refine_2d;

/// Name of the label marking boundary facets and their closure.
pub const BOUNDARY: &str = "boundary";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Adjacency {
    /// `q ∈ cl(st(p))`, the coupling of continuous finite elements.
    Fe,
    /// Cells sharing a facet: `{p} ∪ supp(p) ∪ supp(cone(p))`.
    Fv,
}

impl std::str::FromStr for Adjacency {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fe" => Ok(Self::Fe),
            "fv" => Ok(Self::Fv),
            _ => invalid(format!("unknown adjacency '{s}', expected fe or fv")),
        }
    }
}

/// Point counts per stratum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StratumCounts {
    pub cells: usize,
    pub faces: usize,
    pub edges: usize,
    pub vertices: usize,
}

impl StratumCounts {
    pub fn total(&self) -> usize {
        self.cells + self.faces + self.edges + self.vertices
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plex {
    cone_section: Section,
    cones: Vec<Point>,
    orientations: Vec<i32>,
    support_section: Section,
    supports: Vec<Point>,
    depth: Vec<usize>,
    max_depth: usize,
    /// Point range per depth.
    strata: Vec<Range<Point>>,
    coord_dim: usize,
    coords: Vec<f64>,
    labels: BTreeMap<String, Label>,
}

impl Default for Plex {
    fn default() -> Self {
        Self::new(&[], Vec::new(), Vec::new()).expect("empty mesh is valid")
    }
}

/// Position of a depth in the canonical stratum order.
fn stratum_rank(depth: usize, max_depth: usize) -> usize {
    if depth == max_depth {
        0
    } else if depth == 0 {
        1
    } else {
        2 + (max_depth - 1 - depth)
    }
}

/// Sort key placing points in canonical stratum order.
pub fn canonical_stratum_key(depth: usize, max_depth: usize) -> usize {
    stratum_rank(depth, max_depth)
}

impl Plex {
    /// Build a mesh from CSR cones. Depths and supports are derived.
    pub fn new(cone_sizes: &[usize], cones: Vec<Point>, orientations: Vec<i32>) -> Result<Self> {
        let n = cone_sizes.len();
        let cone_section = Section::from_dofs(0, cone_sizes.to_vec());
        if cone_section.storage_size() != cones.len() {
            return invalid(format!(
                "cone sizes sum to {} but {} cone points were given",
                cone_section.storage_size(),
                cones.len()
            ));
        }
        if orientations.len() != cones.len() {
            return invalid(format!(
                "{} orientations for {} cone points",
                orientations.len(),
                cones.len()
            ));
        }
        for p in 0..n {
            let c = &cones[cone_section.range(p)];
            for (i, &q) in c.iter().enumerate() {
                if q >= n {
                    return Err(Error::InvalidTopology(format!(
                        "cone of {p} references point {q} outside chart [0, {n})"
                    )));
                }
                if c[..i].contains(&q) {
                    return Err(Error::InvalidTopology(format!("cone of {p} repeats point {q}")));
                }
            }
        }

        let mut support_counts = vec![0usize; n];
        for &q in &cones {
            support_counts[q] += 1;
        }
        let support_section = Section::from_dofs(0, support_counts);
        let mut fill = support_section.offsets().to_vec();
        let mut supports = vec![0; cones.len()];
        for p in 0..n {
            for &q in &cones[cone_section.range(p)] {
                supports[fill[q]] = p;
                fill[q] += 1;
            }
        }

        let depth = compute_depths(&cone_section, &cones)?;
        let max_depth = depth.iter().copied().max().unwrap_or(0);
        let mut prev = 0;
        for (p, &d) in depth.iter().enumerate() {
            let r = stratum_rank(d, max_depth);
            if r < prev {
                return Err(Error::InvalidNumbering(format!(
                    "point {p} of depth {d} breaks the stratum order cells, vertices, faces, edges"
                )));
            }
            prev = r;
        }
        let mut strata = vec![0..0; max_depth + 1];
        #[allow(clippy::needless_range_loop)]
        for d in 0..=max_depth {
            let lo = depth.iter().position(|&x| x == d);
            if let Some(lo) = lo {
                let hi = depth.iter().rposition(|&x| x == d).unwrap() + 1;
                strata[d] = lo..hi;
            } else {
                // Empty stratum: place it where it would start.
                let r = stratum_rank(d, max_depth);
                let at = depth
                    .iter()
                    .position(|&x| stratum_rank(x, max_depth) > r)
                    .unwrap_or(n);
                strata[d] = at..at;
            }
        }

        Ok(Self {
            cone_section,
            cones,
            orientations,
            support_section,
            supports,
            depth,
            max_depth,
            strata,
            coord_dim: 0,
            coords: Vec::new(),
            labels: BTreeMap::new(),
        })
    }

    /// Build from one cone and orientation list per point.
    pub fn from_cones(cones: &[Vec<Point>], orientations: &[Vec<i32>]) -> Result<Self> {
        if cones.len() != orientations.len() {
            return invalid("one orientation list per cone expected");
        }
        let sizes: Vec<usize> = cones.iter().map(Vec::len).collect();
        for (p, (c, o)) in cones.iter().zip(orientations).enumerate() {
            if c.len() != o.len() {
                return invalid(format!("point {p}: cone and orientation lengths differ"));
            }
        }
        Self::new(&sizes, cones.concat(), orientations.concat())
    }

    /// Attach vertex coordinates, `dim` reals per vertex in vertex order.
    pub fn with_coordinates(mut self, dim: usize, coords: Vec<f64>) -> Result<Self> {
        self.set_coordinates(dim, coords)?;
        Ok(self)
    }

    pub fn set_coordinates(&mut self, dim: usize, coords: Vec<f64>) -> Result<()> {
        let nv = self.num_vertices();
        if coords.len() != nv * dim {
            return invalid(format!(
                "{} coordinate values for {nv} vertices of dimension {dim}",
                coords.len()
            ));
        }
        self.coord_dim = dim;
        self.coords = coords;
        Ok(())
    }

    pub fn num_points(&self) -> usize {
        self.depth.len()
    }

    pub fn chart(&self) -> Range<Point> {
        0..self.num_points()
    }

    /// Depth of the deepest point; the topological dimension of an
    /// interpolated mesh.
    pub fn depth(&self) -> usize {
        self.max_depth
    }

    pub fn point_depth(&self, p: Point) -> Result<usize> {
        check_point(p, self.num_points())?;
        Ok(self.depth[p])
    }

    pub fn depths(&self) -> &[usize] {
        &self.depth
    }

    /// Points of depth `d`, empty if the mesh has no such stratum.
    pub fn stratum(&self, d: usize) -> Range<Point> {
        self.strata.get(d).cloned().unwrap_or(0..0)
    }

    pub fn cells(&self) -> Range<Point> {
        if self.num_points() == 0 {
            0..0
        } else {
            self.stratum(self.max_depth)
        }
    }

    pub fn vertices(&self) -> Range<Point> {
        self.stratum(0)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices().len()
    }

    pub fn counts(&self) -> StratumCounts {
        let d = self.max_depth;
        let len = |k: usize| self.stratum(k).len();
        if self.num_points() == 0 {
            return StratumCounts::default();
        }
        StratumCounts {
            cells: if d > 0 { len(d) } else { 0 },
            faces: if d >= 3 { len(d - 1) } else { 0 },
            edges: if d >= 2 { len(1) } else { 0 },
            vertices: len(0),
        }
    }

    /// Alternating sum of stratum sizes, lowest depth positive.
    pub fn euler_characteristic(&self) -> i64 {
        (0..=self.max_depth)
            .map(|d| {
                let n = self.stratum(d).len() as i64;
                if d % 2 == 0 {
                    n
                } else {
                    -n
                }
            })
            .sum()
    }

    pub fn cone(&self, p: Point) -> Result<&[Point]> {
        check_point(p, self.num_points())?;
        Ok(self.cone_raw(p))
    }

    pub fn cone_orientation(&self, p: Point) -> Result<&[i32]> {
        check_point(p, self.num_points())?;
        Ok(&self.orientations[self.cone_section.range(p)])
    }

    /// Supports are sorted ascending.
    pub fn support(&self, p: Point) -> Result<&[Point]> {
        check_point(p, self.num_points())?;
        Ok(self.support_raw(p))
    }

    pub(crate) fn cone_raw(&self, p: Point) -> &[Point] {
        &self.cones[self.cone_section.range(p)]
    }

    pub(crate) fn orientation_raw(&self, p: Point) -> &[i32] {
        &self.orientations[self.cone_section.range(p)]
    }

    pub(crate) fn support_raw(&self, p: Point) -> &[Point] {
        &self.supports[self.support_section.range(p)]
    }

    pub fn cone_section(&self) -> &Section {
        &self.cone_section
    }

    pub fn cone_points(&self) -> &[Point] {
        &self.cones
    }

    pub fn orientations(&self) -> &[i32] {
        &self.orientations
    }

    /// Transitive cone image including `p`, breadth-first.
    pub fn closure(&self, p: Point) -> Result<Vec<Point>> {
        check_point(p, self.num_points())?;
        Ok(self.bfs(p, |q| self.cone_raw(q)))
    }

    /// Transitive support image including `p`, breadth-first.
    pub fn star(&self, p: Point) -> Result<Vec<Point>> {
        check_point(p, self.num_points())?;
        Ok(self.bfs(p, |q| self.support_raw(q)))
    }

    fn bfs<'a>(&'a self, p: Point, next: impl Fn(Point) -> &'a [Point]) -> Vec<Point> {
        let mut out = vec![p];
        let mut seen = HashSet::from([p]);
        let mut queue = VecDeque::from([p]);
        while let Some(q) = queue.pop_front() {
            for &r in next(q) {
                if seen.insert(r) {
                    out.push(r);
                    queue.push_back(r);
                }
            }
        }
        out
    }

    /// Union of closures of `points`.
    pub fn closure_of<I: IntoIterator<Item = Point>>(&self, points: I) -> BTreeSet<Point> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<Point> = Vec::new();
        for p in points {
            if out.insert(p) {
                stack.push(p);
            }
            while let Some(q) = stack.pop() {
                for &r in self.cone_raw(q) {
                    if out.insert(r) {
                        stack.push(r);
                    }
                }
            }
        }
        out
    }

    /// Union of stars of `points`.
    pub fn star_of<I: IntoIterator<Item = Point>>(&self, points: I) -> BTreeSet<Point> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<Point> = Vec::new();
        for p in points {
            if out.insert(p) {
                stack.push(p);
            }
            while let Some(q) = stack.pop() {
                for &r in self.support_raw(q) {
                    if out.insert(r) {
                        stack.push(r);
                    }
                }
            }
        }
        out
    }

    /// Adjacent points of `p`, sorted.
    pub fn adjacency(&self, p: Point, kind: Adjacency) -> Result<Vec<Point>> {
        check_point(p, self.num_points())?;
        let mut out = BTreeSet::new();
        self.adjacency_into(p, kind, &mut out);
        Ok(out.into_iter().collect())
    }

    pub(crate) fn adjacency_into(&self, p: Point, kind: Adjacency, out: &mut BTreeSet<Point>) {
        match kind {
            Adjacency::Fe => {
                let star = self.star_of([p]);
                out.extend(self.closure_of(star));
            }
            Adjacency::Fv => {
                out.insert(p);
                out.extend(self.support_raw(p));
                for &c in self.cone_raw(p) {
                    out.extend(self.support_raw(c));
                }
            }
        }
    }

    /// A label with value `d` on the points of depth `d`.
    pub fn depth_label(&self) -> Label {
        let mut l = Label::new();
        for (d, r) in self.strata.iter().enumerate() {
            if !r.is_empty() {
                l.extend(d as i32, r.clone());
            }
        }
        l
    }

    pub fn coordinate_dim(&self) -> usize {
        self.coord_dim
    }

    pub fn coordinates(&self) -> &[f64] {
        &self.coords
    }

    pub fn has_coordinates(&self) -> bool {
        self.num_vertices() > 0 && !self.coords.is_empty()
    }

    /// Coordinates of vertex point `v`.
    pub fn vertex_coordinates(&self, v: Point) -> Result<&[f64]> {
        let vs = self.vertices();
        if !vs.contains(&v) {
            return invalid(format!("point {v} is not a vertex"));
        }
        if self.coords.is_empty() {
            return invalid("mesh has no coordinates");
        }
        let i = v - vs.start;
        Ok(&self.coords[i * self.coord_dim..(i + 1) * self.coord_dim])
    }

    pub fn label(&self, name: &str) -> Option<&Label> {
        self.labels.get(name)
    }

    pub fn labels(&self) -> &BTreeMap<String, Label> {
        &self.labels
    }

    pub fn set_label(&mut self, name: impl Into<String>, label: Label) -> Result<()> {
        let n = self.num_points();
        for (_, set) in label.iter() {
            if let Some(&p) = set.iter().next_back() {
                check_point(p, n)?;
            }
        }
        self.labels.insert(name.into(), label);
        Ok(())
    }

    pub fn remove_label(&mut self, name: &str) -> Option<Label> {
        self.labels.remove(name)
    }

    /// Label value 1 on every facet with a single support, plus closures.
    pub fn mark_boundary(&mut self) {
        let mut label = Label::new();
        if self.max_depth > 0 {
            let facets = self.stratum(self.max_depth - 1);
            let outer = facets.filter(|&f| self.support_raw(f).len() == 1);
            label.extend(1, self.closure_of(outer));
        }
        self.labels.insert(BOUNDARY.to_string(), label);
    }
}

/// Depth of every point, failing on cycles.
fn compute_depths(cone_section: &Section, cones: &[Point]) -> Result<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    const ACTIVE: usize = usize::MAX - 1;
    let n = cone_section.chart().end;
    let mut depth = vec![UNSEEN; n];
    let cone = |p: Point| &cones[cone_section.range(p)];
    for root in 0..n {
        if depth[root] != UNSEEN {
            continue;
        }
        // Iterative post-order DFS; the second tuple field is the next cone
        // position to visit.
        let mut stack = vec![(root, 0usize)];
        depth[root] = ACTIVE;
        while let Some(&mut (p, ref mut i)) = stack.last_mut() {
            let c = cone(p);
            if *i < c.len() {
                let q = c[*i];
                *i += 1;
                match depth[q] {
                    ACTIVE => {
                        return Err(Error::InvalidTopology(format!(
                            "covering relation has a cycle through point {q}"
                        )))
                    }
                    UNSEEN => {
                        depth[q] = ACTIVE;
                        stack.push((q, 0));
                    }
                    _ => {}
                }
            } else {
                depth[p] = c.iter().map(|&q| depth[q] + 1).max().unwrap_or(0);
                stack.pop();
            }
        }
    }
    Ok(depth)
}
