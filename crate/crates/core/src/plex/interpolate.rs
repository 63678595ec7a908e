use std::collections::HashMap;

use super::Plex;
use crate::error::{Error, Result};
use crate::Point;

/// Orientation of `seen` relative to `canonical`, two orderings of the same
/// points. For `k ≥ 3`, `o ≥ 0` starts at position `o` going forward and
/// `o < 0` starts at `-(o + 1)` going backward. Segments use 0 and -1.
pub fn orientation_of(canonical: &[Point], seen: &[Point]) -> Option<i32> {
    let k = canonical.len();
    if k != seen.len() {
        return None;
    }
    if k == 2 {
        return if canonical == seen {
            Some(0)
        } else if canonical[0] == seen[1] && canonical[1] == seen[0] {
            Some(-1)
        } else {
            None
        };
    }
    for s in 0..k {
        if (0..k).all(|i| canonical[(s + i) % k] == seen[i]) {
            return Some(s as i32);
        }
        if (0..k).all(|i| canonical[(s + k - i) % k] == seen[i]) {
            return Some(-(s as i32 + 1));
        }
    }
    None
}

fn sorted_key(v: &[usize]) -> Vec<usize> {
    let mut k = v.to_vec();
    k.sort_unstable();
    k
}

/// Entities of one dimension, deduplicated by sorted vertex key in
/// first-seen order. Each keeps the vertex order it was first seen with.
#[derive(Default)]
struct Entities {
    index: HashMap<Vec<usize>, usize>,
    verts: Vec<Vec<usize>>,
}

impl Entities {
    /// Id of the entity with these vertices, and the orientation of
    /// `verts` relative to its stored order.
    fn get_or_insert(&mut self, verts: &[usize]) -> (usize, i32) {
        let key = sorted_key(verts);
        if let Some(&id) = self.index.get(&key) {
            let o = orientation_of(&self.verts[id], verts).expect("same vertex set");
            return (id, o);
        }
        let id = self.verts.len();
        self.index.insert(key, id);
        self.verts.push(verts.to_vec());
        (id, 0)
    }
}

/// Build an interpolated simplicial mesh from cell-vertex lists.
///
/// Points are numbered cells, vertices (`Nc + v`), faces, edges. Triangle
/// edges are `(v0,v1), (v1,v2), (v2,v0)`; tetrahedron faces are
/// `(v1,v2,v3), (v0,v3,v2), (v0,v1,v3), (v0,v2,v1)`.
pub fn interpolate_simplices(cells: &[Vec<usize>], n_vertices: usize, dim: usize) -> Result<Plex> {
    if !(2..=3).contains(&dim) {
        return Err(Error::UnsupportedShape(format!("simplices of dimension {dim}")));
    }
    for (c, vs) in cells.iter().enumerate() {
        if vs.len() != dim + 1 {
            return Err(Error::UnsupportedShape(format!(
                "cell {c} has {} vertices, a {dim}-simplex needs {}",
                vs.len(),
                dim + 1
            )));
        }
        if let Some(&v) = vs.iter().find(|&&v| v >= n_vertices) {
            return Err(Error::InvalidArgument(format!(
                "cell {c} references vertex {v} of {n_vertices}"
            )));
        }
        if sorted_key(vs).windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!("cell {c} repeats a vertex")));
        }
    }
    let nc = cells.len();
    let mut faces = Entities::default();
    let mut edges = Entities::default();
    // Per cell: (entity id, orientation) of each cone entry.
    let mut cell_cones: Vec<Vec<(usize, i32)>> = Vec::with_capacity(nc);
    let mut face_cones: Vec<Vec<(usize, i32)>> = Vec::new();

    let tri_edges = |t: &[usize]| [[t[0], t[1]], [t[1], t[2]], [t[2], t[0]]];
    if dim == 2 {
        for t in cells {
            cell_cones.push(tri_edges(t).iter().map(|e| edges.get_or_insert(e)).collect());
        }
    } else {
        for t in cells {
            let fs = [
                [t[1], t[2], t[3]],
                [t[0], t[3], t[2]],
                [t[0], t[1], t[3]],
                [t[0], t[2], t[1]],
            ];
            let mut cone = Vec::with_capacity(4);
            for f in &fs {
                let (id, o) = faces.get_or_insert(f);
                if id == face_cones.len() {
                    face_cones.push(tri_edges(f).iter().map(|e| edges.get_or_insert(e)).collect());
                }
                cone.push((id, o));
            }
            cell_cones.push(cone);
        }
    }

    let nf = faces.verts.len();
    let ne = edges.verts.len();
    let v0 = nc;
    let f0 = nc + n_vertices;
    let e0 = f0 + nf;
    let entity_base = if dim == 2 { e0 } else { f0 };

    let mut cones: Vec<Vec<Point>> = Vec::with_capacity(e0 + ne);
    let mut orients: Vec<Vec<i32>> = Vec::with_capacity(e0 + ne);
    for cc in &cell_cones {
        cones.push(cc.iter().map(|&(id, _)| entity_base + id).collect());
        orients.push(cc.iter().map(|&(_, o)| o).collect());
    }
    for _ in 0..n_vertices {
        cones.push(Vec::new());
        orients.push(Vec::new());
    }
    for fc in &face_cones {
        cones.push(fc.iter().map(|&(id, _)| e0 + id).collect());
        orients.push(fc.iter().map(|&(_, o)| o).collect());
    }
    for e in &edges.verts {
        cones.push(e.iter().map(|&v| v0 + v).collect());
        orients.push(vec![0, 0]);
    }
    Plex::from_cones(&cones, &orients)
}
