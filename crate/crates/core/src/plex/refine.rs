use std::collections::HashMap;

use super::{interpolate_simplices, Plex};
use crate::datalayout::Label;
use crate::error::{Error, Result};
use crate::Point;

/// Vertices of triangle `c` in the order implied by its first oriented
/// edge, then the remaining vertex.
fn triangle_vertices(m: &Plex, c: Point) -> Result<[Point; 3]> {
    let cone = m.cone_raw(c);
    if cone.len() != 3 || cone.iter().any(|&e| m.cone_raw(e).len() != 2) {
        return Err(Error::UnsupportedShape(format!("cell {c} is not a triangle")));
    }
    let e = m.cone_raw(cone[0]);
    let (a, b) = if m.orientation_raw(c)[0] < 0 { (e[1], e[0]) } else { (e[0], e[1]) };
    let third = cone[1..]
        .iter()
        .flat_map(|&e| m.cone_raw(e).iter().copied())
        .find(|&v| v != a && v != b)
        .ok_or_else(|| Error::UnsupportedShape(format!("cell {c} is degenerate")))?;
    Ok([a, b, third])
}

/// Split every triangle into four at its edge midpoints.
///
/// Vertex `v` keeps its vertex index, the midpoint of coarse edge `k`
/// becomes vertex `Nv + k`, and coarse cell `c` becomes cells `4c..4c+4`.
/// Labels follow their points: a coarse edge's value moves to its two
/// halves and its midpoint, a coarse cell's value to its four children
/// and three interior edges.
pub fn uniform_refine_2d(m: &Plex) -> Result<Plex> {
    if m.depth() != 2 {
        return Err(Error::UnsupportedShape(format!(
            "2D refinement needs a triangle mesh, got depth {}",
            m.depth()
        )));
    }
    let cells = m.cells();
    let verts = m.vertices();
    let edges = m.stratum(1);
    let nv = verts.len();
    let vid = |p: Point| p - verts.start;
    let mid = |e: Point| nv + (e - edges.start);

    let mut fine_cells = Vec::with_capacity(4 * cells.len());
    let mut interior = Vec::with_capacity(cells.len());
    for c in cells.clone() {
        let [a, b, d] = triangle_vertices(m, c)?;
        let edge_between = |x: Point, y: Point| -> Result<Point> {
            m.cone_raw(c)
                .iter()
                .copied()
                .find(|&e| {
                    let ev = m.cone_raw(e);
                    ev.contains(&x) && ev.contains(&y)
                })
                .ok_or_else(|| Error::InvalidTopology(format!("cell {c} lacks an edge")))
        };
        let (v0, v1, v2) = (vid(a), vid(b), vid(d));
        let m01 = mid(edge_between(a, b)?);
        let m12 = mid(edge_between(b, d)?);
        let m20 = mid(edge_between(d, a)?);
        fine_cells.push(vec![v0, m01, m20]);
        fine_cells.push(vec![m01, v1, m12]);
        fine_cells.push(vec![m20, m12, v2]);
        fine_cells.push(vec![m01, m12, m20]);
        interior.push([[m01, m12], [m12, m20], [m20, m01]]);
    }

    let n_fine_vertices = nv + edges.len();
    let mut fine = interpolate_simplices(&fine_cells, n_fine_vertices, 2)?;

    let fine_v0 = fine.vertices().start;
    let mut edge_of: HashMap<(usize, usize), Point> = HashMap::new();
    for e in fine.stratum(1) {
        let c = fine.cone_raw(e);
        let (x, y) = (c[0] - fine_v0, c[1] - fine_v0);
        edge_of.insert((x.min(y), x.max(y)), e);
    }
    let fine_edge = |x: usize, y: usize| edge_of[&(x.min(y), x.max(y))];

    if m.has_coordinates() {
        let dim = m.coordinate_dim();
        let mut coords = m.coordinates().to_vec();
        coords.reserve(edges.len() * dim);
        for e in edges.clone() {
            let ev = m.cone_raw(e);
            let x = m.vertex_coordinates(ev[0])?;
            let y = m.vertex_coordinates(ev[1])?;
            coords.extend(x.iter().zip(y).map(|(p, q)| 0.5 * (p + q)));
        }
        fine.set_coordinates(dim, coords)?;
    }

    // Children of every coarse point.
    let children = |p: Point| -> Vec<Point> {
        if verts.contains(&p) {
            vec![fine_v0 + vid(p)]
        } else if edges.contains(&p) {
            let ev = m.cone_raw(p);
            let k = mid(p);
            vec![fine_edge(vid(ev[0]), k), fine_edge(k, vid(ev[1])), fine_v0 + k]
        } else {
            let c = p - cells.start;
            let mut out: Vec<Point> = (4 * c..4 * c + 4).collect();
            out.extend(interior[c].iter().map(|&[x, y]| fine_edge(x, y)));
            out
        }
    };
    for (name, label) in m.labels() {
        let mut fl = Label::new();
        for (v, set) in label.iter() {
            for &p in set {
                fl.extend(v, children(p));
            }
        }
        fine.set_label(name.clone(), fl)?;
    }
    Ok(fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshgen::{gen_box_2d, gen_doublet};
    use crate::plex::BOUNDARY;

    #[test]
    fn refine_doublet() {
        let f = uniform_refine_2d(&gen_doublet()).unwrap();
        let c = f.counts();
        assert_eq!((c.cells, c.edges, c.vertices), (8, 16, 9));
        assert_eq!(f.euler_characteristic(), 1);
        // Midpoint of the shared edge e = (beta, gamma) = ((1,-1), (1,1)).
        let e_mid = f.vertices().start + 4 + 4;
        assert_eq!(f.vertex_coordinates(e_mid).unwrap(), &[1.0, 0.0]);
    }

    #[test]
    fn refine_triangle_and_twice() {
        let t = interpolate_simplices(&[vec![0, 1, 2]], 3, 2).unwrap();
        let f = uniform_refine_2d(&t).unwrap();
        let c = f.counts();
        assert_eq!((c.cells, c.edges, c.vertices), (4, 9, 6));
        let ff = uniform_refine_2d(&f).unwrap();
        assert_eq!(ff.counts().cells, 16);
    }

    #[test]
    fn boundary_label_matches_recomputed_boundary() {
        for n in [1, 2, 4] {
            let mut m = gen_box_2d(n).unwrap();
            for _ in 0..2 {
                m = uniform_refine_2d(&m).unwrap();
                let mut fresh = m.clone();
                fresh.mark_boundary();
                assert_eq!(m.label(BOUNDARY), fresh.label(BOUNDARY));
            }
        }
    }

    #[test]
    fn rejects_tetrahedra() {
        let t = interpolate_simplices(&[vec![0, 1, 2, 3]], 4, 3).unwrap();
        assert!(matches!(uniform_refine_2d(&t), Err(Error::UnsupportedShape(_))));
    }
}
