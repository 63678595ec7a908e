//! Deterministic mesh generators.

use crate::error::{invalid, Result};
use crate::plex::{interpolate_simplices, Plex, StratumCounts};

/// Two triangles A = (α, β, γ) and B = (β, δ, γ) sharing edge e.
///
/// Numbering: A=0, B=1, α=2, β=3, γ=4, δ=5, a=6, b=7, c=8, d=9, e=10,
/// with a=(α,β), b=(α,γ), c=(β,δ), d=(γ,δ), e=(β,γ).
pub fn gen_doublet() -> Plex {
    let cones = vec![
        vec![6, 7, 10],
        vec![8, 9, 10],
        vec![],
        vec![],
        vec![],
        vec![],
        vec![2, 3],
        vec![2, 4],
        vec![3, 5],
        vec![4, 5],
        vec![3, 4],
    ];
    let orients = vec![
        vec![0, -1, 0],
        vec![0, -1, -1],
        vec![],
        vec![],
        vec![],
        vec![],
        vec![0, 0],
        vec![0, 0],
        vec![0, 0],
        vec![0, 0],
        vec![0, 0],
    ];
    let coords = vec![0.0, 0.0, 1.0, -1.0, 1.0, 1.0, 2.0, 0.0];
    let mut m = Plex::from_cones(&cones, &orients)
        .and_then(|m| m.with_coordinates(2, coords))
        .expect("doublet is well formed");
    m.mark_boundary();
    m
}

/// Closed-form (cells, edges, vertices) of [`gen_box_2d`].
pub fn box_2d_counts(n: u64) -> StratumCounts64 {
    StratumCounts64 {
        cells: 2 * n * n,
        faces: 0,
        edges: 2 * n * (n + 1) + n * n,
        vertices: (n + 1) * (n + 1),
    }
}

/// Closed-form counts of [`gen_box_3d`].
pub fn box_3d_counts(n: u64) -> StratumCounts64 {
    let nc = 6 * n * n * n;
    let nv = (n + 1).pow(3);
    let ne = 3 * n * (n + 1) * (n + 1) + 3 * n * n * (n + 1) + n * n * n;
    let nf = 1 + ne + nc - nv;
    StratumCounts64 {
        cells: nc,
        faces: nf,
        edges: ne,
        vertices: nv,
    }
}

/// Stratum counts wide enough for benchmark-size meshes that are never
/// built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StratumCounts64 {
    pub cells: u64,
    pub faces: u64,
    pub edges: u64,
    pub vertices: u64,
}

impl From<StratumCounts> for StratumCounts64 {
    fn from(c: StratumCounts) -> Self {
        Self {
            cells: c.cells as u64,
            faces: c.faces as u64,
            edges: c.edges as u64,
            vertices: c.vertices as u64,
        }
    }
}

/// Unit square, `n × n` quads each cut along the `(i,j)-(i+1,j+1)` diagonal.
pub fn gen_box_2d(n: usize) -> Result<Plex> {
    if n == 0 {
        return invalid("box mesh needs n >= 1");
    }
    let vid = |i: usize, j: usize| i * (n + 1) + j;
    let mut cells = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            let (v00, v10, v11, v01) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            cells.push(vec![v00, v10, v11]);
            cells.push(vec![v00, v11, v01]);
        }
    }
    let h = 1.0 / n as f64;
    let mut coords = Vec::with_capacity(2 * (n + 1) * (n + 1));
    for i in 0..=n {
        for j in 0..=n {
            coords.extend([i as f64 * h, j as f64 * h]);
        }
    }
    let mut m = interpolate_simplices(&cells, (n + 1) * (n + 1), 2)?.with_coordinates(2, coords)?;
    m.mark_boundary();
    Ok(m)
}

/// Unit cube, `n³` hexes each split into the 6 tetrahedra around the
/// main diagonal.
pub fn gen_box_3d(n: usize) -> Result<Plex> {
    if n == 0 {
        return invalid("box mesh needs n >= 1");
    }
    let m1 = n + 1;
    let vid = |x: [usize; 3]| (x[0] * m1 + x[1]) * m1 + x[2];
    const PERMS: [([usize; 3], bool); 6] = [
        ([0, 1, 2], true),
        ([0, 2, 1], false),
        ([1, 0, 2], false),
        ([1, 2, 0], true),
        ([2, 0, 1], true),
        ([2, 1, 0], false),
    ];
    let mut cells = Vec::with_capacity(6 * n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for (perm, even) in PERMS {
                    let mut x = [i, j, k];
                    let mut path = vec![vid(x)];
                    for axis in perm {
                        x[axis] += 1;
                        path.push(vid(x));
                    }
                    if !even {
                        path.swap(1, 2);
                    }
                    cells.push(path);
                }
            }
        }
    }
    let h = 1.0 / n as f64;
    let mut coords = Vec::with_capacity(3 * m1 * m1 * m1);
    for i in 0..m1 {
        for j in 0..m1 {
            for k in 0..m1 {
                coords.extend([i as f64 * h, j as f64 * h, k as f64 * h]);
            }
        }
    }
    let mut m = interpolate_simplices(&cells, m1 * m1 * m1, 3)?.with_coordinates(3, coords)?;
    m.mark_boundary();
    Ok(m)
}
