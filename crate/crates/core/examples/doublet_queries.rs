//! Topology queries on the two-triangle doublet.

use plexdist::meshgen::gen_doublet;
use plexdist::plex::Adjacency;

const NAMES: [&str; 11] = ["A", "B", "α", "β", "γ", "δ", "a", "b", "c", "d", "e"];

fn names(points: &[usize]) -> String {
    points.iter().map(|&p| NAMES[p]).collect::<Vec<_>>().join(" ")
}

fn main() -> plexdist::Result<()> {
    let m = gen_doublet();
    let c = m.counts();
    println!("{} cells, {} edges, {} vertices, euler {}", c.cells, c.edges, c.vertices, m.euler_characteristic());
    for p in m.chart() {
        println!(
            "{:>2}  depth {}  cone [{}]  supp [{}]",
            NAMES[p],
            m.point_depth(p)?,
            names(m.cone(p)?),
            names(m.support(p)?)
        );
    }
    let (a, beta, e) = (0, 3, 10);
    println!("cl(A)  = {}", names(&m.closure(a)?));
    println!("st(β)  = {}", names(&m.star(beta)?));
    println!("FE(e)  = {}", names(&m.adjacency(e, Adjacency::Fe)?));
    println!("FV(A)  = {}", names(&m.adjacency(a, Adjacency::Fv)?));
    Ok(())
}
