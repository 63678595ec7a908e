//! Uniform refinement of a triangulated square, with the boundary label
//! carried to the children.

use plexdist::format::write_plex;
use plexdist::meshgen::gen_box_2d;
use plexdist::plex::{uniform_refine_2d, BOUNDARY};

fn main() -> plexdist::Result<()> {
    let mut m = gen_box_2d(2)?;
    for level in 0..=3 {
        let c = m.counts();
        let boundary = m.label(BOUNDARY).map_or(0, |l| l.stratum_size(1));
        println!(
            "level {level}: {:>4} cells {:>4} edges {:>4} vertices, euler {}, {boundary} boundary points",
            c.cells,
            c.edges,
            c.vertices,
            m.euler_characteristic()
        );
        m = uniform_refine_2d(&m)?;
    }
    let text = write_plex(&gen_box_2d(1)?)?;
    println!("\nunit square as a mesh file:\n{text}");
    Ok(())
}
