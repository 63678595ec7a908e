//! One-to-all distribution of the doublet onto two ranks.

use plexdist::comm::{stage, CommWorld};
use plexdist::distribute::{distribute_by_label, partition, relabel, PartitionMethod};
use plexdist::format::write_sf;
use plexdist::meshgen::gen_doublet;
use plexdist::plex::Adjacency;

fn main() -> plexdist::Result<()> {
    let serial = gen_doublet();
    let world = CommWorld::new(2)?;
    // B to rank 0, A to rank 1.
    let cells = relabel(&partition(&serial, 2, &PartitionMethod::Chunk)?, &[1, 0])?;
    let d = distribute_by_label(&world, &serial, &cells, 0, Adjacency::Fv)?;
    for (r, m) in d.plexes.iter().enumerate() {
        let c = m.counts();
        println!(
            "rank {r}: {} points ({} cells, {} edges, {} vertices), owns {}",
            m.num_points(),
            c.cells,
            c.edges,
            c.vertices,
            d.owned_points(r).len()
        );
        print!("{}", write_sf(d.point_sf.forest(r)));
    }
    for s in [stage::PARTITION, stage::MIGRATION, stage::OWNERSHIP] {
        println!("{s:<10} {:>6} bytes", world.total_sent(&[s]));
    }
    Ok(())
}
