//! Grow halos of one and two layers and compare adjacency kinds.

use plexdist::comm::{stage, CommWorld};
use plexdist::distribute::{distribute, DistributeOptions, PartitionMethod};
use plexdist::invariants::check_distributed;
use plexdist::meshgen::gen_box_2d;
use plexdist::overlap::distribute_overlap;
use plexdist::plex::Adjacency;

fn main() -> plexdist::Result<()> {
    let serial = gen_box_2d(8)?;
    let world = CommWorld::new(4)?;
    let opts = DistributeOptions {
        method: PartitionMethod::GreedyBfs,
        ..Default::default()
    };
    let base = distribute(&world, &serial, &opts)?;
    println!("no overlap: points per rank {:?}", base.plexes.iter().map(|m| m.num_points()).collect::<Vec<_>>());
    for kind in [Adjacency::Fv, Adjacency::Fe] {
        for levels in [1, 2] {
            let before = world.total_sent(&[stage::OVERLAP]);
            let o = distribute_overlap(&world, &base, levels, kind)?;
            let cells: Vec<usize> = o.plexes.iter().map(|m| m.cells().len()).collect();
            let ghosts: Vec<usize> = (0..4).map(|r| o.plexes[r].cells().len() - o.owned_cells(r).len()).collect();
            println!(
                "{kind:?} levels {levels}: cells {cells:?}, ghost cells {ghosts:?}, {} bytes, {} violations",
                world.total_sent(&[stage::OVERLAP]) - before,
                check_distributed(&o, None).len()
            );
        }
    }
    Ok(())
}
