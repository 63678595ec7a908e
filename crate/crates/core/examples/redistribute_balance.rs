//! Repartition a randomly distributed mesh with region growing.

use plexdist::comm::{stage, CommWorld};
use plexdist::distribute::{distribute, imbalance, redistribute, CellGraph, DistributeOptions, PartitionMethod};
use plexdist::meshgen::gen_box_2d;

fn main() -> plexdist::Result<()> {
    let serial = gen_box_2d(16)?;
    let world = CommWorld::new(4)?;
    let opts = DistributeOptions {
        method: PartitionMethod::Random { seed: 1 },
        ..Default::default()
    };
    let d = distribute(&world, &serial, &opts)?;
    let r = redistribute(&world, &d, &PartitionMethod::GreedyBfs)?;
    for (name, mesh) in [("random", &d), ("greedy-bfs", &r)] {
        let counts = mesh.owned_cell_counts();
        let ghosts: usize = mesh.point_sf.total_leaves();
        println!("{name:<10} owned cells {counts:?}  imbalance {:.3}  shared points {ghosts}", imbalance(&counts));
    }
    let graph = CellGraph::from_plex(&serial);
    let chunk = PartitionMethod::Chunk;
    let greedy = PartitionMethod::GreedyBfs;
    use plexdist::distribute::Partitioner;
    println!(
        "serial edge cut: chunk {}, greedy-bfs {}",
        graph.edge_cut(&chunk.partition(&graph, 4)?),
        graph.edge_cut(&greedy.partition(&graph, 4)?)
    );
    println!(
        "bytes: inversion {}, redistribution {}",
        world.total_sent(&[stage::INVERSION]),
        world.total_sent(&[stage::REDISTRIBUTION])
    );
    Ok(())
}
