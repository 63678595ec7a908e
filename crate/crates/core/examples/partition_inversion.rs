//! Close a cell partition and invert it from senders to receivers.

use plexdist::comm::CommWorld;
use plexdist::datalayout::Label;
use plexdist::distribute::{partition_label_closure, partition_label_create_sf, partition_label_invert, resolve_shared_points};
use plexdist::meshgen::gen_doublet;
use plexdist::plex::Plex;
use plexdist::starforest::DistributedSf;

fn main() -> plexdist::Result<()> {
    let m = gen_doublet();
    let mut part = Label::new();
    part.insert(0, 1);
    part.insert(1, 0);

    let closed = partition_label_closure(&m, &part);
    for (rank, points) in closed.iter() {
        println!("closure sent to rank {rank}: {points:?}");
    }
    let resolved = resolve_shared_points(&closed);
    let (section, points) = resolved.to_section(0..2)?;
    println!("resolved layout: {:?} over {points:?}", (0..2).map(|r| (section.dof(r), section.offset(r))).collect::<Vec<_>>());

    let world = CommWorld::new(2)?;
    let plexes = vec![m, Plex::default()];
    let point_sf = DistributedSf::empty(&[11, 0]);
    let receivers = partition_label_invert(&world, "partition", &plexes, &[resolved, Label::new()], &point_sf)?;
    for (r, l) in receivers.iter().enumerate() {
        println!("rank {r} receives {:?}", l.stratum(0));
    }
    let sf = partition_label_create_sf(&plexes, &receivers)?;
    println!("migration forest leaves per rank: {} {}", sf.forest(0).nleaves(), sf.forest(1).nleaves());
    println!("inversion moved {} bytes", world.total_sent(&["partition"]));
    Ok(())
}
