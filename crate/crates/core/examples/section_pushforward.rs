//! Push a point star forest forward along a P2-P1 dof layout.
//!
//! Rank 0 holds edges c, d, f and vertices ε, δ, φ; rank 1 holds a, b, e
//! and α, β, γ. Edges carry 2 dofs, vertices 3. f, ε, φ on rank 0 mirror
//! e, β, γ on rank 1.

use plexdist::comm::CommWorld;
use plexdist::datalayout::Section;
use plexdist::migrate::distribute_section;
use plexdist::starforest::{create_section_sf, DistributedSf, RemotePoint, StarForest};

fn main() -> plexdist::Result<()> {
    let world = CommWorld::new(2)?;
    let shared = StarForest::new(
        6,
        Some(vec![2, 3, 5]),
        vec![RemotePoint::new(1, 2), RemotePoint::new(1, 4), RemotePoint::new(1, 5)],
    )?;
    let sf = DistributedSf::new(2, vec![shared, StarForest::empty(6)])?;
    let layout = Section::from_dofs(0, vec![2, 2, 2, 3, 3, 3]);
    let sections = vec![layout.clone(), layout];

    let (remote_offsets, _) = distribute_section(&world, "dof", &sf, &sections)?;
    let dofs = create_section_sf(&sf, &sections, &remote_offsets, &sections)?;
    println!("shared dofs on rank 0:");
    for (l, rp) in dofs.forest(0).sorted_leaves() {
        println!("  {l:>2} -> ({}, {})", rp.index, rp.rank);
    }
    println!("offset broadcast moved {} bytes", world.total_sent(&["dof"]));
    Ok(())
}
