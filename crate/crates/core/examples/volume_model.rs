//! Predicted distribution volume against bytes measured by the ledger.

use plexdist::comm::{compare_volumes, predict_volumes, stage, CommWorld};
use plexdist::distribute::{distribute, DistributeOptions};
use plexdist::meshgen::{box_3d_counts, gen_box_3d};

fn main() -> plexdist::Result<()> {
    let c = box_3d_counts(128);
    let v = predict_volumes(c.cells, c.faces, c.edges, c.vertices);
    println!("n=128: {} cells, {} faces, {} edges, {} vertices", c.cells, c.faces, c.edges, c.vertices);
    println!("  partition {:>13} B  ({:.2} GB)", v.partition, v.partition as f64 / 1e9);
    println!("  migration {:>13} B  ({:.2} GB)", v.migration, v.migration as f64 / 1e9);

    println!("{:>3} {:>10} {:>10} {:>7}", "n", "predicted", "measured", "error");
    for n in [2, 4, 8] {
        let m = gen_box_3d(n)?;
        let k = m.counts();
        let p = predict_volumes(k.cells as u64, k.faces as u64, k.edges as u64, k.vertices as u64);
        let world = CommWorld::new(2)?;
        distribute(&world, &m, &DistributeOptions::default())?;
        let cmp = compare_volumes(p.distribution_total(), &world, &[stage::PARTITION, stage::MIGRATION]);
        println!(
            "{n:>3} {:>10} {:>10} {:>6.2}%",
            cmp.predicted,
            cmp.measured,
            100.0 * cmp.relative_error.unwrap_or(0.0)
        );
    }
    Ok(())
}
