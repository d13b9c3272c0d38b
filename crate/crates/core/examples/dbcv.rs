//! Density-based validity of a good labelling, a shuffled one, and one with
//! noise.

use querytax::synth::gaussian_blobs;
use querytax::validate::{adjusted_rand_index, dbcv};
use rand::seq::SliceRandom;
use rand::SeedableRng;

fn main() -> querytax::Result<()> {
    let blobs = gaussian_blobs(&[80, 80, 40], 4, 8.0, 1.0, 2);
    let report = dbcv(blobs.points.view(), &blobs.truth)?;
    println!("true labels: DBCV {:.4}", report.overall);
    for c in &report.per_cluster {
        println!("  cluster {} size {:>3} validity {:.4}", c.id, c.size, c.validity);
    }

    let mut shuffled = blobs.truth.clone();
    shuffled.shuffle(&mut rand::rngs::StdRng::seed_from_u64(1));
    println!("shuffled:    DBCV {:.4}", dbcv(blobs.points.view(), &shuffled)?.overall);

    // Marking points as noise lowers the score through the size weighting.
    let mut partial = blobs.truth.clone();
    partial.iter_mut().step_by(4).for_each(|l| *l = -1);
    println!("25% noise:   DBCV {:.4}", dbcv(blobs.points.view(), &partial)?.overall);
    println!("ARI(truth, 25% noise) = {:.3}", adjusted_rand_index(&blobs.truth, &partial)?);
    Ok(())
}
