//! Project two well-separated blobs to 5 dimensions and score how well
//! neighbourhoods survive.

use querytax::corpus::EmbeddingSet;
use querytax::reduce::{reduce, trustworthiness, ReducerConfig};
use querytax::synth::gaussian_blobs;

fn main() -> querytax::Result<()> {
    let blobs = gaussian_blobs(&[500, 500], 10, 10.0, 1.0, 1);
    let set = EmbeddingSet::from_matrix(blobs.points.clone())?;
    let config = ReducerConfig::new(5, 15, 42);
    let out = reduce(&set, &config)?;
    println!("{:?} init, output {:?}", out.init, out.matrix.dim());
    println!("trustworthiness(k=10) = {:.4}", trustworthiness(blobs.points.view(), out.matrix.view(), 10));

    let again = reduce(&set, &config)?;
    println!("same seed, identical output: {}", again.matrix == out.matrix);
    Ok(())
}
