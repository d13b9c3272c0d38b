//! Cluster three blobs plus scattered noise and inspect the condensed tree.

use ndarray::{concatenate, Array2, Axis};
use querytax::cluster::{hdbscan, ClusterParams};
use querytax::synth::gaussian_blobs;
use rand::{Rng, SeedableRng};

fn main() -> querytax::Result<()> {
    let blobs = gaussian_blobs(&[150, 100, 60], 3, 12.0, 1.0, 5);
    let mut rng = rand::rngs::StdRng::seed_from_u64(0);
    let noise = Array2::from_shape_fn((30, 3), |_| rng.random_range(-20.0f32..20.0));
    let points = concatenate(Axis(0), &[blobs.points.view(), noise.view()]).unwrap();

    let result = hdbscan(points.view(), &ClusterParams::from_fraction(25, 0.2))?;
    let labels = &result.labels;
    println!("{} clusters, sizes {:?}", labels.n_clusters(), labels.sizes);
    println!("stabilities {:.1?}", labels.stability);
    println!("noise points: {}", labels.labels.iter().filter(|&&l| l < 0).count());

    let tree = result.tree_export();
    for node in &tree.nodes {
        println!(
            "node {:>2} parent {:>4} size {:>3} lambda [{:.3}, {:.3}] stability {:.2}",
            node.id,
            node.parent.map_or("-".into(), |p| p.to_string()),
            node.size,
            node.lambda_birth,
            node.lambda_death,
            node.stability
        );
    }
    println!("selected nodes in label order: {:?}", tree.selected);
    Ok(())
}
