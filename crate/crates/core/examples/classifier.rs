//! Split labelled queries, train the logistic head, and evaluate it with
//! bootstrap intervals and Cohen's kappa against a second rater.

use querytax::classifier::{self, Partition, SplitSpec, TrainParams};
use querytax::corpus::Label;
use querytax::synth::{planted_intents, PlantedSpec};

fn main() -> querytax::Result<()> {
    let planted = planted_intents(&PlantedSpec {
        n_intents: 6,
        per_intent: 200,
        n_noise: 0,
        dim: 32,
        separation: 6.0,
        seed: 9,
    });
    // Even intents play the geospatial class.
    let labels: Vec<Label> = planted.truth.iter().map(|&t| Label::from_positive(t % 2 == 0)).collect();
    let split = classifier::stratified_split(
        &labels,
        &SplitSpec {
            train_n: 200,
            val_n: 200,
            test_n: 800,
            seed: 42,
        },
    )?;

    let train = planted.embeddings.select(split.part(Partition::Train));
    let train_labels: Vec<Label> = split.part(Partition::Train).iter().map(|&r| labels[r]).collect();
    let (model, report) = classifier::train_head(train.matrix(), &train_labels, &TrainParams::default())?;
    println!("loss {:.4} -> {:.4}", report.initial_loss(), report.final_loss());

    let test = planted.embeddings.select(split.part(Partition::Test));
    let gold: Vec<Label> = split.part(Partition::Test).iter().map(|&r| labels[r]).collect();
    let pred: Vec<Label> = classifier::predict(&model, &test)?.iter().map(|p| p.label).collect();
    let m = classifier::evaluate(&pred, &gold)?;
    println!("tp {} fp {} fn {} tn {}: accuracy {:.3}, f1 {:.3}", m.tp, m.fp, m.fn_, m.tn, m.accuracy, m.f1);
    for ci in classifier::bootstrap_ci(&pred, &gold, 1000, 0.95, 42)? {
        println!("  {:<9} 95% CI [{:.3}, {:.3}]", ci.metric.name(), ci.lower, ci.upper);
    }
    println!("kappa(model, gold) = {:.3}", classifier::cohens_kappa(&pred, &gold)?);
    Ok(())
}
