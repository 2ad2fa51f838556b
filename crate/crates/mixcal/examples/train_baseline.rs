//! Trains one cross-entropy baseline on the two-Gaussian benchmark and
//! prints the full calibration report.
//!
//!     cargo run --release --example train_baseline

use mixcal::config::{ExperimentConfig, Method};
use mixcal::data::{self, GaussianMixtureSpec};
use mixcal::rng::{stream, Purpose};
use mixcal::train;

fn main() {
    let mut config = ExperimentConfig::new(Method::Baseline, "overlap2d", vec![2, 32, 2]);
    config.dataset_size = 4096;
    config.split = [0.7, 0.15, 0.15];
    config.epochs = 60;
    config.batch_size = 128;
    config.learning_rate.initial = 0.1;
    config.learning_rate.decay_factor = 0.1;
    config.learning_rate.decay_epochs = vec![30, 45];
    config.seed = Some(2024);

    let result = train::run(&config).unwrap();

    println!("baseline MLP {:?} on overlap2d, {} epochs\n", config.layer_sizes, config.epochs);
    println!("epoch  mean CE   val acc");
    for e in (0..config.epochs).step_by(10).chain([config.epochs - 1]) {
        println!("{e:>5}  {:>7.4}  {:>7.4}", result.curves.ce[e], result.curves.val_accuracy[e]);
    }
    println!(
        "\ntest: acc {:.4}  ece {:.4}  mce {:.4}  brier {:.4}  nll {:.4}",
        result.test.accuracy, result.test.ece, result.test.mce, result.test.brier, result.test.nll
    );

    let optimal = data::bayes_error_estimate(
        &GaussianMixtureSpec::overlap2d(),
        50_000,
        &mut stream(1, Purpose::MonteCarlo),
    )
    .unwrap();
    println!(
        "optimal accuracy on this data: {:.4} ± {:.4} (irreducible class overlap)",
        1.0 - optimal.error,
        optimal.std_error
    );
    println!("wall time {:.2}s", result.wall_time_s);
}
