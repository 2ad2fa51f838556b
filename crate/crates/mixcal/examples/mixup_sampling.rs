//! Draws Mixup interpolation weights for several Beta shapes and mixes a
//! small batch, printing the provenance kept for loss evaluation on the
//! original pair members.
//!
//!     cargo run --release --example mixup_sampling

use mixcal::matrix::Matrix;
use mixcal::mixup::{mix_batch, sample_gamma};
use mixcal::rng::{stream, Purpose};

fn main() {
    println!("gamma ~ Beta(beta, beta), 100k draws per shape");
    println!("{:>6} {:>10} {:>10} {:>10}", "beta", "mean", "variance", "theory var");
    for (i, beta) in [0.2, 0.5, 1.0, 2.0, 8.0].into_iter().enumerate() {
        let mut rng = stream(i as u64, Purpose::Mixup);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_gamma(beta, &mut rng).unwrap()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / n as f64;
        let theory = 1.0 / (4.0 * (2.0 * beta + 1.0));
        println!("{beta:>6} {mean:>10.4} {var:>10.4} {theory:>10.4}");
    }

    println!("\nmixing a 4-sample batch (beta = 0.4):");
    let inputs = Matrix::from_rows(&[
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![1.0, 1.0],
    ])
    .unwrap();
    let labels = [0usize, 0, 1, 1];
    let mut rng = stream(42, Purpose::Mixup);
    let batch = mix_batch(&inputs, &labels, 2, 0.4, &mut rng).unwrap();
    println!(
        "{:>3} {:>6} {:>18} {:>18} {:>16}",
        "i", "gamma", "x1 -> x2", "x_tilde", "t_tilde"
    );
    for i in 0..4 {
        println!(
            "{i:>3} {:>6.3} [{:>4.1} {:>4.1}] -> [{:>4.1} {:>4.1}] [{:>6.3} {:>6.3}] [{:>6.3} {:>6.3}]",
            batch.gamma[i],
            batch.x1.at(i, 0),
            batch.x1.at(i, 1),
            batch.x2.at(i, 0),
            batch.x2.at(i, 1),
            batch.x_tilde.at(i, 0),
            batch.x_tilde.at(i, 1),
            batch.t_tilde.at(i, 0),
            batch.t_tilde.at(i, 1),
        );
    }
    println!("\neach soft target row sums to 1 and keeps at most two nonzero entries;");
    println!("the original pair (x1, t1, x2, t2) stays available for losses that");
    println!("want the unmixed points.");
}
