//! Decisions that minimize expected loss: with zero-one losses the rule is
//! the posterior argmax, but an asymmetric loss matrix can overrule the
//! more probable class.
//!
//!     cargo run --release --example bayes_rule

use mixcal::matrix::Matrix;
use mixcal::metrics::{bayes_decision, LossMatrix};

fn main() {
    let posterior = [0.6, 0.4];

    let zero_one = LossMatrix::zero_one(2);
    let action = bayes_decision(&posterior, &zero_one).unwrap();
    println!("posterior {posterior:?}");
    println!("zero-one losses         -> action {action} (the argmax)");

    // mistaking class 1 for class 0 is ten times worse than the reverse
    let asymmetric = LossMatrix::new(
        Matrix::from_rows(&[vec![0.0, 10.0], vec![1.0, 0.0]]).unwrap(),
    )
    .unwrap();
    let action = bayes_decision(&posterior, &asymmetric).unwrap();
    let risk0 = 10.0 * posterior[1];
    let risk1 = 1.0 * posterior[0];
    println!("asymmetric losses       -> action {action} (risks: {risk0:.2} vs {risk1:.2})");

    println!("\nthe decision flipped without the posterior changing: once probabilities");
    println!("feed a risk computation, they have to be trustworthy in magnitude, not");
    println!("just ranked correctly. That is what calibration buys.");

    // the cost of deciding on a miscalibrated posterior: the model claims
    // 0.60 for class 0, but among inputs it scores that way class 0 really
    // occurs 92% of the time
    let truth = 0.92;
    let chosen = bayes_decision(&posterior, &asymmetric).unwrap();
    let loss_of = |action: usize| if action == 0 { 10.0 * (1.0 - truth) } else { truth };
    let best = bayes_decision(&[truth, 1.0 - truth], &asymmetric).unwrap();
    println!("\nif the claimed 0.60 is really {truth:.2}:");
    println!(
        "  acting on the claim  -> action {chosen}, true expected loss {:.0} per 1000",
        loss_of(chosen) * 1000.0
    );
    println!(
        "  acting on the truth  -> action {best}, true expected loss {:.0} per 1000",
        loss_of(best) * 1000.0
    );
}
