//! Sample clustered binary data from the beta-binomial model and compare
//! the empirical moments with their closed forms: mean `n*gamma` and
//! variance `n*gamma*(1-gamma)*(1 + (n-1)*theta)`.
//!
//! ```bash
//! cargo run --release --example beta_binomial_moments
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use riskratio::simulation::beta_binomial_clusters;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let draws = 200_000usize;
    println!(
        "{:>6}{:>7}{:>7}{:>12}{:>12}{:>12}{:>12}",
        "size", "gamma", "theta", "mean", "exp.mean", "var", "exp.var"
    );
    for (size, gamma, theta) in [
        (5u32, 0.2, 0.0),
        (5, 0.2, 0.25),
        (50, 0.2, 0.1),
        (50, 0.4, 0.25),
        (100, 0.1, 0.2),
    ] {
        let group = beta_binomial_clusters(&vec![size; draws], gamma, theta, &mut rng);
        let ys: Vec<f64> = group
            .clusters()
            .iter()
            .map(|c| f64::from(c.successes))
            .collect();
        let mean = ys.iter().sum::<f64>() / draws as f64;
        let var = ys.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>()
            / (draws as f64 - 1.0);

        let n = f64::from(size);
        let expect_mean = n * gamma;
        let expect_var = n * gamma * (1.0 - gamma) * (1.0 + (n - 1.0) * theta);
        println!(
            "{size:>6}{gamma:>7.2}{theta:>7.2}{mean:>12.4}{expect_mean:>12.4}{var:>12.4}{expect_var:>12.4}"
        );
    }
    println!("\nclustering inflates the variance by the design effect 1 + (n-1)*theta");
}
