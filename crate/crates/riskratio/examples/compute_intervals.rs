//! Compute all 17 risk-ratio confidence intervals for a study assembled in
//! code.
//!
//! ```bash
//! cargo run --example compute_intervals
//! ```

use riskratio::data::{GroupData, TwoGroupStudy};
use riskratio::estimators::group_summary;
use riskratio::methods::compute_all;

fn main() {
    // Cluster data as (size, successes) pairs. Two arms of a small
    // multi-site trial; sites are the clusters.
    let treatment = GroupData::from_pairs(&[
        (37, 22),
        (42, 29),
        (29, 15),
        (51, 33),
        (44, 28),
        (33, 16),
        (40, 26),
        (38, 21),
    ])
    .unwrap();
    let control = GroupData::from_pairs(&[
        (35, 14),
        (46, 18),
        (31, 9),
        (48, 22),
        (41, 15),
        (36, 12),
        (39, 18),
        (42, 13),
    ])
    .unwrap();
    let study = TwoGroupStudy::new(treatment, control);

    let s1 = group_summary(&study.treatment);
    let s2 = group_summary(&study.control);
    println!(
        "treatment: rate {:.3}, ICC {:.3}; control: rate {:.3}, ICC {:.3}",
        s1.gamma_hat, s1.icc, s2.gamma_hat, s2.icc
    );
    println!("risk ratio estimate: {:.4}\n", study.eta_hat());

    println!("{:<8}{:>10}{:>10}{:>10}  flags", "method", "lower", "upper", "width");
    for result in compute_all(&study, 0.05) {
        match result.limits() {
            Some((lower, upper)) => println!(
                "{:<8}{:>10.4}{:>10.4}{:>10.4}  {}",
                result.method.name(),
                lower,
                upper,
                upper - lower,
                result.flags
            ),
            None => println!(
                "{:<8}  does not exist ({})",
                result.method.name(),
                result.reason().unwrap()
            ),
        }
    }
}
