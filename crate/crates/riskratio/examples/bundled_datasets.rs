//! Run the interval methods on the two bundled demonstration datasets.
//!
//! The first dataset makes the ratio-estimator baseline (`MR3`) produce an
//! interval far wider than every alternative; the second makes it fail to
//! exist entirely while all 16 other methods stay finite.
//!
//! ```bash
//! cargo run --example bundled_datasets
//! ```

use std::path::Path;

use riskratio::estimators::anova_icc;
use riskratio::io::read_study_csv;
use riskratio::methods::compute_all;

fn show(path: &Path) {
    println!("=== {}", path.file_name().unwrap().to_string_lossy());
    let study = read_study_csv(path).unwrap();
    for (label, group) in [("treatment", &study.treatment), ("control", &study.control)] {
        let icc = anova_icc(group)
            .map(|a| format!("{:.3}", a.truncated))
            .unwrap_or_else(|_| "degenerate".into());
        println!(
            "  {label}: {} clusters, {}/{} successes, ICC {icc}",
            group.num_clusters(),
            group.total_successes(),
            group.total_size(),
        );
    }
    for result in compute_all(&study, 0.05) {
        match result.limits() {
            Some((l, u)) => println!(
                "  {:<4} ({:>8.3}, {:>9.3})  width {:>9.3}",
                result.method.name(),
                l,
                u,
                u - l
            ),
            None => println!(
                "  {:<4} does not exist: {}",
                result.method.name(),
                result.reason().unwrap()
            ),
        }
    }
    println!();
}

fn main() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    show(&data.join("width_anomaly.csv"));
    show(&data.join("fieller_nonexistent.csv"));
}
