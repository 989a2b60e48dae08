//! Appropriateness check: before trusting an interval method on a real
//! study, simulate at the study's fitted parameters and verify the method's
//! coverage and interval location land in the recommended bands
//! (CP in [0.94, 0.96], distal share of noncoverage in [0.375, 0.625]).
//!
//! Uses the bundled multicenter anti-infective trial parameters, where the
//! baseline method shows both a liberal CP and a width anomaly.
//!
//! ```bash
//! cargo run --release --example appropriateness
//! ```

use std::path::Path;

use riskratio::io::read_params_config;
use riskratio::simulation::{appropriateness_check, SimOptions};

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/infection_trial.toml");
    let config = read_params_config(&path).unwrap();
    let spec = config.to_spec().unwrap();
    println!(
        "fitted parameters: rates {:.3}/{:.3} (ratio {:.2}), ICC {:.3}/{:.3}, {}+{} clusters",
        spec.treatment.gamma,
        spec.control.gamma,
        spec.eta(),
        spec.treatment.icc,
        spec.control.icc,
        spec.treatment.clusters,
        spec.control.clusters,
    );
    println!("replications: {}\n", spec.replications);

    let rows = appropriateness_check(&spec, &SimOptions::new(spec.alpha)).unwrap();
    println!(
        "{:<8}{:>8}{:>9}{:>9}  {:<6}{:<10}width",
        "method", "CP", "EW", "DNPTNP", "cp", "location"
    );
    for r in rows {
        println!(
            "{:<8}{:>8.4}{:>9.3}{:>9}  {:<6}{:<10}{}",
            r.method.name(),
            r.cp,
            r.ew,
            r.dnptnp.map_or("-".into(), |d| format!("{d:.3}")),
            if r.cp_ok { "ok" } else { "FLAG" },
            if r.location_ok { "ok" } else { "FLAG" },
            if r.width_anomaly { "FLAG" } else { "ok" },
        );
    }
}
