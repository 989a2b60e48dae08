//! Run a small simulation grid in parallel and summarize per-method
//! medians, the same machinery the `riskratio simulate` subcommand drives.
//! The bundled `data/full_grid.toml` holds the full 144-cell layout.
//!
//! ```bash
//! cargo run --release --example simulation_grid
//! ```

use riskratio::io::parse_grid_config;
use riskratio::report::{render_medians, OutputFormat};
use riskratio::simulation::{run_grid, SimOptions};

const GRID: &str = r#"
clusters = [20, 50]
sizes = [5, 50]
gamma1 = 0.2
eta = [1.0, 2.0]
theta = [[0.1, 0.1], [0.2, 0.25]]
alpha = 0.05
replications = 500
seed = 42
"#;

fn main() {
    let config = parse_grid_config(GRID).unwrap();
    let specs = config.expand().unwrap();
    println!(
        "{} cells x {} good replications each\n",
        specs.len(),
        config.replications
    );

    let opts = SimOptions::new(config.alpha);
    let (cells, medians) = run_grid(&specs, &opts);

    for (spec, cell) in specs.iter().zip(&cells) {
        match cell {
            Ok(m) => println!(
                "cell clusters={:<2} size={:<3} eta={:<4} theta=({},{}): rejected {}",
                spec.clusters_per_group,
                spec.cluster_size,
                spec.eta,
                spec.theta1,
                spec.theta2,
                m.rejected_samples
            ),
            Err(e) => println!("cell failed: {e}"),
        }
    }

    println!("\nper-method medians over the grid:");
    let stdout = std::io::stdout();
    render_medians(&medians, OutputFormat::Table, stdout.lock()).unwrap();
}
