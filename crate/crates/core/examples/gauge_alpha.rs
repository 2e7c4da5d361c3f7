//! Gauge parameter alpha that maps a reference fidelity onto the random-state distribution.

use randfid::cli::{gauge_output, GaugeOutput};

pub fn run_example() -> Result<Vec<GaugeOutput>, randfid::cli::CliError> {
    [(2, 2.0, 0.75), (3, 2.0, 0.5), (4, 4.0, 0.6)].iter().map(|&(n, k, f)| gauge_output(n, k, f)).collect()
}

fn main() {
    match run_example() {
        Ok(rows) => {
            for g in rows {
                println!("{}", serde_json::to_string(&g).expect("serializable"));
            }
        }
        Err(e) => eprintln!("{e}"),
    }
}
