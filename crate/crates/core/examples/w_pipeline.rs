//! Fidelity density for two N x K induced states (K >= N >= 3) from the contour pipeline.

use randfid::analytic::{moment_root_fidelity_series, SeriesConfig};
use randfid::curve::midpoint_grid;
use randfid::distnum::{WConfig, WPipelineState};

pub struct WSummary {
    pub normalization: f64,
    pub mean_root: (f64, f64),
    pub mean_f: (f64, f64),
    pub curve: Vec<(f64, f64)>,
}

pub fn run_example(n: usize, k: usize) -> randfid::Result<WSummary> {
    let st = WPipelineState::new(n, k, WConfig::default())?;
    let series = moment_root_fidelity_series(n, k as f64, 2, &SeriesConfig::default())?;
    let curve = st.curve(&midpoint_grid(25))?;
    Ok(WSummary {
        normalization: st.normalization()?,
        mean_root: (st.moment(1)?, series.get(1).unwrap_or(f64::NAN)),
        mean_f: (st.moment(2)?, series.get(2).unwrap_or(f64::NAN)),
        curve: curve.f.into_iter().zip(curve.pdf).collect(),
    })
}

fn main() -> randfid::Result<()> {
    let w = run_example(3, 3)?;
    println!("raw normalization {:.10}", w.normalization);
    println!("<sqrt F>: pipeline {:.10}, series {:.10}", w.mean_root.0, w.mean_root.1);
    println!("<F>:      pipeline {:.10}, series {:.10}", w.mean_f.0, w.mean_f.1);
    for (f, p) in w.curve {
        println!("{f:.3} {p:.6}");
    }
    Ok(())
}
