//! Small disorder-ensemble sweep written as CSV plus a JSON sidecar.
//!
//! ```text
//! cargo run --example ensemble_sweep -- out/sweep
//! ```

use std::path::PathBuf;

use nonthermal::experiments::{run_sweep, write_outputs, ExperimentPlan};

fn main() -> nonthermal::Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("nonthermal-sweep"), PathBuf::from);
    let plan = ExperimentPlan { n_values: (3..=7).collect(), samples_per_n: 10, ..ExperimentPlan::default() };
    let result = run_sweep(&plan)?;
    println!("{:>3} {:>10} {:>10} {:>10} {:>10}", "n", "d_eff", "D_omega", "C_eq", "max Delta");
    for p in &result.panels {
        println!(
            "{:>3} {:>10.3} {:>10.4} {:>10.4} {:>10.4}",
            p.n, p.d_eff.mean, p.d_omega.mean, p.c_eq.mean, p.max_margin.mean
        );
    }
    for path in write_outputs(&out, &result, serde_json::Value::Null)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
