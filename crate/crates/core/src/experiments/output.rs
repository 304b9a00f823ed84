use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::{SweepOutput, PanelRow, Stat};
use crate::diagnostics::{QuenchRecord, BLOCK_WEIGHT_FLOOR, HAAR_STDERR_ALLOWANCE};
use crate::error::Result;
use crate::hilbert::NEGATIVE_EIGENVALUE_FLOOR;
use crate::spectral::DEGENERACY_RELATIVE_TOLERANCE;

pub const RECORD_COLUMNS: [&str; 16] = [
    "n",
    "sample_index",
    "seed",
    "k_config_bits",
    "d_eff_1",
    "d_eff_2",
    "C_eq_1",
    "C_eq_2",
    "R_1",
    "R_2",
    "delta_sample",
    "D_init",
    "D_omega",
    "Delta",
    "thm1_lb",
    "degenerate_flag",
];

pub const AGGREGATE_COLUMNS: [&str; 19] = [
    "n",
    "samples",
    "subsample_size",
    "mean_delta_k",
    "std_delta_k",
    "mean_D_omega",
    "std_D_omega",
    "mean_d_eff",
    "std_d_eff",
    "mean_C_eq",
    "std_C_eq",
    "mean_max_Delta",
    "std_max_Delta",
    "mean_argmax_d_eff",
    "std_argmax_d_eff",
    "mean_argmax_C_eq",
    "std_argmax_C_eq",
    "degenerate_samples",
    "gap_degenerate_samples",
];

// `Display` for f64 prints the shortest string that parses back to the same value.
fn f(x: f64) -> String {
    format!("{x}")
}

fn record_row(r: &QuenchRecord) -> Vec<String> {
    vec![
        r.n.to_string(),
        r.sample_index.to_string(),
        r.seed.to_string(),
        r.k_config_bits.clone(),
        f(r.d_eff_1),
        f(r.d_eff_2),
        f(r.c_eq_1),
        f(r.c_eq_2),
        f(r.r_1),
        f(r.r_2),
        f(r.delta_sample),
        f(r.d_init),
        f(r.d_omega),
        f(r.margin),
        f(r.thm1_lb),
        r.degenerate_flag.to_string(),
    ]
}

fn panel_row(p: &PanelRow) -> Vec<String> {
    let mut row = vec![p.n.to_string(), p.samples.to_string(), p.subsample_size.to_string()];
    for s in [p.delta_k, p.d_omega, p.d_eff, p.c_eq, p.max_margin, p.argmax_d_eff, p.argmax_c_eq] {
        let Stat { mean, std } = s;
        row.push(f(mean));
        row.push(f(std));
    }
    row.push(p.degenerate_samples.to_string());
    row.push(p.gap_degenerate_samples.to_string());
    row
}

pub fn write_records_csv<W: Write>(out: W, records: &[QuenchRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_COLUMNS)?;
    for r in records {
        w.write_record(record_row(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate_csv<W: Write>(out: W, panels: &[PanelRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_COLUMNS)?;
    for p in panels {
        w.write_record(panel_row(p))?;
    }
    w.flush()?;
    Ok(())
}

/// Sidecar describing how the tables were produced. Contains no timestamps
/// or host details, so it is reproducible byte for byte.
pub fn metadata_json(output: &SweepOutput, extra: serde_json::Value) -> serde_json::Value {
    let subsampled: Vec<_> = output
        .panels
        .iter()
        .map(|p| json!({ "n": p.n, "initial_states_per_sample": p.subsample_size, "full": p.subsample_size == 1usize << p.n }))
        .collect();
    json!({
        "software": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "plan": output.plan,
        "conventions": {
            "site_ordering": "little-endian: site i is bit i-1 of the basis index; bit 0 = spin up = +1 of sigma^Z",
            "boundary": "open",
            "energy_unit": "sigma0",
            "time_unit": "1/sigma0",
            "entropy_log_base": "e",
            "prng": "ChaCha20 via seed_from_u64, one stream id per purpose; per-sample seeds by SplitMix64 of (master_seed, n, sample_index)",
            "aggregation": "per-sample average over initial states first, then mean and sample standard deviation over disorder samples",
            "argmax_state": "d_eff and C_eq of psi_0^(1) in the record maximizing Delta",
        },
        "tolerances": {
            "degeneracy_relative": DEGENERACY_RELATIVE_TOLERANCE,
            "negative_eigenvalue_floor": NEGATIVE_EIGENVALUE_FLOOR,
            "degenerate_block_weight_floor": BLOCK_WEIGHT_FLOOR,
            "nonthermalization_check": 1e-10,
            "haar_stderr_allowance": HAAR_STDERR_ALLOWANCE,
            "sigma_z_alignment_threshold": super::ALIGNMENT_THRESHOLD,
        },
        "subsampling": subsampled,
        "sigma_z_alignment": output.alignment,
        "extra": extra,
    })
}

/// Writes `records.csv`, `aggregate.csv` and `metadata.json` into `dir`.
pub fn write_outputs(dir: &Path, output: &SweepOutput, extra: serde_json::Value) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let records = dir.join("records.csv");
    let aggregate = dir.join("aggregate.csv");
    let metadata = dir.join("metadata.json");
    write_records_csv(fs::File::create(&records)?, &output.records)?;
    write_aggregate_csv(fs::File::create(&aggregate)?, &output.panels)?;
    let mut text = serde_json::to_string_pretty(&metadata_json(output, extra))?;
    text.push('\n');
    fs::write(&metadata, text)?;
    Ok(vec![records, aggregate, metadata])
}
