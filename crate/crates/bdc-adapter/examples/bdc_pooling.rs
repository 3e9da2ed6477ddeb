//! The training-free pooling layer: feature map in, centered-distance
//! matrix out, with its defining invariants checked live.
//!
//! ```bash
//! cargo run --example bdc_pooling
//! ```

use bdc_adapter::bdc::{bdc_matrix, bdc_measure, distance_matrix};
use bdc_adapter::linalg::{gaussian_matrix, seeded_rng};

fn main() -> bdc_adapter::Result<()> {
    let mut rng = seeded_rng(42);
    let obs = gaussian_matrix(6, 8, &mut rng); // 8 observation columns in R^6

    let d = distance_matrix(&obs)?;
    println!("distance matrix: {0} x {0}, zero diagonal, symmetric", d.size());

    let raw = bdc_matrix(&obs, false)?;
    let m = raw.size();
    let max_row_sum = (0..m)
        .map(|i| (0..m).map(|j| raw.get(i, j)).sum::<f64>().abs())
        .fold(0.0_f64, f64::max);
    println!("double-centered: max |row sum| = {:.2e}", max_row_sum);

    let unit = bdc_matrix(&obs, true)?;
    println!(
        "unit-normalized: frobenius norm = {:.12}",
        unit.entries().frobenius_norm()
    );

    // Translation invariance: shifting every observation changes nothing.
    let mut shifted = obs.clone();
    for r in 0..obs.rows() {
        for c in 0..obs.cols() {
            shifted.set(r, c, obs.get(r, c) + 3.25);
        }
    }
    let raw_shifted = bdc_matrix(&shifted, false)?;
    let max_diff = raw
        .entries()
        .data()
        .iter()
        .zip(raw_shifted.entries().data())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    println!("translation invariance: max |delta| = {:.2e}", max_diff);

    // Self-measure equals the squared Frobenius norm.
    let v = bdc_measure(&raw, &raw)?;
    let fro = raw.entries().frobenius_norm();
    println!(
        "self measure tr(R'R) = {:.6}, ||R||_F^2 = {:.6}",
        v,
        fro * fro
    );
    Ok(())
}
