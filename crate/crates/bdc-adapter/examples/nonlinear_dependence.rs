//! Distance correlation sees nonlinear dependence that Pearson misses.
//!
//! Draws x uniform on (-1, 1), sets y = x^2, and compares the two
//! statistics, then repeats with independent normals as a control.
//!
//! ```bash
//! cargo run --example nonlinear_dependence
//! ```

use bdc_adapter::bdc::{dcorr, dcov_oracle, pearson};
use bdc_adapter::linalg::{gaussian_matrix, seeded_rng, Matrix};
use rand::Rng as _;

fn main() -> bdc_adapter::Result<()> {
    let n = 2000;
    let mut rng = seeded_rng(2024);
    let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();

    let x = Matrix::column_vector(&xs);
    let y = Matrix::column_vector(&ys);
    println!("y = x^2, n = {}", n);
    println!("  pearson  = {:+.4}  (blind to the parabola)", pearson(&xs, &ys)?);
    println!("  dcov     = {:.6}", dcov_oracle(&x, &y)?);
    println!("  dcorr    = {:.4}  (sees it)", dcorr(&x, &y)?);

    let mut rng = seeded_rng(77);
    let xi = gaussian_matrix(n, 1, &mut rng);
    let yi = gaussian_matrix(n, 1, &mut rng);
    println!("independent normals, n = {}", n);
    println!("  dcorr    = {:.4}  (near zero, as it should be)", dcorr(&xi, &yi)?);
    Ok(())
}
