//! Fits `c1 + c2*x + c3*exp(-(x - c4)^2 / c5)` to noisy samples.

use intonation::histogram::{fit_points, tilted_gaussian, FitOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let truth = [2.0, 0.05, 100.0, 7.0, 400.0];
    let xs: Vec<f64> = (-60..=60).map(f64::from).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let noise = Normal::new(0.0, 2.0)?;
    let ys: Vec<f64> = xs.iter().map(|&x| tilted_gaussian(x, truth) + noise.sample(&mut rng)).collect();

    let fit = fit_points(&xs, &ys, &FitOptions::default());
    println!("       c1      c2       c3      c4       c5");
    println!("true {:>6.2} {:>7.3} {:>8.2} {:>7.2} {:>8.1}", truth[0], truth[1], truth[2], truth[3], truth[4]);
    println!("fit  {:>6.2} {:>7.3} {:>8.2} {:>7.2} {:>8.1}", fit.c1, fit.c2, fit.c3, fit.c4, fit.c5);
    println!("rmse {:.3}, converged: {}, sigma {:.2} cents", fit.rmse, fit.converged, fit.sigma());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
