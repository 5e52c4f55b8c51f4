//! Tour of the synthetic data module: draw real curves from the band, check
//! containment, fit quadratics back out of samples, and measure diversity.
//!
//!     cargo run --example curve_band

use racing_gan::analysis::diversity_metric;
use racing_gan::synthdata::{
    containment_rate, fit_quadratic, sample_real, write_curve_csv, CurveBand,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> racing_gan::Result<()> {
    let band = CurveBand::default_band();
    println!(
        "band: lower {:?}, upper {:?}, {} grid points in [{}, {}]",
        band.lower().coeffs(),
        band.upper().coeffs(),
        band.grid_len(),
        band.grid()[0],
        band.grid()[band.grid_len() - 1]
    );

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let samples = sample_real(&band, 8, &mut rng)?;
    println!("drew {} curves; containment at tol 0: {}", samples.len(), containment_rate(&samples, &band, 0.0)?);

    let mid = band.grid_len() / 2;
    for (i, s) in samples.iter().take(3).enumerate() {
        let q = fit_quadratic(s, band.grid())?;
        println!(
            "  curve {i}: y({:.3}) = {:.4}, fitted coefficients ({:.4}, {:.4}, {:.4})",
            band.grid()[mid],
            s.y[mid],
            q.a,
            q.b,
            q.c
        );
    }

    let big = sample_real(&band, 4096, &mut rng)?;
    println!(
        "diversity of real data (std of band position): {:.4}  (uniform would be {:.4})",
        diversity_metric(&big, &band)?,
        1.0 / 12f64.sqrt()
    );

    let out = std::path::Path::new("out/curve_band");
    std::fs::create_dir_all(out)?;
    let path = out.join("real_curves.csv");
    write_curve_csv(&path, &band, &samples)?;
    println!("wrote {}", path.display());
    Ok(())
}
