//! Minimal end-to-end run: estimate the volume of the 10-dimensional cube
//! and compare against the exact value 2^10 = 1024.

use polyvol::generators;
use polyvol::volume::{estimate_volume, VolumeParams};
use polyvol::RngStream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = generators::cube(10)?;
    let params = VolumeParams::default();
    let mut rng = RngStream::new(7);
    let est = estimate_volume(&p, &params, &mut rng)?;
    let rel = (est.volume - 1024.0) / 1024.0;
    println!(
        "cube-10: estimate {:.2} (exact 1024, rel err {:+.4}), N={}, W={}, phases {}..{}, {:.3}s",
        est.volume, rel, est.n, est.w, est.alpha, est.beta, est.elapsed_seconds
    );
    Ok(())
}
