//! Scratch probe: wdef failures at high elevation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wdef_core::*;

fn main() {
    let geo = ArrayGeometry::<f64>::half_wavelength(128, 128, 28e9).unwrap();
    let r = 1.243f64;
    for theta in [65.0, 70.0] {
        for trial in 0..3u64 {
            let positions: Vec<_> = [0.0, 120.0, 240.0]
                .iter()
                .map(|phi: &f64| {
                    SphericalCoord::new(r, (theta as f64).to_radians(), phi.to_radians())
                        .unwrap()
                        .to_cartesian()
                })
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(trial);
            let scatterers = scatterers_with_random_phases(&positions, &mut rng).unwrap();
            let scene = Scene::noiseless(geo, scatterers, 0).unwrap();
            let spec = spatial_to_wavenumber(&synthesize_response(&scene).unwrap(), 2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(trial + 100);
            let out = wdef_estimate(&spec, &geo, &EstimatorParams::default(), &mut rng).unwrap();
            print!("theta={theta} trial={trial}: found={}", out.estimates.len());
            for f in &out.failures {
                print!("  [cluster {} ERR {}]", f.cluster, f.error);
            }
            for e in &out.estimates {
                let best: f64 = positions
                    .iter()
                    .map(|p| {
                        let d = ((p.x - e.cartesian.x).powi(2)
                            + (p.y - e.cartesian.y).powi(2)
                            + (p.z - e.cartesian.z).powi(2))
                        .sqrt();
                        d / r
                    })
                    .fold(f64::INFINITY, f64::min);
                print!(" err={best:.4}");
            }
            println!();
        }
    }
}
