//! Scratch probe: signed GMM distance-error profile over elevation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wdef_core::*;

fn main() {
    let geo = ArrayGeometry::<f64>::half_wavelength(128, 128, 28e9).unwrap();
    let r = 1.243f64;

    for rel_db in [12.0, 15.0, 18.0] {
        // Calibration: single scatterer at (r, 45 deg, 0), same pipeline.
        let params = EstimatorParams {
            rel_db,
            ..EstimatorParams::default()
        };
        let sigma_of = |theta_deg: f64, phi_deg: f64, seed: u64| -> f64 {
            let s = SphericalCoord::new(r, theta_deg.to_radians(), phi_deg.to_radians()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sc = scatterers_with_random_phases(&[s.to_cartesian()], &mut rng).unwrap();
            let scene = Scene::noiseless(geo, sc, 0).unwrap();
            let spec = spatial_to_wavenumber(&synthesize_response(&scene).unwrap(), 2).unwrap();
            let mask = threshold_support(&spec, rel_db).unwrap();
            let pts = mask.points();
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
            let model = gmm_cluster(&pts, None, 1..=1, &GmmParams::default(), &mut rng).unwrap();
            let [sx, sy] = model.sigmas(0);
            (sx * sx + sy * sy).sqrt()
        };
        let gamma = r * sigma_of(45.0, 0.0, 100);
        print!("rel_db={rel_db:>4}: ");
        for theta in [25.0, 30.0, 35.0, 45.0, 55.0, 65.0, 70.0, 75.0] {
            let sigma = sigma_of(theta, 0.0, 200);
            let r_hat = gamma / sigma;
            print!("{theta:.0}:{:+.3} ", (r_hat - r) / r);
        }
        println!();
    }
}
