//! Scratch probe for pipeline accuracy (development aid).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wdef_core::*;

fn main() {
    let geo = ArrayGeometry::<f64>::half_wavelength(128, 128, 28e9).unwrap();
    let fresnel = geo.fresnel_distance_x();
    println!("fresnel = {fresnel:.4} m, aperture = {:.4} m", geo.aperture_x());

    for frac in [0.1, 0.2, 0.3, 0.5, 0.8] {
        for phi_deg in [0.0, 30.0, 120.0] {
            let r = frac * fresnel;
            let s = SphericalCoord::new(r, 45f64.to_radians(), (phi_deg as f64).to_radians()).unwrap();
            let pos = s.to_cartesian();
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let scatterers = scatterers_with_random_phases(&[pos], &mut rng).unwrap();
            let scene = Scene::noiseless(geo, scatterers, 0).unwrap();
            let resp = synthesize_response(&scene).unwrap();
            let spec = spatial_to_wavenumber(&resp, 2).unwrap();

            let params = EstimatorParams::default();
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            let t0 = std::time::Instant::now();
            match wdef_estimate(&spec, &geo, &params, &mut rng) {
                Ok(out) => {
                    if out.estimates.is_empty() {
                        println!(
                            "r={r:.3} phi={phi_deg:>5}: NO estimates, {} failures: {:?}",
                            out.failures.len(),
                            out.failures.iter().map(|f| f.error.to_string()).collect::<Vec<_>>()
                        );
                        continue;
                    }
                    let e = &out.estimates[0];
                    let dr = (e.spherical.r - r).abs() / r;
                    let aoa = wdef_core::metrics::great_circle_angle(
                        e.spherical.theta,
                        e.spherical.phi,
                        s.theta,
                        s.phi,
                    )
                    .to_degrees();
                    let d = e.diagnostics.as_ref().unwrap();
                    println!(
                        "r={r:.3} phi={phi_deg:>5}: n={} rel_dr={:.4}% aoa={:.4} deg  a={:?} gap={:.2e} t={:?}",
                        out.estimates.len(),
                        dr * 100.0,
                        aoa,
                        d.boundary_a.map(|a| (a * 1000.0).round() / 1000.0),
                        d.choice.gap,
                        t0.elapsed()
                    );
                }
                Err(e) => println!("r={r:.3} phi={phi_deg:>5}: PIPELINE ERR {e}"),
            }
        }
    }
}
