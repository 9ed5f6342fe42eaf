//! Scratch probe: inspect per-arc point sets and raw conic fits.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wdef_core::*;

fn main() {
    let geo = ArrayGeometry::<f64>::half_wavelength(128, 128, 28e9).unwrap();
    let fresnel = geo.fresnel_distance_x();

    for (frac, phi_deg) in [(0.1f64, 0.0f64), (0.3, 0.0), (0.3, 120.0)] {
        let r = frac * fresnel;
        let s = SphericalCoord::new(r, 45f64.to_radians(), phi_deg.to_radians()).unwrap();
        let pos = s.to_cartesian();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let scatterers = scatterers_with_random_phases(&[pos], &mut rng).unwrap();
        let scene = Scene::noiseless(geo, scatterers, 0).unwrap();
        let resp = synthesize_response(&scene).unwrap();
        let spec = spatial_to_wavenumber(&resp, 2).unwrap();
        let mask = threshold_support(&spec, 15.0).unwrap();
        let pts = mask.points();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let model = gmm_cluster(&pts, None, 1..=1, &GmmParams::default(), &mut rng).unwrap();
        let edge = extract_boundary_points(&mask, 0, &model.labels).unwrap();
        println!(
            "== r={r:.3} phi={phi_deg}: mask={} edge={} mean=({:.3},{:.3})",
            mask.len(),
            edge.len(),
            model.means[0][0],
            model.means[0][1]
        );
        // True coefficients for reference.
        let truth = boundary_coefficients(&pos, &geo).unwrap();
        for c in &truth {
            println!(
                "  true a{} = {:.4} (sign {})",
                c.boundary.index(),
                c.a,
                c.sign
            );
        }
        match partition_boundaries(&edge, model.means[0]) {
            Ok(sets) => {
                for j in 1..=4 {
                    let set = sets.set(j);
                    let fit = fit_ellipse_direct(set);
                    match fit {
                        Ok(conic) => {
                            let axis = if j == 1 || j == 3 { Axis::X } else { Axis::Y };
                            let xi = conic.xi.map(|v| (v * 1e4).round() / 1e4);
                            println!(
                                "  arc {j}: n={:<4} xi={xi:?} ratio={:?}",
                                set.len(),
                                canonical_axis_ratio(&conic, axis).map(|v| (v * 1e4).round() / 1e4)
                            );
                        }
                        Err(e) => println!("  arc {j}: n={} FIT ERR {e}", set.len()),
                    }
                }
            }
            Err(e) => println!("  partition err: {e}"),
        }
    }
}
