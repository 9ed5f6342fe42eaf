//! Scratch probe: component-count selection on the large-array 3-scatterer
//! scene, single trial timing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wdef_core::*;

fn main() {
    let geo = ArrayGeometry::<f64>::half_wavelength(512, 512, 7e9).unwrap();
    println!("fresnel = {:.2} m", geo.fresnel_distance_x());
    let t0 = std::time::Instant::now();

    let positions: Vec<_> = [0.0f64, 120.0, 240.0]
        .iter()
        .map(|phi| {
            SphericalCoord::new(15.0, 45f64.to_radians(), phi.to_radians())
                .unwrap()
                .to_cartesian()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let scatterers = scatterers_with_random_phases(&positions, &mut rng).unwrap();
    let scene = Scene::noiseless(geo, scatterers, 0).unwrap();
    let resp = synthesize_response(&scene).unwrap();
    println!("synth: {:?}", t0.elapsed());

    let t1 = std::time::Instant::now();
    let spec = spatial_to_wavenumber(&resp, 2).unwrap();
    println!("fft: {:?}", t1.elapsed());

    let t2 = std::time::Instant::now();
    let mask = threshold_support(&spec, 15.0).unwrap();
    let pts = mask.points();
    println!("mask: {} bins ({:?})", pts.len(), t2.elapsed());

    let t3 = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let model = gmm_cluster(&pts, None, 1..=4, &GmmParams::default(), &mut rng).unwrap();
    println!(
        "cluster: S={} silhouette={:.4} ({:?})",
        model.s_count,
        model.silhouette,
        t3.elapsed()
    );

    // Full estimate too, for end-to-end sanity at paper scale.
    let t4 = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let out = wdef_estimate(&spec, &geo, &EstimatorParams::default(), &mut rng).unwrap();
    for e in &out.estimates {
        println!(
            "  est r={:.3} theta={:.2} phi={:.2}",
            e.spherical.r,
            e.spherical.theta.to_degrees(),
            e.spherical.phi.to_degrees()
        );
    }
    for f in &out.failures {
        println!("  cluster {} failed: {}", f.cluster, f.error);
    }
    println!("wdef: {:?} (total {:?})", t4.elapsed(), t0.elapsed());
}
