//! Scratch probe: inspect mask structure and cluster selection.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wdef_core::*;

fn main() {
    let geo = ArrayGeometry::<f64>::half_wavelength(128, 128, 28e9).unwrap();
    let fresnel = geo.fresnel_distance_x();

    let r = 0.1 * fresnel;
    let s = SphericalCoord::new(r, 45f64.to_radians(), 0.0).unwrap();
    let pos = s.to_cartesian();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let scatterers = scatterers_with_random_phases(&[pos], &mut rng).unwrap();
    let scene = Scene::noiseless(geo, scatterers, 0).unwrap();
    let resp = synthesize_response(&scene).unwrap();
    let spec = spatial_to_wavenumber(&resp, 2).unwrap();

    let mask = threshold_support(&spec, 15.0).unwrap();
    println!("masked bins: {}", mask.len());

    // Compare to the oracle support bin count.
    let mut oracle = 0;
    let mut in_mask_in_oracle = 0;
    for (i, j) in mask.indices() {
        let kx = mask.grid.kx_of(i);
        let ky = mask.grid.ky_of(j);
        if kx * kx + ky * ky < 1.0 && support_membership(&pos, &geo, kx, ky).unwrap() {
            in_mask_in_oracle += 1;
        }
    }
    let g = &spec.grid;
    for i in 0..g.n_kx {
        for j in 0..g.n_ky {
            let kx = g.kx_of(i);
            let ky = g.ky_of(j);
            if kx * kx + ky * ky < 1.0 && support_membership(&pos, &geo, kx, ky).unwrap() {
                oracle += 1;
            }
        }
    }
    println!(
        "oracle bins: {oracle}, mask&oracle: {in_mask_in_oracle}, mask-only: {}",
        mask.len() - in_mask_in_oracle
    );

    // Coarse ASCII map (64x64 downsample): # mask in oracle, o mask outside.
    let step = g.n_kx / 64;
    for bi in 0..64 {
        let mut line = String::new();
        for bj in 0..64 {
            let mut m = false;
            let mut o = false;
            for i in bi * step..(bi + 1) * step {
                for j in bj * step..(bj + 1) * step {
                    if mask.mask[(i, j)] {
                        m = true;
                        let kx = g.kx_of(i);
                        let ky = g.ky_of(j);
                        if kx * kx + ky * ky < 1.0
                            && support_membership(&pos, &geo, kx, ky).unwrap()
                        {
                            o = true;
                        }
                    }
                }
            }
            line.push(if m && o {
                '#'
            } else if m {
                'o'
            } else {
                '.'
            });
        }
        println!("{line}");
    }

    // Silhouette per candidate count.
    let pts = mask.points();
    for s_cand in 1..=4usize {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let model = gmm_cluster(&pts, None, s_cand..=s_cand, &GmmParams::default(), &mut rng).unwrap();
        let sil = if s_cand == 1 {
            f64::NAN
        } else {
            let sub: Vec<usize> = (0..pts.len()).step_by((pts.len() / 2000).max(1)).collect();
            let sp: Vec<[f64; 2]> = sub.iter().map(|&i| pts[i]).collect();
            let sl: Vec<usize> = sub.iter().map(|&i| model.labels[i]).collect();
            silhouette_score(&sp, &sl, None).unwrap_or(f64::NAN)
        };
        println!("S={s_cand}: silhouette={sil:.4} ll={:.1}", model.log_likelihood);
    }
}
