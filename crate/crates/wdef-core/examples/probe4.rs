//! Scratch probe: desk-scale distance and elevation sweeps (trend checks).

use wdef_core::*;

fn main() {
    let t0 = std::time::Instant::now();

    // Distance sweep, below-Fresnel subset.
    let mut cfg = preset_config(Preset::Desk, SweepAxis::Distance);
    cfg.scene.trials = 2;
    println!("distances: {:?}", cfg.scene.distances_m);
    println!("calibration_r: {:?}", cfg.estimator.calibration_r_m);
    let gamma = resolve_gamma(&cfg).unwrap();
    println!("gamma = {gamma:.6} ({:?})", t0.elapsed());

    let rows = run_sweep(&cfg).unwrap();
    summarize(&rows);
    println!("distance sweep took {:?}", t0.elapsed());

    let t1 = std::time::Instant::now();
    let mut cfg = preset_config(Preset::Desk, SweepAxis::Elevation);
    cfg.scene.trials = 2;
    println!("\nelevations: {:?}, r = {:?}", cfg.scene.elevations_deg, cfg.scene.distance_m);
    let rows = run_sweep(&cfg).unwrap();
    summarize(&rows);
    println!("elevation sweep took {:?}", t1.elapsed());
}

fn summarize(rows: &[SweepRow]) {
    use std::collections::BTreeMap;
    let mut agg: BTreeMap<(String, &str), (f64, f64, usize, usize, usize)> = BTreeMap::new();
    for r in rows {
        let e = agg
            .entry((format!("{:8.3}", r.sweep_value), r.method.as_str()))
            .or_insert((0.0, 0.0, 0, 0, 0));
        e.0 += r.nmse_distance;
        e.1 += r.nmse_aoa;
        e.2 += 1;
        e.3 += r.n_found;
        e.4 += r.n_failed;
    }
    println!("{:>8} {:>7} {:>12} {:>12} {:>6} {:>6}", "value", "method", "nmse_dist", "nmse_aoa", "found", "fail");
    for ((v, m), (d, a, n, nf, nfail)) in agg {
        println!(
            "{:>8} {:>7} {:>12.5} {:>12.5} {:>6} {:>6}",
            v,
            m,
            d / n as f64,
            a / n as f64,
            nf,
            nfail
        );
    }
}
