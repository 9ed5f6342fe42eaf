//! Scratch probe: GMM baselines at the elevation boundary region (25/75 deg).

use wdef_core::*;

fn main() {
    let mut cfg = preset_config(Preset::Desk, SweepAxis::Elevation);
    cfg.scene.trials = 3;
    cfg.scene.elevations_deg = Some(vec![25.0, 28.0, 30.0, 70.0, 72.0, 75.0]);
    cfg.estimator.methods = vec!["gmm".into(), "pw-gmm".into()];
    let rows = run_sweep(&cfg).unwrap();
    for r in &rows {
        println!(
            "theta={:>5} trial={} {:>7}: nmse_dist={:.4} nmse_aoa={:.4} found={} failed={}",
            r.sweep_value, r.trial, r.method.as_str(), r.nmse_distance, r.nmse_aoa, r.n_found, r.n_failed
        );
    }
}
