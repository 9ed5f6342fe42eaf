//! Benchmark CLI for near-field scatterer estimation in the wavenumber
//! domain: scene synthesis, spectrum dumps, single-scene estimation with
//! diagnostics, parameter sweeps and baseline calibration.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wdef_core::{
    gmm_baseline_estimate, nmse_metrics, read_response_text, resolve_gamma, rows_to_csv,
    run_sweep_with, spatial_to_wavenumber, wdef_estimate, write_response_text,
    write_spectrum_text, ArrayGeometry, EstimateOutcome, EstimationResult, FallbackEstimate,
    Method, Preset, Scene, SweepAxis, SweepConfig, SweepOptions,
};

#[derive(Parser)]
#[command(
    name = "wdef",
    about = "Wavenumber-domain ellipse fitting benchmark for reactive near-field scatterer estimation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a scene's array response and write the response dump.
    Synth {
        #[command(flatten)]
        source: ConfigSource,
        /// Output path for the response dump.
        #[arg(long)]
        out: PathBuf,
    },
    /// Transform a response dump (or a freshly synthesized scene) into the
    /// wavenumber-domain power grid file.
    SpectrumDump {
        #[command(flatten)]
        source: ConfigSource,
        /// Response dump to transform; synthesized from the config when
        /// omitted.
        #[arg(long)]
        response: Option<PathBuf>,
        /// Output path for the grid file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate scatterers for a single scene and print per-scatterer
    /// results with diagnostics.
    Estimate {
        #[command(flatten)]
        source: ConfigSource,
        /// Method to run: wdef, gmm, pw-gmm or all.
        #[arg(long, default_value = "all")]
        method: String,
    },
    /// Run the configured sweep and write the CSV.
    Sweep {
        #[command(flatten)]
        source: ConfigSource,
        /// CSV output path; defaults to the config's `output` field.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for scene evaluation (default: one per core).
        #[arg(long)]
        threads: Option<usize>,
        /// Record wall-clock runtimes per row (breaks byte-identical CSV
        /// reruns).
        #[arg(long)]
        timing: bool,
    },
    /// Calibrate the baseline distance scale and print gamma.
    CalibrateGamma {
        #[command(flatten)]
        source: ConfigSource,
    },
}

#[derive(Args)]
struct ConfigSource {
    /// JSON sweep config path.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in profile: `paper` (512x512 at 7 GHz) or `desk` (128x128 at
    /// 28 GHz).
    #[arg(long)]
    preset: Option<String>,
    /// Sweep axis for presets: distance or elevation.
    #[arg(long, default_value = "distance")]
    axis: String,
    /// Override the config's scene seed.
    #[arg(long)]
    seed: Option<u64>,
}

enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => m,
        }
    }
}

fn config_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

impl ConfigSource {
    fn load(&self) -> Result<SweepConfig, CliError> {
        let mut config = match (&self.config, &self.preset) {
            (Some(path), None) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| config_err(format!("{}: {e}", path.display())))?
            }
            (None, Some(name)) => {
                let preset: Preset = name.parse().map_err(config_err)?;
                let axis = match self.axis.as_str() {
                    "distance" => SweepAxis::Distance,
                    "elevation" => SweepAxis::Elevation,
                    other => {
                        return Err(CliError::Config(format!(
                            "unknown axis '{other}' (expected distance or elevation)"
                        )))
                    }
                };
                wdef_core::preset_config(preset, axis)
            }
            (Some(_), Some(_)) => {
                return Err(CliError::Config("--config and --preset are mutually exclusive".into()))
            }
            (None, None) => {
                return Err(CliError::Config("one of --config or --preset is required".into()))
            }
        };
        if let Some(seed) = self.seed {
            config.scene.seed = seed;
        }
        Ok(config)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth { source, out } => {
            let config = source.load()?;
            let scene = scene_for(&config)?;
            let response = scene.observed_response().map_err(runtime_err)?;
            let file = fs::File::create(&out).map_err(runtime_err)?;
            write_response_text(&response, BufWriter::new(file)).map_err(runtime_err)?;
            println!(
                "wrote {}x{} response to {}",
                config.geometry.nx,
                config.geometry.ny,
                out.display()
            );
            Ok(())
        }
        Command::SpectrumDump { source, response, out } => {
            let config = source.load()?;
            let geometry = geometry_for(&config)?;
            let resp = match response {
                Some(path) => {
                    let file = fs::File::open(&path)
                        .map_err(|e| runtime_err(format!("cannot open {}: {e}", path.display())))?;
                    read_response_text(BufReader::new(file), &geometry).map_err(runtime_err)?
                }
                None => {
                    let scene = scene_for(&config)?;
                    scene.observed_response().map_err(runtime_err)?
                }
            };
            let spectrum = spatial_to_wavenumber(&resp, config.estimator.q).map_err(runtime_err)?;
            let file = fs::File::create(&out).map_err(runtime_err)?;
            write_spectrum_text(&spectrum, BufWriter::new(file)).map_err(runtime_err)?;
            println!(
                "wrote {}x{} spectrum (q={}) to {}",
                spectrum.grid.n_kx,
                spectrum.grid.n_ky,
                spectrum.grid.q,
                out.display()
            );
            Ok(())
        }
        Command::Estimate { source, method } => {
            let config = source.load()?;
            estimate_command(&config, &method)
        }
        Command::Sweep { source, out, threads, timing } => {
            let config = source.load()?;
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| config_err(format!("thread pool: {e}")))?;
            }
            let rows = run_sweep_with(&config, SweepOptions { timing }).map_err(map_core)?;
            let csv = rows_to_csv(&rows);
            let path = out
                .or_else(|| config.output.as_ref().map(PathBuf::from))
                .ok_or_else(|| CliError::Config("no output path (--out or config.output)".into()))?;
            let mut file = fs::File::create(&path).map_err(runtime_err)?;
            file.write_all(csv.as_bytes()).map_err(runtime_err)?;
            println!("wrote {} rows to {}", rows.len(), path.display());
            Ok(())
        }
        Command::CalibrateGamma { source } => {
            let config = source.load()?;
            let gamma = resolve_gamma(&config).map_err(map_core)?;
            println!("{gamma}");
            Ok(())
        }
    }
}

/// Configuration errors keep exit code 2; everything downstream is a
/// runtime estimation failure (exit code 3).
fn map_core(e: wdef_core::Error) -> CliError {
    match e {
        wdef_core::Error::Config(_) | wdef_core::Error::InvalidInput(_) => config_err(e),
        other => runtime_err(other),
    }
}

fn geometry_for(config: &SweepConfig) -> Result<ArrayGeometry<f64>, CliError> {
    let g = &config.geometry;
    match g.spacing_mode {
        wdef_core::SpacingMode::HalfWavelength => {
            ArrayGeometry::half_wavelength(g.nx, g.ny, g.carrier_freq_hz).map_err(config_err)
        }
        wdef_core::SpacingMode::Explicit => {
            let d = g
                .spacing_m
                .ok_or_else(|| CliError::Config("explicit spacing_mode needs spacing_m".into()))?;
            ArrayGeometry::new(g.nx, g.ny, d, g.carrier_freq_hz).map_err(config_err)
        }
    }
}

/// Single scene from a config; presets carry sweep grids, so collapse them
/// to their first value for the single-scene commands.
fn scene_for(config: &SweepConfig) -> Result<Scene<f64>, CliError> {
    let mut cfg = config.clone();
    if cfg.scene.distance_m.is_none() {
        if let Some(grid) = cfg.scene.distances_m.take() {
            cfg.scene.distance_m = grid.first().copied();
        }
    }
    if cfg.scene.elevation_deg.is_none() {
        if let Some(grid) = cfg.scene.elevations_deg.take() {
            cfg.scene.elevation_deg = grid.first().copied();
        }
    }
    wdef_core::single_scene(&cfg).map_err(map_core)
}

fn estimate_command(config: &SweepConfig, method: &str) -> Result<(), CliError> {
    let methods: Vec<Method> = match method {
        "all" => Method::ALL.to_vec(),
        name => vec![name.parse().map_err(map_core)?],
    };
    let geometry = geometry_for(config)?;
    let scene = scene_for(config)?;
    let response = scene.observed_response().map_err(runtime_err)?;
    let spectrum = spatial_to_wavenumber(&response, config.estimator.q).map_err(runtime_err)?;
    let params = wdef_core::estimator_params(config).map_err(map_core)?;

    let needs_gamma = methods
        .iter()
        .any(|m| matches!(m, Method::Gmm | Method::PowerWeightedGmm));
    let gamma = if needs_gamma {
        Some(resolve_gamma(config).map_err(map_core)?)
    } else {
        None
    };

    println!(
        "scene: {} scatterer(s), seed {}; fresnel distance {:.3} m",
        scene.scatterers.len(),
        config.scene.seed,
        geometry.fresnel_distance_x()
    );
    for (i, s) in scene.scatterers.iter().enumerate() {
        let sph = s.position.to_spherical().map_err(runtime_err)?;
        println!(
            "  truth {i}: r={:.4} m theta={:.2} deg phi={:.2} deg (x={:.4} y={:.4} z={:.4})",
            sph.r,
            sph.theta.to_degrees(),
            sph.phi.to_degrees(),
            s.position.x,
            s.position.y,
            s.position.z
        );
    }

    let mean_distance = scene
        .scatterers
        .iter()
        .map(|s| s.position.norm())
        .sum::<f64>()
        / scene.scatterers.len() as f64;
    let fallback = FallbackEstimate { distance: mean_distance };

    let mut any_estimates = false;
    for m in methods {
        let mut rng = ChaCha8Rng::seed_from_u64(config.scene.seed);
        rng.set_stream(match m {
            Method::Wdef => 1,
            Method::Gmm => 2,
            Method::PowerWeightedGmm => 3,
        });
        let outcome: EstimateOutcome<f64> = match m {
            Method::Wdef => wdef_estimate(&spectrum, &geometry, &params, &mut rng),
            Method::Gmm => {
                gmm_baseline_estimate(&spectrum, &geometry, gamma.unwrap(), false, &params, &mut rng)
            }
            Method::PowerWeightedGmm => {
                gmm_baseline_estimate(&spectrum, &geometry, gamma.unwrap(), true, &params, &mut rng)
            }
        }
        .map_err(runtime_err)?;

        println!("method {m}: {} found, {} failed", outcome.n_found(), outcome.n_failed());
        for (i, est) in outcome.estimates.iter().enumerate() {
            print_estimate(i, est);
        }
        for f in &outcome.failures {
            println!("  cluster {}: failed ({})", f.cluster, f.error);
        }
        let metrics =
            nmse_metrics(&outcome.estimates, &scene.scatterers, &fallback).map_err(runtime_err)?;
        println!(
            "  nmse_distance={:.6} nmse_aoa={:.6} (fallback-scored: {})",
            metrics.nmse_distance, metrics.nmse_aoa, metrics.n_fallback
        );
        any_estimates |= outcome.n_found() > 0;
    }
    if !any_estimates {
        return Err(CliError::Runtime("no method produced any estimate".into()));
    }
    Ok(())
}

fn print_estimate(i: usize, est: &EstimationResult<f64>) {
    println!(
        "  est {i}: r={:.4} m theta={:.2} deg phi={:.2} deg (x={:.4} y={:.4} z={:.4})",
        est.spherical.r,
        est.spherical.theta.to_degrees(),
        est.spherical.phi.to_degrees(),
        est.cartesian.x,
        est.cartesian.y,
        est.cartesian.z
    );
    if let Some(d) = &est.diagnostics {
        println!(
            "         boundary a = [{:.4}, {:.4}, {:.4}, {:.4}]",
            d.boundary_a[0], d.boundary_a[1], d.boundary_a[2], d.boundary_a[3]
        );
        let fmt_roots = |roots: &[wdef_core::RootCandidate<f64>]| -> String {
            roots
                .iter()
                .map(|c| format!("(r={:.4}, rz={:.4})", c.r, c.r_z))
                .collect::<Vec<_>>()
                .join(" ")
        };
        println!("         roots x: {}", fmt_roots(&d.roots_x));
        println!("         roots y: {}", fmt_roots(&d.roots_y));
        println!(
            "         chosen ({}, {}), height gap {:.3e}, runner-up {}",
            d.choice.ix,
            d.choice.iy,
            d.choice.gap,
            d.choice
                .runner_up_gap
                .map(|g| format!("{g:.3e}"))
                .unwrap_or_else(|| "-".into())
        );
    }
}
