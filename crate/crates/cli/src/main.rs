//! Command-line front end: binds TOML configs and figure presets to the
//! simulation harness and emits CSV results with replayable manifests.

mod config;
mod presets;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use config::{parse_snr_grid, FileConfig, RunSection};
use vlc_ofdm::channel::build_channel;
use vlc_ofdm::sim::{run_sweep_with, sweep_dtx, SimError, CSV_HEADER};

#[derive(Parser)]
#[command(
    name = "vlc-ofdm",
    version,
    about = "Link-level BER simulator for multiple-LED optical OFDM"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a BER sweep from a config file or a preset
    Simulate(SimulateArgs),
    /// Print the geometry and channel matrix of a config
    ChannelDump {
        /// TOML config; omitted sections fall back to the reference setup
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run a complete figure preset
    Figures {
        /// One of: fig4, fig5, fig6, fig8, fig9
        preset: String,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML config file (see README for the schema)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run a named preset bundle instead of a single config
    #[arg(long)]
    preset: Option<String>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Clone)]
struct Overrides {
    /// SNR grid in dB: start:step:stop, or a single value
    #[arg(long)]
    snr: Option<String>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Stop each point after this many bit errors ...
    #[arg(long)]
    min_errors: Option<u64>,
    /// ... or after this many channel uses
    #[arg(long)]
    max_uses: Option<u64>,
    /// Hand the receiver the transmitted index bits (error-free index
    /// decisions)
    #[arg(long)]
    genie_index: bool,
    /// Worker threads (default: one per core; never changes results)
    #[arg(long)]
    workers: Option<usize>,
    /// Output CSV path for a single run, or directory for presets
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit code 2: the input was wrong. Exit code 3: the run itself failed.
enum CliError {
    Config(String),
    Runtime(String),
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Simulate(args) => cmd_simulate(args),
        Cmd::ChannelDump { config } => cmd_channel_dump(config.as_deref()),
        Cmd::Figures { preset, overrides } => run_bundle(&preset, &overrides),
    }
}

fn sim_err(e: SimError) -> CliError {
    CliError::Config(e.to_string())
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn load_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    FileConfig::parse(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn apply_overrides(cfg: &mut FileConfig, o: &Overrides) -> Result<(), CliError> {
    if let Some(snr) = &o.snr {
        cfg.sim.snr_db = parse_snr_grid(snr).map_err(CliError::Config)?;
    }
    if let Some(seed) = o.seed {
        cfg.sim.seed = seed;
    }
    if let Some(min_errors) = o.min_errors {
        cfg.sim.min_errors = min_errors;
    }
    if let Some(max_uses) = o.max_uses {
        cfg.sim.max_uses = max_uses;
    }
    if o.genie_index {
        cfg.sim.genie_index = true;
    }
    if let Some(workers) = o.workers {
        cfg.sim.workers = workers;
    }
    Ok(())
}

/// Applies the worker-count request. First caller wins; the count only
/// affects wall-clock time, never results.
fn install_workers(cfg: &FileConfig) {
    if cfg.sim.workers > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.sim.workers).build_global();
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    match (&args.config, &args.preset) {
        (Some(_), Some(_)) => {
            Err(CliError::Config("--config and --preset are mutually exclusive".into()))
        }
        (None, Some(preset)) => run_bundle(preset, &args.overrides),
        (config, None) => {
            let mut cfg = match config {
                Some(path) => load_config(path)?,
                None => FileConfig::default(),
            };
            apply_overrides(&mut cfg, &args.overrides)?;
            let csv_path = single_out_path(&cfg, args.overrides.out.as_deref())?;
            run_one(&cfg, &csv_path)
        }
    }
}

/// `--out file.csv` names the file; `--out dir` (or no `--out`) places
/// `<scheme>.csv` there.
fn single_out_path(cfg: &FileConfig, out: Option<&Path>) -> Result<PathBuf, CliError> {
    let default_name = format!("{}.csv", cfg.scheme.kind);
    match out {
        None => Ok(PathBuf::from(default_name)),
        Some(p) if p.extension().is_some_and(|e| e == "csv") => Ok(p.to_path_buf()),
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            Ok(dir.join(default_name))
        }
    }
}

fn run_bundle(preset: &str, overrides: &Overrides) -> Result<(), CliError> {
    let runs = presets::bundle(preset).ok_or_else(|| {
        CliError::Config(format!(
            "unknown preset '{preset}'; available: {}",
            presets::PRESET_NAMES.join(", ")
        ))
    })?;
    let dir = overrides.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    for mut named in runs {
        apply_overrides(&mut named.config, overrides)?;
        run_one(&named.config, &dir.join(format!("{}.csv", named.name)))?;
    }
    Ok(())
}

fn run_one(cfg: &FileConfig, csv_path: &Path) -> Result<(), CliError> {
    install_workers(cfg);
    let sim = cfg.to_sim().map_err(CliError::Config)?;
    if sim.snr_db.is_empty() {
        return Err(CliError::Config(
            "no SNR points; set [sim] snr_db in the config or pass --snr".into(),
        ));
    }
    let started = Instant::now();
    let mut file = fs::File::create(csv_path).map_err(|e| io_err(csv_path, e))?;
    let mut points = 0usize;
    if let Some(d_tx) = &cfg.sim.d_tx {
        // Spacing sweep: same columns, prefixed by the spacing.
        writeln!(file, "d_tx,{CSV_HEADER}").map_err(|e| io_err(csv_path, e))?;
        let pairs = sweep_dtx(&sim, d_tx).map_err(sim_err)?;
        for (d, p) in &pairs {
            writeln!(file, "{d},{}", p.csv_row()).map_err(|e| io_err(csv_path, e))?;
        }
        points = pairs.len();
    } else {
        writeln!(file, "{CSV_HEADER}").map_err(|e| io_err(csv_path, e))?;
        // Write and flush per point so an interrupted run keeps what it
        // finished.
        let mut write_err: Option<std::io::Error> = None;
        run_sweep_with(&sim, |p| {
            if write_err.is_none() {
                match writeln!(file, "{}", p.csv_row()).and_then(|_| file.flush()) {
                    Ok(()) => points += 1,
                    Err(e) => write_err = Some(e),
                }
            }
        })
        .map_err(sim_err)?;
        if let Some(e) = write_err {
            return Err(io_err(csv_path, e));
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    write_manifest(cfg, csv_path, elapsed)?;
    println!("wrote {} ({points} points, {elapsed:.1} s)", csv_path.display());
    Ok(())
}

fn write_manifest(cfg: &FileConfig, csv_path: &Path, elapsed_s: f64) -> Result<(), CliError> {
    let mut manifest = cfg.clone();
    manifest.run = Some(RunSection {
        tool: "vlc-ofdm".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        output: csv_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        elapsed_s,
    });
    let mut path = csv_path.to_path_buf();
    path.set_extension("manifest.toml");
    fs::write(&path, manifest.to_toml()).map_err(|e| io_err(&path, e))
}

fn cmd_channel_dump(config: Option<&Path>) -> Result<(), CliError> {
    let cfg = match config {
        Some(path) => load_config(path)?,
        None => FileConfig::default(),
    };
    let params = cfg.geometry();
    let geom = params.build().map_err(|e| CliError::Config(e.to_string()))?;
    let h = build_channel(&geom);
    println!("room: {} x {} x {} m", params.room.x, params.room.y, params.room.z);
    println!(
        "LEDs: {} at height {} m, spacing {} m, half-power {} deg",
        params.n_leds, params.tx_height, params.d_tx, params.phi_half_deg
    );
    for (i, led) in geom.leds.iter().enumerate() {
        let p = led.position;
        println!("  led {}: ({:.3}, {:.3}, {:.3})", i + 1, p.x, p.y, p.z);
    }
    println!(
        "detectors: {} at height {} m, spacing {} m, FOV {} deg, area {} m^2, responsivity {} A/W",
        params.n_pds, params.rx_height, params.d_rx, params.fov_deg, params.area_m2,
        params.responsivity
    );
    for (i, pd) in geom.pds.iter().enumerate() {
        let p = pd.position;
        println!("  pd {}: ({:.3}, {:.3}, {:.3})", i + 1, p.x, p.y, p.z);
    }
    println!("channel gains (rows = detectors, columns = LEDs):");
    print!("{}", h.format_table());
    Ok(())
}
