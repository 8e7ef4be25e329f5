//! Batch front end: `trap`, `wings`, `evolve` and `vtab` driven by one TOML
//! file. Every command that writes files also writes `manifest.txt`.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 no trap,
//! 3 numerical-domain error, 4 trajectory collapse.

pub mod config;
pub mod manifest;
pub mod svg;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use clap::{Args, Parser, Subcommand};

use crate::evap::{
    default_initial_state, evolve, summarize, trajectory_csv, EvapError, PowerSchedule, TrajectoryPoint,
};
use crate::par::{with_threads, Execution};
use crate::thermo::{
    analytic_populations, exact_populations_with_tolerance, volume_table, BeamLandscape, HarmonicLandscape,
    ThermoError, TruncatedThermalState, VolumeTable,
};
use crate::trapcore::constants::BOLTZMANN;
use crate::trapcore::{characterize, TrapError};
use config::RunConfig;
use manifest::{sha256_hex, RunManifest};
use svg::{LinePlot, Series};

#[derive(Debug, Parser)]
#[command(name = "odtsim", version, about = "Crossed-beam dipole trap thermodynamics and evaporation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trap depth, frequencies, β and Rayleigh ranges at the configured powers.
    Trap(CommonArgs),
    /// Wing fraction and peak density versus η, one CSV per wavelength.
    Wings {
        #[command(flatten)]
        common: CommonArgs,
        /// Skip the Monte Carlo volume table; exact columns are left empty.
        #[arg(long)]
        analytic_only: bool,
    },
    /// Integrate the evaporation trajectory under the configured schedule.
    Evolve(CommonArgs),
    /// Write the Monte Carlo volume-of-states table.
    Vtab(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `thermo.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `thermo.samples`.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Overrides `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 picks the machine default. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Also write SVG plots.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("no trap: {0}")]
    NoTrap(String),
    #[error("numerical domain error: {0}")]
    Domain(String),
    #[error("trajectory collapse: {0}")]
    Collapse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::NoTrap(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Collapse(_) => 4,
        }
    }
}

impl From<TrapError> for CliError {
    fn from(e: TrapError) -> Self {
        match e {
            TrapError::NoMinimum(_) | TrapError::DegenerateHessian { .. } => CliError::NoTrap(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<ThermoError> for CliError {
    fn from(e: ThermoError) -> Self {
        match e {
            ThermoError::Trap(t) => t.into(),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<EvapError> for CliError {
    fn from(e: EvapError) -> Self {
        match e {
            EvapError::Trap(t) => t.into(),
            EvapError::Thermo(t) => t.into(),
            EvapError::Schedule(_) | EvapError::InvalidInput(_) => CliError::Config(e.to_string()),
            EvapError::StiffnessFailure(_) => CliError::Domain(e.to_string()),
            EvapError::StateCollapse { .. } => CliError::Collapse(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Text for stdout plus the files written, relative to the output directory.
#[derive(Debug, Default)]
pub struct Report {
    pub text: String,
    pub outputs: Vec<String>,
}

struct Context {
    config: RunConfig,
    config_bytes: Vec<u8>,
    args: CommonArgs,
    out: PathBuf,
    svg: bool,
}

impl Context {
    fn load(args: &CommonArgs) -> Result<Self, CliError> {
        let (mut config, config_bytes) = RunConfig::load(&args.config)?;
        if let Some(seed) = args.seed {
            config.thermo.seed = seed;
        }
        if let Some(samples) = args.samples {
            config.thermo.samples = samples;
        }
        let out = args.out.clone().unwrap_or_else(|| PathBuf::from(&config.output.dir));
        let svg = args.svg || config.output.svg;
        Ok(Self { config, config_bytes, args: args.clone(), out, svg })
    }

    fn write(&self, report: &mut Report, name: &str, contents: &str) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.out)?;
        std::fs::write(self.out.join(name), contents)?;
        report.outputs.push(name.to_string());
        Ok(())
    }

    fn finish(&self, command: &str, report: &Report, started: SystemTime) -> Result<(), CliError> {
        let manifest = RunManifest {
            command: command.into(),
            config_path: self.args.config.display().to_string(),
            config_sha256: sha256_hex(&self.config_bytes),
            seed: self.config.thermo.seed,
            samples: self.config.thermo.samples,
            threads: self.args.threads,
            version: env!("CARGO_PKG_VERSION").into(),
            started,
            finished: SystemTime::now(),
            outputs: report.outputs.clone(),
        };
        std::fs::create_dir_all(&self.out)?;
        manifest.write(&self.out)?;
        Ok(())
    }
}

/// Run one parsed command.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let (name, args) = match &cli.command {
        Command::Trap(a) => ("trap", a),
        Command::Wings { common, .. } => ("wings", common),
        Command::Evolve(a) => ("evolve", a),
        Command::Vtab(a) => ("vtab", a),
    };
    let ctx = Context::load(args)?;
    let started = SystemTime::now();
    let report = with_threads(args.threads, || match &cli.command {
        Command::Trap(_) => cmd_trap(&ctx),
        Command::Wings { analytic_only, .. } => cmd_wings(&ctx, *analytic_only),
        Command::Evolve(_) => cmd_evolve(&ctx),
        Command::Vtab(_) => cmd_vtab(&ctx),
    })?;
    if !report.outputs.is_empty() {
        ctx.finish(name, &report, started)?;
    }
    Ok(report)
}

/// Parse `argv`, run, print, and return the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(report) => {
            print!("{}", report.text);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn cmd_trap(ctx: &Context) -> Result<Report, CliError> {
    let config = ctx.config.trap_config()?;
    let trap = characterize(&config)?;
    let hz = |w: f64| w / (2.0 * std::f64::consts::PI);
    let uk = |e: f64| e / BOLTZMANN * 1e6;
    let mut text = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(text, "{k}={v}");
    };
    kv("depth_J", format!("{:.9e}", trap.depth));
    kv("depth_uK", format!("{:.3}", uk(trap.depth)));
    kv("depth_mK", format!("{:.6}", uk(trap.depth) * 1e-3));
    for (axis, w) in ["x", "y", "z"].iter().zip(trap.frequencies) {
        kv(&format!("frequency_{axis}_hz"), format!("{:.3}", hz(w)));
    }
    kv("mean_frequency_hz", format!("{:.3}", hz(trap.mean_frequency)));
    kv("mean_frequency_rad_s", format!("{:.6e}", trap.mean_frequency));
    kv("beta", format!("{:.6}", trap.beta));
    let p = trap.minimum_position * 1e6;
    kv("minimum_position_um", format!("{:.4},{:.4},{:.4}", p.x, p.y, p.z));
    for (i, (beam, depth)) in config.beams.iter().zip(config.beam_depths()?).enumerate() {
        kv(&format!("beam{i}_depth_uK"), format!("{:.3}", uk(depth)));
        kv(
            &format!("beam{i}_rayleigh_range_um"),
            format!("{:.3},{:.3}", beam.rayleigh_range_x() * 1e6, beam.rayleigh_range_y() * 1e6),
        );
    }
    Ok(Report { text, outputs: Vec::new() })
}

pub const WINGS_HEADER: &str =
    "eta,wing_frac_analytic,wing_frac_exact,wing_frac_exact_err,n0_analytic_cm3,n0_exact_cm3,n0_exact_err";

fn cmd_wings(ctx: &Context, analytic_only: bool) -> Result<Report, CliError> {
    let thermo = &ctx.config.thermo;
    let etas = thermo.etas()?;
    let base = ctx.config.trap_config()?;
    let wavelengths = thermo.wavelengths_nm.clone().unwrap_or_else(|| vec![base.beams[0].wavelength * 1e9]);
    let mut report = Report::default();
    let mut fraction_plot = Vec::new();
    let mut density_plot = Vec::new();
    for &nm in &wavelengths {
        let mut config = base.clone();
        for beam in &mut config.beams {
            beam.wavelength = nm * 1e-9;
        }
        config.validate()?;
        let w0 = config.beams[0].waist_x;
        let exact = if analytic_only {
            None
        } else {
            let landscape = BeamLandscape::new(&config)?;
            let table = VolumeTable::build(&landscape, thermo.beta, thermo.samples, thermo.seed, Execution::Parallel)?;
            let rows = etas
                .iter()
                .map(|&eta| {
                    let state = TruncatedThermalState::from_eta(
                        thermo.atom_number,
                        eta,
                        thermo.beta,
                        landscape.characterization().clone(),
                    )?;
                    exact_populations_with_tolerance(&state, &table, thermo.tolerance)
                })
                .collect::<Result<Vec<_>, ThermoError>>()?;
            Some(rows)
        };
        let mut csv = String::from(WINGS_HEADER);
        csv.push('\n');
        let (mut fa, mut fe, mut na, mut ne) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (i, &eta) in etas.iter().enumerate() {
            let a = analytic_populations(thermo.atom_number, eta, w0, nm * 1e-9);
            let _ = write!(csv, "{eta:.6},{:.9e}", a.wing_fraction);
            match &exact {
                Some(rows) => {
                    let e = &rows[i];
                    let _ = write!(csv, ",{:.9e},{:.9e}", e.wing_fraction, e.wing_fraction_err);
                    let _ = writeln!(csv, ",{:.9e},{:.9e},{:.9e}", a.n0 * 1e-6, e.n0 * 1e-6, e.n0_err * 1e-6);
                    fe.push((eta, e.wing_fraction));
                    ne.push((eta, e.n0 * 1e-6));
                }
                None => {
                    let _ = writeln!(csv, ",,,{:.9e},,", a.n0 * 1e-6);
                }
            }
            fa.push((eta, a.wing_fraction));
            na.push((eta, a.n0 * 1e-6));
        }
        let name = format!("wings_{}nm.csv", nm.round() as i64);
        ctx.write(&mut report, &name, &csv)?;
        let _ = writeln!(report.text, "wrote {}", ctx.out.join(&name).display());
        let label = format!("{:.2} um", nm * 1e-3);
        fraction_plot.push(Series { name: format!("{label} analytic"), points: fa, dashed: true });
        density_plot.push(Series { name: format!("{label} analytic"), points: na, dashed: true });
        if !fe.is_empty() {
            fraction_plot.push(Series { name: format!("{label} exact"), points: fe, dashed: false });
            density_plot.push(Series { name: format!("{label} exact"), points: ne, dashed: false });
        }
    }
    if ctx.svg {
        let plot = LinePlot {
            title: "Fraction of atoms in the wings".into(),
            x_label: "eta".into(),
            y_label: "wing fraction".into(),
            log_y: false,
            series: fraction_plot,
        };
        ctx.write(&mut report, "wings_fraction.svg", &plot.render())?;
        let plot = LinePlot {
            title: "Peak density".into(),
            x_label: "eta".into(),
            y_label: "n0 (cm^-3)".into(),
            log_y: true,
            series: density_plot,
        };
        ctx.write(&mut report, "wings_n0.svg", &plot.render())?;
    }
    Ok(report)
}

pub const TRAP_SERIES_HEADER: &str = "t_s,depth_J,aux_depth_J,mean_freq_hz";

fn trap_series_csv(
    points: &[TrajectoryPoint],
    schedule: &PowerSchedule,
    config: &crate::TrapConfig,
) -> Result<String, CliError> {
    let mut csv = String::from(TRAP_SERIES_HEADER);
    csv.push('\n');
    for p in points {
        let depths = config.with_powers(&schedule.powers_at(p.t)).beam_depths()?;
        let aux = depths.get(1).copied().unwrap_or(0.0);
        let _ = writeln!(
            csv,
            "{:.9e},{:.9e},{:.9e},{:.9e}",
            p.t,
            p.depth,
            aux,
            p.mean_frequency / (2.0 * std::f64::consts::PI)
        );
    }
    Ok(csv)
}

fn summary_text(points: &[TrajectoryPoint]) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k}={v}");
    };
    let opt = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x:.6e}"));
    kv("points", points.len().to_string());
    match summarize(points) {
        Ok(sum) => {
            let st = &sum.stagnation;
            kv("peak_psd", format!("{:.6e}", st.peak_psd));
            kv("peak_time_s", format!("{:.6e}", st.peak_time));
            kv("peak_collision_rate_s", format!("{:.6e}", st.peak_collision_rate));
            kv("stagnated", st.stagnated().to_string());
            kv("stagnation_onset_s", opt(st.onset_time));
            kv("psd_crossing_s", opt(sum.psd_crossing.as_ref().map(|p| p.t)));
            kv("psd_crossing_N", opt(sum.psd_crossing.as_ref().map(|p| p.atom_number)));
            kv("tc_crossing_s", opt(sum.tc_crossing.as_ref().map(|p| p.t)));
            kv("tc_crossing_N", opt(sum.tc_crossing.as_ref().map(|p| p.atom_number)));
            kv("tc_crossing_T_K", opt(sum.tc_crossing.as_ref().map(|p| p.temperature)));
        }
        Err(e) => kv("stagnation", format!("unavailable ({e})")),
    }
    if let Some(last) = points.last() {
        kv("final_t_s", format!("{:.6e}", last.t));
        kv("final_N", format!("{:.6e}", last.atom_number));
        kv("final_T_K", format!("{:.6e}", last.temperature));
        kv("final_eta", format!("{:.6e}", last.eta));
        kv("final_psd", format!("{:.6e}", last.psd));
    }
    s
}

fn cmd_evolve(ctx: &Context) -> Result<Report, CliError> {
    let schedule =
        ctx.config.schedule.clone().ok_or_else(|| CliError::Config("evolve needs a [schedule] section".into()))?;
    let config = ctx.config.trap_config()?;
    let params = ctx.config.evap_params(&config.species);
    let evap = &ctx.config.evap;
    let mut initial = default_initial_state(&config, &schedule, evap.initial_atom_number)?;
    if let Some(t) = evap.initial_temperature_uk {
        initial = TruncatedThermalState::new(evap.initial_atom_number, t * 1e-6, initial.beta, initial.trap)?;
    }
    let mut report = Report::default();
    let (points, failure) = match evolve(&initial, &config, &schedule, &params) {
        Ok(points) => (points, None),
        Err(EvapError::StateCollapse { t, reason, trajectory }) => {
            let last = trajectory.last().map_or("none".to_string(), |p| {
                format!("t={:.6e} s N={:.6e} T={:.6e} K psd={:.6e}", p.t, p.atom_number, p.temperature, p.psd)
            });
            let msg = format!("at t = {t:.6e} s ({reason}); last valid point {last}");
            (trajectory, Some(CliError::Collapse(msg)))
        }
        Err(e) => return Err(e.into()),
    };
    ctx.write(&mut report, "trajectory.csv", &trajectory_csv(&points))?;
    if let Some(err) = failure {
        return Err(err);
    }
    ctx.write(&mut report, "trap_series.csv", &trap_series_csv(&points, &schedule, &config)?)?;
    let summary = summary_text(&points);
    ctx.write(&mut report, "summary.txt", &summary)?;
    report.text.push_str(&summary);
    if ctx.svg {
        let t = |f: &dyn Fn(&TrajectoryPoint) -> f64| points.iter().map(|p| (p.t, f(p))).collect::<Vec<_>>();
        let uk = |e: f64| e / BOLTZMANN * 1e6;
        let aux: Vec<(f64, f64)> = points
            .iter()
            .map(|p| {
                let d = config.with_powers(&schedule.powers_at(p.t)).beam_depths().unwrap_or_default();
                (p.t, uk(d.get(1).copied().unwrap_or(0.0)))
            })
            .collect();
        let plot = LinePlot {
            title: "Trap depth during evaporation".into(),
            x_label: "t (s)".into(),
            y_label: "depth (uK)".into(),
            log_y: true,
            series: vec![
                Series { name: "combined".into(), points: t(&|p| uk(p.depth)), dashed: false },
                Series { name: "auxiliary only".into(), points: aux, dashed: true },
            ],
        };
        ctx.write(&mut report, "trap_depth.svg", &plot.render())?;
        let plot = LinePlot {
            title: "Mean trap frequency".into(),
            x_label: "t (s)".into(),
            y_label: "mean frequency (Hz)".into(),
            log_y: true,
            series: vec![Series {
                name: "combined".into(),
                points: t(&|p| p.mean_frequency / (2.0 * std::f64::consts::PI)),
                dashed: false,
            }],
        };
        ctx.write(&mut report, "trap_frequency.svg", &plot.render())?;
        let plot = LinePlot {
            title: "Phase-space density".into(),
            x_label: "t (s)".into(),
            y_label: "psd".into(),
            log_y: true,
            series: vec![Series { name: "psd".into(), points: t(&|p| p.psd), dashed: false }],
        };
        ctx.write(&mut report, "psd.svg", &plot.render())?;
    }
    Ok(report)
}

fn cmd_vtab(ctx: &Context) -> Result<Report, CliError> {
    let thermo = &ctx.config.thermo;
    let mut report = Report::default();
    let table = match &ctx.config.harmonic {
        Some(h) => {
            let mass = ctx.config.species()?.mass;
            let landscape = HarmonicLandscape::new(h.radius_um * 1e-6, h.depth_uk * 1e-6 * BOLTZMANN, mass)?;
            let table = VolumeTable::build(&landscape, thermo.beta, thermo.samples, thermo.seed, Execution::Parallel)?;
            let worst = max_relative_deviation(&table, |u| landscape.exact_volume(u));
            let _ = writeln!(report.text, "max_rel_dev_closed_form={worst:.6e}");
            table
        }
        None => volume_table(&ctx.config.trap_config()?, thermo.beta, thermo.samples, thermo.seed)?,
    };
    ctx.write(&mut report, "vtab.csv", &table.to_csv())?;
    let _ = writeln!(report.text, "wrote {}", ctx.out.join("vtab.csv").display());
    Ok(report)
}

/// Largest |V/V_exact − 1| over bin edges above a tenth of β.
pub fn max_relative_deviation(table: &VolumeTable, exact: impl Fn(f64) -> f64) -> f64 {
    table
        .u
        .iter()
        .zip(&table.volume)
        .filter(|(&u, _)| u >= 0.1 * table.beta)
        .map(|(&u, &v)| (v / exact(u) - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Bundled configuration files, by name, relative to the crate root.
pub fn bundled_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(format!("{name}.toml"))
}
