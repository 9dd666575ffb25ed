//! Command-line driver: argument parsing, config-file merging, and the
//! five subcommands (profile, simulate, diagnose, convergence,
//! reproduce-figures).

use crate::diagnostics::{diagnose_run, DEFAULT_U_MIN_CUT_FRACTION};
use crate::error::{Error, Result};
use crate::io::{
    list_snapshots, read_json, read_snapshot_csv, write_diagnostics_csv, write_json,
    write_profile_csv, write_snapshots, RunMetadata,
};
use crate::pde::{
    front_initial_data, run_simulation, Grid1D, NewtonConfig, SimulationResult, State,
    StepStats, TimeConfig,
};
use crate::profile::{compute_profile, compute_profile_anchored, fit_tails, make_params,
    WaveProfile};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "chemowave",
    about = "Traveling-wave simulator and diagnostics for a 1D chemotaxis system with fast diffusion",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct the traveling-wave profile and fit its tails.
    Profile(CommonArgs),
    /// Time-integrate the PDE system and store snapshots.
    Simulate(CommonArgs),
    /// Measure shift, speed, distances, and weighted norms on a stored run.
    Diagnose {
        /// Directory holding snapshots and metadata from a prior run.
        dir: PathBuf,
        #[command(flatten)]
        args: CommonArgs,
    },
    /// Grid-refinement study on the wave-initialized problem.
    Convergence {
        /// Grid spacings, finest last; at least 3, each half the previous.
        #[arg(long, num_args = 1.., value_delimiter = ',', allow_negative_numbers = false)]
        levels: Vec<f64>,
        #[command(flatten)]
        args: CommonArgs,
    },
    /// Run the three benchmark cases and emit plot-ready figure datasets.
    ReproduceFigures(CommonArgs),
}

/// Flags shared by the subcommands. Every field is optional so that the
/// config-file merge can tell "explicitly set" from "defaulted".
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Diffusion exponent, 0 < p < 1.
    #[arg(long)]
    pub p: Option<f64>,
    /// Chemotactic coefficient, > 0.
    #[arg(long)]
    pub chi: Option<f64>,
    /// Left cell-density state, > 0.
    #[arg(long = "u-minus")]
    pub u_minus: Option<f64>,
    /// Right signal state, > 0.
    #[arg(long = "w-plus")]
    pub w_plus: Option<f64>,
    /// Spatial interval as two numbers: left right.
    #[arg(long, num_args = 2, allow_negative_numbers = true)]
    pub domain: Option<Vec<f64>>,
    /// Grid spacing.
    #[arg(long)]
    pub h: Option<f64>,
    /// Time step.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Final time.
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Newton residual tolerance.
    #[arg(long = "newton-tol")]
    pub newton_tol: Option<f64>,
    /// Newton iteration cap.
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Steps between stored snapshots.
    #[arg(long = "snapshot-stride")]
    pub snapshot_stride: Option<usize>,
    /// Output directory. The CHEMOWAVE_OUT environment variable, when set,
    /// takes precedence over this flag.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Concurrent workers for multi-run subcommands.
    #[arg(long)]
    pub workers: Option<usize>,
    /// TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Profile anchor: z where U crosses u_minus/2.
    #[arg(long)]
    pub anchor: Option<f64>,
}

/// Config file layout: one section per module, key = value lines.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub newton: NewtonSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub profile: ProfileSection,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub p: Option<f64>,
    pub chi: Option<f64>,
    pub u_minus: Option<f64>,
    pub w_plus: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x_left: Option<f64>,
    pub x_right: Option<f64>,
    pub h: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub tau: Option<f64>,
    pub t_end: Option<f64>,
    pub snapshot_stride: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonSection {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub workers: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub anchor: Option<f64>,
}

/// Fully resolved run configuration: defaults, then config file, then
/// flags, then the CHEMOWAVE_OUT environment variable for the output dir.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunConfig {
    pub p: f64,
    pub chi: f64,
    pub u_minus: f64,
    pub w_plus: f64,
    pub x_left: f64,
    pub x_right: f64,
    pub h: f64,
    pub tau: f64,
    pub t_end: f64,
    pub newton_tol: f64,
    pub max_iter: usize,
    pub snapshot_stride: usize,
    pub out: PathBuf,
    pub workers: usize,
    pub anchor: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            p: 0.5,
            chi: 1.0,
            u_minus: 1.0,
            w_plus: 1.0,
            x_left: -30.0,
            x_right: 30.0,
            h: 0.05,
            tau: 0.05,
            t_end: 20.0,
            newton_tol: 1e-10,
            max_iter: 50,
            snapshot_stride: 20,
            out: PathBuf::from("out"),
            workers: 3,
            anchor: 0.0,
        }
    }
}

impl RunConfig {
    /// Merge defaults <- config file <- flags <- environment.
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(path) = &args.config {
            let text = std::fs::read_to_string(path)?;
            let file: FileConfig = toml::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            cfg.apply_file(&file);
        }
        cfg.apply_flags(args)?;
        if let Ok(out) = std::env::var("CHEMOWAVE_OUT") {
            if !out.is_empty() {
                cfg.out = PathBuf::from(out);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, f: &FileConfig) {
        macro_rules! take {
            ($dst:expr, $src:expr) => {
                if let Some(v) = &$src {
                    $dst = v.clone();
                }
            };
        }
        take!(self.p, f.model.p);
        take!(self.chi, f.model.chi);
        take!(self.u_minus, f.model.u_minus);
        take!(self.w_plus, f.model.w_plus);
        take!(self.x_left, f.grid.x_left);
        take!(self.x_right, f.grid.x_right);
        take!(self.h, f.grid.h);
        take!(self.tau, f.time.tau);
        take!(self.t_end, f.time.t_end);
        take!(self.snapshot_stride, f.time.snapshot_stride);
        take!(self.newton_tol, f.newton.tol);
        take!(self.max_iter, f.newton.max_iter);
        take!(self.out, f.output.dir);
        take!(self.workers, f.output.workers);
        take!(self.anchor, f.profile.anchor);
    }

    fn apply_flags(&mut self, a: &CommonArgs) -> Result<()> {
        macro_rules! take {
            ($dst:expr, $src:expr) => {
                if let Some(v) = &$src {
                    $dst = v.clone();
                }
            };
        }
        take!(self.p, a.p);
        take!(self.chi, a.chi);
        take!(self.u_minus, a.u_minus);
        take!(self.w_plus, a.w_plus);
        if let Some(d) = &a.domain {
            if d.len() != 2 {
                return Err(Error::Config(format!(
                    "--domain needs exactly 2 values, got {}",
                    d.len()
                )));
            }
            self.x_left = d[0];
            self.x_right = d[1];
        }
        take!(self.h, a.h);
        take!(self.tau, a.tau);
        take!(self.t_end, a.t_end);
        take!(self.newton_tol, a.newton_tol);
        take!(self.max_iter, a.max_iter);
        take!(self.snapshot_stride, a.snapshot_stride);
        take!(self.out, a.out);
        take!(self.workers, a.workers);
        take!(self.anchor, a.anchor);
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        make_params(self.p, self.chi, self.u_minus, self.w_plus)?;
        if !(self.x_left < self.x_right) {
            return Err(Error::Config(format!(
                "domain [{}, {}] is empty",
                self.x_left, self.x_right
            )));
        }
        if !(self.h > 0.0) {
            return Err(Error::Config(format!("grid spacing must be positive, got {}", self.h)));
        }
        if !(self.tau > 0.0) {
            return Err(Error::Config(format!("time step must be positive, got {}", self.tau)));
        }
        if self.t_end < 0.0 {
            return Err(Error::Config(format!("final time must be nonnegative, got {}", self.t_end)));
        }
        if !(self.newton_tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Config(format!(
                "newton settings invalid: tol = {}, max_iter = {}",
                self.newton_tol, self.max_iter
            )));
        }
        if self.workers == 0 {
            return Err(Error::Config("worker count must be at least 1".into()));
        }
        if !(self.x_left < self.anchor && self.anchor < self.x_right) {
            return Err(Error::Config(format!(
                "domain [{}, {}] does not contain the anchor {}",
                self.x_left, self.x_right, self.anchor
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::with_spacing(self.x_left, self.x_right, self.h)
    }

    pub fn time(&self) -> Result<TimeConfig> {
        TimeConfig::new(self.tau, self.t_end, self.snapshot_stride)
    }

    pub fn newton(&self) -> NewtonConfig {
        NewtonConfig {
            tol: self.newton_tol,
            max_iter: self.max_iter,
            ..NewtonConfig::default()
        }
    }

    pub fn metadata(&self, grid: &Grid1D) -> RunMetadata {
        RunMetadata {
            p: self.p,
            chi: self.chi,
            u_minus: self.u_minus,
            w_plus: self.w_plus,
            x_left: self.x_left,
            x_right: self.x_right,
            h: grid.h,
            nx: grid.nx,
            tau: self.tau,
            t_end: self.t_end,
            snapshot_stride: self.snapshot_stride,
            newton_tol: self.newton_tol,
            max_iter: self.max_iter,
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Profile(args) => cli_profile(&RunConfig::resolve(&args)?),
        Command::Simulate(args) => cli_simulate(&RunConfig::resolve(&args)?),
        Command::Diagnose { dir, args } => cli_diagnose(&dir, &args),
        Command::Convergence { levels, args } => {
            cli_convergence(&RunConfig::resolve(&args)?, &levels)
        }
        Command::ReproduceFigures(args) => cli_reproduce_figures(&RunConfig::resolve(&args)?),
    }
}

#[derive(Debug, Serialize)]
struct ProfileSummary {
    p: f64,
    chi: f64,
    u_minus: f64,
    w_plus: f64,
    s: f64,
    v_minus: f64,
    anchor: f64,
    rankine_hugoniot_residuals: (f64, f64),
    tails: crate::profile::TailModel,
    tail_analysis_range: (f64, f64),
}

/// Build a wide auxiliary profile for tail fitting; the right window needs
/// z well past 50, independent of the plotting domain.
fn tail_analysis_profile(cfg: &RunConfig) -> Result<(WaveProfile, (f64, f64))> {
    let params = make_params(cfg.p, cfg.chi, cfg.u_minus, cfg.w_plus)?;
    let (z_min, z_max) = (-20.0, 400.0);
    let profile = compute_profile(&params, z_min, z_max, 4001)?;
    Ok((profile, (z_min, z_max)))
}

pub fn cli_profile(cfg: &RunConfig) -> Result<()> {
    let params = make_params(cfg.p, cfg.chi, cfg.u_minus, cfg.w_plus)?;
    let n = ((cfg.x_right - cfg.x_left) / cfg.h).round() as usize + 1;
    let profile = compute_profile_anchored(&params, cfg.x_left, cfg.x_right, n, cfg.anchor)?;
    let (wide, range) = tail_analysis_profile(cfg)?;
    let tails = fit_tails(&wide)?;
    let rh = crate::profile::check_rankine_hugoniot(&params);

    write_profile_csv(&cfg.out.join("profile.csv"), &profile)?;
    write_json(
        &cfg.out.join("profile_summary.json"),
        &ProfileSummary {
            p: params.p,
            chi: params.chi,
            u_minus: params.u_minus,
            w_plus: params.w_plus,
            s: params.s,
            v_minus: params.v_minus,
            anchor: cfg.anchor,
            rankine_hugoniot_residuals: rh,
            tails,
            tail_analysis_range: range,
        },
    )?;
    println!(
        "profile: s = {:.6}, {} samples on [{}, {}] -> {}",
        params.s,
        n,
        cfg.x_left,
        cfg.x_right,
        cfg.out.display()
    );
    Ok(())
}

fn write_steps_csv(path: &Path, steps: &[StepStats]) -> Result<()> {
    let mut text = String::from("t,iterations,residual,clamped_nodes,mass,flux_integral\n");
    for s in steps {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            crate::io::fmt_f64(s.t),
            s.iterations,
            crate::io::fmt_f64(s.residual),
            s.clamped_nodes,
            crate::io::fmt_f64(s.mass),
            crate::io::fmt_f64(s.flux_integral),
        ));
    }
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn simulate_into(cfg: &RunConfig, dir: &Path) -> Result<SimulationResult> {
    let grid = cfg.grid()?;
    let time = cfg.time()?;
    let newton = cfg.newton();
    let initial = State::from_fn(&grid, front_initial_data);
    let sim = run_simulation(&grid, &time, &newton, cfg.chi, cfg.p, initial)?;
    write_snapshots(dir, &sim)?;
    write_json(&dir.join("metadata.json"), &cfg.metadata(&grid))?;
    write_steps_csv(&dir.join("steps.csv"), &sim.steps)?;
    Ok(sim)
}

pub fn cli_simulate(cfg: &RunConfig) -> Result<()> {
    let sim = simulate_into(cfg, &cfg.out)?;
    let max_iter = sim.steps.iter().map(|s| s.iterations).max().unwrap_or(0);
    println!(
        "simulate: {} steps, {} snapshots, max {} Newton iterations -> {}",
        sim.steps.len(),
        sim.snapshots.len(),
        max_iter,
        cfg.out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct DiagnoseSummary {
    shift_x0: f64,
    shift_mass_residual: f64,
    gamma: f64,
    s_measured: Option<f64>,
    s_target: f64,
    u_min_cut: f64,
    discarded_nodes_max: usize,
    tails: crate::profile::TailModel,
}

fn check_metadata(args: &CommonArgs, meta: &RunMetadata) -> Result<()> {
    let mut mismatches = Vec::new();
    let mut chk = |name: &str, given: Option<f64>, stored: f64| {
        if let Some(g) = given {
            if (g - stored).abs() > 1e-12 * (1.0 + stored.abs()) {
                mismatches.push(format!("{name}: flag {g} vs stored {stored}"));
            }
        }
    };
    chk("p", args.p, meta.p);
    chk("chi", args.chi, meta.chi);
    chk("u-minus", args.u_minus, meta.u_minus);
    chk("w-plus", args.w_plus, meta.w_plus);
    chk("h", args.h, meta.h);
    chk("tau", args.tau, meta.tau);
    chk("t-end", args.t_end, meta.t_end);
    if let Some(d) = &args.domain {
        if d.len() == 2 && (d[0] != meta.x_left || d[1] != meta.x_right) {
            mismatches.push(format!(
                "domain: flag [{}, {}] vs stored [{}, {}]",
                d[0], d[1], meta.x_left, meta.x_right
            ));
        }
    }
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(Error::MetadataMismatch(mismatches.join("; ")))
    }
}

pub fn cli_diagnose(dir: &Path, args: &CommonArgs) -> Result<()> {
    let meta_path = dir.join("metadata.json");
    if !meta_path.exists() {
        return Err(Error::MetadataMismatch(format!(
            "{} has no metadata.json; run `simulate` first",
            dir.display()
        )));
    }
    let meta: RunMetadata = read_json(&meta_path)?;
    check_metadata(args, &meta)?;

    let files = list_snapshots(dir)?;
    if files.is_empty() {
        return Err(Error::Config(format!(
            "{} contains no snapshot files",
            dir.display()
        )));
    }
    let grid = Grid1D::new(meta.x_left, meta.x_right, meta.nx)?;
    let mut snapshots = Vec::with_capacity(files.len());
    for (t, path) in &files {
        let (_, u, v) = read_snapshot_csv(path)?;
        if u.len() != grid.nx {
            return Err(Error::MetadataMismatch(format!(
                "{}: {} rows, metadata says {}",
                path.display(),
                u.len(),
                grid.nx
            )));
        }
        snapshots.push(State { t: *t, u, v });
    }
    let sim = SimulationResult {
        grid,
        snapshots,
        steps: Vec::new(),
    };

    let params = make_params(meta.p, meta.chi, meta.u_minus, meta.w_plus)?;
    // wide enough that the shifted wave stays inside the table at all times
    let margin = 10.0 + params.s * meta.t_end;
    let z_lo = meta.x_left - margin;
    let z_hi = meta.x_right + margin;
    let n = (((z_hi - z_lo) / meta.h).round() as usize + 1).min(20001);
    let profile = compute_profile(&params, z_lo, z_hi, n)?;

    let t_end = files.last().unwrap().0;
    let window = (0.5 * t_end, t_end);
    let cut = DEFAULT_U_MIN_CUT_FRACTION * meta.u_minus;
    let diag = diagnose_run(&sim, &profile, cut, window)?;

    let (wide, _) = tail_analysis_profile(&RunConfig {
        p: meta.p,
        chi: meta.chi,
        u_minus: meta.u_minus,
        w_plus: meta.w_plus,
        ..RunConfig::default()
    })?;
    let tails = fit_tails(&wide)?;

    let out = resolve_out(args, dir);
    write_diagnostics_csv(&out.join("diagnostics.csv"), &diag)?;
    write_json(
        &out.join("diagnose_summary.json"),
        &DiagnoseSummary {
            shift_x0: diag.shift.x0,
            shift_mass_residual: diag.shift.mass_residual,
            gamma: diag.gamma,
            s_measured: diag.s_measured,
            s_target: params.s,
            u_min_cut: diag.u_min_cut,
            discarded_nodes_max: diag.discarded_nodes_max,
            tails,
        },
    )?;
    match diag.s_measured {
        Some(s) => println!(
            "diagnose: x0 = {:.4}, measured speed {:.4} (target {:.4}) -> {}",
            diag.shift.x0,
            s,
            params.s,
            out.display()
        ),
        None => println!(
            "diagnose: x0 = {:.4}, speed window under-sampled -> {}",
            diag.shift.x0,
            out.display()
        ),
    }
    Ok(())
}

/// Output dir for diagnose: env > --out > the run dir itself.
fn resolve_out(args: &CommonArgs, dir: &Path) -> PathBuf {
    if let Ok(out) = std::env::var("CHEMOWAVE_OUT") {
        if !out.is_empty() {
            return PathBuf::from(out);
        }
    }
    args.out.clone().unwrap_or_else(|| dir.to_path_buf())
}

#[derive(Debug, Serialize)]
pub struct ConvergenceReport {
    pub levels: Vec<f64>,
    pub t_end: f64,
    /// Sup-norm differences between consecutive levels at shared nodes.
    pub level_differences: Vec<f64>,
    /// log2 ratios of consecutive differences.
    pub orders: Vec<f64>,
    pub observed_order: f64,
}

/// Refinement study: run the wave-initialized problem at each level with
/// tau = h, difference consecutive levels at the coarse nodes, and report
/// the implied order. Spacings must halve level to level.
pub fn convergence_study(cfg: &RunConfig, levels: &[f64]) -> Result<ConvergenceReport> {
    if levels.len() < 3 {
        return Err(Error::Config(format!(
            "refinement study needs at least 3 levels, got {}",
            levels.len()
        )));
    }
    for w in levels.windows(2) {
        if !(w[1] > 0.0) || (w[0] / w[1] - 2.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "levels must halve: {} -> {} is not a factor of 2",
                w[0], w[1]
            )));
        }
    }
    let params = make_params(cfg.p, cfg.chi, cfg.u_minus, cfg.w_plus)?;
    let margin = 10.0 + params.s * cfg.t_end;
    let n_prof = (((cfg.x_right - cfg.x_left + 2.0 * margin) / levels[levels.len() - 1])
        .round() as usize
        + 1)
    .min(20001);
    let profile = compute_profile(&params, cfg.x_left - margin, cfg.x_right + margin, n_prof)?;

    let mut finals: Vec<(Grid1D, State)> = Vec::new();
    for &h in levels {
        let grid = Grid1D::with_spacing(cfg.x_left, cfg.x_right, h)?;
        let time = TimeConfig::new(h, cfg.t_end, usize::MAX)?;
        let initial = State::from_fn(&grid, |x| (profile.eval_u(x), profile.eval_v(x)));
        let sim = run_simulation(&grid, &time, &cfg.newton(), cfg.chi, cfg.p, initial)?;
        finals.push((grid, sim.snapshots.last().unwrap().clone()));
    }

    let mut diffs = Vec::new();
    for k in 0..levels.len() - 1 {
        let (coarse_grid, coarse) = &finals[k];
        let (fine_grid, fine) = &finals[k + 1];
        let ratio = ((fine_grid.nx - 1) / (coarse_grid.nx - 1)).max(1);
        let mut sup = 0.0f64;
        for i in 0..coarse_grid.nx {
            sup = sup.max((coarse.u[i] - fine.u[i * ratio]).abs());
        }
        diffs.push(sup);
    }
    let orders: Vec<f64> = diffs
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .collect();
    let observed_order = *orders.last().unwrap();
    Ok(ConvergenceReport {
        levels: levels.to_vec(),
        t_end: cfg.t_end,
        level_differences: diffs,
        orders,
        observed_order,
    })
}

pub fn cli_convergence(cfg: &RunConfig, levels: &[f64]) -> Result<()> {
    let report = convergence_study(cfg, levels)?;
    println!("level       h            |u_h - u_{{h/2}}|_inf   order");
    for k in 0..report.level_differences.len() {
        let order = if k == 0 {
            "     -".to_string()
        } else {
            format!("{:6.3}", report.orders[k - 1])
        };
        println!(
            "{:>5}  {:>10.6}   {:>18.12e}   {}",
            k, report.levels[k], report.level_differences[k], order
        );
    }
    println!("observed order: {:.3}", report.observed_order);
    write_json(&cfg.out.join("convergence.json"), &report)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct FigureEntry {
    figure: usize,
    kind: &'static str,
    p: Option<f64>,
    description: String,
    path: String,
}

#[derive(Debug, Serialize)]
struct FigureManifest {
    complete: bool,
    datasets: Vec<FigureEntry>,
}

/// Times shown by the 2D slice figures.
const SLICE_TIMES: [f64; 5] = [0.0, 5.0, 10.0, 15.0, 20.0];

fn write_surface_csv(path: &Path, sim: &SimulationResult) -> Result<()> {
    let mut text = String::from("t,x,u,v\n");
    for snap in &sim.snapshots {
        for i in 0..sim.grid.nx {
            text.push_str(&format!(
                "{},{},{},{}\n",
                crate::io::fmt_f64(snap.t),
                crate::io::fmt_f64(sim.grid.node(i)),
                crate::io::fmt_f64(snap.u[i]),
                crate::io::fmt_f64(snap.v[i]),
            ));
        }
    }
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn snapshot_at(sim: &SimulationResult, t: f64) -> Result<&State> {
    sim.snapshots
        .iter()
        .find(|s| (s.t - t).abs() < 1e-9)
        .ok_or_else(|| Error::Config(format!("no stored snapshot at t = {t}")))
}

fn write_slices_csv(path: &Path, sim: &SimulationResult) -> Result<()> {
    let mut header = String::from("x");
    for t in SLICE_TIMES {
        header.push_str(&format!(",u_t{t}"));
    }
    for t in SLICE_TIMES {
        header.push_str(&format!(",v_t{t}"));
    }
    let snaps: Vec<&State> = SLICE_TIMES
        .iter()
        .map(|&t| snapshot_at(sim, t))
        .collect::<Result<_>>()?;
    let mut text = header;
    text.push('\n');
    for i in 0..sim.grid.nx {
        let mut row = vec![crate::io::fmt_f64(sim.grid.node(i))];
        for s in &snaps {
            row.push(crate::io::fmt_f64(s.u[i]));
        }
        for s in &snaps {
            row.push(crate::io::fmt_f64(s.v[i]));
        }
        text.push_str(&row.join(","));
        text.push('\n');
    }
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn write_comparison_csv(path: &Path, runs: &[(f64, &SimulationResult)], t: f64) -> Result<()> {
    let grid = &runs[0].1.grid;
    let mut header = String::from("x");
    for (p, _) in runs {
        header.push_str(&format!(",u_p{p},v_p{p}"));
    }
    let snaps: Vec<&State> = runs
        .iter()
        .map(|(_, sim)| snapshot_at(sim, t))
        .collect::<Result<_>>()?;
    let mut text = header;
    text.push('\n');
    for i in 0..grid.nx {
        let mut row = vec![crate::io::fmt_f64(grid.node(i))];
        for s in &snaps {
            row.push(crate::io::fmt_f64(s.u[i]));
            row.push(crate::io::fmt_f64(s.v[i]));
        }
        text.push_str(&row.join(","));
        text.push('\n');
    }
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// The three benchmark exponents of the reproduction suite.
pub const FIGURE_EXPONENTS: [f64; 3] = [0.1, 0.5, 0.9];

pub fn cli_reproduce_figures(cfg: &RunConfig) -> Result<()> {
    let base = RunConfig {
        x_left: -30.0,
        x_right: 30.0,
        h: 0.05,
        tau: 0.05,
        t_end: 20.0,
        snapshot_stride: 10,
        ..cfg.clone()
    };
    let workers = cfg.workers.min(FIGURE_EXPONENTS.len()).max(1);

    let mut results: Vec<Option<Result<SimulationResult>>> =
        FIGURE_EXPONENTS.iter().map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunks: Vec<&mut [Option<Result<SimulationResult>>]> =
            results.chunks_mut(FIGURE_EXPONENTS.len().div_ceil(workers)).collect();
        let mut offset = 0;
        for chunk in chunks {
            let len = chunk.len();
            let base = &base;
            let start = offset;
            scope.spawn(move || {
                for (j, slot) in chunk.iter_mut().enumerate() {
                    let p = FIGURE_EXPONENTS[start + j];
                    let run_cfg = RunConfig { p, ..base.clone() };
                    *slot = Some(run_cfg.grid().and_then(|grid| {
                        let time = run_cfg.time()?;
                        let initial = State::from_fn(&grid, front_initial_data);
                        run_simulation(&grid, &time, &run_cfg.newton(), run_cfg.chi, run_cfg.p, initial)
                    }));
                }
            });
            offset += len;
        }
    });

    let dir = cfg.out.join("figures");
    let mut datasets = Vec::new();
    let mut failure: Option<Error> = None;
    let mut completed: Vec<(f64, SimulationResult)> = Vec::new();

    for (k, slot) in results.into_iter().enumerate() {
        let p = FIGURE_EXPONENTS[k];
        match slot.expect("worker filled every slot") {
            Ok(sim) => completed.push((p, sim)),
            Err(e) => {
                failure = Some(Error::Config(format!("run p = {p} failed: {e}")));
                break;
            }
        }
    }

    for (idx, (p, sim)) in completed.iter().enumerate() {
        let fig_surface = 2 * idx + 1;
        let fig_slices = 2 * idx + 2;
        let surface = dir.join(format!("fig{fig_surface}_surface_p{p}.csv"));
        write_surface_csv(&surface, sim)?;
        datasets.push(FigureEntry {
            figure: fig_surface,
            kind: "surface",
            p: Some(*p),
            description: format!("space-time fields u(x,t), v(x,t) for p = {p}"),
            path: surface.display().to_string(),
        });
        let slices = dir.join(format!("fig{fig_slices}_slices_p{p}.csv"));
        write_slices_csv(&slices, sim)?;
        datasets.push(FigureEntry {
            figure: fig_slices,
            kind: "slices",
            p: Some(*p),
            description: format!("u and v at t = 0, 5, 10, 15, 20 for p = {p}"),
            path: slices.display().to_string(),
        });
    }
    if failure.is_none() && completed.len() == FIGURE_EXPONENTS.len() {
        let refs: Vec<(f64, &SimulationResult)> =
            completed.iter().map(|(p, s)| (*p, s)).collect();
        let cmp = dir.join("fig7_comparison_t20.csv");
        write_comparison_csv(&cmp, &refs, 20.0)?;
        datasets.push(FigureEntry {
            figure: 7,
            kind: "comparison",
            p: None,
            description: "u and v at t = 20 across p = 0.1, 0.5, 0.9".into(),
            path: cmp.display().to_string(),
        });
    }

    let manifest = FigureManifest {
        complete: failure.is_none() && datasets.len() == 7,
        datasets,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    match failure {
        Some(e) => Err(e),
        None => {
            println!(
                "reproduce-figures: 7 datasets -> {}",
                dir.display()
            );
            Ok(())
        }
    }
}
