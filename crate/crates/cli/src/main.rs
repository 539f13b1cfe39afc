//! Command-line front end: switching curves, crossing directions, double
//! Hopf search, unfolding classification, simulation, and the reference
//! reproduction suite.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use duohopf_core::config::{parse_config, Config};
use duohopf_core::direction::partials;
use duohopf_core::export;
use duohopf_core::hopf2::{find_double_hopf, on_stability_boundary, DoubleHopfPoint};
use duohopf_core::poincare::{poincare, Section};
use duohopf_core::quasipoly::build;
use duohopf_core::simulate::{run as run_sim, History, SimConfig};
use duohopf_core::switching::{connectivity, generate_all, CurveOptions, ModeSelection, Window};
use duohopf_core::unfolding::{region_of, semilines, unfold, RegionError, DEFAULT_CHART_RADIUS};

mod reproduce;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_NONE_FOUND: u8 = 4;

#[derive(Parser)]
#[command(
    name = "duohopf",
    version,
    about = "Stability switching curves and double Hopf analysis for a two-delay diffusive predator-prey model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Parameter file (key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if absent).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overwrite existing output files.
    #[arg(long)]
    overwrite: bool,
    /// Seed for randomized initial data.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Stability switching curves per spatial mode (CSV + connectivity).
    Curves {
        #[command(flatten)]
        common: CommonArgs,
        /// Delay window as `tau1_max,tau2_max`.
        #[arg(long, default_value = "20,20", value_parser = parse_pair)]
        window: (f64, f64),
        /// Highest spatial mode; omit to stop at the first curve-free mode.
        #[arg(long)]
        modes: Option<u32>,
        /// Also write an SVG overlay of all modes.
        #[arg(long)]
        svg: bool,
    },
    /// Curve samples annotated with crossing-direction data.
    Directions {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "20,20", value_parser = parse_pair)]
        window: (f64, f64),
        #[arg(long)]
        modes: Option<u32>,
    },
    /// Locate double Hopf candidates (curve intersections).
    Hh {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "5,3", value_parser = parse_pair)]
        window: (f64, f64),
        #[arg(long)]
        modes: Option<u32>,
    },
    /// Classify the unfolding at a double Hopf point and emit semi-lines.
    Classify {
        #[command(flatten)]
        common: CommonArgs,
        /// Double Hopf point as `tau1,tau2,omega1,omega2`; computed from
        /// the curves when omitted.
        #[arg(long, value_parser = parse_quad)]
        hh: Option<(f64, f64, f64, f64)>,
        #[arg(long, default_value = "5,3", value_parser = parse_pair)]
        window: (f64, f64),
        /// Probe point `tau1,tau2` for a region lookup (repeatable).
        #[arg(long, value_parser = parse_pair)]
        probe: Vec<(f64, f64)>,
        #[arg(long, default_value_t = DEFAULT_CHART_RADIUS)]
        chart_radius: f64,
    },
    /// Integrate the delayed reaction-diffusion system and classify the
    /// attractor from a Poincare section.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        tau1: f64,
        #[arg(long)]
        tau2: f64,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Time step; defaults to the largest stable step.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 6000.0)]
        t_end: f64,
        #[arg(long, default_value_t = 2000.0)]
        transient: f64,
        #[arg(long, default_value_t = 10)]
        output_every: usize,
        /// Poincare section: `vstar` or `dudot`.
        #[arg(long, default_value = "vstar")]
        section: String,
        /// Initial data: `const`, `mode`, or `random`.
        #[arg(long, default_value = "const")]
        history: String,
        #[arg(long, default_value_t = 0.01)]
        amplitude: f64,
        /// Spatial mode number for `--history mode`.
        #[arg(long, default_value_t = 0)]
        mode_number: u32,
        /// Also write an SVG phase portrait.
        #[arg(long)]
        svg: bool,
    },
    /// Run the reference reproduction suite and print a pass/fail table.
    Reproduce {
        #[command(flatten)]
        common: CommonArgs,
        /// Skip the long-running simulations.
        #[arg(long)]
        skip_sim: bool,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected `a,b`, got `{s}`"));
    }
    let a = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let b = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    Ok((a, b))
}

fn parse_quad(s: &str) -> Result<(f64, f64, f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(format!("expected `tau1,tau2,omega1,omega2`, got `{s}`"));
    }
    let mut v = [0.0; 4];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part.trim().parse().map_err(|e| format!("{e}"))?;
    }
    Ok((v[0], v[1], v[2], v[3]))
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numerical(String),
    NoneFound(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) | CliError::Io(_) => EXIT_NUMERICAL,
            CliError::NoneFound(_) => EXIT_NONE_FOUND,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m)
            | CliError::Numerical(m)
            | CliError::NoneFound(m)
            | CliError::Io(m) => m,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Curves {
            common,
            window,
            modes,
            svg,
        } => cmd_curves(&common, window, modes, svg),
        Command::Directions {
            common,
            window,
            modes,
        } => cmd_directions(&common, window, modes),
        Command::Hh {
            common,
            window,
            modes,
        } => cmd_hh(&common, window, modes),
        Command::Classify {
            common,
            hh,
            window,
            probe,
            chart_radius,
        } => cmd_classify(&common, hh, window, &probe, chart_radius),
        Command::Simulate {
            common,
            tau1,
            tau2,
            grid,
            dt,
            t_end,
            transient,
            output_every,
            section,
            history,
            amplitude,
            mode_number,
            svg,
        } => cmd_simulate(
            &common,
            SimArgs {
                tau1,
                tau2,
                grid,
                dt,
                t_end,
                transient,
                output_every,
                section,
                history,
                amplitude,
                mode_number,
                svg,
            },
        ),
        Command::Reproduce { common, skip_sim } => reproduce::cmd_reproduce(&common, skip_sim),
    }
}

fn load_config(common: &CommonArgs) -> Result<Config, CliError> {
    let text = fs::read_to_string(&common.config)
        .map_err(|e| CliError::Config(format!("{}: {e}", common.config.display())))?;
    parse_config(&text).map_err(|e| CliError::Config(format!("{}: {e}", common.config.display())))
}

fn window_of(pair: (f64, f64)) -> Result<Window, CliError> {
    if pair.0 <= 0.0 || pair.1 <= 0.0 {
        return Err(CliError::Config(format!(
            "window bounds must be positive, got {},{}",
            pair.0, pair.1
        )));
    }
    Ok(Window::new(pair.0, pair.1))
}

/// Create a file under the output directory, refusing to overwrite unless
/// asked to.
fn create_output(common: &CommonArgs, name: &str) -> Result<fs::File, CliError> {
    fs::create_dir_all(&common.out)?;
    let path = common.out.join(name);
    if path.exists() && !common.overwrite {
        return Err(CliError::Config(format!(
            "{} exists; pass --overwrite to replace it",
            path.display()
        )));
    }
    Ok(fs::File::create(path)?)
}

fn write_manifest(common: &CommonArgs, subcommand: &str) -> Result<(), CliError> {
    let mut f = create_output(common, "run_manifest.txt")?;
    writeln!(f, "subcommand = {subcommand}")?;
    writeln!(f, "config = {}", common.config.display())?;
    writeln!(f, "out = {}", common.out.display())?;
    writeln!(f, "seed = {}", common.seed)?;
    writeln!(f, "version = {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(f, "backend = {}", duohopf_core::par::backend_name())?;
    Ok(())
}

fn mode_selection(modes: Option<u32>) -> ModeSelection {
    match modes {
        Some(n) => ModeSelection::UpTo(n),
        None => ModeSelection::Auto,
    }
}

fn cmd_curves(
    common: &CommonArgs,
    window: (f64, f64),
    modes: Option<u32>,
    svg: bool,
) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let window = window_of(window)?;
    let opts = CurveOptions::default();
    write_manifest(common, "curves")?;
    let curves = generate_all(&cfg.params, mode_selection(modes), window, &opts);
    for mc in &curves {
        let f = create_output(common, &format!("curves_n{}.csv", mc.n))?;
        export::write_curves_csv(f, &mc.segments)?;
        let f = create_output(common, &format!("connectivity_n{}.csv", mc.n))?;
        export::write_connectivity_csv(f, &mc.segments, &connectivity(&mc.segments, &opts))?;
        println!(
            "mode {}: {} intervals, {} segments",
            mc.n,
            mc.crossing.intervals.len(),
            mc.segments.len()
        );
    }
    if svg {
        let per_mode: Vec<(u32, &[duohopf_core::switching::CurveSegment])> = curves
            .iter()
            .map(|mc| (mc.n, mc.segments.as_slice()))
            .collect();
        let f = create_output(common, "curves.svg")?;
        export::write_curves_svg(f, &per_mode, window)?;
    }
    Ok(())
}

fn cmd_directions(
    common: &CommonArgs,
    window: (f64, f64),
    modes: Option<u32>,
) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let window = window_of(window)?;
    let opts = CurveOptions::default();
    write_manifest(common, "directions")?;
    let curves = generate_all(&cfg.params, mode_selection(modes), window, &opts);
    for mc in &curves {
        let q = build(&cfg.params, mc.n);
        let rows: Vec<_> = mc
            .segments
            .iter()
            .map(|seg| {
                let samples: Vec<_> = seg
                    .samples
                    .iter()
                    .map(|s| {
                        (
                            s.omega,
                            s.tau1,
                            s.tau2,
                            partials(&q, s.omega, s.tau1, s.tau2).ok(),
                        )
                    })
                    .collect();
                (seg, samples)
            })
            .collect();
        let f = create_output(common, &format!("directions_n{}.csv", mc.n))?;
        export::write_directions_csv(f, &rows)?;
    }
    Ok(())
}

fn cmd_hh(common: &CommonArgs, window: (f64, f64), modes: Option<u32>) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let window = window_of(window)?;
    let opts = CurveOptions::default();
    write_manifest(common, "hh")?;
    let points = find_double_hopf(&cfg.params, mode_selection(modes), window, &opts);
    let boundary: Vec<bool> = points
        .iter()
        .map(|pt| pt.refined && on_stability_boundary(&cfg.params, pt, 5, &opts))
        .collect();
    let mut f = create_output(common, "hh.csv")?;
    export::write_hh_csv(&mut f, &points)?;
    let mut bf = create_output(common, "hh_boundary.csv")?;
    writeln!(bf, "tau1,tau2,on_stability_boundary")?;
    for (pt, ob) in points.iter().zip(&boundary) {
        writeln!(bf, "{},{},{}", pt.tau1, pt.tau2, ob)?;
    }
    for (pt, ob) in points.iter().zip(&boundary) {
        println!(
            "({:.4}, {:.4}) omega = ({:.5}, {:.5}) modes ({}, {}) resonance {} residuals ({:.1e}, {:.1e}){}",
            pt.tau1,
            pt.tau2,
            pt.omega1,
            pt.omega2,
            pt.n1,
            pt.n2,
            pt.resonance.label(),
            pt.residual1,
            pt.residual2,
            if *ob { " [stability boundary]" } else { "" }
        );
    }
    if boundary.iter().any(|b| *b) {
        Ok(())
    } else {
        Err(CliError::NoneFound(
            "no double Hopf point on the stability boundary in this window".into(),
        ))
    }
}

fn auto_hh(cfg: &Config, window: Window) -> Result<DoubleHopfPoint, CliError> {
    let opts = CurveOptions::default();
    let points = find_double_hopf(&cfg.params, ModeSelection::Auto, window, &opts);
    points
        .into_iter()
        .filter(|pt| pt.refined && pt.n1 == 0 && pt.n2 == 0)
        .find(|pt| on_stability_boundary(&cfg.params, pt, 5, &opts))
        .ok_or_else(|| {
            CliError::NoneFound("no boundary double Hopf point found; pass --hh".into())
        })
}

fn cmd_classify(
    common: &CommonArgs,
    hh: Option<(f64, f64, f64, f64)>,
    window: (f64, f64),
    probes: &[(f64, f64)],
    chart_radius: f64,
) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let k = cfg
        .require_kcoeffs()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let window = window_of(window)?;
    write_manifest(common, "classify")?;
    let pt = match hh {
        Some((tau1, tau2, omega1, omega2)) => DoubleHopfPoint {
            tau1,
            tau2,
            omega1: omega1.min(omega2),
            omega2: omega1.max(omega2),
            n1: 0,
            n2: 0,
            resonance: duohopf_core::hopf2::resonance_check(
                omega1.min(omega2),
                omega1.max(omega2),
            ),
            refined: false,
            residual1: f64::NAN,
            residual2: f64::NAN,
        },
        None => auto_hh(&cfg, window)?,
    };
    let up = unfold(&k).map_err(|e| CliError::Numerical(e.to_string()))?;
    let lines = semilines(&up, &pt).map_err(|e| CliError::Numerical(e.to_string()))?;

    let mut report = String::new();
    report.push_str(&format!(
        "double Hopf point: tau = ({:.6}, {:.6}), omega = ({:.6}, {:.6}), resonance {}\n",
        pt.tau1,
        pt.tau2,
        pt.omega1,
        pt.omega2,
        pt.resonance.label()
    ));
    report.push_str(&format!(
        "eps1 = {}, eps2 = {}\n",
        up.eps1 as i32, up.eps2 as i32
    ));
    report.push_str(&format!(
        "b = {:.4}, c = {:.4}, d = {}, d - bc = {:.4}\n",
        up.b, up.c, up.d as i32, up.d_minus_bc
    ));
    report.push_str(&format!("unfolding case: {}\n", up.case.label()));
    for l in &lines {
        report.push_str(&format!(
            "{}: tau2 = (tau1 - {:.4})/({:.4}) + {:.4}   ({})\n",
            l.label,
            pt.tau1,
            l.reciprocal_slope,
            pt.tau2,
            l.side.describe(&pt)
        ));
    }
    report.push_str(
        "note: L4 carries an unresolved higher-order correction; its linear part equals L5\n",
    );
    for &(t1, t2) in probes {
        match region_of(&up, &pt, t1, t2, chart_radius) {
            Ok(region) => {
                let note = region
                    .attractor_note()
                    .map(|n| format!(" ({n})"))
                    .unwrap_or_default();
                report.push_str(&format!("probe ({t1}, {t2}): {}{note}\n", region.label()));
            }
            Err(RegionError::OutOfChart { dist, radius }) => report.push_str(&format!(
                "probe ({t1}, {t2}): outside local chart (distance {dist:.3} > {radius})\n"
            )),
            Err(e) => report.push_str(&format!("probe ({t1}, {t2}): {e}\n")),
        }
    }

    print!("{report}");
    let mut f = create_output(common, "classify_report.txt")?;
    f.write_all(report.as_bytes())?;
    let f = create_output(common, "semilines.csv")?;
    export::write_semilines_csv(f, &lines)?;
    Ok(())
}

struct SimArgs {
    tau1: f64,
    tau2: f64,
    grid: usize,
    dt: Option<f64>,
    t_end: f64,
    transient: f64,
    output_every: usize,
    section: String,
    history: String,
    amplitude: f64,
    mode_number: u32,
    svg: bool,
}

fn cmd_simulate(common: &CommonArgs, args: SimArgs) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    write_manifest(common, "simulate")?;
    let mut sim_cfg = SimConfig::new(cfg.params, args.tau1, args.tau2);
    sim_cfg.grid_points = args.grid;
    sim_cfg.dt = args
        .dt
        .unwrap_or_else(|| SimConfig::suggested_dt(&cfg.params, args.grid, args.tau1, args.tau2));
    sim_cfg.t_end = args.t_end;
    sim_cfg.t_transient = args.transient;
    sim_cfg.output_every = args.output_every;
    sim_cfg.history = match args.history.as_str() {
        "const" => History::Constant {
            du: args.amplitude,
            dv: args.amplitude,
        },
        "mode" => History::PerturbedMode {
            amplitude: args.amplitude,
            mode: args.mode_number,
        },
        "random" => History::Random {
            amplitude: args.amplitude,
            seed: common.seed,
        },
        other => {
            return Err(CliError::Config(format!(
                "unknown history kind `{other}` (expected const, mode, or random)"
            )))
        }
    };
    let section = match args.section.as_str() {
        "vstar" => Section::VStar,
        "dudot" => Section::DuDotZero,
        other => {
            return Err(CliError::Config(format!(
                "unknown section `{other}` (expected vstar or dudot)"
            )))
        }
    };
    sim_cfg
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;

    let traj = run_sim(sim_cfg).map_err(|e| CliError::Numerical(e.to_string()))?;
    let pr = poincare(&traj, section);
    let f = create_output(common, "trajectory.csv")?;
    export::write_trajectory_csv(f, &traj)?;
    let f = create_output(common, "poincare.csv")?;
    export::write_poincare_csv(f, &pr)?;
    if args.svg {
        let f = create_output(common, "phase.svg")?;
        export::write_phase_svg(f, &traj, Some(&pr))?;
    }
    for w in &pr.warnings {
        eprintln!("warning: {w}");
    }
    match pr.classification {
        Some(c) => {
            println!("classification: {}", c.label());
            Ok(())
        }
        None => Err(CliError::Numerical(
            "classification withheld (too few section hits)".into(),
        )),
    }
}
