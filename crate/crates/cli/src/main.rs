use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pairlind_core::algebra::{Bargmann, BasisTag};
use pairlind_core::dynamics::{
    build_full_generator, build_reduced_generator, evolve_sampled, moments, parity_masses,
    DensityMatrix, EvolveOptions, FullModelOptions, ObservableSet,
};
use pairlind_core::model::{bath_rates, hz, to_hz, BathParams};
use pairlind_core::sweep::{
    cross_validate, emit_csv, emit_svg, format_float, resolve_point, run_sweep, write_csv, Grid, Mode, PlotSpec,
    SectorChoice, SweepConfig,
};
use pairlind_core::Error;

#[derive(Parser)]
#[command(name = "pairlind", version, about = "Two-photon cooling of a nonlinear oscillator by a driven qubit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived rates at one detuning.
    Derive(PointArgs),
    /// Two-photon damping rate and frequency shift from bath parameters.
    BathRates(BathArgs),
    /// Sweep the detuning and write CSV (and optionally SVG).
    Sweep(SweepArgs),
    /// Compare closed forms, direct summation and numerical steady states at one point.
    Steady(SteadyArgs),
    /// Integrate the master equation and write a time series.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct PointArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    delta_omega_hz: f64,
    /// Defaults to the first value in the config.
    #[arg(long)]
    n_bar: Option<f64>,
    /// 0.25, 0.75, 1/4 or 3/4. Defaults to the first sector in the config.
    #[arg(long)]
    j: Option<String>,
    /// Fix Ω_R instead of solving the resonance condition.
    #[arg(long)]
    omega_r_hz: Option<f64>,
}

#[derive(Args)]
struct BathArgs {
    #[arg(long)]
    nu_hz: f64,
    #[arg(long)]
    chi_hz: f64,
    #[arg(long)]
    chi_tilde_hz: f64,
    #[arg(long)]
    omega_c_hz: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// 0.25, 0.75, 1/4, 3/4 or both.
    #[arg(long)]
    j: Option<String>,
    /// Comma-separated thermal occupations.
    #[arg(long, value_delimiter = ',')]
    n_bar: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    min_hz: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    max_hz: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Output CSV; standard output when neither flag nor config gives one.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Column plotted in the SVG.
    #[arg(long)]
    svg_y: Option<String>,
}

#[derive(Args)]
struct SteadyArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Also solve the full qubit-oscillator model.
    #[arg(long)]
    full: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Analytic,
    ReducedNumeric,
    FullNumeric,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Analytic => Mode::Analytic,
            ModeArg::ReducedNumeric => Mode::ReducedNumeric,
            ModeArg::FullNumeric => Mode::FullNumeric,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Reduced,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitialArg {
    Vacuum,
    Thermal,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    point: PointArgs,
    #[arg(long)]
    t_final_s: f64,
    #[arg(long, value_enum, default_value = "reduced")]
    model: ModelArg,
    #[arg(long, value_enum, default_value = "thermal")]
    initial: InitialArg,
    /// Output intervals; rows are written at `samples + 1` evenly spaced times.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Sector truncation (reduced) or Fock cutoff (full).
    #[arg(long, default_value_t = 40)]
    cutoff: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    msg: String,
}

fn config_failure(e: impl std::fmt::Display) -> Failure {
    Failure { code: 2, msg: e.to_string() }
}

fn classify(e: Error) -> Failure {
    let code = match e {
        Error::Config(_) | Error::InvalidArgument(_) | Error::DegenerateInput(_) => 2,
        Error::Io(_) => 1,
        _ => 3,
    };
    Failure { code, msg: e.to_string() }
}

fn load(path: &Path) -> Result<SweepConfig, Failure> {
    SweepConfig::from_path(path).map_err(config_failure)
}

fn parse_j(s: &str) -> Result<SectorChoice, Failure> {
    s.parse().map_err(config_failure)
}

/// `(config, n̄, j)` with flags taking precedence over the file.
fn point_setup(a: &PointArgs) -> Result<(SweepConfig, f64, Bargmann), Failure> {
    let mut cfg = load(&a.config)?;
    if let Some(w) = a.omega_r_hz {
        cfg.model.omega_r_hz = Some(w);
    }
    cfg.validate().map_err(config_failure)?;
    let n_bar = a.n_bar.unwrap_or(cfg.sweep.n_bar[0]);
    if !(n_bar >= 0.0) {
        return Err(config_failure(format!("--n-bar must be >= 0, got {n_bar}")));
    }
    let j = match a.j.as_deref().map(parse_j).transpose()? {
        Some(SectorChoice::One(j)) => j,
        Some(SectorChoice::Both) => return Err(config_failure("--j needs a single sector here")),
        None => cfg.sweep.j.sectors()[0],
    };
    Ok((cfg, n_bar, j))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) => std::fs::File::create(p)
            .map(|f| Box::new(std::io::BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| Failure { code: 1, msg: format!("{}: {e}", p.display()) }),
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn derive(a: &PointArgs) -> Result<(), Failure> {
    let (cfg, n_bar, j) = point_setup(a)?;
    let p = cfg.model_params(n_bar, a.delta_omega_hz);
    let pt = resolve_point(&p, j, cfg.tolerances.resonance_hz).map_err(classify)?;
    let r = &pt.rates;
    if let Some(e) = &pt.fallback {
        log::warn!("{e}; using the bare resonance omega_r");
    }
    if pt.params.dispersive_warning() {
        log::warn!("omega_c / delta_q is not small; the dispersive treatment may not hold");
    }
    let mut out = std::io::stdout().lock();
    let rows: [(&str, f64); 17] = [
        ("delta_omega_hz", a.delta_omega_hz),
        ("omega_hz", to_hz(r.omega)),
        ("omega_r_hz", to_hz(r.omega_r)),
        ("theta_rad", r.theta),
        ("g2_hz", to_hz(r.g2)),
        ("g0_hz", to_hz(r.g0)),
        ("gamma_plus_hz", to_hz(r.gamma_plus)),
        ("gamma_minus_hz", to_hz(r.gamma_minus)),
        ("gamma_dephase_hz", to_hz(r.gamma_dephase)),
        ("gamma_par_hz", to_hz(r.gamma_par)),
        ("gamma_perp_hz", to_hz(r.gamma_perp)),
        ("sz0", r.sz0),
        ("gamma_up_hz", to_hz(r.gamma_up)),
        ("gamma_down_hz", to_hz(r.gamma_down)),
        ("eta", r.eta),
        ("alpha", r.alpha),
        ("n_sat", r.n_sat),
    ];
    let io = |e: std::io::Error| Failure { code: 1, msg: e.to_string() };
    writeln!(out, "n_bar = {n_bar}").map_err(io)?;
    writeln!(out, "j = {j}").map_err(io)?;
    for (k, v) in rows {
        writeln!(out, "{k} = {}", format_float(v)).map_err(io)?;
    }
    if let Some(res) = pt.resonance {
        writeln!(out, "resonance_iterations = {}", res.iterations).map_err(io)?;
        writeln!(out, "resonance_residual_hz = {}", format_float(to_hz(res.residual))).map_err(io)?;
    }
    Ok(())
}

fn bath(a: &BathArgs) -> Result<(), Failure> {
    let b = BathParams { nu: hz(a.nu_hz), chi_tilde: hz(a.chi_tilde_hz), chi: hz(a.chi_hz) };
    let (kappa, chi_bar) = bath_rates(&b, hz(a.omega_c_hz)).map_err(classify)?;
    println!("kappa_hz = {}", format_float(to_hz(kappa)));
    println!("chi_bar_hz = {}", format_float(to_hz(chi_bar)));
    Ok(())
}

fn sweep(a: &SweepArgs) -> Result<(), Failure> {
    let mut cfg = load(&a.config)?;
    if let Some(m) = a.mode {
        cfg.sweep.mode = m.into();
    }
    if let Some(j) = &a.j {
        cfg.sweep.j = parse_j(j)?;
    }
    if let Some(n) = &a.n_bar {
        cfg.sweep.n_bar = n.clone();
    }
    if a.min_hz.is_some() || a.max_hz.is_some() || a.points.is_some() {
        let base = cfg.sweep.delta_omega_hz.unwrap_or_else(|| {
            let g = cfg.grid_hz();
            Grid { min: g[0], max: g[g.len() - 1], points: g.len() }
        });
        cfg.sweep.delta_omega_hz = Some(Grid {
            min: a.min_hz.unwrap_or(base.min),
            max: a.max_hz.unwrap_or(base.max),
            points: a.points.unwrap_or(base.points),
        });
    }
    if a.csv.is_some() {
        cfg.outputs.csv = a.csv.clone();
    }
    if a.svg.is_some() {
        cfg.outputs.svg = a.svg.clone();
    }
    if a.svg_y.is_some() {
        cfg.outputs.svg_y = a.svg_y.clone();
    }
    cfg.validate().map_err(config_failure)?;

    let rows = run_sweep(&cfg).map_err(classify)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        log::info!("{failed} of {} points carry no statistics", rows.len());
    }
    match &cfg.outputs.csv {
        Some(path) => emit_csv(&rows, path).map_err(classify)?,
        None => write_csv(&rows, std::io::stdout().lock()).map_err(classify)?,
    }
    if let Some(path) = &cfg.outputs.svg {
        let mut plot = PlotSpec::default();
        if let Some(y) = &cfg.outputs.svg_y {
            plot.y_column = y.clone();
        }
        emit_svg(&rows, &plot, path).map_err(classify)?;
    }
    Ok(())
}

fn steady(a: &SteadyArgs) -> Result<(), Failure> {
    let (cfg, n_bar, j) = point_setup(&a.point)?;
    let cv = cross_validate(&cfg, n_bar, j, a.point.delta_omega_hz, a.full).map_err(classify)?;
    print!("{cv}");
    Ok(())
}

/// Pair-thermal populations `∝ (n̄/(1+n̄))^m` on the sector levels.
fn thermal_pairs(n_bar: f64, levels: usize) -> Vec<f64> {
    let q = if n_bar > 0.0 { n_bar / (1.0 + n_bar) } else { 0.0 };
    (0..levels).map(|m| q.powi(m as i32)).collect()
}

fn simulate(a: &SimulateArgs) -> Result<(), Failure> {
    let (cfg, n_bar, j) = point_setup(&a.point)?;
    if !(a.t_final_s >= 0.0) || a.samples == 0 {
        return Err(config_failure("--t-final-s must be >= 0 and --samples >= 1"));
    }
    let p = cfg.model_params(n_bar, a.point.delta_omega_hz);
    let pt = resolve_point(&p, j, cfg.tolerances.resonance_hz).map_err(classify)?;
    let (p, r) = (&pt.params, &pt.rates);

    let (g, rho0) = match a.model {
        ModelArg::Reduced => {
            let g = build_reduced_generator(r, p, j, a.cutoff).map_err(classify)?;
            let pops = match a.initial {
                InitialArg::Vacuum => {
                    let mut v = vec![0.0; a.cutoff];
                    v[0] = 1.0;
                    v
                }
                InitialArg::Thermal => thermal_pairs(n_bar, a.cutoff),
            };
            let rho0 = DensityMatrix::diagonal(g.tag(), &pops).map_err(classify)?;
            (g, rho0)
        }
        ModelArg::Full => {
            let opts = FullModelOptions::new(a.cutoff).with_frame_shift(true);
            let g = build_full_generator(p, r, opts).map_err(classify)?;
            let levels = (a.cutoff - j.parity()).div_ceil(2);
            let pair = match a.initial {
                InitialArg::Vacuum => {
                    let mut v = vec![0.0; levels];
                    v[0] = 1.0;
                    v
                }
                InitialArg::Thermal => thermal_pairs(n_bar, levels),
            };
            // Qubit at its free inversion, oscillator on the sector of j.
            let excited = 0.5 * (1.0 + r.sz0);
            let mut pops = vec![0.0; 2 * a.cutoff];
            for (m, w) in pair.iter().enumerate() {
                let n = 2 * m + j.parity();
                pops[n] = excited * w;
                pops[a.cutoff + n] = (1.0 - excited) * w;
            }
            let rho0 = DensityMatrix::diagonal(g.tag(), &pops).map_err(classify)?;
            (g, rho0)
        }
    };
    let ops = ObservableSet::for_basis(g.tag()).map_err(classify)?;
    let times: Vec<f64> = (0..=a.samples).map(|k| a.t_final_s * k as f64 / a.samples as f64).collect();
    let traj = evolve_sampled(&g, &rho0, &times, EvolveOptions::new(a.tol)).map_err(classify)?;

    let mut out = open_output(a.csv.as_deref())?;
    let io = |e: std::io::Error| Failure { code: 1, msg: e.to_string() };
    writeln!(out, "t_s,n_mean,b2,g2,parity_even,parity_odd,trace_deviation").map_err(io)?;
    for e in &traj {
        let m = moments(&e.rho, &ops).map_err(classify)?;
        let (even, odd) = match e.rho.tag() {
            BasisTag::Su11Sector { .. } => (m.parity_even, m.parity_odd),
            _ => parity_masses(&e.rho),
        };
        let fields = [
            format_float(e.t),
            format_float(m.n_mean),
            format_float(m.b2),
            m.g2.map(format_float).unwrap_or_default(),
            format_float(even),
            format_float(odd),
            format_float(e.trace_deviation),
        ];
        writeln!(out, "{}", fields.join(",")).map_err(io)?;
    }
    out.flush().map_err(io)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Derive(a) => derive(a),
        Command::BathRates(a) => bath(a),
        Command::Sweep(a) => sweep(a),
        Command::Steady(a) => steady(a),
        Command::Simulate(a) => simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
