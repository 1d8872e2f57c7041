mod output;
mod repro;

use clap::{Parser, Subcommand, ValueEnum};
use hydrodetect::flow::{classify_stealth, forward_grid, ForwardModel};
use hydrodetect::inverse::{
    detect_c147, detect_ellipse, detect_quarter_full, model_residual, recover_velocity, DetectionResult,
    EllipseOptions, Resolved,
};
use hydrodetect::io::{parse_timeseries, ConfigFile, MeasurementFile, PoseFile, ShapeFile};
use hydrodetect::spectral::{
    geometry_coeffs, moments_closed_form, reexpand, ContourProvider, MomentProvider, MomentTable, SearchBox,
    TransportProvider,
};
use hydrodetect::track::{track, TrackOptions};
use hydrodetect::{Complex64, Configuration, Exec, Position, RigidVelocity, ShapeSpec};
use output::{csv, json, RunManifest, Sink};
use serde::de::DeserializeOwned;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Numerical(String),
}

impl Failure {
    pub fn input(msg: impl Into<String>) -> Self {
        Failure::Input(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl From<hydrodetect::Error> for Failure {
    fn from(e: hydrodetect::Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

type Outcome = Result<(), Failure>;

#[derive(Parser)]
#[command(name = "hydrodetect", version)]
#[command(about = "Potential flow around a moving rigid solid and detection of its position and velocity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Potential and fluid velocity over a rectangular grid, as CSV
    Forward {
        #[arg(long)]
        shape: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// x range as `min,max`
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "-4,4")]
        x: (f64, f64),
        /// y range as `min,max`
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "-4,4")]
        y: (f64, f64),
        #[arg(long, default_value_t = 81)]
        nx: usize,
        #[arg(long, default_value_t = 81)]
        ny: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Moment table `{"nu", "lambdas"}` of a configuration or of `i/z^k`
    Coeffs {
        #[arg(long, requires = "config", conflicts_with = "potential")]
        shape: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Named analytic potential, `i/z^k`
        #[arg(long, required_unless_present = "shape")]
        potential: Option<String>,
        /// Expansion point `re,im`
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0,0")]
        nu: Complex64,
        /// Number of moments
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Route::Closed)]
        route: Route,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover position and velocity from measured moments
    Detect {
        #[arg(long)]
        shape: PathBuf,
        /// One table or an array of tables
        #[arg(long)]
        measurement: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        /// Known position `re,im,alpha` for velocity-only
        #[arg(long, value_parser = parse_position, allow_hyphen_values = true)]
        position: Option<Position>,
        /// Centre search box for the ellipse, `xmin,ymin,xmax,ymax`
        #[arg(long, value_parser = parse_box, allow_hyphen_values = true, default_value = "-4,-4,4,4")]
        search: SearchBox,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the pose from a time series of moment tables
    Track {
        #[arg(long)]
        shape: PathBuf,
        /// Initial pose `{"alpha", "r"}`
        #[arg(long)]
        initial: PathBuf,
        /// JSON lines, one table with a "t" field per line
        #[arg(long)]
        measurements: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long)]
        until: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Family of distinct solids sharing the potential i/z^n
    Counterexample {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        omega: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long, allow_hyphen_values = true)]
        level: f64,
        #[arg(long, default_value_t = 512)]
        resolution: usize,
        #[arg(long, default_value = "counterexample")]
        out_dir: PathBuf,
    },
    /// Classify a motion that leaves the fluid at rest
    Stealth {
        #[arg(long)]
        shape: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        omega: f64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        w0: Complex64,
    },
    /// Regenerate a named figure or demonstration
    Repro {
        #[arg(value_enum)]
        artifact: repro::Artifact,
        #[arg(long, default_value = "repro")]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Route {
    Closed,
    Contour,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Auto,
    Ellipse,
    Symmetric,
    C147,
    VelocityOnly,
}

fn parse_floats(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != n || !v.iter().all(|x| x.is_finite()) {
        return Err(format!("expected {n} finite comma-separated numbers"));
    }
    Ok(v)
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let v = parse_floats(s, 2)?;
    Ok((v[0], v[1]))
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let v = parse_floats(s, 2)?;
    Ok(Complex64::new(v[0], v[1]))
}

fn parse_position(s: &str) -> Result<Position, String> {
    let v = parse_floats(s, 3)?;
    Ok(Position::new(v[2], Complex64::new(v[0], v[1])))
}

fn parse_box(s: &str) -> Result<SearchBox, String> {
    let v = parse_floats(s, 4)?;
    SearchBox::new(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])).map_err(|e| e.to_string())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn read_shape(path: &Path) -> Result<ShapeSpec, Failure> {
    Ok(ShapeSpec::try_from(read_json::<ShapeFile>(path)?)?)
}

fn read_config(path: &Path) -> Result<Configuration, Failure> {
    Ok(Configuration::try_from(read_json::<ConfigFile>(path)?)?)
}

fn linspace((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn forward(shape: &Path, config: &Path, x: (f64, f64), y: (f64, f64), nx: usize, ny: usize, out: Option<PathBuf>) -> Outcome {
    let s = read_shape(shape)?;
    let cfg = read_config(config)?;
    if nx == 0 || ny == 0 || nx * ny > 25_000_000 {
        return Err(Failure::input("grid must have between 1 and 25e6 cells"));
    }
    if !(x.0 < x.1 && y.0 < y.1) {
        return Err(Failure::input("ranges must be increasing"));
    }
    let model = ForwardModel::new(&s, &cfg);
    let samples = forward_grid(&model, &linspace(x, nx), &linspace(y, ny), Exec::default());
    let rows = samples.into_iter().map(|(x, y, v)| {
        let (xi, u) = v.unwrap_or((Complex64::new(f64::NAN, f64::NAN), Complex64::new(f64::NAN, f64::NAN)));
        vec![x, y, xi.re, xi.im, u.re, u.im]
    });
    let mut m = RunManifest::new("forward");
    m.input(shape).input(config).param("x", x).param("y", y).param("nx", nx).param("ny", ny);
    let mut sink = Sink::new(m);
    sink.emit(out.as_deref(), csv(&["x", "y", "re_xi", "im_xi", "re_u", "im_u"], rows));
    sink.finish()
}

/// Parses `i/z^k`.
fn inverse_power(name: &str) -> Result<usize, Failure> {
    name.replace(' ', "")
        .strip_prefix("i/z^")
        .and_then(|k| k.parse::<usize>().ok())
        .filter(|&k| k >= 1)
        .ok_or_else(|| Failure::input(format!("unknown potential {name:?}; expected i/z^k with k ≥ 1")))
}

#[allow(clippy::too_many_arguments)]
fn coeffs(
    shape: Option<PathBuf>,
    config: Option<PathBuf>,
    potential: Option<String>,
    nu: Complex64,
    n: usize,
    route: Route,
    out: Option<PathBuf>,
) -> Outcome {
    if n == 0 {
        return Err(Failure::input("n must be at least 1"));
    }
    let mut m = RunManifest::new("coeffs");
    m.param("nu", nu).param("n", n);
    let table = match (shape, config, potential) {
        (Some(sp), Some(cp), _) => {
            let s = read_shape(&sp)?;
            let cfg = read_config(&cp)?;
            m.input(&sp).input(&cp);
            match route {
                Route::Closed => {
                    m.param("route", "closed");
                    moments_closed_form(&s, &cfg, nu, n)?
                }
                Route::Contour => {
                    m.param("route", "contour");
                    ContourProvider::from_model(ForwardModel::new(&s, &cfg), n).moments(nu)?
                }
            }
        }
        (_, _, Some(name)) => {
            let k = inverse_power(&name)?;
            m.param("potential", &name);
            // i/z^k has the single moment λ_k(0) = i
            let mut at_origin = vec![Complex64::new(0.0, 0.0); n.max(k)];
            at_origin[k - 1] = Complex64::new(0.0, 1.0);
            let mut lambdas = reexpand(&at_origin, Complex64::new(0.0, 0.0), nu);
            lambdas.truncate(n);
            MomentTable { nu, lambdas }
        }
        _ => return Err(Failure::input("give --shape with --config, or --potential")),
    };
    let mut sink = Sink::new(m);
    sink.emit(out.as_deref(), json(&table));
    sink.finish()
}

fn is_c147(s: &ShapeSpec) -> bool {
    let tail = s.tail();
    tail.len() == 7
        && tail
            .iter()
            .enumerate()
            .all(|(j, v)| (j == 3 || j == 6) == (v.norm() != 0.0))
}

/// Semi-axes of an ellipse in canonical orientation: real `c₁ > c₋₁ > 0`.
fn ellipse_axes(s: &ShapeSpec) -> Option<(f64, f64)> {
    let (c1, cm1) = (s.c1(), s.coeff(-1));
    (s.tail().len() == 1 && c1.im == 0.0 && cm1.im == 0.0 && cm1.re > 0.0 && c1.re > cm1.re)
        .then_some((c1.re + cm1.re, c1.re - cm1.re))
}

fn pick_method(s: &ShapeSpec) -> Result<Method, Failure> {
    if ellipse_axes(s).is_some() {
        Ok(Method::Ellipse)
    } else if is_c147(s) {
        Ok(Method::C147)
    } else if !s.tail().is_empty() && s.symmetry_order().is_multiple_of(4) {
        Ok(Method::Symmetric)
    } else {
        Err(Failure::input(
            "no detector applies to this shape; use --method velocity-only with --position",
        ))
    }
}

fn velocity_only(s: &ShapeSpec, pos: &Position, table: &MomentTable) -> Result<DetectionResult, Failure> {
    let fit = recover_velocity(&geometry_coeffs(s, table.len())?, pos, table)?;
    let cfg = Configuration {
        position: *pos,
        velocity: fit.velocity,
    };
    Ok(DetectionResult {
        method: "velocity-only".into(),
        configurations: vec![cfg],
        resolved: Resolved {
            r: true,
            alpha_mod: Some(1),
            w_world: true,
            omega_abs_only: false,
        },
        residual: fit.residual,
        phase_defect: 0.0,
        partial: false,
        candidates: Vec::new(),
    })
}

fn detect(
    shape: &Path,
    measurement: &Path,
    method: Method,
    position: Option<Position>,
    search: SearchBox,
    out: Option<PathBuf>,
) -> Outcome {
    let s = read_shape(shape)?;
    let tables = read_json::<MeasurementFile>(measurement)?.into_tables()?;
    if method == Method::VelocityOnly && position.is_none() {
        return Err(Failure::input("--method velocity-only needs --position re,im,alpha"));
    }
    let method = if method == Method::Auto { pick_method(&s)? } else { method };
    let first = &tables[0];
    let provider = TransportProvider::new(first.clone())?;
    let mut result = match method {
        Method::Ellipse => {
            let (a, b) = ellipse_axes(&s).ok_or_else(|| {
                Failure::input("ellipse detection needs one tail coefficient with real c₁ > c₋₁ > 0")
            })?;
            detect_ellipse(a, b, &provider, &EllipseOptions::new(search))?
        }
        Method::Symmetric => detect_quarter_full(&s, &provider, first.nu)?,
        Method::C147 => detect_c147(&s, &provider, first.nu)?,
        Method::VelocityOnly => velocity_only(&s, position.as_ref().expect("checked above"), first)?,
        Method::Auto => unreachable!("resolved above"),
    };
    // the remaining tables cross-check the solution
    if !result.partial {
        for t in &tables[1..] {
            let geom = geometry_coeffs(&s, t.len())?;
            result.residual = result.residual.max(model_residual(&geom, &result.configurations[0], t));
        }
    }
    let mut m = RunManifest::new("detect");
    m.input(shape).input(measurement).param("method", &result.method).param("tables", tables.len());
    if let Some(p) = position {
        m.param("position", p);
    }
    let mut sink = Sink::new(m);
    sink.emit(out.as_deref(), json(&result));
    sink.finish()
}

fn track_cmd(
    shape: &Path,
    initial: &Path,
    measurements: &Path,
    step: f64,
    until: Option<f64>,
    out: Option<PathBuf>,
) -> Outcome {
    let s = read_shape(shape)?;
    let pose = Position::try_from(read_json::<PoseFile>(initial)?)?;
    let text = std::fs::read_to_string(measurements)
        .map_err(|e| Failure::input(format!("{}: {e}", measurements.display())))?;
    let data = parse_timeseries(&text)?;
    let tr = track(&s, pose, &data, &TrackOptions { step, until })?;
    let rows = tr.times.iter().zip(&tr.poses).zip(&tr.velocities).map(|((t, p), v)| {
        let w = v.world(p.alpha);
        vec![*t, p.r.re, p.r.im, p.alpha, w.re, w.im, v.omega]
    });
    let mut m = RunManifest::new("track");
    m.input(shape).input(initial).input(measurements).param("step", step).param("until", until);
    let mut sink = Sink::new(m);
    sink.emit(
        out.as_deref(),
        csv(&["t", "re_r", "im_r", "alpha", "re_w_world", "im_w_world", "omega"], rows),
    );
    sink.finish()
}

fn stealth(shape: &Path, omega: f64, w0: Complex64) -> Outcome {
    let s = read_shape(shape)?;
    if !omega.is_finite() {
        return Err(Failure::input("omega must be finite"));
    }
    let verdict = classify_stealth(&s, &RigidVelocity::new(omega, w0))?;
    println!("{verdict:?}");
    Ok(())
}

fn configure_threads() -> Outcome {
    let Ok(v) = std::env::var("HYDRODETECT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Failure::input(format!("HYDRODETECT_THREADS={v:?} is not a positive integer")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Numerical(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    configure_threads()?;
    match cli.command {
        Command::Forward { shape, config, x, y, nx, ny, out } => forward(&shape, &config, x, y, nx, ny, out),
        Command::Coeffs {
            shape,
            config,
            potential,
            nu,
            n,
            route,
            out,
        } => coeffs(shape, config, potential, nu, n, route, out),
        Command::Detect {
            shape,
            measurement,
            method,
            position,
            search,
            out,
        } => detect(&shape, &measurement, method, position, search, out),
        Command::Track {
            shape,
            initial,
            measurements,
            step,
            until,
            out,
        } => track_cmd(&shape, &initial, &measurements, step, until, out),
        Command::Counterexample {
            n,
            omega,
            rho,
            level,
            resolution,
            out_dir,
        } => repro::counterexample(n, omega, rho, level, resolution, &out_dir, "counterexample"),
        Command::Stealth { shape, omega, w0 } => stealth(&shape, omega, w0),
        Command::Repro { artifact, out_dir } => repro::run(artifact, &out_dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hydrodetect: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
