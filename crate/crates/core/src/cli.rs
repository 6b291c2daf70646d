//! Command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input (flags, files, parameters),
//! 3 numerical failure.

use std::f64::consts::TAU;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::disc_kernel::{assemble_kernel, DirectionGrid, DiscSpec, KernelError, Point};
use crate::esm::{
    combine_indicators, indicator_field, run_multilevel, Arc, EsmConfig, EsmError, IndicatorField, Reconstruction,
    SamplingGrid,
};
use crate::forward::{
    add_noise, synthesize, FarFieldData, ForwardError, ScattererSpec, DEFAULT_QUADRATURE, NOISE_GENERATOR,
};
use crate::io::{self, IoError};
use crate::regularization::{svd, RegConfig, RegError, DEFAULT_ALPHA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "esm",
    version,
    about = "Extended sampling method for acoustic inverse scattering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ShapeArg {
    Disc,
    Triangle,
    Kite,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesise far-field data for a sound-soft obstacle.
    Forward {
        #[arg(long, value_enum)]
        shape: ShapeArg,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        /// Incident directions in radians (repeat or separate with commas).
        #[arg(long = "dir", value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
        dirs: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Nyström quadrature nodes.
        #[arg(long, default_value_t = DEFAULT_QUADRATURE)]
        m: usize,
        /// Number of uniform observation directions.
        #[arg(long, default_value_t = 52)]
        obs: usize,
        /// Disc centre `x,y`.
        #[arg(long, allow_hyphen_values = true, default_value = "0,0")]
        center: String,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Indicator field and disc reconstruction for a fixed radius.
    Invert {
        /// Far-field files; indicators from several files are summed.
        #[arg(long = "data", required = true)]
        data: Vec<PathBuf>,
        #[arg(long = "R", default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = DEFAULT_ALPHA, conflicts_with = "morozov")]
        alpha: f64,
        /// Morozov's principle with this relative discrepancy (default: the file's noise level).
        #[arg(long, num_args = 0..=1, default_missing_value = "auto")]
        morozov: Option<String>,
        /// Sampling grid `min:max:step`, used for both axes.
        #[arg(long, allow_hyphen_values = true, default_value = "-10:10:0.1")]
        grid: String,
        /// Observation arc `start:width` in radians.
        #[arg(long, allow_hyphen_values = true)]
        aperture: Option<String>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Multilevel radius selection.
    Multilevel {
        #[arg(long = "data", required = true)]
        data: PathBuf,
        #[arg(long = "R0", default_value_t = 2.4)]
        r0: f64,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        /// Sampling bounds `min:max` for both axes.
        #[arg(long, allow_hyphen_values = true, default_value = "-10:10")]
        bounds: String,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare singular values of the disc operator with its Fourier-mode moduli.
    KernelCheck {
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long = "R", default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 52)]
        m: usize,
    },
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => EXIT_INVALID,
            Failure::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Invalid(m) => write!(f, "invalid input: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<RegError> for Failure {
    fn from(e: RegError) -> Self {
        match e {
            RegError::NonFinite | RegError::NoConvergence => Failure::Numerical(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<KernelError> for Failure {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::SpecFun(_) | KernelError::TruncationOverflow { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<ForwardError> for Failure {
    fn from(e: ForwardError) -> Self {
        match e {
            ForwardError::SingularSystem { .. } | ForwardError::SpecFun(_) => Failure::Numerical(e.to_string()),
            ForwardError::Kernel(k) => k.into(),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<EsmError> for Failure {
    fn from(e: EsmError) -> Self {
        match e {
            EsmError::Kernel(k) => k.into(),
            EsmError::Reg(r) => r.into(),
            EsmError::NonFinite(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

/// Parse `min:max:step`.
pub fn parse_grid(s: &str) -> Result<SamplingGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| format!("grid `{s}`: expected min:max:step"))?;
    match nums.as_slice() {
        &[lo, hi, h] => SamplingGrid::square(lo, hi, h).map_err(|e| format!("grid `{s}`: {e}")),
        _ => Err(format!("grid `{s}`: expected min:max:step")),
    }
}

fn parse_pair(s: &str, sep: char, what: &str) -> Result<(f64, f64), Failure> {
    let (a, b) = s
        .split_once(sep)
        .ok_or_else(|| invalid(format!("{what} `{s}`: expected two numbers separated by `{sep}`")))?;
    let p = |t: &str| t.trim().parse::<f64>().ok().filter(|v| v.is_finite());
    match (p(a), p(b)) {
        (Some(x), Some(y)) => Ok((x, y)),
        _ => Err(invalid(format!("{what} `{s}`: not a number"))),
    }
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, Failure> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(invalid("--threads must be at least 1"));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| invalid(e.to_string()))
}

fn create_dir(out: &Path) -> Result<(), Failure> {
    fs::create_dir_all(out).map_err(|e| invalid(format!("{}: {e}", out.display())))
}

#[allow(clippy::too_many_arguments)]
fn forward(
    shape: ShapeArg,
    k: f64,
    dirs: &[f64],
    noise: f64,
    seed: u64,
    m: usize,
    obs: usize,
    center: &str,
    radius: f64,
    out: &Path,
) -> Result<(), Failure> {
    if obs == 0 {
        return Err(invalid("--obs must be at least 1"));
    }
    let mut angles: Vec<f64> = dirs.iter().map(|a| a.rem_euclid(TAU)).collect();
    if angles.iter().any(|a| !a.is_finite()) {
        return Err(invalid("incident directions must be finite"));
    }
    angles.sort_by(f64::total_cmp);
    let incident = DirectionGrid::from_angles(angles)?;
    let spec = match shape {
        ShapeArg::Disc => {
            let (x, y) = parse_pair(center, ',', "--center")?;
            ScattererSpec::disc(Point::new(x, y), radius)?
        }
        ShapeArg::Triangle => ScattererSpec::triangle(),
        ShapeArg::Kite => ScattererSpec::kite(),
    };
    let clean = synthesize(&spec, k, &incident, &DirectionGrid::uniform(obs), m)?;
    let data = add_noise(&clean, noise, seed)?;
    let solver = match shape {
        ShapeArg::Disc => "analytic series".to_string(),
        _ => format!("nystrom m={m}"),
    };
    let comments = vec![
        format!("shape={shape:?} solver={solver}").to_lowercase(),
        "noise model: F*(1+noise*(u+iv)), u,v ~ U[-1,1] independent per entry".to_string(),
        format!("rng={NOISE_GENERATOR}"),
    ];
    io::write_farfield(out, &data, &comments)?;
    Ok(())
}

fn reg_config(morozov: Option<&str>, alpha: f64, data: &FarFieldData) -> Result<RegConfig, Failure> {
    match morozov {
        None => Ok(RegConfig::fixed(alpha)?),
        Some("auto") => {
            if data.noise_level <= 0.0 {
                return Err(invalid("data file records no noise level; pass --morozov <delta>"));
            }
            Ok(RegConfig::morozov(data.noise_level)?)
        }
        Some(v) => {
            let d: f64 = v
                .parse()
                .map_err(|_| invalid(format!("--morozov `{v}`: not a number")))?;
            Ok(RegConfig::morozov(d)?)
        }
    }
}

fn write_run(out: &Path, field: &IndicatorField, rec: &Reconstruction, extra: &[String]) -> Result<(), Failure> {
    io::write_indicator_grid(&out.join("indicator.txt"), field)?;
    io::write_text(&out.join("reconstruction.txt"), &io::format_reconstruction(rec, extra))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn invert(
    data_paths: &[PathBuf],
    radius: f64,
    alpha: f64,
    morozov: Option<&str>,
    grid: &str,
    aperture: Option<&str>,
    threads: Option<usize>,
    out: &Path,
) -> Result<String, Failure> {
    let grid = parse_grid(grid).map_err(Failure::Invalid)?;
    let arc = match aperture {
        Some(a) => {
            let (start, width) = parse_pair(a, ':', "--aperture")?;
            Arc::new(start, width)?
        }
        None => Arc::full(),
    };
    let datasets = data_paths
        .iter()
        .map(|p| io::read_farfield(p))
        .collect::<Result<Vec<_>, _>>()?;
    let pool = thread_pool(threads)?;

    let mut fields = Vec::new();
    let mut fallbacks = 0;
    for data in &datasets {
        let mut cfg = EsmConfig::new(DiscSpec::new(radius, data.k)?, grid.clone());
        cfg.reg = reg_config(morozov, alpha, data)?;
        cfg.aperture = arc;
        let field = pool.install(|| indicator_field(&cfg, data))?;
        fallbacks += field.fallbacks;
        fields.push(field);
    }
    let field = if fields.len() == 1 {
        fields.pop().unwrap()
    } else {
        combine_indicators(&fields)?
    };
    let rec = Reconstruction::from_field(&field, radius);

    let mut extra = vec![format!("argmin_index={}", field.argmin)];
    match morozov {
        None => extra.push(format!("alpha={alpha:e}")),
        Some(_) => extra.push(format!("alpha=morozov fallbacks={fallbacks}")),
    }
    create_dir(out)?;
    write_run(out, &field, &rec, &extra)?;
    Ok(io::summary_line(&rec))
}

fn multilevel(
    data: &Path,
    r0: f64,
    alpha: f64,
    bounds: &str,
    threads: Option<usize>,
    out: &Path,
) -> Result<String, Failure> {
    let (lo, hi) = parse_pair(bounds, ':', "--bounds")?;
    let data = io::read_farfield(data)?;
    let grid = SamplingGrid::square(lo, hi, r0 / 2.0)?;
    let mut cfg = EsmConfig::new(DiscSpec::new(r0, data.k)?, grid);
    cfg.reg = RegConfig::fixed(alpha)?;
    let pool = thread_pool(threads)?;
    let rec = pool.install(|| run_multilevel(r0, &cfg, &data))?;

    create_dir(out)?;
    io::write_text(
        &out.join("reconstruction.txt"),
        &io::format_reconstruction(&rec, &[format!("alpha={alpha:e}")]),
    )?;

    let mut table = String::from("level R h zstar Imin contained\n");
    for (j, l) in rec.level_history.iter().enumerate() {
        table += &format!(
            "{j} {} {} ({},{}) {:.6e} {}\n",
            io::tidy(l.radius),
            io::tidy(l.spacing),
            io::tidy(l.center.x),
            io::tidy(l.center.y),
            l.indicator_min,
            l.contained
        );
    }
    if rec.cap_reached {
        table += &format!("cap of {} levels reached without a stop\n", crate::esm::MAX_LEVEL);
    }
    table += &format!(
        "zstar=({},{}) R={}",
        io::tidy(rec.center.x),
        io::tidy(rec.center.y),
        io::tidy(rec.radius)
    );
    Ok(table)
}

fn kernel_check(k: f64, radius: f64, m: usize) -> Result<String, Failure> {
    if m == 0 {
        return Err(invalid("--m must be at least 1"));
    }
    let disc = DiscSpec::new(radius, k)?;
    let g = DirectionGrid::uniform(m);
    let a = assemble_kernel(&disc, Point::ORIGIN, &g, &g).entries * Complex64::new(TAU / m as f64, 0.0);
    let sigma = svd(&a)?.sigma;
    let mut gamma: Vec<(usize, f64)> = Vec::new();
    for n in 0..=disc.order() {
        let v = disc.fourier_eigenvalue(n).norm();
        gamma.push((n, v));
        if n > 0 {
            gamma.push((n, v));
        }
    }
    gamma.sort_by(|a, b| b.1.total_cmp(&a.1));

    let rows = 20.min(m).min(gamma.len());
    let mut s = format!("k={} R={} M={} N={}", io::tidy(k), io::tidy(radius), m, disc.order());
    if let Some((n, d)) = disc.near_eigenvalue() {
        s += &format!(" warning: kR within {d:.1e} of a zero of J_{n}");
    }
    s += "\n i  n  sigma                   |gamma_n|               diff\n";
    let mut worst = 0.0f64;
    for i in 0..rows {
        let diff = (sigma[i] - gamma[i].1).abs();
        worst = worst.max(diff);
        s += &format!(
            "{i:2} {:2}  {:.16e}  {:.16e}  {diff:.2e}\n",
            gamma[i].0, sigma[i], gamma[i].1
        );
    }
    s += &format!("max diff over top {rows}: {worst:.2e}");
    Ok(s)
}

fn dispatch(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Forward {
            shape,
            k,
            dirs,
            noise,
            seed,
            m,
            obs,
            center,
            radius,
            out,
        } => {
            forward(shape, k, &dirs, noise, seed, m, obs, &center, radius, &out)?;
            Ok(format!("wrote {}", out.display()))
        }
        Command::Invert {
            data,
            radius,
            alpha,
            morozov,
            grid,
            aperture,
            threads,
            out,
        } => invert(
            &data,
            radius,
            alpha,
            morozov.as_deref(),
            &grid,
            aperture.as_deref(),
            threads,
            &out,
        ),
        Command::Multilevel {
            data,
            r0,
            alpha,
            bounds,
            threads,
            out,
        } => multilevel(&data, r0, alpha, &bounds, threads, &out),
        Command::KernelCheck { k, radius, m } => kernel_check(k, radius, m),
    }
}

/// Run the CLI on `args` (including the program name) and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(msg) => {
            println!("{msg}");
            EXIT_OK
        }
        Err(f) => {
            eprintln!("esm: {f}");
            f.code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_flag() {
        let g = parse_grid("-10:10:0.1").unwrap();
        assert_eq!(g.len(), 40401);
        assert!(parse_grid("-10:10").is_err());
        assert!(parse_grid("a:b:c").is_err());
        assert!(parse_grid("0:1:-0.1").is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["esm", "invert", "--bogus"]), EXIT_INVALID);
        assert_eq!(run(["esm"]), EXIT_INVALID);
        assert_eq!(run(["esm", "--help"]), EXIT_OK);
    }
}
