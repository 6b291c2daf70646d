//! Text formats for far-field data and indicator grids, and PGM heatmaps.
//!
//! Far-field files (`esm-ff v1`):
//!
//! ```text
//! format=esm-ff v1
//! # free-form comments
//! k=1
//! noise=0.03
//! seed=42            (or `none`)
//! incident=0
//! obs=0,0.12083048667653051,...
//! 0 0 -1.2345678901234567e-1 4.5678901234567890e-1
//! ...
//! ```
//!
//! Data lines are `l j re im` with 0-based observation index `l` and incident
//! index `j`. Every pair must appear exactly once; order is free on input and
//! incident-major on output.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::disc_kernel::DirectionGrid;
use crate::esm::{EsmError, IndicatorField, Reconstruction, SamplingGrid};
use crate::forward::FarFieldData;

pub const FARFIELD_FORMAT: &str = "esm-ff v1";
pub const INDICATOR_FORMAT: &str = "esm-indicator v1";

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unsupported format `{found}`")]
    Version { line: usize, found: String },
    #[error("missing header field `{0}`")]
    MissingField(&'static str),
    #[error("{0}")]
    Dimension(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse { line, msg: msg.into() }
}

fn parse_f64(s: &str, line: usize, what: &str) -> Result<f64, IoError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("{what}: cannot parse `{s}` as a number")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("{what}: value `{s}` is not finite")));
    }
    Ok(v)
}

fn parse_usize(s: &str, line: usize, what: &str) -> Result<usize, IoError> {
    s.trim()
        .parse()
        .map_err(|_| parse_err(line, format!("{what}: cannot parse `{s}` as an index")))
}

fn join_angles(grid: &DirectionGrid) -> String {
    grid.angles()
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_angles(s: &str, line: usize, what: &str) -> Result<DirectionGrid, IoError> {
    let angles = s
        .split(',')
        .map(|a| parse_f64(a, line, what))
        .collect::<Result<Vec<_>, _>>()?;
    DirectionGrid::from_angles(angles).map_err(|e| parse_err(line, format!("{what}: {e}")))
}

/// Serialise far-field data; `comments` become `#` lines after the format line.
pub fn format_farfield(data: &FarFieldData, comments: &[String]) -> String {
    let mut s = String::new();
    writeln!(s, "format={FARFIELD_FORMAT}").unwrap();
    for c in comments {
        for line in c.lines() {
            writeln!(s, "# {line}").unwrap();
        }
    }
    writeln!(s, "k={}", data.k).unwrap();
    writeln!(s, "noise={}", data.noise_level).unwrap();
    match data.seed {
        Some(seed) => writeln!(s, "seed={seed}").unwrap(),
        None => writeln!(s, "seed=none").unwrap(),
    }
    writeln!(s, "incident={}", join_angles(&data.incident)).unwrap();
    writeln!(s, "obs={}", join_angles(&data.obs)).unwrap();
    for j in 0..data.values.ncols() {
        for l in 0..data.values.nrows() {
            let v = data.values[(l, j)];
            writeln!(s, "{l} {j} {:.16e} {:.16e}", v.re, v.im).unwrap();
        }
    }
    s
}

pub fn write_farfield(path: &Path, data: &FarFieldData, comments: &[String]) -> Result<(), IoError> {
    fs::write(path, format_farfield(data, comments)).map_err(io_err(path))
}

pub fn parse_farfield(text: &str) -> Result<FarFieldData, IoError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (first, fmt) = lines.next().ok_or(IoError::MissingField("format"))?;
    match fmt.strip_prefix("format=") {
        Some(v) if v.trim() == FARFIELD_FORMAT => {}
        Some(v) => {
            return Err(IoError::Version {
                line: first,
                found: v.trim().to_string(),
            })
        }
        None => return Err(parse_err(first, "expected `format=esm-ff v1` as the first line")),
    }

    let mut k = None;
    let mut noise = None;
    let mut seed: Option<Option<u64>> = None;
    let mut incident = None;
    let mut obs = None;
    let mut entries: Vec<(usize, usize, usize, Complex64)> = Vec::new();

    for (line, text) in lines {
        if let Some((key, value)) = text.split_once('=') {
            if !entries.is_empty() {
                return Err(parse_err(line, "header field after data lines"));
            }
            let value = value.trim();
            match key.trim() {
                "k" => k = Some(parse_f64(value, line, "k")?),
                "noise" => noise = Some(parse_f64(value, line, "noise")?),
                "seed" => {
                    seed = Some(if value == "none" {
                        None
                    } else {
                        Some(
                            value
                                .parse()
                                .map_err(|_| parse_err(line, format!("seed: cannot parse `{value}`")))?,
                        )
                    })
                }
                "incident" => incident = Some(parse_angles(value, line, "incident")?),
                "obs" => obs = Some(parse_angles(value, line, "obs")?),
                "format" => return Err(parse_err(line, "repeated format line")),
                other => return Err(parse_err(line, format!("unknown header field `{other}`"))),
            }
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(parse_err(
                line,
                format!("expected `l j re im`, found {} fields", fields.len()),
            ));
        }
        let l = parse_usize(fields[0], line, "l")?;
        let j = parse_usize(fields[1], line, "j")?;
        let re = parse_f64(fields[2], line, "re")?;
        let im = parse_f64(fields[3], line, "im")?;
        entries.push((line, l, j, Complex64::new(re, im)));
    }

    let k = k.ok_or(IoError::MissingField("k"))?;
    let noise = noise.ok_or(IoError::MissingField("noise"))?;
    let seed = seed.ok_or(IoError::MissingField("seed"))?;
    let incident = incident.ok_or(IoError::MissingField("incident"))?;
    let obs = obs.ok_or(IoError::MissingField("obs"))?;

    let (m, n) = (obs.len(), incident.len());
    let mut values = DMatrix::zeros(m, n);
    let mut seen = vec![false; m * n];
    for &(line, l, j, v) in &entries {
        if l >= m || j >= n {
            return Err(parse_err(line, format!("index ({l}, {j}) outside {m}×{n}")));
        }
        if std::mem::replace(&mut seen[j * m + l], true) {
            return Err(parse_err(line, format!("duplicate entry ({l}, {j})")));
        }
        values[(l, j)] = v;
    }
    if entries.len() != m * n {
        return Err(IoError::Dimension(format!(
            "expected {} data lines, found {}",
            m * n,
            entries.len()
        )));
    }
    FarFieldData::new(k, incident, obs, values, noise, seed).map_err(|e| IoError::Dimension(e.to_string()))
}

pub fn read_farfield(path: &Path) -> Result<FarFieldData, IoError> {
    parse_farfield(&fs::read_to_string(path).map_err(io_err(path))?)
}

/// Indicator grid as text: header, then `x y I` rows in row-major order.
pub fn format_indicator_grid(field: &IndicatorField) -> String {
    let g = &field.grid;
    let (x0, x1, y0, y1) = g.bounds();
    let p = field.argmin_point();
    let mut s = String::new();
    writeln!(s, "format={INDICATOR_FORMAT}").unwrap();
    writeln!(s, "x_min={x0}\nx_max={x1}\ny_min={y0}\ny_max={y1}\nh={}", g.spacing()).unwrap();
    writeln!(s, "nx={}\nny={}", g.nx(), g.ny()).unwrap();
    writeln!(s, "argmin={} {:.16e} {:.16e}", field.argmin, p.x, p.y).unwrap();
    for (i, v) in field.normalized.iter().enumerate() {
        let z = g.point(i);
        writeln!(s, "{:.16e} {:.16e} {:.16e}", z.x, z.y, v).unwrap();
    }
    s
}

/// 8-bit P5 image, pixel `255·(1 − I)`, top row at `y_max`.
pub fn indicator_pgm(field: &IndicatorField) -> Vec<u8> {
    let g = &field.grid;
    let mut out = format!("P5\n{} {}\n255\n", g.nx(), g.ny()).into_bytes();
    for n in (0..g.ny()).rev() {
        for m in 0..g.nx() {
            let v = field.normalized[n * g.nx() + m];
            out.push((255.0 * (1.0 - v)).round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}

/// Sidecar path of a grid file: same name with extension `pgm`.
pub fn pgm_path(path: &Path) -> PathBuf {
    path.with_extension("pgm")
}

/// Write the grid text file and its PGM sidecar.
pub fn write_indicator_grid(path: &Path, field: &IndicatorField) -> Result<(), IoError> {
    fs::write(path, format_indicator_grid(field)).map_err(io_err(path))?;
    let pgm = pgm_path(path);
    let mut f = fs::File::create(&pgm).map_err(io_err(&pgm))?;
    f.write_all(&indicator_pgm(field)).map_err(io_err(&pgm))
}

/// Contents of an indicator grid file.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorGrid {
    pub grid: SamplingGrid,
    pub argmin: usize,
    pub values: Vec<f64>,
}

pub fn parse_indicator_grid(text: &str) -> Result<IndicatorGrid, IoError> {
    let mut header = std::collections::HashMap::new();
    let mut rows = Vec::new();
    let mut format_seen = false;
    for (i, raw) in text.lines().enumerate() {
        let (line, t) = (i + 1, raw.trim());
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if let Some((key, value)) = t.split_once('=') {
            if key == "format" {
                if value != INDICATOR_FORMAT {
                    return Err(IoError::Version {
                        line,
                        found: value.to_string(),
                    });
                }
                format_seen = true;
            } else {
                header.insert(key.to_string(), (line, value.to_string()));
            }
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(line, format!("expected `x y I`, found {} fields", f.len())));
        }
        rows.push(parse_f64(f[2], line, "I")?);
    }
    if !format_seen {
        return Err(IoError::MissingField("format"));
    }
    let num = |key: &'static str| -> Result<f64, IoError> {
        let (line, v) = header.get(key).ok_or(IoError::MissingField(key))?;
        parse_f64(v, *line, key)
    };
    let grid = SamplingGrid::new(num("x_min")?, num("x_max")?, num("y_min")?, num("y_max")?, num("h")?)
        .map_err(|e: EsmError| IoError::Dimension(e.to_string()))?;
    let (line, argmin) = header.get("argmin").ok_or(IoError::MissingField("argmin"))?;
    let argmin = parse_usize(argmin.split_whitespace().next().unwrap_or(""), *line, "argmin")?;
    if rows.len() != grid.len() {
        return Err(IoError::Dimension(format!(
            "expected {} rows, found {}",
            grid.len(),
            rows.len()
        )));
    }
    Ok(IndicatorGrid {
        grid,
        argmin,
        values: rows,
    })
}

pub fn read_indicator_grid(path: &Path) -> Result<IndicatorGrid, IoError> {
    parse_indicator_grid(&fs::read_to_string(path).map_err(io_err(path))?)
}

/// Round to 12 significant digits and print the shortest form, so grid
/// coordinates like `2.9000000000000004` read as `2.9`.
pub fn tidy(v: f64) -> String {
    let r: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    if r == 0.0 {
        "0".into()
    } else {
        r.to_string()
    }
}

/// One-line summary `zstar=(x,y) R=r Imin=v`.
pub fn summary_line(rec: &Reconstruction) -> String {
    format!(
        "zstar=({},{}) R={} Imin={:.6e}",
        tidy(rec.center.x),
        tidy(rec.center.y),
        tidy(rec.radius),
        rec.indicator_min
    )
}

/// Reconstruction record with the multilevel history, one level per line.
pub fn format_reconstruction(rec: &Reconstruction, extra: &[String]) -> String {
    let mut s = String::new();
    writeln!(s, "{}", summary_line(rec)).unwrap();
    for e in extra {
        writeln!(s, "{e}").unwrap();
    }
    if rec.level_history.len() > 1 {
        writeln!(s, "cap_reached={}", rec.cap_reached).unwrap();
        for (j, l) in rec.level_history.iter().enumerate() {
            writeln!(
                s,
                "level={j} R={} h={} zstar=({},{}) Imin={:.6e} contained={}",
                tidy(l.radius),
                tidy(l.spacing),
                tidy(l.center.x),
                tidy(l.center.y),
                l.indicator_min,
                l.contained
            )
            .unwrap();
        }
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FarFieldData {
        let obs = DirectionGrid::uniform(3);
        let values = DMatrix::from_fn(3, 2, |l, j| Complex64::new(l as f64 + 0.1, -(j as f64) / 3.0));
        FarFieldData::new(
            1.5,
            DirectionGrid::from_angles(vec![0.0, 2.0]).unwrap(),
            obs,
            values,
            0.03,
            Some(7),
        )
        .unwrap()
    }

    #[test]
    fn farfield_round_trip() {
        let d = sample();
        let text = format_farfield(&d, &["rng=chacha20".into()]);
        assert_eq!(parse_farfield(&text).unwrap(), d);
        assert_eq!(text.lines().filter(|l| l.split_whitespace().count() == 4).count(), 6);
        let mut none = d.clone();
        none.seed = None;
        assert_eq!(parse_farfield(&format_farfield(&none, &[])).unwrap().seed, None);
    }

    #[test]
    fn farfield_errors_name_the_problem() {
        let text = format_farfield(&sample(), &[]);
        let no_k: String = text
            .lines()
            .filter(|l| !l.starts_with("k="))
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(parse_farfield(&no_k), Err(IoError::MissingField("k"))));
        let v2 = text.replace("esm-ff v1", "esm-ff v2");
        assert!(matches!(parse_farfield(&v2), Err(IoError::Version { line: 1, .. })));
        let short: String = text
            .lines()
            .take(text.lines().count() - 1)
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(parse_farfield(&short), Err(IoError::Dimension(_))));
        let bad = text.replace("0 1 ", "0 9 ");
        match parse_farfield(&bad) {
            Err(IoError::Parse { line, .. }) => assert!(line > 6),
            other => panic!("{other:?}"),
        }
        let dup = format!("{text}0 0 1 1\n");
        assert!(matches!(parse_farfield(&dup), Err(IoError::Parse { .. })));
    }

    #[test]
    fn tidy_numbers() {
        assert_eq!(tidy(2.9000000000000004), "2.9");
        assert_eq!(tidy(1.0), "1");
        assert_eq!(tidy(2.4 / 4.0), "0.6");
        assert_eq!(tidy(-0.0), "0");
        assert_eq!(tidy(-9.999999999999998), "-10");
    }
}
