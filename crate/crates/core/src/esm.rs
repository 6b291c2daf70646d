//! Sampling-disc indicator, single and multilevel reconstruction, and the
//! limited-aperture and multi-direction variants.
//!
//! For every probe point `z` the far-field equation of the sound-soft disc
//! `B_z` is solved with Tikhonov regularisation and `‖g_z‖` is recorded.
//! Because `A^z = A^0 diag(e^{ikz·d_j})` with a unitary diagonal factor, one
//! SVD of `A^0` serves the whole grid: only the right-hand side is modulated.

use std::f64::consts::TAU;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::disc_kernel::{assemble_kernel, modulate_rhs, DirectionGrid, DiscSpec, KernelError, KernelMatrix, Point};
use crate::forward::FarFieldData;
use crate::regularization::{solution_norm, svd, tikhonov_solve, RegConfig, RegError, SvdFactors};

/// Upper bound on the refinement level `j` of the multilevel loop.
pub const MAX_LEVEL: usize = 6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EsmError {
    #[error("invalid sampling grid: {0}")]
    BadGrid(String),
    #[error("sampling disc wavenumber {disc} differs from data wavenumber {data}")]
    WavenumberMismatch { disc: f64, data: f64 },
    #[error("observation arc {start}..{start}+{width} contains no data directions")]
    EmptyAperture { start: f64, width: f64 },
    #[error("invalid observation arc: {0}")]
    BadAperture(String),
    #[error("indicator fields live on different grids")]
    GridMismatch,
    #[error("no indicator fields to combine")]
    NothingToCombine,
    #[error("incident index {index} out of range for {available} directions")]
    BadIncident { index: usize, available: usize },
    #[error("initial radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("indicator is not finite at grid point {0}")]
    NonFinite(usize),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Reg(#[from] RegError),
}

/// Rectangular lattice `z_{mn} = (x_min + m h, y_min + n h)`, stored row-major
/// (index `n·nx + m`).
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingGrid {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    h: f64,
    nx: usize,
    ny: usize,
}

fn steps(lo: f64, hi: f64, h: f64) -> usize {
    // a relative slack absorbs representation error in spans like 20/0.1
    ((hi - lo) / h * (1.0 + 1e-12)).floor() as usize + 1
}

impl SamplingGrid {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, h: f64) -> Result<Self, EsmError> {
        let all = [x_min, x_max, y_min, y_max, h];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(EsmError::BadGrid("non-finite bound or spacing".into()));
        }
        if h <= 0.0 {
            return Err(EsmError::BadGrid(format!("spacing must be positive, got {h}")));
        }
        if x_max < x_min || y_max < y_min {
            return Err(EsmError::BadGrid("upper bound below lower bound".into()));
        }
        let (nx, ny) = (steps(x_min, x_max, h), steps(y_min, y_max, h));
        if nx.saturating_mul(ny) > 50_000_000 {
            return Err(EsmError::BadGrid(format!("{nx}×{ny} points is too many")));
        }
        Ok(SamplingGrid {
            x_min,
            x_max,
            y_min,
            y_max,
            h,
            nx,
            ny,
        })
    }

    /// `[min, max]²` with spacing `h`.
    pub fn square(min: f64, max: f64, h: f64) -> Result<Self, EsmError> {
        Self::new(min, max, min, max, h)
    }

    /// Same bounds, new spacing.
    pub fn with_spacing(&self, h: f64) -> Result<Self, EsmError> {
        Self::new(self.x_min, self.x_max, self.y_min, self.y_max, h)
    }

    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        (self.x_min, self.x_max, self.y_min, self.y_max)
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, idx: usize) -> Point {
        let (n, m) = (idx / self.nx, idx % self.nx);
        Point::new(self.x_min + m as f64 * self.h, self.y_min + n as f64 * self.h)
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

/// Observation arc `{φ : (φ − start) mod 2π < width}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub start: f64,
    pub width: f64,
}

impl Arc {
    pub fn new(start: f64, width: f64) -> Result<Self, EsmError> {
        if !(start.is_finite() && width > 0.0 && width <= TAU) {
            return Err(EsmError::BadAperture(format!("start {start}, width {width}")));
        }
        Ok(Arc {
            start: start.rem_euclid(TAU),
            width,
        })
    }

    pub fn full() -> Self {
        Arc { start: 0.0, width: TAU }
    }

    pub fn contains(&self, angle: f64) -> bool {
        self.width >= TAU || (angle - self.start).rem_euclid(TAU) < self.width
    }
}

/// Keep only the observation directions inside `arc`.
pub fn restrict_aperture(data: &FarFieldData, arc: Arc) -> Result<FarFieldData, EsmError> {
    let keep: Vec<usize> = (0..data.obs.len())
        .filter(|&l| arc.contains(data.obs.angles()[l]))
        .collect();
    if keep.is_empty() {
        return Err(EsmError::EmptyAperture {
            start: arc.start,
            width: arc.width,
        });
    }
    let obs = DirectionGrid::from_angles(keep.iter().map(|&l| data.obs.angles()[l]).collect())?;
    let values = data.values.select_rows(keep.iter());
    Ok(FarFieldData {
        obs,
        values,
        ..data.clone()
    })
}

/// Everything fixed for one indicator sweep.
#[derive(Debug, Clone)]
pub struct EsmConfig {
    pub disc: DiscSpec,
    pub grid: SamplingGrid,
    pub reg: RegConfig,
    pub aperture: Arc,
    /// Size of the uniform density grid (kernel columns); defaults to the
    /// number of observation directions in the unrestricted data.
    pub density_size: Option<usize>,
}

impl EsmConfig {
    pub fn new(disc: DiscSpec, grid: SamplingGrid) -> Self {
        EsmConfig {
            disc,
            grid,
            reg: RegConfig::default(),
            aperture: Arc::full(),
            density_size: None,
        }
    }
}

/// `A^0` on the data's observation directions with its SVD.
#[derive(Debug, Clone)]
pub struct SamplingOperator {
    pub kernel: KernelMatrix,
    pub factors: SvdFactors,
    pub obs: DirectionGrid,
    pub density: DirectionGrid,
}

impl SamplingOperator {
    pub fn new(disc: &DiscSpec, obs: &DirectionGrid, density: &DirectionGrid) -> Result<Self, EsmError> {
        let kernel = assemble_kernel(disc, Point::ORIGIN, obs, density);
        let factors = svd(&kernel.entries)?;
        Ok(SamplingOperator {
            kernel,
            factors,
            obs: obs.clone(),
            density: density.clone(),
        })
    }

    pub fn k(&self) -> f64 {
        self.kernel.disc.k()
    }
}

/// Result of one regularised solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValue {
    pub raw: f64,
    pub alpha: f64,
    pub fell_back: bool,
}

/// `‖g_z‖` for one far-field column, through the shared SVD of `A^0`.
pub fn indicator_at(
    op: &SamplingOperator,
    reg: &RegConfig,
    z: Point,
    far_field: &DVector<Complex64>,
) -> Result<PointValue, EsmError> {
    let b = modulate_rhs(op.k(), z, &op.obs, far_field)?;
    let choice = reg.choose(&op.factors, &b)?;
    let beta = op.factors.project(&b)?;
    Ok(PointValue {
        raw: solution_norm(&op.factors.sigma, &beta, choice.alpha),
        alpha: choice.alpha,
        fell_back: choice.fell_back,
    })
}

/// Same quantity by assembling and factorising `A^z` directly.
pub fn indicator_at_direct(
    disc: &DiscSpec,
    reg: &RegConfig,
    z: Point,
    obs: &DirectionGrid,
    density: &DirectionGrid,
    far_field: &DVector<Complex64>,
) -> Result<PointValue, EsmError> {
    let az = assemble_kernel(disc, z, obs, density);
    let f = svd(&az.entries)?;
    let b = modulate_rhs(disc.k(), z, obs, far_field)?;
    let choice = reg.choose(&f, &b)?;
    let g = tikhonov_solve(&f, &b, choice.alpha)?;
    Ok(PointValue {
        raw: g.norm(),
        alpha: choice.alpha,
        fell_back: choice.fell_back,
    })
}

/// Indicator values on a sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorField {
    pub grid: SamplingGrid,
    /// `Σ_j ‖g_z^{d_j}‖` over the incident directions used.
    pub raw: Vec<f64>,
    /// `raw / max(raw)`; all zero when the data vanish.
    pub normalized: Vec<f64>,
    /// Row-major index of the first minimum of `normalized`.
    pub argmin: usize,
    /// `α` per point and incident direction (incident index fastest).
    pub alpha: Vec<f64>,
    /// Number of solves where Morozov's rule fell back to the fixed `α`.
    pub fallbacks: usize,
}

impl IndicatorField {
    /// Normalise raw values and locate the minimum in a sequential pass.
    pub fn from_raw(grid: SamplingGrid, raw: Vec<f64>, alpha: Vec<f64>, fallbacks: usize) -> Result<Self, EsmError> {
        if raw.len() != grid.len() {
            return Err(EsmError::GridMismatch);
        }
        if let Some(i) = raw.iter().position(|v| !v.is_finite()) {
            return Err(EsmError::NonFinite(i));
        }
        let max = raw.iter().copied().fold(0.0, f64::max);
        let normalized: Vec<f64> = if max > 0.0 {
            raw.iter().map(|v| v / max).collect()
        } else {
            vec![0.0; raw.len()]
        };
        let mut argmin = 0;
        for (i, &v) in normalized.iter().enumerate() {
            if v < normalized[argmin] {
                argmin = i;
            }
        }
        Ok(IndicatorField {
            grid,
            raw,
            normalized,
            argmin,
            alpha,
            fallbacks,
        })
    }

    pub fn argmin_point(&self) -> Point {
        self.grid.point(self.argmin)
    }

    pub fn min_value(&self) -> f64 {
        self.normalized[self.argmin]
    }
}

fn check_wavenumber(disc: &DiscSpec, data: &FarFieldData) -> Result<(), EsmError> {
    if (disc.k() - data.k).abs() > 1e-12 * data.k {
        return Err(EsmError::WavenumberMismatch {
            disc: disc.k(),
            data: data.k,
        });
    }
    Ok(())
}

/// Operator and (aperture-restricted) data for a configuration.
pub fn prepare(cfg: &EsmConfig, data: &FarFieldData) -> Result<(SamplingOperator, FarFieldData), EsmError> {
    check_wavenumber(&cfg.disc, data)?;
    let density = DirectionGrid::uniform(cfg.density_size.unwrap_or(data.obs.len()).max(1));
    let data = restrict_aperture(data, cfg.aperture)?;
    let op = SamplingOperator::new(&cfg.disc, &data.obs, &density)?;
    Ok((op, data))
}

/// Indicator over `cfg.grid`, summing over the incident directions in `incident`
/// (all of them when `None`).
pub fn indicator_field_for(
    cfg: &EsmConfig,
    data: &FarFieldData,
    incident: Option<&[usize]>,
) -> Result<IndicatorField, EsmError> {
    let all: Vec<usize> = (0..data.num_incident()).collect();
    let cols = incident.unwrap_or(&all);
    if let Some(&bad) = cols.iter().find(|&&j| j >= data.num_incident()) {
        return Err(EsmError::BadIncident {
            index: bad,
            available: data.num_incident(),
        });
    }
    let (op, data) = prepare(cfg, data)?;
    let columns: Vec<DVector<Complex64>> = cols.iter().map(|&j| data.column(j)).collect();

    let per_point: Vec<Result<Vec<PointValue>, EsmError>> = (0..cfg.grid.len())
        .into_par_iter()
        .map(|i| {
            let z = cfg.grid.point(i);
            columns.iter().map(|u| indicator_at(&op, &cfg.reg, z, u)).collect()
        })
        .collect();

    let mut raw = Vec::with_capacity(cfg.grid.len());
    let mut alpha = Vec::with_capacity(cfg.grid.len() * columns.len());
    let mut fallbacks = 0;
    for values in per_point {
        let values = values?;
        raw.push(values.iter().map(|v| v.raw).sum());
        alpha.extend(values.iter().map(|v| v.alpha));
        fallbacks += values.iter().filter(|v| v.fell_back).count();
    }
    IndicatorField::from_raw(cfg.grid.clone(), raw, alpha, fallbacks)
}

pub fn indicator_field(cfg: &EsmConfig, data: &FarFieldData) -> Result<IndicatorField, EsmError> {
    indicator_field_for(cfg, data, None)
}

/// Pointwise sum of raw indicators, renormalised.
pub fn combine_indicators(fields: &[IndicatorField]) -> Result<IndicatorField, EsmError> {
    let first = fields.first().ok_or(EsmError::NothingToCombine)?;
    if fields.iter().any(|f| f.grid != first.grid) {
        return Err(EsmError::GridMismatch);
    }
    let mut raw = first.raw.clone();
    for f in &fields[1..] {
        for (r, v) in raw.iter_mut().zip(&f.raw) {
            *r += v;
        }
    }
    let alpha = fields.iter().flat_map(|f| f.alpha.iter().copied()).collect();
    let fallbacks = fields.iter().map(|f| f.fallbacks).sum();
    IndicatorField::from_raw(first.grid.clone(), raw, alpha, fallbacks)
}

/// One pass of the multilevel loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub radius: f64,
    pub spacing: f64,
    pub center: Point,
    pub indicator_min: f64,
    /// Whether the minimiser lies in the previous level's disc (always true at level 0).
    pub contained: bool,
}

/// Disc estimate of the scatterer.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub center: Point,
    pub radius: f64,
    pub indicator_min: f64,
    pub level_history: Vec<Level>,
    /// Set when the multilevel loop hit [`MAX_LEVEL`] without a stop.
    pub cap_reached: bool,
}

impl Reconstruction {
    pub fn from_field(field: &IndicatorField, radius: f64) -> Self {
        let level = Level {
            radius,
            spacing: field.grid.spacing(),
            center: field.argmin_point(),
            indicator_min: field.min_value(),
            contained: true,
        };
        Reconstruction {
            center: level.center,
            radius,
            indicator_min: level.indicator_min,
            level_history: vec![level],
            cap_reached: false,
        }
    }
}

/// Single-radius reconstruction: the disc `B_{z*}` at the indicator minimum.
pub fn run_esm(cfg: &EsmConfig, data: &FarFieldData) -> Result<(IndicatorField, Reconstruction), EsmError> {
    let field = indicator_field(cfg, data)?;
    let rec = Reconstruction::from_field(&field, cfg.disc.radius());
    Ok((field, rec))
}

/// Radius-halving loop starting from `r0` with spacing `R_j/2` on the bounds
/// of `base.grid`. Stops at the first level whose minimiser leaves the
/// previous disc and returns that previous disc.
pub fn run_multilevel(r0: f64, base: &EsmConfig, data: &FarFieldData) -> Result<Reconstruction, EsmError> {
    if !(r0.is_finite() && r0 > 0.0) {
        return Err(EsmError::BadRadius(r0));
    }
    let level = |j: i32| -> Result<Level, EsmError> {
        let radius = r0 / 2f64.powi(j);
        let mut cfg = base.clone();
        cfg.disc = DiscSpec::new(radius, base.disc.k())?;
        cfg.grid = base.grid.with_spacing(radius / 2.0)?;
        let field = indicator_field(&cfg, data)?;
        Ok(Level {
            radius,
            spacing: cfg.grid.spacing(),
            center: field.argmin_point(),
            indicator_min: field.min_value(),
            contained: true,
        })
    };

    let mut history = vec![level(0)?];
    for j in 1..=MAX_LEVEL {
        let prev = history[j - 1];
        let mut cur = level(j as i32)?;
        cur.contained = cur.center.dist(prev.center) <= prev.radius;
        history.push(cur);
        if !cur.contained {
            return Ok(Reconstruction {
                center: prev.center,
                radius: prev.radius,
                indicator_min: prev.indicator_min,
                level_history: history,
                cap_reached: false,
            });
        }
    }
    let last = history[MAX_LEVEL];
    Ok(Reconstruction {
        center: last.center,
        radius: last.radius,
        indicator_min: last.indicator_min,
        level_history: history,
        cap_reached: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn grid_counts_and_order() {
        let g = SamplingGrid::square(-10.0, 10.0, 0.1).unwrap();
        assert_eq!((g.nx(), g.ny(), g.len()), (201, 201, 40401));
        assert_eq!(g.point(0), Point::new(-10.0, -10.0));
        let p = g.point(201 + 3);
        assert!((p.x + 9.7).abs() < 1e-12 && (p.y + 9.9).abs() < 1e-12);
        let g = SamplingGrid::new(0.0, 1.0, 0.0, 0.45, 0.2).unwrap();
        assert_eq!((g.nx(), g.ny()), (6, 3));
        assert!(SamplingGrid::square(0.0, 1.0, 0.0).is_err());
        assert!(SamplingGrid::square(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn arc_membership() {
        let a = Arc::new(3.0 * TAU / 4.0, TAU / 2.0).unwrap();
        assert!(a.contains(0.0) && a.contains(5.0) && !a.contains(2.0));
        assert!(Arc::full().contains(6.2));
        assert!(Arc::new(0.0, 0.0).is_err());
        assert!(Arc::new(0.0, 7.0).is_err());
    }

    #[test]
    fn from_raw_ties_and_zero() {
        let g = SamplingGrid::new(0.0, 2.0, 0.0, 0.0, 1.0).unwrap();
        let f = IndicatorField::from_raw(g.clone(), vec![2.0, 1.0, 1.0], vec![], 0).unwrap();
        assert_eq!(f.argmin, 1);
        assert_eq!(f.normalized.iter().copied().fold(0.0, f64::max), 1.0);
        let z = IndicatorField::from_raw(g.clone(), vec![0.0; 3], vec![], 0).unwrap();
        assert_eq!(z.normalized, vec![0.0; 3]);
        assert_eq!(z.argmin, 0);
        assert!(IndicatorField::from_raw(g, vec![f64::NAN, 0.0, 1.0], vec![], 0).is_err());
    }

    #[test]
    fn wavenumber_must_match() {
        let obs = DirectionGrid::uniform(8);
        let data = FarFieldData::new(2.0, DirectionGrid::uniform(1), obs, DMatrix::zeros(8, 1), 0.0, None).unwrap();
        let cfg = EsmConfig::new(
            DiscSpec::new(1.0, 1.0).unwrap(),
            SamplingGrid::square(0.0, 1.0, 0.5).unwrap(),
        );
        assert!(matches!(
            indicator_field(&cfg, &data),
            Err(EsmError::WavenumberMismatch { .. })
        ));
    }
}
