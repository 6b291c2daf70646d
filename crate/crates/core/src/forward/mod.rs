//! Synthetic far-field data: analytic discs, a Nyström solver for smooth
//! sound-soft obstacles, and the multiplicative noise model.

mod nystrom;
mod shapes;

pub use nystrom::{nystrom_dirichlet, NystromSolver};
pub use shapes::{BoundaryCondition, CurvePoint, ScattererSpec, Shape};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::disc_kernel::{shifted_farfield, DirectionGrid, DiscSpec, KernelError, Point};
use crate::specfun::SpecFunError;

/// Identifier of the noise generator, recorded alongside generated data.
pub const NOISE_GENERATOR: &str =
    "chacha20 (rand_chacha 0.9, seed_from_u64), uniform [-1,1] pairs (re, im) in column-major order";

/// Default number of Nyström quadrature nodes.
pub const DEFAULT_QUADRATURE: usize = 128;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ForwardError {
    #[error("wavenumber must be positive and finite, got {0}")]
    BadWavenumber(f64),
    #[error("quadrature size must be even and at least 32, got {0}")]
    BadQuadrature(usize),
    #[error("invalid shape: {0}")]
    BadShape(String),
    #[error("noise level must lie in [0, 1), got {0}")]
    BadNoise(f64),
    #[error("far-field data: {0}")]
    BadData(String),
    #[error("boundary system is numerically singular (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

/// Far-field samples `U_inf(x̂_l; d_j)` with their acquisition metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldData {
    pub k: f64,
    pub incident: DirectionGrid,
    pub obs: DirectionGrid,
    /// `obs.len() × incident.len()`.
    pub values: DMatrix<Complex64>,
    pub noise_level: f64,
    pub seed: Option<u64>,
}

impl FarFieldData {
    pub fn new(
        k: f64,
        incident: DirectionGrid,
        obs: DirectionGrid,
        values: DMatrix<Complex64>,
        noise_level: f64,
        seed: Option<u64>,
    ) -> Result<Self, ForwardError> {
        if !(k.is_finite() && k > 0.0) {
            return Err(ForwardError::BadWavenumber(k));
        }
        if !(0.0..1.0).contains(&noise_level) {
            return Err(ForwardError::BadNoise(noise_level));
        }
        if values.nrows() != obs.len() || values.ncols() != incident.len() {
            return Err(ForwardError::BadData(format!(
                "values are {}×{}, grids need {}×{}",
                values.nrows(),
                values.ncols(),
                obs.len(),
                incident.len()
            )));
        }
        Ok(FarFieldData {
            k,
            incident,
            obs,
            values,
            noise_level,
            seed,
        })
    }

    /// Far field for the `j`-th incident direction.
    pub fn column(&self, j: usize) -> DVector<Complex64> {
        self.values.column(j).into_owned()
    }

    pub fn num_incident(&self) -> usize {
        self.incident.len()
    }
}

/// Exact far field of a sound-soft disc of radius `radius` centred at `center`.
pub fn disc_exact_farfield(
    center: Point,
    radius: f64,
    k: f64,
    obs: &DirectionGrid,
    d: Point,
) -> Result<DVector<Complex64>, ForwardError> {
    let disc = DiscSpec::new(radius, k)?;
    Ok(DVector::from_iterator(
        obs.len(),
        obs.directions().map(|x| shifted_farfield(&disc, center, x, d)),
    ))
}

/// Noise-free far-field data for every incident direction: analytic for
/// discs, Nyström with `m` nodes otherwise.
pub fn synthesize(
    spec: &ScattererSpec,
    k: f64,
    incident: &DirectionGrid,
    obs: &DirectionGrid,
    m: usize,
) -> Result<FarFieldData, ForwardError> {
    let mut values = DMatrix::zeros(obs.len(), incident.len());
    match &spec.shape {
        Shape::Disc { center, radius } => {
            for (j, d) in incident.directions().enumerate() {
                values.set_column(j, &disc_exact_farfield(*center, *radius, k, obs, d)?);
            }
        }
        _ => {
            let solver = NystromSolver::new(spec, k, m)?;
            for (j, d) in incident.directions().enumerate() {
                values.set_column(j, &solver.far_field(d, obs)?);
            }
        }
    }
    FarFieldData::new(k, incident.clone(), obs.clone(), values, 0.0, None)
}

/// Multiplicative complex noise: `F ↦ F (1 + level (u + i v))`, `u, v ~ U[−1, 1]`.
///
/// Draws come from a ChaCha20 stream seeded with `seed`, consumed in
/// column-major order, `u` before `v` for each entry.
pub fn add_noise(data: &FarFieldData, level: f64, seed: u64) -> Result<FarFieldData, ForwardError> {
    if !(0.0..1.0).contains(&level) {
        return Err(ForwardError::BadNoise(level));
    }
    let mut out = data.clone();
    out.noise_level = level;
    out.seed = Some(seed);
    if level == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for f in out.values.iter_mut() {
        let u: f64 = rng.random_range(-1.0..=1.0);
        let v: f64 = rng.random_range(-1.0..=1.0);
        *f *= Complex64::new(1.0 + level * u, level * v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FarFieldData {
        let obs = DirectionGrid::uniform(16);
        synthesize(
            &ScattererSpec::disc(Point::new(1.0, -2.0), 0.5).unwrap(),
            1.0,
            &DirectionGrid::uniform(2),
            &obs,
            64,
        )
        .unwrap()
    }

    #[test]
    fn zero_noise_is_identity() {
        let d = sample();
        let n = add_noise(&d, 0.0, 11).unwrap();
        assert_eq!(n.values, d.values);
        assert_eq!(n.seed, Some(11));
    }

    #[test]
    fn noise_is_deterministic_and_bounded() {
        let d = sample();
        let a = add_noise(&d, 0.03, 1234).unwrap();
        let b = add_noise(&d, 0.03, 1234).unwrap();
        assert_eq!(a.values, b.values);
        let c = add_noise(&d, 0.03, 1235).unwrap();
        assert_ne!(a.values, c.values);
        for (x, y) in a.values.iter().zip(d.values.iter()) {
            assert!((x - y).norm() / y.norm() <= 0.03 * 2f64.sqrt() + 1e-15);
        }
        assert!(add_noise(&d, 1.0, 0).is_err());
        assert!(add_noise(&d, -0.1, 0).is_err());
    }

    #[test]
    fn data_validation() {
        let g = DirectionGrid::uniform(4);
        let one = DirectionGrid::single(0.0).unwrap();
        assert!(FarFieldData::new(1.0, one.clone(), g.clone(), DMatrix::zeros(3, 1), 0.0, None).is_err());
        assert!(FarFieldData::new(0.0, one.clone(), g.clone(), DMatrix::zeros(4, 1), 0.0, None).is_err());
        assert!(FarFieldData::new(1.0, one, g, DMatrix::zeros(4, 1), 0.0, None).is_ok());
    }
}
