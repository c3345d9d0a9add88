//! Seeded sensor placement inside a circular region.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Attempts allowed per field before truncated-Gaussian sampling gives up.
pub const DEFAULT_MAX_ATTEMPTS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dist_sq(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub radius_m: f64,
    #[serde(default)]
    pub center: Point,
}

impl RegionSpec {
    pub fn new(radius_m: f64) -> Self {
        RegionSpec {
            radius_m,
            center: Point::ORIGIN,
        }
    }

    /// The area feature used by every model.
    pub fn area(&self) -> f64 {
        PI * self.radius_m * self.radius_m
    }

    pub fn contains(&self, p: Point) -> bool {
        p.dist(self.center) <= self.radius_m
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius_m.is_finite() && self.radius_m > 0.0) {
            return Err(Error::Validation(format!(
                "region radius must be positive, got {}",
                self.radius_m
            )));
        }
        if !(self.center.x.is_finite() && self.center.y.is_finite()) {
            return Err(Error::Validation("region center must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    Gaussian,
    Uniform,
}

impl Distribution {
    pub fn name(self) -> &'static str {
        match self {
            Distribution::Gaussian => "gaussian",
            Distribution::Uniform => "uniform",
        }
    }
}

impl std::str::FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Distribution::Gaussian),
            "uniform" => Ok(Distribution::Uniform),
            other => Err(Error::Validation(format!("unknown distribution `{other}`"))),
        }
    }
}

impl std::fmt::Display for Distribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Sensing and transmission radii shared by every sensor of a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorRanges {
    pub sensing_m: f64,
    pub tx_m: f64,
}

impl SensorRanges {
    pub fn new(sensing_m: f64, tx_m: f64) -> Self {
        SensorRanges { sensing_m, tx_m }
    }

    /// Transmission range fixed at twice the sensing range.
    pub fn with_double_tx(sensing_m: f64) -> Self {
        SensorRanges {
            sensing_m,
            tx_m: 2.0 * sensing_m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sensing_m.is_finite() && self.sensing_m > 0.0) {
            return Err(Error::Validation(format!(
                "sensing range must be positive, got {}",
                self.sensing_m
            )));
        }
        if !(self.tx_m.is_finite() && self.tx_m >= 2.0 * self.sensing_m) {
            return Err(Error::Validation(format!(
                "transmission range {} is below twice the sensing range {}",
                self.tx_m, self.sensing_m
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentSpec {
    pub region: RegionSpec,
    pub n_sensors: usize,
    pub distribution: Distribution,
    /// Per-axis standard deviations, only read for Gaussian placement.
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub ranges: SensorRanges,
    pub seed: u64,
    #[serde(default = "default_max_attempts")]
    pub max_attempts: u64,
}

fn default_max_attempts() -> u64 {
    DEFAULT_MAX_ATTEMPTS
}

impl DeploymentSpec {
    /// A spec with σx = σy = R/3 and the default attempt cap.
    pub fn new(
        region: RegionSpec,
        n_sensors: usize,
        distribution: Distribution,
        ranges: SensorRanges,
        seed: u64,
    ) -> Self {
        let sigma = region.radius_m / 3.0;
        DeploymentSpec {
            region,
            n_sensors,
            distribution,
            sigma_x: sigma,
            sigma_y: sigma,
            ranges,
            seed,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }

    pub fn with_sigma(mut self, sigma_x: f64, sigma_y: f64) -> Self {
        self.sigma_x = sigma_x;
        self.sigma_y = sigma_y;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.region.validate()?;
        self.ranges.validate()?;
        if self.n_sensors == 0 {
            return Err(Error::Validation("at least one sensor is required".into()));
        }
        if self.distribution == Distribution::Gaussian
            && !(self.sigma_x.is_finite()
                && self.sigma_x > 0.0
                && self.sigma_y.is_finite()
                && self.sigma_y > 0.0)
        {
            return Err(Error::Validation(format!(
                "Gaussian deployment needs positive sigmas, got ({}, {})",
                self.sigma_x, self.sigma_y
            )));
        }
        Ok(())
    }
}

/// An immutable realization of sensor positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorField {
    pub positions: Vec<Point>,
    pub sensing_range_m: f64,
    pub tx_range_m: f64,
    pub region: RegionSpec,
}

impl SensorField {
    /// Build a field from explicit positions, checking the support and range
    /// invariants.
    pub fn new(positions: Vec<Point>, ranges: SensorRanges, region: RegionSpec) -> Result<Self> {
        region.validate()?;
        ranges.validate()?;
        // Small slack for positions computed in polar form.
        let limit = region.radius_m * (1.0 + 1e-12);
        if let Some((i, p)) = positions
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.dist(region.center) <= limit))
        {
            return Err(Error::Validation(format!(
                "sensor {i} at ({}, {}) lies outside the region",
                p.x, p.y
            )));
        }
        Ok(SensorField {
            positions,
            sensing_range_m: ranges.sensing_m,
            tx_range_m: ranges.tx_m,
            region,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn ranges(&self) -> SensorRanges {
        SensorRanges::new(self.sensing_range_m, self.tx_range_m)
    }

    /// `x,y` CSV with six decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for p in &self.positions {
            let _ = writeln!(out, "{:.6},{:.6}", p.x, p.y);
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Dispatch on the spec's distribution.
pub fn sample(spec: &DeploymentSpec) -> Result<SensorField> {
    match spec.distribution {
        Distribution::Uniform => sample_uniform(spec),
        Distribution::Gaussian => sample_gaussian(spec),
    }
}

/// Uniform placement on the disk via γ = R·√u, φ = 2πv.
pub fn sample_uniform(spec: &DeploymentSpec) -> Result<SensorField> {
    if spec.distribution != Distribution::Uniform {
        return Err(Error::Validation(
            "sample_uniform called with a non-uniform spec".into(),
        ));
    }
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let RegionSpec { radius_m, center } = spec.region;
    let positions = (0..spec.n_sensors)
        .map(|_| {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            let gamma = radius_m * u.sqrt();
            let phi = 2.0 * PI * v;
            Point::new(center.x + gamma * phi.cos(), center.y + gamma * phi.sin())
        })
        .collect();
    SensorField::new(positions, spec.ranges, spec.region)
}

/// Bivariate normal placement centred on the region, rejection-resampled
/// until each point falls inside the disk.
pub fn sample_gaussian(spec: &DeploymentSpec) -> Result<SensorField> {
    if spec.distribution != Distribution::Gaussian {
        return Err(Error::Validation(
            "sample_gaussian called with a non-Gaussian spec".into(),
        ));
    }
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let RegionSpec { radius_m, center } = spec.region;
    let nx = Normal::new(center.x, spec.sigma_x)
        .map_err(|e| Error::Validation(format!("sigma_x: {e}")))?;
    let ny = Normal::new(center.y, spec.sigma_y)
        .map_err(|e| Error::Validation(format!("sigma_y: {e}")))?;
    let r2 = radius_m * radius_m;

    let mut positions = Vec::with_capacity(spec.n_sensors);
    let mut attempts = 0u64;
    while positions.len() < spec.n_sensors {
        if attempts >= spec.max_attempts {
            return Err(Error::Sampling {
                attempts,
                accepted: positions.len(),
                wanted: spec.n_sensors,
                acceptance_rate: positions.len() as f64 / attempts as f64,
            });
        }
        attempts += 1;
        let p = Point::new(nx.sample(&mut rng), ny.sample(&mut rng));
        if p.dist_sq(center) <= r2 {
            positions.push(p);
        }
    }
    SensorField::new(positions, spec.ranges, spec.region)
}
