use kbarrier::deployment::{
    sample, sample_gaussian, sample_uniform, DeploymentSpec, Distribution, Point, RegionSpec,
    SensorRanges,
};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const M: usize = 100_000;

fn spec(radius: f64, n: usize, dist: Distribution, seed: u64) -> DeploymentSpec {
    DeploymentSpec::new(
        RegionSpec::new(radius),
        n,
        dist,
        SensorRanges::with_double_tx(15.0),
        seed,
    )
}

/// Pearson statistic of radii against ten equal-area annuli, with its
/// upper-tail p-value on 9 degrees of freedom.
fn annulus_chi_square(points: &[Point], radius: f64) -> (f64, f64) {
    let mut counts = [0usize; 10];
    for p in points {
        let u = (p.x * p.x + p.y * p.y) / (radius * radius);
        counts[((u * 10.0) as usize).min(9)] += 1;
    }
    let expected = points.len() as f64 / 10.0;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let p = 1.0 - ChiSquared::new(9.0).unwrap().cdf(stat);
    (stat, p)
}

fn variance(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

#[test]
fn uniform_disk_passes_annulus_chi_square() {
    for seed in [1, 2, 3] {
        let f = sample_uniform(&spec(100.0, M, Distribution::Uniform, seed)).unwrap();
        let (stat, p) = annulus_chi_square(&f.positions, 100.0);
        assert!(p > 0.01, "seed {seed}: chi2 {stat}, p {p}");
    }
}

#[test]
fn chi_square_detects_a_non_uniform_field() {
    let f = sample_gaussian(&spec(100.0, M, Distribution::Gaussian, 1)).unwrap();
    let (_, p) = annulus_chi_square(&f.positions, 100.0);
    assert!(p < 1e-6);
}

#[test]
fn gaussian_axis_variance_at_quarter_radius() {
    let r = 80.0;
    let sigma = r / 4.0;
    let s = spec(r, M, Distribution::Gaussian, 5).with_sigma(sigma, sigma);
    let f = sample_gaussian(&s).unwrap();
    for (axis, v) in [
        ("x", variance(f.positions.iter().map(|p| p.x))),
        ("y", variance(f.positions.iter().map(|p| p.y))),
    ] {
        let rel = (v - sigma * sigma).abs() / (sigma * sigma);
        assert!(rel < 0.05, "{axis}: variance {v} vs {}", sigma * sigma);
    }
}

#[test]
fn wide_gaussian_approaches_uniform_radial_cdf() {
    let r = 50.0;
    let mut s = spec(r, M, Distribution::Gaussian, 11).with_sigma(10.0 * r, 10.0 * r);
    // About one draw in 200 lands inside the disk.
    s.max_attempts = 100 * M as u64 * 10;
    let g = sample_gaussian(&s).unwrap();
    let u = sample_uniform(&spec(r, M, Distribution::Uniform, 12)).unwrap();
    let mut a: Vec<f64> = g.positions.iter().map(|p| p.dist(Point::ORIGIN)).collect();
    let mut b: Vec<f64> = u.positions.iter().map(|p| p.dist(Point::ORIGIN)).collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    // Two-sample sup distance, evaluated at every sample of either set.
    let (mut i, mut j, mut sup) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        sup = sup.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    assert!(sup < 0.02, "sup distance {sup}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn same_spec_same_field_and_support(
        radius in 1.0f64..200.0,
        n in 1usize..400,
        gaussian in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let dist = if gaussian { Distribution::Gaussian } else { Distribution::Uniform };
        let s = spec(radius, n, dist, seed);
        let a = sample(&s).unwrap();
        let b = sample(&s).unwrap();
        prop_assert_eq!(a.positions.len(), n);
        for (p, q) in a.positions.iter().zip(&b.positions) {
            prop_assert_eq!(p.x.to_bits(), q.x.to_bits());
            prop_assert_eq!(p.y.to_bits(), q.y.to_bits());
        }
        for p in &a.positions {
            prop_assert!(p.dist(Point::ORIGIN) <= radius);
        }
    }
}
