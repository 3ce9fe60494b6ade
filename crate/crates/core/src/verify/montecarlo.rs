//! Compound-Poisson simulation against the spectral semigroup `e^{t m(xi)}`.
//!
//! For a finite atomic measure the process is compound Poisson with intensity
//! `nu(R^d)` and jump law `w_j / nu(R^d)`, plus the compensator drift
//! (`-t sum w_j y_j` for `sigma > 1`, restricted to `|y_j| <= 1` at `sigma = 1`).

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::distributions::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::report::{cell_rng, num, ExperimentReport};
use crate::error::{Error, Result};
use crate::grid::{apply_mode_factors, GridField};
use crate::measure::{Atom, LevyMeasure};
use crate::solver::mode_symbol;

/// Atoms and drift of a finite-activity measure.
fn finite_activity(m: &LevyMeasure) -> Result<(Vec<Atom>, Vec<f64>)> {
    let atoms = match (m.is_atomic(), m.expand_atoms()) {
        (true, Some(a)) if !a.is_empty() => a,
        _ => return Err(Error::rejected(format!("{m} has infinite activity; simulation needs a finite atomic measure"))),
    };
    let d = m.dim();
    let s = m.order();
    let mut drift = vec![0.0; d];
    if s >= 1.0 {
        for a in &atoms {
            if s > 1.0 || a.radius() <= 1.0 {
                for (dr, y) in drift.iter_mut().zip(&a.location) {
                    *dr -= a.weight * y;
                }
            }
        }
    }
    Ok((atoms, drift))
}

/// `samples` draws of `X_t`.
pub fn simulate<R: Rng + ?Sized>(m: &LevyMeasure, t: f64, samples: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::arg("time must be finite and >= 0"));
    }
    let (atoms, drift) = finite_activity(m)?;
    let d = m.dim();
    let rate: f64 = atoms.iter().map(|a| a.weight).sum();
    let pick = WeightedIndex::new(atoms.iter().map(|a| a.weight)).map_err(|e| Error::measure(e.to_string()))?;
    let counts = if rate * t > 0.0 {
        Some(Poisson::new(rate * t).map_err(|e| Error::arg(e.to_string()))?)
    } else {
        None
    };
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut x: Vec<f64> = drift.iter().map(|v| v * t).collect();
        let jumps = counts.as_ref().map_or(0, |p| p.sample(rng) as u64);
        for _ in 0..jumps {
            let a = &atoms[pick.sample(rng)];
            for i in 0..d {
                x[i] += a.location[i];
            }
        }
        out.push(x);
    }
    Ok(out)
}

/// Trigonometric interpolant of a grid field without Nyquist content.
#[derive(Debug, Clone)]
pub struct Interpolant {
    modes: Vec<(Vec<f64>, Complex64)>,
}

impl Interpolant {
    pub fn new(u: &GridField) -> Result<Self> {
        let spec = u.spectrum();
        let lattice = u.lattice();
        let len = u.len() as f64;
        let top = spec.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut modes = Vec::new();
        for (idx, c) in spec.iter().enumerate() {
            if c.norm() <= 1e-14 * top {
                continue;
            }
            let k = lattice.frequency(idx);
            if k.iter().any(|&ki| lattice.is_nyquist(ki)) {
                return Err(Error::arg("initial field must have no Nyquist content"));
            }
            modes.push((k.iter().map(|&v| v as f64).collect(), c / len));
        }
        Ok(Interpolant { modes })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.modes
            .iter()
            .map(|(k, c)| {
                let phase: f64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
                c.re * phase.cos() - c.im * phase.sin()
            })
            .sum()
    }
}

/// `e^{t m(xi)}` applied spectrally.
pub fn semigroup(u0: &GridField, m: &LevyMeasure, t: f64) -> Result<GridField> {
    let factors: Vec<Complex64> = mode_symbol(m, u0.dim(), u0.n())?.into_iter().map(|z| (z * t).exp()).collect();
    apply_mode_factors(u0, &factors)
}

/// Per probe: sample mean and standard error of `u0(x + X_t)`.
pub fn estimate<R: Rng + ?Sized>(
    m: &LevyMeasure,
    u0: &GridField,
    t: f64,
    samples: usize,
    probes: &[usize],
    rng: &mut R,
) -> Result<Vec<(f64, f64)>> {
    if samples < 2 {
        return Err(Error::arg("need at least two samples"));
    }
    let f = Interpolant::new(u0)?;
    let paths = simulate(m, t, samples, rng)?;
    probes
        .iter()
        .map(|&j| {
            if j >= u0.len() {
                return Err(Error::arg(format!("probe {j} outside the grid")));
            }
            let x = u0.point(j);
            let vals: Vec<f64> = paths
                .iter()
                .map(|y| f.eval(&x.iter().zip(y).map(|(a, b)| a + b).collect::<Vec<_>>()))
                .collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            Ok((mean, (var / n).sqrt()))
        })
        .collect()
}

/// `E cos(xi0 (x + X_t))` for atoms `+-h` of weight `w`.
pub fn pair_closed_form(h: f64, w: f64, xi0: f64, t: f64, x: f64) -> f64 {
    (2.0 * w * t * ((xi0 * h).cos() - 1.0)).exp() * (xi0 * x).cos()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    pub pair_offset: f64,
    pub pair_weight: f64,
    pub pair_frequency: i64,
    pub sigma: f64,
    pub comb: LevyMeasure,
    pub time: f64,
    pub n: usize,
    pub probes: usize,
    pub samples_small: usize,
    pub samples_large: usize,
    pub replicates: usize,
    pub seed: u64,
}

impl MonteCarloConfig {
    pub fn standard(seed: u64) -> Result<Self> {
        Ok(MonteCarloConfig {
            pair_offset: 0.75,
            pair_weight: 1.5,
            pair_frequency: 2,
            sigma: 0.5,
            comb: LevyMeasure::dyadic_comb(1, 0.5, 0, 3)?,
            time: 0.1,
            n: 64,
            probes: 8,
            samples_small: 1_000,
            samples_large: 100_000,
            replicates: 16,
            seed,
        })
    }
}

pub fn montecarlo_check(cfg: &MonteCarloConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    if cfg.probes == 0 || cfg.probes > cfg.n || cfg.replicates == 0 {
        return Err(Error::arg("need 1..=n probes and at least one replicate"));
    }
    let n = cfg.n;
    let probes: Vec<usize> = (0..cfg.probes).map(|i| i * n / cfg.probes).collect();
    let h = 2.0 * PI / n as f64;
    let mut report = ExperimentReport::new(
        "montecarlo",
        &["case", "samples", "replicate", "node", "x", "mc_mean", "std_error", "reference", "deviation_in_se"],
    );
    report.input("pair", format!("+-{} weight {} frequency {}", cfg.pair_offset, cfg.pair_weight, cfg.pair_frequency));
    report.input("comb", &cfg.comb);
    report.input("time", cfg.time);
    report.input("n", n);
    report.input("samples", format!("{} / {}", cfg.samples_small, cfg.samples_large));
    report.input("replicates", cfg.replicates);
    report.input("seed", cfg.seed);

    let pair = LevyMeasure::atoms(
        1,
        cfg.sigma,
        vec![Atom::new(vec![cfg.pair_offset], cfg.pair_weight), Atom::new(vec![-cfg.pair_offset], cfg.pair_weight)],
    )?;
    let xi0 = cfg.pair_frequency as f64;
    let cosine = GridField::from_fn(1, n, |x| (xi0 * x[0]).cos())?;
    let exact: Vec<f64> =
        probes.iter().map(|&j| pair_closed_form(cfg.pair_offset, cfg.pair_weight, xi0, cfg.time, j as f64 * h)).collect();
    let spectral_pair = semigroup(&cosine, &pair, cfg.time)?;
    let spectral_gap = probes.iter().zip(&exact).map(|(&j, e)| (spectral_pair.values()[j] - e).abs()).fold(0.0, f64::max);
    report.check(
        "pair_symbol_matches_closed_form",
        spectral_gap <= 1e-13,
        format!("max |spectral - closed form| = {spectral_gap:.3e}"),
    );

    let mut worst_pair: f64 = 0.0;
    let mut sq = [0.0f64; 2];
    for rep in 0..cfg.replicates {
        for (si, &samples) in [cfg.samples_small, cfg.samples_large].iter().enumerate() {
            let mut rng = cell_rng(cfg.seed, &[1, rep as u64, samples as u64]);
            let est = estimate(&pair, &cosine, cfg.time, samples, &probes, &mut rng)?;
            for ((&j, (mean, se)), e) in probes.iter().zip(&est).zip(&exact) {
                let dev = if *se > 0.0 { (mean - e).abs() / se } else if mean == e { 0.0 } else { f64::INFINITY };
                sq[si] += (mean - e).powi(2);
                if rep == 0 && si == 1 {
                    worst_pair = worst_pair.max(dev);
                }
                report.row(vec![
                    "pair".into(),
                    samples.to_string(),
                    rep.to_string(),
                    j.to_string(),
                    num(j as f64 * h),
                    num(*mean),
                    num(*se),
                    num(*e),
                    num(dev),
                ]);
            }
        }
    }
    report.check("pair_within_3se", worst_pair <= 3.0, format!("max |MC - closed form| / SE = {worst_pair:.3} at {} samples", cfg.samples_large));
    let shrink = (sq[0] / sq[1]).sqrt();
    report.check(
        "error_shrink",
        shrink >= 5.0,
        format!(
            "RMS error ratio {}/{} samples over {} replicates = {shrink:.3} >= 5",
            cfg.samples_small, cfg.samples_large, cfg.replicates
        ),
    );

    let mut rng = cell_rng(cfg.seed, &[2]);
    let mut u0 = GridField::random_band_limited(1, n, n / 8, &mut rng)?;
    // Remove the zero mode so the comparison is not dominated by a constant.
    let mean = u0.values().iter().sum::<f64>() / n as f64;
    u0 = u0.map(|v| v - mean);
    let spectral = semigroup(&u0, &cfg.comb, cfg.time)?;
    let est = estimate(&cfg.comb, &u0, cfg.time, cfg.samples_large, &probes, &mut rng)?;
    let mut worst_comb: f64 = 0.0;
    for (&j, (mean, se)) in probes.iter().zip(&est) {
        let r = spectral.values()[j];
        let dev = (mean - r).abs() / se;
        worst_comb = worst_comb.max(dev);
        report.row(vec![
            "comb".into(),
            cfg.samples_large.to_string(),
            "0".into(),
            j.to_string(),
            num(j as f64 * h),
            num(*mean),
            num(*se),
            num(r),
            num(dev),
        ]);
    }
    report.check("comb_within_3se", worst_comb <= 3.0, format!("max |MC - spectral| / SE = {worst_comb:.3}"));
    report.wall_time = start.elapsed();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_time_is_exact() {
        let mut rng = cell_rng(0, &[]);
        let u0 = GridField::random_band_limited(1, 32, 4, &mut rng).unwrap();
        let m = LevyMeasure::dyadic_comb(1, 0.5, 0, 3).unwrap();
        let est = estimate(&m, &u0, 0.0, 10, &[0, 5, 17], &mut rng).unwrap();
        for (&j, (mean, se)) in [0usize, 5, 17].iter().zip(&est) {
            assert_relative_eq!(*mean, u0.values()[j], max_relative = 1e-12);
            assert!(*se < 1e-15);
        }
    }

    #[test]
    fn interpolant_reproduces_grid_values() {
        let mut rng = cell_rng(5, &[]);
        let u = GridField::random_band_limited(2, 16, 3, &mut rng).unwrap();
        let f = Interpolant::new(&u).unwrap();
        for j in [0, 7, 100, 255] {
            assert_relative_eq!(f.eval(&u.point(j)), u.values()[j], epsilon = 1e-13);
        }
        let nyq = GridField::from_fn(1, 8, |x| (4.0 * x[0]).cos()).unwrap();
        assert!(Interpolant::new(&nyq).is_err());
    }

    #[test]
    fn density_is_rejected() {
        let m = LevyMeasure::radial(1, 0.5, 1.0).unwrap();
        let u0 = GridField::from_fn(1, 16, |x| x[0].sin()).unwrap();
        let mut rng = cell_rng(1, &[]);
        assert!(matches!(estimate(&m, &u0, 0.1, 10, &[0], &mut rng), Err(Error::Rejected(_))));
    }

    #[test]
    fn drift_cancels_mean_jump() {
        // One-sided atoms with sigma > 1: E X_t = t sum w y - t sum w y = 0.
        let m = LevyMeasure::atoms(1, 1.5, vec![Atom::new(vec![0.5], 2.0), Atom::new(vec![-0.2], 1.0)]).unwrap();
        let mut rng = cell_rng(9, &[]);
        let xs = simulate(&m, 0.7, 200_000, &mut rng).unwrap();
        let mean = xs.iter().map(|x| x[0]).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 5e-3, "mean {mean}");
    }

    #[test]
    fn small_experiment_passes() {
        let mut cfg = MonteCarloConfig::standard(11).unwrap();
        cfg.samples_large = 20_000;
        cfg.samples_small = 200;
        cfg.replicates = 8;
        let r = montecarlo_check(&cfg).unwrap();
        assert!(r.passes(), "{r}");
    }
}
