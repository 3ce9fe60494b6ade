//! Unboundedness of the comb operator in `L_p(|x|^l dx)` for `l in [sigma p, d(p-1))`.
//!
//! `v` is a product bump equal to 1 on `[-1,1]^d` and supported in
//! `[-2,2]^d`. On `(3, inf) x [-1,1]^{d-1}` the comb part gives
//! `Lv(x) >= sum_{k>=2} 2^{-k sigma} 1_{(2^k-1, 2^k+1)}(x_1)`, so the weighted
//! `p`-th power dominates `S_K = sum_{k=2}^K 2^{-k sigma p} int_{shell_k} |x|^l dx`.
//! The fractional Laplacian of the same bump decays like `|x|^{-d-sigma}` and
//! has finite weighted norm.

use std::f64::consts::PI;
use std::time::Instant;

use super::report::{num, ExperimentReport};
use crate::error::{Error, Result};
use crate::maximal::least_squares_slope;
use crate::norms::power_integral;
use crate::quad::GaussLegendre;
use crate::special::{radial_symbol_constant, sphere_area};

pub const SLOPE_RELATIVE_TOLERANCE: f64 = 0.1;
pub const CAUCHY_RADIUS_LOG2: i32 = 12;
pub const CAUCHY_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterexampleConfig {
    pub l: f64,
    pub p: f64,
    pub sigma: f64,
    pub dim: usize,
    /// Last shell index `K` (`<= 24`).
    pub k_max: i32,
}

fn smooth_step(t: f64) -> f64 {
    let e = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    let (a, b) = (e(t), e(1.0 - t));
    a / (a + b)
}

/// One-dimensional profile: 1 on `[-1,1]`, 0 outside `(-2,2)`, smooth.
pub fn bump(s: f64) -> f64 {
    smooth_step(2.0 - s.abs())
}

impl CounterexampleConfig {
    /// `[sigma p, d(p-1))`.
    pub fn range(&self) -> (f64, f64) {
        (self.sigma * self.p, self.dim as f64 * (self.p - 1.0))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma < 2.0) || !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::arg("need sigma in (0, 2) and p in (1, inf)"));
        }
        if !(1..=2).contains(&self.dim) {
            return Err(Error::arg("the counterexample is implemented for d = 1 and d = 2"));
        }
        if !(3..=24).contains(&self.k_max) {
            return Err(Error::arg("shell count K must lie in 3..=24"));
        }
        let (lo, hi) = self.range();
        if lo >= hi {
            return Err(Error::rejected(format!(
                "weight range l in [sigma p, d(p-1)) = [{lo}, {hi}) is empty; it is nonempty for large p when \
                 d >= 2, or d = 1 with sigma in (0, 1)"
            )));
        }
        if !(self.l >= lo && self.l < hi) {
            return Err(Error::rejected(format!("l = {} lies outside [sigma p, d(p-1)) = [{lo}, {hi})", self.l)));
        }
        Ok(())
    }
}

/// `int_{(a,b) x [-1,1]^{d-1}} |x|^l dx`.
fn slab_weight(l: f64, d: usize, a: f64, b: f64, gl: &GaussLegendre) -> f64 {
    match d {
        1 => power_integral(l, a, b),
        _ => gl
            .mapped(-1.0, 1.0)
            .map(|(y, wy)| wy * gl.mapped(a, b).map(|(x, wx)| wx * (x * x + y * y).powf(l / 2.0)).sum::<f64>())
            .sum(),
    }
}

/// Shell lower-bound terms `2^{-k sigma p} int_{shell_k} |x|^l`, `k = 2..=K`.
pub fn shell_terms(cfg: &CounterexampleConfig) -> Vec<f64> {
    let gl = GaussLegendre::new(24);
    (2..=cfg.k_max)
        .map(|k| {
            let c = 2f64.powi(k);
            2f64.powf(-(k as f64) * cfg.sigma * cfg.p) * slab_weight(cfg.l, cfg.dim, c - 1.0, c + 1.0, &gl)
        })
        .collect()
}

/// Truncated direct evaluation: `int |sum_{j>=1} 2^{-j sigma} v(x - 2^j e_1)|^p |x|^l`
/// over `(3, 2^k + 2) x [-1,1]^{d-1}`, reported per shell `k = 2..=K`.
pub fn direct_terms(cfg: &CounterexampleConfig) -> Vec<f64> {
    let gl = GaussLegendre::new(32);
    let glx = GaussLegendre::new(16);
    let lv = |x1: f64| -> f64 {
        (1..=cfg.k_max + 1).map(|j| 2f64.powf(-(j as f64) * cfg.sigma) * bump(x1 - 2f64.powi(j))).sum()
    };
    let weight = |x1: f64| -> f64 {
        match cfg.dim {
            1 => x1.abs().powf(cfg.l),
            _ => glx.mapped(-1.0, 1.0).map(|(y, w)| w * (x1 * x1 + y * y).powf(cfg.l / 2.0)).sum(),
        }
    };
    (2..=cfg.k_max)
        .map(|k| {
            let c = 2f64.powi(k);
            let lo = (c - 2.0).max(3.0);
            let breaks = [lo, c - 1.0, c + 1.0, c + 2.0];
            breaks
                .windows(2)
                .filter(|w| w[1] > w[0])
                .map(|w| gl.mapped(w[0], w[1]).map(|(x, wt)| wt * lv(x).powf(cfg.p) * weight(x)).sum::<f64>())
                .sum()
        })
        .collect()
}

/// `|(-Delta)^{sigma/2} v(x)|` for `x` outside `[-2,2]^d`.
fn frac_bump(x: &[f64], sigma: f64, gl: &GaussLegendre) -> f64 {
    let d = x.len();
    let panels = [(-2.0, -1.0), (-1.0, 1.0), (1.0, 2.0)];
    let nodes: Vec<(f64, f64)> = panels.iter().flat_map(|&(a, b)| gl.mapped(a, b).map(|(z, w)| (z, w * bump(z)))).collect();
    let s: f64 = match d {
        1 => nodes.iter().map(|&(z, w)| w * (x[0] - z).abs().powf(-1.0 - sigma)).sum(),
        _ => nodes
            .iter()
            .map(|&(z1, w1)| {
                w1 * nodes
                    .iter()
                    .map(|&(z2, w2)| w2 * ((x[0] - z1).powi(2) + (x[1] - z2).powi(2)).powf(-(2.0 + sigma) / 2.0))
                    .sum::<f64>()
            })
            .sum(),
    };
    s / radial_symbol_constant(d, sigma)
}

/// `int_{a < |x| < b} |(-Delta)^{sigma/2} v|^p |x|^l dx`.
fn frac_shell(cfg: &CounterexampleConfig, a: f64, b: f64, gl: &GaussLegendre) -> f64 {
    let inner = GaussLegendre::new(12);
    match cfg.dim {
        1 => 2.0 * gl.mapped(a, b).map(|(r, w)| w * frac_bump(&[r], cfg.sigma, &inner).powf(cfg.p) * r.powf(cfg.l)).sum::<f64>(),
        _ => {
            // Symmetric under reflections and the swap: integrate over theta in [0, pi/4].
            8.0 * gl
                .mapped(a, b)
                .map(|(r, wr)| {
                    wr * r.powf(cfg.l + 1.0)
                        * gl
                            .mapped(0.0, PI / 4.0)
                            .map(|(t, wt)| wt * frac_bump(&[r * t.cos(), r * t.sin()], cfg.sigma, &inner).powf(cfg.p))
                            .sum::<f64>()
                })
                .sum::<f64>()
        }
    }
}

pub fn counterexample_run(cfg: &CounterexampleConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    cfg.validate()?;
    let (lo, hi) = cfg.range();
    let terms = shell_terms(cfg);
    let direct = direct_terms(cfg);
    let d = cfg.dim as f64;

    // Shells of the decay integral: [3 sqrt d, 8], then [2^j, 2^{j+1}] up to 2^K.
    let gl = GaussLegendre::new(16);
    let r0 = 3.0 * d.sqrt();
    let mut frac = vec![(r0, 8.0, frac_shell(cfg, r0, 8.0, &gl))];
    for j in 3..cfg.k_max {
        let (a, b) = (2f64.powi(j), 2f64.powi(j + 1));
        frac.push((a, b, frac_shell(cfg, a, b, &gl)));
    }

    let mut report = ExperimentReport::new(
        "counterexample",
        &["k", "shell_term", "lower_bound_sum", "direct_sum", "frac_shell_inner", "frac_shell_outer", "frac_increment", "frac_partial"],
    );
    report.input("l", cfg.l);
    report.input("p", cfg.p);
    report.input("sigma", cfg.sigma);
    report.input("dim", cfg.dim);
    report.input("k_max", cfg.k_max);
    report.input("range", format!("[{lo}, {hi})"));

    let mut partial = Vec::with_capacity(terms.len());
    let mut direct_partial = Vec::with_capacity(terms.len());
    let (mut s, mut ds) = (0.0, 0.0);
    for (t, dt) in terms.iter().zip(&direct) {
        s += t;
        ds += dt;
        partial.push(s);
        direct_partial.push(ds);
    }
    let mut frac_partial = 0.0;
    for (i, k) in (2..=cfg.k_max).enumerate() {
        let (fa, fb, finc) = frac.get(i).map(|&(a, b, v)| (num(a), num(b), v)).unwrap_or((String::new(), String::new(), f64::NAN));
        let fcells = if finc.is_nan() {
            (String::new(), String::new())
        } else {
            frac_partial += finc;
            (num(finc), num(frac_partial))
        };
        report.row(vec![k.to_string(), num(terms[i]), num(partial[i]), num(direct_partial[i]), fa, fb, fcells.0, fcells.1]);
    }

    let exponent = cfg.l - cfg.sigma * cfg.p;
    if exponent.abs() <= 1e-12 {
        let (mn, mx) = terms.iter().fold((f64::INFINITY, 0.0f64), |(a, b), t| (a.min(*t), b.max(*t)));
        report.check("linear_growth", mx <= 2.0 * mn, format!("shell terms in [{mn:.6}, {mx:.6}], ratio {:.4} <= 2", mx / mn));
    } else {
        let first = (cfg.k_max / 2).max(2);
        let ks: Vec<f64> = (first..=cfg.k_max).map(|k| k as f64).collect();
        let ys: Vec<f64> = (first..=cfg.k_max).map(|k| partial[(k - 2) as usize].ln()).collect();
        let slope = least_squares_slope(&ks, &ys);
        let expected = exponent * 2f64.ln();
        report.check(
            "divergence_slope",
            (slope - expected).abs() <= SLOPE_RELATIVE_TOLERANCE * expected,
            format!("slope of ln S_K over K in [{first}, {}] = {slope:.6}, expected {expected:.6} +- 10%", cfg.k_max),
        );
    }
    let lower_ok = partial.iter().zip(&direct_partial).all(|(s, d)| *d >= s * (1.0 - 1e-12));
    report.check("lower_bound_valid", lower_ok, "direct partial integrals dominate the shell lower bound for every K");

    let tail_increments: Vec<f64> =
        frac.iter().filter(|(a, _, _)| *a >= 2f64.powi(CAUCHY_RADIUS_LOG2)).map(|(_, _, v)| *v).collect();
    let worst = tail_increments.iter().copied().fold(0.0, f64::max);
    report.check(
        "fractional_cauchy",
        !tail_increments.is_empty() && worst < CAUCHY_TOLERANCE,
        format!("{} shells beyond 2^{CAUCHY_RADIUS_LOG2}, largest increment {worst:.3e} < {CAUCHY_TOLERANCE:e}", tail_increments.len()),
    );
    // |(-Delta)^{sigma/2} v(x)| <= 4^d 3^{d+sigma} |x|^{-d-sigma} / C for |x| > 3 sqrt d.
    let amp = 4f64.powf(d) * 3f64.powf(d + cfg.sigma) / radial_symbol_constant(cfg.dim, cfg.sigma);
    let e = cfg.l - d * cfg.p - cfg.sigma * cfg.p + d;
    let bound = amp.powf(cfg.p) * sphere_area(cfg.dim) * 8f64.powf(e) / (-e);
    let beyond8: f64 = frac.iter().filter(|(a, _, _)| *a >= 8.0).map(|(_, _, v)| *v).sum();
    report.check(
        "fractional_tail_bound",
        e < 0.0 && beyond8 <= bound,
        format!("weighted tail beyond |x| = 8 is {beyond8:.3e} <= decay bound {bound:.3e}"),
    );
    report.wall_time = start.elapsed();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bump_profile() {
        assert_eq!(bump(0.3), 1.0);
        assert_eq!(bump(-1.0), 1.0);
        assert_eq!(bump(2.0), 0.0);
        assert_relative_eq!(bump(1.5), 0.5, epsilon = 1e-15);
        assert!(bump(1.2) > bump(1.7));
    }

    #[test]
    fn geometric_shell_oracle() {
        // d = 1: terms 2^{-k sigma p} ((2^k+1)^{l+1} - (2^k-1)^{l+1}) / (l+1).
        let cfg = CounterexampleConfig { l: 2.5, p: 4.0, sigma: 0.5, dim: 1, k_max: 10 };
        for (i, t) in shell_terms(&cfg).iter().enumerate() {
            let c = 2f64.powi(i as i32 + 2);
            let expected = 2f64.powf(-(i as f64 + 2.0) * 2.0) * ((c + 1.0).powf(3.5) - (c - 1.0).powf(3.5)) / 3.5;
            assert_relative_eq!(*t, expected, max_relative = 1e-13);
        }
    }

    #[test]
    fn empty_range_rejected() {
        let cfg = CounterexampleConfig { l: 1.0, p: 4.0, sigma: 1.5, dim: 1, k_max: 10 };
        assert!(matches!(counterexample_run(&cfg), Err(Error::Rejected(_))));
        let cfg = CounterexampleConfig { l: 1.0, p: 4.0, sigma: 0.5, dim: 1, k_max: 10 };
        assert!(matches!(counterexample_run(&cfg), Err(Error::Rejected(_))));
    }

    #[test]
    fn frac_bump_decay_rate() {
        let gl = GaussLegendre::new(12);
        let a = frac_bump(&[1000.0], 0.5, &gl);
        let b = frac_bump(&[2000.0], 0.5, &gl);
        assert_relative_eq!(a / b, 2f64.powf(1.5), max_relative = 1e-3);
        let a2 = frac_bump(&[300.0, 400.0], 0.5, &gl);
        let b2 = frac_bump(&[600.0, 800.0], 0.5, &gl);
        assert_relative_eq!(a2 / b2, 2f64.powf(2.5), max_relative = 1e-3);
    }

    #[test]
    fn two_dimensional_run() {
        let cfg = CounterexampleConfig { l: 2.5, p: 3.0, sigma: 0.5, dim: 2, k_max: 20 };
        let r = counterexample_run(&cfg).unwrap();
        assert!(r.passes(), "{r}");
    }
}
