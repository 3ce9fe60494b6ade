//! Discrete Lebesgue, weighted, mixed and Bessel-potential norms, and the
//! Muckenhoupt constant of power weights on the line.
//!
//! Spatial weights are centered at the grid origin and use the periodic
//! distance, i.e. the grid is read as the centered cell `[-pi, pi)^d`.
//! In one dimension each node gets the exact integral of the weight over its
//! dual cell, so the origin singularity is never sampled. In higher dimension
//! the weight is sampled at nodes with `|x|` clamped below by `epsilon`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{fractional_laplacian, GridField};

/// Which variable a power weight acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightAxis {
    /// `|x|^l` in space.
    Spatial,
    /// `|t - T/2|^l` in time.
    Temporal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    Constant,
    Power { exponent: f64, axis: WeightAxis, epsilon: f64 },
}

impl Weight {
    pub fn spatial(exponent: f64) -> Self {
        Weight::Power { exponent, axis: WeightAxis::Spatial, epsilon: 0.0 }
    }

    pub fn temporal(exponent: f64) -> Self {
        Weight::Power { exponent, axis: WeightAxis::Temporal, epsilon: 0.0 }
    }

    /// Local integrability on the grid: `l > -d` (spatial), `l > -1` (temporal).
    pub fn validate(&self, dim: usize) -> Result<()> {
        if let Weight::Power { exponent, axis, epsilon } = *self {
            let floor = match axis {
                WeightAxis::Spatial => -(dim as f64),
                WeightAxis::Temporal => -1.0,
            };
            if !(exponent > floor) || !exponent.is_finite() {
                return Err(Error::arg(format!("power weight exponent {exponent} must exceed {floor}")));
            }
            if !(epsilon >= 0.0) {
                return Err(Error::arg("weight truncation must be >= 0"));
            }
        }
        Ok(())
    }

    fn exponent(&self) -> f64 {
        match self {
            Weight::Constant => 0.0,
            Weight::Power { exponent, .. } => *exponent,
        }
    }
}

/// `int_a^b |x|^l dx` for `l > -1`.
pub fn power_integral(l: f64, a: f64, b: f64) -> f64 {
    let f = |x: f64| x.signum() * x.abs().powf(l + 1.0) / (l + 1.0);
    f(b) - f(a)
}

/// Node weights `W_j` with `||u||_{p,w}^p = sum_j |u_j|^p W_j`.
pub fn spatial_cell_weights(dim: usize, n: usize, w: &Weight) -> Result<Vec<f64>> {
    w.validate(dim)?;
    let h = 2.0 * PI / n as f64;
    let count = n.pow(dim as u32);
    let Weight::Power { exponent: l, epsilon, axis } = *w else {
        return Ok(vec![h.powi(dim as i32); count]);
    };
    if axis != WeightAxis::Spatial {
        return Err(Error::arg("temporal weight used as a spatial weight"));
    }
    let centered = |j: usize| -> f64 {
        let x = j as f64 * h;
        if x >= PI {
            x - 2.0 * PI
        } else {
            x
        }
    };
    if dim == 1 {
        return Ok((0..n)
            .map(|j| {
                if j == n / 2 {
                    // Cell around +-pi, split by periodicity.
                    2.0 * power_integral(l, PI - h / 2.0, PI)
                } else {
                    let c = centered(j);
                    power_integral(l, c - h / 2.0, c + h / 2.0)
                }
            })
            .collect());
    }
    let floor = if epsilon > 0.0 { epsilon } else { h / 2.0 };
    let vol = h.powi(dim as i32);
    Ok((0..count)
        .map(|idx| {
            let mut r2 = 0.0;
            let mut rest = idx;
            for _ in 0..dim {
                let c = centered(rest % n);
                r2 += c * c;
                rest /= n;
            }
            vol * r2.sqrt().max(floor).powf(l)
        })
        .collect())
}

/// `||u||_{L_p(w)}`; `p = inf` is the max norm (weights ignored).
pub fn lp_norm(u: &GridField, p: f64, w: &Weight) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::arg(format!("p = {p} must be >= 1")));
    }
    if p.is_infinite() {
        return Ok(u.max_abs());
    }
    let weights = spatial_cell_weights(u.dim(), u.n(), w)?;
    Ok(weighted_sum_pow(u.values(), &weights, p).powf(1.0 / p))
}

pub(crate) fn weighted_sum_pow(values: &[f64], weights: &[f64], p: f64) -> f64 {
    values.iter().zip(weights).map(|(v, w)| v.abs().powf(p) * w).sum()
}

/// `||(1 - Delta)^{sigma/2} u||_p`.
pub fn bessel_norm(u: &GridField, sigma: f64, p: f64) -> Result<f64> {
    lp_norm(&fractional_laplacian(u, sigma, true)?, p, &Weight::Constant)
}

/// Integral of a time weight over `[a, b]` inside `[0, horizon]`.
pub fn time_weight_integral(w: &Weight, horizon: f64, a: f64, b: f64) -> Result<f64> {
    w.validate(1)?;
    match *w {
        Weight::Constant => Ok(b - a),
        Weight::Power { exponent, axis, .. } => {
            if axis != WeightAxis::Temporal {
                return Err(Error::arg("spatial weight used as a time weight"));
            }
            let c = horizon / 2.0;
            Ok(power_integral(exponent, a - c, b - c))
        }
    }
}

/// Quadrature rule in time: node times and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Mixed norm `( sum_i tau_i ||g_i||_{p, w_space}^q )^{1/q}` over time nodes
/// with weights `tau_i`; `q = inf` takes the max over nodes.
pub fn mixed_norm(fields: &[GridField], rule_weights: &[f64], p: f64, q: f64, w_space: &Weight) -> Result<f64> {
    if fields.len() != rule_weights.len() {
        return Err(Error::arg("time rule and field count differ"));
    }
    if !(q >= 1.0) {
        return Err(Error::arg(format!("q = {q} must be >= 1")));
    }
    let Some(first) = fields.first() else {
        return Ok(0.0);
    };
    let sw = spatial_cell_weights(first.dim(), first.n(), w_space)?;
    let inner = |g: &GridField| -> f64 {
        if p.is_infinite() {
            g.max_abs()
        } else {
            weighted_sum_pow(g.values(), &sw, p).powf(1.0 / p)
        }
    };
    if q.is_infinite() {
        return Ok(fields.iter().map(inner).fold(0.0, f64::max));
    }
    Ok(fields.iter().zip(rule_weights).map(|(g, t)| t * inner(g).powf(q)).sum::<f64>().powf(1.0 / q))
}

/// `sup (avg w)(avg w^{1/(1-p)})^{p-1}` over intervals of a one-dimensional grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ApEstimate {
    pub constant: f64,
    pub argmax_center: f64,
    pub argmax_radius: f64,
    /// Set when the weight or its dual fails to be locally integrable at the
    /// origin, so the constant is infinite on intervals touching it.
    pub divergent: bool,
}

/// Interval family: centers on grid nodes of `[-L/2, L/2]` with spacing `h`,
/// radii log-spaced on `[h, L/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalGrid {
    pub centers: Vec<f64>,
    pub radii: Vec<f64>,
}

impl IntervalGrid {
    pub fn new(length: f64, nodes: usize, radii: usize) -> Self {
        let h = length / nodes as f64;
        let centers = (0..=nodes).map(|j| -length / 2.0 + j as f64 * h).collect();
        let radii = crate::measure::log_grid(h, length / 2.0, radii.max(1));
        IntervalGrid { centers, radii }
    }

    /// Default: the `2 pi` period with 128 nodes and 48 radii.
    pub fn default_periodic() -> Self {
        Self::new(2.0 * PI, 128, 48)
    }
}

/// Closed-form membership of `|x|^l` in `A_p(R^d)`: `-d < l < d(p-1)`.
pub fn power_weight_in_ap(l: f64, d: usize, p: f64) -> bool {
    let d = d as f64;
    l > -d && l < d * (p - 1.0)
}

/// Empirical `A_p` constant of a weight on the line.
pub fn muckenhoupt_constant(w: &Weight, p: f64, grid: &IntervalGrid) -> Result<ApEstimate> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::arg(format!("A_p needs p in (1, inf), got {p}")));
    }
    let l = w.exponent();
    let dual = l / (1.0 - p);
    let divergent = l <= -1.0 || dual <= -1.0;
    if divergent {
        return Ok(ApEstimate {
            constant: f64::INFINITY,
            argmax_center: 0.0,
            argmax_radius: grid.radii.first().copied().unwrap_or(0.0),
            divergent: true,
        });
    }
    let mut best = ApEstimate { constant: 0.0, argmax_center: 0.0, argmax_radius: 0.0, divergent: false };
    for &c in &grid.centers {
        for &r in &grid.radii {
            let (a, b) = (c - r, c + r);
            let avg = power_integral(l, a, b) / (2.0 * r);
            let avg_dual = power_integral(dual, a, b) / (2.0 * r);
            let v = avg * avg_dual.powf(p - 1.0);
            if v > best.constant {
                best.constant = v;
                best.argmax_center = c;
                best.argmax_radius = r;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_field_norms() {
        let u = GridField::constant(1, 64, 1.0).unwrap();
        assert_relative_eq!(lp_norm(&u, 2.0, &Weight::Constant).unwrap(), (2.0 * PI).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(lp_norm(&u, 1.0, &Weight::spatial(1.0)).unwrap(), PI * PI, max_relative = 1e-13);
        assert_eq!(lp_norm(&u.scale(-3.0), f64::INFINITY, &Weight::Constant).unwrap(), 3.0);
    }

    #[test]
    fn singular_weight_is_integrated_exactly() {
        // int_{-pi}^{pi} |x|^{-1/2} dx = 4 sqrt(pi)
        let u = GridField::constant(1, 32, 1.0).unwrap();
        assert_relative_eq!(lp_norm(&u, 1.0, &Weight::spatial(-0.5)).unwrap(), 4.0 * PI.sqrt(), max_relative = 1e-13);
        assert!(Weight::spatial(-1.0).validate(1).is_err());
        assert!(Weight::spatial(-1.5).validate(2).is_ok());
    }

    #[test]
    fn bessel_norm_examples() {
        let c = GridField::constant(1, 32, 2.0).unwrap();
        assert_relative_eq!(bessel_norm(&c, 0.7, 2.0).unwrap(), 2.0 * (2.0 * PI).sqrt(), max_relative = 1e-13);
        let u = GridField::from_fn(1, 32, |x| x[0].cos()).unwrap();
        assert_relative_eq!(bessel_norm(&u, 1.0, 2.0).unwrap(), 2f64.sqrt() * PI.sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn mixed_norm_of_separable_field() {
        let b = GridField::from_fn(1, 32, |x| 1.0 + x[0].sin()).unwrap();
        let a = [0.5, 2.0, -1.0];
        let tau = [0.25, 0.5, 0.25];
        let fields: Vec<GridField> = a.iter().map(|&s| b.scale(s)).collect();
        let got = mixed_norm(&fields, &tau, 3.0, 1.5, &Weight::Constant).unwrap();
        let time: f64 = a.iter().zip(&tau).map(|(s, t)| t * f64::abs(*s).powf(1.5)).sum::<f64>().powf(1.0 / 1.5);
        let space = lp_norm(&b, 3.0, &Weight::Constant).unwrap();
        assert_relative_eq!(got, time * space, max_relative = 1e-13);
    }

    #[test]
    fn time_weight_integral_matches_antiderivative() {
        let w = Weight::temporal(-0.5);
        // int_0^1 |t - 1/2|^{-1/2} dt = 2 * 2 (1/2)^{1/2}
        assert_relative_eq!(time_weight_integral(&w, 1.0, 0.0, 1.0).unwrap(), 4.0 * 0.5f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn ap_constants() {
        let g = IntervalGrid::default_periodic();
        let c = muckenhoupt_constant(&Weight::Constant, 2.0, &g).unwrap();
        assert_relative_eq!(c.constant, 1.0, max_relative = 1e-14);
        let e = muckenhoupt_constant(&Weight::spatial(0.5), 2.0, &g).unwrap();
        assert!(e.constant.is_finite() && e.constant > 1.0 && !e.divergent);
        assert!(e.argmax_center - e.argmax_radius <= 1e-12 && e.argmax_center + e.argmax_radius >= -1e-12);
        for l in [1.0, 1.5] {
            assert!(muckenhoupt_constant(&Weight::spatial(l), 2.0, &g).unwrap().divergent);
        }
        assert!(power_weight_in_ap(0.5, 1, 2.0) && !power_weight_in_ap(1.0, 1, 2.0));
    }

    #[test]
    fn ap_monotone_in_exponent() {
        let g = IntervalGrid::default_periodic();
        let p = 3.0;
        let mut last = 0.0;
        for k in 0..10 {
            let l = k as f64 * 0.19;
            let c = muckenhoupt_constant(&Weight::spatial(l), p, &g).unwrap().constant;
            assert!(c >= last, "l = {l}");
            last = c;
        }
    }

    proptest! {
        #[test]
        fn homogeneous_and_subadditive(seed in 0u64..500, c in -5.0f64..5.0, p in 1.0f64..6.0, l in -0.9f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = GridField::random_band_limited(1, 64, 10, &mut rng).unwrap();
            let v = GridField::random_band_limited(1, 64, 10, &mut rng).unwrap();
            let w = Weight::spatial(l);
            let nu = lp_norm(&u, p, &w).unwrap();
            prop_assert!((lp_norm(&u.scale(c), p, &w).unwrap() - c.abs() * nu).abs() <= 1e-12 * nu.max(1e-300) * (1.0 + c.abs()));
            let s = lp_norm(&u.add(&v).unwrap(), p, &w).unwrap();
            prop_assert!(s <= nu + lp_norm(&v, p, &w).unwrap() + 1e-12);
        }

        #[test]
        fn ap_matches_closed_form_criterion(l in -0.95f64..3.0, p in 1.2f64..4.0) {
            let g = IntervalGrid::new(2.0 * PI, 32, 12);
            let e = muckenhoupt_constant(&Weight::spatial(l), p, &g).unwrap();
            prop_assert_eq!(!e.divergent, power_weight_in_ap(l, 1, p));
        }
    }
}
