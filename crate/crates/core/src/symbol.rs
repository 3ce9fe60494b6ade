//! Fourier symbols `m(xi) = int (e^{i xi.y} - 1 - i xi.y^{(sigma)}) nu(dy)` of
//! the measures in [`crate::measure`], the upper/lower symbol bound
//! certificates, the normalized ball transform, and the Fourier conditions
//! on the tail measures used by the maximal-operator argument.
//!
//! The real part `-int (1 - cos xi.y) nu(dy)` does not depend on the
//! compensator. Symmetric measures are evaluated in that real form, so their
//! imaginary part is exactly zero.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::{dot, norm, LevyMeasure, TimeDependentMeasure, Variant};
use crate::quad;
use crate::special::{self, one_minus_cos};

/// How density parts are evaluated. Atomic parts are always summed directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaluationMode {
    /// Exact formulas per variant.
    ClosedForm,
    /// Atomic parts summed term by term over the expanded atom list with
    /// compensated summation; density parts in closed form.
    Series,
    /// Density parts by numerical quadrature of their radial and angular factors.
    Quadrature,
}

/// Symbol of a (possibly time-dependent) measure.
#[derive(Debug, Clone)]
pub struct Symbol {
    source: TimeDependentMeasure,
    mode: EvaluationMode,
    error_budget: f64,
}

impl Symbol {
    pub fn new(measure: &LevyMeasure) -> Self {
        Symbol {
            source: TimeDependentMeasure::constant(measure.clone(), 1.0).expect("unit horizon is valid"),
            mode: EvaluationMode::ClosedForm,
            error_budget: 1e-12,
        }
    }

    pub fn time_dependent(source: TimeDependentMeasure) -> Self {
        Symbol { source, mode: EvaluationMode::ClosedForm, error_budget: 1e-12 }
    }

    pub fn with_mode(mut self, mode: EvaluationMode) -> Self {
        self.mode = mode;
        self
    }

    /// Absolute tolerance handed to quadrature in [`EvaluationMode::Quadrature`].
    pub fn with_error_budget(mut self, budget: f64) -> Self {
        self.error_budget = budget;
        self
    }

    pub fn mode(&self) -> EvaluationMode {
        self.mode
    }

    pub fn source(&self) -> &TimeDependentMeasure {
        &self.source
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    pub fn order(&self) -> f64 {
        self.source.order()
    }

    /// `m(t, xi)`.
    pub fn eval(&self, t: f64, xi: &[f64]) -> Result<Complex64> {
        let m = self.source.at(t);
        eval_measure(m, xi, self.mode, self.error_budget)
    }
}

/// Symbol of a single measure at `xi`.
pub fn eval_measure(m: &LevyMeasure, xi: &[f64], mode: EvaluationMode, budget: f64) -> Result<Complex64> {
    if xi.len() != m.dim() {
        return Err(Error::arg(format!("xi has dimension {} (expected {})", xi.len(), m.dim())));
    }
    if xi.iter().any(|x| !x.is_finite()) {
        return Err(Error::arg("xi must be finite"));
    }
    let symmetric = m.is_symmetric();
    if m.order() == 1.0 && !symmetric {
        return Err(Error::rejected(
            "sigma = 1 requires a symmetric measure; the compensated symbol is not defined otherwise",
        ));
    }
    if norm(xi) == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let re = real_part(m, xi, mode, budget);
    let im = if symmetric { 0.0 } else { imag_part(m, xi, mode, budget) };
    Ok(Complex64::new(re, im))
}

// int_0^inf (1 - cos s) s^{-1-sigma} ds, numerically: [0,1] by adaptive
// quadrature, [1, inf) as 1/sigma - Re int_1^inf e^{is} s^{-1-sigma} ds.
fn half_line_real_integral(sigma: f64, budget: f64) -> f64 {
    let head = quad::integrate(|s| one_minus_cos(s) * s.powf(-1.0 - sigma), 0.0, 1.0, budget, 1e-14).value;
    head + 1.0 / sigma - special::oscillatory_tail(1.0 + sigma, 1.0).re
}

// int_0^inf (sin s - s 1_{sigma>1}) s^{-1-sigma} ds, sigma != 1.
fn half_line_imag_integral(sigma: f64, budget: f64) -> f64 {
    if sigma < 1.0 {
        let head = quad::integrate(|s| s.sin() * s.powf(-1.0 - sigma), 0.0, 1.0, budget, 1e-14).value;
        head + special::oscillatory_tail(1.0 + sigma, 1.0).im
    } else {
        // sin s - s = -(s - sin s), Taylor below 1e-4 to avoid cancellation.
        let f = |s: f64| {
            let d = if s < 1e-4 { s * s * s / 6.0 - s.powi(5) / 120.0 } else { s - s.sin() };
            -d * s.powf(-1.0 - sigma)
        };
        let head = quad::integrate(f, 0.0, 1.0, budget, 1e-14).value;
        head + special::oscillatory_tail(1.0 + sigma, 1.0).im - 1.0 / (sigma - 1.0)
    }
}

// int_{S^{d-1}} |theta_1|^s d theta by angular quadrature.
fn sphere_abs_moment_numeric(d: usize, s: f64, budget: f64) -> f64 {
    if d == 1 {
        return 2.0;
    }
    let inner = quad::integrate(
        |phi: f64| phi.cos().abs().powf(s) * phi.sin().powi(d as i32 - 2),
        0.0,
        PI,
        budget,
        1e-14,
    )
    .value;
    let lower_sphere = if d == 2 { 2.0 } else { special::sphere_area(d - 1) };
    lower_sphere * inner
}

fn real_part(m: &LevyMeasure, xi: &[f64], mode: EvaluationMode, budget: f64) -> f64 {
    let s = m.order();
    let d = m.dim();
    match m.variant() {
        Variant::RadialDensity { c } => match mode {
            EvaluationMode::Quadrature => {
                -c * norm(xi).powf(s) * half_line_real_integral(s, budget) * sphere_abs_moment_numeric(d, s, budget)
            }
            _ => -c * special::radial_symbol_constant(d, s) * norm(xi).powf(s),
        },
        Variant::AxisStable { c } => {
            let k = match mode {
                EvaluationMode::Quadrature => 2.0 * half_line_real_integral(s, budget),
                _ => special::radial_symbol_constant(1, s),
            };
            -c * k * xi.iter().map(|x| x.abs().powf(s)).sum::<f64>()
        }
        Variant::Polar { directions } => {
            let k = match mode {
                EvaluationMode::Quadrature => half_line_real_integral(s, budget),
                _ => 0.5 * special::radial_symbol_constant(1, s),
            };
            -k * directions.iter().map(|a| a.weight * dot(xi, &a.location).abs().powf(s)).sum::<f64>()
        }
        Variant::DyadicComb { k_min, k_max } => {
            if mode == EvaluationMode::ClosedForm {
                // Per axis, smallest scales first.
                -xi.iter()
                    .map(|x| {
                        (*k_min..=*k_max)
                            .map(|k| 2f64.powf(1.0 - k as f64 * s) * one_minus_cos(2f64.powi(k) * x))
                            .sum::<f64>()
                    })
                    .sum::<f64>()
            } else {
                let atoms = m.expand_atoms().expect("comb is atomic");
                -compensated_sum(atoms.iter().map(|a| a.weight * one_minus_cos(dot(xi, &a.location))))
            }
        }
        Variant::Atoms(atoms) => -compensated_sum(atoms.iter().map(|a| a.weight * one_minus_cos(dot(xi, &a.location)))),
        Variant::Sum(parts) => parts.iter().map(|p| real_part(p, xi, mode, budget)).sum(),
        Variant::Scaled { factor, inner } => factor * real_part(inner, xi, mode, budget),
    }
}

// Imaginary part with the compensator of order sigma (sigma != 1).
fn imag_part(m: &LevyMeasure, xi: &[f64], mode: EvaluationMode, budget: f64) -> f64 {
    let s = m.order();
    match m.variant() {
        Variant::RadialDensity { .. } | Variant::AxisStable { .. } | Variant::DyadicComb { .. } => 0.0,
        Variant::Polar { directions } => {
            let k = match mode {
                EvaluationMode::Quadrature => Some(half_line_imag_integral(s, budget)),
                _ => None,
            };
            directions
                .iter()
                .map(|a| {
                    let p = dot(xi, &a.location);
                    let v = match k {
                        Some(k) => k * p.signum() * p.abs().powf(s),
                        None => special::one_sided_stable_symbol(p, s).im,
                    };
                    a.weight * v
                })
                .sum()
        }
        Variant::Atoms(atoms) => compensated_sum(atoms.iter().map(|a| {
            let p = dot(xi, &a.location);
            let drift = if s > 1.0 { p } else { 0.0 };
            a.weight * (p.sin() - drift)
        })),
        Variant::Sum(parts) => parts.iter().map(|p| imag_part(p, xi, mode, budget)).sum(),
        Variant::Scaled { factor, inner } => factor * imag_part(inner, xi, mode, budget),
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Where a sup/inf over the frequency grid was attained.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperCertificate {
    /// `sup |m(xi)| / |xi|^sigma` over the grid (and schedule pieces).
    pub constant: f64,
    pub argmax: Vec<f64>,
    pub finite: bool,
}

/// Lower constants at or below this are treated as round-off zeros.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LowerCertificate {
    /// `inf -Re m(xi) / |xi|^sigma` over the grid (and schedule pieces).
    pub constant: f64,
    pub argmin: Vec<f64>,
    pub positive: bool,
    /// `min -Re m(xi) / (N(xi)/3)` over grid points with `N(xi) > 0`.
    pub chain_min_ratio: f64,
    /// `-Re m(xi) >= N(xi)/3` at every grid point.
    pub chain_holds: bool,
}

/// `sup_xi |m(t, xi)| / |xi|^sigma` over the grid and all schedule pieces.
pub fn certify_upper_bound(symbol: &Symbol, xi_grid: &[Vec<f64>]) -> Result<UpperCertificate> {
    let s = symbol.order();
    let mut best = 0.0;
    let mut argmax = xi_grid.first().cloned().unwrap_or_default();
    for piece in symbol.source.pieces() {
        for xi in xi_grid {
            let r = norm(xi);
            if r == 0.0 {
                continue;
            }
            let v = eval_measure(&piece.measure, xi, symbol.mode, symbol.error_budget)?.norm() / r.powf(s);
            if v > best {
                best = v;
                argmax = xi.clone();
            }
        }
    }
    Ok(UpperCertificate { constant: best, argmax, finite: best.is_finite() })
}

/// `inf_xi -Re m(t, xi) / |xi|^sigma` plus the pointwise chain `-Re m >= N/3`.
pub fn certify_lower_bound(symbol: &Symbol, xi_grid: &[Vec<f64>]) -> Result<LowerCertificate> {
    let s = symbol.order();
    let mut worst = f64::INFINITY;
    let mut argmin = xi_grid.first().cloned().unwrap_or_default();
    let mut chain = f64::INFINITY;
    let mut chain_holds = true;
    for piece in symbol.source.pieces() {
        for xi in xi_grid {
            let r = norm(xi);
            if r == 0.0 {
                continue;
            }
            let neg_re = -eval_measure(&piece.measure, xi, symbol.mode, symbol.error_budget)?.re;
            let v = neg_re / r.powf(s);
            if v < worst {
                worst = v;
                argmin = xi.clone();
            }
            let n = piece.measure.nondegeneracy(xi)?;
            // Relative slack for rounding in the two independent evaluations.
            if neg_re < n / 3.0 * (1.0 - 1e-12) {
                chain_holds = false;
            }
            if n > 0.0 {
                chain = chain.min(neg_re / (n / 3.0));
            }
        }
    }
    Ok(LowerCertificate {
        constant: worst,
        argmin,
        positive: worst > POSITIVITY_FLOOR && worst.is_finite(),
        chain_min_ratio: chain,
        chain_holds,
    })
}

/// One row of an exported symbol table.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolRow {
    pub xi: Vec<f64>,
    pub value: Complex64,
    pub ratio_upper: f64,
    pub ratio_lower: f64,
}

pub fn symbol_table(symbol: &Symbol, t: f64, xi_grid: &[Vec<f64>]) -> Result<Vec<SymbolRow>> {
    let s = symbol.order();
    xi_grid
        .iter()
        .map(|xi| {
            let value = symbol.eval(t, xi)?;
            let r = norm(xi).powf(s);
            let (up, lo) = if r > 0.0 { (value.norm() / r, -value.re / r) } else { (0.0, 0.0) };
            Ok(SymbolRow { xi: xi.clone(), value, ratio_upper: up, ratio_lower: lo })
        })
        .collect()
}

/// CSV with columns `xi_1..xi_d, re_m, im_m, ratio_upper, ratio_lower`.
pub fn write_symbol_table<W: Write>(out: W, rows: &[SymbolRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let d = rows.first().map(|r| r.xi.len()).unwrap_or(1);
    let mut header: Vec<String> = (1..=d).map(|i| format!("xi_{i}")).collect();
    header.extend(["re_m", "im_m", "ratio_upper", "ratio_lower"].map(String::from));
    w.write_record(&header)?;
    for r in rows {
        let mut rec: Vec<String> = r.xi.iter().map(|x| format!("{x:.17e}")).collect();
        for v in [r.value.re, r.value.im, r.ratio_upper, r.ratio_lower] {
            rec.push(format!("{v:.17e}"));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Normalized Fourier transform of the indicator of the ball of radius `r` in R^d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallTransform {
    pub radius: f64,
    pub dim: usize,
}

impl BallTransform {
    pub fn new(radius: f64, dim: usize) -> Result<Self> {
        if !(radius > 0.0) || dim == 0 {
            return Err(Error::arg("ball transform needs r > 0 and d >= 1"));
        }
        Ok(BallTransform { radius, dim })
    }

    /// Real-valued since the ball is symmetric.
    pub fn eval(&self, xi: &[f64]) -> f64 {
        special::ball_indicator_transform(self.dim, self.radius * norm(xi))
    }
}

/// Empirical constants in `|m_1(xi) - 1| <= N |xi|^2` (`|xi| <= 1`) and
/// `|m_1(xi)| <= N |xi|^{-(d+1)/2}` (`|xi| >= 1`) over radial magnitudes.
pub fn ball_transform_constants(dim: usize, magnitudes: &[f64]) -> (f64, f64) {
    let mut small: f64 = 0.0;
    let mut large: f64 = 0.0;
    for &s in magnitudes {
        let v = special::ball_indicator_transform(dim, s);
        if s <= 1.0 && s > 0.0 {
            small = small.max((v - 1.0).abs() / (s * s));
        }
        if s >= 1.0 {
            large = large.max(v.abs() * s.powf((dim as f64 + 1.0) / 2.0));
        }
    }
    (small, large)
}

/// `int_{|y| >= rho} e^{i xi.y} nu(dy)`.
pub fn tail_fourier(m: &LevyMeasure, rho: f64, xi: &[f64]) -> Complex64 {
    let s = m.order();
    let d = m.dim();
    let zero = Complex64::new(0.0, 0.0);
    // int_{rho}^inf e^{i a r} r^{-1-sigma} dr
    let ray = |a: f64| -> Complex64 {
        if a == 0.0 {
            return Complex64::new(rho.powf(-s) / s, 0.0);
        }
        let f = special::oscillatory_tail(1.0 + s, rho * a.abs()) * a.abs().powf(s);
        if a < 0.0 {
            f.conj()
        } else {
            f
        }
    };
    match m.variant() {
        Variant::RadialDensity { c } => {
            let k = norm(xi);
            if k == 0.0 {
                return Complex64::new(c * special::sphere_area(d) * rho.powf(-s) / s, 0.0);
            }
            if d == 1 {
                return Complex64::new(2.0 * c * ray(k).re, 0.0);
            }
            // Spherical average of the two-sided ray: |S^{d-2}| int_0^pi Re ray(k cos phi) sin^{d-2} phi.
            let lower = if d == 2 { 2.0 } else { special::sphere_area(d - 1) };
            let v = quad::integrate(
                |phi: f64| ray(k * phi.cos()).re * phi.sin().powi(d as i32 - 2),
                0.0,
                PI,
                1e-12 * rho.powf(-s),
                1e-10,
            )
            .value;
            Complex64::new(c * lower * v, 0.0)
        }
        Variant::AxisStable { c } => {
            let total: f64 = xi.iter().map(|x| 2.0 * ray(*x).re).sum();
            Complex64::new(c * total, 0.0)
        }
        Variant::Polar { directions } => directions
            .iter()
            .fold(zero, |acc, a| acc + ray(dot(xi, &a.location)) * a.weight),
        Variant::DyadicComb { .. } | Variant::Atoms(_) => {
            let atoms = m.expand_atoms().expect("atomic");
            let re = compensated_sum(
                atoms.iter().filter(|a| a.radius() >= rho).map(|a| a.weight * dot(xi, &a.location).cos()),
            );
            let im = compensated_sum(
                atoms.iter().filter(|a| a.radius() >= rho).map(|a| a.weight * dot(xi, &a.location).sin()),
            );
            Complex64::new(re, im)
        }
        Variant::Sum(parts) => parts.iter().fold(zero, |acc, p| acc + tail_fourier(p, rho, xi)),
        Variant::Scaled { factor, inner } => tail_fourier(inner, rho, xi) * *factor,
    }
}

/// Constants of the Fourier conditions on `mu_j = mu_j^1 * mu_j^2`, where
/// `mu_j^1` is the normalized ball of radius `2^{j+1}` and `mu_j^2` the
/// normalized tail of the surrogate `mu = nu + |y|^{-d-sigma} dy` beyond `kappa 2^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailConditionReport {
    pub exponent: f64,
    pub kappa: f64,
    /// Per `j`: `(j, sup |mu_j - 1| / |2^{j+1} xi|^a, sup |mu_j| |2^j xi|^a)`.
    pub per_scale: Vec<(i32, f64, f64)>,
    pub near_constant: f64,
    pub far_constant: f64,
    pub mass_at_zero_max_defect: f64,
    pub finite: bool,
}

impl TailConditionReport {
    /// Single constant covering both conditions for every scale.
    pub fn uniform_constant(&self) -> f64 {
        self.near_constant.max(self.far_constant)
    }
}

/// Default exponent `a = min(sigma/2, (d+1)/2)`.
pub fn default_tail_exponent(sigma: f64, d: usize) -> f64 {
    (sigma / 2.0).min((d as f64 + 1.0) / 2.0)
}

pub fn verify_tail_measure_conditions(
    m: &LevyMeasure,
    j_range: std::ops::RangeInclusive<i32>,
    xi_grid: &[Vec<f64>],
    a: Option<f64>,
    kappa: f64,
) -> Result<TailConditionReport> {
    tail_conditions(&m.with_radial_surrogate(), j_range, xi_grid, a, kappa)
}

/// Same as [`verify_tail_measure_conditions`] with `nu = 0`: the surrogate
/// is the bare radial density `|y|^{-d-sigma} dy`.
pub fn verify_pure_surrogate_conditions(
    dim: usize,
    sigma: f64,
    j_range: std::ops::RangeInclusive<i32>,
    xi_grid: &[Vec<f64>],
    a: Option<f64>,
    kappa: f64,
) -> Result<TailConditionReport> {
    tail_conditions(&LevyMeasure::radial(dim, sigma, 1.0)?, j_range, xi_grid, a, kappa)
}

fn tail_conditions(
    mu: &LevyMeasure,
    j_range: std::ops::RangeInclusive<i32>,
    xi_grid: &[Vec<f64>],
    a: Option<f64>,
    kappa: f64,
) -> Result<TailConditionReport> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::arg(format!("kappa = {kappa} must lie in (0, 1)")));
    }
    let d = mu.dim();
    let a = a.unwrap_or_else(|| default_tail_exponent(mu.order(), d));
    let zero_xi = vec![0.0; d];
    let mut per_scale = Vec::new();
    let mut mass_defect: f64 = 0.0;
    for j in j_range {
        let ball = BallTransform::new(2f64.powi(j + 1), d)?;
        let rho = kappa * 2f64.powi(j);
        let tail = mu.tail_mass(rho);
        let hat = |xi: &[f64]| tail_fourier(mu, rho, xi) / tail * ball.eval(xi);
        mass_defect = mass_defect.max((hat(&zero_xi) - 1.0).norm());
        let mut near: f64 = 0.0;
        let mut far: f64 = 0.0;
        for xi in xi_grid {
            let k = norm(xi);
            if k == 0.0 {
                continue;
            }
            let h = hat(xi);
            near = near.max((h - 1.0).norm() / (2f64.powi(j + 1) * k).powf(a));
            far = far.max(h.norm() * (2f64.powi(j) * k).powf(a));
        }
        per_scale.push((j, near, far));
    }
    let near_constant = per_scale.iter().map(|p| p.1).fold(0.0, f64::max);
    let far_constant = per_scale.iter().map(|p| p.2).fold(0.0, f64::max);
    Ok(TailConditionReport {
        exponent: a,
        kappa,
        per_scale,
        near_constant,
        far_constant,
        mass_at_zero_max_defect: mass_defect,
        finite: near_constant.is_finite() && far_constant.is_finite(),
    })
}

/// Blow-up of `|xi|^k |d^k/dxi_1^k sum_i |xi_i|^sigma| / |xi|^sigma` at
/// `xi = (eps, 1, 0, ..)` as `eps -> 0`, with `k` the smallest integer above
/// `sigma`. A negative exponent means the axis symbol fails the
/// Mikhlin-type derivative bounds near the coordinate hyperplanes. At
/// `sigma = 1` the higher derivatives vanish off the hyperplane and the
/// defect is a kink on it; `k = 1` is used and the exponent is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisSingularity {
    pub order: usize,
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    /// Slope of `ln value` against `ln eps`; tends to `sigma - k`.
    pub exponent: f64,
}

pub fn axis_singularity(sigma: f64, eps: &[f64]) -> Result<AxisSingularity> {
    if !(sigma > 0.0 && sigma < 2.0) {
        return Err(Error::arg(format!("sigma = {sigma} outside (0, 2)")));
    }
    if eps.len() < 2 || eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(Error::arg("need at least two eps values in (0, 1)"));
    }
    let k = if sigma == 1.0 { 1 } else { sigma.floor() as usize + 1 };
    let falling: f64 = (0..k).map(|j| sigma - j as f64).product();
    let values: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let r = (e * e + 1.0).sqrt();
            r.powi(k as i32) * falling.abs() * e.powf(sigma - k as f64) / r.powf(sigma)
        })
        .collect();
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let exponent = crate::maximal::least_squares_slope(&xs, &ys);
    Ok(AxisSingularity { order: k, eps: eps.to_vec(), values, exponent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{log_grid, Atom, CheckGrids};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn comb(d: usize, s: f64, lo: i32, hi: i32) -> LevyMeasure {
        LevyMeasure::dyadic_comb(d, s, lo, hi).unwrap()
    }

    fn eval(m: &LevyMeasure, xi: &[f64]) -> Complex64 {
        Symbol::new(m).eval(0.0, xi).unwrap()
    }

    #[test]
    fn radial_symbol_is_minus_pi() {
        let m = LevyMeasure::radial(1, 1.0, 1.0).unwrap();
        let v = eval(&m, &[1.0]);
        assert_relative_eq!(v.re, -PI, max_relative = 1e-14);
        assert_eq!(v.im, 0.0);
        assert_eq!(eval(&m, &[0.0]), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn comb_closed_form_matches_atom_sum() {
        let m = comb(1, 0.5, -40, 40);
        let v = eval(&m, &[1.0]);
        let mut brute = 0.0;
        for k in -40..=40 {
            let y = 2f64.powi(k);
            let w = 2f64.powf(-0.5 * k as f64);
            brute += w * ((y).cos() - 1.0) + w * ((-y).cos() - 1.0);
        }
        assert!((v.re - brute).abs() < 1e-10, "{} vs {}", v.re, brute);
        let series = Symbol::new(&m).with_mode(EvaluationMode::Series).eval(0.0, &[1.0]).unwrap();
        assert!((series.re - v.re).abs() < 1e-12);
    }

    #[test]
    fn quadrature_mode_agrees_with_closed_form() {
        for &s in &[0.4, 1.0, 1.6] {
            for d in 1..=3 {
                let m = LevyMeasure::radial(d, s, 0.8).unwrap();
                let xi: Vec<f64> = (0..d).map(|i| 0.7 + i as f64).collect();
                let a = eval(&m, &xi);
                let b = Symbol::new(&m).with_mode(EvaluationMode::Quadrature).eval(0.0, &xi).unwrap();
                assert_relative_eq!(a.re, b.re, max_relative = 1e-9);
            }
            let ax = LevyMeasure::axis_stable(2, s, 1.3).unwrap();
            let a = eval(&ax, &[0.3, -2.0]);
            let b = Symbol::new(&ax).with_mode(EvaluationMode::Quadrature).eval(0.0, &[0.3, -2.0]).unwrap();
            assert_relative_eq!(a.re, b.re, max_relative = 1e-9);
        }
    }

    #[test]
    fn polar_symbol_matches_quadrature_including_imaginary_part() {
        for &s in &[0.5, 1.5] {
            let m = LevyMeasure::polar(2, s, vec![Atom::new(vec![1.0, 0.5], 2.0), Atom::new(vec![-0.2, 1.0], 0.7)]).unwrap();
            let xi = [1.3, -0.4];
            let a = eval(&m, &xi);
            let b = Symbol::new(&m).with_mode(EvaluationMode::Quadrature).eval(0.0, &xi).unwrap();
            assert_relative_eq!(a.re, b.re, max_relative = 1e-9);
            assert_relative_eq!(a.im, b.im, max_relative = 1e-9);
            assert!(a.re < 0.0);
        }
    }

    #[test]
    fn asymmetric_unit_order_is_rejected() {
        let m = LevyMeasure::atoms(1, 1.0, vec![Atom::new(vec![1.0], 1.0)]).unwrap();
        assert!(matches!(Symbol::new(&m).eval(0.0, &[1.0]), Err(Error::Rejected(_))));
        let pair = LevyMeasure::atoms(1, 1.0, vec![Atom::new(vec![1.0], 1.0), Atom::new(vec![-1.0], 1.0)]).unwrap();
        assert!(Symbol::new(&pair).eval(0.0, &[1.0]).is_ok());
    }

    #[test]
    fn asymmetric_atoms_use_drift_compensator_above_one() {
        let m = LevyMeasure::atoms(1, 1.5, vec![Atom::new(vec![0.5], 2.0)]).unwrap();
        let xi = 3.0;
        let v = eval(&m, &[xi]);
        let exact = Complex64::new(0.0, xi * 0.5).exp() - 1.0 - Complex64::new(0.0, xi * 0.5);
        assert_relative_eq!(v.re, 2.0 * exact.re, max_relative = 1e-14);
        assert_relative_eq!(v.im, 2.0 * exact.im, max_relative = 1e-14);
    }

    #[test]
    fn upper_and_lower_constants_for_radial() {
        let m = LevyMeasure::radial(1, 1.0, 1.0).unwrap();
        let grid: Vec<Vec<f64>> = log_grid(2f64.powi(-10), 2f64.powi(10), 257).into_iter().map(|x| vec![x]).collect();
        let sym = Symbol::new(&m);
        let up = certify_upper_bound(&sym, &grid).unwrap();
        let lo = certify_lower_bound(&sym, &grid).unwrap();
        assert_relative_eq!(up.constant, PI, max_relative = 1e-12);
        assert_relative_eq!(lo.constant, PI, max_relative = 1e-12);
        assert!(lo.chain_holds);
    }

    #[test]
    fn axis_stable_lower_constant_at_unit_axis() {
        let m = LevyMeasure::axis_stable(2, 1.0, 1.0).unwrap();
        let sym = Symbol::new(&m);
        let lo = certify_lower_bound(&sym, &[vec![1.0, 0.0]]).unwrap();
        assert_relative_eq!(lo.constant, PI, max_relative = 1e-13);
    }

    #[test]
    fn single_pair_fails_lower_bound() {
        let m = LevyMeasure::atoms(1, 0.5, vec![Atom::new(vec![1.0], 1.0), Atom::new(vec![-1.0], 1.0)]).unwrap();
        let lo = certify_lower_bound(&Symbol::new(&m), &[vec![2.0 * PI]]).unwrap();
        assert!(lo.constant.abs() < 1e-15);
        assert!(!lo.positive);
    }

    #[test]
    fn chain_holds_for_examples() {
        let g = CheckGrids::default_for(2);
        for m in [
            comb(2, 1.0, -30, 30),
            LevyMeasure::axis_stable(2, 0.7, 1.0).unwrap(),
            LevyMeasure::radial(2, 1.5, 2.0).unwrap(),
        ] {
            let lo = certify_lower_bound(&Symbol::new(&m), &g.frequencies).unwrap();
            assert!(lo.chain_holds && lo.positive, "{m}");
        }
    }

    #[test]
    fn comb_upper_ratio_is_octave_periodic() {
        let m = comb(1, 1.0, -60, 60);
        for &x in &[0.3f64, 1.0, 5.5] {
            let a = eval(&m, &[x]).norm() / x;
            let b = eval(&m, &[2.0 * x]).norm() / (2.0 * x);
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn ball_transform_examples() {
        let b = BallTransform::new(1.0, 1).unwrap();
        assert!(b.eval(&[PI]).abs() < 1e-15);
        for d in 1..=3 {
            assert_eq!(BallTransform::new(2.0, d).unwrap().eval(&vec![0.0; d]), 1.0);
        }
        let b2 = BallTransform::new(2.0, 1).unwrap();
        assert_relative_eq!(b2.eval(&[0.7]), b.eval(&[1.4]), max_relative = 1e-15);
        let mags = log_grid(1e-3, 1e3, 301);
        for d in 1..=3 {
            let (n1, n2) = ball_transform_constants(d, &mags);
            assert!(n1.is_finite() && n1 > 0.0 && n2.is_finite() && n2 > 0.0);
        }
    }

    #[test]
    fn tail_fourier_at_zero_is_tail_mass() {
        for m in [LevyMeasure::radial(2, 0.8, 1.0).unwrap(), comb(1, 0.5, -5, 5)] {
            let z = vec![0.0; m.dim()];
            assert_relative_eq!(tail_fourier(&m, 0.3, &z).re, m.tail_mass(0.3), max_relative = 1e-12);
        }
    }

    #[test]
    fn radial_tail_fourier_matches_direct_quadrature() {
        // d = 1: 2 int_rho^inf cos(k y) y^{-1-s} dy
        let (s, rho, k) = (0.7, 0.5, 3.0);
        let m = LevyMeasure::radial(1, s, 1.0).unwrap();
        let got = tail_fourier(&m, rho, &[k]).re;
        let head = quad::integrate(|y: f64| (k * y).cos() * y.powf(-1.0 - s), rho, 200.0, 1e-13, 1e-13).value;
        let tail = (special::oscillatory_tail(1.0 + s, 200.0 * k) * k.powf(s)).re;
        assert_relative_eq!(got, 2.0 * (head + tail), max_relative = 1e-8);
        // d = 3 and d = 2 radial symmetry: only |xi| matters
        let m3 = LevyMeasure::radial(3, s, 1.0).unwrap();
        let a = tail_fourier(&m3, rho, &[k, 0.0, 0.0]);
        let b = tail_fourier(&m3, rho, &[0.0, 0.0, k]);
        assert_relative_eq!(a.re, b.re, max_relative = 1e-8);
    }

    #[test]
    fn tail_conditions_for_pure_surrogate_and_comb() {
        let grid: Vec<Vec<f64>> = log_grid(2f64.powi(-10), 2f64.powi(10), 65).into_iter().map(|x| vec![x]).collect();
        let rep = verify_pure_surrogate_conditions(1, 1.0, 0..=0, &grid, None, 0.5).unwrap();
        assert!(rep.finite && rep.mass_at_zero_max_defect < 1e-12);
        let c = comb(1, 0.5, -30, 30);
        let rep = verify_tail_measure_conditions(&c, -5..=5, &grid, None, 0.5).unwrap();
        assert!(rep.finite && rep.mass_at_zero_max_defect < 1e-12);
    }

    proptest! {
        #[test]
        fn hermitian_and_linear(x in -20.0f64..20.0, y in -20.0f64..20.0, a in 0.1f64..4.0) {
            let m1 = LevyMeasure::atoms(2, 1.4, vec![Atom::new(vec![0.3, 1.0], 0.5), Atom::new(vec![-2.0, 0.1], 1.5)]).unwrap();
            let m2 = LevyMeasure::polar(2, 1.4, vec![Atom::new(vec![1.0, 1.0], 1.0)]).unwrap();
            let v = eval(&m1, &[x, y]);
            let w = eval(&m1, &[-x, -y]);
            prop_assert!((v - w.conj()).norm() <= 1e-12 * (1.0 + v.norm()));
            let s = LevyMeasure::sum(vec![m1.clone(), m2.clone()]).unwrap();
            let sum = eval(&s, &[x, y]);
            let parts = eval(&m1, &[x, y]) + eval(&m2, &[x, y]);
            prop_assert!((sum - parts).norm() <= 1e-12 * (1.0 + parts.norm()));
            let sc = eval(&LevyMeasure::scaled(a, m2.clone()).unwrap(), &[x, y]);
            prop_assert!((sc - eval(&m2, &[x, y]) * a).norm() <= 1e-12 * (1.0 + sc.norm()));
        }

        #[test]
        fn symmetric_measures_are_real(x in -50.0f64..50.0, s in 0.1f64..1.9) {
            for m in [comb(1, s, -10, 10), LevyMeasure::radial(1, s, 1.0).unwrap()] {
                prop_assert_eq!(eval(&m, &[x]).im, 0.0);
            }
        }

        #[test]
        fn series_equals_atom_sum(x in -30.0f64..30.0, s in 0.1f64..1.9) {
            let m = comb(1, s, -6, 6);
            let v = Symbol::new(&m).with_mode(EvaluationMode::Series).eval(0.0, &[x]).unwrap();
            let brute: f64 = m.expand_atoms().unwrap().iter().map(|a| a.weight * ((x * a.location[0]).cos() - 1.0)).sum();
            prop_assert!((v.re - brute).abs() <= 1e-10 * (1.0 + brute.abs()));
        }
    }

    #[test]
    fn axis_singularity_exponent() {
        let eps: Vec<f64> = (4..12).map(|k| 2f64.powi(-k)).collect();
        for (s, k) in [(0.5, 1), (1.0, 1), (1.5, 2)] {
            let a = axis_singularity(s, &eps).unwrap();
            assert_eq!(a.order, k);
            assert!((a.exponent - (s - k as f64)).abs() < 1e-3, "{a:?}");
        }
        assert!(axis_singularity(2.0, &eps).is_err());
    }
}
