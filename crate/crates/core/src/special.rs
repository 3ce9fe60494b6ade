//! Special functions and closed-form constants shared by the measure, symbol
//! and verification modules.

use num_complex::Complex64;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::quad;

/// `1 - cos(x)` without cancellation for small `x`.
#[inline]
pub fn one_minus_cos(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

/// Surface area of the unit sphere in R^d.
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Volume of the unit ball in R^d.
pub fn ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    PI.powf(h) / gamma(h + 1.0)
}

/// Integral of |theta_1|^s over the unit sphere of R^d.
pub fn sphere_abs_moment(d: usize, s: f64) -> f64 {
    2.0 * PI.powf((d as f64 - 1.0) / 2.0) * gamma((s + 1.0) / 2.0) / gamma((d as f64 + s) / 2.0)
}

/// `int_{R^d} (1 - cos(e_1 . y)) |y|^{-d-sigma} dy`, so that the radial density
/// `|y|^{-d-sigma}` has symbol `-radial_symbol_constant(d, sigma) |xi|^sigma`.
pub fn radial_symbol_constant(d: usize, sigma: f64) -> f64 {
    PI.powf(d as f64 / 2.0) * gamma(1.0 - sigma / 2.0)
        / (sigma * 2f64.powf(sigma - 1.0) * gamma((d as f64 + sigma) / 2.0))
}

/// `int_0^inf (e^{i a rho} - 1 - i a rho 1_{sigma > 1}) rho^{-1-sigma} d rho` for `a > 0`,
/// `sigma != 1`: equals `Gamma(-sigma) a^sigma e^{-i pi sigma / 2}`.
pub fn one_sided_stable_symbol(a: f64, sigma: f64) -> Complex64 {
    debug_assert!(sigma != 1.0);
    if a == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let mag = gamma(-sigma) * a.abs().powf(sigma);
    let phase = -0.5 * PI * sigma * a.signum();
    Complex64::from_polar(1.0, phase) * mag
}

/// `(e^w - 1) / w`, switching to the three-term series `1 + w/2 + w^2/6` when
/// `|w| < 1e-6`.
pub fn phi1(w: Complex64) -> Complex64 {
    if w.norm() < 1e-6 {
        return Complex64::new(1.0, 0.0) + w / 2.0 + w * w / 6.0;
    }
    expm1_complex(w) / w
}

/// `e^w - 1` accurate for small `|w|`.
pub fn expm1_complex(w: Complex64) -> Complex64 {
    let (a, b) = (w.re, w.im);
    let ea = a.exp();
    let re = a.exp_m1() * b.cos() - one_minus_cos(b);
    Complex64::new(re, ea * b.sin())
}

/// Bessel function of the first kind `J_nu(z)`, `nu >= 0`, `z >= 0`.
///
/// Power series for `z <= 16` (alternating tail bounded by the first omitted
/// term once terms decrease), Hankel asymptotic expansion beyond.
pub fn bessel_j(nu: f64, z: f64) -> f64 {
    assert!(nu >= 0.0 && z >= 0.0);
    if z == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if z <= 16.0 {
        let (v, _) = bessel_j_series(nu, z);
        v
    } else {
        bessel_j_hankel(nu, z)
    }
}

/// Series value and a bound on truncation plus cancellation error.
pub fn bessel_j_series(nu: f64, z: f64) -> (f64, f64) {
    let h = 0.5 * z;
    let mut term = h.powf(nu) / gamma(nu + 1.0);
    let mut sum = term;
    let mut max_term = term.abs();
    let mut j = 0usize;
    loop {
        let jf = j as f64;
        let next = -term * h * h / ((jf + 1.0) * (jf + 1.0 + nu));
        j += 1;
        let decreasing = next.abs() < term.abs();
        term = next;
        sum += term;
        max_term = max_term.max(term.abs());
        if decreasing && term.abs() <= 1e-17 * sum.abs().max(1e-300) || j > 500 {
            break;
        }
    }
    (sum, term.abs() + 4.0 * f64::EPSILON * max_term)
}

fn bessel_j_hankel(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut ak = 1.0; // a_k(nu) / z^k
    let mut last = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let kf = k as f64;
            let odd = 2.0 * kf - 1.0;
            ak *= (mu - odd * odd) / (kf * 8.0 * z);
        }
        let mag = ak.abs();
        if mag > last {
            break;
        }
        last = mag;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * ak;
        } else {
            q += sign * ak;
        }
        if mag < 1e-17 {
            break;
        }
    }
    let chi = z - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Normalized Fourier transform of the unit-ball indicator in R^d at `|xi| = s`:
/// `Gamma(d/2 + 1) (2/s)^{d/2} J_{d/2}(s)`.
pub fn ball_indicator_transform(d: usize, s: f64) -> f64 {
    let s = s.abs();
    let nu = d as f64 / 2.0;
    if s <= 16.0 {
        // Normalized series starting at 1.
        let h2 = 0.25 * s * s;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut j = 0usize;
        loop {
            let jf = j as f64;
            let next = -term * h2 / ((jf + 1.0) * (jf + 1.0 + nu));
            j += 1;
            let decreasing = next.abs() < term.abs();
            term = next;
            sum += term;
            if decreasing && term.abs() <= 1e-17 * sum.abs().max(1e-300) || j > 500 {
                break;
            }
        }
        return sum;
    }
    match d {
        1 => s.sin() / s,
        3 => 3.0 * (s.sin() - s * s.cos()) / (s * s * s),
        _ => gamma(nu + 1.0) * (2.0 / s).powf(nu) * bessel_j_hankel(nu, s),
    }
}

/// `int_a^1 s^{e-1} ds` for `0 < a <= 1`, stable as `e -> 0`.
fn power_integral_to_one(a: f64, e: f64) -> f64 {
    let la = a.ln();
    if e == 0.0 {
        -la
    } else {
        -(e * la).exp_m1() / e
    }
}

/// `int_a^inf e^{i s} s^{-nu} ds` for `a > 0`, `nu > 0`.
pub fn oscillatory_tail(nu: f64, a: f64) -> Complex64 {
    const FAR: f64 = 40.0;
    assert!(a > 0.0 && nu > 0.0);
    if a >= FAR {
        return oscillatory_tail_asymptotic(nu, a);
    }
    let mut total = oscillatory_tail_asymptotic(nu, FAR);
    let lo = if a < 1.0 {
        // int_a^1 e^{is} s^{-nu} ds = sum_n i^n / n! int_a^1 s^{n - nu} ds
        let mut acc = Complex64::new(0.0, 0.0);
        let mut fact = 1.0;
        let mut ipow = Complex64::new(1.0, 0.0);
        for n in 0..40 {
            if n > 0 {
                fact *= n as f64;
                ipow *= Complex64::i();
            }
            let g = power_integral_to_one(a, n as f64 + 1.0 - nu);
            let t = ipow * (g / fact);
            acc += t;
            if n > 4 && t.norm() < 1e-18 * acc.norm() {
                break;
            }
        }
        total += acc;
        1.0
    } else {
        a
    };
    let n_panels = ((FAR - lo) / 2.0).ceil().max(1.0) as usize;
    let breaks: Vec<f64> = (0..=n_panels)
        .map(|i| lo + (FAR - lo) * i as f64 / n_panels as f64)
        .collect();
    let re = quad::integrate_panels(|s| s.cos() * s.powf(-nu), &breaks, 1e-15, 1e-14);
    let im = quad::integrate_panels(|s| s.sin() * s.powf(-nu), &breaks, 1e-15, 1e-14);
    total + Complex64::new(re.value, im.value)
}

// Repeated integration by parts:
// F(nu) = i e^{ia} a^{-nu} - i nu F(nu + 1).
fn oscillatory_tail_asymptotic(nu: f64, a: f64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut coef = Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, a) * a.powf(-nu);
    let mut last = f64::INFINITY;
    for k in 0..80 {
        let mag = coef.norm();
        if mag > last {
            break;
        }
        sum += coef;
        last = mag;
        if mag < 1e-18 * sum.norm() {
            break;
        }
        coef *= Complex64::new(0.0, -1.0) * ((nu + k as f64) / a);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_constants() {
        assert_relative_eq!(sphere_area(1), 2.0, epsilon = 1e-14);
        assert_relative_eq!(sphere_area(2), 2.0 * PI, epsilon = 1e-13);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, epsilon = 1e-13);
        assert_relative_eq!(ball_volume(3), 4.0 * PI / 3.0, epsilon = 1e-13);
        // int_{S^1} |cos phi| = 4
        assert_relative_eq!(sphere_abs_moment(2, 1.0), 4.0, epsilon = 1e-13);
        assert_relative_eq!(sphere_abs_moment(1, 0.7), 2.0, epsilon = 1e-13);
    }

    #[test]
    fn radial_constant_matches_one_sided_rays() {
        // In d=1 the radial density is two opposite rays.
        for &s in &[0.3, 0.5, 0.9, 1.2, 1.5, 1.9] {
            let two_rays = one_sided_stable_symbol(1.0, s) + one_sided_stable_symbol(-1.0, s);
            assert_relative_eq!(-two_rays.re, radial_symbol_constant(1, s), max_relative = 1e-12);
            assert!(two_rays.im.abs() < 1e-12);
        }
        assert_relative_eq!(radial_symbol_constant(1, 1.0), PI, max_relative = 1e-14);
    }

    #[test]
    fn bessel_half_integer_closed_forms() {
        for &z in &[0.1, 1.0, 5.0, 15.9, 16.1, 30.0, 200.0] {
            let j12 = (2.0 / (PI * z)).sqrt() * z.sin();
            let j32 = (2.0 / (PI * z)).sqrt() * (z.sin() / z - z.cos());
            assert!((bessel_j(0.5, z) - j12).abs() < 1e-11, "z={z}");
            assert!((bessel_j(1.5, z) - j32).abs() < 1e-11, "z={z}");
        }
    }

    #[test]
    fn bessel_integer_order_matches_integral_representation() {
        // J_n(z) = (1/pi) int_0^pi cos(n t - z sin t) dt
        for &n in &[0.0f64, 1.0] {
            for &z in &[0.5, 3.0, 10.0, 15.0, 17.0, 25.0, 60.0] {
                let q = quad::integrate(|t| (n * t - z * t.sin()).cos(), 0.0, PI, 1e-14, 1e-14);
                let r = q.value / PI;
                assert!((bessel_j(n, z) - r).abs() < 1e-10, "n={n} z={z}: {} vs {r}", bessel_j(n, z));
            }
        }
    }

    #[test]
    fn oscillatory_tail_against_direct_quadrature() {
        // Compare with direct integration to a far cutoff plus the asymptotic remainder.
        for &nu in &[1.5, 2.0, 2.5] {
            for &a in &[0.05, 0.7, 3.0, 39.0, 55.0] {
                let f = oscillatory_tail(nu, a);
                let cut = 400.0;
                let q_re = quad::integrate(|s| s.cos() * s.powf(-nu), a, cut, 1e-13, 1e-13);
                let q_im = quad::integrate(|s| s.sin() * s.powf(-nu), a, cut, 1e-13, 1e-13);
                let rem = oscillatory_tail_asymptotic(nu, cut);
                let direct = Complex64::new(q_re.value, q_im.value) + rem;
                assert!((f - direct).norm() < 1e-9 * (1.0 + direct.norm()), "nu={nu} a={a}: {f} vs {direct}");
            }
        }
    }

    #[test]
    fn phi1_series_and_direct_agree_near_threshold() {
        let w = Complex64::new(-3e-6, 2e-6);
        let direct = expm1_complex(w) / w;
        let series = Complex64::new(1.0, 0.0) + w / 2.0 + w * w / 6.0;
        assert!((direct - series).norm() < 1e-15);
        assert_relative_eq!(phi1(Complex64::new(-2.0, 0.0)).re, (1.0 - (-2f64).exp()) / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn ball_transform_small_argument() {
        for d in 1..=3 {
            assert_eq!(ball_indicator_transform(d, 0.0), 1.0);
        }
        assert!((ball_indicator_transform(1, PI)).abs() < 1e-15);
        let s = 20.0;
        let d2 = ball_indicator_transform(2, s);
        assert!((d2 - 2.0 * bessel_j(1.0, s) / s).abs() < 1e-14);
    }
}
