//! Tail operator, measure-weighted maximal operator, and parabolic maximal
//! functions on the periodic grid.
//!
//! Atom offsets are snapped to the nearest grid node; whether an atom counts
//! as "beyond `kappa R`" is decided by its true radius. Balls are open:
//! lattice offsets `z` with `|z| < R`, taken in the periodic extension, so a
//! ball larger than the torus covers some cells more than once.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::measure::{LevyMeasure, Variant};
use crate::norms::lp_norm;
use crate::norms::Weight;

/// `2^k * 2 pi` for `k = -8..=3`.
pub fn default_radius_grid() -> Vec<f64> {
    (-8..=3).map(|k| 2f64.powi(k) * 2.0 * PI).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailOperatorSpec {
    pub measure: LevyMeasure,
    pub p: f64,
    pub kappa: f64,
    pub radius: f64,
}

impl TailOperatorSpec {
    pub fn validate(&self) -> Result<()> {
        check_kappa(self.kappa)?;
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::arg(format!("ball radius {} must be positive", self.radius)));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::arg(format!("exponent p = {} must lie in [1, inf)", self.p)));
        }
        Ok(())
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::arg(format!("aperture kappa = {kappa} must lie in (0, 1)")));
    }
    Ok(())
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::arg("radius grid must be nonempty, positive and finite"));
    }
    Ok(())
}

fn flat_index(coords: &[i64], n: usize) -> usize {
    coords.iter().fold(0usize, |acc, &c| acc * n + c.rem_euclid(n as i64) as usize)
}

/// `S[x] = sum_q k[q] g[x + q]` on the periodic lattice.
fn correlate(g: &[f64], k: &[f64], d: usize, n: usize) -> Result<Vec<f64>> {
    let len = g.len();
    let support: Vec<(usize, f64)> = k.iter().copied().enumerate().filter(|(_, w)| *w != 0.0).collect();
    if support.len() * len <= 1 << 22 {
        let offsets: Vec<(Vec<usize>, f64)> = support
            .iter()
            .map(|&(q, w)| {
                let mut c = vec![0usize; d];
                let mut r = q;
                for a in (0..d).rev() {
                    c[a] = r % n;
                    r /= n;
                }
                (c, w)
            })
            .collect();
        let mut out = vec![0.0; len];
        let mut x = vec![0usize; d];
        for (idx, slot) in out.iter_mut().enumerate() {
            let mut r = idx;
            for a in (0..d).rev() {
                x[a] = r % n;
                r /= n;
            }
            let mut acc = 0.0;
            for (q, w) in &offsets {
                let j = (0..d).fold(0usize, |j, a| j * n + (x[a] + q[a]) % n);
                acc += w * g[j];
            }
            *slot = acc;
        }
        return Ok(out);
    }
    let gh = GridField::new(d, n, g.to_vec())?.spectrum();
    let kh = GridField::new(d, n, k.to_vec())?.spectrum();
    let prod: Vec<Complex64> = gh.iter().zip(&kh).map(|(a, b)| a * b.conj()).collect();
    // Inputs are nonnegative here; clip transform round-off.
    Ok(GridField::from_spectrum(d, n, prod)?.into_values().into_iter().map(|v| v.max(0.0)).collect())
}

/// Multiplicity of each residue among lattice offsets `z` with `|z| < radius`.
pub fn ball_count_kernel(d: usize, n: usize, radius: f64) -> Vec<f64> {
    let h = 2.0 * PI / n as f64;
    let mut k = vec![0.0; n.pow(d as u32)];
    let rr = (radius / h).powi(2);
    let mut coords = vec![0i64; d];
    fn walk(axis: usize, left: f64, coords: &mut Vec<i64>, n: usize, k: &mut [f64]) {
        if axis == coords.len() {
            k[flat_index(coords, n)] += 1.0;
            return;
        }
        // Offsets with j^2 < left on this axis.
        let jmax = left.sqrt().ceil() as i64;
        for j in -jmax..=jmax {
            let rest = left - (j * j) as f64;
            if rest > 0.0 {
                coords[axis] = j;
                walk(axis + 1, rest, coords, n, k);
            }
        }
    }
    walk(0, rr, &mut coords, n, &mut k);
    k
}

/// `h^d * (number of lattice offsets in the open ball)`.
pub fn discrete_ball_volume(d: usize, n: usize, radius: f64) -> f64 {
    let h = 2.0 * PI / n as f64;
    ball_count_kernel(d, n, radius).iter().sum::<f64>() * h.powi(d as i32)
}

/// `x -> int_{B_radius} g(x + z) dz` as a lattice sum.
fn ball_integrals(g: &[f64], d: usize, n: usize, radius: f64) -> Result<Vec<f64>> {
    let h = 2.0 * PI / n as f64;
    let cell = h.powi(d as i32);
    Ok(correlate(g, &ball_count_kernel(d, n, radius), d, n)?.into_iter().map(|v| v * cell).collect())
}

// One-sided density a |y|^{-1-sigma} on y > 0, integrated over the cells
// [(j - 1/2)h, (j + 1/2)h) ∩ [rho0, inf), summed over j ≡ q (mod n).
fn periodized_half_line(n: usize, rho0: f64, a: f64, sigma: f64) -> Vec<f64> {
    let h = 2.0 * PI / n as f64;
    let g = |y: f64| a / sigma * y.powf(-sigma);
    let g1 = |y: f64| -a * y.powf(-sigma - 1.0);
    let g3 = |y: f64| -a * (sigma + 1.0) * (sigma + 2.0) * y.powf(-sigma - 3.0);
    let cell_mass = |lo: f64, hi: f64| if hi <= rho0 { 0.0 } else { g(lo.max(rho0)) - g(hi) };
    let wraps = (rho0 / (2.0 * PI)).ceil() as usize + 32;
    let mut out = vec![0.0; n];
    for (q, slot) in out.iter_mut().enumerate() {
        let lo0 = (q as f64 - 0.5) * h;
        let mut acc = 0.0;
        for m in 0..wraps {
            let lo = lo0 + 2.0 * PI * m as f64;
            acc += cell_mass(lo, lo + h);
        }
        // Euler-Maclaurin for the remaining wraps.
        let a0 = lo0 + 2.0 * PI * wraps as f64;
        let integral = if (sigma - 1.0).abs() < 1e-14 {
            a * (h / a0).ln_1p()
        } else {
            a / (sigma * (1.0 - sigma)) * a0.powf(1.0 - sigma) * ((1.0 - sigma) * (h / a0).ln_1p()).exp_m1()
        } / (2.0 * PI);
        let f0 = g(a0) - g(a0 + h);
        let f1 = 2.0 * PI * (g1(a0) - g1(a0 + h));
        let f3 = (2.0 * PI).powi(3) * (g3(a0) - g3(a0 + h));
        acc += integral + 0.5 * f0 - f1 / 12.0 + f3 / 720.0;
        *slot = acc;
    }
    out
}

/// Lattice kernel of `nu` restricted to `{|y| >= rho0}`: atoms snapped to the
/// nearest node, densities (d = 1 only) integrated exactly per cell and
/// periodized.
pub fn tail_kernel(m: &LevyMeasure, n: usize, rho0: f64) -> Result<Vec<f64>> {
    let d = m.dim();
    let mut k = vec![0.0; n.pow(d as u32)];
    add_tail_kernel(m, 1.0, n, rho0, &mut k)?;
    Ok(k)
}

fn add_tail_kernel(m: &LevyMeasure, factor: f64, n: usize, rho0: f64, k: &mut [f64]) -> Result<()> {
    let d = m.dim();
    let h = 2.0 * PI / n as f64;
    let (right, left) = match m.variant() {
        Variant::Sum(parts) => {
            for p in parts {
                add_tail_kernel(p, factor, n, rho0, k)?;
            }
            return Ok(());
        }
        Variant::Scaled { factor: s, inner } => return add_tail_kernel(inner, factor * s, n, rho0, k),
        Variant::DyadicComb { .. } | Variant::Atoms(_) => {
            for a in m.expand_atoms().expect("atomic") {
                if a.radius() >= rho0 {
                    let c: Vec<i64> = a.location.iter().map(|y| (y / h).round() as i64).collect();
                    k[flat_index(&c, n)] += factor * a.weight;
                }
            }
            return Ok(());
        }
        _ if d != 1 => {
            return Err(Error::rejected(format!(
                "tail kernels for density measures are implemented for d = 1 only (got {m})"
            )))
        }
        Variant::RadialDensity { c } | Variant::AxisStable { c } => (*c, *c),
        Variant::Polar { directions } => directions.iter().fold((0.0, 0.0), |(r, l), a| {
            if a.location[0] > 0.0 {
                (r + a.weight, l)
            } else {
                (r, l + a.weight)
            }
        }),
    };
    let s = m.order();
    if right > 0.0 {
        for (q, v) in periodized_half_line(n, rho0, right, s).into_iter().enumerate() {
            k[q] += factor * v;
        }
    }
    if left > 0.0 {
        for (q, v) in periodized_half_line(n, rho0, left, s).into_iter().enumerate() {
            k[(n - q) % n] += factor * v;
        }
    }
    Ok(())
}

/// `kappa^sigma R^{sigma - d/p} sum_{|y_j| >= kappa R} w_j ||u||_{L_p(B_R(x + y_j))}` at every node.
pub fn tail_operator_field(u: &GridField, spec: &TailOperatorSpec) -> Result<GridField> {
    spec.validate()?;
    let (d, n) = (u.dim(), u.n());
    if spec.measure.dim() != d {
        return Err(Error::arg("measure and field dimensions differ"));
    }
    let p = spec.p;
    let upow: Vec<f64> = u.values().iter().map(|v| v.abs().powf(p)).collect();
    let local: Vec<f64> = ball_integrals(&upow, d, n, spec.radius)?.into_iter().map(|v| v.powf(1.0 / p)).collect();
    let kernel = tail_kernel(&spec.measure, n, spec.kappa * spec.radius)?;
    let s = spec.measure.order();
    let scale = spec.kappa.powf(s) * spec.radius.powf(s - d as f64 / p);
    GridField::new(d, n, correlate(&local, &kernel, d, n)?.into_iter().map(|v| v * scale).collect())
}

/// Tail operator at one node (flat index).
pub fn tail_operator(u: &GridField, spec: &TailOperatorSpec, node: usize) -> Result<f64> {
    if node >= u.len() {
        return Err(Error::arg(format!("node {node} outside a grid of {} points", u.len())));
    }
    Ok(tail_operator_field(u, spec)?.values()[node])
}

/// `sup_R kappa^sigma R^{sigma - d} sum_{|y_j| >= kappa R} w_j int_{B_R} |g(x + y_j + z)| dz`
/// over the radius grid; a lower bound for the supremum over all `R > 0`.
pub fn maximal_t(g: &GridField, m: &LevyMeasure, kappa: f64, radii: &[f64]) -> Result<GridField> {
    check_kappa(kappa)?;
    check_radii(radii)?;
    let (d, n) = (g.dim(), g.n());
    if m.dim() != d {
        return Err(Error::arg("measure and field dimensions differ"));
    }
    let s = m.order();
    let abs: Vec<f64> = g.values().iter().map(|v| v.abs()).collect();
    let mut best = vec![0.0f64; g.len()];
    for &r in radii {
        let kernel = tail_kernel(m, n, kappa * r)?;
        if kernel.iter().all(|w| *w == 0.0) {
            continue;
        }
        let balls = ball_integrals(&abs, d, n, r)?;
        let scale = kappa.powf(s) * r.powf(s - d as f64);
        for (b, v) in best.iter_mut().zip(correlate(&balls, &kernel, d, n)?) {
            *b = b.max(scale * v);
        }
    }
    GridField::new(d, n, best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailMaximalReport {
    /// Smallest `N` with `T^R u <= N (maximal(|u|^p))^{1/p}` at every node and grid radius.
    pub empirical_constant: f64,
    /// `Lambda^{1 - 1/p}`, from Hölder against the tail mass.
    pub proof_constant: f64,
    pub lambda: f64,
    pub holds: bool,
}

pub fn verify_tail_vs_maximal(u: &GridField, m: &LevyMeasure, p: f64, kappa: f64, radii: &[f64]) -> Result<TailMaximalReport> {
    check_radii(radii)?;
    let upow = u.map(|v| v.abs().powf(p));
    let maximal = maximal_t(&upow, m, kappa, radii)?;
    let mut worst: f64 = 0.0;
    for &r in radii {
        let spec = TailOperatorSpec { measure: m.clone(), p, kappa, radius: r };
        let tail = tail_operator_field(u, &spec)?;
        for (t, mx) in tail.values().iter().zip(maximal.values()) {
            if *t == 0.0 {
                continue;
            }
            worst = worst.max(if *mx > 0.0 { t / mx.powf(1.0 / p) } else { f64::INFINITY });
        }
    }
    let lambda = m.lambda_exact();
    let proof = lambda.powf(1.0 - 1.0 / p);
    Ok(TailMaximalReport { empirical_constant: worst, proof_constant: proof, lambda, holds: worst <= proof * (1.0 + 1e-12) })
}

/// `||maximal_t u||_p / ||u||_p` over an ensemble for each aperture.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundednessReport {
    pub p: f64,
    pub kappas: Vec<f64>,
    /// `ratios[i][j]`: aperture `i`, field `j`.
    pub ratios: Vec<Vec<f64>>,
    pub max_ratio: Vec<f64>,
    /// Least-squares slope of `ln(max ratio)` against `ln kappa`.
    pub slope: f64,
    pub flat: bool,
}

pub const TREND_TOLERANCE: f64 = 0.2;

impl BoundednessReport {
    pub fn overall_max(&self) -> f64 {
        self.max_ratio.iter().copied().fold(0.0, f64::max)
    }

    /// Columns `kappa, field_id, ratio`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["kappa", "field_id", "ratio"])?;
        for (k, row) in self.kappas.iter().zip(&self.ratios) {
            for (j, r) in row.iter().enumerate() {
                out.write_record(&[format!("{k:.17e}"), j.to_string(), format!("{r:.17e}")])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

pub(crate) fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn maximal_boundedness(
    m: &LevyMeasure,
    p: f64,
    kappas: &[f64],
    ensemble: &[GridField],
    radii: &[f64],
) -> Result<BoundednessReport> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::arg(format!("exponent p = {p} must lie in (1, inf)")));
    }
    if kappas.len() < 2 || ensemble.is_empty() {
        return Err(Error::arg("need at least two apertures and one field"));
    }
    let mut ratios = Vec::with_capacity(kappas.len());
    for &k in kappas {
        let row = ensemble
            .iter()
            .map(|u| {
                let base = lp_norm(u, p, &Weight::Constant)?;
                if base == 0.0 {
                    return Err(Error::arg("ensemble contains a zero field"));
                }
                Ok(lp_norm(&maximal_t(u, m, k, radii)?, p, &Weight::Constant)? / base)
            })
            .collect::<Result<Vec<f64>>>()?;
        ratios.push(row);
    }
    let max_ratio: Vec<f64> = ratios.iter().map(|r| r.iter().copied().fold(0.0, f64::max)).collect();
    let lx: Vec<f64> = kappas.iter().map(|k| k.ln()).collect();
    let ly: Vec<f64> = max_ratio.iter().map(|r| r.ln()).collect();
    let slope = least_squares_slope(&lx, &ly);
    Ok(BoundednessReport {
        p,
        kappas: kappas.to_vec(),
        ratios,
        max_ratio,
        slope,
        flat: slope.abs() <= TREND_TOLERANCE && slope.is_finite(),
    })
}

/// Samples on time cells `[i dt, (i+1) dt)` times the spatial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeSamples {
    pub dt: f64,
    pub fields: Vec<GridField>,
}

impl SpaceTimeSamples {
    pub fn new(dt: f64, fields: Vec<GridField>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || fields.is_empty() {
            return Err(Error::arg("need dt > 0 and at least one time slice"));
        }
        for f in &fields[1..] {
            fields[0].check_same_grid(f)?;
        }
        Ok(SpaceTimeSamples { dt, fields })
    }
}

/// One member of the cylinder family: spatial cells within `half_width`
/// (Euclidean, in cell units) of the center, over `steps` time cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CylinderShape {
    pub half_width: usize,
    pub steps: usize,
}

/// Half-widths `0, 1, 2, 4, ... <= n/2`; a half-width `r` has radius
/// `R = (r + 1/2) h` and lasts `max(1, round(R^sigma / dt))` time cells.
/// Shapes longer than the record are dropped.
pub fn cylinder_family(g: &SpaceTimeSamples, sigma: f64) -> Vec<CylinderShape> {
    let n = g.fields[0].n();
    let h = 2.0 * PI / n as f64;
    let mut widths = vec![0usize];
    let mut w = 1;
    while w <= n / 2 {
        widths.push(w);
        w *= 2;
    }
    widths
        .into_iter()
        .map(|r| {
            let radius = (r as f64 + 0.5) * h;
            CylinderShape { half_width: r, steps: ((radius.powf(sigma) / g.dt).round() as usize).max(1) }
        })
        .filter(|c| c.steps <= g.fields.len())
        .collect()
}

fn cell_ball(d: usize, half_width: usize) -> Vec<Vec<i64>> {
    let r = half_width as i64;
    let mut out = Vec::new();
    let mut c = vec![-r; d];
    loop {
        if c.iter().map(|x| x * x).sum::<i64>() <= r * r {
            out.push(c.clone());
        }
        let mut a = d;
        loop {
            if a == 0 {
                return out;
            }
            a -= 1;
            if c[a] < r {
                c[a] += 1;
                break;
            }
            c[a] = -r;
        }
    }
}

fn coords_of(idx: usize, d: usize, n: usize) -> Vec<i64> {
    let mut c = vec![0i64; d];
    let mut r = idx;
    for a in (0..d).rev() {
        c[a] = (r % n) as i64;
        r /= n;
    }
    c
}

fn shifted(x: &[i64], o: &[i64], n: usize) -> usize {
    let c: Vec<i64> = x.iter().zip(o).map(|(a, b)| a + b).collect();
    flat_index(&c, n)
}

/// Parabolic maximal function: at each sample, the largest average of `|g|`
/// over a family cylinder `(top - steps, top] x B(center)` containing it.
pub fn parabolic_maximal(g: &SpaceTimeSamples, sigma: f64) -> Result<Vec<GridField>> {
    if !(sigma > 0.0 && sigma < 2.0) {
        return Err(Error::arg(format!("sigma = {sigma} must lie in (0, 2)")));
    }
    let (d, n) = (g.fields[0].dim(), g.fields[0].n());
    let nt = g.fields.len();
    let len = g.fields[0].len();
    let mut best = vec![vec![0.0f64; len]; nt];
    for shape in cylinder_family(g, sigma) {
        let ball = cell_ball(d, shape.half_width);
        // Spatial ball sums per slice, then running time sums.
        let mut prefix = vec![vec![0.0; len]; nt + 1];
        for i in 0..nt {
            let vals = g.fields[i].values();
            for x in 0..len {
                let xc = coords_of(x, d, n);
                let s: f64 = ball.iter().map(|o| vals[shifted(&xc, o, n)].abs()).sum();
                prefix[i + 1][x] = prefix[i][x] + s;
            }
        }
        let denom = (shape.steps * ball.len()) as f64;
        let l = shape.steps;
        let avg: Vec<Vec<f64>> = (l - 1..nt)
            .map(|top| (0..len).map(|c| (prefix[top + 1][c] - prefix[top + 1 - l][c]) / denom).collect())
            .collect();
        for i0 in 0..nt {
            let tops = i0.max(l - 1)..=(i0 + l - 1).min(nt - 1);
            for x0 in 0..len {
                let xc = coords_of(x0, d, n);
                let mut m = best[i0][x0];
                for top in tops.clone() {
                    let row = &avg[top + 1 - l];
                    for o in &ball {
                        m = m.max(row[shifted(&xc, o, n)]);
                    }
                }
                best[i0][x0] = m;
            }
        }
    }
    best.into_iter().map(|v| GridField::new(d, n, v)).collect()
}

/// `sup_L (1/L) sum_{k = i-L+1}^{i} |h_k|` over all backward windows.
pub fn temporal_maximal(h: &[f64]) -> Vec<f64> {
    let mut prefix = vec![0.0; h.len() + 1];
    for (i, v) in h.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v.abs();
    }
    (0..h.len())
        .map(|i| (1..=i + 1).map(|l| (prefix[i + 1] - prefix[i + 1 - l]) / l as f64).fold(0.0, f64::max))
        .collect()
}
