//! Real fields on the periodic grid `[0, 2pi)^d`, their discrete Fourier
//! transforms, Fourier multipliers, and the direct real-space application of
//! atomic Lévy operators used as an independent oracle.
//!
//! Layout is row-major with axis 0 slowest. Grid node `j` on each axis sits at
//! `x_j = 2 pi j / n`. The forward transform is unnormalized,
//! `u_hat(k) = sum_j u_j e^{-i k x_j}`, and the inverse divides by `n^d`.
//!
//! The Nyquist frequency `n/2` is stored once (as `-n/2`). Multipliers are
//! applied there as the average of their values at `+n/2` and `-n/2`, which is
//! what makes a Hermitian multiplier produce a real field and what matches the
//! symmetric trigonometric interpolant used for off-grid shifts.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::measure::LevyMeasure;

type Plan = Arc<dyn Fft<f64>>;

fn plan(n: usize, inverse: bool) -> Plan {
    static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    let mut map = PLANS.get_or_init(|| Mutex::new(HashMap::new())).lock().expect("plan registry poisoned");
    map.entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// In-place unnormalized d-dimensional transform.
fn fft_nd(data: &mut [Complex64], d: usize, n: usize, inverse: bool) {
    let fft = plan(n, inverse);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        for base in (0..data.len()).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[start + i * stride];
                }
                fft.process(&mut line);
                for (i, v) in line.iter().enumerate() {
                    data[start + i * stride] = *v;
                }
            }
        }
    }
}

/// Integer frequencies `{-n/2, ..., n/2 - 1}^d` in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrequencyLattice {
    pub dim: usize,
    pub n: usize,
}

impl FrequencyLattice {
    pub fn new(dim: usize, n: usize) -> Self {
        FrequencyLattice { dim, n }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Signed frequency of storage index `k` on one axis.
    pub fn signed(&self, k: usize) -> i64 {
        if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// Frequency vector of flat storage index `idx`.
    pub fn frequency(&self, idx: usize) -> Vec<i64> {
        let mut out = vec![0i64; self.dim];
        let mut r = idx;
        for a in (0..self.dim).rev() {
            out[a] = self.signed(r % self.n);
            r /= self.n;
        }
        out
    }

    /// Flat index of the mode `-k` (mod n).
    pub fn negated_index(&self, idx: usize) -> usize {
        let mut r = idx;
        let mut out = 0;
        let mut scale = 1;
        for _ in 0..self.dim {
            let k = r % self.n;
            r /= self.n;
            out += ((self.n - k) % self.n) * scale;
            scale *= self.n;
        }
        out
    }

    pub fn is_nyquist(&self, k: i64) -> bool {
        k == -(self.n as i64 / 2)
    }

    /// Multiplier value per mode, averaged over the `+-n/2` sign choices on
    /// Nyquist components, and checked for Hermitian symmetry.
    pub fn mode_multipliers<F>(&self, mut mult: F) -> Result<Vec<Complex64>>
    where
        F: FnMut(&[f64]) -> Complex64,
    {
        let mut out = Vec::with_capacity(self.len());
        let mut xi = vec![0.0; self.dim];
        for idx in 0..self.len() {
            let k = self.frequency(idx);
            let nyq: Vec<usize> = (0..self.dim).filter(|&a| self.is_nyquist(k[a])).collect();
            let combos = 1usize << nyq.len();
            let mut acc = Complex64::new(0.0, 0.0);
            for mask in 0..combos {
                for a in 0..self.dim {
                    xi[a] = k[a] as f64;
                }
                for (b, &a) in nyq.iter().enumerate() {
                    if mask & (1 << b) != 0 {
                        xi[a] = -xi[a];
                    }
                }
                acc += mult(&xi);
            }
            out.push(acc / combos as f64);
        }
        for idx in 0..out.len() {
            let j = self.negated_index(idx);
            if j < idx {
                continue;
            }
            let a = out[idx];
            let b = out[j].conj();
            let defect = (a - b).norm();
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::arg(format!("multiplier is not finite at {:?}", self.frequency(idx))));
            }
            if defect > 1e-12 * (a.norm() + b.norm()) + 1e-300 {
                return Err(Error::NonHermitian { frequency: self.frequency(idx), defect });
            }
        }
        Ok(out)
    }
}

/// Real scalar field on the periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    dim: usize,
    n: usize,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(dim: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::arg(format!("grid dimension {dim} must be 1, 2 or 3")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::arg(format!("resolution {n} must be a power of two >= 2")));
        }
        if values.len() != n.pow(dim as u32) {
            return Err(Error::arg(format!("expected {} values, got {}", n.pow(dim as u32), values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("field values must be finite"));
        }
        Ok(GridField { dim, n, values })
    }

    pub fn zeros(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, n, vec![0.0; n.pow(dim as u32)])
    }

    pub fn constant(dim: usize, n: usize, c: f64) -> Result<Self> {
        Self::new(dim, n, vec![c; n.pow(dim as u32)])
    }

    /// Sample `f` at the grid nodes.
    pub fn from_fn<F: FnMut(&[f64]) -> f64>(dim: usize, n: usize, mut f: F) -> Result<Self> {
        let lattice = FrequencyLattice::new(dim, n);
        let h = 2.0 * PI / n as f64;
        let mut x = vec![0.0; dim];
        let values = (0..lattice.len())
            .map(|idx| {
                let mut r = idx;
                for a in (0..dim).rev() {
                    x[a] = (r % n) as f64 * h;
                    r /= n;
                }
                f(&x)
            })
            .collect();
        Self::new(dim, n, values)
    }

    /// Real field with i.i.d. Gaussian Fourier coefficients on modes with
    /// `max_i |k_i| <= max_mode` (Hermitian-symmetrized), scaled to unit discrete L2 norm.
    pub fn random_band_limited<R: Rng + ?Sized>(dim: usize, n: usize, max_mode: usize, rng: &mut R) -> Result<Self> {
        if max_mode >= n / 2 {
            return Err(Error::arg("band limit must lie below the Nyquist frequency"));
        }
        let lattice = FrequencyLattice::new(dim, n);
        let mut spec = vec![Complex64::new(0.0, 0.0); lattice.len()];
        for (idx, s) in spec.iter_mut().enumerate() {
            if lattice.frequency(idx).iter().all(|k| k.unsigned_abs() as usize <= max_mode) {
                *s = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            }
        }
        let sym: Vec<Complex64> =
            (0..spec.len()).map(|i| 0.5 * (spec[i] + spec[lattice.negated_index(i)].conj())).collect();
        let mut f = Self::from_spectrum(dim, n, sym)?;
        let norm = f.l2_norm();
        if norm > 0.0 {
            f.values.iter_mut().for_each(|v| *v /= norm);
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn lattice(&self) -> FrequencyLattice {
        FrequencyLattice::new(self.dim, self.n)
    }

    /// Grid coordinates of flat index `idx`.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        let mut r = idx;
        for a in (0..self.dim).rev() {
            out[a] = (r % self.n) as f64 * self.spacing();
            r /= self.n;
        }
        out
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut data, self.dim, self.n, false);
        data
    }

    /// Real part of the inverse transform of `spec`.
    pub fn from_spectrum(dim: usize, n: usize, mut spec: Vec<Complex64>) -> Result<Self> {
        if spec.len() != n.pow(dim as u32) {
            return Err(Error::arg("spectrum length does not match the grid"));
        }
        fft_nd(&mut spec, dim, n, true);
        let scale = 1.0 / spec.len() as f64;
        Self::new(dim, n, spec.iter().map(|c| c.re * scale).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridField {
        GridField { dim: self.dim, n: self.n, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> Result<GridField> {
        self.check_same_grid(other)?;
        Ok(GridField {
            dim: self.dim,
            n: self.n,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn scale(&self, c: f64) -> GridField {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &GridField) -> Result<GridField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridField) -> Result<GridField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub(crate) fn check_same_grid(&self, other: &GridField) -> Result<()> {
        if self.dim != other.dim || self.n != other.n {
            return Err(Error::arg("fields live on different grids"));
        }
        Ok(())
    }

    /// `(sum u_j^2 h^d)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.cell_volume()).sqrt()
    }

    /// `sum u_j v_j h^d`.
    pub fn inner(&self, other: &GridField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * self.cell_volume())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Flat binary layout: `u64` LE dimension, `u64` LE resolution, then
    /// row-major `f64` LE values.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.dim as u64).to_le_bytes())?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        let dim = u64::from_le_bytes(b) as usize;
        r.read_exact(&mut b)?;
        let n = u64::from_le_bytes(b) as usize;
        if !(1..=3).contains(&dim) || n < 2 || n > 1 << 20 {
            return Err(Error::arg(format!("bad field header (d = {dim}, n = {n})")));
        }
        let len = n.pow(dim as u32);
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            r.read_exact(&mut b)?;
            values.push(f64::from_le_bytes(b));
        }
        Self::new(dim, n, values)
    }

    /// Two columns `x, u` (one-dimensional fields only).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        if self.dim != 1 {
            return Err(Error::arg("CSV export is defined for one-dimensional fields"));
        }
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "u"])?;
        for (j, v) in self.values.iter().enumerate() {
            out.write_record([format!("{:.17e}", j as f64 * self.spacing()), format!("{v:.17e}")])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let v = rec
                .get(1)
                .ok_or_else(|| Error::arg("CSV row needs two columns"))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::arg(format!("bad CSV value: {e}")))?;
            values.push(v);
        }
        let n = values.len();
        Self::new(1, n, values)
    }
}

/// Field with spectrum `mult(xi) u_hat(xi)`.
pub fn apply_multiplier<F>(u: &GridField, mult: F) -> Result<GridField>
where
    F: FnMut(&[f64]) -> Complex64,
{
    let factors = u.lattice().mode_multipliers(mult)?;
    apply_mode_factors(u, &factors)
}

/// Multiply the spectrum by precomputed per-mode factors (Hermitian by contract).
pub fn apply_mode_factors(u: &GridField, factors: &[Complex64]) -> Result<GridField> {
    let mut spec = u.spectrum();
    if factors.len() != spec.len() {
        return Err(Error::arg("factor count does not match the grid"));
    }
    for (s, f) in spec.iter_mut().zip(factors) {
        *s *= f;
    }
    GridField::from_spectrum(u.dim, u.n, spec)
}

/// `(-Delta)^{sigma/2}` or, when `shifted`, `(1 - Delta)^{sigma/2}`.
pub fn fractional_laplacian(u: &GridField, sigma: f64, shifted: bool) -> Result<GridField> {
    if !(sigma > 0.0 && sigma < 2.0) {
        return Err(Error::arg(format!("sigma = {sigma} must lie in (0, 2)")));
    }
    apply_multiplier(u, |xi| {
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        let v = if shifted { (1.0 + r2).powf(sigma / 2.0) } else { r2.powf(sigma / 2.0) };
        Complex64::new(v, 0.0)
    })
}

/// Spectral partial derivative along `axis` (zero at the Nyquist frequency).
pub fn spectral_derivative(u: &GridField, axis: usize) -> Result<GridField> {
    if axis >= u.dim {
        return Err(Error::arg("derivative axis out of range"));
    }
    apply_multiplier(u, |xi| Complex64::new(0.0, xi[axis]))
}

/// Symmetric trigonometric interpolation kernel `sin(n t/2) / (n tan(t/2))`.
fn dirichlet_kernel(n: usize, theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    let t = if t > PI { t - 2.0 * PI } else { t };
    if t.abs() < 1e-15 {
        return 1.0;
    }
    let nf = n as f64;
    (0.5 * nf * t).sin() / (nf * (0.5 * t).tan())
}

/// `u(x + s e_axis)` by trigonometric interpolation along one axis; exact
/// roll when `s` is a multiple of the spacing.
pub fn shift_along_axis(u: &GridField, axis: usize, s: f64) -> GridField {
    let n = u.n;
    let h = u.spacing();
    let steps = s / h;
    let rounded = steps.round();
    let stride = n.pow((u.dim - 1 - axis) as u32);
    let block = stride * n;
    let mut out = vec![0.0; u.values.len()];
    if (steps - rounded).abs() <= 1e-12 * steps.abs().max(1.0) {
        let m = (rounded as i64).rem_euclid(n as i64) as usize;
        for base in (0..out.len()).step_by(block) {
            for off in 0..stride {
                for i in 0..n {
                    out[base + off + i * stride] = u.values[base + off + ((i + m) % n) * stride];
                }
            }
        }
    } else {
        let kernel: Vec<f64> = (0..n).map(|m| dirichlet_kernel(n, s - m as f64 * h)).collect();
        for base in (0..out.len()).step_by(block) {
            for off in 0..stride {
                for i in 0..n {
                    let mut acc = 0.0;
                    for (m, k) in kernel.iter().enumerate() {
                        acc += u.values[base + off + ((i + m) % n) * stride] * k;
                    }
                    out[base + off + i * stride] = acc;
                }
            }
        }
    }
    GridField { dim: u.dim, n, values: out }
}

/// `u(x + y)` by separable trigonometric interpolation.
pub fn shift(u: &GridField, y: &[f64]) -> GridField {
    let mut v = u.clone();
    for (axis, &s) in y.iter().enumerate() {
        if s != 0.0 {
            v = shift_along_axis(&v, axis, s);
        }
    }
    v
}

/// Number of atoms with some component beyond the half period; those are
/// aliased by periodization.
pub fn aliased_atoms(m: &LevyMeasure) -> usize {
    m.expand_atoms()
        .map(|atoms| atoms.iter().filter(|a| a.location.iter().any(|x| x.abs() > PI)).count())
        .unwrap_or(0)
}

/// `sum_j w_j (u(x + y_j) - u(x) - grad u(x) . y_j^{(sigma)})` evaluated in real
/// space for an atomic measure.
pub fn apply_levy_direct(u: &GridField, m: &LevyMeasure) -> Result<GridField> {
    if m.dim() != u.dim {
        return Err(Error::arg("measure and field dimensions differ"));
    }
    let atoms = m
        .expand_atoms()
        .ok_or_else(|| Error::rejected("direct application needs an atomic measure; use apply_multiplier"))?;
    let s = m.order();
    if s == 1.0 && !m.is_symmetric() {
        return Err(Error::rejected("sigma = 1 requires a symmetric measure"));
    }
    let aliased = aliased_atoms(m);
    if aliased > 0 {
        log::warn!("{aliased} atoms exceed the half period and are aliased by periodization");
    }
    let mut acc = vec![0.0; u.values.len()];
    let mut total_weight = 0.0;
    let mut drift = vec![0.0; u.dim];
    for a in &atoms {
        let shifted = shift(u, &a.location);
        for (o, v) in acc.iter_mut().zip(&shifted.values) {
            *o += a.weight * v;
        }
        total_weight += a.weight;
        for (dr, y) in drift.iter_mut().zip(&a.location) {
            *dr += a.weight * y;
        }
    }
    for (o, v) in acc.iter_mut().zip(&u.values) {
        *o -= total_weight * v;
    }
    if s > 1.0 {
        for (axis, &b) in drift.iter().enumerate() {
            if b != 0.0 {
                let g = spectral_derivative(u, axis)?;
                for (o, v) in acc.iter_mut().zip(&g.values) {
                    *o -= b * v;
                }
            }
        }
    }
    GridField::new(u.dim, u.n, acc)
}
