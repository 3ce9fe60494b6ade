//! Lévy measures of stable-like order `sigma` in (0, 2) as composable symbolic
//! objects, their tail/moment/cancellation/nondegeneracy functionals, and the
//! structural assumption checks built on them.
//!
//! Balls are open: `B_r = {|y| < r}`. Tail masses integrate over `{|y| >= r}`,
//! so an atom sitting exactly on the sphere counts toward the tail.

use std::fmt;

use crate::error::{Error, Result};
use crate::special;

/// A single weighted point mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub location: Vec<f64>,
    pub weight: f64,
}

impl Atom {
    pub fn new(location: Vec<f64>, weight: f64) -> Self {
        Atom { location, weight }
    }

    pub fn radius(&self) -> f64 {
        norm(&self.location)
    }
}

/// Shape of a measure; see [`LevyMeasure`] for the shared order and dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum Variant {
    /// `c |y|^{-d-sigma} dy`.
    RadialDensity { c: f64 },
    /// `sum_i c |y_i|^{-1-sigma} dy_i ⊗ delta_0` on each coordinate axis.
    AxisStable { c: f64 },
    /// `sum_i sum_{k_min <= k <= k_max} 2^{-k sigma} (delta_{2^k} + delta_{-2^k})` on each axis.
    DyadicComb { k_min: i32, k_max: i32 },
    /// `rho^{-1-sigma} d rho mu(d theta)` with `mu` a finite list of weighted unit directions.
    Polar { directions: Vec<Atom> },
    Atoms(Vec<Atom>),
    Sum(Vec<LevyMeasure>),
    Scaled { factor: f64, inner: Box<LevyMeasure> },
}

/// A Lévy measure on `R^d \ {0}` of order `sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyMeasure {
    order: f64,
    dim: usize,
    variant: Variant,
}

/// Which side of the sphere `|y| = r` a truncated moment integrates over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// `{|y| < r}`; requires `c > sigma`.
    Inside,
    /// `{|y| >= r}`; requires `c < sigma`.
    Outside,
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_order(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma < 2.0) {
        return Err(Error::measure(format!("order sigma = {sigma} must lie in (0, 2)")));
    }
    Ok(())
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::measure("dimension must be at least 1"));
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::measure(format!("{name} = {v} must be positive and finite")));
    }
    Ok(())
}

impl LevyMeasure {
    pub fn radial(dim: usize, sigma: f64, c: f64) -> Result<Self> {
        check_order(sigma)?;
        check_dim(dim)?;
        positive("c", c)?;
        Ok(LevyMeasure { order: sigma, dim, variant: Variant::RadialDensity { c } })
    }

    pub fn axis_stable(dim: usize, sigma: f64, c: f64) -> Result<Self> {
        check_order(sigma)?;
        check_dim(dim)?;
        positive("c", c)?;
        Ok(LevyMeasure { order: sigma, dim, variant: Variant::AxisStable { c } })
    }

    pub fn dyadic_comb(dim: usize, sigma: f64, k_min: i32, k_max: i32) -> Result<Self> {
        check_order(sigma)?;
        check_dim(dim)?;
        if k_min > k_max {
            return Err(Error::measure(format!("dyadic comb needs k_min <= k_max (got {k_min} > {k_max})")));
        }
        if k_min < -1000 || k_max > 1000 {
            return Err(Error::measure("dyadic comb exponents must lie in [-1000, 1000]"));
        }
        Ok(LevyMeasure { order: sigma, dim, variant: Variant::DyadicComb { k_min, k_max } })
    }

    /// Directions are normalized; weights must be nonnegative, at least one positive.
    pub fn polar(dim: usize, sigma: f64, directions: Vec<Atom>) -> Result<Self> {
        check_order(sigma)?;
        check_dim(dim)?;
        if directions.is_empty() {
            return Err(Error::measure("polar measure needs at least one direction"));
        }
        let mut normalized = Vec::with_capacity(directions.len());
        for a in directions {
            if a.location.len() != dim {
                return Err(Error::measure("direction dimension mismatch"));
            }
            if !(a.weight >= 0.0 && a.weight.is_finite()) {
                return Err(Error::measure(format!("spherical weight {} must be >= 0", a.weight)));
            }
            let r = norm(&a.location);
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::measure("direction must be a nonzero finite vector"));
            }
            normalized.push(Atom::new(a.location.iter().map(|x| x / r).collect(), a.weight));
        }
        if normalized.iter().all(|a| a.weight == 0.0) {
            return Err(Error::measure("polar measure has zero total spherical weight"));
        }
        Ok(LevyMeasure { order: sigma, dim, variant: Variant::Polar { directions: normalized } })
    }

    pub fn atoms(dim: usize, sigma: f64, atoms: Vec<Atom>) -> Result<Self> {
        check_order(sigma)?;
        check_dim(dim)?;
        if atoms.is_empty() {
            return Err(Error::measure("atomic measure needs at least one atom"));
        }
        for a in &atoms {
            if a.location.len() != dim {
                return Err(Error::measure(format!(
                    "atom {:?} has dimension {} (expected {dim})",
                    a.location,
                    a.location.len()
                )));
            }
            positive("atom weight", a.weight)?;
            if a.location.iter().any(|x| !x.is_finite()) || norm(&a.location) == 0.0 {
                return Err(Error::measure("atoms must be finite and away from the origin"));
            }
        }
        Ok(LevyMeasure { order: sigma, dim, variant: Variant::Atoms(atoms) })
    }

    pub fn sum(parts: Vec<LevyMeasure>) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::measure("empty sum"))?;
        let (sigma, dim) = (first.order, first.dim);
        if parts.iter().any(|p| p.order != sigma || p.dim != dim) {
            return Err(Error::measure("all summands must share sigma and dimension"));
        }
        Ok(LevyMeasure { order: sigma, dim, variant: Variant::Sum(parts) })
    }

    pub fn scaled(factor: f64, inner: LevyMeasure) -> Result<Self> {
        positive("scale factor", factor)?;
        Ok(LevyMeasure { order: inner.order, dim: inner.dim, variant: Variant::Scaled { factor, inner: Box::new(inner) } })
    }

    /// `nu + |y|^{-d-sigma} dy`, the surrogate whose tails are bounded below.
    pub fn with_radial_surrogate(&self) -> LevyMeasure {
        let radial = LevyMeasure { order: self.order, dim: self.dim, variant: Variant::RadialDensity { c: 1.0 } };
        LevyMeasure { order: self.order, dim: self.dim, variant: Variant::Sum(vec![self.clone(), radial]) }
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    /// True when the measure is purely atomic (finite list of point masses).
    pub fn is_atomic(&self) -> bool {
        match &self.variant {
            Variant::DyadicComb { .. } | Variant::Atoms(_) => true,
            Variant::RadialDensity { .. } | Variant::AxisStable { .. } | Variant::Polar { .. } => false,
            Variant::Sum(parts) => parts.iter().all(|p| p.is_atomic()),
            Variant::Scaled { inner, .. } => inner.is_atomic(),
        }
    }

    /// Invariance under `y -> -y`. Conservative for sums (all parts symmetric).
    pub fn is_symmetric(&self) -> bool {
        match &self.variant {
            Variant::RadialDensity { .. } | Variant::AxisStable { .. } | Variant::DyadicComb { .. } => true,
            Variant::Polar { directions } => is_reflection_closed(directions),
            Variant::Atoms(atoms) => is_reflection_closed(atoms),
            Variant::Sum(parts) => {
                if parts.iter().all(|p| p.is_symmetric()) {
                    return true;
                }
                // Atomic parts may pair up across summands.
                match self.expand_atoms() {
                    Some(atoms) => is_reflection_closed(&atoms),
                    None => false,
                }
            }
            Variant::Scaled { inner, .. } => inner.is_symmetric(),
        }
    }

    /// Explicit atom list for atomic measures (combs expanded, sums merged,
    /// scalings applied), `None` when a density part is present.
    pub fn expand_atoms(&self) -> Option<Vec<Atom>> {
        match &self.variant {
            Variant::Atoms(atoms) => Some(atoms.clone()),
            Variant::DyadicComb { k_min, k_max } => {
                let mut out = Vec::with_capacity(2 * self.dim * (k_max - k_min + 1) as usize);
                for i in 0..self.dim {
                    for k in *k_min..=*k_max {
                        let pos = 2f64.powi(k);
                        let w = 2f64.powf(-(k as f64) * self.order);
                        for s in [1.0, -1.0] {
                            let mut loc = vec![0.0; self.dim];
                            loc[i] = s * pos;
                            out.push(Atom::new(loc, w));
                        }
                    }
                }
                Some(out)
            }
            Variant::Sum(parts) => {
                let mut out = Vec::new();
                for p in parts {
                    out.extend(p.expand_atoms()?);
                }
                Some(out)
            }
            Variant::Scaled { factor, inner } => Some(
                inner
                    .expand_atoms()?
                    .into_iter()
                    .map(|a| Atom::new(a.location, a.weight * factor))
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Total mass for atomic measures.
    pub fn total_mass(&self) -> Option<f64> {
        self.expand_atoms().map(|a| a.iter().map(|a| a.weight).sum())
    }

    /// `nu({|y| >= r})`.
    pub fn tail_mass(&self, r: f64) -> f64 {
        assert!(r > 0.0, "tail_mass needs r > 0");
        let s = self.order;
        let d = self.dim;
        match &self.variant {
            Variant::RadialDensity { c } => c * special::sphere_area(d) * r.powf(-s) / s,
            Variant::AxisStable { c } => 2.0 * d as f64 * c * r.powf(-s) / s,
            Variant::Polar { directions } => {
                directions.iter().map(|a| a.weight).sum::<f64>() * r.powf(-s) / s
            }
            Variant::DyadicComb { k_min, k_max } => {
                let lo = first_k_at_least(r).max(*k_min);
                if lo > *k_max {
                    return 0.0;
                }
                // Sum from the largest atom down so small terms are added first.
                let per_axis: f64 = (lo..=*k_max).rev().map(|k| 2.0 * 2f64.powf(-(k as f64) * s)).sum();
                d as f64 * per_axis
            }
            Variant::Atoms(atoms) => atoms.iter().filter(|a| a.radius() >= r).map(|a| a.weight).sum(),
            Variant::Sum(parts) => parts.iter().map(|p| p.tail_mass(r)).sum(),
            Variant::Scaled { factor, inner } => factor * inner.tail_mass(r),
        }
    }

    /// `int_{B_r^c} |y|^c nu(dy)` (outside, `c < sigma`) or `int_{B_r} |y|^c nu(dy)` (inside, `c > sigma`).
    pub fn truncated_moment(&self, c: f64, r: f64, region: Region) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::arg(format!("truncated moment needs r > 0 (got {r})")));
        }
        match region {
            Region::Outside if c >= self.order => {
                return Err(Error::rejected(format!(
                    "outside moment of order c = {c} >= sigma = {} diverges",
                    self.order
                )))
            }
            Region::Inside if c <= self.order => {
                return Err(Error::rejected(format!(
                    "inside moment of order c = {c} <= sigma = {} diverges",
                    self.order
                )))
            }
            _ => {}
        }
        Ok(self.moment_unchecked(c, r, region))
    }

    fn moment_unchecked(&self, c: f64, r: f64, region: Region) -> f64 {
        let s = self.order;
        let d = self.dim;
        // int over the radial part of rho^{c-1-sigma}
        let radial = || match region {
            Region::Outside => r.powf(c - s) / (s - c),
            Region::Inside => r.powf(c - s) / (c - s),
        };
        let keep = |rad: f64| match region {
            Region::Outside => rad >= r,
            Region::Inside => rad < r,
        };
        match &self.variant {
            Variant::RadialDensity { c: k } => k * special::sphere_area(d) * radial(),
            Variant::AxisStable { c: k } => 2.0 * d as f64 * k * radial(),
            Variant::Polar { directions } => directions.iter().map(|a| a.weight).sum::<f64>() * radial(),
            Variant::DyadicComb { k_min, k_max } => {
                let per_axis: f64 = (*k_min..=*k_max)
                    .rev()
                    .filter(|&k| keep(2f64.powi(k)))
                    .map(|k| 2.0 * 2f64.powf(k as f64 * (c - s)))
                    .sum();
                d as f64 * per_axis
            }
            Variant::Atoms(atoms) => atoms
                .iter()
                .filter(|a| keep(a.radius()))
                .map(|a| a.weight * a.radius().powf(c))
                .sum(),
            Variant::Sum(parts) => parts.iter().map(|p| p.moment_unchecked(c, r, region)).sum(),
            Variant::Scaled { factor, inner } => factor * inner.moment_unchecked(c, r, region),
        }
    }

    /// `int_{r1 <= |y| <= r2} y nu(dy)`.
    pub fn cancellation_defect(&self, r1: f64, r2: f64) -> Result<Vec<f64>> {
        if !(r1 > 0.0 && r1 < r2) {
            return Err(Error::arg(format!("annulus needs 0 < r1 < r2 (got {r1}, {r2})")));
        }
        Ok(self.cancellation_unchecked(r1, r2))
    }

    fn cancellation_unchecked(&self, r1: f64, r2: f64) -> Vec<f64> {
        let d = self.dim;
        let s = self.order;
        match &self.variant {
            Variant::RadialDensity { .. } | Variant::AxisStable { .. } | Variant::DyadicComb { .. } => vec![0.0; d],
            Variant::Polar { directions } => {
                // int_{r1}^{r2} rho * rho^{-1-sigma} d rho
                let radial = if s == 1.0 {
                    (r2 / r1).ln()
                } else {
                    (r2.powf(1.0 - s) - r1.powf(1.0 - s)) / (1.0 - s)
                };
                let mut out = vec![0.0; d];
                for a in directions {
                    for (o, x) in out.iter_mut().zip(&a.location) {
                        *o += a.weight * x * radial;
                    }
                }
                out
            }
            Variant::Atoms(atoms) => {
                let mut out = vec![0.0; d];
                for a in atoms {
                    let rad = a.radius();
                    if rad >= r1 && rad <= r2 {
                        for (o, x) in out.iter_mut().zip(&a.location) {
                            *o += a.weight * x;
                        }
                    }
                }
                out
            }
            Variant::Sum(parts) => {
                let mut out = vec![0.0; d];
                for p in parts {
                    for (o, x) in out.iter_mut().zip(p.cancellation_unchecked(r1, r2)) {
                        *o += x;
                    }
                }
                out
            }
            Variant::Scaled { factor, inner } => {
                inner.cancellation_unchecked(r1, r2).into_iter().map(|x| factor * x).collect()
            }
        }
    }

    /// `int_{|xi . y| <= 1} |xi . y|^2 nu(dy)`.
    pub fn nondegeneracy(&self, xi: &[f64]) -> Result<f64> {
        if xi.len() != self.dim {
            return Err(Error::arg(format!("xi has dimension {} (expected {})", xi.len(), self.dim)));
        }
        if norm(xi) == 0.0 {
            return Err(Error::arg("nondegeneracy functional needs xi != 0"));
        }
        Ok(self.nondegeneracy_unchecked(xi))
    }

    fn nondegeneracy_unchecked(&self, xi: &[f64]) -> f64 {
        let s = self.order;
        let d = self.dim;
        match &self.variant {
            Variant::RadialDensity { c } => {
                c * norm(xi).powf(s) * special::sphere_abs_moment(d, s) / (2.0 - s)
            }
            Variant::AxisStable { c } => {
                xi.iter().map(|x| 2.0 * c * x.abs().powf(s) / (2.0 - s)).sum()
            }
            Variant::Polar { directions } => directions
                .iter()
                .map(|a| a.weight * dot(xi, &a.location).abs().powf(s) / (2.0 - s))
                .sum(),
            Variant::DyadicComb { k_min, k_max } => xi
                .iter()
                .filter(|x| **x != 0.0)
                .map(|x| {
                    let ax = x.abs();
                    (*k_min..=*k_max)
                        .filter(|&k| ax * 2f64.powi(k) <= 1.0)
                        .map(|k| 2.0 * 2f64.powf(-(k as f64) * s) * (ax * 2f64.powi(k)).powi(2))
                        .sum::<f64>()
                })
                .sum(),
            Variant::Atoms(atoms) => atoms
                .iter()
                .map(|a| (a.weight, dot(xi, &a.location).abs()))
                .filter(|(_, p)| *p <= 1.0)
                .map(|(w, p)| w * p * p)
                .sum(),
            Variant::Sum(parts) => parts.iter().map(|p| p.nondegeneracy_unchecked(xi)).sum(),
            Variant::Scaled { factor, inner } => factor * inner.nondegeneracy_unchecked(xi),
        }
    }

    /// `sup_{r > 0} r^sigma nu({|y| >= r})`, exact: density parts contribute a
    /// constant, the atomic part attains its sup at an atom radius.
    pub fn lambda_exact(&self) -> f64 {
        let (density, atoms) = self.split_density_and_atoms();
        let atomic_sup = if atoms.is_empty() {
            0.0
        } else {
            let mut radii: Vec<f64> = atoms.iter().map(|a| a.radius()).collect();
            radii.sort_by(|a, b| b.total_cmp(a));
            radii.dedup();
            let s = self.order;
            let mut best: f64 = 0.0;
            for &rho in &radii {
                let tail: f64 = atoms.iter().filter(|a| a.radius() >= rho).map(|a| a.weight).sum();
                best = best.max(rho.powf(s) * tail);
            }
            best
        };
        density + atomic_sup
    }

    // (r^sigma tail constant of the density parts, explicit atoms of the atomic parts)
    fn split_density_and_atoms(&self) -> (f64, Vec<Atom>) {
        match &self.variant {
            Variant::RadialDensity { .. } | Variant::AxisStable { .. } | Variant::Polar { .. } => {
                (self.tail_mass(1.0), Vec::new())
            }
            Variant::DyadicComb { .. } | Variant::Atoms(_) => (0.0, self.expand_atoms().unwrap_or_default()),
            Variant::Sum(parts) => {
                let mut k = 0.0;
                let mut atoms = Vec::new();
                for p in parts {
                    let (pk, pa) = p.split_density_and_atoms();
                    k += pk;
                    atoms.extend(pa);
                }
                (k, atoms)
            }
            Variant::Scaled { factor, inner } => {
                let (k, atoms) = inner.split_density_and_atoms();
                (factor * k, atoms.into_iter().map(|a| Atom::new(a.location, a.weight * factor)).collect())
            }
        }
    }

    /// Bound on the tail mass at `r` omitted by storing every dyadic comb in
    /// this measure on `[k_min, k_max]` only (zero when there is no comb).
    pub fn comb_tail_truncation_error(&self, r: f64) -> f64 {
        match &self.variant {
            Variant::DyadicComb { k_min, k_max } => {
                let s = self.order;
                let k_r = first_k_at_least(r);
                let k0 = (k_max + 1).max(k_r);
                let above = 2f64.powf(-(k0 as f64) * s) / (1.0 - 2f64.powf(-s));
                // Atoms in [r, 2^{k_min}) dropped below the stored range.
                let below: f64 = (k_r.max(-1000)..*k_min).map(|k| 2f64.powf(-(k as f64) * s)).sum();
                2.0 * self.dim as f64 * (above + below)
            }
            Variant::Sum(parts) => parts.iter().map(|p| p.comb_tail_truncation_error(r)).sum(),
            Variant::Scaled { factor, inner } => factor * inner.comb_tail_truncation_error(r),
            _ => 0.0,
        }
    }

    /// Bound on the second moment `int |y|^2` omitted below `k_min` by comb truncation.
    pub fn comb_second_moment_truncation_error(&self) -> f64 {
        match &self.variant {
            Variant::DyadicComb { k_min, .. } => {
                let e = 2.0 - self.order;
                2.0 * self.dim as f64 * 2f64.powf((*k_min as f64 - 1.0) * e) / (1.0 - 2f64.powf(-e))
            }
            Variant::Sum(parts) => parts.iter().map(|p| p.comb_second_moment_truncation_error()).sum(),
            Variant::Scaled { factor, inner } => factor * inner.comb_second_moment_truncation_error(),
            _ => 0.0,
        }
    }

    /// One-line human-readable description.
    pub fn describe(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for LevyMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.variant {
            Variant::RadialDensity { c } => write!(f, "radial(d={},sigma={},c={})", self.dim, self.order, c),
            Variant::AxisStable { c } => write!(f, "axis(d={},sigma={},c={})", self.dim, self.order, c),
            Variant::DyadicComb { k_min, k_max } => {
                write!(f, "comb(d={},sigma={},k={}..{})", self.dim, self.order, k_min, k_max)
            }
            Variant::Polar { directions } => {
                write!(f, "polar(d={},sigma={},dirs={})", self.dim, self.order, directions.len())
            }
            Variant::Atoms(atoms) => write!(f, "atoms(d={},sigma={},n={})", self.dim, self.order, atoms.len()),
            Variant::Sum(parts) => {
                write!(f, "sum[")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, "+")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, "]")
            }
            Variant::Scaled { factor, inner } => write!(f, "{factor}*{inner}"),
        }
    }
}

/// Smallest integer `k` with `2^k >= r`.
fn first_k_at_least(r: f64) -> i32 {
    let mut k = r.log2().ceil() as i32;
    // Guard against log2 rounding at exact powers.
    while 2f64.powi(k - 1) >= r {
        k -= 1;
    }
    while 2f64.powi(k) < r {
        k += 1;
    }
    k
}

fn is_reflection_closed(atoms: &[Atom]) -> bool {
    // Weighted multiset equality between {y} and {-y}; O(n^2) is fine for the sizes in use.
    let tol = 1e-14;
    let mut used = vec![false; atoms.len()];
    for (i, a) in atoms.iter().enumerate() {
        if used[i] {
            continue;
        }
        let mut remaining = a.weight;
        used[i] = true;
        // Accumulate all atoms at the same location.
        for (j, b) in atoms.iter().enumerate().skip(i + 1) {
            if !used[j] && same_point(&a.location, &b.location, tol) {
                remaining += b.weight;
                used[j] = true;
            }
        }
        let mut mirrored = 0.0;
        for b in atoms {
            if b.location.iter().zip(&a.location).all(|(x, y)| (x + y).abs() <= tol * (1.0 + y.abs())) {
                mirrored += b.weight;
            }
        }
        if (remaining - mirrored).abs() > tol * remaining.max(mirrored) {
            return false;
        }
    }
    true
}

fn same_point(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs()))
}

/// Piecewise-constant-in-time measure: `schedule[i]` is active on `[start_i, end_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDependentMeasure {
    pieces: Vec<SchedulePiece>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchedulePiece {
    pub start: f64,
    pub end: f64,
    pub measure: LevyMeasure,
}

impl TimeDependentMeasure {
    pub fn new(pieces: Vec<SchedulePiece>) -> Result<Self> {
        let first = pieces.first().ok_or_else(|| Error::measure("empty schedule"))?;
        if first.start != 0.0 {
            return Err(Error::measure("schedule must start at t = 0"));
        }
        let (sigma, dim) = (first.measure.order(), first.measure.dim());
        for (i, p) in pieces.iter().enumerate() {
            if !(p.end > p.start) || !p.end.is_finite() {
                return Err(Error::measure(format!("schedule piece {i} has empty interval [{}, {})", p.start, p.end)));
            }
            if i > 0 && pieces[i - 1].end != p.start {
                return Err(Error::measure(format!("schedule piece {i} does not start where piece {} ends", i - 1)));
            }
            if p.measure.order() != sigma || p.measure.dim() != dim {
                return Err(Error::measure("schedule pieces must share sigma and dimension"));
            }
        }
        Ok(TimeDependentMeasure { pieces })
    }

    pub fn constant(measure: LevyMeasure, horizon: f64) -> Result<Self> {
        Self::new(vec![SchedulePiece { start: 0.0, end: horizon, measure }])
    }

    pub fn pieces(&self) -> &[SchedulePiece] {
        &self.pieces
    }

    pub fn horizon(&self) -> f64 {
        self.pieces.last().map(|p| p.end).unwrap_or(0.0)
    }

    pub fn order(&self) -> f64 {
        self.pieces[0].measure.order()
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].measure.dim()
    }

    /// Index of the piece active at `t` (right-continuous; `t = T` maps to the last piece).
    pub fn piece_index(&self, t: f64) -> usize {
        self.pieces
            .iter()
            .position(|p| t >= p.start && t < p.end)
            .unwrap_or(self.pieces.len() - 1)
    }

    pub fn at(&self, t: f64) -> &LevyMeasure {
        &self.pieces[self.piece_index(t)].measure
    }

    pub fn switch_times(&self) -> Vec<f64> {
        self.pieces.iter().skip(1).map(|p| p.start).collect()
    }

    /// Schedule with adjacent identical pieces merged.
    pub fn merged(&self) -> TimeDependentMeasure {
        let mut out: Vec<SchedulePiece> = Vec::with_capacity(self.pieces.len());
        for p in &self.pieces {
            match out.last_mut() {
                Some(last) if last.measure == p.measure => last.end = p.end,
                _ => out.push(p.clone()),
            }
        }
        TimeDependentMeasure { pieces: out }
    }
}

/// `n` points geometrically spaced on `[lo, hi]`, computed as powers of two so
/// that dyadic endpoints are hit exactly.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && n >= 1);
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log2(), hi.log2());
    (0..n)
        .map(|j| 2f64.powf(a + (b - a) * j as f64 / (n - 1) as f64))
        .collect()
}

/// Deterministic set of unit directions in R^d used to build xi grids.
pub fn default_directions(d: usize) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..16)
            .map(|k| {
                let a = std::f64::consts::PI * k as f64 / 8.0;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            // All nonzero vectors with entries in {-1, 0, 1}, normalized.
            let mut out = Vec::new();
            let total = 3usize.pow(d as u32);
            for code in 0..total {
                let mut c = code;
                let v: Vec<f64> = (0..d)
                    .map(|_| {
                        let digit = c % 3;
                        c /= 3;
                        digit as f64 - 1.0
                    })
                    .collect();
                let r = norm(&v);
                if r > 0.0 {
                    out.push(v.iter().map(|x| x / r).collect());
                }
            }
            out
        }
    }
}

/// Grids for the empirical assumption checks.
#[derive(Debug, Clone)]
pub struct CheckGrids {
    pub radii: Vec<f64>,
    pub frequencies: Vec<Vec<f64>>,
}

impl CheckGrids {
    /// 257 log-spaced radii and magnitudes on `[2^-10, 2^10]`, magnitudes
    /// crossed with [`default_directions`].
    pub fn default_for(d: usize) -> Self {
        Self::log_spaced(d, 2f64.powi(-10), 2f64.powi(10), 257)
    }

    pub fn log_spaced(d: usize, lo: f64, hi: f64, n: usize) -> Self {
        let radii = log_grid(lo, hi, n);
        let dirs = default_directions(d);
        let frequencies = radii
            .iter()
            .flat_map(|&m| dirs.iter().map(move |u| u.iter().map(|x| x * m).collect()))
            .collect();
        CheckGrids { radii, frequencies }
    }
}

/// Outcome of the empirical structural checks.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    /// `sup_r r^sigma nu(B_r^c)` over the radius grid.
    pub lambda_hat: f64,
    pub lambda_argmax: f64,
    /// `inf_xi N(xi) / |xi|^sigma` over the frequency grid.
    pub nondegen_hat: f64,
    pub nondegen_argmin: Vec<f64>,
    /// Max over tested annuli of `|int y nu(dy)|` (zero and unchecked unless sigma = 1).
    pub cancellation_max: f64,
    pub cancellation_checked: bool,
    pub radius_range: (f64, f64, usize),
    pub frequency_count: usize,
    pub lambda_finite: bool,
    pub nondegenerate: bool,
    pub cancellation_ok: bool,
}

pub const CANCELLATION_TOLERANCE: f64 = 1e-10;

impl AssumptionReport {
    /// Upper bound plus cancellation (the conditions needed for continuity).
    pub fn passes_upper(&self) -> bool {
        self.lambda_finite && self.cancellation_ok
    }

    /// All conditions including nondegeneracy.
    pub fn passes(&self) -> bool {
        self.passes_upper() && self.nondegenerate
    }

    fn worst(mut self, other: AssumptionReport) -> AssumptionReport {
        if other.lambda_hat > self.lambda_hat {
            self.lambda_hat = other.lambda_hat;
            self.lambda_argmax = other.lambda_argmax;
        }
        if other.nondegen_hat < self.nondegen_hat {
            self.nondegen_hat = other.nondegen_hat;
            self.nondegen_argmin = other.nondegen_argmin;
        }
        self.cancellation_max = self.cancellation_max.max(other.cancellation_max);
        self.cancellation_checked |= other.cancellation_checked;
        self.lambda_finite &= other.lambda_finite;
        self.nondegenerate &= other.nondegenerate;
        self.cancellation_ok &= other.cancellation_ok;
        self
    }
}

impl fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flag = |b: bool| if b { "ok" } else { "FAIL" };
        writeln!(
            f,
            "upper bound     lambda_hat     = {:.10} (at r = {:.4e}) [{}]",
            self.lambda_hat,
            self.lambda_argmax,
            flag(self.lambda_finite)
        )?;
        writeln!(
            f,
            "nondegeneracy   nondegen_hat   = {:.10} (at xi = {:?}) [{}]",
            self.nondegen_hat,
            self.nondegen_argmin,
            flag(self.nondegenerate)
        )?;
        if self.cancellation_checked {
            writeln!(f, "cancellation    max |defect|   = {:.3e} [{}]", self.cancellation_max, flag(self.cancellation_ok))?;
        } else {
            writeln!(f, "cancellation    not required (sigma != 1)")?;
        }
        write!(
            f,
            "grids           {} radii on [{:.4e}, {:.4e}], {} frequencies",
            self.radius_range.2, self.radius_range.0, self.radius_range.1, self.frequency_count
        )
    }
}

impl LevyMeasure {
    pub fn check_assumptions(&self, grids: &CheckGrids) -> Result<AssumptionReport> {
        if grids.radii.is_empty() || grids.frequencies.is_empty() {
            return Err(Error::arg("assumption check needs nonempty grids"));
        }
        let s = self.order;
        let mut lambda_hat = 0.0;
        let mut lambda_argmax = grids.radii[0];
        for &r in &grids.radii {
            let v = r.powf(s) * self.tail_mass(r);
            if v > lambda_hat {
                lambda_hat = v;
                lambda_argmax = r;
            }
        }
        let mut nondegen_hat = f64::INFINITY;
        let mut nondegen_argmin = grids.frequencies[0].clone();
        for xi in &grids.frequencies {
            let v = self.nondegeneracy(xi)? / norm(xi).powf(s);
            if v < nondegen_hat {
                nondegen_hat = v;
                nondegen_argmin = xi.clone();
            }
        }
        let cancellation_checked = s == 1.0;
        let mut cancellation_max: f64 = 0.0;
        if cancellation_checked {
            let coarse: Vec<f64> = grids.radii.iter().copied().step_by(8).collect();
            let coarse = if coarse.len() < 2 { grids.radii.clone() } else { coarse };
            for (i, &r1) in coarse.iter().enumerate() {
                for &r2 in &coarse[i + 1..] {
                    if r2 > r1 {
                        cancellation_max = cancellation_max.max(norm(&self.cancellation_unchecked(r1, r2)));
                    }
                }
            }
        }
        let lo = grids.radii.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = grids.radii.iter().copied().fold(0.0, f64::max);
        Ok(AssumptionReport {
            lambda_hat,
            lambda_argmax,
            nondegen_hat,
            nondegen_argmin,
            cancellation_max,
            cancellation_checked,
            radius_range: (lo, hi, grids.radii.len()),
            frequency_count: grids.frequencies.len(),
            lambda_finite: lambda_hat.is_finite(),
            nondegenerate: nondegen_hat > 0.0 && nondegen_hat.is_finite(),
            cancellation_ok: !cancellation_checked || cancellation_max < CANCELLATION_TOLERANCE,
        })
    }

    /// Sup over `(c, r)` of the truncated moment normalized by `r^{c - sigma}`,
    /// compared with the dyadic-shell constant `Lambda 2^{max(c,0)} / (1 - 2^{c-sigma})`
    /// (outside) or `Lambda 2^sigma / (1 - 2^{sigma-c})` (inside).
    pub fn check_moment_bounds(&self, c_grid: &[f64], r_grid: &[f64]) -> Result<MomentBoundReport> {
        let s = self.order;
        let lambda = self.lambda_exact();
        let mut entries = Vec::new();
        for &c in c_grid {
            if c == s {
                continue;
            }
            let region = if c < s { Region::Outside } else { Region::Inside };
            let predicted = match region {
                Region::Outside => lambda * 2f64.powf(c.max(0.0)) / (1.0 - 2f64.powf(c - s)),
                Region::Inside => lambda * 2f64.powf(s) / (1.0 - 2f64.powf(s - c)),
            };
            let mut sup = 0.0;
            let mut argmax = r_grid.first().copied().unwrap_or(1.0);
            for &r in r_grid {
                let v = self.truncated_moment(c, r, region)? * r.powf(s - c);
                if v > sup {
                    sup = v;
                    argmax = r;
                }
            }
            entries.push(MomentBoundEntry { c, region, sup_constant: sup, argmax_r: argmax, predicted });
        }
        let all_finite = entries.iter().all(|e| e.sup_constant.is_finite());
        let all_within = entries.iter().all(|e| e.sup_constant <= e.predicted * (1.0 + 1e-12));
        Ok(MomentBoundReport { lambda, entries, all_finite, all_within })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentBoundEntry {
    pub c: f64,
    pub region: Region,
    pub sup_constant: f64,
    pub argmax_r: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentBoundReport {
    pub lambda: f64,
    pub entries: Vec<MomentBoundEntry>,
    pub all_finite: bool,
    pub all_within: bool,
}

impl TimeDependentMeasure {
    /// Worst case over the schedule pieces.
    pub fn check_assumptions(&self, grids: &CheckGrids) -> Result<AssumptionReport> {
        let mut it = self.pieces.iter();
        let first = it.next().expect("schedule is nonempty");
        let mut report = first.measure.check_assumptions(grids)?;
        for p in it {
            report = report.worst(p.measure.check_assumptions(grids)?);
        }
        Ok(report)
    }
}
