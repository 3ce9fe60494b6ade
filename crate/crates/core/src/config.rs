//! TOML run configuration shared by the command-line front end and the C API.
//!
//! Measures are tables tagged by `kind`; unknown keys are rejected at every
//! level. Experiment sections are optional and every key in them defaults to
//! the standard setting of that experiment.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::measure::{Atom, CheckGrids, LevyMeasure, SchedulePiece, TimeDependentMeasure};
use crate::solver::PiecewiseForcing;
use crate::symbol::EvaluationMode;
use crate::verify::{
    BoundednessConfig, CounterexampleConfig, Family, MonteCarloConfig, SweepConfig, WeightCase, WeightedSweepConfig,
};

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureConfig {
    Radial {
        dim: usize,
        sigma: f64,
        #[serde(default = "one")]
        c: f64,
    },
    Axis {
        dim: usize,
        sigma: f64,
        #[serde(default = "one")]
        c: f64,
    },
    DyadicComb {
        dim: usize,
        sigma: f64,
        k_min: i32,
        k_max: i32,
    },
    /// Each entry is `[coords..., weight]`.
    Polar {
        dim: usize,
        sigma: f64,
        directions: Vec<Vec<f64>>,
    },
    /// Each entry is `[coords..., weight]`.
    Atoms {
        dim: usize,
        sigma: f64,
        atoms: Vec<Vec<f64>>,
    },
    Sum {
        parts: Vec<MeasureConfig>,
    },
    Scaled {
        factor: f64,
        measure: Box<MeasureConfig>,
    },
}

fn atom_list(dim: usize, rows: &[Vec<f64>]) -> Result<Vec<Atom>> {
    rows.iter()
        .map(|r| {
            if r.len() != dim + 1 {
                return Err(Error::Config(format!("entry {r:?} needs {dim} coordinates and a weight")));
            }
            Ok(Atom::new(r[..dim].to_vec(), r[dim]))
        })
        .collect()
}

impl MeasureConfig {
    pub fn build(&self) -> Result<LevyMeasure> {
        match self {
            MeasureConfig::Radial { dim, sigma, c } => LevyMeasure::radial(*dim, *sigma, *c),
            MeasureConfig::Axis { dim, sigma, c } => LevyMeasure::axis_stable(*dim, *sigma, *c),
            MeasureConfig::DyadicComb { dim, sigma, k_min, k_max } => LevyMeasure::dyadic_comb(*dim, *sigma, *k_min, *k_max),
            MeasureConfig::Polar { dim, sigma, directions } => LevyMeasure::polar(*dim, *sigma, atom_list(*dim, directions)?),
            MeasureConfig::Atoms { dim, sigma, atoms } => LevyMeasure::atoms(*dim, *sigma, atom_list(*dim, atoms)?),
            MeasureConfig::Sum { parts } => LevyMeasure::sum(parts.iter().map(|p| p.build()).collect::<Result<_>>()?),
            MeasureConfig::Scaled { factor, measure } => LevyMeasure::scaled(*factor, measure.build()?),
        }
    }
}

/// One measure from a TOML document holding a single measure table.
pub fn measure_from_toml(text: &str) -> Result<LevyMeasure> {
    let cfg: MeasureConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.build()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceConfig {
    pub start_t: f64,
    pub end_t: f64,
    pub measure: MeasureConfig,
}

/// Frequency grid for certificates and symbol tables: `points` log-spaced
/// magnitudes on `[xi_min, xi_max]` along the default directions.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_lo")]
    pub xi_min: f64,
    #[serde(default = "default_hi")]
    pub xi_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_lo() -> f64 {
    2f64.powi(-10)
}

fn default_hi() -> f64 {
    2f64.powi(10)
}

fn default_points() -> usize {
    257
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { xi_min: default_lo(), xi_max: default_hi(), points: default_points() }
    }
}

impl GridConfig {
    pub fn build(&self, dim: usize) -> Result<CheckGrids> {
        if !(self.xi_min > 0.0 && self.xi_max >= self.xi_min && self.xi_max.is_finite()) || self.points == 0 {
            return Err(Error::Config("grid needs 0 < xi_min <= xi_max and points >= 1".into()));
        }
        if self.points == 1 && self.xi_min != self.xi_max {
            return Err(Error::Config("a one-point grid needs xi_min = xi_max".into()));
        }
        Ok(CheckGrids::log_spaced(dim, self.xi_min, self.xi_max, self.points))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    #[default]
    ClosedForm,
    Series,
    Quadrature,
}

impl From<ModeConfig> for EvaluationMode {
    fn from(m: ModeConfig) -> Self {
        match m {
            ModeConfig::ClosedForm => EvaluationMode::ClosedForm,
            ModeConfig::Series => EvaluationMode::Series,
            ModeConfig::Quadrature => EvaluationMode::Quadrature,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SymbolConfig {
    #[serde(default)]
    pub mode: ModeConfig,
    #[serde(default)]
    pub time_t: f64,
    pub error_budget: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub n: usize,
    #[serde(default)]
    pub lambda: f64,
    /// Required with `[measure]`; taken from the schedule otherwise.
    pub horizon_t: Option<f64>,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    /// Exponent for the reported a-priori ratios.
    #[serde(default = "default_p")]
    pub p: f64,
}

fn default_substeps() -> usize {
    1
}

fn default_p() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingConfig {
    Zero,
    /// `amplitude * cos(k . x)`, constant in time.
    Mode { amplitude: f64, frequency: Vec<i64> },
    /// Band-limited Gaussian fields on `intervals` equal pieces.
    Random { max_mode: usize, intervals: usize },
}

impl ForcingConfig {
    pub fn build(&self, dim: usize, n: usize, horizon: f64, seed: u64) -> Result<PiecewiseForcing> {
        match self {
            ForcingConfig::Zero => PiecewiseForcing::constant(GridField::zeros(dim, n)?, horizon),
            ForcingConfig::Mode { amplitude, frequency } => {
                if frequency.len() != dim {
                    return Err(Error::Config(format!("forcing frequency needs {dim} components")));
                }
                let f = GridField::from_fn(dim, n, |x| {
                    amplitude * frequency.iter().zip(x).map(|(k, xi)| *k as f64 * xi).sum::<f64>().cos()
                })?;
                PiecewiseForcing::constant(f, horizon)
            }
            ForcingConfig::Random { max_mode, intervals } => {
                if *intervals == 0 {
                    return Err(Error::Config("random forcing needs at least one interval".into()));
                }
                let mut rng = crate::verify::cell_rng(seed, &[dim as u64, n as u64]);
                let fields = (0..*intervals)
                    .map(|_| GridField::random_band_limited(dim, n, *max_mode, &mut rng))
                    .collect::<Result<Vec<_>>>()?;
                PiecewiseForcing::uniform(fields, horizon)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyConfig {
    Comb,
    Axis,
    Radial,
}

impl From<FamilyConfig> for Family {
    fn from(f: FamilyConfig) -> Self {
        match f {
            FamilyConfig::Comb => Family::Comb,
            FamilyConfig::Axis => Family::Axis,
            FamilyConfig::Radial => Family::Radial,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub sigmas: Option<Vec<f64>>,
    pub families: Option<Vec<FamilyConfig>>,
    /// Explicit measures; replaces `sigmas` and `families`.
    pub measures: Option<Vec<MeasureConfig>>,
    pub lambdas: Option<Vec<f64>>,
    pub resolutions: Option<Vec<usize>>,
    /// Number of seeds, counted up from the run seed.
    pub seed_count: Option<u64>,
    pub p_values: Option<Vec<f64>>,
    pub horizon_t: Option<f64>,
    pub forcing_intervals: Option<usize>,
    pub substeps: Option<usize>,
    /// Scale of the measure after `horizon_t / 2`; 1 disables the switch.
    pub switch_scale: Option<f64>,
    pub include_gradient: Option<bool>,
}

fn sweep_measures(
    measures: &Option<Vec<MeasureConfig>>,
    sigmas: &Option<Vec<f64>>,
    families: &Option<Vec<FamilyConfig>>,
    default_sigmas: &[f64],
) -> Result<Option<Vec<LevyMeasure>>> {
    if let Some(ms) = measures {
        if sigmas.is_some() || families.is_some() {
            return Err(Error::Config("give either measures or sigmas/families, not both".into()));
        }
        return Ok(Some(ms.iter().map(|m| m.build()).collect::<Result<_>>()?));
    }
    if sigmas.is_none() && families.is_none() {
        return Ok(None);
    }
    let sig = sigmas.clone().unwrap_or_else(|| default_sigmas.to_vec());
    let fam: Vec<Family> = match families {
        Some(f) => f.iter().map(|&x| x.into()).collect(),
        None => Family::ALL.to_vec(),
    };
    let mut out = Vec::new();
    for s in sig {
        for f in &fam {
            out.push(f.build(1, s)?);
        }
    }
    Ok(Some(out))
}

fn seeds(base: u64, count: u64) -> Vec<u64> {
    (0..count).map(|i| base.wrapping_add(i)).collect()
}

fn switch(scale: Option<f64>, default: Option<f64>) -> Option<f64> {
    match scale {
        Some(s) if s == 1.0 => None,
        Some(s) => Some(s),
        None => default,
    }
}

pub const DEFAULT_SWEEP_SIGMAS: [f64; 3] = [0.5, 1.0, 1.5];

impl SweepSection {
    pub fn build(&self, seed: u64) -> Result<SweepConfig> {
        let mut cfg = SweepConfig::standard(&DEFAULT_SWEEP_SIGMAS)?;
        if let Some(ms) = sweep_measures(&self.measures, &self.sigmas, &self.families, &DEFAULT_SWEEP_SIGMAS)? {
            cfg.measures = ms;
        }
        cfg.seeds = seeds(seed, self.seed_count.unwrap_or(cfg.seeds.len() as u64));
        if let Some(v) = &self.lambdas {
            cfg.lambdas = v.clone();
        }
        if let Some(v) = &self.resolutions {
            cfg.resolutions = v.clone();
        }
        if let Some(v) = &self.p_values {
            cfg.p_values = v.clone();
        }
        cfg.horizon = self.horizon_t.unwrap_or(cfg.horizon);
        cfg.forcing_intervals = self.forcing_intervals.unwrap_or(cfg.forcing_intervals);
        cfg.substeps = self.substeps.unwrap_or(cfg.substeps);
        cfg.switch_scale = switch(self.switch_scale, cfg.switch_scale);
        cfg.include_gradient = self.include_gradient.unwrap_or(cfg.include_gradient);
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightCaseConfig {
    pub p: f64,
    pub q: f64,
    pub space_exponent: f64,
    pub time_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct WeightedSection {
    pub sigma: Option<f64>,
    pub measures: Option<Vec<MeasureConfig>>,
    pub lambdas: Option<Vec<f64>>,
    pub resolutions: Option<Vec<usize>>,
    pub seed_count: Option<u64>,
    pub cases: Option<Vec<WeightCaseConfig>>,
    pub horizon_t: Option<f64>,
    pub forcing_intervals: Option<usize>,
    pub substeps: Option<usize>,
    pub switch_scale: Option<f64>,
}

impl WeightedSection {
    pub fn build(&self, seed: u64) -> Result<WeightedSweepConfig> {
        let mut cfg = WeightedSweepConfig::standard()?;
        match (&self.measures, self.sigma) {
            (Some(_), Some(_)) => return Err(Error::Config("give either measures or sigma, not both".into())),
            (Some(ms), None) => cfg.measures = ms.iter().map(|m| m.build()).collect::<Result<_>>()?,
            (None, Some(s)) => cfg.measures = Family::ALL.iter().map(|f| f.build(1, s)).collect::<Result<_>>()?,
            (None, None) => {}
        }
        cfg.seeds = seeds(seed, self.seed_count.unwrap_or(cfg.seeds.len() as u64));
        if let Some(v) = &self.lambdas {
            cfg.lambdas = v.clone();
        }
        if let Some(v) = &self.resolutions {
            cfg.resolutions = v.clone();
        }
        if let Some(cs) = &self.cases {
            cfg.cases = cs
                .iter()
                .map(|c| WeightCase { p: c.p, q: c.q, space_exponent: c.space_exponent, time_exponent: c.time_exponent })
                .collect();
        }
        cfg.horizon = self.horizon_t.unwrap_or(cfg.horizon);
        cfg.forcing_intervals = self.forcing_intervals.unwrap_or(cfg.forcing_intervals);
        cfg.substeps = self.substeps.unwrap_or(cfg.substeps);
        cfg.switch_scale = switch(self.switch_scale, cfg.switch_scale);
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleSection {
    pub l: f64,
    pub p: f64,
    pub sigma: f64,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_k_max")]
    pub k_max: i32,
}

fn default_dim() -> usize {
    1
}

fn default_k_max() -> i32 {
    20
}

impl Default for CounterexampleSection {
    fn default() -> Self {
        CounterexampleSection { l: 2.5, p: 4.0, sigma: 0.5, dim: 1, k_max: 20 }
    }
}

impl CounterexampleSection {
    pub fn build(&self) -> Result<CounterexampleConfig> {
        let cfg = CounterexampleConfig { l: self.l, p: self.p, sigma: self.sigma, dim: self.dim, k_max: self.k_max };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSection {
    pub pair_offset: Option<f64>,
    pub pair_weight: Option<f64>,
    pub pair_frequency: Option<i64>,
    pub sigma: Option<f64>,
    pub comb: Option<MeasureConfig>,
    pub time_t: Option<f64>,
    pub n: Option<usize>,
    pub probes: Option<usize>,
    pub samples_small: Option<usize>,
    pub samples_large: Option<usize>,
    pub replicates: Option<usize>,
}

impl MonteCarloSection {
    pub fn build(&self, seed: u64) -> Result<MonteCarloConfig> {
        let mut cfg = MonteCarloConfig::standard(seed)?;
        cfg.pair_offset = self.pair_offset.unwrap_or(cfg.pair_offset);
        cfg.pair_weight = self.pair_weight.unwrap_or(cfg.pair_weight);
        cfg.pair_frequency = self.pair_frequency.unwrap_or(cfg.pair_frequency);
        cfg.sigma = self.sigma.unwrap_or(cfg.sigma);
        if let Some(c) = &self.comb {
            cfg.comb = c.build()?;
        }
        cfg.time = self.time_t.unwrap_or(cfg.time);
        cfg.n = self.n.unwrap_or(cfg.n);
        cfg.probes = self.probes.unwrap_or(cfg.probes);
        cfg.samples_small = self.samples_small.unwrap_or(cfg.samples_small);
        cfg.samples_large = self.samples_large.unwrap_or(cfg.samples_large);
        cfg.replicates = self.replicates.unwrap_or(cfg.replicates);
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BoundednessSection {
    pub sigmas: Option<Vec<f64>>,
    pub measures: Option<Vec<MeasureConfig>>,
    pub p: Option<f64>,
    pub kappas: Option<Vec<f64>>,
    pub fields: Option<usize>,
    pub n: Option<usize>,
    pub include_surrogate: Option<bool>,
}

impl BoundednessSection {
    pub fn build(&self, seed: u64) -> Result<BoundednessConfig> {
        let mut cfg = BoundednessConfig::standard(seed)?;
        match (&self.measures, &self.sigmas) {
            (Some(_), Some(_)) => return Err(Error::Config("give either measures or sigmas, not both".into())),
            (Some(ms), None) => cfg.measures = ms.iter().map(|m| m.build()).collect::<Result<_>>()?,
            (None, Some(ss)) => {
                cfg.measures = ss.iter().map(|&s| LevyMeasure::dyadic_comb(1, s, -30, 30)).collect::<Result<_>>()?
            }
            (None, None) => {}
        }
        cfg.p = self.p.unwrap_or(cfg.p);
        if let Some(k) = &self.kappas {
            cfg.kappas = k.clone();
        }
        cfg.fields = self.fields.unwrap_or(cfg.fields);
        cfg.n = self.n.unwrap_or(cfg.n);
        cfg.include_surrogate = self.include_surrogate.unwrap_or(cfg.include_surrogate);
        Ok(cfg)
    }
}

/// A whole run file. Which sections are required depends on the subcommand.
#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub measure: Option<MeasureConfig>,
    pub schedule: Option<Vec<PieceConfig>>,
    pub grid: Option<GridConfig>,
    pub symbol: Option<SymbolConfig>,
    pub solve: Option<SolveConfig>,
    pub forcing: Option<ForcingConfig>,
    pub estimate_sweep: Option<SweepSection>,
    pub weighted_sweep: Option<WeightedSection>,
    pub counterexample: Option<CounterexampleSection>,
    pub montecarlo: Option<MonteCarloSection>,
    pub maximal_boundedness: Option<BoundednessSection>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// The schedule, or the single measure held constant up to `horizon`.
    pub fn schedule(&self, horizon: Option<f64>) -> Result<TimeDependentMeasure> {
        match (&self.measure, &self.schedule) {
            (Some(_), Some(_)) => Err(Error::Config("give either [measure] or [[schedule]], not both".into())),
            (Some(m), None) => TimeDependentMeasure::constant(m.build()?, horizon.unwrap_or(1.0)),
            (None, Some(pieces)) => {
                let pieces = pieces
                    .iter()
                    .map(|p| Ok(SchedulePiece { start: p.start_t, end: p.end_t, measure: p.measure.build()? }))
                    .collect::<Result<Vec<_>>>()?;
                let s = TimeDependentMeasure::new(pieces)?;
                if let Some(h) = horizon {
                    if (s.horizon() - h).abs() > 1e-12 * h {
                        return Err(Error::Config(format!("horizon_t = {h} differs from the schedule end {}", s.horizon())));
                    }
                }
                Ok(s)
            }
            (None, None) => Err(Error::Config("missing [measure] or [[schedule]]".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_kind_parses() {
        let text = r#"
            seed = 3
            [measure]
            kind = "sum"
            [[measure.parts]]
            kind = "dyadic_comb"
            dim = 2
            sigma = 1.0
            k_min = -30
            k_max = 30
            [[measure.parts]]
            kind = "scaled"
            factor = 2.0
            measure = { kind = "radial", dim = 2, sigma = 1.0 }
            [[measure.parts]]
            kind = "axis"
            dim = 2
            sigma = 1.0
            c = 0.5
            [[measure.parts]]
            kind = "polar"
            dim = 2
            sigma = 1.0
            directions = [[1.0, 0.0, 1.0], [-1.0, 0.0, 1.0]]
            [[measure.parts]]
            kind = "atoms"
            dim = 2
            sigma = 1.0
            atoms = [[0.5, 0.0, 1.0], [-0.5, 0.0, 1.0]]
        "#;
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.seed, Some(3));
        let m = cfg.measure.unwrap().build().unwrap();
        assert_eq!(m.dim(), 2);
        assert!(m.to_string().contains("comb"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in [
            "[measure]\nkind = \"radial\"\ndim = 1\nsigma = 1.0\nalpha = 2.0\n",
            "[measure]\nkind = \"levy\"\ndim = 1\nsigma = 1.0\n",
            "colour = 1\n",
            "[estimate_sweep]\nlambda = [1.0]\n",
        ] {
            assert!(matches!(RunConfig::parse(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn atom_rows_need_a_weight() {
        let m = MeasureConfig::Atoms { dim: 2, sigma: 0.5, atoms: vec![vec![1.0, 0.0]] };
        assert!(matches!(m.build(), Err(Error::Config(_))));
    }

    #[test]
    fn sections_default_to_standard_runs() {
        let cfg = RunConfig::parse("[estimate_sweep]\n[maximal_boundedness]\n").unwrap();
        let s = cfg.estimate_sweep.unwrap().build(0).unwrap();
        assert_eq!(s, SweepConfig::standard(&DEFAULT_SWEEP_SIGMAS).unwrap());
        let b = cfg.maximal_boundedness.unwrap().build(5).unwrap();
        assert_eq!(b, BoundednessConfig::standard(5).unwrap());
        let c = CounterexampleSection::default().build().unwrap();
        assert_eq!((c.l, c.p, c.sigma, c.k_max), (2.5, 4.0, 0.5, 20));
    }

    #[test]
    fn sweep_overrides_apply() {
        let text = "[estimate_sweep]\nsigmas = [1.0]\nfamilies = [\"comb\"]\nseed_count = 2\nswitch_scale = 1.0\n";
        let s = RunConfig::parse(text).unwrap().estimate_sweep.unwrap().build(10).unwrap();
        assert_eq!(s.measures.len(), 1);
        assert_eq!(s.seeds, vec![10, 11]);
        assert_eq!(s.switch_scale, None);
    }

    #[test]
    fn schedule_from_pieces() {
        let text = r#"
            [[schedule]]
            start_t = 0.0
            end_t = 0.5
            measure = { kind = "radial", dim = 1, sigma = 1.5 }
            [[schedule]]
            start_t = 0.5
            end_t = 2.0
            measure = { kind = "axis", dim = 1, sigma = 1.5, c = 2.0 }
        "#;
        let cfg = RunConfig::parse(text).unwrap();
        let s = cfg.schedule(None).unwrap();
        assert_eq!(s.pieces().len(), 2);
        assert_eq!(s.horizon(), 2.0);
        assert!(cfg.schedule(Some(1.0)).is_err());
    }

    #[test]
    fn mode_forcing_is_a_cosine() {
        let f = ForcingConfig::Mode { amplitude: 2.0, frequency: vec![3] }.build(1, 16, 1.0, 0).unwrap();
        let u = &f.fields()[0];
        for (j, v) in u.values().iter().enumerate() {
            assert!((v - 2.0 * (3.0 * u.point(j)[0]).cos()).abs() < 1e-15);
        }
    }
}
