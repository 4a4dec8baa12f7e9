//! Probability measures on `[0, 1]`, the transfer operator
//! `T(μ) = (1/k) Σ_i μ ∘ f_i^{-1}`, its stationary measure, and the
//! Hutchinson (Wasserstein-1) distance.

use serde::{Deserialize, Serialize};

use crate::attractor::{bernoulli_windows, classify_fiber, ClassifyOptions, DEFAULT_EPSILON_BONE};
use crate::error::{Result, SkewError};
use crate::interval_map::IntervalMap;
use crate::sampling::{mean_se, par_indexed};
use crate::system::SkewSystem;

/// Allowed deviation of the total mass from 1, plus `n·ε` for `n` weights to
/// absorb summation rounding.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Histogram weights are the masses of `n` equal bins of `[0, 1]`; for
/// distances and integrals each bin's mass sits at the bin midpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiscreteMeasure {
    Atoms { atoms: Vec<(f64, f64)> },
    Histogram { weights: Vec<f64> },
}

impl DiscreteMeasure {
    pub fn dirac(x: f64) -> Self {
        Self::Atoms {
            atoms: vec![(x, 1.0)],
        }
    }

    pub fn atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let m = Self::Atoms { atoms };
        m.validate()?;
        Ok(m)
    }

    /// Equal weights on the given positions.
    pub fn empirical(values: &[f64]) -> Result<Self> {
        let w = 1.0 / values.len() as f64;
        Self::atoms(values.iter().map(|&x| (x, w)).collect())
    }

    pub fn histogram(weights: Vec<f64>) -> Result<Self> {
        let m = Self::Histogram { weights };
        m.validate()?;
        Ok(m)
    }

    pub fn uniform(bins: usize) -> Self {
        Self::Histogram {
            weights: vec![1.0 / bins as f64; bins],
        }
    }

    /// All mass in the bin containing `x`.
    pub fn histogram_dirac(bins: usize, x: f64) -> Self {
        let mut weights = vec![0.0; bins];
        weights[bin_of(x, bins)] = 1.0;
        Self::Histogram { weights }
    }

    pub fn total(&self) -> f64 {
        match self {
            Self::Atoms { atoms } => atoms.iter().map(|a| a.1).sum(),
            Self::Histogram { weights } => weights.iter().sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok_weights = match self {
            Self::Atoms { atoms } => atoms
                .iter()
                .all(|&(x, w)| w >= 0.0 && (0.0..=1.0).contains(&x)),
            Self::Histogram { weights } => !weights.is_empty() && weights.iter().all(|&w| w >= 0.0),
        };
        if !ok_weights {
            return Err(SkewError::InvalidParameter(
                "weights must be nonnegative and positions inside [0, 1]".into(),
            ));
        }
        let total = self.total();
        let n = match self {
            Self::Atoms { atoms } => atoms.len(),
            Self::Histogram { weights } => weights.len(),
        };
        if (total - 1.0).abs() > NORMALIZATION_TOL + n as f64 * f64::EPSILON {
            return Err(SkewError::NotNormalized { total });
        }
        Ok(())
    }

    /// `(position, weight)` pairs, histogram bins at their midpoints.
    pub fn as_atoms(&self) -> Vec<(f64, f64)> {
        match self {
            Self::Atoms { atoms } => atoms.clone(),
            Self::Histogram { weights } => {
                let n = weights.len() as f64;
                weights
                    .iter()
                    .enumerate()
                    .map(|(i, &w)| ((i as f64 + 0.5) / n, w))
                    .collect()
            }
        }
    }

    /// Mass outside `[lo, hi]`.
    pub fn mass_outside(&self, lo: f64, hi: f64) -> f64 {
        match self {
            Self::Atoms { atoms } => atoms
                .iter()
                .filter(|(x, _)| *x < lo || *x > hi)
                .map(|a| a.1)
                .sum(),
            Self::Histogram { weights } => {
                let n = weights.len() as f64;
                weights
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (*i as f64 + 1.0) / n <= lo || (*i as f64) / n >= hi)
                    .map(|(_, w)| w)
                    .sum()
            }
        }
    }

    /// Bin masses of the measure on `bins` equal cells.
    pub fn to_histogram(&self, bins: usize) -> Self {
        let mut weights = vec![0.0; bins];
        for (x, w) in self.as_atoms() {
            weights[bin_of(x, bins)] += w;
        }
        Self::Histogram { weights }
    }
}

fn bin_of(x: f64, bins: usize) -> usize {
    ((x * bins as f64).floor().max(0.0) as usize).min(bins - 1)
}

/// Row-stochastic Ulam matrix: bin `j` sends mass `1/k` along each map `f_i`,
/// split over the bins meeting `f_i(bin j)` in proportion to overlap length.
#[derive(Debug, Clone, PartialEq)]
pub struct UlamOperator {
    bins: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl UlamOperator {
    pub fn new(maps: &[IntervalMap], bins: usize) -> Self {
        let k = maps.len() as f64;
        let h = 1.0 / bins as f64;
        let rows = par_indexed(bins, |j| {
            let mut row: Vec<(usize, f64)> = Vec::new();
            for f in maps {
                let a = f.eval(j as f64 * h);
                let b = f.eval((j + 1) as f64 * h);
                let len = b - a;
                let first = bin_of(a, bins);
                let last = bin_of(b, bins);
                for t in first..=last {
                    let lo = (t as f64 * h).max(a);
                    let hi = ((t + 1) as f64 * h).min(b);
                    let share = if len > 0.0 { (hi - lo).max(0.0) / len } else { 1.0 };
                    if share > 0.0 {
                        match row.iter_mut().find(|(c, _)| *c == t) {
                            Some(entry) => entry.1 += share / k,
                            None => row.push((t, share / k)),
                        }
                    }
                }
            }
            row
        });
        Self { bins, rows }
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    /// One step on histogram weights, renormalized.
    pub fn apply(&self, weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.bins];
        for (row, &w) in self.rows.iter().zip(weights) {
            if w == 0.0 {
                continue;
            }
            for &(t, p) in row {
                out[t] += w * p;
            }
        }
        let total: f64 = out.iter().sum();
        out.iter_mut().for_each(|v| *v /= total);
        out
    }
}

pub fn transfer_apply(mu: &DiscreteMeasure, maps: &[IntervalMap]) -> Result<DiscreteMeasure> {
    mu.validate()?;
    let k = maps.len() as f64;
    Ok(match mu {
        DiscreteMeasure::Atoms { atoms } => DiscreteMeasure::Atoms {
            atoms: atoms
                .iter()
                .flat_map(|&(x, w)| maps.iter().map(move |f| (f.eval(x), w / k)))
                .collect(),
        },
        DiscreteMeasure::Histogram { weights } => DiscreteMeasure::Histogram {
            weights: UlamOperator::new(maps, weights.len()).apply(weights),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryMeasure {
    pub measure: DiscreteMeasure,
    pub iterations: usize,
    /// Hutchinson distance between the last two iterates.
    pub last_change: f64,
}

pub fn stationary_measure(maps: &[IntervalMap], bins: usize, tol: f64, max_iter: usize) -> Result<StationaryMeasure> {
    stationary_measure_from(maps, &DiscreteMeasure::uniform(bins), tol, max_iter)
}

/// Power iteration of the Ulam operator from a given histogram, stopped when
/// successive iterates are closer than `tol` in the Hutchinson distance.
pub fn stationary_measure_from(
    maps: &[IntervalMap],
    initial: &DiscreteMeasure,
    tol: f64,
    max_iter: usize,
) -> Result<StationaryMeasure> {
    initial.validate()?;
    let DiscreteMeasure::Histogram { weights } = initial else {
        return Err(SkewError::InvalidParameter(
            "power iteration starts from a histogram".into(),
        ));
    };
    let op = UlamOperator::new(maps, weights.len());
    let mut current = weights.clone();
    let mut change = f64::INFINITY;
    for it in 1..=max_iter {
        let next = op.apply(&current);
        change = histogram_distance(&current, &next);
        current = next;
        if change < tol {
            return Ok(StationaryMeasure {
                measure: DiscreteMeasure::Histogram { weights: current },
                iterations: it,
                last_change: change,
            });
        }
    }
    Err(SkewError::MaxIterations {
        iterations: max_iter,
        last_change: change,
    })
}

/// Hutchinson distance of two histograms on the same bins.
fn histogram_distance(a: &[f64], b: &[f64]) -> f64 {
    let h = 1.0 / a.len() as f64;
    let mut cum = 0.0;
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        cum += x - y;
        acc += cum.abs();
    }
    // The last cumulative difference spans no gap between midpoints.
    acc -= cum.abs();
    acc * h
}

/// `∫_0^1 |F_μ − F_ν|`, exact for the step CDFs of the atom representations.
pub fn hutchinson_distance(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    mu.validate()?;
    nu.validate()?;
    if let (DiscreteMeasure::Histogram { weights: a }, DiscreteMeasure::Histogram { weights: b }) = (mu, nu) {
        if a.len() == b.len() {
            return Ok(histogram_distance(a, b));
        }
    }
    let mut events: Vec<(f64, f64)> = mu.as_atoms();
    events.extend(nu.as_atoms().into_iter().map(|(x, w)| (x, -w)));
    events.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut acc = 0.0;
    let mut cum = 0.0;
    let mut i = 0;
    while i < events.len() {
        let x = events[i].0;
        // Net mass at this position first, so equal atoms cancel exactly.
        let mut net = 0.0;
        while i < events.len() && events[i].0 == x {
            net += events[i].1;
            i += 1;
        }
        cum += net;
        if let Some(&(next, _)) = events.get(i) {
            acc += cum.abs() * (next - x);
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphPoint {
    pub id: usize,
    /// `Σ_{j≥1} ω_{-j} k^{-j}`, a digest of the past.
    pub coordinate: f64,
    pub gamma: f64,
}

/// Sample of the graph measure `μ_G`: Bernoulli windows and their fiber points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSample {
    pub points: Vec<GraphPoint>,
    pub bones: usize,
    pub indeterminate: usize,
}

impl ProductSample {
    pub fn fiber_marginal(&self) -> Result<DiscreteMeasure> {
        let values: Vec<f64> = self.points.iter().map(|p| p.gamma).collect();
        DiscreteMeasure::empirical(&values)
    }
}

/// Width below which sampled fibers count as points for measure purposes.
pub const MEASURE_POINT_TOL: f64 = 1e-8;
/// Largest tolerated share of bones among Bernoulli samples.
pub const MAX_BONE_FRACTION: f64 = 0.01;

pub fn graph_measure(system: &SkewSystem, n_samples: usize, depth: usize, seed: u64) -> Result<ProductSample> {
    let windows = bernoulli_windows(system, n_samples, depth, seed);
    let opts = ClassifyOptions {
        max_depth: depth,
        tol: MEASURE_POINT_TOL,
        epsilon_bone: DEFAULT_EPSILON_BONE,
    };
    let classes = par_indexed(windows.len(), |i| classify_fiber(system, &windows[i], &opts));
    let mut points = Vec::with_capacity(n_samples);
    let (mut bones, mut indeterminate) = (0, 0);
    for (id, c) in classes.into_iter().enumerate() {
        match c {
            Ok(c) => match c.point() {
                Some(gamma) => points.push(GraphPoint {
                    id,
                    coordinate: windows[id].past_coordinate(),
                    gamma,
                }),
                None => bones += 1,
            },
            Err(SkewError::Indeterminate { .. }) => indeterminate += 1,
            Err(e) => return Err(e),
        }
    }
    let fraction = bones as f64 / n_samples.max(1) as f64;
    if fraction > MAX_BONE_FRACTION {
        return Err(SkewError::TooManyBones {
            fraction,
            threshold: MAX_BONE_FRACTION,
        });
    }
    Ok(ProductSample {
        points,
        bones,
        indeterminate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDistance {
    /// Hutchinson distance of the two fiber marginals.
    pub lower: f64,
    /// Mean of `|γ_F(ω) − γ_G(ω)|` over shared windows.
    pub upper: f64,
    pub upper_se: f64,
    pub samples_used: usize,
    pub excluded: usize,
}

/// Brackets `d_H(μ_F, μ_G)` on the product between the marginal distance
/// and the cost of the coupling that shares `ω`.
pub fn graph_distance(f: &SkewSystem, g: &SkewSystem, n_samples: usize, depth: usize, seed: u64) -> Result<GraphDistance> {
    if f.k != g.k {
        return Err(SkewError::AlphabetMismatch { left: f.k, right: g.k });
    }
    let wider = if g.radius() > f.radius() { g } else { f };
    let windows = bernoulli_windows(wider, n_samples, depth, seed);
    let opts = ClassifyOptions {
        max_depth: depth,
        tol: MEASURE_POINT_TOL,
        epsilon_bone: DEFAULT_EPSILON_BONE,
    };
    let pairs = par_indexed(windows.len(), |i| -> Result<Option<(f64, f64)>> {
        let a = classify_fiber(f, &windows[i], &opts);
        let b = classify_fiber(g, &windows[i], &opts);
        match (a, b) {
            (Ok(a), Ok(b)) => Ok(a.point().zip(b.point())),
            (Err(SkewError::Indeterminate { .. }), _) | (_, Err(SkewError::Indeterminate { .. })) => Ok(None),
            (Err(e), _) | (_, Err(e)) => Err(e),
        }
    });
    let mut gf = Vec::new();
    let mut gg = Vec::new();
    let mut excluded = 0;
    for p in pairs {
        match p? {
            Some((a, b)) => {
                gf.push(a);
                gg.push(b);
            }
            None => excluded += 1,
        }
    }
    if gf.is_empty() {
        return Err(SkewError::InvalidParameter("no window classified as a point in both systems".into()));
    }
    let diffs: Vec<f64> = gf.iter().zip(&gg).map(|(a, b)| (a - b).abs()).collect();
    let (upper, upper_se) = mean_se(&diffs);
    let lower = hutchinson_distance(&DiscreteMeasure::empirical(&gf)?, &DiscreteMeasure::empirical(&gg)?)?;
    Ok(GraphDistance {
        lower,
        upper,
        upper_se,
        samples_used: gf.len(),
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::make_default_step_system;
    use approx::assert_abs_diff_eq;

    fn default_maps() -> Vec<IntervalMap> {
        make_default_step_system().base_maps().to_vec()
    }

    #[test]
    fn dirac_pushforward() {
        let m = transfer_apply(&DiscreteMeasure::dirac(0.3), &default_maps()).unwrap();
        let DiscreteMeasure::Atoms { atoms } = m else { panic!() };
        assert_abs_diff_eq!(atoms[0].0, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(atoms[1].0, 0.46, epsilon = 1e-15);
        assert_eq!((atoms[0].1, atoms[1].1), (0.5, 0.5));
    }

    #[test]
    fn ulam_step_preserves_mass() {
        let m = transfer_apply(&DiscreteMeasure::uniform(500), &default_maps()).unwrap();
        assert!((m.total() - 1.0).abs() < 1e-12);
        let DiscreteMeasure::Histogram { weights } = m else { panic!() };
        assert!(weights.iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn simple_distances() {
        let d = |a: &DiscreteMeasure, b: &DiscreteMeasure| hutchinson_distance(a, b).unwrap();
        assert_abs_diff_eq!(d(&DiscreteMeasure::dirac(0.2), &DiscreteMeasure::dirac(0.5)), 0.3, epsilon = 1e-15);
        let two = DiscreteMeasure::atoms(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap();
        assert_abs_diff_eq!(d(&two, &DiscreteMeasure::dirac(0.5)), 0.5, epsilon = 1e-15);
        let h = DiscreteMeasure::histogram_dirac(10, 0.33);
        assert_abs_diff_eq!(d(&h, &DiscreteMeasure::dirac(0.35)), 0.0, epsilon = 1e-15);
        // Mixed representations go through the general path.
        let u = DiscreteMeasure::uniform(4);
        let v = DiscreteMeasure::histogram_dirac(5, 0.5);
        assert_abs_diff_eq!(d(&u, &v), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let bad = DiscreteMeasure::Atoms {
            atoms: vec![(0.1, 0.4)],
        };
        assert!(matches!(
            hutchinson_distance(&bad, &DiscreteMeasure::dirac(0.1)),
            Err(SkewError::NotNormalized { .. })
        ));
        assert!(transfer_apply(&bad, &default_maps()).is_err());
    }

    #[test]
    fn single_map_stationary_measure_is_a_dirac() {
        let maps = vec![IntervalMap::affine(0.7, 0.6)];
        let m = stationary_measure(&maps, 1000, 1e-12, 10_000).unwrap();
        assert!(hutchinson_distance(&m.measure, &DiscreteMeasure::dirac(0.7)).unwrap() < 2e-3);
    }

    #[test]
    fn max_iterations_is_reported() {
        let r = stationary_measure(&default_maps(), 200, 0.0, 5);
        assert!(matches!(r, Err(SkewError::MaxIterations { iterations: 5, .. })));
    }
}
