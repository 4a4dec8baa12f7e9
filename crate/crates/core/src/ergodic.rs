//! Fiber Lyapunov exponents, orbit stability under perturbation and a
//! correlation-decay proxy for mixing. Exponents are in nats per step.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attractor::{classify_fiber, ClassifyOptions};
use crate::error::{Result, SkewError};
use crate::interval_map::IntervalMap;
use crate::measures::DiscreteMeasure;
use crate::sampling::{mean_se, median, median_ci95, par_indexed, sample_rng};
use crate::symbolic::{sample_bernoulli_with, SymbolWindow};
use crate::system::SkewSystem;

/// Default number of grid points for the sup-norm estimator.
pub const DEFAULT_EXPONENT_GRID: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    SupNorm,
    Pointwise,
    StationaryIntegral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub kind: EstimatorKind,
    pub value: f64,
    pub depth: usize,
    pub samples: usize,
    pub standard_error: f64,
    /// Per-sample values `a_n(ω) / n` or Birkhoff averages.
    pub per_sample: Vec<f64>,
}

/// Window on `[-r, n − 1 + r]` for a forward orbit of length `n`.
fn forward_window<R: Rng>(rng: &mut R, system: &SkewSystem, n: usize) -> SymbolWindow {
    let r = system.radius();
    let w = sample_bernoulli_with(rng, system.k, r, n + r);
    debug_assert!(w.first_defined() == Some(-(r as i64)));
    w
}

/// `log ‖D f^n_ω‖` maximized over `points`, accumulated as a sum of logs.
pub fn log_sup_derivative(system: &SkewSystem, w: &SymbolWindow, n: usize, points: &[f64]) -> Result<f64> {
    let maps: Vec<&IntervalMap> = (0..n as i64).map(|j| system.map_at(w, j)).collect::<Result<_>>()?;
    let mut best = f64::NEG_INFINITY;
    for &x0 in points {
        let mut x = x0;
        let mut acc = 0.0;
        for g in &maps {
            acc += g.d1(x).ln();
            x = g.eval(x);
        }
        best = best.max(acc);
    }
    Ok(best)
}

pub fn uniform_grid(points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Mean over sampled `ω` of `a_n(ω) / n` with `a_n(ω) = log sup_x Df^n_ω(x)`.
pub fn sup_norm_exponent(system: &SkewSystem, n: usize, x_grid: usize, n_samples: usize, seed: u64) -> Result<ExponentEstimate> {
    if n == 0 {
        return Err(SkewError::InvalidParameter("depth must be at least 1".into()));
    }
    let grid = uniform_grid(x_grid);
    let values = par_indexed(n_samples, |i| {
        let w = forward_window(&mut sample_rng(seed, i as u64), system, n);
        log_sup_derivative(system, &w, n, &grid).map(|a| a / n as f64)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let (value, standard_error) = mean_se(&values);
    Ok(ExponentEstimate {
        kind: EstimatorKind::SupNorm,
        value,
        depth: n,
        samples: n_samples,
        standard_error,
        per_sample: values,
    })
}

/// Birkhoff averages `(1/n) Σ_j log Dg_{σ^j ω}(x_j)` from uniform `x_0`.
pub fn pointwise_exponent(system: &SkewSystem, n: usize, n_samples: usize, seed: u64) -> Result<ExponentEstimate> {
    if n == 0 {
        return Err(SkewError::InvalidParameter("depth must be at least 1".into()));
    }
    let values = par_indexed(n_samples, |i| -> Result<f64> {
        let mut rng = sample_rng(seed, i as u64);
        let w = forward_window(&mut rng, system, n);
        let mut x: f64 = rng.gen();
        let mut acc = 0.0;
        for j in 0..n as i64 {
            let g = system.map_at(&w, j)?;
            acc += g.d1(x).ln();
            x = g.eval(x);
        }
        Ok(acc / n as f64)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let (value, standard_error) = mean_se(&values);
    Ok(ExponentEstimate {
        kind: EstimatorKind::Pointwise,
        value,
        depth: n,
        samples: n_samples,
        standard_error,
        per_sample: values,
    })
}

/// `∫ (1/k) Σ_i log Df_i dm`, histogram bins at their midpoints.
pub fn stationary_integral_exponent(m: &DiscreteMeasure, maps: &[IntervalMap]) -> Result<f64> {
    m.validate()?;
    let k = maps.len() as f64;
    Ok(m.as_atoms()
        .iter()
        .filter(|(_, w)| *w > 0.0)
        .map(|&(x, w)| w * maps.iter().map(|f| f.d1(x).ln()).sum::<f64>() / k)
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub epsilon: f64,
    pub horizon: usize,
    /// `#{1 ≤ n ≤ N : |f^n_ω(x) − g^n_ω(x)| > ε} / N` per sample.
    pub exceedance: Vec<f64>,
    pub median: f64,
    pub median_ci95: (f64, f64),
    pub mean: f64,
}

/// Drives `F` and `G` with the same `ω` from the same uniform `x`.
pub fn orbit_stability(
    f: &SkewSystem,
    g: &SkewSystem,
    n_samples: usize,
    horizon: usize,
    epsilon: f64,
    seed: u64,
) -> Result<StabilityRecord> {
    let distances = orbit_distances(f, g, n_samples, horizon, seed)?;
    Ok(stability_from_distances(&distances, epsilon))
}

/// Fiber distances `|f^n_ω(x) − g^n_ω(x)|`, `n = 1..=horizon`, per sample.
pub fn orbit_distances(f: &SkewSystem, g: &SkewSystem, n_samples: usize, horizon: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if f.k != g.k {
        return Err(SkewError::AlphabetMismatch { left: f.k, right: g.k });
    }
    let wider = if g.radius() > f.radius() { g } else { f };
    par_indexed(n_samples, |i| -> Result<Vec<f64>> {
        let mut rng = sample_rng(seed, i as u64);
        let w = forward_window(&mut rng, wider, horizon);
        let x0: f64 = rng.gen();
        let (mut a, mut b) = (x0, x0);
        let mut out = Vec::with_capacity(horizon);
        for j in 0..horizon as i64 {
            a = f.map_at(&w, j)?.eval(a);
            b = g.map_at(&w, j)?.eval(b);
            out.push((a - b).abs());
        }
        Ok(out)
    })
    .into_iter()
    .collect()
}

pub fn stability_from_distances(distances: &[Vec<f64>], epsilon: f64) -> StabilityRecord {
    let horizon = distances.first().map_or(0, Vec::len);
    let exceedance: Vec<f64> = distances
        .iter()
        .map(|d| d.iter().filter(|&&v| v > epsilon).count() as f64 / horizon.max(1) as f64)
        .collect();
    StabilityRecord {
        epsilon,
        horizon,
        median: median(&exceedance),
        median_ci95: median_ci95(&exceedance),
        mean: mean_se(&exceedance).0,
        exceedance,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagCorrelation {
    pub lag: usize,
    /// `E[x_0 x_n] − E[x_0] E[x_n]`.
    pub covariance: f64,
    pub abs: f64,
    pub standard_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRecord {
    pub depth: usize,
    pub samples_used: usize,
    pub excluded_bones: usize,
    pub excluded_indeterminate: usize,
    pub lags: Vec<LagCorrelation>,
}

/// `C_n = |E[φ · ψ∘G^n] − E[φ] E[ψ]|` for `φ = ψ = x` under `μ_G`: sample
/// `(ω, γ(ω))` and follow the forward orbit, which stays on the graph.
pub fn correlation_decay(system: &SkewSystem, depth: usize, lags: &[usize], n_samples: usize, seed: u64) -> Result<DecayRecord> {
    let max_lag = lags.iter().copied().max().unwrap_or(0);
    let r = system.radius();
    let opts = ClassifyOptions::new(depth);
    let samples = par_indexed(n_samples, |i| -> Result<Option<Vec<f64>>> {
        let mut rng = sample_rng(seed, i as u64);
        let w = sample_bernoulli_with(&mut rng, system.k, depth + r, max_lag + r);
        let gamma = match classify_fiber(system, &w, &opts) {
            Ok(c) => match c.point() {
                Some(v) => v,
                None => return Ok(None),
            },
            Err(SkewError::Indeterminate { .. }) => return Err(SkewError::Indeterminate { depth, last_width: f64::NAN }),
            Err(e) => return Err(e),
        };
        let orbit = system.forward_orbit(&w, gamma, max_lag)?;
        Ok(Some(lags.iter().map(|&l| orbit[l]).chain([gamma]).collect()))
    });
    let mut rows = Vec::new();
    let (mut bones, mut indeterminate) = (0, 0);
    for s in samples {
        match s {
            Ok(Some(v)) => rows.push(v),
            Ok(None) => bones += 1,
            Err(SkewError::Indeterminate { .. }) => indeterminate += 1,
            Err(e) => return Err(e),
        }
    }
    if rows.len() < 2 {
        return Err(SkewError::InvalidParameter("fewer than two point fibers sampled".into()));
    }
    let first = lags.len();
    let n = rows.len() as f64;
    // Shifting by a reference sample leaves covariances unchanged and makes a
    // constant graph give exactly zero.
    let shift = rows[0].clone();
    let centered = |col: usize| -> Vec<f64> {
        let v: Vec<f64> = rows.iter().map(|r| r[col] - shift[col]).collect();
        let mean = v.iter().sum::<f64>() / n;
        v.into_iter().map(|x| x - mean).collect()
    };
    let x0 = centered(first);
    let lags = lags
        .iter()
        .enumerate()
        .map(|(c, &lag)| {
            let xn = centered(c);
            let prods: Vec<f64> = x0.iter().zip(&xn).map(|(a, b)| a * b).collect();
            let (covariance, standard_error) = mean_se(&prods);
            LagCorrelation {
                lag,
                covariance,
                abs: covariance.abs(),
                standard_error,
            }
        })
        .collect();
    Ok(DecayRecord {
        depth,
        samples_used: rows.len(),
        excluded_bones: bones,
        excluded_indeterminate: indeterminate,
        lags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::make_default_step_system;
    use approx::assert_abs_diff_eq;

    fn twin() -> SkewSystem {
        SkewSystem::step(vec![IntervalMap::affine(0.7, 0.6), IntervalMap::affine(0.7, 0.6)])
    }

    #[test]
    fn constant_derivative_recovers_log_slope() {
        let s = sup_norm_exponent(&twin(), 200, 16, 8, 1).unwrap();
        assert_abs_diff_eq!(s.value, 0.6_f64.ln(), epsilon = 1e-12);
        let p = pointwise_exponent(&twin(), 200, 8, 1).unwrap();
        assert_abs_diff_eq!(p.value, 0.6_f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn point_mass_integrals() {
        let maps = make_default_step_system().base_maps().to_vec();
        let at = |x| stationary_integral_exponent(&DiscreteMeasure::dirac(x), &maps).unwrap();
        assert_abs_diff_eq!(at(0.3), 0.5 * 0.6_f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(at(0.7), 0.5 * (0.76_f64.ln() + 0.6_f64.ln()), epsilon = 1e-15);
        let single = vec![IntervalMap::affine(0.7, 0.6)];
        let u = DiscreteMeasure::uniform(7);
        assert_abs_diff_eq!(stationary_integral_exponent(&u, &single).unwrap(), 0.6_f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn identical_systems_never_separate() {
        let s = make_default_step_system();
        let r = orbit_stability(&s, &s, 20, 300, 1e-12, 4).unwrap();
        assert!(r.exceedance.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn twin_system_has_no_correlation() {
        let d = correlation_decay(&twin(), 100, &[0, 1, 5], 200, 3).unwrap();
        assert!(d.lags.iter().all(|l| l.covariance == 0.0 && l.standard_error == 0.0));
    }

    #[test]
    fn lag_zero_is_the_variance() {
        let d = correlation_decay(&make_default_step_system(), 200, &[0], 500, 3).unwrap();
        assert!(d.lags[0].covariance > 0.0);
    }
}
