//! Skew systems `F(ω, x) = (σω, f_ω(x))` and the rules producing `f_ω`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SkewError};
use crate::interval_map::{IntervalMap, DEFAULT_VERIFY_GRID};
use crate::symbolic::{base_distance, SymbolWindow, Tail};

/// Metadata keys for the covering interval `B = (x0, x1)`.
pub const COVERING_X0: &str = "covering_x0";
pub const COVERING_X1: &str = "covering_x1";

/// One entry of a windowed rule: the exact symbol pattern on `[-m, m]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRule {
    pub pattern: Vec<u8>,
    pub map: IntervalMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FiberRule {
    /// `g_ω = maps[ω_0]`.
    Step { maps: Vec<IntervalMap> },
    /// `g_ω` is the table entry whose pattern equals `ω` on `[-radius, radius]`,
    /// and `base_maps[ω_0]` when no entry matches.
    Windowed {
        radius: usize,
        base_maps: Vec<IntervalMap>,
        table: Vec<PatternRule>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewSystem {
    pub k: usize,
    pub rule: FiberRule,
    #[serde(default)]
    pub metadata: BTreeMap<String, f64>,
}

impl SkewSystem {
    pub fn step(maps: Vec<IntervalMap>) -> Self {
        Self {
            k: maps.len(),
            rule: FiberRule::Step { maps },
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_metadata(mut self, key: &str, value: f64) -> Self {
        self.metadata.insert(key.to_owned(), value);
        self
    }

    /// Number of symbols on each side of the current one that the rule reads.
    pub fn radius(&self) -> usize {
        match &self.rule {
            FiberRule::Step { .. } => 0,
            FiberRule::Windowed { radius, .. } => *radius,
        }
    }

    pub fn step_maps(&self) -> Option<&[IntervalMap]> {
        match &self.rule {
            FiberRule::Step { maps } => Some(maps),
            FiberRule::Windowed { .. } => None,
        }
    }

    /// The maps `f_i` selected by `ω_0` away from any table pattern.
    pub fn base_maps(&self) -> &[IntervalMap] {
        match &self.rule {
            FiberRule::Step { maps } => maps,
            FiberRule::Windowed { base_maps, .. } => base_maps,
        }
    }

    /// Every distinct map the rule can produce.
    pub fn all_maps(&self) -> Vec<&IntervalMap> {
        match &self.rule {
            FiberRule::Step { maps } => maps.iter().collect(),
            FiberRule::Windowed {
                base_maps, table, ..
            } => base_maps
                .iter()
                .chain(table.iter().map(|r| &r.map))
                .collect(),
        }
    }

    pub fn covering_interval(&self) -> Option<(f64, f64)> {
        Some((
            *self.metadata.get(COVERING_X0)?,
            *self.metadata.get(COVERING_X1)?,
        ))
    }

    /// The fiber map of `σ^j ω`.
    pub fn map_at<'a>(&'a self, w: &SymbolWindow, j: i64) -> Result<&'a IntervalMap> {
        if w.k() != self.k {
            return Err(SkewError::AlphabetMismatch {
                left: self.k,
                right: w.k(),
            });
        }
        match &self.rule {
            FiberRule::Step { maps } => Ok(&maps[w.symbol(j)? as usize]),
            FiberRule::Windowed {
                radius,
                base_maps,
                table,
            } => {
                let m = *radius as i64;
                // Read the whole pattern first so that undefined coordinates
                // are reported even when a table entry would mismatch early.
                for i in (j - m)..=(j + m) {
                    w.symbol(i)?;
                }
                'entries: for entry in table {
                    for (p, i) in entry.pattern.iter().zip((j - m)..=(j + m)) {
                        if w.symbol(i)? != *p {
                            continue 'entries;
                        }
                    }
                    return Ok(&entry.map);
                }
                Ok(&base_maps[w.symbol(j)? as usize])
            }
        }
    }

    /// `g_ω` for the window itself.
    pub fn fiber_map(&self, w: &SymbolWindow) -> Result<IntervalMap> {
        self.map_at(w, 0).cloned()
    }

    /// `x, g_ω(x), …, g_ω^n(x)` with `g_ω^n = g_{σ^{n-1}ω} ∘ … ∘ g_ω`.
    pub fn forward_orbit(&self, w: &SymbolWindow, x: f64, n: usize) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&x) {
            return Err(SkewError::Domain { x });
        }
        let mut orbit = Vec::with_capacity(n + 1);
        orbit.push(x);
        let mut y = x;
        for j in 0..n {
            y = self.map_at(w, j as i64)?.eval(y);
            orbit.push(y);
        }
        Ok(orbit)
    }

    /// Structural checks plus the map invariants on a grid.
    pub fn validate(&self, grid: usize) -> Result<()> {
        if self.k < 2 {
            return Err(SkewError::InvalidParameter(format!(
                "alphabet size {} must be at least 2",
                self.k
            )));
        }
        let base = self.base_maps();
        if base.len() != self.k {
            return Err(SkewError::InvalidParameter(format!(
                "expected {} maps, found {}",
                self.k,
                base.len()
            )));
        }
        if let FiberRule::Windowed { radius, table, .. } = &self.rule {
            for entry in table {
                if entry.pattern.len() != 2 * radius + 1 {
                    return Err(SkewError::InvalidParameter(format!(
                        "pattern of length {} does not match radius {radius}",
                        entry.pattern.len()
                    )));
                }
                if let Some(&s) = entry.pattern.iter().find(|&&s| s as usize >= self.k) {
                    return Err(SkewError::InvalidSymbol { symbol: s, k: self.k });
                }
            }
        }
        for m in self.all_maps() {
            m.validate(grid)?;
        }
        Ok(())
    }
}

/// The step system used throughout: `f_0(x) = x − 0.5 (x − 0.3)³` with a
/// neutral fixed point at 0.3, `f_1(x) = 0.7 + 0.6 (x − 0.7)`, and covering
/// interval `B = (0.35, 0.65)`.
pub fn make_default_step_system() -> SkewSystem {
    SkewSystem::step(vec![
        IntervalMap::cubic(0.3, 0.5),
        IntervalMap::affine(0.7, 0.6),
    ])
    .with_metadata(COVERING_X0, 0.35)
    .with_metadata(COVERING_X1, 0.65)
}

/// Replaces `f_0` by a map that is the identity on `[u_lo, u_hi]` on every
/// window that is all zeros on `[-m, m]`; other windows keep `f_{ω_0}`.
pub fn make_bony_perturbation(
    base: &SkewSystem,
    m: usize,
    u: (f64, f64),
    transition: f64,
) -> Result<SkewSystem> {
    let maps = base.step_maps().ok_or(SkewError::NonStepSystem)?;
    let (lo, hi) = u;
    if !(transition > 0.0 && lo < hi) {
        return Err(SkewError::InvalidParameter(format!(
            "need lo < hi and positive transition, got [{lo}, {hi}] / {transition}"
        )));
    }
    if maps.len() > 1 {
        let (p1, _) = maps[1].fixed_point_hull();
        if !(lo - transition > 0.0 && hi + transition < p1) {
            return Err(SkewError::InvalidParameter(format!(
                "blend region [{}, {}] must lie inside (0, {p1})",
                lo - transition,
                hi + transition
            )));
        }
    }
    let g = IntervalMap::blended(maps[0].clone(), lo, hi, transition);
    g.validate(DEFAULT_VERIFY_GRID)?;
    let mut metadata = base.metadata.clone();
    metadata.insert("bony_radius".into(), m as f64);
    metadata.insert("bony_u_lo".into(), lo);
    metadata.insert("bony_u_hi".into(), hi);
    metadata.insert("bony_transition".into(), transition);
    Ok(SkewSystem {
        k: base.k,
        rule: FiberRule::Windowed {
            radius: m,
            base_maps: maps.to_vec(),
            table: vec![PatternRule {
                pattern: vec![0; 2 * m + 1],
                map: g,
            }],
        },
        metadata,
    })
}

/// Grid estimate of the `C²` distance between two maps and between their
/// inverses: the larger of the two maxima of `|Δf| + |Δf'| + |Δf''|`.
pub fn map_distance_c2(f: &IntervalMap, g: &IntervalMap, grid: usize) -> f64 {
    if f == g {
        return 0.0;
    }
    let n = grid.max(2);
    let mut forward: f64 = 0.0;
    for i in 0..n {
        let x = i as f64 / (n - 1) as f64;
        let a = f.jet(x);
        let b = g.jet(x);
        forward = forward.max((a.value - b.value).abs() + (a.d1 - b.d1).abs() + (a.d2 - b.d2).abs());
    }
    let (fa, fb) = f.image();
    let (ga, gb) = g.image();
    let lo = fa.max(ga);
    let hi = fb.min(gb);
    let mut backward: f64 = 0.0;
    if hi > lo {
        let inverse_jet = |m: &IntervalMap, y: f64| {
            let x = m.inverse(y).expect("y lies in the common image");
            let j = m.jet(x);
            (x, 1.0 / j.d1, -j.d2 / (j.d1 * j.d1 * j.d1))
        };
        for i in 0..n {
            let y = (lo + (hi - lo) * i as f64 / (n - 1) as f64).clamp(lo, hi);
            let a = inverse_jet(f, y);
            let b = inverse_jet(g, y);
            backward = backward.max((a.0 - b.0).abs() + (a.1 - b.1).abs() + (a.2 - b.2).abs());
        }
    }
    forward.max(backward)
}

/// Lower estimate of `sup_ω dist_{C²}(f_ω^{±1}, g_ω^{±1})` over the given
/// windows.
pub fn dist_c2(
    f: &SkewSystem,
    g: &SkewSystem,
    sample_windows: &[SymbolWindow],
    grid: usize,
) -> Result<f64> {
    if f.k != g.k {
        return Err(SkewError::AlphabetMismatch {
            left: f.k,
            right: g.k,
        });
    }
    let mut best: f64 = 0.0;
    for w in sample_windows {
        let a = f.map_at(w, 0)?;
        let b = g.map_at(w, 0)?;
        best = best.max(map_distance_c2(a, b, grid));
    }
    Ok(best)
}

/// Windows that exercise every table pattern of a rule and every base map,
/// padded with constant tails; the natural sample set for [`dist_c2`].
pub fn probe_windows(systems: &[&SkewSystem]) -> Result<Vec<SymbolWindow>> {
    let k = systems.first().map(|s| s.k).unwrap_or(2);
    let mut out = Vec::new();
    for s in 0..k as u8 {
        out.push(SymbolWindow::constant(k, s)?);
        out.push(SymbolWindow::new(
            k,
            0,
            vec![s],
            Tail::ConstantSymbol(((s as usize + 1) % k) as u8),
            Tail::ConstantSymbol(((s as usize + 1) % k) as u8),
        )?);
    }
    for sys in systems {
        if let FiberRule::Windowed { radius, table, .. } = &sys.rule {
            for entry in table {
                let pad = ((entry.pattern[0] as usize + 1) % k) as u8;
                out.push(SymbolWindow::new(
                    k,
                    -(*radius as i64),
                    entry.pattern.clone(),
                    Tail::ConstantSymbol(pad),
                    Tail::ConstantSymbol(pad),
                )?);
            }
        }
    }
    Ok(out)
}

/// A bony perturbation rescaled to a prescribed `C²` distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledPerturbation {
    pub system: SkewSystem,
    /// Factor applied to the half-width of `U` and to the transition width.
    pub scale: f64,
    pub distance: f64,
}

/// Shrinks `U` about its center together with the transition width, choosing
/// the factor in `(0, 1]` by bisection so that `dist_C2` to `base` over
/// [`probe_windows`] is within `1e-6` relative of `target`.
pub fn bony_perturbation_at_distance(
    base: &SkewSystem,
    m: usize,
    u: (f64, f64),
    transition: f64,
    target: f64,
    grid: usize,
) -> Result<ScaledPerturbation> {
    let center = 0.5 * (u.0 + u.1);
    let half = 0.5 * (u.1 - u.0);
    let build = |scale: f64| -> Result<(SkewSystem, f64)> {
        let g = make_bony_perturbation(
            base,
            m,
            (center - scale * half, center + scale * half),
            scale * transition,
        )?;
        let windows = probe_windows(&[base, &g])?;
        let d = dist_c2(base, &g, &windows, grid)?;
        Ok((g, d))
    };
    let (mut system, mut distance) = build(1.0)?;
    if distance < target {
        return Err(SkewError::InvalidParameter(format!(
            "target distance {target} exceeds the unscaled distance {distance}"
        )));
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut scale = 1.0;
    for _ in 0..100 {
        if (distance - target).abs() <= 1e-6 * target {
            break;
        }
        scale = 0.5 * (lo + hi);
        let (g, d) = build(scale)?;
        if d > target {
            hi = scale;
        } else {
            lo = scale;
        }
        system = g;
        distance = d;
    }
    Ok(ScaledPerturbation {
        system,
        scale,
        distance,
    })
}

/// Grid resolution used by [`estimate_base_lipschitz`] for map distances.
pub const LIPSCHITZ_GRID: usize = 1000;

/// `max dist_{C²}(g_ω, g_ω') / d(ω, ω')` over sampled pairs that differ in a
/// single coordinate within distance `radius + 1` of the origin.
pub fn estimate_base_lipschitz(system: &SkewSystem, n_pairs: usize, seed: u64) -> Result<f64> {
    let m = system.radius() as i64;
    let span = m + 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = system.k;
    let mut best: f64 = 0.0;
    for _ in 0..n_pairs {
        let symbols: Vec<u8> = (0..(2 * span + 1)).map(|_| rng.gen_range(0..k) as u8).collect();
        let w = SymbolWindow::new(
            k,
            -span,
            symbols.clone(),
            Tail::ConstantSymbol(0),
            Tail::ConstantSymbol(0),
        )?;
        let j = rng.gen_range(-(m + 1)..=(m + 1));
        let mut flipped = symbols;
        let idx = (j + span) as usize;
        flipped[idx] = ((flipped[idx] as usize + rng.gen_range(1..k)) % k) as u8;
        let w2 = SymbolWindow::new(k, -span, flipped, Tail::ConstantSymbol(0), Tail::ConstantSymbol(0))?;
        let d = base_distance(&w, &w2)?.value;
        let c2 = map_distance_c2(system.map_at(&w, 0)?, system.map_at(&w2, 0)?, LIPSCHITZ_GRID);
        best = best.max(c2 / d);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::sample_bernoulli;
    use approx::assert_abs_diff_eq;

    fn bony() -> SkewSystem {
        make_bony_perturbation(&make_default_step_system(), 2, (0.25, 0.35), 0.02).unwrap()
    }

    #[test]
    fn default_system_is_valid() {
        let s = make_default_step_system();
        s.validate(DEFAULT_VERIFY_GRID).unwrap();
        assert_eq!(s.covering_interval(), Some((0.35, 0.65)));
        bony().validate(DEFAULT_VERIFY_GRID).unwrap();
    }

    #[test]
    fn step_rule_reads_current_symbol() {
        let s = make_default_step_system();
        let w = SymbolWindow::new(2, -1, vec![0, 1, 0], Tail::Unspecified, Tail::Unspecified).unwrap();
        assert_eq!(s.fiber_map(&w).unwrap(), IntervalMap::affine(0.7, 0.6));
        assert_eq!(s.map_at(&w, -1).unwrap(), &IntervalMap::cubic(0.3, 0.5));
        assert!(matches!(s.map_at(&w, 2), Err(SkewError::OutOfWindow { index: 2 })));
    }

    #[test]
    fn bony_rule_examples() {
        let g = bony();
        let zero = SymbolWindow::constant(2, 0).unwrap();
        let m = g.fiber_map(&zero).unwrap();
        assert!(matches!(m, IntervalMap::Blended { .. }));
        assert_eq!(m.evaluate(0.3).unwrap(), 0.3);
        for x in [0.25, 0.27, 0.3, 0.33, 0.35] {
            assert_eq!(m.derivative(x, 1).unwrap(), 1.0);
        }
        let w = SymbolWindow::new(2, -1, vec![1], Tail::ConstantSymbol(0), Tail::ConstantSymbol(0)).unwrap();
        let m = g.fiber_map(&w).unwrap();
        assert_eq!(m, IntervalMap::cubic(0.3, 0.5));
        assert_abs_diff_eq!(m.evaluate(0.5).unwrap(), 0.496, epsilon = 1e-15);
        let w = SymbolWindow::new(2, 0, vec![1], Tail::ConstantSymbol(0), Tail::ConstantSymbol(0)).unwrap();
        assert_eq!(g.fiber_map(&w).unwrap(), IntervalMap::affine(0.7, 0.6));
        // Windowed rules need the full radius to be defined.
        let short = SymbolWindow::new(2, -1, vec![0, 0, 0], Tail::Unspecified, Tail::Unspecified).unwrap();
        assert!(g.fiber_map(&short).is_err());
    }

    #[test]
    fn window_locality() {
        let g = bony();
        for seed in 0..50 {
            let w = sample_bernoulli(2, 8, 8, seed);
            let mut symbols = w.symbols().to_vec();
            // indices -8..=8; flip everything outside [-2, 2]
            for (idx, s) in symbols.iter_mut().enumerate() {
                let i = idx as i64 - 8;
                if i.abs() > 2 {
                    *s ^= 1;
                }
            }
            let w2 = SymbolWindow::new(2, -8, symbols, Tail::Unspecified, Tail::Unspecified).unwrap();
            assert_eq!(g.fiber_map(&w).unwrap(), g.fiber_map(&w2).unwrap());
        }
    }

    #[test]
    fn bony_rejects_bad_regions() {
        let base = make_default_step_system();
        assert!(make_bony_perturbation(&base, 2, (0.35, 0.25), 0.02).is_err());
        assert!(make_bony_perturbation(&base, 2, (0.01, 0.35), 0.02).is_err());
        assert!(make_bony_perturbation(&base, 2, (0.6, 0.69), 0.02).is_err());
        let windowed = bony();
        assert_eq!(
            make_bony_perturbation(&windowed, 2, (0.25, 0.35), 0.02),
            Err(SkewError::NonStepSystem)
        );
        // A blend much narrower than the displacement it has to absorb folds.
        assert!(matches!(
            make_bony_perturbation(&base, 1, (0.2, 0.4), 5e-4),
            Err(SkewError::NotMonotone { .. })
        ));
    }

    #[test]
    fn forward_orbit_examples() {
        let s = make_default_step_system();
        let zero = SymbolWindow::constant(2, 0).unwrap();
        assert!(s.forward_orbit(&zero, 0.3, 20).unwrap().iter().all(|&x| x == 0.3));
        let ones = SymbolWindow::constant(2, 1).unwrap();
        let orbit = s.forward_orbit(&ones, 0.3, 40).unwrap();
        for (n, x) in orbit.iter().enumerate() {
            assert_abs_diff_eq!(*x, 0.7 + 0.6_f64.powi(n as i32) * (0.3 - 0.7), epsilon = 1e-14);
        }
        assert_abs_diff_eq!(orbit[1], 0.46, epsilon = 1e-15);
        assert_abs_diff_eq!(orbit[2], 0.556, epsilon = 1e-15);
        let w = sample_bernoulli(2, 0, 30, 5);
        let orbit = s.forward_orbit(&w, 0.41, 30).unwrap();
        let mut x = 0.41;
        for j in 0..30 {
            x = s.fiber_map(&w.shift_by(j)).unwrap().evaluate(x).unwrap();
            assert_eq!(orbit[j as usize + 1], x);
        }
    }

    #[test]
    fn c2_distance_properties() {
        let f = make_default_step_system();
        let windows = probe_windows(&[&f]).unwrap();
        assert_eq!(dist_c2(&f, &f, &windows, 500).unwrap(), 0.0);
        let mut last = 0.0;
        for delta in [0.01, 0.02, 0.04] {
            let g = SkewSystem::step(vec![
                IntervalMap::cubic(0.3, 0.5),
                IntervalMap::affine(0.7, 0.6 + delta),
            ]);
            let d = dist_c2(&f, &g, &windows, 500).unwrap();
            // Closed form for two affine maps with a common fixed point p:
            // forward sup is |Δc|(max|x - p|) + |Δc|, inverse sup similar.
            let forward = delta * 0.7 + delta;
            assert!(d >= forward - 1e-12, "d={d} forward={forward}");
            assert!(d > last);
            assert_abs_diff_eq!(d, dist_c2(&g, &f, &windows, 500).unwrap(), epsilon = 0.0);
            last = d;
        }
    }

    #[test]
    fn c2_distance_of_affine_pair_matches_closed_form() {
        let f = IntervalMap::affine(0.7, 0.6);
        let g = IntervalMap::affine(0.7, 0.64);
        // Forward: |Δc||x - 0.7| + |Δc|, largest at x = 0.
        // Inverse: |(y - 0.7)(1/c - 1/c')| + |1/c - 1/c'| on the common image.
        let fwd: f64 = 0.04 * 0.7 + 0.04;
        let inv_slope = 1.0 / 0.6 - 1.0 / 0.64;
        let common_lo = (0.7_f64 - 0.6 * 0.7).max(0.7 - 0.64 * 0.7);
        let inv = inv_slope * (0.7 - common_lo) + inv_slope;
        let d = map_distance_c2(&f, &g, 2001);
        assert_abs_diff_eq!(d, fwd.max(inv), epsilon = 1e-9);
    }

    #[test]
    fn bony_distance_shrinks_with_smaller_region() {
        let base = make_default_step_system();
        let mut last = f64::INFINITY;
        for scale in [1.0, 0.5, 0.25, 0.1] {
            let g = make_bony_perturbation(&base, 2, (0.3 - 0.05 * scale, 0.3 + 0.05 * scale), 0.02 * scale).unwrap();
            let windows = probe_windows(&[&base, &g]).unwrap();
            let d = dist_c2(&base, &g, &windows, 2000).unwrap();
            assert!(d > 0.0 && d < last, "scale={scale} d={d}");
            last = d;
        }
        // Widening the transition at fixed core also lowers the distance.
        let narrow = make_bony_perturbation(&base, 2, (0.29, 0.31), 0.002).unwrap();
        let wide = make_bony_perturbation(&base, 2, (0.29, 0.31), 0.01).unwrap();
        let w = probe_windows(&[&narrow]).unwrap();
        assert!(dist_c2(&base, &wide, &w, 4000).unwrap() < dist_c2(&base, &narrow, &w, 4000).unwrap());
    }

    #[test]
    fn perturbation_hits_requested_distance() {
        let base = make_default_step_system();
        let mut last_scale = f64::INFINITY;
        for target in [0.04, 0.02, 0.01] {
            let p = bony_perturbation_at_distance(&base, 2, (0.25, 0.35), 0.02, target, 2000).unwrap();
            assert!((p.distance - target).abs() <= 1e-6 * target);
            assert!(p.scale < last_scale);
            last_scale = p.scale;
        }
        assert!(bony_perturbation_at_distance(&base, 2, (0.25, 0.35), 0.02, 50.0, 500).is_err());
    }

    #[test]
    fn base_lipschitz_estimates() {
        let s = make_default_step_system();
        let c = estimate_base_lipschitz(&s, 200, 3).unwrap();
        let pair = map_distance_c2(&s.base_maps()[0], &s.base_maps()[1], LIPSCHITZ_GRID);
        assert_abs_diff_eq!(c, pair, epsilon = 1e-12);

        let g = bony();
        let c = estimate_base_lipschitz(&g, 400, 3).unwrap();
        let blend = &g.all_maps()[2];
        let bound = 4.0
            * map_distance_c2(&s.base_maps()[0], blend, LIPSCHITZ_GRID)
                .max(map_distance_c2(&s.base_maps()[1], blend, LIPSCHITZ_GRID))
            + map_distance_c2(&s.base_maps()[0], &s.base_maps()[1], LIPSCHITZ_GRID);
        assert!(c.is_finite() && c > 0.0 && c <= bound, "c={c} bound={bound}");

        let one_map = SkewSystem::step(vec![IntervalMap::affine(0.7, 0.6); 2]);
        assert_eq!(estimate_base_lipschitz(&one_map, 50, 1).unwrap(), 0.0);
    }

    #[test]
    fn system_json_round_trip() {
        let g = bony();
        let text = serde_json::to_string(&g).unwrap();
        let back: SkewSystem = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        assert!(text.contains("\"type\":\"windowed\""));
    }
}
