//! Fibers of the maximal attractor by pullback.
//!
//! `I(ω, n) = g_{σ^{-1}ω} ∘ … ∘ g_{σ^{-n}ω}([0, 1])` is a nested sequence of
//! intervals whose intersection `A_ω` is either a point (the value of the
//! invariant graph) or a nondegenerate interval (a bone). All images are
//! computed from endpoints, which is exact for increasing maps.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SkewError};
use crate::sampling::{par_indexed, sample_rng};
use crate::symbolic::{base_distance, in_cylinder, sample_bernoulli_with, SymbolWindow, Tail};
use crate::system::SkewSystem;

pub const DEFAULT_EPSILON_BONE: f64 = 1e-4;
/// Width below which a fiber counts as a point.
pub const DEFAULT_POINT_TOL: f64 = 1e-10;
/// Depth increment between successive classification attempts.
pub const CHECK_STRIDE: usize = 25;
/// A bone must keep its width over this many extra depths.
pub const STABILIZATION_RUN: usize = 50;
pub const STABILIZATION_REL_CHANGE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberBox {
    pub window: SymbolWindow,
    pub depth: usize,
    pub lo: f64,
    pub hi: f64,
}

impl FiberBox {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, lo: f64, hi: f64) -> bool {
        self.lo <= lo && hi <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum FiberClass {
    Point {
        value: f64,
        width: f64,
        depth: usize,
        /// The limit came from a constant past tail rather than truncation.
        exact: bool,
    },
    Bone {
        lo: f64,
        hi: f64,
        width: f64,
        depth: usize,
        exact: bool,
        /// Movement of each endpoint over the stabilization run.
        residual_lo: f64,
        residual_hi: f64,
    },
}

impl FiberClass {
    pub fn is_bone(&self) -> bool {
        matches!(self, FiberClass::Bone { .. })
    }

    pub fn width(&self) -> f64 {
        match self {
            FiberClass::Point { width, .. } | FiberClass::Bone { width, .. } => *width,
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        match self {
            FiberClass::Point { value, width, .. } => (value - 0.5 * width, value + 0.5 * width),
            FiberClass::Bone { lo, hi, .. } => (*lo, *hi),
        }
    }

    pub fn point(&self) -> Option<f64> {
        match self {
            FiberClass::Point { value, .. } => Some(*value),
            FiberClass::Bone { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub max_depth: usize,
    pub tol: f64,
    pub epsilon_bone: f64,
}

impl ClassifyOptions {
    pub fn new(max_depth: usize) -> Self {
        Self {
            max_depth,
            tol: DEFAULT_POINT_TOL,
            epsilon_bone: DEFAULT_EPSILON_BONE,
        }
    }
}

/// `g_{σ^{-1}ω} ∘ … ∘ g_{σ^{-n}ω}(x)`.
pub fn pullback_point(system: &SkewSystem, w: &SymbolWindow, n: usize, x: f64) -> Result<f64> {
    let mut y = x;
    for j in (1..=n as i64).rev() {
        y = system.map_at(w, -j)?.eval(y);
    }
    Ok(y)
}

pub fn pullback_fiber(system: &SkewSystem, w: &SymbolWindow, n: usize) -> Result<FiberBox> {
    let mut lo = 0.0;
    let mut hi = 1.0;
    for j in (1..=n as i64).rev() {
        let g = system.map_at(w, -j)?;
        lo = g.eval(lo);
        hi = g.eval(hi);
    }
    Ok(FiberBox {
        window: w.clone(),
        depth: n,
        lo,
        hi,
    })
}

/// Largest pullback depth the window supports, `None` when unbounded.
pub fn available_depth(system: &SkewSystem, w: &SymbolWindow) -> Option<usize> {
    w.first_defined()
        .map(|first| (-first - system.radius() as i64).max(0) as usize)
}

/// `A_ω` for a window with a constant past tail: beyond the stored symbols
/// every map equals the map `h` of the constant sequence, so the tail
/// contributes exactly the fixed-point hull of `h`, which the finitely many
/// remaining maps then carry to the fiber. Returns `(lo, hi, #maps)`.
pub fn tail_limit(system: &SkewSystem, w: &SymbolWindow) -> Result<Option<(f64, f64, usize)>> {
    let Tail::ConstantSymbol(s) = w.past_tail() else {
        return Ok(None);
    };
    let h = system.map_at(&SymbolWindow::constant(system.k, s)?, 0)?;
    let (mut lo, mut hi) = h.fixed_point_hull();
    let first = w.offset() - system.radius() as i64;
    let mut count = 0;
    for j in first..=-1 {
        let g = system.map_at(w, j)?;
        lo = g.eval(lo);
        hi = g.eval(hi);
        count += 1;
    }
    Ok(Some((lo, hi, count)))
}

fn classify_width(lo: f64, hi: f64, depth: usize, epsilon_bone: f64) -> FiberClass {
    let width = hi - lo;
    if width > epsilon_bone {
        FiberClass::Bone {
            lo,
            hi,
            width,
            depth,
            exact: true,
            residual_lo: 0.0,
            residual_hi: 0.0,
        }
    } else {
        FiberClass::Point {
            value: 0.5 * (lo + hi),
            width,
            depth,
            exact: true,
        }
    }
}

/// `γ(ω)` with the default thresholds.
pub fn graph_value(system: &SkewSystem, w: &SymbolWindow, max_depth: usize, tol: f64) -> Result<FiberClass> {
    classify_fiber(
        system,
        w,
        &ClassifyOptions {
            max_depth,
            tol,
            epsilon_bone: DEFAULT_EPSILON_BONE,
        },
    )
}

/// Classifies `A_ω`. A constant past tail gives the limit exactly. Otherwise
/// the depth grows in steps of [`CHECK_STRIDE`] (capped by what the window
/// defines) until the width drops below `tol`, or stays above `epsilon_bone`
/// with relative change below [`STABILIZATION_REL_CHANGE`] across
/// [`STABILIZATION_RUN`] depths.
pub fn classify_fiber(system: &SkewSystem, w: &SymbolWindow, opts: &ClassifyOptions) -> Result<FiberClass> {
    if let Some((lo, hi, count)) = tail_limit(system, w)? {
        return Ok(classify_width(lo, hi, count, opts.epsilon_bone));
    }
    let cap = available_depth(system, w)
        .unwrap_or(opts.max_depth)
        .min(opts.max_depth);
    let mut history: Vec<(usize, f64, f64)> = Vec::new();
    let mut n = 0;
    while n < cap {
        n = (n + CHECK_STRIDE).min(cap);
        let b = pullback_fiber(system, w, n)?;
        let width = b.width();
        if width < opts.tol {
            return Ok(FiberClass::Point {
                value: 0.5 * (b.lo + b.hi),
                width,
                depth: n,
                exact: false,
            });
        }
        if width > opts.epsilon_bone {
            if let Some(&(_, lo0, hi0)) = history
                .iter()
                .rev()
                .find(|(d, _, _)| n - d >= STABILIZATION_RUN)
            {
                if ((hi0 - lo0) - width).abs() <= STABILIZATION_REL_CHANGE * width {
                    return Ok(FiberClass::Bone {
                        lo: b.lo,
                        hi: b.hi,
                        width,
                        depth: n,
                        exact: false,
                        residual_lo: (b.lo - lo0).abs(),
                        residual_hi: (hi0 - b.hi).abs(),
                    });
                }
            }
        }
        history.push((n, b.lo, b.hi));
    }
    Err(SkewError::Indeterminate {
        depth: n,
        last_width: history.last().map(|(_, lo, hi)| hi - lo).unwrap_or(1.0),
    })
}

/// `|g_ω(γ(ω)) − γ(σω)|` for point fibers.
pub fn invariance_residual(system: &SkewSystem, w: &SymbolWindow, depth: usize) -> Result<f64> {
    let opts = ClassifyOptions::new(depth);
    let here = classify_fiber(system, w, &opts)?;
    let next = classify_fiber(system, &w.shift(), &opts)?;
    match (here.point(), next.point()) {
        (Some(a), Some(b)) => Ok((system.map_at(w, 0)?.eval(a) - b).abs()),
        _ => Err(SkewError::BoneFiber),
    }
}

/// How far `g_ω(A_ω)` sticks out of `A_{σω}`; zero when contained. Works for
/// bones as well as points.
pub fn invariance_containment(system: &SkewSystem, w: &SymbolWindow, depth: usize) -> Result<f64> {
    let opts = ClassifyOptions::new(depth);
    let (lo, hi) = classify_fiber(system, w, &opts)?.interval();
    let (lo_next, hi_next) = classify_fiber(system, &w.shift(), &opts)?.interval();
    let g = system.map_at(w, 0)?;
    Ok((lo_next - g.eval(lo)).max(g.eval(hi) - hi_next).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub id: usize,
    pub depth: usize,
    pub lo: f64,
    pub hi: f64,
    pub width: f64,
    /// `point`, `bone` or `indeterminate`.
    pub class: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoneCensus {
    pub samples: usize,
    pub points: usize,
    pub bones: usize,
    pub indeterminate: usize,
    pub bone_fraction: f64,
    pub epsilon_bone: f64,
    pub rows: Vec<CensusRow>,
    /// Up to ten windows classified as bones.
    pub bone_examples: Vec<SymbolWindow>,
}

impl BoneCensus {
    /// Counts of widths in `bins` equal cells of `[0, max]`; wider fibers land
    /// in the last cell.
    pub fn width_histogram(&self, bins: usize, max: f64) -> Vec<usize> {
        let mut h = vec![0; bins.max(1)];
        for r in self.rows.iter().filter(|r| r.class != "indeterminate") {
            let i = ((r.width / max) * bins as f64).floor().max(0.0) as usize;
            h[i.min(bins - 1)] += 1;
        }
        h
    }
}

/// Classifies each window (in parallel, results in input order).
pub fn census_of_windows(system: &SkewSystem, windows: &[SymbolWindow], opts: &ClassifyOptions) -> BoneCensus {
    let classes = par_indexed(windows.len(), |i| classify_fiber(system, &windows[i], opts));
    let mut rows = Vec::with_capacity(windows.len());
    let (mut points, mut bones, mut indeterminate) = (0, 0, 0);
    let mut bone_examples = Vec::new();
    for (id, c) in classes.into_iter().enumerate() {
        let row = match c {
            Ok(c) => {
                let (lo, hi) = c.interval();
                let depth = match c {
                    FiberClass::Point { depth, .. } | FiberClass::Bone { depth, .. } => depth,
                };
                if c.is_bone() {
                    bones += 1;
                    if bone_examples.len() < 10 {
                        bone_examples.push(windows[id].clone());
                    }
                } else {
                    points += 1;
                }
                CensusRow {
                    id,
                    depth,
                    lo,
                    hi,
                    width: c.width(),
                    class: if c.is_bone() { "bone" } else { "point" }.into(),
                }
            }
            Err(e) => {
                indeterminate += 1;
                let (depth, width) = match e {
                    SkewError::Indeterminate { depth, last_width } => (depth, last_width),
                    _ => (0, f64::NAN),
                };
                CensusRow {
                    id,
                    depth,
                    lo: f64::NAN,
                    hi: f64::NAN,
                    width,
                    class: "indeterminate".into(),
                }
            }
        };
        rows.push(row);
    }
    let samples = windows.len();
    BoneCensus {
        samples,
        points,
        bones,
        indeterminate,
        bone_fraction: if samples == 0 { 0.0 } else { bones as f64 / samples as f64 },
        epsilon_bone: opts.epsilon_bone,
        rows,
        bone_examples,
    }
}

/// Bernoulli windows on `[-past_depth, radius]`, one per derived seed.
pub fn bernoulli_windows(system: &SkewSystem, n_samples: usize, past_depth: usize, seed: u64) -> Vec<SymbolWindow> {
    let future = system.radius();
    par_indexed(n_samples, |i| {
        let mut rng = sample_rng(seed, i as u64);
        sample_bernoulli_with(&mut rng, system.k, past_depth + system.radius(), future)
    })
}

/// Census over Bernoulli-sampled windows, pulled back to `past_depth`.
pub fn bone_census(
    system: &SkewSystem,
    n_samples: usize,
    past_depth: usize,
    epsilon_bone: f64,
    seed: u64,
) -> BoneCensus {
    let windows = bernoulli_windows(system, n_samples, past_depth, seed);
    census_of_windows(
        system,
        &windows,
        &ClassifyOptions {
            max_depth: past_depth,
            tol: DEFAULT_POINT_TOL,
            epsilon_bone,
        },
    )
}

/// Windows `(…, 0, 0, α, 0, 0, …)` with random words `α` of length 1 to 8
/// placed so that they end between index −6 and 3.
pub fn targeted_zero_tail_windows(k: usize, n_words: usize, seed: u64) -> Result<Vec<SymbolWindow>> {
    (0..n_words)
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let len = rng.gen_range(1..=8usize);
            let end: i64 = rng.gen_range(-6..=3);
            let word: Vec<u8> = (0..len).map(|_| rng.gen_range(0..k) as u8).collect();
            SymbolWindow::new(
                k,
                end - len as i64 + 1,
                word,
                Tail::ConstantSymbol(0),
                Tail::ConstantSymbol(0),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureWitness {
    pub window: SymbolWindow,
    pub value: f64,
    pub distance: f64,
    /// `d(ω̃, ω) + |γ(ω̃) − x|`.
    pub product_distance: f64,
    pub zero_block: usize,
    pub steering_length: usize,
}

/// Consecutive steering symbols without improvement before a block length is
/// abandoned.
const STEERING_PATIENCE: usize = 200;

/// Looks for `ω̃ ∈ U_N(ω)` whose fiber is a point within `epsilon` of `x`.
///
/// `ω̃` keeps `ω` from index `−N − radius` on, then (going left) a zero block
/// of length `z`, a steering word and a tail of 1's. For `z = 2·radius, 4·radius, …`
/// the steering word grows one symbol at a time, each time taking the symbol
/// whose completed window has its point nearest to `x` (ties toward 0). The
/// total length of block plus word is limited by `budget`.
pub fn bone_closure_witness(
    system: &SkewSystem,
    w: &SymbolWindow,
    x: f64,
    n: usize,
    epsilon: f64,
    budget: usize,
) -> Result<ClosureWitness> {
    if w.past_tail() != Tail::ConstantSymbol(0) {
        return Err(SkewError::InvalidParameter(
            "closure witness needs a window with a tail of 0's to the left".into(),
        ));
    }
    let k = system.k;
    let keep = -(n as i64) - system.radius() as i64;
    let opts = ClassifyOptions::new(0);
    let one = Tail::ConstantSymbol((1 % k) as u8);
    let build = |zero_block: usize, steer: &[u8]| -> Result<SymbolWindow> {
        // `prefix` is stored left to right: steering word (farthest symbol
        // first), then the zero block.
        let mut prefix: Vec<u8> = steer.iter().rev().copied().collect();
        prefix.extend(std::iter::repeat(0).take(zero_block));
        w.splice_past(keep, &prefix, one)
    };
    let evaluate = |win: &SymbolWindow| -> Result<Option<f64>> {
        Ok(classify_fiber(system, win, &opts)?.point())
    };

    let mut best = f64::INFINITY;
    let mut zero_block = (2 * system.radius()).max(1);
    while zero_block <= budget {
        let mut steer: Vec<u8> = Vec::new();
        let mut stale = 0;
        loop {
            let win = build(zero_block, &steer)?;
            if let Some(v) = evaluate(&win)? {
                let d = (v - x).abs();
                best = best.min(d);
                if d < epsilon && in_cylinder(&win, w, n)? {
                    let base = base_distance(&win, w)?.value;
                    return Ok(ClosureWitness {
                        window: win,
                        value: v,
                        distance: d,
                        product_distance: base + d,
                        zero_block,
                        steering_length: steer.len(),
                    });
                }
            }
            if zero_block + steer.len() >= budget || stale >= STEERING_PATIENCE {
                break;
            }
            let mut choice = (f64::INFINITY, 0u8);
            for s in 0..k as u8 {
                steer.push(s);
                if let Some(v) = evaluate(&build(zero_block, &steer)?)? {
                    let d = (v - x).abs();
                    if d < choice.0 {
                        choice = (d, s);
                    }
                }
                steer.pop();
            }
            if choice.0 < best {
                stale = 0;
            } else {
                stale += 1;
            }
            steer.push(choice.1);
        }
        zero_block *= 2;
    }
    Err(SkewError::WitnessNotFound {
        budget,
        best_distance: best,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackwardCode {
    pub x: f64,
    /// `ω_{-1}, ω_{-2}, …`.
    pub symbols: Vec<u8>,
    /// `f_{ω_{-1}} ∘ … ∘ f_{ω_{-j}}(B)` for `j = 0..=n`.
    pub images: Vec<(f64, f64)>,
}

impl BackwardCode {
    pub fn diameters(&self) -> Vec<f64> {
        self.images.iter().map(|(a, b)| b - a).collect()
    }

    pub fn final_image(&self) -> (f64, f64) {
        *self.images.last().expect("images start with B")
    }
}

/// Greedy backward coding of `x ∈ B`: at depth `j` the next symbol is the
/// first `i` with `x ∈ f_{ω_{-1}} ∘ … ∘ f_{ω_{-j}} ∘ f_i(B)`.
pub fn backward_code(system: &SkewSystem, x: f64, b: (f64, f64), n: usize) -> Result<BackwardCode> {
    let maps = system.step_maps().ok_or(SkewError::NonStepSystem)?;
    let (x0, x1) = b;
    if !(x0 <= x && x <= x1) {
        return Err(SkewError::InvalidParameter(format!("{x} is not in [{x0}, {x1}]")));
    }
    let mut symbols: Vec<u8> = Vec::with_capacity(n);
    let mut images = Vec::with_capacity(n + 1);
    images.push((x0, x1));
    let push = |symbols: &[u8], y: f64| {
        symbols.iter().rev().fold(y, |acc, &s| maps[s as usize].eval(acc))
    };
    for depth in 0..n {
        let mut chosen = None;
        for (i, f) in maps.iter().enumerate() {
            let lo = push(&symbols, f.eval(x0));
            let hi = push(&symbols, f.eval(x1));
            if lo <= x && x <= hi {
                chosen = Some((i as u8, lo, hi));
                break;
            }
        }
        let (i, lo, hi) = chosen.ok_or(SkewError::NoAdmissibleSymbol { depth, y: x })?;
        symbols.push(i);
        images.push((lo, hi));
    }
    Ok(BackwardCode { x, symbols, images })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThicknessPoint {
    pub x: f64,
    pub achieved: f64,
    pub width: f64,
    pub covered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThicknessRecord {
    pub grid_step: f64,
    pub depth: usize,
    pub coverage: f64,
    pub points: Vec<ThicknessPoint>,
}

/// Backward-codes every grid point `x_0 + i·grid_step` strictly inside `B`;
/// a point is covered when its final image is narrower than `grid_step`.
pub fn thickness_coverage(system: &SkewSystem, b: (f64, f64), grid_step: f64, n: usize) -> Result<ThicknessRecord> {
    if !(grid_step > 0.0) {
        return Err(SkewError::InvalidParameter("grid step must be positive".into()));
    }
    let (x0, x1) = b;
    let xs: Vec<f64> = (1..)
        .map(|i| x0 + i as f64 * grid_step)
        .take_while(|&x| x < x1 - 1e-12)
        .collect();
    let codes = par_indexed(xs.len(), |i| backward_code(system, xs[i], b, n));
    let mut points = Vec::with_capacity(xs.len());
    for c in codes {
        let c = c?;
        let (lo, hi) = c.final_image();
        points.push(ThicknessPoint {
            x: c.x,
            achieved: 0.5 * (lo + hi),
            width: hi - lo,
            covered: hi - lo < grid_step,
        });
    }
    let coverage = if points.is_empty() {
        0.0
    } else {
        points.iter().filter(|p| p.covered).count() as f64 / points.len() as f64
    };
    Ok(ThicknessRecord {
        grid_step,
        depth: n,
        coverage,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{make_bony_perturbation, make_default_step_system};
    use approx::assert_abs_diff_eq;

    fn bony() -> SkewSystem {
        make_bony_perturbation(&make_default_step_system(), 2, (0.25, 0.35), 0.02).unwrap()
    }

    fn past(symbols: &[u8], tail: u8) -> SymbolWindow {
        // `symbols` lists ω_{-len}, …, ω_{-1}, ω_0.
        SymbolWindow::new(
            2,
            -(symbols.len() as i64) + 1,
            symbols.to_vec(),
            Tail::ConstantSymbol(tail),
            Tail::ConstantSymbol(0),
        )
        .unwrap()
    }

    #[test]
    fn all_zero_past_converges_to_neutral_point() {
        let s = make_default_step_system();
        let w = SymbolWindow::constant(2, 0).unwrap();
        let mut last = 1.0;
        for n in [10, 100, 1000, 10000] {
            let b = pullback_fiber(&s, &w, n).unwrap();
            assert!(b.lo < 0.3 + 1e-12 && b.hi > 0.3 - 1e-12);
            assert!(b.width() < last);
            last = b.width();
        }
        let c = graph_value(&s, &w, 100, 1e-10).unwrap();
        assert_abs_diff_eq!(c.point().unwrap(), 0.3, epsilon = 1e-12);
    }

    #[test]
    fn all_one_past_contracts_geometrically() {
        let s = make_default_step_system();
        let w = SymbolWindow::constant(2, 1).unwrap();
        for n in [5, 20, 40] {
            let b = pullback_fiber(&s, &w, n).unwrap();
            assert!(b.width() <= 0.6_f64.powi(n as i32) * (1.0 + 1e-9));
            assert!(b.lo <= 0.7 + 1e-15 && 0.7 <= b.hi + 1e-15);
        }
    }

    #[test]
    fn one_tail_then_zero_lands_on_f0_of_p1() {
        let s = make_default_step_system();
        let w = past(&[0, 0], 1);
        let c = graph_value(&s, &w, 0, 1e-10).unwrap();
        assert_abs_diff_eq!(c.point().unwrap(), 0.7 - 0.5 * 0.4_f64.powi(3), epsilon = 1e-12);
        let b = pullback_fiber(&s, &w, 60).unwrap();
        assert_abs_diff_eq!(b.lo, 0.668, epsilon = 1e-12);
        assert_abs_diff_eq!(b.hi, 0.668, epsilon = 1e-12);
    }

    #[test]
    fn bony_all_zero_fiber_is_the_identity_core() {
        let c = graph_value(&bony(), &SymbolWindow::constant(2, 0).unwrap(), 1000, 1e-10).unwrap();
        let (lo, hi) = c.interval();
        assert!(c.is_bone());
        assert!(lo <= 0.27 && hi >= 0.33);
        assert_abs_diff_eq!(c.width(), 0.1, epsilon = 1e-5);
    }

    #[test]
    fn bony_window_with_one_inside_radius_is_a_point() {
        let s = bony();
        let w = sample_bernoulli_with(&mut sample_rng(3, 0), 2, 300, 2);
        let mut symbols = w.slice(-300, 2).unwrap();
        let len = symbols.len();
        symbols[len - 4] = 1;
        let w = SymbolWindow::new(2, -300, symbols, Tail::Unspecified, Tail::Unspecified).unwrap();
        assert_eq!(w.symbol(-1).unwrap(), 1);
        let c = graph_value(&s, &w, 300, 1e-10).unwrap();
        assert!(!c.is_bone());
    }

    #[test]
    fn truncated_windows_report_indeterminate() {
        let s = make_default_step_system();
        let w = SymbolWindow::new(2, -3, vec![0, 0, 0, 0], Tail::Unspecified, Tail::Unspecified).unwrap();
        match classify_fiber(&s, &w, &ClassifyOptions::new(1000)) {
            Err(SkewError::Indeterminate { depth, .. }) => assert_eq!(depth, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn residuals_and_containment() {
        let s = make_default_step_system();
        let zero = SymbolWindow::constant(2, 0).unwrap();
        assert!(invariance_residual(&s, &zero, 10).unwrap() < 1e-12);
        let w = sample_bernoulli_with(&mut sample_rng(11, 4), 2, 200, 1);
        assert!(invariance_residual(&s, &w, 200).unwrap() < 1e-8);
        let b = bony();
        assert_eq!(invariance_residual(&b, &zero, 10), Err(SkewError::BoneFiber));
        assert!(invariance_containment(&b, &zero, 10).unwrap() < 1e-8);
    }

    #[test]
    fn targeted_words_give_bones() {
        let s = bony();
        let windows = targeted_zero_tail_windows(2, 20, 1).unwrap();
        let c = census_of_windows(&s, &windows, &ClassifyOptions::new(1000));
        assert_eq!(c.bones, 20);
    }

    #[test]
    fn census_is_reproducible() {
        let s = bony();
        let a = bone_census(&s, 50, 150, DEFAULT_EPSILON_BONE, 9);
        let b = bone_census(&s, 50, 150, DEFAULT_EPSILON_BONE, 9);
        assert_eq!(a, b);
        assert_eq!(a.bones, 0);
        assert_eq!(a.width_histogram(10, 0.2).iter().sum::<usize>(), a.points);
    }

    #[test]
    fn backward_code_first_symbol() {
        let s = make_default_step_system();
        let c = backward_code(&s, 0.5, (0.35, 0.65), 1).unwrap();
        assert_eq!(c.symbols, vec![0]);
        assert_abs_diff_eq!(c.images[1].0, 0.35 - 0.5 * 0.05_f64.powi(3), epsilon = 1e-15);
        assert_abs_diff_eq!(c.images[1].1, 0.6285625, epsilon = 1e-15);
        // 0.55 lies in both images; the tie goes to 0.
        assert_eq!(backward_code(&s, 0.55, (0.35, 0.65), 1).unwrap().symbols, vec![0]);
        // 0.64 lies only in f_1(B) = (0.49, 0.67).
        assert_eq!(backward_code(&s, 0.64, (0.35, 0.65), 1).unwrap().symbols, vec![1]);
    }

    #[test]
    fn closure_witness_with_vacuous_tolerance() {
        let s = bony();
        let zero = SymbolWindow::constant(2, 0).unwrap();
        let wit = bone_closure_witness(&s, &zero, 0.3, 3, 1.0, 100).unwrap();
        assert!(in_cylinder(&wit.window, &zero, 3).unwrap());
        assert_eq!(wit.steering_length, 0);
        assert_eq!(wit.window.past_tail(), Tail::ConstantSymbol(1));
    }

    #[test]
    fn closure_witness_near_top_endpoint() {
        let s = bony();
        let zero = SymbolWindow::constant(2, 0).unwrap();
        let (_, hi) = graph_value(&s, &zero, 0, 1e-10).unwrap().interval();
        let wit = bone_closure_witness(&s, &zero, hi, 5, 0.01, 10_000).unwrap();
        assert!(wit.distance < 0.01);
        let again = graph_value(&s, &wit.window, 0, 1e-10).unwrap();
        assert_eq!(again.point(), Some(wit.value));
    }
}
