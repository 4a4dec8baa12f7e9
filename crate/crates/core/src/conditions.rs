//! Grid verification of the hypotheses placed on a step system:
//! (a) strict invariance, (b) weak contraction of `f_0`, (c) uniform
//! contraction of the other maps, (d) contraction on average, (e) fixed
//! points and the no-cycle condition, (f) the covering property.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SkewError};
use crate::interval_map::IntervalMap;
use crate::system::SkewSystem;

/// Tolerance used for equalities that should hold exactly (`Df_0(p_0) = 1`,
/// distinctness of fixed points, no-cycle margins).
pub const EXACT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapImage {
    pub index: usize,
    pub value_at_0: f64,
    pub value_at_1: f64,
    pub min_derivative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntoIntervalCheck {
    pub passed: bool,
    pub maps: Vec<MapImage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakContractionCheck {
    pub passed: bool,
    pub fixed_point: f64,
    pub sign_changes: usize,
    pub derivative_at_fixed_point: f64,
    pub neighborhood_radius: f64,
    /// Largest `Df_0` on grid points farther than the radius from `p_0`.
    pub max_derivative_off_neighborhood: f64,
    pub max_derivative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractingMap {
    pub index: usize,
    pub sup_derivative: f64,
    pub fixed_point: f64,
    pub sign_changes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformContractionCheck {
    pub passed: bool,
    pub maps: Vec<ContractingMap>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageContractionCheck {
    pub passed: bool,
    /// `sup_x Π_i Df_i(x)` over the grid and the fixed points.
    pub sup_product: f64,
    pub argmax: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoCycleMargin {
    /// `i` in `f_i(p_j)`.
    pub map: usize,
    /// `j` in `f_i(p_j)`.
    pub point: usize,
    pub image: f64,
    /// `min_l |f_i(p_j) − p_l|`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointCheck {
    pub passed: bool,
    pub fixed_points: Vec<f64>,
    pub min_separation: f64,
    pub min_boundary_distance: f64,
    pub no_cycle: Vec<NoCycleMargin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringCheck {
    pub passed: bool,
    pub x0: Option<f64>,
    pub x1: Option<f64>,
    /// `p_0 < x_0 < x_1 < p_1`.
    pub ordered: bool,
    pub f0_at_x0: Option<f64>,
    pub f1_at_x1: Option<f64>,
    /// `f_0(x_1) − f_1(x_0)`; positive when the two images overlap.
    pub overlap_margin: Option<f64>,
    pub sup_derivative_f0: Option<f64>,
    pub sup_derivative_f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub grid: usize,
    pub into_interval: IntoIntervalCheck,
    pub weak_contraction_f0: WeakContractionCheck,
    pub uniform_contraction: UniformContractionCheck,
    pub contraction_on_average: AverageContractionCheck,
    pub fixed_points: FixedPointCheck,
    pub covering: CoveringCheck,
    pub all_passed: bool,
}

fn grid_points(grid: usize) -> impl Iterator<Item = f64> + Clone {
    let n = grid.max(2);
    (0..n).map(move |i| i as f64 / (n - 1) as f64)
}

/// Number of strict sign changes of `f(x) − x` along the grid.
fn sign_changes(map: &IntervalMap, grid: usize) -> usize {
    let mut last = 0i8;
    let mut changes = 0;
    for x in grid_points(grid) {
        let d = map.displacement(x);
        let s = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                changes += 1;
            }
            last = s;
        }
    }
    changes
}

fn sup_derivative_on(map: &IntervalMap, lo: f64, hi: f64, grid: usize) -> f64 {
    let n = grid.max(2);
    (0..n)
        .map(|i| map.d1(lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Verifies (a)–(f) for a step system; `B` is read from the system metadata.
pub fn check_conditions(system: &SkewSystem, grid: usize) -> Result<ConditionReport> {
    check_conditions_with_covering(system, grid, system.covering_interval())
}

pub fn check_conditions_with_covering(
    system: &SkewSystem,
    grid: usize,
    covering: Option<(f64, f64)>,
) -> Result<ConditionReport> {
    let maps = system.step_maps().ok_or(SkewError::NonStepSystem)?;
    if maps.len() < 2 {
        return Err(SkewError::InvalidParameter(
            "condition check needs at least two maps".into(),
        ));
    }
    let grid = grid.max(2);

    // (a)
    let images: Vec<MapImage> = maps
        .iter()
        .enumerate()
        .map(|(index, m)| {
            let (a, b) = m.image();
            MapImage {
                index,
                value_at_0: a,
                value_at_1: b,
                min_derivative: grid_points(grid).map(|x| m.d1(x)).fold(f64::INFINITY, f64::min),
            }
        })
        .collect();
    let into_interval = IntoIntervalCheck {
        passed: images.iter().all(|im| {
            im.value_at_0 > 0.0 && im.value_at_1 < 1.0 && im.min_derivative > 0.0
        }) && maps.iter().all(|m| m.validate(grid).is_ok()),
        maps: images,
    };

    let fixed: Vec<f64> = maps
        .iter()
        .map(|m| {
            let (a, b) = m.fixed_point_hull();
            0.5 * (a + b)
        })
        .collect();
    let unique_fixed = |m: &IntervalMap| {
        let (a, b) = m.fixed_point_hull();
        b - a < EXACT_TOL
    };

    // (b)
    let f0 = &maps[0];
    let p0 = fixed[0];
    let radius = 10.0 / grid as f64;
    let max_off = grid_points(grid)
        .filter(|x| (x - p0).abs() > radius)
        .map(|x| f0.d1(x))
        .fold(f64::NEG_INFINITY, f64::max);
    let max_all = grid_points(grid).map(|x| f0.d1(x)).fold(f0.d1(p0), f64::max);
    let changes0 = sign_changes(f0, grid);
    let dp0 = f0.d1(p0);
    let weak_contraction_f0 = WeakContractionCheck {
        passed: changes0 == 1
            && unique_fixed(f0)
            && (dp0 - 1.0).abs() < EXACT_TOL
            && max_off < 1.0
            && max_all <= 1.0 + 1e-12,
        fixed_point: p0,
        sign_changes: changes0,
        derivative_at_fixed_point: dp0,
        neighborhood_radius: radius,
        max_derivative_off_neighborhood: max_off,
        max_derivative: max_all,
    };

    // (c)
    let contracting: Vec<ContractingMap> = maps
        .iter()
        .enumerate()
        .skip(1)
        .map(|(index, m)| ContractingMap {
            index,
            sup_derivative: sup_derivative_on(m, 0.0, 1.0, grid),
            fixed_point: fixed[index],
            sign_changes: sign_changes(m, grid),
        })
        .collect();
    let uniform_contraction = UniformContractionCheck {
        passed: contracting.iter().all(|c| c.sup_derivative < 1.0 && c.sign_changes == 1)
            && maps.iter().skip(1).all(unique_fixed),
        maps: contracting,
    };

    // (d)
    let mut sup_product = f64::NEG_INFINITY;
    let mut argmax = 0.0;
    for x in grid_points(grid).chain(fixed.iter().copied()) {
        let prod: f64 = maps.iter().map(|m| m.d1(x)).product();
        if prod > sup_product {
            sup_product = prod;
            argmax = x;
        }
    }
    let contraction_on_average = AverageContractionCheck {
        passed: sup_product < 1.0,
        sup_product,
        argmax,
    };

    // (e)
    let mut min_sep = f64::INFINITY;
    for i in 0..fixed.len() {
        for j in (i + 1)..fixed.len() {
            min_sep = min_sep.min((fixed[i] - fixed[j]).abs());
        }
    }
    let min_boundary = fixed
        .iter()
        .map(|p| p.min(1.0 - p))
        .fold(f64::INFINITY, f64::min);
    let mut no_cycle = Vec::new();
    for (i, m) in maps.iter().enumerate() {
        for (j, &pj) in fixed.iter().enumerate() {
            if i == j {
                continue;
            }
            let image = m.eval(pj);
            let margin = fixed
                .iter()
                .map(|pl| (image - pl).abs())
                .fold(f64::INFINITY, f64::min);
            no_cycle.push(NoCycleMargin {
                map: i,
                point: j,
                image,
                margin,
            });
        }
    }
    let fixed_points = FixedPointCheck {
        passed: min_sep > EXACT_TOL
            && min_boundary > EXACT_TOL
            && no_cycle.iter().all(|c| c.margin > EXACT_TOL),
        fixed_points: fixed.clone(),
        min_separation: min_sep,
        min_boundary_distance: min_boundary,
        no_cycle,
    };

    // (f), read for the two maps that realize the covering.
    let covering = match covering {
        None => CoveringCheck {
            passed: false,
            x0: None,
            x1: None,
            ordered: false,
            f0_at_x0: None,
            f1_at_x1: None,
            overlap_margin: None,
            sup_derivative_f0: None,
            sup_derivative_f1: None,
        },
        Some((x0, x1)) => {
            let f1 = &maps[1];
            let ordered = fixed[0] < x0 && x0 < x1 && x1 < fixed[1];
            let f0_x0 = f0.eval(x0);
            let f1_x1 = f1.eval(x1);
            let margin = f0.eval(x1) - f1.eval(x0);
            let s0 = sup_derivative_on(f0, x0, x1, grid);
            let s1 = sup_derivative_on(f1, x0, x1, grid);
            CoveringCheck {
                passed: ordered && f0_x0 < x0 && f1_x1 > x1 && margin > 0.0 && s0 < 1.0 && s1 < 1.0,
                x0: Some(x0),
                x1: Some(x1),
                ordered,
                f0_at_x0: Some(f0_x0),
                f1_at_x1: Some(f1_x1),
                overlap_margin: Some(margin),
                sup_derivative_f0: Some(s0),
                sup_derivative_f1: Some(s1),
            }
        }
    };

    let all_passed = into_interval.passed
        && weak_contraction_f0.passed
        && uniform_contraction.passed
        && contraction_on_average.passed
        && fixed_points.passed
        && covering.passed;
    Ok(ConditionReport {
        grid,
        into_interval,
        weak_contraction_f0,
        uniform_contraction,
        contraction_on_average,
        fixed_points,
        covering,
        all_passed,
    })
}
