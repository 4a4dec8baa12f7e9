//! Strictly increasing `C²` self-maps of `[0, 1]` with analytic derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SkewError};

/// Default number of points used when a map is verified on a grid.
pub const DEFAULT_VERIFY_GRID: usize = 10_000;

/// A represented fiber map.
///
/// `Composition { maps }` applies `maps[0]` first, then `maps[1]`, and so on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IntervalMap {
    /// `x ↦ x − a (x − p)³`.
    CubicPinned { fixed_point: f64, coefficient: f64 },
    /// `x ↦ p + c (x − p)`.
    Affine { fixed_point: f64, slope: f64 },
    /// Identity on `[lo, hi]`, `base` outside `[lo − width, hi + width]`,
    /// joined by a quintic smoothstep so the result stays `C²`.
    Blended {
        base: Box<IntervalMap>,
        lo: f64,
        hi: f64,
        width: f64,
    },
    Composition { maps: Vec<IntervalMap> },
}

/// Value, first and second derivative at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

fn check_domain(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(SkewError::Domain { x })
    }
}

/// Weight of `base` in a blended map at `x`, with its first two derivatives.
fn blend_weight(x: f64, lo: f64, hi: f64, width: f64) -> (f64, f64, f64) {
    let (t, sign) = if x > hi {
        ((x - hi) / width, 1.0)
    } else if x < lo {
        ((lo - x) / width, -1.0)
    } else {
        return (0.0, 0.0, 0.0);
    };
    if t >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
    let ds = 30.0 * t * t * (1.0 - t) * (1.0 - t);
    let dds = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
    (s, sign * ds / width, dds / (width * width))
}

impl IntervalMap {
    pub fn cubic(fixed_point: f64, coefficient: f64) -> Self {
        Self::CubicPinned {
            fixed_point,
            coefficient,
        }
    }

    pub fn affine(fixed_point: f64, slope: f64) -> Self {
        Self::Affine { fixed_point, slope }
    }

    pub fn blended(base: IntervalMap, lo: f64, hi: f64, width: f64) -> Self {
        Self::Blended {
            base: Box::new(base),
            lo,
            hi,
            width,
        }
    }

    pub fn composition(maps: Vec<IntervalMap>) -> Self {
        Self::Composition { maps }
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        check_domain(x)?;
        Ok(self.eval(x))
    }

    /// First (`order = 1`) or second (`order = 2`) derivative.
    pub fn derivative(&self, x: f64, order: u8) -> Result<f64> {
        check_domain(x)?;
        match order {
            1 => Ok(self.d1(x)),
            2 => Ok(self.jet(x).d2),
            _ => Err(SkewError::InvalidParameter(format!(
                "derivative order {order} not supported"
            ))),
        }
    }

    /// Evaluation without the domain check, for inner loops.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::CubicPinned {
                fixed_point,
                coefficient,
            } => {
                let u = x - fixed_point;
                x - coefficient * u * u * u
            }
            Self::Affine { fixed_point, slope } => fixed_point + slope * (x - fixed_point),
            Self::Blended {
                base,
                lo,
                hi,
                width,
            } => {
                let (s, _, _) = blend_weight(x, *lo, *hi, *width);
                if s == 0.0 {
                    x
                } else if s == 1.0 {
                    base.eval(x)
                } else {
                    x + s * base.displacement(x)
                }
            }
            Self::Composition { maps } => maps.iter().fold(x, |acc, m| m.eval(acc)),
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        match self {
            Self::CubicPinned {
                fixed_point,
                coefficient,
            } => {
                let u = x - fixed_point;
                1.0 - 3.0 * coefficient * u * u
            }
            Self::Affine { slope, .. } => *slope,
            Self::Composition { maps } => {
                let mut y = x;
                let mut d = 1.0;
                for m in maps {
                    d *= m.d1(y);
                    y = m.eval(y);
                }
                d
            }
            Self::Blended { .. } => self.jet(x).d1,
        }
    }

    /// Value and derivatives in one pass (chain rule for compositions).
    pub fn jet(&self, x: f64) -> Jet {
        match self {
            Self::CubicPinned {
                fixed_point,
                coefficient,
            } => {
                let u = x - fixed_point;
                Jet {
                    value: x - coefficient * u * u * u,
                    d1: 1.0 - 3.0 * coefficient * u * u,
                    d2: -6.0 * coefficient * u,
                }
            }
            Self::Affine { fixed_point, slope } => Jet {
                value: fixed_point + slope * (x - fixed_point),
                d1: *slope,
                d2: 0.0,
            },
            Self::Blended {
                base,
                lo,
                hi,
                width,
            } => {
                if (*lo..=*hi).contains(&x) {
                    return Jet {
                        value: x,
                        d1: 1.0,
                        d2: 0.0,
                    };
                }
                let (s, ds, dds) = blend_weight(x, *lo, *hi, *width);
                let b = base.jet(x);
                if s == 1.0 {
                    return b;
                }
                let disp = base.displacement(x);
                Jet {
                    value: x + s * disp,
                    d1: 1.0 + ds * disp + s * (b.d1 - 1.0),
                    d2: dds * disp + 2.0 * ds * (b.d1 - 1.0) + s * b.d2,
                }
            }
            Self::Composition { maps } => {
                let mut acc = Jet {
                    value: x,
                    d1: 1.0,
                    d2: 0.0,
                };
                for m in maps {
                    let j = m.jet(acc.value);
                    acc = Jet {
                        value: j.value,
                        d1: j.d1 * acc.d1,
                        d2: j.d2 * acc.d1 * acc.d1 + j.d1 * acc.d2,
                    };
                }
                acc
            }
        }
    }

    /// `f(x) − x`, computed from the represented form so that its sign is
    /// reliable next to neutral fixed points.
    pub fn displacement(&self, x: f64) -> f64 {
        match self {
            Self::CubicPinned {
                fixed_point,
                coefficient,
            } => {
                let u = x - fixed_point;
                -coefficient * u * u * u
            }
            Self::Affine { fixed_point, slope } => (slope - 1.0) * (x - fixed_point),
            Self::Blended {
                base,
                lo,
                hi,
                width,
            } => {
                let (s, _, _) = blend_weight(x, *lo, *hi, *width);
                if s == 0.0 {
                    0.0
                } else {
                    s * base.displacement(x)
                }
            }
            Self::Composition { maps } => {
                let mut y = x;
                let mut total = 0.0;
                for m in maps {
                    total += m.displacement(y);
                    y = m.eval(y);
                }
                total
            }
        }
    }

    /// `[f(0), f(1)]`.
    pub fn image(&self) -> (f64, f64) {
        (self.eval(0.0), self.eval(1.0))
    }

    /// Unique `x ∈ [0, 1]` with `f(x) = y`: bisection down to a narrow
    /// bracket, then Newton steps kept inside the bracket.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        let (lo_img, hi_img) = self.image();
        if !(lo_img..=hi_img).contains(&y) {
            return Err(SkewError::OutsideImage {
                y,
                lo: lo_img,
                hi: hi_img,
            });
        }
        let (mut a, mut b) = (0.0_f64, 1.0_f64);
        for _ in 0..20 {
            let mid = 0.5 * (a + b);
            if self.eval(mid) < y {
                a = mid;
            } else {
                b = mid;
            }
        }
        let mut x = 0.5 * (a + b);
        for _ in 0..60 {
            let j = self.jet(x);
            let r = j.value - y;
            if r == 0.0 {
                return Ok(x);
            }
            if r < 0.0 {
                a = a.max(x);
            } else {
                b = b.min(x);
            }
            let mut next = x - r / j.d1;
            if !(next > a && next < b) {
                next = 0.5 * (a + b);
            }
            if (next - x).abs() <= 1e-16 * x.abs().max(1e-300) || b - a <= f64::EPSILON * 4.0 {
                return Ok(next);
            }
            x = next;
        }
        Ok(x)
    }

    /// Hull `[a, b]` of the fixed-point set: `a = inf{x : f(x) ≤ x}` and
    /// `b = sup{x : f(x) ≥ x}`. For a map sending `[0, 1]` strictly into
    /// itself these are the limits of `fⁿ(0)` and `fⁿ(1)`. Located by a scan
    /// of 4096 cells followed by bisection on the sign of the displacement.
    pub fn fixed_point_hull(&self) -> (f64, f64) {
        const CELLS: usize = 4096;
        let at = |i: usize| i as f64 / CELLS as f64;
        let first = (0..=CELLS)
            .find(|&i| self.displacement(at(i)) <= 0.0)
            .unwrap_or(CELLS);
        let a = if first == 0 {
            0.0
        } else {
            let (mut lo, mut hi) = (at(first - 1), at(first));
            while hi - lo > f64::EPSILON * hi.max(1e-300) {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.displacement(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        };
        let last = (0..=CELLS)
            .rev()
            .find(|&i| self.displacement(at(i)) >= 0.0)
            .unwrap_or(0);
        let b = if last == CELLS {
            1.0
        } else {
            let (mut lo, mut hi) = (at(last), at(last + 1));
            while hi - lo > f64::EPSILON * hi {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.displacement(mid) >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        (a, b.max(a))
    }

    /// Checks strict invariance of `[0, 1]` and positivity of the derivative
    /// on a uniform grid of `grid` points plus the endpoints.
    pub fn validate(&self, grid: usize) -> Result<()> {
        let (f0, f1) = self.image();
        if f0 <= 0.0 || !f0.is_finite() {
            return Err(SkewError::NotIntoInterval { x: 0.0, value: f0 });
        }
        if f1 >= 1.0 || !f1.is_finite() {
            return Err(SkewError::NotIntoInterval { x: 1.0, value: f1 });
        }
        let n = grid.max(2);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..n {
            let x = i as f64 / (n - 1) as f64;
            let j = self.jet(x);
            if !(j.d1 > 0.0) {
                return Err(SkewError::NotMonotone { x, derivative: j.d1 });
            }
            if !(j.value > prev) {
                return Err(SkewError::NotMonotone { x, derivative: j.d1 });
            }
            if !(j.value > 0.0 && j.value < 1.0) {
                return Err(SkewError::NotIntoInterval { x, value: j.value });
            }
            prev = j.value;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f0() -> IntervalMap {
        IntervalMap::cubic(0.3, 0.5)
    }

    fn f1() -> IntervalMap {
        IntervalMap::affine(0.7, 0.6)
    }

    fn central_difference(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-5;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(f0().evaluate(0.3).unwrap(), 0.3);
        assert_abs_diff_eq!(f1().evaluate(0.3).unwrap(), 0.46, epsilon = 1e-15);
        assert_abs_diff_eq!(f0().evaluate(0.65).unwrap(), 0.6285625, epsilon = 1e-15);
        assert!(matches!(f0().evaluate(1.5), Err(SkewError::Domain { .. })));
        assert!(f0().evaluate(f64::NAN).is_err());
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(f0().derivative(0.3, 1).unwrap(), 1.0);
        assert_eq!(f1().derivative(0.123, 1).unwrap(), 0.6);
        assert_eq!(f1().derivative(0.9, 2).unwrap(), 0.0);
        assert!(f1().derivative(0.5, 3).is_err());
    }

    fn sample_maps() -> Vec<IntervalMap> {
        let bl = IntervalMap::blended(f0(), 0.25, 0.35, 0.02);
        vec![
            f0(),
            f1(),
            bl.clone(),
            IntervalMap::composition(vec![f0(), f1(), bl, f0()]),
        ]
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in sample_maps() {
            for _ in 0..100 {
                let x: f64 = rng.gen_range(0.001..0.999);
                let j = m.jet(x);
                assert_abs_diff_eq!(j.d1, central_difference(|t| m.eval(t), x), epsilon = 1e-6);
                assert_abs_diff_eq!(j.d1, m.d1(x), epsilon = 1e-14);
                let fd2 = central_difference(|t| m.jet(t).d1, x);
                assert_abs_diff_eq!(j.d2, fd2, epsilon = 1e-4 * (1.0 + fd2.abs()));
            }
        }
    }

    #[test]
    fn composition_chain_rule_is_product_along_orbit() {
        let c = IntervalMap::composition(vec![f0(), f1(), f0()]);
        let x = 0.42;
        let x1 = f0().eval(x);
        let x2 = f1().eval(x1);
        let expected = f0().d1(x) * f1().d1(x1) * f0().d1(x2);
        assert_abs_diff_eq!(c.d1(x), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(c.eval(x), f0().eval(x2), epsilon = 1e-15);
    }

    #[test]
    fn inverse_examples() {
        assert_abs_diff_eq!(f1().inverse(0.46).unwrap(), 0.3, epsilon = 1e-12);
        // Fixed-point iteration y = 0.5 + 0.5 (y - 0.3)^3 as the oracle.
        let mut y: f64 = 0.5;
        for _ in 0..200 {
            y = 0.5 + 0.5 * (y - 0.3).powi(3);
        }
        assert_abs_diff_eq!(f0().inverse(0.5).unwrap(), y, epsilon = 1e-12);
        assert_abs_diff_eq!(y, 0.50425, epsilon = 2e-5);
        assert!(matches!(f1().inverse(0.1), Err(SkewError::OutsideImage { .. })));
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in sample_maps() {
            for _ in 0..200 {
                let x: f64 = rng.gen_range(0.0..=1.0);
                let back = m.inverse(m.eval(x)).unwrap();
                assert!((back - x).abs() < 1e-10, "{m:?} x={x} back={back}");
                assert!((m.eval(back) - m.eval(x)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn blended_is_identity_on_core_and_base_outside() {
        let g = IntervalMap::blended(f0(), 0.25, 0.35, 0.02);
        for x in [0.25, 0.28, 0.3, 0.33, 0.35] {
            assert_eq!(g.eval(x), x);
            assert_eq!(g.d1(x), 1.0);
            assert_eq!(g.displacement(x), 0.0);
        }
        for x in [0.0, 0.1, 0.23, 0.37, 0.5, 1.0] {
            assert_eq!(g.eval(x), f0().eval(x));
        }
        // C² across the transition joints.
        for joint in [0.23, 0.25, 0.35, 0.37] {
            let l = g.jet(joint - 1e-9);
            let r = g.jet(joint + 1e-9);
            assert_abs_diff_eq!(l.d1, r.d1, epsilon = 1e-6);
            assert_abs_diff_eq!(l.d2, r.d2, epsilon = 1e-3);
        }
        g.validate(DEFAULT_VERIFY_GRID).unwrap();
    }

    #[test]
    fn fixed_point_hulls() {
        let (a, b) = f0().fixed_point_hull();
        assert_abs_diff_eq!(a, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 0.3, epsilon = 1e-15);
        let (a, b) = f1().fixed_point_hull();
        assert_abs_diff_eq!(a, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 0.7, epsilon = 1e-15);
        let g = IntervalMap::blended(f0(), 0.25, 0.35, 0.02);
        let (a, b) = g.fixed_point_hull();
        assert_abs_diff_eq!(a, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 0.35, epsilon = 1e-15);
    }

    #[test]
    fn validation_catches_violations() {
        assert!(f0().validate(1000).is_ok());
        assert!(f1().validate(1000).is_ok());
        let expanding = IntervalMap::affine(0.5, 1.1);
        assert!(matches!(
            expanding.validate(1000),
            Err(SkewError::NotIntoInterval { .. })
        ));
        let folding = IntervalMap::cubic(0.5, 3.0);
        assert!(folding.validate(1000).is_err());
    }

    #[test]
    fn monotone_on_fine_grid() {
        for m in sample_maps() {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=1000 {
                let v = m.eval(i as f64 / 1000.0);
                assert!(v > prev);
                prev = v;
            }
            let (a, b) = m.image();
            assert!(a > 0.0 && b < 1.0);
        }
    }

    #[test]
    fn json_round_trip() {
        let g = IntervalMap::composition(vec![IntervalMap::blended(f0(), 0.25, 0.35, 0.02), f1()]);
        let text = serde_json::to_string(&g).unwrap();
        assert!(text.contains("\"kind\":\"composition\""));
        let back: IntervalMap = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
    }
}
