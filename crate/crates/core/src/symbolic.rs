//! The Bernoulli base: finite windows of two-sided symbol sequences.
//!
//! A [`SymbolWindow`] stores the symbols `ω_i` for `i` in
//! `offset .. offset + symbols.len()` and declares what lies beyond the stored
//! range on each side. A constant tail makes the sequence totally defined;
//! an unspecified tail turns every query beyond the window into
//! [`SkewError::OutOfWindow`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SkewError};

/// What a window contains beyond its stored symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Unspecified,
    ConstantSymbol(u8),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawWindow")]
pub struct SymbolWindow {
    k: usize,
    offset: i64,
    symbols: Vec<u8>,
    past_tail: Tail,
    future_tail: Tail,
}

#[derive(Deserialize)]
struct RawWindow {
    k: usize,
    offset: i64,
    symbols: Vec<u8>,
    past_tail: Tail,
    future_tail: Tail,
}

impl TryFrom<RawWindow> for SymbolWindow {
    type Error = SkewError;

    fn try_from(raw: RawWindow) -> Result<Self> {
        SymbolWindow::new(raw.k, raw.offset, raw.symbols, raw.past_tail, raw.future_tail)
    }
}

impl SymbolWindow {
    pub fn new(
        k: usize,
        offset: i64,
        symbols: Vec<u8>,
        past_tail: Tail,
        future_tail: Tail,
    ) -> Result<Self> {
        if k < 2 || k > u8::MAX as usize + 1 {
            return Err(SkewError::InvalidParameter(format!(
                "alphabet size {k} must be in 2..=256"
            )));
        }
        let check = |s: u8| {
            if (s as usize) < k {
                Ok(())
            } else {
                Err(SkewError::InvalidSymbol { symbol: s, k })
            }
        };
        for &s in &symbols {
            check(s)?;
        }
        for tail in [past_tail, future_tail] {
            if let Tail::ConstantSymbol(s) = tail {
                check(s)?;
            }
        }
        Ok(Self {
            k,
            offset,
            symbols,
            past_tail,
            future_tail,
        })
    }

    /// The bi-infinite constant sequence `(…, s, s, s, …)`.
    pub fn constant(k: usize, s: u8) -> Result<Self> {
        Self::new(k, 0, Vec::new(), Tail::ConstantSymbol(s), Tail::ConstantSymbol(s))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn past_tail(&self) -> Tail {
        self.past_tail
    }

    pub fn future_tail(&self) -> Tail {
        self.future_tail
    }

    /// One past the index of the rightmost stored symbol.
    pub fn end(&self) -> i64 {
        self.offset + self.symbols.len() as i64
    }

    pub fn is_totally_defined(&self) -> bool {
        matches!(self.past_tail, Tail::ConstantSymbol(_))
            && matches!(self.future_tail, Tail::ConstantSymbol(_))
    }

    /// Smallest index that can be queried, or `None` for a constant past tail.
    pub fn first_defined(&self) -> Option<i64> {
        match self.past_tail {
            Tail::ConstantSymbol(_) => None,
            Tail::Unspecified => Some(self.offset),
        }
    }

    /// Largest index that can be queried, or `None` for a constant future tail.
    pub fn last_defined(&self) -> Option<i64> {
        match self.future_tail {
            Tail::ConstantSymbol(_) => None,
            Tail::Unspecified => Some(self.end() - 1),
        }
    }

    pub fn symbol(&self, i: i64) -> Result<u8> {
        if i < self.offset {
            match self.past_tail {
                Tail::ConstantSymbol(s) => Ok(s),
                Tail::Unspecified => Err(SkewError::OutOfWindow { index: i }),
            }
        } else if i >= self.end() {
            match self.future_tail {
                Tail::ConstantSymbol(s) => Ok(s),
                Tail::Unspecified => Err(SkewError::OutOfWindow { index: i }),
            }
        } else {
            Ok(self.symbols[(i - self.offset) as usize])
        }
    }

    /// Symbols on the inclusive index range `[lo, hi]`.
    pub fn slice(&self, lo: i64, hi: i64) -> Result<Vec<u8>> {
        (lo..=hi).map(|i| self.symbol(i)).collect()
    }

    /// The left shift `σ`: `(σω)_i = ω_{i+1}`.
    pub fn shift(&self) -> Self {
        self.shift_by(1)
    }

    /// `σ^{-1}`: `(σ^{-1}ω)_i = ω_{i-1}`.
    pub fn inverse_shift(&self) -> Self {
        self.shift_by(-1)
    }

    /// `σ^n` for any integer `n`; negative `n` shifts right.
    pub fn shift_by(&self, n: i64) -> Self {
        Self {
            offset: self.offset - n,
            ..self.clone()
        }
    }

    /// Replaces the stored symbols on `[lo, hi]` by explicit values taken from
    /// the window itself, so that tails start strictly outside that range.
    pub fn materialize(&self, lo: i64, hi: i64) -> Result<Self> {
        let lo = lo.min(self.offset);
        let hi = hi.max(self.end() - 1);
        Self::new(
            self.k,
            lo,
            self.slice(lo, hi)?,
            self.past_tail,
            self.future_tail,
        )
    }

    /// Replaces everything strictly left of index `start` by `prefix` (stored
    /// on the indices directly left of `start`) followed by `past_tail`.
    pub fn splice_past(&self, start: i64, prefix: &[u8], past_tail: Tail) -> Result<Self> {
        let hi = self.end().max(start) - 1;
        let kept = if hi >= start {
            self.slice(start, hi)?
        } else {
            Vec::new()
        };
        let mut symbols = Vec::with_capacity(prefix.len() + kept.len());
        symbols.extend_from_slice(prefix);
        symbols.extend(kept);
        Self::new(
            self.k,
            start - prefix.len() as i64,
            symbols,
            past_tail,
            self.future_tail,
        )
    }

    /// Real number `Σ_{j≥1} ω_{-j} k^{-j}` coding the past (first 40 digits);
    /// continuous in the product topology and used as a scatter coordinate.
    pub fn past_coordinate(&self) -> f64 {
        let k = self.k as f64;
        let mut scale = 1.0 / k;
        let mut acc = 0.0;
        for j in 1..=40_i64 {
            match self.symbol(-j) {
                Ok(s) => acc += s as f64 * scale,
                Err(_) => break,
            }
            scale /= k;
        }
        acc
    }
}

/// Result of [`base_distance`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseDistance {
    pub value: f64,
    /// Set when the sequences agree on the whole determinable range and the
    /// value is only an upper bound.
    pub bound_only: bool,
}

/// `d(ω, ω') = 2^{-min{|i| : ω_i ≠ ω'_i}}`.
pub fn base_distance(w1: &SymbolWindow, w2: &SymbolWindow) -> Result<BaseDistance> {
    if w1.k != w2.k {
        return Err(SkewError::AlphabetMismatch {
            left: w1.k,
            right: w2.k,
        });
    }
    let extent = [w1.offset, w1.end(), w2.offset, w2.end()]
        .iter()
        .map(|v| v.unsigned_abs())
        .max()
        .unwrap_or(0) as i64
        + 1;
    for m in 0..=extent {
        let mut undetermined = false;
        let indices: &[i64] = if m == 0 { &[0] } else { &[-m, m] };
        for &i in indices {
            match (w1.symbol(i), w2.symbol(i)) {
                (Ok(a), Ok(b)) if a != b => {
                    return Ok(BaseDistance {
                        value: 0.5_f64.powi(m as i32),
                        bound_only: false,
                    })
                }
                (Ok(_), Ok(_)) => {}
                _ => undetermined = true,
            }
        }
        if undetermined {
            return Ok(BaseDistance {
                value: 0.5_f64.powi(m as i32),
                bound_only: true,
            });
        }
    }
    // Past `extent` both sequences are constant tails that already agreed.
    Ok(BaseDistance {
        value: 0.0,
        bound_only: false,
    })
}

/// Whether `w` lies in the cylinder `U_n(center)`: agreement on `[-n, n]`.
pub fn in_cylinder(w: &SymbolWindow, center: &SymbolWindow, n: usize) -> Result<bool> {
    if w.k != center.k {
        return Err(SkewError::AlphabetMismatch {
            left: w.k,
            right: center.k,
        });
    }
    let n = n as i64;
    for i in -n..=n {
        if w.symbol(i)? != center.symbol(i)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// I.i.d. uniform symbols on `[-past_depth, future_depth]`, unspecified tails.
pub fn sample_bernoulli(k: usize, past_depth: usize, future_depth: usize, seed: u64) -> SymbolWindow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_bernoulli_with(&mut rng, k, past_depth, future_depth)
}

pub fn sample_bernoulli_with<R: Rng + ?Sized>(
    rng: &mut R,
    k: usize,
    past_depth: usize,
    future_depth: usize,
) -> SymbolWindow {
    assert!((2..=256).contains(&k), "alphabet size {k} out of range");
    let len = past_depth + future_depth + 1;
    let symbols = (0..len).map(|_| rng.gen_range(0..k) as u8).collect();
    SymbolWindow {
        k,
        offset: -(past_depth as i64),
        symbols,
        past_tail: Tail::Unspecified,
        future_tail: Tail::Unspecified,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn window(offset: i64, symbols: &[u8], past: Tail, future: Tail) -> SymbolWindow {
        SymbolWindow::new(2, offset, symbols.to_vec(), past, future).unwrap()
    }

    #[test]
    fn rejects_out_of_alphabet_symbols() {
        let err = SymbolWindow::new(2, 0, vec![0, 2], Tail::Unspecified, Tail::Unspecified);
        assert_eq!(err, Err(SkewError::InvalidSymbol { symbol: 2, k: 2 }));
        let err = SymbolWindow::new(3, 0, vec![0], Tail::ConstantSymbol(3), Tail::Unspecified);
        assert!(err.is_err());
    }

    #[test]
    fn unspecified_tail_is_an_error() {
        let w = window(-1, &[1, 0, 1], Tail::Unspecified, Tail::ConstantSymbol(0));
        assert_eq!(w.symbol(-2), Err(SkewError::OutOfWindow { index: -2 }));
        assert_eq!(w.symbol(7), Ok(0));
        assert_eq!(w.symbol(-1), Ok(1));
    }

    #[test]
    fn shift_moves_index_one_to_zero() {
        let w = window(-1, &[0, 1, 2 % 2, 1], Tail::Unspecified, Tail::Unspecified);
        let s = w.shift();
        for i in -2..3 {
            assert_eq!(s.symbol(i).ok(), w.symbol(i + 1).ok());
        }
        let k3 = SymbolWindow::new(3, -1, vec![0, 1, 2], Tail::Unspecified, Tail::Unspecified)
            .unwrap();
        assert_eq!(k3.shift().symbol(0), Ok(2));
    }

    #[test]
    fn constant_window_is_shift_fixed() {
        let zero = SymbolWindow::constant(2, 0).unwrap();
        let shifted = zero.shift();
        for i in -10..10 {
            assert_eq!(shifted.symbol(i), zero.symbol(i));
        }
        let one = SymbolWindow::constant(2, 1).unwrap();
        assert_eq!(base_distance(&one.inverse_shift(), &one).unwrap().value, 0.0);
    }

    #[test]
    fn inverse_shift_moves_negative_indices_to_zero() {
        let w = sample_bernoulli(2, 10, 10, 3);
        let mut v = w.clone();
        for _ in 0..4 {
            v = v.inverse_shift();
        }
        assert_eq!(v.symbol(0), w.symbol(-4));
        assert_eq!(w.shift().inverse_shift(), w);
        assert_eq!(w.inverse_shift().shift(), w);
    }

    #[test]
    fn distance_examples() {
        let zero = SymbolWindow::constant(2, 0).unwrap();
        assert_eq!(
            base_distance(&zero, &zero).unwrap(),
            BaseDistance {
                value: 0.0,
                bound_only: false
            }
        );
        let at_zero = window(0, &[1], Tail::ConstantSymbol(0), Tail::ConstantSymbol(0));
        assert_eq!(base_distance(&zero, &at_zero).unwrap().value, 1.0);
        let at_minus3 = window(-3, &[1], Tail::ConstantSymbol(0), Tail::ConstantSymbol(0));
        let d = base_distance(&zero, &at_minus3).unwrap();
        assert_eq!(d.value, 0.125);
        assert!(!d.bound_only);
    }

    #[test]
    fn distance_on_unspecified_tails_is_a_bound() {
        let a = window(-2, &[0, 1, 0, 1, 1], Tail::Unspecified, Tail::Unspecified);
        let d = base_distance(&a, &a.clone()).unwrap();
        assert!(d.bound_only);
        assert_eq!(d.value, 0.125);
        let b = SymbolWindow::new(3, 0, vec![0], Tail::Unspecified, Tail::Unspecified).unwrap();
        assert!(matches!(
            base_distance(&a, &b),
            Err(SkewError::AlphabetMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn cylinder_membership() {
        let c = window(-5, &[0, 1, 1, 0, 1, 0, 0, 1, 0, 1, 1], Tail::Unspecified, Tail::Unspecified);
        assert!(in_cylinder(&c, &c, 3).unwrap());
        let mut s = c.symbols().to_vec();
        s[5 + 3] ^= 1;
        let at_n = window(-5, &s, Tail::Unspecified, Tail::Unspecified);
        assert!(!in_cylinder(&at_n, &c, 3).unwrap());
        let mut s = c.symbols().to_vec();
        s[5 + 4] ^= 1;
        let beyond = window(-5, &s, Tail::Unspecified, Tail::Unspecified);
        assert!(in_cylinder(&beyond, &c, 3).unwrap());
        assert!(in_cylinder(&c, &c, 6).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_uniform() {
        assert_eq!(sample_bernoulli(3, 20, 20, 9), sample_bernoulli(3, 20, 20, 9));
        for k in [2usize, 3, 5] {
            let w = sample_bernoulli(k, 50_000, 49_999, 42);
            let mut counts = vec![0usize; k];
            for &s in w.symbols() {
                counts[s as usize] += 1;
            }
            for c in counts {
                let freq = c as f64 / 100_000.0;
                assert!((freq - 1.0 / k as f64).abs() < 0.01, "k={k} freq={freq}");
            }
        }
        let differing = (0..100u64)
            .filter(|&s| sample_bernoulli(2, 16, 16, 2 * s) != sample_bernoulli(2, 16, 16, 2 * s + 1))
            .count();
        assert!(differing >= 99);
    }

    #[test]
    fn json_shape() {
        let w = window(-1, &[1, 0], Tail::ConstantSymbol(0), Tail::Unspecified);
        let v = serde_json::to_value(&w).unwrap();
        assert_eq!(
            v,
            serde_json::json!({
                "k": 2, "offset": -1, "symbols": [1, 0],
                "past_tail": {"constant_symbol": 0}, "future_tail": "unspecified"
            })
        );
        let back: SymbolWindow = serde_json::from_value(v).unwrap();
        assert_eq!(back, w);
        let bad = serde_json::json!({
            "k": 2, "offset": 0, "symbols": [5],
            "past_tail": "unspecified", "future_tail": "unspecified"
        });
        assert!(serde_json::from_value::<SymbolWindow>(bad).is_err());
    }

    #[test]
    fn splice_keeps_suffix() {
        let zero = SymbolWindow::constant(2, 0).unwrap();
        let w = zero.splice_past(-3, &[1, 0], Tail::ConstantSymbol(1)).unwrap();
        assert_eq!(w.symbol(-3), Ok(0));
        assert_eq!(w.symbol(-4), Ok(0));
        assert_eq!(w.symbol(-5), Ok(1));
        assert_eq!(w.symbol(-100), Ok(1));
        assert_eq!(w.symbol(100), Ok(0));
    }

    fn defined_window(len: usize) -> impl Strategy<Value = SymbolWindow> {
        (
            -6i64..=0,
            proptest::collection::vec(0u8..2, len),
            0u8..2,
            0u8..2,
        )
            .prop_map(|(offset, symbols, p, f)| {
                SymbolWindow::new(
                    2,
                    offset,
                    symbols,
                    Tail::ConstantSymbol(p),
                    Tail::ConstantSymbol(f),
                )
                .unwrap()
            })
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(a in defined_window(8), b in defined_window(8), c in defined_window(8)) {
            let d = |x: &SymbolWindow, y: &SymbolWindow| base_distance(x, y).unwrap().value;
            prop_assert_eq!(d(&a, &b), d(&b, &a));
            prop_assert_eq!(d(&a, &a), 0.0);
            if d(&a, &b) == 0.0 {
                for i in -20..20 {
                    prop_assert_eq!(a.symbol(i), b.symbol(i));
                }
            }
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        }

        #[test]
        fn shift_expands_by_at_most_two(a in defined_window(8), b in defined_window(8)) {
            let before = base_distance(&a, &b).unwrap().value;
            let after = base_distance(&a.shift(), &b.shift()).unwrap().value;
            prop_assert!(after <= 2.0 * before);
        }

        #[test]
        fn shift_round_trip(a in defined_window(5), n in -20i64..20) {
            prop_assert_eq!(a.shift_by(n).shift_by(-n), a.clone());
        }
    }
}
