//! Level-crossing threshold placement: the [`LevelScheme`] parameter type and
//! the two statically defined generators (uniform and symmetric-logarithmic).

use serde::{Deserialize, Serialize};

use crate::error::{LcError, Result};
use crate::signal::SignalRange;
use crate::util::minmax_normalize;

/// Levels closer than this merge at construction; zero-width bands break the
/// Schmitt-pair invariant.
pub const LEVEL_MERGE_EPS: f64 = 1e-12;

/// A sorted set of crossing levels plus one global hysteresis width, all in
/// millivolts. Immutable after construction; this is the parameter vector the
/// optimizers search over and the interchange unit between the CLI tools.
///
/// JSON form: `{"levels": [...], "hysteresis": <number>}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScheme", into = "RawScheme")]
pub struct LevelScheme {
    levels: Vec<f64>,
    hysteresis: f64,
}

#[derive(Serialize, Deserialize)]
struct RawScheme {
    levels: Vec<f64>,
    hysteresis: f64,
}

impl TryFrom<RawScheme> for LevelScheme {
    type Error = LcError;
    fn try_from(raw: RawScheme) -> Result<Self> {
        LevelScheme::new(raw.levels, raw.hysteresis)
    }
}

impl From<LevelScheme> for RawScheme {
    fn from(s: LevelScheme) -> Self {
        RawScheme {
            levels: s.levels,
            hysteresis: s.hysteresis,
        }
    }
}

impl LevelScheme {
    /// Builds a scheme from raw levels: sorts, merges levels closer than
    /// [`LEVEL_MERGE_EPS`], and validates the hysteresis band against the
    /// smallest adjacent gap (the Schmitt pairs of neighbouring levels must
    /// not interleave).
    pub fn new(mut levels: Vec<f64>, hysteresis: f64) -> Result<Self> {
        if levels.iter().any(|v| !v.is_finite()) {
            return Err(LcError::Argument("non-finite level value".into()));
        }
        levels.sort_by(|a, b| a.total_cmp(b));
        levels.dedup_by(|b, a| (*b - *a).abs() < LEVEL_MERGE_EPS);
        if levels.len() < 2 {
            return Err(LcError::Argument(format!(
                "a scheme needs at least 2 distinct levels, got {}",
                levels.len()
            )));
        }
        if !(hysteresis >= 0.0) || !hysteresis.is_finite() {
            return Err(LcError::Argument(format!(
                "hysteresis must be a non-negative real, got {hysteresis}"
            )));
        }
        let min_gap = min_adjacent_gap(&levels);
        if hysteresis > 0.0 && hysteresis >= min_gap {
            return Err(LcError::Argument(format!(
                "hysteresis {hysteresis} not below the minimum level gap {min_gap}"
            )));
        }
        Ok(Self { levels, hysteresis })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn hysteresis(&self) -> f64 {
        self.hysteresis
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// Smallest gap between adjacent levels.
    pub fn min_gap(&self) -> f64 {
        min_adjacent_gap(&self.levels)
    }
}

fn min_adjacent_gap(sorted: &[f64]) -> f64 {
    sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

fn check_generator_args(level_count: usize, range: &SignalRange) -> Result<()> {
    if level_count < 2 {
        return Err(LcError::Argument(format!(
            "level count must be at least 2, got {level_count}"
        )));
    }
    if range.delta() <= 0.0 {
        return Err(LcError::DegenerateRange(format!(
            "cannot place levels over zero-width range at {}",
            range.x_min
        )));
    }
    Ok(())
}

/// Snap the extreme levels onto the range bounds; min-max scaling leaves them
/// within one ulp anyway.
fn pin_endpoints(levels: &mut [f64], range: &SignalRange) {
    levels[0] = range.x_min;
    *levels.last_mut().unwrap() = range.x_max;
}

/// Equally spaced levels spanning the range: `x_min + i * delta / (L - 1)`.
/// Hysteresis is 0 for statically defined schemes.
pub fn uniform_levels(level_count: usize, range: &SignalRange) -> Result<LevelScheme> {
    check_generator_args(level_count, range)?;
    let step = range.delta() / (level_count - 1) as f64;
    let mut levels: Vec<f64> = (0..level_count)
        .map(|i| range.x_min + step * i as f64)
        .collect();
    pin_endpoints(&mut levels, range);
    LevelScheme::new(levels, 0.0)
}

/// Symmetric logarithmic levels.
///
/// For odd `L`, a log space between 1 and 10 with `floor(L/2) + 1` values is
/// mirrored about 1 (`-v + 2`), concatenated, sorted, min-max normalized and
/// scaled onto the range. For even `L` the odd `L + 1` set is computed and
/// its central (median) value removed before normalization. Hysteresis is 0.
pub fn logarithmic_levels(level_count: usize, range: &SignalRange) -> Result<LevelScheme> {
    check_generator_args(level_count, range)?;
    let odd = if level_count % 2 == 1 {
        level_count
    } else {
        level_count + 1
    };
    let mut raw = raw_symmetric_log(odd);
    if level_count % 2 == 0 {
        raw.remove((raw.len() - 1) / 2);
    }
    minmax_normalize(&mut raw);
    let mut levels: Vec<f64> = raw
        .iter()
        .map(|v| range.x_min + v * range.delta())
        .collect();
    pin_endpoints(&mut levels, range);
    LevelScheme::new(levels, 0.0)
}

/// The raw symmetric set for odd `l`: positive branch `10^(i / floor(l/2))`
/// for `i in 0..=floor(l/2)`, negative branch `-10^(i / floor(l/2)) + 2` for
/// `i in 1..=floor(l/2)`, sorted ascending.
fn raw_symmetric_log(l: usize) -> Vec<f64> {
    debug_assert!(l % 2 == 1 && l >= 3);
    let half = l / 2;
    let mut vals = Vec::with_capacity(l);
    for i in 0..=half {
        vals.push(10f64.powf(i as f64 / half as f64));
    }
    for i in 1..=half {
        vals.push(-10f64.powf(i as f64 / half as f64) + 2.0);
    }
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn range(x_min: f64, x_max: f64) -> SignalRange {
        SignalRange::new(x_min, x_max).unwrap()
    }

    #[test]
    fn uniform_formula_instantiation() {
        let s = uniform_levels(4, &range(0.0, 3.0)).unwrap();
        assert_eq!(s.levels(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(s.hysteresis(), 0.0);

        let s = uniform_levels(3, &range(-1.0, 1.0)).unwrap();
        assert_eq!(s.levels(), &[-1.0, 0.0, 1.0]);

        let s = uniform_levels(2, &range(0.25, 0.75)).unwrap();
        assert_eq!(s.levels(), &[0.25, 0.75]);
    }

    #[test]
    fn uniform_rejects_degenerate_range() {
        assert!(matches!(
            uniform_levels(4, &range(1.0, 1.0)),
            Err(LcError::DegenerateRange(_))
        ));
    }

    #[test]
    fn log_three_levels_coincide_with_uniform() {
        // Raw set {-8, 1, 10} normalizes to {0, 0.5, 1}.
        let s = logarithmic_levels(3, &range(0.0, 1.0)).unwrap();
        assert_relative_eq!(s.levels()[0], 0.0);
        assert_relative_eq!(s.levels()[1], 0.5, max_relative = 1e-12);
        assert_relative_eq!(s.levels()[2], 1.0);
    }

    #[test]
    fn log_five_levels_hand_values() {
        // Raw {-8, -1.16228, 1, 3.16228, 10} scaled onto delta = 18.
        let s = logarithmic_levels(5, &range(0.0, 18.0)).unwrap();
        let sqrt10 = 10f64.sqrt();
        let expect = [0.0, 10.0 - sqrt10, 9.0, 8.0 + sqrt10, 18.0];
        for (got, want) in s.levels().iter().zip(expect) {
            assert_relative_eq!(*got, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn log_even_levels_drop_the_raw_median() {
        let s = logarithmic_levels(4, &range(0.0, 1.0)).unwrap();
        let sqrt10 = 10f64.sqrt();
        let expect = [0.0, (8.0 - sqrt10 + 2.0) / 18.0, (8.0 + sqrt10) / 18.0, 1.0];
        for (got, want) in s.levels().iter().zip(expect) {
            assert_relative_eq!(*got, want, epsilon = 1e-9);
        }
        // Matches the hand-derived normalized values.
        assert_relative_eq!(s.levels()[1], 0.37987, epsilon = 1e-5);
        assert_relative_eq!(s.levels()[2], 0.62013, epsilon = 1e-5);
    }

    #[test]
    fn log_levels_symmetric_about_midpoint_for_odd_l() {
        for l in [3usize, 5, 7, 9, 15] {
            let r = range(-2.5, 4.0);
            let s = logarithmic_levels(l, &r).unwrap();
            let lv = s.levels();
            for i in 0..l {
                assert!(
                    (lv[i] + lv[l - 1 - i] - (r.x_min + r.x_max)).abs() < 1e-9,
                    "L={l} i={i}"
                );
            }
        }
    }

    #[test]
    fn log_levels_densest_at_the_range_center() {
        // The log space clusters near 1, the raw center, so adjacent gaps
        // shrink toward the midpoint.
        for l in [5usize, 7, 9, 13] {
            let s = logarithmic_levels(l, &range(0.0, 1.0)).unwrap();
            let gaps: Vec<f64> = s.levels().windows(2).map(|w| w[1] - w[0]).collect();
            for i in 0..gaps.len() / 2 {
                assert!(
                    gaps[i] >= gaps[i + 1] - 1e-12,
                    "L={l}: gap[{i}]={} < gap[{}]={}",
                    gaps[i],
                    i + 1,
                    gaps[i + 1]
                );
            }
        }
    }

    #[test]
    fn scheme_construction_sorts_merges_and_validates() {
        let s = LevelScheme::new(vec![2.0, 0.0, 1.0, 1.0 + 1e-15], 0.0).unwrap();
        assert_eq!(s.levels(), &[0.0, 1.0, 2.0]);

        assert!(LevelScheme::new(vec![1.0, 1.0 + 1e-15], 0.0).is_err());
        // Hysteresis spanning an adjacent gap interleaves the Schmitt pairs.
        assert!(LevelScheme::new(vec![0.0, 0.5, 1.0], 0.5).is_err());
        assert!(LevelScheme::new(vec![0.0, 0.5, 1.0], 0.49).is_ok());
    }

    #[test]
    fn scheme_json_round_trip_and_validation() {
        let s = LevelScheme::new(vec![0.0, 0.5, 1.0], 0.1).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let back: LevelScheme = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);

        let bad: std::result::Result<LevelScheme, _> =
            serde_json::from_str(r#"{"levels": [1.0], "hysteresis": 0.0}"#);
        assert!(bad.is_err());
    }

    proptest! {
        #[test]
        fn generators_span_the_range_exactly(
            l in 2usize..17,
            x_min in -5.0f64..5.0,
            width in 0.1f64..10.0,
            log in proptest::bool::ANY,
        ) {
            let r = range(x_min, x_min + width);
            let s = if log {
                logarithmic_levels(l, &r).unwrap()
            } else {
                uniform_levels(l, &r).unwrap()
            };
            prop_assert_eq!(s.level_count(), l);
            prop_assert_eq!(s.levels()[0], r.x_min);
            prop_assert_eq!(*s.levels().last().unwrap(), r.x_max);
            prop_assert!(s.levels().windows(2).all(|w| w[0] < w[1]));
        }
    }
}
