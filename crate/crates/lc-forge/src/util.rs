//! Small numeric helpers shared across modules.

/// Percentile with the linear-interpolation convention: rank `r = q * (n-1)`,
/// value interpolated between the order statistics at `floor(r)` and `ceil(r)`.
/// `sorted` must be ascending and non-empty; `q` in `[0, 1]`.
pub(crate) fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!((0.0..=1.0).contains(&q));
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let rank = q * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = rank - lo as f64;
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Min-max normalization of `values` to `[0, 1]` in place. A constant (or
/// single-element) input maps to all zeros.
pub(crate) fn minmax_normalize(values: &mut [f64]) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in values.iter() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = hi - lo;
    if span <= 0.0 {
        values.iter_mut().for_each(|v| *v = 0.0);
    } else {
        values.iter_mut().for_each(|v| *v = (*v - lo) / span);
    }
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation (ddof = 0), matching the mean±std style of
/// the report tables.
pub(crate) fn std_dev(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt()
}

/// SplitMix64 finalizer; used to derive independent per-task seeds from a
/// master seed and a stream of labels, stable across platforms and releases.
pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a byte label into a seed via FNV-1a then SplitMix64 mixing.
pub(crate) fn derive_seed(master: u64, label: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in label {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(master ^ h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_uniform_ladder() {
        let v: Vec<f64> = (0..=100).map(f64::from).collect();
        assert_eq!(percentile_sorted(&v, 0.05), 5.0);
        assert_eq!(percentile_sorted(&v, 0.95), 95.0);
        assert_eq!(percentile_sorted(&v, 0.5), 50.0);
    }

    #[test]
    fn percentile_interpolates_between_order_statistics() {
        // rank = 0.95 * 4 = 3.8 -> between 0 and 10 -> 8.0
        let v = [0.0, 0.0, 0.0, 0.0, 10.0];
        assert!((percentile_sorted(&v, 0.95) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn minmax_degenerate_input_is_zeroed() {
        let mut v = [3.0, 3.0, 3.0];
        minmax_normalize(&mut v);
        assert_eq!(v, [0.0, 0.0, 0.0]);
        let mut single = [0.7];
        minmax_normalize(&mut single);
        assert_eq!(single, [0.0]);
    }

    #[test]
    fn derived_seeds_differ_by_label() {
        let a = derive_seed(42, b"rec1/uniform/8");
        let b = derive_seed(42, b"rec1/uniform/12");
        assert_ne!(a, b);
        assert_eq!(a, derive_seed(42, b"rec1/uniform/8"));
    }
}
