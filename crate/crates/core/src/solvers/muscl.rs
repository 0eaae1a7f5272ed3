//! Piecewise-linear reconstruction with the minmod limiter.

/// Smallest-magnitude argument when both share a sign, else zero.
pub fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Limited slope of the middle cell of three.
#[inline]
pub fn slope(left: f64, center: f64, right: f64) -> f64 {
    minmod(center - left, right - center)
}

/// Face states of a padded 1D slice with two ghost cells on each side.
///
/// Returns `(left, right)` states for the `n + 1` faces of the `n` interior
/// cells; face `f` separates interior cells `f - 1` and `f`.
pub fn muscl_reconstruct(cells: &[f64]) -> (Vec<f64>, Vec<f64>) {
    assert!(cells.len() >= 5, "need two ghost cells on each side");
    let n = cells.len() - 4;
    let mut left = Vec::with_capacity(n + 1);
    let mut right = Vec::with_capacity(n + 1);
    for f in 0..=n {
        // padded indices of the cells either side of face f
        let l = f + 1;
        let r = f + 2;
        left.push(cells[l] + 0.5 * slope(cells[l - 1], cells[l], cells[l + 1]));
        right.push(cells[r] - 0.5 * slope(cells[r - 1], cells[r], cells[r + 1]));
    }
    (left, right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linear_data_is_exact() {
        let cells: Vec<f64> = (0..10).map(|i| 0.5 + 0.25 * i as f64).collect();
        let (l, r) = muscl_reconstruct(&cells);
        for f in 0..l.len() {
            let exact = 0.5 + 0.25 * (f as f64 + 1.5);
            assert!((l[f] - exact).abs() < 1e-14);
            assert!((r[f] - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn extremum_is_clipped() {
        assert_eq!(slope(0.0, 1.0, 0.0), 0.0);
        assert_eq!(slope(1.0, 0.0, 2.0), 0.0);
        assert_eq!(minmod(-1.0, -3.0), -1.0);
    }

    proptest! {
        #[test]
        fn monotone_data_creates_no_new_extrema(mut v in proptest::collection::vec(-10.0f64..10.0, 6..40)) {
            v.sort_by(f64::total_cmp);
            let (l, r) = muscl_reconstruct(&v);
            for f in 0..l.len() {
                let (a, b) = (v[f + 1], v[f + 2]);
                prop_assert!(l[f] >= a.min(b) && l[f] <= a.max(b));
                prop_assert!(r[f] >= a.min(b) && r[f] <= a.max(b));
            }
        }

        #[test]
        fn minmod_is_symmetric(a in -5.0f64..5.0, b in -5.0f64..5.0) {
            prop_assert_eq!(minmod(a, b), minmod(b, a));
            prop_assert_eq!(minmod(-a, -b), -minmod(a, b));
        }
    }
}
