//! Expected-linear-time partial selection of the k largest-magnitude entries.
//!
//! Selection never sorts the whole vector: a Lomuto quickselect with a
//! median-of-three pivot narrows in on the rank-k boundary, so the expected
//! comparison count is linear in the input length. Ranking is by
//! `(magnitude, index)` with lower indices winning ties, which makes the
//! selected set unique for every input.

/// `true` when entry `a` outranks entry `b`: larger magnitude first,
/// lower index on equal magnitude.
#[inline]
fn outranks(a: (f64, u32), b: (f64, u32)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Lomuto partition of `e[lo..hi]` around a median-of-three pivot.
/// Returns the pivot's final position; everything before it outranks it.
fn partition(e: &mut [(f64, u32)], lo: usize, hi: usize, comparisons: &mut u64) -> usize {
    let mid = lo + (hi - lo) / 2;
    // Median of first/middle/last, moved to the end as the pivot.
    *comparisons += 3;
    let (a, b, c) = (e[lo], e[mid], e[hi - 1]);
    let median = if outranks(a, b) {
        if outranks(b, c) {
            mid
        } else if outranks(a, c) {
            hi - 1
        } else {
            lo
        }
    } else if outranks(a, c) {
        lo
    } else if outranks(b, c) {
        hi - 1
    } else {
        mid
    };
    e.swap(median, hi - 1);

    let pivot = e[hi - 1];
    let mut store = lo;
    for i in lo..hi - 1 {
        *comparisons += 1;
        if outranks(e[i], pivot) {
            e.swap(i, store);
            store += 1;
        }
    }
    e.swap(store, hi - 1);
    store
}

/// Rearranges `e` so that `e[..k]` holds the k top-ranked entries (in no
/// particular order). Counts ranking comparisons into `comparisons`.
pub(crate) fn select_top(e: &mut [(f64, u32)], k: usize, comparisons: &mut u64) {
    let n = e.len();
    if k == 0 || k >= n {
        return;
    }
    let mut lo = 0;
    let mut hi = n;
    while hi - lo > 1 {
        let p = partition(e, lo, hi, comparisons);
        if p == k || p + 1 == k {
            return;
        }
        if p > k {
            hi = p;
        } else {
            lo = p + 1;
        }
    }
}
