//! Per-cell maximum-average interval search.
//!
//! For prefix sums `P`, the best interval containing cell `i` maximises the
//! slope `(P[b] − P[a]) / (b − a)` over `a ≤ i < b`. Divide and conquer on the
//! cell range: intervals inside one half are handled recursively, intervals
//! crossing the midpoint by tangent queries against a convex hull of the
//! prefix points on the other side, followed by a running maximum.

use crate::field::Field;

const PARALLEL_CUTOFF: usize = 1 << 14;

/// Best `(a, b)` for every cell of `[lo, hi)`, indexed from `lo`.
pub(crate) fn best_intervals<T: Field>(p: &[T], lo: usize, hi: usize) -> Vec<(u32, u32)> {
    let mut out = vec![(0u32, 0u32); hi - lo];
    solve(p, lo, hi, &mut out);
    out
}

/// `p[b]−p[a]` over `b−a` is larger for `(a1,b1)` than `(a2,b2)`.
#[inline]
fn better<T: Field>(p: &[T], (a1, b1): (u32, u32), (a2, b2): (u32, u32)) -> bool {
    let (a1, b1, a2, b2) = (a1 as usize, b1 as usize, a2 as usize, b2 as usize);
    (p[b1].clone() - p[a1].clone()) * T::from_usize(b2 - a2) > (p[b2].clone() - p[a2].clone()) * T::from_usize(b1 - a1)
}

fn solve<T: Field>(p: &[T], lo: usize, hi: usize, out: &mut [(u32, u32)]) {
    let n = hi - lo;
    if n == 1 {
        out[0] = (lo as u32, hi as u32);
        return;
    }
    let m = lo + n / 2;
    {
        let (left, right) = out.split_at_mut(m - lo);
        if n >= PARALLEL_CUTOFF {
            rayon::join(|| solve(p, lo, m, left), || solve(p, m, hi, right));
        } else {
            solve(p, lo, m, left);
            solve(p, m, hi, right);
        }
    }
    cross_left(p, lo, m, hi, &mut out[..m - lo]);
    cross_right(p, lo, m, hi, &mut out[m - lo..]);
}

/// Cross product sign of `(o→a) × (o→b)` on prefix points, as `>` 0 comparison.
#[inline]
fn turn<T: Field>(p: &[T], o: usize, a: usize, b: usize) -> (T, T) {
    let lhs = T::from_usize(a - o) * (p[b].clone() - p[o].clone());
    let rhs = (p[a].clone() - p[o].clone()) * T::from_usize(b - o);
    (lhs, rhs)
}

/// Left cells: `a ∈ [lo, i]`, `b ∈ [m+1, hi]`.
fn cross_left<T: Field>(p: &[T], lo: usize, m: usize, hi: usize, out: &mut [(u32, u32)]) {
    // Upper hull of the points b = m+1..=hi.
    let mut hull: Vec<usize> = Vec::new();
    for b in m + 1..=hi {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let (l, r) = turn(p, o, a, b);
            // pop unless (o, a, b) is a strict right turn
            if l >= r {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(b);
    }
    let mut best: Option<(u32, u32)> = None;
    for a in lo..m {
        // slope(a, hull[k]) is unimodal in k; find its peak.
        let (mut l, mut r) = (0usize, hull.len() - 1);
        while l < r {
            let mid = (l + r) / 2;
            let c1 = (a as u32, hull[mid] as u32);
            let c2 = (a as u32, hull[mid + 1] as u32);
            if better(p, c2, c1) {
                l = mid + 1;
            } else {
                r = mid;
            }
        }
        let cand = (a as u32, hull[l] as u32);
        if best.is_none_or(|b| better(p, cand, b)) {
            best = Some(cand);
        }
        let slot = &mut out[a - lo];
        let b = best.expect("set above");
        if better(p, b, *slot) {
            *slot = b;
        }
    }
}

/// Right cells: `b ∈ [i+1, hi]`, `a ∈ [lo, m−1]`.
fn cross_right<T: Field>(p: &[T], lo: usize, m: usize, hi: usize, out: &mut [(u32, u32)]) {
    // Lower hull of the points a = lo..=m-1.
    let mut hull: Vec<usize> = Vec::new();
    for a in lo..m {
        while hull.len() >= 2 {
            let (o, x) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let (l, r) = turn(p, o, x, a);
            // pop unless (o, x, a) is a strict left turn
            if l <= r {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(a);
    }
    let mut best: Option<(u32, u32)> = None;
    for b in (m + 1..=hi).rev() {
        let (mut l, mut r) = (0usize, hull.len() - 1);
        while l < r {
            let mid = (l + r) / 2;
            let c1 = (hull[mid] as u32, b as u32);
            let c2 = (hull[mid + 1] as u32, b as u32);
            if better(p, c2, c1) {
                l = mid + 1;
            } else {
                r = mid;
            }
        }
        let cand = (hull[l] as u32, b as u32);
        if best.is_none_or(|x| better(p, cand, x)) {
            best = Some(cand);
        }
        let slot = &mut out[b - 1 - m];
        let x = best.expect("set above");
        if better(p, x, *slot) {
            *slot = x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::prefix_sums;

    fn brute(v: &[i128]) -> Vec<(i128, i128)> {
        let n = v.len();
        (0..n)
            .map(|i| {
                let mut best = (0i128, 1i128);
                for a in 0..=i {
                    for b in i + 1..=n {
                        let s: i128 = v[a..b].iter().sum();
                        let l = (b - a) as i128;
                        if s * best.1 > best.0 * l {
                            best = (s, l);
                        }
                    }
                }
                best
            })
            .collect()
    }

    #[test]
    fn matches_brute_force() {
        let cases: Vec<Vec<i128>> = vec![
            vec![5],
            vec![1, 2],
            vec![3, 0, 0, 3],
            vec![0, 0, 0, 0, 0, 0],
            vec![1, 9, 2, 8, 3, 7, 4, 6, 5],
            (0..37).map(|i| (i * 7919 % 13) as i128).collect(),
            (0..50).map(|i| (50 - i) as i128).collect(),
        ];
        for v in cases {
            let p = prefix_sums(&v);
            let got = best_intervals(&p, 0, v.len());
            for (i, ((a, b), (s, l))) in got.iter().zip(brute(&v)).enumerate() {
                let (a, b) = (*a as usize, *b as usize);
                assert!(a <= i && i < b);
                assert_eq!((p[b] - p[a]) * l, s * (b - a) as i128, "cell {i} of {v:?}");
            }
        }
    }
}
