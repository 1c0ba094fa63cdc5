use std::collections::HashMap;

use super::TruncatedSeries;
use crate::error::{Error, Result};

fn shape_check(m: &[Vec<TruncatedSeries>]) -> Result<Option<usize>> {
    let n = m.len();
    for row in m {
        if row.len() != n {
            return Err(Error::NotSquare { rows: n, cols: row.len() });
        }
    }
    let cap = match m.first().and_then(|r| r.first()) {
        Some(s) => s.cap(),
        None => return Ok(None),
    };
    for s in m.iter().flatten() {
        if s.cap() != cap {
            return Err(Error::CapMismatch { left: cap, right: s.cap() });
        }
    }
    Ok(Some(cap))
}

/// Determinant mod `t^(cap+1)` of a square matrix of series.
///
/// Small matrices use first-row cofactor expansion. Larger ones use an
/// expansion memoised over column subsets, which never divides, since
/// `Q[t]/t^(cap+1)` has zero divisors and elimination pivots may vanish.
pub fn series_det(m: &[Vec<TruncatedSeries>]) -> Result<TruncatedSeries> {
    let cap = match shape_check(m)? {
        Some(c) => c,
        None => return Err(Error::Precondition("determinant of an empty matrix needs a cap".into())),
    };
    if m.len() <= 5 {
        let cols: Vec<usize> = (0..m.len()).collect();
        return Ok(cofactor(m, 0, &cols, cap));
    }
    Ok(subset_det(m, cap))
}

/// Plain recursive Laplace expansion, any size.
pub fn cofactor_det(m: &[Vec<TruncatedSeries>]) -> Result<TruncatedSeries> {
    let cap = match shape_check(m)? {
        Some(c) => c,
        None => return Err(Error::Precondition("determinant of an empty matrix needs a cap".into())),
    };
    let cols: Vec<usize> = (0..m.len()).collect();
    Ok(cofactor(m, 0, &cols, cap))
}

fn cofactor(m: &[Vec<TruncatedSeries>], row: usize, cols: &[usize], cap: usize) -> TruncatedSeries {
    if cols.is_empty() {
        return TruncatedSeries::one(cap);
    }
    if cols.len() == 1 {
        return m[row][cols[0]].clone();
    }
    let mut acc = TruncatedSeries::zero(cap);
    for (k, &c) in cols.iter().enumerate() {
        let entry = &m[row][c];
        if entry.is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let term = entry * &cofactor(m, row + 1, &rest, cap);
        acc = if k % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

fn subset_det(m: &[Vec<TruncatedSeries>], cap: usize) -> TruncatedSeries {
    let n = m.len();
    // minors[mask] = det of the bottom |mask| rows restricted to the columns in mask
    let mut minors: HashMap<u32, TruncatedSeries> = HashMap::new();
    minors.insert(0, TruncatedSeries::one(cap));
    for size in 1..=n {
        let row = n - size;
        let mut next = HashMap::new();
        for mask in masks_of_size(n, size) {
            let mut acc = TruncatedSeries::zero(cap);
            let mut pos = 0;
            for c in 0..n {
                if mask & (1 << c) == 0 {
                    continue;
                }
                let entry = &m[row][c];
                if !entry.is_zero() {
                    let sub = &minors[&(mask & !(1 << c))];
                    let term = entry * sub;
                    acc = if pos % 2 == 0 { &acc + &term } else { &acc - &term };
                }
                pos += 1;
            }
            next.insert(mask, acc);
        }
        minors = next;
    }
    minors.remove(&((1u32 << n) - 1)).expect("full minor")
}

fn masks_of_size(n: usize, size: usize) -> Vec<u32> {
    (0u32..(1 << n)).filter(|m| m.count_ones() as usize == size).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::int;

    fn s(cap: usize, c: &[i64]) -> TruncatedSeries {
        TruncatedSeries::from_ints(cap, c)
    }

    #[test]
    fn identity_and_triangular() {
        let m = vec![vec![s(3, &[1]), s(3, &[0])], vec![s(3, &[0]), s(3, &[1])]];
        assert_eq!(series_det(&m).unwrap(), TruncatedSeries::one(3));
        let g = TruncatedSeries::geometric(4, &int(1));
        let m = vec![vec![g.clone(), s(4, &[0])], vec![-&g, s(4, &[1])]];
        assert_eq!(series_det(&m).unwrap(), s(4, &[1, 1, 1, 1, 1]));
    }

    #[test]
    fn errors() {
        let m = vec![vec![s(1, &[1]), s(1, &[0])]];
        assert!(matches!(series_det(&m), Err(Error::NotSquare { .. })));
        let m = vec![vec![s(1, &[1]), s(2, &[0])], vec![s(1, &[1]), s(1, &[0])]];
        assert!(matches!(series_det(&m), Err(Error::CapMismatch { .. })));
    }

    #[test]
    fn large_path_matches_cofactor() {
        // 7x7 with a polynomial pattern; both routes are exact
        let n = 7;
        let m: Vec<Vec<TruncatedSeries>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| s(5, &[((i * 3 + j * 5) % 7) as i64 - 3, ((i + 2 * j) % 3) as i64 - 1]))
                    .collect()
            })
            .collect();
        assert_eq!(series_det(&m).unwrap(), cofactor_det(&m).unwrap());
    }
}
