//! Linear ranks of unordered pairs in the strict lower triangle of an n×n
//! matrix, column-major: (1,2), (1,3), (2,3), (1,4), ...
//!
//! `rank(i, j) = (j-1)(j-2)/2 + i` for `1 <= i < j`.

use crate::error::{Result, RwnError};

pub fn encode_rank(i: u64, j: u64) -> Result<u64> {
    if i == 0 || i >= j {
        return Err(RwnError::InvalidPair { i, j });
    }
    Ok((j - 1) * (j - 2) / 2 + i)
}

/// Inverse of [`encode_rank`] using one integer square root.
///
/// With `v = isqrt(8r + 1)`, the column `j` of rank `r` satisfies
/// `2j-3 <= v <= 2j-1`, and `v = 2j-1` only when `r` is the last rank of its
/// column (where `8r + 1` is an exact odd square). So:
/// exact odd root gives `j = (1+v)/2, i = j-1`; an inexact odd root gives
/// `j = (3+v)/2`; an even root gives `j = (2+v)/2`.
///
/// # Panics
/// If `r == 0`.
pub fn decode_rank(r: u64) -> (u64, u64) {
    assert!(r >= 1, "pair ranks start at 1");
    let t = 8 * r as u128 + 1;
    let v = t.isqrt();
    let exact = v * v == t;
    let odd = v % 2 == 1;
    if odd && exact {
        let j = v.div_ceil(2) as u64;
        return (j - 1, j);
    }
    let j = if odd { (3 + v) / 2 } else { (2 + v) / 2 } as u64;
    (r - (j - 1) * (j - 2) / 2, j)
}

pub fn pair_count(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}
