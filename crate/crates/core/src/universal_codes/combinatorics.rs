//! Exact counting and ranking of subsets, compositions and type-class sequences.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn multinomial(counts: &[u64]) -> BigUint {
    let mut acc = BigUint::one();
    let mut total = 0u64;
    for &c in counts {
        total += c;
        acc *= binomial(total, c);
    }
    acc
}

/// Rank of increasing positions `p_1 < … < p_m` as Σ C(p_i, i) (colexicographic).
pub fn subset_rank(positions: &[u64]) -> BigUint {
    positions
        .iter()
        .enumerate()
        .fold(BigUint::zero(), |acc, (i, &p)| acc + binomial(p, i as u64 + 1))
}

/// Inverse of [`subset_rank`] for `m` positions drawn from `0..n`.
pub fn subset_unrank(mut rank: BigUint, m: u64, n: u64) -> Option<Vec<u64>> {
    if rank >= binomial(n, m) {
        return None;
    }
    let mut out = vec![0u64; m as usize];
    let mut hi = n;
    for i in (1..=m).rev() {
        // Largest p < hi with C(p, i) ≤ rank.
        let (mut lo, mut up) = (i - 1, hi);
        while up - lo > 1 {
            let mid = lo + (up - lo) / 2;
            if binomial(mid, i) <= rank {
                lo = mid;
            } else {
                up = mid;
            }
        }
        rank -= binomial(lo, i);
        out[(i - 1) as usize] = lo;
        hi = lo;
    }
    Some(out)
}

/// Number of count vectors of length `k` summing to `n`.
pub fn composition_count(n: u64, k: u64) -> BigUint {
    if k == 0 {
        return if n == 0 { BigUint::one() } else { BigUint::zero() };
    }
    binomial(n + k - 1, k - 1)
}

/// Rank in the order where the first count descends fastest: (n,0,…) is 0.
pub fn composition_rank(counts: &[u64]) -> BigUint {
    let k = counts.len() as u64;
    let mut rem: u64 = counts.iter().sum();
    let mut rank = BigUint::zero();
    for (j, &c) in counts.iter().enumerate().take(counts.len().saturating_sub(1)) {
        let m = k - j as u64 - 1;
        if rem > c {
            rank += binomial(rem - c - 1 + m, m);
        }
        rem -= c;
    }
    rank
}

pub fn composition_unrank(mut rank: BigUint, n: u64, k: u64) -> Option<Vec<u64>> {
    if k == 0 || rank >= composition_count(n, k) {
        return None;
    }
    let mut out = Vec::with_capacity(k as usize);
    let mut rem = n;
    for j in 0..k - 1 {
        let m = k - j - 1;
        // Smallest t with C(t + m, m) > rank; the count is rem − t.
        let (mut lo, mut hi) = (0u64, rem);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if binomial(mid + m, m) > rank {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let t = lo;
        if t > 0 {
            rank -= binomial(t - 1 + m, m);
        }
        out.push(rem - t);
        rem = t;
    }
    out.push(rem);
    Some(out)
}

/// Lexicographic rank of `seq` (letters `0..k`) within its type class.
pub fn sequence_rank(seq: &[usize], k: usize) -> BigUint {
    let mut counts = vec![0u64; k];
    for &s in seq {
        counts[s] += 1;
    }
    let mut m = multinomial(&counts);
    let mut r = seq.len() as u64;
    let mut rank = BigUint::zero();
    for &s in seq {
        let below: u64 = counts[..s].iter().sum();
        if below > 0 {
            rank += &m * below / r;
        }
        m = &m * counts[s] / r;
        counts[s] -= 1;
        r -= 1;
    }
    rank
}

pub fn sequence_unrank(mut rank: BigUint, counts: &[u64]) -> Option<Vec<usize>> {
    let mut counts = counts.to_vec();
    let mut m = multinomial(&counts);
    if rank >= m {
        return None;
    }
    let mut r: u64 = counts.iter().sum();
    let mut out = Vec::with_capacity(r as usize);
    while r > 0 {
        let t = (&rank * r / &m).to_u64().unwrap_or(u64::MAX);
        let mut below = 0u64;
        let mut letter = counts.len();
        for (b, &c) in counts.iter().enumerate() {
            if c > 0 && t < below + c {
                letter = b;
                break;
            }
            below += c;
        }
        if letter == counts.len() {
            return None;
        }
        if below > 0 {
            rank -= &m * below / r;
        }
        m = &m * counts[letter] / r;
        counts[letter] -= 1;
        r -= 1;
        out.push(letter);
    }
    Some(out)
}
