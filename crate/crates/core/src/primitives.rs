//! Desk-scale stand-ins for a PRF and a PRG.
//!
//! `prf[w](k, x)` xors `k` with a fold of `x` and pushes the result through a
//! fixed public permutation of `{0,1}^|k|`; further blocks use the next
//! counter value and the output is truncated to `w` bits. `prg(s)` is
//! `prf[4|s|](s, 0)`, so its first block is a permutation of the seed and the
//! generator is injective.

use crate::bits::{Bits, MAX_WIDTH};
use crate::prob::{self, Prob};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Seed of every permutation table.
pub const TABLE_SEED: u64 = 0x5eed_0c1_2024;

/// Largest permutation domain width that will be tabulated.
pub const MAX_TABLE_WIDTH: u32 = 20;

fn tables() -> &'static Mutex<HashMap<u32, Arc<Vec<u64>>>> {
    static T: OnceLock<Mutex<HashMap<u32, Arc<Vec<u64>>>>> = OnceLock::new();
    T.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The public permutation of `{0,1}^m`.
pub fn permutation(m: u32) -> Arc<Vec<u64>> {
    assert!(
        m <= MAX_TABLE_WIDTH,
        "permutation over {m} bits is too large to tabulate"
    );
    let mut guard = tables().lock().expect("table lock");
    guard
        .entry(m)
        .or_insert_with(|| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(TABLE_SEED ^ (m as u64).wrapping_mul(0x9e37_79b9));
            let mut t: Vec<u64> = (0..(1u64 << m)).collect();
            t.shuffle(&mut rng);
            Arc::new(t)
        })
        .clone()
}

fn fold(x: &Bits, m: u32) -> u64 {
    if m == 0 {
        return 0;
    }
    let mask = (1u64 << m) - 1;
    let mut v = x.value();
    let mut acc = 0;
    let mut left = x.width();
    loop {
        acc ^= v & mask;
        if left <= m {
            break;
        }
        v >>= m;
        left -= m;
    }
    acc
}

/// `prf[w](k, x)`.
pub fn prf(k: &Bits, x: &Bits, w: u32) -> Bits {
    let m = k.width();
    assert!(m >= 1, "prf key must be nonempty");
    assert!(w <= MAX_WIDTH);
    let table = permutation(m);
    let mask = (1u64 << m) - 1;
    let base = k.value() ^ fold(x, m);
    let mut out = Bits::empty();
    let mut i = 0u64;
    while out.width() < w {
        let block = Bits::new(table[((base ^ i) & mask) as usize], m);
        let take = (w - out.width()).min(m);
        out = out.concat(&block.truncate(take).unwrap()).unwrap();
        i += 1;
    }
    out
}

/// `prg(s)`, stretching `|s|` bits to `4|s|`.
pub fn prg(s: &Bits) -> Bits {
    prf(s, &Bits::zero(s.width()), 4 * s.width())
}

/// Hex dump of the permutation table used at width `m`, one entry per line.
pub fn permutation_hex(m: u32) -> String {
    let digits = (m as usize).div_ceil(4).max(1);
    permutation(m)
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{i:0digits$x} {v:0digits$x}\n"))
        .collect()
}

/// Best single-point distinguisher between `prg(U_n)` and `U_4n`:
/// `max_y |Pr[prg(s) = y] - 2^-4n|`, computed by enumerating every seed.
pub fn prg_point_advantage(n: u32) -> Prob {
    let mut counts: HashMap<Bits, u64> = HashMap::new();
    for s in Bits::all(n) {
        *counts.entry(prg(&s)).or_default() += 1;
    }
    let max = counts.values().copied().max().unwrap_or(0);
    let hit = prob::ratio(max as i64, 1) * prob::pow2_neg(n);
    let uniform = prob::pow2_neg(4 * n);
    prob::abs(&(hit - uniform))
}

/// Best two-query single-point distinguisher between `prf[n](K, .)` with an
/// `n`-bit key and a random function with `n`-bit outputs on `n`-bit inputs.
pub fn prf_point_advantage(n: u32) -> Prob {
    let mut best = prob::zero();
    let inputs: Vec<Bits> = Bits::all(n).collect();
    let uniform = prob::pow2_neg(2 * n);
    for (i, x1) in inputs.iter().enumerate() {
        for x2 in &inputs[i + 1..] {
            let mut counts: HashMap<(Bits, Bits), u64> = HashMap::new();
            for k in Bits::all(n) {
                *counts.entry((prf(&k, x1, n), prf(&k, x2, n))).or_default() += 1;
            }
            let max = counts.values().copied().max().unwrap_or(0);
            let adv =
                prob::abs(&(prob::ratio(max as i64, 1) * prob::pow2_neg(n) - uniform.clone()));
            if adv > best {
                best = adv;
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_is_a_bijection() {
        for m in 1..=6 {
            let mut t = (*permutation(m)).clone();
            t.sort();
            assert_eq!(t, (0..(1u64 << m)).collect::<Vec<_>>());
        }
    }

    #[test]
    fn prg_is_injective_and_stretches() {
        for n in 1..=4 {
            let outs: std::collections::HashSet<Bits> = Bits::all(n).map(|s| prg(&s)).collect();
            assert_eq!(outs.len(), 1 << n);
            assert!(outs.iter().all(|y| y.width() == 4 * n));
        }
    }

    #[test]
    fn point_advantages_match_closed_forms() {
        for n in 1..=4 {
            let two = prob::pow2_neg(n) - prob::pow2_neg(2 * n);
            assert_eq!(prf_point_advantage(n), two);
            let one = prob::pow2_neg(n) - prob::pow2_neg(4 * n);
            assert_eq!(prg_point_advantage(n), one);
        }
    }

    #[test]
    fn prf_is_deterministic_and_truncates() {
        let k = Bits::new(0b10, 2);
        let x = Bits::new(0b1, 1);
        assert_eq!(prf(&k, &x, 5), prf(&k, &x, 5));
        assert_eq!(prf(&k, &x, 5).truncate(2).unwrap(), prf(&k, &x, 2));
    }
}
