//! Small prime lists for the weight assignments.

use std::sync::Mutex;

static SIEVE: Mutex<Vec<usize>> = Mutex::new(Vec::new());

/// All primes `≤ bound`, by the sieve of Eratosthenes.
pub fn primes_up_to(bound: usize) -> Vec<usize> {
    if bound < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; bound + 1];
    let mut out = Vec::new();
    for i in 2..=bound {
        if composite[i] {
            continue;
        }
        out.push(i);
        let mut j = i * i;
        while j <= bound {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// The first `k` primes. Results are memoised for the process.
pub fn first_primes(k: usize) -> Vec<usize> {
    let mut cache = SIEVE.lock().unwrap_or_else(|e| e.into_inner());
    let mut bound = 64usize;
    while cache.len() < k {
        bound = bound.max(cache.last().copied().unwrap_or(0) * 2);
        *cache = primes_up_to(bound);
        bound *= 2;
    }
    cache[..k].to_vec()
}

/// The `k`-th prime (1-based).
pub fn nth_prime(k: usize) -> usize {
    assert!(k >= 1, "primes are counted from 1");
    first_primes(k)[k - 1]
}

/// `a^e mod m` for small `m`.
pub fn pow_mod(a: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m = m as u128;
    let mut base = a as u128 % m;
    let mut acc = 1u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    acc as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_primes_match_trial_division() {
        let ps = first_primes(200);
        let brute: Vec<usize> =
            (2..).filter(|&x: &usize| (2..x).take_while(|d| d * d <= x).all(|d| x % d != 0)).take(200).collect();
        assert_eq!(ps, brute);
        assert_eq!(nth_prime(1), 2);
        assert_eq!(nth_prime(10), 29);
    }

    #[test]
    fn pow_mod_small() {
        assert_eq!(pow_mod(2, 10, 1000), 24);
        assert_eq!(pow_mod(2, 0, 7), 1);
        assert_eq!(pow_mod(5, 3, 1), 0);
    }
}
