//! Small exact-arithmetic helpers on big integers and rationals.

use num::bigint::BigInt;
use num::rational::Ratio;
use num::traits::{One, Signed, Zero};
use num::Integer;

pub type Int = BigInt;
pub type Rat = Ratio<BigInt>;

pub fn int(v: i64) -> Int {
    Int::from(v)
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

pub fn rat_int(v: i64) -> Rat {
    Rat::from_integer(Int::from(v))
}

/// Floor of the square root of a non-negative integer.
pub fn isqrt(n: &Int) -> Int {
    assert!(!n.is_negative(), "isqrt of negative number");
    if n.is_zero() {
        return Int::zero();
    }
    let bits = n.bits();
    let mut x: Int = Int::one() << ((bits / 2) + 1);
    loop {
        let y = (&x + n / &x) >> 1;
        if y >= x {
            break;
        }
        x = y;
    }
    x
}

/// Exact integer n-th root if it exists.
pub fn nth_root_exact(n: &Int, k: u32) -> Option<Int> {
    if k == 0 {
        return None;
    }
    if n.is_zero() {
        return Some(Int::zero());
    }
    let neg = n.is_negative();
    if neg && k % 2 == 0 {
        return None;
    }
    let a = n.abs();
    // binary search
    let mut lo = Int::one();
    let mut hi: Int = Int::one() << (a.bits() / k as u64 + 2);
    while lo < hi {
        let mid: Int = (&lo + &hi + 1u8) >> 1;
        if mid.pow(k) <= a {
            lo = mid;
        } else {
            hi = mid - 1u8;
        }
    }
    if lo.pow(k) == a {
        Some(if neg { -lo } else { lo })
    } else {
        None
    }
}

/// Exact rational k-th root if it exists.
pub fn rat_nth_root_exact(r: &Rat, k: u32) -> Option<Rat> {
    let n = nth_root_exact(r.numer(), k)?;
    let d = nth_root_exact(r.denom(), k)?;
    Some(Rat::new(n, d))
}

/// Largest integer x with x <= c + sqrt(s2), for rational c and s2 >= 0.
pub fn floor_plus_sqrt(c: &Rat, s2: &Rat) -> Int {
    assert!(!s2.is_negative());
    // x <= c + sqrt(s2)  <=>  x - c <= sqrt(s2)
    // guess from isqrt, then fix up exactly
    let mut x = c.floor().to_integer() + isqrt(&(s2.ceil().to_integer() + 1u8)) + 2u8;
    loop {
        let d = Rat::from_integer(x.clone()) - c;
        if d.is_negative() || d.is_zero() || &(&d * &d) <= s2 {
            return x;
        }
        x -= 1u8;
    }
}

/// Smallest integer x with x >= c - sqrt(s2).
pub fn ceil_minus_sqrt(c: &Rat, s2: &Rat) -> Int {
    -floor_plus_sqrt(&(-c), s2)
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return a.max(b);
    }
    a / a.gcd(&b) * b
}

/// Euler totient of n.
pub fn phi_u64(n: u64) -> u64 {
    let mut n = n;
    let mut result = n;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isqrt_small() {
        for n in 0u64..2000 {
            let r = isqrt(&Int::from(n));
            let r64: u64 = (&r).try_into().unwrap();
            assert!(r64 * r64 <= n);
            assert!((r64 + 1) * (r64 + 1) > n);
        }
    }

    #[test]
    fn nth_roots() {
        assert_eq!(nth_root_exact(&int(27), 3), Some(int(3)));
        assert_eq!(nth_root_exact(&int(28), 3), None);
        assert_eq!(nth_root_exact(&int(-8), 3), Some(int(-2)));
        assert_eq!(nth_root_exact(&int(256), 2), Some(int(16)));
    }

    #[test]
    fn sqrt_bounds() {
        // x <= 1/2 + sqrt(2): max x = 1
        assert_eq!(floor_plus_sqrt(&rat(1, 2), &rat(2, 1)), int(1));
        // x >= 1/2 - sqrt(2): min x = -0
        assert_eq!(ceil_minus_sqrt(&rat(1, 2), &rat(2, 1)), int(0));
        assert_eq!(floor_plus_sqrt(&rat(0, 1), &rat(0, 1)), int(0));
    }

    #[test]
    fn totient() {
        assert_eq!(phi_u64(1), 1);
        assert_eq!(phi_u64(12), 4);
        assert_eq!(phi_u64(72), 24);
    }
}
