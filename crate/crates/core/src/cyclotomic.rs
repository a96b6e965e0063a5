//! Exact arithmetic in cyclotomic fields Q(ξ_M).
//!
//! Elements carry their own conductor and are stored reduced modulo the M-th
//! cyclotomic polynomial (power basis 1, x, ..., x^{φ(M)-1}). Binary
//! operations promote both operands to the lcm of their conductors;
//! per-conductor reduction data is cached globally.

use crate::error::{Error, Result};
use crate::znum::{lcm_u64, phi_u64, Int, Rat};
#[allow(unused_imports)]
use num::traits::Signed;
use num::traits::{One, Zero};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug)]
struct ConductorData {
    m: u64,
    phi: usize,
    /// Monic integer coefficients of the M-th cyclotomic polynomial, low first.
    cyclo: Vec<Int>,
    /// x^k mod Φ_M for k = 0..M (+ headroom for products), integer entries.
    powmod: Vec<Vec<Int>>,
}

fn registry() -> &'static Mutex<HashMap<u64, Arc<ConductorData>>> {
    static REG: OnceLock<Mutex<HashMap<u64, Arc<ConductorData>>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Integer polynomial division q = a / b, exact for monic b.
fn int_poly_div_exact(a: &[Int], b: &[Int]) -> Vec<Int> {
    let mut rem: Vec<Int> = a.to_vec();
    let db = b.len() - 1;
    assert!(b[db].is_one(), "divisor must be monic");
    if rem.len() <= db {
        assert!(rem.iter().all(|c| c.is_zero()));
        return vec![Int::zero()];
    }
    let mut quot = vec![Int::zero(); rem.len() - db];
    for k in (db..rem.len()).rev() {
        let c = rem[k].clone();
        if c.is_zero() {
            continue;
        }
        quot[k - db] = c.clone();
        for (i, bi) in b.iter().enumerate() {
            let d = &c * bi;
            rem[k - db + i] -= d;
        }
    }
    assert!(rem.iter().all(|c| c.is_zero()), "division not exact");
    quot
}

fn cyclotomic_poly(m: u64) -> Vec<Int> {
    if m == 1 {
        return vec![-Int::one(), Int::one()];
    }
    // x^m - 1 divided by the product of Φ_d over proper divisors d | m
    let mut num = vec![Int::zero(); m as usize + 1];
    num[0] = -Int::one();
    num[m as usize] = Int::one();
    let mut acc = num;
    for d in crate::znum::divisors(m) {
        if d == m {
            continue;
        }
        let phi_d = conductor_data(d).cyclo.clone();
        acc = int_poly_div_exact(&acc, &phi_d);
    }
    acc
}

fn conductor_data(m: u64) -> Arc<ConductorData> {
    if let Some(d) = registry().lock().unwrap().get(&m) {
        return d.clone();
    }
    let cyclo = cyclotomic_poly(m);
    let phi = cyclo.len() - 1;
    debug_assert_eq!(phi as u64, phi_u64(m));
    // powmod[k] = x^k mod Φ_M for k up to max(m, 2*phi - 1)
    let top = (m as usize).max(2 * phi.max(1));
    let mut powmod: Vec<Vec<Int>> = Vec::with_capacity(top + 1);
    for k in 0..=top {
        if k < phi {
            let mut v = vec![Int::zero(); phi];
            v[k] = Int::one();
            powmod.push(v);
        } else {
            // x^k = x * x^{k-1} mod Φ
            let prev = &powmod[k - 1];
            let mut v = vec![Int::zero(); phi];
            let lead = prev[phi - 1].clone();
            for i in (1..phi).rev() {
                v[i] = prev[i - 1].clone();
            }
            if !lead.is_zero() {
                // subtract lead * (Φ - x^phi) shifted: x^phi = -Φ_{<phi}
                for i in 0..phi {
                    v[i] -= &lead * &cyclo[i];
                }
            }
            powmod.push(v);
        }
    }
    let data = Arc::new(ConductorData { m, phi, cyclo, powmod });
    registry().lock().unwrap().insert(m, data.clone());
    data
}

/// An element of Q(ξ_M), canonically reduced.
#[derive(Clone)]
pub struct Cyclotomic {
    conductor: u64,
    coeffs: Vec<Rat>,
}

impl std::fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Cyc[{}](", self.conductor)?;
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if i == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}*z^{i}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

impl Cyclotomic {
    pub fn zero() -> Self {
        Cyclotomic { conductor: 1, coeffs: vec![Rat::zero()] }
    }

    pub fn one() -> Self {
        Cyclotomic::from_rat(Rat::one())
    }

    pub fn from_rat(r: Rat) -> Self {
        Cyclotomic { conductor: 1, coeffs: vec![r] }
    }

    pub fn from_i64(v: i64) -> Self {
        Cyclotomic::from_rat(Rat::from_integer(Int::from(v)))
    }

    /// ξ_m^k.
    pub fn root_of_unity(m: u64, k: i64) -> Self {
        assert!(m >= 1);
        let kk = k.rem_euclid(m as i64) as usize;
        let data = conductor_data(m);
        let coeffs = data.powmod[kk].iter().map(|c| Rat::from_integer(c.clone())).collect();
        Cyclotomic { conductor: m, coeffs }
    }

    /// e^{2πi r} for rational r.
    pub fn e2pi(r: &Rat) -> Self {
        let den: u64 = r.denom().try_into().expect("denominator too large");
        let num = (r.numer() % Int::from(den)).clone();
        let k: i64 = num.try_into().expect("numerator too large after reduction");
        Cyclotomic::root_of_unity(den, k)
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_rat().map(|r| r.is_one()).unwrap_or(false)
    }

    /// Rational value if the element lies in Q.
    pub fn as_rat(&self) -> Option<Rat> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    pub fn promote(&self, to: u64) -> Cyclotomic {
        assert!(to % self.conductor == 0, "can only promote to a multiple");
        if to == self.conductor {
            return self.clone();
        }
        let t = (to / self.conductor) as usize;
        let data = conductor_data(to);
        let mut out = vec![Rat::zero(); data.phi];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let row = &data.powmod[i * t];
            for (j, r) in row.iter().enumerate() {
                if !r.is_zero() {
                    out[j] += c * &Rat::from_integer(r.clone());
                }
            }
        }
        Cyclotomic { conductor: to, coeffs: out }
    }

    fn promote_pair(a: &Cyclotomic, b: &Cyclotomic) -> (Cyclotomic, Cyclotomic, u64) {
        let m = lcm_u64(a.conductor, b.conductor);
        (a.promote(m), b.promote(m), m)
    }

    pub fn add(&self, other: &Cyclotomic) -> Cyclotomic {
        let (mut a, b, m) = Cyclotomic::promote_pair(self, other);
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x += y;
        }
        Cyclotomic { conductor: m, coeffs: a.coeffs }
    }

    pub fn sub(&self, other: &Cyclotomic) -> Cyclotomic {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Cyclotomic {
        Cyclotomic {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn mul(&self, other: &Cyclotomic) -> Cyclotomic {
        if self.is_zero() || other.is_zero() {
            return Cyclotomic::zero();
        }
        let (a, b, m) = Cyclotomic::promote_pair(self, other);
        let data = conductor_data(m);
        let phi = data.phi;
        let mut conv = vec![Rat::zero(); 2 * phi - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                conv[i + j] += x * y;
            }
        }
        let mut out = vec![Rat::zero(); phi];
        for (k, c) in conv.into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if k < phi {
                out[k] += c;
            } else {
                for (j, r) in data.powmod[k].iter().enumerate() {
                    if !r.is_zero() {
                        out[j] += &c * &Rat::from_integer(r.clone());
                    }
                }
            }
        }
        Cyclotomic { conductor: m, coeffs: out }
    }

    pub fn mul_rat(&self, r: &Rat) -> Cyclotomic {
        Cyclotomic {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    pub fn inv(&self) -> Result<Cyclotomic> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(r) = self.as_rat() {
            return Ok(Cyclotomic::from_rat(Rat::one() / r));
        }
        // extended euclid in Q[x] against Φ_M
        let data = conductor_data(self.conductor);
        let modulus: Vec<Rat> = data.cyclo.iter().map(|c| Rat::from_integer(c.clone())).collect();
        let a: Vec<Rat> = self.coeffs.clone();
        let (g, _, t) = poly_ext_gcd(&modulus, &a);
        // g must be a nonzero constant
        let deg_g = poly_deg(&g);
        if deg_g != 0 {
            return Err(Error::InternalInconsistency(
                "element shares a factor with the cyclotomic polynomial".into(),
            ));
        }
        let scale = Rat::one() / g[0].clone();
        let mut inv: Vec<Rat> = t.iter().map(|c| c * &scale).collect();
        // reduce to length phi
        inv.resize(data.phi.max(inv.len()), Rat::zero());
        let red = reduce_mod(&inv, &data);
        Ok(Cyclotomic { conductor: self.conductor, coeffs: red })
    }

    pub fn div(&self, other: &Cyclotomic) -> Result<Cyclotomic> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<Cyclotomic> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = Cyclotomic::one();
        let mut b = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&b);
            }
            k >>= 1;
            if k > 0 {
                b = b.mul(&b);
            }
        }
        Ok(acc)
    }

    /// Complex conjugate (ξ ↦ ξ^{-1}).
    pub fn conj(&self) -> Cyclotomic {
        if self.conductor == 1 {
            return self.clone();
        }
        let data = conductor_data(self.conductor);
        let mut out = vec![Rat::zero(); data.phi];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let k = ((self.conductor as usize) - i) % self.conductor as usize;
            for (j, r) in data.powmod[k].iter().enumerate() {
                if !r.is_zero() {
                    out[j] += c * &Rat::from_integer(r.clone());
                }
            }
        }
        Cyclotomic { conductor: self.conductor, coeffs: out }
    }

    /// If the element is a root of unity ξ_M^k, return (M, k). Roots of
    /// unity in Q(ξ_m) have order dividing lcm(2, m), so the scan happens at
    /// that conductor.
    pub fn as_root_of_unity(&self) -> Option<(u64, u64)> {
        let m = if self.conductor % 2 == 0 { self.conductor } else { 2 * self.conductor };
        let promoted = self.promote(m);
        let data = conductor_data(m);
        for k in 0..m {
            let row = &data.powmod[k as usize];
            if promoted
                .coeffs
                .iter()
                .zip(row)
                .all(|(c, r)| c.denom().is_one() && c.numer() == r)
            {
                return Some((m, k));
            }
        }
        None
    }

    /// Principal s-th root of a root of unity: ξ_M^k ↦ ξ_{sM}^k.
    pub fn principal_root(&self, s: u64) -> Result<Cyclotomic> {
        let (m, k) = self
            .as_root_of_unity()
            .ok_or_else(|| Error::NotARootOfUnity(format!("{self:?}")))?;
        Ok(Cyclotomic::root_of_unity(m * s, k as i64))
    }

    /// Decompose into a positive rational times a root of unity, when possible.
    pub fn as_positive_rational_times_root(&self) -> Option<(Rat, Cyclotomic)> {
        if self.is_zero() {
            return None;
        }
        let m = if self.conductor % 2 == 0 { self.conductor } else { 2 * self.conductor };
        for k in 0..m {
            let unit = Cyclotomic::root_of_unity(m, k as i64);
            let quot = self.mul(&unit.conj());
            if let Some(r) = quot.as_rat() {
                if r > Rat::from_integer(Int::from(0)) {
                    return Some((r, unit));
                }
            }
        }
        None
    }

    /// Exact principal s-th root of a positive-rational times root-of-unity
    /// scalar; errors when the rational part has no exact s-th root.
    pub fn principal_root_scalar(&self, s: u64) -> Result<Cyclotomic> {
        if let Some((r, unit)) = self.as_positive_rational_times_root() {
            let root = crate::znum::rat_nth_root_exact(&r, s as u32).ok_or_else(|| {
                Error::NotARootOfUnity(format!("no exact {s}-th root of {r}"))
            })?;
            Ok(unit.principal_root(s)?.mul_rat(&root))
        } else {
            Err(Error::NotARootOfUnity(format!("{self:?}")))
        }
    }

    pub fn eq(&self, other: &Cyclotomic) -> bool {
        let (a, b, _) = Cyclotomic::promote_pair(self, other);
        a.coeffs == b.coeffs
    }

    pub fn to_complex(&self) -> (f64, f64) {
        let m = self.conductor as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let v = rat_to_f64(c);
            let ang = 2.0 * std::f64::consts::PI * (i as f64) / m;
            re += v * ang.cos();
            im += v * ang.sin();
        }
        (re, im)
    }

    /// Canonical text form `M:c0,c1,...` with rational coefficients.
    pub fn to_text(&self) -> String {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        format!("{}:{}", self.conductor, parts.join(","))
    }

    pub fn from_text(s: &str) -> Result<Cyclotomic> {
        let (m, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::ParseError(format!("bad cyclotomic literal: {s}")))?;
        let m: u64 = m.parse().map_err(|_| Error::ParseError(format!("bad conductor: {s}")))?;
        let data = conductor_data(m);
        let mut coeffs = Vec::new();
        for p in rest.split(',') {
            let r: Rat = p
                .trim()
                .parse()
                .map_err(|_| Error::ParseError(format!("bad coefficient: {p}")))?;
            coeffs.push(r);
        }
        if coeffs.len() != data.phi {
            return Err(Error::ParseError(format!(
                "expected {} coefficients for conductor {m}, got {}",
                data.phi,
                coeffs.len()
            )));
        }
        Ok(Cyclotomic { conductor: m, coeffs })
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    // exact-ish via string would be slow; use ratio of f64 with scaling
    let n = r.numer();
    let d = r.denom();
    big_to_f64(n) / big_to_f64(d)
}

fn big_to_f64(n: &Int) -> f64 {
    let s = n.to_string();
    s.parse::<f64>().unwrap_or(f64::NAN)
}

fn reduce_mod(coeffs: &[Rat], data: &ConductorData) -> Vec<Rat> {
    let phi = data.phi;
    let mut out = vec![Rat::zero(); phi];
    for (k, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        if k < phi {
            out[k] += c;
        } else if k < data.powmod.len() {
            for (j, r) in data.powmod[k].iter().enumerate() {
                if !r.is_zero() {
                    out[j] += c * &Rat::from_integer(r.clone());
                }
            }
        } else {
            // fall back to long division step: x^k = x^{k mod M} since ξ^M = 1
            let kk = k % data.m as usize;
            for (j, r) in data.powmod[kk].iter().enumerate() {
                if !r.is_zero() {
                    out[j] += c * &Rat::from_integer(r.clone());
                }
            }
        }
    }
    out
}

fn poly_deg(p: &[Rat]) -> usize {
    p.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
}

fn poly_divmod(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let db = poly_deg(b);
    let mut rem = a.to_vec();
    let da = poly_deg(&rem);
    if da < db || (db == 0 && b[0].is_zero()) {
        return (vec![Rat::zero()], rem);
    }
    let mut quot = vec![Rat::zero(); da - db + 1];
    for k in (db..=da).rev() {
        if rem[k].is_zero() {
            continue;
        }
        let c = &rem[k] / &b[db];
        quot[k - db] = c.clone();
        for i in 0..=db {
            let d = &c * &b[i];
            rem[k - db + i] -= d;
        }
    }
    rem.truncate(db.max(1));
    (quot, rem)
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); poly_deg(a) + poly_deg(b) + 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = a.to_vec();
    out.resize(a.len().max(b.len()), Rat::zero());
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    out
}

/// Returns (g, s, t) with g = gcd(a, b) = s*a + t*b.
fn poly_ext_gcd(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>, Vec<Rat>) {
    let mut r0 = a.to_vec();
    let mut r1 = b.to_vec();
    let mut s0 = vec![Rat::one()];
    let mut s1 = vec![Rat::zero()];
    let mut t0 = vec![Rat::zero()];
    let mut t1 = vec![Rat::one()];
    while !(poly_deg(&r1) == 0 && r1[0].is_zero()) {
        let (q, r) = poly_divmod(&r0, &r1);
        let new_s = poly_sub(&s0, &poly_mul(&q, &s1));
        let new_t = poly_sub(&t0, &poly_mul(&q, &t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = new_s;
        t0 = t1;
        t1 = new_t;
    }
    (r0, s0, t0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::znum::rat;

    #[test]
    fn cyclotomic_poly_values() {
        assert_eq!(cyclotomic_poly(1), vec![Int::from(-1), Int::from(1)]);
        assert_eq!(cyclotomic_poly(2), vec![Int::from(1), Int::from(1)]);
        assert_eq!(cyclotomic_poly(3), vec![Int::from(1), Int::from(1), Int::from(1)]);
        assert_eq!(cyclotomic_poly(4), vec![Int::from(1), Int::from(0), Int::from(1)]);
        assert_eq!(
            cyclotomic_poly(12),
            vec![Int::from(1), Int::from(0), Int::from(-1), Int::from(0), Int::from(1)]
        );
    }

    #[test]
    fn sum_of_cube_roots_vanishes() {
        // ξ_3 + ξ_3^2 + 1 = 0
        let z = Cyclotomic::root_of_unity(3, 1);
        let s = z.add(&z.pow(2).unwrap()).add(&Cyclotomic::one());
        assert!(s.is_zero());
    }

    #[test]
    fn inverse_of_one_minus_xi2() {
        // (1 - ξ_2)^{-2} = 1/4
        let z = Cyclotomic::root_of_unity(2, 1);
        let v = Cyclotomic::one().sub(&z);
        let inv2 = v.inv().unwrap().pow(2).unwrap();
        assert_eq!(inv2.as_rat().unwrap(), rat(1, 4));
    }

    #[test]
    fn principal_root_of_xi2() {
        // principal_root(ξ_2, 2) = ξ_4
        let z = Cyclotomic::root_of_unity(2, 1);
        let r = z.principal_root(2).unwrap();
        assert!(r.eq(&Cyclotomic::root_of_unity(4, 1)));
    }

    #[test]
    fn mixed_conductor_arithmetic() {
        // ξ_3 * ξ_4 = ξ_12^7
        let a = Cyclotomic::root_of_unity(3, 1);
        let b = Cyclotomic::root_of_unity(4, 1);
        let p = a.mul(&b);
        assert!(p.eq(&Cyclotomic::root_of_unity(12, 7)));
    }

    #[test]
    fn conjugation_involution_and_inverse() {
        let a = Cyclotomic::root_of_unity(5, 2)
            .mul_rat(&rat(3, 7))
            .add(&Cyclotomic::root_of_unity(5, 1));
        assert!(a.conj().conj().eq(&a));
        let prod = a.mul(&a.inv().unwrap());
        assert!(prod.is_one());
    }

    #[test]
    fn root_power_order() {
        let z = Cyclotomic::root_of_unity(8, 3);
        assert!(z.pow(8).unwrap().is_one());
        assert!(!z.pow(4).unwrap().is_one());
    }

    #[test]
    fn e2pi_values() {
        assert!(Cyclotomic::e2pi(&rat(1, 2)).eq(&Cyclotomic::from_i64(-1)));
        assert!(Cyclotomic::e2pi(&rat(-1, 4)).eq(&Cyclotomic::root_of_unity(4, 3)));
        assert!(Cyclotomic::e2pi(&rat(5, 1)).is_one());
    }

    #[test]
    fn text_roundtrip() {
        let a = Cyclotomic::root_of_unity(12, 5).mul_rat(&rat(-2, 3));
        let b = Cyclotomic::from_text(&a.to_text()).unwrap();
        assert!(a.eq(&b));
    }
}
