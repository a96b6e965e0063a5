//! Puiseux series in q with exact cyclotomic coefficients, eta products,
//! lattice theta functions, and the formal τ → τ + k substitution.
//!
//! A series carries a truncation order: coefficients are complete for all
//! exponents `<= trunc`, and arithmetic tracks the truncation of the result.

use crate::cyclotomic::{rat_to_f64, Cyclotomic};
use crate::enumerate::enumerate_by_norm_gram;
use crate::error::{Error, Result};
use crate::ratmat::QMat;
use crate::znum::{lcm_u64, Int, Rat};
use num::traits::{One, Signed, Zero};
use std::collections::BTreeMap;

#[derive(Clone)]
pub struct QSeries {
    trunc: Rat,
    terms: BTreeMap<Rat, Cyclotomic>,
}

impl std::fmt::Debug for QSeries {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "QSeries[<= {}](", self.trunc)?;
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c:?}) q^{e}")?;
        }
        write!(f, ")")
    }
}

impl QSeries {
    pub fn zero(trunc: Rat) -> Self {
        QSeries { trunc, terms: BTreeMap::new() }
    }

    pub fn one(trunc: Rat) -> Self {
        QSeries::monomial(Rat::zero(), Cyclotomic::one(), trunc)
    }

    pub fn monomial(exp: Rat, coeff: Cyclotomic, trunc: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if exp <= trunc && !coeff.is_zero() {
            terms.insert(exp, coeff);
        }
        QSeries { trunc, terms }
    }

    pub fn truncation(&self) -> &Rat {
        &self.trunc
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Rat, &Cyclotomic)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &Rat) -> Cyclotomic {
        self.terms.get(e).cloned().unwrap_or_else(Cyclotomic::zero)
    }

    pub fn min_exponent(&self) -> Option<Rat> {
        self.terms.keys().next().cloned()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, e: Rat, c: Cyclotomic) {
        if e > self.trunc || c.is_zero() {
            return;
        }
        let cur = self.terms.remove(&e);
        let sum = match cur {
            Some(x) => x.add(&c),
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(e, sum);
        }
    }

    pub fn retruncate(&self, trunc: Rat) -> QSeries {
        let mut out = QSeries::zero(trunc.clone());
        assert!(
            trunc <= self.trunc,
            "cannot extend a truncated series (have {}, want {})",
            self.trunc,
            trunc
        );
        for (e, c) in &self.terms {
            if e <= &trunc {
                out.terms.insert(e.clone(), c.clone());
            }
        }
        out
    }

    pub fn add(&self, other: &QSeries) -> QSeries {
        let trunc = self.trunc.clone().min(other.trunc.clone());
        let mut out = QSeries::zero(trunc);
        for (e, c) in &self.terms {
            out.insert(e.clone(), c.clone());
        }
        for (e, c) in &other.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &QSeries) -> QSeries {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> QSeries {
        QSeries {
            trunc: self.trunc.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect(),
        }
    }

    pub fn scale(&self, c: &Cyclotomic) -> QSeries {
        if c.is_zero() {
            return QSeries::zero(self.trunc.clone());
        }
        QSeries {
            trunc: self.trunc.clone(),
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x.mul(c))).collect(),
        }
    }

    pub fn scale_rat(&self, r: &Rat) -> QSeries {
        self.scale(&Cyclotomic::from_rat(r.clone()))
    }

    /// Multiply by q^r.
    pub fn shift_exp(&self, r: &Rat) -> QSeries {
        QSeries {
            trunc: self.trunc.clone() + r,
            terms: self.terms.iter().map(|(e, c)| (e.clone() + r, c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &QSeries) -> QSeries {
        // completeness: min(minA + truncB, truncA + minB); empty factors give 0
        let min_a = self.min_exponent().unwrap_or_else(|| self.trunc.clone());
        let min_b = other.min_exponent().unwrap_or_else(|| other.trunc.clone());
        let trunc =
            (min_a + &other.trunc).min(self.trunc.clone() + &min_b);
        let mut out = QSeries::zero(trunc);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea + eb;
                if e > out.trunc {
                    break;
                }
                out.insert(e, ca.mul(cb));
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> QSeries {
        if e == 0 {
            return QSeries::one(self.trunc.clone());
        }
        let mut acc = self.clone();
        for _ in 1..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Multiplicative inverse; requires a nonzero leading term.
    pub fn inverse(&self) -> Result<QSeries> {
        let e0 = self
            .min_exponent()
            .ok_or_else(|| Error::ValidationError("cannot invert the zero series".into()))?;
        let c0 = self.coeff(&e0);
        let c0_inv = c0.inv()?;
        // normalize to 1 + x with x supported on positive exponents
        let body = self.shift_exp(&(-e0.clone())).scale(&c0_inv);
        let trunc = body.truncation().clone();
        let x = body.sub(&QSeries::one(trunc.clone()));
        let mut result = QSeries::one(trunc.clone());
        if let Some(min_x) = x.min_exponent() {
            if min_x <= Rat::zero() {
                return Err(Error::InternalInconsistency(
                    "series body must start at a positive exponent".into(),
                ));
            }
            // geometric series Σ (-x)^k; x has strictly positive valuation
            let mut term = QSeries::one(trunc.clone());
            let mut k = Rat::zero();
            loop {
                term = term.mul(&x.neg());
                k += &min_x;
                if term.is_zero() || k > trunc {
                    break;
                }
                result = result.add(&term);
            }
        }
        Ok(result.scale(&c0_inv).shift_exp(&(-e0)))
    }

    /// Formal τ → τ + k: multiply the coefficient at q^e by e^{2πi e k}.
    pub fn t_transform(&self, shift: i64) -> QSeries {
        QSeries {
            trunc: self.trunc.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let phase = Cyclotomic::e2pi(&(e * Rat::from_integer(Int::from(shift))));
                    (e.clone(), c.mul(&phase))
                })
                .collect(),
        }
    }

    /// Numeric evaluation at τ (upper half plane) with an explicit geometric
    /// tail bound; fails if the bound exceeds `tol`.
    pub fn eval_at_tau(&self, tau: (f64, f64), tol: f64) -> Result<(f64, f64)> {
        let (re_t, im_t) = tau;
        assert!(im_t > 0.0, "τ must lie in the upper half plane");
        let mut sum_re = 0.0;
        let mut sum_im = 0.0;
        let mut max_abs: f64 = 1.0;
        for (e, c) in &self.terms {
            let ef = rat_to_f64(e);
            let (cr, ci) = c.to_complex();
            max_abs = max_abs.max((cr * cr + ci * ci).sqrt());
            // q^e = exp(2πi e τ)
            let ang = 2.0 * std::f64::consts::PI * ef * re_t;
            let mag = (-2.0 * std::f64::consts::PI * ef * im_t).exp();
            let qr = mag * ang.cos();
            let qi = mag * ang.sin();
            sum_re += cr * qr - ci * qi;
            sum_im += cr * qi + ci * qr;
        }
        // tail: all dropped exponents are > trunc, stepping on the grid 1/N'
        let step = 1.0
            / self
                .terms
                .keys()
                .map(|e| u64::try_from(e.denom().clone()).unwrap_or(u64::MAX))
                .fold(1u64, lcm_u64) as f64;
        let qabs = (-2.0 * std::f64::consts::PI * im_t).exp();
        let tail_start = rat_to_f64(&self.trunc) + step;
        let tail = 4.0 * max_abs * qabs.powf(tail_start) / (1.0 - qabs.powf(step));
        if !(tail.is_finite()) || tail > tol {
            return Err(Error::InsufficientTruncation(tail));
        }
        Ok((sum_re, sum_im))
    }

    /// Bit-exact text form: first line the truncation, then one line per term,
    /// `num/den : conductor:coeffs`, sorted by exponent.
    pub fn to_text(&self) -> String {
        let mut out = format!("trunc {}/{}\n", self.trunc.numer(), self.trunc.denom());
        for (e, c) in &self.terms {
            out.push_str(&format!("{}/{} : {}\n", e.numer(), e.denom(), c.to_text()));
        }
        out
    }

    pub fn from_text(s: &str) -> Result<QSeries> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::ParseError("empty series text".into()))?;
        let trunc = header
            .strip_prefix("trunc ")
            .and_then(parse_rat)
            .ok_or_else(|| Error::ParseError(format!("bad series header: {header}")))?;
        let mut out = QSeries::zero(trunc);
        for line in lines {
            let (e, c) = line
                .split_once(" : ")
                .ok_or_else(|| Error::ParseError(format!("bad series line: {line}")))?;
            let e = parse_rat(e).ok_or_else(|| Error::ParseError(format!("bad exponent: {line}")))?;
            let c = Cyclotomic::from_text(c)?;
            out.terms.insert(e, c);
        }
        Ok(out)
    }

    /// True when every stored coefficient is a rational integer.
    pub fn has_integer_coeffs(&self) -> bool {
        self.terms
            .values()
            .all(|c| c.as_rat().map(|r| r.denom().is_one()).unwrap_or(false))
    }

    /// True when every stored exponent lies in `offset + Z`.
    pub fn exponents_integral_from(&self, offset: &Rat) -> bool {
        self.terms.keys().all(|e| (e - offset).denom().is_one())
    }
}

fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: Int = n.trim().parse().ok()?;
        let d: Int = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Rat::new(n, d))
    } else {
        let n: Int = s.parse().ok()?;
        Some(Rat::from_integer(n))
    }
}

/// One factor η(tτ + u)^e of an eta product.
#[derive(Debug, Clone)]
pub struct EtaFactor {
    pub scale: Rat,
    pub offset: Rat,
    pub exponent: i64,
}

/// Finite product of eta factors.
#[derive(Debug, Clone, Default)]
pub struct EtaQuotient {
    pub factors: Vec<EtaFactor>,
}

impl EtaQuotient {
    pub fn new(factors: Vec<(Rat, i64)>) -> Self {
        EtaQuotient {
            factors: factors
                .into_iter()
                .map(|(scale, exponent)| EtaFactor { scale, offset: Rat::zero(), exponent })
                .collect(),
        }
    }

    pub fn with_offset(mut self, scale: Rat, offset: Rat, exponent: i64) -> Self {
        self.factors.push(EtaFactor { scale, offset, exponent });
        self
    }

    pub fn inverse(&self) -> EtaQuotient {
        EtaQuotient {
            factors: self
                .factors
                .iter()
                .map(|f| EtaFactor { scale: f.scale.clone(), offset: f.offset.clone(), exponent: -f.exponent })
                .collect(),
        }
    }
}

/// Expand ∏ η(tτ + u)^e to the given order,
/// η(tτ+u) = e^{2πiu/24} q^{t/24} ∏_{k≥1} (1 - e^{2πiku} q^{tk}).
pub fn eta_expand(quotient: &EtaQuotient, order: &Rat) -> QSeries {
    let mut acc = QSeries::one(order.clone());
    for f in &quotient.factors {
        assert!(f.scale.is_positive(), "eta scale must be positive");
        for _ in 0..f.exponent.unsigned_abs() {
            let one_factor = eta_single(&f.scale, &f.offset, order, f.exponent < 0);
            acc = acc.mul(&one_factor);
        }
    }
    acc
}

fn eta_single(scale: &Rat, offset: &Rat, order: &Rat, inverted: bool) -> QSeries {
    // product part ∏ (1 - e^{2πik u} q^{tk}) expanded to `order` + margin
    // (the q^{t/24} prefactor and its inverse shift the needed depth)
    let shift = scale / Rat::from_integer(Int::from(24));
    let depth = if inverted { order + &shift } else { order.clone() - &shift };
    let mut prod = QSeries::one(depth.clone().max(Rat::zero()));
    let mut k = Rat::one();
    loop {
        let e = scale * &k;
        if e > *prod.truncation() {
            break;
        }
        let phase = Cyclotomic::e2pi(&(&k * offset));
        let factor = QSeries::one(prod.truncation().clone())
            .sub(&QSeries::monomial(e.clone(), phase.clone(), prod.truncation().clone()));
        if inverted {
            // (1 - c q^e)^{-1} = Σ_j c^j q^{ej}
            let mut geo = QSeries::zero(prod.truncation().clone());
            let mut ce = Cyclotomic::one();
            let mut ee = Rat::zero();
            while ee <= *prod.truncation() {
                geo.insert(ee.clone(), ce.clone());
                ce = ce.mul(&phase);
                ee += &e;
            }
            prod = prod.mul(&geo);
        } else {
            prod = prod.mul(&factor);
        }
        k += Rat::one();
    }
    let front = Cyclotomic::e2pi(&(offset / Rat::from_integer(Int::from(24))));
    let signed_shift = if inverted { -shift } else { shift };
    let front = if inverted {
        front.inv().expect("root of unity invertible")
    } else {
        front
    };
    prod.scale(&front).shift_exp(&signed_shift)
}

/// Theta data: a positive definite rational Gram form, a rational shift, and
/// an exact phase attached to each enumerated vector.
pub struct ThetaSpec<'a> {
    pub gram: QMat,
    pub shift: Option<Vec<Rat>>,
    pub phase: Box<dyn Fn(&[Int]) -> Cyclotomic + Sync + 'a>,
}

/// Σ_v phase(v) q^{<v+shift|v+shift>/2}, complete to `order`.
pub fn theta_expand(spec: &ThetaSpec, order: &Rat) -> Result<QSeries> {
    let two = Rat::from_integer(Int::from(2));
    let bound2 = order * &two;
    let vectors = enumerate_by_norm_gram(&spec.gram, &bound2, spec.shift.as_deref())?;
    let mut out = QSeries::zero(order.clone());
    for v in vectors {
        let vr: Vec<Rat> = match &spec.shift {
            Some(s) => v
                .iter()
                .zip(s)
                .map(|(x, sh)| Rat::from_integer(x.clone()) + sh)
                .collect(),
            None => v.iter().map(|x| Rat::from_integer(x.clone())).collect(),
        };
        let norm = {
            let g = spec.gram.apply_row(&vr);
            let mut s = Rat::zero();
            for (a, b) in g.iter().zip(&vr) {
                s += a * b;
            }
            s
        };
        let e = norm / &two;
        out.insert(e, (spec.phase)(&v));
    }
    Ok(out)
}
