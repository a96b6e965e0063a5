//! Twining characters, type and anomaly checks, orbifold character assembly,
//! irreducible-module characters, modular data, and invariant-dimension
//! bounds.
//!
//! All characters are computed by direct construction on the twisted modules;
//! modular transformations are used only as numeric cross-checks.

use crate::centralizer::{centralizer_action, order_scalar, DMat};
use crate::cyclotomic::Cyclotomic;
use crate::enumerate::enumerate_by_norm_gram;
use crate::error::{Error, Result};
use crate::intmat::IMat;
use crate::lattice::{
    analyze_automorphism, joint_eigenspace_dims, GramLattice, LatticeMap,
};
use crate::lifting::{lift_power, standard_lift, Lift};
use crate::qseries::{eta_expand, EtaQuotient, QSeries};
use crate::ratmat::QMat;
use crate::twisted::{build_twisted_module, TwistedModuleData};
use crate::znum::{Int, Rat};
use num::traits::{One, Signed, Zero};
use std::collections::HashMap;
use std::sync::Mutex;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// q^{ρ_g} Π_{(a,b)} Π_{modes m} (1 - ξ_m^b q^m)^{-dim(a,b)}, where the
/// creation modes of a simultaneous eigenvector with v g = ξ_n^a v,
/// v h = ξ_m^b v lie in m ∈ (a/n) + Z_{>=0}, skipping m = 0.
pub fn heisenberg_char(g: &LatticeMap, h: &LatticeMap, order: &Rat) -> Result<QSeries> {
    let dims = joint_eigenspace_dims(g, h)?;
    let n = g.order()?;
    let m = h.order()?;
    let gdata_rho = {
        // ρ from the eigenvalue dims of g alone
        let mut rho = Rat::zero();
        for (&(a, _), &dim) in &dims {
            if a == 0 {
                continue;
            }
            let j = a as i64;
            rho += Rat::new(
                Int::from(j * (n as i64 - j) * dim as i64),
                Int::from(4 * (n * n) as i64),
            );
        }
        rho
    };
    let inner_order = order.clone() - &gdata_rho;
    let mut acc = QSeries::one(inner_order.clone());
    for (&(a, b), &dim) in &dims {
        let mode0 = Rat::new(Int::from((a % n) as i64), Int::from(n as i64));
        let phase = Cyclotomic::root_of_unity(m, b as i64);
        let mut e = mode0;
        if e.is_zero() {
            e += Rat::one();
        }
        while e <= inner_order {
            // (1 - ξ q^e)^{-dim}: geometric expansion, dim-fold
            let mut geo = QSeries::zero(inner_order.clone());
            let mut coeff = Cyclotomic::one();
            let mut ee = Rat::zero();
            while ee <= inner_order {
                geo = geo.add(&QSeries::monomial(ee.clone(), coeff.clone(), inner_order.clone()));
                coeff = coeff.mul(&phase);
                ee += &e;
            }
            for _ in 0..dim {
                acc = acc.mul(&geo);
            }
            e += Rat::one();
        }
    }
    Ok(acc.shift_exp(&gdata_rho))
}

/// Σ_{α ∈ Λ_h} q^{|π_g α|²/2} η_h(α)^{-1} ε(α, α(h-1)) B(α, α(h-1))
/// Tr(U_{α(h-1)} O_ĥ).
pub fn lattice_char(
    w: &TwistedModuleData,
    h: &Lift,
    o: &DMat,
    order: &Rat,
) -> Result<QSeries> {
    let lat = &w.lat;
    let d = lat.rank;
    let lambda_rows = &w.auto.complement_basis;
    let l = lambda_rows.len();
    if l == 0 {
        // only α = 0 contributes
        let tr = o.trace();
        return Ok(QSeries::monomial(Rat::zero(), tr, order.clone()));
    }
    let lambda = IMat::from_rows(lambda_rows.clone());
    // Λ_h: rows y with (y Λ)(1-h) π_g = 0
    let one_minus_h = IMat::identity(d).sub(&h.map.matrix);
    let proj = &w.auto.projector; // rational d×d
    let map_q = QMat::from_int(&lambda.mul(&one_minus_h)).mul(proj);
    // clear denominators and take the integer left kernel
    let mut den = Int::one();
    for r in 0..map_q.rows {
        for c in 0..map_q.cols {
            let q = map_q[(r, c)].denom().clone();
            den = num::integer::lcm(den, q);
        }
    }
    let mut int_map = IMat::zero(map_q.rows, map_q.cols);
    for r in 0..map_q.rows {
        for c in 0..map_q.cols {
            let v = &map_q[(r, c)] * Rat::from_integer(den.clone());
            int_map[(r, c)] = v.to_integer();
        }
    }
    let kernel = int_map.left_kernel();
    if kernel.is_empty() {
        let tr = o.trace();
        return Ok(QSeries::monomial(Rat::zero(), tr, order.clone()));
    }
    // sum lattice: rows of (kernel × Λ) in Z^d
    let kmat = IMat::from_rows(kernel).mul(&lambda);
    // positive definite form |π_g α|² on that sublattice
    let gq = QMat::from_int(&lat.gram);
    let pgp = proj.mul(&gq).mul(&proj.transpose());
    let kq = QMat::from_int(&kmat);
    let gram = kq.mul(&pgp).mul(&kq.transpose());
    let bound2 = order.clone() * Rat::from_integer(Int::from(2));
    let ys = enumerate_by_norm_gram(&gram, &bound2, None)?;

    let make_term = |y: &Vec<Int>| -> Result<(Rat, Cyclotomic)> {
        let alpha = kmat.apply_row(y);
        let exp = crate::lattice::half_projected_norm(lat, &w.auto, &alpha);
        let ah = h.map.apply(&alpha);
        let mut nu = ah.clone();
        for (x, v) in nu.iter_mut().zip(&alpha) {
            *x -= v;
        }
        let u = w.u_operator(&nu)?;
        let tr = o.trace_mono_mul(&u);
        if tr.is_zero() {
            return Ok((exp, Cyclotomic::zero()));
        }
        let coeff = h
            .eta(lat, &alpha)
            .inv()?
            .mul(&w.epsilon(&alpha, &nu))
            .mul(&w.b_form(&alpha, &nu)?)
            .mul(&tr);
        Ok((exp, coeff))
    };

    #[cfg(feature = "parallel")]
    let terms: Result<Vec<(Rat, Cyclotomic)>> = ys.par_iter().map(make_term).collect();
    #[cfg(not(feature = "parallel"))]
    let terms: Result<Vec<(Rat, Cyclotomic)>> = ys.iter().map(make_term).collect();

    let mut out = QSeries::zero(order.clone());
    for (e, c) in terms? {
        out = out.add(&QSeries::monomial(e, c, order.clone()));
    }
    Ok(out)
}

/// T(ĝ, ĥ; τ) = q^{-c/24} T_H T_L with a given action O_ĥ on Ω_0.
pub fn twining_with_action(
    w: &TwistedModuleData,
    h: &Lift,
    o: &DMat,
    order: &Rat,
) -> Result<QSeries> {
    let c24 = Rat::new(Int::from(w.lat.rank as i64), Int::from(24));
    let th = heisenberg_char(&w.lift.map, &h.map, &(order.clone() + &c24))?;
    let tl_order = order.clone() + &c24 - &w.rho;
    let tl = lattice_char(w, h, o, &tl_order)?;
    Ok(th.mul(&tl).shift_exp(&(-c24)))
}

/// Deterministic canonical phase: rescale O by a root of unity u with
/// (uO)^n = 1 such that the lowest-order series coefficient of the twining
/// character is a positive rational when possible (smallest index wins).
pub fn canonical_action(
    w: &TwistedModuleData,
    h: &Lift,
    h_order: u64,
    order: &Rat,
) -> Result<(DMat, QSeries)> {
    let raw = centralizer_action(w, h)?;
    let c = order_scalar(&raw, h_order)?;
    let u0 = c.inv()?.principal_root_scalar(h_order)?;
    let base = raw.scale(&u0);
    let series = twining_with_action(w, h, &base, order)?;
    if series.is_zero() {
        return Ok((base, series));
    }
    let min_e = series.min_exponent().unwrap();
    let lead = series.coeff(&min_e);
    for k in 0..h_order {
        let u = Cyclotomic::root_of_unity(h_order, k as i64);
        let cand = lead.mul(&u);
        if let Some(r) = cand.as_rat() {
            if r.is_positive() {
                return Ok((base.scale(&u), series.scale(&u)));
            }
        }
    }
    Ok((base, series))
}

/// T(ĝ, ĥ; τ) with the canonical phase; builds the twisted module on demand.
pub fn twining_character(
    lat: &GramLattice,
    g: &Lift,
    h: &Lift,
    order: &Rat,
) -> Result<QSeries> {
    let w = build_twisted_module(lat, g)?;
    let h_order = lcm_lift_order(lat, h)?;
    let (_, series) = canonical_action(&w, h, h_order, order)?;
    Ok(series)
}

fn lcm_lift_order(lat: &GramLattice, h: &Lift) -> Result<u64> {
    // order of the lift as an operator: lattice order times a possible phase
    let n = h.map.order()?;
    for mult in 1..=2u64 {
        let p = lift_power(lat, h, (n * mult) as i64)?;
        if crate::lifting::is_identity_lift(lat, &p) {
            return Ok(n * mult);
        }
    }
    Err(Error::OrderDoubled("lift order exceeds twice the map order".into()))
}

/// Untwisted character by the closed form θ_{L_h}(τ) / Π_t η(tτ)^{b_t};
/// `theta` overrides the enumeration of the fixed lattice.
pub fn untwisted_character_closed(
    lat: &GramLattice,
    h: &LatticeMap,
    order: &Rat,
    theta: Option<&QSeries>,
) -> Result<QSeries> {
    let data = analyze_automorphism(lat, h)?;
    let eta_q = EtaQuotient::new(
        data.cycle_type
            .iter()
            .map(|(&t, &b)| (Rat::from_integer(Int::from(t as i64)), b))
            .collect(),
    );
    // θ-part completeness must survive division by the eta product, whose
    // leading exponent is Σ t b_t / 24 = d/24
    let c24 = Rat::new(Int::from(lat.rank as i64), Int::from(24));
    let theta_order = order.clone() + &c24;
    let theta_series = match theta {
        Some(s) => s.clone(),
        None => {
            let rows = IMat::from_rows(data.fixed_basis.clone());
            let fixed_gram = rows.mul(&lat.gram).mul(&rows.transpose());
            let spec = crate::qseries::ThetaSpec {
                gram: QMat::from_int(&fixed_gram),
                shift: None,
                phase: Box::new(|_| Cyclotomic::one()),
            };
            crate::qseries::theta_expand(&spec, &theta_order)?
        }
    };
    let eta_series = eta_expand(&eta_q.inverse(), &theta_order);
    Ok(theta_series.mul(&eta_series).retruncate_to(order))
}

impl QSeries {
    fn retruncate_to(&self, order: &Rat) -> QSeries {
        if self.truncation() > order {
            self.retruncate(order.clone())
        } else {
            self.clone()
        }
    }
}

/// Type r = N² ρ_g mod N of a cyclic sector, from the cycle data alone.
pub fn sector_type(lat: &GramLattice, g: &LatticeMap) -> Result<u64> {
    let data = analyze_automorphism(lat, g)?;
    let n = data.order;
    let r = data.conformal_weight() * Rat::from_integer(Int::from((n * n) as i64));
    if !r.denom().is_one() {
        return Err(Error::InternalInconsistency(
            "N² ρ is not an integer".into(),
        ));
    }
    let n_int = Int::from(n as i64);
    let rr = ((r.to_integer() % &n_int) + &n_int) % &n_int;
    Ok(u64::try_from(rr).unwrap())
}

pub fn type_of(w: &TwistedModuleData) -> Result<u64> {
    let n = w.auto.order;
    let r = w.rho.clone() * Rat::from_integer(Int::from((n * n) as i64));
    if !r.denom().is_one() {
        return Err(Error::InternalInconsistency("N² ρ is not an integer".into()));
    }
    let n_int = Int::from(n as i64);
    let rr = ((r.to_integer() % &n_int) + &n_int) % &n_int;
    Ok(u64::try_from(rr).unwrap())
}

/// Anomaly verdicts for the supported group shapes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnomalyVerdict {
    Trivial,
    Anomalous,
    Undecided,
}

#[derive(Debug, Clone)]
pub struct AnomalyReport {
    pub verdict: AnomalyVerdict,
    /// per cyclic subgroup: (label, type r, subgroup order)
    pub subgroup_types: Vec<(String, u64, u64)>,
}

/// Group shapes accepted by the anomaly check.
pub enum GroupShape<'a> {
    Cyclic { g: &'a LatticeMap },
    /// relations a^q = A^p = 1, A a A^{-1} = a^φ
    Semidirect { a: &'a LatticeMap, big_a: &'a LatticeMap, q: u64, p: u64, phi: i64 },
    Product { a: &'a LatticeMap, big_a: &'a LatticeMap, p: u64 },
    Other { generators: Vec<&'a LatticeMap> },
}

fn is_squarefree(mut q: u64) -> bool {
    let mut p = 2;
    while p * p <= q {
        if q % (p * p) == 0 {
            return false;
        }
        if q % p == 0 {
            q /= p;
        }
        p += 1;
    }
    true
}

pub fn anomaly_check(lat: &GramLattice, shape: &GroupShape) -> Result<AnomalyReport> {
    let mut subgroup_types = Vec::new();
    let mut push = |label: String, g: &LatticeMap| -> Result<u64> {
        let r = sector_type(lat, g)?;
        let n = g.order()?;
        subgroup_types.push((label, r, n));
        Ok(r)
    };
    let verdict = match shape {
        GroupShape::Cyclic { g } => {
            let r = push("generator".into(), g)?;
            if r == 0 {
                AnomalyVerdict::Trivial
            } else {
                AnomalyVerdict::Anomalous
            }
        }
        GroupShape::Semidirect { a, big_a, q, p: _, phi } => {
            if !is_squarefree(*q) {
                // fall back to a per-subgroup report
                let _ = push("Z_p part".into(), big_a)?;
                let _ = push("Z_q part".into(), a)?;
                AnomalyVerdict::Undecided
            } else {
                let rp = push("Z_p part".into(), big_a)?;
                // r = gcd(φ² - 1, q) subgroup of Z_q
                let r_sub = num::integer::gcd((phi * phi - 1).unsigned_abs(), *q);
                let r_sub = if r_sub == 0 { *q } else { r_sub };
                let gen_r = a.pow(q / r_sub);
                let rr = if r_sub == 1 { 0 } else { push(format!("Z_{r_sub} part"), &gen_r)? };
                if rp == 0 && rr == 0 {
                    AnomalyVerdict::Trivial
                } else {
                    AnomalyVerdict::Anomalous
                }
            }
        }
        GroupShape::Product { a, big_a, p: _ } => {
            let r1 = push("<a>".into(), a)?;
            let r2 = push("<A>".into(), big_a)?;
            let prod = a.then(big_a);
            let r3 = push("<aA>".into(), &prod)?;
            if r1 == 0 && r2 == 0 && r3 == 0 {
                AnomalyVerdict::Trivial
            } else {
                AnomalyVerdict::Anomalous
            }
        }
        GroupShape::Other { generators } => {
            for (i, g) in generators.iter().enumerate() {
                push(format!("<gen{i}>"), g)?;
            }
            AnomalyVerdict::Undecided
        }
    };
    Ok(AnomalyReport { verdict, subgroup_types })
}

/// Append-only cache of twining characters; inserts of identical keys must
/// agree.
#[derive(Default)]
pub struct CharacterCache {
    map: Mutex<HashMap<String, QSeries>>,
}

impl CharacterCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn key(
        lat: &GramLattice,
        g: &Lift,
        h: &Lift,
        order: &Rat,
    ) -> String {
        let mut s = String::new();
        for i in 0..lat.rank {
            for j in 0..lat.rank {
                s.push_str(&format!("{},", lat.gram[(i, j)]));
            }
        }
        s.push('|');
        for m in [&g.map.matrix, &h.map.matrix] {
            for i in 0..m.rows {
                for j in 0..m.cols {
                    s.push_str(&format!("{},", m[(i, j)]));
                }
            }
            s.push('|');
        }
        s.push_str(&g.phase_fingerprint());
        s.push('|');
        s.push_str(&h.phase_fingerprint());
        s.push_str(&format!("|{}/{}", order.numer(), order.denom()));
        s
    }

    pub fn get(&self, key: &str) -> Option<QSeries> {
        self.map.lock().unwrap().get(key).cloned()
    }

    pub fn insert(&self, key: String, value: QSeries) {
        let mut m = self.map.lock().unwrap();
        if let Some(prev) = m.get(&key) {
            // last-writer-wins is fine only when the values agree
            assert!(
                prev.to_text() == value.to_text(),
                "cache collision with differing values"
            );
        }
        m.insert(key, value);
    }
}

/// T(ĝ^i, ĝ^j) series for j = 0..n-1 computed with a fixed base action;
/// rescaling the action by u multiplies the j-th series by u^j.
fn sector_series(
    w: &TwistedModuleData,
    gen_lift: &Lift,
    base_action: &DMat,
    n: u64,
    order: &Rat,
) -> Result<Vec<QSeries>> {
    let mut out = Vec::with_capacity(n as usize);
    for j in 0..n {
        let hj = lift_power(&w.lat, gen_lift, j as i64)?;
        let oj = base_action.pow(j);
        out.push(twining_with_action(w, &hj, &oj, order)?);
    }
    Ok(out)
}

/// (1/n) Σ_j u^j T_j.
fn invariant_from_series(series: &[QSeries], u: &Cyclotomic, n: u64, order: &Rat) -> QSeries {
    let mut sum = QSeries::zero(order.clone());
    let mut uj = Cyclotomic::one();
    for t in series {
        sum = sum.add(&t.scale(&uj));
        uj = uj.mul(u);
    }
    sum.scale_rat(&Rat::new(Int::one(), Int::from(n as i64)))
}

/// Candidate phases for the sector W_{ĝ^i} inside the Z_n line: u with
/// (uO)^n = 1, the monodromy constraint (uO)^i = e^{2πi ρ} on Ω_0, and an
/// integrally graded (or vanishing) invariant projection.
fn level_match_candidates(
    w: &TwistedModuleData,
    base_action: &DMat,
    sector_power: u64,
    series: &[QSeries],
    n: u64,
    order: &Rat,
) -> Result<(Vec<Cyclotomic>, Vec<Cyclotomic>)> {
    let c24 = Rat::new(Int::from(w.lat.rank as i64), Int::from(24));
    let offset = -c24;
    let oi = base_action
        .pow(sector_power)
        .as_scalar()
        .ok_or_else(|| Error::InternalInconsistency("O^i is not scalar on Ω_0".into()))?;
    let target = Cyclotomic::e2pi(&w.rho).div(&oi)?;
    let mut winners = Vec::new();
    let mut zeros = Vec::new();
    for k in 0..n {
        let u = Cyclotomic::root_of_unity(n, k as i64);
        if !u.pow((sector_power % n) as i64)?.eq(&target) {
            continue;
        }
        let inv = invariant_from_series(series, &u, n, order);
        if inv.is_zero() {
            zeros.push(u);
            continue;
        }
        if inv.exponents_integral_from(&offset) {
            winners.push(u);
        }
    }
    Ok((winners, zeros))
}

/// All character data of one cyclic line ⟨z⟩: canonical T(ẑ^i, ẑ^j) series.
pub struct CyclicLine {
    pub n: u64,
    pub base: Lift,
    /// rows[i][j] = T(ẑ^i, ẑ^j), i = 0..n-1, j = 0..n-1
    pub rows: Vec<Vec<QSeries>>,
}

/// Build the whole line with canonical phases. Sector phases are constrained
/// by the ground-space monodromy (uO)^i = e^{2πi ρ} and integral level
/// matching; any residual ambiguity (possible when gcd(i, n) > 1) is resolved
/// jointly by numeric S-covariance of the module characters with the ω = 1
/// cyclic S-matrix at τ = i.
pub fn cyclic_line(lat: &GramLattice, z: &LatticeMap, order: &Rat) -> Result<CyclicLine> {
    cyclic_line_with_theta(lat, z, order, None)
}

/// [`cyclic_line`] with an externally supplied full-lattice theta series for
/// the untwisted vacuum term (large ranks where enumeration is infeasible).
pub fn cyclic_line_with_theta(
    lat: &GramLattice,
    z: &LatticeMap,
    order: &Rat,
    full_theta: Option<&QSeries>,
) -> Result<CyclicLine> {
    let n = z.order()?;
    let base = standard_lift(lat, z)?;
    if base.doubled {
        return Err(Error::OrderDoubled("cyclic line generator".into()));
    }
    // untwisted row
    let mut base_rows: Vec<Vec<QSeries>> = Vec::with_capacity(n as usize);
    {
        let w = build_twisted_module(lat, &Lift::identity(lat.rank))?;
        let mut row = Vec::with_capacity(n as usize);
        for j in 0..n {
            if j == 0 {
                if let Some(theta) = full_theta {
                    row.push(untwisted_character_closed(
                        lat,
                        &LatticeMap::identity(lat.rank),
                        order,
                        Some(theta),
                    )?);
                    continue;
                }
            }
            let hj = lift_power(lat, &base.lift, j as i64)?;
            row.push(twining_with_action(&w, &hj, &DMat::identity(1), order)?);
        }
        base_rows.push(row);
    }
    let mut candidates: Vec<Vec<Cyclotomic>> = vec![vec![Cyclotomic::one()]];
    for i in 1..n {
        let gi = lift_power(lat, &base.lift, i as i64)?;
        let gi_data = analyze_automorphism(lat, &gi.map)?;
        for r in &gi_data.fixed_basis {
            if !gi.eta(lat, r).is_one() {
                return Err(Error::OrderDoubled(format!("power {i} not standard")));
            }
        }
        let w = build_twisted_module(lat, &gi)?;
        let raw = centralizer_action(&w, &base.lift)?;
        let c = order_scalar(&raw, n)?;
        let u0 = c.inv()?.principal_root_scalar(n)?;
        let base_action = raw.scale(&u0);
        let series = sector_series(&w, &base.lift, &base_action, n, order)?;
        let (winners, zeros) = level_match_candidates(&w, &base_action, i, &series, n, order)?;
        let cands = if !winners.is_empty() {
            winners
        } else if !zeros.is_empty() {
            vec![zeros.into_iter().next().unwrap()]
        } else {
            return Err(Error::AnomalousOrbifold(
                "no integrally graded invariant sector (level matching fails)".into(),
            ));
        };
        candidates.push(cands);
        base_rows.push(series);
    }
    let combos: usize = candidates.iter().map(|c| c.len()).product();
    if combos > 64 {
        return Err(Error::InternalInconsistency("too many phase combinations".into()));
    }
    let build_rows = |choice: &[usize]| -> Vec<Vec<QSeries>> {
        let mut rows = Vec::with_capacity(n as usize);
        for (i, row) in base_rows.iter().enumerate() {
            let u = &candidates[i][choice[i]];
            let mut uj = Cyclotomic::one();
            let mut out = Vec::with_capacity(n as usize);
            for t in row {
                out.push(t.scale(&uj));
                uj = uj.mul(u);
            }
            rows.push(out);
        }
        rows
    };
    let first_choice = vec![0usize; n as usize];
    if combos == 1 {
        return Ok(CyclicLine { n, base: base.lift, rows: build_rows(&first_choice) });
    }
    // joint numeric S-covariance selection over the ambiguous phases
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut second = f64::INFINITY;
    let mut choice = first_choice.clone();
    loop {
        let rows = build_rows(&choice);
        let res = s_covariance_residual(&rows, n, lat.rank)?;
        match &mut best {
            Some((b, _)) if res < *b => {
                second = *b;
                best = Some((res, choice.clone()));
            }
            Some((b, _)) => {
                if res < second {
                    second = res;
                }
                let _ = b;
            }
            None => best = Some((res, choice.clone())),
        }
        // increment the mixed-radix choice vector
        let mut pos = 0usize;
        loop {
            if pos == choice.len() {
                let (bres, bchoice) = best.unwrap();
                if !(bres < 0.2 && second > 20.0 * bres.max(1e-9)) {
                    return Err(Error::InternalInconsistency(format!(
                        "S-covariance phase selection inconclusive ({bres:.3e} vs {second:.3e})"
                    )));
                }
                return Ok(CyclicLine { n, base: base.lift, rows: build_rows(&bchoice) });
            }
            choice[pos] += 1;
            if choice[pos] < candidates[pos].len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Numeric residual of χ_{[i,l]}(-1/τ) = Σ S χ_{[i',l']}(τ) at τ = i with the
/// ω = 1 cyclic S-matrix S = (1/n) ξ_n^{-(l i' + l' i)}.
fn s_covariance_residual(rows: &[Vec<QSeries>], n: u64, _rank: usize) -> Result<f64> {
    let tau = (0.0f64, 1.0f64);
    // module characters χ_{[i,l]}(τ) numerically
    let mut chi = vec![vec![(0.0f64, 0.0f64); n as usize]; n as usize];
    for i in 0..n as usize {
        for l in 0..n as usize {
            let mut sr = 0.0;
            let mut si = 0.0;
            for (j, t) in rows[i].iter().enumerate() {
                let (re, im) = t.eval_at_tau(tau, 0.05)?;
                let ang = -2.0 * std::f64::consts::PI * (l * j) as f64 / n as f64;
                let (cs, sn) = (ang.cos(), ang.sin());
                sr += re * cs - im * sn;
                si += re * sn + im * cs;
            }
            chi[i][l] = (sr / n as f64, si / n as f64);
        }
    }
    // -1/τ at τ = i is τ again; covariance ties the value to the S-sum
    let mut res = 0.0f64;
    for i in 0..n as usize {
        for l in 0..n as usize {
            let mut rr = 0.0;
            let mut ri = 0.0;
            for ip in 0..n as usize {
                for lp in 0..n as usize {
                    let ang = -2.0 * std::f64::consts::PI * ((l * ip + lp * i) % n as usize) as f64
                        / n as f64;
                    let (cs, sn) = (ang.cos(), ang.sin());
                    let (xr, xi) = chi[ip][lp];
                    rr += (xr * cs - xi * sn) / n as f64;
                    ri += (xr * sn + xi * cs) / n as f64;
                }
            }
            let (lr, li) = chi[i][l];
            res += ((lr - rr).powi(2) + (li - ri).powi(2)).sqrt();
        }
    }
    Ok(res)
}

/// χ^{orb(Z_n)} = (1/n) Σ_{i,j} T(ĝ^i, ĝ^j), all sectors by direct
/// construction with level-matched phases. Requires type 0.
pub fn cyclic_orbifold_char(
    lat: &GramLattice,
    g: &LatticeMap,
    order: &Rat,
) -> Result<QSeries> {
    cyclic_orbifold_char_with_theta(lat, g, order, None)
}

pub fn cyclic_orbifold_char_with_theta(
    lat: &GramLattice,
    g: &LatticeMap,
    order: &Rat,
    full_theta: Option<&QSeries>,
) -> Result<QSeries> {
    let r = sector_type(lat, g)?;
    if r != 0 {
        return Err(Error::AnomalousOrbifold(format!("type r = {r} != 0")));
    }
    let line = cyclic_line_with_theta(lat, g, order, full_theta)?;
    let n = line.n;
    let c24 = Rat::new(Int::from(lat.rank as i64), Int::from(24));
    let mut total = QSeries::zero(order.clone());
    for (i, row) in line.rows.iter().enumerate() {
        let mut sum = QSeries::zero(order.clone());
        for t in row {
            sum = sum.add(t);
        }
        let inv = sum.scale_rat(&Rat::new(Int::one(), Int::from(n as i64)));
        if i == 0 && !inv.exponents_integral_from(&(-c24.clone())) {
            return Err(Error::InternalInconsistency(
                "untwisted invariant sector not integrally graded".into(),
            ));
        }
        total = total.add(&inv);
    }
    if !total.has_integer_coeffs() {
        return Err(Error::InternalInconsistency(
            "orbifold character has non-integer coefficients".into(),
        ));
    }
    Ok(total)
}

/// A small finite group of lattice maps closed under composition.
#[derive(Debug, Clone)]
pub struct FiniteGroup {
    pub elems: Vec<LatticeMap>,
    pub names: Vec<String>,
    /// mult[i][j] = index of the element acting as "first j, then i"
    pub mult: Vec<Vec<usize>>,
    pub inv: Vec<usize>,
}

impl FiniteGroup {
    /// Closure of named generators; errors if the group exceeds `cap`.
    pub fn generate(gens: &[(String, LatticeMap)], cap: usize) -> Result<FiniteGroup> {
        let rank = gens
            .first()
            .map(|(_, g)| g.matrix.rows)
            .ok_or_else(|| Error::ValidationError("no generators".into()))?;
        let mut elems = vec![LatticeMap::identity(rank)];
        let mut names = vec!["e".to_string()];
        let mut frontier = vec![0usize];
        while let Some(i) = frontier.pop() {
            for (gname, g) in gens {
                // new element: apply elems[i] first, then g
                let cand = elems[i].then(g);
                if !elems.iter().any(|e| e.matrix == cand.matrix) {
                    if elems.len() >= cap {
                        return Err(Error::ValidationError("group closure exceeds cap".into()));
                    }
                    let base = if names[i] == "e" { String::new() } else { names[i].clone() };
                    elems.push(cand);
                    names.push(format!("{gname}{base}"));
                    frontier.push(elems.len() - 1);
                }
            }
        }
        let n = elems.len();
        let mut mult = vec![vec![0usize; n]; n];
        for i in 0..n {
            for j in 0..n {
                let prod = elems[j].then(&elems[i]);
                let k = elems
                    .iter()
                    .position(|e| e.matrix == prod.matrix)
                    .ok_or_else(|| Error::InternalInconsistency("group not closed".into()))?;
                mult[i][j] = k;
            }
        }
        let mut inv = vec![0usize; n];
        for i in 0..n {
            inv[i] = (0..n)
                .find(|&j| mult[i][j] == 0)
                .ok_or_else(|| Error::InternalInconsistency("missing inverse".into()))?;
        }
        Ok(FiniteGroup { elems, names, mult, inv })
    }

    pub fn order(&self) -> usize {
        self.elems.len()
    }

    pub fn conjugate(&self, x: usize, by: usize) -> usize {
        // by^{-1} · x · by? conjugacy convention: k x k^{-1}
        self.mult[self.mult[by][x]][self.inv[by]]
    }

    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let n = self.order();
        let mut seen = vec![false; n];
        let mut classes = Vec::new();
        for x in 0..n {
            if seen[x] {
                continue;
            }
            let mut class = Vec::new();
            for k in 0..n {
                let y = self.conjugate(x, k);
                if !seen[y] {
                    seen[y] = true;
                    class.push(y);
                }
            }
            class.sort_unstable();
            classes.push(class);
        }
        classes
    }

    pub fn centralizer(&self, x: usize) -> Vec<usize> {
        (0..self.order())
            .filter(|&h| self.mult[h][x] == self.mult[x][h])
            .collect()
    }

    pub fn element_order(&self, x: usize) -> u64 {
        let mut k = x;
        let mut n = 1u64;
        while k != 0 {
            k = self.mult[k][x];
            n += 1;
        }
        n
    }

    /// Is the pair (x, y) contained in a common cyclic subgroup?
    pub fn cyclic_coembedding(&self, x: usize, y: usize) -> Option<(usize, u64, u64)> {
        for z in 0..self.order() {
            let n = self.element_order(z);
            let mut powers = Vec::with_capacity(n as usize);
            let mut cur = 0usize;
            for _ in 0..n {
                powers.push(cur);
                cur = self.mult[cur][z];
            }
            let px = powers.iter().position(|&p| p == x);
            let py = powers.iter().position(|&p| p == y);
            if let (Some(a), Some(b)) = (px, py) {
                return Some((z, a as u64, b as u64));
            }
        }
        None
    }
}

/// Polar-plus-constant rendering of an assembled character.
pub fn summary_line(series: &QSeries) -> String {
    let mut parts = Vec::new();
    let mut next_exp: Option<Rat> = None;
    for (e, c) in series.terms() {
        if e >= &Rat::one() {
            next_exp = Some(e.clone());
            break;
        }
        let coeff = c
            .as_rat()
            .map(|r| r.to_string())
            .unwrap_or_else(|| format!("({c:?})"));
        if e.is_zero() {
            parts.push(coeff);
        } else if e.denom().is_one() {
            parts.push(format!("{coeff}q^{}", e.numer()));
        } else {
            parts.push(format!("{coeff}q^({e})"));
        }
    }
    let tail = match next_exp {
        Some(e) if e.denom().is_one() && e.numer().is_one() => " + O(q)".to_string(),
        Some(e) => format!(" + O(q^({e}))"),
        None => String::new(),
    };
    let head = if parts.is_empty() { "0".to_string() } else { parts.join(" + ") };
    format!("{head}{tail}")
        .replace("1q^", "q^")
        .replace("+ -", "- ")
}

/// Assembled orbifold character with its provenance.
#[derive(Debug, Clone)]
pub struct OrbifoldReport {
    pub group: String,
    /// (subgroup label, type r, order)
    pub class_types: Vec<(String, u64, u64)>,
    pub anomaly: AnomalyVerdict,
    pub character: QSeries,
    pub summary: String,
}

/// χ^{orb} for Z_q ⋊_φ Z_p via the closed combination of cyclic orbifold
/// characters: χ^{orb(Z_p)} - (1/r)(χ^{orb(Z_{p/r})} - χ^{orb(Z_{pq/r})}).
#[allow(clippy::too_many_arguments)]
pub fn effcyc_orbifold_char(
    lat: &GramLattice,
    a: &LatticeMap,
    big_a: &LatticeMap,
    q: u64,
    p: u64,
    phi: i64,
    order: &Rat,
) -> Result<OrbifoldReport> {
    effcyc_orbifold_char_with_theta(lat, a, big_a, q, p, phi, order, None)
}

#[allow(clippy::too_many_arguments)]
pub fn effcyc_orbifold_char_with_theta(
    lat: &GramLattice,
    a: &LatticeMap,
    big_a: &LatticeMap,
    q: u64,
    p: u64,
    phi: i64,
    order: &Rat,
    full_theta: Option<&QSeries>,
) -> Result<OrbifoldReport> {
    // relations
    if !a.pow(q).is_identity() || !big_a.pow(p).is_identity() {
        return Err(Error::ValidationError("generator orders do not match (q, p)".into()));
    }
    let conj = big_a
        .matrix
        .inverse_unimodular()?
        .mul(&a.matrix)
        .mul(&big_a.matrix);
    let phi_pos = phi.rem_euclid(q as i64) as u64;
    if conj != a.pow(phi_pos).matrix {
        return Err(Error::ValidationError("A a A^{-1} != a^phi".into()));
    }
    // splitting lift must exist (existence is all the closed formula needs)
    let _ = crate::lifting::split_lift_semidirect(lat, big_a, a, phi, q, p)?;
    let shape = GroupShape::Semidirect { a, big_a, q, p, phi };
    let report = anomaly_check(lat, &shape)?;
    if report.verdict != AnomalyVerdict::Trivial {
        return Err(Error::AnomalousOrbifold(format!(
            "subgroup types {:?}",
            report.subgroup_types
        )));
    }
    // r: smallest divisor of p with φ^r ≡ 1 mod q
    let mut r = p;
    for d in crate::znum::divisors(p) {
        let mut acc = 1i64;
        for _ in 0..d {
            acc = (acc * phi).rem_euclid(q as i64);
        }
        if acc == 1 % q as i64 {
            r = d;
            break;
        }
    }
    let chi_p = cyclic_orbifold_char_with_theta(lat, big_a, order, full_theta)?;
    let b = big_a.pow(r);
    let chi_pr = cyclic_orbifold_char_with_theta(lat, &b, order, full_theta)?;
    let ab = a.then(&b);
    let chi_pqr = cyclic_orbifold_char_with_theta(lat, &ab, order, full_theta)?;
    let rr = Rat::new(Int::one(), Int::from(r as i64));
    let character = chi_p.sub(&chi_pr.sub(&chi_pqr).scale_rat(&rr));
    if !character.has_integer_coeffs() {
        return Err(Error::InternalInconsistency(
            "orbifold character has non-integer coefficients".into(),
        ));
    }
    let summary = summary_line(&character);
    Ok(OrbifoldReport {
        group: format!("Z{q} x|_{phi} Z{p}"),
        class_types: report.subgroup_types,
        anomaly: AnomalyVerdict::Trivial,
        character,
        summary,
    })
}

/// General orbifold character Σ_classes (1/|C_g|) Σ_{h ∈ C_g} T(ĝ, ĥ):
/// pairs embedded in a cyclic subgroup are taken from that cyclic computation;
/// an orbit that never meets the untwisted sector and has strictly positive
/// conformal weights contributes zero.
pub fn general_orbifold_char(
    lat: &GramLattice,
    gens: &[(String, LatticeMap)],
    order: &Rat,
) -> Result<OrbifoldReport> {
    let group = FiniteGroup::generate(gens, 4096)?;
    // anomaly gate: every cyclic subgroup must have type 0
    let mut class_types = Vec::new();
    for z in 0..group.order() {
        if z == 0 {
            continue;
        }
        let r = sector_type(lat, &group.elems[z])?;
        class_types.push((group.names[z].clone(), r, group.element_order(z)));
        if r != 0 {
            return Err(Error::AnomalousOrbifold(format!(
                "cyclic subgroup <{}> has type {r}",
                group.names[z]
            )));
        }
    }
    // per-line invariants via the cyclic machinery; cache by line generator
    let mut line_cache: HashMap<usize, QSeries> = HashMap::new();
    let classes = group.conjugacy_classes();
    let mut total = QSeries::zero(order.clone());
    for class in &classes {
        let k = class[0];
        let cent = group.centralizer(k);
        let csize = cent.len();
        let mut class_sum = QSeries::zero(order.clone());
        for &h in &cent {
            match group.cyclic_coembedding(k, h) {
                Some((z, zi, zj)) => {
                    // T(k̂, ĥ) from the cyclic line of z
                    let series = cyclic_pair_character(
                        lat,
                        &group.elems[z],
                        group.element_order(z),
                        zi,
                        zj,
                        order,
                        &mut line_cache,
                        z,
                    )?;
                    class_sum = class_sum.add(&series);
                }
                None => {
                    // vanishing-orbit shortcut: requires a strictly positive
                    // conformal weight everywhere on the orbit away from the
                    // untwisted sector
                    let rho = analyze_automorphism(lat, &group.elems[k])?.conformal_weight();
                    if !rho.is_positive() {
                        return Err(Error::InternalInconsistency(
                            "orbit term with non-positive weight cannot be dropped".into(),
                        ));
                    }
                    // contributes zero
                }
            }
        }
        let inv = class_sum.scale_rat(&Rat::new(Int::one(), Int::from(csize as i64)));
        // weight by class size / ... : Σ over classes of W_k^{C_k}; the class
        // rep accounts for the whole class
        total = total.add(&inv);
    }
    if !total.has_integer_coeffs() {
        return Err(Error::InternalInconsistency(
            "orbifold character has non-integer coefficients".into(),
        ));
    }
    let summary = summary_line(&total);
    Ok(OrbifoldReport {
        group: format!("order-{} group", group.order()),
        class_types,
        anomaly: AnomalyVerdict::Trivial,
        character: total,
        summary,
    })
}

/// T(ẑ^i, ẑ^j) with the level-matched phases of the cyclic line of z.
#[allow(clippy::too_many_arguments)]
fn cyclic_pair_character(
    lat: &GramLattice,
    z: &LatticeMap,
    n: u64,
    i: u64,
    j: u64,
    order: &Rat,
    pair_cache: &mut HashMap<usize, QSeries>,
    cache_tag: usize,
) -> Result<QSeries> {
    let key = cache_tag * 1_000_000 + (i as usize) * 1000 + j as usize;
    if let Some(s) = pair_cache.get(&key) {
        return Ok(s.clone());
    }
    let line = cyclic_line(lat, z, order)?;
    for (ii, row) in line.rows.iter().enumerate() {
        for (jj, t) in row.iter().enumerate() {
            let kk = cache_tag * 1_000_000 + ii * 1000 + jj;
            pair_cache.insert(kk, t.clone());
        }
    }
    let _ = n;
    Ok(line.rows[i as usize][j as usize].clone())
}


/// One sector of the module-character decomposition: a twisted module, lifts
/// of the centralizer elements, and their ground-space actions with phases
/// consistent with a declared 2-cocycle pattern.
pub struct SectorActions {
    pub module: TwistedModuleData,
    /// lifts of the centralizer elements, identity first
    pub lifts: Vec<Lift>,
    /// O_ĥ aligned with `lifts`
    pub actions: Vec<DMat>,
}

impl SectorActions {
    /// Actions of the powers of a cyclic centralizer generator, normalized so
    /// that c(a^k, a^l) follows the type-r pattern
    /// c(a^k,a^l) = ξ_{N²}^{r (k+l-<k+l>_N)}, i.e. O^N = ξ_N^r.
    pub fn cyclic_sector(
        lat: &GramLattice,
        g_lift: &Lift,
        order_n: u64,
        r: u64,
        depth: &Rat,
    ) -> Result<SectorActions> {
        let module = build_twisted_module(lat, g_lift)?;
        let raw = centralizer_action(&module, g_lift)?;
        let c = order_scalar(&raw, order_n)?;
        let target = Cyclotomic::root_of_unity(order_n, r as i64);
        let u = target.div(&c)?.principal_root(order_n)?;
        let o = raw.scale(&u);
        // verify the pattern
        let on = order_scalar(&o, order_n)?;
        if !on.eq(&target) {
            return Err(Error::InternalInconsistency("cocycle pattern normalization failed".into()));
        }
        let mut lifts = Vec::with_capacity(order_n as usize);
        let mut actions = Vec::with_capacity(order_n as usize);
        for k in 0..order_n {
            lifts.push(lift_power(lat, g_lift, k as i64)?);
            actions.push(o.pow(k));
        }
        let _ = depth;
        Ok(SectorActions { module, lifts, actions })
    }

    /// The untwisted sector with honest lift actions (d = 1).
    pub fn untwisted_sector(lat: &GramLattice, lifts: Vec<Lift>) -> Result<SectorActions> {
        let module = build_twisted_module(lat, &Lift::identity(lat.rank))?;
        let actions = vec![DMat::identity(1); lifts.len()];
        Ok(SectorActions { module, lifts, actions })
    }

    /// The extracted cocycle values c(h_i, h_j) relative to a multiplication
    /// table on the centralizer: mult[i][j] = index of h_i h_j.
    pub fn extract_cocycle(&self, mult: &[Vec<usize>]) -> Result<Vec<Vec<Cyclotomic>>> {
        let n = self.actions.len();
        let mut out = vec![vec![Cyclotomic::one(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let prod = self.actions[i].mul(&self.actions[j]);
                let k = mult[i][j];
                out[i][j] = crate::centralizer::cocycle_value(
                    &DMat::identity(self.actions[k].dim),
                    &prod,
                    &self.actions[k],
                )?;
            }
        }
        Ok(out)
    }

    /// χ_{[g,χ]} = (1/|C_g|) Σ_h conj(χ(h)) T(ĝ, ĥ) for each character row.
    pub fn module_characters(
        &self,
        table: &[Vec<Cyclotomic>],
        order: &Rat,
    ) -> Result<Vec<QSeries>> {
        let csize = self.lifts.len();
        let mut t_series = Vec::with_capacity(csize);
        for (h, o) in self.lifts.iter().zip(&self.actions) {
            t_series.push(twining_with_action(&self.module, h, o, order)?);
        }
        let inv_csize = Rat::new(Int::one(), Int::from(csize as i64));
        let mut out = Vec::with_capacity(table.len());
        for chi in table {
            assert_eq!(chi.len(), csize, "character row length mismatch");
            let mut sum = QSeries::zero(order.clone());
            for (v, t) in chi.iter().zip(&t_series) {
                sum = sum.add(&t.scale(&v.conj()));
            }
            out.push(sum.scale_rat(&inv_csize));
        }
        Ok(out)
    }
}

/// Projective characters of Z_N with the type-r pattern cocycle:
/// χ_l(a^k) = e^{2πi (r k / N + l k)/N}.
pub fn cyclic_projective_characters(n: u64, r: u64) -> Vec<Vec<Cyclotomic>> {
    (0..n)
        .map(|l| {
            (0..n)
                .map(|k| {
                    Cyclotomic::root_of_unity(n * n, (r * k) as i64)
                        .mul(&Cyclotomic::root_of_unity(n, (l * k) as i64))
                })
                .collect()
        })
        .collect()
}

/// Modular data of the ω = 1 orbifold category (linear characters), or of the
/// declared projective tables: label set is (class rep index, character index).
pub struct ModularData {
    pub labels: Vec<(usize, usize)>,
    pub s: Vec<Vec<Cyclotomic>>,
    pub t: Vec<Cyclotomic>,
}

/// S and T matrices from class data and per-class centralizer character
/// tables. `tables[ci]` has one row per irreducible character, with values
/// aligned with `centralizers[ci]` (element indices into the group).
pub fn st_matrices(
    group: &FiniteGroup,
    class_reps: &[usize],
    centralizers: &[Vec<usize>],
    tables: &[Vec<Vec<Cyclotomic>>],
    central_charge: &Rat,
) -> Result<ModularData> {
    st_matrices_with_cocycle(group, class_reps, centralizers, tables, central_charge, None)
}

/// Like [`st_matrices`], with an optional 2-cocycle family c_g(x, y) descended
/// from a 3-cocycle (indices into the group); used by the anomalous demos.
pub fn st_matrices_with_cocycle(
    group: &FiniteGroup,
    class_reps: &[usize],
    centralizers: &[Vec<usize>],
    tables: &[Vec<Vec<Cyclotomic>>],
    central_charge: &Rat,
    cocycle: Option<&dyn Fn(usize, usize, usize) -> Cyclotomic>,
) -> Result<ModularData> {
    let mut labels = Vec::new();
    for (ci, table) in tables.iter().enumerate() {
        for xi in 0..table.len() {
            labels.push((ci, xi));
        }
    }
    let gorder = group.order();
    let chi_value = |ci: usize, xi: usize, elem: usize| -> Result<Cyclotomic> {
        let pos = centralizers[ci]
            .iter()
            .position(|&h| h == elem)
            .ok_or_else(|| Error::InternalInconsistency("element outside centralizer".into()))?;
        Ok(tables[ci][xi][pos].clone())
    };
    let mut smat = vec![vec![Cyclotomic::zero(); labels.len()]; labels.len()];
    for (li, &(c1, x1)) in labels.iter().enumerate() {
        for (lj, &(c2, x2)) in labels.iter().enumerate() {
            let a1 = class_reps[c1];
            let a2 = class_reps[c2];
            let mut acc = Cyclotomic::zero();
            for k1 in 0..gorder {
                let g1 = group.conjugate(a1, k1);
                for k2 in 0..gorder {
                    let g2 = group.conjugate(a2, k2);
                    if group.mult[g1][g2] != group.mult[g2][g1] {
                        continue;
                    }
                    // h1 = k1^{-1} g2 k1 ∈ C_{a1}, h2 = k2^{-1} g1 k2 ∈ C_{a2}
                    let h1 = group.conjugate(g2, group.inv[k1]);
                    let h2 = group.conjugate(g1, group.inv[k2]);
                    let mut v = chi_value(c1, x1, h1)?.conj().mul(&chi_value(c2, x2, h2)?.conj());
                    if let Some(cg) = cocycle {
                        // with the conjugators normalized as g_i = k_i a_i k_i^{-1},
                        // the correction is c_{g1}(k1, h1) c_{g2}(k2, h2)
                        // / (c_{g1}(g2, k1) c_{g2}(g1, k2))
                        let num = cg(g1, k1, h1).mul(&cg(g2, k2, h2));
                        let den = cg(g1, g2, k1).mul(&cg(g2, g1, k2));
                        v = v.mul(&num).mul(&den.inv()?);
                    }
                    acc = acc.add(&v);
                }
            }
            // k_i range over the group, so each commuting class pair is
            // visited |C_{a1}||C_{a2}| times on top of the 1/|G| prefactor
            let scale = Rat::new(
                Int::one(),
                Int::from((gorder * centralizers[c1].len() * centralizers[c2].len()) as i64),
            );
            smat[li][lj] = acc.mul_rat(&scale);
        }
    }
    let mut tmat = Vec::with_capacity(labels.len());
    let front = Cyclotomic::e2pi(&(-central_charge / Rat::from_integer(Int::from(24))));
    for &(ci, xi) in &labels {
        let a = class_reps[ci];
        let va = chi_value(ci, xi, a)?;
        let v1 = chi_value(ci, xi, 0)?;
        tmat.push(front.mul(&va.div(&v1)?));
    }
    Ok(ModularData { labels, s: smat, t: tmat })
}

/// The two generating 3-cocycles of H³ for Z_q ⋊_φ Z_p (q, p coprime) and
/// the 2-cocycle family they descend to. Elements are indexed in the given
/// group; `a` and `big_a` are the generator indices.
pub struct SemidirectCocycle {
    decomp: Vec<(u64, u64)>,
    q: u64,
    p: u64,
    r: u64,
    phi: i64,
    e_p: u64,
    e_r: u64,
}

impl SemidirectCocycle {
    pub fn new(
        group: &FiniteGroup,
        a: usize,
        big_a: usize,
        q: u64,
        p: u64,
        phi: i64,
        e_p: u64,
        e_r: u64,
    ) -> Result<SemidirectCocycle> {
        let mut decomp = vec![None; group.order()];
        for i in 0..q {
            // a^i
            let mut ai = 0usize;
            for _ in 0..i {
                ai = group.mult[ai][a];
            }
            for j in 0..p {
                let mut x = ai;
                for _ in 0..j {
                    x = group.mult[x][big_a];
                }
                if decomp[x].is_none() {
                    decomp[x] = Some((i, j));
                }
            }
        }
        let decomp: Option<Vec<(u64, u64)>> = decomp.into_iter().collect();
        let decomp = decomp.ok_or_else(|| {
            Error::ValidationError("generators do not produce a unique a^i A^I decomposition".into())
        })?;
        let r0 = num::integer::gcd((phi * phi - 1).unsigned_abs(), q);
        let r = if r0 == 0 { q } else { r0 };
        Ok(SemidirectCocycle { decomp, q, p, r, phi, e_p, e_r })
    }

    /// ω(x, y, z) as an exact root of unity.
    pub fn omega(&self, x: usize, y: usize, z: usize) -> Cyclotomic {
        let (ix, _) = self.decomp[x];
        let (iy, jy) = self.decomp[y];
        let (iz, jz) = self.decomp[z];
        let (jx, _) = (self.decomp[x].1, 0);
        let p = self.p as i64;
        // ω_p^{e_p}
        let over = (jy + jz) as i64 - ((jy + jz) % self.p) as i64;
        let exp_p = Rat::new(
            Int::from(self.e_p as i64 * jx as i64 * over),
            Int::from(p * p),
        );
        // ω_r^{e_r}
        let r = self.r as i64;
        let phi_pow = |e: i64| -> i64 {
            let mut acc = 1i64;
            let e = e.rem_euclid(self.r.max(1) as i64 * 2 + 4);
            for _ in 0..e {
                acc = (acc * self.phi).rem_euclid(r.max(1));
            }
            acc
        };
        let jr = (iy as i64) % r;
        let kr = (iz as i64) % r;
        let phik = phi_pow(jz as i64);
        let bracket = phik * jr + kr - (phik * jr + kr).rem_euclid(r);
        let exp_r = Rat::new(
            Int::from(self.e_r as i64 * phi_pow((jy + jz) as i64) * ix as i64 * bracket),
            Int::from(r * r),
        );
        let _ = self.q;
        Cyclotomic::e2pi(&exp_p).mul(&Cyclotomic::e2pi(&exp_r))
    }

    /// Descended family c_g(h1, h2) = ω(g,h1,h2) ω(h1,h2,g^{h1h2}) / ω(h1,g^{h1},h2).
    pub fn descended(&self, group: &FiniteGroup, g: usize, h1: usize, h2: usize) -> Result<Cyclotomic> {
        let conj = |x: usize, by: usize| group.conjugate(x, group.inv[by]); // by^{-1} x by
        let h12 = group.mult[h1][h2];
        let g_h12 = conj(g, h12);
        let g_h1 = conj(g, h1);
        let v = self
            .omega(g, h1, h2)
            .mul(&self.omega(h1, h2, g_h12))
            .mul(&self.omega(h1, g_h1, h2).inv()?);
        Ok(v)
    }
}

/// Invariant-dimension bounds for abelian actions on the rank-d Heisenberg
/// space: achieved dimensions at levels 2 and 3 from eigenvalue exponent data
/// (one rational exponent vector per dimension, entries e with λ = e^{2πi e}).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianBounds {
    pub level2: u64,
    pub level3: u64,
    pub bound2: u64,
    pub bound3: u64,
    pub attains2: bool,
    pub attains3: bool,
}

pub fn abelian_lower_bounds(exponents: &[Vec<Rat>]) -> AbelianBounds {
    let d = exponents.len() as u64;
    let is_int = |v: &Rat| v.denom().is_one();
    let fixed = |i: usize| exponents[i].iter().all(is_int);
    let pair_inv = |i: usize, j: usize| {
        exponents[i]
            .iter()
            .zip(&exponents[j])
            .all(|(a, b)| is_int(&(a + b)))
    };
    let triple_inv = |i: usize, j: usize, k: usize| {
        (0..exponents[i].len()).all(|t| is_int(&(&exponents[i][t] + &exponents[j][t] + &exponents[k][t])))
    };
    let n = exponents.len();
    let mut level2 = 0u64;
    for i in 0..n {
        if fixed(i) {
            level2 += 1; // v_{-2} states
        }
        for j in i..n {
            if pair_inv(i, j) {
                level2 += 1; // v_{-1} v_{-1} multisets
            }
        }
    }
    let mut level3 = 0u64;
    for i in 0..n {
        if fixed(i) {
            level3 += 1; // v_{-3}
        }
        for j in 0..n {
            if pair_inv(i, j) {
                level3 += 1; // v_{-2} v_{-1}, ordered
            }
        }
    }
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                if triple_inv(i, j, k) {
                    level3 += 1;
                }
            }
        }
    }
    AbelianBounds {
        level2,
        level3,
        bound2: d / 2,
        bound3: d,
        attains2: level2 == d / 2,
        attains3: level3 == d,
    }
}
