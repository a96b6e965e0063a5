//! Twisted-module data for a standard lift ĝ: the symplectic quotient
//! N = L_g^⊥ / L(1-g) with its commutator form, a Darboux basis, the defect
//! representation on Ω_0 with lattice operators U_μ, and the graded module
//! description.

use crate::cyclotomic::Cyclotomic;
use crate::error::{Error, Result};
use crate::intmat::{solve_left, IMat};
use crate::lattice::{
    analyze_automorphism, half_projected_norm, AutomorphismData, GramLattice, LatticeMap,
    LatticeVector, QuotientPresentation,
};
use crate::lifting::{EpsilonCocycle, Lift};
use crate::ratmat::QMat;
use crate::znum::{int, Int, Rat};
use num::traits::{One, Zero};

/// Monomial matrix: one nonzero entry per column, M[row_of[c], c] = val[c].
#[derive(Debug, Clone)]
pub struct MonoMat {
    pub dim: usize,
    pub row_of: Vec<usize>,
    pub val: Vec<Cyclotomic>,
}

impl MonoMat {
    pub fn identity(dim: usize) -> Self {
        MonoMat {
            dim,
            row_of: (0..dim).collect(),
            val: vec![Cyclotomic::one(); dim],
        }
    }

    pub fn scale(&self, c: &Cyclotomic) -> MonoMat {
        MonoMat {
            dim: self.dim,
            row_of: self.row_of.clone(),
            val: self.val.iter().map(|v| v.mul(c)).collect(),
        }
    }

    /// self * other (matrix product).
    pub fn mul(&self, other: &MonoMat) -> MonoMat {
        assert_eq!(self.dim, other.dim);
        let mut row_of = vec![0usize; self.dim];
        let mut val = vec![Cyclotomic::zero(); self.dim];
        for c in 0..self.dim {
            // column c of the product: other sends c -> (other.row_of[c], other.val[c]);
            // then self sends that row index (as a column of self) upward
            let mid = other.row_of[c];
            row_of[c] = self.row_of[mid];
            val[c] = self.val[mid].mul(&other.val[c]);
        }
        MonoMat { dim: self.dim, row_of, val }
    }

    pub fn inverse(&self) -> Result<MonoMat> {
        let mut row_of = vec![usize::MAX; self.dim];
        let mut val = vec![Cyclotomic::zero(); self.dim];
        for c in 0..self.dim {
            let r = self.row_of[c];
            row_of[r] = c;
            val[r] = self.val[c].inv()?;
        }
        if row_of.iter().any(|&r| r == usize::MAX) {
            return Err(Error::InternalInconsistency("monomial matrix not invertible".into()));
        }
        Ok(MonoMat { dim: self.dim, row_of, val })
    }

    pub fn pow(&self, e: i64) -> Result<MonoMat> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut acc = MonoMat::identity(self.dim);
        for _ in 0..e.unsigned_abs() {
            acc = base.mul(&acc);
        }
        Ok(acc)
    }

    pub fn trace(&self) -> Cyclotomic {
        let mut t = Cyclotomic::zero();
        for c in 0..self.dim {
            if self.row_of[c] == c {
                t = t.add(&self.val[c]);
            }
        }
        t
    }

    pub fn eq(&self, other: &MonoMat) -> bool {
        self.dim == other.dim
            && self.row_of == other.row_of
            && self.val.iter().zip(&other.val).all(|(a, b)| a.eq(b))
    }

    /// Some(scalar) when the matrix is scalar·Id.
    pub fn as_scalar(&self) -> Option<Cyclotomic> {
        if self.dim == 0 {
            return Some(Cyclotomic::one());
        }
        if (0..self.dim).any(|c| self.row_of[c] != c) {
            return None;
        }
        let first = self.val[0].clone();
        if self.val.iter().all(|v| v.eq(&first)) {
            Some(first)
        } else {
            None
        }
    }
}

/// One hyperbolic pair of the Darboux basis, with explicit lattice
/// representatives and class coordinates over the quotient generators.
#[derive(Debug, Clone)]
pub struct DarbouxPair {
    pub a_vec: LatticeVector,
    pub b_vec: LatticeVector,
    pub a_class: Vec<Int>,
    pub b_class: Vec<Int>,
    pub order: u64,
    /// C(a, b) = ξ_order^pairing, gcd(pairing, order) = 1
    pub pairing: u64,
}

#[derive(Debug, Clone)]
pub struct DarbouxBasis {
    pub pairs: Vec<DarbouxPair>,
}

/// The defect representation Ω_0 together with everything needed to evaluate
/// general lattice operators on it.
#[derive(Debug, Clone)]
pub struct DefectRep {
    pub dim: usize,
    /// λ(μ_i) for every coinvariant basis row.
    pub lambdas: Vec<Cyclotomic>,
    /// U_{μ_i} for every coinvariant basis row.
    pub basis_ops: Vec<MonoMat>,
}

/// Full twisted-module data for a standard lift.
#[derive(Debug, Clone)]
pub struct TwistedModuleData {
    pub lat: GramLattice,
    pub lift: Lift,
    pub auto: AutomorphismData,
    pub quotient: QuotientPresentation,
    pub darboux: DarbouxBasis,
    pub defect: DefectRep,
    /// conformal weight of the twisted sector
    pub rho: Rat,
    /// d(g) = sqrt(|N|)
    pub dim: u64,
    /// matrix whose rows are the coinvariant basis
    coinv: IMat,
    /// rational right-inverse for coordinate solves
    coinv_pinv: QMat,
    /// stacked matrix for class decomposition in N over the generators
    class_solver: IMat,
    /// stacked matrix decomposing N-classes over the Darboux basis
    darboux_solver: IMat,
    eps: EpsilonCocycle,
}

/// B(α,β) = n^{-<α|β>} Π_{k=1}^{n-1} (1-ξ_n^k)^{<α g^k|β>}.
pub fn b_form(
    lat: &GramLattice,
    g: &LatticeMap,
    order: u64,
    a: &[Int],
    b: &[Int],
) -> Result<Cyclotomic> {
    let n = order;
    let ip = lat.inner(a, b);
    let e: i64 = (&ip)
        .try_into()
        .map_err(|_| Error::InternalInconsistency("pairing too large".into()))?;
    let nrat = Rat::from_integer(Int::from(n as i64));
    let mut acc = Cyclotomic::from_rat(nrat).pow(-e)?;
    let mut ag = a.to_vec();
    for k in 1..n {
        ag = g.apply(&ag);
        let ek: i64 = (&lat.inner(&ag, b))
            .try_into()
            .map_err(|_| Error::InternalInconsistency("pairing too large".into()))?;
        let base = Cyclotomic::one().sub(&Cyclotomic::root_of_unity(n, k as i64));
        acc = acc.mul(&base.pow(ek)?);
    }
    Ok(acc)
}

/// C(α,β) = Π_{k=0}^{n-1} (-ξ_n^k)^{-<α g^k|β>}; requires coinvariant input.
pub fn commutator_form(
    lat: &GramLattice,
    g: &LatticeMap,
    data: &AutomorphismData,
    a: &[Int],
    b: &[Int],
) -> Result<Cyclotomic> {
    for v in [a, b] {
        let p = crate::lattice::project_fixed(data, v);
        if p.iter().any(|x| !x.is_zero()) {
            return Err(Error::NotCoinvariant);
        }
    }
    let n = data.order;
    let mut acc = Cyclotomic::one();
    let mut ag = a.to_vec();
    for k in 0..n {
        if k > 0 {
            ag = g.apply(&ag);
        }
        let ek: i64 = (&lat.inner(&ag, b))
            .try_into()
            .map_err(|_| Error::InternalInconsistency("pairing too large".into()))?;
        // -ξ_n^k = ξ_{2n}^{n + 2k}
        let base = Cyclotomic::root_of_unity(2 * n, (n + 2 * k) as i64);
        acc = acc.mul(&base.pow(-ek)?);
    }
    Ok(acc)
}

/// Exact square root of ε(μ,μ)B(μ,μ) using the closed pairing structure of B:
/// the exponents of (1-ξ^k) and (1-ξ^{n-k}) agree, and
/// |1-ξ_n^k| = (1-ξ_n^k)·i·ξ_{2n}^{-k} is an exact cyclotomic.
fn sqrt_eps_b_diag(
    lat: &GramLattice,
    g: &LatticeMap,
    order: u64,
    eps: &EpsilonCocycle,
    mu: &[Int],
) -> Result<Cyclotomic> {
    let n = order;
    let norm = lat.norm(mu);
    let (half_norm, rem) = num::Integer::div_rem(&norm, &int(2));
    if !rem.is_zero() {
        return Err(Error::OddLattice);
    }
    let h: i64 = (&half_norm).try_into().unwrap();
    // sqrt of n^{-|μ|²} = n^{-|μ|²/2}
    let mut acc = Cyclotomic::from_rat(Rat::from_integer(Int::from(n as i64))).pow(-h)?;
    // sqrt of the ±1 factor ε(μ,μ): principal value i for -1
    if !eps.eval(mu, mu).is_one() {
        acc = acc.mul(&Cyclotomic::root_of_unity(4, 1));
    }
    // paired (1-ξ^k)(1-ξ^{n-k}) factors share the exponent c_k
    let mut powers = Vec::new();
    let mut ag = mu.to_vec();
    for _ in 1..n {
        ag = g.apply(&ag);
        let c: i64 = (&lat.inner(&ag, mu)).try_into().unwrap();
        powers.push(c);
    }
    for k in 1..n {
        if 2 * k > n {
            break;
        }
        let c = powers[(k - 1) as usize];
        if 2 * k == n {
            // middle factor (1 - ξ^{n/2}) = 2
            let two = Cyclotomic::from_i64(2);
            acc = acc.mul(&two.pow(c / 2)?);
            if c % 2 != 0 {
                // sqrt(2) = (1-ξ_4)·i·ξ_8^{-1}
                let s2 = Cyclotomic::one()
                    .sub(&Cyclotomic::root_of_unity(4, 1))
                    .mul(&Cyclotomic::root_of_unity(4, 1))
                    .mul(&Cyclotomic::root_of_unity(8, -1));
                let s2 = if c > 0 { s2 } else { s2.inv()? };
                acc = acc.mul(&s2);
            }
        } else {
            debug_assert_eq!(c, powers[(n - k - 1) as usize], "B pairing symmetry");
            let pair = Cyclotomic::one()
                .sub(&Cyclotomic::root_of_unity(n, k as i64))
                .mul(&Cyclotomic::one().sub(&Cyclotomic::root_of_unity(n, -(k as i64))));
            acc = acc.mul(&pair.pow(c.div_euclid(2))?);
            if c.rem_euclid(2) != 0 {
                // leftover single power of the positive pair: multiply by |1-ξ^k|
                let abs = Cyclotomic::one()
                    .sub(&Cyclotomic::root_of_unity(n, k as i64))
                    .mul(&Cyclotomic::root_of_unity(4, 1))
                    .mul(&Cyclotomic::root_of_unity(2 * n, -(k as i64)));
                acc = acc.mul(&abs);
            }
        }
    }
    Ok(acc)
}

impl TwistedModuleData {
    pub fn order(&self) -> u64 {
        self.auto.order
    }

    pub fn epsilon(&self, a: &[Int], b: &[Int]) -> Cyclotomic {
        self.eps.eval(a, b)
    }

    pub fn b_form(&self, a: &[Int], b: &[Int]) -> Result<Cyclotomic> {
        b_form(&self.lat, &self.lift.map, self.auto.order, a, b)
    }

    pub fn commutator(&self, a: &[Int], b: &[Int]) -> Result<Cyclotomic> {
        commutator_form(&self.lat, &self.lift.map, &self.auto, a, b)
    }

    /// Integer coordinates of a coinvariant vector over the coinvariant basis.
    pub fn coinvariant_coords(&self, mu: &[Int]) -> Result<Vec<Int>> {
        if self.coinv.rows == 0 {
            return if mu.iter().all(|x| x.is_zero()) {
                Ok(Vec::new())
            } else {
                Err(Error::NotCoinvariant)
            };
        }
        let mur: Vec<Rat> = mu.iter().map(|x| Rat::from_integer(x.clone())).collect();
        let x = self.coinv_pinv.apply_row(&mur);
        let mut out = Vec::with_capacity(x.len());
        for v in &x {
            if !v.denom().is_one() {
                return Err(Error::NotCoinvariant);
            }
            out.push(v.to_integer());
        }
        // exactness check
        let back = self.coinv.apply_row(&out);
        if back != mu {
            return Err(Error::NotCoinvariant);
        }
        Ok(out)
    }

    /// Class coordinates of [μ] over the quotient generators.
    pub fn class_coords(&self, mu: &[Int]) -> Result<Vec<Int>> {
        let k = self.quotient.generators.len();
        if k == 0 {
            // check membership anyway
            let _ = self.coinvariant_coords(mu)?;
            return Ok(Vec::new());
        }
        let sol = solve_left(&self.class_solver, mu).ok_or(Error::NotCoinvariant)?;
        Ok(sol[..k].to_vec())
    }

    /// Decompose an N-class (coordinates over the quotient generators) in the
    /// Darboux basis: (a-digits, b-digits) per pair.
    fn darboux_digits(&self, class: &[Int]) -> Result<(Vec<u64>, Vec<u64>)> {
        let m = self.darboux.pairs.len();
        if m == 0 {
            return Ok((Vec::new(), Vec::new()));
        }
        let sol = solve_left(&self.darboux_solver, class)
            .ok_or_else(|| Error::InternalInconsistency("class not in Darboux span".into()))?;
        let mut xa = Vec::with_capacity(m);
        let mut yb = Vec::with_capacity(m);
        for (p, pair) in self.darboux.pairs.iter().enumerate() {
            let n = pair.order as i64;
            let a = (&sol[2 * p] % n + n) % n;
            let b = (&sol[2 * p + 1] % n + n) % n;
            xa.push(u64::try_from(a).unwrap());
            yb.push(u64::try_from(b).unwrap());
        }
        Ok((xa, yb))
    }

    /// ρ(γ([μ])) as a monomial matrix on Ω_0, for a class in generator coords.
    pub fn rho_of_class(&self, class: &[Int]) -> Result<MonoMat> {
        let (xa, yb) = self.darboux_digits(class)?;
        Ok(self.rho_of_digits(&xa, &yb))
    }

    /// ρ(x, χ) e_ψ = ψ(x) e_{χψ} with x given by a-digits and χ by
    /// χ(a_j) = ξ_{n_j}^{l_j · y_j}.
    fn rho_of_digits(&self, xa: &[u64], yb: &[u64]) -> MonoMat {
        let orders: Vec<u64> = self.darboux.pairs.iter().map(|p| p.order).collect();
        let dim = self.dim as usize;
        let m = orders.len();
        let mut row_of = vec![0usize; dim];
        let mut val = vec![Cyclotomic::zero(); dim];
        for col in 0..dim {
            // digits of ψ
            let mut rest = col;
            let mut psi = vec![0u64; m];
            for j in 0..m {
                psi[j] = (rest % orders[j] as usize) as u64;
                rest /= orders[j] as usize;
            }
            // value ψ(x) = Π ξ_{n_j}^{p_j x_j}
            let mut v = Cyclotomic::one();
            for j in 0..m {
                if psi[j] != 0 && xa[j] != 0 {
                    v = v.mul(&Cyclotomic::root_of_unity(
                        orders[j],
                        (psi[j] * xa[j]) as i64,
                    ));
                }
            }
            // row index of χψ with χ-digits c_j = l_j y_j
            let mut idx = 0usize;
            let mut mult = 1usize;
            for j in 0..m {
                let c = (self.darboux.pairs[j].pairing * yb[j] + psi[j]) % orders[j];
                idx += (c as usize) * mult;
                mult *= orders[j] as usize;
            }
            row_of[col] = idx;
            val[col] = v;
        }
        MonoMat { dim, row_of, val }
    }

    /// U_μ for any coinvariant vector, assembled from the basis operators.
    pub fn u_operator(&self, mu: &[Int]) -> Result<MonoMat> {
        let coords = self.coinvariant_coords(mu)?;
        let basis = &self.auto.coinvariant_basis;
        let mut scalar = Cyclotomic::one();
        // Π_{i<j} (ε B)^{n_i n_j}
        for i in 0..coords.len() {
            if coords[i].is_zero() {
                continue;
            }
            let ni: i64 = (&coords[i]).try_into().unwrap();
            for j in i + 1..coords.len() {
                if coords[j].is_zero() {
                    continue;
                }
                let nj: i64 = (&coords[j]).try_into().unwrap();
                let eb = self
                    .epsilon(&basis[i], &basis[j])
                    .mul(&self.b_form(&basis[i], &basis[j])?);
                scalar = scalar.mul(&eb.pow(ni * nj)?);
            }
            // (ε B)(μ_i, μ_i)^{n_i (n_i - 1)/2}
            let eb = self
                .epsilon(&basis[i], &basis[i])
                .mul(&self.b_form(&basis[i], &basis[i])?);
            scalar = scalar.mul(&eb.pow(ni * (ni - 1) / 2)?);
        }
        let mut acc = MonoMat::identity(self.dim as usize);
        for (i, c) in coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e: i64 = c.try_into().unwrap();
            acc = acc.mul(&self.defect.basis_ops[i].pow(e)?);
        }
        Ok(acc.scale(&scalar))
    }

    /// Check U_{α(1-g)} = η(α)^{-1} ε(α(1-g), αg) B(α(1-g), αg)^{-1} e^{2πi b_α} Id
    /// on Ω_0; returns the diagnostic ratio together with the verdict.
    pub fn twist_compat_check(&self, alpha: &[Int]) -> Result<(bool, Option<Cyclotomic>)> {
        let g = &self.lift.map;
        let ag = g.apply(alpha);
        let mut a1g = alpha.to_vec();
        for (x, y) in a1g.iter_mut().zip(&ag) {
            *x -= y;
        }
        let u = self.u_operator(&a1g)?;
        let b_alpha = half_projected_norm(&self.lat, &self.auto, alpha);
        let scalar = self
            .lift
            .eta(&self.lat, alpha)
            .inv()?
            .mul(&self.epsilon(&a1g, &ag))
            .mul(&self.b_form(&a1g, &ag)?.inv()?)
            .mul(&Cyclotomic::e2pi(&b_alpha));
        match u.as_scalar() {
            Some(us) => {
                if us.eq(&scalar) {
                    Ok((true, None))
                } else {
                    Ok((false, Some(us.div(&scalar)?)))
                }
            }
            None => Ok((false, None)),
        }
    }

    /// Exact squared norm of the character of ρ over N (1 iff irreducible).
    pub fn irreducibility_norm(&self) -> Result<Rat> {
        let orders: Vec<u64> = self.darboux.pairs.iter().map(|p| p.order).collect();
        let m = orders.len();
        let size: u64 = orders.iter().product::<u64>().pow(2).max(1);
        let mut total = Cyclotomic::zero();
        // enumerate all classes (x over A-digits, y over b-digits)
        let mut digits = vec![0u64; 2 * m];
        loop {
            let xa: Vec<u64> = digits[..m].to_vec();
            let yb: Vec<u64> = digits[m..].to_vec();
            let tr = self.rho_of_digits(&xa, &yb).trace();
            total = total.add(&tr.mul(&tr.conj()));
            // increment mixed radix
            let mut i = 0;
            loop {
                if i == 2 * m {
                    let r = total
                        .mul_rat(&Rat::new(Int::one(), Int::from(size as i64)))
                        .as_rat()
                        .ok_or_else(|| {
                            Error::InternalInconsistency("norm not rational".into())
                        })?;
                    return Ok(r);
                }
                digits[i] += 1;
                if digits[i] < orders[i % m.max(1)].max(1) {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
        }
    }
}

/// Assemble the twisted module for a standard lift without order doubling.
pub fn build_twisted_module(lat: &GramLattice, lift: &Lift) -> Result<TwistedModuleData> {
    if !lat.unimodular || !lat.even {
        return Err(Error::ValidationError(
            "twisted modules need an even unimodular lattice".into(),
        ));
    }
    let g = &lift.map;
    let auto = analyze_automorphism(lat, g)?;
    // standardness and order
    for row in &auto.fixed_basis {
        if !lift.eta(lat, row).is_one() {
            return Err(Error::ValidationError("lift is not standard".into()));
        }
    }
    let doubled = !crate::lifting::is_identity_lift(
        lat,
        &crate::lifting::lift_power(lat, lift, auto.order as i64)?,
    );
    if doubled {
        return Err(Error::OrderDoubled(format!("order-{} element", auto.order)));
    }
    let quotient = crate::lattice::torsion_quotient(&auto);
    let card = &quotient.cardinality;
    let dim_sq = crate::znum::nth_root_exact(card, 2)
        .ok_or_else(|| Error::NonSquareQuotient(format!("|N| = {card}")))?;
    let dim: u64 = (&dim_sq)
        .try_into()
        .map_err(|_| Error::NonSquareQuotient("quotient too large".into()))?;

    let eps = EpsilonCocycle::new(lat)?;

    // Darboux basis of (N, C)
    let darboux = darboux_basis(lat, g, &auto, &quotient)?;
    let dim_check: u64 = darboux.pairs.iter().map(|p| p.order).product();
    if dim_check != dim {
        return Err(Error::InternalInconsistency(format!(
            "Darboux dimension {dim_check} != d(g) {dim}"
        )));
    }

    // solvers
    let coinv = IMat::from_rows(auto.coinvariant_basis.clone());
    let coinv_q = QMat::from_int(&coinv);
    let gramian = coinv_q.mul(&coinv_q.transpose());
    let coinv_pinv = coinv_q
        .transpose()
        .mul(&gramian.inverse().ok_or_else(|| {
            Error::InternalInconsistency("coinvariant basis not independent".into())
        })?);
    let one_minus_g = IMat::identity(lat.rank).sub(&g.matrix);
    let class_solver = {
        let mut rows = quotient.generators.clone();
        for i in 0..lat.rank {
            rows.push(one_minus_g.row(i));
        }
        IMat::from_rows(rows)
    };
    let darboux_solver = {
        let k = quotient.generators.len();
        let mut rows = Vec::new();
        for pair in &darboux.pairs {
            rows.push(pair.a_class.clone());
            rows.push(pair.b_class.clone());
        }
        for (i, s) in quotient.orders.iter().enumerate() {
            let mut row = vec![Int::zero(); k];
            row[i] = s.clone();
            rows.push(row);
        }
        IMat::from_rows(rows)
    };

    let mut module = TwistedModuleData {
        lat: lat.clone(),
        lift: lift.clone(),
        rho: auto.conformal_weight(),
        dim,
        quotient,
        darboux,
        defect: DefectRep { dim: dim as usize, lambdas: Vec::new(), basis_ops: Vec::new() },
        auto,
        coinv,
        coinv_pinv,
        class_solver,
        darboux_solver,
        eps,
    };

    // λ(μ_i) and U_{μ_i} for every coinvariant basis row
    let n = module.auto.order;
    let mut lambdas = Vec::new();
    let mut ops = Vec::new();
    for i in 0..module.auto.coinvariant_basis.len() {
        let mu = module.auto.coinvariant_basis[i].clone();
        let pre = module.auto.preimages[i].clone();
        let s: u64 = (&module.auto.divisors[i])
            .try_into()
            .map_err(|_| Error::InternalInconsistency("divisor too large".into()))?;
        let lambda = lambda_on_basis(lat, g, n, &module.eps, &module.auto, &module.lift, &mu, &pre, s)?;
        // U_{μ_i} = λ ρ(γ([μ_i]))
        let class = module.class_coords(&mu)?;
        let rho = module.rho_of_class(&class)?;
        lambdas.push(lambda.clone());
        ops.push(rho.scale(&lambda));
    }
    module.defect = DefectRep { dim: dim as usize, lambdas, basis_ops: ops };

    // verify the multiplication law on all basis pairs
    for i in 0..module.auto.coinvariant_basis.len() {
        for j in 0..module.auto.coinvariant_basis.len() {
            let mi = &module.auto.coinvariant_basis[i];
            let mj = &module.auto.coinvariant_basis[j];
            let mut sum = mi.clone();
            for (x, y) in sum.iter_mut().zip(mj) {
                *x += y;
            }
            let lhs = module.defect.basis_ops[i].mul(&module.defect.basis_ops[j]);
            let rhs = module
                .u_operator(&sum)?
                .scale(&module.epsilon(mi, mj).mul(&module.b_form(mi, mj)?.inv()?));
            if !lhs.eq(&rhs) {
                return Err(Error::InternalInconsistency(format!(
                    "U multiplication law failed on basis pair ({i},{j})"
                )));
            }
        }
    }
    // verify twist compatibility on all basis preimages
    for pre in module.auto.preimages.clone() {
        let (ok, ratio) = module.twist_compat_check(&pre)?;
        if !ok {
            return Err(Error::InternalInconsistency(format!(
                "twist compatibility failed (ratio {ratio:?})"
            )));
        }
    }
    Ok(module)
}

/// λ(μ) for a basis row with preimage α̃ (α̃(1-g) = s·μ), keeping the η factor
/// explicit: λ = η(α̃)^{-1/s} εB^{-1}(μ, α̃) (εB(μ,μ))^{(s+1)/2} e^{2πi b_α̃ / s}.
#[allow(clippy::too_many_arguments)]
fn lambda_on_basis(
    lat: &GramLattice,
    g: &LatticeMap,
    n: u64,
    eps: &EpsilonCocycle,
    auto: &AutomorphismData,
    lift: &Lift,
    mu: &[Int],
    pre: &[Int],
    s: u64,
) -> Result<Cyclotomic> {
    let eta_pre = lift.eta(lat, pre);
    let eta_root = eta_pre.inv()?.principal_root(s)?;
    let eb_cross = eps.eval(mu, pre).mul(&b_form(lat, g, n, mu, pre)?.inv()?);
    let eb_diag = eps.eval(mu, mu).mul(&b_form(lat, g, n, mu, mu)?);
    let half_power = if s % 2 == 1 {
        eb_diag.pow(((s + 1) / 2) as i64)?
    } else {
        let root = sqrt_eps_b_diag(lat, g, n, eps, mu)?;
        if !root.mul(&root).eq(&eb_diag) {
            return Err(Error::InternalInconsistency("sqrt of εB(μ,μ) failed".into()));
        }
        root.pow((s + 1) as i64)?
    };
    let b_pre = half_projected_norm(lat, auto, pre);
    let phase = Cyclotomic::e2pi(&(b_pre / Rat::from_integer(Int::from(s as i64))));
    let lambda = eta_root.mul(&eb_cross).mul(&half_power).mul(&phase);
    // λ^s must solve the defining equation exactly
    let lhs = lambda.pow(s as i64)?;
    let rhs = eta_pre
        .inv()?
        .mul(&eb_cross.pow(s as i64)?)
        .mul(&eb_diag.pow((s * (s + 1) / 2) as i64)?)
        .mul(&Cyclotomic::e2pi(&half_projected_norm(lat, auto, pre)));
    if !lhs.eq(&rhs) {
        return Err(Error::InternalInconsistency("λ^s identity failed".into()));
    }
    Ok(lambda)
}

/// Constructive hyperbolic pairing of (N, C).
fn darboux_basis(
    lat: &GramLattice,
    g: &LatticeMap,
    auto: &AutomorphismData,
    quotient: &QuotientPresentation,
) -> Result<DarbouxBasis> {
    let k = quotient.generators.len();
    // working generators: (class coords over quotient generators, lattice rep)
    let mut gens: Vec<(Vec<Int>, LatticeVector)> = (0..k)
        .map(|i| {
            let mut c = vec![Int::zero(); k];
            c[i] = Int::one();
            (c, quotient.generators[i].clone())
        })
        .collect();

    let class_order = |c: &[Int]| -> u64 {
        let mut ord = 1u64;
        for (x, s) in c.iter().zip(&quotient.orders) {
            let s: u64 = s.try_into().unwrap();
            let x = u64::try_from(((x % Int::from(s as i64)) + Int::from(s as i64)) % Int::from(s as i64)).unwrap();
            let o = s / num::integer::gcd(s, x.max(1));
            let o = if x == 0 { 1 } else { o };
            ord = num::integer::lcm(ord, o);
        }
        ord
    };
    let cval = |a: &[Int], b: &[Int]| -> Result<Cyclotomic> {
        commutator_form(lat, g, auto, a, b)
    };
    let root_order = |c: &Cyclotomic| -> Result<u64> {
        let (m, e) = c
            .as_root_of_unity()
            .ok_or_else(|| Error::InternalInconsistency("C value not a root of unity".into()))?;
        Ok(if e == 0 { 1 } else { m / num::integer::gcd(m, e) })
    };

    let mut pairs: Vec<DarbouxPair> = Vec::new();
    while !gens.is_empty() {
        // drop trivial classes
        gens.retain(|(c, _)| class_order(c) > 1);
        if gens.is_empty() {
            break;
        }
        // element of maximal order
        let (r, _) = gens
            .iter()
            .enumerate()
            .max_by_key(|(_, (c, _))| class_order(c))
            .map(|(i, x)| (i, x.clone()))
            .unwrap();
        let n = class_order(&gens[r].0);
        // partner with primitive pairing
        let mut partner = None;
        for (j, (_, vj)) in gens.iter().enumerate() {
            if j == r {
                continue;
            }
            let c = cval(&gens[r].1, vj)?;
            if root_order(&c)? == n {
                partner = Some(j);
                break;
            }
        }
        let Some(j) = partner else {
            return Err(Error::DegenerateForm);
        };
        let a = gens[r].clone();
        let b = gens[j].clone();
        let chi = cval(&a.1, &b.1)?;
        // χ = ξ_n^l with gcd(l, n) = 1
        let (m, e) = chi.as_root_of_unity().unwrap();
        let scale = m / n;
        if e % scale != 0 {
            return Err(Error::InternalInconsistency("pairing not an n-th root".into()));
        }
        let l = (e / scale) % n;
        // discrete log base χ
        let dlog = |v: &Cyclotomic| -> Result<u64> {
            let mut acc = Cyclotomic::one();
            for t in 0..n {
                if acc.eq(v) {
                    return Ok(t);
                }
                acc = acc.mul(&chi);
            }
            Err(Error::InternalInconsistency("dlog failed".into()))
        };
        // correct the remaining generators
        let mut next: Vec<(Vec<Int>, LatticeVector)> = Vec::new();
        for (i, (ci, vi)) in gens.iter().enumerate() {
            if i == r || i == j {
                continue;
            }
            let kir = dlog(&cval(vi, &a.1)?)?;
            let kij = dlog(&cval(vi, &b.1)?)?;
            // ã_i = a_i + k_{i,r}·b - k_{i,j}·a
            let mut c = ci.clone();
            let mut v = vi.clone();
            for (x, y) in c.iter_mut().zip(&b.0) {
                *x += Int::from(kir as i64) * y;
            }
            for (x, y) in v.iter_mut().zip(&b.1) {
                *x += Int::from(kir as i64) * y;
            }
            for (x, y) in c.iter_mut().zip(&a.0) {
                *x -= Int::from(kij as i64) * y;
            }
            for (x, y) in v.iter_mut().zip(&a.1) {
                *x -= Int::from(kij as i64) * y;
            }
            next.push((c, v));
        }
        pairs.push(DarbouxPair {
            a_vec: a.1,
            b_vec: b.1,
            a_class: a.0,
            b_class: b.0,
            order: n,
            pairing: l,
        });
        gens = next;
    }
    pairs.sort_by_key(|p| p.order);
    for w in pairs.windows(2) {
        if w[1].order % w[0].order != 0 {
            return Err(Error::InternalInconsistency("pair orders not a chain".into()));
        }
    }
    // exact verification of the hyperbolic pairing
    for (i, p) in pairs.iter().enumerate() {
        let self_pair = commutator_form(lat, g, auto, &p.a_vec, &p.a_vec)?;
        if !self_pair.is_one() {
            return Err(Error::InternalInconsistency("C not alternating on pair".into()));
        }
        for (jj, q) in pairs.iter().enumerate() {
            let cab = commutator_form(lat, g, auto, &p.a_vec, &q.b_vec)?;
            let expect = if i == jj {
                Cyclotomic::root_of_unity(p.order, p.pairing as i64)
            } else {
                Cyclotomic::one()
            };
            if !cab.eq(&expect) {
                return Err(Error::InternalInconsistency("pairing matrix wrong".into()));
            }
            let caa = commutator_form(lat, g, auto, &p.a_vec, &q.a_vec)?;
            let cbb = commutator_form(lat, g, auto, &p.b_vec, &q.b_vec)?;
            if !caa.is_one() || !cbb.is_one() {
                return Err(Error::InternalInconsistency("a/b blocks not isotropic".into()));
            }
        }
    }
    Ok(DarbouxBasis { pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifting::standard_lift;
    use crate::standard;
    use crate::znum::{rat, rat_int};
    use rand::Rng;
    use rand::SeedableRng;

    fn neg_module() -> TwistedModuleData {
        let lat = standard::e8();
        let neg = LatticeMap::new(IMat::identity(8).neg());
        let sl = standard_lift(&lat, &neg).unwrap();
        build_twisted_module(&lat, &sl.lift).unwrap()
    }

    #[test]
    fn commutator_on_negation_is_parity_of_inner_product() {
        let lat = standard::e8();
        let neg = LatticeMap::new(IMat::identity(8).neg());
        let data = analyze_automorphism(&lat, &neg).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let a: Vec<Int> = (0..8).map(|_| Int::from(rng.gen_range(-3i64..=3))).collect();
            let b: Vec<Int> = (0..8).map(|_| Int::from(rng.gen_range(-3i64..=3))).collect();
            let c = commutator_form(&lat, &neg, &data, &a, &b).unwrap();
            let expect = if (lat.inner(&a, &b) % Int::from(2)).is_zero() {
                Cyclotomic::one()
            } else {
                Cyclotomic::from_i64(-1)
            };
            assert!(c.eq(&expect));
            // alternating
            assert!(commutator_form(&lat, &neg, &data, &a, &a).unwrap().is_one());
        }
    }

    #[test]
    fn commutator_descends_to_quotient() {
        let m = neg_module();
        let one_minus_g = IMat::identity(8).sub(&m.lift.map.matrix);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let a: Vec<Int> = (0..8).map(|_| Int::from(rng.gen_range(-2i64..=2))).collect();
            let b: Vec<Int> = (0..8).map(|_| Int::from(rng.gen_range(-2i64..=2))).collect();
            let gamma: Vec<Int> = (0..8).map(|_| Int::from(rng.gen_range(-2i64..=2))).collect();
            let shift = one_minus_g.apply_row(&gamma);
            let mut a2 = a.clone();
            for (x, y) in a2.iter_mut().zip(&shift) {
                *x += y;
            }
            let c1 = m.commutator(&a, &b).unwrap();
            let c2 = m.commutator(&a2, &b).unwrap();
            assert!(c1.eq(&c2));
        }
    }

    #[test]
    fn commutator_rejects_non_coinvariant() {
        let model = standard::e8_model();
        let lat = &model.lattice;
        let t = &model.maps["t"];
        let data = analyze_automorphism(lat, t).unwrap();
        // a fixed vector is not coinvariant (t has fixed rank 4)
        let fixed = data.fixed_basis[0].clone();
        let other = data.coinvariant_basis[0].clone();
        assert!(matches!(
            commutator_form(lat, t, &data, &fixed, &other),
            Err(Error::NotCoinvariant)
        ));
    }

    #[test]
    fn b_form_value_on_negation() {
        // for g = -1 and a root α: B(α,α) = 2^{-2} (1-(-1))^{-2} = 1/16
        let lat = standard::e8();
        let neg = LatticeMap::new(IMat::identity(8).neg());
        // find a norm-2 vector
        let root = crate::enumerate::enumerate_by_norm(&lat, &rat_int(1), None)
            .unwrap()
            .into_iter()
            .find(|v| lat.norm(v) == Int::from(2))
            .unwrap();
        let b = b_form(&lat, &neg, 2, &root, &root).unwrap();
        assert_eq!(b.as_rat().unwrap(), rat(1, 16));
    }

    #[test]
    fn negation_module_shape() {
        let m = neg_module();
        assert_eq!(m.dim, 16);
        assert_eq!(m.rho, rat(1, 2));
        assert_eq!(m.darboux.pairs.len(), 4);
        for p in &m.darboux.pairs {
            assert_eq!(p.order, 2);
            assert_eq!(p.pairing, 1);
        }
        assert_eq!(m.irreducibility_norm().unwrap(), rat_int(1));
    }

    #[test]
    fn rho_trace_vanishes_off_identity_character() {
        let m = neg_module();
        // classes with nonzero a-part or b-part: trace 0 unless χ trivial;
        // χ trivial means all b-digits 0
        let orders: Vec<u64> = m.darboux.pairs.iter().map(|p| p.order).collect();
        let mm = orders.len();
        let mut digits = vec![0u64; 2 * mm];
        loop {
            let xa = &digits[..mm];
            let yb = &digits[mm..];
            let tr = m.rho_of_digits(xa, yb).trace();
            if yb.iter().any(|&y| y != 0) {
                assert!(tr.is_zero());
            }
            let mut i = 0;
            loop {
                if i == 2 * mm {
                    return;
                }
                digits[i] += 1;
                if digits[i] < orders[i % mm] {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn identity_module_is_trivial() {
        let lat = standard::e8();
        let id = Lift::identity(8);
        let m = build_twisted_module(&lat, &id).unwrap();
        assert_eq!(m.dim, 1);
        assert_eq!(m.rho, rat_int(0));
        assert_eq!(m.auto.complement_basis.len(), 8);
    }

    #[test]
    fn u_commutator_matches_form() {
        let m = neg_module();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            // random coinvariant vectors: any lattice vector is coinvariant for -1
            let a: Vec<Int> = (0..8).map(|_| Int::from(rng.gen_range(-2i64..=2))).collect();
            let b: Vec<Int> = (0..8).map(|_| Int::from(rng.gen_range(-2i64..=2))).collect();
            let ua = m.u_operator(&a).unwrap();
            let ub = m.u_operator(&b).unwrap();
            let comm = ua
                .mul(&ub)
                .mul(&ua.inverse().unwrap())
                .mul(&ub.inverse().unwrap());
            let c = m.commutator(&a, &b).unwrap();
            let s = comm.as_scalar().expect("commutator must be scalar");
            assert!(s.eq(&c));
        }
    }

    #[test]
    fn u_mult_on_random_pairs() {
        let m = neg_module();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let a: Vec<Int> = (0..8).map(|_| Int::from(rng.gen_range(-2i64..=2))).collect();
            let b: Vec<Int> = (0..8).map(|_| Int::from(rng.gen_range(-2i64..=2))).collect();
            let mut sum = a.clone();
            for (x, y) in sum.iter_mut().zip(&b) {
                *x += y;
            }
            let lhs = m.u_operator(&a).unwrap().mul(&m.u_operator(&b).unwrap());
            let rhs = m
                .u_operator(&sum)
                .unwrap()
                .scale(&m.epsilon(&a, &b).mul(&m.b_form(&a, &b).unwrap().inv().unwrap()));
            assert!(lhs.eq(&rhs), "U_mult failed");
        }
    }

    #[test]
    fn twist_compat_closure_under_sums() {
        let m = neg_module();
        let a = m.auto.preimages[0].clone();
        let b = m.auto.preimages[1].clone();
        let mut sum = a.clone();
        for (x, y) in sum.iter_mut().zip(&b) {
            *x += y;
        }
        assert!(m.twist_compat_check(&sum).unwrap().0);
        // fixed vectors: both sides are the identity (vacuous on -1: zero vector)
        let zero = vec![Int::zero(); 8];
        assert!(m.twist_compat_check(&zero).unwrap().0);
    }

    #[test]
    fn lambda_reroot_invariance() {
        // multiplying λ(μ_i) by an s_i-th root of unity keeps both defining
        // relations valid
        let m = neg_module();
        let mut m2 = m.clone();
        for (i, op) in m2.defect.basis_ops.iter_mut().enumerate() {
            let s: u64 = (&m.auto.divisors[i]).try_into().unwrap();
            let tw = Cyclotomic::root_of_unity(s, 1);
            *op = op.scale(&tw);
            m2.defect.lambdas[i] = m2.defect.lambdas[i].mul(&tw);
        }
        for pre in &m2.auto.preimages {
            assert!(m2.twist_compat_check(pre).unwrap().0);
        }
        for i in 0..m2.auto.coinvariant_basis.len() {
            for j in 0..m2.auto.coinvariant_basis.len() {
                let mi = &m2.auto.coinvariant_basis[i];
                let mj = &m2.auto.coinvariant_basis[j];
                let mut sum = mi.clone();
                for (x, y) in sum.iter_mut().zip(mj) {
                    *x += y;
                }
                let lhs = m2.defect.basis_ops[i].mul(&m2.defect.basis_ops[j]);
                let rhs = m2
                    .u_operator(&sum)
                    .unwrap()
                    .scale(&m2.epsilon(mi, mj).mul(&m2.b_form(mi, mj).unwrap().inv().unwrap()));
                assert!(lhs.eq(&rhs));
            }
        }
    }

    #[test]
    fn z3_module_shapes() {
        let model = standard::e8_model();
        let lat = &model.lattice;
        for name in ["g3a", "g3b"] {
            let sl = standard_lift(lat, &model.maps[name]).unwrap();
            let m = build_twisted_module(lat, &sl.lift).unwrap();
            assert_eq!(m.dim, 3, "{name}: d(g) = 3");
            assert_eq!(m.rho, rat(1, 3));
            assert_eq!(m.irreducibility_norm().unwrap(), rat_int(1));
        }
    }

    #[test]
    fn s_and_t_module_shapes() {
        let model = standard::e8_model();
        let lat = &model.lattice;
        let s = standard_lift(lat, &model.maps["s"]).unwrap();
        let ms = build_twisted_module(lat, &s.lift).unwrap();
        assert_eq!(ms.dim, 2);
        assert_eq!(ms.rho, rat(1, 4));
        let t = standard_lift(lat, &model.maps["t"]).unwrap();
        let mt = build_twisted_module(lat, &t.lift).unwrap();
        assert_eq!(mt.rho, rat(2, 9));
        assert_eq!(mt.irreducibility_norm().unwrap(), rat_int(1));
    }
}

impl MonoMat {
    pub fn to_text(&self) -> String {
        let mut out = format!("mono {}\n", self.dim);
        for c in 0..self.dim {
            out.push_str(&format!("{} {}\n", self.row_of[c], self.val[c].to_text()));
        }
        out
    }

    pub fn from_text(lines: &mut std::str::Lines) -> Result<MonoMat> {
        let header = lines
            .next()
            .ok_or_else(|| Error::ParseError("missing monomial header".into()))?;
        let dim: usize = header
            .strip_prefix("mono ")
            .and_then(|t| t.trim().parse().ok())
            .ok_or_else(|| Error::ParseError(format!("bad monomial header: {header}")))?;
        let mut row_of = Vec::with_capacity(dim);
        let mut val = Vec::with_capacity(dim);
        for _ in 0..dim {
            let line = lines
                .next()
                .ok_or_else(|| Error::ParseError("truncated monomial matrix".into()))?;
            let (r, v) = line
                .split_once(' ')
                .ok_or_else(|| Error::ParseError(format!("bad monomial row: {line}")))?;
            row_of.push(
                r.parse()
                    .map_err(|_| Error::ParseError(format!("bad row index: {r}")))?,
            );
            val.push(Cyclotomic::from_text(v)?);
        }
        Ok(MonoMat { dim, row_of, val })
    }
}

impl DefectRep {
    /// Bit-exact text form of the ground-space operators.
    pub fn to_text(&self) -> String {
        let mut out = format!("defect dim {} ops {}\n", self.dim, self.basis_ops.len());
        for l in &self.lambdas {
            out.push_str(&format!("lambda {}\n", l.to_text()));
        }
        for op in &self.basis_ops {
            out.push_str(&op.to_text());
        }
        out
    }

    pub fn from_text(text: &str) -> Result<DefectRep> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::ParseError("missing defect header".into()))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 5 || toks[0] != "defect" {
            return Err(Error::ParseError(format!("bad defect header: {header}")));
        }
        let dim: usize =
            toks[2].parse().map_err(|_| Error::ParseError("bad defect dim".into()))?;
        let nops: usize =
            toks[4].parse().map_err(|_| Error::ParseError("bad defect op count".into()))?;
        let mut lambdas = Vec::with_capacity(nops);
        for _ in 0..nops {
            let line = lines
                .next()
                .ok_or_else(|| Error::ParseError("truncated defect lambdas".into()))?;
            let v = line
                .strip_prefix("lambda ")
                .ok_or_else(|| Error::ParseError(format!("bad lambda line: {line}")))?;
            lambdas.push(Cyclotomic::from_text(v)?);
        }
        let mut basis_ops = Vec::with_capacity(nops);
        for _ in 0..nops {
            basis_ops.push(MonoMat::from_text(&mut lines)?);
        }
        Ok(DefectRep { dim, lambdas, basis_ops })
    }
}
