//! Integer lattices with a Gram form, their automorphisms, fixed and
//! coinvariant sublattices, and torsion quotients.
//!
//! Conventions: lattice vectors are integer row vectors of coordinates in the
//! lattice basis, maps act on the right (`v * M`), and the inner product is
//! `<a|b> = a G b^T`.

use crate::error::{Error, Result};
use crate::intmat::{smith_normal_form, IMat};
use crate::ratmat::QMat;
use crate::znum::{divisors, Int, Rat};
use num::traits::{One, Signed, Zero};
use std::collections::BTreeMap;

pub type LatticeVector = Vec<Int>;

#[derive(Debug, Clone)]
pub struct GramLattice {
    pub rank: usize,
    pub gram: IMat,
    pub even: bool,
    pub unimodular: bool,
}

impl GramLattice {
    pub fn new(gram: IMat, even: bool, unimodular: bool) -> Result<Self> {
        if gram.rows != gram.cols {
            return Err(Error::ValidationError("gram matrix must be square".into()));
        }
        let d = gram.rows;
        for i in 0..d {
            for j in 0..i {
                if gram[(i, j)] != gram[(j, i)] {
                    return Err(Error::ValidationError(format!(
                        "gram matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        if even {
            for i in 0..d {
                if (&gram[(i, i)] % Int::from(2)).is_zero() == false {
                    return Err(Error::ValidationError(format!(
                        "diagonal entry {i} is odd on an even lattice"
                    )));
                }
            }
        }
        if unimodular && !gram.det().abs().is_one() {
            return Err(Error::ValidationError("determinant is not ±1".into()));
        }
        Ok(GramLattice { rank: d, gram, even, unimodular })
    }

    pub fn inner(&self, a: &[Int], b: &[Int]) -> Int {
        let ag = self.gram.apply_row(a);
        ag.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    pub fn norm(&self, a: &[Int]) -> Int {
        self.inner(a, a)
    }

    /// Rational inner product for vectors with rational coordinates.
    pub fn inner_rat(&self, a: &[Rat], b: &[Rat]) -> Rat {
        let g = QMat::from_int(&self.gram);
        let ag = g.apply_row(a);
        ag.iter().zip(b).map(|(x, y)| x * y).sum()
    }
}

/// An integer matrix acting on the lattice (rows on the right).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeMap {
    pub matrix: IMat,
}

impl LatticeMap {
    pub fn new(matrix: IMat) -> Self {
        LatticeMap { matrix }
    }

    pub fn identity(rank: usize) -> Self {
        LatticeMap { matrix: IMat::identity(rank) }
    }

    pub fn apply(&self, v: &[Int]) -> LatticeVector {
        self.matrix.apply_row(v)
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.is_identity()
    }

    /// Matrix of `self` followed by `other` on row vectors.
    pub fn then(&self, other: &LatticeMap) -> LatticeMap {
        LatticeMap { matrix: self.matrix.mul(&other.matrix) }
    }

    pub fn pow(&self, e: u64) -> LatticeMap {
        LatticeMap { matrix: self.matrix.pow(e) }
    }

    pub fn inverse(&self) -> Result<LatticeMap> {
        Ok(LatticeMap { matrix: self.matrix.inverse_unimodular()? })
    }

    pub fn order(&self) -> Result<u64> {
        self.matrix.order(100_000)
    }

    pub fn is_automorphism(&self, lat: &GramLattice) -> bool {
        if self.matrix.rows != lat.rank || self.matrix.cols != lat.rank {
            return false;
        }
        if !self.matrix.det().abs().is_one() {
            return false;
        }
        let g = &lat.gram;
        self.matrix.mul(g).mul(&self.matrix.transpose()) == *g
    }

    pub fn commutes_with(&self, other: &LatticeMap) -> bool {
        self.matrix.mul(&other.matrix) == other.matrix.mul(&self.matrix)
    }
}

/// Cycle type, fixed/coinvariant bases, complement, projector and eigenspace
/// dimensions of a lattice automorphism.
#[derive(Debug, Clone)]
pub struct AutomorphismData {
    pub order: u64,
    /// Exponents b_t of the factorization of the characteristic polynomial
    /// into (x^t - 1)^{b_t} over divisors t of the order.
    pub cycle_type: BTreeMap<u64, i64>,
    /// Rows spanning the fixed sublattice L_g.
    pub fixed_basis: Vec<LatticeVector>,
    /// Rows spanning the coinvariant sublattice L_g^⊥ (primitive).
    pub coinvariant_basis: Vec<LatticeVector>,
    /// Preimage rows: preimage[i] * (1 - g) = divisor[i] * coinvariant[i].
    pub preimages: Vec<LatticeVector>,
    /// Elementary divisors attached to the coinvariant basis rows.
    pub divisors: Vec<Int>,
    /// Complement rows: L = Λ ⊕ L_g^⊥ with Λ spanned by these.
    pub complement_basis: Vec<LatticeVector>,
    /// Projector (1/n) Σ g^i onto the fixed subspace.
    pub projector: QMat,
    /// dim of the ξ_n^j eigenspace, for j mod n.
    pub eigenspace_dims: BTreeMap<u64, usize>,
}

impl AutomorphismData {
    /// Conformal weight Σ_j j(n-j)/(4n²) · dim 𝔥_j of the twisted sector.
    pub fn conformal_weight(&self) -> Rat {
        let n = self.order as i64;
        let mut w = Rat::zero();
        for (&j, &d) in &self.eigenspace_dims {
            let j = j as i64;
            if j == 0 {
                continue;
            }
            w += Rat::new(Int::from(j * (n - j) * d as i64), Int::from(4 * n * n));
        }
        w
    }
}

fn cycle_type_of(g: &IMat, order: u64) -> Result<BTreeMap<u64, i64>> {
    // tr(g^k) = Σ_{t | gcd-wise} t·b_t over t | n with t | k
    let mut traces = BTreeMap::new();
    for t in divisors(order) {
        traces.insert(t, g.pow(t).trace());
    }
    let mut b: BTreeMap<u64, i64> = BTreeMap::new();
    for t in divisors(order) {
        let mut acc = Int::zero();
        for (&s, &bs) in &b {
            if t % s == 0 {
                acc += Int::from(s as i64) * Int::from(bs);
            }
        }
        let num = traces[&t].clone() - acc;
        let (q, r) = num::Integer::div_rem(&num, &Int::from(t as i64));
        if !r.is_zero() {
            return Err(Error::InternalInconsistency(format!(
                "cycle type not integral at t = {t}"
            )));
        }
        let q: i64 = q.try_into().map_err(|_| {
            Error::InternalInconsistency("cycle type exponent overflow".into())
        })?;
        if q != 0 {
            b.insert(t, q);
        }
    }
    Ok(b)
}

/// Verify ∏ (x^t - 1)^{b_t} equals the characteristic polynomial of g.
fn verify_cycle_type(g: &IMat, b: &BTreeMap<u64, i64>) -> bool {
    // multiply all positive factors, then check product equality with
    // charpoly times the negative factors
    let mut lhs = vec![Int::one()];
    let mut rhs = g.charpoly();
    let poly_mul = |a: &[Int], t: u64| {
        // multiply by (x^t - 1)
        let mut out = vec![Int::zero(); a.len() + t as usize];
        for (i, c) in a.iter().enumerate() {
            out[i + t as usize] += c;
            out[i] -= c;
        }
        out
    };
    for (&t, &bt) in b {
        for _ in 0..bt.unsigned_abs() {
            if bt > 0 {
                lhs = poly_mul(&lhs, t);
            } else {
                rhs = poly_mul(&rhs, t);
            }
        }
    }
    // normalize leading signs: both must be monic of equal degree
    while lhs.last().map(|c| c.is_zero()).unwrap_or(false) {
        lhs.pop();
    }
    while rhs.last().map(|c| c.is_zero()).unwrap_or(false) {
        rhs.pop();
    }
    lhs == rhs
}

/// Full analysis of a lattice automorphism via the Smith normal form of 1 - g.
pub fn analyze_automorphism(lat: &GramLattice, g: &LatticeMap) -> Result<AutomorphismData> {
    if !g.is_automorphism(lat) {
        return Err(Error::NotAnAutomorphism(
            "g G g^T != G or det g != ±1".into(),
        ));
    }
    let d = lat.rank;
    let order = g.order()?;
    let cycle_type = cycle_type_of(&g.matrix, order)?;
    if !verify_cycle_type(&g.matrix, &cycle_type) {
        return Err(Error::InternalInconsistency(
            "cycle type does not reproduce the characteristic polynomial".into(),
        ));
    }

    let one_minus_g = IMat::identity(d).sub(&g.matrix);
    let snf = smith_normal_form(&one_minus_g);
    let k = snf.divisors.len();

    let mut fixed_basis = Vec::new();
    let mut coinvariant_basis = Vec::new();
    let mut preimages = Vec::new();
    let mut complement_basis = Vec::new();
    let q_inv = snf.q.inverse_unimodular()?;
    for i in 0..d {
        if i < k {
            preimages.push(snf.p.row(i));
            coinvariant_basis.push(q_inv.row(i));
        } else {
            fixed_basis.push(snf.p.row(i));
            complement_basis.push(q_inv.row(i));
        }
    }

    // projector and eigenspace dims
    let n = order;
    let mut acc = QMat::zero(d, d);
    for i in 0..n {
        acc = acc.add(&QMat::from_int(&g.matrix.pow(i)));
    }
    let projector = acc.scale(&Rat::new(Int::one(), Int::from(n as i64)));
    // idempotency check
    if projector.mul(&projector) != projector {
        return Err(Error::InternalInconsistency("projector not idempotent".into()));
    }

    let mut eigenspace_dims = BTreeMap::new();
    for j in 0..n {
        let t_needed = if j == 0 { 1 } else { n / num::integer::gcd(n, j) };
        let mut dim: i64 = 0;
        for (&t, &bt) in &cycle_type {
            if t % t_needed == 0 {
                dim += bt;
            }
        }
        if dim < 0 {
            return Err(Error::InternalInconsistency("negative eigenspace dim".into()));
        }
        if dim > 0 {
            eigenspace_dims.insert(j, dim as usize);
        }
    }
    let total: usize = eigenspace_dims.values().sum();
    if total != d {
        return Err(Error::InternalInconsistency(format!(
            "eigenspace dims sum to {total}, expected {d}"
        )));
    }
    if fixed_basis.len() != *eigenspace_dims.get(&0).unwrap_or(&0) {
        return Err(Error::InternalInconsistency(
            "fixed rank disagrees with cycle type".into(),
        ));
    }

    Ok(AutomorphismData {
        order,
        cycle_type,
        fixed_basis,
        coinvariant_basis,
        preimages,
        divisors: snf.divisors,
        complement_basis,
        projector,
        eigenspace_dims,
    })
}

/// Generators and orders of the torsion quotient N = L_g^⊥ / L(1-g).
#[derive(Debug, Clone)]
pub struct QuotientPresentation {
    /// Representatives with order > 1, as lattice vectors.
    pub generators: Vec<LatticeVector>,
    /// Preimage rows paired with the generators: pre * (1-g) = order * gen.
    pub preimages: Vec<LatticeVector>,
    pub orders: Vec<Int>,
    pub cardinality: Int,
}

pub fn torsion_quotient(data: &AutomorphismData) -> QuotientPresentation {
    let mut generators = Vec::new();
    let mut preimages = Vec::new();
    let mut orders = Vec::new();
    let mut cardinality = Int::one();
    for (i, s) in data.divisors.iter().enumerate() {
        cardinality *= s;
        if !s.is_one() {
            generators.push(data.coinvariant_basis[i].clone());
            preimages.push(data.preimages[i].clone());
            orders.push(s.clone());
        }
    }
    QuotientPresentation { generators, preimages, orders, cardinality }
}

/// Exact dimensions of simultaneous eigenspaces of two commuting maps:
/// dim { v : v g = ξ_n^a v, v h = ξ_m^b v }, keyed by (a, b).
pub fn joint_eigenspace_dims(
    g: &LatticeMap,
    h: &LatticeMap,
) -> Result<BTreeMap<(u64, u64), usize>> {
    if !g.commutes_with(h) {
        return Err(Error::NotCommuting);
    }
    let n = g.order()?;
    let m = h.order()?;
    let d = g.matrix.rows;
    // trace table of g^a h^b
    let mut traces = vec![vec![Int::zero(); m as usize]; n as usize];
    let mut gpow = IMat::identity(d);
    for a in 0..n as usize {
        let mut cur = gpow.clone();
        for b in 0..m as usize {
            traces[a][b] = cur.trace();
            if b + 1 < m as usize {
                cur = cur.mul(&h.matrix);
            }
        }
        if a + 1 < n as usize {
            gpow = gpow.mul(&g.matrix);
        }
    }
    let mut out = BTreeMap::new();
    let mut total = 0usize;
    for i in 0..n {
        for j in 0..m {
            // (1/nm) Σ_{a,b} ξ_n^{-ia} ξ_m^{-jb} tr(g^a h^b), exact in Q(ξ)
            let mut s = crate::cyclotomic::Cyclotomic::zero();
            for a in 0..n {
                for b in 0..m {
                    let phase = crate::cyclotomic::Cyclotomic::root_of_unity(
                        n,
                        -((i * a) as i64),
                    )
                    .mul(&crate::cyclotomic::Cyclotomic::root_of_unity(
                        m,
                        -((j * b) as i64),
                    ));
                    s = s.add(
                        &phase
                            .mul_rat(&Rat::from_integer(traces[a as usize][b as usize].clone())),
                    );
                }
            }
            let s = s.mul_rat(&Rat::new(Int::one(), Int::from((n * m) as i64)));
            let r = s.as_rat().ok_or_else(|| {
                Error::InternalInconsistency("joint eigenspace dim not rational".into())
            })?;
            if !r.denom().is_one() || r.is_negative() {
                return Err(Error::InternalInconsistency(
                    "joint eigenspace dim not a non-negative integer".into(),
                ));
            }
            let dim: i64 = r.to_integer().try_into().unwrap();
            if dim > 0 {
                out.insert((i, j), dim as usize);
                total += dim as usize;
            }
        }
    }
    if total != d {
        return Err(Error::InternalInconsistency(format!(
            "joint dims sum to {total}, expected {d}"
        )));
    }
    Ok(out)
}

/// Rational coordinates of v projected onto the fixed subspace of g.
pub fn project_fixed(data: &AutomorphismData, v: &[Int]) -> Vec<Rat> {
    let vr: Vec<Rat> = v.iter().map(|x| Rat::from_integer(x.clone())).collect();
    data.projector.apply_row(&vr)
}

/// b_v = |π_g v|² / 2 as an exact rational.
pub fn half_projected_norm(lat: &GramLattice, data: &AutomorphismData, v: &[Int]) -> Rat {
    let p = project_fixed(data, v);
    lat.inner_rat(&p, &p) / Rat::from_integer(Int::from(2))
}
