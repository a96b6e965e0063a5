//! Lifts of lattice automorphisms to automorphisms of the lattice VOA.
//!
//! A lift is a pair (η_g, g) acting on lattice states as
//! ĝ e_α = η_g(α)^{-1} e_{αg}. The phase function is stored in closed form
//! η(α) = (-1)^{α Q α^T} · e^{2πi <α, v>}, which is closed under composition,
//! inversion and twisting by homomorphisms.

use crate::cyclotomic::Cyclotomic;
use crate::error::{Error, Result};
use crate::intmat::IMat;
use crate::lattice::{analyze_automorphism, GramLattice, LatticeMap};
use crate::ratmat::QMat;
use crate::znum::{Int, Rat};
use num::traits::Zero;
use num::Integer;

/// Bimultiplicative 2-cocycle ε(α,β) = (-1)^{(α Ḡ, β)} with Ḡ + Ḡ^T = G.
#[derive(Debug, Clone)]
pub struct EpsilonCocycle {
    halved: IMat,
}

impl EpsilonCocycle {
    pub fn new(lat: &GramLattice) -> Result<Self> {
        let d = lat.rank;
        let mut halved = IMat::zero(d, d);
        for i in 0..d {
            for j in 0..d {
                if i > j {
                    halved[(i, j)] = lat.gram[(i, j)].clone();
                } else if i == j {
                    let (q, r) = lat.gram[(i, i)].div_rem(&Int::from(2));
                    if !r.is_zero() {
                        return Err(Error::OddLattice);
                    }
                    halved[(i, i)] = q;
                }
            }
        }
        Ok(EpsilonCocycle { halved })
    }

    pub fn halved_gram(&self) -> &IMat {
        &self.halved
    }

    /// ε(α, β) ∈ {±1} as an exact cyclotomic.
    pub fn eval(&self, a: &[Int], b: &[Int]) -> Cyclotomic {
        let ag = self.halved.apply_row(a);
        let e: Int = ag.iter().zip(b).map(|(x, y)| x * y).sum();
        if (e % Int::from(2)).is_zero() {
            Cyclotomic::one()
        } else {
            Cyclotomic::from_i64(-1)
        }
    }
}

/// A VOA automorphism lifted from the lattice automorphism `map`.
#[derive(Debug, Clone)]
pub struct Lift {
    pub map: LatticeMap,
    /// integer quadratic part: contributes (-1)^{α quad α^T}
    quad: IMat,
    /// homomorphism part: contributes e^{2πi <α, v>} = e^{2πi α G v^T}
    vphase: Vec<Rat>,
}

impl Lift {
    pub fn identity(rank: usize) -> Self {
        Lift {
            map: LatticeMap::identity(rank),
            quad: IMat::zero(rank, rank),
            vphase: vec![Rat::zero(); rank],
        }
    }

    /// η(α), an exact root of unity.
    pub fn eta(&self, lat: &GramLattice, a: &[Int]) -> Cyclotomic {
        let qa = self.quad.apply_row(a);
        let e: Int = qa.iter().zip(a).map(|(x, y)| x * y).sum();
        let sign = if (e % Int::from(2)).is_zero() {
            Cyclotomic::one()
        } else {
            Cyclotomic::from_i64(-1)
        };
        let ag = lat.gram.apply_row(a);
        let mut exp = Rat::zero();
        for (x, v) in ag.iter().zip(&self.vphase) {
            exp += Rat::from_integer(x.clone()) * v;
        }
        sign.mul(&Cyclotomic::e2pi(&exp))
    }

    /// η̄(α) = η(α)^{-1} for the root-of-unity phases.
    pub fn eta_conj(&self, lat: &GramLattice, a: &[Int]) -> Cyclotomic {
        self.eta(lat, a).conj()
    }

    /// Twist the phase by the homomorphism α ↦ e^{2πi <α, w>}.
    pub fn twist(&self, w: &[Rat]) -> Lift {
        let mut v = self.vphase.clone();
        for (x, y) in v.iter_mut().zip(w) {
            *x += y;
        }
        Lift { map: self.map.clone(), quad: self.quad.clone(), vphase: v }
    }

    /// Serialized phase data (quadratic part and twist vector), for caching.
    pub fn phase_fingerprint(&self) -> String {
        let mut s = String::new();
        for i in 0..self.quad.rows {
            for j in 0..self.quad.cols {
                s.push_str(&format!("{},", self.quad[(i, j)]));
            }
        }
        s.push(';');
        for v in &self.vphase {
            s.push_str(&format!("{}/{},", v.numer(), v.denom()));
        }
        s
    }
}

/// ĝ ĥ: apply b = ĥ first, then a = ĝ. Lattice part α ↦ (α b) a,
/// phase η(α) = η_b(α) · η_a(α b).
pub fn lift_compose(lat: &GramLattice, a: &Lift, b: &Lift) -> Lift {
    let map = b.map.then(&a.map);
    let mb = &b.map.matrix;
    let quad = b.quad.add(&mb.mul(&a.quad).mul(&mb.transpose()));
    // e^{2πi (α b) G v_a^T} = e^{2πi α G (G^{-1} b G v_a^T)}
    let g = QMat::from_int(&lat.gram);
    let ginv = g.inverse().expect("gram invertible");
    let va = QMat::from_rows_vec(vec![a.vphase.clone()]).transpose();
    let w = ginv.mul(&QMat::from_int(mb)).mul(&g).mul(&va);
    let mut v = b.vphase.clone();
    for (i, x) in v.iter_mut().enumerate() {
        *x += w[(i, 0)].clone();
    }
    Lift { map, quad, vphase: v }
}

pub fn lift_inverse(lat: &GramLattice, a: &Lift) -> Result<Lift> {
    let minv = a.map.inverse()?;
    let m = &minv.matrix;
    let quad = m.mul(&a.quad).mul(&m.transpose());
    let g = QMat::from_int(&lat.gram);
    let ginv = g.inverse().expect("gram invertible");
    let va = QMat::from_rows_vec(vec![a.vphase.clone()]).transpose();
    let w = ginv.mul(&QMat::from_int(m)).mul(&g).mul(&va);
    let mut v = vec![Rat::zero(); a.vphase.len()];
    for (i, x) in v.iter_mut().enumerate() {
        *x -= w[(i, 0)].clone();
    }
    Ok(Lift { map: minv, quad, vphase: v })
}

pub fn lift_power(lat: &GramLattice, a: &Lift, k: i64) -> Result<Lift> {
    let base = if k < 0 { lift_inverse(lat, a)? } else { a.clone() };
    let mut acc = Lift::identity(a.vphase.len());
    for _ in 0..k.unsigned_abs() {
        acc = lift_compose(lat, &acc, &base);
    }
    Ok(acc)
}

/// Pointwise equality of lifts: same lattice map and same phase function.
/// The phase is a quadratic-times-homomorphism expression, so values on the
/// basis and on all pairwise sums determine it.
pub fn lift_eq(lat: &GramLattice, a: &Lift, b: &Lift) -> bool {
    if a.map != b.map {
        return false;
    }
    let d = lat.rank;
    let unit = |i: usize| -> Vec<Int> {
        let mut v = vec![Int::zero(); d];
        v[i] = Int::from(1);
        v
    };
    for i in 0..d {
        if !a.eta(lat, &unit(i)).eq(&b.eta(lat, &unit(i))) {
            return false;
        }
        for j in 0..i {
            let mut v = unit(i);
            v[j] = Int::from(1);
            if !a.eta(lat, &v).eq(&b.eta(lat, &v)) {
                return false;
            }
        }
    }
    true
}

pub fn is_identity_lift(lat: &GramLattice, a: &Lift) -> bool {
    lift_eq(lat, a, &Lift::identity(lat.rank))
}

/// The general closed-form lift of g with chosen basis phases:
/// η(Σ n_i v_i) = (-1)^{(α M̄, α)} Π phases_i^{n_i}, M = Ḡ - g Ḡ g^T.
pub fn general_lift(
    lat: &GramLattice,
    g: &LatticeMap,
    basis_phases: Option<&[Cyclotomic]>,
) -> Result<Lift> {
    if !g.is_automorphism(lat) {
        return Err(Error::NotAnAutomorphism("general_lift".into()));
    }
    let eps = EpsilonCocycle::new(lat)?;
    let gbar = eps.halved_gram();
    let m = gbar.sub(&g.matrix.mul(gbar).mul(&g.matrix.transpose()));
    // antisymmetry of M (holds iff g preserves the form)
    if !m.add(&m.transpose()).is_zero() {
        return Err(Error::InternalInconsistency("anti-symmetry of M failed".into()));
    }
    let d = lat.rank;
    // strict lower triangle; the square-root correction factor of the closed
    // form is 1 because the diagonal of an antisymmetric form vanishes
    let mut mbar = IMat::zero(d, d);
    for i in 0..d {
        for j in 0..i {
            mbar[(i, j)] = m[(i, j)].clone();
        }
    }
    let mut v = vec![Rat::zero(); d];
    if let Some(phases) = basis_phases {
        assert_eq!(phases.len(), d);
        let mut targets = Vec::with_capacity(d);
        for p in phases {
            let (mm, k) = p
                .as_root_of_unity()
                .ok_or_else(|| Error::ConductorOverflow(format!("basis phase {p:?}")))?;
            targets.push(Rat::new(Int::from(k), Int::from(mm)));
        }
        // solve <e_i, v> = targets_i, i.e. G v^T = t
        let g = QMat::from_int(&lat.gram);
        let ginv = g.inverse().expect("gram invertible");
        let t = QMat::from_rows_vec(vec![targets]).transpose();
        let w = ginv.mul(&t);
        for (i, x) in v.iter_mut().enumerate() {
            *x = w[(i, 0)].clone();
        }
    }
    Ok(Lift { map: g.clone(), quad: mbar, vphase: v })
}

/// A standard lift together with its order data.
#[derive(Debug, Clone)]
pub struct StandardLift {
    pub lift: Lift,
    pub order: u64,
    /// true when ord(ĝ) = 2 ord(g)
    pub doubled: bool,
}

/// Construct a lift whose phase is 1 on the fixed sublattice, by twisting the
/// general unit-phase lift with a homomorphism supported on the fixed basis.
pub fn standard_lift(lat: &GramLattice, g: &LatticeMap) -> Result<StandardLift> {
    let base = general_lift(lat, g, None)?;
    let data = analyze_automorphism(lat, g)?;
    let d = lat.rank;
    // basis of L given by preimage rows then fixed rows; ξ kills the phase on
    // the fixed rows and is trivial on the preimage rows
    let mut rows = data.preimages.clone();
    rows.extend(data.fixed_basis.clone());
    let basis = IMat::from_rows(rows);
    let mut targets = vec![Rat::zero(); d];
    for (j, fixed_row) in data.fixed_basis.iter().enumerate() {
        let val = base.eta(lat, fixed_row);
        let (mm, k) = val.as_root_of_unity().ok_or_else(|| {
            Error::InternalInconsistency("lift phase is not a root of unity".into())
        })?;
        // target exponent of ξ on this row: -k/m
        targets[data.preimages.len() + j] = -Rat::new(Int::from(k), Int::from(mm));
    }
    // solve (basis G) v^T = targets
    let bg = QMat::from_int(&basis.mul(&lat.gram));
    let t = QMat::from_rows_vec(vec![targets]).transpose();
    let w = bg
        .inverse()
        .ok_or_else(|| Error::InternalInconsistency("basis times gram not invertible".into()))?
        .mul(&t);
    let mut v = vec![Rat::zero(); d];
    for (i, x) in v.iter_mut().enumerate() {
        *x = w[(i, 0)].clone();
    }
    let lift = base.twist(&v);
    // standardness check on the fixed basis
    for row in &data.fixed_basis {
        if !lift.eta(lat, row).is_one() {
            return Err(Error::InternalInconsistency(
                "standard lift phase not trivial on the fixed lattice".into(),
            ));
        }
    }
    let order = data.order;
    let doubled = !is_identity_lift(lat, &lift_power(lat, &lift, order as i64)?);
    Ok(StandardLift { lift, order, doubled })
}

/// The homomorphism factor s(g,h) relating ĝĥ to a reference lift of gh,
/// returned as its exact values on the standard basis.
pub fn multiplication_factor(
    lat: &GramLattice,
    a: &Lift,
    b: &Lift,
    reference_ab: &Lift,
) -> Result<Vec<Cyclotomic>> {
    let composed = lift_compose(lat, a, b);
    if composed.map != reference_ab.map {
        return Err(Error::ValidationError(
            "reference lift has a different lattice part".into(),
        ));
    }
    let d = lat.rank;
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        let mut e = vec![Int::zero(); d];
        e[i] = Int::from(1);
        out.push(composed.eta(lat, &e).div(&reference_ab.eta(lat, &e))?);
    }
    Ok(out)
}

/// Splitting lift for the relations g^p = 1, h^q = 1, g h g^{-1} = h^φ.
///
/// Returns standard lifts (ĝ, ĥ) satisfying the same relations, or the
/// obstruction error when no homomorphism twist can repair them.
pub fn split_lift_semidirect(
    lat: &GramLattice,
    g: &LatticeMap,
    h: &LatticeMap,
    phi: i64,
    q: u64,
    p: u64,
) -> Result<(Lift, Lift)> {
    let d = lat.rank;
    if !g.pow(p).is_identity() || !h.pow(q).is_identity() {
        return Err(Error::ValidationError("generator orders do not match (q, p)".into()));
    }
    let phi_pos = phi.rem_euclid(q as i64) as u64;
    let conj = g
        .matrix
        .inverse_unimodular()?
        .mul(&h.matrix)
        .mul(&g.matrix);
    if conj != h.pow(phi_pos).matrix {
        return Err(Error::ValidationError("g h g^{-1} != h^phi on the lattice".into()));
    }

    let sg = standard_lift(lat, g)?;
    if sg.doubled {
        return Err(Error::OrderDoubled("g".into()));
    }
    let sh = standard_lift(lat, h)?;
    if sh.doubled {
        return Err(Error::OrderDoubled("h".into()));
    }

    let relation_defect = |gl: &Lift, hl: &Lift| -> Result<Lift> {
        // ĥ^{-φ} ĝ ĥ ĝ^{-1}: identity lattice part, homomorphism phase
        let inner = lift_compose(lat, hl, &lift_inverse(lat, gl)?);
        let inner = lift_compose(lat, gl, &inner);
        Ok(lift_compose(lat, &lift_power(lat, hl, -(phi_pos as i64))?, &inner))
    };
    let defect = relation_defect(&sg.lift, &sh.lift)?;
    if !defect.map.is_identity() {
        return Err(Error::InternalInconsistency("relation defect moved the lattice".into()));
    }
    // f(α): the scalar by which the relation fails; a homomorphism on L
    let f = |alpha: &[Int]| -> Cyclotomic { defect.eta(lat, alpha).conj() };
    {
        // homomorphism sanity on a pair
        let mut e0 = vec![Int::zero(); d];
        e0[0] = Int::from(1);
        let mut e1 = vec![Int::zero(); d];
        e1[d - 1] = Int::from(1);
        let mut sum = e0.clone();
        for (a, b) in sum.iter_mut().zip(&e1) {
            *a += b;
        }
        if !f(&sum).eq(&f(&e0).mul(&f(&e1))) {
            return Err(Error::InternalInconsistency(
                "relation defect is not a homomorphism".into(),
            ));
        }
    }

    // obstruction: f must vanish on ker(g^{-1}(h-1)(1-g))
    let ginv = g.matrix.inverse_unimodular()?;
    let h_minus_1 = h.matrix.sub(&IMat::identity(d));
    let one_minus_g = IMat::identity(d).sub(&g.matrix);
    let kmat = ginv.mul(&h_minus_1).mul(&one_minus_g);
    for krow in kmat.left_kernel() {
        if !f(&krow).is_one() {
            return Err(Error::ObstructionNonzero(format!("kernel vector {krow:?}")));
        }
    }

    // bases adapted to D = g^{-1} - Σ_{i<φ} h^i acting on L / L_h
    let hdata = analyze_automorphism(lat, h)?;
    let mut dmat = ginv.clone();
    let mut hp = IMat::identity(d);
    for _ in 0..phi_pos {
        dmat = dmat.sub(&hp);
        hp = hp.mul(&h.matrix);
    }
    let k = hdata.preimages.len(); // rank of L / L_h
    let mut basis_rows = hdata.preimages.clone();
    basis_rows.extend(hdata.fixed_basis.clone());
    let basis = IMat::from_rows(basis_rows);
    let basis_inv = basis.inverse_unimodular()?;
    // quotient action: coordinates of (α̃_i D) in the adapted basis, Λ_h part
    let mut dbar = IMat::zero(k, k);
    for i in 0..k {
        let img = dmat.apply_row(&hdata.preimages[i]);
        // coordinates of img in the adapted basis: img * basis^{-1}
        let coords = basis_inv.apply_row(&img);
        for j in 0..k {
            dbar[(i, j)] = coords[j].clone();
        }
    }
    let snf = crate::intmat::smith_normal_form(&dbar);
    let qbar_inv = snf.q.inverse_unimodular()?;
    let lift_to_l = |row: &[Int]| -> Vec<Int> {
        // integer combination of the preimage rows
        let mut out = vec![Int::zero(); d];
        for (c, prow) in row.iter().zip(&hdata.preimages) {
            for (o, x) in out.iter_mut().zip(prow) {
                *o += c * x;
            }
        }
        out
    };

    // ξ_h on the basis {β_i (divisor side), δ_j (kernel side), ε_j (fixed)}
    let mut xi_rows: Vec<Vec<Int>> = Vec::with_capacity(d);
    let mut xi_targets: Vec<Rat> = Vec::with_capacity(d);
    for i in 0..k {
        let brow = lift_to_l(&qbar_inv.row(i));
        let target = if i < snf.divisors.len() {
            let s: u64 = (&snf.divisors[i])
                .try_into()
                .map_err(|_| Error::InternalInconsistency("divisor too large".into()))?;
            let alpha = lift_to_l(&snf.p.row(i));
            let val = f(&alpha).principal_root(s)?;
            let (mm, kk) = val.as_root_of_unity().expect("principal root is a root of unity");
            Rat::new(Int::from(kk), Int::from(mm))
        } else {
            // kernel side: f(γ_i) must already be trivial
            let gamma = lift_to_l(&snf.p.row(i));
            if !f(&gamma).is_one() {
                return Err(Error::ObstructionNonzero(format!("gamma row {i}")));
            }
            Rat::zero()
        };
        xi_rows.push(brow);
        xi_targets.push(target);
    }
    for fixed_row in &hdata.fixed_basis {
        xi_rows.push(fixed_row.clone());
        xi_targets.push(Rat::zero());
    }
    let xi_basis = IMat::from_rows(xi_rows);
    let bg = QMat::from_int(&xi_basis.mul(&lat.gram));
    let t = QMat::from_rows_vec(vec![xi_targets]).transpose();
    let w = bg
        .inverse()
        .ok_or_else(|| Error::InternalInconsistency("xi basis times gram not invertible".into()))?
        .mul(&t);
    let mut v = vec![Rat::zero(); d];
    for (i, x) in v.iter_mut().enumerate() {
        *x = w[(i, 0)].clone();
    }
    let new_h = sh.lift.twist(&v);

    // the twist must keep ĥ standard
    for row in &hdata.fixed_basis {
        if !new_h.eta(lat, row).is_one() {
            return Err(Error::InternalInconsistency("twist broke standardness of ĥ".into()));
        }
    }
    // verify all three relations as operator identities
    if !is_identity_lift(lat, &lift_power(lat, &sg.lift, p as i64)?) {
        return Err(Error::OrderDoubled("g after split".into()));
    }
    if !is_identity_lift(lat, &lift_power(lat, &new_h, q as i64)?) {
        return Err(Error::OrderDoubled("h after split".into()));
    }
    let defect2 = relation_defect(&sg.lift, &new_h)?;
    if !is_identity_lift(lat, &defect2) {
        return Err(Error::InternalInconsistency(
            "splitting twist failed to repair the relation".into(),
        ));
    }
    Ok((sg.lift, new_h))
}

impl QMat {
    pub fn from_rows_vec(rows: Vec<Vec<Rat>>) -> QMat {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = QMat::zero(r, c);
        for (i, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), c);
            for (j, x) in row.into_iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        m
    }
}
