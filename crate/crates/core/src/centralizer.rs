//! The projective action of centralizer elements on the ground space Ω_0 of a
//! twisted module: exact intertwiner solve, cocycle extraction, and phase
//! linearization.

use crate::cyclotomic::Cyclotomic;
use crate::error::{Error, Result};
use crate::lifting::Lift;
use crate::twisted::{MonoMat, TwistedModuleData};
use num::traits::One;

/// Dense square matrix over Q(ξ).
#[derive(Debug, Clone)]
pub struct DMat {
    pub dim: usize,
    data: Vec<Cyclotomic>,
}

impl DMat {
    pub fn zero(dim: usize) -> Self {
        DMat { dim, data: vec![Cyclotomic::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = DMat::zero(dim);
        for i in 0..dim {
            *m.at_mut(i, i) = Cyclotomic::one();
        }
        m
    }

    pub fn at(&self, r: usize, c: usize) -> &Cyclotomic {
        &self.data[r * self.dim + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Cyclotomic {
        &mut self.data[r * self.dim + c]
    }

    pub fn scale(&self, s: &Cyclotomic) -> DMat {
        DMat { dim: self.dim, data: self.data.iter().map(|x| x.mul(s)).collect() }
    }

    pub fn mul(&self, other: &DMat) -> DMat {
        assert_eq!(self.dim, other.dim);
        let mut out = DMat::zero(self.dim);
        for r in 0..self.dim {
            for k in 0..self.dim {
                let a = self.at(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..self.dim {
                    let b = other.at(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a.mul(b);
                    let cur = out.at(r, c).add(&prod);
                    *out.at_mut(r, c) = cur;
                }
            }
        }
        out
    }

    /// self * M for monomial M.
    pub fn mul_mono(&self, m: &MonoMat) -> DMat {
        assert_eq!(self.dim, m.dim);
        let mut out = DMat::zero(self.dim);
        for c in 0..self.dim {
            let src = m.row_of[c];
            for r in 0..self.dim {
                *out.at_mut(r, c) = self.at(r, src).mul(&m.val[c]);
            }
        }
        out
    }

    /// M * self for monomial M.
    pub fn mono_mul(m: &MonoMat, rhs: &DMat) -> DMat {
        assert_eq!(rhs.dim, m.dim);
        let mut out = DMat::zero(rhs.dim);
        for c0 in 0..m.dim {
            let r = m.row_of[c0];
            // row r of output = val[c0] * row c0 of rhs
            for c in 0..rhs.dim {
                *out.at_mut(r, c) = m.val[c0].mul(rhs.at(c0, c));
            }
        }
        out
    }

    pub fn trace(&self) -> Cyclotomic {
        let mut t = Cyclotomic::zero();
        for i in 0..self.dim {
            t = t.add(self.at(i, i));
        }
        t
    }

    /// tr(M * self) for monomial M.
    pub fn trace_mono_mul(&self, m: &MonoMat) -> Cyclotomic {
        let mut t = Cyclotomic::zero();
        for c0 in 0..m.dim {
            let r = m.row_of[c0];
            // (M*self)[r, r] picks val[c0] * self[c0, r]; diagonal needs r
            t = t.add(&m.val[c0].mul(self.at(c0, r)));
        }
        t
    }

    pub fn pow(&self, e: u64) -> DMat {
        let mut acc = DMat::identity(self.dim);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eq(&self, other: &DMat) -> bool {
        self.dim == other.dim && self.data.iter().zip(&other.data).all(|(a, b)| a.eq(b))
    }

    pub fn as_scalar(&self) -> Option<Cyclotomic> {
        let first = self.at(0, 0).clone();
        for r in 0..self.dim {
            for c in 0..self.dim {
                if r == c {
                    if !self.at(r, c).eq(&first) {
                        return None;
                    }
                } else if !self.at(r, c).is_zero() {
                    return None;
                }
            }
        }
        Some(first)
    }
}

/// Weighted union-find over matrix entries: value[x] = weight[x] · value[root].
struct WeightedDsu {
    parent: Vec<usize>,
    weight: Vec<Cyclotomic>,
    dead: Vec<bool>,
}

impl WeightedDsu {
    fn new(n: usize) -> Self {
        WeightedDsu {
            parent: (0..n).collect(),
            weight: vec![Cyclotomic::one(); n],
            dead: vec![false; n],
        }
    }

    fn find(&mut self, x: usize) -> (usize, Cyclotomic) {
        if self.parent[x] == x {
            return (x, self.weight[x].clone());
        }
        let (root, w) = self.find(self.parent[x]);
        let total = self.weight[x].mul(&w);
        self.parent[x] = root;
        self.weight[x] = total.clone();
        (root, total)
    }

    /// impose value[a] = f · value[b]
    fn relate(&mut self, a: usize, b: usize, f: Cyclotomic) {
        let (ra, wa) = self.find(a);
        let (rb, wb) = self.find(b);
        if ra == rb {
            // consistency: wa = f · wb, else the whole class is forced to zero
            if !wa.eq(&f.mul(&wb)) {
                self.dead[ra] = true;
            }
            return;
        }
        // value[ra] = wa^{-1} value[a] = wa^{-1} f wb value[rb]
        let w = wa.inv().expect("weights are units").mul(&f).mul(&wb);
        self.parent[ra] = rb;
        self.weight[ra] = w;
        let dead = self.dead[ra] || self.dead[rb];
        self.dead[rb] = dead;
    }
}

/// Solve O U_{μ_i} = η_h(μ_i) U_{μ_i h} O over all coinvariant basis rows μ_i
/// by exact nullspace computation over the d² entry variables. The system is
/// 2-sparse per scalar equation (all U's are monomial), so the nullspace is
/// found by a weighted union-find over entries; Schur's lemma demands exactly
/// one consistent component.
pub fn centralizer_action(w: &TwistedModuleData, h: &Lift) -> Result<DMat> {
    if !w.lift.map.commutes_with(&h.map) {
        return Err(Error::NotCommuting);
    }
    let d = w.defect.dim;
    if d == 0 {
        return Ok(DMat::identity(0));
    }
    let mut dsu = WeightedDsu::new(d * d);
    for (i, mu) in w.auto.coinvariant_basis.iter().enumerate() {
        let u = &w.defect.basis_ops[i];
        let mu_h = h.map.apply(mu);
        let u_h = w.u_operator(&mu_h)?;
        let kappa = h.eta(&w.lat, mu);
        // column representation: U[row_of[c], c] = val[c]
        // constraint entries: O[r, u.row_of[c]] * u.val[c]
        //                    = κ * u_h.val[c0] * O[u_h.row_of -> ...]
        // use: (U_h O)[r, c] = u_h.val[inv_r] * O[inv_r, c] with inv_r = column
        // of u_h whose row is r
        let mut col_of = vec![usize::MAX; d];
        for c in 0..d {
            col_of[u_h.row_of[c]] = c;
        }
        for r in 0..d {
            let c0 = col_of[r];
            if c0 == usize::MAX {
                return Err(Error::InternalInconsistency("non-invertible U".into()));
            }
            let rhs_scale = kappa.mul(&u_h.val[c0]);
            for c in 0..d {
                // O[r, u.row_of[c]] * val[c] = rhs_scale * O[c0, c]
                let lhs_idx = r * d + u.row_of[c];
                let rhs_idx = c0 * d + c;
                let f = rhs_scale.div(&u.val[c])?;
                dsu.relate(lhs_idx, rhs_idx, f);
            }
        }
    }
    // collect consistent components
    let mut roots: Vec<(usize, bool)> = Vec::new();
    for x in 0..d * d {
        let (r, _) = dsu.find(x);
        if !roots.iter().any(|&(rr, _)| rr == r) {
            let dead = dsu.dead[r];
            roots.push((r, dead));
        }
    }
    let live: Vec<usize> = roots.iter().filter(|&&(_, dd)| !dd).map(|&(r, _)| r).collect();
    if live.len() != 1 {
        return Err(Error::SolutionSpaceNotOneDim(format!(
            "{} consistent components",
            live.len()
        )));
    }
    let root = live[0];
    let mut out = DMat::zero(d);
    let mut entries: Vec<(usize, Cyclotomic)> = Vec::new();
    for x in 0..d * d {
        let (r, wgt) = dsu.find(x);
        if r == root {
            entries.push((x, wgt));
        }
    }
    // normalize the lexicographically first entry to 1
    entries.sort_by_key(|(x, _)| *x);
    let base = entries[0].1.inv()?;
    for (x, wgt) in entries {
        out.data[x] = wgt.mul(&base);
    }
    // exact residual check of every constraint
    for (i, mu) in w.auto.coinvariant_basis.iter().enumerate() {
        let u = &w.defect.basis_ops[i];
        let mu_h = h.map.apply(mu);
        let u_h = w.u_operator(&mu_h)?;
        let kappa = h.eta(&w.lat, mu);
        let lhs = out.mul_mono(u);
        let rhs = DMat::mono_mul(&u_h.scale(&kappa), &out);
        if !lhs.eq(&rhs) {
            return Err(Error::InternalInconsistency(format!(
                "intertwining residual nonzero at basis row {i}"
            )));
        }
    }
    Ok(out)
}

/// O^n must be a scalar by Schur; returns it.
pub fn order_scalar(o: &DMat, n: u64) -> Result<Cyclotomic> {
    o.pow(n)
        .as_scalar()
        .ok_or_else(|| Error::InternalInconsistency("O^n is not scalar".into()))
}

/// Rescale O so that O^n = 1 (principal choice among the n possibilities).
pub fn linearize_cyclic(o: &DMat, n: u64) -> Result<DMat> {
    let c = order_scalar(o, n)?;
    let u = c.inv()?.principal_root_scalar(n)?;
    Ok(o.scale(&u))
}

/// The 2-cocycle value c(h1, h2) with respect to given actions.
pub fn cocycle_value(o1: &DMat, o2: &DMat, o12: &DMat) -> Result<Cyclotomic> {
    // O1 O2 = c(h1,h2) O12
    let prod = o1.mul(o2);
    // find scale: first nonzero entry of o12
    for idx in 0..o12.dim * o12.dim {
        let (r, c) = (idx / o12.dim, idx % o12.dim);
        if !o12.at(r, c).is_zero() {
            let scale = prod.at(r, c).div(o12.at(r, c))?;
            if prod.eq(&o12.scale(&scale)) {
                return Ok(scale);
            }
            return Err(Error::ProjectiveObstruction(
                "product is not proportional to the composite action".into(),
            ));
        }
    }
    Err(Error::InternalInconsistency("zero composite action".into()))
}

/// The multiplicative commutator scalar κ with O1 O2 = κ O2 O1; invariant
/// under rescaling of either action.
pub fn commutator_scalar(o1: &DMat, o2: &DMat) -> Result<Cyclotomic> {
    let ab = o1.mul(o2);
    let ba = o2.mul(o1);
    for idx in 0..ab.dim * ab.dim {
        let (r, c) = (idx / ab.dim, idx % ab.dim);
        if !ba.at(r, c).is_zero() {
            let k = ab.at(r, c).div(ba.at(r, c))?;
            if ab.eq(&ba.scale(&k)) {
                return Ok(k);
            }
            return Err(Error::ProjectiveObstruction(
                "actions do not commute up to scalar".into(),
            ));
        }
    }
    Err(Error::InternalInconsistency("zero product".into()))
}

/// Phase-linearization data for an abelian centralizer presented by commuting
/// generator actions with given orders: rescales each generator action so that
/// O_i^{n_i} = 1, and demands all pairwise commutator scalars be trivial.
pub fn linearize_abelian(actions: &[(DMat, u64)]) -> Result<Vec<DMat>> {
    let mut out = Vec::with_capacity(actions.len());
    for (o, n) in actions {
        out.push(linearize_cyclic(o, *n)?);
    }
    for i in 0..out.len() {
        for j in 0..i {
            let k = commutator_scalar(&out[i], &out[j])?;
            if !k.is_one() {
                return Err(Error::ProjectiveObstruction(format!(
                    "commutator scalar {k:?} between generators {j} and {i}"
                )));
            }
        }
    }
    Ok(out)
}

/// Scalar ratio needed to compare two series-valued normalizations; used by
/// the canonical-phase selection in the character layer.
pub fn phase_candidates(n: u64) -> Vec<Cyclotomic> {
    (0..n).map(|k| Cyclotomic::root_of_unity(n, k as i64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intmat::IMat;
    use crate::lattice::LatticeMap;
    use crate::lifting::{lift_power, standard_lift};
    use crate::standard;
    use crate::twisted::build_twisted_module;

    fn neg_module() -> TwistedModuleData {
        let lat = standard::e8();
        let neg = LatticeMap::new(IMat::identity(8).neg());
        let sl = standard_lift(&lat, &neg).unwrap();
        build_twisted_module(&lat, &sl.lift).unwrap()
    }

    #[test]
    fn identity_acts_as_identity() {
        let m = neg_module();
        let id = Lift::identity(8);
        let o = centralizer_action(&m, &id).unwrap();
        assert!(o.eq(&DMat::identity(16)));
    }

    #[test]
    fn action_of_g_on_its_own_module_is_scalar() {
        // for g = -1, μ g ≡ μ mod L(1-g), so O commutes with every U and must
        // be scalar; normalization makes it the identity
        let m = neg_module();
        let o = centralizer_action(&m, &m.lift).unwrap();
        assert!(o.as_scalar().is_some());
    }

    #[test]
    fn intertwiner_for_commuting_involution() {
        // the sneg involution commutes with s; build W_s and act with sneg
        let model = standard::e8_model();
        let lat = &model.lattice;
        let s = standard_lift(lat, &model.maps["s"]).unwrap();
        let m = build_twisted_module(lat, &s.lift).unwrap();
        let sneg = standard_lift(lat, &model.maps["sneg"]).unwrap();
        let o = centralizer_action(&m, &sneg.lift).unwrap();
        assert_eq!(o.dim, 2);
        // O^2 must be scalar; linearization succeeds
        let lin = linearize_cyclic(&o, 2).unwrap();
        assert!(lin.pow(2).as_scalar().unwrap().is_one());
    }

    #[test]
    fn rejects_non_commuting() {
        let model = standard::e8_model();
        let lat = &model.lattice;
        let t = standard_lift(lat, &model.maps["t"]).unwrap();
        let m = build_twisted_module(lat, &t.lift).unwrap();
        let s = standard_lift(lat, &model.maps["s"]).unwrap();
        assert!(matches!(
            centralizer_action(&m, &s.lift),
            Err(Error::NotCommuting)
        ));
    }

    #[test]
    fn cocycle_of_cyclic_action_linearizes() {
        let model = standard::e8_model();
        let lat = &model.lattice;
        let t = standard_lift(lat, &model.maps["t"]).unwrap();
        let m = build_twisted_module(lat, &t.lift).unwrap();
        let o = centralizer_action(&m, &t.lift).unwrap();
        let lin = linearize_cyclic(&o, 3).unwrap();
        let o2 = lin.mul(&lin);
        let o_id = DMat::identity(lin.dim);
        // c(t, t^2) = lin · o2 / O_{t^3 = e}
        let c = cocycle_value(&lin, &o2, &o_id).unwrap();
        assert!(c.is_one());
        // power consistency with the lifted power element
        let t2 = lift_power(lat, &t.lift, 2).unwrap();
        let o_t2 = centralizer_action(&m, &t2).unwrap();
        // O(t)^2 proportional to O(t^2)
        let _ = cocycle_value(&lin, &lin, &o_t2).unwrap();
    }

    #[test]
    fn mono_dense_products_agree() {
        let m = neg_module();
        let u = &m.defect.basis_ops[0];
        let dense_u = {
            let mut dm = DMat::zero(u.dim);
            for c in 0..u.dim {
                *dm.at_mut(u.row_of[c], c) = u.val[c].clone();
            }
            dm
        };
        let o = centralizer_action(&m, &Lift::identity(8)).unwrap();
        assert!(o.mul_mono(u).eq(&o.mul(&dense_u)));
        assert!(DMat::mono_mul(u, &o).eq(&dense_u.mul(&o)));
        let tr1 = o.trace_mono_mul(u);
        let tr2 = dense_u.mul(&o).trace();
        assert!(tr1.eq(&tr2));
    }
}
