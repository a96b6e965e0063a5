//! Bundled standard lattices and automorphism families used by the test
//! fixtures and the CLI demos.
//!
//! E8 is realized on a basis obtained from four orthogonal A2 blocks glued by
//! the tetracode; in that model the hexagonal rotation and the diagram flip of
//! each block give explicit automorphisms of E8:
//!
//! - `neg`: -1;
//! - `s`, `t`: a 2A and a 3C element generating S3 (s t s^{-1} = t^{-1});
//! - `sneg`: -s, commuting with s (⟨s, sneg⟩ ≅ Z2 × Z2);
//! - `g3a`, `g3b`: commuting order-3 elements generating Z3 × Z3, with all
//!   four cyclic subgroups fixing a rank-2 sublattice;
//! - `g6`: -g3a, of order 6.

use crate::intmat::IMat;
use crate::lattice::{GramLattice, LatticeMap};
use crate::ratmat::QMat;
use crate::znum::{Int, Rat};
use num::traits::Zero;
use std::collections::BTreeMap;

pub fn a1() -> GramLattice {
    GramLattice::new(IMat::from_i64(&[&[2]]), true, false).unwrap()
}

pub fn a2() -> GramLattice {
    GramLattice::new(IMat::from_i64(&[&[2, -1], &[-1, 2]]), true, false).unwrap()
}

/// The E8 lattice together with named automorphisms (see module docs).
pub struct E8Model {
    pub lattice: GramLattice,
    pub maps: BTreeMap<String, LatticeMap>,
}

pub fn e8() -> GramLattice {
    e8_model().lattice
}

pub fn e8_model() -> E8Model {
    // A2^4 block data
    let d = 8usize;
    let mut g4 = IMat::zero(d, d);
    for b in 0..4 {
        g4[(2 * b, 2 * b)] = Int::from(2);
        g4[(2 * b + 1, 2 * b + 1)] = Int::from(2);
        g4[(2 * b, 2 * b + 1)] = Int::from(-1);
        g4[(2 * b + 1, 2 * b)] = Int::from(-1);
    }

    // generators of E8 in A2^4 coordinates, scaled by 3:
    // the 8 block basis vectors plus glue words c * w1 with w1 = (2 e1 + e2)/3
    // and c running over tetracode generators (0,1,1,1), (1,0,1,2).
    let mut gens: Vec<Vec<Int>> = Vec::new();
    for i in 0..d {
        let mut row = vec![Int::zero(); d];
        row[i] = Int::from(3);
        gens.push(row);
    }
    let w1 = [Int::from(2), Int::from(1)]; // 3 * w1 in block coordinates
    for code in [[0i64, 1, 1, 1], [1, 0, 1, 2]] {
        let mut row = vec![Int::zero(); d];
        for (b, &c) in code.iter().enumerate() {
            row[2 * b] = &w1[0] * Int::from(c);
            row[2 * b + 1] = &w1[1] * Int::from(c);
        }
        gens.push(row);
    }
    let scaled = IMat::from_rows(gens);
    // fixed Hermite basis of the glued lattice (times 3); checked below
    let basis3 = IMat::from_i64(&[
        &[3, 0, 0, 0, 0, 0, 0, 0],
        &[0, 3, 0, 0, 0, 0, 0, 0],
        &[0, 0, 3, 0, 0, 0, 0, 0],
        &[0, 0, 0, 3, 0, 0, 0, 0],
        &[0, 0, 0, 0, 3, 0, 0, 0],
        &[1, 2, 1, 2, 2, 1, 0, 0],
        &[0, 0, 0, 0, 0, 0, 3, 0],
        &[2, 1, 1, 2, 0, 0, 2, 1],
    ]);
    // same lattice as the generators: every generator row lies in the span of
    // the basis and vice versa
    for i in 0..scaled.rows {
        assert!(
            crate::intmat::solve_left(&basis3, &scaled.row(i)).is_some(),
            "generator outside the frozen basis"
        );
    }
    for i in 0..d {
        assert!(
            crate::intmat::solve_left(&scaled, &basis3.row(i)).is_some(),
            "frozen basis row outside the generated lattice"
        );
    }
    // basis rows of E8 in A2^4 coordinates are basis3 / 3
    let mut b = QMat::zero(d, d);
    for i in 0..d {
        for j in 0..d {
            b[(i, j)] = Rat::new(basis3[(i, j)].clone(), Int::from(3));
        }
    }
    let b_inv = b.inverse().expect("basis invertible");
    let gram_q = b.mul(&QMat::from_int(&g4)).mul(&b.transpose());
    let gram = gram_q.to_int().expect("E8 gram must be integral");
    let lattice = GramLattice::new(gram, true, true).expect("E8 must be even unimodular");

    // block maps in A2^4 coordinates
    let rot = [[0i64, 1], [-1, -1]]; // order-3 rotation of one A2
    let block_diag = |blocks: [&[[i64; 2]; 2]; 4]| -> IMat {
        let mut m = IMat::zero(d, d);
        for (b, blk) in blocks.iter().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    m[(2 * b + i, 2 * b + j)] = Int::from(blk[i][j]);
                }
            }
        }
        m
    };
    let id2 = [[1i64, 0], [0, 1]];
    let rot2 = [[-1i64, -1], [1, 0]]; // rot^2

    let pick = |c: i64| -> &[[i64; 2]; 2] {
        match c.rem_euclid(3) {
            0 => &id2,
            1 => &rot,
            _ => &rot2,
        }
    };
    let omega_word = |c: [i64; 4]| block_diag([pick(c[0]), pick(c[1]), pick(c[2]), pick(c[3])]);

    let to_e8 = |m: IMat| -> LatticeMap {
        let q = b.mul(&QMat::from_int(&m)).mul(&b_inv);
        let m = q.to_int().expect("automorphism must preserve the glued lattice");
        LatticeMap::new(m)
    };

    let mut maps = BTreeMap::new();
    let neg = LatticeMap::new(IMat::identity(d).neg());
    // diagonal triality data of a D4 ⊕ D4 sublattice, transported to this
    // basis: s has cycle type 2^4 with an order-preserving standard lift,
    // t has type 1^2 3^2, and s t s^{-1} = t^{-1}
    let s = LatticeMap::new(IMat::from_i64(&[
        &[-1, 0, 0, 0, 0, -1, -1, 2],
        &[0, 0, 0, 0, 1, 0, 0, 0],
        &[0, 0, -1, 0, 0, 0, 0, 0],
        &[0, -1, 0, -1, -1, 2, 0, 0],
        &[0, 1, 0, 0, 0, 0, 0, 0],
        &[0, 0, 0, 0, 0, 1, 0, 0],
        &[0, 0, 0, 0, 0, 0, 1, 0],
        &[0, 0, 0, 0, 0, 0, 0, 1],
    ]));
    let t = LatticeMap::new(IMat::from_i64(&[
        &[2, 1, 1, 2, 0, 0, 1, -2],
        &[-1, -1, -1, -2, 0, 0, -1, 2],
        &[0, 0, 1, 0, 0, 0, 0, 0],
        &[-1, 0, -1, -1, 0, 0, -1, 2],
        &[-1, -2, -1, -2, -2, 3, 0, 0],
        &[-1, -1, -1, -2, -1, 1, -1, 2],
        &[0, 0, 0, 0, 0, 0, 1, 0],
        &[0, 0, 0, 0, 0, 0, 0, 1],
    ]));
    let sneg = LatticeMap::new(s.matrix.neg());
    let g3a = to_e8(omega_word([0, 1, 1, 1]));
    let g3b = to_e8(omega_word([1, 0, 1, 2]));
    let g6 = LatticeMap::new(g3a.matrix.neg());
    for (name, map) in [
        ("neg", neg),
        ("s", s),
        ("t", t),
        ("sneg", sneg),
        ("g3a", g3a),
        ("g3b", g3b),
        ("g6", g6),
    ] {
        assert!(map.is_automorphism(&lattice), "{name} must preserve E8");
        maps.insert(name.to_string(), map);
    }
    E8Model { lattice, maps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::analyze_automorphism;
    use num::traits::One;

    #[test]
    fn e8_is_even_unimodular_rank8() {
        let lat = e8();
        assert_eq!(lat.rank, 8);
        assert!(lat.gram.det().is_one());
    }

    #[test]
    fn model_orders_and_relations() {
        let m = e8_model();
        let s = &m.maps["s"];
        let t = &m.maps["t"];
        assert_eq!(s.order().unwrap(), 2);
        assert_eq!(t.order().unwrap(), 3);
        // s t s^{-1} = t^{-1} as group elements: s^{-1} t s matrixwise
        let conj = s
            .matrix
            .inverse_unimodular()
            .unwrap()
            .mul(&t.matrix)
            .mul(&s.matrix);
        assert_eq!(conj, t.pow(2).matrix);
        assert_eq!(m.maps["g3a"].order().unwrap(), 3);
        assert_eq!(m.maps["g3b"].order().unwrap(), 3);
        assert!(m.maps["g3a"].commutes_with(&m.maps["g3b"]));
        assert_eq!(m.maps["g6"].order().unwrap(), 6);
    }

    #[test]
    fn model_cycle_types() {
        let m = e8_model();
        let lat = &m.lattice;
        let s = analyze_automorphism(lat, &m.maps["s"]).unwrap();
        assert_eq!(s.cycle_type, BTreeMap::from([(2u64, 4i64)]));
        let t = analyze_automorphism(lat, &m.maps["t"]).unwrap();
        assert_eq!(t.cycle_type, BTreeMap::from([(1u64, 2i64), (3u64, 2i64)]));
        let sneg = analyze_automorphism(lat, &m.maps["sneg"]).unwrap();
        assert_eq!(sneg.cycle_type, BTreeMap::from([(2u64, 4i64)]));
        for name in ["g3a", "g3b"] {
            let a = analyze_automorphism(lat, &m.maps[name]).unwrap();
            assert_eq!(a.cycle_type, BTreeMap::from([(1u64, -1i64), (3u64, 3i64)]));
        }
        // products of the Z3 x Z3 pair along the other two lines
        let ab = m.maps["g3a"].then(&m.maps["g3b"]);
        let abb = m.maps["g3a"].then(&m.maps["g3b"].pow(2));
        for g in [ab, abb] {
            let a = analyze_automorphism(lat, &g).unwrap();
            assert_eq!(a.cycle_type, BTreeMap::from([(1u64, -1i64), (3u64, 3i64)]));
        }
    }
}
