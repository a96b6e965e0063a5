//! Bounded enumeration of lattice vectors under a positive definite form.
//!
//! Exact rational Cholesky bounds; vectors are emitted in lexicographic order
//! on their coordinates. With the `parallel` feature the search tree is split
//! over the range of the first coordinate.

use crate::error::{Error, Result};
use crate::lattice::GramLattice;
use crate::ratmat::{ldl_lex, Ldl, QMat};
use crate::znum::{ceil_minus_sqrt, floor_plus_sqrt, Int, Rat};
use num::traits::{Signed, Zero};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// All integer rows v with (v + shift) G (v + shift)^T <= 2B, in lexicographic
/// order. `gram` must be symmetric positive definite.
pub fn enumerate_by_norm_gram(
    gram: &QMat,
    bound2: &Rat, // the right-hand side 2B
    shift: Option<&[Rat]>,
) -> Result<Vec<Vec<Int>>> {
    if bound2.is_negative() {
        return Ok(Vec::new());
    }
    let n = gram.rows;
    if n == 0 {
        return Ok(vec![Vec::new()]);
    }
    let ldl = ldl_lex(gram).ok_or(Error::NotPositiveDefinite)?;
    let zero_shift = vec![Rat::zero(); n];
    let shift = shift.unwrap_or(&zero_shift).to_vec();
    assert_eq!(shift.len(), n);

    // level-0 range for x_0: d_0 (x_0 + s_0)² ≤ 2B
    let c0 = shift[0].clone();
    let s2 = bound2 / &ldl.d[0];
    let lo = ceil_minus_sqrt(&(-c0.clone()), &s2);
    let hi = floor_plus_sqrt(&(-c0), &s2);

    let run_range = |x0: Int| -> Vec<Vec<Int>> {
        let mut out = Vec::new();
        let mut prefix = Vec::with_capacity(n);
        prefix.push(x0.clone());
        descend(&ldl, &shift, bound2, &mut prefix, &mut out);
        out
    };

    let mut lo_i = lo;
    let mut values = Vec::new();
    while lo_i <= hi {
        values.push(lo_i.clone());
        lo_i += 1u8;
    }

    #[cfg(feature = "parallel")]
    let chunks: Vec<Vec<Vec<Int>>> = values.into_par_iter().map(run_range).collect();
    #[cfg(not(feature = "parallel"))]
    let chunks: Vec<Vec<Vec<Int>>> = values.into_iter().map(run_range).collect();

    Ok(chunks.into_iter().flatten().collect())
}

fn descend(
    ldl: &Ldl,
    shift: &[Rat],
    bound2: &Rat,
    prefix: &mut Vec<Int>,
    out: &mut Vec<Vec<Int>>,
) {
    let n = ldl.d.len();
    let i = prefix.len();
    // accumulated value of the completed squares for coordinates < i
    let mut used = Rat::zero();
    for k in 0..i {
        let mut inner = Rat::from_integer(prefix[k].clone()) + &shift[k];
        for j in 0..k {
            inner += &ldl.l[k][j] * &(Rat::from_integer(prefix[j].clone()) + &shift[j]);
        }
        used += &ldl.d[k] * &inner * &inner;
    }
    if &used > bound2 {
        return;
    }
    if i == n {
        out.push(prefix.clone());
        return;
    }
    // bound for x_i: d_i (x_i + s_i + Σ_{j<i} l_ij (x_j + s_j))² ≤ 2B - used
    let mut center = shift[i].clone();
    for j in 0..i {
        center += &ldl.l[i][j] * &(Rat::from_integer(prefix[j].clone()) + &shift[j]);
    }
    let s2 = (bound2 - &used) / &ldl.d[i];
    let lo = ceil_minus_sqrt(&(-center.clone()), &s2);
    let hi = floor_plus_sqrt(&(-center), &s2);
    let mut x = lo;
    while x <= hi {
        prefix.push(x.clone());
        descend(ldl, shift, bound2, prefix, out);
        prefix.pop();
        x += 1u8;
    }
}

/// Enumerate v in the lattice with <v+shift | v+shift> <= 2B.
pub fn enumerate_by_norm(
    lat: &GramLattice,
    bound: &Rat,
    shift: Option<&[Rat]>,
) -> Result<Vec<Vec<Int>>> {
    let gram = QMat::from_int(&lat.gram);
    enumerate_by_norm_gram(&gram, &(bound * Rat::from_integer(Int::from(2))), shift)
}

/// Slow independent oracle: scan a rectangular coordinate box derived from the
/// dual form and filter by the exact norm. Intended for cross-checks on small
/// ranks only.
pub fn enumerate_box_oracle(lat: &GramLattice, bound: &Rat) -> Result<Vec<Vec<Int>>> {
    let n = lat.rank;
    let two_b = bound * Rat::from_integer(Int::from(2));
    if two_b.is_negative() {
        return Ok(Vec::new());
    }
    if n == 0 {
        return Ok(vec![Vec::new()]);
    }
    let ginv = QMat::from_int(&lat.gram)
        .inverse()
        .ok_or(Error::NotPositiveDefinite)?;
    // |x_i| ≤ sqrt(2B * (G^{-1})_{ii})
    let mut his = Vec::with_capacity(n);
    for i in 0..n {
        let gii = ginv[(i, i)].clone();
        if !gii.is_positive() {
            return Err(Error::NotPositiveDefinite);
        }
        his.push(floor_plus_sqrt(&Rat::zero(), &(&two_b * &gii)));
    }
    fn scan(
        lat: &GramLattice,
        his: &[Int],
        two_b: &Rat,
        v: &mut Vec<Int>,
        i: usize,
        out: &mut Vec<Vec<Int>>,
    ) {
        if i == v.len() {
            let norm = Rat::from_integer(lat.norm(v));
            if &norm <= two_b {
                out.push(v.clone());
            }
            return;
        }
        let mut x = -his[i].clone();
        while x <= his[i] {
            v[i] = x.clone();
            scan(lat, his, two_b, v, i + 1, out);
            x += 1u8;
        }
    }
    let mut out = Vec::new();
    let mut v = vec![Int::zero(); n];
    scan(lat, &his, &two_b, &mut v, 0, &mut out);
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::standard;
    use crate::znum::{int, rat, rat_int};

    #[test]
    fn a1_ball_of_radius_one() {
        // |n α|² = 2 n²; B = 1 keeps n ∈ {-1, 0, 1}
        let lat = standard::a1();
        let vs = enumerate_by_norm(&lat, &rat_int(1), None).unwrap();
        assert_eq!(vs, vec![vec![int(-1)], vec![int(0)], vec![int(1)]]);
    }

    #[test]
    fn zero_bound_keeps_origin() {
        let lat = standard::a2();
        let vs = enumerate_by_norm(&lat, &rat_int(0), None).unwrap();
        assert_eq!(vs.len(), 1);
        assert!(vs[0].iter().all(|c| c.is_zero()));
    }

    #[test]
    fn e8_kissing_number() {
        let lat = standard::e8();
        let vs = enumerate_by_norm(&lat, &rat_int(1), None).unwrap();
        let nonzero = vs.iter().filter(|v| !v.iter().all(|c| c.is_zero())).count();
        assert_eq!(nonzero, 240);
    }

    #[test]
    fn matches_box_oracle_on_a2() {
        let lat = standard::a2();
        for b in [0i64, 1, 2, 3, 5] {
            let fast = enumerate_by_norm(&lat, &rat_int(b), None).unwrap();
            let slow = enumerate_box_oracle(&lat, &rat_int(b)).unwrap();
            assert_eq!(fast, slow, "bound {b}");
        }
    }

    #[test]
    fn lex_order_and_shift() {
        let lat = standard::a2();
        let shift = [rat(1, 3), rat(1, 3)];
        let vs = enumerate_by_norm(&lat, &rat_int(2), Some(&shift)).unwrap();
        let mut sorted = vs.clone();
        sorted.sort();
        assert_eq!(vs, sorted);
        for v in &vs {
            let vr: Vec<Rat> = v
                .iter()
                .zip(&shift)
                .map(|(x, s)| Rat::from_integer(x.clone()) + s)
                .collect();
            assert!(lat.inner_rat(&vr, &vr) <= rat_int(4));
        }
    }

    #[test]
    fn rank_zero_lattice() {
        let lat = GramLattice::new(crate::intmat::IMat::zero(0, 0), true, true).unwrap();
        let vs = enumerate_by_norm(&lat, &rat_int(1), None).unwrap();
        assert_eq!(vs, vec![Vec::<Int>::new()]);
    }

    #[test]
    fn rejects_indefinite() {
        let g = crate::intmat::IMat::from_i64(&[&[0, 1], &[1, 0]]);
        let lat = GramLattice { rank: 2, gram: g, even: true, unimodular: false };
        assert!(enumerate_by_norm(&lat, &rat_int(1), None).is_err());
    }
}

/// Box-scan vector counts by norm with machine integers; exact for lattices
/// whose entries and scanned norms stay far below i64 range. Independent of
/// the pruned enumeration path.
pub fn enumerate_box_counts(
    lat: &GramLattice,
    bound: &Rat,
) -> Result<std::collections::BTreeMap<i64, u64>> {
    let n = lat.rank;
    let two_b = bound * Rat::from_integer(Int::from(2));
    let mut gram = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            gram[i][j] = (&lat.gram[(i, j)])
                .try_into()
                .map_err(|_| Error::ValidationError("gram entry too large for the box scan".into()))?;
        }
    }
    let ginv = QMat::from_int(&lat.gram)
        .inverse()
        .ok_or(Error::NotPositiveDefinite)?;
    let mut his = vec![0i64; n];
    for i in 0..n {
        let gii = ginv[(i, i)].clone();
        if !gii.is_positive() {
            return Err(Error::NotPositiveDefinite);
        }
        his[i] = (&crate::znum::floor_plus_sqrt(&Rat::zero(), &(&two_b * &gii)))
            .try_into()
            .map_err(|_| Error::ValidationError("box too large".into()))?;
    }
    let cap: i64 = (&two_b.floor().to_integer())
        .try_into()
        .map_err(|_| Error::ValidationError("bound too large".into()))?;
    let mut counts = std::collections::BTreeMap::new();
    let mut v = vec![0i64; n];
    // iterative odometer over the box
    for i in 0..n {
        v[i] = -his[i];
    }
    'outer: loop {
        let mut norm = 0i64;
        for a in 0..n {
            if v[a] != 0 {
                let row = &gram[a];
                let va = v[a];
                for b in 0..n {
                    norm += va * row[b] * v[b];
                }
            }
        }
        if norm <= cap {
            *counts.entry(norm).or_insert(0) += 1;
        }
        let mut i = 0;
        loop {
            if i == n {
                break 'outer;
            }
            v[i] += 1;
            if v[i] <= his[i] {
                break;
            }
            v[i] = -his[i];
            i += 1;
        }
    }
    Ok(counts)
}
