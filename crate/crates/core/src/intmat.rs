//! Dense integer matrices with exact linear algebra: products, determinants,
//! characteristic polynomials, Smith normal form, and integer solves.
//!
//! Vectors are rows throughout; matrices act on the right of row vectors.

use crate::error::{Error, Result};
use crate::znum::Int;
use num::traits::{One, Signed, Zero};
use num::Integer;

#[derive(Clone, PartialEq, Eq)]
pub struct IMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Int>,
}

impl std::fmt::Debug for IMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "IMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for IMat {
    type Output = Int;
    fn index(&self, (i, j): (usize, usize)) -> &Int {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Int {
        &mut self.data[i * self.cols + j]
    }
}

impl IMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IMat { rows, cols, data: vec![Int::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IMat::zero(n, n);
        for i in 0..n {
            m[(i, i)] = Int::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Int>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        IMat { rows: r, cols: c, data }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        IMat::from_rows(rows.iter().map(|r| r.iter().map(|&v| Int::from(v)).collect()).collect())
    }

    pub fn row(&self, i: usize) -> Vec<Int> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    if i == j {
                        self[(i, j)].is_one()
                    } else {
                        self[(i, j)].is_zero()
                    }
                })
            })
    }

    pub fn transpose(&self) -> IMat {
        let mut t = IMat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IMat) -> IMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &IMat) -> IMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &IMat) -> IMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn neg(&self) -> IMat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = -a.clone();
        }
        out
    }

    pub fn scale(&self, c: &Int) -> IMat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= c;
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> IMat {
        assert_eq!(self.rows, self.cols);
        let mut base = self.clone();
        let mut acc = IMat::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn trace(&self) -> Int {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self[(i, i)].clone()).sum()
    }

    /// Row vector times matrix: v * self.
    pub fn apply_row(&self, v: &[Int]) -> Vec<Int> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![Int::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for j in 0..self.cols {
                out[j] += vi * &self[(i, j)];
            }
        }
        out
    }

    /// Fraction-free determinant (Bareiss).
    pub fn det(&self) -> Int {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return Int::one();
        }
        let mut m = self.clone();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for k in 0..n - 1 {
            if m[(k, k)].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !m[(i, k)].is_zero()) else {
                    return Int::zero();
                };
                for j in 0..n {
                    let a = m[(k, j)].clone();
                    let b = m[(p, j)].clone();
                    m[(k, j)] = b;
                    m[(p, j)] = a;
                }
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)];
                    let (q, r) = num.div_rem(&prev);
                    debug_assert!(r.is_zero(), "Bareiss division must be exact");
                    m[(i, j)] = q;
                }
            }
            for i in k + 1..n {
                m[(i, k)] = Int::zero();
            }
            prev = m[(k, k)].clone();
        }
        sign * m[(n - 1, n - 1)].clone()
    }

    /// Exact inverse; requires det = ±1.
    pub fn inverse_unimodular(&self) -> Result<IMat> {
        let d = self.det();
        if !(d.clone().abs().is_one()) {
            return Err(Error::ValidationError(format!(
                "matrix is not unimodular (det = {d})"
            )));
        }
        let q = crate::ratmat::QMat::from_int(self)
            .inverse()
            .ok_or_else(|| Error::InternalInconsistency("unimodular matrix not invertible".into()))?;
        q.to_int()
            .ok_or_else(|| Error::InternalInconsistency("unimodular inverse not integral".into()))
    }

    /// Monic characteristic polynomial of a square matrix, low degree first.
    pub fn charpoly(&self) -> Vec<Int> {
        use crate::znum::Rat;
        let n = self.rows;
        // evaluate det(xI - A) at x = 0..=n, interpolate exactly
        let mut points = Vec::with_capacity(n + 1);
        for x in 0..=n as i64 {
            let mut m = self.neg();
            for i in 0..n {
                m[(i, i)] += Int::from(x);
            }
            points.push((Rat::from_integer(Int::from(x)), Rat::from_integer(m.det())));
        }
        // Lagrange interpolation
        let mut coeffs = vec![Rat::from_integer(Int::zero()); n + 1];
        for (i, (xi, yi)) in points.iter().enumerate() {
            // basis polynomial prod_{j != i} (x - xj)/(xi - xj)
            let mut basis = vec![Rat::from_integer(Int::one())];
            let mut denom = Rat::from_integer(Int::one());
            for (j, (xj, _)) in points.iter().enumerate() {
                if i == j {
                    continue;
                }
                let mut next = vec![Rat::from_integer(Int::zero()); basis.len() + 1];
                for (k, b) in basis.iter().enumerate() {
                    next[k + 1] += b.clone();
                    next[k] -= b * xj;
                }
                basis = next;
                denom *= xi - xj;
            }
            let w = yi / denom;
            for (k, b) in basis.iter().enumerate() {
                coeffs[k] += b * &w;
            }
        }
        coeffs
            .into_iter()
            .map(|c| {
                assert!(c.denom().is_one(), "characteristic polynomial must be integral");
                c.to_integer()
            })
            .collect()
    }

    /// Multiplicative order as an automorphism; errors past `cap`.
    pub fn order(&self, cap: u64) -> Result<u64> {
        let mut p = self.clone();
        for k in 1..=cap {
            if p.is_identity() {
                return Ok(k);
            }
            p = p.mul(self);
        }
        Err(Error::ValidationError(format!("order exceeds cap {cap}")))
    }
}

/// Smith normal form `P * A * Q = S` with unimodular `P`, `Q`.
#[derive(Debug, Clone)]
pub struct SmithDecomposition {
    pub p: IMat,
    pub q: IMat,
    pub s: IMat,
    /// Positive diagonal entries, divisibility chain `s[i] | s[i+1]`.
    pub divisors: Vec<Int>,
    /// Number of zero diagonal entries (on a square matrix: left-kernel rank).
    pub nullity: usize,
}

pub fn smith_normal_form(a: &IMat) -> SmithDecomposition {
    let (r, c) = (a.rows, a.cols);
    let mut b = a.clone();
    let mut p = IMat::identity(r);
    let mut q = IMat::identity(c);

    let swap_rows = |m: &mut IMat, i: usize, j: usize| {
        if i == j {
            return;
        }
        for k in 0..m.cols {
            let x = m[(i, k)].clone();
            let y = m[(j, k)].clone();
            m[(i, k)] = y;
            m[(j, k)] = x;
        }
    };
    let swap_cols = |m: &mut IMat, i: usize, j: usize| {
        if i == j {
            return;
        }
        for k in 0..m.rows {
            let x = m[(k, i)].clone();
            let y = m[(k, j)].clone();
            m[(k, i)] = y;
            m[(k, j)] = x;
        }
    };

    let dim = r.min(c);
    for k in 0..dim {
        // locate minimal nonzero entry in the trailing block
        let mut pivot: Option<(usize, usize)> = None;
        for i in k..r {
            for j in k..c {
                if !b[(i, j)].is_zero()
                    && pivot
                        .map(|(pi, pj)| b[(i, j)].abs() < b[(pi, pj)].abs())
                        .unwrap_or(true)
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        swap_rows(&mut b, k, pi);
        swap_rows(&mut p, k, pi);
        swap_cols(&mut b, k, pj);
        swap_cols(&mut q, k, pj);

        loop {
            if b[(k, k)].is_negative() {
                for j in 0..c {
                    b[(k, j)] = -b[(k, j)].clone();
                }
                for j in 0..r {
                    p[(k, j)] = -p[(k, j)].clone();
                }
            }
            // clear the pivot column
            let mut dirty = false;
            for i in k + 1..r {
                if b[(i, k)].is_zero() {
                    continue;
                }
                let qt = b[(i, k)].div_floor(&b[(k, k)]);
                if !qt.is_zero() {
                    for j in 0..c {
                        let d = &qt * &b[(k, j)];
                        b[(i, j)] -= d;
                    }
                    for j in 0..r {
                        let d = &qt * &p[(k, j)];
                        p[(i, j)] -= d;
                    }
                }
                if !b[(i, k)].is_zero() {
                    // remainder smaller than pivot: swap up and restart
                    swap_rows(&mut b, k, i);
                    swap_rows(&mut p, k, i);
                    dirty = true;
                    break;
                }
            }
            if dirty {
                continue;
            }
            // clear the pivot row
            for j in k + 1..c {
                if b[(k, j)].is_zero() {
                    continue;
                }
                let qt = b[(k, j)].div_floor(&b[(k, k)]);
                if !qt.is_zero() {
                    for i in 0..r {
                        let d = &qt * &b[(i, k)];
                        b[(i, j)] -= d;
                    }
                    for i in 0..c {
                        let d = &qt * &q[(i, k)];
                        q[(i, j)] -= d;
                    }
                }
                if !b[(k, j)].is_zero() {
                    swap_cols(&mut b, k, j);
                    swap_cols(&mut q, k, j);
                    dirty = true;
                    break;
                }
            }
            if dirty {
                continue;
            }
            // column may have been refilled by row operations
            if (k + 1..r).any(|i| !b[(i, k)].is_zero()) {
                continue;
            }
            // divisibility fix-up: pivot must divide the trailing block
            let mut offender = None;
            'scan: for i in k + 1..r {
                for j in k + 1..c {
                    if !(&b[(i, j)] % &b[(k, k)]).is_zero() {
                        offender = Some(i);
                        break 'scan;
                    }
                }
            }
            match offender {
                None => break,
                Some(i) => {
                    for j in 0..c {
                        let d = b[(i, j)].clone();
                        b[(k, j)] += d;
                    }
                    for j in 0..r {
                        let d = p[(i, j)].clone();
                        p[(k, j)] += d;
                    }
                }
            }
        }
    }

    let mut divisors = Vec::new();
    let mut nullity = 0;
    for k in 0..dim {
        if b[(k, k)].is_zero() {
            nullity += 1;
        } else {
            divisors.push(b[(k, k)].clone());
        }
    }
    // on non-square input count implicit zero rows/cols as nullity of the square part only
    SmithDecomposition { p, q, s: b, divisors, nullity: nullity + (r.min(c) - dim) }
}

/// Solve `x * A = b` over the integers. Returns one solution or None.
pub fn solve_left(a: &IMat, b: &[Int]) -> Option<Vec<Int>> {
    assert_eq!(b.len(), a.cols);
    let snf = smith_normal_form(a);
    // x A = b  =>  (x P^{-1}) S = b Q
    let c = snf.q.apply_row(b);
    let dim = a.rows.min(a.cols);
    let mut y = vec![Int::zero(); a.rows];
    for j in 0..a.cols {
        let s = if j < dim { snf.s[(j, j)].clone() } else { Int::zero() };
        if s.is_zero() {
            if !c[j].is_zero() {
                return None;
            }
        } else {
            let (q, r) = c[j].div_rem(&s);
            if !r.is_zero() {
                return None;
            }
            y[j] = q;
        }
    }
    Some(snf.p.apply_row(&y))
}

impl IMat {
    /// b * self (row vector times matrix), alias used where the name reads better.
    pub fn apply_row_left(&self, b: &[Int]) -> Vec<Int> {
        self.apply_row(b)
    }

    /// Basis (as rows) of the lattice generated by the rows of `self`,
    /// via integer row reduction to Hermite form.
    pub fn row_basis(&self) -> Vec<Vec<Int>> {
        let mut m = self.clone();
        let (rows, cols) = (m.rows, m.cols);
        let mut r = 0usize;
        for c in 0..cols {
            if r >= rows {
                break;
            }
            loop {
                // pick the minimal-|value| nonzero entry in column c at or below r
                let mut pick: Option<usize> = None;
                for i in r..rows {
                    if !m[(i, c)].is_zero()
                        && pick.map(|p| m[(i, c)].abs() < m[(p, c)].abs()).unwrap_or(true)
                    {
                        pick = Some(i);
                    }
                }
                let Some(p) = pick else { break };
                if p != r {
                    for j in 0..cols {
                        let x = m[(r, j)].clone();
                        let y = m[(p, j)].clone();
                        m[(r, j)] = y;
                        m[(p, j)] = x;
                    }
                }
                if m[(r, c)].is_negative() {
                    for j in 0..cols {
                        m[(r, j)] = -m[(r, j)].clone();
                    }
                }
                let mut done = true;
                for i in r + 1..rows {
                    if m[(i, c)].is_zero() {
                        continue;
                    }
                    let q = m[(i, c)].div_floor(&m[(r, c)]);
                    for j in 0..cols {
                        let d = &q * &m[(r, j)];
                        m[(i, j)] -= d;
                    }
                    if !m[(i, c)].is_zero() {
                        done = false;
                    }
                }
                if done {
                    break;
                }
            }
            if !m[(r, c)].is_zero() {
                // reduce entries above the pivot for a canonical form
                for i in 0..r {
                    let q = m[(i, c)].div_floor(&m[(r, c)]);
                    if !q.is_zero() {
                        for j in 0..cols {
                            let d = &q * &m[(r, j)];
                            m[(i, j)] -= d;
                        }
                    }
                }
                r += 1;
            }
        }
        (0..r).map(|i| m.row(i)).collect()
    }

    /// Basis of the left kernel `{x : x * self = 0}` as rows.
    pub fn left_kernel(&self) -> Vec<Vec<Int>> {
        let snf = smith_normal_form(self);
        let dim = self.rows.min(self.cols);
        let mut rows = Vec::new();
        for i in 0..self.rows {
            let zero = i >= dim || snf.s[(i, i)].is_zero();
            if zero {
                rows.push(snf.p.row(i));
            }
        }
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::znum::int;

    fn check_snf(a: &IMat) {
        let snf = smith_normal_form(a);
        let lhs = snf.p.mul(a).mul(&snf.q);
        assert_eq!(lhs, snf.s, "P A Q != S");
        assert!(snf.p.det().abs().is_one(), "P not unimodular");
        assert!(snf.q.det().abs().is_one(), "Q not unimodular");
        for w in snf.divisors.windows(2) {
            assert!((&w[1] % &w[0]).is_zero(), "divisibility chain broken");
        }
    }

    #[test]
    fn snf_zero_matrix() {
        let a = IMat::zero(2, 2);
        let snf = smith_normal_form(&a);
        assert!(snf.divisors.is_empty());
        assert_eq!(snf.nullity, 2);
        check_snf(&a);
    }

    #[test]
    fn snf_identity() {
        let a = IMat::identity(3);
        let snf = smith_normal_form(&a);
        assert_eq!(snf.divisors, vec![int(1), int(1), int(1)]);
        check_snf(&a);
    }

    #[test]
    fn snf_2x2_hand_reduced() {
        // row/column reduction by hand gives divisors (2, 4); 2*4 = |det| = 8
        let a = IMat::from_i64(&[&[2, 4], &[6, 8]]);
        let snf = smith_normal_form(&a);
        assert_eq!(snf.divisors, vec![int(2), int(4)]);
        assert_eq!(a.det().abs(), int(8));
        check_snf(&a);
    }

    #[test]
    fn snf_rectangular() {
        let a = IMat::from_i64(&[&[2, 4, 4], &[-6, 6, 12]]);
        check_snf(&a);
    }

    #[test]
    fn snf_known_4x4() {
        let a = IMat::from_i64(&[
            &[-6, 111, -36, 6],
            &[5, -672, 210, 74],
            &[0, -255, 81, 24],
            &[-7, 255, -81, -10],
        ]);
        let snf = smith_normal_form(&a);
        assert_eq!(snf.divisors, vec![int(1), int(3), int(21)]);
        assert_eq!(snf.nullity, 1);
        check_snf(&a);
    }

    #[test]
    fn det_and_charpoly() {
        let a = IMat::from_i64(&[&[2, 1], &[1, 2]]);
        assert_eq!(a.det(), int(3));
        // char poly x^2 - 4x + 3
        assert_eq!(a.charpoly(), vec![int(3), int(-4), int(1)]);
    }

    #[test]
    fn solve_left_works() {
        let a = IMat::from_i64(&[&[2, 0], &[0, 3]]);
        let b = vec![int(4), int(9)];
        let x = solve_left(&a, &b).unwrap();
        assert_eq!(a.apply_row(&x), b);
        assert!(solve_left(&a, &[int(1), int(0)]).is_none());
    }

    #[test]
    fn kernel_of_singular() {
        let a = IMat::from_i64(&[&[1, 2], &[2, 4]]);
        let k = a.left_kernel();
        assert_eq!(k.len(), 1);
        assert!(a.apply_row(&k[0]).iter().all(|v| v.is_zero()));
    }

    #[test]
    fn unimodular_inverse() {
        let a = IMat::from_i64(&[&[1, 2], &[0, 1]]);
        let inv = a.inverse_unimodular().unwrap();
        assert!(a.mul(&inv).is_identity());
    }
}
