//! Dense rational matrices: exact Gaussian elimination, inverses, and
//! LDL-style decomposition of positive definite forms.

use crate::intmat::IMat;
use crate::znum::{Int, Rat};
use num::traits::{One, Signed, Zero};

#[derive(Clone, PartialEq, Eq)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rat>,
}

impl std::fmt::Debug for QMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "QMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for QMat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

impl QMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        QMat { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMat::zero(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_int(m: &IMat) -> Self {
        let mut out = QMat::zero(m.rows, m.cols);
        for i in 0..m.rows {
            for j in 0..m.cols {
                out[(i, j)] = Rat::from_integer(m[(i, j)].clone());
            }
        }
        out
    }

    pub fn to_int(&self) -> Option<IMat> {
        let mut out = IMat::zero(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if !self[(i, j)].denom().is_one() {
                    return None;
                }
                out[(i, j)] = self[(i, j)].to_integer();
            }
        }
        Some(out)
    }

    pub fn mul(&self, other: &QMat) -> QMat {
        assert_eq!(self.cols, other.rows);
        let mut out = QMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let p = &self[(i, k)] * &other[(k, j)];
                    out[(i, j)] += p;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> QMat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= c;
        }
        out
    }

    pub fn transpose(&self) -> QMat {
        let mut t = QMat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn apply_row(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![Rat::zero(); self.cols];
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

    pub fn inverse(&self) -> Option<QMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = QMat::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&i| !a[(i, col)].is_zero())?;
            if pivot != col {
                for j in 0..n {
                    let x = a[(col, j)].clone();
                    let y = a[(pivot, j)].clone();
                    a[(col, j)] = y;
                    a[(pivot, j)] = x;
                    let x = inv[(col, j)].clone();
                    let y = inv[(pivot, j)].clone();
                    inv[(col, j)] = y;
                    inv[(pivot, j)] = x;
                }
            }
            let p = a[(col, col)].clone();
            for j in 0..n {
                a[(col, j)] /= &p;
                inv[(col, j)] /= &p;
            }
            for i in 0..n {
                if i == col || a[(i, col)].is_zero() {
                    continue;
                }
                let f = a[(i, col)].clone();
                for j in 0..n {
                    let d = &f * &a[(col, j)];
                    a[(i, j)] -= d;
                    let d = &f * &inv[(col, j)];
                    inv[(i, j)] -= d;
                }
            }
        }
        Some(inv)
    }

    /// Solve `x * self = b` exactly (self square invertible).
    pub fn solve_row(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        let inv = self.inverse()?;
        Some(inv.apply_row(b))
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }
}

pub fn rat_from_int_vec(v: &[Int]) -> Vec<Rat> {
    v.iter().map(|x| Rat::from_integer(x.clone())).collect()
}

/// LDL data of a symmetric positive definite rational form, arranged so that
/// Q(x) = sum_i d[i] * (x_i + sum_{j<i} l[i][j] x_j)^2.
///
/// The completed square for x_i only involves earlier coordinates, so nested
/// enumeration with x_0 as the outer loop emits vectors in lexicographic order.
#[derive(Debug, Clone)]
pub struct Ldl {
    pub d: Vec<Rat>,
    /// l[i][j] defined for j < i.
    pub l: Vec<Vec<Rat>>,
}

/// Decompose by completing the square from the last variable upward.
pub fn ldl_lex(gram: &QMat) -> Option<Ldl> {
    assert!(gram.is_symmetric());
    let n = gram.rows;
    let mut a = gram.clone();
    let mut d = vec![Rat::zero(); n];
    let mut l = vec![vec![Rat::zero(); n]; n];
    for i in (0..n).rev() {
        let dii = a[(i, i)].clone();
        if !dii.is_positive() {
            return None;
        }
        d[i] = dii.clone();
        for j in 0..i {
            l[i][j] = &a[(i, j)] / &dii;
        }
        // absorb x_i into its square; update the leading block
        for k in 0..i {
            for j in 0..i {
                let delta = &a[(k, i)] * &a[(j, i)] / &dii;
                a[(k, j)] -= delta;
            }
        }
    }
    Some(Ldl { d, l })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::znum::{rat, rat_int};

    #[test]
    fn inverse_roundtrip() {
        let mut m = QMat::zero(2, 2);
        m[(0, 0)] = rat(2, 1);
        m[(0, 1)] = rat(1, 1);
        m[(1, 0)] = rat(1, 1);
        m[(1, 1)] = rat(2, 1);
        let inv = m.inverse().unwrap();
        let prod = m.mul(&inv);
        assert_eq!(prod, QMat::identity(2));
    }

    #[test]
    fn ldl_reconstructs_form() {
        // Gram of A2
        let mut g = QMat::zero(2, 2);
        g[(0, 0)] = rat_int(2);
        g[(0, 1)] = rat_int(-1);
        g[(1, 0)] = rat_int(-1);
        g[(1, 1)] = rat_int(2);
        let ldl = ldl_lex(&g).unwrap();
        // evaluate both on a few vectors
        for (x0, x1) in [(1i64, 0i64), (0, 1), (1, 1), (2, -3)] {
            let x = [rat_int(x0), rat_int(x1)];
            let direct = {
                let mut s = rat_int(0);
                for i in 0..2 {
                    for j in 0..2 {
                        s += &x[i] * &g[(i, j)] * &x[j];
                    }
                }
                s
            };
            let mut viald = rat_int(0);
            for i in 0..2 {
                let mut inner = x[i].clone();
                for j in 0..i {
                    inner += &ldl.l[i][j] * &x[j];
                }
                viald += &ldl.d[i] * &inner * &inner;
            }
            assert_eq!(direct, viald);
        }
    }

    #[test]
    fn ldl_rejects_indefinite() {
        let mut g = QMat::zero(1, 1);
        g[(0, 0)] = rat_int(-1);
        assert!(ldl_lex(&g).is_none());
    }
}
