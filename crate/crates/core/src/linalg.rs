//! Exact integer matrices and small dense helpers.

use std::fmt;

use dashu::integer::IBig;
use dashu::rational::RBig;
use nalgebra::DMatrix;

use crate::numeric::{ibig_ln, ibig_to_f64, Flt, Real};

#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<IBig>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![IBig::ZERO; rows * cols] }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d, d);
        for i in 0..d {
            m.data[i * d + i] = IBig::ONE;
        }
        m
    }

    /// `Id + E_{ij}`.
    pub fn elementary(d: usize, i: usize, j: usize) -> Self {
        let mut m = Self::identity(d);
        m.data[i * d + j] += IBig::ONE;
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, v) in row.iter().enumerate() {
                m.data[i * c + j] = IBig::from(*v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &IBig {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: IBig) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[IBig] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Row `i` += row `j`; this is left multiplication by `Id + E_{ij}`.
    pub fn add_row(&mut self, i: usize, j: usize) {
        let c = self.cols;
        for k in 0..c {
            let v = self.data[j * c + k].clone();
            self.data[i * c + k] += v;
        }
    }

    /// Row `i` -= row `j`; left multiplication by `Id - E_{ij}`.
    pub fn sub_row(&mut self, i: usize, j: usize) {
        let c = self.cols;
        for k in 0..c {
            let v = self.data[j * c + k].clone();
            self.data[i * c + k] -= v;
        }
    }

    /// Column `j` += column `i`; right multiplication by `Id + E_{ij}`.
    pub fn add_col(&mut self, i: usize, j: usize) {
        let c = self.cols;
        for k in 0..self.rows {
            let v = self.data[k * c + i].clone();
            self.data[k * c + j] += v;
        }
    }

    /// Column `j` -= column `i`; right multiplication by `Id - E_{ij}`.
    pub fn sub_col(&mut self, i: usize, j: usize) {
        let c = self.cols;
        for k in 0..self.rows {
            let v = self.data[k * c + i].clone();
            self.data[k * c + j] -= v;
        }
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if *a == IBig::ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if *b != IBig::ZERO {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        out
    }

    pub fn is_positive(&self) -> bool {
        self.data.iter().all(|v| *v > IBig::ZERO)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|v| *v >= IBig::ZERO)
    }

    /// Sum of absolute values of all entries.
    pub fn norm(&self) -> IBig {
        self.data.iter().map(|v| if *v < IBig::ZERO { -v } else { v.clone() }).sum()
    }

    pub fn log_norm(&self) -> f64 {
        ibig_ln(&self.norm())
    }

    pub fn max_row_sum(&self) -> IBig {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| if *v < IBig::ZERO { -v } else { v.clone() }).sum::<IBig>())
            .max()
            .unwrap_or(IBig::ZERO)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| ibig_to_f64(self.get(i, j)))
    }

    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| i64::try_from(v.clone()).ok()).collect())
            .collect()
    }

    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|v| v.to_string()).collect()).collect()
    }

    pub fn mul_real(&self, v: &[Real]) -> Vec<Real> {
        (0..self.rows)
            .map(|i| {
                let mut acc = v[0].mul_int(&IBig::ZERO);
                for (a, x) in self.row(i).iter().zip(v) {
                    if *a != IBig::ZERO {
                        acc = acc + x.mul_int(a);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn mul_flt(&self, v: &[Flt]) -> Vec<Flt> {
        (0..self.rows)
            .map(|i| {
                let mut acc = v[0].clone() * Flt::ZERO;
                for (a, x) in self.row(i).iter().zip(v) {
                    if *a != IBig::ZERO {
                        acc += x * Flt::from(a.clone());
                    }
                }
                acc
            })
            .collect()
    }

    pub fn determinant(&self) -> IBig {
        assert_eq!(self.rows, self.cols);
        let (_, det) = bareiss(self.clone());
        det
    }

    pub fn rank(&self) -> usize {
        bareiss(self.clone()).0
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Fraction-free elimination. Returns the rank and, for square input, the determinant.
fn bareiss(mut m: IntMatrix) -> (usize, IBig) {
    let (r, c) = (m.rows, m.cols);
    let mut prev = IBig::ONE;
    let mut rank = 0;
    let mut sign = IBig::ONE;
    for col in 0..c {
        if rank == r {
            break;
        }
        let Some(p) = (rank..r).find(|&i| *m.get(i, col) != IBig::ZERO) else {
            continue;
        };
        if p != rank {
            for k in 0..c {
                m.data.swap(p * c + k, rank * c + k);
            }
            sign = -sign;
        }
        let piv = m.get(rank, col).clone();
        for i in rank + 1..r {
            let f = m.get(i, col).clone();
            for k in col..c {
                let v = (&piv * m.get(i, k) - &f * m.get(rank, k)) / &prev;
                m.set(i, k, v);
            }
        }
        prev = piv;
        rank += 1;
    }
    let det = if r == c && rank == r { sign * prev } else { IBig::ZERO };
    (rank, det)
}

/// Basis of the right null space of an integer matrix, with integer entries.
pub fn nullspace(m: &IntMatrix) -> Vec<Vec<IBig>> {
    let (r, c) = (m.rows, m.cols);
    let mut a: Vec<Vec<RBig>> =
        (0..r).map(|i| m.row(i).iter().map(|v| RBig::from(v.clone())).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..c {
        if row == r {
            break;
        }
        let Some(p) = (row..r).find(|&i| a[i][col] != RBig::ZERO) else {
            continue;
        };
        a.swap(p, row);
        let piv = a[row][col].clone();
        for k in 0..c {
            a[row][k] = &a[row][k] / &piv;
        }
        for i in 0..r {
            if i != row && a[i][col] != RBig::ZERO {
                let f = a[i][col].clone();
                for k in 0..c {
                    let v = &a[i][k] - &f * &a[row][k];
                    a[i][k] = v;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free: Vec<usize> = (0..c).filter(|j| !pivots.contains(j)).collect();
    free.iter()
        .map(|&fcol| {
            let mut v = vec![RBig::ZERO; c];
            v[fcol] = RBig::ONE;
            for (pi, &pcol) in pivots.iter().enumerate() {
                v[pcol] = -a[pi][fcol].clone();
            }
            let lcm = v.iter().fold(IBig::ONE, |acc, x| {
                let d = IBig::from(x.denominator().clone());
                let g = dashu::base::Gcd::gcd(&acc, &d);
                &acc * &d / IBig::from(g)
            });
            v.iter().map(|x| x.numerator() * (&lcm / IBig::from(x.denominator().clone()))).collect()
        })
        .collect()
}

/// Orthonormal basis (columns) of the span of the given columns, dropping dependent ones.
pub fn orthonormalize(cols: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for c in cols {
        let mut v = c.clone();
        for _ in 0..2 {
            for q in &out {
                let p: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= p * y;
                }
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = c.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
        if n > tol * scale {
            out.push(v.iter().map(|x| x / n).collect());
        }
    }
    out
}

/// Orthonormal basis of the orthogonal complement of `span(basis)` in dimension `d`.
pub fn complement(basis: &[Vec<f64>], d: usize) -> Vec<Vec<f64>> {
    let mut all = orthonormalize(basis, 1e-12);
    let k = all.len();
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        all.push(e);
    }
    orthonormalize(&all, 1e-8).into_iter().skip(k).collect()
}

/// Orthonormal basis of the numerical null space of `m`.
pub fn nullspace_f64(m: &DMatrix<f64>, rel_tol: f64) -> Vec<Vec<f64>> {
    let g = m.transpose() * m;
    let eig = nalgebra::SymmetricEigen::new(g);
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max).max(1e-300);
    (0..eig.eigenvalues.len())
        .filter(|&k| eig.eigenvalues[k].abs() <= rel_tol * top)
        .map(|k| eig.eigenvectors.column(k).iter().cloned().collect())
        .collect()
}
