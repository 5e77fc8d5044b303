//! Integer normal forms: Smith (with unimodular transforms) and a column
//! Hermite form used to pick canonical coset representatives.

use crate::matrix::{IntScalar, Matrix};

/// Smith decomposition u * m * v = d with u, v unimodular and d diagonal,
/// nonnegative, each entry dividing the next.
#[derive(Debug, Clone)]
pub struct SmithForm<T> {
    pub u: Matrix<T>,
    pub d: Matrix<T>,
    pub v: Matrix<T>,
}

impl<T: IntScalar> SmithForm<T> {
    /// Diagonal entries of d, padded with zeros up to min(rows, cols).
    pub fn diagonal(&self) -> Vec<T> {
        let n = self.d.rows().min(self.d.cols());
        (0..n).map(|i| self.d[(i, i)].clone()).collect()
    }

    /// Number of nonzero diagonal entries.
    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

/// Smith normal form by alternating row and column reduction.
///
/// The pivot at step t is chosen as the entry of smallest nonzero absolute
/// value in the trailing submatrix, lowest row then column on ties, which
/// makes the output deterministic.
pub fn smith_normal_form<T: IntScalar>(m: &Matrix<T>) -> SmithForm<T> {
    let rows = m.rows();
    let cols = m.cols();
    let mut d = m.clone();
    let mut u = Matrix::<T>::identity(rows);
    let mut v = Matrix::<T>::identity(cols);

    let steps = rows.min(cols);
    for t in 0..steps {
        let Some((pi, pj)) = min_nonzero(&d, t) else {
            break;
        };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);

        loop {
            // Clear below the pivot. Remainders smaller than the pivot get
            // swapped up, shrinking |pivot| until the column is clean.
            let mut dirty = false;
            for i in t + 1..rows {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = -(d[(i, t)].clone() / d[(t, t)].clone());
                if !q.is_zero() {
                    d.row_axpy(i, t, &q);
                    u.row_axpy(i, t, &q);
                }
                if !d[(i, t)].is_zero() {
                    d.swap_rows(t, i);
                    u.swap_rows(t, i);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // Clear to the right of the pivot.
            for j in t + 1..cols {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = -(d[(t, j)].clone() / d[(t, t)].clone());
                if !q.is_zero() {
                    d.col_axpy(j, t, &q);
                    v.col_axpy(j, t, &q);
                }
                if !d[(t, j)].is_zero() {
                    d.swap_cols(t, j);
                    v.swap_cols(t, j);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // Row clearing may have refilled the column; check both.
            let col_clean = (t + 1..rows).all(|i| d[(i, t)].is_zero());
            let row_clean = (t + 1..cols).all(|j| d[(t, j)].is_zero());
            if !col_clean || !row_clean {
                continue;
            }
            // Enforce divisibility: the pivot must divide everything in the
            // trailing block. Folding an offending row into row t restarts
            // the reduction with a strictly smaller pivot eventually.
            let offender = (t + 1..rows).find_map(|i| {
                (t + 1..cols)
                    .find(|&j| !(d[(i, j)].clone() % d[(t, t)].clone()).is_zero())
                    .map(|j| (i, j))
            });
            match offender {
                Some((i, _)) => {
                    let one = T::one();
                    d.row_axpy(t, i, &one);
                    u.row_axpy(t, i, &one);
                }
                None => break,
            }
        }

        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    SmithForm { u, d, v }
}

fn min_nonzero<T: IntScalar>(d: &Matrix<T>, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(T, usize, usize)> = None;
    for i in t..d.rows() {
        for j in t..d.cols() {
            if d[(i, j)].is_zero() {
                continue;
            }
            let a = d[(i, j)].abs();
            match &best {
                Some((cur, _, _)) if *cur <= a => {}
                _ => best = Some((a, i, j)),
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

/// Column Hermite form of an integer matrix, viewed as a generating set for
/// the lattice spanned by its columns.
///
/// Columns are reduced to echelon shape: pivot rows strictly increase, each
/// pivot is positive, and every entry of a pivot row in an earlier column is
/// reduced into [0, pivot). Zero columns are dropped.
#[derive(Debug, Clone)]
pub struct ColumnHermite<T> {
    pub h: Matrix<T>,
    /// (row, column) of each pivot, rows strictly increasing.
    pub pivots: Vec<(usize, usize)>,
}

pub fn column_hermite<T: IntScalar>(m: &Matrix<T>) -> ColumnHermite<T> {
    let rows = m.rows();
    let cols = m.cols();
    let mut h = m.clone();
    let mut next_col = 0;
    let mut pivots = Vec::new();
    for r in 0..rows {
        if next_col == cols {
            break;
        }
        // gcd-combine the columns from next_col on until row r has a single
        // nonzero entry among them, parked at next_col.
        loop {
            let mut best: Option<(T, usize)> = None;
            for j in next_col..cols {
                if h[(r, j)].is_zero() {
                    continue;
                }
                let a = h[(r, j)].abs();
                match &best {
                    Some((cur, _)) if *cur <= a => {}
                    _ => best = Some((a, j)),
                }
            }
            let Some((_, jmin)) = best else {
                break;
            };
            h.swap_cols(next_col, jmin);
            let mut reduced_all = true;
            for j in next_col + 1..cols {
                if h[(r, j)].is_zero() {
                    continue;
                }
                let q = -(h[(r, j)].clone() / h[(r, next_col)].clone());
                if !q.is_zero() {
                    h.col_axpy(j, next_col, &q);
                }
                if !h[(r, j)].is_zero() {
                    reduced_all = false;
                }
            }
            if reduced_all {
                break;
            }
        }
        if h[(r, next_col)].is_zero() {
            continue;
        }
        if h[(r, next_col)].is_negative() {
            h.negate_col(next_col);
        }
        // Reduce earlier columns against the new pivot.
        for j in 0..next_col {
            let q = -h[(r, j)].div_floor(&h[(r, next_col)]);
            if !q.is_zero() {
                h.col_axpy(j, next_col, &q);
            }
        }
        pivots.push((r, next_col));
        next_col += 1;
    }
    let keep: Vec<usize> = (0..next_col).collect();
    let all_rows: Vec<usize> = (0..rows).collect();
    let h = h.select(&all_rows, &keep);
    ColumnHermite { h, pivots }
}

impl<T: IntScalar> ColumnHermite<T> {
    /// Canonical representative of x modulo the column lattice: pivot-row
    /// coordinates land in [0, pivot), coordinates without a pivot are
    /// untouched. Representatives are equal iff the vectors are congruent.
    pub fn reduce(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.h.rows(), "vector length mismatch");
        let mut x: Vec<T> = x.to_vec();
        for &(r, c) in &self.pivots {
            let q = x[r].div_floor(&self.h[(r, c)]);
            if q.is_zero() {
                continue;
            }
            for i in 0..self.h.rows() {
                let delta = self.h[(i, c)].clone() * q.clone();
                x[i] = x[i].clone() - delta;
            }
        }
        x
    }

    /// True when the lattice has full rank, i.e. the quotient is finite.
    pub fn full_rank(&self) -> bool {
        self.pivots.len() == self.h.rows()
    }

    /// Index of the lattice (product of pivots) when finite.
    pub fn index(&self) -> Option<T> {
        if !self.full_rank() {
            return None;
        }
        let mut acc = T::one();
        for &(r, c) in &self.pivots {
            acc = acc * self.h[(r, c)].clone();
        }
        Some(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{int, Int, IntMatrix};
    use num_traits::{Signed, Zero};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn im(rows: Vec<Vec<i64>>) -> IntMatrix {
        Matrix::from_rows(
            rows.into_iter().map(|r| r.into_iter().map(int).collect()).collect(),
        )
    }

    fn check_snf(m: &IntMatrix) -> SmithForm<Int> {
        let s = smith_normal_form(m);
        assert!(s.u.is_unimodular(), "u not unimodular");
        assert!(s.v.is_unimodular(), "v not unimodular");
        assert_eq!(s.u.mul(m).mul(&s.v), s.d, "u*m*v != d");
        let diag = s.diagonal();
        for i in 0..diag.len() {
            assert!(!diag[i].is_negative(), "negative diagonal");
            if i + 1 < diag.len() && !diag[i].is_zero() {
                assert!(
                    (diag[i + 1].clone() % diag[i].clone()).is_zero(),
                    "divisibility chain broken: {:?}",
                    diag
                );
            }
            if diag[i].is_zero() && i + 1 < diag.len() {
                assert!(diag[i + 1].is_zero(), "zero before nonzero on diagonal");
            }
        }
        // Off-diagonal entries of d vanish.
        for i in 0..s.d.rows() {
            for j in 0..s.d.cols() {
                if i != j {
                    assert!(s.d[(i, j)].is_zero());
                }
            }
        }
        s
    }

    #[test]
    fn diag_two_minus_two() {
        let s = check_snf(&im(vec![vec![2, 0], vec![0, -2]]));
        assert_eq!(s.diagonal(), vec![int(2), int(2)]);
    }

    #[test]
    fn diag_minus_three_minus_two() {
        let s = check_snf(&im(vec![vec![-3, 0], vec![0, -2]]));
        assert_eq!(s.diagonal(), vec![int(1), int(6)]);
    }

    #[test]
    fn zero_and_identity() {
        let s = check_snf(&IntMatrix::zeros(3, 2));
        assert_eq!(s.rank(), 0);
        let s = check_snf(&IntMatrix::identity(3));
        assert_eq!(s.diagonal(), vec![int(1), int(1), int(1)]);
    }

    #[test]
    fn known_three_by_three() {
        let m = im(vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]]);
        let s = check_snf(&m);
        let det = m.det();
        let prod: Int = s.diagonal().iter().product();
        assert_eq!(prod, det.abs());
    }

    #[test]
    fn rectangular_shapes() {
        check_snf(&im(vec![vec![2, 4, 6]]));
        check_snf(&im(vec![vec![2], vec![4], vec![6]]));
        check_snf(&im(vec![vec![1, 2, 3], vec![4, 5, 6]]));
    }

    #[test]
    fn random_matrices_decompose() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0001);
        for _ in 0..120 {
            let rows = rng.gen_range(1..=6);
            let cols = rng.gen_range(1..=6);
            let mut m = IntMatrix::zeros(rows, cols);
            for i in 0..rows {
                for j in 0..cols {
                    m[(i, j)] = int(rng.gen_range(-9..=9));
                }
            }
            let s = check_snf(&m);
            if rows == cols {
                let prod: Int = s.diagonal().iter().product();
                assert_eq!(prod, m.det().abs(), "|det| not preserved");
            }
        }
    }

    #[test]
    fn hermite_reduces_canonically() {
        // Lattice spanned by (2,0) and (0,2) inside Z^2.
        let h = column_hermite(&im(vec![vec![2, 0], vec![0, 2]]));
        assert!(h.full_rank());
        assert_eq!(h.index(), Some(int(4)));
        let r = h.reduce(&[int(5), int(-3)]);
        assert_eq!(r, vec![int(1), int(1)]);
        // Congruent vectors reduce identically.
        assert_eq!(h.reduce(&[int(7), int(1)]), r);
    }

    #[test]
    fn hermite_partial_rank_keeps_free_directions() {
        // Lattice spanned by (1,-1): quotient is Z, second coordinate after
        // folding the first to zero.
        let h = column_hermite(&im(vec![vec![1], vec![-1]]));
        assert!(!h.full_rank());
        assert_eq!(h.index(), None);
        let a = h.reduce(&[int(3), int(4)]);
        let b = h.reduce(&[int(0), int(7)]);
        assert_eq!(a, b);
        let c = h.reduce(&[int(0), int(6)]);
        assert_ne!(a, c);
    }

    #[test]
    fn hermite_reduction_is_representative_invariant() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0002);
        for _ in 0..60 {
            let n = rng.gen_range(1..=4);
            let k = rng.gen_range(0..=5);
            let mut m = IntMatrix::zeros(n, k);
            for i in 0..n {
                for j in 0..k {
                    m[(i, j)] = int(rng.gen_range(-6..=6));
                }
            }
            let h = column_hermite(&m);
            let x: Vec<Int> = (0..n).map(|_| int(rng.gen_range(-20..=20))).collect();
            // Shift x by a random lattice vector; the reduction must agree.
            let mut y = x.clone();
            for j in 0..k {
                let c = int(rng.gen_range(-3..=3));
                for i in 0..n {
                    y[i] = y[i].clone() + m[(i, j)].clone() * c.clone();
                }
            }
            assert_eq!(h.reduce(&x), h.reduce(&y));
        }
    }
}
