use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};

use super::LcpError;
use crate::rational::Q;

/// Outcome of a successful run of Lemke's method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemkeSolution {
    pub z: Vec<Q>,
    pub pivots: usize,
}

/// Finds `z ≥ 0` with `w = Mz + q ≥ 0` and `zᵀw = 0`.
///
/// Complementary pivoting on the tableau `w - Mz - 1·z0 = q` with exact arithmetic and
/// lexicographic ratio tests, so degenerate instances cannot cycle.
pub fn lemke_solve(m: &[Vec<Q>], q: &[Q]) -> Result<LemkeSolution, LcpError> {
    let n = q.len();
    if m.len() != n || m.iter().any(|row| row.len() != n) {
        return Err(LcpError::Precondition("matrix and vector sizes differ".into()));
    }
    if q.iter().all(|x| !x.is_negative()) {
        return Ok(LemkeSolution { z: vec![Q::zero(); n], pivots: 0 });
    }
    let mut t = Tableau::new(m, q);
    let z0 = 2 * n;
    // The row attaining the most negative q, ties to the largest index, keeps every row lexico-positive.
    let first = (0..n)
        .filter(|&i| q[i].is_negative())
        .min_by(|&i, &j| q[i].cmp(&q[j]).then(j.cmp(&i)))
        .unwrap();
    let mut trail = Vec::new();
    let mut leaving = t.basis[first];
    trail.push((z0, leaving));
    t.pivot(first, z0);
    let cap: u128 = if n + 1 >= 127 { u128::MAX } else { 1u128 << (n + 1) };
    let mut pivots: u128 = 1;
    loop {
        let entering = complement(leaving, n);
        let Some(row) = t.ratio_test(entering) else {
            return Err(LcpError::RayTermination { pivots: trail });
        };
        leaving = t.basis[row];
        trail.push((entering, leaving));
        t.pivot(row, entering);
        pivots += 1;
        if leaving == z0 {
            break;
        }
        if pivots >= cap {
            return Err(LcpError::PivotCap { pivots: pivots as usize });
        }
    }
    let mut z = vec![Q::zero(); n];
    for (row, &var) in t.basis.iter().enumerate() {
        if (n..2 * n).contains(&var) {
            z[var - n] = t.rhs(row).clone();
        }
    }
    Ok(LemkeSolution { z, pivots: pivots as usize })
}

fn complement(var: usize, n: usize) -> usize {
    if var < n {
        var + n
    } else {
        var - n
    }
}

/// Columns: `w_0..w_n`, `z_0..z_n`, the artificial variable, then the right-hand side.
struct Tableau {
    n: usize,
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
}

impl Tableau {
    fn new(m: &[Vec<Q>], q: &[Q]) -> Self {
        let n = q.len();
        let rows = (0..n)
            .map(|i| {
                let mut row = vec![Q::zero(); 2 * n + 2];
                row[i] = Q::one();
                for j in 0..n {
                    row[n + j] = -m[i][j].clone();
                }
                row[2 * n] = -Q::one();
                row[2 * n + 1] = q[i].clone();
                row
            })
            .collect();
        Tableau { n, rows, basis: (0..n).collect() }
    }

    fn rhs(&self, row: usize) -> &Q {
        &self.rows[row][2 * self.n + 1]
    }

    /// Lexicographic minimum of `(rhs_i, B⁻¹_i) / col_i` over rows with a positive entry.
    fn ratio_test(&self, col: usize) -> Option<usize> {
        let candidates: Vec<usize> = (0..self.n).filter(|&i| self.rows[i][col].is_positive()).collect();
        candidates.into_iter().min_by(|&i, &j| self.lex_cmp(i, j, col))
    }

    fn lex_cmp(&self, i: usize, j: usize, col: usize) -> Ordering {
        let (pi, pj) = (&self.rows[i][col], &self.rows[j][col]);
        let keys = std::iter::once(2 * self.n + 1).chain(0..self.n);
        for k in keys {
            let ord = (&self.rows[i][k] * pj).cmp(&(&self.rows[j][k] * pi));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        Ordering::Equal
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        for x in self.rows[row].iter_mut() {
            if !x.is_zero() {
                *x /= &p;
            }
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let factor = r[col].clone();
            for (x, pv) in r.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *x -= &factor * pv;
                }
            }
        }
        self.basis[row] = col;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, q};

    fn m_single_arc() -> Vec<Vec<Q>> {
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, -1, 1, 1], [-1, 0, 1, 1]]
            .iter()
            .map(|r| r.iter().map(|&x| int(x)).collect())
            .collect()
    }

    #[test]
    fn single_arc_above_capacity() {
        let sol = lemke_solve(&m_single_arc(), &[int(-1), int(-2), int(0), int(0)]).unwrap();
        assert_eq!(sol.z, vec![int(1), int(2), int(2), int(0)]);
    }

    #[test]
    fn single_arc_below_capacity() {
        let sol = lemke_solve(&m_single_arc(), &[int(-1), q(-1, 2), int(0), int(0)]).unwrap();
        assert_eq!(sol.z, vec![int(1), int(1), q(1, 2), q(1, 2)]);
    }

    #[test]
    fn nonnegative_q_is_solved_by_zero() {
        let sol = lemke_solve(&m_single_arc(), &[int(0), int(0), int(1), int(0)]).unwrap();
        assert_eq!(sol.pivots, 0);
        assert!(sol.z.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn infeasible_instance_ends_on_a_ray() {
        // w = -z - 1 can never be non-negative.
        let err = lemke_solve(&[vec![int(-1)]], &[int(-1)]).unwrap_err();
        assert!(matches!(err, LcpError::RayTermination { .. }));
    }
}
