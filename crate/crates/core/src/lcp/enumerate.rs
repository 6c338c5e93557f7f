use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::LcpError;
use crate::rational::Q;

/// Largest instance accepted by [`brute_force_solve`].
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// Integer rows proportional to the rational rows of `[M | q]`.
struct ScaledRows {
    small: Option<Vec<Vec<i128>>>,
    big: Vec<Vec<BigInt>>,
    float: Vec<Vec<f64>>,
}

impl ScaledRows {
    fn new(rows: &[Vec<Q>]) -> Self {
        let big: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|row| {
                let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
                row.iter().map(|x| x.numer() * (&l / x.denom())).collect()
            })
            .collect();
        let small = big.iter().map(|row| row.iter().map(|x| x.to_i128()).collect::<Option<Vec<_>>>()).collect();
        let float = rows.iter().map(|row| row.iter().map(crate::rational::to_f64).collect()).collect();
        ScaledRows { small, big, float }
    }
}

/// Fraction-free elimination of `a` (square, possibly augmented on the right). `None` on overflow.
fn bareiss_i128(a: &mut [Vec<i128>]) -> Option<i128> {
    let n = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(r) = (k + 1..n).find(|&r| a[r][k] != 0) else {
                return Some(0);
            };
            a.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..cols {
                let v = a[i][j].checked_mul(a[k][k])?.checked_sub(a[i][k].checked_mul(a[k][j])?)?;
                a[i][j] = v / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    Some(if n == 0 { 1 } else { sign * a[n - 1][n - 1] })
}

fn bareiss_big(a: &mut [Vec<BigInt>]) -> BigInt {
    let n = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..cols {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    if n == 0 {
        BigInt::one()
    } else {
        sign * &a[n - 1][n - 1]
    }
}

/// Exact determinant of a square rational matrix.
pub fn determinant(a: &[Vec<Q>]) -> Q {
    let scaled = ScaledRows::new(a);
    let scale: BigInt = a
        .iter()
        .map(|row| row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom())))
        .product();
    let all: Vec<usize> = (0..a.len()).collect();
    Q::new(minor_scaled(&scaled, &all), scale)
}

fn minor_scaled(rows: &ScaledRows, subset: &[usize]) -> BigInt {
    if let Some(small) = &rows.small {
        let mut a: Vec<Vec<i128>> = subset.iter().map(|&i| subset.iter().map(|&j| small[i][j]).collect()).collect();
        if let Some(d) = bareiss_i128(&mut a) {
            return BigInt::from(d);
        }
    }
    let mut a: Vec<Vec<BigInt>> = subset.iter().map(|&i| subset.iter().map(|&j| rows.big[i][j].clone()).collect()).collect();
    bareiss_big(&mut a)
}

/// The principal minor of `m` on the index set `subset`.
pub fn principal_minor(m: &[Vec<Q>], subset: &[usize]) -> Q {
    let sub: Vec<Vec<Q>> = subset.iter().map(|&i| subset.iter().map(|&j| m[i][j].clone()).collect()).collect();
    determinant(&sub)
}

/// Checks every principal minor; returns the first index set with a negative minor, if any.
///
/// Row scaling by positive factors does not change the sign of a principal minor, so the
/// minors are evaluated on the integer-scaled matrix.
pub fn find_negative_principal_minor(m: &[Vec<Q>]) -> Option<Vec<usize>> {
    let n = m.len();
    let rows = ScaledRows::new(m);
    (1u64..(1u64 << n)).find_map(|mask| {
        let subset: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        minor_scaled(&rows, &subset).is_negative().then_some(subset)
    })
}

/// Exact Gaussian elimination; `None` if `a` is singular.
pub(crate) fn solve_exact(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).find(|&r| !a[r][k].is_zero())?;
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &a[k][k];
            for j in k..n {
                let d = &f * &a[k][j];
                a[i][j] -= d;
            }
            let d = &f * &b[k];
            b[i] -= d;
        }
    }
    let mut x = vec![Q::zero(); n];
    for i in (0..n).rev() {
        let mut s = b[i].clone();
        for j in i + 1..n {
            s -= &a[i][j] * &x[j];
        }
        x[i] = s / &a[i][i];
    }
    Some(x)
}

/// Every complementary basic solution of the LCP `(M, q)`.
///
/// Enumerates all supports `S`, solves `M_SS z_S = -q_S` and keeps the solutions with
/// `z ≥ 0` and `Mz + q ≥ 0`. Supports with a singular principal submatrix are skipped.
/// A floating-point pass discards clearly infeasible supports before the exact solve.
pub fn brute_force_solve(m: &[Vec<Q>], q: &[Q]) -> Result<Vec<Vec<Q>>, LcpError> {
    let n = q.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(LcpError::TooLarge { variables: n, limit: BRUTE_FORCE_LIMIT });
    }
    let augmented: Vec<Vec<Q>> = (0..n)
        .map(|i| {
            let mut row = m[i].clone();
            row.push(-q[i].clone());
            row
        })
        .collect();
    let rows = ScaledRows::new(&augmented);
    let mut found: Vec<Vec<Q>> = Vec::new();
    for mask in 0u64..(1u64 << n) {
        let subset: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let screened = match &rows.small {
            Some(small) => screen(small, &rows.float, &subset, n),
            None => Screen::Exact,
        };
        if screened == Screen::Reject {
            continue;
        }
        let a: Vec<Vec<Q>> = subset.iter().map(|&i| subset.iter().map(|&j| m[i][j].clone()).collect()).collect();
        let b: Vec<Q> = subset.iter().map(|&i| -q[i].clone()).collect();
        let Some(zs) = solve_exact(a, b) else { continue };
        let mut z = vec![Q::zero(); n];
        for (k, &i) in subset.iter().enumerate() {
            z[i] = zs[k].clone();
        }
        if is_solution(m, q, &z) && !found.contains(&z) {
            found.push(z);
        }
    }
    Ok(found)
}

#[derive(Debug, PartialEq, Eq)]
enum Screen {
    Reject,
    Exact,
}

fn screen(small: &[Vec<i128>], float: &[Vec<f64>], subset: &[usize], n: usize) -> Screen {
    const TOL: f64 = 1e-7;
    let k = subset.len();
    let mut a: Vec<Vec<i128>> = subset
        .iter()
        .map(|&i| subset.iter().map(|&j| small[i][j]).chain(std::iter::once(small[i][n])).collect())
        .collect();
    let Some(det) = bareiss_i128(&mut a) else {
        return Screen::Exact;
    };
    if det == 0 {
        return Screen::Reject;
    }
    let mut zs = vec![0f64; k];
    for i in (0..k).rev() {
        let mut s = a[i][k] as f64;
        for j in i + 1..k {
            s -= a[i][j] as f64 * zs[j];
        }
        zs[i] = s / a[i][i] as f64;
    }
    if zs.iter().any(|&z| z < -TOL) {
        return Screen::Reject;
    }
    let in_subset = {
        let mut v = vec![false; n];
        for &i in subset {
            v[i] = true;
        }
        v
    };
    for i in (0..n).filter(|&i| !in_subset[i]) {
        let w: f64 = subset.iter().zip(&zs).map(|(&j, z)| float[i][j] * z).sum::<f64>() - float[i][n];
        if w < -TOL {
            return Screen::Reject;
        }
    }
    Screen::Exact
}

/// Exact check of `z ≥ 0`, `Mz + q ≥ 0` and complementarity.
pub fn is_solution(m: &[Vec<Q>], q: &[Q], z: &[Q]) -> bool {
    if z.iter().any(|x| x.is_negative()) {
        return false;
    }
    (0..q.len()).all(|i| {
        let w: Q = m[i].iter().zip(z).filter(|(_, x)| !x.is_zero()).map(|(a, x)| a * x).sum::<Q>() + &q[i];
        !w.is_negative() && (z[i].is_zero() || w.is_zero())
    })
}
