//! Exact Gaussian elimination over ℚ, plus the bridge from "polynomial
//! identity linear in some unknowns" to a coefficient matrix.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::poly::{Monomial, MultiPoly, Rational, Var};

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(rows: &mut Vec<Vec<Rational>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][col].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for j in 0..ncols {
                    let delta = &f * &rows[r][j];
                    rows[i][j] -= delta;
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

/// Basis of `{x : A x = 0}`, one vector per free column.
pub fn nullspace(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (row, &pc) in m.iter().zip(&pivots) {
                v[pc] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Error raised when a residual is not linear in the declared unknowns or
/// mixes them with operator variables in a way no coefficient row can carry.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("residual is not linear in the unknowns (monomial {0})")]
pub struct NotLinear(pub String);

/// Turns `residual = 0` (a polynomial identity in every variable other than
/// `unknowns`, with rational coefficients) into rows of a homogeneous system.
pub fn system_from_residual(
    residual: &MultiPoly,
    unknowns: &[Var],
) -> Result<Vec<Vec<Rational>>, NotLinear> {
    let mut rows: BTreeMap<Monomial, Vec<Rational>> = BTreeMap::new();
    for (mono, coeff) in residual.terms() {
        let hits: Vec<(usize, u32)> = unknowns
            .iter()
            .enumerate()
            .filter_map(|(i, u)| {
                let e = mono.exponent(*u);
                (e > 0).then_some((i, e))
            })
            .collect();
        let col = match hits.as_slice() {
            [(i, 1)] => *i,
            _ => return Err(NotLinear(format!("{mono:?}"))),
        };
        let mut rest = mono.exponents().to_vec();
        rest[unknowns[col].index()] = 0;
        let key = Monomial::from_exponents(rest);
        rows.entry(key)
            .or_insert_with(|| vec![Rational::zero(); unknowns.len()])[col] += coeff;
    }
    Ok(rows.into_values().collect())
}

/// Solves `M x = rhs` for an invertible rational matrix and polynomial
/// right-hand side. Returns `None` when `M` is singular.
pub fn solve_square(matrix: &[Vec<Rational>], rhs: &[MultiPoly]) -> Option<Vec<MultiPoly>> {
    let n = matrix.len();
    let mut a: Vec<Vec<Rational>> = matrix.to_vec();
    let mut b: Vec<MultiPoly> = rhs.to_vec();
    for col in 0..n {
        let p = (col..n).find(|&i| !a[i][col].is_zero())?;
        a.swap(col, p);
        b.swap(col, p);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        b[col] = b[col].scale(&inv);
        for i in 0..n {
            if i != col && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in 0..n {
                    let delta = &f * &a[col][j];
                    a[i][j] -= delta;
                }
                let delta = b[col].scale(&f);
                b[i] = &b[i] - &delta;
            }
        }
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse, rat};

    #[test]
    fn nullspace_of_rank_one() {
        let rows = vec![vec![rat(1), rat(2), rat(3)]];
        let ns = nullspace(&rows, 3);
        assert_eq!(ns.len(), 2);
        for v in ns {
            let dot: Rational = rows[0].iter().zip(&v).map(|(a, b)| a * b).sum();
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn full_rank_has_trivial_nullspace() {
        let rows = vec![vec![rat(1), rat(1)], vec![rat(1), rat(-1)]];
        assert!(nullspace(&rows, 2).is_empty());
    }

    #[test]
    fn residual_rows() {
        let u0 = Var::named("_t_u0");
        let u1 = Var::named("_t_u1");
        // (u0 + u1) * l + (u0 - u1) = 0 forces u0 = u1 = 0
        let r = parse("_t_u0*l + _t_u1*l + _t_u0 - _t_u1").unwrap();
        let rows = system_from_residual(&r, &[u0, u1]).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(nullspace(&rows, 2).is_empty());
        let bad = parse("_t_u0*_t_u1").unwrap();
        assert!(system_from_residual(&bad, &[u0, u1]).is_err());
    }

    #[test]
    fn square_solve_with_polynomial_rhs() {
        let m = vec![vec![rat(1), rat(1)], vec![rat(1), rat(2)]];
        let rhs = vec![parse("l").unwrap(), parse("l + m").unwrap()];
        let x = solve_square(&m, &rhs).unwrap();
        assert_eq!(x[0], parse("l - m").unwrap());
        assert_eq!(x[1], parse("m").unwrap());
        let singular = vec![vec![rat(1), rat(2)], vec![rat(2), rat(4)]];
        assert!(solve_square(&singular, &rhs).is_none());
    }
}
