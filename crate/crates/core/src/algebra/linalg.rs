//! Small exact linear solvers (Gaussian elimination with unit pivots).

use crate::error::{AResult, AlgebraError};

use super::Field;

/// Solve A·x = b over a field (or a local ring, where pivots must be units).
/// Consumes the matrix. Errors when no unit pivot can be found (singular
/// system, or not solvable with unit pivoting over ℤ/p^κ).
pub fn solve_square<F: Field>(mut a: Vec<Vec<F>>, mut b: Vec<F>) -> AResult<Vec<F>> {
    let n = a.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    assert!(a.iter().all(|row| row.len() == n) && b.len() == n);
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        // Find a row with an invertible pivot in this column.
        let mut pivot = None;
        for row in col..n {
            if let Ok(inv) = a[row][col].inv() {
                pivot = Some((row, inv));
                break;
            }
        }
        let (prow, pinv) = pivot.ok_or_else(|| {
            AlgebraError::NotInvertible(format!("no unit pivot in column {col}"))
        })?;
        a.swap(col, prow);
        b.swap(col, prow);
        perm.swap(col, prow);
        for row in 0..n {
            if row == col || a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].mul(&pinv);
            for k in col..n {
                let t = a[col][k].mul(&factor);
                a[row][k] = a[row][k].sub(&t);
            }
            let t = b[col].mul(&factor);
            b[row] = b[row].sub(&t);
        }
    }
    let mut x = Vec::with_capacity(n);
    for i in 0..n {
        x.push(b[i].mul(&a[i][i].inv()?));
    }
    Ok(x)
}

/// Solve a possibly non-square A·x = b exactly; returns one solution if the
/// system is consistent, None otherwise. Over fields only.
pub fn solve_rectangular<F: Field>(
    mut a: Vec<Vec<F>>,
    mut b: Vec<F>,
    ncols: usize,
) -> Option<Vec<F>> {
    let nrows = a.len();
    assert!(a.iter().all(|r| r.len() == ncols) && b.len() == nrows);
    let zero = b.first()?.zero_like();
    let mut pivot_cols = Vec::new();
    let mut row = 0usize;
    for col in 0..ncols {
        let mut sel = None;
        for r in row..nrows {
            if !a[r][col].is_zero() {
                sel = Some(r);
                break;
            }
        }
        let Some(sel) = sel else { continue };
        a.swap(row, sel);
        b.swap(row, sel);
        let pinv = a[row][col].inv().ok()?;
        for r in 0..nrows {
            if r == row || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].mul(&pinv);
            for k in col..ncols {
                let t = a[row][k].mul(&f);
                a[r][k] = a[r][k].sub(&t);
            }
            let t = b[row].mul(&f);
            b[r] = b[r].sub(&t);
        }
        pivot_cols.push((row, col));
        row += 1;
        if row == nrows {
            break;
        }
    }
    // Consistency: remaining rows must have zero rhs.
    for r in row..nrows {
        if !b[r].is_zero() {
            return None;
        }
    }
    let mut x = vec![zero; ncols];
    for (r, c) in pivot_cols {
        x[c] = b[r].mul(&a[r][c].inv().ok()?);
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat::Rat;

    #[test]
    fn solve_2x2() {
        let a = vec![
            vec![Rat::from_int(2), Rat::from_int(1)],
            vec![Rat::from_int(1), Rat::from_int(3)],
        ];
        let b = vec![Rat::from_int(5), Rat::from_int(10)];
        let x = solve_square(a, b).unwrap();
        assert_eq!(x, vec![Rat::from_int(1), Rat::from_int(3)]);
    }

    #[test]
    fn inconsistent_rectangular() {
        let a = vec![vec![Rat::from_int(1)], vec![Rat::from_int(1)]];
        let b = vec![Rat::from_int(1), Rat::from_int(2)];
        assert!(solve_rectangular(a, b, 1).is_none());
    }
}
