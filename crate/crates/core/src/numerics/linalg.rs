use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

/// Solution of a dense complex system together with its 1-norm condition
/// estimate `||A||_1 ||A^{-1}||_1`.
#[derive(Debug, Clone)]
pub struct DenseSolution {
    pub x: DVector<Complex64>,
    pub condition: f64,
}

fn norm1(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// LU solve of `A x = b`; fails if the condition estimate exceeds `max_condition`.
pub fn solve_dense(
    a: DMatrix<Complex64>,
    b: &DVector<Complex64>,
    max_condition: f64,
) -> Result<DenseSolution> {
    if !a.is_square() || a.nrows() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "system shape {}x{} does not match right-hand side of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let anorm = norm1(&a);
    let lu = a.lu();
    let inv = lu.try_inverse().ok_or(Error::IllConditioned(f64::INFINITY))?;
    let condition = anorm * norm1(&inv);
    if !condition.is_finite() || condition > max_condition {
        return Err(Error::IllConditioned(condition));
    }
    let x = &inv * b;
    Ok(DenseSolution { x, condition })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        let a = DMatrix::from_row_slice(2, 2, &[one, i, -i, 2.0 * one]);
        let x0 = DVector::from_vec(vec![one + i, 3.0 * one]);
        let b = &a * &x0;
        let s = solve_dense(a, &b, 1e12).unwrap();
        assert!((s.x - x0).norm() < 1e-14);
        assert!(s.condition >= 1.0);
    }

    #[test]
    fn singular_system_is_rejected() {
        let one = Complex64::new(1.0, 0.0);
        let a = DMatrix::from_row_slice(2, 2, &[one, one, one, one]);
        let b = DVector::from_vec(vec![one, one]);
        assert!(matches!(solve_dense(a, &b, 1e12), Err(Error::IllConditioned(_))));
    }
}
