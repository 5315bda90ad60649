//! Dense solves and spectral estimates for Galerkin systems.
//!
//! Matrices on the imaginary wavenumber axis are real symmetric positive
//! definite and go through Cholesky; everything else uses LU with partial
//! pivoting. Spectral quantities are deterministic power/inverse-power
//! iterations (fixed start vector, fixed iteration budget).

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative residual contract for direct solves.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-10;

const POWER_ITERS: usize = 300;
const POWER_TOL: f64 = 1e-12;

/// True when every entry of the system is exactly real (imaginary-axis
/// wavenumber assemblies).
pub fn is_real(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> bool {
    a.iter().all(|z| z.im == 0.0) && b.iter().all(|z| z.im == 0.0)
}

pub fn real_part(a: &DMatrix<Complex64>) -> DMatrix<f64> {
    a.map(|z| z.re)
}

/// Solve `A x = b` by dense factorization with partial pivoting (Cholesky on
/// the real SPD fast path), enforcing the relative-residual contract.
pub fn solve_dense(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    assert_eq!(n, b.len());
    let bnorm = b.norm();
    if bnorm == 0.0 {
        return Ok(DVector::from_element(n, Complex64::new(0.0, 0.0)));
    }

    let x = if is_real(a, b) {
        let ar = real_part(a);
        let br = b.map(|z| z.re);
        let xr = match Cholesky::new(ar.clone()) {
            Some(chol) => chol.solve(&br),
            None => nalgebra::linalg::LU::new(ar.clone())
                .solve(&br)
                .ok_or_else(|| Error::SingularMatrix {
                    rcond: rcond_estimate_real(&ar),
                })?,
        };
        xr.map(|v| Complex64::new(v, 0.0))
    } else {
        let lu = nalgebra::linalg::LU::new(a.clone());
        lu.solve(b).ok_or_else(|| Error::SingularMatrix {
            rcond: rcond_estimate(a),
        })?
    };

    let residual = (a * &x - b).norm() / bnorm;
    if !(residual <= SOLVE_RESIDUAL_TOL) {
        return Err(Error::SingularMatrix {
            rcond: rcond_estimate(a),
        });
    }
    Ok(x)
}

fn rcond_estimate(a: &DMatrix<Complex64>) -> f64 {
    let lu = nalgebra::linalg::LU::new(a.clone());
    let u = lu.u();
    let diag: Vec<f64> = (0..u.nrows().min(u.ncols()))
        .map(|i| u[(i, i)].norm())
        .collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

fn rcond_estimate_real(a: &DMatrix<f64>) -> f64 {
    rcond_estimate(&a.map(|v| Complex64::new(v, 0.0)))
}

/// Largest singular value via power iteration on `A^H A`.
pub fn sigma_max(a: &DMatrix<Complex64>) -> f64 {
    let n = a.ncols();
    if n == 0 {
        return 0.0;
    }
    let mut v = DVector::from_element(n, Complex64::new(1.0, 0.0)).normalize();
    let mut sigma = 0.0;
    for _ in 0..POWER_ITERS {
        let av = a * &v;
        let w = a.adjoint() * av;
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        v = w / Complex64::new(nw, 0.0);
        let new_sigma = (a * &v).norm();
        if (new_sigma - sigma).abs() <= POWER_TOL * new_sigma.max(1e-300) {
            return new_sigma;
        }
        sigma = new_sigma;
    }
    sigma
}

/// Smallest-magnitude eigenvalue of the Hermitian part `(A + A^H)/2`,
/// estimated by inverse power iteration through an LU factorization.
pub fn hermitian_part_lambda_min(a: &DMatrix<Complex64>) -> f64 {
    let h = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let n = h.nrows();
    if n == 0 {
        return 0.0;
    }
    let lu = nalgebra::linalg::LU::new(h.clone());
    let mut v = DVector::from_element(n, Complex64::new(1.0, 0.0)).normalize();
    let mut lam = f64::INFINITY;
    for _ in 0..POWER_ITERS {
        let Some(w) = lu.solve(&v) else {
            return 0.0;
        };
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        v = w / Complex64::new(nw, 0.0);
        let hv = &h * &v;
        let new_lam = v.dotc(&hv).re.abs();
        if (new_lam - lam).abs() <= POWER_TOL * new_lam.max(1e-300) {
            return new_lam;
        }
        lam = new_lam;
    }
    lam
}

/// Smallest eigenvalue of a real SPD matrix: Cholesky certificate plus
/// inverse power iteration. Errors if the factorization fails.
pub fn lambda_min_spd(a: &DMatrix<f64>) -> Result<f64> {
    let n = a.nrows();
    let chol = Cholesky::new(a.clone()).ok_or(Error::SingularMatrix {
        rcond: rcond_estimate_real(a),
    })?;
    let mut v = DVector::from_element(n, 1.0).normalize();
    let mut lam = f64::INFINITY;
    for _ in 0..POWER_ITERS {
        let w = chol.solve(&v);
        let nw = w.norm();
        if nw == 0.0 {
            return Ok(0.0);
        }
        v = w / nw;
        let new_lam = v.dot(&(a * &v));
        if (new_lam - lam).abs() <= POWER_TOL * new_lam.abs().max(1e-300) {
            return Ok(new_lam);
        }
        lam = new_lam;
    }
    Ok(lam)
}

/// Largest eigenvalue of a real symmetric matrix by power iteration.
pub fn lambda_max_sym(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut v = DVector::from_element(n, 1.0).normalize();
    let mut lam = 0.0;
    for _ in 0..POWER_ITERS {
        let w = a * &v;
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        v = w / nw;
        let new_lam = v.dot(&(a * &v));
        if (new_lam - lam).abs() <= POWER_TOL * new_lam.abs().max(1e-300) {
            return new_lam;
        }
        lam = new_lam;
    }
    lam
}

/// Energy norm `sqrt(|c^H A c|)` of a coefficient vector.
pub fn energy_norm_of(a: &DMatrix<Complex64>, c: &DVector<Complex64>) -> f64 {
    quadratic_form(a, c).norm().sqrt()
}

/// `c^H A c`.
pub fn quadratic_form(a: &DMatrix<Complex64>, c: &DVector<Complex64>) -> Complex64 {
    c.dotc(&(a * c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one_solve() {
        let a = DMatrix::from_element(1, 1, Complex64::new(2.0, 0.0));
        let b = DVector::from_element(1, Complex64::new(3.0, 0.0));
        let x = solve_dense(&a, &b).unwrap();
        assert!((x[0] - Complex64::new(1.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn random_complex_symmetric_pd_residual() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let n = 50;
        // Real SPD + i * small symmetric gives a diagonally dominant
        // complex symmetric matrix.
        let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for i in 0..n {
            for j in i..n {
                let re: f64 = rng.gen_range(-0.1..0.1);
                let im: f64 = rng.gen_range(-0.05..0.05);
                m[(i, j)] = Complex64::new(re, im);
                m[(j, i)] = m[(i, j)];
            }
        }
        for i in 0..n {
            m[(i, i)] += Complex64::new(8.0, 0.0);
        }
        let b = DVector::from_fn(n, |i, _| Complex64::new(1.0 + i as f64, -0.3));
        let x = solve_dense(&m, &b).unwrap();
        let res = (&m * &x - &b).norm() / b.norm();
        assert!(res <= 1e-10, "residual {res}");
        // Complex symmetric, not Hermitian.
        assert_eq!(m[(3, 7)], m[(7, 3)]);
    }

    #[test]
    fn zero_rhs_gives_zero_solution() {
        let a = DMatrix::from_diagonal_element(4, 4, Complex64::new(2.0, 1.0));
        let b = DVector::from_element(4, Complex64::new(0.0, 0.0));
        let x = solve_dense(&a, &b).unwrap();
        assert!(x.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn singular_matrix_detected() {
        let a = DMatrix::from_element(3, 3, Complex64::new(1.0, 0.0));
        let b = DVector::from_element(3, Complex64::new(1.0, 2.0));
        assert!(matches!(
            solve_dense(&a, &b),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn spectral_estimates_on_diagonal() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 2.0, 7.0]));
        assert!((lambda_max_sym(&d) - 7.0).abs() < 1e-9);
        assert!((lambda_min_spd(&d).unwrap() - 0.5).abs() < 1e-9);
        let dc = d.map(|v| Complex64::new(v, 0.0));
        assert!((sigma_max(&dc) - 7.0).abs() < 1e-9);
        assert!((hermitian_part_lambda_min(&dc) - 0.5).abs() < 1e-9);
    }
}
