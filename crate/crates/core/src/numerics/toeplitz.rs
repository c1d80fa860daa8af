//! Hermitian Toeplitz systems.
//!
//! A Hermitian Toeplitz matrix is described by its first column `t`, with
//! `T[i][j] = t[i - j]` for `i >= j` and `conj(t[j - i])` above the
//! diagonal. [`toeplitz_solve`] uses the Levinson recursion and drops to a
//! dense Cholesky factorisation when the recursion becomes ill-conditioned
//! (reflection magnitude within `1e-10` of one).

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Reflection-coefficient guard for switching to the dense fallback.
const REFLECTION_LIMIT: f64 = 1.0 - 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzSystem {
    pub first_column: Vec<Complex64>,
    pub rhs: Vec<Complex64>,
}

impl ToeplitzSystem {
    pub fn new(first_column: Vec<Complex64>, rhs: Vec<Complex64>) -> Result<Self> {
        if first_column.is_empty() || first_column.len() != rhs.len() {
            return Err(Error::InvalidParameter(format!(
                "Toeplitz system dimensions disagree: column {} vs rhs {}",
                first_column.len(),
                rhs.len()
            )));
        }
        Ok(Self { first_column, rhs })
    }

    pub fn dim(&self) -> usize {
        self.first_column.len()
    }

    /// The dense matrix; mostly useful for tests and the fallback path.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        hermitian_toeplitz(&self.first_column)
    }
}

pub fn hermitian_toeplitz(first_column: &[Complex64]) -> DMatrix<Complex64> {
    let n = first_column.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i >= j {
            first_column[i - j]
        } else {
            first_column[j - i].conj()
        }
    })
}

fn leading_element(t: &[Complex64]) -> Result<f64> {
    let t0 = t[0];
    if !(t0.re > 0.0) || t0.im.abs() > 1e-12 * t0.re || !t0.re.is_finite() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(t0.re)
}

/// Solves `T w = rhs`.
pub fn toeplitz_solve(sys: &ToeplitzSystem) -> Result<Vec<Complex64>> {
    let t = &sys.first_column;
    let b = &sys.rhs;
    let n = sys.dim();
    if n != b.len() || n == 0 {
        return Err(Error::InvalidParameter("Toeplitz dimension mismatch".into()));
    }
    let t0 = leading_element(t)?;

    // f solves T_m f = e_1, g solves T_m g = e_m, x solves T_m x = b[..m].
    let mut f = vec![Complex64::new(1.0 / t0, 0.0)];
    let mut g = f.clone();
    let mut x = vec![b[0] / t0];

    for m in 1..n {
        // T_{m+1} [f; 0] = e_1 + alpha e_{m+1};  T_{m+1} [0; g] = beta e_1 + e_{m+1}
        let alpha: Complex64 = (0..m).map(|j| t[m - j] * f[j]).sum();
        let beta: Complex64 = (0..m).map(|j| t[j + 1].conj() * g[j]).sum();
        let denom = Complex64::new(1.0, 0.0) - alpha * beta;
        if !(denom.re > 1.0 - REFLECTION_LIMIT) || !denom.re.is_finite() {
            return cholesky_solve(t, b);
        }
        let mut f_next = vec![Complex64::default(); m + 1];
        let mut g_next = vec![Complex64::default(); m + 1];
        for i in 0..=m {
            let u = if i < m { f[i] } else { Complex64::default() };
            let v = if i > 0 { g[i - 1] } else { Complex64::default() };
            f_next[i] = (u - alpha * v) / denom;
            g_next[i] = (v - beta * u) / denom;
        }
        f = f_next;
        g = g_next;

        let s: Complex64 = (0..m).map(|j| t[m - j] * x[j]).sum();
        let mu = b[m] - s;
        x.push(Complex64::default());
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi += mu * gi;
        }
    }
    Ok(x)
}

// nalgebra takes complex square roots of negative pivots, so positivity of
// the factor's diagonal has to be checked explicitly.
fn checked_cholesky(m: DMatrix<Complex64>) -> Result<Cholesky<Complex64, Dyn>> {
    let chol = m.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l_dirty();
    for i in 0..l.nrows() {
        let d = l[(i, i)];
        if !(d.re > 0.0) || d.im.abs() > 1e-12 * d.re {
            return Err(Error::NotPositiveDefinite);
        }
    }
    Ok(chol)
}

/// Dense Cholesky solve of the Hermitian Toeplitz system.
pub fn cholesky_solve(first_column: &[Complex64], rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    leading_element(first_column)?;
    let chol = checked_cholesky(hermitian_toeplitz(first_column))?;
    let sol = chol.solve(&DVector::from_column_slice(rhs));
    Ok(sol.iter().copied().collect())
}

/// One-step forward predictors of every order `1..=order` for a
/// stationary process with autocorrelation `gamma[k] = E{y[n+k] y*[n]}`.
///
/// `coefficients[m-1][j-1]` multiplies `y[n-j]` in the order-`m` predictor
/// of `y[n]`; `errors[m]` is the order-`m` mean-square error (`errors[0] =
/// gamma[0]`).
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorBank {
    pub coefficients: Vec<Vec<Complex64>>,
    pub errors: Vec<f64>,
}

/// Levinson-Durbin recursion over all orders up to `order`.
pub fn levinson_durbin(gamma: &[Complex64], order: usize) -> Result<PredictorBank> {
    if gamma.len() <= order {
        return Err(Error::InvalidParameter(format!(
            "need {} autocorrelation lags, got {}",
            order + 1,
            gamma.len()
        )));
    }
    let g0 = leading_element(gamma)?;
    let mut coefficients: Vec<Vec<Complex64>> = Vec::with_capacity(order);
    let mut errors = Vec::with_capacity(order + 1);
    errors.push(g0);
    let mut a: Vec<Complex64> = Vec::new();
    let mut err = g0;
    let mut dense = false;

    for m in 1..=order {
        if !dense {
            let acc: Complex64 = (1..m).map(|j| a[j - 1] * gamma[m - j]).sum();
            let k = (gamma[m] - acc) / err;
            if k.norm() >= REFLECTION_LIMIT || !k.re.is_finite() {
                dense = true;
            } else {
                let prev = a.clone();
                for j in 1..m {
                    a[j - 1] = prev[j - 1] - k * prev[m - j - 1].conj();
                }
                a.push(k);
                err *= 1.0 - k.norm_sqr();
            }
        }
        if dense {
            // Solve the order-m normal equations Gamma a = gamma[1..=m] directly.
            let col: Vec<Complex64> = gamma[..m].to_vec();
            let rhs: Vec<Complex64> = gamma[1..=m].to_vec();
            let chol = checked_cholesky(hermitian_toeplitz(&col))?;
            // gamma[i] = sum_j a_j gamma[i-j] is exactly the Hermitian Toeplitz system.
            let sol = chol.solve(&DVector::from_column_slice(&rhs));
            a = sol.iter().copied().collect();
            let e = g0 - a.iter().enumerate().map(|(j, aj)| (aj * gamma[j + 1].conj()).re).sum::<f64>();
            err = e;
        }
        if !(err > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        coefficients.push(a.clone());
        errors.push(err);
    }
    Ok(PredictorBank {
        coefficients,
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn one_by_one() {
        let sys = ToeplitzSystem::new(vec![c(1.0)], vec![Complex64::new(0.3, -2.0)]).unwrap();
        assert_eq!(toeplitz_solve(&sys).unwrap(), vec![Complex64::new(0.3, -2.0)]);
    }

    #[test]
    fn identity() {
        let mut col = vec![c(0.0); 6];
        col[0] = c(1.0);
        let rhs: Vec<Complex64> = (0..6).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let sys = ToeplitzSystem::new(col, rhs.clone()).unwrap();
        let w = toeplitz_solve(&sys).unwrap();
        for (a, b) in w.iter().zip(&rhs) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn not_positive_definite() {
        let sys = ToeplitzSystem::new(vec![c(-1.0), c(0.0)], vec![c(1.0), c(1.0)]).unwrap();
        assert_eq!(toeplitz_solve(&sys), Err(Error::NotPositiveDefinite));
        // |t1| > t0: indefinite
        let sys = ToeplitzSystem::new(vec![c(1.0), c(2.0)], vec![c(1.0), c(1.0)]).unwrap();
        assert_eq!(toeplitz_solve(&sys), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn dimension_mismatch() {
        assert!(ToeplitzSystem::new(vec![c(1.0)], vec![]).is_err());
    }

    #[test]
    fn near_singular_uses_fallback() {
        // AR(1) with correlation 1 - 1e-12: reflection coefficient is nearly 1.
        let rho: f64 = 1.0 - 1e-12;
        let col: Vec<Complex64> = (0..4).map(|k| c(rho.powi(k))).collect();
        let rhs = vec![c(1.0), c(0.0), c(0.0), c(1.0)];
        let sys = ToeplitzSystem::new(col, rhs.clone()).unwrap();
        let w = toeplitz_solve(&sys).unwrap();
        let dense = cholesky_solve(&sys.first_column, &rhs).unwrap();
        for (a, b) in w.iter().zip(&dense) {
            assert!((a - b).norm() <= 1e-6 * b.norm().max(1.0));
        }
    }

    #[test]
    fn durbin_ar1() {
        // AR(1): r[k] = phi^k, order-m predictor is (phi, 0, ..., 0)
        let phi = 0.8f64;
        let gamma: Vec<Complex64> = (0..6).map(|k| c(phi.powi(k))).collect();
        let bank = levinson_durbin(&gamma, 5).unwrap();
        for (m, a) in bank.coefficients.iter().enumerate() {
            assert_eq!(a.len(), m + 1);
            assert!((a[0].re - phi).abs() < 1e-14);
            for aj in &a[1..] {
                assert!(aj.norm() < 1e-14);
            }
            assert!((bank.errors[m + 1] - (1.0 - phi * phi)).abs() < 1e-14);
        }
    }

    #[test]
    fn durbin_matches_solve_complex() {
        // Complex autocorrelation of a rotating AR(1): r[k] = phi^k e^{j w k}
        let phi = 0.7f64;
        let w = 0.4f64;
        let gamma: Vec<Complex64> = (0..9)
            .map(|k| Complex64::from_polar(phi.powi(k), w * k as f64) + if k == 0 { c(0.5) } else { c(0.0) })
            .collect();
        let bank = levinson_durbin(&gamma, 8).unwrap();
        for m in 1..=8 {
            // normal equations: gamma[i] = sum_j a_j gamma[i-j]
            let a = &bank.coefficients[m - 1];
            for i in 1..=m {
                let mut s = Complex64::default();
                for j in 1..=m {
                    let d = i as isize - j as isize;
                    let g = if d >= 0 { gamma[d as usize] } else { gamma[(-d) as usize].conj() };
                    s += a[j - 1] * g;
                }
                assert!((s - gamma[i]).norm() < 1e-12, "m={m} i={i}");
            }
        }
    }
}
