//! Dense symmetric and Hermitian eigensolvers.
//!
//! Small matrices (the 3×3 fluctuation problems, lattice blocks up to
//! [`JACOBI_MAX_DIM`]) go through cyclic Jacobi rotations. Larger ones, which
//! only show up in exact diagonalization, are reduced to tridiagonal form by
//! Householder reflections and finished with implicit QL iterations. Both paths
//! are deterministic: the same input gives bit-identical output.

use num_complex::Complex64;

use super::matrix::{CMatrix, Matrix};
use crate::error::{Error, Result};

/// Largest dimension routed through Jacobi by [`symmetric_eigen`].
pub const JACOBI_MAX_DIM: usize = 64;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_OFF_TOL: f64 = 1e-14;

/// Eigenvalues in ascending order with matching orthonormal eigenvectors stored
/// as the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct EigenResult {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigenResult {
    pub fn vector(&self, idx: usize) -> Vec<f64> {
        self.vectors.column(idx)
    }
}

/// Hermitian counterpart of [`EigenResult`]; eigenvectors are columns.
#[derive(Clone, Debug)]
pub struct HermitianEigenResult {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigenResult {
    pub fn vector(&self, idx: usize) -> Vec<Complex64> {
        (0..self.vectors.rows()).map(|i| self.vectors[(i, idx)]).collect()
    }
}

fn check_square(a: &Matrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::InvalidInput(format!(
            "eigenproblem needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

/// Full eigendecomposition of a real symmetric matrix. The input is
/// symmetrized first, so asymmetry at the rounding level is harmless.
pub fn symmetric_eigen(a: &Matrix) -> Result<EigenResult> {
    check_square(a)?;
    if a.rows() <= JACOBI_MAX_DIM {
        jacobi_eigen(a)
    } else {
        tridiagonal_eigen(a)
    }
}

/// Eigenvalues only, ascending.
pub fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    check_square(a)?;
    if a.rows() <= JACOBI_MAX_DIM {
        return Ok(jacobi_eigen(a)?.values);
    }
    let n = a.rows();
    let mut v = a.symmetrized();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    householder_tridiagonalize(&mut v, &mut d, &mut e, false);
    ql_implicit(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Cyclic Jacobi eigensolver. Sweeps visit pairs (p, q) with p < q in row
/// order and stop once the off-diagonal Frobenius norm falls below
/// 1e-14·‖A‖_F.
pub fn jacobi_eigen(a: &Matrix) -> Result<EigenResult> {
    check_square(a)?;
    let n = a.rows();
    let mut m = a.symmetrized();
    let mut v = Matrix::identity(n);
    let norm = m.frobenius_norm();

    let mut sweep = 0;
    let mut active = n > 1 && norm > 0.0;
    while active {
        if sweep == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNonConvergence { sweeps: sweep });
        }
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= JACOBI_OFF_TOL * norm {
            active = false;
            continue;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                // Below rounding relative to both diagonals: drop it.
                if sweep > 3 && app.abs() + 100.0 * apq.abs() == app.abs()
                    && aqq.abs() + 100.0 * apq.abs() == aqq.abs()
                {
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                m[(p, p)] = app - t * apq;
                m[(q, q)] = aqq + t * apq;
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = m[(r, p)];
                    let arq = m[(r, q)];
                    let new_rp = c * arp - s * arq;
                    let new_rq = s * arp + c * arq;
                    m[(r, p)] = new_rp;
                    m[(p, r)] = new_rp;
                    m[(r, q)] = new_rq;
                    m[(q, r)] = new_rq;
                }
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = c * vrp - s * vrq;
                    v[(r, q)] = s * vrp + c * vrq;
                }
            }
        }
        sweep += 1;
    }

    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    Ok(sorted_result(diag, &v))
}

/// Householder tridiagonalization followed by implicit QL with Wilkinson-type
/// shifts. O(n³) regardless of conditioning; used above [`JACOBI_MAX_DIM`].
pub fn tridiagonal_eigen(a: &Matrix) -> Result<EigenResult> {
    check_square(a)?;
    let n = a.rows();
    if n == 0 {
        return Ok(EigenResult { values: Vec::new(), vectors: Matrix::zeros(0, 0) });
    }
    let mut v = a.symmetrized();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    householder_tridiagonalize(&mut v, &mut d, &mut e, true);
    ql_implicit(&mut d, &mut e, Some(&mut v))?;
    Ok(sorted_result(d, &v))
}

fn sorted_result(values: Vec<f64>, vectors: &Matrix) -> EigenResult {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = Matrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    EigenResult { values: sorted_values, vectors: sorted_vectors }
}

/// Reduces the symmetric matrix held in `v` to tridiagonal form. On return `d`
/// holds the diagonal, `e[1..]` the subdiagonal, and (when `accumulate`) `v`
/// the orthogonal transformation.
fn householder_tridiagonalize(v: &mut Matrix, d: &mut [f64], e: &mut [f64], accumulate: bool) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for x in &d[..i] {
            scale += x.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for x in &mut d[..i] {
                *x /= scale;
                h += *x * *x;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    if !accumulate {
        for j in 0..n {
            d[j] = v[(j, j)];
        }
        e[0] = 0.0;
        return;
    }

    for i in 0..(n - 1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal (d, e); rotations are accumulated into `v`
/// when present.
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut v: Option<&mut Matrix>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::EigenNonConvergence { sweeps: iter });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(vm) = v.as_deref_mut() {
                        for k in 0..n {
                            let vh = vm[(k, i + 1)];
                            vm[(k, i + 1)] = s * vm[(k, i)] + c * vh;
                            vm[(k, i)] = c * vm[(k, i)] - s * vh;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Real 2n×2n embedding [[Re A, −Im A], [Im A, Re A]] of a Hermitian matrix.
fn real_embedding(a: &CMatrix) -> Matrix {
    let n = a.rows();
    let mut m = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            m[(i, j)] = z.re;
            m[(i + n, j + n)] = z.re;
            m[(i, j + n)] = -z.im;
            m[(i + n, j)] = z.im;
        }
    }
    m
}

fn check_hermitian_shape(a: &CMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::InvalidInput(format!(
            "eigenproblem needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

/// Eigenvalues of a Hermitian matrix, ascending. Real inputs skip the
/// embedding.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian_shape(a)?;
    if a.is_real() {
        return symmetric_eigenvalues(&a.real_part());
    }
    let doubled = symmetric_eigenvalues(&real_embedding(a))?;
    Ok(doubled.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect())
}

/// Full eigendecomposition of a Hermitian matrix through its real symmetric
/// embedding. Every eigenvalue of A appears twice in the embedding; the
/// duplicates are merged and a complex orthonormal basis of each eigenspace is
/// recovered by pivoted Gram-Schmidt over the embedded vectors.
pub fn hermitian_eigen(a: &CMatrix) -> Result<HermitianEigenResult> {
    check_hermitian_shape(a)?;
    let n = a.rows();
    if a.is_real() {
        let r = symmetric_eigen(&a.real_part())?;
        return Ok(HermitianEigenResult { values: r.values, vectors: r.vectors.to_complex() });
    }

    let embedded = symmetric_eigen(&real_embedding(a))?;
    let scale = embedded.values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale;

    let mut values = Vec::with_capacity(n);
    let mut vectors = CMatrix::zeros(n, n);
    let mut start = 0;
    while start < 2 * n {
        let mut end = start + 1;
        while end < 2 * n
            && ((embedded.values[end] - embedded.values[end - 1]).abs() <= tol
                || (end - start) % 2 == 1)
        {
            end += 1;
        }
        let want = (end - start) / 2;
        let mut candidates: Vec<Vec<Complex64>> = (start..end)
            .map(|c| {
                (0..n)
                    .map(|i| Complex64::new(embedded.vectors[(i, c)], embedded.vectors[(i + n, c)]))
                    .collect()
            })
            .collect();
        for pair in embedded.values[start..end].chunks(2) {
            values.push(0.5 * (pair[0] + pair[1]));
        }
        let base = values.len() - want;
        for chosen in 0..want {
            let (best, _) = candidates
                .iter()
                .enumerate()
                .map(|(i, z)| (i, cnorm(z)))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            let pivot = candidates.swap_remove(best);
            let norm = cnorm(&pivot);
            let unit: Vec<Complex64> = pivot.iter().map(|z| z / norm).collect();
            for cand in candidates.iter_mut() {
                let overlap: Complex64 = unit.iter().zip(cand.iter()).map(|(u, c)| u.conj() * c).sum();
                for (c, u) in cand.iter_mut().zip(&unit) {
                    *c -= overlap * u;
                }
            }
            for (i, z) in unit.iter().enumerate() {
                vectors[(i, base + chosen)] = *z;
            }
        }
        start = end;
    }
    Ok(HermitianEigenResult { values, vectors })
}

fn cnorm(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Symmetric square root S of a symmetric positive-definite matrix, S·S = A.
pub fn matrix_sqrt_spd(a: &Matrix) -> Result<Matrix> {
    let eig = symmetric_eigen(a)?;
    let min = eig.values.first().copied().unwrap_or(1.0);
    if min <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let n = a.rows();
    let roots: Vec<f64> = eig.values.iter().map(|v| v.sqrt()).collect();
    Ok(Matrix::from_fn(n, n, |i, j| {
        (0..n).map(|k| eig.vectors[(i, k)] * roots[k] * eig.vectors[(j, k)]).sum()
    }))
}
