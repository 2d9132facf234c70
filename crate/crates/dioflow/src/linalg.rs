//! Dense complex linear algebra kernels.
//!
//! The whole artifact runs at desk scale (dim ≤ a few hundred), so a cyclic
//! Jacobi eigensolver for Hermitian matrices is both fast enough and more
//! accurate than needed: residuals land at `n·ε·‖A‖`, eigenvectors come out
//! orthonormal to machine precision, and the iteration is deterministic.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use thiserror::Error;

/// Maximum number of full Jacobi sweeps before giving up.
const MAX_SWEEPS: usize = 60;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: |A[{row}][{col}] - conj(A[{col}][{row}])| = {defect:.3e}")]
    NotHermitian {
        row: usize,
        col: usize,
        defect: f64,
    },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-norm {off:.3e})")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("non-finite entry encountered at [{row}][{col}]")]
    NonFinite { row: usize, col: usize },
}

/// Eigenvalues (ascending) and matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Array1<f64>,
    pub eigenvectors: Array2<C64>,
}

/// Largest absolute Hermiticity defect `|A[j][k] - conj(A[k][j])|`.
pub fn hermiticity_defect(a: &Array2<C64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for k in j..n {
            let d = (a[[j, k]] - a[[k, j]].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

fn frobenius_norm(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_finite(a: &Array2<C64>) -> Result<(), LinalgError> {
    for ((r, c), z) in a.indexed_iter() {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(LinalgError::NonFinite { row: r, col: c });
        }
    }
    Ok(())
}

fn off_diagonal_norm_flat(a: &[C64], n: usize) -> f64 {
    let mut s = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            s += a[p * n + q].norm_sqr();
        }
    }
    (2.0 * s).sqrt()
}

/// One cyclic Jacobi pass over all `p < q`, rotating away each off-diagonal
/// element above `floor`. `a` is row-major Hermitian storage; `vt` holds the
/// accumulated eigenvector matrix TRANSPOSED, so both updates run along
/// contiguous rows.
fn jacobi_sweep(a: &mut [C64], vt: &mut [C64], n: usize, floor: f64) {
    for p in 0..n {
        for q in (p + 1)..n {
            let apq = a[p * n + q];
            let beta = apq.norm();
            if beta <= floor {
                continue;
            }
            // Unit phase of the pivot and the rotation angle solving
            // tan(2θ) = 2|a_pq| / (a_pp - a_qq), with |θ| ≤ π/4.
            let u = apq / beta;
            let app = a[p * n + p].re;
            let aqq = a[q * n + q].re;
            let zeta = (app - aqq) / (2.0 * beta);
            let t = if zeta >= 0.0 {
                1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
            } else {
                -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
            };
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;
            let su = u * s;
            let su_conj = su.conj();

            // New diagonal entries; the pivot is annihilated exactly.
            a[p * n + p] = C64::new(app + t * beta, 0.0);
            a[q * n + q] = C64::new(aqq - t * beta, 0.0);
            a[p * n + q] = C64::new(0.0, 0.0);
            a[q * n + p] = C64::new(0.0, 0.0);

            // Rotate rows p and q in place (columns follow by conjugation):
            // row_p[r] = conj(a[r][p]), so the column update
            //   a[r][p] <- a[r][p] c + a[r][q] s conj(u)
            // reads in row space as row_p[r] <- row_p[r] c + row_q[r] s u.
            let (head, tail) = a.split_at_mut(q * n);
            let row_p = &mut head[p * n..p * n + n];
            let row_q = &mut tail[..n];
            for r in 0..n {
                if r == p || r == q {
                    continue;
                }
                let x = row_p[r];
                let y = row_q[r];
                row_p[r] = x * c + y * su;
                row_q[r] = -x * su_conj + y * c;
            }
            for r in 0..n {
                if r == p || r == q {
                    continue;
                }
                a[r * n + p] = a[p * n + r].conj();
                a[r * n + q] = a[q * n + r].conj();
            }

            // Same rotation on the eigenvector columns, stored as rows of
            // vt. vt is a plain transpose (no conjugation), so the phase
            // factors are conjugate to the Hermitian-row update above.
            let (vhead, vtail) = vt.split_at_mut(q * n);
            let vrow_p = &mut vhead[p * n..p * n + n];
            let vrow_q = &mut vtail[..n];
            for r in 0..n {
                let x = vrow_p[r];
                let y = vrow_q[r];
                vrow_p[r] = x * c + y * su_conj;
                vrow_q[r] = -x * su + y * c;
            }
        }
    }
}

fn jacobi_iterate(a: &mut Array2<C64>, v: &mut Array2<C64>) -> Result<(), LinalgError> {
    let scale = frobenius_norm(a);
    if scale == 0.0 {
        return Ok(());
    }
    let n = a.nrows();
    let target = scale * 1e-15;
    // Pivots this small cannot push the off-norm past the target even if
    // every pair sits right at the floor.
    let floor = target / (2.0 * n as f64);
    let am = a.as_slice_mut().expect("standard layout");
    // Work on the transpose so both rotated vector rows are contiguous.
    let mut vt = vec![C64::new(0.0, 0.0); n * n];
    for (r, row) in v.rows().into_iter().enumerate() {
        for (col, z) in row.iter().enumerate() {
            vt[col * n + r] = *z;
        }
    }
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm_flat(am, n);
        if off <= target {
            converged = true;
            break;
        }
        jacobi_sweep(am, &mut vt, n, floor);
    }
    if !converged {
        let off = off_diagonal_norm_flat(am, n);
        // Stagnation within rounding of the tighter target is still usable.
        if off > scale * 1e-12 {
            return Err(LinalgError::NoConvergence {
                sweeps: MAX_SWEEPS,
                off,
            });
        }
    }
    for r in 0..n {
        for col in 0..n {
            v[[r, col]] = vt[col * n + r];
        }
    }
    Ok(())
}

fn sort_ascending(diag: &Array2<C64>, v: &Array2<C64>) -> EigenDecomposition {
    let n = diag.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        diag[[i, i]]
            .re
            .partial_cmp(&diag[[j, j]].re)
            .expect("eigenvalues are finite")
            .then(i.cmp(&j))
    });
    let eigenvalues = Array1::from_iter(order.iter().map(|&i| diag[[i, i]].re));
    let mut eigenvectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            eigenvectors[[r, dst]] = v[[r, src]];
        }
    }
    EigenDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

/// Full eigendecomposition of a Hermitian matrix.
///
/// Accepts a Hermiticity defect up to `1e-12 · max(1, ‖A‖_F)` and symmetrizes
/// before iterating, so results are exactly Hermitian-consistent. An already
/// diagonal input is returned without any rotations, i.e. the eigenvalues are
/// the diagonal entries bit for bit.
pub fn hermitian_eig(a: &Array2<C64>) -> Result<EigenDecomposition, LinalgError> {
    let (rows, cols) = a.dim();
    if rows != cols {
        return Err(LinalgError::NotSquare { rows, cols });
    }
    check_finite(a)?;
    let scale = frobenius_norm(a).max(1.0);
    let n = rows;
    for j in 0..n {
        for k in j..n {
            let d = (a[[j, k]] - a[[k, j]].conj()).norm();
            if d > 1e-12 * scale {
                return Err(LinalgError::NotHermitian {
                    row: j,
                    col: k,
                    defect: d,
                });
            }
        }
    }
    let mut m = Array2::zeros((n, n));
    for j in 0..n {
        m[[j, j]] = C64::new(a[[j, j]].re, 0.0);
        for k in (j + 1)..n {
            let avg = 0.5 * (a[[j, k]] + a[[k, j]].conj());
            m[[j, k]] = avg;
            m[[k, j]] = avg.conj();
        }
    }
    let mut v = Array2::eye(n);
    jacobi_iterate(&mut m, &mut v)?;
    Ok(sort_ascending(&m, &v))
}

/// Eigendecomposition warm-started from an approximate eigenbasis.
///
/// Rotates `a` into the `guess` basis (which must be unitary, e.g. the
/// eigenvectors of a nearby matrix), finishes the nearly diagonal problem with
/// Jacobi sweeps, and maps the result back. Same contract as
/// [`hermitian_eig`], typically several times faster along a slowly varying
/// matrix path.
pub fn hermitian_eig_warm(
    a: &Array2<C64>,
    guess: &Array2<C64>,
) -> Result<EigenDecomposition, LinalgError> {
    let (rows, cols) = a.dim();
    if rows != cols || guess.dim() != (rows, cols) {
        return Err(LinalgError::NotSquare { rows, cols });
    }
    check_finite(a)?;
    // b = guess† · a · guess, explicitly re-Hermitized to stop roundoff drift.
    let ag = a.dot(guess);
    let b = conj_transpose(guess).dot(&ag);
    let n = rows;
    let mut m = Array2::zeros((n, n));
    for j in 0..n {
        m[[j, j]] = C64::new(b[[j, j]].re, 0.0);
        for k in (j + 1)..n {
            let avg = 0.5 * (b[[j, k]] + b[[k, j]].conj());
            m[[j, k]] = avg;
            m[[k, j]] = avg.conj();
        }
    }
    let mut v = Array2::eye(n);
    jacobi_iterate(&mut m, &mut v)?;
    let rotated = guess.dot(&v);
    Ok(sort_ascending(&m, &rotated))
}

/// Conjugate transpose.
pub fn conj_transpose(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

/// Hermitian inner product `⟨x|y⟩` with the conjugate on the left argument.
pub fn inner(x: &ndarray::ArrayView1<C64>, y: &ndarray::ArrayView1<C64>) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Euclidean norm of a complex vector.
pub fn vector_norm(x: &ndarray::ArrayView1<C64>) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
