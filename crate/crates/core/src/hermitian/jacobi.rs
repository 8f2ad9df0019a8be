//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each sweep visits every off-diagonal pair (p, q) and annihilates it with a
//! unitary plane rotation `J = diag(1, e^{-iφ}) · R(θ)`, where φ is the phase
//! of the pivot entry and R is the classic real Jacobi rotation. Off-diagonal
//! mass decreases monotonically, so the iteration converges unconditionally;
//! the sweep cap only guards against pathological floating-point input.

use super::{CMatrix, Complex64, EigenDecomposition, HermitianMatrix, MatrixError, Result};

const MAX_SWEEPS: usize = 30;
const OFF_DIAG_REL_TOL: f64 = 1e-13;

fn off_diag_norm(m: &[Complex64], d: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..d {
        for j in i + 1..d {
            acc += 2.0 * m[i * d + j].norm_sqr();
        }
    }
    acc.sqrt()
}

pub(super) fn jacobi_eig(a: &HermitianMatrix) -> Result<EigenDecomposition> {
    let d = a.dim();
    let hs = a.hs_norm();
    let mut m = a.data().to_vec();
    let mut u = CMatrix::identity(d);

    if d == 1 {
        return Ok(EigenDecomposition {
            eigenvalues: vec![m[0].re],
            eigenvectors: u,
        });
    }

    let conv_tol = OFF_DIAG_REL_TOL * hs;
    // Entries below this cannot push the total off-diagonal norm above the
    // convergence threshold even if all d² of them are skipped.
    let skip_tol = conv_tol / (2.0 * d as f64);

    let mut converged = hs == 0.0 || off_diag_norm(&m, d) <= conv_tol;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        for p in 0..d {
            for q in p + 1..d {
                let apq = m[p * d + q];
                let b = apq.norm();
                if b <= skip_tol {
                    continue;
                }
                let phase = apq / b; // e^{iφ}
                let app = m[p * d + p].re;
                let aqq = m[q * d + q].re;
                let tau = (aqq - app) / (2.0 * b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J_pp = c, J_pq = s, J_qp = -s·e^{-iφ}, J_qq = c·e^{-iφ}
                let e_neg = phase.conj();
                let e_pos = phase;

                // A <- A·J (columns p, q)
                for k in 0..d {
                    let akp = m[k * d + p];
                    let akq = m[k * d + q];
                    m[k * d + p] = c * akp - s * e_neg * akq;
                    m[k * d + q] = s * akp + c * e_neg * akq;
                }
                // A <- J*·A (rows p, q)
                for k in 0..d {
                    let apk = m[p * d + k];
                    let aqk = m[q * d + k];
                    m[p * d + k] = c * apk - s * e_pos * aqk;
                    m[q * d + k] = s * apk + c * e_pos * aqk;
                }
                // Rotation annihilates the pivot; enforce it exactly.
                m[p * d + q] = Complex64::ZERO;
                m[q * d + p] = Complex64::ZERO;
                m[p * d + p] = Complex64::new(m[p * d + p].re, 0.0);
                m[q * d + q] = Complex64::new(m[q * d + q].re, 0.0);

                // U <- U·J
                for k in 0..d {
                    let ukp = u.get(k, p);
                    let ukq = u.get(k, q);
                    u.set(k, p, c * ukp - s * e_neg * ukq);
                    u.set(k, q, s * ukp + c * e_neg * ukq);
                }
            }
        }
        sweeps += 1;
        converged = off_diag_norm(&m, d) <= conv_tol;
    }

    if !converged {
        return Err(MatrixError::EigNonConvergence {
            dim: d,
            sweeps,
            off_diagonal: off_diag_norm(&m, d),
            hs_norm: hs,
        });
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| m[i * d + i].re.total_cmp(&m[j * d + j].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[i * d + i].re).collect();
    let mut vectors = CMatrix::zeros(d, d);
    for (new_col, &old_col) in order.iter().enumerate() {
        for k in 0..d {
            vectors.set(k, new_col, u.get(k, old_col));
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors: vectors,
    })
}
