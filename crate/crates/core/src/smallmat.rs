//! Dense complex matrices at toy scale.
//!
//! Row-major `Vec<Complex64>` buffers with just enough linear algebra for
//! the brute-force reference paths and their tests: products, Kronecker
//! products, adjoints, and a cyclic Jacobi eigensolver for Hermitian
//! matrices (used to check positivity of small density matrices). Nothing
//! here is performance-sensitive; dimensions stay ≤ 2^7 or so.

use num_complex::Complex64;

pub(crate) type C = Complex64;

pub(crate) const ZERO: C = Complex64::new(0.0, 0.0);
pub(crate) const ONE: C = Complex64::new(1.0, 0.0);

/// 2x2 Pauli matrices, row-major.
pub(crate) const MAT_I: [C; 4] = [ONE, ZERO, ZERO, ONE];
pub(crate) const MAT_X: [C; 4] = [ZERO, ONE, ONE, ZERO];
pub(crate) const MAT_Y: [C; 4] = [
    ZERO,
    Complex64::new(0.0, -1.0),
    Complex64::new(0.0, 1.0),
    ZERO,
];
pub(crate) const MAT_Z: [C; 4] = [ONE, ZERO, ZERO, Complex64::new(-1.0, 0.0)];

pub(crate) fn ident(dim: usize) -> Vec<C> {
    let mut m = vec![ZERO; dim * dim];
    for i in 0..dim {
        m[i * dim + i] = ONE;
    }
    m
}

pub(crate) fn matmul(dim: usize, a: &[C], b: &[C]) -> Vec<C> {
    assert_eq!(a.len(), dim * dim);
    assert_eq!(b.len(), dim * dim);
    let mut out = vec![ZERO; dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            if aik == ZERO {
                continue;
            }
            for j in 0..dim {
                out[i * dim + j] += aik * b[k * dim + j];
            }
        }
    }
    out
}

pub(crate) fn dagger(dim: usize, a: &[C]) -> Vec<C> {
    let mut out = vec![ZERO; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            out[j * dim + i] = a[i * dim + j].conj();
        }
    }
    out
}

/// Kronecker product; `a` indexes the high-order factor. With qubit 0 as the
/// least significant bit of a basis index, `kron(b, a)` places `a` on the
/// higher qubit — callers build n-qubit operators by folding from qubit 0 up
/// as `kron(next_qubit_mat, acc)`.
pub(crate) fn kron(da: usize, a: &[C], db: usize, b: &[C]) -> Vec<C> {
    let dim = da * db;
    let mut out = vec![ZERO; dim * dim];
    for ia in 0..da {
        for ja in 0..da {
            let f = a[ia * da + ja];
            if f == ZERO {
                continue;
            }
            for ib in 0..db {
                for jb in 0..db {
                    out[(ia * db + ib) * dim + (ja * db + jb)] = f * b[ib * db + jb];
                }
            }
        }
    }
    out
}

pub(crate) fn scale(s: C, a: &[C]) -> Vec<C> {
    a.iter().map(|&x| s * x).collect()
}

pub(crate) fn add(a: &[C], b: &[C]) -> Vec<C> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub(crate) fn trace(dim: usize, a: &[C]) -> C {
    (0..dim).map(|i| a[i * dim + i]).sum()
}

pub(crate) fn max_abs_diff(a: &[C], b: &[C]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi sweeps, ascending.
///
/// Each rotation first phases the (p,q) entry real, then applies the usual
/// real-symmetric rotation angle; both combine into a single unitary applied
/// to rows p,q and columns p,q.
pub(crate) fn hermitian_eigenvalues(dim: usize, a: &[C]) -> Vec<f64> {
    assert_eq!(a.len(), dim * dim);
    let mut m = a.to_vec();
    let scale_ref: f64 = m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    for _sweep in 0..200 {
        let mut off = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    off += m[i * dim + j].norm_sqr();
                }
            }
        }
        if off.sqrt() <= 1e-13 * scale_ref {
            break;
        }
        for p in 0..dim {
            for q in p + 1..dim {
                let apq = m[p * dim + q];
                let r = apq.norm();
                if r < 1e-300 {
                    continue;
                }
                let phase = apq / r; // e^{i φ}
                let app = m[p * dim + p].re;
                let aqq = m[q * dim + q].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Column update: A <- A·U with U = [[c, s], [-s·e^{-iφ}, c·e^{-iφ}]]
                // on coordinates (p, q); row update with U†.
                let se = s * phase.conj();
                let ce = c * phase.conj();
                for k in 0..dim {
                    let kp = m[k * dim + p];
                    let kq = m[k * dim + q];
                    m[k * dim + p] = c * kp - se * kq;
                    m[k * dim + q] = s * kp + ce * kq;
                }
                let sep = s * phase;
                let cep = c * phase;
                for k in 0..dim {
                    let pk = m[p * dim + k];
                    let qk = m[q * dim + k];
                    m[p * dim + k] = c * pk - sep * qk;
                    m[q * dim + k] = s * pk + cep * qk;
                }
                m[p * dim + q] = ZERO;
                m[q * dim + p] = ZERO;
            }
        }
    }
    let mut eigs: Vec<f64> = (0..dim).map(|i| m[i * dim + i].re).collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn pauli_matrices_square_to_identity() {
        for m in [MAT_X, MAT_Y, MAT_Z] {
            assert!(max_abs_diff(&matmul(2, &m, &m), &MAT_I) < 1e-15);
        }
    }

    #[test]
    fn xz_product_is_minus_i_y() {
        let xz = matmul(2, &MAT_X, &MAT_Z);
        let want = scale(Complex64::new(0.0, -1.0), &MAT_Y);
        assert!(max_abs_diff(&xz, &want) < 1e-15);
    }

    #[test]
    fn kron_dimensions_and_entries() {
        let zx = kron(2, &MAT_Z, 2, &MAT_X);
        // (Z ⊗ X)[0,1] = 1, [2,3] = -1 in row-major 4x4.
        assert_eq!(zx[0 * 4 + 1], ONE);
        assert_eq!(zx[2 * 4 + 3], Complex64::new(-1.0, 0.0));
        assert_eq!(trace(4, &zx), ZERO);
    }

    #[test]
    fn eigenvalues_of_pauli_x() {
        assert_close(&hermitian_eigenvalues(2, &MAT_X), &[-1.0, 1.0], 1e-12);
    }

    #[test]
    fn eigenvalues_of_complex_hermitian() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let m = [
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(2.0, 0.0),
        ];
        assert_close(&hermitian_eigenvalues(2, &m), &[1.0, 3.0], 1e-12);
    }

    #[test]
    fn eigenvalues_of_pure_state_projector() {
        // |ψ⟩ = (|00⟩ + i|11⟩)/√2; the projector has spectrum {0,0,0,1}.
        let mut psi = vec![ZERO; 4];
        psi[0] = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
        psi[3] = Complex64::new(0.0, 1.0 / 2f64.sqrt());
        let mut proj = vec![ZERO; 16];
        for i in 0..4 {
            for j in 0..4 {
                proj[i * 4 + j] = psi[i] * psi[j].conj();
            }
        }
        assert_close(
            &hermitian_eigenvalues(4, &proj),
            &[0.0, 0.0, 0.0, 1.0],
            1e-12,
        );
    }

    #[test]
    fn eigenvalue_invariants_on_a_scrambled_hermitian() {
        // Build H = Σ c_k P_k from a fixed coefficient set, then check the
        // spectrum against trace and Frobenius invariants and a known shift.
        let h1 = add(
            &scale(Complex64::new(0.7, 0.0), &kron(2, &MAT_X, 2, &MAT_Y)),
            &scale(Complex64::new(-0.3, 0.0), &kron(2, &MAT_Z, 2, &MAT_Z)),
        );
        let h = add(&h1, &scale(Complex64::new(0.45, 0.0), &kron(2, &MAT_I, 2, &MAT_X)));
        let eigs = hermitian_eigenvalues(4, &h);
        let tr: f64 = eigs.iter().sum();
        assert!(tr.abs() < 1e-10);
        let frob2: f64 = h.iter().map(|x| x.norm_sqr()).sum();
        let sum_sq: f64 = eigs.iter().map(|x| x * x).sum();
        assert!((frob2 - sum_sq).abs() < 1e-9);
        let shifted = add(&h, &scale(Complex64::new(2.0, 0.0), &ident(4)));
        let eigs_shifted = hermitian_eigenvalues(4, &shifted);
        for (a, b) in eigs.iter().zip(&eigs_shifted) {
            assert!((a + 2.0 - b).abs() < 1e-9);
        }
    }
}
