//! Small dense linear-algebra helpers shared by the spectral code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entry of `|M - M^dag|`.
pub fn hermitian_violation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// Matrices with vanishing imaginary parts go through the real symmetric
/// solver. Each eigenvector is rotated so that its largest component is real
/// and positive, which makes the output independent of solver phase choices.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let is_real = m.iter().all(|z| z.im == 0.0);
    let (values, vectors): (Vec<f64>, CMatrix) = if is_real {
        let eig = m.map(|z| z.re).symmetric_eigen();
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(|x| c(x, 0.0)),
        )
    } else {
        let eig = m.clone().symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut sorted = CMatrix::zeros(n, n);
    let mut energies = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        energies.push(values[src]);
        let col = fix_phase(vectors.column(src).into_owned());
        sorted.set_column(dst, &col);
    }
    (energies, sorted)
}

/// Rotate `v` so its largest-modulus component is real positive.
pub fn fix_phase(mut v: CVector) -> CVector {
    let mut best = 0;
    let mut best_norm = -1.0;
    for (i, z) in v.iter().enumerate() {
        // ties resolved towards the lowest index; 1e-12 slack keeps that stable
        if z.norm() > best_norm + 1e-12 {
            best = i;
            best_norm = z.norm();
        }
    }
    if best_norm > 0.0 {
        let phase = v[best] / best_norm;
        v /= phase;
    }
    v
}

/// Unitary polar factor of a square matrix (Löwdin orthonormalization).
pub fn unitary_part(m: &CMatrix) -> CMatrix {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    u * v_t
}

/// Eigenvalues of the Hermitian matrix groups whose spread is within `tol`.
pub fn degenerate_groups(energies: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=energies.len() {
        if i == energies.len() || energies[i] - energies[i - 1] > tol {
            groups.push(start..i);
            start = i;
        }
    }
    groups
}
