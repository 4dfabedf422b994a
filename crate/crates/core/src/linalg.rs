//! Dense complex linear algebra helpers shared by every module.
//!
//! Everything here works on `nalgebra` dynamic matrices of `Complex64`.
//! Hermitian inputs that happen to be real are diagonalized with the real
//! symmetric solver, which is several times faster and is what makes the
//! 1024-dimensional Ising spectra cheap.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

fn is_real(m: &CMatrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

fn is_diagonal(m: &CMatrix) -> bool {
    let n = m.nrows();
    (0..n).all(|j| (0..n).all(|i| i == j || m[(i, j)] == ZERO))
}

fn sorted_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn eigh(m: &CMatrix) -> HermitianEigen {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "eigh needs a square matrix");
    if is_diagonal(m) {
        let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
        let order = sorted_order(&diag);
        let mut vectors = CMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            vectors[(i, col)] = ONE;
        }
        return HermitianEigen { values: order.iter().map(|&i| diag[i]).collect(), vectors };
    }
    if is_real(m) {
        let real = m.map(|z| z.re);
        let eig = real.symmetric_eigen();
        let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let order = sorted_order(&values);
        let vectors = CMatrix::from_fn(n, n, |i, col| C64::new(eig.eigenvectors[(i, order[col])], 0.0));
        return HermitianEigen { values: order.iter().map(|&i| values[i]).collect(), vectors };
    }
    let eig = m.clone().symmetric_eigen();
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let order = sorted_order(&values);
    let vectors = CMatrix::from_fn(n, n, |i, col| eig.eigenvectors[(i, order[col])]);
    HermitianEigen { values: order.iter().map(|&i| values[i]).collect(), vectors }
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    let mut values: Vec<f64> = if is_diagonal(m) {
        (0..n).map(|i| m[(i, i)].re).collect()
    } else if is_real(m) {
        m.map(|z| z.re).symmetric_eigenvalues().iter().copied().collect()
    } else {
        m.clone().symmetric_eigenvalues().iter().copied().collect()
    };
    values.sort_by(f64::total_cmp);
    values
}

/// Spectral norm of a Hermitian matrix, `max |λ|`.
pub fn hermitian_norm(m: &CMatrix) -> f64 {
    let v = eigvalsh(m);
    match (v.first(), v.last()) {
        (Some(lo), Some(hi)) => lo.abs().max(hi.abs()),
        _ => 0.0,
    }
}

/// Operator 2-norm (largest singular value) of an arbitrary matrix.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entrywise deviation of `m† m` from the identity.
pub fn unitarity_error(m: &CMatrix) -> f64 {
    let n = m.ncols();
    let g = m.adjoint() * m;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

/// `V diag(f(λ)) V†` for a Hermitian eigendecomposition.
pub fn spectral_map(eig: &HermitianEigen, f: impl Fn(f64) -> C64) -> CMatrix {
    let n = eig.values.len();
    let mut scaled = eig.vectors.clone();
    for (col, &lam) in eig.values.iter().enumerate() {
        let w = f(lam);
        for row in 0..n {
            scaled[(row, col)] *= w;
        }
    }
    scaled * eig.vectors.adjoint()
}

/// Matrix function of a Hermitian matrix through its eigendecomposition.
pub fn hermitian_fn(m: &CMatrix, f: impl Fn(f64) -> C64) -> CMatrix {
    spectral_map(&eigh(m), f)
}

/// `exp(-i x H)` for Hermitian `H`.
pub fn expi_hermitian(h: &CMatrix, x: f64) -> CMatrix {
    hermitian_fn(h, |lam| C64::from_polar(1.0, -x * lam))
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Kronecker product `a ⊗ b` (first factor is the most significant index).
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Embed an operator acting on `support` into the full `d^n` space.
///
/// Site `i` is digit `i` of the base-`d` basis index (little-endian), and
/// `support[0]` is the most significant factor of `block`.
pub fn embed(block: &CMatrix, support: &[usize], n: usize, d: usize) -> CMatrix {
    let dim = d.pow(n as u32);
    let local = d.pow(support.len() as u32);
    assert_eq!(block.nrows(), local);
    let place: Vec<usize> = support.iter().map(|&s| d.pow(s as u32)).collect();
    let mut out = CMatrix::zeros(dim, dim);
    for x in 0..dim {
        let mut rest = x;
        let mut lx = 0usize;
        for &p in &place {
            let digit = (x / p) % d;
            lx = lx * d + digit;
            rest -= digit * p;
        }
        for ly in 0..local {
            let amp = block[(ly, lx)];
            if amp == ZERO {
                continue;
            }
            let mut y = rest;
            let mut code = ly;
            for &p in place.iter().rev() {
                y += (code % d) * p;
                code /= d;
            }
            out[(y, x)] += amp;
        }
    }
    out
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// GUE-style random Hermitian matrix rescaled to spectral norm `norm`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize, norm: f64) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    let scale = hermitian_norm(&h);
    if scale == 0.0 {
        return h;
    }
    h * C64::new(norm / scale, 0.0)
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
/// of `R`'s diagonal folded back into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Unitary with Haar eigenvectors and the given eigenphases.
pub fn unitary_with_phases(vectors: &CMatrix, phases: &[f64]) -> CMatrix {
    let n = phases.len();
    let mut scaled = vectors.clone();
    for (col, &phi) in phases.iter().enumerate() {
        let w = C64::from_polar(1.0, phi);
        for row in 0..n {
            scaled[(row, col)] *= w;
        }
    }
    scaled * vectors.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn embed_matches_kronecker_order() {
        let x = pauli_x();
        let z = pauli_z();
        let id = CMatrix::identity(2, 2);
        // support [1, 0] on two sites: block x⊗z puts x on site 1 (most significant bit).
        let block = kron(&x, &z);
        let full = embed(&block, &[1, 0], 2, 2);
        assert!((&full - &block).norm() < 1e-14);
        // σx on site 0 of three sites is I⊗I⊗X in big-endian Kronecker order.
        let full = embed(&x, &[0], 3, 2);
        let expect = kron(&kron(&id, &id), &x);
        assert!((&full - &expect).norm() < 1e-14);
    }

    #[test]
    fn eigh_reconstructs_complex_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = random_hermitian(&mut rng, 6, 2.0);
        let eig = eigh(&h);
        let back = spectral_map(&eig, |l| C64::new(l, 0.0));
        assert!((&back - &h).norm() < 1e-12);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        assert!((hermitian_norm(&h) - 2.0).abs() < 1e-12);
        assert!((op_norm(&h) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_unitary(&mut rng, 8);
        assert!(unitarity_error(&u) < 1e-12);
    }
}
