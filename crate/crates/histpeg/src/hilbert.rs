//! Dense complex linear algebra sized for desk-scale Hilbert spaces.
//!
//! Everything downstream works with square matrices of `Complex64` over
//! spaces of dimension up to a few dozen. Slot 0 of a tensor factorization
//! is the leftmost factor and the slowest-varying index, so
//! `tensor(a, b)` is the ordinary Kronecker product with `a` on the left.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Square matrix of complex amplitudes; the universal carrier for
/// projectors, unitaries, density operators and absorbed-state operators.
pub type CMatrix = DMatrix<Complex64>;

/// Column vector of complex amplitudes.
pub type CVector = DVector<Complex64>;

/// Default tolerance for structural predicates (projector, unitary, ...).
pub const DEFAULT_TOL: f64 = 1e-10;

pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn zeros(dim: usize) -> CMatrix {
    CMatrix::zeros(dim, dim)
}

/// Frobenius distance between two matrices.
pub fn distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm()
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Ordered list of per-slot dimensions of a tensor factorization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemDims {
    dims: Vec<usize>,
}

impl SubsystemDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::BadSubsystemDims { dims });
        }
        Ok(Self { dims })
    }

    /// `n_slots` copies of the same factor dimension.
    pub fn uniform(n_slots: usize, dim: usize) -> Result<Self> {
        Self::new(vec![dim; n_slots])
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn n_slots(&self) -> usize {
        self.dims.len()
    }

    pub fn slot(&self, i: usize) -> usize {
        self.dims[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.dims
    }

    pub fn all_equal(&self) -> bool {
        self.dims.windows(2).all(|w| w[0] == w[1])
    }

    /// Checks that `m` is square with dimension `self.total()`.
    pub fn matches(&self, m: &CMatrix) -> bool {
        m.nrows() == self.total() && m.ncols() == self.total()
    }

    pub fn without_slot(&self, slot: usize) -> Result<Self> {
        if slot >= self.dims.len() {
            return Err(Error::SlotOutOfRange {
                slot,
                n_slots: self.dims.len(),
            });
        }
        let mut dims = self.dims.clone();
        dims.remove(slot);
        if dims.is_empty() {
            // tracing out the only slot leaves the trivial 1-dimensional space
            dims.push(1);
        }
        Self::new(dims)
    }

    /// Appends one slot of dimension `dim` on the right.
    pub fn append(&self, dim: usize) -> Self {
        let mut dims = self.dims.clone();
        dims.push(dim);
        Self { dims }
    }
}

/// Kronecker product with the left factor owning the slowest-varying index.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Tensor product of a non-empty list, left to right.
pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    let mut it = factors.into_iter();
    let first = it.next().expect("tensor_all needs at least one factor");
    it.fold(first.clone(), |acc, m| tensor(&acc, m))
}

/// Traces out one slot of a tensor factorization; the remaining slots keep
/// their relative order. The full trace is preserved.
pub fn partial_trace(m: &CMatrix, dims: &SubsystemDims, slot: usize) -> Result<CMatrix> {
    let n = dims.n_slots();
    if slot >= n {
        return Err(Error::SlotOutOfRange { slot, n_slots: n });
    }
    if !dims.matches(m) {
        return Err(Error::DimensionMismatch {
            expected: dims.total(),
            got: m.nrows(),
        });
    }
    let d_slot = dims.slot(slot);
    // strides with slot 0 slowest-varying
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims.slot(i + 1);
    }
    let rest: Vec<usize> = (0..n).filter(|&i| i != slot).map(|i| dims.slot(i)).collect();
    let d_rest: usize = rest.iter().product::<usize>().max(1);

    // map an index over the remaining slots plus a value for the traced
    // slot back to a full index
    let expand = |rest_idx: usize, x: usize| -> usize {
        let mut out = 0usize;
        let mut r = rest_idx;
        // decode rest_idx against `rest` dims, slowest first
        let mut rest_strides = vec![1usize; rest.len()];
        for i in (0..rest.len().saturating_sub(1)).rev() {
            rest_strides[i] = rest_strides[i + 1] * rest[i + 1];
        }
        let mut k = 0;
        for (i, &stride) in strides.iter().enumerate() {
            if i == slot {
                out += x * stride;
            } else {
                let digit = r / rest_strides[k];
                r %= rest_strides[k];
                out += digit * stride;
                k += 1;
            }
        }
        out
    };

    let mut out = CMatrix::zeros(d_rest, d_rest);
    for row in 0..d_rest {
        for col in 0..d_rest {
            let mut acc = ZERO;
            for x in 0..d_slot {
                acc += m[(expand(row, x), expand(col, x))];
            }
            out[(row, col)] = acc;
        }
    }
    Ok(out)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    distance(&m.adjoint(), m) <= tol
}

/// True iff `m` is Hermitian and idempotent within `tol` (Frobenius).
pub fn is_projector(m: &CMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    is_hermitian(m, tol) && distance(&(m * m), m) <= tol
}

pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    distance(&(m.adjoint() * m), &identity(m.nrows())) <= tol
}

/// True iff `m` is Hermitian, positive semidefinite and unit trace within `tol`.
pub fn is_density(m: &CMatrix, tol: f64) -> bool {
    if !m.is_square() || !is_hermitian(m, tol) {
        return false;
    }
    if (m.trace() - ONE).norm() > tol {
        return false;
    }
    min_eigenvalue(m) >= -tol
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let eig = m.clone().symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

/// Hermitian eigendecomposition: (ascending eigenvalues, matching eigenvector columns).
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let dim = m.nrows();
    let mut vecs = CMatrix::zeros(dim, dim);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)[0]
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |a, &b| a.max(b))
}

fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix of iid standard complex Gaussians.
pub fn random_gaussian_rng(dim: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_hermitian_rng(dim: usize, rng: &mut impl Rng) -> CMatrix {
    let g = random_gaussian_rng(dim, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// Haar-like unitary via QR of a complex Gaussian matrix, with the phase of
/// the R diagonal absorbed so the draw does not depend on the QR sign
/// convention.
pub fn random_unitary_rng(dim: usize, rng: &mut impl Rng) -> CMatrix {
    let g = random_gaussian_rng(dim, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random density operator, `G G† / tr(G G†)`.
pub fn random_density_rng(dim: usize, rng: &mut impl Rng) -> CMatrix {
    let g = random_gaussian_rng(dim, rng);
    let p = &g * g.adjoint();
    let t = p.trace();
    p.scale(1.0 / t.re)
}

/// Rank-`rank` spectral projector of a random Hermitian matrix (the
/// eigenvectors of the `rank` largest eigenvalues).
pub fn random_projector_rng(dim: usize, rank: usize, rng: &mut impl Rng) -> Result<CMatrix> {
    if rank > dim {
        return Err(Error::InvalidRank { rank, dim });
    }
    let h = random_hermitian_rng(dim, rng);
    if rank == 0 {
        return Ok(zeros(dim));
    }
    let (_, vecs) = hermitian_eigen(&h);
    let mut p = zeros(dim);
    for k in (dim - rank)..dim {
        let v = vecs.column(k);
        p += v * v.adjoint();
    }
    Ok(p)
}

pub fn random_unitary(dim: usize, seed: u64) -> CMatrix {
    random_unitary_rng(dim, &mut rng_from_seed(seed))
}

pub fn random_density(dim: usize, seed: u64) -> CMatrix {
    random_density_rng(dim, &mut rng_from_seed(seed))
}

pub fn random_projector(dim: usize, rank: usize, seed: u64) -> Result<CMatrix> {
    random_projector_rng(dim, rank, &mut rng_from_seed(seed))
}

pub fn random_hermitian(dim: usize, seed: u64) -> CMatrix {
    random_hermitian_rng(dim, &mut rng_from_seed(seed))
}

/// Basis projector |k><k|.
pub fn basis_projector(dim: usize, k: usize) -> Result<CMatrix> {
    if k >= dim {
        return Err(Error::InvalidRank { rank: k, dim });
    }
    let mut p = zeros(dim);
    p[(k, k)] = ONE;
    Ok(p)
}

/// Projector onto the span of a unit vector.
pub fn ket_projector(v: &CVector) -> CMatrix {
    let n = v.norm();
    let u = v.map(|z| z / Complex64::new(n, 0.0));
    &u * u.adjoint()
}
