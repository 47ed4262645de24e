//! Dense linear-algebra kernels and seeded random sampling.
//!
//! Everything here is deterministic: the same inputs (and the same
//! [`RngStream`] seed) produce bit-identical results across runs and
//! platforms. All tolerances are fixed constants so that downstream
//! geometry checks have a stable baseline.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{DarError, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative reconstruction tolerance for the SVD.
pub const SVD_RESIDUAL_TOL: f64 = 1e-10;
/// Reconstruction tolerance for the symmetric eigendecomposition,
/// relative to `max(1, |m|_F)`.
pub const EIG_RESIDUAL_TOL: f64 = 1e-9;
/// Relative residual tolerance for SPD solves.
pub const SPD_RESIDUAL_TOL: f64 = 1e-9;
/// Relative asymmetry tolerance accepted by [`sym_eig`].
pub const SYMMETRY_TOL: f64 = 1e-8;
/// Smallest singular value accepted by [`polar_factor`].
pub const POLAR_RANK_TOL: f64 = 1e-12;
/// Per-dimension orthogonality tolerance (`|Q^T Q - I|_F <= tol * n`).
pub const ORTHO_TOL: f64 = 1e-10;

pub fn is_finite_matrix(m: &Matrix) -> bool {
    m.iter().all(|v| v.is_finite())
}

fn require_finite(m: &Matrix, context: &str) -> Result<()> {
    if is_finite_matrix(m) {
        Ok(())
    } else {
        Err(DarError::NonFinite { context: context.to_string() })
    }
}

/// `|m^T m - I|_F`, the departure of `m`'s columns from orthonormality.
pub fn orthogonality_defect(m: &Matrix) -> f64 {
    let gram = m.transpose() * m;
    (gram - Matrix::identity(m.ncols(), m.ncols())).norm()
}

/// Largest singular value; 0 for an empty matrix.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let svd = m.clone().svd(false, false);
    svd.singular_values[0]
}

/// Thin singular value decomposition `m = U S V^T` with `S` descending.
///
/// # Errors
/// Rejects non-finite input and any factorization whose reconstruction
/// residual exceeds [`SVD_RESIDUAL_TOL`] relative to `|m|_F`.
pub fn svd(m: &Matrix) -> Result<(Matrix, Vec<f64>, Matrix)> {
    require_finite(m, "svd input")?;
    let decomp = m.clone().svd(true, true);
    let u = decomp.u.expect("svd requested u");
    let v_t = decomp.v_t.expect("svd requested v_t");
    let singular = decomp.singular_values.iter().copied().collect::<Vec<f64>>();

    let s = Matrix::from_diagonal(&DVector::from_vec(singular.clone()));
    let residual = (&u * &s * &v_t - m).norm();
    let tol = SVD_RESIDUAL_TOL * m.norm().max(f64::MIN_POSITIVE);
    if residual > tol && m.norm() > 0.0 {
        return Err(DarError::ResidualTooLarge { residual, tolerance: tol });
    }
    Ok((u, singular, v_t.transpose()))
}

/// Eigendecomposition of a symmetric matrix, eigenvalues descending and
/// eigenvector columns orthonormal in matching order.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Symmetric eigendecomposition `m = Q Lambda Q^T`.
///
/// Input asymmetry up to [`SYMMETRY_TOL`] (relative) is averaged away
/// before decomposing; anything beyond that is an error.
pub fn sym_eig(m: &Matrix) -> Result<EigenDecomposition> {
    require_finite(m, "sym_eig input")?;
    if m.nrows() != m.ncols() {
        return Err(DarError::DimensionMismatch {
            context: format!("sym_eig requires a square matrix, got {}x{}", m.nrows(), m.ncols()),
        });
    }
    let asymmetry = (m - m.transpose()).norm();
    if asymmetry > SYMMETRY_TOL * m.norm().max(f64::MIN_POSITIVE) {
        return Err(DarError::Asymmetric { asymmetry });
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym.clone());

    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).expect("finite eigenvalues"));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }

    let lambda = Matrix::from_diagonal(&DVector::from_vec(eigenvalues.clone()));
    let residual = (&eigenvectors * &lambda * eigenvectors.transpose() - &sym).norm();
    let tol = EIG_RESIDUAL_TOL * sym.norm().max(1.0);
    if residual > tol {
        return Err(DarError::ResidualTooLarge { residual, tolerance: tol });
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// Solves `m x = rhs` for symmetric positive-definite `m` via Cholesky.
///
/// # Errors
/// Reports the failing pivot index when `m` is not positive definite,
/// and rejects solutions whose relative residual exceeds
/// [`SPD_RESIDUAL_TOL`].
pub fn solve_spd(m: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    require_finite(m, "solve_spd matrix")?;
    require_finite(rhs, "solve_spd rhs")?;
    let n = m.nrows();
    if m.ncols() != n {
        return Err(DarError::DimensionMismatch { context: "solve_spd requires square m".into() });
    }
    if rhs.nrows() != n {
        return Err(DarError::DimensionMismatch {
            context: format!("rhs has {} rows, matrix has {}", rhs.nrows(), n),
        });
    }

    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut diag = m[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Err(DarError::NotPositiveDefinite { pivot: j, value: diag });
        }
        let diag = diag.sqrt();
        l[(j, j)] = diag;
        for i in j + 1..n {
            let mut sum = m[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = sum / diag;
        }
    }

    let mut x = rhs.clone();
    for col in 0..x.ncols() {
        // forward: L z = rhs
        for i in 0..n {
            let mut v = x[(i, col)];
            for k in 0..i {
                v -= l[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = v / l[(i, i)];
        }
        // backward: L^T x = z
        for i in (0..n).rev() {
            let mut v = x[(i, col)];
            for k in i + 1..n {
                v -= l[(k, i)] * x[(k, col)];
            }
            x[(i, col)] = v / l[(i, i)];
        }
    }

    let residual = (m * &x - rhs).norm();
    let tol = SPD_RESIDUAL_TOL * rhs.norm().max(f64::MIN_POSITIVE);
    if residual > tol && rhs.norm() > 0.0 {
        return Err(DarError::ResidualTooLarge { residual, tolerance: tol });
    }
    Ok(x)
}

/// Orthogonal factor of the polar decomposition: the Frobenius-closest
/// orthogonal matrix to `m`, computed as `U_s V_s^T` from the SVD.
pub fn polar_factor(m: &Matrix) -> Result<Matrix> {
    if m.nrows() != m.ncols() {
        return Err(DarError::DimensionMismatch { context: "polar_factor requires a square matrix".into() });
    }
    let (u, s, v) = svd(m)?;
    let smallest = s.last().copied().unwrap_or(0.0);
    if smallest <= POLAR_RANK_TOL {
        return Err(DarError::RankDeficient { smallest });
    }
    Ok(u * v.transpose())
}

/// Haar-distributed orthogonal matrix: QR of a standard-Gaussian matrix
/// with the R-diagonal signs folded into Q.
pub fn haar_orthogonal(n: usize, rng: &mut RngStream) -> Result<Matrix> {
    if n == 0 {
        return Err(DarError::InvalidArgument { context: "haar_orthogonal requires n >= 1".into() });
    }
    let g = Matrix::from_fn(n, n, |_, _| rng.standard_normal());
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for i in 0..n {
        if r[(i, i)] < 0.0 {
            let col = -q.column(i);
            q.set_column(i, &col);
        }
    }
    Ok(q)
}

/// Stable 64-bit FNV-1a hash of (master seed, index, label). Used to
/// derive independent child streams; adding new labels never perturbs
/// existing ones.
pub fn child_seed(master: u64, index: u64, label: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h = (h ^ u64::from(b)).wrapping_mul(PRIME);
        }
    };
    eat(&master.to_le_bytes());
    eat(&index.to_le_bytes());
    eat(label.as_bytes());
    h
}

/// Seeded, reproducible random stream (ChaCha12). Streams are never
/// shared between trial workers; derive a child per trial instead.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub const ALGORITHM: &'static str = "chacha12";

    pub fn new(seed: u64) -> Self {
        Self { seed, rng: ChaCha12Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream, keyed by label and index.
    pub fn child(&self, label: &str, index: u64) -> Self {
        Self::new(child_seed(self.seed, index, label))
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    pub fn index_below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// `k` distinct indices drawn uniformly from `0..n` (partial
    /// Fisher-Yates), in draw order.
    pub fn sample_without_replacement(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot draw {k} from {n} without replacement");
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.index_below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }

    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.index_below(i + 1);
            xs.swap(i, j);
        }
    }
}
