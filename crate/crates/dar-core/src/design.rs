//! Data-aligned connectivity construction: increment-spine PCA,
//! shift-alignment (Kabsch) on spine coordinates, lift to the ambient
//! space, Haar mixing, and polar projection back to the orthogonal
//! group. Also the exactly block-invariant variant.

use serde::{Deserialize, Serialize};

use crate::error::{DarError, Result};
use crate::numerics::{
    haar_orthogonal, orthogonality_defect, polar_factor, spectral_norm, svd, sym_eig, Matrix,
    RngStream, Vector,
};

/// Orthogonality tolerance for emitted connectivity matrices, per
/// dimension.
pub const DESIGN_ORTHO_TOL: f64 = 1e-8;
/// Transverse leakage that must survive an exactly aligned construction
/// (`gamma_mix = 0`).
pub const EXACT_INVARIANCE_TOL: f64 = 1e-8;

/// Orthonormal basis of the increment-spine plus the PCA record that
/// produced it.
#[derive(Debug, Clone)]
pub struct SpineBasis {
    /// N x d, orthonormal columns.
    pub basis: Matrix,
    pub dim: usize,
    /// Fraction of total variance captured by the retained directions.
    pub variance_captured: f64,
    /// Full PCA spectrum of the increment cloud (singular values of the
    /// normalized cloud, descending).
    pub singular_values: Vec<f64>,
}

impl SpineBasis {
    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Spine coordinates `U^T v`.
    pub fn coordinates(&self, v: &Vector) -> Vector {
        self.basis.transpose() * v
    }

    /// Longitudinal component `U U^T v`.
    pub fn longitudinal(&self, v: &Vector) -> Vector {
        &self.basis * (self.basis.transpose() * v)
    }

    /// Transverse component `(I - U U^T) v`.
    pub fn transverse(&self, v: &Vector) -> Vector {
        v - self.longitudinal(v)
    }

    /// Largest singular value of `P_perp M U`-style products: the tight
    /// constant in `|P_perp M v| <= gamma |v|` over the spine.
    pub fn transverse_leakage_of(&self, m: &Matrix) -> f64 {
        let mu = m * &self.basis; // N x d
        let transverse = &mu - &self.basis * (self.basis.transpose() * &mu);
        spectral_norm(&transverse)
    }
}

/// Spine/alignment configuration. `window_centers` block starts are
/// sampled without replacement, each contributing `block_depth - 1`
/// consecutive coordinate pairs to the alignment problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DarConfig {
    pub variance_threshold: f64,
    pub fixed_dim: Option<usize>,
    pub block_depth: usize,
    pub window_centers: usize,
    pub gamma_mix: f64,
}

impl Default for DarConfig {
    fn default() -> Self {
        Self {
            variance_threshold: 0.95,
            fixed_dim: None,
            block_depth: 8,
            window_centers: 100,
            gamma_mix: 0.15,
        }
    }
}

impl DarConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma_mix) {
            return Err(DarError::InvalidArgument { context: format!("gamma_mix = {} outside [0,1]", self.gamma_mix) });
        }
        if self.block_depth < 2 {
            return Err(DarError::InvalidArgument { context: "block_depth must be >= 2".into() });
        }
        if self.window_centers < 1 {
            return Err(DarError::InvalidArgument { context: "window_centers must be >= 1".into() });
        }
        if !(self.variance_threshold > 0.0 && self.variance_threshold <= 1.0) {
            return Err(DarError::InvalidArgument {
                context: format!("variance_threshold = {} outside (0,1]", self.variance_threshold),
            });
        }
        Ok(())
    }
}

/// Output of the full construction.
#[derive(Debug, Clone)]
pub struct DarResult {
    /// Final orthogonal connectivity.
    pub connectivity: Matrix,
    /// Aligned operator before mixing (`U R_d U^T + (I - U U^T)`).
    pub aligned: Matrix,
    /// Kabsch rotation on spine coordinates (d x d, orthogonal).
    pub rotation: Matrix,
    pub spine: SpineBasis,
    /// Largest singular value of `P_perp B U`.
    pub measured_leakage: f64,
}

/// PCA of the increment cloud; the cloud is treated as already centered
/// (increments of a centered signal). Retains the smallest dimension
/// reaching `variance_threshold`, unless `fixed_dim` overrides it.
pub fn estimate_spine(cloud: &[Vector], cfg: &DarConfig) -> Result<SpineBasis> {
    cfg.validate()?;
    if cloud.len() < 2 {
        return Err(DarError::Empty { context: "spine estimation needs at least 2 vectors".into() });
    }
    let n = cloud[0].len();
    if cloud.iter().any(|v| v.len() != n) {
        return Err(DarError::DimensionMismatch { context: "increment cloud has mixed dimensions".into() });
    }
    let total_sq: f64 = cloud.iter().map(|v| v.norm_squared()).sum();
    if total_sq == 0.0 {
        return Err(DarError::InvalidArgument { context: "all-zero increment cloud: spine undefined".into() });
    }

    let count = cloud.len() as f64;
    let mut moment = Matrix::zeros(n, n);
    for v in cloud {
        moment.ger(1.0 / count, v, v, 1.0);
    }
    let eig = sym_eig(&moment)?;
    let variances: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = variances.iter().sum();

    let dim = match cfg.fixed_dim {
        Some(d) => {
            if d == 0 || d > n {
                return Err(DarError::InvalidArgument { context: format!("fixed_dim = {d} outside 1..={n}") });
            }
            d
        }
        None => {
            let mut acc = 0.0;
            let mut d = n;
            for (i, &v) in variances.iter().enumerate() {
                acc += v;
                if acc >= cfg.variance_threshold * total {
                    d = i + 1;
                    break;
                }
            }
            d
        }
    };

    let captured: f64 = variances.iter().take(dim).sum::<f64>() / total;
    let basis = eig.eigenvectors.columns(0, dim).into_owned();
    Ok(SpineBasis {
        basis,
        dim,
        variance_captured: captured,
        singular_values: variances.iter().map(|&v| v.sqrt()).collect(),
    })
}

/// Spine coordinates `p_n = U^T v_n` of the forcing increments.
pub fn project_coordinates(spine: &SpineBasis, cloud: &[Vector]) -> Result<Vec<Vector>> {
    if cloud.iter().any(|v| v.len() != spine.ambient_dim()) {
        return Err(DarError::DimensionMismatch { context: "cloud dimension does not match spine".into() });
    }
    Ok(cloud.iter().map(|v| spine.coordinates(v)).collect())
}

/// Stacks time-shifted coordinate snapshots. From each sampled block
/// start `c`, columns `p_c..p_{c+K-2}` go into the current matrix and
/// `p_{c+1}..p_{c+K-1}` into the next matrix; `W` starts are sampled
/// uniformly without replacement.
pub fn build_procrustes_blocks(
    coords: &[Vector],
    depth: usize,
    windows: usize,
    rng: &mut RngStream,
) -> Result<(Matrix, Matrix)> {
    if depth < 2 {
        return Err(DarError::InvalidArgument { context: "block depth must be >= 2".into() });
    }
    if windows < 1 {
        return Err(DarError::InvalidArgument { context: "window count must be >= 1".into() });
    }
    if coords.len() < depth {
        return Err(DarError::InvalidArgument {
            context: format!("need at least {depth} coordinates, have {}", coords.len()),
        });
    }
    let valid_starts = coords.len() - depth + 1;
    if windows > valid_starts {
        return Err(DarError::InvalidArgument {
            context: format!("{windows} windows requested but only {valid_starts} valid block starts"),
        });
    }
    let d = coords[0].len();
    let mut starts = rng.sample_without_replacement(valid_starts, windows);
    starts.sort_unstable();

    let cols = windows * (depth - 1);
    let mut current = Matrix::zeros(d, cols);
    let mut next = Matrix::zeros(d, cols);
    let mut j = 0;
    for &c in &starts {
        for k in 0..depth - 1 {
            current.set_column(j, &coords[c + k]);
            next.set_column(j, &coords[c + k + 1]);
            j += 1;
        }
    }
    Ok((current, next))
}

/// Closed-form orthogonal Procrustes solution minimizing
/// `|P_next - R P_current|_F` over `R` in `O(d)`: `R = U_s V_s^T` from
/// the SVD of `P_next P_current^T`. Reflections are legal minimizers,
/// so no determinant correction is applied.
pub fn kabsch(current: &Matrix, next: &Matrix) -> Result<Matrix> {
    if current.shape() != next.shape() {
        return Err(DarError::DimensionMismatch { context: "snapshot matrices must have equal shape".into() });
    }
    if current.ncols() == 0 {
        return Err(DarError::Empty { context: "kabsch needs at least one column pair".into() });
    }
    let cross = next * current.transpose();
    let (u, s, v) = svd(&cross)?;
    let largest = s.first().copied().unwrap_or(0.0);
    let smallest = s.last().copied().unwrap_or(0.0);
    if smallest <= 1e-12 * largest.max(1.0) {
        return Err(DarError::RankDeficient { smallest });
    }
    Ok(u * v.transpose())
}

/// Lifts the spine rotation to the ambient space: acts as `R_d` on the
/// spine and as the identity on its orthogonal complement.
pub fn lift_align(spine: &SpineBasis, rotation: &Matrix) -> Result<Matrix> {
    let d = spine.dim;
    if rotation.nrows() != d || rotation.ncols() != d {
        return Err(DarError::DimensionMismatch {
            context: format!("rotation is {}x{}, spine dimension is {d}", rotation.nrows(), rotation.ncols()),
        });
    }
    let n = spine.ambient_dim();
    let u = &spine.basis;
    let projector = u * u.transpose();
    Ok(u * rotation * u.transpose() + Matrix::identity(n, n) - projector)
}

/// Blends the aligned operator with a Haar-random orthogonal mixer and
/// projects back onto the orthogonal group. Returns the connectivity
/// and its measured transverse leakage on the spine.
pub fn mix_and_polarize(
    aligned: &Matrix,
    gamma_mix: f64,
    spine: &SpineBasis,
    rng: &mut RngStream,
) -> Result<(Matrix, f64)> {
    if !(0.0..=1.0).contains(&gamma_mix) {
        return Err(DarError::InvalidArgument { context: format!("gamma_mix = {gamma_mix} outside [0,1]") });
    }
    let n = aligned.nrows();
    let mixer = haar_orthogonal(n, rng)?;
    let blended = aligned * (1.0 - gamma_mix) + mixer * gamma_mix;
    let connectivity = polar_factor(&blended)?;

    let defect = orthogonality_defect(&connectivity);
    if defect > DESIGN_ORTHO_TOL * n as f64 {
        return Err(DarError::InvalidArgument { context: format!("polar factor defect {defect:.3e}") });
    }
    let leakage = spine.transverse_leakage_of(&connectivity);
    if gamma_mix == 0.0 && leakage > EXACT_INVARIANCE_TOL {
        return Err(DarError::InvalidArgument {
            context: format!("gamma_mix = 0 but leakage {leakage:.3e} is not exactly invariant"),
        });
    }
    Ok((connectivity, leakage))
}

/// Exactly block-invariant alternative: `U R_d U^T + U_perp R_perp
/// U_perp^T` with a Haar-random action on the complement. Satisfies
/// `P_perp B P_spine = 0` to machine precision.
pub fn block_invariant_variant(
    spine: &SpineBasis,
    rotation: &Matrix,
    rng: &mut RngStream,
) -> Result<Matrix> {
    let n = spine.ambient_dim();
    let d = spine.dim;
    if d >= n {
        return Err(DarError::InvalidArgument {
            context: format!("block-invariant variant needs d < N, got d = {d}, N = {n}"),
        });
    }
    // Complete U to an orthonormal basis: QR of [U | G] leaves the first
    // d columns spanning the spine, the rest spanning its complement.
    let mut stacked = Matrix::zeros(n, n);
    stacked.columns_mut(0, d).copy_from(&spine.basis);
    for j in d..n {
        for i in 0..n {
            stacked[(i, j)] = rng.standard_normal();
        }
    }
    let q = stacked.qr().q();
    let u_perp = q.columns(d, n - d).into_owned();

    let r_perp = haar_orthogonal(n - d, rng)?;
    let b = &spine.basis * rotation * spine.basis.transpose() + &u_perp * r_perp * u_perp.transpose();

    let defect = orthogonality_defect(&b);
    if defect > DESIGN_ORTHO_TOL * n as f64 {
        return Err(DarError::InvalidArgument { context: format!("block-invariant defect {defect:.3e}") });
    }
    Ok(b)
}

/// Full construction pipeline from the forcing-increment cloud.
pub fn design_connectivity(
    cloud: &[Vector],
    cfg: &DarConfig,
    rng: &mut RngStream,
) -> Result<DarResult> {
    cfg.validate()?;
    let spine = estimate_spine(cloud, cfg)?;
    let coords = project_coordinates(&spine, cloud)?;
    let (current, next) = build_procrustes_blocks(&coords, cfg.block_depth, cfg.window_centers, rng)?;
    let rotation = kabsch(&current, &next)?;
    let aligned = lift_align(&spine, &rotation)?;
    let (connectivity, measured_leakage) = mix_and_polarize(&aligned, cfg.gamma_mix, &spine, rng)?;
    Ok(DarResult { connectivity, aligned, rotation, spine, measured_leakage })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    fn unit(n: usize, i: usize) -> Vector {
        let mut v = Vector::zeros(n);
        v[i] = 1.0;
        v
    }

    #[test]
    fn spine_of_rank_one_cloud() {
        let mut rng = RngStream::new(1);
        let a = Vector::from_fn(6, |_, _| rng.standard_normal());
        let cloud: Vec<Vector> = (0..40).map(|k| &a * (0.1 * k as f64 - 2.0)).collect();
        let spine = estimate_spine(&cloud, &DarConfig::default()).unwrap();
        assert_eq!(spine.dim, 1);
        let u = spine.basis.column(0).into_owned();
        let unit_a = &a / a.norm();
        assert!((&u - &unit_a).norm().min((&u + &unit_a).norm()) < 1e-10);
        assert!((spine.variance_captured - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spine_dimension_tracks_variance_threshold() {
        // Moment matrix diag(2, 0.5, 0, 0): eigen-fractions 4/5 and 1/5.
        let n = 4;
        let cloud = vec![
            unit(n, 0) * 2.0,
            unit(n, 0) * -2.0,
            unit(n, 1),
            unit(n, 1) * -1.0,
        ];
        let low = DarConfig { variance_threshold: 0.75, ..DarConfig::default() };
        assert_eq!(estimate_spine(&cloud, &low).unwrap().dim, 1);
        let high = DarConfig { variance_threshold: 0.9, ..DarConfig::default() };
        assert_eq!(estimate_spine(&cloud, &high).unwrap().dim, 2);
    }

    #[test]
    fn spine_rejects_zero_cloud() {
        let cloud = vec![Vector::zeros(3); 5];
        assert!(estimate_spine(&cloud, &DarConfig::default()).is_err());
    }

    #[test]
    fn coordinates_satisfy_pythagoras() {
        let mut rng = RngStream::new(2);
        let cloud: Vec<Vector> = (0..30).map(|_| Vector::from_fn(8, |_, _| rng.standard_normal())).collect();
        let cfg = DarConfig { fixed_dim: Some(3), ..DarConfig::default() };
        let spine = estimate_spine(&cloud, &cfg).unwrap();
        let coords = project_coordinates(&spine, &cloud).unwrap();
        for (v, p) in cloud.iter().zip(&coords) {
            let residual = v - &spine.basis * p;
            let lhs = v.norm_squared();
            let rhs = p.norm_squared() + residual.norm_squared();
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
        }
    }

    #[test]
    fn coordinates_of_inspine_and_transverse_vectors() {
        let mut rng = RngStream::new(3);
        let cloud: Vec<Vector> = (0..30).map(|_| {
            let mut v = Vector::zeros(5);
            v[0] = rng.standard_normal();
            v[1] = rng.standard_normal();
            v
        }).collect();
        let cfg = DarConfig { fixed_dim: Some(2), ..DarConfig::default() };
        let spine = estimate_spine(&cloud, &cfg).unwrap();

        let inside = &spine.basis * Vector::from_vec(vec![0.3, -0.7]);
        let p = spine.coordinates(&inside);
        assert!(((&spine.basis * &p) - &inside).norm() < 1e-12);
        assert!((p.norm() - inside.norm()).abs() < 1e-12);

        let perp = unit(5, 4);
        assert!(spine.coordinates(&perp).norm() < 1e-12);
    }

    #[test]
    fn minimal_block_pair() {
        let p0 = Vector::from_vec(vec![1.0, 2.0]);
        let p1 = Vector::from_vec(vec![3.0, 4.0]);
        let mut rng = RngStream::new(4);
        let (current, next) = build_procrustes_blocks(&[p0.clone(), p1.clone()], 2, 1, &mut rng).unwrap();
        assert_eq!(current.ncols(), 1);
        assert_eq!(current.column(0), p0.column(0));
        assert_eq!(next.column(0), p1.column(0));
    }

    #[test]
    fn paper_block_geometry_yields_700_pairs() {
        let mut rng = RngStream::new(5);
        let coords: Vec<Vector> = (0..200).map(|_| Vector::from_fn(1, |_, _| rng.standard_normal())).collect();
        let (current, next) = build_procrustes_blocks(&coords, 8, 100, &mut rng).unwrap();
        assert_eq!(current.ncols(), 700);
        assert_eq!(next.ncols(), 700);
    }

    #[test]
    fn block_columns_are_time_shifted_by_one() {
        // Encode the time index in the coordinate value so the shift is
        // auditable from the matrices alone.
        let coords: Vec<Vector> = (0..50).map(|k| Vector::from_vec(vec![k as f64])).collect();
        let mut rng = RngStream::new(6);
        let (current, next) = build_procrustes_blocks(&coords, 5, 7, &mut rng).unwrap();
        for j in 0..current.ncols() {
            assert_eq!(next[(0, j)], current[(0, j)] + 1.0);
        }
    }

    #[test]
    fn blocks_reject_too_few_starts() {
        let coords: Vec<Vector> = (0..10).map(|k| Vector::from_vec(vec![k as f64])).collect();
        let mut rng = RngStream::new(7);
        assert!(build_procrustes_blocks(&coords, 8, 4, &mut rng).is_err());
    }

    #[test]
    fn kabsch_self_alignment_is_identity() {
        let mut rng = RngStream::new(8);
        let p = Matrix::from_fn(3, 20, |_, _| rng.standard_normal());
        let r = kabsch(&p, &p).unwrap();
        assert!((r - Matrix::identity(3, 3)).norm() < 1e-10);
    }

    #[test]
    fn kabsch_scalar_reflection() {
        let current = Matrix::from_row_slice(1, 3, &[1.0, -2.0, 0.5]);
        let next = -current.clone();
        let r = kabsch(&current, &next).unwrap();
        assert!((r[(0, 0)] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn kabsch_beats_dense_rotation_grid_in_2d() {
        let mut rng = RngStream::new(9);
        let current = Matrix::from_fn(2, 40, |_, _| rng.standard_normal());
        let next = Matrix::from_fn(2, 40, |_, _| rng.standard_normal());
        let r = kabsch(&current, &next).unwrap();
        let objective = |m: &Matrix| (&next - m * &current).norm_squared();
        let best = objective(&r);
        for k in 0..3600 {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / 3600.0;
            let (s, c) = angle.sin_cos();
            let rot = Matrix::from_row_slice(2, 2, &[c, -s, s, c]);
            let refl = Matrix::from_row_slice(2, 2, &[c, s, s, -c]);
            assert!(best <= objective(&rot) + 1e-9);
            assert!(best <= objective(&refl) + 1e-9);
        }
    }

    #[test]
    fn kabsch_rejects_rank_deficient_cross() {
        let current = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 0.0]);
        let next = current.clone();
        assert!(matches!(kabsch(&current, &next), Err(DarError::RankDeficient { .. })));
    }

    fn random_spine(n: usize, d: usize, seed: u64) -> SpineBasis {
        let mut rng = RngStream::new(seed);
        let q = haar_orthogonal(n, &mut rng).unwrap();
        SpineBasis {
            basis: q.columns(0, d).into_owned(),
            dim: d,
            variance_captured: 1.0,
            singular_values: vec![1.0; d],
        }
    }

    #[test]
    fn lift_preserves_spine_and_fixes_complement() {
        let mut rng = RngStream::new(10);
        let spine = random_spine(7, 2, 11);
        let rot = haar_orthogonal(2, &mut rng).unwrap();
        let b = lift_align(&spine, &rot).unwrap();

        let z_in = &spine.basis * Vector::from_vec(vec![1.0, -0.5]);
        let mapped = &b * &z_in;
        assert!(spine.transverse(&mapped).norm() < 1e-12);
        let expected = &spine.basis * (&rot * Vector::from_vec(vec![1.0, -0.5]));
        assert!((mapped - expected).norm() < 1e-12);

        let mut z_perp = Vector::from_fn(7, |_, _| rng.standard_normal());
        z_perp = spine.transverse(&z_perp);
        assert!(((&b * &z_perp) - &z_perp).norm() < 1e-12);

        assert!(orthogonality_defect(&b) <= 1e-10 * 7.0);
    }

    #[test]
    fn zero_mix_reproduces_aligned_operator() {
        let mut rng = RngStream::new(12);
        let spine = random_spine(9, 2, 13);
        let rot = haar_orthogonal(2, &mut rng).unwrap();
        let aligned = lift_align(&spine, &rot).unwrap();
        let (b, leakage) = mix_and_polarize(&aligned, 0.0, &spine, &mut rng).unwrap();
        assert!((b - &aligned).norm() < 1e-10);
        assert!(leakage <= 1e-8);
    }

    #[test]
    fn full_mix_reproduces_the_random_mixer() {
        let spine = random_spine(6, 1, 14);
        let rot = Matrix::from_row_slice(1, 1, &[1.0]);
        let aligned = lift_align(&spine, &rot).unwrap();
        let mut rng = RngStream::new(15);
        let mut probe = rng.clone();
        let (b, _) = mix_and_polarize(&aligned, 1.0, &spine, &mut rng).unwrap();
        let mixer = haar_orthogonal(6, &mut probe).unwrap();
        assert!((b - mixer).norm() < 1e-10);
    }

    #[test]
    fn leakage_grows_from_zero_with_mixing() {
        let spine = random_spine(20, 1, 16);
        let rot = Matrix::from_row_slice(1, 1, &[-1.0]);
        let aligned = lift_align(&spine, &rot).unwrap();
        let mut leaks = Vec::new();
        for (i, gamma) in [0.0, 0.1, 0.3].iter().enumerate() {
            let mut rng = RngStream::new(17 + i as u64);
            let (_, leak) = mix_and_polarize(&aligned, *gamma, &spine, &mut rng).unwrap();
            leaks.push(leak);
        }
        assert!(leaks[0] <= 1e-8);
        assert!(leaks[1] > 1e-4);
        assert!(leaks[2] > leaks[1] * 0.5, "leakage should be of growing order: {leaks:?}");
    }

    #[test]
    fn block_invariant_has_no_transverse_leakage() {
        let mut rng = RngStream::new(18);
        let spine = random_spine(12, 3, 19);
        let rot = haar_orthogonal(3, &mut rng).unwrap();
        let b = block_invariant_variant(&spine, &rot, &mut rng).unwrap();
        assert!(spine.transverse_leakage_of(&b) <= 1e-10);

        let mut z_perp = Vector::from_fn(12, |_, _| rng.standard_normal());
        z_perp = spine.transverse(&z_perp);
        let mapped = &b * &z_perp;
        assert!(spine.longitudinal(&mapped).norm() <= 1e-10 * mapped.norm());
    }

    #[test]
    fn block_invariant_rejects_full_dimension() {
        let mut rng = RngStream::new(20);
        let spine = random_spine(4, 4, 21);
        let rot = haar_orthogonal(4, &mut rng).unwrap();
        assert!(block_invariant_variant(&spine, &rot, &mut rng).is_err());
    }

    #[test]
    fn pipeline_produces_orthogonal_connectivity() {
        let mut rng = RngStream::new(22);
        let n = 30;
        // Rank-2 cloud with slow rotation, so the Procrustes problem is
        // well-posed.
        let q = haar_orthogonal(n, &mut rng).unwrap();
        let cloud: Vec<Vector> = (0..300)
            .map(|k| {
                let t = 0.05 * k as f64;
                let c = q.column(0) * t.cos() + q.column(1) * t.sin();
                c * (1.0 + 0.1 * (3.0 * t).sin())
            })
            .collect();
        let cfg = DarConfig { window_centers: 20, ..DarConfig::default() };
        let result = design_connectivity(&cloud, &cfg, &mut rng).unwrap();
        assert_eq!(result.spine.dim, 2);
        assert!(orthogonality_defect(&result.connectivity) <= 1e-8 * n as f64);
        assert!(orthogonality_defect(&result.rotation) <= 1e-10 * 2.0);
        assert!(result.measured_leakage < 0.6);
    }
}
