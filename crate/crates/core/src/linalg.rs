//! Small dense symmetric linear algebra: sample covariance, a cyclic Jacobi
//! eigensolver and random rotations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::rng::RngStream;

const SYMMETRY_TOL: f64 = 1e-10;
const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix, eigenvalues sorted in descending order.
/// Column `k` of `vectors` belongs to `values[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub vectors: DMatrix<f64>,
    pub values: DVector<f64>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `Q diag(lambda) Q^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.vectors * DMatrix::from_diagonal(&self.values) * self.vectors.transpose()
    }

    /// Per-direction step scale `sqrt(lambda + eps) / max_k sqrt(lambda_k + eps)`
    /// with `eps = 1e-10`. Negative round-off eigenvalues count as zero.
    pub fn normalized_scales(&self) -> DVector<f64> {
        let roots = self.values.map(|l| (l.max(0.0) + 1e-10).sqrt());
        let max = roots.max();
        roots / max
    }
}

/// Unbiased sample covariance of the rows of `points` (n x D).
pub fn covariance(points: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = points.nrows();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let mean = points.row_mean();
    let mut centered = points.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let mut c = centered.transpose() * &centered / (n - 1) as f64;
    symmetrize(&mut c);
    Ok(c)
}

/// Replaces `m` by `(m + m^T) / 2`.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let d = m.nrows();
    for i in 0..d {
        for j in i + 1..d {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in i + 1..d {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps until the largest off-diagonal magnitude drops below
/// `1e-12 * max |diagonal|`, for at most 100 sweeps.
pub fn eigh(s: &DMatrix<f64>) -> Result<EigenSystem> {
    let d = s.nrows();
    if s.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: s.ncols() });
    }
    let scale = s.amax().max(1.0);
    let asym = max_asymmetry(s);
    if !(asym <= SYMMETRY_TOL * scale) {
        return Err(Error::NotSymmetric(asym));
    }

    let mut a = s.clone();
    symmetrize(&mut a);
    let mut v = DMatrix::<f64>::identity(d, d);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let diag_max = (0..d).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
        let off_max = (0..d)
            .flat_map(|p| (p + 1..d).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].abs())
            .fold(0.0, f64::max);
        if off_max <= JACOBI_TOL * diag_max || off_max == 0.0 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                // Rotation angle from the stable tangent formula.
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                rotate(&mut a, &mut v, p, q, c, sn);
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = DVector::from_iterator(d, order.iter().map(|&k| a[(k, k)]));
    let vectors = DMatrix::from_fn(d, d, |r, c| v[(r, order[c])]);
    Ok(EigenSystem { vectors, values })
}

/// Applies the Jacobi rotation in the (p, q) plane: `a <- J^T a J`, `v <- v J`.
fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    let d = a.nrows();
    for k in 0..d {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..d {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..d {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Random rotation: Gram–Schmidt on a standard-normal matrix with the
/// triangular factor's diagonal made positive, then the first column negated
/// if needed so that `det = +1`.
pub fn random_orthogonal(dim: usize, rng: &mut RngStream) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.normal());
    let mut q = DMatrix::<f64>::zeros(dim, dim);
    for j in 0..dim {
        let mut col = g.column(j).into_owned();
        // Two passes of modified Gram-Schmidt for numerical orthogonality.
        for _ in 0..2 {
            for k in 0..j {
                let qk = q.column(k);
                let proj = qk.dot(&col);
                col -= qk * proj;
            }
        }
        let norm = col.norm();
        q.set_column(j, &(col / norm));
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Largest absolute entry of `Q^T Q - I`.
pub fn orthogonality_error(q: &DMatrix<f64>) -> f64 {
    let d = q.ncols();
    (q.transpose() * q - DMatrix::<f64>::identity(d, d)).amax()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_symmetric(d: usize, rng: &mut RngStream) -> DMatrix<f64> {
        let m = DMatrix::from_fn(d, d, |_, _| rng.normal());
        (&m + m.transpose()) * 0.5
    }

    fn relative_reconstruction_error(s: &DMatrix<f64>, e: &EigenSystem) -> f64 {
        (e.reconstruct() - s).amax() / s.amax().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn covariance_examples() {
        let same = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0]);
        assert_eq!(covariance(&same).unwrap(), DMatrix::zeros(3, 3));
        let line = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 2.0, 0.0]);
        assert_eq!(
            covariance(&line).unwrap(),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])
        );
        assert_eq!(
            covariance(&DMatrix::zeros(1, 2)),
            Err(Error::InsufficientSamples { needed: 2, got: 1 })
        );
    }

    #[test]
    fn covariance_matches_double_loop() {
        let mut rng = RngStream::new(4);
        let x = DMatrix::from_fn(5, 3, |_, _| rng.normal());
        let c = covariance(&x).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mi: f64 = (0..5).map(|k| x[(k, i)]).sum::<f64>() / 5.0;
                let mj: f64 = (0..5).map(|k| x[(k, j)]).sum::<f64>() / 5.0;
                let direct: f64 =
                    (0..5).map(|k| (x[(k, i)] - mi) * (x[(k, j)] - mj)).sum::<f64>() / 4.0;
                assert!((c[(i, j)] - direct).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn eigh_identity_and_diagonal() {
        let e = eigh(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(e.values.as_slice(), &[1.0, 1.0, 1.0]);
        assert!(orthogonality_error(&e.vectors) < 1e-12);

        let e = eigh(&DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0]))).unwrap();
        assert_eq!(e.values.as_slice(), &[4.0, 1.0]);
        assert_eq!(e.vectors[(0, 0)], 0.0);
        assert_eq!(e.vectors[(1, 0)].abs(), 1.0);
        assert_eq!(e.vectors[(0, 1)].abs(), 1.0);
    }

    #[test]
    fn eigh_rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(eigh(&m), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn eigh_zero_matrix() {
        let e = eigh(&DMatrix::zeros(4, 4)).unwrap();
        assert!(e.values.iter().all(|&v| v == 0.0));
        assert!(orthogonality_error(&e.vectors) == 0.0);
    }

    #[test]
    fn eigh_random_six_by_six() {
        let mut rng = RngStream::new(6);
        let s = random_symmetric(6, &mut rng);
        let e = eigh(&s).unwrap();
        assert!(relative_reconstruction_error(&s, &e) <= 1e-8);
        assert!(orthogonality_error(&e.vectors) <= 1e-10);
        assert!(e.values.as_slice().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn random_orthogonal_examples() {
        let q1 = random_orthogonal(1, &mut RngStream::new(0));
        assert_eq!(q1, DMatrix::from_element(1, 1, 1.0));
        for seed in 0..5 {
            let q = random_orthogonal(5, &mut RngStream::new(seed));
            assert!(orthogonality_error(&q) <= 1e-10);
            assert!((q.determinant() - 1.0).abs() < 1e-10);
        }
        assert_eq!(
            random_orthogonal(4, &mut RngStream::new(3)),
            random_orthogonal(4, &mut RngStream::new(3))
        );
    }

    #[test]
    fn normalized_scales_peak_at_one() {
        let e = EigenSystem {
            vectors: DMatrix::identity(3, 3),
            values: DVector::from_vec(vec![4.0, 1.0, -1e-18]),
        };
        let s = e.normalized_scales();
        assert_eq!(s[0], 1.0);
        assert!((s[1] - 0.5).abs() < 1e-9);
        assert!(s[2] > 0.0 && s[2] < 1e-4);
    }

    proptest! {
        #[test]
        fn eigen_sum_is_trace(seed in any::<u64>(), d in 1usize..12) {
            let s = random_symmetric(d, &mut RngStream::new(seed));
            let e = eigh(&s).unwrap();
            let tr = s.trace();
            prop_assert!((e.values.sum() - tr).abs() <= 1e-8 * tr.abs().max(1.0));
        }

        #[test]
        fn rotations_preserve_norms(seed in any::<u64>(), d in 1usize..15) {
            let mut rng = RngStream::new(seed);
            let q = random_orthogonal(d, &mut rng);
            let x = DVector::from_fn(d, |_, _| rng.normal());
            let y = &q * &x;
            prop_assert!((y.norm() - x.norm()).abs() <= 1e-10 * x.norm());
        }
    }
}
