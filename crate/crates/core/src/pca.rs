//! Principal component analysis via the covariance matrix and a cyclic
//! Jacobi eigensolver.

use serde::{Deserialize, Serialize};

use crate::nn::Matrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k x d`, orthonormal rows in descending-variance order.
    pub components: Matrix,
    pub explained_variance: Vec<f64>,
}

/// Eigen-decomposition of a symmetric matrix.
///
/// Returns eigenvalues in descending order and the matching unit
/// eigenvectors as the rows of the returned matrix. Only the upper triangle
/// of `a` is trusted to be symmetric; the lower is assumed to mirror it.
pub fn symmetric_eigen(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::shape("symmetric_eigen", n, a.cols()));
    }
    let mut m = a.clone();
    let mut v = Matrix::identity(n);

    let scale: f64 = m.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        return Ok((vec![0.0; n], v));
    }

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| m.get(p, q) * m.get(p, q))
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // A <- J^T A J on rows/cols p and q
                for k in 0..n {
                    let akp = m.get(k, p);
                    let akq = m.get(k, q);
                    m.set(k, p, c * akp - s * akq);
                    m.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = m.get(p, k);
                    let aqk = m.get(q, k);
                    m.set(p, k, c * apk - s * aqk);
                    m.set(q, k, s * apk + c * aqk);
                }
                m.set(p, q, 0.0);
                m.set(q, p, 0.0);

                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(j, j).total_cmp(&m.get(i, i)).then(i.cmp(&j)));

    let values = order.iter().map(|&i| m.get(i, i)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (r, &i) in order.iter().enumerate() {
        for k in 0..n {
            vectors.set(r, k, v.get(k, i));
        }
    }
    Ok((values, vectors))
}

/// Flip each row so its largest-magnitude entry is positive (first such
/// entry on exact ties).
fn fix_signs(components: &mut Matrix) {
    for r in 0..components.rows() {
        let row = components.row(r);
        let mut best = 0;
        for (i, v) in row.iter().enumerate() {
            if v.abs() > row[best].abs() {
                best = i;
            }
        }
        if row[best] < 0.0 {
            for c in 0..components.cols() {
                let v = components.get(r, c);
                components.set(r, c, -v);
            }
        }
    }
}

/// Sample covariance (1/(n-1) normalization) and column means.
pub fn covariance(x: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = x.rows();
    let d = x.cols();
    if n < 2 {
        return Err(Error::invalid(format!(
            "covariance needs at least 2 samples, got {n}"
        )));
    }
    let mut mean = vec![0.0; d];
    for row in x.row_iter() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let mut cov = Matrix::zeros(d, d);
    let mut centered = vec![0.0; d];
    for row in x.row_iter() {
        for ((c, v), m) in centered.iter_mut().zip(row).zip(&mean) {
            *c = v - m;
        }
        for i in 0..d {
            for j in i..d {
                let cur = cov.get(i, j);
                cov.set(i, j, cur + centered[i] * centered[j]);
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov.get(i, j) / denom;
            cov.set(i, j, v);
            cov.set(j, i, v);
        }
    }
    Ok((mean, cov))
}

/// Fit the top-`k` principal components of the rows of `x`.
pub fn fit_pca(x: &Matrix, k: usize) -> Result<PcaModel> {
    let d = x.cols();
    if k == 0 || k > d {
        return Err(Error::invalid(format!(
            "PCA needs 1 <= k <= {d} (data dimension), got k = {k}"
        )));
    }
    let (mean, cov) = covariance(x)?;
    let (values, vectors) = symmetric_eigen(&cov)?;

    let mut components = vectors.select_rows(&(0..k).collect::<Vec<_>>());
    fix_signs(&mut components);
    // Rank-deficient covariance can yield tiny negative eigenvalues.
    let explained_variance = values[..k].iter().map(|v| v.max(0.0)).collect();
    Ok(PcaModel {
        mean,
        components,
        explained_variance,
    })
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn n_components(&self) -> usize {
        self.components.rows()
    }

    /// `components * (x - mean)`.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.mean.len() {
            return Err(Error::shape("PcaModel::project", self.mean.len(), x.len()));
        }
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        self.components.matvec(&centered)
    }

    pub fn project_rows(&self, x: &Matrix) -> Result<Matrix> {
        let rows = x
            .row_iter()
            .map(|r| self.project(r))
            .collect::<Result<Vec<_>>>()?;
        if rows.is_empty() {
            return Ok(Matrix::zeros(0, self.n_components()));
        }
        Matrix::from_rows(&rows)
    }

    /// Map a projected vector back to input space: `mean + components^T y`.
    pub fn back_project(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.n_components() {
            return Err(Error::shape(
                "PcaModel::back_project",
                self.n_components(),
                y.len(),
            ));
        }
        let mut out = self.mean.clone();
        for (r, &coef) in y.iter().enumerate() {
            for (o, c) in out.iter_mut().zip(self.components.row(r)) {
                *o += coef * c;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;
    use rand::Rng;

    fn random_matrix(n: usize, d: usize, seed: u64) -> Matrix {
        let mut rng = seeded_rng(seed);
        let data = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        Matrix::from_vec(n, d, data).unwrap()
    }

    #[test]
    fn axis_aligned_data() {
        let x = Matrix::from_rows(&[[-2.0, 0.0], [-1.0, 0.0], [0.5, 0.0], [3.0, 0.0]]).unwrap();
        let p = fit_pca(&x, 1).unwrap();
        assert!((p.components.get(0, 0).abs() - 1.0).abs() < 1e-12);
        assert!(p.components.get(0, 1).abs() < 1e-12);
        // sign convention
        assert!(p.components.get(0, 0) > 0.0);
    }

    #[test]
    fn project_examples() {
        let model = PcaModel {
            mean: vec![2.0, 9.0],
            components: Matrix::from_rows(&[[1.0, 0.0]]).unwrap(),
            explained_variance: vec![1.0],
        };
        assert_eq!(model.project(&[5.0, 9.0]).unwrap(), vec![3.0]);
        assert_eq!(model.project(&[2.0, 9.0]).unwrap(), vec![0.0]);
        assert!(matches!(model.project(&[1.0]), Err(Error::Shape { .. })));
    }

    #[test]
    fn full_rank_round_trip_and_norm() {
        let x = random_matrix(20, 4, 3);
        let p = fit_pca(&x, 4).unwrap();
        for row in x.row_iter() {
            let y = p.project(row).unwrap();
            let back = p.back_project(&y).unwrap();
            for (a, b) in back.iter().zip(row) {
                assert!((a - b).abs() < 1e-8);
            }
            let n1: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let n2: f64 = row
                .iter()
                .zip(&p.mean)
                .map(|(a, m)| (a - m) * (a - m))
                .sum::<f64>()
                .sqrt();
            assert!((n1 - n2).abs() < 1e-8);
        }
    }

    #[test]
    fn components_orthonormal_and_variance_sorted() {
        let x = random_matrix(50, 6, 8);
        let p = fit_pca(&x, 6).unwrap();
        let gram = p.components.matmul(&p.components.transpose()).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((gram.get(i, j) - expected).abs() < 1e-8);
            }
        }
        assert!(p.explained_variance.windows(2).all(|w| w[0] >= w[1]));

        // variance of the projection along each component
        let proj = p.project_rows(&x).unwrap();
        for i in 0..6 {
            let col: Vec<f64> = proj.row_iter().map(|r| r[i]).collect();
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (col.len() - 1) as f64;
            assert!(
                (var - p.explained_variance[i]).abs() <= 1e-6 * p.explained_variance[i].max(1e-12)
            );
        }
    }

    #[test]
    fn rank_deficient_allowed() {
        let x = Matrix::from_rows(&[[1.0, 2.0, 0.0], [2.0, 4.0, 0.0], [3.0, 6.0, 0.0]]).unwrap();
        let p = fit_pca(&x, 3).unwrap();
        assert!(p.explained_variance[1].abs() < 1e-12);
        assert!(p.explained_variance[2].abs() < 1e-12);
    }

    #[test]
    fn invalid_k() {
        let x = random_matrix(5, 2, 0);
        assert!(matches!(fit_pca(&x, 3), Err(Error::InvalidArgument(_))));
        assert!(fit_pca(&x, 0).is_err());
        let one = random_matrix(1, 2, 0);
        assert!(fit_pca(&one, 1).is_err());
    }
}
