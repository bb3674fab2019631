//! The separation operator: push each class mean away from the centre of
//! all class means, then translate latent vectors by the per-class offset.
//!
//! For classes `c = 1..m` in ascending id order:
//!
//! ```text
//! mu[c]     = mean of the class's PCA-projected samples
//! mu_bar    = mean of mu[c] over classes
//! t[c]_i    = +1 if mu[c]_i >= mu_bar_i else -1
//! S[c]      = S * (c + 2)
//! mu_hat[c] = S[c] * t[c]
//! v[c]      = mu_hat[c] - mu[c]
//! z         = e + v[class]
//! ```

use serde::{Deserialize, Serialize};

use crate::nn::Matrix;
use crate::{Error, Result};

/// How the centre `mu_bar` is computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenterRule {
    /// Unweighted mean of the class means.
    #[default]
    MeanOfClassMeans,
    /// Mean of every sample, so large classes dominate.
    SampleMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassMeans {
    pub class_ids: Vec<usize>,
    pub mu: Vec<Vec<f64>>,
    pub mu_bar: Vec<f64>,
}

/// Frozen per-class statistics of the separation operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformPlan {
    /// Ascending.
    pub class_ids: Vec<usize>,
    pub mu: Vec<Vec<f64>>,
    pub mu_bar: Vec<f64>,
    pub t: Vec<Vec<f64>>,
    pub scale_base: f64,
    pub scale: Vec<f64>,
    pub mu_hat: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

/// Per-class means of `xr` rows and their centre.
///
/// `class_ids` lists every class that must be present; it is sorted before
/// use so the output order is ascending.
pub fn compute_class_means(
    xr: &Matrix,
    labels: &[usize],
    class_ids: &[usize],
    rule: CenterRule,
) -> Result<ClassMeans> {
    if labels.len() != xr.rows() {
        return Err(Error::shape(
            "compute_class_means labels",
            xr.rows(),
            labels.len(),
        ));
    }
    if class_ids.is_empty() {
        return Err(Error::invalid("at least one class is required"));
    }
    let mut ids = class_ids.to_vec();
    ids.sort_unstable();
    ids.dedup();

    let d = xr.cols();
    let mut sums = vec![vec![0.0; d]; ids.len()];
    let mut counts = vec![0usize; ids.len()];
    for (row, &label) in xr.row_iter().zip(labels) {
        let slot = ids
            .binary_search(&label)
            .map_err(|_| Error::invalid(format!("label {label} is not in the class list")))?;
        counts[slot] += 1;
        for (s, v) in sums[slot].iter_mut().zip(row) {
            *s += v;
        }
    }
    if let Some(pos) = counts.iter().position(|&c| c == 0) {
        return Err(Error::invalid(format!("class {} has no samples", ids[pos])));
    }
    let mu: Vec<Vec<f64>> = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &n)| s.into_iter().map(|v| v / n as f64).collect())
        .collect();

    let mu_bar = match rule {
        CenterRule::MeanOfClassMeans => {
            let mut bar = vec![0.0; d];
            for m in &mu {
                for (b, v) in bar.iter_mut().zip(m) {
                    *b += v;
                }
            }
            bar.iter_mut().for_each(|b| *b /= mu.len() as f64);
            bar
        }
        CenterRule::SampleMean => {
            let mut bar = vec![0.0; d];
            for (m, &n) in mu.iter().zip(&counts) {
                for (b, v) in bar.iter_mut().zip(m) {
                    *b += v * n as f64;
                }
            }
            bar.iter_mut().for_each(|b| *b /= labels.len() as f64);
            bar
        }
    };
    Ok(ClassMeans {
        class_ids: ids,
        mu,
        mu_bar,
    })
}

/// Sign of each class mean's offset from the centre; ties go to `+1`.
pub fn compute_directions(mu: &[Vec<f64>], mu_bar: &[f64]) -> Vec<Vec<f64>> {
    mu.iter()
        .map(|m| {
            m.iter()
                .zip(mu_bar)
                .map(|(a, b)| if a >= b { 1.0 } else { -1.0 })
                .collect()
        })
        .collect()
}

/// `S^c = S * (c + 2)` for the 1-based class position `c`, and
/// `mu_hat^c = S^c * t^c`.
pub fn compute_transformed_means(
    t: &[Vec<f64>],
    scale_base: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if !scale_base.is_finite() || scale_base <= 0.0 {
        return Err(Error::invalid(format!(
            "scale S must be positive and finite, got {scale_base}"
        )));
    }
    let scale: Vec<f64> = (1..=t.len()).map(|c| scale_base * (c + 2) as f64).collect();
    let mu_hat = t
        .iter()
        .zip(&scale)
        .map(|(dir, &s)| dir.iter().map(|v| s * v).collect())
        .collect();
    Ok((scale, mu_hat))
}

pub fn compute_translation_vectors(mu: &[Vec<f64>], mu_hat: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if mu.len() != mu_hat.len() {
        return Err(Error::shape(
            "compute_translation_vectors",
            mu.len(),
            mu_hat.len(),
        ));
    }
    mu.iter()
        .zip(mu_hat)
        .map(|(m, h)| {
            if m.len() != h.len() {
                return Err(Error::shape(
                    "compute_translation_vectors",
                    m.len(),
                    h.len(),
                ));
            }
            Ok(h.iter().zip(m).map(|(a, b)| a - b).collect())
        })
        .collect()
}

impl TransformPlan {
    /// Build a plan from already computed class means.
    pub fn from_means(means: ClassMeans, scale_base: f64) -> Result<Self> {
        let t = compute_directions(&means.mu, &means.mu_bar);
        let (scale, mu_hat) = compute_transformed_means(&t, scale_base)?;
        let v = compute_translation_vectors(&means.mu, &mu_hat)?;
        Ok(Self {
            class_ids: means.class_ids,
            mu: means.mu,
            mu_bar: means.mu_bar,
            t,
            scale_base,
            scale,
            mu_hat,
            v,
        })
    }

    /// Build a plan from projected samples.
    pub fn fit(
        xr: &Matrix,
        labels: &[usize],
        class_ids: &[usize],
        scale_base: f64,
        rule: CenterRule,
    ) -> Result<Self> {
        let means = compute_class_means(xr, labels, class_ids, rule)?;
        Self::from_means(means, scale_base)
    }

    pub fn latent_dim(&self) -> usize {
        self.mu_bar.len()
    }

    fn slot(&self, class_id: usize) -> Result<usize> {
        self.class_ids.binary_search(&class_id).map_err(|_| {
            Error::invalid(format!(
                "class {class_id} is not part of the transform plan"
            ))
        })
    }

    pub fn translation(&self, class_id: usize) -> Result<&[f64]> {
        Ok(&self.v[self.slot(class_id)?])
    }

    pub fn class_mean(&self, class_id: usize) -> Result<&[f64]> {
        Ok(&self.mu[self.slot(class_id)?])
    }

    /// `z = e + v^{class_id}`.
    pub fn apply(&self, e: &[f64], class_id: usize) -> Result<Vec<f64>> {
        if e.len() != self.latent_dim() {
            return Err(Error::shape(
                "TransformPlan::apply",
                self.latent_dim(),
                e.len(),
            ));
        }
        let v = self.translation(class_id)?;
        Ok(e.iter().zip(v).map(|(a, b)| a + b).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_means() -> ClassMeans {
        ClassMeans {
            class_ids: vec![0, 1, 2, 3],
            mu: vec![
                vec![0.5, 0.5],
                vec![-0.5, 0.5],
                vec![0.5, -0.5],
                vec![-0.5, -0.5],
            ],
            mu_bar: vec![0.0, 0.0],
        }
    }

    #[test]
    fn class_means_and_centre() {
        let xr = Matrix::from_rows(&[[1.0, 1.0], [3.0, 3.0]]).unwrap();
        let m = compute_class_means(&xr, &[0, 0], &[0], CenterRule::MeanOfClassMeans).unwrap();
        assert_eq!(m.mu, vec![vec![2.0, 2.0]]);
        assert_eq!(m.mu_bar, vec![2.0, 2.0]);

        let xr = Matrix::from_rows(&[[1.0, 0.0], [3.0, 0.0], [2.0, 0.0]]).unwrap();
        let m =
            compute_class_means(&xr, &[0, 0, 1], &[0, 1], CenterRule::MeanOfClassMeans).unwrap();
        assert_eq!(m.mu_bar, vec![2.0, 0.0]);
    }

    #[test]
    fn four_symmetric_means_centre_at_origin() {
        let xr = Matrix::from_rows(&[
            [0.4, 0.6],
            [0.6, 0.4],
            [-0.5, 0.5],
            [0.5, -0.5],
            [-0.5, -0.5],
            [-0.5, -0.5],
        ])
        .unwrap();
        let m = compute_class_means(
            &xr,
            &[0, 0, 1, 2, 3, 3],
            &[0, 1, 2, 3],
            CenterRule::MeanOfClassMeans,
        )
        .unwrap();
        assert_eq!(m.mu_bar, vec![0.0, 0.0]);
    }

    #[test]
    fn centre_rules_differ_on_imbalanced_classes() {
        let xr = Matrix::from_rows(&[[0.0], [0.0], [0.0], [4.0]]).unwrap();
        let a =
            compute_class_means(&xr, &[0, 0, 0, 1], &[0, 1], CenterRule::MeanOfClassMeans).unwrap();
        let b = compute_class_means(&xr, &[0, 0, 0, 1], &[0, 1], CenterRule::SampleMean).unwrap();
        assert_eq!(a.mu_bar, vec![2.0]);
        assert_eq!(b.mu_bar, vec![1.0]);
    }

    #[test]
    fn empty_class_rejected() {
        let xr = Matrix::from_rows(&[[1.0]]).unwrap();
        assert!(matches!(
            compute_class_means(&xr, &[0], &[0, 1], CenterRule::MeanOfClassMeans),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn directions() {
        let m = square_means();
        let t = compute_directions(&m.mu, &m.mu_bar);
        assert_eq!(t[0], vec![1.0, 1.0]);
        assert_eq!(t[3], vec![-1.0, -1.0]);
        assert_eq!(
            compute_directions(&[vec![0.3, -0.2]], &[0.3, -0.2]),
            vec![vec![1.0, 1.0]]
        );
    }

    #[test]
    fn transformed_means() {
        let t = compute_directions(&square_means().mu, &[0.0, 0.0]);
        let (s, mu_hat) = compute_transformed_means(&t, 0.5).unwrap();
        assert_eq!(s, vec![1.5, 2.0, 2.5, 3.0]);
        assert_eq!(mu_hat[1], vec![-2.0, 2.0]);

        let (s, mu_hat) = compute_transformed_means(&[vec![1.0]], 1.0).unwrap();
        assert_eq!(s, vec![3.0]);
        assert_eq!(mu_hat, vec![vec![3.0]]);

        assert!(compute_transformed_means(&t, 0.0).is_err());
        assert!(compute_transformed_means(&t, -1.0).is_err());
        assert!(compute_transformed_means(&t, f64::NAN).is_err());
    }

    #[test]
    fn translation_vectors() {
        let v = compute_translation_vectors(
            &[vec![0.5, 0.5], vec![-0.5, -0.5], vec![1.0]],
            &[vec![1.5, 1.5], vec![-3.0, -3.0], vec![1.0]],
        )
        .unwrap();
        assert_eq!(v, vec![vec![1.0, 1.0], vec![-2.5, -2.5], vec![0.0]]);
    }

    #[test]
    fn apply_examples() {
        let plan = TransformPlan::from_means(square_means(), 0.5).unwrap();
        assert_eq!(plan.apply(&[0.0, 0.0], 0).unwrap(), vec![1.0, 1.0]);
        let z = plan.apply(&[0.2, -0.1], 1).unwrap();
        assert!((z[0] + 1.3).abs() < 1e-15 && (z[1] - 1.4).abs() < 1e-15);
        assert!(plan.apply(&[0.0, 0.0], 9).is_err());
        assert!(plan.apply(&[0.0], 0).is_err());

        let mut zero = plan.clone();
        zero.v.iter_mut().for_each(|v| v.fill(0.0));
        assert_eq!(zero.apply(&[0.7, -0.3], 2).unwrap(), vec![0.7, -0.3]);
    }
}
