use crate::{Error, Result};

/// Adam optimizer state for a fixed list of parameter buffers.
///
/// Buffers are identified by position: the `params` and `grads` handed to
/// [`AdamState::step`] must always come in the order used at construction.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    /// Adam with `beta1 = 0.9`, `beta2 = 0.999`, `epsilon = 1e-8`.
    pub fn new(learning_rate: f64, sizes: &[usize]) -> Self {
        Self::with_constants(learning_rate, 0.9, 0.999, 1e-8, sizes)
    }

    pub fn with_constants(
        learning_rate: f64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
        sizes: &[usize],
    ) -> Self {
        Self {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            step: 0,
            m: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One bias-corrected Adam update. Nothing is modified when a gradient
    /// is non-finite or a shape disagrees.
    pub fn step(&mut self, params: Vec<&mut [f64]>, grads: Vec<&[f64]>) -> Result<()> {
        if params.len() != self.m.len() {
            return Err(Error::shape(
                "AdamState::step params",
                self.m.len(),
                params.len(),
            ));
        }
        if grads.len() != self.m.len() {
            return Err(Error::shape(
                "AdamState::step grads",
                self.m.len(),
                grads.len(),
            ));
        }
        for ((p, g), m) in params.iter().zip(&grads).zip(&self.m) {
            if p.len() != m.len() {
                return Err(Error::shape("AdamState::step buffer", m.len(), p.len()));
            }
            if g.len() != m.len() {
                return Err(Error::shape("AdamState::step gradient", m.len(), g.len()));
            }
            if let Some(bad) = g.iter().find(|v| !v.is_finite()) {
                return Err(Error::Training(format!("non-finite gradient ({bad})")));
            }
        }

        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (((p, g), m), v) in params
            .into_iter()
            .zip(grads)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * gi;
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * gi * gi;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
        Ok(())
    }
}
