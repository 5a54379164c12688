use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD, Axis};

use crate::error::{NnError, Result};
use crate::scalar::{c, Scalar};
use crate::tensor::TensorSet;

/// Per-feature batch normalization over rows-as-samples batches.
///
/// Training mode normalizes with batch statistics and folds them into the
/// running estimates (`running <- momentum * running + (1-momentum) * batch`);
/// evaluation mode normalizes with the running estimates only.
#[derive(Clone, Debug)]
pub struct BatchNorm<S> {
    pub gamma: Array1<S>,
    pub beta: Array1<S>,
    pub running_mean: Array1<S>,
    pub running_var: Array1<S>,
    pub momentum: S,
    pub eps: S,
}

#[derive(Clone, Debug)]
pub struct BatchNormGrads<S> {
    pub gamma: Array1<S>,
    pub beta: Array1<S>,
}

pub struct BatchNormCache<S> {
    xhat: Array2<S>,
    inv_std: Array1<S>,
}

impl<S: Scalar> BatchNorm<S> {
    pub fn new(dim: usize) -> Self {
        BatchNorm {
            gamma: Array1::ones(dim),
            beta: Array1::zeros(dim),
            running_mean: Array1::zeros(dim),
            running_var: Array1::ones(dim),
            momentum: c(0.99),
            eps: c(1e-5),
        }
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    pub fn forward_train(&mut self, x: &Array2<S>) -> Result<(Array2<S>, BatchNormCache<S>)> {
        self.check(x)?;
        let n = c::<S>(x.nrows() as f64);
        let mean = x.sum_axis(Axis(0)) / n;
        let mut var = Array1::<S>::zeros(self.dim());
        for row in x.rows() {
            for (j, (&v, &m)) in row.iter().zip(mean.iter()).enumerate() {
                let d = v - m;
                var[j] += d * d;
            }
        }
        var /= n;

        let inv_std = var.mapv(|v| S::one() / (v + self.eps).sqrt());
        let mut xhat = x.clone();
        for mut row in xhat.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - mean[j]) * inv_std[j];
            }
        }
        let mut y = xhat.clone();
        for mut row in y.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.gamma[j] * *v + self.beta[j];
            }
        }

        let keep = self.momentum;
        let take = S::one() - keep;
        ndarray::Zip::from(&mut self.running_mean)
            .and(&mean)
            .for_each(|r, &m| *r = keep * *r + take * m);
        ndarray::Zip::from(&mut self.running_var)
            .and(&var)
            .for_each(|r, &v| *r = keep * *r + take * v);

        Ok((y, BatchNormCache { xhat, inv_std }))
    }

    pub fn forward_eval(&self, x: &Array2<S>) -> Result<Array2<S>> {
        self.check(x)?;
        let inv_std = self.running_var.mapv(|v| S::one() / (v + self.eps).sqrt());
        let mut y = x.clone();
        for mut row in y.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.gamma[j] * (*v - self.running_mean[j]) * inv_std[j] + self.beta[j];
            }
        }
        Ok(y)
    }

    /// Backward through the training-mode normalization (batch statistics
    /// included). Returns parameter gradients and `dL/dx`.
    pub fn backward(
        &self,
        cache: &BatchNormCache<S>,
        dy: &Array2<S>,
    ) -> (BatchNormGrads<S>, Array2<S>) {
        let n = c::<S>(dy.nrows() as f64);
        let dim = self.dim();
        let mut dgamma = Array1::zeros(dim);
        let mut dbeta = Array1::zeros(dim);
        for (row, xrow) in dy.rows().into_iter().zip(cache.xhat.rows()) {
            for j in 0..dim {
                dgamma[j] += row[j] * xrow[j];
                dbeta[j] += row[j];
            }
        }
        // dx = gamma * inv_std / n * (n*dy - sum(dy) - xhat * sum(dy*xhat))
        let mut dx = Array2::zeros(dy.raw_dim());
        for ((mut dxrow, dyrow), xrow) in dx
            .rows_mut()
            .into_iter()
            .zip(dy.rows())
            .zip(cache.xhat.rows())
        {
            for j in 0..dim {
                dxrow[j] = self.gamma[j] * cache.inv_std[j] / n
                    * (n * dyrow[j] - dbeta[j] - xrow[j] * dgamma[j]);
            }
        }
        (
            BatchNormGrads {
                gamma: dgamma,
                beta: dbeta,
            },
            dx,
        )
    }

    pub fn zero_grads(&self) -> BatchNormGrads<S> {
        BatchNormGrads {
            gamma: Array1::zeros(self.dim()),
            beta: Array1::zeros(self.dim()),
        }
    }

    fn check(&self, x: &Array2<S>) -> Result<()> {
        if x.ncols() != self.dim() {
            return Err(NnError::dim("batchnorm input", self.dim(), x.ncols()));
        }
        if x.nrows() == 0 {
            return Err(NnError::Empty("batchnorm needs a non-empty batch"));
        }
        Ok(())
    }
}

/// Learnable parameters only; running statistics are carried separately in
/// [`BatchNorm::state_tensors`] so target-network tracking can include them.
impl<S: Scalar> TensorSet<S> for BatchNorm<S> {
    fn tensors(&self) -> Vec<(String, ArrayViewD<'_, S>)> {
        vec![
            ("gamma".into(), self.gamma.view().into_dyn()),
            ("beta".into(), self.beta.view().into_dyn()),
        ]
    }
    fn tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, S>)> {
        vec![
            ("gamma".into(), self.gamma.view_mut().into_dyn()),
            ("beta".into(), self.beta.view_mut().into_dyn()),
        ]
    }
}

impl<S: Scalar> TensorSet<S> for BatchNormGrads<S> {
    fn tensors(&self) -> Vec<(String, ArrayViewD<'_, S>)> {
        vec![
            ("gamma".into(), self.gamma.view().into_dyn()),
            ("beta".into(), self.beta.view().into_dyn()),
        ]
    }
    fn tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, S>)> {
        vec![
            ("gamma".into(), self.gamma.view_mut().into_dyn()),
            ("beta".into(), self.beta.view_mut().into_dyn()),
        ]
    }
}

impl<S: Scalar> BatchNorm<S> {
    /// Running statistics as named tensors (for checkpoints and target sync).
    pub fn state_tensors(&self) -> Vec<(String, ArrayViewD<'_, S>)> {
        vec![
            ("running_mean".into(), self.running_mean.view().into_dyn()),
            ("running_var".into(), self.running_var.view().into_dyn()),
        ]
    }
    pub fn state_tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, S>)> {
        vec![
            ("running_mean".into(), self.running_mean.view_mut().into_dyn()),
            ("running_var".into(), self.running_var.view_mut().into_dyn()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn fresh_layer_in_eval_mode_is_identityish() {
        // running mean 0, var 1, gamma 1, beta 0: y = x / sqrt(1 + eps)
        let bn = BatchNorm::<f64>::new(2);
        let y = bn.forward_eval(&array![[1.0, -2.0]]).unwrap();
        let k = 1.0 / (1.0f64 + 1e-5).sqrt();
        assert!((y[[0, 0]] - k).abs() < 1e-12);
        assert!((y[[0, 1]] + 2.0 * k).abs() < 1e-12);
    }

    #[test]
    fn training_batch_is_standardized() {
        let mut bn = BatchNorm::<f64>::new(1);
        let (y, _) = bn.forward_train(&array![[1.0], [3.0]]).unwrap();
        // mean 2, var 1 -> +-1 / sqrt(1+eps)
        assert!((y[[0, 0]] + y[[1, 0]]).abs() < 1e-12);
        assert!((y[[1, 0]] - 1.0).abs() < 1e-4);
        // running stats moved toward the batch
        assert!((bn.running_mean[0] - 0.02).abs() < 1e-12);
    }
}
