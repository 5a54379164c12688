use ndarray::{Array1, Array2, ArrayView1, ArrayViewD, ArrayViewMutD, Axis};
use rand::Rng;

use crate::activation::Activation;
use crate::error::{NnError, Result};
use crate::scalar::{c, Scalar};
use crate::tensor::TensorSet;

/// Fully-connected layer `y = f(W x + b)` with weights `[out x in]`.
#[derive(Clone, Debug)]
pub struct Dense<S> {
    pub w: Array2<S>,
    pub b: Array1<S>,
    pub act: Activation,
}

#[derive(Clone, Debug)]
pub struct DenseGrads<S> {
    pub w: Array2<S>,
    pub b: Array1<S>,
}

/// Forward records needed by the backward pass: the batch input and the
/// activated output.
pub struct DenseCache<S> {
    pub x: Array2<S>,
    pub y: Array2<S>,
}

impl<S: Scalar> Dense<S> {
    pub fn new(w: Array2<S>, b: Array1<S>, act: Activation) -> Result<Self> {
        if w.nrows() != b.len() {
            return Err(NnError::dim("dense bias", w.nrows(), b.len()));
        }
        Ok(Dense { w, b, act })
    }

    /// Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero bias.
    pub fn init<R: Rng + ?Sized>(out_dim: usize, in_dim: usize, act: Activation, rng: &mut R) -> Self {
        let bound = 1.0 / (in_dim as f64).sqrt();
        Self::init_bounded(out_dim, in_dim, act, bound, rng)
    }

    /// Uniform init in [-bound, bound] for weights and bias. Used for the
    /// near-zero final actor layer.
    pub fn init_bounded<R: Rng + ?Sized>(
        out_dim: usize,
        in_dim: usize,
        act: Activation,
        bound: f64,
        rng: &mut R,
    ) -> Self {
        let lo = c::<S>(-bound);
        let hi = c::<S>(bound);
        let w = Array2::from_shape_fn((out_dim, in_dim), |_| rng.random_range(lo..hi));
        let b = Array1::from_shape_fn(out_dim, |_| rng.random_range(lo..hi));
        Dense { w, b, act }
    }

    pub fn in_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn forward(&self, x: ArrayView1<'_, S>) -> Result<Array1<S>> {
        if x.len() != self.in_dim() {
            return Err(NnError::dim("dense input", self.in_dim(), x.len()));
        }
        let mut y = self.w.dot(&x) + &self.b;
        y.mapv_inplace(|z| self.act.apply(z));
        Ok(y)
    }

    /// Batch forward with rows as samples: `[batch x in] -> [batch x out]`.
    pub fn forward_batch(&self, x: &Array2<S>) -> Result<(Array2<S>, DenseCache<S>)> {
        if x.ncols() != self.in_dim() {
            return Err(NnError::dim("dense input", self.in_dim(), x.ncols()));
        }
        let mut y = x.dot(&self.w.t());
        y += &self.b;
        y.mapv_inplace(|z| self.act.apply(z));
        let cache = DenseCache {
            x: x.clone(),
            y: y.clone(),
        };
        Ok((y, cache))
    }

    /// Backward for a batch; returns parameter gradients and `dL/dx`.
    pub fn backward(&self, cache: &DenseCache<S>, dy: &Array2<S>) -> (DenseGrads<S>, Array2<S>) {
        let mut dz = dy.clone();
        ndarray::Zip::from(&mut dz).and(&cache.y).for_each(|d, &y| {
            *d = *d * self.act.grad_from_output(y);
        });
        let dw = dz.t().dot(&cache.x);
        let db = dz.sum_axis(Axis(0));
        let dx = dz.dot(&self.w);
        (DenseGrads { w: dw, b: db }, dx)
    }

    pub fn zero_grads(&self) -> DenseGrads<S> {
        DenseGrads {
            w: Array2::zeros(self.w.raw_dim()),
            b: Array1::zeros(self.b.raw_dim()),
        }
    }
}

impl<S: Scalar> TensorSet<S> for Dense<S> {
    fn tensors(&self) -> Vec<(String, ArrayViewD<'_, S>)> {
        vec![
            ("w".into(), self.w.view().into_dyn()),
            ("b".into(), self.b.view().into_dyn()),
        ]
    }
    fn tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, S>)> {
        vec![
            ("w".into(), self.w.view_mut().into_dyn()),
            ("b".into(), self.b.view_mut().into_dyn()),
        ]
    }
}

impl<S: Scalar> TensorSet<S> for DenseGrads<S> {
    fn tensors(&self) -> Vec<(String, ArrayViewD<'_, S>)> {
        vec![
            ("w".into(), self.w.view().into_dyn()),
            ("b".into(), self.b.view().into_dyn()),
        ]
    }
    fn tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, S>)> {
        vec![
            ("w".into(), self.w.view_mut().into_dyn()),
            ("b".into(), self.b.view_mut().into_dyn()),
        ]
    }
}

impl<S: Scalar> DenseGrads<S> {
    pub fn add_assign(&mut self, other: &DenseGrads<S>) {
        self.w += &other.w;
        self.b += &other.b;
    }

    pub fn scale(&mut self, k: S) {
        self.w *= k;
        self.b *= k;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn identity_layer_passes_input_through() {
        let layer = Dense::new(
            array![[1.0, 0.0], [0.0, 1.0]],
            array![0.0, 0.0],
            Activation::Linear,
        )
        .unwrap();
        let y = layer.forward(array![1.0, -1.0].view()).unwrap();
        assert_eq!(y, array![1.0, -1.0]);
    }

    #[test]
    fn zero_weights_sigmoid_gives_half() {
        let layer = Dense::new(Array2::zeros((3, 2)), Array1::zeros(3), Activation::Sigmoid).unwrap();
        let y = layer.forward(array![12.0, -7.0].view()).unwrap();
        for v in y.iter() {
            assert_eq!(*v, 0.5);
        }
    }

    #[test]
    fn input_length_mismatch_is_an_error() {
        let layer = Dense::<f64>::new(Array2::zeros((2, 3)), Array1::zeros(2), Activation::Linear).unwrap();
        assert!(matches!(
            layer.forward(array![1.0, 2.0].view()),
            Err(NnError::Dim { .. })
        ));
    }
}
