use ndarray::{Array1, Array2, Array3, ArrayView2, ArrayViewD, ArrayViewMutD};
use rand::Rng;

use crate::activation::Activation;
use crate::error::{NnError, Result};
use crate::scalar::{c, Scalar};
use crate::tensor::TensorSet;

/// 2-D convolution over a single-channel grid with zero padding chosen so the
/// output spatial dims equal the input dims. Kernels must be odd-sized.
#[derive(Clone, Debug)]
pub struct Conv2d<S> {
    /// `[n_filters x k_h x k_w]`
    pub filters: Array3<S>,
    pub bias: Array1<S>,
    pub act: Activation,
}

#[derive(Clone, Debug)]
pub struct Conv2dGrads<S> {
    pub filters: Array3<S>,
    pub bias: Array1<S>,
}

pub struct Conv2dCache<S> {
    pub input: Array2<S>,
    pub out: Array3<S>,
}

fn check_kernel(k: usize, what: &'static str) -> Result<usize> {
    if k == 0 || k % 2 == 0 {
        return Err(NnError::dim(what, "odd kernel size", k));
    }
    Ok(k / 2)
}

impl<S: Scalar> Conv2d<S> {
    pub fn new(filters: Array3<S>, bias: Array1<S>, act: Activation) -> Result<Self> {
        if filters.dim().0 != bias.len() {
            return Err(NnError::dim("conv2d bias", filters.dim().0, bias.len()));
        }
        if filters.dim().0 == 0 {
            return Err(NnError::Empty("conv2d needs at least one filter"));
        }
        Ok(Conv2d { filters, bias, act })
    }

    pub fn init<R: Rng + ?Sized>(
        n_filters: usize,
        k_h: usize,
        k_w: usize,
        act: Activation,
        rng: &mut R,
    ) -> Self {
        let bound = 1.0 / ((k_h * k_w) as f64).sqrt();
        let lo = c::<S>(-bound);
        let hi = c::<S>(bound);
        Conv2d {
            filters: Array3::from_shape_fn((n_filters, k_h, k_w), |_| rng.random_range(lo..hi)),
            bias: Array1::from_shape_fn(n_filters, |_| rng.random_range(lo..hi)),
            act,
        }
    }

    pub fn n_filters(&self) -> usize {
        self.filters.dim().0
    }

    /// `[X x Y] -> [n_filters x X x Y]`.
    pub fn forward(&self, grid: ArrayView2<'_, S>) -> Result<(Array3<S>, Conv2dCache<S>)> {
        let (nf, kh, kw) = self.filters.dim();
        let ph = check_kernel(kh, "conv2d kernel height")?;
        let pw = check_kernel(kw, "conv2d kernel width")?;
        let (x, y) = grid.dim();
        if x == 0 || y == 0 {
            return Err(NnError::dim("conv2d input", "non-empty grid", format!("{x}x{y}")));
        }
        let mut out = Array3::zeros((nf, x, y));
        for f in 0..nf {
            let k = self.filters.index_axis(ndarray::Axis(0), f);
            let b = self.bias[f];
            for i in 0..x {
                for j in 0..y {
                    let mut acc = b;
                    for u in 0..kh {
                        let ii = i as isize + u as isize - ph as isize;
                        if ii < 0 || ii >= x as isize {
                            continue;
                        }
                        for v in 0..kw {
                            let jj = j as isize + v as isize - pw as isize;
                            if jj < 0 || jj >= y as isize {
                                continue;
                            }
                            acc += k[[u, v]] * grid[[ii as usize, jj as usize]];
                        }
                    }
                    out[[f, i, j]] = self.act.apply(acc);
                }
            }
        }
        let cache = Conv2dCache {
            input: grid.to_owned(),
            out: out.clone(),
        };
        Ok((out, cache))
    }

    pub fn backward(
        &self,
        cache: &Conv2dCache<S>,
        dout: &Array3<S>,
    ) -> (Conv2dGrads<S>, Array2<S>) {
        let (nf, kh, kw) = self.filters.dim();
        let ph = kh / 2;
        let pw = kw / 2;
        let (x, y) = cache.input.dim();
        let mut dfilters = Array3::zeros((nf, kh, kw));
        let mut dbias = Array1::zeros(nf);
        let mut dinput = Array2::zeros((x, y));
        for f in 0..nf {
            let k = self.filters.index_axis(ndarray::Axis(0), f);
            for i in 0..x {
                for j in 0..y {
                    let dz = dout[[f, i, j]] * self.act.grad_from_output(cache.out[[f, i, j]]);
                    if dz == S::zero() {
                        continue;
                    }
                    dbias[f] += dz;
                    for u in 0..kh {
                        let ii = i as isize + u as isize - ph as isize;
                        if ii < 0 || ii >= x as isize {
                            continue;
                        }
                        for v in 0..kw {
                            let jj = j as isize + v as isize - pw as isize;
                            if jj < 0 || jj >= y as isize {
                                continue;
                            }
                            dfilters[[f, u, v]] += dz * cache.input[[ii as usize, jj as usize]];
                            dinput[[ii as usize, jj as usize]] += dz * k[[u, v]];
                        }
                    }
                }
            }
        }
        (
            Conv2dGrads {
                filters: dfilters,
                bias: dbias,
            },
            dinput,
        )
    }

    pub fn zero_grads(&self) -> Conv2dGrads<S> {
        Conv2dGrads {
            filters: Array3::zeros(self.filters.raw_dim()),
            bias: Array1::zeros(self.bias.raw_dim()),
        }
    }
}

/// 1-D convolution applied independently along each row of a matrix, zero
/// padded so every row keeps its length. `[R x C] -> [n_filters x R x C]`.
#[derive(Clone, Debug)]
pub struct Conv1d<S> {
    /// `[n_filters x k]`
    pub filters: Array2<S>,
    pub bias: Array1<S>,
    pub act: Activation,
}

#[derive(Clone, Debug)]
pub struct Conv1dGrads<S> {
    pub filters: Array2<S>,
    pub bias: Array1<S>,
}

pub struct Conv1dCache<S> {
    pub input: Array2<S>,
    pub out: Array3<S>,
}

impl<S: Scalar> Conv1d<S> {
    pub fn new(filters: Array2<S>, bias: Array1<S>, act: Activation) -> Result<Self> {
        if filters.nrows() != bias.len() {
            return Err(NnError::dim("conv1d bias", filters.nrows(), bias.len()));
        }
        if filters.nrows() == 0 {
            return Err(NnError::Empty("conv1d needs at least one filter"));
        }
        Ok(Conv1d { filters, bias, act })
    }

    pub fn init<R: Rng + ?Sized>(n_filters: usize, k: usize, act: Activation, rng: &mut R) -> Self {
        let bound = 1.0 / (k as f64).sqrt();
        let lo = c::<S>(-bound);
        let hi = c::<S>(bound);
        Conv1d {
            filters: Array2::from_shape_fn((n_filters, k), |_| rng.random_range(lo..hi)),
            bias: Array1::from_shape_fn(n_filters, |_| rng.random_range(lo..hi)),
            act,
        }
    }

    pub fn n_filters(&self) -> usize {
        self.filters.nrows()
    }

    pub fn forward(&self, rows: ArrayView2<'_, S>) -> Result<(Array3<S>, Conv1dCache<S>)> {
        let (nf, k) = self.filters.dim();
        let pad = check_kernel(k, "conv1d kernel")?;
        let (r, cdim) = rows.dim();
        if r == 0 || cdim == 0 {
            return Err(NnError::dim("conv1d input", "non-empty matrix", format!("{r}x{cdim}")));
        }
        let mut out = Array3::zeros((nf, r, cdim));
        for f in 0..nf {
            let kf = self.filters.row(f);
            let b = self.bias[f];
            for row in 0..r {
                let xr = rows.row(row);
                for col in 0..cdim {
                    let mut acc = b;
                    for u in 0..k {
                        let jj = col as isize + u as isize - pad as isize;
                        if jj < 0 || jj >= cdim as isize {
                            continue;
                        }
                        acc += kf[u] * xr[jj as usize];
                    }
                    out[[f, row, col]] = self.act.apply(acc);
                }
            }
        }
        let cache = Conv1dCache {
            input: rows.to_owned(),
            out: out.clone(),
        };
        Ok((out, cache))
    }

    pub fn backward(
        &self,
        cache: &Conv1dCache<S>,
        dout: &Array3<S>,
    ) -> (Conv1dGrads<S>, Array2<S>) {
        let (nf, k) = self.filters.dim();
        let pad = k / 2;
        let (r, cdim) = cache.input.dim();
        let mut dfilters = Array2::zeros((nf, k));
        let mut dbias = Array1::zeros(nf);
        let mut dinput = Array2::zeros((r, cdim));
        for f in 0..nf {
            let kf = self.filters.row(f);
            for row in 0..r {
                for col in 0..cdim {
                    let dz =
                        dout[[f, row, col]] * self.act.grad_from_output(cache.out[[f, row, col]]);
                    if dz == S::zero() {
                        continue;
                    }
                    dbias[f] += dz;
                    for u in 0..k {
                        let jj = col as isize + u as isize - pad as isize;
                        if jj < 0 || jj >= cdim as isize {
                            continue;
                        }
                        dfilters[[f, u]] += dz * cache.input[[row, jj as usize]];
                        dinput[[row, jj as usize]] += dz * kf[u];
                    }
                }
            }
        }
        (
            Conv1dGrads {
                filters: dfilters,
                bias: dbias,
            },
            dinput,
        )
    }

    pub fn zero_grads(&self) -> Conv1dGrads<S> {
        Conv1dGrads {
            filters: Array2::zeros(self.filters.raw_dim()),
            bias: Array1::zeros(self.bias.raw_dim()),
        }
    }
}

macro_rules! tensor_set_impl {
    ($ty:ident, $($field:ident),+) => {
        impl<S: Scalar> TensorSet<S> for $ty<S> {
            fn tensors(&self) -> Vec<(String, ArrayViewD<'_, S>)> {
                vec![$((stringify!($field).into(), self.$field.view().into_dyn())),+]
            }
            fn tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, S>)> {
                vec![$((stringify!($field).into(), self.$field.view_mut().into_dyn())),+]
            }
        }
    };
}

tensor_set_impl!(Conv2d, filters, bias);
tensor_set_impl!(Conv2dGrads, filters, bias);
tensor_set_impl!(Conv1d, filters, bias);
tensor_set_impl!(Conv1dGrads, filters, bias);

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn center_one_kernel_is_identity_on_nonnegative_grids() {
        let mut filters = Array3::zeros((1, 3, 3));
        filters[[0, 1, 1]] = 1.0;
        let conv = Conv2d::new(filters, array![0.0], Activation::Relu).unwrap();
        let grid = array![[1.0, 2.0], [0.0, 3.5]];
        let (out, _) = conv.forward(grid.view()).unwrap();
        assert_eq!(out.index_axis(ndarray::Axis(0), 0), grid);
    }

    #[test]
    fn zero_filter_gives_zero_output() {
        let conv = Conv2d::new(Array3::zeros((2, 3, 3)), Array1::zeros(2), Activation::Relu).unwrap();
        let grid = array![[1.0, 2.0], [3.0, 4.0]];
        let (out, _) = conv.forward(grid.view()).unwrap();
        assert!(out.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn conv1d_center_one_kernel_is_identity_per_row() {
        let conv = Conv1d::new(array![[0.0, 1.0, 0.0]], array![0.0], Activation::Linear).unwrap();
        let rows = array![[1.0, -2.0, 3.0], [0.5, 0.0, -1.0]];
        let (out, _) = conv.forward(rows.view()).unwrap();
        assert_eq!(out.index_axis(ndarray::Axis(0), 0), rows);
    }

    #[test]
    fn even_kernel_is_rejected() {
        let conv = Conv1d::new(array![[1.0, 1.0]], array![0.0], Activation::Linear).unwrap();
        assert!(matches!(
            conv.forward(array![[1.0, 2.0]].view()),
            Err(NnError::Dim { .. })
        ));
    }

    #[test]
    fn empty_grid_is_rejected() {
        let mut filters = Array3::zeros((1, 3, 3));
        filters[[0, 1, 1]] = 1.0;
        let conv = Conv2d::new(filters, array![0.0], Activation::Relu).unwrap();
        let grid = Array2::<f64>::zeros((0, 0));
        assert!(conv.forward(grid.view()).is_err());
    }
}
