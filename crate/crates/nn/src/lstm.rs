use ndarray::{concatenate, Array1, Array2, ArrayView1, ArrayViewD, ArrayViewMutD, Axis};
use rand::Rng;

use crate::activation::sigmoid;
use crate::error::{NnError, Result};
use crate::scalar::{c, Scalar};
use crate::tensor::TensorSet;

/// Single LSTM cell. Each gate weight matrix is `[H x (I+H)]` and acts on the
/// stacked vector `z = [x; h_prev]` (input columns first).
#[derive(Clone, Debug)]
pub struct LstmCell<S> {
    pub w_i: Array2<S>,
    pub w_f: Array2<S>,
    pub w_o: Array2<S>,
    pub w_g: Array2<S>,
    pub b_i: Array1<S>,
    pub b_f: Array1<S>,
    pub b_o: Array1<S>,
    pub b_g: Array1<S>,
    pub input_dim: usize,
    pub hidden_dim: usize,
}

#[derive(Clone, Debug)]
pub struct LstmState<S> {
    pub h: Array1<S>,
    pub c: Array1<S>,
}

impl<S: Scalar> LstmState<S> {
    pub fn zeros(hidden_dim: usize) -> Self {
        LstmState {
            h: Array1::zeros(hidden_dim),
            c: Array1::zeros(hidden_dim),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LstmGrads<S> {
    pub w_i: Array2<S>,
    pub w_f: Array2<S>,
    pub w_o: Array2<S>,
    pub w_g: Array2<S>,
    pub b_i: Array1<S>,
    pub b_f: Array1<S>,
    pub b_o: Array1<S>,
    pub b_g: Array1<S>,
}

pub struct LstmStepCache<S> {
    z: Array1<S>,
    c_prev: Array1<S>,
    i: Array1<S>,
    f: Array1<S>,
    o: Array1<S>,
    g: Array1<S>,
    tanh_c: Array1<S>,
}

impl<S: Scalar> LstmCell<S> {
    pub fn init<R: Rng + ?Sized>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        let cols = input_dim + hidden_dim;
        let bound = 1.0 / (cols as f64).sqrt();
        let lo = c::<S>(-bound);
        let hi = c::<S>(bound);
        let mut mat = || Array2::from_shape_fn((hidden_dim, cols), |_| rng.random_range(lo..hi));
        let w_i = mat();
        let w_f = mat();
        let w_o = mat();
        let w_g = mat();
        let mut vec = || Array1::from_shape_fn(hidden_dim, |_| rng.random_range(lo..hi));
        LstmCell {
            w_i,
            w_f,
            w_o,
            w_g,
            b_i: vec(),
            b_f: vec(),
            b_o: vec(),
            b_g: vec(),
            input_dim,
            hidden_dim,
        }
    }

    /// One recurrence step; returns the new state and the backprop cache.
    /// The hidden output equals `state.h` of the returned state.
    pub fn step(
        &self,
        state: &LstmState<S>,
        x: ArrayView1<'_, S>,
    ) -> Result<(LstmState<S>, LstmStepCache<S>)> {
        if x.len() != self.input_dim {
            return Err(NnError::dim("lstm input", self.input_dim, x.len()));
        }
        if state.h.len() != self.hidden_dim {
            return Err(NnError::dim("lstm state", self.hidden_dim, state.h.len()));
        }
        let z = concatenate![Axis(0), x, state.h.view()];
        let i = (self.w_i.dot(&z) + &self.b_i).mapv(sigmoid);
        let f = (self.w_f.dot(&z) + &self.b_f).mapv(sigmoid);
        let o = (self.w_o.dot(&z) + &self.b_o).mapv(sigmoid);
        let g = (self.w_g.dot(&z) + &self.b_g).mapv(|v| v.tanh());
        let c_new = &f * &state.c + &i * &g;
        let tanh_c = c_new.mapv(|v| v.tanh());
        let h_new = &o * &tanh_c;
        let cache = LstmStepCache {
            z,
            c_prev: state.c.clone(),
            i,
            f,
            o,
            g,
            tanh_c,
        };
        Ok((LstmState { h: h_new, c: c_new }, cache))
    }

    /// Run a whole sequence from a zero state; returns per-step hidden states
    /// and caches for [`backward_seq`](Self::backward_seq).
    pub fn forward_seq(&self, xs: &[Array1<S>]) -> Result<(Vec<Array1<S>>, Vec<LstmStepCache<S>>)> {
        let mut state = LstmState::zeros(self.hidden_dim);
        let mut hiddens = Vec::with_capacity(xs.len());
        let mut caches = Vec::with_capacity(xs.len());
        for x in xs {
            let (next, cache) = self.step(&state, x.view())?;
            hiddens.push(next.h.clone());
            caches.push(cache);
            state = next;
        }
        Ok((hiddens, caches))
    }

    /// Backpropagation through time. `dhiddens[t]` is the loss gradient w.r.t.
    /// the step-`t` hidden output. Returns accumulated parameter gradients and
    /// the gradients w.r.t. each input.
    pub fn backward_seq(
        &self,
        caches: &[LstmStepCache<S>],
        dhiddens: &[Array1<S>],
    ) -> (LstmGrads<S>, Vec<Array1<S>>) {
        assert_eq!(caches.len(), dhiddens.len());
        let mut grads = self.zero_grads();
        let mut dxs = vec![Array1::zeros(self.input_dim); caches.len()];
        let mut dh_next = Array1::zeros(self.hidden_dim);
        let mut dc_next = Array1::zeros(self.hidden_dim);
        for t in (0..caches.len()).rev() {
            let cache = &caches[t];
            let dh = &dhiddens[t] + &dh_next;
            let one = S::one();

            let dtanh = cache.tanh_c.mapv(|tc| one - tc * tc);
            let dc_total = &dh * &cache.o * dtanh + &dc_next;
            let d_o = &dh * &cache.tanh_c;
            let d_i = &dc_total * &cache.g;
            let d_g = &dc_total * &cache.i;
            let d_f = &dc_total * &cache.c_prev;
            dc_next = &dc_total * &cache.f;

            let dz_i = &d_i * &cache.i.mapv(|v| v * (one - v));
            let dz_f = &d_f * &cache.f.mapv(|v| v * (one - v));
            let dz_o = &d_o * &cache.o.mapv(|v| v * (one - v));
            let dz_g = &d_g * &cache.g.mapv(|v| one - v * v);

            outer_add(&mut grads.w_i, &dz_i, &cache.z);
            outer_add(&mut grads.w_f, &dz_f, &cache.z);
            outer_add(&mut grads.w_o, &dz_o, &cache.z);
            outer_add(&mut grads.w_g, &dz_g, &cache.z);
            grads.b_i += &dz_i;
            grads.b_f += &dz_f;
            grads.b_o += &dz_o;
            grads.b_g += &dz_g;

            let dz = self.w_i.t().dot(&dz_i)
                + self.w_f.t().dot(&dz_f)
                + self.w_o.t().dot(&dz_o)
                + self.w_g.t().dot(&dz_g);
            dxs[t] = dz.slice(ndarray::s![..self.input_dim]).to_owned();
            dh_next = dz.slice(ndarray::s![self.input_dim..]).to_owned();
        }
        (grads, dxs)
    }

    pub fn zero_grads(&self) -> LstmGrads<S> {
        let cols = self.input_dim + self.hidden_dim;
        LstmGrads {
            w_i: Array2::zeros((self.hidden_dim, cols)),
            w_f: Array2::zeros((self.hidden_dim, cols)),
            w_o: Array2::zeros((self.hidden_dim, cols)),
            w_g: Array2::zeros((self.hidden_dim, cols)),
            b_i: Array1::zeros(self.hidden_dim),
            b_f: Array1::zeros(self.hidden_dim),
            b_o: Array1::zeros(self.hidden_dim),
            b_g: Array1::zeros(self.hidden_dim),
        }
    }
}

fn outer_add<S: Scalar>(acc: &mut Array2<S>, col: &Array1<S>, row: &Array1<S>) {
    for (r, &cv) in col.iter().enumerate() {
        if cv == S::zero() {
            continue;
        }
        let mut acc_row = acc.row_mut(r);
        for (j, &rv) in row.iter().enumerate() {
            acc_row[j] += cv * rv;
        }
    }
}

macro_rules! lstm_tensor_set {
    ($ty:ident) => {
        impl<S: Scalar> TensorSet<S> for $ty<S> {
            fn tensors(&self) -> Vec<(String, ArrayViewD<'_, S>)> {
                vec![
                    ("w_i".into(), self.w_i.view().into_dyn()),
                    ("w_f".into(), self.w_f.view().into_dyn()),
                    ("w_o".into(), self.w_o.view().into_dyn()),
                    ("w_g".into(), self.w_g.view().into_dyn()),
                    ("b_i".into(), self.b_i.view().into_dyn()),
                    ("b_f".into(), self.b_f.view().into_dyn()),
                    ("b_o".into(), self.b_o.view().into_dyn()),
                    ("b_g".into(), self.b_g.view().into_dyn()),
                ]
            }
            fn tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, S>)> {
                vec![
                    ("w_i".into(), self.w_i.view_mut().into_dyn()),
                    ("w_f".into(), self.w_f.view_mut().into_dyn()),
                    ("w_o".into(), self.w_o.view_mut().into_dyn()),
                    ("w_g".into(), self.w_g.view_mut().into_dyn()),
                    ("b_i".into(), self.b_i.view_mut().into_dyn()),
                    ("b_f".into(), self.b_f.view_mut().into_dyn()),
                    ("b_o".into(), self.b_o.view_mut().into_dyn()),
                    ("b_g".into(), self.b_g.view_mut().into_dyn()),
                ]
            }
        }
    };
}

lstm_tensor_set!(LstmCell);
lstm_tensor_set!(LstmGrads);
