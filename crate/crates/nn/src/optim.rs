use ndarray::ArrayD;

use crate::error::{NnError, Result};
use crate::scalar::{c, Scalar};
use crate::tensor::TensorSet;

pub use crate::tensor::{copy_params, soft_update};

/// Adam optimizer state: first/second moments congruent with the parameters
/// plus a shared step counter.
#[derive(Clone, Debug)]
pub struct AdamState<S> {
    pub beta1: S,
    pub beta2: S,
    pub eps: S,
    pub step: u64,
    m: Vec<ArrayD<S>>,
    v: Vec<ArrayD<S>>,
}

impl<S: Scalar> AdamState<S> {
    pub fn new(params: &impl TensorSet<S>) -> Self {
        Self::with_betas(params, c(0.9), c(0.999), c(1e-8))
    }

    pub fn with_betas(params: &impl TensorSet<S>, beta1: S, beta2: S, eps: S) -> Self {
        let m = params
            .tensors()
            .iter()
            .map(|(_, t)| ArrayD::zeros(t.raw_dim()))
            .collect::<Vec<_>>();
        let v = m.clone();
        AdamState {
            beta1,
            beta2,
            eps,
            step: 0,
            m,
            v,
        }
    }

    pub fn moments(&self) -> (&[ArrayD<S>], &[ArrayD<S>]) {
        (&self.m, &self.v)
    }

    /// Named views over the moment tensors, for checkpointing.
    pub fn named_tensors(&self) -> Vec<(String, ndarray::ArrayViewD<'_, S>)> {
        let mut out = Vec::with_capacity(2 * self.m.len());
        for (i, t) in self.m.iter().enumerate() {
            out.push((format!("m{i}"), t.view()));
        }
        for (i, t) in self.v.iter().enumerate() {
            out.push((format!("v{i}"), t.view()));
        }
        out
    }

    pub fn named_tensors_mut(&mut self) -> Vec<(String, ndarray::ArrayViewMutD<'_, S>)> {
        let mut out = Vec::with_capacity(2 * self.m.len());
        for (i, t) in self.m.iter_mut().enumerate() {
            out.push((format!("m{i}"), t.view_mut()));
        }
        for (i, t) in self.v.iter_mut().enumerate() {
            out.push((format!("v{i}"), t.view_mut()));
        }
        out
    }
}

/// One Adam update with bias correction. `params` and `grads` must list
/// congruent tensors in the same order; non-finite gradients abort with the
/// offending tensor named.
pub fn adam_step<S: Scalar>(
    params: &mut impl TensorSet<S>,
    grads: &impl TensorSet<S>,
    state: &mut AdamState<S>,
    lr: S,
) -> Result<()> {
    let gs = grads.tensors();
    let mut ps = params.tensors_mut();
    if gs.len() != ps.len() || gs.len() != state.m.len() {
        return Err(NnError::dim(
            "adam tensor count",
            format!("{} (state {})", ps.len(), state.m.len()),
            gs.len(),
        ));
    }
    for ((name, g), (_, p)) in gs.iter().zip(ps.iter()) {
        if g.shape() != p.shape() {
            return Err(NnError::dim("adam tensor shape", format!("{:?}", p.shape()), format!("{name} {:?}", g.shape())));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(NnError::NonFinite {
                what: "gradient",
                tensor: name.clone(),
            });
        }
    }

    state.step += 1;
    let t = state.step;
    let b1 = state.beta1;
    let b2 = state.beta2;
    let corr1 = S::one() - b1.powi(t as i32);
    let corr2 = S::one() - b2.powi(t as i32);
    for (idx, ((_, g), (_, p))) in gs.iter().zip(ps.iter_mut()).enumerate() {
        let m = &mut state.m[idx];
        let v = &mut state.v[idx];
        ndarray::Zip::from(p)
            .and(g)
            .and(m)
            .and(v)
            .for_each(|pv, &gv, mv, vv| {
                *mv = b1 * *mv + (S::one() - b1) * gv;
                *vv = b2 * *vv + (S::one() - b2) * gv * gv;
                let mhat = *mv / corr1;
                let vhat = *vv / corr2;
                *pv = *pv - lr * mhat / (vhat.sqrt() + state.eps);
            });
    }
    Ok(())
}
