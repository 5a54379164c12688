use ndarray::{ArrayViewD, ArrayViewMutD};

use crate::error::{NnError, Result};
use crate::scalar::Scalar;

/// Uniform access to a structure's parameter tensors, in a fixed order.
///
/// Layers and whole networks implement this; the optimizer, soft target
/// updates, checkpoints, and the finite-difference harness all work through
/// it. A parameter struct and its gradient struct must list tensors in the
/// same order with congruent shapes.
pub trait TensorSet<S: Scalar> {
    fn tensors(&self) -> Vec<(String, ArrayViewD<'_, S>)>;
    fn tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, S>)>;
}

pub fn num_params<S: Scalar>(set: &impl TensorSet<S>) -> usize {
    set.tensors().iter().map(|(_, t)| t.len()).sum()
}

/// Flatten all tensors into one vector, in declaration order.
pub fn flatten<S: Scalar>(set: &impl TensorSet<S>) -> Vec<S> {
    let mut out = Vec::with_capacity(num_params(set));
    for (_, t) in set.tensors() {
        out.extend(t.iter().copied());
    }
    out
}

/// Inverse of [`flatten`]; `flat` must have exactly `num_params` entries.
pub fn assign_flat<S: Scalar>(set: &mut impl TensorSet<S>, flat: &[S]) -> Result<()> {
    let n = num_params(set);
    if flat.len() != n {
        return Err(NnError::dim("assign_flat", n, flat.len()));
    }
    let mut off = 0;
    for (_, mut t) in set.tensors_mut() {
        for v in t.iter_mut() {
            *v = flat[off];
            off += 1;
        }
    }
    Ok(())
}

/// Elementwise `target <- tau * source + (1 - tau) * target`.
pub fn soft_update<S: Scalar, T: TensorSet<S>>(target: &mut T, source: &T, tau: S) -> Result<()> {
    let src = source.tensors();
    let mut dst = target.tensors_mut();
    if src.len() != dst.len() {
        return Err(NnError::dim("soft_update tensor count", src.len(), dst.len()));
    }
    let keep = S::one() - tau;
    for ((sname, s), (dname, d)) in src.iter().zip(dst.iter_mut()) {
        if s.shape() != d.shape() {
            return Err(NnError::dim(
                "soft_update tensor shape",
                format!("{sname} {:?}", s.shape()),
                format!("{dname} {:?}", d.shape()),
            ));
        }
        ndarray::Zip::from(d).and(s).for_each(|dv, &sv| {
            *dv = tau * sv + keep * *dv;
        });
    }
    Ok(())
}

/// Hard copy: `target <- source` (same as `soft_update` with tau = 1).
pub fn copy_params<S: Scalar, T: TensorSet<S>>(target: &mut T, source: &T) -> Result<()> {
    soft_update(target, source, S::one())
}
