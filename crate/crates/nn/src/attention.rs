use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD};
use rand::Rng;

use crate::error::{NnError, Result};
use crate::scalar::{c, Scalar};
use crate::tensor::TensorSet;

/// Additive attention pooling over a sequence of hidden states.
///
/// Scores are `e_k = score . tanh(proj h_k)` (or `score . tanh(h_k)` without a
/// projection); the output is the softmax-weighted sum of the raw hidden
/// states.
#[derive(Clone, Debug)]
pub struct Attention<S> {
    /// `[M]` where M is the projection output dim (H without projection).
    pub score: Array1<S>,
    /// Optional `[M x H]` projection applied before tanh.
    pub proj: Option<Array2<S>>,
}

#[derive(Clone, Debug)]
pub struct AttentionGrads<S> {
    pub score: Array1<S>,
    pub proj: Option<Array2<S>>,
}

pub struct AttentionCache<S> {
    hiddens: Vec<Array1<S>>,
    activated: Vec<Array1<S>>,
    pub weights: Array1<S>,
}

impl<S: Scalar> Attention<S> {
    pub fn init<R: Rng + ?Sized>(hidden_dim: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (hidden_dim as f64).sqrt();
        let lo = c::<S>(-bound);
        let hi = c::<S>(bound);
        Attention {
            score: Array1::from_shape_fn(hidden_dim, |_| rng.random_range(lo..hi)),
            proj: None,
        }
    }

    /// Pool `hiddens` (each `[H]`) into one `[H]` vector. Weights are
    /// non-negative and sum to 1.
    pub fn forward(&self, hiddens: &[Array1<S>]) -> Result<(Array1<S>, AttentionCache<S>)> {
        if hiddens.is_empty() {
            return Err(NnError::Empty("attention needs at least one hidden state"));
        }
        let h_dim = hiddens[0].len();
        let expect = match &self.proj {
            Some(p) => {
                if p.ncols() != h_dim {
                    return Err(NnError::dim("attention projection", p.ncols(), h_dim));
                }
                p.nrows()
            }
            None => h_dim,
        };
        if self.score.len() != expect {
            return Err(NnError::dim("attention score", expect, self.score.len()));
        }

        let activated: Vec<Array1<S>> = hiddens
            .iter()
            .map(|h| match &self.proj {
                Some(p) => p.dot(h).mapv(|v| v.tanh()),
                None => h.mapv(|v| v.tanh()),
            })
            .collect();
        let scores: Vec<S> = activated.iter().map(|u| self.score.dot(u)).collect();

        // stable softmax
        let max = scores.iter().copied().fold(S::neg_infinity(), S::max);
        let exps: Vec<S> = scores.iter().map(|&e| (e - max).exp()).collect();
        let total: S = exps.iter().copied().sum();
        let weights = Array1::from_iter(exps.into_iter().map(|e| e / total));

        let mut out = Array1::zeros(h_dim);
        for (w, h) in weights.iter().zip(hiddens) {
            out.scaled_add(*w, h);
        }
        let cache = AttentionCache {
            hiddens: hiddens.to_vec(),
            activated,
            weights,
        };
        Ok((out, cache))
    }

    /// Returns parameter gradients and per-step gradients w.r.t. the hiddens.
    pub fn backward(
        &self,
        cache: &AttentionCache<S>,
        dout: &Array1<S>,
    ) -> (AttentionGrads<S>, Vec<Array1<S>>) {
        let k = cache.hiddens.len();
        let w = &cache.weights;

        // d(out)/d(weight_k) = h_k; softmax backward gives d(score_k)
        let dweights: Vec<S> = cache.hiddens.iter().map(|h| dout.dot(h)).collect();
        let wsum: S = w.iter().zip(&dweights).map(|(&wk, &dk)| wk * dk).sum();
        let dscores: Vec<S> = w
            .iter()
            .zip(&dweights)
            .map(|(&wk, &dk)| wk * (dk - wsum))
            .collect();

        let mut dscore = Array1::zeros(self.score.len());
        let mut dproj = self.proj.as_ref().map(|p| Array2::zeros(p.raw_dim()));
        let mut dhiddens: Vec<Array1<S>> = w.iter().map(|&wk| dout.mapv(|d| d * wk)).collect();

        for t in 0..k {
            let de = dscores[t];
            if de == S::zero() {
                continue;
            }
            let u = &cache.activated[t];
            dscore.scaled_add(de, u);
            // through tanh: du = de * score, dz = du * (1 - u^2)
            let dz = self
                .score
                .iter()
                .zip(u.iter())
                .map(|(&s, &uv)| de * s * (S::one() - uv * uv))
                .collect::<Array1<S>>();
            match (&self.proj, dproj.as_mut()) {
                (Some(p), Some(dp)) => {
                    let h = &cache.hiddens[t];
                    for (r, &dzv) in dz.iter().enumerate() {
                        if dzv == S::zero() {
                            continue;
                        }
                        let mut row = dp.row_mut(r);
                        for (j, &hv) in h.iter().enumerate() {
                            row[j] += dzv * hv;
                        }
                    }
                    dhiddens[t] = &dhiddens[t] + &p.t().dot(&dz);
                }
                _ => {
                    dhiddens[t] = &dhiddens[t] + &dz;
                }
            }
        }
        (
            AttentionGrads {
                score: dscore,
                proj: dproj,
            },
            dhiddens,
        )
    }

    pub fn zero_grads(&self) -> AttentionGrads<S> {
        AttentionGrads {
            score: Array1::zeros(self.score.raw_dim()),
            proj: self.proj.as_ref().map(|p| Array2::zeros(p.raw_dim())),
        }
    }
}

impl<S: Scalar> TensorSet<S> for Attention<S> {
    fn tensors(&self) -> Vec<(String, ArrayViewD<'_, S>)> {
        let mut out = vec![("score".into(), self.score.view().into_dyn())];
        if let Some(p) = &self.proj {
            out.push(("proj".into(), p.view().into_dyn()));
        }
        out
    }
    fn tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, S>)> {
        let mut out = vec![("score".into(), self.score.view_mut().into_dyn())];
        if let Some(p) = &mut self.proj {
            out.push(("proj".into(), p.view_mut().into_dyn()));
        }
        out
    }
}

impl<S: Scalar> TensorSet<S> for AttentionGrads<S> {
    fn tensors(&self) -> Vec<(String, ArrayViewD<'_, S>)> {
        let mut out = vec![("score".into(), self.score.view().into_dyn())];
        if let Some(p) = &self.proj {
            out.push(("proj".into(), p.view().into_dyn()));
        }
        out
    }
    fn tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, S>)> {
        let mut out = vec![("score".into(), self.score.view_mut().into_dyn())];
        if let Some(p) = &mut self.proj {
            out.push(("proj".into(), p.view_mut().into_dyn()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn single_state_passes_through_with_weight_one() {
        let attn = Attention {
            score: array![0.3, -0.7],
            proj: None,
        };
        let h = array![1.5, -2.0];
        let (out, cache) = attn.forward(std::slice::from_ref(&h)).unwrap();
        assert_eq!(out, h);
        assert_eq!(cache.weights, array![1.0]);
    }

    #[test]
    fn identical_states_get_uniform_weights() {
        let attn = Attention {
            score: array![0.4, 0.1, -0.2],
            proj: None,
        };
        let h = array![0.5, -0.3, 1.1];
        let (out, cache) = attn.forward(&[h.clone(), h.clone(), h.clone(), h.clone()]).unwrap();
        for w in cache.weights.iter() {
            assert!((*w - 0.25f64).abs() < 1e-15);
        }
        for (o, hv) in out.iter().zip(h.iter()) {
            assert!((*o - *hv as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_sequence_is_an_error() {
        let attn = Attention::<f64> {
            score: array![0.0],
            proj: None,
        };
        assert!(matches!(attn.forward(&[]), Err(NnError::Empty(_))));
    }
}
