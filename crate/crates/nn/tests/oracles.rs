// Exactness oracles: convolution against naive nested loops written here,
// attention weights against a direct softmax, checkpoint roundtrips.

use deepbsc_nn::activation::Activation;
use deepbsc_nn::attention::Attention;
use deepbsc_nn::conv::{Conv1d, Conv2d};
use ndarray::{Array1, Array2, Array3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

// Direct translation of the definition, independent of the library path.
fn naive_conv2d(
    grid: &Array2<f64>,
    filters: &Array3<f64>,
    bias: &Array1<f64>,
    act: fn(f64) -> f64,
) -> Array3<f64> {
    let (nf, kh, kw) = filters.dim();
    let (x, y) = grid.dim();
    let mut out = Array3::zeros((nf, x, y));
    for f in 0..nf {
        for i in 0..x {
            for j in 0..y {
                let mut acc = bias[f];
                for u in 0..kh {
                    for v in 0..kw {
                        let ii = i as isize + u as isize - (kh / 2) as isize;
                        let jj = j as isize + v as isize - (kw / 2) as isize;
                        if ii >= 0 && (ii as usize) < x && jj >= 0 && (jj as usize) < y {
                            acc += filters[[f, u, v]] * grid[[ii as usize, jj as usize]];
                        }
                    }
                }
                out[[f, i, j]] = act(acc);
            }
        }
    }
    out
}

fn naive_conv1d(
    rows: &Array2<f64>,
    filters: &Array2<f64>,
    bias: &Array1<f64>,
    act: fn(f64) -> f64,
) -> Array3<f64> {
    let (nf, k) = filters.dim();
    let (r, c) = rows.dim();
    let mut out = Array3::zeros((nf, r, c));
    for f in 0..nf {
        for row in 0..r {
            for col in 0..c {
                let mut acc = bias[f];
                for u in 0..k {
                    let jj = col as isize + u as isize - (k / 2) as isize;
                    if jj >= 0 && (jj as usize) < c {
                        acc += filters[[f, u]] * rows[[row, jj as usize]];
                    }
                }
                out[[f, row, col]] = act(acc);
            }
        }
    }
    out
}

fn relu(z: f64) -> f64 {
    z.max(0.0)
}

#[test]
fn conv2d_matches_naive_oracle_exactly() {
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    for size in [1usize, 3, 4, 8] {
        let grid = Array2::from_shape_fn((size, size), |_| rng.random_range(-2.0..2.0));
        let filters = Array3::from_shape_fn((3, 3, 3), |_| rng.random_range(-1.0..1.0));
        let bias = Array1::from_shape_fn(3, |_| rng.random_range(-0.5..0.5));
        let conv = Conv2d::new(filters.clone(), bias.clone(), Activation::Relu).unwrap();
        let (out, _) = conv.forward(grid.view()).unwrap();
        let expect = naive_conv2d(&grid, &filters, &bias, relu);
        assert_eq!(out, expect, "size {size}");
        // determinism: same inputs, same output
        let (out2, _) = conv.forward(grid.view()).unwrap();
        assert_eq!(out, out2);
    }
}

#[test]
fn conv1d_matches_naive_oracle_exactly() {
    let mut rng = ChaCha12Rng::seed_from_u64(12);
    let rows = Array2::from_shape_fn((3, 5), |_| rng.random_range(-2.0..2.0));
    let filters = Array2::from_shape_fn((2, 3), |_| rng.random_range(-1.0..1.0));
    let bias = Array1::from_shape_fn(2, |_| rng.random_range(-0.5..0.5));
    let conv = Conv1d::new(filters.clone(), bias.clone(), Activation::Relu).unwrap();
    let (out, _) = conv.forward(rows.view()).unwrap();
    assert_eq!(out, naive_conv1d(&rows, &filters, &bias, relu));
}

#[test]
fn attention_weights_match_direct_softmax_and_stay_in_hull() {
    let mut rng = ChaCha12Rng::seed_from_u64(13);
    let attn = Attention {
        score: Array1::from_shape_fn(3, |_| rng.random_range(-1.0..1.0)),
        proj: None,
    };
    let hiddens: Vec<Array1<f64>> = (0..4)
        .map(|_| Array1::from_shape_fn(3, |_| rng.random_range(-2.0..2.0)))
        .collect();
    let (out, cache) = attn.forward(&hiddens).unwrap();

    // direct softmax oracle
    let scores: Vec<f64> = hiddens
        .iter()
        .map(|h| {
            h.iter()
                .zip(attn.score.iter())
                .map(|(&hv, &sv)| sv * hv.tanh())
                .sum::<f64>()
        })
        .collect();
    let z: f64 = scores.iter().map(|e| e.exp()).sum();
    for (k, w) in cache.weights.iter().enumerate() {
        assert!((w - scores[k].exp() / z).abs() < 1e-12);
        assert!(*w >= 0.0);
    }
    let total: f64 = cache.weights.iter().sum();
    assert!((total - 1.0).abs() < 1e-12);

    // output is a convex combination: bounded per component by min/max
    for j in 0..3 {
        let lo = hiddens.iter().map(|h| h[j]).fold(f64::INFINITY, f64::min);
        let hi = hiddens.iter().map(|h| h[j]).fold(f64::NEG_INFINITY, f64::max);
        assert!(out[j] >= lo - 1e-12 && out[j] <= hi + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn checkpoint_roundtrip_is_identity(
        vals in proptest::collection::vec(-1e6f64..1e6, 1..40),
        rows in 1usize..6,
    ) {
        let cols = vals.len() / rows;
        prop_assume!(cols > 0);
        let arr = Array2::from_shape_vec((rows, cols), vals[..rows * cols].to_vec())
            .unwrap()
            .into_dyn();
        let mut buf = Vec::new();
        deepbsc_nn::checkpoint::save(&mut buf, &[("t".to_string(), arr.view())]).unwrap();
        let loaded = deepbsc_nn::checkpoint::load::<f64, _>(buf.as_slice()).unwrap();
        prop_assert_eq!(&loaded[0].1, &arr);
    }

    #[test]
    fn attention_weights_always_sum_to_one(
        seed in 0u64..1000,
        k in 1usize..7,
    ) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let attn = Attention {
            score: Array1::from_shape_fn(4, |_| rng.random_range(-3.0..3.0)),
            proj: None,
        };
        let hiddens: Vec<Array1<f64>> = (0..k)
            .map(|_| Array1::from_shape_fn(4, |_| rng.random_range(-5.0..5.0)))
            .collect();
        let (_, cache) = attn.forward(&hiddens).unwrap();
        let total: f64 = cache.weights.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(cache.weights.iter().all(|w| *w >= 0.0));
    }
}
