mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use steane_xai::nn::loss::{bce_loss, masked_bce_logit_grad};
use steane_xai::nn::{Activation, AdamState, LayerSpec, Network, NetworkSpec};

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[test]
fn weight_gradients_match_finite_differences() {
    for seed in [1, 2] {
        let (worst, n) = common::gradient_check(seed, 1e-6);
        assert!(n > 300);
        assert!(worst < 1e-4, "seed {seed}: worst relative deviation {worst:e}");
    }
}

#[test]
fn single_unit_lstm_matches_hand_evaluation() {
    let spec = NetworkSpec {
        input_width: 1,
        layers: vec![LayerSpec::Lstm { units: 1, return_sequences: false }, LayerSpec::Dense { units: 1, activation: Activation::Linear }],
        output_gate: Activation::Sigmoid,
    };
    // w_x (f, i, c, o), w_h (f, i, c, o), b (f, i, c, o), dense w, dense b.
    let (wx, wh, b) = ([0.5, -0.3, 0.8, 0.1], [0.2, 0.4, -0.6, 0.7], [1.0, 0.0, 0.1, -0.2]);
    let (dw, db) = (1.5, -0.25);
    let mut params = Vec::new();
    params.extend(wx);
    params.extend(wh);
    params.extend(b);
    params.extend([dw, db]);
    let net = Network::from_params(spec, params).unwrap();
    let xs = [0.3, -1.2, 0.9];
    let (mut h, mut c) = (0.0f64, 0.0f64);
    for &x in &xs {
        let pre = |k: usize| wx[k] * x + wh[k] * h + b[k];
        let (f, i, g, o) = (sigmoid(pre(0)), sigmoid(pre(1)), pre(2).tanh(), sigmoid(pre(3)));
        c = f * c + i * g;
        h = o * c.tanh();
    }
    let input: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    let out = net.predict(&input).unwrap()[0];
    assert!((out - (dw * h + db)).abs() < 1e-14, "{out} vs {}", dw * h + db);
}

#[test]
fn adam_matches_hand_updates() {
    let (lr, b1, b2, eps) = (0.01, 0.9, 0.999, 1e-7);
    let mut adam = AdamState::new(2, lr);
    let mut w = vec![0.5, -1.0];
    let (mut m, mut v, mut expect) = ([0.0; 2], [0.0; 2], w.clone());
    for (t, g) in [[0.1, -2.0], [0.3, 0.0], [-0.2, 1.0]].iter().enumerate() {
        adam.update(&mut w, g);
        let t = t as i32 + 1;
        for k in 0..2 {
            m[k] = b1 * m[k] + (1.0 - b1) * g[k];
            v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
            let (mh, vh) = (m[k] / (1.0 - b1.powi(t)), v[k] / (1.0 - b2.powi(t)));
            expect[k] -= lr * mh / (vh + eps).sqrt();
        }
        for k in 0..2 {
            assert!((w[k] - expect[k]).abs() < 1e-15, "step {t}: {w:?} vs {expect:?}");
        }
    }
}

#[test]
fn logit_gradient_is_derivative_of_bce_through_sigmoid() {
    for &z in &[-3.0, -0.4, 0.0, 0.7, 2.5] {
        for p in [false, true] {
            let h = 1e-6;
            let fd = (bce_loss(p, sigmoid(z + h)).unwrap() - bce_loss(p, sigmoid(z - h)).unwrap()) / (2.0 * h);
            let g = masked_bce_logit_grad(&[Some(p)], &[sigmoid(z)])[0];
            assert!((g - fd).abs() < 1e-8, "z {z} p {p}: {g} vs {fd}");
        }
    }
    assert_eq!(masked_bce_logit_grad(&[None], &[0.3]), vec![0.0]);
    // Clamped away from log(0).
    assert!(bce_loss(true, 0.0).unwrap().is_finite());
}

#[test]
fn initialization_is_seeded() {
    let a = Network::init(common::width4_spec(3, 1), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let b = Network::init(common::width4_spec(3, 1), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(a, b);
}
