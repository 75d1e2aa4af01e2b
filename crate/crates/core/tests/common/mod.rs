#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steane_xai::nn::train::batch_gradient;
use steane_xai::nn::{Activation, LayerSpec, Network, NetworkSpec, TrainSample};

/// Two LSTM layers of width 4 and a dense head. Smooth activations keep
/// finite differences away from ReLU kinks.
pub fn width4_spec(input: usize, outputs: usize) -> NetworkSpec {
    NetworkSpec {
        input_width: input,
        layers: vec![
            LayerSpec::Masking,
            LayerSpec::Lstm { units: 4, return_sequences: true },
            LayerSpec::Lstm { units: 4, return_sequences: false },
            LayerSpec::Dense { units: 4, activation: Activation::Tanh },
            LayerSpec::Dense { units: outputs, activation: Activation::Sigmoid },
        ],
        output_gate: Activation::Sigmoid,
    }
}

pub fn random_sequence(rng: &mut impl Rng, t: usize, width: usize) -> Vec<Vec<f64>> {
    (0..t).map(|_| (0..width).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

pub fn random_bits(rng: &mut impl Rng, t: usize, width: usize) -> Vec<Vec<f64>> {
    (0..t).map(|_| (0..width).map(|_| rng.gen_range(0..2) as f64).collect()).collect()
}

/// Largest relative deviation between backprop and a five-point central
/// difference over every weight, with |g − fd| / max(|g|, |fd|, floor).
pub fn gradient_check(seed: u64, floor: f64) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = Network::init(width4_spec(3, 2), &mut rng).unwrap();
    let samples: Vec<TrainSample> = (0..3)
        .map(|i| TrainSample { input: random_sequence(&mut rng, 3 + i, 3), labels: vec![Some(i % 2 == 0), if i == 1 { None } else { Some(true) }] })
        .collect();
    let refs: Vec<&TrainSample> = samples.iter().collect();
    let (_, grad) = batch_gradient(&net, &refs, None).unwrap();
    let loss = |params: &[f64]| -> f64 {
        let n = Network::from_params(net.spec.clone(), params.to_vec()).unwrap();
        batch_gradient(&n, &refs, None).unwrap().0
    };
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    let mut p = net.params.clone();
    for i in 0..p.len() {
        let w = p[i];
        let mut at = |d: f64| {
            p[i] = w + d;
            loss(&p)
        };
        let fd = (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
        p[i] = w;
        let rel = (grad[i] - fd).abs() / grad[i].abs().max(fd.abs()).max(floor);
        worst = worst.max(rel);
    }
    (worst, p.len())
}

use steane_xai::circuit::{hook_location, Channel, LocalPauli, SinglePauli};
use steane_xai::dep::FaultInjection;
use steane_xai::seqlut::SeqLut;
use steane_xai::sim::Simulator;
use steane_xai::steane::{half_bits, Basis, CodeDefinition, PauliString, StabilizerKind};

/// Expected hook rows per plaquette: (fault class, correction support
/// (1-based), detector syndrome).
pub const HOOK_TABLE: [[(usize, &[usize], &str); 3]; 3] = [
    [(1, &[1], "100"), (2, &[3, 4], "010"), (3, &[4], "101")],
    [(1, &[2], "110"), (2, &[5, 6], "001"), (3, &[6], "011")],
    [(1, &[3], "111"), (2, &[6, 7], "010"), (3, &[7], "001")],
];

/// Injects every hook fault, reads flag and syndrome from the simulated
/// volume, looks the correction up and compares with [`HOOK_TABLE`].
/// Returns the number of matching rows and a description of mismatches.
pub fn hook_table_check(plaquettes: StabilizerKind) -> (usize, Vec<String>) {
    let code = CodeDefinition::steane();
    let sim = Simulator::new(code.clone());
    let lut = SeqLut::new(code.clone());
    // S_X is read before S_Z in a cycle, so Z-plaquette hooks show up in
    // the next cycle's increment.
    let (basis, detector, lag) = match plaquettes {
        StabilizerKind::X => (Basis::Z, StabilizerKind::Z, 0),
        StabilizerKind::Z => (Basis::X, StabilizerKind::X, 1),
    };
    let mut ok = 0;
    let mut bad = Vec::new();
    for (k, rows) in HOOK_TABLE.iter().enumerate() {
        for &(e, support, syndrome) in rows {
            let fault = FaultInjection { cycle: 1, location: hook_location(plaquettes, k, e - 1), pauli: LocalPauli(SinglePauli::X, SinglePauli::I) };
            let traj = sim.trajectory(basis, 2, 1, &mut { fault });
            let flags: Vec<usize> = (0..3).filter(|&j| traj.volume.bit(0, Channel::flag(plaquettes, j))).collect();
            let seen = traj.volume.increment(lag, detector);
            let expected = match plaquettes {
                StabilizerKind::X => PauliString::x(support).unwrap(),
                StabilizerKind::Z => PauliString::z(support).unwrap(),
            };
            let correction = lut.table(plaquettes).lookup(k, seen);
            // The correction must undo the propagated error up to a stabilizer.
            let residual = traj.final_data() ^ expected;
            let undone = code.syndrome_of(residual).is_trivial() && !code.readout_flip(residual, basis);
            if flags == [k] && half_bits(seen) == syndrome && correction == Some(expected) && undone {
                ok += 1;
            } else {
                bad.push(format!("plaquette {} E{e}: flags {flags:?} syndrome {} correction {correction:?}", k + 1, half_bits(seen)));
            }
        }
    }
    (ok, bad)
}

use steane_xai::xai::{deepshap, exact_shapley, feature_exclusion_game, BackgroundSet, DeepShap, Game};

fn swap_bits(s: u32, i: usize, j: usize) -> u32 {
    let (bi, bj) = (s >> i & 1, s >> j & 1);
    (s & !(1 << i) & !(1 << j)) | bi << j | bj << i
}

/// Worst violation of efficiency, symmetry, null player and linearity over
/// `games` random games with 1..=max_players players.
pub fn shapley_axiom_violation(games: usize, max_players: usize, seed: u64) -> [f64; 4] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 4];
    for _ in 0..games {
        let n = rng.gen_range(1..=max_players);
        let size = 1usize << n;
        let v: Vec<f64> = (0..size).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let w: Vec<f64> = (0..size).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let phi = exact_shapley(&Game::new(n, v.clone()).unwrap());
        let full = size - 1;
        worst[0] = worst[0].max((phi.iter().sum::<f64>() - (v[full] - v[0])).abs());

        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let sym: Vec<f64> = (0..size as u32).map(|s| 0.5 * (v[s as usize] + v[swap_bits(s, i, j) as usize])).collect();
        let ps = exact_shapley(&Game::new(n, sym).unwrap());
        worst[1] = worst[1].max((ps[i] - ps[j]).abs());

        let k = rng.gen_range(0..n);
        let null: Vec<f64> = (0..size).map(|s| v[s & !(1 << k)]).collect();
        worst[2] = worst[2].max(exact_shapley(&Game::new(n, null).unwrap())[k].abs());

        let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let mix: Vec<f64> = v.iter().zip(&w).map(|(x, y)| a * x + b * y).collect();
        let pm = exact_shapley(&Game::new(n, mix).unwrap());
        let pw = exact_shapley(&Game::new(n, w).unwrap());
        for t in 0..n {
            worst[3] = worst[3].max((pm[t] - (a * phi[t] + b * pw[t])).abs());
        }
    }
    worst
}

/// Affine network over `steps` rounds of `width` channels: one linear
/// dense layer, or two stacked when `deep`.
pub fn affine_network(rng: &mut impl Rng, steps: usize, width: usize, deep: bool) -> Network {
    let mut layers = vec![LayerSpec::Flatten { steps }];
    if deep {
        layers.push(LayerSpec::Dense { units: 3, activation: Activation::Linear });
    }
    layers.push(LayerSpec::Dense { units: 1, activation: Activation::Linear });
    let spec = NetworkSpec { input_width: width, layers, output_gate: Activation::Sigmoid };
    let n = spec.param_count().unwrap();
    Network::from_params(spec, (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap()
}

/// Largest |φ_deepshap − φ_exact| over `models` random affine models, each
/// explained at one random input against a random background.
pub fn deepshap_affine_deviation(models: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for m in 0..models {
        let (steps, width) = (2, 4);
        let net = affine_network(&mut rng, steps, width, m % 2 == 1);
        let bg = BackgroundSet::new((0..rng.gen_range(1..12)).map(|_| random_bits(&mut rng, steps, width)).collect()).unwrap();
        let x = random_bits(&mut rng, steps, width);
        let approx = deepshap(&net, 0, &x, &bg).unwrap();
        let game = feature_exclusion_game(|v: &[Vec<f64>]| net.predict(v).unwrap()[0], &x, &bg.means(steps)).unwrap();
        let exact = exact_shapley(&game);
        for (a, e) in approx.phi.iter().flatten().zip(&exact) {
            worst = worst.max((a - e).abs());
        }
    }
    worst
}

/// Largest summation-to-delta residual of DeepSHAP through the recurrent
/// decoder stack over `inputs` random volumes of 1..=8 rounds.
pub fn srnn_summation_residual(inputs: usize, background: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = Network::init(NetworkSpec::srnn(12, 2), &mut rng).unwrap();
    let bg = BackgroundSet::new((0..background).map(|_| {
        let t = rng.gen_range(1..=8);
        random_bits(&mut rng, t, 12)
    }).collect()).unwrap();
    let explainers: Vec<DeepShap> = (1..=8).map(|t| DeepShap::new(&net, 0, &bg, t).unwrap()).collect();
    let xs: Vec<Vec<Vec<f64>>> = (0..inputs).map(|_| {
        let t = rng.gen_range(1..=8);
        random_bits(&mut rng, t, 12)
    }).collect();
    use rayon::prelude::*;
    xs.par_iter()
        .map(|x| explainers[x.len() - 1].explain(x).unwrap().summation_residual())
        .reduce(|| 0.0, f64::max)
}
