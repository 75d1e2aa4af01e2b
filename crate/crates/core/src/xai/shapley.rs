//! Exact Shapley values of small cooperative games.

use crate::nn::Sequence;

use super::XaiError;

pub const MAX_PLAYERS: usize = 20;

/// Cooperative game with the characteristic function tabulated over all
/// coalitions; bit i of the index marks player i.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    players: usize,
    values: Vec<f64>,
}

impl Game {
    pub fn new(players: usize, values: Vec<f64>) -> Result<Self, XaiError> {
        if players > MAX_PLAYERS {
            return Err(XaiError::TooManyPlayers(players));
        }
        if values.len() != 1 << players {
            return Err(XaiError::GameSize { players, expected: 1 << players, got: values.len() });
        }
        Ok(Self { players, values })
    }

    pub fn from_fn(players: usize, v: impl FnMut(u32) -> f64) -> Result<Self, XaiError> {
        if players > MAX_PLAYERS {
            return Err(XaiError::TooManyPlayers(players));
        }
        Self::new(players, (0..1u32 << players).map(v).collect())
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn value(&self, coalition: u32) -> f64 {
        self.values[coalition as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// φ_i = Σ_{S ⊆ N∖{i}} |S|!(n−|S|−1)!/n! · (v(S ∪ {i}) − v(S)).
pub fn exact_shapley(game: &Game) -> Vec<f64> {
    let n = game.players;
    if n == 0 {
        return vec![];
    }
    // weight[s] = s!(n−s−1)!/n!, built as 1/(n·C(n−1, s)).
    let mut weight = vec![0.0; n];
    let mut binom = 1.0;
    for (s, w) in weight.iter_mut().enumerate() {
        *w = 1.0 / (n as f64 * binom);
        binom = binom * (n - 1 - s) as f64 / (s + 1) as f64;
    }
    let mut phi = vec![0.0; n];
    for (i, p) in phi.iter_mut().enumerate() {
        let bit = 1u32 << i;
        let mut acc = 0.0;
        for s in 0..1u32 << n {
            if s & bit == 0 {
                acc += weight[s.count_ones() as usize] * (game.value(s | bit) - game.value(s));
            }
        }
        *p = acc;
    }
    phi
}

/// v(S) = f(x with the features outside S replaced by `means`). Feature
/// index t·width + c addresses channel c of round t.
pub fn feature_exclusion_game(model: impl Fn(&[Vec<f64>]) -> f64, x: &[Vec<f64>], means: &[Vec<f64>]) -> Result<Game, XaiError> {
    let t = x.len();
    let width = x.first().map_or(0, |r| r.len());
    let n = t * width;
    if n > MAX_PLAYERS {
        return Err(XaiError::TooManyPlayers(n));
    }
    let mut input: Sequence = means.to_vec();
    Game::from_fn(n, |s| {
        for (i, row) in input.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                let f = i * width + c;
                *v = if s >> f & 1 == 1 { x[i][c] } else { means[i][c] };
            }
        }
        model(&input)
    })
}
