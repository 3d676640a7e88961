//! Bernoulli-Bernoulli restricted Boltzmann machine trained with CD-1.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numeric::OccupationVector;

/// Gibbs steps before a chain's state is first considered for acceptance.
const BURN_IN: usize = 20;
/// Further Gibbs steps allowed per sample before falling back to top-n.
pub const RBM_RETRY_CAP: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct RbmModel {
    pub visible: usize,
    pub hidden: usize,
    /// visible × hidden, row-major.
    pub weights: Vec<f64>,
    pub visible_bias: Vec<f64>,
    pub hidden_bias: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RbmConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

impl RbmConfig {
    /// hidden = m, 200 epochs, learning rate 0.01, minibatches of 10.
    pub fn for_modes(m: usize) -> Self {
        RbmConfig { hidden: m, epochs: 200, learning_rate: 0.01, batch_size: 10 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RbmTraining {
    pub model: RbmModel,
    /// Mean squared mean-field reconstruction error after each epoch.
    pub reconstruction_errors: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RbmSamples {
    pub samples: Vec<OccupationVector>,
    /// Number of samples produced by the top-n fallback.
    pub fallbacks: usize,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 { x } else { x.exp().ln_1p() }
}

impl RbmModel {
    /// Weights drawn from N(0, 0.01²), zero biases.
    pub fn new(visible: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let normal = Normal::new(0.0, 0.01).expect("valid normal");
        RbmModel {
            visible,
            hidden,
            weights: (0..visible * hidden).map(|_| normal.sample(rng)).collect(),
            visible_bias: vec![0.0; visible],
            hidden_bias: vec![0.0; hidden],
        }
    }

    fn hidden_probs(&self, v: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            let mut x = self.hidden_bias[j];
            for (i, &vi) in v.iter().enumerate() {
                x += vi * self.weights[i * self.hidden + j];
            }
            *o = sigmoid(x);
        }
    }

    fn visible_probs(&self, h: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.weights[i * self.hidden..(i + 1) * self.hidden];
            *o = sigmoid(self.visible_bias[i] + row.iter().zip(h).map(|(w, hj)| w * hj).sum::<f64>());
        }
    }

    /// F(v) = −aᵀv − Σⱼ softplus(bⱼ + (vᵀW)ⱼ); exp(−F) is the unnormalized probability.
    pub fn free_energy(&self, v: &[u8]) -> f64 {
        let mut f = -v.iter().zip(&self.visible_bias).map(|(&x, a)| x as f64 * a).sum::<f64>();
        for j in 0..self.hidden {
            let mut x = self.hidden_bias[j];
            for (i, &vi) in v.iter().enumerate() {
                x += vi as f64 * self.weights[i * self.hidden + j];
            }
            f -= softplus(x);
        }
        f
    }
}

fn bernoulli(p: &[f64], out: &mut [f64], rng: &mut impl Rng) {
    for (o, &pi) in out.iter_mut().zip(p) {
        *o = if rng.random::<f64>() < pi { 1.0 } else { 0.0 };
    }
}

pub fn rbm_train(data: &Dataset, config: &RbmConfig, rng: &mut impl Rng) -> Result<RbmTraining> {
    if data.collisions || data.records.iter().any(|x| !x.is_collision_free()) {
        return Err(Error::InvalidArgument("RBM training needs binary data".into()));
    }
    if config.hidden == 0 || config.batch_size == 0 || !(config.learning_rate > 0.0) {
        return Err(Error::InvalidArgument("hidden units, batch size and learning rate must be positive".into()));
    }
    let (m, h) = (data.modes, config.hidden);
    let mut model = RbmModel::new(m, h, rng);
    let rows: Vec<Vec<f64>> =
        data.records.iter().map(|x| x.counts().iter().map(|&c| c as f64).collect()).collect();
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let (mut ph0, mut h0, mut pv1, mut v1, mut ph1) = (vec![0.0; h], vec![0.0; h], vec![0.0; m], vec![0.0; m], vec![0.0; h]);
    let mut errors = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), rng);
        for batch in order.chunks(config.batch_size) {
            let mut dw = vec![0.0; m * h];
            let mut da = vec![0.0; m];
            let mut db = vec![0.0; h];
            for &r in batch {
                let v0 = &rows[r];
                model.hidden_probs(v0, &mut ph0);
                bernoulli(&ph0, &mut h0, rng);
                model.visible_probs(&h0, &mut pv1);
                bernoulli(&pv1, &mut v1, rng);
                model.hidden_probs(&v1, &mut ph1);
                for i in 0..m {
                    for j in 0..h {
                        dw[i * h + j] += v0[i] * ph0[j] - v1[i] * ph1[j];
                    }
                    da[i] += v0[i] - v1[i];
                }
                for j in 0..h {
                    db[j] += ph0[j] - ph1[j];
                }
            }
            let step = config.learning_rate / batch.len() as f64;
            model.weights.iter_mut().zip(&dw).for_each(|(w, d)| *w += step * d);
            model.visible_bias.iter_mut().zip(&da).for_each(|(a, d)| *a += step * d);
            model.hidden_bias.iter_mut().zip(&db).for_each(|(b, d)| *b += step * d);
        }
        let mut err = 0.0;
        for v0 in &rows {
            model.hidden_probs(v0, &mut ph0);
            model.visible_probs(&ph0, &mut pv1);
            err += v0.iter().zip(&pv1).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        }
        errors.push(err / (rows.len() * m) as f64);
    }
    Ok(RbmTraining { model, reconstruction_errors: errors })
}

/// Gibbs samples post-selected to Hamming weight `n`. A chain that does not
/// reach weight `n` within [`RBM_RETRY_CAP`] steps emits the `n` visible units
/// with the largest activation instead, and the fallback is counted.
pub fn rbm_sample(model: &RbmModel, count: usize, n: usize, rng: &mut impl Rng) -> Result<RbmSamples> {
    if n > model.visible {
        return Err(Error::InvalidArgument(format!("weight {n} exceeds {} visible units", model.visible)));
    }
    let (m, h) = (model.visible, model.hidden);
    let (mut v, mut pv, mut ph, mut hs) = (vec![0.0; m], vec![0.0; m], vec![0.0; h], vec![0.0; h]);
    let mut samples = Vec::with_capacity(count);
    let mut fallbacks = 0;
    for _ in 0..count {
        for x in v.iter_mut() {
            *x = if rng.random::<bool>() { 1.0 } else { 0.0 };
        }
        let mut accepted = false;
        for step in 0..BURN_IN + RBM_RETRY_CAP {
            model.hidden_probs(&v, &mut ph);
            bernoulli(&ph, &mut hs, rng);
            model.visible_probs(&hs, &mut pv);
            bernoulli(&pv, &mut v, rng);
            if step + 1 >= BURN_IN && v.iter().filter(|&&x| x > 0.5).count() == n {
                accepted = true;
                break;
            }
        }
        let counts: Vec<u8> = if accepted {
            v.iter().map(|&x| (x > 0.5) as u8).collect()
        } else {
            fallbacks += 1;
            let mut idx: Vec<usize> = (0..m).collect();
            idx.sort_by(|&a, &b| pv[b].total_cmp(&pv[a]).then(a.cmp(&b)));
            let mut c = vec![0u8; m];
            for &i in &idx[..n] {
                c[i] = 1;
            }
            c
        };
        samples.push(OccupationVector::new(counts));
    }
    Ok(RbmSamples { samples, fallbacks })
}
