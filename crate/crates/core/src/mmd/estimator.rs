//! The sampled MMD² estimator built from mask, sign-vector and data batches.
//!
//! For every mask kᵢ and sign vector z_j the model observable is estimated by
//! f(kᵢ, z_j) = Gly_{z_j}((U†W^{kᵢ}U)^{s,s}) / ∏sᵢ!, and the data observable by
//! the parity (−1)^{x·kᵢ}. Per mask,
//!
//! ```text
//! ℓᵢ = Σ_{j≠l} f_j f_l / |Z|(|Z|−1) − 2·mean_j f_j · mean_l c_l + Σ_{j≠l} c_j c_l / |X|(|X|−1)
//! ```
//!
//! and the estimate is the mean of ℓᵢ over masks. Only the real part of f
//! enters, since the expectation it estimates is real.
//!
//! Masks are processed in fixed-size chunks whose partial sums are combined in
//! index order, so the value does not depend on the number of threads. The
//! forward value and the gradient share [`estimate`], which is why the loss
//! reported with a gradient is bit-identical to the plain forward value.

use rand::seq::index::sample;
use rayon::prelude::*;

use super::kernel::{check_sigma, sample_mask, MaskVector};
use crate::circuits::CircuitSpec;
use crate::error::{Error, Result};
use crate::numeric::matrix::{C64, ONE, ZERO};
use crate::numeric::{ComplexMatrix, OccupationVector, SignVector};
use crate::rng::{StreamSeed, StreamTag};

const MASK_CHUNK: usize = 32;

/// Bandwidth and batch sizes of one estimator evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MmdConfig {
    pub sigma: f64,
    /// |K|
    pub mask_batch: usize,
    /// |Z|
    pub glynn_batch: usize,
    /// |X|
    pub data_batch: usize,
}

impl MmdConfig {
    pub fn validate(&self) -> Result<()> {
        check_sigma(self.sigma)?;
        check_sizes(self.mask_batch, self.glynn_batch, self.data_batch)
    }
}

fn check_sizes(k: usize, z: usize, x: usize) -> Result<()> {
    if k < 1 || z < 2 || x < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 1 mask, 2 sign vectors and 2 data points; got {k}, {z}, {x}"
        )));
    }
    Ok(())
}

/// The frozen randomness of one evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorBatches {
    pub data: Vec<OccupationVector>,
    pub masks: Vec<MaskVector>,
    pub signs: Vec<SignVector>,
}

/// Draws masks, sign vectors and a data batch from the substreams of `seed`
/// at position `index`. The data batch is drawn without replacement and is
/// capped at the dataset size.
pub fn draw_batches(
    config: &MmdConfig,
    photons: usize,
    dataset: &[OccupationVector],
    seed: StreamSeed,
    index: u64,
) -> Result<EstimatorBatches> {
    config.validate()?;
    let m = dataset.first().map(|x| x.modes()).ok_or_else(|| Error::InvalidArgument("empty dataset".into()))?;
    let take = config.data_batch.min(dataset.len());
    if take < 2 {
        return Err(Error::InvalidArgument("the dataset needs at least 2 records".into()));
    }
    let mut rng = seed.substream(StreamTag::DataBatch, index);
    let data = sample(&mut rng, dataset.len(), take).into_iter().map(|i| dataset[i].clone()).collect();
    let mut rng = seed.substream(StreamTag::Masks, index);
    let masks = (0..config.mask_batch).map(|_| sample_mask(m, config.sigma, &mut rng)).collect();
    let mut rng = seed.substream(StreamTag::Signs, index);
    let signs = (0..config.glynn_batch).map(|_| SignVector::random(photons, &mut rng)).collect();
    Ok(EstimatorBatches { data, masks, signs })
}

/// Sampled MMD² between the circuit's output distribution and the data batch.
pub fn mmd_hat_figure1(
    data: &[OccupationVector],
    masks: &[MaskVector],
    signs: &[SignVector],
    spec: &CircuitSpec,
) -> Result<f64> {
    let u = spec.unitary()?;
    let problem = Problem::new(&u, &spec.input_state, data, masks, signs)?;
    Ok(estimate(&problem, false).0)
}

/// Validated inputs in the form the inner loops use.
pub(crate) struct Problem<'a> {
    u: &'a ComplexMatrix,
    /// Occupied input modes, repeated by occupation.
    cols: Vec<usize>,
    inv_fact: f64,
    masks: &'a [MaskVector],
    /// Data parities are computed from these odd-count mode sets.
    data: &'a [OccupationVector],
    /// Signs as reals with their products, [z₀…z_{n−1}, ∏z] per vector.
    signs: Vec<f64>,
}

impl<'a> Problem<'a> {
    pub(crate) fn new(
        u: &'a ComplexMatrix,
        s: &OccupationVector,
        data: &'a [OccupationVector],
        masks: &'a [MaskVector],
        signs: &[SignVector],
    ) -> Result<Self> {
        check_sizes(masks.len(), signs.len(), data.len())?;
        let m = u.rows();
        if s.modes() != m || data.iter().any(|x| x.modes() != m) || masks.iter().any(|k| k.len() != m) {
            return Err(Error::Shape(format!("data, masks and input state must all have {m} modes")));
        }
        let cols: Vec<usize> = s.counts().iter().enumerate().flat_map(|(i, &c)| std::iter::repeat_n(i, c as usize)).collect();
        let n = cols.len();
        if let Some(z) = signs.iter().find(|z| z.len() != n) {
            return Err(Error::Shape(format!("sign vector of length {} for {n} photons", z.len())));
        }
        let mut flat = Vec::with_capacity(signs.len() * (n + 1));
        for z in signs {
            flat.extend(z.signs().iter().map(|&v| v as f64));
            flat.push(z.product());
        }
        Ok(Problem { u, cols, inv_fact: 1.0 / s.factorial_product(), masks, data, signs: flat })
    }

    fn photons(&self) -> usize {
        self.cols.len()
    }
}

/// Scratch buffers reused across the masks of one chunk.
struct Scratch {
    q: Vec<C64>,
    y: Vec<C64>,
    r: Vec<f64>,
    qbar: Vec<C64>,
    prefix: Vec<C64>,
}

/// Returns the estimate and, if requested, ∂L/∂U as a complex adjoint
/// (Ū = ∂L/∂Re U + i ∂L/∂Im U).
pub(crate) fn estimate(p: &Problem<'_>, want_adjoint: bool) -> (f64, Option<ComplexMatrix>) {
    let m = p.u.rows();
    let chunks: Vec<(f64, Option<ComplexMatrix>)> = p
        .masks
        .par_chunks(MASK_CHUNK)
        .map(|chunk| {
            let n = p.photons();
            let zc = p.signs.len() / (n + 1);
            let mut scratch = Scratch {
                q: vec![ZERO; n * n],
                y: vec![ZERO; zc * n],
                r: vec![0.0; zc],
                qbar: vec![ZERO; n * n],
                prefix: vec![ZERO; n + 1],
            };
            let mut adj = want_adjoint.then(|| ComplexMatrix::zeros(m, m));
            let mut sum = 0.0;
            for k in chunk {
                sum += mask_term(p, k, &mut scratch, adj.as_mut());
            }
            (sum, adj)
        })
        .collect();
    let kc = p.masks.len() as f64;
    let mut total = 0.0;
    let mut adjoint = want_adjoint.then(|| ComplexMatrix::zeros(m, m));
    for (s, a) in &chunks {
        total += s;
        if let (Some(acc), Some(a)) = (adjoint.as_mut(), a) {
            for (x, y) in acc.as_mut_slice().iter_mut().zip(a.as_slice()) {
                *x += y;
            }
        }
    }
    if let Some(acc) = adjoint.as_mut() {
        for v in acc.as_mut_slice() {
            *v /= kc;
        }
    }
    (total / kc, adjoint)
}

/// ℓᵢ for one mask; accumulates K·∂L/∂U into `adj` when given.
fn mask_term(p: &Problem<'_>, k: &MaskVector, s: &mut Scratch, adj: Option<&mut ComplexMatrix>) -> f64 {
    let n = p.photons();
    let u = p.u;
    let set: Vec<usize> = k.set_modes();

    // Q_s[a,b] = δ(cols_a = cols_b) − 2 Σ_{r∈k} conj(U[r,cols_a]) U[r,cols_b]
    for a in 0..n {
        for b in 0..n {
            let mut acc = ZERO;
            for &r in &set {
                acc += u[(r, p.cols[a])].conj() * u[(r, p.cols[b])];
            }
            let delta = if p.cols[a] == p.cols[b] { ONE } else { ZERO };
            s.q[a * n + b] = delta - acc * 2.0;
        }
    }

    let zc = s.r.len();
    let mut sr = 0.0;
    let mut sr2 = 0.0;
    for j in 0..zc {
        let z = &p.signs[j * (n + 1)..(j + 1) * (n + 1)];
        let mut prod = ONE;
        for a in 0..n {
            let row = &s.q[a * n..(a + 1) * n];
            let mut dot = ZERO;
            for b in 0..n {
                dot += row[b] * z[b];
            }
            s.y[j * n + a] = dot;
            prod *= dot;
        }
        let r = (prod * z[n] * p.inv_fact).re;
        s.r[j] = r;
        sr += r;
        sr2 += r * r;
    }

    let mut c = 0.0;
    for x in p.data {
        let odd = set.iter().filter(|&&r| x.counts()[r] % 2 == 1).count();
        c += if odd % 2 == 0 { 1.0 } else { -1.0 };
    }
    let (zf, xf) = (zc as f64, p.data.len() as f64);
    let t1 = (sr * sr - sr2) / (zf * (zf - 1.0));
    let t2 = -2.0 * (sr / zf) * (c / xf);
    let t3 = (c * c - xf) / (xf * (xf - 1.0));

    if let Some(adj) = adj {
        // ∂ℓ/∂r_j, then back through y = Q_s z and Q_s = U_cᴴ W U_c.
        s.qbar.iter_mut().for_each(|v| *v = ZERO);
        for j in 0..zc {
            let g = 2.0 * (sr - s.r[j]) / (zf * (zf - 1.0)) - 2.0 * (c / xf) / zf;
            let z = &p.signs[j * (n + 1)..(j + 1) * (n + 1)];
            let y = &s.y[j * n..(j + 1) * n];
            s.prefix[0] = ONE;
            for a in 0..n {
                s.prefix[a + 1] = s.prefix[a] * y[a];
            }
            let scale = g * z[n] * p.inv_fact;
            let mut suffix = ONE;
            for a in (0..n).rev() {
                let ybar = (s.prefix[a] * suffix).conj() * scale;
                suffix *= y[a];
                for b in 0..n {
                    s.qbar[a * n + b] += ybar * z[b];
                }
            }
        }
        // Ū[r, cols_a] += −2 Σ_b U[r, cols_b] (Q̄ + Q̄ᴴ)[b, a]
        for &r in &set {
            for a in 0..n {
                let mut acc = ZERO;
                for b in 0..n {
                    let h = s.qbar[b * n + a] + s.qbar[a * n + b].conj();
                    acc += u[(r, p.cols[b])] * h;
                }
                adj[(r, p.cols[a])] -= acc * 2.0;
            }
        }
    }
    t1 + t2 + t3
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{compose_mesh, initialize_parameters, make_input_state, InitStrategy, MeshKind};
    use crate::numeric::{build_submatrix, glynn_sample};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_spec(mesh: MeshKind, m: usize, n: usize, seed: u64) -> CircuitSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = initialize_parameters(mesh, m, InitStrategy::Random, &mut rng).unwrap();
        CircuitSpec::new(mesh, m, params, make_input_state(m, n, None).unwrap()).unwrap()
    }

    /// Literal transcription of the three-term formula, one f at a time.
    fn slow_reference(data: &[OccupationVector], masks: &[MaskVector], signs: &[SignVector], spec: &CircuitSpec) -> f64 {
        let u = compose_mesh(spec).unwrap();
        let s = &spec.input_state;
        let (zf, xf) = (signs.len() as f64, data.len() as f64);
        let mut total = 0.0;
        for k in masks {
            let q = u.conjugate_diagonal(&k.signs());
            let qs = build_submatrix(&q, s, s).unwrap();
            let f: Vec<f64> = signs.iter().map(|z| glynn_sample(&qs, z).unwrap().re / s.factorial_product()).collect();
            let c: Vec<f64> = data.iter().map(|x| x.mask_sign(k.bits())).collect();
            let mut t1 = 0.0;
            for j in 0..f.len() {
                for l in 0..f.len() {
                    if j != l {
                        t1 += f[j] * f[l];
                    }
                }
            }
            let mut t2 = 0.0;
            for fj in &f {
                for cl in &c {
                    t2 += fj * cl;
                }
            }
            let mut t3 = 0.0;
            for j in 0..c.len() {
                for l in 0..c.len() {
                    if j != l {
                        t3 += c[j] * c[l];
                    }
                }
            }
            total += t1 / (zf * (zf - 1.0)) - 2.0 * t2 / (zf * xf) + t3 / (xf * (xf - 1.0));
        }
        total / masks.len() as f64
    }

    #[test]
    fn matches_literal_formula() {
        let spec = random_spec(MeshKind::ClementsRectangular, 6, 3, 1);
        let data: Vec<OccupationVector> = ["111000", "010101", "001110", "100011", "110100"]
            .iter()
            .map(|d| OccupationVector::from_digits(d).unwrap())
            .collect();
        let cfg = MmdConfig { sigma: 0.7, mask_batch: 70, glynn_batch: 9, data_batch: 5 };
        let b = draw_batches(&cfg, 3, &data, StreamSeed(5), 0).unwrap();
        let fast = mmd_hat_figure1(&b.data, &b.masks, &b.signs, &spec).unwrap();
        let slow = slow_reference(&b.data, &b.masks, &b.signs, &spec);
        assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
    }

    #[test]
    fn preconditions() {
        let spec = random_spec(MeshKind::ClementsRectangular, 4, 2, 2);
        let x = vec![OccupationVector::from_digits("1100").unwrap(); 2];
        let k = vec![MaskVector::new(vec![false; 4])];
        let z = vec![SignVector::new(vec![1, 1]).unwrap(); 2];
        assert!(mmd_hat_figure1(&x[..1], &k, &z, &spec).is_err());
        assert!(mmd_hat_figure1(&x, &[], &z, &spec).is_err());
        assert!(mmd_hat_figure1(&x, &k, &z[..1], &spec).is_err());
        assert!(mmd_hat_figure1(&x, &k, &z, &spec).is_ok());
        assert!(MmdConfig { sigma: 0.0, mask_batch: 1, glynn_batch: 2, data_batch: 2 }.validate().is_err());
    }

    #[test]
    fn fixed_seed_is_bit_identical_across_thread_counts() {
        let spec = random_spec(MeshKind::ClementsRectangular, 8, 2, 3);
        let data: Vec<OccupationVector> =
            (0..8).map(|i| OccupationVector::from_positions(8, &[i, (i + 3) % 8]).unwrap()).collect();
        let cfg = MmdConfig { sigma: 1.0, mask_batch: 300, glynn_batch: 50, data_batch: 8 };
        let b = draw_batches(&cfg, 2, &data, StreamSeed(11), 4).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mmd_hat_figure1(&b.data, &b.masks, &b.signs, &spec).unwrap())
        };
        let one = run(1);
        assert_eq!(one.to_bits(), run(4).to_bits());
        assert_eq!(one.to_bits(), run(3).to_bits());
    }
}
