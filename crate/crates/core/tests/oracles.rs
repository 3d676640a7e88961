//! Statistical and brute-force cross-checks between independent routes.

use photon_qcbm::baselines::{rbm_sample, rbm_train, test_to_test_mmd, uniform_fixed_hw_sample, RbmConfig, RbmModel};
use photon_qcbm::boson::{draw_samples, output_distribution};
use photon_qcbm::circuits::{compose_mesh, initialize_parameters, make_input_state};
use photon_qcbm::mmd::{
    draw_batches, expectation_wk_exact, kernel_expectation, mmd_exact, mmd_hat_figure1, mmd_lo_exact,
    mmd_unbiased_samples, LoKernelMode,
};
use photon_qcbm::numeric::{
    build_submatrix, enumerate_fock_space, glynn_sample, gurvits_permanent_mc, permanent_exact,
};
use photon_qcbm::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn haar_spec(m: usize, n: usize, seed: u64) -> CircuitSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = initialize_parameters(MeshKind::QrHaar, m, InitStrategy::Random, &mut rng).unwrap();
    CircuitSpec::new(MeshKind::QrHaar, m, params, make_input_state(m, n, None).unwrap()).unwrap()
}

fn ov(d: &str) -> OccupationVector {
    OccupationVector::from_digits(d).unwrap()
}

#[test]
fn glynn_draws_of_conjugated_unitaries_are_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..20 {
        let spec = haar_spec(7, 3, trial);
        let u = compose_mesh(&spec).unwrap();
        let w: Vec<f64> = (0..7).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let q = build_submatrix(&u.conjugate_diagonal(&w), &spec.input_state, &spec.input_state).unwrap();
        for idx in 0..8 {
            let g = glynn_sample(&q, &SignVector::from_index(3, idx)).unwrap();
            assert!(g.norm() <= 1.0 + 1e-12, "{}", g.norm());
        }
    }
}

#[test]
fn gurvits_grand_mean_is_unbiased() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = ComplexMatrix::from_fn(4, 4, |_, _| C64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)));
    let exact = permanent_exact(&a).unwrap();
    let runs: Vec<C64> = (0..200).map(|_| gurvits_permanent_mc(&a, 1000, &mut rng).unwrap().estimate).collect();
    let mean = runs.iter().sum::<C64>() / 200.0;
    let var = runs.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / 199.0;
    let se = (var / 200.0).sqrt();
    assert!((mean - exact).norm() < 4.0 * se, "{mean} vs {exact}, se {se}");
}

#[test]
fn sample_mmd_is_unbiased_for_the_exact_value() {
    let domain = enumerate_fock_space(4, 2, true);
    let p = [0.4, 0.1, 0.1, 0.1, 0.1, 0.2];
    let q = [0.05, 0.05, 0.3, 0.3, 0.2, 0.1];
    let kernel = Kernel::gaussian(1.0).unwrap();
    let exact = mmd_exact(&domain, &p, &q, &kernel).unwrap();
    let draw = |w: &[f64], rng: &mut ChaCha8Rng| -> OccupationVector {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (x, &wi) in domain.iter().zip(w) {
            acc += wi;
            if u < acc {
                return x.clone();
            }
        }
        domain[domain.len() - 1].clone()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let values: Vec<f64> = (0..10_000)
        .map(|_| {
            let xs: Vec<_> = (0..10).map(|_| draw(&p, &mut rng)).collect();
            let ys: Vec<_> = (0..10).map(|_| draw(&q, &mut rng)).collect();
            mmd_unbiased_samples(&xs, &ys, &kernel).unwrap()
        })
        .collect();
    let mean = values.iter().sum::<f64>() / 1e4;
    let se = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 9999.0 / 1e4).sqrt();
    assert!((mean - exact).abs() < 3.0 * se, "{mean} vs {exact} (se {se})");
}

#[test]
fn wk_expectation_matches_brute_force_distribution() {
    for (m, n, seed) in [(5, 2, 4), (5, 3, 5), (6, 2, 6)] {
        let spec = haar_spec(m, n, seed);
        let u = compose_mesh(&spec).unwrap();
        let dist = output_distribution(&u, &spec.input_state).unwrap();
        for idx in [0u64, 1, 5, 18, (1 << m) - 1] {
            let k = MaskVector::from_index(m, idx);
            let brute: f64 = dist
                .domain()
                .iter()
                .zip(dist.probabilities())
                .map(|(x, p)| x.mask_sign(k.bits()) * p)
                .sum();
            let exact = expectation_wk_exact(&u, &spec.input_state, &k).unwrap();
            assert!((exact - brute).abs() < 1e-10, "m={m} n={n} k={idx}: {exact} vs {brute}");
        }
    }
}

#[test]
fn linear_optical_model_term_matches_kernel_double_sum() {
    for (m, n, seed) in [(6, 2, 7), (8, 2, 8), (10, 2, 9), (7, 1, 10)] {
        let spec = haar_spec(m, n, seed);
        let u = compose_mesh(&spec).unwrap();
        let dist = output_distribution(&u, &spec.input_state).unwrap();
        let p = dist.probabilities();
        for sigma in [0.7, 2.0] {
            let brute = kernel_expectation(dist.domain(), p, p, &Kernel::mod2(sigma).unwrap()).unwrap();
            let lo = mmd_lo_exact(&u, &spec.input_state, sigma, LoKernelMode::Mod2).unwrap();
            assert!((lo.value - brute).abs() < 1e-10, "m={m}: {} vs {brute}", lo.value);
        }
    }
}

#[test]
fn estimator_is_centered_on_the_model_distribution() {
    let (m, n) = (10, 2);
    let spec = haar_spec(m, n, 11);
    let dist = output_distribution(&compose_mesh(&spec).unwrap(), &spec.input_state).unwrap();
    let cfg = MmdConfig { sigma: 1.0, mask_batch: 2000, glynn_batch: 2000, data_batch: 500 };
    let seed = StreamSeed::new(12);
    let values: Vec<f64> = (0..50u64)
        .map(|i| {
            let data = draw_samples(&dist, 500, &mut seed.substream(StreamTag::ModelSamples, i));
            let b = draw_batches(&cfg, n, &data, seed, i).unwrap();
            mmd_hat_figure1(&b.data, &b.masks, &b.signs, &spec).unwrap()
        })
        .collect();
    let mean = values.iter().sum::<f64>() / 50.0;
    let se = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 49.0 / 50.0).sqrt();
    assert!(mean.abs() < 3.0 * se, "{mean} (se {se})");
}

#[test]
fn estimator_variance_shrinks_with_batch_size() {
    let (m, n) = (8, 2);
    let spec = haar_spec(m, n, 13);
    let data = uniform_fixed_hw_sample(m, n, 300, &mut ChaCha8Rng::seed_from_u64(14)).unwrap();
    let variance = |kz: usize| {
        let cfg = MmdConfig { sigma: 1.0, mask_batch: kz, glynn_batch: kz, data_batch: 300 };
        let values: Vec<f64> = (0..50u64)
            .map(|i| {
                let b = draw_batches(&cfg, n, &data, StreamSeed::new(15), i).unwrap();
                mmd_hat_figure1(&b.data, &b.masks, &b.signs, &spec).unwrap()
            })
            .collect();
        let mean = values.iter().sum::<f64>() / 50.0;
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 49.0
    };
    let (small, large) = (variance(500), variance(2000));
    assert!(small > large, "{small} <= {large}");
}

#[test]
fn sampled_frequencies_match_exact_probabilities() {
    let spec = haar_spec(5, 2, 16);
    let dist = output_distribution(&compose_mesh(&spec).unwrap(), &spec.input_state).unwrap();
    let draws = 100_000;
    let samples = draw_samples(&dist, draws, &mut ChaCha8Rng::seed_from_u64(17));
    assert!(samples.iter().all(|x| x.total() == 2));
    for (x, &p) in dist.domain().iter().zip(dist.probabilities()) {
        let freq = samples.iter().filter(|s| *s == x).count() as f64 / draws as f64;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((freq - p).abs() <= 4.0 * se + 1e-12, "{x}: {freq} vs {p}");
    }
}

#[test]
fn uniform_sampler_passes_chi_square_against_enumeration() {
    let outcomes = enumerate_fock_space(8, 2, true);
    assert_eq!(outcomes.len(), 28);
    let draws = 100_000;
    let samples = uniform_fixed_hw_sample(8, 2, draws, &mut ChaCha8Rng::seed_from_u64(18)).unwrap();
    let expected = draws as f64 / 28.0;
    let chi2: f64 = outcomes
        .iter()
        .map(|x| {
            let c = samples.iter().filter(|s| *s == x).count() as f64;
            (c - expected).powi(2) / expected
        })
        .sum();
    // 99.9% quantile of chi-square with 27 degrees of freedom
    assert!(chi2 < 55.476, "{chi2}");
    for pos in 0..8 {
        let f = samples.iter().filter(|s| s.counts()[pos] == 1).count() as f64 / draws as f64;
        let p = 0.25;
        assert!((f - p).abs() < 4.0 * (p * (1.0 - p) / draws as f64).sqrt());
    }
}

#[test]
fn rbm_reconstruction_error_decreases_on_two_clusters() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let clusters = [ov("11100000"), ov("00000111")];
    let records: Vec<OccupationVector> = (0..200).map(|i| clusters[i % 2].clone()).collect();
    let ds = Dataset::new(8, 3, false, records).unwrap();
    let cfg = RbmConfig { epochs: 10, ..RbmConfig::for_modes(8) };
    let errors = rbm_train(&ds, &cfg, &mut rng).unwrap().reconstruction_errors;
    assert_eq!(errors.len(), 10);
    for w in errors.windows(2) {
        assert!(w[1] < w[0], "{errors:?}");
    }
}

#[test]
fn zero_rbm_post_selection_is_uniform_per_position() {
    let mut model = RbmModel::new(6, 6, &mut ChaCha8Rng::seed_from_u64(0));
    model.weights.iter_mut().for_each(|w| *w = 0.0);
    let draws = 20_000;
    let out = rbm_sample(&model, draws, 2, &mut ChaCha8Rng::seed_from_u64(20)).unwrap();
    assert_eq!(out.fallbacks, 0);
    let p = 2.0 / 6.0;
    for pos in 0..6 {
        let f = out.samples.iter().filter(|s| s.counts()[pos] == 1).count() as f64 / draws as f64;
        assert!((f - p).abs() < 4.0 * (p * (1.0 - p) / draws as f64).sqrt(), "{pos}: {f}");
    }
}

#[test]
fn test_to_test_reference_is_centered() {
    let test = uniform_fixed_hw_sample(10, 3, 2000, &mut ChaCha8Rng::seed_from_u64(21)).unwrap();
    let (mean, std) = test_to_test_mmd(&test, 1.0, 20, &mut ChaCha8Rng::seed_from_u64(22)).unwrap();
    assert!(mean.abs() < 3.0 * std / 20f64.sqrt(), "{mean} ± {std}");
}

#[test]
fn file_round_trip_through_disk() {
    let ds = Dataset::new(4, 2, false, vec![ov("0110"), ov("1001")])
        .unwrap()
        .with_provenance(["generated for a round trip".to_string()]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.txt");
    photon_qcbm::data::write_dataset(&ds, &path).unwrap();
    assert_eq!(photon_qcbm::data::read_dataset(&path).unwrap(), ds);
}
