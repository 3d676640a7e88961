//! Reverse-mode gradients against finite differences, mesh smoothness and
//! short training runs.

use std::time::Instant;

use photon_qcbm::baselines::test_to_test_mmd_with;
use photon_qcbm::boson::generate_boson_dataset;
use photon_qcbm::circuits::{compose_mesh, identity_parameters, initialize_parameters, make_input_state};
use photon_qcbm::grad::{finite_difference_check, mmd_gradient};
use photon_qcbm::mmd::{draw_batches, mmd_hat_figure1};
use photon_qcbm::trainer::{evaluate_model, parse_sigma_schedule, train};
use photon_qcbm::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_spec(mesh: MeshKind, m: usize, n: usize, seed: u64) -> CircuitSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = initialize_parameters(mesh, m, InitStrategy::Random, &mut rng).unwrap();
    CircuitSpec::new(mesh, m, params, make_input_state(m, n, None).unwrap()).unwrap()
}

fn batches_for(spec: &CircuitSpec, kz: usize, seed: u64) -> EstimatorBatches {
    let (ds, _) = generate_boson_dataset(spec.modes, spec.photons(), 200, seed, false).unwrap();
    let cfg = MmdConfig { sigma: 1.0, mask_batch: kz, glynn_batch: kz, data_batch: 200 };
    draw_batches(&cfg, spec.photons(), &ds.records, StreamSeed::new(seed), 0).unwrap()
}

#[test]
fn qr_haar_and_clements_gradients_match_central_differences() {
    for (mesh, m, seed) in [(MeshKind::QrHaar, 6, 1), (MeshKind::ClementsRectangular, 8, 2)] {
        let spec = random_spec(mesh, m, 2, seed);
        let b = batches_for(&spec, 200, seed);
        let err = finite_difference_check(&spec, &b, 1e-6).unwrap();
        assert!(err < 1e-4, "{mesh}: {err}");
    }
}

#[test]
fn shrinking_the_difference_step_tightens_agreement() {
    let spec = random_spec(MeshKind::QrHaar, 5, 2, 3);
    let b = batches_for(&spec, 200, 3);
    let coarse = finite_difference_check(&spec, &b, 1e-2).unwrap();
    let fine = finite_difference_check(&spec, &b, 1e-6).unwrap();
    assert!(fine < coarse, "h=1e-6 gives {fine}, h=1e-2 gives {coarse}");
    assert!(fine < 1e-4);
}

#[test]
fn gradient_costs_at_most_ten_forward_passes() {
    let spec = random_spec(MeshKind::QrHaar, 10, 3, 4);
    let b = batches_for(&spec, 1000, 4);
    let best = |f: &dyn Fn()| {
        (0..3)
            .map(|_| {
                let t = Instant::now();
                f();
                t.elapsed().as_secs_f64()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let forward = best(&|| {
        mmd_hat_figure1(&b.data, &b.masks, &b.signs, &spec).unwrap();
    });
    let backward = best(&|| {
        mmd_gradient(&spec, &b).unwrap();
    });
    assert!(backward <= 10.0 * forward, "gradient {backward}s, forward {forward}s");
}

#[test]
fn meshes_are_lipschitz_in_each_parameter() {
    let delta = 1e-6;
    for mesh in MeshKind::ALL {
        let spec = random_spec(mesh, 8, 2, 5);
        let base = compose_mesh(&spec).unwrap();
        for i in 0..spec.params.len() {
            let mut moved = spec.clone();
            moved.params[i] += delta;
            let d = compose_mesh(&moved).unwrap().distance(&base);
            assert!(d <= 10.0 * delta, "{mesh} parameter {i}: {d}");
        }
    }
}

fn small_problem() -> (Dataset, Dataset) {
    let (ds, _) = generate_boson_dataset(8, 2, 1000, 6, false).unwrap();
    let (train, test) = ds.records.split_at(800);
    (
        Dataset::new(8, 2, ds.collisions, train.to_vec()).unwrap(),
        Dataset::new(8, 2, ds.collisions, test.to_vec()).unwrap(),
    )
}

#[test]
fn bandwidth_warm_start_is_no_worse_than_a_fixed_bandwidth() {
    let (train_set, test_set) = small_problem();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let params = initialize_parameters(MeshKind::QrHaar, 8, InitStrategy::IdentityPerturbed(0.5), &mut rng).unwrap();
    let spec = CircuitSpec::new(MeshKind::QrHaar, 8, params, make_input_state(8, 2, None).unwrap()).unwrap();
    let mmd = MmdConfig { sigma: 1.0, mask_batch: 500, glynn_batch: 500, data_batch: 256 };
    let fixed = TrainConfig::new(90, mmd, 8);
    let warm = TrainConfig { sigma_schedule: parse_sigma_schedule("5:30,3:30,1:30").unwrap(), ..fixed.clone() };
    let kernel = Kernel::mod2(1.0).unwrap();
    let score = |cfg: &TrainConfig| {
        let out = train(&spec, &train_set, None, cfg).unwrap();
        evaluate_model(&out.spec, &test_set.records, &kernel, 5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap().0
    };
    let (w, f) = (score(&warm), score(&fixed));
    assert!(w <= 1.5 * f, "warm start {w}, fixed {f}");
}

#[test]
fn untrained_identity_model_is_further_from_data_than_the_test_set_itself() {
    let (_, test_set) = small_problem();
    let spec = CircuitSpec::new(
        MeshKind::QrHaar,
        8,
        identity_parameters(MeshKind::QrHaar, 8).unwrap(),
        make_input_state(8, 2, None).unwrap(),
    )
    .unwrap();
    let kernel = Kernel::mod2(1.0).unwrap();
    let (model, model_std) =
        evaluate_model(&spec, &test_set.records, &kernel, 5, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
    let (reference, ref_std) =
        test_to_test_mmd_with(&test_set.records, &kernel, 5, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
    assert!(model - model_std > reference + ref_std, "model {model}±{model_std}, reference {reference}±{ref_std}");
}
