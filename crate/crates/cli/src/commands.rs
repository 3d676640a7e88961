use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use photon_qcbm::baselines::{
    mean_std, rbm_sample, rbm_train, test_to_test_mmd_with, uniform_fixed_hw_sample, RbmConfig,
};
use photon_qcbm::boson::{generate_boson_dataset, output_distribution};
use photon_qcbm::circuits::{initialize_parameters, make_input_state};
use photon_qcbm::data::{
    ingest_expression_table, ingest_rankings, parse_expression_csv, parse_preflib, parse_rankings_csv,
    read_dataset,
};
use photon_qcbm::grad::finite_difference_check;
use photon_qcbm::mmd::{draw_batches, kernel_expectation, mmd_lo_exact, mmd_unbiased_samples, LoKernelMode};
use photon_qcbm::trainer::{evaluate_model, parse_sigma_schedule, train, TrainConfig};
use photon_qcbm::{CircuitSpec, Dataset, InitStrategy, Kernel, MeshKind, MmdConfig, StreamSeed, StreamTag};

use crate::manifest::{hash_file, manifest_path_for, with_hash_comment, Manifest};
use crate::{
    BaselineArgs, BaselineKind, BosonArgs, CheckGradArgs, Command, EvalArgs, GenDataset, IngestArgs, IngestFormat,
    KernelArg, OracleArgs, TrainArgs, UniformArgs,
};

pub fn run(command: Command, args: &[String], config: Option<&Path>) -> Result<()> {
    let started = Instant::now();
    let (name, seed) = match &command {
        Command::GenDataset(GenDataset::Boson(a)) => ("gen-dataset boson", Some(a.seed)),
        Command::GenDataset(GenDataset::Uniform(a)) => ("gen-dataset uniform", Some(a.seed)),
        Command::GenDataset(GenDataset::Ingest(_)) => ("gen-dataset ingest", None),
        Command::Train(a) => ("train", Some(a.seed)),
        Command::Eval(a) => ("eval", Some(a.seed)),
        Command::Baseline(a) => ("baseline", Some(a.seed)),
        Command::CheckGrad(a) => ("check-grad", Some(a.seed)),
        Command::Oracle(a) => ("oracle", Some(a.seed)),
    };
    let mut manifest = Manifest::new(name, args, seed);
    if let Some(path) = config {
        manifest.config = Some(hash_file(path)?);
    }
    let manifest_path = match command {
        Command::GenDataset(GenDataset::Boson(a)) => gen_boson(a, &mut manifest)?,
        Command::GenDataset(GenDataset::Uniform(a)) => gen_uniform(a, &mut manifest)?,
        Command::GenDataset(GenDataset::Ingest(a)) => gen_ingest(a, &mut manifest)?,
        Command::Train(a) => run_train(a, &mut manifest)?,
        Command::Eval(a) => run_eval(a, &mut manifest)?,
        Command::Baseline(a) => run_baseline(a, &mut manifest)?,
        Command::CheckGrad(a) => run_check_grad(a, &mut manifest)?,
        Command::Oracle(a) => run_oracle(a, &mut manifest)?,
    };
    manifest.wall_ms = started.elapsed().as_secs_f64() * 1e3;
    manifest.write(&manifest_path)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_dataset(path: &Path, manifest: &mut Manifest) -> Result<Dataset> {
    manifest.input(path)?;
    read_dataset(path).with_context(|| format!("reading {}", path.display()))
}

fn save_dataset(ds: &Dataset, out: &Path, manifest: &mut Manifest) -> Result<PathBuf> {
    write(out, &ds.to_text()?)?;
    manifest.output(out);
    println!("wrote {} records to {}", ds.len(), out.display());
    Ok(manifest_path_for(out))
}

fn kernel_for(kind: KernelArg, sigma: f64) -> Result<Kernel> {
    Ok(match kind {
        KernelArg::Mod2 => Kernel::mod2(sigma)?,
        KernelArg::Gaussian => Kernel::gaussian(sigma)?,
    })
}

fn parse_mesh(text: &str) -> Result<MeshKind> {
    Ok(text.parse::<MeshKind>()?)
}

/// Comma-separated 1-based modes → 0-based.
fn parse_modes(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| match t.trim().parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v - 1),
            _ => bail!("bad mode '{t}' (modes are numbered from 1)"),
        })
        .collect()
}

fn gen_boson(a: BosonArgs, manifest: &mut Manifest) -> Result<PathBuf> {
    let (ds, _) = generate_boson_dataset(a.m, a.n, a.size, a.seed, a.collision_free)?;
    save_dataset(&ds, &a.out, manifest)
}

fn gen_uniform(a: UniformArgs, manifest: &mut Manifest) -> Result<PathBuf> {
    let mut rng = StreamSeed::new(a.seed).substream(StreamTag::Generator, 0);
    let records = uniform_fixed_hw_sample(a.m, a.n, a.size, &mut rng)?;
    let ds = Dataset::new(a.m, a.n, false, records)?
        .with_provenance([format!("uniform fixed-weight sample, seed {}", a.seed)]);
    save_dataset(&ds, &a.out, manifest)
}

fn gen_ingest(a: IngestArgs, manifest: &mut Manifest) -> Result<PathBuf> {
    manifest.input(&a.input)?;
    let text = std::fs::read_to_string(&a.input).with_context(|| format!("cannot read {}", a.input.display()))?;
    let ds = match a.format {
        IngestFormat::Preflib | IngestFormat::Rankings => {
            let m = a.m.context("--m is required for ranking data")?;
            let rows = if matches!(a.format, IngestFormat::Preflib) {
                parse_preflib(&text)?
            } else {
                parse_rankings_csv(&text)?
            };
            ingest_rankings(&rows, m, a.n)?
        }
        IngestFormat::Expression => {
            let table = parse_expression_csv(&text)?;
            let universe: Vec<String> = match &a.universe {
                Some(u) => u.split(',').map(|s| s.trim().to_string()).collect(),
                None => table.items.clone(),
            };
            ingest_expression_table(&table, &universe, a.n, a.signed)?
        }
    };
    let ds = ds.with_provenance([format!("ingested from {}", a.input.display())]);
    save_dataset(&ds, &a.out, manifest)
}

fn run_train(a: TrainArgs, manifest: &mut Manifest) -> Result<PathBuf> {
    let seed = StreamSeed::new(a.seed);
    let data = load_dataset(&a.dataset, manifest)?;
    let (train_set, test_set) = match &a.test {
        Some(path) => (data, load_dataset(path, manifest)?),
        None => data.shuffle_split(a.test_fraction, &mut seed.substream(StreamTag::Shuffle, 0))?,
    };
    let mesh = parse_mesh(&a.mesh)?;
    let init: InitStrategy = a.init.parse()?;
    let positions = a.input_modes.as_deref().map(parse_modes).transpose()?;
    let input = make_input_state(train_set.modes, train_set.photons, positions.as_deref())?;
    let params = initialize_parameters(mesh, train_set.modes, init, &mut seed.substream(StreamTag::Init, 0))?;
    let spec = CircuitSpec::new(mesh, train_set.modes, params, input)?;
    let mut cfg = TrainConfig::new(
        a.steps,
        MmdConfig { sigma: a.sigma, mask_batch: a.kbatch, glynn_batch: a.zbatch, data_batch: a.xbatch },
        a.seed,
    );
    cfg.adam.lr = a.lr;
    cfg.adam.beta1 = a.beta1;
    cfg.adam.beta2 = a.beta2;
    cfg.adam.eps = a.eps;
    cfg.eval_every = a.eval_every;
    cfg.frozen_batches = a.frozen_batches;
    if let Some(s) = &a.sigma_schedule {
        cfg.sigma_schedule = parse_sigma_schedule(s)?;
    }
    let held_out = (test_set.len() >= 2).then_some(&test_set);
    let outcome = train(&spec, &train_set, held_out, &cfg)?;

    let trace_path = a.out_dir.join("trace.csv");
    let eval_path = a.out_dir.join("eval.csv");
    let final_path = a.out_dir.join("final.txt");
    let checkpoint_paths: Vec<(PathBuf, &CircuitSpec)> = outcome
        .checkpoints
        .iter()
        .map(|(step, spec)| (a.out_dir.join(format!("checkpoint_{step:06}.txt")), spec))
        .collect();
    for p in [&trace_path, &eval_path, &final_path] {
        manifest.output(p);
    }
    for (p, _) in &checkpoint_paths {
        manifest.output(p);
    }
    let hash = manifest.hash();
    write(&trace_path, &with_hash_comment(&hash, &outcome.trace.to_csv(a.timing)))?;
    let mut evals = String::from("step,sigma,mmd\n");
    for e in &outcome.evaluations {
        writeln!(evals, "{},{},{}", e.step, e.sigma, e.mmd)?;
    }
    write(&eval_path, &with_hash_comment(&hash, &evals))?;
    for (p, spec) in &checkpoint_paths {
        write(p, &spec.to_text())?;
    }
    write(&final_path, &outcome.spec.to_text())?;
    let last = outcome.trace.records.last().expect("at least one step");
    println!("trained {} steps, final sampled loss {} (outputs in {})", a.steps, last.mmd, a.out_dir.display());
    Ok(a.out_dir.join("manifest.json"))
}

fn metrics_csv(hash: &str, rows: &[(String, f64, f64, usize)], extra: &[String]) -> String {
    let mut body = String::new();
    for line in extra {
        writeln!(body, "# {line}").expect("string write");
    }
    body.push_str("label,mean,std,repeats\n");
    for (label, mean, std, repeats) in rows {
        writeln!(body, "{label},{mean},{std},{repeats}").expect("string write");
    }
    with_hash_comment(hash, &body)
}

fn run_eval(a: EvalArgs, manifest: &mut Manifest) -> Result<PathBuf> {
    manifest.input(&a.checkpoint)?;
    let text = std::fs::read_to_string(&a.checkpoint)
        .with_context(|| format!("cannot read {}", a.checkpoint.display()))?;
    let spec = CircuitSpec::from_text(&text)?;
    let test = load_dataset(&a.test, manifest)?;
    let kernel = kernel_for(a.kernel, a.sigma)?;
    let mut rng = StreamSeed::new(a.seed).substream(StreamTag::ModelSamples, 0);
    let (mean, std) = evaluate_model(&spec, &test.records, &kernel, a.repeats, &mut rng)?;
    manifest.output(&a.out);
    write(&a.out, &metrics_csv(&manifest.hash(), &[(a.label.clone(), mean, std, a.repeats)], &[]))?;
    println!("{}: mmd {mean} ± {std} over {} repeats", a.label, a.repeats);
    Ok(manifest_path_for(&a.out))
}

fn run_baseline(a: BaselineArgs, manifest: &mut Manifest) -> Result<PathBuf> {
    let test = load_dataset(&a.test, manifest)?;
    let kernel = kernel_for(a.kernel, a.sigma)?;
    let seed = StreamSeed::new(a.seed);
    let mut extra = Vec::new();
    let (label, mean, std) = match a.kind {
        BaselineKind::Test2test => {
            let (mean, std) = test_to_test_mmd_with(&test.records, &kernel, a.repeats, &mut seed.substream(StreamTag::Baseline, 0))?;
            ("test2test", mean, std)
        }
        BaselineKind::Uniform => {
            let mut rng = seed.substream(StreamTag::Baseline, 0);
            let mut values = Vec::with_capacity(a.repeats);
            for _ in 0..a.repeats {
                let samples = uniform_fixed_hw_sample(test.modes, test.photons, test.len(), &mut rng)?;
                values.push(mmd_unbiased_samples(&samples, &test.records, &kernel)?);
            }
            let (mean, std) = mean_std(&values);
            ("uniform", mean, std)
        }
        BaselineKind::Rbm => {
            let train_path = a.train.as_ref().context("--train is required for the rbm baseline")?;
            let train_set = load_dataset(train_path, manifest)?;
            let cfg = RbmConfig {
                hidden: a.hidden.unwrap_or(train_set.modes),
                epochs: a.epochs,
                learning_rate: a.lr,
                ..RbmConfig::for_modes(train_set.modes)
            };
            let trained = rbm_train(&train_set, &cfg, &mut seed.substream(StreamTag::Baseline, 0))?;
            let mut rng = seed.substream(StreamTag::Baseline, 1);
            let mut values = Vec::with_capacity(a.repeats);
            let mut fallbacks = 0;
            for _ in 0..a.repeats {
                let drawn = rbm_sample(&trained.model, test.len(), test.photons, &mut rng)?;
                fallbacks += drawn.fallbacks;
                values.push(mmd_unbiased_samples(&drawn.samples, &test.records, &kernel)?);
            }
            extra.push(format!("top-n fallbacks {fallbacks}"));
            if let Some(last) = trained.reconstruction_errors.last() {
                extra.push(format!("final reconstruction error {last}"));
            }
            let (mean, std) = mean_std(&values);
            ("rbm", mean, std)
        }
    };
    manifest.output(&a.out);
    write(&a.out, &metrics_csv(&manifest.hash(), &[(label.to_string(), mean, std, a.repeats)], &extra))?;
    println!("{label}: mmd {mean} ± {std} over {} repeats", a.repeats);
    Ok(manifest_path_for(&a.out))
}

fn random_spec(mesh: MeshKind, m: usize, n: usize, seed: StreamSeed, index: u64) -> Result<CircuitSpec> {
    let params = initialize_parameters(mesh, m, InitStrategy::Random, &mut seed.substream(StreamTag::Init, index))?;
    Ok(CircuitSpec::new(mesh, m, params, make_input_state(m, n, None)?)?)
}

fn run_check_grad(a: CheckGradArgs, manifest: &mut Manifest) -> Result<PathBuf> {
    let seed = StreamSeed::new(a.seed);
    let mesh = parse_mesh(&a.mesh)?;
    let spec = random_spec(mesh, a.m, a.n, seed, 0)?;
    let data = uniform_fixed_hw_sample(a.m, a.n, a.xbatch, &mut seed.substream(StreamTag::Generator, 0))?;
    let cfg = MmdConfig { sigma: a.sigma, mask_batch: a.kbatch, glynn_batch: a.zbatch, data_batch: a.xbatch };
    let batches = draw_batches(&cfg, a.n, &data, seed, 0)?;
    let err = finite_difference_check(&spec, &batches, a.h)?;
    println!("max relative error: {err:e}");
    let out = a.out;
    manifest.output(&out);
    let csv = format!("mesh,m,n,h,max_relative_error\n{},{},{},{},{}\n", mesh, a.m, a.n, a.h, err);
    write(&out, &with_hash_comment(&manifest.hash(), &csv))?;
    if !(err < a.tolerance) {
        bail!("max relative error {err:e} is not below {:e}", a.tolerance);
    }
    Ok(manifest_path_for(&out))
}

fn run_oracle(a: OracleArgs, manifest: &mut Manifest) -> Result<PathBuf> {
    let seed = StreamSeed::new(a.seed);
    let mod2 = Kernel::mod2(a.sigma)?;
    let gauss = Kernel::gaussian(a.sigma)?;
    let mut csv = String::from(
        "circuit,lo_mod2,brute_mod2,residual_mod2,lo_gaussian_cf,brute_gaussian_cf,residual_gaussian_cf,collision_mass\n",
    );
    let mut worst = 0.0f64;
    for c in 0..a.circuits {
        let spec = random_spec(MeshKind::QrHaar, a.m, a.n, seed, c as u64)?;
        let u = spec.unitary()?;
        let dist = output_distribution(&u, &spec.input_state)?;
        let p = dist.probabilities();
        let brute_mod2 = kernel_expectation(dist.domain(), p, p, &mod2)?;
        let lo_mod2 = mmd_lo_exact(&u, &spec.input_state, a.sigma, LoKernelMode::Mod2)?;
        let cf: Vec<f64> =
            dist.domain().iter().zip(p).map(|(x, &q)| if x.is_collision_free() { q } else { 0.0 }).collect();
        let brute_cf = kernel_expectation(dist.domain(), &cf, &cf, &gauss)?;
        let lo_cf = mmd_lo_exact(&u, &spec.input_state, a.sigma, LoKernelMode::GaussianCollisionFree)?;
        let (r1, r2) = ((lo_mod2.value - brute_mod2).abs(), (lo_cf.value - brute_cf).abs());
        worst = worst.max(r1).max(r2);
        writeln!(
            csv,
            "{c},{},{brute_mod2},{r1},{},{brute_cf},{r2},{}",
            lo_mod2.value,
            lo_cf.value,
            lo_cf.collision_mass.unwrap_or(0.0)
        )?;
    }
    let out = a.out.unwrap_or_else(|| PathBuf::from("oracle.csv"));
    manifest.output(&out);
    write(&out, &with_hash_comment(&manifest.hash(), &csv))?;
    println!("largest residual over {} circuits: {worst:e}", a.circuits);
    if !(worst < a.tolerance) {
        bail!("residual {worst:e} is not below {:e}", a.tolerance);
    }
    Ok(manifest_path_for(&out))
}
