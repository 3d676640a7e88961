//! Adam training of a circuit against a dataset, with bandwidth schedules,
//! held-out evaluation and checkpoints.

mod adam;

use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;

use crate::boson::{draw_samples, output_distribution};
use crate::circuits::{initialize_parameters, CircuitSpec, InitStrategy};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::grad::mmd_gradient;
use crate::mmd::{draw_batches, mmd_unbiased_samples, Kernel, MmdConfig};
use crate::numeric::OccupationVector;
use crate::rng::{StreamSeed, StreamTag};

pub use adam::{adam_step, AdamConfig, AdamState};

/// Largest data minibatch used by default.
pub const DEFAULT_DATA_BATCH: usize = 256;

/// Run `steps` optimizer steps at bandwidth `sigma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaStage {
    pub sigma: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub steps: usize,
    pub adam: AdamConfig,
    /// Batch sizes; its `sigma` is used when the schedule is empty.
    pub mmd: MmdConfig,
    pub sigma_schedule: Vec<SigmaStage>,
    pub seed: u64,
    /// Evaluate and checkpoint every this many steps (0 disables).
    pub eval_every: usize,
    /// Reuse the step-0 batches on every step.
    pub frozen_batches: bool,
}

impl TrainConfig {
    pub fn new(steps: usize, mmd: MmdConfig, seed: u64) -> Self {
        TrainConfig {
            steps,
            adam: AdamConfig::default(),
            mmd,
            sigma_schedule: Vec::new(),
            seed,
            eval_every: 0,
            frozen_batches: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidArgument("at least one step is required".into()));
        }
        self.mmd.validate()?;
        if !self.sigma_schedule.is_empty() {
            let total: usize = self.sigma_schedule.iter().map(|s| s.steps).sum();
            if total != self.steps {
                return Err(Error::InvalidArgument(format!(
                    "schedule covers {total} steps but {} were requested",
                    self.steps
                )));
            }
            for stage in &self.sigma_schedule {
                Kernel::gaussian(stage.sigma)?;
            }
        }
        Ok(())
    }

    /// Bandwidth in force at 0-based `step`.
    pub fn sigma_at(&self, step: usize) -> f64 {
        let mut end = 0;
        for stage in &self.sigma_schedule {
            end += stage.steps;
            if step < end {
                return stage.sigma;
            }
        }
        self.mmd.sigma
    }
}

/// Parses `5:100,3:100,1:300` into stages.
pub fn parse_sigma_schedule(text: &str) -> Result<Vec<SigmaStage>> {
    text.split(',')
        .map(|part| {
            let bad = || Error::InvalidArgument(format!("bad schedule entry '{part}', expected sigma:steps"));
            let (s, n) = part.trim().split_once(':').ok_or_else(bad)?;
            Ok(SigmaStage { sigma: s.parse().map_err(|_| bad())?, steps: n.parse().map_err(|_| bad())? })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    /// 1-based.
    pub step: usize,
    pub sigma: f64,
    /// Sampled loss before the update of this step.
    pub mmd: f64,
    pub grad_norm: f64,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LossTrace {
    pub records: Vec<StepRecord>,
}

impl LossTrace {
    pub fn losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.mmd).collect()
    }

    /// Equality ignoring wall time.
    pub fn same_values(&self, other: &LossTrace) -> bool {
        self.records.len() == other.records.len()
            && self.records.iter().zip(&other.records).all(|(a, b)| {
                a.step == b.step
                    && a.sigma.to_bits() == b.sigma.to_bits()
                    && a.mmd.to_bits() == b.mmd.to_bits()
                    && a.grad_norm.to_bits() == b.grad_norm.to_bits()
            })
    }

    /// CSV with header `step,sigma,mmd,grad_norm,wall_ms`. Wall time is
    /// written as 0 unless `timing` is set, keeping the file reproducible.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = String::from("step,sigma,mmd,grad_norm,wall_ms\n");
        for r in &self.records {
            let wall = if timing { r.wall_ms } else { 0.0 };
            let _ = writeln!(out, "{},{},{},{},{}", r.step, r.sigma, r.mmd, r.grad_norm, wall);
        }
        out
    }
}

/// Held-out evaluation made during training.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalRecord {
    pub step: usize,
    pub sigma: f64,
    pub mmd: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub spec: CircuitSpec,
    pub trace: LossTrace,
    pub evaluations: Vec<EvalRecord>,
    /// (step, parameters) every `eval_every` steps and at the end.
    pub checkpoints: Vec<(usize, CircuitSpec)>,
}

fn check_compatible(spec: &CircuitSpec, ds: &Dataset, what: &str) -> Result<()> {
    if ds.modes != spec.modes || ds.photons != spec.photons() {
        return Err(Error::Shape(format!(
            "{what} has m = {}, n = {} but the circuit has m = {}, n = {}",
            ds.modes,
            ds.photons,
            spec.modes,
            spec.photons()
        )));
    }
    if ds.len() < 2 {
        return Err(Error::InvalidArgument(format!("{what} needs at least 2 records")));
    }
    Ok(())
}

/// Runs `cfg.steps` Adam steps on the sampled MMD² loss. Masks, sign vectors
/// and the data minibatch are redrawn every step from substreams of
/// `cfg.seed`, so the run is a deterministic function of its inputs.
pub fn train(spec: &CircuitSpec, train_set: &Dataset, test_set: Option<&Dataset>, cfg: &TrainConfig) -> Result<TrainOutcome> {
    spec.validate()?;
    cfg.validate()?;
    check_compatible(spec, train_set, "training set")?;
    if let Some(t) = test_set {
        check_compatible(spec, t, "test set")?;
    }
    let seed = StreamSeed::new(cfg.seed);
    let mut current = spec.clone();
    let mut state = AdamState::new(current.params.len());
    let mut trace = LossTrace::default();
    let mut evaluations = Vec::new();
    let mut checkpoints = Vec::new();
    for step in 0..cfg.steps {
        let started = Instant::now();
        let sigma = cfg.sigma_at(step);
        let mmd = MmdConfig { sigma, ..cfg.mmd };
        let index = if cfg.frozen_batches { 0 } else { step as u64 };
        let batches = draw_batches(&mmd, current.photons(), &train_set.records, seed, index)?;
        let (loss, grad) = mmd_gradient(&current, &batches)?;
        adam_step(&mut current.params, &grad.values, &mut state, &cfg.adam)?;
        trace.records.push(StepRecord {
            step: step + 1,
            sigma,
            mmd: loss,
            grad_norm: grad.norm(),
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });
        let done = step + 1;
        if cfg.eval_every > 0 && (done % cfg.eval_every == 0 || done == cfg.steps) {
            if let Some(test) = test_set {
                let mut rng = seed.substream(StreamTag::ModelSamples, done as u64);
                let value = held_out_mmd(&current, &test.records, &Kernel::mod2(sigma)?, &mut rng)?;
                evaluations.push(EvalRecord { step: done, sigma, mmd: value });
            }
            checkpoints.push((done, current.clone()));
        }
    }
    if checkpoints.last().map(|(s, _)| *s) != Some(cfg.steps) {
        checkpoints.push((cfg.steps, current.clone()));
    }
    Ok(TrainOutcome { spec: current, trace, evaluations, checkpoints })
}

fn held_out_mmd(spec: &CircuitSpec, test: &[OccupationVector], kernel: &Kernel, rng: &mut impl Rng) -> Result<f64> {
    let dist = output_distribution(&spec.unitary()?, &spec.input_state)?;
    let samples = draw_samples(&dist, test.len(), rng);
    mmd_unbiased_samples(&samples, test, kernel)
}

/// Mean and sample standard deviation over `repeats` evaluations, each
/// comparing |test_set| fresh model samples with the test set.
pub fn evaluate_model(
    spec: &CircuitSpec,
    test_set: &[OccupationVector],
    kernel: &Kernel,
    repeats: usize,
    rng: &mut impl Rng,
) -> Result<(f64, f64)> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be positive".into()));
    }
    let dist = output_distribution(&spec.unitary()?, &spec.input_state)?;
    let values = (0..repeats)
        .map(|_| mmd_unbiased_samples(&draw_samples(&dist, test_set.len(), rng), test_set, kernel))
        .collect::<Result<Vec<f64>>>()?;
    Ok(crate::baselines::mean_std(&values))
}

/// One point of a hyperparameter grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub lr: f64,
    pub init_epsilon: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug)]
pub struct GridResult {
    pub point: GridPoint,
    pub final_loss: f64,
    /// Test-set evaluation of the final circuit (mean, std).
    pub evaluation: (f64, f64),
}

/// Trains once per grid point from `identity_perturbed(init_epsilon)` and
/// evaluates the result on the test set with the mod-2 kernel.
pub fn run_grid(
    base: &CircuitSpec,
    train_set: &Dataset,
    test_set: &Dataset,
    cfg: &TrainConfig,
    points: &[GridPoint],
    repeats: usize,
) -> Result<Vec<GridResult>> {
    let seed = StreamSeed::new(cfg.seed);
    points
        .iter()
        .enumerate()
        .map(|(i, &point)| {
            let mut rng = seed.substream(StreamTag::Init, i as u64);
            let params =
                initialize_parameters(base.mesh, base.modes, InitStrategy::IdentityPerturbed(point.init_epsilon), &mut rng)?;
            let spec = CircuitSpec { params, ..base.clone() };
            let run_cfg = TrainConfig {
                adam: AdamConfig { lr: point.lr, ..cfg.adam },
                mmd: MmdConfig { sigma: point.sigma, ..cfg.mmd },
                sigma_schedule: Vec::new(),
                ..cfg.clone()
            };
            let outcome = train(&spec, train_set, None, &run_cfg)?;
            let mut erng = seed.substream(StreamTag::ModelSamples, u64::MAX - i as u64);
            let evaluation = evaluate_model(&outcome.spec, &test_set.records, &Kernel::mod2(point.sigma)?, repeats, &mut erng)?;
            let final_loss = outcome.trace.records.last().map_or(f64::NAN, |r| r.mmd);
            Ok(GridResult { point, final_loss, evaluation })
        })
        .collect()
}
