//! Exact boson sampling at desk scale.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::circuits::{compose_mesh, make_input_state, parameter_count, CircuitSpec, MeshKind};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numeric::permanent::ryser;
use crate::numeric::{build_submatrix, fock_space_size, ComplexMatrix, OccupationVector, DEFAULT_ORACLE_CAP};
use crate::numeric::fock::enumerate_fock_space;
use crate::rng::{StreamSeed, StreamTag};

/// Largest Fock space enumerated by default.
pub const DEFAULT_STATE_CAP: usize = 200_000;

/// Rejection attempts allowed when filtering to collision-free samples.
pub const COLLISION_FREE_RETRY_CAP: usize = 1_000_000;

/// Exact output probabilities over Φ_{m,n}.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputDistribution {
    domain: Vec<OccupationVector>,
    probabilities: Vec<f64>,
}

impl OutputDistribution {
    pub fn new(domain: Vec<OccupationVector>, probabilities: Vec<f64>) -> Result<Self> {
        if domain.len() != probabilities.len() {
            return Err(Error::Shape("domain and probabilities differ in length".into()));
        }
        if probabilities.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidArgument("negative or NaN probability".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Unnormalized(total));
        }
        Ok(OutputDistribution { domain, probabilities })
    }

    pub fn domain(&self) -> &[OccupationVector] {
        &self.domain
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability_of(&self, x: &OccupationVector) -> f64 {
        self.domain.iter().position(|d| d == x).map_or(0.0, |i| self.probabilities[i])
    }

    /// Total probability of outcomes with some mode holding two or more photons.
    pub fn collision_mass(&self) -> f64 {
        self.domain
            .iter()
            .zip(&self.probabilities)
            .filter(|(x, _)| !x.is_collision_free())
            .map(|(_, p)| p)
            .sum()
    }
}

/// |Perm(U_{s_in,s_out})|² / (∏ s_in! ∏ s_out!).
pub fn transition_probability(u: &ComplexMatrix, s_in: &OccupationVector, s_out: &OccupationVector) -> Result<f64> {
    let sub = build_submatrix(u, s_in, s_out)?;
    if sub.rows() > DEFAULT_ORACLE_CAP {
        return Err(Error::OracleCap { dim: sub.rows(), cap: DEFAULT_ORACLE_CAP });
    }
    Ok(ryser(&sub).norm_sqr() / (s_in.factorial_product() * s_out.factorial_product()))
}

pub fn output_distribution(u: &ComplexMatrix, s_in: &OccupationVector) -> Result<OutputDistribution> {
    output_distribution_capped(u, s_in, DEFAULT_STATE_CAP)
}

pub fn output_distribution_capped(
    u: &ComplexMatrix,
    s_in: &OccupationVector,
    cap: usize,
) -> Result<OutputDistribution> {
    if !u.is_square() || u.rows() != s_in.modes() {
        return Err(Error::Shape(format!(
            "{}x{} unitary for a {}-mode input",
            u.rows(),
            u.cols(),
            s_in.modes()
        )));
    }
    let defect = u.unitarity_defect();
    if defect > 1e-8 {
        return Err(Error::InvalidArgument(format!("matrix is not unitary (‖U†U − I‖ = {defect:e})")));
    }
    let (m, n) = (s_in.modes(), s_in.total());
    if n > DEFAULT_ORACLE_CAP {
        return Err(Error::OracleCap { dim: n, cap: DEFAULT_ORACLE_CAP });
    }
    let size = fock_space_size(m, n, false);
    if size > cap {
        return Err(Error::StateSpaceCap { size, cap });
    }
    let domain = enumerate_fock_space(m, n, false);
    let probabilities = domain
        .par_iter()
        .map(|s_out| transition_probability(u, s_in, s_out))
        .collect::<Result<Vec<_>>>()?;
    OutputDistribution::new(domain, probabilities)
}

/// I.i.d. inverse-CDF draws.
pub fn draw_samples(dist: &OutputDistribution, count: usize, rng: &mut impl Rng) -> Vec<OccupationVector> {
    let mut cdf = Vec::with_capacity(dist.probabilities.len());
    let mut acc = 0.0;
    for &p in &dist.probabilities {
        acc += p;
        cdf.push(acc);
    }
    (0..count)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            let i = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            dist.domain[i].clone()
        })
        .collect()
}

/// Reproducibility record of a generated dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorRecord {
    pub seed: u64,
    pub modes: usize,
    pub photons: usize,
    pub unitary_checksum: String,
    pub collision_free: bool,
}

impl GeneratorRecord {
    pub fn to_lines(&self) -> Vec<String> {
        vec![
            "generator: boson sampling, qr_haar unitary with standard Gaussian parameters".into(),
            format!("seed: {}", self.seed),
            format!("m: {} n: {}", self.modes, self.photons),
            format!("unitary sha256: {}", self.unitary_checksum),
            format!("collision_free: {}", self.collision_free),
        ]
    }
}

/// SHA-256 over the little-endian bytes of (re, im) of every entry.
pub fn unitary_checksum(u: &ComplexMatrix) -> String {
    let mut h = Sha256::new();
    for z in u.as_slice() {
        h.update(z.re.to_le_bytes());
        h.update(z.im.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Samples from a Haar-random interferometer with input |1…10…0⟩.
pub fn generate_boson_dataset(
    m: usize,
    n: usize,
    size: usize,
    seed: u64,
    collision_free: bool,
) -> Result<(Dataset, GeneratorRecord)> {
    let seeds = StreamSeed::new(seed);
    let mut prng = seeds.substream(StreamTag::Generator, 0);
    let params: Vec<f64> =
        (0..parameter_count(MeshKind::QrHaar, m)?).map(|_| StandardNormal.sample(&mut prng)).collect();
    let spec = CircuitSpec::new(MeshKind::QrHaar, m, params, make_input_state(m, n, None)?)?;
    let u = compose_mesh(&spec)?;
    let dist = output_distribution(&u, &spec.input_state)?;
    let mut srng = seeds.substream(StreamTag::Generator, 1);
    let records = if collision_free {
        let mut out = Vec::with_capacity(size);
        let mut attempts = 0usize;
        while out.len() < size {
            attempts += 1;
            if attempts > COLLISION_FREE_RETRY_CAP {
                return Err(Error::InvalidArgument(format!(
                    "collision-free filtering exceeded {COLLISION_FREE_RETRY_CAP} attempts"
                )));
            }
            let x = draw_samples(&dist, 1, &mut srng).pop().expect("one sample");
            if x.is_collision_free() {
                out.push(x);
            }
        }
        out
    } else {
        draw_samples(&dist, size, &mut srng)
    };
    let record = GeneratorRecord {
        seed,
        modes: m,
        photons: n,
        unitary_checksum: unitary_checksum(&u),
        collision_free,
    };
    let collisions = records.iter().any(|r| !r.is_collision_free());
    let ds = Dataset::new(m, n, collisions, records)?.with_provenance(record.to_lines());
    Ok((ds, record))
}
