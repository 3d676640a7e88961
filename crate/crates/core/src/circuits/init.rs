use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::mesh::{mesh_program, parameter_count, run_program, MeshKind, ParamRole};
use super::spec::compose_parameters;
use crate::error::{Error, Result};
use crate::numeric::ComplexMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitStrategy {
    /// Identity point of the mesh plus i.i.d. uniform noise in [−ε, ε].
    IdentityPerturbed(f64),
    /// Every parameter drawn over its natural range.
    Random,
}

impl FromStr for InitStrategy {
    type Err = Error;

    /// `identity:<eps>`, `identity` (ε = 0) or `random`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some(("identity", eps)) => {
                let eps: f64 =
                    eps.parse().map_err(|_| Error::InvalidArgument(format!("bad perturbation '{eps}'")))?;
                if !(eps >= 0.0) {
                    return Err(Error::InvalidArgument("perturbation must be non-negative".into()));
                }
                Ok(InitStrategy::IdentityPerturbed(eps))
            }
            None if s == "identity" => Ok(InitStrategy::IdentityPerturbed(0.0)),
            None if s == "random" => Ok(InitStrategy::Random),
            _ => Err(Error::InvalidArgument(format!("unknown init strategy '{s}'"))),
        }
    }
}

/// The parameter vector at which the mesh implements the identity.
///
/// For three_mzi the blocks sit at θ = φ = π/2, where each block is diagonal;
/// the output phases cancel the residual per-mode phase.
pub fn identity_parameters(mesh: MeshKind, m: usize) -> Result<Vec<f64>> {
    let count = parameter_count(mesh, m)?;
    match mesh {
        MeshKind::ClementsRectangular | MeshKind::Butterfly => Ok(vec![0.0; count]),
        MeshKind::QrHaar => {
            let mut p = vec![0.0; count];
            for i in 0..m {
                p[i * m + i] = 1.0;
            }
            Ok(p)
        }
        MeshKind::ThreeMzi => {
            let program = mesh_program(mesh, m)?;
            let mut p = vec![FRAC_PI_2; count];
            let out_start = count - m;
            p[out_start..].iter_mut().for_each(|x| *x = 0.0);
            let mut u = ComplexMatrix::identity(m);
            run_program(&program, &p, &mut u);
            for i in 0..m {
                p[out_start + i] = -u[(i, i)].arg();
            }
            Ok(p)
        }
    }
}

pub fn initialize_parameters(
    mesh: MeshKind,
    m: usize,
    strategy: InitStrategy,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    match strategy {
        InitStrategy::IdentityPerturbed(eps) => {
            if !(eps >= 0.0) {
                return Err(Error::InvalidArgument("perturbation must be non-negative".into()));
            }
            let mut p = identity_parameters(mesh, m)?;
            if eps > 0.0 {
                for x in &mut p {
                    *x += rng.random_range(-eps..=eps);
                }
            }
            Ok(p)
        }
        InitStrategy::Random => match mesh {
            MeshKind::QrHaar => {
                Ok((0..parameter_count(mesh, m)?).map(|_| StandardNormal.sample(rng)).collect())
            }
            kind => {
                let program = mesh_program(kind, m)?;
                Ok(program
                    .roles
                    .iter()
                    .map(|role| match role {
                        ParamRole::External => rng.random_range(0.0..TAU),
                        ParamRole::Internal => rng.random_range(0.0..=PI),
                    })
                    .collect())
            }
        },
    }
}

/// Per-entry means of |u_ij|² over `draws` qr_haar unitaries with standard
/// Gaussian parameters. Haar measure gives 1/m for every entry.
pub fn qr_haar_statistics_probe(m: usize, draws: usize, rng: &mut impl Rng) -> Result<Vec<Vec<f64>>> {
    if draws == 0 {
        return Err(Error::InvalidArgument("at least one draw is required".into()));
    }
    let mut acc = vec![vec![0.0; m]; m];
    for _ in 0..draws {
        let params = initialize_parameters(MeshKind::QrHaar, m, InitStrategy::Random, rng)?;
        let u = compose_parameters(MeshKind::QrHaar, m, &params)?;
        for (r, row) in acc.iter_mut().enumerate() {
            for (c, a) in row.iter_mut().enumerate() {
                *a += u[(r, c)].norm_sqr();
            }
        }
    }
    for row in &mut acc {
        for a in row.iter_mut() {
            *a /= draws as f64;
        }
    }
    Ok(acc)
}
