use std::fmt::Write as _;

use super::mesh::{mesh_program, parameter_count, run_program, MeshKind};
use super::qr::{gram_schmidt, params_to_matrix};
use crate::error::{Error, Result};
use crate::numeric::{ComplexMatrix, OccupationVector};

/// Mesh kind, parameters and input state: everything that fixes U_θ and |ψ_θ⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitSpec {
    pub mesh: MeshKind,
    pub modes: usize,
    pub params: Vec<f64>,
    pub input_state: OccupationVector,
}

impl CircuitSpec {
    pub fn new(mesh: MeshKind, modes: usize, params: Vec<f64>, input_state: OccupationVector) -> Result<Self> {
        let spec = CircuitSpec { mesh, modes, params, input_state };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let expected = parameter_count(self.mesh, self.modes)?;
        if self.params.len() != expected {
            return Err(Error::Shape(format!(
                "{} mesh on {} modes takes {expected} parameters, got {}",
                self.mesh,
                self.modes,
                self.params.len()
            )));
        }
        if let Some(i) = self.params.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(format!("parameter {i} is not finite")));
        }
        if self.input_state.modes() != self.modes {
            return Err(Error::Shape(format!(
                "input state has {} modes, circuit has {}",
                self.input_state.modes(),
                self.modes
            )));
        }
        if !self.input_state.is_collision_free() {
            return Err(Error::InvalidArgument("input state has more than one photon in a mode".into()));
        }
        if self.input_state.total() == 0 {
            return Err(Error::InvalidArgument("input state has no photons".into()));
        }
        Ok(())
    }

    pub fn photons(&self) -> usize {
        self.input_state.total()
    }

    pub fn unitary(&self) -> Result<ComplexMatrix> {
        compose_mesh(self)
    }

    /// Line-oriented text form used for checkpoints.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "mesh {}", self.mesh).unwrap();
        writeln!(s, "modes {}", self.modes).unwrap();
        writeln!(s, "input {}", self.input_state).unwrap();
        s.push_str("params");
        for p in &self.params {
            write!(s, " {p:?}").unwrap();
        }
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut mesh = None;
        let mut modes = None;
        let mut input = None;
        let mut params = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let perr = |reason: String| Error::Parse { line: line_no, reason };
            match key {
                "mesh" => mesh = Some(rest.trim().parse::<MeshKind>().map_err(|e| perr(e.to_string()))?),
                "modes" => {
                    modes = Some(rest.trim().parse::<usize>().map_err(|e| perr(format!("bad mode count: {e}")))?)
                }
                "input" => {
                    input = Some(OccupationVector::from_digits(rest.trim()).map_err(|e| perr(e.to_string()))?)
                }
                "params" => {
                    params = Some(
                        rest.split_whitespace()
                            .map(|t| t.parse::<f64>().map_err(|e| perr(format!("bad parameter '{t}': {e}"))))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                other => return Err(perr(format!("unknown key '{other}'"))),
            }
        }
        let missing = |k: &str| Error::Parse { line: 0, reason: format!("missing '{k}' line") };
        CircuitSpec::new(
            mesh.ok_or_else(|| missing("mesh"))?,
            modes.ok_or_else(|| missing("modes"))?,
            params.unwrap_or_default(),
            input.ok_or_else(|| missing("input"))?,
        )
    }
}

/// U_θ for a circuit spec.
pub fn compose_mesh(spec: &CircuitSpec) -> Result<ComplexMatrix> {
    spec.validate()?;
    compose_parameters(spec.mesh, spec.modes, &spec.params)
}

pub(crate) fn compose_parameters(mesh: MeshKind, m: usize, params: &[f64]) -> Result<ComplexMatrix> {
    let expected = parameter_count(mesh, m)?;
    if params.len() != expected {
        return Err(Error::Shape(format!("expected {expected} parameters, got {}", params.len())));
    }
    match mesh {
        MeshKind::QrHaar => Ok(gram_schmidt(&params_to_matrix(params, m))?.0),
        kind => {
            let program = mesh_program(kind, m)?;
            let mut u = ComplexMatrix::identity(m);
            run_program(&program, params, &mut u);
            Ok(u)
        }
    }
}

/// Input state with one photon in each of `n` modes: modes `0..n` by
/// default, otherwise the given 0-based positions.
pub fn make_input_state(m: usize, n: usize, positions: Option<&[usize]>) -> Result<OccupationVector> {
    if n == 0 {
        return Err(Error::InvalidArgument("at least one photon is required".into()));
    }
    if n > m {
        return Err(Error::InvalidArgument(format!("{n} photons do not fit in {m} modes with one per mode")));
    }
    match positions {
        None => OccupationVector::from_positions(m, &(0..n).collect::<Vec<_>>()),
        Some(pos) => {
            if pos.len() != n {
                return Err(Error::InvalidArgument(format!("{} positions given for {n} photons", pos.len())));
            }
            let v = OccupationVector::from_positions(m, pos)?;
            if !v.is_collision_free() {
                return Err(Error::InvalidArgument("duplicate input positions".into()));
            }
            Ok(v)
        }
    }
}
