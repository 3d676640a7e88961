//! Interferometer meshes as flat programs of two-mode and single-mode elements.
//!
//! A program lists elements in the order light meets them; the composed
//! unitary is `U = E_L ⋯ E_2 E_1`. The same program drives the forward
//! composition and the reverse pass in [`crate::grad`].

use std::fmt;
use std::str::FromStr;

use super::mzi::{beam_splitter_entries, mzi_entries};
use crate::error::{Error, Result};
use crate::numeric::matrix::{ComplexMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeshKind {
    ClementsRectangular,
    Butterfly,
    ThreeMzi,
    QrHaar,
}

impl MeshKind {
    pub const ALL: [MeshKind; 4] =
        [MeshKind::ClementsRectangular, MeshKind::Butterfly, MeshKind::ThreeMzi, MeshKind::QrHaar];

    pub fn name(self) -> &'static str {
        match self {
            MeshKind::ClementsRectangular => "clements_rectangular",
            MeshKind::Butterfly => "butterfly",
            MeshKind::ThreeMzi => "three_mzi",
            MeshKind::QrHaar => "qr_haar",
        }
    }
}

impl fmt::Display for MeshKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeshKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clements_rectangular" | "clements" => Ok(MeshKind::ClementsRectangular),
            "butterfly" => Ok(MeshKind::Butterfly),
            "three_mzi" | "3mzi" => Ok(MeshKind::ThreeMzi),
            "qr_haar" | "haar" => Ok(MeshKind::QrHaar),
            other => Err(Error::InvalidArgument(format!("unknown mesh kind '{other}'"))),
        }
    }
}

/// Number of real parameters of a mesh on `m` modes.
pub fn parameter_count(kind: MeshKind, m: usize) -> Result<usize> {
    check_modes(kind, m)?;
    Ok(match kind {
        MeshKind::ClementsRectangular | MeshKind::ThreeMzi => m * m,
        MeshKind::Butterfly => {
            let stages = m.trailing_zeros() as usize;
            stages * m + m
        }
        MeshKind::QrHaar => 2 * m * m,
    })
}

fn check_modes(kind: MeshKind, m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidArgument("a mesh needs at least one mode".into()));
    }
    if kind == MeshKind::Butterfly && !m.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("butterfly mesh needs a power-of-two mode count, got {m}")));
    }
    Ok(())
}

/// Role of a parameter, used to pick initialization ranges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum ParamRole {
    /// External or output phase, natural range [0, 2π).
    External,
    /// Internal splitting phase, natural range [0, π].
    Internal,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Element {
    Mzi { top: usize, bottom: usize, theta: usize, theta_prime: usize },
    Phase { mode: usize, param: usize },
    Splitter { top: usize, bottom: usize },
    /// Amplitude in mode `i` moves to mode `perm[i]`.
    Permute(Vec<usize>),
}

#[derive(Clone, Debug)]
pub(crate) struct MeshProgram {
    pub modes: usize,
    pub elements: Vec<Element>,
    pub roles: Vec<ParamRole>,
}

impl MeshProgram {
    #[cfg(test)]
    pub fn param_count(&self) -> usize {
        self.roles.len()
    }

    fn mzi(&mut self, top: usize, bottom: usize) {
        let theta = self.roles.len();
        self.roles.push(ParamRole::External);
        self.roles.push(ParamRole::Internal);
        self.elements.push(Element::Mzi { top, bottom, theta, theta_prime: theta + 1 });
    }

    fn phase(&mut self, mode: usize, role: ParamRole) {
        let param = self.roles.len();
        self.roles.push(role);
        self.elements.push(Element::Phase { mode, param });
    }

    fn output_phases(&mut self) {
        for mode in 0..self.modes {
            self.phase(mode, ParamRole::External);
        }
    }
}

/// Program for every mesh kind except `QrHaar`, which is not a mesh.
pub(crate) fn mesh_program(kind: MeshKind, m: usize) -> Result<MeshProgram> {
    check_modes(kind, m)?;
    let mut p = MeshProgram { modes: m, elements: Vec::new(), roles: Vec::new() };
    match kind {
        MeshKind::ClementsRectangular => {
            for (top, bottom) in brick_pairs(m) {
                p.mzi(top, bottom);
            }
        }
        MeshKind::ThreeMzi => {
            // B·P(θ)·B·P(φ)·B per block; light meets the rightmost factor first
            for (top, bottom) in brick_pairs(m) {
                let theta = p.roles.len();
                p.roles.push(ParamRole::Internal);
                p.roles.push(ParamRole::External);
                let phi = theta + 1;
                p.elements.push(Element::Splitter { top, bottom });
                p.elements.push(Element::Phase { mode: top, param: phi });
                p.elements.push(Element::Splitter { top, bottom });
                p.elements.push(Element::Phase { mode: top, param: theta });
                p.elements.push(Element::Splitter { top, bottom });
            }
        }
        MeshKind::Butterfly => {
            let stages = m.trailing_zeros() as usize;
            let shuffle: Vec<usize> =
                (0..m).map(|i| if i < m / 2 { 2 * i } else { 2 * (i - m / 2) + 1 }).collect();
            for stage in 0..stages {
                for j in 0..m / 2 {
                    p.mzi(2 * j, 2 * j + 1);
                }
                if stage + 1 < stages {
                    p.elements.push(Element::Permute(shuffle.clone()));
                }
            }
            // undo the accumulated shuffles so that zero phases give the identity
            let mut net: Vec<usize> = (0..m).collect();
            for _ in 1..stages {
                net = net.iter().map(|&i| shuffle[i]).collect();
            }
            let mut inverse = vec![0; m];
            for (i, &j) in net.iter().enumerate() {
                inverse[j] = i;
            }
            if stages > 1 {
                p.elements.push(Element::Permute(inverse));
            }
        }
        MeshKind::QrHaar => {
            return Err(Error::InvalidArgument("qr_haar is a parametrization, not a mesh".into()))
        }
    }
    p.output_phases();
    Ok(p)
}

/// MZI positions of the rectangular layout: m columns, even columns couple
/// (0,1),(2,3),…, odd columns (1,2),(3,4),….
fn brick_pairs(m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(m * m.saturating_sub(1) / 2);
    for layer in 0..m {
        let mut top = layer % 2;
        while top + 1 < m {
            out.push((top, top + 1));
            top += 2;
        }
    }
    out
}

/// Element transfer matrix on its two modes, row-major.
#[inline]
pub(crate) fn two_mode_entries(el: &Element, params: &[f64]) -> Option<(usize, usize, [C64; 4])> {
    match *el {
        Element::Mzi { top, bottom, theta, theta_prime } => {
            Some((top, bottom, mzi_entries(params[theta], params[theta_prime])))
        }
        Element::Splitter { top, bottom } => Some((top, bottom, beam_splitter_entries())),
        _ => None,
    }
}

#[inline]
pub(crate) fn apply_two_mode(mat: &mut ComplexMatrix, top: usize, bottom: usize, t: &[C64; 4]) {
    let cols = mat.cols();
    let data = mat.as_mut_slice();
    for c in 0..cols {
        let x = data[top * cols + c];
        let y = data[bottom * cols + c];
        data[top * cols + c] = t[0] * x + t[1] * y;
        data[bottom * cols + c] = t[2] * x + t[3] * y;
    }
}

#[inline]
pub(crate) fn scale_row(mat: &mut ComplexMatrix, row: usize, z: C64) {
    let cols = mat.cols();
    for v in &mut mat.as_mut_slice()[row * cols..(row + 1) * cols] {
        *v *= z;
    }
}

pub(crate) fn permute_rows(mat: &ComplexMatrix, perm: &[usize]) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(mat.rows(), mat.cols());
    for (i, &p) in perm.iter().enumerate() {
        for c in 0..mat.cols() {
            out[(p, c)] = mat[(i, c)];
        }
    }
    out
}

pub(crate) fn apply_element(mat: &mut ComplexMatrix, el: &Element, params: &[f64]) {
    if let Some((top, bottom, t)) = two_mode_entries(el, params) {
        apply_two_mode(mat, top, bottom, &t);
        return;
    }
    match el {
        Element::Phase { mode, param } => scale_row(mat, *mode, C64::from_polar(1.0, params[*param])),
        Element::Permute(perm) => *mat = permute_rows(mat, perm),
        _ => unreachable!(),
    }
}

/// Applies the whole program to the rows of `mat` (any column count).
pub(crate) fn run_program(program: &MeshProgram, params: &[f64], mat: &mut ComplexMatrix) {
    for el in &program.elements {
        apply_element(mat, el, params);
    }
}
