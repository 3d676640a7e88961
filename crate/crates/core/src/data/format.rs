//! Dataset text format.
//!
//! ```text
//! # free-text provenance lines
//! 6 2 0
//! 110000
//! 010100
//! ```
//!
//! The header is `m n collision_flag`; each record is a digit string of
//! length m summing to n. Digits above 1 require the collision flag.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::OccupationVector;

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub modes: usize,
    pub photons: usize,
    pub collisions: bool,
    pub records: Vec<OccupationVector>,
    pub provenance: Vec<String>,
}

impl Dataset {
    pub fn new(modes: usize, photons: usize, collisions: bool, records: Vec<OccupationVector>) -> Result<Self> {
        let ds = Dataset { modes, photons, collisions, records, provenance: Vec::new() };
        ds.validate()?;
        Ok(ds)
    }

    pub fn with_provenance(mut self, lines: impl IntoIterator<Item = String>) -> Self {
        self.provenance.extend(lines);
        self
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, r) in self.records.iter().enumerate() {
            check_record(r, self.modes, self.photons, self.collisions)
                .map_err(|reason| Error::InvalidArgument(format!("record {i}: {reason}")))?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> Result<String> {
        self.validate()?;
        let mut s = String::new();
        for line in &self.provenance {
            for part in line.split('\n') {
                s.push_str("# ");
                s.push_str(part);
                s.push('\n');
            }
        }
        s.push_str(&format!("{} {} {}\n", self.modes, self.photons, u8::from(self.collisions)));
        for r in &self.records {
            s.push_str(&r.to_digits()?);
            s.push('\n');
        }
        Ok(s)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize, bool)> = None;
        let mut records = Vec::new();
        let mut provenance = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let perr = |reason: String| Error::Parse { line: line_no, reason };
            if let Some(comment) = raw.trim_start().strip_prefix('#') {
                let comment = comment.trim_end_matches('\r');
                provenance.push(comment.strip_prefix(' ').unwrap_or(comment).to_string());
                continue;
            }
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            match header {
                None => {
                    let fields: Vec<&str> = line.split_whitespace().collect();
                    if fields.len() != 3 {
                        return Err(perr(format!("expected header 'm n collision_flag', got '{line}'")));
                    }
                    let m = fields[0].parse().map_err(|_| perr(format!("bad mode count '{}'", fields[0])))?;
                    let n = fields[1].parse().map_err(|_| perr(format!("bad photon count '{}'", fields[1])))?;
                    let flag = match fields[2] {
                        "0" => false,
                        "1" => true,
                        f => return Err(perr(format!("collision flag must be 0 or 1, got '{f}'"))),
                    };
                    header = Some((m, n, flag));
                }
                Some((m, n, flag)) => {
                    let rec = OccupationVector::from_digits(line).map_err(|e| perr(e.to_string()))?;
                    check_record(&rec, m, n, flag).map_err(perr)?;
                    records.push(rec);
                }
            }
        }
        let (modes, photons, collisions) =
            header.ok_or_else(|| Error::Parse { line: 0, reason: "missing header line".into() })?;
        Ok(Dataset { modes, photons, collisions, records, provenance })
    }

    /// Seeded shuffle then split; `test_fraction` of the records go to the second set.
    pub fn shuffle_split(&self, test_fraction: f64, rng: &mut impl Rng) -> Result<(Dataset, Dataset)> {
        if !(0.0..1.0).contains(&test_fraction) {
            return Err(Error::InvalidArgument(format!("test fraction {test_fraction} not in [0, 1)")));
        }
        let mut records = self.records.clone();
        records.shuffle(rng);
        let n_test = (records.len() as f64 * test_fraction).round() as usize;
        let test = records.split_off(records.len() - n_test);
        let mk = |records| Dataset {
            modes: self.modes,
            photons: self.photons,
            collisions: self.collisions,
            records,
            provenance: self.provenance.clone(),
        };
        Ok((mk(records), mk(test)))
    }
}

fn check_record(r: &OccupationVector, m: usize, n: usize, collisions: bool) -> std::result::Result<(), String> {
    if r.modes() != m {
        return Err(format!("record has length {} but m = {m}", r.modes()));
    }
    if r.total() != n {
        return Err(format!("record weight {} != {n}", r.total()));
    }
    if !collisions && !r.is_collision_free() {
        return Err("record has a count above 1 but the collision flag is 0".into());
    }
    Ok(())
}

pub fn write_dataset(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, ds.to_text()?)?;
    Ok(())
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    Dataset::from_text(&std::fs::read_to_string(path)?)
}
