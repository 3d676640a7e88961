//! `--config FILE` support: a plain `key = value` file whose entries become
//! flags placed ahead of the command-line flags, so the command line wins.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};

/// Removes `--config PATH` (or `--config=PATH`) from `args` and returns the
/// path, if present.
pub fn take_config_path(args: &mut Vec<String>) -> Result<Option<PathBuf>> {
    let Some(pos) = args.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(None);
    };
    let flag = args.remove(pos);
    let path = match flag.strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => {
            if pos >= args.len() {
                bail!("--config needs a path");
            }
            args.remove(pos)
        }
    };
    Ok(Some(PathBuf::from(path)))
}

/// Converts config text into flag tokens. `key = true` becomes a bare
/// `--key`, `key = false` is dropped.
pub fn config_tokens(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) =
            line.split_once('=').with_context(|| format!("config line {}: expected key = value", idx + 1))?;
        let (key, value) = (key.trim().replace('_', "-"), value.trim());
        if key.is_empty() {
            bail!("config line {}: empty key", idx + 1);
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            v => {
                out.push(format!("--{key}"));
                out.push(v.to_string());
            }
        }
    }
    Ok(out)
}

/// Index just past the program name, global flags and subcommand words.
pub fn insertion_point(args: &[String]) -> usize {
    let mut i = 1;
    while i < args.len() {
        let a = &args[i];
        if a == "--threads" {
            i += 2;
        } else if a.starts_with("--threads=") {
            i += 1;
        } else if a.starts_with('-') {
            break;
        } else {
            i += 1;
        }
    }
    i.min(args.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokens_from_file() {
        let t = config_tokens("# comment\nsteps = 10\nfrozen_batches = true\ntiming = false\n").unwrap();
        assert_eq!(t, v(&["--steps", "10", "--frozen-batches"]));
        assert!(config_tokens("steps 10").is_err());
    }

    #[test]
    fn config_path_is_extracted() {
        let mut a = v(&["prog", "train", "--config", "c.txt", "--steps", "3"]);
        assert_eq!(take_config_path(&mut a).unwrap(), Some(PathBuf::from("c.txt")));
        assert_eq!(a, v(&["prog", "train", "--steps", "3"]));
        let mut b = v(&["prog", "train", "--config=x"]);
        assert_eq!(take_config_path(&mut b).unwrap(), Some(PathBuf::from("x")));
    }

    #[test]
    fn insertion_after_subcommands() {
        assert_eq!(insertion_point(&v(&["p", "--threads", "2", "gen-dataset", "boson", "--m", "3"])), 5);
        assert_eq!(insertion_point(&v(&["p", "train"])), 2);
    }
}
