use std::fs;
use std::io::Write;
use std::path::Path;

use pdm_causal::channels::{QuantumChannel, QuantumState};
use pdm_causal::pdm::{Layout, Party, Pdm};
use pdm_causal::tensor::ComplexMatrix;
use serde::Serialize;

use crate::{HarnessError, Result};

pub fn read_pdm(path: &Path) -> Result<Pdm> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// A state given by name (`zero`, `plus`, `bell`, `mixed`) or by the path
/// of a matrix JSON file. `mixed` is maximally mixed on `dim`.
pub fn parse_state(spec: &str, dim: usize) -> Result<QuantumState> {
    let state = match spec {
        "zero" => QuantumState::basis(dim, 0),
        "plus" if dim == 2 => QuantumState::plus(),
        "bell" if dim == 4 => QuantumState::bell(),
        "mixed" => QuantumState::maximally_mixed(&[dim]),
        path => {
            let text = fs::read_to_string(path).map_err(|e| {
                HarnessError::Input(format!(
                    "`{path}` is neither a state name valid in dimension {dim} nor a readable file ({e})"
                ))
            })?;
            let m: ComplexMatrix = serde_json::from_str(&text)?;
            QuantumState::new(m)?
        }
    };
    if state.dim() != dim {
        return Err(HarnessError::Input(format!(
            "state has dimension {}, layout needs {dim}",
            state.dim()
        )));
    }
    Ok(state)
}

/// A named channel (see [`QuantumChannel::by_name`]) or a channel JSON file.
pub fn parse_channel(spec: &str) -> Result<QuantumChannel> {
    match QuantumChannel::by_name(spec) {
        Ok(ch) => Ok(ch),
        Err(pdm_causal::Error::UnknownChannel(_)) if Path::new(spec).exists() => {
            Ok(serde_json::from_str(&fs::read_to_string(spec)?)?)
        }
        Err(e) => Err(e.into()),
    }
}

/// `single:<n>` or `bipartite:<a>,<b>` (qubit counts).
pub fn parse_layout(spec: &str) -> Result<Layout> {
    let bad = || HarnessError::Input(format!("layout `{spec}` is not single:<n> or bipartite:<a>,<b>"));
    let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
    let counts = rest
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()?;
    match (kind, counts.as_slice()) {
        ("single", [n]) if *n > 0 => Ok(Layout::single(*n)),
        ("bipartite", [a, b]) => {
            Ok(Layout::new(vec![Party::new("A", *a), Party::new("B", *b)])?)
        }
        _ => Err(bad()),
    }
}

/// `t1:A,t2:B` into `(slot, party)` label pairs.
pub fn parse_keep(spec: &str) -> Result<Vec<(String, String)>> {
    spec.split(',')
        .map(|item| {
            item.trim()
                .split_once(':')
                .map(|(s, p)| (s.to_string(), p.to_string()))
                .ok_or_else(|| HarnessError::Input(format!("`{item}` is not <slot>:<party>")))
        })
        .collect()
}

/// Writes pretty JSON to `out`, or to stdout when `out` is `None`.
pub fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    emit(text.as_bytes(), out)
}

pub fn write_csv<T: Serialize>(rows: &[T], out: Option<&Path>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))?;
    emit(&bytes, out)
}

fn emit(bytes: &[u8], out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            if !bytes.ends_with(b"\n") {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}
