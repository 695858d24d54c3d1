//! Coefficient snapshots: a `dof_index,value` CSV with a JSON sidecar.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::dofmap::{DofMap, SpaceKind};
use super::function::FeFunction;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub kind: SpaceKind,
    pub k: usize,
    pub ndofs: usize,
    pub mesh_hash: String,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn save_snapshot(f: &FeFunction, mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::from("dof_index,value\n");
    for (i, v) in f.coeffs.iter().enumerate() {
        // Display for f64 round-trips exactly
        text.push_str(&format!("{i},{v}\n"));
    }
    fs::write(path, text)?;
    let meta = SnapshotMeta {
        kind: f.dofmap.kind,
        k: f.dofmap.k,
        ndofs: f.dofmap.ndofs,
        mesh_hash: mesh.content_hash(),
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

/// Loads a snapshot, refusing it unless space, order, size and mesh all match.
pub fn load_snapshot(path: impl AsRef<Path>, mesh: &Mesh, dofmap: &Arc<DofMap>) -> Result<FeFunction> {
    let path = path.as_ref();
    let meta: SnapshotMeta = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    let want = SnapshotMeta {
        kind: dofmap.kind,
        k: dofmap.k,
        ndofs: dofmap.ndofs,
        mesh_hash: mesh.content_hash(),
    };
    if meta != want {
        return Err(Error::MapMismatch {
            expected: format!("{} k={} n={} mesh {}", want.kind.name(), want.k, want.ndofs, want.mesh_hash),
            found: format!("{} k={} n={} mesh {}", meta.kind.name(), meta.k, meta.ndofs, meta.mesh_hash),
        });
    }
    let text = fs::read_to_string(path)?;
    let mut coeffs = vec![f64::NAN; dofmap.ndofs];
    for (n, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |msg: &str| Error::Parse {
            line: n + 1,
            msg: msg.to_string(),
        };
        let (i, v) = line.split_once(',').ok_or_else(|| parse_err("expected `index,value`"))?;
        let i: usize = i.trim().parse().map_err(|_| parse_err("bad index"))?;
        let v: f64 = v.trim().parse().map_err(|_| parse_err("bad value"))?;
        if i >= coeffs.len() {
            return Err(parse_err("index out of range"));
        }
        coeffs[i] = v;
    }
    if let Some(i) = coeffs.iter().position(|v| v.is_nan()) {
        return Err(Error::Parse {
            line: 0,
            msg: format!("missing value for dof {i}"),
        });
    }
    FeFunction::new(dofmap.clone(), coeffs)
}
