use std::io::{Read, Seek, SeekFrom, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::geometry::LevelSet;
use crate::{Error, Result};

use super::interp::CoefficientInterpolant;
use super::train::{ClusterRom, RomMeta, RomModel};

const FORMAT_VERSION: u32 = 1;

/// Manifest entry of one serialized cluster.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterManifest {
    pub offset: u64,
    pub length: u64,
    pub sha256: String,
    pub n_r: usize,
    pub n_i: usize,
    pub interp_condition: f64,
    pub rank_deficient: bool,
}

/// Plain-text companion of the binary artifact: format version, model
/// identity, shapes, and per-cluster checksums.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub meta: RomMeta,
    pub clusters: Vec<ClusterManifest>,
}

fn manifest_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    os.into()
}

fn push_f64s(buf: &mut Vec<u8>, values: impl Iterator<Item = f64>) {
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

fn cluster_bytes(c: &ClusterRom) -> Vec<u8> {
    let (n_i, n_r) = c.basis.shape();
    let mut buf = Vec::new();
    buf.extend_from_slice(&(n_i as u64).to_le_bytes());
    buf.extend_from_slice(&(n_r as u64).to_le_bytes());
    buf.extend_from_slice(&(c.singular_values.len() as u64).to_le_bytes());
    buf.extend_from_slice(&(c.coeffs.values.len() as u64).to_le_bytes());
    push_f64s(&mut buf, c.basis.iter().copied()); // column-major
    for &m in &c.magic {
        buf.extend_from_slice(&(m as u64).to_le_bytes());
    }
    push_f64s(&mut buf, c.singular_values.iter().copied());
    for v in &c.coeffs.values {
        push_f64s(&mut buf, v.iter().copied());
    }
    buf
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn u64(&mut self) -> Result<u64> {
        let end = self.pos + 8;
        if end > self.data.len() {
            return Err(Error::Artifact("truncated cluster record".into()));
        }
        let v = u64::from_le_bytes(self.data[self.pos..end].try_into().unwrap());
        self.pos = end;
        Ok(v)
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let end = self.pos + 8 * n;
        if end > self.data.len() {
            return Err(Error::Artifact("truncated cluster record".into()));
        }
        let out = self.data[self.pos..end]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        self.pos = end;
        Ok(out)
    }
}

fn cluster_from_bytes(data: &[u8], meta: &RomMeta, entry: &ClusterManifest, cluster: usize) -> Result<ClusterRom> {
    let mut r = Reader { data, pos: 0 };
    let n_i = r.u64()? as usize;
    let n_r = r.u64()? as usize;
    let n_v = r.u64()? as usize;
    let n_nodes = r.u64()? as usize;
    if n_i != entry.n_i || n_r != entry.n_r {
        return Err(Error::Artifact(format!(
            "cluster {cluster}: header shapes ({n_i}, {n_r}) disagree with manifest ({}, {})",
            entry.n_i, entry.n_r
        )));
    }
    let basis = DMatrix::from_vec(n_i, n_r, r.f64s(n_i * n_r)?);
    let mut magic = Vec::with_capacity(n_r);
    for _ in 0..n_r {
        magic.push(r.u64()? as usize);
    }
    let singular_values = r.f64s(n_v)?;
    let mut values = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        values.push(DVector::from_vec(r.f64s(n_r)?));
    }
    if (meta.options.d_int + 1).pow(4) != n_nodes {
        return Err(Error::Artifact(format!(
            "cluster {cluster}: {n_nodes} coefficient nodes, expected {}",
            (meta.options.d_int + 1).pow(4)
        )));
    }
    let coeffs =
        CoefficientInterpolant::new(meta.options.d_int, meta.grid.cluster_box(cluster), values);
    let mut interp_matrix = DMatrix::zeros(n_r, n_r);
    for (j, &m) in magic.iter().enumerate() {
        for c in 0..n_r {
            interp_matrix[(j, c)] = basis[(m, c)];
        }
    }
    Ok(ClusterRom {
        basis,
        singular_values,
        magic,
        interp_matrix,
        interp_condition: entry.interp_condition,
        coeffs,
        rank_deficient: entry.rank_deficient,
    })
}

/// Writes the binary artifact and its JSON manifest. Every cluster must be
/// present in the model.
pub fn save_model(model: &RomModel, path: &Path) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    let mut entries = Vec::with_capacity(model.clusters.len());
    let mut offset = 0u64;
    for (k, c) in model.clusters.iter().enumerate() {
        let c = c.as_ref().ok_or_else(|| {
            Error::Artifact(format!("cluster {k} missing; cannot serialize a partial model"))
        })?;
        let bytes = cluster_bytes(c);
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        entries.push(ClusterManifest {
            offset,
            length: bytes.len() as u64,
            sha256: hex_string(&hasher.finalize()),
            n_r: c.basis.ncols(),
            n_i: c.basis.nrows(),
            interp_condition: c.interp_condition,
            rank_deficient: c.rank_deficient,
        });
        file.write_all(&bytes)?;
        offset += bytes.len() as u64;
    }
    file.flush()?;
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        meta: model.meta.clone(),
        clusters: entries,
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(manifest_path(path), json)?;
    Ok(())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads the manifest only.
pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(manifest_path(path))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::Artifact(format!(
            "artifact format version {} unsupported (expected {FORMAT_VERSION})",
            manifest.format_version
        )));
    }
    Ok(manifest)
}

/// Loads a model from an artifact, verifying checksums. When `select` is
/// given only those clusters are materialized; evaluation outside them is
/// rejected at run time.
pub fn load_model(path: &Path, select: Option<&[usize]>) -> Result<RomModel> {
    let manifest = load_manifest(path)?;
    let level_set = LevelSet::from_kind_name(&manifest.meta.level_set).ok_or_else(|| {
        Error::Artifact(format!(
            "level set kind '{}' is not loadable from artifacts",
            manifest.meta.level_set
        ))
    })?;
    let n_clusters = manifest.meta.grid.n_clusters();
    if manifest.clusters.len() != n_clusters {
        return Err(Error::Artifact(format!(
            "manifest lists {} clusters, grid requires {n_clusters}",
            manifest.clusters.len()
        )));
    }
    let mut file = std::fs::File::open(path)?;
    let mut clusters: Vec<Option<ClusterRom>> = (0..n_clusters).map(|_| None).collect();
    let wanted: Vec<usize> = match select {
        Some(list) => list.to_vec(),
        None => (0..n_clusters).collect(),
    };
    for &k in &wanted {
        let entry = &manifest.clusters[k];
        let mut bytes = vec![0u8; entry.length as usize];
        file.seek(SeekFrom::Start(entry.offset))?;
        file.read_exact(&mut bytes)?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let digest = hex_string(&hasher.finalize());
        if digest != entry.sha256 {
            return Err(Error::Artifact(format!(
                "cluster {k}: checksum mismatch (stored {}, computed {digest})",
                entry.sha256
            )));
        }
        clusters[k] = Some(cluster_from_bytes(&bytes, &manifest.meta, entry, k)?);
    }
    Ok(RomModel { level_set, meta: manifest.meta, clusters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rom::{train_model, ClusterGrid, TrainOptions};
    use crate::geometry::ThresholdParams;

    fn tiny_options() -> TrainOptions {
        TrainOptions {
            n_s: 10,
            n_r: 4,
            n_v_extra: 2,
            oversample: 4,
            power_iters: 1,
            d_int: 1,
            seed: 9,
            quad_tol: 1e-8,
            quad_max_depth: 4,
        }
    }

    #[test]
    fn round_trip_and_checksum() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.rom");
        let grid = ClusterGrid::new(0.1, 0.9, 2);
        let model = train_model(
            &LevelSet::SchwarzPrimitive,
            grid,
            1,
            1,
            &tiny_options(),
            |_, _| {},
        )
        .unwrap();
        save_model(&model, &path).unwrap();

        let manifest = load_manifest(&path).unwrap();
        assert_eq!(manifest.clusters.len(), 16);

        let loaded = load_model(&path, None).unwrap();
        let mu = ThresholdParams::uniform(0.5);
        let a = model.eval(1, 1, &mu).unwrap().to_flat();
        let b = loaded.eval(1, 1, &mu).unwrap().to_flat();
        assert_eq!(a, b);

        // selective load only materializes the requested cluster
        let partial = load_model(&path, Some(&[manifest.meta.grid.find(&mu).unwrap()])).unwrap();
        assert!(partial.eval(1, 1, &mu).is_ok());
        assert!(partial.eval(1, 1, &ThresholdParams::uniform(0.15)).is_err());
    }

    #[test]
    fn corruption_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.rom");
        let grid = ClusterGrid::new(0.1, 0.9, 1);
        let model = train_model(
            &LevelSet::SchwarzPrimitive,
            grid,
            1,
            1,
            &tiny_options(),
            |_, _| {},
        )
        .unwrap();
        save_model(&model, &path).unwrap();
        // flip one byte
        let mut bytes = std::fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0xff;
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(load_model(&path, None), Err(Error::Artifact(_))));
    }

    #[test]
    fn retrain_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let grid = ClusterGrid::new(0.2, 0.8, 1);
        let (p1, p2) = (dir.path().join("a.rom"), dir.path().join("b.rom"));
        for path in [&p1, &p2] {
            let model = train_model(
                &LevelSet::SchwarzDiamond,
                grid,
                1,
                1,
                &tiny_options(),
                |_, _| {},
            )
            .unwrap();
            save_model(&model, path).unwrap();
        }
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }
}
