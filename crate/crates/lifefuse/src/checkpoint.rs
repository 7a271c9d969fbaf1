//! Model checkpoints: one JSON header line describing the architecture and
//! parameter blocks, then every parameter as a little-endian `f32`.

use std::path::Path;

use lifefuse_core::detectors::{UwbDetector, UwbDetectorConfig};
use lifefuse_core::fusion::{FusionConfig, FusionNetwork};
use lifefuse_core::neural::{LayerSpec, Model};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsutil::{read_file, write_file};

pub const FORMAT: &str = "lifefuse-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "config", rename_all = "snake_case")]
pub enum ModelConfig {
    Fusion(FusionConfig),
    Uwb(UwbDetectorConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockInfo {
    pub name: String,
    pub layer: LayerSpec,
    pub shape: Vec<usize>,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub format: String,
    pub version: u32,
    pub model: ModelConfig,
    pub num_params: usize,
    pub blocks: Vec<BlockInfo>,
}

fn block_info(model: &dyn Model) -> Vec<BlockInfo> {
    model
        .blocks()
        .into_iter()
        .map(|b| BlockInfo {
            name: b.name,
            layer: b.spec,
            shape: b.shape,
            len: b.values.len(),
        })
        .collect()
}

pub fn encode(config: ModelConfig, model: &dyn Model) -> Vec<u8> {
    let header = Header {
        format: FORMAT.into(),
        version: VERSION,
        model: config,
        num_params: model.num_params(),
        blocks: block_info(model),
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    for v in model.flat_params() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

/// Header and parameters widened back to `f64`.
pub fn decode(path: &Path, bytes: &[u8]) -> Result<(Header, Vec<f64>)> {
    let bad = |msg: String| Error::Config(format!("{}: {msg}", path.display()));
    let split = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad("missing checkpoint header line".into()))?;
    let header: Header =
        serde_json::from_slice(&bytes[..split]).map_err(|e| bad(format!("invalid checkpoint header: {e}")))?;
    if header.format != FORMAT || header.version != VERSION {
        return Err(bad(format!(
            "unsupported checkpoint format {} v{}",
            header.format, header.version
        )));
    }
    let body = &bytes[split + 1..];
    if body.len() != 4 * header.num_params {
        return Err(bad(format!(
            "expected {} parameter bytes, found {}",
            4 * header.num_params,
            body.len()
        )));
    }
    let params = body
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
        .collect();
    Ok((header, params))
}

fn restore(path: &Path, header: &Header, params: &[f64], model: &mut dyn Model) -> Result<()> {
    if block_info(model) != header.blocks {
        return Err(Error::Config(format!(
            "{}: parameter blocks do not match the recorded architecture",
            path.display()
        )));
    }
    model.set_flat_params(params)?;
    Ok(())
}

pub fn save_fusion(path: &Path, net: &FusionNetwork) -> Result<()> {
    write_file(path, &encode(ModelConfig::Fusion(net.config().clone()), net))
}

pub fn load_fusion(path: &Path) -> Result<FusionNetwork> {
    let (header, params) = decode(path, &read_file(path)?)?;
    let ModelConfig::Fusion(cfg) = &header.model else {
        return Err(Error::Config(format!("{} is not a fusion checkpoint", path.display())));
    };
    let mut net = FusionNetwork::new(cfg.clone())?;
    restore(path, &header, &params, &mut net)?;
    Ok(net)
}

pub fn save_uwb(path: &Path, det: &UwbDetector) -> Result<()> {
    write_file(path, &encode(ModelConfig::Uwb(det.config().clone()), det.model()))
}

pub fn load_uwb(path: &Path) -> Result<UwbDetector> {
    let (header, params) = decode(path, &read_file(path)?)?;
    let ModelConfig::Uwb(cfg) = &header.model else {
        return Err(Error::Config(format!("{} is not a UWB checkpoint", path.display())));
    };
    let mut det = UwbDetector::new(cfg.clone())?;
    restore(path, &header, &params, det.model_mut())?;
    Ok(det)
}
