use std::path::Path;

use crate::agents::{Algorithm, TrainConfig, TrainedModel};
use crate::value_net::{param_count, ValueNetwork};
use crate::visibility::CoverageTable;
use crate::{Error, Result};

use super::binary::{checked_u32, Put, Reader};
use super::{read_file, write_atomic};

const MAGIC: &[u8; 4] = b"VPNW";
const VERSION: u32 = 1;

/// How `check_digests` treats a model trained on a different table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DigestCheck {
    Reject,
    Warn,
}

/// Layout: magic, version, algorithm tag, view count, |Λ|, hidden width,
/// parameters (hidden weights row-major, hidden biases, output weights,
/// output bias), config block, mesh digest, table digest. Logs are not
/// stored.
pub fn encode_model(model: &TrainedModel) -> Result<Vec<u8>> {
    let cfg = &model.config;
    let input_dim = model.network.input_dim();
    let views = if cfg.algorithm.uses_action_input() {
        input_dim.checked_sub(cfg.lambda_set.len())
    } else {
        Some(input_dim)
    }
    .ok_or_else(|| Error::input("network input is narrower than the lambda set"))?;
    if model.network.hidden() != cfg.hidden {
        return Err(Error::input("network width disagrees with its config"));
    }

    let mut out = Vec::with_capacity(64 + 8 * model.network.params().len());
    out.extend_from_slice(MAGIC);
    out.put_u32(VERSION);
    out.put_u8(cfg.algorithm.tag());
    out.put_u32(checked_u32("view", views)?);
    out.put_u32(checked_u32("lambda", cfg.lambda_set.len())?);
    out.put_u32(checked_u32("hidden unit", cfg.hidden)?);
    for &p in model.network.params() {
        out.put_f64(p);
    }
    for &l in &cfg.lambda_set {
        out.put_f64(l);
    }
    out.put_f64(cfg.alpha);
    out.put_f64(cfg.mu_e);
    out.put_u64(cfg.max_episodes as u64);
    out.put_f64(cfg.rcc);
    out.put_f64(cfg.epsilon);
    out.put_u64(cfg.epsilon_episodes as u64);
    out.put_f64(cfg.gamma);
    out.put_u64(cfg.seed);
    out.put_f64(cfg.init_scale);
    out.put_u64(cfg.eval_every as u64);
    out.put_u64(model.mesh_digest);
    out.put_u64(model.table_digest);
    Ok(out)
}

pub fn decode_model(bytes: &[u8]) -> Result<TrainedModel> {
    let mut r = Reader::new("model weights", bytes);
    r.magic(MAGIC)?;
    r.version(VERSION)?;
    let tag_at = r.offset();
    let tag = r.u8()?;
    let algorithm = Algorithm::from_tag(tag).ok_or_else(|| Error::Format {
        format: "model weights",
        offset: tag_at,
        msg: format!("unknown algorithm tag {tag}"),
    })?;
    let views = r.u32()? as usize;
    let lambdas = r.u32()? as usize;
    let hidden = r.u32()? as usize;
    let input_dim = if algorithm.uses_action_input() {
        views + lambdas
    } else {
        views
    };
    let n = param_count(input_dim, hidden);
    if (n as u64).saturating_mul(8) > bytes.len() as u64 {
        return Err(r.error(format!("truncated: header promises {n} parameters")));
    }
    let params = r.f64s(n)?;
    let lambda_set = r.f64s(lambdas)?;
    let config = TrainConfig {
        algorithm,
        lambda_set,
        alpha: r.f64()?,
        mu_e: r.f64()?,
        max_episodes: r.u64()? as usize,
        rcc: r.f64()?,
        epsilon: r.f64()?,
        epsilon_episodes: r.u64()? as usize,
        gamma: r.f64()?,
        seed: r.u64()?,
        hidden,
        init_scale: r.f64()?,
        eval_every: r.u64()? as usize,
    };
    let mesh_digest = r.u64()?;
    let table_digest = r.u64()?;
    r.finish()?;
    Ok(TrainedModel {
        network: ValueNetwork::from_params(input_dim, hidden, params)?,
        config,
        episode_log: Vec::new(),
        eval_log: Vec::new(),
        mesh_digest,
        table_digest,
    })
}

pub fn save_model(path: &Path, model: &TrainedModel) -> Result<()> {
    write_atomic(path, &encode_model(model)?)
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    decode_model(&read_file(path)?)
}

/// Compares the model's recorded table digest with `table`'s. A mismatch
/// is an error under `Reject` and a logged warning under `Warn`.
pub fn check_digests(model: &TrainedModel, table: &CoverageTable, mode: DigestCheck) -> Result<()> {
    if model.table_digest == table.digest() {
        return Ok(());
    }
    match mode {
        DigestCheck::Reject => Err(Error::DigestMismatch {
            expected: model.table_digest,
            found: table.digest(),
        }),
        DigestCheck::Warn => {
            log::warn!(
                "model was trained on table {:016x}, planning on {:016x}",
                model.table_digest,
                table.digest()
            );
            Ok(())
        }
    }
}
