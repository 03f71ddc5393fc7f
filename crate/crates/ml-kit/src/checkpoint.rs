//! Versioned checkpoint container.
//!
//! Layout: an 8-byte magic, a little-endian u32 manifest length, a JSON
//! manifest (format version, global step, RNG state, architecture extras
//! and a section table), then the sections' raw data as little-endian f64
//! arrays in table order. Loads reconstruct everything before touching the
//! caller's state, so a corrupt file never applies partially.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adam::{Adam, AdamConfig};
use crate::autoencoder::Autoencoder;
use crate::net::{Activation, DenseNet, Layer};
use crate::ppo::{PpoAgent, PpoConfig};
use crate::MlError;

pub const MAGIC: &[u8; 8] = b"MLKCKPT1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RngSnapshot {
    /// 32-byte ChaCha seed, hex-encoded.
    pub seed_hex: String,
    /// Stream word position, decimal string (u128).
    pub word_pos: String,
    pub stream: u64,
}

impl RngSnapshot {
    pub fn capture(rng: &ChaCha8Rng) -> Self {
        let seed = rng.get_seed();
        Self {
            seed_hex: seed.iter().map(|b| format!("{b:02x}")).collect(),
            word_pos: rng.get_word_pos().to_string(),
            stream: rng.get_stream(),
        }
    }

    pub fn restore(&self) -> Result<ChaCha8Rng, MlError> {
        if self.seed_hex.len() != 64 {
            return Err(MlError::Checkpoint("rng seed must be 32 bytes".into()));
        }
        let mut seed = [0u8; 32];
        for i in 0..32 {
            seed[i] = u8::from_str_radix(&self.seed_hex[2 * i..2 * i + 2], 16)
                .map_err(|e| MlError::Checkpoint(format!("bad rng seed hex: {e}")))?;
        }
        let word_pos: u128 = self
            .word_pos
            .parse()
            .map_err(|e| MlError::Checkpoint(format!("bad rng word pos: {e}")))?;
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(word_pos);
        Ok(rng)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SectionMeta {
    name: String,
    shape: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    global_step: u64,
    rng: Option<RngSnapshot>,
    extra: serde_json::Value,
    sections: Vec<SectionMeta>,
}

/// In-memory checkpoint: named f64 arrays plus bookkeeping.
#[derive(Debug, Clone)]
pub struct Container {
    pub global_step: u64,
    pub rng: Option<RngSnapshot>,
    pub extra: serde_json::Value,
    sections: Vec<(SectionMeta, Vec<f64>)>,
    by_name: BTreeMap<String, usize>,
}

impl Container {
    pub fn new(global_step: u64, rng: Option<RngSnapshot>, extra: serde_json::Value) -> Self {
        Self {
            global_step,
            rng,
            extra,
            sections: Vec::new(),
            by_name: BTreeMap::new(),
        }
    }

    pub fn push_section(&mut self, name: &str, shape: Vec<usize>, data: Vec<f64>) {
        assert_eq!(
            shape.iter().product::<usize>(),
            data.len(),
            "shape/data mismatch for {name}"
        );
        self.by_name.insert(name.to_string(), self.sections.len());
        self.sections.push((
            SectionMeta {
                name: name.to_string(),
                shape,
            },
            data,
        ));
    }

    pub fn section(&self, name: &str) -> Result<(&[usize], &[f64]), MlError> {
        let idx = self
            .by_name
            .get(name)
            .ok_or_else(|| MlError::Checkpoint(format!("missing section {name}")))?;
        let (meta, data) = &self.sections[*idx];
        Ok((&meta.shape, data))
    }

    pub fn matrix(&self, name: &str) -> Result<Array2<f64>, MlError> {
        let (shape, data) = self.section(name)?;
        if shape.len() != 2 {
            return Err(MlError::Checkpoint(format!("{name} is not a matrix")));
        }
        Array2::from_shape_vec((shape[0], shape[1]), data.to_vec())
            .map_err(|e| MlError::Checkpoint(e.to_string()))
    }

    pub fn vector(&self, name: &str) -> Result<Array1<f64>, MlError> {
        let (shape, data) = self.section(name)?;
        if shape.len() != 1 {
            return Err(MlError::Checkpoint(format!("{name} is not a vector")));
        }
        Ok(Array1::from(data.to_vec()))
    }

    pub fn save(&self, path: &Path) -> Result<(), MlError> {
        let manifest = Manifest {
            version: FORMAT_VERSION,
            global_step: self.global_step,
            rng: self.rng.clone(),
            extra: self.extra.clone(),
            sections: self.sections.iter().map(|(m, _)| m.clone()).collect(),
        };
        let manifest_bytes = serde_json::to_vec(&manifest)
            .map_err(|e| MlError::Checkpoint(format!("manifest encode: {e}")))?;
        let file = File::create(path).map_err(|e| MlError::Io(e.to_string()))?;
        let mut w = BufWriter::new(file);
        w.write_all(MAGIC).map_err(io_err)?;
        w.write_all(&(manifest_bytes.len() as u32).to_le_bytes())
            .map_err(io_err)?;
        w.write_all(&manifest_bytes).map_err(io_err)?;
        for (_, data) in &self.sections {
            for v in data {
                w.write_all(&v.to_le_bytes()).map_err(io_err)?;
            }
        }
        w.flush().map_err(io_err)
    }

    pub fn load(path: &Path) -> Result<Self, MlError> {
        let file = File::open(path).map_err(|e| MlError::Io(e.to_string()))?;
        let mut r = BufReader::new(file);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)
            .map_err(|_| MlError::Checkpoint("file too short for magic".into()))?;
        if &magic != MAGIC {
            return Err(MlError::Checkpoint("bad magic; not a checkpoint".into()));
        }
        let mut len_bytes = [0u8; 4];
        r.read_exact(&mut len_bytes)
            .map_err(|_| MlError::Checkpoint("truncated manifest length".into()))?;
        let manifest_len = u32::from_le_bytes(len_bytes) as usize;
        let mut manifest_bytes = vec![0u8; manifest_len];
        r.read_exact(&mut manifest_bytes)
            .map_err(|_| MlError::Checkpoint("truncated manifest".into()))?;
        let manifest: Manifest = serde_json::from_slice(&manifest_bytes)
            .map_err(|e| MlError::Checkpoint(format!("manifest decode: {e}")))?;
        if manifest.version != FORMAT_VERSION {
            return Err(MlError::Checkpoint(format!(
                "unsupported format version {} (expected {FORMAT_VERSION})",
                manifest.version
            )));
        }
        let mut out = Container::new(manifest.global_step, manifest.rng, manifest.extra);
        for meta in manifest.sections {
            let count: usize = meta.shape.iter().product();
            let mut data = Vec::with_capacity(count);
            let mut buf = [0u8; 8];
            for i in 0..count {
                r.read_exact(&mut buf).map_err(|_| {
                    MlError::Checkpoint(format!(
                        "truncated data: section {} ends at element {i} of {count}",
                        meta.name
                    ))
                })?;
                data.push(f64::from_le_bytes(buf));
            }
            out.push_section(&meta.name, meta.shape, data);
        }
        Ok(out)
    }
}

fn io_err(e: std::io::Error) -> MlError {
    MlError::Io(e.to_string())
}

// --- network <-> sections ---

pub fn push_net(c: &mut Container, prefix: &str, net: &DenseNet) {
    for (i, layer) in net.layers.iter().enumerate() {
        c.push_section(
            &format!("{prefix}.w{i}"),
            vec![layer.weights.nrows(), layer.weights.ncols()],
            layer.weights.iter().copied().collect(),
        );
        c.push_section(
            &format!("{prefix}.b{i}"),
            vec![layer.biases.len()],
            layer.biases.to_vec(),
        );
    }
}

pub fn net_from_sections(
    c: &Container,
    prefix: &str,
    dims: &[usize],
    hidden: Activation,
    output: Activation,
) -> Result<DenseNet, MlError> {
    let mut layers = Vec::with_capacity(dims.len() - 1);
    for i in 0..dims.len() - 1 {
        let weights = c.matrix(&format!("{prefix}.w{i}"))?;
        let biases = c.vector(&format!("{prefix}.b{i}"))?;
        if weights.nrows() != dims[i + 1] || weights.ncols() != dims[i] {
            return Err(MlError::Checkpoint(format!(
                "{prefix}.w{i} shape {:?} does not match dims {:?}",
                weights.shape(),
                dims
            )));
        }
        layers.push(Layer {
            weights,
            biases,
            activation: if i == dims.len() - 2 { output } else { hidden },
        });
    }
    Ok(DenseNet { layers })
}

pub fn push_adam(c: &mut Container, prefix: &str, opt: &Adam) {
    for (i, ((mw, mb), (vw, vb))) in opt.m.iter().zip(&opt.v).enumerate() {
        c.push_section(
            &format!("{prefix}.m.w{i}"),
            vec![mw.nrows(), mw.ncols()],
            mw.iter().copied().collect(),
        );
        c.push_section(&format!("{prefix}.m.b{i}"), vec![mb.len()], mb.to_vec());
        c.push_section(
            &format!("{prefix}.v.w{i}"),
            vec![vw.nrows(), vw.ncols()],
            vw.iter().copied().collect(),
        );
        c.push_section(&format!("{prefix}.v.b{i}"), vec![vb.len()], vb.to_vec());
    }
}

pub fn adam_from_sections(
    c: &Container,
    prefix: &str,
    cfg: AdamConfig,
    t: u64,
    net: &DenseNet,
) -> Result<Adam, MlError> {
    let mut opt = Adam::new(cfg, net);
    for i in 0..net.layers.len() {
        opt.m[i] = (
            c.matrix(&format!("{prefix}.m.w{i}"))?,
            c.vector(&format!("{prefix}.m.b{i}"))?,
        );
        opt.v[i] = (
            c.matrix(&format!("{prefix}.v.w{i}"))?,
            c.vector(&format!("{prefix}.v.b{i}"))?,
        );
    }
    opt.t = t;
    Ok(opt)
}

#[derive(Debug, Serialize, Deserialize)]
struct PpoExtra {
    actor_dims: Vec<usize>,
    critic_dims: Vec<usize>,
    cfg: PpoConfig,
    policy_version: u64,
    opt_actor_t: u64,
    opt_critic_t: u64,
    skipped_steps: u64,
}

impl PpoAgent {
    pub fn to_container(&self) -> Container {
        let extra = PpoExtra {
            actor_dims: self.actor.dims(),
            critic_dims: self.critic.dims(),
            cfg: self.cfg,
            policy_version: self.policy_version,
            opt_actor_t: self.opt_actor.t,
            opt_critic_t: self.opt_critic.t,
            skipped_steps: self.skipped_steps,
        };
        let mut c = Container::new(
            self.global_step,
            Some(RngSnapshot::capture(&self.rng)),
            serde_json::to_value(&extra).expect("extra serializes"),
        );
        push_net(&mut c, "actor", &self.actor);
        push_net(&mut c, "critic", &self.critic);
        push_adam(&mut c, "opt_actor", &self.opt_actor);
        push_adam(&mut c, "opt_critic", &self.opt_critic);
        c
    }

    pub fn from_container(c: &Container) -> Result<Self, MlError> {
        let extra: PpoExtra = serde_json::from_value(c.extra.clone())
            .map_err(|e| MlError::Checkpoint(format!("agent manifest: {e}")))?;
        let actor = net_from_sections(
            c,
            "actor",
            &extra.actor_dims,
            Activation::Tanh,
            Activation::Softmax,
        )?;
        let critic = net_from_sections(
            c,
            "critic",
            &extra.critic_dims,
            Activation::Tanh,
            Activation::Linear,
        )?;
        let opt_actor = adam_from_sections(
            c,
            "opt_actor",
            AdamConfig::with_lr(extra.cfg.lr),
            extra.opt_actor_t,
            &actor,
        )?;
        let opt_critic = adam_from_sections(
            c,
            "opt_critic",
            AdamConfig::with_lr(extra.cfg.lr),
            extra.opt_critic_t,
            &critic,
        )?;
        let rng = c
            .rng
            .as_ref()
            .ok_or_else(|| MlError::Checkpoint("agent checkpoint missing rng".into()))?
            .restore()?;
        Ok(PpoAgent {
            actor,
            critic,
            opt_actor,
            opt_critic,
            cfg: extra.cfg,
            rng,
            global_step: c.global_step,
            policy_version: extra.policy_version,
            skipped_steps: extra.skipped_steps,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), MlError> {
        self.to_container().save(path)
    }

    pub fn load(path: &Path) -> Result<Self, MlError> {
        Self::from_container(&Container::load(path)?)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct AeExtra {
    encoder_dims: Vec<usize>,
    lr: f64,
    opt_encoder_t: u64,
    opt_decoder_t: u64,
}

impl Autoencoder {
    pub fn to_container(&self) -> Container {
        let extra = AeExtra {
            encoder_dims: self.encoder.dims(),
            lr: self.opt_encoder.cfg.lr,
            opt_encoder_t: self.opt_encoder.t,
            opt_decoder_t: self.opt_decoder.t,
        };
        let mut c = Container::new(
            self.global_step,
            Some(RngSnapshot::capture(&self.rng)),
            serde_json::to_value(&extra).expect("extra serializes"),
        );
        push_net(&mut c, "encoder", &self.encoder);
        push_net(&mut c, "decoder", &self.decoder);
        push_adam(&mut c, "opt_encoder", &self.opt_encoder);
        push_adam(&mut c, "opt_decoder", &self.opt_decoder);
        c
    }

    pub fn from_container(c: &Container) -> Result<Self, MlError> {
        let extra: AeExtra = serde_json::from_value(c.extra.clone())
            .map_err(|e| MlError::Checkpoint(format!("autoencoder manifest: {e}")))?;
        let decoder_dims: Vec<usize> = extra.encoder_dims.iter().rev().copied().collect();
        let encoder = net_from_sections(
            c,
            "encoder",
            &extra.encoder_dims,
            Activation::Relu,
            Activation::Relu,
        )?;
        let decoder = net_from_sections(
            c,
            "decoder",
            &decoder_dims,
            Activation::Relu,
            Activation::Linear,
        )?;
        let opt_encoder = adam_from_sections(
            c,
            "opt_encoder",
            AdamConfig::with_lr(extra.lr),
            extra.opt_encoder_t,
            &encoder,
        )?;
        let opt_decoder = adam_from_sections(
            c,
            "opt_decoder",
            AdamConfig::with_lr(extra.lr),
            extra.opt_decoder_t,
            &decoder,
        )?;
        let rng = c
            .rng
            .as_ref()
            .ok_or_else(|| MlError::Checkpoint("autoencoder checkpoint missing rng".into()))?
            .restore()?;
        Ok(Autoencoder {
            encoder,
            decoder,
            opt_encoder,
            opt_decoder,
            rng,
            global_step: c.global_step,
        })
    }
}

/// A full xApp model bundle: PPO agent plus (optionally) the autoencoder it
/// front-ends with, in one file.
pub struct ModelBundle {
    pub agent: PpoAgent,
    pub autoencoder: Option<Autoencoder>,
}

impl ModelBundle {
    pub fn save(&self, path: &Path) -> Result<(), MlError> {
        let agent_c = self.agent.to_container();
        let mut extra = serde_json::Map::new();
        extra.insert("agent".to_string(), agent_c.extra.clone());
        let mut c = Container::new(agent_c.global_step, agent_c.rng.clone(), serde_json::Value::Null);
        for (meta, data) in &agent_c.sections {
            c.push_section(&format!("agent.{}", meta.name), meta.shape.clone(), data.clone());
        }
        if let Some(ae) = &self.autoencoder {
            let ae_c = ae.to_container();
            extra.insert("autoencoder".to_string(), ae_c.extra.clone());
            extra.insert(
                "autoencoder_rng".to_string(),
                serde_json::to_value(ae_c.rng.clone()).expect("rng serializes"),
            );
            extra.insert(
                "autoencoder_step".to_string(),
                serde_json::Value::from(ae_c.global_step),
            );
            for (meta, data) in &ae_c.sections {
                c.push_section(&format!("ae.{}", meta.name), meta.shape.clone(), data.clone());
            }
        }
        c.extra = serde_json::Value::Object(extra);
        c.save(path)
    }

    pub fn load(path: &Path) -> Result<Self, MlError> {
        let c = Container::load(path)?;
        let obj = c
            .extra
            .as_object()
            .ok_or_else(|| MlError::Checkpoint("bundle manifest is not an object".into()))?;
        let agent_extra = obj
            .get("agent")
            .ok_or_else(|| MlError::Checkpoint("bundle missing agent manifest".into()))?;
        let mut agent_c = Container::new(c.global_step, c.rng.clone(), agent_extra.clone());
        for (meta, data) in &c.sections {
            if let Some(name) = meta.name.strip_prefix("agent.") {
                agent_c.push_section(name, meta.shape.clone(), data.clone());
            }
        }
        let agent = PpoAgent::from_container(&agent_c)?;
        let autoencoder = if let Some(ae_extra) = obj.get("autoencoder") {
            let rng: Option<RngSnapshot> = obj
                .get("autoencoder_rng")
                .map(|v| serde_json::from_value(v.clone()))
                .transpose()
                .map_err(|e| MlError::Checkpoint(format!("autoencoder rng: {e}")))?;
            let step = obj
                .get("autoencoder_step")
                .and_then(|v| v.as_u64())
                .unwrap_or(0);
            let mut ae_c = Container::new(step, rng, ae_extra.clone());
            for (meta, data) in &c.sections {
                if let Some(name) = meta.name.strip_prefix("ae.") {
                    ae_c.push_section(name, meta.shape.clone(), data.clone());
                }
            }
            Some(Autoencoder::from_container(&ae_c)?)
        } else {
            None
        };
        Ok(ModelBundle { agent, autoencoder })
    }
}
