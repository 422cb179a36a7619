//! Agent checkpoints: a small header followed by named network blobs in the
//! binary parameter format.
//!
//! ```text
//! "ADCK" | version u8 | algorithm u8 | config hash [32] | count u32
//! repeated: name_len u16 | name | blob_len u32 | blob
//! ```
//! Integers are little-endian.

use alloc::string::String;
use alloc::vec::Vec;

use super::config::Algorithm;
use super::planner::{AgentError, Planner};
use crate::nn::{load_params, save_params, CodecError, CodecErrorKind, Network};

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"ADCK";
pub const CHECKPOINT_VERSION: u8 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub algorithm: Algorithm,
    pub config_hash: [u8; 32],
    pub networks: Vec<(String, Network)>,
}

fn err(offset: usize, kind: CodecErrorKind) -> AgentError {
    AgentError::Codec(CodecError { offset, kind })
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], AgentError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or(err(self.pos, CodecErrorKind::Truncated))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, AgentError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, AgentError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, AgentError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

impl Checkpoint {
    pub fn from_planner(planner: &dyn Planner, config_hash: [u8; 32]) -> Self {
        Self {
            algorithm: planner.algorithm(),
            config_hash,
            networks: planner.networks().into_iter().map(|(n, net)| (String::from(n), net.clone())).collect(),
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&CHECKPOINT_MAGIC);
        out.push(CHECKPOINT_VERSION);
        out.push(self.algorithm.code());
        out.extend_from_slice(&self.config_hash);
        out.extend_from_slice(&(self.networks.len() as u32).to_le_bytes());
        for (name, net) in &self.networks {
            out.extend_from_slice(&(name.len() as u16).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            let blob = save_params(net);
            out.extend_from_slice(&(blob.len() as u32).to_le_bytes());
            out.extend_from_slice(&blob);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, AgentError> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(4)? != CHECKPOINT_MAGIC {
            return Err(err(0, CodecErrorKind::BadMagic));
        }
        let version = r.u8()?;
        if version != CHECKPOINT_VERSION {
            return Err(err(4, CodecErrorKind::UnsupportedVersion(version)));
        }
        let algorithm = Algorithm::from_code(r.u8()?).ok_or(AgentError::CheckpointMismatch("unknown algorithm code"))?;
        let config_hash: [u8; 32] = r.take(32)?.try_into().unwrap();
        let count = r.u32()? as usize;
        let mut networks = Vec::new();
        for _ in 0..count {
            let name_len = r.u16()? as usize;
            let at = r.pos;
            let name = core::str::from_utf8(r.take(name_len)?).map_err(|_| err(at, CodecErrorKind::RecordLength))?;
            let blob_len = r.u32()? as usize;
            let at = r.pos;
            let net = load_params(r.take(blob_len)?).map_err(|e| err(at + e.offset, e.kind))?;
            networks.push((String::from(name), net));
        }
        if r.pos != bytes.len() {
            return Err(err(r.pos, CodecErrorKind::TrailingBytes));
        }
        Ok(Self { algorithm, config_hash, networks })
    }

    /// Loads the networks into `planner` after checking algorithm, config
    /// hash and network names.
    pub fn restore(self, planner: &mut dyn Planner, config_hash: &[u8; 32]) -> Result<(), AgentError> {
        if self.algorithm != planner.algorithm() {
            return Err(AgentError::CheckpointMismatch("algorithm"));
        }
        if &self.config_hash != config_hash {
            return Err(AgentError::CheckpointMismatch("config hash"));
        }
        let names: Vec<&str> = planner.networks().into_iter().map(|(n, _)| n).collect();
        if names.len() != self.networks.len() || names.iter().zip(&self.networks).any(|(a, (b, _))| a != b) {
            return Err(AgentError::CheckpointMismatch("network names"));
        }
        planner.load_networks(self.networks.into_iter().map(|(_, n)| n).collect())
    }
}
