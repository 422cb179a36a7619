//! Binary parameter format.
//!
//! ```text
//! "ADRL" | version u8 | input_width u32 | layer_count u32 | record*
//! record = byte_len u32 | kind u8 | body
//!   flatten: (empty)
//!   dense:   activation u8 | in u32 | out u32 | weights f64* | bias f64*
//!   gru:     in u32 | hidden u32 | w_z u_z b_z w_r u_r b_r w_h u_h b_h (f64*)
//! ```
//! Integers and floats are little-endian.

use alloc::vec::Vec;

use super::activation::Activation;
use super::dense::DenseParams;
use super::gru::GruParams;
use super::matrix::Matrix2D;
use super::network::{LayerParams, LayerSpec, Network, NetworkSpec};

pub const MAGIC: [u8; 4] = *b"ADRL";
pub const FORMAT_VERSION: u8 = 1;

const KIND_FLATTEN: u8 = 0;
const KIND_DENSE: u8 = 1;
const KIND_GRU: u8 = 2;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CodecErrorKind {
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("unexpected end of stream")]
    Truncated,
    #[error("invalid layer kind tag {0}")]
    InvalidLayerKind(u8),
    #[error("invalid activation tag {0}")]
    InvalidActivation(u8),
    #[error("record length disagrees with its contents")]
    RecordLength,
    #[error("trailing bytes after last record")]
    TrailingBytes,
    #[error("layer shapes do not form a valid network")]
    InvalidNetwork,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("parameter stream error at byte {offset}: {kind}")]
pub struct CodecError {
    pub offset: usize,
    pub kind: CodecErrorKind,
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

fn put_f64s(out: &mut Vec<u8>, vs: &[f64]) {
    for v in vs {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn save_params(net: &Network) -> Vec<u8> {
    let spec = net.spec();
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    out.push(FORMAT_VERSION);
    put_u32(&mut out, spec.input_width);
    put_u32(&mut out, net.layers().len());
    for layer in net.layers() {
        let mut body = Vec::new();
        match layer {
            LayerParams::Flatten => body.push(KIND_FLATTEN),
            LayerParams::Dense { params, activation } => {
                body.push(KIND_DENSE);
                body.push(activation.tag());
                put_u32(&mut body, params.inputs());
                put_u32(&mut body, params.outputs());
                put_f64s(&mut body, params.weights.as_slice());
                put_f64s(&mut body, &params.bias);
            }
            LayerParams::Gru(g) => {
                body.push(KIND_GRU);
                put_u32(&mut body, g.inputs());
                put_u32(&mut body, g.hidden());
                for s in g.slices() {
                    put_f64s(&mut body, s);
                }
            }
        }
        put_u32(&mut out, body.len());
        out.extend_from_slice(&body);
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, kind: CodecErrorKind) -> CodecError {
        CodecError { offset: self.pos, kind }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or(self.err(CodecErrorKind::Truncated))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize, CodecError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, CodecError> {
        let bytes = self.take(n.checked_mul(8).ok_or(self.err(CodecErrorKind::Truncated))?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes([c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7]]))
            .collect())
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<Matrix2D, CodecError> {
        let at = self.pos;
        let data = self.f64s(rows.checked_mul(cols).ok_or(self.err(CodecErrorKind::Truncated))?)?;
        Matrix2D::new(rows, cols, data).map_err(|_| CodecError { offset: at, kind: CodecErrorKind::InvalidNetwork })
    }
}

/// Parses a stream written by [`save_params`]. Nothing is returned unless the
/// whole stream is valid.
pub fn load_params(bytes: &[u8]) -> Result<Network, CodecError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4).map_err(|_| CodecError { offset: 0, kind: CodecErrorKind::BadMagic })? != MAGIC {
        return Err(CodecError { offset: 0, kind: CodecErrorKind::BadMagic });
    }
    let version = r.u8()?;
    if version != FORMAT_VERSION {
        return Err(CodecError { offset: 4, kind: CodecErrorKind::UnsupportedVersion(version) });
    }
    let input_width = r.u32()?;
    let count = r.u32()?;
    let mut specs = Vec::new();
    let mut layers = Vec::new();
    for _ in 0..count {
        let len = r.u32()?;
        let start = r.pos;
        let kind = r.u8()?;
        match kind {
            KIND_FLATTEN => {
                specs.push(LayerSpec::Flatten);
                layers.push(LayerParams::Flatten);
            }
            KIND_DENSE => {
                let tag = r.u8()?;
                let activation =
                    Activation::from_tag(tag).ok_or(CodecError { offset: r.pos - 1, kind: CodecErrorKind::InvalidActivation(tag) })?;
                let inputs = r.u32()?;
                let outputs = r.u32()?;
                let weights = r.matrix(outputs, inputs)?;
                let bias = r.f64s(outputs)?;
                specs.push(LayerSpec::Dense { units: outputs, activation });
                layers.push(LayerParams::Dense { params: DenseParams { weights, bias }, activation });
            }
            KIND_GRU => {
                let inputs = r.u32()?;
                let hidden = r.u32()?;
                let mut g = GruParams::zeros(0, 0);
                g.w_z = r.matrix(hidden, inputs)?;
                g.u_z = r.matrix(hidden, hidden)?;
                g.b_z = r.f64s(hidden)?;
                g.w_r = r.matrix(hidden, inputs)?;
                g.u_r = r.matrix(hidden, hidden)?;
                g.b_r = r.f64s(hidden)?;
                g.w_h = r.matrix(hidden, inputs)?;
                g.u_h = r.matrix(hidden, hidden)?;
                g.b_h = r.f64s(hidden)?;
                specs.push(LayerSpec::Gru { hidden });
                layers.push(LayerParams::Gru(g));
            }
            other => return Err(CodecError { offset: start, kind: CodecErrorKind::InvalidLayerKind(other) }),
        }
        if r.pos - start != len {
            return Err(CodecError { offset: start, kind: CodecErrorKind::RecordLength });
        }
    }
    if r.pos != bytes.len() {
        return Err(r.err(CodecErrorKind::TrailingBytes));
    }
    let invalid = CodecError { offset: 9, kind: CodecErrorKind::InvalidNetwork };
    let spec = NetworkSpec::new(input_width, specs).map_err(|_| invalid.clone())?;
    Network::from_layers(spec, layers).map_err(|_| invalid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use alloc::vec;

    fn recurrent() -> Network {
        let spec = NetworkSpec::new(
            4,
            vec![
                LayerSpec::Flatten,
                LayerSpec::Gru { hidden: 3 },
                LayerSpec::Dense { units: 5, activation: Activation::Relu },
                LayerSpec::Dense { units: 2, activation: Activation::Softmax },
            ],
        )
        .unwrap();
        Network::new(spec, &mut seeded(11, 0)).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let net = recurrent();
        let bytes = save_params(&net);
        let back = load_params(&bytes).unwrap();
        assert_eq!(back, net);
        let a: Vec<u64> = net.flat_params().iter().map(|v| v.to_bits()).collect();
        let b: Vec<u64> = back.flat_params().iter().map(|v| v.to_bits()).collect();
        assert_eq!(a, b);
        assert_eq!(save_params(&back), bytes);
    }

    #[test]
    fn every_truncation_is_an_error() {
        let bytes = save_params(&recurrent());
        for n in 0..bytes.len() {
            assert!(load_params(&bytes[..n]).is_err(), "prefix of {n} bytes parsed");
        }
    }

    #[test]
    fn version_mismatch_is_explicit() {
        let mut bytes = save_params(&recurrent());
        bytes[4] = 9;
        assert_eq!(
            load_params(&bytes).unwrap_err(),
            CodecError { offset: 4, kind: CodecErrorKind::UnsupportedVersion(9) }
        );
    }

    #[test]
    fn bad_magic_and_trailing_bytes() {
        let mut bytes = save_params(&recurrent());
        bytes.push(0);
        assert_eq!(load_params(&bytes).unwrap_err().kind, CodecErrorKind::TrailingBytes);
        bytes[0] = b'X';
        assert_eq!(load_params(&bytes).unwrap_err().kind, CodecErrorKind::BadMagic);
    }

    #[test]
    fn unknown_layer_kind_reports_offset() {
        let mut bytes = save_params(&recurrent());
        bytes[17] = 7;
        assert_eq!(
            load_params(&bytes).unwrap_err(),
            CodecError { offset: 17, kind: CodecErrorKind::InvalidLayerKind(7) }
        );
    }
}
