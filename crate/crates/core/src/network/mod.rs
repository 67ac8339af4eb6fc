//! Feed-forward network models: loading, hashing and type analysis.

pub mod analysis;
pub mod digest;
pub mod onnx;
pub mod vnet;

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::scalar::{Rational, Scalar};

pub use analysis::{analyze_network_types, analyze_with_models, AnalysisError, NetworkContext, NetworkEntry};
pub use digest::{hash_bytes, hash_file, Digest};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Layer<T> {
    /// `weights` is `out × in`.
    Affine { weights: Vec<Vec<T>>, bias: Vec<T> },
    Relu,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkModel<T> {
    pub input_size: usize,
    pub output_size: usize,
    pub layers: Vec<Layer<T>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("unsupported network file format")]
    UnsupportedFormat,
    #[error("malformed network file at byte {offset}: {message}")]
    MalformedNetworkFile { offset: usize, message: String },
    #[error("unsupported operator `{0}`")]
    UnsupportedOperator(String),
    #[error("malformed protobuf at byte {offset}: {message}")]
    MalformedProtobuf { offset: usize, message: String },
    #[error("tensor `{name}` has element type {data_type}, expected float")]
    NonFloatTensor { name: String, data_type: u64 },
    #[error("tensor `{name}` contains a NaN or infinite weight")]
    NaNOrInfWeight { name: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

impl<T: Scalar> NetworkModel<T> {
    /// Builds a model, checking that layer widths compose.
    pub fn new(input_size: usize, layers: Vec<Layer<T>>) -> Result<Self, String> {
        let mut width = input_size;
        for (i, layer) in layers.iter().enumerate() {
            if let Layer::Affine { weights, bias } = layer {
                if weights.len() != bias.len() {
                    return Err(format!("layer {i}: {} rows but {} bias entries", weights.len(), bias.len()));
                }
                if let Some(row) = weights.iter().find(|r| r.len() != width) {
                    return Err(format!("layer {i}: row has {} columns, expected {width}", row.len()));
                }
                width = weights.len();
            }
        }
        Ok(NetworkModel { input_size, output_size: width, layers })
    }

    pub fn eval(&self, input: &[T]) -> Vec<T> {
        assert_eq!(input.len(), self.input_size, "input width");
        let mut current = input.to_vec();
        for layer in &self.layers {
            current = match layer {
                Layer::Affine { weights, bias } => weights
                    .iter()
                    .zip(bias)
                    .map(|(row, b)| {
                        row.iter()
                            .zip(&current)
                            .fold(b.clone(), |acc, (w, v)| acc + w.clone() * v.clone())
                    })
                    .collect(),
                Layer::Relu => current
                    .into_iter()
                    .map(|v| T::max_of(v, T::zero()))
                    .collect(),
            };
        }
        current
    }

    /// Width of the value entering each layer, plus the final width.
    pub fn widths(&self) -> Vec<usize> {
        let mut out = vec![self.input_size];
        let mut width = self.input_size;
        for layer in &self.layers {
            if let Layer::Affine { weights, .. } = layer {
                width = weights.len();
            }
            out.push(width);
        }
        out
    }

    /// Total number of ReLU units.
    pub fn relu_count(&self) -> usize {
        let widths = self.widths();
        self.layers
            .iter()
            .enumerate()
            .filter(|(_, l)| matches!(l, Layer::Relu))
            .map(|(i, _)| widths[i])
            .sum()
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U + Copy) -> NetworkModel<U> {
        NetworkModel {
            input_size: self.input_size,
            output_size: self.output_size,
            layers: self
                .layers
                .iter()
                .map(|l| match l {
                    Layer::Affine { weights, bias } => Layer::Affine {
                        weights: weights.iter().map(|r| r.iter().map(f).collect()).collect(),
                        bias: bias.iter().map(f).collect(),
                    },
                    Layer::Relu => Layer::Relu,
                })
                .collect(),
        }
    }
}

/// Exact-rational network, the form used throughout the compiler.
pub type Network = NetworkModel<Rational>;

/// Decodes network bytes, choosing the format from the content.
pub fn decode_network(bytes: &[u8]) -> Result<Network, NetworkError> {
    let Some(&first) = bytes.iter().find(|b| !b.is_ascii_whitespace()) else {
        return Err(NetworkError::MalformedNetworkFile { offset: 0, message: "empty file".into() });
    };
    if first == b'#' || bytes.trim_ascii_start().starts_with(b"vnet") {
        return vnet::parse_vnet(bytes);
    }
    // a protobuf message starts with a field tag; ONNX models open with a
    // low-numbered varint or length-delimited field
    let wire = bytes[0] & 0x7;
    let field = bytes[0] >> 3;
    if matches!(wire, 0 | 2) && (1..=15).contains(&field) {
        return onnx::decode_onnx_subset(bytes);
    }
    Err(NetworkError::UnsupportedFormat)
}

pub fn load_network(path: &Path) -> Result<Network, NetworkError> {
    let bytes = fs::read(path).map_err(|e| NetworkError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    decode_network(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn identity() -> Network {
        NetworkModel::new(
            1,
            vec![
                Layer::Affine { weights: vec![vec![int(1)], vec![int(-1)]], bias: vec![int(0), int(0)] },
                Layer::Relu,
                Layer::Affine { weights: vec![vec![int(1), int(-1)]], bias: vec![int(0)] },
            ],
        )
        .unwrap()
    }

    #[test]
    fn relu_pair_is_identity() {
        let net = identity();
        assert_eq!((net.input_size, net.output_size, net.relu_count()), (1, 1, 2));
        for x in [-2, 0, 3] {
            assert_eq!(net.eval(&[int(x)]), vec![int(x)]);
        }
    }

    #[test]
    fn float_instantiation_agrees() {
        let net = identity().map(|q| f64::from_rational(q));
        assert_eq!(net.eval(&[-2.5]), vec![-2.5]);
    }

    #[test]
    fn width_mismatch_is_rejected() {
        let err = NetworkModel::new(2, vec![Layer::Affine { weights: vec![vec![int(1)]], bias: vec![int(0)] }]);
        assert!(err.is_err());
    }

    #[test]
    fn empty_and_unknown_files() {
        assert!(matches!(decode_network(b""), Err(NetworkError::MalformedNetworkFile { .. })));
        assert!(matches!(decode_network(b"  \n"), Err(NetworkError::MalformedNetworkFile { .. })));
        assert_eq!(decode_network(b"\xff\xfe"), Err(NetworkError::UnsupportedFormat));
    }
}
