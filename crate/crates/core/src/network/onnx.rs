//! Decoder for the ONNX operator subset used by dense ReLU networks.
//!
//! Only the protobuf features needed to walk `ModelProto -> GraphProto` are
//! implemented. Supported node chains are `Gemm` or `MatMul` (optionally
//! followed by `Add`) alternating with `Relu`; a `Flatten` is absorbed.

use std::collections::HashMap;

use num_traits::Zero;

use super::{Layer, Network, NetworkError, NetworkModel};
use crate::scalar::{rational_from_f32, Rational};

const FLOAT: u64 = 1;

#[derive(Debug, Clone)]
enum Value<'a> {
    Varint(u64),
    Fixed64,
    Bytes(&'a [u8], usize),
    Fixed32(u32),
}

/// Streaming reader over one protobuf message.
struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    /// Offset of `buf` within the whole file, for error messages.
    base: usize,
}

fn bad(offset: usize, message: impl Into<String>) -> NetworkError {
    NetworkError::MalformedProtobuf { offset, message: message.into() }
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8], base: usize) -> Self {
        Reader { buf, pos: 0, base }
    }

    fn offset(&self) -> usize {
        self.base + self.pos
    }

    fn varint(&mut self) -> Result<u64, NetworkError> {
        let start = self.offset();
        let mut result = 0u64;
        for shift in (0..64).step_by(7) {
            let Some(&byte) = self.buf.get(self.pos) else {
                return Err(bad(start, "truncated varint"));
            };
            self.pos += 1;
            result |= u64::from(byte & 0x7f) << shift;
            if byte & 0x80 == 0 {
                return Ok(result);
            }
        }
        Err(bad(start, "varint longer than 10 bytes"))
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8], NetworkError> {
        let start = self.offset();
        let end = self.pos.checked_add(len).filter(|&e| e <= self.buf.len());
        let Some(end) = end else {
            return Err(bad(start, format!("field of {len} bytes runs past the end")));
        };
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn next_field(&mut self) -> Result<Option<(u64, Value<'a>)>, NetworkError> {
        if self.pos >= self.buf.len() {
            return Ok(None);
        }
        let tag_offset = self.offset();
        let tag = self.varint()?;
        let field = tag >> 3;
        if field == 0 {
            return Err(bad(tag_offset, "field number 0"));
        }
        let value = match tag & 7 {
            0 => Value::Varint(self.varint()?),
            1 => {
                self.take(8)?;
                Value::Fixed64
            }
            2 => {
                let len = self.varint()? as usize;
                let offset = self.offset();
                Value::Bytes(self.take(len)?, offset)
            }
            5 => {
                let b = self.take(4)?;
                Value::Fixed32(u32::from_le_bytes(b.try_into().unwrap()))
            }
            w => return Err(bad(tag_offset, format!("unsupported wire type {w}"))),
        };
        Ok(Some((field, value)))
    }

    fn fields(mut self) -> Result<Vec<(u64, Value<'a>)>, NetworkError> {
        let mut out = Vec::new();
        while let Some(f) = self.next_field()? {
            out.push(f);
        }
        Ok(out)
    }
}

fn string(value: &Value<'_>) -> Result<String, NetworkError> {
    match value {
        Value::Bytes(b, offset) => {
            String::from_utf8(b.to_vec()).map_err(|_| bad(*offset, "string is not UTF-8"))
        }
        _ => Err(bad(0, "expected a string field")),
    }
}

fn message<'a>(value: &Value<'a>) -> Result<Reader<'a>, NetworkError> {
    match value {
        Value::Bytes(b, offset) => Ok(Reader::new(b, *offset)),
        _ => Err(bad(0, "expected an embedded message")),
    }
}

#[derive(Debug, Default)]
struct Tensor {
    name: String,
    dims: Vec<usize>,
    values: Vec<Rational>,
}

fn decode_tensor(reader: Reader<'_>) -> Result<Tensor, NetworkError> {
    let mut t = Tensor::default();
    let mut data_type = FLOAT;
    let mut floats: Vec<f32> = Vec::new();
    for (field, value) in reader.fields()? {
        match (field, &value) {
            (1, Value::Varint(d)) => t.dims.push(*d as usize),
            (1, Value::Bytes(..)) => {
                let mut packed = message(&value)?;
                while packed.pos < packed.buf.len() {
                    t.dims.push(packed.varint()? as usize);
                }
            }
            (2, Value::Varint(d)) => data_type = *d,
            (4, Value::Fixed32(bits)) => floats.push(f32::from_bits(*bits)),
            (4 | 9, Value::Bytes(b, offset)) => {
                if b.len() % 4 != 0 {
                    return Err(bad(*offset, "float data length is not a multiple of 4"));
                }
                floats.extend(b.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())));
            }
            (8, _) => t.name = string(&value)?,
            _ => {}
        }
    }
    if data_type != FLOAT {
        return Err(NetworkError::NonFloatTensor { name: t.name, data_type });
    }
    t.values = floats
        .into_iter()
        .map(|f| rational_from_f32(f).ok_or_else(|| NetworkError::NaNOrInfWeight { name: t.name.clone() }))
        .collect::<Result<_, _>>()?;
    let expected: usize = t.dims.iter().product();
    if expected != t.values.len() {
        return Err(bad(0, format!("tensor `{}` has {} values for shape {:?}", t.name, t.values.len(), t.dims)));
    }
    Ok(t)
}

#[derive(Debug, Default)]
struct Node {
    inputs: Vec<String>,
    outputs: Vec<String>,
    op: String,
    ints: HashMap<String, i64>,
    floats: HashMap<String, f32>,
}

fn decode_node(reader: Reader<'_>) -> Result<Node, NetworkError> {
    let mut node = Node::default();
    for (field, value) in reader.fields()? {
        match field {
            1 => node.inputs.push(string(&value)?),
            2 => node.outputs.push(string(&value)?),
            4 => node.op = string(&value)?,
            5 => {
                let mut name = String::new();
                let mut int = None;
                let mut float = None;
                for (f, v) in message(&value)?.fields()? {
                    match (f, v) {
                        (1, v) => name = string(&v)?,
                        (2, Value::Fixed32(bits)) => float = Some(f32::from_bits(bits)),
                        (3, Value::Varint(i)) => int = Some(i as i64),
                        _ => {}
                    }
                }
                if let Some(i) = int {
                    node.ints.insert(name.clone(), i);
                }
                if let Some(f) = float {
                    node.floats.insert(name, f);
                }
            }
            _ => {}
        }
    }
    Ok(node)
}

/// Name and shape of a graph input or output.
fn decode_value_info(reader: Reader<'_>) -> Result<(String, Vec<usize>), NetworkError> {
    let mut name = String::new();
    let mut dims = Vec::new();
    for (field, value) in reader.fields()? {
        match field {
            1 => name = string(&value)?,
            2 => {
                for (f, v) in message(&value)?.fields()? {
                    if f != 1 {
                        continue;
                    }
                    for (f, v) in message(&v)?.fields()? {
                        if f != 2 {
                            continue;
                        }
                        for (f, v) in message(&v)?.fields()? {
                            if f != 1 {
                                continue;
                            }
                            let mut dim = 0;
                            for (f, v) in message(&v)?.fields()? {
                                if let (1, Value::Varint(d)) = (f, v) {
                                    dim = d as usize;
                                }
                            }
                            dims.push(dim);
                        }
                    }
                }
            }
            _ => {}
        }
    }
    Ok((name, dims))
}

fn matrix(t: &Tensor, transpose: bool) -> Result<Vec<Vec<Rational>>, NetworkError> {
    let (rows, cols) = match t.dims.as_slice() {
        [r, c] => (*r, *c),
        other => {
            return Err(NetworkError::MalformedNetworkFile {
                offset: 0,
                message: format!("weight `{}` has shape {other:?}, expected a matrix", t.name),
            })
        }
    };
    let at = |r: usize, c: usize| t.values[r * cols + c].clone();
    Ok(if transpose {
        (0..cols).map(|c| (0..rows).map(|r| at(r, c)).collect()).collect()
    } else {
        (0..rows).map(|r| (0..cols).map(|c| at(r, c)).collect()).collect()
    })
}

fn vector(t: &Tensor, len: usize) -> Result<Vec<Rational>, NetworkError> {
    if t.values.len() != len {
        return Err(NetworkError::MalformedNetworkFile {
            offset: 0,
            message: format!("bias `{}` has {} entries, expected {len}", t.name, t.values.len()),
        });
    }
    Ok(t.values.clone())
}

pub fn decode_onnx_subset(bytes: &[u8]) -> Result<Network, NetworkError> {
    let mut graph = None;
    for (field, value) in Reader::new(bytes, 0).fields()? {
        if field == 7 {
            graph = Some(message(&value)?);
        }
    }
    let graph = graph.ok_or_else(|| bad(bytes.len(), "model has no graph"))?;

    let mut nodes = Vec::new();
    let mut initializers: HashMap<String, Tensor> = HashMap::new();
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for (field, value) in graph.fields()? {
        match field {
            1 => nodes.push(decode_node(message(&value)?)?),
            5 => {
                let t = decode_tensor(message(&value)?)?;
                initializers.insert(t.name.clone(), t);
            }
            11 => inputs.push(decode_value_info(message(&value)?)?),
            12 => outputs.push(decode_value_info(message(&value)?)?),
            _ => {}
        }
    }
    let data_inputs: Vec<_> = inputs.iter().filter(|(n, _)| !initializers.contains_key(n)).collect();
    let [(input_name, input_dims)] = data_inputs.as_slice() else {
        return Err(NetworkError::MalformedNetworkFile {
            offset: 0,
            message: format!("expected exactly one graph input, found {}", data_inputs.len()),
        });
    };
    let [(output_name, _)] = outputs.as_slice() else {
        return Err(NetworkError::MalformedNetworkFile {
            offset: 0,
            message: format!("expected exactly one graph output, found {}", outputs.len()),
        });
    };
    let input_size = input_dims.last().copied().unwrap_or(0);

    let weight = |name: &str| {
        initializers.get(name).ok_or_else(|| NetworkError::MalformedNetworkFile {
            offset: 0,
            message: format!("`{name}` is not an initializer"),
        })
    };
    let unsupported = |node: &Node, what: &str| {
        NetworkError::UnsupportedOperator(format!("{} ({what})", node.op))
    };

    let mut current = input_name.clone();
    let mut layers: Vec<Layer<Rational>> = Vec::new();
    let mut i = 0;
    while i < nodes.len() {
        let node = &nodes[i];
        let data = node.inputs.iter().position(|n| *n == current);
        if !matches!(node.op.as_str(), "Gemm" | "MatMul" | "Add" | "Relu" | "Flatten") {
            return Err(NetworkError::UnsupportedOperator(node.op.clone()));
        }
        let Some(data) = data else {
            return Err(NetworkError::MalformedNetworkFile {
                offset: 0,
                message: format!("node `{}` does not consume `{current}`; only chains are supported", node.op),
            });
        };
        let out = node.outputs.first().cloned().unwrap_or_default();
        match node.op.as_str() {
            "Relu" => layers.push(Layer::Relu),
            "Flatten" => {}
            "Gemm" => {
                if data != 0 {
                    return Err(unsupported(node, "data must be the first operand"));
                }
                let alpha = node.floats.get("alpha").copied().unwrap_or(1.0);
                let beta = node.floats.get("beta").copied().unwrap_or(1.0);
                let trans_a = node.ints.get("transA").copied().unwrap_or(0);
                let trans_b = node.ints.get("transB").copied().unwrap_or(0);
                if alpha != 1.0 || beta != 1.0 || trans_a != 0 || !(0..=1).contains(&trans_b) {
                    return Err(unsupported(node, "unsupported attributes"));
                }
                let b = weight(node.inputs.get(1).map(String::as_str).unwrap_or(""))?;
                let weights = matrix(b, trans_b == 0)?;
                let rows = weights.len();
                let bias = match node.inputs.get(2).filter(|n| !n.is_empty()) {
                    Some(c) => vector(weight(c)?, rows)?,
                    None => vec![Rational::zero(); rows],
                };
                layers.push(Layer::Affine { weights, bias });
            }
            "MatMul" => {
                if data != 0 {
                    return Err(unsupported(node, "data must be the first operand"));
                }
                let b = weight(node.inputs.get(1).map(String::as_str).unwrap_or(""))?;
                let weights = matrix(b, true)?;
                let rows = weights.len();
                let mut bias = vec![Rational::zero(); rows];
                let mut out = out.clone();
                if let Some(next) = nodes.get(i + 1).filter(|n| n.op == "Add") {
                    if let Some(pos) = next.inputs.iter().position(|n| *n == out) {
                        let other = next.inputs.iter().enumerate().find(|(j, _)| *j != pos);
                        let other = other.map(|(_, n)| n.as_str()).unwrap_or("");
                        bias = vector(weight(other)?, rows)?;
                        out = next.outputs.first().cloned().unwrap_or_default();
                        i += 1;
                    }
                }
                layers.push(Layer::Affine { weights, bias });
                current = out;
                i += 1;
                continue;
            }
            _ => return Err(unsupported(node, "must follow MatMul")),
        }
        current = out;
        i += 1;
    }
    if current != *output_name {
        return Err(NetworkError::MalformedNetworkFile {
            offset: 0,
            message: format!("graph output `{output_name}` is not produced by the node chain"),
        });
    }
    let input_size = if input_size == 0 {
        layers
            .iter()
            .find_map(|l| match l {
                Layer::Affine { weights, .. } => weights.first().map(|r| r.len()),
                Layer::Relu => None,
            })
            .unwrap_or(0)
    } else {
        input_size
    };
    NetworkModel::new(input_size, layers)
        .map_err(|message| NetworkError::MalformedNetworkFile { offset: 0, message })
}
