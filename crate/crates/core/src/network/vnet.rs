//! The native text network format.
//!
//! ```text
//! vnet 1
//! input <m>
//! affine <rows> <cols>
//! <row 1>
//! ...
//! <row rows>
//! <bias>
//! relu
//! ```
//!
//! Numbers are integers, decimals or `p/q`. `#` starts a comment.

use super::{Layer, Network, NetworkError, NetworkModel};
use crate::scalar::{parse_rational, render_rational, Rational};

struct Line<'a> {
    offset: usize,
    words: Vec<&'a str>,
}

fn malformed(offset: usize, message: impl Into<String>) -> NetworkError {
    NetworkError::MalformedNetworkFile { offset, message: message.into() }
}

fn lines(text: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for raw in text.split_inclusive('\n') {
        let content = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = content.split_whitespace().collect();
        if !words.is_empty() {
            out.push(Line { offset, words });
        }
        offset += raw.len();
    }
    out
}

fn number(word: &str, offset: usize) -> Result<Rational, NetworkError> {
    parse_rational(word).ok_or_else(|| malformed(offset, format!("`{word}` is not a number")))
}

fn count(word: Option<&&str>, offset: usize, what: &str) -> Result<usize, NetworkError> {
    word.and_then(|w| w.parse().ok())
        .ok_or_else(|| malformed(offset, format!("expected {what}")))
}

pub fn parse_vnet(bytes: &[u8]) -> Result<Network, NetworkError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| malformed(e.valid_up_to(), "file is not UTF-8"))?;
    let lines = lines(text);
    let mut iter = lines.iter().peekable();
    let end = bytes.len();

    let header = iter.next().ok_or_else(|| malformed(0, "empty file"))?;
    if header.words != ["vnet", "1"] {
        return Err(malformed(header.offset, "expected header `vnet 1`"));
    }
    let input = iter.next().ok_or_else(|| malformed(end, "expected `input <m>`"))?;
    if input.words.len() != 2 || input.words[0] != "input" {
        return Err(malformed(input.offset, "expected `input <m>`"));
    }
    let input_size = count(input.words.get(1), input.offset, "input width")?;

    let mut layers = Vec::new();
    let mut width = input_size;
    while let Some(line) = iter.next() {
        match line.words[0] {
            "relu" if line.words.len() == 1 => layers.push(Layer::Relu),
            "affine" if line.words.len() == 3 => {
                let rows = count(line.words.get(1), line.offset, "row count")?;
                let cols = count(line.words.get(2), line.offset, "column count")?;
                if cols != width {
                    return Err(malformed(
                        line.offset,
                        format!("affine layer takes {cols} inputs but the previous width is {width}"),
                    ));
                }
                let mut read_row = |len: usize, what: &str| -> Result<Vec<Rational>, NetworkError> {
                    let row = iter.next().ok_or_else(|| malformed(end, format!("missing {what}")))?;
                    if row.words.len() != len {
                        return Err(malformed(
                            row.offset,
                            format!("{what} has {} entries, expected {len}", row.words.len()),
                        ));
                    }
                    row.words.iter().map(|w| number(w, row.offset)).collect()
                };
                let weights = (0..rows).map(|_| read_row(cols, "weight row")).collect::<Result<Vec<_>, _>>()?;
                let bias = read_row(rows, "bias line")?;
                layers.push(Layer::Affine { weights, bias });
                width = rows;
            }
            other => return Err(malformed(line.offset, format!("unexpected `{other}`"))),
        }
    }
    NetworkModel::new(input_size, layers).map_err(|m| malformed(0, m))
}

/// Serialises a model in the native format.
pub fn write_vnet(model: &Network) -> String {
    let mut out = format!("vnet 1\ninput {}\n", model.input_size);
    for layer in &model.layers {
        match layer {
            Layer::Relu => out.push_str("relu\n"),
            Layer::Affine { weights, bias } => {
                let cols = weights.first().map_or(0, |r| r.len());
                out.push_str(&format!("affine {} {cols}\n", weights.len()));
                for row in weights.iter().chain(std::iter::once(bias)) {
                    let cells: Vec<String> = row.iter().map(render_rational).collect();
                    out.push_str(&cells.join(" "));
                    out.push('\n');
                }
            }
        }
    }
    out
}
