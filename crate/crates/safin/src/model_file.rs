//! Text container for trained networks.
//!
//! ```text
//! safin-mlp 1
//! sizes 7 64 64 1
//! activations tanh identity
//! input_mean ...
//! input_scale ...
//! output_mean ...
//! output_scale ...
//! layer 0
//! w ...            one line per output unit, `inputs` values each
//! b ...
//! layer 1
//! ...
//! crc32 1a2b3c4d   over every byte before this line
//! ```
//!
//! Floats are written in shortest round-trip form, so a save/load cycle is exact.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use safin_core::mlp::{Activation, Layer, MlpModel, Normalizer};

use crate::format::{parse_f64, FormatError};

const MAGIC: &str = "safin-mlp";
const VERSION: u32 = 1;

fn push_row(out: &mut String, key: &str, values: &[f64]) {
    out.push_str(key);
    for v in values {
        write!(out, " {v}").unwrap();
    }
    out.push('\n');
}

pub fn encode_model(m: &MlpModel) -> String {
    let mut out = String::new();
    writeln!(out, "{MAGIC} {VERSION}").unwrap();
    let sizes: Vec<String> = m.sizes().iter().map(|s| s.to_string()).collect();
    writeln!(out, "sizes {}", sizes.join(" ")).unwrap();
    writeln!(out, "activations {} {}", m.hidden.as_str(), m.output.as_str()).unwrap();
    push_row(&mut out, "input_mean", &m.input_norm.mean);
    push_row(&mut out, "input_scale", &m.input_norm.scale);
    push_row(&mut out, "output_mean", &m.output_norm.mean);
    push_row(&mut out, "output_scale", &m.output_norm.scale);
    for (i, l) in m.layers.iter().enumerate() {
        writeln!(out, "layer {i}").unwrap();
        for row in l.weights.chunks(l.inputs.max(1)) {
            push_row(&mut out, "w", row);
        }
        push_row(&mut out, "b", &l.bias);
    }
    let crc = crc32fast::hash(out.as_bytes());
    writeln!(out, "crc32 {crc:08x}").unwrap();
    out
}

struct Lines<'a> {
    text: &'a str,
    pos: usize,
    line: u64,
}

impl<'a> Lines<'a> {
    /// Next line, which must start with `want`, as (line number, byte offset of its start, rest of the line).
    fn next(&mut self, want: &str) -> Result<(u64, usize, &'a str), FormatError> {
        if self.pos >= self.text.len() {
            return Err(FormatError::new(self.line + 1, format!("unexpected end of file, expected `{want}`")));
        }
        let start = self.pos;
        let rest = &self.text[start..];
        let len = rest.find('\n').map_or(rest.len(), |i| i + 1);
        self.pos += len;
        self.line += 1;
        let content = rest[..len].trim_end_matches(['\n', '\r']);
        let (key, tail) = content.split_once(' ').unwrap_or((content, ""));
        if key != want {
            return Err(FormatError::new(self.line, format!("expected `{want}`, found `{key}`")));
        }
        Ok((self.line, start, tail))
    }

    fn floats(&mut self, key: &str, n: usize) -> Result<Vec<f64>, FormatError> {
        let (line, _, tail) = self.next(key)?;
        let vals = tail.split_whitespace().map(|s| parse_f64(s, line, key)).collect::<Result<Vec<_>, _>>()?;
        if vals.len() != n {
            return Err(FormatError::field(line, key, format!("expected {n} values, found {}", vals.len())));
        }
        Ok(vals)
    }
}

pub fn decode_model(text: &str) -> Result<MlpModel, FormatError> {
    let mut lines = Lines { text, pos: 0, line: 0 };
    let (line, _, version) = lines.next(MAGIC)?;
    if version.trim() != VERSION.to_string() {
        return Err(FormatError::field(line, "version", format!("unsupported version `{}`", version.trim())));
    }
    let (line, _, sizes) = lines.next("sizes")?;
    let sizes = sizes
        .split_whitespace()
        .map(|s| s.parse::<usize>().map_err(|_| FormatError::field(line, "sizes", format!("not a layer size: `{s}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(FormatError::field(line, "sizes", "need at least two positive sizes"));
    }
    let (line, _, acts) = lines.next("activations")?;
    let acts: Vec<&str> = acts.split_whitespace().collect();
    let parse_act = |s: Option<&&str>| {
        s.and_then(|s| Activation::parse(s)).ok_or_else(|| FormatError::field(line, "activations", "expected two of `tanh`, `identity`"))
    };
    let (hidden, output) = (parse_act(acts.first())?, parse_act(acts.get(1))?);
    let (din, dout) = (sizes[0], *sizes.last().unwrap());
    let input_norm = Normalizer { mean: lines.floats("input_mean", din)?, scale: lines.floats("input_scale", din)? };
    let output_norm = Normalizer { mean: lines.floats("output_mean", dout)?, scale: lines.floats("output_scale", dout)? };
    let mut layers = Vec::with_capacity(sizes.len() - 1);
    for (i, pair) in sizes.windows(2).enumerate() {
        let (line, _, idx) = lines.next("layer")?;
        if idx.trim() != i.to_string() {
            return Err(FormatError::field(line, "layer", format!("expected layer {i}, found `{}`", idx.trim())));
        }
        let mut weights = Vec::with_capacity(pair[0] * pair[1]);
        for _ in 0..pair[1] {
            weights.extend(lines.floats("w", pair[0])?);
        }
        let bias = lines.floats("b", pair[1])?;
        layers.push(Layer { inputs: pair[0], outputs: pair[1], weights, bias });
    }
    let (line, start, crc) = lines.next("crc32")?;
    let expected = u32::from_str_radix(crc.trim(), 16).map_err(|_| FormatError::field(line, "crc32", "not a hex checksum"))?;
    let actual = crc32fast::hash(&text.as_bytes()[..start]);
    if actual != expected {
        return Err(FormatError::field(line, "crc32", format!("checksum mismatch: file says {expected:08x}, content is {actual:08x}")));
    }
    if !text[lines.pos..].trim().is_empty() {
        return Err(FormatError::new(line + 1, "trailing content after checksum"));
    }
    let model = MlpModel { layers, hidden, output, input_norm, output_norm };
    model.validate().map_err(|e| FormatError::new(0, e.to_string()))?;
    Ok(model)
}

pub fn save_model(path: &Path, m: &MlpModel) -> anyhow::Result<()> {
    std::fs::write(path, encode_model(m)).with_context(|| format!("writing model {}", path.display()))
}

pub fn load_model(path: &Path) -> anyhow::Result<MlpModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading model {}", path.display()))?;
    decode_model(&text).with_context(|| format!("model file {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_exact() {
        let mut m = MlpModel::init(&[3, 4, 2], 7);
        m.input_norm.mean = vec![0.1, -2.5, 1e-300];
        m.output_norm.scale = vec![3.0, 0.7];
        m.layers[1].bias = vec![std::f64::consts::PI, -0.0];
        let text = encode_model(&m);
        assert_eq!(decode_model(&text).unwrap(), m);
    }

    #[test]
    fn corrupted_content_is_rejected() {
        let text = encode_model(&MlpModel::init(&[2, 3, 1], 1));
        let bad = text.replacen("layer 1", "layer 7", 1);
        let err = decode_model(&bad).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("layer"), "{err}");
        let bad = text.replacen("input_scale 1", "input_scale 2", 1);
        let err = decode_model(&bad).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("crc32"));
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let text = "safin-mlp 1\nsizes 2 1\nactivations tanh identity\ninput_mean 0 x\n";
        let err = decode_model(text).unwrap_err();
        assert_eq!((err.line, err.field.as_deref()), (4, Some("input_mean")));
        let err = decode_model("safin-mlp 2\n").unwrap_err();
        assert_eq!(err.field.as_deref(), Some("version"));
        let err = decode_model("safin-mlp 1\nsizes 2 1\n").unwrap_err();
        assert_eq!(err.line, 3);
    }
}
