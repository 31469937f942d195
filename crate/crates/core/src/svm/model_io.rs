//! Line-oriented text format for [`SvmModel`].
//!
//! ```text
//! trollscope-svm v1
//! fingerprint <hex or ->
//! c <C>
//! gamma <gamma>
//! bias <b>
//! converged <true|false> <iterations>
//! meta <key> <value>            (zero or more)
//! dimension <d>
//! min <d values>
//! max <d values>
//! support_vectors <m>
//! sv <coef> <d values>          (m lines)
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so reading a saved model
//! reproduces it bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{KernelParams, NormalizationParams, SvmModel};
use crate::error::{Error, Result};

pub const MODEL_HEADER: &str = "trollscope-svm v1";

fn join(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{v:?}");
    }
    s
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::ModelFormat(format!("line {line}: {msg}"))
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        let (i, l) = self
            .inner
            .next()
            .ok_or_else(|| Error::ModelFormat(format!("unexpected end after line {}", self.last)))?;
        self.last = i + 1;
        Ok((i + 1, l))
    }

    /// Next line, which must start with `key`; returns the rest.
    fn field(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, l) = self.next_line()?;
        match l.split_once(' ') {
            Some((k, rest)) if k == key => Ok((n, rest)),
            _ if l == key => Ok((n, "")),
            _ => Err(bad(n, format_args!("expected {key:?}"))),
        }
    }
}

fn parse_f64(n: usize, s: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| bad(n, format_args!("bad number {s:?}")))?;
    if !v.is_finite() {
        return Err(bad(n, format_args!("non-finite number {s:?}")));
    }
    Ok(v)
}

fn parse_values(n: usize, s: &str, dim: usize) -> Result<Vec<f64>> {
    let values: Vec<f64> = s
        .split_ascii_whitespace()
        .map(|t| parse_f64(n, t))
        .collect::<Result<_>>()?;
    if values.len() != dim {
        return Err(bad(n, format_args!("expected {dim} values, found {}", values.len())));
    }
    Ok(values)
}

impl SvmModel {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let fp = if self.fingerprint.is_empty() { "-" } else { &self.fingerprint };
        let _ = writeln!(s, "{MODEL_HEADER}");
        let _ = writeln!(s, "fingerprint {fp}");
        let _ = writeln!(s, "c {:?}", self.c);
        let _ = writeln!(s, "gamma {:?}", self.kernel.gamma);
        let _ = writeln!(s, "bias {:?}", self.bias);
        let _ = writeln!(s, "converged {} {}", self.converged, self.iterations);
        for (k, v) in &self.metadata {
            let _ = writeln!(s, "meta {k} {v}");
        }
        let _ = writeln!(s, "dimension {}", self.dimension());
        let _ = writeln!(s, "min {}", join(&self.normalization.min));
        let _ = writeln!(s, "max {}", join(&self.normalization.max));
        let _ = writeln!(s, "support_vectors {}", self.support_vectors.len());
        for (sv, a) in self.support_vectors.iter().zip(&self.coefficients) {
            if sv.is_empty() {
                let _ = writeln!(s, "sv {a:?}");
            } else {
                let _ = writeln!(s, "sv {a:?} {}", join(sv));
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = Lines {
            inner: text.lines().enumerate(),
            last: 0,
        };
        let (n, header) = lines.next_line()?;
        if header != MODEL_HEADER {
            return Err(bad(n, format_args!("expected header {MODEL_HEADER:?}")));
        }
        let (_, fp) = lines.field("fingerprint")?;
        let fingerprint = if fp == "-" { String::new() } else { fp.to_string() };
        let (n, c) = lines.field("c")?;
        let c = parse_f64(n, c)?;
        let (n, g) = lines.field("gamma")?;
        let kernel = KernelParams { gamma: parse_f64(n, g)? };
        kernel.validate().map_err(|e| bad(n, e))?;
        let (n, b) = lines.field("bias")?;
        let bias = parse_f64(n, b)?;
        let (n, conv) = lines.field("converged")?;
        let (converged, iterations) = conv
            .split_once(' ')
            .and_then(|(a, b)| Some((a.parse::<bool>().ok()?, b.parse::<usize>().ok()?)))
            .ok_or_else(|| bad(n, "expected `converged <bool> <iterations>`"))?;

        let mut metadata = BTreeMap::new();
        let (mut n, mut line) = lines.next_line()?;
        while let Some(rest) = line.strip_prefix("meta ") {
            let (k, v) = rest.split_once(' ').unwrap_or((rest, ""));
            metadata.insert(k.to_string(), v.to_string());
            (n, line) = lines.next_line()?;
        }
        let dim: usize = line
            .strip_prefix("dimension ")
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| bad(n, "expected `dimension <d>`"))?;
        let (n, min) = lines.field("min")?;
        let min = parse_values(n, min, dim)?;
        let (n, max) = lines.field("max")?;
        let max = parse_values(n, max, dim)?;
        if min.iter().zip(&max).any(|(lo, hi)| lo > hi) {
            return Err(bad(n, "normalization min exceeds max"));
        }
        let (n, m) = lines.field("support_vectors")?;
        let m: usize = m.parse().map_err(|_| bad(n, "bad support vector count"))?;
        let mut support_vectors = Vec::with_capacity(m);
        let mut coefficients = Vec::with_capacity(m);
        for _ in 0..m {
            let (n, rest) = lines.field("sv")?;
            let mut values = parse_values(n, rest, dim + 1)?;
            coefficients.push(values.remove(0));
            support_vectors.push(values);
        }
        if let Some((n, extra)) = lines.inner.find(|(_, l)| !l.trim().is_empty()) {
            return Err(bad(n + 1, format_args!("trailing content {extra:?}")));
        }
        Ok(SvmModel {
            support_vectors,
            coefficients,
            bias,
            c,
            kernel,
            normalization: NormalizationParams { min, max },
            fingerprint,
            metadata,
            iterations,
            converged,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}
