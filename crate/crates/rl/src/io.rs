//! Plain-text network files.
//!
//! ```text
//! mlp tanh
//! sizes 14 256 256 2
//! w 0
//! <one line per input row, values separated by spaces>
//! b 0
//! <one line of biases>
//! ...
//! ```
//!
//! Values use the shortest representation that parses back to the same
//! number, so a save/load round trip is exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::mlp::{Mlp, OutputActivation};
use crate::Real;

#[derive(Debug, Error)]
pub enum NetIoError {
    #[error("cannot access network file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("network file line {line}: {message}")]
    Format { line: usize, message: String },
}

pub fn write_mlp<T: Real, W: Write>(net: &Mlp<T>, mut out: W) -> std::io::Result<()> {
    let act = match net.output {
        OutputActivation::Identity => "identity",
        OutputActivation::Tanh => "tanh",
    };
    writeln!(out, "mlp {act}")?;
    let sizes: Vec<String> = net.sizes().iter().map(|s| s.to_string()).collect();
    writeln!(out, "sizes {}", sizes.join(" "))?;
    for (k, layer) in net.layers.iter().enumerate() {
        writeln!(out, "w {k}")?;
        for row in layer.w.rows() {
            let vals: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", vals.join(" "))?;
        }
        writeln!(out, "b {k}")?;
        let vals: Vec<String> = layer.b.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", vals.join(" "))?;
    }
    Ok(())
}

pub fn read_mlp<T: Real, R: BufRead>(input: R) -> Result<Mlp<T>, NetIoError> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| -> Result<(usize, String), NetIoError> {
        match lines.next() {
            Some((n, Ok(l))) => Ok((n, l)),
            Some((n, Err(e))) => Err(NetIoError::Format {
                line: n,
                message: e.to_string(),
            }),
            None => Err(NetIoError::Format {
                line: 0,
                message: format!("unexpected end of file, expected {what}"),
            }),
        }
    };
    let fail = |line: usize, message: String| NetIoError::Format { line, message };

    let (n, head) = next("header")?;
    let output = match head.trim() {
        "mlp tanh" => OutputActivation::Tanh,
        "mlp identity" => OutputActivation::Identity,
        other => return Err(fail(n, format!("unknown header `{other}`"))),
    };
    let (n, sizes_line) = next("sizes")?;
    let sizes: Vec<usize> = sizes_line
        .strip_prefix("sizes ")
        .ok_or_else(|| fail(n, "expected `sizes ...`".into()))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| fail(n, format!("bad size `{t}`"))))
        .collect::<Result<_, _>>()?;
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(fail(n, "need at least two positive sizes".into()));
    }
    let mut net = Mlp::zeros(&sizes, output);
    let parse_row = |n: usize, line: &str, width: usize| -> Result<Vec<T>, NetIoError> {
        let vals: Vec<T> = line
            .split_whitespace()
            .map(|t| t.parse::<T>().map_err(|_| fail(n, format!("bad number `{t}`"))))
            .collect::<Result<_, _>>()?;
        if vals.len() != width {
            return Err(fail(n, format!("expected {width} values, found {}", vals.len())));
        }
        Ok(vals)
    };
    for k in 0..net.layers.len() {
        let (n, tag) = next("weight block")?;
        if tag.trim() != format!("w {k}") {
            return Err(fail(n, format!("expected `w {k}`")));
        }
        let (rows, cols) = net.layers[k].w.dim();
        for r in 0..rows {
            let (n, line) = next("weight row")?;
            let vals = parse_row(n, &line, cols)?;
            net.layers[k].w.row_mut(r).iter_mut().zip(vals).for_each(|(p, v)| *p = v);
        }
        let (n, tag) = next("bias block")?;
        if tag.trim() != format!("b {k}") {
            return Err(fail(n, format!("expected `b {k}`")));
        }
        let (n, line) = next("bias row")?;
        let vals = parse_row(n, &line, cols)?;
        net.layers[k].b.iter_mut().zip(vals).for_each(|(p, v)| *p = v);
    }
    Ok(net)
}

pub fn save_mlp<T: Real>(net: &Mlp<T>, path: &Path) -> Result<(), NetIoError> {
    let io_err = |source| NetIoError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    write_mlp(net, &mut out).map_err(io_err)?;
    out.flush().map_err(io_err)
}

pub fn load_mlp<T: Real>(path: &Path) -> Result<Mlp<T>, NetIoError> {
    let file = File::open(path).map_err(|source| NetIoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_mlp(BufReader::new(file))
}
