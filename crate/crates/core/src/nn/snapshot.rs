//! Parameter snapshot files.
//!
//! Layout: one ASCII header line `mlp <dims joined by 'x'> <hidden> <output>\n`
//! followed by every parameter as a little-endian `f64`, layer by layer,
//! weights in row-major `(out, in)` order and then the bias.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Activation, Mlp};
use crate::error::{Error, Result};

pub fn write_snapshot<W: Write>(net: &Mlp, mut out: W) -> Result<()> {
    let dims = net.dims().iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x");
    writeln!(out, "mlp {dims} {} {}", net.hidden_activation(), net.output_activation())?;
    for v in net.parameters() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_snapshot<R: BufRead>(mut input: R) -> Result<Mlp> {
    let mut header = String::new();
    input.read_line(&mut header)?;
    let header = header
        .strip_suffix('\n')
        .ok_or_else(|| Error::Parse("snapshot header is not newline-terminated".into()))?;
    let fields: Vec<&str> = header.split(' ').collect();
    if fields.len() != 4 || fields[0] != "mlp" {
        return Err(Error::Parse(format!("bad snapshot header `{header}`")));
    }
    let dims = fields[1]
        .split('x')
        .map(|d| d.parse::<usize>().map_err(|e| Error::Parse(format!("layer width `{d}`: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let hidden: Activation = fields[2].parse()?;
    let output: Activation = fields[3].parse()?;
    let mut net = Mlp::zeros(&dims, hidden, output)?;

    let mut values = Vec::with_capacity(net.parameter_count());
    let mut buf = [0u8; 8];
    for _ in 0..net.parameter_count() {
        input
            .read_exact(&mut buf)
            .map_err(|e| Error::Parse(format!("truncated snapshot: {e}")))?;
        values.push(f64::from_le_bytes(buf));
    }
    if input.read(&mut buf)? != 0 {
        return Err(Error::Parse("trailing bytes after snapshot parameters".into()));
    }
    net.set_parameters(&values);
    Ok(net)
}

pub fn save_snapshot(net: &Mlp, path: &Path) -> Result<()> {
    write_snapshot(net, BufWriter::new(File::create(path)?))
}

pub fn load_snapshot(path: &Path) -> Result<Mlp> {
    read_snapshot(BufReader::new(File::open(path)?))
}
