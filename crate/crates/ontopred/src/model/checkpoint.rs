//! Versioned text checkpoints.
//!
//! Layout: a header line `ONTOPRED v1 N d0 d M seq_dim`, then each tensor as
//! a `name rows cols` line followed by `rows` lines of space-separated
//! row-major values. Floats carry 17 significant digits, enough for an exact
//! f64 round trip.

use std::io::Write;

use ndarray::Array2;

use crate::error::{Error, Result};

use super::ModelParams;

pub const CHECKPOINT_MAGIC: &str = "ONTOPRED v1";

/// Dimensions recorded in a checkpoint header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckpointHeader {
    pub n_terms: usize,
    pub d0: usize,
    pub d: usize,
    pub n_layers: usize,
    pub seq_dim: usize,
}

impl CheckpointHeader {
    pub fn of(params: &ModelParams) -> CheckpointHeader {
        CheckpointHeader {
            n_terms: params.w_embed.nrows(),
            d0: params.w_embed.ncols(),
            d: params.w_proj.ncols(),
            n_layers: params.w_gcn.len(),
            seq_dim: params.w_proj.nrows(),
        }
    }
}

pub fn save_checkpoint<W: Write>(mut w: W, params: &ModelParams) -> Result<()> {
    let h = CheckpointHeader::of(params);
    writeln!(
        w,
        "{CHECKPOINT_MAGIC} {} {} {} {} {}",
        h.n_terms, h.d0, h.d, h.n_layers, h.seq_dim
    )?;
    for (name, tensor) in params.tensors() {
        writeln!(w, "{name} {} {}", tensor.nrows(), tensor.ncols())?;
        for row in tensor.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
    }
    Ok(())
}

pub fn load_checkpoint(text: &str) -> Result<(CheckpointHeader, ModelParams)> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::invalid("empty checkpoint"))?;
    let rest = first.strip_prefix(CHECKPOINT_MAGIC).ok_or_else(|| {
        Error::invalid(format!("checkpoint header must start with {CHECKPOINT_MAGIC:?}"))
    })?;
    let dims: Vec<usize> = rest
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| Error::parse(1, "bad header dimension")))
        .collect::<Result<_>>()?;
    let [n_terms, d0, d, n_layers, seq_dim] = dims[..] else {
        return Err(Error::parse(1, "header needs 5 dimensions"));
    };
    let header = CheckpointHeader {
        n_terms,
        d0,
        d,
        n_layers,
        seq_dim,
    };

    let mut read_tensor = |want_name: &str, rows: usize, cols: usize| -> Result<Array2<f64>> {
        let (line_no, head) = lines
            .next()
            .ok_or_else(|| Error::invalid(format!("checkpoint truncated before {want_name}")))?;
        let mut tok = head.split_whitespace();
        let name = tok.next().unwrap_or_default();
        let got_rows: usize = tok.next().and_then(|t| t.parse().ok()).unwrap_or(0);
        let got_cols: usize = tok.next().and_then(|t| t.parse().ok()).unwrap_or(0);
        if name != want_name || got_rows != rows || got_cols != cols {
            return Err(Error::parse(
                line_no + 1,
                format!("expected `{want_name} {rows} {cols}`, got {head:?}"),
            ));
        }
        let mut values = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (line_no, row) = lines
                .next()
                .ok_or_else(|| Error::invalid(format!("checkpoint truncated inside {want_name}")))?;
            for tok in row.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| Error::parse(line_no + 1, format!("bad float {tok:?}")))?;
                values.push(v);
            }
        }
        if values.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{want_name}: expected {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        Ok(Array2::from_shape_vec((rows, cols), values).expect("checked length"))
    };

    let w_embed = read_tensor("w_embed", n_terms, d0)?;
    let mut w_gcn = Vec::with_capacity(n_layers);
    for l in 0..n_layers {
        let rows = if l == 0 { d0 } else { d };
        w_gcn.push(read_tensor(&format!("w_gcn_{}", l + 1), rows, d)?);
    }
    let w_proj = read_tensor("w_proj", seq_dim, d)?;
    let b_proj = read_tensor("b_proj", 1, d)?;

    Ok((
        header,
        ModelParams {
            w_embed,
            w_gcn,
            w_proj,
            b_proj,
        },
    ))
}
