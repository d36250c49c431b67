//! Fixed protein sequence embeddings, read from TSV or a compact binary
//! format.
//!
//! TSV rows are `protein_id \t v1 \t ... \t vD`. The binary format starts
//! with the magic bytes `PEMB`, a little-endian u32 dimension, then repeated
//! records of `[u16 id length][id bytes][D little-endian f32 values]`.
//! [`read_embeddings`] sniffs the magic to pick the decoder.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

pub const BINARY_MAGIC: &[u8; 4] = b"PEMB";

/// Protein ids plus their embedding rows, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub ids: Vec<String>,
    pub vectors: Array2<f64>,
}

impl EmbeddingTable {
    pub fn new(ids: Vec<String>, vectors: Array2<f64>) -> EmbeddingTable {
        assert_eq!(ids.len(), vectors.nrows());
        EmbeddingTable { ids, vectors }
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn position_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }
}

pub fn read_embeddings_tsv(text: &str) -> Result<EmbeddingTable> {
    let mut ids = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut dim: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let id = fields.next().expect("split yields at least one field");
        if id.is_empty() {
            return Err(Error::parse(line_no, "empty protein id"));
        }
        let row: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::parse(line_no, format!("bad float {f:?}")))
            })
            .collect::<Result<_>>()?;
        if row.is_empty() {
            return Err(Error::parse(line_no, "row has no embedding values"));
        }
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(Error::parse(
                    line_no,
                    format!("row has {} values, expected {d}", row.len()),
                ))
            }
            _ => {}
        }
        if ids.contains(&id.to_string()) {
            return Err(Error::parse(line_no, format!("duplicate protein id {id:?}")));
        }
        ids.push(id.to_string());
        values.extend(row);
    }
    let dim = dim.unwrap_or(0);
    let vectors = Array2::from_shape_vec((ids.len(), dim), values)
        .expect("rows validated to equal width");
    Ok(EmbeddingTable { ids, vectors })
}

pub fn write_embeddings_tsv<W: Write>(mut w: W, table: &EmbeddingTable) -> Result<()> {
    for (i, id) in table.ids.iter().enumerate() {
        write!(w, "{id}")?;
        for v in table.vectors.row(i) {
            write!(w, "\t{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_embeddings_binary(bytes: &[u8]) -> Result<EmbeddingTable> {
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
        let end = *pos + n;
        if end > bytes.len() {
            return Err(Error::invalid("truncated embedding file"));
        }
        let slice = &bytes[*pos..end];
        *pos = end;
        Ok(slice)
    };

    if take(&mut pos, 4)? != BINARY_MAGIC {
        return Err(Error::invalid("missing PEMB magic bytes"));
    }
    let dim = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
    let mut ids = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    while pos < bytes.len() {
        let id_len = u16::from_le_bytes(take(&mut pos, 2)?.try_into().unwrap()) as usize;
        let id = std::str::from_utf8(take(&mut pos, id_len)?)
            .map_err(|_| Error::invalid("protein id is not valid UTF-8"))?
            .to_string();
        let data = take(&mut pos, dim * 4)?;
        values.extend(
            data.chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64),
        );
        ids.push(id);
    }
    let vectors = Array2::from_shape_vec((ids.len(), dim), values).expect("record-sized chunks");
    Ok(EmbeddingTable { ids, vectors })
}

pub fn write_embeddings_binary<W: Write>(mut w: W, table: &EmbeddingTable) -> Result<()> {
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&(table.dim() as u32).to_le_bytes())?;
    for (i, id) in table.ids.iter().enumerate() {
        let id_bytes = id.as_bytes();
        w.write_all(&(id_bytes.len() as u16).to_le_bytes())?;
        w.write_all(id_bytes)?;
        for v in table.vectors.row(i) {
            w.write_all(&(*v as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads a TSV or binary embedding file, deciding by the magic bytes.
pub fn read_embeddings(path: &Path) -> Result<EmbeddingTable> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(BINARY_MAGIC) {
        read_embeddings_binary(&bytes)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::invalid("embedding TSV is not valid UTF-8"))?;
        read_embeddings_tsv(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn sample() -> EmbeddingTable {
        EmbeddingTable::new(
            vec!["p1".into(), "p2".into()],
            array![[0.25, -1.5, 3.0], [0.0, 42.0, -0.125]],
        )
    }

    #[test]
    fn tsv_round_trip() {
        let table = sample();
        let mut buf = Vec::new();
        write_embeddings_tsv(&mut buf, &table).unwrap();
        let back = read_embeddings_tsv(&String::from_utf8(buf).unwrap()).unwrap();
        assert_eq!(back, table);
    }

    #[test]
    fn binary_round_trip() {
        let table = sample(); // values chosen exactly representable in f32
        let mut buf = Vec::new();
        write_embeddings_binary(&mut buf, &table).unwrap();
        let back = read_embeddings_binary(&buf).unwrap();
        assert_eq!(back, table);
    }

    #[test]
    fn tsv_errors() {
        assert!(read_embeddings_tsv("p1\t1.0\np2\t1.0\t2.0").is_err()); // ragged
        assert!(read_embeddings_tsv("p1\tnope").is_err());
        assert!(read_embeddings_tsv("p1\t1.0\np1\t2.0").is_err()); // duplicate id
        assert!(read_embeddings_tsv("").unwrap().is_empty());
    }

    #[test]
    fn binary_errors() {
        assert!(read_embeddings_binary(b"XEMB").is_err());
        let mut buf = Vec::new();
        write_embeddings_binary(&mut buf, &sample()).unwrap();
        buf.truncate(buf.len() - 1);
        assert!(read_embeddings_binary(&buf).is_err());
    }
}
