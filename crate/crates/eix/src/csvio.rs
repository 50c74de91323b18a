//! Stream CSV files.
//!
//! Written streams use the header `h,x1,..,xn,label`. Readers accept any
//! header made of an optional `h` column, one or more attribute columns and an
//! optional `label` column, so both generated streams and plain
//! `x1..xn[,label]` files load.

use std::fs::File;
use std::path::Path;

use eix_core::StreamInstance;

use crate::atomic;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedStream {
    pub instances: Vec<StreamInstance>,
    pub attributes: Vec<String>,
    pub labeled: bool,
}

pub fn read_stream(path: &Path) -> Result<LoadedStream> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_stream_from(file)
}

pub fn read_stream_from(reader: impl std::io::Read) -> Result<LoadedStream> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::Data {
            line: 1,
            message: e.to_string(),
        })?
        .clone();

    let mut h_col = None;
    let mut label_col = None;
    let mut attr_cols = Vec::new();
    let mut attributes = Vec::new();
    for (i, name) in header.iter().enumerate() {
        match name {
            "h" if h_col.is_none() => h_col = Some(i),
            "label" if label_col.is_none() => label_col = Some(i),
            _ => {
                attr_cols.push(i);
                attributes.push(name.to_string());
            }
        }
    }
    if attr_cols.is_empty() {
        return Err(Error::Data {
            line: 1,
            message: "header declares no attribute columns".into(),
        });
    }

    let mut instances = Vec::new();
    let mut labeled = label_col.is_some();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Data {
            line: e.position().map_or(row as u64 + 2, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(row as u64 + 2, |p| p.line());
        let bad = |message: String| Error::Data { line, message };

        let h = match h_col {
            Some(i) => record[i]
                .parse::<u64>()
                .map_err(|_| bad(format!("invalid step index {:?}", &record[i])))?,
            None => row as u64 + 1,
        };
        let x = attr_cols
            .iter()
            .map(|&i| {
                let v: f64 = record[i].parse().map_err(|_| {
                    bad(format!(
                        "invalid number {:?} in column {}",
                        &record[i], &header[i]
                    ))
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(bad(format!(
                        "non-finite value {v} in column {}",
                        &header[i]
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let label = match label_col {
            Some(i) if !record[i].is_empty() => Some(
                record[i]
                    .parse()
                    .map_err(|_| bad(format!("invalid label {:?}", &record[i])))?,
            ),
            _ => None,
        };
        labeled &= label.is_some();
        instances.push(StreamInstance { h, x, label });
    }
    Ok(LoadedStream {
        instances,
        attributes,
        labeled,
    })
}

pub fn stream_to_csv(instances: &[StreamInstance], dims: usize) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["h".to_string()];
    header.extend((1..=dims).map(|j| format!("x{j}")));
    header.push("label".into());
    w.write_record(&header).expect("in-memory write");
    for inst in instances {
        let mut rec = vec![inst.h.to_string()];
        rec.extend(inst.x.iter().map(|v| v.to_string()));
        rec.push(inst.label.map(|l| l.to_string()).unwrap_or_default());
        w.write_record(&rec).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn write_stream(path: &Path, instances: &[StreamInstance], dims: usize) -> Result<()> {
    atomic::write_file(path, &stream_to_csv(instances, dims))
}
