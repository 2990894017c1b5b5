use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::{EmbeddingDataset, EmbeddingRecord, Split};
use crate::error::{Error, Result};

const FIXED: [&str; 7] = ["record_id", "patient_id", "sex", "age", "cancer_1y", "cancer_2y", "split"];

pub fn load_csv(path: impl AsRef<Path>) -> Result<EmbeddingDataset> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(BufReader::new(f), path)
}

/// Parses CSV from any reader; `path` is used in error messages only.
pub fn read_csv(reader: impl Read, path: impl Into<PathBuf>) -> Result<EmbeddingDataset> {
    let path = path.into();
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.clone(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, format!("unreadable header: {e}")))?
        .clone();
    for (i, name) in FIXED.iter().enumerate() {
        match headers.get(i) {
            Some(h) if h == *name => {}
            Some(h) => return Err(parse_err(1, format!("column {} must be `{name}`, found `{h}`", i + 1))),
            None => return Err(parse_err(1, format!("missing column `{name}`"))),
        }
    }
    let dimension = headers.len() - FIXED.len();
    for (j, h) in headers.iter().skip(FIXED.len()).enumerate() {
        if h != format!("f{j}") {
            return Err(parse_err(1, format!("feature column {j} must be `f{j}`, found `{h}`")));
        }
    }

    let mut records = Vec::new();
    let mut ids = HashSet::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != headers.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields ({dimension} features), found {}", headers.len(), row.len()),
            ));
        }
        let flag = |i: usize| -> Result<u8> {
            match &row[i] {
                "0" => Ok(0),
                "1" => Ok(1),
                v => Err(parse_err(line, format!("{} must be 0 or 1, found `{v}`", FIXED[i]))),
            }
        };
        let num = |i: usize, name: &str| -> Result<f64> {
            let v: f64 = row[i]
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("{name} is not a number: `{}`", &row[i])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(line, format!("{name} is not finite")))
            }
        };
        let record_id = row[0].to_owned();
        if record_id.is_empty() || row[1].is_empty() {
            return Err(parse_err(line, "record_id and patient_id must be non-empty".into()));
        }
        if !ids.insert(record_id.clone()) {
            return Err(parse_err(line, format!("duplicate record_id `{record_id}`")));
        }
        let age = num(3, "age")?;
        let split: Split = row[6].parse().map_err(|m| parse_err(line, m))?;
        let features = (0..dimension)
            .map(|j| num(FIXED.len() + j, &format!("f{j}")))
            .collect::<Result<Vec<_>>>()?;
        let rec = EmbeddingRecord {
            record_id,
            patient_id: row[1].to_owned(),
            sex: flag(2)?,
            age,
            cancer_1y: flag(4)?,
            cancer_2y: flag(5)?,
            split,
            features,
        };
        rec.validate(dimension).map_err(|m| parse_err(line, m))?;
        records.push(rec);
    }
    EmbeddingDataset::new(dimension, records)
}

/// Writes the features as held. Floats use the shortest representation
/// that parses back to the same bits.
pub fn write_csv(dataset: &EmbeddingDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    write_csv_to(dataset, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_csv_to(dataset: &EmbeddingDataset, out: impl Write) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = FIXED.iter().map(|s| s.to_string()).collect();
    header.extend((0..dataset.dimension()).map(|j| format!("f{j}")));
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for r in dataset.records() {
        row.clear();
        row.push(r.record_id.clone());
        row.push(r.patient_id.clone());
        row.push(r.sex.to_string());
        row.push(format!("{:?}", r.age));
        row.push(r.cancer_1y.to_string());
        row.push(r.cancer_2y.to_string());
        row.push(r.split.as_str().to_owned());
        row.extend(r.features.iter().map(|v| format!("{v:?}")));
        w.write_record(&row)?;
    }
    w.flush()
}
