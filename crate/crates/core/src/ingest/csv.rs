//! Headed, comma-delimited CSV with per-column type inference.
//!
//! Without a declared schema a column is numeric when every value parses as
//! a finite real, nominal otherwise; the last column is the class. Nominal
//! domains list tokens in order of first appearance.

use std::fs::File;
use std::io::{BufReader, Read, Write};

use ::csv::{ReaderBuilder, StringRecord, Trim, WriterBuilder};

use crate::error::{Error, Result};
use crate::ingest::{is_missing, parse_numeric, DatasetSource};
use crate::scalar::Scalar;
use crate::schema::{AttributeDescriptor, Instance, Role, Schema, Value};

pub fn load_csv<T: Scalar>(source: &DatasetSource) -> Result<(Schema, Vec<Instance<T>>)> {
    let file = File::open(&source.path).map_err(|e| Error::io(&source.path, e))?;
    read_csv(BufReader::new(file), source.declared_schema.as_ref(), None)
}

fn csv_error(e: ::csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    let message = match e.kind() {
        ::csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("ragged row: expected {expected_len} fields, found {len}")
        }
        _ => e.to_string(),
    };
    Error::parse(line, message)
}

pub fn read_csv<T: Scalar, R: Read>(
    reader: R,
    declared: Option<&Schema>,
    limit: Option<usize>,
) -> Result<(Schema, Vec<Instance<T>>)> {
    let mut rdr = ReaderBuilder::new()
        .has_headers(true)
        .trim(Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::parse(1, "missing header row"));
    }

    let mut rows: Vec<(u64, StringRecord)> = Vec::new();
    for record in rdr.records() {
        if limit.is_some_and(|l| rows.len() >= l) {
            break;
        }
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if let Some(col) = record.iter().position(is_missing) {
            return Err(Error::parse(line, format!("missing value in column `{}`", &header[col])));
        }
        rows.push((line, record));
    }
    if rows.is_empty() {
        return Err(Error::parse(1, "no data rows"));
    }

    let schema = match declared {
        Some(d) if d.len() != header.len() => {
            return Err(Error::parse(
                1,
                format!("declared schema has {} attributes, file has {}", d.len(), header.len()),
            ))
        }
        Some(d) => d.clone(),
        None => infer_schema(&header, &rows)?,
    };

    let instances = rows
        .iter()
        .enumerate()
        .map(|(seq, (line, record))| {
            let values = schema
                .attributes()
                .iter()
                .zip(record.iter())
                .map(|(attr, tok)| match attr.role {
                    Role::NumericFeature => parse_numeric(tok, *line, &attr.name).map(Value::Numeric),
                    Role::NominalFeature | Role::ClassLabel => attr
                        .token_index(tok)
                        .map(Value::Nominal)
                        .ok_or_else(|| Error::parse(*line, format!("`{tok}` is not in the domain of `{}`", attr.name))),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Instance::new(seq as u64, values))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((schema, instances))
}

fn infer_schema(header: &StringRecord, rows: &[(u64, StringRecord)]) -> Result<Schema> {
    let last = header.len() - 1;
    let attrs = header
        .iter()
        .enumerate()
        .map(|(col, name)| {
            let numeric = col != last
                && rows
                    .iter()
                    .all(|(_, r)| r[col].parse::<f64>().is_ok_and(f64::is_finite));
            if numeric {
                return AttributeDescriptor::numeric(name);
            }
            let mut domain: Vec<&str> = Vec::new();
            for (_, r) in rows {
                if !domain.contains(&&r[col]) {
                    domain.push(&r[col]);
                }
            }
            if col == last {
                AttributeDescriptor::class(name, domain)
            } else {
                AttributeDescriptor::nominal(name, domain)
            }
        })
        .collect();
    Schema::new(attrs).map_err(|e| Error::parse(1, e.to_string()))
}

/// Writes the canonical CSV form: header of attribute names, one row per
/// instance, numeric values in shortest round-trip notation.
pub fn write_csv<T: Scalar, W: Write>(schema: &Schema, instances: &[Instance<T>], writer: W) -> Result<()> {
    let mut w = WriterBuilder::new().from_writer(writer);
    let to_err = |e: ::csv::Error| Error::Config(format!("csv write failed: {e}"));
    w.write_record(schema.attributes().iter().map(|a| a.name.as_str()))
        .map_err(to_err)?;
    for inst in instances {
        w.write_record(inst.values.iter().enumerate().map(|(i, v)| schema.render(i, v)))
            .map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::Config(format!("csv write failed: {e}")))?;
    Ok(())
}
