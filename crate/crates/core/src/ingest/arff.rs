//! Dense ARFF subset: numeric and nominal attributes, no sparse rows, no
//! missing values.

use std::fs::File;
use std::io::{BufRead, BufReader};

use crate::error::{Error, Result};
use crate::ingest::{is_missing, parse_numeric, DatasetSource};
use crate::scalar::Scalar;
use crate::schema::{AttributeDescriptor, Instance, Role, Schema, Value};

pub fn load_arff<T: Scalar>(source: &DatasetSource) -> Result<(Schema, Vec<Instance<T>>)> {
    let file = File::open(&source.path).map_err(|e| Error::io(&source.path, e))?;
    read_arff(BufReader::new(file), source.declared_schema.as_ref(), None)
}

enum HeaderAttr {
    Numeric(String),
    Nominal(String, Vec<String>),
}

pub fn read_arff<T: Scalar, R: BufRead>(
    reader: R,
    declared: Option<&Schema>,
    limit: Option<usize>,
) -> Result<(Schema, Vec<Instance<T>>)> {
    let mut header = Vec::new();
    let mut schema: Option<Schema> = None;
    let mut instances = Vec::new();
    let mut in_data = false;
    let mut saw_relation = false;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx as u64 + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if !in_data {
            let (keyword, rest) = split_keyword(line);
            match keyword.to_ascii_lowercase().as_str() {
                "@relation" => saw_relation = true,
                "@attribute" => header.push(parse_attribute(rest, lineno)?),
                "@data" => {
                    if !saw_relation {
                        return Err(Error::parse(lineno, "@data before @relation"));
                    }
                    schema = Some(build_schema(&header, declared, lineno)?);
                    in_data = true;
                }
                _ => return Err(Error::parse(lineno, format!("unexpected header line `{line}`"))),
            }
            continue;
        }
        if limit.is_some_and(|l| instances.len() >= l) {
            break;
        }
        let schema = schema.as_ref().expect("schema built at @data");
        if line.starts_with('{') {
            return Err(Error::parse(lineno, "sparse ARFF rows are not supported"));
        }
        let tokens = split_row(line, lineno)?;
        instances.push(parse_row(schema, &tokens, instances.len() as u64, lineno)?);
    }
    let schema = schema.ok_or_else(|| Error::parse(0, "missing @data section"))?;
    Ok((schema, instances))
}

fn split_keyword(line: &str) -> (&str, &str) {
    match line.find(char::is_whitespace) {
        Some(i) => (&line[..i], line[i..].trim_start()),
        None => (line, ""),
    }
}

fn parse_attribute(rest: &str, lineno: u64) -> Result<HeaderAttr> {
    let (name, kind) = if let Some(q) = rest.chars().next().filter(|c| *c == '\'' || *c == '"') {
        let end = rest[1..]
            .find(q)
            .ok_or_else(|| Error::parse(lineno, "unterminated quoted attribute name"))?;
        (rest[1..1 + end].to_string(), rest[end + 2..].trim())
    } else {
        let (n, k) = split_keyword(rest);
        (n.to_string(), k.trim())
    };
    if name.is_empty() || kind.is_empty() {
        return Err(Error::parse(lineno, "malformed @attribute line"));
    }
    if kind.starts_with('{') {
        let inner = kind
            .strip_prefix('{')
            .and_then(|k| k.strip_suffix('}'))
            .ok_or_else(|| Error::parse(lineno, "unterminated nominal domain"))?;
        let domain = split_row(inner, lineno)?;
        if domain.is_empty() || domain.iter().any(|d| d.is_empty()) {
            return Err(Error::parse(lineno, format!("empty nominal domain for `{name}`")));
        }
        return Ok(HeaderAttr::Nominal(name, domain));
    }
    match kind.to_ascii_lowercase().as_str() {
        "numeric" | "real" | "integer" => Ok(HeaderAttr::Numeric(name)),
        other => Err(Error::parse(lineno, format!("unsupported attribute type `{other}` for `{name}`"))),
    }
}

fn build_schema(header: &[HeaderAttr], declared: Option<&Schema>, lineno: u64) -> Result<Schema> {
    if let Some(d) = declared {
        if d.len() != header.len() {
            return Err(Error::parse(
                lineno,
                format!("declared schema has {} attributes, file has {}", d.len(), header.len()),
            ));
        }
        return Ok(d.clone());
    }
    let class = header
        .iter()
        .rposition(|a| matches!(a, HeaderAttr::Nominal(..)))
        .ok_or_else(|| Error::parse(lineno, "no nominal attribute to use as the class"))?;
    let attrs = header
        .iter()
        .enumerate()
        .map(|(i, a)| match a {
            HeaderAttr::Numeric(n) => AttributeDescriptor::numeric(n.clone()),
            HeaderAttr::Nominal(n, d) if i == class => AttributeDescriptor::class(n.clone(), d.clone()),
            HeaderAttr::Nominal(n, d) => AttributeDescriptor::nominal(n.clone(), d.clone()),
        })
        .collect();
    Schema::new(attrs).map_err(|e| Error::parse(lineno, e.to_string()))
}

/// Comma-separated tokens with optional single or double quoting.
fn split_row(line: &str, lineno: u64) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    loop {
        while chars.next_if(|c| c.is_whitespace()).is_some() {}
        let mut tok = String::new();
        let terminated_by_comma;
        if let Some(q) = chars.next_if(|c| *c == '\'' || *c == '"') {
            loop {
                match chars.next() {
                    None => return Err(Error::parse(lineno, "unterminated quote")),
                    Some('\\') => tok.extend(chars.next()),
                    Some(c) if c == q => break,
                    Some(c) => tok.push(c),
                }
            }
            while chars.next_if(|c| c.is_whitespace()).is_some() {}
            terminated_by_comma = match chars.next() {
                None => false,
                Some(',') => true,
                Some(c) => return Err(Error::parse(lineno, format!("unexpected `{c}` after quoted value"))),
            };
        } else {
            terminated_by_comma = loop {
                match chars.next() {
                    None => break false,
                    Some(',') => break true,
                    Some(c) => tok.push(c),
                }
            };
            tok = tok.trim_end().to_string();
        }
        out.push(tok);
        if !terminated_by_comma {
            return Ok(out);
        }
    }
}

fn parse_row<T: Scalar>(schema: &Schema, tokens: &[String], seq: u64, lineno: u64) -> Result<Instance<T>> {
    if tokens.len() != schema.len() {
        return Err(Error::parse(
            lineno,
            format!("expected {} values, found {}", schema.len(), tokens.len()),
        ));
    }
    let values = schema
        .attributes()
        .iter()
        .zip(tokens)
        .map(|(attr, tok)| {
            if is_missing(tok) {
                return Err(Error::parse(lineno, format!("missing value in column `{}`", attr.name)));
            }
            match attr.role {
                Role::NumericFeature => parse_numeric(tok, lineno, &attr.name).map(Value::Numeric),
                Role::NominalFeature | Role::ClassLabel => attr.token_index(tok).map(Value::Nominal).ok_or_else(|| {
                    Error::parse(lineno, format!("`{tok}` is not in the domain of `{}`", attr.name))
                }),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Instance::new(seq, values))
}
