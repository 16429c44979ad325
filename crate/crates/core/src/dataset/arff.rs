//! Dense ARFF subset: `@relation`, numeric and nominal `@attribute`s, `@data`.
//!
//! Two label layouts are understood. By default the last attribute is a
//! single nominal class and each record gets a one-element label set (`?`
//! gives the empty set). When the relation name carries a `-C n` option, the
//! first `n` attributes are `{0,1}` label indicators named after their code,
//! which is how multi-label corpora are usually shipped as ARFF.

use std::collections::BTreeSet;

use super::csv_io::positional_id;
use super::{Attribute, AttributeKind, Dataset, FeatureVector, LabelSet, Record, Value};
use crate::{Error, Result};

/// Splits on top-level commas, honouring single and double quotes.
fn split_fields(line: &str, lineno: usize) -> Result<Vec<String>> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut quote: Option<char> = None;
    let mut chars = line.chars();
    let mut was_quoted = false;
    while let Some(c) = chars.next() {
        match quote {
            Some(q) if c == '\\' => {
                if let Some(n) = chars.next() {
                    cur.push(n);
                } else {
                    return Err(Error::parse(lineno, format!("dangling escape inside {q}-quoted value")));
                }
            }
            Some(q) if c == q => quote = None,
            Some(_) => cur.push(c),
            None if c == '\'' || c == '"' => {
                quote = Some(c);
                was_quoted = true;
            }
            None if c == ',' => {
                fields.push(finish(&mut cur, was_quoted));
                was_quoted = false;
            }
            None => cur.push(c),
        }
    }
    if quote.is_some() {
        return Err(Error::parse(lineno, "unterminated quote"));
    }
    fields.push(finish(&mut cur, was_quoted));
    Ok(fields)
}

fn finish(cur: &mut String, quoted: bool) -> String {
    let s = std::mem::take(cur);
    if quoted {
        s
    } else {
        s.trim().to_owned()
    }
}

/// Reads one possibly-quoted token from the front of `s`, returning it and the rest.
fn take_token(s: &str, lineno: usize) -> Result<(String, &str)> {
    let s = s.trim_start();
    let mut chars = s.char_indices();
    match chars.next() {
        None => Err(Error::parse(lineno, "expected a name")),
        Some((_, q)) if q == '\'' || q == '"' => {
            let mut out = String::new();
            let mut escaped = false;
            for (i, c) in chars {
                if escaped {
                    out.push(c);
                    escaped = false;
                } else if c == '\\' {
                    escaped = true;
                } else if c == q {
                    return Ok((out, &s[i + 1..]));
                } else {
                    out.push(c);
                }
            }
            Err(Error::parse(lineno, "unterminated quote"))
        }
        Some(_) => {
            let end = s.find(char::is_whitespace).unwrap_or(s.len());
            Ok((s[..end].to_owned(), &s[end..]))
        }
    }
}

fn keyword<'a>(line: &'a str, kw: &str) -> Option<&'a str> {
    let head = line.get(..kw.len())?;
    if head.eq_ignore_ascii_case(kw) && line[kw.len()..].chars().next().is_none_or(char::is_whitespace) {
        Some(&line[kw.len()..])
    } else {
        None
    }
}

fn parse_attribute(rest: &str, lineno: usize) -> Result<Attribute> {
    let (name, ty) = take_token(rest, lineno)?;
    let ty = ty.trim();
    if let Some(body) = ty.strip_prefix('{') {
        let body = body
            .strip_suffix('}')
            .ok_or_else(|| Error::parse(lineno, "nominal domain is missing `}`"))?;
        let values = split_fields(body, lineno)?;
        if values.iter().any(String::is_empty) {
            return Err(Error::parse(lineno, "empty nominal value"));
        }
        return Ok(Attribute::nominal(name, values));
    }
    match ty.to_ascii_lowercase().as_str() {
        "numeric" | "real" | "integer" => Ok(Attribute::numeric(name)),
        other => Err(Error::Unsupported(format!("attribute type `{other}` at line {lineno}"))),
    }
}

/// Number of leading label attributes from a `-C n` relation option.
fn label_count(relation: &str) -> Option<usize> {
    let mut parts = relation.split_whitespace();
    while let Some(p) = parts.next() {
        if p == "-C" {
            return parts.next().and_then(|n| n.parse().ok());
        }
    }
    None
}

fn parse_cell(attribute: &Attribute, cell: &str, lineno: usize) -> Result<Value> {
    if cell == "?" {
        return Err(Error::parse(
            lineno,
            format!(
                "missing value for `{}` (missing values are not supported)",
                attribute.name
            ),
        ));
    }
    match &attribute.kind {
        AttributeKind::Numeric => cell
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Value::Numeric)
            .ok_or_else(|| {
                Error::parse(
                    lineno,
                    format!("`{cell}` is not a number (attribute `{}`)", attribute.name),
                )
            }),
        AttributeKind::Nominal(values) => values
            .iter()
            .position(|v| v == cell)
            .map(Value::Nominal)
            .ok_or_else(|| {
                Error::Domain(format!(
                    "`{cell}` is not in the domain of `{}` (line {lineno})",
                    attribute.name
                ))
            }),
    }
}

/// Loads the dense ARFF subset described in the module docs.
pub fn load_arff_subset(content: &str) -> Result<Dataset> {
    let mut relation: Option<String> = None;
    let mut attributes: Vec<Attribute> = Vec::new();
    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();
    let mut in_data = false;

    for (i, raw) in content.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if in_data {
            if line.starts_with('{') {
                return Err(Error::Unsupported(format!("sparse data row at line {lineno}")));
            }
            rows.push((lineno, split_fields(line, lineno)?));
        } else if let Some(rest) = keyword(line, "@relation") {
            relation = Some(take_token(rest, lineno)?.0);
        } else if let Some(rest) = keyword(line, "@attribute") {
            attributes.push(parse_attribute(rest, lineno)?);
        } else if keyword(line, "@data").is_some() {
            in_data = true;
        } else {
            return Err(Error::parse(lineno, format!("unexpected line `{line}`")));
        }
    }
    if relation.is_none() {
        return Err(Error::parse(1, "missing @relation"));
    }
    if !in_data {
        return Err(Error::parse(content.lines().count(), "missing @data"));
    }

    let multi = relation.as_deref().and_then(label_count).filter(|&n| n > 0);
    let (label_attrs, feature_attrs, label_range) = match multi {
        Some(n) => {
            if n > attributes.len() {
                return Err(Error::parse(1, format!("-C {n} exceeds the attribute count")));
            }
            for a in &attributes[..n] {
                let mut values: Vec<&str> = a.values().unwrap_or(&[]).iter().map(String::as_str).collect();
                values.sort_unstable();
                if values != ["0", "1"] {
                    return Err(Error::Unsupported(format!(
                        "label attribute `{}` must be nominal {{0,1}}",
                        a.name
                    )));
                }
            }
            (attributes[..n].to_vec(), attributes[n..].to_vec(), 0..n)
        }
        None => {
            let class = attributes
                .last()
                .ok_or_else(|| Error::parse(1, "no attributes declared"))?;
            if class.is_numeric() {
                return Err(Error::Unsupported(format!(
                    "class attribute `{}` must be nominal",
                    class.name
                )));
            }
            let n = attributes.len();
            (vec![class.clone()], attributes[..n - 1].to_vec(), n - 1..n)
        }
    };

    let mut records = Vec::with_capacity(rows.len());
    for (row_idx, (lineno, fields)) in rows.iter().enumerate() {
        if fields.len() != attributes.len() {
            return Err(Error::parse(
                *lineno,
                format!(
                    "ragged row: expected {} values, found {}",
                    attributes.len(),
                    fields.len()
                ),
            ));
        }
        let mut labels = LabelSet::new();
        for (a, cell) in label_attrs.iter().zip(&fields[label_range.clone()]) {
            if cell == "?" {
                continue;
            }
            let Value::Nominal(idx) = parse_cell(a, cell, *lineno)? else {
                unreachable!("label attributes are nominal")
            };
            match multi {
                Some(_) if a.values().unwrap()[idx] == "1" => {
                    labels.insert(a.name.clone());
                }
                Some(_) => {}
                None => {
                    labels.insert(cell.clone());
                }
            }
        }
        let feature_cells = fields
            .iter()
            .enumerate()
            .filter(|(j, _)| !label_range.contains(j))
            .map(|(_, c)| c);
        let features = feature_attrs
            .iter()
            .zip(feature_cells)
            .map(|(a, c)| parse_cell(a, c, *lineno))
            .collect::<Result<Vec<_>>>()?;
        records.push(Record::new(
            positional_id(row_idx),
            FeatureVector::new(features),
            labels,
        ));
    }

    let alphabet: BTreeSet<String> = match multi {
        Some(_) => label_attrs.iter().map(|a| a.name.clone()).collect(),
        None => label_attrs[0].values().unwrap().iter().cloned().collect(),
    };
    Dataset::new(feature_attrs, alphabet.into_iter().collect(), records)
}

fn quote(s: &str) -> String {
    let plain = !s.is_empty()
        && !s
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, ',' | '\'' | '"' | '{' | '}' | '%' | '\\'))
        && s != "?";
    if plain {
        s.to_owned()
    } else {
        format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'"))
    }
}

fn attribute_line(a: &Attribute) -> String {
    match &a.kind {
        AttributeKind::Numeric => format!("@attribute {} numeric", quote(&a.name)),
        AttributeKind::Nominal(values) => format!(
            "@attribute {} {{{}}}",
            quote(&a.name),
            values.iter().map(|v| quote(v)).collect::<Vec<_>>().join(",")
        ),
    }
}

/// Writes `ds` as ARFF. Datasets where every record has at most one code use
/// a trailing `class` attribute; anything else uses the `-C n` indicator layout.
/// Record ids and role tags are not representable and are dropped.
pub fn to_arff(ds: &Dataset, relation: &str) -> Result<String> {
    let single = ds.records().iter().all(|r| r.labels.len() <= 1);
    let mut out = String::new();
    let feature_cells = |r: &Record| -> Vec<String> {
        ds.attributes()
            .iter()
            .zip(r.features.values())
            .map(|(a, v)| match (v, &a.kind) {
                (Value::Numeric(x), _) => x.to_string(),
                (Value::Nominal(i), AttributeKind::Nominal(vals)) => quote(&vals[*i]),
                (Value::Nominal(i), AttributeKind::Numeric) => i.to_string(),
            })
            .collect()
    };
    if single {
        if ds.attributes().iter().any(|a| a.name == "class") {
            return Err(Error::Dataset(
                "a feature named `class` clashes with the class attribute".into(),
            ));
        }
        if ds.alphabet().is_empty() {
            return Err(Error::Dataset(
                "cannot write a class attribute with an empty alphabet".into(),
            ));
        }
        out.push_str(&format!("@relation {}\n\n", quote(relation)));
        for a in ds.attributes() {
            out.push_str(&attribute_line(a));
            out.push('\n');
        }
        out.push_str(&attribute_line(&Attribute::nominal(
            "class",
            ds.alphabet().iter().cloned(),
        )));
        out.push_str("\n\n@data\n");
        for r in ds.records() {
            let mut cells = feature_cells(r);
            cells.push(r.labels.first().map_or_else(|| "?".to_owned(), quote));
            out.push_str(&cells.join(","));
            out.push('\n');
        }
    } else {
        out.push_str(&format!(
            "@relation {}\n\n",
            quote(&format!("{relation}: -C {}", ds.alphabet().len()))
        ));
        for code in ds.alphabet() {
            out.push_str(&attribute_line(&Attribute::binary(code.clone())));
            out.push('\n');
        }
        for a in ds.attributes() {
            out.push_str(&attribute_line(a));
            out.push('\n');
        }
        out.push_str("\n@data\n");
        for r in ds.records() {
            let mut cells: Vec<String> = ds
                .alphabet()
                .iter()
                .map(|c| if r.labels.contains(c) { "1" } else { "0" }.to_owned())
                .collect();
            cells.extend(feature_cells(r));
            out.push_str(&cells.join(","));
            out.push('\n');
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "% tiny\n@RELATION tiny\n@attribute pain {0,1}\n@attribute class {a,b}\n@data\n1,a\n0,b\n";

    #[test]
    fn minimal_nominal_file() {
        let ds = load_arff_subset(TINY).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.attributes().len(), 1);
        assert_eq!(ds.records()[0].labels, LabelSet::from_iter(["a"]));
        assert_eq!(ds.alphabet(), ["a", "b"]);
    }

    #[test]
    fn class_value_outside_domain() {
        let text = TINY.replace("0,b", "0,c");
        assert!(matches!(load_arff_subset(&text), Err(Error::Domain(_))));
    }

    #[test]
    fn unsupported_kinds() {
        let text = "@relation r\n@attribute s string\n@attribute class {a}\n@data\nx,a\n";
        assert!(matches!(load_arff_subset(text), Err(Error::Unsupported(_))));
        let text = "@relation r\n@attribute d date\n@attribute class {a}\n@data\n";
        assert!(matches!(load_arff_subset(text), Err(Error::Unsupported(_))));
        let sparse = "@relation r\n@attribute x numeric\n@attribute class {a}\n@data\n{0 1}\n";
        assert!(matches!(load_arff_subset(sparse), Err(Error::Unsupported(_))));
    }

    #[test]
    fn missing_class_is_empty_set() {
        let ds = load_arff_subset(&TINY.replace("0,b", "0,?")).unwrap();
        assert!(ds.records()[1].labels.is_empty());
    }

    #[test]
    fn multi_label_layout() {
        let text = "@relation 'chd: -C 2'\n@attribute I21.0 {0,1}\n@attribute I25.1 {0,1}\n\
                    @attribute trop numeric\n@data\n1,1,0.5\n0,1,0.1\n0,0,0.2\n";
        let ds = load_arff_subset(text).unwrap();
        assert_eq!(ds.attributes().len(), 1);
        assert_eq!(ds.records()[0].labels.len(), 2);
        assert!(ds.records()[2].labels.is_empty());
        let again = load_arff_subset(&to_arff(&ds, "chd").unwrap()).unwrap();
        assert_eq!(ds, again);
    }

    #[test]
    fn quoted_names_and_values() {
        let text = "@relation r\n@attribute 'chest pain' {'yes, severe',no}\n@attribute class {a}\n\
                    @data\n'yes, severe',a\n";
        let ds = load_arff_subset(text).unwrap();
        assert_eq!(ds.attributes()[0].name, "chest pain");
        let again = load_arff_subset(&to_arff(&ds, "r").unwrap()).unwrap();
        assert_eq!(ds, again);
    }

    #[test]
    fn equivalent_to_csv_on_same_data() {
        let csv = super::super::load_csv("pain,labels\n1,a\n0,b\n", &Default::default()).unwrap();
        assert_eq!(load_arff_subset(TINY).unwrap(), csv);
    }
}
