use std::collections::{BTreeMap, BTreeSet};

use super::{Attribute, AttributeKind, CodeRole, Dataset, FeatureVector, LabelSet, Record, Value, LABEL_SEPARATOR};
use crate::{Error, Result};

/// Column layout of a corpus CSV file.
///
/// Every column that is not the label, id or role column is a feature.
/// The id and role columns are optional; when the file has no id column,
/// records are numbered `r1`, `r2`, ... in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvOptions {
    pub label_column: String,
    pub label_separator: char,
    pub id_column: Option<String>,
    /// Column holding `code=ROLE` pairs, e.g. `I21.0=PDx;I25.1=SDx`.
    pub role_column: Option<String>,
}

impl CsvOptions {
    pub fn new(label_column: impl Into<String>) -> Self {
        CsvOptions {
            label_column: label_column.into(),
            label_separator: LABEL_SEPARATOR,
            id_column: Some("id".into()),
            role_column: Some("roles".into()),
        }
    }
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions::new("labels")
    }
}

pub(super) fn positional_id(row: usize) -> String {
    format!("r{}", row + 1)
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_table(content: &str) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(content.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_owned()).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::parse(1, "empty header"));
    }
    let mut rows = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { pos, expected_len, len } => Error::parse(
                pos.as_ref().map_or(0, |p| p.line() as usize),
                format!("ragged row: expected {expected_len} fields, found {len}"),
            ),
            _ => Error::Csv(e),
        })?;
        rows.push(row.iter().map(str::to_owned).collect());
    }
    Ok(Table { header, rows })
}

struct Layout {
    label: Option<usize>,
    id: Option<usize>,
    role: Option<usize>,
    features: Vec<usize>,
}

fn layout(header: &[String], options: &CsvOptions, require_label: bool) -> Result<Layout> {
    let find = |name: &str| header.iter().position(|h| h == name);
    let label = find(&options.label_column);
    if require_label && label.is_none() {
        return Err(Error::parse(
            1,
            format!("label column `{}` not found", options.label_column),
        ));
    }
    let id = options.id_column.as_deref().and_then(find);
    let role = options.role_column.as_deref().and_then(find);
    let special = [label, id, role];
    let features = (0..header.len()).filter(|i| !special.contains(&Some(*i))).collect();
    Ok(Layout {
        label,
        id,
        role,
        features,
    })
}

fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t == "?"
}

/// Numeric iff every cell parses as a decimal number and there are more than
/// two distinct values; otherwise nominal with the sorted distinct values.
fn infer_kind(cells: &[&str]) -> AttributeKind {
    let distinct: BTreeSet<&str> = cells.iter().map(|c| c.trim()).collect();
    let all_numeric = cells.iter().all(|c| c.trim().parse::<f64>().is_ok_and(f64::is_finite));
    if all_numeric && distinct.len() > 2 {
        AttributeKind::Numeric
    } else {
        AttributeKind::Nominal(distinct.into_iter().map(str::to_owned).collect())
    }
}

fn parse_value(attribute: &Attribute, cell: &str, line: usize) -> Result<Value> {
    let cell = cell.trim();
    if is_missing(cell) {
        return Err(Error::parse(
            line,
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
            .ok_or_else(|| Error::parse(line, format!("`{cell}` is not a number (column `{}`)", attribute.name))),
        AttributeKind::Nominal(values) => values
            .iter()
            .position(|v| v == cell)
            .map(Value::Nominal)
            .ok_or_else(|| Error::Domain(format!("`{cell}` is not a declared value of `{}`", attribute.name))),
    }
}

fn parse_roles(cell: &str, separator: char, line: usize) -> Result<BTreeMap<String, CodeRole>> {
    let mut roles = BTreeMap::new();
    for item in cell.split(separator).map(str::trim).filter(|s| !s.is_empty()) {
        let (code, tag) = item
            .split_once('=')
            .ok_or_else(|| Error::parse(line, format!("role entry `{item}` is not `code=ROLE`")))?;
        let role = CodeRole::from_tag(tag).ok_or_else(|| Error::parse(line, format!("unknown role `{tag}`")))?;
        roles.insert(code.trim().to_owned(), role);
    }
    Ok(roles)
}

fn build_records(
    table: &Table,
    layout: &Layout,
    attributes: &[Attribute],
    options: &CsvOptions,
) -> Result<Vec<Record>> {
    let mut records = Vec::with_capacity(table.rows.len());
    for (row_idx, row) in table.rows.iter().enumerate() {
        // header is line 1
        let line = row_idx + 2;
        let features = layout
            .features
            .iter()
            .zip(attributes)
            .map(|(&col, attr)| parse_value(attr, &row[col], line))
            .collect::<Result<Vec<_>>>()?;
        let labels = layout
            .label
            .map(|c| LabelSet::parse(&row[c], options.label_separator))
            .unwrap_or_default();
        let roles = match layout.role {
            Some(c) => parse_roles(&row[c], options.label_separator, line)?,
            None => BTreeMap::new(),
        };
        let id = match layout.id {
            Some(c) => row[c].trim().to_owned(),
            None => positional_id(row_idx),
        };
        records.push(Record {
            id,
            features: FeatureVector::new(features),
            labels,
            roles,
        });
    }
    Ok(records)
}

/// Loads a corpus from CSV text, inferring attribute kinds from the data.
///
/// The label alphabet is the sorted union of the codes observed in the label
/// column. An empty label cell yields an empty label set.
pub fn load_csv(content: &str, options: &CsvOptions) -> Result<Dataset> {
    let table = read_table(content)?;
    let layout = layout(&table.header, options, true)?;
    let mut attributes = Vec::with_capacity(layout.features.len());
    for &col in &layout.features {
        let cells: Vec<&str> = table.rows.iter().map(|r| r[col].as_str()).collect();
        if let Some(pos) = cells.iter().position(|c| is_missing(c)) {
            return Err(Error::parse(
                pos + 2,
                format!(
                    "missing value in column `{}` (missing values are not supported)",
                    table.header[col]
                ),
            ));
        }
        attributes.push(Attribute {
            name: table.header[col].clone(),
            kind: infer_kind(&cells),
        });
    }
    let records = build_records(&table, &layout, &attributes, options)?;
    let alphabet: BTreeSet<String> = records
        .iter()
        .flat_map(|r| r.labels.iter().map(str::to_owned))
        .collect();
    Dataset::new(attributes, alphabet.into_iter().collect(), records)
}

/// Reads records against an existing schema, e.g. new rows to be coded by a
/// trained model. Feature columns are matched to attributes by name; the label
/// column may be absent.
pub fn read_records_csv(content: &str, options: &CsvOptions, attributes: &[Attribute]) -> Result<Vec<Record>> {
    let table = read_table(content)?;
    let mut layout = layout(&table.header, options, false)?;
    let mut ordered = Vec::with_capacity(attributes.len());
    for a in attributes {
        let col = layout
            .features
            .iter()
            .copied()
            .find(|&c| table.header[c] == a.name)
            .ok_or_else(|| Error::SchemaMismatch(format!("input has no column `{}`", a.name)))?;
        ordered.push(col);
    }
    layout.features = ordered;
    build_records(&table, &layout, attributes, options)
}

fn render_value(attribute: &Attribute, value: Value) -> String {
    match (value, &attribute.kind) {
        (Value::Numeric(v), _) => v.to_string(),
        (Value::Nominal(i), AttributeKind::Nominal(values)) => values[i].clone(),
        (Value::Nominal(i), AttributeKind::Numeric) => i.to_string(),
    }
}

/// Writes a dataset in the layout [`load_csv`] reads: id column first, then
/// features, then labels, then roles when any record carries a role tag.
pub fn to_csv(ds: &Dataset, options: &CsvOptions) -> Result<String> {
    let id_column = options.id_column.clone().unwrap_or_else(|| "id".into());
    let with_roles = ds.records().iter().any(|r| !r.roles.is_empty());
    let role_column = options.role_column.clone().unwrap_or_else(|| "roles".into());
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    let mut header = vec![id_column];
    header.extend(ds.attributes().iter().map(|a| a.name.clone()));
    header.push(options.label_column.clone());
    if with_roles {
        header.push(role_column);
    }
    writer.write_record(&header)?;
    for r in ds.records() {
        let mut row = vec![r.id.clone()];
        row.extend(
            ds.attributes()
                .iter()
                .zip(r.features.values())
                .map(|(a, v)| render_value(a, *v)),
        );
        row.push(r.labels.join(options.label_separator));
        if with_roles {
            let roles: Vec<String> = r.roles.iter().map(|(c, role)| format!("{c}={}", role.tag())).collect();
            row.push(roles.join(&options.label_separator.to_string()));
        }
        writer.write_record(&row)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Dataset(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Dataset(e.to_string()))
}
