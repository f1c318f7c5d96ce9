//! Schema-checked CSV ingestion.

use crate::error::{CliError, CliResult};
use crate::units::{Column, Quantity, Units};

#[derive(Debug, Clone)]
pub struct Schema {
    pub name: &'static str,
    pub required: Vec<Column>,
    pub optional: Vec<Column>,
    /// Index of a required column that must be strictly increasing.
    pub ascending: Option<usize>,
}

impl Schema {
    pub fn spectrum() -> Self {
        Schema {
            name: "impedance spectrum",
            required: vec![
                Column::new("omega", Quantity::AngularFrequency),
                Column::new("z_real", Quantity::Resistance),
                Column::new("z_imag", Quantity::Resistance),
            ],
            optional: vec![Column::new("weight", Quantity::Plain)],
            ascending: Some(0),
        }
    }

    pub fn tlm() -> Self {
        Schema {
            name: "TLM",
            required: vec![
                Column::new("length", Quantity::Length),
                Column::new("r_tot_w", Quantity::ResistanceLength),
            ],
            optional: vec![],
            ascending: None,
        }
    }

    pub fn calibration() -> Self {
        Schema {
            name: "calibration curve",
            required: vec![
                Column::new("concentration", Quantity::Concentration),
                Column::new("v_to", Quantity::Voltage),
                Column::new("r_w_star", Quantity::Resistance),
            ],
            optional: vec![],
            ascending: Some(0),
        }
    }

    fn columns(&self) -> impl Iterator<Item = &Column> {
        self.required.iter().chain(&self.optional)
    }

    fn expected(&self) -> String {
        self.columns().map(|c| c.header(Units::Si)).collect::<Vec<_>>().join(",")
    }
}

/// Rows converted to SI, columns in schema order (required, then optional).
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub rows: Vec<Vec<f64>>,
    /// Which optional columns were present in the file.
    pub optional_present: Vec<bool>,
}

impl Table {
    pub fn column(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(move |r| r[k])
    }
}

fn looks_like_decimal_comma(cell: &str) -> bool {
    let mut parts = cell.splitn(2, ',');
    let (Some(a), Some(b)) = (parts.next(), parts.next()) else { return false };
    let a = a.trim_start_matches(['-', '+']);
    !a.is_empty() && !b.is_empty() && a.chars().all(|c| c.is_ascii_digit()) && b.chars().all(|c| c.is_ascii_digit())
}

/// Parses `bytes` against `schema`.
///
/// Header cells match a column in either unit system; values are converted
/// to SI. Unknown columns are ignored with a warning, or rejected in strict
/// mode. An ascending column that arrives shuffled is sorted with a warning,
/// or rejected in strict mode.
pub fn parse_csv(bytes: &[u8], source: &str, schema: &Schema, strict: bool) -> CliResult<Table> {
    let text = std::str::from_utf8(bytes).map_err(|_| CliError::io(format!("{source}: not valid UTF-8")))?;
    let header_line = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .ok_or_else(|| CliError::io(format!("{source}: empty file, expected header {}", schema.expected())))?;
    if header_line.contains(';') {
        return Err(CliError::io(format!(
            "{source}: semicolon-separated data is not supported; use ',' between fields and '.' as the decimal separator"
        )));
    }

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(bytes);
    let headers = reader.headers()?.clone();

    // column slot -> (index in file, scale to SI)
    let columns: Vec<&Column> = schema.columns().collect();
    let mut slots: Vec<Option<(usize, f64)>> = vec![None; columns.len()];
    for (idx, raw) in headers.iter().enumerate() {
        let name = raw.to_ascii_lowercase();
        let hit = columns.iter().enumerate().find_map(|(k, c)| {
            [Units::Si, Units::Lab]
                .into_iter()
                .find(|&u| c.header(u) == name)
                .map(|u| (k, 1.0 / c.quantity.scale(u)))
        });
        match hit {
            Some((k, _)) if slots[k].is_some() => {
                return Err(CliError::io(format!("{source}: column {} appears twice", columns[k].base)));
            }
            Some((k, scale)) => slots[k] = Some((idx, scale)),
            None if strict => {
                return Err(CliError::io(format!(
                    "{source}: unexpected column '{raw}' (strict mode); expected {}",
                    schema.expected()
                )));
            }
            None => log::warn!("{source}: ignoring column '{raw}'"),
        }
    }
    let missing: Vec<String> = schema
        .required
        .iter()
        .zip(&slots)
        .filter(|(_, s)| s.is_none())
        .map(|(c, _)| c.header(Units::Si))
        .collect();
    if !missing.is_empty() {
        return Err(CliError::io(format!(
            "{source}: missing column(s) {} in {} file; expected {}",
            missing.join(", "),
            schema.name,
            schema.expected()
        )));
    }

    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let hint = if matches!(e.kind(), csv::ErrorKind::UnequalLengths { .. }) {
                " (a decimal comma would cause this; use '.' as the decimal separator)"
            } else {
                ""
            };
            CliError::io(format!("{source}: {e}{hint}"))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let mut row = Vec::with_capacity(columns.len());
        for (k, slot) in slots.iter().enumerate() {
            let Some((idx, scale)) = *slot else {
                row.push(f64::NAN);
                continue;
            };
            let cell = record.get(idx).unwrap_or("");
            let col = columns[k].base;
            let value: f64 = cell.parse().map_err(|_| {
                if looks_like_decimal_comma(cell) {
                    CliError::io(format!(
                        "{source}: line {line}, column {col}: '{cell}' uses a decimal comma; use '.' as the decimal separator"
                    ))
                } else {
                    CliError::io(format!("{source}: line {line}, column {col}: '{cell}' is not a number"))
                }
            })?;
            if !value.is_finite() {
                return Err(CliError::io(format!("{source}: line {line}, column {col}: value is not finite")));
            }
            row.push(value * scale);
        }
        rows.push(row);
        lines.push(line);
    }
    if rows.is_empty() {
        return Err(CliError::io(format!("{source}: no data rows")));
    }

    if let Some(k) = schema.ascending {
        if let Some(i) = (1..rows.len()).find(|&i| !(rows[i][k] > rows[i - 1][k])) {
            let col = columns[k].base;
            if strict {
                return Err(CliError::io(format!(
                    "{source}: line {}, column {col}: values must be strictly increasing (strict mode)",
                    lines[i]
                )));
            }
            let mut order: Vec<usize> = (0..rows.len()).collect();
            order.sort_by(|&a, &b| rows[a][k].total_cmp(&rows[b][k]));
            if let Some(w) = order.windows(2).find(|w| rows[w[0]][k] == rows[w[1]][k]) {
                return Err(CliError::io(format!(
                    "{source}: lines {} and {} repeat {col} = {}",
                    lines[w[0]], lines[w[1]], rows[w[0]][k]
                )));
            }
            log::warn!("{source}: rows were not sorted by {col}; sorting");
            rows = order.into_iter().map(|i| rows[i].clone()).collect();
        }
    }

    let optional_present = slots[schema.required.len()..].iter().map(Option::is_some).collect();
    Ok(Table { rows, optional_present })
}
