use std::path::Path;

use crate::error::{Error, Result};

/// A versioned CSV file: `#schema=<name>/<version>` line, header, rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub schema: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub origin: String,
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(&text, &path.display().to_string())
}

pub fn parse_table(text: &str, origin: &str) -> Result<Table> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    let schema = first.trim_end();
    if !schema.starts_with("#schema=") {
        return Err(Error::Schema(format!("{origin}: missing `#schema=` line")));
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(rest.as_bytes());
    let columns =
        reader.headers().map_err(|e| Error::Schema(format!("{origin}: {e}")))?.iter().map(str::to_string).collect();
    let rows = reader
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<Vec<Vec<String>>, _>>()
        .map_err(|e| Error::Schema(format!("{origin}: {e}")))?;
    Ok(Table { schema: schema.to_string(), columns, rows, origin: origin.to_string() })
}

impl Table {
    /// Name part of the schema tag, without the version.
    pub fn schema_name(&self) -> &str {
        let tag = self.schema.trim_start_matches("#schema=");
        tag.split('/').next().unwrap_or(tag)
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Schema(format!("{}: missing column `{name}`", self.origin)))
    }

    pub fn strings(&self, name: &str) -> Result<Vec<&str>> {
        let k = self.column(name)?;
        Ok(self.rows.iter().map(|r| r.get(k).map_or("", String::as_str)).collect())
    }

    pub fn numbers(&self, name: &str) -> Result<Vec<f64>> {
        let k = self.column(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let cell = r.get(k).map_or("", String::as_str);
                cell.parse::<f64>().map_err(|_| Error::Parse {
                    line: Some(i + 3),
                    msg: format!("{}: `{cell}` in column `{name}`", self.origin),
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_names_missing_columns() {
        let t = parse_table("#schema=x/1\na,b\n1,2\n3,4\n", "mem").unwrap();
        assert_eq!(t.schema_name(), "x");
        assert_eq!(t.numbers("b").unwrap(), vec![2.0, 4.0]);
        let e = t.numbers("c").unwrap_err().to_string();
        assert!(e.contains("`c`"), "{e}");
        assert!(parse_table("a,b\n1,2\n", "mem").is_err());
    }
}
