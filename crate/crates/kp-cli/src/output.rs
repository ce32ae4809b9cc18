//! Serialization of correlator tables.

use std::collections::BTreeMap;

use clap::ValueEnum;
use kp_core::PolyN;
use serde::{Deserialize, Serialize};

pub const TABLE_SCHEMA: &str = "kp-open-intersection/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Json,
    Csv,
    Markdown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub d: Vec<u32>,
    pub value: PolyN,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableDocument {
    pub schema: String,
    pub n: usize,
    pub dmax: u32,
    pub entries: Vec<TableEntry>,
}

impl TableDocument {
    pub fn new(n: usize, dmax: u32, table: BTreeMap<Vec<u32>, PolyN>) -> TableDocument {
        TableDocument {
            schema: TABLE_SCHEMA.to_string(),
            n,
            dmax,
            entries: table.into_iter().map(|(d, value)| TableEntry { d, value }).collect(),
        }
    }

    pub fn render(&self, format: TableFormat) -> String {
        match format {
            TableFormat::Json => json_line(self),
            TableFormat::Csv => self.csv(),
            TableFormat::Markdown => self.markdown(),
        }
    }

    fn csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let mut header: Vec<String> = (1..=self.n).map(|i| format!("d{i}")).collect();
        header.push("value".into());
        w.write_record(&header).expect("in-memory write");
        for e in &self.entries {
            let mut row: Vec<String> = e.d.iter().map(|v| v.to_string()).collect();
            row.push(e.value.to_string());
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    fn markdown(&self) -> String {
        let mut s = String::from("| d | value |\n|---|---|\n");
        for e in &self.entries {
            let d: Vec<String> = e.d.iter().map(|v| v.to_string()).collect();
            s.push_str(&format!("| {} | {} |\n", d.join(", "), e.value));
        }
        s
    }
}

/// Compact JSON with a trailing newline.
pub fn json_line<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TableDocument {
        let mut t = BTreeMap::new();
        t.insert(vec![0, 1], PolyN::n());
        t.insert(vec![2, 2], "1/24 + 1/2*N^2".parse().unwrap());
        TableDocument::new(2, 2, t)
    }

    #[test]
    fn json_round_trip() {
        let doc = sample();
        let back: TableDocument = serde_json::from_str(&doc.render(TableFormat::Json)).unwrap();
        assert_eq!(back, doc);
        assert!(doc.render(TableFormat::Json).contains(r#""schema":"kp-open-intersection/v1""#));
    }

    #[test]
    fn csv_layout() {
        assert_eq!(sample().render(TableFormat::Csv), "d1,d2,value\n0,1,N\n2,2,1/24 + 1/2*N^2\n");
    }

    #[test]
    fn markdown_layout() {
        let md = sample().render(TableFormat::Markdown);
        assert_eq!(md.lines().nth(3), Some("| 2, 2 | 1/24 + 1/2*N^2 |"));
    }
}
