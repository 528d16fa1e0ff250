//! Rate/memory table rows: closed forms, simulator measurements and,
//! optionally, the published numbers side by side.

use std::io;

use hiercc_core::harness::run_episode;
use hiercc_core::rates::RateReport;
use hiercc_core::{DemandVector, FileLibrary, Rational, SchemeId, SystemConfig};
use serde::Serialize;

use crate::paper::{self, PaperEntry};

/// `(N, K1, K2)` rows shared by both published tables.
pub const DEFAULT_ROWS: [(usize, usize, usize); 5] = [(3, 1, 3), (8, 4, 2), (10, 5, 2), (12, 6, 2), (14, 7, 2)];

pub const CSV_HEADER: [&str; 15] = [
    "n",
    "k1",
    "k2",
    "scheme",
    "m1_frac",
    "m2_frac",
    "r1_frac",
    "r2_frac",
    "rbar_frac",
    "m1",
    "m2",
    "r1",
    "r2",
    "rbar",
    "source",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowSource {
    Computed,
    Measured,
    Paper,
    Error,
}

impl RowSource {
    pub fn as_str(self) -> &'static str {
        match self {
            RowSource::Computed => "computed",
            RowSource::Measured => "measured",
            RowSource::Paper => "paper",
            RowSource::Error => "error",
        }
    }
}

/// Exact fraction and its two-decimal rendering.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Value {
    pub frac: String,
    pub decimal: String,
    #[serde(skip)]
    pub exact: Rational,
}

impl Value {
    fn exact(r: &Rational) -> Self {
        Self { frac: r.to_string(), decimal: r.to_decimal(2), exact: r.clone() }
    }

    /// A published number: no fraction, decimal kept verbatim.
    fn published(s: &str) -> Self {
        let exact = Rational::from_decimal(s).expect("published values are decimals");
        Self { frac: String::new(), decimal: s.to_string(), exact }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TableRow {
    pub n: usize,
    pub k1: usize,
    pub k2: usize,
    /// `1`, `2`, or a baseline name for published rows.
    pub scheme: String,
    pub source: RowSource,
    pub m1: Option<Value>,
    pub m2: Option<Value>,
    pub r1: Option<Value>,
    pub r2: Option<Value>,
    pub rbar: Option<Value>,
    /// `table/row` of a published value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TableRow {
    fn blank(n: usize, k1: usize, k2: usize, scheme: String, source: RowSource) -> Self {
        Self {
            n,
            k1,
            k2,
            scheme,
            source,
            m1: None,
            m2: None,
            r1: None,
            r2: None,
            rbar: None,
            reference: None,
            flags: Vec::new(),
            error: None,
        }
    }

    fn csv_record(&self) -> Vec<String> {
        let frac = |v: &Option<Value>| v.as_ref().map(|v| v.frac.clone()).unwrap_or_default();
        let dec = |v: &Option<Value>| v.as_ref().map(|v| v.decimal.clone()).unwrap_or_default();
        let mut rec = vec![self.n.to_string(), self.k1.to_string(), self.k2.to_string(), self.scheme.clone()];
        let cols = [&self.m1, &self.m2, &self.r1, &self.r2, &self.rbar];
        rec.extend(cols.iter().map(|v| frac(v)));
        rec.extend(cols.iter().map(|v| dec(v)));
        rec.push(self.source.as_str().to_string());
        rec
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Table {
    pub rows: Vec<TableRow>,
}

impl Table {
    /// Human-readable remarks for every flagged or failed row.
    pub fn notes(&self) -> Vec<String> {
        self.rows
            .iter()
            .flat_map(|r| {
                let tag = format!("({},{},{}) scheme {} {}", r.n, r.k1, r.k2, r.scheme, r.source.as_str());
                let err = r.error.iter().map(move |e| format!("({},{},{}): {e}", r.n, r.k1, r.k2));
                r.flags.iter().map(move |f| format!("{tag}: {f}")).chain(err)
            })
            .collect()
    }

    pub fn find(&self, n: usize, k1: usize, k2: usize, scheme: &str, source: RowSource) -> Option<&TableRow> {
        self.rows.iter().find(|r| (r.n, r.k1, r.k2) == (n, k1, k2) && r.scheme == scheme && r.source == source)
    }
}

/// Demand `d_k = ((k - 1) mod N) + 1`: surjective whenever `N <= K`.
pub fn cyclic_demand(cfg: &SystemConfig) -> DemandVector {
    DemandVector((0..cfg.users()).map(|k| k % cfg.files() + 1).collect())
}

fn computed_row(cfg: &SystemConfig, scheme: SchemeId) -> TableRow {
    let (m1, m2, r1, r2, flags) = RateReport::formulas(cfg, scheme);
    let rbar = hiercc_core::rates::composite(&r1, &r2, cfg.mirrors());
    let mut row = TableRow::blank(
        cfg.files(),
        cfg.mirrors(),
        cfg.users_per_mirror(),
        scheme.number().to_string(),
        RowSource::Computed,
    );
    row.m1 = Some(Value::exact(&m1));
    row.m2 = Some(Value::exact(&m2));
    row.r1 = Some(Value::exact(&r1));
    row.r2 = Some(Value::exact(&r2));
    row.rbar = Some(Value::exact(&rbar));
    row.flags = flags.iter().map(|f| format!("formula-flag: {f}")).collect();
    row
}

fn measured_row(cfg: &SystemConfig, scheme: SchemeId) -> TableRow {
    let mut row = TableRow::blank(
        cfg.files(),
        cfg.mirrors(),
        cfg.users_per_mirror(),
        scheme.number().to_string(),
        RowSource::Measured,
    );
    let library = FileLibrary::random(cfg, 0);
    let report = match run_episode(cfg, scheme, &cyclic_demand(cfg), &library) {
        Ok(r) => r,
        Err(e) => {
            row.source = RowSource::Error;
            row.error = Some(e.to_string());
            return row;
        }
    };
    let rates = report.rate_report(cfg);
    row.m1 = Some(Value::exact(&rates.measured_m1));
    row.m2 = Some(Value::exact(&rates.measured_m2));
    row.r1 = Some(Value::exact(&rates.measured_r1));
    row.r2 = Some(Value::exact(&rates.measured_r2));
    row.rbar = Some(Value::exact(&rates.measured_rbar));

    let pairs = [
        ("m1", &rates.m1, &rates.measured_m1),
        ("m2", &rates.m2, &rates.measured_m2),
        ("r1", &rates.r1, &rates.measured_r1),
        ("r2", &rates.r2, &rates.measured_r2),
    ];
    for (name, formula, measured) in pairs {
        if formula != measured {
            row.flags.push(format!("formula-measured-mismatch: {name} formula {formula} vs measured {measured}"));
        }
    }
    let failed: Vec<usize> = report.users.iter().filter(|u| !u.success).map(|u| u.user).collect();
    if !failed.is_empty() {
        row.flags.push(format!("decode-failure: users {failed:?} cannot decode demand {}", report.demand));
    }
    if let Some(published) = paper::scheme_entry(cfg.files(), cfg.mirrors(), cfg.users_per_mirror(), scheme) {
        let tol = Rational::new(1, 100);
        let ours = [&rates.measured_r1, &rates.measured_r2, &rates.measured_rbar];
        let theirs = published.values();
        let verbatim = [&published.r1, &published.r2, &published.rbar];
        for (i, name) in ["r1", "r2", "rbar"].into_iter().enumerate() {
            if !ours[i].within(&theirs[i], &tol) {
                row.flags.push(format!(
                    "paper-discrepancy: {name} published {} (table {} row {}) vs measured {} ~ {}",
                    verbatim[i],
                    published.table,
                    published.row,
                    ours[i],
                    ours[i].to_decimal(4)
                ));
            }
        }
    }
    row
}

fn paper_row(e: &PaperEntry) -> TableRow {
    let mut row = TableRow::blank(e.n, e.k1, e.k2, e.scheme.clone(), RowSource::Paper);
    row.r1 = Some(Value::published(&e.r1));
    row.r2 = Some(Value::published(&e.r2));
    row.rbar = Some(Value::published(&e.rbar));
    row.reference = Some(format!("table {} row {}", e.table, e.row));
    row
}

/// Computed and measured rows for both schemes of every triple; invalid
/// triples become error rows and the rest are still emitted.
pub fn build(triples: &[(usize, usize, usize)], with_paper: bool) -> Table {
    let mut rows = Vec::new();
    for &(n, k1, k2) in triples {
        let cfg = match SystemConfig::new(k1, k2, n, 1, None) {
            Ok(cfg) => cfg,
            Err(e) => {
                let mut row = TableRow::blank(n, k1, k2, String::new(), RowSource::Error);
                row.error = Some(e.to_string());
                rows.push(row);
                continue;
            }
        };
        for scheme in [SchemeId::First, SchemeId::Second] {
            rows.push(computed_row(&cfg, scheme));
            rows.push(measured_row(&cfg, scheme));
        }
        if with_paper {
            rows.extend(paper::for_triple(n, k1, k2).map(paper_row));
        }
    }
    Table { rows }
}

/// Writes the fixed 15-column schema; flags and error text go to the JSON
/// form and to the command's notes.
pub fn write_csv(table: &Table, out: impl io::Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in &table.rows {
        w.write_record(row.csv_record())?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_row_values() {
        let t = build(&[(8, 4, 2)], false);
        assert_eq!(t.rows.len(), 4);
        let c = t.find(8, 4, 2, "1", RowSource::Computed).unwrap();
        assert_eq!(c.r1.as_ref().unwrap().decimal, "0.14");
        assert_eq!(c.r2.as_ref().unwrap().frac, "11/8");
        assert_eq!(c.rbar.as_ref().unwrap().decimal, "5.64");
        let m = t.find(8, 4, 2, "1", RowSource::Measured).unwrap();
        assert!(m.flags.is_empty(), "{:?}", m.flags);
        assert_eq!(m.r2, c.r2);
    }

    #[test]
    fn invalid_triple_is_a_row_error() {
        let t = build(&[(2, 2, 1), (3, 1, 3)], false);
        assert_eq!(t.rows[0].source, RowSource::Error);
        assert!(t.rows[0].error.as_ref().unwrap().contains("K2"));
        assert_eq!(t.rows.len(), 5);
    }

    #[test]
    fn csv_has_fixed_schema() {
        let t = build(&[(3, 1, 3)], true);
        let mut buf = Vec::new();
        write_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert!(lines.all(|l| l.split(',').count() == 15));
        assert!(text.contains("3,1,3,KNMD,,,,,,,,0.11,1.65,1.76,paper"));
    }
}
