//! Published table values, kept in one data file and only ever read for
//! side-by-side display and comparison, never fed into computed columns.

use std::sync::OnceLock;

use hiercc_core::{Rational, SchemeId};
use serde::{Deserialize, Serialize};

const DATA: &str = include_str!("../data/paper_tables.csv");

/// One published `(R1, R2, Rbar)` triple, strings kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize, Serialize)]
pub struct PaperEntry {
    /// Source table, `I` or `II`.
    pub table: String,
    pub row: usize,
    pub n: usize,
    pub k1: usize,
    pub k2: usize,
    /// `1` or `2` for this simulator's schemes, otherwise a baseline name.
    pub scheme: String,
    pub r1: String,
    pub r2: String,
    pub rbar: String,
}

impl PaperEntry {
    pub fn is_baseline(&self) -> bool {
        self.scheme != "1" && self.scheme != "2"
    }

    /// The three values as exact decimals, in `(R1, R2, Rbar)` order.
    pub fn values(&self) -> [Rational; 3] {
        [&self.r1, &self.r2, &self.rbar].map(|s| Rational::from_decimal(s).expect("data file holds decimals"))
    }
}

pub fn entries() -> &'static [PaperEntry] {
    static ENTRIES: OnceLock<Vec<PaperEntry>> = OnceLock::new();
    ENTRIES.get_or_init(|| {
        csv::Reader::from_reader(DATA.as_bytes())
            .deserialize()
            .collect::<Result<_, _>>()
            .expect("embedded data file is well formed")
    })
}

/// All published entries for the triple `(N, K1, K2)`.
pub fn for_triple(n: usize, k1: usize, k2: usize) -> impl Iterator<Item = &'static PaperEntry> {
    entries().iter().filter(move |e| (e.n, e.k1, e.k2) == (n, k1, k2))
}

/// The published value for one of this simulator's schemes.
pub fn scheme_entry(n: usize, k1: usize, k2: usize, scheme: SchemeId) -> Option<&'static PaperEntry> {
    let tag = scheme.number().to_string();
    for_triple(n, k1, k2).find(|e| e.scheme == tag)
}
