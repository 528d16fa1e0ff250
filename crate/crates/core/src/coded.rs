//! Symbolically labelled payloads.
//!
//! A [`Coded`] value pairs a linear combination of subfiles (its label) with
//! the field symbols that combination evaluates to. Decoders read labels to
//! decide what to subtract; correctness is always judged on payloads.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::gf::{Fe, PrimeField};
use crate::model::FileLibrary;

/// Subfile `W^{ij}_n`. Ordered by `(i, j, file)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SubfileId {
    pub i: usize,
    pub j: usize,
    pub file: usize,
}

impl SubfileId {
    pub fn new(file: usize, i: usize, j: usize) -> Self {
        Self { i, j, file }
    }
}

impl fmt::Display for SubfileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.i < 10 && self.j < 10 {
            write!(f, "W^{{{}{}}}_{}", self.i, self.j, self.file)
        } else {
            write!(f, "W^{{{},{}}}_{}", self.i, self.j, self.file)
        }
    }
}

/// Sparse linear combination with nonzero coefficients only.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LinComb {
    terms: BTreeMap<SubfileId, Fe>,
}

impl LinComb {
    pub fn single(id: SubfileId) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(id, Fe::ONE);
        Self { terms }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, id: &SubfileId) -> Fe {
        self.terms.get(id).copied().unwrap_or(Fe::ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (SubfileId, Fe)> + '_ {
        self.terms.iter().map(|(id, c)| (*id, *c))
    }

    pub fn ids(&self) -> impl Iterator<Item = SubfileId> + '_ {
        self.terms.keys().copied()
    }

    pub fn contains(&self, id: &SubfileId) -> bool {
        self.terms.contains_key(id)
    }

    /// The only term, if there is exactly one.
    pub fn as_single(&self) -> Option<(SubfileId, Fe)> {
        if self.terms.len() == 1 {
            self.terms().next()
        } else {
            None
        }
    }

    pub fn add_term(&mut self, field: &PrimeField, id: SubfileId, c: Fe) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(id).or_insert(Fe::ZERO);
        *entry = field.add(*entry, c);
        if entry.is_zero() {
            self.terms.remove(&id);
        }
    }

    pub fn add_scaled(&mut self, field: &PrimeField, c: Fe, other: &LinComb) {
        for (id, d) in other.terms() {
            self.add_term(field, id, field.mul(c, d));
        }
    }

    pub fn scale(&mut self, field: &PrimeField, c: Fe) {
        if c.is_zero() {
            self.terms.clear();
            return;
        }
        for v in self.terms.values_mut() {
            *v = field.mul(*v, c);
        }
    }

    pub fn from_terms(field: &PrimeField, terms: impl IntoIterator<Item = (SubfileId, Fe)>) -> Self {
        let mut lc = Self::default();
        for (id, c) in terms {
            lc.add_term(field, id, c);
        }
        lc
    }

    /// Evaluates the combination on the library.
    pub fn evaluate(&self, field: &PrimeField, library: &FileLibrary) -> Vec<Fe> {
        let mut out = vec![Fe::ZERO; library.subfile_len()];
        for (id, c) in self.terms() {
            field.axpy(&mut out, c, library.subfile(id));
        }
        out
    }

    /// Human-readable form, coefficients printed as signed representatives.
    pub fn render(&self, field: &PrimeField) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (id, c)) in self.terms().enumerate() {
            let s = field.signed(c);
            let (neg, mag) = (s < 0, s.unsigned_abs());
            match (idx, neg) {
                (0, false) => {}
                (0, true) => out.push('-'),
                (_, false) => out.push_str(" + "),
                (_, true) => out.push_str(" - "),
            }
            if mag != 1 {
                // coefficients such as 1/2 have no small signed form; show the residue
                out.push_str(&format!("{mag}*"));
            }
            out.push_str(&id.to_string());
        }
        out
    }
}

/// A label together with its evaluated payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coded {
    pub label: LinComb,
    pub payload: Vec<Fe>,
}

impl Coded {
    pub fn zero(len: usize) -> Self {
        Self { label: LinComb::default(), payload: vec![Fe::ZERO; len] }
    }

    pub fn subfile(library: &FileLibrary, id: SubfileId) -> Self {
        Self { label: LinComb::single(id), payload: library.subfile(id).to_vec() }
    }

    pub fn evaluate(field: &PrimeField, library: &FileLibrary, label: LinComb) -> Self {
        let payload = label.evaluate(field, library);
        Self { label, payload }
    }

    /// `self += c * other` on label and payload together.
    pub fn add_scaled(&mut self, field: &PrimeField, c: Fe, other: &Coded) {
        self.label.add_scaled(field, c, &other.label);
        field.axpy(&mut self.payload, c, &other.payload);
    }

    /// `self += c * W` for a known subfile value.
    pub fn add_known(&mut self, field: &PrimeField, c: Fe, id: SubfileId, value: &[Fe]) {
        self.label.add_term(field, id, c);
        field.axpy(&mut self.payload, c, value);
    }

    pub fn scale(&mut self, field: &PrimeField, c: Fe) {
        self.label.scale(field, c);
        field.scale(&mut self.payload, c);
    }

    /// Whether the payload equals the label evaluated on `library`.
    pub fn is_consistent(&self, field: &PrimeField, library: &FileLibrary) -> bool {
        self.label.evaluate(field, library) == self.payload
    }
}
