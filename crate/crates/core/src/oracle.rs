//! Decoder-agnostic decodability check.
//!
//! Each subfile of the library is an unknown over `GF(p)`. A user's
//! knowledge is the row space spanned by the labels of its cache items and
//! of every transmission it hears; it can recover `W^{ij}_n` exactly when
//! the unit vector of that subfile lies in that space. Only labels are read,
//! never payloads or decoder state.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cache::Cache;
use crate::coded::{LinComb, SubfileId};
use crate::delivery::Transmission;
use crate::gf::{Fe, PrimeField};
use crate::model::SystemConfig;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleVerdict {
    pub user: usize,
    pub decodable: bool,
    /// Pairs `(i, j)` of the requested file outside the row space.
    pub missing: Vec<(usize, usize)>,
}

/// Verdict for user `k` wanting file `file`, given everything it holds or hears.
pub fn user_verdict<'a>(
    cfg: &SystemConfig,
    k: usize,
    file: usize,
    cache: &Cache,
    heard: impl IntoIterator<Item = &'a Transmission>,
) -> OracleVerdict {
    let rows: Vec<&LinComb> =
        cache.items().iter().map(|it| &it.data.label).chain(heard.into_iter().map(|t| &t.data.label)).collect();
    let targets: Vec<SubfileId> = cfg.pairs().map(|(i, j)| SubfileId::new(file, i, j)).collect();
    let spanned = span_contains_units(cfg.field(), &rows, &targets);
    let missing: Vec<(usize, usize)> =
        targets.iter().zip(&spanned).filter(|(_, ok)| !**ok).map(|(id, _)| (id.i, id.j)).collect();
    OracleVerdict { user: k, decodable: missing.is_empty(), missing }
}

/// For each target, whether its unit vector lies in the span of `rows`.
pub fn span_contains_units(field: &PrimeField, rows: &[&LinComb], targets: &[SubfileId]) -> Vec<bool> {
    // compress to the columns that actually occur
    let mut columns: BTreeMap<SubfileId, usize> = BTreeMap::new();
    for id in rows.iter().flat_map(|r| r.ids()).chain(targets.iter().copied()) {
        let next = columns.len();
        columns.entry(id).or_insert(next);
    }
    let width = columns.len();
    let mut matrix: Vec<Vec<Fe>> = rows
        .iter()
        .map(|r| {
            let mut dense = vec![Fe::ZERO; width];
            for (id, c) in r.terms() {
                dense[columns[&id]] = c;
            }
            dense
        })
        .collect();

    let pivots = reduce_row_echelon(field, &mut matrix, width);

    // In reduced row echelon form a unit vector is in the row space iff it is
    // itself one of the rows.
    targets
        .iter()
        .map(|id| {
            let col = columns[id];
            pivots
                .iter()
                .any(|&(row, pc)| pc == col && matrix[row].iter().enumerate().all(|(c, v)| c == col || v.is_zero()))
        })
        .collect()
}

/// Gauss-Jordan elimination in place. Returns `(row, pivot column)` pairs.
fn reduce_row_echelon(field: &PrimeField, m: &mut [Vec<Fe>], width: usize) -> Vec<(usize, usize)> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..width {
        if row == m.len() {
            break;
        }
        let Some(sel) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, sel);
        let inv = field.inv(m[row][col]).expect("pivot is nonzero");
        field.scale(&mut m[row], inv);
        let pivot_row = m[row].clone();
        for (r, other) in m.iter_mut().enumerate() {
            if r != row && !other[col].is_zero() {
                let c = field.neg(other[col]);
                field.axpy(other, c, &pivot_row);
            }
        }
        pivots.push((row, col));
        row += 1;
    }
    pivots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_vectors_in_span() {
        let f = PrimeField::new(5).unwrap();
        let a = SubfileId::new(1, 1, 2);
        let b = SubfileId::new(1, 2, 1);
        let c = SubfileId::new(2, 1, 2);
        let r1 = LinComb::from_terms(&f, [(a, Fe::ONE), (b, f.elem(2))]);
        let r2 = LinComb::from_terms(&f, [(a, Fe::ONE), (b, f.elem(3))]);
        let r3 = LinComb::from_terms(&f, [(c, Fe::ONE), (a, Fe::ONE)]);
        assert_eq!(span_contains_units(&f, &[&r1, &r2], &[a, b, c]), [true, true, false]);
        assert_eq!(span_contains_units(&f, &[&r1], &[a, b]), [false, false]);
        assert_eq!(span_contains_units(&f, &[&r1, &r3], &[a, c]), [false, false]);
        assert_eq!(span_contains_units(&f, &[&r1, &r2, &r3], &[c]), [true]);
    }

    #[test]
    fn characteristic_two_cancellation() {
        // x + y and x - y span only one dimension in GF(2)
        let f = PrimeField::new(2).unwrap();
        let x = SubfileId::new(1, 1, 2);
        let y = SubfileId::new(1, 2, 1);
        let plus = LinComb::from_terms(&f, [(x, Fe::ONE), (y, Fe::ONE)]);
        let minus = LinComb::from_terms(&f, [(x, Fe::ONE), (y, f.from_i64(-1))]);
        assert_eq!(span_contains_units(&f, &[&plus, &minus], &[x]), [false]);
        let f3 = PrimeField::new(3).unwrap();
        let plus = LinComb::from_terms(&f3, [(x, Fe::ONE), (y, Fe::ONE)]);
        let minus = LinComb::from_terms(&f3, [(x, Fe::ONE), (y, f3.from_i64(-1))]);
        assert_eq!(span_contains_units(&f3, &[&plus, &minus], &[x, y]), [true, true]);
    }
}
