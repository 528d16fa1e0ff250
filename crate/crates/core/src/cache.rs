//! Cache contents for mirrors and users.

use std::collections::HashMap;

use serde::Serialize;

use crate::coded::{Coded, LinComb, SubfileId};
use crate::gf::{Fe, PrimeField};
use crate::model::{FileLibrary, SystemConfig};

/// What a cached item declares itself to be.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ItemKind {
    /// `W^{ij}_n` stored as is.
    Uncoded(SubfileId),
    /// `W^{k,succ(k)}_n - W^{kj}_n`.
    Diff { k: usize, j: usize, file: usize },
    /// `sum over n of W^{k,succ(k)}_n`.
    SumAll { k: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CachedItem {
    pub kind: ItemKind,
    pub data: Coded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Node {
    Mirror(usize),
    User(usize),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ItemCounts {
    pub uncoded: usize,
    pub diff: usize,
    pub sum_all: usize,
}

impl ItemCounts {
    pub fn total(&self) -> usize {
        self.uncoded + self.diff + self.sum_all
    }
}

/// Cache of one mirror or user, indexed for lookups by label.
#[derive(Clone, Debug)]
pub struct Cache {
    owner: Node,
    items: Vec<CachedItem>,
    uncoded: HashMap<SubfileId, usize>,
    diffs: HashMap<(usize, usize, usize), usize>,
    sums: HashMap<usize, usize>,
}

impl Cache {
    pub fn new(owner: Node) -> Self {
        Self { owner, items: Vec::new(), uncoded: HashMap::new(), diffs: HashMap::new(), sums: HashMap::new() }
    }

    pub fn owner(&self) -> Node {
        self.owner
    }

    pub fn items(&self) -> &[CachedItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, item: CachedItem) {
        let idx = self.items.len();
        match item.kind {
            ItemKind::Uncoded(id) => {
                self.uncoded.insert(id, idx);
            }
            ItemKind::Diff { k, j, file } => {
                self.diffs.insert((k, j, file), idx);
            }
            ItemKind::SumAll { k } => {
                self.sums.insert(k, idx);
            }
        }
        self.items.push(item);
    }

    pub fn uncoded(&self, id: &SubfileId) -> Option<&[Fe]> {
        self.uncoded.get(id).map(|&i| self.items[i].data.payload.as_slice())
    }

    pub fn diff(&self, k: usize, j: usize, file: usize) -> Option<&Coded> {
        self.diffs.get(&(k, j, file)).map(|&i| &self.items[i].data)
    }

    pub fn sum_all(&self, k: usize) -> Option<&Coded> {
        self.sums.get(&k).map(|&i| &self.items[i].data)
    }

    pub fn counts(&self) -> ItemCounts {
        ItemCounts { uncoded: self.uncoded.len(), diff: self.diffs.len(), sum_all: self.sums.len() }
    }

    pub(crate) fn push_uncoded(&mut self, library: &FileLibrary, id: SubfileId) {
        self.push(CachedItem { kind: ItemKind::Uncoded(id), data: Coded::subfile(library, id) });
    }

    /// `W^{ij}_n` for every pair with both ends outside mirror `m`'s users.
    pub(crate) fn place_outside_pairs(&mut self, cfg: &SystemConfig, library: &FileLibrary, m: usize) {
        let block = cfg.block(m);
        for n in 1..=cfg.files() {
            for (i, j) in cfg.pairs() {
                if !block.contains(&i) && !block.contains(&j) {
                    self.push_uncoded(library, SubfileId::new(n, i, j));
                }
            }
        }
    }

    /// `W^{ij}_n` for pairs avoiding `k` that touch `k`'s mirror.
    pub(crate) fn place_user_pairs(&mut self, cfg: &SystemConfig, library: &FileLibrary, k: usize) {
        let block = cfg.block(cfg.parent(k));
        for n in 1..=cfg.files() {
            for (i, j) in cfg.pairs() {
                if i != k && j != k && (block.contains(&i) || block.contains(&j)) {
                    self.push_uncoded(library, SubfileId::new(n, i, j));
                }
            }
        }
    }

    /// The differences and the library-wide sum anchored at `(k, succ(k))`.
    ///
    /// `j = succ(k)` is skipped, its difference being identically zero.
    pub(crate) fn place_coded_row(&mut self, cfg: &SystemConfig, library: &FileLibrary, k: usize) {
        let field = cfg.field();
        let next = cfg.next(k);
        for n in 1..=cfg.files() {
            for j in (1..=cfg.users()).filter(|&j| j != k && j != next) {
                let label = LinComb::from_terms(
                    field,
                    [(SubfileId::new(n, k, next), Fe::ONE), (SubfileId::new(n, k, j), field.from_i64(-1))],
                );
                self.push(CachedItem {
                    kind: ItemKind::Diff { k, j, file: n },
                    data: Coded::evaluate(field, library, label),
                });
            }
        }
        let label = sum_label(field, cfg.files(), k, next);
        self.push(CachedItem { kind: ItemKind::SumAll { k }, data: Coded::evaluate(field, library, label) });
    }

    /// Every item's payload equals its label evaluated on the library.
    pub fn is_consistent(&self, field: &PrimeField, library: &FileLibrary) -> bool {
        self.items.iter().all(|it| it.data.is_consistent(field, library))
    }
}

pub(crate) fn sum_label(field: &PrimeField, files: usize, k: usize, next: usize) -> LinComb {
    LinComb::from_terms(field, (1..=files).map(|n| (SubfileId::new(n, k, next), Fe::ONE)))
}
