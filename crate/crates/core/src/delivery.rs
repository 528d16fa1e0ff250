//! Delivery machinery shared by both schemes: the server broadcast, mirror
//! phases A and B, recovery of a user's `(k, *)` row from coded cache
//! contents, and the peeling helpers used by the user decoders.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::cache::{Cache, ItemKind};
use crate::coded::{Coded, LinComb, SubfileId};
use crate::error::SimError;
use crate::gf::{Fe, PrimeField};
use crate::model::{Demand, FileLibrary, SystemConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Origin {
    Server,
    Mirror(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Phase {
    /// Server to mirrors.
    SM,
    A,
    B,
    C,
    D,
    E,
}

impl Phase {
    pub const MIRROR: [Phase; 5] = [Phase::A, Phase::B, Phase::C, Phase::D, Phase::E];
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Phase::SM => "SM",
            Phase::A => "A",
            Phase::B => "B",
            Phase::C => "C",
            Phase::D => "D",
            Phase::E => "E",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transmission {
    pub origin: Origin,
    pub phase: Phase,
    pub data: Coded,
}

impl Transmission {
    pub fn label(&self) -> &LinComb {
        &self.data.label
    }
}

/// Per-phase emission counts of one mirror.
pub fn phase_counts(tx: &[Transmission]) -> BTreeMap<Phase, usize> {
    let mut counts = BTreeMap::new();
    for t in tx {
        *counts.entry(t.phase).or_insert(0) += 1;
    }
    counts
}

/// `Y^k = sum over s != k of (alpha^s_k / N^s_k) W^{ks}_{d_s}`, one per user.
pub fn server_transmissions(
    cfg: &SystemConfig,
    library: &FileLibrary,
    demand: &Demand,
) -> Result<Vec<Transmission>, SimError> {
    let field = cfg.field();
    let users = cfg.users();
    (1..=users)
        .map(|k| {
            let mut terms = Vec::with_capacity(users - 1);
            for s in (1..=users).filter(|&s| s != k) {
                let c = demand.coefficient(field, k, s)?;
                terms.push((SubfileId::new(demand.file_of(s), k, s), c));
            }
            let label = LinComb::from_terms(field, terms);
            Ok(Transmission { origin: Origin::Server, phase: Phase::SM, data: Coded::evaluate(field, library, label) })
        })
        .collect()
}

/// Phase A: each `Y^k` with every term the mirror caches uncoded removed.
/// For `k` in the mirror's block nothing is cached, so `Y^k` goes out verbatim.
pub fn transmissions_a(
    cfg: &SystemConfig,
    m: usize,
    cache: &Cache,
    server_tx: &[Transmission],
) -> Result<Vec<Transmission>, SimError> {
    let field = cfg.field();
    let block = cfg.block(m);
    server_tx
        .iter()
        .enumerate()
        .map(|(idx, y)| {
            let k = idx + 1;
            let mut data = y.data.clone();
            if !block.contains(&k) {
                for (id, c) in y.data.label.terms() {
                    if block.contains(&id.j) {
                        continue;
                    }
                    let value = cache.uncoded(&id).ok_or_else(|| {
                        SimError::Integrity(format!("mirror {m} cannot strip {id} from Y^{k}: not cached"))
                    })?;
                    data.add_known(field, field.neg(c), id, value);
                }
            }
            if data.label.is_empty() {
                return Err(SimError::Integrity(format!("phase A combination for user {k} is empty")));
            }
            Ok(Transmission { origin: Origin::Mirror(m), phase: Phase::A, data })
        })
        .collect()
}

/// Phase B: `W^{ij}_{d_k}` for every outside pair, once per user `k` of the mirror.
pub fn transmissions_b(
    cfg: &SystemConfig,
    m: usize,
    cache: &Cache,
    demand: &Demand,
) -> Result<Vec<Transmission>, SimError> {
    let block = cfg.block(m);
    let mut out = Vec::new();
    for k in block.clone() {
        let file = demand.file_of(k);
        for (i, j) in cfg.pairs() {
            if block.contains(&i) || block.contains(&j) {
                continue;
            }
            let id = SubfileId::new(file, i, j);
            let value =
                cache.uncoded(&id).ok_or_else(|| SimError::Integrity(format!("mirror {m} lacks {id} for phase B")))?;
            out.push(Transmission {
                origin: Origin::Mirror(m),
                phase: Phase::B,
                data: Coded { label: LinComb::single(id), payload: value.to_vec() },
            });
        }
    }
    Ok(out)
}

/// Recovers `W^{kj}_{d_k}` for every `j != k` from `Y^k`, the differences
/// `W^{k,succ(k)}_n - W^{kj}_n` and the sum `sum_n W^{k,succ(k)}_n`.
///
/// Every intermediate label is checked against the combination it must be;
/// a mismatch is returned as an error string.
pub fn recover_row(
    cfg: &SystemConfig,
    k: usize,
    y_k: &Coded,
    cache: &Cache,
    demand: &Demand,
) -> Result<Vec<(SubfileId, Vec<Fe>)>, String> {
    let field = cfg.field();
    let next = cfg.next(k);
    let own = demand.file_of(k);
    let mut acc = y_k.clone();
    for j in (1..=cfg.users()).filter(|&j| j != k && j != next) {
        let c = demand.coefficient(field, k, j).map_err(|e| e.to_string())?;
        let diff =
            cache.diff(k, j, demand.file_of(j)).ok_or_else(|| format!("missing difference for (k={k}, j={j})"))?;
        acc.add_scaled(field, c, diff);
    }

    // Surjectivity collapses the sum to the other files' subfiles, minus our
    // own when someone else shares our file.
    let shared = demand.count(k, k) > 0;
    let mut expected = LinComb::from_terms(
        field,
        (1..=cfg.files()).filter(|&n| n != own).map(|n| (SubfileId::new(n, k, next), Fe::ONE)),
    );
    if shared {
        expected.add_term(field, SubfileId::new(own, k, next), field.from_i64(-1));
    }
    if acc.label != expected {
        return Err(format!(
            "row {k}: combined sum is {} instead of {}",
            acc.label.render(field),
            expected.render(field)
        ));
    }

    let sum = cache.sum_all(k).ok_or_else(|| format!("missing library sum for row {k}"))?;
    let mut anchor = sum.clone();
    anchor.add_scaled(field, field.from_i64(-1), &acc);
    let divisor = field.elem(1 + u64::from(shared));
    let inv = field.inv(divisor).map_err(|e| e.to_string())?;
    anchor.scale(field, inv);
    let anchor_id = SubfileId::new(own, k, next);
    if anchor.label != LinComb::single(anchor_id) {
        return Err(format!("row {k}: isolated {} instead of {anchor_id}", anchor.label.render(field)));
    }

    let mut out = Vec::with_capacity(cfg.users() - 1);
    for j in (1..=cfg.users()).filter(|&j| j != k) {
        if j == next {
            out.push((anchor_id, anchor.payload.clone()));
            continue;
        }
        let diff = cache.diff(k, j, own).ok_or_else(|| format!("missing difference ({k},{j},{own})"))?;
        let mut w = anchor.clone();
        w.add_scaled(field, field.from_i64(-1), diff);
        let id = SubfileId::new(own, k, j);
        if w.label != LinComb::single(id) {
            return Err(format!("row {k}: expanded {} instead of {id}", w.label.render(field)));
        }
        out.push((id, w.payload));
    }
    Ok(out)
}

/// Where a decoded subfile came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Source {
    /// Stored uncoded in the user's cache.
    Cache,
    /// Derived from coded cache contents (differences and library sum).
    CodedCache,
    Phase(Phase),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Cache => f.write_str("cache"),
            Source::CodedCache => f.write_str("coded cache"),
            Source::Phase(p) => write!(f, "phase {p}"),
        }
    }
}

/// Subfile values a user has resolved so far.
#[derive(Debug, Default)]
pub(crate) struct Knowledge {
    values: HashMap<SubfileId, (Vec<Fe>, Source)>,
}

impl Knowledge {
    pub(crate) fn from_cache(cache: &Cache) -> Self {
        let mut k = Self::default();
        for item in cache.items() {
            if let ItemKind::Uncoded(id) = item.kind {
                k.values.insert(id, (item.data.payload.clone(), Source::Cache));
            }
        }
        k
    }

    pub(crate) fn learn(&mut self, id: SubfileId, value: Vec<Fe>, source: Source) {
        self.values.entry(id).or_insert((value, source));
    }

    /// Subtracts every known term of `coded`; if one unknown remains, solves for it.
    pub(crate) fn peel(&self, field: &PrimeField, coded: &Coded) -> Option<(SubfileId, Vec<Fe>)> {
        let mut residual = coded.clone();
        for (id, c) in coded.label.terms() {
            if let Some((value, _)) = self.values.get(&id) {
                residual.add_known(field, field.neg(c), id, value);
            }
        }
        let (id, c) = residual.label.as_single()?;
        let inv = field.inv(c).ok()?;
        residual.scale(field, inv);
        Some((id, residual.payload))
    }

    /// Peels each transmission of `phase` once, learning what resolves.
    pub(crate) fn peel_phase(&mut self, field: &PrimeField, tx: &[Transmission], phase: Phase) {
        for t in tx.iter().filter(|t| t.phase == phase) {
            if let Some((id, value)) = self.peel(field, &t.data) {
                self.learn(id, value, Source::Phase(phase));
            }
        }
    }

    /// Assembles file `file` in rank order, or reports the unresolved pairs.
    pub(crate) fn assemble(&self, cfg: &SystemConfig, user: usize, file: usize) -> Result<Decoded, DecodeFailure> {
        let mut symbols = Vec::with_capacity(cfg.file_len());
        let mut missing = Vec::new();
        let mut provenance = BTreeMap::new();
        for (i, j) in cfg.pairs() {
            match self.values.get(&SubfileId::new(file, i, j)) {
                Some((value, source)) => {
                    symbols.extend_from_slice(value);
                    *provenance.entry(*source).or_insert(0) += 1;
                }
                None => missing.push((i, j)),
            }
        }
        if missing.is_empty() {
            Ok(Decoded { user, file, symbols, provenance })
        } else {
            Err(DecodeFailure { user, file, missing })
        }
    }
}

/// A user's reconstructed file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub user: usize,
    pub file: usize,
    pub symbols: Vec<Fe>,
    /// Number of the file's subfiles obtained from each source.
    pub provenance: BTreeMap<Source, usize>,
}

/// The ordered pairs `(i, j)` of `W_{d_k}` a user could not resolve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecodeFailure {
    pub user: usize,
    pub file: usize,
    pub missing: Vec<(usize, usize)>,
}

impl fmt::Display for DecodeFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "user {} cannot resolve {} subfiles of file {}: {:?}",
            self.user,
            self.missing.len(),
            self.file,
            self.missing
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DemandVector;

    #[test]
    fn example_server_broadcast() {
        let cfg = SystemConfig::new(3, 2, 6, 2, None).unwrap();
        let lib = FileLibrary::random(&cfg, 11);
        let d = Demand::new(&cfg, DemandVector::distinct(6)).unwrap();
        let tx = server_transmissions(&cfg, &lib, &d).unwrap();
        assert_eq!(tx.len(), 6);
        assert_eq!(tx[0].label().render(cfg.field()), "W^{12}_2 + W^{13}_3 + W^{14}_4 + W^{15}_5 + W^{16}_6");
        assert!(tx.iter().all(|t| t.data.is_consistent(cfg.field(), &lib)));
    }

    #[test]
    fn repeated_demand_carries_negative_coefficient() {
        let cfg = SystemConfig::new(2, 2, 3, 1, None).unwrap();
        let lib = FileLibrary::random(&cfg, 1);
        let d = Demand::new(&cfg, DemandVector(vec![1, 1, 2, 3])).unwrap();
        let tx = server_transmissions(&cfg, &lib, &d).unwrap();
        let f = cfg.field();
        // N^2_1 = 1 (only user 2 among S_1 asks for file 1), alpha = -1
        assert_eq!(tx[0].label().coefficient(&SubfileId::new(1, 1, 2)), f.from_i64(-1));
        assert_eq!(tx[0].label().render(f), "-W^{12}_1 + W^{13}_2 + W^{14}_3");
    }

    #[test]
    fn peel_solves_single_unknown() {
        let cfg = SystemConfig::new(2, 2, 3, 3, None).unwrap();
        let f = cfg.field();
        let lib = FileLibrary::random(&cfg, 5);
        let a = SubfileId::new(1, 1, 2);
        let b = SubfileId::new(2, 3, 4);
        let mut c = Coded::subfile(&lib, a);
        c.add_scaled(f, f.elem(2), &Coded::subfile(&lib, b));
        let mut know = Knowledge::default();
        assert_eq!(know.peel(f, &c), None);
        know.learn(b, lib.subfile(b).to_vec(), Source::Cache);
        assert_eq!(know.peel(f, &c), Some((a, lib.subfile(a).to_vec())));
    }
}
