//! First scheme: coded placement at the mirrors, uncoded placement at the
//! users, and five mirror delivery phases A through E.

use std::collections::{BTreeMap, HashMap};

use crate::cache::{Cache, Node};
use crate::coded::{Coded, SubfileId};
use crate::delivery::{
    recover_row, transmissions_a, transmissions_b, DecodeFailure, Decoded, Knowledge, Origin, Phase, Transmission,
};
use crate::error::SimError;
use crate::gf::Fe;
use crate::model::{Demand, FileLibrary, ModelError, SystemConfig};

/// Mirror `m` stores the outside pairs uncoded, plus the differences and the
/// library sum anchored at `(k, succ(k))` for each of its users `k`.
pub fn place_mirror1(cfg: &SystemConfig, library: &FileLibrary, m: usize) -> Result<Cache, ModelError> {
    let block = cfg.users_of_mirror(m)?;
    let mut cache = Cache::new(Node::Mirror(m));
    cache.place_outside_pairs(cfg, library, m);
    for k in block {
        cache.place_coded_row(cfg, library, k);
    }
    Ok(cache)
}

/// User `k` stores every pair avoiding `k` that touches its mirror's block.
pub fn place_user1(cfg: &SystemConfig, library: &FileLibrary, k: usize) -> Result<Cache, ModelError> {
    cfg.mirror_of(k)?;
    let mut cache = Cache::new(Node::User(k));
    cache.place_user_pairs(cfg, library, k);
    Ok(cache)
}

/// Decoded subfiles `W^{kj}_{d_k}` keyed by user `k`.
pub type RecoveredRows = BTreeMap<usize, Vec<(SubfileId, Vec<Fe>)>>;

/// The mirror's reconstruction of `W^{kj}_{d_k}` for each of its users `k`
/// and every `j != k`.
pub fn mirror_recover_own_subfiles(
    cfg: &SystemConfig,
    m: usize,
    cache: &Cache,
    server_tx: &[Transmission],
    demand: &Demand,
) -> Result<RecoveredRows, SimError> {
    let block = cfg.users_of_mirror(m)?;
    if server_tx.len() != cfg.users() {
        return Err(SimError::Integrity(format!(
            "expected {} server transmissions, got {}",
            cfg.users(),
            server_tx.len()
        )));
    }
    let mut out = BTreeMap::new();
    for k in block {
        let row = recover_row(cfg, k, &server_tx[k - 1].data, cache, demand)
            .map_err(|e| SimError::Integrity(format!("mirror {m}: {e}")))?;
        out.insert(k, row);
    }
    Ok(out)
}

/// Phases A through E of mirror `m`, in that order.
pub fn mirror_transmissions1(
    cfg: &SystemConfig,
    m: usize,
    cache: &Cache,
    server_tx: &[Transmission],
    demand: &Demand,
) -> Result<Vec<Transmission>, SimError> {
    let rows = mirror_recover_own_subfiles(cfg, m, cache, server_tx, demand)?;
    let known: HashMap<SubfileId, &[Fe]> = rows.values().flatten().map(|(id, v)| (*id, v.as_slice())).collect();

    let field = cfg.field();
    let block = cfg.block(m);
    let boundary = cfg.boundary_user(m);
    let len = cfg.subfile_len();

    let mut out = transmissions_a(cfg, m, cache, server_tx)?;
    out.extend(transmissions_b(cfg, m, cache, demand)?);

    let mut emit = |phase: Phase, ids: Vec<SubfileId>| -> Result<(), SimError> {
        if ids.is_empty() {
            return Ok(());
        }
        let mut data = Coded::zero(len);
        for id in ids {
            let value = known
                .get(&id)
                .ok_or_else(|| SimError::Integrity(format!("mirror {m} has not recovered {id} for phase {phase}")))?;
            data.add_known(field, Fe::ONE, id, value);
        }
        out.push(Transmission { origin: Origin::Mirror(m), phase, data });
        Ok(())
    };

    // C: the anchors W^{k,succ(k)}_{d_k}, split by parity of the user index
    for parity in [1, 0] {
        let ids = block
            .clone()
            .filter(|k| k % 2 == parity)
            .map(|k| SubfileId::new(demand.file_of(k), k, cfg.next(k)))
            .collect();
        emit(Phase::C, ids)?;
    }

    // D: one sum per column j outside the block and other than the boundary user
    for j in (1..=cfg.users()).filter(|j| !block.contains(j) && *j != boundary) {
        let ids = block.clone().map(|k| SubfileId::new(demand.file_of(k), k, j)).collect();
        emit(Phase::D, ids)?;
    }

    // E: columns in the block plus the boundary user
    let mut columns: Vec<usize> = block.clone().collect();
    if !block.contains(&boundary) {
        columns.push(boundary);
    }
    for s in columns {
        let prev = cfg.prev(s);
        let ids =
            block.clone().filter(|&k| k != s && k != prev).map(|k| SubfileId::new(demand.file_of(k), k, s)).collect();
        emit(Phase::E, ids)?;
    }
    Ok(out)
}

/// Reconstructs `W_{d_k}` from user `k`'s cache and its mirror's phases.
///
/// Outside pairs come from B, `W^{jk}` from A, the anchor `W^{k,succ(k)}`
/// from its parity sum in C, and the remaining `W^{kj}` from D and E.
pub fn user_decode1(
    cfg: &SystemConfig,
    k: usize,
    cache: &Cache,
    mirror_tx: &[Transmission],
    demand: &Demand,
) -> Result<Decoded, DecodeFailure> {
    let field = cfg.field();
    let mut knowledge = Knowledge::from_cache(cache);
    for phase in [Phase::B, Phase::A, Phase::C, Phase::D, Phase::E] {
        knowledge.peel_phase(field, mirror_tx, phase);
    }
    knowledge.assemble(cfg, k, demand.file_of(k))
}
