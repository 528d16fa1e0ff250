//! Second scheme: the coded items move into the user caches; mirrors keep
//! only the outside pairs and deliver phases A and B.

use crate::cache::{Cache, Node};
use crate::delivery::{
    recover_row, transmissions_a, transmissions_b, DecodeFailure, Decoded, Knowledge, Phase, Source, Transmission,
};
use crate::error::SimError;
use crate::model::{Demand, FileLibrary, ModelError, SystemConfig};

pub fn place_mirror2(cfg: &SystemConfig, library: &FileLibrary, m: usize) -> Result<Cache, ModelError> {
    cfg.users_of_mirror(m)?;
    let mut cache = Cache::new(Node::Mirror(m));
    cache.place_outside_pairs(cfg, library, m);
    Ok(cache)
}

/// Scheme-1 user pairs, plus `N(K-2)` differences and one library sum
/// anchored at `(k, succ(k))`.
pub fn place_user2(cfg: &SystemConfig, library: &FileLibrary, k: usize) -> Result<Cache, ModelError> {
    cfg.mirror_of(k)?;
    let mut cache = Cache::new(Node::User(k));
    cache.place_user_pairs(cfg, library, k);
    cache.place_coded_row(cfg, library, k);
    Ok(cache)
}

/// Phases A and B, produced by the same code path as the first scheme.
pub fn mirror_transmissions2(
    cfg: &SystemConfig,
    m: usize,
    cache: &Cache,
    server_tx: &[Transmission],
    demand: &Demand,
) -> Result<Vec<Transmission>, SimError> {
    cfg.users_of_mirror(m)?;
    let mut out = transmissions_a(cfg, m, cache, server_tx)?;
    out.extend(transmissions_b(cfg, m, cache, demand)?);
    Ok(out)
}

/// The user replays the first scheme's mirror-side recovery on its own
/// forwarded `Y^k`, then reads `W^{jk}` from A and the outside pairs from B.
pub fn user_decode2(
    cfg: &SystemConfig,
    k: usize,
    cache: &Cache,
    mirror_tx: &[Transmission],
    demand: &Demand,
) -> Result<Decoded, DecodeFailure> {
    let field = cfg.field();
    let mut knowledge = Knowledge::from_cache(cache);
    // the forwarded Y^k is the phase-A combination whose terms all start at k
    let own =
        mirror_tx.iter().find(|t| t.phase == Phase::A && !t.label().is_empty() && t.label().ids().all(|id| id.i == k));
    if let Some(y_k) = own {
        if let Ok(row) = recover_row(cfg, k, &y_k.data, cache, demand) {
            for (id, value) in row {
                knowledge.learn(id, value, Source::CodedCache);
            }
        }
    }
    knowledge.peel_phase(field, mirror_tx, Phase::B);
    knowledge.peel_phase(field, mirror_tx, Phase::A);
    knowledge.assemble(cfg, k, demand.file_of(k))
}
