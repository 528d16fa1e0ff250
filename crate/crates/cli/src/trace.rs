//! Human-readable episode transcript: placement summary, every transmission
//! grouped by phase, and how each user assembled its file.

use std::fmt::Write as _;

use hiercc_core::cache::Cache;
use hiercc_core::delivery::{phase_counts, Phase};
use hiercc_core::harness::{decode_user, deliver, place};
use hiercc_core::rates::{measured_memory, measured_rates};
use hiercc_core::{scheme1, Demand, DemandVector, FileLibrary, SchemeId, SimError, SystemConfig};

use crate::table::cyclic_demand;
use crate::CliError;

/// Parses `1,2,3` into a demand vector.
pub fn parse_demand(s: &str) -> Result<DemandVector, CliError> {
    s.split(',')
        .map(|v| v.trim().parse::<usize>().map_err(|e| CliError::Usage(format!("demand entry `{}`: {e}", v.trim()))))
        .collect::<Result<_, _>>()
        .map(DemandVector)
}

fn describe(cache: &Cache) -> String {
    let c = cache.counts();
    let mut parts = vec![format!("{} uncoded", c.uncoded)];
    if c.diff > 0 {
        parts.push(format!("{} differences", c.diff));
    }
    if c.sum_all > 0 {
        parts.push(format!("{} library sums", c.sum_all));
    }
    format!("{} items ({})", cache.len(), parts.join(", "))
}

/// Transcript of one episode. `demand` defaults to `(1, ..., K)` when
/// `N = K` and to the cyclic demand otherwise; `mirrors` defaults to all.
pub fn trace(
    cfg: &SystemConfig,
    scheme: SchemeId,
    demand: Option<&str>,
    mirrors: &[usize],
    seed: u64,
) -> Result<String, CliError> {
    let demand = match demand {
        Some(s) => parse_demand(s)?,
        None if cfg.files() == cfg.users() => DemandVector::distinct(cfg.users()),
        None => cyclic_demand(cfg),
    };
    let demand = Demand::new(cfg, demand).map_err(SimError::from)?;
    let mirrors: Vec<usize> = if mirrors.is_empty() { (1..=cfg.mirrors()).collect() } else { mirrors.to_vec() };
    for &m in &mirrors {
        cfg.users_of_mirror(m).map_err(SimError::from)?;
    }
    let library = FileLibrary::random(cfg, seed);
    let placement = place(cfg, scheme, &library)?;
    let delivery = deliver(cfg, &placement, &library, &demand)?;
    let field = cfg.field();
    let t = cfg.subpacketization();

    let mut s = String::new();
    let w = &mut s;
    writeln!(
        w,
        "# K1={} K2={} N={} L={} p={} scheme {} demand {}",
        cfg.mirrors(),
        cfg.users_per_mirror(),
        cfg.files(),
        cfg.subfile_len(),
        field.modulus(),
        scheme,
        demand.vector()
    )
    .ok();
    writeln!(w, "# each file is split into K(K-1) = {t} subfiles W^{{ij}}_n").ok();

    writeln!(w, "\n## placement").ok();
    for &m in &mirrors {
        let cache = placement.mirror(m);
        writeln!(w, "mirror {m}: {}, M1 = {}", describe(cache), measured_memory(cfg, cache.len())).ok();
        for k in cfg.users_of_mirror(m).map_err(SimError::from)? {
            let cache = placement.user(k);
            writeln!(w, "  user {k}: {}, M2 = {}", describe(cache), measured_memory(cfg, cache.len())).ok();
        }
    }

    let logs: Vec<_> = delivery.all().cloned().collect();
    let rates = measured_rates(cfg, &logs);
    writeln!(w, "\n## server delivery: {} transmissions, R1 = {}", delivery.server.len(), rates.r1).ok();
    for (i, tx) in delivery.server.iter().enumerate() {
        writeln!(w, "Y^{} = {}", i + 1, tx.label().render(field)).ok();
    }

    for &m in &mirrors {
        let sent = delivery.mirror(m);
        writeln!(w, "\n## mirror {m} delivery: {} transmissions, R2 = {}", sent.len(), rates.r2).ok();
        let counts = phase_counts(sent);
        for phase in Phase::MIRROR {
            let Some(count) = counts.get(&phase) else { continue };
            writeln!(w, "-- phase {phase}: {count}").ok();
            for tx in sent.iter().filter(|tx| tx.phase == phase) {
                writeln!(w, "mirror {m} {phase}: {}", tx.label().render(field)).ok();
            }
        }
    }

    writeln!(w, "\n## decoding").ok();
    for &m in &mirrors {
        if scheme == SchemeId::First {
            let rows = scheme1::mirror_recover_own_subfiles(cfg, m, placement.mirror(m), &delivery.server, &demand)?;
            let total: usize = rows.values().map(Vec::len).sum();
            let users: Vec<String> = rows.keys().map(|k| format!("Y^{k}")).collect();
            writeln!(w, "mirror {m} strips its differences from {} and recovers {total} subfiles", users.join(", "))
                .ok();
        }
        for k in cfg.users_of_mirror(m).map_err(SimError::from)? {
            let file = demand.file_of(k);
            match decode_user(cfg, scheme, k, placement.user(k), delivery.mirror(m), &demand) {
                Ok(dec) => {
                    let parts: Vec<String> = dec.provenance.iter().map(|(src, n)| format!("{n} from {src}")).collect();
                    let verdict = if dec.symbols == library.file(file) { "matches the library" } else { "MISMATCH" };
                    writeln!(w, "user {k} wants W_{file}: {} -> {verdict}", parts.join(", ")).ok();
                }
                Err(fail) => {
                    let missing: Vec<String> = fail.missing.iter().map(|(i, j)| format!("({i},{j})")).collect();
                    writeln!(w, "user {k} wants W_{file}: FAILED, unresolved pairs {}", missing.join(" ")).ok();
                }
            }
        }
    }
    Ok(s)
}
