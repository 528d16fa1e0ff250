//! WebAssembly bindings for the static demo page. Every export takes plain
//! numbers or strings and returns a JSON document, so the same functions are
//! exercised natively by the tests.

use hiercc_core::harness::{deliver, outcomes, place, sweep, transcript, DemandMode, SweepOptions};
use hiercc_core::rates::{composite, RateReport};
use hiercc_core::{Demand, DemandVector, FileLibrary, Rational, SchemeId, SystemConfig};
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Upper bound on `K1 * K2` accepted from the page, to keep it responsive.
const MAX_USERS: usize = 40;

#[derive(Serialize)]
struct Figure {
    frac: String,
    value: f64,
}

impl From<&Rational> for Figure {
    fn from(r: &Rational) -> Self {
        Self { frac: r.to_string(), value: r.to_f64() }
    }
}

#[derive(Serialize)]
struct SchemePoint {
    m1: Figure,
    m2: Figure,
    r1: Figure,
    r2: Figure,
    rbar: Figure,
    flags: Vec<String>,
}

fn scheme_point(cfg: &SystemConfig, scheme: SchemeId) -> SchemePoint {
    let (m1, m2, r1, r2, flags) = RateReport::formulas(cfg, scheme);
    let rbar = composite(&r1, &r2, cfg.mirrors());
    SchemePoint {
        m1: (&m1).into(),
        m2: (&m2).into(),
        r1: (&r1).into(),
        r2: (&r2).into(),
        rbar: (&rbar).into(),
        flags: flags.iter().map(ToString::to_string).collect(),
    }
}

fn error(msg: impl ToString) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

fn scheme_of(s: u32) -> Result<SchemeId, String> {
    match s {
        1 => Ok(SchemeId::First),
        2 => Ok(SchemeId::Second),
        _ => Err(format!("scheme must be 1 or 2, got {s}")),
    }
}

fn config(k1: usize, k2: usize, n: usize) -> Result<SystemConfig, String> {
    if k1 * k2 > MAX_USERS {
        return Err(format!("the demo is limited to K1*K2 <= {MAX_USERS}"));
    }
    SystemConfig::new(k1, k2, n, 1, None).map_err(|e| e.to_string())
}

/// Closed-form memories and rates of both schemes for `K1 = 1..=k1_max`,
/// with `N = K1 * K2` files.
#[wasm_bindgen]
pub fn rate_curve(k2: usize, k1_max: usize) -> String {
    let mut rows = Vec::new();
    for k1 in 1..=k1_max {
        let cfg = match config(k1, k2, k1 * k2) {
            Ok(c) => c,
            Err(e) => return error(e),
        };
        rows.push(json!({
            "k1": k1,
            "k2": k2,
            "n": cfg.files(),
            "scheme1": scheme_point(&cfg, SchemeId::First),
            "scheme2": scheme_point(&cfg, SchemeId::Second),
        }));
    }
    json!({ "rows": rows }).to_string()
}

/// Symbolic transcript (server lines and the listed mirror's emissions) and
/// per-user decode outcome for one demand, given as `"1,2,3,..."`.
#[wasm_bindgen]
pub fn trace(k1: usize, k2: usize, n: usize, scheme: u32, demand: &str, mirror: usize) -> String {
    let run = || -> Result<String, String> {
        let cfg = config(k1, k2, n)?;
        let scheme = scheme_of(scheme)?;
        let d = demand
            .split(',')
            .map(|v| v.trim().parse::<usize>().map_err(|e| format!("demand entry `{}`: {e}", v.trim())))
            .collect::<Result<Vec<_>, _>>()
            .map(DemandVector)?;
        let lines = transcript(&cfg, scheme, &d, &[mirror]).map_err(|e| e.to_string())?;
        let library = FileLibrary::random(&cfg, 0);
        let demand = Demand::new(&cfg, d).map_err(|e| e.to_string())?;
        let placement = place(&cfg, scheme, &library).map_err(|e| e.to_string())?;
        let delivery = deliver(&cfg, &placement, &library, &demand).map_err(|e| e.to_string())?;
        let users = outcomes(&cfg, &placement, &delivery, &library, &demand, false);
        Ok(json!({ "prime": cfg.field().modulus(), "lines": lines, "users": users }).to_string())
    };
    run().unwrap_or_else(error)
}

/// Seeded random sweep; returns the full sweep report.
#[wasm_bindgen]
pub fn verify_random(k1: usize, k2: usize, n: usize, scheme: u32, seed: u64, trials: usize) -> String {
    let run = || -> Result<String, String> {
        let cfg = config(k1, k2, n)?;
        let scheme = scheme_of(scheme)?;
        let mode = DemandMode::Random { seed, trials: trials.min(500) };
        let opts = SweepOptions { oracle: cfg.users() <= 8, library_seed: seed, ..SweepOptions::default() };
        let report = sweep(&cfg, scheme, mode, opts).map_err(|e| e.to_string())?;
        serde_json::to_string(&report).map_err(|e| e.to_string())
    };
    run().unwrap_or_else(error)
}
