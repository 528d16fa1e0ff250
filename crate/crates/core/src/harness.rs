//! Episode runner, demand sweeps and golden transcripts.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_bigint::RandBigInt;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cache::Cache;
use crate::delivery::{self, phase_counts, DecodeFailure, Decoded, Phase, Transmission};
use crate::error::SimError;
use crate::model::{Demand, DemandVector, FileLibrary, SystemConfig};
use crate::oracle::{self, OracleVerdict};
use crate::rates::{self, FormulaFlag, MeasuredRates, RateReport, Rational, SchemeId};
use crate::{scheme1, scheme2};

pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Demand-independent cache contents of every mirror and user.
#[derive(Clone, Debug)]
pub struct Placement {
    pub scheme: SchemeId,
    pub mirrors: Vec<Cache>,
    pub users: Vec<Cache>,
}

impl Placement {
    pub fn mirror(&self, m: usize) -> &Cache {
        &self.mirrors[m - 1]
    }

    pub fn user(&self, k: usize) -> &Cache {
        &self.users[k - 1]
    }
}

pub fn place(cfg: &SystemConfig, scheme: SchemeId, library: &FileLibrary) -> Result<Placement, SimError> {
    let (mirrors, users) = match scheme {
        SchemeId::First => (
            (1..=cfg.mirrors()).map(|m| scheme1::place_mirror1(cfg, library, m)).collect::<Result<_, _>>()?,
            (1..=cfg.users()).map(|k| scheme1::place_user1(cfg, library, k)).collect::<Result<_, _>>()?,
        ),
        SchemeId::Second => (
            (1..=cfg.mirrors()).map(|m| scheme2::place_mirror2(cfg, library, m)).collect::<Result<_, _>>()?,
            (1..=cfg.users()).map(|k| scheme2::place_user2(cfg, library, k)).collect::<Result<_, _>>()?,
        ),
    };
    Ok(Placement { scheme, mirrors, users })
}

/// Server broadcast and every mirror's emissions for one demand.
#[derive(Clone, Debug)]
pub struct Delivery {
    pub server: Vec<Transmission>,
    pub mirrors: Vec<Vec<Transmission>>,
}

impl Delivery {
    pub fn mirror(&self, m: usize) -> &[Transmission] {
        &self.mirrors[m - 1]
    }

    pub fn all(&self) -> impl Iterator<Item = &Transmission> {
        self.server.iter().chain(self.mirrors.iter().flatten())
    }
}

pub fn deliver(
    cfg: &SystemConfig,
    placement: &Placement,
    library: &FileLibrary,
    demand: &Demand,
) -> Result<Delivery, SimError> {
    let server = delivery::server_transmissions(cfg, library, demand)?;
    let mirrors = (1..=cfg.mirrors())
        .map(|m| {
            let cache = placement.mirror(m);
            match placement.scheme {
                SchemeId::First => scheme1::mirror_transmissions1(cfg, m, cache, &server, demand),
                SchemeId::Second => scheme2::mirror_transmissions2(cfg, m, cache, &server, demand),
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(Delivery { server, mirrors })
}

/// Runs the scheme's user decoder for user `k` against `heard`.
pub fn decode_user(
    cfg: &SystemConfig,
    scheme: SchemeId,
    k: usize,
    cache: &Cache,
    heard: &[Transmission],
    demand: &Demand,
) -> Result<Decoded, DecodeFailure> {
    match scheme {
        SchemeId::First => scheme1::user_decode1(cfg, k, cache, heard, demand),
        SchemeId::Second => scheme2::user_decode2(cfg, k, cache, heard, demand),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UserOutcome {
    pub user: usize,
    pub file: usize,
    pub success: bool,
    pub missing: Vec<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleVerdict>,
}

impl UserOutcome {
    /// Oracle and decoder name the same unresolved pairs.
    pub fn oracle_agrees(&self) -> Option<bool> {
        self.oracle.as_ref().map(|v| v.decodable == self.success && v.missing == self.missing)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EpisodeReport {
    pub k1: usize,
    pub k2: usize,
    pub n: usize,
    pub subfile_len: usize,
    pub prime: u32,
    pub scheme: SchemeId,
    pub demand: DemandVector,
    pub users: Vec<UserOutcome>,
    pub phase_counts: BTreeMap<usize, BTreeMap<Phase, usize>>,
    pub measured: MeasuredRates,
    pub measured_m1: Rational,
    pub measured_m2: Rational,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl EpisodeReport {
    pub fn success(&self) -> bool {
        self.users.iter().all(|u| u.success)
    }

    pub fn missing_total(&self) -> usize {
        self.users.iter().map(|u| u.missing.len()).sum()
    }

    pub fn oracle_agrees(&self) -> Option<bool> {
        self.users.iter().map(UserOutcome::oracle_agrees).try_fold(true, |acc, a| a.map(|a| acc && a))
    }

    pub fn rate_report(&self, cfg: &SystemConfig) -> RateReport {
        RateReport::new(cfg, self.scheme, (self.measured_m1.clone(), self.measured_m2.clone()), &self.measured)
    }
}

/// Runs placement, delivery and decoding for one demand and checks every
/// reconstructed file against the library symbol for symbol.
pub fn run_episode(
    cfg: &SystemConfig,
    scheme: SchemeId,
    demand: &DemandVector,
    library: &FileLibrary,
) -> Result<EpisodeReport, SimError> {
    let placement = place(cfg, scheme, library)?;
    let demand = Demand::new(cfg, demand.clone())?;
    run_with_placement(cfg, &placement, library, &demand, false)
}

pub fn run_with_placement(
    cfg: &SystemConfig,
    placement: &Placement,
    library: &FileLibrary,
    demand: &Demand,
    with_oracle: bool,
) -> Result<EpisodeReport, SimError> {
    let start = Instant::now();
    let delivery = deliver(cfg, placement, library, demand)?;
    let logs: Vec<Transmission> = delivery.all().cloned().collect();
    let measured = rates::measured_rates(cfg, &logs);
    let users = outcomes(cfg, placement, &delivery, library, demand, with_oracle);
    let phase_counts = (1..=cfg.mirrors()).map(|m| (m, phase_counts(delivery.mirror(m)))).collect();
    let max_items = |caches: &[Cache]| caches.iter().map(Cache::len).max().unwrap_or(0);
    Ok(EpisodeReport {
        k1: cfg.mirrors(),
        k2: cfg.users_per_mirror(),
        n: cfg.files(),
        subfile_len: cfg.subfile_len(),
        prime: cfg.field().modulus(),
        scheme: placement.scheme,
        demand: demand.vector().clone(),
        users,
        phase_counts,
        measured,
        measured_m1: rates::measured_memory(cfg, max_items(&placement.mirrors)),
        measured_m2: rates::measured_memory(cfg, max_items(&placement.users)),
        elapsed: start.elapsed(),
    })
}

/// Decodes every user against what its mirror sent.
pub fn outcomes(
    cfg: &SystemConfig,
    placement: &Placement,
    delivery: &Delivery,
    library: &FileLibrary,
    demand: &Demand,
    with_oracle: bool,
) -> Vec<UserOutcome> {
    (1..=cfg.users())
        .map(|k| {
            let heard = delivery.mirror(cfg.parent(k));
            let cache = placement.user(k);
            let file = demand.file_of(k);
            let (success, missing) = match decode_user(cfg, placement.scheme, k, cache, heard, demand) {
                Ok(dec) if dec.symbols == library.file(file) => (true, Vec::new()),
                // a wrong reconstruction counts as every pair missing
                Ok(_) => (false, cfg.pairs().collect()),
                Err(fail) => (false, fail.missing),
            };
            let oracle = with_oracle.then(|| oracle::user_verdict(cfg, k, file, cache, heard));
            UserOutcome { user: k, file, success, missing, oracle }
        })
        .collect()
}

/// Oracle verdicts for every user, built from a label-only run.
pub fn decodability_oracle(
    cfg: &SystemConfig,
    scheme: SchemeId,
    demand: &DemandVector,
) -> Result<Vec<OracleVerdict>, SimError> {
    let cfg = cfg.with_subfile_len(1)?;
    let library = FileLibrary::zeros(&cfg);
    let demand = Demand::new(&cfg, demand.clone())?;
    let placement = place(&cfg, scheme, &library)?;
    let delivery = deliver(&cfg, &placement, &library, &demand)?;
    Ok((1..=cfg.users())
        .map(|k| oracle::user_verdict(&cfg, k, demand.file_of(k), placement.user(k), delivery.mirror(cfg.parent(k))))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum DemandMode {
    Exhaustive,
    Random { seed: u64, trials: usize },
}

#[derive(Clone, Copy, Debug)]
pub struct SweepOptions {
    pub budget: u64,
    pub workers: usize,
    pub oracle: bool,
    pub library_seed: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { budget: DEFAULT_BUDGET, workers: 1, oracle: false, library_seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FailureRecord {
    pub demand: DemandVector,
    pub users: Vec<UserOutcome>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub k1: usize,
    pub k2: usize,
    pub n: usize,
    pub subfile_len: usize,
    pub prime: u32,
    pub scheme: SchemeId,
    pub mode: DemandMode,
    pub attempted: usize,
    pub passed: usize,
    /// Measured `(R1, R2)` and memories were identical in every episode.
    pub rates_constant: bool,
    pub rates: Option<RateReport>,
    pub formula_flags: Vec<FormulaFlag>,
    pub formulas_hold: bool,
    pub unequal_mirror_loads: bool,
    pub oracle_checked: bool,
    pub oracle_disagreements: Vec<DemandVector>,
    pub failures: Vec<FailureRecord>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl SweepReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.attempted
    }

    /// Every episode decoded, rates constant, formulas matched the
    /// measurements, and the oracle (when run) agreed throughout.
    pub fn audits_hold(&self) -> bool {
        self.all_passed()
            && self.rates_constant
            && !self.unequal_mirror_loads
            && self.oracle_disagreements.is_empty()
            && (self.formulas_hold || !self.formula_flags.is_empty())
    }
}

/// Number of surjections `[k] -> [n]`.
pub fn count_surjections(k: usize, n: usize) -> BigInt {
    // inclusion-exclusion over the set of files left out
    let mut total = BigInt::zero();
    let mut binom = BigInt::one();
    for i in 0..=n {
        let term = &binom * BigInt::from(n - i).pow(k as u32);
        if i % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
        binom = binom * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    total
}

/// Surjective demands in lexicographic order.
pub fn surjections(k: usize, n: usize) -> Surjections {
    Surjections { k, n, current: None, done: n > k || n == 0 }
}

pub struct Surjections {
    k: usize,
    n: usize,
    current: Option<Vec<usize>>,
    done: bool,
}

impl Surjections {
    fn missing_after(&self, d: &[usize], upto: usize) -> usize {
        let mut seen = vec![false; self.n + 1];
        for &f in &d[..upto] {
            seen[f] = true;
        }
        (1..=self.n).filter(|&f| !seen[f]).count()
    }

    /// Smallest completion of `d[..from]` that can still cover every file.
    fn fill(&self, d: &mut [usize], from: usize) -> bool {
        for pos in from..self.k {
            let remaining = self.k - pos;
            let missing = self.missing_after(d, pos);
            if missing > remaining {
                return false;
            }
            if missing == remaining {
                // forced: the smallest missing file goes here
                let mut seen = vec![false; self.n + 1];
                for &f in &d[..pos] {
                    seen[f] = true;
                }
                d[pos] = (1..=self.n).find(|&f| !seen[f]).unwrap();
            } else {
                d[pos] = 1;
            }
        }
        self.missing_after(d, self.k) == 0
    }
}

impl Iterator for Surjections {
    type Item = DemandVector;

    fn next(&mut self) -> Option<DemandVector> {
        if self.done {
            return None;
        }
        let d = match self.current.take() {
            None => {
                let mut d = vec![0; self.k];
                if !self.fill(&mut d, 0) {
                    self.done = true;
                    return None;
                }
                d
            }
            Some(mut d) => {
                // advance the rightmost position that admits a valid completion
                let mut pos = self.k;
                loop {
                    if pos == 0 {
                        self.done = true;
                        return None;
                    }
                    pos -= 1;
                    let mut advanced = false;
                    while d[pos] < self.n {
                        d[pos] += 1;
                        if self.fill(&mut d, pos + 1) {
                            advanced = true;
                            break;
                        }
                    }
                    if advanced {
                        break;
                    }
                }
                d
            }
        };
        debug_assert!(self.missing_after(&d, self.k) == 0);
        self.current = Some(d.clone());
        Some(DemandVector(d))
    }
}

/// `trials` surjective demands, each uniform over all surjections `[K] -> [N]`.
///
/// Positions are filled left to right; a file is picked with probability
/// proportional to the number of surjective completions it leaves, so no
/// draw is ever rejected (plain rejection from `[N]^K` accepts only
/// `N!/N^N` of its draws when `N = K`).
pub fn random_surjections(cfg: &SystemConfig, seed: u64, trials: usize) -> Vec<DemandVector> {
    let (k, n) = (cfg.users(), cfg.files());
    // completions[r][m]: ways to fill r positions so that m given files
    // (of the n) all appear
    let mut completions = vec![vec![BigInt::zero(); n + 1]; k + 1];
    completions[0][0] = BigInt::one();
    for r in 1..=k {
        for m in 0..=n {
            let mut ways = &completions[r - 1][m] * BigInt::from(n - m);
            if m > 0 {
                ways += &completions[r - 1][m - 1] * BigInt::from(m);
            }
            completions[r][m] = ways;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let mut seen = vec![false; n + 1];
            let mut missing = n;
            let d = (0..k)
                .map(|pos| {
                    let rest = k - pos - 1;
                    let total = &completions[rest + 1][missing];
                    let u = rng.gen_bigint_range(&BigInt::zero(), total);
                    let per_missing = &completions[rest][missing.saturating_sub(1)];
                    let missing_weight = per_missing * BigInt::from(missing);
                    let (pool_missing, index) = if missing > 0 && u < missing_weight {
                        (true, u / per_missing)
                    } else {
                        (false, (u - missing_weight) / &completions[rest][missing])
                    };
                    let index: usize = index.try_into().expect("index below n");
                    let file = (1..=n).filter(|&f| seen[f] != pool_missing).nth(index).expect("index in range");
                    if !seen[file] {
                        seen[file] = true;
                        missing -= 1;
                    }
                    file
                })
                .collect();
            DemandVector(d)
        })
        .collect()
}

/// Simulates every demand of `mode` over a seeded random library and
/// aggregates the outcome.
pub fn sweep(
    cfg: &SystemConfig,
    scheme: SchemeId,
    mode: DemandMode,
    opts: SweepOptions,
) -> Result<SweepReport, SimError> {
    let library = FileLibrary::random(cfg, opts.library_seed);
    sweep_library(cfg, scheme, mode, opts, &library)
}

/// As [`sweep`], over a caller-supplied library (`opts.library_seed` is unused).
pub fn sweep_library(
    cfg: &SystemConfig,
    scheme: SchemeId,
    mode: DemandMode,
    opts: SweepOptions,
    library: &FileLibrary,
) -> Result<SweepReport, SimError> {
    let start = Instant::now();
    let demands: Vec<DemandVector> = match mode {
        DemandMode::Exhaustive => {
            let needed = count_surjections(cfg.users(), cfg.files());
            if needed > BigInt::from(opts.budget) {
                return Err(SimError::BudgetExceeded { needed: needed.to_string(), budget: opts.budget });
            }
            surjections(cfg.users(), cfg.files()).collect()
        }
        DemandMode::Random { seed, trials } => random_surjections(cfg, seed, trials),
    };

    if library.file_count() != cfg.files() || library.file(1).len() != cfg.file_len() {
        return Err(SimError::Integrity("library shape does not match the configuration".into()));
    }
    let placement = place(cfg, scheme, library)?;
    let run = |d: &DemandVector| -> Result<EpisodeReport, SimError> {
        let demand = Demand::new(cfg, d.clone())?;
        run_with_placement(cfg, &placement, library, &demand, opts.oracle)
    };
    let episodes: Vec<EpisodeReport> = if opts.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| SimError::Integrity(format!("thread pool: {e}")))?;
        pool.install(|| demands.par_iter().map(run).collect::<Result<_, _>>())?
    } else {
        demands.iter().map(run).collect::<Result<_, _>>()?
    };

    let first = episodes.first();
    let rates_constant = episodes.iter().all(|e| {
        first.is_some_and(|f| {
            e.measured.r1 == f.measured.r1
                && e.measured.r2 == f.measured.r2
                && e.measured_m1 == f.measured_m1
                && e.measured_m2 == f.measured_m2
        })
    });
    let rates = first.map(|e| e.rate_report(cfg));
    let formulas_hold = rates.as_ref().is_some_and(RateReport::formulas_hold);
    let formula_flags = rates.as_ref().map(|r| r.flags.clone()).unwrap_or_default();
    let oracle_disagreements =
        episodes.iter().filter(|e| e.oracle_agrees() == Some(false)).map(|e| e.demand.clone()).collect();
    let failures: Vec<FailureRecord> = episodes
        .iter()
        .filter(|e| !e.success())
        .map(|e| FailureRecord {
            demand: e.demand.clone(),
            users: e.users.iter().filter(|u| !u.success).cloned().collect(),
        })
        .collect();

    Ok(SweepReport {
        k1: cfg.mirrors(),
        k2: cfg.users_per_mirror(),
        n: cfg.files(),
        subfile_len: cfg.subfile_len(),
        prime: cfg.field().modulus(),
        scheme,
        mode,
        attempted: episodes.len(),
        passed: episodes.iter().filter(|e| e.success()).count(),
        rates_constant,
        rates,
        formula_flags,
        formulas_hold,
        unequal_mirror_loads: episodes.iter().any(|e| e.measured.unequal_mirrors),
        oracle_checked: opts.oracle,
        oracle_disagreements,
        failures,
        elapsed: start.elapsed(),
    })
}

/// Symbolic transcript of one episode: the server lines `Y^k = ...` followed
/// by each listed mirror's emissions as `mirror m <phase>: ...`.
pub fn transcript(
    cfg: &SystemConfig,
    scheme: SchemeId,
    demand: &DemandVector,
    mirrors: &[usize],
) -> Result<Vec<String>, SimError> {
    let library = FileLibrary::zeros(cfg);
    let demand = Demand::new(cfg, demand.clone())?;
    let placement = place(cfg, scheme, &library)?;
    let delivery = deliver(cfg, &placement, &library, &demand)?;
    let field = cfg.field();
    let mut lines: Vec<String> =
        delivery.server.iter().enumerate().map(|(i, t)| format!("Y^{} = {}", i + 1, t.label().render(field))).collect();
    for &m in mirrors {
        cfg.users_of_mirror(m)?;
        for t in delivery.mirror(m) {
            lines.push(format!("mirror {m} {}: {}", t.phase, t.label().render(field)));
        }
    }
    Ok(lines)
}

/// The worked example: `(K1, K2, N) = (3, 2, 6)`, demand `(1, ..., 6)`, mirror 1.
pub fn golden_trace(scheme: SchemeId) -> Result<Vec<String>, SimError> {
    let cfg = SystemConfig::new(3, 2, 6, 1, None)?;
    transcript(&cfg, scheme, &DemandVector::distinct(6), &[1])
}
