//! Exact memory and rate accounting.
//!
//! Closed forms are evaluated as reduced rationals and compared exactly with
//! counts measured from simulated caches and transmission logs. Decimal
//! strings appear only at the reporting edge.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::delivery::{Origin, Transmission};
use crate::model::SystemConfig;

/// Reduced fraction with arbitrary-precision parts.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        Self(BigRational::new(num.into(), den.into()))
    }

    pub fn integer(v: i64) -> Self {
        Self::new(v, 1)
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Self {
        Self(self.0.abs())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Rounds half away from zero to `places` decimals.
    pub fn to_decimal(&self, places: u32) -> String {
        let scale = BigInt::from(10u32).pow(places);
        let den = self.0.denom();
        let twice: BigInt = self.0.numer().abs() * &scale * 2 + den;
        let q = twice.div_floor(&(den * 2));
        let sign = if self.0.is_negative() && !q.is_zero() { "-" } else { "" };
        let places = places as usize;
        let padded = format!("{:0>width$}", q.to_string(), width = places + 1);
        let (int, frac) = padded.split_at(padded.len() - places);
        if places == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }

    /// Parses a decimal literal such as `1.375` exactly.
    pub fn from_decimal(s: &str) -> Option<Self> {
        let s = s.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty() {
            return None;
        }
        let digits = format!("{int}{frac}");
        if !digits.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let num = BigInt::from_str(&digits).ok()?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let r = BigRational::new(num, den);
        Some(Self(if neg { -r } else { r }))
    }

    pub fn within(&self, other: &Rational, tolerance: &Rational) -> bool {
        (self.clone() - other.clone()).abs() <= *tolerance
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom() == &BigInt::from(1) {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        Rational(self.0 - rhs.0)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}

/// `binom(n, 2)`, zero for `n < 2`.
fn pairs(n: i64) -> i64 {
    if n < 2 {
        0
    } else {
        n * (n - 1) / 2
    }
}

struct Dims {
    k: i64,
    k1: i64,
    k2: i64,
    n: i64,
    t: i64,
}

fn dims(cfg: &SystemConfig) -> Dims {
    let k = cfg.users() as i64;
    Dims { k, k1: cfg.mirrors() as i64, k2: cfg.users_per_mirror() as i64, n: cfg.files() as i64, t: k * (k - 1) }
}

/// Mirror and user memory of the first scheme, in files.
pub fn memories_scheme1(cfg: &SystemConfig) -> (Rational, Rational) {
    let Dims { k, k2, n, t, .. } = dims(cfg);
    let outside = (k - k2) * (k - k2 - 1);
    let m1 = Rational::new(outside * n + k2 * (k - 2) * n + k2, t);
    let m2 = Rational::new(((k - 1) * (k - 2) - outside) * n, t);
    (m1, m2)
}

/// Mirror and user memory of the second scheme, in files.
pub fn memories_scheme2(cfg: &SystemConfig) -> (Rational, Rational) {
    let Dims { k, k2, n, t, .. } = dims(cfg);
    let outside = (k - k2) * (k - k2 - 1);
    let m1 = Rational::new(outside * n, t);
    let m2 = Rational::new(n * (k * (k - 2) - outside) + 1, t);
    (m1, m2)
}

/// Server rate `K / (K(K-1)) = 1/(K-1)`, shared by both schemes.
pub fn r1(cfg: &SystemConfig) -> Rational {
    let Dims { k, t, .. } = dims(cfg);
    Rational::new(k, t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FormulaFlag {
    /// The closed form for the first scheme's mirror rate is only argued for `K1 >= 2`.
    SingleMirrorUnvalidated,
}

impl fmt::Display for FormulaFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormulaFlag::SingleMirrorUnvalidated => {
                f.write_str("r2 closed form for scheme 1 is only validated for K1 >= 2")
            }
        }
    }
}

/// Mirror rate of the first scheme, `2(K + 1 + K2 binom(K-K2, 2)) / (K(K-1))`,
/// one transmission less when `K2 = 2`.
pub fn r2_scheme1(cfg: &SystemConfig) -> (Rational, Option<FormulaFlag>) {
    let Dims { k, k1, k2, t, .. } = dims(cfg);
    let mut count = 2 * (k + 1 + k2 * pairs(k - k2));
    if k2 == 2 {
        count -= 1;
    }
    let flag = (k1 < 2).then_some(FormulaFlag::SingleMirrorUnvalidated);
    (Rational::new(count, t), flag)
}

/// Mirror rate of the second scheme, `(K + 2 K2 binom(K-K2, 2)) / (K(K-1))`.
pub fn r2_scheme2(cfg: &SystemConfig) -> Rational {
    let Dims { k, k2, t, .. } = dims(cfg);
    Rational::new(k + 2 * k2 * pairs(k - k2), t)
}

/// `R1 + K1 R2`.
pub fn composite(r1: &Rational, r2: &Rational, k1: usize) -> Rational {
    r1.clone() + Rational::integer(k1 as i64) * r2.clone()
}

/// Rates measured from transmission logs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeasuredRates {
    pub r1: Rational,
    pub r2: Rational,
    pub server_count: usize,
    pub per_mirror: BTreeMap<usize, usize>,
    /// Set when mirrors emitted different numbers of transmissions.
    pub unequal_mirrors: bool,
}

/// Counts server and per-mirror emissions, normalised by `K(K-1)`.
/// `R2` is the largest per-mirror load.
pub fn measured_rates(cfg: &SystemConfig, logs: &[Transmission]) -> MeasuredRates {
    let t = cfg.subpacketization() as i64;
    let mut server_count = 0;
    let mut per_mirror: BTreeMap<usize, usize> = (1..=cfg.mirrors()).map(|m| (m, 0)).collect();
    for tx in logs {
        match tx.origin {
            Origin::Server => server_count += 1,
            Origin::Mirror(m) => *per_mirror.entry(m).or_insert(0) += 1,
        }
    }
    let max = per_mirror.values().copied().max().unwrap_or(0);
    let min = per_mirror.values().copied().min().unwrap_or(0);
    MeasuredRates {
        r1: Rational::new(server_count as i64, t),
        r2: Rational::new(max as i64, t),
        server_count,
        per_mirror,
        unequal_mirrors: max != min,
    }
}

/// Memory in files of a cache holding `items` subfile-sized items.
pub fn measured_memory(cfg: &SystemConfig, items: usize) -> Rational {
    Rational::new(items as i64, cfg.subpacketization() as i64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SchemeId {
    First,
    Second,
}

impl SchemeId {
    pub fn number(self) -> u8 {
        match self {
            SchemeId::First => 1,
            SchemeId::Second => 2,
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Formula and measured values side by side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RateReport {
    pub scheme: SchemeId,
    pub m1: Rational,
    pub m2: Rational,
    pub r1: Rational,
    pub r2: Rational,
    pub rbar: Rational,
    pub measured_m1: Rational,
    pub measured_m2: Rational,
    pub measured_r1: Rational,
    pub measured_r2: Rational,
    pub measured_rbar: Rational,
    pub flags: Vec<FormulaFlag>,
}

impl RateReport {
    /// Closed forms for `scheme`, with the measured columns left to the caller.
    pub fn formulas(
        cfg: &SystemConfig,
        scheme: SchemeId,
    ) -> (Rational, Rational, Rational, Rational, Vec<FormulaFlag>) {
        let r1 = r1(cfg);
        match scheme {
            SchemeId::First => {
                let (m1, m2) = memories_scheme1(cfg);
                let (r2, flag) = r2_scheme1(cfg);
                (m1, m2, r1, r2, flag.into_iter().collect())
            }
            SchemeId::Second => {
                let (m1, m2) = memories_scheme2(cfg);
                (m1, m2, r1, r2_scheme2(cfg), Vec::new())
            }
        }
    }

    pub fn new(
        cfg: &SystemConfig,
        scheme: SchemeId,
        measured_memories: (Rational, Rational),
        measured: &MeasuredRates,
    ) -> Self {
        let (m1, m2, r1, r2, flags) = Self::formulas(cfg, scheme);
        let k1 = cfg.mirrors();
        Self {
            scheme,
            rbar: composite(&r1, &r2, k1),
            m1,
            m2,
            r1,
            r2,
            measured_m1: measured_memories.0,
            measured_m2: measured_memories.1,
            measured_rbar: composite(&measured.r1, &measured.r2, k1),
            measured_r1: measured.r1.clone(),
            measured_r2: measured.r2.clone(),
            flags,
        }
    }

    /// Whether each measured value equals its closed form.
    pub fn formulas_hold(&self) -> bool {
        self.m1 == self.measured_m1
            && self.m2 == self.measured_m2
            && self.r1 == self.measured_r1
            && self.r2 == self.measured_r2
    }
}
