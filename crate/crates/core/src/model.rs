//! Instance configuration, topology, subpacketization and demands.
//!
//! All indices are 1-based: users `1..=K`, mirrors `1..=K1`, files `1..=N`.
//! Mirror `m` serves users `(m-1)K2 + 1 ..= mK2`.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coded::SubfileId;
use crate::gf::{self, Fe, GfError, PrimeField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("K1 must be at least 1 (got {0})")]
    NoMirrors(usize),
    #[error("K2 must be at least 2 (got {0})")]
    TooFewUsersPerMirror(usize),
    #[error("N must satisfy 2 <= N <= K1*K2 = {users} (got {files})")]
    BadFileCount { files: usize, users: usize },
    #[error("subfile length must be positive")]
    EmptySubfile,
    #[error("prime {prime} is below the required characteristic K - N + 2 = {required}")]
    PrimeTooSmall { prime: u32, required: usize },
    #[error(transparent)]
    Field(#[from] GfError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("mirror {mirror} out of range 1..={mirrors}")]
    MirrorOutOfRange { mirror: usize, mirrors: usize },
    #[error("user {user} out of range 1..={users}")]
    UserOutOfRange { user: usize, users: usize },
    #[error("demand has {got} entries, expected {expected}")]
    DemandLength { got: usize, expected: usize },
    #[error("demand entry {value} for user {user} is not a file index in 1..={files}")]
    DemandFileOutOfRange { user: usize, value: usize, files: usize },
    #[error("demand is not surjective: files {missing:?} are not requested")]
    Unrequested { missing: Vec<usize> },
    #[error("expected {expected} raw files, got {got}")]
    FileCount { got: usize, expected: usize },
    #[error("file {file} has {got} symbols, expected {expected}")]
    FileLength { file: usize, got: usize, expected: usize },
    #[error("file {file} symbol {index} is not in GF({modulus})")]
    SymbolOutOfField { file: usize, index: usize, modulus: u32 },
}

/// A `(K1, K2; N)` instance together with the subfile length and field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemConfig {
    k1: usize,
    k2: usize,
    n: usize,
    subfile_len: usize,
    field: PrimeField,
}

impl SystemConfig {
    /// Validates the instance. `prime` defaults to [`gf::choose_prime`].
    pub fn new(k1: usize, k2: usize, n: usize, subfile_len: usize, prime: Option<u32>) -> Result<Self, ConfigError> {
        if k1 < 1 {
            return Err(ConfigError::NoMirrors(k1));
        }
        if k2 < 2 {
            return Err(ConfigError::TooFewUsersPerMirror(k2));
        }
        let users = k1 * k2;
        if n < 2 || n > users {
            return Err(ConfigError::BadFileCount { files: n, users });
        }
        if subfile_len == 0 {
            return Err(ConfigError::EmptySubfile);
        }
        let p = prime.unwrap_or_else(|| gf::choose_prime(users, n));
        let field = PrimeField::new(p as u64)?;
        let required = gf::min_characteristic(users, n);
        if (p as usize) < required {
            return Err(ConfigError::PrimeTooSmall { prime: p, required });
        }
        Ok(Self { k1, k2, n, subfile_len, field })
    }

    pub fn mirrors(&self) -> usize {
        self.k1
    }

    pub fn users_per_mirror(&self) -> usize {
        self.k2
    }

    pub fn files(&self) -> usize {
        self.n
    }

    pub fn subfile_len(&self) -> usize {
        self.subfile_len
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    /// `K = K1 * K2`.
    pub fn users(&self) -> usize {
        self.k1 * self.k2
    }

    /// Number of subfiles per file, `K(K-1)`.
    pub fn subpacketization(&self) -> usize {
        let k = self.users();
        k * (k - 1)
    }

    /// Symbols per file.
    pub fn file_len(&self) -> usize {
        self.subpacketization() * self.subfile_len
    }

    pub fn with_subfile_len(&self, subfile_len: usize) -> Result<Self, ConfigError> {
        Self::new(self.k1, self.k2, self.n, subfile_len, Some(self.field.modulus()))
    }

    pub fn users_of_mirror(&self, m: usize) -> Result<RangeInclusive<usize>, ModelError> {
        if m == 0 || m > self.k1 {
            return Err(ModelError::MirrorOutOfRange { mirror: m, mirrors: self.k1 });
        }
        Ok(self.block(m))
    }

    pub(crate) fn block(&self, m: usize) -> RangeInclusive<usize> {
        (m - 1) * self.k2 + 1..=m * self.k2
    }

    pub fn mirror_of(&self, k: usize) -> Result<usize, ModelError> {
        self.check_user(k)?;
        Ok(self.parent(k))
    }

    pub(crate) fn parent(&self, k: usize) -> usize {
        (k - 1) / self.k2 + 1
    }

    /// Cyclic successor on `[K]`.
    pub fn succ(&self, k: usize) -> Result<usize, ModelError> {
        self.check_user(k)?;
        Ok(self.next(k))
    }

    /// Cyclic predecessor on `[K]`.
    pub fn pred(&self, k: usize) -> Result<usize, ModelError> {
        self.check_user(k)?;
        Ok(self.prev(k))
    }

    pub(crate) fn next(&self, k: usize) -> usize {
        if k == self.users() {
            1
        } else {
            k + 1
        }
    }

    pub(crate) fn prev(&self, k: usize) -> usize {
        if k == 1 {
            self.users()
        } else {
            k - 1
        }
    }

    /// First user of the following mirror, wrapping to user 1 after the last mirror.
    pub(crate) fn boundary_user(&self, m: usize) -> usize {
        self.next(m * self.k2)
    }

    fn check_user(&self, k: usize) -> Result<(), ModelError> {
        if k == 0 || k > self.users() {
            Err(ModelError::UserOutOfRange { user: k, users: self.users() })
        } else {
            Ok(())
        }
    }

    /// Lexicographic rank of the ordered pair `(i, j)`, `i != j`.
    pub fn pair_rank(&self, i: usize, j: usize) -> usize {
        debug_assert!(i != j && i >= 1 && j >= 1);
        let k = self.users();
        (i - 1) * (k - 1) + if j < i { j - 1 } else { j - 2 }
    }

    /// All ordered pairs in rank order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let k = self.users();
        (1..=k).flat_map(move |i| (1..=k).filter(move |&j| j != i).map(move |j| (i, j)))
    }

    /// Column index of a subfile in the flattened `N * K(K-1)` unknown space.
    pub fn subfile_index(&self, id: SubfileId) -> usize {
        (id.file - 1) * self.subpacketization() + self.pair_rank(id.i, id.j)
    }
}

/// The server's library, each file stored in subfile-rank order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileLibrary {
    subfile_len: usize,
    subfiles_per_file: usize,
    users: usize,
    files: Vec<Vec<Fe>>,
}

impl FileLibrary {
    /// Splits each raw file into `K(K-1)` subfiles of `L` symbols.
    pub fn subpacketize(cfg: &SystemConfig, raw_files: Vec<Vec<Fe>>) -> Result<Self, ModelError> {
        if raw_files.len() != cfg.files() {
            return Err(ModelError::FileCount { got: raw_files.len(), expected: cfg.files() });
        }
        for (idx, f) in raw_files.iter().enumerate() {
            if f.len() != cfg.file_len() {
                return Err(ModelError::FileLength { file: idx + 1, got: f.len(), expected: cfg.file_len() });
            }
            if let Some(pos) = f.iter().position(|s| !cfg.field().contains(*s)) {
                return Err(ModelError::SymbolOutOfField { file: idx + 1, index: pos, modulus: cfg.field().modulus() });
            }
        }
        Ok(Self {
            subfile_len: cfg.subfile_len(),
            subfiles_per_file: cfg.subpacketization(),
            users: cfg.users(),
            files: raw_files,
        })
    }

    /// Uniformly random file contents from a seeded generator.
    pub fn random(cfg: &SystemConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = cfg.field().modulus();
        let files = (0..cfg.files())
            .map(|_| (0..cfg.file_len()).map(|_| Fe::from_raw(rng.gen_range(0..p))).collect())
            .collect();
        Self { subfile_len: cfg.subfile_len(), subfiles_per_file: cfg.subpacketization(), users: cfg.users(), files }
    }

    /// All-zero library; enough for label-only runs.
    pub fn zeros(cfg: &SystemConfig) -> Self {
        Self {
            subfile_len: cfg.subfile_len(),
            subfiles_per_file: cfg.subpacketization(),
            users: cfg.users(),
            files: vec![vec![Fe::ZERO; cfg.file_len()]; cfg.files()],
        }
    }

    pub fn subfile_len(&self) -> usize {
        self.subfile_len
    }

    pub fn file_count(&self) -> usize {
        self.files.len()
    }

    /// The whole file `n`, i.e. its subfiles concatenated in rank order.
    pub fn file(&self, n: usize) -> &[Fe] {
        &self.files[n - 1]
    }

    pub fn subfile(&self, id: SubfileId) -> &[Fe] {
        let k = self.users;
        let rank = (id.i - 1) * (k - 1) + if id.j < id.i { id.j - 1 } else { id.j - 2 };
        debug_assert!(rank < self.subfiles_per_file);
        let start = rank * self.subfile_len;
        &self.files[id.file - 1][start..start + self.subfile_len]
    }
}

/// Converts bytes to field symbols, `width` base-`p` digits per byte
/// (least significant first). Returns the symbols and `width`.
pub fn bytes_to_symbols(field: &PrimeField, bytes: &[u8]) -> (Vec<Fe>, usize) {
    let p = field.modulus() as u64;
    let mut width = 1;
    let mut span = p;
    while span < 256 {
        span *= p;
        width += 1;
    }
    let mut out = Vec::with_capacity(bytes.len() * width);
    for &b in bytes {
        let mut v = b as u64;
        for _ in 0..width {
            out.push(field.elem(v % p));
            v /= p;
        }
    }
    (out, width)
}

/// Inverse of [`bytes_to_symbols`].
pub fn symbols_to_bytes(field: &PrimeField, symbols: &[Fe], width: usize) -> Vec<u8> {
    let p = field.modulus() as u64;
    symbols
        .chunks(width)
        .map(|digits| digits.iter().rev().fold(0u64, |acc, d| acc * p + d.value() as u64) as u8)
        .collect()
}

/// Pads every symbol sequence with zeros up to the longest one rounded up to
/// a multiple of `K(K-1)`. Returns the padded files and the subfile length.
pub fn pad_to_subpacketization(raw: &mut [Vec<Fe>], subpacketization: usize) -> usize {
    let longest = raw.iter().map(Vec::len).max().unwrap_or(0).max(1);
    let subfile_len = longest.div_ceil(subpacketization);
    for f in raw.iter_mut() {
        f.resize(subfile_len * subpacketization, Fe::ZERO);
    }
    subfile_len
}

/// Raw demand vector `(d_1, ..., d_K)`, file indices 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DemandVector(pub Vec<usize>);

impl DemandVector {
    pub fn distinct(k: usize) -> Self {
        Self((1..=k).collect())
    }
}

impl std::fmt::Display for DemandVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub fn validate_demand(cfg: &SystemConfig, d: &DemandVector) -> Result<(), ModelError> {
    if d.0.len() != cfg.users() {
        return Err(ModelError::DemandLength { got: d.0.len(), expected: cfg.users() });
    }
    let mut seen = vec![false; cfg.files() + 1];
    for (idx, &f) in d.0.iter().enumerate() {
        if f == 0 || f > cfg.files() {
            return Err(ModelError::DemandFileOutOfRange { user: idx + 1, value: f, files: cfg.files() });
        }
        seen[f] = true;
    }
    let missing: Vec<usize> = (1..=cfg.files()).filter(|&f| !seen[f]).collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(ModelError::Unrequested { missing })
    }
}

/// Per-pair demand counts `N^s_k` and signs `alpha^s_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandStats {
    users: usize,
    // row-major K x K, diagonal entries hold N^k_k
    counts: Vec<usize>,
}

impl DemandStats {
    /// `N^s_k`: users in `[K] \ {k}` that request `d_s`.
    pub fn count(&self, k: usize, s: usize) -> usize {
        self.counts[(k - 1) * self.users + (s - 1)]
    }
}

pub fn demand_stats(cfg: &SystemConfig, d: &DemandVector) -> DemandStats {
    let users = cfg.users();
    let mut per_file = vec![0usize; cfg.files() + 1];
    for &f in &d.0 {
        per_file[f] += 1;
    }
    let mut counts = vec![0; users * users];
    for k in 1..=users {
        for s in 1..=users {
            let file = d.0[s - 1];
            // exclude user k itself from the requesters of d_s
            let c = per_file[file] - usize::from(d.0[k - 1] == file);
            counts[(k - 1) * users + (s - 1)] = c;
        }
    }
    DemandStats { users, counts }
}

/// A demand vector that passed validation, bundled with its statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Demand {
    vector: DemandVector,
    stats: DemandStats,
}

impl Demand {
    pub fn new(cfg: &SystemConfig, d: DemandVector) -> Result<Self, ModelError> {
        validate_demand(cfg, &d)?;
        let stats = demand_stats(cfg, &d);
        Ok(Self { vector: d, stats })
    }

    pub fn vector(&self) -> &DemandVector {
        &self.vector
    }

    pub fn stats(&self) -> &DemandStats {
        &self.stats
    }

    /// `d_k`.
    pub fn file_of(&self, k: usize) -> usize {
        self.vector.0[k - 1]
    }

    /// `N^s_k`.
    pub fn count(&self, k: usize, s: usize) -> usize {
        self.stats.count(k, s)
    }

    /// `alpha^s_k = 1 - 2 I(d_k = d_s)`.
    pub fn alpha(&self, k: usize, s: usize) -> i64 {
        if self.file_of(k) == self.file_of(s) {
            -1
        } else {
            1
        }
    }

    /// Server coefficient `alpha^s_k / N^s_k` as a field element.
    pub fn coefficient(&self, field: &PrimeField, k: usize, s: usize) -> Result<Fe, GfError> {
        let inv = field.inv(field.elem(self.count(k, s) as u64))?;
        Ok(field.mul(field.from_i64(self.alpha(k, s)), inv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(k1: usize, k2: usize, n: usize) -> SystemConfig {
        SystemConfig::new(k1, k2, n, 1, None).unwrap()
    }

    #[test]
    fn config_validation() {
        assert_eq!(SystemConfig::new(2, 1, 2, 1, None), Err(ConfigError::TooFewUsersPerMirror(1)));
        assert!(matches!(SystemConfig::new(2, 2, 5, 1, None), Err(ConfigError::BadFileCount { .. })));
        assert!(matches!(SystemConfig::new(2, 2, 1, 1, None), Err(ConfigError::BadFileCount { .. })));
        assert_eq!(SystemConfig::new(2, 2, 3, 1, Some(2)), Err(ConfigError::PrimeTooSmall { prime: 2, required: 3 }));
        assert!(matches!(SystemConfig::new(2, 2, 3, 1, Some(4)), Err(ConfigError::Field(_))));
        assert_eq!(SystemConfig::new(2, 2, 3, 1, Some(3)).unwrap().field().modulus(), 3);
        assert_eq!(SystemConfig::new(2, 2, 3, 1, Some(101)).unwrap().field().modulus(), 101);
    }

    #[test]
    fn subpacketization_sizes() {
        assert_eq!(cfg(3, 2, 6).subpacketization(), 30);
        assert_eq!(cfg(1, 3, 3).subpacketization(), 6);
        let c = SystemConfig::new(4, 2, 8, 2, None).unwrap();
        assert_eq!(c.subpacketization(), 56);
        assert_eq!(c.file_len(), 112);
    }

    #[test]
    fn subpacketize_reassembles() {
        let c = SystemConfig::new(4, 2, 8, 2, None).unwrap();
        let lib = FileLibrary::random(&c, 7);
        let raw: Vec<Vec<Fe>> = (1..=8).map(|n| lib.file(n).to_vec()).collect();
        let again = FileLibrary::subpacketize(&c, raw.clone()).unwrap();
        for n in 1..=8 {
            let joined: Vec<Fe> =
                c.pairs().flat_map(|(i, j)| again.subfile(SubfileId::new(n, i, j)).to_vec()).collect();
            assert_eq!(joined, raw[n - 1]);
        }
        let mut bad = raw;
        bad[2].pop();
        assert_eq!(
            FileLibrary::subpacketize(&c, bad),
            Err(ModelError::FileLength { file: 3, got: 111, expected: 112 })
        );
    }

    #[test]
    fn pair_rank_is_lexicographic_bijection() {
        let c = cfg(3, 2, 6);
        let ranks: Vec<usize> = c.pairs().map(|(i, j)| c.pair_rank(i, j)).collect();
        assert_eq!(ranks, (0..30).collect::<Vec<_>>());
        assert_eq!(c.pairs().next(), Some((1, 2)));
        assert_eq!(c.pairs().last(), Some((6, 5)));
    }

    #[test]
    fn mirror_blocks() {
        let c = cfg(3, 2, 6);
        assert_eq!(c.users_of_mirror(1).unwrap(), 1..=2);
        assert_eq!(c.users_of_mirror(3).unwrap(), 5..=6);
        assert!(c.users_of_mirror(4).is_err());
        assert!(c.users_of_mirror(0).is_err());
        assert_eq!(cfg(1, 3, 3).users_of_mirror(1).unwrap(), 1..=3);
        assert_eq!(c.mirror_of(4).unwrap(), 2);
        assert_eq!(c.boundary_user(1), 3);
        assert_eq!(c.boundary_user(3), 1);
    }

    #[test]
    fn successor_wraps() {
        let c = cfg(3, 2, 6);
        assert_eq!(c.succ(6).unwrap(), 1);
        assert_eq!(c.succ(1).unwrap(), 2);
        assert_eq!(cfg(2, 2, 4).succ(3).unwrap(), 4);
        assert_eq!(c.pred(1).unwrap(), 6);
        assert!(c.succ(7).is_err());
        assert!(c.succ(0).is_err());
    }

    #[test]
    fn demand_validation() {
        let c = cfg(3, 2, 6);
        assert!(validate_demand(&c, &DemandVector::distinct(6)).is_ok());
        let c3 = cfg(3, 2, 3);
        assert!(validate_demand(&c3, &DemandVector(vec![1, 1, 2, 2, 3, 3])).is_ok());
        assert_eq!(
            validate_demand(&c3, &DemandVector(vec![1, 1, 1, 2, 2, 2])),
            Err(ModelError::Unrequested { missing: vec![3] })
        );
        assert!(matches!(validate_demand(&c3, &DemandVector(vec![1, 2, 3])), Err(ModelError::DemandLength { .. })));
        assert!(matches!(
            validate_demand(&c3, &DemandVector(vec![1, 2, 3, 4, 1, 1])),
            Err(ModelError::DemandFileOutOfRange { user: 4, .. })
        ));
    }

    #[test]
    fn demand_statistics() {
        let c = cfg(3, 2, 6);
        let d = Demand::new(&c, DemandVector::distinct(6)).unwrap();
        for k in 1..=6 {
            for s in (1..=6).filter(|&s| s != k) {
                assert_eq!(d.count(k, s), 1);
                assert_eq!(d.alpha(k, s), 1);
            }
        }
        let c3 = cfg(3, 2, 3);
        let d = Demand::new(&c3, DemandVector(vec![1, 1, 2, 2, 3, 3])).unwrap();
        // S_1 = {2..6}; users 3, 4 request file 2
        let brute = (2..=6).filter(|&u| d.file_of(u) == d.file_of(3)).count();
        assert_eq!(brute, 2);
        assert_eq!(d.count(1, 3), 2);
        assert_eq!(d.alpha(1, 3), 1);
        assert_eq!(d.alpha(1, 2), -1);
        assert_eq!(d.count(1, 2), 1);
        // N^k_k: others sharing k's file
        assert_eq!(d.count(1, 1), 1);
        let f = c3.field();
        let c12 = d.coefficient(f, 1, 2).unwrap();
        assert_eq!(f.mul(c12, f.elem(1)), f.from_i64(-1));
    }

    #[test]
    fn byte_symbol_roundtrip() {
        let f = PrimeField::new(3).unwrap();
        let bytes = b"hierarchical";
        let (syms, width) = bytes_to_symbols(&f, bytes);
        assert_eq!(width, 6);
        assert!(syms.iter().all(|s| f.contains(*s)));
        assert_eq!(symbols_to_bytes(&f, &syms, width), bytes.to_vec());
        let mut raw = vec![syms.clone(), syms[..5].to_vec()];
        let l = pad_to_subpacketization(&mut raw, 6);
        assert_eq!(l, 12);
        assert!(raw.iter().all(|r| r.len() == 72));
    }
}
