//! Dictionaries and their coherence/spectral diagnostics.
//!
//! A [`Dictionary`] is a dense complex matrix with unit-norm columns. The
//! builders cover the matrices used throughout the experiments: DFT,
//! identity, Sylvester Hadamard, and column-wise concatenations. The
//! [`CoherenceProfile`] gathers every scalar the feasibility conditions
//! consume, either computed exactly from a dictionary pair or constructed
//! symbolically for formula-scale problem sizes.

use std::f64::consts::TAU;
use std::fmt;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, C64};

const UNIT_NORM_TOL: f64 = 1e-12;

/// A dense complex dictionary with unit-norm columns.
#[derive(Debug)]
pub struct Dictionary {
    entries: Array2<C64>,
    m: usize,
    n: usize,
    unitary: std::sync::OnceLock<bool>,
}

impl Clone for Dictionary {
    fn clone(&self) -> Self {
        let unitary = std::sync::OnceLock::new();
        if let Some(v) = self.unitary.get() {
            let _ = unitary.set(*v);
        }
        Dictionary {
            entries: self.entries.clone(),
            m: self.m,
            n: self.n,
            unitary,
        }
    }
}

impl PartialEq for Dictionary {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Dictionary {
    /// Wraps a matrix after checking the unit-column-norm invariant.
    pub fn new(entries: Array2<C64>) -> Result<Self> {
        let (m, n) = entries.dim();
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument(format!(
                "dictionary must be non-empty, got {m} x {n}"
            )));
        }
        for j in 0..n {
            let nj = linalg::norm(entries.column(j));
            if (nj - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::ColumnNotUnitNorm {
                    index: j,
                    norm: nj,
                    tol: UNIT_NORM_TOL,
                });
            }
        }
        Ok(Dictionary {
            entries,
            m,
            n,
            unitary: std::sync::OnceLock::new(),
        })
    }

    /// Whether this dictionary is square with orthonormal columns (max Gram
    /// deviation below 1e-10). Computed once and cached; solvers use it to
    /// pick a cheap constraint projector.
    pub fn is_unitary(&self) -> bool {
        *self.unitary.get_or_init(|| {
            if self.m != self.n {
                return false;
            }
            for i in 0..self.n {
                for j in 0..=i {
                    let v = linalg::inner(self.entries.column(i), self.entries.column(j));
                    let want = if i == j { 1.0 } else { 0.0 };
                    if (v - C64::new(want, 0.0)).norm() > 1e-10 {
                        return false;
                    }
                }
            }
            true
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, C64> {
        self.entries.column(j)
    }

    /// Sub-dictionary with the columns listed in `support`, in order.
    pub fn restrict(&self, support: &[usize]) -> Result<Array2<C64>> {
        let mut out = Array2::zeros((self.m, support.len()));
        for (k, &j) in support.iter().enumerate() {
            if j >= self.n {
                return Err(Error::InvalidArgument(format!(
                    "support index {j} out of range for {} columns",
                    self.n
                )));
            }
            out.column_mut(k).assign(&self.entries.column(j));
        }
        Ok(out)
    }

    /// `A v` for a full-length coefficient vector.
    pub fn apply(&self, v: ArrayView1<C64>) -> Array1<C64> {
        self.entries.dot(&v)
    }
}

/// Normalized DFT matrix: `entries[j,k] = exp(-2*pi*i*j*k/m) / sqrt(m)`.
pub fn build_dft(m: usize) -> Result<Dictionary> {
    if m == 0 {
        return Err(Error::InvalidArgument("DFT size must be >= 1".into()));
    }
    let scale = 1.0 / (m as f64).sqrt();
    let mut entries = Array2::zeros((m, m));
    for j in 0..m {
        for k in 0..m {
            // Reduce j*k mod m before forming the angle to keep full precision
            // at large m.
            let t = ((j as u64 * k as u64) % m as u64) as f64;
            let theta = -TAU * t / m as f64;
            entries[[j, k]] = C64::new(theta.cos() * scale, theta.sin() * scale);
        }
    }
    Dictionary::new(entries)
}

/// Identity dictionary.
pub fn build_identity(m: usize) -> Result<Dictionary> {
    if m == 0 {
        return Err(Error::InvalidArgument("identity size must be >= 1".into()));
    }
    let mut entries = Array2::zeros((m, m));
    for i in 0..m {
        entries[[i, i]] = C64::new(1.0, 0.0);
    }
    Dictionary::new(entries)
}

/// Sylvester Hadamard matrix scaled by `1/sqrt(m)`; `m` must be a power of two.
pub fn build_hadamard(m: usize) -> Result<Dictionary> {
    if m == 0 || !m.is_power_of_two() {
        return Err(Error::NotPowerOfTwo("Hadamard size", m));
    }
    let scale = 1.0 / (m as f64).sqrt();
    let mut entries = Array2::zeros((m, m));
    for i in 0..m {
        for j in 0..m {
            let sign = if (i & j).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            entries[[i, j]] = C64::new(sign * scale, 0.0);
        }
    }
    Dictionary::new(entries)
}

/// Column-wise concatenation `[d1 d2]`.
pub fn concat(d1: &Dictionary, d2: &Dictionary) -> Result<Dictionary> {
    if d1.m != d2.m {
        return Err(Error::DimensionMismatch {
            context: "concat row counts",
            left: d1.m,
            right: d2.m,
        });
    }
    let mut entries = Array2::zeros((d1.m, d1.n + d2.n));
    for j in 0..d1.n {
        entries.column_mut(j).assign(&d1.entries.column(j));
    }
    for j in 0..d2.n {
        entries.column_mut(d1.n + j).assign(&d2.entries.column(j));
    }
    Dictionary::new(entries)
}

/// `max_{i != j} |<d_i, d_j>|`; zero for a single-column dictionary.
pub fn coherence(d: &Dictionary) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..d.n {
        for j in i + 1..d.n {
            best = best.max(linalg::inner(d.column(i), d.column(j)).norm());
        }
    }
    best
}

/// `max_{i,j} |<a_i, b_j>|` between two dictionaries on the same space.
pub fn mutual_coherence(da: &Dictionary, db: &Dictionary) -> Result<f64> {
    if da.m != db.m {
        return Err(Error::DimensionMismatch {
            context: "mutual coherence row counts",
            left: da.m,
            right: db.m,
        });
    }
    let mut best: f64 = 0.0;
    for i in 0..da.n {
        for j in 0..db.n {
            best = best.max(linalg::inner(da.column(i), db.column(j)).norm());
        }
    }
    Ok(best)
}

/// Iteration cap for [`spectral_norm`].
pub const POWER_ITERATION_CAP: usize = 10_000;

/// Default relative tolerance for [`spectral_norm`].
pub const SPECTRAL_NORM_TOL: f64 = 1e-10;

/// Largest singular value via power iteration on `M^H M` (deterministic
/// all-ones start, capped at [`POWER_ITERATION_CAP`] iterations).
///
/// For matrices up to 1024 columns, [`spectral_norm_dense`] is the reference
/// path and this routine the cross-check.
pub fn spectral_norm(d: &Dictionary, tol: f64) -> Result<f64> {
    if tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "spectral norm tolerance must be positive, got {tol}"
        )));
    }
    let (sigma, _) = linalg::power_iteration_sigma_max(d.entries.view(), tol, POWER_ITERATION_CAP)?;
    Ok(sigma)
}

/// Largest singular value via a dense Hermitian eigensolve of the Gram matrix.
pub fn spectral_norm_dense(d: &Dictionary) -> Result<f64> {
    let svs = linalg::singular_values(d.entries.view())?;
    Ok(svs.last().copied().unwrap_or(0.0))
}

/// Smallest singular value of an explicit (sub-)matrix via full decomposition.
pub fn sigma_min_dense(m: &Array2<C64>) -> Result<f64> {
    if m.ncols() > m.nrows() {
        // Wide matrices have a nontrivial kernel in the square sense; report
        // the smallest singular value of the map itself.
        let svs = linalg::singular_values(m.view())?;
        return Ok(svs.first().copied().unwrap_or(0.0));
    }
    let svs = linalg::singular_values(m.view())?;
    Ok(svs.first().copied().unwrap_or(0.0))
}

/// Every scalar the feasibility conditions consume.
///
/// `mu_a`/`mu_b` are the in-dictionary coherences, `mu_m` the mutual
/// coherence, `norm_*` spectral norms, and `m`, `n_a`, `n_b` the dimensions.
/// Profiles can be computed exactly from a dictionary pair
/// ([`coherence_profile`]) or constructed symbolically for formula-scale
/// sizes (e.g. [`CoherenceProfile::unitary_max_incoherent`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceProfile {
    pub mu_a: f64,
    pub mu_b: f64,
    pub mu_m: f64,
    pub norm_a: f64,
    pub norm_b: f64,
    pub norm_ab: f64,
    pub m: u64,
    pub n_a: u64,
    pub n_b: u64,
}

impl CoherenceProfile {
    /// Validated constructor for symbolically specified profiles.
    pub fn new(
        mu_a: f64,
        mu_b: f64,
        mu_m: f64,
        norm_a: f64,
        norm_b: f64,
        norm_ab: f64,
        m: u64,
        n_a: u64,
        n_b: u64,
    ) -> Result<Self> {
        let p = CoherenceProfile {
            mu_a,
            mu_b,
            mu_m,
            norm_a,
            norm_b,
            norm_ab,
            m,
            n_a,
            n_b,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let ok_unit = |v: f64| (0.0..=1.0 + 1e-12).contains(&v);
        if !ok_unit(self.mu_a) || !ok_unit(self.mu_b) {
            return Err(Error::InvalidArgument(format!(
                "coherences must lie in [0,1]: mu_a={}, mu_b={}",
                self.mu_a, self.mu_b
            )));
        }
        if !(self.mu_m > 0.0 && self.mu_m <= 1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "mutual coherence must lie in (0,1], got {}",
                self.mu_m
            )));
        }
        if self.m == 0 || self.n_a == 0 || self.n_b == 0 {
            return Err(Error::InvalidArgument(
                "profile dimensions must be positive".into(),
            ));
        }
        // Unit columns force sigma_max >= 1.
        if self.norm_a < 1.0 - 1e-9 || self.norm_b < 1.0 - 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "spectral norms of unit-column dictionaries are >= 1: norm_a={}, norm_b={}",
                self.norm_a, self.norm_b
            )));
        }
        if self.norm_ab < 0.0 {
            return Err(Error::InvalidArgument(
                "cross spectral norm must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Unitary, maximally incoherent pair: `mu_a = mu_b = 0`,
    /// `mu_m = 1/sqrt(m)`, all norms 1, `n_a = n_b = m`.
    pub fn unitary_max_incoherent(m: u64) -> Self {
        let mu = 1.0 / (m as f64).sqrt();
        CoherenceProfile {
            mu_a: 0.0,
            mu_b: 0.0,
            mu_m: mu,
            norm_a: 1.0,
            norm_b: 1.0,
            norm_ab: 1.0,
            m,
            n_a: m,
            n_b: m,
        }
    }

    /// A unitary and B a concatenation of two mutually unbiased unitary
    /// bases: `mu_a = 0`, `mu_b = mu_m = 1/sqrt(m)`, `n_b = 2m`,
    /// `norm_b = norm_ab = sqrt(2)`.
    pub fn two_onb_interference(m: u64) -> Self {
        let mu = 1.0 / (m as f64).sqrt();
        CoherenceProfile {
            mu_a: 0.0,
            mu_b: mu,
            mu_m: mu,
            norm_a: 1.0,
            norm_b: std::f64::consts::SQRT_2,
            norm_ab: std::f64::consts::SQRT_2,
            m,
            n_a: m,
            n_b: 2 * m,
        }
    }

    /// Profile for the no-interference analysis: only the A-side fields
    /// matter, B degenerates to a single column.
    pub fn signal_only(mu_a: f64, norm_a: f64, m: u64, n_a: u64) -> Self {
        CoherenceProfile {
            mu_a,
            mu_b: 0.0,
            mu_m: 1.0,
            norm_a,
            norm_b: 1.0,
            norm_ab: 1.0,
            m,
            n_a,
            n_b: 1,
        }
    }

    /// The same parameters with the roles of A and B interchanged.
    pub fn swapped(&self) -> Self {
        CoherenceProfile {
            mu_a: self.mu_b,
            mu_b: self.mu_a,
            mu_m: self.mu_m,
            norm_a: self.norm_b,
            norm_b: self.norm_a,
            norm_ab: self.norm_ab,
            m: self.m,
            n_a: self.n_b,
            n_b: self.n_a,
        }
    }
}

/// Coherences measured below this are floating-point residue of an
/// analytically orthonormal dictionary and snap to exactly zero in profiles.
/// The smallest genuine coherence at simulation scale is 1/sqrt(n), orders
/// of magnitude above.
pub const COHERENCE_SNAP_TOL: f64 = 1e-12;

/// Computes the exact profile of a dictionary pair. Spectral norms come from
/// the dense eigensolve path.
///
/// In-dictionary coherences below [`COHERENCE_SNAP_TOL`] are reported as
/// exactly zero so the indicator terms of the conditioning bounds see the
/// analytic orthogonality rather than rounding noise.
pub fn coherence_profile(da: &Dictionary, db: &Dictionary) -> Result<CoherenceProfile> {
    if da.m != db.m {
        return Err(Error::DimensionMismatch {
            context: "profile row counts",
            left: da.m,
            right: db.m,
        });
    }
    let snap = |mu: f64| if mu < COHERENCE_SNAP_TOL { 0.0 } else { mu };
    let mu_m = mutual_coherence(da, db)?;
    let cross = linalg::adjoint_matmul(da.entries.view(), db.entries.view());
    let cross_svs = linalg::singular_values(cross.view())?;
    CoherenceProfile::new(
        snap(coherence(da)),
        snap(coherence(db)),
        mu_m,
        spectral_norm_dense(da)?,
        spectral_norm_dense(db)?,
        cross_svs.last().copied().unwrap_or(0.0),
        da.m as u64,
        da.n as u64,
        db.n as u64,
    )
}

/// Builder descriptor, parseable from compact CLI specs such as `dft:64`,
/// `identity:8`, `hadamard:16`, or `concat:identity:64+dft:64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DictSpec {
    Dft(usize),
    Identity(usize),
    Hadamard(usize),
    Concat(Box<DictSpec>, Box<DictSpec>),
}

impl DictSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("concat:") {
            let (lhs, rhs) = rest.split_once('+').ok_or_else(|| {
                Error::Parse(format!(
                    "concat spec must look like concat:<spec>+<spec>, got `{s}`"
                ))
            })?;
            return Ok(DictSpec::Concat(
                Box::new(DictSpec::parse(lhs)?),
                Box::new(DictSpec::parse(rhs)?),
            ));
        }
        let (kind, size) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("dictionary spec must look like kind:size, got `{s}`")))?;
        let m: usize = size
            .parse()
            .map_err(|_| Error::Parse(format!("invalid dictionary size `{size}` in `{s}`")))?;
        match kind {
            "dft" => Ok(DictSpec::Dft(m)),
            "identity" | "id" => Ok(DictSpec::Identity(m)),
            "hadamard" => Ok(DictSpec::Hadamard(m)),
            other => Err(Error::Parse(format!(
                "unknown dictionary kind `{other}` (expected dft, identity, hadamard, concat)"
            ))),
        }
    }

    pub fn build(&self) -> Result<Dictionary> {
        match self {
            DictSpec::Dft(m) => build_dft(*m),
            DictSpec::Identity(m) => build_identity(*m),
            DictSpec::Hadamard(m) => build_hadamard(*m),
            DictSpec::Concat(a, b) => concat(&a.build()?, &b.build()?),
        }
    }
}

impl fmt::Display for DictSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DictSpec::Dft(m) => write!(f, "dft:{m}"),
            DictSpec::Identity(m) => write!(f, "identity:{m}"),
            DictSpec::Hadamard(m) => write!(f, "hadamard:{m}"),
            DictSpec::Concat(a, b) => write!(f, "concat:{a}+{b}"),
        }
    }
}

// --- serialization -------------------------------------------------------

/// Provenance sidecar stored next to the CSV entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DictionarySidecar {
    pub m: usize,
    pub n: usize,
    pub builder: String,
    pub params: Vec<String>,
}

fn format_cell(v: C64) -> String {
    // Shortest round-trip decimal; sign of the imaginary part is explicit so
    // a cell always looks like `re+imi` or `re-imi`.
    if v.im.is_sign_negative() {
        format!("{}-{}i", v.re, -v.im)
    } else {
        format!("{}+{}i", v.re, v.im)
    }
}

fn parse_cell(s: &str) -> Result<C64> {
    let s = s.trim();
    let inner = s
        .strip_suffix('i')
        .ok_or_else(|| Error::Parse(format!("complex cell must end in `i`: `{s}`")))?;
    // Split at the sign separating real and imaginary parts; skip position 0
    // and signs that belong to an exponent.
    let bytes = inner.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        let c = bytes[k];
        if (c == b'+' || c == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let k = split.ok_or_else(|| Error::Parse(format!("missing imaginary sign in `{s}`")))?;
    let re: f64 = inner[..k]
        .parse()
        .map_err(|_| Error::Parse(format!("bad real part in `{s}`")))?;
    let im: f64 = match &inner[k..k + 1] {
        "+" => inner[k + 1..]
            .parse()
            .map_err(|_| Error::Parse(format!("bad imaginary part in `{s}`")))?,
        _ => -inner[k + 1..]
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad imaginary part in `{s}`")))?,
    };
    Ok(C64::new(re, im))
}

/// Serializes the entries as rows-major CSV of `re+imi` cells.
pub fn entries_to_csv(d: &Dictionary) -> String {
    let mut out = String::new();
    for i in 0..d.m {
        let row: Vec<String> = (0..d.n).map(|j| format_cell(d.entries[[i, j]])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parses rows-major CSV of `re+imi` cells back into a dictionary.
pub fn entries_from_csv(csv: &str) -> Result<Dictionary> {
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for line in csv.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<C64>> = line.split(',').map(parse_cell).collect();
        rows.push(row?);
    }
    let m = rows.len();
    if m == 0 {
        return Err(Error::Parse("empty dictionary CSV".into()));
    }
    let n = rows[0].len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse("ragged dictionary CSV".into()));
    }
    let mut entries = Array2::zeros((m, n));
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            entries[[i, j]] = *v;
        }
    }
    Dictionary::new(entries)
}

/// Writes `<path>` (CSV entries) and `<path>.json` (provenance sidecar).
pub fn save(d: &Dictionary, spec: Option<&DictSpec>, path: &Path) -> Result<()> {
    std::fs::write(path, entries_to_csv(d))?;
    let sidecar = DictionarySidecar {
        m: d.m,
        n: d.n,
        builder: spec.map(|s| s.to_string()).unwrap_or_else(|| "raw".into()),
        params: Vec::new(),
    };
    let json_path = path.with_extension("json");
    std::fs::write(json_path, serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

/// Reads a dictionary saved by [`save`]. The sidecar is optional.
pub fn load(path: &Path) -> Result<Dictionary> {
    let csv = std::fs::read_to_string(path)?;
    entries_from_csv(&csv)
}
