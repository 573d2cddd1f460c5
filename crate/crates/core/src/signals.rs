//! Signal/interference instance sampling.
//!
//! Instances are fully reproducible: every draw is a pure function of the
//! 64-bit seed via ChaCha8 (a named, portable generator), with independent
//! substreams for each component so fixing one support does not shift the
//! draws of the others.

use ndarray::Array1;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::guarantees::Scenario;
use crate::linalg::C64;

/// Magnitude floor for phase-model nonzeros; keeps every planted entry
/// numerically visible to the relative-error success check.
pub const MODEL2_MAGNITUDE_FLOOR: f64 = 0.1;

/// splitmix64 finalizer; used to derive substream seeds.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive combination of two seeds.
pub fn combine_seed(a: u64, b: u64) -> u64 {
    splitmix64(a ^ splitmix64(b))
}

/// Uniformly random k-subset of `{0, ..., n-1}`, sorted ascending.
///
/// Partial Fisher-Yates: exact uniformity, O(n) scratch.
pub fn sample_support(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "cannot sample {k}-subset of {n} indices"
        )));
    }
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    let mut support = pool[..k].to_vec();
    support.sort_unstable();
    Ok(support)
}

/// Standard complex Gaussian nonzeros on `support` (zero elsewhere):
/// real and imaginary parts are N(0, 1/2), so E|v_i|^2 = 1.
pub fn sample_nonzeros_model1(support: &[usize], n: usize, rng: &mut ChaCha8Rng) -> Array1<C64> {
    let mut v = Array1::zeros(n);
    let half = std::f64::consts::FRAC_1_SQRT_2;
    for &i in support {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        v[i] = C64::new(re * half, im * half);
    }
    v
}

/// Phase-model nonzeros: magnitude `|N(0,1)| + 0.1`, phase uniform on
/// `[0, 2pi)`. Used for whichever vector has an unknown support.
pub fn sample_nonzeros_model2(support: &[usize], n: usize, rng: &mut ChaCha8Rng) -> Array1<C64> {
    let mut v = Array1::zeros(n);
    for &i in support {
        let mag: f64 = {
            let g: f64 = StandardNormal.sample(rng);
            g.abs() + MODEL2_MAGNITUDE_FLOOR
        };
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        v[i] = C64::new(mag * theta.cos(), mag * theta.sin());
    }
    v
}

/// A sampled observation with ground truth attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub z: Array1<C64>,
    pub x_true: Array1<C64>,
    pub e_true: Array1<C64>,
    pub support_x: Vec<usize>,
    pub support_e: Vec<usize>,
    pub scenario: Scenario,
    pub seed: u64,
}

/// Samples an instance; supports are drawn uniformly unless pinned by the
/// caller (tests inject adversarial supports that way). Nonzeros follow the
/// phase model for vectors whose support is unknown at recovery time and the
/// plain continuous model otherwise.
pub fn make_instance_with(
    da: &Dictionary,
    db: &Dictionary,
    scenario: &Scenario,
    nx: usize,
    ne: usize,
    seed: u64,
    fixed_x: Option<&[usize]>,
    fixed_e: Option<&[usize]>,
) -> Result<Instance> {
    if da.m() != db.m() {
        return Err(Error::DimensionMismatch {
            context: "instance dictionaries",
            left: da.m(),
            right: db.m(),
        });
    }
    if nx > da.n() {
        return Err(Error::InvalidArgument(format!(
            "nx = {nx} exceeds n_a = {}",
            da.n()
        )));
    }
    if ne > db.n() {
        return Err(Error::InvalidArgument(format!(
            "ne = {ne} exceeds n_b = {}",
            db.n()
        )));
    }

    let fixed_support = |fixed: Option<&[usize]>, k: usize, n: usize, what: &str| -> Result<Option<Vec<usize>>> {
        match fixed {
            None => Ok(None),
            Some(s) => {
                let mut v = s.to_vec();
                v.sort_unstable();
                v.dedup();
                if v.len() != s.len() || v.len() != k || v.iter().any(|&i| i >= n) {
                    return Err(Error::InvalidArgument(format!(
                        "fixed {what} support must be {k} distinct indices below {n}"
                    )));
                }
                Ok(Some(v))
            }
        }
    };

    let support_x = match fixed_support(fixed_x, nx, da.n(), "signal")? {
        Some(s) => s,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(combine_seed(seed, 1));
            sample_support(da.n(), nx, &mut rng)?
        }
    };
    let support_e = match fixed_support(fixed_e, ne, db.n(), "interference")? {
        Some(s) => s,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(combine_seed(seed, 2));
            sample_support(db.n(), ne, &mut rng)?
        }
    };

    let mut rng_x = ChaCha8Rng::seed_from_u64(combine_seed(seed, 3));
    let x_true = if scenario.x_known {
        sample_nonzeros_model1(&support_x, da.n(), &mut rng_x)
    } else {
        sample_nonzeros_model2(&support_x, da.n(), &mut rng_x)
    };
    let mut rng_e = ChaCha8Rng::seed_from_u64(combine_seed(seed, 4));
    let e_true = if scenario.e_known {
        sample_nonzeros_model1(&support_e, db.n(), &mut rng_e)
    } else {
        sample_nonzeros_model2(&support_e, db.n(), &mut rng_e)
    };

    let z = da.apply(x_true.view()) + db.apply(e_true.view());
    Ok(Instance {
        z,
        x_true,
        e_true,
        support_x,
        support_e,
        scenario: *scenario,
        seed,
    })
}

/// [`make_instance_with`] with both supports drawn uniformly.
pub fn make_instance(
    da: &Dictionary,
    db: &Dictionary,
    scenario: &Scenario,
    nx: usize,
    ne: usize,
    seed: u64,
) -> Result<Instance> {
    make_instance_with(da, db, scenario, nx, ne, seed, None, None)
}

// --- serialization -------------------------------------------------------

/// JSON head of a serialized instance; the vectors travel in a CSV next to it.
#[derive(Debug, Serialize, Deserialize)]
pub struct InstanceHeader {
    pub m: usize,
    pub n_a: usize,
    pub n_b: usize,
    pub support_x: Vec<usize>,
    pub support_e: Vec<usize>,
    pub scenario: Scenario,
    pub seed: u64,
}

fn push_vector(out: &mut String, tag: char, v: &Array1<C64>, sparse: bool) {
    for (i, c) in v.iter().enumerate() {
        if sparse && *c == C64::new(0.0, 0.0) {
            continue;
        }
        out.push_str(&format!("{tag},{i},{},{}\n", c.re, c.im));
    }
}

/// Serializes an instance as a JSON header plus a `vector,index,re,im` CSV.
pub fn instance_to_parts(inst: &Instance) -> Result<(String, String)> {
    let header = InstanceHeader {
        m: inst.z.len(),
        n_a: inst.x_true.len(),
        n_b: inst.e_true.len(),
        support_x: inst.support_x.clone(),
        support_e: inst.support_e.clone(),
        scenario: inst.scenario,
        seed: inst.seed,
    };
    let json = serde_json::to_string_pretty(&header)?;
    let mut csv = String::from("vector,index,re,im\n");
    push_vector(&mut csv, 'x', &inst.x_true, true);
    push_vector(&mut csv, 'e', &inst.e_true, true);
    push_vector(&mut csv, 'z', &inst.z, false);
    Ok((json, csv))
}

/// Reloads an instance serialized by [`instance_to_parts`].
pub fn instance_from_parts(json: &str, csv: &str) -> Result<Instance> {
    let header: InstanceHeader = serde_json::from_str(json)?;
    let mut x = Array1::zeros(header.n_a);
    let mut e = Array1::zeros(header.n_b);
    let mut z = Array1::zeros(header.m);
    for (lineno, line) in csv.lines().enumerate() {
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(Error::Parse(format!("bad instance CSV line: `{line}`")));
        }
        let idx: usize = parts[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad index in `{line}`")))?;
        let re: f64 = parts[2]
            .parse()
            .map_err(|_| Error::Parse(format!("bad re in `{line}`")))?;
        let im: f64 = parts[3]
            .parse()
            .map_err(|_| Error::Parse(format!("bad im in `{line}`")))?;
        let v = C64::new(re, im);
        match parts[0] {
            "x" => x[idx] = v,
            "e" => e[idx] = v,
            "z" => z[idx] = v,
            other => return Err(Error::Parse(format!("unknown vector tag `{other}`"))),
        }
    }
    Ok(Instance {
        z,
        x_true: x,
        e_true: e,
        support_x: header.support_x,
        support_e: header.support_e,
        scenario: header.scenario,
        seed: header.seed,
    })
}
