//! Splittable, counter-based Gaussian streams.
//!
//! The recursion indexes an unbounded family of independent Brownian
//! motions. Each member is addressed by a [`StreamKey`]: a root seed
//! followed by the integer components appended at every fork. Two keys
//! with different component paths hash to different cipher keys and so
//! yield statistically independent streams; identical paths reproduce
//! identical samples bit for bit, regardless of evaluation order or
//! thread schedule.
//!
//! Sampling is a pure function of `(key, counter)`: the key's SHA-256
//! digest seeds a ChaCha12 generator and the counter selects its stream,
//! so no state is shared and any number of threads may draw concurrently.
//! Normals come from the inverse CDF applied to one uniform each, which
//! pins the variate count at exactly `d` per `d`-dimensional draw.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Hierarchical index of one random stream.
///
/// Forking appends integer components to the path; the flattened encoding
/// is the identity of the stream, so two forks are equal exactly when
/// their flattened paths coincide.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StreamKey {
    path: Vec<i64>,
    digest: [u8; 32],
}

impl StreamKey {
    /// Root key for a whole run.
    pub fn root(seed: u64) -> Self {
        let path = vec![seed as i64];
        let digest = digest_path(&path);
        StreamKey { path, digest }
    }

    /// Child key with the given components appended.
    pub fn fork(&self, components: &[i64]) -> Self {
        let mut path = Vec::with_capacity(self.path.len() + components.len());
        path.extend_from_slice(&self.path);
        path.extend_from_slice(components);
        let digest = digest_path(&path);
        StreamKey { path, digest }
    }

    pub fn path(&self) -> &[i64] {
        &self.path
    }

    fn rng(&self, counter: u64) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::from_seed(self.digest);
        rng.set_stream(counter);
        rng
    }
}

fn digest_path(path: &[i64]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    for component in path {
        hasher.update(component.to_le_bytes());
    }
    hasher.finalize().into()
}

/// A uniform in the open interval (0, 1), one 64-bit word per draw.
fn uniform_open(rng: &mut ChaCha12Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

/// `d` iid standard normals, deterministic in `(key, counter)`.
pub fn gaussian_vector(key: &StreamKey, counter: u64, dim: usize) -> Vec<f64> {
    let mut rng = key.rng(counter);
    (0..dim)
        .map(|_| crate::stats::normal_quantile(uniform_open(&mut rng)))
        .collect()
}

/// A Brownian increment over `[from_time, to_time]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianIncrement {
    pub delta: Vec<f64>,
    pub from_time: f64,
    pub to_time: f64,
}

/// Sample `W_{t1} - W_{t0}` for a `d`-dimensional standard Brownian
/// motion: `sqrt(t1 - t0)` times a standard normal vector. A zero-length
/// interval is the zero vector and draws nothing.
pub fn brownian_increment(
    key: &StreamKey,
    counter: u64,
    t0: f64,
    t1: f64,
    dim: usize,
) -> Result<BrownianIncrement> {
    if t1 < t0 {
        return Err(Error::InvalidInterval { from: t0, to: t1 });
    }
    let delta = if t1 == t0 {
        vec![0.0; dim]
    } else {
        let scale = (t1 - t0).sqrt();
        let mut v = gaussian_vector(key, counter, dim);
        for z in &mut v {
            *z *= scale;
        }
        v
    };
    Ok(BrownianIncrement {
        delta,
        from_time: t0,
        to_time: t1,
    })
}
