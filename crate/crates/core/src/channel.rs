//! The effective channel: uniform row permutation, deletion of `k` rows, and
//! BSC(p) noise on each surviving row.

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::codebook::{Codebook, Codeword};
use crate::error::{Error, Result};

/// Below this crossover probability noise masks are drawn by geometric
/// skipping between flipped positions rather than one draw per bit.
const GEOMETRIC_SKIP_BELOW: f64 = 0.125;

/// An injective map from `{0..len}` into `{0..m}`.
///
/// Indices are 0-based; the CLI converts to the 1-based convention at its
/// boundary.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InjectiveMap {
    image: Vec<usize>,
    m: usize,
}

impl InjectiveMap {
    pub fn new(image: Vec<usize>, m: usize) -> Result<Self> {
        if image.len() > m {
            return Err(Error::invalid(format!(
                "domain of size {} cannot map injectively into {m} indices",
                image.len()
            )));
        }
        let mut seen = vec![false; m];
        for &j in &image {
            if j >= m {
                return Err(Error::invalid(format!("index {j} out of range 0..{m}")));
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::invalid(format!("index {j} repeated")));
            }
        }
        Ok(InjectiveMap { image, m })
    }

    /// Builds a map from 1-based indices.
    pub fn from_one_based(image: &[usize], m: usize) -> Result<Self> {
        let zero = image
            .iter()
            .map(|&j| {
                j.checked_sub(1)
                    .ok_or_else(|| Error::invalid("1-based index must be at least 1"))
            })
            .collect::<Result<Vec<_>>>()?;
        InjectiveMap::new(zero, m)
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn domain_size(&self) -> usize {
        self.image.len()
    }

    pub fn codomain_size(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize) -> usize {
        self.image[i]
    }
}

/// Crossover probability and number of absent rows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams {
    pub p: f64,
    pub k: usize,
}

impl ChannelParams {
    /// `p` must lie in `[0, 0.5)`; `p = 0` is accepted for noiseless tests.
    pub fn new(p: f64, k: usize) -> Result<Self> {
        if !(0.0..0.5).contains(&p) {
            return Err(Error::invalid(format!(
                "crossover probability {p} outside [0, 0.5)"
            )));
        }
        Ok(ChannelParams { p, k })
    }

    pub fn check_for(&self, m: usize) -> Result<()> {
        if self.k >= m {
            return Err(Error::invalid(format!(
                "k = {} absent rows requires k < m = {m}",
                self.k
            )));
        }
        Ok(())
    }
}

/// The noisy `(m - k) x n` channel output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    rows: Vec<Codeword>,
    n: usize,
}

impl Observation {
    pub fn new(rows: Vec<Codeword>, n: usize) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::invalid(format!(
                "observation row of length {} where {n} was expected",
                r.len()
            )));
        }
        Ok(Observation { rows, n })
    }

    pub fn rows(&self) -> &[Codeword] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &Codeword {
        &self.rows[i]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Draws a uniform injective map `{0..m-k} -> {0..m}` with a partial
/// Fisher-Yates shuffle.
pub fn sample_injective_map<R: Rng + ?Sized>(
    m: usize,
    k: usize,
    rng: &mut R,
) -> Result<InjectiveMap> {
    if k >= m {
        return Err(Error::invalid(format!("need k < m, got k = {k}, m = {m}")));
    }
    let keep = m - k;
    let mut perm: Vec<usize> = (0..m).collect();
    for i in 0..keep {
        let j = rng.random_range(i..m);
        perm.swap(i, j);
    }
    perm.truncate(keep);
    Ok(InjectiveMap { image: perm, m })
}

/// Flips each bit of `word` independently with probability `p`.
pub fn apply_bsc<R: Rng + ?Sized>(word: &mut Codeword, p: f64, rng: &mut R) {
    let n = word.len();
    if p <= 0.0 {
        return;
    }
    if p < GEOMETRIC_SKIP_BELOW {
        // Gaps between flips are i.i.d. Geometric(p) failure counts.
        let gap = Geometric::new(p).expect("p in (0, 1)");
        let mut pos = gap.sample(rng);
        while pos < n as u64 {
            word.flip(pos as usize);
            pos = pos.saturating_add(1).saturating_add(gap.sample(rng));
        }
    } else {
        let mut mask = vec![0u64; word.words().len()];
        for i in 0..n {
            if rng.random_bool(p) {
                mask[i / 64] |= 1 << (i % 64);
            }
        }
        word.xor_words(&mask);
    }
}

/// Sends the rows selected by `map` through BSC(p).
pub fn transmit<R: Rng + ?Sized>(
    c: &Codebook,
    map: &InjectiveMap,
    params: ChannelParams,
    rng: &mut R,
) -> Result<Observation> {
    if map.codomain_size() != c.m() {
        return Err(Error::invalid(format!(
            "map targets {} indices but codebook has {} rows",
            map.codomain_size(),
            c.m()
        )));
    }
    if let Some(&j) = map.image().iter().find(|&&j| j >= c.m()) {
        return Err(Error::invalid(format!("map index {j} out of range")));
    }
    params.check_for(c.m())?;
    if map.domain_size() != c.m() - params.k {
        return Err(Error::invalid(format!(
            "map keeps {} rows but m - k = {}",
            map.domain_size(),
            c.m() - params.k
        )));
    }
    let rows = map
        .image()
        .iter()
        .map(|&j| {
            let mut row = c.row(j).clone();
            apply_bsc(&mut row, params.p, rng);
            row
        })
        .collect();
    Ok(Observation { rows, n: c.n() })
}

/// Natural-log likelihood of `obs` given that row `i` came from codeword
/// `map(i)`: sum of `d_i ln p + (n - d_i) ln(1 - p)`.
pub fn observation_log_likelihood(
    obs: &Observation,
    c: &Codebook,
    map: &InjectiveMap,
    p: f64,
) -> Result<f64> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::invalid(format!("p = {p} outside (0, 0.5)")));
    }
    check_dims(obs, c)?;
    if map.domain_size() != obs.len() || map.codomain_size() != c.m() {
        return Err(Error::invalid("map shape does not match observation"));
    }
    let n = c.n() as f64;
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    Ok(obs
        .rows()
        .iter()
        .zip(map.image())
        .map(|(y, &j)| {
            let d = y.distance(c.row(j)) as f64;
            d * lp + (n - d) * lq
        })
        .sum())
}

pub(crate) fn check_dims(obs: &Observation, c: &Codebook) -> Result<()> {
    if obs.n() != c.n() {
        return Err(Error::invalid(format!(
            "observation rows have length {} but codewords have length {}",
            obs.n(),
            c.n()
        )));
    }
    Ok(())
}
