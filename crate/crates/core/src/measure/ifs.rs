use std::io::{Read, Write};

use serde::Serialize;

use crate::engine::MatrixSystem;
use crate::error::{invalid, Error, Result};
use crate::measure::rng::SampleRng;
use crate::pressure::ProbabilityVector;

pub const MIN_SAMPLES: u64 = 1_000;
pub const MIN_BURN_IN: u64 = 64;

/// Contracting affine maps `T_i x = A_i x + v_i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AffineIfs {
    maps: MatrixSystem,
    translations: Vec<Vec<f64>>,
}

impl AffineIfs {
    pub fn new(maps: MatrixSystem, translations: Vec<Vec<f64>>) -> Result<Self> {
        maps.require_contracting()?;
        if translations.len() != maps.len() {
            return Err(invalid(format!("{} translations for {} maps", translations.len(), maps.len())));
        }
        let d = maps.dim();
        if let Some(t) = translations.iter().find(|t| t.len() != d) {
            return Err(Error::DimensionMismatch { left: d, right: t.len() });
        }
        if translations.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(AffineIfs { maps, translations })
    }

    pub fn maps(&self) -> &MatrixSystem {
        &self.maps
    }

    pub fn translations(&self) -> &[Vec<f64>] {
        &self.translations
    }

    pub fn dim(&self) -> usize {
        self.maps.dim()
    }

    /// Radius of a ball about the origin containing the attractor.
    pub fn bounding_radius(&self) -> f64 {
        let v = self.translations.iter().map(|t| t.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
        v / (1.0 - self.maps.max_norm())
    }

    /// `out = T_i x`.
    #[inline]
    pub fn apply(&self, i: usize, x: &[f64], out: &mut [f64]) {
        let a = self.maps.map(i).as_slice();
        let d = x.len();
        for (r, o) in out.iter_mut().enumerate() {
            let row = &a[r * d..(r + 1) * d];
            *o = row.iter().zip(x).map(|(m, v)| m * v).sum::<f64>() + self.translations[i][r];
        }
    }

    /// Fraction of samples `x` with `T_i x` in the box, i.e. the empirical `μ(T_i⁻¹Q)`.
    pub fn preimage_mass(&self, samples: &SampleSet, i: usize, lo: &[f64], hi: &[f64]) -> f64 {
        let d = samples.dim;
        let mut y = vec![0.0; d];
        let mut hits = 0u64;
        for x in samples.points() {
            self.apply(i, x, &mut y);
            if in_box(&y, lo, hi) {
                hits += 1;
            }
        }
        hits as f64 / samples.count as f64
    }
}

fn in_box(x: &[f64], lo: &[f64], hi: &[f64]) -> bool {
    x.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| *a <= *v && *v < *b)
}

/// Chaos-game samples of a self-affine measure.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub dim: usize,
    pub seed: u64,
    pub count: u64,
    pub burn_in: u64,
    /// Row-major, `count × dim`.
    pub data: Vec<f64>,
}

const MAGIC: &[u8; 4] = b"FDLS";
const VERSION: u32 = 1;

impl SampleSet {
    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Empirical mass of the half-open box `[lo, hi)`.
    pub fn mass_in_box(&self, lo: &[f64], hi: &[f64]) -> f64 {
        self.points().filter(|x| in_box(x, lo, hi)).count() as f64 / self.count as f64
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for x in self.points() {
            for (a, b) in m.iter_mut().zip(x) {
                *a += b;
            }
        }
        m.iter().map(|a| a / self.count as f64).collect()
    }

    /// Little-endian stream: `"FDLS"`, version `u32`, `d u32`, `count u64`,
    /// `seed u64`, `burn_in u64`, then `count·d` doubles.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        w.write_all(&self.count.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&self.burn_in.to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.data.len() * 8);
        for x in &self.data {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<SampleSet> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let dim = read_u32(&mut r)? as usize;
        let count = read_u64(&mut r)?;
        let seed = read_u64(&mut r)?;
        let burn_in = read_u64(&mut r)?;
        if dim < 2 {
            return Err(Error::Format(format!("dimension {dim}")));
        }
        let n = (count as usize)
            .checked_mul(dim)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| Error::Format("sample count overflows".into()))?;
        let mut bytes = vec![0u8; n];
        r.read_exact(&mut bytes).map_err(|_| Error::Format("truncated sample data".into()))?;
        let data = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(SampleSet { dim, seed, count, burn_in, data })
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|_| Error::Format("truncated header".into()))?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|_| Error::Format("truncated header".into()))?;
    Ok(u64::from_le_bytes(b))
}

/// Random iteration `x ← T_i x`, `i ~ p`, from the origin; the first
/// `burn_in` iterates are discarded and the next `count` kept.
pub fn chaos_game(ifs: &AffineIfs, p: &ProbabilityVector, count: u64, seed: u64, burn_in: u64) -> Result<SampleSet> {
    if p.len() != ifs.maps.len() {
        return Err(invalid(format!("{} probabilities for {} maps", p.len(), ifs.maps.len())));
    }
    if count < MIN_SAMPLES {
        return Err(invalid(format!("need at least {MIN_SAMPLES} samples, got {count}")));
    }
    if burn_in < MIN_BURN_IN {
        return Err(invalid(format!("need a burn-in of at least {MIN_BURN_IN}, got {burn_in}")));
    }
    let d = ifs.dim();
    let cum = p.cumulative();
    let mut rng = SampleRng::new(seed);
    let mut x = vec![0.0; d];
    let mut y = vec![0.0; d];
    let mut data = Vec::with_capacity(count as usize * d);
    for step in 0..burn_in + count {
        let u = rng.uniform();
        let i = cum.iter().position(|&c| u < c).unwrap_or(cum.len() - 1);
        ifs.apply(i, &x, &mut y);
        std::mem::swap(&mut x, &mut y);
        if step >= burn_in {
            data.extend_from_slice(&x);
        }
    }
    Ok(SampleSet { dim: d, seed, count, burn_in, data })
}
