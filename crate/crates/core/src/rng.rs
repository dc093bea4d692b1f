//! Counter-based Gaussian increments.
//!
//! Philox4x32-10 keyed by a 64-bit trajectory seed. The Wiener increment of
//! integration step `s` on channel `k` is a pure function of
//! `(seed, s, k)`: counter `[s_lo, s_hi, k, 0]`, two 53-bit uniforms from the
//! output block, one Box–Muller normal. Trajectory `i` of an ensemble uses
//! `derive_seed(base_seed, i)`.

const M0: u32 = 0xD251_1F53;
const M1: u32 = 0xCD9E_8D57;
const W0: u32 = 0x9E37_79B9;
const W1: u32 = 0xBB67_AE85;
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = (a as u64) * (b as u64);
    ((p >> 32) as u32, p as u32)
}

/// Philox4x32 with 10 rounds.
pub fn philox4x32(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(W0);
            k[1] = k[1].wrapping_add(W1);
        }
        let (hi0, lo0) = mulhilo(M0, c[0]);
        let (hi1, lo1) = mulhilo(M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trajectory `index` in an ensemble with `base_seed`.
pub fn derive_seed(base_seed: u64, index: u64) -> u64 {
    splitmix64(base_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Standard normal variate attached to `(seed, step, channel)`.
pub fn standard_normal(seed: u64, step: u64, channel: u32) -> f64 {
    let key = [seed as u32, (seed >> 32) as u32];
    let out = philox4x32([step as u32, (step >> 32) as u32, channel, 0], key);
    let a = ((out[0] as u64) << 32 | out[1] as u64) >> 11;
    let b = ((out[2] as u64) << 32 | out[3] as u64) >> 11;
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    // u1 in (0, 1] keeps the logarithm finite.
    let u1 = (a + 1) as f64 * SCALE;
    let u2 = b as f64 * SCALE;
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Source of Wiener increments, indexed by integration step.
pub trait NoiseSource {
    /// Writes the increments of step `step` (one per channel) into `out`.
    fn increments(&self, step: u64, dt: f64, out: &mut [f64]);
}

/// Philox increments. With `substeps = m > 1` each increment is the sum of
/// `m` finer increments of width `dt/m`, so a run at `dt` and a run at
/// `dt/m` with `substeps = 1` see the same Brownian path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterNoise {
    pub seed: u64,
    pub substeps: u32,
}

impl CounterNoise {
    pub fn new(seed: u64) -> Self {
        Self { seed, substeps: 1 }
    }

    pub fn with_substeps(seed: u64, substeps: u32) -> Self {
        Self { seed, substeps: substeps.max(1) }
    }
}

impl NoiseSource for CounterNoise {
    fn increments(&self, step: u64, dt: f64, out: &mut [f64]) {
        let m = self.substeps as u64;
        let scale = (dt / m as f64).sqrt();
        for (k, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for j in 0..m {
                s += standard_normal(self.seed, step * m + j, k as u32);
            }
            *o = scale * s;
        }
    }
}

/// All increments zero: the deterministic (drift-only) flow.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNoise;

impl NoiseSource for ZeroNoise {
    fn increments(&self, _step: u64, _dt: f64, out: &mut [f64]) {
        out.fill(0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn philox_known_answers() {
        assert_eq!(philox4x32([0; 4], [0; 2]), [0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8]);
        assert_eq!(
            philox4x32([u32::MAX; 4], [u32::MAX; 2]),
            [0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd]
        );
        assert_eq!(
            philox4x32([0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344], [0xa4093822, 0x299f31d0]),
            [0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1]
        );
    }

    #[test]
    fn normals_have_unit_moments() {
        let n = 200_000u64;
        let (mut s1, mut s2, mut s4) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let z = standard_normal(17, i, 0);
            s1 += z;
            s2 += z * z;
            s4 += z * z * z * z;
        }
        let nf = n as f64;
        assert!((s1 / nf).abs() < 0.01);
        assert!((s2 / nf - 1.0).abs() < 0.015);
        assert!((s4 / nf - 3.0).abs() < 0.08);
    }

    #[test]
    fn channels_and_seeds_decorrelate() {
        let n = 50_000u64;
        let mut c = 0.0;
        let mut d = 0.0;
        for i in 0..n {
            c += standard_normal(5, i, 0) * standard_normal(5, i, 1);
            d += standard_normal(derive_seed(9, 0), i, 0) * standard_normal(derive_seed(9, 1), i, 0);
        }
        assert!((c / n as f64).abs() < 0.02);
        assert!((d / n as f64).abs() < 0.02);
    }

    #[test]
    fn substeps_sum_fine_increments() {
        let coarse = CounterNoise::with_substeps(3, 4);
        let fine = CounterNoise::new(3);
        let mut a = [0.0; 2];
        coarse.increments(5, 0.4, &mut a);
        let mut sum = [0.0; 2];
        for j in 0..4 {
            let mut b = [0.0; 2];
            fine.increments(20 + j, 0.1, &mut b);
            sum[0] += b[0];
            sum[1] += b[1];
        }
        assert!((a[0] - sum[0]).abs() < 1e-14 && (a[1] - sum[1]).abs() < 1e-14);
    }
}
