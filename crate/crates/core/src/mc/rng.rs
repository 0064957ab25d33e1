//! Stateless counter-based uniforms keyed by `(seed, sample, component, draw)`.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64 random bits for one counter.
#[inline]
pub fn bits(seed: u64, sample: u64, component: u64, draw: u64) -> u64 {
    let mut h = mix(seed.wrapping_add(GOLDEN));
    h = mix(h ^ sample.wrapping_mul(GOLDEN).wrapping_add(1));
    h = mix(h ^ component.wrapping_mul(0xD1B5_4A32_D192_ED03).wrapping_add(2));
    mix(h ^ draw.wrapping_add(3))
}

/// Uniform on the open interval `(0, 1)`.
#[inline]
pub fn uniform(seed: u64, sample: u64, component: u64, draw: u64) -> f64 {
    ((bits(seed, sample, component, draw) >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal by Box–Muller from two counters.
#[inline]
pub fn normal(seed: u64, sample: u64, component: u64) -> f64 {
    let u1 = uniform(seed, sample, component, 0);
    let u2 = uniform(seed, sample, component, 1);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
