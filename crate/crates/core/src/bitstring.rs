//! Packed bit-string genotypes, counting primitives, standard bit mutation
//! and the seeded random stream every trial owns.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_distr::{Binomial, Distribution};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

/// A point of the hypercube `{0,1}^n`, stored as packed 64-bit words.
///
/// Bit `i` (0-based) lives in word `i / 64` at bit offset `i % 64`. Unused
/// high bits of the last word are always zero, so word-level hashing and
/// population counts never see garbage.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SearchPoint {
    n: usize,
    words: Vec<u64>,
}

impl SearchPoint {
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("dimension n must be at least 1"));
        }
        Ok(Self {
            n,
            words: vec![0; n.div_ceil(WORD_BITS)],
        })
    }

    pub fn ones(n: usize) -> Result<Self> {
        let mut x = Self::zeros(n)?;
        x.words.iter_mut().for_each(|w| *w = u64::MAX);
        x.mask_tail();
        Ok(x)
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mut x = Self::zeros(bits.len())?;
        for (i, &b) in bits.iter().enumerate() {
            x.set(i, b);
        }
        Ok(x)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.n, "bit index {i} out of range for n = {}", self.n);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.n, "bit index {i} out of range for n = {}", self.n);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.n);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    /// Flips every listed position. Positions must be distinct for the
    /// result to equal "flip this set".
    #[inline]
    pub fn flip_all(&mut self, positions: &[u32]) {
        for &i in positions {
            self.flip(i as usize);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.n).map(move |i| self.get(i))
    }

    fn mask_tail(&mut self) {
        let rem = self.n % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Display for SearchPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for SearchPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SearchPoint({self})")
    }
}

impl FromStr for SearchPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::arg(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(&bits)
    }
}

/// `OM(x)`: number of one-bits.
#[inline]
pub fn onemax(x: &SearchPoint) -> usize {
    x.words.iter().map(|w| w.count_ones() as usize).sum()
}

/// `ZM(x) = n - OM(x)`: Hamming distance to the all-ones string.
#[inline]
pub fn zeromax(x: &SearchPoint) -> usize {
    x.n - onemax(x)
}

pub fn hamming(x: &SearchPoint, y: &SearchPoint) -> Result<usize> {
    if x.n != y.n {
        return Err(Error::arg(format!(
            "dimension mismatch: {} vs {}",
            x.n, y.n
        )));
    }
    Ok(x.words
        .iter()
        .zip(&y.words)
        .map(|(a, b)| (a ^ b).count_ones() as usize)
        .sum())
}

/// Closest integer `⌊a + 1/2⌋`; half-integers round up.
#[inline]
pub fn nearest_int(a: f64) -> u64 {
    debug_assert!(a >= 0.0);
    (a + 0.5).floor() as u64
}

/// Seeded pseudo-random stream owned by a single trial.
///
/// Backed by xoshiro256++ seeded through SplitMix64 (`seed_from_u64`).
/// Equal seeds give identical sequences on every platform. [`jumped`]
/// derives a non-overlapping substream 2^128 steps ahead.
///
/// [`jumped`]: RandomStream::jumped
#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    inner: Xoshiro256PlusPlus,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Returns a copy advanced by 2^128 draws; the original is unchanged.
    pub fn jumped(&self) -> Self {
        let mut next = self.clone();
        next.inner.jump();
        next
    }
}

impl RngCore for RandomStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Draws every bit string of length `n` with equal probability.
pub fn uniform_random_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<SearchPoint> {
    let mut x = SearchPoint::zeros(n)?;
    for w in x.words.iter_mut() {
        *w = rng.next_u64();
    }
    x.mask_tail();
    Ok(x)
}

/// Standard bit mutation with rate `1/n` for a fixed dimension.
///
/// Samples the number of flipped bits from `Binomial(n, 1/n)` and then that
/// many distinct positions uniformly at random. This induces exactly the
/// same offspring distribution as flipping each bit independently, at
/// O(expected flips) cost instead of O(n).
#[derive(Clone, Debug)]
pub struct BitMutation {
    n: usize,
    flip_count: Binomial,
}

impl BitMutation {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("dimension n must be at least 1"));
        }
        let flip_count = Binomial::new(n as u64, 1.0 / n as f64)
            .map_err(|e| Error::arg(format!("binomial sampler: {e}")))?;
        Ok(Self { n, flip_count })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Writes the distinct positions to flip into `out` (cleared first).
    /// An empty result means the offspring is a clone.
    pub fn sample_flips<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<u32>) {
        out.clear();
        let k = self.flip_count.sample(rng) as usize;
        if k == 0 {
            return;
        }
        if 2 * k <= self.n {
            // rejection is cheap while k is a small fraction of n
            while out.len() < k {
                let pos = rng.random_range(0..self.n as u32);
                if !out.contains(&pos) {
                    out.push(pos);
                }
            }
        } else {
            out.extend(index::sample(rng, self.n, k).iter().map(|i| i as u32));
        }
    }

    pub fn mutate<R: Rng + ?Sized>(&self, x: &SearchPoint, rng: &mut R) -> SearchPoint {
        debug_assert_eq!(x.n, self.n);
        let mut flips = Vec::new();
        self.sample_flips(rng, &mut flips);
        let mut y = x.clone();
        y.flip_all(&flips);
        y
    }
}

/// One offspring of `x` by standard bit mutation. `x` is left untouched.
pub fn standard_bit_mutation<R: Rng + ?Sized>(x: &SearchPoint, rng: &mut R) -> SearchPoint {
    BitMutation::new(x.n)
        .expect("a SearchPoint always has n >= 1")
        .mutate(x, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::RngCore;
    use statrs::distribution::{Binomial as StatBinomial, ChiSquared, ContinuousCDF, Discrete};

    fn sp(s: &str) -> SearchPoint {
        s.parse().unwrap()
    }

    #[test]
    fn onemax_and_zeromax_examples() {
        assert_eq!(onemax(&sp("10110")), 3);
        assert_eq!(onemax(&sp("00000")), 0);
        assert_eq!(onemax(&sp("11111")), 5);
        assert_eq!(zeromax(&sp("10110")), 2);
        assert_eq!(zeromax(&sp("11111")), 0);
        assert_eq!(zeromax(&sp("00000")), 5);
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming(&sp("10110"), &sp("00111")).unwrap(), 2);
        let x = sp("10110");
        assert_eq!(hamming(&x, &x).unwrap(), 0);
        assert_eq!(hamming(&sp("00000"), &sp("11111")).unwrap(), 5);
        assert!(matches!(
            hamming(&sp("101"), &sp("1010")),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn nearest_int_rounds_half_up() {
        assert_eq!(nearest_int(2.5), 3);
        assert_eq!(nearest_int(2.49), 2);
        assert_eq!(nearest_int(1.0), 1);
        assert_eq!(nearest_int(0.0), 0);
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(SearchPoint::zeros(0).is_err());
        assert!(uniform_random_point(0, &mut RandomStream::new(1)).is_err());
        assert!(BitMutation::new(0).is_err());
    }

    #[test]
    fn ones_masks_tail_bits() {
        let x = SearchPoint::ones(70).unwrap();
        assert_eq!(onemax(&x), 70);
        assert_eq!(x.words()[1], (1u64 << 6) - 1);
        assert_eq!(x.to_string().len(), 70);
    }

    #[test]
    fn mutation_at_n1_always_complements() {
        let mut rng = RandomStream::new(3);
        let x = sp("0");
        for _ in 0..1000 {
            assert_eq!(standard_bit_mutation(&x, &mut rng), sp("1"));
        }
    }

    #[test]
    fn mutation_leaves_parent_untouched() {
        let mut rng = RandomStream::new(11);
        let x = uniform_random_point(100, &mut rng).unwrap();
        let before = x.clone();
        for _ in 0..100 {
            let _ = standard_bit_mutation(&x, &mut rng);
        }
        assert_eq!(x, before);
    }

    #[test]
    fn mean_hamming_distance_is_one() {
        let m = BitMutation::new(100).unwrap();
        let mut rng = RandomStream::new(2024);
        let mut flips = Vec::new();
        let trials = 1_000_000;
        let total: usize = (0..trials)
            .map(|_| {
                m.sample_flips(&mut rng, &mut flips);
                flips.len()
            })
            .sum();
        let mean = total as f64 / trials as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean = {mean}");
    }

    #[test]
    fn clone_frequency_matches_exact_probability() {
        let n = 20;
        let m = BitMutation::new(n).unwrap();
        let mut rng = RandomStream::new(5);
        let x = uniform_random_point(n, &mut rng).unwrap();
        let trials = 200_000;
        let clones = (0..trials).filter(|_| m.mutate(&x, &mut rng) == x).count();
        let exact = (1.0 - 1.0 / n as f64).powi(n as i32);
        let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
        let freq = clones as f64 / trials as f64;
        assert!((freq - exact).abs() < 4.0 * sigma, "{freq} vs {exact}");
    }

    #[test]
    fn uniform_point_statistics() {
        let n = 20;
        let draws = 100_000;
        let mut rng = RandomStream::new(77);
        let mut per_pos = vec![0usize; n];
        let mut om_total = 0usize;
        for _ in 0..draws {
            let x = uniform_random_point(n, &mut rng).unwrap();
            om_total += onemax(&x);
            for (i, c) in per_pos.iter_mut().enumerate() {
                *c += x.get(i) as usize;
            }
        }
        for c in per_pos {
            let f = c as f64 / draws as f64;
            assert!((f - 0.5).abs() < 0.01, "position frequency {f}");
        }
        let mean = om_total as f64 / draws as f64;
        assert!((mean - 10.0).abs() < 0.1, "mean onemax {mean}");
    }

    #[test]
    fn uniform_point_n1_hits_both_values() {
        let mut rng = RandomStream::new(9);
        let ones = (0..10_000)
            .filter(|_| onemax(&uniform_random_point(1, &mut rng).unwrap()) == 1)
            .count();
        assert!((4_500..5_500).contains(&ones));
    }

    #[test]
    fn hamming_distance_is_binomial_chi_squared() {
        let n = 50;
        let samples = 1_000_000;
        let m = BitMutation::new(n).unwrap();
        let mut rng = RandomStream::new(123);
        let x = uniform_random_point(n, &mut rng).unwrap();
        // bins 0..=6, last bin lumps the tail
        let bins = 7;
        let mut observed = vec![0f64; bins + 1];
        for _ in 0..samples {
            let y = m.mutate(&x, &mut rng);
            let h = hamming(&x, &y).unwrap();
            observed[h.min(bins)] += 1.0;
        }
        let reference = StatBinomial::new(1.0 / n as f64, n as u64).unwrap();
        let mut expected: Vec<f64> = (0..bins)
            .map(|k| reference.pmf(k as u64) * samples as f64)
            .collect();
        expected.push(samples as f64 - expected.iter().sum::<f64>());
        let chi2: f64 = observed
            .iter()
            .zip(&expected)
            .map(|(o, e)| (o - e).powi(2) / e)
            .sum();
        let critical = ChiSquared::new(bins as f64).unwrap().inverse_cdf(0.999);
        assert!(chi2 < critical, "chi2 = {chi2}, critical = {critical}");
    }

    /// Offspring law of the fast sampler against the per-bit product law,
    /// enumerated over all 2^n offspring.
    #[test]
    fn fast_sampler_matches_per_bit_flipping_exactly() {
        for n in 1..=4usize {
            let m = BitMutation::new(n).unwrap();
            let mut rng = RandomStream::new(900 + n as u64);
            let parent = uniform_random_point(n, &mut rng).unwrap();
            let samples = 1_000_000;
            let mut counts = vec![0f64; 1 << n];
            for _ in 0..samples {
                let y = m.mutate(&parent, &mut rng);
                counts[(y.words()[0] ^ parent.words()[0]) as usize] += 1.0;
            }
            let rate = 1.0 / n as f64;
            let mut chi2 = 0.0;
            let mut cells = 0;
            for (mask, &o) in counts.iter().enumerate() {
                let k = (mask as u32).count_ones() as i32;
                let prob = rate.powi(k) * (1.0 - rate).powi(n as i32 - k);
                if prob == 0.0 {
                    assert_eq!(o, 0.0, "impossible offspring drawn at n = {n}");
                    continue;
                }
                let e = prob * samples as f64;
                chi2 += (o - e).powi(2) / e;
                cells += 1;
            }
            if cells > 1 {
                let critical = ChiSquared::new((cells - 1) as f64)
                    .unwrap()
                    .inverse_cdf(0.999);
                assert!(chi2 < critical, "n = {n}: chi2 = {chi2} >= {critical}");
            }
        }
    }

    #[test]
    fn equal_seeds_give_identical_mutation_sequences() {
        let m = BitMutation::new(64).unwrap();
        let x = SearchPoint::zeros(64).unwrap();
        let mut a = RandomStream::new(42);
        let mut b = RandomStream::new(42);
        for _ in 0..1000 {
            assert_eq!(m.mutate(&x, &mut a), m.mutate(&x, &mut b));
        }
    }

    #[test]
    fn jumped_stream_diverges_and_leaves_original() {
        let base = RandomStream::new(1);
        let mut original = base.clone();
        let mut jumped = base.jumped();
        let mut fresh = RandomStream::new(1);
        assert_ne!(jumped.next_u64(), fresh.next_u64());
        assert_eq!(original.next_u64(), RandomStream::new(1).next_u64());
        assert_eq!(jumped.seed(), 1);
    }

    #[test]
    fn generator_golden_output() {
        let mut rng = RandomStream::new(0);
        let first: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
        assert_eq!(first, GOLDEN_SEED0);
    }

    const GOLDEN_SEED0: [u64; 3] = [5987356902031041503, 7051070477665621255, 6633766593972829180];

    proptest! {
        #[test]
        fn onemax_plus_zeromax_is_n(bits in prop::collection::vec(any::<bool>(), 1..300)) {
            let x = SearchPoint::from_bits(&bits).unwrap();
            prop_assert_eq!(onemax(&x) + zeromax(&x), bits.len());
            prop_assert_eq!(onemax(&x), bits.iter().filter(|&&b| b).count());
        }

        #[test]
        fn hamming_is_a_metric_on_samples(
            a in prop::collection::vec(any::<bool>(), 130),
            b in prop::collection::vec(any::<bool>(), 130),
        ) {
            let x = SearchPoint::from_bits(&a).unwrap();
            let y = SearchPoint::from_bits(&b).unwrap();
            let h = hamming(&x, &y).unwrap();
            prop_assert_eq!(h, hamming(&y, &x).unwrap());
            prop_assert_eq!(h == 0, x == y);
            prop_assert!(h <= 130);
            prop_assert_eq!(h, a.iter().zip(&b).filter(|(p, q)| p != q).count());
        }

        #[test]
        fn display_round_trips(bits in prop::collection::vec(any::<bool>(), 1..200)) {
            let x = SearchPoint::from_bits(&bits).unwrap();
            prop_assert_eq!(x.to_string().parse::<SearchPoint>().unwrap(), x);
        }
    }
}
