//! OneMax and frozen-noise distorted OneMax.
//!
//! A point is distorted iff a keyed 64-bit hash of its packed bits, read as
//! a double in `[0, 1)` from the top 53 bits, falls below `p`. The landscape
//! is therefore fixed by `(noise_key, p)`, needs no memory, and can be read
//! from any number of threads at once.

use serde::Serialize;

use crate::bitstring::{onemax, SearchPoint};
use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub(crate) fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Keyed hash of a search point: SplitMix64 chained over the packed words,
/// seeded with the key and the dimension.
#[inline]
pub fn point_hash(key: u64, x: &SearchPoint) -> u64 {
    let mut h = splitmix64(key ^ (x.n() as u64).wrapping_mul(GOLDEN_GAMMA));
    for &w in x.words() {
        h = splitmix64(h ^ w);
    }
    splitmix64(h)
}

#[inline]
fn unit_interval(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Fitness value in fitness units. For distorted OneMax it is always
/// `k` or `k + d` for an integer `k` in `[0, n]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Fitness(pub f64);

impl Fitness {
    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Number of fitness evaluations spent by one trial.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounter {
    count: u64,
}

impl EvalCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn count(&self) -> u64 {
        self.count
    }

    #[inline]
    pub(crate) fn bump(&mut self) {
        self.count += 1;
    }
}

/// Fixed target `n - k_star`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TargetSpec {
    k_star: f64,
}

impl TargetSpec {
    pub fn new(k_star: f64, n: usize) -> Result<Self> {
        if !(k_star.is_finite() && (0.0..=n as f64).contains(&k_star)) {
            return Err(Error::config(
                "k_star",
                format!("must lie in [0, n = {n}], got {k_star}"),
            ));
        }
        Ok(Self { k_star })
    }

    pub fn k_star(&self) -> f64 {
        self.k_star
    }

    pub fn target_value(&self, n: usize) -> f64 {
        n as f64 - self.k_star
    }
}

#[inline]
pub fn target_reached(f: Fitness, n: usize, spec: TargetSpec) -> bool {
    f.0 >= spec.target_value(n)
}

/// Configuration of one distorted OneMax instance: dimension, distortion
/// probability `p`, distortion height `d` and the key freezing the noise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortedOneMax {
    n: usize,
    p: f64,
    d: f64,
    noise_key: u64,
}

impl DistortedOneMax {
    pub fn new(n: usize, p: f64, d: f64, noise_key: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("n", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::config("p", format!("must lie in [0, 1], got {p}")));
        }
        if !(d.is_finite() && d >= 0.0) {
            return Err(Error::config("d", format!("must be finite and >= 0, got {d}")));
        }
        Ok(Self { n, p, d, noise_key })
    }

    /// Plain OneMax as the `p = 0` instance.
    pub fn onemax(n: usize) -> Result<Self> {
        Self::new(n, 0.0, 0.0, 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn noise_key(&self) -> u64 {
        self.noise_key
    }

    fn check_dim(&self, x: &SearchPoint) -> Result<()> {
        if x.n() != self.n {
            return Err(Error::arg(format!(
                "dimension mismatch: landscape n = {}, point n = {}",
                self.n,
                x.n()
            )));
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn distorted_unchecked(&self, x: &SearchPoint) -> bool {
        if self.p <= 0.0 {
            return false;
        }
        if self.p >= 1.0 {
            return true;
        }
        unit_interval(point_hash(self.noise_key, x)) < self.p
    }

    pub fn is_distorted(&self, x: &SearchPoint) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.distorted_unchecked(x))
    }

    /// Fitness plus distortion status; counts one evaluation.
    #[inline]
    pub(crate) fn evaluate_unchecked(
        &self,
        x: &SearchPoint,
        counter: &mut EvalCounter,
    ) -> (Fitness, bool) {
        counter.bump();
        let distorted = self.distorted_unchecked(x);
        let base = onemax(x) as f64;
        let value = if distorted { base + self.d } else { base };
        (Fitness(value), distorted)
    }

    pub fn evaluate_with_status(
        &self,
        x: &SearchPoint,
        counter: &mut EvalCounter,
    ) -> Result<(Fitness, bool)> {
        self.check_dim(x)?;
        Ok(self.evaluate_unchecked(x, counter))
    }

    /// `disOM(x) = OM(x) + d·[x distorted]`; counts one evaluation.
    pub fn evaluate(&self, x: &SearchPoint, counter: &mut EvalCounter) -> Result<Fitness> {
        self.evaluate_with_status(x, counter).map(|(f, _)| f)
    }
}

/// Plain OneMax value; counts one evaluation.
pub fn evaluate_onemax(x: &SearchPoint, counter: &mut EvalCounter) -> Fitness {
    counter.bump();
    Fitness(onemax(x) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitstring::{uniform_random_point, RandomStream};
    use proptest::prelude::*;

    fn sp(s: &str) -> SearchPoint {
        s.parse().unwrap()
    }

    /// Finds a key under which `x` has the requested status.
    fn key_with_status(cfg: &DistortedOneMax, x: &SearchPoint, want: bool) -> u64 {
        (0u64..)
            .find(|&k| {
                DistortedOneMax::new(cfg.n, cfg.p, cfg.d, k)
                    .unwrap()
                    .is_distorted(x)
                    .unwrap()
                    == want
            })
            .unwrap()
    }

    #[test]
    fn extreme_probabilities() {
        let mut rng = RandomStream::new(1);
        let never = DistortedOneMax::new(30, 0.0, 1.0, 5).unwrap();
        let always = DistortedOneMax::new(30, 1.0, 1.0, 5).unwrap();
        for _ in 0..1000 {
            let x = uniform_random_point(30, &mut rng).unwrap();
            assert!(!never.is_distorted(&x).unwrap());
            assert!(always.is_distorted(&x).unwrap());
        }
    }

    #[test]
    fn evaluate_examples() {
        let x = sp("11010");
        let proto = DistortedOneMax::new(5, 0.5, 2.3, 0).unwrap();
        let dk = key_with_status(&proto, &x, true);
        let ck = key_with_status(&proto, &x, false);
        let mut c = EvalCounter::new();
        let distorted = DistortedOneMax::new(5, 0.5, 2.3, dk).unwrap();
        let clean = DistortedOneMax::new(5, 0.5, 2.3, ck).unwrap();
        assert_eq!(distorted.evaluate(&x, &mut c).unwrap(), Fitness(5.3));
        assert_eq!(clean.evaluate(&x, &mut c).unwrap(), Fitness(3.0));
        assert_eq!(
            distorted.evaluate(&x, &mut c).unwrap(),
            distorted.evaluate(&x, &mut c).unwrap()
        );
        assert_eq!(c.count(), 4);
    }

    #[test]
    fn evaluate_onemax_examples() {
        let mut c = EvalCounter::new();
        assert_eq!(evaluate_onemax(&sp("10110"), &mut c), Fitness(3.0));
        assert_eq!(evaluate_onemax(&sp("11111"), &mut c), Fitness(5.0));
        assert_eq!(c.count(), 2);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let cfg = DistortedOneMax::new(6, 0.5, 1.0, 0).unwrap();
        let mut c = EvalCounter::new();
        assert!(cfg.is_distorted(&sp("10110")).is_err());
        assert!(cfg.evaluate(&sp("10110"), &mut c).is_err());
        assert_eq!(c.count(), 0);
    }

    #[test]
    fn invalid_configs() {
        assert!(DistortedOneMax::new(0, 0.1, 1.0, 0).is_err());
        assert!(DistortedOneMax::new(5, -0.1, 1.0, 0).is_err());
        assert!(DistortedOneMax::new(5, 1.1, 1.0, 0).is_err());
        assert!(DistortedOneMax::new(5, f64::NAN, 1.0, 0).is_err());
        assert!(DistortedOneMax::new(5, 0.1, -1.0, 0).is_err());
        assert!(TargetSpec::new(6.0, 5).is_err());
        assert!(TargetSpec::new(-0.5, 5).is_err());
    }

    #[test]
    fn target_examples() {
        let spec = TargetSpec::new(100f64.powf(0.4), 100).unwrap();
        assert!(target_reached(Fitness(94.0), 100, spec));
        assert!(!target_reached(Fitness(93.0), 100, spec));
        let all = TargetSpec::new(5.0, 5).unwrap();
        assert!(target_reached(Fitness(0.0), 5, all));
    }

    #[test]
    fn distortion_rate_at_p_one_tenth() {
        let cfg = DistortedOneMax::new(64, 0.1, 1.0, 0xDEAD_BEEF).unwrap();
        let mut rng = RandomStream::new(17);
        let draws = 100_000;
        let hits = (0..draws)
            .filter(|_| {
                let x = uniform_random_point(64, &mut rng).unwrap();
                cfg.is_distorted(&x).unwrap()
            })
            .count();
        let rate = hits as f64 / draws as f64;
        assert!((rate - 0.1).abs() <= 0.003, "rate {rate}");
    }

    #[test]
    fn neighbouring_points_are_uncorrelated() {
        // all 2^12 points; 100 random flip positions (with repetition) pooled
        let n = 12;
        let cfg = DistortedOneMax::new(n, 0.25, 1.0, 4242).unwrap();
        let status: Vec<bool> = (0u64..1 << n)
            .map(|m| {
                let bits: Vec<bool> = (0..n).map(|i| (m >> i) & 1 == 1).collect();
                cfg.is_distorted(&SearchPoint::from_bits(&bits).unwrap())
                    .unwrap()
            })
            .collect();
        let mut rng = RandomStream::new(8);
        let (mut sx, mut sy, mut sxx, mut syy, mut sxy, mut cnt) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..100 {
            let pos = rand::Rng::random_range(&mut rng, 0..n);
            for m in 0..(1usize << n) {
                if (m >> pos) & 1 == 1 {
                    continue;
                }
                let a = status[m] as u8 as f64;
                let b = status[m | (1 << pos)] as u8 as f64;
                sx += a;
                sy += b;
                sxx += a * a;
                syy += b * b;
                sxy += a * b;
                cnt += 1.0;
            }
        }
        let cov = sxy / cnt - (sx / cnt) * (sy / cnt);
        let vx = sxx / cnt - (sx / cnt).powi(2);
        let vy = syy / cnt - (sy / cnt).powi(2);
        let corr = cov / (vx * vy).sqrt();
        assert!(corr.abs() < 0.05, "corr = {corr}");
    }

    #[test]
    fn hash_golden_values() {
        let x = sp("1011001110001111");
        assert_eq!(point_hash(0, &x), GOLDEN_HASH[0]);
        assert_eq!(point_hash(12345, &x), GOLDEN_HASH[1]);
    }

    const GOLDEN_HASH: [u64; 2] = [10228400387677538671, 91000584333223979];

    proptest! {
        #[test]
        fn offset_is_zero_or_d(
            bits in prop::collection::vec(any::<bool>(), 1..150),
            p in 0.0f64..=1.0,
            d in 0.0f64..20.0,
            key in any::<u64>(),
        ) {
            let x = SearchPoint::from_bits(&bits).unwrap();
            let cfg = DistortedOneMax::new(bits.len(), p, d, key).unwrap();
            let mut c = EvalCounter::new();
            let f = cfg.evaluate(&x, &mut c).unwrap().value();
            let diff = f - onemax(&x) as f64;
            prop_assert!(diff == 0.0 || (diff - d).abs() < 1e-9);
            prop_assert_eq!(cfg.evaluate(&x, &mut c).unwrap().value(), f);
            prop_assert_eq!(c.count(), 2);
        }

        #[test]
        fn p_zero_equals_onemax(bits in prop::collection::vec(any::<bool>(), 1..150), key in any::<u64>()) {
            let x = SearchPoint::from_bits(&bits).unwrap();
            let cfg = DistortedOneMax::new(bits.len(), 0.0, 3.0, key).unwrap();
            let mut c = EvalCounter::new();
            prop_assert_eq!(cfg.evaluate(&x, &mut c).unwrap(), evaluate_onemax(&x, &mut c));
        }
    }
}
