use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::net::NodeId;

/// Log-normal shadowing, one Gaussian draw per (link, position cell).
///
/// Values are a pure function of the base key, the unordered node pair and the
/// cell, so the same position always sees the same shadowing whatever order the
/// queries arrive in.
#[derive(Clone, Debug)]
pub struct Shadowing {
    sigma_db: f64,
    cell_m: f64,
    base_key: u64,
    cache: HashMap<(u32, u32, [i64; 3]), f64>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Shadowing {
    pub fn new(sigma_db: f64, cell_m: f64, base_key: u64) -> Self {
        Shadowing {
            sigma_db,
            cell_m,
            base_key,
            cache: HashMap::new(),
        }
    }

    pub fn sigma_db(&self) -> f64 {
        self.sigma_db
    }

    pub fn cell_of(&self, pos: [f64; 3]) -> [i64; 3] {
        pos.map(|c| (c / self.cell_m).floor() as i64)
    }

    pub fn sample_db(&mut self, a: NodeId, b: NodeId, mobile_pos: [f64; 3]) -> f64 {
        if self.sigma_db == 0.0 {
            return 0.0;
        }
        let (lo, hi) = if a <= b { (a.0, b.0) } else { (b.0, a.0) };
        let cell = self.cell_of(mobile_pos);
        let key = (lo, hi, cell);
        if let Some(v) = self.cache.get(&key) {
            return *v;
        }
        let mut h = splitmix(self.base_key);
        h = splitmix(h ^ ((lo as u64) << 32 | hi as u64));
        for c in cell {
            h = splitmix(h ^ c as u64);
        }
        let z: f64 = StandardNormal.sample(&mut ChaCha8Rng::seed_from_u64(h));
        let v = self.sigma_db * z;
        self.cache.insert(key, v);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_is_zero() {
        let mut s = Shadowing::new(0.0, 1.0, 1);
        assert_eq!(s.sample_db(NodeId(0), NodeId(1), [3.3, 4.4, 30.0]), 0.0);
    }

    #[test]
    fn same_cell_same_value_and_symmetric() {
        let mut s = Shadowing::new(3.0, 1.0, 9);
        let a = s.sample_db(NodeId(0), NodeId(1), [3.3, 4.4, 30.0]);
        let b = s.sample_db(NodeId(1), NodeId(0), [3.9, 4.1, 30.5]);
        assert_eq!(a, b);
        let mut fresh = Shadowing::new(3.0, 1.0, 9);
        assert_eq!(fresh.sample_db(NodeId(0), NodeId(1), [3.0, 4.0, 30.0]), a);
    }

    #[test]
    fn sample_moments_match_sigma() {
        let mut s = Shadowing::new(3.0, 1.0, 4);
        let n = 20_000;
        let xs: Vec<f64> = (0..n)
            .map(|i| s.sample_db(NodeId(0), NodeId(1), [i as f64, 0.0, 30.0]))
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.1, "mean {mean}");
        assert!((var.sqrt() - 3.0).abs() < 0.1, "sd {}", var.sqrt());
    }
}
