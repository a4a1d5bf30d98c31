//! Seeded generators for points, isometries, boxes and laminations.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::laminations::{FiniteLamination, Leaf};
use crate::liouville::GeodesicBox;
use crate::mobius::{translation_towards, BoundaryPoint, Geodesic, MobiusMap};

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator derived from `seed` and a stream name.
pub fn substream(seed: u64, name: &str) -> ChaCha8Rng {
    let h = name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(h)))
}

pub fn random_point<R: Rng>(rng: &mut R) -> BoundaryPoint {
    BoundaryPoint::from_angle(TAU * rng.random::<f64>())
}

/// Translation along a uniformly random axis by an exponential length, after a uniform rotation.
pub fn random_isometry<R: Rng>(rng: &mut R, mean_length: f64) -> MobiusMap {
    let p = random_point(rng);
    let q = p.rotated(0.05 + (TAU - 0.1) * rng.random::<f64>());
    let len = Exp::new(1.0 / mean_length).expect("positive mean").sample(rng);
    let rot = MobiusMap::rotation(TAU * rng.random::<f64>());
    if len > 0.0 {
        translation_towards(p, q, len).compose(&rot)
    } else {
        rot
    }
}

/// `n` sorted angles in `[0, 2π)` with cyclic gaps at least `min_gap`.
pub fn spaced_angles<R: Rng>(rng: &mut R, n: usize, min_gap: f64) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| TAU * rng.random::<f64>()).collect();
        v.sort_by(f64::total_cmp);
        let ok = (0..n).all(|k| {
            let next = if k + 1 < n { v[k + 1] } else { v[0] + TAU };
            next - v[k] >= min_gap
        });
        if ok {
            return v;
        }
    }
}

pub fn random_box<R: Rng>(rng: &mut R, min_gap: f64) -> GeodesicBox {
    let v = spaced_angles(rng, 4, min_gap);
    let r = rng.random_range(0..4);
    GeodesicBox::from_angles(v[r], v[(r + 1) % 4], v[(r + 2) % 4], v[(r + 3) % 4]).expect("spaced corners")
}

/// Random non-crossing matching of `2k` spaced points with uniform weights in `[lo, hi]`.
pub fn random_lamination_with<R: Rng>(rng: &mut R, k: usize, lo: f64, hi: f64) -> FiniteLamination {
    if k == 0 {
        return FiniteLamination::empty();
    }
    let pts = spaced_angles(rng, 2 * k, 1e-3);
    let mut stack: Vec<usize> = Vec::new();
    let mut pairs = Vec::with_capacity(k);
    let mut opened = 0;
    for i in 0..2 * k {
        let must_open = stack.is_empty();
        let must_close = opened == k;
        if must_open || (!must_close && rng.random_bool(0.5)) {
            stack.push(i);
            opened += 1;
        } else {
            pairs.push((stack.pop().expect("open leaf"), i));
        }
    }
    let leaves = pairs
        .into_iter()
        .map(|(i, j)| Leaf {
            geodesic: Geodesic::from_angles(pts[i], pts[j]).expect("distinct endpoints"),
            weight: lo + (hi - lo) * rng.random::<f64>(),
        })
        .collect();
    FiniteLamination::new(leaves).expect("balanced matching does not cross")
}

/// Between one and `max_leaves` leaves.
pub fn random_lamination<R: Rng>(rng: &mut R, max_leaves: usize, lo: f64, hi: f64) -> FiniteLamination {
    let k = rng.random_range(1..=max_leaves.max(1));
    random_lamination_with(rng, k, lo, hi)
}

/// Leaves `(xᵢ, yᵢ)` with `xᵢ` increasing in the first arc of `support` and `yᵢ` decreasing in the second.
pub fn random_nested_in_box<R: Rng>(rng: &mut R, support: &GeodesicBox, k: usize, lo: f64, hi: f64) -> FiniteLamination {
    let mut xs: Vec<f64> = (0..k).map(|_| 0.02 + 0.96 * rng.random::<f64>()).collect();
    let mut ys: Vec<f64> = (0..k).map(|_| 0.02 + 0.96 * rng.random::<f64>()).collect();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(|a, b| b.total_cmp(a));
    let leaves = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| Leaf {
            geodesic: Geodesic::new(support.first.at(x), support.second.at(y)).expect("disjoint arcs"),
            weight: lo + (hi - lo) * rng.random::<f64>(),
        })
        .collect();
    FiniteLamination::new(leaves).unwrap_or_else(|_| FiniteLamination::empty())
}

/// Angle in `(0, π)` for half-turn constructions.
pub fn random_half_angle<R: Rng>(rng: &mut R) -> f64 {
    PI * (0.01 + 0.98 * rng.random::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let a: u64 = substream(7, "boxes").random();
        let b: u64 = substream(7, "boxes").random();
        let c: u64 = substream(7, "isometries").random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn random_laminations_are_valid() {
        let mut rng = substream(1, "lam");
        for _ in 0..200 {
            let l = random_lamination(&mut rng, 8, 0.1, 2.0);
            assert!(!l.is_empty() && l.len() <= 8);
        }
    }
}
