//! Geometry of the probability simplex: distribution vectors, the uniform
//! composition lattice used as a finite grid, the Euclidean metric, and
//! nearest-point projection.

use crate::error::{Error, Result};

/// Mass-sum tolerance enforced on construction.
pub const MASS_TOLERANCE: f64 = 1e-9;
/// Strict construction rejects inputs whose normalization moves any component
/// by more than this relative amount.
pub const STRICT_NORMALIZATION_LIMIT: f64 = 1e-6;
/// Default cap on enumerated grid points / action profiles.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// A point on the simplex (finite state case, `cell_width == 1`) or a density
/// histogram on a periodic grid (`cell_width == 1/n`). Components are
/// nonnegative and `sum(weights) * cell_width == 1` up to [`MASS_TOLERANCE`].
///
/// Immutable after construction; shared freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionVector {
    weights: Vec<f64>,
    cell_width: f64,
}

impl DistributionVector {
    /// Build a simplex point from nonnegative weights, normalizing the total
    /// mass to 1. With `strict`, inputs that need a relative correction larger
    /// than [`STRICT_NORMALIZATION_LIMIT`] are rejected instead of silently
    /// renormalized.
    pub fn from_weights(weights: Vec<f64>, strict: bool) -> Result<Self> {
        Self::build(weights, 1.0, strict)
    }

    /// Build a density histogram with the given cell width; the total mass
    /// `sum(values) * cell_width` is normalized to 1.
    pub fn density(values: Vec<f64>, cell_width: f64) -> Result<Self> {
        if cell_width <= 0.0 || !cell_width.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cell_width must be positive and finite, got {cell_width}"
            )));
        }
        Self::build(values, cell_width, false)
    }

    fn build(mut weights: Vec<f64>, cell_width: f64, strict: bool) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::ZeroTotalMass);
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::NegativeMass { index: i, value: w });
            }
        }
        let mass: f64 = weights.iter().sum::<f64>() * cell_width;
        if mass <= 0.0 || !mass.is_finite() {
            return Err(Error::ZeroTotalMass);
        }
        if strict {
            // The correction is uniform across components, so the relative
            // change per component is |1/mass - 1|.
            let relative = (1.0 / mass - 1.0).abs();
            if relative > STRICT_NORMALIZATION_LIMIT {
                return Err(Error::NormalizationTooLarge {
                    index: 0,
                    relative,
                    limit: STRICT_NORMALIZATION_LIMIT,
                });
            }
        }
        if (mass - 1.0).abs() > f64::EPSILON {
            for w in &mut weights {
                *w /= mass;
            }
        }
        Ok(Self {
            weights,
            cell_width,
        })
    }

    /// Internal constructor for values already known to satisfy the
    /// invariants (e.g. simulator outputs with conservative mass handling).
    pub(crate) fn from_normalized(weights: Vec<f64>, cell_width: f64) -> Self {
        debug_assert!(weights.iter().all(|w| *w >= 0.0));
        debug_assert!(
            (weights.iter().sum::<f64>() * cell_width - 1.0).abs() <= MASS_TOLERANCE,
            "mass invariant violated"
        );
        Self {
            weights,
            cell_width,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cell_width(&self) -> f64 {
        self.cell_width
    }

    /// Total mass `sum(weights) * cell_width`; 1 up to tolerance by invariant.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum::<f64>() * self.cell_width
    }
}

/// Euclidean distance between two distribution vectors of equal dimension.
pub fn distance(a: &DistributionVector, b: &DistributionVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(euclidean(a.weights(), b.weights()))
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// The finite grid on the simplex: all points whose components are multiples
/// of `1/resolution`, in lexicographic order. Every point of the simplex is
/// within `sqrt(dim) / (2 * resolution)` of some grid point.
#[derive(Debug, Clone)]
pub struct SimplexGrid {
    dimension: usize,
    resolution: usize,
    points: Vec<DistributionVector>,
}

impl SimplexGrid {
    pub fn enumerate(dimension: usize, resolution: usize) -> Result<Self> {
        Self::enumerate_with_cap(dimension, resolution, DEFAULT_ENUMERATION_CAP)
    }

    pub fn enumerate_with_cap(dimension: usize, resolution: usize, cap: u128) -> Result<Self> {
        if dimension < 1 || resolution < 1 {
            return Err(Error::InvalidParameter(format!(
                "grid needs dimension >= 1 and resolution >= 1, got ({dimension}, {resolution})"
            )));
        }
        let count = compositions(resolution as u128, dimension as u128);
        if count > cap {
            return Err(Error::SizeOverflow { size: count, cap });
        }
        let mut points = Vec::with_capacity(count as usize);
        let mut current = vec![0usize; dimension];
        emit_compositions(resolution, dimension, 0, &mut current, &mut |c| {
            let weights: Vec<f64> = c.iter().map(|&k| k as f64 / resolution as f64).collect();
            points.push(DistributionVector::from_normalized(weights, 1.0));
        });
        Ok(Self {
            dimension,
            resolution,
            points,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, index: usize) -> &DistributionVector {
        &self.points[index]
    }

    pub fn points(&self) -> &[DistributionVector] {
        &self.points
    }

    /// Guaranteed covering radius `sqrt(dim) / (2 * resolution)`.
    pub fn covering_radius(&self) -> f64 {
        (self.dimension as f64).sqrt() / (2.0 * self.resolution as f64)
    }

    /// Index of the nearest grid point in Euclidean distance; ties go to the
    /// lexicographically smaller point, i.e. the smaller index.
    pub fn project(&self, mu: &DistributionVector) -> Result<usize> {
        if mu.dim() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: mu.dim(),
            });
        }
        let mut best = 0usize;
        let mut best_d2 = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d2: f64 = p
                .weights()
                .iter()
                .zip(mu.weights())
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            if d2 < best_d2 {
                best_d2 = d2;
                best = i;
            }
        }
        Ok(best)
    }
}

/// Number of weak compositions of `n` into `k` parts, C(n + k - 1, k - 1).
fn compositions(n: u128, k: u128) -> u128 {
    binomial(n + k - 1, k - 1)
}

fn binomial(n: u128, mut k: u128) -> u128 {
    if k > n {
        return 0;
    }
    if k > n - k {
        k = n - k;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn emit_compositions(
    remaining: usize,
    parts: usize,
    pos: usize,
    current: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]),
) {
    if pos == parts - 1 {
        current[pos] = remaining;
        f(current);
        return;
    }
    for k in 0..=remaining {
        current[pos] = k;
        emit_compositions(remaining - k, parts, pos + 1, current, f);
    }
}

/// The planner's action: one entry per underlying state. Discrete profiles
/// hold action indices, continuous profiles hold one real value per grid cell.
#[derive(Debug, Clone, PartialEq)]
pub enum ActionProfile {
    Discrete(Vec<usize>),
    Continuous(Vec<f64>),
}

impl ActionProfile {
    pub fn len(&self) -> usize {
        match self {
            ActionProfile::Discrete(v) => v.len(),
            ActionProfile::Continuous(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-state action values: discrete indices cast to f64, continuous as is.
    pub fn values(&self) -> Vec<f64> {
        match self {
            ActionProfile::Discrete(v) => v.iter().map(|&a| a as f64).collect(),
            ActionProfile::Continuous(v) => v.clone(),
        }
    }
}

/// All `num_actions^num_states` discrete profiles, ordered as base-`num_actions`
/// counting with state 0 as the most significant digit.
pub fn enumerate_action_profiles(
    num_states: usize,
    num_actions: usize,
) -> Result<Vec<ActionProfile>> {
    enumerate_action_profiles_with_cap(num_states, num_actions, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_action_profiles_with_cap(
    num_states: usize,
    num_actions: usize,
    cap: u128,
) -> Result<Vec<ActionProfile>> {
    if num_states < 1 || num_actions < 1 {
        return Err(Error::InvalidParameter(format!(
            "need num_states >= 1 and num_actions >= 1, got ({num_states}, {num_actions})"
        )));
    }
    let count =
        (num_actions as u128)
            .checked_pow(num_states as u32)
            .ok_or(Error::SizeOverflow {
                size: u128::MAX,
                cap,
            })?;
    if count > cap {
        return Err(Error::SizeOverflow { size: count, cap });
    }
    let mut profiles = Vec::with_capacity(count as usize);
    let mut digits = vec![0usize; num_states];
    loop {
        profiles.push(ActionProfile::Discrete(digits.clone()));
        // increment base-num_actions counter, least significant digit last
        let mut pos = num_states;
        loop {
            if pos == 0 {
                return Ok(profiles);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < num_actions {
                break;
            }
            digits[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn already_normalized_unchanged() {
        let d = DistributionVector::from_weights(vec![0.25, 0.25, 0.25, 0.25], true).unwrap();
        assert_eq!(d.weights(), &[0.25, 0.25, 0.25, 0.25]);
        assert!((d.mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn strict_rejects_large_correction() {
        let err = DistributionVector::from_weights(vec![2.0, 2.0], true).unwrap_err();
        assert!(matches!(err, Error::NormalizationTooLarge { .. }));
        let d = DistributionVector::from_weights(vec![2.0, 2.0], false).unwrap();
        assert_eq!(d.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn negative_mass_rejected() {
        let err = DistributionVector::from_weights(vec![-0.1, 1.1], true).unwrap_err();
        assert!(matches!(err, Error::NegativeMass { index: 0, .. }));
    }

    #[test]
    fn zero_mass_rejected() {
        assert!(matches!(
            DistributionVector::from_weights(vec![0.0, 0.0], false),
            Err(Error::ZeroTotalMass)
        ));
        assert!(matches!(
            DistributionVector::from_weights(vec![], false),
            Err(Error::ZeroTotalMass)
        ));
    }

    #[test]
    fn density_mass_uses_cell_width() {
        let d = DistributionVector::density(vec![1.0; 8], 1.0 / 8.0).unwrap();
        assert!((d.mass() - 1.0).abs() < 1e-15);
        assert!((d.weights()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_2_2_points() {
        let g = SimplexGrid::enumerate(2, 2).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.point(0).weights(), &[0.0, 1.0]);
        assert_eq!(g.point(1).weights(), &[0.5, 0.5]);
        assert_eq!(g.point(2).weights(), &[1.0, 0.0]);
    }

    #[test]
    fn grid_4_1_vertices() {
        let g = SimplexGrid::enumerate(4, 1).unwrap();
        assert_eq!(g.len(), 4);
        for p in g.points() {
            assert_eq!(p.weights().iter().filter(|w| **w == 1.0).count(), 1);
        }
    }

    #[test]
    fn grid_3_10_count() {
        // 66 weak compositions of 10 into 3 parts: brute force the count.
        let mut brute = 0;
        for a in 0..=10 {
            for b in 0..=(10 - a) {
                let _c = 10 - a - b;
                brute += 1;
            }
        }
        assert_eq!(brute, 66);
        assert_eq!(SimplexGrid::enumerate(3, 10).unwrap().len(), 66);
    }

    #[test]
    fn grid_counts_match_binomial() {
        for dim in 1..=5usize {
            for ns in 1..=20usize {
                let g = SimplexGrid::enumerate(dim, ns).unwrap();
                assert_eq!(
                    g.len() as u128,
                    binomial((ns + dim - 1) as u128, (dim - 1) as u128),
                    "dim={dim} ns={ns}"
                );
            }
        }
    }

    #[test]
    fn grid_cap_enforced() {
        let err = SimplexGrid::enumerate_with_cap(3, 10, 10).unwrap_err();
        assert!(matches!(err, Error::SizeOverflow { size: 66, cap: 10 }));
    }

    #[test]
    fn project_prefers_nearest() {
        let g = SimplexGrid::enumerate(2, 2).unwrap();
        let mu = DistributionVector::from_weights(vec![0.3, 0.7], true).unwrap();
        // d to (0.5,0.5) = 0.283 < d to (0,1) = 0.424
        assert_eq!(g.project(&mu).unwrap(), 1);
    }

    #[test]
    fn project_tie_takes_smaller_index() {
        let g = SimplexGrid::enumerate(2, 2).unwrap();
        // equidistant to (0,1) and (0.5,0.5): both sqrt(2*0.0625)
        let mu = DistributionVector::from_weights(vec![0.25, 0.75], true).unwrap();
        assert_eq!(g.project(&mu).unwrap(), 0);
    }

    #[test]
    fn project_grid_point_is_identity() {
        let g = SimplexGrid::enumerate(3, 4).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.project(g.point(i)).unwrap(), i);
        }
    }

    #[test]
    fn project_dimension_mismatch() {
        let g = SimplexGrid::enumerate(2, 2).unwrap();
        let mu = DistributionVector::from_weights(vec![1.0, 1.0, 1.0], false).unwrap();
        assert!(matches!(
            g.project(&mu),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn distance_examples() {
        let a = DistributionVector::from_weights(vec![1.0, 0.0], true).unwrap();
        let b = DistributionVector::from_weights(vec![0.0, 1.0], true).unwrap();
        assert!((distance(&a, &a).unwrap()).abs() < 1e-15);
        assert!((distance(&a, &b).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let c = DistributionVector::from_weights(vec![0.3, 0.7], true).unwrap();
        let d = DistributionVector::from_weights(vec![0.5, 0.5], true).unwrap();
        assert!((distance(&c, &d).unwrap() - 0.08f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn profiles_binary_counting() {
        let ps = enumerate_action_profiles(2, 2).unwrap();
        let expect = [[0, 0], [0, 1], [1, 0], [1, 1]];
        assert_eq!(ps.len(), 4);
        for (p, e) in ps.iter().zip(expect.iter()) {
            assert_eq!(p, &ActionProfile::Discrete(e.to_vec()));
        }
    }

    #[test]
    fn profiles_sizes() {
        assert_eq!(enumerate_action_profiles(1, 3).unwrap().len(), 3);
        assert_eq!(enumerate_action_profiles(4, 2).unwrap().len(), 16);
        assert!(matches!(
            enumerate_action_profiles_with_cap(4, 10, 100),
            Err(Error::SizeOverflow { .. })
        ));
    }

    proptest! {
        // Covering radius guarantee of the lattice.
        #[test]
        fn covering_radius_holds(raw in proptest::collection::vec(0.0f64..1.0, 3), ns in 1usize..12) {
            prop_assume!(raw.iter().sum::<f64>() > 1e-3);
            let mu = DistributionVector::from_weights(raw, false).unwrap();
            let g = SimplexGrid::enumerate(3, ns).unwrap();
            let idx = g.project(&mu).unwrap();
            let d = distance(&mu, g.point(idx)).unwrap();
            prop_assert!(d <= g.covering_radius() + 1e-12);
        }

        // Projection is deterministic.
        #[test]
        fn projection_deterministic(raw in proptest::collection::vec(0.0f64..1.0, 4)) {
            prop_assume!(raw.iter().sum::<f64>() > 1e-3);
            let mu = DistributionVector::from_weights(raw, false).unwrap();
            let g = SimplexGrid::enumerate(4, 5).unwrap();
            prop_assert_eq!(g.project(&mu).unwrap(), g.project(&mu).unwrap());
        }

        // Construction always lands on the simplex.
        #[test]
        fn normalization_invariant(raw in proptest::collection::vec(0.0f64..10.0, 1..6)) {
            prop_assume!(raw.iter().sum::<f64>() > 1e-6);
            let d = DistributionVector::from_weights(raw, false).unwrap();
            prop_assert!((d.mass() - 1.0).abs() <= MASS_TOLERANCE);
            prop_assert!(d.weights().iter().all(|w| *w >= 0.0));
        }
    }
}
