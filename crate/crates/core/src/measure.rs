//! Finite measurable spaces and signed measures on them.
//!
//! The σ-algebra is always the power set of a finite atom set, so a measure
//! is a weight vector and a measurable set is a bitmask. Jordan and Hahn
//! decompositions are pointwise sign splits, the total variation is the sum
//! of absolute weights, and `sup_A |m1(A) - m2(A)|` has the closed form
//! `max(ν⁺(Ω), ν⁻(Ω))` for `ν = m1 - m2`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_finite, invalid, Error, Result};

/// Largest atom count accepted by the subset-enumerating routines.
pub const ENUMERATION_LIMIT: usize = 24;

/// A finite atom set `{0, .., n_atoms - 1}` with the power-set σ-algebra.
///
/// Labels are display metadata only; two spaces are equal when they have the
/// same number of atoms.
#[derive(Clone, Debug)]
pub struct AtomSpace {
    n_atoms: usize,
    labels: Option<Arc<[String]>>,
}

impl AtomSpace {
    pub fn new(n_atoms: usize) -> Result<Self> {
        if n_atoms == 0 {
            return Err(invalid("an atom space needs at least one atom"));
        }
        Ok(AtomSpace {
            n_atoms,
            labels: None,
        })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let mut space = AtomSpace::new(labels.len())?;
        space.labels = Some(labels.into());
        Ok(space)
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn label(&self, atom: usize) -> Option<&str> {
        self.labels
            .as_ref()
            .and_then(|l| l.get(atom))
            .map(String::as_str)
    }

    pub fn full(&self) -> MeasurableSet {
        MeasurableSet::full(self.n_atoms)
    }

    pub fn empty(&self) -> MeasurableSet {
        MeasurableSet::empty(self.n_atoms)
    }

    pub(crate) fn check_same(&self, other: &AtomSpace) -> Result<()> {
        if self.n_atoms != other.n_atoms {
            return Err(Error::SpaceMismatch {
                left: self.n_atoms,
                right: other.n_atoms,
            });
        }
        Ok(())
    }
}

impl PartialEq for AtomSpace {
    fn eq(&self, other: &Self) -> bool {
        self.n_atoms == other.n_atoms
    }
}

impl Eq for AtomSpace {}

/// A subset of the atoms, stored as a bitmask of width `n_atoms`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MeasurableSet {
    n_atoms: usize,
    words: Vec<u64>,
}

impl MeasurableSet {
    pub fn empty(n_atoms: usize) -> Self {
        MeasurableSet {
            n_atoms,
            words: vec![0; n_atoms.div_ceil(64)],
        }
    }

    pub fn full(n_atoms: usize) -> Self {
        let mut set = Self::empty(n_atoms);
        for i in 0..n_atoms {
            set.insert(i);
        }
        set
    }

    pub fn from_indices(n_atoms: usize, indices: &[usize]) -> Result<Self> {
        let mut set = Self::empty(n_atoms);
        for &i in indices {
            if i >= n_atoms {
                return Err(invalid(format!(
                    "atom index {i} out of range for {n_atoms} atoms"
                )));
            }
            set.insert(i);
        }
        Ok(set)
    }

    /// Builds a set from the low `n_atoms` bits of `mask`.
    pub fn from_mask(n_atoms: usize, mask: u64) -> Self {
        assert!(n_atoms <= 64, "from_mask needs n_atoms <= 64");
        let mut set = Self::empty(n_atoms);
        if n_atoms > 0 {
            let keep = if n_atoms == 64 {
                u64::MAX
            } else {
                (1u64 << n_atoms) - 1
            };
            set.words[0] = mask & keep;
        }
        set
    }

    pub fn from_predicate(n_atoms: usize, mut pred: impl FnMut(usize) -> bool) -> Self {
        let mut set = Self::empty(n_atoms);
        for i in 0..n_atoms {
            if pred(i) {
                set.insert(i);
            }
        }
        set
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn insert(&mut self, atom: usize) {
        assert!(atom < self.n_atoms);
        self.words[atom / 64] |= 1 << (atom % 64);
    }

    pub fn remove(&mut self, atom: usize) {
        assert!(atom < self.n_atoms);
        self.words[atom / 64] &= !(1 << (atom % 64));
    }

    pub fn contains(&self, atom: usize) -> bool {
        atom < self.n_atoms && self.words[atom / 64] & (1 << (atom % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_atoms).filter(move |&i| self.contains(i))
    }

    pub fn indices(&self) -> Vec<usize> {
        self.iter().collect()
    }

    fn zip_words(&self, other: &Self, op: impl Fn(u64, u64) -> u64) -> Result<Self> {
        if self.n_atoms != other.n_atoms {
            return Err(Error::SpaceMismatch {
                left: self.n_atoms,
                right: other.n_atoms,
            });
        }
        Ok(MeasurableSet {
            n_atoms: self.n_atoms,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.zip_words(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.zip_words(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.zip_words(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> Self {
        Self::full(self.n_atoms)
            .difference(self)
            .expect("same width")
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }
}

impl fmt::Debug for MeasurableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for MeasurableSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

/// Every subset of an `n_atoms`-atom space, in mask order.
pub fn subsets(n_atoms: usize) -> Result<impl Iterator<Item = MeasurableSet>> {
    if n_atoms > ENUMERATION_LIMIT {
        return Err(Error::TooManyAtoms {
            op: "subset enumeration",
            limit: ENUMERATION_LIMIT,
            got: n_atoms,
        });
    }
    Ok((0u64..1 << n_atoms).map(move |mask| MeasurableSet::from_mask(n_atoms, mask)))
}

/// A finite signed measure: one real weight per atom.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedMeasure {
    space: AtomSpace,
    weights: Vec<f64>,
}

impl SignedMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_finite(&weights)?;
        let space = AtomSpace::new(weights.len())?;
        Ok(SignedMeasure { space, weights })
    }

    pub fn on(space: &AtomSpace, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.n_atoms() {
            return Err(Error::SpaceMismatch {
                left: space.n_atoms(),
                right: weights.len(),
            });
        }
        check_finite(&weights)?;
        Ok(SignedMeasure {
            space: space.clone(),
            weights,
        })
    }

    pub fn zero(space: &AtomSpace) -> Self {
        SignedMeasure {
            space: space.clone(),
            weights: vec![0.0; space.n_atoms()],
        }
    }

    pub fn space(&self) -> &AtomSpace {
        &self.space
    }

    pub fn n_atoms(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> f64 {
        self.weights[atom]
    }

    pub fn is_nonnegative(&self) -> bool {
        self.weights.iter().all(|&w| w >= 0.0)
    }

    /// Errors with the first negative atom, if any.
    pub fn require_nonnegative(&self) -> Result<()> {
        match self.weights.iter().position(|&w| w < 0.0) {
            Some(atom) => Err(Error::NegativeMeasure {
                atom,
                weight: self.weights[atom],
            }),
            None => Ok(()),
        }
    }

    fn check_set(&self, set: &MeasurableSet) -> Result<()> {
        if set.n_atoms() != self.n_atoms() {
            return Err(Error::SpaceMismatch {
                left: self.n_atoms(),
                right: set.n_atoms(),
            });
        }
        Ok(())
    }

    /// `m(A)`.
    pub fn eval(&self, set: &MeasurableSet) -> Result<f64> {
        self.check_set(set)?;
        Ok(set.iter().map(|i| self.weights[i]).sum())
    }

    /// `m(Ω)`.
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `|m|(Ω)`.
    pub fn total_variation(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    pub fn jordan(&self) -> JordanPair {
        let pos = self.map(|w| w.max(0.0));
        let neg = self.map(|w| (-w).max(0.0));
        JordanPair { pos, neg }
    }

    /// Hahn split with zero-weight atoms placed in the positive set.
    pub fn hahn(&self) -> HahnSplit {
        let positive = MeasurableSet::from_predicate(self.n_atoms(), |i| self.weights[i] >= 0.0);
        let negative = positive.complement();
        HahnSplit { positive, negative }
    }

    /// The variation measure `|m|`.
    pub fn abs(&self) -> SignedMeasure {
        self.map(f64::abs)
    }

    pub fn scale(&self, factor: f64) -> SignedMeasure {
        self.map(|w| w * factor)
    }

    pub fn sub(&self, other: &SignedMeasure) -> Result<SignedMeasure> {
        self.zip(other, |a, b| a - b)
    }

    pub fn add(&self, other: &SignedMeasure) -> Result<SignedMeasure> {
        self.zip(other, |a, b| a + b)
    }

    /// `(1 - t) * self + t * other`.
    pub fn lerp(&self, other: &SignedMeasure, t: f64) -> Result<SignedMeasure> {
        self.zip(other, |a, b| (1.0 - t) * a + t * b)
    }

    /// Atomwise `self <= other`.
    pub fn le(&self, other: &SignedMeasure) -> Result<bool> {
        self.space.check_same(&other.space)?;
        Ok(self.weights.iter().zip(&other.weights).all(|(a, b)| a <= b))
    }

    /// Smallest strictly positive weight, if any atom is charged.
    pub fn min_positive_weight(&self) -> Option<f64> {
        self.weights
            .iter()
            .copied()
            .filter(|&w| w > 0.0)
            .min_by(f64::total_cmp)
    }

    pub(crate) fn map(&self, f: impl Fn(f64) -> f64) -> SignedMeasure {
        SignedMeasure {
            space: self.space.clone(),
            weights: self.weights.iter().map(|&w| f(w)).collect(),
        }
    }

    fn zip(&self, other: &SignedMeasure, f: impl Fn(f64, f64) -> f64) -> Result<SignedMeasure> {
        self.space.check_same(&other.space)?;
        Ok(SignedMeasure {
            space: self.space.clone(),
            weights: self
                .weights
                .iter()
                .zip(&other.weights)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    atoms: usize,
    weights: Vec<f64>,
}

impl Serialize for SignedMeasure {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MeasureRepr {
            atoms: self.n_atoms(),
            weights: self.weights.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SignedMeasure {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MeasureRepr::deserialize(deserializer)?;
        if repr.atoms != repr.weights.len() {
            return Err(serde::de::Error::custom(format!(
                "\"atoms\" is {} but {} weights were given",
                repr.atoms,
                repr.weights.len()
            )));
        }
        SignedMeasure::new(repr.weights).map_err(serde::de::Error::custom)
    }
}

/// The positive and negative parts of a signed measure.
#[derive(Clone, Debug, PartialEq)]
pub struct JordanPair {
    pub pos: SignedMeasure,
    pub neg: SignedMeasure,
}

impl JordanPair {
    pub fn reconstruct(&self) -> SignedMeasure {
        self.pos.sub(&self.neg).expect("parts share a space")
    }

    pub fn variation(&self) -> SignedMeasure {
        self.pos.add(&self.neg).expect("parts share a space")
    }
}

/// A Hahn decomposition `Ω = P ∪ N`.
#[derive(Clone, Debug, PartialEq)]
pub struct HahnSplit {
    pub positive: MeasurableSet,
    pub negative: MeasurableSet,
}

/// `|m1 - m2|(Ω)`.
pub fn total_variation_distance(m1: &SignedMeasure, m2: &SignedMeasure) -> Result<f64> {
    m1.space.check_same(&m2.space)?;
    Ok(m1
        .weights
        .iter()
        .zip(&m2.weights)
        .map(|(a, b)| (a - b).abs())
        .sum())
}

/// `sup_A |m1(A) - m2(A)|`, computed as `max(ν⁺(Ω), ν⁻(Ω))` with `ν = m1 - m2`.
pub fn sup_set_gap(m1: &SignedMeasure, m2: &SignedMeasure) -> Result<f64> {
    m1.space.check_same(&m2.space)?;
    let (mut pos, mut neg) = (0.0, 0.0);
    for (a, b) in m1.weights.iter().zip(&m2.weights) {
        let d = a - b;
        if d > 0.0 {
            pos += d;
        } else {
            neg -= d;
        }
    }
    Ok(f64::max(pos, neg))
}

/// The same supremum restricted to the sets of a declared family.
pub fn sup_gap_over<'a>(
    m1: &SignedMeasure,
    m2: &SignedMeasure,
    sets: impl IntoIterator<Item = &'a MeasurableSet>,
) -> Result<f64> {
    let mut best = 0.0f64;
    for set in sets {
        best = best.max((m1.eval(set)? - m2.eval(set)?).abs());
    }
    Ok(best)
}

/// A scalar or `R^d`-valued function on the atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomFunction {
    space: AtomSpace,
    dim: usize,
    values: Vec<f64>,
}

impl AtomFunction {
    pub fn scalar(values: Vec<f64>) -> Result<Self> {
        check_finite(&values)?;
        let space = AtomSpace::new(values.len())?;
        Ok(AtomFunction {
            space,
            dim: 1,
            values,
        })
    }

    pub fn vector(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(invalid("vector atom functions need dimension >= 1"));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        let values: Vec<f64> = rows.iter().flatten().copied().collect();
        check_finite(&values)?;
        Ok(AtomFunction {
            space: AtomSpace::new(rows.len())?,
            dim,
            values,
        })
    }

    /// Row-major values, `dim` per atom.
    pub fn from_flat(space: &AtomSpace, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("vector atom functions need dimension >= 1"));
        }
        if values.len() != dim * space.n_atoms() {
            return Err(Error::DimensionMismatch {
                expected: dim * space.n_atoms(),
                got: values.len(),
            });
        }
        check_finite(&values)?;
        Ok(AtomFunction {
            space: space.clone(),
            dim,
            values,
        })
    }

    pub fn constant(space: &AtomSpace, value: f64) -> Self {
        AtomFunction {
            space: space.clone(),
            dim: 1,
            values: vec![value; space.n_atoms()],
        }
    }

    pub fn space(&self) -> &AtomSpace {
        &self.space
    }

    pub fn n_atoms(&self) -> usize {
        self.space.n_atoms()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_scalar(&self) -> bool {
        self.dim == 1
    }

    pub fn value(&self, atom: usize) -> &[f64] {
        &self.values[atom * self.dim..(atom + 1) * self.dim]
    }

    /// Scalar values; panics on vector functions.
    pub fn scalars(&self) -> &[f64] {
        assert!(self.is_scalar(), "scalars() on a vector function");
        &self.values
    }

    /// Euclidean norm of the value at each atom.
    pub fn norms(&self) -> Vec<f64> {
        (0..self.n_atoms())
            .map(|i| self.value(i).iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.norms().into_iter().fold(0.0, f64::max)
    }

    /// The component `<u, f(t)>`, a scalar function.
    pub fn project(&self, direction: &[f64]) -> Result<AtomFunction> {
        if direction.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: direction.len(),
            });
        }
        let values = (0..self.n_atoms())
            .map(|i| dot(self.value(i), direction))
            .collect();
        Ok(AtomFunction {
            space: self.space.clone(),
            dim: 1,
            values,
        })
    }

    /// Pointwise `|f|` (Euclidean norm for vector functions).
    pub fn abs(&self) -> AtomFunction {
        AtomFunction {
            space: self.space.clone(),
            dim: 1,
            values: self.norms(),
        }
    }

    /// `self + t * other`.
    pub fn axpy(&self, t: f64, other: &AtomFunction) -> Result<AtomFunction> {
        self.space.check_same(&other.space)?;
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(AtomFunction {
            space: self.space.clone(),
            dim: self.dim,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + t * b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &AtomFunction) -> Result<AtomFunction> {
        self.axpy(-1.0, other)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `∫_A f dm`, one component per dimension of `f`.
pub fn integrate(f: &AtomFunction, m: &SignedMeasure, set: &MeasurableSet) -> Result<Vec<f64>> {
    f.space.check_same(&m.space)?;
    m.check_set(set)?;
    let mut acc = vec![0.0; f.dim];
    for i in set.iter() {
        let w = m.weights[i];
        for (a, v) in acc.iter_mut().zip(f.value(i)) {
            *a += v * w;
        }
    }
    Ok(acc)
}

/// `∫_A f dm` for scalar `f`.
pub fn integrate_scalar(f: &AtomFunction, m: &SignedMeasure, set: &MeasurableSet) -> Result<f64> {
    if !f.is_scalar() {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: f.dim,
        });
    }
    Ok(integrate(f, m, set)?[0])
}

/// `∫_A |f| dm`.
pub fn integrate_abs(f: &AtomFunction, m: &SignedMeasure, set: &MeasurableSet) -> Result<f64> {
    integrate_scalar(&f.abs(), m, set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(w: &[f64]) -> SignedMeasure {
        SignedMeasure::new(w.to_vec()).unwrap()
    }

    #[test]
    fn eval_examples() {
        let a = m(&[0.1, 0.2, 0.3]);
        assert!((a.eval(&a.space().full()).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(a.eval(&a.space().empty()).unwrap(), 0.0);
        let b = m(&[1.0, -1.0]);
        assert_eq!(b.eval(&MeasurableSet::full(2)).unwrap(), 0.0);
    }

    #[test]
    fn eval_rejects_foreign_sets() {
        let a = m(&[1.0, 2.0]);
        assert!(matches!(
            a.eval(&MeasurableSet::full(3)),
            Err(Error::SpaceMismatch { .. })
        ));
    }

    #[test]
    fn jordan_examples() {
        let j = m(&[2.0, -3.0]).jordan();
        assert_eq!(j.pos.weights(), &[2.0, 0.0]);
        assert_eq!(j.neg.weights(), &[0.0, 3.0]);
        let z = m(&[0.0, 0.0]).jordan();
        assert_eq!(z.pos.total(), 0.0);
        assert_eq!(z.neg.total(), 0.0);
        assert_eq!(m(&[1.0, -1.0, 0.0]).total_variation(), 2.0);
    }

    #[test]
    fn hahn_examples() {
        let h = m(&[1.0, -1.0, 0.0]).hahn();
        assert_eq!(h.positive.indices(), vec![0, 2]);
        assert_eq!(h.negative.indices(), vec![1]);
        let h = m(&[1.0, 2.0]).hahn();
        assert_eq!(h.positive.len(), 2);
        assert!(h.negative.is_empty());
        let h = m(&[-5.0]).hahn();
        assert!(h.positive.is_empty());
        assert_eq!(h.negative.indices(), vec![0]);
    }

    #[test]
    fn distances() {
        assert_eq!(
            total_variation_distance(&m(&[0.5, 0.5]), &m(&[1.0, 0.0])).unwrap(),
            1.0
        );
        let a = m(&[0.3, -0.7]);
        assert_eq!(total_variation_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(
            total_variation_distance(&m(&[1.0, -1.0]), &m(&[0.0, 0.0])).unwrap(),
            2.0
        );
        let nu = m(&[0.5, -0.2, 0.3]);
        let zero = m(&[0.0; 3]);
        assert!((sup_set_gap(&nu, &zero).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(sup_set_gap(&a, &a).unwrap(), 0.0);
        assert!((sup_set_gap(&m(&[0.25, 0.5]), &m(&[0.0, 0.0])).unwrap() - 0.75).abs() == 0.0);
    }

    #[test]
    fn integrate_examples() {
        let f = AtomFunction::scalar(vec![1.0, 2.0, 3.0]).unwrap();
        let mu = m(&[0.1, 0.2, 0.3]);
        let v = integrate_scalar(&f, &mu, &mu.space().full()).unwrap();
        assert!((v - 1.4).abs() < 1e-12);
        let one = AtomFunction::constant(mu.space(), 1.0);
        let set = MeasurableSet::from_indices(3, &[0, 2]).unwrap();
        assert_eq!(
            integrate_scalar(&one, &mu, &set).unwrap(),
            mu.eval(&set).unwrap()
        );
    }

    #[test]
    fn vector_integral_and_dimension_errors() {
        let f = AtomFunction::vector(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let mu = m(&[0.5, 0.25]);
        assert_eq!(
            integrate(&f, &mu, &MeasurableSet::full(2)).unwrap(),
            vec![0.5, 0.5]
        );
        assert!(integrate_scalar(&f, &mu, &MeasurableSet::full(2)).is_err());
        assert!(AtomFunction::vector(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn measure_json_shape() {
        let a = m(&[0.5, -1.0]);
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"{"atoms":2,"weights":[0.5,-1.0]}"#);
        let back: SignedMeasure = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<SignedMeasure>(r#"{"atoms":3,"weights":[1.0]}"#).is_err());
        let set = MeasurableSet::from_indices(4, &[3, 1]).unwrap();
        assert_eq!(serde_json::to_string(&set).unwrap(), "[1,3]");
    }

    #[test]
    fn enumeration_is_gated() {
        assert_eq!(subsets(3).unwrap().count(), 8);
        assert!(subsets(ENUMERATION_LIMIT + 1).is_err());
    }

    #[test]
    fn wide_sets() {
        let mut s = MeasurableSet::empty(130);
        s.insert(0);
        s.insert(129);
        assert_eq!(s.len(), 2);
        assert_eq!(s.complement().len(), 128);
        assert!(s.contains(129) && !s.contains(64));
    }
}
