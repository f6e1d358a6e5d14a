//! Finite topological spaces in the Alexandrov encoding.
//!
//! A finite space is determined by the minimal open neighbourhood `U_x` of
//! each point. Every predicate on such spaces reduces to set arithmetic on
//! these sets: `S` is open iff `U_x ⊆ S` for all `x ∈ S`, the closure of `S`
//! is `{x : U_x ∩ S ≠ ∅}`, and `f` is continuous iff `f(U_x) ⊆ U_{f(x)}`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::budget::Budget;
use crate::pointset::{PointSet, MAX_POINTS};

/// Index of a point inside its [`FinSpace`].
pub type Point = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("point `{0}` is not in its own minimal open set")]
    NotReflexive(String),
    #[error("minimal open set of `{point}` contains `{via}` but not all of U_{via}")]
    NotTransitive { point: String, via: String },
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("duplicate point `{0}`")]
    DuplicatePoint(String),
    #[error("minimal open table has no entry for `{0}`")]
    MissingEntry(String),
    #[error("spaces with more than {MAX_POINTS} points are not supported (got {0})")]
    TooManyPoints(usize),
    #[error("disjoint union of an empty list")]
    EmptyList,
    #[error("classes do not partition the point set: {0}")]
    NotAPartition(String),
    #[error("budget exceeded: {what} (limit {limit})")]
    BudgetExceeded { what: &'static str, limit: u128 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("map has {got} entries but the domain has {expected} points")]
    Arity { expected: usize, got: usize },
    #[error("image {image} of point {point} is outside the codomain")]
    OutOfRange { point: Point, image: Point },
    #[error("not continuous at `{0}`: f(U_x) is not inside U_f(x)")]
    NotContinuous(String),
    #[error("maps do not compose: codomain and domain differ")]
    Mismatch,
}

struct SpaceData {
    name: String,
    labels: Vec<String>,
    minopen: Vec<PointSet>,
    /// `up[x] = {y : x ∈ U_y}`, the closure of `{x}`.
    up: Vec<PointSet>,
    opens: OnceLock<Result<Arc<Vec<PointSet>>, TopologyError>>,
    connected_opens: OnceLock<Result<Arc<Vec<PointSet>>, TopologyError>>,
}

/// A finite topological space. Cheap to clone.
#[derive(Clone)]
pub struct FinSpace(Arc<SpaceData>);

impl PartialEq for FinSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.labels == other.0.labels && self.0.minopen == other.0.minopen)
    }
}

impl Eq for FinSpace {}

impl fmt::Debug for FinSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for x in 0..self.len() {
            m.entry(&self.label(x), &self.set_labels(self.minopen(x)));
        }
        m.finish()
    }
}

impl FinSpace {
    /// Validates a minimal-open table indexed by point.
    pub fn new(
        name: impl Into<String>,
        labels: Vec<String>,
        minopen: Vec<PointSet>,
    ) -> Result<Self, TopologyError> {
        let n = labels.len();
        if n > MAX_POINTS {
            return Err(TopologyError::TooManyPoints(n));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(TopologyError::DuplicatePoint(l.clone()));
            }
        }
        if minopen.len() != n {
            return Err(TopologyError::MissingEntry(
                labels.get(minopen.len()).cloned().unwrap_or_default(),
            ));
        }
        let full = PointSet::full(n);
        for (x, &u) in minopen.iter().enumerate() {
            if !u.is_subset(full) {
                let bad = u.minus(full).first().unwrap_or(0);
                return Err(TopologyError::UnknownPoint(format!("#{bad}")));
            }
            if !u.contains(x) {
                return Err(TopologyError::NotReflexive(labels[x].clone()));
            }
        }
        for x in 0..n {
            for y in minopen[x] {
                if !minopen[y].is_subset(minopen[x]) {
                    return Err(TopologyError::NotTransitive {
                        point: labels[x].clone(),
                        via: labels[y].clone(),
                    });
                }
            }
        }
        let mut up = vec![PointSet::EMPTY; n];
        for (y, &u) in minopen.iter().enumerate() {
            for x in u {
                up[x].insert(y);
            }
        }
        Ok(FinSpace(Arc::new(SpaceData {
            name: name.into(),
            labels,
            minopen,
            up,
            opens: OnceLock::new(),
            connected_opens: OnceLock::new(),
        })))
    }

    /// Builds a space from `(point, minimal open set)` rows given by label.
    /// Point order follows the row order.
    pub fn from_table<S: AsRef<str>>(
        name: impl Into<String>,
        rows: &[(S, Vec<S>)],
    ) -> Result<Self, TopologyError> {
        let labels: Vec<String> = rows.iter().map(|(p, _)| p.as_ref().to_string()).collect();
        let index: HashMap<&str, usize> =
            labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let mut minopen = Vec::with_capacity(rows.len());
        for (_, members) in rows {
            let mut u = PointSet::EMPTY;
            for m in members {
                let i = *index
                    .get(m.as_ref())
                    .ok_or_else(|| TopologyError::UnknownPoint(m.as_ref().to_string()))?;
                u.insert(i);
            }
            minopen.push(u);
        }
        FinSpace::new(name, labels, minopen)
    }

    /// Converts an arbitrary family of open sets into the topology it generates.
    pub fn from_open_family(
        name: impl Into<String>,
        labels: Vec<String>,
        opens: &[PointSet],
    ) -> Result<Self, TopologyError> {
        let n = labels.len();
        if n > MAX_POINTS {
            return Err(TopologyError::TooManyPoints(n));
        }
        let full = PointSet::full(n);
        let minopen = (0..n)
            .map(|x| {
                opens
                    .iter()
                    .filter(|o| o.contains(x))
                    .fold(full, |acc, &o| acc.inter(o))
            })
            .collect();
        FinSpace::new(name, labels, minopen)
    }

    /// Space with labels `0..n` and the given minimal opens.
    pub fn from_minopens(
        name: impl Into<String>,
        minopen: Vec<PointSet>,
    ) -> Result<Self, TopologyError> {
        let labels = (0..minopen.len()).map(|i| i.to_string()).collect();
        FinSpace::new(name, labels, minopen)
    }

    pub fn empty() -> Self {
        FinSpace::new("empty", vec![], vec![]).expect("empty space")
    }

    pub fn point() -> Self {
        FinSpace::from_minopens("point", vec![PointSet::singleton(0)]).expect("point")
    }

    pub fn discrete(n: usize) -> Self {
        FinSpace::from_minopens(format!("discrete{n}"), (0..n).map(PointSet::singleton).collect())
            .expect("discrete space")
    }

    pub fn indiscrete(n: usize) -> Self {
        FinSpace::from_minopens(format!("indiscrete{n}"), vec![PointSet::full(n); n])
            .expect("indiscrete space")
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    /// Same topology under a different name.
    pub fn renamed(&self, name: impl Into<String>) -> FinSpace {
        FinSpace::new(name, self.0.labels.clone(), self.0.minopen.clone()).expect("valid space")
    }

    pub fn len(&self) -> usize {
        self.0.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.labels.is_empty()
    }

    pub fn full(&self) -> PointSet {
        PointSet::full(self.len())
    }

    pub fn labels(&self) -> &[String] {
        &self.0.labels
    }

    pub fn label(&self, x: Point) -> &str {
        &self.0.labels[x]
    }

    pub fn index_of(&self, label: &str) -> Option<Point> {
        self.0.labels.iter().position(|l| l == label)
    }

    pub fn set_of(&self, labels: &[&str]) -> Result<PointSet, TopologyError> {
        labels
            .iter()
            .map(|l| {
                self.index_of(l)
                    .ok_or_else(|| TopologyError::UnknownPoint(l.to_string()))
            })
            .collect()
    }

    pub fn set_labels(&self, s: PointSet) -> Vec<&str> {
        s.iter().map(|x| self.label(x)).collect()
    }

    /// `{a,b,c}` rendering used in reports.
    pub fn fmt_set(&self, s: PointSet) -> String {
        format!("{{{}}}", self.set_labels(s).join(","))
    }

    #[inline]
    pub fn minopen(&self, x: Point) -> PointSet {
        self.0.minopen[x]
    }

    pub fn minopens(&self) -> &[PointSet] {
        &self.0.minopen
    }

    /// Closure of the single point `x`: every `y` with `x ∈ U_y`.
    #[inline]
    pub fn up(&self, x: Point) -> PointSet {
        self.0.up[x]
    }

    pub fn check_set(&self, s: PointSet) -> Result<PointSet, TopologyError> {
        if s.is_subset(self.full()) {
            Ok(s)
        } else {
            let bad = s.minus(self.full()).first().unwrap_or(0);
            Err(TopologyError::UnknownPoint(format!("#{bad}")))
        }
    }

    /// Smallest open set containing `s`.
    pub fn open_hull(&self, s: PointSet) -> PointSet {
        s.iter().fold(PointSet::EMPTY, |acc, x| acc.union(self.minopen(x)))
    }

    pub fn is_open_set(&self, s: PointSet) -> bool {
        s.iter().all(|x| self.minopen(x).is_subset(s))
    }

    pub fn closure_of(&self, s: PointSet) -> PointSet {
        s.iter().fold(PointSet::EMPTY, |acc, x| acc.union(self.up(x)))
    }

    pub fn is_closed_set(&self, s: PointSet) -> bool {
        self.closure_of(s) == s
    }

    /// Closure of `s` relative to the subspace `within`.
    pub fn closure_within(&self, within: PointSet, s: PointSet) -> PointSet {
        self.closure_of(s).inter(within)
    }

    pub fn is_closed_within(&self, within: PointSet, s: PointSet) -> bool {
        s.is_subset(within) && self.closure_within(within, s) == s
    }

    pub fn interior_of(&self, s: PointSet) -> PointSet {
        s.iter().filter(|&x| self.minopen(x).is_subset(s)).collect()
    }

    /// Connected components of the subspace `s`, ordered by least point.
    pub fn components_of(&self, s: PointSet) -> Vec<PointSet> {
        let mut rest = s;
        let mut out = Vec::new();
        while let Some(x) = rest.first() {
            let comp = self.component_containing(s, x);
            rest = rest.minus(comp);
            out.push(comp);
        }
        out
    }

    /// Component of `x` in the subspace `s` (`x` must lie in `s`).
    pub fn component_containing(&self, s: PointSet, x: Point) -> PointSet {
        let mut comp = PointSet::singleton(x);
        let mut frontier = comp;
        while !frontier.is_empty() {
            let mut next = PointSet::EMPTY;
            for z in frontier {
                next = next.union(self.minopen(z)).union(self.up(z));
            }
            next = next.inter(s).minus(comp);
            comp = comp.union(next);
            frontier = next;
        }
        comp
    }

    /// True iff `s` is non-empty and connected.
    pub fn is_connected_set(&self, s: PointSet) -> bool {
        match s.first() {
            None => false,
            Some(x) => self.component_containing(s, x) == s,
        }
    }

    pub fn is_connected(&self) -> bool {
        self.is_connected_set(self.full())
    }

    /// Finite Hausdorff spaces are exactly the discrete ones.
    pub fn is_discrete(&self) -> bool {
        (0..self.len()).all(|x| self.minopen(x) == PointSet::singleton(x))
    }

    /// Closure of `s` as a checked operation.
    pub fn closure(&self, s: PointSet) -> Result<PointSet, TopologyError> {
        Ok(self.closure_of(self.check_set(s)?))
    }

    /// Components of the subspace `s` as a checked operation.
    pub fn components(&self, s: PointSet) -> Result<Vec<PointSet>, TopologyError> {
        Ok(self.components_of(self.check_set(s)?))
    }

    /// Subspace on `s`, with points kept in their original order.
    pub fn subspace(&self, s: PointSet) -> Result<FinSpace, TopologyError> {
        Ok(self.subspace_with_inclusion(s)?.0)
    }

    /// Subspace on `s` together with its inclusion map.
    pub fn subspace_with_inclusion(
        &self,
        s: PointSet,
    ) -> Result<(FinSpace, ContinuousMap), TopologyError> {
        let s = self.check_set(s)?;
        let members: Vec<Point> = s.iter().collect();
        let pos: HashMap<Point, usize> = members.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let labels = members.iter().map(|&p| self.label(p).to_string()).collect();
        let minopen = members
            .iter()
            .map(|&p| self.minopen(p).inter(s).iter().map(|q| pos[&q]).collect())
            .collect();
        let sub = FinSpace::new(format!("{}|sub", self.name()), labels, minopen)?;
        let inc = ContinuousMap::new(sub.clone(), self.clone(), members)
            .expect("subspace inclusion is continuous");
        Ok((sub, inc))
    }

    /// All open sets, sorted by bit pattern. Memoized.
    pub fn opens(&self) -> Result<Arc<Vec<PointSet>>, TopologyError> {
        self.opens_with(&Budget::DEFAULT)
    }

    pub fn opens_with(&self, budget: &Budget) -> Result<Arc<Vec<PointSet>>, TopologyError> {
        self.0
            .opens
            .get_or_init(|| self.enumerate_opens(budget.max_opens).map(Arc::new))
            .clone()
    }

    fn enumerate_opens(&self, limit: usize) -> Result<Vec<PointSet>, TopologyError> {
        let mut seen: HashSet<PointSet> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(PointSet::EMPTY);
        queue.push_back(PointSet::EMPTY);
        while let Some(s) = queue.pop_front() {
            for x in self.full().minus(s) {
                let t = s.union(self.minopen(x));
                if seen.insert(t) {
                    if seen.len() > limit {
                        return Err(TopologyError::BudgetExceeded {
                            what: "open sets",
                            limit: limit as u128,
                        });
                    }
                    queue.push_back(t);
                }
            }
        }
        let mut v: Vec<_> = seen.into_iter().collect();
        v.sort();
        Ok(v)
    }

    /// Non-empty connected open sets, sorted. Memoized.
    pub fn connected_opens(&self) -> Result<Arc<Vec<PointSet>>, TopologyError> {
        self.0
            .connected_opens
            .get_or_init(|| {
                let opens = self.opens()?;
                Ok(Arc::new(
                    opens
                        .iter()
                        .copied()
                        .filter(|&o| self.is_connected_set(o))
                        .collect(),
                ))
            })
            .clone()
    }

    /// Open sets contained in `within`.
    pub fn opens_within(&self, within: PointSet) -> Result<Vec<PointSet>, TopologyError> {
        Ok(self
            .opens()?
            .iter()
            .copied()
            .filter(|o| o.is_subset(within))
            .collect())
    }

    /// Product topology with `U_(a,b) = U_a × U_b`; points in row-major order.
    pub fn product(&self, other: &FinSpace) -> Result<FinSpace, TopologyError> {
        let (n, m) = (self.len(), other.len());
        if n * m > MAX_POINTS {
            return Err(TopologyError::TooManyPoints(n * m));
        }
        let mut labels = Vec::with_capacity(n * m);
        let mut minopen = Vec::with_capacity(n * m);
        for a in 0..n {
            for b in 0..m {
                labels.push(format!("({},{})", self.label(a), other.label(b)));
                let mut u = PointSet::EMPTY;
                for a2 in self.minopen(a) {
                    for b2 in other.minopen(b) {
                        u.insert(a2 * m + b2);
                    }
                }
                minopen.push(u);
            }
        }
        FinSpace::new(format!("{}x{}", self.name(), other.name()), labels, minopen)
    }

    /// Index of `(a, b)` in `self.product(other)`.
    pub fn product_index(&self, other: &FinSpace, a: Point, b: Point) -> Point {
        let _ = self;
        a * other.len() + b
    }
}

/// A continuous map between finite spaces.
#[derive(Clone, PartialEq, Eq)]
pub struct ContinuousMap {
    dom: FinSpace,
    cod: FinSpace,
    images: Vec<Point>,
}

impl fmt::Debug for ContinuousMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (x, &y) in self.images.iter().enumerate() {
            m.entry(&self.dom.label(x), &self.cod.label(y));
        }
        m.finish()
    }
}

/// Checks the Alexandrov continuity criterion; on failure returns a point `x`
/// with `f(U_x) ⊄ U_{f(x)}`.
pub fn is_continuous(dom: &FinSpace, cod: &FinSpace, images: &[Point]) -> Result<(), Point> {
    for x in 0..dom.len() {
        let target = cod.minopen(images[x]);
        if !dom.minopen(x).iter().all(|y| target.contains(images[y])) {
            return Err(x);
        }
    }
    Ok(())
}

impl ContinuousMap {
    pub fn new(dom: FinSpace, cod: FinSpace, images: Vec<Point>) -> Result<Self, MapError> {
        if images.len() != dom.len() {
            return Err(MapError::Arity {
                expected: dom.len(),
                got: images.len(),
            });
        }
        if let Some((x, &y)) = images.iter().enumerate().find(|(_, &y)| y >= cod.len()) {
            return Err(MapError::OutOfRange { point: x, image: y });
        }
        is_continuous(&dom, &cod, &images)
            .map_err(|x| MapError::NotContinuous(dom.label(x).to_string()))?;
        Ok(ContinuousMap { dom, cod, images })
    }

    pub(crate) fn new_unchecked(dom: FinSpace, cod: FinSpace, images: Vec<Point>) -> Self {
        debug_assert!(is_continuous(&dom, &cod, &images).is_ok());
        ContinuousMap { dom, cod, images }
    }

    pub fn identity(space: &FinSpace) -> Self {
        ContinuousMap::new_unchecked(space.clone(), space.clone(), (0..space.len()).collect())
    }

    pub fn constant(dom: &FinSpace, cod: &FinSpace, y: Point) -> Self {
        ContinuousMap::new_unchecked(dom.clone(), cod.clone(), vec![y; dom.len()])
    }

    /// Builds a map from `(source label, target label)` pairs.
    pub fn from_pairs(
        dom: &FinSpace,
        cod: &FinSpace,
        pairs: &[(&str, &str)],
    ) -> Result<Self, MapBuildError> {
        let mut images = vec![None; dom.len()];
        for (a, b) in pairs {
            let x = dom
                .index_of(a)
                .ok_or_else(|| MapBuildError::UnknownPoint(a.to_string()))?;
            let y = cod
                .index_of(b)
                .ok_or_else(|| MapBuildError::UnknownPoint(b.to_string()))?;
            images[x] = Some(y);
        }
        let images = images
            .into_iter()
            .enumerate()
            .map(|(x, y)| y.ok_or_else(|| MapBuildError::NotTotal(dom.label(x).to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ContinuousMap::new(dom.clone(), cod.clone(), images)?)
    }

    pub fn dom(&self) -> &FinSpace {
        &self.dom
    }

    pub fn cod(&self) -> &FinSpace {
        &self.cod
    }

    pub fn images(&self) -> &[Point] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, x: Point) -> Point {
        self.images[x]
    }

    pub fn image(&self, s: PointSet) -> PointSet {
        s.iter().map(|x| self.images[x]).collect()
    }

    pub fn image_all(&self) -> PointSet {
        self.image(self.dom.full())
    }

    pub fn preimage(&self, s: PointSet) -> PointSet {
        self.images
            .iter()
            .enumerate()
            .filter(|(_, &y)| s.contains(y))
            .map(|(x, _)| x)
            .collect()
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &ContinuousMap) -> Result<ContinuousMap, MapError> {
        if inner.cod != self.dom {
            return Err(MapError::Mismatch);
        }
        Ok(ContinuousMap::new_unchecked(
            inner.dom.clone(),
            self.cod.clone(),
            inner.images.iter().map(|&y| self.images[y]).collect(),
        ))
    }

    /// Restriction to the subspace `s` of the domain.
    pub fn restrict(&self, s: PointSet) -> Result<ContinuousMap, TopologyError> {
        let (_, inc) = self.dom.subspace_with_inclusion(s)?;
        Ok(self.after(&inc).expect("inclusion lands in the domain"))
    }

    /// Same point function, viewed with a different (equal) codomain object.
    pub fn with_cod(&self, cod: &FinSpace) -> Result<ContinuousMap, MapError> {
        ContinuousMap::new(self.dom.clone(), cod.clone(), self.images.clone())
    }

    pub fn is_injective(&self) -> bool {
        self.image_all().len() == self.dom.len()
    }

    pub fn is_surjective(&self) -> bool {
        self.image_all() == self.cod.full()
    }

    /// Open in the usual sense: images of minimal opens are open.
    pub fn is_open_map(&self) -> bool {
        (0..self.dom.len()).all(|x| self.cod.is_open_set(self.image(self.dom.minopen(x))))
    }

    /// Point-to-point rendering used in reports, `a->b` pairs.
    pub fn describe(&self) -> String {
        self.images
            .iter()
            .enumerate()
            .map(|(x, &y)| format!("{}->{}", self.dom.label(x), self.cod.label(y)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapBuildError {
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("map is not defined at `{0}`")]
    NotTotal(String),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Disjoint union with its canonical open embeddings.
#[derive(Clone, Debug)]
pub struct DisjointUnion {
    pub space: FinSpace,
    pub parts: Vec<FinSpace>,
    pub injections: Vec<ContinuousMap>,
}

impl DisjointUnion {
    /// Point of the union coming from `x` in part `j`.
    pub fn tagged(&self, j: usize, x: Point) -> Point {
        self.injections[j].apply(x)
    }

    /// `(part, point)` for a point of the union.
    pub fn untag(&self, p: Point) -> (usize, Point) {
        for (j, inj) in self.injections.iter().enumerate() {
            if let Some(x) = inj.images().iter().position(|&q| q == p) {
                return (j, x);
            }
        }
        unreachable!("every point of a disjoint union lies in one part")
    }
}

/// Tagged union `⊔ parts`; point `x` of part `j` is labelled `x@j`.
pub fn disjoint_union(parts: &[FinSpace]) -> Result<DisjointUnion, TopologyError> {
    let tags: Vec<String> = (0..parts.len()).map(|j| j.to_string()).collect();
    disjoint_union_tagged(parts, &tags)
}

pub fn disjoint_union_tagged(
    parts: &[FinSpace],
    tags: &[String],
) -> Result<DisjointUnion, TopologyError> {
    if parts.is_empty() {
        return Err(TopologyError::EmptyList);
    }
    let total: usize = parts.iter().map(FinSpace::len).sum();
    if total > MAX_POINTS {
        return Err(TopologyError::TooManyPoints(total));
    }
    let mut labels = Vec::with_capacity(total);
    let mut minopen = Vec::with_capacity(total);
    let mut offsets = Vec::with_capacity(parts.len());
    let mut off = 0;
    for (part, tag) in parts.iter().zip(tags) {
        offsets.push(off);
        for x in 0..part.len() {
            labels.push(format!("{}@{}", part.label(x), tag));
            minopen.push(part.minopen(x).iter().map(|y| y + off).collect());
        }
        off += part.len();
    }
    let name = parts.iter().map(|p| p.name()).collect::<Vec<_>>().join("+");
    let space = FinSpace::new(name, labels, minopen)?;
    let injections = parts
        .iter()
        .zip(&offsets)
        .map(|(p, &o)| {
            ContinuousMap::new_unchecked(p.clone(), space.clone(), (o..o + p.len()).collect())
        })
        .collect();
    Ok(DisjointUnion {
        space,
        parts: parts.to_vec(),
        injections,
    })
}

/// Quotient by a partition, with its projection.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub space: FinSpace,
    pub projection: ContinuousMap,
    pub classes: Vec<PointSet>,
}

/// Finest topology making the projection continuous. Classes are ordered by
/// their least point; class `[a|b]` is labelled by its members.
pub fn quotient_space(space: &FinSpace, partition: &[PointSet]) -> Result<Quotient, TopologyError> {
    let mut classes: Vec<PointSet> = partition.iter().copied().filter(|c| !c.is_empty()).collect();
    let mut covered = PointSet::EMPTY;
    for c in &classes {
        space.check_set(*c)?;
        if covered.meets(*c) {
            return Err(TopologyError::NotAPartition(format!(
                "class {} overlaps an earlier class",
                space.fmt_set(*c)
            )));
        }
        covered = covered.union(*c);
    }
    if covered != space.full() {
        return Err(TopologyError::NotAPartition(format!(
            "points {} are not covered",
            space.fmt_set(space.full().minus(covered))
        )));
    }
    classes.sort_by_key(|c| c.first());
    let mut class_of = vec![0usize; space.len()];
    for (i, c) in classes.iter().enumerate() {
        for x in *c {
            class_of[x] = i;
        }
    }
    let saturate = |s: PointSet| -> PointSet {
        s.iter()
            .fold(PointSet::EMPTY, |acc, x| acc.union(classes[class_of[x]]))
    };
    // smallest saturated open superset of each class
    let minopen = classes
        .iter()
        .map(|&c| {
            let mut s = c;
            loop {
                let t = saturate(space.open_hull(s));
                if t == s {
                    break;
                }
                s = t;
            }
            s.iter().map(|x| class_of[x]).collect()
        })
        .collect();
    let labels = classes
        .iter()
        .map(|c| format!("[{}]", space.set_labels(*c).join("|")))
        .collect();
    let q = FinSpace::new(format!("{}/~", space.name()), labels, minopen)?;
    let projection = ContinuousMap::new_unchecked(space.clone(), q.clone(), class_of);
    Ok(Quotient {
        space: q,
        projection,
        classes,
    })
}

/// All total functions `X → Y` satisfying `keep`, in lexicographic order of
/// the image vector. Fails when `|Y|^|X|` exceeds the candidate budget.
pub fn enumerate_maps<F>(
    x: &FinSpace,
    y: &FinSpace,
    budget: &Budget,
    mut keep: F,
) -> Result<Vec<Vec<Point>>, TopologyError>
where
    F: FnMut(&[Point]) -> bool,
{
    let (n, m) = (x.len(), y.len());
    let mut total: u128 = 1;
    for _ in 0..n {
        total = total.saturating_mul(m as u128);
        if total > budget.max_candidates {
            return Err(TopologyError::BudgetExceeded {
                what: "candidate maps",
                limit: budget.max_candidates,
            });
        }
    }
    let mut out = Vec::new();
    if n > 0 && m == 0 {
        return Ok(out);
    }
    let mut cur = vec![0usize; n];
    loop {
        if keep(&cur) {
            out.push(cur.clone());
        }
        // odometer, last coordinate fastest
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < m {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// Continuous maps `X → Y` in the same order as [`enumerate_maps`], found by
/// backtracking with continuity pruning.
pub fn continuous_maps(
    x: &FinSpace,
    y: &FinSpace,
    budget: &Budget,
) -> Result<Vec<ContinuousMap>, TopologyError> {
    let mut out = Vec::new();
    for_each_continuous_map(x, y, budget, |imgs| {
        out.push(ContinuousMap::new_unchecked(x.clone(), y.clone(), imgs.to_vec()));
        true
    })?;
    Ok(out)
}

/// Streams continuous maps to `visit` until it returns `false`.
pub fn for_each_continuous_map<F>(
    x: &FinSpace,
    y: &FinSpace,
    budget: &Budget,
    mut visit: F,
) -> Result<(), TopologyError>
where
    F: FnMut(&[Point]) -> bool,
{
    let n = x.len();
    let m = y.len();
    if n > 0 && m == 0 {
        return Ok(());
    }
    let mut cur = vec![0usize; n];
    let mut count = 0usize;
    // constraint between i and an earlier j: j ∈ U_i ⇒ f(j) ∈ U_f(i); i ∈ U_j ⇒ f(i) ∈ U_f(j)
    fn consistent(x: &FinSpace, y: &FinSpace, cur: &[Point], i: usize) -> bool {
        let fi = cur[i];
        for j in 0..i {
            let fj = cur[j];
            if x.minopen(i).contains(j) && !y.minopen(fi).contains(fj) {
                return false;
            }
            if x.minopen(j).contains(i) && !y.minopen(fj).contains(fi) {
                return false;
            }
        }
        true
    }
    fn rec<F: FnMut(&[Point]) -> bool>(
        x: &FinSpace,
        y: &FinSpace,
        cur: &mut Vec<Point>,
        i: usize,
        count: &mut usize,
        limit: usize,
        visit: &mut F,
    ) -> Result<bool, TopologyError> {
        if i == cur.len() {
            *count += 1;
            if *count > limit {
                return Err(TopologyError::BudgetExceeded {
                    what: "continuous maps",
                    limit: limit as u128,
                });
            }
            return Ok(visit(cur));
        }
        for v in 0..y.len() {
            cur[i] = v;
            if consistent(x, y, cur, i) && !rec(x, y, cur, i + 1, count, limit, visit)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
    rec(x, y, &mut cur, 0, &mut count, budget.max_maps, &mut visit)?;
    Ok(())
}

/// A homeomorphism `a → b` as a point permutation, if one exists.
pub fn find_homeomorphism(a: &FinSpace, b: &FinSpace) -> Option<Vec<Point>> {
    let n = a.len();
    if n != b.len() {
        return None;
    }
    let sig = |s: &FinSpace, x: Point| (s.minopen(x).len(), s.up(x).len());
    let mut sa: Vec<_> = (0..n).map(|x| sig(a, x)).collect();
    let mut sb: Vec<_> = (0..n).map(|x| sig(b, x)).collect();
    let (ca, cb) = (sa.clone(), sb.clone());
    sa.sort();
    sb.sort();
    if sa != sb {
        return None;
    }
    // assign the most constrained points first
    let mut order: Vec<Point> = (0..n).collect();
    order.sort_by_key(|&x| {
        let s = ca[x];
        (ca.iter().filter(|&&t| t == s).count(), x)
    });
    let mut phi = vec![usize::MAX; n];
    let mut used = PointSet::EMPTY;
    fn rec(
        a: &FinSpace,
        b: &FinSpace,
        order: &[Point],
        k: usize,
        phi: &mut Vec<Point>,
        used: &mut PointSet,
        ca: &[(usize, usize)],
        cb: &[(usize, usize)],
    ) -> bool {
        if k == order.len() {
            return true;
        }
        let x = order[k];
        for y in 0..b.len() {
            if used.contains(y) || ca[x] != cb[y] {
                continue;
            }
            let ok = order[..k].iter().all(|&x2| {
                let y2 = phi[x2];
                a.minopen(x).contains(x2) == b.minopen(y).contains(y2)
                    && a.minopen(x2).contains(x) == b.minopen(y2).contains(y)
            });
            if !ok {
                continue;
            }
            phi[x] = y;
            used.insert(y);
            if rec(a, b, order, k + 1, phi, used, ca, cb) {
                return true;
            }
            used.remove(y);
            phi[x] = usize::MAX;
        }
        false
    }
    if rec(a, b, &order, 0, &mut phi, &mut used, &ca, &cb) {
        Some(phi)
    } else {
        None
    }
}

pub fn is_homeomorphic(a: &FinSpace, b: &FinSpace) -> bool {
    find_homeomorphism(a, b).is_some()
}

/// Every topology on exactly `n` points up to homeomorphism, in canonical
/// order. Points are labelled `0..n`.
pub fn probe_catalog(n: usize, budget: &Budget) -> Result<Vec<FinSpace>, TopologyError> {
    if n > budget.probe_cap {
        return Err(TopologyError::BudgetExceeded {
            what: "probe catalog size",
            limit: budget.probe_cap as u128,
        });
    }
    if n == 0 {
        return Ok(vec![FinSpace::empty().renamed("probe0_0")]);
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let perms = permutations(n);
    let mut codes: Vec<u64> = Vec::new();
    let mut seen = HashSet::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        // rel[j] = U_j as a bit pattern over 0..n
        let mut rel = vec![0u32; n];
        for (j, r) in rel.iter_mut().enumerate() {
            *r = 1 << j;
        }
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if mask >> k & 1 == 1 {
                rel[j] |= 1 << i;
            }
        }
        let transitive = (0..n).all(|j| {
            (0..n)
                .filter(|&i| rel[j] >> i & 1 == 1)
                .all(|i| rel[i] & !rel[j] == 0)
        });
        if !transitive {
            continue;
        }
        let code = perms
            .iter()
            .map(|p| encode_relation(&rel, p))
            .min()
            .expect("at least one permutation");
        if seen.insert(code) {
            codes.push(code);
        }
    }
    codes.sort_unstable();
    Ok(codes
        .into_iter()
        .enumerate()
        .map(|(k, code)| {
            let minopen = (0..n)
                .map(|j| {
                    (0..n)
                        .filter(|&i| i == j || code >> (i * n + j) & 1 == 1)
                        .collect()
                })
                .collect();
            FinSpace::from_minopens(format!("probe{n}_{k}"), minopen).expect("preorder")
        })
        .collect())
}

/// Connected and disconnected probes on `1..=max_size` points.
pub fn probes_up_to(max_size: usize, budget: &Budget) -> Result<Vec<FinSpace>, TopologyError> {
    let mut out = Vec::new();
    for n in 1..=max_size {
        out.extend(probe_catalog(n, budget)?);
    }
    Ok(out)
}

fn encode_relation(rel: &[u32], perm: &[usize]) -> u64 {
    let n = rel.len();
    let mut code = 0u64;
    for j in 0..n {
        for i in 0..n {
            if i != j && rel[j] >> i & 1 == 1 {
                code |= 1 << (perm[i] * n + perm[j]);
            }
        }
    }
    code
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            if k % 2 == 0 {
                cur.swap(i, k - 1);
            } else {
                cur.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut cur, &mut out);
    out
}
