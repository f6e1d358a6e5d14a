//! Diffuse maps, open embeddings, covers and pullbacks along embeddings.
//!
//! A continuous map is diffuse when it pulls every negligible element of the
//! codomain back to a negligible element of the domain. Negligibility of a
//! pullback `(f⁻¹U, f⁻¹I)` is decided at the minimal opens of the domain, and
//! each such minimal open maps into some `U_y`, so it is enough to test the
//! largest negligible subset of every `U_y`.

use thiserror::Error;

use crate::budget::Budget;
use crate::fintop::{continuous_maps, ContinuousMap, FinSpace, Point, TopologyError};
use crate::negligible::{
    closed_subsets_within, is_negligible_element, is_negligible_local, max_negligible,
    SubsetElement,
};
use crate::pointset::PointSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("map is not diffuse: {0}")]
    NotDiffuse(String),
    #[error("map is not an open embedding")]
    NotEmbedding,
    #[error("leg {0} does not land in the cover target")]
    TargetMismatch(usize),
    #[error("cover has no legs")]
    EmptyCover,
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// One pulled-back element and whether the pullback is negligible.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PullbackRecord {
    pub element: SubsetElement,
    pub pullback: SubsetElement,
    pub negligible: bool,
}

impl PullbackRecord {
    pub fn describe(&self, map: &ContinuousMap) -> String {
        format!(
            "{} pulls back to {} ({})",
            self.element.describe(map.cod()),
            self.pullback.describe(map.dom()),
            if self.negligible { "negligible" } else { "not negligible" }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffuseVerdict {
    pub diffuse: bool,
    pub certificate: Vec<PullbackRecord>,
    /// A non-negligible pullback of a negligible element, when one exists.
    pub witness: Option<PullbackRecord>,
}

fn pull(map: &ContinuousMap, e: SubsetElement) -> PullbackRecord {
    let pullback = SubsetElement::new(map.preimage(e.u), map.preimage(e.i));
    PullbackRecord {
        element: e,
        pullback,
        negligible: is_negligible_local(map.dom(), pullback.u, pullback.i),
    }
}

/// Decides diffuseness and records one certificate entry per codomain point.
pub fn is_diffuse(map: &ContinuousMap) -> DiffuseVerdict {
    let cod = map.cod();
    let mut certificate = Vec::with_capacity(cod.len());
    let mut witness = None;
    for y in 0..cod.len() {
        let u = cod.minopen(y);
        let rec = pull(map, SubsetElement::new(u, max_negligible(cod, u)));
        if !rec.negligible && witness.is_none() {
            witness = Some(smallest_failure(map, rec));
        }
        certificate.push(rec);
    }
    DiffuseVerdict {
        diffuse: witness.is_none(),
        certificate,
        witness,
    }
}

/// Shrinks a failing record to a single point closure where possible.
fn smallest_failure(map: &ContinuousMap, rec: PullbackRecord) -> PullbackRecord {
    let cod = map.cod();
    let u = rec.element.u;
    rec.element
        .i
        .iter()
        .map(|z| pull(map, SubsetElement::new(u, cod.closure_within(u, PointSet::singleton(z)))))
        .find(|r| !r.negligible)
        .unwrap_or(rec)
}

/// Diffuseness straight from the definition: every negligible element of the
/// codomain, every pullback tested by Z-density. Exponential.
pub fn is_diffuse_exhaustive(map: &ContinuousMap) -> Result<Option<PullbackRecord>, TopologyError> {
    let (dom, cod) = (map.dom(), map.cod());
    for &u in cod.opens()?.iter() {
        for i in closed_subsets_within(cod, u) {
            let e = SubsetElement::new(u, i);
            if !is_negligible_element(cod, e).map_err(unwrap_topology)? {
                continue;
            }
            let pb = SubsetElement::new(map.preimage(u), map.preimage(i));
            if !is_negligible_element(dom, pb).map_err(unwrap_topology)? {
                return Ok(Some(PullbackRecord {
                    element: e,
                    pullback: pb,
                    negligible: false,
                }));
            }
        }
    }
    Ok(None)
}

fn unwrap_topology(e: crate::negligible::NegligibleError) -> TopologyError {
    match e {
        crate::negligible::NegligibleError::Topology(t) => t,
        other => unreachable!("well-formed elements only: {other}"),
    }
}

/// A continuous map together with a passing diffuseness certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffuseMap {
    map: ContinuousMap,
    certificate: Vec<PullbackRecord>,
}

impl DiffuseMap {
    pub fn new(map: ContinuousMap) -> Result<Self, GenError> {
        let v = is_diffuse(&map);
        match v.witness {
            Some(w) => Err(GenError::NotDiffuse(w.describe(&map))),
            None => Ok(DiffuseMap {
                map,
                certificate: v.certificate,
            }),
        }
    }

    pub fn map(&self) -> &ContinuousMap {
        &self.map
    }

    pub fn certificate(&self) -> &[PullbackRecord] {
        &self.certificate
    }

    pub fn into_map(self) -> ContinuousMap {
        self.map
    }
}

/// Injective with `f(U_x) = U_f(x)` for every `x`.
pub fn is_open_embedding(map: &ContinuousMap) -> bool {
    map.is_injective() && is_local_homeomorphism(map)
}

/// `f(U_x) = U_f(x)` for every `x`. Together with injectivity on each `U_x`
/// this makes `f` restrict to an open embedding on every minimal open.
fn maps_minopens_onto(map: &ContinuousMap) -> bool {
    (0..map.dom().len()).all(|x| map.image(map.dom().minopen(x)) == map.cod().minopen(map.apply(x)))
}

/// Every point has an open neighbourhood on which the map is an open embedding.
pub fn is_local_homeomorphism(map: &ContinuousMap) -> bool {
    maps_minopens_onto(map)
        && (0..map.dom().len()).all(|x| {
            let u = map.dom().minopen(x);
            map.image(u).len() == u.len()
        })
}

/// Distinct points in one fiber must be separated: some neighbourhood of
/// `x` misses `y`. Returns the first offending ordered pair.
pub fn fiber_separation_failure(map: &ContinuousMap) -> Option<(Point, Point)> {
    let dom = map.dom();
    for x in 0..dom.len() {
        for y in 0..dom.len() {
            if x != y && map.apply(x) == map.apply(y) && dom.minopen(x).contains(y) {
                return Some((x, y));
            }
        }
    }
    None
}

/// Finite discrete local subset: diffuse, locally an open embedding, with
/// separated fibers.
pub fn is_fdl_local_subset(map: &ContinuousMap) -> Result<bool, GenError> {
    if let Some(w) = is_diffuse(map).witness {
        return Err(GenError::NotDiffuse(w.describe(map)));
    }
    Ok(is_local_homeomorphism(map) && fiber_separation_failure(map).is_none())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoverMode {
    /// Legs are open embeddings.
    Pseudogeometric,
    /// Legs are finite discrete local subsets.
    Pseudoetale,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoverFailure {
    Uncovered(PointSet),
    BadLeg { leg: usize, reason: String },
}

/// Checks that the legs are of the right kind and jointly surjective.
pub fn is_cover(
    legs: &[ContinuousMap],
    target: &FinSpace,
    mode: CoverMode,
) -> Result<Result<(), CoverFailure>, GenError> {
    if legs.is_empty() {
        return Err(GenError::EmptyCover);
    }
    if let Some(k) = legs.iter().position(|l| l.cod() != target) {
        return Err(GenError::TargetMismatch(k));
    }
    for (k, leg) in legs.iter().enumerate() {
        let bad = match mode {
            CoverMode::Pseudogeometric => (!is_open_embedding(leg)).then(|| "not an open embedding".to_string()),
            CoverMode::Pseudoetale => match is_fdl_local_subset(leg) {
                Ok(true) => None,
                Ok(false) => Some("not a finite discrete local subset".to_string()),
                Err(e) => Some(e.to_string()),
            },
        };
        if let Some(reason) = bad {
            return Ok(Err(CoverFailure::BadLeg { leg: k, reason }));
        }
    }
    let covered = legs
        .iter()
        .fold(PointSet::EMPTY, |acc, l| acc.union(l.image_all()));
    if covered != target.full() {
        return Ok(Err(CoverFailure::Uncovered(target.full().minus(covered))));
    }
    Ok(Ok(()))
}

/// `(V; v, g)` with `V = f⁻¹(im u)`, `v` the inclusion and `g = u⁻¹ ∘ f`.
#[derive(Clone, Debug)]
pub struct EmbeddingPullback {
    pub space: FinSpace,
    pub v: ContinuousMap,
    pub g: ContinuousMap,
}

pub fn pullback_embedding(
    f: &ContinuousMap,
    u: &ContinuousMap,
) -> Result<EmbeddingPullback, GenError> {
    if !is_open_embedding(u) || u.cod() != f.cod() {
        return Err(GenError::NotEmbedding);
    }
    let im = u.image_all();
    let members = f.preimage(im);
    let (space, v) = f.dom().subspace_with_inclusion(members)?;
    let inverse = |a: Point| u.images().iter().position(|&p| p == a).expect("in image");
    let g_images = members.iter().map(|c| inverse(f.apply(c))).collect();
    let g = ContinuousMap::new(space.clone(), u.dom().clone(), g_images)
        .expect("corestriction of a continuous map is continuous");
    Ok(EmbeddingPullback { space, v, g })
}

/// A probe `D` and a cone `(a, c)` over the cospan without a unique
/// mediating diffuse map.
#[derive(Clone, Debug)]
pub struct UniversalFailure {
    pub probe: String,
    pub a: Vec<Point>,
    pub c: Vec<Point>,
    pub mediators: usize,
}

/// Checks the pullback's universal property against diffuse cones from every
/// probe on at most `probe_bound` points.
pub fn verify_pullback_universal(
    f: &ContinuousMap,
    u: &ContinuousMap,
    pb: &EmbeddingPullback,
    probe_bound: usize,
    budget: &Budget,
) -> Result<Option<UniversalFailure>, GenError> {
    for d in crate::fintop::probes_up_to(probe_bound, budget)? {
        let to_c: Vec<ContinuousMap> = diffuse_maps(&d, f.dom(), budget)?;
        let to_u: Vec<ContinuousMap> = diffuse_maps(&d, u.dom(), budget)?;
        let to_v: Vec<ContinuousMap> = diffuse_maps(&d, &pb.space, budget)?;
        for a in &to_c {
            for c in &to_u {
                let fa = f.after(a).expect("composable");
                let uc = u.after(c).expect("composable");
                if fa.images() != uc.images() {
                    continue;
                }
                let mediators = to_v
                    .iter()
                    .filter(|h| {
                        pb.v.after(h).expect("composable").images() == a.images()
                            && pb.g.after(h).expect("composable").images() == c.images()
                    })
                    .count();
                if mediators != 1 {
                    return Ok(Some(UniversalFailure {
                        probe: d.name().to_string(),
                        a: a.images().to_vec(),
                        c: c.images().to_vec(),
                        mediators,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// All diffuse continuous maps `x → y` in canonical order.
pub fn diffuse_maps(
    x: &FinSpace,
    y: &FinSpace,
    budget: &Budget,
) -> Result<Vec<ContinuousMap>, TopologyError> {
    Ok(continuous_maps(x, y, budget)?
        .into_iter()
        .filter(|m| is_diffuse(m).diffuse)
        .collect())
}

/// Outcome of the probe-bounded discreteness test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiscretenessVerdict {
    /// Both tests pass for every connected probe on at most `k` points.
    DiscreteUpTo(usize),
    /// Two distinct points of a fiber cannot be separated.
    FiberNotSeparated(Point, Point),
    /// Two lifts from a connected probe agree somewhere without being equal.
    LiftsMeet {
        probe: String,
        s: Vec<Point>,
        t: Vec<Point>,
    },
}

/// Approximates discreteness of `map` by checking fiber separation and, for
/// every connected probe `D` with at most `probe_bound` points, that two
/// diffuse lifts `s, t : D → X` with `f∘s = f∘t` either coincide or never meet.
pub fn discreteness_probe(
    map: &ContinuousMap,
    probe_bound: usize,
    budget: &Budget,
) -> Result<DiscretenessVerdict, GenError> {
    if let Some((x, y)) = fiber_separation_failure(map) {
        return Ok(DiscretenessVerdict::FiberNotSeparated(x, y));
    }
    for d in crate::fintop::probes_up_to(probe_bound, budget)? {
        if !d.is_connected() {
            continue;
        }
        let lifts = diffuse_maps(&d, map.dom(), budget)?;
        for (i, s) in lifts.iter().enumerate() {
            let fs = map.after(s).expect("composable");
            for t in &lifts[i + 1..] {
                if map.after(t).expect("composable").images() != fs.images() {
                    continue;
                }
                let meet = s.images().iter().zip(t.images()).any(|(a, b)| a == b);
                if meet {
                    return Ok(DiscretenessVerdict::LiftsMeet {
                        probe: d.name().to_string(),
                        s: s.images().to_vec(),
                        t: t.images().to_vec(),
                    });
                }
            }
        }
    }
    Ok(DiscretenessVerdict::DiscreteUpTo(probe_bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fintop::disjoint_union;
    use crate::fixtures::{line3, p9, sierp};

    fn inclusion(space: &FinSpace, labels: &[&str]) -> ContinuousMap {
        space
            .subspace_with_inclusion(space.set_of(labels).unwrap())
            .unwrap()
            .1
    }

    fn fold(parts: usize) -> ContinuousMap {
        let s = sierp();
        let du = disjoint_union(&vec![s.clone(); parts]).unwrap();
        let images = (0..du.space.len()).map(|p| du.untag(p).1).collect();
        ContinuousMap::new(du.space.clone(), s, images).unwrap()
    }

    #[test]
    fn diffuse_examples() {
        let p = p9();
        assert!(is_diffuse(&ContinuousMap::identity(&p)).diffuse);
        let c = p.index_of("(m,m)").unwrap();
        let v = is_diffuse(&ContinuousMap::constant(&p, &p, c));
        assert!(!v.diffuse);
        let w = v.witness.unwrap();
        assert_eq!(w.element, SubsetElement::new(p.full(), PointSet::singleton(c)));
        assert_eq!(w.pullback, SubsetElement::new(p.full(), p.full()));
        let l = line3();
        let m = l.index_of("m").unwrap();
        assert!(is_diffuse(&ContinuousMap::constant(&l, &l, m)).diffuse);
    }

    #[test]
    fn maps_into_line3_are_diffuse() {
        let b = Budget::DEFAULT;
        let l = line3();
        for x in crate::fintop::probes_up_to(3, &b).unwrap().iter().chain([&p9()]) {
            for f in continuous_maps(x, &l, &b).unwrap() {
                assert!(is_diffuse(&f).diffuse);
            }
        }
    }

    #[test]
    fn fast_diffuse_matches_definition() {
        let b = Budget::DEFAULT;
        let spaces: Vec<FinSpace> = crate::fintop::probes_up_to(3, &b)
            .unwrap()
            .into_iter()
            .chain([line3()])
            .collect();
        for x in &spaces {
            for y in &spaces {
                for f in continuous_maps(x, y, &b).unwrap() {
                    let fast = is_diffuse(&f).diffuse;
                    let slow = is_diffuse_exhaustive(&f).unwrap().is_none();
                    assert_eq!(fast, slow, "{f:?}");
                }
            }
        }
    }

    #[test]
    fn open_embedding_examples() {
        let l = line3();
        assert!(is_open_embedding(&inclusion(&l, &["l"])));
        assert!(!is_open_embedding(&inclusion(&l, &["m"])));
        let p = p9();
        let diag = ContinuousMap::new(
            l.clone(),
            p.clone(),
            (0..3).map(|i| p.product_index(&l, i, i)).collect(),
        )
        .unwrap();
        assert!(!is_open_embedding(&diag));
    }

    #[test]
    fn cover_examples() {
        let l = line3();
        let legs = vec![inclusion(&l, &["l"]), ContinuousMap::identity(&l)];
        assert_eq!(is_cover(&legs, &l, CoverMode::Pseudogeometric).unwrap(), Ok(()));
        let legs = vec![inclusion(&l, &["l"]), inclusion(&l, &["r"])];
        assert_eq!(
            is_cover(&legs, &l, CoverMode::Pseudogeometric).unwrap(),
            Err(CoverFailure::Uncovered(l.set_of(&["m"]).unwrap()))
        );
        let f = fold(2);
        assert_eq!(is_cover(&[f.clone()], &sierp(), CoverMode::Pseudoetale).unwrap(), Ok(()));
        assert!(is_cover(&[f], &l, CoverMode::Pseudoetale).is_err());
    }

    #[test]
    fn pullback_embedding_examples() {
        let b = Budget::DEFAULT;
        let l = line3();
        let u = inclusion(&l, &["r"]);
        let pb = pullback_embedding(&ContinuousMap::identity(&l), &u).unwrap();
        assert!(crate::fintop::is_homeomorphic(&pb.space, u.dom()));
        let r = l.index_of("r").unwrap();
        let ul = inclusion(&l, &["l"]);
        let pb = pullback_embedding(&ContinuousMap::constant(&l, &l, r), &ul).unwrap();
        assert!(pb.space.is_empty());
        let p = p9();
        let first = ContinuousMap::new(p.clone(), l.clone(), (0..9).map(|i| i / 3).collect()).unwrap();
        let pb = pullback_embedding(&first, &ul).unwrap();
        assert_eq!(pb.v.image_all(), p.set_of(&["(l,l)", "(l,m)", "(l,r)"]).unwrap());
        assert!(verify_pullback_universal(&first, &ul, &pb, 2, &b).unwrap().is_none());
        assert_eq!(
            pullback_embedding(&first, &inclusion(&l, &["m"])).unwrap_err(),
            GenError::NotEmbedding
        );
    }

    #[test]
    fn fdl_examples() {
        let l = line3();
        assert!(is_fdl_local_subset(&inclusion(&l, &["l", "m", "r"])).unwrap());
        assert!(is_fdl_local_subset(&fold(2)).unwrap());
        let p = p9();
        let pt = FinSpace::point();
        assert!(!is_fdl_local_subset(&ContinuousMap::constant(&p, &pt, 0)).unwrap());
    }

    #[test]
    fn discreteness_examples() {
        let b = Budget::DEFAULT;
        let l = line3();
        assert_eq!(
            discreteness_probe(&inclusion(&l, &["l", "m"]), 3, &b).unwrap(),
            DiscretenessVerdict::DiscreteUpTo(3)
        );
        assert_eq!(
            discreteness_probe(&fold(2), 3, &b).unwrap(),
            DiscretenessVerdict::DiscreteUpTo(3)
        );
        // chain 0 < 1 < 2 collapsing the two upper points
        let chain = FinSpace::from_table(
            "chain3",
            &[("0", vec!["0"]), ("1", vec!["0", "1"]), ("2", vec!["0", "1", "2"])],
        )
        .unwrap();
        let s = sierp();
        let (zero, one) = (s.index_of("0").unwrap(), s.index_of("1").unwrap());
        let f = ContinuousMap::new(chain, s, vec![one, zero, zero]).unwrap();
        assert_eq!(
            discreteness_probe(&f, 3, &b).unwrap(),
            DiscretenessVerdict::FiberNotSeparated(2, 1)
        );
    }
}
