//! The space `Λ` representing maps that pull a family of closed elements back
//! to negligible ones.
//!
//! A point of `Λ` over `x` is a selector: for every family element `(U_x, J)`
//! with `x ∈ J` it picks a connected component of `U_x − J`, monotonically in
//! `J`. On a general member `(U, I)` the selector extends to the component of
//! `U − I` containing its local choice. The basic opens are
//! `N(U, x, f) = {(y, g) : y ∈ U, g = f on every member over U}`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::budget::Budget;
use crate::fintop::{
    continuous_maps, probes_up_to, ContinuousMap, FinSpace, MapError, Point, TopologyError,
};
use crate::negligible::{close_family, is_negligible_local, ClosedElementFamily, NegligibleError, SubsetElement};
use crate::pointset::PointSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LambdaError {
    #[error("budget exceeded: more than {limit} {what}")]
    BudgetExceeded { what: &'static str, limit: u128 },
    #[error("map is not a local homeomorphism off the given set at {0}")]
    NotLocalHomeoOffI(String),
    #[error("maps do not share a codomain")]
    SpaceMismatch,
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Negligible(#[from] NegligibleError),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// A space together with a base family of closed elements and its hull.
#[derive(Clone, Debug)]
pub struct NegInstance {
    family: ClosedElementFamily,
}

impl NegInstance {
    pub fn new(space: &FinSpace, base: &[SubsetElement], budget: &Budget) -> Result<Self, LambdaError> {
        Ok(NegInstance {
            family: close_family(space, base, budget)?,
        })
    }

    pub fn space(&self) -> &FinSpace {
        self.family.space()
    }

    pub fn base(&self) -> &[SubsetElement] {
        self.family.base()
    }

    pub fn family(&self) -> &ClosedElementFamily {
        &self.family
    }
}

/// Whether `φ : Y → X` pulls every element of `base` back to a negligible one.
pub fn pulls_back_negligibly(map: &ContinuousMap, base: &[SubsetElement]) -> bool {
    base.iter()
        .all(|e| is_negligible_local(map.dom(), map.preimage(e.u), map.preimage(e.i)))
}

/// Continuous `Y → X` pulling each base element back to a negligible element,
/// in enumeration order.
pub fn neg_functor_values(
    instance: &NegInstance,
    y: &FinSpace,
    budget: &Budget,
) -> Result<Vec<ContinuousMap>, LambdaError> {
    Ok(continuous_maps(y, instance.space(), budget)?
        .into_iter()
        .filter(|m| pulls_back_negligibly(m, instance.base()))
        .collect())
}

/// Local choices `J ↦ component of U_x − J` for the traces `J ∋ x`.
pub type Selector = BTreeMap<PointSet, PointSet>;

#[derive(Clone, Debug)]
pub struct LambdaSpace {
    pub space: FinSpace,
    pub lambda: ContinuousMap,
    pub selectors: Vec<Selector>,
    /// Pullbacks of the base elements along `λ`.
    pub e1: Vec<SubsetElement>,
}

fn local_value(x_space: &FinSpace, x: Point, sel: &Selector, j: PointSet) -> PointSet {
    if j.contains(x) {
        sel[&j]
    } else {
        x_space.minopen(x).minus(j)
    }
}

/// The component of `U − I` chosen by the selector `sel` at `x`.
pub fn selector_value(x_space: &FinSpace, x: Point, sel: &Selector, e: SubsetElement) -> PointSet {
    let local = local_value(x_space, x, sel, x_space.minopen(x).inter(e.i));
    let p = local.first().expect("selected components are non-empty");
    x_space.component_containing(e.rest(), p)
}

fn selectors_at(family: &ClosedElementFamily, x: Point, budget: &Budget) -> Result<Vec<Selector>, LambdaError> {
    let space = family.space();
    let ux = space.minopen(x);
    let mut slots: Vec<(PointSet, Vec<PointSet>)> = Vec::new();
    for &j in family.local(x).iter().filter(|j| j.contains(x)) {
        let comps = space.components_of(ux.minus(j));
        if comps.is_empty() {
            return Ok(Vec::new());
        }
        slots.push((j, comps));
    }
    let branching = slots.iter().filter(|(_, c)| c.len() > 1).count();
    if branching > budget.max_branching_elements {
        return Err(LambdaError::BudgetExceeded {
            what: "branching elements at one point",
            limit: budget.max_branching_elements as u128,
        });
    }
    let mut out = Vec::new();
    let mut chosen: Vec<PointSet> = Vec::with_capacity(slots.len());
    fn rec(
        slots: &[(PointSet, Vec<PointSet>)],
        chosen: &mut Vec<PointSet>,
        out: &mut Vec<Selector>,
        limit: usize,
    ) -> Result<(), LambdaError> {
        let k = chosen.len();
        if k == slots.len() {
            if out.len() == limit {
                return Err(LambdaError::BudgetExceeded {
                    what: "selectors at one point",
                    limit: limit as u128,
                });
            }
            out.push(slots.iter().map(|s| s.0).zip(chosen.iter().copied()).collect());
            return Ok(());
        }
        let j = slots[k].0;
        for &c in &slots[k].1 {
            // larger traces must choose smaller components
            let monotone = slots[..k].iter().zip(chosen.iter()).all(|((j2, _), &c2)| {
                (!j2.is_subset(j) || c.is_subset(c2)) && (!j.is_subset(*j2) || c2.is_subset(c))
            });
            if monotone {
                chosen.push(c);
                rec(slots, chosen, out, limit)?;
                chosen.pop();
            }
        }
        Ok(())
    }
    rec(&slots, &mut chosen, &mut out, budget.max_selectors)?;
    Ok(out)
}

impl LambdaSpace {
    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.len() == 0
    }

    /// `N(U, x, f)` for the point `p = (x, f)` and an open `U ∋ x`.
    pub fn n_set(&self, family: &ClosedElementFamily, u: PointSet, p: Point) -> PointSet {
        n_set_raw(family, self.lambda.images(), &self.selectors, u, p)
    }

    /// Subspace on `keep`, with `λ` and the pulled-back family restricted.
    pub fn restricted(&self, keep: PointSet) -> Result<LambdaSpace, TopologyError> {
        let (sub, inc) = self.space.subspace_with_inclusion(keep)?;
        let lambda = self.lambda.after(&inc).expect("inclusion lands in Λ");
        let selectors = keep.iter().map(|p| self.selectors[p].clone()).collect();
        let e1 = self
            .e1
            .iter()
            .map(|e| SubsetElement::new(inc.preimage(e.u), inc.preimage(e.i)))
            .collect();
        Ok(LambdaSpace {
            space: sub,
            lambda,
            selectors,
            e1,
        })
    }
}

fn n_set_raw(
    family: &ClosedElementFamily,
    over: &[Point],
    selectors: &[Selector],
    u: PointSet,
    p: Point,
) -> PointSet {
    let space = family.space();
    let members: Vec<SubsetElement> = family
        .elements_on(u)
        .into_iter()
        .map(|i| SubsetElement::new(u, i))
        .collect();
    let x = over[p];
    let mine: Vec<PointSet> = members
        .iter()
        .map(|&e| selector_value(space, x, &selectors[p], e))
        .collect();
    (0..over.len())
        .filter(|&q| {
            u.contains(over[q])
                && members
                    .iter()
                    .zip(&mine)
                    .all(|(&e, &v)| selector_value(space, over[q], &selectors[q], e) == v)
        })
        .collect()
}

/// Builds `Λ`, its projection `λ`, and the pulled-back base family.
pub fn lambda_construct(instance: &NegInstance, budget: &Budget) -> Result<LambdaSpace, LambdaError> {
    let family = instance.family();
    let space = family.space();
    let mut over = Vec::new();
    let mut labels = Vec::new();
    let mut selectors = Vec::new();
    for x in 0..space.len() {
        let sels = selectors_at(family, x, budget)?;
        let many = sels.len() > 1;
        for (k, s) in sels.into_iter().enumerate() {
            over.push(x);
            labels.push(if many {
                format!("{}#{}", space.label(x), k + 1)
            } else {
                space.label(x).to_string()
            });
            selectors.push(s);
        }
    }
    if over.len() > crate::pointset::MAX_POINTS {
        return Err(TopologyError::TooManyPoints(over.len()).into());
    }
    let minopen: Vec<PointSet> = (0..over.len())
        .map(|p| n_set_raw(family, &over, &selectors, space.minopen(over[p]), p))
        .collect();
    let lspace = FinSpace::new(format!("Λ({})", space.name()), labels, minopen)?;
    let lambda = ContinuousMap::new(lspace.clone(), space.clone(), over)?;
    let e1 = instance
        .base()
        .iter()
        .map(|e| SubsetElement::new(lambda.preimage(e.u), lambda.preimage(e.i)))
        .collect();
    Ok(LambdaSpace {
        space: lspace,
        lambda,
        selectors,
        e1,
    })
}

#[derive(Clone, Debug)]
pub struct RepresentabilityFailure {
    pub probe: String,
    pub kind: FailureKind,
    /// Images of the offending map, `Y → Λ` or `Y → X`.
    pub map: Vec<Point>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureKind {
    /// Two lifts with the same composite.
    NotInjective,
    /// A value of the functor with no lift.
    NotSurjective,
    /// A lift whose composite is not a value of the functor.
    NotNatural,
}

#[derive(Clone, Debug)]
pub struct RepresentabilityReport {
    pub probes_checked: usize,
    pub maps_checked: usize,
    pub failures: Vec<RepresentabilityFailure>,
}

impl RepresentabilityReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// For every probe of size `≤ bound` (and the empty space) compares
/// `{ψ : Y → Λ pulling E₁ back negligibly}` with the functor values on `Y`
/// via `ψ ↦ λ∘ψ`.
pub fn verify_representability(
    instance: &NegInstance,
    lam: &LambdaSpace,
    bound: usize,
    budget: &Budget,
) -> Result<RepresentabilityReport, LambdaError> {
    let mut probes = vec![FinSpace::empty()];
    probes.extend(probes_up_to(bound, budget)?);
    let mut report = RepresentabilityReport {
        probes_checked: 0,
        maps_checked: 0,
        failures: Vec::new(),
    };
    for y in &probes {
        report.probes_checked += 1;
        let targets = neg_functor_values(instance, y, budget)?;
        let mut hit: BTreeMap<Vec<Point>, Vec<Point>> = BTreeMap::new();
        for psi in continuous_maps(y, &lam.space, budget)? {
            if !pulls_back_negligibly(&psi, &lam.e1) {
                continue;
            }
            report.maps_checked += 1;
            let comp = lam.lambda.after(&psi).expect("composable").images().to_vec();
            if !targets.iter().any(|t| t.images() == comp.as_slice()) {
                report.failures.push(RepresentabilityFailure {
                    probe: y.name().to_string(),
                    kind: FailureKind::NotNatural,
                    map: psi.images().to_vec(),
                });
            }
            if hit.insert(comp, psi.images().to_vec()).is_some() {
                report.failures.push(RepresentabilityFailure {
                    probe: y.name().to_string(),
                    kind: FailureKind::NotInjective,
                    map: psi.images().to_vec(),
                });
            }
        }
        for t in &targets {
            if !hit.contains_key(t.images()) {
                report.failures.push(RepresentabilityFailure {
                    probe: y.name().to_string(),
                    kind: FailureKind::NotSurjective,
                    map: t.images().to_vec(),
                });
            }
        }
    }
    Ok(report)
}

/// The pullback of `c : C → A` along `b : B → A` through `Λ`, with projections.
#[derive(Clone, Debug)]
pub struct GeneralPullback {
    pub instance: NegInstance,
    pub lambda: LambdaSpace,
    /// The set-level pullback `{(c, b) : c(c) = b(b)}` as a subspace of `C × B`.
    pub pairs: FinSpace,
    pub pr_c: ContinuousMap,
    pub pr_b: ContinuousMap,
}

/// `b` is injective on each `U_x − I` and maps it onto an open set, for `x ∉ I`.
fn local_homeo_off(b: &ContinuousMap, i: PointSet) -> Option<Point> {
    let bs = b.dom();
    (0..bs.len()).filter(|&x| !i.contains(x)).find(|&x| {
        let v = bs.minopen(x).minus(i);
        let img = b.image(v);
        img.len() != v.len() || !b.cod().is_open_set(img)
    })
}

pub fn pullback_via_lambda(
    c: &ContinuousMap,
    b: &ContinuousMap,
    i: PointSet,
    budget: &Budget,
) -> Result<GeneralPullback, LambdaError> {
    if c.cod() != b.cod() {
        return Err(LambdaError::SpaceMismatch);
    }
    let bs = b.dom();
    let i = bs.check_set(i)?;
    if let Some(x) = local_homeo_off(b, i) {
        return Err(LambdaError::NotLocalHomeoOffI(bs.label(x).to_string()));
    }
    let cs = c.dom();
    let members: Vec<(Point, Point)> = (0..cs.len())
        .flat_map(|p| (0..bs.len()).map(move |q| (p, q)))
        .filter(|&(p, q)| c.apply(p) == b.apply(q))
        .collect();
    if members.len() > crate::pointset::MAX_POINTS {
        return Err(TopologyError::TooManyPoints(members.len()).into());
    }
    let labels = members
        .iter()
        .map(|&(p, q)| format!("({},{})", cs.label(p), bs.label(q)))
        .collect();
    let minopen = members
        .iter()
        .map(|&(p, q)| {
            (0..members.len())
                .filter(|&k| cs.minopen(p).contains(members[k].0) && bs.minopen(q).contains(members[k].1))
                .collect()
        })
        .collect();
    let pairs = FinSpace::new(format!("{}×{}", cs.name(), bs.name()), labels, minopen)?;
    let pr_c = ContinuousMap::new(pairs.clone(), cs.clone(), members.iter().map(|m| m.0).collect())?;
    let pr_b = ContinuousMap::new(pairs.clone(), bs.clone(), members.iter().map(|m| m.1).collect())?;
    let k = pr_b.preimage(i);
    let mut base = vec![SubsetElement::new(pairs.full(), k)];
    for x in 0..pairs.len() {
        let ux = pairs.minopen(x);
        if !ux.inter(k).is_empty() {
            continue;
        }
        for j in ux.subsets() {
            if !j.is_empty() && pairs.is_closed_within(ux, j) && is_negligible_local(&pairs, ux, j) {
                base.push(SubsetElement::new(ux, j));
            }
        }
    }
    base.sort();
    base.dedup();
    let instance = NegInstance::new(&pairs, &base, budget)?;
    let lambda = lambda_construct(&instance, budget)?;
    Ok(GeneralPullback {
        instance,
        lambda,
        pairs,
        pr_c,
        pr_b,
    })
}

/// `None` when `X` is not Hausdorff (for finite spaces: not discrete);
/// otherwise whether `Λ` is.
pub fn hausdorff_preserved(instance: &NegInstance, lam: &LambdaSpace) -> Option<bool> {
    instance.space().is_discrete().then(|| lam.space.is_discrete())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{line3, p9};

    fn line_instance() -> NegInstance {
        let l = line3();
        NegInstance::new(&l, &[SubsetElement::new(l.full(), l.set_of(&["m"]).unwrap())], &Budget::DEFAULT).unwrap()
    }

    #[test]
    fn functor_values() {
        let inst = line_instance();
        let pt = FinSpace::point();
        let vals = neg_functor_values(&inst, &pt, &Budget::DEFAULT).unwrap();
        let l = inst.space();
        let got: Vec<&str> = vals.iter().map(|m| l.label(m.apply(0))).collect();
        assert_eq!(got, vec!["l", "r"]);
        assert_eq!(neg_functor_values(&inst, &FinSpace::empty(), &Budget::DEFAULT).unwrap().len(), 1);

        let p = p9();
        let mm = p.set_of(&["(m,m)"]).unwrap();
        let inst = NegInstance::new(&p, &[SubsetElement::new(p.full(), mm)], &Budget::DEFAULT).unwrap();
        assert_eq!(neg_functor_values(&inst, &pt, &Budget::DEFAULT).unwrap().len(), 8);
    }

    #[test]
    fn line_lambda() {
        let inst = line_instance();
        let lam = lambda_construct(&inst, &Budget::DEFAULT).unwrap();
        assert_eq!(lam.space.labels(), &["l", "m#1", "m#2", "r"]);
        let s = &lam.space;
        let sets = |ls: &[&str]| s.set_of(ls).unwrap();
        assert_eq!(s.minopen(s.index_of("m#1").unwrap()), sets(&["l", "m#1"]));
        assert_eq!(s.minopen(s.index_of("m#2").unwrap()), sets(&["r", "m#2"]));
        assert_eq!(s.minopen(s.index_of("l").unwrap()), sets(&["l"]));
        assert!(!s.is_connected());
        let rep = verify_representability(&inst, &lam, 3, &Budget::DEFAULT).unwrap();
        assert!(rep.holds(), "{:?}", rep.failures);

        let dropped = lam.restricted(s.full().minus(sets(&["m#2"]))).unwrap();
        let rep = verify_representability(&inst, &dropped, 3, &Budget::DEFAULT).unwrap();
        assert!(rep.failures.iter().any(|f| f.kind == FailureKind::NotSurjective));
    }

    #[test]
    fn empty_base_gives_isomorphism() {
        for x in [line3(), p9(), crate::fixtures::k5()] {
            let inst = NegInstance::new(&x, &[], &Budget::DEFAULT).unwrap();
            let lam = lambda_construct(&inst, &Budget::DEFAULT).unwrap();
            assert_eq!(lam.lambda.images(), (0..x.len()).collect::<Vec<_>>().as_slice());
            assert_eq!(lam.space.minopens(), x.minopens());
        }
    }

    #[test]
    fn hausdorff_cases() {
        let d = FinSpace::discrete(3);
        let inst = NegInstance::new(&d, &[], &Budget::DEFAULT).unwrap();
        let lam = lambda_construct(&inst, &Budget::DEFAULT).unwrap();
        assert_eq!(hausdorff_preserved(&inst, &lam), Some(true));
        let l = line_instance();
        let ll = lambda_construct(&l, &Budget::DEFAULT).unwrap();
        assert_eq!(hausdorff_preserved(&l, &ll), None);

        let pt = FinSpace::point();
        let inst = NegInstance::new(&pt, &[], &Budget::DEFAULT).unwrap();
        let s = crate::fixtures::sierp();
        let bad = LambdaSpace {
            space: s.clone(),
            lambda: ContinuousMap::constant(&s, &pt, 0),
            selectors: vec![Selector::new(); 2],
            e1: vec![],
        };
        assert_eq!(hausdorff_preserved(&inst, &bad), Some(false));
    }

    #[test]
    fn branching_budget_is_enforced() {
        let inst = line_instance();
        let tight = Budget {
            max_selectors: 1,
            ..Budget::DEFAULT
        };
        assert!(matches!(
            lambda_construct(&inst, &tight),
            Err(LambdaError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn pullback_along_open_embedding() {
        let l = line3();
        let (_, inc) = l.subspace_with_inclusion(l.set_of(&["r"]).unwrap()).unwrap();
        let id = ContinuousMap::identity(&l);
        let pb = pullback_via_lambda(&id, &inc, PointSet::EMPTY, &Budget::DEFAULT).unwrap();
        let direct = crate::gencat::pullback_embedding(&id, &inc).unwrap();
        assert!(crate::fintop::is_homeomorphic(&pb.lambda.space, &direct.space));
        assert_eq!(pb.lambda.lambda.images().len(), pb.pairs.len());
    }

    #[test]
    fn pullback_of_rotation_quotient() {
        let rot = crate::fixtures::rotation_p25();
        let q = crate::grpquot::build_quotient(&rot).projection;
        let p = rot.space();
        let fixed = p.set_of(&["(2,2)"]).unwrap();
        let pb = pullback_via_lambda(&q, &q, fixed, &Budget::DEFAULT).unwrap();
        assert_eq!(pb.pairs.len(), 49);
        assert_eq!(pb.lambda.len(), 50);
        assert!(pb.lambda.lambda.is_surjective());

        let qs = q.cod().clone();
        let target = q.apply(p.index_of("(2,2)").unwrap());
        let c = ContinuousMap::constant(&FinSpace::point(), &qs, target);
        let pb = pullback_via_lambda(&c, &q, fixed, &Budget::DEFAULT).unwrap();
        assert_eq!(pb.pairs.len(), 1);
        assert!(pb.lambda.is_empty());
        let rep = verify_representability(&pb.instance, &pb.lambda, 3, &Budget::DEFAULT).unwrap();
        assert!(rep.holds());
    }

    #[test]
    fn pullback_rejects_non_local_homeomorphism() {
        let l = line3();
        let pt = FinSpace::point();
        let b = ContinuousMap::constant(&l, &pt, 0);
        let c = ContinuousMap::identity(&pt);
        assert!(matches!(
            pullback_via_lambda(&c, &b, PointSet::EMPTY, &Budget::DEFAULT),
            Err(LambdaError::NotLocalHomeoOffI(_))
        ));
    }
}
