//! Z-density, negligible subsets and closed element families.
//!
//! An open `V ⊆ U` is Z-dense in `U` when every non-empty connected open
//! `C ⊆ U` meets `V` in a non-empty connected set. A subset `I ⊆ U` is
//! negligible when it is closed in `U` and `U − I` is Z-dense in `U`.
//!
//! Two routes decide negligibility. [`is_negligible_element`] follows the
//! definition and enumerates connected opens. [`is_negligible_local`] checks
//! only minimal opens: `(U, I)` is negligible iff `U_x − I` is non-empty and
//! connected for every `x ∈ I`.

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::budget::Budget;
use crate::fintop::{FinSpace, Point, TopologyError};
use crate::pointset::PointSet;

/// A pair `(U, I)` with `U` open and `I ⊆ U`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SubsetElement {
    pub u: PointSet,
    pub i: PointSet,
}

impl SubsetElement {
    pub fn new(u: PointSet, i: PointSet) -> Self {
        SubsetElement { u, i }
    }

    pub fn trivial(u: PointSet) -> Self {
        SubsetElement { u, i: PointSet::EMPTY }
    }

    /// `U − I`.
    pub fn rest(&self) -> PointSet {
        self.u.minus(self.i)
    }

    pub fn is_closed_in(&self, space: &FinSpace) -> bool {
        space.is_open_set(self.u) && space.is_closed_within(self.u, self.i)
    }

    pub fn describe(&self, space: &FinSpace) -> String {
        format!("({}, {})", space.fmt_set(self.u), space.fmt_set(self.i))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NegligibleError {
    #[error("set {0} is not open")]
    NotOpen(String),
    #[error("malformed element: {0}")]
    MalformedElement(String),
    #[error("set {0} is not closed")]
    NotClosed(String),
    #[error("elements belong to different spaces")]
    SpaceMismatch,
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// First non-empty connected open `C ⊆ within` whose trace on `v` is empty or
/// disconnected, if any.
pub fn zdense_counterexample(
    space: &FinSpace,
    within: PointSet,
    v: PointSet,
) -> Result<Option<PointSet>, TopologyError> {
    let copens = space.connected_opens()?;
    Ok(copens
        .iter()
        .copied()
        .filter(|c| c.is_subset(within))
        .find(|&c| !space.is_connected_set(c.inter(v))))
}

/// Z-density of the open set `v` in the whole space. On failure returns the
/// offending connected open.
pub fn is_zdense(space: &FinSpace, v: PointSet) -> Result<Result<(), PointSet>, NegligibleError> {
    space.check_set(v)?;
    if !space.is_open_set(v) {
        return Err(NegligibleError::NotOpen(space.fmt_set(v)));
    }
    Ok(match zdense_counterexample(space, space.full(), v)? {
        None => Ok(()),
        Some(c) => Err(c),
    })
}

fn check_element(space: &FinSpace, e: SubsetElement) -> Result<(), NegligibleError> {
    space.check_set(e.u)?;
    if !space.is_open_set(e.u) {
        return Err(NegligibleError::MalformedElement(format!(
            "{} is not open",
            space.fmt_set(e.u)
        )));
    }
    if !e.i.is_subset(e.u) {
        return Err(NegligibleError::MalformedElement(format!(
            "{} is not inside {}",
            space.fmt_set(e.i),
            space.fmt_set(e.u)
        )));
    }
    Ok(())
}

/// Negligibility by the definition: `I` closed in `U` and `U − I` Z-dense in `U`.
pub fn is_negligible_element(space: &FinSpace, e: SubsetElement) -> Result<bool, NegligibleError> {
    check_element(space, e)?;
    if !space.is_closed_within(e.u, e.i) {
        return Ok(false);
    }
    Ok(zdense_counterexample(space, e.u, e.rest())?.is_none())
}

/// Negligibility by the minimal-open criterion. The caller guarantees `U`
/// is open and `I ⊆ U`.
pub fn is_negligible_local(space: &FinSpace, u: PointSet, i: PointSet) -> bool {
    space.is_closed_within(u, i) && local_failure(space, i).is_none()
}

/// A point `x ∈ I` with `U_x − I` empty or disconnected.
pub fn local_failure(space: &FinSpace, i: PointSet) -> Option<Point> {
    i.iter()
        .find(|&x| !space.is_connected_set(space.minopen(x).minus(i)))
}

/// Outcome of the minimal-open criterion for a closed subset of the whole
/// space, compared with the definition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalVerdict {
    pub negligible: bool,
    pub agrees: bool,
}

pub fn ylem2_check(space: &FinSpace, i: PointSet) -> Result<LocalVerdict, NegligibleError> {
    space.check_set(i)?;
    if !space.is_closed_set(i) {
        return Err(NegligibleError::NotClosed(space.fmt_set(i)));
    }
    let negligible = local_failure(space, i).is_none();
    let by_definition = is_negligible_element(space, SubsetElement::new(space.full(), i))?;
    Ok(LocalVerdict {
        negligible,
        agrees: negligible == by_definition,
    })
}

/// Union of all point closures (relative to `U`) that are negligible in `U`.
/// The negligible subsets of `U` are exactly the closed subsets of this set.
pub fn max_negligible(space: &FinSpace, u: PointSet) -> PointSet {
    u.iter()
        .filter_map(|x| {
            let c = space.closure_within(u, PointSet::singleton(x));
            (local_failure(space, c).is_none()).then_some(c)
        })
        .fold(PointSet::EMPTY, PointSet::union)
}

/// All subsets of `u` that are closed relative to `u`, in bit order.
pub fn closed_subsets_within(space: &FinSpace, u: PointSet) -> impl Iterator<Item = PointSet> + '_ {
    u.subsets().filter(move |&s| space.is_closed_within(u, s))
}

/// `(U, I) ≤ (V, J)` iff `U ⊆ V` and `U − I ⊆ V − J`.
pub fn element_leq(
    space: &FinSpace,
    a: SubsetElement,
    b: SubsetElement,
) -> Result<bool, NegligibleError> {
    for s in [a.u, a.i, b.u, b.i] {
        if !s.is_subset(space.full()) {
            return Err(NegligibleError::SpaceMismatch);
        }
    }
    Ok(a.u.is_subset(b.u) && a.rest().is_subset(b.rest()))
}

/// The least family of closed elements containing a base and closed under
/// trivial elements, restriction to opens, two-stage unions and locality.
///
/// Restriction and locality together force `(U, I)` to belong to the family
/// iff `(U_x, U_x ∩ I)` belongs for every `x ∈ I`, so the family is stored as
/// one local family per point: the admissible traces `J ⊆ U_x`.
#[derive(Clone, Debug)]
pub struct ClosedElementFamily {
    space: FinSpace,
    base: Vec<SubsetElement>,
    local: Vec<BTreeSet<PointSet>>,
}

impl ClosedElementFamily {
    pub fn space(&self) -> &FinSpace {
        &self.space
    }

    pub fn base(&self) -> &[SubsetElement] {
        &self.base
    }

    /// Admissible traces at `x`, i.e. the `J` with `(U_x, J)` in the family.
    pub fn local(&self, x: Point) -> &BTreeSet<PointSet> {
        &self.local[x]
    }

    pub fn contains(&self, e: SubsetElement) -> bool {
        e.is_closed_in(&self.space)
            && e.i
                .iter()
                .all(|x| self.local[x].contains(&self.space.minopen(x).inter(e.i)))
    }

    /// Every member, ordered by `(U, I)` bit patterns.
    pub fn elements(&self) -> Result<Vec<SubsetElement>, TopologyError> {
        let mut out = Vec::new();
        for &u in self.space.opens()?.iter() {
            for i in closed_subsets_within(&self.space, u) {
                let e = SubsetElement::new(u, i);
                if self.contains(e) {
                    out.push(e);
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// Members whose open set is `u`.
    pub fn elements_on(&self, u: PointSet) -> Vec<PointSet> {
        closed_subsets_within(&self.space, u)
            .filter(|&i| self.contains(SubsetElement::new(u, i)))
            .collect()
    }

    pub fn leq(&self, a: SubsetElement, b: SubsetElement) -> bool {
        a.u.is_subset(b.u) && a.rest().is_subset(b.rest())
    }
}

/// Computes the closure of `base` by fixpoint iteration on local families.
pub fn close_family(
    space: &FinSpace,
    base: &[SubsetElement],
    budget: &Budget,
) -> Result<ClosedElementFamily, NegligibleError> {
    for &e in base {
        check_element(space, e)?;
        if !space.is_closed_within(e.u, e.i) {
            return Err(NegligibleError::MalformedElement(format!(
                "{} is not closed in {}",
                space.fmt_set(e.i),
                space.fmt_set(e.u)
            )));
        }
    }
    let n = space.len();
    let mut local: Vec<BTreeSet<PointSet>> = vec![BTreeSet::from([PointSet::EMPTY]); n];
    let mut pending: Vec<(Point, PointSet)> = Vec::new();
    for e in base {
        for x in e.i {
            pending.push((x, space.minopen(x).inter(e.i)));
        }
    }
    let mut size = n;
    loop {
        // restriction: propagate every trace to the smaller minimal opens
        while let Some((x, j)) = pending.pop() {
            if !local[x].insert(j) {
                continue;
            }
            size += 1;
            if size > budget.max_family {
                return Err(TopologyError::BudgetExceeded {
                    what: "closed element family",
                    limit: budget.max_family as u128,
                }
                .into());
            }
            for y in j {
                if y != x {
                    pending.push((y, space.minopen(y).inter(j)));
                }
            }
        }
        // two-stage unions at minimal opens
        let mut found = Vec::new();
        for x in 0..n {
            let ux = space.minopen(x);
            for &i in &local[x] {
                if i.is_empty() {
                    continue;
                }
                let w = ux.minus(i);
                if w.len() > 24 {
                    return Err(TopologyError::BudgetExceeded {
                        what: "two-stage union candidates",
                        limit: 1 << 24,
                    }
                    .into());
                }
                for j in closed_subsets_within(space, w) {
                    if j.is_empty() {
                        continue;
                    }
                    let admissible = j
                        .iter()
                        .all(|y| local[y].contains(&space.minopen(y).inter(j)));
                    if admissible && !local[x].contains(&i.union(j)) {
                        found.push((x, i.union(j)));
                    }
                }
            }
        }
        if found.is_empty() {
            break;
        }
        pending = found;
    }
    Ok(ClosedElementFamily {
        space: space.clone(),
        base: base.to_vec(),
        local,
    })
}

/// Direct fixpoint of the four closure rules over all closed elements.
/// Exponential; used to cross-check [`close_family`] on small spaces.
pub fn close_family_naive(
    space: &FinSpace,
    base: &[SubsetElement],
) -> Result<BTreeSet<SubsetElement>, TopologyError> {
    let opens = space.opens()?;
    let cse: Vec<SubsetElement> = opens
        .iter()
        .flat_map(|&u| closed_subsets_within(space, u).map(move |i| SubsetElement::new(u, i)))
        .collect();
    let mut fam: HashSet<SubsetElement> = opens.iter().map(|&u| SubsetElement::trivial(u)).collect();
    fam.extend(base.iter().copied());
    loop {
        let mut next = fam.clone();
        for &e in &fam {
            for &v in opens.iter().filter(|v| v.is_subset(e.u)) {
                next.insert(SubsetElement::new(v, v.inter(e.i)));
            }
            for &f in &fam {
                if f.u == e.rest() {
                    next.insert(SubsetElement::new(e.u, e.i.union(f.i)));
                }
            }
        }
        for &e in &cse {
            let local_ok = e.i.iter().all(|x| {
                opens.iter().any(|&v| {
                    v.contains(x)
                        && v.is_subset(e.u)
                        && next.contains(&SubsetElement::new(v, v.inter(e.i)))
                })
            });
            if local_ok {
                next.insert(e);
            }
        }
        if next.len() == fam.len() {
            return Ok(fam.into_iter().collect());
        }
        fam = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{line3, p9, sierp};
    use crate::fintop::probes_up_to;

    #[test]
    fn zdense_examples() {
        let l = line3();
        let lr = l.set_of(&["l", "r"]).unwrap();
        assert_eq!(is_zdense(&l, lr).unwrap(), Err(l.full()));
        assert_eq!(is_zdense(&l, l.full()).unwrap(), Ok(()));
        let p = p9();
        let rest = p.full().minus(p.set_of(&["(m,m)"]).unwrap());
        assert_eq!(is_zdense(&p, rest).unwrap(), Ok(()));
        assert!(matches!(
            is_zdense(&l, l.set_of(&["m"]).unwrap()),
            Err(NegligibleError::NotOpen(_))
        ));
    }

    #[test]
    fn negligible_examples() {
        let p = p9();
        let c = p.set_of(&["(m,m)"]).unwrap();
        assert!(is_negligible_element(&p, SubsetElement::new(p.full(), c)).unwrap());
        let l = line3();
        let m = l.set_of(&["m"]).unwrap();
        assert!(!is_negligible_element(&l, SubsetElement::new(l.full(), m)).unwrap());
        for &u in l.opens().unwrap().iter() {
            assert!(is_negligible_element(&l, SubsetElement::trivial(u)).unwrap());
        }
        let lm = l.set_of(&["l"]).unwrap();
        assert!(matches!(
            is_negligible_element(&l, SubsetElement::new(lm, m)),
            Err(NegligibleError::MalformedElement(_))
        ));
    }

    #[test]
    fn local_criterion_examples() {
        let p = p9();
        let c = p.set_of(&["(m,m)"]).unwrap();
        assert_eq!(
            ylem2_check(&p, c).unwrap(),
            LocalVerdict { negligible: true, agrees: true }
        );
        let l = line3();
        assert_eq!(
            ylem2_check(&l, l.set_of(&["m"]).unwrap()).unwrap(),
            LocalVerdict { negligible: false, agrees: true }
        );
        assert_eq!(
            ylem2_check(&l, PointSet::EMPTY).unwrap(),
            LocalVerdict { negligible: true, agrees: true }
        );
        assert!(matches!(
            ylem2_check(&l, l.set_of(&["l"]).unwrap()),
            Err(NegligibleError::NotClosed(_))
        ));
    }

    #[test]
    fn element_leq_examples() {
        let l = line3();
        let x = l.full();
        let m = l.set_of(&["m"]).unwrap();
        let e = SubsetElement::new(x, m);
        assert!(element_leq(&l, e, e).unwrap());
        let left = SubsetElement::trivial(l.set_of(&["l"]).unwrap());
        assert!(element_leq(&l, left, e).unwrap());
        assert!(!element_leq(&l, SubsetElement::trivial(x), e).unwrap());
        let alien = SubsetElement::trivial(PointSet::singleton(40));
        assert_eq!(element_leq(&l, alien, e), Err(NegligibleError::SpaceMismatch));
    }

    #[test]
    fn close_family_examples() {
        let b = Budget::DEFAULT;
        let l = line3();
        let e = SubsetElement::new(l.full(), l.set_of(&["m"]).unwrap());
        let fam = close_family(&l, &[e], &b).unwrap();
        let mut expected: Vec<SubsetElement> =
            l.opens().unwrap().iter().map(|&u| SubsetElement::trivial(u)).collect();
        expected.push(e);
        expected.sort();
        assert_eq!(fam.elements().unwrap(), expected);

        let s = sierp();
        let fam = close_family(&s, &[], &b).unwrap();
        assert!(fam.elements().unwrap().iter().all(|e| e.i.is_empty()));
        assert_eq!(fam.elements().unwrap().len(), s.opens().unwrap().len());

        // P9 minus its centre has no non-empty negligible subsets, so the
        // hull adds nothing beyond the base element.
        let p = p9();
        let c = p.set_of(&["(m,m)"]).unwrap();
        let e = SubsetElement::new(p.full(), c);
        let fam = close_family(&p, &[e], &b).unwrap();
        let rest = p.full().minus(c);
        assert_eq!(max_negligible(&p, rest), PointSet::EMPTY);
        assert_eq!(fam.elements_on(rest), vec![PointSet::EMPTY]);
        let nontrivial: Vec<_> = fam.elements().unwrap().into_iter().filter(|e| !e.i.is_empty()).collect();
        assert_eq!(nontrivial, vec![e]);
    }

    #[test]
    fn local_hull_matches_naive_fixpoint() {
        let b = Budget::DEFAULT;
        for s in probes_up_to(3, &b).unwrap().into_iter().chain([line3()]) {
            let opens = s.opens().unwrap();
            let cse: Vec<SubsetElement> = opens
                .iter()
                .flat_map(|&u| closed_subsets_within(&s, u).map(move |i| SubsetElement::new(u, i)))
                .filter(|e| !e.i.is_empty())
                .collect();
            let mut bases: Vec<Vec<SubsetElement>> = vec![vec![]];
            bases.extend(cse.iter().map(|&e| vec![e]));
            for w in cse.windows(2) {
                bases.push(w.to_vec());
            }
            for base in bases {
                let fast = close_family(&s, &base, &b).unwrap().elements().unwrap();
                let naive: Vec<_> = close_family_naive(&s, &base).unwrap().into_iter().collect();
                assert_eq!(fast, naive, "space {:?} base {:?}", s, base);
            }
        }
    }

    #[test]
    fn max_negligible_characterizes_negligible_sets() {
        let b = Budget::DEFAULT;
        for s in probes_up_to(4, &b).unwrap() {
            for &u in s.opens().unwrap().iter() {
                let nmax = max_negligible(&s, u);
                for i in closed_subsets_within(&s, u) {
                    let neg = is_negligible_element(&s, SubsetElement::new(u, i)).unwrap();
                    assert_eq!(neg, i.is_subset(nmax));
                }
            }
        }
    }
}
