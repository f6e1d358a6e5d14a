//! Finite group actions, ramification sets and orbit quotients.
//!
//! The free locus `U` is the set of points with a neighbourhood `V` such that
//! `g·V ∩ V = ∅` for every `g ≠ e`; on a finite space it suffices to test
//! `V = U_x`. Its complement `K` is the upper ramification set and `b(K)` the
//! lower one. A quotient is certified when `K` is negligible and every `x` can
//! be separated from each distinct `g·x` by open sets.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::budget::Budget;
use crate::fintop::{
    continuous_maps, probes_up_to, quotient_space, ContinuousMap, FinSpace, Point, Quotient,
    TopologyError,
};
use crate::gencat::{is_diffuse, PullbackRecord};
use crate::negligible::{is_negligible_local, local_failure};
use crate::pointset::PointSet;

/// Index of a group element inside its [`GroupAction`].
pub type Elem = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

fn invalid(msg: impl Into<String>) -> ActionError {
    ActionError::InvalidAction(msg.into())
}

/// A finite group acting on a finite space by homeomorphisms.
#[derive(Clone, Debug)]
pub struct GroupAction {
    name: String,
    space: FinSpace,
    names: Vec<String>,
    identity: Elem,
    /// `table[g][h] = g·h`
    table: Vec<Vec<Elem>>,
    act: Vec<Vec<Point>>,
}

fn is_homeomorphism(space: &FinSpace, images: &[Point]) -> bool {
    let mut seen = PointSet::EMPTY;
    for &y in images {
        if y >= space.len() || seen.contains(y) {
            return false;
        }
        seen.insert(y);
    }
    (0..space.len()).all(|x| {
        let img: PointSet = space.minopen(x).iter().map(|y| images[y]).collect();
        img == space.minopen(images[x])
    })
}

impl GroupAction {
    /// Validates the group table and the action laws.
    pub fn new(
        name: impl Into<String>,
        space: FinSpace,
        names: Vec<String>,
        identity: Elem,
        table: Vec<Vec<Elem>>,
        act: Vec<Vec<Point>>,
    ) -> Result<Self, ActionError> {
        let k = names.len();
        if k == 0 || identity >= k {
            return Err(invalid("group needs an identity element"));
        }
        if table.len() != k || table.iter().any(|r| r.len() != k || r.iter().any(|&v| v >= k)) {
            return Err(invalid("composition table is not square over the elements"));
        }
        if act.len() != k {
            return Err(invalid("every element needs a point map"));
        }
        for g in 0..k {
            if table[identity][g] != g || table[g][identity] != g {
                return Err(invalid(format!("`{}` is not the identity", names[identity])));
            }
            if !(0..k).any(|h| table[g][h] == identity) {
                return Err(invalid(format!("`{}` has no inverse", names[g])));
            }
        }
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(invalid(format!(
                            "table is not associative at ({},{},{})",
                            names[a], names[b], names[c]
                        )));
                    }
                }
            }
        }
        for (g, imgs) in act.iter().enumerate() {
            if imgs.len() != space.len() || !is_homeomorphism(&space, imgs) {
                return Err(invalid(format!("`{}` does not act by a homeomorphism", names[g])));
            }
        }
        if act[identity].iter().enumerate().any(|(x, &y)| x != y) {
            return Err(invalid("identity does not act trivially"));
        }
        for g in 0..k {
            for h in 0..k {
                let gh = table[g][h];
                if (0..space.len()).any(|x| act[gh][x] != act[g][act[h][x]]) {
                    return Err(invalid(format!(
                        "action of `{}` is not the composite of `{}` and `{}`",
                        names[gh], names[g], names[h]
                    )));
                }
            }
        }
        Ok(GroupAction {
            name: name.into(),
            space,
            names,
            identity,
            table,
            act,
        })
    }

    /// Group generated by the given point permutations. Elements are named
    /// `e`, the generator names, then `w1`, `w2`, ... in discovery order.
    pub fn generated(
        name: impl Into<String>,
        space: FinSpace,
        generators: &[(&str, Vec<Point>)],
    ) -> Result<Self, ActionError> {
        let n = space.len();
        let id: Vec<Point> = (0..n).collect();
        let mut perms: Vec<Vec<Point>> = vec![id.clone()];
        let mut names = vec!["e".to_string()];
        let mut index: BTreeMap<Vec<Point>, Elem> = BTreeMap::from([(id, 0)]);
        for (gname, p) in generators {
            if p.len() != n {
                return Err(invalid(format!("generator `{gname}` has the wrong length")));
            }
            if !index.contains_key(p) {
                index.insert(p.clone(), perms.len());
                perms.push(p.clone());
                names.push(gname.to_string());
            }
        }
        let mut queue: VecDeque<Elem> = (0..perms.len()).collect();
        let mut fresh = 0;
        while let Some(a) = queue.pop_front() {
            for (_, g) in generators {
                let prod: Vec<Point> = (0..n).map(|x| g[perms[a][x]]).collect();
                if !index.contains_key(&prod) {
                    if perms.len() > 4096 {
                        return Err(invalid("generated group is too large"));
                    }
                    fresh += 1;
                    index.insert(prod.clone(), perms.len());
                    names.push(format!("w{fresh}"));
                    queue.push_back(perms.len());
                    perms.push(prod);
                }
            }
        }
        let k = perms.len();
        let table = (0..k)
            .map(|g| {
                (0..k)
                    .map(|h| {
                        let gh: Vec<Point> = (0..n).map(|x| perms[g][perms[h][x]]).collect();
                        index[&gh]
                    })
                    .collect()
            })
            .collect();
        GroupAction::new(name, space, names, 0, table, perms)
    }

    pub fn trivial(space: &FinSpace) -> Self {
        GroupAction::generated("trivial", space.clone(), &[]).expect("trivial group")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &FinSpace {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn element_names(&self) -> &[String] {
        &self.names
    }

    pub fn element_name(&self, g: Elem) -> &str {
        &self.names[g]
    }

    pub fn identity(&self) -> Elem {
        self.identity
    }

    pub fn mul(&self, g: Elem, h: Elem) -> Elem {
        self.table[g][h]
    }

    pub fn table(&self) -> &[Vec<Elem>] {
        &self.table
    }

    pub fn inverse(&self, g: Elem) -> Elem {
        (0..self.order())
            .find(|&h| self.table[g][h] == self.identity)
            .expect("validated group")
    }

    #[inline]
    pub fn apply(&self, g: Elem, x: Point) -> Point {
        self.act[g][x]
    }

    pub fn apply_set(&self, g: Elem, s: PointSet) -> PointSet {
        s.iter().map(|x| self.act[g][x]).collect()
    }

    pub fn as_map(&self, g: Elem) -> ContinuousMap {
        ContinuousMap::new(self.space.clone(), self.space.clone(), self.act[g].clone())
            .expect("homeomorphism")
    }

    pub fn non_identity(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.order()).filter(move |&g| g != self.identity)
    }

    pub fn orbit(&self, x: Point) -> PointSet {
        (0..self.order()).map(|g| self.act[g][x]).collect()
    }

    /// Orbits ordered by least point.
    pub fn orbits(&self) -> Vec<PointSet> {
        let mut rest = self.space.full();
        let mut out = Vec::new();
        while let Some(x) = rest.first() {
            let o = self.orbit(x);
            rest = rest.minus(o);
            out.push(o);
        }
        out
    }

    pub fn stabilizer(&self, x: Point) -> Vec<Elem> {
        (0..self.order()).filter(|&g| self.act[g][x] == x).collect()
    }

    pub fn is_invariant(&self, s: PointSet) -> bool {
        (0..self.order()).all(|g| self.apply_set(g, s) == s)
    }
}

/// Free locus `U` and upper ramification set `K = B − U`.
pub fn upper_ramification(action: &GroupAction) -> (PointSet, PointSet) {
    let b = action.space();
    let free: PointSet = (0..b.len())
        .filter(|&x| {
            let ux = b.minopen(x);
            action.non_identity().all(|g| !action.apply_set(g, ux).meets(ux))
        })
        .collect();
    (free, b.full().minus(free))
}

/// A point, a group element moving it, and the two minimal opens.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeparationRecord {
    pub x: Point,
    pub g: Elem,
    pub gx: Point,
    pub ux: PointSet,
    pub ugx: PointSet,
    pub separated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationReport {
    pub separated: bool,
    pub records: Vec<SeparationRecord>,
    /// Minimal opens that are symmetric neighbourhoods of their point.
    pub symmetric: Vec<Option<PointSet>>,
}

impl SeparationReport {
    pub fn first_failure(&self) -> Option<&SeparationRecord> {
        self.records.iter().find(|r| !r.separated)
    }
}

/// Separation of every `x` from each `g·x ≠ x`, decided on minimal opens.
/// `U_x` is then a symmetric neighbourhood of `x`; a point has some symmetric
/// neighbourhood iff `U_x` is one.
pub fn separation_check(action: &GroupAction) -> SeparationReport {
    let b = action.space();
    let mut records = Vec::new();
    for x in 0..b.len() {
        for g in 0..action.order() {
            let gx = action.apply(g, x);
            if gx == x {
                continue;
            }
            let (ux, ugx) = (b.minopen(x), b.minopen(gx));
            records.push(SeparationRecord {
                x,
                g,
                gx,
                ux,
                ugx,
                separated: !ux.meets(ugx),
            });
        }
    }
    let symmetric = (0..b.len())
        .map(|x| {
            let ux = b.minopen(x);
            let ok = (0..action.order()).all(|g| {
                let img = action.apply_set(g, ux);
                if action.apply(g, x) == x {
                    img == ux
                } else {
                    !img.meets(ux)
                }
            });
            ok.then_some(ux)
        })
        .collect();
    SeparationReport {
        separated: records.iter().all(|r| r.separated),
        records,
        symmetric,
    }
}

/// Orbit space with its projection.
pub fn build_quotient(action: &GroupAction) -> Quotient {
    quotient_space(action.space(), &action.orbits()).expect("orbits partition the space")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept {
        b_diffuse: bool,
        lower_negligible: bool,
    },
    Reject {
        reason: String,
        witness: String,
    },
}

#[derive(Clone, Debug)]
pub struct QuotientCertificate {
    pub free_locus: PointSet,
    pub upper: PointSet,
    pub quotient: Quotient,
    pub lower: PointSet,
    pub separation: SeparationReport,
    pub verdict: Verdict,
}

impl QuotientCertificate {
    pub fn accepted(&self) -> bool {
        matches!(self.verdict, Verdict::Accept { .. })
    }
}

pub const REASON_RAMIFICATION: &str = "ramification not negligible";
pub const REASON_SEPARATION: &str = "orbit points not separated";

pub fn certify_pseudoetale(action: &GroupAction) -> QuotientCertificate {
    let b = action.space();
    let (free_locus, upper) = upper_ramification(action);
    let quotient = build_quotient(action);
    let lower = quotient.projection.image(upper);
    let separation = separation_check(action);
    let verdict = if let Some(x) = local_failure(b, upper) {
        Verdict::Reject {
            reason: REASON_RAMIFICATION.into(),
            witness: format!(
                "U_{} minus K = {} is not connected and non-empty",
                b.label(x),
                b.fmt_set(b.minopen(x).minus(upper))
            ),
        }
    } else if let Some(r) = separation.first_failure() {
        Verdict::Reject {
            reason: REASON_SEPARATION.into(),
            witness: format!(
                "{} and {}·{} = {} have meeting minimal opens {} and {}",
                b.label(r.x),
                action.element_name(r.g),
                b.label(r.x),
                b.label(r.gx),
                b.fmt_set(r.ux),
                b.fmt_set(r.ugx)
            ),
        }
    } else {
        Verdict::Accept {
            b_diffuse: is_diffuse(&quotient.projection).diffuse,
            lower_negligible: is_negligible_local(&quotient.space, quotient.space.full(), lower),
        }
    };
    QuotientCertificate {
        free_locus,
        upper,
        quotient,
        lower,
        separation,
        verdict,
    }
}

/// A probe map `h : A → Y` for which `h` and `h∘b` disagree on diffuseness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientViolation {
    pub probe: String,
    pub h: Vec<Point>,
    pub h_diffuse: bool,
}

#[derive(Clone, Debug)]
pub struct QuotientPropertyReport {
    pub probe_bound: usize,
    pub b_diffuse: bool,
    pub b_witness: Option<PullbackRecord>,
    pub maps_checked: usize,
    pub violations: Vec<QuotientViolation>,
}

impl QuotientPropertyReport {
    pub fn holds(&self) -> bool {
        self.b_diffuse && self.violations.is_empty()
    }
}

/// For every probe `Y` and continuous `h : A → Y`, compares diffuseness of
/// `h` with that of `h∘b`, and tests `b` itself.
pub fn quotient_property_check(
    action: &GroupAction,
    probe_bound: usize,
    budget: &Budget,
) -> Result<QuotientPropertyReport, TopologyError> {
    let q = build_quotient(action);
    let bv = is_diffuse(&q.projection);
    let mut maps_checked = 0;
    let mut violations = Vec::new();
    for y in probes_up_to(probe_bound, budget)? {
        for h in continuous_maps(&q.space, &y, budget)? {
            maps_checked += 1;
            let hd = is_diffuse(&h).diffuse;
            let hb = h.after(&q.projection).expect("composable");
            if hd != is_diffuse(&hb).diffuse {
                violations.push(QuotientViolation {
                    probe: y.name().to_string(),
                    h: h.images().to_vec(),
                    h_diffuse: hd,
                });
            }
        }
    }
    Ok(QuotientPropertyReport {
        probe_bound,
        b_diffuse: bv.diffuse,
        b_witness: bv.witness,
        maps_checked,
        violations,
    })
}

/// Every fiber of `map` has at most `n` points.
pub fn fiber_bound_check(map: &ContinuousMap, n: usize) -> bool {
    (0..map.cod().len()).all(|y| map.preimage(PointSet::singleton(y)).len() <= n)
}
