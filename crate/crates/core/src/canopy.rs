//! Gluing data and its affinization.
//!
//! A canopy lists charts `A[j]`, overlaps `A[j,k]` and two legs
//! `ρ₁ : A[j,k] → A[j]`, `ρ₂ : A[j,k] → A[k]`. The legs induce a relation `R`
//! on the tagged union `X₁ = ⊔ A[j]`; when `R` is an equivalence relation the
//! affinization is the quotient `X = X₁/R` with legs `α(j) = q∘β(j)`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::budget::Budget;
use crate::fintop::{
    continuous_maps, disjoint_union, disjoint_union_tagged, probes_up_to, quotient_space,
    ContinuousMap, DisjointUnion, FinSpace, Point, Quotient, TopologyError,
};
use crate::gencat::{is_diffuse, is_fdl_local_subset, is_open_embedding};
use crate::grpquot::GroupAction;
use crate::pointset::PointSet;

/// One overlap `A[j,k]` with its two legs.
#[derive(Clone, Debug)]
pub struct Overlap {
    pub space: FinSpace,
    pub rho1: ContinuousMap,
    pub rho2: ContinuousMap,
}

#[derive(Clone, Debug)]
pub struct Canopy {
    pub name: String,
    pub chart_names: Vec<String>,
    pub charts: Vec<FinSpace>,
    pub overlaps: BTreeMap<(usize, usize), Overlap>,
}

/// The equivalence law a canopy relation violates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Law {
    /// Every point must be related to itself (diagonal axiom).
    Reflexive,
    /// `R` must be symmetric (symmetry axiom).
    Symmetric,
    /// `R` must be transitive (composition axiom).
    Transitive,
}

impl Law {
    pub fn axiom(self) -> &'static str {
        match self {
            Law::Reflexive => "diagonal",
            Law::Symmetric => "symmetry",
            Law::Transitive => "composition",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanopyError {
    #[error("{} law fails ({} axiom): {witness}", format!("{:?}", .law).to_lowercase(), .law.axiom())]
    AxiomFailure { law: Law, witness: String },
    #[error("invalid canopy: {0}")]
    Invalid(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

impl Canopy {
    pub fn new(name: impl Into<String>, charts: Vec<(String, FinSpace)>) -> Self {
        let (chart_names, charts) = charts.into_iter().unzip();
        Canopy {
            name: name.into(),
            chart_names,
            charts,
            overlaps: BTreeMap::new(),
        }
    }

    pub fn with_overlap(mut self, j: usize, k: usize, overlap: Overlap) -> Self {
        self.overlaps.insert((j, k), overlap);
        self
    }

    pub fn len(&self) -> usize {
        self.charts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charts.is_empty()
    }

    fn union(&self) -> Result<DisjointUnion, TopologyError> {
        disjoint_union_tagged(&self.charts, &self.chart_names)
    }

    /// `R` as one row per point of `X₁`.
    pub fn relation(&self) -> Result<(DisjointUnion, Vec<PointSet>), TopologyError> {
        let x1 = self.union()?;
        let mut rows = vec![PointSet::EMPTY; x1.space.len()];
        for (&(j, k), ov) in &self.overlaps {
            for z in 0..ov.space.len() {
                let p = x1.tagged(j, ov.rho1.apply(z));
                let q = x1.tagged(k, ov.rho2.apply(z));
                rows[p].insert(q);
            }
        }
        Ok((x1, rows))
    }
}

/// Checks leg shapes and that the induced relation is an equivalence.
pub fn validate_canopy(canopy: &Canopy) -> Result<(), CanopyError> {
    if canopy.is_empty() {
        return Err(CanopyError::Invalid("no charts".into()));
    }
    for (&(j, k), ov) in &canopy.overlaps {
        if j >= canopy.len() || k >= canopy.len() {
            return Err(CanopyError::Invalid(format!("overlap ({j},{k}) names a missing chart")));
        }
        for (leg, map, target) in [("rho1", &ov.rho1, j), ("rho2", &ov.rho2, k)] {
            if map.dom() != &ov.space || map.cod() != &canopy.charts[target] {
                return Err(CanopyError::Invalid(format!(
                    "{leg} of overlap ({j},{k}) has the wrong domain or codomain"
                )));
            }
            if !map.is_open_map() {
                return Err(CanopyError::Invalid(format!("{leg} of overlap ({j},{k}) is not open")));
            }
            match is_fdl_local_subset(map) {
                Ok(true) => {}
                Ok(false) => {
                    return Err(CanopyError::Invalid(format!(
                        "{leg} of overlap ({j},{k}) is not a local embedding"
                    )))
                }
                Err(e) => {
                    return Err(CanopyError::Invalid(format!("{leg} of overlap ({j},{k}): {e}")))
                }
            }
        }
    }
    let (x1, rows) = canopy.relation()?;
    let label = |p: Point| x1.space.label(p).to_string();
    for p in 0..rows.len() {
        if !rows[p].contains(p) {
            return Err(CanopyError::AxiomFailure {
                law: Law::Reflexive,
                witness: format!("{} is not related to itself", label(p)),
            });
        }
    }
    for p in 0..rows.len() {
        for q in rows[p] {
            if !rows[q].contains(p) {
                return Err(CanopyError::AxiomFailure {
                    law: Law::Symmetric,
                    witness: format!("{} ~ {} but not conversely", label(p), label(q)),
                });
            }
        }
    }
    for p in 0..rows.len() {
        for q in rows[p] {
            if let Some(r) = rows[q].minus(rows[p]).first() {
                return Err(CanopyError::AxiomFailure {
                    law: Law::Transitive,
                    witness: format!(
                        "{} ~ {} ~ {} but {} !~ {}",
                        label(p),
                        label(q),
                        label(r),
                        label(p),
                        label(r)
                    ),
                });
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct Affinization {
    pub canopy: Canopy,
    pub x1: DisjointUnion,
    pub relation: Vec<PointSet>,
    pub quotient: Quotient,
    pub alpha: Vec<ContinuousMap>,
}

impl Affinization {
    pub fn space(&self) -> &FinSpace {
        &self.quotient.space
    }
}

pub fn affinize(canopy: &Canopy) -> Result<Affinization, CanopyError> {
    validate_canopy(canopy)?;
    let (x1, relation) = canopy.relation()?;
    let mut classes: Vec<PointSet> = Vec::new();
    let mut seen = PointSet::EMPTY;
    for (p, &row) in relation.iter().enumerate() {
        if !seen.contains(p) {
            seen = seen.union(row);
            classes.push(row);
        }
    }
    let quotient = quotient_space(&x1.space, &classes)?;
    let alpha = x1
        .injections
        .iter()
        .map(|b| quotient.projection.after(b).expect("composable"))
        .collect();
    Ok(Affinization {
        canopy: canopy.clone(),
        x1,
        relation,
        quotient,
        alpha,
    })
}

/// Single chart `M` with overlap `⊔_g M`; `ρ₁` folds the copies and `ρ₂` acts
/// by `g` on the copy tagged `g`.
pub fn canopy_from_group_action(action: &GroupAction) -> Canopy {
    let m = action.space().clone();
    let tags: Vec<String> = action.element_names().to_vec();
    let copies = vec![m.clone(); action.order()];
    let du = disjoint_union_tagged(&copies, &tags).expect("within size limits");
    let (mut fold, mut act) = (Vec::new(), Vec::new());
    for p in 0..du.space.len() {
        let (g, x) = du.untag(p);
        fold.push(x);
        act.push(action.apply(g, x));
    }
    let rho1 = ContinuousMap::new(du.space.clone(), m.clone(), fold).expect("fold is continuous");
    let rho2 = ContinuousMap::new(du.space.clone(), m.clone(), act).expect("action is continuous");
    Canopy::new(format!("{}-canopy", action.name()), vec![(m.name().to_string(), m)]).with_overlap(
        0,
        0,
        Overlap {
            space: du.space,
            rho1,
            rho2,
        },
    )
}

/// Charts are the given open subspaces; every ordered pair gets its
/// intersection as overlap, with inclusions as legs.
pub fn canopy_from_cover(space: &FinSpace, opens: &[PointSet]) -> Result<Canopy, CanopyError> {
    for &u in opens {
        if !space.is_open_set(u) {
            return Err(CanopyError::Invalid(format!("{} is not open", space.fmt_set(u))));
        }
    }
    let charts: Vec<(String, FinSpace)> = opens
        .iter()
        .enumerate()
        .map(|(j, &u)| Ok((format!("U{j}"), space.subspace(u)?)))
        .collect::<Result<_, TopologyError>>()?;
    let mut canopy = Canopy::new(format!("{}-cover", space.name()), charts);
    for (j, &uj) in opens.iter().enumerate() {
        for (k, &uk) in opens.iter().enumerate() {
            let w = uj.inter(uk);
            let ov = space.subspace(w)?;
            let into = |u: PointSet, chart: &FinSpace| {
                let pos: Vec<Point> = w
                    .iter()
                    .map(|x| u.iter().position(|y| y == x).expect("w ⊆ u"))
                    .collect();
                ContinuousMap::new(ov.clone(), chart.clone(), pos).expect("inclusion")
            };
            let rho1 = into(uj, &canopy.charts[j]);
            let rho2 = into(uk, &canopy.charts[k]);
            canopy.overlaps.insert((j, k), Overlap { space: ov, rho1, rho2 });
        }
    }
    Ok(canopy)
}

/// Canopy of `⊔ parts` covered by its parts, for building multi-chart data
/// from unrelated spaces.
pub fn canopy_of_parts(parts: &[FinSpace]) -> Result<Canopy, CanopyError> {
    let du = disjoint_union(parts)?;
    let opens: Vec<PointSet> = du.injections.iter().map(|i| i.image_all()).collect();
    canopy_from_cover(&du.space, &opens)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColimitFailure {
    pub probe: String,
    pub glue: Vec<Point>,
}

#[derive(Clone, Debug)]
pub struct AffinizationReport {
    /// Images of the `α(j)` cover `X` and each `α(j)` is an open map.
    pub cover: bool,
    pub alpha_diffuse: Vec<bool>,
    /// First pair of `X₁` points where `α`-equality and `R` disagree.
    pub relation_mismatch: Option<(String, String)>,
    /// All legs are open embeddings, so overlaps must match pullbacks exactly.
    pub embedding_canopy: bool,
    /// First chart pair and point pair violating the fibered-product check.
    pub fibered_failure: Option<String>,
    pub probe_bound: usize,
    pub glues_checked: usize,
    pub colimit_failure: Option<ColimitFailure>,
}

impl AffinizationReport {
    pub fn passes(&self) -> bool {
        self.cover
            && self.relation_mismatch.is_none()
            && self.fibered_failure.is_none()
            && self.colimit_failure.is_none()
    }
}

/// Checks the cover condition, that `α`-equality is exactly `R`, the
/// fibered-product condition on overlaps, and the colimit property against
/// probes on at most `probe_bound` points.
///
/// Since the `α(j)` are jointly surjective and `X` carries the quotient
/// topology, compatible chart families into a probe `Y` correspond to
/// continuous `ψ : X → Y`; the colimit check asks that `ψ` be diffuse
/// whenever every `ψ∘α(j)` is.
pub fn verify_affinization(
    aff: &Affinization,
    probe_bound: usize,
    budget: &Budget,
) -> Result<AffinizationReport, CanopyError> {
    let x = aff.space();
    let canopy = &aff.canopy;
    let covered = aff
        .alpha
        .iter()
        .fold(PointSet::EMPTY, |acc, a| acc.union(a.image_all()));
    let cover = covered == x.full() && aff.alpha.iter().all(ContinuousMap::is_open_map);
    let alpha_diffuse = aff.alpha.iter().map(|a| is_diffuse(a).diffuse).collect();

    let n1 = aff.x1.space.len();
    let alpha_of = |p: Point| {
        let (j, xj) = aff.x1.untag(p);
        aff.alpha[j].apply(xj)
    };
    let mut relation_mismatch = None;
    'outer: for p in 0..n1 {
        for q in 0..n1 {
            if (alpha_of(p) == alpha_of(q)) != aff.relation[p].contains(q) {
                relation_mismatch = Some((
                    aff.x1.space.label(p).to_string(),
                    aff.x1.space.label(q).to_string(),
                ));
                break 'outer;
            }
        }
    }

    let embedding_canopy = canopy
        .overlaps
        .values()
        .all(|ov| is_open_embedding(&ov.rho1) && is_open_embedding(&ov.rho2));
    let mut fibered_failure = None;
    'pairs: for j in 0..canopy.len() {
        for k in 0..canopy.len() {
            let ov = canopy.overlaps.get(&(j, k));
            let mut hits: BTreeMap<(Point, Point), usize> = BTreeMap::new();
            if let Some(ov) = ov {
                for z in 0..ov.space.len() {
                    *hits.entry((ov.rho1.apply(z), ov.rho2.apply(z))).or_default() += 1;
                }
            }
            for xj in 0..canopy.charts[j].len() {
                for xk in 0..canopy.charts[k].len() {
                    let same = aff.alpha[j].apply(xj) == aff.alpha[k].apply(xk);
                    let count = hits.get(&(xj, xk)).copied().unwrap_or(0);
                    let ok = match (same, embedding_canopy) {
                        (true, true) => count == 1,
                        (true, false) => count >= 1,
                        (false, _) => count == 0,
                    };
                    if !ok {
                        fibered_failure = Some(format!(
                            "charts ({},{}), points ({},{}): same image {same}, {count} overlap witnesses",
                            canopy.chart_names[j],
                            canopy.chart_names[k],
                            canopy.charts[j].label(xj),
                            canopy.charts[k].label(xk)
                        ));
                        break 'pairs;
                    }
                }
            }
        }
    }

    let mut glues_checked = 0;
    let mut colimit_failure = None;
    'probes: for y in probes_up_to(probe_bound, budget)? {
        for psi in continuous_maps(x, &y, budget)? {
            let legs_diffuse = aff
                .alpha
                .iter()
                .all(|a| is_diffuse(&psi.after(a).expect("composable")).diffuse);
            if !legs_diffuse {
                continue;
            }
            glues_checked += 1;
            if !is_diffuse(&psi).diffuse {
                colimit_failure = Some(ColimitFailure {
                    probe: y.name().to_string(),
                    glue: psi.images().to_vec(),
                });
                break 'probes;
            }
        }
    }

    Ok(AffinizationReport {
        cover,
        alpha_diffuse,
        relation_mismatch,
        embedding_canopy,
        fibered_failure,
        probe_bound,
        glues_checked,
        colimit_failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fintop::is_homeomorphic;
    use crate::fixtures::{line3, p25, rotation_p25, sierp, swap_p9};

    fn line3_cover() -> Canopy {
        let l = line3();
        canopy_from_cover(&l, &[l.full(), l.set_of(&["r"]).unwrap()]).unwrap()
    }

    #[test]
    fn group_canopy_shapes() {
        let c = canopy_from_group_action(&GroupAction::trivial(&sierp()));
        let ov = &c.overlaps[&(0, 0)];
        assert!(is_homeomorphic(&ov.space, &sierp()));
        assert_eq!(ov.rho1, ov.rho2);
        let c = canopy_from_group_action(&rotation_p25());
        assert_eq!(c.overlaps[&(0, 0)].space.len(), 50);
        let c = canopy_from_group_action(&swap_p9());
        assert_eq!(c.overlaps[&(0, 0)].space.len(), 18);
    }

    #[test]
    fn validation_examples() {
        assert_eq!(validate_canopy(&canopy_from_group_action(&rotation_p25())), Ok(()));
        assert_eq!(validate_canopy(&line3_cover()), Ok(()));
        // drop the identity copy from the overlap
        let rot = rotation_p25();
        let full = canopy_from_group_action(&rot);
        let ov = &full.overlaps[&(0, 0)];
        let keep: PointSet = (25..50).collect();
        let (sub, inc) = ov.space.subspace_with_inclusion(keep).unwrap();
        let broken = Canopy::new("broken", vec![("P25".into(), p25())]).with_overlap(
            0,
            0,
            Overlap {
                space: sub,
                rho1: ov.rho1.after(&inc).unwrap(),
                rho2: ov.rho2.after(&inc).unwrap(),
            },
        );
        assert!(matches!(
            validate_canopy(&broken),
            Err(CanopyError::AxiomFailure { law: Law::Reflexive, .. })
        ));
    }

    #[test]
    fn affinize_examples() {
        let aff = affinize(&line3_cover()).unwrap();
        assert!(is_homeomorphic(aff.space(), &line3()));
        let aff = affinize(&canopy_from_group_action(&rotation_p25())).unwrap();
        assert_eq!(aff.space().len(), 13);
        let s = sierp();
        let single = canopy_from_cover(&s, &[s.full()]).unwrap();
        assert!(is_homeomorphic(affinize(&single).unwrap().space(), &s));
    }

    #[test]
    fn verify_examples() {
        let b = Budget::DEFAULT;
        let rep = verify_affinization(&affinize(&line3_cover()).unwrap(), 3, &b).unwrap();
        assert!(rep.passes(), "{rep:?}");
        assert!(rep.embedding_canopy);
        let rep = verify_affinization(&affinize(&canopy_from_group_action(&rotation_p25())).unwrap(), 2, &b)
            .unwrap();
        assert!(rep.cover && rep.relation_mismatch.is_none() && rep.fibered_failure.is_none());
        assert!(!rep.embedding_canopy);
    }

    #[test]
    fn corrupted_alpha_is_caught() {
        let b = Budget::DEFAULT;
        let mut aff = affinize(&line3_cover()).unwrap();
        let x = aff.space().clone();
        let (l, r) = (x.index_of("[l@U0]").unwrap(), x.index_of("[r@U0|r@U1]").unwrap());
        let swapped: Vec<Point> = aff.alpha[0]
            .images()
            .iter()
            .map(|&p| if p == l { r } else if p == r { l } else { p })
            .collect();
        aff.alpha[0] = ContinuousMap::new(aff.alpha[0].dom().clone(), x, swapped).unwrap();
        let rep = verify_affinization(&aff, 1, &b).unwrap();
        assert!(rep.relation_mismatch.is_some());
    }
}
