//! Maps into a group quotient, represented by maps into the space acted on.
//!
//! Two maps `f, g : U → N` name the same morphism into the quotient by `H`
//! when `g = h_C·f` on each connected component `C` of `U` for one `h_C ∈ H`
//! per component. The weaker pointwise condition, `g(x) ∈ H·f(x)` for every
//! `x`, is what the topological quotient sees; the two differ exactly when
//! the required group element cannot be chosen locally constant.

use thiserror::Error;

use crate::fintop::{ContinuousMap, FinSpace, Point};
use crate::gencat::{is_cover, is_diffuse, CoverFailure, CoverMode, GenError};
use crate::grpquot::{Elem, GroupAction};
use crate::pointset::PointSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuotError {
    #[error("maps have different domains or do not land in the acted-on space")]
    SpaceMismatch,
    #[error("map `{0}` is not diffuse")]
    NotDiffuse(String),
    #[error("chart maps do not form a cover: {0}")]
    NotACover(String),
    #[error(transparent)]
    Gen(#[from] GenError),
}

/// Legs `f(j) : dom θ(j) → N` over a cover `θ` of `M`.
#[derive(Clone, Debug)]
pub struct QuotientMorphismRep {
    pub source: FinSpace,
    pub action: GroupAction,
    pub theta: Vec<ContinuousMap>,
    pub legs: Vec<ContinuousMap>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RepFailure {
    LegNotDiffuse(usize),
    /// Points `a ∈ dom θ(j)`, `b ∈ dom θ(k)` over the same point of `M` whose
    /// legs land in different orbits.
    Incompatible {
        j: usize,
        k: usize,
        a: Point,
        b: Point,
    },
}

/// Checks the cover, diffuseness of every leg, and that legs agree up to `H`
/// on every pair of points over the same point of `M`.
pub fn validate_representation(rep: &QuotientMorphismRep) -> Result<Result<(), RepFailure>, QuotError> {
    let n = rep.action.space();
    if rep.theta.len() != rep.legs.len()
        || rep
            .theta
            .iter()
            .zip(&rep.legs)
            .any(|(t, f)| t.dom() != f.dom() || f.cod() != n)
    {
        return Err(QuotError::SpaceMismatch);
    }
    match is_cover(&rep.theta, &rep.source, CoverMode::Pseudoetale)? {
        Ok(()) => {}
        Err(CoverFailure::Uncovered(s)) => {
            return Err(QuotError::NotACover(format!("{} uncovered", rep.source.fmt_set(s))))
        }
        Err(CoverFailure::BadLeg { leg, reason }) => {
            return Err(QuotError::NotACover(format!("leg {leg}: {reason}")))
        }
    }
    if let Some(j) = rep.legs.iter().position(|f| !is_diffuse(f).diffuse) {
        return Ok(Err(RepFailure::LegNotDiffuse(j)));
    }
    for j in 0..rep.theta.len() {
        for k in 0..rep.theta.len() {
            for a in 0..rep.theta[j].dom().len() {
                for b in 0..rep.theta[k].dom().len() {
                    if rep.theta[j].apply(a) != rep.theta[k].apply(b) {
                        continue;
                    }
                    let fa = rep.legs[j].apply(a);
                    if !rep.action.orbit(fa).contains(rep.legs[k].apply(b)) {
                        return Ok(Err(RepFailure::Incompatible { j, k, a, b }));
                    }
                }
            }
        }
    }
    Ok(Ok(()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EqualityKind {
    /// One group element per connected component.
    ComponentWise,
    /// A group element per point, but not per component.
    PointwiseOnly,
    Distinct,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqualityVerdict {
    pub kind: EqualityKind,
    /// Each component with the least `h` satisfying `g = h·f` on all of it.
    pub per_component: Vec<(PointSet, Option<Elem>)>,
    /// Points whose every neighbourhood holds both twist patterns.
    pub pathology_points: PointSet,
}

fn check_pair(f: &ContinuousMap, g: &ContinuousMap, action: &GroupAction) -> Result<(), QuotError> {
    if f.dom() != g.dom() || f.cod() != action.space() || g.cod() != action.space() {
        return Err(QuotError::SpaceMismatch);
    }
    for (name, m) in [("f", f), ("g", g)] {
        if !is_diffuse(m).diffuse {
            return Err(QuotError::NotDiffuse(name.into()));
        }
    }
    Ok(())
}

/// Component-wise comparison; pathology points are left empty.
pub fn morphisms_equal(
    f: &ContinuousMap,
    g: &ContinuousMap,
    action: &GroupAction,
) -> Result<EqualityVerdict, QuotError> {
    check_pair(f, g, action)?;
    let u = f.dom();
    let per_component: Vec<(PointSet, Option<Elem>)> = u
        .components_of(u.full())
        .into_iter()
        .map(|c| {
            let h = (0..action.order())
                .find(|&h| c.iter().all(|x| g.apply(x) == action.apply(h, f.apply(x))));
            (c, h)
        })
        .collect();
    let kind = if per_component.iter().all(|(_, h)| h.is_some()) {
        EqualityKind::ComponentWise
    } else if (0..u.len()).all(|x| action.orbit(f.apply(x)).contains(g.apply(x))) {
        EqualityKind::PointwiseOnly
    } else {
        EqualityKind::Distinct
    };
    Ok(EqualityVerdict {
        kind,
        per_component,
        pathology_points: PointSet::EMPTY,
    })
}

/// [`morphisms_equal`] plus the pathology points: `x` such that `U_x`
/// contains a point where `g = f ≠ σ·f` and a point where `g = σ·f ≠ f`, for
/// some `σ ≠ e`.
pub fn pointwise_vs_component_report(
    f: &ContinuousMap,
    g: &ContinuousMap,
    action: &GroupAction,
) -> Result<EqualityVerdict, QuotError> {
    let mut v = morphisms_equal(f, g, action)?;
    let u = f.dom();
    v.pathology_points = (0..u.len())
        .filter(|&x| {
            action.non_identity().any(|s| {
                let ux = u.minopen(x);
                let plain = ux.iter().any(|y| {
                    let (fy, gy) = (f.apply(y), g.apply(y));
                    gy == fy && action.apply(s, fy) != fy
                });
                let twisted = ux.iter().any(|y| {
                    let (fy, gy) = (f.apply(y), g.apply(y));
                    let sfy = action.apply(s, fy);
                    gy == sfy && sfy != fy
                });
                plain && twisted
            })
        })
        .collect();
    Ok(v)
}

/// Searches for a continuous lift `δ : U → ⊔_h N` into the overlap of the
/// group canopy with `ρ₁∘δ = f` and `ρ₂∘δ = g`, returning the copy chosen at
/// each point. Such a lift exists iff `f` and `g` agree in the affinized
/// quotient.
pub fn overlap_lift(f: &ContinuousMap, g: &ContinuousMap, action: &GroupAction) -> Option<Vec<Elem>> {
    let u = f.dom();
    let n = u.len();
    let candidates: Vec<Vec<Elem>> = (0..n)
        .map(|x| {
            (0..action.order())
                .filter(|&h| action.apply(h, f.apply(x)) == g.apply(x))
                .collect()
        })
        .collect();
    // copies are open and disjoint, so comparable points must use the same copy
    let mut choice = vec![usize::MAX; n];
    fn rec(u: &FinSpace, cands: &[Vec<Elem>], choice: &mut Vec<Elem>, x: usize) -> bool {
        if x == choice.len() {
            return true;
        }
        for &h in &cands[x] {
            let ok = (0..x).all(|y| {
                let comparable = u.minopen(x).contains(y) || u.minopen(y).contains(x);
                !comparable || choice[y] == h
            });
            if ok {
                choice[x] = h;
                if rec(u, cands, choice, x + 1) {
                    return true;
                }
            }
        }
        false
    }
    rec(u, &candidates, &mut choice, 0).then_some(choice)
}
