//! Acceptance suite. Each criterion yields one report line; the report must
//! be identical across runs, and every criterion must pass.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gentop::canopy::{affinize, canopy_from_cover, canopy_from_group_action, validate_canopy, verify_affinization};
use gentop::fintop::{is_homeomorphic, probe_catalog, probes_up_to, ContinuousMap, FinSpace};
use gentop::fixtures::{
    fixture_canopies, halfturn_c8, k5, khalimsky_circle, line3, p9, random_spaces, reflection_p25, rotation_p25,
    sierp, swap_p9,
};
use gentop::gencat::{diffuse_maps, is_diffuse, pullback_embedding};
use gentop::grpquot::{
    build_quotient, certify_pseudoetale, fiber_bound_check, quotient_property_check, upper_ramification,
    GroupAction, Verdict, REASON_RAMIFICATION,
};
use gentop::lambda_rep::{lambda_construct, pullback_via_lambda, verify_representability, NegInstance};
use gentop::negligible::{closed_subsets_within, is_negligible_element, ylem2_check, SubsetElement};
use gentop::quotmor::overlap_lift;
use gentop::schwarz_numeric::{
    f_eval, find_witness, pathology_witness_search, symmetry_scan, SchwarzConfig, WitnessKind,
};
use gentop::{Budget, PointSet};

const LIMIT_ORACLE: Duration = Duration::from_secs(60);
const LIMIT_LAWS: Duration = Duration::from_secs(60);
const LIMIT_AFFINIZATION: Duration = Duration::from_secs(120);
const LIMIT_CERTIFIER: Duration = Duration::from_secs(120);
const LIMIT_LAMBDA: Duration = Duration::from_secs(120);
const LIMIT_SCHWARZ: Duration = Duration::from_secs(120);

const RANDOM_SPACES: usize = 500;
const RANDOM_SEED: u64 = 0x5eed_0001;
const TRIPLES: usize = 50;
const TRIPLE_SEED: u64 = 0x5eed_0008;
const PROBES: usize = 3;

const F_ZERO_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-9;
const SLOPE_SAMPLES: usize = 10_000;
const SLOPE_H: f64 = 1e-6;

struct Line {
    id: usize,
    pass: bool,
    detail: String,
}

impl Line {
    fn render(&self) -> String {
        format!("criterion {:>2}: {} {}", self.id, if self.pass { "PASS" } else { "FAIL" }, self.detail)
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> (bool, String)) -> (bool, String, Duration) {
    let start = Instant::now();
    let (pass, detail) = f();
    let took = start.elapsed();
    (pass && took < limit, detail, took)
}

fn catalog_up_to_4() -> Vec<FinSpace> {
    let budget = Budget::DEFAULT;
    (0..=4).flat_map(|n| probe_catalog(n, &budget).unwrap()).collect()
}

fn oracle_equivalence() -> (bool, String) {
    let mut checked = 0usize;
    let mut disagreements = 0usize;
    let mut run = |x: &FinSpace| {
        for i in closed_subsets_within(x, x.full()) {
            checked += 1;
            if !ylem2_check(x, i).unwrap().agrees {
                disagreements += 1;
            }
        }
    };
    for x in catalog_up_to_4() {
        run(&x);
    }
    for x in random_spaces(RANDOM_SEED, RANDOM_SPACES, 6..=8) {
        run(&x);
    }
    (
        disagreements == 0,
        format!("negligibility oracle: {checked} closed sets, {disagreements} disagreements"),
    )
}

fn neg(x: &FinSpace, u: PointSet, i: PointSet) -> bool {
    is_negligible_element(x, SubsetElement::new(u, i)).unwrap()
}

fn closure_laws() -> (bool, String) {
    let mut violations = [0usize; 5];
    let mut instances = 0usize;
    for x in catalog_up_to_4() {
        let opens = x.opens().unwrap();
        let full = x.full();
        let negligible: Vec<PointSet> = closed_subsets_within(&x, full).filter(|&i| neg(&x, full, i)).collect();
        for &i in &negligible {
            instances += 1;
            if !x.is_closed_set(i) || !x.interior_of(i).is_empty() {
                violations[0] += 1;
            }
            for &j in &negligible {
                if !neg(&x, full, i.union(j)) {
                    violations[1] += 1;
                }
            }
            for j in closed_subsets_within(&x, i) {
                if x.is_closed_set(j) && !neg(&x, full, j) {
                    violations[2] += 1;
                }
            }
            let rest = full.minus(i);
            for j in closed_subsets_within(&x, rest) {
                if neg(&x, rest, j) && !neg(&x, full, i.union(j)) {
                    violations[3] += 1;
                }
            }
        }
        for &u in opens.iter() {
            for i in closed_subsets_within(&x, u).filter(|&i| neg(&x, u, i)) {
                for &v in opens.iter().filter(|v| v.is_subset(u)) {
                    if !neg(&x, v, v.inter(i)) {
                        violations[4] += 1;
                    }
                }
            }
        }
    }
    let total: usize = violations.iter().sum();
    (
        total == 0,
        format!(
            "closure laws over {instances} negligible sets: violations nowhere-dense={} union={} closed-subset={} two-stage={} restriction={}",
            violations[0], violations[1], violations[2], violations[3], violations[4]
        ),
    )
}

fn covers_up_to_three(opens: &[PointSet], full: PointSet) -> Vec<Vec<PointSet>> {
    let nonempty: Vec<PointSet> = opens.iter().copied().filter(|u| !u.is_empty()).collect();
    let mut out = Vec::new();
    let n = nonempty.len();
    for a in 0..n {
        if nonempty[a] == full {
            out.push(vec![nonempty[a]]);
        }
        for b in a + 1..n {
            if nonempty[a].union(nonempty[b]) == full {
                out.push(vec![nonempty[a], nonempty[b]]);
            }
            for c in b + 1..n {
                if nonempty[a].union(nonempty[b]).union(nonempty[c]) == full {
                    out.push(vec![nonempty[a], nonempty[b], nonempty[c]]);
                }
            }
        }
    }
    out
}

fn affinization_property() -> (bool, String) {
    let budget = Budget::DEFAULT;
    let canopies = fixture_canopies();
    let mut failing = Vec::new();
    for c in &canopies {
        let ok = validate_canopy(c).is_ok()
            && affinize(c)
                .ok()
                .and_then(|aff| verify_affinization(&aff, PROBES, &budget).ok())
                .is_some_and(|r| r.passes());
        if !ok {
            failing.push(c.name.clone());
        }
    }
    let mut covers = 0usize;
    let mut round_trip_failures = 0usize;
    for x in catalog_up_to_4().into_iter().filter(|x| !x.is_empty()) {
        let opens = x.opens().unwrap();
        for cover in covers_up_to_three(&opens, x.full()) {
            covers += 1;
            let same = canopy_from_cover(&x, &cover)
                .ok()
                .and_then(|c| affinize(&c).ok())
                .is_some_and(|aff| is_homeomorphic(aff.space(), &x));
            if !same {
                round_trip_failures += 1;
            }
        }
    }
    (
        canopies.len() == 20 && failing.is_empty() && round_trip_failures == 0,
        format!(
            "affinization: {}/{} fixture canopies verified (probes <= {PROBES}){}; round trip on {covers} covers, {round_trip_failures} failures",
            canopies.len() - failing.len(),
            canopies.len(),
            if failing.is_empty() { String::new() } else { format!(" failing {}", failing.join(",")) },
        ),
    )
}

fn certifier() -> (bool, String, String) {
    let budget = Budget::DEFAULT;
    let rot = rotation_p25();
    let rot_cert = certify_pseudoetale(&rot);
    let rot_prop = quotient_property_check(&rot, PROBES, &budget).unwrap();
    let swap = swap_p9();
    let swap_cert = certify_pseudoetale(&swap);
    let swap_reject = matches!(&swap_cert.verdict, Verdict::Reject { reason, .. } if reason == REASON_RAMIFICATION);
    let swap_b_diffuse = is_diffuse(&build_quotient(&swap).projection).diffuse;
    let pass = rot_cert.accepted() && rot_prop.holds() && swap_reject && !swap_b_diffuse;
    let detail = format!(
        "certifier: rot accepted={} quotient property holds={} ({} maps, {} violations); swap rejected for ramification={} swap b non-diffuse={}",
        rot_cert.accepted(),
        rot_prop.holds(),
        rot_prop.maps_checked,
        rot_prop.violations.len(),
        swap_reject,
        !swap_b_diffuse
    );
    let mirror = reflection_p25();
    let mirror_cert = certify_pseudoetale(&mirror);
    let mirror_b = is_diffuse(&build_quotient(&mirror).projection);
    let info = format!(
        "info: mirror on P25 rejected for ramification={} b non-diffuse={}",
        matches!(&mirror_cert.verdict, Verdict::Reject { reason, .. } if reason == REASON_RAMIFICATION),
        !mirror_b.diffuse
    );
    (pass, detail, info)
}

fn fixture_actions() -> Vec<GroupAction> {
    vec![
        rotation_p25(),
        swap_p9(),
        halfturn_c8(),
        reflection_p25(),
        GroupAction::trivial(&sierp()),
        GroupAction::trivial(&line3()),
        GroupAction::trivial(&k5()),
    ]
}

fn fiber_bound() -> (bool, String) {
    let mut accepted = 0usize;
    let mut over = 0usize;
    for a in fixture_actions() {
        if certify_pseudoetale(&a).accepted() {
            accepted += 1;
            if !fiber_bound_check(&build_quotient(&a).projection, a.order()) {
                over += 1;
            }
        }
    }
    (over == 0 && accepted > 0, format!("fiber bound: {accepted} accepted quotients, {over} with a fiber above |G|"))
}

fn overlap_witnesses() -> (bool, String) {
    let budget = Budget::DEFAULT;
    let rot = rotation_p25();
    let p = rot.space().clone();
    let b = build_quotient(&rot).projection;
    let canopy = canopy_from_group_action(&rot);
    let ov = &canopy.overlaps[&(0, 0)];
    let pt = FinSpace::point();
    let mut pairs = 0usize;
    let mut misses = 0usize;
    for x in 0..p.len() {
        for y in 0..p.len() {
            if b.apply(x) != b.apply(y) {
                continue;
            }
            pairs += 1;
            let in_overlap = (0..ov.space.len()).any(|q| ov.rho1.apply(q) == x && ov.rho2.apply(q) == y);
            let f = ContinuousMap::constant(&pt, &p, x);
            let g = ContinuousMap::constant(&pt, &p, y);
            if !in_overlap || overlap_lift(&f, &g, &rot).is_none() {
                misses += 1;
            }
        }
    }
    let (_, k) = upper_ramification(&rot);
    let pb = pullback_via_lambda(&b, &b, k, &budget).unwrap();
    let surjective = pb.lambda.lambda.is_surjective();
    (
        misses == 0 && surjective,
        format!(
            "overlap witnesses: {pairs} pairs with b(x)=b(y), {misses} misses; lambda onto {} pairs surjective={surjective}",
            pb.pairs.len()
        ),
    )
}

fn representability() -> (bool, String) {
    let budget = Budget::DEFAULT;
    let l = line3();
    let line = NegInstance::new(&l, &[SubsetElement::new(l.full(), l.set_of(&["m"]).unwrap())], &budget).unwrap();
    let line_lam = lambda_construct(&line, &budget).unwrap();
    let line_rep = verify_representability(&line, &line_lam, PROBES, &budget).unwrap();
    let p = p9();
    let grid = NegInstance::new(&p, &[SubsetElement::new(p.full(), p.set_of(&["(m,m)"]).unwrap())], &budget).unwrap();
    let grid_lam = lambda_construct(&grid, &budget).unwrap();
    let grid_rep = verify_representability(&grid, &grid_lam, PROBES, &budget).unwrap();
    let shape = line_lam.len() == 4 && !line_lam.space.is_connected();
    (
        line_rep.holds() && grid_rep.holds() && shape,
        format!(
            "representability: LINE3 holds={} ({} maps) lambda points={} connected={}; P9 holds={} ({} maps) lambda points={}",
            line_rep.holds(),
            line_rep.maps_checked,
            line_lam.len(),
            line_lam.space.is_connected(),
            grid_rep.holds(),
            grid_rep.maps_checked,
            grid_lam.len()
        ),
    )
}

fn pullback_consistency() -> (bool, String) {
    let budget = Budget::DEFAULT;
    let mut rng = ChaCha8Rng::seed_from_u64(TRIPLE_SEED);
    let mut bases = vec![sierp(), line3(), k5(), khalimsky_circle(4), khalimsky_circle(6)];
    bases.extend(random_spaces(TRIPLE_SEED, 5, 3..=5));
    let sources = probes_up_to(3, &budget).unwrap();
    let mut disagreements = 0usize;
    let mut done = 0usize;
    while done < TRIPLES {
        let a = bases.choose(&mut rng).unwrap();
        let opens: Vec<PointSet> = a.opens().unwrap().iter().copied().filter(|u| !u.is_empty()).collect();
        let u = *opens.choose(&mut rng).unwrap();
        let (_, inc) = a.subspace_with_inclusion(u).unwrap();
        let c_space = &sources[rng.gen_range(0..sources.len())];
        let maps = diffuse_maps(c_space, a, &budget).unwrap();
        let Some(c) = maps.choose(&mut rng) else { continue };
        done += 1;
        let direct = pullback_embedding(c, &inc).unwrap();
        let via = pullback_via_lambda(c, &inc, PointSet::EMPTY, &budget).unwrap();
        if !is_homeomorphic(&direct.space, &via.lambda.space) {
            disagreements += 1;
        }
    }
    (disagreements == 0, format!("pullback consistency: {done} triples, {disagreements} disagreements"))
}

fn slope_sign(t: f64) -> f64 {
    match t.rem_euclid(4.0) {
        s if s < 1.0 => 1.0,
        s if s < 3.0 => -1.0,
        _ => 1.0,
    }
}

fn schwarz() -> (bool, String) {
    let zeros_ok = (0..=10).all(|k| f_eval(2.0 * k as f64).abs() <= F_ZERO_TOL);

    let mut pattern_bad = 0usize;
    for i in 0..SLOPE_SAMPLES {
        let t = 4.0 * (i as f64 + 0.5) / SLOPE_SAMPLES as f64;
        let v = f_eval(t);
        let sign_ok = if t < 2.0 { v >= 0.0 } else { v <= 0.0 };
        let d = f_eval(t + SLOPE_H) - f_eval(t - SLOPE_H);
        let slope_ok = d == 0.0 || d.signum() == slope_sign(t) || (t - t.round()).abs() < 2.0 * SLOPE_H;
        if !sign_ok || !slope_ok {
            pattern_bad += 1;
        }
    }

    let (symmetric, grid_points) = symmetry_scan(0.01, SYMMETRY_TOL, |_, _| {});

    let cfg = SchwarzConfig::default();
    let (witnesses, strata_covered) = match pathology_witness_search(&cfg) {
        Ok(r) => {
            let expected = ["axis", "C1", "C2", "C3", "C4", "C5"];
            let covered = expected.iter().all(|s| {
                cfg.radii.iter().all(|&rad| {
                    [WitnessKind::Type1, WitnessKind::Type2].iter().all(|&k| {
                        r.witnesses
                            .iter()
                            .any(|w| w.stratum == *s && w.radius == rad && w.kind == k)
                    })
                })
            });
            (r.witnesses.len(), covered && *cfg.radii.last().unwrap() <= 0.02)
        }
        Err(_) => (0, false),
    };

    // g > 0 throughout the first ball and g < 0 throughout the second
    let positive = find_witness([0.2, 0.0, 0.0], 0.005, WitnessKind::Type1, cfg.witness_tol);
    let negative = find_witness([0.3, 0.0, 0.0], 0.02, WitnessKind::Type2, cfg.witness_tol);
    let fixed_sign_none = positive.is_err() && negative.is_err();

    (
        zeros_ok && pattern_bad == 0 && symmetric && strata_covered && fixed_sign_none,
        format!(
            "schwarz: zeros={zeros_ok} pattern violations={pattern_bad}/{SLOPE_SAMPLES} symmetry={symmetric} ({grid_points} points) witnesses={witnesses} all strata={strata_covered} fixed-sign none={fixed_sign_none}"
        ),
    )
}

/// Criteria 1 to 9 as report lines, plus elapsed times kept out of the report.
fn run_criteria() -> (Vec<Line>, Vec<String>, Vec<Duration>) {
    let mut lines = Vec::new();
    let mut info = Vec::new();
    let mut times = Vec::new();
    let mut push = |id: usize, (pass, detail, took): (bool, String, Duration)| {
        lines.push(Line { id, pass, detail });
        times.push(took);
    };
    push(1, timed(LIMIT_ORACLE, oracle_equivalence));
    push(2, timed(LIMIT_LAWS, closure_laws));
    push(3, timed(LIMIT_AFFINIZATION, affinization_property));
    let mut mirror = String::new();
    push(
        4,
        timed(LIMIT_CERTIFIER, || {
            let (pass, detail, i) = certifier();
            mirror = i;
            (pass, detail)
        }),
    );
    info.push(mirror);
    push(5, timed(Duration::MAX, fiber_bound));
    push(6, timed(Duration::MAX, overlap_witnesses));
    push(7, timed(LIMIT_LAMBDA, representability));
    push(8, timed(Duration::MAX, pullback_consistency));
    push(9, timed(LIMIT_SCHWARZ, schwarz));
    (lines, info, times)
}

#[test]
fn acceptance() {
    let (first, second) = std::thread::scope(|s| {
        let a = s.spawn(run_criteria);
        let b = s.spawn(run_criteria);
        (a.join().unwrap(), b.join().unwrap())
    });
    let (mut lines, info, times) = first;
    let render = |ls: &[Line]| ls.iter().map(Line::render).collect::<Vec<_>>().join("\n");
    let identical = render(&lines) == render(&second.0) && info == second.1;
    lines.push(Line {
        id: 10,
        pass: identical,
        detail: format!("determinism: two runs byte-identical={identical}"),
    });
    for l in &lines {
        println!("{}", l.render());
    }
    for i in &info {
        println!("{i}");
    }
    for (l, t) in lines.iter().zip(&times) {
        eprintln!("criterion {:>2} took {:.2?}", l.id, t);
    }
    let failed: Vec<usize> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
